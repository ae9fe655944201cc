//! Jet spaces `T^rM` and the coordinate objects living on them.
//!
//! Coordinates are `(x^i, y^{(1)i}, ..., y^{(r)i})` with the convention that
//! `y^{(a)}` is the `a`-th derivative of a curve divided by `a!`. All fields and
//! forms store one expression per coordinate in the flat order-major layout of
//! [`CoordId::flat`].

mod fields;
mod operators;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::CoordId;

pub use fields::{OneForm, SemiBasicForm, Tensor11, TwoForm, VectorField};
pub use operators::{
    d_j_alpha, exterior_d, exterior_d_form, fn_bracket_vf_tensor, i_j_alpha, interior,
    interior2, lie_bracket, lie_derivative_oneform, liouville, semispray_apply, tangent_tensor,
    total_lie_derivative, tulczyjew, tulczyjew_power, Semispray,
};

/// The higher order tangent bundle `T^rM` over an `n`-dimensional base.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct JetSpace {
    pub n: usize,
    pub r: usize,
}

impl JetSpace {
    pub fn new(n: usize, r: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::OutOfRange {
                what: "dimension n",
                value: n,
                min: 1,
                max: usize::MAX,
            });
        }
        if r == 0 {
            return Err(Error::OutOfRange {
                what: "jet order r",
                value: r,
                min: 1,
                max: usize::MAX,
            });
        }
        Ok(Self { n, r })
    }

    /// Number of coordinates, `(r+1)·n`.
    pub fn dim(&self) -> usize {
        (self.r + 1) * self.n
    }

    pub fn coord(&self, flat: usize) -> CoordId {
        CoordId::from_flat(flat, self.n)
    }

    pub fn coords(&self) -> impl Iterator<Item = CoordId> + '_ {
        (0..self.dim()).map(|k| self.coord(k))
    }

    pub fn contains(&self, c: CoordId) -> bool {
        c.order <= self.r && c.index >= 1 && c.index <= self.n
    }

    pub(crate) fn check_same(&self, other: &JetSpace) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::SpaceMismatch(format!(
                "T^{}M (n={}) vs T^{}M (n={})",
                self.r, self.n, other.r, other.n
            )))
        }
    }
}

/// A point of `T^rM` given by its flat coordinate vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JetPoint {
    space: JetSpace,
    coords: Vec<f64>,
}

impl JetPoint {
    pub fn new(space: JetSpace, coords: Vec<f64>) -> Result<Self> {
        if coords.len() != space.dim() {
            return Err(Error::InvalidArgument(format!(
                "expected {} coordinates, got {}",
                space.dim(),
                coords.len()
            )));
        }
        Ok(Self { space, coords })
    }

    pub fn space(&self) -> JetSpace {
        self.space
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn get(&self, c: CoordId) -> f64 {
        self.coords[c.flat(self.space.n)]
    }

    pub fn set(&mut self, c: CoordId, v: f64) {
        let k = c.flat(self.space.n);
        self.coords[k] = v;
    }

    /// The block `y^{(order)}` (order 0 is `x`).
    pub fn level(&self, order: usize) -> &[f64] {
        let n = self.space.n;
        &self.coords[order * n..(order + 1) * n]
    }

    /// Membership in `T^r_0M`, i.e. `y^{(1)} != 0`.
    pub fn is_regular(&self) -> bool {
        self.level(1).iter().any(|v| *v != 0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dimensions_and_levels() {
        let s = JetSpace::new(2, 3).unwrap();
        assert_eq!(s.dim(), 8);
        let p = JetPoint::new(s, (0..8).map(|k| k as f64).collect()).unwrap();
        assert_eq!(p.level(2), &[4.0, 5.0]);
        assert_eq!(p.get(CoordId::new(3, 2)), 7.0);
        assert!(p.is_regular());
        assert!(JetSpace::new(0, 1).is_err());
        assert!(JetSpace::new(1, 0).is_err());
        assert!(JetPoint::new(s, vec![0.0; 3]).is_err());
    }
}
