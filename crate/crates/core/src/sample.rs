//! Seeded random sample points and numeric comparison of expressions.
//!
//! Every coordinate is drawn uniformly from `[-1, 1]` by a ChaCha8 stream, so
//! a `(space, seed)` pair always yields the same point sequence. Regular
//! sampling rejects points with `‖y^{(1)}‖∞ < 0.1`; extra filters (metric
//! conditioning, non-degeneracy of a Finsler function, ...) reject more.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::{Expr, Program};
use crate::jet::{JetPoint, JetSpace};

pub const DEFAULT_TOL: f64 = 1e-9;
/// Lower bound on `‖y^{(1)}‖∞` at regular sample points.
pub const REGULAR_MIN: f64 = 0.1;
const MAX_ATTEMPTS: usize = 100_000;

pub type PointFilter = Arc<dyn Fn(&JetPoint) -> bool + Send + Sync>;

/// `|a - b| / max(1, |a|, |b|)`.
pub fn rel_dev(a: f64, b: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let d = (a - b).abs();
    if d.is_nan() {
        return f64::INFINITY;
    }
    d / 1f64.max(a.abs()).max(b.abs())
}

#[derive(Clone)]
pub struct Sampler {
    space: JetSpace,
    rng: ChaCha8Rng,
    regular: bool,
    filters: Vec<PointFilter>,
    max_attempts: usize,
}

impl Sampler {
    pub fn new(space: JetSpace, seed: u64) -> Self {
        Self {
            space,
            rng: ChaCha8Rng::seed_from_u64(seed),
            regular: false,
            filters: Vec::new(),
            max_attempts: MAX_ATTEMPTS,
        }
    }

    /// Restrict to `T^r_0M` with `‖y^{(1)}‖∞ ≥ 0.1`.
    pub fn regular(mut self) -> Self {
        self.regular = true;
        self
    }

    pub fn with_filter(mut self, f: impl Fn(&JetPoint) -> bool + Send + Sync + 'static) -> Self {
        self.filters.push(Arc::new(f));
        self
    }

    pub fn with_filters(mut self, fs: &[PointFilter]) -> Self {
        self.filters.extend(fs.iter().cloned());
        self
    }

    pub fn space(&self) -> JetSpace {
        self.space
    }

    fn admissible(&self, p: &JetPoint) -> bool {
        if self.regular && p.level(1).iter().all(|v| v.abs() < REGULAR_MIN) {
            return false;
        }
        self.filters.iter().all(|f| f(p))
    }

    pub fn next_point(&mut self) -> Result<JetPoint> {
        for _ in 0..self.max_attempts {
            let coords = (0..self.space.dim())
                .map(|_| self.rng.random_range(-1.0..=1.0))
                .collect();
            let p = JetPoint::new(self.space, coords)?;
            if self.admissible(&p) {
                return Ok(p);
            }
        }
        Err(Error::Sampling {
            attempts: self.max_attempts,
        })
    }

    pub fn points(&mut self, count: usize) -> Result<Vec<JetPoint>> {
        (0..count).map(|_| self.next_point()).collect()
    }
}

/// `count` uniform points, optionally regular.
pub fn sample_points(space: JetSpace, count: usize, seed: u64, regular: bool) -> Result<Vec<JetPoint>> {
    let mut s = Sampler::new(space, seed);
    if regular {
        s = s.regular();
    }
    s.points(count)
}

/// Outcome of a numeric comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub equal: bool,
    pub max_dev: f64,
    /// Point at which the largest deviation occurred.
    pub worst_point: Option<Vec<f64>>,
}

/// Largest relative deviation between paired components over `points`.
pub fn max_deviation(points: &[JetPoint], lhs: &[Expr], rhs: &[Expr]) -> Result<(f64, Option<Vec<f64>>)> {
    if lhs.len() != rhs.len() {
        return Err(Error::InvalidArgument(format!(
            "comparing {} against {} components",
            lhs.len(),
            rhs.len()
        )));
    }
    let Some(first) = points.first() else {
        return Ok((0.0, None));
    };
    let n = first.space().n;
    let pl = Program::compile(lhs, n);
    let pr = Program::compile(rhs, n);
    let (mut worst, mut at) = (0.0f64, None);
    let mut scratch = Vec::new();
    let mut a = vec![0.0; lhs.len()];
    let mut b = vec![0.0; rhs.len()];
    for p in points {
        let wrap = |e| Error::DomainAt {
            source: e,
            point: p.coords().to_vec(),
        };
        pl.eval_into(p.coords(), &mut scratch, &mut a).map_err(wrap)?;
        pr.eval_into(p.coords(), &mut scratch, &mut b).map_err(wrap)?;
        for (u, v) in a.iter().zip(&b) {
            let d = rel_dev(*u, *v);
            if d > worst || (d.is_nan() && at.is_none()) {
                worst = d;
                at = Some(p.coords().to_vec());
            }
        }
    }
    Ok((worst, at))
}

/// Largest `|e|/max(1,|e|)` over components and points; the deviation of a
/// residual from zero.
pub fn max_residual(points: &[JetPoint], exprs: &[Expr]) -> Result<(f64, Option<Vec<f64>>)> {
    let zeros = vec![Expr::zero(); exprs.len()];
    max_deviation(points, exprs, &zeros)
}

/// Compares two expressions at `samples` uniform points drawn with `seed`.
pub fn equal_numeric(
    space: JetSpace,
    e1: &Expr,
    e2: &Expr,
    samples: usize,
    tol: f64,
    seed: u64,
) -> Result<Comparison> {
    if samples == 0 {
        return Err(Error::InvalidArgument("samples must be at least 1".into()));
    }
    let points = sample_points(space, samples, seed, false)?;
    let (max_dev, worst_point) =
        max_deviation(&points, std::slice::from_ref(e1), std::slice::from_ref(e2))?;
    Ok(Comparison {
        equal: max_dev <= tol,
        max_dev,
        worst_point,
    })
}
