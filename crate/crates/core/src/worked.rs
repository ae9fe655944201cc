//! Riemannian examples: the energy `L₁`, its Finsler function `F₁`, the
//! biharmonic Lagrangian `L₂`, the second order Finsler function `F₂`, and a
//! fixed-step integrator for the integral curves of a semispray.

use std::fmt::Write as _;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::expr::{sum, DomainError, Expr, Program};
use crate::finsler::FinslerCandidate;
use crate::jet::{JetPoint, JetSpace, Semispray};
use crate::linalg::ExprMatrix;
use crate::sample::{rel_dev, PointFilter};
use crate::variational::Lagrangian;

/// A Riemannian metric `g_{ij}(x)` given by expressions in the base
/// coordinates.
#[derive(Debug, Clone)]
pub struct Metric {
    g: ExprMatrix,
}

impl Metric {
    pub fn new(g: ExprMatrix) -> Result<Self> {
        let n = g.dim();
        if n == 0 {
            return Err(Error::InvalidArgument("metric must have dimension ≥ 1".into()));
        }
        for i in 0..n {
            for j in 0..n {
                if g.get(i, j).max_order().is_some_and(|o| o > 0) {
                    return Err(Error::InvalidArgument(format!(
                        "metric entry ({},{}) depends on velocities",
                        i + 1,
                        j + 1
                    )));
                }
                if j > i && !g.get(i, j).same(g.get(j, i)) {
                    // structurally different entries: compare at probe points
                    for probe in [0.3, -0.7] {
                        let x = vec![probe; n];
                        let a = g.get(i, j).eval_flat(n, &x)?;
                        let b = g.get(j, i).eval_flat(n, &x)?;
                        if rel_dev(a, b) > 1e-12 {
                            return Err(Error::InvalidArgument(format!(
                                "metric is not symmetric at ({},{})",
                                i + 1,
                                j + 1
                            )));
                        }
                    }
                }
            }
        }
        Ok(Self { g })
    }

    pub fn euclidean(n: usize) -> Result<Self> {
        Self::new(ExprMatrix::from_fn(n, |i, j| {
            if i == j {
                Expr::one()
            } else {
                Expr::zero()
            }
        }))
    }

    /// `diag(1, 1 + (x¹)², ..., 1 + (x^{n-1})²)`.
    pub fn warped(n: usize) -> Self {
        Self {
            g: ExprMatrix::from_fn(n, |i, j| match (i, j) {
                (0, 0) => Expr::one(),
                (i, j) if i == j => 1.0 + Expr::x(i).square(),
                _ => Expr::zero(),
            }),
        }
    }

    /// `diag(1, 1 + (x¹)²)`.
    pub fn warped_plane() -> Self {
        Self::warped(2)
    }

    /// Round unit sphere in colatitude/longitude: `diag(1, sin²x¹)`.
    pub fn round_sphere() -> Self {
        Self {
            g: ExprMatrix::from_fn(2, |i, j| match (i, j) {
                (0, 0) => Expr::one(),
                (1, 1) => Expr::x(1).sin().square(),
                _ => Expr::zero(),
            }),
        }
    }

    pub fn dim(&self) -> usize {
        self.g.dim()
    }

    pub fn matrix(&self) -> &ExprMatrix {
        &self.g
    }

    pub fn get(&self, i: usize, j: usize) -> &Expr {
        self.g.get(i, j)
    }

    /// `g(u, v)` for component vectors `u`, `v`.
    pub fn inner(&self, u: &[Expr], v: &[Expr]) -> Expr {
        let n = self.dim();
        sum((0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| self.get(i, j) * &u[i] * &v[j]))
    }

    /// `y^{(order)}` as expressions.
    fn level(&self, order: usize) -> Vec<Expr> {
        (1..=self.dim()).map(|i| Expr::y(order, i)).collect()
    }

    /// Positive definiteness at each point, through a Cholesky factorization.
    pub fn validate(&self, points: &[JetPoint]) -> Result<bool> {
        for p in points {
            let m = self.g.eval(p)?;
            if m.cholesky().is_none() {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Keeps points where `det g ≥ min_det`.
    pub fn det_filter(&self, min_det: f64) -> PointFilter {
        let n = self.dim();
        let prog = Program::compile(&[self.g.det()], n);
        Arc::new(move |p: &JetPoint| {
            prog.eval(p.coords())
                .map(|v| v[0] >= min_det)
                .unwrap_or(false)
        })
    }
}

/// Levi-Civita symbols `γ^i_{jk}`, indices 0-based.
#[derive(Debug, Clone)]
pub struct Christoffel {
    n: usize,
    data: Vec<Expr>,
}

impl Christoffel {
    pub fn get(&self, i: usize, j: usize, k: usize) -> &Expr {
        &self.data[(i * self.n + j) * self.n + k]
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// `γ^i_{jk} u^j v^k` for each `i`.
    pub fn contract(&self, u: &[Expr], v: &[Expr]) -> Vec<Expr> {
        let n = self.n;
        (0..n)
            .map(|i| {
                sum((0..n)
                    .flat_map(|j| (0..n).map(move |k| (j, k)))
                    .filter(|&(j, k)| !self.get(i, j, k).is_zero())
                    .map(|(j, k)| self.get(i, j, k) * &u[j] * &v[k]))
            })
            .collect()
    }
}

/// `γ^i_{jk} = ½g^{il}(∂_k g_{lj} + ∂_j g_{lk} - ∂_l g_{jk})`.
pub fn christoffel(g: &Metric) -> Result<Christoffel> {
    let n = g.dim();
    if g.matrix().det().simplify().is_zero() {
        return Err(Error::SingularMetric);
    }
    let inv = g.matrix().inverse();
    let dg = |a: usize, b: usize, c: usize| g.get(a, b).diff(crate::expr::CoordId::new(0, c + 1));
    let mut data = Vec::with_capacity(n * n * n);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let terms = (0..n).filter(|&l| !inv.get(i, l).is_zero()).map(|l| {
                    let bracket = dg(l, j, k) + dg(l, k, j) - dg(j, k, l);
                    if bracket.is_zero() {
                        Expr::zero()
                    } else {
                        inv.get(i, l) * bracket
                    }
                });
                data.push((0.5 * sum(terms)).simplify());
            }
        }
    }
    Ok(Christoffel { n, data })
}

/// `L₁ = ½ g_{ij} y^{(1)i} y^{(1)j}`.
pub fn build_l1(g: &Metric) -> Result<Lagrangian> {
    let y = g.level(1);
    Lagrangian::new(g.dim(), 1, 0.5 * g.inner(&y, &y))
}

/// `F₁ = √(2L₁)`.
pub fn build_f1(g: &Metric) -> Result<FinslerCandidate> {
    let y = g.level(1);
    FinslerCandidate::new(g.dim(), 1, g.inner(&y, &y).sqrt())
}

/// Geodesic spray `G^i = ½γ^i_{jk} y^{(1)j} y^{(1)k}` on `TM`.
pub fn geodesic_spray(g: &Metric) -> Result<Semispray> {
    let gamma = christoffel(g)?;
    let y = g.level(1);
    let coeffs = gamma.contract(&y, &y).into_iter().map(|e| 0.5 * e).collect();
    Semispray::new(JetSpace::new(g.dim(), 1)?, coeffs)
}

/// Covariant acceleration `z^{(2)i} = y^{(2)i} + ½γ^i_{jk} y^{(1)j} y^{(1)k}`.
pub fn build_z2(g: &Metric) -> Result<Vec<Expr>> {
    let gamma = christoffel(g)?;
    let y = g.level(1);
    Ok(gamma
        .contract(&y, &y)
        .into_iter()
        .zip(g.level(2))
        .map(|(c, y2)| y2 + 0.5 * c)
        .collect())
}

/// Biharmonic Lagrangian `L₂ = ½‖z^{(2)}‖²_g`.
pub fn build_l2(g: &Metric) -> Result<Lagrangian> {
    let z = build_z2(g)?;
    Lagrangian::new(g.dim(), 2, 0.5 * g.inner(&z, &z))
}

/// `F₂ = (‖z‖²‖y‖² - g(y,z)²) / ‖y‖⁵`.
pub fn build_f2(g: &Metric) -> Result<FinslerCandidate> {
    let z = build_z2(g)?;
    let y = g.level(1);
    let q = g.inner(&y, &y);
    let w = g.inner(&y, &z);
    let num = g.inner(&z, &z) * &q - w.square();
    let den = q.square() * q.sqrt();
    FinslerCandidate::new(g.dim(), 2, num / den)
}

/// Keeps points where the component of `z^{(2)}` orthogonal to `y^{(1)}` has
/// `g`-norm at least `min_norm`; `F₂` and its angular tensor degenerate where
/// `z^{(2)} ∥ y^{(1)}`.
pub fn f2_filter(g: &Metric, min_norm: f64) -> Result<PointFilter> {
    let z = build_z2(g)?;
    let y = g.level(1);
    let q = g.inner(&y, &y);
    let perp = g.inner(&z, &z) - g.inner(&y, &z).square() / q;
    let prog = Program::compile(&[perp], g.dim());
    Ok(Arc::new(move |p: &JetPoint| {
        prog.eval(p.coords())
            .map(|v| v[0] >= min_norm * min_norm)
            .unwrap_or(false)
    }))
}

/// Integral curve of a semispray sampled on a uniform time grid.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub space: JetSpace,
    pub times: Vec<f64>,
    pub states: Vec<JetPoint>,
    pub step: f64,
    pub method: &'static str,
}

impl Trajectory {
    /// Header `t,x1..xn,y1_1..y<r>_n`, one row per state.
    pub fn to_csv(&self) -> String {
        let JetSpace { n, r } = self.space;
        let mut out = String::from("t");
        for i in 1..=n {
            let _ = write!(out, ",x{i}");
        }
        for o in 1..=r {
            for i in 1..=n {
                let _ = write!(out, ",y{o}_{i}");
            }
        }
        out.push('\n');
        for (t, s) in self.times.iter().zip(&self.states) {
            let _ = write!(out, "{t:.16e}");
            for v in s.coords() {
                let _ = write!(out, ",{v:.16e}");
            }
            out.push('\n');
        }
        out
    }

    pub fn last(&self) -> &JetPoint {
        self.states.last().expect("trajectory has at least one state")
    }
}

/// Classical RK4 on `dz/dt = S(z)` with fixed step `(t1 - t0)/steps`.
pub fn integrate(s: &Semispray, p0: &JetPoint, t0: f64, t1: f64, steps: usize) -> Result<Trajectory> {
    let space = s.space();
    space.check_same(&p0.space())?;
    if steps == 0 {
        return Err(Error::InvalidArgument("steps must be at least 1".into()));
    }
    if !(t0.is_finite() && t1.is_finite()) {
        return Err(Error::InvalidArgument("integration bounds must be finite".into()));
    }
    let field = s.to_vector_field();
    let prog = field.program();
    let dim = space.dim();
    let h = (t1 - t0) / steps as f64;
    let mut scratch = Vec::new();
    let mut rhs = |z: &[f64], out: &mut [f64]| -> std::result::Result<(), DomainError> {
        prog.eval_into(z, &mut scratch, out)?;
        match out.iter().find(|v| !v.is_finite()) {
            Some(&v) => Err(DomainError {
                op: "non-finite derivative",
                arg: v,
            }),
            None => Ok(()),
        }
    };
    let mut z = p0.coords().to_vec();
    let (mut k1, mut k2, mut k3, mut k4) = (vec![0.0; dim], vec![0.0; dim], vec![0.0; dim], vec![0.0; dim]);
    let mut tmp = vec![0.0; dim];
    let mut times = Vec::with_capacity(steps + 1);
    let mut states = Vec::with_capacity(steps + 1);
    times.push(t0);
    states.push(p0.clone());
    for step in 0..steps {
        let t = t0 + step as f64 * h;
        let fail = |source| Error::Integration { step, time: t, source };
        rhs(&z, &mut k1).map_err(fail)?;
        for i in 0..dim {
            tmp[i] = z[i] + 0.5 * h * k1[i];
        }
        rhs(&tmp, &mut k2).map_err(fail)?;
        for i in 0..dim {
            tmp[i] = z[i] + 0.5 * h * k2[i];
        }
        rhs(&tmp, &mut k3).map_err(fail)?;
        for i in 0..dim {
            tmp[i] = z[i] + h * k3[i];
        }
        rhs(&tmp, &mut k4).map_err(fail)?;
        for i in 0..dim {
            z[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        times.push(t0 + (step + 1) as f64 * h);
        states.push(JetPoint::new(space, z.clone())?);
    }
    Ok(Trajectory {
        space,
        times,
        states,
        step: h,
        method: "rk4",
    })
}
