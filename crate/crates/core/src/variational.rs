//! Order-`k` Lagrangians on `T^{2k-1}M`: Poincaré–Cartan forms, energy,
//! regularity, the Euler–Lagrange residual of a semispray and the canonical
//! (Euler–Lagrange) semispray.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::expr::{sum, CoordId, Expr, Program};
use crate::jet::{
    d_j_alpha, exterior_d, exterior_d_form, i_j_alpha, interior, lie_derivative_oneform,
    liouville, total_lie_derivative, tulczyjew_power, JetPoint, JetSpace, OneForm,
    SemiBasicForm, Semispray, TwoForm,
};
use crate::linalg::{numeric_rank, ExprMatrix};
use crate::report::{CheckItem, CheckReport};
use crate::sample::{max_deviation, max_residual};

pub(crate) fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

pub(crate) fn sign(p: usize) -> f64 {
    if p % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

pub(crate) fn binomial(n: usize, k: usize) -> f64 {
    factorial(n) / (factorial(k) * factorial(n - k))
}

/// A Lagrangian of order `k`, living on `T^{2k-1}M`.
#[derive(Debug, Clone)]
pub struct Lagrangian {
    k: usize,
    space: JetSpace,
    l: Expr,
}

impl Lagrangian {
    pub fn new(n: usize, k: usize, l: Expr) -> Result<Self> {
        if k == 0 {
            return Err(Error::OutOfRange {
                what: "Lagrangian order k",
                value: 0,
                min: 1,
                max: usize::MAX,
            });
        }
        if let Some(m) = l.max_order() {
            if m > k {
                return Err(Error::InvalidArgument(format!(
                    "Lagrangian of order {k} depends on order-{m} coordinates"
                )));
            }
        }
        let space = JetSpace::new(n, 2 * k - 1)?;
        Ok(Self { k, space, l })
    }

    pub fn order(&self) -> usize {
        self.k
    }

    /// The ambient `T^{2k-1}M`.
    pub fn space(&self) -> JetSpace {
        self.space
    }

    pub fn expr(&self) -> &Expr {
        &self.l
    }

    /// Same order, different function (e.g. `C_1(L) - L`).
    pub fn with_expr(&self, l: Expr) -> Result<Self> {
        Self::new(self.space.n, self.k, l)
    }

    fn dl(&self, order: usize, i: usize) -> Expr {
        self.l.diff(CoordId::new(order, i))
    }
}

/// Poincaré–Cartan form, components
/// `θ_{(α-1)i} = (α-1)! Σ_{β=α}^k (-1)^{β-α}/β! · d_T^{β-α}(∂L/∂y^{(β)i})`.
pub fn poincare_cartan(l: &Lagrangian) -> Result<SemiBasicForm> {
    let (k, space) = (l.k, l.space);
    let mut form = OneForm::zero(space);
    for alpha in 1..=k {
        for i in 1..=space.n {
            let mut terms = Vec::new();
            for beta in alpha..=k {
                let t = tulczyjew_power(space, &l.dl(beta, i), beta - alpha)?;
                terms.push(sign(beta - alpha) / factorial(beta) * t);
            }
            form.set(CoordId::new(alpha - 1, i), factorial(alpha - 1) * sum(terms));
        }
    }
    SemiBasicForm::new(form, k)
}

/// `E_L = Σ_{α=1}^k (-1)^{α-1}/α! · d_T^{α-1}(C_α L) - L`.
pub fn energy(l: &Lagrangian) -> Result<Expr> {
    let space = l.space;
    let mut terms = Vec::new();
    for alpha in 1..=l.k {
        let ca = liouville(space, alpha)?.apply(&l.l);
        let t = tulczyjew_power(space, &ca, alpha - 1)?;
        terms.push(sign(alpha - 1) / factorial(alpha) * t);
    }
    Ok(sum(terms) - &l.l)
}

/// `g_{ij} = ∂²L/∂y^{(k)i}∂y^{(k)j}`.
pub fn hessian(l: &Lagrangian) -> ExprMatrix {
    let k = l.k;
    let first: Vec<Expr> = (1..=l.space.n).map(|i| l.dl(k, i)).collect();
    ExprMatrix::from_fn(l.space.n, |i, j| first[i].diff(CoordId::new(k, j + 1)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Regularity {
    pub regular: bool,
    pub min_rank: usize,
    pub max_rank: usize,
}

fn rank_range(m: &ExprMatrix, points: &[JetPoint]) -> Result<(usize, usize)> {
    let n = m.dim();
    let prog = m.program(points.first().map_or(1, |p| p.space().n));
    let (mut lo, mut hi) = (usize::MAX, 0);
    for p in points {
        let v = prog.eval(p.coords()).map_err(|e| Error::DomainAt {
            source: e,
            point: p.coords().to_vec(),
        })?;
        let r = numeric_rank(&DMatrix::from_row_slice(n, n, &v));
        lo = lo.min(r);
        hi = hi.max(r);
    }
    Ok((lo, hi))
}

/// Numeric rank of the Hessian at each point; regular iff it is `n` everywhere.
pub fn regularity_check(l: &Lagrangian, points: &[JetPoint]) -> Result<Regularity> {
    if points.is_empty() {
        return Err(Error::InvalidArgument("no sample points".into()));
    }
    let (min_rank, max_rank) = rank_range(&hessian(l), points)?;
    Ok(Regularity {
        regular: min_rank == l.space.n,
        min_rank,
        max_rank,
    })
}

/// `ω_L = -dθ_L`.
pub fn pc_two_form(l: &Lagrangian) -> Result<TwoForm> {
    Ok(exterior_d_form(poincare_cartan(l)?.form()).neg())
}

pub fn two_form_rank(omega: &TwoForm, p: &JetPoint) -> Result<usize> {
    let d = omega.space().dim();
    let v = omega.eval(p)?;
    Ok(numeric_rank(&DMatrix::from_row_slice(d, d, &v)))
}

/// Numeric rank of `ω_L` at a point of `T^{2k-1}M`.
pub fn pc_two_form_rank(l: &Lagrangian, p: &JetPoint) -> Result<usize> {
    two_form_rank(&pc_two_form(l)?, p)
}

/// Components `∂L/∂x^i + Σ_{β=1}^k (-1)^β/β! · S^β(∂L/∂y^{(β)i})`, as a
/// semi-basic form of order 1. Vanishes iff `S` is Lagrangian for `L`.
pub fn el_residual(l: &Lagrangian, s: &Semispray) -> Result<SemiBasicForm> {
    l.space.check_same(&s.space())?;
    let mut form = OneForm::zero(l.space);
    for i in 1..=l.space.n {
        let mut terms = vec![l.dl(0, i)];
        for beta in 1..=l.k {
            let mut t = l.dl(beta, i);
            for _ in 0..beta {
                t = s.apply(&t);
            }
            terms.push(sign(beta) / factorial(beta) * t);
        }
        form.set(CoordId::new(0, i), sum(terms));
    }
    SemiBasicForm::new(form, 1)
}

fn el_components(l: &Lagrangian, s: &Semispray) -> Result<Vec<Expr>> {
    let r = el_residual(l, s)?;
    Ok((1..=l.space.n).map(|i| r.level(0, i).clone()).collect())
}

/// Affine structure of the Euler–Lagrange residual in the semispray
/// coefficients: `residual = b - A·G`, with `A` row-major `n × n`.
///
/// Only the `β = k` term of the residual sees `G`, and only through its values
/// (never its derivatives), so `A` and `b` are obtained by evaluating the
/// residual at `G = 0` and at the unit vectors.
pub fn el_affine_parts(l: &Lagrangian) -> Result<(Vec<Expr>, Vec<Expr>)> {
    let (space, n) = (l.space, l.space.n);
    let b = el_components(l, &Semispray::trivial(space))?;
    let mut unit_residuals = Vec::with_capacity(n);
    for j in 0..n {
        let g: Vec<Expr> = (0..n)
            .map(|m| if m == j { Expr::one() } else { Expr::zero() })
            .collect();
        unit_residuals.push(el_components(l, &Semispray::new(space, g)?)?);
    }
    let mut a = Vec::with_capacity(n * n);
    for i in 0..n {
        for res in &unit_residuals {
            a.push(&b[i] - &res[i]);
        }
    }
    Ok((b, a))
}

/// The coefficient `(-1)^k C(2k, k)` relating `A` to the Hessian.
pub fn el_leading_coefficient(k: usize) -> f64 {
    sign(k) * binomial(2 * k, k)
}

/// The canonical semispray of a regular Lagrangian together with the
/// diagnostics gathered while deriving it.
#[derive(Debug, Clone)]
pub struct DerivedSemispray {
    pub semispray: Semispray,
    /// Largest relative deviation between the extracted coefficient matrix and
    /// `(-1)^k C(2k,k) g`.
    pub coefficient_dev: f64,
    pub hessian_rank: usize,
}

/// Solves the Euler–Lagrange equations for the coefficients `G^i`.
///
/// The residual is affine in `G`: with `b = residual(G=0)` and
/// `A_{ij} = b_i - residual_i(G=e_j)` it reads `b - A G`. `A` is checked
/// against `(-1)^k C(2k,k) g` at `points`; the solve itself uses the symbolic
/// inverse of the Hessian.
pub fn derive_semispray(l: &Lagrangian, points: &[JetPoint], tol: f64) -> Result<DerivedSemispray> {
    let (space, n) = (l.space, l.space.n);
    let reg = regularity_check(l, points)?;
    if !reg.regular {
        return Err(Error::SingularHessian {
            rank: reg.min_rank,
            n,
        });
    }
    let (b, extracted) = el_affine_parts(l)?;
    let g = hessian(l);
    let c = el_leading_coefficient(l.k);
    let expected: Vec<Expr> = g.entries().iter().map(|e| c * e).collect();
    let (coefficient_dev, _) = max_deviation(points, &extracted, &expected)?;
    if coefficient_dev > tol {
        return Err(Error::AssertionFailure(format!(
            "extracted coefficient matrix differs from (-1)^k C(2k,k) g by {coefficient_dev:e}"
        )));
    }
    let a_inv = g.inverse().map(|e| e / c);
    let coeffs = a_inv.mul_vec(&b);
    Ok(DerivedSemispray {
        semispray: Semispray::new(space, coeffs)?,
        coefficient_dev,
        hessian_rank: reg.min_rank,
    })
}

/// How Lie derivatives along a semispray are realized in the reconstruction
/// formulas.
#[derive(Debug, Clone, Copy)]
pub enum LieRoute<'a> {
    /// Through the total derivative; independent of the semispray.
    Total,
    /// Genuine Lie derivative along the given semispray.
    Along(&'a Semispray),
}

fn lie_power(route: LieRoute<'_>, form: SemiBasicForm, times: usize) -> Result<OneForm> {
    match route {
        LieRoute::Total => {
            let mut f = form;
            for _ in 0..times {
                f = total_lie_derivative(&f)?;
            }
            Ok(f.into_form())
        }
        LieRoute::Along(s) => {
            let x = s.to_vector_field();
            let mut f = form.into_form();
            for _ in 0..times {
                f = lie_derivative_oneform(&x, &f)?;
            }
            Ok(f)
        }
    }
}

/// Right-hand side of the reconstruction formula for a semi-basic form of
/// order `alpha` from its potential `f`:
/// `γ! Σ_{β=1}^{α-γ} (-1)^{β-1}/(β+γ)! · 𝓛_S^{β-1} d_{J^{β+γ}} f`.
pub fn reconstruction_rhs(
    space: JetSpace,
    f: &Expr,
    alpha: usize,
    gamma: usize,
    route: LieRoute<'_>,
) -> Result<OneForm> {
    let mut acc = OneForm::zero(space);
    for beta in 1..=alpha - gamma {
        let dj = d_j_alpha(space, f, beta + gamma)?;
        let term = lie_power(route, dj, beta - 1)?;
        let c = factorial(gamma) * sign(beta - 1) / factorial(beta + gamma);
        acc = acc.add(&term.scale(&Expr::constant(c)))?;
    }
    Ok(acc)
}

/// The Poincaré–Cartan form built from Lie derivatives along `s` instead of
/// total derivatives; agrees with [`poincare_cartan`] for every `s`.
pub fn poincare_cartan_along(l: &Lagrangian, s: &Semispray) -> Result<OneForm> {
    reconstruction_rhs(l.space, &l.l, l.k, 0, LieRoute::Along(s))
}

/// `i_{J^γ} θ`, with `i_{J^0}` the identity.
pub fn i_j_power(theta: &OneForm, gamma: usize) -> Result<OneForm> {
    if gamma == 0 {
        Ok(theta.clone())
    } else {
        Ok(i_j_alpha(theta, gamma)?.into_form())
    }
}

/// Checks that `θ` is the Poincaré–Cartan form of `f` for `S`:
/// (a) `𝓛_Sθ - df` has only `dx` components, and (b) the reconstruction
/// formulas hold for every `γ = 0..α-1`, `α` the order of `θ`.
///
/// The potential `f` is an explicit input; for a Lagrangian it is `L` itself.
pub fn verify_pc_characterization(
    theta: &SemiBasicForm,
    s: &Semispray,
    f: &Expr,
    points: &[JetPoint],
    tol: f64,
) -> Result<CheckReport> {
    let space = theta.space();
    space.check_same(&s.space())?;
    let mut report = CheckReport::new("pc-characterization", 0, points.len());
    let lie = lie_derivative_oneform(&s.to_vector_field(), theta.form())?;
    let diff = lie.sub(&exterior_d(space, f))?;
    let (dev, _) = max_residual(points, diff.components_from_order(1))?;
    report.push(CheckItem::within("lie_s_theta_minus_df_semibasic_order_1", dev, tol));
    let alpha = theta.order();
    for gamma in 0..alpha {
        let lhs = i_j_power(theta.form(), gamma)?;
        let rhs = reconstruction_rhs(space, f, alpha, gamma, LieRoute::Along(s))?;
        let (dev, _) = max_deviation(points, lhs.components(), rhs.components())?;
        report.push(CheckItem::within(format!("reconstruction_gamma_{gamma}"), dev, tol));
    }
    Ok(report)
}

/// `i_S θ_L - L`, which must agree with [`energy`] for every semispray.
pub fn energy_via_semispray(l: &Lagrangian, s: &Semispray) -> Result<Expr> {
    let theta = poincare_cartan(l)?;
    Ok(interior(&s.to_vector_field(), theta.form())? - &l.l)
}

/// Evaluates each expression at a point.
pub fn eval_all(exprs: &[Expr], p: &JetPoint) -> Result<Vec<f64>> {
    Ok(Program::compile(exprs, p.space().n).eval(p.coords())?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sample::sample_points;

    fn euclid_l1(n: usize) -> Lagrangian {
        let l = 0.5 * sum((1..=n).map(|i| Expr::y(1, i).square()));
        Lagrangian::new(n, 1, l).unwrap()
    }

    fn euclid_l2(n: usize) -> Lagrangian {
        let l = 0.5 * sum((1..=n).map(|i| Expr::y(2, i).square()));
        Lagrangian::new(n, 2, l).unwrap()
    }

    fn close(points: &[JetPoint], a: &[Expr], b: &[Expr]) -> f64 {
        max_deviation(points, a, b).unwrap().0
    }

    #[test]
    fn poincare_cartan_examples() {
        let l = euclid_l1(2);
        let th = poincare_cartan(&l).unwrap();
        assert_eq!(th.order(), 1);
        assert_eq!(th.level(0, 1), &Expr::y(1, 1));

        let l = euclid_l2(2);
        let pts = sample_points(l.space(), 10, 1, false).unwrap();
        let th = poincare_cartan(&l).unwrap();
        for i in 1..=2 {
            assert!(close(&pts, &[th.level(1, i).clone()], &[0.5 * Expr::y(2, i)]) < 1e-15);
            assert!(close(&pts, &[th.level(0, i).clone()], &[-1.5 * Expr::y(3, i)]) < 1e-15);
            assert!(th.level(2, i).is_zero() && th.level(3, i).is_zero());
        }
    }

    #[test]
    fn energy_examples() {
        let l = euclid_l1(2);
        let pts = sample_points(l.space(), 10, 2, false).unwrap();
        assert!(close(&pts, &[energy(&l).unwrap()], &[l.expr().clone()]) < 1e-15);

        let l = euclid_l2(2);
        let pts = sample_points(l.space(), 10, 3, false).unwrap();
        let expected = l.expr() - 1.5 * sum((1..=2).map(|i| Expr::y(1, i) * Expr::y(3, i)));
        assert!(close(&pts, &[energy(&l).unwrap()], &[expected]) < 1e-15);
        let s = Semispray::new(l.space(), vec![Expr::x(1) * Expr::y(3, 2), Expr::y(1, 1).square()]).unwrap();
        let via = energy_via_semispray(&l, &s).unwrap();
        assert!(close(&pts, &[energy(&l).unwrap()], &[via]) < 1e-14);
    }

    #[test]
    fn hessian_and_rank() {
        let l = euclid_l2(3);
        let h = hessian(&l);
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(h.get(i, j).as_constant(), Some(if i == j { 1.0 } else { 0.0 }));
            }
        }
        let pts = sample_points(l.space(), 5, 4, false).unwrap();
        for p in &pts {
            assert_eq!(pc_two_form_rank(&l, p).unwrap(), 12);
        }
        let lin = Lagrangian::new(2, 1, Expr::y(1, 1)).unwrap();
        let pts = sample_points(lin.space(), 5, 4, false).unwrap();
        assert_eq!(regularity_check(&lin, &pts).unwrap().max_rank, 0);
        let c = Lagrangian::new(2, 1, Expr::constant(3.0)).unwrap();
        assert_eq!(pc_two_form_rank(&c, &pts[0]).unwrap(), 0);
    }

    #[test]
    fn el_residual_examples() {
        let l = euclid_l1(2);
        let s = l.space();
        let pts = sample_points(s, 10, 5, false).unwrap();
        let r = el_residual(&l, &Semispray::trivial(s)).unwrap();
        assert!(r.form().components().iter().all(Expr::is_zero));
        let push = Semispray::new(s, vec![Expr::one(), Expr::zero()]).unwrap();
        let r = el_residual(&l, &push).unwrap();
        assert!(close(&pts, &[r.level(0, 1).clone()], &[Expr::constant(2.0)]) < 1e-15);
    }

    #[test]
    fn derive_flat_cases() {
        for l in [euclid_l1(2), euclid_l2(2)] {
            let pts = sample_points(l.space(), 10, 6, false).unwrap();
            let d = derive_semispray(&l, &pts, 1e-9).unwrap();
            assert!(d.semispray.coefficients().iter().all(Expr::is_zero), "{:?}", d.semispray);
        }
        let lin = Lagrangian::new(2, 1, Expr::y(1, 1)).unwrap();
        let pts = sample_points(lin.space(), 3, 6, false).unwrap();
        assert!(matches!(
            derive_semispray(&lin, &pts, 1e-9),
            Err(Error::SingularHessian { rank: 0, n: 2 })
        ));
    }

    #[test]
    fn pc_characterization() {
        let l = euclid_l2(2);
        let pts = sample_points(l.space(), 10, 7, false).unwrap();
        let th = poincare_cartan(&l).unwrap();
        let s = Semispray::trivial(l.space());
        let rep = verify_pc_characterization(&th, &s, l.expr(), &pts, 1e-9).unwrap();
        assert!(rep.passed(), "{rep:?}");
        let dx = SemiBasicForm::new(OneForm::basis(l.space(), CoordId::new(0, 1)), 1).unwrap();
        let rep = verify_pc_characterization(&dx, &s, l.expr(), &pts, 1e-9).unwrap();
        assert!(!rep.passed());
    }
}
