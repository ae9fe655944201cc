//! Higher order Finsler functions, homogeneity of forms and semisprays,
//! projective equivalence and projective metrizability.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::{CoordId, Expr, Program};
use crate::jet::{
    exterior_d, exterior_d_form, interior, interior2, lie_bracket, lie_derivative_oneform,
    liouville, JetPoint, JetSpace, OneForm, Semispray, TwoForm, VectorField,
};
use crate::linalg::{least_squares, numeric_rank, ExprMatrix};
use crate::report::{CheckItem, CheckReport};
use crate::sample::{max_deviation, max_residual, rel_dev};
use crate::variational::{el_affine_parts, energy, poincare_cartan, Lagrangian};

/// A candidate Finsler function of order `k`, defined on `T^k_0M` and viewed on
/// `T^{2k-1}M`. Positivity is validated at sample points, never assumed.
#[derive(Debug, Clone)]
pub struct FinslerCandidate {
    lagrangian: Lagrangian,
}

impl FinslerCandidate {
    pub fn new(n: usize, k: usize, f: Expr) -> Result<Self> {
        Ok(Self {
            lagrangian: Lagrangian::new(n, k, f)?,
        })
    }

    pub fn order(&self) -> usize {
        self.lagrangian.order()
    }

    pub fn space(&self) -> JetSpace {
        self.lagrangian.space()
    }

    pub fn expr(&self) -> &Expr {
        self.lagrangian.expr()
    }

    /// The same function treated as a Lagrangian.
    pub fn as_lagrangian(&self) -> &Lagrangian {
        &self.lagrangian
    }
}

/// `max|C_1F - F|` and `max|C_αF|` for `α = 2..k`.
pub fn zermelo_check(f: &FinslerCandidate, points: &[JetPoint], tol: f64) -> Result<CheckReport> {
    let space = f.space();
    let mut report = CheckReport::new("zermelo", 0, points.len());
    let c1 = liouville(space, 1)?.apply(f.expr());
    let (dev, _) = max_deviation(points, &[c1], std::slice::from_ref(f.expr()))?;
    report.push(CheckItem::within("c1_f_equals_f", dev, tol));
    for alpha in 2..=f.order() {
        let ca = liouville(space, alpha)?.apply(f.expr());
        let (dev, _) = max_residual(points, &[ca])?;
        report.push(CheckItem::within(format!("c{alpha}_f_vanishes"), dev, tol));
    }
    Ok(report)
}

/// `h_{ij} = F^{2k-1} ∂²F/∂y^{(k)i}∂y^{(k)j}`.
pub fn angular_tensor(f: &FinslerCandidate) -> ExprMatrix {
    let k = f.order();
    let n = f.space().n;
    let scale = f.expr().powi(2 * k as i32 - 1);
    let first: Vec<Expr> = (1..=n).map(|i| f.expr().diff(CoordId::new(k, i))).collect();
    ExprMatrix::from_fn(n, |i, j| &scale * first[i].diff(CoordId::new(k, j + 1)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FinslerValidation {
    pub is_finsler: bool,
    pub positivity_ok: bool,
    pub zermelo_ok: bool,
    /// Distinct ranks of `h` seen over the sample points.
    pub rank_seen: Vec<usize>,
    pub zermelo_dev: f64,
}

/// Positivity, the Zermelo conditions and `rank h = n - 1` at every point.
pub fn finsler_validate(f: &FinslerCandidate, points: &[JetPoint], tol: f64) -> Result<FinslerValidation> {
    let n = f.space().n;
    let zermelo = zermelo_check(f, points, tol)?;
    let h = angular_tensor(f);
    let hp = h.program(n);
    let fp = Program::compile(std::slice::from_ref(f.expr()), n);
    let mut positivity_ok = true;
    let mut rank_seen = Vec::new();
    for p in points {
        let at = |e| Error::DomainAt {
            source: e,
            point: p.coords().to_vec(),
        };
        if fp.eval(p.coords()).map_err(at)?[0] <= 0.0 {
            positivity_ok = false;
        }
        let v = hp.eval(p.coords()).map_err(at)?;
        let r = numeric_rank(&DMatrix::from_row_slice(n, n, &v));
        if !rank_seen.contains(&r) {
            rank_seen.push(r);
        }
    }
    rank_seen.sort_unstable();
    let zermelo_ok = zermelo.passed();
    Ok(FinslerValidation {
        is_finsler: positivity_ok && zermelo_ok && rank_seen == [n - 1],
        positivity_ok,
        zermelo_ok,
        rank_seen,
        zermelo_dev: zermelo.max_dev(),
    })
}

/// `i_{C_α}θ = 0` and `𝓛_{C_α}θ = 0` for every Liouville field of the ambient
/// space.
pub fn homogeneous_form_check(theta: &OneForm, points: &[JetPoint], tol: f64) -> Result<CheckReport> {
    let space = theta.space();
    let mut report = CheckReport::new("homogeneous-form", 0, points.len());
    for alpha in 1..=space.r {
        let c = liouville(space, alpha)?;
        let (dev, _) = max_residual(points, &[interior(&c, theta)?])?;
        report.push(CheckItem::within(format!("i_c{alpha}_theta"), dev, tol));
        let lie = lie_derivative_oneform(&c, theta)?;
        let (dev, _) = max_residual(points, lie.components())?;
        report.push(CheckItem::within(format!("lie_c{alpha}_theta"), dev, tol));
    }
    Ok(report)
}

/// Outcome of testing `[C_α, S] = α C_{α-1} + P_α C_r` for one `α`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaResidual {
    pub alpha: usize,
    /// Largest residual among components of order below r.
    pub lower_dev: f64,
    /// Largest deviation of the order-r part from `P_α y^{(1)}`.
    pub proportional_dev: f64,
    /// Recovered `P_α` at each sample point.
    pub p_samples: Vec<f64>,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HomogeneityReport {
    pub alphas: Vec<AlphaResidual>,
    pub homogeneous: bool,
    pub spray: bool,
    /// `max|[C_2, S] - 2C_1|` (zero when r = 1).
    pub c2_dev: f64,
}

impl HomogeneityReport {
    /// First failing `α`, as an error.
    pub fn require(&self) -> Result<()> {
        match self.alphas.iter().find(|a| !a.holds) {
            None => Ok(()),
            Some(a) => Err(Error::NotProportional(format!(
                "alpha = {}: lower-order residual {:e}, proportionality residual {:e}",
                a.alpha, a.lower_dev, a.proportional_dev
            ))),
        }
    }
}

/// Index of the largest `|y^{(1)i}|`, the denominator used for ratio recovery.
fn pivot_index(p: &JetPoint) -> usize {
    let y = p.level(1);
    (0..y.len())
        .max_by(|&a, &b| y[a].abs().total_cmp(&y[b].abs()))
        .unwrap_or(0)
}

/// Recovers a common factor `P` with `d ≈ P·y^{(1)}` at each point, returning
/// the samples of `P` and the largest deviation.
fn proportional_to_y1(points: &[JetPoint], d: &[Expr]) -> Result<(Vec<f64>, f64)> {
    let Some(first) = points.first() else {
        return Ok((Vec::new(), 0.0));
    };
    let prog = Program::compile(d, first.space().n);
    let (mut samples, mut worst) = (Vec::with_capacity(points.len()), 0.0f64);
    for p in points {
        let v = prog.eval(p.coords()).map_err(|e| Error::DomainAt {
            source: e,
            point: p.coords().to_vec(),
        })?;
        let y = p.level(1);
        let m = pivot_index(p);
        let ratio = v[m] / y[m];
        for (vi, yi) in v.iter().zip(y) {
            worst = worst.max(rel_dev(*vi, ratio * yi));
        }
        samples.push(ratio);
    }
    Ok((samples, worst))
}

fn order_r_part(v: &VectorField) -> &[Expr] {
    let s = v.space();
    &v.components()[s.r * s.n..]
}

fn below_order_r(v: &VectorField) -> &[Expr] {
    let s = v.space();
    &v.components()[..s.r * s.n]
}

/// Tests `[C_α, S] = α C_{α-1} + P_α C_r` (`C_0 := S`) for `α = 1..r` and the
/// spray conditions.
pub fn semispray_homogeneity_check(s: &Semispray, points: &[JetPoint], tol: f64) -> Result<HomogeneityReport> {
    let space = s.space();
    let sv = s.to_vector_field();
    let mut alphas = Vec::new();
    let mut c_prev = sv.clone();
    for alpha in 1..=space.r {
        let ca = liouville(space, alpha)?;
        let r = lie_bracket(&ca, &sv)?.sub(&c_prev.scale(&Expr::constant(alpha as f64)))?;
        let (lower_dev, _) = max_residual(points, below_order_r(&r))?;
        let (p_samples, proportional_dev) = proportional_to_y1(points, order_r_part(&r))?;
        alphas.push(AlphaResidual {
            alpha,
            lower_dev,
            proportional_dev,
            p_samples,
            holds: lower_dev <= tol && proportional_dev <= tol,
        });
        c_prev = ca;
    }
    let c2_dev = if space.r >= 2 {
        let r = lie_bracket(&liouville(space, 2)?, &sv)?
            .sub(&liouville(space, 1)?.scale(&Expr::constant(2.0)))?;
        max_residual(points, r.components())?.0
    } else {
        0.0
    };
    let homogeneous = alphas.iter().all(|a| a.holds);
    let p1_zero = alphas[0].p_samples.iter().all(|p| p.abs() <= tol);
    Ok(HomogeneityReport {
        spray: alphas[0].holds && p1_zero && c2_dev <= tol,
        homogeneous,
        alphas,
        c2_dev,
    })
}

/// Spray test: `[C_1, S] = S`, and `[C_2, S] = 2C_1` when r ≥ 2.
pub fn is_spray(s: &Semispray, points: &[JetPoint], tol: f64) -> Result<bool> {
    let space = s.space();
    let sv = s.to_vector_field();
    let r1 = lie_bracket(&liouville(space, 1)?, &sv)?.sub(&sv)?;
    if max_residual(points, r1.components())?.0 > tol {
        return Ok(false);
    }
    if space.r >= 2 {
        let r2 = lie_bracket(&liouville(space, 2)?, &sv)?
            .sub(&liouville(space, 1)?.scale(&Expr::constant(2.0)))?;
        if max_residual(points, r2.components())?.0 > tol {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectiveComparison {
    pub equivalent: bool,
    pub max_dev: f64,
    /// `P` with `G_1 - G_2 = P·y^{(1)}` at each sample point.
    pub p_samples: Vec<f64>,
}

/// Checks `G_1 - G_2 = P·y^{(1)}` for a common scalar `P`.
pub fn projective_equivalent(
    s1: &Semispray,
    s2: &Semispray,
    points: &[JetPoint],
    tol: f64,
) -> Result<ProjectiveComparison> {
    s1.space().check_same(&s2.space())?;
    let d: Vec<Expr> = s1
        .coefficients()
        .iter()
        .zip(s2.coefficients())
        .map(|(a, b)| a - b)
        .collect();
    let (p_samples, max_dev) = proportional_to_y1(points, &d)?;
    Ok(ProjectiveComparison {
        equivalent: max_dev <= tol,
        max_dev,
        p_samples,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetrizabilityResidual {
    /// `max|𝓛_Sθ_F - dF|`.
    pub oneform_residual: f64,
    /// `max|i_Sω_F|`.
    pub two_form_residual: f64,
    pub semispray_homogeneous: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// `θ_F` and `ω_F = -dθ_F` as reusable symbolic objects.
#[derive(Debug, Clone)]
pub struct FinslerForms {
    pub theta: OneForm,
    pub omega: TwoForm,
    pub df: OneForm,
}

pub fn finsler_forms(f: &FinslerCandidate) -> Result<FinslerForms> {
    let theta = poincare_cartan(f.as_lagrangian())?.into_form();
    let omega = exterior_d_form(&theta).neg();
    let df = exterior_d(f.space(), f.expr());
    Ok(FinslerForms { theta, omega, df })
}

/// Both metrizability conditions as pairs of sides to compare. Near the zero
/// section the individual terms grow large, so the sides are compared
/// relatively rather than their difference against zero; `i_Sω_F = 0` is
/// taken in the equivalent form `𝓛_Sθ_F = d(i_Sθ_F)` (as `ω_F = -dθ_F`).
struct MetrizabilitySides {
    lie: Vec<Expr>,
    df: Vec<Expr>,
    d_is_theta: Vec<Expr>,
}

fn metrizability_sides(forms: &FinslerForms, s: &Semispray) -> Result<MetrizabilitySides> {
    let sv = s.to_vector_field();
    let lie = lie_derivative_oneform(&sv, &forms.theta)?;
    let is_theta = interior(&sv, &forms.theta)?;
    Ok(MetrizabilitySides {
        lie: lie.components().to_vec(),
        df: forms.df.components().to_vec(),
        d_is_theta: exterior_d(s.space(), &is_theta).components().to_vec(),
    })
}

impl MetrizabilitySides {
    fn devs(&self, points: &[JetPoint]) -> Result<(f64, f64)> {
        Ok((
            max_deviation(points, &self.lie, &self.df)?.0,
            max_deviation(points, &self.lie, &self.d_is_theta)?.0,
        ))
    }
}

/// Residuals of `𝓛_Sθ_F = dF` and `i_Sω_F = 0` at the sample points.
///
/// Runs whether or not `S` is homogeneous: a vanishing residual forces
/// homogeneity, so it is reported rather than required.
pub fn metrizability_residual(
    s: &Semispray,
    f: &FinslerCandidate,
    points: &[JetPoint],
    tol: f64,
) -> Result<MetrizabilityResidual> {
    f.space().check_same(&s.space())?;
    let forms = finsler_forms(f)?;
    let (oneform_residual, two_form_residual) = metrizability_sides(&forms, s)?.devs(points)?;
    let homogeneous = semispray_homogeneity_check(s, points, tol)?.homogeneous;
    let note = (!homogeneous).then(|| {
        "semispray is not homogeneous; a vanishing residual would force homogeneity, so the \
         residual is expected to be nonzero"
            .to_string()
    });
    Ok(MetrizabilityResidual {
        oneform_residual,
        two_form_residual,
        semispray_homogeneous: homogeneous,
        note,
    })
}

/// Values of `G` solving the Euler–Lagrange equations of `F` at a point, in
/// the minimum-norm sense. The system `A G = b` is singular along `y^{(1)}`
/// (projective freedom), so only the projective class is determined.
pub fn metrizing_coefficients(f: &FinslerCandidate, p: &JetPoint) -> Result<Vec<f64>> {
    let n = f.space().n;
    let (b, a) = el_affine_parts(f.as_lagrangian())?;
    solve_affine(&b, &a, n, p)
}

fn solve_affine(b: &[Expr], a: &[Expr], n: usize, p: &JetPoint) -> Result<Vec<f64>> {
    let at = |e| Error::DomainAt {
        source: e,
        point: p.coords().to_vec(),
    };
    let bv = Program::compile(b, n).eval(p.coords()).map_err(at)?;
    let av = Program::compile(a, n).eval(p.coords()).map_err(at)?;
    let x = least_squares(&DMatrix::from_row_slice(n, n, &av), &DVector::from_vec(bv))?;
    Ok(x.iter().copied().collect())
}

/// Pointwise metrization: at each point, solves for `G` and evaluates both
/// metrizability residuals for the semispray with those coefficient values.
/// Both residuals only involve the values of `G`, not its derivatives.
pub fn pointwise_metrization(f: &FinslerCandidate, points: &[JetPoint]) -> Result<(f64, f64)> {
    let space = f.space();
    let n = space.n;
    let forms = finsler_forms(f)?;
    let (b, a) = el_affine_parts(f.as_lagrangian())?;
    let (mut one_dev, mut two_dev) = (0.0f64, 0.0f64);
    for p in points {
        let g = solve_affine(&b, &a, n, p)?;
        let s = Semispray::new(space, g.into_iter().map(Expr::constant).collect())?;
        let (one, two) = metrizability_sides(&forms, &s)?.devs(std::slice::from_ref(p))?;
        one_dev = one_dev.max(one);
        two_dev = two_dev.max(two);
    }
    Ok((one_dev, two_dev))
}

/// `i_Sθ_F = F`, `E_F = 0` and `i_{C_α}ω_F = 0` for all α.
pub fn finsler_energy_checks(
    f: &FinslerCandidate,
    s: &Semispray,
    points: &[JetPoint],
    tol: f64,
) -> Result<CheckReport> {
    let space = f.space();
    let forms = finsler_forms(f)?;
    let mut report = CheckReport::new("finsler-energy", 0, points.len());
    let is = interior(&s.to_vector_field(), &forms.theta)?;
    let (dev, _) = max_deviation(points, &[is], std::slice::from_ref(f.expr()))?;
    report.push(CheckItem::within("i_s_theta_equals_f", dev, tol));
    let (dev, _) = max_residual(points, &[energy(f.as_lagrangian())?])?;
    report.push(CheckItem::within("energy_vanishes", dev, tol));
    for alpha in 1..=space.r {
        let ic = interior2(&liouville(space, alpha)?, &forms.omega)?;
        let (dev, _) = max_residual(points, ic.components())?;
        report.push(CheckItem::within(format!("i_c{alpha}_omega"), dev, tol));
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::sum;
    use crate::sample::sample_points;

    fn euclid_f1(n: usize) -> FinslerCandidate {
        let q = sum((1..=n).map(|i| Expr::y(1, i).square()));
        FinslerCandidate::new(n, 1, q.sqrt()).unwrap()
    }

    #[test]
    fn euclidean_f1_is_finsler() {
        let f = euclid_f1(2);
        let pts = sample_points(f.space(), 20, 1, true).unwrap();
        assert!(zermelo_check(&f, &pts, 1e-12).unwrap().passed());
        let v = finsler_validate(&f, &pts, 1e-12).unwrap();
        assert!(v.is_finsler, "{v:?}");
        let forms = finsler_forms(&f).unwrap();
        assert!(homogeneous_form_check(&forms.theta, &pts, 1e-12).unwrap().passed());
    }

    #[test]
    fn quadratic_is_not_finsler() {
        let q = sum((1..=2).map(|i| Expr::y(1, i).square()));
        let f = FinslerCandidate::new(2, 1, q).unwrap();
        let pts = sample_points(f.space(), 20, 2, true).unwrap();
        let v = finsler_validate(&f, &pts, 1e-9).unwrap();
        assert!(!v.is_finsler && !v.zermelo_ok);
    }

    #[test]
    fn sprays_and_homogeneity() {
        let s = JetSpace::new(2, 1).unwrap();
        let pts = sample_points(s, 20, 3, true).unwrap();
        let norm = sum((1..=2).map(|i| Expr::y(1, i).square())).sqrt();
        let g = Semispray::new(s, vec![Expr::y(1, 1) * &norm, Expr::y(1, 2) * &norm]).unwrap();
        let rep = semispray_homogeneity_check(&g, &pts, 1e-12).unwrap();
        assert!(rep.homogeneous && rep.spray, "{rep:?}");
        assert!(is_spray(&g, &pts, 1e-12).unwrap());
        let c = Semispray::new(s, vec![Expr::one(), Expr::zero()]).unwrap();
        assert!(!is_spray(&c, &pts, 1e-9).unwrap());

        let flat3 = Semispray::trivial(JetSpace::new(2, 3).unwrap());
        let pts3 = sample_points(flat3.space(), 20, 3, true).unwrap();
        let rep = semispray_homogeneity_check(&flat3, &pts3, 1e-9).unwrap();
        // [C_1, S] = S holds; the order-r residual of α = 3 is -8y^{(2)}, not a
        // multiple of y^{(1)}. (α = 2 fails too: its residual is -12y^{(3)}.)
        assert!(rep.alphas[0].holds, "{rep:?}");
        assert!(!rep.alphas[2].holds && !rep.homogeneous);
        assert!(matches!(rep.require(), Err(Error::NotProportional(_))));
    }

    #[test]
    fn projective_classes() {
        let s = JetSpace::new(2, 1).unwrap();
        let pts = sample_points(s, 20, 4, true).unwrap();
        let base = Semispray::new(s, vec![Expr::x(2) * Expr::y(1, 1).square(), Expr::y(1, 2)]).unwrap();
        let same = projective_equivalent(&base, &base, &pts, 1e-12).unwrap();
        assert!(same.equivalent && same.p_samples.iter().all(|p| *p == 0.0));
        let norm = sum((1..=2).map(|i| Expr::y(1, i).square())).sqrt();
        let shifted = base.projective_shift(&norm);
        let cmp = projective_equivalent(&shifted, &base, &pts, 1e-12).unwrap();
        assert!(cmp.equivalent);
        for (p, pt) in cmp.p_samples.iter().zip(&pts) {
            assert!((p - norm.eval(pt).unwrap()).abs() < 1e-12);
        }
        let pushed = Semispray::new(
            s,
            vec![base.coefficients()[0].clone() + 1.0, base.coefficients()[1].clone()],
        )
        .unwrap();
        assert!(!projective_equivalent(&pushed, &base, &pts, 1e-9).unwrap().equivalent);
    }

    #[test]
    fn flat_metrizability() {
        let f = euclid_f1(2);
        let pts = sample_points(f.space(), 20, 5, true).unwrap();
        let flat = Semispray::trivial(f.space());
        let m = metrizability_residual(&flat, &f, &pts, 1e-12).unwrap();
        assert!(m.oneform_residual < 1e-12 && m.two_form_residual < 1e-12);
        let c = Semispray::new(f.space(), vec![Expr::one(), Expr::zero()]).unwrap();
        let m = metrizability_residual(&c, &f, &pts, 1e-12).unwrap();
        assert!(m.two_form_residual > 1e-3 && m.note.is_some());
        let rep = finsler_energy_checks(&f, &flat, &pts, 1e-12).unwrap();
        assert!(rep.passed(), "{rep:?}");
        let (one, two) = pointwise_metrization(&f, &pts).unwrap();
        assert!(one < 1e-12 && two < 1e-12);
    }
}
