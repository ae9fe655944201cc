//! Randomized verification of the bracket identities between Liouville fields,
//! tangent structures and semisprays, and of the Poincaré–Cartan
//! reconstruction formulas.
//!
//! Test data (semispray coefficients, semi-basic forms, Lagrangians) are
//! random polynomials of degree ≤ 2 with coefficients in `[-1, 1]`, so every
//! deviation is pure floating-point error.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::expr::{sum, Expr};
use crate::jet::{
    fn_bracket_vf_tensor, interior, lie_bracket, lie_derivative_oneform, liouville, tangent_tensor,
    tulczyjew_power, JetPoint, JetSpace, OneForm, SemiBasicForm, Semispray, Tensor11, VectorField,
};
use crate::sample::{max_deviation, max_residual, sample_points, Sampler};
use crate::variational::{
    factorial, i_j_power, poincare_cartan, reconstruction_rhs, sign, Lagrangian, LieRoute,
};

/// Stream offset separating random test data from sample points.
const DATA_STREAM: u64 = 0x5eed_da7a;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    fn from(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }
}

/// One parameter combination of an identity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityCase {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub max_dev: f64,
}

impl IdentityCase {
    fn new(max_dev: f64) -> Self {
        Self {
            alpha: None,
            beta: None,
            gamma: None,
            label: None,
            max_dev,
        }
    }

    fn alpha(mut self, a: usize) -> Self {
        self.alpha = Some(a);
        self
    }

    fn beta(mut self, b: usize) -> Self {
        self.beta = Some(b);
        self
    }

    fn gamma(mut self, g: usize) -> Self {
        self.gamma = Some(g);
        self
    }

    fn label(mut self, l: impl Into<String>) -> Self {
        self.label = Some(l.into());
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub name: String,
    pub n: usize,
    pub r: usize,
    pub params: Vec<IdentityCase>,
    pub seed: u64,
    pub samples: usize,
    pub tol: f64,
    pub max_dev: f64,
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub condition_variant: Option<String>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub notes: Vec<String>,
}

impl IdentityReport {
    fn build(name: &str, space: JetSpace, seed: u64, samples: usize, tol: f64, params: Vec<IdentityCase>) -> Self {
        let max_dev = params.iter().map(|c| c.max_dev).fold(0.0, f64::max);
        Self {
            name: name.to_string(),
            n: space.n,
            r: space.r,
            params,
            seed,
            samples,
            tol,
            max_dev,
            verdict: Verdict::from(max_dev <= tol),
            condition_variant: None,
            notes: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}

fn data_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ DATA_STREAM)
}

/// Dense random polynomial of degree ≤ 2 in the coordinates of `space`.
pub fn random_polynomial(space: JetSpace, rng: &mut impl Rng) -> Expr {
    let vars: Vec<Expr> = space.coords().map(Expr::coord).collect();
    let mut terms = vec![Expr::constant(rng.random_range(-1.0..=1.0))];
    for (i, v) in vars.iter().enumerate() {
        terms.push(rng.random_range(-1.0..=1.0) * v);
        for w in &vars[i..] {
            terms.push(rng.random_range(-1.0..=1.0) * v * w);
        }
    }
    sum(terms)
}

/// Semispray with random polynomial coefficients.
pub fn random_semispray(space: JetSpace, seed: u64) -> Result<Semispray> {
    let mut rng = data_rng(seed);
    let g = (0..space.n).map(|_| random_polynomial(space, &mut rng)).collect();
    Semispray::new(space, g)
}

/// Semi-basic form of order `order` with random polynomial components.
pub fn random_semibasic(space: JetSpace, order: usize, rng: &mut impl Rng) -> Result<SemiBasicForm> {
    let comps = (0..space.dim())
        .map(|c| {
            if c < order * space.n {
                random_polynomial(space, rng)
            } else {
                Expr::zero()
            }
        })
        .collect();
    SemiBasicForm::new(OneForm::new(space, comps)?, order)
}

/// Random polynomial Lagrangian of order `k`.
pub fn random_lagrangian(n: usize, k: usize, seed: u64) -> Result<Lagrangian> {
    let mut rng = data_rng(seed.wrapping_add(1));
    Lagrangian::new(n, k, random_polynomial(JetSpace::new(n, k)?, &mut rng))
}

fn points(space: JetSpace, samples: usize, seed: u64) -> Result<Vec<JetPoint>> {
    sample_points(space, samples, seed, false)
}

fn field_dev(pts: &[JetPoint], a: &VectorField, b: &VectorField) -> Result<f64> {
    Ok(max_deviation(pts, a.components(), b.components())?.0)
}

fn tensor_dev(pts: &[JetPoint], a: &Tensor11, b: &Tensor11) -> Result<f64> {
    Ok(max_deviation(pts, a.components(), b.components())?.0)
}

/// `J^m`, with `J^0` the identity and `J^m = 0` beyond `r`.
fn j_power(space: JetSpace, m: usize) -> Result<Tensor11> {
    match m {
        0 => Ok(Tensor11::identity(space)),
        m if m > space.r => Ok(Tensor11::zero(space)),
        m => tangent_tensor(space, m),
    }
}

/// `[C_α, C_β] = (α-β)C_{α+β-1}` under a range condition, else 0. Two range
/// conditions are tested against the direct bracket: `α+β ≤ r-1` and
/// `α+β-1 ≤ r`. The report keeps the deviation under each and names the one(s)
/// that match.
pub fn verify_cacb(space: JetSpace, samples: usize, seed: u64, tol: f64) -> Result<IdentityReport> {
    let pts = points(space, samples, seed)?;
    let r = space.r;
    let variants: [(&str, fn(usize, usize, usize) -> bool); 2] = [
        ("alpha+beta<=r-1", |a, b, r| a + b < r),
        ("alpha+beta-1<=r", |a, b, r| a + b - 1 <= r),
    ];
    let mut devs = [0.0f64; 2];
    let mut per_variant: [Vec<IdentityCase>; 2] = [Vec::new(), Vec::new()];
    for a in 1..=r {
        for b in 1..=r {
            let direct = lie_bracket(&liouville(space, a)?, &liouville(space, b)?)?;
            for (v, (_, cond)) in variants.iter().enumerate() {
                let expected = if cond(a, b, r) {
                    liouville(space, a + b - 1)?.scale(&Expr::constant(a as f64 - b as f64))
                } else {
                    VectorField::zero(space)
                };
                let d = field_dev(&pts, &direct, &expected)?;
                devs[v] = devs[v].max(d);
                per_variant[v].push(IdentityCase::new(d).alpha(a).beta(b).label(variants[v].0));
            }
        }
    }
    let matched: Vec<&str> = (0..2).filter(|&v| devs[v] <= tol).map(|v| variants[v].0).collect();
    let best = if devs[1] <= devs[0] { 1 } else { 0 };
    let mut report = IdentityReport::build(
        "cacb",
        space,
        seed,
        samples,
        tol,
        per_variant[best].clone(),
    );
    report.condition_variant = Some(match matched.len() {
        0 => "none".to_string(),
        2 => "both".to_string(),
        _ => matched[0].to_string(),
    });
    for (v, (name, _)) in variants.iter().enumerate() {
        report.notes.push(format!("condition {name}: max deviation {:e}", devs[v]));
    }
    Ok(report)
}

/// `[C_α, J^β] = -βJ^{α+β-1}` if `α+β ≤ r+1`, else 0.
pub fn verify_cajb(space: JetSpace, samples: usize, seed: u64, tol: f64) -> Result<IdentityReport> {
    let pts = points(space, samples, seed)?;
    let r = space.r;
    let mut cases = Vec::new();
    for a in 1..=r {
        for b in 1..=r {
            let direct = fn_bracket_vf_tensor(&liouville(space, a)?, &tangent_tensor(space, b)?)?;
            let expected = if a + b <= r + 1 {
                j_power(space, a + b - 1)?.scale(-(b as f64))
            } else {
                Tensor11::zero(space)
            };
            cases.push(IdentityCase::new(tensor_dev(&pts, &direct, &expected)?).alpha(a).beta(b));
        }
    }
    Ok(IdentityReport::build("cajb", space, seed, samples, tol, cases))
}

/// `[C_α, S] - αC_{α-1}` (`C_0 := S`) has no components below order r.
pub fn verify_cas(s: &Semispray, samples: usize, seed: u64, tol: f64) -> Result<IdentityReport> {
    let space = s.space();
    let pts = points(space, samples, seed)?;
    let sv = s.to_vector_field();
    let mut prev = sv.clone();
    let mut cases = Vec::new();
    for a in 1..=space.r {
        let ca = liouville(space, a)?;
        let res = lie_bracket(&ca, &sv)?.sub(&prev.scale(&Expr::constant(a as f64)))?;
        let (d, _) = max_residual(&pts, &res.components()[..space.r * space.n])?;
        cases.push(IdentityCase::new(d).alpha(a));
        prev = ca;
    }
    Ok(IdentityReport::build("cas", space, seed, samples, tol, cases))
}

/// `J^α[S, J^β] = -βJ^{α+β-1}` if `α+β ≤ r+1`, else 0.
pub fn verify_jasjb(s: &Semispray, samples: usize, seed: u64, tol: f64) -> Result<IdentityReport> {
    let space = s.space();
    let r = space.r;
    let pts = points(space, samples, seed)?;
    let sv = s.to_vector_field();
    let mut cases = Vec::new();
    for b in 1..=r {
        let bracket = fn_bracket_vf_tensor(&sv, &tangent_tensor(space, b)?)?;
        for a in 1..=r {
            let lhs = tangent_tensor(space, a)?.compose(&bracket)?;
            let expected = if a + b <= r + 1 {
                j_power(space, a + b - 1)?.scale(-(b as f64))
            } else {
                Tensor11::zero(space)
            };
            cases.push(IdentityCase::new(tensor_dev(&pts, &lhs, &expected)?).alpha(a).beta(b));
        }
    }
    Ok(IdentityReport::build("jasjb", space, seed, samples, tol, cases))
}

/// `i_{[S,J^β]}θ = -β i_{J^{β-1}}θ` for random semi-basic `θ` of every order.
pub fn verify_isjbt(s: &Semispray, samples: usize, seed: u64, tol: f64) -> Result<IdentityReport> {
    let space = s.space();
    let r = space.r;
    let pts = points(space, samples, seed)?;
    let sv = s.to_vector_field();
    let mut rng = data_rng(seed.wrapping_add(2));
    let thetas = (1..=r)
        .map(|a| random_semibasic(space, a, &mut rng))
        .collect::<Result<Vec<_>>>()?;
    let mut cases = Vec::new();
    for b in 1..=r {
        let bracket = fn_bracket_vf_tensor(&sv, &tangent_tensor(space, b)?)?;
        let jb1 = j_power(space, b - 1)?;
        for theta in &thetas {
            let lhs = bracket.contract_form(theta.form())?;
            let rhs = jb1.contract_form(theta.form())?.scale(&Expr::constant(-(b as f64)));
            let (d, _) = max_deviation(&pts, lhs.components(), rhs.components())?;
            cases.push(IdentityCase::new(d).alpha(theta.order()).beta(b));
        }
    }
    Ok(IdentityReport::build("isjbt", space, seed, samples, tol, cases))
}

fn lagrangian_points(l: &Lagrangian, samples: usize, seed: u64) -> Result<Vec<JetPoint>> {
    Sampler::new(l.space(), seed).regular().points(samples)
}

/// Reconstruction of `θ_L` from `L`: for `γ = 0..k-1`,
/// `i_{J^γ}θ_L = γ! Σ_{β=1}^{k-γ} (-1)^{β-1}/(β+γ)! 𝓛_S^{β-1} d_{J^{β+γ}}L`,
/// with the Lie derivatives realized through total derivatives.
pub fn verify_tabg(l: &Lagrangian, samples: usize, seed: u64, tol: f64) -> Result<IdentityReport> {
    let space = l.space();
    let k = l.order();
    let pts = lagrangian_points(l, samples, seed)?;
    let theta = poincare_cartan(l)?;
    let mut cases = Vec::new();
    for gamma in 0..k {
        let lhs = i_j_power(theta.form(), gamma)?;
        let rhs = reconstruction_rhs(space, l.expr(), k, gamma, LieRoute::Total)?;
        let (d, _) = max_deviation(&pts, lhs.components(), rhs.components())?;
        cases.push(IdentityCase::new(d).gamma(gamma));
    }
    Ok(IdentityReport::build("tabg", space, seed, samples, tol, cases))
}

/// Liouville identities of the Poincaré–Cartan form:
/// `𝓛_{C_1}θ_L = θ_{C_1L - L}`;
/// `i_{C_α}θ_L = α! Σ_{β=1}^{k-α} (-1)^{β-1}/(α+β)! d_T^{β-1}(C_{α+β}L)` for
/// `α < k`; `i_{C_α}θ_L = 0` for `α = k..2k-1`.
pub fn verify_ictl(l: &Lagrangian, samples: usize, seed: u64, tol: f64) -> Result<IdentityReport> {
    let space = l.space();
    let k = l.order();
    let pts = lagrangian_points(l, samples, seed)?;
    let theta = poincare_cartan(l)?.into_form();
    let mut cases = Vec::new();

    let c1 = liouville(space, 1)?;
    let lhs = lie_derivative_oneform(&c1, &theta)?;
    let shifted = l.with_expr(c1.apply(l.expr()) - l.expr())?;
    let rhs = poincare_cartan(&shifted)?.into_form();
    let (d, _) = max_deviation(&pts, lhs.components(), rhs.components())?;
    cases.push(IdentityCase::new(d).alpha(1).label("lie_c1_theta"));

    for a in 1..=space.r {
        let lhs = interior(&liouville(space, a)?, &theta)?;
        let rhs = if a < k {
            let terms = (1..=k - a)
                .map(|b| {
                    let cl = liouville(space, a + b)?.apply(l.expr());
                    let c = factorial(a) * sign(b - 1) / factorial(a + b);
                    Ok(c * tulczyjew_power(space, &cl, b - 1)?)
                })
                .collect::<Result<Vec<_>>>()?;
            sum(terms)
        } else {
            Expr::zero()
        };
        let (d, _) = max_deviation(&pts, &[lhs], &[rhs])?;
        let label = if a < k { "i_c_theta_sum" } else { "i_c_theta_vanishes" };
        cases.push(IdentityCase::new(d).alpha(a).label(label));
    }
    Ok(IdentityReport::build("ictl", space, seed, samples, tol, cases))
}

/// Every identity on `space` with a random semispray; the Lagrangian
/// identities use a random polynomial Lagrangian of order `⌊(r+1)/2⌋`.
pub fn verify_all(space: JetSpace, samples: usize, seed: u64, tol: f64) -> Result<Vec<IdentityReport>> {
    let s = random_semispray(space, seed)?;
    let l = random_lagrangian(space.n, space.r.div_ceil(2).max(1), seed)?;
    std::thread::scope(|scope| {
        let jobs: Vec<Box<dyn FnOnce() -> Result<IdentityReport> + Send + '_>> = vec![
            Box::new(move || verify_cacb(space, samples, seed, tol)),
            Box::new(move || verify_cajb(space, samples, seed, tol)),
            Box::new(|| verify_cas(&s, samples, seed, tol)),
            Box::new(|| verify_jasjb(&s, samples, seed, tol)),
            Box::new(|| verify_isjbt(&s, samples, seed, tol)),
            Box::new(|| verify_tabg(&l, samples, seed, tol)),
            Box::new(|| verify_ictl(&l, samples, seed, tol)),
        ];
        let handles: Vec<_> = jobs.into_iter().map(|j| scope.spawn(j)).collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("identity worker panicked"))
            .collect()
    })
}
