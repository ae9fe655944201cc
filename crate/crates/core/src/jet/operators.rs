use crate::error::{Error, Result};
use crate::expr::{sum, CoordId, Expr};
use crate::jet::{JetSpace, OneForm, SemiBasicForm, Tensor11, TwoForm, VectorField};

fn check_range(what: &'static str, value: usize, min: usize, max: usize) -> Result<()> {
    if value < min || value > max {
        return Err(Error::OutOfRange {
            what,
            value,
            min,
            max,
        });
    }
    Ok(())
}

/// Liouville field `C_α = Σ_{s=1}^{r+1-α} s·y^{(s)i} ∂/∂y^{(α+s-1)i}`.
pub fn liouville(space: JetSpace, alpha: usize) -> Result<VectorField> {
    check_range("Liouville index", alpha, 1, space.r)?;
    let mut v = VectorField::zero(space);
    for s in 1..=space.r + 1 - alpha {
        for i in 1..=space.n {
            v.set(CoordId::new(alpha + s - 1, i), s as f64 * Expr::y(s, i));
        }
    }
    Ok(v)
}

/// `J^α`: the (1,1) tensor sending `∂/∂y^{(β)i}` to `∂/∂y^{(β+α)i}` (zero past
/// order r). `J^{r+1} = 0`.
pub fn tangent_tensor(space: JetSpace, alpha: usize) -> Result<Tensor11> {
    check_range("tangent structure power", alpha, 1, space.r + 1)?;
    let n = space.n;
    let mut t = Tensor11::zero(space);
    for b in 0..space.dim() {
        let c = space.coord(b);
        if c.order + alpha <= space.r {
            t.set(CoordId::new(c.order + alpha, c.index).flat(n), b, Expr::one());
        }
    }
    Ok(t)
}

/// Tulczyjew operator `d_T e = Σ_β (β+1) y^{(β+1)i} ∂e/∂y^{(β)i}`.
///
/// Raises the maximal order by one; refuses expressions that already reach
/// order r instead of truncating.
pub fn tulczyjew(space: JetSpace, e: &Expr) -> Result<Expr> {
    let Some(m) = e.max_order() else {
        return Ok(Expr::zero());
    };
    if m >= space.r {
        return Err(Error::OrderOverflow {
            order: m,
            r: space.r,
        });
    }
    Ok(total_derivative_upto(space, e, m))
}

fn total_derivative_upto(space: JetSpace, e: &Expr, top: usize) -> Expr {
    let mut terms = Vec::new();
    for beta in 0..=top {
        for i in 1..=space.n {
            let d = e.diff(CoordId::new(beta, i));
            if !d.is_zero() {
                terms.push((beta + 1) as f64 * Expr::y(beta + 1, i) * d);
            }
        }
    }
    sum(terms)
}

/// `d_T^m e`.
pub fn tulczyjew_power(space: JetSpace, e: &Expr, m: usize) -> Result<Expr> {
    let mut out = e.clone();
    for _ in 0..m {
        out = tulczyjew(space, &out)?;
    }
    Ok(out)
}

/// Semispray of order r, `S = d_T - (r+1) G^i ∂/∂y^{(r)i}`, given by its
/// coefficients `G^i`.
#[derive(Debug, Clone)]
pub struct Semispray {
    space: JetSpace,
    g: Vec<Expr>,
}

impl Semispray {
    pub fn new(space: JetSpace, g: Vec<Expr>) -> Result<Self> {
        if g.len() != space.n {
            return Err(Error::InvalidArgument(format!(
                "semispray needs {} coefficients, got {}",
                space.n,
                g.len()
            )));
        }
        if let Some(e) = g.iter().find(|e| e.max_order().is_some_and(|m| m > space.r)) {
            return Err(Error::InvalidArgument(format!(
                "coefficient {e} uses coordinates beyond order {}",
                space.r
            )));
        }
        Ok(Self { space, g })
    }

    /// The semispray with `G = 0` (flat Tulczyjew flow).
    pub fn trivial(space: JetSpace) -> Self {
        Self {
            space,
            g: vec![Expr::zero(); space.n],
        }
    }

    pub fn space(&self) -> JetSpace {
        self.space
    }

    pub fn coefficients(&self) -> &[Expr] {
        &self.g
    }

    /// Projective change `G ↦ G + P·y^{(1)}`, i.e. `S - (r+1)P·C_r`.
    pub fn projective_shift(&self, p: &Expr) -> Self {
        let g = self
            .g
            .iter()
            .enumerate()
            .map(|(k, gi)| gi + p * Expr::y(1, k + 1))
            .collect();
        Self { space: self.space, g }
    }

    pub fn to_vector_field(&self) -> VectorField {
        let (n, r) = (self.space.n, self.space.r);
        let mut v = VectorField::zero(self.space);
        for beta in 0..r {
            for i in 1..=n {
                v.set(CoordId::new(beta, i), (beta + 1) as f64 * Expr::y(beta + 1, i));
            }
        }
        for i in 1..=n {
            v.set(CoordId::new(r, i), -((r + 1) as f64) * &self.g[i - 1]);
        }
        v
    }

    /// `S(e)`.
    pub fn apply(&self, e: &Expr) -> Expr {
        semispray_apply(self, e)
    }
}

/// `S(e)`: the Tulczyjew part restricted to existing coordinates plus the
/// `-(r+1) G^i ∂e/∂y^{(r)i}` term.
pub fn semispray_apply(s: &Semispray, e: &Expr) -> Expr {
    let space = s.space;
    let Some(m) = e.max_order() else {
        return Expr::zero();
    };
    let r = space.r;
    let base = total_derivative_upto(space, e, m.min(r - 1));
    if m < r {
        return base;
    }
    let top = sum((1..=space.n).filter_map(|i| {
        let d = e.diff(CoordId::new(r, i));
        (!d.is_zero()).then(|| &s.g[i - 1] * d)
    }));
    base - (r + 1) as f64 * top
}

/// Lie bracket `[X, Y]^a = X(Y^a) - Y(X^a)`.
pub fn lie_bracket(x: &VectorField, y: &VectorField) -> Result<VectorField> {
    x.space().check_same(&y.space())?;
    let comps = x
        .components()
        .iter()
        .zip(y.components())
        .map(|(xa, ya)| x.apply(ya) - y.apply(xa))
        .collect();
    VectorField::new(x.space(), comps)
}

/// `(𝓛_X θ)_a = X(θ_a) + θ_b ∂X^b/∂z^a`.
pub fn lie_derivative_oneform(x: &VectorField, theta: &OneForm) -> Result<OneForm> {
    x.space().check_same(&theta.space())?;
    let space = x.space();
    let comps = (0..space.dim())
        .map(|a| {
            let za = space.coord(a);
            let transport = sum(theta
                .components()
                .iter()
                .zip(x.components())
                .filter(|(t, _)| !t.is_zero())
                .map(|(t, xb)| t * xb.diff(za)));
            x.apply(&theta.components()[a]) + transport
        })
        .collect();
    OneForm::new(space, comps)
}

/// `i_X θ = X^a θ_a`.
pub fn interior(x: &VectorField, theta: &OneForm) -> Result<Expr> {
    x.space().check_same(&theta.space())?;
    Ok(sum(x
        .components()
        .iter()
        .zip(theta.components())
        .filter(|(a, b)| !a.is_zero() && !b.is_zero())
        .map(|(a, b)| a * b)))
}

/// `(i_X ω)_b = X^a ω_{ab}`.
pub fn interior2(x: &VectorField, omega: &TwoForm) -> Result<OneForm> {
    x.space().check_same(&omega.space())?;
    let d = x.space().dim();
    let comps = (0..d)
        .map(|b| {
            sum((0..d)
                .filter(|&a| !x.components()[a].is_zero() && !omega.entry(a, b).is_zero())
                .map(|a| &x.components()[a] * omega.entry(a, b)))
        })
        .collect();
    OneForm::new(x.space(), comps)
}

/// `df`.
pub fn exterior_d(space: JetSpace, f: &Expr) -> OneForm {
    let comps = space.coords().map(|c| f.diff(c)).collect();
    OneForm::new(space, comps).expect("one component per coordinate")
}

/// `(dθ)_{ab} = ∂θ_b/∂z^a - ∂θ_a/∂z^b`.
pub fn exterior_d_form(theta: &OneForm) -> TwoForm {
    let space = theta.space();
    let d = space.dim();
    let t = theta.components();
    let mut comps = vec![Expr::zero(); d * d];
    for a in 0..d {
        for b in a + 1..d {
            let e = t[b].diff(space.coord(a)) - t[a].diff(space.coord(b));
            comps[b * d + a] = -&e;
            comps[a * d + b] = e;
        }
    }
    TwoForm::new(space, comps).expect("dim² components")
}

/// `d_{J^α} f`, a semi-basic form of order `r-α+1` with components
/// `∂f/∂y^{(β+α)i}` at level β.
pub fn d_j_alpha(space: JetSpace, f: &Expr, alpha: usize) -> Result<SemiBasicForm> {
    check_range("tangent structure power", alpha, 1, space.r)?;
    let mut form = OneForm::zero(space);
    for beta in 0..=space.r - alpha {
        for i in 1..=space.n {
            form.set(CoordId::new(beta, i), f.diff(CoordId::new(beta + alpha, i)));
        }
    }
    SemiBasicForm::new(form, space.r - alpha + 1)
}

/// `i_{J^α} θ = θ ∘ J^α`: level β picks up `θ_{(β+α)}`. The declared order is
/// the tightest one visible structurally.
pub fn i_j_alpha(theta: &OneForm, alpha: usize) -> Result<SemiBasicForm> {
    let space = theta.space();
    check_range("tangent structure power", alpha, 1, space.r)?;
    let mut form = OneForm::zero(space);
    let mut top = 0;
    for beta in 0..=space.r - alpha {
        for i in 1..=space.n {
            let e = theta.component(CoordId::new(beta + alpha, i)).clone();
            if !e.is_zero() {
                top = beta + 1;
            }
            form.set(CoordId::new(beta, i), e);
        }
    }
    SemiBasicForm::new(form, top.max(1))
}

/// Frölicher–Nijenhuis bracket of a vector field with a (1,1) tensor,
/// `[X, K] = 𝓛_X K`:
/// `(𝓛_X K)^a_b = X(K^a_b) - K^c_b ∂_c X^a + K^a_c ∂_b X^c`.
pub fn fn_bracket_vf_tensor(x: &VectorField, k: &Tensor11) -> Result<Tensor11> {
    x.space().check_same(&k.space())?;
    let space = x.space();
    let d = space.dim();
    let xs = x.components();
    // ∂_c X^a, reused across columns
    let jac: Vec<Expr> = (0..d * d)
        .map(|idx| xs[idx / d].diff(space.coord(idx % d)))
        .collect();
    let dx = |a: usize, c: usize| &jac[a * d + c];
    let mut out = Tensor11::zero(space);
    for a in 0..d {
        for b in 0..d {
            let mut terms = vec![x.apply(k.entry(a, b))];
            for c in 0..d {
                let kcb = k.entry(c, b);
                if !kcb.is_zero() && !dx(a, c).is_zero() {
                    terms.push(-(kcb * dx(a, c)));
                }
                let kac = k.entry(a, c);
                if !kac.is_zero() && !dx(c, b).is_zero() {
                    terms.push(kac * dx(c, b));
                }
            }
            out.set(a, b, sum(terms));
        }
    }
    Ok(out)
}

/// Lie derivative of a semi-basic form along any semispray, computed through
/// the Tulczyjew operator: level j of the result is `d_T θ_{(j)} + j·θ_{(j-1)}`.
///
/// Exact whenever no component reaches order r, because the `G` term of the
/// semispray then never fires; the result is semi-basic of one order higher.
pub fn total_lie_derivative(theta: &SemiBasicForm) -> Result<SemiBasicForm> {
    let space = theta.space();
    let order = theta.order();
    if order > space.r {
        return Err(Error::OrderOverflow {
            order,
            r: space.r,
        });
    }
    let mut form = OneForm::zero(space);
    for j in 0..=order {
        for i in 1..=space.n {
            let mut e = if j < order {
                tulczyjew(space, theta.level(j, i))?
            } else {
                Expr::zero()
            };
            if j >= 1 {
                e = e + j as f64 * theta.level(j - 1, i);
            }
            form.set(CoordId::new(j, i), e);
        }
    }
    Ok(SemiBasicForm::assume(form, order + 1))
}
