use crate::error::{Error, Result};
use crate::expr::{sum, CoordId, Expr, Program};
use crate::jet::{JetPoint, JetSpace};

fn check_len(space: &JetSpace, len: usize, expected: usize) -> Result<()> {
    if len != expected {
        return Err(Error::InvalidArgument(format!(
            "expected {expected} components on T^{}M with n = {}, got {len}",
            space.r, space.n
        )));
    }
    Ok(())
}

/// Vector field on `T^rM`, one component per coordinate.
#[derive(Debug, Clone)]
pub struct VectorField {
    space: JetSpace,
    comps: Vec<Expr>,
}

impl VectorField {
    pub fn new(space: JetSpace, comps: Vec<Expr>) -> Result<Self> {
        check_len(&space, comps.len(), space.dim())?;
        Ok(Self { space, comps })
    }

    pub fn zero(space: JetSpace) -> Self {
        Self {
            space,
            comps: vec![Expr::zero(); space.dim()],
        }
    }

    /// The coordinate field `∂/∂c`.
    pub fn basis(space: JetSpace, c: CoordId) -> Self {
        let mut v = Self::zero(space);
        v.comps[c.flat(space.n)] = Expr::one();
        v
    }

    pub fn space(&self) -> JetSpace {
        self.space
    }

    pub fn components(&self) -> &[Expr] {
        &self.comps
    }

    pub fn component(&self, c: CoordId) -> &Expr {
        &self.comps[c.flat(self.space.n)]
    }

    pub fn set(&mut self, c: CoordId, e: Expr) {
        let k = c.flat(self.space.n);
        self.comps[k] = e;
    }

    /// Directional derivative `X(f) = Σ X^a ∂f/∂z^a`.
    pub fn apply(&self, f: &Expr) -> Expr {
        sum(self
            .comps
            .iter()
            .enumerate()
            .filter(|(_, x)| !x.is_zero())
            .map(|(k, x)| x * f.diff(self.space.coord(k))))
    }

    pub fn scale(&self, s: &Expr) -> Self {
        self.map(|e| s * e)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.space.check_same(&other.space)?;
        Ok(self.zip(other, |a, b| a + b))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.space.check_same(&other.space)?;
        Ok(self.zip(other, |a, b| a - b))
    }

    pub fn map(&self, f: impl Fn(&Expr) -> Expr) -> Self {
        Self {
            space: self.space,
            comps: self.comps.iter().map(f).collect(),
        }
    }

    fn zip(&self, other: &Self, f: impl Fn(&Expr, &Expr) -> Expr) -> Self {
        Self {
            space: self.space,
            comps: self.comps.iter().zip(&other.comps).map(|(a, b)| f(a, b)).collect(),
        }
    }

    pub fn program(&self) -> Program {
        Program::compile(&self.comps, self.space.n)
    }

    pub fn eval(&self, p: &JetPoint) -> Result<Vec<f64>> {
        Ok(self.program().eval(p.coords())?)
    }
}

/// 1-form on `T^rM`, one component per coordinate differential.
#[derive(Debug, Clone)]
pub struct OneForm {
    space: JetSpace,
    comps: Vec<Expr>,
}

impl OneForm {
    pub fn new(space: JetSpace, comps: Vec<Expr>) -> Result<Self> {
        check_len(&space, comps.len(), space.dim())?;
        Ok(Self { space, comps })
    }

    pub fn zero(space: JetSpace) -> Self {
        Self {
            space,
            comps: vec![Expr::zero(); space.dim()],
        }
    }

    /// The coordinate differential `dc`.
    pub fn basis(space: JetSpace, c: CoordId) -> Self {
        let mut v = Self::zero(space);
        v.comps[c.flat(space.n)] = Expr::one();
        v
    }

    pub fn space(&self) -> JetSpace {
        self.space
    }

    pub fn components(&self) -> &[Expr] {
        &self.comps
    }

    pub fn component(&self, c: CoordId) -> &Expr {
        &self.comps[c.flat(self.space.n)]
    }

    pub fn set(&mut self, c: CoordId, e: Expr) {
        let k = c.flat(self.space.n);
        self.comps[k] = e;
    }

    pub fn scale(&self, s: &Expr) -> Self {
        self.map(|e| s * e)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.space.check_same(&other.space)?;
        Ok(self.zip(other, |a, b| a + b))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.space.check_same(&other.space)?;
        Ok(self.zip(other, |a, b| a - b))
    }

    pub fn map(&self, f: impl Fn(&Expr) -> Expr) -> Self {
        Self {
            space: self.space,
            comps: self.comps.iter().map(f).collect(),
        }
    }

    fn zip(&self, other: &Self, f: impl Fn(&Expr, &Expr) -> Expr) -> Self {
        Self {
            space: self.space,
            comps: self.comps.iter().zip(&other.comps).map(|(a, b)| f(a, b)).collect(),
        }
    }

    /// Components of orders `>= order`, flattened.
    pub fn components_from_order(&self, order: usize) -> &[Expr] {
        &self.comps[order.min(self.space.r + 1) * self.space.n..]
    }

    pub fn program(&self) -> Program {
        Program::compile(&self.comps, self.space.n)
    }

    pub fn eval(&self, p: &JetPoint) -> Result<Vec<f64>> {
        Ok(self.program().eval(p.coords())?)
    }
}

/// A 1-form together with its declared semi-basic order `a`: only the
/// `dx, dy^{(1)}, ..., dy^{(a-1)}` components may be nonzero.
#[derive(Debug, Clone)]
pub struct SemiBasicForm {
    form: OneForm,
    order: usize,
}

impl SemiBasicForm {
    /// Wraps `form`, checking structurally that components of order `>= order`
    /// are zero. Use [`SemiBasicForm::assume`] when the vanishing only holds
    /// numerically.
    pub fn new(form: OneForm, order: usize) -> Result<Self> {
        let r = form.space().r;
        if order == 0 || order > r + 1 {
            return Err(Error::OutOfRange {
                what: "semi-basic order",
                value: order,
                min: 1,
                max: r + 1,
            });
        }
        if let Some(k) = form
            .components_from_order(order)
            .iter()
            .position(|e| !e.is_zero())
        {
            let c = form.space().coord(order * form.space().n + k);
            return Err(Error::InvalidArgument(format!(
                "component d{c} of a semi-basic form of order {order} is nonzero"
            )));
        }
        Ok(Self { form, order })
    }

    pub fn assume(form: OneForm, order: usize) -> Self {
        Self { form, order }
    }

    pub fn zero(space: JetSpace, order: usize) -> Self {
        Self {
            form: OneForm::zero(space),
            order,
        }
    }

    pub fn form(&self) -> &OneForm {
        &self.form
    }

    pub fn into_form(self) -> OneForm {
        self.form
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn space(&self) -> JetSpace {
        self.form.space()
    }

    /// Component `θ_{(level) i}`.
    pub fn level(&self, level: usize, i: usize) -> &Expr {
        self.form.component(CoordId::new(level, i))
    }
}

/// Antisymmetric 2-form stored densely, `ω_{ab}` with `ω_{ba} = -ω_{ab}`.
#[derive(Debug, Clone)]
pub struct TwoForm {
    space: JetSpace,
    comps: Vec<Expr>,
}

impl TwoForm {
    pub fn new(space: JetSpace, comps: Vec<Expr>) -> Result<Self> {
        check_len(&space, comps.len(), space.dim() * space.dim())?;
        Ok(Self { space, comps })
    }

    pub fn space(&self) -> JetSpace {
        self.space
    }

    pub fn entry(&self, a: usize, b: usize) -> &Expr {
        &self.comps[a * self.space.dim() + b]
    }

    pub fn components(&self) -> &[Expr] {
        &self.comps
    }

    pub fn neg(&self) -> Self {
        Self {
            space: self.space,
            comps: self.comps.iter().map(|e| -e).collect(),
        }
    }

    pub fn program(&self) -> Program {
        Program::compile(&self.comps, self.space.n)
    }

    /// Numeric matrix at a point, row-major.
    pub fn eval(&self, p: &JetPoint) -> Result<Vec<f64>> {
        Ok(self.program().eval(p.coords())?)
    }
}

/// (1,1) tensor `K = K^a_b ∂_a ⊗ dz^b`, stored as a dense row-major matrix
/// (row `a` = output component, column `b` = input component).
#[derive(Debug, Clone)]
pub struct Tensor11 {
    space: JetSpace,
    comps: Vec<Expr>,
}

impl Tensor11 {
    pub fn new(space: JetSpace, comps: Vec<Expr>) -> Result<Self> {
        check_len(&space, comps.len(), space.dim() * space.dim())?;
        Ok(Self { space, comps })
    }

    pub fn zero(space: JetSpace) -> Self {
        let d = space.dim();
        Self {
            space,
            comps: vec![Expr::zero(); d * d],
        }
    }

    pub fn identity(space: JetSpace) -> Self {
        let mut t = Self::zero(space);
        for a in 0..space.dim() {
            t.set(a, a, Expr::one());
        }
        t
    }

    pub fn space(&self) -> JetSpace {
        self.space
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn entry(&self, a: usize, b: usize) -> &Expr {
        &self.comps[a * self.dim() + b]
    }

    pub fn set(&mut self, a: usize, b: usize, e: Expr) {
        let d = self.dim();
        self.comps[a * d + b] = e;
    }

    pub fn components(&self) -> &[Expr] {
        &self.comps
    }

    /// `K(X)`.
    pub fn apply(&self, x: &VectorField) -> Result<VectorField> {
        self.space.check_same(&x.space())?;
        let d = self.dim();
        let comps = (0..d)
            .map(|a| {
                sum((0..d)
                    .filter(|&b| !self.entry(a, b).is_zero())
                    .map(|b| self.entry(a, b) * &x.components()[b]))
            })
            .collect();
        VectorField::new(self.space, comps)
    }

    /// Composition `self ∘ other`.
    pub fn compose(&self, other: &Tensor11) -> Result<Tensor11> {
        self.space.check_same(&other.space)?;
        let d = self.dim();
        let mut out = Tensor11::zero(self.space);
        for a in 0..d {
            for b in 0..d {
                let e = sum((0..d)
                    .filter(|&c| !self.entry(a, c).is_zero() && !other.entry(c, b).is_zero())
                    .map(|c| self.entry(a, c) * other.entry(c, b)));
                out.set(a, b, e);
            }
        }
        Ok(out)
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            space: self.space,
            comps: self.comps.iter().map(|e| e * s).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.space.check_same(&other.space)?;
        Ok(Self {
            space: self.space,
            comps: self.comps.iter().zip(&other.comps).map(|(a, b)| a - b).collect(),
        })
    }

    /// `(i_K θ)_b = θ_a K^a_b`, i.e. `θ ∘ K`.
    pub fn contract_form(&self, theta: &OneForm) -> Result<OneForm> {
        self.space.check_same(&theta.space())?;
        let d = self.dim();
        let comps = (0..d)
            .map(|b| {
                sum((0..d)
                    .filter(|&a| !self.entry(a, b).is_zero() && !theta.components()[a].is_zero())
                    .map(|a| &theta.components()[a] * self.entry(a, b)))
            })
            .collect();
        OneForm::new(self.space, comps)
    }

    pub fn program(&self) -> Program {
        Program::compile(&self.comps, self.space.n)
    }

    pub fn eval(&self, p: &JetPoint) -> Result<Vec<f64>> {
        Ok(self.program().eval(p.coords())?)
    }
}
