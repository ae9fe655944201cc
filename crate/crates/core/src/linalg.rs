//! Small dense linear algebra: numeric rank, symbolic cofactor inverses and
//! least-squares solves.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::expr::{sum, Expr, Program};
use crate::jet::JetPoint;

/// Relative pivot threshold used by [`numeric_rank`].
pub const RANK_THRESHOLD: f64 = 1e-8;

/// Square matrix of expressions, row-major.
#[derive(Debug, Clone)]
pub struct ExprMatrix {
    n: usize,
    data: Vec<Expr>,
}

impl ExprMatrix {
    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> Expr) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        Self { n, data }
    }

    pub fn from_rows(rows: Vec<Vec<Expr>>) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidArgument("matrix must be square".into()));
        }
        Ok(Self {
            n,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &Expr {
        &self.data[i * self.n + j]
    }

    pub fn entries(&self) -> &[Expr] {
        &self.data
    }

    pub fn rows(&self) -> Vec<Vec<Expr>> {
        self.data.chunks(self.n).map(|r| r.to_vec()).collect()
    }

    pub fn map(&self, f: impl Fn(&Expr) -> Expr) -> Self {
        Self {
            n: self.n,
            data: self.data.iter().map(f).collect(),
        }
    }

    /// `M·v`.
    pub fn mul_vec(&self, v: &[Expr]) -> Vec<Expr> {
        (0..self.n)
            .map(|i| sum((0..self.n).map(|j| self.get(i, j) * &v[j])))
            .collect()
    }

    fn minor(&self, skip_row: usize, skip_col: usize) -> ExprMatrix {
        let n = self.n - 1;
        ExprMatrix::from_fn(n, |i, j| {
            let r = if i < skip_row { i } else { i + 1 };
            let c = if j < skip_col { j } else { j + 1 };
            self.get(r, c).clone()
        })
    }

    /// Determinant by cofactor expansion along the first row.
    pub fn det(&self) -> Expr {
        match self.n {
            0 => Expr::one(),
            1 => self.get(0, 0).clone(),
            2 => self.get(0, 0) * self.get(1, 1) - self.get(0, 1) * self.get(1, 0),
            _ => sum((0..self.n).filter(|&j| !self.get(0, j).is_zero()).map(|j| {
                let term = self.get(0, j) * self.minor(0, j).det();
                if j % 2 == 0 {
                    term
                } else {
                    -term
                }
            })),
        }
    }

    /// Symbolic inverse `adj(M)/det(M)`. Intended for n ≤ 4.
    pub fn inverse(&self) -> ExprMatrix {
        let det = self.det();
        if self.n == 1 {
            return ExprMatrix::from_fn(1, |_, _| Expr::one() / &det);
        }
        ExprMatrix::from_fn(self.n, |i, j| {
            // adj(M)_{ij} = (-1)^{i+j} det(minor(j, i))
            let c = self.minor(j, i).det();
            let c = if (i + j) % 2 == 0 { c } else { -c };
            c / &det
        })
    }

    pub fn program(&self, n_space: usize) -> Program {
        Program::compile(&self.data, n_space)
    }

    pub fn eval(&self, p: &JetPoint) -> Result<DMatrix<f64>> {
        let v = self.program(p.space().n).eval(p.coords())?;
        Ok(DMatrix::from_row_slice(self.n, self.n, &v))
    }
}

/// Numeric rank by Gaussian elimination with complete pivoting. A pivot counts
/// when it exceeds `threshold × max|entry|` of the input matrix.
pub fn numeric_rank_with(m: &DMatrix<f64>, threshold: f64) -> usize {
    let mut a = m.clone();
    let (rows, cols) = a.shape();
    let scale = a.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    if scale == 0.0 || !scale.is_finite() {
        return 0;
    }
    let cutoff = threshold * scale;
    let mut rank = 0;
    for step in 0..rows.min(cols) {
        let (mut pr, mut pc, mut best) = (step, step, 0.0);
        for i in step..rows {
            for j in step..cols {
                if a[(i, j)].abs() > best {
                    best = a[(i, j)].abs();
                    pr = i;
                    pc = j;
                }
            }
        }
        if best <= cutoff {
            break;
        }
        a.swap_rows(step, pr);
        a.swap_columns(step, pc);
        let pivot = a[(step, step)];
        for i in step + 1..rows {
            let f = a[(i, step)] / pivot;
            if f != 0.0 {
                for j in step..cols {
                    let v = a[(step, j)];
                    a[(i, j)] -= f * v;
                }
            }
        }
        rank += 1;
    }
    rank
}

pub fn numeric_rank(m: &DMatrix<f64>) -> usize {
    numeric_rank_with(m, RANK_THRESHOLD)
}

/// Minimum-norm least-squares solution of `A x = b`.
///
/// Symmetric systems (the Euler–Lagrange systems are) go through a symmetric
/// eigendecomposition; others through the SVD, whose factors are checked by
/// recomposition because nalgebra's SVD occasionally returns inaccurate
/// singular vectors for rank-deficient input.
pub fn least_squares(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    let scale = a.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
    let eps = 1e-12 * scale;
    if a.is_square() && (a - a.transpose()).abs().max() <= 1e-12 * scale {
        let eig = SymmetricEigen::new(0.5 * (a + a.transpose()));
        let solve = |rhs: &DVector<f64>| {
            let proj = eig.eigenvectors.transpose() * rhs;
            let coeffs = proj.zip_map(&eig.eigenvalues, |p, l| if l.abs() > eps { p / l } else { 0.0 });
            &eig.eigenvectors * coeffs
        };
        // one step of refinement recovers the digits lost to a wide
        // eigenvalue spread
        let x = solve(b);
        let r = b - a * &x;
        return Ok(&x + solve(&r));
    }
    let svd = a.clone().svd(true, true);
    let recomposed = svd
        .clone()
        .recompose()
        .map_err(|e| Error::InvalidArgument(format!("least squares solve failed: {e}")))?;
    if (recomposed - a).abs().max() > 1e-10 * scale {
        return Err(Error::InvalidArgument("inaccurate singular value decomposition".into()));
    }
    svd.solve(b, eps)
        .map_err(|e| Error::InvalidArgument(format!("least squares solve failed: {e}")))
}
