//! Problem files: what the user wants analyzed, and how to turn it into
//! engine objects.

use std::str::FromStr;

use jetcalc::expr::parse;
use jetcalc::finsler::FinslerCandidate;
use jetcalc::linalg::ExprMatrix;
use jetcalc::sample::{PointFilter, Sampler};
use jetcalc::variational::{derive_semispray, Lagrangian};
use jetcalc::worked::{build_f1, build_f2, build_l1, build_l2, f2_filter, geodesic_spray, Metric};
use jetcalc::{Expr, JetPoint, JetSpace, Semispray};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const DEFAULT_SEED: u64 = 0;
pub const DEFAULT_SAMPLES: usize = 100;
pub const DEFAULT_TOL: f64 = 1e-9;
/// Default lower bound on `det g` at sample points.
pub const DEFAULT_MIN_DET: f64 = 0.05;
/// Default lower bound on the `g`-norm of the part of `z^{(2)}` orthogonal to
/// `y^{(1)}`, where `F₂` is non-degenerate.
pub const DEFAULT_MIN_Z_PERP: f64 = 0.05;

/// Named constructions on a metric.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Builder {
    L1,
    F1,
    L2,
    F2,
}

impl FromStr for Builder {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s.to_ascii_lowercase().as_str() {
            "l1" | "energy" | "riemannian" | "geodesic" => Ok(Builder::L1),
            "f1" | "finsler1" => Ok(Builder::F1),
            "l2" | "biharmonic" => Ok(Builder::L2),
            "f2" | "finsler2" => Ok(Builder::F2),
            other => Err(CliError::Input(format!(
                "unknown builder `{other}` (expected L1, F1, L2, F2, riemannian, biharmonic)"
            ))),
        }
    }
}

impl Builder {
    pub fn order(self) -> usize {
        match self {
            Builder::L1 | Builder::F1 => 1,
            Builder::L2 | Builder::F2 => 2,
        }
    }
}

/// The JSON problem file.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    /// Dimension of the base manifold.
    pub n: usize,
    /// Order of the Lagrangian or Finsler function.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    /// Order of the semispray.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<usize>,
    /// Metric entries as expressions in `x1..xn`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metric: Option<Vec<Vec<String>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub builder: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lagrangian: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub finsler: Option<String>,
    /// Coefficients `G^i` of a semispray of order `r`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub semispray: Option<Vec<String>>,
    /// Second semispray for projective comparisons.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub semispray_alt: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_det: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_z_perp: Option<f64>,
}

impl ProblemSpec {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let spec: ProblemSpec =
            serde_json::from_str(text).map_err(|e| CliError::Input(format!("invalid problem file: {e}")))?;
        if spec.n == 0 {
            return Err(CliError::Input("n must be at least 1".into()));
        }
        Ok(spec)
    }
}

/// Run settings after applying command-line overrides.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Settings {
    pub seed: u64,
    pub samples: usize,
    pub tol: f64,
}

/// A validated problem with its metric parsed.
#[derive(Debug, Clone)]
pub struct Problem {
    pub spec: ProblemSpec,
    pub settings: Settings,
    metric: Option<Metric>,
    builder: Option<Builder>,
}

fn parse_in(text: &str, space: JetSpace, what: &str) -> Result<Expr, CliError> {
    parse(text, &space).map_err(|e| CliError::Input(format!("{what}: {e}")))
}

impl Problem {
    pub fn new(spec: ProblemSpec, seed: Option<u64>, samples: Option<usize>, tol: Option<f64>) -> Result<Self, CliError> {
        let settings = Settings {
            seed: seed.or(spec.seed).unwrap_or(DEFAULT_SEED),
            samples: samples.or(spec.samples).unwrap_or(DEFAULT_SAMPLES),
            tol: tol.or(spec.tol).unwrap_or(DEFAULT_TOL),
        };
        if settings.samples == 0 {
            return Err(CliError::Input("samples must be at least 1".into()));
        }
        if settings.tol.is_nan() || settings.tol < 0.0 {
            return Err(CliError::Input("tol must be a non-negative number".into()));
        }
        let builder = spec.builder.as_deref().map(Builder::from_str).transpose()?;
        let metric = match &spec.metric {
            None => None,
            Some(rows) => {
                let n = spec.n;
                if rows.len() != n || rows.iter().any(|r| r.len() != n) {
                    return Err(CliError::Input(format!("metric must be {n}×{n}")));
                }
                let base = JetSpace::new(n, 1)?;
                let parsed = rows
                    .iter()
                    .enumerate()
                    .map(|(i, row)| {
                        row.iter()
                            .enumerate()
                            .map(|(j, t)| parse_in(t, base, &format!("metric[{}][{}]", i + 1, j + 1)))
                            .collect::<Result<Vec<_>, _>>()
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                Some(Metric::new(ExprMatrix::from_rows(parsed)?)?)
            }
        };
        if builder.is_some() && metric.is_none() {
            return Err(CliError::Input("a builder needs a metric".into()));
        }
        Ok(Self {
            spec,
            settings,
            metric,
            builder,
        })
    }

    pub fn n(&self) -> usize {
        self.spec.n
    }

    pub fn builder(&self) -> Option<Builder> {
        self.builder
    }

    pub fn metric(&self) -> Option<&Metric> {
        self.metric.as_ref()
    }

    fn need_k(&self) -> Result<usize, CliError> {
        self.spec
            .k
            .or(self.builder.map(Builder::order))
            .ok_or_else(|| CliError::Input("order k is required".into()))
    }

    /// The Lagrangian role: an explicit expression, or the builder's function.
    pub fn lagrangian(&self) -> Result<Lagrangian, CliError> {
        if let Some(text) = &self.spec.lagrangian {
            let k = self.need_k()?;
            let e = parse_in(text, JetSpace::new(self.n(), k)?, "lagrangian")?;
            return Ok(Lagrangian::new(self.n(), k, e)?);
        }
        if self.spec.finsler.is_some() {
            return Ok(self.finsler()?.as_lagrangian().clone());
        }
        match (self.builder, &self.metric) {
            (Some(Builder::L1), Some(g)) => Ok(build_l1(g)?),
            (Some(Builder::L2), Some(g)) => Ok(build_l2(g)?),
            (Some(Builder::F1 | Builder::F2), Some(_)) => Ok(self.finsler()?.as_lagrangian().clone()),
            _ => Err(CliError::Input("no lagrangian: give `lagrangian` or a metric with a builder".into())),
        }
    }

    /// The Finsler role. L1 and L2 builders map to F1 and F2 respectively.
    pub fn finsler(&self) -> Result<FinslerCandidate, CliError> {
        if let Some(text) = &self.spec.finsler {
            let k = self.need_k()?;
            let e = parse_in(text, JetSpace::new(self.n(), k)?, "finsler")?;
            return Ok(FinslerCandidate::new(self.n(), k, e)?);
        }
        match (self.builder, &self.metric) {
            (Some(Builder::L1 | Builder::F1), Some(g)) => Ok(build_f1(g)?),
            (Some(Builder::L2 | Builder::F2), Some(g)) => Ok(build_f2(g)?),
            _ => Err(CliError::Input("no finsler function: give `finsler` or a metric with a builder".into())),
        }
    }

    fn parse_semispray(&self, coeffs: &[String], what: &str) -> Result<Semispray, CliError> {
        let r = self
            .spec
            .r
            .ok_or_else(|| CliError::Input("semispray order r is required".into()))?;
        let space = JetSpace::new(self.n(), r)?;
        if coeffs.len() != self.n() {
            return Err(CliError::Input(format!("{what} needs {} coefficients", self.n())));
        }
        let g = coeffs
            .iter()
            .enumerate()
            .map(|(i, t)| parse_in(t, space, &format!("{what}[{}]", i + 1)))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Semispray::new(space, g)?)
    }

    pub fn has_explicit_semispray(&self) -> bool {
        self.spec.semispray.is_some()
    }

    /// The semispray role: explicit coefficients, the geodesic spray of the
    /// metric for first order builders, or the Euler–Lagrange semispray of
    /// the Lagrangian.
    pub fn semispray(&self) -> Result<Semispray, CliError> {
        if let Some(c) = &self.spec.semispray {
            return self.parse_semispray(c, "semispray");
        }
        if let (Some(Builder::L1 | Builder::F1), Some(g)) = (self.builder, &self.metric) {
            return Ok(geodesic_spray(g)?);
        }
        let l = self.lagrangian()?;
        let points = self.points(l.space(), 0)?;
        Ok(derive_semispray(&l, &points, self.derive_tol())?.semispray)
    }

    pub fn semispray_alt(&self) -> Result<Semispray, CliError> {
        match &self.spec.semispray_alt {
            Some(c) => self.parse_semispray(c, "semispray_alt"),
            None => Err(CliError::Input("projective comparison needs `semispray_alt`".into())),
        }
    }

    /// Tolerance for the internal consistency check of a derivation; never
    /// tighter than what floating point can deliver.
    pub fn derive_tol(&self) -> f64 {
        self.settings.tol.max(1e-9)
    }

    pub fn filters(&self, space: JetSpace) -> Result<Vec<PointFilter>, CliError> {
        let mut fs = Vec::new();
        if let Some(g) = &self.metric {
            fs.push(g.det_filter(self.spec.min_det.unwrap_or(DEFAULT_MIN_DET)));
            if self.builder.is_some_and(|b| b.order() == 2) && space.r >= 2 {
                fs.push(f2_filter(g, self.spec.min_z_perp.unwrap_or(DEFAULT_MIN_Z_PERP))?);
            }
        }
        Ok(fs)
    }

    /// Regular sample points on `space`; `stream` separates independent draws.
    pub fn points(&self, space: JetSpace, stream: u64) -> Result<Vec<JetPoint>, CliError> {
        let filters = self.filters(space)?;
        Ok(Sampler::new(space, self.settings.seed.wrapping_add(stream))
            .regular()
            .with_filters(&filters)
            .points(self.settings.samples)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn problem(json: &str) -> Result<Problem, CliError> {
        Problem::new(ProblemSpec::from_json(json)?, None, None, None)
    }

    #[test]
    fn builder_aliases() {
        assert_eq!("Riemannian".parse::<Builder>().unwrap(), Builder::L1);
        assert_eq!("biharmonic".parse::<Builder>().unwrap(), Builder::L2);
        assert_eq!("F2".parse::<Builder>().unwrap(), Builder::F2);
        assert!("L3".parse::<Builder>().is_err());
    }

    #[test]
    fn overrides_beat_file_settings() {
        let spec = ProblemSpec::from_json(r#"{"n":2,"r":1,"seed":4,"samples":7}"#).unwrap();
        let p = Problem::new(spec.clone(), Some(9), None, None).unwrap();
        assert_eq!(
            p.settings,
            Settings {
                seed: 9,
                samples: 7,
                tol: DEFAULT_TOL
            }
        );
        assert!(Problem::new(spec.clone(), None, Some(0), None).is_err());
        assert!(Problem::new(spec, None, None, Some(f64::NAN)).is_err());
    }

    #[test]
    fn roles_resolve_from_builder() {
        let p = problem(r#"{"n":2,"metric":[["1","0"],["0","1+x1^2"]],"builder":"L2"}"#).unwrap();
        assert_eq!(p.lagrangian().unwrap().order(), 2);
        assert_eq!(p.finsler().unwrap().order(), 2);
        assert!(p.semispray_alt().is_err());
        let p = problem(r#"{"n":2,"metric":[["1","0"],["0","1"]],"builder":"F1"}"#).unwrap();
        assert_eq!(p.semispray().unwrap().space(), JetSpace::new(2, 1).unwrap());
    }

    #[test]
    fn malformed_problems() {
        assert!(problem(r#"{"n":0}"#).is_err());
        assert!(problem(r#"{"n":2,"builder":"L1"}"#).is_err());
        assert!(problem(r#"{"n":2,"metric":[["1","y1_1"],["0","1"]],"builder":"L1"}"#).is_err());
        // explicit expressions need their order
        let p = problem(r#"{"n":1,"lagrangian":"y1_1^2"}"#).unwrap();
        assert!(matches!(p.lagrangian(), Err(CliError::Input(_))));
        let p = problem(r#"{"n":1,"semispray":["x1"]}"#).unwrap();
        assert!(p.semispray().is_err());
    }
}
