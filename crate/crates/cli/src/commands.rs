//! Command implementations. Each returns a [`Report`]; printing and exit codes
//! are left to the binary.

use jetcalc::finsler::{
    finsler_forms, finsler_validate, homogeneous_form_check, metrizability_residual, pointwise_metrization,
    projective_equivalent, semispray_homogeneity_check, zermelo_check,
};
use jetcalc::fnverify::{verify_all, verify_ictl, verify_tabg, IdentityReport};
use jetcalc::jet::{lie_bracket, liouville};
use jetcalc::report::CheckItem;
use jetcalc::sample::{max_deviation, max_residual};
use jetcalc::variational::{derive_semispray, el_residual, energy, regularity_check, verify_pc_characterization};
use jetcalc::worked::{geodesic_spray, integrate, Trajectory};
use jetcalc::{Expr, JetPoint, JetSpace, Semispray};
use serde_json::json;

use crate::error::CliError;
use crate::report::Report;
use crate::spec::{Builder, Problem};

/// The `check` variants.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Which {
    Regular,
    Zermelo,
    Finsler,
    Homogeneous,
    Spray,
    Projective,
    Metrizable,
    PcIdentities,
}

impl Which {
    pub fn name(self) -> &'static str {
        match self {
            Which::Regular => "regular",
            Which::Zermelo => "zermelo",
            Which::Finsler => "finsler",
            Which::Homogeneous => "homogeneous",
            Which::Spray => "spray",
            Which::Projective => "projective",
            Which::Metrizable => "metrizable",
            Which::PcIdentities => "pc-identities",
        }
    }
}

fn render_all(exprs: &[Expr]) -> Vec<String> {
    exprs.iter().map(|e| e.simplify().render()).collect()
}

pub fn derive(problem: &Problem, input: &[u8]) -> Result<Report, CliError> {
    let tol = problem.settings.tol;
    let l = problem.lagrangian()?;
    let points = problem.points(l.space(), 0)?;
    let d = derive_semispray(&l, &points, problem.derive_tol())?;
    let mut report = Report::new("derive", input, &problem.settings);
    let el = el_residual(&l, &d.semispray)?;
    let (dev, _) = max_residual(&points, el.form().components())?;
    report.push(CheckItem::within("el_residual", dev, tol));
    report.push(CheckItem::within("coefficient_matrix", d.coefficient_dev, problem.derive_tol()));
    if let (Some(Builder::L1), Some(g)) = (problem.builder(), problem.metric()) {
        let gs = geodesic_spray(g)?;
        let (dev, _) = max_deviation(&points, d.semispray.coefficients(), gs.coefficients())?;
        report.push(CheckItem::within("geodesic_spray", dev, tol));
    }
    report.details = json!({
        "n": l.space().n,
        "k": l.order(),
        "r": d.semispray.space().r,
        "hessian_rank": d.hessian_rank,
        "G": render_all(d.semispray.coefficients()),
    });
    Ok(report)
}

pub fn check(problem: &Problem, which: Which, input: &[u8]) -> Result<Report, CliError> {
    let tol = problem.settings.tol;
    let mut report = Report::new(format!("check {}", which.name()), input, &problem.settings);
    match which {
        Which::Regular => {
            let l = problem.lagrangian()?;
            let points = problem.points(l.space(), 0)?;
            let reg = regularity_check(&l, &points)?;
            report.push(
                CheckItem::flag("hessian_full_rank", reg.regular)
                    .with_note(format!("rank {}..{} of {}", reg.min_rank, reg.max_rank, l.space().n)),
            );
            report.details = json!({"min_rank": reg.min_rank, "max_rank": reg.max_rank, "n": l.space().n});
        }
        Which::Zermelo => {
            let f = problem.finsler()?;
            let points = problem.points(f.space(), 0)?;
            report.extend(zermelo_check(&f, &points, tol)?.items);
        }
        Which::Finsler => {
            let f = problem.finsler()?;
            let points = problem.points(f.space(), 0)?;
            let v = finsler_validate(&f, &points, tol)?;
            report.push(CheckItem::flag("positive", v.positivity_ok));
            report.push(CheckItem::within("zermelo", v.zermelo_dev, tol));
            let n = f.space().n;
            report.push(
                CheckItem::flag("angular_rank_n_minus_1", v.rank_seen == [n - 1])
                    .with_note(format!("ranks seen {:?}", v.rank_seen)),
            );
        }
        Which::Homogeneous => homogeneous(problem, &mut report)?,
        Which::Spray => {
            let s = problem.semispray()?;
            let points = problem.points(s.space(), 1)?;
            spray_items(&s, &points, tol, &mut report)?;
        }
        Which::Projective => {
            let (s1, s2) = (problem.semispray()?, problem.semispray_alt()?);
            let points = problem.points(s1.space(), 1)?;
            let cmp = projective_equivalent(&s1, &s2, &points, tol)?;
            report.push(CheckItem::within("difference_proportional_to_y1", cmp.max_dev, tol));
            report.details = json!({"p_samples": cmp.p_samples});
        }
        Which::Metrizable => metrizable(problem, &mut report)?,
        Which::PcIdentities => pc_identities(problem, &mut report)?,
    }
    Ok(report)
}

fn spray_items(s: &Semispray, points: &[JetPoint], tol: f64, report: &mut Report) -> Result<(), CliError> {
    let space = s.space();
    let sv = s.to_vector_field();
    let r1 = lie_bracket(&liouville(space, 1)?, &sv)?.sub(&sv)?;
    report.push(CheckItem::within("c1_bracket", max_residual(points, r1.components())?.0, tol));
    if space.r >= 2 {
        let r2 = lie_bracket(&liouville(space, 2)?, &sv)?.sub(&liouville(space, 1)?.scale(&Expr::constant(2.0)))?;
        report.push(CheckItem::within("c2_bracket", max_residual(points, r2.components())?.0, tol));
    }
    Ok(())
}

/// A semispray role (explicit, derived, or geodesic) is checked through the
/// bracket relations; a Finsler role through its Poincaré–Cartan form.
fn homogeneous(problem: &Problem, report: &mut Report) -> Result<(), CliError> {
    let tol = problem.settings.tol;
    let semispray_role = problem.has_explicit_semispray()
        || (problem.spec.finsler.is_none() && !matches!(problem.builder(), Some(Builder::F1 | Builder::F2)));
    if semispray_role {
        let s = problem.semispray()?;
        let points = problem.points(s.space(), 1)?;
        let rep = semispray_homogeneity_check(&s, &points, tol)?;
        for a in &rep.alphas {
            report.push(CheckItem::within(format!("alpha_{}_lower_orders", a.alpha), a.lower_dev, tol));
            report.push(CheckItem::within(
                format!("alpha_{}_proportional_to_c_r", a.alpha),
                a.proportional_dev,
                tol,
            ));
        }
        report.details = json!({"spray": rep.spray, "c2_dev": rep.c2_dev});
    } else {
        let f = problem.finsler()?;
        let points = problem.points(f.space(), 0)?;
        let forms = finsler_forms(&f)?;
        report.extend(homogeneous_form_check(&forms.theta, &points, tol)?.items);
    }
    Ok(())
}

fn metrizable(problem: &Problem, report: &mut Report) -> Result<(), CliError> {
    let tol = problem.settings.tol;
    let f = problem.finsler()?;
    let points = problem.points(f.space(), 0)?;
    let explicit = problem.has_explicit_semispray() || matches!(problem.builder(), Some(Builder::L1 | Builder::F1));
    if explicit {
        let s = problem.semispray()?;
        let m = metrizability_residual(&s, &f, &points, tol)?;
        report.push(CheckItem::within("lie_s_theta_minus_df", m.oneform_residual, tol));
        report.push(CheckItem::within("i_s_omega", m.two_form_residual, tol));
        if let Some(note) = m.note {
            report.notes.push(note);
        }
        report.details = json!({"semispray_homogeneous": m.semispray_homogeneous});
    } else {
        let (one, two) = pointwise_metrization(&f, &points)?;
        report.push(CheckItem::within("lie_s_theta_minus_df", one, tol));
        report.push(CheckItem::within("i_s_omega", two, tol));
        report.notes.push(
            "no semispray given: at each point the Euler-Lagrange system was solved for the values of G \
             (minimum norm within the projective class) and the residuals evaluated there"
                .into(),
        );
    }
    Ok(())
}

fn identity_items(rep: &IdentityReport, tol: f64) -> Vec<CheckItem> {
    rep.params
        .iter()
        .map(|c| {
            let mut name = rep.name.clone();
            for (tag, v) in [("alpha", c.alpha), ("beta", c.beta), ("gamma", c.gamma)] {
                if let Some(v) = v {
                    name.push_str(&format!("_{tag}{v}"));
                }
            }
            if let Some(l) = &c.label {
                name.push_str(&format!("_{l}"));
            }
            CheckItem::within(name, c.max_dev, tol)
        })
        .collect()
}

fn pc_identities(problem: &Problem, report: &mut Report) -> Result<(), CliError> {
    let st = problem.settings;
    let l = problem.lagrangian()?;
    let tabg = verify_tabg(&l, st.samples, st.seed, st.tol)?;
    let ictl = verify_ictl(&l, st.samples, st.seed, st.tol)?;
    report.extend(identity_items(&tabg, st.tol));
    report.extend(identity_items(&ictl, st.tol));
    let points = problem.points(l.space(), 0)?;
    if regularity_check(&l, &points)?.regular {
        let s = derive_semispray(&l, &points, problem.derive_tol())?.semispray;
        let theta = jetcalc::variational::poincare_cartan(&l)?;
        let rep = verify_pc_characterization(&theta, &s, l.expr(), &points, st.tol)?;
        report.extend(rep.items);
    } else {
        report
            .notes
            .push("lagrangian is not regular: characterization along its semispray skipped".into());
    }
    Ok(())
}

pub fn verify_identities(problem: &Problem, input: &[u8]) -> Result<Report, CliError> {
    let st = problem.settings;
    let r = problem
        .spec
        .r
        .or(problem.spec.k.map(|k| 2 * k - 1))
        .ok_or_else(|| CliError::Input("verify-identities needs r (or k)".into()))?;
    let space = JetSpace::new(problem.n(), r)?;
    let reps = verify_all(space, st.samples, st.seed, st.tol)?;
    let mut report = Report::new("verify-identities", input, &st);
    for rep in &reps {
        report.push(CheckItem::within(rep.name.clone(), rep.max_dev, st.tol));
        if let Some(v) = &rep.condition_variant {
            report.notes.push(format!("{}: matching range condition {v}", rep.name));
        }
    }
    report.details = serde_json::to_value(&reps).expect("identity reports serialize");
    Ok(report)
}

/// Initial state: a JSON array of coordinates or `{"coords": [...]}`.
pub fn parse_init(text: &str) -> Result<Vec<f64>, CliError> {
    #[derive(serde::Deserialize)]
    #[serde(untagged)]
    enum Init {
        Flat(Vec<f64>),
        Tagged { coords: Vec<f64> },
    }
    match serde_json::from_str::<Init>(text) {
        Ok(Init::Flat(v)) | Ok(Init::Tagged { coords: v }) => Ok(v),
        Err(e) => Err(CliError::Input(format!("invalid initial state: {e}"))),
    }
}

pub struct IntegrateArgs {
    pub init: Vec<f64>,
    pub t0: f64,
    pub t1: f64,
    pub steps: usize,
}

pub fn integrate_cmd(problem: &Problem, args: &IntegrateArgs, input: &[u8]) -> Result<(Report, Trajectory), CliError> {
    let s = problem.semispray()?;
    let space = s.space();
    if args.init.len() != space.dim() {
        return Err(CliError::Input(format!(
            "initial state has {} coordinates, T^{}M with n = {} needs {}",
            args.init.len(),
            space.r,
            space.n,
            space.dim()
        )));
    }
    let p0 = JetPoint::new(space, args.init.clone())?;
    let tr = integrate(&s, &p0, args.t0, args.t1, args.steps)?;
    let mut report = Report::new("integrate", input, &problem.settings);
    report.push(CheckItem::flag("completed", true));
    let mut details = json!({
        "n": space.n,
        "r": space.r,
        "steps": args.steps,
        "step": tr.step,
        "method": tr.method,
        "t0": args.t0,
        "t1": args.t1,
        "final_state": tr.last().coords(),
    });
    // energy is conserved along the Euler-Lagrange flow; report its drift
    if !problem.has_explicit_semispray() {
        if let Ok(l) = problem.lagrangian() {
            if l.space() == space {
                let e = energy(&l)?;
                let e0 = e.eval(&p0).map_err(jetcalc::Error::from)?;
                let mut drift = 0.0f64;
                for st in &tr.states {
                    drift = drift.max((e.eval(st).map_err(jetcalc::Error::from)? - e0).abs());
                }
                details["energy_drift"] = json!(drift);
            }
        }
    }
    report.details = details;
    Ok((report, tr))
}
