//! Acceptance suite: one line per criterion, non-zero exit if any fails.

use std::path::Path;
use std::process::Command;
use std::time::Instant;

use jetcalc::expr::sum;
use jetcalc::finsler::*;
use jetcalc::fnverify::{verify_all, verify_ictl, verify_tabg};
use jetcalc::jet::{lie_bracket, liouville};
use jetcalc::linalg::ExprMatrix;
use jetcalc::sample::{max_deviation, max_residual, PointFilter, Sampler};
use jetcalc::variational::{derive_semispray, pc_two_form_rank};
use jetcalc::worked::*;
use jetcalc::{CoordId, Expr, JetPoint, JetSpace, Semispray};

type Outcome = Result<(bool, String), jetcalc::Error>;

const TOL: f64 = 1e-9;

fn points(space: JetSpace, seed: u64, count: usize, filters: &[PointFilter]) -> Vec<JetPoint> {
    Sampler::new(space, seed).regular().with_filters(filters).points(count).unwrap()
}

fn metric_points(g: &Metric, space: JetSpace, seed: u64, count: usize) -> Vec<JetPoint> {
    let mut filters = vec![g.det_filter(0.05)];
    if space.r >= 2 {
        filters.push(f2_filter(g, 0.05).unwrap());
    }
    points(space, seed, count, &filters)
}

fn fn_identities() -> Outcome {
    let start = Instant::now();
    let mut ok = true;
    let mut worst = 0.0f64;
    let mut variants = Vec::new();
    for n in [2, 3] {
        for r in [1, 2, 3] {
            for rep in verify_all(JetSpace::new(n, r)?, 100, 0, TOL)? {
                if ["cacb", "cajb", "cas", "jasjb", "isjbt"].contains(&rep.name.as_str()) {
                    ok &= rep.passed();
                    worst = worst.max(rep.max_dev);
                }
                if rep.name == "cacb" {
                    variants.push(format!("n{n}r{r}:{}", rep.condition_variant.as_deref().unwrap_or("?")));
                }
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    Ok((
        ok && secs < 30.0,
        format!("max dev {worst:.2e}, {secs:.1} s, cacb condition {}", variants.join(" ")),
    ))
}

fn pc_reconstruction() -> Outcome {
    let mut ok = true;
    let mut worst = 0.0f64;
    for g in [Metric::warped_plane(), Metric::round_sphere()] {
        for l in [build_l1(&g)?, build_l2(&g)?] {
            for rep in [verify_tabg(&l, 100, 0, TOL)?, verify_ictl(&l, 100, 0, TOL)?] {
                ok &= rep.passed();
                worst = worst.max(rep.max_dev);
            }
        }
    }
    Ok((ok, format!("tabg/ictl max dev {worst:.2e} for L1, L2")))
}

fn inverse_problem() -> Outcome {
    let mut worst = 0.0f64;
    for g in [Metric::warped_plane(), Metric::round_sphere()] {
        let l1 = build_l1(&g)?;
        let pts = metric_points(&g, l1.space(), 0, 100);
        let d = derive_semispray(&l1, &pts, TOL)?;
        let gs = geodesic_spray(&g)?;
        worst = worst.max(max_deviation(&pts, d.semispray.coefficients(), gs.coefficients())?.0);
    }
    Ok((worst < 1e-10, format!("derived vs Christoffel max dev {worst:.2e}")))
}

fn biharmonic() -> Outcome {
    let g = Metric::round_sphere();
    let l2 = build_l2(&g)?;
    let pts = metric_points(&g, l2.space(), 0, 100);
    let d = derive_semispray(&l2, &pts, TOL)?;
    let sv = d.semispray.to_vector_field();
    let c1 = lie_bracket(&liouville(l2.space(), 1)?, &sv)?.sub(&sv)?;
    let c1_dev = max_residual(&pts, c1.components())?.0;
    let rep = semispray_homogeneity_check(&d.semispray, &pts, TOL)?;
    let a3 = &rep.alphas[2];
    Ok((
        d.hessian_rank == 2 && c1_dev < TOL && !a3.holds,
        format!(
            "hessian rank {}, [C1,S]-S {c1_dev:.2e}, alpha=3 proportionality dev {:.2e} (fails as expected)",
            d.hessian_rank, a3.proportional_dev
        ),
    ))
}

fn quad(h: &ExprMatrix, z: &[Expr]) -> Expr {
    let n = z.len();
    sum((0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| h.get(i, j) * &z[i] * &z[j]))
}

fn finsler_validation() -> Outcome {
    let mut ok = true;
    let (mut zdev, mut rel) = (0.0f64, 0.0f64);
    for n in [2, 3] {
        let g = Metric::warped(n);
        let (f1, f2) = (build_f1(&g)?, build_f2(&g)?);
        for f in [&f1, &f2] {
            let pts = metric_points(&g, f.space(), 0, 100);
            let v = finsler_validate(f, &pts, TOL)?;
            ok &= v.is_finsler;
            zdev = zdev.max(v.zermelo_dev);
        }
        let pts = metric_points(&g, f2.space(), 1, 100);
        let (h1, h2) = (angular_tensor(&f1), angular_tensor(&f2));
        let factor = 2.0 * (f2.expr() / f1.expr()).powi(3);
        let scaled = h1.map(|e| &factor * e);
        rel = rel.max(max_deviation(&pts, h2.entries(), scaled.entries())?.0);
        let z = build_z2(&g)?;
        let via_h1 = quad(&h1, &z) / f1.expr().powi(3);
        let via_h2 = (0.5 * quad(&h2, &z)).sqrt().sqrt();
        let target = std::slice::from_ref(f2.expr());
        rel = rel.max(max_deviation(&pts, &[via_h1], target)?.0);
        rel = rel.max(max_deviation(&pts, &[via_h2], target)?.0);
    }
    Ok((
        ok && rel < 1e-8,
        format!("zermelo dev {zdev:.2e}, rank n-1, h2/h1 and recovery rel err {rel:.2e}"),
    ))
}

fn metrizability() -> Outcome {
    let (mut base, mut shifted, mut broken) = (0.0f64, 0.0f64, f64::INFINITY);
    for g in [Metric::warped_plane(), Metric::round_sphere()] {
        let f1 = build_f1(&g)?;
        let s = geodesic_spray(&g)?;
        let pts = metric_points(&g, f1.space(), 0, 100);
        let m = metrizability_residual(&s, &f1, &pts, TOL)?;
        base = base.max(m.oneform_residual).max(m.two_form_residual);
        let p = Expr::x(1).sin() + Expr::y(1, 1) * Expr::y(1, 2);
        let m = metrizability_residual(&s.projective_shift(&p), &f1, &pts, TOL)?;
        shifted = shifted.max(m.two_form_residual);
        let pushed: Vec<Expr> = s.coefficients().iter().map(|c| c + 0.5).collect();
        let m = metrizability_residual(&Semispray::new(s.space(), pushed)?, &f1, &pts, TOL)?;
        broken = broken.min(m.two_form_residual);
    }
    Ok((
        base < TOL && shifted < TOL && broken >= 1e-3,
        format!("geodesic {base:.2e}, projective shift {shifted:.2e}, constant shift {broken:.2e}"),
    ))
}

fn energy_and_rank() -> Outcome {
    let mut ok = true;
    let mut worst = 0.0f64;
    let mut ranks = Vec::new();
    for n in [2, 3] {
        let g = Metric::warped(n);
        let f1 = build_f1(&g)?;
        let pts = metric_points(&g, f1.space(), 0, 100);
        let rep = finsler_energy_checks(&f1, &geodesic_spray(&g)?, &pts, TOL)?;
        ok &= rep.passed();
        worst = worst.max(rep.max_dev());
        let (l2, f2) = (build_l2(&g)?, build_f2(&g)?);
        let pts = metric_points(&g, f2.space(), 0, 100);
        let s = derive_semispray(&l2, &pts, TOL)?.semispray;
        let rep = finsler_energy_checks(&f2, &s, &pts, TOL)?;
        ok &= rep.passed();
        worst = worst.max(rep.max_dev());
        for p in pts.iter().take(20) {
            let (rl, rf) = (pc_two_form_rank(&l2, p)?, pc_two_form_rank(f2.as_lagrangian(), p)?);
            ok &= rl == 4 * n && rf == 4 * (n - 1);
            if !ranks.contains(&(n, rl, rf)) {
                ranks.push((n, rl, rf));
            }
        }
    }
    let ranks: Vec<String> = ranks.iter().map(|(n, a, b)| format!("n={n}: L2 {a}, F2 {b}")).collect();
    Ok((ok, format!("E_F and i_S theta_F - F max dev {worst:.2e}; ranks {}", ranks.join(", "))))
}

fn great_circle(p: &[f64], t: f64) -> [f64; 3] {
    let (th, ph, dth, dph) = (p[0], p[1], p[2], p[3]);
    let x = [th.sin() * ph.cos(), th.sin() * ph.sin(), th.cos()];
    let v = [
        th.cos() * ph.cos() * dth - th.sin() * ph.sin() * dph,
        th.cos() * ph.sin() * dth + th.sin() * ph.cos() * dph,
        -th.sin() * dth,
    ];
    let w = v.iter().map(|c| c * c).sum::<f64>().sqrt();
    std::array::from_fn(|i| x[i] * (w * t).cos() + v[i] / w * (w * t).sin())
}

fn sphere_error(steps: usize) -> Result<f64, jetcalc::Error> {
    let s = geodesic_spray(&Metric::round_sphere())?;
    let init = [1.2, 0.3, 0.4, -0.7];
    let tr = integrate(&s, &JetPoint::new(s.space(), init.to_vec())?, 0.0, 1.0, steps)?;
    let mut worst = 0.0f64;
    for (t, st) in tr.times.iter().zip(&tr.states) {
        let (th, ph) = (st.get(CoordId::new(0, 1)), st.get(CoordId::new(0, 2)));
        let a = [th.sin() * ph.cos(), th.sin() * ph.sin(), th.cos()];
        let b = great_circle(&init, *t);
        worst = worst.max((0..3).map(|i| (a[i] - b[i]).powi(2)).sum::<f64>().sqrt());
    }
    Ok(worst)
}

fn integrator() -> Outcome {
    // x(t) = x0 + y1 t + y2 t² + y3 t³ in the normalized coordinates
    let l2 = build_l2(&Metric::euclidean(2)?)?;
    let pts = points(l2.space(), 0, 4, &[]);
    let s = derive_semispray(&l2, &pts, TOL)?.semispray;
    let c = [0.3, -0.2, 0.7, 0.4, -0.5, 0.9, 0.25, -0.6];
    let tr = integrate(&s, &JetPoint::new(s.space(), c.to_vec())?, 0.0, 1.0, 1000)?;
    let mut cubic = 0.0f64;
    for (t, st) in tr.times.iter().zip(&tr.states) {
        for i in 0..2 {
            let a = [c[i], c[2 + i], c[4 + i], c[6 + i]];
            let exact = [
                a[0] + a[1] * t + a[2] * t * t + a[3] * t * t * t,
                a[1] + 2.0 * a[2] * t + 3.0 * a[3] * t * t,
                a[2] + 3.0 * a[3] * t,
                a[3],
            ];
            for (o, e) in exact.iter().enumerate() {
                cubic = cubic.max((st.coords()[2 * o + i] - e).abs());
            }
        }
    }
    let sphere = sphere_error(10_000)?;
    let order = (sphere_error(10)? / sphere_error(20)?).log2();
    Ok((
        cubic < 1e-10 && sphere < 1e-6 && order >= 3.5,
        format!("cubic err {cubic:.2e}, great circle err {sphere:.2e}, observed order {order:.2}"),
    ))
}

fn run_cli(dir: &Path, args: &[&str]) -> (Vec<u8>, Vec<u8>) {
    let out = dir.join("out");
    let _ = std::fs::remove_file(&out);
    let o = Command::new(env!("CARGO_BIN_EXE_jetcalc"))
        .args(args)
        .arg("--out")
        .arg(&out)
        .current_dir(dir)
        .output()
        .expect("run jetcalc");
    (o.stdout, std::fs::read(&out).unwrap_or_default())
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().expect("temp dir");
    let write = |name: &str, text: &str| std::fs::write(dir.path().join(name), text).unwrap();
    write("sphere.json", r#"{"n":2,"metric":[["1","0"],["0","sin(x1)^2"]],"builder":"L1","samples":30}"#);
    write("f2.json", r#"{"n":2,"metric":[["1","0"],["0","1+x1^2"]],"builder":"F2","samples":30}"#);
    write("fn.json", r#"{"n":2,"r":3,"samples":20}"#);
    write("init.json", "[1.2, 0.3, 0.4, -0.7]");
    let runs: [&[&str]; 6] = [
        &["derive", "--spec", "sphere.json"],
        &["check", "metrizable", "--spec", "sphere.json"],
        &["check", "finsler", "--spec", "f2.json"],
        &["check", "homogeneous", "--spec", "f2.json", "--seed", "7"],
        &["verify-identities", "--spec", "fn.json"],
        &["integrate", "--spec", "sphere.json", "--init", "init.json", "--steps", "200"],
    ];
    let mut same = 0;
    for args in runs {
        let first = run_cli(dir.path(), args);
        let second = run_cli(dir.path(), args);
        if !first.0.is_empty() && first == second {
            same += 1;
        }
    }
    Ok((same == runs.len(), format!("{same}/{} commands byte-identical across runs", runs.len())))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("fn-identities", fn_identities),
        ("pc-reconstruction", pc_reconstruction),
        ("inverse-problem", inverse_problem),
        ("biharmonic", biharmonic),
        ("finsler-validation", finsler_validation),
        ("metrizability", metrizability),
        ("energy-and-rank", energy_and_rank),
        ("integrator", integrator),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let (ok, detail) = match f() {
            Ok(v) => v,
            Err(e) => (false, format!("error: {e}")),
        };
        failed += usize::from(!ok);
        println!("[{}] {}. {name}: {detail}", if ok { "PASS" } else { "FAIL" }, i + 1);
    }
    println!("acceptance: {}/{} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
