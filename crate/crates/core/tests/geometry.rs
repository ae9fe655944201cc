use jetcalc::finsler::*;
use jetcalc::jet::{interior2, lie_bracket, liouville};
use jetcalc::sample::{max_deviation, max_residual, Sampler};
use jetcalc::variational::*;
use jetcalc::worked::*;
use jetcalc::{CoordId, Expr, JetPoint, JetSpace, Semispray};

fn regular(space: JetSpace, seed: u64, count: usize, g: &Metric) -> Vec<JetPoint> {
    Sampler::new(space, seed)
        .regular()
        .with_filters(&[g.det_filter(0.05)])
        .points(count)
        .unwrap()
}

#[test]
fn derived_geodesic_sprays() {
    for g in [Metric::warped_plane(), Metric::round_sphere()] {
        let l1 = build_l1(&g).unwrap();
        let pts = regular(l1.space(), 0, 40, &g);
        let d = derive_semispray(&l1, &pts, 1e-9).unwrap();
        let gs = geodesic_spray(&g).unwrap();
        let (dev, _) = max_deviation(&pts, d.semispray.coefficients(), gs.coefficients()).unwrap();
        assert!(dev < 1e-10, "{dev}");
        // the derived semispray solves the Euler-Lagrange equations
        let el = el_residual(&l1, &d.semispray).unwrap();
        assert!(max_residual(&pts, el.form().components()).unwrap().0 < 1e-10);
    }
}

#[test]
fn flat_biharmonic_semispray_vanishes() {
    let g = Metric::euclidean(2).unwrap();
    let l2 = build_l2(&g).unwrap();
    let pts = regular(l2.space(), 1, 10, &g);
    let d = derive_semispray(&l2, &pts, 1e-9).unwrap();
    assert_eq!(d.semispray.space(), JetSpace::new(2, 3).unwrap());
    let (dev, _) = max_residual(&pts, d.semispray.coefficients()).unwrap();
    assert!(dev < 1e-14);
}

#[test]
fn biharmonic_semispray_is_one_homogeneous_only() {
    let g = Metric::round_sphere();
    let l2 = build_l2(&g).unwrap();
    let pts = regular(l2.space(), 2, 40, &g);
    let d = derive_semispray(&l2, &pts, 1e-9).unwrap();
    assert_eq!(d.hessian_rank, 2);
    let sv = d.semispray.to_vector_field();
    let r1 = lie_bracket(&liouville(l2.space(), 1).unwrap(), &sv).unwrap().sub(&sv).unwrap();
    assert!(max_residual(&pts, r1.components()).unwrap().0 < 1e-9);
    let rep = semispray_homogeneity_check(&d.semispray, &pts, 1e-9).unwrap();
    assert!(!rep.alphas[2].holds && !rep.homogeneous && !rep.spray);
    assert!(!is_spray(&d.semispray, &pts, 1e-9).unwrap());
}

#[test]
fn f2_recovery_formulas() {
    for n in [2, 3] {
        let g = Metric::warped(n);
        let f1 = build_f1(&g).unwrap();
        let f2 = build_f2(&g).unwrap();
        let pts = Sampler::new(f2.space(), 3)
            .regular()
            .with_filters(&[f2_filter(&g, 0.05).unwrap()])
            .points(40)
            .unwrap();
        let z = build_z2(&g).unwrap();
        let h1 = angular_tensor(&f1);
        let h2 = angular_tensor(&f2);
        let quad = |h: &jetcalc::linalg::ExprMatrix| {
            jetcalc::expr::sum((0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| h.get(i, j) * &z[i] * &z[j]))
        };
        let via_h1 = quad(&h1) / f1.expr().powi(3);
        let via_h2 = (0.5 * quad(&h2)).sqrt().sqrt();
        let (d1, _) = max_deviation(&pts, &[via_h1], std::slice::from_ref(f2.expr())).unwrap();
        let (d2, _) = max_deviation(&pts, &[via_h2], std::slice::from_ref(f2.expr())).unwrap();
        assert!(d1 < 1e-8 && d2 < 1e-8, "{d1} {d2}");
        let forms = finsler_forms(&f2).unwrap();
        assert!(homogeneous_form_check(&forms.theta, &pts, 1e-8).unwrap().passed());
        let ranks: Vec<usize> = pts.iter().take(10).map(|p| pc_two_form_rank(f2.as_lagrangian(), p).unwrap()).collect();
        assert!(ranks.iter().all(|&r| r == 4 * (n - 1)), "{ranks:?}");
        let (one, two) = pointwise_metrization(&f2, &pts[..10]).unwrap();
        assert!(one < 1e-9 && two < 1e-9, "{one} {two}");
    }
}

#[test]
fn l2_theta_is_not_homogeneous() {
    let g = Metric::warped_plane();
    let l2 = build_l2(&g).unwrap();
    let pts = regular(l2.space(), 4, 20, &g);
    let theta = poincare_cartan(&l2).unwrap().into_form();
    let rep = homogeneous_form_check(&theta, &pts, 1e-9).unwrap();
    assert!(!rep.item("lie_c1_theta").unwrap().passed);
    let lie = jetcalc::jet::lie_derivative_oneform(&liouville(l2.space(), 1).unwrap(), &theta).unwrap();
    let three = theta.scale(&Expr::constant(3.0));
    assert!(max_deviation(&pts, lie.components(), three.components()).unwrap().0 < 1e-10);
}

#[test]
fn geodesic_spray_metrizes_f1_projectively() {
    let g = Metric::round_sphere();
    let f1 = build_f1(&g).unwrap();
    let s = geodesic_spray(&g).unwrap();
    let pts = regular(f1.space(), 5, 40, &g);
    let m = metrizability_residual(&s, &f1, &pts, 1e-9).unwrap();
    assert!(m.oneform_residual < 1e-9 && m.two_form_residual < 1e-9, "{m:?}");
    let shifted = s.projective_shift(&(Expr::x(1).cos() + Expr::y(1, 2).square()));
    let m2 = metrizability_residual(&shifted, &f1, &pts, 1e-9).unwrap();
    assert!(m2.two_form_residual < 1e-9, "{m2:?}");
    let pushed = Semispray::new(
        s.space(),
        vec![s.coefficients()[0].clone() + 1.0, s.coefficients()[1].clone()],
    )
    .unwrap();
    let m3 = metrizability_residual(&pushed, &f1, &pts, 1e-9).unwrap();
    assert!(m3.two_form_residual >= 1e-3);
    assert!(finsler_energy_checks(&f1, &s, &pts, 1e-9).unwrap().passed());
    // i_Sω_F vanishes exactly when 𝓛_Sθ_F = dF; spot-check one component
    let forms = finsler_forms(&f1).unwrap();
    let w = interior2(&s.to_vector_field(), &forms.omega).unwrap();
    assert!(max_residual(&pts, w.components()).unwrap().0 < 1e-9);
}

/// Great circle through the embedded point with the embedded velocity.
fn great_circle(theta: f64, phi: f64, dtheta: f64, dphi: f64, t: f64) -> [f64; 3] {
    let p = [theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()];
    let v = [
        theta.cos() * phi.cos() * dtheta - theta.sin() * phi.sin() * dphi,
        theta.cos() * phi.sin() * dtheta + theta.sin() * phi.cos() * dphi,
        -theta.sin() * dtheta,
    ];
    let speed = v.iter().map(|c| c * c).sum::<f64>().sqrt();
    std::array::from_fn(|i| p[i] * (speed * t).cos() + v[i] / speed * (speed * t).sin())
}

fn embed(p: &JetPoint) -> [f64; 3] {
    let (th, ph) = (p.get(CoordId::new(0, 1)), p.get(CoordId::new(0, 2)));
    [th.sin() * ph.cos(), th.sin() * ph.sin(), th.cos()]
}

fn sphere_error(steps: usize) -> f64 {
    let s = geodesic_spray(&Metric::round_sphere()).unwrap();
    let p0 = JetPoint::new(s.space(), vec![1.2, 0.3, 0.4, -0.7]).unwrap();
    let tr = integrate(&s, &p0, 0.0, 1.0, steps).unwrap();
    tr.times
        .iter()
        .zip(&tr.states)
        .map(|(t, st)| {
            let (a, b) = (embed(st), great_circle(1.2, 0.3, 0.4, -0.7, *t));
            (0..3).map(|i| (a[i] - b[i]).powi(2)).sum::<f64>().sqrt()
        })
        .fold(0.0, f64::max)
}

#[test]
fn sphere_geodesics_follow_great_circles() {
    assert!(sphere_error(1000) < 1e-6);
    let (coarse, fine) = (sphere_error(10), sphere_error(20));
    let order = (coarse / fine).log2();
    assert!(order >= 3.5, "observed order {order}");
}

#[test]
fn energy_is_conserved_along_geodesics() {
    let g = Metric::round_sphere();
    let l1 = build_l1(&g).unwrap();
    let s = geodesic_spray(&g).unwrap();
    let e = energy(&l1).unwrap();
    let p0 = JetPoint::new(s.space(), vec![1.2, 0.3, 0.4, -0.7]).unwrap();
    let tr = integrate(&s, &p0, 0.0, 1.0, 200).unwrap();
    let e0 = e.eval(&p0).unwrap();
    let drift = tr.states.iter().map(|p| (e.eval(p).unwrap() - e0).abs()).fold(0.0, f64::max);
    assert!(drift < 1e-9, "{drift}");
}
