use s2s2::ambient::{j1_vec6, j2_vec6, AmbientIsometry};
use s2s2::catalog::*;
use s2s2::jets::{jet2, tangency_defect, JetSteps};
use s2s2::shape::{gauss_sectional, ricci, shape_at};
use s2s2::{GeomError, Mat3, SplitMix64, Vec3};

const INSET: f64 = 0.02;

fn families() -> Vec<FamilySpec<f64>> {
    [
        FamilyKind::S1rxS2 { r: 0.3 },
        FamilyKind::S1rxS2 { r: 0.6 },
        FamilyKind::S1rxS2 { r: 1.0 },
        FamilyKind::Mt { t: -0.9 },
        FamilyKind::Mt { t: 0.0 },
        FamilyKind::Mt { t: 0.5 },
        FamilyKind::Mab,
        FamilyKind::MhatAb,
    ]
    .into_iter()
    .map(|k| FamilySpec::new(k).unwrap())
    .collect()
}

#[test]
fn defining_equations_hold_on_a_grid() {
    for f in families() {
        let d = f.chart.domain();
        let n = 12;
        for i in 0..=n {
            for j in 0..=n {
                for k in 0..=n {
                    let at = |m: usize, (lo, hi): (f64, f64)| lo + (hi - lo) * m as f64 / n as f64;
                    let u = [at(i, d[0]), at(j, d[1]), at(k, d[2])];
                    let pt = f.chart.eval(&u).unwrap();
                    assert!(f.defining_residual(&pt) < 1e-10, "{} at {:?}", f.chart.label(), u);
                }
            }
        }
    }
}

#[test]
fn partials_are_tangent_to_each_factor() {
    let mut rng = SplitMix64::new(21);
    for f in families() {
        for _ in 0..20 {
            let u = f.chart.sample(&mut rng, INSET);
            let jet = jet2(&f.chart, &u, JetSteps::default()).unwrap();
            assert!(tangency_defect(&jet.pos, &jet.d1) < 1e-8);
        }
    }
}

#[test]
fn numerical_shape_matches_closed_forms() {
    let mut rng = SplitMix64::new(22);
    for f in families() {
        for _ in 0..25 {
            let u = f.chart.sample(&mut rng, INSET);
            let sd = shape_at(&f.chart, &u).unwrap();
            let o = f.oracle(&sd.point);
            let tol = 1e-6 * (1.0 + o.lambdas[0].abs().max(o.lambdas[2].abs()));
            for i in 0..3 {
                assert!((sd.lambdas[i] - o.lambdas[i]).abs() < tol, "{} λ{i}", f.chart.label());
            }
            assert!((sd.h - o.h).abs() < tol);
            assert!((sd.rho - o.rho).abs() < 10.0 * tol);
            assert!((sd.k - o.k).abs() < tol);
            assert!((sd.c - o.c).abs() < 1e-9);
            let n_ref = f.reference_normal(&sd.point);
            assert!((sd.normal - n_ref).norm() < 1e-8, "{} normal", f.chart.label());
        }
    }
}

#[test]
fn oracle_values_satisfy_characteristic_polynomial() {
    let mut rng = SplitMix64::new(23);
    for f in families() {
        let u = f.chart.sample(&mut rng, INSET);
        let pt = f.chart.eval(&u).unwrap();
        assert!(f.oracle(&pt).char_poly_residual() < 1e-12);
    }
}

#[test]
fn sample_oracle_values() {
    let pt = FamilySpec::<f64>::new(FamilyKind::Mt { t: 0.9 }).unwrap().chart.eval(&[0.0, 0.0, 0.0]).unwrap();
    let o = oracle(&FamilyKind::<f64>::Mt { t: 0.9 }, &pt);
    assert!((o.lambdas[0] - 3.082207).abs() < 1e-6);
    assert!((o.lambdas[2] + 0.162221).abs() < 1e-6);
    for t in [-0.7, 0.0, 0.3, 0.95] {
        let o = oracle(&FamilyKind::<f64>::Mt { t }, &pt);
        assert!((o.lambdas[0] * o.lambdas[2] + 0.5).abs() < 1e-14);
    }
    let o = oracle(&FamilyKind::<f64>::S1rxS2 { r: 0.3 }, &pt);
    // √0.91 / (3 · 0.3)
    assert!((o.h - 1.0599324460).abs() < 1e-9);
    let o = oracle(&FamilyKind::<f64>::S1rxS2 { r: 0.6 }, &pt);
    assert!((o.lambdas[0] - 4.0 / 3.0).abs() < 1e-15);
}

#[test]
fn mt_second_fundamental_form_norm() {
    let f = FamilySpec::<f64>::new(FamilyKind::Mt { t: 0.5 }).unwrap();
    let sd = shape_at(&f.chart, &[0.4, -0.3, 1.2]).unwrap();
    assert!((sd.sigma_norm_sq().sqrt() - 1.290994).abs() < 1e-6);
}

#[test]
fn mt_shape_operator_closed_form() {
    let mut rng = SplitMix64::new(24);
    for t in [-0.5, 0.2, 0.8] {
        let f = FamilySpec::<f64>::new(FamilyKind::Mt { t }).unwrap();
        for _ in 0..10 {
            let u = f.chart.sample(&mut rng, INSET);
            let sd = shape_at(&f.chart, &u).unwrap();
            for a in 0..3 {
                let av = mt_shape_operator(t, &sd.point, &sd.frame[a]);
                let expect = sd.ambient(&sd.sigma.row(a));
                assert!((av - expect).norm() < 1e-7);
            }
        }
    }
}

#[test]
fn mt_sectional_and_ricci_values() {
    let mut rng = SplitMix64::new(25);
    let f = FamilySpec::<f64>::new(FamilyKind::Mt { t: 0.5 }).unwrap();
    for _ in 0..20 {
        let u = f.chart.sample(&mut rng, INSET);
        let sd = shape_at(&f.chart, &u).unwrap();
        let j1 = j1_vec6(&sd.point, &sd.normal);
        let j2 = j2_vec6(&sd.point, &sd.normal);
        let x = sd.x;
        assert!((gauss_sectional(&sd, &j1, &j2).unwrap() + 0.5).abs() < 1e-6);
        assert!((gauss_sectional(&sd, &j1, &x).unwrap() - 0.5).abs() < 1e-6);
        assert!((gauss_sectional(&sd, &j2, &x).unwrap() - 0.5).abs() < 1e-6);
        let comps = Vec3::new(rng.normal(), rng.normal(), rng.normal());
        let v = sd.ambient(&comps.scale(1.0 / comps.norm()));
        assert!((ricci(&sd, &v).unwrap() - v.dot(&x).powi(2)).abs() < 1e-6);
    }
}

#[test]
fn mab_scalar_curvature_at_equator_is_two() {
    let f = FamilySpec::<f64>::new(FamilyKind::Mab).unwrap();
    let sd = shape_at(&f.chart, &[0.0, 0.7, -1.1]).unwrap();
    assert!(sd.point.p.coords()[2].abs() < 1e-15);
    assert!((sd.rho - 2.0).abs() < 1e-6);
    assert!(sd.h.abs() < 1e-6 && sd.k.abs() < 1e-8);
}

#[test]
fn mhat_kernel_contains_x_and_curvature_is_half() {
    let mut rng = SplitMix64::new(26);
    let f = FamilySpec::<f64>::new(FamilyKind::MhatAb).unwrap();
    for _ in 0..20 {
        let u = f.chart.sample(&mut rng, INSET);
        let sd = shape_at(&f.chart, &u).unwrap();
        let ax = sd.sigma.mul_vec(&sd.b);
        assert!(ax.norm() < 1e-6);
        let a = Vec3::new(rng.normal(), rng.normal(), rng.normal());
        let b = Vec3::new(rng.normal(), rng.normal(), rng.normal());
        let e1 = a.scale(1.0 / a.norm());
        let b = b - e1.scale(e1.dot(&b));
        let e2 = b.scale(1.0 / b.norm());
        let k = gauss_sectional(&sd, &sd.ambient(&e1), &sd.ambient(&e2)).unwrap();
        assert!((k - 0.5).abs() < 1e-5);
    }
}

#[test]
fn mt_and_minus_t_are_congruent() {
    let mut rng = SplitMix64::new(27);
    let flip = AmbientIsometry::new(Mat3::identity(), Mat3::identity().scale(-1.0), false).unwrap();
    for t in [0.3, 0.7] {
        let a = FamilySpec::<f64>::new(FamilyKind::Mt { t }).unwrap();
        let b = FamilySpec::<f64>::new(FamilyKind::Mt { t: -t }).unwrap().chart.transformed(flip);
        for _ in 0..5 {
            let u = a.chart.sample(&mut rng, INSET);
            let pb = b.eval(&u).unwrap();
            assert!((pb.p.coords().dot(&pb.q.coords()) - t).abs() < 1e-12);
            let mut la = shape_at(&a.chart, &u).unwrap().lambdas.map(f64::abs);
            let mut lb = shape_at(&b, &u).unwrap().lambdas.map(f64::abs);
            la.sort_by(f64::total_cmp);
            lb.sort_by(f64::total_cmp);
            for i in 0..3 {
                assert!((la[i] - lb[i]).abs() < 1e-7);
            }
        }
    }
}

#[test]
fn parameters_out_of_range_are_rejected() {
    for t in [-1.0, 1.0, 1.5, f64::NAN] {
        assert!(matches!(FamilySpec::<f64>::new(FamilyKind::Mt { t }), Err(GeomError::Parameter(_))));
    }
    for r in [0.0, -0.2, 1.01] {
        assert!(matches!(FamilySpec::<f64>::new(FamilyKind::S1rxS2 { r }), Err(GeomError::Parameter(_))));
    }
}

#[test]
fn singular_loci_are_refused() {
    let mab = chart_mab::<f64>();
    // sin(t/√2) = 1 at the singular points
    let t = std::f64::consts::FRAC_PI_2 * std::f64::consts::SQRT_2;
    assert!(matches!(mab.eval(&[t, 0.0, 0.0]), Err(GeomError::SingularLocus(_))));
    let mhat = chart_mhat_ab::<f64>();
    let t = std::f64::consts::FRAC_PI_4 * std::f64::consts::SQRT_2;
    assert!(matches!(mhat.eval(&[t, 0.0, 0.0]), Err(GeomError::SingularLocus(_))));
    let mt = chart_mt::<f64>(0.2).unwrap();
    assert!(matches!(mt.eval(&[0.0, 1.5, 0.0]), Err(GeomError::SingularLocus(_))));
}

#[test]
fn degenerate_chart_is_reported_singular() {
    let chart = degenerate_chart::<f64>();
    let err = shape_at(&chart, &[0.1, 0.2, 0.3]).unwrap_err();
    assert!(matches!(err, GeomError::SingularChart { .. }));
}

#[test]
fn totally_geodesic_product_has_vanishing_second_form() {
    let chart = umbilic_chart::<f64>();
    let sd = shape_at(&chart, &[0.5, 0.1, -0.4]).unwrap();
    assert!(sd.sigma.max_abs() < 1e-8);
    assert_eq!(sd.eigen.multiplicities(), vec![3]);
}
