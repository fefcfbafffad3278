use s2s2::ambient::*;
use s2s2::SplitMix64;

#[test]
fn isoparametric_functions_on_a_thousand_points() {
    let mut rng = SplitMix64::new(61);
    for _ in 0..1000 {
        let pt = ProductPoint::<f64>::random(&mut rng);
        let a = SpherePoint::random(&mut rng);
        let f = iso_f(&pt);
        let gl = grad_laplacian(iso_f, &pt, ISO_STEP);
        assert!((gl.grad_sq - 2.0 * (1.0 - f * f)).abs() < 1e-4);
        assert!((gl.laplacian + 4.0 * f).abs() < 1e-4);
        let g = iso_g(&pt, &a);
        let gl = grad_laplacian(|x| iso_g(x, &a), &pt, ISO_STEP);
        assert!((gl.grad_sq - (1.0 - g * g)).abs() < 1e-4);
        assert!((gl.laplacian + 2.0 * g).abs() < 1e-4);
    }
}

#[test]
fn isometries_commute_with_the_structures() {
    let mut rng = SplitMix64::new(62);
    for _ in 0..50 {
        let iso = AmbientIsometry::<f64>::random(&mut rng);
        let pt = ProductPoint::random(&mut rng);
        let v = ProductTangent::random(pt, &mut rng).to_vec6();
        let (moved, dv) = (iso.apply(&pt), iso.push_vec6(&v));
        // P commutes up to the swap sign
        let pv = iso.push_vec6(&p_vec6(&v));
        let sign = if iso.blocks().2 { -1.0 } else { 1.0 };
        assert!((pv - p_vec6(&dv) * sign).norm() < 1e-12);
        let (a, _, _) = iso.blocks();
        let diagonal = AmbientIsometry::new(*a, *a, false).unwrap();
        assert!((iso_f(&diagonal.apply(&pt)) - iso_f(&pt)).abs() < 1e-12);
        assert!((moved.to_vec6().norm() - pt.to_vec6().norm()).abs() < 1e-12);
        assert!((dv.norm() - v.norm()).abs() < 1e-12);
    }
}
