use s2s2::ambient::AmbientIsometry;
use s2s2::catalog::{FamilyKind, FamilySpec};
use s2s2::shape::shape_at;
use s2s2::SplitMix64;

fn sorted(mut l: [f64; 3]) -> [f64; 3] {
    l.sort_by(f64::total_cmp);
    l
}

#[test]
fn invariants_under_random_block_isometries() {
    let kinds = [
        FamilyKind::S1rxS2 { r: 0.6 },
        FamilyKind::Mt { t: 0.5 },
        FamilyKind::Mt { t: -0.7 },
        FamilyKind::Mab,
        FamilyKind::MhatAb,
    ];
    let mut rng = SplitMix64::new(51);
    let mut swaps = 0;
    for _ in 0..20 {
        let iso = AmbientIsometry::<f64>::random(&mut rng);
        swaps += iso.blocks().2 as usize;
        for kind in kinds {
            let f = FamilySpec::new(kind).unwrap();
            let moved = f.chart.transformed(iso);
            let u = f.chart.sample(&mut rng, 0.05);
            let a = shape_at(&f.chart, &u).unwrap();
            let b = shape_at(&moved, &u).unwrap();
            let label = f.chart.label();
            assert!((a.h - b.h).abs() < 1e-8, "{label} H");
            assert!((a.rho - b.rho).abs() < 1e-8, "{label} rho");
            assert!((a.k - b.k).abs() < 1e-8, "{label} K");
            assert!((a.c.abs() - b.c.abs()).abs() < 1e-8, "{label} C");
            let (la, lb) = (sorted(a.lambdas), sorted(b.lambdas));
            for i in 0..3 {
                assert!((la[i] - lb[i]).abs() < 1e-8, "{label} λ{i}");
            }
        }
    }
    assert!(swaps > 0);
}

#[test]
fn factor_swap_flips_c() {
    let f = FamilySpec::<f64>::new(FamilyKind::S1rxS2 { r: 0.4 }).unwrap();
    let moved = f.chart.transformed(AmbientIsometry::factor_swap());
    let u = f.chart.center();
    let a = shape_at(&f.chart, &u).unwrap();
    let b = shape_at(&moved, &u).unwrap();
    assert!((a.c - 1.0).abs() < 1e-9 && (b.c + 1.0).abs() < 1e-9);
    assert!((a.h - b.h).abs() < 1e-8);
}
