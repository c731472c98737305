use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use shark_core::flow::reference::TaylorReference;
use shark_core::flow::{poincare_map, Doubleton, OdeSolver, PolyField, Section, Term};
use shark_core::interval::{IVector, Interval};

fn linear(a: &[f64], d: usize) -> PolyField {
    let comps = (0..d)
        .map(|i| {
            (0..d)
                .filter(|&j| a[i * d + j] != 0.0)
                .map(|j| {
                    let mut p = vec![0; d];
                    p[j] = 1;
                    Term { coeff: Interval::point(a[i * d + j]), powers: p }
                })
                .collect()
        })
        .collect();
    PolyField::new(d, comps).unwrap()
}

fn rossler() -> PolyField {
    PolyField::rossler(Interval::point(5.25), Interval::point(0.2))
}

#[test]
fn harmonic_return_time_is_two_pi() {
    // x' = y, y' = -x from (0, 1) returns to x = 0 with x' > 0 after 2π
    let s = OdeSolver::new(linear(&[0.0, 1.0, -1.0, 0.0], 2)).unwrap();
    let x = Doubleton::from_box(&IVector::from_points(&[0.0, 1.0]));
    let img = poincare_map(&s, &Section::new(0, 1.0), &x, 10.0).unwrap();
    assert!(img.return_time.contains(2.0 * std::f64::consts::PI), "{:?}", img.return_time);
    assert!(img.return_time.width() <= 1e-8, "{:e}", img.return_time.width());
    assert!(img.hull()[0].contains(1.0));
}

#[test]
fn exponential_at_one_tenth() {
    let s = OdeSolver::new(linear(&[1.0], 1)).unwrap();
    let y = s.advance(&Doubleton::from_box(&IVector::from_points(&[1.0])), 0.1).unwrap().hull();
    assert!(y[0].contains(0.1f64.exp()));
    assert!(y[0].width() <= 1e-10, "{:e}", y[0].width());
}

#[test]
fn rossler_enclosures_contain_reference_orbits() {
    let f = rossler();
    let s = OdeSolver::new(f.clone()).unwrap();
    let reference = TaylorReference::new(&f, 24, 0.005);
    let mut rng = StdRng::seed_from_u64(7);
    let mut failures = Vec::new();
    for k in 0..100 {
        let y: f64 = rng.gen_range(-9.5..-3.5);
        let z: f64 = rng.gen_range(0.02..0.04);
        let t: f64 = rng.gen_range(0.5..3.0);
        let r = 1e-9;
        let x = IVector(vec![Interval::new(-r, r), Interval::new(y - r, y + r), Interval::new(z - r, z + r)]);
        let out = s.advance(&Doubleton::from_box(&x), t).unwrap().hull();
        let exact = reference.flow(&[0.0, y, z], t);
        if !(0..3).all(|i| out[i].contains(exact[i])) {
            failures.push((k, out, exact));
        }
    }
    assert!(failures.is_empty(), "{failures:?}");
}

#[test]
fn rossler_return_map_contains_reference_return() {
    let f = rossler();
    let s = OdeSolver::new(f.clone()).unwrap();
    let reference = TaylorReference::new(&f, 24, 0.005);
    for y in [-9.0, -7.5, -6.38401, -5.0, -3.6] {
        let x = Doubleton::from_box(&IVector(vec![Interval::ZERO, Interval::new(y - 1e-8, y + 1e-8), Interval::new(0.0327 - 1e-8, 0.0327 + 1e-8)]));
        let img = poincare_map(&s, &Section::new(0, 1.0), &x, 20.0).unwrap();
        let (t, p) = reference.first_return(&[0.0, y, 0.0327], 0, 1.0, 20.0).unwrap();
        assert!(img.return_time.contains(t), "{y}: {:?} vs {t}", img.return_time);
        let h = img.hull();
        assert!(h[0].contains(p[1]) && h[1].contains(p[2]), "{y}: {h:?} vs {p:?}");
        assert!(img.transversality.lo() > 0.0);
    }
}
