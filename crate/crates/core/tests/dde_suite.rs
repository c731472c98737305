use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use shark_core::dde::reference::{integrate, InitialJet};
use shark_core::dde::{DdeSolver, FSet, GridSpec};
use shark_core::flow::{Doubleton, OdeSolver, PolyField, Term};
use shark_core::interval::{IVector, Interval};

fn rossler() -> PolyField {
    PolyField::rossler(Interval::point(5.25), Interval::point(0.2))
}

fn desk(tau: f64) -> GridSpec {
    GridSpec::new(8, 2, tau).unwrap()
}

#[test]
fn negative_feedback_head_vanishes_at_one() {
    // u'(t) = -u(t - 1) with u = 1 on [-1, 0] gives u(t) = 1 - t on [0, 1]
    let f = PolyField::new(1, vec![vec![]]).unwrap();
    let g = PolyField::new(1, vec![vec![Term { coeff: -Interval::ONE, powers: vec![1] }]]).unwrap();
    let grid = desk(1.0);
    let solver = DdeSolver::new(&f, &g, Interval::ONE, grid).unwrap();
    let x = FSet::constant(grid, &IVector(vec![Interval::ONE])).unwrap();
    let y = solver.advance(&x, 8).unwrap();
    let head = y.head_hull()[0];
    assert!(head.contains(0.0) && head.width() <= 1e-6, "{head:?}");
}

#[test]
fn unperturbed_rossler_agrees_with_the_ode() {
    let f = rossler();
    let grid = desk(0.5);
    let solver = DdeSolver::new(&f, &f, Interval::ZERO, grid).unwrap();
    let ode = OdeSolver::new(f.clone()).unwrap();
    // a box the size of one proof piece
    let x0 = IVector(vec![Interval::ZERO, Interval::new(-6.38 - 3.5e-3, -6.38 + 3.5e-3), Interval::new(0.0327 - 4e-4, 0.0327 + 4e-4)]);
    let mut seg = FSet::constant(grid, &x0).unwrap();
    let mut dbl = Doubleton::from_box(&x0);
    for k in 1..=grid.p {
        seg = solver.advance(&seg, 1).unwrap();
        dbl = ode.advance(&dbl, grid.h).unwrap();
        let (a, b) = (seg.head_hull(), dbl.hull());
        for i in 0..3 {
            assert!(a[i].intersect(&b[i]).is_some(), "step {k}, coordinate {i}: {:?} vs {:?}", a[i], b[i]);
            let (wa, wb) = (a[i].width(), b[i].width());
            assert!(wa <= 10.0 * wb && wb <= 10.0 * wa, "step {k}, coordinate {i}: widths {wa:e} vs {wb:e}");
        }
    }
}

#[test]
fn perturbed_rossler_contains_reference_segments() {
    let f = rossler();
    let eps = 1e-4;
    let field = PolyField::with_delay(&f, &f, Interval::point(eps)).unwrap();
    let grid = desk(0.5);
    let solver = DdeSolver::new(&f, &f, Interval::point(eps), grid).unwrap();
    let mut rng = StdRng::seed_from_u64(11);
    let mut failures = Vec::new();
    for k in 0..20 {
        let p = [rng.gen_range(-0.5..0.5), rng.gen_range(-9.0..-4.0), rng.gen_range(0.02..0.05)];
        let r = 1e-6;
        let x0: IVector = p.iter().map(|v| Interval::new(v - r, v + r)).collect();
        let seg0 = FSet::constant(grid, &x0).unwrap();
        let pv = p.to_vec();
        let init = move |_: f64, order: usize| {
            let mut j = vec![vec![0.0; 3]; order + 1];
            j[0] = pv.clone();
            j
        };
        let init: &InitialJet = &init;
        let steps = 2 * grid.p;
        let traj = integrate(&field, grid.tau, 64 * grid.p, init, steps as f64 * grid.h + 0.01);
        let mut seg = seg0;
        for s in 1..=steps {
            seg = solver.advance(&seg, 1).unwrap();
            let want = traj.value(s as f64 * grid.h);
            let got = seg.head_hull();
            if !(0..3).all(|i| got[i].contains(want[i])) {
                failures.push((k, s, got.clone(), want));
                break;
            }
        }
    }
    assert!(failures.is_empty(), "{failures:?}");
}
