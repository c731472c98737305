use std::cmp::Ordering;

use shark_core::interval::Interval;
use shark_core::sharkovskii::{build_model_map, find_nonrepeating_loop, least_period, locate_periodic_point, sharkovskii_compare, verify_loop, OrbitPattern};

/// The order read row by row: odd numbers > 1 times 2^k for k = 0, 1, ...,
/// then the powers of two in decreasing order.
fn row_major(limit: u64) -> Vec<u64> {
    let mut rows = Vec::new();
    for k in 0..7 {
        let mut row: Vec<u64> = (3..=limit).step_by(2).map(|o| o << k).filter(|&v| v <= limit).collect();
        row.sort();
        rows.extend(row);
    }
    let mut powers: Vec<u64> = (0..7).map(|k| 1u64 << k).filter(|&v| v <= limit).collect();
    powers.reverse();
    rows.extend(powers);
    rows
}

#[test]
fn order_on_one_to_sixty_four() {
    let mut v: Vec<u64> = (1..=64).collect();
    v.sort_by(|&a, &b| sharkovskii_compare(a, b).unwrap());
    assert_eq!(v, row_major(64));
}

#[test]
fn order_axioms_up_to_two_hundred() {
    let n = 200u64;
    let cmp = |a, b| sharkovskii_compare(a, b).unwrap();
    for a in 1..=n {
        assert_eq!(cmp(a, a), Ordering::Equal);
        for b in 1..=n {
            let ab = cmp(a, b);
            assert_eq!(ab, cmp(b, a).reverse());
            if a != b {
                assert_ne!(ab, Ordering::Equal);
            }
        }
    }
    for a in (1..=n).step_by(3) {
        for b in 1..=n {
            if cmp(a, b) != Ordering::Less {
                continue;
            }
            for c in 1..=n {
                if cmp(b, c) == Ordering::Less {
                    assert_eq!(cmp(a, c), Ordering::Less, "{a} {b} {c}");
                }
            }
        }
    }
    assert!(sharkovskii_compare(0, 3).is_err());
}

fn check_pattern(p: &OrbitPattern) {
    let model = build_model_map(p);
    for m in [1u64, 2, 4, 5, 6, 7, 8, 9, 10, 11, 12] {
        let lp = find_nonrepeating_loop(p, m).unwrap();
        assert_eq!(lp.len() as u64, m);
        verify_loop(p, &lp).unwrap();
        let x = locate_periodic_point(&model, p, &lp).unwrap();
        assert!(x.width() <= 1e-9, "m={m}: {x:?}");
        assert_eq!(least_period(&model, x.mid(), m as usize, 1e-9), Some(m as usize), "m={m}");
    }
}

#[test]
fn loops_for_every_forced_period() {
    check_pattern(&OrbitPattern::stefan(3).unwrap());
    let orbit = [-3.46642, -6.26401, -9.74889].map(Interval::point);
    check_pattern(&OrbitPattern::from_cycle(&orbit).unwrap());
}

#[test]
fn period_five_forces_seven_but_not_three() {
    let p = OrbitPattern::stefan(5).unwrap();
    assert!(find_nonrepeating_loop(&p, 7).is_ok());
    assert!(find_nonrepeating_loop(&p, 3).is_err());
}
