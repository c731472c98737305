use std::path::Path;

use shark_core::dde::GridSpec;
use shark_core::driver::cert::parse_certificate;
use shark_core::driver::tail::{basis_from_segments, Segment};
use shark_core::driver::verify::{prepare_tail, Strategy};
use shark_core::driver::{gencoords, render_certificate, replay, verify_job, DriverError, ProofJob, VerifyOptions};
use shark_core::interval::IMatrix;

const SETS: &str = "frame -1 0.000656767 -0.000656767 -1\n\
set G center=-6.38401,0.0327544 radii=3.63687,0.0004\n\
set C1 center=-3.46642,0.0346316 radii=0.072,0.00048\n\
set C2 center=-6.26401,0.0326544 radii=0.162,0.00066\n\
set C3 center=-9.74889,0.0307529 radii=0.036,0.00072\n";

fn job(text: &str) -> ProofJob {
    ProofJob::parse(text, Path::new(".")).unwrap()
}

fn ode_job(extra: &str) -> ProofJob {
    job(&format!("mode ode\nfield rossler a=5.25 b=0.2\nsection coord=0 direction=1\n{SETS}ambient G\ncycle C1 C2 C3\n{extra}"))
}

#[test]
fn inflated_cycle_set_breaks_disjointness() {
    let text = format!("mode ode\nfield rossler a=5.25 b=0.2\n{}", SETS.replace("radii=0.072,0.00048", "radii=7.2,0.048"));
    let j = job(&format!("{text}ambient G\ncycle C1 C2 C3\n"));
    match verify_job(&j, &VerifyOptions::default()) {
        Err(DriverError::Precondition(m)) => assert!(m.contains("overlap"), "{m}"),
        other => panic!("{other:?}"),
    }
}

#[test]
fn ambient_set_must_stay_in_the_half_plane() {
    let j = job("mode ode\nfield rossler a=5.25 b=0.2\nsection coord=0 direction=1\nframe -1 0 0 -1\nset G center=-1,0.03 radii=1.5,0.0004\n");
    match verify_job(&j, &VerifyOptions::default()) {
        Err(DriverError::Precondition(m)) => assert!(m.contains("half plane"), "{m}"),
        other => panic!("{other:?}"),
    }
}

#[test]
fn unverified_and_non_polynomial_jobs_are_refused() {
    let j = ode_job("status unverified\n");
    assert!(matches!(verify_job(&j, &VerifyOptions::default()), Err(DriverError::Precondition(_))));
    let mg = job("mode dde\nfield mackey-glass beta=2 gamma=1 n=9.65\nset G center=1 radii=0.1\n");
    assert!(matches!(verify_job(&mg, &VerifyOptions::default()), Err(DriverError::Precondition(_))));
}

#[test]
fn failing_certificate_replays_identically() {
    // a thin box around the center does not map into itself
    let j = job(
        "mode ode\nfield rossler a=5.25 b=0.2\nsection coord=0 direction=1\nframe -1 0.000656767 -0.000656767 -1\n\
         set G center=-6.38401,0.0327544 radii=0.01,0.0004\npieces 4\ndepth 1\n",
    );
    let cert = verify_job(&j, &VerifyOptions::default()).unwrap();
    assert!(!cert.proven());
    assert!(cert.conclusion.is_none());
    assert_eq!(cert.inclusions[0].records.len(), 8);
    let text = render_certificate(&cert);
    let parsed = parse_certificate(&text).unwrap();
    assert!(!parsed.proven);
    assert_eq!(parsed.inclusions[0].pieces.len(), 8);
    assert!(parsed.inclusions[0].pieces.iter().all(|p| !p.passed));
    let again = replay(&text, Path::new(".")).unwrap();
    assert!(again.identical(), "{:?}", again.difference);
    assert!(!again.proven);
    assert!(parse_certificate("nonsense").is_err());
    // an edited record is reported with its line
    let edited = text.replacen(" fail ", " fail edited ", 1);
    let diff = replay(&edited, Path::new(".")).unwrap().difference.unwrap();
    assert!(diff.1.contains("edited") && !diff.2.contains("edited"));
}

#[test]
fn hull_of_piece_images_is_deterministic() {
    let j = job(
        "mode ode\nfield rossler a=5.25 b=0.2\nsection coord=0 direction=1\nframe -1 0.000656767 -0.000656767 -1\n\
         set G center=-6.38401,0.0327544 radii=0.05,0.0004\npieces 6\ndepth 0\n",
    );
    let a = verify_job(&j, &VerifyOptions::default()).unwrap();
    let b = verify_job(&j, &VerifyOptions::default()).unwrap();
    assert_eq!(render_certificate(&a), render_certificate(&b));
}

fn dde_job(eps: &str, radius: &str) -> ProofJob {
    job(&format!(
        "mode dde\nfield rossler a=5.25 b=0.2\nsection coord=0 direction=1\nframe -1 0.000656767 -0.000656767 -1\n\
         set G center=-6.38401,0.0327544 radii={radius},0.0004\neps {eps}\ntau 0.5\ngrid 32 3\npieces 8\ndepth 3\n"
    ))
}

#[test]
fn tail_cap_zero_always_fails() {
    let j = dde_job("1e-4", "0.05");
    let basis = gencoords(&j, false, 20, &[0.0, -5.0, 0.03]).unwrap();
    let r = prepare_tail(&j, basis, Strategy { pieces: 2, depth: 0 }, 0.0, 3, &mut |_| {});
    assert!(matches!(r, Err(DriverError::Inconclusive(_))), "{r:?}");
}

#[test]
fn unperturbed_tail_closes() {
    let j = dde_job("0", "0.5");
    let basis = gencoords(&j, false, 100, &[0.0, -5.0, 0.03]).unwrap();
    let mut log = Vec::new();
    let out = prepare_tail(&j, basis, Strategy { pieces: 16, depth: 3 }, 1.0, 6, &mut |l| log.push(l)).unwrap();
    assert!(out.r_star < 1.0, "{log:?}");
    assert!(log.last().unwrap().contains("closed"), "{log:?}");
}

#[test]
fn collinear_samples_have_zero_residual() {
    let grid = GridSpec::new(1, 0, 1.0).unwrap();
    let seg = |v: Vec<f64>| Segment { finite: v, top: vec![vec![0.0; 2]] };
    let segs = [seg(vec![0.0, 1.0, 5.0, 7.0]), seg(vec![0.0, 3.0, 9.0, 8.0]), seg(vec![0.0, 2.0, 7.0, 7.5])];
    let b = basis_from_segments(grid, 2, &segs, &[1.0], &IMatrix::identity(1), 1, 0).unwrap();
    assert_eq!(b.r_star, 0.0);
    assert_eq!(b.u0[..2], [0.0, 1.0]);
}
