use std::path::PathBuf;
use std::process::{Command, Output};

fn shark(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_shark")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../proof-data").join(name).display().to_string()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("shark-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn four_loop_of_the_three_orbit() {
    let o = shark(&["shar-loops", "--n", "3", "--m", "4"]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.contains("[[1,2],[0,1],[0,1],[0,1]]"), "{out}");
}

#[test]
fn period_three_is_not_forced_by_five() {
    let o = shark(&["shar-loops", "--n", "5", "--m", "7", "3"]);
    assert_eq!(o.status.code(), Some(1));
    let out = stdout(&o);
    assert!(out.lines().next().unwrap().contains("\"m\":7") && out.contains("error"), "{out}");
}

#[test]
fn pattern_file_loops() {
    let p = scratch("orbit.pattern");
    std::fs::write(&p, "# rotation of three points\npoint -9.74889\npoint -6.26401\npoint -3.46642\nsigma 0 2\nsigma 1 0\nsigma 2 1\n").unwrap();
    let o = shark(&["shar-loops", "--pattern", p.to_str().unwrap(), "--m", "1", "2", "5"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(stdout(&o).lines().count(), 3);
}

#[test]
fn epsilon_bound_magnitude() {
    let o = shark(&["epsilon-bound", "--r", "4e-4", "--t", "6", "--m-f", "10", "--l-f", "10", "--m-g", "20", "--l-g", "10", "--tau", "1"]);
    assert!(o.status.success());
    let out = stdout(&o);
    let line = out.lines().find(|l| l.starts_with("log10(eps_max)")).unwrap();
    let lo: f64 = line.split('[').nth(1).unwrap().split(',').next().unwrap().parse().unwrap();
    assert!((-32.0..=-30.0).contains(&lo), "{out}");
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(shark(&["shar-loops", "--m", "4"]).status.code(), Some(2));
    assert_eq!(shark(&["verify-ode", "/nonexistent.job"]).status.code(), Some(2));
    assert_eq!(shark(&["epsilon-bound", "--r", "1"]).status.code(), Some(2));
    // an ODE job given to the delay driver
    let out = scratch("wrong.cert");
    assert_eq!(shark(&["verify-dde", &data("rossler_ode.job"), "--out", out.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn example_configuration_is_refused() {
    let out = scratch("mg.cert");
    let o = shark(&["verify-dde", &data("mackey_glass.job"), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("unverified"));
    assert!(!out.exists());
}

#[test]
fn small_job_certificate_report_and_replay() {
    let job = scratch("small.job");
    std::fs::write(
        &job,
        "mode ode\nfield rossler a=5.25 b=0.2\nsection coord=0 direction=1\nframe -1 0.000656767 -0.000656767 -1\n\
         set G center=-6.38401,0.0327544 radii=0.02,0.0004\npieces 2\ndepth 0\n",
    )
    .unwrap();
    let o = shark(&["verify-ode", job.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("NOT verified"));
    let cert = job.with_extension("cert");
    let r = shark(&["report", cert.to_str().unwrap(), "--plot"]);
    let text = stdout(&r);
    assert!(text.contains("G") && text.contains("FAILED"), "{text}");
    let v = shark(&["verify", "--replay", cert.to_str().unwrap()]);
    assert_eq!(v.status.code(), Some(1));
    assert!(stdout(&v).contains("replay identical"));
}
