use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use shark_core::driver::tail::TailBasis;
use shark_core::driver::verify::{prepare_tail, Strategy};
use shark_core::driver::report::report;
use shark_core::driver::{gencoords, parse_certificate, render_certificate, replay, verify_job, DriverError, Mode, ProofJob, VerifyOptions};
use shark_core::interval::Interval;
use shark_core::perturbation::{poincare_epsilon, section_slack, Bound, EpsilonBound, FieldConstants, PersistenceInput};
use shark_core::sharkovskii::{find_nonrepeating_loop, OrbitPattern};

#[derive(Parser)]
#[command(name = "shark", version, about = "Computer-assisted proofs of Sharkovskii-type theorems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    job: PathBuf,
    /// Initial pieces along the unstable axis of the ambient set.
    #[arg(long)]
    pieces: Option<usize>,
    /// Maximal bisection depth for inconclusive pieces.
    #[arg(long)]
    depth: Option<usize>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Certificate path (default: next to the job, extension `.cert`).
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Verify an ODE job.
    VerifyOde(RunArgs),
    /// Verify a delay equation job.
    VerifyDde {
        #[command(flatten)]
        run: RunArgs,
        /// Use the full resolution grid and tail.
        #[arg(long)]
        full: bool,
    },
    /// Non-rigorous tail basis from a long trajectory.
    Gencoords {
        job: PathBuf,
        #[arg(long)]
        full: bool,
        #[arg(long, default_value_t = 100)]
        count: usize,
        #[arg(long, default_value = "0,-5,0.03", value_delimiter = ',', allow_hyphen_values = true)]
        seed: Vec<f64>,
        /// Output path (default: the job's tail file).
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Grow the tail boxes of a basis until the ambient set maps into them.
    PrepareTail {
        job: PathBuf,
        #[arg(long)]
        full: bool,
        /// Basis to start from (default: the job's tail file).
        #[arg(long)]
        basis: Option<PathBuf>,
        /// Largest admissible residual.
        #[arg(long, default_value_t = 1.0)]
        cap: f64,
        #[arg(long, default_value_t = 12)]
        iterations: usize,
        #[arg(long)]
        pieces: Option<usize>,
        #[arg(long)]
        threads: Option<usize>,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Largest delay coefficient keeping the perturbed return map r-close.
    EpsilonBound {
        #[arg(long)]
        r: f64,
        /// Upper bound on return times.
        #[arg(long)]
        t: f64,
        #[arg(long)]
        m_f: f64,
        #[arg(long)]
        l_f: f64,
        #[arg(long)]
        m_g: f64,
        #[arg(long)]
        l_g: f64,
        #[arg(long)]
        tau: f64,
    },
    /// Non-repeating loops forced by an orbit pattern.
    SharLoops {
        /// Period of a built-in Štefan pattern.
        #[arg(long)]
        n: Option<usize>,
        /// Pattern file with `point` and `sigma` lines.
        #[arg(long)]
        pattern: Option<PathBuf>,
        #[arg(long, num_args = 1.., required = true)]
        m: Vec<u64>,
    },
    /// Tables, loops and plot data from a certificate.
    Report {
        cert: PathBuf,
        #[arg(long, num_args = 1..)]
        m: Vec<u64>,
        /// Append gnuplot data blocks.
        #[arg(long)]
        plot: bool,
    },
    /// Re-run a certificate and compare it bit for bit.
    Verify {
        #[arg(long)]
        replay: PathBuf,
        #[arg(long)]
        threads: Option<usize>,
    },
}

enum Failure {
    Inconclusive(String),
    Usage(String),
}

impl From<DriverError> for Failure {
    fn from(e: DriverError) -> Self {
        match e {
            DriverError::Inconclusive(_) => Failure::Inconclusive(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

fn usage(e: impl std::fmt::Display) -> Failure {
    Failure::Usage(e.to_string())
}

/// Must run before the first parallel section starts the worker pool.
fn threads(n: Option<usize>) -> Result<(), Failure> {
    if let Some(n) = n {
        std::env::set_var("RAYON_NUM_THREADS", n.to_string());
    }
    Ok(())
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn run_verify(run: &RunArgs, mode: Mode, full: bool) -> Result<bool, Failure> {
    threads(run.threads)?;
    let job = ProofJob::load(&run.job)?;
    if job.mode != mode {
        return Err(usage(format!("{} is not a {} job", run.job.display(), if mode == Mode::Ode { "ODE" } else { "DDE" })));
    }
    let opts = VerifyOptions { full, pieces: run.pieces, depth: run.depth, tail_text: None };
    let start = std::time::Instant::now();
    let cert = verify_job(&job, &opts)?;
    let out = run.out.clone().unwrap_or_else(|| run.job.with_extension(if full { "full.cert" } else { "cert" }));
    write(&out, &render_certificate(&cert))?;
    for inc in &cert.inclusions {
        let failed = inc.records.iter().filter(|r| !matches!(r.outcome, shark_core::driver::Outcome::Pass { .. })).count();
        println!(
            "P({}) in {}: {} ({} leaves, {failed} failed, min margin {:.3e})",
            inc.source,
            inc.target,
            if inc.passed() { "verified" } else { "NOT verified" },
            inc.records.len(),
            inc.min_margin()
        );
    }
    for p in &cert.periods {
        println!("period {}: loop {} coverings {}", p.m, p.lp, if p.passed { "verified" } else { "FAILED" });
    }
    if let Some(c) = &cert.conclusion {
        println!("conclusion: {}", c.statement());
    }
    println!("certificate: {} ({:.1} s)", out.display(), start.elapsed().as_secs_f64());
    Ok(cert.proven())
}

fn run(cli: Cli) -> Result<bool, Failure> {
    match cli.command {
        Command::VerifyOde(run) => run_verify(&run, Mode::Ode, false),
        Command::VerifyDde { run, full } => run_verify(&run, Mode::Dde, full),
        Command::Gencoords { job, full, count, seed, out } => {
            let job = ProofJob::load(&job)?;
            let basis = gencoords(&job, full, count, &seed)?;
            let out = out.or_else(|| job.tail_path(full)).ok_or_else(|| usage("no output path and the job names no tail file"))?;
            write(&out, &basis.to_text())?;
            println!("non-rigorous basis from {count} segments: r* = {:.3e}; wrote {}", basis.r_star, out.display());
            Ok(true)
        }
        Command::PrepareTail { job, full, basis, cap, iterations, pieces, threads: t, out } => {
            threads(t)?;
            let job = ProofJob::load(&job)?;
            let src = basis.or_else(|| job.tail_path(full)).ok_or_else(|| usage("no basis given and the job names no tail file"))?;
            let b = TailBasis::from_text(&read(&src)?)?;
            let strategy = Strategy { pieces: pieces.unwrap_or(job.pieces), depth: job.depth };
            let b = prepare_tail(&job, b, strategy, cap, iterations, &mut |line| println!("{line}"))?;
            let out = out.unwrap_or(src);
            write(&out, &b.to_text())?;
            println!("tail boxes closed, r* = {:.3e}; wrote {}", b.r_star, out.display());
            Ok(true)
        }
        Command::EpsilonBound { r, t, m_f, l_f, m_g, l_g, tau } => {
            let constants = FieldConstants::new(m_f, l_f, m_g, l_g, tau).map_err(usage)?;
            let input = PersistenceInput { r, t, constants };
            let eps = poincare_epsilon(&input).map_err(usage)?;
            let eta = section_slack(&input);
            println!("eta = r / (2 M_f) <= {:e}", eta.hi());
            println!("M_f * eta <= r/2");
            match eps {
                EpsilonBound::Unbounded => println!("M_g * T = 0: every eps keeps the return map r-close (unbounded)"),
                EpsilonBound::Below(b) => {
                    let lhs = b.mul(&Bound::new(Interval::point(m_g) * Interval::point(t))).mul(&Bound::exp(Interval::point(l_f) * Interval::point(t)));
                    println!("eps * M_g * T * exp(L_f T) <= {} <= r/2 = {:e}", lhs, r / 2.0);
                    println!("eps_max >= {b}");
                    println!("log10(eps_max) in [{:.4}, {:.4}]", b.log10().lo(), b.log10().hi());
                }
            }
            Ok(true)
        }
        Command::SharLoops { n, pattern, m } => {
            let pattern = match (n, pattern) {
                (_, Some(p)) => OrbitPattern::parse(&read(&p)?).map_err(usage)?,
                (Some(n), None) => OrbitPattern::stefan(n).map_err(usage)?,
                (None, None) => return Err(usage("give --n or --pattern")),
            };
            let mut all = true;
            for k in m {
                match find_nonrepeating_loop(&pattern, k) {
                    Ok(lp) => println!("{}", lp.to_json()),
                    Err(e) => {
                        all = false;
                        println!("{{\"m\":{k},\"error\":\"{e}\"}}");
                    }
                }
            }
            Ok(all)
        }
        Command::Report { cert, m, plot } => {
            let parsed = parse_certificate(&read(&cert)?)?;
            let base = cert.parent().map(Path::to_path_buf).unwrap_or_default();
            print!("{}", report(&parsed, &base, &m, plot)?);
            Ok(parsed.proven)
        }
        Command::Verify { replay: cert, threads: t } => {
            threads(t)?;
            let base = cert.parent().map(Path::to_path_buf).unwrap_or_default();
            let outcome = replay(&read(&cert)?, &base)?;
            match &outcome.difference {
                None => println!("replay identical; verdict {}", if outcome.proven { "proven" } else { "inconclusive" }),
                Some((n, a, b)) => println!("replay differs at line {n}:\n  recorded: {a}\n  replayed: {b}"),
            }
            Ok(outcome.identical() && outcome.proven)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Inconclusive(m)) => {
            eprintln!("{m}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
    }
}
