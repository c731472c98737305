use std::fmt::Write as _;
use std::path::Path;

use crate::interval::{format_hex, parse_hex, Interval};

use super::job::{Mode, ProofJob};
use super::verify::{verify_job, Outcome, ProofCertificate, Strategy, VerifyOptions};
use super::DriverError;

const MAGIC: &str = "shark-certificate 1";

/// How the tail of a segment is measured against the basis.
pub const TAIL_COORDINATES: &str = "tail-coordinates oblique: zeta = u - u0 - m1*rho1, rho1 from the head in the ambient frame";

fn yes(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn ivec(v: &[Interval]) -> String {
    v.iter().map(Interval::to_hex).collect::<Vec<_>>().join(";")
}

/// Certificate text. Every number that witnesses a verdict is written as a
/// hexadecimal float so that a replay can compare bits.
pub fn render_certificate(c: &ProofCertificate) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{MAGIC}");
    let _ = writeln!(s, "mode {}", if c.mode == Mode::Ode { "ode" } else { "dde" });
    let _ = writeln!(s, "full {}", yes(c.full));
    if let Some((p, n)) = c.grid {
        let _ = writeln!(s, "resolution p={p} n={n}");
        let _ = writeln!(s, "{TAIL_COORDINATES}");
    }
    let _ = writeln!(s, "strategy pieces={} depth={}", c.strategy.pieces, c.strategy.depth);
    let _ = writeln!(s, "verdict {}", if c.proven() { "proven" } else { "inconclusive" });
    let _ = writeln!(s, "job-begin");
    for l in c.job_text.lines() {
        let _ = writeln!(s, "{l}");
    }
    let _ = writeln!(s, "job-end");
    if let Some(t) = &c.tail_text {
        let _ = writeln!(s, "tail-begin");
        for l in t.lines() {
            let _ = writeln!(s, "{l}");
        }
        let _ = writeln!(s, "tail-end");
    }
    for inc in &c.inclusions {
        let _ = writeln!(
            s,
            "inclusion {} {} passed={} leaves={} min-margin={}",
            inc.source,
            inc.target,
            yes(inc.passed()),
            inc.records.len(),
            format_hex(inc.min_margin())
        );
        for r in &inc.records {
            match &r.outcome {
                Outcome::Pass { coords, margin, tail_slack, digest, return_time } => {
                    let _ = writeln!(
                        s,
                        "piece {} {} pass margin={} slack={} digest={digest:016x} time={} image={}",
                        r.path,
                        r.rho1.to_hex(),
                        format_hex(*margin),
                        format_hex(*tail_slack),
                        return_time.to_hex(),
                        ivec(coords)
                    );
                }
                Outcome::Fail { reason } => {
                    let _ = writeln!(s, "piece {} {} fail {}", r.path, r.rho1.to_hex(), reason.replace('\n', " "));
                }
            }
        }
    }
    for p in &c.periods {
        let _ = writeln!(s, "period {} passed={} loop={}", p.m, yes(p.passed), p.lp.to_json());
        for st in &p.steps {
            let _ = write!(s, "covering {} -> {} {}", st.from, st.to, if st.passed { "pass" } else { "fail" });
            if !st.failures.is_empty() {
                let _ = write!(s, " {}", st.failures.join("; "));
            }
            s.push('\n');
        }
    }
    if let Some(con) = &c.conclusion {
        let _ = writeln!(s, "conclusion {}", con.statement());
    }
    s
}

/// A leaf as read back from a certificate.
#[derive(Clone, Debug, PartialEq)]
pub struct ParsedPiece {
    pub path: String,
    pub rho1: Interval,
    pub passed: bool,
    pub margin: Option<f64>,
    pub image: Vec<Interval>,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ParsedInclusion {
    pub source: String,
    pub target: String,
    pub passed: bool,
    pub pieces: Vec<ParsedPiece>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ParsedCertificate {
    pub text: String,
    pub mode: Mode,
    pub full: bool,
    pub strategy: Strategy,
    pub proven: bool,
    pub job_text: String,
    pub tail_text: Option<String>,
    pub inclusions: Vec<ParsedInclusion>,
    /// `(m, passed, loop json)`.
    pub periods: Vec<(u64, bool, String)>,
    pub conclusion: Option<String>,
}

impl ParsedCertificate {
    pub fn job(&self, base: &Path) -> Result<ProofJob, DriverError> {
        ProofJob::parse(&self.job_text, base)
    }
}

fn fmt_err(line: usize, msg: impl std::fmt::Display) -> DriverError {
    DriverError::Format(format!("certificate line {line}: {msg}"))
}

fn kv<'a>(words: &[&'a str], key: &str) -> Option<&'a str> {
    words.iter().find_map(|w| w.strip_prefix(key).and_then(|r| r.strip_prefix('=')))
}

pub fn parse_certificate(text: &str) -> Result<ParsedCertificate, DriverError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    match lines.next() {
        Some((_, l)) if l == MAGIC => {}
        _ => return Err(DriverError::Format("not a certificate".into())),
    }
    let mut c = ParsedCertificate {
        text: text.to_string(),
        mode: Mode::Ode,
        full: false,
        strategy: Strategy { pieces: 0, depth: 0 },
        proven: false,
        job_text: String::new(),
        tail_text: None,
        inclusions: Vec::new(),
        periods: Vec::new(),
        conclusion: None,
    };
    let block = |lines: &mut dyn Iterator<Item = (usize, &str)>, end: &str| -> Result<String, DriverError> {
        let mut out = String::new();
        for (_, l) in lines {
            if l == end {
                return Ok(out);
            }
            out.push_str(l);
            out.push('\n');
        }
        Err(DriverError::Format(format!("missing `{end}`")))
    };
    while let Some((n, line)) = lines.next() {
        let words: Vec<&str> = line.split_whitespace().collect();
        let Some(&head) = words.first() else { continue };
        match head {
            "mode" => c.mode = if words.get(1) == Some(&"dde") { Mode::Dde } else { Mode::Ode },
            "full" => c.full = words.get(1) == Some(&"yes"),
            "resolution" | "tail-coordinates" => {}
            "strategy" => {
                let num = |k: &str| kv(&words, k).and_then(|v| v.parse().ok()).ok_or_else(|| fmt_err(n, format!("missing {k}")));
                c.strategy = Strategy { pieces: num("pieces")?, depth: num("depth")? };
            }
            "verdict" => c.proven = words.get(1) == Some(&"proven"),
            "job-begin" => c.job_text = block(&mut lines, "job-end")?,
            "tail-begin" => c.tail_text = Some(block(&mut lines, "tail-end")?),
            "inclusion" => {
                if words.len() < 4 {
                    return Err(fmt_err(n, "short inclusion record"));
                }
                c.inclusions.push(ParsedInclusion {
                    source: words[1].to_string(),
                    target: words[2].to_string(),
                    passed: kv(&words, "passed") == Some("yes"),
                    pieces: Vec::new(),
                });
            }
            "piece" => {
                let inc = c.inclusions.last_mut().ok_or_else(|| fmt_err(n, "piece before inclusion"))?;
                if words.len() < 4 {
                    return Err(fmt_err(n, "short piece record"));
                }
                let rho1 = Interval::from_hex(words[2]).map_err(|e| fmt_err(n, e))?;
                let passed = words[3] == "pass";
                let margin = kv(&words, "margin").map(parse_hex).transpose().map_err(|e| fmt_err(n, e))?;
                let image = match kv(&words, "image") {
                    Some(v) => v.split(';').map(Interval::from_hex).collect::<Result<_, _>>().map_err(|e| fmt_err(n, e))?,
                    None => Vec::new(),
                };
                inc.pieces.push(ParsedPiece { path: words[1].to_string(), rho1, passed, margin, image, detail: words[4..].join(" ") });
            }
            "period" => {
                let m = words.get(1).and_then(|v| v.parse().ok()).ok_or_else(|| fmt_err(n, "bad period"))?;
                let lp = line.split_once("loop=").map(|x| x.1.to_string()).unwrap_or_default();
                c.periods.push((m, kv(&words, "passed") == Some("yes"), lp));
            }
            "covering" => {}
            "conclusion" => c.conclusion = Some(line["conclusion ".len().min(line.len())..].to_string()),
            other => return Err(fmt_err(n, format!("unknown record `{other}`"))),
        }
    }
    if c.job_text.is_empty() {
        return Err(DriverError::Format("certificate has no job".into()));
    }
    Ok(c)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReplayOutcome {
    pub proven: bool,
    /// First line that differs: `(line, recorded, replayed)`.
    pub difference: Option<(usize, String, String)>,
}

impl ReplayOutcome {
    pub fn identical(&self) -> bool {
        self.difference.is_none()
    }
}

/// Re-run the embedded job with the recorded strategy and compare the
/// regenerated certificate with the recorded one line by line.
pub fn replay(text: &str, base: &Path) -> Result<ReplayOutcome, DriverError> {
    let parsed = parse_certificate(text)?;
    let job = parsed.job(base)?;
    let opts = VerifyOptions {
        full: parsed.full,
        pieces: Some(parsed.strategy.pieces),
        depth: Some(parsed.strategy.depth),
        tail_text: parsed.tail_text.clone(),
    };
    let cert = verify_job(&job, &opts)?;
    let again = render_certificate(&cert);
    let mut a = text.lines();
    let mut b = again.lines();
    let mut n = 0;
    let difference = loop {
        n += 1;
        match (a.next(), b.next()) {
            (None, None) => break None,
            (x, y) if x == y => continue,
            (x, y) => break Some((n, x.unwrap_or("").to_string(), y.unwrap_or("").to_string())),
        }
    };
    Ok(ReplayOutcome { proven: cert.proven(), difference })
}
