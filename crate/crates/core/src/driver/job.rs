use std::path::{Path, PathBuf};

use crate::flow::{PolyField, Section};
use crate::interval::{parse_decimal, IMatrix, IVector, Interval};

use super::DriverError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Ode,
    Dde,
}

#[derive(Clone, Debug, PartialEq)]
pub enum FieldSpec {
    Rossler { a: Interval, b: Interval },
    /// Recognised but not polynomial; kept so example jobs parse.
    Other(String),
}

impl FieldSpec {
    pub fn poly(&self) -> Result<PolyField, DriverError> {
        match self {
            FieldSpec::Rossler { a, b } => Ok(PolyField::rossler(*a, *b)),
            FieldSpec::Other(name) => Err(DriverError::Precondition(format!("field `{name}` is not polynomial and cannot be integrated"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SetSpec {
    pub name: String,
    /// Center in section coordinates.
    pub center: IVector,
    pub radii: IVector,
}

/// A parsed job file; `text` is kept verbatim for certificates.
#[derive(Clone, Debug, PartialEq)]
pub struct ProofJob {
    pub text: String,
    pub base: PathBuf,
    pub mode: Mode,
    pub field: FieldSpec,
    pub delay_field: Option<FieldSpec>,
    pub section: Section,
    pub frame: IMatrix,
    pub sets: Vec<SetSpec>,
    pub ambient: String,
    pub cycle: Vec<String>,
    pub pieces: usize,
    pub depth: usize,
    pub max_time: f64,
    pub eps: Interval,
    pub tau: f64,
    pub grid: (usize, usize),
    pub grid_full: (usize, usize),
    pub tail: Option<PathBuf>,
    pub tail_full: Option<PathBuf>,
    pub periods: Vec<u64>,
    pub unverified: bool,
}

fn bad(line: usize, msg: impl Into<String>) -> DriverError {
    DriverError::Job { line, msg: msg.into() }
}

fn interval(line: usize, s: &str) -> Result<Interval, DriverError> {
    parse_decimal(s).map_err(|e| bad(line, format!("{s}: {e}")))
}

fn vector(line: usize, s: &str) -> Result<IVector, DriverError> {
    s.split(',').map(|v| interval(line, v.trim())).collect::<Result<Vec<_>, _>>().map(IVector)
}

fn number<T: std::str::FromStr>(line: usize, s: &str) -> Result<T, DriverError> {
    s.parse().map_err(|_| bad(line, format!("bad number `{s}`")))
}

fn keyed<'a>(line: usize, words: &[&'a str], key: &str) -> Result<&'a str, DriverError> {
    words
        .iter()
        .find_map(|w| w.strip_prefix(key).and_then(|r| r.strip_prefix('=')))
        .ok_or_else(|| bad(line, format!("missing `{key}=`")))
}

fn field(line: usize, words: &[&str]) -> Result<FieldSpec, DriverError> {
    match words.first() {
        Some(&"rossler") => Ok(FieldSpec::Rossler { a: interval(line, keyed(line, words, "a")?)?, b: interval(line, keyed(line, words, "b")?)? }),
        Some(name) => Ok(FieldSpec::Other(name.to_string())),
        None => Err(bad(line, "empty field")),
    }
}

impl ProofJob {
    pub fn load(path: &Path) -> Result<Self, DriverError> {
        let text = std::fs::read_to_string(path).map_err(|e| DriverError::Io(format!("{}: {e}", path.display())))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::parse(&text, &base)
    }

    pub fn parse(text: &str, base: &Path) -> Result<Self, DriverError> {
        let mut job = ProofJob {
            text: text.to_string(),
            base: base.to_path_buf(),
            mode: Mode::Ode,
            field: FieldSpec::Other("unset".into()),
            delay_field: None,
            section: Section::new(0, 1.0),
            frame: IMatrix::identity(2),
            sets: Vec::new(),
            ambient: String::new(),
            cycle: Vec::new(),
            pieces: 1024,
            depth: 12,
            max_time: 20.0,
            eps: Interval::ZERO,
            tau: 0.0,
            grid: (8, 2),
            grid_full: (32, 3),
            tail: None,
            tail_full: None,
            periods: Vec::new(),
            unverified: false,
        };
        let mut frame_seen = false;
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let words: Vec<&str> = content.split_whitespace().collect();
            let args = &words[1..];
            let one = || args.first().copied().ok_or_else(|| bad(line, format!("`{}` needs a value", words[0])));
            match words[0] {
                "mode" => {
                    job.mode = match one()? {
                        "ode" => Mode::Ode,
                        "dde" => Mode::Dde,
                        m => return Err(bad(line, format!("unknown mode `{m}`"))),
                    }
                }
                "field" => job.field = field(line, args)?,
                "delay-field" => job.delay_field = Some(field(line, args)?),
                "section" => {
                    let coord = number(line, keyed(line, args, "coord")?)?;
                    let dir: f64 = number(line, keyed(line, args, "direction")?)?;
                    let mut s = Section::new(coord, dir);
                    if let Ok(l) = keyed(line, args, "level") {
                        s.level = number(line, l)?;
                    }
                    job.section = s;
                }
                "frame" => {
                    let v: Vec<Interval> = args.iter().map(|w| interval(line, w)).collect::<Result<_, _>>()?;
                    let k = (v.len() as f64).sqrt() as usize;
                    if k * k != v.len() || k == 0 {
                        return Err(bad(line, "frame must be a square matrix in row-major order"));
                    }
                    job.frame = IMatrix::from_vec(k, k, v);
                    frame_seen = true;
                }
                "set" => {
                    let name = one()?.to_string();
                    let center = vector(line, keyed(line, args, "center")?)?;
                    let radii = vector(line, keyed(line, args, "radii")?)?;
                    if center.len() != radii.len() {
                        return Err(bad(line, "center and radii differ in length"));
                    }
                    job.sets.push(SetSpec { name, center, radii });
                }
                "ambient" => job.ambient = one()?.to_string(),
                "cycle" => job.cycle = args.iter().map(|s| s.to_string()).collect(),
                "pieces" => job.pieces = number(line, one()?)?,
                "depth" => job.depth = number(line, one()?)?,
                "max-time" => job.max_time = number(line, one()?)?,
                "eps" => job.eps = interval(line, one()?)?,
                "tau" => job.tau = number(line, one()?)?,
                "grid" | "grid-full" => {
                    if args.len() != 2 {
                        return Err(bad(line, "grid needs p and n"));
                    }
                    let g = (number(line, args[0])?, number(line, args[1])?);
                    if words[0] == "grid" {
                        job.grid = g;
                    } else {
                        job.grid_full = g;
                    }
                }
                "tail" => job.tail = Some(PathBuf::from(one()?)),
                "tail-full" => job.tail_full = Some(PathBuf::from(one()?)),
                "periods" => job.periods = args.iter().map(|w| number(line, w)).collect::<Result<_, _>>()?,
                "status" => job.unverified = one()? == "unverified",
                other => return Err(bad(line, format!("unknown key `{other}`"))),
            }
        }
        if job.sets.is_empty() {
            return Err(bad(0, "no sets defined"));
        }
        if job.ambient.is_empty() {
            job.ambient = job.sets[0].name.clone();
        }
        for name in job.cycle.iter().chain(std::iter::once(&job.ambient)) {
            if job.set(name).is_none() {
                return Err(bad(0, format!("unknown set `{name}`")));
            }
        }
        let k = job.sets[0].center.len();
        if job.sets.iter().any(|s| s.center.len() != k) {
            return Err(bad(0, "sets differ in dimension"));
        }
        if !frame_seen {
            job.frame = IMatrix::identity(k);
        }
        if job.frame.rows() != k {
            return Err(bad(0, format!("frame is {}x{}, sets have dimension {k}", job.frame.rows(), job.frame.cols())));
        }
        if job.pieces == 0 {
            return Err(bad(0, "pieces must be positive"));
        }
        Ok(job)
    }

    pub fn set(&self, name: &str) -> Option<&SetSpec> {
        self.sets.iter().find(|s| s.name == name)
    }

    pub fn tail_path(&self, full: bool) -> Option<PathBuf> {
        let p = if full { self.tail_full.as_ref() } else { self.tail.as_ref() }?;
        Some(if p.is_absolute() { p.clone() } else { self.base.join(p) })
    }

    pub fn grid_for(&self, full: bool) -> (usize, usize) {
        if full {
            self.grid_full
        } else {
            self.grid
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const JOB: &str = "mode ode\nfield rossler a=5.25 b=0.2\nsection coord=0 direction=1\n\
        frame -1 0.000656767 -0.000656767 -1\nset G center=-6.38401,0.0327544 radii=3.63687,0.0004\n\
        set C1 center=-3.46642,0.0346316 radii=0.072,0.00048 # first\nambient G\ncycle C1\npieces 64\n";

    #[test]
    fn parses_sets_and_frame() {
        let job = ProofJob::parse(JOB, Path::new(".")).unwrap();
        assert_eq!(job.mode, Mode::Ode);
        assert_eq!(job.sets.len(), 2);
        assert!(job.frame[(0, 1)].contains(0.000656767));
        assert!(job.set("C1").unwrap().radii[1].contains(0.00048));
        assert_eq!(job.pieces, 64);
    }

    #[test]
    fn rejects_unknown_keys_and_sets() {
        assert!(matches!(ProofJob::parse("bogus 1\nset G center=0 radii=1", Path::new(".")), Err(DriverError::Job { line: 1, .. })));
        assert!(ProofJob::parse("set G center=0 radii=1\ncycle H", Path::new(".")).is_err());
        assert!(ProofJob::parse("set G center=0,1 radii=1", Path::new(".")).is_err());
    }

    #[test]
    fn non_polynomial_field_is_a_precondition_error() {
        let job = ProofJob::parse("field mackey-glass beta=2\nset G center=0 radii=1", Path::new(".")).unwrap();
        assert!(matches!(job.field.poly(), Err(DriverError::Precondition(_))));
    }
}
