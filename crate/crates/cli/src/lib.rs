//! Command implementations and deterministic serialization for the `qgz3` binary.

use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use qgz3_core::gzbasis::in_teepee;
use qgz3_core::repgeneric::{verify_generic, RelationReport};
use qgz3_core::rootlimit::{
    build_mixed_basis, BoundaryReport, CasimirReport, MixedBasis, OracleComparison, Role,
    RootReport, DEFAULT_EPS,
};
use qgz3_core::structure::{classify, subrep_image, Classification};
use qgz3_core::{
    analyze, boundary_audit, casimir_structure, compare_with_oracle, coordinates, verify_root,
    Basis, Generator, GeneratorSet, QParam, QgzError, RegularizedRep, RepLabel, RootOfUnity,
    SparseMatrix, StructureReport, C64,
};

pub const SCHEMA: &str = "qgz3/1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Build,
    Verify,
    Analyze,
    Export,
    Plotdata,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Generic,
    Root,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] QgzError),
    #[error("i/o: {0}")]
    Io(#[from] io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Core(
                QgzError::InvalidLabel(_)
                | QgzError::InvalidRoot(_)
                | QgzError::InvalidParameter(_)
                | QgzError::Precondition(_),
            ) => 2,
            CliError::Core(_) => 1,
            CliError::Io(_) => 3,
        }
    }
}

/// Validated command configuration.
#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct RunConfig {
    pub label: RepLabel,
    pub l: Option<u32>,
    pub mode: Mode,
    pub m: u32,
    pub angle: Option<f64>,
    pub eps: Vec<f64>,
    #[serde(skip)]
    pub out: Option<PathBuf>,
    pub format: Format,
}

impl RunConfig {
    /// Checks the raw options. `mode` defaults to root when `l` is given.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        rep: [i64; 3],
        l: Option<u32>,
        mode: Option<Mode>,
        m: Option<u32>,
        angle: Option<f64>,
        eps: Option<Vec<f64>>,
        out: Option<PathBuf>,
        format: Format,
    ) -> Result<Self, CliError> {
        let label = RepLabel::new(rep[0], rep[1], rep[2])?;
        let mode = mode.unwrap_or(if l.is_some() {
            Mode::Root
        } else {
            Mode::Generic
        });
        match mode {
            Mode::Root => {
                let Some(l) = l else {
                    return Err(CliError::Usage("--mode root requires --l".into()));
                };
                if angle.is_some() {
                    return Err(CliError::Usage(
                        "--angle only applies to generic mode".into(),
                    ));
                }
                label.with_root_order(l)?;
                RootOfUnity::new(l, m.unwrap_or(1))?;
            }
            Mode::Generic => {
                if m.is_some() {
                    return Err(CliError::Usage("--m only applies to root mode".into()));
                }
                if let Some(l) = l {
                    label.with_root_order(l)?;
                }
                if let Some(a) = angle {
                    QParam::generic(a)?;
                }
            }
        }
        Ok(Self {
            label,
            l,
            mode,
            m: m.unwrap_or(1),
            angle: match mode {
                Mode::Generic => Some(angle.unwrap_or(qgz3_core::qarith::DEFAULT_ANGLE)),
                Mode::Root => None,
            },
            eps: eps.unwrap_or_else(|| DEFAULT_EPS.to_vec()),
            out,
            format,
        })
    }

    fn root(&self) -> Option<RootOfUnity> {
        match self.mode {
            Mode::Root => Some(RootOfUnity::new(self.l.unwrap(), self.m).unwrap()),
            Mode::Generic => None,
        }
    }

    fn generic(&self) -> Result<QParam, CliError> {
        Ok(QParam::generic(
            self.angle.unwrap_or(qgz3_core::qarith::DEFAULT_ANGLE),
        )?)
    }
}

/// Bytes to write plus the pass flag deciding the exit code.
#[derive(Clone, Debug)]
pub struct Artifact {
    pub bytes: Vec<u8>,
    pub passed: bool,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct Document<'a, T: Serialize> {
    schema: &'static str,
    command: Command,
    config: &'a RunConfig,
    passed: bool,
    report: T,
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct BasisRow {
    pub index: usize,
    pub p12: i64,
    pub p22: i64,
    pub p11: i64,
    pub primed: bool,
    /// Index of the S1 partner for primed states.
    pub partner: Option<usize>,
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct OperatorData {
    pub name: &'static str,
    pub entries: Vec<(usize, usize, C64)>,
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct BuildReport {
    pub dimension: usize,
    pub basis: Vec<BasisRow>,
    pub operators: Vec<OperatorData>,
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct VerifyReport {
    pub relations: Option<RelationReport>,
    pub root: Option<RootReport>,
    pub oracle: Vec<OracleComparison>,
    pub casimir: Option<CasimirReport>,
    pub boundary: Option<BoundaryReport>,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct PlotRow {
    pub index: usize,
    pub p12: i64,
    pub p22: i64,
    pub p11: i64,
    pub x: i64,
    pub y: i64,
    pub z: i64,
    pub class: &'static str,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct Bundle {
    build: BuildReport,
    verify: VerifyReport,
    analyze: StructureReport,
    plotdata: Vec<PlotRow>,
}

/// JSON formatter writing every float with 17 significant digits.
struct Fmt17;

impl serde_json::ser::Formatter for Fmt17 {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        let v = if value == 0.0 { 0.0 } else { value };
        write!(w, "{v:.16e}")
    }
}

pub fn to_json<T: Serialize>(value: &T) -> Vec<u8> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Fmt17);
    value.serialize(&mut ser).expect("reports serialize");
    buf.push(b'\n');
    buf
}

fn operator_data(ops: &GeneratorSet) -> Vec<OperatorData> {
    Generator::ALL
        .iter()
        .map(|&g| OperatorData {
            name: g.name(),
            entries: ops.get(g).entries(),
        })
        .collect()
}

fn basis_rows(basis: &Basis, mixed: Option<&MixedBasis>) -> Vec<BasisRow> {
    basis
        .states()
        .iter()
        .enumerate()
        .map(|(i, s)| BasisRow {
            index: i,
            p12: s.pattern.p12,
            p22: s.pattern.p22,
            p11: s.pattern.p11,
            primed: s.primed,
            partner: match mixed.map(|m| m.role(i)) {
                Some(Role::A(j)) | Some(Role::B(j)) => {
                    let p = mixed.unwrap().pairs[j];
                    Some(if p.a == i { p.b } else { p.a })
                }
                _ => None,
            },
        })
        .collect()
}

enum Built {
    Generic(Box<(Basis, GeneratorSet, QParam)>),
    Root(Box<RegularizedRep>),
}

fn build(cfg: &RunConfig) -> Result<Built, CliError> {
    Ok(match cfg.root() {
        Some(root) => Built::Root(Box::new(RegularizedRep::build(&cfg.label, root)?)),
        None => {
            let q = cfg.generic()?;
            let basis = Basis::unprimed(&cfg.label);
            let ops = GeneratorSet::build(&basis, &q.point())?;
            Built::Generic(Box::new((basis, ops, q)))
        }
    })
}

fn build_report(built: &Built) -> BuildReport {
    match built {
        Built::Generic(g) => BuildReport {
            dimension: g.0.len(),
            basis: basis_rows(&g.0, None),
            operators: operator_data(&g.1),
        },
        Built::Root(rep) => BuildReport {
            dimension: rep.basis().len(),
            basis: basis_rows(rep.basis(), Some(&rep.mixed)),
            operators: operator_data(&rep.ops),
        },
    }
}

fn verify_report(cfg: &RunConfig, built: &Built) -> Result<VerifyReport, CliError> {
    Ok(match built {
        Built::Generic(g) => {
            let q = &g.2;
            let r = verify_generic(&cfg.label, q)?;
            VerifyReport {
                passed: r.passed,
                relations: Some(r),
                root: None,
                oracle: Vec::new(),
                casimir: None,
                boundary: None,
            }
        }
        Built::Root(rep) => {
            let root = verify_root(rep);
            let oracle = compare_with_oracle(rep, &cfg.eps)?;
            let casimir = casimir_structure(rep);
            let boundary = boundary_audit(rep);
            let passed =
                root.passed && oracle.iter().all(|o| o.passed) && casimir.passed && boundary.passed;
            VerifyReport {
                relations: None,
                root: Some(root),
                oracle,
                casimir: Some(casimir),
                boundary: Some(boundary),
                passed,
            }
        }
    })
}

/// Per-state pyramid coordinates with the teepee/subrepresentation class.
pub fn plot_rows(label: &RepLabel, l: Option<u32>) -> Result<Vec<PlotRow>, CliError> {
    let basis = Basis::unprimed(label);
    let mixed = l.map(|l| build_mixed_basis(label, l)).transpose()?;
    let image: Vec<usize> = match l {
        Some(l) if classify(label, l)? == Classification::SplitsInTwo => subrep_image(label, l)?,
        _ => Vec::new(),
    };
    Ok(basis
        .states()
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let p = &s.pattern;
            let c = coordinates(p);
            let class = match (&mixed, l) {
                (Some(mb), _) if mb.role(i) != Role::Plain => "primed",
                _ if image.contains(&i) => "subrep-image",
                (_, Some(l)) if in_teepee(p, l) => "teepee-selfpaired",
                _ => "regular",
            };
            PlotRow {
                index: i,
                p12: p.p12,
                p22: p.p22,
                p11: p.p11,
                x: c.x,
                y: c.y,
                z: c.z,
                class,
            }
        })
        .collect())
}

fn plot_csv(rows: &[PlotRow]) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)
            .map_err(|e| CliError::Io(io::Error::other(e)))?;
    }
    w.into_inner()
        .map_err(|e| CliError::Io(io::Error::other(e.to_string())))
}

fn document<T: Serialize>(cmd: Command, cfg: &RunConfig, passed: bool, report: T) -> Artifact {
    Artifact {
        bytes: to_json(&Document {
            schema: SCHEMA,
            command: cmd,
            config: cfg,
            passed,
            report,
        }),
        passed,
    }
}

/// Runs a command and renders its output without touching the filesystem.
pub fn render(cmd: Command, cfg: &RunConfig) -> Result<Artifact, CliError> {
    if cfg.format == Format::Csv && cmd != Command::Plotdata {
        return Err(CliError::Usage(
            "csv output is only available for plotdata".into(),
        ));
    }
    let root = cfg.root();
    match cmd {
        Command::Build => Ok(document(cmd, cfg, true, build_report(&build(cfg)?))),
        Command::Verify => {
            let v = verify_report(cfg, &build(cfg)?)?;
            Ok(document(cmd, cfg, v.passed, v))
        }
        Command::Analyze => {
            let r = analyze(&cfg.label, root)?;
            Ok(document(cmd, cfg, r.passed, r))
        }
        Command::Plotdata => {
            let rows = plot_rows(&cfg.label, cfg.l)?;
            match cfg.format {
                Format::Csv => Ok(Artifact {
                    bytes: plot_csv(&rows)?,
                    passed: true,
                }),
                Format::Json => Ok(document(cmd, cfg, true, rows)),
            }
        }
        Command::Export => {
            let built = build(cfg)?;
            let verify = verify_report(cfg, &built)?;
            let analyze = analyze(&cfg.label, root)?;
            let passed = verify.passed && analyze.passed;
            let bundle = Bundle {
                build: build_report(&built),
                verify,
                analyze,
                plotdata: plot_rows(&cfg.label, cfg.l)?,
            };
            Ok(document(cmd, cfg, passed, bundle))
        }
    }
}

/// Writes `bytes` to a temporary file next to `path` and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

/// Runs a command, writes the artifact, and returns the exit code.
pub fn run(cmd: Command, cfg: &RunConfig) -> Result<u8, CliError> {
    let art = render(cmd, cfg)?;
    match &cfg.out {
        Some(path) => write_atomic(path, &art.bytes)?,
        None => io::stdout().lock().write_all(&art.bytes)?,
    }
    Ok(if art.passed { 0 } else { 1 })
}

/// Parses `a,b,c` into a label triple.
pub fn parse_rep(s: &str) -> Result<[i64; 3], String> {
    let v: Vec<i64> = s
        .split(',')
        .map(|t| t.trim().parse::<i64>().map_err(|e| format!("{t:?}: {e}")))
        .collect::<Result<_, _>>()?;
    <[i64; 3]>::try_from(v).map_err(|v| format!("expected three integers, got {}", v.len()))
}

/// Reads back the entries of a serialized operator matrix.
pub fn matrix_from_entries(n: usize, entries: &[(usize, usize, C64)]) -> SparseMatrix {
    let mut m = SparseMatrix::zeros(n);
    for &(r, c, v) in entries {
        m.add_at(r, c, v);
    }
    m
}
