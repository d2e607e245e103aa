//! Command-line front end.
//!
//! Exit codes: 0 success, 1 a check failed or a pipeline stage errored,
//! 2 bad arguments, unreadable files or malformed input.

pub mod json;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::discriminate::{discriminate_with, specialize, Homomorphism, PipelineOptions};
use crate::error::{Error, Result};
use crate::fgl::FormalGroupLaw;
use crate::lazard::{build_rep, Lazard, RepStrategy, UniformEmbedding};
use crate::selftest;
use crate::sentences::{check_transfer, parse_sentence};
use crate::zp::is_prime;
use json::{CertificateFile, LawFile, Overrides, PointsFile, RepFile};

#[derive(Parser, Debug)]
#[command(name = "padic-linear", version, about = "p-adic standard groups, Lazard embeddings and discrimination certificates")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone, Default)]
pub struct GlobalArgs {
    /// Override the precision k of the law file.
    #[arg(long, global = true)]
    pub precision: Option<u32>,
    /// Override the degree cutoff D of the law file.
    #[arg(long, global = true)]
    pub cutoff: Option<u32>,
    /// Search budget B for evaluation points.
    #[arg(long, global = true)]
    pub budget: Option<u64>,
    /// Write the JSON report here instead of standard output.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum StrategyArg {
    Auto,
    Abelian,
    Adjoint,
    Nilpotent,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Check the formal group law axioms.
    Validate { law: PathBuf },
    /// Multiply the points of a file in order.
    Mul { law: PathBuf, points: PathBuf },
    /// Invert each point of a file.
    Inv { law: PathBuf, points: PathBuf },
    /// Group commutator and Lazard bracket of two points.
    Bracket { law: PathBuf, points: PathBuf },
    /// Structure constants of the Lie lattice of a law over Zp.
    Lattice { law: PathBuf },
    /// Build and certify the embedding into GL_n(Zp).
    Represent {
        law: PathBuf,
        #[arg(long, value_enum, default_value = "auto")]
        strategy: StrategyArg,
        /// JSON file {"images": [...]} with a representation to fall back on.
        #[arg(long)]
        rep: Option<PathBuf>,
        #[arg(long, default_value_t = 100)]
        pairs: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Separate a finite point set by a homomorphism into GL_n(Zp).
    Discriminate {
        law: PathBuf,
        points: PathBuf,
        #[arg(long, value_enum, default_value = "auto")]
        strategy: StrategyArg,
        #[arg(long)]
        rep: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Check an existential sentence and its transfer through a certificate.
    Check {
        law: PathBuf,
        certificate: PathBuf,
        sentence: PathBuf,
        witness: PathBuf,
    },
    /// Run the built-in acceptance suite.
    Selftest,
}

/// Validated run parameters.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub prime: u64,
    pub precision: u32,
    pub cutoff: u32,
    pub budget: u64,
    pub inputs: Vec<PathBuf>,
    pub output: Option<PathBuf>,
    pub command: &'static str,
}

impl RunConfig {
    pub fn check(&self) -> Result<()> {
        if !is_prime(self.prime) {
            return Err(Error::InvalidPrime(self.prime));
        }
        if self.precision < 1 {
            return Err(Error::InvalidPrecision(self.precision));
        }
        if self.cutoff < 2 {
            return Err(Error::InvalidInput(format!("degree cutoff {} below 2", self.cutoff)));
        }
        if self.budget < 1 {
            return Err(Error::InvalidInput("budget must be at least 1".into()));
        }
        Ok(())
    }
}

/// Failure modes mapped onto exit codes.
enum Failure {
    /// Exit 1.
    Check(String),
    /// Exit 2.
    Input(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Check(e.to_string())
    }
}

fn input(e: impl std::fmt::Display) -> Failure {
    Failure::Input(e.to_string())
}

struct Outcome {
    report: Value,
    summary: String,
    ok: bool,
}

fn read(path: &Path) -> std::result::Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

const DEFAULT_BUDGET: u64 = 8;

struct Loaded {
    law: FormalGroupLaw,
}

fn load_law(path: &Path, g: &GlobalArgs, command: &'static str) -> std::result::Result<Loaded, Failure> {
    let file: LawFile = json::parse(&read(path)?, &path.display().to_string()).map_err(input)?;
    let config = RunConfig {
        prime: file.prime,
        precision: g.precision.unwrap_or(file.precision),
        cutoff: g.cutoff.unwrap_or(file.degree_cutoff),
        budget: g.budget.unwrap_or(DEFAULT_BUDGET),
        inputs: vec![path.to_path_buf()],
        output: g.output.clone(),
        command,
    };
    config.check().map_err(input)?;
    let law = file
        .to_law(Overrides {
            precision: g.precision,
            cutoff: g.cutoff,
        })
        .map_err(input)?;
    Ok(Loaded { law })
}

fn load_points(path: &Path, law: &FormalGroupLaw) -> std::result::Result<(Vec<crate::fgl::StandardPoint>, Option<Vec<crate::fgl::StandardPoint>>), Failure> {
    let file: PointsFile = json::parse(&read(path)?, &path.display().to_string()).map_err(input)?;
    let points = json::points_from(law, &file.points).map_err(input)?;
    let constants = match &file.constants {
        Some(c) => Some(json::points_from(law, c).map_err(input)?),
        None => None,
    };
    Ok((points, constants))
}

fn strategy(arg: StrategyArg, rep: Option<&Path>, law: &FormalGroupLaw) -> std::result::Result<RepStrategy, Failure> {
    let supplied = match rep {
        Some(path) => {
            let file: RepFile = json::parse(&read(path)?, &path.display().to_string()).map_err(input)?;
            let images = file
                .images
                .iter()
                .map(|m| json::matrix_from(law.zp(), m))
                .collect::<Result<Vec<_>>>()
                .map_err(input)?;
            Some(images)
        }
        None => None,
    };
    Ok(match (arg, supplied) {
        (StrategyArg::Auto, s) => RepStrategy::Auto(s),
        (_, Some(s)) => RepStrategy::Supplied(s),
        (StrategyArg::Abelian, None) => RepStrategy::Abelian,
        (StrategyArg::Adjoint, None) => RepStrategy::Adjoint,
        (StrategyArg::Nilpotent, None) => RepStrategy::Nilpotent,
    })
}

fn execute(cli: &Cli) -> std::result::Result<Outcome, Failure> {
    let g = &cli.global;
    match &cli.command {
        Command::Validate { law } => {
            let l = load_law(law, g, "validate")?.law;
            let report = l.validate();
            let mut summary = format!("validate: {}", if report.passed() { "all axioms hold" } else { "FAILED" });
            for c in report.failures() {
                summary.push_str(&format!(
                    "\n  {}: witness {}",
                    c.axiom,
                    c.witness.as_deref().unwrap_or("-")
                ));
            }
            Ok(Outcome {
                report: json::validation(&report),
                summary,
                ok: report.passed(),
            })
        }
        Command::Mul { law, points } => {
            let l = load_law(law, g, "mul")?.law;
            let (pts, _) = load_points(points, &l)?;
            let mut acc = l.identity();
            for p in &pts {
                acc = l.gmul(&acc, p)?;
            }
            Ok(Outcome {
                summary: format!("product of {} points: {acc}", pts.len()),
                report: json!({ "product": json::point(&acc) }),
                ok: true,
            })
        }
        Command::Inv { law, points } => {
            let l = load_law(law, g, "inv")?.law;
            let (pts, _) = load_points(points, &l)?;
            let inv = pts.iter().map(|p| l.ginv(p)).collect::<Result<Vec<_>>>()?;
            Ok(Outcome {
                summary: format!("inverted {} points", inv.len()),
                report: json!({ "inverses": inv.iter().map(json::point).collect::<Vec<_>>() }),
                ok: true,
            })
        }
        Command::Bracket { law, points } => {
            let l = load_law(law, g, "bracket")?.law;
            let (pts, _) = load_points(points, &l)?;
            if pts.len() != 2 {
                return Err(Failure::Input(format!("bracket needs exactly 2 points, found {}", pts.len())));
            }
            let comm = l.gcomm(&pts[0], &pts[1])?;
            let lazard = if l.is_over_zp() {
                let lz = Lazard::new(&l)?;
                let b = lz.lazard_bracket(&pts[0], &pts[1])?;
                json!({ "point": json::point(&b.point), "index": b.index })
            } else {
                Value::Null
            };
            Ok(Outcome {
                summary: format!("commutator {comm}"),
                report: json!({ "commutator": json::point(&comm), "lazard_bracket": lazard }),
                ok: true,
            })
        }
        Command::Lattice { law } => {
            let l = load_law(law, g, "lattice")?.law;
            let lz = Lazard::new(&l)?;
            let lattice = lz.lie_lattice()?;
            Ok(Outcome {
                summary: format!("lattice of rank {}: {} nonzero constants", lattice.rank(), lattice.nonzero_constants().len()),
                report: json!({
                    "lattice": json::lattice(&lattice),
                    "basis": lz.basis().iter().map(json::point).collect::<Vec<_>>(),
                }),
                ok: true,
            })
        }
        Command::Represent {
            law,
            strategy: s,
            rep,
            pairs,
            seed,
        } => {
            let l = load_law(law, g, "represent")?.law;
            let st = strategy(*s, rep.as_deref(), &l)?;
            let lz = Lazard::new(&l)?;
            let lattice = lz.lie_lattice()?;
            let r = build_rep(&lattice, st)?;
            let emb = UniformEmbedding::new(lz, lattice, r)?;
            let cert = emb.certify(&[], *pairs, *seed)?;
            Ok(Outcome {
                summary: format!(
                    "embedding of degree {} (index {}, block {}, strategy {}): {}",
                    cert.degree,
                    cert.index,
                    cert.ell,
                    cert.rep.strategy(),
                    if cert.is_valid() { "certified" } else { "FAILED" }
                ),
                ok: cert.is_valid(),
                report: json::embedding_certificate(&cert),
            })
        }
        Command::Discriminate {
            law,
            points,
            strategy: s,
            rep,
            seed,
        } => {
            let l = load_law(law, g, "discriminate")?.law;
            let (pts, _) = load_points(points, &l)?;
            let options = PipelineOptions {
                budget: g.budget.unwrap_or(DEFAULT_BUDGET),
                strategy: strategy(*s, rep.as_deref(), &l)?,
                seed: *seed,
                ..PipelineOptions::default()
            };
            let cert = discriminate_with(&l, &pts, &options)?;
            let a: Vec<String> = cert.evaluation.point.iter().map(ToString::to_string).collect();
            Ok(Outcome {
                summary: format!(
                    "a = ({}), n = {}, {} points separated: {}",
                    a.join(", "),
                    cert.degree,
                    pts.len(),
                    if cert.is_valid() { "certified" } else { "FAILED" }
                ),
                ok: cert.is_valid(),
                report: json::discrimination_certificate(&cert),
            })
        }
        Command::Check {
            law,
            certificate,
            sentence,
            witness,
        } => {
            let l = load_law(law, g, "check")?.law;
            let cert: CertificateFile =
                json::parse(&read(certificate)?, &certificate.display().to_string()).map_err(input)?;
            if cert.prime != l.descriptor().prime() {
                return Err(Failure::Input(format!(
                    "certificate prime {} differs from law prime {}",
                    cert.prime,
                    l.descriptor().prime()
                )));
            }
            let s = parse_sentence(read(sentence)?.trim()).map_err(input)?;
            let (wit, consts) = load_points(witness, &l)?;
            let zp = l.zp();
            let a: Vec<_> = cert
                .evaluation_point
                .iter()
                .map(|c| zp.scalar(zp.reduce_signed(&c.0)))
                .collect();
            let spec = specialize(&l, &a).map_err(|e| Failure::Check(e.at_stage("specialize").to_string()))?;
            let images = cert
                .rep
                .images
                .iter()
                .map(|m| json::matrix_from(zp, m))
                .collect::<Result<Vec<_>>>()
                .map_err(input)?;
            let hom = Homomorphism::from_specialization(spec, RepStrategy::Supplied(images))?;
            let constants = match consts {
                Some(c) => c,
                None => json::points_from(&l, &cert.points).map_err(input)?,
            };
            let report = check_transfer(&s, &wit, &constants, &hom)?;
            Ok(Outcome {
                summary: format!("{}: {}", report.sentence, report.verdict()),
                ok: report.transferred(),
                report: json::transfer(&report),
            })
        }
        Command::Selftest => {
            let outcomes = selftest::run_all();
            let mut lines = Vec::new();
            let mut total = 0.0;
            for o in &outcomes {
                total += o.seconds;
                lines.push(format!(
                    "criterion {}: {} ({}) {} [{:.2} s]",
                    o.number,
                    if o.passed { "PASS" } else { "FAIL" },
                    o.title,
                    o.detail,
                    o.seconds
                ));
            }
            let within = total < 300.0;
            lines.push(format!(
                "criterion 9: {} (full selftest) {:.1} s, limit 300 s",
                if within { "PASS" } else { "FAIL" },
                total
            ));
            let ok = within && outcomes.iter().all(|o| o.passed);
            Ok(Outcome {
                report: json!({
                    "passed": ok,
                    "criteria": outcomes.iter().map(|o| json!({
                        "number": o.number,
                        "title": o.title,
                        "passed": o.passed,
                        "detail": o.detail,
                    })).collect::<Vec<_>>(),
                }),
                summary: lines.join("\n"),
                ok,
            })
        }
    }
}

/// Runs the command line `args` (including the program name), writing the
/// JSON report and summary to `out` / `err`. Returns the exit code.
pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            if code == 0 {
                let _ = write!(out, "{e}");
            } else {
                let _ = write!(err, "{e}");
            }
            return code;
        }
    };
    match execute(&cli) {
        Ok(o) => {
            let text = serde_json::to_string_pretty(&o.report).expect("serializable") + "\n";
            let written = match &cli.global.output {
                Some(path) => fs::write(path, &text)
                    .map(|_| writeln!(out, "{}", o.summary))
                    .map_err(|e| e.to_string()),
                None => {
                    let _ = out.write_all(text.as_bytes());
                    Ok(writeln!(err, "{}", o.summary))
                }
            };
            if let Err(e) = written {
                let _ = writeln!(err, "error: {e}");
                return 2;
            }
            if o.ok {
                0
            } else {
                1
            }
        }
        Err(Failure::Check(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            1
        }
        Err(Failure::Input(msg)) => {
            let _ = writeln!(err, "input error: {msg}");
            2
        }
    }
}

pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(args, &mut stdout.lock(), &mut stderr.lock())
}
