//! Command-line front end; `run` returns the process exit code.

use crate::builtins::{self, IndexValue};
use crate::error::{Error, Result};
use crate::io::{MatrixJson, System};
use crate::qca::{doubled_implementation_qca, two_layer_implementation_qca, QcaSystem};
use crate::report::{ReportBuilder, VerificationReport, EXIT_DISAGREEMENT, EXIT_INPUT, EXIT_PASS};
use crate::tolerance::Tolerances;
use crate::verify::{self, VerifyOptions};
use crate::walk::{self, BandedUnitary, WalkCircuit, WalkLayer};
use crate::walk_ti::{dispersion, ti_path};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

#[derive(Parser, Debug)]
#[command(
    name = "lattice-index",
    version,
    about = "Flow indices of walks, automata and reversible rules on rings"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Output file (index, dispersion, verify) or directory (construct).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Momentum grid for dispersion data.
    #[arg(long, global = true, default_value_t = 256)]
    pub grid: usize,
    /// Seed of the single random generator used by checks.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Factor applied to every tolerance.
    #[arg(long, global = true, default_value_t = 1.0)]
    pub tol: f64,
    /// Print machine-readable reports to stdout.
    #[arg(long, global = true)]
    pub json: bool,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Compute the index by every applicable route.
    Index {
        /// System file or `builtin:NAME`.
        input: String,
    },
    /// Build a witness and write it next to a report.
    Construct {
        input: String,
        #[arg(long, value_enum)]
        kind: ConstructKind,
        /// Second walk for a crossover.
        #[arg(long)]
        with: Option<String>,
        /// Cut position for decouple and crossover.
        #[arg(long, default_value_t = 0)]
        cut: usize,
        /// Path parameter for path-sample.
        #[arg(long, default_value_t = 0.5)]
        t: f64,
    },
    /// Dispersion branches of a translation-invariant walk as CSV.
    Dispersion { input: String },
    /// Run the full invariant suite.
    Verify {
        input: Option<String>,
        #[arg(long)]
        all_builtin: bool,
    },
    /// List builtin systems.
    Builtins,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ConstructKind {
    Decouple,
    TwoLayer,
    Crossover,
    PathSample,
    Doubled,
}

struct Loaded {
    subject: String,
    system: System,
    expected: Option<IndexValue>,
}

fn load(input: &str) -> Result<Loaded> {
    if let Some(name) = input.strip_prefix("builtin:") {
        let b = builtins::builtin(name)?;
        return Ok(Loaded {
            subject: input.to_string(),
            system: b.system,
            expected: Some(b.expected),
        });
    }
    Ok(Loaded {
        subject: input.to_string(),
        system: System::load(Path::new(input))?,
        expected: None,
    })
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() {
                EXIT_INPUT
            } else {
                EXIT_PASS
            };
            let _ = if e.use_stderr() {
                write!(stderr, "{e}")
            } else {
                write!(stdout, "{e}")
            };
            return code;
        }
    };
    if !(cli.tol.is_finite() && cli.tol > 0.0) {
        let _ = writeln!(stderr, "error: --tol must be a positive number");
        return EXIT_INPUT;
    }
    let opts = VerifyOptions {
        tol: Tolerances::scaled(cli.tol),
        grid: cli.grid,
        seed: cli.seed,
    };
    let outcome = match &cli.command {
        Command::Index { input } => cmd_index(&cli, input, &opts, stdout),
        Command::Construct {
            input,
            kind,
            with,
            cut,
            t,
        } => cmd_construct(&cli, input, *kind, with.as_deref(), *cut, *t, &opts, stdout),
        Command::Dispersion { input } => cmd_dispersion(&cli, input, stdout, stderr),
        Command::Verify { input, all_builtin } => {
            cmd_verify(&cli, input.as_deref(), *all_builtin, &opts, stdout)
        }
        Command::Builtins => builtins::all().map(|all| {
            for b in all {
                let _ = writeln!(
                    stdout,
                    "{:<24} {:>5}  {}",
                    b.name,
                    b.expected.to_string(),
                    b.summary
                );
            }
            EXIT_PASS
        }),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            if e.is_disagreement() {
                EXIT_DISAGREEMENT
            } else {
                EXIT_INPUT
            }
        }
    }
}

fn emit(cli: &Cli, r: &VerificationReport, stdout: &mut dyn Write) -> Result<()> {
    if cli.json {
        writeln!(stdout, "{}", serde_json::to_string_pretty(r)?)?;
    } else {
        writeln!(stdout, "{r}")?;
    }
    Ok(())
}

fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    fs::write(path, serde_json::to_string_pretty(value)?)?;
    Ok(())
}

fn input_failure(subject: &str, e: &Error) -> VerificationReport {
    let mut b = ReportBuilder::new(subject, "unknown", "");
    b.error("load", e);
    b.finish()
}

fn cmd_index(cli: &Cli, input: &str, opts: &VerifyOptions, stdout: &mut dyn Write) -> Result<i32> {
    let r = match load(input) {
        Ok(l) => verify::index_report(&l.subject, &l.system, l.expected, opts),
        Err(e) => input_failure(input, &e),
    };
    emit(cli, &r, stdout)?;
    if let Some(path) = &cli.out {
        write_json(path, &r)?;
    }
    Ok(r.exit_code())
}

fn cmd_verify(
    cli: &Cli,
    input: Option<&str>,
    all_builtin: bool,
    opts: &VerifyOptions,
    stdout: &mut dyn Write,
) -> Result<i32> {
    let reports: Vec<VerificationReport> = if all_builtin {
        let all = builtins::all()?;
        // independent suites run concurrently; results keep builtin order
        std::thread::scope(|scope| {
            let handles: Vec<_> = all
                .iter()
                .map(|b| scope.spawn(move || verify::verify_builtin(b, opts)))
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("verification thread panicked"))
                .collect()
        })
    } else {
        let Some(input) = input else {
            return Err(Error::Parse(
                "verify needs a path, builtin:NAME or --all-builtin".into(),
            ));
        };
        vec![match load(input) {
            Ok(l) => verify::verify_report(&l.subject, &l.system, l.expected, opts),
            Err(e) => input_failure(input, &e),
        }]
    };
    if cli.json {
        writeln!(stdout, "{}", serde_json::to_string_pretty(&reports)?)?;
    } else {
        for r in &reports {
            writeln!(stdout, "{r}")?;
        }
        let passed = reports.iter().filter(|r| r.pass).count();
        writeln!(stdout, "{passed}/{} suites passed", reports.len())?;
    }
    if let Some(path) = &cli.out {
        write_json(path, &reports)?;
    }
    let code = if reports.iter().any(|r| r.exit_code() == EXIT_INPUT) {
        EXIT_INPUT
    } else if reports.iter().any(|r| !r.pass) {
        EXIT_DISAGREEMENT
    } else {
        EXIT_PASS
    };
    Ok(code)
}

fn cmd_dispersion(
    cli: &Cli,
    input: &str,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<i32> {
    let l = load(input)?;
    let System::TiWalk(u) = &l.system else {
        return Err(Error::Parse(format!(
            "dispersion needs a ti_walk, got {}",
            l.system.kind()
        )));
    };
    let d = dispersion(u, cli.grid)?;
    let csv = d.to_csv();
    match &cli.out {
        Some(path) => fs::write(path, &csv)?,
        None if !cli.json => stdout.write_all(csv.as_bytes())?,
        None => {}
    }
    let index = crate::walk_ti::index_coefficient(u)?;
    if cli.json {
        #[derive(Serialize)]
        struct Summary<'a> {
            subject: &'a str,
            grid: usize,
            winding_sum: i64,
            index: i64,
            branch_winding: &'a [f64],
            min_overlap: f64,
        }
        let s = Summary {
            subject: &l.subject,
            grid: cli.grid,
            winding_sum: d.winding_sum,
            index,
            branch_winding: &d.branch_winding,
            min_overlap: d.min_overlap,
        };
        writeln!(stdout, "{}", serde_json::to_string_pretty(&s)?)?;
    } else {
        // keep stdout pure CSV when the data goes there
        let line = format!(
            "winding sum {} (grid {}), index {index}",
            d.winding_sum, cli.grid
        );
        if cli.out.is_some() {
            writeln!(stdout, "{line}")?;
        } else {
            writeln!(stderr, "{line}")?;
        }
    }
    Ok(if d.winding_sum == index {
        EXIT_PASS
    } else {
        EXIT_DISAGREEMENT
    })
}

#[derive(Serialize)]
struct LocalJson {
    start: usize,
    len: usize,
    matrix: MatrixJson,
}

#[derive(Serialize)]
struct DoubledQcaJson {
    dims: Vec<usize>,
    t: Vec<LocalJson>,
}

#[derive(Serialize)]
struct DoubledWalkJson {
    dims: Vec<usize>,
    reach: usize,
    locals: Vec<MatrixJson>,
}

/// Files written by a construction, relative to the output directory.
type Artifacts = Vec<(String, String)>;

fn save(dir: &Path, name: &str, sys: &System, files: &mut Artifacts) -> Result<()> {
    sys.save(&dir.join(name))?;
    files.push((name.to_string(), sys.kind().to_string()));
    Ok(())
}

fn banded(sys: &System) -> Result<BandedUnitary> {
    match sys {
        System::Walk(u) => Ok(u.clone()),
        System::WalkCircuit(c) => c.to_banded(),
        other => Err(Error::Parse(format!(
            "this construction needs a walk, got {}",
            other.kind()
        ))),
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_construct(
    cli: &Cli,
    input: &str,
    kind: ConstructKind,
    with: Option<&str>,
    cut: usize,
    t: f64,
    opts: &VerifyOptions,
    stdout: &mut dyn Write,
) -> Result<i32> {
    let l = load(input)?;
    let dir = cli.out.clone().unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&dir)?;
    let canonical = l.system.to_json()?;
    let mut b = ReportBuilder::new(
        &format!("{} {}", kind_name(kind), l.subject),
        l.system.kind(),
        &canonical,
    );
    let mut files = Artifacts::new();
    let tol = &opts.tol;
    let result: Result<()> = (|| {
        match (kind, &l.system) {
            (ConstructKind::Decouple, sys) => {
                let u = banded(sys)?;
                let d = walk::decouple(&u, cut)?;
                b.route("cut sum", 0);
                b.residual("crossing blocks", d.residual, tol.reconstruction);
                save(
                    &dir,
                    "decoupler.json",
                    &System::Walk(d.to_banded(u.structure())?),
                    &mut files,
                )?;
            }
            (ConstructKind::TwoLayer, System::Qca(q)) => {
                let tl = two_layer_implementation_qca(q)?;
                b.route("support algebras", "1/1");
                b.residual(
                    "reconstruction",
                    tl.reconstruction_residual,
                    tol.reconstruction,
                );
                let s = q.structure().clone();
                save(
                    &dir,
                    "layer1.json",
                    &System::Qca(QcaSystem::circuit(s.clone(), vec![tl.first.clone()])?),
                    &mut files,
                )?;
                save(
                    &dir,
                    "layer2.json",
                    &System::Qca(QcaSystem::circuit(s, vec![tl.second.clone()])?),
                    &mut files,
                )?;
            }
            (ConstructKind::TwoLayer, sys) => {
                let u = grouped(&banded(sys)?)?;
                let tl = walk::two_layer_implementation(&u)?;
                b.route("cut sum", 0);
                b.residual(
                    "reconstruction",
                    tl.reconstruction_residual,
                    tol.reconstruction,
                );
                b.residual("crossing blocks", tl.block_residual, tol.reconstruction);
                let s = u.structure().clone();
                for (name, layer) in [("layer1.json", &tl.first), ("layer2.json", &tl.second)] {
                    let c = WalkCircuit {
                        structure: s.clone(),
                        layers: vec![WalkLayer::Partition(layer.clone())],
                    };
                    save(&dir, name, &System::WalkCircuit(c), &mut files)?;
                }
            }
            (ConstructKind::Crossover, sys) => {
                let other =
                    with.ok_or_else(|| Error::Parse("crossover needs --with PATH".into()))?;
                let (u1, u2) = (banded(sys)?, banded(&load(other)?.system)?);
                let c = walk::crossover(&u1, &u2, cut)?;
                b.route("index", walk::index_all_cuts(&c.walk)?);
                b.residual("local blocks", c.block_residual, tol.reconstruction);
                save(&dir, "crossover.json", &System::Walk(c.walk), &mut files)?;
            }
            (ConstructKind::PathSample, System::TiWalk(u)) => {
                let p = ti_path(u, t)?;
                b.route("factorization shift sum", 0);
                b.residual(
                    "paraunitarity",
                    p.paraunitarity_residual(),
                    tol.reconstruction,
                );
                save(&dir, "sample.json", &System::TiWalk(p), &mut files)?;
            }
            (ConstructKind::PathSample, System::Qca(q)) => {
                let p = q.gate_path(t)?;
                let (idx, _) = crate::qca::index_support(&p)?;
                b.route("support algebras", idx);
                save(&dir, "sample.json", &System::Qca(p), &mut files)?;
            }
            (ConstructKind::PathSample, sys) => {
                let u = grouped(&banded(sys)?)?;
                let path = walk::connect_to_identity(&u)?;
                let v = path.sample(t)?;
                b.route("cut sum", walk::index_all_cuts(&v)?);
                b.residual(
                    "unitarity",
                    crate::linalg::unitarity_residual(v.matrix()),
                    tol.reconstruction,
                );
                b.check("band", v.band() <= 2, format!("band {}", v.band()));
                save(&dir, "sample.json", &System::Walk(v), &mut files)?;
            }
            (ConstructKind::Doubled, System::Qca(q)) => {
                let d = doubled_implementation_qca(q)?;
                b.route("support algebras", crate::qca::index_support(q)?.0);
                b.residual("forward", d.forward_residual, tol.reconstruction);
                b.residual("backward", d.backward_residual, tol.reconstruction);
                b.residual("commutation", d.commutation_residual, tol.unitarity);
                let out = DoubledQcaJson {
                    dims: d.structure.dims().to_vec(),
                    t: d.t
                        .iter()
                        .map(|x| LocalJson {
                            start: x.interval().start,
                            len: x.interval().len,
                            matrix: MatrixJson::from_mat(x.matrix()),
                        })
                        .collect(),
                };
                write_json(&dir.join("doubled.json"), &out)?;
                files.push(("doubled.json".into(), "doubled_qca".into()));
            }
            (ConstructKind::Doubled, sys) => {
                let u = banded(sys)?;
                let d = walk::doubled_implementation(&u)?;
                b.route("cut sum", walk::index_all_cuts(&u)?);
                b.residual("product", d.product_residual, tol.reconstruction);
                b.residual("commutators", d.commutator_residual, tol.reconstruction);
                let out = DoubledWalkJson {
                    dims: d.structure.dims().to_vec(),
                    reach: d.reach,
                    locals: d.locals.iter().map(MatrixJson::from_mat).collect(),
                };
                write_json(&dir.join("doubled.json"), &out)?;
                files.push(("doubled.json".into(), "doubled_walk".into()));
            }
        }
        Ok(())
    })();
    if let Err(e) = result {
        b.error(kind_name(kind), &e);
    }
    let r = b.finish();
    emit(cli, &r, stdout)?;
    if !cli.json {
        for (name, kind) in &files {
            writeln!(stdout, "  wrote {} ({kind})", dir.join(name).display())?;
        }
    }
    write_json(&dir.join("report.json"), &r)?;
    Ok(r.exit_code())
}

/// Nearest-neighbour view of a walk, grouping sites by its band.
fn grouped(u: &BandedUnitary) -> Result<BandedUnitary> {
    match u.band() {
        0 | 1 => Ok(u.clone()),
        g => u.regroup(g),
    }
}

fn kind_name(k: ConstructKind) -> &'static str {
    match k {
        ConstructKind::Decouple => "decouple",
        ConstructKind::TwoLayer => "two-layer",
        ConstructKind::Crossover => "crossover",
        ConstructKind::PathSample => "path-sample",
        ConstructKind::Doubled => "doubled",
    }
}
