//! Command-line front end: every subcommand prints one JSON report and maps
//! its outcome to an exit code.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use almostflat::bundle::{BundleJson, CocycleBundle};
use almostflat::chern_karea::{chern_report, clock_shift_probe, probe_verdict};
use almostflat::fixtures::{monopole_bundle, random_flat_bundle, sphere_complex, torus_presentation};
use almostflat::matrixcore::AUDIT_TOL;
use almostflat::quasirep::{bundle_to_rep, rep_to_bundle_with_depth, z2_presentation, AlmostRep};
use almostflat::simplicial::{maximal_tree, presentation_from_tree, Complex, ComplexJson, Simplex};
use almostflat::trivialize::{extend_to, trivialize_contractible};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Map, Value};
use thiserror::Error;

pub const SCHEMA: &str = "1";

pub const EXIT_PASS: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_FAIL: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "almostflat", version, about = "Verification reports for almost flat bundles")]
struct Cli {
    #[command(flatten)]
    global: GlobalOpts,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct GlobalOpts {
    /// Tolerance of the cocycle check.
    #[arg(long, global = true, default_value_t = AUDIT_TOL)]
    tol: f64,
    /// Lattice depth of generated bundles.
    #[arg(long, global = true, default_value_t = 4)]
    lattice_depth: u32,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Closure and orientation audit of a complex.
    Validate { complex: PathBuf },
    /// Flatness audit and cocycle check of a bundle.
    Audit { bundle: PathBuf },
    /// Global trivialization of a bundle over a contractible complex.
    Trivialize {
        bundle: PathBuf,
        #[arg(long, value_enum, default_value_t = TreeChoice::Auto)]
        tree: TreeChoice,
    },
    /// Extends a bundle over higher skeleta.
    Extend {
        bundle: PathBuf,
        #[arg(long)]
        to_skeleton: usize,
        /// Target complex; defaults to the full simplex on the base vertices.
        #[arg(long)]
        complex: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Chern number of a bundle over a closed oriented surface.
    Chern { bundle: PathBuf },
    /// Bundle from an almost representation.
    Rep2bundle {
        rep: PathBuf,
        #[arg(long, value_enum)]
        base: Base,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Almost representation from the edge presentation of the base.
    Bundle2rep {
        bundle: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Finite K-area probe.
    Probe {
        #[arg(long, value_delimiter = ',', required = true)]
        clock_shift: Vec<usize>,
    },
    /// Generated bundles.
    Fixture {
        #[command(subcommand)]
        kind: FixtureKind,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum TreeChoice {
    Auto,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Base {
    Torus7,
}

#[derive(Debug, Subcommand)]
enum FixtureKind {
    /// Line bundle of charge q on the subdivided octahedral sphere.
    Monopole {
        #[arg(long, allow_hyphen_values = true)]
        q: i32,
        #[arg(long, default_value_t = 2)]
        depth: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Random flat bundle on a complex, seeded by `--seed`.
    Random {
        complex: PathBuf,
        #[arg(long, default_value_t = 1)]
        rank: usize,
        #[arg(long, default_value_t = 0.01)]
        amplitude: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Refused(#[from] almostflat::Error),
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Exit code and standard output of one invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
}

impl Outcome {
    pub fn report(&self) -> Option<Value> {
        serde_json::from_str(&self.stdout).ok()
    }
}

/// Runs one invocation; `args` starts with the program name.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
            let text = e.render().to_string();
            if code == EXIT_PASS {
                return Outcome { code, stdout: text };
            }
            return failure(EXIT_USAGE, "usage", "usage", &text);
        }
    };
    let command = command_name(&cli.command);
    match dispatch(&cli) {
        Ok((pass, body)) => {
            let mut report = body;
            report.insert("schema".into(), json!(SCHEMA));
            report.insert("command".into(), json!(command));
            report.insert("pass".into(), json!(pass));
            Outcome { code: if pass { EXIT_PASS } else { EXIT_FAIL }, stdout: render(Value::Object(report)) }
        }
        Err(CliError::Input(msg)) => failure(EXIT_USAGE, command, "input", &msg),
        Err(CliError::Refused(almostflat::Error::Format(msg))) => failure(EXIT_USAGE, command, "input", &msg),
        Err(CliError::Refused(e)) => failure(EXIT_FAIL, command, error_kind(&e), &e.to_string()),
    }
}

fn failure(code: i32, command: &str, kind: &str, message: &str) -> Outcome {
    let report = json!({
        "schema": SCHEMA,
        "command": command,
        "pass": false,
        "error": { "kind": kind, "message": message.trim_end() },
    });
    Outcome { code, stdout: render(report) }
}

fn render(v: Value) -> String {
    let mut s = serde_json::to_string_pretty(&v).expect("reports serialize");
    s.push('\n');
    s
}

fn error_kind(e: &almostflat::Error) -> &'static str {
    use almostflat::Error::*;
    match e {
        Threshold { .. } => "threshold",
        Precondition(_) => "precondition",
        AmbiguousFlux { .. } => "ambiguous_flux",
        Missing(_) => "missing",
        InvalidWitness { .. } => "invalid_witness",
        Mismatch(_) => "mismatch",
        InvalidComplex(_) | NotASimplex(_) | UnknownVertex(_) | Disconnected => "complex",
        InvalidPath(_) => "path",
        Format(_) => "input",
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Validate { .. } => "validate",
        Command::Audit { .. } => "audit",
        Command::Trivialize { .. } => "trivialize",
        Command::Extend { .. } => "extend",
        Command::Chern { .. } => "chern",
        Command::Rep2bundle { .. } => "rep2bundle",
        Command::Bundle2rep { .. } => "bundle2rep",
        Command::Probe { .. } => "probe",
        Command::Fixture { .. } => "fixture",
    }
}

fn dispatch(cli: &Cli) -> CliResult<(bool, Map<String, Value>)> {
    let g = &cli.global;
    match &cli.command {
        Command::Validate { complex } => validate(&read_complex(complex)?),
        Command::Audit { bundle } => audit(&read_bundle(bundle)?, g.tol),
        Command::Trivialize { bundle, tree: TreeChoice::Auto } => trivialize(&read_bundle(bundle)?),
        Command::Extend { bundle, to_skeleton, complex, out } => {
            let e = read_bundle(bundle)?;
            let target = match complex {
                Some(path) => read_complex(path)?,
                None => full_simplex_on(e.base())?,
            };
            extend(&e, &target, *to_skeleton, out.as_deref())
        }
        Command::Chern { bundle } => chern(&read_bundle(bundle)?),
        Command::Rep2bundle { rep, base: Base::Torus7, out } => rep2bundle(&read_rep(rep)?, g.lattice_depth, out.as_deref()),
        Command::Bundle2rep { bundle, out } => bundle2rep(&read_bundle(bundle)?, out.as_deref()),
        Command::Probe { clock_shift } => probe(clock_shift, g.lattice_depth),
        Command::Fixture { kind: FixtureKind::Monopole { q, depth, out } } => {
            let e = monopole_bundle(&sphere_complex(*depth), *q, g.lattice_depth)?;
            let mut r = Map::new();
            r.insert("fixture".into(), json!({ "kind": "monopole", "q": q, "depth": depth }));
            r.insert("audit".into(), json!(e.audit()));
            emit_bundle(&mut r, &e, out.as_deref())?;
            Ok((true, r))
        }
        Command::Fixture { kind: FixtureKind::Random { complex, rank, amplitude, out } } => {
            let x = read_complex(complex)?;
            let mut rng = ChaCha8Rng::seed_from_u64(g.seed);
            let e = random_flat_bundle(&x, *rank, g.lattice_depth, *amplitude, &mut rng)?;
            let mut r = Map::new();
            r.insert("fixture".into(), json!({ "kind": "random", "rank": rank, "amplitude": amplitude, "seed": g.seed }));
            r.insert("audit".into(), json!(e.audit()));
            emit_bundle(&mut r, &e, out.as_deref())?;
            Ok((true, r))
        }
    }
}

fn read_json(path: &Path) -> CliResult<Value> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

/// Accepts a bare object or a report carrying it under `key`.
fn unwrap_field(v: Value, key: &str) -> Value {
    match v {
        Value::Object(mut m) if m.contains_key("schema") && m.contains_key(key) => m.remove(key).unwrap(),
        other => other,
    }
}

fn parse<T: serde::de::DeserializeOwned>(v: Value, path: &Path) -> CliResult<T> {
    serde_json::from_value(v).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn read_complex(path: &Path) -> CliResult<Complex> {
    let json: ComplexJson = parse(unwrap_field(read_json(path)?, "complex"), path)?;
    Complex::from_json(&json).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn read_bundle(path: &Path) -> CliResult<CocycleBundle> {
    let json: BundleJson = parse(unwrap_field(read_json(path)?, "bundle"), path)?;
    CocycleBundle::from_json(&json).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn read_rep(path: &Path) -> CliResult<AlmostRep> {
    let rep: AlmostRep = parse(unwrap_field(read_json(path)?, "rep"), path)?;
    AlmostRep::new(rep.presentation, rep.images).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn write_out(path: &Path, v: &impl serde::Serialize) -> CliResult<()> {
    let text = serde_json::to_string(v).expect("serializable");
    std::fs::write(path, text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn emit_bundle(r: &mut Map<String, Value>, e: &CocycleBundle, out: Option<&Path>) -> CliResult<()> {
    match out {
        Some(path) => {
            write_out(path, &e.to_json())?;
            r.insert("written".into(), json!(path.display().to_string()));
        }
        None => {
            r.insert("bundle".into(), serde_json::to_value(e.to_json()).expect("serializable"));
        }
    }
    Ok(())
}

fn full_simplex_on(x: &Complex) -> CliResult<Complex> {
    Ok(Complex::from_simplices([Simplex::new(x.vertices().to_vec())?]))
}

fn validate(x: &Complex) -> CliResult<(bool, Map<String, Value>)> {
    let counts: Vec<usize> = (0..=x.dim()).map(|k| x.count_dim(k)).collect();
    let surface = x.check_closed_surface();
    let mut r = Map::new();
    r.insert("dimension".into(), json!(x.dim()));
    r.insert("counts".into(), json!(counts));
    r.insert("euler_characteristic".into(), json!(x.euler_characteristic()));
    r.insert("oriented".into(), json!(x.orientation().is_some()));
    r.insert("closed_oriented_surface".into(), json!(surface.is_ok()));
    if let Err(e) = surface {
        r.insert("surface_note".into(), json!(e.to_string()));
    }
    Ok((true, r))
}

fn audit(e: &CocycleBundle, tol: f64) -> CliResult<(bool, Map<String, Value>)> {
    let flat = e.flatness_audit();
    let check = e.cocycle_check(tol);
    let mut r = Map::new();
    r.insert("rank".into(), json!(e.rank()));
    r.insert("lattice_depth".into(), json!(e.depth()));
    r.insert("epsilon".into(), json!(flat.epsilon));
    r.insert("worst_pair".into(), json!(flat.worst));
    r.insert("tolerance".into(), json!(tol));
    r.insert("cocycle".into(), serde_json::to_value(&check).expect("serializable"));
    Ok((check.pass, r))
}

fn trivialize(e: &CocycleBundle) -> CliResult<(bool, Map<String, Value>)> {
    let g = trivialize_contractible(e)?;
    let certificates: Vec<Value> = g
        .certificates
        .iter()
        .map(|c| json!({ "edge": [c.edge.0, c.edge.1], "defect": c.defect, "bound": c.bound }))
        .collect();
    let mut r = Map::new();
    r.insert("epsilon".into(), json!(e.audit()));
    r.insert("chart_lipschitz".into(), json!(g.lipschitz()));
    r.insert("compatibility_residual".into(), json!(g.compatibility_residual(e)?));
    r.insert("certificates".into(), json!(certificates));
    Ok((true, r))
}

fn extend(e: &CocycleBundle, target: &Complex, k: usize, out: Option<&Path>) -> CliResult<(bool, Map<String, Value>)> {
    if k > target.dim() {
        return Err(CliError::Input(format!("the target complex has no {k}-skeleton beyond dimension {}", target.dim())));
    }
    let bigger = e.base().dim().max(k);
    let extended = extend_to(e, &target.skeleton(bigger))?;
    let mut r = Map::new();
    r.insert("from_dimension".into(), json!(e.base().dim()));
    r.insert("to_dimension".into(), json!(extended.base().dim()));
    r.insert("epsilon_before".into(), json!(e.audit()));
    r.insert("epsilon_after".into(), json!(extended.audit()));
    emit_bundle(&mut r, &extended, out)?;
    Ok((true, r))
}

fn chern(e: &CocycleBundle) -> CliResult<(bool, Map<String, Value>)> {
    let report = chern_report(e)?;
    let mut r = Map::new();
    r.insert("chern".into(), json!(report.chern));
    r.insert("total_flux".into(), json!(report.total_flux));
    r.insert("residue".into(), json!(report.residue));
    r.insert("faces".into(), serde_json::to_value(&report.faces).expect("serializable"));
    Ok((true, r))
}

fn rep2bundle(phi: &AlmostRep, depth: u32, out: Option<&Path>) -> CliResult<(bool, Map<String, Value>)> {
    let (x, tree, p) = torus_presentation();
    let on_torus = if phi.presentation == z2_presentation() {
        almostflat::fixtures::torus_rep(phi, &p)?
    } else if phi.presentation == p {
        phi.clone()
    } else {
        return Err(CliError::Input(
            "representation must be of ⟨u, v | [u, v]⟩ or of the edge presentation of the 7-vertex torus".into(),
        ));
    };
    let e = rep_to_bundle_with_depth(&on_torus, &x, &tree, &p, depth)?;
    let mut r = Map::new();
    r.insert("rank".into(), json!(phi.rank()));
    r.insert("defect".into(), json!(phi.defect()));
    r.insert("edge_presentation_defect".into(), json!(on_torus.defect()));
    r.insert("epsilon".into(), json!(e.audit()));
    emit_bundle(&mut r, &e, out)?;
    Ok((true, r))
}

fn bundle2rep(e: &CocycleBundle, out: Option<&Path>) -> CliResult<(bool, Map<String, Value>)> {
    let x = e.base();
    let tree = maximal_tree(x)?;
    let root = *x.vertices().first().ok_or_else(|| CliError::Input("empty complex".into()))?;
    let p = presentation_from_tree(x, &tree, root)?;
    let phi = bundle_to_rep(e, &p)?;
    let mut r = Map::new();
    r.insert("generators".into(), json!(p.generators.len()));
    r.insert("relations".into(), json!(p.relations.len()));
    r.insert("defect".into(), json!(phi.defect()));
    r.insert("epsilon".into(), json!(e.audit()));
    match out {
        Some(path) => {
            write_out(path, &phi)?;
            r.insert("written".into(), json!(path.display().to_string()));
        }
        None => {
            r.insert("rep".into(), serde_json::to_value(&phi).expect("serializable"));
        }
    }
    Ok((true, r))
}

fn probe(ks: &[usize], depth: u32) -> CliResult<(bool, Map<String, Value>)> {
    let p = clock_shift_probe(ks, depth)?;
    let verdict = probe_verdict(&p)?;
    let mut r = Map::new();
    r.insert("witness".into(), json!(verdict.witness));
    r.insert("depth".into(), json!(verdict.depth));
    r.insert("reason".into(), json!(verdict.reason));
    r.insert("rows".into(), serde_json::to_value(&verdict.rows).expect("serializable"));
    Ok((verdict.witness, r))
}
