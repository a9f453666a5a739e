//! The `ionsel` command-line front end.
//!
//! Each subcommand reads one JSON config, runs the corresponding analysis
//! and writes either CSV (traces and grids) or JSON (scalar results). Every
//! float is written with 17 significant digits. Exit codes: 0 success,
//! 1 output failure, 2 invalid config or input, 3 physics precondition
//! violated, 4 numerical failure.

pub mod config;
mod output;

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{json, Value};

use crate::design::{feasibility_with, search};
use crate::error::{Error, ErrorClass};
use crate::evolution::{pi_time, rabi_scan};
use crate::hamiltonians::{effective_hamiltonian, selective_hamiltonian};
use crate::protocols::{
    cpg, cpg_process, generate_fock, measure_population, refine_population, selective_cool, wigner, Shots,
};
use crate::space::{InternalSpace, Level, ModeSpace, SpaceDescriptor};
use crate::state::{fidelity, fock_populations, PureState, State};
use crate::C64;

use config::*;
use output::{normalize_floats, Csv};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_PHYSICS: i32 = 3;
pub const EXIT_NUMERICAL: i32 = 4;

/// Environment variable capping the worker-thread count.
pub const THREADS_ENV: &str = "IONSEL_THREADS";

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Rabi,
    Fock,
    Cool,
    Measure,
    Wigner,
    Cpg,
    Design,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Rabi => "rabi",
            Command::Fock => "fock",
            Command::Cool => "cool",
            Command::Measure => "measure",
            Command::Wigner => "wigner",
            Command::Cpg => "cpg",
            Command::Design => "design",
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "ionsel", version, about = "Selective ion-motion interactions: dynamics, protocols and design")]
pub struct Args {
    #[arg(value_enum)]
    pub command: Command,
    /// JSON configuration file.
    #[arg(long)]
    pub config: PathBuf,
    /// Output file; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Seed for sampled measurements; overrides the config value.
    #[arg(long)]
    pub seed: Option<u64>,
}

/// Failure of a CLI run, carrying its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e.class() {
            ErrorClass::Input => EXIT_CONFIG,
            ErrorClass::Physics => EXIT_PHYSICS,
            ErrorClass::Numerical => EXIT_NUMERICAL,
        };
        Failure { code, message: e.to_string() }
    }
}

fn config_error(message: impl Into<String>) -> Failure {
    Failure { code: EXIT_CONFIG, message: message.into() }
}

fn io_error(path: &Path, e: std::io::Error) -> Failure {
    Failure { code: EXIT_IO, message: format!("{}: {e}", path.display()) }
}

/// Result document ready to be written.
enum Report {
    Json(Value),
    Csv { table: Csv, provenance: Value },
}

struct Context {
    command: Command,
    seed: u64,
}

impl Context {
    fn provenance(&self, mode: Option<&str>, config: &impl Serialize) -> Value {
        json!({
            "tool": "ionsel",
            "version": env!("CARGO_PKG_VERSION"),
            "command": self.command.name(),
            "seed": self.seed,
            "mode": mode,
            "config": serde_json::to_value(config).unwrap_or(Value::Null),
        })
    }
}

fn load<T: DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = fs::read_to_string(path).map_err(|e| config_error(format!("cannot read config {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| config_error(format!("invalid config {}: {e}", path.display())))
}

fn mode_name(mode: crate::protocols::Execution) -> &'static str {
    match mode {
        crate::protocols::Execution::Ideal => "ideal",
        crate::protocols::Execution::Effective => "effective",
    }
}

fn cmd_rabi(cfg: RabiConfig, ctx: &Context) -> Result<Report, Failure> {
    cfg.params.validate()?;
    cfg.selector.validate()?;
    let space = SpaceDescriptor::ion_mode(InternalSpace::TwoLevel, cfg.cutoff)?;
    cfg.selector.check_mode(space.require_mode()?)?;
    let h = match cfg.hamiltonian {
        RabiModel::Selective => selective_hamiltonian(&cfg.params, cfg.selector, &space)?,
        RabiModel::Effective => effective_hamiltonian(&cfg.params, &space)?,
    };
    let unit = pi_time(&cfg.params, cfg.selector, false)?.derived;
    let times = cfg.times.values(unit)?;
    let initial = cfg.initial.unwrap_or(BasisLabel { level: Level::G, n: cfg.selector.n0 });
    let watch = cfg.watch.clone().unwrap_or_else(|| {
        vec![
            BasisLabel { level: Level::G, n: cfg.selector.n0 },
            BasisLabel { level: Level::E, n: cfg.selector.partner() },
        ]
    });
    let index = |b: &BasisLabel| space.basis_index(&[b.level], b.n);
    let psi: State = PureState::basis(&space, index(&initial)?)?.into();
    let watch_idx = watch.iter().map(index).collect::<crate::error::Result<Vec<_>>>()?;
    let trace = rabi_scan(&h, &psi, &times, &watch_idx)?;

    let mut header = vec!["t".to_string()];
    header.extend(trace.labels.iter().map(|l| format!("P({l})")));
    let mut table = Csv::new(header);
    for (t, row) in trace.times.iter().zip(&trace.populations) {
        let mut r = vec![*t];
        r.extend(row);
        table.push(&r);
    }
    Ok(Report::Csv { table, provenance: ctx.provenance(None, &cfg) })
}

fn result_json(ctx: &Context, mode: Option<&str>, cfg: &impl Serialize, result: Value) -> Report {
    Report::Json(json!({ "result": result, "provenance": ctx.provenance(mode, cfg) }))
}

fn cmd_fock(cfg: FockConfig, ctx: &Context) -> Result<Report, Failure> {
    cfg.params.validate()?;
    let motional = cfg.motional.build(cfg.cutoff)?;
    let r = generate_fock(&motional, cfg.n0, &cfg.params, cfg.mode)?;
    let target: State = PureState::fock(ModeSpace::new(cfg.cutoff)?, cfg.n0 + 1)?.into();
    let result = json!({
        "herald_probability": r.herald_probability,
        "herald_level": r.herald_level,
        "duration": r.duration,
        "target_fidelity": fidelity(&r.post_state, &target)?,
        "post_fock_populations": fock_populations(&r.post_state)?,
    });
    Ok(result_json(ctx, Some(mode_name(cfg.mode)), &cfg, result))
}

fn cmd_cool(cfg: CoolConfig, ctx: &Context) -> Result<Report, Failure> {
    cfg.params.validate()?;
    let motional = cfg.motional.build(cfg.cutoff)?;
    let r = selective_cool(&motional, &cfg.params, cfg.mode)?;
    let ground: State = PureState::fock(ModeSpace::new(cfg.cutoff)?, 0)?.into();
    let result = json!({
        "herald_probability": r.herald_probability,
        "herald_level": r.herald_level,
        "duration": r.duration,
        "ground_fidelity": fidelity(&r.post_state, &ground)?,
        "post_fock_populations": fock_populations(&r.post_state)?,
    });
    Ok(result_json(ctx, Some(mode_name(cfg.mode)), &cfg, result))
}

fn cmd_measure(cfg: MeasureConfig, ctx: &Context) -> Result<Report, Failure> {
    cfg.params.validate()?;
    let motional = cfg.motional.build(cfg.cutoff)?;
    let shots = match cfg.shots {
        Some(shots) => Shots::Finite { shots, seed: ctx.seed },
        None => Shots::Exact,
    };
    let m = measure_population(&motional, cfg.n0, &cfg.params, shots, cfg.mode)?;
    let mut result = json!({
        "n0": cfg.n0,
        "estimate": m.estimate,
        "probability": m.probability,
        "true_population": fock_populations(&motional)?[cfg.n0],
        "record": m.record,
    });
    if let Some(rounds) = cfg.rounds {
        result["refined_estimates"] = json!(refine_population(&motional, cfg.n0, &cfg.params, rounds, cfg.mode)?);
    }
    Ok(result_json(ctx, Some(mode_name(cfg.mode)), &cfg, result))
}

fn cmd_wigner(cfg: WignerConfig, ctx: &Context) -> Result<Report, Failure> {
    cfg.params.validate()?;
    let motional = cfg.motional.build(cfg.cutoff)?;
    let alphas = cfg.grid.alphas()?;
    let w = wigner(&motional, &alphas, &cfg.params, cfg.convention, cfg.method, cfg.mode)?;
    let mut table = Csv::new(vec!["re".into(), "im".into(), "W".into()]);
    for (a, v) in w.alphas.iter().zip(&w.values) {
        table.push(&[a.re, a.im, *v]);
    }
    Ok(Report::Csv { table, provenance: ctx.provenance(Some(mode_name(cfg.mode)), &cfg) })
}

fn complex_list(v: impl IntoIterator<Item = C64>) -> Value {
    Value::Array(v.into_iter().map(|z| json!([z.re, z.im])).collect())
}

fn cmd_cpg(cfg: CpgConfig, ctx: &Context) -> Result<Report, Failure> {
    cfg.params.validate()?;
    let mode = ModeSpace::new(cfg.cutoff)?;
    let amps = cfg.qubits.unwrap_or([[0.5, 0.0]; 4]);
    let register = SpaceDescriptor::new(vec![InternalSpace::TwoLevel.into(), InternalSpace::TwoLevel.into()])?;
    let qubits = PureState::new(nalgebra::DVector::from_iterator(4, amps.iter().map(|a| C64::new(a[0], a[1]))), register)?;
    let motional = match cfg.motional.unwrap_or(MotionalSpec::Fock { n: 0 }).build(cfg.cutoff)? {
        State::Pure(s) => s,
        State::Mixed(_) => {
            return Err(Error::InvalidParameter { name: "motional", reason: "the gate needs a pure motional state".into() }.into())
        }
    };
    let out = cpg(&qubits, &motional, &cfg.params, cfg.mode)?;
    // Register amplitudes with the mode back in its initial state.
    let d = mode.dim();
    let projected: Vec<C64> = (0..4)
        .map(|k| (0..d).map(|n| motional.amplitude(n).conj() * out.amplitude(k * d + n)).sum())
        .collect();
    let expected = qubits.tensor(&motional)?;
    let mut ideal = expected.amplitudes().clone();
    for n in 0..d {
        ideal[3 * d + n] = -ideal[3 * d + n];
    }
    let ideal = PureState::new(ideal, expected.space().clone())?;
    let signs: Vec<&str> = projected
        .iter()
        .zip(qubits.amplitudes().iter())
        .map(|(o, i)| {
            if i.norm() < 1e-12 {
                "0"
            } else if (o / i).re >= 0.0 {
                "+"
            } else {
                "-"
            }
        })
        .collect();
    let process = cpg_process(&cfg.params, cfg.cutoff, cfg.mode)?;
    let table: Vec<Value> = (0..4).map(|c| complex_list((0..4).map(|r| process.register[(r, c)]))).collect();
    let mode_return: f64 = projected.iter().map(|z| z.norm_sqr()).sum();
    let result = json!({
        "input": complex_list(qubits.amplitudes().iter().copied()),
        "output": complex_list(projected),
        "signs": signs,
        "fidelity": fidelity(&out.into(), &ideal.into())?,
        "mode_return_fidelity": mode_return,
        "truth_table": table,
        "process_fidelity": process.process_fidelity,
        "duration": process.duration,
    });
    Ok(result_json(ctx, Some(mode_name(cfg.mode)), &cfg, result))
}

fn cmd_design(cfg: DesignConfig, ctx: &Context) -> Result<Report, Failure> {
    if cfg.params.is_none() && cfg.search.is_none() {
        return Err(config_error("design config needs `params`, `search` or both"));
    }
    let mut result = json!({});
    if let Some(p) = &cfg.params {
        result["feasibility"] = serde_json::to_value(feasibility_with(p, cfg.selector, &cfg.thresholds)?).unwrap_or(Value::Null);
    }
    if let Some(c) = &cfg.search {
        let best = search(c)?;
        result["search"] = serde_json::to_value(best).unwrap_or(Value::Null);
    }
    Ok(result_json(ctx, None, &cfg, result))
}

fn execute(args: &Args) -> Result<Report, Failure> {
    macro_rules! dispatch {
        ($ty:ty, $f:ident) => {{
            let cfg: $ty = load(&args.config)?;
            let ctx = Context { command: args.command, seed: args.seed.or(cfg.seed).unwrap_or(0) };
            $f(cfg, &ctx)
        }};
    }
    match args.command {
        Command::Rabi => dispatch!(RabiConfig, cmd_rabi),
        Command::Fock => dispatch!(FockConfig, cmd_fock),
        Command::Cool => dispatch!(CoolConfig, cmd_cool),
        Command::Measure => dispatch!(MeasureConfig, cmd_measure),
        Command::Wigner => dispatch!(WignerConfig, cmd_wigner),
        Command::Cpg => dispatch!(CpgConfig, cmd_cpg),
        Command::Design => dispatch!(DesignConfig, cmd_design),
    }
}

fn write(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| io_error(p, e)),
        None => {
            use std::io::Write;
            std::io::stdout().write_all(text.as_bytes()).map_err(|e| io_error(Path::new("<stdout>"), e))
        }
    }
}

fn json_text(mut v: Value) -> String {
    normalize_floats(&mut v);
    let mut s = serde_json::to_string_pretty(&v).expect("json values serialize");
    s.push('\n');
    s
}

/// Runs one command, writing its output.
pub fn run(args: &Args) -> Result<(), Failure> {
    configure_threads()?;
    match execute(args)? {
        Report::Json(v) => write(args.out.as_deref(), &json_text(v)),
        Report::Csv { table, provenance } => {
            write(args.out.as_deref(), &table.render().map_err(|e| Failure { code: EXIT_IO, message: e })?)?;
            if let Some(out) = &args.out {
                let mut side = out.clone().into_os_string();
                side.push(".provenance.json");
                write(Some(Path::new(&side)), &json_text(json!({ "provenance": provenance })))?;
            }
            Ok(())
        }
    }
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| config_error(format!("{THREADS_ENV} must be a positive integer, got {raw:?}")))?;
    // A pool built earlier in the same process is kept.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

/// Entry point used by the binary.
pub fn main() -> i32 {
    let args = Args::parse();
    match run(&args) {
        Ok(()) => EXIT_OK,
        Err(f) => {
            eprintln!("ionsel: {}", f.message);
            f.code
        }
    }
}
