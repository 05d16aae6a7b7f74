//! Command-line front end: build or load a circuit, simulate/verify/compose,
//! and emit CSV artifacts.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use invlogic::catalog::{gate, GateKind};
use invlogic::composer::{compile, fuse, multiplier_netlist, rca_netlist, ComposedCircuit};
use invlogic::engine::{AnnealSchedule, ClampSpec, RunOptions};
use invlogic::experiments::{
    build_factorizer, convergence_stats, factorable_outputs, prime_outputs, sweep_wrnd, RunStats,
    REVERSE_ACC_BITS,
};
use invlogic::formats;
use invlogic::oracle;

#[derive(Parser)]
#[command(
    name = "invlogic",
    about = "Invertible-logic Boltzmann machine simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a circuit under clamps and a noise schedule; write trace/histogram CSVs.
    Simulate(SimulateArgs),
    /// Exhaustively check that ground states equal the Boolean valid states.
    Verify(CircuitArgs),
    /// Compile a netlist (or builder) and emit the Hamiltonian JSON.
    Compose(ComposeArgs),
    /// Fixed-noise sweep: valid fraction and switching activity per w_rnd.
    Sweep(SweepArgs),
    /// Reverse-run convergence statistics over many outputs.
    Convergence(ConvergenceArgs),
}

#[derive(Args)]
struct CircuitArgs {
    /// Catalog gate kind (AND, NAND, OR, NOR, XOR_OR, XOR_NOR, HA, HA_ALT, FA).
    #[arg(long, conflicts_with_all = ["netlist", "build"])]
    gate: Option<String>,
    /// Netlist JSON file.
    #[arg(long, conflicts_with = "build")]
    netlist: Option<PathBuf>,
    /// Builder spec: multiplier:N, rca:N, or factorizer:N.
    #[arg(long)]
    build: Option<String>,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    circuit: CircuitArgs,
    /// Clamp, GROUP=decimal (single nodes are 1-bit groups). Repeatable.
    #[arg(long = "clamp")]
    clamps: Vec<String>,
    /// Noise schedule, comma list of start:weight (start 0 required).
    #[arg(long, conflicts_with = "wrnd")]
    schedule: Option<String>,
    /// Fixed noise weight (shorthand for --schedule 0:W).
    #[arg(long)]
    wrnd: Option<i32>,
    #[arg(long, default_value_t = 1 << 16)]
    cycles: u64,
    /// Defaults to $INVLOGIC_SEED, else 1.
    #[arg(long)]
    seed: Option<u64>,
    /// Accumulator precision; defaults to weight_bits + 2.
    #[arg(long)]
    acc_bits: Option<u32>,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
    /// Exit 1 unless the free terminals converge to a valid state.
    #[arg(long)]
    require_convergence: bool,
}

#[derive(Args)]
struct ComposeArgs {
    #[command(flatten)]
    circuit: CircuitArgs,
    /// Output Hamiltonian JSON path.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    circuit: CircuitArgs,
    #[arg(long = "clamp")]
    clamps: Vec<String>,
    /// Inclusive range lo:hi of fixed noise weights.
    #[arg(long, default_value = "0:8")]
    wrnd_range: String,
    #[arg(long, default_value_t = 1 << 14)]
    cycles: u64,
    #[arg(long, default_value_t = 5)]
    seeds: u64,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    acc_bits: Option<u32>,
    #[arg(long, default_value = "sweep.csv")]
    out: PathBuf,
}

#[derive(Args)]
struct ConvergenceArgs {
    /// Operand width in bits.
    #[arg(long, default_value_t = 5)]
    bits: usize,
    /// Output set: all (every factorable output) or prime.
    #[arg(long, default_value = "all")]
    outputs: String,
    #[arg(long, default_value_t = 1 << 16)]
    cycles: u64,
    #[arg(long, default_value_t = 1)]
    seeds: u64,
    #[arg(long)]
    seed: Option<u64>,
    /// Length of one anneal attempt; the run restarts on stall until the
    /// cycle cap.
    #[arg(long, default_value_t = 1536)]
    attempt_cycles: u64,
    /// Attempt staircase endpoints as HI:LO noise weights.
    #[arg(long, default_value = "13:6")]
    anneal: String,
    /// Gate drive strengths as AND:ADDER integers.
    #[arg(long, default_value = "3:4")]
    drive: String,
    #[arg(long, default_value_t = REVERSE_ACC_BITS)]
    acc_bits: u32,
    #[arg(long, default_value = "convergence.csv")]
    out: PathBuf,
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, String> {
    match cli.command {
        Command::Simulate(args) => simulate(args),
        Command::Verify(args) => verify(&build_circuit(&args)?),
        Command::Compose(args) => compose(args),
        Command::Sweep(args) => sweep(args),
        Command::Convergence(args) => convergence(args),
    }
}

/// Wrap a catalog gate as a one-instance circuit with 1-bit groups per node.
fn gate_circuit(kind: GateKind) -> ComposedCircuit {
    let spec = gate(kind);
    let nets = spec.hamiltonian.labels.clone();
    let mut c = fuse(std::slice::from_ref(&spec), std::slice::from_ref(&nets));
    c.groups = nets
        .iter()
        .enumerate()
        .map(|(i, name)| (name.clone(), vec![i]))
        .collect();
    c
}

fn build_circuit(args: &CircuitArgs) -> Result<ComposedCircuit, String> {
    if let Some(name) = &args.gate {
        let kind = GateKind::parse(name).ok_or_else(|| format!("unknown gate kind {name:?}"))?;
        return Ok(gate_circuit(kind));
    }
    if let Some(path) = &args.netlist {
        let netlist = formats::load_netlist(path).map_err(|e| e.to_string())?;
        return compile(&netlist).map_err(|e| e.to_string());
    }
    if let Some(spec) = &args.build {
        let (kind, n) = spec
            .split_once(':')
            .ok_or_else(|| format!("builder spec {spec:?} is not KIND:N"))?;
        let n: usize = n.parse().map_err(|_| format!("bad width in {spec:?}"))?;
        if n == 0 {
            return Err("builder width must be >= 1".into());
        }
        return match kind {
            "multiplier" => Ok(compile(&multiplier_netlist(n, 1, 1)).map_err(|e| e.to_string())?),
            "rca" => Ok(compile(&rca_netlist(n)).map_err(|e| e.to_string())?),
            "factorizer" => Ok(build_factorizer(n)),
            _ => Err(format!("unknown builder {kind:?}")),
        };
    }
    Err("one of --gate, --netlist, --build is required".into())
}

fn parse_clamps(circuit: &ComposedCircuit, specs: &[String]) -> Result<ClampSpec, String> {
    let mut clamps = ClampSpec::new();
    for spec in specs {
        let (name, value) = spec
            .split_once('=')
            .ok_or_else(|| format!("clamp {spec:?} is not GROUP=decimal"))?;
        let value: u64 = value
            .parse()
            .map_err(|_| format!("clamp value in {spec:?} is not a decimal integer"))?;
        let group = circuit
            .group(name)
            .ok_or_else(|| format!("no terminal group {name:?} in this circuit"))?;
        if value >> group.len() != 0 {
            return Err(format!(
                "clamp value {value} does not fit {} bits",
                group.len()
            ));
        }
        clamps.set_group(group, value);
    }
    Ok(clamps)
}

fn parse_schedule(
    args_schedule: &Option<String>,
    wrnd: Option<i32>,
) -> Result<AnnealSchedule, String> {
    if let Some(w) = wrnd {
        return Ok(AnnealSchedule::constant(w));
    }
    let text = args_schedule.as_deref().unwrap_or("0:5");
    let segments = text
        .split(',')
        .map(|seg| {
            let (start, w) = seg
                .split_once(':')
                .ok_or_else(|| format!("schedule segment {seg:?} is not start:weight"))?;
            Ok((
                start
                    .trim()
                    .parse()
                    .map_err(|_| format!("bad start cycle in {seg:?}"))?,
                w.trim()
                    .parse()
                    .map_err(|_| format!("bad weight in {seg:?}"))?,
            ))
        })
        .collect::<Result<Vec<(u64, i32)>, String>>()?;
    AnnealSchedule::new(segments).map_err(|e| e.to_string())
}

fn seed_or_env(flag: Option<u64>) -> u64 {
    flag.or_else(|| {
        std::env::var("INVLOGIC_SEED")
            .ok()
            .and_then(|s| parse_u64(&s))
    })
    .unwrap_or(1)
}

fn parse_u64(s: &str) -> Option<u64> {
    if let Some(hex) = s.strip_prefix("0x") {
        u64::from_str_radix(hex, 16).ok()
    } else {
        s.parse().ok()
    }
}

fn config_lines(pairs: &[(&str, String)]) -> Vec<(String, String)> {
    pairs
        .iter()
        .map(|(k, v)| (k.to_string(), v.clone()))
        .collect()
}

fn simulate(args: SimulateArgs) -> Result<ExitCode, String> {
    let circuit = build_circuit(&args.circuit)?;
    let clamps = parse_clamps(&circuit, &args.clamps)?;
    let schedule = parse_schedule(&args.schedule, args.wrnd)?;
    let acc_bits = args.acc_bits.unwrap_or(circuit.hamiltonian.weight_bits + 2);
    let seed = seed_or_env(args.seed);
    if args.cycles == 0 {
        return Err("cycle budget must be positive".into());
    }
    // Watch every exported group that is not fully clamped.
    let watch: Vec<(String, Vec<usize>)> = circuit
        .groups
        .iter()
        .filter(|(_, idx)| idx.iter().any(|&i| clamps.get(i).is_none()))
        .cloned()
        .collect();
    if watch.is_empty() {
        return Err("all terminal groups are clamped; nothing to watch".into());
    }
    let mut opts = RunOptions::new(args.cycles, seed, acc_bits);
    opts.snapshot_every = 0;
    let trace = invlogic::engine::run(&circuit.hamiltonian, &clamps, &schedule, &watch, &opts);
    let config = config_lines(&[
        ("clamps", args.clamps.join(" ")),
        (
            "schedule",
            schedule
                .segments()
                .iter()
                .map(|(s, w)| format!("{s}:{w}"))
                .collect::<Vec<_>>()
                .join(","),
        ),
        ("cycles", args.cycles.to_string()),
        ("seed", seed.to_string()),
        ("acc_bits", acc_bits.to_string()),
    ]);
    std::fs::create_dir_all(&args.out_dir)
        .map_err(|e| format!("{}: {e}", args.out_dir.display()))?;
    formats::write_trace_csv(
        &args.out_dir.join("trace.csv"),
        &config,
        &trace.groups,
        &trace.terminal_values,
    )
    .map_err(|e| e.to_string())?;
    let mut converged_valid = true;
    for (g, vals) in trace.groups.iter().zip(&trace.terminal_values) {
        let stats = stats_of(vals);
        formats::write_histogram_csv(
            &args.out_dir.join(format!("histogram_{g}.csv")),
            &config,
            &stats,
        )
        .map_err(|e| e.to_string())?;
        println!(
            "{g}: final={} mode={} convergence_cycle={}",
            stats.final_value,
            stats.mode_value,
            stats
                .convergence_cycle
                .map_or("none".to_string(), |t| t.to_string())
        );
        if stats.convergence_cycle.is_none() {
            converged_valid = false;
        }
    }
    if !circuit.is_valid_state(&trace.final_state.out) {
        converged_valid = false;
    }
    if args.require_convergence && !converged_valid {
        println!("non-convergence or invalid final state");
        return Ok(ExitCode::from(1));
    }
    Ok(ExitCode::SUCCESS)
}

fn stats_of(values: &[u64]) -> RunStats {
    // Reuse the experiments aggregation with a trivially-true validity check.
    let mut histogram = BTreeMap::new();
    for &v in values {
        *histogram.entry(v).or_insert(0u64) += 1;
    }
    let (&mode_value, &mode_count) = histogram
        .iter()
        .max_by_key(|&(v, c)| (*c, std::cmp::Reverse(*v)))
        .unwrap();
    let runner_up = histogram
        .iter()
        .filter(|&(v, _)| *v != mode_value)
        .map(|(_, &c)| c)
        .max();
    RunStats {
        histogram,
        valid_fraction: 1.0,
        mode_value,
        runner_up_ratio: runner_up.map_or(f64::INFINITY, |c| mode_count as f64 / c as f64),
        convergence_cycle: invlogic::experiments::convergence_cycle(&[values]),
        final_value: *values.last().unwrap(),
    }
}

fn verify(circuit: &ComposedCircuit) -> Result<ExitCode, String> {
    match oracle::validate_circuit(circuit) {
        Ok(v) => {
            println!(
                "nodes={} ground_energy={} ground_states={}",
                circuit.n(),
                v.report.ground_energy,
                v.report.ground_states.len()
            );
            if v.ok {
                println!("PASS: ground states equal the Boolean valid-state set");
                Ok(ExitCode::SUCCESS)
            } else {
                println!(
                    "FAIL: {} spurious ground state(s), {} missing valid state(s)",
                    v.spurious.len(),
                    v.missing.len()
                );
                for st in v.spurious.iter().take(8) {
                    println!("  spurious: {st:?}");
                }
                for st in v.missing.iter().take(8) {
                    println!("  missing:  {st:?}");
                }
                Ok(ExitCode::from(1))
            }
        }
        Err(e) => Err(format!("refusing: {e}")),
    }
}

fn compose(args: ComposeArgs) -> Result<ExitCode, String> {
    let circuit = build_circuit(&args.circuit)?;
    println!(
        "{} nodes, weight_bits={}",
        circuit.n(),
        circuit.hamiltonian.weight_bits
    );
    if let Some(out) = &args.out {
        formats::save_hamiltonian(&circuit.hamiltonian, out).map_err(|e| e.to_string())?;
        println!("wrote {}", out.display());
    }
    Ok(ExitCode::SUCCESS)
}

fn sweep(args: SweepArgs) -> Result<ExitCode, String> {
    let circuit = build_circuit(&args.circuit)?;
    let clamps = parse_clamps(&circuit, &args.clamps)?;
    let (lo, hi) = args
        .wrnd_range
        .split_once(':')
        .ok_or_else(|| format!("range {:?} is not lo:hi", args.wrnd_range))?;
    let lo: i32 = lo.parse().map_err(|_| "bad sweep range".to_string())?;
    let hi: i32 = hi.parse().map_err(|_| "bad sweep range".to_string())?;
    if lo > hi {
        return Err("sweep range is empty".into());
    }
    let acc_bits = args.acc_bits.unwrap_or(circuit.hamiltonian.weight_bits + 2);
    let base_seed = seed_or_env(args.seed);
    let w_values: Vec<i32> = (lo..=hi).collect();
    let seeds: Vec<u64> = (0..args.seeds).map(|k| base_seed + k).collect();
    let rows = sweep_wrnd(&circuit, &clamps, &w_values, args.cycles, &seeds, acc_bits);
    let config = config_lines(&[
        ("clamps", args.clamps.join(" ")),
        ("wrnd_range", format!("{lo}:{hi}")),
        ("cycles", args.cycles.to_string()),
        ("seed", base_seed.to_string()),
        ("acc_bits", acc_bits.to_string()),
    ]);
    formats::write_sweep_csv(&args.out, &config, &rows).map_err(|e| e.to_string())?;
    println!("wrote {}", args.out.display());
    Ok(ExitCode::SUCCESS)
}

fn convergence(args: ConvergenceArgs) -> Result<ExitCode, String> {
    let (sa, sh) = args
        .drive
        .split_once(':')
        .ok_or_else(|| format!("drive {:?} is not AND:ADDER", args.drive))?;
    let sa: i32 = sa.parse().map_err(|_| "bad drive".to_string())?;
    let sh: i32 = sh.parse().map_err(|_| "bad drive".to_string())?;
    let circuit = if (sa, sh) == (3, 4) {
        build_factorizer(args.bits)
    } else {
        compile(&multiplier_netlist(args.bits, sa, sh)).map_err(|e| e.to_string())?
    };
    let outputs = match args.outputs.as_str() {
        "all" => factorable_outputs(args.bits),
        "prime" => prime_outputs(args.bits),
        other => return Err(format!("unknown output set {other:?} (use all or prime)")),
    };
    let attempt = args.attempt_cycles.min(args.cycles).max(1);
    let (w_hi, w_lo) = args
        .anneal
        .split_once(':')
        .ok_or_else(|| format!("anneal {:?} is not HI:LO", args.anneal))?;
    let anneal = (
        w_hi.parse().map_err(|_| "bad anneal".to_string())?,
        w_lo.parse().map_err(|_| "bad anneal".to_string())?,
    );
    let seed = seed_or_env(args.seed);
    let summary = convergence_stats(
        &circuit,
        &outputs,
        anneal,
        attempt,
        args.cycles,
        args.seeds,
        seed,
        args.acc_bits,
    );
    let config = config_lines(&[
        ("bits", args.bits.to_string()),
        ("outputs", args.outputs.clone()),
        ("cycles", args.cycles.to_string()),
        ("seeds", args.seeds.to_string()),
        ("seed", seed.to_string()),
        ("acc_bits", args.acc_bits.to_string()),
        ("attempt_cycles", attempt.to_string()),
        ("anneal", args.anneal.clone()),
        ("drive", args.drive.clone()),
    ]);
    formats::write_convergence_csv(&args.out, &config, &summary).map_err(|e| e.to_string())?;
    println!(
        "outputs={} success_rate={:.3} mean_cycles={:.0} worst={}",
        outputs.len(),
        summary.success_rate,
        summary.mean_cycles,
        summary.worst_cycles
    );
    println!("wrote {}", args.out.display());
    Ok(ExitCode::SUCCESS)
}
