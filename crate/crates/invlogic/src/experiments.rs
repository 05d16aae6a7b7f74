//! Experiment protocols: forward multiplication, reverse factorization,
//! mixed-clamp inversion, noise sweeps, and convergence statistics.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::composer::{compile, multiplier_netlist, ComposedCircuit};
use crate::engine::{run, AnnealSchedule, ClampSpec, RunOptions, RunTrace};
use crate::Spin;

/// Aggregates of one run's decoded terminal record.
#[derive(Clone, Debug, PartialEq)]
pub struct RunStats {
    pub histogram: BTreeMap<u64, u64>,
    pub valid_fraction: f64,
    pub mode_value: u64,
    /// Mode count over runner-up count (infinite if no runner-up).
    pub runner_up_ratio: f64,
    /// First cycle after which the watched values stay constant to run end;
    /// None if the stable tail is shorter than `MIN_STABLE_TAIL`.
    pub convergence_cycle: Option<u64>,
    pub final_value: u64,
}

/// A value only counts as converged if it holds at least this long.
pub const MIN_STABLE_TAIL: u64 = 1024;

/// First cycle t such that every watched sequence is constant on [t, end),
/// provided that tail is at least MIN_STABLE_TAIL cycles long.
pub fn convergence_cycle(series: &[&[u64]]) -> Option<u64> {
    let cycles = series.first()?.len() as u64;
    let mut t = 0u64;
    for s in series {
        let last = *s.last()?;
        let mut first_stable = 0;
        for (i, &v) in s.iter().enumerate().rev() {
            if v != last {
                first_stable = i as u64 + 1;
                break;
            }
        }
        t = t.max(first_stable);
    }
    (cycles - t >= MIN_STABLE_TAIL.min(cycles)).then_some(t)
}

fn stats_for(values: &[u64], valid: impl Fn(u64) -> bool) -> RunStats {
    let mut histogram: BTreeMap<u64, u64> = BTreeMap::new();
    let mut valid_count = 0u64;
    for &v in values {
        *histogram.entry(v).or_insert(0) += 1;
        if valid(v) {
            valid_count += 1;
        }
    }
    let mut counts: Vec<(u64, u64)> = histogram.iter().map(|(&v, &c)| (c, v)).collect();
    counts.sort_unstable_by(|a, b| b.cmp(a));
    let (mode_count, mode_value) = counts[0];
    let runner_up_ratio = match counts.get(1) {
        Some(&(c, _)) => mode_count as f64 / c as f64,
        None => f64::INFINITY,
    };
    RunStats {
        histogram,
        valid_fraction: valid_count as f64 / values.len() as f64,
        mode_value,
        runner_up_ratio,
        convergence_cycle: convergence_cycle(&[values]),
        final_value: *values.last().unwrap(),
    }
}

/// Run parameters shared by the experiment drivers.
#[derive(Clone, Debug)]
pub struct ExpOptions {
    pub cycles: u64,
    pub seed: u64,
    pub acc_bits: u32,
}

fn group(circuit: &ComposedCircuit, name: &str) -> Vec<usize> {
    circuit
        .group(name)
        .unwrap_or_else(|| panic!("circuit has no terminal group {name:?}"))
        .to_vec()
}

fn base_run(
    circuit: &ComposedCircuit,
    clamps: &ClampSpec,
    schedule: &AnnealSchedule,
    watch: &[&str],
    opts: &ExpOptions,
) -> RunTrace {
    let watch: Vec<(String, Vec<usize>)> = watch
        .iter()
        .map(|name| (name.to_string(), group(circuit, name)))
        .collect();
    let mut ro = RunOptions::new(opts.cycles, opts.seed, opts.acc_bits);
    ro.snapshot_every = 0;
    run(&circuit.hamiltonian, clamps, schedule, &watch, &ro)
}

/// Forward multiplication: clamp A and B, watch the product bits.
pub fn run_forward(
    circuit: &ComposedCircuit,
    a: u64,
    b: u64,
    schedule: &AnnealSchedule,
    opts: &ExpOptions,
) -> RunStats {
    let ga = group(circuit, "A");
    let gb = group(circuit, "B");
    assert!(a < 1 << ga.len() && b < 1 << gb.len(), "operand overflow");
    let mut clamps = ClampSpec::new();
    clamps.set_group(&ga, a);
    clamps.set_group(&gb, b);
    let trace = base_run(circuit, &clamps, schedule, &["P"], opts);
    stats_for(&trace.terminal_values[0], |p| p == a * b)
}

/// Outcome of a reverse (factorization) run.
#[derive(Clone, Debug)]
pub struct ReverseStats {
    pub a: RunStats,
    pub b: RunStats,
    /// Joint convergence of both input groups.
    pub convergence_cycle: Option<u64>,
    pub final_a: u64,
    pub final_b: u64,
}

/// Reverse mode: clamp the product bits to `c`, watch both input groups.
pub fn run_reverse(
    circuit: &ComposedCircuit,
    c: u64,
    schedule: &AnnealSchedule,
    opts: &ExpOptions,
) -> ReverseStats {
    let gp = group(circuit, "P");
    assert!(c < 1 << gp.len(), "product overflow");
    let mut clamps = ClampSpec::new();
    clamps.set_group(&gp, c);
    let trace = base_run(circuit, &clamps, schedule, &["A", "B"], opts);
    let (va, vb) = (&trace.terminal_values[0], &trace.terminal_values[1]);
    let joint = convergence_cycle(&[va, vb]);
    let final_a = *va.last().unwrap();
    let final_b = *vb.last().unwrap();
    // Validity is a joint property of the two inputs against the clamp.
    let valid = va.iter().zip(vb).filter(|&(&a, &b)| a * b == c).count() as f64 / va.len() as f64;
    let mut a = stats_for(va, |_| true);
    let mut b = stats_for(vb, |_| true);
    a.valid_fraction = valid;
    b.valid_fraction = valid;
    ReverseStats {
        a,
        b,
        convergence_cycle: joint,
        final_a,
        final_b,
    }
}

/// Mixed clamps: fix any subset of terminal groups, watch the rest.
pub fn run_partial(
    circuit: &ComposedCircuit,
    clamped: &[(&str, u64)],
    watched: &[&str],
    schedule: &AnnealSchedule,
    opts: &ExpOptions,
) -> Vec<(String, RunStats)> {
    let mut clamps = ClampSpec::new();
    for &(name, value) in clamped {
        clamps.set_group(&group(circuit, name), value);
    }
    let trace = base_run(circuit, &clamps, schedule, watched, opts);
    watched
        .iter()
        .zip(&trace.terminal_values)
        .map(|(name, vals)| (name.to_string(), stats_for(vals, |_| true)))
        .collect()
}

/// One row of a noise-weight sweep.
#[derive(Clone, Debug)]
pub struct SweepRow {
    pub w_rnd: i32,
    pub seed: u64,
    pub valid_fraction: f64,
    /// Mean output toggles per node per cycle.
    pub toggles: f64,
    pub converged: bool,
}

/// Fixed-noise sweep over w values and seeds; validity is checked on the full
/// output vector each cycle, so this is meant for small circuits.
pub fn sweep_wrnd(
    circuit: &ComposedCircuit,
    clamps: &ClampSpec,
    w_values: &[i32],
    cycles: u64,
    seeds: &[u64],
    acc_bits: u32,
) -> Vec<SweepRow> {
    let n = circuit.n();
    assert!(n <= 64, "sweep validity check records full vectors");
    let all: Vec<usize> = (0..n).collect();
    let watch = vec![("state".to_string(), all)];
    let mut rows = Vec::new();
    for &w in w_values {
        for &seed in seeds {
            let mut ro = RunOptions::new(cycles, seed, acc_bits);
            ro.snapshot_every = 0;
            let trace = run(
                &circuit.hamiltonian,
                clamps,
                &AnnealSchedule::constant(w),
                &watch,
                &ro,
            );
            let vals = &trace.terminal_values[0];
            let mut valid = 0u64;
            let mut toggles = 0u64;
            let mut prev = vals[0];
            for &v in vals {
                let m: Vec<Spin> = (0..n)
                    .map(|k| if (v >> k) & 1 == 1 { 1 } else { -1 })
                    .collect();
                if circuit.is_valid_state(&m) {
                    valid += 1;
                }
                toggles += (v ^ prev).count_ones() as u64;
                prev = v;
            }
            rows.push(SweepRow {
                w_rnd: w,
                seed,
                valid_fraction: valid as f64 / vals.len() as f64,
                toggles: toggles as f64 / (vals.len() as f64 * n as f64),
                converged: convergence_cycle(&[vals]).is_some(),
            });
        }
    }
    rows
}

/// The multiplier wired for annealed reverse operation: AND gates at drive 3,
/// adders at drive 4. Keeps every entry within 5 signed bits while making
/// energy gaps deep enough for the 11-to-5 staircase to freeze correct states.
pub fn build_factorizer(n: usize) -> ComposedCircuit {
    compile(&multiplier_netlist(n, 3, 4)).expect("generated netlist is well-formed")
}

/// Accumulator precision used for annealed reverse runs. Shallower than the
/// forward default: deep accumulators stop responding to the noise term early
/// in the staircase and freeze in wrong states.
pub const REVERSE_ACC_BITS: u32 = 5;

/// The annealed reverse-run schedule: hold `w_hi`, then step down one unit at
/// a time over the second half of the run, ending at `w_lo`.
pub fn reverse_schedule(w_hi: i32, w_lo: i32, cycles: u64) -> AnnealSchedule {
    AnnealSchedule::staircase(w_hi, w_lo, cycles / 2, cycles)
}

/// Outcome of an annealed run with restart-on-stall and solution freezing.
#[derive(Clone, Debug)]
pub struct AnnealedRun {
    /// Final decoded value of each watched group, in call order.
    pub finals: Vec<u64>,
    /// Total cycle (across attempts) after which the watched groups stayed
    /// constant; None if no attempt reached a gate-valid state.
    pub convergence_cycle: Option<u64>,
    /// Settle cycle within the successful attempt.
    pub settle_in_attempt: Option<u64>,
    pub attempts: u32,
}

/// The annealed search protocol: each attempt runs the given schedule from a
/// fresh state while a solution detector watches for a gate-valid state (every
/// constituent gate satisfied, i.e. ground energy reached); on detection the
/// noise weight drops to zero and the state locks in place. An attempt that
/// ends without detection has stalled in a frozen invalid state — detectable
/// locally, since some gate is violated — so the protocol re-melts and anneals
/// again with the next seed until the cycle budget runs out.
#[allow(clippy::too_many_arguments)]
pub fn run_annealed(
    circuit: &ComposedCircuit,
    clamped: &[(&str, u64)],
    watched: &[&str],
    schedule: &AnnealSchedule,
    attempt_cycles: u64,
    max_cycles: u64,
    base_seed: u64,
    acc_bits: u32,
) -> AnnealedRun {
    let mut clamps = ClampSpec::new();
    for &(name, value) in clamped {
        let g = group(circuit, name);
        assert!(value < 1 << g.len(), "clamp value overflows {name}");
        clamps.set_group(&g, value);
    }
    let watch: Vec<(String, Vec<usize>)> = watched
        .iter()
        .map(|name| (name.to_string(), group(circuit, name)))
        .collect();
    let attempts = (max_cycles / attempt_cycles).max(1) as u32;
    let mut finals = vec![0; watched.len()];
    for k in 0..attempts {
        let mut ro = RunOptions::new(
            attempt_cycles,
            base_seed.wrapping_add(u64::from(k)),
            acc_bits,
        );
        ro.snapshot_every = 0;
        let trace = crate::engine::run_with_freeze(
            &circuit.hamiltonian,
            &clamps,
            schedule,
            &watch,
            &ro,
            Some(&|m: &[Spin]| circuit.is_valid_state(m)),
        );
        for (f, vals) in finals.iter_mut().zip(&trace.terminal_values) {
            *f = *vals.last().unwrap();
        }
        if circuit.is_valid_state(&trace.final_state.out) {
            // Frozen by the detector: constant from the last change to run end.
            let t = trace
                .terminal_values
                .iter()
                .map(|s| {
                    let lastv = *s.last().unwrap();
                    s.iter()
                        .rposition(|&v| v != lastv)
                        .map_or(0, |i| i as u64 + 1)
                })
                .max()
                .unwrap_or(0);
            return AnnealedRun {
                finals,
                convergence_cycle: Some(u64::from(k) * attempt_cycles + t),
                settle_in_attempt: Some(t),
                attempts: k + 1,
            };
        }
    }
    AnnealedRun {
        finals,
        convergence_cycle: None,
        settle_in_attempt: None,
        attempts,
    }
}

/// Outcome of an annealed reverse run with restart-on-stall.
#[derive(Clone, Debug)]
pub struct AnnealedReverse {
    pub final_a: u64,
    pub final_b: u64,
    /// Total cycle (across attempts) after which the inputs stayed constant;
    /// None if no attempt ended in a stable valid state.
    pub convergence_cycle: Option<u64>,
    pub attempts: u32,
}

/// Reverse (factorization) mode of the annealed protocol: clamp the product,
/// anneal one staircase per attempt over the first half and hold the final
/// weight while the detector waits for a factor pair.
pub fn run_reverse_annealed(
    circuit: &ComposedCircuit,
    c: u64,
    anneal: (i32, i32),
    attempt_cycles: u64,
    max_cycles: u64,
    base_seed: u64,
    acc_bits: u32,
) -> AnnealedReverse {
    let schedule = AnnealSchedule::staircase(anneal.0, anneal.1, 0, attempt_cycles / 2);
    let r = run_annealed(
        circuit,
        &[("P", c)],
        &["A", "B"],
        &schedule,
        attempt_cycles,
        max_cycles,
        base_seed,
        acc_bits,
    );
    AnnealedReverse {
        final_a: r.finals[0],
        final_b: r.finals[1],
        convergence_cycle: r.convergence_cycle,
        attempts: r.attempts,
    }
}

/// All distinct products of two n-bit operands.
pub fn factorable_outputs(n: usize) -> Vec<u64> {
    let top = 1u64 << n;
    let mut outs: Vec<u64> = (0..top)
        .flat_map(|a| (0..top).map(move |b| a * b))
        .collect();
    outs.sort_unstable();
    outs.dedup();
    outs
}

fn is_prime(v: u64) -> bool {
    v >= 2
        && (2..v)
            .take_while(|d| d * d <= v)
            .all(|d| !v.is_multiple_of(d))
}

/// Products of two primes that each fit in n bits (the "prime case").
pub fn prime_outputs(n: usize) -> Vec<u64> {
    let primes: Vec<u64> = (2..1u64 << n).filter(|&v| is_prime(v)).collect();
    let mut outs = Vec::new();
    for (i, &p) in primes.iter().enumerate() {
        for &q in &primes[i..] {
            outs.push(p * q);
        }
    }
    outs.sort_unstable();
    outs.dedup();
    outs
}

/// Per-output result of a convergence survey.
#[derive(Clone, Debug)]
pub struct OutputConvergence {
    pub output: u64,
    /// Convergence cycles (from run start) of the converging seeds.
    pub cycles: Vec<u64>,
    /// Same, measured from the final anneal step (0 if converged earlier).
    pub post_anneal: Vec<u64>,
    pub successes: u32,
    pub seeds: u32,
    /// True if every converging seed ended on a correct factor pair.
    pub all_correct: bool,
}

/// Aggregate of a convergence survey.
#[derive(Clone, Debug)]
pub struct ConvergenceSummary {
    pub per_output: Vec<OutputConvergence>,
    pub mean_cycles: f64,
    pub worst_cycles: u64,
    pub success_rate: f64,
}

/// Reverse-run convergence statistics over a set of outputs and seeds, using
/// the restart protocol. Per-run seeds derive as seed + run index; runs fan
/// out across threads.
#[allow(clippy::too_many_arguments)]
pub fn convergence_stats(
    circuit: &ComposedCircuit,
    outputs: &[u64],
    anneal: (i32, i32),
    attempt_cycles: u64,
    cycles: u64,
    seeds: u64,
    base_seed: u64,
    acc_bits: u32,
) -> ConvergenceSummary {
    let last_step =
        AnnealSchedule::staircase(anneal.0, anneal.1, 0, attempt_cycles / 2).last_step_cycle();
    let per_output: Vec<OutputConvergence> = outputs
        .par_iter()
        .map(|&c| {
            let mut cyc = Vec::new();
            let mut post = Vec::new();
            let mut successes = 0;
            let mut all_correct = true;
            for k in 0..seeds {
                let rs = run_reverse_annealed(
                    circuit,
                    c,
                    anneal,
                    attempt_cycles,
                    cycles,
                    base_seed + k * 0x10001,
                    acc_bits,
                );
                if let Some(t) = rs.convergence_cycle {
                    if rs.final_a * rs.final_b == c {
                        successes += 1;
                        cyc.push(t);
                        post.push((t % attempt_cycles).saturating_sub(last_step));
                    } else {
                        all_correct = false;
                    }
                }
            }
            OutputConvergence {
                output: c,
                cycles: cyc,
                post_anneal: post,
                successes,
                seeds: seeds as u32,
                all_correct,
            }
        })
        .collect();
    let all_cycles: Vec<u64> = per_output.iter().flat_map(|o| o.cycles.clone()).collect();
    let total_runs: u64 = outputs.len() as u64 * seeds;
    let total_success: u64 = per_output.iter().map(|o| u64::from(o.successes)).sum();
    ConvergenceSummary {
        mean_cycles: if all_cycles.is_empty() {
            f64::NAN
        } else {
            all_cycles.iter().sum::<u64>() as f64 / all_cycles.len() as f64
        },
        worst_cycles: all_cycles.iter().copied().max().unwrap_or(0),
        success_rate: total_success as f64 / total_runs as f64,
        per_output,
    }
}
