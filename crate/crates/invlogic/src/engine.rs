//! Cycle-accurate synchronous simulation of a Boltzmann-machine network of
//! saturating-accumulator spiking neurons, with clamping and a noise schedule.

use std::collections::BTreeMap;

use crate::prng::RngBank;
use crate::{spin_of_bit, Spin};

/// Integer bias vector h and symmetric integer coupling matrix J with node
/// labels; `weight_bits` is the signed two's-complement precision every entry
/// must fit in.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Hamiltonian {
    pub labels: Vec<String>,
    pub h: Vec<i32>,
    pub j: Vec<Vec<i32>>,
    pub weight_bits: u32,
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum HamiltonianError {
    #[error("inconsistent dimensions: {0} labels, {1} biases, {2} matrix rows")]
    Dimensions(usize, usize, usize),
    #[error("J[{0}][{1}] = {2} but J[{1}][{0}] = {3}: matrix must be symmetric")]
    Asymmetric(usize, usize, i32, i32),
    #[error("J[{0}][{0}] = {1}: diagonal must be zero")]
    Diagonal(usize, i32),
    #[error("entry {0} does not fit in {1} signed bits")]
    WeightOverflow(i32, u32),
}

/// Minimal signed two's-complement width holding `v`.
pub fn signed_bits_for(v: i32) -> u32 {
    let mut b = 1;
    while i64::from(v) < -(1i64 << (b - 1)) || i64::from(v) > (1i64 << (b - 1)) - 1 {
        b += 1;
    }
    b
}

impl Hamiltonian {
    pub fn n(&self) -> usize {
        self.h.len()
    }

    pub fn validate(&self) -> Result<(), HamiltonianError> {
        let n = self.h.len();
        if self.labels.len() != n || self.j.len() != n || self.j.iter().any(|r| r.len() != n) {
            return Err(HamiltonianError::Dimensions(
                self.labels.len(),
                n,
                self.j.len(),
            ));
        }
        for i in 0..n {
            if self.j[i][i] != 0 {
                return Err(HamiltonianError::Diagonal(i, self.j[i][i]));
            }
            for k in 0..i {
                if self.j[i][k] != self.j[k][i] {
                    return Err(HamiltonianError::Asymmetric(
                        i,
                        k,
                        self.j[i][k],
                        self.j[k][i],
                    ));
                }
            }
        }
        let lo = -(1i64 << (self.weight_bits - 1));
        let hi = (1i64 << (self.weight_bits - 1)) - 1;
        for &v in self.h.iter().chain(self.j.iter().flatten()) {
            if i64::from(v) < lo || i64::from(v) > hi {
                return Err(HamiltonianError::WeightOverflow(v, self.weight_bits));
            }
        }
        Ok(())
    }

    /// Minimal weight_bits holding every entry.
    pub fn min_weight_bits(&self) -> u32 {
        self.h
            .iter()
            .chain(self.j.iter().flatten())
            .map(|&v| signed_bits_for(v))
            .max()
            .unwrap_or(1)
    }
}

/// Nodes forced to fixed logic values for the duration of a run.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ClampSpec {
    entries: BTreeMap<usize, Spin>,
}

impl ClampSpec {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, node: usize, value: Spin) {
        assert!(value == 1 || value == -1);
        self.entries.insert(node, value);
    }

    /// Clamp an ordered bit group (index 0 = LSB) to an unsigned value.
    pub fn set_group(&mut self, group: &[usize], value: u64) {
        for (k, &node) in group.iter().enumerate() {
            self.set(node, spin_of_bit((value >> k) & 1 == 1));
        }
    }

    pub fn get(&self, node: usize) -> Option<Spin> {
        self.entries.get(&node).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, Spin)> + '_ {
        self.entries.iter().map(|(&i, &s)| (i, s))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Piecewise-constant noise-weight schedule over cycles.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AnnealSchedule {
    segments: Vec<(u64, i32)>,
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum ScheduleError {
    #[error("schedule must start at cycle 0 (first segment starts at {0})")]
    MissingStart(u64),
    #[error("segment starts not strictly increasing at cycle {0}")]
    NotIncreasing(u64),
    #[error("negative noise weight {0}")]
    NegativeWeight(i32),
    #[error("empty schedule")]
    Empty,
}

impl AnnealSchedule {
    pub fn new(segments: Vec<(u64, i32)>) -> Result<Self, ScheduleError> {
        let first = segments.first().ok_or(ScheduleError::Empty)?;
        if first.0 != 0 {
            return Err(ScheduleError::MissingStart(first.0));
        }
        for w in segments.windows(2) {
            if w[1].0 <= w[0].0 {
                return Err(ScheduleError::NotIncreasing(w[1].0));
            }
        }
        if let Some(&(_, w)) = segments.iter().find(|&&(_, w)| w < 0) {
            return Err(ScheduleError::NegativeWeight(w));
        }
        Ok(Self { segments })
    }

    pub fn constant(w: i32) -> Self {
        Self::new(vec![(0, w)]).unwrap()
    }

    /// Hold `w_hi` until `from`, then step down one unit at a time, evenly
    /// spaced over [from, to), ending at `w_lo`.
    pub fn staircase(w_hi: i32, w_lo: i32, from: u64, to: u64) -> Self {
        assert!(w_hi >= w_lo && to > from);
        let steps = (w_hi - w_lo + 1) as u64;
        let seg = ((to - from) / steps).max(1);
        let mut segments = vec![(0, w_hi)];
        for k in 0..steps {
            segments.push((from + k * seg, w_hi - k as i32));
        }
        // `from` may duplicate the initial w_hi segment; drop redundant entries.
        segments.dedup_by(|b, a| a.1 == b.1);
        Self::new(segments).unwrap()
    }

    pub fn w_at(&self, cycle: u64) -> i32 {
        match self.segments.binary_search_by_key(&cycle, |s| s.0) {
            Ok(i) => self.segments[i].1,
            Err(i) => self.segments[i - 1].1,
        }
    }

    pub fn segments(&self) -> &[(u64, i32)] {
        &self.segments
    }

    /// Start cycle of the last segment (where the final noise weight applies).
    pub fn last_step_cycle(&self) -> u64 {
        self.segments.last().map(|s| s.0).unwrap_or(0)
    }
}

/// Per-node saturating accumulators plus current bipolar outputs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NetworkState {
    pub acc: Vec<i32>,
    pub out: Vec<Spin>,
}

impl NetworkState {
    /// Initial state: accumulators at zero, free outputs drawn from one noise
    /// word per node, clamped nodes pinned to their rail.
    pub fn init(n: usize, clamps: &ClampSpec, acc_bits: u32, bank: &mut RngBank) -> Self {
        bank.refresh();
        let mut st = Self {
            acc: vec![0; n],
            out: (0..n).map(|i| bank.spin(i)).collect(),
        };
        for (i, s) in clamps.iter() {
            st.out[i] = s;
            st.acc[i] = rail(s, acc_bits);
        }
        st
    }
}

fn rail(s: Spin, acc_bits: u32) -> i32 {
    if s > 0 {
        (1 << (acc_bits - 1)) - 1
    } else {
        -(1 << (acc_bits - 1))
    }
}

/// Exact integer input sum of node i: h[i] + sum_j J[i][j] m[j] + w_rnd * noise.
pub fn node_input(i: usize, m: &[Spin], ham: &Hamiltonian, w_rnd: i32, noise: Spin) -> i32 {
    let coupling: i32 = ham.j[i]
        .iter()
        .zip(m)
        .map(|(&j, &s)| j * i32::from(s))
        .sum();
    ham.h[i] + coupling + w_rnd * i32::from(noise)
}

/// One saturating-accumulator update; output is the accumulator sign
/// (tie at zero counts as +1).
pub fn node_update(acc: i32, input: i32, acc_bits: u32) -> (i32, Spin) {
    let lo = -(1 << (acc_bits - 1));
    let hi = (1 << (acc_bits - 1)) - 1;
    let acc = (acc + input).clamp(lo, hi);
    (acc, if acc >= 0 { 1 } else { -1 })
}

/// Node evaluation discipline for `step`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UpdateMode {
    /// All free nodes update in parallel from the previous cycle's outputs.
    Synchronous,
    /// Debug mode: one free node per cycle, fixed round-robin order.
    Sequential,
}

/// Sparse row form of J for the hot loop.
struct Adjacency {
    rows: Vec<Vec<(u32, i32)>>,
}

impl Adjacency {
    fn of(ham: &Hamiltonian) -> Self {
        let rows = ham
            .j
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .filter(|&(_, &v)| v != 0)
                    .map(|(k, &v)| (k as u32, v))
                    .collect()
            })
            .collect();
        Self { rows }
    }

    fn input(&self, i: usize, h: i32, m: &[Spin], w_rnd: i32, noise: Spin) -> i32 {
        let coupling: i32 = self.rows[i]
            .iter()
            .map(|&(k, v)| v * i32::from(m[k as usize]))
            .sum();
        h + coupling + w_rnd * i32::from(noise)
    }
}

/// Advance one synchronous cycle. Clamped nodes keep their output and stay
/// pinned at the matching accumulator rail.
pub fn step(
    state: &mut NetworkState,
    ham: &Hamiltonian,
    clamps: &ClampSpec,
    w_rnd: i32,
    acc_bits: u32,
    bank: &mut RngBank,
) {
    bank.refresh();
    let prev = state.out.clone();
    for i in 0..ham.n() {
        if clamps.get(i).is_some() {
            continue;
        }
        let input = node_input(i, &prev, ham, w_rnd, bank.spin(i));
        let (acc, out) = node_update(state.acc[i], input, acc_bits);
        state.acc[i] = acc;
        state.out[i] = out;
    }
}

/// Decode an ordered bit group (index 0 = LSB) from a spin vector.
pub fn decode_terminals(m: &[Spin], group: &[usize]) -> u64 {
    group
        .iter()
        .enumerate()
        .map(|(k, &i)| u64::from(m[i] > 0) << k)
        .sum()
}

/// Run parameters beyond the circuit/clamp/schedule triple.
#[derive(Clone, Debug)]
pub struct RunOptions {
    pub cycles: u64,
    pub seed: u64,
    pub acc_bits: u32,
    pub mode: UpdateMode,
    /// Record a full output snapshot every this many cycles (0 = never).
    pub snapshot_every: u64,
}

impl RunOptions {
    pub fn new(cycles: u64, seed: u64, acc_bits: u32) -> Self {
        Self {
            cycles,
            seed,
            acc_bits,
            mode: UpdateMode::Synchronous,
            snapshot_every: 64,
        }
    }
}

/// Per-cycle record of decoded terminal groups, plus decimated full snapshots.
#[derive(Clone, Debug)]
pub struct RunTrace {
    pub cycles: u64,
    pub groups: Vec<String>,
    /// terminal_values[g][t] = decoded value of group g after cycle t.
    pub terminal_values: Vec<Vec<u64>>,
    pub snapshots: Vec<(u64, Vec<Spin>)>,
    pub final_state: NetworkState,
}

/// Execute `cycles` steps under the schedule, recording the watched groups
/// every cycle. Deterministic in the seed.
pub fn run(
    ham: &Hamiltonian,
    clamps: &ClampSpec,
    schedule: &AnnealSchedule,
    watch: &[(String, Vec<usize>)],
    opts: &RunOptions,
) -> RunTrace {
    run_with_freeze(ham, clamps, schedule, watch, opts, None)
}

/// Judges whether an output vector is a solution worth locking in.
pub type SolutionDetector<'a> = &'a dyn Fn(&[Spin]) -> bool;

/// Like `run`, but with an optional solution detector: once `freeze_when`
/// reports the output vector as a solution, the noise weight is forced to
/// zero for the rest of the run so the state locks in place. The detector is
/// a local property (each gate checks its own terminals), so this models an
/// on-chip convergence monitor rather than an oracle.
pub fn run_with_freeze(
    ham: &Hamiltonian,
    clamps: &ClampSpec,
    schedule: &AnnealSchedule,
    watch: &[(String, Vec<usize>)],
    opts: &RunOptions,
    freeze_when: Option<SolutionDetector<'_>>,
) -> RunTrace {
    assert!(opts.cycles > 0, "cycle budget must be positive");
    assert!(opts.acc_bits >= 2);
    let n = ham.n();
    let adj = Adjacency::of(ham);
    let mut bank = RngBank::new(n, opts.seed);
    let mut state = NetworkState::init(n, clamps, opts.acc_bits, &mut bank);
    let free: Vec<u32> = (0..n as u32)
        .filter(|&i| clamps.get(i as usize).is_none())
        .collect();
    let mut prev = state.out.clone();
    let mut terminal_values: Vec<Vec<u64>> = watch
        .iter()
        .map(|_| Vec::with_capacity(opts.cycles as usize))
        .collect();
    let mut snapshots = Vec::new();
    let lo = -(1 << (opts.acc_bits - 1));
    let hi = (1 << (opts.acc_bits - 1)) - 1;
    let mut frozen = false;
    for t in 0..opts.cycles {
        let w = if frozen { 0 } else { schedule.w_at(t) };
        bank.refresh();
        match opts.mode {
            UpdateMode::Synchronous => {
                prev.copy_from_slice(&state.out);
                for &i in &free {
                    let i = i as usize;
                    let input = adj.input(i, ham.h[i], &prev, w, bank.spin(i));
                    let acc = (state.acc[i] + input).clamp(lo, hi);
                    state.acc[i] = acc;
                    state.out[i] = if acc >= 0 { 1 } else { -1 };
                }
            }
            UpdateMode::Sequential => {
                if !free.is_empty() {
                    let i = free[(t % free.len() as u64) as usize] as usize;
                    let input = adj.input(i, ham.h[i], &state.out, w, bank.spin(i));
                    let (acc, out) = node_update(state.acc[i], input, opts.acc_bits);
                    state.acc[i] = acc;
                    state.out[i] = out;
                }
            }
        }
        if !frozen {
            if let Some(pred) = freeze_when {
                frozen = pred(&state.out);
            }
        }
        for (vals, (_, group)) in terminal_values.iter_mut().zip(watch) {
            vals.push(decode_terminals(&state.out, group));
        }
        if opts.snapshot_every > 0 && t % opts.snapshot_every == 0 {
            snapshots.push((t, state.out.clone()));
        }
    }
    RunTrace {
        cycles: opts.cycles,
        groups: watch.iter().map(|(name, _)| name.clone()).collect(),
        terminal_values,
        snapshots,
        final_state: state,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{gate, GateKind};

    fn and_ham() -> Hamiltonian {
        gate(GateKind::And).hamiltonian
    }

    #[test]
    fn input_sum_examples() {
        let ham = and_ham();
        // Output node pulled up by both inputs high.
        assert_eq!(node_input(2, &[1, 1, 1], &ham, 0, 1), 2);
        // Zero network.
        let zero = Hamiltonian {
            labels: vec!["x".into()],
            h: vec![0],
            j: vec![vec![0]],
            weight_bits: 3,
        };
        assert_eq!(node_input(0, &[1], &zero, 0, -1), 0);
        // Input node with everything pulling low.
        assert_eq!(node_input(0, &[1, -1, -1], &ham, 3, -1), -3);
    }

    #[test]
    fn accumulator_saturates() {
        assert_eq!(node_update(0, 2, 4), (2, 1));
        assert_eq!(node_update(7, 5, 4), (7, 1));
        assert_eq!(node_update(-8, -1, 4), (-8, -1));
    }

    #[test]
    fn memoryless_limit_is_sign_of_input() {
        // With the accumulator reset each update, out = sgn(I) for I != 0.
        for input in [-5, -1, 1, 2, 7] {
            let (_, out) = node_update(0, input, 8);
            assert_eq!(i32::from(out), input.signum());
        }
    }

    #[test]
    fn clamp_holds_under_noise() {
        let ham = and_ham();
        let mut clamps = ClampSpec::new();
        clamps.set(2, 1);
        let sched = AnnealSchedule::constant(7);
        let trace = run(
            &ham,
            &clamps,
            &sched,
            &[("Y".into(), vec![2])],
            &RunOptions::new(256, 9, 5),
        );
        assert!(trace.terminal_values[0].iter().all(|&v| v == 1));
    }

    #[test]
    fn noiseless_descent_to_and_output() {
        let ham = and_ham();
        let mut clamps = ClampSpec::new();
        clamps.set(0, 1);
        clamps.set(1, 1);
        let sched = AnnealSchedule::constant(0);
        for seed in 0..8 {
            let acc_bits = 5;
            let trace = run(
                &ham,
                &clamps,
                &sched,
                &[("Y".into(), vec![2])],
                &RunOptions::new(64, seed, acc_bits),
            );
            let vals = &trace.terminal_values[0];
            // I_Y = +2 each cycle: reaches 1 within acc_bits cycles, then holds.
            assert!(vals[acc_bits as usize..].iter().all(|&v| v == 1));
        }
    }

    #[test]
    fn deterministic_repeat() {
        let ham = and_ham();
        let clamps = ClampSpec::new();
        let sched = AnnealSchedule::new(vec![(0, 5), (100, 3)]).unwrap();
        let watch = vec![("all".to_string(), vec![0, 1, 2])];
        let opts = RunOptions::new(500, 1234, 5);
        let a = run(&ham, &clamps, &sched, &watch, &opts);
        let b = run(&ham, &clamps, &sched, &watch, &opts);
        assert_eq!(a.terminal_values, b.terminal_values);
        assert_eq!(a.snapshots, b.snapshots);
    }

    #[test]
    fn free_running_and_visits_all_valid_states() {
        let spec = gate(GateKind::And);
        let sched = AnnealSchedule::constant(5);
        let trace = run(
            &spec.hamiltonian,
            &ClampSpec::new(),
            &sched,
            &[("ABY".into(), vec![0, 1, 2])],
            &RunOptions::new(1 << 16, 3, 5),
        );
        let mut seen = std::collections::BTreeSet::new();
        for &v in &trace.terminal_values[0] {
            seen.insert(v);
        }
        for valid in [0b000, 0b001, 0b010, 0b111] {
            assert!(seen.contains(&valid), "missing state {valid:03b}");
        }
    }

    #[test]
    fn clamped_and_stays_valid() {
        let spec = gate(GateKind::And);
        let mut clamps = ClampSpec::new();
        clamps.set(2, -1);
        let sched = AnnealSchedule::constant(5);
        let trace = run(
            &spec.hamiltonian,
            &clamps,
            &sched,
            &[("AB".into(), vec![0, 1]), ("Y".into(), vec![2])],
            &RunOptions::new(1 << 14, 5, 5),
        );
        assert!(trace.terminal_values[1].iter().all(|&v| v == 0));
        let mut seen = std::collections::BTreeSet::new();
        for &v in &trace.terminal_values[0] {
            seen.insert(v);
        }
        // All three valid (A, B) pairs appear; (1,1) may flash transiently.
        for valid in [0u64, 1, 2] {
            assert!(seen.contains(&valid));
        }
    }

    #[test]
    fn schedule_lookup() {
        let s = AnnealSchedule::new(vec![(0, 11), (100, 7), (200, 5)]).unwrap();
        assert_eq!(s.w_at(0), 11);
        assert_eq!(s.w_at(99), 11);
        assert_eq!(s.w_at(100), 7);
        assert_eq!(s.w_at(1000), 5);
        assert_eq!(s.last_step_cycle(), 200);
    }

    #[test]
    fn staircase_shape() {
        let s = AnnealSchedule::staircase(5, 3, 100, 160);
        assert_eq!(s.segments(), &[(0, 5), (120, 4), (140, 3)]);
        let s = AnnealSchedule::staircase(11, 5, 700, 1400);
        assert_eq!(s.w_at(699), 11);
        assert_eq!(s.w_at(1399), 5);
        assert_eq!(s.last_step_cycle(), 1300);
    }

    #[test]
    fn schedule_validation() {
        assert!(AnnealSchedule::new(vec![]).is_err());
        assert!(AnnealSchedule::new(vec![(5, 1)]).is_err());
        assert!(AnnealSchedule::new(vec![(0, 1), (0, 2)]).is_err());
        assert!(AnnealSchedule::new(vec![(0, -1)]).is_err());
    }

    #[test]
    fn hamiltonian_validation() {
        let mut ham = and_ham();
        assert_eq!(ham.validate(), Ok(()));
        assert_eq!(ham.min_weight_bits(), 3);
        ham.j[0][1] = 5;
        assert!(matches!(
            ham.validate(),
            Err(HamiltonianError::Asymmetric(..))
        ));
        let mut ham = and_ham();
        ham.j[1][1] = 1;
        assert!(matches!(
            ham.validate(),
            Err(HamiltonianError::Diagonal(..))
        ));
        let mut ham = and_ham();
        ham.h[0] = 4;
        assert!(matches!(
            ham.validate(),
            Err(HamiltonianError::WeightOverflow(4, 3))
        ));
    }

    #[test]
    fn sequential_mode_runs() {
        let ham = and_ham();
        let mut opts = RunOptions::new(512, 7, 5);
        opts.mode = UpdateMode::Sequential;
        let trace = run(
            &ham,
            &ClampSpec::new(),
            &AnnealSchedule::constant(5),
            &[("ABY".into(), vec![0, 1, 2])],
            &opts,
        );
        assert_eq!(trace.terminal_values[0].len(), 512);
    }
}
