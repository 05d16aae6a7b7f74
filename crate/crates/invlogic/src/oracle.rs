//! Brute-force verifier: exhaustive energy enumeration establishing that the
//! degenerate ground states of a Hamiltonian are exactly its valid logic states.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;

use crate::catalog::GateSpec;
use crate::composer::ComposedCircuit;
use crate::engine::{ClampSpec, Hamiltonian};
use crate::Spin;

/// Refuse enumerations beyond this many free assignments.
pub const ENUM_BUDGET_BITS: u32 = 24;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
#[error("{0} free nodes exceed the enumeration budget of 2^{ENUM_BUDGET_BITS} states")]
pub struct BudgetExceeded(pub usize);

/// Full enumeration result: ground set plus the energy spectrum.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EnergyReport {
    pub ground_energy: i64,
    pub ground_states: BTreeSet<Vec<Spin>>,
    pub spectrum: BTreeMap<i64, u64>,
}

/// Ising energy E(m) = -(h.m + sum_{i<j} J_ij m_i m_j).
pub fn energy(ham: &Hamiltonian, m: &[Spin]) -> i64 {
    let n = ham.n();
    let mut e = 0i64;
    for i in 0..n {
        e += i64::from(ham.h[i]) * i64::from(m[i]);
        for k in i + 1..n {
            e += i64::from(ham.j[i][k]) * i64::from(m[i]) * i64::from(m[k]);
        }
    }
    -e
}

fn assignment(ham: &Hamiltonian, clamps: &ClampSpec, free: &[usize], bits: u64) -> Vec<Spin> {
    let mut m = vec![0 as Spin; ham.n()];
    for (i, s) in clamps.iter() {
        m[i] = s;
    }
    for (k, &i) in free.iter().enumerate() {
        m[i] = if (bits >> k) & 1 == 1 { 1 } else { -1 };
    }
    m
}

/// Enumerate every assignment consistent with the clamps.
pub fn ground_states(
    ham: &Hamiltonian,
    clamps: &ClampSpec,
) -> Result<EnergyReport, BudgetExceeded> {
    let free: Vec<usize> = (0..ham.n()).filter(|&i| clamps.get(i).is_none()).collect();
    if free.len() as u32 > ENUM_BUDGET_BITS {
        return Err(BudgetExceeded(free.len()));
    }
    let total = 1u64 << free.len();
    let chunks = rayon::current_num_threads().next_power_of_two() as u64;
    let chunk = (total / chunks).max(1);
    type Partial = (i64, BTreeSet<Vec<Spin>>, BTreeMap<i64, u64>);
    let partials: Vec<Partial> = (0..total)
        .step_by(chunk as usize)
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|start| {
            let mut best = i64::MAX;
            let mut ground = BTreeSet::new();
            let mut spectrum = BTreeMap::new();
            for bits in start..(start + chunk).min(total) {
                let m = assignment(ham, clamps, &free, bits);
                let e = energy(ham, &m);
                *spectrum.entry(e).or_insert(0u64) += 1;
                if e < best {
                    best = e;
                    ground.clear();
                }
                if e == best {
                    ground.insert(m);
                }
            }
            (best, ground, spectrum)
        })
        .collect();
    let ground_energy = partials.iter().map(|p| p.0).min().unwrap();
    let mut ground_states = BTreeSet::new();
    let mut spectrum = BTreeMap::new();
    for (e, g, s) in partials {
        if e == ground_energy {
            ground_states.extend(g);
        }
        for (k, v) in s {
            *spectrum.entry(k).or_insert(0) += v;
        }
    }
    Ok(EnergyReport {
        ground_energy,
        ground_states,
        spectrum,
    })
}

/// Outcome of comparing ground states against a Boolean valid-state set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Validation {
    pub ok: bool,
    /// Ground states that are not valid logic states.
    pub spurious: BTreeSet<Vec<Spin>>,
    /// Valid logic states missing from the ground set.
    pub missing: BTreeSet<Vec<Spin>>,
    pub report: EnergyReport,
}

fn diff(report: EnergyReport, valid: &BTreeSet<Vec<Spin>>) -> Validation {
    let spurious: BTreeSet<_> = report.ground_states.difference(valid).cloned().collect();
    let missing: BTreeSet<_> = valid.difference(&report.ground_states).cloned().collect();
    Validation {
        ok: spurious.is_empty() && missing.is_empty(),
        spurious,
        missing,
        report,
    }
}

/// Check a catalog gate: ground states must equal its valid-state set.
pub fn validate_gate(spec: &GateSpec) -> Result<Validation, BudgetExceeded> {
    let report = ground_states(&spec.hamiltonian, &ClampSpec::new())?;
    Ok(diff(report, &spec.valid_states))
}

/// Check a composed circuit: ground states must equal the set of assignments
/// where every constituent gate instance sits in a valid state.
pub fn validate_circuit(circuit: &ComposedCircuit) -> Result<Validation, BudgetExceeded> {
    let report = ground_states(&circuit.hamiltonian, &ClampSpec::new())?;
    let n = circuit.hamiltonian.n();
    if n as u32 > ENUM_BUDGET_BITS {
        return Err(BudgetExceeded(n));
    }
    let mut valid = BTreeSet::new();
    for bits in 0..1u64 << n {
        let m: Vec<Spin> = (0..n)
            .map(|k| if (bits >> k) & 1 == 1 { 1 } else { -1 })
            .collect();
        if circuit.is_valid_state(&m) {
            valid.insert(m);
        }
    }
    Ok(diff(report, &valid))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{gate, GateKind};

    #[test]
    fn and_energies() {
        let ham = gate(GateKind::And).hamiltonian;
        assert_eq!(energy(&ham, &[1, 1, 1]), -3);
        assert_eq!(energy(&ham, &[1, 1, -1]), 1);
        let zero = Hamiltonian {
            labels: vec!["a".into(), "b".into()],
            h: vec![0, 0],
            j: vec![vec![0, 0], vec![0, 0]],
            weight_bits: 2,
        };
        assert_eq!(energy(&zero, &[1, -1]), 0);
    }

    #[test]
    fn and_ground_set() {
        let spec = gate(GateKind::And);
        let rep = ground_states(&spec.hamiltonian, &ClampSpec::new()).unwrap();
        assert_eq!(rep.ground_energy, -3);
        assert_eq!(rep.ground_states, spec.valid_states);
        // Every invalid state strictly above ground.
        assert!(rep.spectrum.keys().all(|&e| e == -3 || e >= 1));
    }

    #[test]
    fn and_clamped_output_low() {
        let spec = gate(GateKind::And);
        let mut clamps = ClampSpec::new();
        clamps.set(2, -1);
        let rep = ground_states(&spec.hamiltonian, &clamps).unwrap();
        let ab: BTreeSet<(Spin, Spin)> = rep.ground_states.iter().map(|m| (m[0], m[1])).collect();
        assert_eq!(ab, [(-1, -1), (-1, 1), (1, -1)].into_iter().collect());
    }

    #[test]
    fn and_clamped_output_high() {
        let spec = gate(GateKind::And);
        let mut clamps = ClampSpec::new();
        clamps.set(2, 1);
        let rep = ground_states(&spec.hamiltonian, &clamps).unwrap();
        assert_eq!(rep.ground_states.len(), 1);
        assert!(rep.ground_states.contains(&vec![1, 1, 1]));
    }

    #[test]
    fn mutated_gate_fails_validation() {
        let mut spec = gate(GateKind::And);
        spec.hamiltonian.h[2] = 2;
        let v = validate_gate(&spec).unwrap();
        assert!(!v.ok);
        assert!(!v.spurious.is_empty() || !v.missing.is_empty());
    }

    #[test]
    fn budget_refusal() {
        let n = 30usize;
        let ham = Hamiltonian {
            labels: (0..n).map(|i| format!("n{i}")).collect(),
            h: vec![0; n],
            j: vec![vec![0; n]; n],
            weight_bits: 2,
        };
        assert_eq!(
            ground_states(&ham, &ClampSpec::new()),
            Err(BudgetExceeded(30))
        );
    }
}
