//! Gate Hamiltonian library: each gate's (h, J) pair paired with its terminal
//! roles and the Boolean valid-state set its ground states must reproduce.

use std::collections::BTreeSet;

use crate::engine::Hamiltonian;
use crate::{spin_of_bit, Spin};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GateKind {
    And,
    Nand,
    Or,
    Nor,
    XorOr,
    XorNor,
    Ha,
    HaAlt,
    Fa,
}

impl GateKind {
    pub const ALL: [GateKind; 9] = [
        GateKind::And,
        GateKind::Nand,
        GateKind::Or,
        GateKind::Nor,
        GateKind::XorOr,
        GateKind::XorNor,
        GateKind::Ha,
        GateKind::HaAlt,
        GateKind::Fa,
    ];

    pub fn name(self) -> &'static str {
        match self {
            GateKind::And => "AND",
            GateKind::Nand => "NAND",
            GateKind::Or => "OR",
            GateKind::Nor => "NOR",
            GateKind::XorOr => "XOR_OR",
            GateKind::XorNor => "XOR_NOR",
            GateKind::Ha => "HA",
            GateKind::HaAlt => "HA_ALT",
            GateKind::Fa => "FA",
        }
    }

    pub fn parse(s: &str) -> Option<GateKind> {
        GateKind::ALL.into_iter().find(|k| k.name() == s)
    }
}

/// Terminal roles of a gate's nodes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Terminals {
    pub inputs: Vec<usize>,
    pub outputs: Vec<usize>,
    pub aux: Vec<usize>,
}

/// A gate Hamiltonian plus its terminal roles and Boolean valid-state set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GateSpec {
    pub kind: GateKind,
    pub hamiltonian: Hamiltonian,
    pub terminals: Terminals,
    pub valid_states: BTreeSet<Vec<Spin>>,
}

impl GateSpec {
    pub fn n(&self) -> usize {
        self.hamiltonian.n()
    }

    /// Uniformly scale h and J by a positive integer. Ground states (and hence
    /// the valid-state set) are unchanged; only the energy gaps grow.
    pub fn scaled(&self, k: i32) -> GateSpec {
        assert!(k >= 1);
        let mut ham = self.hamiltonian.clone();
        for v in ham.h.iter_mut().chain(ham.j.iter_mut().flatten()) {
            *v *= k;
        }
        ham.weight_bits = ham.min_weight_bits();
        GateSpec {
            hamiltonian: ham,
            ..self.clone()
        }
    }
}

fn ham(labels: &[&str], h: &[i32], j: &[&[i32]]) -> Hamiltonian {
    let ham = Hamiltonian {
        labels: labels.iter().map(|s| s.to_string()).collect(),
        h: h.to_vec(),
        j: j.iter().map(|r| r.to_vec()).collect(),
        weight_bits: 3,
    };
    debug_assert_eq!(ham.validate(), Ok(()));
    ham
}

/// Boolean function of a gate: output (and auxiliary) bits from input bits.
fn eval(kind: GateKind, inp: &[bool]) -> Vec<bool> {
    match kind {
        GateKind::And => vec![inp[0] & inp[1]],
        GateKind::Nand => vec![!(inp[0] & inp[1])],
        GateKind::Or => vec![inp[0] | inp[1]],
        GateKind::Nor => vec![!(inp[0] | inp[1])],
        // Y = A xor B, auxiliary node carries OR / NOR respectively.
        GateKind::XorOr => vec![inp[0] ^ inp[1], inp[0] | inp[1]],
        GateKind::XorNor => vec![inp[0] ^ inp[1], !(inp[0] | inp[1])],
        GateKind::Ha => vec![inp[0] ^ inp[1], inp[0] & inp[1]],
        // Node order (A, B, C, S, aux): carry before sum, NOR-of-inputs aux.
        GateKind::HaAlt => vec![inp[0] & inp[1], inp[0] ^ inp[1], !(inp[0] | inp[1])],
        GateKind::Fa => {
            let sum = inp[0] ^ inp[1] ^ inp[2];
            let carry = (inp[0] & inp[1]) | (inp[2] & (inp[0] ^ inp[1]));
            vec![sum, carry]
        }
    }
}

fn n_inputs(kind: GateKind) -> usize {
    match kind {
        GateKind::Fa => 3,
        _ => 2,
    }
}

/// All spin assignments satisfying the gate's Boolean relation (auxiliary
/// nodes take their defined function's value). Node order: inputs, then the
/// outputs/aux in the gate's node order.
pub fn truth_table(kind: GateKind) -> BTreeSet<Vec<Spin>> {
    let ni = n_inputs(kind);
    let mut set = BTreeSet::new();
    for bits in 0..1u32 << ni {
        let inp: Vec<bool> = (0..ni).map(|k| (bits >> k) & 1 == 1).collect();
        let out = eval(kind, &inp);
        let state: Vec<Spin> = inp
            .iter()
            .chain(out.iter())
            .map(|&b| spin_of_bit(b))
            .collect();
        set.insert(state);
    }
    set
}

/// The gate library. AND/XOR/HA/HA_ALT/FA carry hand-built coefficient
/// matrices; NAND/OR/NOR are derived from AND by spin-flip.
pub fn gate(kind: GateKind) -> GateSpec {
    let (hamiltonian, terminals) = match kind {
        GateKind::And => (
            ham(
                &["A", "B", "Y"],
                &[1, 1, -2],
                &[&[0, -1, 2], &[-1, 0, 2], &[2, 2, 0]],
            ),
            Terminals {
                inputs: vec![0, 1],
                outputs: vec![2],
                aux: vec![],
            },
        ),
        GateKind::Nand => {
            let mut spec = negate_node(&gate(GateKind::And), 2);
            spec.kind = GateKind::Nand;
            spec.hamiltonian.labels[2] = "Y".into();
            spec.valid_states = truth_table(GateKind::Nand);
            return spec;
        }
        GateKind::Or => {
            // De Morgan: OR(A,B) = NAND(!A, !B); flip both inputs of NAND.
            let mut spec = negate_node(&negate_node(&gate(GateKind::Nand), 0), 1);
            spec.kind = GateKind::Or;
            spec.hamiltonian.labels = vec!["A".into(), "B".into(), "Y".into()];
            spec.valid_states = truth_table(GateKind::Or);
            return spec;
        }
        GateKind::Nor => {
            let mut spec = negate_node(&gate(GateKind::Or), 2);
            spec.kind = GateKind::Nor;
            spec.hamiltonian.labels[2] = "Y".into();
            spec.valid_states = truth_table(GateKind::Nor);
            return spec;
        }
        GateKind::XorOr => (
            ham(
                &["A", "B", "Y", "OR"],
                &[-1, -1, -1, 2],
                &[
                    &[0, -1, -1, 2],
                    &[-1, 0, -1, 2],
                    &[-1, -1, 0, 2],
                    &[2, 2, 2, 0],
                ],
            ),
            Terminals {
                inputs: vec![0, 1],
                outputs: vec![2],
                aux: vec![3],
            },
        ),
        GateKind::XorNor => (
            ham(
                &["A", "B", "Y", "NOR"],
                &[-1, -1, -1, -2],
                &[
                    &[0, -1, -1, -2],
                    &[-1, 0, -1, -2],
                    &[-1, -1, 0, -2],
                    &[-2, -2, -2, 0],
                ],
            ),
            Terminals {
                inputs: vec![0, 1],
                outputs: vec![2],
                aux: vec![3],
            },
        ),
        GateKind::Ha => (
            ham(
                &["A", "B", "S", "C"],
                &[1, 1, -1, -2],
                &[
                    &[0, -1, 1, 2],
                    &[-1, 0, 1, 2],
                    &[1, 1, 0, -2],
                    &[2, 2, -2, 0],
                ],
            ),
            Terminals {
                inputs: vec![0, 1],
                outputs: vec![2, 3],
                aux: vec![],
            },
        ),
        // The published form of this matrix is asymmetric at (B, S); the -1
        // symmetrization is the variant whose ground states are exactly the
        // half-adder relation. Roles recovered by ground-state enumeration:
        // carry on node 2, sum on node 3, NOR(A, B) on the auxiliary node 4.
        GateKind::HaAlt => (
            ham(
                &["A", "B", "C", "S", "NOR"],
                &[0, 0, -2, -1, -2],
                &[
                    &[0, -2, 2, -1, -2],
                    &[-2, 0, 2, -1, -2],
                    &[2, 2, 0, 0, 0],
                    &[-1, -1, 0, 0, -2],
                    &[-2, -2, 0, -2, 0],
                ],
            ),
            Terminals {
                inputs: vec![0, 1],
                outputs: vec![2, 3],
                aux: vec![4],
            },
        ),
        GateKind::Fa => (
            ham(
                &["A", "B", "Cin", "S", "Cout"],
                &[0, 0, 0, 0, 0],
                &[
                    &[0, -1, -1, 1, 2],
                    &[-1, 0, -1, 1, 2],
                    &[-1, -1, 0, 1, 2],
                    &[1, 1, 1, 0, -2],
                    &[2, 2, 2, -2, 0],
                ],
            ),
            Terminals {
                inputs: vec![0, 1, 2],
                outputs: vec![3, 4],
                aux: vec![],
            },
        ),
    };
    GateSpec {
        kind,
        hamiltonian,
        terminals,
        valid_states: truth_table(kind),
    }
}

/// Spin-flip gauge on node i: negate h[i] and row/column i of J. Logically
/// inverts the node; the energy spectrum is preserved under the bijection
/// that flips coordinate i.
pub fn negate_node(spec: &GateSpec, i: usize) -> GateSpec {
    let mut out = spec.clone();
    out.hamiltonian.h[i] = -out.hamiltonian.h[i];
    let n = out.n();
    for k in 0..n {
        if k != i {
            out.hamiltonian.j[i][k] = -out.hamiltonian.j[i][k];
            out.hamiltonian.j[k][i] = -out.hamiltonian.j[k][i];
        }
    }
    out.hamiltonian.labels[i] = format!("!{}", spec.hamiltonian.labels[i]);
    out.valid_states = spec
        .valid_states
        .iter()
        .map(|st| {
            let mut st = st.clone();
            st[i] = -st[i];
            st
        })
        .collect();
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn and_matrices() {
        let g = gate(GateKind::And);
        assert_eq!(g.hamiltonian.h, vec![1, 1, -2]);
        assert_eq!(
            g.hamiltonian.j,
            vec![vec![0, -1, 2], vec![-1, 0, 2], vec![2, 2, 0]]
        );
    }

    #[test]
    fn fa_matrices() {
        let g = gate(GateKind::Fa);
        assert_eq!(g.hamiltonian.h, vec![0; 5]);
        assert_eq!(g.hamiltonian.j[0], vec![0, -1, -1, 1, 2]);
        assert_eq!(g.hamiltonian.j[4], vec![2, 2, 2, -2, 0]);
        assert_eq!(g.n(), 5);
    }

    #[test]
    fn all_gates_are_valid_hamiltonians() {
        for kind in GateKind::ALL {
            let g = gate(kind);
            assert_eq!(g.hamiltonian.validate(), Ok(()), "{}", kind.name());
            assert!(g.hamiltonian.min_weight_bits() <= 3);
        }
    }

    #[test]
    fn and_truth_table() {
        let tt = truth_table(GateKind::And);
        let want: BTreeSet<Vec<Spin>> = [
            vec![-1, -1, -1],
            vec![-1, 1, -1],
            vec![1, -1, -1],
            vec![1, 1, 1],
        ]
        .into_iter()
        .collect();
        assert_eq!(tt, want);
    }

    #[test]
    fn fa_truth_table_is_binary_addition() {
        for st in truth_table(GateKind::Fa) {
            let b = |i: usize| u32::from(st[i] > 0);
            assert_eq!(b(0) + b(1) + b(2), b(3) + 2 * b(4));
        }
        assert_eq!(truth_table(GateKind::Fa).len(), 8);
    }

    #[test]
    fn xor_or_aux_carries_or() {
        for st in truth_table(GateKind::XorOr) {
            let b = |i: usize| st[i] > 0;
            assert_eq!(b(2), b(0) ^ b(1));
            assert_eq!(b(3), b(0) | b(1));
        }
    }

    #[test]
    fn negate_is_involution() {
        let g = gate(GateKind::And);
        let back = negate_node(&negate_node(&g, 2), 2);
        assert_eq!(back.hamiltonian.h, g.hamiltonian.h);
        assert_eq!(back.hamiltonian.j, g.hamiltonian.j);
        assert_eq!(back.valid_states, g.valid_states);
    }

    #[test]
    fn scaled_recomputes_width() {
        let g = gate(GateKind::And).scaled(3);
        assert_eq!(g.hamiltonian.h, vec![3, 3, -6]);
        assert_eq!(g.hamiltonian.weight_bits, 4);
        assert_eq!(g.valid_states, gate(GateKind::And).valid_states);
    }
}
