//! Builds large invertible circuits (multipliers, ripple-carry adders,
//! arbitrary netlists) by fusing gate Hamiltonians at shared nodes.

use std::collections::BTreeMap;
use std::collections::BTreeSet;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::catalog::{gate, GateKind, GateSpec};
use crate::engine::Hamiltonian;
use crate::Spin;

/// One gate instance: kind, optional integer drive scale, terminal -> net map.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct Instance {
    pub kind: String,
    #[serde(default = "default_scale", skip_serializing_if = "is_unit")]
    pub scale: i32,
    pub conns: BTreeMap<String, String>,
}

fn default_scale() -> i32 {
    1
}

fn is_unit(s: &i32) -> bool {
    *s == 1
}

/// An exported terminal group: role plus net names in LSB-first order.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct ExportGroup {
    pub role: Role,
    pub bits: Vec<String>,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Input,
    Output,
}

/// Structural circuit description feeding the fusion rule.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct Netlist {
    pub instances: Vec<Instance>,
    pub exported: BTreeMap<String, ExportGroup>,
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum ComposeError {
    #[error("netlist has no instances")]
    Empty,
    #[error("instance {0}: unknown gate kind {1:?}")]
    UnknownKind(usize, String),
    #[error("instance {0} ({1}): terminal {2:?} is not bound to a net")]
    UnboundTerminal(usize, &'static str, String),
    #[error("instance {0} ({1}): {2:?} is not a terminal of this gate")]
    UnknownTerminal(usize, &'static str, String),
    #[error("instance {0}: scale must be >= 1, got {1}")]
    BadScale(usize, i32),
    #[error("exported group {0:?} references unknown net {1:?}")]
    DanglingExport(String, String),
}

/// A fused circuit: one node per net, summed h/J, plus the exported groups and
/// the constituent instances (kept for gate-by-gate validity checks).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComposedCircuit {
    pub hamiltonian: Hamiltonian,
    pub net_map: BTreeMap<String, usize>,
    pub groups: Vec<(String, Vec<usize>)>,
    pub instances: Vec<(GateKind, Vec<usize>)>,
}

impl ComposedCircuit {
    pub fn n(&self) -> usize {
        self.hamiltonian.n()
    }

    pub fn group(&self, name: &str) -> Option<&[usize]> {
        self.groups
            .iter()
            .find(|(g, _)| g == name)
            .map(|(_, idx)| idx.as_slice())
    }

    /// True iff every constituent gate instance sits in one of its valid states.
    pub fn is_valid_state(&self, m: &[Spin]) -> bool {
        self.instances.iter().all(|(kind, nodes)| {
            let local: Vec<Spin> = nodes.iter().map(|&i| m[i]).collect();
            valid_set(*kind).contains(&local)
        })
    }
}

fn valid_set(kind: GateKind) -> &'static BTreeSet<Vec<Spin>> {
    static SETS: OnceLock<BTreeMap<GateKind, BTreeSet<Vec<Spin>>>> = OnceLock::new();
    &SETS.get_or_init(|| {
        GateKind::ALL
            .into_iter()
            .map(|k| (k, gate(k).valid_states))
            .collect()
    })[&kind]
}

/// Fuse gate parts at shared nets: one node per distinct net (indexed by first
/// appearance), h of a node = sum of constituent h entries, J between two nets
/// = sum of constituent couplings. `bindings[p]` names part p's nodes in order.
pub fn fuse(parts: &[GateSpec], bindings: &[Vec<String>]) -> ComposedCircuit {
    assert_eq!(parts.len(), bindings.len());
    let mut net_map: BTreeMap<String, usize> = BTreeMap::new();
    let mut order: Vec<String> = Vec::new();
    for (part, nets) in parts.iter().zip(bindings) {
        assert_eq!(part.n(), nets.len(), "binding arity mismatch");
        for net in nets {
            if !net_map.contains_key(net) {
                net_map.insert(net.clone(), order.len());
                order.push(net.clone());
            }
        }
    }
    let n = order.len();
    let mut h = vec![0i32; n];
    let mut j = vec![vec![0i32; n]; n];
    let mut instances = Vec::new();
    for (part, nets) in parts.iter().zip(bindings) {
        let idx: Vec<usize> = nets.iter().map(|net| net_map[net]).collect();
        for (a, &na) in idx.iter().enumerate() {
            h[na] += part.hamiltonian.h[a];
            for (b, &nb) in idx.iter().enumerate() {
                if na != nb {
                    j[na][nb] += part.hamiltonian.j[a][b];
                }
            }
        }
        instances.push((part.kind, idx));
    }
    let mut ham = Hamiltonian {
        labels: order,
        h,
        j,
        weight_bits: 1,
    };
    ham.weight_bits = ham.min_weight_bits();
    debug_assert_eq!(ham.validate(), Ok(()));
    ComposedCircuit {
        hamiltonian: ham,
        net_map,
        groups: Vec::new(),
        instances,
    }
}

/// Resolve gate kinds from the catalog and fuse the whole netlist.
pub fn compile(netlist: &Netlist) -> Result<ComposedCircuit, ComposeError> {
    if netlist.instances.is_empty() {
        return Err(ComposeError::Empty);
    }
    let mut parts = Vec::new();
    let mut bindings = Vec::new();
    for (pos, inst) in netlist.instances.iter().enumerate() {
        let kind = GateKind::parse(&inst.kind)
            .ok_or_else(|| ComposeError::UnknownKind(pos, inst.kind.clone()))?;
        if inst.scale < 1 {
            return Err(ComposeError::BadScale(pos, inst.scale));
        }
        let spec = gate(kind).scaled(inst.scale);
        for term in inst.conns.keys() {
            if !spec.hamiltonian.labels.contains(term) {
                return Err(ComposeError::UnknownTerminal(
                    pos,
                    kind.name(),
                    term.clone(),
                ));
            }
        }
        let nets: Vec<String> =
            spec.hamiltonian
                .labels
                .iter()
                .map(|term| {
                    inst.conns.get(term).cloned().ok_or_else(|| {
                        ComposeError::UnboundTerminal(pos, kind.name(), term.clone())
                    })
                })
                .collect::<Result<_, _>>()?;
        parts.push(spec);
        bindings.push(nets);
    }
    let mut circuit = fuse(&parts, &bindings);
    for (name, group) in &netlist.exported {
        let idx: Vec<usize> = group
            .bits
            .iter()
            .map(|net| {
                circuit
                    .net_map
                    .get(net)
                    .copied()
                    .ok_or_else(|| ComposeError::DanglingExport(name.clone(), net.clone()))
            })
            .collect::<Result<_, _>>()?;
        circuit.groups.push((name.clone(), idx));
    }
    Ok(circuit)
}

fn inst(kind: GateKind, scale: i32, conns: &[(&str, String)]) -> Instance {
    Instance {
        kind: kind.name().to_string(),
        scale,
        conns: conns
            .iter()
            .map(|(t, n)| (t.to_string(), n.clone()))
            .collect(),
    }
}

/// Row-ripple array multiplier netlist: n^2 AND partial products reduced by
/// n-1 rows of HA/FA chains; 3n^2 nets. AND instances get `and_scale`, adder
/// instances `adder_scale` (both 1 for the plain multiplier).
pub fn multiplier_netlist(n: usize, and_scale: i32, adder_scale: i32) -> Netlist {
    assert!(n >= 1);
    let mut instances = Vec::new();
    for i in 0..n {
        for jj in 0..n {
            instances.push(inst(
                GateKind::And,
                and_scale,
                &[
                    ("A", format!("a{i}")),
                    ("B", format!("b{jj}")),
                    ("Y", format!("p{i}_{jj}")),
                ],
            ));
        }
    }
    // Running partial sum: p_bits collects final product bits LSB-first,
    // carry_row the bits still to be reduced against the next row.
    let mut p_bits = vec!["p0_0".to_string()];
    let mut row: Vec<String> = (1..n).map(|jj| format!("p0_{jj}")).collect();
    for i in 1..n {
        let fresh: Vec<String> = (0..n).map(|jj| format!("p{i}_{jj}")).collect();
        instances.push(inst(
            GateKind::Ha,
            adder_scale,
            &[
                ("A", fresh[0].clone()),
                ("B", row[0].clone()),
                ("S", format!("s{i}_0")),
                ("C", format!("c{i}_0")),
            ],
        ));
        p_bits.push(format!("s{i}_0"));
        let mut carry = format!("c{i}_0");
        for jj in 1..n {
            if jj < row.len() {
                instances.push(inst(
                    GateKind::Fa,
                    adder_scale,
                    &[
                        ("A", fresh[jj].clone()),
                        ("B", row[jj].clone()),
                        ("Cin", carry.clone()),
                        ("S", format!("s{i}_{jj}")),
                        ("Cout", format!("c{i}_{jj}")),
                    ],
                ));
            } else {
                // First reduction row is one bit short of the fresh partial
                // products; its top bit only meets the ripple carry.
                instances.push(inst(
                    GateKind::Ha,
                    adder_scale,
                    &[
                        ("A", fresh[jj].clone()),
                        ("B", carry.clone()),
                        ("S", format!("s{i}_{jj}")),
                        ("C", format!("c{i}_{jj}")),
                    ],
                ));
            }
            carry = format!("c{i}_{jj}");
        }
        row = (1..n).map(|jj| format!("s{i}_{jj}")).collect();
        row.push(carry);
    }
    p_bits.extend(row);
    let mut exported = BTreeMap::new();
    exported.insert(
        "A".to_string(),
        ExportGroup {
            role: Role::Input,
            bits: (0..n).map(|i| format!("a{i}")).collect(),
        },
    );
    exported.insert(
        "B".to_string(),
        ExportGroup {
            role: Role::Input,
            bits: (0..n).map(|i| format!("b{i}")).collect(),
        },
    );
    exported.insert(
        "P".to_string(),
        ExportGroup {
            role: Role::Output,
            bits: p_bits,
        },
    );
    Netlist {
        instances,
        exported,
    }
}

/// Array multiplier with unit weights; groups A (n bits), B (n bits), P.
pub fn build_multiplier(n: usize) -> ComposedCircuit {
    compile(&multiplier_netlist(n, 1, 1)).expect("generated netlist is well-formed")
}

/// Ripple-carry adder: HA stage 0 plus FA stages with fused carries; 4n nets.
pub fn rca_netlist(n: usize) -> Netlist {
    assert!(n >= 1);
    let mut instances = vec![inst(
        GateKind::Ha,
        1,
        &[
            ("A", "a0".to_string()),
            ("B", "b0".to_string()),
            ("S", "s0".to_string()),
            ("C", "c0".to_string()),
        ],
    )];
    for i in 1..n {
        instances.push(inst(
            GateKind::Fa,
            1,
            &[
                ("A", format!("a{i}")),
                ("B", format!("b{i}")),
                ("Cin", format!("c{}", i - 1)),
                ("S", format!("s{i}")),
                ("Cout", format!("c{i}")),
            ],
        ));
    }
    let mut exported = BTreeMap::new();
    exported.insert(
        "A".to_string(),
        ExportGroup {
            role: Role::Input,
            bits: (0..n).map(|i| format!("a{i}")).collect(),
        },
    );
    exported.insert(
        "B".to_string(),
        ExportGroup {
            role: Role::Input,
            bits: (0..n).map(|i| format!("b{i}")).collect(),
        },
    );
    exported.insert(
        "S".to_string(),
        ExportGroup {
            role: Role::Output,
            bits: (0..n).map(|i| format!("s{i}")).collect(),
        },
    );
    exported.insert(
        "Cout".to_string(),
        ExportGroup {
            role: Role::Output,
            bits: vec![format!("c{}", n - 1)],
        },
    );
    Netlist {
        instances,
        exported,
    }
}

pub fn build_rca(n: usize) -> ComposedCircuit {
    compile(&rca_netlist(n)).expect("generated netlist is well-formed")
}
