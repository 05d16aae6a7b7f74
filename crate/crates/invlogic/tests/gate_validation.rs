//! Exhaustive oracle checks: gate and composed-circuit ground states against
//! their Boolean relations.

use std::collections::BTreeSet;

use invlogic::catalog::{gate, negate_node, truth_table, GateKind};
use invlogic::composer::{build_multiplier, build_rca, compile, fuse, multiplier_netlist};
use invlogic::engine::ClampSpec;
use invlogic::oracle::{energy, ground_states, validate_circuit, validate_gate};
use invlogic::Spin;

#[test]
fn every_catalog_gate_validates() {
    for kind in GateKind::ALL {
        let v = validate_gate(&gate(kind)).unwrap();
        assert!(
            v.ok,
            "{}: spurious {:?} missing {:?}",
            kind.name(),
            v.spurious,
            v.missing
        );
    }
}

#[test]
fn invalid_states_strictly_higher() {
    for kind in GateKind::ALL {
        let spec = gate(kind);
        let rep = ground_states(&spec.hamiltonian, &ClampSpec::new()).unwrap();
        let above = rep
            .spectrum
            .keys()
            .filter(|&&e| e > rep.ground_energy)
            .count();
        assert_eq!(
            rep.spectrum.len(),
            above + 1,
            "{}: degenerate non-ground level",
            kind.name()
        );
        assert_eq!(rep.ground_states.len(), spec.valid_states.len());
    }
}

#[test]
fn negate_preserves_spectrum() {
    for kind in GateKind::ALL {
        let spec = gate(kind);
        let before = ground_states(&spec.hamiltonian, &ClampSpec::new()).unwrap();
        for i in 0..spec.n() {
            let flipped = negate_node(&spec, i);
            let after = ground_states(&flipped.hamiltonian, &ClampSpec::new()).unwrap();
            assert_eq!(before.spectrum, after.spectrum, "{} node {i}", kind.name());
        }
    }
}

#[test]
fn nand_or_nor_by_gauge() {
    // negate AND's output -> NAND; negate both inputs of NAND, then the
    // output -> OR -> NOR. Each lands exactly on its truth table.
    let nand = negate_node(&gate(GateKind::And), 2);
    let rep = ground_states(&nand.hamiltonian, &ClampSpec::new()).unwrap();
    assert_eq!(rep.ground_states, truth_table(GateKind::Nand));
    let or = negate_node(&negate_node(&nand, 0), 1);
    let rep = ground_states(&or.hamiltonian, &ClampSpec::new()).unwrap();
    assert_eq!(rep.ground_states, truth_table(GateKind::Or));
}

#[test]
fn alternate_half_adder_roles() {
    // The 5-node half-adder variant: enumeration pins carry to node 2, sum to
    // node 3, and NOR(A, B) to the auxiliary node 4.
    let spec = gate(GateKind::HaAlt);
    let rep = ground_states(&spec.hamiltonian, &ClampSpec::new()).unwrap();
    assert_eq!(rep.ground_states.len(), 4);
    for st in &rep.ground_states {
        let b = |i: usize| st[i] > 0;
        assert_eq!(b(2), b(0) & b(1));
        assert_eq!(b(3), b(0) ^ b(1));
        assert_eq!(b(4), !(b(0) | b(1)));
    }
}

#[test]
fn clamp_consistency() {
    // Clamped ground set = unclamped ground set filtered by the clamp,
    // whenever the filtered set is non-empty.
    for kind in GateKind::ALL {
        let spec = gate(kind);
        let full = ground_states(&spec.hamiltonian, &ClampSpec::new()).unwrap();
        for node in 0..spec.n() {
            for s in [-1 as Spin, 1] {
                let filtered: BTreeSet<Vec<Spin>> = full
                    .ground_states
                    .iter()
                    .filter(|m| m[node] == s)
                    .cloned()
                    .collect();
                if filtered.is_empty() {
                    continue;
                }
                let mut clamps = ClampSpec::new();
                clamps.set(node, s);
                let rep = ground_states(&spec.hamiltonian, &clamps).unwrap();
                assert_eq!(rep.ground_states, filtered, "{} node {node}", kind.name());
            }
        }
    }
}

#[test]
fn and_ha_fusion_ground_states_add() {
    // 6-node (A and B) + D circuit: every ground state satisfies
    // S + 2C = (A and B) + D.
    let c = fuse(
        &[gate(GateKind::And), gate(GateKind::Ha)],
        &[
            vec!["A".into(), "B".into(), "Y".into()],
            vec!["Y".into(), "D".into(), "S".into(), "C".into()],
        ],
    );
    let v = validate_circuit(&c).unwrap();
    assert!(v.ok, "spurious {:?} missing {:?}", v.spurious, v.missing);
    let b = |st: &Vec<Spin>, net: &str| u32::from(st[c.net_map[net]] > 0);
    for st in &v.report.ground_states {
        assert_eq!(
            b(st, "S") + 2 * b(st, "C"),
            (b(st, "A") & b(st, "B")) + b(st, "D")
        );
    }
    assert_eq!(v.report.ground_states.len(), 8);
}

#[test]
fn fa_chain_is_two_bit_addition_with_carry() {
    // Two full-adders sharing a ripple carry: 9 nodes.
    let c = fuse(
        &[gate(GateKind::Fa), gate(GateKind::Fa)],
        &[
            vec![
                "a0".into(),
                "b0".into(),
                "cin".into(),
                "s0".into(),
                "c0".into(),
            ],
            vec![
                "a1".into(),
                "b1".into(),
                "c0".into(),
                "s1".into(),
                "c1".into(),
            ],
        ],
    );
    assert_eq!(c.n(), 9);
    let v = validate_circuit(&c).unwrap();
    assert!(v.ok);
    let b = |st: &Vec<Spin>, net: &str| u32::from(st[c.net_map[net]] > 0);
    for st in &v.report.ground_states {
        let a = b(st, "a0") + 2 * b(st, "a1");
        let bb = b(st, "b0") + 2 * b(st, "b1");
        let s = b(st, "s0") + 2 * b(st, "s1") + 4 * b(st, "c1");
        assert_eq!(a + bb + b(st, "cin"), s);
    }
}

#[test]
fn rca2_ground_states_are_addition() {
    let c = build_rca(2);
    assert_eq!(c.n(), 8);
    let v = validate_circuit(&c).unwrap();
    assert!(v.ok);
    for st in &v.report.ground_states {
        let dec = |name: &str| invlogic::engine::decode_terminals(st, c.group(name).unwrap());
        assert_eq!(dec("A") + dec("B"), dec("S") + 4 * dec("Cout"));
    }
    // 16 input combinations, one ground state each.
    assert_eq!(v.report.ground_states.len(), 16);
}

#[test]
fn multiplier2_ground_states_are_products() {
    let c = build_multiplier(2);
    assert_eq!(c.n(), 12);
    let v = validate_circuit(&c).unwrap();
    assert!(v.ok, "spurious {:?} missing {:?}", v.spurious, v.missing);
    for st in &v.report.ground_states {
        let dec = |name: &str| invlogic::engine::decode_terminals(st, c.group(name).unwrap());
        assert_eq!(dec("A") * dec("B"), dec("P"));
    }
    assert_eq!(v.report.ground_states.len(), 16);
}

#[test]
fn scaled_factorizer_small_still_validates() {
    // The annealed-reverse weight assignment (AND x3, adders x4) must not
    // change the ground-state set.
    let c = compile(&multiplier_netlist(2, 3, 4)).unwrap();
    let v = validate_circuit(&c).unwrap();
    assert!(v.ok);
}

#[test]
fn netlist_compile_matches_direct_fusion() {
    use invlogic::composer::{ExportGroup, Instance, Netlist, Role};
    use std::collections::BTreeMap;
    let netlist = Netlist {
        instances: vec![
            Instance {
                kind: "AND".into(),
                scale: 1,
                conns: [("A", "A"), ("B", "B"), ("Y", "Y")]
                    .into_iter()
                    .map(|(a, b)| (a.to_string(), b.to_string()))
                    .collect(),
            },
            Instance {
                kind: "HA".into(),
                scale: 1,
                conns: [("A", "Y"), ("B", "D"), ("S", "S"), ("C", "C")]
                    .into_iter()
                    .map(|(a, b)| (a.to_string(), b.to_string()))
                    .collect(),
            },
        ],
        exported: BTreeMap::from([(
            "S".to_string(),
            ExportGroup {
                role: Role::Output,
                bits: vec!["S".into(), "C".into()],
            },
        )]),
    };
    let compiled = compile(&netlist).unwrap();
    let fused = fuse(
        &[gate(GateKind::And), gate(GateKind::Ha)],
        &[
            vec!["A".into(), "B".into(), "Y".into()],
            vec!["Y".into(), "D".into(), "S".into(), "C".into()],
        ],
    );
    assert_eq!(compiled.hamiltonian.h, fused.hamiltonian.h);
    assert_eq!(compiled.hamiltonian.j, fused.hamiltonian.j);
}

#[test]
fn energy_gap_of_and_under_scaling() {
    // Scaling multiplies every level; the gap between ground and first
    // excited level of AND grows from 4 to 16 at drive 4.
    let ham = gate(GateKind::And).scaled(4).hamiltonian;
    let mut energies: Vec<i64> = (0..8u8)
        .map(|bits| {
            let m: Vec<Spin> = (0..3)
                .map(|k| if (bits >> k) & 1 == 1 { 1 } else { -1 })
                .collect();
            energy(&ham, &m)
        })
        .collect();
    energies.sort_unstable();
    energies.dedup();
    assert_eq!(energies[0], -12);
    assert_eq!(energies[1], 4);
}
