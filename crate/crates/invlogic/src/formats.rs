//! On-disk formats: Hamiltonian and netlist JSON, CSV emission for traces,
//! histograms, sweeps, and convergence summaries.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::composer::Netlist;
use crate::engine::{Hamiltonian, HamiltonianError};
use crate::experiments::{ConvergenceSummary, RunStats, SweepRow};

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Parse {
        path: String,
        source: serde_json::Error,
    },
    #[error("{path}: invalid Hamiltonian: {source}")]
    Invalid {
        path: String,
        source: HamiltonianError,
    },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> FormatError + '_ {
    move |source| FormatError::Io {
        path: path.display().to_string(),
        source,
    }
}

#[derive(Serialize, Deserialize)]
struct HamiltonianFile {
    n: usize,
    labels: Vec<String>,
    weight_bits: u32,
    h: Vec<i32>,
    #[serde(rename = "J")]
    j: Vec<Vec<i32>>,
}

pub fn save_hamiltonian(ham: &Hamiltonian, path: &Path) -> Result<(), FormatError> {
    let file = HamiltonianFile {
        n: ham.n(),
        labels: ham.labels.clone(),
        weight_bits: ham.weight_bits,
        h: ham.h.clone(),
        j: ham.j.clone(),
    };
    let text = serde_json::to_string_pretty(&file).expect("serializable");
    fs::write(path, text + "\n").map_err(io_err(path))
}

pub fn load_hamiltonian(path: &Path) -> Result<Hamiltonian, FormatError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let file: HamiltonianFile =
        serde_json::from_str(&text).map_err(|source| FormatError::Parse {
            path: path.display().to_string(),
            source,
        })?;
    let ham = Hamiltonian {
        labels: file.labels,
        h: file.h,
        j: file.j,
        weight_bits: file.weight_bits,
    };
    if ham.n() != file.n {
        return Err(FormatError::Invalid {
            path: path.display().to_string(),
            source: HamiltonianError::Dimensions(ham.labels.len(), file.n, ham.j.len()),
        });
    }
    ham.validate().map_err(|source| FormatError::Invalid {
        path: path.display().to_string(),
        source,
    })?;
    Ok(ham)
}

pub fn save_netlist(netlist: &Netlist, path: &Path) -> Result<(), FormatError> {
    let text = serde_json::to_string_pretty(netlist).expect("serializable");
    fs::write(path, text + "\n").map_err(io_err(path))
}

pub fn load_netlist(path: &Path) -> Result<Netlist, FormatError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    serde_json::from_str(&text).map_err(|source| FormatError::Parse {
        path: path.display().to_string(),
        source,
    })
}

fn open_csv(path: &Path, config: &[(String, String)]) -> Result<fs::File, FormatError> {
    let mut f = fs::File::create(path).map_err(io_err(path))?;
    // Resolved run configuration rides along as comment lines so every
    // artifact is reproducible from its own header.
    for (k, v) in config {
        writeln!(f, "# {k}={v}").map_err(io_err(path))?;
    }
    Ok(f)
}

/// `cycle,<group columns>` — one row per recorded cycle.
pub fn write_trace_csv(
    path: &Path,
    config: &[(String, String)],
    groups: &[String],
    series: &[Vec<u64>],
) -> Result<(), FormatError> {
    let mut f = open_csv(path, config)?;
    writeln!(f, "cycle,{}", groups.join(",")).map_err(io_err(path))?;
    let cycles = series.first().map_or(0, Vec::len);
    let mut buf = String::new();
    for t in 0..cycles {
        buf.clear();
        buf.push_str(&t.to_string());
        for s in series {
            buf.push(',');
            buf.push_str(&s[t].to_string());
        }
        writeln!(f, "{buf}").map_err(io_err(path))?;
    }
    Ok(())
}

/// `value,count` — decoded-value histogram of one run.
pub fn write_histogram_csv(
    path: &Path,
    config: &[(String, String)],
    stats: &RunStats,
) -> Result<(), FormatError> {
    let mut f = open_csv(path, config)?;
    writeln!(f, "value,count").map_err(io_err(path))?;
    for (v, c) in &stats.histogram {
        writeln!(f, "{v},{c}").map_err(io_err(path))?;
    }
    Ok(())
}

/// `w_rnd,seed,valid_fraction,toggles,converged`.
pub fn write_sweep_csv(
    path: &Path,
    config: &[(String, String)],
    rows: &[SweepRow],
) -> Result<(), FormatError> {
    let mut f = open_csv(path, config)?;
    writeln!(f, "w_rnd,seed,valid_fraction,toggles,converged").map_err(io_err(path))?;
    for r in rows {
        writeln!(
            f,
            "{},{},{:.6},{:.6},{}",
            r.w_rnd, r.seed, r.valid_fraction, r.toggles, r.converged
        )
        .map_err(io_err(path))?;
    }
    Ok(())
}

/// `output,mean_cycles,worst_cycles,success_rate` per output, then a TOTAL row.
pub fn write_convergence_csv(
    path: &Path,
    config: &[(String, String)],
    summary: &ConvergenceSummary,
) -> Result<(), FormatError> {
    let mut f = open_csv(path, config)?;
    writeln!(f, "output,mean_cycles,worst_cycles,success_rate").map_err(io_err(path))?;
    for o in &summary.per_output {
        let mean = if o.cycles.is_empty() {
            f64::NAN
        } else {
            o.cycles.iter().sum::<u64>() as f64 / o.cycles.len() as f64
        };
        writeln!(
            f,
            "{},{:.1},{},{:.4}",
            o.output,
            mean,
            o.cycles.iter().max().copied().unwrap_or(0),
            f64::from(o.successes) / f64::from(o.seeds)
        )
        .map_err(io_err(path))?;
    }
    writeln!(
        f,
        "TOTAL,{:.1},{},{:.4}",
        summary.mean_cycles, summary.worst_cycles, summary.success_rate
    )
    .map_err(io_err(path))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{gate, GateKind};
    use crate::composer::multiplier_netlist;

    #[test]
    fn hamiltonian_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("and.json");
        let ham = gate(GateKind::And).hamiltonian;
        save_hamiltonian(&ham, &path).unwrap();
        assert_eq!(load_hamiltonian(&path).unwrap(), ham);
    }

    #[test]
    fn loader_rejects_asymmetric() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.json");
        let mut ham = gate(GateKind::And).hamiltonian;
        ham.j[0][1] = 2;
        save_hamiltonian(&ham, &path).unwrap();
        assert!(matches!(
            load_hamiltonian(&path),
            Err(FormatError::Invalid { .. })
        ));
    }

    #[test]
    fn netlist_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("mult.json");
        let netlist = multiplier_netlist(2, 1, 1);
        save_netlist(&netlist, &path).unwrap();
        assert_eq!(load_netlist(&path).unwrap(), netlist);
    }
}
