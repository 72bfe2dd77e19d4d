//! Matplotlib scripts for the emitted CSV files.

use std::path::{Path, PathBuf};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum PlotError {
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("{path} lacks required column `{column}`")]
    MissingColumn { path: PathBuf, column: String },
    #[error("{path} does not look like any known result file")]
    Unrecognized { path: PathBuf },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CsvKind {
    Fairness,
    PmaxSweep,
    OnebitTable,
}

impl CsvKind {
    fn required(self) -> &'static [&'static str] {
        match self {
            CsvKind::Fairness => &["objective", "seed", "step"],
            CsvKind::PmaxSweep => &["algorithm", "seed", "p_max_dbm", "best_min_sinr_db"],
            CsvKind::OnebitTable => &["algorithm", "seed", "row", "best_min_sinr_db"],
        }
    }

    fn detect(header: &[String]) -> Option<Self> {
        let has = |c: &str| header.iter().any(|h| h == c);
        if has("objective") {
            Some(CsvKind::Fairness)
        } else if has("row") {
            Some(CsvKind::OnebitTable)
        } else if has("algorithm") {
            Some(CsvKind::PmaxSweep)
        } else {
            None
        }
    }
}

fn read_header(path: &Path) -> Result<Vec<String>, PlotError> {
    let mut reader = csv::Reader::from_path(path).map_err(|source| PlotError::Csv {
        path: path.to_path_buf(),
        source,
    })?;
    let header = reader.headers().map_err(|source| PlotError::Csv {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(header.iter().map(String::from).collect())
}

fn py_list(items: &[String]) -> String {
    let quoted: Vec<String> = items.iter().map(|s| format!("{s:?}")).collect();
    format!("[{}]", quoted.join(", "))
}

/// Writes `<csv stem>_plot.py` next to the CSV and returns its path.
pub fn emit_plot_script(csv_path: &Path) -> Result<PathBuf, PlotError> {
    let header = read_header(csv_path)?;
    let kind = CsvKind::detect(&header).ok_or_else(|| PlotError::Unrecognized {
        path: csv_path.to_path_buf(),
    })?;
    let mut required: Vec<String> = kind.required().iter().map(|s| s.to_string()).collect();
    if kind == CsvKind::Fairness {
        let per_uav: Vec<String> = header
            .iter()
            .filter(|h| h.starts_with("sinr_uav") || h.starts_with("avg_sinr_uav"))
            .cloned()
            .collect();
        if per_uav.is_empty() {
            return Err(PlotError::MissingColumn {
                path: csv_path.to_path_buf(),
                column: "sinr_uav1_db".into(),
            });
        }
        required.extend(per_uav);
    }
    if let Some(missing) = required.iter().find(|c| !header.contains(c)) {
        return Err(PlotError::MissingColumn {
            path: csv_path.to_path_buf(),
            column: missing.clone(),
        });
    }

    let file_name = csv_path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let body = match kind {
        CsvKind::Fairness => fairness_body(&required[3..]),
        CsvKind::PmaxSweep => PMAX_BODY.to_string(),
        CsvKind::OnebitTable => ONEBIT_BODY.to_string(),
    };
    let script = format!(
        "{PRELUDE}\nCSV = HERE / {file_name:?}\nCOLUMNS = {}\n\nrows = load(CSV, COLUMNS)\n{body}",
        py_list(&required)
    );
    let stem = csv_path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let out = csv_path.with_file_name(format!("{stem}_plot.py"));
    std::fs::write(&out, script).map_err(|source| PlotError::Io {
        path: out.clone(),
        source,
    })?;
    Ok(out)
}

const PRELUDE: &str = r#"#!/usr/bin/env python3
import csv
import sys
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

HERE = Path(__file__).resolve().parent


def load(path, columns):
    with open(path, newline="") as f:
        reader = csv.DictReader(f)
        missing = [c for c in columns if c not in reader.fieldnames]
        if missing:
            sys.exit(f"{path}: missing columns {missing}")
        return list(reader)
"#;

fn fairness_body(series: &[String]) -> String {
    format!(
        r#"
SERIES = {}
objectives = sorted({{r["objective"] for r in rows}})
seed = min(r["seed"] for r in rows)
fig, axes = plt.subplots(1, len(objectives), figsize=(6 * len(objectives), 4), squeeze=False)
for ax, objective in zip(axes[0], objectives):
    run = [r for r in rows if r["objective"] == objective and r["seed"] == seed]
    steps = [int(r["step"]) for r in run]
    for column in SERIES:
        ax.plot(steps, [float(r[column]) for r in run], label=column, linewidth=0.8)
    ax.set_title(f"{{objective}} (seed {{seed}})")
    ax.set_xlabel("time step")
    ax.set_ylabel("SINR (dB)")
    ax.legend()
fig.tight_layout()
fig.savefig(CSV.with_suffix(".png"), dpi=150)
"#,
        py_list(series)
    )
}

const PMAX_BODY: &str = r#"
means = [r for r in rows if r["seed"] == "mean"]
fig, ax = plt.subplots(figsize=(6, 4))
for algorithm in dict.fromkeys(r["algorithm"] for r in means):
    points = sorted((float(r["p_max_dbm"]), float(r["best_min_sinr_db"])) for r in means if r["algorithm"] == algorithm)
    ax.plot([p for p, _ in points], [v for _, v in points], marker="o", label=algorithm)
ax.set_xlabel("P_max (dBm)")
ax.set_ylabel("best minimum SINR (dB)")
ax.grid(True, alpha=0.3)
ax.legend()
fig.tight_layout()
fig.savefig(CSV.with_suffix(".png"), dpi=150)
"#;

const ONEBIT_BODY: &str = r#"
means = [r for r in rows if r["seed"] == "mean" and r["row"] != "difference"]
algorithms = list(dict.fromkeys(r["algorithm"] for r in means))
fig, ax = plt.subplots(figsize=(6, 4))
width = 0.38
for i, label in enumerate(["continuous", "one_bit"]):
    values = [next(float(r["best_min_sinr_db"]) for r in means if r["algorithm"] == a and r["row"] == label) for a in algorithms]
    ax.bar([k + (i - 0.5) * width for k in range(len(algorithms))], values, width, label=label)
ax.set_xticks(range(len(algorithms)))
ax.set_xticklabels(algorithms)
ax.set_ylabel("best minimum SINR (dB)")
ax.legend()
fig.tight_layout()
fig.savefig(CSV.with_suffix(".png"), dpi=150)
"#;
