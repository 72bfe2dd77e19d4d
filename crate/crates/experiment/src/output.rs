//! CSV emission.
//!
//! | file               | columns                                                                  |
//! |--------------------|--------------------------------------------------------------------------|
//! | `fairness.csv`     | objective, seed, p_max_dbm, step, sinr_uav{k}_db, avg_sinr_uav{k}_db, min_sinr_db, best_min_sinr_db, sum_rate |
//! | `pmax_sweep.csv`   | algorithm, seed, p_max_dbm, one_bit, best_min_sinr_db                     |
//! | `onebit_table.csv` | algorithm, seed, p_max_dbm, row, best_min_sinr_db                         |
//! | `onebit_phases.csv`| algorithm, seed, p_max_dbm, element, theta_rad                            |
//!
//! Seed-mean rows carry `mean` in the seed column. Numbers are written with
//! six significant digits.

use std::io::Write;
use std::path::Path;

use crate::config::Algorithm;
use crate::runner::{mean_over_seeds, BestCell, FairnessRun, OnebitComparison};

pub const PMAX_SWEEP_HEADER: [&str; 5] = ["algorithm", "seed", "p_max_dbm", "one_bit", "best_min_sinr_db"];
pub const ONEBIT_TABLE_HEADER: [&str; 5] = ["algorithm", "seed", "p_max_dbm", "row", "best_min_sinr_db"];
pub const ONEBIT_PHASES_HEADER: [&str; 5] = ["algorithm", "seed", "p_max_dbm", "element", "theta_rad"];

/// Six significant digits, shortest form.
pub fn sig6(x: f64) -> String {
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let rounded: f64 = format!("{x:.5e}").parse().expect("formatted float parses");
    if rounded == 0.0 {
        return "0".into();
    }
    format!("{rounded}")
}

pub fn fairness_header(n_uav: usize) -> Vec<String> {
    let mut h: Vec<String> = ["objective", "seed", "p_max_dbm", "step"].map(String::from).to_vec();
    h.extend((1..=n_uav).map(|k| format!("sinr_uav{k}_db")));
    h.extend((1..=n_uav).map(|k| format!("avg_sinr_uav{k}_db")));
    h.extend(["min_sinr_db", "best_min_sinr_db", "sum_rate"].map(String::from));
    h
}

pub fn write_fairness<W: Write>(out: W, runs: &[FairnessRun]) -> csv::Result<()> {
    let n_uav = runs.first().map_or(0, |r| r.rolling_sinr_db.len());
    let mut w = csv::Writer::from_writer(out);
    w.write_record(fairness_header(n_uav))?;
    for run in runs {
        for (t, rec) in run.trace.records.iter().enumerate() {
            let mut row = vec![
                run.objective.name().to_string(),
                run.seed.to_string(),
                sig6(run.p_max_dbm),
                rec.step.to_string(),
            ];
            row.extend(rec.per_uav_sinr_db.iter().map(|&v| sig6(v)));
            row.extend(run.rolling_sinr_db.iter().map(|s| sig6(s[t])));
            row.push(sig6(rec.min_sinr_db));
            row.push(sig6(rec.best_min_sinr_db));
            row.push(sig6(rec.sum_rate));
            w.write_record(&row)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// (algorithm, power) pairs in first-seen order.
fn groups(cells: &[&BestCell]) -> Vec<(Algorithm, f64)> {
    let mut seen: Vec<(Algorithm, f64)> = Vec::new();
    for c in cells {
        let key = (c.cell.algorithm, c.cell.p_max_dbm);
        if !seen.contains(&key) {
            seen.push(key);
        }
    }
    seen
}

pub fn write_pmax_sweep<W: Write>(out: W, cells: &[BestCell]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(PMAX_SWEEP_HEADER)?;
    for c in cells {
        w.write_record([
            c.cell.algorithm.name().to_string(),
            c.cell.seed.to_string(),
            sig6(c.cell.p_max_dbm),
            c.cell.one_bit.to_string(),
            sig6(c.best_min_sinr_db),
        ])?;
    }
    let refs: Vec<&BestCell> = cells.iter().collect();
    for (alg, p) in groups(&refs) {
        let mean = mean_over_seeds(cells, |c| c.algorithm == alg && c.p_max_dbm == p).expect("group is non-empty");
        let one_bit = cells.iter().any(|c| c.cell.algorithm == alg && c.cell.one_bit);
        w.write_record([
            alg.name().to_string(),
            "mean".to_string(),
            sig6(p),
            one_bit.to_string(),
            sig6(mean),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_onebit_table<W: Write>(out: W, rows: &[OnebitComparison]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(ONEBIT_TABLE_HEADER)?;
    let mut record = |alg: Algorithm, seed: String, p: f64, cont: f64, bit: f64| -> csv::Result<()> {
        for (label, v) in [("continuous", cont), ("one_bit", bit), ("difference", cont - bit)] {
            w.write_record([alg.name().to_string(), seed.clone(), sig6(p), label.to_string(), sig6(v)])?;
        }
        Ok(())
    };
    for r in rows {
        let c = &r.continuous.cell;
        record(
            c.algorithm,
            c.seed.to_string(),
            c.p_max_dbm,
            r.continuous.best_min_sinr_db,
            r.one_bit.best_min_sinr_db,
        )?;
    }
    let conts: Vec<&BestCell> = rows.iter().map(|r| &r.continuous).collect();
    for (alg, p) in groups(&conts) {
        let pick = |c: &crate::runner::Cell| c.algorithm == alg && c.p_max_dbm == p;
        let cont = mean_over_seeds(rows.iter().map(|r| &r.continuous), pick).expect("group is non-empty");
        let bit = mean_over_seeds(rows.iter().map(|r| &r.one_bit), pick).expect("group is non-empty");
        record(alg, "mean".to_string(), p, cont, bit)?;
    }
    w.flush()?;
    Ok(())
}

/// Phases of the best one-bit solution of every run.
pub fn write_onebit_phases<W: Write>(out: W, rows: &[OnebitComparison]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(ONEBIT_PHASES_HEADER)?;
    for r in rows {
        let c = &r.one_bit.cell;
        for (m, theta) in r.one_bit.best_phases.iter().enumerate() {
            w.write_record([
                c.algorithm.name().to_string(),
                c.seed.to_string(),
                sig6(c.p_max_dbm),
                m.to_string(),
                sig6(*theta),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn create(path: &Path) -> std::io::Result<std::io::BufWriter<std::fs::File>> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    Ok(std::io::BufWriter::new(std::fs::File::create(path)?))
}
