//! Runs the three studies and collects their results in memory.

use ris_ddpg::ris::TrainingTrace;
use ris_ddpg::{run_random_search, run_training, DdpgError, TrainingConfig, Variant};

use crate::config::{Algorithm, ExperimentSpec, ObjectiveKind};

/// Everything that identifies one training or search run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub algorithm: Algorithm,
    pub p_max_dbm: f64,
    pub seed: u64,
    pub one_bit: bool,
    pub objective: ObjectiveKind,
}

impl Cell {
    pub fn label(&self) -> String {
        format!(
            "{} p_max={} dBm seed={}{} objective={}",
            self.algorithm.name(),
            self.p_max_dbm,
            self.seed,
            if self.one_bit { " one-bit" } else { "" },
            self.objective.name()
        )
    }
}

pub fn training_config(spec: &ExperimentSpec, cell: &Cell) -> TrainingConfig {
    TrainingConfig {
        system: spec.scenario.system(cell.p_max_dbm),
        hyper: spec.agent.hyperparams(),
        schedule: spec.schedule(),
        objective: cell.objective.into(),
        one_bit: cell.one_bit,
        ic_scaling: spec.agent.ic_scaling.into(),
    }
}

pub fn run_cell(spec: &ExperimentSpec, cell: &Cell) -> Result<TrainingTrace, DdpgError> {
    let config = training_config(spec, cell);
    match cell.algorithm {
        Algorithm::Ic => run_training(&config, Variant::Ic, cell.seed),
        Algorithm::Oresou => run_training(&config, Variant::Oresou, cell.seed),
        Algorithm::JointDrl => run_training(&config, Variant::Joint, cell.seed),
        Algorithm::Random => run_random_search(&config, cell.seed),
    }
}

/// Mean of the last `min(t + 1, window)` values at every step `t`.
pub fn rolling_mean(values: &[f64], window: usize) -> Vec<f64> {
    assert!(window > 0, "window must be positive");
    (0..values.len())
        .map(|t| {
            let start = (t + 1).saturating_sub(window);
            let slice = &values[start..=t];
            slice.iter().sum::<f64>() / slice.len() as f64
        })
        .collect()
}

/// Per-step SINR history of one fairness run.
#[derive(Debug, Clone, PartialEq)]
pub struct FairnessRun {
    pub objective: ObjectiveKind,
    pub seed: u64,
    pub p_max_dbm: f64,
    pub trace: TrainingTrace,
    /// `[uav][step]`, dB.
    pub rolling_sinr_db: Vec<Vec<f64>>,
}

impl FairnessRun {
    fn new(objective: ObjectiveKind, seed: u64, p_max_dbm: f64, trace: TrainingTrace, window: usize) -> Self {
        let n_uav = trace.records.first().map_or(0, |r| r.per_uav_sinr_db.len());
        let rolling_sinr_db = (0..n_uav)
            .map(|u| {
                let series: Vec<f64> = trace.records.iter().map(|r| r.per_uav_sinr_db[u]).collect();
                rolling_mean(&series, window)
            })
            .collect();
        Self {
            objective,
            seed,
            p_max_dbm,
            trace,
            rolling_sinr_db,
        }
    }

    /// Spread between the best and worst UAV's rolling average at the final
    /// step, dB.
    pub fn final_rolling_gap_db(&self) -> f64 {
        let last: Vec<f64> = self.rolling_sinr_db.iter().filter_map(|s| s.last().copied()).collect();
        let hi = last.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lo = last.iter().copied().fold(f64::INFINITY, f64::min);
        hi - lo
    }
}

/// Joint DRL under the sum-rate and then the max-min objective, for every
/// seed and power level.
pub fn run_fairness(spec: &ExperimentSpec, log: &mut dyn FnMut(&str)) -> Result<Vec<FairnessRun>, DdpgError> {
    let mut runs = Vec::new();
    for &p in &spec.p_max_grid {
        for &seed in &spec.seeds {
            for objective in [ObjectiveKind::MaxSumRate, ObjectiveKind::MaxMinSinr] {
                let cell = Cell {
                    algorithm: Algorithm::JointDrl,
                    p_max_dbm: p,
                    seed,
                    one_bit: spec.one_bit,
                    objective,
                };
                log(&cell.label());
                let trace = run_cell(spec, &cell)?;
                runs.push(FairnessRun::new(objective, seed, p, trace, spec.rolling_window));
            }
        }
    }
    Ok(runs)
}

/// Best feasible min-SINR of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct BestCell {
    pub cell: Cell,
    pub best_min_sinr_db: f64,
    /// Phases of the best solution, radians; empty if nothing was feasible.
    pub best_phases: Vec<f64>,
}

fn best_of(cell: Cell, trace: &TrainingTrace) -> BestCell {
    BestCell {
        cell,
        best_min_sinr_db: trace.best_min_sinr_db(),
        best_phases: trace
            .best
            .as_ref()
            .map(|b| b.evaluation.phases.theta().to_vec())
            .unwrap_or_default(),
    }
}

pub fn mean_over_seeds<'a>(cells: impl IntoIterator<Item = &'a BestCell>, pred: impl Fn(&Cell) -> bool) -> Option<f64> {
    let values: Vec<f64> = cells
        .into_iter()
        .filter(|c| pred(&c.cell))
        .map(|c| c.best_min_sinr_db)
        .collect();
    (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64)
}

/// Every algorithm at every power level and seed.
pub fn run_pmax_sweep(spec: &ExperimentSpec, log: &mut dyn FnMut(&str)) -> Result<Vec<BestCell>, DdpgError> {
    let mut out = Vec::new();
    for &algorithm in &spec.algorithms {
        for &p in &spec.p_max_grid {
            for &seed in &spec.seeds {
                let cell = Cell {
                    algorithm,
                    p_max_dbm: p,
                    seed,
                    one_bit: spec.one_bit,
                    objective: spec.objective,
                };
                log(&cell.label());
                let trace = run_cell(spec, &cell)?;
                out.push(best_of(cell, &trace));
            }
        }
    }
    Ok(out)
}

/// Continuous and one-bit result for one algorithm, power level and seed.
#[derive(Debug, Clone, PartialEq)]
pub struct OnebitComparison {
    pub continuous: BestCell,
    pub one_bit: BestCell,
}

impl OnebitComparison {
    pub fn difference_db(&self) -> f64 {
        self.continuous.best_min_sinr_db - self.one_bit.best_min_sinr_db
    }
}

pub fn run_onebit_table(spec: &ExperimentSpec, log: &mut dyn FnMut(&str)) -> Result<Vec<OnebitComparison>, DdpgError> {
    let mut out = Vec::new();
    for &algorithm in &spec.algorithms {
        for &p in &spec.p_max_grid {
            for &seed in &spec.seeds {
                let mut pair = [false, true].into_iter().map(|one_bit| {
                    let cell = Cell {
                        algorithm,
                        p_max_dbm: p,
                        seed,
                        one_bit,
                        objective: spec.objective,
                    };
                    log(&cell.label());
                    run_cell(spec, &cell).map(|t| best_of(cell, &t))
                });
                let continuous = pair.next().expect("two settings")?;
                let one_bit = pair.next().expect("two settings")?;
                out.push(OnebitComparison { continuous, one_bit });
            }
        }
    }
    Ok(out)
}
