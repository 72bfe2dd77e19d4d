//! Experiment specification files.
//!
//! Specs are TOML. Scenario values are kept in the units people write them
//! in (dBm, dB, GHz) and only converted to SI when a run is set up, so a
//! spec survives a save/load cycle bit for bit.

use std::path::{Path, PathBuf};

use ris_core::metrics::{db_to_linear, dbm_to_watts};
use ris_core::scene::{Point3, SceneError, SPEED_OF_LIGHT};
use ris_core::{IcScaling, SystemConfig};
use ris_ddpg::{DdpgError, Hyperparams, Objective};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("invalid `{field}`: {reason}")]
    Invalid { field: String, reason: String },
}

fn invalid(field: impl Into<String>, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        field: field.into(),
        reason: reason.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Fairness,
    PmaxSweep,
    OnebitTable,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Fairness => "fairness",
            ExperimentKind::PmaxSweep => "pmax_sweep",
            ExperimentKind::OnebitTable => "onebit_table",
        }
    }

    /// Transmit powers studied when the spec gives none.
    pub fn default_grid(self) -> Vec<f64> {
        match self {
            ExperimentKind::Fairness => vec![35.0],
            ExperimentKind::PmaxSweep => vec![20.0, 25.0, 30.0, 35.0, 40.0, 45.0],
            ExperimentKind::OnebitTable => vec![45.0],
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObjectiveKind {
    #[default]
    MaxMinSinr,
    MaxSumRate,
}

impl ObjectiveKind {
    pub fn name(self) -> &'static str {
        match self {
            ObjectiveKind::MaxMinSinr => "max_min_sinr",
            ObjectiveKind::MaxSumRate => "max_sum_rate",
        }
    }
}

impl From<ObjectiveKind> for Objective {
    fn from(o: ObjectiveKind) -> Self {
        match o {
            ObjectiveKind::MaxMinSinr => Objective::MaxMinSinr,
            ObjectiveKind::MaxSumRate => Objective::MaxSumRate,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Algorithm {
    #[serde(rename = "IC")]
    Ic,
    #[serde(rename = "ORESOU")]
    Oresou,
    #[serde(rename = "JOINT_DRL")]
    JointDrl,
    #[serde(rename = "RANDOM")]
    Random,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [Algorithm::Ic, Algorithm::Oresou, Algorithm::JointDrl, Algorithm::Random];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Ic => "IC",
            Algorithm::Oresou => "ORESOU",
            Algorithm::JointDrl => "JOINT_DRL",
            Algorithm::Random => "RANDOM",
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IcScalingKind {
    #[default]
    SquareRoot,
    Literal,
}

impl From<IcScalingKind> for IcScaling {
    fn from(k: IcScalingKind) -> Self {
        match k {
            IcScalingKind::SquareRoot => IcScaling::SquareRoot,
            IcScalingKind::Literal => IcScaling::Literal,
        }
    }
}

/// Deployment parameters; every field defaults to the reference scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Scenario {
    pub bs_position: Point3,
    pub ris_positions: Vec<Point3>,
    pub uav_positions: Vec<Point3>,
    pub n_bs_antennas: usize,
    pub ris_elements_x: usize,
    pub ris_elements_y: usize,
    pub carrier_freq_ghz: f64,
    pub rician_bs_ris_db: f64,
    pub rician_ris_uav_db: f64,
    pub downtilt_rad: f64,
    pub noise_dbm: f64,
    /// Half a wavelength on every axis when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub element_spacing_m: Option<[f64; 3]>,
    pub pathloss: bool,
    pub allow_non_square: bool,
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            bs_position: [0.0, 0.0, 2.0],
            ris_positions: vec![[-2.5, 8.0, 0.0], [2.5, 0.0, 0.0]],
            uav_positions: vec![[-3.0, 10.0, 6.0], [2.0, 6.0, 10.0]],
            n_bs_antennas: 4,
            ris_elements_x: 4,
            ris_elements_y: 4,
            carrier_freq_ghz: 28.0,
            rician_bs_ris_db: 30.0,
            rician_ris_uav_db: 30.0,
            downtilt_rad: 0.0,
            noise_dbm: -100.0,
            element_spacing_m: None,
            pathloss: true,
            allow_non_square: false,
        }
    }
}

impl Scenario {
    /// SI-unit system description at the given transmit power.
    pub fn system(&self, p_max_dbm: f64) -> SystemConfig {
        let carrier_freq = self.carrier_freq_ghz * 1e9;
        let half_wave = SPEED_OF_LIGHT / carrier_freq / 2.0;
        let db_or_inf = |db: f64| if db == f64::INFINITY { f64::INFINITY } else { db_to_linear(db) };
        SystemConfig {
            bs_position: self.bs_position,
            ris_positions: self.ris_positions.clone(),
            uav_positions: self.uav_positions.clone(),
            n_bs_antennas: self.n_bs_antennas,
            ris_elements_x: self.ris_elements_x,
            ris_elements_y: self.ris_elements_y,
            carrier_freq,
            rician_bs_ris: db_or_inf(self.rician_bs_ris_db),
            rician_ris_uav: db_or_inf(self.rician_ris_uav_db),
            downtilt: self.downtilt_rad,
            noise_power: dbm_to_watts(self.noise_dbm),
            p_max: dbm_to_watts(p_max_dbm),
            element_spacing: self.element_spacing_m.unwrap_or([half_wave; 3]),
            pathloss_enabled: self.pathloss,
            allow_non_square: self.allow_non_square,
        }
    }
}

/// Learning settings; defaults follow [`Hyperparams::default`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AgentSettings {
    pub actor_hidden: Vec<usize>,
    pub critic_hidden: Vec<usize>,
    pub actor_lr: f64,
    pub critic_lr: f64,
    pub discount: f64,
    pub tau: f64,
    pub batch_size: usize,
    pub buffer_capacity: usize,
    pub noise_std: f64,
    pub noise_decay: f64,
    pub warmup_steps: usize,
    pub steps_per_episode: usize,
    pub ic_scaling: IcScalingKind,
}

impl Default for AgentSettings {
    fn default() -> Self {
        let h = Hyperparams::default();
        Self {
            actor_hidden: h.actor_hidden,
            critic_hidden: h.critic_hidden,
            actor_lr: h.actor_lr,
            critic_lr: h.critic_lr,
            discount: h.discount,
            tau: h.tau,
            batch_size: h.batch_size,
            buffer_capacity: h.buffer_capacity,
            noise_std: h.noise_std,
            noise_decay: h.noise_decay,
            warmup_steps: h.warmup_steps,
            steps_per_episode: 200,
            ic_scaling: IcScalingKind::SquareRoot,
        }
    }
}

impl AgentSettings {
    pub fn hyperparams(&self) -> Hyperparams {
        Hyperparams {
            actor_hidden: self.actor_hidden.clone(),
            critic_hidden: self.critic_hidden.clone(),
            actor_lr: self.actor_lr,
            critic_lr: self.critic_lr,
            discount: self.discount,
            tau: self.tau,
            batch_size: self.batch_size,
            buffer_capacity: self.buffer_capacity,
            noise_std: self.noise_std,
            noise_decay: self.noise_decay,
            warmup_steps: self.warmup_steps,
        }
    }
}

/// A fully resolved and validated experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub experiment: ExperimentKind,
    pub objective: ObjectiveKind,
    pub algorithms: Vec<Algorithm>,
    pub p_max_grid: Vec<f64>,
    pub iterations: usize,
    pub seeds: Vec<u64>,
    pub rolling_window: usize,
    pub one_bit: bool,
    pub output_dir: PathBuf,
    pub scenario: Scenario,
    pub agent: AgentSettings,
}

/// On-disk form; absent keys take defaults.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpecFile {
    experiment: Option<ExperimentKind>,
    #[serde(default)]
    objective: ObjectiveKind,
    algorithms: Option<Vec<Algorithm>>,
    p_max_grid: Option<Vec<f64>>,
    iterations: Option<usize>,
    seeds: Option<Vec<u64>>,
    rolling_window: Option<usize>,
    #[serde(default)]
    one_bit: bool,
    output_dir: Option<PathBuf>,
    #[serde(default)]
    scenario: Scenario,
    #[serde(default)]
    agent: AgentSettings,
}

impl ExperimentSpec {
    /// The spec an empty file resolves to.
    pub fn defaults(experiment: ExperimentKind) -> Self {
        Self::resolve(
            SpecFile {
                experiment: Some(experiment),
                objective: ObjectiveKind::default(),
                algorithms: None,
                p_max_grid: None,
                iterations: None,
                seeds: None,
                rolling_window: None,
                one_bit: false,
                output_dir: None,
                scenario: Scenario::default(),
                agent: AgentSettings::default(),
            },
            None,
        )
    }

    fn resolve(file: SpecFile, force: Option<ExperimentKind>) -> Self {
        let experiment = force.or(file.experiment).unwrap_or(ExperimentKind::PmaxSweep);
        Self {
            experiment,
            objective: file.objective,
            algorithms: file.algorithms.unwrap_or_else(|| Algorithm::ALL.to_vec()),
            p_max_grid: file.p_max_grid.unwrap_or_else(|| experiment.default_grid()),
            iterations: file.iterations.unwrap_or(10_000),
            seeds: file.seeds.unwrap_or_else(|| vec![0, 1, 2]),
            rolling_window: file.rolling_window.unwrap_or(300),
            one_bit: file.one_bit,
            output_dir: file.output_dir.unwrap_or_else(|| PathBuf::from("results")),
            scenario: file.scenario,
            agent: file.agent,
        }
    }

    /// Parses spec text. `force` overrides the file's `experiment` key before
    /// experiment-dependent defaults are filled in.
    pub fn parse(text: &str, force: Option<ExperimentKind>) -> Result<Self, ConfigError> {
        let file: SpecFile = toml::from_str(text).map_err(|e| {
            let offset = e.span().map_or(0, |s| s.start);
            let (line, column) = line_column(text, offset);
            ConfigError::Parse {
                line,
                column,
                message: e.message().to_string(),
            }
        })?;
        let spec = Self::resolve(file, force);
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("spec fields are all representable in TOML")
    }

    /// Steps per episode and episode count for the configured iterations.
    pub fn schedule(&self) -> ris_ddpg::Schedule {
        ris_ddpg::Schedule {
            episodes: self.iterations / self.agent.steps_per_episode,
            steps_per_episode: self.agent.steps_per_episode,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.algorithms.is_empty() {
            return Err(invalid("algorithms", "at least one algorithm is required"));
        }
        if self.seeds.is_empty() {
            return Err(invalid("seeds", "at least one seed is required"));
        }
        if self.p_max_grid.is_empty() {
            return Err(invalid("p_max_grid", "at least one power level is required"));
        }
        if let Some(p) = self.p_max_grid.iter().find(|p| !(0.0..=60.0).contains(*p)) {
            return Err(invalid("p_max_grid", format!("{p} dBm is outside [0, 60]")));
        }
        if self.rolling_window == 0 {
            return Err(invalid("rolling_window", "must be positive"));
        }
        if self.agent.steps_per_episode == 0 {
            return Err(invalid("agent.steps_per_episode", "must be positive"));
        }
        if self.iterations == 0 || self.iterations % self.agent.steps_per_episode != 0 {
            return Err(invalid(
                "iterations",
                format!(
                    "must be a positive multiple of agent.steps_per_episode ({})",
                    self.agent.steps_per_episode
                ),
            ));
        }
        if !self.scenario.carrier_freq_ghz.is_finite() || self.scenario.carrier_freq_ghz <= 0.0 {
            return Err(invalid("scenario.carrier_freq_ghz", "must be positive"));
        }
        self.scenario
            .system(self.p_max_grid[0])
            .validate()
            .map_err(|e| match e {
                SceneError::Invalid { field, reason } => invalid(format!("scenario.{field}"), reason),
                other => invalid("scenario", other.to_string()),
            })?;
        ris_core::build_geometry(&self.scenario.system(self.p_max_grid[0]))
            .map_err(|e| invalid("scenario", e.to_string()))?;
        self.agent.hyperparams().validate().map_err(|e| match e {
            DdpgError::Hyperparam { field, reason } => invalid(format!("agent.{field}"), reason),
            other => invalid("agent", other.to_string()),
        })?;
        Ok(())
    }
}

fn line_column(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

pub fn load_spec(path: &Path) -> Result<ExperimentSpec, ConfigError> {
    load_spec_as(path, None)
}

/// Loads a spec, overriding its experiment kind when `force` is given.
pub fn load_spec_as(path: &Path, force: Option<ExperimentKind>) -> Result<ExperimentSpec, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    ExperimentSpec::parse(&text, force)
}
