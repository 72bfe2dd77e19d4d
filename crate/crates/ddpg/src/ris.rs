//! RIS/UAV downlink as a reinforcement-learning environment.
//!
//! The three agents differ only in how a raw action in `[-1, 1]^k` becomes a
//! phase configuration and a precoder:
//!
//! | variant | action layout                       | derived quantity            |
//! |---------|-------------------------------------|-----------------------------|
//! | IC      | `θ` (N·N_R)                          | precoder by pseudo-inverse  |
//! | ORESOU  | association scores (N·N_R·N_U), `F̂`  | phases by compensation      |
//! | Joint   | `θ` (N·N_R), `F̂` (2·N_B·N_U)         | nothing                     |
//!
//! Channels are redrawn at every episode start from a generator that only
//! depends on the seed, so every algorithm run with one seed sees the same
//! sequence of channel realizations.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use ris_core::channel::assemble_channels;
use ris_core::solvers::{
    decode_association, evaluate, ic_beamforming_scaled, normalize_beamformer, oresou_phases, quantize_one_bit,
    random_search_step,
};
use ris_core::{BeamformingMatrix, ChannelSet, GeometrySet, IcScaling, PhaseConfig, SinrReport, SolverError, SystemConfig};

use crate::agent::{DdpgAgent, Hyperparams};
use crate::train::{train, Environment, Schedule, Step};
use crate::DdpgError;

/// Reward assigned to actions without a feasible solution, in dB.
pub const INFEASIBLE_PENALTY_DB: f64 = -40.0;
/// Range the min-SINR reward is clipped to, in dB.
pub const REWARD_CLIP_DB: (f64, f64) = (-40.0, 60.0);
/// Divides clipped dB rewards before they are stored.
pub const REWARD_SCALE_DB: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Variant {
    Ic,
    Oresou,
    Joint,
}

impl Variant {
    pub fn action_dim(self, config: &SystemConfig) -> usize {
        let elements = config.total_elements();
        let precoder = 2 * config.n_bs_antennas * config.n_uav();
        match self {
            Variant::Ic => elements,
            Variant::Oresou => elements * config.n_uav() + precoder,
            Variant::Joint => elements + precoder,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Objective {
    #[default]
    MaxMinSinr,
    MaxSumRate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingConfig {
    pub system: SystemConfig,
    pub hyper: Hyperparams,
    pub schedule: Schedule,
    pub objective: Objective,
    pub one_bit: bool,
    pub ic_scaling: IcScaling,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        Self {
            system: SystemConfig::default(),
            hyper: Hyperparams::default(),
            schedule: Schedule {
                episodes: 50,
                steps_per_episode: 200,
            },
            objective: Objective::MaxMinSinr,
            one_bit: false,
            ic_scaling: IcScaling::SquareRoot,
        }
    }
}

/// Maps `[-1, 1]` onto `[0, 2π]`.
pub fn action_to_phases(raw: &[f64]) -> PhaseConfig {
    PhaseConfig::new(raw.iter().map(|&a| PI * (a + 1.0)).collect())
}

/// Turns a raw action into phases and a precoder that satisfy the power and
/// unit-modulus constraints.
pub fn decode_action(
    variant: Variant,
    channels: &ChannelSet,
    raw: &[f64],
    p_max: f64,
    one_bit: bool,
    ic_scaling: IcScaling,
) -> Result<(PhaseConfig, BeamformingMatrix), SolverError> {
    let elements = channels.total_elements();
    let (n_bs, n_uav) = (channels.n_bs_antennas(), channels.n_uav());
    let snap = |p: PhaseConfig| if one_bit { quantize_one_bit(&p) } else { p };
    match variant {
        Variant::Ic => {
            let phases = snap(action_to_phases(raw));
            let bf = ic_beamforming_scaled(channels, &phases, p_max, ic_scaling)?;
            Ok((phases, bf))
        }
        Variant::Oresou => {
            let split = elements * n_uav;
            let assoc = decode_association(&raw[..split], n_uav)?;
            let bf = normalize_beamformer(&raw[split..], n_bs, n_uav, p_max)?;
            let phases = snap(oresou_phases(&assoc, channels, &bf));
            Ok((phases, bf))
        }
        Variant::Joint => {
            let phases = snap(action_to_phases(&raw[..elements]));
            let bf = normalize_beamformer(&raw[elements..], n_bs, n_uav, p_max)?;
            Ok((phases, bf))
        }
    }
}

pub fn reward_for(objective: Objective, report: &SinrReport) -> f64 {
    match objective {
        Objective::MaxMinSinr => report.min_sinr_db.clamp(REWARD_CLIP_DB.0, REWARD_CLIP_DB.1) / REWARD_SCALE_DB,
        Objective::MaxSumRate => report.sum_rate,
    }
}

/// Outcome of one action.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub phases: PhaseConfig,
    pub beamformer: BeamformingMatrix,
    pub report: SinrReport,
}

pub struct RisEnv {
    config: TrainingConfig,
    variant: Variant,
    geometry: GeometrySet,
    channel_rng: ChaCha8Rng,
    channels: Option<ChannelSet>,
    features: Vec<f64>,
}

impl RisEnv {
    pub fn new(config: TrainingConfig, variant: Variant, seed: u64) -> Result<Self, DdpgError> {
        config.system.validate()?;
        let geometry = ris_core::build_geometry(&config.system)?;
        Ok(Self {
            config,
            variant,
            geometry,
            channel_rng: channel_rng(seed),
            channels: None,
            features: Vec::new(),
        })
    }

    pub fn channels(&self) -> Option<&ChannelSet> {
        self.channels.as_ref()
    }

    /// `2·N_U·N·N_R + 2·N·N_R·N_B + 1`.
    pub fn feature_len(config: &SystemConfig) -> usize {
        let elements = config.total_elements();
        2 * config.n_uav() * elements + 2 * elements * config.n_bs_antennas + 1
    }

    fn state_with(&self, last: f64) -> Vec<f64> {
        let mut s = self.features.clone();
        s.push(last);
        s
    }
}

/// Generator for channel realizations of a run.
pub fn channel_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Generator for agent initialization, exploration and replay sampling.
pub fn agent_rng(seed: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    rng
}

/// Generator for random-search draws.
pub fn search_rng(seed: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(2);
    rng
}

impl Environment for RisEnv {
    type Info = Option<Evaluation>;

    fn state_dim(&self) -> usize {
        Self::feature_len(&self.config.system)
    }

    fn action_dim(&self) -> usize {
        self.variant.action_dim(&self.config.system)
    }

    fn reset(&mut self) -> Vec<f64> {
        let channels = assemble_channels(&self.config.system, &self.geometry, &mut self.channel_rng);
        self.features = channels.normalized_features();
        self.channels = Some(channels);
        self.state_with(0.0)
    }

    fn step(&mut self, action: &[f64]) -> Step<Option<Evaluation>> {
        let channels = self.channels.as_ref().expect("reset before step");
        let sys = &self.config.system;
        let decoded = decode_action(
            self.variant,
            channels,
            action,
            sys.p_max,
            self.config.one_bit,
            self.config.ic_scaling,
        );
        match decoded {
            Ok((phases, beamformer)) => {
                let report = evaluate(channels, &phases, &beamformer, sys.noise_power);
                let reward = reward_for(self.config.objective, &report);
                let last = report.min_sinr_db.clamp(REWARD_CLIP_DB.0, REWARD_CLIP_DB.1) / REWARD_SCALE_DB;
                Step {
                    next_state: self.state_with(last),
                    reward,
                    info: Some(Evaluation {
                        phases,
                        beamformer,
                        report,
                    }),
                }
            }
            Err(_) => {
                let penalty = INFEASIBLE_PENALTY_DB / REWARD_SCALE_DB;
                Step {
                    next_state: self.state_with(penalty),
                    reward: penalty,
                    info: None,
                }
            }
        }
    }
}

/// One step of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub episode: usize,
    pub step: usize,
    /// dB; the penalty value when the step had no feasible solution.
    pub per_uav_sinr_db: Vec<f64>,
    pub min_sinr_db: f64,
    pub sum_rate: f64,
    pub reward: f64,
    pub feasible: bool,
    /// Running maximum of feasible min-SINR; `-inf` until the first one.
    pub best_min_sinr_db: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BestSolution {
    pub step: usize,
    pub min_sinr_db: f64,
    pub evaluation: Evaluation,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrainingTrace {
    pub records: Vec<StepRecord>,
    pub best: Option<BestSolution>,
}

impl TrainingTrace {
    pub fn best_min_sinr_db(&self) -> f64 {
        self.best.as_ref().map_or(f64::NEG_INFINITY, |b| b.min_sinr_db)
    }

    fn record(&mut self, episode: usize, step: usize, reward: f64, eval: Option<&Evaluation>, n_uav: usize) {
        let prev_best = self.best_min_sinr_db();
        let rec = match eval {
            Some(e) => {
                if e.report.min_sinr_db > prev_best {
                    self.best = Some(BestSolution {
                        step,
                        min_sinr_db: e.report.min_sinr_db,
                        evaluation: e.clone(),
                    });
                }
                StepRecord {
                    episode,
                    step,
                    per_uav_sinr_db: e.report.per_uav_sinr_db(),
                    min_sinr_db: e.report.min_sinr_db,
                    sum_rate: e.report.sum_rate,
                    reward,
                    feasible: true,
                    best_min_sinr_db: prev_best.max(e.report.min_sinr_db),
                }
            }
            None => StepRecord {
                episode,
                step,
                per_uav_sinr_db: vec![INFEASIBLE_PENALTY_DB; n_uav],
                min_sinr_db: INFEASIBLE_PENALTY_DB,
                sum_rate: 0.0,
                reward,
                feasible: false,
                best_min_sinr_db: prev_best,
            },
        };
        self.records.push(rec);
    }
}

/// Trains one agent of the given variant from scratch.
pub fn run_training(config: &TrainingConfig, variant: Variant, seed: u64) -> Result<TrainingTrace, DdpgError> {
    let mut env = RisEnv::new(config.clone(), variant, seed)?;
    let mut rng = agent_rng(seed);
    let mut agent = DdpgAgent::new(env.state_dim(), env.action_dim(), config.hyper.clone(), &mut rng)?;
    let n_uav = config.system.n_uav();
    let mut trace = TrainingTrace::default();
    train(&mut env, &mut agent, config.schedule, &mut rng, |p, _, step, _| {
        trace.record(p.episode, p.step, step.reward, step.info.as_ref(), n_uav);
        true
    })?;
    Ok(trace)
}

/// Random search over the same episode and channel schedule as
/// [`run_training`].
pub fn run_random_search(config: &TrainingConfig, seed: u64) -> Result<TrainingTrace, DdpgError> {
    config.system.validate()?;
    let sys = &config.system;
    let geometry = ris_core::build_geometry(sys)?;
    let mut ch_rng = channel_rng(seed);
    let mut rng = search_rng(seed);
    let mut trace = TrainingTrace::default();
    let mut global = 0;
    for episode in 0..config.schedule.episodes {
        let channels = assemble_channels(sys, &geometry, &mut ch_rng);
        for _ in 0..config.schedule.steps_per_episode {
            let (phases, beamformer, report) =
                random_search_step(&mut rng, &channels, sys.p_max, sys.noise_power, config.one_bit);
            let reward = reward_for(config.objective, &report);
            let eval = Evaluation {
                phases,
                beamformer,
                report,
            };
            trace.record(episode, global, reward, Some(&eval), sys.n_uav());
            global += 1;
        }
    }
    Ok(trace)
}
