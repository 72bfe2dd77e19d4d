//! Episode loop shared by every environment.

use rand::Rng;

use crate::agent::DdpgAgent;
use crate::replay::Transition;
use crate::DdpgError;

/// Result of applying one action.
#[derive(Debug, Clone, PartialEq)]
pub struct Step<I> {
    pub next_state: Vec<f64>,
    pub reward: f64,
    pub info: I,
}

pub trait Environment {
    type Info;

    fn state_dim(&self) -> usize;
    fn action_dim(&self) -> usize;
    /// Starts a new episode and returns its first state.
    fn reset(&mut self) -> Vec<f64>;
    fn step(&mut self, action: &[f64]) -> Step<Self::Info>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Schedule {
    pub episodes: usize,
    pub steps_per_episode: usize,
}

impl Schedule {
    pub fn total_steps(&self) -> usize {
        self.episodes * self.steps_per_episode
    }
}

/// Where the loop is when an observer is called.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Progress {
    pub episode: usize,
    /// Global step index across episodes.
    pub step: usize,
    pub noise_std: f64,
    pub learning: bool,
}

/// Runs the DDPG loop: act (uniformly at random during warmup, then the
/// noisy policy), store the transition, learn once per step after warmup and
/// soft-update the targets. `observe` sees every step; returning `false`
/// stops training early.
pub fn train<E, R, F>(
    env: &mut E,
    agent: &mut DdpgAgent,
    schedule: Schedule,
    rng: &mut R,
    mut observe: F,
) -> Result<(), DdpgError>
where
    E: Environment,
    R: Rng + ?Sized,
    F: FnMut(Progress, &[f64], &Step<E::Info>, &DdpgAgent) -> bool,
{
    if env.state_dim() != agent.state_dim() || env.action_dim() != agent.action_dim() {
        return Err(DdpgError::StructureMismatch);
    }
    let warmup = agent.hyper.warmup_steps;
    let mut noise = agent.hyper.noise_std;
    let mut global = 0;
    for episode in 0..schedule.episodes {
        let mut state = env.reset();
        for _ in 0..schedule.steps_per_episode {
            let learning = global >= warmup;
            let action = if learning {
                agent.select_action(&state, noise, rng)?
            } else {
                (0..env.action_dim()).map(|_| rng.gen_range(-1.0..=1.0)).collect()
            };
            let step = env.step(&action);
            agent.buffer.push(&Transition {
                state: std::mem::take(&mut state),
                action: action.clone(),
                reward: step.reward,
                next_state: step.next_state.clone(),
            })?;
            if learning && agent.buffer.len() >= agent.hyper.batch_size {
                agent.learn(rng)?;
                noise *= agent.hyper.noise_decay;
            }
            let progress = Progress {
                episode,
                step: global,
                noise_std: noise,
                learning,
            };
            if !observe(progress, &action, &step, agent) {
                return Ok(());
            }
            state = step.next_state;
            global += 1;
        }
    }
    Ok(())
}

/// Constant-state environment with reward `−‖a − a*‖²`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticBandit {
    pub target: Vec<f64>,
}

impl QuadraticBandit {
    pub fn reward(&self, action: &[f64]) -> f64 {
        -action
            .iter()
            .zip(&self.target)
            .map(|(a, t)| (a - t) * (a - t))
            .sum::<f64>()
    }
}

impl Environment for QuadraticBandit {
    type Info = ();

    fn state_dim(&self) -> usize {
        1
    }

    fn action_dim(&self) -> usize {
        self.target.len()
    }

    fn reset(&mut self) -> Vec<f64> {
        vec![1.0]
    }

    fn step(&mut self, action: &[f64]) -> Step<()> {
        Step {
            next_state: vec![1.0],
            reward: self.reward(action),
            info: (),
        }
    }
}
