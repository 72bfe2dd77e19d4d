//! The actor-critic agent: networks, target copies, optimizers and replay.

use ndarray::{concatenate, s, Array1, Array2, ArrayView2, Axis};
use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::adam::Adam;
use crate::mlp::{Mlp, OutputActivation};
use crate::replay::{Batch, ReplayBuffer};
use crate::DdpgError;

#[derive(Debug, Clone, PartialEq)]
pub struct Hyperparams {
    pub actor_hidden: Vec<usize>,
    pub critic_hidden: Vec<usize>,
    pub actor_lr: f64,
    pub critic_lr: f64,
    /// Discount factor, `[0, 1)`.
    pub discount: f64,
    /// Soft target update rate, `(0, 1]`.
    pub tau: f64,
    pub batch_size: usize,
    pub buffer_capacity: usize,
    pub noise_std: f64,
    /// Multiplies the exploration noise after every learning step.
    pub noise_decay: f64,
    /// Random-action steps before learning starts.
    pub warmup_steps: usize,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Self {
            actor_hidden: vec![256, 256],
            critic_hidden: vec![256, 256],
            actor_lr: 1e-4,
            critic_lr: 1e-3,
            discount: 0.99,
            tau: 0.005,
            batch_size: 64,
            buffer_capacity: 100_000,
            noise_std: 0.2,
            noise_decay: 0.9995,
            warmup_steps: 1_000,
        }
    }
}

impl Hyperparams {
    pub fn validate(&self) -> Result<(), DdpgError> {
        let bad = |field: &'static str, reason: &str| DdpgError::Hyperparam {
            field,
            reason: reason.to_string(),
        };
        if !(self.tau > 0.0 && self.tau <= 1.0) {
            return Err(bad("tau", "must lie in (0, 1]"));
        }
        if !(self.discount >= 0.0 && self.discount < 1.0) {
            return Err(bad("discount", "must lie in [0, 1)"));
        }
        if !(self.actor_lr > 0.0) || !(self.critic_lr > 0.0) {
            return Err(bad("learning_rate", "must be positive"));
        }
        if self.batch_size == 0 || self.buffer_capacity < self.batch_size {
            return Err(bad("batch_size", "must be positive and fit in the replay buffer"));
        }
        if !(self.noise_std >= 0.0) || !(self.noise_decay > 0.0 && self.noise_decay <= 1.0) {
            return Err(bad("noise", "std must be non-negative and decay in (0, 1]"));
        }
        if self.actor_hidden.contains(&0) || self.critic_hidden.contains(&0) {
            return Err(bad("hidden", "layer sizes must be positive"));
        }
        Ok(())
    }
}

/// A state-action value function that can report `∂Q/∂a`.
pub trait ActionValue {
    /// `Q(s, a)` per row and its gradient with respect to the action.
    fn value_and_action_grad(&self, states: ArrayView2<f64>, actions: ArrayView2<f64>) -> (Array1<f64>, Array2<f64>);
}

/// Critic network over the concatenated `[state, action]` input.
#[derive(Debug, Clone, PartialEq)]
pub struct Critic {
    pub net: Mlp,
    pub state_dim: usize,
}

impl Critic {
    fn input(states: ArrayView2<f64>, actions: ArrayView2<f64>) -> Array2<f64> {
        concatenate![Axis(1), states, actions]
    }

    pub fn values(&self, states: ArrayView2<f64>, actions: ArrayView2<f64>) -> Array1<f64> {
        let x = Self::input(states, actions);
        let cache = self.net.forward_batch(x.view()).expect("critic input width");
        cache.output().column(0).to_owned()
    }
}

impl ActionValue for Critic {
    fn value_and_action_grad(&self, states: ArrayView2<f64>, actions: ArrayView2<f64>) -> (Array1<f64>, Array2<f64>) {
        let x = Self::input(states, actions);
        let cache = self.net.forward_batch(x.view()).expect("critic input width");
        let q = cache.output().column(0).to_owned();
        let ones = Array2::ones((x.nrows(), 1));
        let (_, dx) = self.net.backward(&cache, ones.view());
        (q, dx.slice(s![.., self.state_dim..]).to_owned())
    }
}

#[derive(Debug, Clone)]
pub struct DdpgAgent {
    pub actor: Mlp,
    pub critic: Critic,
    pub target_actor: Mlp,
    pub target_critic: Critic,
    pub buffer: ReplayBuffer,
    pub hyper: Hyperparams,
    actor_opt: Adam,
    critic_opt: Adam,
}

impl DdpgAgent {
    pub fn new<R: Rng + ?Sized>(state_dim: usize, action_dim: usize, hyper: Hyperparams, rng: &mut R) -> Result<Self, DdpgError> {
        hyper.validate()?;
        let dims = |input: usize, hidden: &[usize], out: usize| {
            let mut d = vec![input];
            d.extend_from_slice(hidden);
            d.push(out);
            d
        };
        let actor = Mlp::new(&dims(state_dim, &hyper.actor_hidden, action_dim), OutputActivation::Tanh, 3e-3, rng);
        let critic_net = Mlp::new(
            &dims(state_dim + action_dim, &hyper.critic_hidden, 1),
            OutputActivation::Identity,
            3e-3,
            rng,
        );
        let critic = Critic {
            net: critic_net,
            state_dim,
        };
        Ok(Self {
            actor_opt: Adam::new(&actor),
            critic_opt: Adam::new(&critic.net),
            target_actor: actor.clone(),
            target_critic: critic.clone(),
            buffer: ReplayBuffer::new(hyper.buffer_capacity, state_dim, action_dim),
            actor,
            critic,
            hyper,
        })
    }

    pub fn state_dim(&self) -> usize {
        self.critic.state_dim
    }

    pub fn action_dim(&self) -> usize {
        self.actor.output_dim()
    }

    /// Policy output plus clipped Gaussian exploration noise.
    pub fn select_action<R: Rng + ?Sized>(&self, state: &[f64], noise_std: f64, rng: &mut R) -> Result<Vec<f64>, DdpgError> {
        let mut a = self.actor.forward(state)?;
        if noise_std > 0.0 {
            let normal = Normal::new(0.0, noise_std).expect("finite positive std");
            for x in &mut a {
                *x = (*x + normal.sample(rng)).clamp(-1.0, 1.0);
            }
        }
        Ok(a)
    }

    /// TD targets `r + γ·Q'(s', μ'(s'))`.
    pub fn td_targets(&self, batch: &Batch) -> Array1<f64> {
        if self.hyper.discount == 0.0 {
            return batch.rewards.clone();
        }
        let next_actions = self
            .target_actor
            .forward_batch(batch.next_states.view())
            .expect("actor input width");
        let next_q = self
            .target_critic
            .values(batch.next_states.view(), next_actions.output().view());
        &batch.rewards + &(next_q * self.hyper.discount)
    }

    /// One Adam step on the mean squared TD error; returns the loss before
    /// the step.
    pub fn critic_train_step(&mut self, batch: &Batch) -> f64 {
        assert!(!batch.is_empty(), "empty batch");
        let targets = self.td_targets(batch);
        let x = Critic::input(batch.states.view(), batch.actions.view());
        let cache = self.critic.net.forward_batch(x.view()).expect("critic input width");
        let err = &cache.output().column(0) - &targets;
        let n = batch.len() as f64;
        let loss = err.mapv(|e| e * e).sum() / n;
        let upstream = (err * (2.0 / n)).insert_axis(Axis(1));
        let (grads, _) = self.critic.net.backward(&cache, upstream.view());
        self.critic_opt.step(&mut self.critic.net, &grads, self.hyper.critic_lr);
        loss
    }

    /// One Adam ascent step on the mean critic value of the policy's actions;
    /// returns the mean value before the step.
    pub fn actor_train_step(&mut self, batch: &Batch) -> f64 {
        policy_step(
            &mut self.actor,
            &mut self.actor_opt,
            self.hyper.actor_lr,
            &self.critic,
            batch.states.view(),
        )
    }

    /// Policy-gradient step against an arbitrary action-value function.
    pub fn actor_train_step_with(&mut self, critic: &dyn ActionValue, states: ArrayView2<f64>) -> f64 {
        policy_step(&mut self.actor, &mut self.actor_opt, self.hyper.actor_lr, critic, states)
    }

    pub fn soft_update_targets(&mut self) {
        let tau = self.hyper.tau;
        self.target_actor
            .soft_update_from(&self.actor, tau)
            .expect("target actor mirrors the actor");
        self.target_critic
            .net
            .soft_update_from(&self.critic.net, tau)
            .expect("target critic mirrors the critic");
    }

    /// Samples a batch and runs one critic step, one actor step and a soft
    /// target update. Returns `(critic_loss, actor_objective)`.
    pub fn learn<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<(f64, f64), DdpgError> {
        let batch = self.buffer.sample(rng, self.hyper.batch_size)?;
        let loss = self.critic_train_step(&batch);
        let objective = self.actor_train_step(&batch);
        self.soft_update_targets();
        Ok((loss, objective))
    }
}

fn policy_step(actor: &mut Mlp, opt: &mut Adam, lr: f64, critic: &dyn ActionValue, states: ArrayView2<f64>) -> f64 {
    assert!(states.nrows() > 0, "empty batch");
    let cache = actor.forward_batch(states).expect("actor input width");
    let (q, dq_da) = critic.value_and_action_grad(states, cache.output().view());
    let n = states.nrows() as f64;
    // Ascend Q by descending -Q.
    let upstream = dq_da * (-1.0 / n);
    let (grads, _) = actor.backward(&cache, upstream.view());
    opt.step(actor, &grads, lr);
    q.mean().unwrap_or(0.0)
}
