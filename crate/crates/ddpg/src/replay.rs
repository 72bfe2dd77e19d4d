//! Fixed-capacity ring buffer of transitions with uniform sampling.

use ndarray::{Array1, Array2};
use rand::Rng;

use crate::DdpgError;

#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub state: Vec<f64>,
    pub action: Vec<f64>,
    pub reward: f64,
    pub next_state: Vec<f64>,
}

/// A sampled mini-batch, one transition per row.
#[derive(Debug, Clone, PartialEq)]
pub struct Batch {
    pub states: Array2<f64>,
    pub actions: Array2<f64>,
    pub rewards: Array1<f64>,
    pub next_states: Array2<f64>,
}

impl Batch {
    pub fn len(&self) -> usize {
        self.rewards.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rewards.is_empty()
    }

    pub fn from_transitions(transitions: &[Transition]) -> Self {
        let n = transitions.len();
        let sd = transitions.first().map_or(0, |t| t.state.len());
        let ad = transitions.first().map_or(0, |t| t.action.len());
        let mut batch = Batch {
            states: Array2::zeros((n, sd)),
            actions: Array2::zeros((n, ad)),
            rewards: Array1::zeros(n),
            next_states: Array2::zeros((n, sd)),
        };
        for (i, t) in transitions.iter().enumerate() {
            batch.states.row_mut(i).assign(&Array1::from(t.state.clone()));
            batch.actions.row_mut(i).assign(&Array1::from(t.action.clone()));
            batch.rewards[i] = t.reward;
            batch.next_states.row_mut(i).assign(&Array1::from(t.next_state.clone()));
        }
        batch
    }
}

/// Transitions are stored flat; the oldest one is overwritten once full.
#[derive(Debug, Clone)]
pub struct ReplayBuffer {
    capacity: usize,
    state_dim: usize,
    action_dim: usize,
    states: Vec<f64>,
    actions: Vec<f64>,
    rewards: Vec<f64>,
    next_states: Vec<f64>,
    len: usize,
    head: usize,
}

impl ReplayBuffer {
    pub fn new(capacity: usize, state_dim: usize, action_dim: usize) -> Self {
        assert!(capacity > 0, "replay capacity must be positive");
        Self {
            capacity,
            state_dim,
            action_dim,
            states: vec![0.0; capacity * state_dim],
            actions: vec![0.0; capacity * action_dim],
            rewards: vec![0.0; capacity],
            next_states: vec![0.0; capacity * state_dim],
            len: 0,
            head: 0,
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn push(&mut self, t: &Transition) -> Result<(), DdpgError> {
        if t.state.len() != self.state_dim || t.next_state.len() != self.state_dim {
            return Err(DdpgError::InputLength {
                expected: self.state_dim,
                got: t.state.len(),
            });
        }
        if t.action.len() != self.action_dim {
            return Err(DdpgError::InputLength {
                expected: self.action_dim,
                got: t.action.len(),
            });
        }
        let i = self.head;
        let (sd, ad) = (self.state_dim, self.action_dim);
        self.states[i * sd..(i + 1) * sd].copy_from_slice(&t.state);
        self.actions[i * ad..(i + 1) * ad].copy_from_slice(&t.action);
        self.rewards[i] = t.reward;
        self.next_states[i * sd..(i + 1) * sd].copy_from_slice(&t.next_state);
        self.head = (self.head + 1) % self.capacity;
        self.len = (self.len + 1).min(self.capacity);
        Ok(())
    }

    /// Stored transitions from oldest to newest.
    pub fn iter(&self) -> impl Iterator<Item = Transition> + '_ {
        let start = if self.len < self.capacity { 0 } else { self.head };
        (0..self.len).map(move |k| self.get((start + k) % self.capacity))
    }

    fn get(&self, i: usize) -> Transition {
        let (sd, ad) = (self.state_dim, self.action_dim);
        Transition {
            state: self.states[i * sd..(i + 1) * sd].to_vec(),
            action: self.actions[i * ad..(i + 1) * ad].to_vec(),
            reward: self.rewards[i],
            next_state: self.next_states[i * sd..(i + 1) * sd].to_vec(),
        }
    }

    /// Slot indices drawn uniformly with replacement.
    pub fn sample_indices<R: Rng + ?Sized>(&self, rng: &mut R, batch_size: usize) -> Result<Vec<usize>, DdpgError> {
        if self.len < batch_size || batch_size == 0 {
            return Err(DdpgError::Underfilled {
                len: self.len,
                batch_size,
            });
        }
        Ok((0..batch_size).map(|_| rng.gen_range(0..self.len)).collect())
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, batch_size: usize) -> Result<Batch, DdpgError> {
        let idx = self.sample_indices(rng, batch_size)?;
        let (sd, ad) = (self.state_dim, self.action_dim);
        let mut states = Array2::zeros((batch_size, sd));
        let mut actions = Array2::zeros((batch_size, ad));
        let mut rewards = Array1::zeros(batch_size);
        let mut next_states = Array2::zeros((batch_size, sd));
        for (row, &i) in idx.iter().enumerate() {
            for k in 0..sd {
                states[[row, k]] = self.states[i * sd + k];
                next_states[[row, k]] = self.next_states[i * sd + k];
            }
            for k in 0..ad {
                actions[[row, k]] = self.actions[i * ad + k];
            }
            rewards[row] = self.rewards[i];
        }
        Ok(Batch {
            states,
            actions,
            rewards,
            next_states,
        })
    }
}
