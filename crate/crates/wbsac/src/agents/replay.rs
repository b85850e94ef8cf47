//! Bounded FIFO replay storage with uniform with-replacement sampling.

use std::collections::VecDeque;

use rand::Rng;

use crate::nn::Matrix;

use super::AgentError;

/// One environment transition. `done` marks true termination; time-limit
/// truncations are stored with `done = false` so they still bootstrap.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub state: Vec<f64>,
    pub action: Vec<f64>,
    pub reward: f64,
    pub next_state: Vec<f64>,
    pub done: bool,
}

/// A sampled mini-batch in matrix form (rows are samples).
#[derive(Debug, Clone)]
pub struct Batch {
    pub states: Matrix,
    pub actions: Matrix,
    pub rewards: Vec<f64>,
    pub next_states: Matrix,
    pub dones: Vec<bool>,
}

impl Batch {
    pub fn len(&self) -> usize {
        self.rewards.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rewards.is_empty()
    }
}

#[derive(Debug, Clone)]
pub struct ReplayBuffer {
    items: VecDeque<Transition>,
    capacity: usize,
}

impl ReplayBuffer {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0, "replay capacity must be positive");
        Self {
            items: VecDeque::new(),
            capacity,
        }
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    /// Appends a transition, evicting the oldest once at capacity.
    pub fn push(&mut self, t: Transition) -> Result<(), AgentError> {
        if !t.reward.is_finite() {
            return Err(AgentError::NonFiniteReward(t.reward));
        }
        if let Some(first) = self.items.front() {
            if first.action.len() != t.action.len() {
                return Err(AgentError::ActionDimMismatch {
                    expected: first.action.len(),
                    got: t.action.len(),
                });
            }
        }
        if self.items.len() == self.capacity {
            self.items.pop_front();
        }
        self.items.push_back(t);
        Ok(())
    }

    pub fn get(&self, i: usize) -> &Transition {
        &self.items[i]
    }

    /// `n` independent uniform draws with replacement, assembled into
    /// matrices in draw order.
    pub fn sample_batch<R: Rng>(&self, n: usize, rng: &mut R) -> Result<Batch, AgentError> {
        if self.items.is_empty() {
            return Err(AgentError::EmptyBuffer);
        }
        let indices = self.sample_indices(n, rng);
        let obs_dim = self.items[0].state.len();
        let act_dim = self.items[0].action.len();
        let mut states = Matrix::zeros(n, obs_dim);
        let mut actions = Matrix::zeros(n, act_dim);
        let mut next_states = Matrix::zeros(n, obs_dim);
        let mut rewards = Vec::with_capacity(n);
        let mut dones = Vec::with_capacity(n);
        for (row, &i) in indices.iter().enumerate() {
            let t = &self.items[i];
            states.row_mut(row).copy_from_slice(&t.state);
            actions.row_mut(row).copy_from_slice(&t.action);
            next_states.row_mut(row).copy_from_slice(&t.next_state);
            rewards.push(t.reward);
            dones.push(t.done);
        }
        Ok(Batch {
            states,
            actions,
            rewards,
            next_states,
            dones,
        })
    }

    pub fn sample_indices<R: Rng>(&self, n: usize, rng: &mut R) -> Vec<usize> {
        (0..n).map(|_| rng.random_range(0..self.items.len())).collect()
    }
}
