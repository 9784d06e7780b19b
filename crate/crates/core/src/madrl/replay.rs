use alloc::vec::Vec;

use crate::numerics::RngStream;
use crate::{Error, Result};

/// One environment interaction.
///
/// `state` is the global state `[s_1, s_2]` (8·n_t reals); actions are the
/// raw post-noise actor outputs (2·n_t reals each).
#[derive(Clone, Debug, PartialEq)]
pub struct Transition {
    pub state: Vec<f64>,
    pub action1: Vec<f64>,
    pub action2: Vec<f64>,
    pub reward: f64,
    pub next_state: Vec<f64>,
}

impl Transition {
    pub fn n_t(&self) -> usize {
        self.state.len() / 8
    }

    fn validate(&self) -> Result<()> {
        let n = self.n_t();
        let check = |len: usize, expected: usize| {
            if len == expected {
                Ok(())
            } else {
                Err(Error::LengthMismatch {
                    expected,
                    actual: len,
                })
            }
        };
        if n == 0 || self.state.len() % 8 != 0 {
            return Err(Error::invalid("global state must hold 8·n_t reals"));
        }
        check(self.action1.len(), 2 * n)?;
        check(self.action2.len(), 2 * n)?;
        check(self.next_state.len(), 8 * n)?;
        if !self.reward.is_finite() || self.reward < 0.0 {
            return Err(Error::invalid("reward must be finite and non-negative"));
        }
        Ok(())
    }
}

/// A minibatch laid out row-wise, one transition per row.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TransitionBatch {
    n_t: usize,
    len: usize,
    pub states: Vec<f64>,
    pub actions1: Vec<f64>,
    pub actions2: Vec<f64>,
    pub rewards: Vec<f64>,
    pub next_states: Vec<f64>,
}

impl TransitionBatch {
    pub fn with_n_t(n_t: usize) -> Self {
        TransitionBatch {
            n_t,
            ..Default::default()
        }
    }

    pub fn from_transitions(items: &[Transition]) -> Result<Self> {
        let first = items.first().ok_or(Error::Empty("batch needs at least one transition"))?;
        let mut batch = Self::with_n_t(first.n_t());
        for t in items {
            batch.push(t)?;
        }
        Ok(batch)
    }

    pub fn n_t(&self) -> usize {
        self.n_t
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn clear(&mut self) {
        self.len = 0;
        self.states.clear();
        self.actions1.clear();
        self.actions2.clear();
        self.rewards.clear();
        self.next_states.clear();
    }

    pub fn push(&mut self, t: &Transition) -> Result<()> {
        t.validate()?;
        if t.n_t() != self.n_t {
            return Err(Error::LengthMismatch {
                expected: self.n_t,
                actual: t.n_t(),
            });
        }
        self.states.extend_from_slice(&t.state);
        self.actions1.extend_from_slice(&t.action1);
        self.actions2.extend_from_slice(&t.action2);
        self.rewards.push(t.reward);
        self.next_states.extend_from_slice(&t.next_state);
        self.len += 1;
        Ok(())
    }
}

/// Fixed-capacity ring buffer with uniform sampling (with replacement).
#[derive(Clone, Debug)]
pub struct ReplayBuffer {
    capacity: usize,
    n_t: usize,
    next: usize,
    items: Vec<Transition>,
}

impl ReplayBuffer {
    pub fn new(capacity: usize, n_t: usize) -> Result<Self> {
        if capacity == 0 {
            return Err(Error::invalid("replay capacity must be positive"));
        }
        Ok(ReplayBuffer {
            capacity,
            n_t,
            next: 0,
            items: Vec::new(),
        })
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

    pub fn push(&mut self, t: Transition) -> Result<()> {
        t.validate()?;
        if t.n_t() != self.n_t {
            return Err(Error::LengthMismatch {
                expected: self.n_t,
                actual: t.n_t(),
            });
        }
        if self.items.len() < self.capacity {
            self.items.push(t);
        } else {
            self.items[self.next] = t;
        }
        self.next = (self.next + 1) % self.capacity;
        Ok(())
    }

    /// Most recently stored transition.
    pub fn latest(&self) -> Option<&Transition> {
        if self.items.is_empty() {
            return None;
        }
        let idx = (self.next + self.capacity - 1) % self.capacity;
        self.items.get(idx)
    }

    pub fn sample_into(&self, batch_size: usize, rng: &mut RngStream, out: &mut TransitionBatch) -> Result<()> {
        if self.items.is_empty() {
            return Err(Error::Empty("cannot sample from an empty replay buffer"));
        }
        out.n_t = self.n_t;
        out.clear();
        for _ in 0..batch_size {
            let idx = rng.index(self.items.len());
            out.push(&self.items[idx])?;
        }
        Ok(())
    }
}
