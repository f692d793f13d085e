use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Opinions of the leader (index 0) and the `N` followers, each a vector in ℝᵈ,
/// stored contiguously.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct State {
    dim: usize,
    data: Vec<f64>,
}

impl State {
    pub fn zeros(n_total: usize, dim: usize) -> Self {
        State {
            dim,
            data: vec![0.0; n_total * dim],
        }
    }

    /// Builds a state from per-agent vectors; `agents[0]` is the leader.
    pub fn from_agents(agents: &[Vec<f64>]) -> Result<Self> {
        let dim = agents.first().map(Vec::len).unwrap_or(0);
        if dim == 0 {
            return Err(Error::invalid("state", "needs at least one agent with dim >= 1"));
        }
        if agents.iter().any(|a| a.len() != dim) {
            return Err(Error::invalid("state", "agents have inconsistent dimensions"));
        }
        Ok(State {
            dim,
            data: agents.iter().flatten().copied().collect(),
        })
    }

    pub(crate) fn from_flat(dim: usize, data: Vec<f64>) -> Self {
        debug_assert!(dim > 0 && data.len().is_multiple_of(dim));
        State { dim, data }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of agents including the leader.
    #[inline]
    pub fn n_total(&self) -> usize {
        self.data.len() / self.dim
    }

    #[inline]
    pub fn agent(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    #[inline]
    pub fn agent_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.dim..(i + 1) * self.dim]
    }

    #[inline]
    pub fn leader(&self) -> &[f64] {
        self.agent(0)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub(crate) fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn to_agents(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.dim).map(<[f64]>::to_vec).collect()
    }

    /// Every agent shifted by the same vector `c`.
    pub fn translated(&self, c: &[f64]) -> Self {
        assert_eq!(c.len(), self.dim, "translation vector has wrong dimension");
        let mut out = self.clone();
        for chunk in out.data.chunks_mut(self.dim) {
            for (x, ci) in chunk.iter_mut().zip(c) {
                *x += ci;
            }
        }
        out
    }

    /// Largest Euclidean norm over all agents, leader included.
    pub fn max_norm(&self) -> f64 {
        self.data
            .chunks(self.dim)
            .map(norm)
            .fold(0.0, f64::max)
    }
}

#[inline]
pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

#[inline]
pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}
