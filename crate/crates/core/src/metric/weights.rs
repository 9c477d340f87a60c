//! Rank weights for a top-N result list.
//!
//! The weight of rank `r` in a list of `N` is `(1/N) * sum_{c=r..N} 1/c`.
//! Top positions weigh more and the weights of a full list sum to one.
//! When only some ranks were collected, weights are renormalized over the
//! collected ranks so a partial list is not implicitly scored as zeros.

use std::collections::BTreeSet;

use super::MetricError;

/// Precomputed weights for every rank of one list size.
#[derive(Debug, Clone, PartialEq)]
pub struct RankWeights {
    weights: Vec<f64>,
}

impl RankWeights {
    pub fn new(list_size: u32) -> Result<Self, MetricError> {
        if list_size == 0 {
            return Err(MetricError::EmptyList);
        }
        let n = list_size as usize;
        let mut weights = vec![0.0; n];
        // tail sums, smallest terms first
        let mut tail = 0.0;
        for rank in (1..=n).rev() {
            tail += 1.0 / rank as f64;
            weights[rank - 1] = tail / n as f64;
        }
        Ok(Self { weights })
    }

    pub fn list_size(&self) -> u32 {
        self.weights.len() as u32
    }

    pub fn get(&self, rank: u32) -> Result<f64, MetricError> {
        if rank == 0 || rank as usize > self.weights.len() {
            return Err(MetricError::RankOutOfRange {
                rank,
                list_size: self.list_size(),
            });
        }
        Ok(self.weights[rank as usize - 1])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.weights
    }

    /// Sum of the weights of `collected` ranks.
    pub fn collected_mass<I>(&self, collected: I) -> Result<f64, MetricError>
    where
        I: IntoIterator<Item = u32>,
    {
        let mut mass = 0.0;
        let mut any = false;
        for rank in collected {
            mass += self.get(rank)?;
            any = true;
        }
        if !any {
            return Err(MetricError::NothingCollected);
        }
        Ok(mass)
    }

    pub fn rescaled(&self, rank: u32, collected: &BTreeSet<u32>) -> Result<f64, MetricError> {
        if !collected.contains(&rank) {
            return Err(MetricError::RankNotCollected { rank });
        }
        let mass = self.collected_mass(collected.iter().copied())?;
        Ok(self.get(rank)? / mass)
    }
}

/// Weight of `rank` in a full list of `list_size` items.
pub fn rank_weight(rank: u32, list_size: u32) -> Result<f64, MetricError> {
    if list_size == 0 {
        return Err(MetricError::EmptyList);
    }
    if rank == 0 || rank > list_size {
        return Err(MetricError::RankOutOfRange { rank, list_size });
    }
    let n = list_size as f64;
    let tail: f64 = (rank..=list_size).rev().map(|c| 1.0 / c as f64).sum();
    Ok(tail / n)
}

/// Weight of `rank` renormalized over the ranks that were actually collected.
pub fn rescaled_weight(rank: u32, list_size: u32, collected_ranks: &BTreeSet<u32>) -> Result<f64, MetricError> {
    RankWeights::new(list_size)?.rescaled(rank, collected_ranks)
}
