//! Deterministic (partitional) structures, characterized by `Q` being the identity.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::model::{BeliefLandscape, Tolerances};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    /// `cells[s]` is the set of states in which signal `s` is sent.
    pub cells: Vec<Vec<usize>>,
    /// States no belief type puts weight on; the data imply they have prior probability zero.
    pub zero_prior_states: Vec<usize>,
}

impl Partition {
    /// The partitional structure: state `θ` sends the signal whose cell contains it.
    ///
    /// Zero-prior states have no identified signal and get an all-zero row.
    pub fn structure(&self, n_states: usize) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(n_states, self.cells.len());
        for (s, cell) in self.cells.iter().enumerate() {
            for &t in cell {
                m[(t, s)] = 1.0;
            }
        }
        m
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PartitionOutcome {
    Partitional(Partition),
    NotPartitional,
}

pub fn detect_partitional(landscape: &BeliefLandscape, tol: &Tolerances) -> Result<PartitionOutcome> {
    let q = landscape.q();
    let n = q.nrows();
    if (q - DMatrix::identity(n, n)).amax() > tol.matching {
        return Ok(PartitionOutcome::NotPartitional);
    }
    let b = landscape.b();
    let labels = landscape.beliefs();
    let mut owner: Vec<Option<usize>> = vec![None; landscape.n_states()];
    let mut cells = Vec::with_capacity(n);
    for s in 0..n {
        let cell: Vec<usize> = (0..landscape.n_states()).filter(|&t| b[(s, t)] > tol.entry).collect();
        for &t in &cell {
            if let Some(other) = owner[t] {
                return Err(Error::InconsistentLandscape(format!(
                    "Q is the identity but signals {} and {} both put weight on state {}",
                    labels.signal_labels()[other],
                    labels.signal_labels()[s],
                    labels.state_labels()[t]
                )));
            }
            owner[t] = Some(s);
        }
        cells.push(cell);
    }
    let zero_prior_states = (0..owner.len()).filter(|&t| owner[t].is_none()).collect();
    Ok(PartitionOutcome::Partitional(Partition {
        cells,
        zero_prior_states,
    }))
}
