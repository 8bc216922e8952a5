//! Relay-selection experiment: pairwise SINR measurement feeding a maximum
//! weighted matching of relays to destinations, compared against random
//! allocation.

mod matching;
mod relay;

pub use matching::{max_weight_matching, random_assignment};
pub use relay::{measure_sinr_matrix, run_relay_experiment, write_report_csv, Squad, SquadReport};

use thiserror::Error;

use crate::channel::ChannelError;
use crate::radio::RadioError;

#[derive(Debug, Error)]
pub enum NetappsError {
    #[error("weight matrix is empty")]
    EmptyMatrix,
    #[error("weight matrix is ragged: row {row} has {got} columns, expected {expected}")]
    Ragged {
        row: usize,
        got: usize,
        expected: usize,
    },
    #[error("matching needs rows <= columns, got {rows} x {cols}")]
    RowsExceedColumns { rows: usize, cols: usize },
    #[error("weight matrix has a non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("probe failure measuring relay {relay} toward destination {destination}: {source}")]
    ProbeFailure {
        relay: usize,
        destination: usize,
        #[source]
        source: RadioError,
    },
    #[error(transparent)]
    Channel(#[from] ChannelError),
}

/// Rectangular SINR weight table: `weights[r][d]` is the SINR in dB from
/// candidate relay `r` toward destination `d`.
#[derive(Clone, Debug, PartialEq)]
pub struct SinrMatrix {
    weights: Vec<Vec<f64>>,
}

impl SinrMatrix {
    pub fn new(weights: Vec<Vec<f64>>) -> Result<Self, NetappsError> {
        if weights.is_empty() || weights[0].is_empty() {
            return Err(NetappsError::EmptyMatrix);
        }
        let expected = weights[0].len();
        for (row, r) in weights.iter().enumerate() {
            if r.len() != expected {
                return Err(NetappsError::Ragged {
                    row,
                    got: r.len(),
                    expected,
                });
            }
            for (col, w) in r.iter().enumerate() {
                if !w.is_finite() {
                    return Err(NetappsError::NonFinite { row, col });
                }
            }
        }
        Ok(SinrMatrix { weights })
    }

    pub fn rows(&self) -> usize {
        self.weights.len()
    }

    pub fn cols(&self) -> usize {
        self.weights[0].len()
    }

    pub fn weight(&self, row: usize, col: usize) -> f64 {
        self.weights[row][col]
    }

    pub fn rows_iter(&self) -> impl Iterator<Item = &[f64]> {
        self.weights.iter().map(|r| r.as_slice())
    }

    /// Total weight of an assignment (one destination per relay).
    pub fn total(&self, assignment: &[usize]) -> f64 {
        assignment
            .iter()
            .enumerate()
            .map(|(r, &d)| self.weights[r][d])
            .sum()
    }
}
