//! Node reservations.

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ReservationState {
    Pending,
    Active,
    Done,
    Cancelled,
}

/// A claim on pool nodes for a team; charged exactly once at creation.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Reservation {
    pub id: u64,
    pub team: String,
    pub n_nodes: usize,
    pub start_s: i64,
    pub duration_h: f64,
    pub state: ReservationState,
}

impl Reservation {
    pub fn ends_at_s(&self) -> i64 {
        self.start_s + (self.duration_h * 3600.0).round() as i64
    }

    pub fn holds_nodes(&self) -> bool {
        self.state == ReservationState::Active
    }
}
