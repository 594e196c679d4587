//! The discrete holonomic action set: a stop command plus 5 speeds x 16 headings.

use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::geometry::Vec2;

pub const NUM_SPEEDS: usize = 5;
pub const NUM_HEADINGS: usize = 16;
pub const NUM_ACTIONS: usize = 1 + NUM_SPEEDS * NUM_HEADINGS;
pub const STOP: usize = 0;

/// Speeds in m/s, evenly spaced from 0.2 to 1.0.
pub fn speed(index: usize) -> f64 {
    0.2 * (index + 1) as f64
}

pub fn heading(index: usize) -> f64 {
    2.0 * PI * index as f64 / NUM_HEADINGS as f64
}

#[derive(Debug, Clone, PartialEq)]
pub struct ActionTable {
    entries: Vec<Vec2>,
}

impl ActionTable {
    fn build() -> Self {
        let mut entries = Vec::with_capacity(NUM_ACTIONS);
        entries.push(Vec2::ZERO);
        for s in 0..NUM_SPEEDS {
            for h in 0..NUM_HEADINGS {
                entries.push(Vec2::from_polar(speed(s), heading(h)));
            }
        }
        Self { entries }
    }

    /// The shared table.
    pub fn get() -> &'static ActionTable {
        static TABLE: OnceLock<ActionTable> = OnceLock::new();
        TABLE.get_or_init(Self::build)
    }

    pub fn entries(&self) -> &[Vec2] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Index of the entry closest to `velocity` (ties resolve to the lowest index).
    pub fn nearest_index(&self, velocity: Vec2) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (i, e) in self.entries.iter().enumerate() {
            let d = (*e - velocity).norm_sq();
            if d < best_d {
                best = i;
                best_d = d;
            }
        }
        best
    }
}

/// Velocity command `(vx, vy)` for an action index.
pub fn action_from_index(index: usize) -> Result<Vec2> {
    ActionTable::get().entries.get(index).copied().ok_or_else(|| {
        Error::InvalidArgument(format!("action index {index} out of range 0..{NUM_ACTIONS}"))
    })
}

/// Index whose speed is `speed_index` and heading `heading_index`.
pub fn index_of(speed_index: usize, heading_index: usize) -> usize {
    1 + NUM_HEADINGS * speed_index + heading_index
}
