//! Desk-scale environments and instrumentation: a sparse-reward point maze,
//! a dense-reward point-mass arena for smoke tests, a visitation coverage
//! grid, and a scripted waypoint oracle that certifies maze solvability.

mod coverage;
mod maze;
mod oracle;
mod point_mass;

pub use coverage::{heatmap_export, parse_heatmap_csv, CoverageGrid};
pub use maze::{MazeEnv, MazeSpec};
pub use oracle::{run_waypoint_oracle, shortest_cell_path, WaypointPolicy};
pub use point_mass::{PointMassEnv, PointMassSpec};

use rand::Rng;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum EnvError {
    #[error("bad maze layout: {0}")]
    BadLayout(String),
    #[error("position ({x}, {y}) is outside the grid")]
    OutsideGrid { x: f64, y: f64 },
    #[error("position ({x}, {y}) resolves to a wall cell ({row}, {col})")]
    InsideWall {
        x: f64,
        y: f64,
        row: usize,
        col: usize,
    },
    #[error("i/o error at {path}: {message}")]
    Io { path: String, message: String },
}

/// Physics constants shared by both environments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dynamics {
    pub dt: f64,
    pub f_max: f64,
    pub v_max: f64,
    pub friction: f64,
}

impl Default for Dynamics {
    fn default() -> Self {
        // f_max/v_max calibrated so the scripted waypoint oracle solves the
        // medium maze in ~60-120 steps, leaving headroom under the 300-step
        // cap.
        Self {
            dt: 0.1,
            f_max: 2.0,
            v_max: 1.5,
            friction: 0.1,
        }
    }
}

/// Ball state; positions are in cell units with y growing upward.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvState {
    pub position: [f64; 2],
    pub velocity: [f64; 2],
    pub steps_elapsed: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub observation: Vec<f64>,
    pub reward: f64,
    pub terminated: bool,
    pub truncated: bool,
}

/// The environments the harness can instantiate. Each instance is owned by
/// one run; independent instances may live on different threads.
#[derive(Debug, Clone)]
pub enum EnvKind {
    Maze(MazeEnv),
    PointMass(PointMassEnv),
}

impl EnvKind {
    pub fn obs_dim(&self) -> usize {
        4
    }

    pub fn action_dim(&self) -> usize {
        2
    }

    pub fn reset<R: Rng>(&mut self, rng: &mut R) -> Vec<f64> {
        match self {
            EnvKind::Maze(env) => env.reset(rng),
            EnvKind::PointMass(env) => env.reset(rng),
        }
    }

    pub fn step(&mut self, action: &[f64]) -> StepOutcome {
        match self {
            EnvKind::Maze(env) => env.step(action),
            EnvKind::PointMass(env) => env.step(action),
        }
    }

    pub fn position(&self) -> [f64; 2] {
        match self {
            EnvKind::Maze(env) => env.state().position,
            EnvKind::PointMass(env) => env.state().position,
        }
    }

    /// Visitation grid matching this environment's discretization.
    pub fn coverage_grid(&self) -> CoverageGrid {
        match self {
            EnvKind::Maze(env) => CoverageGrid::from_maze(env.spec()),
            EnvKind::PointMass(env) => {
                CoverageGrid::open_arena(env.spec().size_cells(), env.spec().size_cells())
            }
        }
    }
}
