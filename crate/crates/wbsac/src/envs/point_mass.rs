//! Dense-reward open-arena point mass: the fast smoke-test environment.
//!
//! Same dynamics as the maze but no interior walls; the reward each step is
//! `-dist(position, goal) * dt`, so returns are maximized by heading
//! straight at the (fixed, known-location) goal.

use rand::Rng;

use super::{Dynamics, EnvState, StepOutcome};

#[derive(Debug, Clone, PartialEq)]
pub struct PointMassSpec {
    /// Square arena side length in cell units.
    pub size: f64,
    pub start: [f64; 2],
    pub goal: [f64; 2],
    pub goal_radius: f64,
    pub dynamics: Dynamics,
    pub episode_cap: u32,
    pub start_jitter: f64,
}

impl Default for PointMassSpec {
    fn default() -> Self {
        Self {
            size: 10.0,
            start: [5.0, 5.0],
            goal: [8.0, 8.0],
            goal_radius: 0.45,
            dynamics: Dynamics::default(),
            episode_cap: 200,
            start_jitter: 0.3,
        }
    }
}

impl PointMassSpec {
    pub fn size_cells(&self) -> usize {
        self.size.round() as usize
    }

    /// Return of the straight-line max-thrust rollout, which upper-bounds
    /// any policy's return: per-axis speed obeys the same recurrence, so no
    /// policy closes distance faster.
    pub fn oracle_return(&self) -> f64 {
        let d = self.dynamics;
        let mut dist =
            ((self.start[0] - self.goal[0]).powi(2) + (self.start[1] - self.goal[1]).powi(2))
                .sqrt();
        let mut speed = 0.0;
        let mut ret = 0.0;
        for _ in 0..self.episode_cap {
            speed = (speed * (1.0 - d.friction) + d.f_max * d.dt).min(d.v_max);
            dist = (dist - speed * d.dt).max(0.0);
            ret += -dist * d.dt;
            if dist <= self.goal_radius {
                break;
            }
        }
        ret
    }
}

#[derive(Debug, Clone)]
pub struct PointMassEnv {
    spec: PointMassSpec,
    state: EnvState,
}

impl PointMassEnv {
    pub fn new(spec: PointMassSpec) -> Self {
        let start = spec.start;
        Self {
            spec,
            state: EnvState {
                position: start,
                velocity: [0.0, 0.0],
                steps_elapsed: 0,
            },
        }
    }

    pub fn spec(&self) -> &PointMassSpec {
        &self.spec
    }

    pub fn state(&self) -> &EnvState {
        &self.state
    }

    pub fn reset<R: Rng>(&mut self, rng: &mut R) -> Vec<f64> {
        let j = self.spec.start_jitter;
        let dx = j * rng.random_range(-1.0..1.0);
        let dy = j * rng.random_range(-1.0..1.0);
        self.state = EnvState {
            position: [self.spec.start[0] + dx, self.spec.start[1] + dy],
            velocity: [0.0, 0.0],
            steps_elapsed: 0,
        };
        self.observation()
    }

    pub fn observation(&self) -> Vec<f64> {
        let [x, y] = self.state.position;
        let [vx, vy] = self.state.velocity;
        vec![
            2.0 * x / self.spec.size - 1.0,
            2.0 * y / self.spec.size - 1.0,
            vx / self.spec.dynamics.v_max,
            vy / self.spec.dynamics.v_max,
        ]
    }

    pub fn step(&mut self, action: &[f64]) -> StepOutcome {
        const MARGIN: f64 = 1e-6;
        let d = self.spec.dynamics;
        let ax = action[0].clamp(-1.0, 1.0);
        let ay = action[1].clamp(-1.0, 1.0);
        let mut vx = self.state.velocity[0] * (1.0 - d.friction) + ax * d.f_max * d.dt;
        let mut vy = self.state.velocity[1] * (1.0 - d.friction) + ay * d.f_max * d.dt;
        let speed = (vx * vx + vy * vy).sqrt();
        if speed > d.v_max {
            let scale = d.v_max / speed;
            vx *= scale;
            vy *= scale;
        }
        let hi = self.spec.size - MARGIN;
        let mut x = self.state.position[0] + vx * d.dt;
        let mut y = self.state.position[1] + vy * d.dt;
        if x < MARGIN || x > hi {
            x = x.clamp(MARGIN, hi);
            vx = 0.0;
        }
        if y < MARGIN || y > hi {
            y = y.clamp(MARGIN, hi);
            vy = 0.0;
        }
        self.state.position = [x, y];
        self.state.velocity = [vx, vy];
        self.state.steps_elapsed += 1;

        let dist =
            ((x - self.spec.goal[0]).powi(2) + (y - self.spec.goal[1]).powi(2)).sqrt();
        let reward = -dist * d.dt;
        let terminated = dist <= self.spec.goal_radius;
        let truncated = !terminated && self.state.steps_elapsed >= self.spec.episode_cap;
        StepOutcome {
            observation: self.observation(),
            reward,
            terminated,
            truncated,
        }
    }
}
