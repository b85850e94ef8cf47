//! Sparse-reward continuous point maze.
//!
//! A ball starts near the maze center; one of two hidden goal cells
//! (top-right and bottom-left interior corners) is drawn uniformly per
//! episode. Reward is 1 exactly when the ball enters the goal radius, which
//! also terminates the episode; hitting the step cap truncates instead.
//! Wall collisions are resolved per axis so the ball slides along walls.

use rand::Rng;

use super::{Dynamics, EnvError, EnvState, StepOutcome};

/// Default medium layout: an 8x8 interior with internal walls; both goals
/// need at least two turns from the center. A walled center room with one
/// offset doorway per side feeds a ring-corridor system that passes both
/// goal pockets.
const DEFAULT_LAYOUT: &str = "\
##########
#.......G#
#.###.##.#
#.#......#
#.#.S..#.#
#......#.#
#.##.###.#
#........#
#G.#.....#
##########";

/// Wall grid plus physics constants for one maze.
#[derive(Debug, Clone, PartialEq)]
pub struct MazeSpec {
    /// `walls[row][col]`, row 0 at the top.
    walls: Vec<Vec<bool>>,
    rows: usize,
    cols: usize,
    start_cell: (usize, usize),
    goal_cells: Vec<(usize, usize)>,
    pub goal_radius: f64,
    pub cell_size: f64,
    pub dynamics: Dynamics,
    pub episode_cap: u32,
    /// Uniform reset jitter around the start-cell center, per axis.
    pub start_jitter: f64,
}

impl MazeSpec {
    /// The built-in medium maze.
    pub fn default_medium() -> Self {
        Self::from_text(DEFAULT_LAYOUT).expect("builtin layout is valid")
    }

    /// Parses a plain-text grid: `#` wall, `.` free, `S` start, `G` goal.
    pub fn from_text(text: &str) -> Result<Self, EnvError> {
        let lines: Vec<&str> = text.lines().filter(|l| !l.trim().is_empty()).collect();
        if lines.len() < 3 {
            return Err(EnvError::BadLayout("need at least 3 rows".into()));
        }
        let cols = lines[0].chars().count();
        let mut walls = Vec::with_capacity(lines.len());
        let mut start = None;
        let mut goals = Vec::new();
        for (r, line) in lines.iter().enumerate() {
            if line.chars().count() != cols {
                return Err(EnvError::BadLayout(format!(
                    "row {r} has {} cells, expected {cols}",
                    line.chars().count()
                )));
            }
            let mut row = Vec::with_capacity(cols);
            for (c, ch) in line.chars().enumerate() {
                match ch {
                    '#' => row.push(true),
                    '.' => row.push(false),
                    'S' => {
                        if start.replace((r, c)).is_some() {
                            return Err(EnvError::BadLayout("multiple start cells".into()));
                        }
                        row.push(false);
                    }
                    'G' => {
                        goals.push((r, c));
                        row.push(false);
                    }
                    other => {
                        return Err(EnvError::BadLayout(format!(
                            "unexpected character {other:?} at row {r}, col {c}"
                        )))
                    }
                }
            }
            walls.push(row);
        }
        let start_cell =
            start.ok_or_else(|| EnvError::BadLayout("no start cell 'S' found".into()))?;
        if goals.is_empty() {
            return Err(EnvError::BadLayout("no goal cell 'G' found".into()));
        }
        let spec = Self {
            rows: walls.len(),
            cols,
            walls,
            start_cell,
            goal_cells: goals,
            goal_radius: 0.45,
            cell_size: 1.0,
            dynamics: Dynamics::default(),
            episode_cap: 300,
            start_jitter: 0.3,
        };
        spec.check_reachability()?;
        Ok(spec)
    }

    pub fn from_file(path: &std::path::Path) -> Result<Self, EnvError> {
        let text = std::fs::read_to_string(path).map_err(|e| EnvError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::from_text(&text)
    }

    /// Flood fill from the start: every goal must be reachable.
    fn check_reachability(&self) -> Result<(), EnvError> {
        let mut seen = vec![vec![false; self.cols]; self.rows];
        let mut stack = vec![self.start_cell];
        seen[self.start_cell.0][self.start_cell.1] = true;
        while let Some((r, c)) = stack.pop() {
            for (nr, nc) in self.neighbors(r, c) {
                if !self.walls[nr][nc] && !seen[nr][nc] {
                    seen[nr][nc] = true;
                    stack.push((nr, nc));
                }
            }
        }
        for &(r, c) in &self.goal_cells {
            if !seen[r][c] {
                return Err(EnvError::BadLayout(format!(
                    "goal at ({r}, {c}) is unreachable from the start"
                )));
            }
        }
        Ok(())
    }

    fn neighbors(&self, r: usize, c: usize) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(4);
        if r > 0 {
            out.push((r - 1, c));
        }
        if r + 1 < self.rows {
            out.push((r + 1, c));
        }
        if c > 0 {
            out.push((r, c - 1));
        }
        if c + 1 < self.cols {
            out.push((r, c + 1));
        }
        out
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_wall(&self, row: usize, col: usize) -> bool {
        self.walls[row][col]
    }

    pub fn start_cell(&self) -> (usize, usize) {
        self.start_cell
    }

    pub fn goal_cells(&self) -> &[(usize, usize)] {
        &self.goal_cells
    }

    pub fn free_cell_count(&self) -> usize {
        self.walls
            .iter()
            .flatten()
            .filter(|&&wall| !wall)
            .count()
    }

    /// Physical center of a cell; y grows upward, row 0 is the top row.
    pub fn cell_center(&self, row: usize, col: usize) -> [f64; 2] {
        [
            (col as f64 + 0.5) * self.cell_size,
            (self.rows as f64 - 1.0 - row as f64 + 0.5) * self.cell_size,
        ]
    }

    /// Grid cell containing a physical position.
    pub fn cell_at(&self, x: f64, y: f64) -> Option<(usize, usize)> {
        let col = (x / self.cell_size).floor();
        let row = self.rows as f64 - 1.0 - (y / self.cell_size).floor();
        if col < 0.0 || row < 0.0 || col >= self.cols as f64 || row >= self.rows as f64 {
            return None;
        }
        Some((row as usize, col as usize))
    }

    fn is_wall_at(&self, x: f64, y: f64) -> bool {
        match self.cell_at(x, y) {
            Some((r, c)) => self.walls[r][c],
            None => true,
        }
    }

    pub fn width(&self) -> f64 {
        self.cols as f64 * self.cell_size
    }

    pub fn height(&self) -> f64 {
        self.rows as f64 * self.cell_size
    }
}

#[derive(Debug, Clone)]
pub struct MazeEnv {
    spec: MazeSpec,
    state: EnvState,
    active_goal: usize,
}

impl MazeEnv {
    pub fn new(spec: MazeSpec) -> Self {
        let position = spec.cell_center(spec.start_cell.0, spec.start_cell.1);
        Self {
            spec,
            state: EnvState {
                position,
                velocity: [0.0, 0.0],
                steps_elapsed: 0,
            },
            active_goal: 0,
        }
    }

    pub fn spec(&self) -> &MazeSpec {
        &self.spec
    }

    pub fn state(&self) -> &EnvState {
        &self.state
    }

    pub fn active_goal(&self) -> usize {
        self.active_goal
    }

    /// Ball to the start cell center plus jitter, velocity zero, and a fresh
    /// uniformly drawn goal (hidden from the observation). Jitter and goal
    /// draws happen in a fixed order so streams stay aligned.
    pub fn reset<R: Rng>(&mut self, rng: &mut R) -> Vec<f64> {
        let center = self
            .spec
            .cell_center(self.spec.start_cell.0, self.spec.start_cell.1);
        let j = self.spec.start_jitter;
        let dx = j * rng.random_range(-1.0..1.0);
        let dy = j * rng.random_range(-1.0..1.0);
        let goal = rng.random_range(0..self.spec.goal_cells.len());
        self.state = EnvState {
            position: [center[0] + dx, center[1] + dy],
            velocity: [0.0, 0.0],
            steps_elapsed: 0,
        };
        self.active_goal = goal;
        self.observation()
    }

    /// Deterministic reset onto a chosen goal (oracle runs and tests).
    pub fn reset_with_goal(&mut self, goal: usize) -> Vec<f64> {
        assert!(goal < self.spec.goal_cells.len());
        let center = self
            .spec
            .cell_center(self.spec.start_cell.0, self.spec.start_cell.1);
        self.state = EnvState {
            position: center,
            velocity: [0.0, 0.0],
            steps_elapsed: 0,
        };
        self.active_goal = goal;
        self.observation()
    }

    /// Observation: position and velocity, each normalized to [-1, 1].
    /// The active goal never appears here.
    pub fn observation(&self) -> Vec<f64> {
        let [x, y] = self.state.position;
        let [vx, vy] = self.state.velocity;
        vec![
            2.0 * x / self.spec.width() - 1.0,
            2.0 * y / self.spec.height() - 1.0,
            vx / self.spec.dynamics.v_max,
            vy / self.spec.dynamics.v_max,
        ]
    }

    pub fn step(&mut self, action: &[f64]) -> StepOutcome {
        let spec = self.spec.clone();
        let dyn_ = spec.dynamics;
        let ax = action[0].clamp(-1.0, 1.0);
        let ay = action[1].clamp(-1.0, 1.0);

        let mut vx = self.state.velocity[0] * (1.0 - dyn_.friction) + ax * dyn_.f_max * dyn_.dt;
        let mut vy = self.state.velocity[1] * (1.0 - dyn_.friction) + ay * dyn_.f_max * dyn_.dt;
        let speed = (vx * vx + vy * vy).sqrt();
        if speed > dyn_.v_max {
            let scale = dyn_.v_max / speed;
            vx *= scale;
            vy *= scale;
        }

        let [x, y] = self.state.position;
        let (nx, blocked_x) = resolve_axis(&spec, x + vx * dyn_.dt, y, x, vx, true);
        if blocked_x {
            vx = 0.0;
        }
        let (ny, blocked_y) = resolve_axis(&spec, y + vy * dyn_.dt, nx, y, vy, false);
        if blocked_y {
            vy = 0.0;
        }

        self.state.position = [nx, ny];
        self.state.velocity = [vx, vy];
        self.state.steps_elapsed += 1;

        let goal = spec.goal_cells[self.active_goal];
        let gc = spec.cell_center(goal.0, goal.1);
        let dist = ((nx - gc[0]).powi(2) + (ny - gc[1]).powi(2)).sqrt();
        let terminated = dist <= spec.goal_radius;
        let reward = if terminated { 1.0 } else { 0.0 };
        let truncated = !terminated && self.state.steps_elapsed >= spec.episode_cap;
        StepOutcome {
            observation: self.observation(),
            reward,
            terminated,
            truncated,
        }
    }
}

/// Moves one axis toward its proposed value, projecting back to the cell
/// boundary when the destination cell is a wall. Speeds never exceed one
/// cell per step, so at most one boundary is crossed.
fn resolve_axis(
    spec: &MazeSpec,
    proposed: f64,
    other: f64,
    current: f64,
    velocity: f64,
    is_x: bool,
) -> (f64, bool) {
    const MARGIN: f64 = 1e-6;
    let (x, y) = if is_x {
        (proposed, other)
    } else {
        (other, proposed)
    };
    if !spec.is_wall_at(x, y) {
        return (proposed, false);
    }
    let cell = spec.cell_size;
    let blocked = if is_x {
        if velocity > 0.0 {
            (proposed / cell).floor() * cell - MARGIN
        } else {
            ((proposed / cell).floor() + 1.0) * cell + MARGIN
        }
    } else {
        // y axis: cell boundaries in physical y behave the same way.
        if velocity > 0.0 {
            (proposed / cell).floor() * cell - MARGIN
        } else {
            ((proposed / cell).floor() + 1.0) * cell + MARGIN
        }
    };
    // Degenerate case: projection should never leave the current free cell.
    let fallback = current;
    let (bx, by) = if is_x { (blocked, y) } else { (x, blocked) };
    if spec.is_wall_at(bx, by) {
        (fallback, true)
    } else {
        (blocked, true)
    }
}
