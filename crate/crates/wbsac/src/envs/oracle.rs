//! Scripted waypoint policy: a non-learned controller that follows the BFS
//! cell path to a goal. Certifies the maze task is solvable within the
//! episode cap before any learning claim is evaluated.

use std::collections::VecDeque;

use super::{EnvState, MazeEnv, MazeSpec};

/// Shortest free-cell path between two cells (4-neighborhood BFS),
/// inclusive of both endpoints. `None` if disconnected.
pub fn shortest_cell_path(
    spec: &MazeSpec,
    from: (usize, usize),
    to: (usize, usize),
) -> Option<Vec<(usize, usize)>> {
    let rows = spec.rows();
    let cols = spec.cols();
    let mut prev = vec![vec![None::<(usize, usize)>; cols]; rows];
    let mut seen = vec![vec![false; cols]; rows];
    let mut q = VecDeque::new();
    q.push_back(from);
    seen[from.0][from.1] = true;
    while let Some((r, c)) = q.pop_front() {
        if (r, c) == to {
            let mut path = vec![(r, c)];
            let mut cur = (r, c);
            while let Some(p) = prev[cur.0][cur.1] {
                path.push(p);
                cur = p;
            }
            path.reverse();
            return Some(path);
        }
        let mut push = |nr: usize, nc: usize| {
            if !spec.is_wall(nr, nc) && !seen[nr][nc] {
                seen[nr][nc] = true;
                prev[nr][nc] = Some((r, c));
                q.push_back((nr, nc));
            }
        };
        if r > 0 {
            push(r - 1, c);
        }
        if r + 1 < rows {
            push(r + 1, c);
        }
        if c > 0 {
            push(r, c - 1);
        }
        if c + 1 < cols {
            push(r, c + 1);
        }
    }
    None
}

/// Velocity-tracking controller over the BFS waypoint chain.
pub struct WaypointPolicy {
    waypoints: Vec<[f64; 2]>,
    next: usize,
    dynamics: super::Dynamics,
}

impl WaypointPolicy {
    /// Builds the path from the maze start to the given goal index.
    pub fn new(spec: &MazeSpec, goal: usize) -> Option<Self> {
        let path = shortest_cell_path(spec, spec.start_cell(), spec.goal_cells()[goal])?;
        Some(Self {
            waypoints: path
                .into_iter()
                .map(|(r, c)| spec.cell_center(r, c))
                .collect(),
            next: 0,
            dynamics: spec.dynamics,
        })
    }

    /// Action steering toward the current waypoint; advances the waypoint
    /// when within 0.35 cells.
    pub fn act(&mut self, state: &EnvState) -> [f64; 2] {
        let [x, y] = state.position;
        while self.next + 1 < self.waypoints.len() {
            let wp = self.waypoints[self.next];
            let dist = ((x - wp[0]).powi(2) + (y - wp[1]).powi(2)).sqrt();
            if dist < 0.35 {
                self.next += 1;
            } else {
                break;
            }
        }
        let wp = self.waypoints[self.next];
        let dx = wp[0] - x;
        let dy = wp[1] - y;
        let dist = (dx * dx + dy * dy).sqrt().max(1e-9);
        let d = self.dynamics;
        // Track a velocity proportional to the remaining distance, capped.
        let v_des = d.v_max.min(2.0 * dist);
        let ux = dx / dist * v_des;
        let uy = dy / dist * v_des;
        let [vx, vy] = state.velocity;
        let ax = (ux - vx * (1.0 - d.friction)) / (d.f_max * d.dt);
        let ay = (uy - vy * (1.0 - d.friction)) / (d.f_max * d.dt);
        [ax.clamp(-1.0, 1.0), ay.clamp(-1.0, 1.0)]
    }
}

/// Runs the waypoint policy on a fresh episode toward `goal`.
/// Returns `(reached, steps_taken)`.
pub fn run_waypoint_oracle(env: &mut MazeEnv, goal: usize) -> (bool, u32) {
    env.reset_with_goal(goal);
    let mut policy = match WaypointPolicy::new(env.spec(), goal) {
        Some(p) => p,
        None => return (false, 0),
    };
    loop {
        let action = policy.act(env.state());
        let out = env.step(&action);
        if out.terminated {
            return (true, env.state().steps_elapsed);
        }
        if out.truncated {
            return (false, env.state().steps_elapsed);
        }
    }
}
