//! Tree search with per-edge moment propagation and summed risk bounds.

use std::f64::consts::{PI, TAU};
use std::io::{self, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::distmoments::DisturbanceModel;
use crate::error::{Error, Result};
use crate::propagator::{MeanCov, MomentState, MomentTrajectory, Propagator};

use super::dubins::dubins_steer_within;
use super::geometry::{Environment, Pose};
use super::risk::trajectory_risk;

/// Search parameters and the names tying the planner to the compiled system.
#[derive(Clone, Debug, PartialEq)]
pub struct PlannerConfig {
    pub epsilon: f64,
    pub iterations: usize,
    pub seed: u64,
    pub turn_radius: f64,
    /// Longest straight-line distance towards a sample per extension.
    pub max_edge: f64,
    /// Probability of sampling the goal centre.
    pub goal_bias: f64,
    pub x_var: String,
    pub y_var: String,
    pub speed_var: String,
    pub cos_var: String,
    pub sin_var: String,
    pub angle_disturbance: String,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        PlannerConfig {
            epsilon: 0.1,
            iterations: 3000,
            seed: 0,
            turn_radius: 5.0,
            max_edge: 10.0,
            goal_bias: 0.1,
            x_var: "x".into(),
            y_var: "y".into(),
            speed_var: "v".into(),
            cos_var: "c".into(),
            sin_var: "s".into(),
            angle_disturbance: "w_theta".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TreeNode {
    /// Mean pose at arrival; heading is `atan2(E[s], E[c])`.
    pub pose: Pose,
    pub state: MomentState<f64>,
    pub mean_cov: MeanCov<f64>,
    pub risk_to_node: f64,
    pub parent: Option<usize>,
    pub edge_controls: Vec<f64>,
}

/// Search result. `path` lists node indices from the root to the first node
/// whose mean reached the goal disc; `None` means no plan.
#[derive(Clone, Debug, PartialEq)]
pub struct Plan {
    pub nodes: Vec<TreeNode>,
    pub path: Option<Vec<usize>>,
    pub iterations: usize,
}

impl Plan {
    pub fn found(&self) -> bool {
        self.path.is_some()
    }

    /// Open-loop heading increments from the root along the path.
    pub fn controls(&self) -> Vec<f64> {
        self.path.iter().flatten().flat_map(|&i| self.nodes[i].edge_controls.iter().copied()).collect()
    }

    pub fn risk(&self) -> Option<f64> {
        self.path.as_ref().and_then(|p| p.last()).map(|&i| self.nodes[i].risk_to_node)
    }

    /// One row per path node: mean pose, position covariance and accumulated
    /// risk (clamped to 1 for display).
    pub fn write_path_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "node,parent,steps,x,y,heading,cov_xx,cov_xy,cov_yy,risk_to_node")?;
        for &i in self.path.iter().flatten() {
            let n = &self.nodes[i];
            let c = n.mean_cov.cov;
            writeln!(
                out,
                "{i},{},{},{},{},{},{},{},{},{}",
                n.parent.map_or(String::new(), |p| p.to_string()),
                n.edge_controls.len(),
                n.pose.x,
                n.pose.y,
                n.pose.theta,
                c[0][0],
                c[0][1],
                c[1][1],
                n.risk_to_node.min(1.0)
            )?;
        }
        Ok(())
    }

    pub fn write_controls_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "step,u_theta")?;
        for (k, u) in self.controls().iter().enumerate() {
            writeln!(out, "{k},{u}")?;
        }
        Ok(())
    }

    /// Edge list of the whole tree.
    pub fn write_tree_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "parent,child,x0,y0,x1,y1,risk_to_child")?;
        for (i, n) in self.nodes.iter().enumerate() {
            if let Some(p) = n.parent {
                let a = &self.nodes[p].pose;
                writeln!(out, "{p},{i},{},{},{},{},{}", a.x, a.y, n.pose.x, n.pose.y, n.risk_to_node.min(1.0))?;
            }
        }
        Ok(())
    }
}

/// Moment positions the planner reads from every state.
#[derive(Clone, Copy, Debug)]
struct Layout {
    x: usize,
    y: usize,
    v: usize,
    c: usize,
    s: usize,
}

impl Layout {
    fn new(prop: &Propagator<f64>, cfg: &PlannerConfig) -> Result<Self> {
        let sys = prop.system();
        let at = |n: &str| sys.moment_index(&[(n, 1)]);
        // mean_cov needs the second moments as well.
        for (a, b) in [(&cfg.x_var, &cfg.x_var), (&cfg.x_var, &cfg.y_var), (&cfg.y_var, &cfg.y_var)] {
            sys.moment_index(&[(a.as_str(), 1), (b.as_str(), 1)])?;
        }
        Ok(Layout {
            x: at(&cfg.x_var)?,
            y: at(&cfg.y_var)?,
            v: at(&cfg.speed_var)?,
            c: at(&cfg.cos_var)?,
            s: at(&cfg.sin_var)?,
        })
    }

    fn pose(&self, state: &MomentState<f64>) -> Pose {
        let v = &state.values;
        Pose::new(v[self.x], v[self.y], v[self.s].atan2(v[self.c]))
    }
}

/// Propagates `state` under `controls` added to the shift of `angle`.
pub fn stochastic_steer(
    prop: &Propagator<f64>,
    state: &MomentState<f64>,
    controls: &[f64],
    noise: &DisturbanceModel<f64>,
    angle: &str,
) -> Result<MomentTrajectory<f64>> {
    let k = noise.position(angle).ok_or_else(|| Error::MissingDisturbance(angle.to_string()))?;
    let shifts = controls.iter().enumerate().map(|(t, u)| Ok(noise.shift(k, t)? + u)).collect::<Result<Vec<_>>>()?;
    let mut model = noise.clone();
    model.set_shifts(angle, shifts)?;
    let init = MomentState { time: 0, values: state.values.clone() };
    prop.propagate(&init, &model, controls.len())
}

fn angle_diff(a: f64, b: f64) -> f64 {
    ((a - b + PI).rem_euclid(TAU) - PI).abs()
}

/// Builds the tree from `env.start` with speed `init_speed`, stopping at the
/// first node whose mean position lies in the goal disc.
pub fn build_rrt(
    env: &Environment,
    prop: &Propagator<f64>,
    noise: &DisturbanceModel<f64>,
    init_speed: f64,
    cfg: &PlannerConfig,
) -> Result<Plan> {
    if !(cfg.epsilon > 0.0 && cfg.epsilon < 1.0) {
        return Err(Error::InvalidArgument(format!("chance constraint must lie in (0, 1), got {}", cfg.epsilon)));
    }
    if !(cfg.max_edge > 0.0) || !(cfg.turn_radius > 0.0) || !(0.0..=1.0).contains(&cfg.goal_bias) {
        return Err(Error::InvalidArgument("max edge and turn radius must be positive, goal bias in [0, 1]".into()));
    }
    let layout = Layout::new(prop, cfg)?;
    let sys = prop.system();
    let mut x0 = vec![0.0; sys.vars.len()];
    let set = |x0: &mut [f64], name: &str, v: f64| -> Result<()> {
        let i = sys.var_index(name).ok_or_else(|| Error::InvalidArgument(format!("unknown variable `{name}`")))?;
        x0[i] = v;
        Ok(())
    };
    set(&mut x0, &cfg.x_var, env.start.x)?;
    set(&mut x0, &cfg.y_var, env.start.y)?;
    set(&mut x0, &cfg.speed_var, init_speed)?;
    set(&mut x0, &cfg.cos_var, env.start.theta.cos())?;
    set(&mut x0, &cfg.sin_var, env.start.theta.sin())?;
    let root_state = prop.init_deterministic(&x0)?;
    let root = TreeNode {
        pose: env.start,
        mean_cov: MeanCov { mean: [env.start.x, env.start.y], cov: [[0.0; 2]; 2] },
        state: root_state,
        risk_to_node: 0.0,
        parent: None,
        edge_controls: Vec::new(),
    };
    let mut nodes = vec![root];
    if env.in_goal([env.start.x, env.start.y]) {
        return Ok(Plan { nodes, path: Some(vec![0]), iterations: 0 });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let [bx0, bx1, by0, by1] = env.bounds;
    for iter in 0..cfg.iterations {
        let sample = if rng.random::<f64>() < cfg.goal_bias {
            Pose::new(env.goal[0], env.goal[1], rng.random_range(-PI..PI))
        } else {
            Pose::new(rng.random_range(bx0..=bx1), rng.random_range(by0..=by1), rng.random_range(-PI..PI))
        };
        let metric = |n: &TreeNode| n.pose.distance(&sample) + cfg.turn_radius * angle_diff(n.pose.theta, sample.theta);
        let near = (0..nodes.len())
            .min_by(|&a, &b| metric(&nodes[a]).total_cmp(&metric(&nodes[b])))
            .expect("tree holds the root");
        let from = nodes[near].pose;
        let d = from.distance(&sample);
        let target = if d > cfg.max_edge {
            // Truncated targets face along the direction of travel.
            let f = cfg.max_edge / d;
            let heading = (sample.y - from.y).atan2(sample.x - from.x);
            Pose::new(from.x + f * (sample.x - from.x), from.y + f * (sample.y - from.y), heading)
        } else {
            sample
        };
        let speed = nodes[near].state.values[layout.v];
        let Ok(steer) = dubins_steer_within(from, target, speed, cfg.turn_radius, env.bounds) else { continue };
        if steer.controls.is_empty() {
            continue;
        }
        let Ok(traj) = stochastic_steer(prop, &nodes[near].state, &steer.controls, noise, &cfg.angle_disturbance)
        else {
            continue;
        };
        let path = traj.mean_cov(&cfg.x_var, &cfg.y_var)?;
        let risk = nodes[near].risk_to_node + trajectory_risk(&path, env);
        if !(risk <= cfg.epsilon) {
            continue;
        }
        let mut state = traj.states.last().expect("nonempty trajectory").clone();
        state.time = 0;
        let node = TreeNode {
            pose: layout.pose(&state),
            mean_cov: *path.last().expect("nonempty trajectory"),
            state,
            risk_to_node: risk,
            parent: Some(near),
            edge_controls: steer.controls,
        };
        let reached = env.in_goal(node.mean_cov.mean);
        nodes.push(node);
        if reached {
            let mut route = vec![nodes.len() - 1];
            while let Some(p) = nodes[*route.last().unwrap()].parent {
                route.push(p);
            }
            route.reverse();
            return Ok(Plan { nodes, path: Some(route), iterations: iter + 1 });
        }
    }
    Ok(Plan { nodes, path: None, iterations: cfg.iterations })
}
