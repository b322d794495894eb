//! Chance-constrained RRT with Dubins steering.

pub mod dubins;
pub mod geometry;
pub mod risk;
pub mod rrt;

pub use dubins::{dubins_shortest, dubins_steer, dubins_steer_within, simulate_controls, DubinsPath, Segment, Steer};
pub use geometry::{Environment, Polytope, Pose};
pub use risk::{cantelli_bound, halfspace_moments, obstacle_risk, sigma_margin_condition, trajectory_risk};
pub use rrt::{build_rrt, stochastic_steer, Plan, PlannerConfig, TreeNode};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compiler::{CompileOptions, MomentStateSystem};
    use crate::distmoments::{Distribution, DisturbanceModel};
    use crate::presets;
    use crate::propagator::{MeanCov, Propagator};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    fn wrap(a: f64) -> f64 {
        (a + PI).rem_euclid(2.0 * PI) - PI
    }

    #[test]
    fn cantelli_examples() {
        assert_eq!(cantelli_bound(1.0, 1.0).unwrap(), 0.5);
        assert!(close(cantelli_bound(3.0, 1.0).unwrap(), 0.1, 1e-15));
        assert_eq!(cantelli_bound(-0.5, 7.0).unwrap(), 1.0);
        assert_eq!(cantelli_bound(0.0, 0.0).unwrap(), 0.0);
        assert!(cantelli_bound(1.0, -1e-3).is_err());
    }

    #[test]
    fn unit_square_obstacle() {
        let obs = Polytope::rectangle(1.0, 1.0, 2.0, 2.0).unwrap();
        assert_eq!(obs.halfspaces.len(), 4);
        let cov = [[1e-4, 0.0], [0.0, 1e-4]];
        let r = obstacle_risk([0.0, 0.0], cov, &obs);
        assert!(close(r, 1e-4 / (1e-4 + 1.0), 1e-18));
        assert_eq!(obstacle_risk([1.5, 1.5], cov, &obs), 1.0);
        assert_eq!(obstacle_risk([0.0, 0.0], [[0.0; 2]; 2], &obs), 0.0);
        assert!(obs.contains([1.5, 1.2]));
        assert!(!obs.contains([2.5, 1.2]));
    }

    #[test]
    fn polytope_rejects_bad_winding() {
        assert!(Polytope::from_ccw_vertices(&[[0.0, 0.0], [0.0, 1.0], [1.0, 1.0], [1.0, 0.0]]).is_err());
        assert!(Polytope::from_ccw_vertices(&[[0.0, 0.0], [1.0, 0.0]]).is_err());
        assert!(Polytope::from_ccw_vertices(&[[0.0, 0.0], [2.0, 0.0], [1.0, 0.2], [2.0, 2.0], [0.0, 2.0]]).is_err());
    }

    #[test]
    fn trajectory_risk_sums_steps_and_obstacles() {
        let env = Environment::new([0.0, 10.0, 0.0, 10.0], vec![], Pose::new(1.0, 1.0, 0.0), [9.0, 9.0], 1.0).unwrap();
        let mc = MeanCov { mean: [0.0, 0.0], cov: [[1.0, 0.0], [0.0, 1.0]] };
        assert_eq!(trajectory_risk(&[mc, mc, mc], &env), 0.0);

        // Single face x ≥ 1; steps 1 and 2 give bounds 0.01 and 0.02.
        let obs = Polytope { halfspaces: vec![([-1.0, 0.0], 1.0)], vertices: vec![] };
        let env = Environment { obstacles: vec![obs], ..env };
        let step = |m: f64, r: f64| MeanCov { mean: [1.0 - m, 0.0], cov: [[r * m * m / (1.0 - r), 0.0], [0.0, 0.0]] };
        let total = trajectory_risk(&[step(5.0, 0.5), step(3.0, 0.01), step(2.0, 0.02)], &env);
        assert!(close(total, 0.03, 1e-12), "{total}");
    }

    #[test]
    fn bound_matches_sigma_margin_decision() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10_000 {
            let mean = [rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0)];
            let l = [rng.random_range(0.0..2.0), rng.random_range(-1.0..1.0), rng.random_range(0.0..2.0)];
            let cov = [[l[0] * l[0], l[0] * l[1]], [l[0] * l[1], l[1] * l[1] + l[2] * l[2]]];
            let phi: f64 = rng.random_range(-PI..PI);
            let a = [phi.cos(), phi.sin()];
            let b = rng.random_range(-5.0..5.0);
            let eps = rng.random_range(0.001..0.5);
            let (m, v) = halfspace_moments(mean, cov, a, b);
            if m < 0.0 {
                continue;
            }
            let ours = cantelli_bound(m, v).unwrap() <= eps;
            // Decisions may differ only from roundoff at the boundary.
            let edge = (m * m * eps - v * (1.0 - eps)).abs() <= 1e-9 * (m * m + v);
            assert!(edge || ours == sigma_margin_condition(mean, cov, a, b, eps));
        }
    }

    #[test]
    fn dubins_paths_reach_their_targets() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..500 {
            let from =
                Pose::new(rng.random_range(-20.0..20.0), rng.random_range(-20.0..20.0), rng.random_range(-PI..PI));
            let to = Pose::new(rng.random_range(-20.0..20.0), rng.random_range(-20.0..20.0), rng.random_range(-PI..PI));
            let path = dubins_shortest(from, to, 3.0).unwrap();
            let end = path.sample(path.length());
            assert!(close(end.x, to.x, 1e-8) && close(end.y, to.y, 1e-8), "{} {end:?} {to:?}", path.word());
            assert!(close(wrap(end.theta - to.theta), 0.0, 1e-8));
        }
    }

    #[test]
    fn dubins_picks_the_shortest_word() {
        // A point straight ahead with the same heading is a pure straight.
        let p = dubins_shortest(Pose::new(0.0, 0.0, 0.0), Pose::new(7.0, 0.0, 0.0), 2.0).unwrap();
        assert!(close(p.length(), 7.0, 1e-12));
        assert_eq!(p.segments[1], (Segment::Straight, 7.0));
        // Reversing in place needs at least a half turn.
        let q = dubins_shortest(Pose::new(0.0, 0.0, 0.0), Pose::new(0.0, 0.0, PI), 1.0).unwrap();
        assert!(q.length() > PI - 1e-9);
    }

    #[test]
    fn steering_examples() {
        let a = Pose::new(1.0, 2.0, 0.3);
        assert!(dubins_steer(a, a, 1.0, 5.0).unwrap().controls.is_empty());

        let to = Pose::new(1.0 + 10.3 * 0.3f64.cos(), 2.0 + 10.3 * 0.3f64.sin(), 0.3);
        let s = dubins_steer(a, to, 1.0, 5.0).unwrap();
        assert_eq!(s.controls.len(), 11);
        assert!(s.controls.iter().all(|&u| u.abs() < 1e-12));

        let r = 5.0;
        let v = 0.01;
        let s = dubins_steer(Pose::new(0.0, 0.0, 0.0), Pose::new(r, r, FRAC_PI_2), v, r).unwrap();
        let path = s.path.as_ref().unwrap();
        assert!(path.word().contains('L'));
        assert!(close(path.length(), FRAC_PI_2 * r, 1e-9));
        let n = s.controls.len();
        assert_eq!(n, (FRAC_PI_2 * r / v).ceil() as usize);
        for &u in &s.controls[..n - 1] {
            assert!(close(u, v / r, 1e-12));
        }
        assert!(s.controls.iter().all(|&u| u.abs() <= v / r + 1e-12));
        let end = s.poses.last().unwrap();
        assert!(close(end.x, r, 0.05) && close(end.y, r, 0.05), "{end:?}");
        assert!(close(wrap(end.theta - FRAC_PI_2), 0.0, 0.05));
    }

    #[test]
    fn steering_reaches_random_targets_at_small_speed() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let v = 0.01;
        for _ in 0..30 {
            let from = Pose::new(0.0, 0.0, rng.random_range(-PI..PI));
            let to = Pose::new(rng.random_range(-10.0..10.0), rng.random_range(-10.0..10.0), rng.random_range(-PI..PI));
            let s = dubins_steer(from, to, v, 2.0).unwrap();
            let end = s.poses.last().unwrap();
            assert!(end.distance(&to) <= 0.05, "{end:?} {to:?}");
            assert!(wrap(end.theta - to.theta).abs() <= 0.05);
            assert!(s.controls.iter().all(|&u| u.abs() <= v / 2.0 + 1e-12));
        }
    }

    #[test]
    fn steering_fails_outside_workspace() {
        let r =
            dubins_steer_within(Pose::new(1.0, 1.0, PI), Pose::new(5.0, 1.0, 0.0), 0.5, 2.0, [0.0, 10.0, 0.0, 10.0]);
        assert!(matches!(r, Err(crate::Error::Steering(_))));
    }

    fn quiet_setup() -> (Propagator<f64>, DisturbanceModel<f64>) {
        let sys = presets::dubins_system().unwrap();
        let compiled = MomentStateSystem::compile(&sys, &CompileOptions::default()).unwrap();
        let model = DisturbanceModel::stationary([
            ("w_v".to_string(), Distribution::Degenerate(0.0)),
            ("w_theta".to_string(), Distribution::Degenerate(0.0)),
        ]);
        (Propagator::new(compiled).unwrap(), model)
    }

    #[test]
    fn stochastic_steer_without_noise_follows_the_car() {
        let (prop, model) = quiet_setup();
        let start = prop.init_deterministic(&[0.0, 0.0, 0.5, 1.0, 0.0]).unwrap();
        let traj = stochastic_steer(&prop, &start, &[0.0; 4], &model, "w_theta").unwrap();
        assert_eq!(traj.series(&[("x", 1)]).unwrap(), [0.0, 0.5, 1.0, 1.5, 2.0]);
        assert_eq!(traj.series(&[("x", 2)]).unwrap()[4], 4.0);

        let s = dubins_steer(Pose::new(0.0, 0.0, 0.0), Pose::new(4.0, 4.0, FRAC_PI_2), 0.5, 4.0).unwrap();
        let traj = stochastic_steer(&prop, &start, &s.controls, &model, "w_theta").unwrap();
        let end = s.poses.last().unwrap();
        let last = traj.last();
        let sys = prop.system();
        let get = |f: &[(&str, u32)]| last.values[sys.moment_index(f).unwrap()];
        assert!(close(get(&[("x", 1)]), end.x, 1e-9));
        assert!(close(get(&[("y", 1)]), end.y, 1e-9));
        assert!(close(get(&[("x", 1), ("y", 1)]), end.x * end.y, 1e-9));
        assert!(close(get(&[("c", 1)]), end.theta.cos(), 1e-12));
        assert!(close(get(&[("s", 1)]), end.theta.sin(), 1e-12));
    }

    fn open_env(obstacles: Vec<Polytope>) -> Environment {
        Environment::new([0.0, 60.0, 0.0, 60.0], obstacles, Pose::new(5.0, 5.0, 0.0), [50.0, 50.0], 4.0).unwrap()
    }

    fn noisy_model() -> DisturbanceModel<f64> {
        DisturbanceModel::stationary([
            ("w_v".to_string(), Distribution::gaussian(0.0, 1e-8).unwrap()),
            ("w_theta".to_string(), Distribution::gaussian(0.0, 1e-8).unwrap()),
        ])
    }

    #[test]
    fn obstacle_free_plan_respects_bound() {
        let (prop, _) = quiet_setup();
        let env = open_env(vec![]);
        let cfg = PlannerConfig { seed: 7, ..PlannerConfig::default() };
        let plan = build_rrt(&env, &prop, &noisy_model(), 1.0, &cfg).unwrap();
        assert!(plan.found());
        assert!(plan.risk().unwrap() <= 0.1);
        let last = &plan.nodes[*plan.path.as_ref().unwrap().last().unwrap()];
        assert!(env.in_goal(last.mean_cov.mean));
        let again = build_rrt(&env, &prop, &noisy_model(), 1.0, &cfg).unwrap();
        assert_eq!(plan, again);
    }

    #[test]
    fn planned_nodes_stay_within_bound_and_risk_grows() {
        let (prop, _) = quiet_setup();
        let env = open_env(vec![
            Polytope::rectangle(20.0, 0.0, 28.0, 35.0).unwrap(),
            Polytope::from_ccw_vertices(&[[35.0, 40.0], [45.0, 30.0], [50.0, 40.0]]).unwrap(),
        ]);
        let cfg = PlannerConfig { seed: 1, ..PlannerConfig::default() };
        let plan = build_rrt(&env, &prop, &noisy_model(), 1.0, &cfg).unwrap();
        assert!(plan.found());
        assert_eq!(plan.nodes[0].risk_to_node, 0.0);
        for n in &plan.nodes {
            assert!(n.risk_to_node <= 0.1);
            if let Some(p) = n.parent {
                assert!(n.risk_to_node >= plan.nodes[p].risk_to_node);
            }
        }
    }

    #[test]
    fn tiny_epsilon_gives_no_plan() {
        let (prop, _) = quiet_setup();
        // Start hugging a wall: every first step already carries risk.
        let wall = Polytope::rectangle(0.0, 6.0, 60.0, 8.0).unwrap();
        let env =
            Environment::new([0.0, 60.0, 0.0, 60.0], vec![wall], Pose::new(5.0, 5.0, 0.0), [50.0, 50.0], 4.0).unwrap();
        let cfg = PlannerConfig { epsilon: 1e-12, iterations: 200, ..PlannerConfig::default() };
        let plan = build_rrt(&env, &prop, &noisy_model(), 1.0, &cfg).unwrap();
        assert!(!plan.found());
        assert_eq!(plan.nodes.len(), 1);
        assert!(build_rrt(&env, &prop, &noisy_model(), 1.0, &PlannerConfig { epsilon: 1.0, ..cfg }).is_err());
    }

    #[test]
    fn environment_file_round_trip() {
        let text = "# demo\nbounds 0 100 0 100\nstart 5 5 0\ngoal 90 90 5\nobstacle 30,20 45,20 45,60 30,60\n";
        let env = Environment::parse(text).unwrap();
        assert_eq!(env.obstacles.len(), 1);
        assert!(env.in_collision([40.0, 30.0]));
        assert!(env.in_goal([92.0, 91.0]));
        assert!(Environment::parse("bounds 0 1 0 1\nstart 0.5 0.5 0\n").is_err());
        let err = Environment::parse("bounds 0 10 0 10\nstart 1 1 0\ngoal 9 9 1\nwall 1\n").unwrap_err();
        assert!(matches!(err, crate::Error::Parse { line: 4, .. }));
        assert!(Environment::parse("bounds 0 10 0 10\nstart 5 5 0\ngoal 9 9 1\nobstacle 4,4 6,4 6,6 4,6\n").is_err());
    }
}
