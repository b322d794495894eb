//! Ground truth and baselines: Monte Carlo rollouts of the original system,
//! a linearized mean/covariance recursion, and a comparison report.

pub mod linear;
pub mod mc;
pub mod report;

pub use linear::{linear_propagate, linearize, linearize_at_initial, Gaussian, LinearModel};
pub use mc::{mc_simulate, McConfig, McEstimate, Simulator};
pub use report::{compare, linear_table, McTable, MomentTable, Report, ReportRow};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compiler::{CompileOptions, MomentStateSystem};
    use crate::distmoments::{Distribution, DisturbanceModel};
    use crate::polyring::MultiIndex;
    use crate::presets;
    use crate::propagator::Propagator;
    use crate::sysspec::{parse_spec, trig_encode};
    use nalgebra::{DMatrix, DVector};

    #[test]
    fn degenerate_mc_has_zero_spread() {
        let sys = presets::dubins_system().unwrap();
        let model = DisturbanceModel::stationary([
            ("w_v".to_string(), Distribution::Degenerate(0.02)),
            ("w_theta".to_string(), Distribution::Degenerate(0.1)),
        ]);
        let compiled = MomentStateSystem::compile(&sys, &CompileOptions::default()).unwrap();
        let p: Propagator<f64> = Propagator::new(compiled.clone()).unwrap();
        let x0 = [0.0, 0.0, 1.0, 0.0];
        let traj = p.propagate(&p.init_deterministic(&sys.encode_state(&x0).unwrap()).unwrap(), &model, 30).unwrap();
        let est = mc_simulate(&sys.spec, &model, &x0, compiled.basis.as_slice(), &McConfig::new(30, 5000, 1)).unwrap();
        for t in 0..=30 {
            for k in 0..est.names.len() {
                assert_eq!(est.se(t, k), 0.0);
                let v = traj.states[t].values[k];
                assert!((est.mean[t][k] - v).abs() <= 1e-9 * v.abs().max(1.0));
            }
        }
        let report = compare(&MomentTable::from_trajectory(&traj), &McTable::from_estimate(&est), None).unwrap();
        // Roundoff between the trig and encoded paths can leave a nonzero diff
        // against a zero standard error.
        assert!(report.rows.iter().all(|r| r.z_exact == 0.0 || (r.exact - r.mc_mean).abs() < 1e-9));
    }

    #[test]
    fn random_walk_second_moment() {
        let spec = parse_spec("state x\ndisturbance w\ndyn x' = x + w\n").unwrap();
        let model = DisturbanceModel::stationary([("w".to_string(), Distribution::gaussian(0.0, 1.0).unwrap())]);
        let est =
            mc_simulate(&spec, &model, &[0.5], &[MultiIndex::new(vec![2])], &McConfig::new(1, 200_000, 9)).unwrap();
        let z = report::z_score(1.25, est.mean[1][0], est.se(1, 0));
        assert!(z.abs() < 5.0, "{z}");
    }

    #[test]
    fn mc_is_reproducible_and_thread_independent() {
        let spec = presets::dubins_spec().unwrap();
        let model = DisturbanceModel::from_spec(&spec).unwrap();
        let moments = [MultiIndex::new(vec![1, 0, 0, 0, 0]), MultiIndex::new(vec![0, 2, 0, 0, 0])];
        let cfg = McConfig { steps: 20, samples: 10_000, seed: 42, batch_size: 1000 };
        let a = mc_simulate(&spec, &model, &[0.0, 0.0, 1.0, 0.0], &moments, &cfg).unwrap();
        let b = mc_simulate(&spec, &model, &[0.0, 0.0, 1.0, 0.0], &moments, &cfg).unwrap();
        assert_eq!(a, b);
        let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
        let c = pool.install(|| mc_simulate(&spec, &model, &[0.0, 0.0, 1.0, 0.0], &moments, &cfg).unwrap());
        assert_eq!(a, c);
        let d = mc_simulate(&spec, &model, &[0.0, 0.0, 1.0, 0.0], &moments, &McConfig { seed: 43, ..cfg }).unwrap();
        assert_ne!(a, d);
    }

    #[test]
    fn linearize_linear_system() {
        let spec = parse_spec("state x y\ndisturbance w\ndyn x' = 2*x - y + w\ndyn y' = 0.5*x + 3*w\n").unwrap();
        let lin = linearize(&spec, &[0.3, -0.2], &[0.1], 1.0).unwrap();
        let phi = DMatrix::identity(2, 2) + &lin.a;
        assert_eq!(phi, DMatrix::from_row_slice(2, 2, &[2.0, -1.0, 0.5, 0.0]));
        assert_eq!(lin.b, DMatrix::from_row_slice(2, 1, &[1.0, 3.0]));
        assert!(lin.c.norm() < 1e-15);
    }

    #[test]
    fn linearize_dubins_heading_column() {
        let spec = presets::dubins_spec().unwrap();
        let lin = linearize(&spec, &[0.0, 0.0, 1.0, 0.0], &[0.0, 0.0], 0.5).unwrap();
        // ∂x'/∂θ = -v sin θ = 0, ∂y'/∂θ = v cos θ = 1, scaled by dt.
        assert_eq!(lin.a[(0, 3)], 0.0);
        assert_eq!(lin.a[(1, 3)], 0.5);
        assert_eq!(lin.b[(3, 1)], 0.5);
    }

    #[test]
    fn jacobians_match_finite_differences() {
        let spec = presets::dubins_spec().unwrap();
        let x = [0.4, -1.2, 0.9, 0.7];
        let w = [0.01, 0.2];
        let (jx, jw, f) = linear::jacobians(&spec, &x, &w).unwrap();
        let h = 1e-6;
        let eval = |x: &[f64], w: &[f64]| linear::jacobians(&spec, x, w).unwrap().2;
        for j in 0..4 {
            let (mut xp, mut xm) = (x, x);
            xp[j] += h;
            xm[j] -= h;
            let d = (eval(&xp, &w) - eval(&xm, &w)) / (2.0 * h);
            for i in 0..4 {
                assert!((d[i] - jx[(i, j)]).abs() < 1e-6);
            }
        }
        for j in 0..2 {
            let (mut wp, mut wm) = (w, w);
            wp[j] += h;
            wm[j] -= h;
            let d = (eval(&x, &wp) - eval(&x, &wm)) / (2.0 * h);
            for i in 0..4 {
                assert!((d[i] - jw[(i, j)]).abs() < 1e-6);
            }
        }
        assert_eq!(f.len(), 4);
    }

    #[test]
    fn linear_propagate_random_walk() {
        let spec = parse_spec("state x y\ndisturbance u w\ndyn x' = x + u\ndyn y' = y + w\n").unwrap();
        let model = DisturbanceModel::stationary([
            ("u".to_string(), Distribution::gaussian(0.0, 0.5).unwrap()),
            ("w".to_string(), Distribution::gaussian(1.0, 2.0).unwrap()),
        ]);
        let lin = linearize(&spec, &[0.0, 0.0], &[0.0, 1.0], 1.0).unwrap();
        assert_eq!(lin.a, DMatrix::zeros(2, 2));
        let out = linear_propagate(&lin, &DVector::zeros(2), &DMatrix::zeros(2, 2), &spec, &model, 3).unwrap();
        assert_eq!(out[3].cov, DMatrix::from_row_slice(2, 2, &[1.5, 0.0, 0.0, 6.0]));
        assert_eq!(out[3].mean, DVector::from_vec(vec![0.0, 3.0]));

        let quiet = DisturbanceModel::stationary([
            ("u".to_string(), Distribution::Degenerate(0.0)),
            ("w".to_string(), Distribution::Degenerate(0.0)),
        ]);
        let s0 = DMatrix::from_row_slice(2, 2, &[1.0, 0.2, 0.2, 0.5]);
        let out = linear_propagate(&lin, &DVector::zeros(2), &s0, &spec, &quiet, 5).unwrap();
        assert_eq!(out[5].cov, s0);
    }

    #[test]
    fn linear_table_maps_encoded_moments() {
        let sys = trig_encode(&presets::dubins_spec().unwrap()).unwrap();
        let g = Gaussian {
            mean: DVector::from_vec(vec![1.0, 2.0, 1.0, 0.3]),
            cov: DMatrix::from_diagonal(&DVector::from_vec(vec![0.5, 0.25, 0.0, 0.01])),
        };
        let moments = sys.parse_moments("x x*y y^2 c x*c").unwrap();
        let table = linear_table(&sys.spec, &[g], &moments);
        assert_eq!(table.names, ["x", "x*y", "y^2", "c", "x*c"]);
        let row = &table.values[0];
        assert_eq!(row[0], 1.0);
        assert_eq!(row[1], 2.0);
        assert_eq!(row[2], 4.25);
        assert!((row[3] - 0.3f64.cos() * (-0.005f64).exp()).abs() < 1e-15);
        assert!(row[4].is_nan());
    }

    #[test]
    fn compare_flags_and_horizon_mismatch() {
        let exact = MomentTable { names: vec!["x".into()], times: vec![0, 1], values: vec![vec![0.0], vec![1.0]] };
        let mc = McTable {
            mean: MomentTable { names: vec!["x".into()], times: vec![0, 1], values: vec![vec![0.0], vec![0.9]] },
            se: MomentTable { names: vec!["x".into()], times: vec![0, 1], values: vec![vec![0.0], vec![0.01]] },
        };
        let report = compare(&exact, &mc, Some(&exact)).unwrap();
        assert_eq!(report.rows[0].z_exact, 0.0);
        assert!((report.rows[1].z_exact - 10.0).abs() < 1e-9);
        assert_eq!(report.flagged_exact().len(), 1);
        let short = MomentTable { names: vec!["x".into()], times: vec![0], values: vec![vec![0.0]] };
        assert!(matches!(compare(&short, &mc, None), Err(crate::Error::HorizonMismatch(_))));

        let mut buf = Vec::new();
        report.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("t,moment,exact,mc_mean,mc_se,linearized,z_exact,z_linearized\n0,x,0,0,0,0,0,0\n"));
    }

    #[test]
    fn tables_round_trip_through_csv() {
        let spec = presets::dubins_spec().unwrap();
        let model = DisturbanceModel::from_spec(&spec).unwrap();
        let moments = [MultiIndex::new(vec![1, 0, 0, 0, 0]), MultiIndex::new(vec![0, 0, 0, 1, 1])];
        let est = mc_simulate(&spec, &model, &[0.0, 0.0, 1.0, 0.0], &moments, &McConfig::new(3, 100, 5)).unwrap();
        let mut buf = Vec::new();
        est.write_csv(&mut buf).unwrap();
        let table = McTable::parse_csv(&String::from_utf8(buf).unwrap()).unwrap();
        assert_eq!(table, McTable::from_estimate(&est));
        assert_eq!(table.mean.names, ["x", "c*s"]);
    }
}
