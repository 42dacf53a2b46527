use wavesrc_core::exec::Serial;
use wavesrc_core::expr::eta_prime;
use wavesrc_core::forward::{march_boundary_field, MarchConfig};
use wavesrc_core::oracle::radial_image_series;
use wavesrc_core::scenario::{point3, Scenario, SourceSpec};

fn ramp_scenario(dt: f64, horizon: f64) -> Scenario {
    let mut s = point3();
    s.name = "ramp".into();
    s.dt = dt;
    s.horizon = horizon;
    s.sources = vec![SourceSpec::point("0", "0", "0", "eta((t-1)/2)").unwrap()];
    s
}

/// Relative L² error over [0,T]×Γ and the largest error over the last 4 time units.
fn errors(dt: f64, horizon: f64) -> (f64, f64) {
    let scn = ramp_scenario(dt, horizon);
    scn.validate().unwrap();
    let grid = scn.grid.build().unwrap();
    let field = march_boundary_field(&scn, &grid, &MarchConfig::default(), &Serial).unwrap();
    let q_dot = |t: f64| eta_prime((t - 1.0) / 2.0) / 2.0;
    let w = grid.node_weights();
    let (mut num, mut den, mut tail) = (0.0, 0.0, 0.0f64);
    for l in 0..field.n_steps() {
        let t = l as f64 * dt;
        let exact = radial_image_series(q_dot, grid.radius(), scn.c, t);
        for (r, &v) in field.step(l).iter().enumerate() {
            num += w[r] * (v - exact).powi(2);
            den += w[r] * exact * exact;
            if t > horizon - 4.0 {
                tail = tail.max((v - exact).abs());
            }
        }
    }
    ((num / den).sqrt(), tail)
}

#[test]
fn marched_field_matches_image_series() {
    let (e1, t1) = errors(0.1, 70.0);
    let (e2, t2) = errors(0.05, 70.0);
    println!("dt=0.1: {e1:.3e} (tail {t1:.2e})  dt=0.05: {e2:.3e} (tail {t2:.2e})");
    assert!(e1 <= 1e-2);
    assert!(e2 < e1);
}

mod moments {
    use wavesrc_core::exec::Serial;
    use wavesrc_core::forward::{march_boundary_field, MarchConfig};
    use wavesrc_core::oracle::scenario_moment_f;
    use wavesrc_core::rgf::rgf_slice;
    use wavesrc_core::scenario::{dipole3, point3, Scenario};

    /// Worst |Rf[n] − F(f_n)| over n ≤ 9 and a few slices, relative to the
    /// largest exact moment of the slice.
    fn worst_moment_error(scn: &Scenario) -> f64 {
        let grid = scn.grid.build().unwrap();
        let field = march_boundary_field(scn, &grid, &MarchConfig::default(), &Serial).unwrap();
        let mut worst = 0.0f64;
        for tau in [6.0, 15.0, 30.0, 40.0, 50.0, 58.0] {
            let slice = rgf_slice(&field, tau, 9, 0.1).unwrap();
            let exact: Vec<_> = (0..=9).map(|n| scenario_moment_f(&scn.sources, tau, scn.c, n).unwrap()).collect();
            let scale = exact.iter().map(|v| v.norm()).fold(0.0, f64::max);
            for n in 0..=9 {
                worst = worst.max((slice.rf[n] - exact[n]).norm() / scale);
            }
        }
        worst
    }

    #[test]
    fn moments_of_marched_fields_match_ground_truth() {
        for scn in [point3(), dipole3()] {
            let e = worst_moment_error(&scn);
            println!("{}: {e:.3e}", scn.name);
            assert!(e <= 1e-2);
        }
    }

    #[test]
    fn moments_converge_when_grid_and_step_are_refined() {
        let coarse = dipole3();
        let mut fine = dipole3();
        fine.dt = 0.05;
        fine.grid.n_polar = 36;
        fine.grid.n_azimuth = 72;
        let (e1, e2) = (worst_moment_error(&coarse), worst_moment_error(&fine));
        println!("coarse {e1:.3e} fine {e2:.3e}");
        assert!(e2 < 0.5 * e1);
    }
}
