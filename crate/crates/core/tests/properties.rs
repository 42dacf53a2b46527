use proptest::prelude::*;
use wavesrc_core::expr::{BinOp, Expr, Func};
use wavesrc_core::grid::SphereGrid;
use wavesrc_core::inversion::{
    confluent_vandermonde, det_formula, hankel, reconstruct_frame, InversionConfig, RecoveredSource,
};
use wavesrc_core::oracle::{power_sums, synthetic_slice, AnalyticSource, ConfigSampler};
use wavesrc_core::pipeline::moment_order;
use wavesrc_core::scenario::SourceKind;
use wavesrc_core::C64;

fn expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        (0u32..1000).prop_map(|v| Expr::Num(v as f64 / 8.0)),
        Just(Expr::Time),
        Just(Expr::Pi),
    ];
    leaf.prop_recursive(4, 32, 2, |inner| {
        let op = prop_oneof![Just(BinOp::Add), Just(BinOp::Sub), Just(BinOp::Mul), Just(BinOp::Div)];
        let func = prop_oneof![Just(Func::Sin), Just(Func::Cos), Just(Func::Eta)];
        prop_oneof![
            inner.clone().prop_map(|e| Expr::Neg(Box::new(e))),
            (op, inner.clone(), inner.clone()).prop_map(|(o, a, b)| Expr::Binary(o, Box::new(a), Box::new(b))),
            (func, inner).prop_map(|(f, a)| Expr::Call(f, Box::new(a))),
        ]
    })
}

fn kind() -> impl Strategy<Value = SourceKind> {
    prop_oneof![Just(SourceKind::Point), Just(SourceKind::Dipole)]
}

fn cfg() -> InversionConfig {
    InversionConfig::new(1.0, 2.0, 4, 1e-4, 2.5e-2)
}

/// Thresholds near round-off, so counting never masks an algebra error.
fn exact_cfg() -> InversionConfig {
    InversionConfig::new(1.0, 2.0, 4, 1e-12, 1e-6)
}

/// Sources paired by nearest planar position; returns the largest mismatch
/// in position and strength.
fn frame_error(frame: &[RecoveredSource], srcs: &[AnalyticSource], tau: f64) -> (f64, f64) {
    let mut worst = (0.0f64, 0.0f64);
    for s in srcs {
        let t = s.truth(tau, 1.0).unwrap();
        let node = C64::new(t.position.x, t.position.y);
        let got = frame.iter().min_by(|a, b| (a.p_xy - node).norm().total_cmp(&(b.p_xy - node).norm())).unwrap();
        worst.0 = worst.0.max((got.position().unwrap() - t.position).norm());
        worst.1 = worst.1.max((got.strength.unwrap() - t.strength).norm());
    }
    worst
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn printed_expressions_parse_back(e in expr()) {
        let text = e.to_string();
        let back = Expr::parse(&text).unwrap();
        prop_assert_eq!(back.to_string(), text);
        for t in [0.0, 0.7, 3.1] {
            match (e.eval(t), back.eval(t)) {
                (Ok(a), Ok(b)) => prop_assert!(a == b || (a.is_nan() && b.is_nan())),
                (Err(_), Err(_)) => {}
                (a, b) => prop_assert!(false, "{a:?} vs {b:?}"),
            }
        }
    }

    #[test]
    fn grid_integrates_spherical_polynomials(j in 2usize..10, cx in -1.0f64..1.0, cy in -1.0f64..1.0, cz in -1.0f64..1.0) {
        // ∮ (a·r)² dS = 4πR⁴|a|²/3 needs degree 2 only.
        let r = 1.7;
        let g = SphereGrid::new(r, j, 2 * j).unwrap();
        let vals: Vec<f64> = g.points().iter().map(|p| (cx * p.x + cy * p.y + cz * p.z).powi(2)).collect();
        let exact = 4.0 * std::f64::consts::PI * r.powi(4) * (cx * cx + cy * cy + cz * cz) / 3.0;
        prop_assert!((g.surface_integral(&vals).unwrap() - exact).abs() <= 1e-12 * (1.0 + exact));
    }

    #[test]
    fn hankel_rank_collapses_above_source_count(seed in any::<u64>(), k in 1usize..=4) {
        let mut s = ConfigSampler::new(seed);
        let nodes = s.nodes(k, 0.3, 1.5).unwrap();
        let weights = s.weights(k, 0.1, 1.5);
        let m = power_sums(&weights, &nodes, 2 * k + 2);
        let scale = m.iter().map(|v| v.norm()).fold(1.0, f64::max).powi(k as i32 + 1);
        prop_assert!(hankel(&m, k + 1, 0).unwrap().det().unwrap().norm() <= 1e-10 * scale);
        prop_assert!(hankel(&m, k, 0).unwrap().det().unwrap().norm() > 0.0);
    }

    #[test]
    fn determinant_matches_closed_form(seed in any::<u64>(), k in 1usize..=5) {
        let nodes = ConfigSampler::new(seed).nodes(k, 0.3, 1.5).unwrap();
        let lu = confluent_vandermonde(&nodes).det().unwrap();
        let exact = det_formula(&nodes);
        prop_assert!((lu - exact).norm() <= 1e-10 * exact.norm());
    }

    #[test]
    fn synthetic_slices_are_inverted_exactly(seed in any::<u64>(), k in 1usize..=3, kind in kind(), tau in 5.0f64..60.0) {
        let srcs = ConfigSampler::new(seed).sources(kind, k, tau, 1.0, 0.3).unwrap();
        let slice = synthetic_slice(&srcs, kind, tau, 1.0, moment_order(kind, 4)).unwrap();
        let frame = reconstruct_frame(&slice, kind, &exact_cfg());
        prop_assert_eq!(frame.k_hat, k);
        let (dp, ds) = frame_error(&frame.sources, &srcs, tau);
        prop_assert!(dp <= 1e-8 && ds <= 1e-8, "{dp:e} {ds:e}");
    }

    #[test]
    fn common_strength_scale_leaves_locations(seed in any::<u64>(), k in 1usize..=3, kind in kind(), factor in 0.5f64..3.0) {
        let tau = 20.0;
        let srcs = ConfigSampler::new(seed).sources(kind, k, tau, 1.0, 0.3).unwrap();
        let scaled: Vec<AnalyticSource> = srcs
            .iter()
            .cloned()
            .map(|mut s| {
                for h in &mut s.strength {
                    h.offset *= factor;
                    h.amplitude *= factor;
                }
                s
            })
            .collect();
        let n = moment_order(kind, 4);
        let a = reconstruct_frame(&synthetic_slice(&srcs, kind, tau, 1.0, n).unwrap(), kind, &cfg());
        let b = reconstruct_frame(&synthetic_slice(&scaled, kind, tau, 1.0, n).unwrap(), kind, &cfg());
        prop_assert_eq!(a.k_hat, b.k_hat);
        for (x, y) in a.sources.iter().zip(&b.sources) {
            prop_assert!((x.p_xy - y.p_xy).norm() <= 1e-10);
            prop_assert!((x.p_z.unwrap() - y.p_z.unwrap()).abs() <= 1e-10);
        }
    }

    #[test]
    fn doppler_factor_matches_depth_rate(seed in any::<u64>(), kind in kind(), tau in 5.0f64..60.0) {
        // ξ = 1 − dz/c from the inversion against 1/(1 + ṗ_z(t)/c) from a
        // central difference of the emission time.
        let srcs = ConfigSampler::new(seed).sources(kind, 1, tau, 1.0, 0.3).unwrap();
        let frame = reconstruct_frame(&synthetic_slice(&srcs, kind, tau, 1.0, moment_order(kind, 4)).unwrap(), kind, &cfg());
        let h = 1e-3;
        let dt = (srcs[0].emission_time(tau + h, 1.0).unwrap() - srcs[0].emission_time(tau - h, 1.0).unwrap()) / (2.0 * h);
        prop_assert!((frame.sources[0].xi.unwrap() - dt).abs() <= 1e-5);
    }

    #[test]
    fn source_order_does_not_matter(seed in any::<u64>(), k in 2usize..=3, kind in kind()) {
        let tau = 30.0;
        let mut srcs = ConfigSampler::new(seed).sources(kind, k, tau, 1.0, 0.3).unwrap();
        let n = moment_order(kind, 4);
        let a = reconstruct_frame(&synthetic_slice(&srcs, kind, tau, 1.0, n).unwrap(), kind, &cfg());
        srcs.reverse();
        let b = reconstruct_frame(&synthetic_slice(&srcs, kind, tau, 1.0, n).unwrap(), kind, &cfg());
        prop_assert_eq!(a.k_hat, b.k_hat);
        for (x, y) in a.sources.iter().zip(&b.sources) {
            prop_assert!((x.p_xy - y.p_xy).norm() <= 1e-10);
            prop_assert!((x.strength.unwrap() - y.strength.unwrap()).norm() <= 1e-10);
        }
    }
}
