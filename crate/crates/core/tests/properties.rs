//! Randomized invariants across the library.

use nalgebra::{Matrix2, Vector3};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use timecoord::analysis::{certify_eigenvalues, CertifyOptions, ModeMatrix};
use timecoord::graph::{SpectralDecomposition, Topology, TopologyKind};
use timecoord::mission::{DesiredTrajectory, GammaBounds, PhysicalBounds};
use timecoord::mpc::{
    alpha_correction, cost_consensus, total_cost, AgentState, AlphaParams, CostVariant, MpcConfig, NeighborBundle,
    NeighborPlan, TrackingTerm, Weights,
};
use timecoord::sim::{run, Scenario};
use timecoord::solver::{condense, solve_local, solve_qp, GainPair};

fn random_edges(seed: u64, n: usize, p: f64, tree: bool) -> Vec<(usize, usize)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    if tree {
        for i in 1..n {
            edges.push((rng.random_range(0..i), i));
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            if rng.random_bool(p) {
                edges.push((i, j));
            }
        }
    }
    edges
}

fn connected(seed: u64, n: usize, p: f64) -> Topology {
    Topology::from_edges(n, random_edges(seed, n, p, true)).unwrap()
}

fn weights() -> impl Strategy<Value = Weights<f64>> {
    (0.05f64..20.0, 0.05f64..20.0, 0.05f64..20.0).prop_map(|(a, b, c)| Weights::new(a, b, c))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn spectrum_lies_between_zero_and_two(seed in any::<u64>(), n in 2usize..=15, p in 0.0f64..0.7) {
        let topo = connected(seed, n, p);
        let s = SpectralDecomposition::<f64>::new(&topo).unwrap();
        prop_assert!(s.eigenvalues[0].abs() <= 1e-10);
        prop_assert!(*s.eigenvalues.last().unwrap() <= 2.0 + 1e-9);
        prop_assert!(s.reconstruction_residual(&topo).unwrap() <= 1e-9);
    }

    #[test]
    fn relabeling_keeps_the_spectrum(seed in any::<u64>(), n in 2usize..=15, p in 0.0f64..0.7) {
        let topo = connected(seed, n, p);
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut ChaCha8Rng::seed_from_u64(seed ^ 0x5eed));
        let a = SpectralDecomposition::<f64>::new(&topo).unwrap();
        let b = SpectralDecomposition::<f64>::new(&topo.relabeled(&perm).unwrap()).unwrap();
        for (x, y) in a.eigenvalues.iter().zip(&b.eigenvalues) {
            prop_assert!((x - y).abs() <= 1e-10, "{x} vs {y}");
        }
    }

    #[test]
    fn trees_reach_the_bipartite_edge(seed in any::<u64>(), n in 2usize..=15) {
        // trees are bipartite
        let topo = Topology::from_edges(n, random_edges(seed, n, 0.0, true)).unwrap();
        let s = SpectralDecomposition::<f64>::new(&topo).unwrap();
        prop_assert!((s.eigenvalues[n - 1] - 2.0).abs() <= 1e-9);
    }

    #[test]
    fn connectivity_tests_agree(seed in any::<u64>(), n in 2usize..=12, p in 0.0f64..0.5) {
        let topo = Topology::from_edges(n, random_edges(seed, n, p, false)).unwrap();
        prop_assert_eq!(topo.is_connected(), SpectralDecomposition::<f64>::new(&topo).is_ok());
    }

    #[test]
    fn velocity_matches_finite_difference(
        radius in 0.5f64..20.0,
        omega in 0.01f64..1.0,
        phase in -3.0f64..3.0,
        gamma in 1.0f64..99.0,
        dx in -10.0f64..10.0,
        dy in -10.0f64..10.0,
    ) {
        let eps = 1e-6;
        let paths = [
            DesiredTrajectory::circle(Vector3::new(1.0, -2.0, 3.0), radius, omega, phase, 100.0).unwrap(),
            DesiredTrajectory::line(Vector3::zeros(), Vector3::new(dx, dy, 1.0), 100.0).unwrap(),
        ];
        for path in &paths {
            let fd = (path.eval(gamma + eps).position - path.eval(gamma - eps).position) / (2.0 * eps);
            prop_assert!((fd - path.eval(gamma).velocity).norm() <= 1e-5);
        }
    }

    #[test]
    fn derived_bounds_respect_physical_limits(
        v_d in 0.5f64..3.0,
        spread in 0.0f64..1.0,
        v_lo in 0.0f64..0.9,
        v_hi in 1.1f64..3.0,
        a_max in 0.1f64..10.0,
        a_d in 0.0f64..1.0,
    ) {
        let b = PhysicalBounds {
            v_min: v_lo * v_d,
            v_max: v_hi * (v_d + spread),
            a_max,
            v_d_min: v_d,
            v_d_max: v_d + spread,
            a_d_max: a_d,
        };
        if let Ok(g) = b.derive_gamma_bounds() {
            prop_assert!(g.respects(&b));
        }
    }

    #[test]
    fn coordination_costs_are_nonnegative(
        seed in any::<u64>(),
        k in 1usize..=6,
        neighbors in 1usize..=5,
        own_index in 0usize..6,
        separation in -4.0f64..4.0,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut seq = |len: usize| (0..len).map(|_| rng.random_range(-5.0..5.0)).collect::<Vec<f64>>();
        let controls = seq(k);
        let plans: Vec<NeighborPlan<f64>> = (0..neighbors)
            .map(|j| NeighborPlan { index: 6 + j, delta: seq(k + 1) })
            .collect();
        let bundle = NeighborBundle::new(plans);
        let state = AgentState::from_controls(0.3, -0.1, controls, 0.1, 4);
        let gb = GammaBounds::new(0.5, 1.5, 1.0).unwrap();
        let mut cfg = MpcConfig::consensus(Weights::new(1.0, 1.0, 1.0), k, 0.1, gb);
        prop_assert!(total_cost(&state, own_index, &bundle, &cfg, 0.4) >= 0.0);
        cfg.cost = CostVariant::OrderedSeparation { separation, gamma_start: 0.0, gamma_end: 10.0 };
        prop_assert!(total_cost(&state, own_index, &bundle, &cfg, 0.4) >= 0.0);
    }

    #[test]
    fn correction_is_linear_in_gain_and_odd_in_error(
        ex in -5.0f64..5.0, ey in -5.0f64..5.0, ez in -5.0f64..5.0,
        vx in -3.0f64..3.0, vy in -3.0f64..3.0,
        beta in 0.0f64..4.0,
    ) {
        let reference = Vector3::new(1.0, 2.0, 3.0);
        let vel = Vector3::new(vx, vy, 0.5);
        let e = Vector3::new(ex, ey, ez);
        let unit = AlphaParams { beta: 1.0, regularizer: 1e-6 };
        let scaled = AlphaParams { beta, regularizer: 1e-6 };
        let a = alpha_correction(&reference, &vel, &(reference - e), &unit);
        let b = alpha_correction(&reference, &vel, &(reference + e), &unit);
        let c = alpha_correction(&reference, &vel, &(reference - e), &scaled);
        prop_assert!((a + b).abs() <= 1e-12 * (1.0 + a.abs()));
        prop_assert!((c - beta * a).abs() <= 1e-12 * (1.0 + c.abs()));
    }

    #[test]
    fn consensus_cost_ignores_neighbor_order(seed in any::<u64>(), k in 1usize..=5, neighbors in 1usize..=5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let own: Vec<f64> = (0..=k).map(|_| rng.random_range(-2.0..2.0)).collect();
        let mut seqs: Vec<Vec<f64>> = (0..neighbors)
            .map(|_| (0..=k).map(|_| rng.random_range(-2.0..2.0)).collect())
            .collect();
        let before = cost_consensus(&own, &NeighborBundle::from_sequences(seqs.clone()));
        seqs.shuffle(&mut rng);
        let after = cost_consensus(&own, &NeighborBundle::from_sequences(seqs));
        prop_assert!((before - after).abs() <= 1e-12 * (1.0 + before));
        prop_assert!(before > 0.0);
        // agreement on every predicted slot; slot 0 may differ
        let mut same: Vec<Vec<f64>> = vec![own.clone(); neighbors];
        for s in &mut same {
            s[0] += 1.0;
        }
        prop_assert_eq!(cost_consensus(&own, &NeighborBundle::from_sequences(same)), 0.0);
    }
}

/// Random constrained local problem: `(config, delta0, rate0, terms)`.
fn local_problem() -> impl Strategy<Value = (MpcConfig<f64>, f64, f64, Vec<TrackingTerm<f64>>)> {
    (
        1usize..=8,
        weights(),
        0.02f64..0.4,
        0.2f64..0.95,
        1.05f64..2.0,
        0.05f64..3.0,
        any::<u64>(),
    )
        .prop_map(|(k, w, h, lo, hi, acc, seed)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let cfg = MpcConfig::consensus(w, k, h, GammaBounds::new(lo, hi, acc).unwrap());
            let rate0 = rng.random_range(lo - 1.0..hi - 1.0);
            let delta0 = rng.random_range(-4.0..4.0);
            let terms = (0..k)
                .map(|_| TrackingTerm {
                    weight: rng.random_range(0.1..2.0),
                    target: rng.random_range(-4.0..4.0),
                })
                .collect();
            (cfg, delta0, rate0, terms)
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn solution_ignores_uniform_weight_scaling((cfg, d0, r0, terms) in local_problem(), c in 0.01f64..100.0) {
        let a = solve_qp(&condense(&cfg, d0, r0, &terms).unwrap(), &cfg.solver).unwrap();
        let mut scaled = cfg.clone();
        scaled.weights = cfg.weights.scaled(c);
        let b = solve_qp(&condense(&scaled, d0, r0, &terms).unwrap(), &scaled.solver).unwrap();
        prop_assert!((&a.u - &b.u).amax() <= 1e-8, "{} vs {}", a.u, b.u);
    }

    #[test]
    fn tighter_input_box_never_lowers_the_cost((cfg, d0, r0, terms) in local_problem(), shrink in 0.05f64..1.0) {
        let loose = solve_qp(&condense(&cfg, d0, r0, &terms).unwrap(), &cfg.solver).unwrap();
        let mut tight = cfg.clone();
        tight.gamma_bounds.accel_max *= shrink;
        let qp = condense(&tight, d0, r0, &terms).unwrap();
        let sol = solve_qp(&qp, &tight.solver).unwrap();
        prop_assert!(sol.objective >= loose.objective - 1e-9 * (1.0 + loose.objective.abs()));
        prop_assert!(sol.max_violation <= 1e-9);
    }

    #[test]
    fn local_plans_satisfy_the_recursion(
        (cfg, d0, r0, _terms) in local_problem(),
        seed in any::<u64>(),
        neighbors in 1usize..=4,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let k = cfg.horizon;
        let seqs = (0..neighbors)
            .map(|_| (0..=k).map(|_| rng.random_range(-4.0..4.0)).collect())
            .collect();
        let sol = solve_local(&cfg, 0, d0, r0, &NeighborBundle::from_sequences(seqs), 1.0, &[], 3).unwrap();
        prop_assert!(sol.state.recursion_residual(cfg.step) <= 1e-12);
        let (lo, hi) = (cfg.rate_min(), cfg.rate_max());
        prop_assert!(sol.state.rate.iter().skip(1).all(|&r| r >= lo - 1e-9 && r <= hi + 1e-9));
        prop_assert!(sol.state.control.iter().all(|u| u.abs() <= cfg.gamma_bounds.accel_max + 1e-9));
    }

    #[test]
    fn printed_determinant_matches_matrix(w in weights(), h in 1e-3f64..2.0, lambda in 0.0f64..2.0) {
        let g = GainPair::new(&w, h).unwrap();
        let m = ModeMatrix::new(&g, h, lambda);
        let q = m.q;
        let det = q[(0, 0)] * q[(1, 1)] - q[(0, 1)] * q[(1, 0)];
        prop_assert!((ModeMatrix::det_formula(&g, h, lambda) - det).abs() <= 1e-14 * det.abs().max(1.0));
        prop_assert!((ModeMatrix::trace_formula(&g, h, lambda) - q.trace()).abs() <= 1e-14 * q.trace().abs().max(1.0));
    }

    #[test]
    fn zero_mode_splits_into_projections(w in weights(), h in 0.01f64..1.0) {
        let g = GainPair::new(&w, h).unwrap();
        let cert = certify_eigenvalues(&[0.0, 1.0], &g, h, 0.5, &CertifyOptions::default()).unwrap();
        let z = cert.zero_mode;
        prop_assert!((z.p + z.f - Matrix2::identity()).amax() <= 1e-12);
        prop_assert!((z.p * z.p - z.p).amax() <= 1e-9);
        prop_assert_eq!(z.p[(1, 0)], 0.0);
        prop_assert_eq!(z.p[(1, 1)], 0.0);
        prop_assert!((z.q - (1.0 - h * g.b)).abs() <= 1e-15);
        prop_assert_eq!(z.q, ModeMatrix::new(&g, h, 0.0).q[(1, 1)]);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn traces_respect_bounds_and_envelope(
        seed in any::<u64>(),
        n in 2usize..=6,
        k in 1usize..=5,
        v_min in 0.0f64..0.9,
        a_max in 0.2f64..3.0,
        d in 0.0f64..0.5,
        nu in 0.1f64..2.0,
        drop in 0.0f64..0.3,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = 0.1;
        let gamma: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..4.0)).collect();
        let paths: Vec<_> = (0..n)
            .map(|i| json!({"kind": "line", "start": [0.0, i as f64, 0.0], "end": [100.0, i as f64, 0.0], "duration": 100.0}))
            .collect();
        let value = json!({
            "schema": 1,
            "n_agents": n,
            "topology": {"kind": "ring"},
            "trajectories": paths,
            "bounds": {"v_min": v_min, "v_max": 1.6, "a_max": a_max, "v_d_min": 1.0, "v_d_max": 1.0, "a_d_max": 0.0},
            "mpc": {"weights": [2.0, 1.0, 1.0], "horizon": k, "step": h},
            "initial": {"gamma": gamma},
            "duration": 20.0,
            "disturbance": {"kind": "synthetic", "d": d, "nu": nu},
            "link_drop_probability": drop,
            "seed": seed,
        });
        let sc = Scenario::from_value(value.clone()).unwrap();
        let cfg = sc.mpc_config().unwrap();
        let trace = run(&sc).unwrap();
        for r in trace.rows.iter().filter(|r| r.step > 0) {
            prop_assert!(r.rate1 >= cfg.rate_min() - 1e-9 && r.rate1 <= cfg.rate_max() + 1e-9);
            prop_assert!(r.control0.abs() <= cfg.gamma_bounds.accel_max + 1e-9);
            prop_assert!(r.alpha.abs() <= d * (-nu * r.step as f64 * h).exp());
        }
        // the correction may step the measured γ back; without it γ only advances
        let mut calm = value;
        calm["disturbance"] = json!({"kind": "none"});
        let calm = run(&Scenario::from_value(calm).unwrap()).unwrap();
        for i in 0..n {
            let g = calm.agent_series(i, |r| r.gamma);
            prop_assert!(g.windows(2).all(|w| w[1] >= w[0] - 1e-12));
        }
    }
}

#[test]
fn even_rings_and_paths_are_bipartite() {
    for n in 2..=15 {
        let mut kinds = vec![TopologyKind::Path];
        if n % 2 == 0 && n > 2 {
            kinds.push(TopologyKind::Ring);
        }
        for kind in kinds {
            let s = SpectralDecomposition::<f64>::new(&Topology::build(n, &kind).unwrap()).unwrap();
            assert!((s.eigenvalues[n - 1] - 2.0).abs() <= 1e-9, "{kind:?} n={n}");
        }
    }
}
