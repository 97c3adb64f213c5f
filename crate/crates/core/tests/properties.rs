mod common;

use common::*;
use diffscat::experiments::{
    gen_sbm, gen_small_world, gft, perturb_edge_drop, source_signal, trial_rng,
};
use diffscat::nalgebra::{DMatrix, DVector};
use diffscat::scattering::{per_order_distance, spectral_norm};
use diffscat::wavelets::wavelet_response;
use diffscat::*;
use proptest::prelude::*;
use rand::Rng;

fn graph_strategy(max_n: usize) -> impl Strategy<Value = Graph> {
    (2..=max_n, 0.0..0.8f64, any::<u64>()).prop_map(|(n, p, seed)| random_connected(n, p, seed))
}

fn check_graph_invariants(g: &Graph) {
    let w = g.weights();
    for i in 0..g.n() {
        for j in 0..g.n() {
            assert_eq!(w[(i, j)], w[(j, i)]);
            assert!(w[(i, j)] >= 0.0);
        }
    }
    assert!(g.degrees().iter().all(|&d| d > 0.0));
}

fn project_out(x: &DVector<f64>, v: &DVector<f64>) -> DVector<f64> {
    x - v * v.dot(x)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn lazy_spectrum_in_unit_interval(g in graph_strategy(30)) {
        let op = lazy_diffusion(&g).unwrap();
        for &l in op.eigenvalues().iter() {
            prop_assert!((-1e-10..=1.0 + 1e-10).contains(&l));
        }
        prop_assert!((op.eigenvalues()[0] - 1.0).abs() < 1e-10);
        let v = op.sqrt_degree();
        prop_assert!((v.norm() - 1.0).abs() < 1e-12);
        prop_assert!((op.matrix() * v - v).amax() < 1e-10);
        let ev = op.eigenvectors();
        let gram = ev.transpose() * ev;
        prop_assert!((gram - DMatrix::identity(g.n(), g.n())).amax() < 1e-9);
    }

    #[test]
    fn permuted_graph_conjugates_operator(g in graph_strategy(20), seed in any::<u64>()) {
        let n = g.n();
        let p = Permutation::new(random_permutation(n, seed)).unwrap();
        let gp = permute_graph(&g, &p).unwrap();
        let t = lazy_diffusion(&g).unwrap();
        let tp = lazy_diffusion(&gp).unwrap();
        for i in 0..n {
            for j in 0..n {
                prop_assert!((tp.matrix()[(p.apply(i), p.apply(j))] - t.matrix()[(i, j)]).abs() < 1e-12);
            }
        }
        prop_assert!((t.beta() - tp.beta()).abs() < 1e-10);
    }

    #[test]
    fn operator_norm_matches_power_iteration(seed in any::<u64>()) {
        let mut rng = trial_rng(seed, &[]);
        let mut m = DMatrix::from_fn(10, 10, |_, _| rng.random_range(-1.0..1.0));
        m = &m + m.transpose();
        let norm = operator_norm_sym(&m).unwrap();
        // power iteration on M² converges to the top |eigenvalue|²
        let m2 = &m * &m;
        let mut x = DVector::from_fn(10, |i, _| 1.0 + i as f64 * 0.01);
        let mut est = 0.0;
        for _ in 0..5000 {
            let y = &m2 * &x;
            est = y.norm() / x.norm();
            x = y.normalize();
        }
        prop_assert!((norm - est.sqrt()).abs() < 1e-6, "{} vs {}", norm, est.sqrt());
        let jac = sym_norm(&to_mat(&m));
        prop_assert!((norm - jac).abs() < 1e-9);
    }

    #[test]
    fn frame_inequality(g in graph_strategy(50), seed in any::<u64>()) {
        let op = lazy_diffusion(&g).unwrap();
        let beta = op.beta();
        prop_assume!(beta < 1.0 - 1e-8);
        let scales = if beta > 0.0 { max_scale(beta).unwrap() } else { 1 };
        let bank = build_bank(&op, scales).unwrap();
        let report = frame_bounds(&op, scales).unwrap();
        prop_assert!(report.lower_analytic <= report.lower_empirical + 1e-12);
        prop_assert!(report.lower_empirical <= report.upper_empirical);
        prop_assert!(report.upper_empirical <= 1.0 + 1e-10);
        let x = project_out(&random_signal(g.n(), seed), op.sqrt_degree());
        let energy: f64 = apply_bank(&bank, &x).unwrap().iter().map(|y| y.norm_squared()).sum();
        let e = x.norm_squared();
        prop_assert!(report.lower_empirical * e - 1e-9 <= energy);
        prop_assert!(energy <= e + 1e-9);
    }

    #[test]
    fn wavelets_match_spectral_calculus(g in graph_strategy(25), seed in any::<u64>(), scales in 1usize..6) {
        let op = lazy_diffusion(&g).unwrap();
        let bank = build_bank(&op, scales).unwrap();
        let x = random_signal(g.n(), seed);
        let coeffs = op.eigenvectors().transpose() * &x;
        for (j, y) in apply_bank(&bank, &x).unwrap().iter().enumerate() {
            let spectral: f64 = op
                .eigenvalues()
                .iter()
                .zip(coeffs.iter())
                .map(|(&l, &c)| (wavelet_response(j, l) * c).powi(2))
                .sum();
            prop_assert!((y.norm_squared() - spectral).abs() < 1e-8);
            prop_assert!((bank.matrix(j) * op.sqrt_degree()).amax() < 1e-9);
            let psi = bank.matrix(j);
            prop_assert!((psi - psi.transpose()).amax() == 0.0 || (psi - psi.transpose()).amax() < 1e-14);
        }
    }

    #[test]
    fn frame_polynomial_recurrence(x in 0.0..0.999f64) {
        let scales = 40;
        let lhs = frame_polynomial(x * x, scales);
        let rhs = frame_polynomial(x, scales);
        prop_assert!(lhs >= rhs - 1e-12);
        prop_assert!((lhs - rhs - 2.0 * x * (1.0 - x).powi(2)).abs() < 1e-9);
    }

    #[test]
    fn wavelets_are_permutation_equivariant(g in graph_strategy(20), seed in any::<u64>()) {
        let n = g.n();
        let p = Permutation::new(random_permutation(n, seed)).unwrap();
        let op = lazy_diffusion(&g).unwrap();
        let opp = lazy_diffusion(&permute_graph(&g, &p).unwrap()).unwrap();
        let x = random_signal(n, seed);
        let px = p.permute_vector(&x).unwrap();
        let a = apply_bank(&build_bank(&op, 4).unwrap(), &x).unwrap();
        let b = apply_bank(&build_bank(&opp, 4).unwrap(), &px).unwrap();
        for (ya, yb) in a.iter().zip(&b) {
            prop_assert!((p.permute_vector(ya).unwrap() - yb).amax() < 1e-10);
        }
    }

    #[test]
    fn scattering_is_permutation_invariant(g in graph_strategy(30), seed in any::<u64>(), layers in 1usize..5) {
        let n = g.n();
        let p = Permutation::new(random_permutation(n, seed)).unwrap();
        let op = lazy_diffusion(&g).unwrap();
        let opp = lazy_diffusion(&permute_graph(&g, &p).unwrap()).unwrap();
        let cfg = ScatteringConfig::new(layers, 3).unwrap();
        let x = random_signal(n, seed);
        let a = scatter(&op, &build_bank(&op, 3).unwrap(), &x, cfg).unwrap();
        let b = scatter(&opp, &build_bank(&opp, 3).unwrap(), &p.permute_vector(&x).unwrap(), cfg).unwrap();
        prop_assert!(representation_distance(&a, &b).unwrap() < 1e-9);
    }

    #[test]
    fn scattering_is_non_expansive(g in graph_strategy(30), seed in any::<u64>(), layers in 1usize..5, scales in 1usize..5) {
        let op = lazy_diffusion(&g).unwrap();
        let bank = build_bank(&op, scales).unwrap();
        let cfg = ScatteringConfig::new(layers, scales).unwrap();
        let x = random_signal(g.n(), seed);
        let c = scatter(&op, &bank, &x, cfg).unwrap();
        prop_assert_eq!(c.len(), cfg.feature_len());
        prop_assert!(scattering_norm(&c) <= (layers as f64).sqrt() * x.norm() + 1e-9);
        for (_, v) in c.paths() {
            prop_assert!(v.abs() <= x.norm() + 1e-9);
        }
        // each order is bounded by ‖x‖
        let zero = scatter(&op, &bank, &DVector::zeros(g.n()), cfg).unwrap();
        for d in per_order_distance(&c, &zero).unwrap() {
            prop_assert!(d <= x.norm() + 1e-9);
        }
        // energy does not grow along a path
        let y = x.map(f64::abs);
        let energy: f64 = apply_bank(&bank, &y).unwrap().iter().map(|z| z.norm_squared()).sum();
        prop_assert!(energy.sqrt() <= y.norm() + 1e-9);
        let again = scatter(&op, &bank, &x, cfg).unwrap();
        prop_assert_eq!(c.flattened(), again.flattened());
    }

    #[test]
    fn gnn_is_positively_homogeneous(g in graph_strategy(15), seed in any::<u64>()) {
        let mut rng = trial_rng(seed, &[7]);
        let dims = [2usize, 3, 2];
        let layers: Vec<GnnLayer> = dims
            .windows(2)
            .map(|w| GnnLayer {
                theta1: DMatrix::from_fn(w[0], w[1], |_, _| rng.random_range(-1.0..1.0)),
                theta2: DMatrix::from_fn(w[0], w[1], |_, _| rng.random_range(-1.0..1.0)),
            })
            .collect();
        let params = GnnParams::new(layers).unwrap();
        let op = lazy_diffusion(&g).unwrap();
        let x = DMatrix::from_fn(g.n(), 2, |_, _| rng.random_range(-1.0..1.0));
        let y = gnn_forward(&op, &x, &params).unwrap();
        let y2 = gnn_forward(&op, &x, &params.scaled(2.0)).unwrap();
        let scale = 2f64.powi(params.depth() as i32);
        prop_assert!((y2 - &y * scale).norm() <= 1e-8 * (1.0 + y.norm() * scale));
        for (a, b) in params.theta_norms().iter().zip(params.layers()) {
            prop_assert!((a.0 - spectral_norm(&b.theta1)).abs() < 1e-12);
        }
    }

    #[test]
    fn power_difference_holds(seed in any::<u64>(), r in 1u32..20) {
        let mut rng = trial_rng(seed, &[3]);
        let mut sym = |scale: f64| {
            let m = DMatrix::from_fn(5, 5, |_, _| rng.random_range(-1.0..1.0));
            let m = &m + m.transpose();
            let norm = operator_norm_sym(&m).unwrap();
            m * (scale / norm)
        };
        let a = sym(0.9);
        let b = sym(0.6);
        let (lhs, rhs) = power_difference_check(&a, &b, r).unwrap();
        prop_assert!(lhs <= rhs + 1e-9);
    }

    #[test]
    fn gft_is_isometry(g in graph_strategy(40), seed in any::<u64>()) {
        let op = lazy_diffusion(&g).unwrap();
        let x = random_signal(g.n(), seed);
        prop_assert!((gft(&op, &x).unwrap().norm() - x.norm()).abs() < 1e-10);
    }

    #[test]
    fn source_signals_are_nonnegative(g in graph_strategy(25), t in 1usize..30, i in 0usize..25) {
        let i = i % g.n();
        let x = source_signal(&g, i, t).unwrap();
        prop_assert!(x.iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn generators_emit_valid_graphs(seed in any::<u64>(), n in 10usize..40, p in 0.1..1.0f64, q in 0.0..1.0f64) {
        let mut rng = trial_rng(seed, &[]);
        let g = gen_small_world(n, p, q, &mut rng).unwrap();
        check_graph_invariants(&g);
        prop_assert!(g.is_connected());
        let s = gen_sbm(n, 3, 0.7, 0.2, &mut rng).unwrap();
        check_graph_invariants(&s.graph);
        let mut sorted = s.labels.clone();
        sorted.sort();
        prop_assert_eq!(s.labels.len(), n);
        prop_assert!(sorted.iter().all(|&l| l < 3));
        let d = perturb_edge_drop(&s.graph, 0.2, &mut rng).unwrap();
        check_graph_invariants(&d);
        prop_assert!(d.edge_count() <= s.graph.edge_count());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn exact_distance_identities(g in graph_strategy(7), seed in any::<u64>()) {
        let p = Permutation::new(random_permutation(g.n(), seed)).unwrap();
        let gp = permute_graph(&g, &p).unwrap();
        let same = diffusion_distance(&g, &g, 0.5, DistanceMode::Exact).unwrap();
        prop_assert!(same.value.abs() < 1e-10);
        let perm = diffusion_distance(&g, &gp, 0.5, DistanceMode::Exact).unwrap();
        prop_assert!(perm.value.abs() < 1e-10);
        let aligned = permute_graph(&gp, &perm.permutation.inverse()).unwrap();
        let ta = lazy_diffusion(&aligned).unwrap();
        let t = lazy_diffusion(&g).unwrap();
        prop_assert!((ta.matrix() - t.matrix()).amax() < 1e-10);
    }

    #[test]
    fn distance_modes_are_ordered_and_symmetric(a in graph_strategy(7), seed in any::<u64>(), s2 in 1u32..4) {
        let b = random_connected(a.n(), 0.4, seed);
        let s = s2 as f64 / 2.0;
        let exact = diffusion_distance(&a, &b, s, DistanceMode::Exact).unwrap().value;
        let heur = diffusion_distance(&a, &b, s, DistanceMode::Heuristic).unwrap().value;
        let id = diffusion_distance(&a, &b, s, DistanceMode::Identity).unwrap().value;
        prop_assert!(exact <= heur + 1e-12);
        prop_assert!(heur <= id + 1e-12);
        let back = diffusion_distance(&b, &a, s, DistanceMode::Exact).unwrap().value;
        prop_assert!((exact - back).abs() < 1e-10);

        // brute force over all permutations with the Jacobi oracle
        let r = s2 as usize;
        let pow = |g: &Graph| {
            let t = lazy(&to_mat(g.weights()));
            let mut out = identity(g.n());
            for _ in 0..r {
                out = matmul(&out, &t);
            }
            out
        };
        let (ma, mb) = (pow(&a), pow(&b));
        let n = a.n();
        let best = all_permutations(n)
            .iter()
            .map(|p| {
                let al: Mat = (0..n).map(|i| (0..n).map(|j| mb[p[i]][p[j]]).collect()).collect();
                sym_norm(&sub(&ma, &al))
            })
            .fold(f64::INFINITY, f64::min);
        prop_assert!((exact - best).abs() < 1e-9);
    }

    #[test]
    fn gromov_hausdorff_identities(g in graph_strategy(6), seed in any::<u64>()) {
        let p = Permutation::new(random_permutation(g.n(), seed)).unwrap();
        let gp = permute_graph(&g, &p).unwrap();
        prop_assert!(gromov_hausdorff(&g, &g, 0.5).unwrap().abs() < 1e-12);
        prop_assert!(gromov_hausdorff(&g, &gp, 0.5).unwrap().abs() < 1e-10);
    }
}

#[test]
fn gromov_hausdorff_versus_diffusion_distance() {
    // ratios are recorded for inspection only
    let mut ratios = Vec::new();
    for seed in 0..20 {
        let a = random_connected(5, 0.4, seed);
        let b = random_connected(5, 0.4, seed + 1000);
        let gh = gromov_hausdorff(&a, &b, 0.5).unwrap();
        let d = diffusion_distance(&a, &b, 0.5, DistanceMode::Exact)
            .unwrap()
            .value;
        assert!(gh.is_finite() && d > 0.0);
        ratios.push(gh / d);
    }
    let max = ratios.iter().cloned().fold(0.0, f64::max);
    println!("max d_GH / d over 20 pairs: {max:.4}");
}
