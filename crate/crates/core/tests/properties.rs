#![allow(clippy::needless_range_loop)]

mod common;

use proptest::prelude::*;

use common::{balanced_graph, random_psd, TestRng};
use sgml::baseline::project_pd;
use sgml::data::{load_libsvm, normalize, split_folds, write_libsvm, Dataset};
use sgml::graph::{check_balance, graph_from_laplacian, laplacian_from_graph, Balance, Color, SignedGraph};
use sgml::lp::{solve, solve_diagonal_budget, LinearProgram, Relation};
use sgml::objectives::{mahalanobis, Objective, ObjectiveKind};
use sgml::spectral::{gdpa_scalars, gershgorin, jacobi_eigen, scaled_gershgorin, EigenPair, GdpaScalars};
use sgml::synthetic::gaussian_two_class;
use sgml::MetricMatrix;

fn symmetric(k: usize) -> impl Strategy<Value = MetricMatrix> {
    prop::collection::vec(-5.0f64..5.0, k * k).prop_map(move |v| MetricMatrix::symmetrized(k, &v))
}

fn any_symmetric() -> impl Strategy<Value = MetricMatrix> {
    (1usize..10).prop_flat_map(symmetric)
}

fn signed_graph() -> impl Strategy<Value = SignedGraph> {
    (1usize..9).prop_flat_map(|k| {
        let pairs = k * (k - 1) / 2;
        (
            prop::collection::vec(prop_oneof![Just(0.0), -3.0f64..3.0], pairs),
            prop::collection::vec(-2.0f64..2.0, k),
        )
            .prop_map(move |(w, loops)| {
                let mut edges = Vec::new();
                let mut t = 0;
                for i in 0..k {
                    for j in (i + 1)..k {
                        edges.push((i, j, w[t]));
                        t += 1;
                    }
                }
                SignedGraph::new(k, edges, loops).unwrap()
            })
    })
}

/// Sum of `tr(A^p)` for `p = 1..=k`, which fixes the spectrum.
fn power_traces(a: &[Vec<f64>]) -> Vec<f64> {
    let k = a.len();
    let mut p = a.to_vec();
    let mut out = Vec::new();
    for _ in 0..k {
        out.push((0..k).map(|i| p[i][i]).sum());
        p = (0..k)
            .map(|i| (0..k).map(|j| (0..k).map(|t| p[i][t] * a[t][j]).sum()).collect())
            .collect();
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn laplacian_round_trip(g in signed_graph()) {
        let back = graph_from_laplacian(&laplacian_from_graph(&g));
        prop_assert_eq!(back.edges(), g.edges());
        let k = g.node_count();
        for i in 0..k {
            prop_assert!((back.self_loops()[i] - g.self_loops()[i]).abs() <= 1e-12 * (1.0 + g.self_loops()[i].abs()) * k as f64);
        }
    }

    #[test]
    fn laplacian_row_sums_are_self_loops(g in signed_graph()) {
        let m = laplacian_from_graph(&g);
        for i in 0..g.node_count() {
            let sum: f64 = m.row(i).iter().sum();
            prop_assert!((sum - g.self_loops()[i]).abs() <= 1e-9);
        }
    }

    #[test]
    fn coloring_agrees_with_edge_signs(g in signed_graph()) {
        if let Balance::Balanced(c) = check_balance(&g) {
            for &(i, j, w) in g.edges() {
                prop_assert_eq!(w > 0.0, c.color(i) == c.color(j));
            }
        }
    }

    #[test]
    fn gershgorin_bound_is_sound(m in any_symmetric()) {
        let lower = gershgorin(&m).lower_bound;
        prop_assert!(lower <= jacobi_eigen(&m).min() + 1e-9);
    }

    #[test]
    fn disc_alignment_on_balanced_graphs(seed in any::<u64>(), k in 2usize..24) {
        let mut rng = TestRng::new(seed);
        let (g, coloring) = balanced_graph(&mut rng, k);
        let m = laplacian_from_graph(&g);
        let pair = jacobi_eigen(&m).smallest();
        if let Ok(s) = gdpa_scalars(&m, &coloring, &pair) {
            let tol = 1e-8 * pair.value.abs().max(1.0);
            for l in scaled_gershgorin(&m, &s).left_ends() {
                prop_assert!((l - pair.value).abs() <= tol);
            }
            // blue entries share one sign, red entries the other
            let positive = |i: usize| pair.vector[i] > 0.0;
            let blue = |i: usize| coloring.color(i) == Color::Blue;
            for i in 1..k {
                prop_assert_eq!(positive(i) == positive(0), blue(i) == blue(0));
            }
        }
    }

    #[test]
    fn similarity_transform_keeps_spectrum(m in (1usize..8).prop_flat_map(symmetric), s in prop::collection::vec(0.2f64..3.0, 8)) {
        let k = m.dim();
        let b: Vec<Vec<f64>> = (0..k)
            .map(|i| (0..k).map(|j| s[i] * m.get(i, j) / s[j]).collect())
            .collect();
        let bt = power_traces(&b);
        let mt = power_traces(&m.to_rows());
        for (x, y) in bt.iter().zip(&mt) {
            prop_assert!((x - y).abs() <= 1e-8 * (1.0 + y.abs()));
        }
    }

    #[test]
    fn alignment_ignores_vector_scale(seed in any::<u64>(), k in 2usize..16, c in prop_oneof![-10.0f64..-0.1, 0.1f64..10.0]) {
        let mut rng = TestRng::new(seed);
        let (g, coloring) = balanced_graph(&mut rng, k);
        let m = laplacian_from_graph(&g);
        let pair = jacobi_eigen(&m).smallest();
        let scaled = EigenPair { value: pair.value, vector: pair.vector.iter().map(|v| c * v).collect() };
        if let (Ok(a), Ok(b)) = (gdpa_scalars(&m, &coloring, &pair), gdpa_scalars(&m, &coloring, &scaled)) {
            let la = scaled_gershgorin(&m, &a).left_ends();
            let lb = scaled_gershgorin(&m, &b).left_ends();
            for (x, y) in la.iter().zip(&lb) {
                prop_assert!((x - y).abs() <= 1e-10 * (1.0 + x.abs()));
            }
        }
    }

    #[test]
    fn projection_is_nearest_psd(seed in any::<u64>(), k in 1usize..7) {
        let mut rng = TestRng::new(seed);
        let m = MetricMatrix::symmetrized(k, &(0..k * k).map(|_| rng.uniform(-3.0, 3.0)).collect::<Vec<_>>());
        let p = project_pd(&m, 0.0);
        prop_assert!(jacobi_eigen(&p).min() >= -1e-10);
        let d = m.frobenius_distance(&p);
        for _ in 0..100 {
            let x = random_psd(&mut rng, k);
            prop_assert!(d <= m.frobenius_distance(&x) + 1e-10);
        }
    }

    #[test]
    fn budget_lp_matches_simplex(grad in prop::collection::vec(-2.0f64..2.0, 1..10), slack in 0.0f64..4.0, seed in any::<u64>()) {
        let mut rng = TestRng::new(seed);
        let floors: Vec<f64> = grad.iter().map(|_| rng.uniform(-1.0, 1.0)).collect();
        let budget = floors.iter().sum::<f64>() + slack;
        let x = solve_diagonal_budget(&grad, &floors, budget).unwrap();
        let n = grad.len();
        let mut lp = LinearProgram::new(grad.clone()).with_bounds(floors.iter().map(|&f| (f, f64::INFINITY)).collect());
        lp.push((0..n).map(|j| (j, 1.0)).collect(), Relation::Le, budget);
        let sol = solve(&lp).unwrap();
        let value: f64 = grad.iter().zip(&x).map(|(g, v)| g * v).sum();
        prop_assert!((value - sol.objective_value).abs() <= 1e-10 * value.abs().max(1.0));
        prop_assert_eq!(solve(&lp).unwrap(), sol);
    }

    #[test]
    fn folds_partition_samples(n in 1usize..300, t in 1usize..20, seed in any::<u64>()) {
        let t = t.min(n);
        let plan = split_folds(n, t, seed).unwrap();
        let mut seen = vec![0usize; n];
        for f in 0..t {
            for i in plan.fold(f) {
                seen[i] += 1;
            }
        }
        prop_assert!(seen.iter().all(|&c| c == 1));
        let sizes = plan.sizes();
        prop_assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
    }

    #[test]
    fn libsvm_round_trip(rows in prop::collection::vec(prop::collection::vec(-1e6f64..1e6, 3), 1..20)) {
        let labels = (0..rows.len()).map(|i| if i % 2 == 0 { 1 } else { -1 }).collect();
        let data = Dataset::new("rt", rows.clone(), labels).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.libsvm");
        write_libsvm(&data, &path).unwrap();
        let back = load_libsvm(&path).unwrap();
        prop_assert_eq!(back.features(), data.features());
        prop_assert_eq!(back.labels(), data.labels());
    }

    #[test]
    fn normalize_is_idempotent(seed in any::<u64>(), n in 5usize..40, k in 1usize..6) {
        let once = normalize(&gaussian_two_class(n, k, 1.0, seed)).unwrap();
        for row in once.features() {
            let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
            prop_assert!(norm == 0.0 || (norm - 1.0).abs() <= 1e-10);
        }
        let twice = normalize(&once).unwrap();
        for (a, b) in once.features().iter().zip(twice.features()) {
            for (x, y) in a.iter().zip(b) {
                prop_assert!((x - y).abs() <= 1e-10);
            }
        }
    }

    #[test]
    fn distances_bounded_by_trace(seed in any::<u64>(), n in 4usize..20, k in 1usize..6, c in 0.5f64..10.0) {
        let data = normalize(&gaussian_two_class(n, k, 1.0, seed)).unwrap();
        let mut rng = TestRng::new(seed);
        let mut m = random_psd(&mut rng, k);
        let tr = m.trace();
        m.scale(c / tr);
        for i in 0..n {
            for j in 0..n {
                prop_assert!(mahalanobis(&m, data.sample(i), data.sample(j)).unwrap() <= 4.0 * c + 1e-9);
            }
        }
    }

    #[test]
    fn convex_objectives(seed in any::<u64>(), alpha in 0.0f64..1.0) {
        let mut rng = TestRng::new(seed);
        let k = rng.int(2, 5);
        let data = normalize(&gaussian_two_class(rng.int(8, 16), k, 1.0, seed)).unwrap();
        let m1 = random_psd(&mut rng, k);
        let m2 = random_psd(&mut rng, k);
        let mix = MetricMatrix::zeros(k).add_scaled(alpha, &m1).add_scaled(1.0 - alpha, &m2);
        for kind in ObjectiveKind::ALL {
            if kind == ObjectiveKind::Lsml {
                continue;
            }
            let obj = Objective::new(kind, &data, seed).unwrap();
            let lhs = obj.loss(&mix);
            let rhs = alpha * obj.loss(&m1) + (1.0 - alpha) * obj.loss(&m2);
            prop_assert!(lhs <= rhs + 1e-9 * rhs.abs().max(1.0), "{} {lhs} > {rhs}", kind.name());
        }
    }

    #[test]
    fn loss_ignores_sample_order(seed in any::<u64>()) {
        let mut rng = TestRng::new(seed);
        let k = rng.int(2, 4);
        let n = rng.int(8, 16);
        let data = normalize(&gaussian_two_class(n, k, 1.0, seed)).unwrap();
        let mut order: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            order.swap(i, rng.int(0, i));
        }
        let shuffled = data.subset(&order);
        let m = random_psd(&mut rng, k);
        for kind in [ObjectiveKind::Mcml, ObjectiveKind::Deml, ObjectiveKind::Glr] {
            let a = Objective::new(kind, &data, 0).unwrap().loss(&m);
            let b = Objective::new(kind, &shuffled, 0).unwrap().loss(&m);
            prop_assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0));
        }
    }
}

#[test]
fn scalars_reject_zero_entries() {
    assert!(GdpaScalars::new(vec![1.0, 0.0]).is_err());
}
