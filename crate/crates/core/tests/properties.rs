use proptest::prelude::*;

use online_coresets::io::{read_coreset, write_coreset_file};
use online_coresets::linalg::{sym_power, DEFAULT_LIFT_BUDGET};
use online_coresets::lvm::min_cost_assignment;
use online_coresets::sampler::{rate_for_expected_size, CoresetEntry, OnlineSampler, SamplerConfig, SamplerMode};
use online_coresets::stream::{ErrorSchedule, MergeReduceTree, WeightedPoint};

fn rows(max_n: usize, d: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(-100.0..100.0f64, d), 1..max_n)
}

fn brute_assignment(cost: &[Vec<f64>]) -> f64 {
    fn go(cost: &[Vec<f64>], i: usize, used: &mut Vec<bool>) -> f64 {
        if i == cost.len() {
            return 0.0;
        }
        let mut best = f64::INFINITY;
        for j in 0..used.len() {
            if !used[j] {
                used[j] = true;
                best = best.min(cost[i][j] + go(cost, i + 1, used));
                used[j] = false;
            }
        }
        best
    }
    go(cost, 0, &mut vec![false; cost[0].len()])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sym_lift_preserves_powers_of_inner_products(
        x in prop::collection::vec(-3.0..3.0f64, 1..6),
        seed in prop::collection::vec(-3.0..3.0f64, 6),
        k in 1u32..4,
    ) {
        let y = &seed[..x.len()];
        let lx = sym_power(&x, k, DEFAULT_LIFT_BUDGET).unwrap();
        let ly = sym_power(y, k, DEFAULT_LIFT_BUDGET).unwrap();
        let got: f64 = lx.iter().zip(&ly).map(|(a, b)| a * b).sum();
        let xy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
        let nx: f64 = x.iter().map(|a| a * a).sum::<f64>().sqrt();
        let ny: f64 = y.iter().map(|a| a * a).sum::<f64>().sqrt();
        prop_assert!((got - xy.powi(k as i32)).abs() <= 1e-12 * (nx * ny).powi(k as i32) + 1e-300);
    }

    #[test]
    fn online_probabilities_and_weights_are_consistent(data in rows(40, 3), p in 2u32..5, r in 0.1..20.0f64) {
        let mut s = OnlineSampler::new(3, p, r, 11);
        let mut seen_nonzero = false;
        for a in &data {
            let score = s.score(a).unwrap();
            prop_assert!((0.0..=1.0).contains(&score.sensitivity));
            let nonzero = a.iter().any(|v| *v != 0.0);
            prop_assert_eq!(score.forced, nonzero && !seen_nonzero);
            seen_nonzero |= nonzero;
            let prob = score.probability(r);
            prop_assert!((0.0..=1.0).contains(&prob));
            if let Some(e) = s.decide(a, &score) {
                prop_assert!(e.probability > 0.0);
                prop_assert!((e.weight * e.probability - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn expected_size_solve_hits_target(
        coef in prop::collection::vec(1e-4..10.0f64, 1..60),
        frac in 0.01..0.99f64,
    ) {
        let target = frac * coef.len() as f64;
        let sol = rate_for_expected_size(&coef, target).unwrap();
        let size: f64 = coef.iter().map(|c| (sol.rate * c).min(1.0)).sum();
        prop_assert!((size - target).abs() <= 1e-9 * coef.len() as f64);
    }

    #[test]
    fn samplers_are_deterministic_given_seed(data in rows(30, 2), seed in 0u64..1000) {
        for mode in [SamplerMode::Online, SamplerMode::Kernel, SamplerMode::OnlineThenKernel] {
            let cfg = SamplerConfig::new(mode, 3, 2.0, seed);
            let run = || {
                let mut s = cfg.build(2).unwrap();
                data.iter().filter_map(|a| s.step(a).unwrap()).map(|e| (e.index, e.weight)).collect::<Vec<_>>()
            };
            prop_assert_eq!(run(), run());
        }
    }

    #[test]
    fn tree_occupancy_follows_binary_counter(m in 1usize..7, n in 1usize..200) {
        let reducer = |pts: Vec<WeightedPoint>, _rho: f64, _level: usize| Ok(pts);
        let mut tree = MergeReduceTree::new(m, ErrorSchedule::new(0.2).unwrap(), reducer).unwrap();
        for i in 0..n {
            tree.push_row(&[i as f64]).unwrap();
        }
        let levels = tree.occupied_levels();
        let full = n / m;
        let mut want: Vec<usize> = if n % m != 0 { vec![0] } else { vec![] };
        want.extend((0..20).filter(|b| full >> b & 1 == 1).map(|b| b + 1));
        prop_assert_eq!(levels, want);
    }

    #[test]
    fn hungarian_matches_brute_force(n in 1usize..6, extra in 0usize..2, vals in prop::collection::vec(0.0..10.0f64, 64)) {
        let m = n + extra;
        let cost: Vec<Vec<f64>> = (0..n).map(|i| (0..m).map(|j| vals[(i * m + j) % vals.len()]).collect()).collect();
        let (assign, total) = min_cost_assignment(&cost).unwrap();
        let mut cols = assign.clone();
        cols.sort_unstable();
        cols.dedup();
        prop_assert_eq!(cols.len(), n);
        let recomputed: f64 = assign.iter().enumerate().map(|(i, &j)| cost[i][j]).sum();
        prop_assert!((recomputed - total).abs() < 1e-9);
        prop_assert!((total - brute_assignment(&cost)).abs() < 1e-9);
    }

    #[test]
    fn coreset_files_round_trip_exactly(
        data in prop::collection::vec((prop::collection::vec(any::<f64>().prop_filter("finite", |v| v.is_finite()), 3), 1e-6..1.0f64), 1..20),
    ) {
        let entries: Vec<CoresetEntry> = data
            .iter()
            .enumerate()
            .map(|(i, (row, prob))| CoresetEntry::new(i * 3, row.clone(), *prob, 2))
            .collect();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.csv");
        write_coreset_file(&path, &entries, 3).unwrap();
        let (back, dim) = read_coreset(&path, 2).unwrap();
        prop_assert_eq!(dim, 3);
        prop_assert_eq!(back.len(), entries.len());
        for (a, b) in entries.iter().zip(&back) {
            prop_assert_eq!(a.index, b.index);
            prop_assert_eq!(&a.row, &b.row);
            prop_assert_eq!(a.probability.to_bits(), b.probability.to_bits());
            prop_assert_eq!(a.weight.to_bits(), b.weight.to_bits());
        }
    }
}
