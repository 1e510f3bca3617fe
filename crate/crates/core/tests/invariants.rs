use econoswap_core::{
    build_histogram, fit_exponential, gini_of, in_range, mutual_in_range, pearson_r_squared,
    run_iteration, total_wealth, transact, BinScheme, ExchangeDraw, FitOptions, PairingRule,
    Population, Side, SimRng, Wealth,
};
use proptest::prelude::*;
use rand::SeedableRng;

fn wealth_vec(max_len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(
        prop_oneof![
            1 => Just(0.0),
            2 => (0u32..20).prop_map(|k| 50.0 * k as f64),
            6 => 0.0..5000.0f64,
        ],
        2..max_len,
    )
}

fn rule() -> impl Strategy<Value = PairingRule> {
    prop_oneof![
        Just(PairingRule::Random),
        (0.01..1.5f64).prop_map(|beta| PairingRule::NonMutualClass { beta }),
        (0.01..1.5f64).prop_map(|beta| PairingRule::MutualClass { beta }),
        (0.01..1.5f64, 1.0..3000.0f64).prop_map(|(beta, l)| PairingRule::Mixed {
            beta,
            w_limit: Wealth::new(l).unwrap(),
        }),
    ]
}

fn brute_gini(w: &[f64]) -> f64 {
    let n = w.len() as f64;
    let mean = w.iter().sum::<f64>() / n;
    let mut s = 0.0;
    for a in w {
        for b in w {
            s += (a - b).abs();
        }
    }
    s / (2.0 * n * n * mean)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn pairing_is_a_partition_of_admissible_pairs(w in wealth_vec(60), rule in rule(), seed: u64) {
        let pop = Population::from_wealths(w.clone()).unwrap();
        let mut rng = SimRng::seed_from_u64(seed);
        let out = rule.pair(&pop, &mut rng).unwrap();
        prop_assert!(out.is_partition_of(w.len()));
        for &(i, j) in &out.pairs {
            prop_assert!(rule.admits(w[i as usize], w[j as usize]), "{:?} paired {} with {}", rule, w[i as usize], w[j as usize]);
        }
        // Of two unpaired agents, the one drawn first saw the other as available,
        // so they cannot be mutually eligible.
        for (k, &u) in out.unpaired.iter().enumerate() {
            for &v in &out.unpaired[k + 1..] {
                let (wu, wv) = (w[u as usize], w[v as usize]);
                prop_assert!(!(rule.admits(wu, wv) && rule.admits(wv, wu)));
            }
        }
        if rule == PairingRule::Random {
            prop_assert_eq!(out.unpaired.len(), w.len() % 2);
        }
    }

    #[test]
    fn iterations_conserve_and_stay_non_negative(w in wealth_vec(40), rule in rule(), seed: u64) {
        prop_assume!(w.iter().any(|&x| x > 0.0));
        let mut pop = Population::from_wealths(w).unwrap();
        let start = total_wealth(&pop);
        let mut rng = SimRng::seed_from_u64(seed);
        for _ in 0..20 {
            run_iteration(&mut pop, &rule, &mut rng).unwrap();
            prop_assert!(pop.wealths().iter().all(|&x| x >= 0.0 && x.is_finite()));
        }
        pop.reindex();
        prop_assert!(pop.index_is_consistent());
        let drift = (total_wealth(&pop) - start).abs() / start;
        prop_assert!(drift < 1e-12, "drift {}", drift);
    }

    #[test]
    fn transact_conserves_pair_wealth(a in 0.0..1e6f64, b in 0.0..1e6f64, f in 0.0..1.0f64, first: bool) {
        let winner = if first { Side::First } else { Side::Second };
        let (x, y) = transact(a, b, ExchangeDraw { winner, stake_fraction: f });
        prop_assert!(x >= 0.0 && y >= 0.0);
        prop_assert!(((x + y) - (a + b)).abs() <= 1e-12 * (a + b).max(1.0));
        let (loser_before, loser_after) = if first { (b, y) } else { (a, x) };
        prop_assert!(loser_after <= loser_before);
    }

    #[test]
    fn gini_agrees_with_pairwise_definition(w in prop::collection::vec(0.0..1e4f64, 1..80), scale in 0.001..1000.0f64) {
        prop_assume!(w.iter().sum::<f64>() > 0.0);
        let g = gini_of(&w).unwrap();
        prop_assert!((g - brute_gini(&w)).abs() < 1e-9);
        prop_assert!((0.0..=1.0).contains(&g));
        let scaled: Vec<f64> = w.iter().map(|x| x * scale).collect();
        prop_assert!((gini_of(&scaled).unwrap() - g).abs() < 1e-9);
    }

    #[test]
    fn mutual_window_is_symmetric(a in 0.0..1e4f64, b in 0.0..1e4f64, beta in 0.01..2.0f64) {
        prop_assert_eq!(mutual_in_range(a, b, beta), mutual_in_range(b, a, beta));
        if mutual_in_range(a, b, beta) {
            prop_assert!(in_range(a, b, beta) && in_range(b, a, beta));
        }
    }

    #[test]
    fn histogram_mass_is_one(w in wealth_vec(300), bins in 1usize..120, log: bool) {
        let scheme = if log { BinScheme::Logarithmic } else { BinScheme::Linear };
        let positives: Vec<f64> = w.iter().copied().filter(|&x| x > 0.0).collect();
        let max = w.iter().copied().fold(0.0, f64::max);
        let min = positives.iter().copied().fold(f64::INFINITY, f64::min);
        prop_assume!(max > 0.0 && (!log || min < max));
        let d = build_histogram(&w, scheme, bins).unwrap();
        prop_assert!((d.total_mass() - 1.0).abs() < 1e-9);
        let counted: u64 = d.bins.iter().map(|b| b.count).sum();
        prop_assert_eq!(counted as usize, positives.len());
        prop_assert!((d.zero_mass - (w.len() - positives.len()) as f64 / w.len() as f64).abs() < 1e-15);
    }

    #[test]
    fn duplicating_samples_leaves_density_unchanged(w in wealth_vec(200), bins in 1usize..60) {
        prop_assume!(w.iter().any(|&x| x > 0.0));
        let d1 = build_histogram(&w, BinScheme::Linear, bins).unwrap();
        let doubled: Vec<f64> = w.iter().chain(w.iter()).copied().collect();
        let d2 = build_histogram(&doubled, BinScheme::Linear, bins).unwrap();
        for (a, b) in d1.bins.iter().zip(&d2.bins) {
            prop_assert_eq!(2 * a.count, b.count);
            prop_assert!((a.density - b.density).abs() <= 1e-12 * a.density.max(1e-300));
        }
    }

    #[test]
    fn pearson_is_affine_invariant(
        xs in prop::collection::vec(-100.0..100.0f64, 3..40),
        noise in prop::collection::vec(-1.0..1.0f64, 40),
        a in 0.1..10.0f64, b in -50.0..50.0f64, c in -10.0..10.0f64, d in -50.0..50.0f64,
    ) {
        prop_assume!(c.abs() > 0.1);
        let ys: Vec<f64> = xs.iter().zip(&noise).map(|(x, e)| 0.5 * x + 10.0 * e).collect();
        let Ok(r0) = pearson_r_squared(&xs, &ys) else { return Ok(()); };
        let xs2: Vec<f64> = xs.iter().map(|x| a * x + b).collect();
        let ys2: Vec<f64> = ys.iter().map(|y| c * y + d).collect();
        let r1 = pearson_r_squared(&xs2, &ys2).unwrap();
        prop_assert!((r0 - r1).abs() < 1e-9);
    }
}

#[test]
fn nonmutual_window_is_asymmetric_somewhere() {
    use rand::Rng;
    let mut rng = SimRng::seed_from_u64(9);
    let mut found = false;
    for _ in 0..10_000 {
        let a = rng.random_range(1.0..1000.0);
        let b = rng.random_range(1.0..1000.0);
        let beta = rng.random_range(0.05..1.0);
        if in_range(a, b, beta) != in_range(b, a, beta) {
            found = true;
            break;
        }
    }
    assert!(found);
    assert!(in_range(80.0, 100.0, 0.5) && !in_range(100.0, 40.0, 0.5));
}

#[test]
fn exponential_quantiles_recover_rate() {
    // Deterministic inverse-CDF draws of an exponential with mean 1000.
    let m = 1_000_000;
    let samples: Vec<f64> = (0..m)
        .map(|k| -1000.0 * (1.0 - (k as f64 + 0.5) / m as f64).ln())
        .collect();
    let d = build_histogram(&samples, BinScheme::Linear, 100).unwrap();
    let fit = fit_exponential(&d, &FitOptions::default()).unwrap();
    assert!(
        (fit.exponent - 1e-3).abs() < 0.02e-3,
        "rate {}",
        fit.exponent
    );
    assert!(fit.r_squared > 0.99);
}

#[test]
fn random_pairing_hits_each_partner_equally() {
    let n = 7;
    let pop = Population::from_wealths(vec![100.0; n]).unwrap();
    let mut rng = SimRng::seed_from_u64(11);
    let runs = 200_000;
    let mut hits = 0u32;
    for _ in 0..runs {
        let out = PairingRule::Random.pair(&pop, &mut rng).unwrap();
        if out
            .pairs
            .iter()
            .any(|&(a, b)| a.min(b) == 0 && a.max(b) == 1)
        {
            hits += 1;
        }
    }
    // With n odd, agent 0 is paired with probability (n−1)/n and then
    // picks agent 1 with probability 1/(n−1).
    let p = 1.0 / n as f64;
    let f = hits as f64 / runs as f64;
    let sigma = (p * (1.0 - p) / runs as f64).sqrt();
    assert!((f - p).abs() < 4.0 * sigma, "freq {f}, expected {p}");
}
