mod oracles;

use dirflow::lineage::{
    battery_config, build_pssm, clean_family, estimate_gap_rates, holdout_count, mix_with_uniform, parse_aligned_fasta,
    posterior_to_prior, render, split_family, synth_battery, synth_family, AlignedFamily, CleanFilters, CleanOutcome,
    FamilyEntry, FamilyPrior, FamilyRegistry, FamilySampler, RootPosterior, SplitTag, SynthConfig, GAP,
};
use dirflow::specfun::RandomStream;
use proptest::prelude::*;

fn registry_with_depths(depths: &[usize]) -> FamilyRegistry {
    let entries = depths
        .iter()
        .enumerate()
        .map(|(i, &d)| {
            let id = format!("f{i}");
            let rows = vec![vec![0u8, 1, 2]; d];
            let headers = (0..d).map(|r| format!("r{r}")).collect();
            let family = AlignedFamily::new(id.clone(), 20, headers, rows).unwrap();
            let pssm = build_pssm(&family, 1.0).unwrap();
            FamilyEntry {
                prior: FamilyPrior::uniform(id, 3, 20),
                pssm,
                family,
            }
        })
        .collect();
    FamilyRegistry::new(entries, 0.5).unwrap()
}

#[test]
fn sampler_frequencies_follow_depth_power() {
    let reg = registry_with_depths(&[4, 16, 64, 100]);
    let sampler = FamilySampler::new(&reg, 128).unwrap();
    let probs: Vec<f64> = sampler.support().map(|(_, p)| p).collect();
    let raw = [2.0, 4.0, 8.0, 10.0];
    for (p, r) in probs.iter().zip(raw) {
        assert!((p - r / 24.0).abs() < 1e-12);
    }
    let mut rng = RandomStream::new(1, 0);
    let n = 24000;
    let mut counts = [0usize; 4];
    for _ in 0..n {
        let id = sampler.sample(&mut rng);
        counts[id[1..].parse::<usize>().unwrap()] += 1;
    }
    let stat: f64 = counts
        .iter()
        .zip(&probs)
        .map(|(&c, &p)| (c as f64 - n as f64 * p).powi(2) / (n as f64 * p))
        .sum();
    assert!(oracles::chi_square_p_value(stat, 3) > 0.001, "chi2 {stat}");

    let capped = FamilySampler::new(&reg, 2).unwrap();
    let kept: Vec<(&str, f64)> = capped.support().collect();
    assert_eq!(kept.len(), 2);
    assert_eq!(kept[0].0, "f2");
    assert!((kept[0].1 - 8.0 / 18.0).abs() < 1e-12);
}

#[test]
fn prior_rows_sum_to_lambda_plus_k_epsilon() {
    let battery = synth_battery(2, &battery_config(), &RandomStream::new(3, 0)).unwrap();
    for (_, post) in &battery {
        let prior = posterior_to_prior(post, 10.0, 1e-3).unwrap();
        for row in prior.alpha.rows() {
            assert!((row.sum() - (10.0 + 20.0 * 1e-3)).abs() < 1e-12);
        }
        let mixed = mix_with_uniform(&prior, 0.0).unwrap();
        assert_eq!(mixed.alpha, prior.alpha);
        let flat = mix_with_uniform(&prior, 1.0).unwrap();
        for row in flat.alpha.rows() {
            assert!(row.iter().all(|&a| (a - row[0]).abs() < 1e-12));
        }
    }
}

#[test]
fn prior_and_posterior_files_round_trip() {
    let (_, post) = synth_family("rt", &SynthConfig::default(), &mut RandomStream::new(4, 0)).unwrap();
    // Rows are renormalized on load, which may move the last bit.
    let back = RootPosterior::from_text(&post.to_text()).unwrap();
    let worst = (&back.probs - &post.probs).iter().fold(0.0f64, |m, v| m.max(v.abs()));
    assert!(worst < 1e-15, "{worst:e}");
    let prior = posterior_to_prior(&post, 10.0, 1e-3).unwrap().with_gap_rates(vec![0.125; post.len()]).unwrap();
    assert_eq!(FamilyPrior::from_text(&prior.to_text()).unwrap(), prior);
}

#[test]
fn split_and_fasta_round_trip() {
    let config = SynthConfig {
        len: 30,
        depth: 120,
        ..battery_config()
    };
    let mut rng = RandomStream::new(5, 0);
    let (fam, _) = synth_family("sp", &config, &mut rng).unwrap();
    let split = split_family(&fam, 0.1, &mut rng).unwrap();
    assert_eq!(split.test_rows().count(), 12);
    assert_eq!(split.test_rows().count(), holdout_count(120, 0.1));
    let back = parse_aligned_fasta(split.to_fasta().as_bytes(), "sp").unwrap();
    assert_eq!(back.rows, split.rows);
    assert_eq!(back.split, split.split);
    let rates = estimate_gap_rates(&split).unwrap();
    assert_eq!(rates.len(), 30);
    assert!(rates[..4].iter().any(|&r| r > 0.0));
    assert!(split_family(&fam, 1.0, &mut rng).is_err());
    assert!(split.split.iter().filter(|s| **s == SplitTag::Train).count() == 108);
}

fn arbitrary_family(seed: u64, depth: usize, len: usize, gap_rate: f64) -> AlignedFamily {
    let mut rng = RandomStream::new(seed, 0);
    let rows: Vec<Vec<u8>> = (0..depth)
        .map(|_| {
            (0..len)
                .map(|_| if rng.bernoulli(gap_rate) { GAP } else { rng.index(20) as u8 })
                .collect()
        })
        .collect();
    let headers = (0..depth).map(|i| format!("s{i}")).collect();
    AlignedFamily::new("p", 20, headers, rows).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn cleaning_is_idempotent(
        seed in 0u64..1000,
        depth in 1usize..60,
        len in 1usize..40,
        gap_rate in 0.0f64..1.0,
        cap in 5usize..80,
    ) {
        let fam = arbitrary_family(seed, depth, len, gap_rate);
        let filters = CleanFilters { min_len: 5, max_len: 35, depth_cap: cap, col_missing_max: 0.6, min_depth: 3 };
        let mut rng = RandomStream::new(seed, 1);
        if let CleanOutcome::Kept(once) = clean_family(&fam, &filters, &mut rng) {
            prop_assert!(once.depth() <= cap && once.len >= 5);
            let twice = clean_family(&once, &filters, &mut rng);
            prop_assert_eq!(twice, CleanOutcome::Kept(once));
        }
    }

    #[test]
    fn fasta_round_trips(seed in 0u64..1000, depth in 1usize..10, len in 1usize..30) {
        let fam = arbitrary_family(seed, depth, len, 0.2);
        let back = parse_aligned_fasta(fam.to_fasta().as_bytes(), "p").unwrap();
        prop_assert_eq!(back.rows.iter().map(|r| render(r)).collect::<Vec<_>>(), fam.rows.iter().map(|r| render(r)).collect::<Vec<_>>());
    }
}
