//! Property tests for the library's structural invariants: corpus
//! round-trips, filter monotonicity, weight conservation, window algebra
//! against the flat-loop oracle, rank invariances and Spearman behaviour.

mod common;

use std::collections::BTreeMap;

use proptest::prelude::*;

use common::{spearman_oracle, FssOracle};
use fss_core::corpus::{
    filter_eligible_sds, stable_staff, AuthorshipEntry, InstitutionId, PubId, ResearcherId, SdsId,
};
use fss_core::io::{load_corpus, save_corpus, FileFormat};
use fss_core::normalize::{BaselineTable, CategoryWeighting};
use fss_core::rank::rank_sds;
use fss_core::score::{byline_weights, fss_score, WeightScheme};
use fss_core::stats::spearman;
use fss_core::syngen::{generate, GeneratorConfig};
use fss_core::windows::Window;

fn small_config(seed: u64) -> GeneratorConfig {
    GeneratorConfig {
        seed,
        n_sds: 2,
        n_udas: 2,
        staff_per_sds: (4, 10),
        pubs_per_year: 0.7,
        coauthors_mean: 1.5,
        multi_category_share: 0.3,
        partial_career_fraction: 0.2,
        positional_sds_fraction: 0.5,
        ..GeneratorConfig::default()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn corpus_round_trips_identically(seed in any::<u64>()) {
        let generated = generate(&small_config(seed)).unwrap();
        for format in [FileFormat::Csv, FileFormat::Json] {
            let dir = tempfile::TempDir::new().unwrap();
            let paths = save_corpus(&generated.corpus, dir.path(), format).unwrap();
            let reloaded = load_corpus(&paths, format, generated.corpus.observation_date_label()).unwrap();
            prop_assert_eq!(&generated.corpus, &reloaded);
        }
    }

    #[test]
    fn eligibility_is_monotone_in_active_share(seed in any::<u64>(), lo in 0.0f64..=1.0, hi in 0.0f64..=1.0) {
        let (lo, hi) = if lo <= hi { (lo, hi) } else { (hi, lo) };
        let corpus = generate(&small_config(seed)).unwrap().corpus;
        let window = Window::new(2003, 2008).unwrap();
        let strict = filter_eligible_sds(&corpus, window, hi, 3);
        let lax = filter_eligible_sds(&corpus, window, lo, 3);
        prop_assert!(strict.is_subset(&lax));
    }

    #[test]
    fn stable_staff_shrinks_as_the_window_grows(seed in any::<u64>()) {
        let corpus = generate(&small_config(seed)).unwrap().corpus;
        let narrow = Window::new(2005, 2006).unwrap();
        let wide = Window::new(2003, 2008).unwrap();
        prop_assert!(stable_staff(&corpus, wide).is_subset(&stable_staff(&corpus, narrow)));
    }

    #[test]
    fn byline_weights_always_sum_to_one(
        institutions in prop::collection::vec(0u8..4, 1..=12),
        positional in any::<bool>(),
    ) {
        let byline: Vec<AuthorshipEntry> = institutions
            .iter()
            .enumerate()
            .map(|(i, inst)| AuthorshipEntry {
                pub_id: PubId::from("P"),
                position: i as u32 + 1,
                researcher_id: None,
                institution_id: InstitutionId::new(format!("I{inst}")),
            })
            .collect();
        let scheme = if positional { WeightScheme::Positional } else { WeightScheme::Uniform };
        let weights = byline_weights::<f64>(&byline, scheme);
        let sum: f64 = weights.iter().sum();
        prop_assert!((sum - 1.0).abs() < 1e-12, "sum = {sum}");
        prop_assert!(weights.iter().all(|&w| w > 0.0 && w <= 1.0));
    }

    #[test]
    fn fss_matches_oracle_and_window_algebra_holds(seed in any::<u64>()) {
        let corpus = generate(&small_config(seed)).unwrap().corpus;
        let baselines: BaselineTable<f64> = BaselineTable::from_corpus(&corpus);
        let oracle = FssOracle::new(&corpus);
        let full = Window::new(2003, 2008).unwrap();
        let first = Window::new(2003, 2005).unwrap();
        let second = Window::new(2006, 2008).unwrap();
        for researcher in corpus.researchers() {
            let rid = &researcher.researcher_id;
            let fss = |w: Window| {
                fss_score(&corpus, &baselines, rid, w, &CategoryWeighting::Equal).unwrap().value
            };
            let whole = fss(full);
            prop_assert!((whole - oracle.fss(&corpus, &baselines, rid, full)).abs() < 1e-9);
            prop_assert!((fss(first) + fss(second) - whole).abs() < 1e-9);
            // monotone over the growing chain
            let mut previous = 0.0;
            for len in 1..=6 {
                let window = Window::new(2009 - len, 2008).unwrap();
                let value = fss(window);
                prop_assert!(value + 1e-12 >= previous);
                previous = value;
            }
        }
    }

    #[test]
    fn ranking_is_invariant_under_positive_rescaling(
        scores in prop::collection::vec(0u32..40, 2..40),
        scale in 1u32..1000,
    ) {
        let window = Window::new(2003, 2008).unwrap();
        let base: BTreeMap<ResearcherId, f64> = scores
            .iter()
            .enumerate()
            .map(|(i, &v)| (ResearcherId::new(format!("R{i:02}")), v as f64 / 4.0))
            .collect();
        let scaled: BTreeMap<ResearcherId, f64> =
            base.iter().map(|(k, v)| (k.clone(), v * scale as f64)).collect();
        let t1 = rank_sds(SdsId::from("S"), window, &base).unwrap();
        let t2 = rank_sds(SdsId::from("S"), window, &scaled).unwrap();
        for (a, b) in t1.entries.iter().zip(&t2.entries) {
            prop_assert_eq!(&a.researcher_id, &b.researcher_id);
            prop_assert_eq!(a.percentile, b.percentile);
            prop_assert_eq!(a.class, b.class);
        }
    }

    #[test]
    fn class_sizes_respect_the_quartile_bound(
        scores in prop::collection::vec(0u32..12, 2..60),
    ) {
        // Among productive researchers no class may exceed ceil(N/4) plus the
        // largest tie group.
        let window = Window::new(2003, 2008).unwrap();
        let map: BTreeMap<ResearcherId, f64> = scores
            .iter()
            .enumerate()
            .map(|(i, &v)| (ResearcherId::new(format!("R{i:02}")), v as f64))
            .collect();
        let n = map.len();
        let table = rank_sds(SdsId::from("S"), window, &map).unwrap();
        let mut tie_sizes: BTreeMap<u64, usize> = BTreeMap::new();
        for value in map.values().filter(|v| **v > 0.0) {
            *tie_sizes.entry(value.to_bits()).or_insert(0) += 1;
        }
        let t_max = tie_sizes.values().copied().max().unwrap_or(0);
        let bound = n.div_ceil(4) + t_max;
        for class in 1u8..=4 {
            let members = table.entries.iter().filter(|e| e.class == class).count();
            prop_assert!(members <= bound, "class {class} has {members} > bound {bound}");
        }
    }

    #[test]
    fn spearman_matches_exact_oracle(
        pairs in prop::collection::vec((0i64..5, 0i64..5), 3..120),
    ) {
        let x: Vec<i64> = pairs.iter().map(|p| p.0).collect();
        let y: Vec<i64> = pairs.iter().map(|p| p.1).collect();
        let xf: Vec<f64> = x.iter().map(|&v| v as f64).collect();
        let yf: Vec<f64> = y.iter().map(|&v| v as f64).collect();
        match (spearman(&xf, &yf), spearman_oracle(&x, &y)) {
            (Ok(rho), Some(expected)) => prop_assert!((rho - expected).abs() < 1e-12),
            (Err(_), None) => {}
            (mine, oracle) => prop_assert!(false, "disagree: {mine:?} vs {oracle:?}"),
        }
    }
}

#[test]
fn noise_knob_monotonically_raises_annual_rank_churn() {
    use fss_core::pipeline::{analyze, rank_scenarios, AnalyzeOptions, RankOptions};

    let delta1_mean = |noise: f64| -> f64 {
        let mut total = 0.0;
        let mut runs = 0;
        for seed in 0..12 {
            let config = GeneratorConfig {
                seed,
                n_sds: 3,
                n_udas: 2,
                staff_per_sds: (20, 20),
                noise,
                ..GeneratorConfig::default()
            };
            let corpus = generate(&config).unwrap().corpus;
            let baselines = BaselineTable::from_corpus(&corpus);
            let rankings = rank_scenarios(&corpus, &baselines, &RankOptions::default()).unwrap();
            let outputs = analyze(
                &corpus,
                &baselines,
                &rankings,
                &AnalyzeOptions { delta_lengths: vec![1] },
                &CategoryWeighting::Equal,
            )
            .unwrap();
            if let Some(d1) = outputs.deltas.overall[0].mean_abs_class_change {
                total += d1;
                runs += 1;
            }
        }
        total / runs as f64
    };

    let low = delta1_mean(0.2);
    let mid = delta1_mean(0.8);
    let high = delta1_mean(1.6);
    assert!(low < mid && mid < high, "delta1 means not increasing: {low} {mid} {high}");
}
