//! Acceptance gate: one test per criterion, each printing a PASS line.
//! Tolerances and time budgets are pinned as constants next to the test
//! that uses them.

use std::path::PathBuf;
use std::time::{Duration, Instant};

use num::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use dnpi::ci::{ci_multinomial, ci_polytope_oracle, Direction};
use dnpi::contingency::ContingencyView;
use dnpi::data::{
    load_csv_path, AttrKind, AttributeSchema, ClassSchema, LoadOptions, SchemaSidecar,
};
use dnpi::eval::{accuracy, cross_validate, ConfusionMatrix, CvConfig};
use dnpi::interval::rat;
use dnpi::npi::{
    bernoulli_event_lower, bernoulli_event_upper, bernoulli_next_interval, BernoulliEventSpec,
    BernoulliRecord, MultinomialCounts, MultinomialEventSpec, multinomial_event_interval,
    multinomial_singleton_interval,
};
use dnpi::tree::{build_dnpi, no_attribute_interval, tree_size, verify_dnpi_splits};
use dnpi::{Algorithm, BuildParams, Dataset, DecisionTree};

fn data_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

/// Two-class view with counts 1..=k against a fixed linked class, so the
/// lower-bound sort keys are strictly increasing and the upper-bound keys
/// are all tied.
fn ascending_view(k: usize) -> (ContingencyView, Vec<(usize, usize)>) {
    let rows: Vec<Vec<u64>> = (1..=k as u64).map(|c| vec![c, 0]).collect();
    let view = ContingencyView::new(0, (0..k).collect(), rows).unwrap();
    let link: Vec<(usize, usize)> = (0..k).map(|i| (i, 0)).collect();
    (view, link)
}

#[test]
fn acceptance_1_golden_mass_vectors() {
    const BUDGET: Duration = Duration::from_secs(1);
    let start = Instant::now();

    let frac = |nums: &[u64], denom: u64| -> Vec<BigRational> {
        nums.iter().map(|&n| rat(n, denom)).collect()
    };

    let (view6, link6) = ascending_view(6);
    let score6 = ci_multinomial(&view6, &link6).unwrap();
    assert_eq!(score6.lower_masses(), frac(&[2, 3, 4, 3, 4, 5], 21), "lower masses k=6");
    assert_eq!(score6.upper_masses(), frac(&[0, 1, 2, 5, 6, 7], 21), "upper masses k=6");

    let (view5, link5) = ascending_view(5);
    let score5 = ci_multinomial(&view5, &link5).unwrap();
    assert_eq!(score5.lower_masses(), frac(&[2, 3, 3, 3, 4], 15), "lower masses k=5");
    assert_eq!(score5.upper_masses(), frac(&[0, 1, 3, 5, 6], 15), "upper masses k=5");

    assert!(start.elapsed() < BUDGET, "took {:?}", start.elapsed());
    println!("ACCEPTANCE 1: PASS");
}

#[test]
fn acceptance_2_greedy_equals_oracle() {
    const TRIALS: usize = 1000;
    const SEED: u64 = 42;
    const BUDGET: Duration = Duration::from_secs(30);
    let start = Instant::now();

    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    for trial in 0..TRIALS {
        let k = rng.random_range(3..=7usize);
        let classes = rng.random_range(2..=4usize);
        let mut counts = vec![vec![0u64; classes]; k];
        for row in counts.iter_mut() {
            let total = rng.random_range(1..=30u64);
            for _ in 0..total {
                row[rng.random_range(0..classes)] += 1;
            }
        }
        let view = ContingencyView::new(0, (0..k).collect(), counts.clone()).unwrap();
        let link = view.majority_class_map();
        let score = ci_multinomial(&view, &link).unwrap();
        let lo = ci_polytope_oracle(&view, &link, Direction::Min).unwrap();
        let hi = ci_polytope_oracle(&view, &link, Direction::Max).unwrap();
        assert_eq!(score.lower(), &lo, "lower mismatch at trial {trial}: {counts:?}");
        assert_eq!(score.upper(), &hi, "upper mismatch at trial {trial}: {counts:?}");
    }

    assert!(start.elapsed() < BUDGET, "took {:?}", start.elapsed());
    println!("ACCEPTANCE 2: PASS");
}

#[test]
fn acceptance_3_bernoulli_conjugacy_and_next_trial() {
    const BUDGET: Duration = Duration::from_secs(10);
    let start = Instant::now();

    for n in 0..=6u64 {
        for s in 0..=n {
            let record = BernoulliRecord::new(n, s).unwrap();
            for m in 1..=4u64 {
                // every nonempty success set R within 0..=m
                for mask in 1u32..(1 << (m + 1)) {
                    let set: Vec<u64> = (0..=m).filter(|r| mask & (1 << r) != 0).collect();
                    let event = BernoulliEventSpec::new(m, set).unwrap();
                    let lower = bernoulli_event_lower(&record, &event);
                    let complement = event.complement_set();
                    let upper_c = if complement.is_empty() {
                        BigRational::from_integer(0.into())
                    } else {
                        let c = BernoulliEventSpec::new(m, complement).unwrap();
                        bernoulli_event_upper(&record, &c)
                    };
                    assert_eq!(
                        lower,
                        BigRational::from_integer(1.into()) - upper_c,
                        "conjugacy at n={n} s={s} m={m} mask={mask:b}"
                    );
                }
                if m == 1 {
                    let one = BernoulliEventSpec::new(1, vec![1]).unwrap();
                    assert_eq!(bernoulli_event_lower(&record, &one), rat(s, n + 1));
                    assert_eq!(bernoulli_event_upper(&record, &one), rat(s + 1, n + 1));
                    let next = bernoulli_next_interval(&record);
                    assert_eq!(next.lower(), &rat(s, n + 1));
                    assert_eq!(next.upper(), &rat(s + 1, n + 1));
                }
            }
        }
    }

    assert!(start.elapsed() < BUDGET, "took {:?}", start.elapsed());
    println!("ACCEPTANCE 3: PASS");
}

/// All ways of writing `total` as `parts` positive counts.
fn compositions(total: u64, parts: usize) -> Vec<Vec<u64>> {
    if parts == 1 {
        return vec![vec![total]];
    }
    let mut out = Vec::new();
    for first in 1..=(total - parts as u64 + 1) {
        for mut rest in compositions(total - first, parts - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

#[test]
fn acceptance_4_multinomial_event_singleton_consistency() {
    const BUDGET: Duration = Duration::from_secs(10);
    let start = Instant::now();

    for k in 1..=6usize {
        for n in k as u64..=20 {
            for counts in compositions(n, k) {
                for big_k in k.max(2)..=6 {
                    let c = MultinomialCounts::new(counts.clone(), big_k).unwrap();
                    for i in 0..k {
                        let event = MultinomialEventSpec::singleton(i);
                        assert_eq!(
                            multinomial_event_interval(&c, &event).unwrap(),
                            multinomial_singleton_interval(&c, i).unwrap(),
                            "counts={counts:?} K={big_k} i={i}"
                        );
                    }
                }
            }
        }
    }

    assert!(start.elapsed() < BUDGET, "took {:?}", start.elapsed());
    println!("ACCEPTANCE 4: PASS");
}

#[test]
fn acceptance_5_no_attribute_worked_value() {
    let interval = no_attribute_interval(&[70, 30], 2);
    assert_eq!(interval.lower(), &rat(70, 101));
    assert_eq!(interval.upper(), &rat(71, 101));
    println!("ACCEPTANCE 5: PASS");
}

fn synthetic_dataset(seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let num_attrs = rng.random_range(2..=4usize);
    let classes = rng.random_range(2..=3usize);
    let rows_n = rng.random_range(12..=40usize);
    // one constant attribute plus a mix of class-correlated and noise ones
    let mut arities: Vec<usize> = (0..num_attrs).map(|_| rng.random_range(2..=4)).collect();
    arities.push(1);
    let attributes: Vec<AttributeSchema> = arities
        .iter()
        .enumerate()
        .map(|(i, &k)| AttributeSchema {
            name: format!("a{i}"),
            kind: AttrKind::Categorical {
                labels: (0..k).map(|v| format!("v{v}")).collect(),
            },
        })
        .collect();
    let class = ClassSchema {
        name: "class".into(),
        labels: (0..classes).map(|c| format!("c{c}")).collect(),
    };
    let rows = (0..rows_n)
        .map(|_| {
            let label = rng.random_range(0..classes);
            let values = arities
                .iter()
                .map(|&k| {
                    if k == 1 {
                        0
                    } else if rng.random_bool(0.7) {
                        label % k
                    } else {
                        rng.random_range(0..k)
                    }
                })
                .collect();
            (values, label)
        })
        .collect();
    Dataset::from_categorical(attributes, class, rows)
}

#[test]
fn acceptance_6_stop_rule_replay() {
    const DATASETS: u64 = 100;
    for seed in 0..DATASETS {
        let data = synthetic_dataset(seed);
        let tree = build_dnpi(&data, &BuildParams::default()).unwrap();
        if let Err(violation) = verify_dnpi_splits(&data, &tree) {
            panic!("seed {seed}: {violation}");
        }
    }
    println!("ACCEPTANCE 6: PASS");
}

#[test]
fn acceptance_7_benchmark_bands() {
    const QB_DNPI_BAND: (f64, f64) = (97.6, 100.0);
    const MONKS_DNPI: (f64, f64) = (73.33, 8.0);
    const LENSES_DNPI: (f64, f64) = (81.67, 12.0);
    const QB_GAIN_RATIO: (f64, f64) = (98.00, 2.0);
    const BUDGET: Duration = Duration::from_secs(120);
    let start = Instant::now();

    let load = |name: &str, schema: Option<&str>| -> Dataset {
        let options = LoadOptions {
            schema: schema.map(|s| SchemaSidecar::from_path(data_path(s)).unwrap()),
            ..LoadOptions::default()
        };
        load_csv_path(data_path(name), &options).unwrap()
    };
    let config = CvConfig::default();
    let mean = |data: &Dataset, algorithm: Algorithm| -> f64 {
        let params = BuildParams {
            min_split: 2,
            algorithm,
        };
        cross_validate(data, "bench", &params, &config)
            .unwrap()
            .mean_test_accuracy_pct
    };

    let qb = load("qualitative_bankruptcy.csv", None);
    let monks = load("monks1.csv", Some("monks1.schema.json"));
    let lenses = load("lenses.csv", None);

    let qb_dnpi = mean(&qb, Algorithm::Dnpi);
    assert!(
        (QB_DNPI_BAND.0..=QB_DNPI_BAND.1).contains(&qb_dnpi),
        "qualitative_bankruptcy dnpi {qb_dnpi}"
    );
    let monks_dnpi = mean(&monks, Algorithm::Dnpi);
    assert!(
        (monks_dnpi - MONKS_DNPI.0).abs() <= MONKS_DNPI.1,
        "monks1 dnpi {monks_dnpi}"
    );
    let lenses_dnpi = mean(&lenses, Algorithm::Dnpi);
    assert!(
        (lenses_dnpi - LENSES_DNPI.0).abs() <= LENSES_DNPI.1,
        "lenses dnpi {lenses_dnpi}"
    );
    let qb_gr = mean(&qb, Algorithm::GainRatio);
    assert!(
        (qb_gr - QB_GAIN_RATIO.0).abs() <= QB_GAIN_RATIO.1,
        "qualitative_bankruptcy gain_ratio {qb_gr}"
    );

    assert!(start.elapsed() < BUDGET, "took {:?}", start.elapsed());
    println!("ACCEPTANCE 7: PASS");
}

#[test]
fn acceptance_8_measure_definitions() {
    // accuracy on a fixed confusion matrix: TN=40, TP=50, FP=5, FN=5
    let mut matrix = ConfusionMatrix::new(2);
    for _ in 0..40 {
        matrix.record(0, 0);
    }
    for _ in 0..50 {
        matrix.record(1, 1);
    }
    for _ in 0..5 {
        matrix.record(0, 1);
    }
    for _ in 0..5 {
        matrix.record(1, 0);
    }
    assert_eq!(accuracy(&matrix), 0.90);

    // tree_size counts leaves; a lone leaf is size 1
    let leaf = DecisionTree::from_json(r#"{"root":{"Leaf":{"class":0,"n":3}}}"#).unwrap();
    assert_eq!(tree_size(&leaf), 1);
    let one_class = Dataset::from_categorical(
        vec![AttributeSchema {
            name: "a".into(),
            kind: AttrKind::Categorical {
                labels: vec!["x".into(), "y".into()],
            },
        }],
        ClassSchema {
            name: "class".into(),
            labels: vec!["c0".into(), "c1".into()],
        },
        vec![(vec![0], 0), (vec![1], 0)],
    );
    let stump = build_dnpi(&one_class, &BuildParams::default()).unwrap();
    assert_eq!(stump.size(), 1);
    println!("ACCEPTANCE 8: PASS");
}
