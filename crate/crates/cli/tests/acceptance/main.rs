//! Acceptance suite: one test per release criterion, each printing a PASS
//! line with its measurements. Oracles here are deliberately independent of
//! the library's optimized implementations.

mod oracles;
mod support;

use std::collections::BTreeMap;
use std::fs;
use std::process::Command;
use std::time::{Duration, Instant};

use medmetrics::{
    build_frequency_table, compute_pairwise, consensus_partition, euclidean, generate,
    hamming_str, kmedoids, load_records, manhattan, minkowski, minmax_normalize, parse_tree,
    pqgram_distance, pqgram_distance_norm, pqgram_profile, serialize_tree, ted, ted_norm,
    DistanceMatrix, LabeledTree, MetricSpec, NormalizeMode, PQGramProfile, PQParams, SynthParams,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tempfile::TempDir;

#[test]
fn criterion_01_hamming_text_examples() {
    let start = Instant::now();
    let words = hamming_str("toned", "roses").unwrap();
    let digits = hamming_str("217389", "213379").unwrap();
    let elapsed = start.elapsed();
    assert_eq!(words, 3);
    assert_eq!(digits, 2);
    assert!(elapsed < Duration::from_millis(1), "took {elapsed:?}");
    println!("criterion 01 PASS: hamming text examples exact in {elapsed:?}");
}

#[test]
fn criterion_02_minkowski_special_orders() {
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let start = Instant::now();
    for _ in 0..1000 {
        let (x, y) = support::random_vector_pair(&mut rng, 50);
        let m1 = minkowski(&x, &y, 1.0).unwrap();
        let taxicab = manhattan(&x, &y).unwrap();
        assert!(
            (m1 - taxicab).abs() <= 1e-12 * (1.0 + taxicab),
            "{m1} vs {taxicab}"
        );
        let m2 = minkowski(&x, &y, 2.0).unwrap();
        let straight = euclidean(&x, &y).unwrap();
        assert!(
            (m2 - straight).abs() <= 1e-12 * (1.0 + straight),
            "{m2} vs {straight}"
        );
    }
    let elapsed = start.elapsed();
    assert!(elapsed < Duration::from_secs(1), "took {elapsed:?}");
    println!(
        "criterion 02 PASS: minkowski p=1/p=2 agree with manhattan/euclidean \
         on 1000 random vector pairs in {elapsed:?}"
    );
}

#[test]
fn criterion_03_pqgram_matches_naive_oracle() {
    let labels = ["a", "b", "c", "d", "e"];
    let mut rng = ChaCha8Rng::seed_from_u64(203);
    let combos: Vec<PQParams> = (1..=3)
        .flat_map(|p| (1..=3).map(move |q| PQParams::new(p, q).unwrap()))
        .collect();
    let as_map = |profile: &PQGramProfile| -> BTreeMap<Vec<String>, u64> {
        profile.iter().map(|(t, m)| (t.to_vec(), m)).collect()
    };
    let start = Instant::now();
    for _ in 0..200 {
        let t1 = support::random_tree(&mut rng, 30, &labels);
        let t2 = support::random_tree(&mut rng, 30, &labels);
        for &params in &combos {
            let naive1 = oracles::naive_pqgram_profile(&t1, params);
            let naive2 = oracles::naive_pqgram_profile(&t2, params);
            assert_eq!(as_map(&pqgram_profile(&t1, params).unwrap()), naive1);
            assert_eq!(as_map(&pqgram_profile(&t2, params).unwrap()), naive2);
            assert_eq!(
                pqgram_distance(&t1, &t2, params).unwrap(),
                oracles::bag_distance(&naive1, &naive2)
            );
            let norm = pqgram_distance_norm(&t1, &t2, params).unwrap();
            assert!((0.0..=1.0).contains(&norm), "norm {norm} out of range");
            assert_eq!(pqgram_distance(&t1, &t1, params).unwrap(), 0);
        }
    }
    let elapsed = start.elapsed();
    assert!(elapsed < Duration::from_secs(30), "took {elapsed:?}");
    println!(
        "criterion 03 PASS: 200 tree pairs x 9 (p,q) combos equal the \
         extended-tree enumeration oracle in {elapsed:?}"
    );
}

#[test]
fn criterion_04_edit_distance_brute_force_and_axioms() {
    let labels = ["a", "b", "c"];
    let mut rng = ChaCha8Rng::seed_from_u64(204);
    let start = Instant::now();

    let corpus: Vec<LabeledTree> = (0..40)
        .map(|_| support::random_tree(&mut rng, 6, &labels))
        .collect();
    for i in 0..corpus.len() {
        for j in i..corpus.len() {
            let fast = ted(&corpus[i], &corpus[j]);
            let exhaustive = oracles::brute_force_ted(&corpus[i], &corpus[j]);
            assert_eq!(
                fast,
                exhaustive,
                "trees {} and {}",
                serialize_tree(&corpus[i]),
                serialize_tree(&corpus[j])
            );
        }
    }

    for _ in 0..500 {
        let a = support::random_tree(&mut rng, 12, &labels);
        let b = support::random_tree(&mut rng, 12, &labels);
        let c = support::random_tree(&mut rng, 12, &labels);
        assert_eq!(ted(&a, &a), 0);
        let ab = ted(&a, &b);
        assert_eq!(ab, ted(&b, &a));
        assert!(ted(&a, &c) <= ab + ted(&b, &c), "triangle inequality");
        if ab == 0 {
            assert_eq!(serialize_tree(&a), serialize_tree(&b));
        }
    }

    let elapsed = start.elapsed();
    assert!(elapsed < Duration::from_secs(60), "took {elapsed:?}");
    println!(
        "criterion 04 PASS: 40-tree corpus equals exhaustive mapping search \
         and metric axioms hold on 500 triples in {elapsed:?}"
    );
}

#[test]
fn criterion_05_unit_normalization_values() {
    let left = parse_tree("{a{b}}").unwrap();
    let right = parse_tree("{a{c}}").unwrap();
    let pq_norm = pqgram_distance_norm(&left, &right, PQParams::new(1, 1).unwrap()).unwrap();
    assert!((pq_norm - 1.0).abs() <= 1e-12, "pq norm {pq_norm}");
    let edit_norm = ted_norm(&left, &right);
    assert!((edit_norm - 0.25).abs() <= 1e-12, "ted norm {edit_norm}");
    println!("criterion 05 PASS: normalized distances 1.0 (pq) and 0.25 (edit) on the two-leaf pair");
}

#[test]
fn criterion_06_frequency_table_reconstruction() {
    const SAMPLE: &str = "\
patient_id,sex,age,event_code
a6706013B,1,15,M26.
a6706015R,2,10,168.
a6706015R,2,10,195.
a6706015R,2,10,730.
a6706015R,2,10,F58.
a6706015R,2,10,F582
a670601o8,1,12,171.
a670601o8,1,12,19C.
a670601o8,1,12,1A5.
a670601o8,1,12,H17.
a670601o8,1,12,M0..
a670601o8,1,12,M26.
a670601o8,1,12,N24.
a670601o8,1,12,N32.
a670601o8,1,12,SD..
a670601o8,1,12,SL..
a670601yJ,2,11,M26.
a670601yJ,2,11,ZL5.
";
    let (dataset, _) = load_records(SAMPLE.as_bytes(), true).unwrap();
    let table = build_frequency_table(&dataset).unwrap();
    assert_eq!(
        table.event_codes,
        [
            "168", "171", "195", "19C", "1A5", "730", "F58", "H17", "M0.", "M26", "N24", "N32",
            "SD.", "SL.", "ZL5"
        ]
    );
    assert_eq!(table.ages, [10, 11, 12, 15]);
    assert_eq!(
        table.patient_ids,
        ["a6706013B", "a6706015R", "a670601o8", "a670601yJ"]
    );
    let rows: Vec<&[u32]> = table.rows.iter().map(|r| r.values()).collect();
    // Columns: the 15 codes above, then ages 10/11/12/15, then sex.
    assert_eq!(
        rows,
        [
            &[0, 0, 0, 0, 0, 0, 0, 0, 0, 1, 0, 0, 0, 0, 0, 0, 0, 0, 1, 1][..],
            &[1, 0, 1, 0, 0, 1, 2, 0, 0, 0, 0, 0, 0, 0, 0, 1, 0, 0, 0, 2][..],
            &[0, 1, 0, 1, 1, 0, 0, 1, 1, 1, 1, 1, 1, 1, 0, 0, 0, 1, 0, 1][..],
            &[0, 0, 0, 0, 0, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1, 0, 1, 0, 0, 2][..],
        ]
    );
    println!("criterion 06 PASS: four-patient sample reproduces the hand-built frequency rows");
}

#[test]
fn criterion_07_minmax_normalization() {
    let ids = |n: usize| (0..n).map(|i| format!("p{i}")).collect::<Vec<_>>();

    let spread = DistanceMatrix::from_offdiag(ids(3), &[2.0, 4.0, 6.0], "raw", false).unwrap();
    let normalized = minmax_normalize(&spread);
    assert_eq!(
        normalized.off_diagonal().collect::<Vec<_>>(),
        [0.0, 0.5, 1.0]
    );

    let constant = DistanceMatrix::from_offdiag(ids(3), &[5.0, 5.0, 5.0], "raw", false).unwrap();
    assert!(minmax_normalize(&constant).off_diagonal().all(|d| d == 0.0));

    let mut rng = ChaCha8Rng::seed_from_u64(207);
    for _ in 0..100 {
        let n = rng.random_range(3..=10usize);
        let raw: Vec<f64> = (0..n * (n - 1) / 2)
            .map(|_| rng.random_range(0.0..100.0))
            .collect();
        let matrix = DistanceMatrix::from_offdiag(ids(n), &raw, "raw", false).unwrap();
        let scaled: Vec<f64> = minmax_normalize(&matrix).off_diagonal().collect();
        let original: Vec<f64> = matrix.off_diagonal().collect();
        for i in 0..original.len() {
            for j in 0..original.len() {
                if original[i] < original[j] {
                    assert!(scaled[i] <= scaled[j], "rank order broken");
                } else if original[i] == original[j] {
                    assert_eq!(scaled[i], scaled[j], "equal inputs diverged");
                }
            }
        }
    }
    println!("criterion 07 PASS: min-max maps {{2,4,6}} to {{0,0.5,1}}, zeroes constants, keeps rank order");
}

#[test]
fn criterion_08_planted_groups_recovered_by_every_metric() {
    let start = Instant::now();
    let synth = generate(&SynthParams {
        patients: 60,
        codes: 12,
        groups: 3,
        seed: 0,
    })
    .unwrap();
    let (dataset, _) = load_records(synth.csv.as_bytes(), true).unwrap();
    assert_eq!(dataset.len(), 60);

    let metrics = [
        MetricSpec::Euclidean,
        MetricSpec::Minkowski { p: 3.0 },
        MetricSpec::Manhattan,
        MetricSpec::Hamming,
        MetricSpec::EditDistance,
        MetricSpec::PqGram { p: 1, q: 3 },
    ];
    let mut scores = Vec::new();
    for metric in &metrics {
        let run = compute_pairwise(&dataset, metric, NormalizeMode::Native).unwrap();
        let partition = consensus_partition(&run.normalized, 3, 10, 0).unwrap();
        let ari = support::adjusted_rand_index(partition.assignment(), &synth.planted);
        assert!(ari >= 0.9, "{}: ARI {ari:.4} below 0.9", metric.tag());
        scores.push(format!("{}={ari:.3}", metric.tag()));

        for seed in 0..10 {
            let single = kmedoids(&run.normalized, 3, seed).unwrap();
            let trace = single.cost_trace();
            assert!(
                trace
                    .windows(2)
                    .all(|w| w[1] <= w[0] + 1e-9 * (1.0 + w[0].abs())),
                "{} seed {seed}: cost increased across iterations: {trace:?}",
                metric.tag()
            );
        }
    }
    let elapsed = start.elapsed();
    assert!(elapsed < Duration::from_secs(60), "took {elapsed:?}");
    println!(
        "criterion 08 PASS: ARI {} on 3x20 planted groups, cost non-increasing, in {elapsed:?}",
        scores.join(" ")
    );
}

#[test]
fn criterion_09_pipeline_scale() {
    let start = Instant::now();
    let synth = generate(&SynthParams {
        patients: 988,
        codes: 30,
        groups: 3,
        seed: 0,
    })
    .unwrap();
    let (dataset, _) = load_records(synth.csv.as_bytes(), true).unwrap();
    let run = compute_pairwise(&dataset, &MetricSpec::Euclidean, NormalizeMode::Native).unwrap();
    let partition = consensus_partition(&run.normalized, 3, 10, 0).unwrap();
    assert_eq!(partition.assignment().len(), 988);
    let large = start.elapsed();
    assert!(large < Duration::from_secs(120), "took {large:?}");

    let start = Instant::now();
    let synth = generate(&SynthParams {
        patients: 100,
        codes: 30,
        groups: 3,
        seed: 0,
    })
    .unwrap();
    let (dataset, _) = load_records(synth.csv.as_bytes(), true).unwrap();
    let run = compute_pairwise(
        &dataset,
        &MetricSpec::PqGram { p: 1, q: 3 },
        NormalizeMode::Native,
    )
    .unwrap();
    assert_eq!(run.normalized.len(), 100);
    let small = start.elapsed();
    assert!(small < Duration::from_secs(120), "took {small:?}");

    println!(
        "criterion 09 PASS: euclidean matrix+clustering on 988 patients in {large:?}, \
         pq-gram matrix on 100 patients in {small:?}"
    );
}

#[test]
fn criterion_10_cluster_outputs_byte_identical() {
    let dir = TempDir::new().unwrap();
    let records = dir.path().join("records.csv");
    let binary = env!("CARGO_BIN_EXE_medmetrics");

    let output = Command::new(binary)
        .args([
            "gen", "--patients", "60", "--codes", "12", "--groups", "3",
            "--seed", "0", "--out",
        ])
        .arg(&records)
        .output()
        .unwrap();
    assert!(output.status.success());

    let run_a = dir.path().join("a");
    let run_b = dir.path().join("b");
    for out_dir in [&run_a, &run_b] {
        let output = Command::new(binary)
            .args([
                "cluster", "--metric", "euclidean", "--k", "3",
                "--restarts", "10", "--seed", "0", "--input",
            ])
            .arg(&records)
            .arg("--out")
            .arg(out_dir)
            .output()
            .unwrap();
        assert!(output.status.success());
    }
    for file in ["partition.csv", "summary.csv", "embedding.csv"] {
        let a = fs::read(run_a.join(file)).unwrap();
        let b = fs::read(run_b.join(file)).unwrap();
        assert_eq!(a, b, "{file} differs between identical runs");
    }
    println!("criterion 10 PASS: repeated cluster runs write byte-identical partition, summary, and embedding");
}
