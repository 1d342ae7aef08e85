//! Seeded random data and the adjusted Rand index for the acceptance suite.

use std::collections::HashMap;

use medmetrics::{FeatureVector, LabeledTree};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Builds a random ordered tree with 1..=max_nodes nodes: each new node
/// attaches under a uniformly chosen earlier node.
pub fn random_tree(rng: &mut ChaCha8Rng, max_nodes: usize, labels: &[&str]) -> LabeledTree {
    let n = rng.random_range(1..=max_nodes);
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); n];
    for node in 1..n {
        let parent = rng.random_range(0..node);
        children[parent].push(node);
    }
    let picked: Vec<&str> = (0..n)
        .map(|_| labels[rng.random_range(0..labels.len())])
        .collect();
    build(0, &children, &picked)
}

fn build(node: usize, children: &[Vec<usize>], labels: &[&str]) -> LabeledTree {
    let kids = children[node]
        .iter()
        .map(|&c| build(c, children, labels))
        .collect();
    LabeledTree::new(labels[node], kids).expect("labels are valid")
}

/// Two equal-length random count vectors.
pub fn random_vector_pair(rng: &mut ChaCha8Rng, max_len: usize) -> (FeatureVector, FeatureVector) {
    let len = rng.random_range(1..=max_len);
    let draw = |rng: &mut ChaCha8Rng| {
        FeatureVector::new((0..len).map(|_| rng.random_range(0..=100u32)).collect())
            .expect("non-empty")
    };
    (draw(rng), draw(rng))
}

/// Adjusted Rand index between two labelings of the same points; 1.0 means
/// identical partitions, ~0 means chance-level agreement.
pub fn adjusted_rand_index(a: &[u32], b: &[u32]) -> f64 {
    assert_eq!(a.len(), b.len(), "labelings must cover the same points");
    let n = a.len() as u64;
    let mut table: HashMap<(u32, u32), u64> = HashMap::new();
    let mut rows: HashMap<u32, u64> = HashMap::new();
    let mut cols: HashMap<u32, u64> = HashMap::new();
    for (&x, &y) in a.iter().zip(b) {
        *table.entry((x, y)).or_insert(0) += 1;
        *rows.entry(x).or_insert(0) += 1;
        *cols.entry(y).or_insert(0) += 1;
    }
    let comb2 = |x: u64| (x * x.saturating_sub(1)) as f64 / 2.0;
    let sum_cells: f64 = table.values().map(|&c| comb2(c)).sum();
    let sum_rows: f64 = rows.values().map(|&c| comb2(c)).sum();
    let sum_cols: f64 = cols.values().map(|&c| comb2(c)).sum();
    let expected = sum_rows * sum_cols / comb2(n);
    let max_index = 0.5 * (sum_rows + sum_cols);
    if (max_index - expected).abs() < f64::EPSILON {
        return 1.0;
    }
    (sum_cells - expected) / (max_index - expected)
}

#[cfg(test)]
mod tests {
    use super::adjusted_rand_index;

    #[test]
    fn ari_is_one_for_identical_partitions() {
        assert_eq!(adjusted_rand_index(&[1, 1, 2, 2], &[5, 5, 9, 9]), 1.0);
    }

    #[test]
    fn ari_known_value() {
        // By hand: cell pair-counts 1+0+3, rows 3+3, cols 1+6, n=6, so
        // ARI = (4 - 6*7/15) / ((6+7)/2 - 6*7/15) = 1.2/3.7.
        let a = [1, 1, 1, 2, 2, 2];
        let b = [1, 1, 2, 2, 2, 2];
        let ari = adjusted_rand_index(&a, &b);
        assert!((ari - 1.2 / 3.7).abs() < 1e-12, "{ari}");
    }

    #[test]
    fn ari_is_label_invariant() {
        let a = [1, 2, 3, 1, 2, 3];
        let b = [0, 7, 4, 0, 7, 4];
        assert_eq!(adjusted_rand_index(&a, &b), 1.0);
    }
}
