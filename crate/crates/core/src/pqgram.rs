//! pq-gram profiles and the pq-gram distance between ordered labeled trees.
//!
//! A pq-gram of a tree is a fixed-shape subtree: a *stem* of `p` nodes on an
//! ancestor path ending at an anchor node, plus a *base* of `q` consecutive
//! children of that anchor. To make every node of the input tree appear in at
//! least one gram, the tree is first extended with dummy `*` nodes: `p-1`
//! ancestors above the root, `q-1` dummies before the first and after the
//! last child of every non-leaf, and `q` dummy children under every leaf.
//!
//! The distance between two trees is computed from the bags (multisets) of
//! their gram label-tuples: bag union minus twice the bag intersection, where
//! union sums multiplicities and intersection takes the per-tuple minimum.

use std::collections::BTreeMap;
use std::io::Write;

use crate::error::{Error, Result};
use crate::tree::LabeledTree;

/// The reserved label for dummy nodes inserted by the extension step.
pub const DUMMY_LABEL: &str = "*";

/// Shape parameters of a pq-gram: stem length `p` and base width `q`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PQParams {
    p: usize,
    q: usize,
}

impl PQParams {
    pub fn new(p: usize, q: usize) -> Result<Self> {
        if p < 1 || q < 1 {
            return Err(Error::InvalidParameter(format!(
                "pq-gram parameters must be >= 1, got p={p}, q={q}"
            )));
        }
        Ok(PQParams { p, q })
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn q(&self) -> usize {
        self.q
    }

    /// Length of every gram tuple.
    pub fn tuple_len(&self) -> usize {
        self.p + self.q
    }
}

/// The bag of label-tuples of all pq-grams of one tree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PQGramProfile {
    params: PQParams,
    grams: BTreeMap<Vec<String>, u64>,
    total: u64,
}

impl PQGramProfile {
    pub fn params(&self) -> PQParams {
        self.params
    }

    /// Total bag cardinality (sum of multiplicities).
    pub fn cardinality(&self) -> u64 {
        self.total
    }

    /// Number of distinct tuples.
    pub fn distinct(&self) -> usize {
        self.grams.len()
    }

    pub fn multiplicity(&self, tuple: &[String]) -> u64 {
        self.grams.get(tuple).copied().unwrap_or(0)
    }

    /// Tuples with their multiplicities, in sorted tuple order.
    pub fn iter(&self) -> impl Iterator<Item = (&[String], u64)> {
        self.grams.iter().map(|(t, &m)| (t.as_slice(), m))
    }

    /// Writes the profile as CSV: `label_1,...,label_{p+q},multiplicity`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header: Vec<String> = (1..=self.params.tuple_len())
            .map(|i| format!("label_{i}"))
            .collect();
        header.push("multiplicity".to_string());
        w.write_record(&header)?;
        for (tuple, mult) in self.iter() {
            let mut record: Vec<&str> = tuple.iter().map(String::as_str).collect();
            let m = mult.to_string();
            record.push(&m);
            w.write_record(&record)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn check_no_dummy(tree: &LabeledTree) -> Result<()> {
    if tree.contains_label(DUMMY_LABEL) {
        return Err(Error::ReservedLabel);
    }
    Ok(())
}

/// Materializes the extended tree: `p-1` dummy ancestors above the root,
/// `q-1` dummies flanking each non-leaf's children, `q` dummy children per
/// leaf.
pub fn extend_tree(tree: &LabeledTree, params: PQParams) -> Result<LabeledTree> {
    check_no_dummy(tree)?;
    let mut extended = extend_node(tree, params.q);
    for _ in 1..params.p {
        extended = LabeledTree::new_unchecked(DUMMY_LABEL, vec![extended]);
    }
    Ok(extended)
}

fn extend_node(node: &LabeledTree, q: usize) -> LabeledTree {
    let dummy = || LabeledTree::new_unchecked(DUMMY_LABEL, Vec::new());
    let children = if node.is_leaf() {
        (0..q).map(|_| dummy()).collect()
    } else {
        let mut children = Vec::with_capacity(node.children().len() + 2 * (q - 1));
        children.extend((1..q).map(|_| dummy()));
        children.extend(node.children().iter().map(|c| extend_node(c, q)));
        children.extend((1..q).map(|_| dummy()));
        children
    };
    LabeledTree::new_unchecked(node.label(), children)
}

/// Builds the pq-gram profile of a tree.
///
/// Works directly on the original tree with an ancestor register and a
/// sliding child window, so the extended tree is never materialized. One
/// gram is emitted per window of `q` consecutive (dummy-padded) children of
/// every original node, which is exactly the set of grams anchored at
/// original nodes of the extended tree.
pub fn pqgram_profile(tree: &LabeledTree, params: PQParams) -> Result<PQGramProfile> {
    check_no_dummy(tree)?;
    let mut grams = BTreeMap::new();
    let mut total = 0u64;
    let mut path: Vec<&str> = Vec::new();
    collect_grams(tree, params, &mut path, &mut grams, &mut total);
    Ok(PQGramProfile {
        params,
        grams,
        total,
    })
}

fn collect_grams<'a>(
    node: &'a LabeledTree,
    params: PQParams,
    path: &mut Vec<&'a str>,
    grams: &mut BTreeMap<Vec<String>, u64>,
    total: &mut u64,
) {
    path.push(node.label());

    // Stem: the anchor and its p-1 nearest ancestors, padded with dummies
    // above the root, in ancestor-to-anchor order.
    let mut stem: Vec<&str> = Vec::with_capacity(params.p);
    let pad = params.p.saturating_sub(path.len());
    stem.extend(std::iter::repeat_n(DUMMY_LABEL, pad));
    stem.extend(path[path.len() - (params.p - pad)..].iter().copied());

    let mut emit = |base: &[&str]| {
        let tuple: Vec<String> = stem
            .iter()
            .chain(base.iter())
            .map(|s| s.to_string())
            .collect();
        *grams.entry(tuple).or_insert(0) += 1;
        *total += 1;
    };

    if node.is_leaf() {
        emit(&vec![DUMMY_LABEL; params.q]);
    } else {
        let mut padded: Vec<&str> = Vec::with_capacity(node.children().len() + 2 * (params.q - 1));
        padded.extend(std::iter::repeat_n(DUMMY_LABEL, params.q - 1));
        padded.extend(node.children().iter().map(|c| c.label()));
        padded.extend(std::iter::repeat_n(DUMMY_LABEL, params.q - 1));
        for window in padded.windows(params.q) {
            emit(window);
        }
    }

    for child in node.children() {
        collect_grams(child, params, path, grams, total);
    }
    path.pop();
}

/// Bag union and bag intersection cardinalities of two profiles.
fn bag_sizes(a: &PQGramProfile, b: &PQGramProfile) -> (u64, u64) {
    let union = a.total + b.total;
    let mut intersection = 0u64;
    for (tuple, mult) in a.grams.iter() {
        if let Some(other) = b.grams.get(tuple) {
            intersection += (*mult).min(*other);
        }
    }
    (union, intersection)
}

/// Raw pq-gram distance between two profiles: `|I1 (+) I2| - 2|I1 (^) I2|`.
///
/// Both profiles must have been built with the same parameters.
pub fn profile_distance(a: &PQGramProfile, b: &PQGramProfile) -> u64 {
    assert_eq!(
        a.params, b.params,
        "pq-gram profiles built with different parameters"
    );
    let (union, intersection) = bag_sizes(a, b);
    union - 2 * intersection
}

/// Normalized pq-gram distance in `[0, 1]`, defined as 0 when the
/// denominator vanishes (identical profiles).
pub fn profile_distance_norm(a: &PQGramProfile, b: &PQGramProfile) -> f64 {
    profile_distances(a, b).1
}

/// Raw and normalized pq-gram distances computed in one pass.
pub fn profile_distances(a: &PQGramProfile, b: &PQGramProfile) -> (u64, f64) {
    assert_eq!(
        a.params, b.params,
        "pq-gram profiles built with different parameters"
    );
    let (union, intersection) = bag_sizes(a, b);
    let raw = union - 2 * intersection;
    let denominator = union - intersection;
    let norm = if denominator == 0 {
        0.0
    } else {
        raw as f64 / denominator as f64
    };
    (raw, norm)
}

/// Raw pq-gram distance between two trees.
pub fn pqgram_distance(t1: &LabeledTree, t2: &LabeledTree, params: PQParams) -> Result<u64> {
    let a = pqgram_profile(t1, params)?;
    let b = pqgram_profile(t2, params)?;
    Ok(profile_distance(&a, &b))
}

/// Normalized pq-gram distance between two trees.
pub fn pqgram_distance_norm(t1: &LabeledTree, t2: &LabeledTree, params: PQParams) -> Result<f64> {
    let a = pqgram_profile(t1, params)?;
    let b = pqgram_profile(t2, params)?;
    Ok(profile_distance_norm(&a, &b))
}
