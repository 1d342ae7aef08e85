//! Independent reference implementations used only to cross-check the
//! optimized library code: a profile builder that literally materializes the
//! extended tree, and an exhaustive search over valid tree mappings.

use std::collections::BTreeMap;

use medmetrics::{extend_tree, LabeledTree, PQParams, DUMMY_LABEL};

/// Builds the pq-gram bag by walking the materialized extended tree: every
/// non-dummy node contributes its last-p ancestor path (itself included) as
/// the stem and each q-window of its extended children as the base.
pub fn naive_pqgram_profile(tree: &LabeledTree, params: PQParams) -> BTreeMap<Vec<String>, u64> {
    let extended = extend_tree(tree, params).expect("input labels were already validated");
    let mut bag = BTreeMap::new();
    let mut path = Vec::new();
    collect(&extended, params, &mut path, &mut bag);
    bag
}

fn collect(
    node: &LabeledTree,
    params: PQParams,
    path: &mut Vec<String>,
    bag: &mut BTreeMap<Vec<String>, u64>,
) {
    path.push(node.label().to_string());
    if node.label() != DUMMY_LABEL {
        assert!(path.len() >= params.p(), "extended tree is at least p deep");
        let stem = &path[path.len() - params.p()..];
        let kids: Vec<&str> = node.children().iter().map(|c| c.label()).collect();
        for window in kids.windows(params.q()) {
            let mut tuple = stem.to_vec();
            tuple.extend(window.iter().map(|s| s.to_string()));
            *bag.entry(tuple).or_insert(0) += 1;
        }
    }
    for child in node.children() {
        collect(child, params, path, bag);
    }
    path.pop();
}

/// Bag distance: |union| - 2|intersection|, with the union counted as the
/// multiplicity sum and the intersection as the per-tuple minimum.
pub fn bag_distance(a: &BTreeMap<Vec<String>, u64>, b: &BTreeMap<Vec<String>, u64>) -> u64 {
    let total_a: u64 = a.values().sum();
    let total_b: u64 = b.values().sum();
    let intersection: u64 = a
        .iter()
        .map(|(tuple, &m)| m.min(b.get(tuple).copied().unwrap_or(0)))
        .sum();
    total_a + total_b - 2 * intersection
}

/// Exhaustive minimum edit cost between two trees: tries every one-to-one,
/// order- and ancestry-preserving node mapping and charges unit costs for
/// the unmapped nodes plus label mismatches. Feasible only for tiny trees.
pub fn brute_force_ted(t1: &LabeledTree, t2: &LabeledTree) -> u64 {
    let (labels1, lld1) = postorder(t1);
    let (labels2, lld2) = postorder(t2);
    let mut search = Search {
        labels1: &labels1,
        lld1: &lld1,
        labels2: &labels2,
        lld2: &lld2,
        chosen: Vec::new(),
        relabels: 0,
        best: (labels1.len() + labels2.len()) as u64,
    };
    search.run(0, 0);
    search.best
}

struct Search<'a> {
    labels1: &'a [String],
    lld1: &'a [usize],
    labels2: &'a [String],
    lld2: &'a [usize],
    chosen: Vec<(usize, usize)>,
    relabels: u64,
    best: u64,
}

impl Search<'_> {
    fn run(&mut self, i: usize, j_min: usize) {
        let (n1, n2) = (self.labels1.len(), self.labels2.len());
        if i == n1 {
            let mapped = self.chosen.len() as u64;
            let cost = (n1 as u64 - mapped) + (n2 as u64 - mapped) + self.relabels;
            self.best = self.best.min(cost);
            return;
        }
        // Admissible lower bound on any completion: nodes already passed over
        // stay unmapped, and the remaining-size imbalance forces more.
        let mapped = self.chosen.len();
        let lower = (i - mapped) as u64
            + (j_min - mapped) as u64
            + self.relabels
            + ((n1 - i) as i64 - (n2 - j_min) as i64).unsigned_abs();
        if lower >= self.best {
            return;
        }
        // Leave node i unmapped (deletion).
        self.run(i + 1, j_min);
        // Map node i to each later-compatible node of the second tree.
        // Increasing i and j keep the mapping one-to-one and order-preserving;
        // ancestry preservation still has to be checked pair by pair.
        for j in j_min..n2 {
            let consistent = self.chosen.iter().all(|&(pi, pj)| {
                (self.lld1[i] <= pi) == (self.lld2[j] <= pj)
            });
            if !consistent {
                continue;
            }
            let relabel = u64::from(self.labels1[i] != self.labels2[j]);
            self.chosen.push((i, j));
            self.relabels += relabel;
            self.run(i + 1, j + 1);
            self.relabels -= relabel;
            self.chosen.pop();
        }
    }
}

/// Postorder labels plus each node's leftmost-leaf-descendant index; the
/// standard representation for checking ancestry in postorder numbering.
fn postorder(tree: &LabeledTree) -> (Vec<String>, Vec<usize>) {
    fn visit(node: &LabeledTree, labels: &mut Vec<String>, lld: &mut Vec<usize>) -> usize {
        let mut first_child = None;
        for child in node.children() {
            let ci = visit(child, labels, lld);
            first_child.get_or_insert(ci);
        }
        let index = labels.len();
        labels.push(node.label().to_string());
        lld.push(match first_child {
            Some(ci) => lld[ci],
            None => index,
        });
        index
    }
    let mut labels = Vec::new();
    let mut lld = Vec::new();
    visit(tree, &mut labels, &mut lld);
    (labels, lld)
}

#[cfg(test)]
mod tests {
    use super::*;
    use medmetrics::parse_tree;

    #[test]
    fn brute_force_matches_hand_examples() {
        let a = parse_tree("{a{b}}").unwrap();
        let b = parse_tree("{a{c}}").unwrap();
        assert_eq!(brute_force_ted(&a, &a), 0);
        assert_eq!(brute_force_ted(&a, &b), 1);
        let c = parse_tree("{a}").unwrap();
        assert_eq!(brute_force_ted(&a, &c), 1);
        let d = parse_tree("{x{y{z}}}").unwrap();
        assert_eq!(brute_force_ted(&c, &d), 3);
    }

    #[test]
    fn naive_profile_matches_tiny_hand_bag() {
        let tree = parse_tree("{a{b}{c}}").unwrap();
        let bag = naive_pqgram_profile(&tree, PQParams::new(1, 1).unwrap());
        let tuples: Vec<(Vec<String>, u64)> =
            bag.into_iter().collect();
        let expect = |v: &[&str]| v.iter().map(|s| s.to_string()).collect::<Vec<_>>();
        assert_eq!(
            tuples,
            vec![
                (expect(&["a", "b"]), 1),
                (expect(&["a", "c"]), 1),
                (expect(&["b", "*"]), 1),
                (expect(&["c", "*"]), 1),
            ]
        );
    }
}
