//! Tree edit distance between ordered labeled trees (Zhang–Shasha).
//!
//! Unit cost model: inserting a node, deleting a node, and relabeling a node
//! all cost 1; relabeling to an identical label costs 0. Runs in
//! O(n1*n2*min(d1,l1)*min(d2,l2)) time and O(n1*n2) space.

use crate::tree::LabeledTree;

/// Postorder-indexed view of one tree (1-based, as is conventional for this
/// algorithm; index 0 is unused).
struct PostOrder<'a> {
    labels: Vec<&'a str>,
    /// `lld[i]`: postorder index of the leftmost leaf descendant of node `i`.
    lld: Vec<usize>,
    /// LR-keyroots in ascending order: nodes with no proper ancestor sharing
    /// their leftmost leaf (the root plus every node with a left sibling).
    keyroots: Vec<usize>,
}

impl<'a> PostOrder<'a> {
    fn new(tree: &'a LabeledTree) -> Self {
        let n = tree.size();
        let mut labels = vec![""; n + 1];
        let mut lld = vec![0usize; n + 1];
        let mut next = 1usize;
        Self::visit(tree, &mut labels, &mut lld, &mut next);

        // A node is a keyroot iff no later node shares its leftmost leaf;
        // scanning from the right keeps the first (deepest) holder only.
        let mut seen = vec![false; n + 1];
        let mut keyroots = Vec::new();
        for i in (1..=n).rev() {
            if !seen[lld[i]] {
                seen[lld[i]] = true;
                keyroots.push(i);
            }
        }
        keyroots.reverse();
        PostOrder {
            labels,
            lld,
            keyroots,
        }
    }

    /// Assigns postorder indices; returns the index given to `node`.
    fn visit(
        node: &'a LabeledTree,
        labels: &mut [&'a str],
        lld: &mut [usize],
        next: &mut usize,
    ) -> usize {
        let mut first_child = None;
        for child in node.children() {
            let ci = Self::visit(child, labels, lld, next);
            first_child.get_or_insert(ci);
        }
        let index = *next;
        *next += 1;
        labels[index] = node.label();
        lld[index] = match first_child {
            Some(ci) => lld[ci],
            None => index,
        };
        index
    }

    fn len(&self) -> usize {
        self.labels.len() - 1
    }
}

/// Tree edit distance with unit costs.
pub fn ted(t1: &LabeledTree, t2: &LabeledTree) -> u64 {
    let a = PostOrder::new(t1);
    let b = PostOrder::new(t2);
    let (n, m) = (a.len(), b.len());

    // treedist[i][j]: distance between the subtrees rooted at i and j.
    let mut treedist = vec![vec![0u64; m + 1]; n + 1];
    // Forest distance scratch, reused across keyroot pairs.
    let mut fd = vec![vec![0u64; m + 2]; n + 2];

    for &i in &a.keyroots {
        for &j in &b.keyroots {
            forest_distance(&a, &b, i, j, &mut fd, &mut treedist);
        }
    }
    treedist[n][m]
}

fn forest_distance(
    a: &PostOrder,
    b: &PostOrder,
    i: usize,
    j: usize,
    fd: &mut [Vec<u64>],
    treedist: &mut [Vec<u64>],
) {
    let li = a.lld[i];
    let lj = b.lld[j];

    fd[li - 1][lj - 1] = 0;
    for x in li..=i {
        fd[x][lj - 1] = fd[x - 1][lj - 1] + 1; // delete x
    }
    for y in lj..=j {
        fd[li - 1][y] = fd[li - 1][y - 1] + 1; // insert y
    }

    for x in li..=i {
        for y in lj..=j {
            let delete = fd[x - 1][y] + 1;
            let insert = fd[x][y - 1] + 1;
            if a.lld[x] == li && b.lld[y] == lj {
                // Both prefixes are whole subtrees: relabel is allowed.
                let relabel_cost = u64::from(a.labels[x] != b.labels[y]);
                let relabel = fd[x - 1][y - 1] + relabel_cost;
                let d = delete.min(insert).min(relabel);
                fd[x][y] = d;
                treedist[x][y] = d;
            } else {
                // Map the subtree pair as a unit via the memoized distance.
                let split = fd[a.lld[x] - 1][b.lld[y] - 1] + treedist[x][y];
                fd[x][y] = delete.min(insert).min(split);
            }
        }
    }
}

/// Tree edit distance normalized by the sum of the two tree sizes.
///
/// Always in `[0, 1)`: even mapping nothing costs `size1 + size2 - 0`, and at
/// least the two roots can be mapped for at most cost 1.
pub fn ted_norm(t1: &LabeledTree, t2: &LabeledTree) -> f64 {
    ted(t1, t2) as f64 / (t1.size() + t2.size()) as f64
}
