//! Clustering of patients from a pairwise distance matrix: seeded k-medoids
//! with multi-restart consensus, cluster summaries with similar/non-similar
//! role labels, a classical-MDS 2-D embedding for plotting, and a centroid
//! k-means mode over frequency-table rows.

use std::collections::HashMap;
use std::fmt;
use std::io::Write;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::matrix::DistanceMatrix;
use crate::vector::FeatureVector;

const MAX_ITERATIONS: usize = 100;

/// A clustering of n points into k non-empty clusters around medoids.
///
/// Cluster indices are 1-based and canonical: clusters are numbered by the
/// ascending smallest member id, so two runs that find the same grouping
/// produce identical assignments.
#[derive(Clone, Debug, PartialEq)]
pub struct Partition {
    k: usize,
    assignment: Vec<u32>,
    medoids: Vec<usize>,
    cost: f64,
    iterations: usize,
    cost_per_iteration: Vec<f64>,
}

impl Partition {
    pub fn k(&self) -> usize {
        self.k
    }

    /// Cluster index in `1..=k` per point, in matrix id order.
    pub fn assignment(&self) -> &[u32] {
        &self.assignment
    }

    /// `medoids()[c]` is the point index of cluster `c + 1`'s medoid.
    pub fn medoids(&self) -> &[usize] {
        &self.medoids
    }

    /// Sum over points of the distance to their cluster medoid.
    pub fn cost(&self) -> f64 {
        self.cost
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    /// Cost after each assignment step; non-increasing.
    pub fn cost_trace(&self) -> &[f64] {
        &self.cost_per_iteration
    }
}

/// Draws `k` distinct indices from `0..n` (partial Fisher–Yates).
fn sample_indices(rng: &mut ChaCha8Rng, n: usize, k: usize) -> Vec<usize> {
    let mut pool: Vec<usize> = (0..n).collect();
    for t in 0..k {
        let j = t + rng.random_range(0..n - t);
        pool.swap(t, j);
    }
    pool.truncate(k);
    pool
}

/// Nearest-medoid assignment; ties go to the lowest cluster index, except
/// that a medoid always belongs to its own cluster (this keeps every cluster
/// non-empty even when duplicate points are both medoids).
fn assign(matrix: &DistanceMatrix, medoids: &[usize]) -> Vec<u32> {
    let mut assignment = vec![0u32; matrix.len()];
    for (c, &m) in medoids.iter().enumerate() {
        assignment[m] = (c + 1) as u32;
    }
    for (i, slot) in assignment.iter_mut().enumerate() {
        if *slot != 0 {
            continue;
        }
        let mut best = 0usize;
        for c in 1..medoids.len() {
            if matrix.get(i, medoids[c]) < matrix.get(i, medoids[best]) {
                best = c;
            }
        }
        *slot = (best + 1) as u32;
    }
    assignment
}

/// Per-cluster best medoid: the member minimizing the sum of distances to
/// the cluster; ties prefer the current medoid, then the lowest index.
fn update(matrix: &DistanceMatrix, assignment: &[u32], medoids: &[usize]) -> Vec<usize> {
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); medoids.len()];
    for (i, &c) in assignment.iter().enumerate() {
        members[(c - 1) as usize].push(i);
    }
    medoids
        .iter()
        .enumerate()
        .map(|(c, &current)| {
            let cluster = &members[c];
            let sum_for = |cand: usize| cluster.iter().map(|&j| matrix.get(cand, j)).sum::<f64>();
            let mut best = current;
            let mut best_sum = sum_for(current);
            for &cand in cluster {
                let s = sum_for(cand);
                if s < best_sum {
                    best = cand;
                    best_sum = s;
                }
            }
            best
        })
        .collect()
}

fn assignment_cost(matrix: &DistanceMatrix, assignment: &[u32], medoids: &[usize]) -> f64 {
    assignment
        .iter()
        .enumerate()
        .map(|(i, &c)| matrix.get(i, medoids[(c - 1) as usize]))
        .sum()
}

/// Canonical cluster order: ascending smallest member id; clusters with no
/// members (possible only for k-means) come last in original order.
fn canonical_order(assignment: &[u32], k: usize, ids: &[String]) -> Vec<usize> {
    let mut min_id: Vec<Option<&String>> = vec![None; k];
    for (i, &c) in assignment.iter().enumerate() {
        let slot = &mut min_id[(c - 1) as usize];
        if slot.is_none_or(|cur| ids[i] < *cur) {
            *slot = Some(&ids[i]);
        }
    }
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| match (min_id[a], min_id[b]) {
        (Some(x), Some(y)) => x.cmp(y),
        (Some(_), None) => std::cmp::Ordering::Less,
        (None, Some(_)) => std::cmp::Ordering::Greater,
        (None, None) => a.cmp(&b),
    });
    order
}

/// `relabel[old_cluster_0based] = new 1-based label`.
fn relabeling(assignment: &[u32], k: usize, ids: &[String]) -> (Vec<u32>, Vec<usize>) {
    let order = canonical_order(assignment, k, ids);
    let mut relabel = vec![0u32; k];
    for (new_c, &old_c) in order.iter().enumerate() {
        relabel[old_c] = (new_c + 1) as u32;
    }
    (relabel, order)
}

/// Seeded alternating k-medoids on a distance matrix.
///
/// Initial medoids are drawn from the seed; assignment and medoid-update
/// steps alternate until the medoid set stabilizes or 100 iterations pass.
/// The cost never increases between iterations.
pub fn kmedoids(matrix: &DistanceMatrix, k: usize, seed: u64) -> Result<Partition> {
    let n = matrix.len();
    if k < 1 || k > n {
        return Err(Error::InvalidParameter(format!(
            "k must be between 1 and the number of points ({n}), got {k}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // The medoid list is kept index-sorted so that "lowest cluster index" in
    // tie-breaking means "lowest medoid index", independent of draw order.
    let mut medoids = sample_indices(&mut rng, n, k);
    medoids.sort_unstable();
    let mut trace: Vec<f64> = Vec::new();
    let mut iterations = 0usize;
    let (assignment, cost) = loop {
        let assignment = assign(matrix, &medoids);
        let cost = assignment_cost(matrix, &assignment, &medoids);
        if let Some(&prev) = trace.last() {
            assert!(
                cost <= prev + 1e-9 * (1.0 + prev.abs()),
                "k-medoids cost increased: {prev} -> {cost}"
            );
        }
        trace.push(cost);
        iterations += 1;
        let mut next = update(matrix, &assignment, &medoids);
        next.sort_unstable();
        if next == medoids || iterations >= MAX_ITERATIONS {
            break (assignment, cost);
        }
        medoids = next;
    };

    let (relabel, order) = relabeling(&assignment, k, matrix.ids());
    Ok(Partition {
        k,
        assignment: assignment
            .iter()
            .map(|&c| relabel[(c - 1) as usize])
            .collect(),
        medoids: order.iter().map(|&old| medoids[old]).collect(),
        cost,
        iterations,
        cost_per_iteration: trace,
    })
}

/// Index of the winning run: most frequent assignment, then lowest cost,
/// then earliest run (lowest seed).
fn modal_run(assignments: &[&[u32]], costs: &[f64]) -> usize {
    let mut counts: HashMap<&[u32], usize> = HashMap::new();
    for a in assignments {
        *counts.entry(a).or_default() += 1;
    }
    let mut winner = 0usize;
    for idx in 1..assignments.len() {
        let (count, wcount) = (counts[assignments[idx]], counts[assignments[winner]]);
        if count > wcount || (count == wcount && costs[idx] < costs[winner]) {
            winner = idx;
        }
    }
    winner
}

/// Majority vote over `restarts` k-medoids runs seeded `base_seed`,
/// `base_seed + 1`, ...: the most frequent partition wins; ties break by
/// lowest cost, then lowest seed.
pub fn consensus_partition(
    matrix: &DistanceMatrix,
    k: usize,
    restarts: usize,
    base_seed: u64,
) -> Result<Partition> {
    if restarts < 1 {
        return Err(Error::InvalidParameter(format!(
            "restarts must be >= 1, got {restarts}"
        )));
    }
    let mut runs = Vec::with_capacity(restarts);
    for offset in 0..restarts {
        runs.push(kmedoids(matrix, k, base_seed.wrapping_add(offset as u64))?);
    }
    let assignments: Vec<&[u32]> = runs.iter().map(|r| r.assignment()).collect();
    let costs: Vec<f64> = runs.iter().map(|r| r.cost()).collect();
    let winner = modal_run(&assignments, &costs);
    Ok(runs.into_iter().nth(winner).expect("winner is in range"))
}

/// Role of a cluster in the population summary.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ClusterRole {
    /// Minimum mean within-cluster distance.
    Similar,
    /// Maximum mean within-cluster distance (among the rest).
    NonSimilar,
    Others,
}

impl fmt::Display for ClusterRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ClusterRole::Similar => "similar",
            ClusterRole::NonSimilar => "non-similar",
            ClusterRole::Others => "others",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClusterStats {
    /// 1-based cluster index.
    pub index: usize,
    pub count: usize,
    /// Mean distance over unordered member pairs; 0 for clusters of size < 2.
    pub mean_within: f64,
    pub role: ClusterRole,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClusterSummary {
    pub clusters: Vec<ClusterStats>,
    pub total: usize,
}

/// Per-cluster counts and mean within-cluster distances, with the min-mean
/// cluster labeled similar and the max-mean among the rest non-similar
/// (ties go to the lowest cluster index).
pub fn summarize_clusters(
    assignment: &[u32],
    k: usize,
    matrix: &DistanceMatrix,
) -> Result<ClusterSummary> {
    if k < 1 {
        return Err(Error::InvalidParameter("k must be >= 1".to_string()));
    }
    if assignment.len() != matrix.len() {
        return Err(Error::Format(format!(
            "assignment covers {} points but the matrix has {}",
            assignment.len(),
            matrix.len()
        )));
    }
    for &c in assignment {
        if c < 1 || c as usize > k {
            return Err(Error::Format(format!(
                "cluster index {c} outside 1..={k}"
            )));
        }
    }

    let mut counts = vec![0usize; k];
    let mut sums = vec![0.0f64; k];
    let mut pairs = vec![0usize; k];
    for (i, &ci) in assignment.iter().enumerate() {
        counts[(ci - 1) as usize] += 1;
        for (j, &cj) in assignment.iter().enumerate().skip(i + 1) {
            if ci == cj {
                sums[(ci - 1) as usize] += matrix.get(i, j);
                pairs[(ci - 1) as usize] += 1;
            }
        }
    }
    let means: Vec<f64> = (0..k)
        .map(|c| if pairs[c] == 0 { 0.0 } else { sums[c] / pairs[c] as f64 })
        .collect();

    let occupied: Vec<usize> = (0..k).filter(|&c| counts[c] > 0).collect();
    let similar = occupied
        .iter()
        .copied()
        .reduce(|best, c| if means[c] < means[best] { c } else { best });
    let non_similar = occupied
        .iter()
        .copied()
        .filter(|&c| Some(c) != similar)
        .reduce(|best, c| if means[c] > means[best] { c } else { best });

    let clusters = (0..k)
        .map(|c| ClusterStats {
            index: c + 1,
            count: counts[c],
            mean_within: means[c],
            role: if Some(c) == similar {
                ClusterRole::Similar
            } else if Some(c) == non_similar {
                ClusterRole::NonSimilar
            } else {
                ClusterRole::Others
            },
        })
        .collect();
    Ok(ClusterSummary {
        clusters,
        total: assignment.len(),
    })
}

/// Classical multidimensional scaling to 2-D.
///
/// Double-centers the squared-distance matrix, takes the top two eigenpairs,
/// and scales each eigenvector by the square root of its (non-negative-
/// clamped) eigenvalue. The sign of each coordinate column is fixed by
/// making its largest-magnitude entry positive, so the output is fully
/// deterministic.
pub fn embed_2d(matrix: &DistanceMatrix) -> Vec<(f64, f64)> {
    let n = matrix.len();
    let d2 = DMatrix::from_fn(n, n, |i, j| {
        let d = matrix.get(i, j);
        d * d
    });
    let row_mean: Vec<f64> = (0..n).map(|i| d2.row(i).sum() / n as f64).collect();
    let grand = row_mean.iter().sum::<f64>() / n as f64;
    let b = DMatrix::from_fn(n, n, |i, j| {
        -0.5 * (d2[(i, j)] - row_mean[i] - row_mean[j] + grand)
    });

    let eigen = SymmetricEigen::new(b);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| eigen.eigenvalues[y].total_cmp(&eigen.eigenvalues[x]));

    let mut coords = vec![(0.0, 0.0); n];
    for (axis, &e) in order.iter().take(2).enumerate() {
        let lambda = eigen.eigenvalues[e];
        if lambda <= 0.0 {
            continue;
        }
        let scale = lambda.sqrt();
        let col = eigen.eigenvectors.column(e);
        let mut lead = 0usize;
        for i in 1..n {
            if col[i].abs() > col[lead].abs() {
                lead = i;
            }
        }
        let flip = if col[lead] < 0.0 { -1.0 } else { 1.0 };
        for i in 0..n {
            let v = flip * scale * col[i];
            if axis == 0 {
                coords[i].0 = v;
            } else {
                coords[i].1 = v;
            }
        }
    }
    coords
}

/// A centroid k-means run over frequency rows (the literal k-means
/// counterpart to `kmedoids`, usable only for vector-space data).
#[derive(Clone, Debug, PartialEq)]
pub struct KMeansRun {
    k: usize,
    assignment: Vec<u32>,
    centroids: Vec<Vec<f64>>,
    cost: f64,
    iterations: usize,
    cost_per_iteration: Vec<f64>,
}

impl KMeansRun {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn assignment(&self) -> &[u32] {
        &self.assignment
    }

    pub fn centroids(&self) -> &[Vec<f64>] {
        &self.centroids
    }

    /// Within-cluster sum of squared Euclidean distances.
    pub fn cost(&self) -> f64 {
        self.cost
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    pub fn cost_trace(&self) -> &[f64] {
        &self.cost_per_iteration
    }
}

fn nearest_centroid(point: &[f64], centroids: &[Vec<f64>]) -> u32 {
    let sq = |centroid: &[f64]| -> f64 {
        point
            .iter()
            .zip(centroid)
            .map(|(a, b)| (a - b) * (a - b))
            .sum()
    };
    let mut best = 0usize;
    let mut best_d = sq(&centroids[0]);
    for (c, centroid) in centroids.iter().enumerate().skip(1) {
        let d = sq(centroid);
        if d < best_d {
            best = c;
            best_d = d;
        }
    }
    (best + 1) as u32
}

/// Seeded Lloyd k-means over integer feature rows. Initial centroids are `k`
/// distinct rows drawn from the seed; clusters that empty out keep their
/// previous centroid. Output labels are canonicalized like `kmedoids`.
pub fn kmeans(rows: &[FeatureVector], ids: &[String], k: usize, seed: u64) -> Result<KMeansRun> {
    let n = rows.len();
    if ids.len() != n {
        return Err(Error::Format(format!(
            "{} ids for {} rows",
            ids.len(),
            n
        )));
    }
    if k < 1 || k > n {
        return Err(Error::InvalidParameter(format!(
            "k must be between 1 and the number of rows ({n}), got {k}"
        )));
    }
    let dim = rows[0].len();
    if rows.iter().any(|r| r.len() != dim) {
        return Err(Error::DimensionMismatch {
            left: dim,
            right: rows.iter().map(|r| r.len()).find(|&l| l != dim).unwrap(),
        });
    }
    let points: Vec<Vec<f64>> = rows
        .iter()
        .map(|r| r.values().iter().map(|&v| f64::from(v)).collect())
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centroids: Vec<Vec<f64>> = sample_indices(&mut rng, n, k)
        .into_iter()
        .map(|i| points[i].clone())
        .collect();

    let mut trace: Vec<f64> = Vec::new();
    let mut iterations = 0usize;
    let mut previous: Option<Vec<u32>> = None;
    let (assignment, cost) = loop {
        let assignment: Vec<u32> = points
            .iter()
            .map(|p| nearest_centroid(p, &centroids))
            .collect();
        let cost: f64 = points
            .iter()
            .zip(&assignment)
            .map(|(p, &c)| {
                p.iter()
                    .zip(&centroids[(c - 1) as usize])
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
            })
            .sum();
        if let Some(&prev) = trace.last() {
            assert!(
                cost <= prev + 1e-9 * (1.0 + prev.abs()),
                "k-means cost increased: {prev} -> {cost}"
            );
        }
        trace.push(cost);
        iterations += 1;
        if previous.as_ref() == Some(&assignment) || iterations >= MAX_ITERATIONS {
            break (assignment, cost);
        }

        let mut sums = vec![vec![0.0f64; dim]; k];
        let mut counts = vec![0usize; k];
        for (p, &c) in points.iter().zip(&assignment) {
            counts[(c - 1) as usize] += 1;
            for (s, v) in sums[(c - 1) as usize].iter_mut().zip(p) {
                *s += v;
            }
        }
        for c in 0..k {
            if counts[c] > 0 {
                for (slot, s) in centroids[c].iter_mut().zip(&sums[c]) {
                    *slot = s / counts[c] as f64;
                }
            }
        }
        previous = Some(assignment);
    };

    let (relabel, order) = relabeling(&assignment, k, ids);
    Ok(KMeansRun {
        k,
        assignment: assignment
            .iter()
            .map(|&c| relabel[(c - 1) as usize])
            .collect(),
        centroids: order.iter().map(|&old| centroids[old].clone()).collect(),
        cost,
        iterations,
        cost_per_iteration: trace,
    })
}

/// Majority vote over k-means restarts, mirroring `consensus_partition`.
pub fn consensus_kmeans(
    rows: &[FeatureVector],
    ids: &[String],
    k: usize,
    restarts: usize,
    base_seed: u64,
) -> Result<KMeansRun> {
    if restarts < 1 {
        return Err(Error::InvalidParameter(format!(
            "restarts must be >= 1, got {restarts}"
        )));
    }
    let mut runs = Vec::with_capacity(restarts);
    for offset in 0..restarts {
        runs.push(kmeans(rows, ids, k, base_seed.wrapping_add(offset as u64))?);
    }
    let assignments: Vec<&[u32]> = runs.iter().map(|r| r.assignment()).collect();
    let costs: Vec<f64> = runs.iter().map(|r| r.cost()).collect();
    let winner = modal_run(&assignments, &costs);
    Ok(runs.into_iter().nth(winner).expect("winner is in range"))
}

/// Writes `patient_id,cluster,role` rows in id order.
pub fn write_partition_csv<W: Write>(
    writer: W,
    ids: &[String],
    assignment: &[u32],
    summary: &ClusterSummary,
) -> Result<()> {
    if ids.len() != assignment.len() {
        return Err(Error::Format(format!(
            "{} ids for {} assignments",
            ids.len(),
            assignment.len()
        )));
    }
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["patient_id", "cluster", "role"])?;
    for (id, &c) in ids.iter().zip(assignment) {
        let role = summary
            .clusters
            .get((c - 1) as usize)
            .map(|s| s.role.to_string())
            .ok_or_else(|| Error::Format(format!("cluster {c} missing from summary")))?;
        w.write_record([id.as_str(), &c.to_string(), &role])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `cluster,count,mean_within_distance,role` rows.
pub fn write_summary_csv<W: Write>(writer: W, summary: &ClusterSummary) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["cluster", "count", "mean_within_distance", "role"])?;
    for stats in &summary.clusters {
        w.write_record([
            stats.index.to_string(),
            stats.count.to_string(),
            format!("{:.6}", stats.mean_within),
            stats.role.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `patient_id,x,y,cluster` rows, coordinates at 6 decimals.
pub fn write_embedding_csv<W: Write>(
    writer: W,
    ids: &[String],
    coords: &[(f64, f64)],
    assignment: &[u32],
) -> Result<()> {
    if ids.len() != coords.len() || ids.len() != assignment.len() {
        return Err(Error::Format(
            "embedding output lengths do not match".to_string(),
        ));
    }
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["patient_id", "x", "y", "cluster"])?;
    for ((id, &(x, y)), &c) in ids.iter().zip(coords).zip(assignment) {
        w.write_record([
            id.as_str(),
            &format!("{x:.6}"),
            &format!("{y:.6}"),
            &c.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
