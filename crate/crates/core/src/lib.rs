//! Distance metrics, pairwise matrices and clustering for hierarchical
//! patient-event records.
//!
//! The pipeline: event rows are ingested into per-patient labeled trees and
//! a frequency table ([`ingest`]); six metrics compare patients — pq-gram
//! ([`pqgram`]), tree edit distance ([`edit`]), and Euclidean / Minkowski /
//! Manhattan / Hamming over frequency rows ([`vector`]); all-pairs matrices
//! are normalized and reported ([`matrix`]); and partitions come from seeded
//! k-medoids with multi-restart consensus ([`cluster`]).

pub mod cluster;
pub mod edit;
pub mod error;
pub mod ingest;
pub mod matrix;
pub mod pqgram;
pub mod synth;
pub mod tree;
pub mod vector;

pub use cluster::{
    consensus_kmeans, consensus_partition, embed_2d, kmeans, kmedoids, summarize_clusters,
    write_embedding_csv, write_partition_csv, write_summary_csv, ClusterRole, ClusterStats,
    ClusterSummary, KMeansRun, Partition,
};
pub use edit::{ted, ted_norm};
pub use error::{Error, Result};
pub use ingest::{
    build_frequency_table, build_tree, load_records, truncate_code, FrequencyTable, IngestSummary,
    Patient, PatientDataset, Sex,
};
pub use matrix::{
    compute_pairwise, cross_metric_report, minmax_normalize, pairwise_distances, smallest_pairs,
    CrossMetricReport, CrossMetricRow, DistanceMatrix, MetricSpec, NormalizeMode, PairDistance,
    PairwiseRun,
};
pub use pqgram::{
    extend_tree, pqgram_distance, pqgram_distance_norm, pqgram_profile, profile_distance,
    profile_distance_norm, profile_distances, PQGramProfile, PQParams, DUMMY_LABEL,
};
pub use synth::{generate, SynthOutput, SynthParams};
pub use tree::{parse_tree, read_trees, serialize_tree, write_trees, LabeledTree};
pub use vector::{euclidean, hamming, hamming_str, manhattan, minkowski, FeatureVector};
