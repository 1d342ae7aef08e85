//! Fixture builders shared by the benchmark targets.

use medmetrics::{generate, load_records, PatientDataset, SynthParams};

/// A deterministic synthetic dataset sized for benchmarking.
pub fn synthetic_dataset(patients: usize, seed: u64) -> PatientDataset {
    let synth = generate(&SynthParams {
        patients,
        codes: 30,
        groups: 3,
        seed,
    })
    .expect("valid parameters");
    load_records(synth.csv.as_bytes(), true)
        .expect("generator output ingests cleanly")
        .0
}
