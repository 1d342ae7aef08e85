//! Seeded synthetic event-record generator with planted patient groups.
//!
//! Patients are split round-robin into `groups` groups. Each group owns a
//! disjoint slice of the code universe and a disjoint age band, so
//! within-group records overlap heavily while cross-group records share
//! almost nothing — the planted grouping is recoverable by any of the
//! distance metrics. Output is a records CSV (same format `load_records`
//! reads) plus the planted group label per patient; both are fully
//! determined by the seed.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Base-36 two-digit suffix space for code labels (`E00`..`EZZ`).
const MAX_CODES: usize = 36 * 36;

/// Core codes every member of a group receives.
const CORE_CODES_PER_GROUP: usize = 4;

#[derive(Clone, Copy, Debug)]
pub struct SynthParams {
    pub patients: usize,
    pub codes: usize,
    pub groups: usize,
    pub seed: u64,
}

#[derive(Clone, Debug)]
pub struct SynthOutput {
    /// Records CSV, header included, `\n` line endings.
    pub csv: String,
    /// Planted group per patient, in patient-id order.
    pub planted: Vec<u32>,
}

fn code_label(index: usize) -> String {
    const DIGITS: &[u8; 36] = b"0123456789ABCDEFGHIJKLMNOPQRSTUVWXYZ";
    format!(
        "E{}{}",
        DIGITS[index / 36] as char,
        DIGITS[index % 36] as char
    )
}

/// First age of a group's band, spread over the 2..=16 range.
fn base_age(group: usize, groups: usize) -> u32 {
    if groups >= 2 {
        (2 + group * 14 / (groups - 1)) as u32
    } else {
        8
    }
}

pub fn generate(params: &SynthParams) -> Result<SynthOutput> {
    if params.patients < 1 || params.codes < 1 || params.groups < 1 {
        return Err(Error::InvalidParameter(
            "patients, codes and groups must all be >= 1".to_string(),
        ));
    }
    if params.codes > MAX_CODES {
        return Err(Error::InvalidParameter(format!(
            "at most {MAX_CODES} distinct codes are supported, got {}",
            params.codes
        )));
    }
    if params.codes < params.groups {
        return Err(Error::InvalidParameter(format!(
            "need at least one code per group: {} codes < {} groups",
            params.codes, params.groups
        )));
    }

    // pools[g]: the code indices owned by group g (round-robin, disjoint).
    let mut pools: Vec<Vec<usize>> = vec![Vec::new(); params.groups];
    for code in 0..params.codes {
        pools[code % params.groups].push(code);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut csv = String::from("patient_id,sex,age,event_code\n");
    let mut planted = Vec::with_capacity(params.patients);

    for i in 0..params.patients {
        let group = i % params.groups;
        planted.push(group as u32);
        let id = format!("p{i:05}");
        let sex = rng.random_range(1..=2u32);

        let base = base_age(group, params.groups);
        let ages: Vec<u32> = match rng.random_range(0..10u32) {
            0..=6 => vec![base],
            7..=8 => vec![base + 1],
            _ => vec![base, base + 1],
        };

        let pool = &pools[group];
        let core = &pool[..pool.len().min(CORE_CODES_PER_GROUP)];
        let mut occurrences: Vec<usize> = Vec::new();
        for &code in core {
            let count = 2 + usize::from(rng.random_range(0..4u32) == 0);
            occurrences.extend(std::iter::repeat_n(code, count));
        }
        // Occasional extra occurrence of a random code from the group pool.
        if rng.random_range(0..5u32) == 0 {
            occurrences.push(pool[rng.random_range(0..pool.len())]);
        }
        occurrences.sort_unstable();

        for (row, code) in occurrences.iter().enumerate() {
            let age = ages[row % ages.len()];
            writeln!(csv, "{id},{sex},{age},{}", code_label(*code)).expect("write to String");
        }
    }

    Ok(SynthOutput { csv, planted })
}
