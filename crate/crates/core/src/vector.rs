//! Distances between equal-length numeric vectors, plus Hamming distance
//! over arbitrary comparable sequences.

use crate::error::{Error, Result};

/// A row of non-negative integer features (frequency counts and one-hot
/// indicators).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FeatureVector(Vec<u32>);

impl FeatureVector {
    pub fn new(values: Vec<u32>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidParameter(
                "feature vector must not be empty".to_string(),
            ));
        }
        Ok(FeatureVector(values))
    }

    pub fn values(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

fn check_dims(a: &FeatureVector, b: &FeatureVector) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    Ok(())
}

fn diffs<'a>(a: &'a FeatureVector, b: &'a FeatureVector) -> impl Iterator<Item = f64> + 'a {
    a.values()
        .iter()
        .zip(b.values())
        .map(|(&x, &y)| f64::from(x) - f64::from(y))
}

/// Euclidean (L2) distance.
pub fn euclidean(a: &FeatureVector, b: &FeatureVector) -> Result<f64> {
    check_dims(a, b)?;
    Ok(diffs(a, b).map(|d| d * d).sum::<f64>().sqrt())
}

/// Minkowski distance of order `p >= 1`: `(sum |x_i - y_i|^p)^(1/p)`.
pub fn minkowski(a: &FeatureVector, b: &FeatureVector, p: f64) -> Result<f64> {
    check_dims(a, b)?;
    if p < 1.0 || !p.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "minkowski order must be a finite number >= 1, got {p}"
        )));
    }
    let sum: f64 = diffs(a, b).map(|d| d.abs().powf(p)).sum();
    Ok(sum.powf(1.0 / p))
}

/// Manhattan (L1, city-block) distance.
pub fn manhattan(a: &FeatureVector, b: &FeatureVector) -> Result<f64> {
    check_dims(a, b)?;
    Ok(diffs(a, b).map(f64::abs).sum())
}

/// Hamming distance: the number of positions at which two equal-length
/// sequences differ.
pub fn hamming<T: PartialEq>(a: &[T], b: &[T]) -> Result<u64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    Ok(a.iter().zip(b).filter(|(x, y)| x != y).count() as u64)
}

/// Hamming distance between two strings, compared char by char.
pub fn hamming_str(a: &str, b: &str) -> Result<u64> {
    let ca: Vec<char> = a.chars().collect();
    let cb: Vec<char> = b.chars().collect();
    hamming(&ca, &cb)
}
