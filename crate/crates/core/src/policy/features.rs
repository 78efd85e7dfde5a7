use crate::error::{Error, Result};

/// Learner input: an intercept followed by indicator entries.
///
/// Binary student features use two indicators per feature (one per value),
/// so `F` features give dimension `1 + 2F`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector(Vec<f64>);

impl FeatureVector {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// Wraps an arbitrary vector. Used for hand-built states in tests and
    /// for encodings other than the binary indicator pairs.
    pub fn from_raw(entries: Vec<f64>) -> Self {
        Self(entries)
    }
}

impl AsRef<[f64]> for FeatureVector {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

/// Dimension of the encoding for `num_features` binary features.
pub fn encoded_dim(num_features: usize) -> usize {
    1 + 2 * num_features
}

/// Intercept plus an indicator pair per binary feature: `(1, 0)` for value 0,
/// `(0, 1)` for value 1.
pub fn encode_features(raw: &[u8]) -> Result<FeatureVector> {
    let mut out = Vec::with_capacity(encoded_dim(raw.len()));
    out.push(1.0);
    for (j, &v) in raw.iter().enumerate() {
        match v {
            0 => out.extend_from_slice(&[1.0, 0.0]),
            1 => out.extend_from_slice(&[0.0, 1.0]),
            other => {
                return Err(Error::InvalidArgument(format!(
                    "feature {j} has non-binary value {other}"
                )))
            }
        }
    }
    Ok(FeatureVector(out))
}

/// Intercept plus a one-hot block over quartiles 1..=4 (dimension 5).
pub fn encode_quartile(quartile: u8) -> Result<FeatureVector> {
    if !(1..=4).contains(&quartile) {
        return Err(Error::InvalidArgument(format!(
            "quartile must be in 1..=4, got {quartile}"
        )));
    }
    let mut out = vec![0.0; 5];
    out[0] = 1.0;
    out[quartile as usize] = 1.0;
    Ok(FeatureVector(out))
}
