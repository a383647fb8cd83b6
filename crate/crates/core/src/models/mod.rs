//! Built-in models: toric-code patches and fusion data.

pub mod fusion;
pub mod pauli;
pub mod toric;

use serde::Serialize;

use crate::error::Result;
use fusion::{fusion_signature, FusionData};
use toric::{expected_boundary_signature, toric_boundary_algebra};

#[derive(Clone, Debug, Serialize)]
pub struct SignatureMatch {
    pub length: usize,
    pub path_length: usize,
    pub fusion_signature: Vec<u128>,
    pub toric_signature: Vec<usize>,
    pub matches: bool,
}

/// End(A^{L/2}) for Vec(ℤ₂) against 𝒜_L for even L.
pub fn vec_z2_toric_match(length: usize) -> Result<SignatureMatch> {
    let path_length = length / 2;
    let fusion_signature = fusion_signature(&FusionData::vec_z2(), path_length)?;
    let toric_signature = toric_boundary_algebra(length)?.signature;
    let matches = length.is_multiple_of(2)
        && toric_signature == expected_boundary_signature(length)
        && fusion_signature.iter().map(|&x| x as usize).eq(toric_signature.iter().copied());
    Ok(SignatureMatch { length, path_length, fusion_signature, toric_signature, matches })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vec_z2_paths_match_boundary_algebras() {
        for l in [2, 4, 6] {
            assert!(vec_z2_toric_match(l).unwrap().matches);
        }
    }
}
