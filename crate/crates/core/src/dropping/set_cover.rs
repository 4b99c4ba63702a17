use std::collections::BTreeSet;

use super::{DemandVector, TransmissionVector};
use crate::error::{Error, Result};
use crate::rhythmic::PeriodicRef;

/// Packet dropping instance equivalent to covering `0..n` with `subsets`: one rhythmic
/// window per element needing one slot, one periodic packet per subset.
pub fn from_set_cover(n: usize, subsets: &[Vec<usize>]) -> Result<(DemandVector, Vec<TransmissionVector>)> {
    let mut union = BTreeSet::new();
    for (j, s) in subsets.iter().enumerate() {
        if s.is_empty() {
            return Err(Error::SetCover(format!("subset {j} is empty")));
        }
        for &x in s {
            if x >= n {
                return Err(Error::SetCover(format!("element {x} outside universe of {n}")));
            }
            union.insert(x);
        }
    }
    if union.len() != n {
        return Err(Error::SetCover(format!("subsets cover {} of {n} elements", union.len())));
    }
    let vectors = subsets
        .iter()
        .enumerate()
        .map(|(j, s)| {
            let mut epsilon = vec![0u32; n];
            for &x in s {
                epsilon[x] = 1;
            }
            TransmissionVector { packet: PeriodicRef { task: j + 1, packet: 0 }, epsilon }
        })
        .collect();
    Ok((DemandVector::from_extra(vec![1; n]), vectors))
}
