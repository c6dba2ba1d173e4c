//! Qubit-subset labels. Subsets are bitmasks with qubit `i` (0-based) at bit
//! `i`; the printed label lists qubit 1 leftmost, so mask `0b0011` on four
//! qubits prints as `1100`.

use crate::error::{Error, Result};

pub fn label(mask: usize, n: usize) -> String {
    (0..n).map(|i| if mask >> i & 1 == 1 { '1' } else { '0' }).collect()
}

pub fn parse_label(s: &str) -> Result<usize> {
    s.chars().enumerate().try_fold(0usize, |m, (i, c)| match c {
        '0' => Ok(m),
        '1' => Ok(m | 1 << i),
        _ => Err(Error::InvalidParameter {
            field: "subset".into(),
            reason: format!("`{s}` is not a 0/1 bitstring"),
        }),
    })
}

/// Subset size |S|.
pub fn weight(mask: usize) -> u32 {
    mask.count_ones()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        for m in 0..16 {
            assert_eq!(parse_label(&label(m, 4)).unwrap(), m);
        }
        assert_eq!(label(0b0011, 4), "1100");
        assert!(parse_label("10x0").is_err());
    }
}
