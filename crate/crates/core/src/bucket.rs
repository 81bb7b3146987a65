//! Bucket sizing for combining leaky OTs and AND triples.

/// Bucket size used by the reference benchmarks.
pub const DEFAULT_BUCKET: usize = 4;

/// Statistical security `(log2(ell) + 1) * (bucket - 1)` reached when `ell`
/// outputs are each combined from `bucket` leaky inputs.
pub fn security_bits(ell: usize, bucket: usize) -> f64 {
    ((ell.max(1) as f64).log2() + 1.0) * (bucket.saturating_sub(1)) as f64
}

/// Smallest bucket with `(log2(ell) + 1) * (bucket - 1) >= psi`.
pub fn bucket_size(ell: usize, psi: usize) -> usize {
    let mut b = 1;
    while security_bits(ell, b) + 1e-9 < psi as f64 {
        b += 1;
    }
    b
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn worked_example() {
        assert_eq!(bucket_size(1024, 40), 5);
    }

    #[test]
    fn exact_boundary_counts_as_reached() {
        // log2(1024) + 1 = 11, and 11 * 4 = 44.
        assert_eq!(bucket_size(1024, 44), 5);
        assert_eq!(bucket_size(1024, 45), 6);
    }

    #[test]
    fn single_output_needs_psi_plus_one() {
        assert_eq!(bucket_size(1, 40), 41);
    }

    #[test]
    fn bucket_is_minimal_and_sufficient() {
        for ell in [1, 2, 3, 100, 6400, 1 << 20] {
            for psi in 1..80 {
                let b = bucket_size(ell, psi);
                assert!(security_bits(ell, b) + 1e-9 >= psi as f64);
                assert!(b == 1 || security_bits(ell, b - 1) < psi as f64);
            }
        }
    }
}
