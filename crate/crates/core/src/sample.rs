//! Deterministic sample-point generation: margin-shrunk grids, a Halton
//! low-discrepancy sequence, and counter-based random streams whose shards
//! reproduce the sequential stream.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

const HALTON_BASES: [u64; 6] = [2, 3, 5, 7, 11, 13];

/// Radical-inverse of `index` in the given base (van der Corput).
fn radical_inverse(mut index: u64, base: u64) -> f64 {
    let mut result = 0.0;
    let mut frac = 1.0 / base as f64;
    while index > 0 {
        result += (index % base) as f64 * frac;
        index /= base;
        frac /= base as f64;
    }
    result
}

/// Shrink a box inward by `margin` on every axis.
pub fn shrink_box(domain: &[(f64, f64)], margin: f64) -> Result<Vec<(f64, f64)>> {
    domain
        .iter()
        .enumerate()
        .map(|(axis, &(lo, hi))| {
            let (a, b) = (lo + margin, hi - margin);
            if !(a < b) {
                return Err(Error::InvalidArgument {
                    what: format!("margin {margin} leaves an empty range on axis {axis}"),
                });
            }
            Ok((a, b))
        })
        .collect()
}

/// First `count` Halton points (bases 2, 3, 5, ...) mapped into `domain`
/// shrunk by `margin`. Index starts at 1 to avoid the origin corner.
pub fn halton_points(count: usize, domain: &[(f64, f64)], margin: f64) -> Result<Vec<Vec<f64>>> {
    let dims = domain.len();
    if dims > HALTON_BASES.len() {
        return Err(Error::InvalidArgument {
            what: format!("at most {} chart dimensions supported", HALTON_BASES.len()),
        });
    }
    let inner = shrink_box(domain, margin)?;
    Ok((0..count)
        .map(|i| {
            (0..dims)
                .map(|d| {
                    let t = radical_inverse(i as u64 + 1, HALTON_BASES[d]);
                    inner[d].0 + t * (inner[d].1 - inner[d].0)
                })
                .collect()
        })
        .collect())
}

/// Tensor-product grid with the given per-axis counts inside `domain` shrunk
/// by `margin`, flattened in row-major order (last axis fastest).
pub fn grid_points(counts: &[usize], domain: &[(f64, f64)], margin: f64) -> Result<Vec<Vec<f64>>> {
    if counts.len() != domain.len() {
        return Err(Error::InvalidArgument {
            what: format!("{} grid counts for {} axes", counts.len(), domain.len()),
        });
    }
    for &k in counts {
        if k < 3 {
            return Err(Error::InvalidArgument {
                what: "grid counts must be at least 3 per axis".into(),
            });
        }
    }
    let inner = shrink_box(domain, margin)?;
    let axes: Vec<Vec<f64>> = counts
        .iter()
        .zip(inner.iter())
        .map(|(&k, &(lo, hi))| {
            (0..k)
                .map(|i| lo + (hi - lo) * i as f64 / (k - 1) as f64)
                .collect()
        })
        .collect();
    let total: usize = counts.iter().product();
    let mut points = Vec::with_capacity(total);
    for flat in 0..total {
        let mut rem = flat;
        let mut u = vec![0.0; counts.len()];
        for axis in (0..counts.len()).rev() {
            u[axis] = axes[axis][rem % counts[axis]];
            rem /= counts[axis];
        }
        points.push(u);
    }
    Ok(points)
}

/// Counter-based random stream: the generator for item `index` depends only
/// on `(seed, index)`, so any sharding reproduces the sequential sequence.
pub fn stream_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn halton_is_deterministic_and_inside() {
        let domain = [(0.0, 1.0), (-2.0, 2.0)];
        let a = halton_points(64, &domain, 0.05).unwrap();
        let b = halton_points(64, &domain, 0.05).unwrap();
        assert_eq!(a, b);
        for p in &a {
            assert!(p[0] >= 0.05 && p[0] <= 0.95);
            assert!(p[1] >= -1.95 && p[1] <= 1.95);
        }
    }

    #[test]
    fn grid_shape_and_margins() {
        let domain = [(0.0, 1.0), (0.0, 2.0)];
        let pts = grid_points(&[3, 4], &domain, 0.1).unwrap();
        assert_eq!(pts.len(), 12);
        assert_eq!(pts[0], vec![0.1, 0.1]);
        assert_eq!(pts[11], vec![0.9, 1.9]);
    }

    #[test]
    fn grid_rejects_tiny_counts() {
        assert!(grid_points(&[2, 3], &[(0.0, 1.0), (0.0, 1.0)], 0.0).is_err());
    }

    #[test]
    fn stream_rng_shards_reproduce_sequence() {
        let seq: Vec<f64> = (0..10)
            .map(|i| stream_rng(42, i).gen_range(0.0..1.0))
            .collect();
        // "sharded": same indices drawn in two chunks, any order
        let mut sharded = vec![0.0; 10];
        for i in (5..10).chain(0..5) {
            sharded[i as usize] = stream_rng(42, i).gen_range(0.0..1.0);
        }
        assert_eq!(seq, sharded);
    }
}
