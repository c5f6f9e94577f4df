//! Sobol low-discrepancy points.
//!
//! Direction numbers come from the Joe-Kuo D(6) parameter tables shipped with
//! the `sobol` crate; generation is the usual Gray-code XOR walk at 32-bit
//! resolution. Integers map to the open unit interval via the midpoint
//! convention `(x + 1/2) 2^{-32}`, so inverse-CDF transforms never see 0 or
//! 1. Optional scrambling applies a per-dimension random digital shift (XOR
//! mask) keyed by the seed, which preserves the dyadic net structure.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sobol::params::JoeKuoD6;

use super::sample::SampleSet;
use crate::error::{Error, Result};
use crate::tensor::Tensor;

const BITS: usize = 32;
pub const MAX_DIMENSION: usize = 64;

fn direction_vectors(dim: usize) -> Result<Vec<[u32; BITS]>> {
    if dim == 0 {
        return Err(Error::InvalidArg("dimension must be positive".into()));
    }
    if dim > MAX_DIMENSION {
        return Err(Error::InvalidArg(format!(
            "dimension {dim} exceeds supported direction numbers ({MAX_DIMENSION})"
        )));
    }
    let params = JoeKuoD6::minimal();
    let mut all = Vec::with_capacity(dim);
    // first dimension: van der Corput in base 2
    let mut v0 = [0u32; BITS];
    for (i, v) in v0.iter_mut().enumerate() {
        *v = 1u32 << (31 - i);
    }
    all.push(v0);
    for j in 1..dim {
        let p = &params.dim_params[j - 1];
        let s = p.m.len();
        let mut v = [0u32; BITS];
        for i in 0..s.min(BITS) {
            v[i] = p.m[i] << (31 - i);
        }
        for i in s..BITS {
            let base = i - s;
            v[i] = v[base] ^ (v[base] >> s);
            for k in 0..s - 1 {
                if (p.a >> k) & 1 == 1 {
                    v[i] ^= v[base + 1 + k];
                }
            }
        }
        all.push(v);
    }
    Ok(all)
}

/// First `count` Sobol points in `[0,1)^dim`, optionally digitally scrambled
/// by `scramble_seed`.
pub fn low_discrepancy_points(
    dim: usize,
    count: usize,
    scramble_seed: Option<u64>,
) -> Result<SampleSet> {
    let dirs = direction_vectors(dim)?;
    let masks: Vec<u32> = match scramble_seed {
        Some(seed) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..dim).map(|_| rng.gen::<u32>()).collect()
        }
        None => vec![0u32; dim],
    };
    let mut state = vec![0u32; dim];
    let mut pts = Vec::with_capacity(count * dim);
    for n in 0..count as u64 {
        if n > 0 {
            let bit = n.trailing_zeros() as usize;
            for (j, s) in state.iter_mut().enumerate() {
                *s ^= dirs[j][bit];
            }
        }
        for (j, &s) in state.iter().enumerate() {
            let x = s ^ masks[j];
            pts.push((x as f64 + 0.5) * (1.0 / 4294967296.0));
        }
    }
    let tag = match scramble_seed {
        Some(seed) => format!("sobol-scrambled-{seed}"),
        None => "sobol".to_string(),
    };
    Ok(SampleSet {
        dim,
        points: Tensor::from_raw(count, dim, pts),
        weights: vec![1.0 / count as f64; count],
        tag,
        seed: scramble_seed.unwrap_or(0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_point_per_dyadic_interval() {
        // any dimension of a Sobol sequence is a (0,1)-sequence in base 2:
        // the first 2^k points land one per dyadic interval of width 2^-k
        for dim in [1usize, 2, 5, 19] {
            let set = low_discrepancy_points(dim, 64, None).unwrap();
            for d in 0..dim {
                for k in [3usize, 6] {
                    let m = 1usize << k;
                    let mut seen = vec![false; m];
                    for i in 0..m {
                        let u = set.points.get(i, d);
                        let cell = ((u * m as f64) as usize).min(m - 1);
                        assert!(!seen[cell], "dim {dim} coord {d}: cell {cell} hit twice");
                        seen[cell] = true;
                    }
                }
            }
        }
    }

    #[test]
    fn mean_of_first_1024_points_near_half() {
        let set = low_discrepancy_points(8, 1024, None).unwrap();
        for d in 0..8 {
            let mean: f64 = (0..1024).map(|i| set.points.get(i, d)).sum::<f64>() / 1024.0;
            assert!((mean - 0.5).abs() < 1e-2, "coord {d}: mean {mean}");
        }
    }

    #[test]
    fn scrambling_is_deterministic_and_preserves_nets() {
        let a = low_discrepancy_points(4, 256, Some(99)).unwrap();
        let b = low_discrepancy_points(4, 256, Some(99)).unwrap();
        assert_eq!(a.points.data(), b.points.data());
        let c = low_discrepancy_points(4, 256, Some(100)).unwrap();
        assert_ne!(a.points.data(), c.points.data());

        // digital shift keeps the net property
        for d in 0..4 {
            let m = 64;
            let mut seen = vec![false; m];
            for i in 0..m {
                let cell = ((a.points.get(i, d) * m as f64) as usize).min(m - 1);
                assert!(!seen[cell]);
                seen[cell] = true;
            }
        }
    }

    #[test]
    fn dimension_limits_enforced() {
        assert!(low_discrepancy_points(0, 8, None).is_err());
        assert!(low_discrepancy_points(65, 8, None).is_err());
        assert!(low_discrepancy_points(64, 8, None).is_ok());
    }
}
