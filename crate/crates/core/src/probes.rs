//! Low-discrepancy probe clouds in a box of ℝ⁴.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::phasemap::PhasePoint;

const BASES: [u64; 4] = [2, 3, 5, 7];

/// `count` Halton points in `[−half_width, half_width]⁴`. A nonzero `seed`
/// applies a random Cranley–Patterson rotation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeSpec {
    pub count: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_half_width")]
    pub half_width: f64,
}

fn default_half_width() -> f64 {
    3.0
}

impl Default for ProbeSpec {
    fn default() -> Self {
        ProbeSpec {
            count: 100,
            seed: 0,
            half_width: 3.0,
        }
    }
}

/// Van der Corput radical inverse of `index` in `base`.
pub fn radical_inverse(mut index: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut r = 0.0;
    while index > 0 {
        r += f * (index % base) as f64;
        index /= base;
        f *= inv;
    }
    r
}

pub fn probe_cloud(spec: &ProbeSpec) -> Vec<PhasePoint> {
    let shift: [f64; 4] = if spec.seed == 0 {
        [0.0; 4]
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        core::array::from_fn(|_| rng.random::<f64>())
    };
    (1..=spec.count as u64)
        .map(|i| {
            let c: [f64; 4] = core::array::from_fn(|k| {
                let u = radical_inverse(i, BASES[k]) + shift[k];
                let u = u - libm::floor(u);
                spec.half_width * (2.0 * u - 1.0)
            });
            PhasePoint::from_array(c)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn radical_inverse_values() {
        assert_eq!(radical_inverse(1, 2), 0.5);
        assert_eq!(radical_inverse(3, 2), 0.75);
        assert!((radical_inverse(5, 3) - 7.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn cloud_is_in_box_and_distinct() {
        let pts = probe_cloud(&ProbeSpec::default());
        assert_eq!(pts.len(), 100);
        for p in &pts {
            assert!(p.to_array().iter().all(|v| v.abs() <= 3.0));
        }
        for i in 0..pts.len() {
            for j in 0..i {
                assert_ne!(pts[i], pts[j]);
            }
        }
    }

    #[test]
    fn seeded_rotation_is_deterministic() {
        let s = ProbeSpec { seed: 11, ..ProbeSpec::default() };
        assert_eq!(probe_cloud(&s), probe_cloud(&s));
        assert_ne!(probe_cloud(&s), probe_cloud(&ProbeSpec::default()));
    }
}
