//! Reproducible samplers for static disorder and telegraph noise.
//!
//! Every draw comes from a ChaCha8 stream keyed by `(seed, stream_id)` and
//! positioned by `sample_index`, so a sample is a pure function of those three
//! values and can be generated on any worker in any order.

use rand::distr::{Distribution, Uniform};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp;

use super::spec::{DisorderSpec, Telegraph};
use crate::error::{Error, Result};

pub const DISORDER_STREAM: u64 = 0x6469_736f;
pub const TELEGRAPH_STREAM: u64 = 0x7465_6c00;

/// Counter-based generator for one `(seed, sample_index, stream_id)` triple.
pub fn sample_rng(seed: u64, sample_index: u64, stream_id: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&stream_id.to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(sample_index);
    rng
}

/// On-site energies of disorder sample `sample_index`, i.i.d. on `[−W, W]`.
pub fn sample_disorder(
    spec: &DisorderSpec,
    n_sites: usize,
    sample_index: usize,
) -> Result<Vec<f64>> {
    if sample_index >= spec.n_samples {
        return Err(Error::InvalidParameter(format!(
            "sample index {sample_index} out of range (n_samples = {})",
            spec.n_samples
        )));
    }
    if spec.width == 0.0 {
        return Ok(vec![0.0; n_sites]);
    }
    let mut rng = sample_rng(spec.seed, sample_index as u64, DISORDER_STREAM);
    let dist = Uniform::new_inclusive(-spec.width, spec.width)
        .map_err(|e| Error::InvalidParameter(e.to_string()))?;
    Ok((0..n_sites).map(|_| dist.sample(&mut rng)).collect())
}

/// One site's dichotomic trajectory on `[0, horizon]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SitePath {
    pub initial_sign: i8,
    pub switches: Vec<f64>,
}

impl SitePath {
    pub fn sign_at(&self, t: f64) -> i8 {
        let flips = self.switches.partition_point(|&s| s <= t);
        if flips % 2 == 0 {
            self.initial_sign
        } else {
            -self.initial_sign
        }
    }
}

/// Telegraph noise realization for all sites.
#[derive(Debug, Clone, PartialEq)]
pub struct TelegraphPath {
    pub omega_gk: f64,
    pub horizon: f64,
    pub sites: Vec<SitePath>,
}

impl TelegraphPath {
    /// `ω_i(t)` for 1-based `site`.
    pub fn energy(&self, site: usize, t: f64) -> f64 {
        self.sites[site - 1].sign_at(t) as f64 * 0.5 * self.omega_gk
    }

    pub fn energies_at(&self, t: f64) -> Vec<f64> {
        (1..=self.sites.len()).map(|s| self.energy(s, t)).collect()
    }

    /// All switch times of all sites, sorted and deduplicated.
    pub fn switch_times(&self) -> Vec<f64> {
        let mut all: Vec<f64> = self
            .sites
            .iter()
            .flat_map(|s| s.switches.iter().copied())
            .collect();
        all.sort_by(|a, b| a.total_cmp(b));
        all.dedup();
        all
    }
}

/// Samples independent telegraph processes for `n_sites` sites on `[0, horizon]`,
/// starting from the stationary distribution.
pub fn sample_telegraph(
    noise: &Telegraph,
    n_sites: usize,
    horizon: f64,
    seed: u64,
    sample_index: usize,
) -> Result<TelegraphPath> {
    if !(horizon > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "horizon must be > 0, got {horizon}"
        )));
    }
    let sites = (0..n_sites)
        .map(|site| {
            let mut rng = sample_rng(seed, sample_index as u64, TELEGRAPH_STREAM + site as u64);
            let initial_sign = if rng.random_bool(0.5) { 1 } else { -1 };
            let mut switches = Vec::new();
            if noise.lambda > 0.0 {
                let wait = Exp::new(noise.lambda).expect("positive rate");
                let mut t = 0.0;
                loop {
                    t += wait.sample(&mut rng);
                    if t > horizon {
                        break;
                    }
                    switches.push(t);
                }
            }
            SitePath {
                initial_sign,
                switches,
            }
        })
        .collect();
    Ok(TelegraphPath {
        omega_gk: noise.omega_gk,
        horizon,
        sites,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_width_disorder_is_zero() {
        let spec = DisorderSpec::new(0.0, 3, 9).unwrap();
        assert_eq!(sample_disorder(&spec, 5, 2).unwrap(), vec![0.0; 5]);
    }

    #[test]
    fn disorder_is_deterministic_and_bounded() {
        let spec = DisorderSpec::new(4.0, 10, 42).unwrap();
        let a = sample_disorder(&spec, 8, 3).unwrap();
        let b = sample_disorder(&spec, 8, 3).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, sample_disorder(&spec, 8, 4).unwrap());
        assert!(a.iter().all(|w| w.abs() <= 4.0));
        assert!(sample_disorder(&spec, 8, 10).is_err());
    }

    #[test]
    fn disorder_moments_match_uniform_law() {
        let n = 100_000;
        let spec = DisorderSpec::new(4.0, n, 7).unwrap();
        let xs: Vec<f64> = (0..n)
            .map(|k| sample_disorder(&spec, 1, k).unwrap()[0])
            .collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0);
        // uniform on [-4, 4]: variance 16/3, fourth central moment 256/5
        let sigma_mean = (16.0 / 3.0 / n as f64).sqrt();
        let sigma_var = ((256.0 / 5.0 - (16.0f64 / 3.0).powi(2)) / n as f64).sqrt();
        assert!(mean.abs() < 3.0 * sigma_mean, "mean {mean}");
        assert!((var - 16.0 / 3.0).abs() < 3.0 * sigma_var, "var {var}");
    }

    #[test]
    fn frozen_telegraph_has_no_switches() {
        let noise = Telegraph::new(4.0, 0.0).unwrap();
        let p = sample_telegraph(&noise, 6, 10.0, 1, 0).unwrap();
        assert!(p.sites.iter().all(|s| s.switches.is_empty()));
        assert!(p.energies_at(3.0).iter().all(|w| w.abs() == 2.0));
    }

    #[test]
    fn telegraph_switch_times_increase_within_horizon() {
        let noise = Telegraph::new(2.0, 5.0).unwrap();
        let p = sample_telegraph(&noise, 4, 3.0, 11, 5).unwrap();
        for s in &p.sites {
            assert!(s.switches.windows(2).all(|w| w[0] < w[1]));
            assert!(s.switches.iter().all(|&t| t > 0.0 && t <= 3.0));
        }
        assert_eq!(p, sample_telegraph(&noise, 4, 3.0, 11, 5).unwrap());
        assert!(sample_telegraph(&noise, 4, 0.0, 11, 5).is_err());
    }

    #[test]
    fn telegraph_sign_flips_at_switches() {
        let s = SitePath {
            initial_sign: 1,
            switches: vec![1.0, 2.0],
        };
        assert_eq!(s.sign_at(0.5), 1);
        assert_eq!(s.sign_at(1.5), -1);
        assert_eq!(s.sign_at(2.5), 1);
    }
}
