//! Monte-Carlo averages over static disorder and telegraph noise.
//!
//! Samples run on a rayon pool. Results are collected in sample order and
//! reduced by fixed-order pairwise summation, so the output does not depend
//! on the number of workers.

use rayon::prelude::*;

use super::propagate::{propagate, propagate_piecewise, PropagateOptions, TimeGrid, DEFAULT_TOL};
use super::telegraph::{propagate_pure, propagate_telegraph_trajectory};
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigenvalues, pairwise_sum, pairwise_sum_matrices, CMatrix, C64};
use crate::network::InitialState;
use crate::network::{
    build_sector_generator, initial_amplitudes, sample_disorder, sample_telegraph, Basis,
    DisorderSpec, NetworkSpec, NoiseModel, Telegraph,
};

/// What is varied from sample to sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Variation {
    Disorder(DisorderSpec),
    Telegraph {
        noise: Telegraph,
        n_samples: usize,
        seed: u64,
    },
}

impl Variation {
    pub fn n_samples(&self) -> usize {
        match self {
            Variation::Disorder(d) => d.n_samples,
            Variation::Telegraph { n_samples, .. } => *n_samples,
        }
    }
}

/// Scalar recorded per sample and time point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Observable {
    AbsorptionProbability,
    /// 1-based site.
    SitePopulation(usize),
    TotalExcitations,
}

impl Observable {
    pub fn name(&self) -> String {
        match self {
            Observable::AbsorptionProbability => "P_abs".into(),
            Observable::SitePopulation(k) => format!("n_{k}"),
            Observable::TotalExcitations => "N_exc".into(),
        }
    }

    fn eval(&self, rho: &CMatrix, initial_vacuum: f64) -> f64 {
        match self {
            Observable::AbsorptionProbability => rho[(0, 0)].re - initial_vacuum,
            Observable::SitePopulation(k) => rho[(*k, *k)].re,
            Observable::TotalExcitations => (1..rho.nrows()).map(|k| rho[(k, k)].re).sum(),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct EnsembleOptions {
    /// Worker threads; 0 uses every core.
    pub workers: usize,
    pub tol: f64,
}

impl Default for EnsembleOptions {
    fn default() -> Self {
        Self {
            workers: 0,
            tol: DEFAULT_TOL,
        }
    }
}

/// Means and standard errors, indexed `[observable][time]`.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleResult {
    pub times: Vec<f64>,
    pub names: Vec<String>,
    pub mean: Vec<Vec<f64>>,
    pub stderr: Vec<Vec<f64>>,
    pub n_samples: usize,
}

impl EnsembleResult {
    /// Column of observable `obs`, or `None` if it was not recorded.
    pub fn series(&self, name: &str) -> Option<(&[f64], &[f64])> {
        let k = self.names.iter().position(|n| n == name)?;
        Some((&self.mean[k], &self.stderr[k]))
    }
}

/// Runs `f` inside a dedicated pool of `workers` threads (0 = every core).
pub fn with_pool<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::ThreadPool(e.to_string()))?;
    Ok(pool.install(f))
}

fn sector_spec_for_sample(
    spec: &NetworkSpec,
    variation: &Variation,
    k: usize,
) -> Result<NetworkSpec> {
    let mut s = spec.clone();
    if let Variation::Disorder(d) = variation {
        let w = sample_disorder(d, spec.n_sites(), k)?;
        for (e, dw) in s.site_energies.iter_mut().zip(w) {
            *e += dw;
        }
    }
    if matches!(s.dephasing, NoiseModel::Telegraph(_)) {
        s.dephasing = NoiseModel::None;
    }
    Ok(s)
}

/// Sector density matrices of sample `k` at every grid point.
pub fn sample_states(
    spec: &NetworkSpec,
    variation: &Variation,
    initial: InitialState,
    grid: &TimeGrid,
    k: usize,
    tol: f64,
) -> Result<Vec<CMatrix>> {
    let s = sector_spec_for_sample(spec, variation, k)?;
    let basis = Basis::sector(s.n_sites());
    let psi0 = initial_amplitudes(&s, &basis, initial)?;
    let markovian = s.dephasing.markovian_rates().is_some();
    match variation {
        Variation::Disorder(_) => {
            if markovian {
                let g = build_sector_generator(&s)?;
                propagate(
                    &g,
                    &(&psi0 * psi0.adjoint()),
                    grid,
                    PropagateOptions {
                        tol,
                        ..Default::default()
                    },
                )
            } else {
                let traj = propagate_pure(&s, &psi0, grid)?;
                Ok((0..grid.len()).map(|i| traj.density(i)).collect())
            }
        }
        Variation::Telegraph {
            noise,
            n_samples,
            seed,
        } => {
            if k >= *n_samples {
                return Err(Error::InvalidParameter(format!(
                    "sample index {k} out of range (n_samples = {n_samples})"
                )));
            }
            let path = sample_telegraph(
                noise,
                s.n_sites(),
                grid.last().max(f64::MIN_POSITIVE),
                *seed,
                k,
            )?;
            if markovian {
                let g = build_sector_generator(&s)?;
                let shift = |t: f64| {
                    let mut v = vec![0.0];
                    v.extend(path.energies_at(t));
                    v
                };
                let mut pieces = vec![(0.0, g.lindblad.with_diagonal_shift(&shift(0.0)))];
                for t in path.switch_times() {
                    pieces.push((t, g.lindblad.with_diagonal_shift(&shift(t))));
                }
                propagate_piecewise(
                    &pieces,
                    &(&psi0 * psi0.adjoint()),
                    grid,
                    PropagateOptions::adaptive(tol),
                )
            } else {
                let traj = propagate_telegraph_trajectory(&s, &path, &psi0, grid)?;
                Ok((0..grid.len()).map(|i| traj.density(i)).collect())
            }
        }
    }
}

fn check_ensemble(spec: &NetworkSpec, variation: &Variation) -> Result<()> {
    if variation.n_samples() < 2 {
        return Err(Error::InvalidParameter(
            "an ensemble needs at least 2 samples".into(),
        ));
    }
    if let (Variation::Disorder(_), NoiseModel::Telegraph(_)) = (variation, &spec.dephasing) {
        return Err(Error::InvalidParameter(
            "telegraph dephasing must be passed as the ensemble variation".into(),
        ));
    }
    Ok(())
}

/// Mean and standard error (`std/√n`) of each observable over the ensemble.
pub fn run_ensemble(
    spec: &NetworkSpec,
    variation: &Variation,
    initial: InitialState,
    grid: &TimeGrid,
    observables: &[Observable],
    opts: EnsembleOptions,
) -> Result<EnsembleResult> {
    check_ensemble(spec, variation)?;
    let n = variation.n_samples();
    for o in observables {
        if let Observable::SitePopulation(k) = o {
            if *k < 1 || *k > spec.n_sites() {
                return Err(Error::InvalidParameter(format!(
                    "observed site {k} out of range"
                )));
            }
        }
    }
    let basis = Basis::sector(spec.n_sites());
    let psi0 = initial_amplitudes(spec, &basis, initial)?;
    let vac0 = psi0[0].norm_sqr();

    // values[k][o * T + t]
    let values: Vec<Vec<f64>> = with_pool(opts.workers, || {
        (0..n)
            .into_par_iter()
            .map(|k| {
                let states = sample_states(spec, variation, initial, grid, k, opts.tol)?;
                let mut v = Vec::with_capacity(observables.len() * grid.len());
                for o in observables {
                    v.extend(states.iter().map(|rho| o.eval(rho, vac0)));
                }
                Ok(v)
            })
            .collect::<Result<Vec<_>>>()
    })??;

    let nt = grid.len();
    let mut mean = vec![vec![0.0; nt]; observables.len()];
    let mut stderr = vec![vec![0.0; nt]; observables.len()];
    let mut column = vec![0.0; n];
    for o in 0..observables.len() {
        for t in 0..nt {
            for (k, v) in values.iter().enumerate() {
                column[k] = v[o * nt + t];
            }
            let (m, se) = mean_and_stderr(&column);
            mean[o][t] = m;
            stderr[o][t] = se;
        }
    }
    Ok(EnsembleResult {
        times: grid.points().to_vec(),
        names: observables.iter().map(|o| o.name()).collect(),
        mean,
        stderr,
        n_samples: n,
    })
}

/// Sample mean and `s/√n` with the unbiased sample deviation `s`.
pub fn mean_and_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    if xs.windows(2).all(|w| w[0] == w[1]) {
        return (xs.first().copied().unwrap_or(f64::NAN), 0.0);
    }
    let mean = pairwise_sum(xs) / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let sq: Vec<f64> = xs.iter().map(|x| (x - mean) * (x - mean)).collect();
    let var = pairwise_sum(&sq) / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Trace distance between the ensemble-averaged states of two initial
/// conditions driven by the same noise realizations.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceDistanceResult {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    /// Jackknife standard error over samples.
    pub stderr: Vec<f64>,
    pub n_samples: usize,
}

pub fn run_trace_distance(
    spec: &NetworkSpec,
    variation: &Variation,
    first: InitialState,
    second: InitialState,
    grid: &TimeGrid,
    opts: EnsembleOptions,
) -> Result<TraceDistanceResult> {
    check_ensemble(spec, variation)?;
    let n = variation.n_samples();
    let per_sample: Vec<(Vec<CMatrix>, Vec<CMatrix>)> = with_pool(opts.workers, || {
        (0..n)
            .into_par_iter()
            .map(|k| {
                let a = sample_states(spec, variation, first, grid, k, opts.tol)?;
                let b = sample_states(spec, variation, second, grid, k, opts.tol)?;
                Ok((a, b))
            })
            .collect::<Result<Vec<_>>>()
    })??;

    let nt = grid.len();
    let nf = n as f64;
    let mut values = Vec::with_capacity(nt);
    let mut stderr = Vec::with_capacity(nt);
    for t in 0..nt {
        // only the difference enters the distance
        let diffs: Vec<CMatrix> = per_sample.iter().map(|(a, b)| &a[t] - &b[t]).collect();
        let total = pairwise_sum_matrices(&diffs);
        values.push(half_trace_norm(&(&total / C64::new(nf, 0.0))));
        let loo: Vec<f64> = diffs
            .iter()
            .map(|d| half_trace_norm(&((&total - d) / C64::new(nf - 1.0, 0.0))))
            .collect();
        let loo_mean = pairwise_sum(&loo) / nf;
        let sq: Vec<f64> = loo
            .iter()
            .map(|x| (x - loo_mean) * (x - loo_mean))
            .collect();
        stderr.push(((nf - 1.0) / nf * pairwise_sum(&sq)).sqrt());
    }
    Ok(TraceDistanceResult {
        times: grid.points().to_vec(),
        values,
        stderr,
        n_samples: n,
    })
}

fn half_trace_norm(d: &CMatrix) -> f64 {
    0.5 * hermitian_eigenvalues(d)
        .iter()
        .map(|x| x.abs())
        .sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ion_chain::fully_connected;

    fn spec() -> NetworkSpec {
        NetworkSpec::new(fully_connected(4).unwrap(), 1, 3).unwrap()
    }

    #[test]
    fn zero_width_disorder_has_zero_spread() {
        let v = Variation::Disorder(DisorderSpec::new(0.0, 5, 1).unwrap());
        let grid = TimeGrid::linspace(0.0, 3.0, 7).unwrap();
        let r = run_ensemble(
            &spec(),
            &v,
            InitialState::SingleExcitationAtSource,
            &grid,
            &[Observable::AbsorptionProbability],
            EnsembleOptions {
                workers: 2,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(r.stderr[0].iter().all(|&s| s == 0.0));
        assert_eq!(r.mean[0][0], 0.0);
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let v = Variation::Telegraph {
            noise: Telegraph::new(2.0, 1.0).unwrap(),
            n_samples: 13,
            seed: 4,
        };
        let grid = TimeGrid::linspace(0.0, 2.0, 5).unwrap();
        let obs = [
            Observable::AbsorptionProbability,
            Observable::SitePopulation(2),
            Observable::TotalExcitations,
        ];
        let run = |w| {
            run_ensemble(
                &spec(),
                &v,
                InitialState::SingleExcitationAtSource,
                &grid,
                &obs,
                EnsembleOptions {
                    workers: w,
                    ..Default::default()
                },
            )
            .unwrap()
        };
        let a = run(1);
        let b = run(3);
        assert_eq!(a, b);
        for t in 0..grid.len() {
            assert!((a.mean[0][t] + a.mean[2][t] - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn too_few_samples_rejected() {
        let v = Variation::Disorder(DisorderSpec::new(1.0, 1, 1).unwrap());
        let grid = TimeGrid::linspace(0.0, 1.0, 2).unwrap();
        assert!(run_ensemble(
            &spec(),
            &v,
            InitialState::Vacuum,
            &grid,
            &[],
            EnsembleOptions::default()
        )
        .is_err());
    }

    #[test]
    fn mean_and_stderr_of_known_sample() {
        let (m, se) = mean_and_stderr(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        assert!((se - (5.0f64 / 3.0 / 4.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn trace_distance_starts_at_closed_form() {
        // ψ1 = |2⟩, ψ2 = (|vac⟩ + |2⟩)/√2: the difference lives on a 2×2 block
        // [[-1/2, -1/2], [-1/2, 1/2]] with eigenvalues ±1/√2
        let v = Variation::Telegraph {
            noise: Telegraph::new(4.0, 1.0).unwrap(),
            n_samples: 4,
            seed: 1,
        };
        let grid = TimeGrid::linspace(0.0, 1.0, 3).unwrap();
        let r = run_trace_distance(
            &spec(),
            &v,
            InitialState::SingleExcitationAt(2),
            InitialState::SuperpositionHalfSite(2),
            &grid,
            EnsembleOptions::default(),
        )
        .unwrap();
        assert!((r.values[0] - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        assert!(r.stderr[0] < 1e-12);
    }
}
