//! Diagnostics computed from states and trajectories.

use rayon::prelude::*;

use crate::engines::steady_state_from;
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigenvalues, CMatrix};
use crate::network::{build_full_generator, Basis, NetworkSpec};

/// Absorption probability over time, optionally with standard errors.
#[derive(Debug, Clone, PartialEq)]
pub struct TransferCurve {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub stderr: Option<Vec<f64>>,
}

impl TransferCurve {
    pub fn new(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if times.len() != values.len() {
            return Err(Error::DimensionMismatch(times.len(), values.len()));
        }
        Ok(Self {
            times,
            values,
            stderr: None,
        })
    }

    /// True if no value drops by more than `slack` below its predecessor.
    pub fn is_non_decreasing(&self, slack: f64) -> bool {
        self.values.windows(2).all(|w| w[1] >= w[0] - slack)
    }
}

/// Vacuum population gained since the start.
pub fn absorption_probability(rho: &CMatrix, initial_vacuum_weight: f64) -> f64 {
    rho[(0, 0)].re - initial_vacuum_weight
}

/// `⟨σ⁺_i σ⁻_i⟩` for `i = 1..=N`.
pub fn site_populations(basis: &Basis, rho: &CMatrix) -> Vec<f64> {
    let mut pops = vec![0.0; basis.n_sites()];
    for k in 0..basis.dim() {
        let p = rho[(k, k)].re;
        for (s, pop) in pops.iter_mut().enumerate() {
            if basis.occupied(k, s + 1) {
                *pop += p;
            }
        }
    }
    pops
}

pub fn total_excitations(basis: &Basis, rho: &CMatrix) -> f64 {
    (0..basis.dim())
        .map(|k| basis.excitations(k) as f64 * rho[(k, k)].re)
        .sum()
}

/// Rate `Γ ⟨n_sink⟩` at which excitations leave through the sink.
pub fn absorption_rate(basis: &Basis, rho: &CMatrix, gamma_sink: f64, sink: usize) -> f64 {
    gamma_sink * site_populations(basis, rho)[sink - 1]
}

/// Stationary absorption rate, excitation number and site populations at
/// one source rate.
#[derive(Debug, Clone, PartialEq)]
pub struct DrivenPoint {
    pub gamma_source: f64,
    pub rate: f64,
    pub total_excitations: f64,
    pub populations: Vec<f64>,
}

/// Steady state of `spec` driven at `gamma_source`, truncated at `cutoff`.
/// A degenerate stationary family is resolved by its member reached from the
/// maximally mixed state, which favours no preparation.
pub fn driven_point(spec: &NetworkSpec, gamma_source: f64, cutoff: usize) -> Result<DrivenPoint> {
    let s = spec.clone().with_gamma_source(gamma_source);
    let g = build_full_generator(&s, cutoff)?;
    let d = g.basis.dim();
    let mixed = CMatrix::identity(d, d).unscale(d as f64);
    let rho = steady_state_from(&g, &mixed)?;
    let populations = site_populations(&g.basis, &rho);
    Ok(DrivenPoint {
        gamma_source,
        rate: s.gamma_sink * populations[s.sink - 1],
        total_excitations: total_excitations(&g.basis, &rho),
        populations,
    })
}

/// `n` log-spaced points from `lo` to `hi` inclusive.
pub fn logspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|k| {
            if k + 1 == n {
                hi
            } else {
                (a + (b - a) * k as f64 / (n as f64 - 1.0)).exp()
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SourceScanOptions {
    pub points_per_decade: usize,
    /// Excitation cutoff of the many-body space.
    pub cutoff: usize,
    /// Relative tolerance on the optimal rate.
    pub rel_tol: f64,
}

impl SourceScanOptions {
    pub fn new(cutoff: usize) -> Self {
        Self {
            points_per_decade: 25,
            cutoff,
            rel_tol: 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SourceRateOptimum {
    pub gamma_opt: f64,
    pub max_rate: f64,
    /// The best scan point sits on an end of the range.
    pub at_boundary: bool,
    pub scan: Vec<DrivenPoint>,
}

/// Maximizes the stationary absorption rate over `Γ_source ∈ [lo, hi]`:
/// log-spaced scan followed by golden-section refinement in `ln Γ_source`.
pub fn optimal_source_rate(
    spec: &NetworkSpec,
    lo: f64,
    hi: f64,
    opts: SourceScanOptions,
) -> Result<SourceRateOptimum> {
    if !(lo > 0.0 && hi >= lo && hi.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "invalid scan range [{lo}, {hi}]"
        )));
    }
    if lo == hi {
        let p = driven_point(spec, lo, opts.cutoff)?;
        return Ok(SourceRateOptimum {
            gamma_opt: lo,
            max_rate: p.rate,
            at_boundary: true,
            scan: vec![p],
        });
    }
    let decades = (hi / lo).log10();
    let n = ((decades * opts.points_per_decade as f64).ceil() as usize + 1).max(3);
    let grid = logspace(lo, hi, n);
    let scan: Vec<DrivenPoint> = grid
        .par_iter()
        .map(|&g| driven_point(spec, g, opts.cutoff))
        .collect::<Result<Vec<_>>>()?;
    let best = (0..n).fold(0, |b, k| if scan[k].rate > scan[b].rate { k } else { b });
    if best == 0 || best + 1 == n {
        log::warn!("source-rate maximum at the edge of [{lo}, {hi}]");
        return Ok(SourceRateOptimum {
            gamma_opt: grid[best],
            max_rate: scan[best].rate,
            at_boundary: true,
            scan,
        });
    }
    let rate = |x: f64| driven_point(spec, x.exp(), opts.cutoff).map(|p| p.rate);
    let (mut a, mut b) = (grid[best - 1].ln(), grid[best + 1].ln());
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let mut fc = rate(c)?;
    let mut fd = rate(d)?;
    while b - a > opts.rel_tol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = rate(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = rate(d)?;
        }
    }
    let x = 0.5 * (a + b);
    let r = rate(x)?;
    let (gamma_opt, max_rate) = if r >= scan[best].rate {
        (x.exp(), r)
    } else {
        (grid[best], scan[best].rate)
    };
    Ok(SourceRateOptimum {
        gamma_opt,
        max_rate,
        at_boundary: false,
        scan,
    })
}

/// `½‖ρ − σ‖₁`.
pub fn trace_distance(rho: &CMatrix, sigma: &CMatrix) -> Result<f64> {
    if rho.shape() != sigma.shape() {
        return Err(Error::DimensionMismatch(rho.nrows(), sigma.nrows()));
    }
    let diff = rho - sigma;
    Ok(0.5
        * hermitian_eigenvalues(&diff)
            .iter()
            .map(|x| x.abs())
            .sum::<f64>())
}

/// Indices `m` whose value exceeds some earlier value `values[k]` by more
/// than `factor` times the pooled standard error `√(se_k² + se_m²)`. A
/// contractive evolution produces none, whatever the grid spacing.
pub fn detect_recurrences(values: &[f64], stderr: &[f64], factor: f64) -> Vec<usize> {
    (1..values.len())
        .filter(|&m| {
            (0..m).any(|k| {
                let pooled = (stderr[k] * stderr[k] + stderr[m] * stderr[m]).sqrt();
                values[m] - values[k] > factor * pooled
            })
        })
        .collect()
}

/// Removes a background decay of lifetime `tau1` from an absorption curve:
/// `P′ = 1 − e^{−(t−t0)/τ₁}(1 − P)`.
pub fn decay_correction(curve: &TransferCurve, tau1: f64, t0: f64) -> Result<TransferCurve> {
    map_curve(curve, tau1, |p, t| {
        1.0 - (-(t - t0) / tau1).exp() * (1.0 - p)
    })
}

/// Inverse of [`decay_correction`].
pub fn decay_correction_inverse(
    curve: &TransferCurve,
    tau1: f64,
    t0: f64,
) -> Result<TransferCurve> {
    map_curve(curve, tau1, |p, t| {
        1.0 - ((t - t0) / tau1).exp() * (1.0 - p)
    })
}

fn map_curve(
    curve: &TransferCurve,
    tau1: f64,
    f: impl Fn(f64, f64) -> f64,
) -> Result<TransferCurve> {
    if !(tau1 > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "lifetime must be > 0, got {tau1}"
        )));
    }
    let values = curve
        .values
        .iter()
        .zip(&curve.times)
        .map(|(&p, &t)| f(p, t))
        .collect();
    Ok(TransferCurve {
        times: curve.times.clone(),
        values,
        stderr: None,
    })
}
