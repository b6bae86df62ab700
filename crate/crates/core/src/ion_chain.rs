//! Coupling matrices for a linear ion chain.
//!
//! Lengths are in the usual Coulomb-crystal unit `(e²/4πε₀ m ω_z²)^{1/3}` and
//! frequencies in units of the axial trap frequency `ω_z`. Couplings are always
//! normalized so that the largest off-diagonal magnitude is one, i.e. every
//! downstream rate and time is expressed in units of `J_max`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

const EQUILIBRIUM_TOL: f64 = 1e-13;
/// Residual accepted when round-off stalls the iteration above the target.
const EQUILIBRIUM_ACCEPT: f64 = 1e-12;
const NEWTON_BUDGET: usize = 200;

/// Trap geometry: ion count and transverse-to-axial frequency ratio.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrapParams {
    pub n_ions: usize,
    pub ratio: f64,
}

impl TrapParams {
    pub fn new(n_ions: usize, ratio: f64) -> Result<Self> {
        if n_ions == 0 {
            return Err(Error::InvalidParameter("n_ions must be at least 1".into()));
        }
        if !(ratio > 1.0) {
            return Err(Error::InvalidParameter(format!(
                "transverse/axial ratio must exceed 1, got {ratio}"
            )));
        }
        Ok(Self { n_ions, ratio })
    }

    pub fn modes(&self) -> Result<ChainModes> {
        let positions = equilibrium_positions(self.n_ions)?;
        transverse_modes(&positions, self.ratio)
    }
}

/// Equilibrium positions plus transverse normal modes of the chain.
#[derive(Debug, Clone)]
pub struct ChainModes {
    pub positions: Vec<f64>,
    /// Ascending transverse mode frequencies in units of `ω_z`.
    pub mode_freqs: Vec<f64>,
    /// Column `n` is the normalized participation vector `b_{·,n}` of mode `n`.
    pub mode_matrix: DMatrix<f64>,
    pub ratio: f64,
}

impl ChainModes {
    pub fn n_ions(&self) -> usize {
        self.positions.len()
    }

    pub fn max_freq(&self) -> f64 {
        self.mode_freqs.last().copied().unwrap_or(0.0)
    }
}

/// Where a coupling matrix came from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CouplingKind {
    IdealPowerLaw { alpha: f64 },
    MsDetuning { ratio: f64, detuning: f64 },
    FullyConnected,
    Custom,
}

/// Symmetric hopping matrix with zero diagonal, normalized to `J_max = 1`.
#[derive(Debug, Clone)]
pub struct CouplingMatrix {
    pub entries: DMatrix<f64>,
    pub kind: CouplingKind,
}

impl CouplingMatrix {
    /// Wraps an arbitrary symmetric matrix, zeroing the diagonal and
    /// normalizing to unit maximum off-diagonal magnitude.
    pub fn from_entries(entries: DMatrix<f64>, kind: CouplingKind) -> Result<Self> {
        let n = entries.nrows();
        if n != entries.ncols() {
            return Err(Error::DimensionMismatch(n, entries.ncols()));
        }
        let mut m = entries;
        for i in 0..n {
            m[(i, i)] = 0.0;
            for j in 0..i {
                if (m[(i, j)] - m[(j, i)]).abs() > 1e-12 * (1.0 + m[(i, j)].abs()) {
                    return Err(Error::InvalidParameter(format!(
                        "coupling matrix is not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        let jmax = max_off_diagonal(&m);
        if jmax > 0.0 {
            m /= jmax;
        }
        Ok(Self { entries: m, kind })
    }

    pub fn n_sites(&self) -> usize {
        self.entries.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[(i, j)]
    }

    /// Ascending eigenvalues (the single-excitation dispersion).
    pub fn spectrum(&self) -> Vec<f64> {
        sorted_eigenvalues(&self.entries)
    }

    pub fn negated(&self) -> Self {
        Self {
            entries: -&self.entries,
            kind: self.kind,
        }
    }
}

fn max_off_diagonal(m: &DMatrix<f64>) -> f64 {
    let n = m.nrows();
    let mut best = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            best = best.max(m[(i, j)].abs());
        }
    }
    best
}

fn sorted_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    let mut ev: Vec<f64> = m.clone().symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|a, b| a.total_cmp(b));
    ev
}

fn force_residual(u: &[f64]) -> Vec<f64> {
    let n = u.len();
    (0..n)
        .map(|i| {
            let mut f = u[i];
            for j in 0..n {
                if j == i {
                    continue;
                }
                let d = u[i] - u[j];
                f -= d.signum() / (d * d);
            }
            f
        })
        .collect()
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// Dimensionless equilibrium positions of `n_ions` ions in a harmonic trap,
/// ascending. Damped Newton iteration from a uniform-spacing ansatz.
pub fn equilibrium_positions(n_ions: usize) -> Result<Vec<f64>> {
    if n_ions == 0 {
        return Err(Error::InvalidParameter("n_ions must be at least 1".into()));
    }
    if n_ions == 1 {
        return Ok(vec![0.0]);
    }
    let n = n_ions;
    let spacing = 2.018 / (n as f64).powf(0.559);
    let mut u: Vec<f64> = (0..n)
        .map(|i| (i as f64 - (n as f64 - 1.0) / 2.0) * spacing)
        .collect();
    let mut f = force_residual(&u);
    let mut res = max_abs(&f);

    for _ in 0..NEWTON_BUDGET {
        if res < EQUILIBRIUM_TOL {
            break;
        }
        let mut jac = DMatrix::<f64>::zeros(n, n);
        for i in 0..n {
            jac[(i, i)] = 1.0;
            for j in 0..n {
                if i != j {
                    let c = 2.0 / (u[i] - u[j]).abs().powi(3);
                    jac[(i, i)] += c;
                    jac[(i, j)] = -c;
                }
            }
        }
        let rhs = nalgebra::DVector::from_vec(f.iter().map(|x| -x).collect());
        let step = jac.lu().solve(&rhs).ok_or(Error::NoConvergence {
            iterations: 0,
            residual: res,
        })?;

        let mut damping = 1.0;
        loop {
            let trial: Vec<f64> = u
                .iter()
                .zip(step.iter())
                .map(|(a, b)| a + damping * b)
                .collect();
            let ordered = trial.windows(2).all(|w| w[0] < w[1]);
            if ordered {
                let tf = force_residual(&trial);
                let tr = max_abs(&tf);
                if tr < res || damping < 1e-4 {
                    if tr >= res && res < EQUILIBRIUM_ACCEPT {
                        // stalled at round-off
                        break;
                    }
                    u = trial;
                    f = tf;
                    res = tr;
                    break;
                }
            }
            damping *= 0.5;
            if damping < 1e-6 {
                return Err(Error::NoConvergence {
                    iterations: NEWTON_BUDGET,
                    residual: res,
                });
            }
        }
    }
    if res >= EQUILIBRIUM_ACCEPT {
        return Err(Error::NoConvergence {
            iterations: NEWTON_BUDGET,
            residual: res,
        });
    }
    // restore exact mirror symmetry lost to round-off
    let sym: Vec<f64> = (0..n).map(|i| 0.5 * (u[i] - u[n - 1 - i])).collect();
    Ok(sym)
}

/// Transverse Hessian in units of `ω_z²`.
pub fn transverse_hessian(positions: &[f64], ratio: f64) -> DMatrix<f64> {
    let n = positions.len();
    let mut a = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        let mut diag = ratio * ratio;
        for j in 0..n {
            if i != j {
                let c = (positions[i] - positions[j]).abs().powi(-3);
                diag -= c;
                a[(i, j)] = c;
            }
        }
        a[(i, i)] = diag;
    }
    a
}

/// Transverse normal modes for the given equilibrium positions.
pub fn transverse_modes(positions: &[f64], ratio: f64) -> Result<ChainModes> {
    if positions.is_empty() {
        return Err(Error::InvalidParameter("empty chain".into()));
    }
    if !(ratio > 1.0) {
        return Err(Error::InvalidParameter(format!(
            "transverse/axial ratio must exceed 1, got {ratio}"
        )));
    }
    let n = positions.len();
    let hess = transverse_hessian(positions, ratio);
    let eig = SymmetricEigen::new(hess);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

    let mut freqs = Vec::with_capacity(n);
    let mut modes = DMatrix::<f64>::zeros(n, n);
    for (col, &k) in order.iter().enumerate() {
        let w2 = eig.eigenvalues[k];
        if w2 <= 0.0 {
            return Err(Error::StructuralInstability {
                mode: col,
                freq_sq: w2,
            });
        }
        freqs.push(w2.sqrt());
        let mut v = eig.eigenvectors.column(k).into_owned();
        // deterministic sign: first component of non-negligible size positive
        if let Some(first) = v.iter().find(|x| x.abs() > 1e-8) {
            if *first < 0.0 {
                v = -v;
            }
        }
        modes.set_column(col, &v);
    }
    Ok(ChainModes {
        positions: positions.to_vec(),
        mode_freqs: freqs,
        mode_matrix: modes,
        ratio,
    })
}

/// Mølmer–Sørensen spin-spin couplings mediated by the transverse modes,
/// `J_ij ∝ Σ_n b_in b_jn / (Δ² − ν_n²)`, with signs preserved.
pub fn ms_coupling_matrix(modes: &ChainModes, detuning: f64) -> Result<CouplingMatrix> {
    let n = modes.n_ions();
    if n < 2 {
        return Err(Error::InvalidParameter(
            "coupling matrix needs at least two ions".into(),
        ));
    }
    for (k, &nu) in modes.mode_freqs.iter().enumerate() {
        if (detuning - nu).abs() <= 1e-6 {
            return Err(Error::ResonantDetuning {
                detuning,
                mode: k,
                freq: nu,
            });
        }
    }
    let weights: Vec<f64> = modes
        .mode_freqs
        .iter()
        .map(|nu| 1.0 / (detuning * detuning - nu * nu))
        .collect();
    let b = &modes.mode_matrix;
    let mut j = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        for k in (i + 1)..n {
            let v: f64 = (0..n).map(|m| b[(i, m)] * b[(k, m)] * weights[m]).sum();
            j[(i, k)] = v;
            j[(k, i)] = v;
        }
    }
    CouplingMatrix::from_entries(
        j,
        CouplingKind::MsDetuning {
            ratio: modes.ratio,
            detuning,
        },
    )
}

/// `J_ij = |i − j|^{−α}` on an equidistant chain.
pub fn ideal_power_law(n_ions: usize, alpha: f64) -> Result<CouplingMatrix> {
    if !(alpha >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "alpha must be >= 0, got {alpha}"
        )));
    }
    if n_ions == 0 {
        return Err(Error::InvalidParameter("n_ions must be at least 1".into()));
    }
    let j = DMatrix::from_fn(n_ions, n_ions, |i, k| {
        if i == k {
            0.0
        } else {
            (i.abs_diff(k) as f64).powf(-alpha)
        }
    });
    Ok(CouplingMatrix {
        entries: j,
        kind: CouplingKind::IdealPowerLaw { alpha },
    })
}

/// Complete graph with unit couplings.
pub fn fully_connected(n_ions: usize) -> Result<CouplingMatrix> {
    if n_ions < 2 {
        return Err(Error::InvalidParameter(format!(
            "fully connected graph needs at least 2 sites, got {n_ions}"
        )));
    }
    let j = DMatrix::from_fn(n_ions, n_ions, |i, k| if i == k { 0.0 } else { 1.0 });
    Ok(CouplingMatrix {
        entries: j,
        kind: CouplingKind::FullyConnected,
    })
}

/// Result of fitting a power-law exponent to a dispersion relation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaFit {
    pub alpha: f64,
    pub chi2: f64,
}

const ALPHA_MAX: f64 = 6.0;
const ALPHA_TOL: f64 = 1e-6;

/// Fits the exponent of an ideal power law whose sorted spectrum best matches
/// the spectrum of `coupling` in the least-squares sense.
pub fn fit_alpha(coupling: &CouplingMatrix) -> Result<AlphaFit> {
    let n = coupling.n_sites();
    if n < 3 {
        return Err(Error::InvalidParameter(format!(
            "exponent fit needs at least 3 sites, got {n}"
        )));
    }
    let mut entries = coupling.entries.clone();
    let jmax = max_off_diagonal(&entries);
    if jmax > 0.0 {
        entries /= jmax;
    }
    let target = sorted_eigenvalues(&entries);
    let chi2 = |alpha: f64| -> f64 {
        let ideal = ideal_power_law(n, alpha)
            .expect("alpha in range")
            .spectrum();
        target
            .iter()
            .zip(&ideal)
            .map(|(a, b)| (a - b) * (a - b))
            .sum()
    };

    let coarse = 120;
    let step = ALPHA_MAX / coarse as f64;
    let mut best = (0usize, f64::INFINITY);
    for k in 0..=coarse {
        let c = chi2(k as f64 * step);
        if c < best.1 {
            best = (k, c);
        }
    }
    let lo = (best.0 as f64 - 1.0).max(0.0) * step;
    let hi = ((best.0 as f64 + 1.0) * step).min(ALPHA_MAX);
    let alpha = golden_section_min(chi2, lo, hi, ALPHA_TOL);
    let (alpha, value) = [lo, hi, alpha]
        .into_iter()
        .map(|a| (a, chi2(a)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("three candidates");
    Ok(AlphaFit { alpha, chi2: value })
}

/// Blue detuning above the top transverse mode whose couplings fit the
/// exponent `alpha`. The fitted exponent grows monotonically with `Δ`, so a
/// bisection in `ln(Δ/ν_max − 1)` is enough.
pub fn detuning_for_alpha(modes: &ChainModes, alpha: f64) -> Result<f64> {
    let nu_max = modes.mode_freqs.iter().copied().fold(f64::MIN, f64::max);
    let fitted = |x: f64| -> Result<f64> {
        Ok(fit_alpha(&ms_coupling_matrix(modes, nu_max * (1.0 + x.exp()))?)?.alpha)
    };
    let (mut lo, mut hi) = (-12.0f64, 7.0f64);
    let (a_lo, a_hi) = (fitted(lo)?, fitted(hi)?);
    if !(a_lo..=a_hi).contains(&alpha) {
        return Err(Error::InvalidParameter(format!(
            "exponent {alpha} outside the reachable range [{a_lo:.4}, {a_hi:.4}]"
        )));
    }
    while hi - lo > 1e-10 {
        let mid = 0.5 * (lo + hi);
        if fitted(mid)? < alpha {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(nu_max * (1.0 + (0.5 * (lo + hi)).exp()))
}

pub(crate) fn golden_section_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Average group velocity `(N − 1)(λ_max − λ_min)/π` of the spin-wave dispersion.
pub fn avg_group_velocity(coupling: &CouplingMatrix) -> Result<f64> {
    let n = coupling.n_sites();
    if n < 2 {
        return Err(Error::InvalidParameter(
            "group velocity needs at least 2 sites".into(),
        ));
    }
    let ev = coupling.spectrum();
    Ok((n as f64 - 1.0) * (ev[n - 1] - ev[0]) / PI)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn small_chain_positions_are_analytic() {
        assert_eq!(equilibrium_positions(1).unwrap(), vec![0.0]);
        let two = equilibrium_positions(2).unwrap();
        let a = 0.25f64.powf(1.0 / 3.0);
        assert_abs_diff_eq!(two[0], -a, epsilon = 1e-12);
        assert_abs_diff_eq!(two[1], a, epsilon = 1e-12);
        let three = equilibrium_positions(3).unwrap();
        let b = 1.25f64.powf(1.0 / 3.0);
        assert_abs_diff_eq!(three[0], -b, epsilon = 1e-12);
        assert_abs_diff_eq!(three[1], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(three[2], b, epsilon = 1e-12);
    }

    #[test]
    fn positions_balance_forces_for_long_chains() {
        for n in [4, 10, 30, 70] {
            let u = equilibrium_positions(n).unwrap();
            assert!(max_abs(&force_residual(&u)) < 1e-12, "n = {n}");
            assert!(u.windows(2).all(|w| w[0] < w[1]));
            for i in 0..n {
                assert!((u[i] + u[n - 1 - i]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn zero_ions_rejected() {
        assert!(equilibrium_positions(0).is_err());
        assert!(TrapParams::new(0, 20.0).is_err());
        assert!(TrapParams::new(3, 1.0).is_err());
    }

    #[test]
    fn small_chain_modes() {
        let m = TrapParams::new(1, 20.0).unwrap().modes().unwrap();
        assert_abs_diff_eq!(m.mode_freqs[0], 20.0, epsilon = 1e-12);
        let m = TrapParams::new(2, 20.0).unwrap().modes().unwrap();
        assert_abs_diff_eq!(m.mode_freqs[0], (400.0f64 - 1.0).sqrt(), epsilon = 1e-10);
        assert_abs_diff_eq!(m.mode_freqs[1], 20.0, epsilon = 1e-10);
    }

    #[test]
    fn modes_are_orthonormal_and_reproduce_the_hessian() {
        let u = equilibrium_positions(10).unwrap();
        let m = transverse_modes(&u, 20.0).unwrap();
        let b = &m.mode_matrix;
        let gram = b.transpose() * b;
        assert!((gram - DMatrix::<f64>::identity(10, 10)).amax() < 1e-10);
        assert_abs_diff_eq!(m.max_freq(), 20.0, epsilon = 1e-10);
        let a = transverse_hessian(&u, 20.0);
        for n in 0..10 {
            let v = b.column(n);
            let r = &a * v - v * m.mode_freqs[n].powi(2);
            assert!(r.norm() < 1e-10);
        }
        assert!(m.mode_freqs.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn zigzag_instability_is_reported() {
        let u = equilibrium_positions(10).unwrap();
        match transverse_modes(&u, 1.5) {
            Err(Error::StructuralInstability { mode, .. }) => assert_eq!(mode, 0),
            other => panic!("expected instability, got {other:?}"),
        }
    }

    #[test]
    fn resonant_detuning_rejected() {
        let m = TrapParams::new(4, 20.0).unwrap().modes().unwrap();
        let nu = m.mode_freqs[2];
        assert!(matches!(
            ms_coupling_matrix(&m, nu),
            Err(Error::ResonantDetuning { mode: 2, .. })
        ));
    }

    #[test]
    fn two_ion_ms_coupling_is_unit() {
        let m = TrapParams::new(2, 20.0).unwrap().modes().unwrap();
        let j = ms_coupling_matrix(&m, 25.0).unwrap();
        assert_abs_diff_eq!(j.get(0, 1).abs(), 1.0, epsilon = 1e-14);
        assert_eq!(j.get(0, 0), 0.0);
    }

    #[test]
    fn ms_coupling_is_mirror_symmetric() {
        let m = TrapParams::new(9, 20.0).unwrap().modes().unwrap();
        let j = ms_coupling_matrix(&m, 1.1 * m.max_freq()).unwrap();
        let n = 9;
        for a in 0..n {
            for b in 0..n {
                let d = j.get(a, b).abs() - j.get(n - 1 - a, n - 1 - b).abs();
                assert!(d.abs() < 1e-10);
            }
        }
    }

    #[test]
    fn ideal_and_complete_graphs() {
        let j = ideal_power_law(3, 1.0).unwrap();
        assert_eq!(j.get(0, 1), 1.0);
        assert_eq!(j.get(1, 2), 1.0);
        assert_eq!(j.get(0, 2), 0.5);
        let j0 = ideal_power_law(3, 0.0).unwrap();
        assert!(j0.entries.iter().enumerate().all(|(k, &v)| if k % 4 == 0 {
            v == 0.0
        } else {
            v == 1.0
        }));
        let fc = fully_connected(10).unwrap();
        assert_eq!(fc.entries, ideal_power_law(10, 0.0).unwrap().entries);
        assert_eq!(
            fully_connected(2).unwrap().entries,
            DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0])
        );
        assert!(fully_connected(1).is_err());
        assert!(ideal_power_law(4, -0.5).is_err());
    }

    #[test]
    fn ideal_power_law_elementwise() {
        let j = ideal_power_law(10, 1.2).unwrap();
        for a in 0..10usize {
            for b in 0..10usize {
                let expected = if a == b {
                    0.0
                } else {
                    (a.abs_diff(b) as f64).powf(-1.2)
                };
                assert_abs_diff_eq!(j.get(a, b), expected, epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn group_velocity_of_known_graphs() {
        let fc = fully_connected(10).unwrap();
        assert_abs_diff_eq!(avg_group_velocity(&fc).unwrap(), 90.0 / PI, epsilon = 1e-10);
        let pair = fully_connected(2).unwrap();
        assert_abs_diff_eq!(
            avg_group_velocity(&pair).unwrap(),
            2.0 / PI,
            epsilon = 1e-12
        );
        let j = ideal_power_law(12, 1.4).unwrap();
        assert_abs_diff_eq!(
            avg_group_velocity(&j).unwrap(),
            avg_group_velocity(&j.negated()).unwrap(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn fit_recovers_complete_graph() {
        let f = fit_alpha(&fully_connected(10).unwrap()).unwrap();
        assert!(f.alpha.abs() < 1e-4, "{f:?}");
        assert!(fit_alpha(&fully_connected(2).unwrap()).is_err());
    }

    #[test]
    fn detuning_for_alpha_hits_the_target() {
        let modes = transverse_modes(&equilibrium_positions(6).unwrap(), 20.0).unwrap();
        let det = detuning_for_alpha(&modes, 1.5).unwrap();
        assert!(det > 20.0);
        let fit = fit_alpha(&ms_coupling_matrix(&modes, det).unwrap()).unwrap();
        assert!((fit.alpha - 1.5).abs() < 1e-4, "{}", fit.alpha);
        assert!(detuning_for_alpha(&modes, 5.0).is_err());
    }
}
