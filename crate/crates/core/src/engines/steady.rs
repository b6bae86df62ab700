//! Stationary states of time-independent generators.
//!
//! When the Hamiltonian conserves the excitation number, every dissipator
//! used here maps `|a⟩⟨b|` to operators with the same difference of
//! excitation numbers, so the stationary state lives in the block of
//! coherences between states of equal excitation number. That block is
//! solved as a real linear system in the Hermitian parameters of `ρ`, with
//! one population equation replaced by the trace condition.

use faer::linalg::solvers::PartialPivLu;
use faer::prelude::*;
use faer::Mat;
use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigenvalues, hermiticity_defect, trace, CMatrix, C64};
use crate::network::{Basis, Liouvillian};

/// Residual bound `‖L ρ‖` required of the solution.
pub const STEADY_RESIDUAL_TOL: f64 = 1e-10;
/// Slack on negative eigenvalues and on Hermiticity.
pub const PSD_SLACK: f64 = 1e-9;

/// Inverse of the relative amplification treated as exact singularity.
const SINGULAR_TOL: f64 = 1e-11;
/// Relative diagonal of the pivoted `R` factor counted as zero.
const NULL_TOL: f64 = 1e-10;

fn conserves_number(basis: &Basis, h: &CMatrix) -> bool {
    let d = basis.dim();
    (0..d).all(|a| {
        (0..d).all(|b| {
            basis.excitations(a) == basis.excitations(b) || h[(a, b)] == C64::new(0.0, 0.0)
        })
    })
}

/// Real parametrization of the Hermitian block: diagonal entries first
/// contribute one unknown, each pair `a < b` two (real and imaginary part).
struct BlockLayout {
    d: usize,
    /// `(a, b, param)` with `a ≤ b`.
    pairs: Vec<(usize, usize, usize)>,
    /// param index of the real part of `ρ_ab` for `a ≤ b`, or `usize::MAX`.
    lookup: Vec<usize>,
    n_params: usize,
}

impl BlockLayout {
    fn new(basis: &Basis, block_only: bool) -> Self {
        let d = basis.dim();
        let mut lookup = vec![usize::MAX; d * d];
        let mut pairs = Vec::new();
        let mut p = 0;
        for a in 0..d {
            lookup[a + a * d] = p;
            pairs.push((a, a, p));
            p += 1;
        }
        for a in 0..d {
            for b in a + 1..d {
                if !block_only || basis.excitations(a) == basis.excitations(b) {
                    lookup[a + b * d] = p;
                    pairs.push((a, b, p));
                    p += 2;
                }
            }
        }
        Self {
            d,
            pairs,
            lookup,
            n_params: p,
        }
    }

    fn to_density(&self, x: &DVector<f64>) -> CMatrix {
        let mut rho = CMatrix::zeros(self.d, self.d);
        for &(a, b, p) in &self.pairs {
            if a == b {
                rho[(a, a)] = C64::new(x[p], 0.0);
            } else {
                rho[(a, b)] = C64::new(x[p], x[p + 1]);
                rho[(b, a)] = C64::new(x[p], -x[p + 1]);
            }
        }
        rho
    }

    fn to_params(&self, rho: &CMatrix) -> Mat<f64> {
        let mut x = Mat::<f64>::zeros(self.n_params, 1);
        for &(a, b, p) in &self.pairs {
            x[(p, 0)] = rho[(a, b)].re;
            if a != b {
                x[(p + 1, 0)] = rho[(a, b)].im;
            }
        }
        x
    }

    /// Real matrix `M` with `M x` = stacked (Re, Im) parts of `(L ρ(x))_ab`
    /// for `a ≤ b` in the block.
    fn assemble(&self, triplets: &[(usize, usize, C64)]) -> Mat<f64> {
        let d = self.d;
        let n = self.n_params;
        let mut m = Mat::<f64>::zeros(n, n);
        for &(row, col, v) in triplets {
            let (a, b) = (row % d, row / d);
            if a > b {
                continue;
            }
            let rp = self.lookup[row];
            if rp == usize::MAX {
                continue;
            }
            let (c, e) = (col % d, col / d);
            // ρ_ce in terms of the parameters
            let (cp, coeff_re, coeff_im) = if c == e {
                (self.lookup[col], C64::new(1.0, 0.0), C64::new(0.0, 0.0))
            } else if c < e {
                (self.lookup[col], C64::new(1.0, 0.0), C64::new(0.0, 1.0))
            } else {
                (
                    self.lookup[e + c * d],
                    C64::new(1.0, 0.0),
                    C64::new(0.0, -1.0),
                )
            };
            if cp == usize::MAX {
                continue;
            }
            let g_re = v * coeff_re;
            m[(rp, cp)] += g_re.re;
            if a != b {
                m[(rp + 1, cp)] += g_re.im;
            }
            if c != e {
                let g_im = v * coeff_im;
                m[(rp, cp + 1)] += g_im.re;
                if a != b {
                    m[(rp + 1, cp + 1)] += g_im.im;
                }
            }
        }
        m
    }
}

/// Solves `L ρ = 0`, `tr ρ = 1`. Fails with [`Error::DegenerateSteadyState`]
/// when the stationary state is not unique.
pub fn steady_state(gen: &Liouvillian) -> Result<CMatrix> {
    solve(gen, None)
}

/// Long-time limit of `exp(L t) ρ0`: the projection of `ρ0` onto the
/// stationary states. Equals [`steady_state`] when that is unique; otherwise
/// the conserved quantities of `ρ0` select one member of the stationary
/// family.
pub fn steady_state_from(gen: &Liouvillian, rho0: &CMatrix) -> Result<CMatrix> {
    if rho0.nrows() != gen.dim() || rho0.ncols() != gen.dim() {
        return Err(Error::DimensionMismatch(rho0.nrows(), gen.dim()));
    }
    solve(gen, Some(rho0))
}

fn solve(gen: &Liouvillian, rho0: Option<&CMatrix>) -> Result<CMatrix> {
    let block_only = conserves_number(&gen.basis, gen.lindblad.hamiltonian());
    let layout = BlockLayout::new(&gen.basis, block_only);
    let m = layout.assemble(&gen.lindblad.superoperator_triplets());
    let n = layout.n_params;

    // the population equations sum to zero, so one of them is redundant
    let trace_row = 0;
    let mut a = m.clone();
    for k in 0..n {
        a[(trace_row, k)] = if k < layout.d { 1.0 } else { 0.0 };
    }
    let mut rhs = Mat::<f64>::zeros(n, 1);
    rhs[(trace_row, 0)] = 1.0;

    let lu = a.partial_piv_lu();
    let x = if !nearly_singular(&a, &lu) {
        let mut x = lu.solve(&rhs);
        let r = &rhs - &a * &x;
        x += lu.solve(&r);
        x
    } else {
        let (right, left) = null_spaces(&m);
        let k = right.ncols();
        match (k, rho0) {
            (0, _) => {
                return Err(Error::InvariantViolation {
                    t: f64::INFINITY,
                    what: "ill-conditioned steady-state system".into(),
                })
            }
            (1, _) => right,
            (k, None) => return Err(Error::DegenerateSteadyState(k)),
            (_, Some(rho0)) => {
                let x0 = layout.to_params(rho0);
                // spectral projector R (ZᵀR)⁻¹ Zᵀ onto the kernel
                let zr = left.transpose() * &right;
                let c = zr.partial_piv_lu().solve(left.transpose() * &x0);
                &right * c
            }
        }
    };
    let mut x = DVector::from_fn(n, |i, _| x[(i, 0)]);
    let tr: f64 = (0..layout.d).map(|k| x[k]).sum();
    x /= tr;

    let rho = layout.to_density(&x);
    let residual = gen.apply(&rho).camax();
    if residual > STEADY_RESIDUAL_TOL {
        return Err(Error::InvariantViolation {
            t: f64::INFINITY,
            what: format!("steady-state residual {residual:.3e}"),
        });
    }
    check_density(&rho)?;
    Ok(rho)
}

/// Two steps of inverse iteration: a genuinely singular matrix amplifies a
/// generic vector by about `1/ε`, while the smallest physical scale of the
/// generator stays many orders of magnitude above round-off.
fn nearly_singular(a: &Mat<f64>, lu: &PartialPivLu<f64>) -> bool {
    let n = a.nrows();
    let scale = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .fold(0.0f64, |m, (i, j)| m.max(a[(i, j)].abs()));
    let mut z = Mat::<f64>::from_fn(n, 1, |i, _| 1.0 + (i as f64 * 0.618_033_988_75).fract());
    let mut growth = 1.0;
    for _ in 0..2 {
        let norm = z.norm_l2();
        z = lu.solve(Mat::<f64>::from_fn(n, 1, |i, _| z[(i, 0)] / norm));
        growth = z.norm_l2();
        if !growth.is_finite() {
            return true;
        }
    }
    growth * scale * SINGULAR_TOL > 1.0
}

/// Right and left kernels of `m` from a column-pivoted QR, one vector per
/// column.
fn null_spaces(m: &Mat<f64>) -> (Mat<f64>, Mat<f64>) {
    let n = m.nrows();
    let qr = m.col_piv_qr();
    let r_factor = qr.R();
    let (pf, _) = qr.P().arrays();
    let scale = r_factor[(0, 0)].abs();
    let r = (0..n)
        .take_while(|&i| r_factor[(i, i)].abs() > NULL_TOL * scale)
        .count();
    let k = n - r;

    // Q R = m[:, pf]; R y = 0 with y = [−R11⁻¹ R12; I]
    let mut right = Mat::<f64>::zeros(n, k);
    for c in 0..k {
        let mut y = vec![0.0; n];
        y[r + c] = 1.0;
        for i in (0..r).rev() {
            let mut s = r_factor[(i, r + c)];
            for j in i + 1..r {
                s += r_factor[(i, j)] * y[j];
            }
            y[i] = -s / r_factor[(i, i)];
        }
        for j in 0..n {
            right[(pf[j], c)] = y[j];
        }
    }
    // trailing columns of Q annihilate m from the left
    let q = qr.compute_Q();
    let left = q.subcols(r, k).to_owned();
    (right, left)
}

fn check_density(rho: &CMatrix) -> Result<()> {
    let tr = trace(rho);
    if (tr.re - 1.0).abs() > 1e-10 {
        return Err(Error::InvariantViolation {
            t: f64::INFINITY,
            what: format!("trace {tr}"),
        });
    }
    let h = hermiticity_defect(rho);
    if h > PSD_SLACK {
        return Err(Error::InvariantViolation {
            t: f64::INFINITY,
            what: format!("hermiticity defect {h:.3e}"),
        });
    }
    let min_eig = hermitian_eigenvalues(rho)
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    if min_eig < -PSD_SLACK {
        return Err(Error::InvariantViolation {
            t: f64::INFINITY,
            what: format!("negative eigenvalue {min_eig:.3e}"),
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engines::propagate::{propagate, PropagateOptions, TimeGrid};
    use crate::ion_chain::{fully_connected, ideal_power_law};
    use crate::network::{
        build_full_generator, build_offresonant_generator, initial_state, InitialState, NetworkSpec,
    };

    fn populations(gen: &Liouvillian, rho: &CMatrix) -> Vec<f64> {
        (1..=gen.basis.n_sites())
            .map(|s| {
                (0..gen.dim())
                    .filter(|&k| gen.basis.occupied(k, s))
                    .map(|k| rho[(k, k)].re)
                    .sum()
            })
            .collect()
    }

    #[test]
    fn isolated_driven_site_is_half_filled() {
        // a site without sink or source keeps its occupation forever, so the
        // isolated network has only the driven site and the sink
        let mut spec = NetworkSpec::new(fully_connected(2).unwrap(), 1, 2)
            .unwrap()
            .with_gamma_source(0.7);
        spec.coupling.entries.fill(0.0);
        let g = build_full_generator(&spec, 2).unwrap();
        let rho = steady_state(&g).unwrap();
        let p = populations(&g, &rho);
        assert!((p[0] - 0.5).abs() < 1e-12);
        assert!(p[1].abs() < 1e-12);
    }

    #[test]
    fn undriven_network_relaxes_to_vacuum() {
        let spec = NetworkSpec::new(ideal_power_law(4, 1.0).unwrap(), 1, 3)
            .unwrap()
            .with_uniform_dephasing(0.2);
        let g = build_full_generator(&spec, 4).unwrap();
        let rho = steady_state(&g).unwrap();
        assert!((rho[(0, 0)].re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn closed_network_is_degenerate() {
        let spec = NetworkSpec::new(ideal_power_law(3, 1.0).unwrap(), 1, 3)
            .unwrap()
            .with_gamma_sink(0.0);
        let g = build_full_generator(&spec, 3).unwrap();
        assert!(matches!(steady_state(&g), Err(Error::DegenerateSteadyState(d)) if d > 1));
    }

    #[test]
    fn block_solution_matches_unrestricted_solve() {
        let spec = NetworkSpec::new(ideal_power_law(4, 1.3).unwrap(), 1, 4)
            .unwrap()
            .with_gamma_source(0.4)
            .with_site_energies(vec![0.3, -0.2, 0.0, 0.5])
            .with_uniform_dephasing(0.1);
        let g = build_full_generator(&spec, 4).unwrap();
        let block = steady_state(&g).unwrap();
        let layout = BlockLayout::new(&g.basis, false);
        let mut a = layout.assemble(&g.lindblad.superoperator_triplets());
        for k in 0..layout.n_params {
            a[(0, k)] = if k < layout.d { 1.0 } else { 0.0 };
        }
        let mut rhs = Mat::<f64>::zeros(layout.n_params, 1);
        rhs[(0, 0)] = 1.0;
        let x = a.partial_piv_lu().solve(&rhs);
        let full = layout.to_density(&DVector::from_fn(layout.n_params, |i, _| x[(i, 0)]));
        assert!((block - full).camax() < 1e-10);
    }

    #[test]
    fn degenerate_family_is_resolved_by_the_initial_state() {
        // complete graph: the antisymmetric mode of sites 2 and 3 never
        // reaches source or sink
        let spec = NetworkSpec::new(fully_connected(4).unwrap(), 1, 4)
            .unwrap()
            .with_gamma_source(0.3);
        let g = build_full_generator(&spec, 4).unwrap();
        assert!(matches!(
            steady_state(&g),
            Err(Error::DegenerateSteadyState(_))
        ));
        let vac = initial_state(&spec, &g.basis, InitialState::Vacuum).unwrap();
        let limit = steady_state_from(&g, &vac).unwrap();
        let grid = TimeGrid::new(vec![400.0]).unwrap();
        let late = propagate(&g, &vac, &grid, PropagateOptions::exponential())
            .unwrap()
            .pop()
            .unwrap();
        assert!((limit - late).camax() < 1e-8);
    }

    #[test]
    fn offresonant_generator_uses_unrestricted_path() {
        let spec = NetworkSpec::new(ideal_power_law(3, 1.0).unwrap(), 1, 3)
            .unwrap()
            .with_gamma_source(0.3);
        let g = build_offresonant_generator(&spec, 2.0, 3).unwrap();
        let rho = steady_state(&g).unwrap();
        assert!(g.apply(&rho).camax() < STEADY_RESIDUAL_TOL);
    }
}
