//! Pure-state propagation in the single-excitation sector.
//!
//! Without Markovian dephasing and source driving, the only quantum jump is
//! the sink decay, which lands in the vacuum and stays there. The
//! unconditional state is then fully determined by the no-jump amplitude
//! vector `ψ̃(t)` evolving under `H − (iΓ/2)|sink⟩⟨sink|`:
//! `ρ = |ψ̃⟩⟨ψ̃| + (1 − ‖ψ̃‖²)|vac⟩⟨vac|`.

use std::collections::HashMap;

use super::propagate::TimeGrid;
use crate::error::{Error, Result};
use crate::linalg::{expm, expm_action, CMatrix, CVector, C64};
use crate::network::{Basis, NetworkSpec, TelegraphPath};

/// No-jump amplitudes at the grid points.
#[derive(Debug, Clone)]
pub struct PureTrajectory {
    pub times: Vec<f64>,
    pub amplitudes: Vec<CVector>,
}

impl PureTrajectory {
    /// Weight that has left through the sink by grid point `k`.
    pub fn absorbed(&self, k: usize) -> f64 {
        1.0 - self.amplitudes[k].norm_squared()
    }

    pub fn density(&self, k: usize) -> CMatrix {
        reconstruct_density(&self.amplitudes[k])
    }
}

/// `|ψ̃⟩⟨ψ̃| + (1 − ‖ψ̃‖²)|vac⟩⟨vac|`.
pub fn reconstruct_density(psi: &CVector) -> CMatrix {
    let mut rho = psi * psi.adjoint();
    rho[(0, 0)] += C64::new(1.0 - psi.norm_squared(), 0.0);
    rho
}

fn check_pure_preconditions(spec: &NetworkSpec, psi0: &CVector) -> Result<()> {
    spec.validate()?;
    if spec.gamma_source != 0.0 {
        return Err(Error::SourceInSector(spec.gamma_source));
    }
    if spec.dephasing.markovian_rates().is_some() {
        return Err(Error::InvalidParameter(
            "pure-state propagation cannot include Markovian dephasing".into(),
        ));
    }
    if psi0.len() != spec.n_sites() + 1 {
        return Err(Error::DimensionMismatch(psi0.len(), spec.n_sites() + 1));
    }
    Ok(())
}

/// `−i (H − (iΓ/2) n_sink)` on the sector, vacuum row and column zero.
fn no_jump_generator(spec: &NetworkSpec) -> CMatrix {
    let basis = Basis::sector(spec.n_sites());
    let mut h = basis.hopping(&spec.coupling.entries);
    for (k, e) in basis.onsite(&spec.site_energies).into_iter().enumerate() {
        h[(k, k)] += C64::new(e, 0.0);
    }
    h[(spec.sink, spec.sink)] -= C64::new(0.0, 0.5 * spec.gamma_sink);
    h * C64::new(0.0, -1.0)
}

/// Static Hamiltonian: exact stepping with cached `exp(A Δt)`.
pub fn propagate_pure(
    spec: &NetworkSpec,
    psi0: &CVector,
    grid: &TimeGrid,
) -> Result<PureTrajectory> {
    check_pure_preconditions(spec, psi0)?;
    let a = no_jump_generator(spec);
    let mut cache: HashMap<u64, CMatrix> = HashMap::new();
    let mut psi = psi0.clone();
    let mut t = 0.0;
    let mut amplitudes = Vec::with_capacity(grid.len());
    for &tp in grid.points() {
        let dt = tp - t;
        if dt > 0.0 {
            let u = cache
                .entry(dt.to_bits())
                .or_insert_with(|| expm(&a.scale(dt)));
            psi = &*u * psi;
        }
        t = tp;
        amplitudes.push(psi.clone());
    }
    Ok(PureTrajectory {
        times: grid.points().to_vec(),
        amplitudes,
    })
}

/// Propagates under the telegraph-modulated site energies of `path`, on top
/// of the static energies of `spec`. Switch times and grid points are both
/// step boundaries, so every segment is an exact exponential.
pub fn propagate_telegraph_trajectory(
    spec: &NetworkSpec,
    path: &TelegraphPath,
    psi0: &CVector,
    grid: &TimeGrid,
) -> Result<PureTrajectory> {
    check_pure_preconditions(spec, psi0)?;
    let n = spec.n_sites();
    if path.sites.len() != n {
        return Err(Error::DimensionMismatch(path.sites.len(), n));
    }
    let base = no_jump_generator(spec);
    let switches = path.switch_times();
    let half = 0.5 * path.omega_gk;

    let mut signs: Vec<f64> = path.sites.iter().map(|s| s.initial_sign as f64).collect();
    // per-site cursor into its switch list
    let mut cursor = vec![0usize; n];
    let mut a = base.clone();
    let set_diag = |a: &mut CMatrix, signs: &[f64]| {
        for i in 0..n {
            a[(i + 1, i + 1)] = base[(i + 1, i + 1)] + C64::new(0.0, -signs[i] * half);
        }
    };
    set_diag(&mut a, &signs);

    let mut psi = psi0.clone();
    let mut t = 0.0;
    let mut next_switch = 0usize;
    let mut amplitudes = Vec::with_capacity(grid.len());
    for &tp in grid.points() {
        while t < tp {
            let boundary = switches
                .get(next_switch)
                .copied()
                .filter(|&s| s < tp)
                .unwrap_or(tp);
            if boundary > t {
                psi = expm_action(&a, &psi, boundary - t);
                t = boundary;
            }
            if boundary < tp || switches.get(next_switch) == Some(&tp) {
                // apply every switch that happens at `boundary`
                for i in 0..n {
                    let sw = &path.sites[i].switches;
                    while cursor[i] < sw.len() && sw[cursor[i]] <= boundary {
                        signs[i] = -signs[i];
                        cursor[i] += 1;
                    }
                }
                set_diag(&mut a, &signs);
                next_switch += 1;
            }
        }
        amplitudes.push(psi.clone());
    }
    Ok(PureTrajectory {
        times: grid.points().to_vec(),
        amplitudes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engines::propagate::{propagate, propagate_piecewise, PropagateOptions};
    use crate::ion_chain::ideal_power_law;
    use crate::network::{
        build_sector_generator, initial_amplitudes, sample_telegraph, InitialState, Telegraph,
    };

    fn spec4() -> NetworkSpec {
        NetworkSpec::new(ideal_power_law(4, 0.9).unwrap(), 1, 3)
            .unwrap()
            .with_site_energies(vec![0.2, -0.4, 0.1, 0.3])
    }

    #[test]
    fn noise_free_telegraph_matches_density_matrix_engine() {
        let spec = spec4();
        let g = build_sector_generator(&spec).unwrap();
        let psi0 =
            initial_amplitudes(&spec, &g.basis, InitialState::SingleExcitationAtSource).unwrap();
        let grid = TimeGrid::linspace(0.0, 8.0, 33).unwrap();
        let path = sample_telegraph(&Telegraph::new(0.0, 3.0).unwrap(), 4, 8.0, 5, 0).unwrap();
        let traj = propagate_telegraph_trajectory(&spec, &path, &psi0, &grid).unwrap();
        let rho0 = &psi0 * psi0.adjoint();
        let dm = propagate(&g, &rho0, &grid, PropagateOptions::exponential()).unwrap();
        for (k, rho) in dm.iter().enumerate() {
            assert!((traj.density(k) - rho).camax() < 1e-8);
        }
    }

    #[test]
    fn fixed_path_matches_piecewise_density_matrix() {
        let spec = spec4();
        let g = build_sector_generator(&spec).unwrap();
        let noise = Telegraph::new(3.0, 1.5).unwrap();
        let grid = TimeGrid::linspace(0.0, 5.0, 26).unwrap();
        let path = sample_telegraph(&noise, 4, 5.0, 17, 3).unwrap();
        let mut pieces = vec![(
            0.0,
            g.lindblad.with_diagonal_shift(&sector_shift(&path, 0.0)),
        )];
        for s in path.switch_times() {
            pieces.push((s, g.lindblad.with_diagonal_shift(&sector_shift(&path, s))));
        }
        for kind in [
            InitialState::SingleExcitationAtSource,
            InitialState::SuperpositionHalfSite(2),
        ] {
            let psi0 = initial_amplitudes(&spec, &g.basis, kind).unwrap();
            let traj = propagate_telegraph_trajectory(&spec, &path, &psi0, &grid).unwrap();
            let rho0 = &psi0 * psi0.adjoint();
            let dm = propagate_piecewise(&pieces, &rho0, &grid, PropagateOptions::exponential())
                .unwrap();
            for (k, rho) in dm.iter().enumerate() {
                let d = (traj.density(k) - rho).camax();
                assert!(d < 1e-8, "{kind:?} k={k} d={d}");
            }
        }
    }

    fn sector_shift(path: &TelegraphPath, t: f64) -> Vec<f64> {
        let mut v = vec![0.0];
        v.extend(path.energies_at(t));
        v
    }

    #[test]
    fn pure_engine_rejects_dephasing() {
        let spec = spec4().with_uniform_dephasing(0.1);
        let psi0 = CVector::zeros(5);
        let grid = TimeGrid::linspace(0.0, 1.0, 2).unwrap();
        assert!(propagate_pure(&spec, &psi0, &grid).is_err());
    }
}
