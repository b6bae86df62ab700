//! Open-network model assembly: Hamiltonian, sink/source/dephasing
//! dissipators, and the noise samplers that feed the ensemble engines.

mod basis;
mod lindblad;
pub mod sampling;
mod spec;

pub use basis::{Basis, SparseOp};
pub use lindblad::Lindbladian;
pub use sampling::{sample_disorder, sample_telegraph, SitePath, TelegraphPath};
pub use spec::{DisorderSpec, NetworkSpec, NoiseModel, Telegraph};

use crate::error::{Error, Result};
use crate::ion_chain::CouplingMatrix;
use crate::linalg::{CMatrix, CVector, C64};

/// A Lindblad generator together with the basis it acts on.
#[derive(Debug, Clone)]
pub struct Liouvillian {
    pub basis: Basis,
    pub lindblad: Lindbladian,
}

impl Liouvillian {
    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn apply(&self, rho: &CMatrix) -> CMatrix {
        self.lindblad.apply(rho)
    }
}

fn coherent_part(spec: &NetworkSpec, basis: &Basis) -> CMatrix {
    let mut h = basis.hopping(&spec.coupling.entries);
    for (k, e) in basis.onsite(&spec.site_energies).into_iter().enumerate() {
        h[(k, k)] += C64::new(e, 0.0);
    }
    h
}

fn dissipators(spec: &NetworkSpec, basis: &Basis, with_source: bool) -> Vec<SparseOp> {
    let mut jumps = Vec::new();
    if spec.gamma_sink > 0.0 {
        jumps.push(basis.lowering(spec.sink).scaled(spec.gamma_sink.sqrt()));
    }
    if let Some(rates) = spec.dephasing.markovian_rates() {
        for (i, &g) in rates.iter().enumerate() {
            if g > 0.0 {
                jumps.push(basis.number(i + 1).scaled(g.sqrt()));
            }
        }
    }
    if with_source && spec.gamma_source > 0.0 {
        // infinite-temperature bath: lowering and raising at equal rate
        let r = spec.gamma_source.sqrt();
        jumps.push(basis.lowering(spec.source).scaled(r));
        jumps.push(basis.raising(spec.source).scaled(r));
    }
    jumps
}

/// Generator on the vacuum ⊕ single-excitation space (dimension `N + 1`).
///
/// Telegraph noise is not part of the generator; the engines add it through
/// time-dependent site energies.
pub fn build_sector_generator(spec: &NetworkSpec) -> Result<Liouvillian> {
    spec.validate()?;
    if spec.gamma_source != 0.0 {
        return Err(Error::SourceInSector(spec.gamma_source));
    }
    let basis = Basis::sector(spec.n_sites());
    let h = coherent_part(spec, &basis);
    let jumps = dissipators(spec, &basis, false);
    Ok(Liouvillian {
        lindblad: Lindbladian::new(h, jumps),
        basis,
    })
}

/// Generator on the many-body space truncated at `max_excitations`.
pub fn build_full_generator(spec: &NetworkSpec, max_excitations: usize) -> Result<Liouvillian> {
    spec.validate()?;
    let n = spec.n_sites();
    if max_excitations < 1 || max_excitations > n {
        return Err(Error::InvalidParameter(format!(
            "excitation cutoff {max_excitations} outside 1..={n}"
        )));
    }
    if n > 20 && max_excitations > 3 {
        return Err(Error::InvalidParameter(format!(
            "cutoff {max_excitations} too large for {n} sites"
        )));
    }
    let basis = Basis::truncated(n, max_excitations);
    let h = coherent_part(spec, &basis);
    let jumps = dissipators(spec, &basis, true);
    Ok(Liouvillian {
        lindblad: Lindbladian::new(h, jumps),
        basis,
    })
}

/// `Σ_{i<j} J_ij σˣ_i σˣ_j + ω_const N_exc` split into its number-conserving
/// part and the counter-rotating pair terms.
#[derive(Debug, Clone)]
pub struct OffResonantHamiltonian {
    pub basis: Basis,
    /// Flip-flop hopping `H_J`.
    pub conserving: CMatrix,
    /// Pair creation `K = Σ_{i<j} J_ij σ⁺_i σ⁺_j` (its adjoint annihilates pairs).
    pub pair_creation: CMatrix,
    pub omega_const: f64,
}

impl OffResonantHamiltonian {
    /// Hamiltonian in the frame rotating at `ω_const`:
    /// `H_J + K e^{2iω t} + K† e^{−2iω t}`.
    pub fn rotating_frame(&self, t: f64) -> CMatrix {
        let phase = C64::from_polar(1.0, 2.0 * self.omega_const * t);
        &self.conserving + &self.pair_creation * phase + self.pair_creation.adjoint() * phase.conj()
    }

    /// Time-independent lab-frame Hamiltonian `H_J + K + K† + ω_const N_exc`.
    /// Populations agree with the rotating frame at all times.
    pub fn lab_frame(&self) -> CMatrix {
        let mut h = &self.conserving + &self.pair_creation + self.pair_creation.adjoint();
        for k in 0..self.basis.dim() {
            h[(k, k)] += C64::new(self.omega_const * self.basis.excitations(k) as f64, 0.0);
        }
        h
    }
}

pub fn build_offresonant_hamiltonian(
    coupling: &CouplingMatrix,
    omega_const: f64,
    max_excitations: usize,
) -> Result<OffResonantHamiltonian> {
    if !(omega_const >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "omega_const must be >= 0, got {omega_const}"
        )));
    }
    let n = coupling.n_sites();
    if max_excitations < 1 || max_excitations > n {
        return Err(Error::InvalidParameter(format!(
            "excitation cutoff {max_excitations} outside 1..={n}"
        )));
    }
    let basis = Basis::truncated(n, max_excitations);
    let conserving = basis.hopping(&coupling.entries);
    let pair_creation = basis.pair_creation(&coupling.entries);
    Ok(OffResonantHamiltonian {
        basis,
        conserving,
        pair_creation,
        omega_const,
    })
}

/// Lab-frame generator including the counter-rotating terms, plus the sink,
/// dephasing and source dissipators of `spec`.
pub fn build_offresonant_generator(
    spec: &NetworkSpec,
    omega_const: f64,
    max_excitations: usize,
) -> Result<Liouvillian> {
    spec.validate()?;
    let off = build_offresonant_hamiltonian(&spec.coupling, omega_const, max_excitations)?;
    let mut h = off.lab_frame();
    for (k, e) in off
        .basis
        .onsite(&spec.site_energies)
        .into_iter()
        .enumerate()
    {
        h[(k, k)] += C64::new(e, 0.0);
    }
    let jumps = dissipators(spec, &off.basis, true);
    Ok(Liouvillian {
        lindblad: Lindbladian::new(h, jumps),
        basis: off.basis,
    })
}

/// Initial-state choices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitialState {
    SingleExcitationAtSource,
    SingleExcitationAt(usize),
    Vacuum,
    /// `(|vac⟩ + |k⟩)/√2`.
    SuperpositionHalfSite(usize),
}

/// Pure-state amplitudes of `kind` in `basis`.
pub fn initial_amplitudes(
    spec: &NetworkSpec,
    basis: &Basis,
    kind: InitialState,
) -> Result<CVector> {
    let n = basis.n_sites();
    let check = |site: usize| {
        if site < 1 || site > n {
            Err(Error::InvalidParameter(format!(
                "site {site} outside 1..={n}"
            )))
        } else {
            Ok(site)
        }
    };
    let mut psi = CVector::zeros(basis.dim());
    match kind {
        InitialState::SingleExcitationAtSource => {
            psi[basis.site_index(check(spec.source)?)] = C64::new(1.0, 0.0);
        }
        InitialState::SingleExcitationAt(k) => {
            psi[basis.site_index(check(k)?)] = C64::new(1.0, 0.0)
        }
        InitialState::Vacuum => psi[0] = C64::new(1.0, 0.0),
        InitialState::SuperpositionHalfSite(k) => {
            let a = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
            psi[0] = a;
            psi[basis.site_index(check(k)?)] = a;
        }
    }
    Ok(psi)
}

/// Density matrix `|ψ⟩⟨ψ|` of `kind` in `basis`.
pub fn initial_state(spec: &NetworkSpec, basis: &Basis, kind: InitialState) -> Result<CMatrix> {
    let psi = initial_amplitudes(spec, basis, kind)?;
    Ok(&psi * psi.adjoint())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ion_chain::{fully_connected, ideal_power_law};

    #[test]
    fn sector_generator_rejects_source() {
        let spec = NetworkSpec::new(fully_connected(4).unwrap(), 1, 3)
            .unwrap()
            .with_gamma_source(0.5);
        assert!(matches!(
            build_sector_generator(&spec),
            Err(Error::SourceInSector(_))
        ));
    }

    #[test]
    fn cutoff_range_checked() {
        let spec = NetworkSpec::new(fully_connected(4).unwrap(), 1, 3).unwrap();
        assert!(build_full_generator(&spec, 0).is_err());
        assert!(build_full_generator(&spec, 5).is_err());
        assert_eq!(build_full_generator(&spec, 4).unwrap().dim(), 16);
    }

    #[test]
    fn sector_coherent_part_is_coupling_plus_energies() {
        let spec = NetworkSpec::new(ideal_power_law(4, 1.0).unwrap(), 1, 3)
            .unwrap()
            .with_site_energies(vec![0.1, 0.2, 0.3, 0.4]);
        let g = build_sector_generator(&spec).unwrap();
        let h = g.lindblad.hamiltonian();
        for i in 1..=4 {
            assert!((h[(i, i)].re - 0.1 * i as f64).abs() < 1e-15);
            for j in 1..=4 {
                if i != j {
                    assert_eq!(h[(i, j)].re, spec.coupling.get(i - 1, j - 1));
                }
            }
            assert_eq!(h[(0, i)], C64::new(0.0, 0.0));
        }
    }

    #[test]
    fn sector_dephasing_rates_follow_site_pairs() {
        // J = 0, Γ = 0: only dephasing acts
        let mut spec = NetworkSpec::new(fully_connected(3).unwrap(), 1, 3).unwrap();
        spec.coupling.entries.fill(0.0);
        let spec = spec
            .with_gamma_sink(0.0)
            .with_dephasing(NoiseModel::Markovian {
                rates: vec![0.2, 0.4, 0.8],
            });
        let g = build_sector_generator(&spec).unwrap();
        let rho = CMatrix::from_element(4, 4, C64::new(1.0, 0.0));
        let d = g.apply(&rho);
        let rates = [0.0, 0.2, 0.4, 0.8];
        for a in 0..4 {
            for b in 0..4 {
                let expected = if a == b {
                    0.0
                } else if a == 0 || b == 0 {
                    -0.5 * rates[a.max(b)]
                } else {
                    -0.5 * (rates[a] + rates[b])
                };
                assert!((d[(a, b)].re - expected).abs() < 1e-14, "({a},{b})");
            }
        }
    }

    #[test]
    fn initial_states() {
        let spec = NetworkSpec::with_default_sites(fully_connected(10).unwrap()).unwrap();
        assert_eq!((spec.source, spec.sink), (3, 7));
        let b = Basis::sector(10);
        let r = initial_state(&spec, &b, InitialState::SingleExcitationAtSource).unwrap();
        assert_eq!(r[(3, 3)].re, 1.0);
        let r = initial_state(&spec, &b, InitialState::SuperpositionHalfSite(2)).unwrap();
        assert!((r.trace().re - 1.0).abs() < 1e-15);
        assert!((r[(2, 2)].re - 0.5).abs() < 1e-15);
        assert!(initial_state(&spec, &b, InitialState::SuperpositionHalfSite(11)).is_err());
        let v = initial_state(&spec, &b, InitialState::Vacuum).unwrap();
        assert_eq!(v[(0, 0)].re, 1.0);
    }

    #[test]
    fn vacuum_is_stationary() {
        let spec = NetworkSpec::with_default_sites(ideal_power_law(6, 1.0).unwrap())
            .unwrap()
            .with_uniform_dephasing(0.3);
        let g = build_sector_generator(&spec).unwrap();
        let v = initial_state(&spec, &g.basis, InitialState::Vacuum).unwrap();
        assert!(g.apply(&v).norm() < 1e-15);
    }

    #[test]
    fn offresonant_lab_and_rotating_frames_share_the_number_conserving_part() {
        let c = ideal_power_law(4, 1.0).unwrap();
        let off = build_offresonant_hamiltonian(&c, 3.0, 4).unwrap();
        let h0 = off.rotating_frame(0.0);
        let lab = off.lab_frame();
        let mut diff = &lab - &h0;
        for k in 0..off.basis.dim() {
            diff[(k, k)] -= C64::new(3.0 * off.basis.excitations(k) as f64, 0.0);
        }
        assert!(diff.norm() < 1e-14);
        assert!((&lab - lab.adjoint()).norm() < 1e-14);
        assert!(build_offresonant_hamiltonian(&c, -1.0, 2).is_err());
    }
}
