//! Independent constructions checked against the engines.
#![allow(clippy::needless_range_loop)]

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use enaqt::engines::{
    propagate, propagate_telegraph_trajectory, run_ensemble, steady_state, EnsembleOptions,
    Observable, PropagateOptions, TimeGrid, Variation,
};
use enaqt::ion_chain::{
    equilibrium_positions, fit_alpha, ideal_power_law, ms_coupling_matrix, transverse_modes,
    CouplingKind, CouplingMatrix,
};
use enaqt::linalg::{hermitian_eigenvalues, CMatrix, C64};
use enaqt::network::{
    build_full_generator, build_sector_generator, initial_amplitudes, initial_state, InitialState,
    NetworkSpec, NoiseModel, SitePath, Telegraph, TelegraphPath,
};

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// `op` on `site` (1-based) of an `n`-site register, with site `n` as the
/// leftmost tensor factor so that the row index equals the bitmask.
fn embed(op: &CMatrix, site: usize, n: usize) -> CMatrix {
    let id = CMatrix::identity(2, 2);
    let mut m = CMatrix::identity(1, 1);
    for s in (1..=n).rev() {
        m = kron(&m, if s == site { op } else { &id });
    }
    m
}

fn dissipator(l: &CMatrix, rho: &CMatrix) -> CMatrix {
    let ld = l.adjoint();
    let ltl = &ld * l;
    l * rho * &ld - (&ltl * rho + rho * &ltl) * c(0.5)
}

fn random_spec(rng: &mut ChaCha8Rng, n: usize) -> NetworkSpec {
    let mut j = DMatrix::zeros(n, n);
    for a in 0..n {
        for b in (a + 1)..n {
            let v = rng.random_range(-1.0..1.0);
            j[(a, b)] = v;
            j[(b, a)] = v;
        }
    }
    let coupling = CouplingMatrix::from_entries(j, CouplingKind::Custom).unwrap();
    NetworkSpec::new(coupling, 1, n)
        .unwrap()
        .with_gamma_sink(rng.random_range(0.2..2.0))
        .with_site_energies((0..n).map(|_| rng.random_range(-1.0..1.0)).collect())
        .with_dephasing(NoiseModel::Markovian {
            rates: (0..n).map(|_| rng.random_range(0.0..0.5)).collect(),
        })
}

fn random_density(rng: &mut ChaCha8Rng, d: usize) -> CMatrix {
    let a = CMatrix::from_fn(d, d, |_, _| {
        C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    });
    let rho = &a * a.adjoint();
    let tr = rho.trace();
    rho / tr
}

#[test]
fn full_space_generator_matches_tensor_product_construction() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let n = 3;
    let spec = random_spec(&mut rng, n).with_gamma_source(0.7);
    let g = build_full_generator(&spec, n).unwrap();

    let lower = CMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(0.0), c(0.0)]);
    let raise = lower.adjoint();
    let num = &raise * &lower;
    let sm: Vec<CMatrix> = (1..=n).map(|s| embed(&lower, s, n)).collect();
    let sp: Vec<CMatrix> = (1..=n).map(|s| embed(&raise, s, n)).collect();
    let d = 1 << n;
    let mut h = CMatrix::zeros(d, d);
    for a in 0..n {
        h += embed(&num, a + 1, n) * c(spec.site_energies[a]);
        for b in 0..n {
            if a != b {
                h += &sp[a] * &sm[b] * c(spec.coupling.entries[(a, b)]);
            }
        }
    }
    let rates = spec.dephasing.markovian_rates().unwrap().to_vec();

    let rho_kron = random_density(&mut rng, d);
    let mut expected = (&h * &rho_kron - &rho_kron * &h) * C64::new(0.0, -1.0);
    expected += dissipator(&(&sm[spec.sink - 1] * c(spec.gamma_sink.sqrt())), &rho_kron);
    for (i, r) in rates.iter().enumerate() {
        expected += dissipator(&(embed(&num, i + 1, n) * c(r.sqrt())), &rho_kron);
    }
    let gs = spec.gamma_source.sqrt();
    expected += dissipator(&(&sm[spec.source - 1] * c(gs)), &rho_kron);
    expected += dissipator(&(&sp[spec.source - 1] * c(gs)), &rho_kron);

    // engine basis index k holds bitmask basis.state(k)
    let perm: Vec<usize> = (0..d).map(|k| g.basis.state(k) as usize).collect();
    let rho = CMatrix::from_fn(d, d, |a, b| rho_kron[(perm[a], perm[b])]);
    let out = g.apply(&rho);
    let err = (0..d)
        .flat_map(|a| (0..d).map(move |b| (a, b)))
        .fold(0.0f64, |m, (a, b)| {
            m.max((out[(a, b)] - expected[(perm[a], perm[b])]).norm())
        });
    assert!(err < 1e-12, "generator mismatch {err:e}");
}

/// Chains Lindblad propagations with the site energies of `path` held fixed
/// between switches.
fn chained_lindblad(
    spec: &NetworkSpec,
    path: &TelegraphPath,
    rho0: &CMatrix,
    grid: &[f64],
) -> Vec<CMatrix> {
    let mut cuts: Vec<f64> = path
        .switch_times()
        .into_iter()
        .chain(grid.iter().copied())
        .collect();
    cuts.sort_by(|a, b| a.total_cmp(b));
    cuts.dedup();
    let mut rho = rho0.clone();
    let mut t = 0.0;
    let mut out = Vec::new();
    for &cut in &cuts {
        if cut > t {
            let mid = 0.5 * (t + cut);
            let energies: Vec<f64> = spec
                .site_energies
                .iter()
                .zip(path.energies_at(mid))
                .map(|(e, w)| e + w)
                .collect();
            let g = build_sector_generator(&spec.clone().with_site_energies(energies)).unwrap();
            rho = propagate(
                &g,
                &rho,
                &TimeGrid::new(vec![cut - t]).unwrap(),
                PropagateOptions::exponential(),
            )
            .unwrap()
            .pop()
            .unwrap();
            t = cut;
        }
        if grid.contains(&cut) {
            out.push(rho.clone());
        }
    }
    out
}

#[test]
fn telegraph_trajectory_matches_chained_lindblad_runs() {
    let spec = NetworkSpec::with_default_sites(ideal_power_law(4, 1.0).unwrap()).unwrap();
    let path = TelegraphPath {
        omega_gk: 3.0,
        horizon: 3.0,
        sites: vec![
            SitePath {
                initial_sign: 1,
                switches: vec![0.4, 1.7],
            },
            SitePath {
                initial_sign: -1,
                switches: vec![],
            },
            SitePath {
                initial_sign: 1,
                switches: vec![0.9],
            },
            SitePath {
                initial_sign: -1,
                switches: vec![0.4, 2.2, 2.9],
            },
        ],
    };
    let times = vec![0.0, 0.5, 1.0, 2.0, 3.0];
    let grid = TimeGrid::new(times.clone()).unwrap();
    for kind in [
        InitialState::SingleExcitationAtSource,
        InitialState::SuperpositionHalfSite(2),
    ] {
        let g = build_sector_generator(&spec).unwrap();
        let psi0 = initial_amplitudes(&spec, &g.basis, kind).unwrap();
        let traj = propagate_telegraph_trajectory(&spec, &path, &psi0, &grid).unwrap();
        let reference = chained_lindblad(
            &spec,
            &path,
            &initial_state(&spec, &g.basis, kind).unwrap(),
            &times,
        );
        for (k, r) in reference.iter().enumerate() {
            let err = (traj.density(k) - r).camax();
            assert!(err < 1e-9, "{kind:?} at t = {}: {err:e}", times[k]);
        }
    }
}

#[test]
fn frozen_telegraph_noise_averages_over_sign_patterns() {
    // with no switches in the window each sample is a static ±ω/2 pattern
    let n = 4;
    let spec = NetworkSpec::with_default_sites(ideal_power_law(n, 1.0).unwrap()).unwrap();
    let omega = 2.0;
    let t = 3.0;
    let grid = TimeGrid::new(vec![t]).unwrap();
    let mut exact = 0.0;
    for mask in 0..(1u32 << n) {
        let energies = (0..n)
            .map(|i| {
                if mask & (1 << i) != 0 {
                    omega / 2.0
                } else {
                    -omega / 2.0
                }
            })
            .collect();
        let g = build_sector_generator(&spec.clone().with_site_energies(energies)).unwrap();
        let rho0 = initial_state(&spec, &g.basis, InitialState::SingleExcitationAtSource).unwrap();
        exact +=
            propagate(&g, &rho0, &grid, PropagateOptions::exponential()).unwrap()[0][(0, 0)].re;
    }
    exact /= (1u32 << n) as f64;

    let variation = Variation::Telegraph {
        noise: Telegraph::new(omega, 1e-9).unwrap(),
        n_samples: 4000,
        seed: 1,
    };
    let r = run_ensemble(
        &spec,
        &variation,
        InitialState::SingleExcitationAtSource,
        &grid,
        &[Observable::AbsorptionProbability],
        EnsembleOptions::default(),
    )
    .unwrap();
    let (mean, se) = (r.mean[0][0], r.stderr[0][0]);
    assert!((mean - exact).abs() < 4.0 * se, "{mean} ± {se} vs {exact}");
}

#[test]
fn driven_steady_state_matches_long_time_propagation() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let n = 3;
    let spec = random_spec(&mut rng, n).with_gamma_source(0.5);
    let g = build_full_generator(&spec, n).unwrap();
    let rho = steady_state(&g).unwrap();
    assert!((rho.trace() - c(1.0)).norm() < 1e-12);
    assert!(g.apply(&rho).camax() < 1e-10);
    assert!(hermitian_eigenvalues(&rho).iter().all(|&e| e > -1e-10));

    let rho0 = initial_state(&spec, &g.basis, InitialState::Vacuum).unwrap();
    let late = propagate(
        &g,
        &rho0,
        &TimeGrid::new(vec![400.0]).unwrap(),
        PropagateOptions::exponential(),
    )
    .unwrap();
    assert!((&late[0] - &rho).camax() < 1e-8);
}

#[test]
fn far_detuned_ms_couplings_approach_inverse_cube_of_positions() {
    let n = 10;
    let z = equilibrium_positions(n).unwrap();
    let direct = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            0.0
        } else {
            (z[i] - z[j]).abs().powi(-3)
        }
    });
    let direct = CouplingMatrix::from_entries(direct, CouplingKind::Custom).unwrap();
    let direct_fit = fit_alpha(&direct).unwrap();

    let modes = transverse_modes(&z, 50.0).unwrap();
    let gap = |rel: f64| {
        let ms = ms_coupling_matrix(&modes, rel * modes.max_freq()).unwrap();
        let entries = ms.entries.abs() - &direct.entries;
        let fit = fit_alpha(&ms).unwrap();
        (
            entries.amax(),
            (fit.alpha - direct_fit.alpha).abs(),
            (fit.chi2 - direct_fit.chi2).abs(),
        )
    };
    let near = gap(30.0);
    let far = gap(300.0);
    assert!(far.0 < 1e-4 && far.1 < 1e-4 && far.2 < 1e-4, "{far:?}");
    assert!(far.0 < near.0 / 50.0, "{near:?} -> {far:?}");
}
