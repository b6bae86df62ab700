//! Time propagation, Monte-Carlo ensembles and steady states.

pub mod ensemble;
pub mod kraus;
pub mod propagate;
pub mod steady;
pub mod telegraph;

pub use ensemble::{
    mean_and_stderr, run_ensemble, run_trace_distance, sample_states, with_pool, EnsembleOptions,
    EnsembleResult, Observable, TraceDistanceResult, Variation,
};
pub use kraus::kraus_decay_step;
pub use propagate::{
    check_state, dopri5, propagate, propagate_lindblad, propagate_piecewise,
    propagate_with_absorption, ExpPropagator, Method, OdeOptions, PropagateOptions, TimeGrid,
    DEFAULT_TOL,
};
pub use steady::{steady_state, steady_state_from};
pub use telegraph::{
    propagate_pure, propagate_telegraph_trajectory, reconstruct_density, PureTrajectory,
};

use crate::error::Result;
use crate::network::{
    build_offresonant_generator, build_sector_generator, initial_state, InitialState, NetworkSpec,
};
use crate::observables::{total_excitations, TransferCurve};

/// Horizon used for long-time limits, in units of `1/J_max`.
pub const LONG_TIME_HORIZON: f64 = 200.0;
/// Bound on the sink flux `Γ ρ_sink,sink` below which the long-time value is
/// treated as converged.
pub const STATIONARITY_TOL: f64 = 1e-6;
/// Default excitation cutoff for runs with counter-rotating terms.
pub const OFFRESONANT_CUTOFF: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LongTimeAbsorption {
    pub horizon: f64,
    pub p_abs: f64,
    /// `dP_abs/dt` at the horizon.
    pub flux: f64,
    pub stationary: bool,
}

/// Absorption probability at `horizon` for an excitation starting at the
/// source, with the sink flux as a stationarity check.
pub fn long_time_absorption(
    spec: &NetworkSpec,
    horizon: f64,
    tol: f64,
) -> Result<LongTimeAbsorption> {
    let g = build_sector_generator(spec)?;
    let rho0 = initial_state(spec, &g.basis, InitialState::SingleExcitationAtSource)?;
    let grid = TimeGrid::new(vec![horizon])?;
    let rho = propagate(
        &g,
        &rho0,
        &grid,
        PropagateOptions {
            tol,
            ..Default::default()
        },
    )?
    .pop()
    .expect("one point");
    let flux = spec.gamma_sink * rho[(spec.sink, spec.sink)].re;
    Ok(LongTimeAbsorption {
        horizon,
        p_abs: rho[(0, 0)].re,
        flux,
        stationary: flux.abs() < STATIONARITY_TOL,
    })
}

/// Absorption probability on `grid` for a single-sector run of `spec`.
pub fn transfer_curve(
    spec: &NetworkSpec,
    initial: InitialState,
    grid: &TimeGrid,
    tol: f64,
) -> Result<TransferCurve> {
    let g = build_sector_generator(spec)?;
    let rho0 = initial_state(spec, &g.basis, initial)?;
    let vac0 = rho0[(0, 0)].re;
    let states = propagate(
        &g,
        &rho0,
        grid,
        PropagateOptions {
            tol,
            ..Default::default()
        },
    )?;
    TransferCurve::new(
        grid.points().to_vec(),
        states.iter().map(|r| r[(0, 0)].re - vac0).collect(),
    )
}

/// Transfer curve with counter-rotating terms, plus the sup-norm change
/// when the excitation cutoff is raised by one.
#[derive(Debug, Clone, PartialEq)]
pub struct OffResonantTransfer {
    pub curve: TransferCurve,
    pub cutoff: usize,
    /// `None` when the cutoff already spans the full space.
    pub cutoff_change: Option<f64>,
}

/// Absorption probability `1 − ⟨N_exc⟩` under the lab-frame Hamiltonian with
/// pair-creation terms, starting from one excitation at the source. This is
/// the weight missing from the network, which is what a readout of the
/// remaining excitations reports.
pub fn offresonant_transfer(
    spec: &NetworkSpec,
    omega_const: f64,
    cutoff: usize,
    grid: &TimeGrid,
    tol: f64,
) -> Result<OffResonantTransfer> {
    let run = |cutoff: usize| -> Result<Vec<f64>> {
        let g = build_offresonant_generator(spec, omega_const, cutoff)?;
        let rho0 = initial_state(spec, &g.basis, InitialState::SingleExcitationAtSource)?;
        let states = propagate(
            &g,
            &rho0,
            grid,
            PropagateOptions {
                tol,
                ..Default::default()
            },
        )?;
        Ok(states
            .iter()
            .map(|r| 1.0 - total_excitations(&g.basis, r))
            .collect())
    };
    let values = run(cutoff)?;
    let cutoff_change = if cutoff < spec.n_sites() {
        let finer = run(cutoff + 1)?;
        Some(
            values
                .iter()
                .zip(&finer)
                .fold(0.0f64, |m, (a, b)| m.max((a - b).abs())),
        )
    } else {
        None
    };
    Ok(OffResonantTransfer {
        curve: TransferCurve::new(grid.points().to_vec(), values)?,
        cutoff,
        cutoff_change,
    })
}
