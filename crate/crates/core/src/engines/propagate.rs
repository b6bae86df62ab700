use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::linalg::{expm, hermiticity_defect, trace, CMatrix, CVector, C64};
use crate::network::{Lindbladian, Liouvillian};

pub const DEFAULT_TOL: f64 = 1e-8;

/// Largest Hilbert-space dimension for which the dense exponential path is
/// chosen automatically (superoperator of size `dim² × dim²`).
const AUTO_EXPM_MAX_DIM: usize = 24;

/// Output times in units of `1/J_max`, strictly ascending from `t ≥ 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    points: Vec<f64>,
}

impl TimeGrid {
    pub fn new(points: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidParameter("time grid is empty".into()));
        }
        if !(points[0] >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "time grid starts at {} < 0",
                points[0]
            )));
        }
        if !points.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::InvalidParameter(
                "time grid must be strictly ascending".into(),
            ));
        }
        Ok(Self { points })
    }

    /// `n` equally spaced points from `t0` to `t1` inclusive.
    pub fn linspace(t0: f64, t1: f64, n: usize) -> Result<Self> {
        if n == 1 {
            return Self::new(vec![t0]);
        }
        let step = (t1 - t0) / (n as f64 - 1.0);
        Self::new(
            (0..n)
                .map(|k| if k + 1 == n { t1 } else { t0 + k as f64 * step })
                .collect(),
        )
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn last(&self) -> f64 {
        *self.points.last().expect("non-empty grid")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Embedded Runge–Kutta 5(4) with step-size control.
    Adaptive,
    /// Dense matrix exponential of the vectorized generator.
    Exponential,
    /// Exponential for small spaces, adaptive otherwise.
    Auto,
}

#[derive(Debug, Clone, Copy)]
pub struct PropagateOptions {
    pub tol: f64,
    pub method: Method,
}

impl Default for PropagateOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            method: Method::Auto,
        }
    }
}

impl PropagateOptions {
    pub fn adaptive(tol: f64) -> Self {
        Self {
            tol,
            method: Method::Adaptive,
        }
    }

    pub fn exponential() -> Self {
        Self {
            tol: DEFAULT_TOL,
            method: Method::Exponential,
        }
    }
}

// Dormand–Prince 5(4) tableau
const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Tolerances for [`dopri5`].
#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl OdeOptions {
    pub fn from_tol(tol: f64) -> Self {
        Self {
            rtol: tol,
            atol: tol * 1e-2,
            max_steps: 50_000_000,
        }
    }
}

/// Integrates `y' = f(t, y)` from `t0`, returning `y` at each output time.
pub fn dopri5<F>(
    mut f: F,
    t0: f64,
    y0: &[C64],
    outputs: &[f64],
    opts: OdeOptions,
) -> Result<Vec<Vec<C64>>>
where
    F: FnMut(f64, &[C64], &mut [C64]),
{
    let n = y0.len();
    let mut y = y0.to_vec();
    let mut t = t0;
    let mut k: Vec<Vec<C64>> = vec![vec![C64::new(0.0, 0.0); n]; 7];
    let mut stage = vec![C64::new(0.0, 0.0); n];
    let mut y_new = vec![C64::new(0.0, 0.0); n];
    f(t, &y, &mut k[0]);

    let norm = |v: &[C64]| (v.iter().map(|z| z.norm_sqr()).sum::<f64>() / n.max(1) as f64).sqrt();
    let d0 = norm(&y);
    let d1 = norm(&k[0]);
    let mut h = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    let mut steps = 0usize;
    let mut out = Vec::with_capacity(outputs.len());

    for &target in outputs {
        while t < target {
            let remaining = target - t;
            let last = h >= remaining;
            let h_try = if last { remaining } else { h };
            for s in 1..7 {
                for i in 0..n {
                    let mut acc = C64::new(0.0, 0.0);
                    for (j, kj) in k.iter().enumerate().take(s) {
                        if A[s][j] != 0.0 {
                            acc += kj[i] * A[s][j];
                        }
                    }
                    stage[i] = y[i] + acc * h_try;
                }
                let (_, tail) = k.split_at_mut(s);
                f(t + C[s] * h_try, &stage, &mut tail[0]);
            }
            // stage 7 evaluated at the 5th-order solution (FSAL)
            y_new.copy_from_slice(&stage);
            let mut err_acc = 0.0;
            for i in 0..n {
                let mut e = C64::new(0.0, 0.0);
                for (j, kj) in k.iter().enumerate() {
                    e += kj[i] * E[j];
                }
                let sc = opts.atol + opts.rtol * y[i].norm().max(y_new[i].norm());
                err_acc += (e.norm() * h_try / sc).powi(2);
            }
            let err = (err_acc / n.max(1) as f64).sqrt();
            steps += 1;
            if steps > opts.max_steps {
                return Err(Error::StepSizeUnderflow { t, h: h_try });
            }
            if err <= 1.0 {
                t = if last { target } else { t + h_try };
                y.copy_from_slice(&y_new);
                k.swap(0, 6);
                let fac = if err == 0.0 {
                    5.0
                } else {
                    (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
                };
                if !last || fac < 1.0 {
                    h = h_try * fac;
                }
            } else {
                h = h_try * (0.9 * err.powf(-0.2)).clamp(0.2, 1.0);
                if h < 1e-14 * (1.0 + t.abs()) {
                    return Err(Error::StepSizeUnderflow { t, h });
                }
            }
        }
        out.push(y.clone());
    }
    Ok(out)
}

/// Trace and Hermiticity checks applied to every returned state.
pub fn check_state(rho: &CMatrix, t: f64) -> Result<()> {
    let tr = trace(rho);
    if (tr.re - 1.0).abs() > 1e-9 || tr.im.abs() > 1e-9 {
        return Err(Error::InvariantViolation {
            t,
            what: format!("trace {tr}"),
        });
    }
    let h = hermiticity_defect(rho);
    if h > 1e-9 {
        return Err(Error::InvariantViolation {
            t,
            what: format!("hermiticity defect {h:.3e}"),
        });
    }
    Ok(())
}

fn resolve(method: Method, dim: usize) -> Method {
    match method {
        Method::Auto if dim <= AUTO_EXPM_MAX_DIM => Method::Exponential,
        Method::Auto => Method::Adaptive,
        m => m,
    }
}

/// Exact propagator `exp(L Δt)` on `vec(ρ)`, cached per step length.
pub struct ExpPropagator {
    dim: usize,
    superop: CMatrix,
    cache: HashMap<u64, CMatrix>,
}

impl ExpPropagator {
    pub fn new(gen: &Lindbladian) -> Self {
        Self {
            dim: gen.dim(),
            superop: gen.superoperator(),
            cache: HashMap::new(),
        }
    }

    pub fn step(&mut self, rho: &CMatrix, dt: f64) -> CMatrix {
        if dt == 0.0 {
            return rho.clone();
        }
        let superop = &self.superop;
        let p = self
            .cache
            .entry(dt.to_bits())
            .or_insert_with(|| expm(&superop.scale(dt)));
        let v = CVector::from_column_slice(rho.as_slice());
        let w = &*p * v;
        CMatrix::from_column_slice(self.dim, self.dim, w.as_slice())
    }
}

/// Propagates `state0` under a time-independent generator, returning the state
/// at every grid point.
pub fn propagate(
    gen: &Liouvillian,
    state0: &CMatrix,
    grid: &TimeGrid,
    opts: PropagateOptions,
) -> Result<Vec<CMatrix>> {
    propagate_lindblad(&gen.lindblad, state0, grid, opts)
}

pub fn propagate_lindblad(
    gen: &Lindbladian,
    state0: &CMatrix,
    grid: &TimeGrid,
    opts: PropagateOptions,
) -> Result<Vec<CMatrix>> {
    let d = gen.dim();
    if state0.nrows() != d || state0.ncols() != d {
        return Err(Error::DimensionMismatch(state0.nrows(), d));
    }
    check_state(state0, 0.0)?;
    let states = match resolve(opts.method, d) {
        Method::Exponential => {
            let mut prop = ExpPropagator::new(gen);
            let mut t = 0.0;
            let mut rho = state0.clone();
            let mut out = Vec::with_capacity(grid.len());
            for &tp in grid.points() {
                rho = prop.step(&rho, tp - t);
                t = tp;
                out.push(rho.clone());
            }
            out
        }
        _ => {
            let mut rho_buf = CMatrix::zeros(d, d);
            let mut out_buf = CMatrix::zeros(d, d);
            let rhs = |_t: f64, y: &[C64], dy: &mut [C64]| {
                rho_buf.as_mut_slice().copy_from_slice(y);
                gen.apply_into(&rho_buf, &mut out_buf);
                dy.copy_from_slice(out_buf.as_slice());
            };
            dopri5(
                rhs,
                0.0,
                state0.as_slice(),
                grid.points(),
                OdeOptions::from_tol(opts.tol),
            )?
            .into_iter()
            .map(|v| CMatrix::from_column_slice(d, d, &v))
            .collect()
        }
    };
    for (rho, &t) in states.iter().zip(grid.points()) {
        check_state(rho, t)?;
    }
    Ok(states)
}

/// Piecewise-constant generator: piece `k` acts from `starts[k]` until the
/// next start (the last piece runs to the end of the grid).
pub fn propagate_piecewise(
    pieces: &[(f64, Lindbladian)],
    state0: &CMatrix,
    grid: &TimeGrid,
    opts: PropagateOptions,
) -> Result<Vec<CMatrix>> {
    if pieces.is_empty() || pieces[0].0 != 0.0 {
        return Err(Error::InvalidParameter(
            "first piece must start at t = 0".into(),
        ));
    }
    let mut rho = state0.clone();
    let mut t = 0.0;
    let mut out = Vec::with_capacity(grid.len());
    let mut piece = 0;
    for &tp in grid.points() {
        while t < tp {
            while piece + 1 < pieces.len() && pieces[piece + 1].0 <= t {
                piece += 1;
            }
            let end = pieces.get(piece + 1).map_or(tp, |p| p.0.min(tp));
            let g = TimeGrid::new(vec![end - t])?;
            rho = propagate_lindblad(&pieces[piece].1, &rho, &g, opts)?
                .pop()
                .expect("one point");
            t = end;
        }
        out.push(rho.clone());
    }
    Ok(out)
}

/// Propagation with the absorbed probability `Γ ∫ ⟨n_sink⟩ dt` integrated
/// alongside the state. Needed when the excitation number is not conserved.
pub fn propagate_with_absorption(
    gen: &Liouvillian,
    sink: usize,
    gamma_sink: f64,
    state0: &CMatrix,
    grid: &TimeGrid,
    tol: f64,
) -> Result<(Vec<CMatrix>, Vec<f64>)> {
    let basis = &gen.basis;
    let d = gen.dim();
    let occupied: Vec<usize> = (0..d).filter(|&k| basis.occupied(k, sink)).collect();
    let mut rho_buf = CMatrix::zeros(d, d);
    let mut out_buf = CMatrix::zeros(d, d);
    let rhs = |_t: f64, y: &[C64], dy: &mut [C64]| {
        rho_buf.as_mut_slice().copy_from_slice(&y[..d * d]);
        gen.lindblad.apply_into(&rho_buf, &mut out_buf);
        dy[..d * d].copy_from_slice(out_buf.as_slice());
        let pop: f64 = occupied.iter().map(|&k| rho_buf[(k, k)].re).sum();
        dy[d * d] = C64::new(gamma_sink * pop, 0.0);
    };
    let mut y0 = state0.as_slice().to_vec();
    y0.push(C64::new(0.0, 0.0));
    let sol = dopri5(rhs, 0.0, &y0, grid.points(), OdeOptions::from_tol(tol))?;
    let mut states = Vec::with_capacity(sol.len());
    let mut absorbed = Vec::with_capacity(sol.len());
    for (v, &t) in sol.iter().zip(grid.points()) {
        let rho = CMatrix::from_column_slice(d, d, &v[..d * d]);
        check_state(&rho, t)?;
        states.push(rho);
        absorbed.push(v[d * d].re);
    }
    Ok((states, absorbed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ion_chain::{fully_connected, ideal_power_law};
    use crate::network::{build_sector_generator, initial_state, InitialState, NetworkSpec};

    #[test]
    fn grid_validation() {
        assert!(TimeGrid::new(vec![]).is_err());
        assert!(TimeGrid::new(vec![-1.0, 0.0]).is_err());
        assert!(TimeGrid::new(vec![0.0, 1.0, 1.0]).is_err());
        let g = TimeGrid::linspace(0.0, 2.0, 5).unwrap();
        assert_eq!(g.points(), &[0.0, 0.5, 1.0, 1.5, 2.0]);
    }

    #[test]
    fn zero_generator_keeps_state() {
        let mut c = fully_connected(3).unwrap();
        c.entries.fill(0.0);
        let spec = NetworkSpec::new(c, 1, 2).unwrap().with_gamma_sink(0.0);
        let g = build_sector_generator(&spec).unwrap();
        let rho0 = initial_state(&spec, &g.basis, InitialState::SuperpositionHalfSite(1)).unwrap();
        let grid = TimeGrid::linspace(0.0, 5.0, 6).unwrap();
        for m in [Method::Adaptive, Method::Exponential] {
            let states = propagate(
                &g,
                &rho0,
                &grid,
                PropagateOptions {
                    tol: 1e-8,
                    method: m,
                },
            )
            .unwrap();
            for s in states {
                assert!((&s - &rho0).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn isolated_sink_decays_exponentially() {
        let mut c = fully_connected(3).unwrap();
        c.entries.fill(0.0);
        let spec = NetworkSpec::new(c, 1, 2).unwrap();
        let g = build_sector_generator(&spec).unwrap();
        let rho0 = initial_state(&spec, &g.basis, InitialState::SingleExcitationAt(2)).unwrap();
        let grid = TimeGrid::linspace(0.0, 4.0, 9).unwrap();
        for m in [Method::Adaptive, Method::Exponential] {
            let states = propagate(
                &g,
                &rho0,
                &grid,
                PropagateOptions {
                    tol: 1e-10,
                    method: m,
                },
            )
            .unwrap();
            for (s, &t) in states.iter().zip(grid.points()) {
                assert!(
                    (s[(0, 0)].re - (1.0 - (-t).exp())).abs() < 1e-9,
                    "{m:?} t={t}"
                );
            }
        }
    }

    #[test]
    fn adaptive_matches_exponential() {
        let spec = NetworkSpec::new(ideal_power_law(5, 1.1).unwrap(), 2, 4)
            .unwrap()
            .with_uniform_dephasing(0.3)
            .with_site_energies(vec![0.3, -0.5, 0.1, 0.7, -0.2]);
        let g = build_sector_generator(&spec).unwrap();
        let rho0 = initial_state(&spec, &g.basis, InitialState::SuperpositionHalfSite(2)).unwrap();
        let grid = TimeGrid::linspace(0.0, 10.0, 21).unwrap();
        let tol = 1e-8;
        let a = propagate(&g, &rho0, &grid, PropagateOptions::adaptive(tol)).unwrap();
        let e = propagate(&g, &rho0, &grid, PropagateOptions::exponential()).unwrap();
        let worst = a
            .iter()
            .zip(&e)
            .map(|(x, y)| (x - y).camax())
            .fold(0.0, f64::max);
        assert!(worst < 10.0 * tol, "worst {worst}");
    }

    #[test]
    fn absorption_flux_equals_vacuum_population_in_sector() {
        let spec = NetworkSpec::new(ideal_power_law(4, 1.0).unwrap(), 1, 3)
            .unwrap()
            .with_uniform_dephasing(0.2);
        let g = build_sector_generator(&spec).unwrap();
        let rho0 = initial_state(&spec, &g.basis, InitialState::SingleExcitationAtSource).unwrap();
        let grid = TimeGrid::linspace(0.0, 6.0, 13).unwrap();
        let (states, absorbed) =
            propagate_with_absorption(&g, 3, 1.0, &rho0, &grid, 1e-10).unwrap();
        for (s, p) in states.iter().zip(&absorbed) {
            assert!((s[(0, 0)].re - p).abs() < 1e-8);
        }
    }
}
