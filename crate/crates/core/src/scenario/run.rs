use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;

use super::{CouplingSource, ExperimentKind, Scenario};
use crate::engines::steady::STEADY_RESIDUAL_TOL;
use crate::engines::{
    long_time_absorption, offresonant_transfer, run_ensemble, run_trace_distance, transfer_curve,
    with_pool, EnsembleOptions, Observable, TimeGrid, Variation, LONG_TIME_HORIZON,
    STATIONARITY_TOL,
};
use crate::error::Result;
use crate::ion_chain::{equilibrium_positions, fit_alpha, ms_coupling_matrix, transverse_modes};
use crate::network::{DisorderSpec, NetworkSpec, Telegraph};
use crate::observables::{
    detect_recurrences, driven_point, optimal_source_rate, SourceScanOptions,
};

/// Files written by [`run_scenario`].
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub csv: PathBuf,
    /// Extra tables, such as the source-rate optimum of a driven scan.
    pub extra_csv: Vec<PathBuf>,
    pub meta: PathBuf,
    pub rows: usize,
}

enum Cell {
    Num(f64),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(x) => format!("{x:.16e}"),
            Cell::Text(s) => s.clone(),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

struct Table {
    header: Vec<String>,
    rows: Vec<Vec<Cell>>,
}

impl Table {
    fn new(header: Vec<String>) -> Self {
        Self {
            header,
            rows: Vec::new(),
        }
    }

    fn write(&self, path: &Path) -> Result<()> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_path(path)?;
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render))?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Runs every point of `scenario` and writes `<output>.csv` plus the
/// `<output>.meta.txt` record into `out_dir`. The CSV bytes depend only on
/// the scenario and its seed.
pub fn run_scenario(scenario: &Scenario, out_dir: &Path) -> Result<RunOutput> {
    let start = Instant::now();
    std::fs::create_dir_all(out_dir)?;
    let mut notes = Vec::new();
    let mut extra = Vec::new();
    let table = execute(scenario, &mut notes, &mut extra).map_err(|e| {
        e.context(format!(
            "scenario `{}` ({})",
            scenario.output,
            scenario.experiment.name()
        ))
    })?;

    let csv = out_dir.join(format!("{}.csv", scenario.output));
    table.write(&csv)?;
    let mut extra_csv = Vec::new();
    for (suffix, t) in extra {
        let path = out_dir.join(format!("{}_{suffix}.csv", scenario.output));
        t.write(&path)?;
        extra_csv.push(path);
    }

    let meta = out_dir.join(format!("{}.meta.txt", scenario.output));
    let mut m = String::new();
    let _ = writeln!(m, "experiment: {}", scenario.experiment.name());
    let _ = writeln!(
        m,
        "version: {} {}",
        env!("CARGO_PKG_NAME"),
        env!("CARGO_PKG_VERSION")
    );
    let _ = writeln!(m, "seed: {}", scenario.seed);
    let _ = writeln!(m, "workers: {}", scenario.workers);
    let _ = writeln!(m, "ode_tol: {:e}", scenario.tol);
    let _ = writeln!(m, "steady_residual_tol: {STEADY_RESIDUAL_TOL:e}");
    let _ = writeln!(m, "long_time_horizon: {LONG_TIME_HORIZON}");
    let _ = writeln!(m, "runs: {}", scenario.runs().len());
    let _ = writeln!(m, "rows: {}", table.rows.len());
    for note in &notes {
        let _ = writeln!(m, "{note}");
    }
    let _ = writeln!(m, "wall_time_s: {:.3}", start.elapsed().as_secs_f64());
    std::fs::write(&meta, m)?;
    Ok(RunOutput {
        csv,
        extra_csv,
        meta,
        rows: table.rows.len(),
    })
}

fn network(s: &Scenario, coupling: &CouplingSource, dephasing: f64) -> Result<NetworkSpec> {
    let spec =
        NetworkSpec::new(coupling.build(s.n)?, s.source, s.sink)?.with_gamma_sink(s.gamma_sink);
    Ok(if dephasing > 0.0 {
        spec.with_uniform_dephasing(dephasing)
    } else {
        spec
    })
}

fn execute(
    s: &Scenario,
    notes: &mut Vec<String>,
    extra: &mut Vec<(&'static str, Table)>,
) -> Result<Table> {
    let opts = EnsembleOptions {
        workers: s.workers,
        tol: s.tol,
    };
    let at_time = || TimeGrid::new(vec![s.time]);
    let coupling = s.couplings[0];
    match s.experiment {
        ExperimentKind::Transfer => {
            let grid = TimeGrid::new(s.times.clone())?;
            let mut header = vec!["t".to_string()];
            let mut columns = Vec::new();
            for c in &s.couplings {
                header.push(format!("P_abs_{}", c.label()));
                columns.push(
                    transfer_curve(&network(s, c, s.dephasing[0])?, s.initial, &grid, s.tol)?
                        .values,
                );
            }
            Ok(wide(header, &s.times, &columns))
        }
        ExperimentKind::LongTime => {
            let grid = TimeGrid::new(s.times.clone())?;
            let mut header = vec!["t".to_string()];
            let mut columns = Vec::new();
            for &g in &s.dephasing {
                let spec = network(s, &coupling, g)?;
                header.push(format!("P_abs_g{g}"));
                columns.push(transfer_curve(&spec, s.initial, &grid, s.tol)?.values);
                let lt = long_time_absorption(&spec, LONG_TIME_HORIZON, s.tol)?;
                notes.push(format!(
                    "long_time_gamma_{g}: p_abs {:.6} flux {:.3e} stationary {} (flux < {STATIONARITY_TOL:e})",
                    lt.p_abs, lt.flux, lt.stationary
                ));
            }
            Ok(wide(header, &s.times, &columns))
        }
        ExperimentKind::AlphaFit => {
            let mut table = Table::new(strings(&["delta_over_nu_max", "n", "alpha", "chi2"]));
            for &n in &s.sizes {
                let modes = transverse_modes(&equilibrium_positions(n)?, s.ratio)?;
                let fits = with_pool(s.workers, || {
                    s.detuning
                        .par_iter()
                        .map(|&d| fit_alpha(&ms_coupling_matrix(&modes, d * s.ratio)?))
                        .collect::<Result<Vec<_>>>()
                })??;
                for (&d, f) in s.detuning.iter().zip(fits) {
                    table.rows.push(vec![
                        d.into(),
                        (n as f64).into(),
                        f.alpha.into(),
                        f.chi2.into(),
                    ]);
                }
            }
            Ok(table)
        }
        ExperimentKind::DisorderSweep => {
            let mut table = Table::new(strings(&["W", "gamma", "mean", "stderr"]));
            for &g in &s.dephasing {
                let spec = network(s, &coupling, g)?;
                for &w in &s.disorder {
                    let variation = Variation::Disorder(DisorderSpec::new(w, s.samples, s.seed)?);
                    let r = run_ensemble(
                        &spec,
                        &variation,
                        s.initial,
                        &at_time()?,
                        &[Observable::AbsorptionProbability],
                        opts,
                    )?;
                    table.rows.push(vec![
                        w.into(),
                        g.into(),
                        r.mean[0][0].into(),
                        r.stderr[0][0].into(),
                    ]);
                }
            }
            Ok(table)
        }
        ExperimentKind::TelegraphSweep => {
            let header = [
                "lambda",
                "omega_gk",
                "mean",
                "stderr",
                "gamma_markov",
                "p_markov",
            ];
            let mut table = Table::new(strings(&header));
            let spec = network(s, &coupling, s.dephasing[0])?;
            for &omega in &s.omega_gk {
                for &lambda in &s.lambda {
                    let noise = Telegraph::new(omega, lambda)?;
                    let variation = Variation::Telegraph {
                        noise,
                        n_samples: s.samples,
                        seed: s.seed,
                    };
                    let r = run_ensemble(
                        &spec,
                        &variation,
                        s.initial,
                        &at_time()?,
                        &[Observable::AbsorptionProbability],
                        opts,
                    )?;
                    let gm = noise.markovian_rate();
                    let markov = transfer_curve(
                        &network(s, &coupling, s.dephasing[0] + gm)?,
                        s.initial,
                        &at_time()?,
                        s.tol,
                    )?;
                    table.rows.push(vec![
                        lambda.into(),
                        omega.into(),
                        r.mean[0][0].into(),
                        r.stderr[0][0].into(),
                        gm.into(),
                        markov.values[0].into(),
                    ]);
                }
            }
            Ok(table)
        }
        ExperimentKind::TraceDistance => {
            let grid = TimeGrid::new(s.times.clone())?;
            let spec = network(s, &coupling, s.dephasing[0])?;
            let mut table = Table::new(strings(&["t", "lambda", "D", "stderr"]));
            for &lambda in &s.lambda {
                let noise = Telegraph::new(s.omega_gk[0], lambda)?;
                let variation = Variation::Telegraph {
                    noise,
                    n_samples: s.samples,
                    seed: s.seed,
                };
                let r = run_trace_distance(&spec, &variation, s.initial, s.compare, &grid, opts)?;
                let rec = detect_recurrences(&r.values, &r.stderr, 5.0);
                notes.push(format!("recurrences_lambda_{lambda}: {}", rec.len()));
                for k in 0..r.times.len() {
                    table.rows.push(vec![
                        r.times[k].into(),
                        lambda.into(),
                        r.values[k].into(),
                        r.stderr[k].into(),
                    ]);
                }
            }
            Ok(table)
        }
        ExperimentKind::DrivenSteady => {
            let mut header = strings(&["gamma_source", "coupling", "rate", "n_exc"]);
            header.extend((1..=s.n).map(|k| format!("n_{k}")));
            let mut table = Table::new(header);
            let mut optimum = Table::new(strings(&[
                "coupling",
                "gamma_opt",
                "max_rate",
                "at_boundary",
            ]));
            for c in &s.couplings {
                let spec = network(s, c, s.dephasing[0])?;
                let points = with_pool(s.workers, || {
                    s.gamma_source
                        .par_iter()
                        .map(|&g| driven_point(&spec, g, s.cutoff))
                        .collect::<Result<Vec<_>>>()
                })??;
                for p in points {
                    let mut row = vec![
                        p.gamma_source.into(),
                        Cell::Text(c.label()),
                        p.rate.into(),
                        p.total_excitations.into(),
                    ];
                    row.extend(p.populations.iter().map(|&x| Cell::from(x)));
                    table.rows.push(row);
                }
                if s.optimize {
                    let (lo, hi) = s
                        .gamma_source
                        .iter()
                        .fold((f64::INFINITY, 0.0f64), |(a, b), &g| (a.min(g), b.max(g)));
                    let o = with_pool(s.workers, || {
                        optimal_source_rate(&spec, lo, hi, SourceScanOptions::new(s.cutoff))
                    })??;
                    optimum.rows.push(vec![
                        Cell::Text(c.label()),
                        o.gamma_opt.into(),
                        o.max_rate.into(),
                        Cell::Text(o.at_boundary.to_string()),
                    ]);
                }
            }
            if s.optimize {
                extra.push(("optimum", optimum));
            }
            Ok(table)
        }
        ExperimentKind::OffResonant => {
            let grid = TimeGrid::new(s.times.clone())?;
            let spec = network(s, &coupling, s.dephasing[0])?;
            let mut header = strings(&["t", "P_abs_ideal"]);
            let mut columns = vec![transfer_curve(&spec, s.initial, &grid, s.tol)?.values];
            for &w in &s.omega_const {
                let o = offresonant_transfer(&spec, w, s.cutoff, &grid, s.tol)?;
                header.push(format!("P_abs_w{w}"));
                columns.push(o.curve.values);
                if let Some(change) = o.cutoff_change {
                    notes.push(format!(
                        "cutoff_change_omega_{w}: {change:.3e} (cutoff {} vs {})",
                        s.cutoff,
                        s.cutoff + 1
                    ));
                }
            }
            Ok(wide(header, &s.times, &columns))
        }
    }
}

fn strings(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

fn wide(header: Vec<String>, times: &[f64], columns: &[Vec<f64>]) -> Table {
    let mut table = Table::new(header);
    for (k, &t) in times.iter().enumerate() {
        let mut row = vec![Cell::from(t)];
        row.extend(columns.iter().map(|c| Cell::from(c[k])));
        table.rows.push(row);
    }
    table
}
