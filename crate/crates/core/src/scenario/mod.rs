//! Scenario files and CSV output.
//!
//! A scenario is a flat `key: value` file. Keys may sit at the top level or
//! under the section they belong to (`[network]`, `[coupling]`, `[grid]`,
//! `[ensemble]`, `[steady]`); `#` and `;` start comment lines. Numeric lists
//! are comma-separated and may mix plain numbers with `linspace a b n` and
//! `logspace a b n` (decade exponents `a`, `b`). A `model` item may carry its
//! own exponent, as in `model: ms 1.5, ideal 3`.
//!
//! ```text
//! experiment: transfer
//! n: 10
//! alpha: 0.8, 1.0, 1.2
//!
//! [grid]
//! times: linspace 0 10 101
//! ```

mod parse;
mod run;

pub use parse::{parse_scenario, parse_scenario_str};
pub use run::{run_scenario, RunOutput};

use crate::error::Result;
use crate::ion_chain::{
    detuning_for_alpha, equilibrium_positions, fully_connected, ideal_power_law,
    ms_coupling_matrix, transverse_modes, CouplingMatrix,
};
use crate::network::InitialState;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExperimentKind {
    Transfer,
    LongTime,
    AlphaFit,
    DisorderSweep,
    TelegraphSweep,
    TraceDistance,
    DrivenSteady,
    OffResonant,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 8] = [
        ExperimentKind::Transfer,
        ExperimentKind::LongTime,
        ExperimentKind::AlphaFit,
        ExperimentKind::DisorderSweep,
        ExperimentKind::TelegraphSweep,
        ExperimentKind::TraceDistance,
        ExperimentKind::DrivenSteady,
        ExperimentKind::OffResonant,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Transfer => "transfer",
            ExperimentKind::LongTime => "long-time",
            ExperimentKind::AlphaFit => "alpha-fit",
            ExperimentKind::DisorderSweep => "disorder-sweep",
            ExperimentKind::TelegraphSweep => "telegraph-sweep",
            ExperimentKind::TraceDistance => "trace-distance",
            ExperimentKind::DrivenSteady => "driven-steady",
            ExperimentKind::OffResonant => "off-resonant",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            ExperimentKind::Transfer => "P_abs(t) for each coupling; columns t, P_abs per coupling",
            ExperimentKind::LongTime => "P_abs(t) up to the long-time horizon; columns t, P_abs per dephasing rate",
            ExperimentKind::AlphaFit => "fitted exponent of MS couplings; columns delta_over_nu_max, n, alpha, chi2",
            ExperimentKind::DisorderSweep => "static-disorder ensemble at one time; columns W, gamma, mean, stderr",
            ExperimentKind::TelegraphSweep => {
                "telegraph-noise ensemble at one time with Markovian reference; columns lambda, omega_gk, mean, stderr, gamma_markov, p_markov"
            }
            ExperimentKind::TraceDistance => "trace distance of two initial states under telegraph noise; columns t, lambda, D, stderr",
            ExperimentKind::DrivenSteady => {
                "steady state versus source rate; columns gamma_source, coupling, rate, n_exc, n_1..n_N"
            }
            ExperimentKind::OffResonant => "P_abs(t) with counter-rotating terms; columns t, P_abs_ideal, P_abs per omega_const",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == name)
    }
}

/// How the coupling matrix of a run is produced.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CouplingSource {
    Ideal {
        alpha: f64,
    },
    /// Mølmer–Sørensen couplings at `delta_over_nu_max` above the top mode.
    Ms {
        ratio: f64,
        delta_over_nu_max: f64,
    },
    /// Mølmer–Sørensen couplings tuned so the fitted exponent is `alpha`.
    MsAlpha {
        ratio: f64,
        alpha: f64,
    },
    FullyConnected,
}

impl CouplingSource {
    pub fn label(&self) -> String {
        match *self {
            CouplingSource::Ideal { alpha } => format!("ideal_a{alpha}"),
            CouplingSource::Ms {
                delta_over_nu_max, ..
            } => format!("ms_d{delta_over_nu_max}"),
            CouplingSource::MsAlpha { alpha, .. } => format!("ms_a{alpha}"),
            CouplingSource::FullyConnected => "full".into(),
        }
    }

    pub fn build(&self, n: usize) -> Result<CouplingMatrix> {
        match *self {
            CouplingSource::Ideal { alpha } => ideal_power_law(n, alpha),
            CouplingSource::FullyConnected => fully_connected(n),
            CouplingSource::Ms {
                ratio,
                delta_over_nu_max,
            } => {
                let modes = transverse_modes(&equilibrium_positions(n)?, ratio)?;
                ms_coupling_matrix(&modes, delta_over_nu_max * ratio)
            }
            CouplingSource::MsAlpha { ratio, alpha } => {
                let modes = transverse_modes(&equilibrium_positions(n)?, ratio)?;
                ms_coupling_matrix(&modes, detuning_for_alpha(&modes, alpha)?)
            }
        }
    }
}

/// A validated scenario with every default filled in.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub experiment: ExperimentKind,
    pub seed: u64,
    /// Worker threads; 0 uses every core.
    pub workers: usize,
    /// File stem of the CSV and metadata outputs.
    pub output: String,
    pub tol: f64,

    pub n: usize,
    pub source: usize,
    pub sink: usize,
    pub gamma_sink: f64,
    pub gamma_source: Vec<f64>,
    pub dephasing: Vec<f64>,
    pub initial: InitialState,
    /// Second initial state of a trace-distance run.
    pub compare: InitialState,

    pub couplings: Vec<CouplingSource>,
    pub ratio: f64,

    pub times: Vec<f64>,
    /// Observation time of the ensemble sweeps.
    pub time: f64,
    pub disorder: Vec<f64>,
    pub lambda: Vec<f64>,
    pub omega_gk: Vec<f64>,
    pub omega_const: Vec<f64>,
    /// Chain sizes of an exponent fit.
    pub sizes: Vec<usize>,
    /// `Δ/ν_max` values of an exponent fit.
    pub detuning: Vec<f64>,

    pub samples: usize,
    pub cutoff: usize,
    /// Also locate the optimal source rate of each coupling.
    pub optimize: bool,
}

/// One expanded parameter point of a scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct RunPoint {
    pub coupling: Option<CouplingSource>,
    pub params: Vec<(&'static str, f64)>,
}

impl Scenario {
    /// Parameter points the scenario evaluates, in output order.
    pub fn runs(&self) -> Vec<RunPoint> {
        let point = |coupling: Option<CouplingSource>, params: Vec<(&'static str, f64)>| RunPoint {
            coupling,
            params,
        };
        let first = Some(self.couplings[0]);
        match self.experiment {
            ExperimentKind::Transfer => self
                .couplings
                .iter()
                .map(|&c| point(Some(c), vec![]))
                .collect(),
            ExperimentKind::LongTime => self
                .dephasing
                .iter()
                .map(|&g| point(first, vec![("gamma", g)]))
                .collect(),
            ExperimentKind::AlphaFit => self
                .sizes
                .iter()
                .flat_map(|&n| self.detuning.iter().map(move |&d| (n, d)))
                .map(|(n, d)| point(None, vec![("n", n as f64), ("delta_over_nu_max", d)]))
                .collect(),
            ExperimentKind::DisorderSweep => self
                .dephasing
                .iter()
                .flat_map(|&g| self.disorder.iter().map(move |&w| (g, w)))
                .map(|(g, w)| point(first, vec![("gamma", g), ("W", w)]))
                .collect(),
            ExperimentKind::TelegraphSweep => self
                .omega_gk
                .iter()
                .flat_map(|&o| self.lambda.iter().map(move |&l| (o, l)))
                .map(|(o, l)| point(first, vec![("omega_gk", o), ("lambda", l)]))
                .collect(),
            ExperimentKind::TraceDistance => self
                .lambda
                .iter()
                .map(|&l| point(first, vec![("lambda", l)]))
                .collect(),
            ExperimentKind::DrivenSteady => self
                .couplings
                .iter()
                .flat_map(|&c| {
                    self.gamma_source
                        .iter()
                        .map(move |&g| point(Some(c), vec![("gamma_source", g)]))
                })
                .collect(),
            ExperimentKind::OffResonant => self
                .omega_const
                .iter()
                .map(|&w| point(first, vec![("omega_const", w)]))
                .collect(),
        }
    }
}
