use crate::error::{Error, Result};
use crate::ion_chain::CouplingMatrix;

/// Dephasing acting on the site energies.
#[derive(Debug, Clone, PartialEq)]
pub enum NoiseModel {
    None,
    /// Lindblad dephasing with one rate per site.
    Markovian {
        rates: Vec<f64>,
    },
    /// Independent Goldstein–Kac telegraph processes, `ω_i(t) = ±ω_GK/2`
    /// switching at rate `lambda` in both directions.
    Telegraph(Telegraph),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Telegraph {
    pub omega_gk: f64,
    pub lambda: f64,
}

impl Telegraph {
    pub fn new(omega_gk: f64, lambda: f64) -> Result<Self> {
        if !(omega_gk >= 0.0) || !(lambda >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "telegraph parameters must be >= 0 (omega_gk = {omega_gk}, lambda = {lambda})"
            )));
        }
        Ok(Self { omega_gk, lambda })
    }

    /// Lindblad dephasing rate that the process is compared against in the
    /// fast-switching limit, `ω_GK² / (2λ)`.
    pub fn markovian_rate(&self) -> f64 {
        self.omega_gk * self.omega_gk / (2.0 * self.lambda)
    }

    /// Two-time correlation `⟨ω(t) ω(t+δ)⟩ = (ω_GK²/4) e^{−2λ|δ|}`.
    pub fn correlation(&self, delta: f64) -> f64 {
        0.25 * self.omega_gk * self.omega_gk * (-2.0 * self.lambda * delta.abs()).exp()
    }
}

impl NoiseModel {
    pub fn uniform_markovian(n_sites: usize, gamma: f64) -> Self {
        if gamma == 0.0 {
            NoiseModel::None
        } else {
            NoiseModel::Markovian {
                rates: vec![gamma; n_sites],
            }
        }
    }

    /// Markovian rates, or `None` when no Lindblad dephasing is present.
    pub fn markovian_rates(&self) -> Option<&[f64]> {
        match self {
            NoiseModel::Markovian { rates } if rates.iter().any(|r| *r > 0.0) => Some(rates),
            _ => None,
        }
    }

    pub fn telegraph(&self) -> Option<Telegraph> {
        match self {
            NoiseModel::Telegraph(t) => Some(*t),
            _ => None,
        }
    }
}

/// Static on-site disorder drawn uniformly from `[−W, W]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DisorderSpec {
    pub width: f64,
    pub n_samples: usize,
    pub seed: u64,
}

impl DisorderSpec {
    pub fn new(width: f64, n_samples: usize, seed: u64) -> Result<Self> {
        if !(width >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "disorder width must be >= 0, got {width}"
            )));
        }
        if n_samples == 0 {
            return Err(Error::InvalidParameter(
                "disorder needs at least one sample".into(),
            ));
        }
        Ok(Self {
            width,
            n_samples,
            seed,
        })
    }
}

/// Full open-network model. Site labels are 1-based.
#[derive(Debug, Clone)]
pub struct NetworkSpec {
    pub coupling: CouplingMatrix,
    pub site_energies: Vec<f64>,
    pub source: usize,
    pub sink: usize,
    pub gamma_sink: f64,
    pub gamma_source: f64,
    pub dephasing: NoiseModel,
}

impl NetworkSpec {
    /// Sink rate 1, no source driving, no disorder, no dephasing.
    pub fn new(coupling: CouplingMatrix, source: usize, sink: usize) -> Result<Self> {
        let n = coupling.n_sites();
        let spec = Self {
            coupling,
            site_energies: vec![0.0; n],
            source,
            sink,
            gamma_sink: 1.0,
            gamma_source: 0.0,
            dephasing: NoiseModel::None,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Default source/sink placement: source `N/5 + 1`; sink 7 for `N = 10`
    /// and `4N/5` otherwise.
    pub fn default_sites(n: usize) -> (usize, usize) {
        let source = n / 5 + 1;
        let sink = if n == 10 { 7 } else { 4 * n / 5 };
        (source, sink)
    }

    pub fn with_default_sites(coupling: CouplingMatrix) -> Result<Self> {
        let (source, sink) = Self::default_sites(coupling.n_sites());
        Self::new(coupling, source, sink)
    }

    pub fn n_sites(&self) -> usize {
        self.coupling.n_sites()
    }

    pub fn with_gamma_sink(mut self, gamma: f64) -> Self {
        self.gamma_sink = gamma;
        self
    }

    pub fn with_gamma_source(mut self, gamma: f64) -> Self {
        self.gamma_source = gamma;
        self
    }

    pub fn with_dephasing(mut self, noise: NoiseModel) -> Self {
        self.dephasing = noise;
        self
    }

    pub fn with_uniform_dephasing(self, gamma: f64) -> Self {
        let n = self.n_sites();
        self.with_dephasing(NoiseModel::uniform_markovian(n, gamma))
    }

    pub fn with_site_energies(mut self, energies: Vec<f64>) -> Self {
        self.site_energies = energies;
        self
    }

    /// Collects every violated invariant.
    pub fn violations(&self) -> Vec<String> {
        let n = self.n_sites();
        let mut v = Vec::new();
        if n < 2 {
            v.push(format!("network needs at least 2 sites, got {n}"));
        }
        if self.source < 1 || self.source > n {
            v.push(format!("i_source = {} outside 1..={n}", self.source));
        }
        if self.sink < 1 || self.sink > n {
            v.push(format!("i_sink = {} outside 1..={n}", self.sink));
        }
        if self.source == self.sink {
            v.push(format!(
                "i_source and i_sink must differ (both {})",
                self.sink
            ));
        }
        if !(self.gamma_sink >= 0.0) {
            v.push(format!("gamma_sink must be >= 0, got {}", self.gamma_sink));
        }
        if !(self.gamma_source >= 0.0) {
            v.push(format!(
                "gamma_source must be >= 0, got {}",
                self.gamma_source
            ));
        }
        if self.site_energies.len() != n {
            v.push(format!(
                "expected {n} site energies, got {}",
                self.site_energies.len()
            ));
        }
        match &self.dephasing {
            NoiseModel::None => {}
            NoiseModel::Markovian { rates } => {
                if rates.len() != n {
                    v.push(format!("expected {n} dephasing rates, got {}", rates.len()));
                }
                if rates.iter().any(|r| !(*r >= 0.0)) {
                    v.push("dephasing rates must be >= 0".into());
                }
            }
            NoiseModel::Telegraph(t) => {
                if !(t.omega_gk >= 0.0) || !(t.lambda >= 0.0) {
                    v.push("telegraph parameters must be >= 0".into());
                }
            }
        }
        v
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidParameter(v.join("; ")))
        }
    }
}
