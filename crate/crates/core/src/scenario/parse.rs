use std::collections::HashMap;
use std::path::Path;
use std::str::FromStr;

use ini::Ini;

use super::{CouplingSource, ExperimentKind, Scenario};
use crate::error::{Error, Result};
use crate::network::{InitialState, NetworkSpec};
use crate::observables::logspace;

/// Every accepted key and the section it may also be written under.
const KEYS: &[(&str, &str)] = &[
    ("experiment", "run"),
    ("seed", "run"),
    ("workers", "run"),
    ("output", "run"),
    ("tol", "run"),
    ("n", "network"),
    ("source", "network"),
    ("sink", "network"),
    ("gamma", "network"),
    ("gamma_source", "network"),
    ("dephasing", "network"),
    ("initial", "network"),
    ("compare", "network"),
    ("model", "coupling"),
    ("alpha", "coupling"),
    ("detuning", "coupling"),
    ("ratio", "coupling"),
    ("times", "grid"),
    ("time", "grid"),
    ("disorder", "grid"),
    ("lambda", "grid"),
    ("omega_gk", "grid"),
    ("omega_const", "grid"),
    ("sizes", "grid"),
    ("samples", "ensemble"),
    ("cutoff", "steady"),
    ("optimize", "steady"),
];

pub fn parse_scenario(path: impl AsRef<Path>) -> Result<Scenario> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::from(e).context(path.display().to_string()))?;
    parse_scenario_str(&text)
}

/// Parses scenario text, reporting every violation at once.
pub fn parse_scenario_str(text: &str) -> Result<Scenario> {
    let ini = Ini::load_from_str(text)
        .map_err(|e| Error::Scenario(vec![format!("syntax error: {e}")]))?;
    let mut raw = Raw {
        values: HashMap::new(),
        violations: Vec::new(),
    };
    for (section, props) in ini.iter() {
        for (key, value) in props.iter() {
            match KEYS.iter().find(|(k, _)| *k == key) {
                None => raw.violations.push(format!("unknown key `{key}`")),
                Some((_, home)) if section.is_some_and(|s| s != *home) => {
                    raw.violations.push(format!(
                        "key `{key}` belongs in [{home}], found in [{}]",
                        section.unwrap_or_default()
                    ))
                }
                Some((k, _)) => {
                    if raw.values.insert(k, value.trim().to_string()).is_some() {
                        raw.violations
                            .push(format!("key `{key}` given more than once"));
                    }
                }
            }
        }
    }
    build(raw)
}

struct Raw {
    values: HashMap<&'static str, String>,
    violations: Vec<String>,
}

impl Raw {
    fn scalar<T: FromStr>(&mut self, key: &str, what: &str) -> Option<T> {
        let v = self.values.get(key)?;
        match v.parse::<T>() {
            Ok(x) => Some(x),
            Err(_) => {
                self.violations
                    .push(format!("key `{key}`: expected {what}, got `{v}`"));
                None
            }
        }
    }

    fn list(&mut self, key: &str) -> Option<Vec<f64>> {
        let v = self.values.get(key)?;
        match parse_list(v) {
            Ok(x) => Some(x),
            Err(msg) => {
                self.violations.push(format!("key `{key}`: {msg}"));
                None
            }
        }
    }

    fn check(&mut self, ok: bool, msg: impl FnOnce() -> String) {
        if !ok {
            self.violations.push(msg());
        }
    }
}

/// Comma-separated numbers and `linspace a b n` / `logspace a b n` ranges.
fn parse_list(s: &str) -> std::result::Result<Vec<f64>, String> {
    let mut out = Vec::new();
    for item in s.split(',').map(str::trim) {
        let words: Vec<&str> = item.split_whitespace().collect();
        match words.as_slice() {
            [kind @ ("linspace" | "logspace"), a, b, n] => {
                let (a, b) = (num(a)?, num(b)?);
                let n: usize = n
                    .parse()
                    .map_err(|_| format!("range length `{n}` is not an integer"))?;
                if n == 0 {
                    return Err("range length must be positive".into());
                }
                if *kind == "linspace" {
                    let step = if n > 1 {
                        (b - a) / (n as f64 - 1.0)
                    } else {
                        0.0
                    };
                    out.extend((0..n).map(|k| if k + 1 == n { b } else { a + k as f64 * step }));
                } else {
                    out.extend(logspace(10f64.powf(a), 10f64.powf(b), n));
                }
            }
            [x] => out.push(num(x)?),
            _ => return Err(format!("cannot read `{item}` as a number or range")),
        }
    }
    Ok(out)
}

fn num(s: &str) -> std::result::Result<f64, String> {
    s.parse::<f64>()
        .ok()
        .filter(|x| x.is_finite())
        .ok_or_else(|| format!("`{s}` is not a finite number"))
}

fn parse_initial(s: &str) -> Option<InitialState> {
    let words: Vec<&str> = s.split_whitespace().collect();
    match words.as_slice() {
        ["source"] => Some(InitialState::SingleExcitationAtSource),
        ["vacuum"] => Some(InitialState::Vacuum),
        ["site", k] => k.parse().ok().map(InitialState::SingleExcitationAt),
        ["half", k] => k.parse().ok().map(InitialState::SuperpositionHalfSite),
        _ => None,
    }
}

fn build(mut raw: Raw) -> Result<Scenario> {
    use ExperimentKind::*;

    let experiment = match raw.values.get("experiment").cloned() {
        None => {
            raw.violations.push("missing key `experiment`".into());
            None
        }
        Some(name) => {
            let kind = ExperimentKind::from_name(&name);
            if kind.is_none() {
                raw.violations.push(format!("unknown experiment `{name}`"));
            }
            kind
        }
    };
    // keep collecting violations against a stand-in kind
    let kind = experiment.unwrap_or(Transfer);

    let seed = raw.scalar("seed", "an unsigned integer").unwrap_or(1);
    let workers = raw.scalar("workers", "an unsigned integer").unwrap_or(0);
    let output = raw
        .values
        .get("output")
        .cloned()
        .unwrap_or_else(|| kind.name().to_string());
    let tol = raw.scalar("tol", "a number").unwrap_or(1e-8);
    raw.check(tol > 0.0 && tol < 1.0, || {
        format!("tol must lie in (0, 1), got {tol}")
    });

    let n: usize = raw.scalar("n", "an unsigned integer").unwrap_or(10);
    let min_n = if kind == AlphaFit { 1 } else { 2 };
    raw.check(n >= min_n, || {
        format!("n must be at least {min_n}, got {n}")
    });
    let (def_source, def_sink) = NetworkSpec::default_sites(n.max(2));
    let source = raw.scalar("source", "a site index").unwrap_or(def_source);
    let sink = raw.scalar("sink", "a site index").unwrap_or(def_sink);
    if kind != AlphaFit {
        raw.check((1..=n).contains(&source), || {
            format!("source {source} outside 1..={n}")
        });
        raw.check((1..=n).contains(&sink), || {
            format!("sink {sink} outside 1..={n}")
        });
        raw.check(source != sink, || {
            format!("source and sink are both site {sink}")
        });
    }
    let gamma_sink = raw.scalar("gamma", "a number").unwrap_or(1.0);
    raw.check(gamma_sink >= 0.0, || {
        format!("gamma must be >= 0, got {gamma_sink}")
    });

    let gamma_source = match (kind, raw.list("gamma_source")) {
        (DrivenSteady, None) => logspace(1e-3, 1e3, 61),
        (DrivenSteady, Some(v)) => {
            raw.check(v.iter().all(|&g| g > 0.0), || {
                "gamma_source values must be > 0".into()
            });
            v
        }
        (_, None) => vec![0.0],
        (_, Some(v)) => {
            raw.check(v.iter().all(|&g| g == 0.0), || {
                format!("gamma_source is only used by {}", DrivenSteady.name())
            });
            vec![0.0]
        }
    };
    let dephasing = raw.list("dephasing").unwrap_or_else(|| vec![0.0]);
    raw.check(dephasing.iter().all(|&g| g >= 0.0), || {
        "dephasing rates must be >= 0".into()
    });
    if !matches!(kind, LongTime | DisorderSweep) {
        raw.check(dephasing.len() == 1, || {
            format!("{} takes a single dephasing rate", kind.name())
        });
    }

    let initial_state =
        |raw: &mut Raw, key: &str, default: InitialState| match raw.values.get(key).cloned() {
            None => default,
            Some(v) => parse_initial(&v).unwrap_or_else(|| {
                raw.violations.push(format!(
                    "key `{key}`: expected `source`, `vacuum`, `site K` or `half K`, got `{v}`"
                ));
                default
            }),
        };
    let initial = initial_state(&mut raw, "initial", InitialState::SingleExcitationAtSource);
    let compare = initial_state(
        &mut raw,
        "compare",
        InitialState::SuperpositionHalfSite(source),
    );
    for state in [initial, compare] {
        if let InitialState::SingleExcitationAt(k) | InitialState::SuperpositionHalfSite(k) = state
        {
            raw.check((1..=n).contains(&k), || {
                format!("initial-state site {k} outside 1..={n}")
            });
        }
    }

    let ratio = raw.scalar("ratio", "a number").unwrap_or(20.0);
    raw.check(ratio > 1.0, || format!("ratio must be > 1, got {ratio}"));
    let alpha = raw.list("alpha");
    let detuning = raw.list("detuning");
    if let Some(a) = &alpha {
        raw.check(a.iter().all(|&x| x >= 0.0), || {
            "alpha values must be >= 0".into()
        });
    }
    if let Some(d) = &detuning {
        raw.check(d.iter().all(|&x| x > 1.0), || {
            "detuning values are Δ/ν_max and must be > 1".into()
        });
    }
    let models: Vec<String> = raw
        .values
        .get("model")
        .map(|m| m.split(',').map(|s| s.trim().to_string()).collect())
        .unwrap_or_else(|| vec!["ideal".into()]);
    let mut couplings = Vec::new();
    if kind != AlphaFit {
        for model in &models {
            // `ideal 3` or `ms 1.5` pins the exponent of that model alone
            let (name, inline) = match model.split_once(char::is_whitespace) {
                Some((m, a)) => match num(a.trim()) {
                    Ok(a) if a >= 0.0 => (m, Some(vec![a])),
                    _ => {
                        raw.violations.push(format!(
                            "model `{model}`: `{}` is not an exponent",
                            a.trim()
                        ));
                        continue;
                    }
                },
                None => (model.as_str(), None),
            };
            let alpha = inline.as_ref().or(alpha.as_ref());
            let detuning = if inline.is_some() {
                None
            } else {
                detuning.as_ref()
            };
            match name {
                "ideal" => match alpha {
                    Some(a) => {
                        couplings.extend(a.iter().map(|&alpha| CouplingSource::Ideal { alpha }))
                    }
                    None => raw.violations.push("model `ideal` needs `alpha`".into()),
                },
                "ms" => match (alpha, detuning) {
                    (Some(a), None) => couplings.extend(
                        a.iter()
                            .map(|&alpha| CouplingSource::MsAlpha { ratio, alpha }),
                    ),
                    (None, Some(d)) => {
                        couplings.extend(d.iter().map(|&delta_over_nu_max| CouplingSource::Ms {
                            ratio,
                            delta_over_nu_max,
                        }))
                    }
                    _ => raw
                        .violations
                        .push("model `ms` needs exactly one of `alpha` or `detuning`".into()),
                },
                "fully-connected" if inline.is_none() => {
                    couplings.push(CouplingSource::FullyConnected)
                }
                "fully-connected" => raw
                    .violations
                    .push("model `fully-connected` takes no exponent".into()),
                other => raw.violations.push(format!(
                    "unknown coupling model `{other}` (expected ideal, ms or fully-connected)"
                )),
            }
        }
        if !matches!(kind, Transfer | DrivenSteady) && couplings.len() > 1 {
            raw.violations.push(format!(
                "{} takes a single coupling, got {}",
                kind.name(),
                couplings.len()
            ));
        }
        if couplings.is_empty() {
            couplings.push(CouplingSource::FullyConnected);
        }
    } else {
        couplings.push(CouplingSource::FullyConnected);
    }

    let default_times = match kind {
        LongTime => (0..=200).map(|k| k as f64).collect(),
        _ => (0..=100).map(|k| k as f64 * 0.1).collect(),
    };
    let times = raw.list("times").unwrap_or(default_times);
    raw.check(
        !times.is_empty() && times[0] >= 0.0 && times.windows(2).all(|w| w[0] < w[1]),
        || "times must be non-negative and strictly ascending".into(),
    );
    let time = raw
        .scalar("time", "a number")
        .unwrap_or(if kind == TelegraphSweep { 2.5 } else { 10.0 });
    raw.check(time > 0.0, || format!("time must be > 0, got {time}"));

    let disorder = raw.list("disorder").unwrap_or_else(|| {
        let mut w = vec![0.0];
        w.extend(logspace(0.1, 100.0, 16));
        w
    });
    raw.check(disorder.iter().all(|&w| w >= 0.0), || {
        "disorder widths must be >= 0".into()
    });
    let lambda = raw.list("lambda").unwrap_or_else(|| match kind {
        TraceDistance => vec![0.1, 1.0, 10.0, 100.0],
        _ => logspace(0.1, 1000.0, 17),
    });
    raw.check(lambda.iter().all(|&l| l > 0.0), || {
        "lambda values must be > 0".into()
    });
    let omega_gk = raw.list("omega_gk").unwrap_or_else(|| vec![4.0]);
    raw.check(omega_gk.iter().all(|&w| w >= 0.0), || {
        "omega_gk values must be >= 0".into()
    });
    let omega_const = raw
        .list("omega_const")
        .unwrap_or_else(|| vec![1.0, 2.0, 10.0]);
    raw.check(omega_const.iter().all(|&w| w >= 0.0), || {
        "omega_const values must be >= 0".into()
    });
    let sizes: Vec<usize> = match raw.list("sizes") {
        None => vec![5, 10, 20, 30],
        Some(v) => {
            raw.check(v.iter().all(|&x| x >= 3.0 && x.fract() == 0.0), || {
                "sizes must be integers >= 3".into()
            });
            v.iter().map(|&x| x as usize).collect()
        }
    };
    let detuning = detuning.unwrap_or_else(|| {
        logspace(1e-4, 10.0, 26)
            .into_iter()
            .map(|x| 1.0 + x)
            .collect()
    });

    let default_samples = match kind {
        DisorderSweep => 1000,
        TelegraphSweep => 500,
        _ => 150,
    };
    let samples = raw
        .scalar("samples", "an unsigned integer")
        .unwrap_or(default_samples);
    if matches!(kind, DisorderSweep | TelegraphSweep | TraceDistance) {
        raw.check(samples >= 2, || {
            format!("samples must be at least 2, got {samples}")
        });
    }
    let default_cutoff = if kind == OffResonant {
        crate::engines::OFFRESONANT_CUTOFF.min(n)
    } else {
        n
    };
    let cutoff = raw
        .scalar("cutoff", "an unsigned integer")
        .unwrap_or(default_cutoff);
    raw.check((1..=n.max(1)).contains(&cutoff), || {
        format!("cutoff {cutoff} outside 1..={n}")
    });
    let optimize = raw.scalar("optimize", "true or false").unwrap_or(false);

    if !raw.violations.is_empty() {
        return Err(Error::Scenario(raw.violations));
    }
    Ok(Scenario {
        experiment: kind,
        seed,
        workers,
        output,
        tol,
        n,
        source,
        sink,
        gamma_sink,
        gamma_source,
        dephasing,
        initial,
        compare,
        couplings,
        ratio,
        times,
        time,
        disorder,
        lambda,
        omega_gk,
        omega_const,
        sizes,
        detuning,
        samples,
        cutoff,
        optimize,
    })
}
