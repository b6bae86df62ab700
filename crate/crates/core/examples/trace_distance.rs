//! Distinguishability of two initial states under telegraph noise. Revivals
//! of the trace distance signal memory in the environment.

use enaqt::engines::{run_trace_distance, EnsembleOptions, TimeGrid, Variation};
use enaqt::ion_chain::fully_connected;
use enaqt::network::{InitialState, NetworkSpec, Telegraph};
use enaqt::observables::detect_recurrences;

fn main() -> enaqt::Result<()> {
    let spec = NetworkSpec::with_default_sites(fully_connected(10)?)?;
    let grid = TimeGrid::linspace(0.0, 10.0, 101)?;
    for lambda in [0.1, 1.0, 10.0, 100.0] {
        let variation = Variation::Telegraph {
            noise: Telegraph::new(4.0, lambda)?,
            n_samples: 150,
            seed: 6,
        };
        let r = run_trace_distance(
            &spec,
            &variation,
            InitialState::SingleExcitationAt(2),
            InitialState::SuperpositionHalfSite(2),
            &grid,
            EnsembleOptions::default(),
        )?;
        let rec = detect_recurrences(&r.values, &r.stderr, 5.0);
        let first = rec
            .first()
            .map(|&k| format!("first at t = {}", r.times[k]))
            .unwrap_or_default();
        println!(
            "lambda {lambda:>5}: D(10) = {:.4}, {} recurrences {first}",
            r.values[100],
            rec.len()
        );
    }
    Ok(())
}
