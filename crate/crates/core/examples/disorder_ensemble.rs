//! Disorder-averaged absorption at a fixed time. Small disorder breaks the
//! destructive interference of the clean complete graph, large disorder
//! localizes the excitation.

use enaqt::engines::{run_ensemble, EnsembleOptions, Observable, TimeGrid, Variation};
use enaqt::ion_chain::fully_connected;
use enaqt::network::{DisorderSpec, InitialState, NetworkSpec};

fn main() -> enaqt::Result<()> {
    let spec = NetworkSpec::with_default_sites(fully_connected(10)?)?;
    let grid = TimeGrid::new(vec![10.0])?;
    for w in [0.0, 0.3, 1.0, 3.0, 10.0, 100.0] {
        let variation = Variation::Disorder(DisorderSpec::new(w, 400, 7)?);
        let r = run_ensemble(
            &spec,
            &variation,
            InitialState::SingleExcitationAtSource,
            &grid,
            &[Observable::AbsorptionProbability],
            EnsembleOptions::default(),
        )?;
        println!(
            "W {w:>6}: P_abs = {:.4} ± {:.4}",
            r.mean[0][0], r.stderr[0][0]
        );
    }
    Ok(())
}
