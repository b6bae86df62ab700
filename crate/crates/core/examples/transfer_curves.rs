//! Absorption probability over time for three hopping ranges, with realistic
//! and ideal couplings, in a clean ten-site chain.

use enaqt::engines::{transfer_curve, TimeGrid, DEFAULT_TOL};
use enaqt::network::{InitialState, NetworkSpec};
use enaqt::scenario::CouplingSource;

fn main() -> enaqt::Result<()> {
    let grid = TimeGrid::linspace(0.0, 10.0, 11)?;
    for alpha in [0.8, 1.0, 1.2] {
        for source in [
            CouplingSource::MsAlpha { ratio: 20.0, alpha },
            CouplingSource::Ideal { alpha },
        ] {
            let spec = NetworkSpec::with_default_sites(source.build(10)?)?;
            let curve = transfer_curve(
                &spec,
                InitialState::SingleExcitationAtSource,
                &grid,
                DEFAULT_TOL,
            )?;
            let row: Vec<String> = curve.values.iter().map(|p| format!("{p:.3}")).collect();
            println!("{:<12} {}", source.label(), row.join(" "));
        }
    }
    Ok(())
}
