//! Removing a background spin decay from a measured absorption curve, and
//! putting it back.

use enaqt::engines::{transfer_curve, TimeGrid, DEFAULT_TOL};
use enaqt::ion_chain::ideal_power_law;
use enaqt::network::{InitialState, NetworkSpec};
use enaqt::observables::{decay_correction, decay_correction_inverse};

fn main() -> enaqt::Result<()> {
    let spec = NetworkSpec::with_default_sites(ideal_power_law(8, 1.0)?)?;
    let grid = TimeGrid::linspace(0.0, 8.0, 9)?;
    let ideal = transfer_curve(
        &spec,
        InitialState::SingleExcitationAtSource,
        &grid,
        DEFAULT_TOL,
    )?;
    let tau1 = 30.0;
    // a curve as it would be recorded with a finite spin lifetime
    let measured = decay_correction_inverse(&ideal, tau1, 0.0)?;
    let recovered = decay_correction(&measured, tau1, 0.0)?;
    for k in 0..grid.len() {
        println!(
            "t {:>4}: ideal {:.4}  measured {:.4}  corrected {:.4}",
            grid.points()[k],
            ideal.values[k],
            measured.values[k],
            recovered.values[k]
        );
    }
    Ok(())
}
