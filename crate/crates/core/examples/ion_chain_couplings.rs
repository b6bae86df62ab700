//! Transverse modes of a linear ion crystal, the Mølmer–Sørensen couplings
//! they mediate, and the power-law exponent those couplings approximate.

use enaqt::ion_chain::{
    detuning_for_alpha, equilibrium_positions, fit_alpha, ms_coupling_matrix, transverse_modes,
};

fn main() -> enaqt::Result<()> {
    let n = 10;
    let ratio = 50.0;
    let positions = equilibrium_positions(n)?;
    let modes = transverse_modes(&positions, ratio)?;
    let nu_max = modes.mode_freqs.iter().copied().fold(f64::MIN, f64::max);
    println!("positions: {positions:.3?}");
    println!("mode frequencies / ω_z: {:.3?}", modes.mode_freqs);

    println!("{:>10} {:>8} {:>10}", "Δ/ν_max", "alpha", "chi2");
    for d in [1.0001, 1.001, 1.01, 1.1, 1.2, 2.0, 10.0] {
        let fit = fit_alpha(&ms_coupling_matrix(&modes, d * nu_max)?)?;
        println!("{d:>10} {:>8.4} {:>10.2e}", fit.alpha, fit.chi2);
    }

    let delta = detuning_for_alpha(&modes, 1.0)?;
    println!("alpha = 1 needs Δ/ν_max = {:.6}", delta / nu_max);
    Ok(())
}
