//! The sink as a sequence of discrete amplitude-damping operations
//! interleaved with the coherent evolution, converging to continuous decay.

use enaqt::engines::{kraus_decay_step, propagate, ExpPropagator, PropagateOptions, TimeGrid};
use enaqt::ion_chain::ideal_power_law;
use enaqt::network::{build_sector_generator, initial_state, InitialState, NetworkSpec};

fn main() -> enaqt::Result<()> {
    let spec = NetworkSpec::with_default_sites(ideal_power_law(5, 1.0)?)?;
    let t_end = 5.0;
    let full = build_sector_generator(&spec)?;
    let rho0 = initial_state(&spec, &full.basis, InitialState::SingleExcitationAtSource)?;
    let exact = propagate(
        &full,
        &rho0,
        &TimeGrid::new(vec![t_end])?,
        PropagateOptions::exponential(),
    )?;
    let p_exact = exact[0][(0, 0)].re;

    let coherent = build_sector_generator(&spec.clone().with_gamma_sink(0.0))?;
    let mut step = ExpPropagator::new(&coherent.lindblad);
    for dt in [1e-1, 1e-2, 1e-3] {
        let mut rho = rho0.clone();
        for _ in 0..(t_end / dt).round() as usize {
            rho = kraus_decay_step(
                &full.basis,
                spec.sink,
                &step.step(&rho, dt),
                spec.gamma_sink * dt,
            )?;
        }
        println!(
            "ΔT {dt:>6}: P_abs = {:.6}, error {:.2e}",
            rho[(0, 0)].re,
            (rho[(0, 0)].re - p_exact).abs()
        );
    }
    println!("continuous: {p_exact:.6}");
    Ok(())
}
