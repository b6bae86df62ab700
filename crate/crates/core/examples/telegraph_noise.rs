//! Telegraph-noise dephasing against its Markovian counterpart. At slow
//! switching the noise looks like static disorder; at fast switching it
//! approaches a Lindblad dephasing rate.

use enaqt::engines::{
    run_ensemble, transfer_curve, EnsembleOptions, Observable, TimeGrid, Variation, DEFAULT_TOL,
};
use enaqt::ion_chain::fully_connected;
use enaqt::network::{InitialState, NetworkSpec, Telegraph};

fn main() -> enaqt::Result<()> {
    let spec = NetworkSpec::with_default_sites(fully_connected(10)?)?;
    let grid = TimeGrid::new(vec![2.5])?;
    let omega = 4.0;
    for lambda in [0.1, 1.0, 10.0, 100.0] {
        let noise = Telegraph::new(omega, lambda)?;
        let variation = Variation::Telegraph {
            noise,
            n_samples: 300,
            seed: 11,
        };
        let r = run_ensemble(
            &spec,
            &variation,
            InitialState::SingleExcitationAtSource,
            &grid,
            &[Observable::AbsorptionProbability],
            EnsembleOptions::default(),
        )?;
        let gamma = noise.markovian_rate();
        let markov = transfer_curve(
            &spec.clone().with_uniform_dephasing(gamma),
            InitialState::SingleExcitationAtSource,
            &grid,
            DEFAULT_TOL,
        )?;
        println!(
            "lambda {lambda:>5}: telegraph {:.4} ± {:.4}   Lindblad(gamma = {gamma:.3}) {:.4}",
            r.mean[0][0], r.stderr[0][0], markov.values[0]
        );
    }
    Ok(())
}
