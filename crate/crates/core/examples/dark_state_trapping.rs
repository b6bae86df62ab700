//! On the complete graph most of the excitation is trapped in dark states.
//! Weak dephasing mixes them back in and the sink absorbs everything.

use enaqt::engines::{long_time_absorption, DEFAULT_TOL, LONG_TIME_HORIZON};
use enaqt::ion_chain::fully_connected;
use enaqt::network::NetworkSpec;

fn main() -> enaqt::Result<()> {
    let n = 10;
    let spec = NetworkSpec::new(fully_connected(n)?, 3, 7)?;
    for gamma in [0.0, 0.01, 0.1] {
        let r = long_time_absorption(
            &spec.clone().with_uniform_dephasing(gamma),
            LONG_TIME_HORIZON,
            DEFAULT_TOL,
        )?;
        println!(
            "gamma {gamma:<5} P_abs({}) = {:.4}  flux {:.1e}  stationary {}",
            r.horizon, r.p_abs, r.flux, r.stationary
        );
    }
    println!("1/(N-1) = {:.4}", 1.0 / (n as f64 - 1.0));
    Ok(())
}
