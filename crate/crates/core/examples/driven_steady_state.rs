//! A network fed from an infinite-temperature bath at the source. The
//! stationary absorption rate peaks at an intermediate source rate.

use enaqt::ion_chain::{fully_connected, ideal_power_law};
use enaqt::network::NetworkSpec;
use enaqt::observables::{driven_point, optimal_source_rate, SourceScanOptions};

fn main() -> enaqt::Result<()> {
    let n = 6;
    let spec = NetworkSpec::new(ideal_power_law(n, 1.5)?, 2, 5)?;
    println!(
        "{:>10} {:>10} {:>8}  populations",
        "Γ_source", "rate", "N_exc"
    );
    for g in [1e-2, 1e-1, 1.0, 10.0, 1e2, 1e3] {
        let p = driven_point(&spec, g, n)?;
        println!(
            "{g:>10} {:>10.4} {:>8.4}  {:.3?}",
            p.rate, p.total_excitations, p.populations
        );
    }
    let opt = optimal_source_rate(&spec, 1e-3, 1e3, SourceScanOptions::new(n))?;
    println!(
        "optimum: Γ_source = {:.4}, rate = {:.4}",
        opt.gamma_opt, opt.max_rate
    );

    // the complete graph has a degenerate stationary family; the populations
    // are those reached from the maximally mixed state
    let full = NetworkSpec::new(fully_connected(n)?, 2, 5)?;
    let p = driven_point(&full, 1e-2, n)?;
    println!("complete graph at Γ_source = 0.01: {:.3?}", p.populations);
    Ok(())
}
