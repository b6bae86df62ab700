//! Discrete amplitude damping of the sink site.

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, C64};
use crate::network::Basis;

/// Applies one amplitude-damping operation with decay probability `p` to
/// `sink` (1-based): `ρ ↦ K₁ρK₁† + K₂ρK₂†` with `K₁ = √p σ⁻` and
/// `K₂ = |↓⟩⟨↓| + √(1−p)|↑⟩⟨↑|`.
pub fn kraus_decay_step(basis: &Basis, sink: usize, rho: &CMatrix, p: f64) -> Result<CMatrix> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!(
            "decay probability {p} outside [0, 1]"
        )));
    }
    let d = basis.dim();
    if rho.nrows() != d || rho.ncols() != d {
        return Err(Error::DimensionMismatch(rho.nrows(), d));
    }
    if sink < 1 || sink > basis.n_sites() {
        return Err(Error::InvalidParameter(format!(
            "sink {sink} outside 1..={}",
            basis.n_sites()
        )));
    }
    let keep = (1.0 - p).sqrt();
    // K₂ is diagonal
    let k2: Vec<f64> = (0..d)
        .map(|k| if basis.occupied(k, sink) { keep } else { 1.0 })
        .collect();
    let mut out = CMatrix::zeros(d, d);
    for b in 0..d {
        for a in 0..d {
            out[(a, b)] = rho[(a, b)] * (k2[a] * k2[b]);
        }
    }
    // K₁ maps basis state k to target[k] with unit amplitude
    let lower = basis.lowering(sink);
    let mut target = vec![None; d];
    for &(to, from, _) in &lower.entries {
        target[from] = Some(to);
    }
    for b in 0..d {
        let Some(tb) = target[b] else { continue };
        for a in 0..d {
            let Some(ta) = target[a] else { continue };
            out[(ta, tb)] += rho[(a, b)] * C64::new(p, 0.0);
        }
    }
    Ok(out)
}
