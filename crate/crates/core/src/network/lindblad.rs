use crate::linalg::{gemm, CMatrix, C64, I};

use super::basis::SparseOp;

/// Time-independent Lindblad generator
/// `L(ρ) = −i[H, ρ] + Σ_k (L_k ρ L_k† − ½{L_k†L_k, ρ})`.
///
/// Jump operators carry the square root of their rate. The effective
/// non-Hermitian Hamiltonian `H − (i/2) Σ L_k†L_k` is cached.
#[derive(Debug, Clone)]
pub struct Lindbladian {
    hamiltonian: CMatrix,
    jumps: Vec<SparseOp>,
    heff: CMatrix,
    heff_adj: CMatrix,
}

impl Lindbladian {
    pub fn new(hamiltonian: CMatrix, jumps: Vec<SparseOp>) -> Self {
        let dim = hamiltonian.nrows();
        let mut heff = hamiltonian.clone();
        for l in &jumps {
            // L†L for a sparse L
            let mut ltl = CMatrix::zeros(dim, dim);
            for &(r1, c1, v1) in &l.entries {
                for &(r2, c2, v2) in &l.entries {
                    if r1 == r2 {
                        ltl[(c1, c2)] += v1.conj() * v2;
                    }
                }
            }
            heff -= ltl * C64::new(0.0, 0.5);
        }
        let heff_adj = heff.adjoint();
        Self {
            hamiltonian,
            jumps,
            heff,
            heff_adj,
        }
    }

    pub fn dim(&self) -> usize {
        self.hamiltonian.nrows()
    }

    pub fn hamiltonian(&self) -> &CMatrix {
        &self.hamiltonian
    }

    pub fn effective_hamiltonian(&self) -> &CMatrix {
        &self.heff
    }

    pub fn jumps(&self) -> &[SparseOp] {
        &self.jumps
    }

    /// Same dissipators with the diagonal of `H` shifted by `shift`.
    pub fn with_diagonal_shift(&self, shift: &[f64]) -> Self {
        let mut h = self.hamiltonian.clone();
        for (k, s) in shift.iter().enumerate() {
            h[(k, k)] += C64::new(*s, 0.0);
        }
        Self::new(h, self.jumps.clone())
    }

    /// Writes `L(ρ)` into `out`.
    pub fn apply_into(&self, rho: &CMatrix, out: &mut CMatrix) {
        // −i(H_eff ρ − ρ H_eff†)
        gemm(out, -I, &self.heff, rho, false);
        gemm(out, I, rho, &self.heff_adj, true);
        for l in &self.jumps {
            for &(a, c, l1) in &l.entries {
                for &(b, d, l2) in &l.entries {
                    out[(a, b)] += l1 * rho[(c, d)] * l2.conj();
                }
            }
        }
    }

    pub fn apply(&self, rho: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(self.dim(), self.dim());
        self.apply_into(rho, &mut out);
        out
    }

    /// Nonzero entries of the superoperator acting on column-major `vec(ρ)`,
    /// with vector index `a + b·dim` for element `(a, b)`.
    pub fn superoperator_triplets(&self) -> Vec<(usize, usize, C64)> {
        let d = self.dim();
        let idx = |a: usize, b: usize| a + b * d;
        let mut out = Vec::new();
        for b in 0..d {
            for a in 0..d {
                for c in 0..d {
                    let h = self.heff[(a, c)];
                    if h != C64::new(0.0, 0.0) {
                        // −i H_eff ρ : (a,b) ← (c,b)
                        out.push((idx(a, b), idx(c, b), -I * h));
                    }
                    let g = self.heff_adj[(c, b)];
                    if g != C64::new(0.0, 0.0) {
                        // +i ρ H_eff† : (a,b) ← (a,c)
                        out.push((idx(a, b), idx(a, c), I * g));
                    }
                }
            }
        }
        for l in &self.jumps {
            for &(a, c, l1) in &l.entries {
                for &(b, e, l2) in &l.entries {
                    out.push((idx(a, b), idx(c, e), l1 * l2.conj()));
                }
            }
        }
        out
    }

    /// Dense superoperator on `vec(ρ)`.
    pub fn superoperator(&self) -> CMatrix {
        let d2 = self.dim() * self.dim();
        let mut s = CMatrix::zeros(d2, d2);
        for (r, c, v) in self.superoperator_triplets() {
            s[(r, c)] += v;
        }
        s
    }
}
