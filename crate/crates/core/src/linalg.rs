//! Dense complex linear-algebra helpers shared by the engines.
//!
//! The matrix exponential uses scaling and squaring with diagonal Padé
//! approximants of degree 3, 5, 7, 9 or 13, selected from the 1-norm of the
//! input. `expm_action` applies `exp(t A)` to a vector through a scaled
//! truncated Taylor series, which is much cheaper for the short, frequently
//! changing segments produced by telegraph noise.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub const I: C64 = C64::new(0.0, 1.0);

// products below this size stay on the calling thread
const PAR_GEMM_DIM: usize = 96;

/// `out ← alpha·a·b + (accumulate ? out : 0)`, via faer's blocked kernel;
/// nalgebra has no fast path for complex scalars.
pub fn gemm(out: &mut CMatrix, alpha: C64, a: &CMatrix, b: &CMatrix, accumulate: bool) {
    use faer::{Accum, MatMut, MatRef, Par};
    let (m, k, n) = (a.nrows(), a.ncols(), b.ncols());
    assert!(
        b.nrows() == k && out.nrows() == m && out.ncols() == n,
        "gemm shape mismatch"
    );
    let par = if m.max(n) >= PAR_GEMM_DIM {
        Par::rayon(0)
    } else {
        Par::Seq
    };
    faer::linalg::matmul::matmul(
        MatMut::from_column_major_slice_mut(out.as_mut_slice(), m, n),
        if accumulate {
            Accum::Add
        } else {
            Accum::Replace
        },
        MatRef::from_column_major_slice(a.as_slice(), m, k),
        MatRef::from_column_major_slice(b.as_slice(), k, n),
        alpha,
        par,
    );
}

const PADE_3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const PADE_5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const PADE_7: [f64; 8] = [
    17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0,
];
const PADE_9: [f64; 10] = [
    17643225600.0,
    8821612800.0,
    2075673600.0,
    302702400.0,
    30270240.0,
    2162160.0,
    110880.0,
    3960.0,
    90.0,
    1.0,
];
const PADE_13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

// Backward-error thresholds on the 1-norm for each degree.
const THETA: [(usize, f64); 4] = [
    (3, 1.495585217958292e-2),
    (5, 2.539398330063230e-1),
    (7, 9.504178996162932e-1),
    (9, 2.097847961257068e0),
];
const THETA_13: f64 = 5.371920351148152;

pub fn one_norm(a: &CMatrix) -> f64 {
    a.column_iter()
        .map(|c| c.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Matrix exponential `exp(A)` by scaling and squaring.
pub fn expm(a: &CMatrix) -> CMatrix {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "expm needs a square matrix");
    if n == 0 {
        return CMatrix::zeros(0, 0);
    }
    let norm = one_norm(a);
    let ident = CMatrix::identity(n, n);

    for &(m, theta) in THETA.iter() {
        if norm <= theta {
            let coeffs: &[f64] = match m {
                3 => &PADE_3,
                5 => &PADE_5,
                7 => &PADE_7,
                _ => &PADE_9,
            };
            return pade_low(a, coeffs, &ident);
        }
    }

    let s = if norm > THETA_13 {
        (norm / THETA_13).log2().ceil().max(0.0) as u32
    } else {
        0
    };
    let scaled = a.scale(1.0 / 2f64.powi(s as i32));
    let mut r = pade_13(&scaled, &ident);
    for _ in 0..s {
        r = &r * &r;
    }
    r
}

fn pade_low(a: &CMatrix, b: &[f64], ident: &CMatrix) -> CMatrix {
    let a2 = a * a;
    let mut pow = ident.clone();
    let mut u = ident.scale(b[1]);
    let mut v = ident.scale(b[0]);
    for k in 1..b.len() / 2 {
        pow = &pow * &a2;
        u += pow.scale(b[2 * k + 1]);
        v += pow.scale(b[2 * k]);
    }
    let u = a * u;
    solve_pade(&v, &u)
}

fn pade_13(a: &CMatrix, ident: &CMatrix) -> CMatrix {
    let b = &PADE_13;
    let a2 = a * a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let inner_u = a6.scale(b[13]) + a4.scale(b[11]) + a2.scale(b[9]);
    let u =
        a * (&a6 * inner_u + a6.scale(b[7]) + a4.scale(b[5]) + a2.scale(b[3]) + ident.scale(b[1]));
    let inner_v = a6.scale(b[12]) + a4.scale(b[10]) + a2.scale(b[8]);
    let v = &a6 * inner_v + a6.scale(b[6]) + a4.scale(b[4]) + a2.scale(b[2]) + ident.scale(b[0]);
    solve_pade(&v, &u)
}

fn solve_pade(v: &CMatrix, u: &CMatrix) -> CMatrix {
    let p = v + u;
    let q = v - u;
    q.lu()
        .solve(&p)
        .expect("Pade denominator is nonsingular for scaled inputs")
}

/// `exp(t A) v` via a scaled Taylor series; each substep has `‖h A‖₁ ≤ 1`.
pub fn expm_action(a: &CMatrix, v: &CVector, t: f64) -> CVector {
    let norm = one_norm(a) * t.abs();
    if norm == 0.0 {
        return v.clone();
    }
    let steps = norm.ceil().max(1.0) as usize;
    let h = t / steps as f64;
    let mut out = v.clone();
    let mut term = CVector::zeros(v.len());
    let mut next = CVector::zeros(v.len());
    for _ in 0..steps {
        term.copy_from(&out);
        let scale = out.norm().max(f64::MIN_POSITIVE);
        for k in 1..60 {
            next.gemv(C64::new(h / k as f64, 0.0), a, &term, C64::new(0.0, 0.0));
            std::mem::swap(&mut term, &mut next);
            out += &term;
            if term.norm() <= 1e-17 * scale {
                break;
            }
        }
    }
    out
}

/// Sum in a fixed binary-tree order; the result depends only on the slice order.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= 8 {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// Elementwise fixed-order pairwise sum of equally sized matrices.
pub fn pairwise_sum_matrices(values: &[CMatrix]) -> CMatrix {
    match values.len() {
        0 => panic!("pairwise_sum_matrices needs at least one matrix"),
        1 => values[0].clone(),
        n => {
            let mid = n / 2;
            pairwise_sum_matrices(&values[..mid]) + pairwise_sum_matrices(&values[mid..])
        }
    }
}

/// Eigenvalues of a Hermitian matrix (the anti-Hermitian part is discarded).
pub fn hermitian_eigenvalues(a: &CMatrix) -> Vec<f64> {
    let h = (a + a.adjoint()).scale(0.5);
    let mut ev: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|x, y| x.total_cmp(y));
    ev
}

/// Frobenius norm of the anti-Hermitian part.
pub fn hermiticity_defect(a: &CMatrix) -> f64 {
    (a - a.adjoint()).norm() * 0.5
}

pub fn trace(a: &CMatrix) -> C64 {
    a.diagonal().iter().sum()
}
