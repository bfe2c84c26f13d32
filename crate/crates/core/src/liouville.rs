//! Liouville-space representation of the Lindblad generator.
//!
//! The master equation is taken in the damping-basis form
//!
//! ```text
//! drho/dt = -i [H, rho]
//!           - sum_n c_n ( L_n^dag L_n rho + rho L_n^dag L_n - 2 L_n rho L_n^dag )
//! ```
//!
//! so a two-level system with lowering collapse `L` and rate `c` relaxes its
//! excited **population** at rate `2c` (coherences at `c`).
//!
//! Density matrices are vectorized by **column stacking**: `v[i + D*j] =
//! rho[i, j]`. With that convention `A rho B -> (B^T kron A) v`, giving
//!
//! ```text
//! Gamma = -i (I kron H - H^T kron I)
//!         - sum_n c_n ( I kron M_n + M_n^T kron I - 2 conj(L_n) kron L_n ),
//! M_n = L_n^dag L_n .
//! ```
//!
//! All structures here are immutable after construction; propagation and
//! spectral analysis are pure functions of them, so values can be shared
//! freely across threads.

use ndarray::{linalg::kron, Array1, Array2};
use ndarray_linalg::Inverse;

use crate::error::{AqecError, Result};
use crate::numerics::{eig_general, expm, fro_norm, max_norm};
use crate::ops::{c, Basis, Operator, C64};

/// The Lindblad generator on Liouville space.
#[derive(Debug, Clone)]
pub struct LiouvilleGenerator {
    /// Basis of the underlying Hilbert space (dimension `D`).
    pub basis: Basis,
    /// Hamiltonian used to build the generator.
    pub hamiltonian: Operator,
    /// Damping terms `(rate, collapse operator)` used to build the generator.
    pub collapses: Vec<(f64, Operator)>,
    /// Dense `D^2 x D^2` generator matrix.
    pub matrix: Array2<C64>,
}

/// Quality flag of a spectral decomposition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ConditionFlag {
    /// Biorthogonality achieved: `max |l_n . r_m - delta_nm| <= 1e-8`.
    Good,
    /// Left/right pairing could not be certified to tolerance.
    Degraded,
}

/// Eigendecomposition of a generator with biorthogonal left/right systems.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    /// Eigenvalues sorted by descending real part, then ascending imaginary
    /// part (slowest-decaying first).
    pub eigenvalues: Array1<C64>,
    /// Right eigenvectors as columns, aligned with `eigenvalues`.
    pub right: Array2<C64>,
    /// Left eigenvectors as rows, aligned with `eigenvalues`, normalized so
    /// that `left . right = I` within `residual`.
    pub left: Array2<C64>,
    /// Measured `max |l_n . r_m - delta_nm|`.
    pub residual: f64,
    /// Relative Frobenius reconstruction error of `R diag(lambda) L`.
    pub reconstruction_error: f64,
    /// Groups of indices whose eigenvalues coincide within
    /// `1e-8 * spectral_radius` (handled jointly during biorthogonalization).
    pub clusters: Vec<Vec<usize>>,
    /// `Good` iff `residual <= 1e-8` and every cluster inverted cleanly.
    pub condition_flag: ConditionFlag,
}

/// Stationary / slow content of a spectrum.
#[derive(Debug, Clone)]
pub struct StableStates {
    /// Eigen-pairs with `|lambda| <= tol * spectral_radius`, as density-shaped
    /// right eigenvectors (unnormalized).
    pub pairs: Vec<(C64, Operator)>,
    /// Smallest `|Re lambda|` among decaying eigenvalues (`|Re| > tol *
    /// spectral_radius`), i.e. the slowest relaxation rate; `None` if nothing
    /// decays.
    pub slowest_decay_rate: Option<f64>,
}

/// Column-stacking vectorization `v[i + D*j] = rho[i, j]`.
pub fn vectorize(rho: &Array2<C64>) -> Array1<C64> {
    let d = rho.nrows();
    Array1::from_shape_fn(d * d, |n| rho[(n % d, n / d)])
}

/// Inverse of [`vectorize`].
pub fn devectorize(v: &Array1<C64>, d: usize) -> Array2<C64> {
    Array2::from_shape_fn((d, d), |(i, j)| v[i + d * j])
}

/// Matrix-free right-hand side of the master equation (used as an
/// independent oracle for the vectorized generator).
pub fn lindblad_rhs(
    h: &Operator,
    collapses: &[(f64, Operator)],
    rho: &Operator,
) -> Result<Operator> {
    let hr = h.mul(rho)?;
    let rh = rho.mul(h)?;
    let mut out = hr.sub(&rh)?.scale(c(0.0, -1.0));
    for (rate, l) in collapses {
        let m = l.dagger().mul(l)?;
        let anti = m.mul(rho)?.add(&rho.mul(&m)?)?;
        let sandwich = l.mul(rho)?.mul(&l.dagger())?;
        let term = anti.sub(&sandwich.scale(c(2.0, 0.0)))?;
        out = out.sub(&term.scale(c(*rate, 0.0)))?;
    }
    Ok(out)
}

/// Build the dense Liouville-space generator.
///
/// Errors if the Hamiltonian is not Hermitian (max defect > 1e-12), a rate is
/// negative, or operators live on mismatched bases.
pub fn build_generator(
    h: &Operator,
    collapses: &[(f64, Operator)],
) -> Result<LiouvilleGenerator> {
    let defect = h.hermiticity_defect();
    if defect > 1e-12 {
        return Err(AqecError::Structure(format!(
            "Hamiltonian not Hermitian (defect {defect:.3e})"
        )));
    }
    let d = h.dim();
    for (rate, l) in collapses {
        if *rate < 0.0 {
            return Err(AqecError::InvalidParameter(format!("negative rate {rate}")));
        }
        if l.basis != h.basis {
            return Err(AqecError::DimensionMismatch(
                "collapse operator basis differs from Hamiltonian basis".into(),
            ));
        }
    }

    let id: Array2<C64> = Array2::eye(d);
    let ht = h.matrix.t().to_owned();
    let mut gamma = (kron(&id, &h.matrix) - kron(&ht, &id)).mapv(|x| x * c(0.0, -1.0));
    for (rate, l) in collapses {
        let m = l.dagger().mul(l)?.matrix;
        let mt = m.t().to_owned();
        let lc = l.matrix.mapv(|x| x.conj());
        let term = kron(&id, &m) + kron(&mt, &id) - kron(&lc, &l.matrix).mapv(|x| x * 2.0);
        gamma = gamma - term.mapv(|x| x * *rate);
    }
    Ok(LiouvilleGenerator {
        basis: h.basis.clone(),
        hamiltonian: h.clone(),
        collapses: collapses.to_vec(),
        matrix: gamma,
    })
}

impl LiouvilleGenerator {
    /// Hilbert-space dimension `D` (the generator is `D^2 x D^2`).
    pub fn hilbert_dim(&self) -> usize {
        self.basis.dim()
    }

    /// Propagator `exp(Gamma t)`.
    pub fn propagator(&self, t: f64) -> Result<Array2<C64>> {
        expm(&self.matrix.mapv(|x| x * c(t, 0.0)))
    }

    /// Propagate an initial density matrix to each requested time.
    ///
    /// A uniform time grid is detected and served by one `exp(Gamma dt)`
    /// applied repeatedly; arbitrary grids fall back to one exponential per
    /// time point.
    pub fn propagate(&self, rho0: &Operator, times: &[f64]) -> Result<Vec<Operator>> {
        if rho0.basis != self.basis {
            return Err(AqecError::DimensionMismatch(
                "initial state basis differs from generator basis".into(),
            ));
        }
        let d = self.hilbert_dim();
        let v0 = vectorize(&rho0.matrix);
        let uniform_dt = uniform_step(times);
        let mut out = Vec::with_capacity(times.len());
        match uniform_dt {
            Some(dt) if times.len() > 2 => {
                let step = self.propagator(dt)?;
                let mut v = if times[0] == 0.0 {
                    v0
                } else {
                    self.propagator(times[0])?.dot(&v0)
                };
                out.push(Operator::new(self.basis.clone(), devectorize(&v, d))?);
                for _ in 1..times.len() {
                    v = step.dot(&v);
                    out.push(Operator::new(self.basis.clone(), devectorize(&v, d))?);
                }
            }
            _ => {
                for &t in times {
                    let v = self.propagator(t)?.dot(&v0);
                    out.push(Operator::new(self.basis.clone(), devectorize(&v, d))?);
                }
            }
        }
        Ok(out)
    }

    /// Full spectral decomposition with biorthogonal left/right eigensystems.
    ///
    /// Eigenvalues that coincide within `1e-8 * spectral_radius` are grouped
    /// into clusters and their left vectors re-mixed jointly (inverting the
    /// in-cluster overlap), so exact degeneracies — ubiquitous for these
    /// generators — do not by themselves degrade the decomposition. The flag
    /// reports `Degraded` only when the *measured* biorthogonality residual
    /// exceeds 1e-8 or an in-cluster overlap is numerically singular.
    pub fn spectral_decompose(&self) -> Result<SpectralDecomposition> {
        let n = self.matrix.nrows();
        let (lam_raw, r_raw) = eig_general(&self.matrix)?;
        let adjoint = self.matrix.t().mapv(|x| x.conj());
        let (mu_raw, w_raw) = eig_general(&adjoint)?;

        // Deterministic ordering: descending Re, then ascending Im.
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| {
            lam_raw[b]
                .re
                .total_cmp(&lam_raw[a].re)
                .then(lam_raw[a].im.total_cmp(&lam_raw[b].im))
        });
        let lam: Array1<C64> = Array1::from_iter(order.iter().map(|&k| lam_raw[k]));
        let mut right = Array2::zeros((n, n));
        for (col, &k) in order.iter().enumerate() {
            right.column_mut(col).assign(&r_raw.column(k));
        }

        let scale = lam.iter().map(|v| v.norm()).fold(0.0f64, f64::max);
        let tol_abs = 1e-8 * scale.max(f64::MIN_POSITIVE);

        // Greedy one-to-one pairing of adjoint eigenvectors: column k of W is
        // a left candidate for eigenvalue conj(mu_k).
        let mut used = vec![false; n];
        let mut w_for: Vec<usize> = Vec::with_capacity(n);
        let mut pairing_ok = true;
        for k in 0..n {
            let target = lam[k];
            let mut best = (usize::MAX, f64::INFINITY);
            for (j, &u) in used.iter().enumerate() {
                if u {
                    continue;
                }
                let d = (mu_raw[j].conj() - target).norm();
                if d < best.1 {
                    best = (j, d);
                }
            }
            if best.1 > 10.0 * tol_abs.max(1e-300) {
                pairing_ok = false;
            }
            used[best.0] = true;
            w_for.push(best.0);
        }

        // Cluster (union-find) eigenvalues within the absolute tolerance.
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if (lam[i] - lam[j]).norm() <= tol_abs {
                    let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                    if a != b {
                        parent[a] = b;
                    }
                }
            }
        }
        let mut cluster_map: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
        for i in 0..n {
            let root = find(&mut parent, i);
            cluster_map.entry(root).or_default().push(i);
        }
        let clusters: Vec<Vec<usize>> = cluster_map.into_values().collect();

        // Left rows: per cluster, set L_C = (W_C^dag R_C)^{-1} W_C^dag.
        let mut left = Array2::zeros((n, n));
        let mut inversion_ok = true;
        for cluster in &clusters {
            let k = cluster.len();
            let mut wdag = Array2::zeros((k, n));
            for (row, &idx) in cluster.iter().enumerate() {
                let wcol = w_raw.column(w_for[idx]);
                for j in 0..n {
                    wdag[(row, j)] = wcol[j].conj();
                }
            }
            let mut rc = Array2::zeros((n, k));
            for (col, &idx) in cluster.iter().enumerate() {
                rc.column_mut(col).assign(&right.column(idx));
            }
            let m = wdag.dot(&rc);
            match m.inv() {
                Ok(minv) => {
                    let lc = minv.dot(&wdag);
                    for (row, &idx) in cluster.iter().enumerate() {
                        left.row_mut(idx).assign(&lc.row(row));
                    }
                }
                Err(_) => {
                    inversion_ok = false;
                    // Fallback: diagonal normalization of each candidate row.
                    for (row, &idx) in cluster.iter().enumerate() {
                        let denom: C64 =
                            (0..n).map(|j| wdag[(row, j)] * right[(j, idx)]).sum();
                        let denom = if denom.norm() < 1e-300 { c(1.0, 0.0) } else { denom };
                        for j in 0..n {
                            left[(idx, j)] = wdag[(row, j)] / denom;
                        }
                    }
                }
            }
        }

        // Measured biorthogonality residual and reconstruction error.
        let gram = left.dot(&right);
        let eye: Array2<C64> = Array2::eye(n);
        let residual = max_norm(&(&gram - &eye));
        let mut recon = Array2::zeros((n, n));
        for k in 0..n {
            let rk = right.column(k);
            let lk = left.row(k);
            for i in 0..n {
                let f = lam[k] * rk[i];
                for j in 0..n {
                    recon[(i, j)] += f * lk[j];
                }
            }
        }
        let gnorm = fro_norm(&self.matrix).max(f64::MIN_POSITIVE);
        let reconstruction_error = fro_norm(&(&recon - &self.matrix)) / gnorm;

        let condition_flag = if residual <= 1e-8 && inversion_ok && pairing_ok {
            ConditionFlag::Good
        } else {
            ConditionFlag::Degraded
        };
        Ok(SpectralDecomposition {
            eigenvalues: lam,
            right,
            left,
            residual,
            reconstruction_error,
            clusters,
            condition_flag,
        })
    }

    /// Evolve through the spectral decomposition:
    /// `v(t) = sum_n e^{lambda_n t} r_n (l_n . v0)`.
    pub fn evolve_via_spectrum(
        &self,
        decomp: &SpectralDecomposition,
        rho0: &Operator,
        times: &[f64],
    ) -> Result<Vec<Operator>> {
        if rho0.basis != self.basis {
            return Err(AqecError::DimensionMismatch(
                "initial state basis differs from generator basis".into(),
            ));
        }
        let d = self.hilbert_dim();
        let n = d * d;
        let v0 = vectorize(&rho0.matrix);
        let coeffs = decomp.left.dot(&v0);
        let mut out = Vec::with_capacity(times.len());
        for &t in times {
            let weights: Array1<C64> = Array1::from_shape_fn(n, |k| {
                coeffs[k] * (decomp.eigenvalues[k] * c(t, 0.0)).exp()
            });
            let v = decomp.right.dot(&weights);
            out.push(Operator::new(self.basis.clone(), devectorize(&v, d))?);
        }
        Ok(out)
    }

    /// Stationary eigen-pairs and the slowest decay rate.
    ///
    /// `tol` is relative to the spectral radius: eigenvalues with
    /// `|lambda| <= tol * radius` count as stationary; the slowest decay rate
    /// is the smallest `|Re lambda|` among the remaining eigenvalues with
    /// `|Re lambda| > tol * radius`.
    pub fn stable_states(&self, decomp: &SpectralDecomposition, tol: f64) -> StableStates {
        let d = self.hilbert_dim();
        let radius = decomp.eigenvalues.iter().map(|v| v.norm()).fold(0.0f64, f64::max);
        let cut = tol * radius;
        let mut pairs = Vec::new();
        let mut slowest: Option<f64> = None;
        for (k, &lam) in decomp.eigenvalues.iter().enumerate() {
            if lam.norm() <= cut {
                let mat = devectorize(&decomp.right.column(k).to_owned(), d);
                pairs.push((lam, Operator { basis: self.basis.clone(), matrix: mat }));
            }
            if lam.re.abs() > cut {
                let rate = lam.re.abs();
                slowest = Some(match slowest {
                    Some(s) => s.min(rate),
                    None => rate,
                });
            }
        }
        StableStates { pairs, slowest_decay_rate: slowest }
    }
}

/// `Some(dt)` if `times` is a uniform grid (relative tolerance 1e-9).
fn uniform_step(times: &[f64]) -> Option<f64> {
    if times.len() < 2 {
        return None;
    }
    let dt = times[1] - times[0];
    if dt <= 0.0 {
        return None;
    }
    for k in 1..times.len() {
        let expect = times[0] + k as f64 * dt;
        if (times[k] - expect).abs() > 1e-9 * dt.max(times[k].abs()) {
            return None;
        }
    }
    Some(dt)
}
