//! Static repairability checkers.
//!
//! Five structural conditions separate models whose codeword coherence
//! survives the repair cycle from models that scramble it:
//!
//! * **KL** — the error set is correctable in principle:
//!   `<cw_a| E_m^dag E_n |cw_b> = C_mn delta_ab` with `C` independent of the
//!   codeword.
//! * **DFS** — codewords are stationary: eigenstates of `H` that every
//!   collapse operator annihilates.
//! * **FUNNEL_PARTITION** — the retained states split into one block per
//!   codeword (codeword plus funnel); `H` and the collapses never couple
//!   blocks, and each error sends each codeword into its own block.
//! * **DRAINAGE** — within each funnel every Hamiltonian eigenstate (and, in
//!   degenerate subspaces, every superposition) has support on a damped
//!   state, so amplitude cannot idle outside the codeword.
//! * **SYMMETRY** — the repair dynamics of all blocks are identical: an
//!   alignment of block `n` onto block 0 under which the Hamiltonian blocks
//!   differ by at most a uniform energy offset and the collapse blocks match
//!   exactly. Phase memory requires indistinguishable repair paths; this is
//!   the condition the deliberately broken variants violate.
//!
//! Each checker returns a [`ConditionReport`] with a verdict, the tolerance
//! used, human-readable witnesses for every violation, and a JSON details
//! blob with the measured magnitudes.

use ndarray::Array2;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{AqecError, Result};
use crate::models::AqecModel;
use crate::numerics::eig_hermitian;
use crate::ops::{c, Ket, Operator, C64};

/// Identifier of a repairability condition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ConditionId {
    Kl,
    Dfs,
    FunnelPartition,
    Drainage,
    Symmetry,
}

impl std::fmt::Display for ConditionId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            ConditionId::Kl => "KL",
            ConditionId::Dfs => "DFS",
            ConditionId::FunnelPartition => "FUNNEL_PARTITION",
            ConditionId::Drainage => "DRAINAGE",
            ConditionId::Symmetry => "SYMMETRY",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Pass,
    Fail,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
        })
    }
}

/// One concrete violation: what broke and how badly.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Witness {
    pub description: String,
    pub magnitude: f64,
}

/// Outcome of one condition check.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConditionReport {
    pub condition: ConditionId,
    pub verdict: Verdict,
    pub tolerance: f64,
    pub witnesses: Vec<Witness>,
    pub details: serde_json::Value,
}

impl ConditionReport {
    fn from_witnesses(
        condition: ConditionId,
        tolerance: f64,
        witnesses: Vec<Witness>,
        details: serde_json::Value,
    ) -> Self {
        let verdict = if witnesses.is_empty() { Verdict::Pass } else { Verdict::Fail };
        Self { condition, verdict, tolerance, witnesses, details }
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}

/// Default support threshold for [`check_drainage`].
pub const DRAINAGE_DEFAULT_TOL: f64 = 1e-10;

fn complex_json(v: C64) -> serde_json::Value {
    json!([v.re, v.im])
}

// ---------------------------------------------------------------------------
// KL
// ---------------------------------------------------------------------------

/// Correctability of an error set on a set of codewords:
/// `<cw_a| E_m^dag E_n |cw_b> = C_mn delta_ab`, same `C` for every codeword.
pub fn check_kl(codewords: &[Ket], errors: &[Operator], tol: f64) -> Result<ConditionReport> {
    if codewords.is_empty() || errors.is_empty() {
        return Err(AqecError::InvalidParameter(
            "KL check needs at least one codeword and one error".into(),
        ));
    }
    let n_cw = codewords.len();
    let n_err = errors.len();
    let images: Vec<Vec<Ket>> = errors
        .iter()
        .map(|e| codewords.iter().map(|cw| e.apply(cw)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;

    let mut witnesses = Vec::new();
    let mut c_ref: Array2<C64> = Array2::zeros((n_err, n_err));
    let mut max_offdiag = 0.0f64;
    let mut max_mismatch = 0.0f64;
    for m in 0..n_err {
        for n in 0..n_err {
            // element for codeword pair (a, b): <E_m cw_a | E_n cw_b>
            for a in 0..n_cw {
                for b in 0..n_cw {
                    let v = images[m][a].dot(&images[n][b])?;
                    if a == b {
                        if a == 0 {
                            c_ref[(m, n)] = v;
                        } else {
                            let dev = (v - c_ref[(m, n)]).norm();
                            max_mismatch = max_mismatch.max(dev);
                            if dev > tol {
                                witnesses.push(Witness {
                                    description: format!(
                                        "C_{m}{n} differs between codeword 0 and codeword {a}"
                                    ),
                                    magnitude: dev,
                                });
                            }
                        }
                    } else {
                        let mag = v.norm();
                        max_offdiag = max_offdiag.max(mag);
                        if mag > tol {
                            witnesses.push(Witness {
                                description: format!(
                                    "<cw_{a}| E_{m}^dag E_{n} |cw_{b}> is nonzero"
                                ),
                                magnitude: mag,
                            });
                        }
                    }
                }
            }
        }
    }
    let c_json: Vec<Vec<serde_json::Value>> = (0..n_err)
        .map(|m| (0..n_err).map(|n| complex_json(c_ref[(m, n)])).collect())
        .collect();
    let details = json!({
        "c_matrix": c_json,
        "max_cross_codeword_element": max_offdiag,
        "max_diagonal_mismatch": max_mismatch,
    });
    Ok(ConditionReport::from_witnesses(ConditionId::Kl, tol, witnesses, details))
}

// ---------------------------------------------------------------------------
// DFS
// ---------------------------------------------------------------------------

/// Codeword stationarity: each codeword is an eigenstate of `H` and is
/// annihilated by every active collapse operator.
pub fn check_dfs(model: &AqecModel, tol: f64) -> Result<ConditionReport> {
    let mut witnesses = Vec::new();
    let mut max_h_residual = 0.0f64;
    let mut max_l_norm = 0.0f64;
    for (n, cw) in model.codewords.iter().enumerate() {
        let h_cw = model.hamiltonian.apply(cw)?;
        let energy = cw.dot(&h_cw)?;
        let residual = (&h_cw.amps - &cw.amps.mapv(|x| x * energy))
            .iter()
            .map(|v| v.norm_sqr())
            .sum::<f64>()
            .sqrt();
        max_h_residual = max_h_residual.max(residual);
        if residual > tol {
            witnesses.push(Witness {
                description: format!("codeword {n} is not an eigenstate of H"),
                magnitude: residual,
            });
        }
        for (k, (rate, l)) in model.collapse_terms.iter().enumerate() {
            if *rate == 0.0 {
                continue;
            }
            let norm = l.apply(cw)?.norm();
            max_l_norm = max_l_norm.max(norm);
            if norm > tol {
                witnesses.push(Witness {
                    description: format!("collapse {k} does not annihilate codeword {n}"),
                    magnitude: norm,
                });
            }
        }
    }
    let details = json!({
        "max_eigenstate_residual": max_h_residual,
        "max_collapse_image_norm": max_l_norm,
    });
    Ok(ConditionReport::from_witnesses(ConditionId::Dfs, tol, witnesses, details))
}

// ---------------------------------------------------------------------------
// FUNNEL_PARTITION
// ---------------------------------------------------------------------------

/// Positions of block `n`: codeword first, then its funnel labels in listed
/// order.
fn block_positions(model: &AqecModel) -> Result<Vec<Vec<usize>>> {
    let mut blocks = Vec::with_capacity(model.codewords.len());
    for (n, cw) in model.codewords.iter().enumerate() {
        let mut cw_pos = None;
        for (i, a) in cw.amps.iter().enumerate() {
            if a.norm() > 1e-12 {
                if cw_pos.is_some() {
                    return Err(AqecError::Structure(format!(
                        "codeword {n} is not a single basis state; blocks are label-based"
                    )));
                }
                cw_pos = Some(i);
            }
        }
        let cw_pos = cw_pos
            .ok_or_else(|| AqecError::Structure(format!("codeword {n} is the zero vector")))?;
        let mut block = vec![cw_pos];
        for label in &model.funnel_of[n] {
            block.push(model.basis.position_of_label(label)?);
        }
        blocks.push(block);
    }
    Ok(blocks)
}

/// Block structure: `H` and every collapse are block-diagonal over
/// codeword-plus-funnel blocks, the blocks partition the retained basis, and
/// each error maps each codeword into the codeword's own block.
pub fn check_funnel_partition(model: &AqecModel, tol: f64) -> Result<ConditionReport> {
    let d = model.basis.dim();
    let blocks = block_positions(model)?;
    let mut witnesses = Vec::new();

    // membership map; usize::MAX = unassigned
    let mut member = vec![usize::MAX; d];
    for (n, block) in blocks.iter().enumerate() {
        for &p in block {
            if member[p] != usize::MAX {
                witnesses.push(Witness {
                    description: format!(
                        "state {} belongs to blocks {} and {n}",
                        model.basis.label(p),
                        member[p]
                    ),
                    magnitude: 1.0,
                });
            }
            member[p] = n;
        }
    }
    for (p, &m) in member.iter().enumerate() {
        if m == usize::MAX {
            witnesses.push(Witness {
                description: format!(
                    "state {} is not assigned to any block",
                    model.basis.label(p)
                ),
                magnitude: 1.0,
            });
        }
    }

    let mut max_h = 0.0f64;
    let mut max_l = 0.0f64;
    let mut max_err = 0.0f64;
    for i in 0..d {
        for j in 0..d {
            if member[i] == member[j] || member[i] == usize::MAX || member[j] == usize::MAX {
                continue;
            }
            let h_el = model.hamiltonian.matrix[(i, j)].norm();
            max_h = max_h.max(h_el);
            if h_el > tol {
                witnesses.push(Witness {
                    description: format!(
                        "H couples {} (block {}) to {} (block {})",
                        model.basis.label(i),
                        member[i],
                        model.basis.label(j),
                        member[j]
                    ),
                    magnitude: h_el,
                });
            }
            for (k, (rate, l)) in model.collapse_terms.iter().enumerate() {
                if *rate == 0.0 {
                    continue;
                }
                let l_el = l.matrix[(i, j)].norm();
                max_l = max_l.max(l_el);
                if l_el > tol {
                    witnesses.push(Witness {
                        description: format!(
                            "collapse {k} couples {} (block {}) to {} (block {})",
                            model.basis.label(i),
                            member[i],
                            model.basis.label(j),
                            member[j]
                        ),
                        magnitude: l_el,
                    });
                }
            }
        }
    }

    for (k, e) in model.error_set.iter().enumerate() {
        for (n, cw) in model.codewords.iter().enumerate() {
            let image = e.apply(cw)?;
            for (i, a) in image.amps.iter().enumerate() {
                if member[i] == n {
                    continue;
                }
                let mag = a.norm();
                max_err = max_err.max(mag);
                if mag > tol {
                    witnesses.push(Witness {
                        description: format!(
                            "error {} maps codeword {n} onto {} outside block {n}",
                            k + 1,
                            model.basis.label(i)
                        ),
                        magnitude: mag,
                    });
                }
            }
        }
    }

    let details = json!({
        "n_blocks": blocks.len(),
        "max_cross_block_h": max_h,
        "max_cross_block_collapse": max_l,
        "max_error_leakage": max_err,
    });
    Ok(ConditionReport::from_witnesses(ConditionId::FunnelPartition, tol, witnesses, details))
}

// ---------------------------------------------------------------------------
// DRAINAGE
// ---------------------------------------------------------------------------

/// No idle funnel states: every eigenstate of `H` restricted to a funnel —
/// and, within a degenerate eigenspace, every superposition — keeps support
/// of at least `tol` on damped ("source") states, so it feeds a collapse.
///
/// Source states are the basis states `s` with `(L^dag L)_ss > 1/2` for some
/// active channel. Degenerate clusters are handled via the smallest
/// eigenvalue of the source-row Gram matrix, which equals the minimum source
/// support over unit vectors of the eigenspace.
pub fn check_drainage(model: &AqecModel, tol: f64) -> Result<ConditionReport> {
    let d = model.basis.dim();
    // damped-state indicator
    let mut is_source = vec![false; d];
    for (rate, l) in &model.collapse_terms {
        if *rate == 0.0 {
            continue;
        }
        for (s, flag) in is_source.iter_mut().enumerate() {
            let weight: f64 = (0..d).map(|i| l.matrix[(i, s)].norm_sqr()).sum();
            if weight > 0.5 {
                *flag = true;
            }
        }
    }

    let mut witnesses = Vec::new();
    let mut per_funnel = Vec::new();
    let mut min_support_global = f64::INFINITY;
    for (n, funnel) in model.funnel_of.iter().enumerate() {
        if funnel.is_empty() {
            per_funnel.push(json!({"funnel": n, "states": 0}));
            continue;
        }
        let positions = funnel
            .iter()
            .map(|l| model.basis.position_of_label(l))
            .collect::<Result<Vec<_>>>()?;
        let nf = positions.len();
        let sources: Vec<usize> = (0..nf).filter(|&i| is_source[positions[i]]).collect();
        let h_f = Array2::from_shape_fn((nf, nf), |(i, j)| {
            model.hamiltonian.matrix[(positions[i], positions[j])]
        });
        let (vals, vecs) = eig_hermitian(&h_f)?;
        // cluster near-degenerate eigenvalues (ascending order from zheev)
        let span = (vals[nf - 1] - vals[0]).abs().max(1.0);
        let atol = 1e-8 * span;
        let mut start = 0;
        let mut min_support = f64::INFINITY;
        while start < nf {
            let mut end = start + 1;
            while end < nf && (vals[end] - vals[end - 1]).abs() <= atol {
                end += 1;
            }
            let k = end - start;
            // Gram matrix of the source rows of this cluster's eigenvectors
            let mut gram: Array2<C64> = Array2::zeros((k, k));
            for a in 0..k {
                for b in 0..k {
                    let mut g = c(0.0, 0.0);
                    for &s in &sources {
                        g += vecs[(s, start + a)].conj() * vecs[(s, start + b)];
                    }
                    gram[(a, b)] = g;
                }
            }
            let support = if sources.is_empty() {
                0.0
            } else {
                let (gvals, _) = eig_hermitian(&gram)?;
                gvals[0].max(0.0)
            };
            min_support = min_support.min(support);
            if support <= tol {
                witnesses.push(Witness {
                    description: format!(
                        "funnel {n} eigenspace at energy {:.6} (multiplicity {k}) has no damped-state support",
                        vals[start]
                    ),
                    magnitude: support,
                });
            }
            start = end;
        }
        min_support_global = min_support_global.min(min_support);
        per_funnel.push(json!({
            "funnel": n,
            "states": nf,
            "sources": sources.len(),
            "min_source_support": min_support,
        }));
    }
    let details = json!({
        "per_funnel": per_funnel,
        "min_source_support": if min_support_global.is_finite() { min_support_global } else { 1.0 },
    });
    Ok(ConditionReport::from_witnesses(ConditionId::Drainage, tol, witnesses, details))
}

// ---------------------------------------------------------------------------
// SYMMETRY
// ---------------------------------------------------------------------------

struct AlignmentFit {
    offset: f64,
    h_deviation: f64,
    l_deviation: f64,
    worst: Option<(usize, usize)>,
}

/// Deviation of block `pn` from block `p0` under position-wise alignment:
/// the Hamiltonian blocks may differ by a uniform diagonal offset, the
/// collapse blocks must match exactly.
fn alignment_fit(model: &AqecModel, p0: &[usize], pn: &[usize]) -> AlignmentFit {
    let k = p0.len();
    let h = &model.hamiltonian.matrix;
    let mut offset = c(0.0, 0.0);
    for i in 0..k {
        offset += h[(pn[i], pn[i])] - h[(p0[i], p0[i])];
    }
    offset /= k as f64;
    let mut h_dev = 0.0f64;
    let mut worst = None;
    for i in 0..k {
        for j in 0..k {
            let expected = if i == j { offset } else { c(0.0, 0.0) };
            let dev = (h[(pn[i], pn[j])] - h[(p0[i], p0[j])] - expected).norm();
            if dev > h_dev {
                h_dev = dev;
                worst = Some((i, j));
            }
        }
    }
    let mut l_dev = 0.0f64;
    for (rate, l) in &model.collapse_terms {
        if *rate == 0.0 {
            continue;
        }
        for i in 0..k {
            for j in 0..k {
                let dev = (l.matrix[(pn[i], pn[j])] - l.matrix[(p0[i], p0[j])]).norm();
                if dev > l_dev {
                    l_dev = dev;
                    if dev > h_dev {
                        worst = Some((i, j));
                    }
                }
            }
        }
    }
    AlignmentFit { offset: offset.re, h_deviation: h_dev, l_deviation: l_dev, worst }
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for rest in permutations(n - 1) {
        for slot in 0..=rest.len() {
            let mut p = rest.clone();
            p.insert(slot, n - 1);
            out.push(p);
        }
    }
    out
}

/// Largest funnel for which [`check_symmetry`] searches re-orderings when
/// the listed alignment fails.
pub const SYMMETRY_PERMUTATION_LIMIT: usize = 6;

/// Equivalence of the repair dynamics across codeword blocks.
///
/// Block `n` must map onto block 0 (codeword to codeword, funnel states
/// pairwise) so that the Hamiltonian blocks agree up to one uniform energy
/// offset and the collapse blocks agree exactly. The listed funnel order is
/// tried first; if it fails and the funnel has at most
/// [`SYMMETRY_PERMUTATION_LIMIT`] states, all re-orderings are searched.
/// Models with fewer than two codewords pass vacuously.
pub fn check_symmetry(model: &AqecModel, tol: f64) -> Result<ConditionReport> {
    if model.codewords.len() < 2 {
        let details = json!({
            "note": "fewer than two codewords; nothing to compare",
            "pairs": [],
        });
        return Ok(ConditionReport::from_witnesses(ConditionId::Symmetry, tol, vec![], details));
    }
    let blocks = block_positions(model)?;
    let mut witnesses = Vec::new();
    let mut pairs = Vec::new();
    for n in 1..blocks.len() {
        let p0 = &blocks[0];
        let pn = &blocks[n];
        if p0.len() != pn.len() {
            witnesses.push(Witness {
                description: format!(
                    "block {n} has {} states but block 0 has {}",
                    pn.len(),
                    p0.len()
                ),
                magnitude: (pn.len() as f64 - p0.len() as f64).abs(),
            });
            pairs.push(json!({"codeword": n, "aligned": false}));
            continue;
        }
        let listed = alignment_fit(model, p0, pn);
        let mut fit = listed;
        let mut used_perm: Option<Vec<usize>> = None;
        if (fit.h_deviation > tol || fit.l_deviation > tol)
            && pn.len() >= 2
            && pn.len() - 1 <= SYMMETRY_PERMUTATION_LIMIT
        {
            for perm in permutations(pn.len() - 1) {
                let mut candidate = vec![pn[0]];
                candidate.extend(perm.iter().map(|&i| pn[1 + i]));
                let trial = alignment_fit(model, p0, &candidate);
                if trial.h_deviation <= tol && trial.l_deviation <= tol {
                    fit = trial;
                    used_perm = Some(perm);
                    break;
                }
            }
        }
        if fit.h_deviation > tol || fit.l_deviation > tol {
            if fit.h_deviation > tol {
                let place = fit
                    .worst
                    .map(|(i, j)| {
                        format!(
                            " (worst at {} / {})",
                            model.basis.label(p0[i]),
                            model.basis.label(p0[j])
                        )
                    })
                    .unwrap_or_default();
                witnesses.push(Witness {
                    description: format!(
                        "Hamiltonian of block {n} deviates from block 0 beyond a uniform offset{place}"
                    ),
                    magnitude: fit.h_deviation,
                });
            }
            if fit.l_deviation > tol {
                witnesses.push(Witness {
                    description: format!("collapse blocks of block {n} and block 0 differ"),
                    magnitude: fit.l_deviation,
                });
            }
        }
        pairs.push(json!({
            "codeword": n,
            "energy_offset": fit.offset,
            "h_deviation": fit.h_deviation,
            "collapse_deviation": fit.l_deviation,
            "funnel_reordered": used_perm,
        }));
    }
    let details = json!({ "pairs": pairs });
    Ok(ConditionReport::from_witnesses(ConditionId::Symmetry, tol, witnesses, details))
}

// ---------------------------------------------------------------------------
// Aggregate
// ---------------------------------------------------------------------------

/// Run every checker on a model. `tol` is the matrix-element tolerance for
/// KL / DFS / FUNNEL_PARTITION / SYMMETRY; DRAINAGE uses its own support
/// threshold [`DRAINAGE_DEFAULT_TOL`]. The KL check covers the identity (the
/// no-error branch) alongside the model's error set.
pub fn check_all(model: &AqecModel, tol: f64) -> Result<Vec<ConditionReport>> {
    let mut errors = vec![Operator::identity(model.basis.clone())];
    errors.extend(model.error_set.iter().cloned());
    Ok(vec![
        check_kl(&model.codewords, &errors, tol)?,
        check_dfs(model, tol)?,
        check_funnel_partition(model, tol)?,
        check_drainage(model, DRAINAGE_DEFAULT_TOL)?,
        check_symmetry(model, tol)?,
    ])
}
