//! Physical realization study: three dipolar-coupled spins as the codeword
//! register, read out and repaired through a rectangular microwave cavity.
//!
//! All frequencies are measured in units of the nearest-neighbour dipolar
//! coupling `zeta`; cavity box lengths are in the matching length unit, so a
//! mode's frequency is `sqrt((m/a)^2 + (n/b)^2 + (p/d)^2)` in the same scale.
//!
//! The spin Hamiltonian is
//!
//! ```text
//! H = sum_{n<m} D_nm (Ix Ix + Iy Iy - 2 Iz Iz) + J_nm (Ix Ix + Iy Iy + Iz Iz)
//! ```
//!
//! with `D12 = D23 = zeta`, `D13 = zeta / 8` (the 1/r^3 falloff of a linear
//! chain at double distance), and a single exchange coupling `J23`. Total
//! `I_z` is conserved, so the diagram splits into m_z blocks: the stretched
//! states `|000>` and `|111>` are the codewords, and the one-flip blocks hold
//! the funnels, labeled `A, B, C` (m_z = -1/2) and `D, E, F` (m_z = +1/2) in
//! ascending energy. The global spin flip commutes with `H`, so the two
//! funnels are exactly degenerate and every dipole line is a symmetric pair.
//!
//! Repair needs every funnel level to reach its codeword radiatively: the
//! three "starred" codeword lines must all be bright. At `J23 = 0` the middle
//! funnel level decouples from the codeword (a dark state), which is the
//! feasibility boundary probed by [`aqec_feasibility`] and
//! [`feasibility_sweep`].

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::conditions::{ConditionId, ConditionReport, Verdict, Witness};
use crate::error::{AqecError, Result};
use crate::numerics::eig_hermitian;
use crate::ops::{c, single_site_op, Basis, HilbertSpace, Ket, Operator, SpinComponent, C64};

/// Second radiation constant `h c / k_B` in cm K.
pub const SECOND_RADIATION_CM_K: f64 = 1.438777;

/// Coupling constants of the three-spin chain, in units of `zeta`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SpinSystem {
    pub d12: f64,
    pub d23: f64,
    pub d13: f64,
    pub j23: f64,
}

impl Default for SpinSystem {
    fn default() -> Self {
        Self { d12: 1.0, d23: 1.0, d13: 0.125, j23: 0.2 }
    }
}

impl SpinSystem {
    /// Default chain with the exchange coupling overridden.
    pub fn with_j23(j23: f64) -> Self {
        Self { j23, ..Self::default() }
    }
}

/// The three-spin Hamiltonian on the full 8-state product basis.
pub fn spin_hamiltonian(sys: &SpinSystem) -> Result<Operator> {
    let space = HilbertSpace::qubits(3, 0);
    let pairs: [(usize, usize, f64, f64); 3] = [
        (0, 1, sys.d12, 0.0),
        (1, 2, sys.d23, sys.j23),
        (0, 2, sys.d13, 0.0),
    ];
    let mut h = Operator::zeros(Basis::full(space.clone()));
    for (n, m, d, j) in pairs {
        for (kind, weight) in [
            (SpinComponent::X, d + j),
            (SpinComponent::Y, d + j),
            (SpinComponent::Z, -2.0 * d + j),
        ] {
            if weight == 0.0 {
                continue;
            }
            let term = crate::ops::embed_product(&space, &[(n, kind), (m, kind)])?;
            h = h.add(&term.scale(c(weight, 0.0)))?;
        }
    }
    Ok(h)
}

/// One eigenlevel of the spin chain.
#[derive(Debug, Clone)]
pub struct SpinLevel {
    /// `000` / `111` for the codewords, `A..C` and `D..F` for the funnels in
    /// ascending energy.
    pub label: String,
    pub m_z: f64,
    pub energy_zeta: f64,
    pub state: Ket,
}

fn mz_of_index(space: &HilbertSpace, idx: usize) -> f64 {
    space
        .bits_of_index(idx)
        .iter()
        .map(|&b| if b == 1 { 0.5 } else { -0.5 })
        .sum()
}

/// Eigenlevels grouped and labeled per m_z block, sorted by energy (ties by
/// m_z). Diagonalization happens inside each block, so the exact cross-block
/// degeneracies of the flip symmetry cannot smear the labels.
pub fn level_diagram(sys: &SpinSystem) -> Result<Vec<SpinLevel>> {
    let h = spin_hamiltonian(sys)?;
    let basis = h.basis.clone();
    let space = basis.space().clone();
    let d = basis.dim();
    let mut levels: Vec<SpinLevel> = Vec::with_capacity(d);
    for (two_mz, block_labels) in
        [(-3i32, vec!["000"]), (-1, vec!["A", "B", "C"]), (1, vec!["D", "E", "F"]), (3, vec!["111"])]
    {
        let m_z = two_mz as f64 / 2.0;
        let members: Vec<usize> =
            (0..d).filter(|&i| (mz_of_index(&space, i) - m_z).abs() < 1e-9).collect();
        let nb = members.len();
        if nb != block_labels.len() {
            return Err(AqecError::Structure(format!(
                "m_z = {m_z} block has {nb} states, expected {}",
                block_labels.len()
            )));
        }
        let hb = ndarray::Array2::from_shape_fn((nb, nb), |(i, j)| {
            h.matrix[(members[i], members[j])]
        });
        let (vals, vecs) = eig_hermitian(&hb)?;
        for (k, label) in block_labels.iter().enumerate() {
            let mut amps = ndarray::Array1::<C64>::zeros(d);
            for (row, &full) in members.iter().enumerate() {
                amps[full] = vecs[(row, k)];
            }
            levels.push(SpinLevel {
                label: label.to_string(),
                m_z,
                energy_zeta: vals[k],
                state: Ket::new(basis.clone(), amps)?,
            });
        }
    }
    levels.sort_by(|a, b| {
        a.energy_zeta
            .total_cmp(&b.energy_zeta)
            .then(a.m_z.total_cmp(&b.m_z))
    });
    Ok(levels)
}

/// Transverse drive polarization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarization {
    X,
    Y,
}

impl std::fmt::Display for Polarization {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Polarization::X => "x",
            Polarization::Y => "y",
        })
    }
}

/// One dipole-allowed absorption line (degenerate flip partners merged).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TransitionLine {
    pub freq_zeta: f64,
    /// Squared dipole matrix element per transition. The flip symmetry makes
    /// merged partners equal, so the line reports their mean.
    pub strength: f64,
    pub polarization: Polarization,
    /// `+`-joined initial level labels, e.g. `"000+111"`.
    pub from: String,
    /// `+`-joined final level labels, index-aligned with `from`.
    pub to: String,
    /// True when the line connects a funnel to a codeword — the lines the
    /// cavity must support.
    pub starred: bool,
    /// Number of merged degenerate transitions.
    pub multiplicity: usize,
}

/// Dipole absorption spectrum of the chain for the given polarization.
///
/// Lines at non-positive frequency and transitions with strength below
/// `1e-12` are dropped; transitions closer in frequency than a relative
/// `1e-9` are merged into one line.
pub fn dipole_spectrum(sys: &SpinSystem, polarization: Polarization) -> Result<Vec<TransitionLine>> {
    let levels = level_diagram(sys)?;
    let space = levels[0].state.basis.space().clone();
    let kind = match polarization {
        Polarization::X => SpinComponent::X,
        Polarization::Y => SpinComponent::Y,
    };
    let mut dipole = Operator::zeros(levels[0].state.basis.clone());
    for site in 0..3 {
        dipole = dipole.add(&single_site_op(&space, site, kind)?)?;
    }

    struct Transition {
        freq: f64,
        strength: f64,
        from: String,
        to: String,
        starred: bool,
    }
    let mut transitions = Vec::new();
    for i in &levels {
        for f in &levels {
            let freq = f.energy_zeta - i.energy_zeta;
            if freq <= 1e-12 {
                continue;
            }
            let el = f.state.dot(&dipole.apply(&i.state)?)?;
            let strength = el.norm_sqr();
            if strength < 1e-12 {
                continue;
            }
            let starred = matches!(i.label.as_str(), "000" | "111")
                || matches!(f.label.as_str(), "000" | "111");
            transitions.push(Transition {
                freq,
                strength,
                from: i.label.clone(),
                to: f.label.clone(),
                starred,
            });
        }
    }
    transitions.sort_by(|a, b| a.freq.total_cmp(&b.freq));

    let mut lines: Vec<TransitionLine> = Vec::new();
    let mut group: Vec<Transition> = Vec::new();
    let flush = |group: &mut Vec<Transition>, lines: &mut Vec<TransitionLine>| {
        if group.is_empty() {
            return;
        }
        // deterministic partner order regardless of floating-point ties
        group.sort_by(|a, b| a.from.cmp(&b.from).then_with(|| a.to.cmp(&b.to)));
        let k = group.len() as f64;
        lines.push(TransitionLine {
            freq_zeta: group.iter().map(|t| t.freq).sum::<f64>() / k,
            strength: group.iter().map(|t| t.strength).sum::<f64>() / k,
            polarization,
            from: group.iter().map(|t| t.from.as_str()).collect::<Vec<_>>().join("+"),
            to: group.iter().map(|t| t.to.as_str()).collect::<Vec<_>>().join("+"),
            starred: group.iter().any(|t| t.starred),
            multiplicity: group.len(),
        });
        group.clear();
    };
    for t in transitions {
        if let Some(last) = group.last() {
            if (t.freq - last.freq).abs() > 1e-9 * t.freq.abs().max(1.0) {
                flush(&mut group, &mut lines);
            }
        }
        group.push(t);
    }
    flush(&mut group, &mut lines);
    Ok(lines)
}

/// Radiative repairability of the chain: every funnel level must carry a
/// bright dipole line to its codeword (strength above `tol`), and the
/// funnel→codeword lines must be separable in frequency from the
/// funnel↔funnel lines so a resonator can cool the former without touching
/// the latter. Reported under [`ConditionId::Drainage`] — a dark funnel
/// level is exactly a state that cannot drain, and an overlapping line pair
/// means draining it would also drive an unwanted transition.
pub fn aqec_feasibility(sys: &SpinSystem, tol: f64) -> Result<ConditionReport> {
    let levels = level_diagram(sys)?;
    let space = levels[0].state.basis.space().clone();
    let mut dipole = Operator::zeros(levels[0].state.basis.clone());
    for site in 0..3 {
        dipole = dipole.add(&single_site_op(&space, site, SpinComponent::X)?)?;
    }
    let find = |label: &str| levels.iter().find(|l| l.label == label).unwrap();
    let mut witnesses = Vec::new();
    let mut strengths = Vec::new();
    for (cw_label, funnel_labels) in [("000", ["A", "B", "C"]), ("111", ["D", "E", "F"])] {
        let cw = find(cw_label);
        for label in funnel_labels {
            let level = find(label);
            let s = level.state.dot(&dipole.apply(&cw.state)?)?.norm_sqr();
            if cw_label == "000" {
                strengths.push(s);
            }
            if s <= tol {
                witnesses.push(Witness {
                    description: format!(
                        "funnel level {label} has no dipole path to codeword {cw_label} (dark state)"
                    ),
                    magnitude: s,
                });
            }
        }
    }
    let spectrum = dipole_spectrum(sys, Polarization::X)?;
    let mut min_gap: Option<(f64, &TransitionLine, &TransitionLine)> = None;
    for starred in spectrum.iter().filter(|l| l.starred) {
        for unstarred in spectrum.iter().filter(|l| !l.starred) {
            let gap = (starred.freq_zeta - unstarred.freq_zeta).abs();
            if min_gap.is_none_or(|(g, _, _)| gap < g) {
                min_gap = Some((gap, starred, unstarred));
            }
        }
    }
    if let Some((gap, starred, unstarred)) = min_gap {
        if gap <= tol {
            witnesses.push(Witness {
                description: format!(
                    "cooling line {}->{} overlaps funnel line {}->{}; no filter separates them",
                    starred.from, starred.to, unstarred.from, unstarred.to
                ),
                magnitude: gap,
            });
        }
    }
    let details = json!({
        "j23": sys.j23,
        "starred_strengths": strengths,
        "min_starred_unstarred_gap": min_gap.map(|(g, _, _)| g),
    });
    Ok(ConditionReport {
        condition: ConditionId::Drainage,
        verdict: if witnesses.is_empty() { Verdict::Pass } else { Verdict::Fail },
        tolerance: tol,
        witnesses,
        details,
    })
}

/// One point of a [`feasibility_sweep`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FeasibilityPoint {
    pub j23: f64,
    /// Codeword-to-funnel strengths for levels `A`, `B`, `C`.
    pub starred_strengths: Vec<f64>,
    /// Closest approach between a cooling line and a funnel↔funnel line.
    pub min_starred_unstarred_gap: Option<f64>,
    pub feasible: bool,
}

/// Feasibility of the default chain across exchange couplings.
pub fn feasibility_sweep(j_values: &[f64], tol: f64) -> Result<Vec<FeasibilityPoint>> {
    j_values
        .iter()
        .map(|&j| {
            let report = aqec_feasibility(&SpinSystem::with_j23(j), tol)?;
            let strengths = report.details["starred_strengths"]
                .as_array()
                .unwrap()
                .iter()
                .map(|v| v.as_f64().unwrap())
                .collect();
            Ok(FeasibilityPoint {
                j23: j,
                starred_strengths: strengths,
                min_starred_unstarred_gap: report.details["min_starred_unstarred_gap"].as_f64(),
                feasible: report.passed(),
            })
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Rectangular cavity
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModeFamily {
    Te,
    Tm,
}

impl std::fmt::Display for ModeFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ModeFamily::Te => "TE",
            ModeFamily::Tm => "TM",
        })
    }
}

/// Magnetic field component at the cavity center (exactly one survives the
/// standing-wave parities, or none).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CenterField {
    Bx,
    By,
    Bz,
    None,
}

impl std::fmt::Display for CenterField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            CenterField::Bx => "Bx",
            CenterField::By => "By",
            CenterField::Bz => "Bz",
            CenterField::None => "none",
        })
    }
}

impl CenterField {
    /// Transverse magnetic field — the components that drive `|Delta m_z| = 1`
    /// spin transitions.
    pub fn is_transverse(self) -> bool {
        matches!(self, CenterField::Bx | CenterField::By)
    }
}

/// One resonator mode of an `a x b x d` rectangular cavity.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CavityMode {
    pub family: ModeFamily,
    pub m: usize,
    pub n: usize,
    pub p: usize,
    pub freq_zeta: f64,
    pub center_field: CenterField,
}

impl CavityMode {
    /// Conventional name, e.g. `TE102`.
    pub fn name(&self) -> String {
        format!("{}{}{}{}", self.family, self.m, self.n, self.p)
    }
}

fn center_field_of(family: ModeFamily, m: usize, n: usize, p: usize) -> CenterField {
    let (me, ne, pe) = (m.is_multiple_of(2), n.is_multiple_of(2), p.is_multiple_of(2));
    match family {
        // H_z ~ cos cos sin; H_x ~ k_x k_z sin cos cos; H_y ~ k_y k_z cos sin cos
        ModeFamily::Te => {
            if !me && ne && pe {
                CenterField::Bx
            } else if me && !ne && pe {
                CenterField::By
            } else if me && ne && !pe {
                CenterField::Bz
            } else {
                CenterField::None
            }
        }
        // H_z = 0; H_x ~ k_y sin cos cos; H_y ~ k_x cos sin cos
        ModeFamily::Tm => {
            if !me && ne && pe {
                CenterField::Bx
            } else if me && !ne && pe {
                CenterField::By
            } else {
                CenterField::None
            }
        }
    }
}

/// All TE and TM modes of an `a x b x d` box up to `omega_max`, sorted by
/// frequency. TE modes need `p >= 1` and `(m, n) != (0, 0)`; TM modes need
/// `m, n >= 1` with any `p >= 0`.
pub fn cavity_modes(a: f64, b: f64, d: f64, omega_max: f64) -> Result<Vec<CavityMode>> {
    for (name, v) in [("a", a), ("b", b), ("d", d), ("omega_max", omega_max)] {
        if v.is_nan() || v <= 0.0 {
            return Err(AqecError::InvalidParameter(format!("{name} = {v} must be > 0")));
        }
    }
    let freq = |m: usize, n: usize, p: usize| {
        ((m as f64 / a).powi(2) + (n as f64 / b).powi(2) + (p as f64 / d).powi(2)).sqrt()
    };
    let m_max = (omega_max * a).ceil() as usize;
    let n_max = (omega_max * b).ceil() as usize;
    let p_max = (omega_max * d).ceil() as usize;
    let mut modes = Vec::new();
    for m in 0..=m_max {
        for n in 0..=n_max {
            for p in 0..=p_max {
                let w = freq(m, n, p);
                if w > omega_max {
                    continue;
                }
                if (m + n > 0) && p > 0 {
                    modes.push(CavityMode {
                        family: ModeFamily::Te,
                        m,
                        n,
                        p,
                        freq_zeta: w,
                        center_field: center_field_of(ModeFamily::Te, m, n, p),
                    });
                }
                if m > 0 && n > 0 {
                    modes.push(CavityMode {
                        family: ModeFamily::Tm,
                        m,
                        n,
                        p,
                        freq_zeta: w,
                        center_field: center_field_of(ModeFamily::Tm, m, n, p),
                    });
                }
            }
        }
    }
    modes.sort_by(|x, y| {
        x.freq_zeta
            .total_cmp(&y.freq_zeta)
            .then_with(|| x.name().cmp(&y.name()))
    });
    Ok(modes)
}

/// A starred line and the cavity mode that serves it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StarredMatch {
    pub line: TransitionLine,
    /// Closest transverse-B mode; `None` when the cavity has none in range.
    pub mode: Option<CavityMode>,
    pub offset: f64,
    pub matched: bool,
}

/// An unstarred line and the mode it must be kept away from.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpuriousGuard {
    pub line: TransitionLine,
    pub nearest: Option<CavityMode>,
    pub offset: f64,
    /// `line frequency / offset`: the loaded Q above which the line falls
    /// outside the mode's bandwidth.
    pub required_q: f64,
}

/// Cavity design summary for a spin chain in a given box.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DesignReport {
    pub dims: [f64; 3],
    pub omega_max: f64,
    pub match_tol: f64,
    pub starred: Vec<StarredMatch>,
    pub unstarred: Vec<SpuriousGuard>,
    /// Largest `required_q` over the unstarred lines: run the cavity above
    /// this Q and no unwanted line binds to a mode.
    pub required_q: f64,
    /// Smallest `line / offset` over the matched starred lines: above this Q
    /// the cavity bandwidth no longer covers its own match offsets.
    pub q_ceiling: f64,
    /// Modes with transverse B at the center (the only ones that couple).
    pub transverse_mode_count: usize,
    pub matched_mode_count: usize,
    pub spurious_mode_count: usize,
    /// All modes in range, any center field.
    pub raw_mode_count: usize,
    /// `h c zeta / k_B` when `zeta` is given in 1/cm: the temperature scale
    /// below which thermal quanta at the line frequencies freeze out.
    pub temperature_threshold_kelvin: Option<f64>,
    pub notes: Vec<String>,
}

/// Match the chain's starred lines to the transverse-B modes of an
/// `a x b x d` box and derive the Q window. `zeta_inverse_cm`, when given,
/// converts the frequency unit to a temperature threshold.
pub fn design_report(
    sys: &SpinSystem,
    dims: [f64; 3],
    omega_max: f64,
    match_tol: f64,
    zeta_inverse_cm: Option<f64>,
) -> Result<DesignReport> {
    if match_tol.is_nan() || match_tol <= 0.0 {
        return Err(AqecError::InvalidParameter(format!(
            "match tolerance {match_tol} must be > 0"
        )));
    }
    let lines = dipole_spectrum(sys, Polarization::X)?;
    let modes = cavity_modes(dims[0], dims[1], dims[2], omega_max)?;
    let transverse: Vec<&CavityMode> =
        modes.iter().filter(|m| m.center_field.is_transverse()).collect();

    let nearest = |freq: f64| -> Option<&CavityMode> {
        transverse
            .iter()
            .min_by(|x, y| {
                (x.freq_zeta - freq).abs().total_cmp(&(y.freq_zeta - freq).abs())
            })
            .copied()
    };

    let mut starred = Vec::new();
    let mut unstarred = Vec::new();
    let mut matched_names = std::collections::BTreeSet::new();
    let mut required_q = 0.0f64;
    let mut q_ceiling = f64::INFINITY;
    for line in &lines {
        let best = nearest(line.freq_zeta);
        let offset = best.map_or(f64::INFINITY, |m| (m.freq_zeta - line.freq_zeta).abs());
        if line.starred {
            let matched = offset <= match_tol;
            if matched {
                matched_names.insert(best.unwrap().name());
                if offset > 0.0 {
                    q_ceiling = q_ceiling.min(line.freq_zeta / offset);
                }
            }
            starred.push(StarredMatch { line: line.clone(), mode: best.cloned(), offset, matched });
        } else {
            let q = if offset > 0.0 && offset.is_finite() {
                line.freq_zeta / offset
            } else {
                f64::INFINITY
            };
            required_q = required_q.max(q);
            unstarred.push(SpuriousGuard {
                line: line.clone(),
                nearest: best.cloned(),
                offset,
                required_q: q,
            });
        }
    }

    let matched_mode_count = matched_names.len();
    let notes = vec![
        "coupling is magnetic: only modes with a transverse B component at the cavity \
         center drive |Delta m_z| = 1 spin transitions, so longitudinal-B and dark-center \
         modes are excluded from matching and from the spurious-mode count"
            .to_string(),
        "mode frequencies follow sqrt((m/a)^2 + (n/b)^2 + (p/d)^2) with box lengths in the \
         unit that makes the nearest-neighbour coupling zeta the frequency scale"
            .to_string(),
        "required_q < Q < q_ceiling keeps every starred line inside and every unstarred \
         line outside its mode bandwidth"
            .to_string(),
    ];
    Ok(DesignReport {
        dims,
        omega_max,
        match_tol,
        starred,
        unstarred,
        required_q,
        q_ceiling,
        transverse_mode_count: transverse.len(),
        matched_mode_count,
        spurious_mode_count: transverse.len() - matched_mode_count,
        raw_mode_count: modes.len(),
        temperature_threshold_kelvin: zeta_inverse_cm.map(|z| SECOND_RADIATION_CM_K * z),
        notes,
    })
}
