//! Bundled model constructors: the single-codeword toy models and the
//! two-codeword spin-flip-correcting model, plus corrupted-state preparation.
//!
//! # Toy models (one system qubit, one ancilla qubit)
//!
//! *Flip model*: `H = r (I_{A,beta} + I_{A,alpha} I_{S,x}) + d (I_{S,alpha} +
//! I_{S,beta} I_{A,x})`, ancilla cooled at rate `c`. The protected state is
//! `|1_S 0_A>`; repair follows `|0_S 0_A> <-> |0_S 1_A> -> |1_S 1_A> ->
//! |1_S 0_A>` (detect, repair, cool).
//!
//! *Direct model*: diagonal frequencies `omega_ss'` plus a single matrix
//! element `mu` coupling `|0_S 0_A> <-> |1_S 1_A>`; repair needs one coherent
//! step and one cooling step.
//!
//! # Two-codeword model (three system qubits, two ancillas)
//!
//! Codewords `|000,00>` and `|111,00>` protect against single spin flips.
//! Only the 14 dynamically relevant product states are kept (7 per
//! codeword/funnel block, so the Liouville generator is 196 x 196):
//!
//! ```text
//! position: 0        1        2        3        4        5        6
//! block 0:  000,00   001,00   010,00   100,00   000,01   000,10   000,11
//! block 1:  111,00   110,00   101,00   011,00   111,01   111,10   111,11
//! ```
//!
//! Each block of `H` is parameterized by a Hermitian 7x7 matrix: index 0 the
//! codeword, 1..3 the error states, 4..6 the excited-ancilla states; `gamma`
//! couplings mix error states, `mu` couplings mix errors with excited
//! ancillas, `kappa` couplings mix excited ancillas. The second block may
//! carry a uniform diagonal offset `delta_omega` (and, for deliberately
//! asymmetric variants, a different parameter matrix). Two lowering collapses
//! cool the ancillas at rates `c1` (first ancilla bit) and `c2` (second).

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use crate::error::{AqecError, Result};
use crate::numerics::psd_project;
use crate::ops::{
    c, embed_product, single_site_op, Basis, HilbertSpace, Ket, Operator, SpinComponent, C64,
};

/// A fully specified open-system model: Hamiltonian, damping channels,
/// codewords and their funnels, and the standard error set.
#[derive(Debug, Clone)]
pub struct AqecModel {
    pub basis: Basis,
    pub hamiltonian: Operator,
    /// `(rate, collapse operator)` pairs.
    pub collapse_terms: Vec<(f64, Operator)>,
    /// Codeword states (basis kets for the bundled models).
    pub codewords: Vec<Ket>,
    /// Correctable errors, expressed on the model basis.
    pub error_set: Vec<Operator>,
    /// Funnel labels associated with each codeword (codeword excluded).
    pub funnel_of: Vec<Vec<String>>,
    /// Declares that the model is posed in Lindblad form with independent
    /// bath channels per collapse operator (cooling on degenerate transitions
    /// coupled to orthogonal bath modes).
    pub lindblad_form_declared: bool,
}

impl AqecModel {
    /// Lindblad generator of this model.
    pub fn generator(&self) -> Result<crate::liouville::LiouvilleGenerator> {
        crate::liouville::build_generator(&self.hamiltonian, &self.collapse_terms)
    }

    /// Normalized codeword superposition `a_0 |psi_0> + a_1 |psi_1>`.
    pub fn codeword_superposition(&self, amps: &[C64]) -> Result<Ket> {
        if amps.len() != self.codewords.len() {
            return Err(AqecError::DimensionMismatch(format!(
                "{} amplitudes for {} codewords",
                amps.len(),
                self.codewords.len()
            )));
        }
        let mut v = Array1::zeros(self.basis.dim());
        for (a, cw) in amps.iter().zip(self.codewords.iter()) {
            v = v + cw.amps.mapv(|x| x * *a);
        }
        Ket::new(self.basis.clone(), v)?.normalized()
    }
}

/// Spin flip (Pauli X = 2 I_x) on one site, on the full product basis.
pub fn spin_flip(space: &HilbertSpace, site: usize) -> Result<Operator> {
    Ok(single_site_op(space, site, SpinComponent::X)?.scale(c(2.0, 0.0)))
}

/// The flip-based toy model. `d` is the detection rate, `r` the repair rate,
/// `c` the ancilla cooling rate.
pub fn toy_model_flip(d: f64, r: f64, cool: f64) -> Result<AqecModel> {
    let space = HilbertSpace::qubits(1, 1);
    let h = embed_product(&space, &[(1, SpinComponent::Beta)])?
        .add(&embed_product(&space, &[(1, SpinComponent::Alpha), (0, SpinComponent::X)])?)?
        .scale(c(r, 0.0))
        .add(
            &embed_product(&space, &[(0, SpinComponent::Alpha)])?
                .add(&embed_product(
                    &space,
                    &[(0, SpinComponent::Beta), (1, SpinComponent::X)],
                )?)?
                .scale(c(d, 0.0)),
        )?;
    toy_common(space, h, cool)
}

/// The direct toy model: `omega = [w00, w01, w10, w11]` diagonal frequencies
/// (state order `|0_S 0_A>`, `|0_S 1_A>`, `|1_S 0_A>`, `|1_S 1_A>`) and
/// coupling `mu` between `|0_S 0_A>` and `|1_S 1_A>`.
pub fn toy_model_direct(omega: [f64; 4], mu: C64, cool: f64) -> Result<AqecModel> {
    let space = HilbertSpace::qubits(1, 1);
    let basis = Basis::full(space.clone());
    let mut m = Array2::zeros((4, 4));
    // dense index order is |11>, |10>, |01>, |00>
    let pos = |label: &str| space.index_of_label(label).unwrap();
    m[(pos("0,0"), pos("0,0"))] = c(omega[0], 0.0);
    m[(pos("0,1"), pos("0,1"))] = c(omega[1], 0.0);
    m[(pos("1,0"), pos("1,0"))] = c(omega[2], 0.0);
    m[(pos("1,1"), pos("1,1"))] = c(omega[3], 0.0);
    m[(pos("0,0"), pos("1,1"))] = mu;
    m[(pos("1,1"), pos("0,0"))] = mu.conj();
    let h = Operator::new(basis, m)?;
    toy_common(space, h, cool)
}

fn toy_common(space: HilbertSpace, h: Operator, cool: f64) -> Result<AqecModel> {
    if cool < 0.0 {
        return Err(AqecError::InvalidParameter(format!("negative cooling rate {cool}")));
    }
    let l = single_site_op(&space, 1, SpinComponent::Minus)?;
    let basis = h.basis.clone();
    let codeword = basis.ket("1,0")?;
    let error = spin_flip(&space, 0)?;
    Ok(AqecModel {
        basis,
        hamiltonian: h,
        collapse_terms: vec![(cool, l)],
        codewords: vec![codeword],
        error_set: vec![error],
        funnel_of: vec![vec!["0,0".into(), "0,1".into(), "1,1".into()]],
        lindblad_form_declared: true,
    })
}

/// Block labels of the two-codeword model, block 0 then block 1.
pub fn two_codeword_labels() -> Vec<String> {
    [
        "000,00", "001,00", "010,00", "100,00", "000,01", "000,10", "000,11", //
        "111,00", "110,00", "101,00", "011,00", "111,01", "111,10", "111,11",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect()
}

/// Two-codeword model with identical blocks (block 1 offset by
/// `delta_omega` on the diagonal).
pub fn two_codeword_model(
    block: &Array2<C64>,
    delta_omega: f64,
    c1: f64,
    c2: f64,
) -> Result<AqecModel> {
    two_codeword_model_blocks(block, block, delta_omega, c1, c2)
}

/// Two-codeword model with independently specified blocks (used by the
/// deliberately symmetry-broken variants). `block1` still receives the
/// `delta_omega` diagonal offset.
pub fn two_codeword_model_blocks(
    block0: &Array2<C64>,
    block1: &Array2<C64>,
    delta_omega: f64,
    c1: f64,
    c2: f64,
) -> Result<AqecModel> {
    for (name, b) in [("block 0", block0), ("block 1", block1)] {
        if b.nrows() != 7 || b.ncols() != 7 {
            return Err(AqecError::DimensionMismatch(format!(
                "{name} must be 7x7, got {}x{}",
                b.nrows(),
                b.ncols()
            )));
        }
        let defect = (0..7)
            .flat_map(|i| (i..7).map(move |j| (i, j)))
            .map(|(i, j)| (b[(i, j)] - b[(j, i)].conj()).norm())
            .fold(0.0f64, f64::max);
        if defect > 1e-12 {
            return Err(AqecError::Structure(format!(
                "{name} not Hermitian (defect {defect:.3e})"
            )));
        }
    }
    if c1 < 0.0 || c2 < 0.0 {
        return Err(AqecError::InvalidParameter(format!(
            "negative cooling rate (c1 = {c1}, c2 = {c2})"
        )));
    }

    let space = HilbertSpace::qubits(3, 2);
    let labels = two_codeword_labels();
    let basis = Basis::restricted(space.clone(), &labels)?;

    let mut h = Array2::zeros((14, 14));
    for i in 0..7 {
        for j in 0..7 {
            h[(i, j)] = block0[(i, j)];
            h[(7 + i, 7 + j)] = block1[(i, j)];
        }
        h[(7 + i, 7 + i)] += c(delta_omega, 0.0);
    }
    let hamiltonian = Operator::new(basis.clone(), h)?;

    // Ancilla-lowering collapses, restricted to the kept labels.
    let l1 = single_site_op(&space, 3, SpinComponent::Minus)?.restrict_to(&basis)?;
    let l2 = single_site_op(&space, 4, SpinComponent::Minus)?.restrict_to(&basis)?;

    // Single spin flips on the three system qubits, restricted likewise.
    let error_set = (0..3)
        .map(|site| spin_flip(&space, site)?.restrict_to(&basis))
        .collect::<Result<Vec<_>>>()?;

    let codewords = vec![basis.ket("000,00")?, basis.ket("111,00")?];
    let funnel_of = vec![
        labels[1..7].to_vec(),
        labels[8..14].to_vec(),
    ];

    Ok(AqecModel {
        basis,
        hamiltonian,
        collapse_terms: vec![(c1, l1), (c2, l2)],
        codewords,
        error_set,
        funnel_of,
        lindblad_form_declared: true,
    })
}

/// Environmental overlap data for a set of error branches: branch weights
/// `p_n` (summing to one) and unit-normalized pairwise overlaps `g_nm`.
#[derive(Debug, Clone)]
pub struct OverlapMatrix {
    pub weights: Vec<f64>,
    pub g: Array2<C64>,
}

impl OverlapMatrix {
    pub fn new(weights: Vec<f64>, g: Array2<C64>) -> Result<Self> {
        let m = Self { weights, g };
        m.validate()?;
        Ok(m)
    }

    /// Orthogonal environments with the given weights.
    pub fn uncorrelated(weights: Vec<f64>) -> Result<Self> {
        let n = weights.len();
        Self::new(weights, Array2::eye(n))
    }

    pub fn n_branches(&self) -> usize {
        self.weights.len()
    }

    fn validate(&self) -> Result<()> {
        let n = self.weights.len();
        if self.g.nrows() != n || self.g.ncols() != n {
            return Err(AqecError::DimensionMismatch(format!(
                "{} weights vs {}x{} overlap matrix",
                n,
                self.g.nrows(),
                self.g.ncols()
            )));
        }
        if self.weights.iter().any(|&p| p < 0.0) {
            return Err(AqecError::InvalidParameter("negative branch weight".into()));
        }
        let total: f64 = self.weights.iter().sum();
        if (total - 1.0).abs() > 1e-10 {
            return Err(AqecError::InvalidParameter(format!(
                "branch weights sum to {total}, expected 1"
            )));
        }
        for i in 0..n {
            if (self.g[(i, i)] - c(1.0, 0.0)).norm() > 1e-12 {
                return Err(AqecError::Structure(
                    "overlap diagonal must be exactly 1 (unit-normalized branches)".into(),
                ));
            }
            for j in 0..n {
                if (self.g[(i, j)] - self.g[(j, i)].conj()).norm() > 1e-12 {
                    return Err(AqecError::Structure("overlap matrix not Hermitian".into()));
                }
                if self.g[(i, j)].norm() > 1.0 + 1e-12 {
                    return Err(AqecError::Structure(format!(
                        "|g[{i},{j}]| = {} exceeds 1",
                        self.g[(i, j)].norm()
                    )));
                }
            }
        }
        Ok(())
    }

    /// Weighted Gram matrix `G_nm = sqrt(p_n p_m) g_nm`.
    pub fn gram(&self) -> Array2<C64> {
        let n = self.n_branches();
        Array2::from_shape_fn((n, n), |(i, j)| {
            self.g[(i, j)] * (self.weights[i] * self.weights[j]).sqrt()
        })
    }
}

/// A corrupted initial state, with diagnostics from the PSD projection of the
/// branch Gram matrix.
#[derive(Debug, Clone)]
pub struct CorruptedState {
    pub rho: Operator,
    /// Frobenius distance between the declared Gram matrix and its PSD
    /// projection; 0 when the declared overlaps were already consistent.
    pub projection_distance: f64,
}

/// Density matrix after an error, tracing out the environment.
///
/// Branch `n` is the normalized state `E_n |psi> / ||E_n psi||`; the
/// environment is folded in through the overlap data:
/// `rho = sum_nm sqrt(p_n p_m) g_nm |b_n><b_m|`.
///
/// Overlap sets that are not realizable (Gram matrix with negative
/// eigenvalues) are projected to the nearest PSD matrix — clip, rebuild,
/// renormalize the trace — and the Frobenius projection distance is reported
/// so callers can flag it (anything above 1e-12 means the declared overlaps
/// were adjusted).
pub fn corrupted_state(
    psi: &Ket,
    errors: &[Operator],
    overlaps: &OverlapMatrix,
) -> Result<CorruptedState> {
    if errors.is_empty() {
        return Err(AqecError::InvalidParameter("empty error set".into()));
    }
    if errors.len() != overlaps.n_branches() {
        return Err(AqecError::DimensionMismatch(format!(
            "{} errors vs {} overlap branches",
            errors.len(),
            overlaps.n_branches()
        )));
    }
    let d = psi.dim();
    let n = errors.len();
    let mut branches: Vec<Array1<C64>> = Vec::with_capacity(n);
    for e in errors {
        let b = e.apply(psi)?.normalized()?;
        branches.push(b.amps);
    }
    let (gram, distance) = psd_project(&overlaps.gram())?;

    let mut rho = Array2::zeros((d, d));
    for a in 0..n {
        for b in 0..n {
            let w = gram[(a, b)];
            if w.norm() == 0.0 {
                continue;
            }
            for i in 0..d {
                for j in 0..d {
                    rho[(i, j)] += w * branches[a][i] * branches[b][j].conj();
                }
            }
        }
    }
    // Hermitize (roundoff only) and normalize the trace exactly.
    let rho = (&rho + &rho.t().mapv(|v: C64| v.conj())).mapv(|v| v * 0.5);
    let tr: C64 = rho.diag().sum();
    if tr.re <= 0.0 {
        return Err(AqecError::Structure("corrupted state has nonpositive trace".into()));
    }
    let rho = rho.mapv(|v| v / tr.re);
    Ok(CorruptedState {
        rho: Operator::new(psi.basis.clone(), rho)?,
        projection_distance: distance,
    })
}

// ---------------------------------------------------------------------------
// JSON model configuration
// ---------------------------------------------------------------------------

/// Complex number encoded as a `[re, im]` pair in JSON.
pub type JsonComplex = [f64; 2];

fn to_c64(v: &JsonComplex) -> C64 {
    c(v[0], v[1])
}

fn default_rate() -> f64 {
    1.0
}

/// Overlap data as stored in JSON fixture files.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OverlapsConfig {
    pub weights: Vec<f64>,
    pub g: Vec<Vec<JsonComplex>>,
}

impl OverlapsConfig {
    pub fn build(&self) -> Result<OverlapMatrix> {
        let n = self.weights.len();
        if self.g.len() != n || self.g.iter().any(|row| row.len() != n) {
            return Err(AqecError::Config(format!("overlap matrix is not {n}x{n}")));
        }
        let g = Array2::from_shape_fn((n, n), |(i, j)| to_c64(&self.g[i][j]));
        OverlapMatrix::new(self.weights.clone(), g)
    }
}

/// Model configuration, tagged by `"model"`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelConfig {
    /// Flip-based toy model.
    ToyFlip { d: f64, r: f64, c: f64 },
    /// Direct-coupling toy model.
    ToyDirect { omega: [f64; 4], mu: JsonComplex, c: f64 },
    /// 14-state two-codeword model.
    TwoCodeword {
        /// 7x7 Hermitian block (complex entries as `[re, im]`).
        block: Vec<Vec<JsonComplex>>,
        /// Optional distinct second block (defaults to `block`).
        #[serde(default, skip_serializing_if = "Option::is_none")]
        block2: Option<Vec<Vec<JsonComplex>>>,
        #[serde(default)]
        delta_omega: f64,
        #[serde(default = "default_rate")]
        c1: f64,
        #[serde(default = "default_rate")]
        c2: f64,
        /// Optional environmental overlaps for multi-branch errors.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        overlaps: Option<OverlapsConfig>,
        /// Codeword superposition amplitudes (default `(1/sqrt2,
        /// e^{i pi/3}/sqrt2)`).
        #[serde(default, skip_serializing_if = "Option::is_none")]
        psi: Option<[JsonComplex; 2]>,
    },
}

impl ModelConfig {
    /// Parse from JSON text.
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| AqecError::Config(e.to_string()))
    }

    /// Build the model.
    pub fn build(&self) -> Result<AqecModel> {
        match self {
            ModelConfig::ToyFlip { d, r, c } => toy_model_flip(*d, *r, *c),
            ModelConfig::ToyDirect { omega, mu, c } => toy_model_direct(*omega, to_c64(mu), *c),
            ModelConfig::TwoCodeword { block, block2, delta_omega, c1, c2, .. } => {
                let b0 = parse_block(block)?;
                let b1 = match block2 {
                    Some(b) => parse_block(b)?,
                    None => b0.clone(),
                };
                two_codeword_model_blocks(&b0, &b1, *delta_omega, *c1, *c2)
            }
        }
    }

    /// Codeword superposition amplitudes declared by the config (two-codeword
    /// models only), falling back to `(1/sqrt2, e^{i pi/3}/sqrt2)`.
    pub fn psi_amplitudes(&self) -> Vec<C64> {
        if let ModelConfig::TwoCodeword { psi: Some(p), .. } = self {
            return p.iter().map(to_c64).collect();
        }
        let s = std::f64::consts::FRAC_1_SQRT_2;
        vec![c(s, 0.0), c(0.0, std::f64::consts::PI / 3.0).exp() * c(s, 0.0)]
    }

    /// Overlap matrix declared by the config, if any.
    pub fn overlaps(&self) -> Result<Option<OverlapMatrix>> {
        if let ModelConfig::TwoCodeword { overlaps: Some(o), .. } = self {
            return Ok(Some(o.build()?));
        }
        Ok(None)
    }
}

fn parse_block(rows: &[Vec<JsonComplex>]) -> Result<Array2<C64>> {
    if rows.len() != 7 || rows.iter().any(|r| r.len() != 7) {
        return Err(AqecError::Config("block must be 7x7".into()));
    }
    Ok(Array2::from_shape_fn((7, 7), |(i, j)| to_c64(&rows[i][j])))
}

/// Bundled fixture configurations.
pub mod fixtures {
    /// Parameter set A: gamma12 = gamma23 = 1, mu11 = 1.
    pub const SET_A: &str = include_str!("../fixtures/setA.json");
    /// Parameter set B: the chain e1-e2-e3-c1-c2-c3 (gammas, mu31, kappas).
    pub const SET_B: &str = include_str!("../fixtures/setB.json");
    /// Parameter set C: diagonal mu (mu11 = mu22 = mu33 = 1).
    pub const SET_C: &str = include_str!("../fixtures/setC.json");
    /// Set A with asymmetric second block (mu11 = mu12 = 1/sqrt2).
    pub const SET_A_ASYM: &str = include_str!("../fixtures/setA_asym.json");
    /// Set C with a faster-mixing second block (mu11 = 2).
    pub const SET_C_FASTMIX: &str = include_str!("../fixtures/setC_fastmix.json");
    /// The correlated environmental-overlap example.
    pub const OVERLAPS_EXAMPLE: &str = include_str!("../fixtures/overlaps_example.json");

    /// Look up a bundled model fixture by name (e.g. `"setA"`,
    /// `"setC_fastmix"`).
    pub fn by_name(name: &str) -> Option<&'static str> {
        match name {
            "setA" => Some(SET_A),
            "setB" => Some(SET_B),
            "setC" => Some(SET_C),
            "setA_asym" => Some(SET_A_ASYM),
            "setC_fastmix" => Some(SET_C_FASTMIX),
            _ => None,
        }
    }

    /// Names of all bundled model fixtures.
    pub fn names() -> [&'static str; 5] {
        ["setA", "setB", "setC", "setA_asym", "setC_fastmix"]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn flip_hamiltonian_matrix() {
        // frozen: basis order |11>, |10>, |01>, |00>
        //   [[d, 0, r/2, 0], [0, r+d, 0, 0], [r/2, 0, 0, d/2], [0, 0, d/2, r]]
        let (d, r) = (1.3, 0.7);
        let m = toy_model_flip(d, r, 1.0).unwrap().hamiltonian.matrix;
        let expect = [
            [d, 0.0, r / 2.0, 0.0],
            [0.0, r + d, 0.0, 0.0],
            [r / 2.0, 0.0, 0.0, d / 2.0],
            [0.0, 0.0, d / 2.0, r],
        ];
        for i in 0..4 {
            for j in 0..4 {
                assert_abs_diff_eq!(m[(i, j)].re, expect[i][j], epsilon = 1e-15);
                assert_abs_diff_eq!(m[(i, j)].im, 0.0, epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn direct_hamiltonian_matrix() {
        let omega = [0.3, 0.5, 0.7, 0.9];
        let mu = c(0.8, 0.2);
        let model = toy_model_direct(omega, mu, 1.0).unwrap();
        let m = &model.hamiltonian.matrix;
        let space = model.basis.space();
        let pos = |l: &str| space.index_of_label(l).unwrap();
        assert_eq!(m[(pos("0,0"), pos("0,0"))], c(0.3, 0.0));
        assert_eq!(m[(pos("0,1"), pos("0,1"))], c(0.5, 0.0));
        assert_eq!(m[(pos("1,0"), pos("1,0"))], c(0.7, 0.0));
        assert_eq!(m[(pos("1,1"), pos("1,1"))], c(0.9, 0.0));
        assert_eq!(m[(pos("0,0"), pos("1,1"))], mu);
        assert_eq!(m[(pos("1,1"), pos("0,0"))], mu.conj());
        assert!(model.hamiltonian.is_hermitian(1e-14));
        // the codeword is an eigenstate (row/column otherwise empty)
        assert_eq!(m[(pos("1,0"), pos("0,0"))], c(0.0, 0.0));
        assert_eq!(m[(pos("1,0"), pos("1,1"))], c(0.0, 0.0));
    }

    #[test]
    fn flip_model_special_cases() {
        // d = 0: |0_S 0_A> is an H eigenstate and the collapse annihilates it,
        // so it is stationary alongside the codeword.
        let model = toy_model_flip(0.0, 1.0, 1.0).unwrap();
        let ket = model.basis.ket("0,0").unwrap();
        let h_ket = model.hamiltonian.apply(&ket).unwrap();
        let overlap = ket.dot(&h_ket).unwrap();
        let residual = (0..4)
            .map(|i| (h_ket.amps[i] - overlap * ket.amps[i]).norm())
            .fold(0.0f64, f64::max);
        assert!(residual < 1e-14);
        // r = 0: H never transfers amplitude into |1_S> states from |0_S>.
        let model = toy_model_flip(1.0, 0.0, 1.0).unwrap();
        let space = model.basis.space();
        for from in ["0,0", "0,1"] {
            for to in ["1,0", "1,1"] {
                let i = space.index_of_label(to).unwrap();
                let j = space.index_of_label(from).unwrap();
                assert_eq!(model.hamiltonian.matrix[(i, j)], c(0.0, 0.0));
            }
        }
    }

    #[test]
    fn two_codeword_layout() {
        let cfg = ModelConfig::from_json(fixtures::SET_A).unwrap();
        let model = cfg.build().unwrap();
        assert_eq!(model.basis.dim(), 14);
        assert_eq!(model.basis.label(0), "000,00");
        assert_eq!(model.basis.label(7), "111,00");
        let h = &model.hamiltonian.matrix;
        // mu11 couples e1 (pos 1) with c1 (pos 4), mirrored in block 1
        assert_eq!(h[(1, 4)], c(1.0, 0.0));
        assert_eq!(h[(8, 11)], c(1.0, 0.0));
        // gamma12 couples e1-e2; no kappa couplings in set A
        assert_eq!(h[(1, 2)], c(1.0, 0.0));
        assert_eq!(h[(4, 5)], c(0.0, 0.0));
        // codeword row is decoupled
        for j in 1..7 {
            assert_eq!(h[(0, j)], c(0.0, 0.0));
        }
        // no cross-block elements
        for i in 0..7 {
            for j in 7..14 {
                assert_eq!(h[(i, j)], c(0.0, 0.0));
            }
        }
        assert!(model.hamiltonian.is_hermitian(1e-14));
    }

    #[test]
    fn delta_omega_offsets_second_block() {
        let cfg = ModelConfig::from_json(fixtures::SET_A).unwrap();
        let base = cfg.build().unwrap();
        let ModelConfig::TwoCodeword { block, .. } = &cfg else { unreachable!() };
        let b = parse_block(block).unwrap();
        let shifted = two_codeword_model(&b, 1.5, 1.0, 1.0).unwrap();
        for k in 0..7 {
            let got = shifted.hamiltonian.matrix[(7 + k, 7 + k)];
            let want = base.hamiltonian.matrix[(7 + k, 7 + k)] + c(1.5, 0.0);
            assert!((got - want).norm() < 1e-14);
        }
    }

    #[test]
    fn collapse_operators_are_labelwise_lowerings() {
        let model = ModelConfig::from_json(fixtures::SET_B).unwrap().build().unwrap();
        let basis = &model.basis;
        let pos = |l: &str| basis.position_of_label(l).unwrap();
        let (rate1, l1) = &model.collapse_terms[0];
        let (rate2, l2) = &model.collapse_terms[1];
        assert_eq!(*rate1, 1.0);
        assert_eq!(*rate2, 1.0);
        // first-ancilla lowering: exactly these four unit elements
        let expected1 = [
            ("000,00", "000,10"),
            ("000,01", "000,11"),
            ("111,00", "111,10"),
            ("111,01", "111,11"),
        ];
        let mut count = 0;
        for i in 0..14 {
            for j in 0..14 {
                if l1.matrix[(i, j)].norm() > 0.0 {
                    count += 1;
                    assert!(
                        expected1
                            .iter()
                            .any(|(to, from)| pos(to) == i && pos(from) == j),
                        "unexpected L1 element at ({i},{j})"
                    );
                    assert!((l1.matrix[(i, j)] - c(1.0, 0.0)).norm() < 1e-15);
                }
            }
        }
        assert_eq!(count, 4);
        // second-ancilla lowering spot check
        assert!((l2.matrix[(pos("000,10"), pos("000,11"))] - c(1.0, 0.0)).norm() < 1e-15);
        assert!((l2.matrix[(pos("000,00"), pos("000,01"))] - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn error_set_flips_within_basis() {
        let model = ModelConfig::from_json(fixtures::SET_C).unwrap().build().unwrap();
        let basis = &model.basis;
        let pos = |l: &str| basis.position_of_label(l).unwrap();
        // error 1 flips the leftmost system spin: 000 <-> 100, 111 <-> 011
        let e1 = &model.error_set[0];
        assert!((e1.matrix[(pos("100,00"), pos("000,00"))] - c(1.0, 0.0)).norm() < 1e-15);
        assert!((e1.matrix[(pos("011,00"), pos("111,00"))] - c(1.0, 0.0)).norm() < 1e-15);
        // a second flip moves an error state into the other codeword's funnel
        assert!((e1.matrix[(pos("101,00"), pos("001,00"))] - c(1.0, 0.0)).norm() < 1e-15);
        // excited-ancilla error states leave the retained subspace entirely
        let col = pos("000,01");
        for i in 0..14 {
            assert_eq!(e1.matrix[(i, col)], c(0.0, 0.0));
        }
    }

    #[test]
    fn corrupted_state_single_error_is_pure() {
        let model = ModelConfig::from_json(fixtures::SET_A).unwrap().build().unwrap();
        let psi = model
            .codeword_superposition(&ModelConfig::from_json(fixtures::SET_A)
                .unwrap()
                .psi_amplitudes())
            .unwrap();
        let overlaps = OverlapMatrix::uncorrelated(vec![1.0]).unwrap();
        let corrupted =
            corrupted_state(&psi, &model.error_set[0..1], &overlaps).unwrap();
        assert_abs_diff_eq!(corrupted.projection_distance, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(corrupted.rho.trace().re, 1.0, epsilon = 1e-12);
        let purity = crate::metrics::purity(&corrupted.rho).unwrap();
        assert_abs_diff_eq!(purity, 1.0, epsilon = 1e-12);
        crate::ops::validate_density(&corrupted.rho).unwrap();
    }

    #[test]
    fn corrupted_state_with_inconsistent_overlaps_is_projected() {
        // frozen oracle: Frobenius projection distance 0.12650455147225503,
        // projected spectrum {0.601392, 0.300927, 0.097682, 0 x 11}
        let model = ModelConfig::from_json(fixtures::SET_A).unwrap().build().unwrap();
        let cfg = ModelConfig::from_json(fixtures::SET_A).unwrap();
        let psi = model.codeword_superposition(&cfg.psi_amplitudes()).unwrap();
        let overlaps: OverlapsConfig =
            serde_json::from_str(fixtures::OVERLAPS_EXAMPLE).unwrap();
        let overlaps = overlaps.build().unwrap();
        let mut errors = vec![Operator::identity(model.basis.clone())];
        errors.extend(model.error_set.iter().cloned());
        let corrupted = corrupted_state(&psi, &errors, &overlaps).unwrap();
        assert_abs_diff_eq!(
            corrupted.projection_distance,
            0.12650455147225503,
            epsilon = 1e-9
        );
        assert_abs_diff_eq!(corrupted.rho.trace().re, 1.0, epsilon = 1e-12);
        crate::ops::validate_density(&corrupted.rho).unwrap();
        let (vals, _) = crate::numerics::eig_hermitian(&corrupted.rho.matrix).unwrap();
        let mut sorted: Vec<f64> = vals.to_vec();
        sorted.sort_by(|a, b| b.total_cmp(a));
        assert_abs_diff_eq!(sorted[0], 0.601392, epsilon = 1e-6);
        assert_abs_diff_eq!(sorted[1], 0.300927, epsilon = 1e-6);
        assert_abs_diff_eq!(sorted[2], 0.097682, epsilon = 1e-6);
        assert!(sorted[3].abs() < 1e-10);
    }

    #[test]
    fn overlap_validation_rejects_bad_data() {
        // weights not summing to one
        assert!(OverlapMatrix::uncorrelated(vec![0.5, 0.4]).is_err());
        // |g| > 1
        let g = ndarray::array![[c(1., 0.), c(1.2, 0.)], [c(1.2, 0.), c(1., 0.)]];
        assert!(OverlapMatrix::new(vec![0.5, 0.5], g).is_err());
        // non-Hermitian
        let g = ndarray::array![[c(1., 0.), c(0.5, 0.1)], [c(0.5, 0.1), c(1., 0.)]];
        assert!(OverlapMatrix::new(vec![0.5, 0.5], g).is_err());
    }

    #[test]
    fn all_fixtures_parse_and_build() {
        for name in fixtures::names() {
            let text = fixtures::by_name(name).unwrap();
            let cfg = ModelConfig::from_json(text).unwrap();
            let model = cfg.build().unwrap();
            assert_eq!(model.basis.dim(), 14, "{name}");
            assert!(model.hamiltonian.is_hermitian(1e-12), "{name}");
            // psi defaults to the pi/3 superposition in every fixture
            let amps = cfg.psi_amplitudes();
            assert_abs_diff_eq!(amps[0].re, std::f64::consts::FRAC_1_SQRT_2, epsilon = 1e-12);
            assert_abs_diff_eq!(
                amps[1].arg(),
                std::f64::consts::PI / 3.0,
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn config_rejects_malformed_input() {
        assert!(ModelConfig::from_json("{\"model\": \"nope\"}").is_err());
        // non-Hermitian block
        let mut cfg: serde_json::Value = serde_json::from_str(fixtures::SET_A).unwrap();
        cfg["block"][0][1] = serde_json::json!([0.3, 0.0]);
        let parsed = ModelConfig::from_json(&cfg.to_string()).unwrap();
        assert!(parsed.build().is_err());
    }

    #[test]
    fn superposition_normalization() {
        let model = ModelConfig::from_json(fixtures::SET_A).unwrap().build().unwrap();
        let psi = model
            .codeword_superposition(&[c(1.0, 0.0), c(0.0, 1.0)])
            .unwrap();
        assert_abs_diff_eq!(psi.norm(), 1.0, epsilon = 1e-14);
        assert!(model.codeword_superposition(&[c(1.0, 0.0)]).is_err());
    }
}
