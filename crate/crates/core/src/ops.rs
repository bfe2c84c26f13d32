//! Labeled tensor-product Hilbert spaces and spin-1/2 operator algebra.
//!
//! Conventions (used consistently across the whole crate):
//!
//! * Each site is a qubit whose **local basis is ordered (|1>, |0>)**: local
//!   index 0 is the upper state |1> (alpha), local index 1 is the lower state
//!   |0> (beta). With this ordering `I_z = diag(+1/2, -1/2)`.
//! * Site 0 is the most significant factor: a product state with per-site bits
//!   `(b_0, ..., b_{n-1})` sits at dense index `sum_k (1 - b_k) * 2^(n-1-k)`.
//! * Basis-state labels group the system bits and ancilla bits left to right,
//!   separated by a comma: `"010,11"` means system spins in `|010>` and
//!   ancillas in `|11>`. Spaces with a single role omit the comma.
//! * Spin operators are spin-1/2 angular momenta (`I_x = sigma_x / 2`, ...),
//!   `plus`/`minus` are the raising/lowering operators `|1><0|` / `|0><1|`,
//!   and `alpha`/`beta` are the projectors onto |1> / |0>.

use ndarray::{linalg::kron, Array1, Array2};
use ndarray_linalg::{Eigh, UPLO};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{AqecError, Result};

/// Complex scalar used throughout the crate.
pub type C64 = Complex64;

/// Shorthand complex constructor.
#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Role tag attached to each tensor factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SiteRole {
    /// Data-bearing system spin.
    System,
    /// Ancilla spin used for error detection / cooling.
    Ancilla,
}

/// Spin-1/2 operator kinds available on a single site.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpinComponent {
    /// `I_x = sigma_x / 2`
    X,
    /// `I_y = sigma_y / 2`
    Y,
    /// `I_z = sigma_z / 2 = diag(+1/2, -1/2)`
    Z,
    /// Raising operator `|1><0|`.
    Plus,
    /// Lowering operator `|0><1|`.
    Minus,
    /// Projector onto the upper state `|1><1|`.
    Alpha,
    /// Projector onto the lower state `|0><0|`.
    Beta,
}

impl SpinComponent {
    /// 2x2 matrix in the local (|1>, |0>) ordering.
    pub fn local_matrix(self) -> Array2<C64> {
        let z = c(0.0, 0.0);
        let (a, b, d, e) = match self {
            SpinComponent::X => (z, c(0.5, 0.0), c(0.5, 0.0), z),
            SpinComponent::Y => (z, c(0.0, -0.5), c(0.0, 0.5), z),
            SpinComponent::Z => (c(0.5, 0.0), z, z, c(-0.5, 0.0)),
            SpinComponent::Plus => (z, c(1.0, 0.0), z, z),
            SpinComponent::Minus => (z, z, c(1.0, 0.0), z),
            SpinComponent::Alpha => (c(1.0, 0.0), z, z, z),
            SpinComponent::Beta => (z, z, z, c(1.0, 0.0)),
        };
        ndarray::array![[a, b], [d, e]]
    }
}

/// A tensor product of labeled qubit sites.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HilbertSpace {
    site_dims: Vec<usize>,
    site_roles: Vec<SiteRole>,
}

impl HilbertSpace {
    /// Build a space from per-site dimensions and role tags.
    ///
    /// Errors if the two lists differ in length, are empty, or contain a
    /// non-qubit dimension (the operator algebra is spin-1/2 only).
    pub fn new(site_dims: Vec<usize>, site_roles: Vec<SiteRole>) -> Result<Self> {
        if site_dims.is_empty() || site_dims.len() != site_roles.len() {
            return Err(AqecError::DimensionMismatch(format!(
                "need equal, nonzero site_dims/site_roles lengths, got {} and {}",
                site_dims.len(),
                site_roles.len()
            )));
        }
        if let Some(&d) = site_dims.iter().find(|&&d| d != 2) {
            return Err(AqecError::InvalidParameter(format!(
                "only qubit sites (dim 2) are supported, got dim {d}"
            )));
        }
        Ok(Self { site_dims, site_roles })
    }

    /// `n_system` system qubits followed by `n_ancilla` ancilla qubits.
    pub fn qubits(n_system: usize, n_ancilla: usize) -> Self {
        let mut dims = Vec::new();
        let mut roles = Vec::new();
        for _ in 0..n_system {
            dims.push(2);
            roles.push(SiteRole::System);
        }
        for _ in 0..n_ancilla {
            dims.push(2);
            roles.push(SiteRole::Ancilla);
        }
        Self { site_dims: dims, site_roles: roles }
    }

    pub fn n_sites(&self) -> usize {
        self.site_dims.len()
    }

    pub fn site_dim(&self, site: usize) -> usize {
        self.site_dims[site]
    }

    pub fn site_role(&self, site: usize) -> SiteRole {
        self.site_roles[site]
    }

    pub fn site_roles(&self) -> &[SiteRole] {
        &self.site_roles
    }

    /// Total dense dimension (product of site dimensions).
    pub fn total_dim(&self) -> usize {
        self.site_dims.iter().product()
    }

    /// Sites carrying a given role, in site order.
    pub fn sites_with_role(&self, role: SiteRole) -> Vec<usize> {
        (0..self.n_sites()).filter(|&k| self.site_roles[k] == role).collect()
    }

    /// Dense index of the product state with the given per-site bits.
    ///
    /// Bit 1 is the upper state (local index 0), so `|11...1>` is index 0 and
    /// `|00...0>` is index `total_dim - 1`.
    pub fn index_of_bits(&self, bits: &[u8]) -> Result<usize> {
        if bits.len() != self.n_sites() {
            return Err(AqecError::DimensionMismatch(format!(
                "{} bits supplied for {} sites",
                bits.len(),
                self.n_sites()
            )));
        }
        let mut idx = 0usize;
        for &b in bits {
            if b > 1 {
                return Err(AqecError::InvalidParameter(format!("bit value {b} out of range")));
            }
            idx = idx * 2 + (1 - b as usize);
        }
        Ok(idx)
    }

    /// Per-site bits of a dense index (inverse of [`index_of_bits`]).
    ///
    /// [`index_of_bits`]: HilbertSpace::index_of_bits
    pub fn bits_of_index(&self, mut idx: usize) -> Vec<u8> {
        let n = self.n_sites();
        let mut bits = vec![0u8; n];
        for k in (0..n).rev() {
            bits[k] = 1 - (idx % 2) as u8;
            idx /= 2;
        }
        bits
    }

    /// Canonical label of a dense basis index, e.g. `"010,11"`.
    pub fn label_of_index(&self, idx: usize) -> String {
        let bits = self.bits_of_index(idx);
        let sys: String = self
            .sites_with_role(SiteRole::System)
            .iter()
            .map(|&k| char::from(b'0' + bits[k]))
            .collect();
        let anc: String = self
            .sites_with_role(SiteRole::Ancilla)
            .iter()
            .map(|&k| char::from(b'0' + bits[k]))
            .collect();
        match (sys.is_empty(), anc.is_empty()) {
            (false, false) => format!("{sys},{anc}"),
            (false, true) => sys,
            (true, false) => anc,
            (true, true) => unreachable!("spaces have at least one site"),
        }
    }

    /// Dense index of a canonical label (inverse of [`label_of_index`]).
    ///
    /// [`label_of_index`]: HilbertSpace::label_of_index
    pub fn index_of_label(&self, label: &str) -> Result<usize> {
        let sys_sites = self.sites_with_role(SiteRole::System);
        let anc_sites = self.sites_with_role(SiteRole::Ancilla);
        let (sys_part, anc_part) = match label.split_once(',') {
            Some((s, a)) => (s, a),
            None if anc_sites.is_empty() => (label, ""),
            None if sys_sites.is_empty() => ("", label),
            None => {
                return Err(AqecError::UnknownLabel(format!(
                    "label '{label}' is missing the system,ancilla separator"
                )))
            }
        };
        if sys_part.len() != sys_sites.len() || anc_part.len() != anc_sites.len() {
            return Err(AqecError::UnknownLabel(format!(
                "label '{label}' does not match {} system / {} ancilla sites",
                sys_sites.len(),
                anc_sites.len()
            )));
        }
        let mut bits = vec![0u8; self.n_sites()];
        for (part, sites) in [(sys_part, &sys_sites), (anc_part, &anc_sites)] {
            for (ch, &site) in part.chars().zip(sites.iter()) {
                bits[site] = match ch {
                    '0' => 0,
                    '1' => 1,
                    _ => {
                        return Err(AqecError::UnknownLabel(format!(
                            "label '{label}' contains non-bit character '{ch}'"
                        )))
                    }
                };
            }
        }
        self.index_of_bits(&bits)
    }
}

/// Construct a [`HilbertSpace`]; free-function form of [`HilbertSpace::new`].
pub fn hilbert_space(site_dims: Vec<usize>, site_roles: Vec<SiteRole>) -> Result<HilbertSpace> {
    HilbertSpace::new(site_dims, site_roles)
}

/// An ordered, labeled basis: either the full product basis of a space or a
/// restriction to a subset of its product states.
///
/// Restricted bases let models keep only the dynamically relevant states (for
/// example the 14 codeword + funnel states of the two-codeword model) while
/// every matrix element still refers back to full-space product states.
#[derive(Debug, Clone, PartialEq)]
pub struct Basis {
    space: HilbertSpace,
    labels: Vec<String>,
    indices: Vec<usize>,
    restricted: bool,
}

impl Basis {
    /// The full product basis in dense-index order.
    pub fn full(space: HilbertSpace) -> Self {
        let labels = (0..space.total_dim()).map(|i| space.label_of_index(i)).collect();
        let indices = (0..space.total_dim()).collect();
        Self { space, labels, indices, restricted: false }
    }

    /// A basis restricted to the given labels, kept in the given order.
    ///
    /// Errors on unknown or duplicated labels.
    pub fn restricted<S: AsRef<str>>(space: HilbertSpace, labels: &[S]) -> Result<Self> {
        let mut seen = std::collections::HashSet::new();
        let mut canon = Vec::with_capacity(labels.len());
        let mut indices = Vec::with_capacity(labels.len());
        for l in labels {
            let idx = space.index_of_label(l.as_ref())?;
            if !seen.insert(idx) {
                return Err(AqecError::InvalidParameter(format!(
                    "duplicate basis label '{}'",
                    l.as_ref()
                )));
            }
            canon.push(space.label_of_index(idx));
            indices.push(idx);
        }
        if canon.is_empty() {
            return Err(AqecError::InvalidParameter("empty basis".into()));
        }
        Ok(Self { space, labels: canon, indices, restricted: true })
    }

    pub fn space(&self) -> &HilbertSpace {
        &self.space
    }

    /// Number of basis states.
    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn is_restricted(&self) -> bool {
        self.restricted
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, position: usize) -> &str {
        &self.labels[position]
    }

    /// Dense full-space index of basis position `position`.
    pub fn full_index(&self, position: usize) -> usize {
        self.indices[position]
    }

    /// Basis position of a label.
    pub fn position_of_label(&self, label: &str) -> Result<usize> {
        let idx = self.space.index_of_label(label)?;
        self.indices
            .iter()
            .position(|&i| i == idx)
            .ok_or_else(|| AqecError::UnknownLabel(format!("label '{label}' not in basis")))
    }

    /// Basis ket for one of the labels.
    pub fn ket(&self, label: &str) -> Result<Ket> {
        let pos = self.position_of_label(label)?;
        let mut amps = Array1::zeros(self.dim());
        amps[pos] = c(1.0, 0.0);
        Ok(Ket { basis: self.clone(), amps })
    }
}

/// A pure state expressed in a [`Basis`].
#[derive(Debug, Clone)]
pub struct Ket {
    pub basis: Basis,
    pub amps: Array1<C64>,
}

impl Ket {
    pub fn new(basis: Basis, amps: Array1<C64>) -> Result<Self> {
        if amps.len() != basis.dim() {
            return Err(AqecError::DimensionMismatch(format!(
                "{} amplitudes for a {}-state basis",
                amps.len(),
                basis.dim()
            )));
        }
        Ok(Self { basis, amps })
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Unit-normalized copy. Errors on (numerically) zero vectors.
    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if n < 1e-300 {
            return Err(AqecError::InvalidParameter("cannot normalize zero vector".into()));
        }
        Ok(Self { basis: self.basis.clone(), amps: self.amps.mapv(|a| a / n) })
    }

    /// Inner product `<self|other>`.
    pub fn dot(&self, other: &Ket) -> Result<C64> {
        if self.basis != other.basis {
            return Err(AqecError::DimensionMismatch("kets on different bases".into()));
        }
        Ok(self.amps.iter().zip(other.amps.iter()).map(|(a, b)| a.conj() * b).sum())
    }

    /// Outer product `|self><self|` as a density operator.
    pub fn projector(&self) -> Operator {
        let d = self.dim();
        let mut m = Array2::zeros((d, d));
        for i in 0..d {
            for j in 0..d {
                m[(i, j)] = self.amps[i] * self.amps[j].conj();
            }
        }
        Operator { basis: self.basis.clone(), matrix: m }
    }
}

/// Basis ket of the full product basis for a label such as `"010,11"`.
pub fn basis_ket(space: &HilbertSpace, label: &str) -> Result<Ket> {
    Basis::full(space.clone()).ket(label)
}

/// A dense operator on a [`Basis`].
#[derive(Debug, Clone)]
pub struct Operator {
    pub basis: Basis,
    pub matrix: Array2<C64>,
}

impl Operator {
    pub fn new(basis: Basis, matrix: Array2<C64>) -> Result<Self> {
        if matrix.nrows() != basis.dim() || matrix.ncols() != basis.dim() {
            return Err(AqecError::DimensionMismatch(format!(
                "{}x{} matrix on a {}-state basis",
                matrix.nrows(),
                matrix.ncols(),
                basis.dim()
            )));
        }
        Ok(Self { basis, matrix })
    }

    pub fn zeros(basis: Basis) -> Self {
        let d = basis.dim();
        Self { basis, matrix: Array2::zeros((d, d)) }
    }

    pub fn identity(basis: Basis) -> Self {
        let d = basis.dim();
        Self { basis, matrix: Array2::eye(d) }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Hermitian adjoint.
    pub fn dagger(&self) -> Self {
        Self { basis: self.basis.clone(), matrix: self.matrix.t().mapv(|a| a.conj()) }
    }

    pub fn scale(&self, s: C64) -> Self {
        Self { basis: self.basis.clone(), matrix: self.matrix.mapv(|a| a * s) }
    }

    pub fn add(&self, other: &Operator) -> Result<Self> {
        self.check_same_basis(other)?;
        Ok(Self { basis: self.basis.clone(), matrix: &self.matrix + &other.matrix })
    }

    pub fn sub(&self, other: &Operator) -> Result<Self> {
        self.check_same_basis(other)?;
        Ok(Self { basis: self.basis.clone(), matrix: &self.matrix - &other.matrix })
    }

    /// Operator product `self * other`.
    pub fn mul(&self, other: &Operator) -> Result<Self> {
        self.check_same_basis(other)?;
        Ok(Self { basis: self.basis.clone(), matrix: self.matrix.dot(&other.matrix) })
    }

    /// Apply to a ket.
    pub fn apply(&self, ket: &Ket) -> Result<Ket> {
        if self.basis != ket.basis {
            return Err(AqecError::DimensionMismatch("operator/ket basis mismatch".into()));
        }
        Ok(Ket { basis: ket.basis.clone(), amps: self.matrix.dot(&ket.amps) })
    }

    pub fn trace(&self) -> C64 {
        self.matrix.diag().sum()
    }

    pub fn norm_fro(&self) -> f64 {
        self.matrix.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn norm_max(&self) -> f64 {
        self.matrix.iter().map(|a| a.norm()).fold(0.0, f64::max)
    }

    /// Max-norm deviation from Hermiticity.
    pub fn hermiticity_defect(&self) -> f64 {
        let d = self.dim();
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in i..d {
                worst = worst.max((self.matrix[(i, j)] - self.matrix[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol
    }

    /// Submatrix of this operator on a restricted basis of the same space.
    ///
    /// Matrix elements between retained labels are kept verbatim; everything
    /// else is dropped (the restriction of the operator to the subspace).
    pub fn restrict_to(&self, basis: &Basis) -> Result<Operator> {
        if basis.space() != self.basis.space() {
            return Err(AqecError::DimensionMismatch(
                "restriction target lives on a different space".into(),
            ));
        }
        if self.basis.is_restricted() {
            return Err(AqecError::Structure(
                "can only restrict an operator expressed on the full basis".into(),
            ));
        }
        let d = basis.dim();
        let mut m = Array2::zeros((d, d));
        for i in 0..d {
            for j in 0..d {
                m[(i, j)] = self.matrix[(basis.full_index(i), basis.full_index(j))];
            }
        }
        Ok(Operator { basis: basis.clone(), matrix: m })
    }

    fn check_same_basis(&self, other: &Operator) -> Result<()> {
        if self.basis != other.basis {
            return Err(AqecError::DimensionMismatch("operators on different bases".into()));
        }
        Ok(())
    }
}

/// Single-site spin operator embedded in the full product basis of `space`.
pub fn single_site_op(
    space: &HilbertSpace,
    site: usize,
    kind: SpinComponent,
) -> Result<Operator> {
    embed_product(space, &[(site, kind)])
}

/// Product of single-site operators on distinct sites, identity elsewhere.
///
/// Errors if a site index is out of range or repeated.
pub fn embed_product(
    space: &HilbertSpace,
    factors: &[(usize, SpinComponent)],
) -> Result<Operator> {
    let n = space.n_sites();
    let mut per_site: Vec<Option<SpinComponent>> = vec![None; n];
    for &(site, kind) in factors {
        if site >= n {
            return Err(AqecError::InvalidSite(format!("site {site} out of range (n={n})")));
        }
        if per_site[site].is_some() {
            return Err(AqecError::InvalidSite(format!("site {site} repeated in product")));
        }
        per_site[site] = Some(kind);
    }
    let mut m = Array2::from_diag(&Array1::from_elem(1, c(1.0, 0.0)));
    for slot in per_site {
        let local = match slot {
            Some(kind) => kind.local_matrix(),
            None => Array2::eye(2),
        };
        m = kron(&m, &local);
    }
    Operator::new(Basis::full(space.clone()), m)
}

/// Validate that `rho` is a density matrix: Hermitian (max defect <= 1e-12),
/// unit trace (|tr - 1| <= 1e-10) and PSD (min eigenvalue >= -1e-10).
pub fn validate_density(rho: &Operator) -> Result<()> {
    let h = rho.hermiticity_defect();
    if h > 1e-12 {
        return Err(AqecError::Structure(format!(
            "density matrix not Hermitian (defect {h:.3e})"
        )));
    }
    let tr = rho.trace();
    if (tr - c(1.0, 0.0)).norm() > 1e-10 {
        return Err(AqecError::Structure(format!(
            "density matrix trace {} != 1",
            tr.re
        )));
    }
    let (vals, _) = rho.matrix.eigh(UPLO::Lower)?;
    let min = vals.iter().cloned().fold(f64::INFINITY, f64::min);
    if min < -1e-10 {
        return Err(AqecError::Structure(format!(
            "density matrix not PSD (min eigenvalue {min:.3e})"
        )));
    }
    Ok(())
}
