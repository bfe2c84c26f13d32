//! Configuration and initial-state resolution shared by the subcommands.

use anyhow::{anyhow, bail, Context, Result};
use ndarray::{Array1, Array2};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use aqec_core::models::{fixtures, AqecModel, ModelConfig, OverlapMatrix, OverlapsConfig};
use aqec_core::ops::{c, Ket, Operator, C64};

/// The baseline flip model at unit rates.
pub const BASELINE_FLIP: &str = r#"{"model":"toy_flip","d":1.0,"r":1.0,"c":1.0}"#;

/// A model configuration together with where it came from (for provenance).
pub struct LoadedConfig {
    /// `"setA (builtin)"`, `"baseline flip model (builtin)"`, or a file path.
    pub origin: String,
    /// Exact JSON text the digest is computed over.
    pub text: String,
    pub config: ModelConfig,
}

impl LoadedConfig {
    pub fn provenance(&self) -> (&str, &str) {
        (&self.origin, &self.text)
    }
}

/// Resolve `--config`: a bundled set name (`setA`, ..., `setC_fastmix`) or a
/// JSON file path.
pub fn load_model_config(spec: &str) -> Result<LoadedConfig> {
    let (origin, text) = match fixtures::by_name(spec) {
        Some(text) => (format!("{spec} (builtin)"), text.to_string()),
        None => {
            let text = std::fs::read_to_string(spec)
                .with_context(|| format!("cannot read config {spec} (not a builtin set name)"))?;
            (spec.to_string(), text)
        }
    };
    let config = ModelConfig::from_json(&text)
        .with_context(|| format!("cannot parse model config from {origin}"))?;
    Ok(LoadedConfig { origin, text, config })
}

/// `--config` with the baseline flip model as the default.
pub fn load_or_baseline(spec: &Option<String>) -> Result<LoadedConfig> {
    match spec {
        Some(s) => load_model_config(s),
        None => baseline_flip(),
    }
}

/// The baseline flip model used when dynamics subcommands get no `--config`.
fn baseline_flip() -> Result<LoadedConfig> {
    Ok(LoadedConfig {
        origin: "baseline flip model (builtin)".into(),
        text: BASELINE_FLIP.into(),
        config: ModelConfig::from_json(BASELINE_FLIP)?,
    })
}

/// Parse `--error`: `1`..`n` (one flip) or `all`.
pub fn parse_error_spec(spec: &str, n_errors: usize) -> Result<Vec<usize>> {
    if spec.eq_ignore_ascii_case("all") {
        return Ok((0..n_errors).collect());
    }
    let k: usize = spec
        .parse()
        .map_err(|_| anyhow!("--error must be a 1-based index or \"all\", got {spec:?}"))?;
    if k == 0 || k > n_errors {
        let plural = if n_errors == 1 { "" } else { "s" };
        bail!("--error {k} out of range: this model has {n_errors} flip error{plural}");
    }
    Ok(vec![k - 1])
}

/// The state the error strikes: the configured codeword superposition for
/// two-codeword models, the lone codeword for the toy models.
pub fn initial_state(model: &AqecModel, config: &ModelConfig) -> Result<Ket> {
    if model.codewords.len() == 1 {
        Ok(model.codewords[0].clone())
    } else {
        Ok(model.codeword_superposition(&config.psi_amplitudes())?)
    }
}

/// Error branches for an overlap-weighted start: the identity (no error)
/// followed by every flip.
pub fn overlap_branches(model: &AqecModel) -> Vec<Operator> {
    let mut branches = vec![Operator::identity(model.basis.clone())];
    branches.extend(model.error_set.iter().cloned());
    branches
}

/// Resolve `--overlaps`: the bundled example (`example`), a seeded random set
/// (`random`), or a JSON file. Falls back to overlaps declared in the model
/// config. The returned string says which source was used.
pub fn resolve_overlaps(
    flag: &Option<String>,
    config: &ModelConfig,
    n_branches: usize,
    seed: u64,
) -> Result<Option<(OverlapMatrix, String)>> {
    match flag.as_deref() {
        Some("example") => {
            let parsed: OverlapsConfig = serde_json::from_str(fixtures::OVERLAPS_EXAMPLE)
                .context("bundled overlap example is malformed")?;
            Ok(Some((parsed.build()?, "example (builtin)".into())))
        }
        Some("random") => {
            Ok(Some((random_overlaps(n_branches, seed)?, format!("random (seed {seed})"))))
        }
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("cannot read overlaps file {path}"))?;
            let parsed: OverlapsConfig = serde_json::from_str(&text)
                .with_context(|| format!("cannot parse overlaps file {path}"))?;
            Ok(Some((parsed.build()?, path.to_string())))
        }
        None => Ok(config.overlaps()?.map(|m| (m, "declared by config".into()))),
    }
}

/// A random realizable overlap set: weights from the uniform simplex and a
/// Gram matrix of random unit bath vectors (PSD by construction, so the
/// corrupted state needs no projection).
fn random_overlaps(n: usize, seed: u64) -> Result<OverlapMatrix> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut weights: Vec<f64> = (0..n).map(|_| rng.random::<f64>() + 0.05).collect();
    let total: f64 = weights.iter().sum();
    for w in &mut weights {
        *w /= total;
    }
    let vectors: Vec<Array1<C64>> = (0..n)
        .map(|_| {
            let v = Array1::from_iter(
                (0..n).map(|_| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)),
            );
            let norm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
            v.mapv(|x| x / norm)
        })
        .collect();
    let mut g = Array2::<C64>::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            g[(i, j)] = if i == j {
                c(1.0, 0.0)
            } else {
                vectors[i].iter().zip(vectors[j].iter()).map(|(a, b)| a.conj() * b).sum()
            };
        }
    }
    Ok(OverlapMatrix::new(weights, g)?)
}
