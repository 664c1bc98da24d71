//! Generative model `X = A Z + xi`, `Y = <w, Z>`.

use nalgebra::DMatrix;
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Maximum number of draws when enforcing the l1 cap on an exact-support latent.
pub const MAX_RESAMPLING_ATTEMPTS: usize = 1000;

/// Tolerance below which a dictionary counts as orthogonal.
pub const ORTHOGONALITY_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LatentMode {
    /// Each coordinate independently `0` w.p. `1 - k/n`, else `N(0, gamma^2)`.
    SpikeGaussian,
    /// Uniform `k`-subset support with `N(0, gamma^2)` entries, `||Z||_1 <= M`.
    ExactKSupport,
}

/// All scalars of the generative model plus the label vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub n: usize,
    pub m: usize,
    pub k: usize,
    pub sigma: f64,
    pub gamma: f64,
    /// l1 cap `M` on the latent; `None` selects the default `3 gamma (k + sqrt(k log m))`.
    #[serde(default)]
    pub l1_cap: Option<f64>,
    pub w: Vec<f64>,
    pub latent_mode: LatentMode,
}

impl ModelParams {
    /// Lower-bound instance: `m = n`, spike-Gaussian latent, `w` all ones.
    pub fn spike(n: usize, k: usize, sigma: f64, gamma: f64) -> Self {
        ModelParams {
            n,
            m: n,
            k,
            sigma,
            gamma,
            l1_cap: None,
            w: vec![1.0; n],
            latent_mode: LatentMode::SpikeGaussian,
        }
    }

    /// Upper-bound instance with an exactly `k`-sparse latent and `w` all ones.
    pub fn exact_support(n: usize, m: usize, k: usize, sigma: f64, gamma: f64) -> Self {
        ModelParams {
            n,
            m,
            k,
            sigma,
            gamma,
            l1_cap: None,
            w: vec![1.0; m],
            latent_mode: LatentMode::ExactKSupport,
        }
    }

    pub fn with_l1_cap(mut self, cap: f64) -> Self {
        self.l1_cap = Some(cap);
        self
    }

    pub fn with_w(mut self, w: Vec<f64>) -> Self {
        self.w = w;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.m == 0 {
            return Err(Error::Params("n and m must be positive".into()));
        }
        if self.w.len() != self.m {
            return Err(Error::Params(format!(
                "label vector has length {} but m = {}",
                self.w.len(),
                self.m
            )));
        }
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(Error::Params(format!(
                "sigma must be >= 0, got {}",
                self.sigma
            )));
        }
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return Err(Error::Params(format!(
                "gamma must be >= 0, got {}",
                self.gamma
            )));
        }
        if let Some(cap) = self.l1_cap {
            if !(cap > 0.0) {
                return Err(Error::Params(format!("l1 cap must be positive, got {cap}")));
            }
        }
        match self.latent_mode {
            LatentMode::SpikeGaussian => {
                if self.m != self.n {
                    return Err(Error::Params("spike-Gaussian latent requires m = n".into()));
                }
                if self.k > self.n {
                    return Err(Error::Params(format!(
                        "k = {} exceeds n = {}",
                        self.k, self.n
                    )));
                }
            }
            LatentMode::ExactKSupport => {
                if self.k > self.m {
                    return Err(Error::Params(format!(
                        "k = {} exceeds m = {}",
                        self.k, self.m
                    )));
                }
            }
        }
        Ok(())
    }

    /// Nonzero probability `k / n` of a spike-Gaussian coordinate.
    pub fn on_probability(&self) -> f64 {
        self.k as f64 / self.n as f64
    }

    /// `M`, defaulting to `3 gamma (k + sqrt(k log m))`.
    pub fn l1_cap(&self) -> f64 {
        self.l1_cap.unwrap_or_else(|| {
            let k = self.k as f64;
            3.0 * self.gamma * (k + (k * (self.m as f64).ln()).sqrt())
        })
    }

    pub fn w_norm_sq(&self) -> f64 {
        self.w.iter().map(|v| v * v).sum()
    }

    /// `||w||_inf`.
    pub fn w_sup(&self) -> f64 {
        self.w.iter().fold(0.0, |a, v| a.max(v.abs()))
    }

    /// Requirement of the polynomial lower bound: `k < n/2`.
    pub fn check_lower_bound_regime(&self) -> Result<()> {
        if 2 * self.k >= self.n {
            return Err(Error::Params(format!(
                "lower bound needs k < n/2, got k = {} with n = {}",
                self.k, self.n
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DictionaryKind {
    Identity,
    HaarOrthogonal,
    RandomSign,
}

/// Reference to a dictionary by construction recipe.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DictionarySpec {
    pub kind: DictionaryKind,
    pub n: usize,
    pub m: usize,
    #[serde(default)]
    pub seed: u64,
}

/// An `n x m` dictionary with its measured incoherence
/// `mu = max_ij |(A^T A - I)_ij|`.
///
/// The identity is kept implicit so very large orthogonal instances cost no
/// memory. Serialized as its [`DictionarySpec`] plus `mu`; deserializing
/// rebuilds the matrix from the recipe.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(into = "DictionaryRecord", try_from = "DictionaryRecord")]
pub struct Dictionary {
    spec: DictionarySpec,
    matrix: Option<DMatrix<f64>>,
    mu: f64,
}

#[derive(Serialize, Deserialize)]
struct DictionaryRecord {
    #[serde(flatten)]
    spec: DictionarySpec,
    #[serde(default)]
    mu: Option<f64>,
}

impl From<Dictionary> for DictionaryRecord {
    fn from(d: Dictionary) -> Self {
        DictionaryRecord {
            spec: d.spec,
            mu: Some(d.mu),
        }
    }
}

impl TryFrom<DictionaryRecord> for Dictionary {
    type Error = Error;

    fn try_from(r: DictionaryRecord) -> Result<Self> {
        build_dictionary(r.spec.kind, r.spec.n, r.spec.m, r.spec.seed)
    }
}

/// Builds a dictionary from its recipe.
pub fn build_dictionary(kind: DictionaryKind, n: usize, m: usize, seed: u64) -> Result<Dictionary> {
    if n == 0 || m == 0 {
        return Err(Error::Shape(
            "dictionary dimensions must be positive".into(),
        ));
    }
    let spec = DictionarySpec { kind, n, m, seed };
    match kind {
        DictionaryKind::Identity => {
            require_square(kind, n, m)?;
            Ok(Dictionary {
                spec,
                matrix: None,
                mu: 0.0,
            })
        }
        DictionaryKind::HaarOrthogonal => {
            require_square(kind, n, m)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let g = DMatrix::<f64>::from_fn(n, n, |_, _| rng.sample(StandardNormal));
            let qr = g.qr();
            let r = qr.r();
            let mut q = qr.q();
            for j in 0..n {
                if r[(j, j)] < 0.0 {
                    q.column_mut(j).neg_mut();
                }
            }
            let mu = incoherence(&q);
            Ok(Dictionary {
                spec,
                matrix: Some(q),
                mu,
            })
        }
        DictionaryKind::RandomSign => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let signs: Vec<bool> = (0..n * m).map(|_| rng.random::<bool>()).collect();
            let entry = 1.0 / (n as f64).sqrt();
            // column-major: entry (i, j) is signs[j * n + i]
            let a =
                DMatrix::from_iterator(n, m, signs.iter().map(|&s| if s { entry } else { -entry }));
            let mu = sign_incoherence(&signs, n, m);
            Ok(Dictionary {
                spec,
                matrix: Some(a),
                mu,
            })
        }
    }
}

fn require_square(kind: DictionaryKind, n: usize, m: usize) -> Result<()> {
    if n != m {
        return Err(Error::Shape(format!(
            "{kind:?} dictionary requires m = n, got n = {n}, m = {m}"
        )));
    }
    Ok(())
}

/// Incoherence of a `±1/sqrt(n)` matrix from packed signs: every Gram entry
/// is `(n - 2 * #disagreements) / n`.
fn sign_incoherence(signs: &[bool], n: usize, m: usize) -> f64 {
    let words = n.div_ceil(64);
    let packed: Vec<Vec<u64>> = (0..m)
        .map(|j| {
            let mut col = vec![0u64; words];
            for i in 0..n {
                if signs[j * n + i] {
                    col[i / 64] |= 1 << (i % 64);
                }
            }
            col
        })
        .collect();
    let mut worst = 0usize;
    for a in 0..m {
        for b in a + 1..m {
            let diff: u32 = packed[a]
                .iter()
                .zip(&packed[b])
                .map(|(x, y)| (x ^ y).count_ones())
                .sum();
            let dot = (n as i64 - 2 * diff as i64).unsigned_abs() as usize;
            worst = worst.max(dot);
        }
    }
    // diagonal entries are exactly 1
    worst as f64 / n as f64
}

/// `max_ij |(A^T A - I)_ij|`.
pub fn incoherence(a: &DMatrix<f64>) -> f64 {
    let m = a.ncols();
    let mut worst = 0.0f64;
    for i in 0..m {
        let ci = a.column(i);
        worst = worst.max((ci.dot(&ci) - 1.0).abs());
        for j in i + 1..m {
            worst = worst.max(ci.dot(&a.column(j)).abs());
        }
    }
    worst
}

impl Dictionary {
    pub fn spec(&self) -> DictionarySpec {
        self.spec
    }

    pub fn kind(&self) -> DictionaryKind {
        self.spec.kind
    }

    pub fn n(&self) -> usize {
        self.spec.n
    }

    pub fn m(&self) -> usize {
        self.spec.m
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn is_orthogonal(&self) -> bool {
        self.spec.n == self.spec.m && self.mu <= ORTHOGONALITY_TOLERANCE
    }

    /// Dense matrix; materializes the identity on demand.
    pub fn matrix(&self) -> DMatrix<f64> {
        match &self.matrix {
            Some(a) => a.clone(),
            None => DMatrix::identity(self.spec.n, self.spec.m),
        }
    }

    /// `A z`, touching only the nonzero columns.
    pub fn apply(&self, z: &[f64]) -> Vec<f64> {
        assert_eq!(z.len(), self.spec.m, "latent length must equal m");
        match &self.matrix {
            None => z.to_vec(),
            Some(a) => {
                let mut out = vec![0.0; self.spec.n];
                for (j, &zj) in z.iter().enumerate() {
                    if zj != 0.0 {
                        for (o, &v) in out.iter_mut().zip(a.column(j).iter()) {
                            *o += zj * v;
                        }
                    }
                }
                out
            }
        }
    }

    /// `A^T x`.
    pub fn apply_transpose(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.spec.n, "observation length must equal n");
        match &self.matrix {
            None => x.to_vec(),
            Some(a) => (0..self.spec.m)
                .map(|j| a.column(j).iter().zip(x).map(|(u, v)| u * v).sum())
                .collect(),
        }
    }

    pub fn check_params(&self, params: &ModelParams) -> Result<()> {
        if params.n != self.spec.n || params.m != self.spec.m {
            return Err(Error::Shape(format!(
                "model is {}x{} but dictionary is {}x{}",
                params.n, params.m, self.spec.n, self.spec.m
            )));
        }
        Ok(())
    }
}

/// One draw of the model with cached `A^T X`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub z: Vec<f64>,
    pub xi: Vec<f64>,
    pub x: Vec<f64>,
    pub xprime: Vec<f64>,
    pub y: f64,
    pub support: Vec<usize>,
}

/// Independent RNG stream for trial `trial` under master seed `seed`.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Draws a latent vector `Z`.
pub fn sample_latent<R: Rng + ?Sized>(params: &ModelParams, rng: &mut R) -> Result<Vec<f64>> {
    params.validate()?;
    let gamma = params.gamma;
    match params.latent_mode {
        LatentMode::SpikeGaussian => {
            let p = params.on_probability();
            Ok((0..params.m)
                .map(|_| {
                    if rng.random::<f64>() < p {
                        gamma * rng.sample::<f64, _>(StandardNormal)
                    } else {
                        0.0
                    }
                })
                .collect())
        }
        LatentMode::ExactKSupport => {
            let cap = params.l1_cap();
            for _ in 0..MAX_RESAMPLING_ATTEMPTS {
                let mut z = vec![0.0; params.m];
                for i in index::sample(rng, params.m, params.k) {
                    z[i] = gamma * rng.sample::<f64, _>(StandardNormal);
                }
                if z.iter().map(|v| v.abs()).sum::<f64>() <= cap {
                    return Ok(z);
                }
            }
            Err(Error::ResamplingExhausted {
                attempts: MAX_RESAMPLING_ATTEMPTS,
                cap,
            })
        }
    }
}

/// Draws `(Z, xi)` and assembles `X = A Z + xi`, `A^T X` and `Y = <w, Z>`.
pub fn sample_pair<R: Rng + ?Sized>(
    params: &ModelParams,
    dict: &Dictionary,
    rng: &mut R,
) -> Result<Sample> {
    dict.check_params(params)?;
    let z = sample_latent(params, rng)?;
    let noise: Vec<f64> = StandardNormal
        .sample_iter(&mut *rng)
        .take(params.n)
        .map(|e: f64| params.sigma * e)
        .collect();
    let mut x = dict.apply(&z);
    for (xi, e) in x.iter_mut().zip(&noise) {
        *xi += e;
    }
    let xprime = dict.apply_transpose(&x);
    let y = params.w.iter().zip(&z).map(|(a, b)| a * b).sum();
    let support = z
        .iter()
        .enumerate()
        .filter(|(_, v)| **v != 0.0)
        .map(|(i, _)| i)
        .collect();
    Ok(Sample {
        z,
        xi: noise,
        x,
        xprime,
        y,
        support,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_dictionary() {
        let d = build_dictionary(DictionaryKind::Identity, 8, 8, 3).unwrap();
        assert_eq!(d.mu(), 0.0);
        assert!(d.is_orthogonal());
        assert_eq!(incoherence(&d.matrix()), 0.0);
        assert!(build_dictionary(DictionaryKind::Identity, 8, 9, 0).is_err());
    }

    #[test]
    fn haar_is_orthogonal() {
        let d = build_dictionary(DictionaryKind::HaarOrthogonal, 64, 64, 17).unwrap();
        assert!(d.mu() <= 1e-10);
        let a = d.matrix();
        let gram = a.transpose() * &a;
        for i in 0..64 {
            for j in 0..64 {
                let target = if i == j { 1.0 } else { 0.0 };
                assert!((gram[(i, j)] - target).abs() <= 1e-10);
            }
        }
        assert!(build_dictionary(DictionaryKind::HaarOrthogonal, 4, 5, 0).is_err());
    }

    #[test]
    fn incoherence_of_duplicate_columns() {
        let mut a = DMatrix::<f64>::identity(4, 4);
        a.set_column(3, &a.column(0).clone_owned());
        assert_eq!(incoherence(&a), 1.0);
    }

    #[test]
    fn sign_incoherence_matches_brute_force() {
        let d = build_dictionary(DictionaryKind::RandomSign, 256, 512, 99).unwrap();
        let a = d.matrix();
        let mut brute = 0.0f64;
        for i in 0..512 {
            for j in 0..512 {
                let mut dot = 0.0;
                for r in 0..256 {
                    dot += a[(r, i)] * a[(r, j)];
                }
                let target = if i == j { 1.0 } else { 0.0 };
                brute = brute.max((dot - target).abs());
            }
        }
        assert!((d.mu() - brute).abs() < 1e-12);
        assert!((incoherence(&a) - brute).abs() < 1e-12);
        // column norms stay within mu of 1
        for j in 0..512 {
            assert!((a.column(j).norm_squared() - 1.0).abs() <= d.mu() + 1e-12);
        }
    }

    #[test]
    fn random_sign_shape_and_entries() {
        let d = build_dictionary(DictionaryKind::RandomSign, 16, 40, 1).unwrap();
        let a = d.matrix();
        assert_eq!((a.nrows(), a.ncols()), (16, 40));
        assert!(a.iter().all(|v| (v.abs() - 0.25).abs() < 1e-15));
        assert!(!d.is_orthogonal());
    }

    #[test]
    fn dictionary_serializes_by_recipe() {
        let d = build_dictionary(DictionaryKind::RandomSign, 32, 64, 5).unwrap();
        let text = serde_json::to_string(&d).unwrap();
        assert!(text.contains("\"kind\":\"random_sign\""));
        assert!(!text.contains("matrix"));
        let back: Dictionary = serde_json::from_str(&text).unwrap();
        assert_eq!(back.matrix(), d.matrix());
        assert_eq!(back.mu(), d.mu());
    }

    #[test]
    fn spike_with_zero_k_is_zero() {
        let p = ModelParams::spike(64, 0, 1.0, 3.0);
        let z = sample_latent(&p, &mut trial_rng(1, 0)).unwrap();
        assert!(z.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn spike_support_size() {
        let p = ModelParams::spike(4096, 8, 1.0, 1.0);
        let draws = 10_000;
        let total: usize = (0..draws)
            .map(|t| {
                let z = sample_latent(&p, &mut trial_rng(21, t)).unwrap();
                z.iter().filter(|v| **v != 0.0).count()
            })
            .sum();
        let mean = total as f64 / draws as f64;
        assert!((mean - 8.0).abs() <= 0.3, "mean support {mean}");
    }

    #[test]
    fn spike_all_on_variance() {
        let p = ModelParams::spike(4, 4, 1.0, 2.0);
        let mut rng = trial_rng(8, 0);
        let draws = 100_000 / 4;
        let mut acc = 0.0;
        let mut count = 0usize;
        for _ in 0..draws {
            for v in sample_latent(&p, &mut rng).unwrap() {
                acc += v * v;
                count += 1;
            }
        }
        let var = acc / count as f64;
        assert!((var - 4.0).abs() <= 0.12, "variance {var}");
    }

    #[test]
    fn exact_support_respects_cap() {
        let p = ModelParams::exact_support(32, 64, 5, 1.0, 2.0);
        let cap = p.l1_cap();
        assert!((cap - 6.0 * (5.0 + (5.0 * 64f64.ln()).sqrt())).abs() < 1e-12);
        for t in 0..200 {
            let z = sample_latent(&p, &mut trial_rng(4, t)).unwrap();
            assert_eq!(z.iter().filter(|v| **v != 0.0).count(), 5);
            assert!(z.iter().map(|v| v.abs()).sum::<f64>() <= cap);
        }
    }

    #[test]
    fn exact_support_tight_cap_errors() {
        let p = ModelParams::exact_support(32, 64, 5, 1.0, 2.0).with_l1_cap(1e-6);
        let err = sample_latent(&p, &mut trial_rng(4, 0)).unwrap_err();
        assert!(matches!(
            err,
            Error::ResamplingExhausted { attempts: 1000, .. }
        ));
    }

    #[test]
    fn noiseless_identity_observes_latent() {
        let p = ModelParams::spike(128, 10, 0.0, 1.5);
        let d = build_dictionary(DictionaryKind::Identity, 128, 128, 0).unwrap();
        let s = sample_pair(&p, &d, &mut trial_rng(3, 7)).unwrap();
        assert_eq!(s.x, s.z);
        assert_eq!(s.xprime, s.z);
    }

    #[test]
    fn zero_signal_gives_pure_noise() {
        let p = ModelParams::spike(64, 10, 1.0, 0.0);
        let d = build_dictionary(DictionaryKind::Identity, 64, 64, 0).unwrap();
        let s = sample_pair(&p, &d, &mut trial_rng(3, 7)).unwrap();
        assert_eq!(s.y, 0.0);
        assert_eq!(s.x, s.xi);
    }

    #[test]
    fn sample_invariants() {
        let p = ModelParams::exact_support(48, 96, 4, 0.7, 3.0);
        let d = build_dictionary(DictionaryKind::RandomSign, 48, 96, 12).unwrap();
        let a = d.matrix();
        for t in 0..100 {
            let s = sample_pair(&p, &d, &mut trial_rng(77, t)).unwrap();
            for i in 0..48 {
                let az: f64 = (0..96).map(|j| a[(i, j)] * s.z[j]).sum();
                assert!((s.x[i] - az - s.xi[i]).abs() <= 1e-12);
            }
            for j in 0..96 {
                let atx: f64 = (0..48).map(|i| a[(i, j)] * s.x[i]).sum();
                assert!((s.xprime[j] - atx).abs() <= 1e-12);
            }
            let y: f64 = p.w.iter().zip(&s.z).map(|(u, v)| u * v).sum();
            assert!((s.y - y).abs() <= 1e-12);
            let support: Vec<usize> = (0..96).filter(|&j| s.z[j] != 0.0).collect();
            assert_eq!(s.support, support);
        }
    }

    #[test]
    fn streams_are_reproducible() {
        let p = ModelParams::spike(256, 6, 1.0, 2.0);
        let d = build_dictionary(DictionaryKind::HaarOrthogonal, 256, 256, 2).unwrap();
        let a = sample_pair(&p, &d, &mut trial_rng(5, 41)).unwrap();
        let b = sample_pair(&p, &d, &mut trial_rng(5, 41)).unwrap();
        assert_eq!(a, b);
        let c = sample_pair(&p, &d, &mut trial_rng(5, 42)).unwrap();
        assert_ne!(a.xi, c.xi);
    }

    #[test]
    fn label_energy_matches_theory() {
        // E[Y^2] = gamma^2 (k/n) ||w||^2
        let n = 200;
        let w: Vec<f64> = (0..n)
            .map(|i| if i % 3 == 0 { -1.0 } else { 1.0 })
            .collect();
        let p = ModelParams::spike(n, 10, 1.0, 2.0).with_w(w);
        let expected = 4.0 * 10.0 / 200.0 * p.w_norm_sq();
        let draws = 20_000;
        let ys: Vec<f64> = (0..draws)
            .map(|t| {
                let z = sample_latent(&p, &mut trial_rng(9, t)).unwrap();
                let y: f64 = p.w.iter().zip(&z).map(|(a, b)| a * b).sum();
                y * y
            })
            .collect();
        let mean = ys.iter().sum::<f64>() / draws as f64;
        let var = ys.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (draws - 1) as f64;
        let se = (var / draws as f64).sqrt();
        assert!(
            (mean - expected).abs() <= 3.0 * se,
            "mean {mean} expected {expected} se {se}"
        );
    }

    #[test]
    fn noise_is_isotropic() {
        let n = 16;
        let p = ModelParams::spike(n, 0, 1.3, 1.0);
        let d = build_dictionary(DictionaryKind::Identity, n, n, 0).unwrap();
        let draws = 100_000;
        let mut cov = vec![0.0; n * n];
        for t in 0..draws {
            let s = sample_pair(&p, &d, &mut trial_rng(10, t)).unwrap();
            for i in 0..n {
                for j in 0..n {
                    cov[i * n + j] += s.xi[i] * s.xi[j];
                }
            }
        }
        let s2 = 1.3 * 1.3;
        for i in 0..n {
            for j in 0..n {
                let c = cov[i * n + j] / draws as f64;
                if i == j {
                    assert!((c - s2).abs() <= 0.05 * s2);
                } else {
                    assert!(c.abs() <= 0.05 * s2);
                }
            }
        }
    }

    #[test]
    fn params_validation() {
        assert!(ModelParams::spike(10, 3, 1.0, 1.0).validate().is_ok());
        let mut p = ModelParams::spike(10, 3, 1.0, 1.0);
        p.m = 12;
        p.w = vec![1.0; 12];
        assert!(p.validate().is_err());
        let p = ModelParams::spike(10, 3, 1.0, 1.0).with_w(vec![1.0; 9]);
        assert!(p.validate().is_err());
        assert!(ModelParams::spike(10, 11, 1.0, 1.0).validate().is_err());
        assert!(ModelParams::spike(10, 5, 1.0, 1.0)
            .check_lower_bound_regime()
            .is_err());
        assert!(ModelParams::spike(10, 4, 1.0, 1.0)
            .check_lower_bound_regime()
            .is_ok());
        let text = serde_json::to_string(&ModelParams::spike(4, 1, 1.0, 2.0)).unwrap();
        let back: ModelParams = serde_json::from_str(&text).unwrap();
        assert_eq!(back, ModelParams::spike(4, 1, 1.0, 2.0));
    }

    #[test]
    fn shape_mismatch_is_reported() {
        let p = ModelParams::spike(16, 2, 1.0, 1.0);
        let d = build_dictionary(DictionaryKind::Identity, 8, 8, 0).unwrap();
        assert!(matches!(
            sample_pair(&p, &d, &mut trial_rng(0, 0)),
            Err(Error::Shape(_))
        ));
    }
}
