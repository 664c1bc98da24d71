use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::model::ModelParams;
use crate::polybasis::{scaled_hermite_coeffs, HermiteExpansion};
use crate::{Error, Result};

/// Largest degree accepted by [`best_poly_oracle`].
pub const ORACLE_DEGREE_LIMIT: usize = 16;

/// Normal equations above this condition number are rejected.
pub const MAX_CONDITION: f64 = 1e12;

/// Normal equations of the best degree-`d` univariate predictor of `Z_i`
/// from `X'_i`, written in `H_j(x / scale)` with
/// `scale = sqrt(gamma^2 + sigma^2)`.
///
/// `X'_i` is a two-component mixture: `N(0, sigma^2)` with probability
/// `1 - p` and `N(0, scale^2)` with probability `p`.
#[derive(Debug, Clone)]
pub struct MomentOracle {
    pub d: usize,
    pub scale: f64,
    /// `G_jl = E[H_j(X'/scale) H_l(X'/scale)]`.
    pub gram: DMatrix<f64>,
    /// `b_j = E[H_j(X'/scale) Z]`.
    pub b: DVector<f64>,
    /// `E[Z^2]`.
    pub c: f64,
}

impl MomentOracle {
    pub fn new(params: &ModelParams, d: usize) -> Result<Self> {
        params.validate()?;
        if params.latent_mode != crate::model::LatentMode::SpikeGaussian {
            return Err(Error::Unsupported(
                "the moment oracle requires the spike-Gaussian latent".into(),
            ));
        }
        MomentOracle::from_scalars(params.on_probability(), params.gamma, params.sigma, d)
    }

    /// Oracle for on-probability `p`, slab std `gamma` and noise std `sigma`.
    pub fn from_scalars(p: f64, gamma: f64, sigma: f64, d: usize) -> Result<Self> {
        if d > ORACLE_DEGREE_LIMIT {
            return Err(Error::DegreeLimit {
                degree: d,
                limit: ORACLE_DEGREE_LIMIT,
            });
        }
        let scale = (gamma * gamma + sigma * sigma).sqrt();
        if scale == 0.0 {
            return Err(Error::Domain("gamma and sigma are both zero".into()));
        }
        // On the slab X'/scale is standard normal, so the basis is
        // orthonormal there. On the spike X'/scale = t y with y standard
        // normal, and H_j(t y) = sum_r a_jr H_r(y).
        let t = sigma / scale;
        let expand: Vec<Vec<f64>> = (0..=d).map(|j| scaled_hermite_coeffs(j, t)).collect();
        let gram = DMatrix::from_fn(d + 1, d + 1, |j, l| {
            let spike: f64 = expand[j].iter().zip(&expand[l]).map(|(a, b)| a * b).sum();
            let slab = if j == l { 1.0 } else { 0.0 };
            (1.0 - p) * spike + p * slab
        });
        // Z = (gamma^2 / scale) U + independent part on the slab, U = X'/scale
        let mut b = DVector::zeros(d + 1);
        if d >= 1 {
            b[1] = p * gamma * gamma / scale;
        }
        Ok(MomentOracle {
            d,
            scale,
            gram,
            b,
            c: p * gamma * gamma,
        })
    }

    /// Ratio of extreme eigenvalues of the Gram matrix.
    pub fn condition(&self) -> f64 {
        let eig = self.gram.clone().symmetric_eigenvalues();
        let max = eig.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let min = eig.iter().cloned().fold(f64::INFINITY, f64::min);
        if min <= 0.0 {
            f64::INFINITY
        } else {
            max / min
        }
    }

    /// Coefficients `G^{-1} b` and the per-coordinate risk `c - b^T G^{-1} b`.
    pub fn solve(&self) -> Result<(HermiteExpansion, f64)> {
        let condition = self.condition();
        if !(condition <= MAX_CONDITION) {
            return Err(Error::IllConditioned {
                degree: self.d,
                condition,
            });
        }
        let chol = self.gram.clone().cholesky().ok_or(Error::IllConditioned {
            degree: self.d,
            condition,
        })?;
        let coeffs = chol.solve(&self.b);
        let explained = self.b.dot(&coeffs);
        let risk = (self.c - explained).max(0.0);
        Ok((
            HermiteExpansion::new(self.scale, coeffs.iter().cloned().collect())?,
            risk,
        ))
    }
}

/// Best degree-`d` estimator without mixed monomials and its exact risk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleFit {
    pub d: usize,
    /// Univariate map applied to every `X'_i`.
    pub expansion: HermiteExpansion,
    /// `E[(f(X'_i) - Z_i)^2]`.
    pub per_coordinate_risk: f64,
    /// `sum_i w_i^2` times the per-coordinate risk.
    pub risk: f64,
}

/// Exact population risk of the best degree-`d` polynomial predictor on the
/// spike-Gaussian, orthogonal-dictionary instance.
pub fn best_poly_oracle(params: &ModelParams, d: usize) -> Result<OracleFit> {
    let w2 = params.w_norm_sq();
    if params.gamma == 0.0 && params.sigma == 0.0 {
        params.validate()?;
        return Ok(OracleFit {
            d,
            expansion: HermiteExpansion::zero(1.0),
            per_coordinate_risk: 0.0,
            risk: 0.0,
        });
    }
    let oracle = MomentOracle::new(params, d)?;
    let (expansion, per_coordinate_risk) = oracle.solve()?;
    Ok(OracleFit {
        d,
        expansion,
        per_coordinate_risk,
        risk: w2 * per_coordinate_risk,
    })
}

fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// `(1/4) gamma^2 k / (1 + sqrt(k/n) (d+1)^(3d+2) (1 + (gamma/sigma)^d))^2`,
/// computed in the log domain.
pub fn lower_bound_thm1(params: &ModelParams, d: usize) -> Result<f64> {
    params.validate()?;
    params.check_lower_bound_regime()?;
    let k = params.k as f64;
    let trivial = 0.25 * params.gamma * params.gamma * k;
    if trivial == 0.0 {
        return Ok(0.0);
    }
    if params.sigma == 0.0 {
        return Ok(if d == 0 {
            trivial / (1.0 + 2.0 * (k / params.n as f64).sqrt()).powi(2)
        } else {
            0.0
        });
    }
    let df = d as f64;
    let ln_ratio_pow = if d == 0 {
        0.0
    } else {
        df * (params.gamma / params.sigma).ln()
    };
    let ln_term = 0.5 * (k / params.n as f64).ln()
        + (3.0 * df + 2.0) * (df + 1.0).ln()
        + softplus(ln_ratio_pow);
    Ok(trivial * (-2.0 * softplus(ln_term)).exp())
}
