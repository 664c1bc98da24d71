//! Predictors of `Y = <w, Z>` from `X`: thresholding networks, their
//! polynomial surrogate, the optimal linear map, the Bayes posterior mean and
//! the best coordinatewise polynomial.

mod oracle;

pub use oracle::{
    best_poly_oracle, lower_bound_thm1, MomentOracle, OracleFit, ORACLE_DEGREE_LIMIT,
};

use serde::{Deserialize, Serialize};

use crate::model::{Dictionary, LatentMode, ModelParams, Sample};
use crate::polybasis::HermiteExpansion;
use crate::relu_approx::SoftThresholdPoly;
use crate::{Error, Result};

/// Default constant `c` in the threshold `c sigma sqrt((1 + mu) log m) + 2 mu M`.
pub const DEFAULT_THRESHOLD_CONSTANT: f64 = 2.0;

/// `sgn(x) max(0, |x| - tau)`.
pub fn soft_threshold(tau: f64, x: f64) -> f64 {
    let shrunk = x.abs() - tau;
    if shrunk > 0.0 {
        shrunk.copysign(x)
    } else {
        0.0
    }
}

/// `tau = c sigma sqrt((1 + mu) log m) + 2 mu M`.
pub fn default_threshold(c: f64, sigma: f64, mu: f64, m: usize, l1_cap: f64) -> f64 {
    c * sigma * ((1.0 + mu) * (m as f64).ln()).sqrt() + 2.0 * mu * l1_cap
}

/// [`default_threshold`] for a model and dictionary.
pub fn threshold_for(c: f64, params: &ModelParams, dict: &Dictionary) -> f64 {
    default_threshold(c, params.sigma, dict.mu(), params.m, params.l1_cap())
}

fn check_shapes(dict: &Dictionary, w: &[f64], x: &[f64]) -> Result<()> {
    if w.len() != dict.m() || x.len() != dict.n() {
        return Err(Error::Shape(format!(
            "dictionary is {}x{}, got w of length {} and X of length {}",
            dict.n(),
            dict.m(),
            w.len(),
            x.len()
        )));
    }
    Ok(())
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| u * v).sum()
}

/// `Zhat = soft_threshold(tau, A^T X)` coordinatewise, `Yhat = <w, Zhat>`.
pub fn estimate_nn(dict: &Dictionary, w: &[f64], tau: f64, x: &[f64]) -> Result<(f64, Vec<f64>)> {
    check_shapes(dict, w, x)?;
    let zhat: Vec<f64> = dict
        .apply_transpose(x)
        .into_iter()
        .map(|v| soft_threshold(tau, v))
        .collect();
    Ok((dot(w, &zhat), zhat))
}

/// Output of the polynomial network.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyEstimate {
    pub yhat: f64,
    pub zhat: Vec<f64>,
    /// Some coordinate of `A^T X` fell outside `[-M_tau, M_tau]`.
    pub extrapolated: bool,
}

/// `Zhat = rho(A^T X)` coordinatewise with the polynomial soft threshold.
pub fn estimate_poly(
    dict: &Dictionary,
    w: &[f64],
    st: &SoftThresholdPoly,
    x: &[f64],
) -> Result<PolyEstimate> {
    check_shapes(dict, w, x)?;
    let xprime = dict.apply_transpose(x);
    let extrapolated = xprime.iter().any(|&v| st.is_extrapolation(v));
    let zhat: Vec<f64> = xprime.iter().map(|&v| st.eval(v)).collect();
    Ok(PolyEstimate {
        yhat: dot(w, &zhat),
        zhat,
        extrapolated,
    })
}

fn require_orthogonal_spike(
    params: &ModelParams,
    dict: Option<&Dictionary>,
    what: &str,
) -> Result<()> {
    params.validate()?;
    if params.latent_mode != LatentMode::SpikeGaussian {
        return Err(Error::Unsupported(format!(
            "{what} requires the spike-Gaussian latent"
        )));
    }
    if let Some(d) = dict {
        d.check_params(params)?;
        if !d.is_orthogonal() {
            return Err(Error::Unsupported(format!(
                "{what} requires an orthogonal dictionary (mu = {})",
                d.mu()
            )));
        }
    }
    Ok(())
}

/// Linear map `Yhat = <wtilde, X>`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearPredictor {
    pub wtilde: Vec<f64>,
    /// `||wtilde||_2`.
    pub r: f64,
}

impl LinearPredictor {
    pub fn predict(&self, x: &[f64]) -> f64 {
        dot(&self.wtilde, x)
    }

    /// Population risk `||w||^2 p gamma^2 sigma^2 / (p gamma^2 + sigma^2)`
    /// of the optimal map, `p = k/n`.
    pub fn closed_form_risk(params: &ModelParams) -> f64 {
        let signal = params.on_probability() * params.gamma * params.gamma;
        let noise = params.sigma * params.sigma;
        if signal + noise == 0.0 {
            return 0.0;
        }
        params.w_norm_sq() * signal * noise / (signal + noise)
    }
}

/// Least-squares linear predictor on an orthogonal dictionary:
/// `wtilde = c A w` with `c = p gamma^2 / (p gamma^2 + sigma^2)`.
pub fn optimal_linear(params: &ModelParams, dict: &Dictionary) -> Result<LinearPredictor> {
    require_orthogonal_spike(params, Some(dict), "the optimal linear predictor")?;
    let signal = params.on_probability() * params.gamma * params.gamma;
    let total = signal + params.sigma * params.sigma;
    let shrink = if total == 0.0 { 0.0 } else { signal / total };
    let wtilde: Vec<f64> = dict
        .apply(&params.w)
        .into_iter()
        .map(|v| shrink * v)
        .collect();
    let r = wtilde.iter().map(|v| v * v).sum::<f64>().sqrt();
    Ok(LinearPredictor { wtilde, r })
}

/// Posterior mean `E[Z_i | X'_i]` for the spike-Gaussian latent on an
/// orthogonal dictionary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BayesPosterior {
    pub p: f64,
    pub gamma: f64,
    pub sigma: f64,
}

impl BayesPosterior {
    pub fn new(params: &ModelParams) -> Result<Self> {
        require_orthogonal_spike(params, None, "the Bayes posterior mean")?;
        Ok(BayesPosterior {
            p: params.on_probability(),
            gamma: params.gamma,
            sigma: params.sigma,
        })
    }

    /// `pi_1(x) gamma^2 / (gamma^2 + sigma^2) x`, with the posterior weight
    /// `pi_1` of the slab evaluated as a logistic of the log-odds.
    pub fn eval(&self, x: f64) -> f64 {
        let g2 = self.gamma * self.gamma;
        let s2 = g2 + self.sigma * self.sigma;
        if self.p <= 0.0 || g2 == 0.0 {
            return 0.0;
        }
        let wiener = g2 / s2 * x;
        if self.p >= 1.0 {
            return wiener;
        }
        if self.sigma == 0.0 {
            // the spike puts all its mass on x = 0
            return if x == 0.0 { 0.0 } else { wiener };
        }
        let s2_noise = self.sigma * self.sigma;
        let log_odds = self.p.ln() - (-self.p).ln_1p()
            + 0.5 * (s2_noise / s2).ln()
            + 0.5 * x * x * (1.0 / s2_noise - 1.0 / s2);
        let pi1 = if log_odds >= 0.0 {
            1.0 / (1.0 + (-log_odds).exp())
        } else {
            let e = log_odds.exp();
            e / (1.0 + e)
        };
        pi1 * wiener
    }
}

/// `E[Z | X' = x]` under the spike-Gaussian model.
pub fn bayes_posterior_mean(params: &ModelParams, xprime: f64) -> Result<f64> {
    Ok(BayesPosterior::new(params)?.eval(xprime))
}

/// A fitted predictor evaluated on one sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Estimator {
    Zero,
    Linear(LinearPredictor),
    SoftThreshold {
        tau: f64,
    },
    PolySoftThreshold(SoftThresholdPoly),
    Bayes(BayesPosterior),
    /// Coordinatewise univariate polynomial on `A^T X`.
    HermitePoly(HermiteExpansion),
}

/// Prediction with the extrapolation flag of the polynomial network.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub yhat: f64,
    pub extrapolated: bool,
}

impl Estimator {
    pub fn id(&self) -> String {
        match self {
            Estimator::Zero => "zero".into(),
            Estimator::Linear(_) => "linear".into(),
            Estimator::SoftThreshold { .. } => "nn".into(),
            Estimator::PolySoftThreshold(st) => format!("poly_d{}", st.spec.d),
            Estimator::Bayes(_) => "bayes".into(),
            Estimator::HermitePoly(e) => format!("hermite_d{}", e.degree()),
        }
    }

    /// Predicts `Y` from a sample using its cached `A^T X`.
    pub fn predict(&self, w: &[f64], sample: &Sample) -> Prediction {
        let xp = &sample.xprime;
        let plain = |yhat| Prediction {
            yhat,
            extrapolated: false,
        };
        match self {
            Estimator::Zero => plain(0.0),
            Estimator::Linear(lin) => plain(lin.predict(&sample.x)),
            Estimator::SoftThreshold { tau } => plain(
                w.iter()
                    .zip(xp)
                    .map(|(a, &v)| a * soft_threshold(*tau, v))
                    .sum(),
            ),
            Estimator::PolySoftThreshold(st) => {
                let mut extrapolated = false;
                let mut yhat = 0.0;
                for (a, &v) in w.iter().zip(xp) {
                    extrapolated |= st.is_extrapolation(v);
                    yhat += a * st.eval(v);
                }
                Prediction { yhat, extrapolated }
            }
            Estimator::Bayes(post) => plain(w.iter().zip(xp).map(|(a, &v)| a * post.eval(v)).sum()),
            Estimator::HermitePoly(e) => plain(w.iter().zip(xp).map(|(a, &v)| a * e.eval(v)).sum()),
        }
    }
}
