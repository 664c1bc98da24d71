//! Browser bindings for three interactive views: the ReLU approximant, the
//! polynomial soft threshold and exact oracle risk against degree.
//!
//! Each export returns a JSON string; the plain Rust functions behind them
//! are usable and tested natively.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use relupoly::estimators::soft_threshold;
use relupoly::estimators::{best_poly_oracle, lower_bound_thm1, ORACLE_DEGREE_LIMIT};
use relupoly::model::ModelParams;
use relupoly::relu_approx::{
    build_poly_soft_threshold, build_relu_poly, certify_soft_threshold, relu, sup_error_profile,
    ReluPolySpec, SoftThresholdPolySpec, CERTIFICATION_GRID,
};
use relupoly::Result;

/// Points of the error grid behind the reported sup errors.
const ERROR_GRID: usize = 2_000;
const MAX_PLOT_POINTS: usize = 4_000;

fn linspace(a: f64, b: f64, points: usize) -> Vec<f64> {
    let points = points.clamp(2, MAX_PLOT_POINTS);
    (0..points)
        .map(|i| a + (b - a) * i as f64 / (points - 1) as f64)
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct ReluCurve {
    pub d: usize,
    pub beta: f64,
    pub x: Vec<f64>,
    pub relu: Vec<f64>,
    pub poly: Vec<f64>,
    pub err_neg: f64,
    pub err_pos: f64,
    pub bound_neg: f64,
    pub bound_pos: f64,
}

/// Degree-`d` ReLU approximant on `[-r, r]` with transition width `tau`.
pub fn relu_curve(d: usize, tau: f64, r: f64, points: usize) -> Result<ReluCurve> {
    let spec = ReluPolySpec::new(d, tau, r)?;
    let p = build_relu_poly(&spec)?;
    let x = linspace(-r, r, points);
    let profile = sup_error_profile(&p, relu, (-r, r), tau, ERROR_GRID)?;
    Ok(ReluCurve {
        d,
        beta: spec.beta,
        relu: x.iter().map(|&v| relu(v)).collect(),
        poly: x.iter().map(|&v| p.eval(v)).collect(),
        x,
        err_neg: profile.negative.map_or(0.0, |e| e.sup),
        err_pos: profile.positive.map_or(0.0, |e| e.sup),
        bound_neg: spec.bound_negative(),
        bound_pos: spec.bound_positive(),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SoftThresholdCurve {
    pub d: usize,
    pub d0: usize,
    pub below_schedule: bool,
    pub m_tau: f64,
    pub x: Vec<f64>,
    pub soft: Vec<f64>,
    pub rho: Vec<f64>,
    pub flat_error: f64,
    pub flat_limit: f64,
    pub linear_error: f64,
    pub linear_limit: f64,
}

/// Polynomial soft threshold at `tau` on `[-M_tau, M_tau]`. `degree = 0`
/// selects the calibrated degree.
pub fn soft_threshold_curve(
    tau: f64,
    m: f64,
    eps: f64,
    degree: usize,
    points: usize,
) -> Result<SoftThresholdCurve> {
    let spec = if degree == 0 {
        SoftThresholdPolySpec::calibrated(tau, m, eps)?
    } else {
        SoftThresholdPolySpec::new(tau, m, eps, degree)?
    };
    let d0 = spec.calibrated_degree()?;
    let st = build_poly_soft_threshold(&spec)?;
    let cert = certify_soft_threshold(&st, CERTIFICATION_GRID);
    let x = linspace(-spec.m_tau, spec.m_tau, points);
    Ok(SoftThresholdCurve {
        d: spec.d,
        d0,
        below_schedule: st.below_schedule,
        m_tau: spec.m_tau,
        soft: x.iter().map(|&v| soft_threshold(tau, v)).collect(),
        rho: x.iter().map(|&v| st.eval(v)).collect(),
        x,
        flat_error: cert.flat_error,
        flat_limit: cert.flat_limit,
        linear_error: cert.linear_error,
        linear_limit: cert.linear_limit,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct RiskRow {
    pub d: usize,
    pub oracle_risk: f64,
    /// `None` outside the regime where the bound is stated.
    pub lower_bound: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RiskCurve {
    pub trivial_risk: f64,
    pub rows: Vec<RiskRow>,
}

/// Exact risk of the best coordinatewise polynomial of each degree
/// `0..=dmax` under the spike-Gaussian model with identity dictionary.
pub fn oracle_risk_curve(
    n: usize,
    k: usize,
    sigma: f64,
    gamma: f64,
    dmax: usize,
) -> Result<RiskCurve> {
    let params = ModelParams::spike(n, k, sigma, gamma);
    params.validate()?;
    let dmax = dmax.min(ORACLE_DEGREE_LIMIT);
    let rows = (0..=dmax)
        .map(|d| {
            Ok(RiskRow {
                d,
                oracle_risk: best_poly_oracle(&params, d)?.risk,
                lower_bound: lower_bound_thm1(&params, d).ok(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RiskCurve {
        trivial_risk: params.on_probability() * gamma * gamma * params.w_norm_sq(),
        rows,
    })
}

fn to_js<T: Serialize>(r: Result<T>) -> std::result::Result<String, JsError> {
    let v = r.map_err(|e| JsError::new(&e.to_string()))?;
    serde_json::to_string(&v).map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen(js_name = reluCurve)]
pub fn relu_curve_js(
    d: usize,
    tau: f64,
    r: f64,
    points: usize,
) -> std::result::Result<String, JsError> {
    to_js(relu_curve(d, tau, r, points))
}

#[wasm_bindgen(js_name = softThresholdCurve)]
pub fn soft_threshold_curve_js(
    tau: f64,
    m: f64,
    eps: f64,
    degree: usize,
    points: usize,
) -> std::result::Result<String, JsError> {
    to_js(soft_threshold_curve(tau, m, eps, degree, points))
}

#[wasm_bindgen(js_name = oracleRiskCurve)]
pub fn oracle_risk_curve_js(
    n: usize,
    k: usize,
    sigma: f64,
    gamma: f64,
    dmax: usize,
) -> std::result::Result<String, JsError> {
    to_js(oracle_risk_curve(n, k, sigma, gamma, dmax))
}
