//! Low-degree polynomial surrogates for ReLU and for the soft threshold.
//!
//! The ReLU approximant is built in four steps:
//! 1. anneal ReLU into the softplus `g_beta(x) = log(1 + e^(beta x)) / beta`
//!    with `beta = sqrt(pi d / (4 tau))`;
//! 2. interpolate `g_beta` by a degree-`d` Chebyshev polynomial on `[-1, 1]`;
//! 3. shift right by `tau` so the polynomial is nearly flat on `[-1 + tau, 0]`;
//! 4. dilate to `[-R, R]` by `p(x) = 2R f(x / 2R)`.
//!
//! Steps 3 and 4 are affine in `x`, so the result stays a single Chebyshev
//! series on a shifted interval and no basis conversion is needed.

use std::f64::consts::{LN_2, PI};
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::polybasis::{cheb_project, Polynomial};
use crate::{Error, Result};

/// Points per region used when certifying an approximation on a grid.
pub const CERTIFICATION_GRID: usize = 10_000;

/// Slack applied to the analytic error constants when certifying a
/// Chebyshev interpolant against bounds stated for the best approximation.
pub const INTERPOLATION_SLACK: f64 = 2.0;

/// `log(1 + e^(beta x)) / beta` without overflow.
pub fn softplus_annealed(beta: f64, x: f64) -> f64 {
    let t = beta * x;
    if t > 0.0 {
        x + (-t).exp().ln_1p() / beta
    } else {
        t.exp().ln_1p() / beta
    }
}

/// Semi-axis parameter of the largest Bernstein ellipse on which the
/// softplus is certified analytic: `(sqrt(4 beta^2 + pi^2) + pi) / (2 beta)`.
pub fn bernstein_rho(beta: f64) -> f64 {
    ((4.0 * beta * beta + PI * PI).sqrt() + PI) / (2.0 * beta)
}

/// Upper bound `(12 beta / pi) (1 + pi / (2 beta))^(-d)` on the degree-`d`
/// best-approximation error of `g_beta` on `[-1, 1]`. Requires `beta > pi`.
pub fn bernstein_bound(beta: f64, d: usize) -> Result<f64> {
    if !(beta > PI) {
        return Err(Error::Domain(format!(
            "the Bernstein-ellipse bound needs beta > pi, got {beta}"
        )));
    }
    let base = 1.0 + PI / (2.0 * beta);
    Ok(12.0 * beta / PI * (-(d as f64) * base.ln()).exp())
}

/// Parameters of the ReLU approximant on `[-R, R]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReluPolySpec {
    pub d: usize,
    pub tau: f64,
    pub r: f64,
    pub beta: f64,
}

impl ReluPolySpec {
    /// Spec with the annealing schedule `beta = sqrt(pi d / (4 tau))`.
    pub fn new(d: usize, tau: f64, r: f64) -> Result<Self> {
        let beta = (PI * d as f64 / (4.0 * tau)).sqrt();
        let spec = ReluPolySpec { d, tau, r, beta };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.d < 7 {
            return Err(Error::Spec(format!(
                "degree d = {} is too small; the construction requires d >= 7",
                self.d
            )));
        }
        if !(self.tau > 0.0 && self.tau < 0.5) {
            return Err(Error::Spec(format!(
                "tau must lie in (0, 1/2), got {}",
                self.tau
            )));
        }
        if !(self.r > 0.0 && self.r.is_finite()) {
            return Err(Error::Spec(format!(
                "half-range R must be positive, got {}",
                self.r
            )));
        }
        if !(self.beta > PI) {
            return Err(Error::Spec(format!(
                "beta must exceed pi, got {}",
                self.beta
            )));
        }
        Ok(())
    }

    fn tail(&self) -> f64 {
        let d = self.d as f64;
        (d / (self.tau * PI)).sqrt() * (-(PI * self.tau * d / 4.0).sqrt()).exp()
    }

    /// Analytic sup-error bound on `[-R, 0]`.
    pub fn bound_negative(&self) -> f64 {
        14.0 * self.r * self.tail()
    }

    /// Analytic sup-error bound on `[0, R]`.
    pub fn bound_positive(&self) -> f64 {
        let d = self.d as f64;
        2.0 * self.r * self.tau
            + 2.0 * self.r * (4.0 * self.tau / (PI * d)).sqrt()
            + 12.0 * self.r * self.tail()
    }
}

/// Degree-`d` polynomial close to ReLU on `[-R, R]`, nearly flat on `[-R, 0]`.
pub fn build_relu_poly(spec: &ReluPolySpec) -> Result<Polynomial> {
    spec.validate()?;
    let beta = spec.beta;
    let smooth = cheb_project(|u| softplus_annealed(beta, u), spec.d, (-1.0, 1.0))?;
    // p(x) = 2R g(x / 2R - tau); u in [-1, 1]  <=>  x in [2R (tau - 1), 2R (tau + 1)]
    let two_r = 2.0 * spec.r;
    let coeffs: Vec<f64> = smooth.coeffs().iter().map(|c| two_r * c).collect();
    Polynomial::chebyshev(coeffs, two_r * (spec.tau - 1.0), two_r * (spec.tau + 1.0))
}

/// Parameters of the polynomial soft threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SoftThresholdPolySpec {
    pub d: usize,
    pub tau: f64,
    pub m: f64,
    pub m_tau: f64,
    pub eps: f64,
}

/// `(M_tau / tau) log^2(M_tau / (eps tau))`, the degree schedule before its
/// constant factor.
pub fn degree_schedule_base(m_tau: f64, tau: f64, eps: f64) -> f64 {
    let l = (m_tau / (eps * tau)).ln().max(1.0);
    m_tau / tau * l * l
}

impl SoftThresholdPolySpec {
    /// Spec with an explicit degree.
    pub fn new(tau: f64, m: f64, eps: f64, d: usize) -> Result<Self> {
        let spec = SoftThresholdPolySpec {
            d,
            tau,
            m,
            m_tau: m + 2.0 * tau,
            eps,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Spec at the calibrated minimal degree `d0`.
    pub fn calibrated(tau: f64, m: f64, eps: f64) -> Result<Self> {
        let probe = SoftThresholdPolySpec::new(tau, m, eps, 7)?;
        let d = probe.calibrated_degree()?;
        SoftThresholdPolySpec::new(tau, m, eps, d)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return Err(Error::Spec(format!(
                "tau must be positive, got {}",
                self.tau
            )));
        }
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return Err(Error::Spec(format!(
                "eps must be positive, got {}",
                self.eps
            )));
        }
        if !(self.m >= 1.0 && self.m.is_finite()) {
            return Err(Error::Spec(format!(
                "l1 bound M must be at least 1, got {}",
                self.m
            )));
        }
        if self.m_tau != self.m + 2.0 * self.tau {
            return Err(Error::Spec("M_tau must equal M + 2 tau".into()));
        }
        if self.d < 7 {
            return Err(Error::Spec(format!(
                "degree d = {} is too small; the construction requires d >= 7",
                self.d
            )));
        }
        Ok(())
    }

    /// `d0 = C (M_tau / tau) log^2(M_tau / (eps tau))` with `C` from
    /// [`calibrated_degree_constant`].
    pub fn calibrated_degree(&self) -> Result<usize> {
        let c = calibrated_degree_constant()?;
        Ok(schedule_degree(c, self.m_tau, self.tau, self.eps))
    }

    /// Spec of the underlying ReLU approximant: `(d, tau / M_tau, M_tau)`.
    pub fn relu_spec(&self) -> Result<ReluPolySpec> {
        ReluPolySpec::new(self.d, self.tau / self.m_tau, self.m_tau)
    }
}

fn schedule_degree(c: f64, m_tau: f64, tau: f64, eps: f64) -> usize {
    ((c * degree_schedule_base(m_tau, tau, eps)).ceil() as usize).max(7)
}

/// Polynomial soft threshold and whether its degree meets the calibrated
/// schedule. Below the schedule the flatness and linearity contract is not
/// guaranteed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SoftThresholdPoly {
    pub spec: SoftThresholdPolySpec,
    pub poly: Polynomial,
    pub below_schedule: bool,
}

impl SoftThresholdPoly {
    pub fn eval(&self, x: f64) -> f64 {
        self.poly.eval(x)
    }

    /// Whether `x` is outside `[-M_tau, M_tau]`.
    pub fn is_extrapolation(&self, x: f64) -> bool {
        self.poly.is_extrapolation(x)
    }
}

/// Builds `rho(x) = p(x - tau) - p(-x - tau)` with `p` the ReLU approximant
/// of degree `d`, transition `tau / M_tau` and half-range `M_tau`, returned
/// as one Chebyshev series on `[-M_tau, M_tau]`.
pub fn build_poly_soft_threshold(spec: &SoftThresholdPolySpec) -> Result<SoftThresholdPoly> {
    let poly = soft_threshold_polynomial(spec)?;
    let d0 = spec.calibrated_degree()?;
    let below_schedule = spec.d < d0;
    if below_schedule {
        log::warn!(
            "soft-threshold polynomial degree {} is below the calibrated schedule d0 = {}",
            spec.d,
            d0
        );
    }
    Ok(SoftThresholdPoly {
        spec: *spec,
        poly,
        below_schedule,
    })
}

fn soft_threshold_polynomial(spec: &SoftThresholdPolySpec) -> Result<Polynomial> {
    spec.validate()?;
    let relu = build_relu_poly(&spec.relu_spec()?)?;
    let tau = spec.tau;
    // odd by construction; antisymmetrize the node values so even
    // coefficients cancel to rounding
    let rho = |x: f64| {
        let plus = relu.eval(x - tau) - relu.eval(-x - tau);
        let minus = relu.eval(-x - tau) - relu.eval(x - tau);
        0.5 * (plus - minus)
    };
    cheb_project(rho, spec.d, (-spec.m_tau, spec.m_tau))
}

/// Grid measurements of the soft-threshold contract.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SoftThresholdCertificate {
    /// `sup |rho(x)|` over `|x| <= tau`.
    pub flat_error: f64,
    /// `sup |rho(x) - x|` over `tau < |x| < M_tau`.
    pub linear_error: f64,
    pub flat_limit: f64,
    pub linear_limit: f64,
}

impl SoftThresholdCertificate {
    pub fn passes(&self) -> bool {
        self.flat_error <= self.flat_limit && self.linear_error <= self.linear_limit
    }
}

/// Checks `|rho| <= eps` on `[-tau, tau]` and `|rho(x) - x| <= 3 tau + eps`
/// for `tau < |x| < M_tau`, with `gridsize` points per region.
pub fn certify_soft_threshold(st: &SoftThresholdPoly, gridsize: usize) -> SoftThresholdCertificate {
    let spec = &st.spec;
    let grid =
        |a: f64, b: f64| (0..gridsize).map(move |i| a + (b - a) * i as f64 / (gridsize - 1) as f64);
    let flat_error = grid(-spec.tau, spec.tau)
        .map(|x| st.eval(x).abs())
        .fold(0.0, f64::max);
    let outer = |sign: f64| {
        // open interval (tau, M_tau): drop the two endpoints
        grid(spec.tau, spec.m_tau)
            .skip(1)
            .take(gridsize.saturating_sub(2))
            .map(move |x| (st.eval(sign * x) - sign * x).abs())
            .fold(0.0, f64::max)
    };
    SoftThresholdCertificate {
        flat_error,
        linear_error: outer(1.0).max(outer(-1.0)),
        flat_limit: spec.eps,
        linear_limit: 3.0 * spec.tau + spec.eps,
    }
}

/// Specs `(tau, M, eps)` on which the degree constant is calibrated.
pub fn calibration_suite() -> Vec<(f64, f64, f64)> {
    let tau_256 = 2.0 * (256f64).ln().sqrt();
    vec![
        (1.0, 10.0, 0.01),
        (0.5, 4.0, 0.005),
        (tau_256, 60.0, tau_256 / 256.0),
        (2.0, 1.0, 0.05),
    ]
}

const CALIBRATION_CANDIDATES: [f64; 8] = [1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0, 128.0];

/// Smallest `C` in `{1, 2, 4, ...}` whose schedule degree passes the grid
/// contract on every spec of [`calibration_suite`]. Computed once per process.
pub fn calibrated_degree_constant() -> Result<f64> {
    static CONSTANT: OnceLock<std::result::Result<f64, String>> = OnceLock::new();
    CONSTANT
        .get_or_init(run_calibration)
        .clone()
        .map_err(Error::Spec)
}

fn run_calibration() -> std::result::Result<f64, String> {
    for c in CALIBRATION_CANDIDATES {
        let mut ok = true;
        for (tau, m, eps) in calibration_suite() {
            let m_tau = m + 2.0 * tau;
            let d = schedule_degree(c, m_tau, tau, eps);
            if d > crate::polybasis::CHEBYSHEV_DEGREE_LIMIT {
                return Err(format!(
                    "calibration reached degree {d} beyond the Chebyshev limit"
                ));
            }
            let spec = SoftThresholdPolySpec::new(tau, m, eps, d).map_err(|e| e.to_string())?;
            let poly = soft_threshold_polynomial(&spec).map_err(|e| e.to_string())?;
            let st = SoftThresholdPoly {
                spec,
                poly,
                below_schedule: false,
            };
            if !certify_soft_threshold(&st, CERTIFICATION_GRID).passes() {
                ok = false;
                break;
            }
        }
        if ok {
            log::info!("soft-threshold degree constant calibrated to C = {c}");
            return Ok(c);
        }
    }
    Err("no candidate degree constant passed the calibration suite".into())
}

/// Sup error and its location on one region of the grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionError {
    pub sup: f64,
    pub argmax: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorProfile {
    /// `[a, min(0, b)]`; `None` when the interval has no negative part.
    pub negative: Option<RegionError>,
    /// `[max(0, a), b]`; `None` when the interval has no positive part.
    pub positive: Option<RegionError>,
    /// `[-band, band]` intersected with the interval.
    pub band: Option<RegionError>,
}

fn region_sup<P, T>(p: P, target: T, a: f64, b: f64, gridsize: usize) -> Option<RegionError>
where
    P: Fn(f64) -> f64,
    T: Fn(f64) -> f64,
{
    if a > b {
        return None;
    }
    let mut best = RegionError {
        sup: 0.0,
        argmax: a,
    };
    for i in 0..gridsize {
        let x = a + (b - a) * i as f64 / (gridsize - 1) as f64;
        let e = (p(x) - target(x)).abs();
        if e > best.sup || i == 0 {
            best = RegionError { sup: e, argmax: x };
        }
    }
    Some(best)
}

/// Grid sup-error of `p` against `target`, split into negative part,
/// positive part and a `[-band, band]` window.
pub fn sup_error_profile<T>(
    p: &Polynomial,
    target: T,
    interval: (f64, f64),
    band: f64,
    gridsize: usize,
) -> Result<ErrorProfile>
where
    T: Fn(f64) -> f64,
{
    if gridsize < 2 {
        return Err(Error::Domain(format!(
            "grid needs at least 2 points, got {gridsize}"
        )));
    }
    let (a, b) = interval;
    let eval = |x: f64| p.eval(x);
    Ok(ErrorProfile {
        negative: region_sup(eval, &target, a, b.min(0.0), gridsize),
        positive: region_sup(eval, &target, a.max(0.0), b, gridsize),
        band: region_sup(eval, &target, a.max(-band), b.min(band), gridsize),
    })
}

pub fn relu(x: f64) -> f64 {
    x.max(0.0)
}

/// `|x - g_beta(x)| <= ln 2 / beta`; used in diagnostics.
pub fn softplus_excess_bound(beta: f64) -> f64 {
    LN_2 / beta
}

#[cfg(test)]
mod tests {
    use super::*;

    fn relu_profile(d: usize, tau: f64, r: f64) -> ErrorProfile {
        let spec = ReluPolySpec::new(d, tau, r).unwrap();
        let p = build_relu_poly(&spec).unwrap();
        sup_error_profile(&p, relu, (-r, r), tau * r, CERTIFICATION_GRID).unwrap()
    }

    #[test]
    fn softplus_values() {
        for beta in [0.5, 3.0, 40.0] {
            assert!((softplus_annealed(beta, 0.0) - LN_2 / beta).abs() < 1e-15);
        }
        let v = softplus_annealed(10.0, -1.0);
        assert!(v > 0.0 && v <= (-10f64).exp() / 10.0);
        let v = softplus_annealed(10.0, 5.0);
        assert!((v - 5.0).abs() <= LN_2 / 10.0);
    }

    #[test]
    fn softplus_is_overflow_free() {
        assert_eq!(softplus_annealed(1.0, 1e308), 1e308);
        assert_eq!(softplus_annealed(50.0, -1e300), 0.0);
        assert!(softplus_annealed(1e6, 800.0).is_finite());
    }

    #[test]
    fn softplus_monotone_and_lipschitz() {
        let beta = 7.0;
        let mut prev = softplus_annealed(beta, -5.0);
        for i in 1..=2000 {
            let x = -5.0 + i as f64 * 0.005;
            let v = softplus_annealed(beta, x);
            assert!(v >= prev);
            assert!(v - prev <= 0.005 + 1e-15);
            prev = v;
        }
    }

    #[test]
    fn bernstein_bound_values() {
        assert!((bernstein_bound(2.0 * PI, 0).unwrap() - 24.0).abs() < 1e-12);
        for d in 0..50 {
            assert!(bernstein_bound(5.0, d + 1).unwrap() < bernstein_bound(5.0, d).unwrap());
        }
        assert!(matches!(bernstein_bound(PI, 3), Err(Error::Domain(_))));
        assert!(bernstein_bound(1.0, 3).is_err());
        let beta = 10.0;
        assert!(bernstein_rho(beta) > 1.0 + PI / (2.0 * beta));
    }

    #[test]
    fn interpolant_within_bernstein_bound() {
        let beta = 10.0;
        let p = cheb_project(|x| softplus_annealed(beta, x), 50, (-1.0, 1.0)).unwrap();
        let prof = sup_error_profile(
            &p,
            |x| softplus_annealed(beta, x),
            (-1.0, 1.0),
            0.0,
            CERTIFICATION_GRID,
        )
        .unwrap();
        let sup = prof.negative.unwrap().sup.max(prof.positive.unwrap().sup);
        assert!(sup <= bernstein_bound(beta, 50).unwrap(), "sup {sup:e}");
    }

    #[test]
    fn schedule_sets_beta() {
        let s = ReluPolySpec::new(100, 0.1, 1.0).unwrap();
        assert!((s.beta - (PI * 100.0 / 0.4).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn rejects_small_degree() {
        let err = ReluPolySpec::new(3, 0.1, 1.0).unwrap_err();
        assert!(err.to_string().contains("d >= 7"));
        assert!(ReluPolySpec::new(10, 0.6, 1.0).is_err());
        assert!(ReluPolySpec::new(10, 0.1, -1.0).is_err());
    }

    #[test]
    fn degree_seven_within_bounds() {
        let spec = ReluPolySpec::new(7, 0.49, 0.5).unwrap();
        let prof = relu_profile(7, 0.49, 0.5);
        assert!(prof.negative.unwrap().sup <= INTERPOLATION_SLACK * spec.bound_negative());
        assert!(prof.positive.unwrap().sup <= INTERPOLATION_SLACK * spec.bound_positive());
    }

    #[test]
    fn negative_region_error_decreases() {
        let e50 = relu_profile(50, 0.1, 1.0).negative.unwrap().sup;
        let e100 = relu_profile(100, 0.1, 1.0).negative.unwrap().sup;
        assert!(e100 < e50);
        let e400 = relu_profile(400, 0.1, 1.0);
        assert!(e400.negative.unwrap().sup <= 1e-3);
        // flat side is much more accurate than the linear side
        assert!(e400.negative.unwrap().sup < 0.1 * e400.positive.unwrap().sup);
    }

    #[test]
    fn profile_of_exact_polynomial() {
        let f = |x: f64| 1.0 - x + 0.5 * x * x * x;
        let p = cheb_project(f, 3, (-1.0, 1.0)).unwrap();
        let prof = sup_error_profile(&p, f, (-1.0, 1.0), 0.2, 1000).unwrap();
        for r in [prof.negative, prof.positive, prof.band] {
            assert!(r.unwrap().sup <= 1e-11);
        }
    }

    #[test]
    fn profile_of_zero_against_relu() {
        let prof = sup_error_profile(&Polynomial::zero(), relu, (-1.0, 1.0), 0.1, 101).unwrap();
        let pos = prof.positive.unwrap();
        assert_eq!(pos.sup, 1.0);
        assert_eq!(pos.argmax, 1.0);
        assert_eq!(prof.negative.unwrap().sup, 0.0);
        assert!((prof.band.unwrap().sup - 0.1).abs() < 1e-15);
        assert!(sup_error_profile(&Polynomial::zero(), relu, (-1.0, 1.0), 0.1, 1).is_err());
        let right_only = sup_error_profile(&Polynomial::zero(), relu, (0.5, 1.0), 0.1, 10).unwrap();
        assert!(right_only.negative.is_none() && right_only.band.is_none());
    }

    #[test]
    fn region_split_at_degree_200() {
        let spec = ReluPolySpec::new(200, 0.1, 1.0).unwrap();
        let prof = relu_profile(200, 0.1, 1.0);
        let neg = prof.negative.unwrap();
        let pos = prof.positive.unwrap();
        assert!(neg.sup <= INTERPOLATION_SLACK * spec.bound_negative());
        assert!(pos.sup <= INTERPOLATION_SLACK * spec.bound_positive());
        // the worst linear-side error sits at the far right, where the shift bites
        assert!(pos.argmax > 0.5);
        let band = prof.band.unwrap();
        assert!(band.argmax.abs() <= 0.1 + 1e-12);
    }

    #[test]
    fn soft_threshold_is_odd_and_flat() {
        let spec = SoftThresholdPolySpec::calibrated(1.0, 10.0, 0.01).unwrap();
        let st = build_poly_soft_threshold(&spec).unwrap();
        assert!(!st.below_schedule);
        assert!(st.eval(0.0).abs() <= spec.eps);
        for (j, c) in st.poly.coeffs().iter().enumerate() {
            if j % 2 == 0 {
                assert!(c.abs() <= 1e-12, "even coefficient {j} = {c:e}");
            }
        }
        for x in [0.3, 1.7, 5.0, 11.0] {
            assert!((st.eval(x) + st.eval(-x)).abs() <= 1e-12);
        }
        let cert = certify_soft_threshold(&st, CERTIFICATION_GRID);
        assert!(cert.passes(), "{cert:?}");
    }

    #[test]
    fn soft_threshold_lipschitz() {
        let spec = SoftThresholdPolySpec::calibrated(1.0, 10.0, 0.01).unwrap();
        let st = build_poly_soft_threshold(&spec).unwrap();
        let half = spec.m_tau / 2.0;
        let n = 4000;
        let h = 2.0 * half / n as f64;
        let mut prev = st.eval(-half);
        for i in 1..=n {
            let v = st.eval(-half + i as f64 * h);
            assert!((v - prev).abs() <= 1.5 * h);
            prev = v;
        }
    }

    #[test]
    fn below_schedule_is_flagged() {
        let spec = SoftThresholdPolySpec::new(1.0, 10.0, 0.01, 20).unwrap();
        let st = build_poly_soft_threshold(&spec).unwrap();
        assert!(st.below_schedule);
    }

    #[test]
    fn soft_threshold_spec_validation() {
        assert!(SoftThresholdPolySpec::new(0.0, 10.0, 0.01, 50).is_err());
        assert!(SoftThresholdPolySpec::new(1.0, 0.5, 0.01, 50).is_err());
        assert!(SoftThresholdPolySpec::new(1.0, 10.0, 0.0, 50).is_err());
        let s = SoftThresholdPolySpec::new(1.5, 10.0, 0.01, 50).unwrap();
        assert_eq!(s.m_tau, 13.0);
        let r = s.relu_spec().unwrap();
        assert_eq!(r.r, 13.0);
        assert!((r.tau - 1.5 / 13.0).abs() < 1e-15);
    }

    #[test]
    fn calibrated_constant_is_a_power_of_two() {
        let c = calibrated_degree_constant().unwrap();
        assert!(CALIBRATION_CANDIDATES.contains(&c));
    }
}
