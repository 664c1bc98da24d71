//! Squared-loss risk: Monte Carlo with confidence intervals, exact
//! population risk of coordinatewise polynomials, and the Hermite variance
//! bound.

use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::estimators::{Estimator, ORACLE_DEGREE_LIMIT};
use crate::model::{sample_pair, trial_rng, Dictionary, LatentMode, ModelParams};
use crate::par::map_indexed;
use crate::polybasis::{scaled_hermite_coeffs, HermiteExpansion};
use crate::{Error, Result};

/// Fewest trials accepted by [`mc_risk`].
pub const MIN_TRIALS: usize = 100;

pub const DEFAULT_TRIALS: usize = 2000;

/// `z` value of the two-sided 95% normal interval.
pub const Z95: f64 = 1.96;

/// Compensated (Neumaier) sum.
pub fn neumaier_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Mean and standard error of the mean.
pub fn mean_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = neumaier_sum(values.iter().copied()) / n;
    if values.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = neumaier_sum(values.iter().map(|v| (v - mean) * (v - mean))) / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Doubles with 17 significant digits.
pub fn format_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// First 16 hex digits of the SHA-256 of the model and dictionary recipe.
pub fn params_digest(params: &ModelParams, dict: &Dictionary) -> String {
    let mut h = Sha256::new();
    h.update(serde_json::to_vec(params).expect("params serialize"));
    h.update(serde_json::to_vec(&dict.spec()).expect("dictionary spec serializes"));
    h.finalize()[..8]
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// Monte Carlo risk of one estimator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskReport {
    pub estimator_id: String,
    pub params_digest: String,
    pub trials: usize,
    pub mean_loss: f64,
    pub stderr: f64,
    pub ci95: (f64, f64),
    pub seed: u64,
    pub wallclock: f64,
    /// Trials in which the polynomial network saw an input outside its
    /// approximation window.
    pub extrapolated_trials: usize,
    /// `;`-separated warnings, empty when there are none.
    pub warning: String,
}

impl RiskReport {
    pub const CSV_HEADER: [&'static str; 11] = [
        "estimator_id",
        "params_digest",
        "trials",
        "mean_loss",
        "stderr",
        "ci95_lo",
        "ci95_hi",
        "seed",
        "wallclock_s",
        "extrapolated_trials",
        "warning",
    ];

    fn from_losses(
        estimator_id: String,
        params_digest: String,
        losses: &[f64],
        seed: u64,
        wallclock: f64,
        extrapolated_trials: usize,
        warning: String,
    ) -> Self {
        let (mean_loss, stderr) = mean_stderr(losses);
        RiskReport {
            estimator_id,
            params_digest,
            trials: losses.len(),
            mean_loss,
            stderr,
            ci95: (mean_loss - Z95 * stderr, mean_loss + Z95 * stderr),
            seed,
            wallclock,
            extrapolated_trials,
            warning,
        }
    }

    pub fn csv_fields(&self) -> Vec<String> {
        vec![
            self.estimator_id.clone(),
            self.params_digest.clone(),
            self.trials.to_string(),
            format_f64(self.mean_loss),
            format_f64(self.stderr),
            format_f64(self.ci95.0),
            format_f64(self.ci95.1),
            self.seed.to_string(),
            format_f64(self.wallclock),
            self.extrapolated_trials.to_string(),
            self.warning.clone(),
        ]
    }

    /// Whether `value` lies within `k` standard errors of the mean.
    pub fn within(&self, value: f64, k: f64) -> bool {
        (self.mean_loss - value).abs() <= k * self.stderr
    }
}

/// Several estimators evaluated on the same per-trial samples.
#[derive(Debug, Clone)]
pub struct PairedRun {
    pub reports: Vec<RiskReport>,
    /// `losses[e][t]`: squared loss of estimator `e` on trial `t`.
    pub losses: Vec<Vec<f64>>,
}

impl PairedRun {
    /// Mean and standard error of `loss[a] - loss[b]` over trials.
    pub fn paired_difference(&self, a: usize, b: usize) -> (f64, f64) {
        let diff: Vec<f64> = self.losses[a]
            .iter()
            .zip(&self.losses[b])
            .map(|(x, y)| x - y)
            .collect();
        mean_stderr(&diff)
    }
}

fn estimator_warning(est: &Estimator, extrapolated: usize) -> String {
    let mut warnings = Vec::new();
    if let Estimator::PolySoftThreshold(st) = est {
        if st.below_schedule {
            warnings.push("below_schedule");
        }
    }
    if extrapolated > 0 {
        warnings.push("extrapolation");
    }
    warnings.join(";")
}

/// Risks of all `estimators` on shared samples: trial `t` draws from
/// stream `t` of `seed`.
pub fn paired_risk(
    estimators: &[Estimator],
    params: &ModelParams,
    dict: &Dictionary,
    trials: usize,
    seed: u64,
) -> Result<PairedRun> {
    if trials < MIN_TRIALS {
        return Err(Error::Params(format!(
            "need at least {MIN_TRIALS} trials, got {trials}"
        )));
    }
    params.validate()?;
    dict.check_params(params)?;
    let start = Instant::now();
    let per_trial: Vec<Result<Vec<(f64, bool)>>> = map_indexed(trials, |t| {
        let sample = sample_pair(params, dict, &mut trial_rng(seed, t as u64))?;
        Ok(estimators
            .iter()
            .map(|e| {
                let pred = e.predict(&params.w, &sample);
                ((pred.yhat - sample.y).powi(2), pred.extrapolated)
            })
            .collect())
    });
    let per_trial: Vec<Vec<(f64, bool)>> = per_trial.into_iter().collect::<Result<_>>()?;
    let wallclock = start.elapsed().as_secs_f64();
    let digest = params_digest(params, dict);
    let mut losses = Vec::with_capacity(estimators.len());
    let mut reports = Vec::with_capacity(estimators.len());
    for (i, est) in estimators.iter().enumerate() {
        let column: Vec<f64> = per_trial.iter().map(|row| row[i].0).collect();
        let extrapolated = per_trial.iter().filter(|row| row[i].1).count();
        reports.push(RiskReport::from_losses(
            est.id(),
            digest.clone(),
            &column,
            seed,
            wallclock,
            extrapolated,
            estimator_warning(est, extrapolated),
        ));
        losses.push(column);
    }
    Ok(PairedRun { reports, losses })
}

/// Monte Carlo squared-loss risk of one estimator.
pub fn mc_risk(
    estimator: &Estimator,
    params: &ModelParams,
    dict: &Dictionary,
    trials: usize,
    seed: u64,
) -> Result<RiskReport> {
    let mut run = paired_risk(std::slice::from_ref(estimator), params, dict, trials, seed)?;
    Ok(run.reports.remove(0))
}

/// Coefficients of `x -> f(scale * y)` in `H_r(y)` for `f` given in
/// `H_j(x / f.scale)`.
fn coefficients_at_scale(f: &HermiteExpansion, scale: f64) -> Vec<f64> {
    let t = scale / f.scale;
    let mut out = vec![0.0; f.coeffs.len()];
    for (j, &c) in f.coeffs.iter().enumerate() {
        if c != 0.0 {
            for (r, a) in scaled_hermite_coeffs(j, t).into_iter().enumerate() {
                out[r] += c * a;
            }
        }
    }
    out
}

/// Exact risk of `Yhat = sum_i w_i f(X'_i)` on the spike-Gaussian,
/// orthogonal-dictionary instance.
///
/// With `D_i = f(X'_i) - Z_i` i.i.d. across coordinates,
/// `E[(sum w_i D_i)^2] = ||w||^2 Var(D) + (sum w_i)^2 E[D]^2`.
pub fn exact_univariate_risk(f: &HermiteExpansion, params: &ModelParams) -> Result<f64> {
    params.validate()?;
    if params.latent_mode != LatentMode::SpikeGaussian {
        return Err(Error::Unsupported(
            "exact risk requires the spike-Gaussian latent".into(),
        ));
    }
    if f.degree() > ORACLE_DEGREE_LIMIT {
        return Err(Error::DegreeLimit {
            degree: f.degree(),
            limit: ORACLE_DEGREE_LIMIT,
        });
    }
    let p = params.on_probability();
    let g2 = params.gamma * params.gamma;
    let sigma = params.sigma;
    let scale = (g2 + sigma * sigma).sqrt();

    // spike: X' = sigma y
    let spike = coefficients_at_scale(f, sigma);
    let spike_sq: f64 = spike.iter().map(|c| c * c).sum();
    // slab: X' = scale U, Z = (gamma^2 / scale) U + independent noise
    let (slab_mean, slab_sq, slab_cross) = if scale > 0.0 {
        let slab = coefficients_at_scale(f, scale);
        let first = slab.get(1).copied().unwrap_or(0.0);
        (
            slab[0],
            slab.iter().map(|c| c * c).sum::<f64>(),
            g2 / scale * first,
        )
    } else {
        (spike[0], spike_sq, 0.0)
    };
    let mean_f = (1.0 - p) * spike[0] + p * slab_mean;
    let second = (1.0 - p) * spike_sq + p * (slab_sq - 2.0 * slab_cross + g2);
    // E[Z] = 0, so E[D] = E[f]
    let var = second - mean_f * mean_f;
    let w_sum: f64 = params.w.iter().sum();
    Ok(params.w_norm_sq() * var + w_sum * w_sum * mean_f * mean_f)
}

/// Outcome of the Hermite variance bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VarianceCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
}

/// Compares the exact risk of the coordinatewise estimator `f` with
/// `(1 - k/n) ||w||^2 sum_{j >= 1} fhat_j^2`, where `fhat` is the expansion
/// of `f` in `H_j(x / sigma)`.
pub fn variance_bound_check(f: &HermiteExpansion, params: &ModelParams) -> Result<VarianceCheck> {
    if !(params.sigma > 0.0) {
        return Err(Error::Domain("the variance bound needs sigma > 0".into()));
    }
    let lhs = exact_univariate_risk(f, params)?;
    let at_sigma = f.rescale(params.sigma)?;
    let rhs = (1.0 - params.on_probability()) * params.w_norm_sq() * at_sigma.nonconstant_energy();
    Ok(VarianceCheck {
        lhs,
        rhs,
        pass: lhs >= rhs - 1e-9,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::{best_poly_oracle, optimal_linear, BayesPosterior, LinearPredictor};
    use crate::model::{build_dictionary, DictionaryKind};
    use crate::polybasis::quadrature::gauss_hermite;
    use proptest::prelude::*;

    fn identity(n: usize) -> Dictionary {
        build_dictionary(DictionaryKind::Identity, n, n, 0).unwrap()
    }

    #[test]
    fn neumaier_recovers_cancelled_terms() {
        let v = [1.0, 1e100, 1.0, -1e100];
        assert_eq!(neumaier_sum(v), 2.0);
        assert_eq!(neumaier_sum(std::iter::empty()), 0.0);
    }

    #[test]
    fn summation_order_barely_matters() {
        let values: Vec<f64> = (0..10_000)
            .map(|i| ((i * 7919) % 1000) as f64 * 1.37e-3 + 1e6)
            .collect();
        let mut shuffled = values.clone();
        shuffled.reverse();
        shuffled.rotate_left(3333);
        let a = neumaier_sum(values);
        let b = neumaier_sum(shuffled);
        assert!((a - b).abs() <= 1e-12 * a.abs());
    }

    #[test]
    fn format_has_seventeen_significant_digits() {
        assert_eq!(format_f64(0.1), "1.0000000000000001e-1");
        assert_eq!(format_f64(0.1).parse::<f64>().unwrap(), 0.1);
        assert_eq!(format_f64(-2.5), "-2.5000000000000000e0");
    }

    #[test]
    fn zero_estimator_risk_is_trivial() {
        let p = ModelParams::spike(256, 4, 1.0, 3.0);
        let d = identity(256);
        let r = mc_risk(&Estimator::Zero, &p, &d, 4000, 1).unwrap();
        assert!(r.within(36.0, 3.0), "{} +- {}", r.mean_loss, r.stderr);
        assert!((r.ci95.0 - (r.mean_loss - 1.96 * r.stderr)).abs() < 1e-12);
        assert!((r.ci95.1 - (r.mean_loss + 1.96 * r.stderr)).abs() < 1e-12);
        assert_eq!(r.estimator_id, "zero");
        assert!(r.warning.is_empty());
    }

    #[test]
    fn linear_risk_matches_closed_form() {
        let p = ModelParams::spike(128, 4, 1.0, 4.0);
        let d = build_dictionary(DictionaryKind::HaarOrthogonal, 128, 128, 3).unwrap();
        let lin = optimal_linear(&p, &d).unwrap();
        let r = mc_risk(&Estimator::Linear(lin), &p, &d, 4000, 2).unwrap();
        let exact = LinearPredictor::closed_form_risk(&p);
        assert!(
            r.within(exact, 3.0),
            "{} +- {} vs {exact}",
            r.mean_loss,
            r.stderr
        );
    }

    #[test]
    fn reports_are_deterministic() {
        let p = ModelParams::spike(64, 3, 1.0, 2.0);
        let d = identity(64);
        let a = mc_risk(&Estimator::SoftThreshold { tau: 1.5 }, &p, &d, 300, 9).unwrap();
        let b = mc_risk(&Estimator::SoftThreshold { tau: 1.5 }, &p, &d, 300, 9).unwrap();
        let strip = |mut r: RiskReport| {
            r.wallclock = 0.0;
            r
        };
        assert_eq!(strip(a), strip(b));
    }

    #[test]
    fn too_few_trials_rejected() {
        let p = ModelParams::spike(16, 1, 1.0, 1.0);
        assert!(mc_risk(&Estimator::Zero, &p, &identity(16), 99, 0).is_err());
        assert!(matches!(
            mc_risk(&Estimator::Zero, &p, &identity(8), 100, 0),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn csv_row_matches_header() {
        let p = ModelParams::spike(16, 1, 1.0, 1.0);
        let r = mc_risk(&Estimator::Zero, &p, &identity(16), 100, 0).unwrap();
        assert_eq!(r.csv_fields().len(), RiskReport::CSV_HEADER.len());
        assert_eq!(r.params_digest.len(), 16);
        let other = params_digest(&ModelParams::spike(16, 2, 1.0, 1.0), &identity(16));
        assert_ne!(r.params_digest, other);
    }

    #[test]
    fn exact_risk_examples() {
        let p = ModelParams::spike(1024, 8, 1.0, 4.0);
        let zero = HermiteExpansion::zero(1.0);
        assert!((exact_univariate_risk(&zero, &p).unwrap() - 128.0).abs() < 1e-12);
        for d in 0..=12 {
            let fit = best_poly_oracle(&p, d).unwrap();
            let r = exact_univariate_risk(&fit.expansion, &p).unwrap();
            assert!((r - fit.risk).abs() <= 1e-10 * fit.risk.max(1.0), "d = {d}");
        }
        // identity map: per coordinate E[xi^2] = sigma^2
        let ident = HermiteExpansion::new(2.0, vec![0.0, 2.0]).unwrap();
        let r = exact_univariate_risk(&ident, &p).unwrap();
        assert!((r - 1024.0).abs() < 1e-9);
        assert!(r > LinearPredictor::closed_form_risk(&p));
    }

    #[test]
    fn exact_risk_with_constant_term() {
        // f = 1 everywhere: D = 1 - Z, E[(sum_i w_i D_i)^2] = (sum w)^2 + gamma^2 (k/n) ||w||^2
        let w: Vec<f64> = (0..10).map(|i| if i < 7 { 1.0 } else { -1.0 }).collect();
        let p = ModelParams::spike(10, 2, 1.0, 3.0).with_w(w);
        let one = HermiteExpansion::new(0.7, vec![1.0]).unwrap();
        let r = exact_univariate_risk(&one, &p).unwrap();
        assert!((r - (16.0 + 9.0 * 0.2 * 10.0)).abs() < 1e-12);
    }

    #[test]
    fn exact_risk_matches_quadrature() {
        // per-coordinate risk by Gauss-Hermite over both mixture components
        let (n, k, sigma, gamma) = (40, 6, 0.8, 2.5);
        let p = ModelParams::spike(n, k, sigma, gamma);
        let f = HermiteExpansion::new(1.3, vec![0.2, 0.9, -0.4, 0.15, 0.05, -0.02]).unwrap();
        let rule = gauss_hermite(60);
        let on = k as f64 / n as f64;
        let mut spike_sq = 0.0;
        let mut spike_mean = 0.0;
        for &(y, wt) in &rule {
            let v = f.eval(sigma * y);
            spike_sq += wt * v * v;
            spike_mean += wt * v;
        }
        let mut slab_sq = 0.0;
        let mut slab_mean = 0.0;
        for &(u, wu) in &rule {
            for &(e, we) in &rule {
                let z = gamma * u;
                let v = f.eval(z + sigma * e);
                slab_sq += wu * we * (v - z) * (v - z);
                slab_mean += wu * we * v;
            }
        }
        let mean = (1.0 - on) * spike_mean + on * slab_mean;
        let second = (1.0 - on) * spike_sq + on * slab_sq;
        let expected = n as f64 * (second - mean * mean) + (n * n) as f64 * mean * mean;
        let r = exact_univariate_risk(&f, &p).unwrap();
        assert!((r - expected).abs() <= 1e-9 * expected, "{r} vs {expected}");
    }

    #[test]
    fn variance_bound_examples() {
        let p = ModelParams::spike(100, 5, 1.0, 2.0);
        let zero = variance_bound_check(&HermiteExpansion::zero(1.0), &p).unwrap();
        assert_eq!(zero.rhs, 0.0);
        assert!(zero.pass);
        let unit = HermiteExpansion::new(1.0, vec![0.0, 1.0]).unwrap();
        let check = variance_bound_check(&unit, &p).unwrap();
        assert!((check.rhs - 0.95 * 100.0).abs() < 1e-12);
        assert!(check.pass);
    }

    #[test]
    fn oracle_monte_carlo_agreement() {
        let points = [
            (64, 2, 1.0, 3.0, 3),
            (128, 4, 1.0, 6.0, 5),
            (32, 8, 0.5, 1.0, 4),
        ];
        for (i, &(n, k, sigma, gamma, d)) in points.iter().enumerate() {
            let p = ModelParams::spike(n, k, sigma, gamma);
            let dict = identity(n);
            let fit = best_poly_oracle(&p, d).unwrap();
            let r = mc_risk(
                &Estimator::HermitePoly(fit.expansion.clone()),
                &p,
                &dict,
                4000,
                i as u64,
            )
            .unwrap();
            assert!(
                r.within(fit.risk, 3.0),
                "point {i}: {} +- {} vs {}",
                r.mean_loss,
                r.stderr,
                fit.risk
            );
        }
    }

    #[test]
    fn estimator_ordering() {
        let p = ModelParams::spike(256, 4, 1.0, 8.0);
        let dict = identity(256);
        let estimators = vec![
            Estimator::Bayes(BayesPosterior::new(&p).unwrap()),
            Estimator::HermitePoly(best_poly_oracle(&p, 8).unwrap().expansion),
            Estimator::HermitePoly(best_poly_oracle(&p, 1).unwrap().expansion),
            Estimator::Linear(optimal_linear(&p, &dict).unwrap()),
            Estimator::Zero,
        ];
        let run = paired_risk(&estimators, &p, &dict, 2000, 17).unwrap();
        for (a, b) in [(0, 1), (1, 2), (3, 4)] {
            let (diff, se) = run.paired_difference(a, b);
            assert!(diff <= 3.0 * se, "{a} vs {b}: {diff} +- {se}");
        }
        let (diff, se) = run.paired_difference(2, 3);
        assert!(diff.abs() <= 3.0 * se.max(1e-12));
        let exact = [
            (1, best_poly_oracle(&p, 8).unwrap().risk),
            (2, best_poly_oracle(&p, 1).unwrap().risk),
            (3, LinearPredictor::closed_form_risk(&p)),
            (4, 256.0),
        ];
        for (i, value) in exact {
            let r = &run.reports[i];
            assert!(
                r.ci95.0 - 1.0 * r.stderr <= value && value <= r.ci95.1 + 1.0 * r.stderr,
                "{i}"
            );
        }
    }

    #[cfg(feature = "parallel")]
    #[test]
    fn thread_count_does_not_change_reports() {
        let p = ModelParams::spike(64, 3, 1.0, 4.0);
        let d = identity(64);
        let est = [Estimator::SoftThreshold { tau: 2.0 }, Estimator::Zero];
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| paired_risk(&est, &p, &d, 500, 4).unwrap())
        };
        let a = run(1);
        let b = run(4);
        assert_eq!(a.losses, b.losses);
        for (x, y) in a.reports.iter().zip(&b.reports) {
            assert_eq!(x.mean_loss, y.mean_loss);
            assert_eq!(x.stderr, y.stderr);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn variance_bound_holds(
            coeffs in prop::collection::vec(-3.0f64..3.0, 1..=7),
            scale in 0.3f64..4.0,
            k in 1usize..20,
            sigma in 0.2f64..3.0,
            gamma in 0.0f64..10.0,
        ) {
            let p = ModelParams::spike(40, k, sigma, gamma);
            let f = HermiteExpansion::new(scale, coeffs).unwrap();
            let check = variance_bound_check(&f, &p).unwrap();
            prop_assert!(check.pass, "lhs {} rhs {}", check.lhs, check.rhs);
        }
    }
}
