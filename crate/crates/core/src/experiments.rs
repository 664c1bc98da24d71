//! The acceptance experiments A1-A6 with their pinned tolerances and
//! runtime budgets. Shared by the test suite and `reproduce-all`.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::estimators::{
    best_poly_oracle, estimate_poly, lower_bound_thm1, optimal_linear, Estimator, LinearPredictor,
};
use crate::evaluation::{neumaier_sum, paired_risk, variance_bound_check};
use crate::model::{build_dictionary, sample_pair, trial_rng, DictionaryKind, ModelParams};
use crate::par::map_indexed;
use crate::polybasis::quadrature::gauss_hermite;
use crate::polybasis::{hermite_expand, normalized_values, Polynomial};
use crate::relu_approx::{
    build_poly_soft_threshold, build_relu_poly, certify_soft_threshold, relu, sup_error_profile,
    ReluPolySpec, SoftThresholdPolySpec, CERTIFICATION_GRID,
};
use crate::Result;

pub const A1_DEGREES: std::ops::RangeInclusive<usize> = 1..=8;
pub const A1_LINEAR_REL_TOL: f64 = 1e-6;
pub const A1_NEAR_TRIVIAL_FRACTION: f64 = 0.5;
pub const A1_BUDGET_S: f64 = 5.0;

pub const A2_DEGREES: [usize; 5] = [50, 100, 200, 400, 800];
pub const A2_TAU: f64 = 0.1;
pub const A2_R: f64 = 1.0;
pub const A2_BOUND_FACTOR: f64 = 2.0;
pub const A2_BUDGET_S: f64 = 30.0;

pub const A3_N: usize = 16384;
pub const A3_TRIALS: usize = 500;
pub const A3_NN_FRACTION: f64 = 0.25;
pub const A3_LINEAR_FRACTION: f64 = 0.85;
pub const A3_BUDGET_S: f64 = 60.0;

pub const A4_N: usize = 256;
pub const A4_L1_CAP: f64 = 60.0;
pub const A4_TRIALS: usize = 500;
pub const A4_RISK_FACTOR: f64 = 2.0;
pub const A4_BUDGET_S: f64 = 120.0;

pub const A5_TRIALS: usize = 1000;
pub const A5_L1_FACTOR: f64 = 6.0;
pub const A5_FREQUENCY: f64 = 0.95;
pub const A5_BUDGET_S: f64 = 60.0;

pub const A6_MAX_DEGREE: usize = 8;
pub const A6_SAMPLES: usize = 1_000_000;
pub const A6_ORTHONORMALITY_TOL: f64 = 0.02;
pub const A6_EXPANSIONS: usize = 100;
pub const A6_PLANCHEREL_REL_TOL: f64 = 1e-6;
pub const A6_BUDGET_S: f64 = 30.0;

pub const CRITERIA: [&str; 6] = ["A1", "A2", "A3", "A4", "A5", "A6"];

/// Master seed of the acceptance runs.
pub const DEFAULT_SEED: u64 = 20240607;

/// Run settings. `corrupt` names a criterion whose main tolerance is
/// replaced by an unsatisfiable value, to exercise the failure path.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AcceptanceSettings {
    pub seed: u64,
    #[serde(default)]
    pub corrupt: Option<String>,
}

impl AcceptanceSettings {
    pub fn new(seed: u64) -> Self {
        AcceptanceSettings {
            seed,
            corrupt: None,
        }
    }

    fn tolerance(&self, id: &str, pinned: f64, corrupted: f64) -> f64 {
        if self.corrupt.as_deref() == Some(id) {
            corrupted
        } else {
            pinned
        }
    }
}

/// Result of one criterion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionOutcome {
    pub id: String,
    pub passed: bool,
    pub detail: String,
    pub elapsed_s: f64,
    pub budget_s: f64,
    pub metrics: Vec<(String, f64)>,
}

impl CriterionOutcome {
    pub fn line(&self) -> String {
        format!(
            "{} {}: {} ({:.2}s of {:.0}s)",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.detail,
            self.elapsed_s,
            self.budget_s
        )
    }
}

struct Check {
    parts: Vec<(bool, String)>,
    metrics: Vec<(String, f64)>,
}

impl Check {
    fn new() -> Self {
        Check {
            parts: Vec::new(),
            metrics: Vec::new(),
        }
    }

    fn require(&mut self, ok: bool, what: String) {
        self.parts.push((ok, what));
    }

    fn metric(&mut self, name: impl Into<String>, value: f64) {
        self.metrics.push((name.into(), value));
    }

    fn finish(self, id: &str, start: Instant, budget: f64) -> CriterionOutcome {
        let elapsed = start.elapsed().as_secs_f64();
        let mut passed = self.parts.iter().all(|(ok, _)| *ok);
        let mut detail: Vec<String> = self
            .parts
            .into_iter()
            .map(|(ok, what)| format!("[{}] {what}", if ok { "ok" } else { "x" }))
            .collect();
        if elapsed > budget {
            passed = false;
            detail.push(format!("[x] runtime {elapsed:.2}s exceeds {budget:.0}s"));
        }
        CriterionOutcome {
            id: id.into(),
            passed,
            detail: detail.join("; "),
            elapsed_s: elapsed,
            budget_s: budget,
            metrics: self.metrics,
        }
    }
}

fn errored(id: &str, start: Instant, budget: f64, err: crate::Error) -> CriterionOutcome {
    CriterionOutcome {
        id: id.into(),
        passed: false,
        detail: format!("error: {err}"),
        elapsed_s: start.elapsed().as_secs_f64(),
        budget_s: budget,
        metrics: Vec::new(),
    }
}

fn wrap<F>(id: &str, budget: f64, body: F) -> CriterionOutcome
where
    F: FnOnce(&mut Check) -> Result<()>,
{
    let start = Instant::now();
    let mut check = Check::new();
    match body(&mut check) {
        Ok(()) => check.finish(id, start, budget),
        Err(e) => errored(id, start, budget, e),
    }
}

/// Lower-bound instance of A1.
pub fn a1_params() -> ModelParams {
    ModelParams::spike(1024, 8, 1.0, 4.0)
}

/// Oracle risks against the lower bound, the linear optimum at `d = 1` and
/// near-trivial risk at `d = 3`.
pub fn run_a1(settings: &AcceptanceSettings) -> CriterionOutcome {
    wrap("A1", A1_BUDGET_S, |c| {
        let p = a1_params();
        let trivial = p.gamma * p.gamma * p.k as f64;
        let linear = LinearPredictor::closed_form_risk(&p);
        let rel_tol = settings.tolerance("A1", A1_LINEAR_REL_TOL, -1.0);
        let mut above_bound = true;
        let mut risk1 = f64::NAN;
        let mut risk3 = f64::NAN;
        for d in A1_DEGREES {
            let risk = best_poly_oracle(&p, d)?.risk;
            let lb = lower_bound_thm1(&p, d)?;
            c.metric(format!("oracle_risk_d{d}"), risk);
            c.metric(format!("thm1_bound_d{d}"), lb);
            above_bound &= risk >= lb;
            if d == 1 {
                risk1 = risk;
            }
            if d == 3 {
                risk3 = risk;
            }
        }
        c.require(
            above_bound,
            "oracle risk >= lower bound for d = 1..8".into(),
        );
        let rel = (risk1 - linear).abs() / linear;
        c.require(
            rel <= rel_tol,
            format!("risk(d=1) = {risk1:.6} vs {linear:.6}, rel {rel:.1e} <= {rel_tol:.0e}"),
        );
        let floor = A1_NEAR_TRIVIAL_FRACTION * trivial;
        c.require(risk3 >= floor, format!("risk(d=3) = {risk3:.4} >= {floor}"));
        Ok(())
    })
}

/// Negative-region error of the ReLU approximant against the analytic bound.
pub fn run_a2(settings: &AcceptanceSettings) -> CriterionOutcome {
    wrap("A2", A2_BUDGET_S, |c| {
        let factor = settings.tolerance("A2", A2_BOUND_FACTOR, 0.0);
        let mut within = true;
        let mut points = Vec::new();
        let mut worst_ratio = 0.0f64;
        for d in A2_DEGREES {
            let spec = ReluPolySpec::new(d, A2_TAU, A2_R)?;
            let p = build_relu_poly(&spec)?;
            let prof = sup_error_profile(&p, relu, (-A2_R, A2_R), 0.0, CERTIFICATION_GRID)?;
            let err = prof.negative.expect("interval has a negative part").sup;
            let bound = spec.bound_negative();
            c.metric(format!("err_neg_d{d}"), err);
            c.metric(format!("bound_neg_d{d}"), bound);
            worst_ratio = worst_ratio.max(err / bound);
            within &= err <= factor * bound;
            points.push(((d as f64).sqrt(), err.ln()));
        }
        let slope = least_squares_slope(&points);
        c.metric("log_err_vs_sqrt_d_slope", slope);
        c.require(
            within,
            format!("negative-region error <= {factor} x bound (worst ratio {worst_ratio:.3e})"),
        );
        c.require(
            slope < 0.0,
            format!("log-error slope vs sqrt(d) = {slope:.4} < 0"),
        );
        Ok(())
    })
}

fn least_squares_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}

/// Threshold `2 sqrt(log n)`.
pub fn log_threshold(n: usize) -> f64 {
    2.0 * (n as f64).ln().sqrt()
}

/// Separation between the soft-threshold network and the best linear map.
pub fn run_a3(settings: &AcceptanceSettings) -> CriterionOutcome {
    wrap("A3", A3_BUDGET_S, |c| {
        let p = ModelParams::spike(A3_N, 2, 1.0, 30.0);
        let dict = build_dictionary(DictionaryKind::Identity, A3_N, A3_N, 0)?;
        let trivial = p.gamma * p.gamma * p.k as f64;
        let tau = log_threshold(A3_N);
        let estimators = [
            Estimator::SoftThreshold { tau },
            Estimator::Linear(optimal_linear(&p, &dict)?),
        ];
        let run = paired_risk(&estimators, &p, &dict, A3_TRIALS, settings.seed)?;
        let (nn, lin) = (&run.reports[0], &run.reports[1]);
        let linear_exact = LinearPredictor::closed_form_risk(&p);
        let nn_fraction = settings.tolerance("A3", A3_NN_FRACTION, 0.0);
        c.metric("nn_mean", nn.mean_loss);
        c.metric("nn_stderr", nn.stderr);
        c.metric("linear_mean", lin.mean_loss);
        c.metric("linear_stderr", lin.stderr);
        c.metric("linear_closed_form", linear_exact);
        c.require(
            nn.mean_loss <= nn_fraction * trivial,
            format!("NN risk {:.2} <= {}", nn.mean_loss, nn_fraction * trivial),
        );
        c.require(
            linear_exact >= A3_LINEAR_FRACTION * trivial,
            format!(
                "linear closed form {linear_exact:.2} >= {}",
                A3_LINEAR_FRACTION * trivial
            ),
        );
        c.require(
            nn.ci95.1 < lin.ci95.0,
            format!(
                "CIs disjoint: NN [{:.2}, {:.2}] vs linear [{:.2}, {:.2}]",
                nn.ci95.0, nn.ci95.1, lin.ci95.0, lin.ci95.1
            ),
        );
        Ok(())
    })
}

/// Upper-bound instance of A4 and A5.
pub fn a4_params() -> ModelParams {
    ModelParams::exact_support(A4_N, A4_N, 1, 1.0, 20.0).with_l1_cap(A4_L1_CAP)
}

/// Polynomial soft-threshold spec of A4 and A5 at the calibrated degree.
pub fn a4_spec() -> Result<SoftThresholdPolySpec> {
    let tau = log_threshold(A4_N);
    SoftThresholdPolySpec::calibrated(tau, A4_L1_CAP, tau / A4_N as f64)
}

/// Polynomial network against the soft-threshold network on shared samples.
pub fn run_a4(settings: &AcceptanceSettings) -> CriterionOutcome {
    wrap("A4", A4_BUDGET_S, |c| {
        let p = a4_params();
        let dict = build_dictionary(DictionaryKind::Identity, A4_N, A4_N, 0)?;
        let spec = a4_spec()?;
        let st = build_poly_soft_threshold(&spec)?;
        let estimators = [
            Estimator::SoftThreshold { tau: spec.tau },
            Estimator::PolySoftThreshold(st),
        ];
        let run = paired_risk(&estimators, &p, &dict, A4_TRIALS, settings.seed)?;
        let (nn, poly) = (&run.reports[0], &run.reports[1]);
        let factor = settings.tolerance("A4", A4_RISK_FACTOR, 0.0);
        c.metric("degree", spec.d as f64);
        c.metric("tau", spec.tau);
        c.metric("nn_mean", nn.mean_loss);
        c.metric("nn_stderr", nn.stderr);
        c.metric("poly_mean", poly.mean_loss);
        c.metric("poly_stderr", poly.stderr);
        c.metric("poly_extrapolated_trials", poly.extrapolated_trials as f64);
        c.require(
            poly.mean_loss <= factor * nn.mean_loss,
            format!(
                "poly risk {:.3} <= {factor} x NN risk {:.3} (d = {})",
                poly.mean_loss, nn.mean_loss, spec.d
            ),
        );
        Ok(())
    })
}

/// Flatness and linearity certificate plus the l1 recovery frequency.
pub fn run_a5(settings: &AcceptanceSettings) -> CriterionOutcome {
    wrap("A5", A5_BUDGET_S, |c| {
        let p = a4_params();
        let dict = build_dictionary(DictionaryKind::Identity, A4_N, A4_N, 0)?;
        let spec = a4_spec()?;
        let st = build_poly_soft_threshold(&spec)?;
        let cert = certify_soft_threshold(&st, CERTIFICATION_GRID);
        c.metric("flat_error", cert.flat_error);
        c.metric("linear_error", cert.linear_error);
        c.require(
            cert.flat_error <= cert.flat_limit,
            format!(
                "|rho| = {:.3e} <= eps = {:.3e} on [-tau, tau]",
                cert.flat_error, cert.flat_limit
            ),
        );
        c.require(
            cert.linear_error <= cert.linear_limit,
            format!(
                "|rho - x| = {:.4} <= 3 tau + eps = {:.4} on tau < |x| < M_tau",
                cert.linear_error, cert.linear_limit
            ),
        );
        let limit = A5_L1_FACTOR * p.k as f64 * spec.tau;
        let hits: Vec<Result<bool>> = map_indexed(A5_TRIALS, |t| {
            let s = sample_pair(&p, &dict, &mut trial_rng(settings.seed, t as u64))?;
            let est = estimate_poly(&dict, &p.w, &st, &s.x)?;
            let l1: f64 = est.zhat.iter().zip(&s.z).map(|(a, b)| (a - b).abs()).sum();
            Ok(l1 <= limit)
        });
        let hits = hits.into_iter().collect::<Result<Vec<_>>>()?;
        let frequency = hits.iter().filter(|h| **h).count() as f64 / A5_TRIALS as f64;
        let needed = settings.tolerance("A5", A5_FREQUENCY, 1.01);
        c.metric("l1_event_frequency", frequency);
        c.require(
            frequency >= needed,
            format!(
                "||Zhat - Z||_1 <= 6 k tau in {:.1}% of trials (need {:.0}%)",
                100.0 * frequency,
                100.0 * needed
            ),
        );
        Ok(())
    })
}

/// Hermite orthonormality, Plancherel, the variance bound and the trivial
/// oracle.
pub fn run_a6(settings: &AcceptanceSettings) -> CriterionOutcome {
    wrap("A6", A6_BUDGET_S, |c| {
        let orth_tol = settings.tolerance("A6", A6_ORTHONORMALITY_TOL, 0.0);
        let gram = empirical_hermite_gram(A6_MAX_DEGREE, A6_SAMPLES, settings.seed);
        let mut worst = 0.0f64;
        for (i, row) in gram.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((v - target).abs());
            }
        }
        c.metric("orthonormality_max_dev", worst);
        c.require(
            worst <= orth_tol,
            format!("max |E[H_i H_j] - delta_ij| = {worst:.4} <= {orth_tol}"),
        );

        let params = a1_params();
        let rule = gauss_hermite(32);
        let mut rng = ChaCha8Rng::seed_from_u64(settings.seed ^ 0x5eed);
        let mut plancherel_worst = 0.0f64;
        let mut resynthesis_worst = 0.0f64;
        let mut lemma_ok = true;
        for _ in 0..A6_EXPANSIONS {
            let degree = rng.random_range(0..=6usize);
            let coeffs: Vec<f64> = (0..=degree).map(|_| rng.random_range(-2.0..2.0)).collect();
            let scale = rng.random_range(0.5..3.0);
            let poly = Polynomial::monomial(coeffs);
            let expansion = hermite_expand(&poly, scale)?;
            let quad: f64 = rule
                .iter()
                .map(|&(x, w)| w * poly.eval(scale * x).powi(2))
                .sum();
            let energy = expansion.gaussian_second_moment();
            plancherel_worst =
                plancherel_worst.max((quad - energy).abs() / quad.max(f64::MIN_POSITIVE));
            for &(x, _) in &rule {
                let v = poly.eval(scale * x);
                let back = expansion.eval(scale * x);
                resynthesis_worst = resynthesis_worst.max((v - back).abs() / (1.0 + v.abs()));
            }
            lemma_ok &= variance_bound_check(&expansion, &params)?.pass;
        }
        c.metric("plancherel_max_rel", plancherel_worst);
        c.metric("resynthesis_max_rel", resynthesis_worst);
        c.require(
            plancherel_worst <= A6_PLANCHEREL_REL_TOL && resynthesis_worst <= A6_PLANCHEREL_REL_TOL,
            format!(
                "Plancherel rel {plancherel_worst:.1e}, round trip rel {resynthesis_worst:.1e} <= {A6_PLANCHEREL_REL_TOL:.0e}"
            ),
        );
        c.require(
            lemma_ok,
            format!("variance bound holds on {A6_EXPANSIONS} expansions"),
        );

        let trivial = best_poly_oracle(&params, 0)?.risk;
        let expected = params.gamma * params.gamma * params.k as f64;
        c.require(
            trivial == expected,
            format!("oracle(d=0) = {trivial} = gamma^2 k = {expected}"),
        );
        Ok(())
    })
}

/// `E[H_i(X) H_j(X)]` over `samples` standard normal draws, `i, j <= max_degree`.
pub fn empirical_hermite_gram(max_degree: usize, samples: usize, seed: u64) -> Vec<Vec<f64>> {
    const CHUNKS: usize = 100;
    let size = max_degree + 1;
    let per_chunk = samples.div_ceil(CHUNKS);
    let partials: Vec<Vec<f64>> = map_indexed(CHUNKS, |chunk| {
        let mut rng = trial_rng(seed, chunk as u64);
        let count = per_chunk.min(samples.saturating_sub(chunk * per_chunk));
        let mut acc = vec![0.0; size * size];
        for _ in 0..count {
            let h = normalized_values(max_degree, rng.sample(StandardNormal));
            for i in 0..size {
                for j in i..size {
                    acc[i * size + j] += h[i] * h[j];
                }
            }
        }
        acc
    });
    let mut gram = vec![vec![0.0; size]; size];
    for i in 0..size {
        for j in i..size {
            let v = neumaier_sum(partials.iter().map(|p| p[i * size + j])) / samples as f64;
            gram[i][j] = v;
            gram[j][i] = v;
        }
    }
    gram
}

/// Runs one criterion by id.
pub fn run_criterion(id: &str, settings: &AcceptanceSettings) -> Option<CriterionOutcome> {
    Some(match id {
        "A1" => run_a1(settings),
        "A2" => run_a2(settings),
        "A3" => run_a3(settings),
        "A4" => run_a4(settings),
        "A5" => run_a5(settings),
        "A6" => run_a6(settings),
        _ => return None,
    })
}

/// Runs every criterion in order.
pub fn run_all(settings: &AcceptanceSettings) -> Vec<CriterionOutcome> {
    CRITERIA
        .iter()
        .map(|id| run_criterion(id, settings).expect("known criterion"))
        .collect()
}
