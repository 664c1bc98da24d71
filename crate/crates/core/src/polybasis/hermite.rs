use serde::{Deserialize, Serialize};

use super::Polynomial;
use crate::{Error, Result};

/// Largest Hermite index (and expansion degree) supported in double precision.
pub const HERMITE_DEGREE_LIMIT: usize = 64;

const ABS_MOMENT_LIMIT: usize = 128;

fn check_degree(degree: usize) -> Result<()> {
    if degree > HERMITE_DEGREE_LIMIT {
        Err(Error::DegreeLimit {
            degree,
            limit: HERMITE_DEGREE_LIMIT,
        })
    } else {
        Ok(())
    }
}

pub(crate) fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|i| (i as f64).ln()).sum()
}

/// Probabilist's Hermite polynomial `He_n(x)` from
/// `He_{n+1} = x He_n - n He_{n-1}`, `He_0 = 1`, `He_1 = x`.
pub fn hermite_he(nn: usize, x: f64) -> Result<f64> {
    check_degree(nn)?;
    let (mut prev, mut cur) = (1.0, x);
    if nn == 0 {
        return Ok(prev);
    }
    for k in 1..nn {
        let next = x * cur - k as f64 * prev;
        prev = cur;
        cur = next;
    }
    Ok(cur)
}

/// Orthonormal Hermite polynomial `H_n = He_n / sqrt(n!)`, with the
/// normalization carried through the recurrence
/// `H_{n+1} = (x H_n - sqrt(n) H_{n-1}) / sqrt(n+1)`.
pub fn hermite_normalized(nn: usize, x: f64) -> Result<f64> {
    check_degree(nn)?;
    Ok(normalized_values(nn, x)[nn])
}

/// `[H_0(x), ..., H_n(x)]`; no degree guard.
pub fn normalized_values(n: usize, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    out.push(1.0);
    if n == 0 {
        return out;
    }
    out.push(x);
    for k in 1..n {
        let kf = k as f64;
        let next = (x * out[k] - kf.sqrt() * out[k - 1]) / (kf + 1.0).sqrt();
        out.push(next);
    }
    out
}

/// Coefficients of `H_n(t y)` in the basis `H_r(y)`, `r = 0..=n`.
///
/// Uses `He_n(t y) = sum_k n! / (k! (n-2k)!) ((t^2 - 1)/2)^k t^(n-2k) He_(n-2k)(y)`.
/// Only indices with `r = n (mod 2)` are nonzero.
pub fn scaled_hermite_coeffs(n: usize, t: f64) -> Vec<f64> {
    let mut out = vec![0.0; n + 1];
    let half_gap = 0.5 * (t * t - 1.0);
    let ln_n = ln_factorial(n);
    for k in 0..=n / 2 {
        let r = n - 2 * k;
        let magnitude = (0.5 * ln_n - ln_factorial(k) - 0.5 * ln_factorial(r)).exp();
        out[r] = magnitude * half_gap.powi(k as i32) * t.powi(r as i32);
    }
    out
}

/// `E[|N(0, s^2)|^j]`.
pub fn gaussian_abs_moment(j: usize, s: f64) -> Result<f64> {
    if j > ABS_MOMENT_LIMIT {
        return Err(Error::DegreeLimit {
            degree: j,
            limit: ABS_MOMENT_LIMIT,
        });
    }
    if !(s > 0.0) {
        return Err(Error::Domain(format!("scale must be positive, got {s}")));
    }
    let base = if j.is_multiple_of(2) {
        // (j-1)!!
        (1..j).step_by(2).map(|i| i as f64).product::<f64>()
    } else {
        let h = (j - 1) / 2;
        2f64.powi(h as i32)
            * (1..=h).map(|i| i as f64).product::<f64>()
            * (2.0 / std::f64::consts::PI).sqrt()
    };
    Ok(base * s.powi(j as i32))
}

/// A univariate function written as `sum_j coeffs[j] H_j(x / scale)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HermiteExpansion {
    pub scale: f64,
    pub coeffs: Vec<f64>,
}

impl HermiteExpansion {
    pub fn new(scale: f64, coeffs: Vec<f64>) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::Domain(format!(
                "expansion scale must be positive, got {scale}"
            )));
        }
        if coeffs.is_empty() {
            return Err(Error::InvalidPolynomial(
                "expansion needs at least one coefficient".into(),
            ));
        }
        check_degree(coeffs.len() - 1)?;
        Ok(HermiteExpansion { scale, coeffs })
    }

    pub fn zero(scale: f64) -> Self {
        HermiteExpansion {
            scale,
            coeffs: vec![0.0],
        }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn eval(&self, x: f64) -> f64 {
        let h = normalized_values(self.degree(), x / self.scale);
        self.coeffs.iter().zip(&h).map(|(c, v)| c * v).sum()
    }

    /// `E[f(X)^2]` for `X ~ N(0, scale^2)`.
    pub fn gaussian_second_moment(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum()
    }

    /// Sum of squared coefficients excluding the constant term.
    pub fn nonconstant_energy(&self) -> f64 {
        self.coeffs.iter().skip(1).map(|c| c * c).sum()
    }

    /// Re-expand the same function in `H_j(x / new_scale)`.
    pub fn rescale(&self, new_scale: f64) -> Result<HermiteExpansion> {
        let t = new_scale / self.scale;
        let mut out = vec![0.0; self.coeffs.len()];
        for (n, &c) in self.coeffs.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            for (r, a) in scaled_hermite_coeffs(n, t).into_iter().enumerate() {
                out[r] += c * a;
            }
        }
        HermiteExpansion::new(new_scale, out)
    }
}

/// Expand `p` as `sum_k f_k H_k(x / scale)`.
pub fn hermite_expand(p: &Polynomial, scale: f64) -> Result<HermiteExpansion> {
    check_degree(p.degree())?;
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::Domain(format!(
            "expansion scale must be positive, got {scale}"
        )));
    }
    let mono = p.to_monomial();
    let d = mono.degree();
    let mut out = vec![0.0; d + 1];
    for (i, &m) in mono.coeffs().iter().enumerate() {
        if m == 0.0 {
            continue;
        }
        // y^i = sum_k i! / (k! (i-2k)! 2^k) He_(i-2k)(y)
        let c = m * scale.powi(i as i32);
        let ln_i = ln_factorial(i);
        for k in 0..=i / 2 {
            let r = i - 2 * k;
            let factor = (ln_i
                - ln_factorial(k)
                - 0.5 * ln_factorial(r)
                - k as f64 * std::f64::consts::LN_2)
                .exp();
            out[r] += c * factor;
        }
    }
    HermiteExpansion::new(scale, out)
}
