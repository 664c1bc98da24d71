use std::f64::consts::PI;

use super::{Polynomial, CHEBYSHEV_DEGREE_LIMIT};
use crate::{Error, Result};

/// Clenshaw recurrence for `sum_j c_j T_j(u)`.
///
/// Near the endpoints the plain recurrence loses `O(d^2)` ulps; for
/// `|u| > 1/2` Reinsch's modification is used instead, which tracks the
/// differences `b_k -/+ b_{k+1}`.
pub(super) fn clenshaw(coeffs: &[f64], u: f64) -> f64 {
    if u > 0.5 {
        let delta = 2.0 * (u - 1.0);
        let (mut b, mut d) = (0.0, 0.0);
        for &c in coeffs.iter().skip(1).rev() {
            d += c + delta * b;
            b += d;
        }
        coeffs[0] + (u - 1.0) * b + d
    } else if u < -0.5 {
        let delta = 2.0 * (u + 1.0);
        let (mut b, mut d) = (0.0, 0.0);
        for &c in coeffs.iter().skip(1).rev() {
            d = c + delta * b - d;
            b = d - b;
        }
        coeffs[0] + (u + 1.0) * b - d
    } else {
        let two_u = 2.0 * u;
        let mut b1 = 0.0;
        let mut b2 = 0.0;
        for &c in coeffs.iter().skip(1).rev() {
            let b0 = c + two_u * b1 - b2;
            b2 = b1;
            b1 = b0;
        }
        coeffs[0] + u * b1 - b2
    }
}

/// Chebyshev interpolant of `f` at the `d + 1` first-kind Chebyshev points
/// of `[a, b]`.
///
/// Coefficients come from the discrete cosine sum
/// `c_j = (2/N) sum_k f(x_k) cos(j pi (k + 1/2) / N)` with `c_0` halved.
/// The cosines are read from a table of `cos(pi r / 2N)` so that no
/// large-argument `cos` call is ever made.
pub fn cheb_project<F>(f: F, d: usize, interval: (f64, f64)) -> Result<Polynomial>
where
    F: Fn(f64) -> f64,
{
    if d > CHEBYSHEV_DEGREE_LIMIT {
        return Err(Error::DegreeLimit {
            degree: d,
            limit: CHEBYSHEV_DEGREE_LIMIT,
        });
    }
    let (a, b) = interval;
    if !(a.is_finite() && b.is_finite() && a < b) {
        return Err(Error::InvalidPolynomial(format!(
            "interval [{a}, {b}] must be finite with a < b"
        )));
    }
    let n = d + 1;
    let period = 4 * n;
    let table: Vec<f64> = (0..period)
        .map(|r| (PI * r as f64 / (2 * n) as f64).cos())
        .collect();

    let half_width = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut values = Vec::with_capacity(n);
    for k in 0..n {
        let u = table[2 * k + 1];
        let x = mid + half_width * u;
        let v = f(x);
        if !v.is_finite() {
            return Err(Error::NonFiniteNode { node: x, value: v });
        }
        values.push(v);
    }

    let scale = 2.0 / n as f64;
    let coeffs: Vec<f64> = (0..n)
        .map(|j| {
            let mut acc = 0.0;
            for (k, &v) in values.iter().enumerate() {
                // cos(j pi (2k+1) / 2N)
                acc += v * table[(j * (2 * k + 1)) % period];
            }
            if j == 0 {
                0.5 * scale * acc
            } else {
                scale * acc
            }
        })
        .collect();
    Polynomial::chebyshev(coeffs, a, b)
}
