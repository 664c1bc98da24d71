//! Univariate polynomial bases: monomial and Chebyshev representations,
//! probabilist's Hermite polynomials and Gaussian moments.

mod chebyshev;
mod hermite;
pub mod quadrature;

pub use chebyshev::cheb_project;
pub use hermite::{
    gaussian_abs_moment, hermite_expand, hermite_he, hermite_normalized, normalized_values,
    scaled_hermite_coeffs, HermiteExpansion, HERMITE_DEGREE_LIMIT,
};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Largest degree accepted for Chebyshev-basis construction.
pub const CHEBYSHEV_DEGREE_LIMIT: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Basis {
    Monomial,
    ChebyshevOnInterval,
}

/// A univariate polynomial stored as a coefficient vector in a declared basis.
///
/// For [`Basis::ChebyshevOnInterval`] the coefficients multiply `T_j(u)` where
/// `u` is the affine image of `x` from `interval` onto `[-1, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PolynomialRecord", into = "PolynomialRecord")]
pub struct Polynomial {
    basis: Basis,
    interval: Option<[f64; 2]>,
    coeffs: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct PolynomialRecord {
    basis: Basis,
    interval: Option<[f64; 2]>,
    coeffs: Vec<f64>,
}

impl TryFrom<PolynomialRecord> for Polynomial {
    type Error = Error;

    fn try_from(r: PolynomialRecord) -> Result<Self> {
        match r.basis {
            Basis::Monomial => Ok(Polynomial::monomial(r.coeffs)),
            Basis::ChebyshevOnInterval => {
                let [a, b] = r.interval.ok_or_else(|| {
                    Error::InvalidPolynomial("chebyshev basis requires an interval".into())
                })?;
                Polynomial::chebyshev(r.coeffs, a, b)
            }
        }
    }
}

impl From<Polynomial> for PolynomialRecord {
    fn from(p: Polynomial) -> Self {
        PolynomialRecord {
            basis: p.basis,
            interval: p.interval,
            coeffs: p.coeffs,
        }
    }
}

fn trim_trailing_zeros(mut coeffs: Vec<f64>) -> Vec<f64> {
    while coeffs.len() > 1 && coeffs[coeffs.len() - 1] == 0.0 {
        coeffs.pop();
    }
    if coeffs.is_empty() {
        coeffs.push(0.0);
    }
    coeffs
}

impl Polynomial {
    pub fn monomial(coeffs: Vec<f64>) -> Self {
        Polynomial {
            basis: Basis::Monomial,
            interval: None,
            coeffs: trim_trailing_zeros(coeffs),
        }
    }

    pub fn chebyshev(coeffs: Vec<f64>, a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(Error::InvalidPolynomial(format!(
                "chebyshev interval [{a}, {b}] must be finite with a < b"
            )));
        }
        Ok(Polynomial {
            basis: Basis::ChebyshevOnInterval,
            interval: Some([a, b]),
            coeffs: trim_trailing_zeros(coeffs),
        })
    }

    pub fn zero() -> Self {
        Polynomial::monomial(vec![0.0])
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn interval(&self) -> Option<(f64, f64)> {
        self.interval.map(|[a, b]| (a, b))
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Whether `x` lies outside the Chebyshev interval. Monomial polynomials
    /// have no interval and never extrapolate.
    pub fn is_extrapolation(&self, x: f64) -> bool {
        match self.interval {
            Some([a, b]) => x < a || x > b,
            None => false,
        }
    }

    /// Horner for monomials, Clenshaw for Chebyshev.
    pub fn eval(&self, x: f64) -> f64 {
        match self.basis {
            Basis::Monomial => self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c),
            Basis::ChebyshevOnInterval => {
                let [a, b] = self.interval.expect("chebyshev polynomial has an interval");
                chebyshev::clenshaw(&self.coeffs, (2.0 * x - (a + b)) / (b - a))
            }
        }
    }

    /// Value together with the extrapolation flag.
    pub fn eval_checked(&self, x: f64) -> (f64, bool) {
        (self.eval(x), self.is_extrapolation(x))
    }

    /// Coefficients of the same polynomial in the monomial basis of `x`.
    ///
    /// Chebyshev-to-monomial conversion is ill-conditioned at high degree; it
    /// is only used on the Hermite path, which is capped at degree 64.
    pub fn to_monomial(&self) -> Polynomial {
        match self.basis {
            Basis::Monomial => self.clone(),
            Basis::ChebyshevOnInterval => {
                let [a, b] = self.interval.expect("chebyshev polynomial has an interval");
                // u = alpha x + shift
                let alpha = 2.0 / (b - a);
                let shift = -(a + b) / (b - a);
                let n = self.coeffs.len();
                let mut prev = vec![0.0; n];
                let mut cur = vec![0.0; n];
                prev[0] = 1.0; // T_0(u)
                if n > 1 {
                    cur[0] = shift; // T_1(u) = alpha x + shift
                    cur[1] = alpha;
                }
                let mut out = vec![0.0; n];
                for (i, o) in out.iter_mut().enumerate() {
                    *o += self.coeffs[0] * prev[i];
                }
                for j in 1..n {
                    for (i, o) in out.iter_mut().enumerate() {
                        *o += self.coeffs[j] * cur[i];
                    }
                    if j + 1 < n {
                        // T_{j+1} = 2u T_j - T_{j-1}
                        let mut next = vec![0.0; n];
                        for i in 0..n {
                            let mut v = 2.0 * shift * cur[i] - prev[i];
                            if i > 0 {
                                v += 2.0 * alpha * cur[i - 1];
                            }
                            next[i] = v;
                        }
                        prev = std::mem::replace(&mut cur, next);
                    }
                }
                Polynomial::monomial(out)
            }
        }
    }
}

/// Free-function form of [`Polynomial::eval`].
pub fn poly_eval(p: &Polynomial, x: f64) -> f64 {
    p.eval(x)
}
