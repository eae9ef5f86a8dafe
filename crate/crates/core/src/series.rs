//! Truncated power-series arithmetic on Taylor coefficients.
//!
//! A [`PowerSeries`] stores `Y[k] = y^(k)(t0) / k!` for `k = 0..=NL`, so that
//! `y(t) ≈ Σ Y[k] (t - t0)^k` inside one integration window. Every rule here
//! produces the coefficient of order `k` from coefficients of order `≤ k` of
//! its inputs, which makes the result independent of the truncation order:
//! computing at `NL` and truncating to `NL' < NL` is bit-identical to computing
//! at `NL'` directly.
//!
//! The free functions mirror the classical transformation rules (linear
//! combination, Cauchy product, triple product, quotient, sine/cosine pair,
//! exponential, square root, monomial). The `*_at` helpers compute a single
//! coefficient and are what the model recurrences use order by order.

use crate::error::{Error, Result};

/// Highest supported truncation order.
pub const MAX_ORDER: usize = 32;

/// Smallest admissible `|z[0]|` for a quotient `x / z`.
pub const DIV_FLOOR: f64 = 1e-10;

/// Smallest admissible `x[0]` for `sqrt(x)`.
pub const SQRT_FLOOR: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct PowerSeries {
    coeffs: Vec<f64>,
    t0: f64,
}

impl PowerSeries {
    /// Builds a series from its coefficients. The truncation order is
    /// `coeffs.len() - 1`.
    pub fn new(coeffs: Vec<f64>, t0: f64) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::Dimension("series needs at least one coefficient".into()));
        }
        if coeffs.len() > MAX_ORDER + 1 {
            return Err(Error::Dimension(format!(
                "truncation order {} exceeds the maximum {}",
                coeffs.len() - 1,
                MAX_ORDER
            )));
        }
        Ok(Self { coeffs, t0 })
    }

    pub fn zeros(order: usize, t0: f64) -> Result<Self> {
        Self::new(vec![0.0; order + 1], t0)
    }

    /// Constant signal `c`.
    pub fn constant(c: f64, order: usize, t0: f64) -> Result<Self> {
        let mut s = Self::zeros(order, t0)?;
        s.coeffs[0] = c;
        Ok(s)
    }

    /// The monomial `(t - t0)^n`, i.e. the Kronecker delta at index `n`.
    pub fn kronecker(n: usize, order: usize) -> Result<Self> {
        if n > order {
            return Err(Error::Dimension(format!(
                "kronecker index {n} outside 0..={order}"
            )));
        }
        let mut s = Self::zeros(order, 0.0)?;
        s.coeffs[n] = 1.0;
        Ok(s)
    }

    /// Truncation order `NL`.
    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    /// Keeps orders `0..=order`.
    pub fn truncate(&self, order: usize) -> Result<Self> {
        if order > self.order() {
            return Err(Error::Dimension(format!(
                "cannot truncate order {} series to order {order}",
                self.order()
            )));
        }
        Ok(Self {
            coeffs: self.coeffs[..=order].to_vec(),
            t0: self.t0,
        })
    }

    /// Horner evaluation of the truncated polynomial at `t`.
    pub fn eval(&self, t: f64) -> f64 {
        horner(&self.coeffs, t - self.t0)
    }

    /// Time derivative of the truncated polynomial at `t`.
    pub fn eval_derivative(&self, t: f64) -> f64 {
        horner_derivative(&self.coeffs, t - self.t0)
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_finite())
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.order() != other.order() {
            return Err(Error::Dimension(format!(
                "series orders differ: {} vs {}",
                self.order(),
                other.order()
            )));
        }
        if self.t0 != other.t0 {
            return Err(Error::Dimension(format!(
                "series expansion points differ: {} vs {}",
                self.t0, other.t0
            )));
        }
        Ok(())
    }
}

impl std::ops::Index<usize> for PowerSeries {
    type Output = f64;

    fn index(&self, k: usize) -> &f64 {
        &self.coeffs[k]
    }
}

/// The coupled transforms of `sin θ(t)` and `cos θ(t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesPair {
    pub phi: PowerSeries,
    pub psi: PowerSeries,
}

/// `c·x + d·z`
pub fn linear(c: f64, x: &PowerSeries, d: f64, z: &PowerSeries) -> Result<PowerSeries> {
    x.check_compatible(z)?;
    let coeffs = x
        .coeffs
        .iter()
        .zip(&z.coeffs)
        .map(|(a, b)| c * a + d * b)
        .collect();
    Ok(PowerSeries { coeffs, t0: x.t0 })
}

/// Cauchy product `x·z`.
pub fn mul(x: &PowerSeries, z: &PowerSeries) -> Result<PowerSeries> {
    x.check_compatible(z)?;
    let coeffs = (0..=x.order())
        .map(|k| cauchy_at(&x.coeffs, &z.coeffs, k))
        .collect();
    Ok(PowerSeries { coeffs, t0: x.t0 })
}

/// Triple product `x·z·w` as the nested convolution over `0 ≤ m ≤ m1 ≤ k`.
pub fn mul3(x: &PowerSeries, z: &PowerSeries, w: &PowerSeries) -> Result<PowerSeries> {
    x.check_compatible(z)?;
    x.check_compatible(w)?;
    let coeffs = (0..=x.order())
        .map(|k| triple_at(&x.coeffs, &z.coeffs, &w.coeffs, k))
        .collect();
    Ok(PowerSeries { coeffs, t0: x.t0 })
}

/// Quotient `x / z`.
pub fn div(x: &PowerSeries, z: &PowerSeries) -> Result<PowerSeries> {
    div_named(x, z, "divisor")
}

/// Quotient `x / z`, naming the divisor in the error if its leading
/// coefficient is below [`DIV_FLOOR`].
pub fn div_named(x: &PowerSeries, z: &PowerSeries, signal: &str) -> Result<PowerSeries> {
    x.check_compatible(z)?;
    check_divisor(z.coeffs[0], signal)?;
    let mut y = vec![0.0; x.coeffs.len()];
    for k in 0..y.len() {
        y[k] = quotient_at(&x.coeffs, &z.coeffs, &y, k);
    }
    Ok(PowerSeries { coeffs: y, t0: x.t0 })
}

/// `sin θ` and `cos θ`, always produced together since each recurrence
/// consumes the other.
pub fn sincos(theta: &PowerSeries) -> SeriesPair {
    let n = theta.coeffs.len();
    let mut phi = vec![0.0; n];
    let mut psi = vec![0.0; n];
    (phi[0], psi[0]) = theta.coeffs[0].sin_cos();
    for k in 1..n {
        phi[k] = sin_step_at(&psi, &theta.coeffs, k);
        psi[k] = -sin_step_at(&phi, &theta.coeffs, k);
    }
    SeriesPair {
        phi: PowerSeries { coeffs: phi, t0: theta.t0 },
        psi: PowerSeries { coeffs: psi, t0: theta.t0 },
    }
}

/// `exp(x)`.
pub fn exp(x: &PowerSeries) -> Result<PowerSeries> {
    let n = x.coeffs.len();
    let mut y = vec![0.0; n];
    y[0] = x.coeffs[0].exp();
    if !y[0].is_finite() {
        return Err(Error::Range(format!("exp({}) overflows", x.coeffs[0])));
    }
    for k in 1..n {
        y[k] = sin_step_at(&y, &x.coeffs, k);
    }
    Ok(PowerSeries { coeffs: y, t0: x.t0 })
}

/// Principal square root `sqrt(x)`.
pub fn sqrt(x: &PowerSeries) -> Result<PowerSeries> {
    sqrt_named(x, "radicand")
}

pub fn sqrt_named(x: &PowerSeries, signal: &str) -> Result<PowerSeries> {
    if !(x.coeffs[0] > SQRT_FLOOR) {
        return Err(Error::SingularSqrt {
            signal: signal.to_string(),
            value: x.coeffs[0],
        });
    }
    let n = x.coeffs.len();
    let mut y = vec![0.0; n];
    y[0] = x.coeffs[0].sqrt();
    for k in 1..n {
        let inner: f64 = (1..k).map(|m| y[m] * y[k - m]).sum();
        y[k] = (x.coeffs[k] - inner) / (2.0 * y[0]);
    }
    Ok(PowerSeries { coeffs: y, t0: x.t0 })
}

pub(crate) fn check_divisor(leading: f64, signal: &str) -> Result<()> {
    if leading.abs() > DIV_FLOOR {
        Ok(())
    } else {
        Err(Error::SingularDivision {
            signal: signal.to_string(),
            value: leading,
        })
    }
}

/// Coefficient `k` of the Cauchy product: `Σ_{m=0..k} x[m]·z[k-m]`.
#[inline]
pub fn cauchy_at(x: &[f64], z: &[f64], k: usize) -> f64 {
    (0..=k).map(|m| x[m] * z[k - m]).sum()
}

/// `Σ_{m=lo..=hi} x[m]·z[k-m]`, empty when `lo > hi`.
#[inline]
pub fn cauchy_range(x: &[f64], z: &[f64], k: usize, lo: usize, hi: usize) -> f64 {
    (lo..=hi).map(|m| x[m] * z[k - m]).sum()
}

/// Coefficient `k` of `x·z·w`.
#[inline]
pub fn triple_at(x: &[f64], z: &[f64], w: &[f64], k: usize) -> f64 {
    (0..=k)
        .map(|m1| cauchy_at(x, z, m1) * w[k - m1])
        .sum()
}

/// Coefficient `k` of `y = x / z`, given `y[0..k]`.
#[inline]
pub fn quotient_at(x: &[f64], z: &[f64], y: &[f64], k: usize) -> f64 {
    let tail: f64 = (0..k).map(|m| y[m] * z[k - m]).sum();
    (x[k] - tail) / z[0]
}

/// `Σ_{m=0..k-1} ((k-m)/k)·a[m]·b[k-m]`, the shared step of the sine,
/// cosine and exponential rules. Zero for `k = 0`.
#[inline]
pub fn sin_step_at(a: &[f64], b: &[f64], k: usize) -> f64 {
    if k == 0 {
        return 0.0;
    }
    let s: f64 = (0..k).map(|m| (k - m) as f64 * a[m] * b[k - m]).sum();
    s / k as f64
}

#[inline]
pub fn horner(coeffs: &[f64], dt: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * dt + c)
}

#[inline]
pub fn horner_derivative(coeffs: &[f64], dt: f64) -> f64 {
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .rev()
        .fold(0.0, |acc, (k, &c)| acc * dt + k as f64 * c)
}
