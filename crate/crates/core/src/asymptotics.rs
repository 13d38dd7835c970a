//! The envelope `r̃_m(x) = exp(a(m) + b(m)·x)` with `a(m) = s·m^t`,
//! `b(m) = u·m^v`, its integral bound R̃(m) over [2, m], and the decay ratio
//! `R̃(x) / x^(−1+ε)`.
//!
//! R̃ is evaluated through its logarithm. With `c = a + max(b·m, 2b)` and
//! `L = m − 2`,
//!
//! ```text
//! R̃(m) = e^a (e^{b m} − e^{2b}) / b = e^c · L · g(|b|·L),   g(z) = −expm1(−z)/z
//! ```
//!
//! which stays finite in log space for parameters whose R̃ is far outside
//! the f64 range and is continuous through b = 0 (g(0) = 1).

use crate::error::{Error, Result};
use crate::profile::{compute_r, IndexConvention};
use crate::quadrature::{integrate, QuadOptions};

/// Largest x with `exp(x)` finite.
const MAX_EXP_ARG: f64 = 709.782_712_893_384;
/// Smallest x with `exp(x)` a normal positive f64.
const MIN_EXP_ARG: f64 = -708.396_418_532_264_1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticParams {
    pub s: f64,
    pub t: f64,
    pub u: f64,
    pub v: f64,
    pub epsilon: f64,
}

impl AsymptoticParams {
    pub fn new(s: f64, t: f64, u: f64, v: f64, epsilon: f64) -> Result<Self> {
        if ![s, t, u, v, epsilon].iter().all(|x| x.is_finite()) {
            return Err(Error::InvalidArgument("asymptotic parameters must be finite".into()));
        }
        if epsilon <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "epsilon must be positive, got {epsilon}"
            )));
        }
        Ok(Self { s, t, u, v, epsilon })
    }

    /// s = −7.87, t = 0.11, u = α = 4.73, v = −β = −1.02, ε = 10⁻⁶.
    pub fn published() -> Self {
        Self {
            s: -7.87,
            t: 0.11,
            u: 4.73,
            v: -1.02,
            epsilon: 1e-6,
        }
    }

    pub fn with_epsilon(self, epsilon: f64) -> Result<Self> {
        Self::new(self.s, self.t, self.u, self.v, epsilon)
    }

    pub fn alpha(&self) -> f64 {
        self.u
    }

    pub fn beta(&self) -> f64 {
        -self.v
    }

    /// a(m) = s·m^t.
    pub fn a(&self, m: f64) -> f64 {
        self.s * m.powf(self.t)
    }

    /// b(m) = u·m^v.
    pub fn b(&self, m: f64) -> f64 {
        self.u * m.powf(self.v)
    }
}

fn checked_exp(x: f64, what: &str) -> Result<f64> {
    if x.is_nan() {
        Err(Error::Range(format!("{what}: exponent is NaN")))
    } else if x > MAX_EXP_ARG {
        Err(Error::Range(format!("{what}: exp({x}) overflows f64")))
    } else if x < MIN_EXP_ARG {
        Err(Error::Range(format!("{what}: exp({x}) underflows f64")))
    } else {
        Ok(x.exp())
    }
}

/// r̃_m(x) = exp(s·m^t + u·m^v·x).
pub fn envelope(x: f64, m: f64, params: &AsymptoticParams) -> Result<f64> {
    if !(x >= 2.0 && m >= 2.0) {
        return Err(Error::InvalidArgument(format!(
            "envelope needs x >= 2 and m >= 2, got x = {x}, m = {m}"
        )));
    }
    checked_exp(params.a(m) + params.b(m) * x, "envelope")
}

fn check_order(m: f64) -> Result<()> {
    if m.is_finite() && m > 2.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("R̃(m) needs finite m > 2, got {m}")))
    }
}

/// `(c, b)` with `c = a + max(b·m, 2b)`, the log of the integrand's maximum on [2, m].
fn log_scale(m: f64, params: &AsymptoticParams) -> (f64, f64) {
    let (a, b) = (params.a(m), params.b(m));
    (a + (b * m).max(2.0 * b), b)
}

/// ln R̃(m) from the closed-form antiderivative.
pub fn ln_rtilde_closed(m: f64, params: &AsymptoticParams) -> Result<f64> {
    check_order(m)?;
    let (c, b) = log_scale(m, params);
    let len = m - 2.0;
    let z = b.abs() * len;
    let g = if z == 0.0 { 1.0 } else { -(-z).exp_m1() / z };
    Ok(c + len.ln() + g.ln())
}

/// R̃(m) = ∫₂^m exp(a(m) + b(m)·x) dx in closed form; `(m − 2)·e^{a(m)}` when b(m) = 0.
pub fn rtilde_closed(m: f64, params: &AsymptoticParams) -> Result<f64> {
    checked_exp(ln_rtilde_closed(m, params)?, "R̃ closed form")
}

/// ln R̃(m) by adaptive quadrature of the envelope scaled by its maximum.
pub fn ln_rtilde_quadrature(m: f64, params: &AsymptoticParams) -> Result<f64> {
    check_order(m)?;
    let (c, b) = log_scale(m, params);
    let shift = c - params.a(m);
    let opts = QuadOptions::default();
    let est = integrate(|x| (b * x - shift).exp(), 2.0, m, &opts)?;
    if est.value.is_nan() || est.value <= 0.0 {
        return Err(Error::Quadrature {
            achieved: f64::NAN,
            requested: opts.rel_tol,
        });
    }
    Ok(c + est.value.ln())
}

/// R̃(m) by adaptive quadrature to 1e−10 relative tolerance.
pub fn rtilde_quadrature(m: f64, params: &AsymptoticParams) -> Result<f64> {
    checked_exp(ln_rtilde_quadrature(m, params)?, "R̃ quadrature")
}

/// `steps` points from `lo` to `hi` inclusive, evenly spaced in log scale.
pub fn geometric_grid(lo: f64, hi: f64, steps: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && lo < hi && hi.is_finite()) || steps < 2 {
        return Err(Error::InvalidArgument(format!(
            "geometric grid needs 0 < lo < hi and steps >= 2, got lo = {lo}, hi = {hi}, steps = {steps}"
        )));
    }
    let span = (hi / lo).ln();
    let last = steps - 1;
    Ok((0..steps)
        .map(|i| match i {
            0 => lo,
            i if i == last => hi,
            i => lo * (span * i as f64 / last as f64).exp(),
        })
        .collect())
}

/// `(x, R̃(x) / x^(−1+ε))` for each x, given any `ln R̃` function.
pub fn ratio_series<F>(xs: &[f64], epsilon: f64, ln_rtilde: F) -> Result<Vec<(f64, f64)>>
where
    F: Fn(f64) -> Result<f64>,
{
    xs.iter()
        .map(|&x| {
            let ln_ratio = ln_rtilde(x)? + (1.0 - epsilon) * x.ln();
            Ok((x, checked_exp(ln_ratio, "ratio")?))
        })
        .collect()
}

/// R̃(x)/x^(−1+ε) on a geometric grid over `[x_lo, x_hi]`.
pub fn ratio_scan(x_lo: f64, x_hi: f64, steps: usize, params: &AsymptoticParams) -> Result<Vec<(f64, f64)>> {
    if x_lo.is_nan() || x_lo <= 2.0 {
        return Err(Error::InvalidArgument(format!("ratio scan needs x_lo > 2, got {x_lo}")));
    }
    let xs = geometric_grid(x_lo, x_hi, steps)?;
    ratio_series(&xs, params.epsilon, |x| ln_rtilde_closed(x, params))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundCheck {
    pub m: u64,
    pub r: f64,
    /// ln R̃(m); −∞ for m = 2 where the integral is empty.
    pub ln_rtilde: f64,
    /// R̃(m), saturating to 0 or ∞ outside the f64 range.
    pub rtilde: f64,
    pub satisfied: bool,
}

/// Computes R(m) and R̃(m) and reports whether R(m) ≤ R̃(m).
///
/// The comparison is made on logarithms, so it holds for parameters whose
/// R̃ is not representable.
pub fn check_bound(m: u64, convention: IndexConvention, params: &AsymptoticParams) -> Result<BoundCheck> {
    let r = compute_r(m, convention)?;
    let ln_rtilde = if m == 2 {
        f64::NEG_INFINITY
    } else {
        ln_rtilde_closed(m as f64, params)?
    };
    Ok(BoundCheck {
        m,
        r,
        ln_rtilde,
        rtilde: ln_rtilde.exp(),
        satisfied: r == 0.0 || r.ln() <= ln_rtilde,
    })
}
