//! Two-point exponential envelopes per order and log-log power-law models
//! for their parameters across sets of prime orders.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::profile::{DenominatorProfile, IndexConvention};
use crate::totient::prime_flags;

/// The p-th through q-th primes, 1-based with prime #1 = 2.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrimeSet {
    pub p: usize,
    pub q: usize,
    pub primes: Vec<u64>,
}

impl PrimeSet {
    /// Display label such as `M(101,200)`.
    pub fn label(&self) -> String {
        format!("M({},{})", self.p, self.q)
    }
}

impl fmt::Display for PrimeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// Upper bound on the n-th prime (Rosser: p_n < n(ln n + ln ln n) for n ≥ 6).
fn nth_prime_bound(n: usize) -> usize {
    if n < 6 {
        return 15;
    }
    let x = n as f64;
    (x * (x.ln() + x.ln().ln())).ceil() as usize + 1
}

pub fn prime_set(p: usize, q: usize) -> Result<PrimeSet> {
    if p == 0 || p > q {
        return Err(Error::InvalidArgument(format!(
            "prime index range must satisfy 1 <= p <= q, got p = {p}, q = {q}"
        )));
    }
    let flags = prime_flags(nth_prime_bound(q));
    let primes: Vec<u64> = flags
        .iter()
        .enumerate()
        .filter(|(_, &is_p)| is_p)
        .map(|(k, _)| k as u64)
        .skip(p - 1)
        .take(q - p + 1)
        .collect();
    debug_assert_eq!(primes.len(), q - p + 1);
    Ok(PrimeSet { p, q, primes })
}

/// Envelope `exp(a + b·k)` through two points of a profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpFit {
    pub m: u64,
    pub a: f64,
    pub b: f64,
    /// (k, P_m(k)) at the upper anchor, k = m for prime m.
    pub anchor_hi: (u64, f64),
    /// (k*, P_m(k*)) with k* the prime closest to m/2.
    pub anchor_lo: (u64, f64),
}

impl ExpFit {
    pub fn k_star(&self) -> u64 {
        self.anchor_lo.0
    }

    pub fn eval(&self, k: f64) -> f64 {
        (self.a + self.b * k).exp()
    }
}

/// The prime closest to m/2 among primes below m; ties go to the smaller one.
fn prime_nearest_half(m: u64, flags: &[bool]) -> Option<u64> {
    (2..m)
        .filter(|&k| flags[k as usize])
        .min_by_key(|&k| ((2 * k).abs_diff(m), k))
}

fn fit_through(profile: &DenominatorProfile, k_hi: u64, k_lo: u64) -> Result<ExpFit> {
    if k_hi == k_lo {
        return Err(Error::InvalidArgument(format!(
            "anchors coincide at k = {k_hi}; order {} is too small for a two-point fit",
            profile.m()
        )));
    }
    let anchor = |k: u64| -> Result<f64> {
        let v = profile
            .p_value(k)
            .ok_or_else(|| Error::InvalidArgument(format!("k = {k} outside the profile")))?;
        if v > 0.0 {
            Ok(v)
        } else {
            Err(Error::Domain(format!(
                "P_{}({k}) = {v} is not positive, log undefined",
                profile.m()
            )))
        }
    };
    let p_hi = anchor(k_hi)?;
    let p_lo = anchor(k_lo)?;
    let b = (p_hi.ln() - p_lo.ln()) / (k_hi as f64 - k_lo as f64);
    let a = p_hi.ln() - b * k_hi as f64;
    Ok(ExpFit {
        m: profile.m(),
        a,
        b,
        anchor_hi: (k_hi, p_hi),
        anchor_lo: (k_lo, p_lo),
    })
}

/// Solves `exp(a + b·m) = P_m(m)` and `exp(a + b·k*) = P_m(k*)` for prime m.
pub fn two_point_exp_fit(profile: &DenominatorProfile) -> Result<ExpFit> {
    let m = profile.m();
    let flags = prime_flags(m as usize);
    if !flags[m as usize] {
        return Err(Error::InvalidArgument(format!(
            "two-point fit needs a prime order, got m = {m}"
        )));
    }
    let k_star = prime_nearest_half(m, &flags)
        .ok_or_else(|| Error::InvalidArgument(format!("no prime below m = {m} to anchor the fit")))?;
    fit_through(profile, m, k_star)
}

/// Two-point envelope for any order: the upper anchor is the largest prime
/// ≤ m. Agrees with [`two_point_exp_fit`] when m is prime.
pub fn hull_exp_fit(profile: &DenominatorProfile) -> Result<ExpFit> {
    let m = profile.m();
    let flags = prime_flags(m as usize);
    let k_hi = (2..=m)
        .rev()
        .find(|&k| flags[k as usize])
        .ok_or_else(|| Error::InvalidArgument(format!("no prime at or below m = {m}")))?;
    let k_lo = prime_nearest_half(m, &flags)
        .ok_or_else(|| Error::InvalidArgument(format!("no prime below m = {m} to anchor the fit")))?;
    fit_through(profile, k_hi, k_lo)
}

/// `value ≈ coefficient · m^exponent`, fitted by least squares on
/// `ln|value|` against `ln m`.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerLawModel {
    pub coefficient: f64,
    pub exponent: f64,
    pub points: Vec<(f64, f64)>,
    /// `ln|value| − ln|model(m)|` per point.
    pub residuals: Vec<f64>,
}

impl PowerLawModel {
    pub fn eval(&self, m: f64) -> f64 {
        self.coefficient * m.powf(self.exponent)
    }

    /// `value − model(m)` per point.
    pub fn direct_residuals(&self) -> Vec<f64> {
        self.points.iter().map(|&(m, y)| y - self.eval(m)).collect()
    }
}

pub fn power_law_fit(points: &[(f64, f64)]) -> Result<PowerLawModel> {
    if points.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "power-law regression needs at least 2 points, got {}",
            points.len()
        )));
    }
    if let Some(&(m, _)) = points.iter().find(|(m, _)| !(m.is_finite() && *m >= 2.0)) {
        return Err(Error::InvalidArgument(format!("abscissa m = {m} must be at least 2")));
    }
    let sign = points[0].1.signum();
    if let Some(&(m, y)) = points
        .iter()
        .find(|(_, y)| *y == 0.0 || !y.is_finite() || y.signum() != sign)
    {
        return Err(Error::Domain(format!(
            "value {y} at m = {m} is zero, non-finite or of mixed sign; cannot take logs"
        )));
    }

    let xs: Vec<f64> = points.iter().map(|(m, _)| m.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|(_, y)| y.abs().ln()).collect();
    let len = xs.len() as f64;
    let x_mean = xs.iter().sum::<f64>() / len;
    let y_mean = ys.iter().sum::<f64>() / len;
    let (sxx, sxy) = xs.iter().zip(&ys).fold((0.0, 0.0), |(sxx, sxy), (x, y)| {
        let dx = x - x_mean;
        (sxx + dx * dx, sxy + dx * (y - y_mean))
    });
    if sxx == 0.0 {
        return Err(Error::InvalidArgument(
            "all abscissae coincide; the power-law exponent is undetermined".into(),
        ));
    }
    let exponent = sxy / sxx;
    let intercept = y_mean - exponent * x_mean;
    let residuals = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| y - (intercept + exponent * x))
        .collect();
    Ok(PowerLawModel {
        coefficient: sign * intercept.exp(),
        exponent,
        points: points.to_vec(),
        residuals,
    })
}

/// One row of the parameter table: `a(m) = s·m^t`, `b(m) = u·m^v` over a prime set.
#[derive(Debug, Clone, PartialEq)]
pub struct TableRow {
    pub label: String,
    pub convention: IndexConvention,
    pub fits: Vec<ExpFit>,
    pub a_model: PowerLawModel,
    pub b_model: PowerLawModel,
}

impl TableRow {
    pub fn s(&self) -> f64 {
        self.a_model.coefficient
    }
    pub fn t(&self) -> f64 {
        self.a_model.exponent
    }
    pub fn u(&self) -> f64 {
        self.b_model.coefficient
    }
    pub fn v(&self) -> f64 {
        self.b_model.exponent
    }

    /// (s, t, u, v) in table column order.
    pub fn params(&self) -> (f64, f64, f64, f64) {
        (self.s(), self.t(), self.u(), self.v())
    }
}

/// Fits every order in `mset` and regresses the per-order parameters.
///
/// `profiles` must hold a profile for each prime in the set, computed under
/// `convention`.
pub fn fit_table_row(
    mset: &PrimeSet,
    convention: IndexConvention,
    profiles: &BTreeMap<u64, DenominatorProfile>,
) -> Result<TableRow> {
    let missing: Vec<u64> = mset
        .primes
        .iter()
        .copied()
        .filter(|m| !profiles.contains_key(m))
        .collect();
    if !missing.is_empty() {
        return Err(Error::MissingData(missing));
    }
    if mset.primes.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "{} has a single order; the regression needs at least 2",
            mset.label()
        )));
    }
    let fits = mset
        .primes
        .iter()
        .map(|m| {
            let profile = &profiles[m];
            if profile.convention() != convention {
                return Err(Error::InvalidArgument(format!(
                    "profile for m = {m} uses the {} convention, expected {convention}",
                    profile.convention()
                )));
            }
            two_point_exp_fit(profile)
        })
        .collect::<Result<Vec<_>>>()?;

    let a_points: Vec<(f64, f64)> = fits.iter().map(|f| (f.m as f64, f.a)).collect();
    let b_points: Vec<(f64, f64)> = fits.iter().map(|f| (f.m as f64, f.b)).collect();
    Ok(TableRow {
        label: mset.label(),
        convention,
        a_model: power_law_fit(&a_points)?,
        b_model: power_law_fit(&b_points)?,
        fits,
    })
}
