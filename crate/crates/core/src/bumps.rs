//! Locating the excursions ("bumps") of P_m(k) above its exponential trend.
//!
//! The prime hull is divided by the two-point envelope and searched in log
//! space for strict local maxima. A maximum counts as a bump when its
//! topographic prominence (height above the higher of the two lowest points
//! separating it from taller terrain or the series ends) reaches
//! [`BumpConfig::min_log_prominence`]. Composite k are not searched: their
//! P_m(k) dips with φ(k) < k − 1 and would make nearly every prime a maximum.

use crate::fitting::hull_exp_fit;
use crate::profile::DenominatorProfile;
use crate::totient::prime_flags;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BumpConfig {
    pub min_log_prominence: f64,
}

impl Default for BumpConfig {
    fn default() -> Self {
        Self {
            min_log_prominence: 0.1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bump {
    pub k_peak: u64,
    /// Integer j in 2..m minimizing |k_peak − m/j| (smaller j on ties).
    pub j: u64,
    pub distance: f64,
    /// Prominence of the peak in the detrended log series.
    pub prominence: f64,
}

/// Smallest order for which bump detection is attempted.
pub const MIN_BUMP_ORDER: u64 = 12;

pub fn detect_bumps(profile: &DenominatorProfile) -> Vec<Bump> {
    detect_bumps_with(profile, &BumpConfig::default())
}

pub fn detect_bumps_with(profile: &DenominatorProfile, config: &BumpConfig) -> Vec<Bump> {
    let m = profile.m();
    if m < MIN_BUMP_ORDER {
        return Vec::new();
    }
    let Ok(envelope) = hull_exp_fit(profile) else {
        return Vec::new();
    };
    let flags = prime_flags(m as usize);
    let (ks, ys): (Vec<u64>, Vec<f64>) = (2..=m)
        .filter(|&k| flags[k as usize])
        .filter_map(|k| {
            let p = profile.p_value(k)?;
            (p > 0.0).then(|| (k, p.ln() - (envelope.a + envelope.b * k as f64)))
        })
        .unzip();

    (1..ys.len().saturating_sub(1))
        .filter(|&i| ys[i] > ys[i - 1] && ys[i] > ys[i + 1])
        .filter_map(|i| {
            let prominence = prominence(&ys, i);
            (prominence >= config.min_log_prominence).then(|| {
                let (j, distance) = nearest_ratio(ks[i], m);
                Bump {
                    k_peak: ks[i],
                    j,
                    distance,
                    prominence,
                }
            })
        })
        .collect()
}

fn prominence(ys: &[f64], i: usize) -> f64 {
    let peak = ys[i];
    let col = |range: &mut dyn Iterator<Item = usize>| {
        let mut low = peak;
        for j in range {
            if ys[j] > peak {
                break;
            }
            low = low.min(ys[j]);
        }
        low
    };
    let left = col(&mut (0..i).rev());
    let right = col(&mut (i + 1..ys.len()));
    peak - left.max(right)
}

/// The j in 2..m closest to m/k, compared exactly: |k − m/j| = |k·j − m| / j.
pub fn nearest_ratio(k: u64, m: u64) -> (u64, f64) {
    let upper = m.saturating_sub(1).max(2);
    let base = (m / k.max(1)).clamp(2, upper);
    let candidates = [base.saturating_sub(1).max(2), base, (base + 1).min(upper)];
    let gap = |j: u64| (u128::from(k) * u128::from(j)).abs_diff(u128::from(m));
    let best = candidates
        .into_iter()
        .min_by(|&x, &y| {
            // gap(x)/x vs gap(y)/y
            (gap(x) * u128::from(y)).cmp(&(gap(y) * u128::from(x))).then(x.cmp(&y))
        })
        .unwrap_or(2);
    (best, (k as f64 - m as f64 / best as f64).abs())
}
