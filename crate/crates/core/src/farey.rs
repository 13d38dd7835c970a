//! Streaming enumeration of the Farey sequence F_m.
//!
//! The stream always carries the endpoints 0/1 and 1/1. `index` is the
//! 1-based position in the full sequence (0/1 has index 1); the interior-only
//! view and any other indexing convention are applied by consumers.

use std::cmp::Ordering;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FareyFraction {
    pub num: u64,
    pub den: u64,
    pub index: u64,
}

impl FareyFraction {
    pub fn value(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    pub fn is_interior(&self) -> bool {
        self.num != 0 && self.num != self.den
    }

    /// Exact comparison of the fraction values by cross-multiplication.
    pub fn cmp_value(&self, other: &Self) -> Ordering {
        (u128::from(self.num) * u128::from(other.den)).cmp(&(u128::from(other.num) * u128::from(self.den)))
    }
}

/// Iterator over F_m driven by the next-term recurrence
/// `t = ⌊(m + b)/d⌋`, next = `(t·c − a)/(t·d − b)`.
///
/// Memory is constant. Arithmetic is checked; on overflow the iterator yields
/// a single [`Error::Overflow`] and then ends.
#[derive(Debug, Clone)]
pub struct FareyStream {
    m: u64,
    prev: (u64, u64),
    cur: (u64, u64),
    next_index: u64,
    state: StreamState,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum StreamState {
    Start,
    Running,
    Done,
}

pub fn stream_farey(m: u64) -> Result<FareyStream> {
    if m < 2 {
        return Err(Error::InvalidArgument(format!(
            "Farey order must be at least 2, got {m}"
        )));
    }
    Ok(FareyStream {
        m,
        prev: (0, 1),
        cur: (1, m),
        next_index: 1,
        state: StreamState::Start,
    })
}

impl FareyStream {
    pub fn order(&self) -> u64 {
        self.m
    }

    fn advance(&mut self) -> Result<()> {
        let (a, b) = self.prev;
        let (c, d) = self.cur;
        let t = self
            .m
            .checked_add(b)
            .ok_or(Error::Overflow("computing m + b in the Farey recurrence"))?
            / d;
        let tc = t
            .checked_mul(c)
            .ok_or(Error::Overflow("computing t·c in the Farey recurrence"))?;
        let td = t
            .checked_mul(d)
            .ok_or(Error::Overflow("computing t·d in the Farey recurrence"))?;
        // t·c ≥ a and t·d ≥ b hold for consecutive Farey terms
        self.prev = self.cur;
        self.cur = (tc - a, td - b);
        Ok(())
    }
}

impl Iterator for FareyStream {
    type Item = Result<FareyFraction>;

    fn next(&mut self) -> Option<Self::Item> {
        let (num, den) = match self.state {
            StreamState::Done => return None,
            StreamState::Start => {
                self.state = StreamState::Running;
                self.prev
            }
            StreamState::Running => {
                if self.cur.0 > self.cur.1 {
                    self.state = StreamState::Done;
                    return None;
                }
                let emitted = self.cur;
                if emitted == (1, 1) {
                    self.state = StreamState::Done;
                } else if let Err(e) = self.advance() {
                    self.state = StreamState::Done;
                    return Some(Err(e));
                }
                emitted
            }
        };
        let index = self.next_index;
        self.next_index += 1;
        Some(Ok(FareyFraction { num, den, index }))
    }
}

impl std::iter::FusedIterator for FareyStream {}

/// Largest order accepted by [`brute_force_farey`].
pub const BRUTE_FORCE_MAX_ORDER: u64 = 2000;

/// Test oracle: enumerate every reduced h/k with k ≤ m and sort exactly.
///
/// Quadratic in memory, so orders above [`BRUTE_FORCE_MAX_ORDER`] are refused.
pub fn brute_force_farey(m: u64) -> Result<Vec<FareyFraction>> {
    if m > BRUTE_FORCE_MAX_ORDER {
        return Err(Error::TooLarge {
            what: "brute-force Farey order",
            value: m,
            limit: BRUTE_FORCE_MAX_ORDER,
        });
    }
    if m < 1 {
        return Err(Error::InvalidArgument("Farey order must be at least 1".into()));
    }
    let mut out = vec![FareyFraction {
        num: 0,
        den: 1,
        index: 0,
    }];
    for den in 1..=m {
        for num in 1..=den {
            if gcd(num, den) == 1 {
                out.push(FareyFraction { num, den, index: 0 });
            }
        }
    }
    out.sort_by(|x, y| x.cmp_value(y));
    for (i, f) in out.iter_mut().enumerate() {
        f.index = i as u64 + 1;
    }
    Ok(out)
}

pub(crate) fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Möbius function μ(1..=limit), index 0 unused.
fn mobius(limit: usize) -> Vec<i8> {
    let mut mu = vec![1i8; limit + 1];
    let mut composite = vec![false; limit + 1];
    mu[0] = 0;
    for p in 2..=limit {
        if composite[p] {
            continue;
        }
        for j in (p..=limit).step_by(p) {
            if j > p {
                composite[j] = true;
            }
            mu[j] = -mu[j];
        }
        if let Some(sq) = p.checked_mul(p).filter(|&sq| sq <= limit) {
            for j in (sq..=limit).step_by(sq) {
                mu[j] = 0;
            }
        }
    }
    mu
}

/// 1-based position of the reduced fraction h/k in F_m (0/1 has rank 1).
///
/// Counts reduced p/q ≤ h/k via Möbius inversion of the unreduced count
/// `N_M(x) = Σ_{q=1}^{M} ⌊q·x⌋`. Cost is O(m log m).
pub fn rank_of(h: u64, k: u64, m: u64) -> Result<u64> {
    if k == 0 || k > m || h > k || gcd(h, k) != 1 {
        return Err(Error::InvalidArgument(format!(
            "{h}/{k} is not a reduced fraction in [0, 1] with denominator at most {m}"
        )));
    }
    let limit = usize::try_from(m).map_err(|_| Error::Overflow("sizing the Möbius table"))?;
    let mu = mobius(limit);
    let mut reduced: i128 = 0;
    for d in 1..=m {
        let sign = mu[d as usize];
        if sign == 0 {
            continue;
        }
        let upper = m / d;
        let unreduced: i128 = (1..=upper)
            .map(|q| i128::from((u128::from(q) * u128::from(h) / u128::from(k)) as u64))
            .sum();
        reduced += i128::from(sign) * unreduced;
    }
    // + 1 for 0/1, which the floor sums never count
    Ok(reduced as u64 + 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pairs(fs: &[FareyFraction]) -> Vec<(u64, u64)> {
        fs.iter().map(|f| (f.num, f.den)).collect()
    }

    fn collect(m: u64) -> Vec<FareyFraction> {
        stream_farey(m).unwrap().collect::<Result<Vec<_>>>().unwrap()
    }

    #[test]
    fn order_five() {
        let expected = [
            (0, 1),
            (1, 5),
            (1, 4),
            (1, 3),
            (2, 5),
            (1, 2),
            (3, 5),
            (2, 3),
            (3, 4),
            (4, 5),
            (1, 1),
        ];
        assert_eq!(pairs(&collect(5)), expected);
        assert_eq!(pairs(&brute_force_farey(5).unwrap()), expected);
    }

    #[test]
    fn order_two_and_three() {
        assert_eq!(pairs(&collect(2)), [(0, 1), (1, 2), (1, 1)]);
        assert_eq!(
            pairs(&brute_force_farey(3).unwrap()),
            [(0, 1), (1, 3), (1, 2), (2, 3), (1, 1)]
        );
    }

    #[test]
    fn recurrence_step_after_first_pair() {
        let mut s = stream_farey(5).unwrap();
        s.next();
        s.next();
        let third = s.next().unwrap().unwrap();
        assert_eq!((third.num, third.den, third.index), (1, 4, 3));
    }

    #[test]
    fn indices_are_one_based_and_contiguous() {
        for (i, f) in collect(17).iter().enumerate() {
            assert_eq!(f.index, i as u64 + 1);
        }
    }

    #[test]
    fn small_order_rejected() {
        assert!(matches!(stream_farey(1), Err(Error::InvalidArgument(_))));
        assert!(matches!(stream_farey(0), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn overflow_is_reported_not_wrapped() {
        let mut s = stream_farey(u64::MAX).unwrap();
        assert_eq!(s.next().unwrap().unwrap().den, 1);
        assert!(matches!(s.next(), Some(Err(Error::Overflow(_)))));
        assert!(s.next().is_none());
    }

    #[test]
    fn brute_force_guard() {
        assert!(matches!(
            brute_force_farey(BRUTE_FORCE_MAX_ORDER + 1),
            Err(Error::TooLarge { .. })
        ));
    }

    #[test]
    fn rank_examples() {
        assert_eq!(rank_of(1, 2, 3).unwrap(), 3);
        assert_eq!(rank_of(1, 1, 5).unwrap(), 11);
        assert_eq!(rank_of(3, 5, 5).unwrap(), 7);
        assert_eq!(rank_of(0, 1, 5).unwrap(), 1);
        assert!(rank_of(2, 4, 5).is_err());
        assert!(rank_of(1, 6, 5).is_err());
    }

    #[test]
    fn rank_agrees_with_stream_index() {
        for m in [2u64, 7, 30, 61] {
            for f in collect(m) {
                assert_eq!(
                    rank_of(f.num, f.den, m).unwrap(),
                    f.index,
                    "{}/{} in F_{m}",
                    f.num,
                    f.den
                );
            }
        }
    }

    proptest! {
        #[test]
        fn stream_is_unimodular_and_symmetric(m in 2u64..400) {
            let fs = collect(m);
            for w in fs.windows(2) {
                prop_assert_eq!(w[0].den * w[1].num - w[0].num * w[1].den, 1);
            }
            let n = fs.len();
            for (i, f) in fs.iter().enumerate() {
                let mirror = fs[n - 1 - i];
                prop_assert_eq!((mirror.num, mirror.den), (f.den - f.num, f.den));
                prop_assert_eq!(gcd(f.num, f.den), 1);
            }
        }
    }
}
