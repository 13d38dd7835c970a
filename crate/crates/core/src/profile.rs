//! Squared Farey deviations, the total R(m) and its split by denominator P_m(k).

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::farey::{stream_farey, FareyFraction, FareyStream};
use crate::kahan::{self, KahanSum};
use crate::totient::{totient_sieve, TotientTable};

/// How Farey fractions are numbered in the deviation sum.
///
/// `Interior` numbers the n interior fractions 1..=n and sums all n terms.
/// `PaperLiteral` numbers the full sequence from 0/1 = 1 and sums i = 2..=n,
/// which gives n − 1 terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub enum IndexConvention {
    #[default]
    Interior,
    PaperLiteral,
}

impl IndexConvention {
    pub const ALL: [IndexConvention; 2] = [IndexConvention::Interior, IndexConvention::PaperLiteral];

    pub fn name(self) -> &'static str {
        match self {
            IndexConvention::Interior => "interior",
            IndexConvention::PaperLiteral => "paper-literal",
        }
    }

    /// Sequence index i used for the `j`-th interior fraction (1-based), or
    /// `None` if the convention drops that fraction.
    #[inline]
    fn index_for(self, j: u64, n: u64) -> Option<u64> {
        match self {
            IndexConvention::Interior => Some(j),
            IndexConvention::PaperLiteral => (j < n).then_some(j + 1),
        }
    }
}

impl fmt::Display for IndexConvention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for IndexConvention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "interior" => Ok(IndexConvention::Interior),
            "paper-literal" | "paper_literal" => Ok(IndexConvention::PaperLiteral),
            other => Err(Error::InvalidArgument(format!(
                "unknown index convention {other:?} (expected interior or paper-literal)"
            ))),
        }
    }
}

/// One summand `(F_m(i) − i/n)²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeviationTerm {
    pub fraction: FareyFraction,
    /// Sequence index i under the active convention.
    pub index: u64,
    pub expected: f64,
    pub deviation: f64,
    pub squared: f64,
}

/// Streams the deviation terms of F_m in ascending fraction order.
pub struct DeviationTerms {
    stream: FareyStream,
    convention: IndexConvention,
    n: u64,
    interior_seen: u64,
}

impl DeviationTerms {
    pub fn n(&self) -> u64 {
        self.n
    }
}

pub fn deviation_terms(m: u64, convention: IndexConvention, table: &TotientTable) -> Result<DeviationTerms> {
    let n = crate::totient::farey_interior_count(m, table)?;
    Ok(DeviationTerms {
        stream: stream_farey(m)?,
        convention,
        n,
        interior_seen: 0,
    })
}

impl Iterator for DeviationTerms {
    type Item = Result<DeviationTerm>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            let fraction = match self.stream.next()? {
                Ok(f) => f,
                Err(e) => return Some(Err(e)),
            };
            if !fraction.is_interior() {
                continue;
            }
            self.interior_seen += 1;
            let Some(index) = self.convention.index_for(self.interior_seen, self.n) else {
                continue;
            };
            let expected = index as f64 / self.n as f64;
            let deviation = fraction.value() - expected;
            return Some(Ok(DeviationTerm {
                fraction,
                index,
                expected,
                deviation,
                squared: deviation * deviation,
            }));
        }
    }
}

/// P_m(k) for 2 ≤ k ≤ m together with R(m).
#[derive(Debug, Clone, PartialEq)]
pub struct DenominatorProfile {
    m: u64,
    convention: IndexConvention,
    n: u64,
    // indexed by k; slots 0 and 1 unused
    p_values: Vec<f64>,
    term_counts: Vec<u64>,
    r_total: f64,
}

impl DenominatorProfile {
    /// Assembles a profile from per-denominator values (`p_values[k - 2]` is
    /// P_m(k)). R(m) is taken as the compensated sum of the values.
    pub fn from_parts(
        m: u64,
        convention: IndexConvention,
        n: u64,
        p_values: Vec<f64>,
        term_counts: Vec<u64>,
    ) -> Result<Self> {
        let r_total = kahan::sum(p_values.iter().copied());
        Self::from_parts_with_total(m, convention, n, p_values, term_counts, r_total)
    }

    /// As [`from_parts`](Self::from_parts) but with an explicit R(m), as
    /// stored in a cache file.
    pub fn from_parts_with_total(
        m: u64,
        convention: IndexConvention,
        n: u64,
        p_values: Vec<f64>,
        term_counts: Vec<u64>,
        r_total: f64,
    ) -> Result<Self> {
        if m < 2 {
            return Err(Error::InvalidArgument(format!(
                "profile order must be at least 2, got {m}"
            )));
        }
        let expected_len = (m - 1) as usize;
        if p_values.len() != expected_len || term_counts.len() != expected_len {
            return Err(Error::InvalidArgument(format!(
                "profile for m = {m} needs {expected_len} entries, got {} values and {} counts",
                p_values.len(),
                term_counts.len()
            )));
        }
        if let Some(bad) = p_values.iter().find(|p| !(p.is_finite() && **p >= 0.0)) {
            return Err(Error::Domain(format!(
                "profile value {bad} is not a finite non-negative number"
            )));
        }
        if !(r_total.is_finite() && r_total >= 0.0) {
            return Err(Error::Domain(format!(
                "R(m) = {r_total} is not a finite non-negative number"
            )));
        }
        Ok(Self {
            m,
            convention,
            n,
            p_values: pad_front(p_values),
            term_counts: pad_front(term_counts),
            r_total,
        })
    }

    pub fn m(&self) -> u64 {
        self.m
    }

    pub fn convention(&self) -> IndexConvention {
        self.convention
    }

    /// Number of interior fractions of F_m.
    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn r_total(&self) -> f64 {
        self.r_total
    }

    /// P_m(k), or `None` outside 2..=m.
    pub fn p_value(&self, k: u64) -> Option<f64> {
        (2..=self.m).contains(&k).then(|| self.p_values[k as usize])
    }

    pub fn term_count(&self, k: u64) -> Option<u64> {
        (2..=self.m).contains(&k).then(|| self.term_counts[k as usize])
    }

    /// `(k, P_m(k), term count)` for k = 2..=m.
    pub fn entries(&self) -> impl Iterator<Item = (u64, f64, u64)> + '_ {
        (2..=self.m).map(move |k| (k, self.p_values[k as usize], self.term_counts[k as usize]))
    }

    /// Compensated Σ_k P_m(k), which should reproduce R(m).
    pub fn sum_of_parts(&self) -> f64 {
        kahan::sum(self.p_values[2..].iter().copied())
    }
}

/// Prepends the two unused slots for k = 0 and k = 1.
fn pad_front<T: Copy + Default>(v: Vec<T>) -> Vec<T> {
    let mut out = Vec::with_capacity(v.len() + 2);
    out.extend([T::default(); 2]);
    out.extend(v);
    out
}

struct Accumulator {
    p: Vec<KahanSum>,
    counts: Vec<u64>,
    total: KahanSum,
}

impl Accumulator {
    fn new(m: u64) -> Self {
        let len = m as usize + 1;
        Self {
            p: vec![KahanSum::new(); len],
            counts: vec![0; len],
            total: KahanSum::new(),
        }
    }

    #[inline]
    fn push(&mut self, den: u64, squared: f64) {
        let k = den as usize;
        self.p[k].add(squared);
        self.counts[k] += 1;
        self.total.add(squared);
    }

    fn finish(self, m: u64, convention: IndexConvention, n: u64) -> DenominatorProfile {
        let mut p_values: Vec<f64> = self.p.iter().map(KahanSum::value).collect();
        p_values[0] = 0.0;
        p_values[1] = 0.0;
        DenominatorProfile {
            m,
            convention,
            n,
            p_values,
            term_counts: self.counts,
            r_total: self.total.value(),
        }
    }
}

/// Computes P_m(k) and R(m) in one streaming pass, building its own totient table.
pub fn compute_profile(m: u64, convention: IndexConvention) -> Result<DenominatorProfile> {
    let table = table_for(m)?;
    compute_profile_with(&table, m, convention)
}

/// As [`compute_profile`], reusing a shared totient table (`table.limit() ≥ m`).
pub fn compute_profile_with(table: &TotientTable, m: u64, convention: IndexConvention) -> Result<DenominatorProfile> {
    let terms = deviation_terms(m, convention, table)?;
    let n = terms.n();
    let mut acc = Accumulator::new(m);
    for term in terms {
        let term = term?;
        acc.push(term.fraction.den, term.squared);
    }
    Ok(acc.finish(m, convention, n))
}

/// Both conventions from a single pass over the stream.
///
/// Results are bit-identical to two separate [`compute_profile_with`] calls
/// since each accumulator sees the same terms in the same order.
pub fn compute_profiles_both(table: &TotientTable, m: u64) -> Result<(DenominatorProfile, DenominatorProfile)> {
    let n = crate::totient::farey_interior_count(m, table)?;
    let nf = n as f64;
    let mut interior = Accumulator::new(m);
    let mut literal = Accumulator::new(m);
    let mut j = 0u64;
    for f in stream_farey(m)? {
        let f = f?;
        if !f.is_interior() {
            continue;
        }
        j += 1;
        let x = f.value();
        let d = x - j as f64 / nf;
        interior.push(f.den, d * d);
        if j < n {
            let d = x - (j + 1) as f64 / nf;
            literal.push(f.den, d * d);
        }
    }
    Ok((
        interior.finish(m, IndexConvention::Interior, n),
        literal.finish(m, IndexConvention::PaperLiteral, n),
    ))
}

/// R(m) without per-denominator bookkeeping.
pub fn compute_r(m: u64, convention: IndexConvention) -> Result<f64> {
    let table = table_for(m)?;
    compute_r_with(&table, m, convention)
}

pub fn compute_r_with(table: &TotientTable, m: u64, convention: IndexConvention) -> Result<f64> {
    let mut total = KahanSum::new();
    for term in deviation_terms(m, convention, table)? {
        total.add(term?.squared);
    }
    Ok(total.value())
}

fn table_for(m: u64) -> Result<TotientTable> {
    if m < 2 {
        return Err(Error::InvalidArgument(format!(
            "Farey order must be at least 2, got {m}"
        )));
    }
    totient_sieve(m)
}

/// P_m(k) restricted to prime k, ascending in k.
pub fn prime_hull(profile: &DenominatorProfile, table: &TotientTable) -> Vec<(u64, f64)> {
    profile
        .entries()
        .filter(|&(k, _, _)| table.is_prime(k))
        .map(|(k, p, _)| (k, p))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_three_interior() {
        let p = compute_profile(3, IndexConvention::Interior).unwrap();
        assert!((p.r_total() - 5.0 / 36.0).abs() < 1e-15);
        assert!((p.p_value(2).unwrap() - 1.0 / 36.0).abs() < 1e-15);
        assert!((p.p_value(3).unwrap() - 1.0 / 9.0).abs() < 1e-15);
        assert_eq!(p.term_count(2), Some(1));
        assert_eq!(p.term_count(3), Some(2));
        assert_eq!(p.n(), 3);
    }

    #[test]
    fn order_two_both_conventions() {
        let r = compute_r(2, IndexConvention::Interior).unwrap();
        assert!((r - 0.25).abs() < 1e-15);
        assert_eq!(compute_r(2, IndexConvention::PaperLiteral).unwrap(), 0.0);
        let p = compute_profile(2, IndexConvention::PaperLiteral).unwrap();
        assert_eq!(p.term_count(2), Some(0));
    }

    #[test]
    fn rejects_small_order() {
        assert!(compute_profile(1, IndexConvention::Interior).is_err());
        assert!(compute_r(0, IndexConvention::PaperLiteral).is_err());
    }

    #[test]
    fn term_indices_follow_convention() {
        let table = totient_sieve(5).unwrap();
        let interior: Vec<_> = deviation_terms(5, IndexConvention::Interior, &table)
            .unwrap()
            .map(|t| t.unwrap())
            .collect();
        assert_eq!(interior.len(), 9);
        assert_eq!(interior.first().unwrap().index, 1);
        assert_eq!(interior.last().unwrap().index, 9);

        let literal: Vec<_> = deviation_terms(5, IndexConvention::PaperLiteral, &table)
            .unwrap()
            .map(|t| t.unwrap())
            .collect();
        assert_eq!(literal.len(), 8);
        assert_eq!(literal.first().unwrap().index, 2);
        assert_eq!(literal.last().unwrap().index, 9);
        // F(2) is 1/5 in the full sequence
        assert_eq!((literal[0].fraction.num, literal[0].fraction.den), (1, 5));
        for t in interior.iter().chain(&literal) {
            assert!(t.deviation.abs() < 1.0);
            assert_eq!(t.squared, t.deviation * t.deviation);
        }
    }

    #[test]
    fn compute_r_matches_profile_bitwise() {
        for conv in IndexConvention::ALL {
            for m in [2, 3, 10, 97, 250] {
                let p = compute_profile(m, conv).unwrap();
                assert_eq!(p.r_total().to_bits(), compute_r(m, conv).unwrap().to_bits());
            }
        }
    }

    #[test]
    fn single_pass_matches_two_passes() {
        let table = totient_sieve(400).unwrap();
        for m in [2, 3, 31, 100, 400] {
            let (i, l) = compute_profiles_both(&table, m).unwrap();
            assert_eq!(i, compute_profile_with(&table, m, IndexConvention::Interior).unwrap());
            assert_eq!(
                l,
                compute_profile_with(&table, m, IndexConvention::PaperLiteral).unwrap()
            );
        }
    }

    #[test]
    fn term_counts_and_parts() {
        let table = totient_sieve(300).unwrap();
        for m in [12, 50, 300] {
            let p = compute_profile_with(&table, m, IndexConvention::Interior).unwrap();
            for (k, v, c) in p.entries() {
                assert_eq!(c, table.phi(k));
                assert!(v >= 0.0);
            }
            let rel = (p.sum_of_parts() - p.r_total()).abs() / p.r_total();
            assert!(rel <= 1e-12, "m = {m}: {rel}");

            let l = compute_profile_with(&table, m, IndexConvention::PaperLiteral).unwrap();
            for (k, _, c) in l.entries() {
                let expect = if k == m { table.phi(k) - 1 } else { table.phi(k) };
                assert_eq!(c, expect);
            }
        }
    }

    #[test]
    fn hull_keys() {
        let table = totient_sieve(1000).unwrap();
        let p = compute_profile_with(&table, 10, IndexConvention::Interior).unwrap();
        let keys: Vec<u64> = prime_hull(&p, &table).iter().map(|e| e.0).collect();
        assert_eq!(keys, [2, 3, 5, 7]);

        let p3 = compute_profile_with(&table, 3, IndexConvention::Interior).unwrap();
        let hull = prime_hull(&p3, &table);
        assert_eq!(hull.len(), 2);
        assert!((hull[0].1 - 1.0 / 36.0).abs() < 1e-15);
        assert!((hull[1].1 - 1.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn from_parts_validation() {
        assert!(DenominatorProfile::from_parts(3, IndexConvention::Interior, 3, vec![1.0], vec![1]).is_err());
        assert!(DenominatorProfile::from_parts(3, IndexConvention::Interior, 3, vec![1.0, -1.0], vec![1, 2]).is_err());
        let p = DenominatorProfile::from_parts(3, IndexConvention::Interior, 3, vec![0.5, 0.25], vec![1, 2]).unwrap();
        assert_eq!(p.r_total(), 0.75);
        assert_eq!(p.p_value(1), None);
        assert_eq!(p.p_value(4), None);
    }

    #[test]
    fn convention_parsing() {
        for c in IndexConvention::ALL {
            assert_eq!(c.name().parse::<IndexConvention>().unwrap(), c);
        }
        assert!("paper".parse::<IndexConvention>().is_err());
    }
}
