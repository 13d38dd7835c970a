//! Euler totient sieve and the Farey interior count `n(m) = Σ_{k=2}^m φ(k)`.

use crate::error::{Error, Result};

/// φ(1..=limit) together with its prefix sums from k = 2.
///
/// Both arrays are indexed directly by k; slot 0 is unused and holds 0.
/// Memory is `2 · (limit + 1) · 8` bytes, so a table for `limit = 10⁸`
/// needs about 1.6 GB. Allocation failure is reported as
/// [`Error::Allocation`] rather than aborting.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TotientTable {
    limit: u64,
    phi: Vec<u64>,
    prefix: Vec<u64>,
}

/// Sieves φ(k) for `1 ≤ k ≤ limit` in O(limit · log log limit).
pub fn totient_sieve(limit: u64) -> Result<TotientTable> {
    if limit == 0 {
        return Err(Error::InvalidArgument("totient limit must be at least 1".into()));
    }
    let len = usize::try_from(limit)
        .ok()
        .and_then(|l| l.checked_add(1))
        .ok_or(Error::Allocation(usize::MAX))?;

    let mut phi: Vec<u64> = Vec::new();
    phi.try_reserve_exact(len).map_err(|_| Error::Allocation(len))?;
    phi.extend(0..len as u64);

    for p in 2..len {
        // untouched entries are prime
        if phi[p] == p as u64 {
            for j in (p..len).step_by(p) {
                phi[j] -= phi[j] / p as u64;
            }
        }
    }

    let mut prefix: Vec<u64> = Vec::new();
    prefix.try_reserve_exact(len).map_err(|_| Error::Allocation(len))?;
    prefix.push(0);
    if len > 1 {
        prefix.push(0);
    }
    let mut acc = 0u64;
    for &f in &phi[2..] {
        acc += f;
        prefix.push(acc);
    }

    Ok(TotientTable { limit, phi, prefix })
}

impl TotientTable {
    pub fn limit(&self) -> u64 {
        self.limit
    }

    /// φ(k). Panics if `k` is 0 or above the limit.
    pub fn phi(&self, k: u64) -> u64 {
        assert!(k >= 1 && k <= self.limit, "k = {k} outside 1..={}", self.limit);
        self.phi[k as usize]
    }

    /// Σ_{j=2}^k φ(j); zero for k ≤ 1. Panics above the limit.
    pub fn prefix(&self, k: u64) -> u64 {
        assert!(k <= self.limit, "k = {k} above limit {}", self.limit);
        self.prefix[k as usize]
    }

    /// φ(1..=limit) as a slice starting at k = 1.
    pub fn phi_values(&self) -> &[u64] {
        &self.phi[1..]
    }

    pub fn is_prime(&self, k: u64) -> bool {
        k >= 2 && k <= self.limit && self.phi[k as usize] == k - 1
    }

    /// Primes up to and including `bound` (clamped to the table limit), ascending.
    pub fn primes_up_to(&self, bound: u64) -> Vec<u64> {
        (2..=bound.min(self.limit)).filter(|&k| self.is_prime(k)).collect()
    }
}

/// Number of reduced fractions strictly between 0 and 1 with denominator at most `m`.
pub fn farey_interior_count(m: u64, table: &TotientTable) -> Result<u64> {
    if m < 2 || m > table.limit {
        return Err(Error::InvalidArgument(format!(
            "order m = {m} must lie in 2..={}",
            table.limit
        )));
    }
    Ok(table.prefix(m))
}

/// Plain sieve of Eratosthenes: `flags[k]` is true iff k is prime.
pub(crate) fn prime_flags(limit: usize) -> Vec<bool> {
    let mut flags = vec![true; limit + 1];
    flags[0] = false;
    if limit >= 1 {
        flags[1] = false;
    }
    let mut p = 2;
    while p * p <= limit {
        if flags[p] {
            for j in (p * p..=limit).step_by(p) {
                flags[j] = false;
            }
        }
        p += 1;
    }
    flags
}
