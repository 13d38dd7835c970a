//! Profiles over many orders. Each order is an independent task sharing one
//! read-only totient table; with the `parallel` feature the tasks run on the
//! rayon pool, otherwise in sequence. Output order always follows the input.

use crate::error::Result;
use crate::profile::{compute_profile_with, DenominatorProfile, IndexConvention};
use crate::totient::{totient_sieve, TotientTable};

fn shared_table(ms: &[u64]) -> Result<Option<TotientTable>> {
    match ms.iter().max() {
        Some(&max) => totient_sieve(max.max(2)).map(Some),
        None => Ok(None),
    }
}

pub fn profiles_sequential(ms: &[u64], convention: IndexConvention) -> Result<Vec<DenominatorProfile>> {
    let Some(table) = shared_table(ms)? else {
        return Ok(Vec::new());
    };
    ms.iter()
        .map(|&m| compute_profile_with(&table, m, convention))
        .collect()
}

#[cfg(feature = "parallel")]
pub fn profiles_parallel(ms: &[u64], convention: IndexConvention) -> Result<Vec<DenominatorProfile>> {
    use rayon::prelude::*;

    let Some(table) = shared_table(ms)? else {
        return Ok(Vec::new());
    };
    ms.par_iter()
        .map(|&m| compute_profile_with(&table, m, convention))
        .collect()
}

/// Parallel when built with the `parallel` feature, sequential otherwise.
pub fn profiles(ms: &[u64], convention: IndexConvention) -> Result<Vec<DenominatorProfile>> {
    #[cfg(feature = "parallel")]
    {
        profiles_parallel(ms, convention)
    }
    #[cfg(not(feature = "parallel"))]
    {
        profiles_sequential(ms, convention)
    }
}

/// Maps `f` over `items`, in parallel when the feature is enabled.
pub fn map_ordered<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}
