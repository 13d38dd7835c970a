//! Farey-sequence deviation sums and the exponential bound built on them.
//!
//! The pipeline, bottom to top:
//!
//! * [`totient`]: φ(k) and the interior count `n(m) = Σ_{k=2}^m φ(k)`.
//! * [`farey`]: constant-memory streaming of F_m, plus a brute-force oracle.
//! * [`profile`]: `R(m) = Σ (F_m(i) − i/n)²` and its split by denominator P_m(k).
//! * [`bumps`]: excursions of P_m(k) near k ≈ m/j.
//! * [`fitting`]: per-order envelopes `exp(a_m + b_m·k)` and power laws
//!   `a(m) = s·m^t`, `b(m) = u·m^v`.
//! * [`asymptotics`]: the integral bound R̃(m), its quadrature check and the
//!   decay ratio `R̃(x)/x^(−1+ε)`.
//!
//! [`sweep`] runs many orders at once (rayon with the `parallel` feature) and
//! [`io`] holds the CSV formats and the profile cache.

pub mod asymptotics;
pub mod bumps;
pub mod error;
pub mod farey;
pub mod fitting;
pub mod io;
pub mod kahan;
pub mod plot;
pub mod profile;
pub mod quadrature;
pub mod sweep;
pub mod totient;

pub use asymptotics::{
    check_bound, envelope, ratio_scan, rtilde_closed, rtilde_quadrature, AsymptoticParams, BoundCheck,
};
pub use bumps::{detect_bumps, Bump, BumpConfig};
pub use error::{Error, Result};
pub use farey::{brute_force_farey, rank_of, stream_farey, FareyFraction, FareyStream};
pub use fitting::{
    fit_table_row, power_law_fit, prime_set, two_point_exp_fit, ExpFit, PowerLawModel, PrimeSet, TableRow,
};
pub use profile::{
    compute_profile, compute_profile_with, compute_r, prime_hull, DenominatorProfile, DeviationTerm, IndexConvention,
};
pub use totient::{farey_interior_count, totient_sieve, TotientTable};
