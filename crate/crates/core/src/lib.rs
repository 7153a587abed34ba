//! Computational toolkit for diophantine stability of elliptic curves over Q
//! on average: enumeration by naive height, Frobenius trace statistics,
//! Hurwitz class numbers, mod-ℓ image certification and the group-theoretic
//! stability criterion.

pub mod class_numbers;
pub mod cli;
pub mod curves;
pub mod error;
pub mod galois_image;
pub mod ingest;
pub mod matgroup;
pub mod primes;
pub mod sieve_stats;
pub mod stability;
pub mod store;
pub mod traces;

pub use curves::{CurveModel, HeightBound};
pub use error::{Error, Result};

/// Exact rational with machine-word parts; every density and class-number
/// sum used here has a small denominator.
pub type Rational = num_rational::Ratio<i64>;

pub(crate) fn serialize_ratio<S, T>(r: &num_rational::Ratio<T>, s: S) -> std::result::Result<S::Ok, S::Error>
where
    S: serde::Serializer,
    num_rational::Ratio<T>: std::fmt::Display,
{
    s.collect_str(r)
}
