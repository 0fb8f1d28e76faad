//! Inputs shared by the benchmarks.

use poem_core::synthetic;
use poem_core::ReferenceLibrary;

/// Bit density of the synthetic fingerprints, close to real 2048-bit ECFP.
pub const DENSITY: f64 = 0.05;

/// Two-class library of `m` random molecules under `n` external schemes.
pub fn random_library(m: usize, n: usize, bits: usize, seed: u64) -> ReferenceLibrary {
    synthetic::random_library(m, n, bits, DENSITY, seed)
}
