//! Folded binary fingerprints, the native scheme roster, and Tanimoto distance.

mod atom_pair;
mod external;
mod morgan;
mod path;
mod scheme;

use std::fmt;
use std::sync::Arc;

pub use atom_pair::atom_pair_fingerprint;
pub use external::{
    load_external_fingerprints, read_external_fingerprints, write_external_fingerprints,
    ExternalFingerprints,
};
pub use morgan::{feature_morgan_fingerprint, morgan_fingerprint};
pub use path::path_fingerprint;
pub use scheme::{FingerprintScheme, SchemeKind, SchemeSet, DEFAULT_LENGTH, DEFAULT_MAX_PATH_LEN};

use crate::error::{Error, Result};

/// A fixed-length bit vector tagged with the scheme that produced it.
///
/// Bit `i` lives in `words[i / 64]` at position `i % 64`; bits past
/// `len` are always zero.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Fingerprint {
    scheme_id: Arc<str>,
    len: usize,
    words: Vec<u64>,
}

pub(crate) fn words_for(len: usize) -> usize {
    len.div_ceil(64)
}

impl Fingerprint {
    pub fn zeros(scheme_id: impl Into<Arc<str>>, len: usize) -> Fingerprint {
        Fingerprint {
            scheme_id: scheme_id.into(),
            len,
            words: vec![0; words_for(len)],
        }
    }

    /// Build from packed words; fails if bits beyond `len` are set.
    pub fn from_words(
        scheme_id: impl Into<Arc<str>>,
        len: usize,
        words: Vec<u64>,
    ) -> Result<Fingerprint> {
        if words.len() != words_for(len) {
            return Err(Error::Format(format!(
                "{} words supplied for a {len}-bit fingerprint",
                words.len()
            )));
        }
        if !len.is_multiple_of(64) {
            if let Some(&last) = words.last() {
                if last >> (len % 64) != 0 {
                    return Err(Error::Format(format!("bits set beyond length {len}")));
                }
            }
        }
        Ok(Fingerprint {
            scheme_id: scheme_id.into(),
            len,
            words,
        })
    }

    pub fn scheme_id(&self) -> &str {
        &self.scheme_id
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn set(&mut self, bit: usize) {
        assert!(
            bit < self.len,
            "bit {bit} out of range for length {}",
            self.len
        );
        self.words[bit / 64] |= 1u64 << (bit % 64);
    }

    pub fn get(&self, bit: usize) -> bool {
        bit < self.len && (self.words[bit / 64] >> (bit % 64)) & 1 == 1
    }

    /// Fold a 64-bit feature hash into the vector by modulo.
    pub fn set_hashed(&mut self, hash: u64) {
        let bit = (hash % self.len as u64) as usize;
        self.set(bit);
    }

    pub fn count_ones(&self) -> u32 {
        self.words.iter().map(|w| w.count_ones()).sum()
    }

    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len).filter(move |&i| self.get(i))
    }

    /// OR the upper half onto the lower half; `len` must be even.
    pub fn fold_half(&self) -> Fingerprint {
        assert!(
            self.len.is_multiple_of(2),
            "cannot fold an odd-length fingerprint"
        );
        let half = self.len / 2;
        let mut out = Fingerprint::zeros(self.scheme_id.clone(), half);
        for i in self.ones() {
            out.set(i % half);
        }
        out
    }
}

impl fmt::Debug for Fingerprint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "Fingerprint({}, {} bits, {} set)",
            self.scheme_id,
            self.len,
            self.count_ones()
        )
    }
}

/// `1 - |a & b| / |a | b|`, with two all-zero vectors at distance 0.
pub fn tanimoto_distance(a: &Fingerprint, b: &Fingerprint) -> Result<f64> {
    if a.scheme_id != b.scheme_id || a.len != b.len {
        return Err(Error::SchemeMismatch(format!(
            "{} ({} bits) vs {} ({} bits)",
            a.scheme_id, a.len, b.scheme_id, b.len
        )));
    }
    Ok(tanimoto_words(&a.words, &b.words))
}

/// Tanimoto distance over raw packed words of equal length.
#[inline]
pub fn tanimoto_words(a: &[u64], b: &[u64]) -> f64 {
    let mut inter = 0u32;
    let mut union = 0u32;
    for (x, y) in a.iter().zip(b) {
        inter += (x & y).count_ones();
        union += (x | y).count_ones();
    }
    distance_from_counts(inter, union)
}

#[inline]
pub(crate) fn distance_from_counts(inter: u32, union: u32) -> f64 {
    if union == 0 {
        0.0
    } else {
        1.0 - f64::from(inter) / f64::from(union)
    }
}
