use super::library::ReferenceLibrary;
use crate::error::{Error, Result};
use crate::fingerprint::{distance_from_counts, Fingerprint};

/// Target-centred distances to M reference molecules under N schemes.
///
/// Stored scheme-major: `column(k)[i]` is the Tanimoto distance between the
/// target and reference `i` under scheme `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceProfile {
    m: usize,
    n: usize,
    data: Vec<f64>,
}

impl DistanceProfile {
    /// Build from scheme-major data (`n` blocks of `m` values).
    pub fn from_scheme_major(m: usize, n: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != m * n {
            return Err(Error::InvalidParameter(format!(
                "distance data has {} values, expected {m}x{n}",
                data.len()
            )));
        }
        if m == 0 || n == 0 {
            return Err(Error::InvalidParameter(
                "distance profile needs M >= 1 and N >= 1".into(),
            ));
        }
        if let Some(bad) = data.iter().find(|d| !(0.0..=1.0).contains(*d)) {
            return Err(Error::InvalidParameter(format!(
                "distance {bad} outside [0, 1]"
            )));
        }
        Ok(DistanceProfile { m, n, data })
    }

    /// Build from per-molecule rows (`rows[i][k]`).
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let m = rows.len();
        let n = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidParameter("ragged distance rows".into()));
        }
        let mut data = vec![0.0; m * n];
        for (i, row) in rows.iter().enumerate() {
            for (k, &d) in row.iter().enumerate() {
                data[k * m + i] = d;
            }
        }
        Self::from_scheme_major(m, n, data)
    }

    /// Apply `f` to every distance of scheme `k` without range checks.
    ///
    /// Dominance only looks at orderings, so any strictly increasing `f`
    /// leaves every downstream result unchanged.
    pub fn map_scheme(&mut self, k: usize, f: impl Fn(f64) -> f64) {
        for d in &mut self.data[k * self.m..(k + 1) * self.m] {
            *d = f(*d);
        }
    }

    /// Number of reference molecules (M).
    pub fn molecules(&self) -> usize {
        self.m
    }

    /// Number of schemes (N).
    pub fn schemes(&self) -> usize {
        self.n
    }

    pub fn column(&self, k: usize) -> &[f64] {
        &self.data[k * self.m..(k + 1) * self.m]
    }

    pub fn distance(&self, molecule: usize, scheme: usize) -> f64 {
        self.data[scheme * self.m + molecule]
    }

    pub fn molecule_distances(&self, molecule: usize) -> Vec<f64> {
        (0..self.n).map(|k| self.distance(molecule, k)).collect()
    }

    /// Keep only the listed molecules, in order.
    pub fn select(&self, molecules: &[usize]) -> DistanceProfile {
        let m = molecules.len();
        let mut data = Vec::with_capacity(m * self.n);
        for k in 0..self.n {
            let col = self.column(k);
            data.extend(molecules.iter().map(|&i| col[i]));
        }
        DistanceProfile { m, n: self.n, data }
    }
}

/// Distances from a target's fingerprints to every library molecule.
pub fn embed(target: &[Fingerprint], library: &ReferenceLibrary) -> Result<DistanceProfile> {
    let words = check_target(target, library)?;
    let rows: Vec<usize> = (0..library.len()).collect();
    Ok(embed_rows(&words, library, &rows))
}

/// Validate target fingerprints against the library's scheme set.
pub(crate) fn check_target<'a>(
    target: &'a [Fingerprint],
    library: &ReferenceLibrary,
) -> Result<Vec<&'a [u64]>> {
    let schemes = library.schemes();
    if target.len() != schemes.len() {
        return Err(Error::SchemeMismatch(format!(
            "target has {} fingerprints, library has {} schemes",
            target.len(),
            schemes.len()
        )));
    }
    target
        .iter()
        .zip(schemes.iter())
        .map(|(fp, s)| {
            if fp.scheme_id() == s.id && fp.len() == s.length {
                Ok(fp.words())
            } else {
                Err(Error::SchemeMismatch(format!(
                    "target fingerprint {} ({} bits) where scheme {} ({} bits) is expected",
                    fp.scheme_id(),
                    fp.len(),
                    s.id,
                    s.length
                )))
            }
        })
        .collect()
}

/// Embed against a subset of library rows (used for masking and folds).
pub(crate) fn embed_rows(
    target: &[&[u64]],
    library: &ReferenceLibrary,
    rows: &[usize],
) -> DistanceProfile {
    let m = rows.len();
    let n = target.len();
    let mut data = Vec::with_capacity(m * n);
    for (col, t) in library.columns().iter().zip(target) {
        let t_count: u32 = t.iter().map(|w| w.count_ones()).sum();
        data.extend(rows.iter().map(|&r| {
            let other = col.row(r);
            let mut inter = 0u32;
            let mut o_count = 0u32;
            for (a, b) in t.iter().zip(other) {
                inter += (a & b).count_ones();
                o_count += b.count_ones();
            }
            distance_from_counts(inter, t_count + o_count - inter)
        }));
    }
    DistanceProfile { m, n, data }
}
