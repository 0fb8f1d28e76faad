//! Relaxed Pareto dominance between reference molecules relative to a target.
//!
//! For a pair (i, j) each scheme contributes 1 when i is strictly closer to
//! the target, 0.5 on an exact tie and 0 when i is further. The mean of those
//! scores fills `matrix[i][j]`. Molecule i dominates j when the fraction of
//! better-or-tied schemes reaches `relax` while the reverse check fails;
//! a pair that passes both checks (mostly ties) counts for neither side.

use rayon::prelude::*;

use super::embed::DistanceProfile;
use crate::error::{Error, Result};

/// Default relaxation: dominance tolerates up to 10% worse schemes.
pub const DEFAULT_RELAX: f64 = 0.9;

/// Dominance parameters. The default path (uniform 0.5 scores) has no
/// tunable parts; `weights` is an optional per-scheme score magnitude.
#[derive(Debug, Clone, PartialEq)]
pub struct DominanceConfig {
    pub relax: f64,
    pub weights: Option<Vec<f64>>,
}

impl Default for DominanceConfig {
    fn default() -> Self {
        DominanceConfig {
            relax: DEFAULT_RELAX,
            weights: None,
        }
    }
}

impl DominanceConfig {
    pub fn with_relax(relax: f64) -> Self {
        DominanceConfig {
            relax,
            weights: None,
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if !(self.relax > 0.5 && self.relax <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "relax {} outside (0.5, 1]",
                self.relax
            )));
        }
        if let Some(w) = &self.weights {
            if w.len() != n {
                return Err(Error::InvalidParameter(format!(
                    "{} weights for {n} schemes",
                    w.len()
                )));
            }
            if w.iter().any(|x| !(0.0..=0.5).contains(x)) {
                return Err(Error::InvalidParameter(
                    "weights must lie in [0, 0.5]".into(),
                ));
            }
        }
        Ok(())
    }
}

/// Full M x M dominance output.
#[derive(Debug, Clone, PartialEq)]
pub struct DominanceResult {
    m: usize,
    matrix: Vec<f64>,
    /// Number of molecules each molecule dominates.
    pub dom: Vec<u32>,
    /// Number of molecules dominating each molecule.
    pub sub: Vec<u32>,
    pub relax: f64,
}

impl DominanceResult {
    pub fn molecules(&self) -> usize {
        self.m
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.matrix[i * self.m + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.matrix[i * self.m..(i + 1) * self.m]
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.m).map(|i| self.row(i).iter().sum()).collect()
    }

    pub fn summary(&self) -> DominanceSummary {
        DominanceSummary {
            row_sums: self.row_sums(),
            dom: self.dom.clone(),
            sub: self.sub.clone(),
        }
    }
}

/// What fitness needs from dominance: row sums of the matrix and the counts.
#[derive(Debug, Clone, PartialEq)]
pub struct DominanceSummary {
    pub row_sums: Vec<f64>,
    pub dom: Vec<u32>,
    pub sub: Vec<u32>,
}

/// Full dominance result including the M x M matrix.
pub fn dominance(profile: &DistanceProfile, relax: f64) -> Result<DominanceResult> {
    dominance_with(profile, &DominanceConfig::with_relax(relax))
}

pub fn dominance_with(
    profile: &DistanceProfile,
    config: &DominanceConfig,
) -> Result<DominanceResult> {
    config.validate(profile.schemes())?;
    let m = profile.molecules();
    let kernel = Kernel::new(profile, config);
    let rows: Vec<(Vec<f64>, RowStats)> = (0..m)
        .into_par_iter()
        .map_init(
            || Scratch::new(m),
            |scratch, i| {
                let mut out = vec![0.0; m];
                let stats = kernel.row(i, scratch, Some(&mut out));
                (out, stats)
            },
        )
        .collect();
    let mut matrix = Vec::with_capacity(m * m);
    let mut dom = Vec::with_capacity(m);
    let mut sub = Vec::with_capacity(m);
    for (row, stats) in rows {
        matrix.extend_from_slice(&row);
        dom.push(stats.dom);
        sub.push(stats.sub);
    }
    Ok(DominanceResult {
        m,
        matrix,
        dom,
        sub,
        relax: config.relax,
    })
}

/// Row sums and counts without materialising the M x M matrix.
///
/// Bit-identical to `dominance_with(..).summary()`; rows are computed in
/// parallel and gathered in order.
pub fn dominance_summary(
    profile: &DistanceProfile,
    config: &DominanceConfig,
) -> Result<DominanceSummary> {
    config.validate(profile.schemes())?;
    let m = profile.molecules();
    let kernel = Kernel::new(profile, config);
    let stats: Vec<RowStats> = (0..m)
        .into_par_iter()
        .with_min_len(16)
        .map_init(
            || Scratch::new(m),
            |scratch, i| kernel.row(i, scratch, None),
        )
        .collect();
    Ok(DominanceSummary {
        row_sums: stats.iter().map(|s| s.row_sum).collect(),
        dom: stats.iter().map(|s| s.dom).collect(),
        sub: stats.iter().map(|s| s.sub).collect(),
    })
}

#[derive(Debug, Clone, Copy)]
struct RowStats {
    row_sum: f64,
    dom: u32,
    sub: u32,
}

struct Scratch {
    better: Vec<u16>,
    worse: Vec<u16>,
    score: Vec<f64>,
}

impl Scratch {
    fn new(m: usize) -> Self {
        Scratch {
            better: vec![0; m],
            worse: vec![0; m],
            score: Vec::new(),
        }
    }
}

struct Kernel<'a> {
    profile: &'a DistanceProfile,
    weights: Option<&'a [f64]>,
    /// `passes[c]`: whether c better-or-tied schemes out of N reach `relax`.
    passes: Vec<bool>,
    /// `means[h]`: matrix entry for a half-score total of h (h = 2*better + tied).
    means: Vec<f64>,
}

impl<'a> Kernel<'a> {
    fn new(profile: &'a DistanceProfile, config: &'a DominanceConfig) -> Self {
        let n = profile.schemes();
        let nf = n as f64;
        Kernel {
            profile,
            weights: config.weights.as_deref(),
            passes: (0..=n).map(|c| c as f64 / nf >= config.relax).collect(),
            means: (0..=2 * n).map(|h| (h as f64 * 0.5) / nf).collect(),
        }
    }

    fn row(&self, i: usize, scratch: &mut Scratch, mut out: Option<&mut [f64]>) -> RowStats {
        let m = self.profile.molecules();
        let n = self.profile.schemes();
        let better = &mut scratch.better[..m];
        let worse = &mut scratch.worse[..m];
        better.fill(0);
        worse.fill(0);
        for k in 0..n {
            let col = self.profile.column(k);
            let v = col[i];
            for ((b, w), &d) in better.iter_mut().zip(worse.iter_mut()).zip(col) {
                *b += u16::from(v < d);
                *w += u16::from(v > d);
            }
        }

        if let Some(weights) = self.weights {
            // Weighted scores: accumulate c = 0.5 + sign * w in scheme order.
            let score = &mut scratch.score;
            score.clear();
            score.resize(m, 0.0);
            for (k, &w) in weights.iter().enumerate() {
                let col = self.profile.column(k);
                let v = col[i];
                for (s, &d) in score.iter_mut().zip(col) {
                    let sign = if d > v {
                        1.0
                    } else if d < v {
                        -1.0
                    } else {
                        0.0
                    };
                    *s += 0.5 + sign * w;
                }
            }
        }

        let nf = n as f64;
        let mut stats = RowStats {
            row_sum: 0.0,
            dom: 0,
            sub: 0,
        };
        for j in 0..m {
            let b = usize::from(better[j]);
            let w = usize::from(worse[j]);
            let t = n - b - w;
            let entry = match self.weights {
                None => self.means[2 * b + t],
                Some(_) => scratch.score[j] / nf,
            };
            if let Some(out) = out.as_deref_mut() {
                out[j] = entry;
            }
            stats.row_sum += entry;
            let dom_check = self.passes[b + t];
            let sub_check = self.passes[w + t];
            stats.dom += u32::from(dom_check && !sub_check);
            stats.sub += u32::from(sub_check && !dom_check);
        }
        stats
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn profile(rows: &[&[f64]]) -> DistanceProfile {
        DistanceProfile::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn comparison_vector_example() {
        // Molecule A vs B across ten schemes: better in 5, tied in 3, worse in 2.
        let a: Vec<f64> = [1.0, 0.0, 1.0, 0.5, 0.0, 0.5, 0.5, 1.0, 1.0, 1.0]
            .iter()
            .map(|&c| {
                if c == 1.0 {
                    0.2
                } else if c == 0.5 {
                    0.5
                } else {
                    0.8
                }
            })
            .collect();
        let b = vec![0.5; 10];
        let p = profile(&[&a, &b]);
        let r = dominance(&p, 0.9).unwrap();
        assert_eq!(r.get(0, 1), 0.65);
        assert_eq!(r.get(1, 0), 0.35);
        assert_eq!(r.dom, [0, 0]);
        assert_eq!(r.sub, [0, 0]);
    }

    #[test]
    fn strict_pareto_dominance() {
        let p = profile(&[&[0.1, 0.2, 0.3], &[0.4, 0.5, 0.6]]);
        for relax in [0.51, 0.9, 1.0] {
            let r = dominance(&p, relax).unwrap();
            assert_eq!(r.get(0, 1), 1.0);
            assert_eq!(r.get(1, 0), 0.0);
            assert_eq!(r.dom, [1, 0]);
            assert_eq!(r.sub, [0, 1]);
        }
    }

    #[test]
    fn diagonal_is_half_and_uncounted() {
        let p = profile(&[&[0.1, 0.9], &[0.9, 0.1], &[0.5, 0.5]]);
        let r = dominance(&p, 0.9).unwrap();
        for i in 0..3 {
            assert_eq!(r.get(i, i), 0.5);
        }
        assert_eq!(r.dom, [0, 0, 0]);
    }

    #[test]
    fn relax_boundary_uses_greater_or_equal() {
        // 9 better + 1 worse out of 10: exactly 0.9 better-or-tied.
        let mut a = vec![0.1; 10];
        a[9] = 0.9;
        let b = vec![0.5; 10];
        let r = dominance(&profile(&[&a, &b]), 0.9).unwrap();
        assert_eq!(r.dom, [1, 0]);
        let r = dominance(&profile(&[&a, &b]), 1.0).unwrap();
        assert_eq!(r.dom, [0, 0]);
    }

    #[test]
    fn summary_matches_full() {
        let p = profile(&[
            &[0.1, 0.3, 0.2],
            &[0.2, 0.2, 0.2],
            &[0.3, 0.1, 0.9],
            &[0.1, 0.3, 0.2],
        ]);
        let cfg = DominanceConfig::default();
        assert_eq!(
            dominance_with(&p, &cfg).unwrap().summary(),
            dominance_summary(&p, &cfg).unwrap()
        );
    }

    #[test]
    fn uniform_weights_match_default_path() {
        let p = profile(&[&[0.1, 0.3, 0.2], &[0.2, 0.2, 0.2], &[0.3, 0.1, 0.9]]);
        let plain = dominance(&p, 0.9).unwrap();
        let weighted = dominance_with(
            &p,
            &DominanceConfig {
                relax: 0.9,
                weights: Some(vec![0.5; 3]),
            },
        )
        .unwrap();
        assert_eq!(plain, weighted);
    }

    #[test]
    fn rejects_bad_relax() {
        let p = profile(&[&[0.1], &[0.2]]);
        assert!(dominance(&p, 0.5).is_err());
        assert!(dominance(&p, 1.01).is_err());
        assert!(dominance(&p, f64::NAN).is_err());
    }
}
