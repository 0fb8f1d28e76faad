use super::dominance::{DominanceResult, DominanceSummary};

/// Offset keeping the fitness ratio finite for undominated molecules.
pub const FITNESS_OFFSET: f64 = 0.05;

/// Per-reference fitness: row-sum of the dominance matrix scaled by
/// `(dom + 0.05) / (sub + 0.05)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FitnessVector(pub Vec<f64>);

impl FitnessVector {
    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.0.iter().sum()
    }

    /// Indices sorted by descending fitness; ties keep index order.
    pub fn ranking(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.0.len()).collect();
        idx.sort_by(|&a, &b| self.0[b].total_cmp(&self.0[a]).then(a.cmp(&b)));
        idx
    }
}

#[inline]
pub fn fitness_value(row_sum: f64, dom: u32, sub: u32) -> f64 {
    (row_sum * (f64::from(dom) + FITNESS_OFFSET)) / (f64::from(sub) + FITNESS_OFFSET)
}

pub fn fitness(result: &DominanceResult) -> FitnessVector {
    fitness_from_summary(&result.summary())
}

pub fn fitness_from_summary(summary: &DominanceSummary) -> FitnessVector {
    FitnessVector(
        summary
            .row_sums
            .iter()
            .zip(&summary.dom)
            .zip(&summary.sub)
            .map(|((&s, &d), &u)| fitness_value(s, d, u))
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formula_examples() {
        assert!((fitness_value(6.0, 4, 0) - 486.0).abs() < 1e-9);
        assert!((fitness_value(6.0, 0, 4) - 0.074_074_074_074).abs() < 1e-9);
        assert_eq!(fitness_value(1.0, 0, 0), 1.0);
    }

    #[test]
    fn ranking_is_stable() {
        let f = FitnessVector(vec![1.0, 3.0, 1.0, 2.0]);
        assert_eq!(f.ranking(), [1, 3, 0, 2]);
    }
}
