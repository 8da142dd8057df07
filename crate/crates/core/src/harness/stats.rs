use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SpearmanError {
    #[error("lists differ in length: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("need at least two points, got {0}")]
    TooShort(usize),
    #[error("a list is constant, so its ranks carry no order")]
    DegenerateInput,
}

/// Ranks starting at 1, tied values sharing the mean of their positions.
pub fn average_ranks(xs: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut ranks = vec![0.0; xs.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && xs[order[j + 1]] == xs[order[i]] {
            j += 1;
        }
        // positions i..=j share rank (i+1 + j+1) / 2
        let rank = (i + j + 2) as f64 / 2.0;
        for &k in &order[i..=j] {
            ranks[k] = rank;
        }
        i = j + 1;
    }
    ranks
}

fn pearson(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Spearman rank correlation with average ranks for ties.
pub fn spearman(xs: &[f64], ys: &[f64]) -> Result<f64, SpearmanError> {
    if xs.len() != ys.len() {
        return Err(SpearmanError::LengthMismatch {
            left: xs.len(),
            right: ys.len(),
        });
    }
    if xs.len() < 2 {
        return Err(SpearmanError::TooShort(xs.len()));
    }
    pearson(&average_ranks(xs), &average_ranks(ys)).ok_or(SpearmanError::DegenerateInput)
}

/// Pairwise Spearman correlations; `None` where a column is constant or
/// there are fewer than two rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationMatrix {
    pub quantities: Vec<String>,
    pub values: Vec<Vec<Option<f64>>>,
    /// Rows the correlations were computed over.
    pub n: usize,
}

impl CorrelationMatrix {
    /// `columns[k]` holds quantity k's value for every row.
    pub fn compute(quantities: &[&str], columns: &[Vec<f64>]) -> Self {
        let k = quantities.len();
        let values = (0..k)
            .map(|i| (0..k).map(|j| spearman(&columns[i], &columns[j]).ok()).collect())
            .collect();
        Self {
            quantities: quantities.iter().map(|q| q.to_string()).collect(),
            values,
            n: columns.first().map_or(0, Vec::len),
        }
    }

    pub fn get(&self, a: &str, b: &str) -> Option<f64> {
        let i = self.quantities.iter().position(|q| q == a)?;
        let j = self.quantities.iter().position(|q| q == b)?;
        self.values[i][j]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Rank by counting: rank(x) = #{y < x} + (#{y == x} + 1) / 2.
    fn brute_ranks(xs: &[f64]) -> Vec<f64> {
        xs.iter()
            .map(|x| {
                let less = xs.iter().filter(|y| *y < x).count() as f64;
                let equal = xs.iter().filter(|y| *y == x).count() as f64;
                less + (equal + 1.0) / 2.0
            })
            .collect()
    }

    #[test]
    fn monotone_and_antitone() {
        assert_eq!(spearman(&[1.0, 2.0, 3.0], &[10.0, 20.0, 30.0]), Ok(1.0));
        assert_eq!(spearman(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]), Ok(-1.0));
    }

    #[test]
    fn errors() {
        assert_eq!(
            spearman(&[1.0, 2.0], &[1.0]),
            Err(SpearmanError::LengthMismatch { left: 2, right: 1 })
        );
        assert_eq!(spearman(&[1.0], &[1.0]), Err(SpearmanError::TooShort(1)));
        assert_eq!(spearman(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]), Err(SpearmanError::DegenerateInput));
    }

    #[test]
    fn tie_ranks_by_hand() {
        assert_eq!(average_ranks(&[10.0, 20.0, 10.0, 30.0]), vec![1.5, 3.0, 1.5, 4.0]);
        assert_eq!(average_ranks(&[5.0, 5.0, 5.0]), vec![2.0, 2.0, 2.0]);
    }

    #[test]
    fn matrix_marks_constant_columns() {
        let m = CorrelationMatrix::compute(&["a", "b", "c"], &[vec![1.0, 2.0, 3.0], vec![2.0, 4.0, 5.0], vec![7.0; 3]]);
        assert_eq!(m.get("a", "b"), Some(1.0));
        assert_eq!(m.get("a", "c"), None);
        assert_eq!(m.get("c", "c"), None);
        assert_eq!(m.n, 3);
    }

    proptest! {
        #[test]
        fn ranks_match_counting(xs in prop::collection::vec(0u8..6, 1..40)) {
            let xs: Vec<f64> = xs.into_iter().map(f64::from).collect();
            prop_assert_eq!(average_ranks(&xs), brute_ranks(&xs));
        }

        #[test]
        fn bounded_and_symmetric(
            pairs in prop::collection::vec((0u8..8, 0u8..8), 2..50)
        ) {
            let xs: Vec<f64> = pairs.iter().map(|p| f64::from(p.0)).collect();
            let ys: Vec<f64> = pairs.iter().map(|p| f64::from(p.1)).collect();
            if let Ok(r) = spearman(&xs, &ys) {
                prop_assert!((-1.0..=1.0).contains(&r));
                prop_assert_eq!(Ok(r), spearman(&ys, &xs));
            }
        }
    }
}
