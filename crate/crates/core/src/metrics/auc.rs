use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Area under the ROC curve as the Mann–Whitney statistic
/// `P(s⁺ > s⁻) + ½·P(s⁺ = s⁻)`, computed from midranks.
pub fn auc<T: Scalar>(scores: &[T], labels: &[usize], positive_class: usize) -> Result<f64> {
    if scores.len() != labels.len() {
        return Err(Error::Metric(format!(
            "{} scores for {} labels",
            scores.len(),
            labels.len()
        )));
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::Metric("NaN score".into()));
    }
    let n_pos = labels.iter().filter(|&&y| y == positive_class).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::Metric("AUC is undefined unless both classes are present".into()));
    }

    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].partial_cmp(&scores[b]).expect("NaN excluded"));

    // Sum of 1-based midranks over positives, doubled to stay integral.
    let mut twice_rank_sum: u128 = 0;
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && scores[order[end]] == scores[order[start]] {
            end += 1;
        }
        // Ranks start+1 ..= end share the midrank (start + 1 + end) / 2.
        let twice_mid = (start + 1 + end) as u128;
        let pos_in_group = order[start..end].iter().filter(|&&i| labels[i] == positive_class).count() as u128;
        twice_rank_sum += twice_mid * pos_in_group;
        start = end;
    }
    let n_pos_u = n_pos as u128;
    let twice_u = twice_rank_sum - n_pos_u * (n_pos_u + 1);
    Ok(twice_u as f64 / (2.0 * n_pos as f64 * n_neg as f64))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_separation() {
        assert_eq!(auc(&[0.9, 0.8, 0.2, 0.1], &[1, 1, 0, 0], 1).unwrap(), 1.0);
        assert_eq!(auc(&[0.9, 0.8, 0.2, 0.1], &[0, 0, 1, 1], 1).unwrap(), 0.0);
    }

    #[test]
    fn all_ties() {
        assert_eq!(auc(&[0.3; 5], &[1, 0, 0, 1, 0], 1).unwrap(), 0.5);
    }

    #[test]
    fn three_of_four_pairs() {
        assert_eq!(auc(&[0.8, 0.4, 0.6, 0.2], &[1, 1, 0, 0], 1).unwrap(), 0.75);
    }

    #[test]
    fn single_class_undefined() {
        assert!(auc(&[0.1, 0.2], &[1, 1], 1).is_err());
        assert!(auc(&[0.1, f64::NAN], &[1, 0], 1).is_err());
    }
}
