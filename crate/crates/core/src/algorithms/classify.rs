use crate::error::{check_len, Error, Result};
use crate::eval::f1_score;

/// Class 1 when `score ≥ threshold`, else 0.
pub fn classify_by_threshold(scores: &[f64], threshold: f64) -> Vec<f64> {
    scores.iter().map(|&s| if s >= threshold { 1.0 } else { 0.0 }).collect()
}

/// Threshold maximizing the F1 score of class 1 on validation data.
///
/// Candidates are the smallest score (everything positive) and the midpoints
/// between consecutive distinct scores; ties go to the smaller threshold.
pub fn tune_threshold(scores: &[f64], labels: &[f64]) -> Result<f64> {
    check_len("validation labels", scores.len(), labels.len())?;
    if scores.is_empty() {
        return Err(Error::InvalidArgument("empty validation set".into()));
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::InvalidArgument("validation scores must be finite".into()));
    }
    let mut sorted = scores.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted.dedup();
    let candidates = std::iter::once(sorted[0]).chain(sorted.windows(2).map(|w| 0.5 * (w[0] + w[1])));
    let mut best = (f64::NEG_INFINITY, sorted[0]);
    for t in candidates {
        let f1 = f1_score(&classify_by_threshold(scores, t), labels)?;
        if f1 > best.0 {
            best = (f1, t);
        }
    }
    Ok(best.1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn separated_scores() {
        let scores = [0.1, 0.2, 0.8, 0.9];
        let labels = [0.0, 0.0, 1.0, 1.0];
        let t = tune_threshold(&scores, &labels).unwrap();
        assert!((t - 0.5).abs() < 1e-15);
        assert_eq!(f1_score(&classify_by_threshold(&scores, t), &labels).unwrap(), 1.0);
    }

    #[test]
    fn all_positive_labels() {
        let scores = [0.3, -1.0, 2.0];
        let t = tune_threshold(&scores, &[1.0; 3]).unwrap();
        assert!(t <= -1.0);
        assert_eq!(classify_by_threshold(&scores, t), vec![1.0; 3]);
    }

    #[test]
    fn brute_force_agreement() {
        let scores = [0.4, 0.1, 0.7, 0.3];
        let labels = [1.0, 0.0, 0.0, 1.0];
        let t = tune_threshold(&scores, &labels).unwrap();
        let got = f1_score(&classify_by_threshold(&scores, t), &labels).unwrap();
        let mut best: f64 = 0.0;
        for k in -10..=20 {
            let c = classify_by_threshold(&scores, k as f64 * 0.05);
            best = best.max(f1_score(&c, &labels).unwrap());
        }
        assert!((got - best).abs() < 1e-15);
        assert!(tune_threshold(&[], &[]).is_err());
    }
}
