use super::DetectorError;

/// Rank-based AUROC (Mann-Whitney U) with average ranks for tied scores:
/// the probability that a random positive outscores a random negative,
/// ties counting one half.
pub fn auroc(scores: &[f64], labels: &[u8]) -> Result<f64, DetectorError> {
    if scores.len() != labels.len() {
        return Err(DetectorError::LengthMismatch(scores.len(), labels.len()));
    }
    let positives = labels.iter().filter(|&&l| l == 1).count();
    let negatives = labels.len() - positives;
    if positives == 0 || negatives == 0 {
        return Err(DetectorError::SingleClass);
    }

    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));

    let mut positive_rank_sum = 0.0;
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && scores[order[end]] == scores[order[start]] {
            end += 1;
        }
        // ranks are 1-based; the group shares the mean of start+1..=end
        let rank = (start + end + 1) as f64 / 2.0;
        let pos_in_group = order[start..end].iter().filter(|&&i| labels[i] == 1).count();
        positive_rank_sum += rank * pos_in_group as f64;
        start = end;
    }

    let (p, n) = (positives as f64, negatives as f64);
    Ok((positive_rank_sum - p * (p + 1.0) / 2.0) / (p * n))
}
