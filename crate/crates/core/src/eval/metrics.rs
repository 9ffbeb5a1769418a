use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

use super::data::{EmbeddingSet, PairList, Template};
use super::EvalError;

/// Default number of cross-validation folds.
pub const DEFAULT_FOLDS: usize = 10;
/// Default softmax inverse temperature for template scores.
pub const DEFAULT_BETA: f64 = 1.0;

/// `a·b / (|a| |b|)`.
pub fn cosine_similarity(a: &[f64], b: &[f64]) -> Result<f64, EvalError> {
    if a.len() != b.len() {
        return Err(EvalError::Invalid(format!(
            "cannot compare vectors of dimension {} and {}",
            a.len(),
            b.len()
        )));
    }
    let (mut dot, mut aa, mut bb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        dot += x * y;
        aa += x * x;
        bb += y * y;
    }
    if aa == 0.0 || bb == 0.0 {
        return Err(EvalError::ZeroNorm);
    }
    Ok((dot / (aa.sqrt() * bb.sqrt())).clamp(-1.0, 1.0))
}

/// Softmax-weighted mean of all cross-template cosine similarities:
/// `Σ w·s` with `w ∝ exp(β s)`.
///
/// β = 0 gives the plain mean, large β approaches the maximum. The result
/// is symmetric in the two templates.
pub fn template_similarity(
    a: &Template,
    b: &Template,
    embeddings: &EmbeddingSet,
    beta: f64,
) -> Result<f64, EvalError> {
    if !(beta.is_finite() && beta >= 0.0) {
        return Err(EvalError::Invalid(format!(
            "beta {beta} must be finite and >= 0"
        )));
    }
    let mut scores = Vec::with_capacity(a.images.len() * b.images.len());
    for ia in &a.images {
        let ea = embeddings.get(ia)?;
        for ib in &b.images {
            scores.push(cosine_similarity(ea, embeddings.get(ib)?)?);
        }
    }
    Ok(softmax_average(scores, beta))
}

/// Scores are sorted first so the sum does not depend on input order.
fn softmax_average(mut scores: Vec<f64>, beta: f64) -> f64 {
    scores.sort_by(f64::total_cmp);
    let max = *scores.last().expect("templates are non-empty");
    let (mut num, mut den) = (0.0, 0.0);
    for s in scores {
        let w = (beta * (s - max)).exp();
        num += w * s;
        den += w;
    }
    num / den
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RocPoint {
    /// Pairs with `score >= threshold` are accepted; `+inf` accepts none.
    pub threshold: f64,
    pub far: f64,
    pub tar: f64,
}

/// Operating points for decreasing thresholds, from `(FAR, TAR) = (0, 0)` at
/// `+inf` to `(1, 1)` at the smallest score.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RocCurve {
    points: Vec<RocPoint>,
}

impl RocCurve {
    pub fn points(&self) -> &[RocPoint] {
        &self.points
    }

    /// Trapezoidal area under the curve.
    pub fn auc(&self) -> f64 {
        self.points
            .windows(2)
            .map(|w| (w[1].far - w[0].far) * (w[1].tar + w[0].tar) / 2.0)
            .sum()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("threshold,far,tar\n");
        for p in &self.points {
            writeln!(out, "{},{},{}", p.threshold, p.far, p.tar).expect("string write");
        }
        out
    }
}

pub fn compute_roc(positives: &[f64], negatives: &[f64]) -> Result<RocCurve, EvalError> {
    if positives.is_empty() || negatives.is_empty() {
        return Err(EvalError::Invalid(
            "ROC needs at least one positive and one negative score".into(),
        ));
    }
    if positives.iter().chain(negatives).any(|s| !s.is_finite()) {
        return Err(EvalError::Invalid("scores must be finite".into()));
    }
    let mut pos = positives.to_vec();
    let mut neg = negatives.to_vec();
    pos.sort_by(|a, b| b.total_cmp(a));
    neg.sort_by(|a, b| b.total_cmp(a));
    let mut thresholds: Vec<f64> = pos.iter().chain(&neg).copied().collect();
    thresholds.sort_by(|a, b| b.total_cmp(a));
    thresholds.dedup();

    let (np, nn) = (pos.len() as f64, neg.len() as f64);
    let mut points = vec![RocPoint {
        threshold: f64::INFINITY,
        far: 0.0,
        tar: 0.0,
    }];
    let (mut ip, mut ineg) = (0, 0);
    for t in thresholds {
        while ip < pos.len() && pos[ip] >= t {
            ip += 1;
        }
        while ineg < neg.len() && neg[ineg] >= t {
            ineg += 1;
        }
        points.push(RocPoint {
            threshold: t,
            far: ineg as f64 / nn,
            tar: ip as f64 / np,
        });
    }
    for w in points.windows(2) {
        assert!(w[1].threshold < w[0].threshold);
        assert!(
            w[1].far >= w[0].far && w[1].tar >= w[0].tar,
            "ROC not monotone"
        );
    }
    let last = points.last().expect("non-empty");
    assert!(last.far == 1.0 && last.tar == 1.0);
    Ok(RocCurve { points })
}

/// TAR at the largest achieved FAR not above `far_target` (no
/// interpolation); 0 when no point qualifies.
pub fn tar_at_far(curve: &RocCurve, far_target: f64) -> f64 {
    curve
        .points
        .iter()
        .filter(|p| p.far <= far_target)
        .max_by(|a, b| a.far.total_cmp(&b.far).then(a.tar.total_cmp(&b.tar)))
        .map_or(0.0, |p| p.tar)
}

/// Smallest threshold maximizing training accuracy of `score >= t ⇒ same`.
///
/// Accuracy only changes just above a score, so the maximizing thresholds
/// form runs `[next_up(s_i), s_j]`; the result is the lowest such start, or
/// `-inf` when accepting every pair is already optimal.
pub fn best_threshold(scores: &[f64], same: &[bool]) -> (f64, usize) {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut correct = same.iter().filter(|&&s| s).count();
    let mut best = (f64::NEG_INFINITY, correct);
    let mut k = 0;
    while k < order.len() {
        let s = scores[order[k]];
        while k < order.len() && scores[order[k]] == s {
            if same[order[k]] {
                correct -= 1;
            } else {
                correct += 1;
            }
            k += 1;
        }
        if correct > best.1 {
            best = (s.next_up(), correct);
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FoldResult {
    /// 1-based.
    pub fold: usize,
    pub pairs: usize,
    /// Chosen on the other folds; `null` in JSON when it is `-inf`.
    pub threshold: f64,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrossValidation {
    pub mean_accuracy: f64,
    pub folds: Vec<FoldResult>,
}

impl CrossValidation {
    pub fn fold_accuracies(&self) -> Vec<f64> {
        self.folds.iter().map(|f| f.accuracy).collect()
    }
}

/// Cross-validated verification accuracy. `fold_of[k]` is the 0-based fold
/// of pair `k`.
pub fn cross_validated_accuracy_from_scores(
    scores: &[f64],
    same: &[bool],
    fold_of: &[usize],
    fold_count: usize,
) -> Result<CrossValidation, EvalError> {
    if scores.len() != same.len() || scores.len() != fold_of.len() {
        return Err(EvalError::Invalid(
            "scores, labels and folds differ in length".into(),
        ));
    }
    if fold_count < 2 {
        return Err(EvalError::Invalid(format!(
            "cross validation needs at least 2 folds, got {fold_count}"
        )));
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(EvalError::Invalid("scores must be finite".into()));
    }
    let mut folds = Vec::with_capacity(fold_count);
    for f in 0..fold_count {
        let (mut train_s, mut train_l) = (Vec::new(), Vec::new());
        let mut test = Vec::new();
        for k in 0..scores.len() {
            if fold_of[k] == f {
                test.push(k);
            } else if fold_of[k] < fold_count {
                train_s.push(scores[k]);
                train_l.push(same[k]);
            } else {
                return Err(EvalError::Invalid(format!(
                    "pair {} is in fold {} but only {fold_count} folds exist",
                    k + 1,
                    fold_of[k] + 1
                )));
            }
        }
        if test.is_empty() {
            return Err(EvalError::EmptyFold(f + 1));
        }
        let (threshold, _) = best_threshold(&train_s, &train_l);
        let correct = test
            .iter()
            .filter(|&&k| (scores[k] >= threshold) == same[k])
            .count();
        folds.push(FoldResult {
            fold: f + 1,
            pairs: test.len(),
            threshold,
            accuracy: correct as f64 / test.len() as f64,
        });
    }
    let mean_accuracy = folds.iter().map(|f| f.accuracy).sum::<f64>() / fold_count as f64;
    Ok(CrossValidation {
        mean_accuracy,
        folds,
    })
}

/// 0-based fold per pair: from the file when given, otherwise `default_folds`
/// contiguous blocks in file order.
pub fn fold_assignment(
    pairs: &PairList,
    default_folds: usize,
) -> Result<(Vec<usize>, usize), EvalError> {
    if pairs.has_folds() {
        let folds: Vec<usize> = pairs
            .pairs()
            .iter()
            .map(|p| p.fold.expect("all folded") - 1)
            .collect();
        let count = folds.iter().max().expect("non-empty") + 1;
        return Ok((folds, count));
    }
    if default_folds < 2 {
        return Err(EvalError::Invalid(format!(
            "cross validation needs at least 2 folds, got {default_folds}"
        )));
    }
    let n = pairs.len();
    if n < default_folds {
        return Err(EvalError::Invalid(format!(
            "{n} pairs cannot fill {default_folds} folds"
        )));
    }
    Ok((
        (0..n).map(|k| k * default_folds / n).collect(),
        default_folds,
    ))
}

/// Per-pair scores. With templates, pair ids name template subjects and
/// scores are softmax template similarities; otherwise they name images.
pub fn pair_scores(
    pairs: &PairList,
    embeddings: &EmbeddingSet,
    templates: Option<&BTreeMap<String, Template>>,
    beta: f64,
) -> Result<Vec<f64>, EvalError> {
    match templates {
        Some(t) => {
            pairs.check_ids(|id| t.contains_key(id))?;
            pairs
                .pairs()
                .iter()
                .map(|p| template_similarity(&t[&p.id_a], &t[&p.id_b], embeddings, beta))
                .collect()
        }
        None => {
            pairs.check_ids(|id| embeddings.get(id).is_ok())?;
            pairs
                .pairs()
                .iter()
                .map(|p| cosine_similarity(embeddings.get(&p.id_a)?, embeddings.get(&p.id_b)?))
                .collect()
        }
    }
}

/// Split scores by label into `(positives, negatives)`.
pub fn split_by_label(scores: &[f64], pairs: &PairList) -> (Vec<f64>, Vec<f64>) {
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    for (s, p) in scores.iter().zip(pairs.pairs()) {
        if p.same {
            pos.push(*s);
        } else {
            neg.push(*s);
        }
    }
    (pos, neg)
}

pub fn cross_validated_accuracy(
    pairs: &PairList,
    embeddings: &EmbeddingSet,
    templates: Option<&BTreeMap<String, Template>>,
    beta: f64,
    default_folds: usize,
) -> Result<CrossValidation, EvalError> {
    let scores = pair_scores(pairs, embeddings, templates, beta)?;
    let (fold_of, count) = fold_assignment(pairs, default_folds)?;
    let same: Vec<bool> = pairs.pairs().iter().map(|p| p.same).collect();
    cross_validated_accuracy_from_scores(&scores, &same, &fold_of, count)
}
