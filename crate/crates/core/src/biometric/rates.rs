use crate::nonfinite;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;

/// L2 distance between two embeddings.
pub fn euclidean_distance(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::InvalidPair(format!(
            "embedding dimensions differ: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    Ok(a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt())
}

/// Mated and non-mated dissimilarity scores; lower means more alike, and a
/// comparison is a match iff its score is `<= threshold`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ScoreSet {
    pub mated: Vec<f64>,
    pub nonmated: Vec<f64>,
}

impl ScoreSet {
    pub fn new(mated: Vec<f64>, nonmated: Vec<f64>) -> Result<Self> {
        if mated.iter().chain(&nonmated).any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("scores must be finite".into()));
        }
        Ok(ScoreSet { mated, nonmated })
    }

    fn require_both(&self) -> Result<()> {
        if self.mated.is_empty() || self.nonmated.is_empty() {
            return Err(Error::InvalidInput(format!(
                "need mated and non-mated scores (have {} / {})",
                self.mated.len(),
                self.nonmated.len()
            )));
        }
        Ok(())
    }

    fn sorted(&self) -> (Vec<f64>, Vec<f64>) {
        let mut m = self.mated.clone();
        let mut n = self.nonmated.clone();
        m.sort_by(f64::total_cmp);
        n.sort_by(f64::total_cmp);
        (m, n)
    }
}

/// `|{v ≤ τ}|` in an ascending slice.
fn count_le(sorted: &[f64], t: f64) -> usize {
    sorted.partition_point(|&v| v <= t)
}

/// `(fmr, fnmr)` at `threshold`.
pub fn error_rates(s: &ScoreSet, threshold: f64) -> Result<(f64, f64)> {
    s.require_both()?;
    let fm = s.nonmated.iter().filter(|&&v| v <= threshold).count();
    let fnm = s.mated.iter().filter(|&&v| v > threshold).count();
    Ok((
        fm as f64 / s.nonmated.len() as f64,
        fnm as f64 / s.mated.len() as f64,
    ))
}

/// The largest threshold whose FMR does not exceed `target`.
///
/// Returned as the midpoint between the last admissible score and the first
/// score that would push the FMR over `target`, or `-∞` when even the lowest
/// score is inadmissible.
pub fn threshold_at_fmr(nonmated: &[f64], target: f64) -> Result<f64> {
    let mut s = nonmated.to_vec();
    s.sort_by(f64::total_cmp);
    let first_bad = first_inadmissible(&s, target)?;
    Ok(midpoint_below(&s, first_bad))
}

/// The lowest score whose inclusion would push the FMR over `target`.
fn first_inadmissible(sorted: &[f64], target: f64) -> Result<f64> {
    if sorted.is_empty() {
        return Err(Error::InvalidInput("no non-mated scores".into()));
    }
    if !(target > 0.0 && target < 1.0) {
        return Err(Error::param(format!("target FMR {target} outside (0, 1)")));
    }
    let n = sorted.len();
    // most false matches allowed
    let mut k = ((target * n as f64).floor() as usize).min(n - 1);
    while k + 1 < n && (k + 1) as f64 / n as f64 <= target {
        k += 1;
    }
    while k > 0 && k as f64 / n as f64 > target {
        k -= 1;
    }
    Ok(sorted[k])
}

/// Midpoint between `bound` and the largest value of `sorted` below it, or `-∞`.
fn midpoint_below(sorted: &[f64], bound: f64) -> f64 {
    let below = sorted.partition_point(|&v| v < bound);
    if below == 0 {
        return f64::NEG_INFINITY;
    }
    sorted[below - 1] + (bound - sorted[below - 1]) / 2.0
}

/// Like [`threshold_at_fmr`], but the threshold sits just under the first
/// inadmissible non-mated score relative to *all* observed scores, so mated
/// scores between two non-mated values still count as matches.
pub fn operating_threshold(s: &ScoreSet, target: f64) -> Result<f64> {
    s.require_both()?;
    let (m, n) = s.sorted();
    let first_bad = first_inadmissible(&n, target)?;
    let mut all: Vec<f64> = m.into_iter().chain(n).collect();
    all.sort_by(f64::total_cmp);
    Ok(midpoint_below(&all, first_bad))
}

/// Where the equal-error search settled.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EerPoint {
    pub eer: f64,
    #[serde(with = "nonfinite")]
    pub threshold: f64,
    pub fmr: f64,
    pub fnmr: f64,
}

/// Candidate thresholds: `-∞`, every distinct score, and every midpoint
/// between consecutive distinct scores.
fn candidates(m: &[f64], n: &[f64]) -> Vec<f64> {
    let mut all: Vec<f64> = m.iter().chain(n).copied().collect();
    all.sort_by(f64::total_cmp);
    all.dedup();
    let mut out = Vec::with_capacity(all.len() * 2);
    out.push(f64::NEG_INFINITY);
    for (i, &v) in all.iter().enumerate() {
        if i > 0 {
            out.push(all[i - 1] + (v - all[i - 1]) / 2.0);
        }
        out.push(v);
    }
    out
}

/// Exact empirical EER over the full threshold sweep.
///
/// Picks the candidate minimising `|fmr − fnmr|`, breaking ties by the
/// smaller `fmr + fnmr` and then the smaller threshold, and reports
/// `(fmr + fnmr) / 2` there. Rates are compared as exact fractions.
pub fn eer_point(s: &ScoreSet) -> Result<EerPoint> {
    s.require_both()?;
    let (m, n) = s.sorted();
    let (nm, nn) = (m.len() as u128, n.len() as u128);
    // fmr = a / nn, fnmr = b / nm; scale both by nm·nn
    let key = |t: f64| {
        let a = count_le(&n, t) as u128;
        let b = m.len() as u128 - count_le(&m, t) as u128;
        let (x, y) = (a * nm, b * nn);
        (x.abs_diff(y), x + y, a, b)
    };
    let mut best: Option<(f64, (u128, u128, u128, u128))> = None;
    for t in candidates(&m, &n) {
        let k = key(t);
        let better = match &best {
            None => true,
            Some((bt, bk)) => match (k.0, k.1).cmp(&(bk.0, bk.1)) {
                Ordering::Less => true,
                Ordering::Equal => t < *bt,
                Ordering::Greater => false,
            },
        };
        if better {
            best = Some((t, k));
        }
    }
    let (threshold, (_, _, a, b)) = best.expect("at least the -inf candidate");
    let fmr = a as f64 / nn as f64;
    let fnmr = b as f64 / nm as f64;
    Ok(EerPoint {
        eer: (fmr + fnmr) / 2.0,
        threshold,
        fmr,
        fnmr,
    })
}

pub fn eer(s: &ScoreSet) -> Result<f64> {
    Ok(eer_point(s)?.eer)
}

/// Five-number summary with Tukey fences at 1.5·IQR.
///
/// Quartiles interpolate linearly between order statistics at rank
/// `p·(n + 1)` (clamped to the sample), so `{1, …, 9}` has Q1 = 2.5 and
/// Q3 = 7.5.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxplotStats {
    pub n: usize,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
    /// Most extreme values still inside the fences.
    pub lower_whisker: f64,
    pub upper_whisker: f64,
    pub outliers: Vec<f64>,
}

fn quantile(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    let h = (p * (n as f64 + 1.0)).clamp(1.0, n as f64);
    let lo = h.floor() as usize;
    let frac = h - lo as f64;
    if lo >= n {
        return sorted[n - 1];
    }
    sorted[lo - 1] + frac * (sorted[lo] - sorted[lo - 1])
}

pub fn boxplot(values: &[f64]) -> Result<BoxplotStats> {
    if values.is_empty() {
        return Err(Error::InvalidInput("boxplot of no values".into()));
    }
    let mut s = values.to_vec();
    s.sort_by(f64::total_cmp);
    let (q1, median, q3) = (quantile(&s, 0.25), quantile(&s, 0.5), quantile(&s, 0.75));
    let iqr = q3 - q1;
    let (lo, hi) = (q1 - 1.5 * iqr, q3 + 1.5 * iqr);
    let inside: Vec<f64> = s.iter().copied().filter(|&v| v >= lo && v <= hi).collect();
    Ok(BoxplotStats {
        n: s.len(),
        min: s[0],
        q1,
        median,
        q3,
        max: s[s.len() - 1],
        lower_whisker: inside.first().copied().unwrap_or(median),
        upper_whisker: inside.last().copied().unwrap_or(median),
        outliers: s.iter().copied().filter(|&v| v < lo || v > hi).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn set(m: &[f64], n: &[f64]) -> ScoreSet {
        ScoreSet::new(m.to_vec(), n.to_vec()).unwrap()
    }

    #[test]
    fn distance_examples() {
        assert_eq!(euclidean_distance(&[0.0, 0.0], &[3.0, 4.0]).unwrap(), 5.0);
        let a = [0.3, -1.2, 7.0];
        assert_eq!(euclidean_distance(&a, &a).unwrap(), 0.0);
        assert!(matches!(euclidean_distance(&a, &[1.0]), Err(Error::InvalidPair(_))));
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        let x: Vec<f64> = (0..512).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let y: Vec<f64> = (0..512).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mut acc = 0.0;
        for i in 0..512 {
            acc += (x[i] - y[i]).powi(2);
        }
        let d = euclidean_distance(&x, &y).unwrap();
        assert!(((d - acc.sqrt()) / d).abs() < 1e-9);
    }

    #[test]
    fn rate_examples() {
        let s = set(&[0.1, 0.2], &[0.8, 0.9]);
        assert_eq!(error_rates(&s, 0.0).unwrap(), (0.0, 1.0));
        assert_eq!(error_rates(&s, 0.5).unwrap(), (0.0, 0.0));
        assert_eq!(error_rates(&set(&[0.1, 0.9], &[0.2, 0.8]), 0.5).unwrap(), (0.5, 0.5));
        assert!(matches!(error_rates(&set(&[], &[1.0]), 0.5), Err(Error::InvalidInput(_))));
        assert!(ScoreSet::new(vec![f64::NAN], vec![1.0]).is_err());
    }

    #[test]
    fn threshold_examples() {
        let nm: Vec<f64> = (1..=1000).map(f64::from).collect();
        let t = threshold_at_fmr(&nm, 0.01).unwrap();
        assert_eq!(t, 10.5);
        assert_eq!(nm.iter().filter(|&&v| v <= t).count(), 10);
        let t = threshold_at_fmr(&nm, 0.001).unwrap();
        assert_eq!(nm.iter().filter(|&&v| v <= t).count(), 1);
        assert_eq!(threshold_at_fmr(&[3.0; 10], 0.01).unwrap(), f64::NEG_INFINITY);
        assert!(threshold_at_fmr(&[], 0.01).is_err());
        assert!(threshold_at_fmr(&[1.0], 0.0).is_err());

        let s = set(&[0.0, 0.0], &[1.4; 12]);
        assert_eq!(threshold_at_fmr(&s.nonmated, 0.01).unwrap(), f64::NEG_INFINITY);
        assert_eq!(operating_threshold(&s, 0.01).unwrap(), 0.7);
        let s = set(&[10.7], &nm);
        assert_eq!(operating_threshold(&s, 0.01).unwrap(), 10.85);
        assert_eq!(error_rates(&s, 10.85).unwrap(), (0.01, 0.0));
    }

    #[test]
    fn eer_examples() {
        assert_eq!(eer(&set(&[0.1, 0.2, 0.3], &[0.7, 0.8])).unwrap(), 0.0);
        let v = [0.3, 0.1, 0.5, 0.9];
        assert_eq!(eer(&set(&v, &v)).unwrap(), 0.5);
        assert_eq!(eer(&set(&v[..3], &v[..3])).unwrap(), 0.5);
        let p = eer_point(&set(&[0.1, 0.9], &[0.2, 0.8])).unwrap();
        assert_eq!(p.eer, 0.5);
        assert!(p.threshold >= 0.2 && p.threshold < 0.8);
    }

    #[test]
    fn boxplot_examples() {
        let b = boxplot(&(1..=9).map(f64::from).collect::<Vec<_>>()).unwrap();
        assert_eq!((b.q1, b.median, b.q3), (2.5, 5.0, 7.5));
        assert!(b.outliers.is_empty());
        let mut v: Vec<f64> = (1..=9).map(f64::from).collect();
        v.push(100.0);
        let b = boxplot(&v).unwrap();
        assert_eq!((b.q1, b.q3), (2.75, 8.25));
        assert_eq!(b.outliers, vec![100.0]);
        assert_eq!(b.upper_whisker, 9.0);
        assert_eq!(boxplot(&[7.0]).unwrap().q3, 7.0);
        assert!(boxplot(&[]).is_err());
    }

    proptest! {
        #[test]
        fn rates_are_monotone(m in prop::collection::vec(0u8..50, 1..30), n in prop::collection::vec(0u8..50, 1..30)) {
            let s = set(&m.iter().map(|&v| v as f64).collect::<Vec<_>>(), &n.iter().map(|&v| v as f64).collect::<Vec<_>>());
            let mut last = (0.0, 1.0);
            for t in (-1..=51).map(|t| t as f64 * 1.0 - 0.5) {
                let r = error_rates(&s, t).unwrap();
                prop_assert!(r.0 >= last.0 && r.1 <= last.1);
                last = r;
            }
        }

        #[test]
        fn threshold_respects_target(n in prop::collection::vec(0u16..300, 1..200), target in 0.001f64..0.999) {
            let nm: Vec<f64> = n.iter().map(|&v| v as f64).collect();
            let t = threshold_at_fmr(&nm, target).unwrap();
            let s = set(&[0.0], &nm);
            prop_assert!(error_rates(&s, t).unwrap().0 <= target);
            let op = operating_threshold(&s, target).unwrap();
            prop_assert!(op >= t);
            prop_assert!(error_rates(&s, op).unwrap().0 <= target);
        }

        #[test]
        fn eer_invariant_under_increasing_map(m in prop::collection::vec(0u16..100, 1..40), n in prop::collection::vec(0u16..100, 1..40)) {
            let f = |v: &[u16], g: fn(f64) -> f64| v.iter().map(|&x| g(x as f64 / 10.0)).collect::<Vec<_>>();
            let a = eer(&set(&f(&m, |x| x), &f(&n, |x| x))).unwrap();
            let b = eer(&set(&f(&m, |x| 2.0 * x + 3.0), &f(&n, |x| 2.0 * x + 3.0))).unwrap();
            prop_assert_eq!(a, b);
        }
    }
}
