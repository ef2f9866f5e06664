use super::rates::{
    boxplot, eer_point, error_rates, euclidean_distance, operating_threshold, BoxplotStats, EerPoint, ScoreSet,
};
use crate::exec::{self, Mode};
use crate::nonfinite;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::path::Path;

/// FMR operating points reported next to the EER.
pub const FMR_TARGETS: [f64; 2] = [0.001, 0.01];

pub const TABLE_COLUMNS: [&str; 4] = ["Type", "EER%", "FNMR% @ FMR=0.1%", "FNMR% @ FMR=1%"];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperatingPoint {
    pub target_fmr: f64,
    #[serde(with = "nonfinite")]
    pub threshold: f64,
    pub fmr: f64,
    pub fnmr: f64,
}

impl OperatingPoint {
    pub fn at(s: &ScoreSet, target_fmr: f64) -> Result<Self> {
        let threshold = operating_threshold(s, target_fmr)?;
        let (fmr, fnmr) = error_rates(s, threshold)?;
        Ok(OperatingPoint {
            target_fmr,
            threshold,
            fmr,
            fnmr,
        })
    }
}

/// Rates need both mated and non-mated scores; boxplots need only their own list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub condition: String,
    pub mated: usize,
    pub nonmated: usize,
    pub eer: Option<EerPoint>,
    /// At FMR = 0.1%.
    pub fnmr_at_fmr_0_1: Option<OperatingPoint>,
    /// At FMR = 1%.
    pub fnmr_at_fmr_1: Option<OperatingPoint>,
    pub mated_boxplot: Option<BoxplotStats>,
    pub nonmated_boxplot: Option<BoxplotStats>,
}

impl ConditionReport {
    pub fn evaluate(condition: impl Into<String>, s: &ScoreSet) -> Result<Self> {
        let rated = !s.mated.is_empty() && !s.nonmated.is_empty();
        let op = |t| if rated { OperatingPoint::at(s, t).map(Some) } else { Ok(None) };
        let bx = |v: &[f64]| if v.is_empty() { Ok(None) } else { boxplot(v).map(Some) };
        Ok(ConditionReport {
            condition: condition.into(),
            mated: s.mated.len(),
            nonmated: s.nonmated.len(),
            eer: if rated { Some(eer_point(s)?) } else { None },
            fnmr_at_fmr_0_1: op(FMR_TARGETS[0])?,
            fnmr_at_fmr_1: op(FMR_TARGETS[1])?,
            mated_boxplot: bx(&s.mated)?,
            nonmated_boxplot: bx(&s.nonmated)?,
        })
    }

    /// `Tattooed | 0.80 | 1.20 | 0.80`: percentages with two decimals.
    pub fn table_row(&self) -> String {
        let pct = |v: Option<f64>| v.map_or_else(|| "n/a".to_string(), |v| format!("{:.2}", 100.0 * v));
        [
            self.condition.clone(),
            pct(self.eer.map(|e| e.eer)),
            pct(self.fnmr_at_fmr_0_1.map(|o| o.fnmr)),
            pct(self.fnmr_at_fmr_1.map(|o| o.fnmr)),
        ]
        .join(" | ")
    }
}

/// A comparison named in the pairs file that could not be scored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MissingPair {
    pub condition: String,
    pub probe_a: String,
    pub probe_b: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiometricReport {
    pub conditions: Vec<ConditionReport>,
    pub missing: Vec<MissingPair>,
}

impl BiometricReport {
    /// Conditions keep the order given.
    pub fn evaluate(sets: &[(String, ScoreSet)]) -> Result<Self> {
        let conditions = sets
            .iter()
            .map(|(c, s)| ConditionReport::evaluate(c.clone(), s))
            .collect::<Result<_>>()?;
        Ok(BiometricReport {
            conditions,
            missing: Vec::new(),
        })
    }

    pub fn table_header() -> String {
        TABLE_COLUMNS.join(" | ")
    }

    pub fn table(&self) -> String {
        let mut lines = vec![Self::table_header()];
        lines.extend(self.conditions.iter().map(ConditionReport::table_row));
        lines.join("\n")
    }

    /// One row per condition, Table III column order, rates in percent.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "condition",
            "eer_pct",
            "fnmr_pct_at_fmr_0.1",
            "fnmr_pct_at_fmr_1",
            "eer_threshold",
            "threshold_at_fmr_0.1",
            "threshold_at_fmr_1",
            "mated",
            "nonmated",
        ])?;
        let pct = |v: Option<f64>| v.map_or(String::new(), |v| format!("{:.6}", 100.0 * v));
        let thr = |v: Option<f64>| v.map_or(String::new(), |v| nonfinite::text(v, 6));
        for c in &self.conditions {
            w.write_record([
                c.condition.clone(),
                pct(c.eer.map(|e| e.eer)),
                pct(c.fnmr_at_fmr_0_1.map(|o| o.fnmr)),
                pct(c.fnmr_at_fmr_1.map(|o| o.fnmr)),
                thr(c.eer.map(|e| e.threshold)),
                thr(c.fnmr_at_fmr_0_1.map(|o| o.threshold)),
                thr(c.fnmr_at_fmr_1.map(|o| o.threshold)),
                c.mated.to_string(),
                c.nonmated.to_string(),
            ])?;
        }
        let bytes = w.into_inner().map_err(|e| Error::InvalidInput(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

fn parse_label(s: &str) -> Result<bool> {
    match s.trim().to_ascii_lowercase().as_str() {
        "mated" => Ok(true),
        "nonmated" | "non-mated" => Ok(false),
        other => Err(Error::InvalidInput(format!("label '{other}' is neither mated nor nonmated"))),
    }
}

fn push(sets: &mut Vec<(String, ScoreSet)>, condition: &str, mated: bool, score: f64) {
    let i = match sets.iter().position(|(c, _)| c == condition) {
        Some(i) => i,
        None => {
            sets.push((condition.to_string(), ScoreSet::default()));
            sets.len() - 1
        }
    };
    let s = &mut sets[i].1;
    if mated {
        s.mated.push(score);
    } else {
        s.nonmated.push(score);
    }
}

#[derive(Deserialize)]
struct ScoreRow {
    condition: String,
    label: String,
    score: f64,
}

/// Reads `condition,label,score`; conditions in order of first appearance.
pub fn read_scores(text: &str) -> Result<Vec<(String, ScoreSet)>> {
    let mut sets = Vec::new();
    for row in csv::Reader::from_reader(text.as_bytes()).deserialize() {
        let row: ScoreRow = row?;
        if !row.score.is_finite() {
            return Err(Error::InvalidInput(format!("non-finite score in '{}'", row.condition)));
        }
        push(&mut sets, &row.condition, parse_label(&row.label)?, row.score);
    }
    Ok(sets)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    pub subject: String,
    pub vector: Vec<f64>,
}

/// Reads `subject,probe,v0,v1,…`, keyed by probe id.
pub fn read_embeddings(text: &str) -> Result<HashMap<String, Embedding>> {
    let mut out = HashMap::new();
    let mut dim = None;
    let mut rdr = csv::ReaderBuilder::new().flexible(true).from_reader(text.as_bytes());
    for rec in rdr.records() {
        let rec = rec?;
        if rec.len() < 3 {
            return Err(Error::InvalidInput(format!("embedding row with {} fields", rec.len())));
        }
        let vector = rec
            .iter()
            .skip(2)
            .map(|v| v.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::InvalidInput(format!("probe '{}': {e}", &rec[1])))?;
        if vector.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!("probe '{}' has non-finite values", &rec[1])));
        }
        match dim {
            None => dim = Some(vector.len()),
            Some(d) if d != vector.len() => {
                return Err(Error::InvalidInput(format!(
                    "probe '{}' has dimension {}, expected {d}",
                    &rec[1],
                    vector.len()
                )))
            }
            _ => {}
        }
        let e = Embedding {
            subject: rec[0].to_string(),
            vector,
        };
        if out.insert(rec[1].to_string(), e).is_some() {
            return Err(Error::InvalidInput(format!("duplicate probe '{}'", &rec[1])));
        }
    }
    Ok(out)
}

/// One comparison to score. Without a label, a pair is mated iff both probes
/// belong to the same subject.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairEntry {
    pub condition: String,
    pub probe_a: String,
    pub probe_b: String,
    #[serde(default)]
    pub label: Option<String>,
}

/// Reads `condition,probe_a,probe_b[,label]`.
pub fn read_pairs(text: &str) -> Result<Vec<PairEntry>> {
    csv::Reader::from_reader(text.as_bytes())
        .deserialize()
        .map(|r| r.map_err(Error::from))
        .collect()
}

/// Scores every pair by Euclidean distance; unknown probes are collected.
pub fn scores_from_embeddings(
    embeddings: &HashMap<String, Embedding>,
    pairs: &[PairEntry],
    mode: Mode,
) -> Result<(Vec<(String, ScoreSet)>, Vec<MissingPair>)> {
    let scored = exec::map(mode, pairs, |p| -> Result<std::result::Result<(bool, f64), String>> {
        let (Some(a), Some(b)) = (embeddings.get(&p.probe_a), embeddings.get(&p.probe_b)) else {
            let which = if embeddings.contains_key(&p.probe_a) { &p.probe_b } else { &p.probe_a };
            return Ok(Err(format!("no embedding for probe '{which}'")));
        };
        let mated = match p.label.as_deref().filter(|l| !l.trim().is_empty()) {
            Some(l) => parse_label(l)?,
            None => a.subject == b.subject,
        };
        Ok(Ok((mated, euclidean_distance(&a.vector, &b.vector)?)))
    });
    let (mut sets, mut missing) = (Vec::new(), Vec::new());
    for (p, r) in pairs.iter().zip(scored) {
        match r? {
            Ok((mated, d)) => push(&mut sets, &p.condition, mated, d),
            Err(reason) => {
                log::warn!("{} vs {}: {reason}", p.probe_a, p.probe_b);
                missing.push(MissingPair {
                    condition: p.condition.clone(),
                    probe_a: p.probe_a.clone(),
                    probe_b: p.probe_b.clone(),
                    reason,
                });
            }
        }
    }
    Ok((sets, missing))
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub fn evaluate_scores_file(path: impl AsRef<Path>) -> Result<BiometricReport> {
    BiometricReport::evaluate(&read_scores(&read_text(path.as_ref())?)?)
}

pub fn evaluate_embeddings(
    embeddings: impl AsRef<Path>,
    pairs: impl AsRef<Path>,
    mode: Mode,
) -> Result<BiometricReport> {
    let emb = read_embeddings(&read_text(embeddings.as_ref())?)?;
    let pairs = read_pairs(&read_text(pairs.as_ref())?)?;
    let (sets, missing) = scores_from_embeddings(&emb, &pairs, mode)?;
    let mut report = BiometricReport::evaluate(&sets)?;
    report.missing = missing;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn point(fnmr: f64) -> Option<OperatingPoint> {
        Some(OperatingPoint { target_fmr: 0.01, threshold: 0.0, fmr: 0.0, fnmr })
    }

    #[test]
    fn row_format_matches_published_layout() {
        let row = |name: &str, e: f64, a: f64, b: f64| ConditionReport {
            condition: name.into(),
            mated: 1,
            nonmated: 1,
            eer: Some(EerPoint { eer: e, threshold: 0.0, fmr: e, fnmr: e }),
            fnmr_at_fmr_0_1: point(a),
            fnmr_at_fmr_1: point(b),
            mated_boxplot: None,
            nonmated_boxplot: None,
        };
        assert_eq!(row("Tattooed", 0.008, 0.012, 0.008).table_row(), "Tattooed | 0.80 | 1.20 | 0.80");
        assert_eq!(row("TRNet", 0.004, 0.012, 0.0).table_row(), "TRNet | 0.40 | 1.20 | 0.00");
        assert_eq!(BiometricReport::table_header(), "Type | EER% | FNMR% @ FMR=0.1% | FNMR% @ FMR=1%");
    }

    #[test]
    fn orthogonal_embeddings_separate_perfectly() {
        let mut emb = String::from("subject,probe,v0,v1,v2,v3\n");
        let mut pairs = String::from("condition,probe_a,probe_b,label\n");
        for s in 0..4 {
            let v: Vec<String> = (0..4).map(|i| if i == s { "1" } else { "0" }.to_string()).collect();
            for p in ["a", "b"] {
                emb.push_str(&format!("s{s},s{s}{p},{}\n", v.join(",")));
            }
            pairs.push_str(&format!("Tattooed,s{s}a,s{s}b,mated\n"));
            for t in 0..4 {
                if t != s {
                    pairs.push_str(&format!("Tattooed,s{s}a,s{t}b,\n"));
                }
            }
        }
        pairs.push_str("Tattooed,s0a,ghost,mated\n");
        let tmp = tempfile::tempdir().unwrap();
        std::fs::write(tmp.path().join("e.csv"), emb).unwrap();
        std::fs::write(tmp.path().join("p.csv"), pairs).unwrap();
        let r = evaluate_embeddings(tmp.path().join("e.csv"), tmp.path().join("p.csv"), Mode::Parallel).unwrap();
        let c = &r.conditions[0];
        assert_eq!((c.mated, c.nonmated), (4, 12));
        assert_eq!(c.eer.unwrap().eer, 0.0);
        assert_eq!(c.fnmr_at_fmr_0_1.unwrap().fnmr, 0.0);
        assert_eq!(c.fnmr_at_fmr_1.unwrap().fnmr, 0.0);
        assert_eq!(c.table_row(), "Tattooed | 0.00 | 0.00 | 0.00");
        assert_eq!(r.missing.len(), 1);
        assert!(r.missing[0].reason.contains("ghost"));
    }

    #[test]
    fn score_csv_keeps_condition_order() {
        let text = "condition,label,score\nTattooed,mated,0.4\nTRNet,mated,0.3\nTattooed,nonmated,1.2\nTRNet,nonmated,1.1\nTRNet,mated,0.2\n";
        let sets = read_scores(text).unwrap();
        assert_eq!(sets[0].0, "Tattooed");
        assert_eq!(sets[1].1.mated, vec![0.3, 0.2]);
        let r = BiometricReport::evaluate(&sets).unwrap();
        let json = serde_json::to_string(&r).unwrap();
        let back: BiometricReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back, r);
        assert!(r.to_csv().unwrap().lines().nth(1).unwrap().starts_with("Tattooed,0.000000,0.000000,0.000000"));
        assert_eq!(r.table().lines().count(), 3);
        assert!(read_scores("condition,label,score\nX,friend,0.1\n").is_err());
    }

    #[test]
    fn one_sided_condition_has_boxplot_only() {
        let s = ScoreSet::new(vec![1.0, 2.0, 3.0], vec![]).unwrap();
        let c = ConditionReport::evaluate("Bona fide", &s).unwrap();
        assert!(c.eer.is_none() && c.fnmr_at_fmr_1.is_none());
        assert_eq!(c.mated_boxplot.as_ref().unwrap().median, 2.0);
        assert_eq!(c.table_row(), "Bona fide | n/a | n/a | n/a");
    }

    #[test]
    fn embedding_validation() {
        assert!(read_embeddings("subject,probe,v0\na,p,1\na,p,2\n").is_err());
        assert!(read_embeddings("subject,probe,v0,v1\na,p,1,2\nb,q,1\n").is_err());
        assert!(read_embeddings("subject,probe,v0\na,p,x\n").is_err());
        assert_eq!(read_embeddings("subject,probe,v0\na,p,1\n").unwrap()["p"].vector, vec![1.0]);
    }
}
