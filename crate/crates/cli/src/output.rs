//! Results-file writers.
//!
//! Every results file starts with a `# config = {json}` line holding the
//! fully resolved config (so the run can be reproduced from the file) and,
//! unless suppressed, a `# generated = <unix seconds>` timestamp line.
//! All numbers are written with the shortest round-trip representation,
//! so re-running a command reproduces the file byte for byte apart from
//! the timestamp.

use std::io::Write;
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::Result;
use serde::Serialize;

use crate::experiment::{CurveRow, ExperimentResults, PosthocOutput, Summary, TrialRow, WeightNormRow};

pub fn write_preamble<W: Write>(w: &mut W, config: &impl Serialize, timestamp: bool) -> Result<()> {
    writeln!(w, "# config = {}", serde_json::to_string(config)?)?;
    if timestamp {
        let secs = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        writeln!(w, "# generated = {secs}")?;
    }
    Ok(())
}

/// Extracts the embedded config JSON from a results file.
pub fn extract_config_line(contents: &str) -> Option<&str> {
    contents
        .lines()
        .find_map(|line| line.strip_prefix("# config = "))
}

fn fmt_opt<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map(|x| x.to_string()).unwrap_or_default()
}

fn trial_cells(row: &TrialRow, per_class_cols: usize) -> Vec<String> {
    let mut cells = vec![
        "trial".to_string(),
        row.method.clone(),
        fmt_opt(&row.tau),
        row.trial.to_string(),
        row.seed.to_string(),
        if row.ok { "ok" } else { "failed" }.to_string(),
        fmt_opt(&row.ber),
        fmt_opt(&row.misclassification),
    ];
    for k in 0..per_class_cols {
        cells.push(fmt_opt(&row.per_class.get(k).cloned().flatten()));
    }
    cells
}

fn summary_cells(s: &Summary, per_class_cols: usize) -> Vec<String> {
    let mut cells = vec![
        "summary".to_string(),
        s.method.clone(),
        fmt_opt(&s.tau),
        String::new(),
        String::new(),
        String::new(),
        String::new(),
        String::new(),
    ];
    cells.extend(std::iter::repeat_with(String::new).take(per_class_cols));
    cells.push(s.mean_ber.to_string());
    cells.push(s.std_ber.to_string());
    cells.push(s.n_success.to_string());
    cells
}

/// `record,method,tau,trial,seed,status,ber,misclassification,
/// per_class_0,per_class_1,mean_ber,std_ber,n_success`; trial rows fill
/// the left block, summary rows the right.
pub fn write_experiment_csv<W: Write>(
    w: &mut W,
    config: &impl Serialize,
    timestamp: bool,
    results: &ExperimentResults,
    per_class_cols: usize,
) -> Result<()> {
    write_preamble(w, config, timestamp)?;
    let mut header = vec![
        "record".to_string(),
        "method".to_string(),
        "tau".to_string(),
        "trial".to_string(),
        "seed".to_string(),
        "status".to_string(),
        "ber".to_string(),
        "misclassification".to_string(),
    ];
    for k in 0..per_class_cols {
        header.push(format!("per_class_{k}"));
    }
    header.extend(["mean_ber".to_string(), "std_ber".to_string(), "n_success".to_string()]);
    writeln!(w, "{}", header.join(","))?;

    for row in &results.rows {
        let mut cells = trial_cells(row, per_class_cols);
        cells.extend(std::iter::repeat_with(String::new).take(3));
        writeln!(w, "{}", cells.join(","))?;
    }
    for summary in &results.summaries {
        writeln!(w, "{}", summary_cells(summary, per_class_cols).join(","))?;
    }
    Ok(())
}

/// `optimizer,pearson,norm_0,...,norm_{L-1}`.
pub fn write_weightnorm_csv<W: Write>(
    w: &mut W,
    config: &impl Serialize,
    timestamp: bool,
    rows: &[WeightNormRow],
) -> Result<()> {
    write_preamble(w, config, timestamp)?;
    let num_classes = rows.first().map(|r| r.norms.len()).unwrap_or(0);
    let mut header = vec!["optimizer".to_string(), "pearson".to_string()];
    for k in 0..num_classes {
        header.push(format!("norm_{k}"));
    }
    writeln!(w, "{}", header.join(","))?;
    for row in rows {
        let mut cells = vec![row.optimizer.clone(), row.pearson.to_string()];
        cells.extend(row.norms.iter().map(|n| n.to_string()));
        writeln!(w, "{}", cells.join(","))?;
    }
    Ok(())
}

/// `loss,gamma,p,psi,f,psi_inv,bayes_risk`.
pub fn write_curves_csv<W: Write>(
    w: &mut W,
    config: &impl Serialize,
    timestamp: bool,
    rows: &[CurveRow],
) -> Result<()> {
    write_preamble(w, config, timestamp)?;
    writeln!(w, "loss,gamma,p,psi,f,psi_inv,bayes_risk")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            r.loss, r.gamma, r.p, r.psi, r.f, r.psi_inv, r.bayes_risk
        )?;
    }
    Ok(())
}

/// `g0,...,g{L-1},pred,label`: corrected scores with predictions.
pub fn write_posthoc_csv<W: Write>(w: &mut W, output: &PosthocOutput) -> Result<()> {
    let num_classes = output.scores.first().map(Vec::len).unwrap_or(0);
    let mut header: Vec<String> = (0..num_classes).map(|k| format!("g{k}")).collect();
    header.push("pred".to_string());
    header.push("label".to_string());
    writeln!(w, "{}", header.join(","))?;
    for ((scores, pred), label) in output.scores.iter().zip(&output.preds).zip(&output.labels) {
        let mut cells: Vec<String> = scores.iter().map(|s| s.to_string()).collect();
        cells.push(pred.to_string());
        cells.push(label.to_string());
        writeln!(w, "{}", cells.join(","))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_line_round_trips() {
        let config = crate::config::BinaryCurvesConfig::default();
        let mut buf = Vec::new();
        write_preamble(&mut buf, &config, false).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let line = extract_config_line(&text).unwrap();
        let back: crate::config::BinaryCurvesConfig = serde_json::from_str(line).unwrap();
        assert_eq!(config, back);
    }
}
