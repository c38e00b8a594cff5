//! Information-criterion model comparison.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fitting::fit::{aic, bic};

/// What a comparison needs from one fitted model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelScore {
    pub name: String,
    pub varied: Vec<String>,
    pub df: usize,
    pub nll: f64,
    pub n_trials: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub model: String,
    pub varied: Vec<String>,
    pub df: usize,
    pub log_loss: f64,
    pub aic: f64,
    pub bic: f64,
    pub best_aic: bool,
    pub best_bic: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub n_trials: usize,
    /// Sorted by AIC, ties broken by model name.
    pub rows: Vec<ComparisonRow>,
}

impl ComparisonReport {
    pub fn best_aic(&self) -> &ComparisonRow {
        self.rows.iter().find(|r| r.best_aic).expect("report has rows")
    }

    pub fn best_bic(&self) -> &ComparisonRow {
        self.rows.iter().find(|r| r.best_bic).expect("report has rows")
    }

    /// Aligned plain-text table.
    pub fn to_text(&self) -> String {
        let varied: Vec<String> = self
            .rows
            .iter()
            .map(|r| if r.varied.is_empty() { "none".to_string() } else { r.varied.join(" + ") })
            .collect();
        let name_w = self.rows.iter().map(|r| r.model.len()).max().unwrap_or(0).max(5);
        let var_w = varied.iter().map(String::len).max().unwrap_or(0).max(6);
        let mut out = format!(
            "{:<name_w$}  {:<var_w$}  {:>3}  {:>10}  {:>10}  {:>10}\n",
            "model", "varied", "df", "log loss", "AIC", "BIC"
        );
        for (r, v) in self.rows.iter().zip(&varied) {
            let aic = format!("{:.1}{}", r.aic, if r.best_aic { "*" } else { " " });
            let bic = format!("{:.1}{}", r.bic, if r.best_bic { "*" } else { " " });
            out.push_str(&format!(
                "{:<name_w$}  {:<var_w$}  {:>3}  {:>10.1}  {:>10}  {:>10}\n",
                r.model, v, r.df, r.log_loss, aic, bic
            ));
        }
        out.push_str(&format!("n = {} trials; * marks the best score\n", self.n_trials));
        out
    }
}

/// Ranks models fitted to the same dataset by AIC and flags the best AIC and
/// BIC entries.
pub fn compare_models(scores: &[ModelScore]) -> Result<ComparisonReport> {
    if scores.len() < 2 {
        return Err(Error::Usage(format!("comparison needs at least 2 models, got {}", scores.len())));
    }
    let n = scores[0].n_trials;
    if let Some(other) = scores.iter().find(|s| s.n_trials != n) {
        return Err(Error::Data(format!(
            "models were fit to different datasets ({} has n = {}, {} has n = {})",
            scores[0].name, n, other.name, other.n_trials
        )));
    }
    let mut rows: Vec<ComparisonRow> = scores
        .iter()
        .map(|s| ComparisonRow {
            model: s.name.clone(),
            varied: s.varied.clone(),
            df: s.df,
            log_loss: s.nll,
            aic: aic(s.nll, s.df),
            bic: bic(s.nll, s.df, n),
            best_aic: false,
            best_bic: false,
        })
        .collect();
    rows.sort_by(|a, b| a.aic.total_cmp(&b.aic).then_with(|| a.model.cmp(&b.model)));
    rows[0].best_aic = true;
    let best_bic = (0..rows.len())
        .min_by(|&a, &b| rows[a].bic.total_cmp(&rows[b].bic).then_with(|| rows[a].model.cmp(&rows[b].model)))
        .expect("non-empty");
    rows[best_bic].best_bic = true;
    Ok(ComparisonReport { n_trials: n, rows })
}
