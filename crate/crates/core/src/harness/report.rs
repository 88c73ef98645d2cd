use std::fmt::Write as _;

use serde::Serialize;

use super::experiment::{ExperimentResult, SuiteCell};
use crate::data::Label;
use crate::error::Result;
use crate::network::Topology;

const COLUMN_WIDTH: usize = 30;

/// Text tables in the per-depth layout: one table per topology, one column
/// group (precision, recall, F1) per configuration, rows None..Severe, then
/// the macro average and overall accuracy. Values are rounded to 2 places.
pub fn render_text(results: &[ExperimentResult]) -> String {
    let mut out = String::new();
    for topology in Topology::ALL {
        let group: Vec<&ExperimentResult> =
            results.iter().filter(|r| r.config.topology == topology).collect();
        if group.is_empty() {
            continue;
        }
        render_group(&mut out, topology, &group);
        out.push('\n');
    }
    out
}

fn render_group(out: &mut String, topology: Topology, group: &[&ExperimentResult]) {
    let label_w = 18;
    let _ = writeln!(out, "Results for {topology} models (holdout test set)");
    let rule = "=".repeat(label_w + COLUMN_WIDTH * group.len());
    let _ = writeln!(out, "{rule}");

    let _ = write!(out, "{:<label_w$}", "");
    for r in group {
        let title = format!("{}+{}", topology, r.config.scheme.family);
        let _ = write!(out, "{title:^COLUMN_WIDTH$}");
    }
    out.push('\n');
    let _ = write!(out, "{:<label_w$}", "Depression Level");
    for _ in group {
        let _ = write!(out, "{:>10}{:>10}{:>10}", "Precision", "Recall", "F1 score");
    }
    out.push('\n');
    let _ = writeln!(out, "{}", "-".repeat(rule.len()));

    for label in Label::ALL {
        let _ = write!(out, "{:<label_w$}", label.name());
        for r in group {
            let m = r.holdout.class(label);
            let _ = write!(out, "{:>10.2}{:>10.2}{:>10.2}", m.precision, m.recall, m.f1);
        }
        out.push('\n');
    }
    let _ = writeln!(out, "{}", "-".repeat(rule.len()));
    let _ = write!(out, "{:<label_w$}", "Average");
    for r in group {
        let h = &r.holdout;
        let _ = write!(out, "{:>10.2}{:>10.2}{:>10.2}", h.macro_precision, h.macro_recall, h.macro_f1);
    }
    out.push('\n');
    let _ = write!(out, "{:<label_w$}", "Overall Accuracy");
    for r in group {
        let _ = write!(out, "{:^COLUMN_WIDTH$}", format!("{:.2}", r.holdout.accuracy));
    }
    out.push('\n');
    let _ = write!(out, "{:<label_w$}", "LOO Accuracy");
    for r in group {
        let cell = r
            .loo_mean_accuracy
            .map_or_else(|| "-".to_string(), |a| format!("{a:.2}"));
        let _ = write!(out, "{cell:^COLUMN_WIDTH$}");
    }
    out.push('\n');
    let _ = writeln!(out, "{rule}");
    let _ = writeln!(
        out,
        "{}",
        group
            .iter()
            .map(|r| format!(
                "{}+{}: init {}, bs {}, lr {}, m {}, {} epochs, seed {}",
                topology,
                r.config.scheme.family,
                r.config.scheme.dist,
                r.config.hyperparams.batch_size,
                r.config.hyperparams.learning_rate,
                r.config.hyperparams.momentum,
                r.config.epochs,
                r.config.seed
            ))
            .collect::<Vec<_>>()
            .join("\n")
    );
}

/// Text report for a suite: the tables for every successful cell, then a
/// line per failed cell.
pub fn render_suite_text(cells: &[SuiteCell]) -> String {
    let results: Vec<ExperimentResult> = cells.iter().filter_map(|c| c.result.clone()).collect();
    let mut out = render_text(&results);
    for c in cells.iter().filter(|c| c.error.is_some()) {
        let _ = writeln!(
            out,
            "{}+{} (seed {}) FAILED: {}",
            c.topology,
            c.family,
            c.seed,
            c.error.as_deref().unwrap_or_default()
        );
    }
    out
}

/// One row per class per configuration, full precision.
pub fn render_csv(results: &[ExperimentResult]) -> String {
    let mut out = String::from("topology,init,dist,seed,class,precision,recall,f1,support\n");
    for r in results {
        for label in Label::ALL {
            let m = r.holdout.class(label);
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                r.config.topology.depth(),
                r.config.scheme.family.name().to_lowercase(),
                r.config.scheme.dist,
                r.config.seed,
                label,
                m.precision,
                m.recall,
                m.f1,
                m.support
            );
        }
    }
    out
}

/// Pretty JSON with shortest round-trip float formatting.
pub fn render_json<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| crate::Error::invalid(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

/// Text table, CSV, and JSON for a set of results.
pub struct RenderedReport {
    pub text: String,
    pub csv: String,
    pub json: String,
}

pub fn render_report(results: &[ExperimentResult]) -> Result<RenderedReport> {
    Ok(RenderedReport {
        text: render_text(results),
        csv: render_csv(results),
        json: render_json(results)?,
    })
}
