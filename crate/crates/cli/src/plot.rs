//! Plain columnar data for external plotting tools.

use std::fmt::Write as _;

use serde_json::Value;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PlotKind {
    /// cost per `(n, strategy)` from a `pebble-suite` report
    Cc,
    /// one bar per game report
    Advantage,
}

impl PlotKind {
    fn report_kind(self) -> &'static str {
        match self {
            PlotKind::Cc => "pebble-suite",
            PlotKind::Advantage => "game-run",
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum PlotError {
    #[error("a {want} plot needs a {need} report, got {got:?}")]
    KindMismatch { want: &'static str, need: &'static str, got: String },
    #[error("malformed report: {0}")]
    Malformed(String),
}

const CC_HEADER: &str = "n\tk\tnodes\tstrategy\tcc\trounds\tmax_pebbles";
const ADV_HEADER: &str = "attacker\tevaluator\tmode\ttrials\twins\tadvantage\tci_low\tci_high";

fn num(v: &Value, key: &str) -> Result<String, PlotError> {
    v.get(key).map(|x| x.to_string()).ok_or_else(|| PlotError::Malformed(format!("missing {key}")))
}

fn text(v: &Value, key: &str) -> Result<String, PlotError> {
    v.get(key).and_then(Value::as_str).map(str::to_string).ok_or_else(|| PlotError::Malformed(format!("missing {key}")))
}

pub fn plot_emit(report: &Value, kind: PlotKind) -> Result<String, PlotError> {
    let got = report.get("kind").and_then(Value::as_str).unwrap_or("").to_string();
    if got != kind.report_kind() {
        let want = match kind {
            PlotKind::Cc => "cc",
            PlotKind::Advantage => "advantage",
        };
        return Err(PlotError::KindMismatch { want, need: kind.report_kind(), got });
    }
    let data = report.get("data").ok_or_else(|| PlotError::Malformed("missing data".into()))?;
    let mut out = String::new();
    match kind {
        PlotKind::Cc => {
            out.push_str(CC_HEADER);
            out.push('\n');
            let rows = data.get("rows").and_then(Value::as_array).cloned().unwrap_or_default();
            let mut keyed = Vec::with_capacity(rows.len());
            for r in &rows {
                let n = r.get("n").and_then(Value::as_u64).ok_or_else(|| PlotError::Malformed("row without n".into()))?;
                keyed.push((n, text(r, "strategy")?, r));
            }
            keyed.sort_by(|a, b| (a.0, &a.1).cmp(&(b.0, &b.1)));
            for (n, strategy, r) in keyed {
                let _ = writeln!(
                    out,
                    "{n}\t{}\t{}\t{strategy}\t{}\t{}\t{}",
                    num(r, "k")?,
                    num(r, "nodes")?,
                    num(r, "cc")?,
                    num(r, "rounds")?,
                    num(r, "max_pebbles")?
                );
            }
        }
        PlotKind::Advantage => {
            out.push_str(ADV_HEADER);
            out.push('\n');
            let est = data.get("estimate").ok_or_else(|| PlotError::Malformed("missing estimate".into()))?;
            let ci = est.get("ci").and_then(Value::as_array).ok_or_else(|| PlotError::Malformed("missing ci".into()))?;
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
                text(data, "attacker")?,
                text(data, "evaluator")?,
                text(data, "mode")?,
                num(data, "trials")?,
                num(est, "wins")?,
                num(est, "advantage")?,
                ci[0],
                ci[1]
            );
        }
    }
    Ok(out)
}

/// Parses a `Cc` table back into `(n, strategy, cc)` rows.
pub fn parse_cc_table(text: &str) -> Vec<(u64, String, u64)> {
    text.lines()
        .skip(1)
        .filter_map(|l| {
            let f: Vec<&str> = l.split('\t').collect();
            Some((f.first()?.parse().ok()?, f.get(3)?.to_string(), f.get(4)?.parse().ok()?))
        })
        .collect()
}
