//! Result emission. The CSV schema is pinned: column set, order and header
//! spelling below are a compatibility contract for downstream tooling.

use crate::metrics::RunMetrics;

pub const CSV_HEADER: &str = "scenario,protocol,density,seed,zor_snapshot_count,\
delivered_count,pdr_pct,pdr_snapshot_pct,mean_delay_s,p50_delay_s,p95_delay_s,\
tx_count,network_bytes_tx,overhead_ratio,collisions";

fn num(x: f64) -> String {
    // shortest round-trip decimal
    format!("{x}")
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| format!("{v}")).unwrap_or_default()
}

/// One row, column order matching [`CSV_HEADER`], no trailing newline.
/// Absent values (no deliveries) are empty cells.
pub fn csv_row(m: &RunMetrics) -> String {
    [
        m.scenario.clone(),
        m.protocol.clone(),
        num(m.density),
        m.seed.to_string(),
        m.zor_snapshot_count.to_string(),
        m.delivered_count.to_string(),
        num(m.pdr_pct),
        num(m.pdr_snapshot_pct),
        opt(m.mean_delay_s),
        opt(m.p50_delay_s),
        opt(m.p95_delay_s),
        m.tx_count.to_string(),
        m.network_bytes_tx.to_string(),
        num(m.overhead_ratio),
        m.collisions.to_string(),
    ]
    .join(",")
}

/// Header plus one line per row, newline-terminated.
pub fn to_csv(rows: &[RunMetrics]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for row in rows {
        out.push_str(&csv_row(row));
        out.push('\n');
    }
    out
}

/// JSON array of full records (supplementary columns included).
pub fn to_json(rows: &[RunMetrics]) -> String {
    let mut out = serde_json::to_string_pretty(rows).expect("metrics serialize");
    out.push('\n');
    out
}
