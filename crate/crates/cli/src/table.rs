//! Plain-text report rendering with the benchmark's six metric columns.

use hunl_core::aivat::AivatReport;
use hunl_core::protocol::LeaderboardEntry;

/// The six metric columns of a match report, in order.
pub const COLUMNS: [&str; 6] = [
    "AIVAT Score",
    "AIVAT Stddev",
    "Chips Won",
    "All Hands Chips",
    "Chance Correction",
    "Action Correction",
];

fn metric_row(report: &AivatReport) -> [f64; 6] {
    [
        report.aivat_score,
        report.aivat_stddev,
        report.raw_winrate,
        report.all_hands_chips,
        report.chance_correction,
        report.action_correction,
    ]
}

/// Render one row per agent, all rates in bb/100. The footer restates the
/// score identity and the largest residual across the rows (which is zero
/// up to float rounding for every report this platform produces).
pub fn report_table(rows: &[(&str, &AivatReport)]) -> String {
    let name_width = rows
        .iter()
        .map(|(name, _)| name.len())
        .chain(["Agent".len()])
        .max()
        .unwrap_or(5);
    let widths: Vec<usize> = COLUMNS.iter().map(|c| c.len().max(10)).collect();

    let mut out = String::new();
    out.push_str(&format!("{:<name_width$}", "Agent"));
    for (column, width) in COLUMNS.iter().zip(&widths) {
        out.push_str(&format!("  {column:>width$}"));
    }
    out.push('\n');

    let mut max_residual = 0.0f64;
    for (name, report) in rows {
        out.push_str(&format!("{name:<name_width$}"));
        for (value, width) in metric_row(report).iter().zip(&widths) {
            out.push_str(&format!("  {value:>width$.2}"));
        }
        out.push('\n');
        let residual = report.aivat_score
            - (report.all_hands_chips - report.chance_correction - report.action_correction);
        max_residual = max_residual.max(residual.abs());
    }
    out.push_str(&format!(
        "(bb/100; AIVAT Score = All Hands Chips - Chance Correction - Action Correction, \
         max residual {max_residual:.2e})\n"
    ));
    out
}

/// Standings as the service ranks them (lower bound of the 95% interval on
/// the adjusted score).
pub fn leaderboard_table(entries: &[LeaderboardEntry]) -> String {
    let name_width = entries
        .iter()
        .map(|e| e.agent_name.len())
        .chain(["Agent".len()])
        .max()
        .unwrap_or(5);
    let mut out = format!(
        "{:>3}  {:<name_width$}  {:>12}  {:>12}  {:>8}  {:>10}\n",
        "#", "Agent", "AIVAT Score", "AIVAT Stddev", "Hands", "Rank Key"
    );
    for (i, entry) in entries.iter().enumerate() {
        out.push_str(&format!(
            "{:>3}  {:<name_width$}  {:>12.2}  {:>12.2}  {:>8}  {:>10.2}\n",
            i + 1,
            entry.agent_name,
            entry.report.aivat_score,
            entry.report.aivat_stddev,
            entry.report.hands_played,
            entry.rank_key,
        ));
    }
    out
}
