//! Run reports: a human-readable markdown view and a machine CSV view of the
//! same rows. All floats are printed with Rust's shortest-round-trip
//! formatting, so re-parsing a CSV reproduces every value bit-exactly.

use ofdma_loss::moments::MomentPair;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ReportRow {
    pub alpha: f64,
    pub n0: f64,
    pub p_sup: f64,
    /// Exact P(total > n0).
    pub p_exact_gt: Option<f64>,
    /// Exact P(total >= n0).
    pub p_exact_ge: Option<f64>,
    pub p_hat: Option<f64>,
    pub ci_low: Option<f64>,
    pub ci_high: Option<f64>,
    pub n_reps: Option<u64>,
    pub seed: Option<u64>,
    /// log10(p_sup / p_loss); absent when the loss estimate is zero.
    pub delta: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub title: String,
    pub scenario_echo: Vec<(String, String)>,
    pub class_masses: Vec<f64>,
    pub moments: MomentPair,
    pub n_max: u32,
    pub rows: Vec<ReportRow>,
    pub provenance: Vec<(String, String)>,
    pub notes: Vec<String>,
}

const CSV_HEADER: &str =
    "alpha,n0,p_sup,p_exact_gt,p_exact_ge,p_hat,ci_low,ci_high,n_reps,seed,delta";

fn opt_f64(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn opt_u64(v: Option<u64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl RunReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{},{}\n",
                r.alpha,
                r.n0,
                r.p_sup,
                opt_f64(r.p_exact_gt),
                opt_f64(r.p_exact_ge),
                opt_f64(r.p_hat),
                opt_f64(r.ci_low),
                opt_f64(r.ci_high),
                opt_u64(r.n_reps),
                opt_u64(r.seed),
                opt_f64(r.delta),
            ));
        }
        out
    }

    /// Inverse of `to_csv`, for round-trip verification and downstream use.
    #[cfg_attr(not(test), allow(dead_code))]
    pub fn rows_from_csv(text: &str) -> Result<Vec<ReportRow>, String> {
        let mut lines = text.lines();
        match lines.next() {
            Some(h) if h == CSV_HEADER => {}
            other => return Err(format!("unexpected header {other:?}")),
        }
        let f = |tok: &str| -> Result<Option<f64>, String> {
            if tok.is_empty() {
                Ok(None)
            } else {
                tok.parse().map(Some).map_err(|e| format!("bad float `{tok}`: {e}"))
            }
        };
        let u = |tok: &str| -> Result<Option<u64>, String> {
            if tok.is_empty() {
                Ok(None)
            } else {
                tok.parse().map(Some).map_err(|e| format!("bad integer `{tok}`: {e}"))
            }
        };
        let mut rows = Vec::new();
        for line in lines.filter(|l| !l.is_empty()) {
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() != 11 {
                return Err(format!("expected 11 columns, got {}", cols.len()));
            }
            rows.push(ReportRow {
                alpha: f(cols[0])?.ok_or("alpha is required")?,
                n0: f(cols[1])?.ok_or("n0 is required")?,
                p_sup: f(cols[2])?.ok_or("p_sup is required")?,
                p_exact_gt: f(cols[3])?,
                p_exact_ge: f(cols[4])?,
                p_hat: f(cols[5])?,
                ci_low: f(cols[6])?,
                ci_high: f(cols[7])?,
                n_reps: u(cols[8])?,
                seed: u(cols[9])?,
                delta: f(cols[10])?,
            });
        }
        Ok(rows)
    }

    pub fn to_markdown(&self) -> String {
        let mut out = format!("# {}\n\n", self.title);
        out.push_str("## Scenario\n\n");
        for (k, v) in &self.scenario_echo {
            out.push_str(&format!("- {k}: {v}\n"));
        }
        out.push_str(&format!(
            "\n## Demand decomposition\n\nn_max = {}; class masses = [{}]\n\nm = {}, v = {}\n\n",
            self.n_max,
            self.class_masses
                .iter()
                .map(|l| format!("{l:.6}"))
                .collect::<Vec<_>>()
                .join(", "),
            self.moments.m,
            self.moments.v,
        ));
        out.push_str("## Results\n\n");
        out.push_str("| alpha | N0 | P_sup | P_exact(>) | P_exact(>=) | P_hat | 99% CI | delta |\n");
        out.push_str("|---|---|---|---|---|---|---|---|\n");
        for r in &self.rows {
            let ci = match (r.ci_low, r.ci_high) {
                (Some(lo), Some(hi)) => format!("[{lo:.3e}, {hi:.3e}]"),
                _ => String::new(),
            };
            out.push_str(&format!(
                "| {} | {} | {:.6e} | {} | {} | {} | {} | {} |\n",
                r.alpha,
                r.n0,
                r.p_sup,
                r.p_exact_gt.map(|p| format!("{p:.6e}")).unwrap_or_default(),
                r.p_exact_ge.map(|p| format!("{p:.6e}")).unwrap_or_default(),
                r.p_hat.map(|p| format!("{p:.6e}")).unwrap_or_default(),
                ci,
                r.delta.map(|d| format!("{d:.3}")).unwrap_or_default(),
            ));
        }
        if !self.notes.is_empty() {
            out.push_str("\n## Notes\n\n");
            for n in &self.notes {
                out.push_str(&format!("- {n}\n"));
            }
        }
        out.push_str("\n## Provenance\n\n");
        for (k, v) in &self.provenance {
            out.push_str(&format!("- {k}: {v}\n"));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> RunReport {
        RunReport {
            title: "test".into(),
            scenario_echo: vec![("mode".into(), "deterministic".into())],
            class_masses: vec![1.5, 0.25],
            moments: MomentPair { m: 2.0, v: 2.5 },
            n_max: 2,
            rows: vec![
                ReportRow {
                    alpha: 1.5,
                    n0: 52.459587999999996,
                    p_sup: 0.19324567890123457,
                    p_exact_gt: Some(1.234e-2),
                    p_exact_ge: Some(1.4e-2),
                    delta: Some(1.19),
                    ..Default::default()
                },
                ReportRow {
                    alpha: 2.0,
                    n0: 70.0,
                    p_sup: 3.3e-3,
                    p_hat: Some(2.97e-4),
                    ci_low: Some(2.5e-4),
                    ci_high: Some(3.5e-4),
                    n_reps: Some(1_000_000),
                    seed: Some(42),
                    ..Default::default()
                },
            ],
            provenance: vec![("seed".into(), "42".into())],
            notes: vec!["note".into()],
        }
    }

    #[test]
    fn csv_round_trips_bit_exactly() {
        let report = sample();
        let csv = report.to_csv();
        let rows = RunReport::rows_from_csv(&csv).unwrap();
        assert_eq!(rows, report.rows);
        // and the re-serialization is byte-identical
        let again = RunReport { rows, ..report.clone() };
        assert_eq!(again.to_csv(), csv);
    }

    #[test]
    fn csv_rejects_garbage() {
        assert!(RunReport::rows_from_csv("nope\n1,2,3").is_err());
        let bad = format!("{CSV_HEADER}\n1,2\n");
        assert!(RunReport::rows_from_csv(&bad).is_err());
        let bad = format!("{CSV_HEADER}\nx,2,3,,,,,,,,\n");
        assert!(RunReport::rows_from_csv(&bad).is_err());
    }

    #[test]
    fn markdown_contains_rows_and_provenance() {
        let md = sample().to_markdown();
        assert!(md.contains("| 1.5 |"));
        assert!(md.contains("seed: 42"));
        assert!(md.contains("n_max = 2"));
    }
}
