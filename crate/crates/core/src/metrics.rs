//! Linear full-history baseline and per-round token reports.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::session::{run_session, Mode, SessionScript};
use crate::synth::{PromptTranscript, Turn};

/// Baseline prompt: every prior turn verbatim, then the current user turn.
pub fn baseline_prompt(history: &[Turn], user: &Turn) -> PromptTranscript {
    PromptTranscript::from_turns(history.iter().cloned().chain(std::iter::once(user.clone())))
}

pub const CSV_HEADER: [&str; 7] = [
    "round",
    "prompt_baseline",
    "prompt_tet",
    "completion_baseline",
    "completion_tet",
    "total_baseline",
    "total_tet",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct TokenRow {
    pub round: usize,
    pub prompt_baseline: usize,
    pub prompt_tet: usize,
    pub completion_baseline: usize,
    pub completion_tet: usize,
    pub total_baseline: usize,
    pub total_tet: usize,
}

impl TokenRow {
    pub fn new(round: usize, prompt: (usize, usize), completion: (usize, usize)) -> Self {
        TokenRow {
            round,
            prompt_baseline: prompt.0,
            prompt_tet: prompt.1,
            completion_baseline: completion.0,
            completion_tet: completion.1,
            total_baseline: prompt.0 + completion.0,
            total_tet: prompt.1 + completion.1,
        }
    }

    /// Baseline total minus TET total, saturating at the `i64` range.
    pub fn saved(&self) -> i64 {
        let diff = self.total_baseline as i128 - self.total_tet as i128;
        diff.clamp(i64::MIN.into(), i64::MAX.into()) as i64
    }

    fn columns(&self) -> [usize; 6] {
        [
            self.prompt_baseline,
            self.prompt_tet,
            self.completion_baseline,
            self.completion_tet,
            self.total_baseline,
            self.total_tet,
        ]
    }

    fn is_consistent(&self) -> bool {
        self.total_baseline == self.prompt_baseline + self.completion_baseline
            && self.total_tet == self.prompt_tet + self.completion_tet
    }
}

/// Column sums of a report. `round` is unused.
pub type TokenTotals = TokenRow;

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct TokenReport {
    rows: Vec<TokenRow>,
}

impl TokenReport {
    pub fn new(rows: Vec<TokenRow>) -> Result<Self> {
        for (i, row) in rows.iter().enumerate() {
            if !row.is_consistent() {
                return Err(Error::InvalidArgument(format!(
                    "row {} totals do not equal prompt + completion",
                    i + 1
                )));
            }
        }
        Ok(TokenReport { rows })
    }

    pub fn rows(&self) -> &[TokenRow] {
        &self.rows
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn totals(&self) -> TokenTotals {
        let mut t = TokenRow::default();
        for r in &self.rows {
            t.prompt_baseline += r.prompt_baseline;
            t.prompt_tet += r.prompt_tet;
            t.completion_baseline += r.completion_baseline;
            t.completion_tet += r.completion_tet;
            t.total_baseline += r.total_baseline;
            t.total_tet += r.total_tet;
        }
        t
    }

    pub fn saved(&self) -> i64 {
        self.totals().saved()
    }

    /// `saved / total_baseline`, or `None` when the baseline total is zero.
    pub fn saved_pct(&self) -> Option<f64> {
        let base = self.totals().total_baseline;
        (base > 0).then(|| self.saved() as f64 / base as f64)
    }

    /// The first `n` rows.
    pub fn first_rounds(&self, n: usize) -> TokenReport {
        TokenReport {
            rows: self.rows.iter().take(n).copied().collect(),
        }
    }

    /// `"174 tokens (19.4%)"`.
    pub fn savings_summary(&self) -> String {
        match self.saved_pct() {
            Some(p) => format!("{} tokens ({:.1}%)", self.saved(), p * 100.0),
            None => format!("{} tokens", self.saved()),
        }
    }

    /// Parses the CSV form written by [`render_table`]. A trailing `total`
    /// row, if present, must equal the column sums.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new().from_reader(text.as_bytes());
        let header = reader.headers().map_err(|e| Error::schema("header", e.to_string()))?;
        if header.iter().ne(CSV_HEADER) {
            return Err(Error::schema("header", format!("expected `{}`", CSV_HEADER.join(","))));
        }
        let mut rows = Vec::new();
        let mut totals: Option<[usize; 6]> = None;
        for (i, record) in reader.records().enumerate() {
            let line = i + 2;
            let record = record.map_err(|e| Error::schema(format!("line {line}"), e.to_string()))?;
            if totals.is_some() {
                return Err(Error::schema(format!("line {line}"), "rows after the totals row"));
            }
            let mut values = [0usize; 6];
            for (slot, field) in values.iter_mut().zip(record.iter().skip(1)) {
                *slot = field
                    .parse()
                    .map_err(|_| Error::schema(format!("line {line}"), format!("`{field}` is not a count")))?;
            }
            if &record[0] == "total" {
                totals = Some(values);
                continue;
            }
            let round = record[0]
                .parse()
                .map_err(|_| Error::schema(format!("line {line}.round"), format!("`{}` is not a round", &record[0])))?;
            let consistent = values[0].checked_add(values[2]) == Some(values[4])
                && values[1].checked_add(values[3]) == Some(values[5]);
            if !consistent {
                return Err(Error::schema(format!("line {line}"), "totals do not equal prompt + completion"));
            }
            rows.push(TokenRow::new(round, (values[0], values[1]), (values[2], values[3])));
        }
        let mut sums = [0usize; 6];
        for row in &rows {
            for (sum, v) in sums.iter_mut().zip(row.columns()) {
                *sum = sum
                    .checked_add(v)
                    .ok_or_else(|| Error::schema(format!("round {}", row.round), "column sum overflows"))?;
            }
        }
        let report = TokenReport { rows };
        if let Some(values) = totals {
            if report.totals().columns() != values {
                return Err(Error::schema("total", "totals row does not equal the column sums"));
            }
        }
        Ok(report)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableFormat {
    Text,
    Csv,
}

impl FromStr for TableFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "text" => Ok(TableFormat::Text),
            "csv" => Ok(TableFormat::Csv),
            other => Err(Error::InvalidArgument(format!("unknown table format `{other}` (expected text or csv)"))),
        }
    }
}

/// Renders a report as an aligned text table or CSV. Both end with a
/// totals row when the report has rows.
pub fn render_table(report: &TokenReport, format: TableFormat) -> String {
    let mut lines: Vec<Vec<String>> = vec![CSV_HEADER.iter().map(|s| s.to_string()).collect()];
    let cells = |label: String, row: &TokenRow| {
        std::iter::once(label)
            .chain(row.columns().iter().map(usize::to_string))
            .collect::<Vec<_>>()
    };
    for row in report.rows() {
        lines.push(cells(row.round.to_string(), row));
    }
    if !report.is_empty() {
        lines.push(cells("total".into(), &report.totals()));
    }

    match format {
        TableFormat::Csv => {
            let mut writer = csv::Writer::from_writer(Vec::new());
            for line in &lines {
                writer.write_record(line).expect("writing to memory");
            }
            String::from_utf8(writer.into_inner().expect("writing to memory")).expect("csv of ascii")
        }
        TableFormat::Text => {
            let widths: Vec<usize> = (0..CSV_HEADER.len())
                .map(|c| lines.iter().map(|l| l[c].len()).max().unwrap_or(0))
                .collect();
            let mut out = String::new();
            for line in &lines {
                let padded: Vec<String> = line
                    .iter()
                    .zip(&widths)
                    .enumerate()
                    .map(|(c, (cell, w))| if c == 0 { format!("{cell:<w$}") } else { format!("{cell:>w$}") })
                    .collect();
                out.push_str(padded.join("  ").trim_end());
                out.push('\n');
            }
            if !report.is_empty() {
                let _ = writeln!(out, "saved: {}", report.savings_summary());
            }
            out
        }
    }
}

/// Per-round series for external plotting: totals per method, their
/// difference and running sums.
pub fn plot_data_csv(report: &TokenReport) -> String {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer
        .write_record(["round", "total_baseline", "total_tet", "saved", "cumulative_baseline", "cumulative_tet"])
        .expect("writing to memory");
    let (mut cum_b, mut cum_t) = (0, 0);
    for row in report.rows() {
        cum_b += row.total_baseline;
        cum_t += row.total_tet;
        writer
            .write_record([
                row.round.to_string(),
                row.total_baseline.to_string(),
                row.total_tet.to_string(),
                row.saved().to_string(),
                cum_b.to_string(),
                cum_t.to_string(),
            ])
            .expect("writing to memory");
    }
    String::from_utf8(writer.into_inner().expect("writing to memory")).expect("csv of ascii")
}

/// Runs a script under both policies with the scripted client and returns
/// the token report.
pub fn compare_session(script: &SessionScript, tokenizer_name: &str) -> Result<TokenReport> {
    let result = run_session(script, Mode::Both, "scripted", tokenizer_name)?;
    Ok(result.report.expect("both modes produce a report"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> TokenReport {
        TokenReport::new(vec![
            TokenRow::new(1, (24, 24), (25, 25)),
            TokenRow::new(2, (62, 63), (18, 19)),
            TokenRow::new(3, (94, 64), (22, 24)),
        ])
        .unwrap()
    }

    #[test]
    fn baseline_prompt_is_history_then_user() {
        let u = Turn::user("hi").unwrap();
        assert_eq!(baseline_prompt(&[], &u).turns(), std::slice::from_ref(&u));
        let history = [Turn::user("a").unwrap(), Turn::assistant("b").unwrap()];
        let t = baseline_prompt(&history, &u);
        assert_eq!(t.render(), "User: a\nAssistant: b\nUser: hi");
    }

    #[test]
    fn report_arithmetic() {
        let r = sample();
        let t = r.totals();
        assert_eq!((t.total_baseline, t.total_tet), (49 + 80 + 116, 49 + 82 + 88));
        assert_eq!(r.saved(), 245 - 219);
        assert_eq!(r.savings_summary(), "26 tokens (10.6%)");
        assert_eq!(TokenReport::default().saved_pct(), None);
        assert_eq!(r.first_rounds(1).saved(), 0);
        let bad = TokenRow {
            total_tet: 1,
            ..TokenRow::new(1, (1, 1), (1, 1))
        };
        assert!(TokenReport::new(vec![bad]).is_err());
    }

    #[test]
    fn csv_layout_and_round_trip() {
        let r = sample();
        let csv = render_table(&r, TableFormat::Csv);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "round,prompt_baseline,prompt_tet,completion_baseline,completion_tet,total_baseline,total_tet");
        assert_eq!(lines[1], "1,24,24,25,25,49,49");
        assert_eq!(lines[4], "total,180,151,65,68,245,219");
        assert_eq!(lines.len(), 5);
        assert_eq!(TokenReport::from_csv(&csv).unwrap(), r);
    }

    #[test]
    fn empty_report_is_header_only() {
        let csv = render_table(&TokenReport::default(), TableFormat::Csv);
        assert_eq!(csv, format!("{}\n", CSV_HEADER.join(",")));
        let text = render_table(&TokenReport::default(), TableFormat::Text);
        assert_eq!(text.lines().count(), 1);
    }

    #[test]
    fn text_table_is_aligned() {
        let text = render_table(&sample(), TableFormat::Text);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 6);
        assert!(lines[4].starts_with("total "));
        assert_eq!(lines[5], "saved: 26 tokens (10.6%)");
        // Right-aligned numeric columns end at the same offset.
        let ends: Vec<usize> = lines[..5].iter().map(|l| l.len()).collect();
        assert!(ends.windows(2).all(|w| w[0] == w[1]), "{text}");
    }

    #[test]
    fn unknown_format_is_rejected() {
        assert!(matches!("xml".parse::<TableFormat>(), Err(Error::InvalidArgument(_))));
        assert_eq!("csv".parse::<TableFormat>().unwrap(), TableFormat::Csv);
    }

    #[test]
    fn csv_parse_errors() {
        assert!(TokenReport::from_csv("a,b\n").unwrap_err().is_schema());
        let head = CSV_HEADER.join(",");
        assert!(TokenReport::from_csv(&format!("{head}\n1,1,1,1,1,3,2\n")).unwrap_err().is_schema());
        assert!(TokenReport::from_csv(&format!("{head}\n1,1,1,1,1,2,2\ntotal,9,9,9,9,18,18\n"))
            .unwrap_err()
            .is_schema());
        assert!(TokenReport::from_csv(&format!("{head}\nx,1,1,1,1,2,2\n")).unwrap_err().is_schema());
        assert!(TokenReport::from_csv(&format!("{head}\n1,1,1\n")).unwrap_err().is_schema());
        let max = usize::MAX;
        assert!(TokenReport::from_csv(&format!("{head}\n1,{max},0,1,0,0,0\n")).unwrap_err().is_schema());
        assert!(TokenReport::from_csv(&format!("{head}\n1,{max},0,0,0,{max},0\n2,1,0,0,0,1,0\n"))
            .unwrap_err()
            .is_schema());
    }

    #[test]
    fn plot_data_accumulates() {
        let csv = plot_data_csv(&sample());
        let last = csv.lines().last().unwrap();
        assert_eq!(last, "3,116,88,28,245,219");
    }
}
