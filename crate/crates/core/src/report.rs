//! TSV reports: one row per checked quantity.

use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Source {
    Paper,
    Derived,
    Trivial,
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Source::Paper => "PAPER",
            Source::Derived => "DERIVED",
            Source::Trivial => "TRIVIAL",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    /// Recorded, not asserted.
    Info,
    Skip,
}

impl Verdict {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::Info => "INFO",
            Verdict::Skip => "SKIP",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReportRow {
    pub quantity: String,
    pub computed: String,
    pub expected: String,
    pub source: Source,
    pub verdict: Verdict,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Report {
    rows: Vec<ReportRow>,
}

pub const TSV_HEADER: &str = "quantity\tcomputed\texpected\tsource\tverdict";

fn clean(s: &str) -> String {
    s.replace(['\t', '\n'], " ")
}

impl Report {
    pub fn new() -> Self {
        Report::default()
    }

    pub fn push(
        &mut self,
        quantity: impl Into<String>,
        computed: impl ToString,
        expected: impl ToString,
        source: Source,
        verdict: Verdict,
    ) {
        self.rows.push(ReportRow {
            quantity: quantity.into(),
            computed: computed.to_string(),
            expected: expected.to_string(),
            source,
            verdict,
        });
    }

    /// Row whose verdict is PASS iff `ok`.
    pub fn check(
        &mut self,
        quantity: impl Into<String>,
        computed: impl ToString,
        expected: impl ToString,
        source: Source,
        ok: bool,
    ) {
        self.push(quantity, computed, expected, source, Verdict::from_bool(ok));
    }

    pub fn extend(&mut self, other: Report) {
        self.rows.extend(other.rows);
    }

    pub fn rows(&self) -> &[ReportRow] {
        &self.rows
    }

    pub fn failures(&self) -> impl Iterator<Item = &ReportRow> {
        self.rows.iter().filter(|r| r.verdict == Verdict::Fail)
    }

    pub fn passed(&self) -> bool {
        self.failures().next().is_none()
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::from(TSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\t{}\n",
                clean(&r.quantity),
                clean(&r.computed),
                clean(&r.expected),
                r.source,
                r.verdict
            ));
        }
        out
    }
}
