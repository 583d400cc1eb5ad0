use std::fmt;
use std::io::Write;
use std::time::Duration;

/// Largest number of failures kept verbatim in a report; the total is
/// always counted.
pub const MAX_LISTED_FAILURES: usize = 1000;

/// One violated relation.
#[derive(Debug, Clone, PartialEq)]
pub struct Failure {
    pub case: usize,
    pub input: String,
    pub expected: String,
    pub observed: String,
}

/// A CSV cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Bool(bool),
    Text(String),
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Int(v) => write!(f, "{v}"),
            // 17 significant digits.
            Cell::Float(v) => write!(f, "{v:.16e}"),
            Cell::Bool(v) => write!(f, "{v}"),
            Cell::Text(s) => f.write_str(s),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}
impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}
impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}
impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}
impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

/// A named table serialized as CSV with a leading `schema=1` line.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut out = out;
        out.write_all(b"schema=1\n")?;
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|c| c.to_string()))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv output is utf-8")
    }
}

/// Outcome of one verification suite.
#[derive(Debug, Clone)]
pub struct SuiteReport {
    pub name: String,
    pub cases: usize,
    /// Total number of violations, including those beyond the listed ones.
    pub failure_count: usize,
    /// The first violations by case index.
    pub failures: Vec<Failure>,
    /// Named measured quantities, in insertion order.
    pub measurements: Vec<(String, f64)>,
    pub notes: Vec<String>,
    pub table: Table,
    /// Additional tables written next to the main one as `<suite>_<name>.csv`.
    pub extra_tables: Vec<(String, Table)>,
    pub wall_time: Duration,
}

impl SuiteReport {
    pub fn new(name: &str, table: Table) -> Self {
        Self {
            name: name.to_string(),
            cases: 0,
            failure_count: 0,
            failures: Vec::new(),
            measurements: Vec::new(),
            notes: Vec::new(),
            table,
            extra_tables: Vec::new(),
            wall_time: Duration::ZERO,
        }
    }

    pub fn passed(&self) -> bool {
        self.failure_count == 0
    }

    pub fn fail(&mut self, case: usize, input: impl Into<String>, expected: impl Into<String>, observed: impl Into<String>) {
        self.failure_count += 1;
        self.failures.push(Failure {
            case,
            input: input.into(),
            expected: expected.into(),
            observed: observed.into(),
        });
        if self.failures.len() > 4 * MAX_LISTED_FAILURES {
            self.trim_failures();
        }
    }

    fn trim_failures(&mut self) {
        self.failures.sort_by_key(|f| f.case);
        self.failures.truncate(MAX_LISTED_FAILURES);
    }

    pub fn measure(&mut self, name: &str, value: f64) {
        self.measurements.push((name.to_string(), value));
    }

    pub fn measurement(&self, name: &str) -> Option<f64> {
        self.measurements.iter().find(|(n, _)| n == name).map(|&(_, v)| v)
    }

    pub fn note(&mut self, text: impl Into<String>) {
        self.notes.push(text.into());
    }

    /// Sorts failures by case index and caps the listed ones.
    pub fn finish(mut self, wall_time: Duration) -> Self {
        self.trim_failures();
        self.wall_time = wall_time;
        self
    }

    /// `PASS <name>: ...` or `FAIL <name>: ...`.
    pub fn summary_line(&self) -> String {
        let status = if self.passed() { "PASS" } else { "FAIL" };
        let mut line = format!(
            "{status} {}: {} cases, {} failures",
            self.name, self.cases, self.failure_count
        );
        if let Some(f) = self.failures.first() {
            line.push_str(&format!(
                "; first: case {} [{}] expected {} observed {}",
                f.case, f.input, f.expected, f.observed
            ));
        }
        line
    }

    /// Measurements as a two-column table.
    pub fn measurement_table(&self) -> Table {
        let mut t = Table::new(&["quantity", "value"]);
        for (n, v) in &self.measurements {
            t.push(vec![n.as_str().into(), (*v).into()]);
        }
        t
    }
}
