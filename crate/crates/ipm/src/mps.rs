//! Reader for the MPS subset NAME, ROWS, COLUMNS, RHS, BOUNDS, ENDATA.
//!
//! Fields are split on whitespace, so both fixed-column and free-format files
//! are accepted as long as names contain no blanks. Lines starting with `*`
//! are comments. Names are case sensitive.

use indexmap::IndexMap;
use log::warn;
use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RowSense {
    E,
    L,
    G,
    N,
}

/// A minimization model as written in the file.
#[derive(Clone, Debug, PartialEq)]
pub struct LpModel {
    pub name: String,
    /// Name of the objective row.
    pub objective: String,
    /// Constraint rows in declaration order. The objective row is not listed.
    pub rows: Vec<(String, RowSense)>,
    /// Columns in first-appearance order with their constraint coefficients.
    pub columns: Vec<(String, Vec<(String, f64)>)>,
    /// Objective coefficient per column, zero when absent.
    pub cost: Vec<f64>,
    /// Right-hand sides; rows not present here are zero.
    pub rhs: IndexMap<String, f64>,
    /// Objective constant, the negated RHS entry of the objective row.
    pub objective_constant: f64,
    /// `(lower, upper)` for every column.
    pub bounds: IndexMap<String, (f64, f64)>,
}

#[derive(Debug, Error, PartialEq)]
pub enum MpsError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: RANGES section is not supported")]
    Ranges { line: usize },
    #[error("line {line}: unknown section `{name}`")]
    UnknownSection { line: usize, name: String },
    #[error("line {line}: row `{row}` is not declared in ROWS")]
    UndeclaredRow { line: usize, row: String },
    #[error("line {line}: column `{column}` has a second entry for row `{row}`")]
    DuplicateEntry {
        line: usize,
        column: String,
        row: String,
    },
    #[error("no objective (N) row declared")]
    NoObjective,
}

impl MpsError {
    /// Line the error refers to, if any.
    pub fn line(&self) -> Option<usize> {
        match self {
            MpsError::Syntax { line, .. }
            | MpsError::Ranges { line }
            | MpsError::UnknownSection { line, .. }
            | MpsError::UndeclaredRow { line, .. }
            | MpsError::DuplicateEntry { line, .. } => Some(*line),
            MpsError::NoObjective => None,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Section {
    Start,
    Name,
    Rows,
    Columns,
    Rhs,
    Bounds,
    End,
}

enum RowKind {
    Objective,
    Ignored,
    Constraint,
}

struct Parser {
    line: usize,
    section: Section,
    name: String,
    objective: Option<String>,
    rows: Vec<(String, RowSense)>,
    row_kind: IndexMap<String, RowKind>,
    columns: IndexMap<String, (IndexMap<String, f64>, Option<f64>)>,
    rhs: IndexMap<String, f64>,
    objective_constant: f64,
    bounds: IndexMap<String, (f64, f64)>,
    lower_set: Vec<bool>,
}

pub fn parse_mps(text: &str) -> Result<LpModel, MpsError> {
    let mut p = Parser {
        line: 0,
        section: Section::Start,
        name: String::new(),
        objective: None,
        rows: Vec::new(),
        row_kind: IndexMap::new(),
        columns: IndexMap::new(),
        rhs: IndexMap::new(),
        objective_constant: 0.0,
        bounds: IndexMap::new(),
        lower_set: Vec::new(),
    };
    for (idx, raw) in text.lines().enumerate() {
        p.line = idx + 1;
        if raw.starts_with('*') || raw.trim().is_empty() {
            continue;
        }
        if p.section == Section::End {
            return Err(p.syntax("data after ENDATA"));
        }
        let fields: Vec<&str> = raw.split_whitespace().collect();
        if raw.starts_with(|c: char| !c.is_whitespace()) {
            p.header(&fields)?;
        } else {
            p.data(&fields)?;
        }
    }
    p.finish()
}

impl Parser {
    fn syntax(&self, message: impl Into<String>) -> MpsError {
        MpsError::Syntax {
            line: self.line,
            message: message.into(),
        }
    }

    fn number(&self, s: &str) -> Result<f64, MpsError> {
        match s.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => Err(self.syntax(format!("`{s}` is not a finite number"))),
        }
    }

    fn header(&mut self, fields: &[&str]) -> Result<(), MpsError> {
        let line = self.line;
        self.section = match fields[0] {
            "NAME" => {
                self.name = fields[1..].join(" ");
                Section::Name
            }
            "ROWS" => Section::Rows,
            "COLUMNS" => Section::Columns,
            "RHS" => Section::Rhs,
            "BOUNDS" => Section::Bounds,
            "ENDATA" => Section::End,
            "RANGES" => return Err(MpsError::Ranges { line }),
            other => {
                return Err(MpsError::UnknownSection {
                    line,
                    name: other.to_string(),
                })
            }
        };
        Ok(())
    }

    fn data(&mut self, f: &[&str]) -> Result<(), MpsError> {
        match self.section {
            Section::Rows => self.row(f),
            Section::Columns => self.column(f),
            Section::Rhs => self.rhs_entry(f),
            Section::Bounds => self.bound(f),
            Section::Start | Section::Name | Section::End => {
                Err(self.syntax("data line outside a section"))
            }
        }
    }

    fn row(&mut self, f: &[&str]) -> Result<(), MpsError> {
        let [sense, name] = f else {
            return Err(self.syntax("ROWS entries are `sense name`"));
        };
        let sense = match *sense {
            "E" => RowSense::E,
            "L" => RowSense::L,
            "G" => RowSense::G,
            "N" => RowSense::N,
            s => return Err(self.syntax(format!("unknown row sense `{s}`"))),
        };
        if self.row_kind.contains_key(*name) {
            return Err(self.syntax(format!("row `{name}` declared twice")));
        }
        let kind = match (sense, &self.objective) {
            (RowSense::N, None) => {
                self.objective = Some(name.to_string());
                RowKind::Objective
            }
            (RowSense::N, Some(obj)) => {
                warn!(
                    "line {}: ignoring extra objective row `{name}` (using `{obj}`)",
                    self.line
                );
                RowKind::Ignored
            }
            _ => {
                self.rows.push((name.to_string(), sense));
                RowKind::Constraint
            }
        };
        self.row_kind.insert(name.to_string(), kind);
        Ok(())
    }

    fn kind(&self, row: &str) -> Result<&RowKind, MpsError> {
        self.row_kind
            .get(row)
            .ok_or_else(|| MpsError::UndeclaredRow {
                line: self.line,
                row: row.to_string(),
            })
    }

    fn column(&mut self, f: &[&str]) -> Result<(), MpsError> {
        if f.contains(&"'MARKER'") {
            return Err(self.syntax("integer markers are not supported"));
        }
        if f.len() != 3 && f.len() != 5 {
            return Err(self.syntax("COLUMNS entries are `column row value [row value]`"));
        }
        let column = f[0];
        self.columns.entry(column.to_string()).or_default();
        for pair in f[1..].chunks(2) {
            let (row, value) = (pair[0], self.number(pair[1])?);
            let kind = self.kind(row)?;
            let objective = matches!(kind, RowKind::Objective);
            if matches!(kind, RowKind::Ignored) {
                continue;
            }
            let line = self.line;
            let (entries, cost) = self.columns.entry(column.to_string()).or_default();
            let fresh = if objective {
                cost.replace(value).is_none()
            } else {
                entries.insert(row.to_string(), value).is_none()
            };
            if !fresh {
                return Err(MpsError::DuplicateEntry {
                    line,
                    column: column.to_string(),
                    row: row.to_string(),
                });
            }
        }
        Ok(())
    }

    fn rhs_entry(&mut self, f: &[&str]) -> Result<(), MpsError> {
        // An odd field count means a leading set name.
        let pairs = match f.len() {
            2 | 4 => f,
            3 | 5 => &f[1..],
            _ => return Err(self.syntax("RHS entries are `[set] row value [row value]`")),
        };
        for pair in pairs.chunks(2) {
            let value = self.number(pair[1])?;
            match self.kind(pair[0])? {
                RowKind::Objective => self.objective_constant = -value,
                RowKind::Ignored => {}
                RowKind::Constraint => {
                    if self.rhs.insert(pair[0].to_string(), value).is_some() {
                        return Err(self.syntax(format!("second RHS value for row `{}`", pair[0])));
                    }
                }
            }
        }
        Ok(())
    }

    fn bound(&mut self, f: &[&str]) -> Result<(), MpsError> {
        let kind = f[0];
        let takes_value = matches!(kind, "LO" | "UP" | "FX");
        if !takes_value && !matches!(kind, "FR" | "MI" | "PL") {
            return Err(self.syntax(format!("unsupported bound type `{kind}`")));
        }
        let (column, value) = match (takes_value, f.len()) {
            (true, 3) => (f[1], Some(f[2])),
            (true, 4) => (f[2], Some(f[3])),
            (false, 2) => (f[1], None),
            (false, 3) => (f[2], None),
            _ => return Err(self.syntax(format!("malformed {kind} bound"))),
        };
        let value = value.map(|v| self.number(v)).transpose()?;
        let Some(idx) = self.columns.get_index_of(column) else {
            return Err(self.syntax(format!("bound on unknown column `{column}`")));
        };
        let line = self.line;
        self.lower_set.resize(self.columns.len(), false);
        let entry = self
            .bounds
            .entry(column.to_string())
            .or_insert((0.0, f64::INFINITY));
        let lower_set = &mut self.lower_set[idx];
        match (kind, value) {
            ("LO", Some(v)) => {
                entry.0 = v;
                *lower_set = true;
            }
            ("UP", Some(v)) => {
                if v < 0.0 && !*lower_set && entry.0 == 0.0 {
                    warn!("line {line}: negative upper bound on `{column}` with default lower bound; lower set to -inf");
                    entry.0 = f64::NEG_INFINITY;
                }
                entry.1 = v;
            }
            ("FX", Some(v)) => {
                *entry = (v, v);
                *lower_set = true;
            }
            ("FR", None) => *entry = (f64::NEG_INFINITY, f64::INFINITY),
            ("MI", None) => {
                entry.0 = f64::NEG_INFINITY;
                *lower_set = true;
            }
            ("PL", None) => entry.1 = f64::INFINITY,
            _ => unreachable!("bound kinds and arities checked above"),
        }
        Ok(())
    }

    fn finish(self) -> Result<LpModel, MpsError> {
        let objective = self.objective.ok_or(MpsError::NoObjective)?;
        let mut bounds = self.bounds;
        let mut columns = Vec::with_capacity(self.columns.len());
        let mut cost = Vec::with_capacity(self.columns.len());
        let mut ordered = IndexMap::with_capacity(self.columns.len());
        for (name, (entries, c)) in self.columns {
            let b = bounds.swap_remove(&name).unwrap_or((0.0, f64::INFINITY));
            ordered.insert(name.clone(), b);
            columns.push((name, entries.into_iter().collect()));
            cost.push(c.unwrap_or(0.0));
        }
        Ok(LpModel {
            name: self.name,
            objective,
            rows: self.rows,
            columns,
            cost,
            rhs: self.rhs,
            objective_constant: self.objective_constant,
            bounds: ordered,
        })
    }
}

impl LpModel {
    /// Objective value at `values` (one per column), constant included.
    pub fn objective_value(&self, values: &IndexMap<String, f64>) -> f64 {
        self.columns
            .iter()
            .zip(&self.cost)
            .map(|((name, _), c)| c * values.get(name).copied().unwrap_or(0.0))
            .sum::<f64>()
            + self.objective_constant
    }

    /// Largest violation of any row or bound at `values`.
    pub fn max_violation(&self, values: &IndexMap<String, f64>) -> f64 {
        let mut activity: IndexMap<&str, f64> =
            self.rows.iter().map(|(r, _)| (r.as_str(), 0.0)).collect();
        let mut worst = 0.0f64;
        for (name, entries) in &self.columns {
            let x = values.get(name).copied().unwrap_or(f64::NAN);
            let (lo, up) = self.bounds[name];
            worst = worst.max(lo - x).max(x - up);
            if x.is_nan() {
                worst = f64::INFINITY;
            }
            for (row, a) in entries {
                *activity
                    .get_mut(row.as_str())
                    .expect("rows validated while parsing") += a * x;
            }
        }
        for (row, sense) in &self.rows {
            let lhs = activity[row.as_str()];
            let rhs = self.rhs.get(row).copied().unwrap_or(0.0);
            let v = match sense {
                RowSense::E => (lhs - rhs).abs(),
                RowSense::L => lhs - rhs,
                RowSense::G => rhs - lhs,
                RowSense::N => 0.0,
            };
            worst = worst.max(v);
        }
        worst
    }
}
