//! MPS reader (fixed or free format; names may not contain spaces).

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::lp::{Constraint, GeneralLp, Relation, Sense};

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Section {
    None,
    Name,
    ObjSense,
    Rows,
    Columns,
    Rhs,
    Ranges,
    Bounds,
}

const UNSUPPORTED: &[&str] = &[
    "SOS", "QUADOBJ", "QMATRIX", "QSECTION", "QCMATRIX", "CSECTION", "INDICATORS", "LAZYCONS", "USERCUTS", "BRANCH",
    "GENERAL", "GENERALS", "PWLOBJ",
];

#[derive(Clone, Copy, PartialEq, Eq)]
enum RowType {
    Free,
    Le,
    Ge,
    Eq,
}

struct RowInfo {
    name: String,
    kind: RowType,
    rhs: f64,
    range: Option<f64>,
    coeffs: HashMap<usize, f64>,
}

struct Token<'a> {
    text: &'a str,
    column: usize,
}

fn tokens(line: &str) -> Vec<Token<'_>> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, ch) in line.char_indices() {
        if ch.is_whitespace() {
            if let Some(s) = start.take() {
                out.push(Token {
                    text: &line[s..i],
                    column: s + 1,
                });
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        out.push(Token {
            text: &line[s..],
            column: s + 1,
        });
    }
    out
}

fn perr(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        column,
        message: message.into(),
    }
}

fn number(t: &Token, line: usize) -> Result<f64> {
    t.text
        .parse::<f64>()
        .map_err(|_| perr(line, t.column, format!("expected a number, found '{}'", t.text)))
}

struct Reader {
    name: String,
    sense: Sense,
    rows: Vec<RowInfo>,
    row_index: HashMap<String, usize>,
    objective_row: Option<String>,
    objective: HashMap<usize, f64>,
    objective_constant: f64,
    cols: Vec<String>,
    col_index: HashMap<String, usize>,
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl Reader {
    fn new() -> Self {
        Self {
            name: String::new(),
            sense: Sense::Minimize,
            rows: Vec::new(),
            row_index: HashMap::new(),
            objective_row: None,
            objective: HashMap::new(),
            objective_constant: 0.0,
            cols: Vec::new(),
            col_index: HashMap::new(),
            lower: Vec::new(),
            upper: Vec::new(),
        }
    }

    fn sense_token(&mut self, t: &Token, line: usize) -> Result<()> {
        self.sense = match t.text.to_ascii_uppercase().as_str() {
            "MAX" | "MAXIMIZE" => Sense::Maximize,
            "MIN" | "MINIMIZE" => Sense::Minimize,
            _ => return Err(perr(line, t.column, format!("unknown objective sense '{}'", t.text))),
        };
        Ok(())
    }

    fn row(&mut self, toks: &[Token], line: usize) -> Result<()> {
        let [kind, name] = toks else {
            return Err(perr(line, 1, "ROWS entries need a type and a name"));
        };
        let kind_t = match kind.text.to_ascii_uppercase().as_str() {
            "N" => RowType::Free,
            "L" => RowType::Le,
            "G" => RowType::Ge,
            "E" => RowType::Eq,
            _ => return Err(perr(line, kind.column, format!("unknown row type '{}'", kind.text))),
        };
        if kind_t == RowType::Free && self.objective_row.is_none() {
            self.objective_row = Some(name.text.to_string());
            return Ok(());
        }
        if self.row_index.contains_key(name.text) || self.objective_row.as_deref() == Some(name.text) {
            return Err(perr(line, name.column, format!("duplicate row '{}'", name.text)));
        }
        self.row_index.insert(name.text.to_string(), self.rows.len());
        self.rows.push(RowInfo {
            name: name.text.to_string(),
            kind: kind_t,
            rhs: 0.0,
            range: None,
            coeffs: HashMap::new(),
        });
        Ok(())
    }

    fn column(&mut self, toks: &[Token], line: usize) -> Result<()> {
        if toks.iter().any(|t| t.text.eq_ignore_ascii_case("'MARKER'") || t.text.eq_ignore_ascii_case("MARKER")) {
            return Ok(());
        }
        if toks.len() != 3 && toks.len() != 5 {
            return Err(perr(line, 1, "COLUMNS entries need a column and one or two (row, value) pairs"));
        }
        let name = toks[0].text;
        let j = match self.col_index.get(name) {
            Some(&j) => j,
            None => {
                let j = self.cols.len();
                self.cols.push(name.to_string());
                self.col_index.insert(name.to_string(), j);
                self.lower.push(0.0);
                self.upper.push(f64::INFINITY);
                j
            }
        };
        for pair in toks[1..].chunks(2) {
            let v = number(&pair[1], line)?;
            if self.objective_row.as_deref() == Some(pair[0].text) {
                *self.objective.entry(j).or_default() += v;
            } else if let Some(&i) = self.row_index.get(pair[0].text) {
                *self.rows[i].coeffs.entry(j).or_default() += v;
            } else {
                return Err(perr(line, pair[0].column, format!("unknown row '{}'", pair[0].text)));
            }
        }
        Ok(())
    }

    /// RHS and RANGES share a layout: an optional set name, then pairs.
    fn row_values(&mut self, toks: &[Token], line: usize, ranges: bool) -> Result<()> {
        let body = match toks.len() {
            2 | 4 => toks,
            3 | 5 => &toks[1..],
            _ => return Err(perr(line, 1, "expected an optional set name and one or two (row, value) pairs")),
        };
        for pair in body.chunks(2) {
            let v = number(&pair[1], line)?;
            if self.objective_row.as_deref() == Some(pair[0].text) {
                if ranges {
                    return Err(perr(line, pair[0].column, "RANGES entry on the objective row"));
                }
                self.objective_constant = -v;
                continue;
            }
            let i = *self
                .row_index
                .get(pair[0].text)
                .ok_or_else(|| perr(line, pair[0].column, format!("unknown row '{}'", pair[0].text)))?;
            if ranges {
                self.rows[i].range = Some(v);
            } else {
                self.rows[i].rhs = v;
            }
        }
        Ok(())
    }

    fn bound(&mut self, toks: &[Token], line: usize) -> Result<()> {
        let Some(kind) = toks.first() else {
            return Ok(());
        };
        let k = kind.text.to_ascii_uppercase();
        let needs_value = matches!(k.as_str(), "UP" | "LO" | "FX" | "LI" | "UI");
        let valueless = matches!(k.as_str(), "FR" | "MI" | "PL" | "BV");
        if k == "SC" {
            return Err(Error::Unsupported("BOUNDS type SC".into()));
        }
        if !needs_value && !valueless {
            return Err(perr(line, kind.column, format!("unknown bound type '{}'", kind.text)));
        }
        let (col, value) = match (needs_value, toks.len()) {
            (true, 4) => (&toks[2], Some(number(&toks[3], line)?)),
            (true, 3) => (&toks[1], Some(number(&toks[2], line)?)),
            (false, 3) => (&toks[2], None),
            (false, 2) => (&toks[1], None),
            (false, 4) => (&toks[2], None),
            _ => return Err(perr(line, 1, format!("malformed {k} bound"))),
        };
        let j = *self
            .col_index
            .get(col.text)
            .ok_or_else(|| perr(line, col.column, format!("unknown column '{}'", col.text)))?;
        match (k.as_str(), value) {
            ("UP" | "UI", Some(v)) => {
                self.upper[j] = v;
                if v < 0.0 && self.lower[j] == 0.0 {
                    self.lower[j] = f64::NEG_INFINITY;
                }
            }
            ("LO" | "LI", Some(v)) => self.lower[j] = v,
            ("FX", Some(v)) => {
                self.lower[j] = v;
                self.upper[j] = v;
            }
            ("FR", _) => {
                self.lower[j] = f64::NEG_INFINITY;
                self.upper[j] = f64::INFINITY;
            }
            ("MI", _) => self.lower[j] = f64::NEG_INFINITY,
            ("PL", _) => self.upper[j] = f64::INFINITY,
            ("BV", _) => {
                self.lower[j] = 0.0;
                self.upper[j] = 1.0;
            }
            _ => unreachable!("bound kinds are validated above"),
        }
        Ok(())
    }

    fn finish(self) -> GeneralLp {
        let n = self.cols.len();
        let dense = |m: &HashMap<usize, f64>| {
            let mut v = vec![0.0; n];
            for (&j, &x) in m {
                v[j] = x;
            }
            v
        };
        let mut constraints = Vec::new();
        for r in &self.rows {
            let coeffs = dense(&r.coeffs);
            let interval = match (r.kind, r.range) {
                (RowType::Free, _) => continue,
                (RowType::Le, None) => None,
                (RowType::Ge, None) => None,
                (RowType::Eq, None) => None,
                (RowType::Eq, Some(0.0)) => None,
                (RowType::Le, Some(x)) => Some((r.rhs - x.abs(), r.rhs)),
                (RowType::Ge, Some(x)) => Some((r.rhs, r.rhs + x.abs())),
                (RowType::Eq, Some(x)) if x > 0.0 => Some((r.rhs, r.rhs + x)),
                (RowType::Eq, Some(x)) => Some((r.rhs + x, r.rhs)),
            };
            match interval {
                None => constraints.push(Constraint {
                    name: r.name.clone(),
                    coeffs,
                    relation: match r.kind {
                        RowType::Le => Relation::Le,
                        RowType::Ge => Relation::Ge,
                        _ => Relation::Eq,
                    },
                    rhs: r.rhs,
                }),
                Some((lo, hi)) => {
                    constraints.push(Constraint {
                        name: format!("{}.lo", r.name),
                        coeffs: coeffs.clone(),
                        relation: Relation::Ge,
                        rhs: lo,
                    });
                    constraints.push(Constraint {
                        name: format!("{}.hi", r.name),
                        coeffs,
                        relation: Relation::Le,
                        rhs: hi,
                    });
                }
            }
        }
        GeneralLp {
            name: self.name,
            sense: self.sense,
            objective: dense(&self.objective),
            objective_constant: self.objective_constant,
            constraints,
            lower: self.lower,
            upper: self.upper,
            var_names: self.cols,
        }
    }
}

/// Parses an MPS file. The objective is the first `N` row; further `N`
/// rows are dropped. Integrality markers are ignored.
pub fn parse_mps(text: &str) -> Result<GeneralLp> {
    let mut r = Reader::new();
    let mut section = Section::None;
    let mut ended = false;
    let mut last_line = 0;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        last_line = line;
        if raw.trim().is_empty() || raw.starts_with('*') {
            continue;
        }
        let toks = tokens(raw);
        let header = !raw.starts_with(char::is_whitespace);
        if header {
            let key = toks[0].text.to_ascii_uppercase();
            section = match key.as_str() {
                "NAME" => {
                    r.name = toks.get(1).map_or(String::new(), |t| t.text.to_string());
                    Section::Name
                }
                "OBJSENSE" => {
                    if let Some(t) = toks.get(1) {
                        r.sense_token(t, line)?;
                    }
                    Section::ObjSense
                }
                "ROWS" => Section::Rows,
                "COLUMNS" => Section::Columns,
                "RHS" => Section::Rhs,
                "RANGES" => Section::Ranges,
                "BOUNDS" => Section::Bounds,
                "ENDATA" => {
                    ended = true;
                    break;
                }
                k if UNSUPPORTED.contains(&k) => return Err(Error::Unsupported(format!("section {k}"))),
                _ if section != Section::None => {
                    // Free-format files may leave data lines unindented.
                    dispatch(&mut r, section, &toks, line)?;
                    section
                }
                _ => return Err(perr(line, 1, format!("unknown section '{}'", toks[0].text))),
            };
            continue;
        }
        dispatch(&mut r, section, &toks, line)?;
    }
    if !ended {
        return Err(perr(last_line + 1, 1, "missing ENDATA"));
    }
    if r.objective_row.is_none() {
        return Err(perr(last_line, 1, "no objective (N) row"));
    }
    Ok(r.finish())
}

fn dispatch(r: &mut Reader, section: Section, toks: &[Token], line: usize) -> Result<()> {
    match section {
        Section::None | Section::Name => Err(perr(line, toks[0].column, "data line outside a section")),
        Section::ObjSense => r.sense_token(&toks[0], line),
        Section::Rows => r.row(toks, line),
        Section::Columns => r.column(toks, line),
        Section::Rhs => r.row_values(toks, line, false),
        Section::Ranges => r.row_values(toks, line, true),
        Section::Bounds => r.bound(toks, line),
    }
}
