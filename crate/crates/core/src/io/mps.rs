//! MPS files in free and fixed format.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;
use std::path::Path;

use super::IoError;
use crate::model::{Problem, ProblemBuilder};
use crate::numerics::Real;

/// Magnitude from which numbers in an MPS file count as infinite.
const MPS_INFINITY: f64 = 1e30;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum MpsFormat {
    /// Whitespace separated fields; names cannot contain blanks.
    #[default]
    Free,
    /// Fields at the classic column positions; names may contain blanks.
    Fixed,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct MpsOptions {
    pub format: MpsFormat,
    /// Integral columns without an upper bound get `[0, 1]` instead of
    /// `[0, +inf)`.
    pub legacy_integer_bounds: bool,
}

pub fn read_mps<R: Real>(path: &Path, options: MpsOptions) -> Result<Problem<R>, IoError> {
    let text = std::fs::read_to_string(path)?;
    read_mps_str(&text, options)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Section {
    None,
    Name,
    ObjSense,
    Rows,
    Columns,
    Rhs,
    Ranges,
    Bounds,
    End,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum RowKind {
    Equal,
    Less,
    Greater,
    Free,
}

struct Column<R> {
    name: String,
    cost: R,
    integral: bool,
    lower: Option<R>,
    upper: Option<R>,
    lower_set: bool,
    upper_set: bool,
}

struct Reader<R> {
    options: MpsOptions,
    section: Section,
    name: String,
    maximize: bool,
    objective_row: Option<String>,
    rows: HashMap<String, usize>,
    row_names: Vec<String>,
    row_kinds: Vec<RowKind>,
    cols: HashMap<String, usize>,
    columns: Vec<Column<R>>,
    entries: Vec<(usize, usize, R)>,
    seen: HashSet<(usize, usize)>,
    objective_seen: HashSet<usize>,
    last_col: Option<usize>,
    integral_block: bool,
    rhs: Vec<Option<R>>,
    ranges: Vec<Option<R>>,
    offset: Option<R>,
    rhs_set: Option<String>,
    range_set: Option<String>,
    bound_set: Option<String>,
}

pub fn read_mps_str<R: Real>(text: &str, options: MpsOptions) -> Result<Problem<R>, IoError> {
    let mut reader = Reader {
        options,
        section: Section::None,
        name: String::new(),
        maximize: false,
        objective_row: None,
        rows: HashMap::new(),
        row_names: Vec::new(),
        row_kinds: Vec::new(),
        cols: HashMap::new(),
        columns: Vec::new(),
        entries: Vec::new(),
        seen: HashSet::new(),
        objective_seen: HashSet::new(),
        last_col: None,
        integral_block: false,
        rhs: Vec::new(),
        ranges: Vec::new(),
        offset: None,
        rhs_set: None,
        range_set: None,
        bound_set: None,
    };
    for (index, line) in text.lines().enumerate() {
        let line = line.trim_end();
        if line.trim().is_empty() || line.starts_with('*') {
            continue;
        }
        reader.line(index + 1, line)?;
        if reader.section == Section::End {
            break;
        }
    }
    Ok(reader.finish())
}

fn fixed_field(line: &str, start: usize, end: usize, number: usize) -> Result<&str, IoError> {
    if !line.is_ascii() {
        return Err(IoError::parse(number, "fixed-format line contains non-ASCII text"));
    }
    let end = end.min(line.len());
    Ok(if start >= end { "" } else { line[start..end].trim() })
}

/// The six classic fields of a fixed-format data line.
fn fixed_fields(line: &str, number: usize) -> Result<[&str; 6], IoError> {
    Ok([
        fixed_field(line, 1, 3, number)?,
        fixed_field(line, 4, 12, number)?,
        fixed_field(line, 14, 22, number)?,
        fixed_field(line, 24, 36, number)?,
        fixed_field(line, 39, 47, number)?,
        fixed_field(line, 49, 61, number)?,
    ])
}

fn trim_trailing_empty(mut v: Vec<&str>) -> Vec<&str> {
    while v.last().is_some_and(|s| s.is_empty()) {
        v.pop();
    }
    v
}

/// `Some(None)` for an infinite value.
fn parse_number<R: Real>(token: &str, number: usize) -> Result<Option<R>, IoError> {
    let lower = token.to_ascii_lowercase();
    let unsigned = lower.trim_start_matches(['+', '-']);
    if unsigned == "inf" || unsigned == "infinity" {
        return Ok(None);
    }
    let value = R::parse(token).ok_or_else(|| IoError::parse(number, format!("invalid number '{token}'")))?;
    Ok((value.to_f64().abs() < MPS_INFINITY).then_some(value))
}

fn finite<R: Real>(token: &str, number: usize) -> Result<R, IoError> {
    parse_number(token, number)?.ok_or_else(|| IoError::parse(number, format!("infinite value '{token}' not allowed here")))
}

impl<R: Real> Reader<R> {
    fn line(&mut self, number: usize, line: &str) -> Result<(), IoError> {
        let header = !line.starts_with([' ', '\t']);
        if header {
            return self.header(number, line);
        }
        match self.section {
            Section::None | Section::Name | Section::End => {
                Err(IoError::parse(number, "data line outside of a section"))
            }
            Section::ObjSense => self.objsense(number, line.trim()),
            Section::Rows => self.row(number, line),
            Section::Columns => self.column(number, line),
            Section::Rhs => self.rhs_line(number, line, false),
            Section::Ranges => self.rhs_line(number, line, true),
            Section::Bounds => self.bound(number, line),
        }
    }

    fn header(&mut self, number: usize, line: &str) -> Result<(), IoError> {
        let mut tokens = line.split_whitespace();
        let keyword = tokens.next().unwrap_or_default().to_ascii_uppercase();
        let rest: Vec<&str> = tokens.collect();
        let next = match keyword.as_str() {
            "NAME" => {
                self.name = line[4..].trim().to_string();
                Section::Name
            }
            "OBJSENSE" => {
                if let Some(sense) = rest.first() {
                    self.objsense(number, sense)?;
                }
                Section::ObjSense
            }
            "ROWS" => Section::Rows,
            "COLUMNS" => Section::Columns,
            "RHS" => Section::Rhs,
            "RANGES" => Section::Ranges,
            "BOUNDS" => Section::Bounds,
            "ENDATA" => Section::End,
            _ => return Err(IoError::parse(number, format!("unknown section '{keyword}'"))),
        };
        self.section = next;
        Ok(())
    }

    fn objsense(&mut self, number: usize, sense: &str) -> Result<(), IoError> {
        match sense.to_ascii_uppercase().as_str() {
            "MAX" | "MAXIMIZE" => self.maximize = true,
            "MIN" | "MINIMIZE" => self.maximize = false,
            other => return Err(IoError::parse(number, format!("unknown objective sense '{other}'"))),
        }
        Ok(())
    }

    fn row(&mut self, number: usize, line: &str) -> Result<(), IoError> {
        let fields: Vec<&str> = match self.options.format {
            MpsFormat::Free => line.split_whitespace().collect(),
            MpsFormat::Fixed => {
                let f = fixed_fields(line, number)?;
                trim_trailing_empty(vec![f[0], f[1]])
            }
        };
        let [kind, name] = fields[..] else {
            return Err(IoError::parse(number, "row line needs a type and a name"));
        };
        let kind = match kind.to_ascii_uppercase().as_str() {
            "E" => RowKind::Equal,
            "L" => RowKind::Less,
            "G" => RowKind::Greater,
            "N" => RowKind::Free,
            other => return Err(IoError::parse(number, format!("unknown row type '{other}'"))),
        };
        if self.rows.contains_key(name) || self.objective_row.as_deref() == Some(name) {
            return Err(IoError::parse(number, format!("duplicate row '{name}'")));
        }
        if kind == RowKind::Free && self.objective_row.is_none() {
            self.objective_row = Some(name.to_string());
            return Ok(());
        }
        self.rows.insert(name.to_string(), self.row_names.len());
        self.row_names.push(name.to_string());
        self.row_kinds.push(kind);
        self.rhs.push(None);
        self.ranges.push(None);
        Ok(())
    }

    fn column(&mut self, number: usize, line: &str) -> Result<(), IoError> {
        let words: Vec<&str> = line.split_whitespace().collect();
        if words.iter().any(|w| w.trim_matches('\'').eq_ignore_ascii_case("MARKER")) && words.len() >= 3 {
            let marker = words[words.len() - 1].trim_matches('\'').to_ascii_uppercase();
            match marker.as_str() {
                "INTORG" => self.integral_block = true,
                "INTEND" => self.integral_block = false,
                other => return Err(IoError::parse(number, format!("unknown marker '{other}'"))),
            }
            return Ok(());
        }
        let fields: Vec<&str> = match self.options.format {
            MpsFormat::Free => words,
            MpsFormat::Fixed => {
                let f = fixed_fields(line, number)?;
                trim_trailing_empty(f[1..].to_vec())
            }
        };
        if fields.len() != 3 && fields.len() != 5 {
            return Err(IoError::parse(number, "column line needs a name and one or two row/value pairs"));
        }
        let name = fields[0];
        let col = match self.cols.get(name) {
            Some(&c) if self.last_col == Some(c) => c,
            Some(_) => return Err(IoError::parse(number, format!("column '{name}' appears in two places"))),
            None => {
                let c = self.columns.len();
                self.cols.insert(name.to_string(), c);
                self.columns.push(Column {
                    name: name.to_string(),
                    cost: R::zero(),
                    integral: self.integral_block,
                    lower: Some(R::zero()),
                    upper: None,
                    lower_set: false,
                    upper_set: false,
                });
                c
            }
        };
        self.last_col = Some(col);
        for pair in fields[1..].chunks(2) {
            let value = finite::<R>(pair[1], number)?;
            if self.objective_row.as_deref() == Some(pair[0]) {
                if !self.objective_seen.insert(col) {
                    return Err(IoError::parse(number, format!("duplicate objective entry for column '{name}'")));
                }
                self.columns[col].cost = value;
                continue;
            }
            let row = *self
                .rows
                .get(pair[0])
                .ok_or_else(|| IoError::parse(number, format!("unknown row '{}'", pair[0])))?;
            if !self.seen.insert((row, col)) {
                return Err(IoError::parse(number, format!("duplicate entry for row '{}' column '{name}'", pair[0])));
            }
            if !value.is_zero() {
                self.entries.push((row, col, value));
            }
        }
        Ok(())
    }

    /// One line of the RHS or RANGES section.
    fn rhs_line(&mut self, number: usize, line: &str, ranges: bool) -> Result<(), IoError> {
        let fields: Vec<&str> = match self.options.format {
            MpsFormat::Free => {
                let mut w: Vec<&str> = line.split_whitespace().collect();
                if w.len().is_multiple_of(2) {
                    w.insert(0, "");
                }
                w
            }
            MpsFormat::Fixed => {
                let f = fixed_fields(line, number)?;
                trim_trailing_empty(f[1..].to_vec())
            }
        };
        if fields.len() != 3 && fields.len() != 5 {
            return Err(IoError::parse(number, "expected a set name and one or two row/value pairs"));
        }
        let set = if ranges { &mut self.range_set } else { &mut self.rhs_set };
        match set {
            Some(s) if s != fields[0] => return Ok(()),
            Some(_) => {}
            None => *set = Some(fields[0].to_string()),
        }
        for pair in fields[1..].chunks(2) {
            let value = finite::<R>(pair[1], number)?;
            if self.objective_row.as_deref() == Some(pair[0]) {
                if ranges {
                    return Err(IoError::parse(number, "range on the objective row"));
                }
                if self.offset.is_some() {
                    return Err(IoError::parse(number, "duplicate objective constant"));
                }
                self.offset = Some(-value);
                continue;
            }
            let row = *self
                .rows
                .get(pair[0])
                .ok_or_else(|| IoError::parse(number, format!("unknown row '{}'", pair[0])))?;
            if ranges && self.row_kinds[row] == RowKind::Free {
                return Err(IoError::parse(number, format!("range on free row '{}'", pair[0])));
            }
            let slot = if ranges { &mut self.ranges[row] } else { &mut self.rhs[row] };
            if slot.is_some() {
                return Err(IoError::parse(number, format!("duplicate entry for row '{}'", pair[0])));
            }
            *slot = Some(value);
        }
        Ok(())
    }

    fn bound(&mut self, number: usize, line: &str) -> Result<(), IoError> {
        let words: Vec<&str> = line.split_whitespace().collect();
        let kind = words.first().map(|k| k.to_ascii_uppercase()).unwrap_or_default();
        let takes_value = !matches!(kind.as_str(), "FR" | "MI" | "PL" | "BV");
        let fields: Vec<&str> = match self.options.format {
            MpsFormat::Free => {
                let mut w = words;
                if w.len() == 2 + takes_value as usize {
                    w.insert(1, "");
                }
                w
            }
            MpsFormat::Fixed => {
                let f = fixed_fields(line, number)?;
                trim_trailing_empty(f[..4].to_vec())
            }
        };
        if fields.len() < 3 || fields.len() > 3 + takes_value as usize || (takes_value && fields.len() != 4) {
            return Err(IoError::parse(number, format!("malformed {kind} bound")));
        }
        match &self.bound_set {
            Some(s) if s != fields[1] => return Ok(()),
            Some(_) => {}
            None => self.bound_set = Some(fields[1].to_string()),
        }
        let col = *self
            .cols
            .get(fields[2])
            .ok_or_else(|| IoError::parse(number, format!("unknown column '{}'", fields[2])))?;
        let value = if takes_value { parse_number::<R>(fields[3], number)? } else { None };
        let infinite_value = takes_value && value.is_none();
        let negative_infinity = infinite_value && fields[3].starts_with('-');
        let c = &mut self.columns[col];
        match kind.as_str() {
            "UP" | "UI" => {
                if kind == "UI" {
                    c.integral = true;
                }
                if negative_infinity {
                    return Err(IoError::parse(number, "upper bound of minus infinity"));
                }
                if let Some(v) = &value {
                    if v.is_negative() && !c.lower_set && c.lower.as_ref().is_some_and(R::is_zero) {
                        c.lower = None;
                    }
                }
                c.upper = value;
                c.upper_set = true;
            }
            "LO" | "LI" => {
                if kind == "LI" {
                    c.integral = true;
                }
                if infinite_value && !negative_infinity {
                    return Err(IoError::parse(number, "lower bound of plus infinity"));
                }
                c.lower = value;
                c.lower_set = true;
            }
            "FX" => {
                let v = value.ok_or_else(|| IoError::parse(number, "infinite fixing value"))?;
                c.lower = Some(v.clone());
                c.upper = Some(v);
                c.lower_set = true;
                c.upper_set = true;
            }
            "FR" => {
                c.lower = None;
                c.upper = None;
                c.lower_set = true;
                c.upper_set = true;
            }
            "MI" => {
                c.lower = None;
                c.lower_set = true;
            }
            "PL" => {
                c.upper = None;
                c.upper_set = true;
            }
            "BV" => {
                c.integral = true;
                c.lower = Some(R::zero());
                c.upper = Some(R::one());
                c.lower_set = true;
                c.upper_set = true;
            }
            other => return Err(IoError::parse(number, format!("unsupported bound type '{other}'"))),
        }
        Ok(())
    }

    fn finish(self) -> Problem<R> {
        let mut b = ProblemBuilder::new();
        b.set_name(&self.name);
        let sign = |v: R| if self.maximize { -v } else { v };
        if let Some(offset) = self.offset {
            b.set_offset(sign(offset));
        }
        for c in self.columns {
            let upper = if c.integral && !c.upper_set && self.options.legacy_integer_bounds {
                Some(R::one())
            } else {
                c.upper
            };
            b.add_col(&c.name, sign(c.cost), c.lower, upper, c.integral);
        }
        for (i, name) in self.row_names.iter().enumerate() {
            let b_i = self.rhs[i].clone().unwrap_or_else(R::zero);
            let (lhs, rhs) = match (self.row_kinds[i], self.ranges[i].clone()) {
                (RowKind::Free, _) => (None, None),
                (RowKind::Equal, None) => (Some(b_i.clone()), Some(b_i)),
                (RowKind::Equal, Some(r)) if r.is_negative() => (Some(b_i.clone() + r), Some(b_i)),
                (RowKind::Equal, Some(r)) => (Some(b_i.clone()), Some(b_i + r)),
                (RowKind::Less, None) => (None, Some(b_i)),
                (RowKind::Less, Some(r)) => (Some(b_i.clone() - r.abs()), Some(b_i)),
                (RowKind::Greater, None) => (Some(b_i), None),
                (RowKind::Greater, Some(r)) => (Some(b_i.clone()), Some(b_i + r.abs())),
            };
            b.add_row(name, &[], lhs, rhs);
        }
        for (row, col, value) in self.entries {
            b.push_entry(row, col, value);
        }
        b.build()
    }
}

/// Name under which a row (`kind` 'R') or column (`kind` 'C') is written:
/// blanks become underscores and empty names are replaced by kind and index.
pub fn mps_name(name: &str, kind: char, index: usize) -> String {
    if name.is_empty() {
        return format!("{kind}{index}");
    }
    name.chars().map(|c| if c.is_whitespace() { '_' } else { c }).collect()
}

/// Canonical free-format MPS text: rows and columns in index order, one
/// matrix entry per line, explicit bounds where they differ from the
/// defaults.
pub fn write_mps_string<R: Real>(p: &Problem<R>) -> String {
    let col_names: Vec<String> = (0..p.ncols()).map(|j| mps_name(&p.col_names[j], 'C', j)).collect();
    let row_names: Vec<String> = (0..p.nrows()).map(|i| mps_name(&p.row_names[i], 'R', i)).collect();
    let mut objective = "obj".to_string();
    while row_names.contains(&objective) {
        objective.push('_');
    }
    let mut out = String::new();
    let name = if p.name.is_empty() { "problem".to_string() } else { mps_name(&p.name, 'P', 0) };
    let _ = writeln!(out, "NAME {name}");
    out.push_str("ROWS\n");
    let _ = writeln!(out, " N {objective}");
    for (i, name) in row_names.iter().enumerate() {
        let kind = match (p.lhs(i), p.rhs(i)) {
            (None, None) => "N",
            (Some(_), None) => "G",
            (Some(l), Some(r)) if l == r => "E",
            _ => "L",
        };
        let _ = writeln!(out, " {kind} {name}");
    }
    out.push_str("COLUMNS\n");
    let mut in_block = false;
    for j in 0..p.ncols() {
        let integral = p.is_integral(j);
        if integral != in_block {
            let marker = if integral { "INTORG" } else { "INTEND" };
            let _ = writeln!(out, " MARKER 'MARKER' '{marker}'");
            in_block = integral;
        }
        let name = &col_names[j];
        let cost = &p.objective[j];
        let column = p.matrix.col(j);
        if !cost.is_zero() || column.is_empty() {
            let _ = writeln!(out, " {name} {objective} {}", cost.to_exact_string());
        }
        for e in column {
            let _ = writeln!(out, " {name} {} {}", row_names[e.index], e.value.to_exact_string());
        }
    }
    if in_block {
        out.push_str(" MARKER 'MARKER' 'INTEND'\n");
    }
    out.push_str("RHS\n");
    if !p.objective_offset.is_zero() {
        let _ = writeln!(out, " RHS {objective} {}", (-p.objective_offset.clone()).to_exact_string());
    }
    let mut ranges = Vec::new();
    for (i, name) in row_names.iter().enumerate() {
        let side = match (p.lhs(i), p.rhs(i)) {
            (None, None) => None,
            (Some(l), None) => Some(l),
            (Some(l), Some(r)) => {
                if l != r {
                    ranges.push((name, r.clone() - l.clone()));
                }
                Some(r)
            }
            (None, Some(r)) => Some(r),
        };
        if let Some(v) = side.filter(|v| !v.is_zero()) {
            let _ = writeln!(out, " RHS {name} {}", v.to_exact_string());
        }
    }
    if !ranges.is_empty() {
        out.push_str("RANGES\n");
        for (name, r) in ranges {
            let _ = writeln!(out, " RNG {name} {}", r.to_exact_string());
        }
    }
    out.push_str("BOUNDS\n");
    for (j, name) in col_names.iter().enumerate() {
        let (lower, upper) = (&p.lower[j], &p.upper[j]);
        match (lower, upper) {
            (Some(l), Some(u)) if l == u => {
                let _ = writeln!(out, " FX BND {name} {}", l.to_exact_string());
                continue;
            }
            (None, None) => {
                let _ = writeln!(out, " FR BND {name}");
                continue;
            }
            (None, Some(_)) => {
                let _ = writeln!(out, " MI BND {name}");
            }
            (Some(l), u) => {
                if !l.is_zero() || u.as_ref().is_some_and(R::is_negative) {
                    let _ = writeln!(out, " LO BND {name} {}", l.to_exact_string());
                }
            }
        }
        match upper {
            Some(u) => {
                let _ = writeln!(out, " UP BND {name} {}", u.to_exact_string());
            }
            None if p.is_integral(j) => {
                let _ = writeln!(out, " PL BND {name}");
            }
            None => {}
        }
    }
    out.push_str("ENDATA\n");
    out
}

pub fn write_mps<R: Real>(p: &Problem<R>, path: &Path) -> Result<(), IoError> {
    std::fs::write(path, write_mps_string(p))?;
    Ok(())
}
