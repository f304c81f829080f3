//! Versioned postsolve record files.
//!
//! Binary layout: the magic `PSRC`, a little-endian `u32` version, a mode
//! byte (0 floating point, 1 rational), a little-endian `u64` payload length
//! and the payload. Integers in the payload are little-endian `u64`, strings
//! and lists carry their length in front, numbers use [`Real::encode`].
//!
//! The text layout starts with `PSRC-TEXT <version> <mode>` and lists the
//! same fields as whitespace separated tokens, one record entry per line.

use std::fmt::Write as _;

use super::IoError;
use crate::numerics::{NumericMode, Real};
use crate::postsolve::{PostsolveData, PostsolveRecord, RecordEntry};
use crate::transaction::ReductionStep;

pub const RECORD_VERSION: u32 = 1;
const MAGIC: &[u8; 4] = b"PSRC";
const TEXT_MAGIC: &str = "PSRC-TEXT";

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum RecordFormat {
    #[default]
    Binary,
    Text,
}

/// Step names in tag order.
const STEP_NAMES: [&str; 17] = [
    "ASSERT_ROW_UNMODIFIED",
    "ASSERT_ROW_BOUNDS_UNMODIFIED",
    "ASSERT_COL_BOUNDS_UNMODIFIED",
    "ASSERT_COL_UNMODIFIED",
    "FIX_COLUMN",
    "CHANGE_LOWER",
    "CHANGE_UPPER",
    "CHANGE_LHS",
    "CHANGE_RHS",
    "CHANGE_COEFF",
    "SUBSTITUTE_IN_OBJECTIVE",
    "SUBSTITUTE_COLUMN",
    "MARK_ROW_REDUNDANT",
    "DELETE_COLUMN",
    "AGGREGATE_PARALLEL_COLS",
    "REPLACE_COLUMN",
    "IMPLY_INTEGRAL",
];

const DATA_NAMES: [&str; 6] = ["NONE", "FIXED", "SUBSTITUTED", "FREE_COLUMN", "AGGREGATED", "REPLACED"];

fn mode_byte(mode: NumericMode) -> u8 {
    match mode {
        NumericMode::Float64 => 0,
        NumericMode::Rational => 1,
    }
}

trait Sink<R> {
    fn tag(&mut self, tag: usize, names: &[&str]);
    fn index(&mut self, v: usize);
    fn real(&mut self, v: &R);
    fn opt(&mut self, v: &Option<R>);
    fn flag(&mut self, v: bool);
    fn text(&mut self, s: &str);
    fn end_item(&mut self);
}

trait Source<R> {
    fn tag(&mut self, names: &[&str]) -> Result<usize, IoError>;
    fn index(&mut self) -> Result<usize, IoError>;
    fn real(&mut self) -> Result<R, IoError>;
    fn opt(&mut self) -> Result<Option<R>, IoError>;
    fn flag(&mut self) -> Result<bool, IoError>;
    fn text(&mut self) -> Result<String, IoError>;
}

struct BinarySink(Vec<u8>);

impl<R: Real> Sink<R> for BinarySink {
    fn tag(&mut self, tag: usize, _: &[&str]) {
        self.0.push(tag as u8);
    }
    fn index(&mut self, v: usize) {
        self.0.extend_from_slice(&(v as u64).to_le_bytes());
    }
    fn real(&mut self, v: &R) {
        v.encode(&mut self.0);
    }
    fn opt(&mut self, v: &Option<R>) {
        match v {
            None => self.0.push(0),
            Some(v) => {
                self.0.push(1);
                v.encode(&mut self.0);
            }
        }
    }
    fn flag(&mut self, v: bool) {
        self.0.push(v as u8);
    }
    fn text(&mut self, s: &str) {
        self.0.extend_from_slice(&(s.len() as u32).to_le_bytes());
        self.0.extend_from_slice(s.as_bytes());
    }
    fn end_item(&mut self) {}
}

struct BinarySource<'a>(&'a [u8]);

impl BinarySource<'_> {
    fn take(&mut self, n: usize) -> Result<&[u8], IoError> {
        if self.0.len() < n {
            return Err(IoError::format("record ends early"));
        }
        let (head, rest) = self.0.split_at(n);
        self.0 = rest;
        Ok(head)
    }

    fn byte(&mut self) -> Result<u8, IoError> {
        Ok(self.take(1)?[0])
    }
}

impl<R: Real> Source<R> for BinarySource<'_> {
    fn tag(&mut self, names: &[&str]) -> Result<usize, IoError> {
        let t = self.byte()? as usize;
        if t >= names.len() {
            return Err(IoError::format(format!("unknown tag {t}")));
        }
        Ok(t)
    }
    fn index(&mut self) -> Result<usize, IoError> {
        let bytes: [u8; 8] = self.take(8)?.try_into().expect("eight bytes");
        usize::try_from(u64::from_le_bytes(bytes)).map_err(|_| IoError::format("index out of range"))
    }
    fn real(&mut self) -> Result<R, IoError> {
        R::decode(&mut self.0).ok_or_else(|| IoError::format("malformed number"))
    }
    fn opt(&mut self) -> Result<Option<R>, IoError> {
        match self.byte()? {
            0 => Ok(None),
            1 => Source::<R>::real(self).map(Some),
            b => Err(IoError::format(format!("invalid option byte {b}"))),
        }
    }
    fn flag(&mut self) -> Result<bool, IoError> {
        match self.byte()? {
            0 => Ok(false),
            1 => Ok(true),
            b => Err(IoError::format(format!("invalid flag byte {b}"))),
        }
    }
    fn text(&mut self) -> Result<String, IoError> {
        let len = u32::from_le_bytes(self.take(4)?.try_into().expect("four bytes")) as usize;
        let bytes = self.take(len)?;
        String::from_utf8(bytes.to_vec()).map_err(|_| IoError::format("name is not UTF-8"))
    }
}

struct TextSink {
    out: String,
    fresh_line: bool,
}

impl TextSink {
    fn token(&mut self, t: &str) {
        if !self.fresh_line {
            self.out.push(' ');
        }
        self.out.push_str(t);
        self.fresh_line = false;
    }
}

/// Strings are written with a leading quote so that the empty string is a
/// token; `%`, blanks and control characters are hex escaped.
fn escape(s: &str) -> String {
    let mut out = String::from("\"");
    for c in s.chars() {
        if c == '%' || c.is_whitespace() || c.is_control() {
            let mut buf = [0u8; 4];
            for b in c.encode_utf8(&mut buf).bytes() {
                let _ = write!(out, "%{b:02X}");
            }
        } else {
            out.push(c);
        }
    }
    out
}

fn unescape(token: &str) -> Result<String, IoError> {
    let body = token.strip_prefix('"').ok_or_else(|| IoError::format(format!("expected a name, found '{token}'")))?;
    let mut bytes = Vec::with_capacity(body.len());
    let mut rest = body.as_bytes();
    while let Some((&b, tail)) = rest.split_first() {
        if b == b'%' {
            let hex = tail.get(..2).and_then(|h| std::str::from_utf8(h).ok());
            let value = hex
                .and_then(|h| u8::from_str_radix(h, 16).ok())
                .ok_or_else(|| IoError::format(format!("bad escape in '{token}'")))?;
            bytes.push(value);
            rest = &tail[2..];
        } else {
            bytes.push(b);
            rest = tail;
        }
    }
    String::from_utf8(bytes).map_err(|_| IoError::format(format!("bad escape in '{token}'")))
}

impl<R: Real> Sink<R> for TextSink {
    fn tag(&mut self, tag: usize, names: &[&str]) {
        self.token(names[tag]);
    }
    fn index(&mut self, v: usize) {
        self.token(&v.to_string());
    }
    fn real(&mut self, v: &R) {
        self.token(&v.to_exact_string());
    }
    fn opt(&mut self, v: &Option<R>) {
        match v {
            None => self.token("inf"),
            Some(v) => self.token(&v.to_exact_string()),
        }
    }
    fn flag(&mut self, v: bool) {
        self.token(if v { "1" } else { "0" });
    }
    fn text(&mut self, s: &str) {
        self.token(&escape(s));
    }
    fn end_item(&mut self) {
        self.out.push('\n');
        self.fresh_line = true;
    }
}

struct TextSource<'a>(std::str::SplitWhitespace<'a>);

impl TextSource<'_> {
    fn next(&mut self) -> Result<&str, IoError> {
        self.0.next().ok_or_else(|| IoError::format("record ends early"))
    }
}

impl<R: Real> Source<R> for TextSource<'_> {
    fn tag(&mut self, names: &[&str]) -> Result<usize, IoError> {
        let t = self.next()?;
        names
            .iter()
            .position(|n| *n == t)
            .ok_or_else(|| IoError::format(format!("unknown kind '{t}'")))
    }
    fn index(&mut self) -> Result<usize, IoError> {
        let t = self.next()?;
        t.parse().map_err(|_| IoError::format(format!("invalid index '{t}'")))
    }
    fn real(&mut self) -> Result<R, IoError> {
        let t = self.next()?;
        R::parse(t).ok_or_else(|| IoError::format(format!("invalid number '{t}'")))
    }
    fn opt(&mut self) -> Result<Option<R>, IoError> {
        let t = self.next()?;
        if t == "inf" {
            return Ok(None);
        }
        R::parse(t).map(Some).ok_or_else(|| IoError::format(format!("invalid number '{t}'")))
    }
    fn flag(&mut self) -> Result<bool, IoError> {
        match self.next()? {
            "0" => Ok(false),
            "1" => Ok(true),
            t => Err(IoError::format(format!("invalid flag '{t}'"))),
        }
    }
    fn text(&mut self) -> Result<String, IoError> {
        unescape(self.next()?)
    }
}

fn put_list<R, T>(sink: &mut dyn Sink<R>, items: &[T], mut put: impl FnMut(&mut dyn Sink<R>, &T)) {
    sink.index(items.len());
    for item in items {
        put(sink, item);
    }
    sink.end_item();
}

fn put_entries<R: Real>(sink: &mut dyn Sink<R>, entries: &[(usize, R)]) {
    sink.index(entries.len());
    for (k, v) in entries {
        sink.index(*k);
        sink.real(v);
    }
}

fn put_step<R: Real>(sink: &mut dyn Sink<R>, step: &ReductionStep<R>) {
    use ReductionStep::*;
    let names = &STEP_NAMES[..];
    match step {
        AssertRowUnmodified(r) => {
            sink.tag(0, names);
            sink.index(*r);
        }
        AssertRowBoundsUnmodified(r) => {
            sink.tag(1, names);
            sink.index(*r);
        }
        AssertColBoundsUnmodified(c) => {
            sink.tag(2, names);
            sink.index(*c);
        }
        AssertColUnmodified(c) => {
            sink.tag(3, names);
            sink.index(*c);
        }
        FixColumn { col, value } => {
            sink.tag(4, names);
            sink.index(*col);
            sink.real(value);
        }
        ChangeLower { col, value } => {
            sink.tag(5, names);
            sink.index(*col);
            sink.real(value);
        }
        ChangeUpper { col, value } => {
            sink.tag(6, names);
            sink.index(*col);
            sink.real(value);
        }
        ChangeLhs { row, value } => {
            sink.tag(7, names);
            sink.index(*row);
            sink.opt(value);
        }
        ChangeRhs { row, value } => {
            sink.tag(8, names);
            sink.index(*row);
            sink.opt(value);
        }
        ChangeCoeff { row, col, value } => {
            sink.tag(9, names);
            sink.index(*row);
            sink.index(*col);
            sink.real(value);
        }
        SubstituteInObjective { col, row } => {
            sink.tag(10, names);
            sink.index(*col);
            sink.index(*row);
        }
        SubstituteColumn { col, row } => {
            sink.tag(11, names);
            sink.index(*col);
            sink.index(*row);
        }
        MarkRowRedundant(r) => {
            sink.tag(12, names);
            sink.index(*r);
        }
        DeleteColumn { col } => {
            sink.tag(13, names);
            sink.index(*col);
        }
        AggregateParallelCols { keep, remove, scale } => {
            sink.tag(14, names);
            sink.index(*keep);
            sink.index(*remove);
            sink.real(scale);
        }
        ReplaceColumn { col, by, factor, offset } => {
            sink.tag(15, names);
            sink.index(*col);
            sink.index(*by);
            sink.real(factor);
            sink.real(offset);
        }
        ImplyIntegral(c) => {
            sink.tag(16, names);
            sink.index(*c);
        }
    }
}

fn put_data<R: Real>(sink: &mut dyn Sink<R>, data: &PostsolveData<R>) {
    let names = &DATA_NAMES[..];
    match data {
        PostsolveData::None => sink.tag(0, names),
        PostsolveData::Fixed { col, value } => {
            sink.tag(1, names);
            sink.index(*col);
            sink.real(value);
        }
        PostsolveData::Substituted {
            col,
            coef,
            entries,
            rhs,
            integral,
        } => {
            sink.tag(2, names);
            sink.index(*col);
            sink.real(coef);
            put_entries(sink, entries);
            sink.real(rhs);
            sink.flag(*integral);
        }
        PostsolveData::FreeColumn {
            col,
            coef,
            entries,
            lhs,
            rhs,
            lower,
            upper,
        } => {
            sink.tag(3, names);
            sink.index(*col);
            sink.real(coef);
            put_entries(sink, entries);
            sink.opt(lhs);
            sink.opt(rhs);
            sink.opt(lower);
            sink.opt(upper);
        }
        PostsolveData::Aggregated {
            keep,
            remove,
            scale,
            keep_lower,
            keep_upper,
            remove_lower,
            remove_upper,
            integral,
        } => {
            sink.tag(4, names);
            sink.index(*keep);
            sink.index(*remove);
            sink.real(scale);
            sink.opt(keep_lower);
            sink.opt(keep_upper);
            sink.opt(remove_lower);
            sink.opt(remove_upper);
            sink.flag(*integral);
        }
        PostsolveData::Replaced { col, by, factor, offset } => {
            sink.tag(5, names);
            sink.index(*col);
            sink.index(*by);
            sink.real(factor);
            sink.real(offset);
        }
    }
}

fn put_record<R: Real>(sink: &mut dyn Sink<R>, rec: &PostsolveRecord<R>) {
    sink.index(rec.orig_nrows);
    sink.index(rec.orig_ncols);
    sink.real(&rec.objective_offset);
    sink.end_item();
    put_list(sink, &rec.objective, |s, v| s.real(v));
    put_list(sink, &rec.lower, |s, v| s.opt(v));
    put_list(sink, &rec.upper, |s, v| s.opt(v));
    put_list(sink, &rec.integral, |s, v| s.flag(*v));
    put_list(sink, &rec.col_names, |s, v| s.text(v));
    put_list(sink, &rec.col_map, |s, v| s.index(*v));
    put_list(sink, &rec.row_map, |s, v| s.index(*v));
    sink.index(rec.entries.len());
    sink.end_item();
    for entry in &rec.entries {
        put_step(sink, &entry.step);
        put_data(sink, &entry.data);
        sink.end_item();
    }
}

/// Reads indices and checks them against the original dimensions.
struct Indices {
    nrows: usize,
    ncols: usize,
}

impl Indices {
    fn row<R>(&self, src: &mut dyn Source<R>) -> Result<usize, IoError> {
        let r = src.index()?;
        if r >= self.nrows {
            return Err(IoError::format(format!("row index {r} out of range")));
        }
        Ok(r)
    }

    fn col<R>(&self, src: &mut dyn Source<R>) -> Result<usize, IoError> {
        let c = src.index()?;
        if c >= self.ncols {
            return Err(IoError::format(format!("column index {c} out of range")));
        }
        Ok(c)
    }

    fn entries<R>(&self, src: &mut dyn Source<R>) -> Result<Vec<(usize, R)>, IoError> {
        let n = src.index()?;
        let mut out = Vec::new();
        for _ in 0..n {
            out.push((self.col(src)?, src.real()?));
        }
        Ok(out)
    }
}

fn get_list<R, T>(
    src: &mut dyn Source<R>,
    mut get: impl FnMut(&mut dyn Source<R>) -> Result<T, IoError>,
) -> Result<Vec<T>, IoError> {
    let n = src.index()?;
    let mut out = Vec::new();
    for _ in 0..n {
        out.push(get(src)?);
    }
    Ok(out)
}

fn get_step<R: Real>(src: &mut dyn Source<R>, ix: &Indices) -> Result<ReductionStep<R>, IoError> {
    use ReductionStep::*;
    Ok(match src.tag(&STEP_NAMES)? {
        0 => AssertRowUnmodified(ix.row(src)?),
        1 => AssertRowBoundsUnmodified(ix.row(src)?),
        2 => AssertColBoundsUnmodified(ix.col(src)?),
        3 => AssertColUnmodified(ix.col(src)?),
        4 => FixColumn { col: ix.col(src)?, value: src.real()? },
        5 => ChangeLower { col: ix.col(src)?, value: src.real()? },
        6 => ChangeUpper { col: ix.col(src)?, value: src.real()? },
        7 => ChangeLhs { row: ix.row(src)?, value: src.opt()? },
        8 => ChangeRhs { row: ix.row(src)?, value: src.opt()? },
        9 => ChangeCoeff { row: ix.row(src)?, col: ix.col(src)?, value: src.real()? },
        10 => SubstituteInObjective { col: ix.col(src)?, row: ix.row(src)? },
        11 => SubstituteColumn { col: ix.col(src)?, row: ix.row(src)? },
        12 => MarkRowRedundant(ix.row(src)?),
        13 => DeleteColumn { col: ix.col(src)? },
        14 => AggregateParallelCols { keep: ix.col(src)?, remove: ix.col(src)?, scale: src.real()? },
        15 => ReplaceColumn { col: ix.col(src)?, by: ix.col(src)?, factor: src.real()?, offset: src.real()? },
        _ => ImplyIntegral(ix.col(src)?),
    })
}

fn get_data<R: Real>(src: &mut dyn Source<R>, ix: &Indices) -> Result<PostsolveData<R>, IoError> {
    Ok(match src.tag(&DATA_NAMES)? {
        0 => PostsolveData::None,
        1 => PostsolveData::Fixed { col: ix.col(src)?, value: src.real()? },
        2 => PostsolveData::Substituted {
            col: ix.col(src)?,
            coef: src.real()?,
            entries: ix.entries(src)?,
            rhs: src.real()?,
            integral: src.flag()?,
        },
        3 => PostsolveData::FreeColumn {
            col: ix.col(src)?,
            coef: src.real()?,
            entries: ix.entries(src)?,
            lhs: src.opt()?,
            rhs: src.opt()?,
            lower: src.opt()?,
            upper: src.opt()?,
        },
        4 => PostsolveData::Aggregated {
            keep: ix.col(src)?,
            remove: ix.col(src)?,
            scale: src.real()?,
            keep_lower: src.opt()?,
            keep_upper: src.opt()?,
            remove_lower: src.opt()?,
            remove_upper: src.opt()?,
            integral: src.flag()?,
        },
        _ => PostsolveData::Replaced {
            col: ix.col(src)?,
            by: ix.col(src)?,
            factor: src.real()?,
            offset: src.real()?,
        },
    })
}

fn get_record<R: Real>(src: &mut dyn Source<R>) -> Result<PostsolveRecord<R>, IoError> {
    let orig_nrows = src.index()?;
    let orig_ncols = src.index()?;
    let ix = Indices {
        nrows: orig_nrows,
        ncols: orig_ncols,
    };
    let objective_offset = src.real()?;
    let objective = get_list(src, |s| s.real())?;
    let lower = get_list(src, |s| s.opt())?;
    let upper = get_list(src, |s| s.opt())?;
    let integral = get_list(src, |s| s.flag())?;
    let col_names = get_list(src, |s| s.text())?;
    if [objective.len(), lower.len(), upper.len(), integral.len(), col_names.len()]
        .iter()
        .any(|&n| n != orig_ncols)
    {
        return Err(IoError::format("column data does not match the column count"));
    }
    let col_map = get_list(src, |s| ix.col(s))?;
    let row_map = get_list(src, |s| ix.row(s))?;
    let n = src.index()?;
    let mut entries = Vec::new();
    for _ in 0..n {
        let step = get_step(src, &ix)?;
        let data = get_data(src, &ix)?;
        entries.push(RecordEntry { step, data });
    }
    Ok(PostsolveRecord {
        orig_nrows,
        orig_ncols,
        objective,
        objective_offset,
        lower,
        upper,
        integral,
        col_names,
        col_map,
        row_map,
        entries,
    })
}

pub fn write_record<R: Real>(rec: &PostsolveRecord<R>, format: RecordFormat) -> Vec<u8> {
    match format {
        RecordFormat::Binary => {
            let mut payload = BinarySink(Vec::new());
            put_record(&mut payload, rec);
            let mut out = Vec::with_capacity(payload.0.len() + 17);
            out.extend_from_slice(MAGIC);
            out.extend_from_slice(&RECORD_VERSION.to_le_bytes());
            out.push(mode_byte(R::MODE));
            out.extend_from_slice(&(payload.0.len() as u64).to_le_bytes());
            out.extend_from_slice(&payload.0);
            out
        }
        RecordFormat::Text => {
            let mut sink = TextSink {
                out: format!("{TEXT_MAGIC} {RECORD_VERSION} {}\n", R::MODE.name()),
                fresh_line: true,
            };
            put_record(&mut sink, rec);
            sink.out.into_bytes()
        }
    }
}

struct Header<'a> {
    format: RecordFormat,
    mode: NumericMode,
    body: &'a [u8],
}

fn header(bytes: &[u8]) -> Result<Header<'_>, IoError> {
    if let Some(rest) = bytes.strip_prefix(MAGIC.as_slice()) {
        if rest.starts_with(b"-TEXT") {
            let text = std::str::from_utf8(bytes).map_err(|_| IoError::format("text record is not UTF-8"))?;
            let (first, body) = text.split_once('\n').unwrap_or((text, ""));
            let fields: Vec<&str> = first.split_whitespace().collect();
            let [_, version, mode] = fields[..] else {
                return Err(IoError::format("malformed text record header"));
            };
            if version != RECORD_VERSION.to_string() {
                return Err(IoError::format(format!("unsupported record version {version}")));
            }
            let mode = mode.parse().map_err(IoError::Format)?;
            return Ok(Header {
                format: RecordFormat::Text,
                mode,
                body: body.as_bytes(),
            });
        }
        if rest.len() < 13 {
            return Err(IoError::format("record header ends early"));
        }
        let version = u32::from_le_bytes(rest[..4].try_into().expect("four bytes"));
        if version != RECORD_VERSION {
            return Err(IoError::format(format!("unsupported record version {version}")));
        }
        let mode = match rest[4] {
            0 => NumericMode::Float64,
            1 => NumericMode::Rational,
            b => return Err(IoError::format(format!("unknown numeric mode byte {b}"))),
        };
        let len = u64::from_le_bytes(rest[5..13].try_into().expect("eight bytes"));
        let body = &rest[13..];
        if body.len() as u64 != len {
            return Err(IoError::format(format!("payload has {} bytes, header says {len}", body.len())));
        }
        return Ok(Header {
            format: RecordFormat::Binary,
            mode,
            body,
        });
    }
    Err(IoError::format("not a postsolve record"))
}

/// Arithmetic the record was written with.
pub fn record_mode(bytes: &[u8]) -> Result<NumericMode, IoError> {
    Ok(header(bytes)?.mode)
}

/// Reads either layout.
pub fn read_record<R: Real>(bytes: &[u8]) -> Result<PostsolveRecord<R>, IoError> {
    let h = header(bytes)?;
    if h.mode != R::MODE {
        return Err(IoError::format(format!(
            "record was written in {} mode, reading in {} mode",
            h.mode.name(),
            R::MODE.name()
        )));
    }
    match h.format {
        RecordFormat::Binary => {
            let mut src = BinarySource(h.body);
            let rec = get_record(&mut src)?;
            if !src.0.is_empty() {
                return Err(IoError::format("trailing bytes after the record"));
            }
            Ok(rec)
        }
        RecordFormat::Text => {
            let text = std::str::from_utf8(h.body).map_err(|_| IoError::format("text record is not UTF-8"))?;
            let mut src = TextSource(text.split_whitespace());
            let rec = get_record(&mut src)?;
            if let Some(t) = src.0.next() {
                return Err(IoError::format(format!("unexpected token '{t}' after the record")));
            }
            Ok(rec)
        }
    }
}
