//! Text formats: "polygon file v1" for geometries and the group-table file
//! used for coset builds.
//!
//! Polygon file:
//!
//! ```text
//! gon 4          # claimed n, or 0 for no claim
//! points 15
//! lines 15
//! flags
//! 0 0
//! 0 1
//! ...
//! ```
//!
//! Group file:
//!
//! ```text
//! order 6
//! 0 1 2 3 4 5
//! ...            # N rows of N indices
//! A: 0 2
//! B: 0 1
//! ```
//!
//! In both, `#` starts a comment and blank lines are ignored.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::group::FiniteGroupTable;
use crate::incidence::IncidenceStructure;

/// Non-empty lines with comments stripped, paired with their 1-based line number.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let line = raw.split('#').next().unwrap_or("").trim();
        (!line.is_empty()).then_some((i + 1, line))
    })
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

/// Parses a `<keyword> <value>` header line; `flags` takes no value.
fn header(line: Option<(usize, &str)>, keyword: &str, after: usize) -> Result<(usize, usize)> {
    let (no, line) = line.ok_or_else(|| parse_err(after, format!("expected `{keyword}`")))?;
    let mut parts = line.split_whitespace();
    if parts.next() != Some(keyword) {
        return Err(parse_err(no, format!("expected `{keyword}`, got `{line}`")));
    }
    let value = match parts.next() {
        _ if keyword == "flags" => 0,
        Some(v) => v
            .parse()
            .map_err(|_| parse_err(no, format!("`{keyword}` needs a nonnegative integer")))?,
        None => return Err(parse_err(no, format!("`{keyword}` needs a value"))),
    };
    if parts.next().is_some() {
        return Err(parse_err(no, format!("trailing input after `{keyword}`")));
    }
    Ok((no, value))
}

pub fn parse_polygon(text: &str) -> Result<IncidenceStructure> {
    let mut lines = content_lines(text);
    let (no, gon) = header(lines.next(), "gon", 1)?;
    let (no, points) = header(lines.next(), "points", no)?;
    let (no, line_count) = header(lines.next(), "lines", no)?;
    if points == 0 || line_count == 0 {
        return Err(parse_err(no, "point and line counts must be positive"));
    }
    header(lines.next(), "flags", no)?;

    let mut seen = BTreeSet::new();
    let mut flags = Vec::new();
    for (no, line) in lines {
        let fields: Vec<&str> = line.split_whitespace().collect();
        let [p, l] = fields[..] else {
            return Err(parse_err(no, "expected `<point-id> <line-id>`"));
        };
        let p: usize = p
            .parse()
            .map_err(|_| parse_err(no, format!("bad point id `{p}`")))?;
        let l: usize = l
            .parse()
            .map_err(|_| parse_err(no, format!("bad line id `{l}`")))?;
        if p >= points {
            return Err(parse_err(no, format!("point id {p} out of range (points {points})")));
        }
        if l >= line_count {
            return Err(parse_err(no, format!("line id {l} out of range (lines {line_count})")));
        }
        if !seen.insert((p, l)) {
            return Err(parse_err(no, format!("duplicate flag {p} {l}")));
        }
        flags.push((p, l));
    }
    Ok(IncidenceStructure::new(points, line_count, flags)?.with_gon_claim(Some(gon)))
}

pub fn write_polygon(s: &IncidenceStructure) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "gon {}", s.gon_claim().unwrap_or(0));
    let _ = writeln!(out, "points {}", s.point_count());
    let _ = writeln!(out, "lines {}", s.line_count());
    out.push_str("flags\n");
    for f in s.flags() {
        let _ = writeln!(out, "{} {}", f.point, f.line);
    }
    out
}

pub fn load(path: impl AsRef<Path>) -> Result<IncidenceStructure> {
    parse_polygon(&std::fs::read_to_string(path)?)
}

pub fn save(s: &IncidenceStructure, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, write_polygon(s))?;
    Ok(())
}

/// A group table plus the two subgroups a coset build uses.
#[derive(Clone, Debug)]
pub struct GroupFile {
    pub group: FiniteGroupTable,
    pub a: Vec<usize>,
    pub b: Vec<usize>,
}

pub fn parse_group_file(text: &str) -> Result<GroupFile> {
    let lines: Vec<(usize, &str)> = content_lines(text).collect();
    let mut iter = lines.iter().copied();
    let (no, header) = iter.next().ok_or_else(|| parse_err(1, "expected `order N`"))?;
    let order: usize = header
        .strip_prefix("order")
        .and_then(|r| r.trim().parse().ok())
        .filter(|&n| n > 0)
        .ok_or_else(|| parse_err(no, "expected `order N` with N > 0"))?;
    let mut table = Vec::with_capacity(order);
    let mut last = no;
    for _ in 0..order {
        let (no, line) = iter
            .next()
            .ok_or_else(|| parse_err(last, format!("expected {order} table rows")))?;
        last = no;
        let row: Vec<usize> = line
            .split_whitespace()
            .map(|x| x.parse().map_err(|_| parse_err(no, format!("bad table entry `{x}`"))))
            .collect::<Result<_>>()?;
        if row.len() != order {
            return Err(parse_err(no, format!("row has {} entries, expected {order}", row.len())));
        }
        table.push(row);
    }
    let group = FiniteGroupTable::new(table).map_err(|e| parse_err(last, e.to_string()))?;
    let mut subgroup = |name: &str| -> Result<Vec<usize>> {
        let (no, line) = iter
            .next()
            .ok_or_else(|| parse_err(last, format!("expected `{name}: ...`")))?;
        let rest = line
            .strip_prefix(name)
            .and_then(|r| r.trim_start().strip_prefix(':'))
            .ok_or_else(|| parse_err(no, format!("expected `{name}: ...`")))?;
        last = no;
        rest.split_whitespace()
            .map(|x| x.parse().map_err(|_| parse_err(no, format!("bad element `{x}`"))))
            .collect()
    };
    let a = subgroup("A")?;
    let b = subgroup("B")?;
    if let Some((no, _)) = iter.next() {
        return Err(parse_err(no, "unexpected input after `B:`"));
    }
    Ok(GroupFile { group, a, b })
}

pub fn write_group_file(file: &GroupFile) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "order {}", file.group.order());
    for row in file.group.table() {
        let cells: Vec<String> = row.iter().map(ToString::to_string).collect();
        let _ = writeln!(out, "{}", cells.join(" "));
    }
    let join = |v: &[usize]| v.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ");
    let _ = writeln!(out, "A: {}", join(&file.a));
    let _ = writeln!(out, "B: {}", join(&file.b));
    out
}
