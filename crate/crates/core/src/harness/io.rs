//! Edge-list and label files.
//!
//! Edge list: a header line `n k`, then one `i j` pair per line with
//! 0-based `i < j`, each unordered pair at most once. Label file: one 0-based
//! label per line. Blank lines are ignored.

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Result, SbmError};
use crate::model::{AdjacencyMatrix, HardAssignment};

fn parse_error(line: usize, message: impl Into<String>) -> SbmError {
    SbmError::Parse { line, message: message.into() }
}

fn parse_pair(text: &str, line: usize) -> Result<(usize, usize)> {
    let mut fields = text.split_whitespace();
    let mut next = |what: &str| -> Result<usize> {
        let field = fields.next().ok_or_else(|| parse_error(line, format!("missing {what}")))?;
        field.parse().map_err(|_| parse_error(line, format!("{what} `{field}` is not a non-negative integer")))
    };
    let pair = (next("first field")?, next("second field")?);
    if fields.next().is_some() {
        return Err(parse_error(line, "expected exactly two fields"));
    }
    Ok(pair)
}

/// Parses an edge list, returning the graph and the community count.
pub fn parse_edgelist<R: BufRead>(reader: R) -> Result<(AdjacencyMatrix, usize)> {
    let mut header = None;
    let mut edges = Vec::new();
    let mut seen = HashSet::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let (x, y) = parse_pair(&line, line_no)?;
        let Some((n, _)) = header else {
            header = Some((x, y));
            continue;
        };
        if x == y {
            return Err(parse_error(line_no, format!("self-loop `{x} {y}`")));
        }
        if x > y {
            return Err(parse_error(line_no, format!("expected i < j, got `{x} {y}`")));
        }
        if y >= n {
            return Err(parse_error(line_no, format!("node {y} out of range for n = {n}")));
        }
        if !seen.insert((x, y)) {
            return Err(parse_error(line_no, format!("duplicate edge `{x} {y}`")));
        }
        edges.push((x, y));
    }
    let (n, k) = header.ok_or_else(|| parse_error(1, "missing `n k` header"))?;
    Ok((AdjacencyMatrix::from_edges(n, edges)?, k))
}

pub fn read_edgelist(path: &Path) -> Result<(AdjacencyMatrix, usize)> {
    parse_edgelist(BufReader::new(File::open(path)?))
}

pub fn write_edgelist_to<W: Write>(out: &mut W, a: &AdjacencyMatrix, k: usize) -> Result<()> {
    writeln!(out, "{} {}", a.n(), k)?;
    for (i, j) in a.edges() {
        writeln!(out, "{i} {j}")?;
    }
    Ok(())
}

pub fn write_edgelist(path: &Path, a: &AdjacencyMatrix, k: usize) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    write_edgelist_to(&mut out, a, k)?;
    out.flush()?;
    Ok(())
}

/// Parses a label file. Without `k`, the community count is max label + 1.
pub fn parse_labels<R: BufRead>(reader: R, k: Option<usize>) -> Result<HardAssignment> {
    let mut labels = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let text = line.trim();
        if text.is_empty() {
            continue;
        }
        let label: usize = text
            .parse()
            .map_err(|_| parse_error(idx + 1, format!("label `{text}` is not a non-negative integer")))?;
        if let Some(k) = k {
            if label >= k {
                return Err(parse_error(idx + 1, format!("label {label} outside 0..{k}")));
            }
        }
        labels.push(label);
    }
    let k = k.unwrap_or_else(|| labels.iter().max().map_or(1, |m| m + 1));
    HardAssignment::from_labels(labels, k)
}

pub fn read_labels(path: &Path, k: Option<usize>) -> Result<HardAssignment> {
    parse_labels(BufReader::new(File::open(path)?), k)
}

pub fn write_labels_to<W: Write>(out: &mut W, z: &HardAssignment) -> Result<()> {
    for label in z.labels() {
        writeln!(out, "{label}")?;
    }
    Ok(())
}

pub fn write_labels(path: &Path, z: &HardAssignment) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    write_labels_to(&mut out, z)?;
    out.flush()?;
    Ok(())
}
