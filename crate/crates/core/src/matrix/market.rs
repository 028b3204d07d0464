//! Matrix Market coordinate format, the subset that shows up in sparse
//! matrix collections: `real`/`integer`/`pattern` values, `general` or
//! `symmetric` layout. Indices are 1-based on disk, 0-based in memory.

use super::CooMatrix;
use crate::error::{Error, Result};

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

#[derive(Clone, Copy, PartialEq)]
enum ValueKind {
    Real,
    Pattern,
}

#[derive(Clone, Copy, PartialEq)]
enum Symmetry {
    General,
    Symmetric,
}

/// Parses Matrix Market coordinate text. Symmetric inputs are expanded
/// (off-diagonal entries mirrored), pattern entries get value 1.0, and
/// duplicate coordinates are summed by canonicalization.
pub fn parse_matrix_market(text: &str) -> Result<CooMatrix> {
    let mut lines = text.lines().enumerate();

    let (_, header) = lines
        .next()
        .ok_or_else(|| parse_err(1, "empty input"))?;
    let fields: Vec<String> = header.split_whitespace().map(|f| f.to_lowercase()).collect();
    if fields.len() != 5 || fields[0] != "%%matrixmarket" {
        return Err(parse_err(1, "expected '%%MatrixMarket object format field symmetry'"));
    }
    if fields[1] != "matrix" || fields[2] != "coordinate" {
        return Err(parse_err(
            1,
            format!("unsupported object/format '{} {}'", fields[1], fields[2]),
        ));
    }
    let value_kind = match fields[3].as_str() {
        "real" | "integer" => ValueKind::Real,
        "pattern" => ValueKind::Pattern,
        other => return Err(parse_err(1, format!("unsupported value field '{other}'"))),
    };
    let symmetry = match fields[4].as_str() {
        "general" => Symmetry::General,
        "symmetric" => Symmetry::Symmetric,
        other => return Err(parse_err(1, format!("unsupported symmetry '{other}'"))),
    };

    // Size line: first non-comment, non-blank line after the banner.
    let mut size: Option<(usize, usize, usize, usize)> = None;
    for (idx, line) in &mut lines {
        let lineno = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('%') {
            continue;
        }
        let parts: Vec<&str> = trimmed.split_whitespace().collect();
        if parts.len() != 3 {
            return Err(parse_err(lineno, "size line must be 'rows cols nnz'"));
        }
        let mut nums = [0usize; 3];
        for (slot, part) in nums.iter_mut().zip(&parts) {
            *slot = part
                .parse()
                .map_err(|_| parse_err(lineno, format!("bad size value '{part}'")))?;
        }
        size = Some((nums[0], nums[1], nums[2], lineno));
        break;
    }
    let (num_rows, num_cols, nnz, _) =
        size.ok_or_else(|| parse_err(text.lines().count(), "missing size line"))?;

    let mut entries = Vec::with_capacity(nnz);
    let mut seen = 0usize;
    for (idx, line) in &mut lines {
        let lineno = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('%') {
            continue;
        }
        if seen == nnz {
            return Err(parse_err(lineno, format!("more than {nnz} declared entries")));
        }
        let parts: Vec<&str> = trimmed.split_whitespace().collect();
        let expected = match value_kind {
            ValueKind::Real => 3,
            ValueKind::Pattern => 2,
        };
        if parts.len() != expected {
            return Err(parse_err(
                lineno,
                format!("expected {expected} fields, got {}", parts.len()),
            ));
        }
        let r: usize = parts[0]
            .parse()
            .map_err(|_| parse_err(lineno, format!("bad row index '{}'", parts[0])))?;
        let c: usize = parts[1]
            .parse()
            .map_err(|_| parse_err(lineno, format!("bad column index '{}'", parts[1])))?;
        if r == 0 || r > num_rows || c == 0 || c > num_cols {
            return Err(parse_err(
                lineno,
                format!("index ({r}, {c}) outside declared {num_rows}x{num_cols}"),
            ));
        }
        let v = match value_kind {
            ValueKind::Real => parts[2]
                .parse::<f64>()
                .map_err(|_| parse_err(lineno, format!("bad value '{}'", parts[2])))?,
            ValueKind::Pattern => 1.0,
        };
        let (r, c) = (r - 1, c - 1);
        entries.push((r, c, v));
        if symmetry == Symmetry::Symmetric && r != c {
            entries.push((c, r, v));
        }
        seen += 1;
    }
    if seen != nnz {
        return Err(parse_err(
            text.lines().count(),
            format!("declared {nnz} entries, found {seen}"),
        ));
    }
    CooMatrix::new(num_rows, num_cols, entries)
}

/// Writes `coordinate real general` text. Values use Rust's shortest
/// round-trip float formatting, so write-then-parse reproduces the
/// matrix bit for bit.
pub fn write_matrix_market(m: &CooMatrix) -> String {
    let mut out = String::from("%%MatrixMarket matrix coordinate real general\n");
    out.push_str(&format!("{} {} {}\n", m.num_rows, m.num_cols, m.nnz()));
    for &(r, c, v) in &m.entries {
        out.push_str(&format!("{} {} {}\n", r + 1, c + 1, v));
    }
    out
}
