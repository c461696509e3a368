//! Plain-text QUBO serialization.
//!
//! One term per line: `i i coeff` for linear terms, `i j coeff` (i < j) for
//! quadratic terms, 0-based dense ids. Lines starting with `#` are comments;
//! the offset travels in a `# offset <value>` header and the variable count
//! in `# vars <n>`. Coefficients are written with 17 significant digits so a
//! write → read round trip is bit-exact.

use super::Qubo;
use crate::error::{Error, Result};
use std::fmt::Write as _;

pub fn write_qubo(q: &Qubo) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# vars {}", q.num_vars());
    let _ = writeln!(out, "# offset {:.16e}", q.offset());
    for (i, &c) in q.linear().iter().enumerate() {
        if c != 0.0 {
            let _ = writeln!(out, "{i} {i} {c:.16e}");
        }
    }
    for (&(i, j), &c) in q.quadratic() {
        let _ = writeln!(out, "{i} {j} {c:.16e}");
    }
    out
}

pub fn read_qubo(text: &str) -> Result<Qubo> {
    let mut declared_vars: Option<usize> = None;
    let mut offset = 0.0;
    let mut terms: Vec<(usize, usize, f64)> = Vec::new();
    let mut max_id = 0usize;

    for (ln, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            let mut it = rest.split_whitespace();
            match it.next() {
                Some("offset") => {
                    let v = it
                        .next()
                        .ok_or_else(|| Error::invalid(format!("line {}: offset missing value", ln + 1)))?;
                    offset = v
                        .parse()
                        .map_err(|_| Error::invalid(format!("line {}: bad offset '{v}'", ln + 1)))?;
                }
                Some("vars") => {
                    let v = it
                        .next()
                        .ok_or_else(|| Error::invalid(format!("line {}: vars missing value", ln + 1)))?;
                    declared_vars = Some(v.parse().map_err(|_| {
                        Error::invalid(format!("line {}: bad vars '{v}'", ln + 1))
                    })?);
                }
                _ => {} // ordinary comment
            }
            continue;
        }
        let mut it = line.split_whitespace();
        let (i, j, c) = (it.next(), it.next(), it.next());
        let (i, j, c) = match (i, j, c, it.next()) {
            (Some(i), Some(j), Some(c), None) => (i, j, c),
            _ => {
                return Err(Error::invalid(format!(
                    "line {}: expected 'i j coeff', got '{line}'",
                    ln + 1
                )))
            }
        };
        let i: usize = i
            .parse()
            .map_err(|_| Error::invalid(format!("line {}: bad index '{i}'", ln + 1)))?;
        let j: usize = j
            .parse()
            .map_err(|_| Error::invalid(format!("line {}: bad index '{j}'", ln + 1)))?;
        let c: f64 = c
            .parse()
            .map_err(|_| Error::invalid(format!("line {}: bad coefficient '{c}'", ln + 1)))?;
        max_id = max_id.max(i).max(j);
        terms.push((i, j, c));
    }

    let n = declared_vars.unwrap_or(if terms.is_empty() { 0 } else { max_id + 1 });
    if !terms.is_empty() && max_id >= n {
        return Err(Error::invalid(format!(
            "term references variable {max_id} but model declares {n} vars"
        )));
    }
    let mut q = Qubo::new(n);
    q.add_offset(offset);
    for (i, j, c) in terms {
        if i == j {
            q.add_linear(i, c);
        } else {
            q.add_quadratic(i, j, c);
        }
    }
    Ok(q)
}
