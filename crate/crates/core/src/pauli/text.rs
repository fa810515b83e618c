//! Line-oriented operator files.
//!
//! One operator per line, written as whitespace-separated `coeff*STRING`
//! terms, e.g. `-0.7853981633974483*IZZ 0.7853981633974483*ZZI`. A
//! coefficient is a real number, an imaginary number with an `i` suffix
//! (`0.5i`), or a `(re,im)` pair. `#` starts a comment.

use num_complex::Complex64;

use super::sum::PauliSum;
use super::term::PauliTerm;
use crate::error::{Error, Result};

pub(crate) fn format_coeff(c: Complex64) -> String {
    if c.im == 0.0 {
        format!("{}", c.re)
    } else if c.re == 0.0 {
        format!("{}i", c.im)
    } else {
        format!("({},{})", c.re, c.im)
    }
}

pub(crate) fn parse_coeff(s: &str) -> Result<Complex64> {
    let s = s.trim();
    let bad = || Error::InvalidArgument(format!("invalid coefficient {s:?}"));
    if let Some(inner) = s.strip_prefix('(').and_then(|r| r.strip_suffix(')')) {
        let (re, im) = inner.split_once(',').ok_or_else(bad)?;
        let re = re.trim().parse::<f64>().map_err(|_| bad())?;
        let im = im.trim().parse::<f64>().map_err(|_| bad())?;
        return Ok(Complex64::new(re, im));
    }
    if let Some(im) = s.strip_suffix('i') {
        let im = match im {
            "" | "+" => 1.0,
            "-" => -1.0,
            v => v.parse::<f64>().map_err(|_| bad())?,
        };
        return Ok(Complex64::new(0.0, im));
    }
    s.parse::<f64>()
        .map(|re| Complex64::new(re, 0.0))
        .map_err(|_| bad())
}

pub fn format_operator(op: &PauliSum) -> String {
    if op.is_zero() {
        return format!("0*{}", "I".repeat(op.n_qubits()));
    }
    op.terms()
        .map(|(s, c)| format!("{}*{}", format_coeff(c), s.to_string_n(op.n_qubits())))
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn parse_operator(line: &str) -> Result<PauliSum> {
    let mut terms = Vec::new();
    for tok in line.split_whitespace() {
        terms.push(tok.parse::<PauliTerm>()?);
    }
    let first = terms
        .first()
        .ok_or_else(|| Error::InvalidArgument("empty operator".into()))?;
    PauliSum::from_terms(first.n_qubits(), terms)
}

/// Writes a list of operators, one per line, after an optional header comment.
pub fn format_operators(header: &str, ops: &[PauliSum]) -> String {
    let mut out = String::new();
    for line in header.lines() {
        out.push_str("# ");
        out.push_str(line);
        out.push('\n');
    }
    for op in ops {
        out.push_str(&format_operator(op));
        out.push('\n');
    }
    out
}

pub fn parse_operators(text: &str) -> Result<Vec<PauliSum>> {
    let mut ops: Vec<PauliSum> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let op = parse_operator(line).map_err(|e| Error::Parse {
            line: i + 1,
            msg: e.to_string(),
        })?;
        if let Some(first) = ops.first() {
            if first.n_qubits() != op.n_qubits() {
                return Err(Error::Parse {
                    line: i + 1,
                    msg: format!(
                        "operator acts on {} qubits, expected {}",
                        op.n_qubits(),
                        first.n_qubits()
                    ),
                });
            }
        }
        ops.push(op);
    }
    Ok(ops)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coefficients_parse() {
        assert_eq!(parse_coeff("-0.25").unwrap(), Complex64::new(-0.25, 0.0));
        assert_eq!(parse_coeff("2i").unwrap(), Complex64::new(0.0, 2.0));
        assert_eq!(parse_coeff("-i").unwrap(), Complex64::new(0.0, -1.0));
        assert_eq!(parse_coeff("(1,-2)").unwrap(), Complex64::new(1.0, -2.0));
        assert!(parse_coeff("abc").is_err());
    }

    #[test]
    fn file_with_comments() {
        let text = "# generators\n-0.7853981633974483*II 0.7853981633974483*ZI # cz\n\n1*XI\n";
        let ops = parse_operators(text).unwrap();
        assert_eq!(ops.len(), 2);
        assert_eq!(ops[0].len(), 2);
        let again = parse_operators(&format_operators("x", &ops)).unwrap();
        assert_eq!(ops, again);
    }

    #[test]
    fn mixed_sizes_rejected() {
        let err = parse_operators("1*XI\n1*X\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
    }
}
