//! Fixed-format MPS export.
//!
//! Emits the classic fixed-layout sections `NAME`, `ROWS`, `COLUMNS`, `RHS`,
//! `BOUNDS`, `ENDATA` with fields at character columns 2-3, 5-12, 15-22,
//! 25-36, and 40-47. One coefficient is written per `COLUMNS` line. Row
//! names are `OBJ` and `C0000001..`; variable names come from the program
//! when they fit the 8-character field and are `X0000001..` otherwise.

use super::{LinearProgram, Relation};
use crate::{Error, Result};

/// Formats a number into at most 12 characters.
fn num(v: f64) -> String {
    let plain = format!("{v}");
    if plain.len() <= 12 {
        plain
    } else {
        format!("{v:.5e}")
    }
}

/// Writes one fixed-format line with fields starting at columns 2, 5, 15,
/// 25, and 40 (1-indexed).
fn line(f1: &str, f2: &str, f3: &str, f4: &str) -> String {
    let mut s = String::new();
    s.push(' ');
    s.push_str(&format!("{f1:<2}"));
    s.push(' ');
    s.push_str(&format!("{f2:<8}"));
    if f3.is_empty() {
        return s.trim_end().to_string();
    }
    s.push_str("  ");
    s.push_str(&format!("{f3:<8}"));
    s.push_str("  ");
    s.push_str(&format!("{f4:<12}"));
    s.trim_end().to_string()
}

/// Renders the program in fixed-format MPS. The objective sense is `min`;
/// consumers that assume maximization must negate the objective row.
pub fn to_mps(lp: &LinearProgram, name: &str) -> Result<String> {
    lp.validate()?;
    let var_name = |j: usize| -> String {
        if let Some(names) = &lp.var_names {
            let n = &names[j];
            if n.len() <= 8 && n.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
                return n.clone();
            }
        }
        format!("X{:07}", j + 1)
    };
    let row_name = |i: usize| format!("C{:07}", i + 1);

    let mut out = String::new();
    out.push_str(&format!("NAME          {name}\n"));
    out.push_str("ROWS\n");
    out.push_str(" N  OBJ\n");
    for (i, c) in lp.constraints.iter().enumerate() {
        let tag = match c.relation {
            Relation::Le => "L",
            Relation::Eq => "E",
            Relation::Ge => "G",
        };
        out.push_str(&line(tag, &row_name(i), "", ""));
        out.push('\n');
    }
    out.push_str("COLUMNS\n");
    for j in 0..lp.num_vars {
        let vn = var_name(j);
        if lp.objective[j] != 0.0 {
            out.push_str(&line("", &vn, "OBJ", &num(lp.objective[j])));
            out.push('\n');
        }
        for (i, c) in lp.constraints.iter().enumerate() {
            for &(k, a) in &c.coeffs {
                if k == j && a != 0.0 {
                    out.push_str(&line("", &vn, &row_name(i), &num(a)));
                    out.push('\n');
                }
            }
        }
    }
    out.push_str("RHS\n");
    for (i, c) in lp.constraints.iter().enumerate() {
        if c.rhs != 0.0 {
            out.push_str(&line("", "RHS", &row_name(i), &num(c.rhs)));
            out.push('\n');
        }
    }
    out.push_str("BOUNDS\n");
    for j in 0..lp.num_vars {
        let b = lp.bounds[j];
        let vn = var_name(j);
        if !b.lower.is_finite() && !b.upper.is_finite() {
            out.push_str(&line("FR", "BND", &vn, ""));
            out.push('\n');
            continue;
        }
        if !b.lower.is_finite() {
            out.push_str(&line("MI", "BND", &vn, ""));
            out.push('\n');
        } else if b.lower != 0.0 {
            out.push_str(&line("LO", "BND", &vn, &num(b.lower)));
            out.push('\n');
        }
        if b.upper.is_finite() {
            out.push_str(&line("UP", "BND", &vn, &num(b.upper)));
            out.push('\n');
        }
    }
    out.push_str("ENDATA\n");
    if out.contains("nan") || out.contains("inf") {
        return Err(Error::Numerical("non-finite value in MPS export".into()));
    }
    Ok(out)
}
