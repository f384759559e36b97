//! Fixed-column MPS export and import.
//!
//! Data fields start at columns 2-3, 5-12, 15-22, 25-36, 40-47 and 50-61
//! (1-based). Integral variables are wrapped in INTORG/INTEND markers, the
//! objective row is named COST, and every variable gets explicit bounds so
//! no reader-side defaults apply.

use crate::error::{Error, Result};
use crate::model::{LinearModel, Relation};
use crate::scalar::Scalar;
use std::io::{BufRead, Write};

/// 1-based start columns of the six data fields.
const FIELD_COLS: [usize; 6] = [2, 5, 15, 25, 40, 50];

fn data_line(fields: [&str; 6]) -> String {
    let mut line = String::new();
    for (start, field) in FIELD_COLS.iter().zip(fields) {
        if field.is_empty() {
            continue;
        }
        while line.len() < start - 1 {
            line.push(' ');
        }
        line.push_str(field);
        line.push(' ');
    }
    line.truncate(line.trim_end().len());
    line
}

/// Formats a value to at most 12 characters, preferring the shortest exact
/// representation so that rational data round-trips bit-identically.
fn fmt_val(v: f64) -> String {
    let short = format!("{v}");
    if short.len() <= 12 {
        return short;
    }
    for prec in (0..=7).rev() {
        let s = format!("{v:.prec$e}");
        if s.len() <= 12 {
            return s;
        }
    }
    format!("{v:e}")
}

pub fn write_mps<F: Scalar>(
    model: &LinearModel<F>,
    name: &str,
    w: &mut impl Write,
) -> Result<()> {
    model.validate()?;
    writeln!(w, "NAME          {name}")?;
    writeln!(w, "ROWS")?;
    writeln!(w, "{}", data_line(["N", "COST", "", "", "", ""]))?;
    for (i, row) in model.rows.iter().enumerate() {
        let rel = match row.relation {
            Relation::Eq => "E",
            Relation::Le => "L",
        };
        writeln!(w, "{}", data_line([rel, &model.row_names[i], "", "", "", ""]))?;
    }

    // Column-major view of the constraint matrix.
    let mut cols: Vec<Vec<(usize, F)>> = vec![Vec::new(); model.num_vars()];
    for (i, row) in model.rows.iter().enumerate() {
        for &(j, a) in &row.coeffs {
            cols[j].push((i, a));
        }
    }
    writeln!(w, "COLUMNS")?;
    let mut in_int = false;
    for j in 0..model.num_vars() {
        if model.integral[j] != in_int {
            in_int = model.integral[j];
            let flag = if in_int { "'INTORG'" } else { "'INTEND'" };
            writeln!(w, "{}", data_line(["", "MARKER", "'MARKER'", "", flag, ""]))?;
        }
        let mut entries: Vec<(&str, String)> = Vec::new();
        let obj = model.objective[j];
        if obj != F::zero() {
            entries.push(("COST", fmt_val(obj.to_f64_lossy())));
        }
        for &(i, a) in &cols[j] {
            entries.push((&model.row_names[i], fmt_val(a.to_f64_lossy())));
        }
        if entries.is_empty() {
            // Keep the variable visible to readers.
            entries.push(("COST", fmt_val(0.0)));
        }
        for chunk in entries.chunks(2) {
            let (r2, v2) = chunk.get(1).map(|(r, v)| (*r, v.as_str())).unwrap_or(("", ""));
            writeln!(
                w,
                "{}",
                data_line(["", &model.var_names[j], chunk[0].0, &chunk[0].1, r2, v2])
            )?;
        }
    }
    if in_int {
        writeln!(w, "{}", data_line(["", "MARKER", "'MARKER'", "", "'INTEND'", ""]))?;
    }

    writeln!(w, "RHS")?;
    for (i, row) in model.rows.iter().enumerate() {
        if row.rhs != F::zero() {
            let v = fmt_val(row.rhs.to_f64_lossy());
            writeln!(w, "{}", data_line(["", "RHS", &model.row_names[i], &v, "", ""]))?;
        }
    }

    writeln!(w, "BOUNDS")?;
    for j in 0..model.num_vars() {
        let (lo, hi) = model.bounds[j];
        let name = &model.var_names[j];
        if lo == hi {
            let v = fmt_val(lo.to_f64_lossy());
            writeln!(w, "{}", data_line(["FX", "BND", name, &v, "", ""]))?;
        } else {
            if lo.is_infinite() {
                writeln!(w, "{}", data_line(["MI", "BND", name, "", "", ""]))?;
            } else {
                let v = fmt_val(lo.to_f64_lossy());
                writeln!(w, "{}", data_line(["LO", "BND", name, &v, "", ""]))?;
            }
            if hi.is_infinite() {
                writeln!(w, "{}", data_line(["PL", "BND", name, "", "", ""]))?;
            } else {
                let v = fmt_val(hi.to_f64_lossy());
                writeln!(w, "{}", data_line(["UP", "BND", name, &v, "", ""]))?;
            }
        }
    }
    writeln!(w, "ENDATA")?;
    Ok(())
}

pub fn write_mps_file<F: Scalar>(
    model: &LinearModel<F>,
    name: &str,
    path: impl AsRef<std::path::Path>,
) -> Result<()> {
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_mps(model, name, &mut w)
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Section {
    None,
    Rows,
    Columns,
    Rhs,
    Bounds,
    Done,
}

fn parse_val<F: Scalar>(tok: &str) -> Result<F> {
    tok.parse::<f64>()
        .map(F::from_f64_lossy)
        .map_err(|_| Error::Mps(format!("bad numeric field {tok:?}")))
}

pub fn read_mps<F: Scalar>(r: impl BufRead) -> Result<LinearModel<F>> {
    let mut model = LinearModel::new();
    let mut section = Section::None;
    let mut row_ids: std::collections::HashMap<String, usize> = Default::default();
    let mut var_ids: std::collections::HashMap<String, usize> = Default::default();
    let mut in_int = false;
    let inf = F::infinity();
    for line in r.lines() {
        let line = line?;
        if line.trim().is_empty() || line.starts_with('*') {
            continue;
        }
        if !line.starts_with(' ') {
            let header = line.split_whitespace().next().unwrap_or("");
            section = match header {
                "NAME" => section,
                "ROWS" => Section::Rows,
                "COLUMNS" => Section::Columns,
                "RHS" => Section::Rhs,
                "RANGES" => return Err(Error::Mps("RANGES not supported".into())),
                "BOUNDS" => Section::Bounds,
                "ENDATA" => Section::Done,
                other => return Err(Error::Mps(format!("unknown section {other:?}"))),
            };
            continue;
        }
        let tok: Vec<&str> = line.split_whitespace().collect();
        match section {
            Section::Rows => {
                let [rel, name] = tok[..] else {
                    return Err(Error::Mps(format!("bad ROWS line {line:?}")));
                };
                match rel {
                    "N" => {
                        if name != "COST" {
                            return Err(Error::Mps(format!("objective row {name:?}, want COST")));
                        }
                    }
                    "E" | "L" | "G" => {
                        let relation = match rel {
                            "E" => Relation::Eq,
                            "L" => Relation::Le,
                            _ => return Err(Error::Mps("G rows not supported".into())),
                        };
                        let id = model.add_row(name, relation, Vec::new(), F::zero());
                        row_ids.insert(name.to_string(), id);
                    }
                    other => return Err(Error::Mps(format!("bad row type {other:?}"))),
                }
            }
            Section::Columns => {
                if tok.len() >= 3 && tok[1] == "'MARKER'" {
                    match *tok.last().unwrap() {
                        "'INTORG'" => in_int = true,
                        "'INTEND'" => in_int = false,
                        other => return Err(Error::Mps(format!("bad marker {other:?}"))),
                    }
                    continue;
                }
                if tok.len() != 3 && tok.len() != 5 {
                    return Err(Error::Mps(format!("bad COLUMNS line {line:?}")));
                }
                let var = *var_ids.entry(tok[0].to_string()).or_insert_with(|| {
                    model.add_var(tok[0], F::zero(), F::zero(), inf, in_int)
                });
                for pair in tok[1..].chunks(2) {
                    let value: F = parse_val(pair[1])?;
                    if pair[0] == "COST" {
                        model.objective[var] = value;
                    } else {
                        let &row = row_ids
                            .get(pair[0])
                            .ok_or_else(|| Error::Mps(format!("unknown row {:?}", pair[0])))?;
                        model.rows[row].coeffs.push((var, value));
                    }
                }
            }
            Section::Rhs => {
                if tok.len() != 3 && tok.len() != 5 {
                    return Err(Error::Mps(format!("bad RHS line {line:?}")));
                }
                for pair in tok[1..].chunks(2) {
                    let &row = row_ids
                        .get(pair[0])
                        .ok_or_else(|| Error::Mps(format!("unknown row {:?}", pair[0])))?;
                    model.rows[row].rhs = parse_val(pair[1])?;
                }
            }
            Section::Bounds => {
                let kind = tok[0];
                let var = *var_ids
                    .get(tok[2])
                    .ok_or_else(|| Error::Mps(format!("unknown variable {:?}", tok[2])))?;
                let (lo, hi) = &mut model.bounds[var];
                match kind {
                    "UP" => *hi = parse_val(tok[3])?,
                    "LO" => *lo = parse_val(tok[3])?,
                    "FX" => {
                        let v = parse_val(tok[3])?;
                        *lo = v;
                        *hi = v;
                    }
                    "BV" => {
                        *lo = F::zero();
                        *hi = F::one();
                        model.integral[var] = true;
                    }
                    "MI" => *lo = -inf,
                    "PL" => *hi = inf,
                    other => return Err(Error::Mps(format!("bad bound type {other:?}"))),
                }
            }
            Section::None | Section::Done => {
                return Err(Error::Mps(format!("data outside a section: {line:?}")));
            }
        }
    }
    if section != Section::Done {
        return Err(Error::Mps("missing ENDATA".into()));
    }
    model.validate()?;
    Ok(model)
}

pub fn read_mps_file<F: Scalar>(path: impl AsRef<std::path::Path>) -> Result<LinearModel<F>> {
    read_mps(std::io::BufReader::new(std::fs::File::open(path)?))
}

/// Writes a solution as one `name value` pair per line.
pub fn write_solution<F: Scalar>(
    model: &LinearModel<F>,
    x: &[F],
    w: &mut impl Write,
) -> Result<()> {
    for (name, &v) in model.var_names.iter().zip(x) {
        writeln!(w, "{name} {v}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_model() -> LinearModel {
        let mut m = LinearModel::new();
        let a = m.add_var("yR_0", 2.5, 0.0, 1.0, true);
        let b = m.add_var("yB_0", -0.125, 0.0, f64::INFINITY, false);
        m.add_row("SC0", Relation::Eq, vec![(a, 1.0), (b, -1.0)], 0.0);
        m.add_row("CS0", Relation::Le, vec![(b, 1.0)], 3.0);
        m
    }

    #[test]
    fn golden_layout() {
        let mut buf = Vec::new();
        write_mps(&tiny_model(), "TINY", &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let expected = "\
NAME          TINY
ROWS
 N  COST
 E  SC0
 L  CS0
COLUMNS
    MARKER    'MARKER'                 'INTORG'
    yR_0      COST      2.5            SC0       1
    MARKER    'MARKER'                 'INTEND'
    yB_0      COST      -0.125         SC0       -1
    yB_0      CS0       1
RHS
    RHS       CS0       3
BOUNDS
 LO BND       yR_0      0
 UP BND       yR_0      1
 LO BND       yB_0      0
 PL BND       yB_0
ENDATA
";
        assert_eq!(text, expected);
    }

    #[test]
    fn golden_layout_field_columns() {
        let mut buf = Vec::new();
        write_mps(&tiny_model(), "TINY", &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        for line in text.lines() {
            if line.starts_with("    yR_0") || line.starts_with("    yB_0") {
                // Fields 2-4 start at 1-based columns 5, 15 and 25.
                assert_eq!(&line[4..8], line[4..8].trim_end());
                assert_eq!(line.as_bytes()[13], b' ');
                assert_ne!(line.as_bytes()[14], b' ');
                assert_eq!(line.as_bytes()[23], b' ');
                assert_ne!(line.as_bytes()[24], b' ');
            }
        }
    }

    #[test]
    fn round_trip_preserves_model() {
        let mut m = tiny_model();
        // An interesting fixed bound exercised by the FX path.
        m.bounds[0] = (0.25, 0.25);
        let mut buf = Vec::new();
        write_mps(&m, "RT", &mut buf).unwrap();
        let back: LinearModel = read_mps(&buf[..]).unwrap();
        assert_eq!(back.num_vars(), m.num_vars());
        assert_eq!(back.num_rows(), m.num_rows());
        assert_eq!(back.var_names, m.var_names);
        assert_eq!(back.row_names, m.row_names);
        assert_eq!(back.integral, m.integral);
        for j in 0..m.num_vars() {
            assert!((back.objective[j] - m.objective[j]).abs() < 1e-6);
            assert_eq!(back.bounds[j], m.bounds[j]);
        }
        // Evaluate both models at a common point: same objective and rows.
        let x = vec![0.25, 1.5];
        assert!((back.objective_value(&x) - m.objective_value(&x)).abs() < 1e-9);
        for i in 0..m.num_rows() {
            assert!((back.rows[i].eval(&x) - m.rows[i].eval(&x)).abs() < 1e-9);
            assert_eq!(back.rows[i].relation, m.rows[i].relation);
            assert!((back.rows[i].rhs - m.rows[i].rhs).abs() < 1e-9);
        }
    }

    #[test]
    fn value_formatting_fits_field_width() {
        for v in [0.0, 1.0, -1.0, 1234567.891, -0.000001234, 1e10, -3.5e-7] {
            let s = fmt_val(v);
            assert!(s.len() <= 12, "{s} is {} chars", s.len());
            let back: f64 = s.parse().unwrap();
            let err = (back - v).abs();
            assert!(err <= v.abs() * 1e-6 + 1e-12);
        }
        // Values with a short exact decimal form round-trip bit-identically.
        for v in [0.25, -8268.75, 3.0, -0.125, 1e10] {
            let back: f64 = fmt_val(v).parse().unwrap();
            assert_eq!(back, v);
        }
    }
}
