//! Matrix Market exchange format: dense reader for `coordinate` and `array`
//! files of any field and symmetry, and a lossless complex array writer.

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::matrix::{ComplexMatrix, C64};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Layout {
    Coordinate,
    Array,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Field {
    Real,
    Integer,
    Complex,
    Pattern,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Symmetry {
    General,
    Symmetric,
    Hermitian,
    Skew,
}

fn perr(line: usize, col: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        col,
        msg: msg.into(),
    }
}

/// Whitespace-separated tokens with their 1-based columns.
fn tokens(s: &str) -> Vec<(usize, &str)> {
    let mut out = vec![];
    let mut start = None;
    for (i, ch) in s.char_indices() {
        match (ch.is_whitespace(), start) {
            (true, Some(b)) => {
                out.push((b + 1, &s[b..i]));
                start = None;
            }
            (false, None) => start = Some(i),
            _ => {}
        }
    }
    if let Some(b) = start {
        out.push((b + 1, &s[b..]));
    }
    out
}

fn parse_header(line: &str) -> Result<(Layout, Field, Symmetry)> {
    let t = tokens(line);
    if t.len() != 5 || !t[0].1.eq_ignore_ascii_case("%%MatrixMarket") {
        return Err(perr(
            1,
            1,
            "expected '%%MatrixMarket matrix <layout> <field> <symmetry>'",
        ));
    }
    if !t[1].1.eq_ignore_ascii_case("matrix") {
        return Err(perr(1, t[1].0, format!("unsupported object '{}'", t[1].1)));
    }
    let layout = match t[2].1.to_ascii_lowercase().as_str() {
        "coordinate" => Layout::Coordinate,
        "array" => Layout::Array,
        other => return Err(perr(1, t[2].0, format!("unknown format '{other}'"))),
    };
    let field = match t[3].1.to_ascii_lowercase().as_str() {
        "real" | "double" => Field::Real,
        "integer" => Field::Integer,
        "complex" => Field::Complex,
        "pattern" => Field::Pattern,
        other => return Err(perr(1, t[3].0, format!("unknown field '{other}'"))),
    };
    let sym = match t[4].1.to_ascii_lowercase().as_str() {
        "general" => Symmetry::General,
        "symmetric" => Symmetry::Symmetric,
        "hermitian" => Symmetry::Hermitian,
        "skew-symmetric" => Symmetry::Skew,
        other => return Err(perr(1, t[4].0, format!("unknown symmetry '{other}'"))),
    };
    if field == Field::Pattern && layout == Layout::Array {
        return Err(perr(1, t[3].0, "pattern field requires coordinate format"));
    }
    if sym == Symmetry::Hermitian && field != Field::Complex {
        return Err(perr(1, t[4].0, "hermitian symmetry requires complex field"));
    }
    Ok((layout, field, sym))
}

fn num<T: std::str::FromStr>(line: usize, tok: (usize, &str), what: &str) -> Result<T> {
    tok.1
        .parse()
        .map_err(|_| perr(line, tok.0, format!("invalid {what} '{}'", tok.1)))
}

fn value(line: usize, toks: &[(usize, &str)], field: Field) -> Result<C64> {
    let want = match field {
        Field::Pattern => 0,
        Field::Complex => 2,
        _ => 1,
    };
    if toks.len() != want {
        let col = toks.first().map_or(1, |t| t.0);
        return Err(perr(
            line,
            col,
            format!("expected {want} value token(s), found {}", toks.len()),
        ));
    }
    let z = match field {
        Field::Pattern => C64::new(1.0, 0.0),
        Field::Complex => C64::new(num(line, toks[0], "number")?, num(line, toks[1], "number")?),
        Field::Integer => C64::new(num::<i64>(line, toks[0], "integer")? as f64, 0.0),
        Field::Real => C64::new(num(line, toks[0], "number")?, 0.0),
    };
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(perr(line, toks[0].0, "non-finite value"));
    }
    Ok(z)
}

/// Store `z` at `(i, j)` and its mirror image for symmetric storage.
fn place(a: &mut ComplexMatrix, i: usize, j: usize, z: C64, sym: Symmetry) {
    a[(i, j)] = z;
    if i != j {
        match sym {
            Symmetry::General => {}
            Symmetry::Symmetric => a[(j, i)] = z,
            Symmetry::Hermitian => a[(j, i)] = z.conj(),
            Symmetry::Skew => a[(j, i)] = -z,
        }
    }
}

/// Parse a Matrix Market document into a dense matrix.
pub fn parse_matrix_market(text: &str) -> Result<ComplexMatrix> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (_, header) = lines.next().ok_or_else(|| perr(1, 1, "empty file"))?;
    let (layout, field, sym) = parse_header(header)?;
    let mut body = lines.filter(|(_, l)| {
        let t = l.trim_start();
        !t.is_empty() && !t.starts_with('%')
    });
    let (sl, size_line) = body.next().ok_or_else(|| perr(2, 1, "missing size line"))?;
    let st = tokens(size_line);
    let want = if layout == Layout::Coordinate { 3 } else { 2 };
    if st.len() != want {
        return Err(perr(sl, 1, format!("size line needs {want} integers")));
    }
    let rows: usize = num(sl, st[0], "row count")?;
    let cols: usize = num(sl, st[1], "column count")?;
    if sym != Symmetry::General && rows != cols {
        return Err(perr(sl, 1, "symmetric storage requires a square matrix"));
    }
    let mut a = ComplexMatrix::zeros(rows, cols);
    let mut last_line = sl;
    match layout {
        Layout::Coordinate => {
            let nnz: usize = num(sl, st[2], "entry count")?;
            for e in 0..nnz {
                let (ln, l) = body.next().ok_or_else(|| {
                    perr(
                        last_line + 1,
                        1,
                        format!("expected {nnz} entries, found {e}"),
                    )
                })?;
                last_line = ln;
                let t = tokens(l);
                if t.len() < 2 {
                    return Err(perr(ln, 1, "expected row and column indices"));
                }
                let i: usize = num(ln, t[0], "row index")?;
                let j: usize = num(ln, t[1], "column index")?;
                if i == 0 || i > rows {
                    return Err(perr(
                        ln,
                        t[0].0,
                        format!("row index {i} out of range 1..={rows}"),
                    ));
                }
                if j == 0 || j > cols {
                    return Err(perr(
                        ln,
                        t[1].0,
                        format!("column index {j} out of range 1..={cols}"),
                    ));
                }
                if sym != Symmetry::General && i < j {
                    return Err(perr(
                        ln,
                        t[0].0,
                        "entry above the diagonal in symmetric storage",
                    ));
                }
                if sym == Symmetry::Skew && i == j {
                    return Err(perr(ln, t[0].0, "diagonal entry in skew-symmetric storage"));
                }
                let z = value(ln, &t[2..], field)?;
                place(&mut a, i - 1, j - 1, z, sym);
            }
        }
        Layout::Array => {
            // Column-major; only the lower triangle for symmetric storage.
            let skip_diag = sym == Symmetry::Skew;
            for j in 0..cols {
                let first = match sym {
                    Symmetry::General => 0,
                    _ if skip_diag => j + 1,
                    _ => j,
                };
                for i in first..rows {
                    let (ln, l) = body.next().ok_or_else(|| {
                        perr(
                            last_line + 1,
                            1,
                            format!("missing entry ({}, {})", i + 1, j + 1),
                        )
                    })?;
                    last_line = ln;
                    let z = value(ln, &tokens(l), field)?;
                    place(&mut a, i, j, z, sym);
                }
            }
        }
    }
    if let Some((ln, _)) = body.next() {
        return Err(perr(ln, 1, "unexpected data after the last entry"));
    }
    Ok(a)
}

pub fn read_matrix_market(path: &Path) -> Result<ComplexMatrix> {
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_matrix_market(&text)
}

/// Complex general array format. `{:e}` prints the shortest digits that
/// parse back to the same double, so reading the output is lossless.
pub fn write_matrix_market(w: &mut impl Write, a: &ComplexMatrix) -> Result<()> {
    writeln!(w, "%%MatrixMarket matrix array complex general")?;
    writeln!(w, "{} {}", a.rows(), a.cols())?;
    for j in 0..a.cols() {
        for z in a.col(j) {
            writeln!(w, "{:e} {:e}", z.re, z.im)?;
        }
    }
    Ok(())
}

pub fn matrix_market_string(a: &ComplexMatrix) -> String {
    let mut buf = vec![];
    write_matrix_market(&mut buf, a).expect("writing to memory");
    String::from_utf8(buf).expect("ascii output")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn one_by_one_array() {
        let a = parse_matrix_market("%%MatrixMarket matrix array real general\n1 1\n1\n").unwrap();
        assert_eq!(a, ComplexMatrix::identity(1));
    }

    #[test]
    fn symmetric_coordinate_is_expanded() {
        let text = "%%MatrixMarket matrix coordinate real symmetric\n% lower triangle\n3 3 4\n1 1 2\n2 1 -1\n3 2 4.5\n3 3 1\n";
        let a = parse_matrix_market(text).unwrap();
        assert_eq!(a, a.transpose());
        assert_eq!(a[(0, 1)], c(-1.0, 0.0));
        assert_eq!(a[(1, 2)], c(4.5, 0.0));
        assert_eq!(a[(0, 2)], c(0.0, 0.0));
    }

    #[test]
    fn hermitian_and_skew() {
        let h = parse_matrix_market(
            "%%MatrixMarket matrix coordinate complex hermitian\n2 2 2\n1 1 1 0\n2 1 3 4\n",
        )
        .unwrap();
        assert_eq!(h[(0, 1)], c(3.0, -4.0));
        assert_eq!(h, h.adjoint());
        let s = parse_matrix_market("%%MatrixMarket matrix array real skew-symmetric\n2 2\n5\n")
            .unwrap();
        assert_eq!(s[(1, 0)], c(5.0, 0.0));
        assert_eq!(s[(0, 1)], c(-5.0, 0.0));
        assert_eq!(s[(0, 0)], c(0.0, 0.0));
    }

    #[test]
    fn pattern_and_integer() {
        let p =
            parse_matrix_market("%%MatrixMarket matrix coordinate pattern general\n2 2 1\n1 2\n")
                .unwrap();
        assert_eq!(p[(0, 1)], c(1.0, 0.0));
        let i = parse_matrix_market("%%MATRIXMARKET Matrix Array Integer General\n1 2\n3\n-4\n")
            .unwrap();
        assert_eq!(i[(0, 1)], c(-4.0, 0.0));
    }

    #[test]
    fn errors_carry_positions() {
        let e = parse_matrix_market("%%MatrixMarket matrix array real general\n2 2\n1\n2\nx\n4\n")
            .unwrap_err();
        assert_eq!(
            e,
            Error::Parse {
                line: 5,
                col: 1,
                msg: "invalid number 'x'".into()
            }
        );
        let e =
            parse_matrix_market("%%MatrixMarket matrix coordinate real general\n2 2 1\n1  3 1\n")
                .unwrap_err();
        assert!(
            matches!(
                e,
                Error::Parse {
                    line: 3,
                    col: 4,
                    ..
                }
            ),
            "{e:?}"
        );
        let e = parse_matrix_market("%%MatrixMarket matrix array real general\n2 2\n1\n2\n3\n")
            .unwrap_err();
        assert!(matches!(e, Error::Parse { line: 6, .. }), "{e:?}");
        assert!(matches!(
            parse_matrix_market("hello\n"),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            parse_matrix_market(""),
            Err(Error::Parse { line: 1, .. })
        ));
        let e = parse_matrix_market("%%MatrixMarket matrix array real general\n1 1\n1\n2\n")
            .unwrap_err();
        assert!(matches!(e, Error::Parse { line: 4, .. }), "{e:?}");
    }

    #[test]
    fn nonfinite_rejected() {
        let e = parse_matrix_market("%%MatrixMarket matrix array real general\n1 1\nNaN\n")
            .unwrap_err();
        assert!(matches!(e, Error::Parse { line: 3, .. }));
    }

    #[test]
    fn special_values_round_trip() {
        let a = ComplexMatrix::from_row_major(
            1,
            4,
            &[
                c(-0.0, 0.0),
                c(f64::MIN_POSITIVE / 3.0, 1e308),
                c(0.1, -1.0 / 3.0),
                c(f64::MAX, -f64::EPSILON),
            ],
        )
        .unwrap();
        let b = parse_matrix_market(&matrix_market_string(&a)).unwrap();
        for (x, y) in a.as_slice().iter().zip(b.as_slice()) {
            assert_eq!(x.re.to_bits(), y.re.to_bits());
            assert_eq!(x.im.to_bits(), y.im.to_bits());
        }
    }

    proptest! {
        #[test]
        fn array_round_trip_is_bitwise(seed in 0u64..10_000, m in 1usize..6, n in 1usize..6) {
            let mut r = rng(seed);
            let a = grade_rows(&random_matrix(&mut r, m, n), &mut r, 30.0);
            let b = parse_matrix_market(&matrix_market_string(&a)).unwrap();
            prop_assert_eq!((b.rows(), b.cols()), (m, n));
            for (x, y) in a.as_slice().iter().zip(b.as_slice()) {
                prop_assert_eq!(x.re.to_bits(), y.re.to_bits());
                prop_assert_eq!(x.im.to_bits(), y.im.to_bits());
            }
        }
    }
}
