//! Field images and tables.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::indicators::{IndicatorField, IndicatorKind, SamplingGrid};

/// Binary PGM (`P5`, maxval 255), min-max normalized, first row at the
/// largest `y`. A constant field is written as uniform gray 128.
pub fn write_pgm<W: Write>(field: &IndicatorField, mut w: W) -> Result<()> {
    let g = field.grid;
    if field.values.len() != g.len() {
        return Err(Error::arg("field size does not match its grid"));
    }
    if field.values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical(format!("{} field has non-finite values", field.kind.name())));
    }
    let (lo, hi) = (field.min(), field.max());
    let span = hi - lo;
    write!(w, "P5\n{} {}\n255\n", g.p, g.q)?;
    let mut bytes = Vec::with_capacity(g.len());
    for q in (0..g.q).rev() {
        for p in 0..g.p {
            let v = field.at(p, q);
            bytes.push(if span > 0.0 {
                ((v - lo) / span * 255.0).floor().clamp(0.0, 255.0) as u8
            } else {
                128
            });
        }
    }
    w.write_all(&bytes)?;
    Ok(())
}

/// `p,q,x,y,value` rows, `q` outer, values with 17 significant digits.
pub fn write_field_csv<W: Write>(field: &IndicatorField, mut w: W) -> Result<()> {
    let g = field.grid;
    writeln!(w, "p,q,x,y,value")?;
    for q in 0..g.q {
        for p in 0..g.p {
            writeln!(w, "{p},{q},{:.16e},{:.16e},{:.16e}", g.x(p), g.y(q), field.at(p, q))?;
        }
    }
    Ok(())
}

/// Reads a table written by [`write_field_csv`] for a known grid.
pub fn read_field_csv<R: Read>(r: R, grid: SamplingGrid, kind: IndicatorKind) -> Result<IndicatorField> {
    grid.validate()?;
    let mut rd = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(r);
    let header = rd.headers().map_err(|e| Error::Parse(format!("field header: {e}")))?.clone();
    if header.iter().ne(["p", "q", "x", "y", "value"]) {
        return Err(Error::Parse("field header must be p,q,x,y,value".into()));
    }
    let mut values = vec![f64::NAN; grid.len()];
    let mut seen = vec![false; grid.len()];
    for (line, rec) in rd.records().enumerate() {
        let rec = rec.map_err(|e| Error::Parse(format!("row {}: {e}", line + 2)))?;
        let bad = |what: &str| Error::Parse(format!("row {}: bad {what}", line + 2));
        if rec.len() != 5 {
            return Err(bad("field count"));
        }
        let p: usize = rec[0].parse().map_err(|_| bad("p"))?;
        let q: usize = rec[1].parse().map_err(|_| bad("q"))?;
        let v: f64 = rec[4].parse().map_err(|_| bad("value"))?;
        if p >= grid.p || q >= grid.q {
            return Err(bad("index"));
        }
        let i = grid.index(p, q);
        if std::mem::replace(&mut seen[i], true) {
            return Err(Error::Parse(format!("row {}: duplicate cell ({p}, {q})", line + 2)));
        }
        values[i] = v;
    }
    if let Some(i) = seen.iter().position(|s| !s) {
        return Err(Error::MissingData(format!("field cell ({}, {}) missing", i % grid.p, i / grid.p)));
    }
    Ok(IndicatorField {
        grid,
        kind,
        values,
        imag_residual: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field(p: usize, q: usize, values: Vec<f64>) -> IndicatorField {
        IndicatorField {
            grid: SamplingGrid {
                x_lo: 0.0,
                x_hi: 1.0,
                y_lo: 0.0,
                y_hi: 1.0,
                p,
                q,
            },
            kind: IndicatorKind::Iminus,
            values,
            imag_residual: None,
        }
    }

    #[test]
    fn pgm_linear_map_and_row_order() {
        let f = field(3, 3, (0..9).map(f64::from).collect());
        let mut out = Vec::new();
        write_pgm(&f, &mut out).unwrap();
        let head = b"P5\n3 3\n255\n";
        assert_eq!(&out[..head.len()], head);
        // top row is q = 2
        assert_eq!(&out[head.len()..], &[191, 223, 255, 95, 127, 159, 0, 31, 63]);
    }

    #[test]
    fn constant_field_is_mid_gray() {
        let f = field(3, 4, vec![0.0; 12]);
        let mut out = Vec::new();
        write_pgm(&f, &mut out).unwrap();
        assert!(out[out.len() - 12..].iter().all(|&b| b == 128));
    }

    #[test]
    fn non_finite_field_is_rejected() {
        let mut v = vec![0.0; 9];
        v[4] = f64::NAN;
        assert!(write_pgm(&field(3, 3, v), Vec::new()).is_err());
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let v: Vec<f64> = (0..12).map(|i| (i as f64 * 0.731).sin() / 3.0 + 1e-300 * i as f64).collect();
        let f = field(4, 3, v);
        let mut out = Vec::new();
        write_field_csv(&f, &mut out).unwrap();
        let back = read_field_csv(out.as_slice(), f.grid, f.kind).unwrap();
        assert_eq!(back.values, f.values);
    }

    #[test]
    fn csv_reader_rejects_gaps_and_duplicates() {
        let g = field(3, 3, vec![0.0; 9]).grid;
        let mut text = String::from("p,q,x,y,value\n");
        for q in 0..3 {
            for p in 0..3 {
                if (p, q) != (1, 1) {
                    text += &format!("{p},{q},0,0,1\n");
                }
            }
        }
        assert!(read_field_csv(text.as_bytes(), g, IndicatorKind::Iplus).is_err());
        let dup = text.clone() + "0,0,0,0,1\n";
        assert!(read_field_csv(dup.as_bytes(), g, IndicatorKind::Iplus).is_err());
        let full = text + "1,1,0,0,2\n";
        let f = read_field_csv(full.as_bytes(), g, IndicatorKind::Iplus).unwrap();
        assert_eq!(f.at(1, 1), 2.0);
    }
}
