use std::io::{BufRead, Write};

use super::{Grid3, SymTensorField3, COMPONENT_NAMES};
use crate::error::{Error, Result};

const CSV_HEADER: &str = "x1,x2,x3,s11,s22,s33,s23,s13,s12";

/// One row per node, `x1` fastest. Values use the shortest round-trip decimal form.
pub fn write_field_csv<W: Write>(field: &SymTensorField3, mut w: W) -> Result<()> {
    let g = field.grid;
    writeln!(w, "{CSV_HEADER}")?;
    for idx in 0..g.len() {
        let [a, b, c] = g.unindex(idx);
        write!(w, "{},{},{}", g.coord(a), g.coord(b), g.coord(c))?;
        for comp in &field.comps {
            write!(w, ",{}", comp[idx])?;
        }
        writeln!(w)?;
    }
    Ok(())
}

/// Reads a field written by [`write_field_csv`]. The grid size is inferred from the row count.
pub fn read_field_csv<R: BufRead>(r: R) -> Result<SymTensorField3> {
    let mut lines = r.lines();
    let header = lines.next().ok_or_else(|| Error::Parse("empty field CSV".into()))??;
    if header.trim() != CSV_HEADER {
        return Err(Error::Parse(format!("unexpected field CSV header: {header}")));
    }
    let mut rows: Vec<[f64; 6]> = Vec::new();
    for (n, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let vals: Vec<f64> = line
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Parse(format!("row {}: {e}", n + 2)))?;
        if vals.len() != 9 {
            return Err(Error::Parse(format!("row {}: expected 9 columns, got {}", n + 2, vals.len())));
        }
        rows.push(std::array::from_fn(|s| vals[3 + s]));
    }
    let m = (rows.len() as f64).cbrt().round() as usize;
    if m * m * m != rows.len() {
        return Err(Error::Shape(format!("{} rows is not a cubic lattice", rows.len())));
    }
    let grid = Grid3::new(m)?;
    let comps = std::array::from_fn(|s| rows.iter().map(|r| r[s]).collect());
    let field = SymTensorField3::from_components(grid, comps)?;
    field.check_finite()?;
    Ok(field)
}

/// Legacy ASCII VTK structured points with six scalar arrays.
pub fn write_field_vtk<W: Write>(field: &SymTensorField3, title: &str, mut w: W) -> Result<()> {
    let g = field.grid;
    let m = g.m();
    writeln!(w, "# vtk DataFile Version 3.0")?;
    writeln!(w, "{}", title.lines().next().unwrap_or(""))?;
    writeln!(w, "ASCII")?;
    writeln!(w, "DATASET STRUCTURED_POINTS")?;
    writeln!(w, "DIMENSIONS {m} {m} {m}")?;
    writeln!(w, "ORIGIN 0 0 0")?;
    let h = g.spacing();
    writeln!(w, "SPACING {h} {h} {h}")?;
    writeln!(w, "POINT_DATA {}", g.len())?;
    for (comp, name) in field.comps.iter().zip(COMPONENT_NAMES) {
        writeln!(w, "SCALARS {name} double 1")?;
        writeln!(w, "LOOKUP_TABLE default")?;
        for v in comp {
            writeln!(w, "{v}")?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip() {
        let g = Grid3::new(4).unwrap();
        let f = SymTensorField3::from_fn(g, |x| [x[0], x[1], x[2], x[0] * x[1], 0.1, -3.5]);
        let mut buf = Vec::new();
        write_field_csv(&f, &mut buf).unwrap();
        let back = read_field_csv(buf.as_slice()).unwrap();
        assert_eq!(back, f);
    }

    #[test]
    fn csv_rejects_bad_rows() {
        let text = format!("{CSV_HEADER}\n0,0,0,1,2,3\n");
        assert!(read_field_csv(text.as_bytes()).is_err());
    }

    #[test]
    fn vtk_layout() {
        let g = Grid3::new(3).unwrap();
        let f = SymTensorField3::zeros(g);
        let mut buf = Vec::new();
        write_field_vtk(&f, "zero", &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(
            text.starts_with("# vtk DataFile Version 3.0\nzero\nASCII\nDATASET STRUCTURED_POINTS\nDIMENSIONS 3 3 3\n")
        );
        assert_eq!(text.matches("SCALARS").count(), 6);
        assert_eq!(text.lines().count(), 8 + 6 * (2 + 27));
    }
}
