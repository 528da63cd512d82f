//! Report serialization: CSV with a JSON comment header, pretty JSON, and a
//! binary round-trip format for spectra.

use std::io::{BufRead, BufReader, Read, Write};

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use serde::Serialize;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::spectral::{Grid, SpectrumResult};
use crate::verify::EnvelopeReport;

/// Magic bytes opening a binary spectrum file.
pub const SPECTRUM_MAGIC: &[u8; 8] = b"LKSPEC01";

/// Writes `# <header json>` followed by an RFC-4180 table.
pub fn write_csv<W: Write>(mut out: W, header: &Value, columns: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    writeln!(out, "# {}", serde_json::to_string(header)?)?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(columns)?;
    for row in rows {
        if row.len() != columns.len() {
            return Err(Error::Format(format!("row of {} values for {} columns", row.len(), columns.len())));
        }
        w.write_record(row.iter().map(|v| v.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

/// Writes a table whose rows are serializable records.
pub fn write_records<W: Write, T: Serialize>(mut out: W, header: &Value, records: &[T]) -> Result<()> {
    writeln!(out, "# {}", serde_json::to_string(header)?)?;
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Header of a CSV written by [`write_csv`].
pub fn read_csv_header<R: Read>(input: R) -> Result<Value> {
    let mut line = String::new();
    BufReader::new(input).read_line(&mut line)?;
    let json = line.strip_prefix("# ").ok_or_else(|| Error::Format("missing '# ' header line".into()))?;
    Ok(serde_json::from_str(json.trim_end())?)
}

/// Header and numeric body of a CSV written by [`write_csv`].
pub fn read_csv<R: Read>(input: R) -> Result<(Value, Vec<String>, Vec<Vec<f64>>)> {
    let mut text = String::new();
    BufReader::new(input).read_to_string(&mut text)?;
    let header = read_csv_header(text.as_bytes())?;
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    let columns = r.headers()?.iter().map(String::from).collect();
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let row = rec
            .iter()
            .map(|f| f.parse::<f64>().map_err(|e| Error::Format(format!("bad number {f:?}: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    Ok((header, columns, rows))
}

/// Pretty JSON with a trailing newline. Field order follows the struct
/// definitions and maps are sorted, so output is stable.
pub fn write_json<W: Write, T: Serialize + ?Sized>(mut out: W, value: &T) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, value)?;
    out.write_all(b"\n")?;
    Ok(())
}

/// Spectrum as CSV: node coordinates and `phi_0 … phi_{k−1}`; eigenvalues,
/// residuals and the grid go into the header.
pub fn write_spectrum_csv<W: Write>(out: W, spec: &SpectrumResult, config_hash: &str) -> Result<()> {
    let header = serde_json::json!({
        "kind": "spectrum",
        "config_hash": config_hash,
        "grid": spec.grid,
        "eigenvalues": spec.eigenvalues,
        "residuals": spec.residuals,
    });
    let mut columns: Vec<String> = if spec.grid.dim == 1 { vec!["x".into()] } else { vec!["x".into(), "y".into()] };
    columns.extend((0..spec.k()).map(|n| format!("phi_{n}")));
    let cols: Vec<&str> = columns.iter().map(String::as_str).collect();
    let rows: Vec<Vec<f64>> = (0..spec.grid.len())
        .map(|i| {
            let mut row = spec.grid.point(i);
            row.extend(spec.eigenvectors.iter().map(|v| v[i]));
            row
        })
        .collect();
    write_csv(out, &header, &cols, &rows)
}

/// Envelope rows as CSV (`x, phi0, nu, V, ratio`).
pub fn write_envelope_csv<W: Write>(out: W, report: &EnvelopeReport, config_hash: &str) -> Result<()> {
    let header = serde_json::json!({
        "kind": "envelope",
        "config_hash": config_hash,
        "window": report.window,
        "spread": report.spread,
        "slope": report.decay.slope,
        "verdict": report.verdict,
    });
    let rows: Vec<Vec<f64>> = report.rows.iter().map(|r| vec![r.x[0], r.phi0, r.nu, r.v, r.ratio]).collect();
    write_csv(out, &header, &["x", "phi0", "nu", "V", "ratio"], &rows)
}

fn write_f64s<W: Write>(out: &mut W, values: &[f64]) -> Result<()> {
    out.write_u64::<LittleEndian>(values.len() as u64)?;
    for &v in values {
        out.write_f64::<LittleEndian>(v)?;
    }
    Ok(())
}

fn read_f64s<R: Read>(input: &mut R, limit: usize) -> Result<Vec<f64>> {
    let n = input.read_u64::<LittleEndian>()? as usize;
    if n > limit {
        return Err(Error::Format(format!("array of {n} values exceeds the expected {limit}")));
    }
    let mut v = vec![0.0; n];
    input.read_f64_into::<LittleEndian>(&mut v)?;
    Ok(v)
}

fn write_str<W: Write>(out: &mut W, s: &str) -> Result<()> {
    out.write_u64::<LittleEndian>(s.len() as u64)?;
    out.write_all(s.as_bytes())?;
    Ok(())
}

fn read_str<R: Read>(input: &mut R) -> Result<String> {
    let n = input.read_u64::<LittleEndian>()? as usize;
    if n > 1 << 20 {
        return Err(Error::Format("string too long".into()));
    }
    let mut buf = vec![0u8; n];
    input.read_exact(&mut buf)?;
    String::from_utf8(buf).map_err(|e| Error::Format(e.to_string()))
}

/// Little-endian binary dump of a spectrum, including the operator tables.
pub fn write_spectrum_binary<W: Write>(mut out: W, spec: &SpectrumResult, config_hash: &str) -> Result<()> {
    out.write_all(SPECTRUM_MAGIC)?;
    write_str(&mut out, config_hash)?;
    out.write_u32::<LittleEndian>(spec.grid.dim as u32)?;
    out.write_f64::<LittleEndian>(spec.grid.half_width)?;
    out.write_u64::<LittleEndian>(spec.grid.points_per_axis as u64)?;
    out.write_f64::<LittleEndian>(spec.tolerance)?;
    out.write_u64::<LittleEndian>(spec.applications as u64)?;
    write_f64s(&mut out, &spec.eigenvalues)?;
    write_f64s(&mut out, &spec.residuals)?;
    for v in &spec.eigenvectors {
        write_f64s(&mut out, v)?;
    }
    write_f64s(&mut out, &spec.multiplier)?;
    write_f64s(&mut out, &spec.potential)?;
    out.write_u64::<LittleEndian>(spec.warnings.len() as u64)?;
    for w in &spec.warnings {
        write_str(&mut out, w)?;
    }
    Ok(())
}

/// Reads a spectrum written by [`write_spectrum_binary`], with its config hash.
pub fn read_spectrum_binary<R: Read>(mut input: R) -> Result<(SpectrumResult, String)> {
    let mut magic = [0u8; 8];
    input.read_exact(&mut magic)?;
    if &magic != SPECTRUM_MAGIC {
        return Err(Error::Format("not a spectrum file".into()));
    }
    let hash = read_str(&mut input)?;
    let dim = input.read_u32::<LittleEndian>()? as usize;
    let half_width = input.read_f64::<LittleEndian>()?;
    let points = input.read_u64::<LittleEndian>()? as usize;
    let grid = Grid::new(dim, half_width, points).map_err(|e| Error::Format(e.to_string()))?;
    let n = grid.len();
    let tolerance = input.read_f64::<LittleEndian>()?;
    let applications = input.read_u64::<LittleEndian>()? as usize;
    let eigenvalues = read_f64s(&mut input, 64)?;
    let residuals = read_f64s(&mut input, 64)?;
    let eigenvectors = (0..eigenvalues.len()).map(|_| read_f64s(&mut input, n)).collect::<Result<Vec<_>>>()?;
    let multiplier = read_f64s(&mut input, n)?;
    let potential = read_f64s(&mut input, n)?;
    let n_warn = input.read_u64::<LittleEndian>()? as usize;
    if n_warn > 1024 {
        return Err(Error::Format("too many warnings".into()));
    }
    let warnings = (0..n_warn).map(|_| read_str(&mut input)).collect::<Result<Vec<_>>>()?;
    if eigenvectors.iter().chain([&multiplier, &potential]).any(|v| v.len() != n) || residuals.len() != eigenvalues.len() {
        return Err(Error::Format("inconsistent table lengths".into()));
    }
    let spec = SpectrumResult { grid, eigenvalues, eigenvectors, residuals, tolerance, applications, warnings, multiplier, potential };
    Ok((spec, hash))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{build_operator, lowest_eigenpairs};
    use crate::{LevyModel, Potential};

    fn small_spectrum() -> SpectrumResult {
        let op = build_operator(&LevyModel::stable(1.0, 1).unwrap(), &Potential::power(1.0, 2.0), &Grid::one_d(8.0, 128).unwrap()).unwrap();
        lowest_eigenpairs(&op, 3, 1e-9).unwrap()
    }

    #[test]
    fn binary_round_trip_is_exact() {
        let spec = small_spectrum();
        let mut buf = Vec::new();
        write_spectrum_binary(&mut buf, &spec, "abc").unwrap();
        let (back, hash) = read_spectrum_binary(buf.as_slice()).unwrap();
        assert_eq!(hash, "abc");
        assert_eq!(back, spec);
    }

    #[test]
    fn binary_rejects_garbage() {
        assert!(matches!(read_spectrum_binary(&b"NOTASPEC........"[..]), Err(Error::Format(_))));
        let spec = small_spectrum();
        let mut buf = Vec::new();
        write_spectrum_binary(&mut buf, &spec, "h").unwrap();
        buf.truncate(buf.len() / 2);
        assert!(read_spectrum_binary(buf.as_slice()).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let spec = small_spectrum();
        let mut buf = Vec::new();
        write_spectrum_csv(&mut buf, &spec, "hash1").unwrap();
        let (header, columns, rows) = read_csv(buf.as_slice()).unwrap();
        assert_eq!(header["config_hash"], "hash1");
        assert_eq!(columns, ["x", "phi_0", "phi_1", "phi_2"]);
        assert_eq!(rows.len(), 128);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row[1], spec.eigenvectors[0][i]);
        }
        let ev: Vec<f64> = serde_json::from_value(header["eigenvalues"].clone()).unwrap();
        assert_eq!(ev, spec.eigenvalues);
    }

    #[test]
    fn csv_quotes_text_fields() {
        #[derive(Serialize)]
        struct Row {
            label: &'static str,
            v: f64,
        }
        let mut buf = Vec::new();
        write_records(&mut buf, &serde_json::json!({}), &[Row { label: "a, \"b\"", v: 1.5 }]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.contains("\"a, \"\"b\"\"\",1.5"));
    }

    #[test]
    fn row_width_checked() {
        let r = write_csv(Vec::new(), &serde_json::json!({}), &["a", "b"], &[vec![1.0]]);
        assert!(matches!(r, Err(Error::Format(_))));
    }
}
