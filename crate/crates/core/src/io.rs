//! Artifact file formats: binary sample matrices ("ICMX") and diff-able
//! CSV output.

use std::io::{Read as _, Write as _};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};

use crate::{Error, Mat, Result};

const MAGIC: &[u8; 4] = b"ICMX";

/// Write a sample matrix: magic "ICMX", u32 rows, u32 cols, then f64
/// row-major payload, all little-endian.
pub fn write_icmx(path: &Path, m: &Mat) -> Result<()> {
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    w.write_all(MAGIC)?;
    w.write_u32::<LittleEndian>(m.rows() as u32)?;
    w.write_u32::<LittleEndian>(m.cols() as u32)?;
    for &v in m.data() {
        w.write_f64::<LittleEndian>(v)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_icmx(path: &Path) -> Result<Mat> {
    let mut r = std::io::BufReader::new(std::fs::File::open(path)?);
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Format(format!(
            "bad sample-file magic {magic:?}, expected {MAGIC:?}"
        )));
    }
    let rows = r.read_u32::<LittleEndian>()? as usize;
    let cols = r.read_u32::<LittleEndian>()? as usize;
    let mut data = vec![0.0; rows * cols];
    for v in &mut data {
        *v = r.read_f64::<LittleEndian>()?;
    }
    // Reject trailing garbage.
    let mut probe = [0u8; 1];
    if r.read(&mut probe)? != 0 {
        return Err(Error::Format("sample file has trailing bytes".into()));
    }
    Mat::from_vec(rows, cols, data)
}

/// Render a float with 9 significant digits, locale-independent.
pub fn fmt_float(v: f64) -> String {
    if v == 0.0 {
        return "0.0".into();
    }
    if !v.is_finite() {
        return format!("{v}");
    }
    format!("{v:.8e}")
}

/// Write a CSV file: header row, LF line endings, UTF-8.
pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(w, "{}", header.join(","))?;
    for row in rows {
        if row.len() != header.len() {
            return Err(Error::Format(format!(
                "csv row has {} fields, header has {}",
                row.len(),
                header.len()
            )));
        }
        writeln!(w, "{}", row.join(","))?;
    }
    w.flush()?;
    Ok(())
}

/// CSV export of a sample matrix (columns x0, x1, ...).
pub fn write_matrix_csv(path: &Path, m: &Mat) -> Result<()> {
    let header: Vec<String> = (0..m.cols()).map(|j| format!("x{j}")).collect();
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    let rows: Vec<Vec<String>> = (0..m.rows())
        .map(|i| m.row(i).iter().map(|&v| fmt_float(v)).collect())
        .collect();
    write_csv(path, &header_refs, &rows)
}
