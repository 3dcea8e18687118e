//! On-disk formats: CSV matrices (rows are samples), one-value-per-line
//! vectors, and a JSON group file `{"d": ..., "groups": [[1-based], ...]}`.
//! Floats are written with 17 significant digits so that read(write(x))
//! is bit-exact.

use std::fs;
use std::io::Write as _;
use std::path::Path;

use gso_core::{DenseMatrix, GroupStructure};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Decimal text that round-trips every finite f64.
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

fn parse_float(path: &Path, line: usize, token: &str) -> Result<f64> {
    token.trim().parse::<f64>().map_err(|_| Error::Parse {
        path: path.to_path_buf(),
        line,
        token: token.trim().to_string(),
    })
}

pub fn read_vector(path: &Path) -> Result<Vec<f64>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        out.push(parse_float(path, i + 1, line)?);
    }
    if out.is_empty() {
        return Err(Error::Format {
            path: path.to_path_buf(),
            msg: "no values found".into(),
        });
    }
    Ok(out)
}

pub fn write_vector(path: &Path, v: &[f64]) -> Result<()> {
    let mut buf = String::with_capacity(v.len() * 24);
    for x in v {
        buf.push_str(&format_float(*x));
        buf.push('\n');
    }
    fs::write(path, buf).map_err(|e| Error::io(path, e))
}

pub fn read_matrix(path: &Path) -> Result<DenseMatrix> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut data = Vec::new();
    let mut cols = 0usize;
    let mut rows = 0usize;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut count = 0usize;
        for token in line.split(',') {
            data.push(parse_float(path, i + 1, token)?);
            count += 1;
        }
        if rows == 0 {
            cols = count;
        } else if count != cols {
            return Err(Error::RaggedRow {
                path: path.to_path_buf(),
                line: i + 1,
                expected: cols,
                found: count,
            });
        }
        rows += 1;
    }
    if rows == 0 {
        return Err(Error::Format {
            path: path.to_path_buf(),
            msg: "no rows found".into(),
        });
    }
    Ok(DenseMatrix::from_vec(rows, cols, data)?)
}

pub fn write_matrix(path: &Path, m: &DenseMatrix) -> Result<()> {
    let mut buf = String::with_capacity(m.rows() * m.cols() * 24);
    for i in 0..m.rows() {
        let row = m.row(i);
        for (j, x) in row.iter().enumerate() {
            if j > 0 {
                buf.push(',');
            }
            buf.push_str(&format_float(*x));
        }
        buf.push('\n');
    }
    fs::write(path, buf).map_err(|e| Error::io(path, e))
}

#[derive(Serialize, Deserialize)]
struct GroupsFile {
    d: usize,
    /// 1-based coordinate indices, one list per group.
    groups: Vec<Vec<usize>>,
}

pub fn read_groups(path: &Path) -> Result<GroupStructure> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let parsed: GroupsFile = serde_json::from_str(&text).map_err(|e| Error::Format {
        path: path.to_path_buf(),
        msg: format!("invalid groups JSON: {e}"),
    })?;
    let mut zero_based = Vec::with_capacity(parsed.groups.len());
    for (r, g) in parsed.groups.iter().enumerate() {
        let mut converted = Vec::with_capacity(g.len());
        for &j in g {
            if j == 0 || j > parsed.d {
                return Err(Error::Format {
                    path: path.to_path_buf(),
                    msg: format!(
                        "group {}: index {} out of range 1..={}",
                        r + 1,
                        j,
                        parsed.d
                    ),
                });
            }
            converted.push(j - 1);
        }
        zero_based.push(converted);
    }
    Ok(GroupStructure::new(parsed.d, zero_based)?)
}

pub fn write_groups(path: &Path, gs: &GroupStructure) -> Result<()> {
    let file = GroupsFile {
        d: gs.dim(),
        groups: gs
            .groups()
            .iter()
            .map(|g| g.iter().map(|&j| j + 1).collect())
            .collect(),
    };
    let text = serde_json::to_string_pretty(&file).expect("serializable");
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Appends CSV rows to an open file, creating it with the header first.
pub fn write_csv(path: &Path, header: &str, rows: &[String]) -> Result<()> {
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    writeln!(f, "{header}").map_err(|e| Error::io(path, e))?;
    for row in rows {
        writeln!(f, "{row}").map_err(|e| Error::io(path, e))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_text_roundtrip_is_exact() {
        for &v in &[0.0, 1.0 / 3.0, -2.718281828459045e-10, 1e300, f64::MIN_POSITIVE] {
            let s = format_float(v);
            assert_eq!(s.parse::<f64>().unwrap(), v, "{s}");
        }
    }

    #[test]
    fn vector_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("v.csv");
        let v = vec![1.0, -0.125, 1.0 / 7.0];
        write_vector(&p, &v).unwrap();
        assert_eq!(read_vector(&p).unwrap(), v);
    }

    #[test]
    fn matrix_roundtrip_and_ragged_row() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.csv");
        let m = DenseMatrix::from_vec(2, 3, vec![1.0, 2.0, 3.0, 4.0, 5.0, 1.0 / 3.0]).unwrap();
        write_matrix(&p, &m).unwrap();
        let back = read_matrix(&p).unwrap();
        assert_eq!(back.data(), m.data());

        std::fs::write(&p, "1,2,3\n4,5\n").unwrap();
        let err = read_matrix(&p).unwrap_err();
        assert!(err.to_string().contains(":2"), "{err}");
    }

    #[test]
    fn groups_roundtrip_and_bad_index() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("g.json");
        let gs = GroupStructure::new(4, vec![vec![0, 1], vec![1, 2, 3]]).unwrap();
        write_groups(&p, &gs).unwrap();
        let back = read_groups(&p).unwrap();
        assert_eq!(back.groups(), gs.groups());

        std::fs::write(&p, r#"{"d": 3, "groups": [[1, 2], [3, 4]]}"#).unwrap();
        let err = read_groups(&p).unwrap_err().to_string();
        assert!(err.contains("group 2"), "{err}");
        assert!(err.contains("index 4"), "{err}");

        std::fs::write(&p, r#"{"d": 3, "groups": [[0]]}"#).unwrap();
        let err = read_groups(&p).unwrap_err().to_string();
        assert!(err.contains("index 0"), "{err}");
    }
}
