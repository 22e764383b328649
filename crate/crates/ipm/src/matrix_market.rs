//! Matrix Market coordinate files (`real general` and `real symmetric`),
//! 1-based on disk. Symmetric files hold the lower triangle.

use std::io::{self, BufRead, Write};

use inexact_ipm_core::{CscMatrix, SymLowerMatrix, Triplets};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MmError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
    #[error(transparent)]
    Matrix(#[from] inexact_ipm_core::Error),
}

pub fn write_general<W: Write>(w: &mut W, a: &CscMatrix) -> io::Result<()> {
    writeln!(w, "%%MatrixMarket matrix coordinate real general")?;
    write_body(w, a)
}

pub fn write_symmetric<W: Write>(w: &mut W, k: &SymLowerMatrix) -> io::Result<()> {
    writeln!(w, "%%MatrixMarket matrix coordinate real symmetric")?;
    write_body(w, k.storage())
}

fn write_body<W: Write>(w: &mut W, a: &CscMatrix) -> io::Result<()> {
    writeln!(w, "{} {} {}", a.nrows(), a.ncols(), a.nnz())?;
    for (i, j, v) in a.iter() {
        writeln!(w, "{} {} {:e}", i + 1, j + 1, v)?;
    }
    Ok(())
}

pub fn read_general<R: BufRead>(r: R) -> Result<CscMatrix, MmError> {
    let (symmetric, t) = read_triplets(r)?;
    if symmetric {
        return Err(MmError::Format {
            line: 1,
            message: "expected a general matrix".into(),
        });
    }
    Ok(CscMatrix::from_triplets(&t)?)
}

pub fn read_symmetric<R: BufRead>(r: R) -> Result<SymLowerMatrix, MmError> {
    let (symmetric, t) = read_triplets(r)?;
    if !symmetric {
        return Err(MmError::Format {
            line: 1,
            message: "expected a symmetric matrix".into(),
        });
    }
    Ok(SymLowerMatrix::from_triplets(&t)?)
}

fn read_triplets<R: BufRead>(r: R) -> Result<(bool, Triplets), MmError> {
    let mut lines = r.lines().enumerate();
    let bad = |line: usize, message: &str| MmError::Format {
        line,
        message: message.into(),
    };
    let header = match lines.next() {
        Some((_, l)) => l?,
        None => return Err(bad(1, "empty file")),
    };
    let words: Vec<String> = header.split_whitespace().map(str::to_lowercase).collect();
    let symmetric = match words.iter().map(String::as_str).collect::<Vec<_>>()[..] {
        ["%%matrixmarket", "matrix", "coordinate", "real", "general"] => false,
        ["%%matrixmarket", "matrix", "coordinate", "real", "symmetric"] => true,
        _ => return Err(bad(1, "unsupported Matrix Market header")),
    };
    let mut t: Option<Triplets> = None;
    let mut expected = 0;
    for (idx, l) in lines {
        let l = l?;
        let line = idx + 1;
        if l.starts_with('%') || l.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = l.split_whitespace().collect();
        match &mut t {
            None => {
                let [m, n, nnz] = f[..] else {
                    return Err(bad(line, "expected `rows cols nnz`"));
                };
                let parse = |s: &str| s.parse::<usize>().map_err(|_| bad(line, "bad size"));
                let (m, n) = (parse(m)?, parse(n)?);
                expected = parse(nnz)?;
                t = Some(Triplets::with_capacity(m, n, expected));
            }
            Some(t) => {
                let [i, j, v] = f[..] else {
                    return Err(bad(line, "expected `row col value`"));
                };
                let index = |s: &str| match s.parse::<usize>() {
                    Ok(k) if k >= 1 => Ok(k - 1),
                    _ => Err(bad(line, "bad index")),
                };
                let v: f64 = v.parse().map_err(|_| bad(line, "bad value"))?;
                t.push(index(i)?, index(j)?, v);
            }
        }
    }
    let t = t.ok_or_else(|| bad(1, "missing size line"))?;
    if t.entries.len() != expected {
        return Err(bad(1, "entry count does not match the size line"));
    }
    Ok((symmetric, t))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn general_round_trip() {
        let mut t = Triplets::new(2, 3);
        t.push(0, 2, 1.5);
        t.push(1, 0, -2.0);
        let a = CscMatrix::from_triplets(&t).unwrap();
        let mut buf = Vec::new();
        write_general(&mut buf, &a).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("%%MatrixMarket matrix coordinate real general\n2 3 2\n2 1 "));
        assert_eq!(read_general(&buf[..]).unwrap(), a);
    }

    #[test]
    fn symmetric_round_trip() {
        let mut t = Triplets::new(2, 2);
        t.push(0, 0, 4.0);
        t.push(1, 0, 0.1);
        let k = SymLowerMatrix::from_triplets(&t).unwrap();
        let mut buf = Vec::new();
        write_symmetric(&mut buf, &k).unwrap();
        assert_eq!(read_symmetric(&buf[..]).unwrap(), k);
        assert!(read_general(&buf[..]).is_err());
    }
}
