//! CSV encodings: window data as `k,S_k`, sequences as `n,y_n`.

use std::fmt::Display;
use std::str::FromStr;

use crate::error::{CertError, Result};
use crate::signal::{Finite, WindowData};

fn to_csv<T: Display>(header: [&str; 2], values: &[T]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| CertError::Parse(e.to_string());
    w.write_record(header).map_err(io)?;
    for (i, v) in values.iter().enumerate() {
        w.write_record([i.to_string(), v.to_string()]).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| CertError::Parse(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CertError::Parse(e.to_string()))
}

fn from_csv<T: FromStr>(header: [&str; 2], text: &str) -> Result<Vec<T>> {
    let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let found = r.headers().map_err(|e| CertError::Parse(e.to_string()))?.clone();
    if found.len() != 2 || found[0] != *header[0] || found[1] != *header[1] {
        return Err(CertError::Parse(format!(
            "expected header {},{}; found {:?}",
            header[0],
            header[1],
            found.iter().collect::<Vec<_>>()
        )));
    }
    let mut out = Vec::new();
    for (row, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| CertError::Parse(e.to_string()))?;
        if rec.len() != 2 {
            return Err(CertError::Parse(format!("row {row}: expected 2 fields, got {}", rec.len())));
        }
        let idx: usize = rec[0]
            .parse()
            .map_err(|_| CertError::Parse(format!("row {row}: bad index {:?}", &rec[0])))?;
        if idx != row {
            return Err(CertError::Parse(format!("row {row}: index {idx} out of order")));
        }
        let v = rec[1]
            .parse()
            .map_err(|_| CertError::Parse(format!("row {row}: bad value {:?}", &rec[1])))?;
        out.push(v);
    }
    Ok(out)
}

pub fn windows_to_csv<T: Display>(w: &WindowData<T>) -> Result<String> {
    to_csv(["k", "S_k"], w.sums())
}

/// Parses `k,S_k` rows; the block length is not part of the CSV.
pub fn windows_from_csv<T: FromStr + Finite>(text: &str, block_length: usize) -> Result<WindowData<T>> {
    WindowData::new(block_length, from_csv(["k", "S_k"], text)?)
}

pub fn sequence_to_csv<T: Display>(values: &[T]) -> Result<String> {
    to_csv(["n", "y_n"], values)
}

pub fn sequence_from_csv<T: FromStr>(text: &str) -> Result<Vec<T>> {
    from_csv(["n", "y_n"], text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn windows_round_trip() {
        let w = WindowData::new(8, vec![4.791914, 1.276888, 7.87e-6]).unwrap();
        let text = windows_to_csv(&w).unwrap();
        assert!(text.starts_with("k,S_k\n0,4.791914\n"));
        assert_eq!(windows_from_csv::<f64>(&text, 8).unwrap(), w);
    }

    #[test]
    fn exact_windows_round_trip() {
        let w = WindowData::new(8, vec![-16i128, -665805326548992]).unwrap();
        let text = windows_to_csv(&w).unwrap();
        assert_eq!(windows_from_csv::<i128>(&text, 8).unwrap(), w);
    }

    #[test]
    fn malformed_inputs() {
        assert!(windows_from_csv::<f64>("a,b\n0,1\n", 1).is_err());
        assert!(windows_from_csv::<f64>("k,S_k\n1,1\n", 1).is_err());
        assert!(windows_from_csv::<f64>("k,S_k\n0,abc\n", 1).is_err());
        assert!(windows_from_csv::<f64>("k,S_k\n0,inf\n", 1).is_err());
        assert!(windows_from_csv::<f64>("k,S_k\n", 1).is_err());
    }

    #[test]
    fn sequences_round_trip() {
        let y = vec![1.0, 0.5, 0.25];
        assert_eq!(sequence_from_csv::<f64>(&sequence_to_csv(&y).unwrap()).unwrap(), y);
    }
}
