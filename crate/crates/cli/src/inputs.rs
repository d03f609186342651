//! Reading parameter, sequence and window files.

use std::path::Path;

use anyhow::{bail, Context, Result};
use defect_cert::{io, RationalParams, WindowData};
use serde_json::Value;

pub fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn is_json(path: &Path, text: &str) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) || text.trim_start().starts_with('{')
}

/// A number given either as a JSON number or as a decimal string.
#[derive(Debug, Clone)]
pub struct Numeral(String);

impl Numeral {
    fn from_value(v: &Value) -> Result<Self> {
        match v {
            Value::Number(n) => Ok(Numeral(n.to_string())),
            Value::String(s) => Ok(Numeral(s.trim().to_string())),
            other => bail!("expected a number, found {other}"),
        }
    }

    pub fn integer(&self) -> Result<i128> {
        self.0.parse().with_context(|| format!("{:?} is not an integer", self.0))
    }

    pub fn real(&self) -> Result<f64> {
        let v: f64 = self.0.parse().with_context(|| format!("{:?} is not a number", self.0))?;
        if !v.is_finite() {
            bail!("{:?} is not finite", self.0);
        }
        Ok(v)
    }
}

fn numerals(v: &Value, what: &str) -> Result<Vec<Numeral>> {
    v.as_array()
        .with_context(|| format!("{what} must be an array"))?
        .iter()
        .map(Numeral::from_value)
        .collect()
}

/// Parameters as `{"initial": [...], "recurrence": [...]}` or `{"pi": [...]}`.
pub fn params_file(path: &Path) -> Result<Vec<Numeral>> {
    let v: Value = serde_json::from_str(&read(path)?).with_context(|| format!("parsing {}", path.display()))?;
    if let Some(pi) = v.get("pi") {
        return numerals(pi, "pi");
    }
    let (Some(y0), Some(q)) = (v.get("initial"), v.get("recurrence")) else {
        bail!("{}: expected keys \"pi\" or \"initial\"/\"recurrence\"", path.display());
    };
    let mut flat = numerals(y0, "initial")?;
    flat.extend(numerals(q, "recurrence")?);
    Ok(flat)
}

pub fn pi_list(items: &[String]) -> Vec<Numeral> {
    items.iter().map(|s| Numeral(s.trim().to_string())).collect()
}

pub fn integer_params(pi: &[Numeral]) -> Result<RationalParams<i128>> {
    let flat = pi.iter().map(Numeral::integer).collect::<Result<Vec<_>>>()?;
    Ok(RationalParams::from_flat(&flat)?)
}

pub fn real_params(pi: &[Numeral]) -> Result<RationalParams<f64>> {
    let flat = pi.iter().map(Numeral::real).collect::<Result<Vec<_>>>()?;
    Ok(RationalParams::from_flat(&flat)?)
}

/// Window sums from a JSON record `{"W", "K", "sums"}` or a `k,S_k` CSV; CSV
/// input needs the block length from elsewhere.
pub fn windows_file(path: &Path, block_length: Option<usize>) -> Result<WindowData<f64>> {
    let text = read(path)?;
    if is_json(path, &text) {
        let v: Value = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        let w = v.get("W").and_then(Value::as_u64).context("windows JSON needs a nonnegative integer \"W\"")?
            as usize;
        if let Some(flag) = block_length {
            if flag != w {
                bail!("block length {flag} conflicts with W={w} in {}", path.display());
            }
        }
        let sums = numerals(v.get("sums").context("windows JSON needs \"sums\"")?, "sums")?
            .iter()
            .map(Numeral::real)
            .collect::<Result<Vec<_>>>()?;
        if let Some(k) = v.get("K") {
            if k.as_u64() != Some(sums.len() as u64) {
                bail!("K={k} does not match {} sums", sums.len());
            }
        }
        Ok(WindowData::new(w, sums)?)
    } else {
        let w = block_length.context("CSV windows need the block length (--W or config)")?;
        Ok(io::windows_from_csv(&text, w)?)
    }
}
