//! The 20-parameter vector of the Kramers half-life parameterization and its
//! plain-text file format (`index value rel_err_percent` per line).

use std::fmt::Write as _;
use std::ops::Index;

use crate::error::{Error, Result};

pub const N_PARAMS: usize = 20;

const TABLE4: &str = include_str!("../data/table4.params");

#[derive(Debug, Clone, PartialEq)]
pub struct ParameterSet {
    /// a_1 … a_20, stored zero-based.
    pub a: [f64; N_PARAMS],
    /// Relative errors Δa_i/a_i as fractions.
    pub rel_err: [f64; N_PARAMS],
}

impl ParameterSet {
    pub fn new(a: [f64; N_PARAMS]) -> Self {
        ParameterSet {
            a,
            rel_err: [0.0; N_PARAMS],
        }
    }

    pub fn zero() -> Self {
        Self::new([0.0; N_PARAMS])
    }

    /// The published solution of the inverse problem.
    pub fn table4() -> Self {
        parse_params(TABLE4).expect("embedded parameter table is valid")
    }

    pub fn from_slice(values: &[f64]) -> Result<Self> {
        let a: [f64; N_PARAMS] = values
            .try_into()
            .map_err(|_| Error::Config(format!("expected {N_PARAMS} parameters, got {}", values.len())))?;
        Ok(Self::new(a))
    }

    /// 1-based accessor matching the a_i numbering.
    pub fn get(&self, i: usize) -> f64 {
        self.a[i - 1]
    }

    pub fn to_file_string(&self) -> String {
        let mut s = String::new();
        for (i, (v, e)) in self.a.iter().zip(&self.rel_err).enumerate() {
            let _ = writeln!(s, "{:>2} {:>22.13E} {:.4}", i + 1, v, e * 100.0);
        }
        s
    }
}

impl Index<usize> for ParameterSet {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.a[i]
    }
}

/// Reads a parameter file. Blank lines and lines starting with `#` are
/// skipped; every index 1–20 must appear exactly once.
pub fn parse_params(text: &str) -> Result<ParameterSet> {
    let mut a = [f64::NAN; N_PARAMS];
    let mut rel_err = [0.0; N_PARAMS];
    let mut seen = [false; N_PARAMS];
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let bad = |message: String| Error::Parse {
            line: lineno + 1,
            message,
        };
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(bad(format!("expected `index value rel_err_percent`, got `{line}`")));
        }
        let index: usize = fields[0].parse().map_err(|_| bad(format!("bad index `{}`", fields[0])))?;
        if !(1..=N_PARAMS).contains(&index) {
            return Err(bad(format!("index {index} outside 1..={N_PARAMS}")));
        }
        if seen[index - 1] {
            return Err(bad(format!("duplicate index {index}")));
        }
        let value: f64 = fields[1].parse().map_err(|_| bad(format!("bad value `{}`", fields[1])))?;
        let pct: f64 = fields[2].parse().map_err(|_| bad(format!("bad error `{}`", fields[2])))?;
        if !value.is_finite() || !(pct >= 0.0) {
            return Err(bad("value must be finite and error non-negative".into()));
        }
        a[index - 1] = value;
        rel_err[index - 1] = pct / 100.0;
        seen[index - 1] = true;
    }
    if let Some(missing) = seen.iter().position(|s| !s) {
        return Err(Error::Parse {
            line: 0,
            message: format!("parameter a_{} missing", missing + 1),
        });
    }
    Ok(ParameterSet { a, rel_err })
}
