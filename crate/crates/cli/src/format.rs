//! Numeric formatting and CSV emission.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

/// Shortest fixed or exponential rendering with 17 significant digits,
/// following C's `%.17g`. Parsing the result gives back the same `f64`.
pub fn g17(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return if v.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{:.16e}", v);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..17).contains(&exp) {
        let m = trim_fraction(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        return format!("{m}e{sign}{:02}", exp.abs());
    }
    let decimals = (16 - exp).max(0) as usize;
    trim_fraction(&format!("{:.*}", decimals, v)).to_string()
}

fn trim_fraction(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// One CSV field.
pub enum Field<'a> {
    Int(u64),
    Real(f64),
    Text(&'a str),
    Bool(bool),
}

impl From<f64> for Field<'_> {
    fn from(v: f64) -> Self {
        Field::Real(v)
    }
}

impl From<usize> for Field<'_> {
    fn from(v: usize) -> Self {
        Field::Int(v as u64)
    }
}

impl From<u64> for Field<'_> {
    fn from(v: u64) -> Self {
        Field::Int(v)
    }
}

impl<'a> From<&'a str> for Field<'a> {
    fn from(v: &'a str) -> Self {
        Field::Text(v)
    }
}

impl From<bool> for Field<'_> {
    fn from(v: bool) -> Self {
        Field::Bool(v)
    }
}

/// Accumulates rows in memory; text fields are quoted when needed.
pub struct Csv {
    columns: usize,
    text: String,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        Self { columns: header.len(), text: header.join(",") + "\n" }
    }

    pub fn row(&mut self, fields: &[Field<'_>]) {
        assert_eq!(fields.len(), self.columns, "CSV row width");
        for (i, f) in fields.iter().enumerate() {
            if i > 0 {
                self.text.push(',');
            }
            match f {
                Field::Int(v) => write!(self.text, "{v}").unwrap(),
                Field::Real(v) => self.text.push_str(&g17(*v)),
                Field::Bool(v) => write!(self.text, "{v}").unwrap(),
                Field::Text(s) if s.contains([',', '"', '\n']) => {
                    write!(self.text, "\"{}\"", s.replace('"', "\"\"")).unwrap()
                }
                Field::Text(s) => self.text.push_str(s),
            }
        }
        self.text.push('\n');
    }

    pub fn write(&self, path: &Path) -> io::Result<()> {
        fs::write(path, &self.text)
    }
}
