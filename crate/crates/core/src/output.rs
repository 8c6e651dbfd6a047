//! Plain-text outputs: `key=value` run configurations, the `#` provenance line
//! heading every CSV file, and fixed-precision number formatting.

use std::fmt::Write as _;
use std::io::{self, Write};

use crate::error::{Error, Result};

/// Significant digits of every number written to CSV.
pub const SIGNIFICANT_DIGITS: usize = 12;

/// Ordered `key=value` pairs. Later insertions of a key replace earlier ones
/// in place.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RunConfig {
    entries: Vec<(String, String)>,
}

impl RunConfig {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, key: impl Into<String>, value: impl ToString) -> &mut Self {
        let key = key.into();
        let value = value.to_string();
        match self.entries.iter_mut().find(|(k, _)| *k == key) {
            Some(e) => e.1 = value,
            None => self.entries.push((key, value)),
        }
        self
    }

    pub fn with(mut self, key: impl Into<String>, value: impl ToString) -> Self {
        self.set(key, value);
        self
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    /// Parse a value, naming the key in the error.
    pub fn parse<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>> {
        self.get(key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|_| Error::Parse(format!("cannot parse {key}={v}")))
            })
            .transpose()
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entries of `other` override those here.
    pub fn merge(&mut self, other: &RunConfig) {
        for (k, v) in &other.entries {
            self.set(k.clone(), v);
        }
    }

    /// Config file: one `key = value` per line, `#` starts a comment.
    pub fn parse_file(text: &str) -> Result<Self> {
        let mut cfg = Self::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                Error::Parse(format!(
                    "line {}: expected key=value, got {raw:?}",
                    lineno + 1
                ))
            })?;
            let k = k.trim();
            if k.is_empty() {
                return Err(Error::Parse(format!("line {}: empty key", lineno + 1)));
            }
            cfg.set(k, unquote(v.trim()));
        }
        Ok(cfg)
    }

    /// Single provenance line: `# key=value key="spaced value" ...`.
    pub fn header_line(&self) -> String {
        let mut out = String::from("#");
        for (k, v) in &self.entries {
            let _ = write!(out, " {k}={}", quote(v));
        }
        out
    }

    /// Inverse of [`RunConfig::header_line`].
    pub fn parse_header(line: &str) -> Result<Self> {
        let body = line
            .strip_prefix('#')
            .ok_or_else(|| Error::Parse("provenance line must start with '#'".into()))?;
        let mut cfg = Self::new();
        let mut chars = body.chars().peekable();
        loop {
            while chars.peek().is_some_and(|c| c.is_whitespace()) {
                chars.next();
            }
            if chars.peek().is_none() {
                break;
            }
            let mut key = String::new();
            for c in chars.by_ref() {
                if c == '=' {
                    break;
                }
                key.push(c);
            }
            if key.is_empty() || key.contains(char::is_whitespace) {
                return Err(Error::Parse(format!("malformed provenance key {key:?}")));
            }
            let mut value = String::new();
            if chars.peek() == Some(&'"') {
                chars.next();
                let mut closed = false;
                while let Some(c) = chars.next() {
                    match c {
                        '\\' => {
                            if let Some(n) = chars.next() {
                                value.push(n);
                            }
                        }
                        '"' => {
                            closed = true;
                            break;
                        }
                        _ => value.push(c),
                    }
                }
                if !closed {
                    return Err(Error::Parse(format!("unterminated quote for {key}")));
                }
            } else {
                while let Some(&c) = chars.peek() {
                    if c.is_whitespace() {
                        break;
                    }
                    value.push(c);
                    chars.next();
                }
            }
            cfg.set(key, value);
        }
        Ok(cfg)
    }
}

fn quote(v: &str) -> String {
    if !v.is_empty()
        && !v
            .chars()
            .any(|c| c.is_whitespace() || c == '"' || c == '\\')
    {
        return v.to_string();
    }
    let mut out = String::from("\"");
    for c in v.chars() {
        if c == '"' || c == '\\' {
            out.push('\\');
        }
        out.push(c);
    }
    out.push('"');
    out
}

fn unquote(v: &str) -> String {
    if v.len() >= 2 && v.starts_with('"') && v.ends_with('"') {
        v[1..v.len() - 1]
            .replace("\\\"", "\"")
            .replace("\\\\", "\\")
    } else {
        v.to_string()
    }
}

/// `%.12g`-style formatting: 12 significant digits, trailing zeros removed,
/// scientific notation for very large or small magnitudes.
pub fn format_g(x: f64) -> String {
    format_sig(x, SIGNIFICANT_DIGITS)
}

pub fn format_sig(x: f64, digits: usize) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() {
            "-0".into()
        } else {
            "0".into()
        };
    }
    let digits = digits.max(1);
    // exponent after rounding to `digits` significant figures
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    if exp < -4 || exp >= digits as i32 {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// CSV writer that emits the provenance line, then a column header.
pub struct CsvWriter<W: Write> {
    out: W,
    columns: usize,
}

impl<W: Write> CsvWriter<W> {
    pub fn new(mut out: W, provenance: &RunConfig, columns: &[&str]) -> io::Result<Self> {
        writeln!(out, "{}", provenance.header_line())?;
        writeln!(out, "{}", columns.join(","))?;
        Ok(Self {
            out,
            columns: columns.len(),
        })
    }

    pub fn row(&mut self, cells: &[Cell]) -> io::Result<()> {
        debug_assert_eq!(cells.len(), self.columns);
        let line: Vec<String> = cells.iter().map(Cell::render).collect();
        writeln!(self.out, "{}", line.join(","))
    }

    pub fn finish(mut self) -> io::Result<W> {
        self.out.flush()?;
        Ok(self.out)
    }
}

/// One CSV cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(i64),
    Text(String),
}

impl Cell {
    pub fn render(&self) -> String {
        match self {
            Cell::Float(x) => format_g(*x),
            Cell::Int(i) => i.to_string(),
            Cell::Text(t) => t.clone(),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<i64> for Cell {
    fn from(x: i64) -> Self {
        Cell::Int(x)
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::Text(x.to_string())
    }
}

impl From<String> for Cell {
    fn from(x: String) -> Self {
        Cell::Text(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formats_like_printf_g() {
        let cases = [
            (1.0, "1"),
            (0.1, "0.1"),
            (1.0 / 3.0, "0.333333333333"),
            (123456789012.0, "123456789012"),
            (1234567890123.0, "1.23456789012e+12"),
            (1e-5, "1e-05"),
            (1.5e-4, "0.00015"),
            (-2.5, "-2.5"),
            (0.0, "0"),
            (9.9999999999999e-1, "1"),
        ];
        for (x, want) in cases {
            assert_eq!(format_g(x), want, "{x}");
        }
    }

    #[test]
    fn header_round_trips() {
        let cfg = RunConfig::new()
            .with("command", "lightcone")
            .with("n", 128)
            .with("s", -0.5)
            .with("note", "two words")
            .with("path", r#"a"b\c"#)
            .with("empty", "");
        let line = cfg.header_line();
        assert_eq!(RunConfig::parse_header(&line).unwrap(), cfg);
    }

    #[test]
    fn config_file_with_comments() {
        let text = "# sweep\nn = 64\ns=0.5 # inline\n\nboundary = \"periodic\"\n";
        let cfg = RunConfig::parse_file(text).unwrap();
        assert_eq!(cfg.parse::<usize>("n").unwrap(), Some(64));
        assert_eq!(cfg.parse::<f64>("s").unwrap(), Some(0.5));
        assert_eq!(cfg.get("boundary"), Some("periodic"));
        assert!(cfg.parse::<usize>("s").is_err());
        assert!(RunConfig::parse_file("oops").is_err());
    }

    #[test]
    fn csv_layout() {
        let cfg = RunConfig::new().with("n", 8);
        let mut w = CsvWriter::new(Vec::new(), &cfg, &["t", "site", "label"]).unwrap();
        w.row(&[0.5.into(), 3usize.into(), "x".into()]).unwrap();
        let text = String::from_utf8(w.finish().unwrap()).unwrap();
        assert_eq!(text, "# n=8\nt,site,label\n0.5,3,x\n");
    }
}
