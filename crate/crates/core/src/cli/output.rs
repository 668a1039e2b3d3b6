use std::io::{self, Write};
use std::path::Path;

use serde::Serialize;

/// JSON with every float written as `{:.16e}` (17 significant digits), so
/// sidecars diff byte-for-byte across reruns.
struct SignificantDigits;

impl serde_json::ser::Formatter for SignificantDigits {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        if value.is_finite() {
            write!(w, "{value:.16e}")
        } else {
            w.write_all(b"null")
        }
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, value as f64)
    }
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SignificantDigits);
    value.serialize(&mut ser).expect("serializable value");
    String::from_utf8(buf).expect("json is utf-8")
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> io::Result<()> {
    let mut s = to_json(value);
    s.push('\n');
    std::fs::write(path, s)
}

/// Lines of a CSV file that start with `#`, with the marker stripped.
pub fn comment_lines(text: &str) -> impl Iterator<Item = &str> {
    text.lines().filter_map(|l| l.strip_prefix('#')).map(str::trim)
}

/// `key=value` from the comment lines.
pub fn comment_value<'a>(text: &'a str, key: &str) -> Option<&'a str> {
    comment_lines(text).find_map(|l| l.strip_prefix(key).and_then(|r| r.strip_prefix('=')))
}

/// Numeric CSV body after the `#` lines: header names and rows. Empty
/// cells become `NaN`.
pub fn read_numeric_csv(text: &str) -> Result<(Vec<String>, Vec<Vec<f64>>), String> {
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).has_headers(true).from_reader(text.as_bytes());
    let header: Vec<String> = rdr.headers().map_err(|e| e.to_string())?.iter().map(str::to_string).collect();
    if header.is_empty() || header.iter().all(String::is_empty) {
        return Err("missing header".into());
    }
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| format!("row {}: {e}", i + 1))?;
        let row = rec
            .iter()
            .map(|c| {
                if c.trim().is_empty() {
                    Ok(f64::NAN)
                } else {
                    c.trim().parse::<f64>().map_err(|_| format!("row {}: not a number: {c:?}", i + 1))
                }
            })
            .collect::<Result<Vec<f64>, String>>()?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err("no data rows".into());
    }
    Ok((header, rows))
}
