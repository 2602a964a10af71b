//! CSV and JSON emission.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};

/// `x` with 12 significant digits: fixed notation for `1e-4 <= |x| < 1e12`,
/// scientific otherwise.
pub fn sig12(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.11e}");
    let exp: i32 = sci[sci.find('e').expect("exponent") + 1..]
        .parse()
        .expect("integer exponent");
    if (-4..12).contains(&exp) {
        format!("{x:.*}", (11 - exp) as usize)
    } else {
        sci
    }
}

pub fn opt12(x: Option<f64>) -> String {
    x.map(sig12).unwrap_or_default()
}

/// Seconds since the Unix epoch, or `None` in reproducible mode.
pub fn timestamp(reproducible: bool) -> Option<u64> {
    if reproducible {
        None
    } else {
        SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .ok()
            .map(|d| d.as_secs())
    }
}

/// A CSV document with `#` header lines.
pub struct Csv {
    text: String,
}

impl Csv {
    pub fn new(config: &str, stamp: Option<u64>, columns: &[&str]) -> Self {
        let mut text = format!("# config: {config}\n");
        if let Some(t) = stamp {
            writeln!(text, "# generated: {t}").expect("write to string");
        }
        text.push_str(&columns.join(","));
        text.push('\n');
        Self { text }
    }

    pub fn comment(&mut self, line: &str) {
        writeln!(self.text, "# {line}").expect("write to string");
    }

    pub fn row(&mut self, fields: &[String]) {
        self.text.push_str(&fields.join(","));
        self.text.push('\n');
    }

    pub fn into_string(self) -> String {
        self.text
    }
}

/// Writes `text` to `out`, or to stdout when `out` is `None`.
pub fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(sig12(0.993042), "0.993042000000");
        assert_eq!(sig12(-30.0), "-30.0000000000");
        assert_eq!(sig12(1.0), "1.00000000000");
        assert_eq!(sig12(0.0), "0");
        assert_eq!(sig12(-0.0), "0");
        assert_eq!(sig12(9.999999999999), "10.0000000000");
        assert_eq!(sig12(1.5e-7), "1.50000000000e-7");
        assert_eq!(sig12(0.00012), "0.000120000000000");
        assert_eq!(sig12(f64::NAN), "NaN");
    }

    #[test]
    fn header_lines() {
        let mut c = Csv::new("q=2", None, &["a", "b"]);
        c.row(&["1".into(), "2".into()]);
        c.comment("note");
        assert_eq!(c.into_string(), "# config: q=2\na,b\n1,2\n# note\n");
        let c = Csv::new("q=2", Some(7), &["a"]);
        assert_eq!(c.into_string(), "# config: q=2\n# generated: 7\na\n");
    }
}
