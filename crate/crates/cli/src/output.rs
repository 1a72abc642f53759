//! Deterministic emitters: every float is printed as `{:.16e}` in both the
//! CSV and the JSON paths, so repeated runs with the same configuration
//! produce byte-identical output.

use std::io;
use std::path::Path;

use serde::Serialize;

/// Scientific notation with 17 significant digits — enough to round-trip
/// any f64 and stable across runs.
pub fn sci(v: f64) -> String {
    format!("{v:.16e}")
}

/// JSON formatter that routes every finite f64 through [`sci`]. Non-finite
/// values never reach `write_f64`; serde_json emits them as null upstream.
struct SciFormatter;

impl serde_json::ser::Formatter for SciFormatter {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W>(&mut self, writer: &mut W, value: f32) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        write!(writer, "{value:.16e}")
    }
}

/// Serialize to compact JSON with deterministic float formatting and a
/// trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> Result<String, String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SciFormatter);
    value
        .serialize(&mut ser)
        .map_err(|e| format!("serialization failed: {e}"))?;
    let mut text = String::from_utf8(buf).map_err(|e| format!("invalid utf8: {e}"))?;
    text.push('\n');
    Ok(text)
}

/// Quote a CSV field if it contains a delimiter, quote, or line break.
pub fn csv_field(text: &str) -> String {
    if text.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", text.replace('"', "\"\""))
    } else {
        text.to_string()
    }
}

/// Write to `out` when given, otherwise to stdout. File writes report the
/// destination on stderr so stdout stays reserved for data.
pub fn emit(text: &str, out: Option<&Path>) -> Result<(), String> {
    match out {
        Some(path) => {
            std::fs::write(path, text)
                .map_err(|e| format!("cannot write {}: {e}", path.display()))?;
            eprintln!("wrote {}", path.display());
            Ok(())
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sci_prints_seventeen_significant_digits() {
        assert_eq!(sci(1.0), "1.0000000000000000e0");
        assert_eq!(sci(-0.001), "-1.0000000000000000e-3");
    }

    #[test]
    fn json_floats_use_scientific_notation_and_stay_parseable() {
        #[derive(Serialize)]
        struct Probe {
            x: f64,
        }
        let text = to_json(&Probe { x: 0.5 }).unwrap();
        assert_eq!(text, "{\"x\":5.0000000000000000e-1}\n");
        let back: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(back["x"].as_f64().unwrap(), 0.5);
    }

    #[test]
    fn csv_fields_with_commas_are_quoted() {
        assert_eq!(csv_field("plain"), "plain");
        assert_eq!(csv_field("[-1,1] x [-1,1]"), "\"[-1,1] x [-1,1]\"");
        assert_eq!(csv_field("say \"hi\""), "\"say \"\"hi\"\"\"");
    }
}
