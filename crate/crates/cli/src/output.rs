use std::io::Write;
use std::path::Path;

use qrel_core::verify::Report;

use crate::config::Format;
use crate::InputError;

/// Writes `contents` to a temporary file next to `path`, then renames it.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), InputError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| InputError(format!("{}: {e}", dir.display())))?;
    tmp.write_all(contents.as_bytes())
        .and_then(|_| tmp.as_file().sync_all())
        .map_err(|e| InputError(format!("{}: {e}", path.display())))?;
    tmp.persist(path)
        .map_err(|e| InputError(format!("{}: {}", path.display(), e.error)))?;
    Ok(())
}

pub fn render(report: &Report, format: Format) -> String {
    match format {
        Format::Json => report.to_json() + "\n",
        Format::Csv => report.to_csv(),
    }
}

/// Writes the report if a destination is given, then prints the summary.
pub fn emit(report: &Report, out: Option<&Path>, format: Format) -> Result<(), InputError> {
    if let Some(path) = out {
        write_atomic(path, &render(report, format))?;
    }
    println!("{}", report.summary());
    Ok(())
}

/// Fixed-point with 12 decimals, or `inf`.
pub fn fixed12(x: f64) -> String {
    if x.is_infinite() {
        "inf".into()
    } else {
        format!("{x:.12}")
    }
}

/// JSON number, or the strings `"inf"` / `"nan"` outside the finite range.
pub fn json_num(x: f64) -> serde_json::Value {
    if x.is_finite() {
        serde_json::json!(x)
    } else if x.is_nan() {
        serde_json::json!("nan")
    } else if x > 0.0 {
        serde_json::json!("inf")
    } else {
        serde_json::json!("-inf")
    }
}
