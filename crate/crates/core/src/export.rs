//! Fixed-format number output shared by every CSV writer, and the JSON
//! sidecars written next to output files.

use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::Result;

/// 17 significant digits in scientific notation; round-trips any `f64`.
pub fn fmt17(v: f64) -> String {
    if v.is_nan() {
        "nan".to_string()
    } else if v.is_infinite() {
        if v > 0.0 {
            "inf".to_string()
        } else {
            "-inf".to_string()
        }
    } else {
        format!("{v:.16e}")
    }
}

/// Join a row of numbers with commas.
pub fn csv_row(values: &[f64]) -> String {
    values.iter().map(|&v| fmt17(v)).collect::<Vec<_>>().join(",")
}

/// `<path>.json`
pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut os = path.as_os_str().to_owned();
    os.push(".json");
    PathBuf::from(os)
}

/// Write `value` as pretty JSON to the sidecar of `path`.
pub fn write_sidecar<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(std::io::Error::other)?;
    std::fs::write(sidecar_path(path), text + "\n")?;
    Ok(())
}
