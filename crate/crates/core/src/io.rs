//! Output formatting and run-directory helpers.

use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::Result;

/// Environment variable overriding the default output directory.
pub const OUT_DIR_ENV: &str = "HKTRIPLES_OUT_DIR";

/// Full-precision float formatting used in every output file.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Output directory: explicit flag, then `$HKTRIPLES_OUT_DIR`, then `./out`.
pub fn resolve_out_dir(flag: Option<&Path>) -> PathBuf {
    if let Some(p) = flag {
        return p.to_path_buf();
    }
    match std::env::var_os(OUT_DIR_ENV) {
        Some(v) if !v.is_empty() => PathBuf::from(v),
        _ => PathBuf::from("out"),
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    let text = serde_json::to_string_pretty(value)?;
    std::fs::write(path, text + "\n")?;
    Ok(())
}
