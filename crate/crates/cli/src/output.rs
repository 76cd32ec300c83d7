use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use qsic_core::{BigRational, Result, Scalar};

use crate::Global;

pub const COUNTS_SCHEMA: &str = "# qsic-counts v1";
pub const ENTROPY_SCHEMA: &str = "# qsic-entropy v1";

/// Six significant digits, fixed notation.
pub fn sig6(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x:.5}");
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (5 - magnitude).max(0) as usize;
    format!("{x:.decimals$}")
}

pub fn probability(p: &BigRational, exact: bool) -> String {
    if exact {
        p.to_string()
    } else {
        sig6(Scalar::to_f64(p))
    }
}

pub fn file_name(set: &str) -> String {
    set.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

pub fn create(g: &Global, name: &str) -> Result<(PathBuf, BufWriter<File>)> {
    fs::create_dir_all(&g.out_dir)?;
    let path = g.out_dir.join(name);
    Ok((path.clone(), BufWriter::new(File::create(path)?)))
}

pub fn create_at(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    Ok(BufWriter::new(File::create(path)?))
}

/// Schema line, `# key: value` lines and the optional creation time.
pub fn header(
    out: &mut impl Write,
    g: &Global,
    schema: &str,
    meta: &[(&str, String)],
) -> Result<()> {
    writeln!(out, "{schema}")?;
    for (k, v) in meta {
        writeln!(out, "# {k}: {v}")?;
    }
    if !g.no_timestamp {
        writeln!(
            out,
            "# created: {}",
            chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
        )?;
    }
    Ok(())
}
