//! Persistence: profile CSV/JSON, density sweeps, atomic writes, hashes.
//!
//! All floating point output uses 17 significant digits so files round-trip
//! bit-exactly. Writes go through a temp-then-rename so partial artifacts
//! never appear under the final name.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::io::Write;
use std::path::Path;
use thiserror::Error;

use crate::c2::C2;
use crate::geom::EquivariantRayPair;
use crate::profile::{ProfileCurve, ProfileError, ProfileSample};

#[derive(Debug, Error)]
pub enum IoError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("{path}:{line}: field `{field}`: {message}")]
    Malformed {
        path: String,
        line: usize,
        field: String,
        message: String,
    },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Profile(#[from] ProfileError),
}

/// 17 significant digits; round-trips f64 exactly.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes bytes to `path` atomically (temp file in the same directory, then
/// rename).
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<(), IoError> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    std::fs::create_dir_all(dir)?;
    let tmp = dir.join(format!(
        ".{}.tmp-{}",
        path.file_name().and_then(|n| n.to_str()).unwrap_or("artifact"),
        std::process::id()
    ));
    {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    std::fs::rename(&tmp, path)?;
    Ok(())
}

pub fn write_json_atomic<T: Serialize>(path: &Path, value: &T) -> Result<(), IoError> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    atomic_write(path, text.as_bytes())
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    format!("{:x}", hasher.finalize())
}

pub fn sha256_hex_file(path: &Path) -> Result<String, IoError> {
    Ok(sha256_hex(&std::fs::read(path)?))
}

// ---------------------------------------------------------------------------
// Profile CSV
// ---------------------------------------------------------------------------

/// Writes the profile as CSV with header `s,r,phi,psi`.
pub fn write_profile_csv(path: &Path, curve: &ProfileCurve) -> Result<(), IoError> {
    let mut out = String::with_capacity(curve.len() * 96 + 16);
    out.push_str("s,r,phi,psi\n");
    for p in curve.samples() {
        out.push_str(&format!(
            "{},{},{},{}\n",
            fmt17(p.s),
            fmt17(p.r),
            fmt17(p.phi),
            fmt17(p.psi)
        ));
    }
    atomic_write(path, out.as_bytes())
}

/// Reads a profile CSV, with line/field diagnostics on malformed input.
pub fn read_profile_csv(path: &Path) -> Result<ProfileCurve, IoError> {
    let text = std::fs::read_to_string(path)?;
    let path_str = path.display().to_string();
    let malformed = |line: usize, field: &str, message: String| IoError::Malformed {
        path: path_str.clone(),
        line,
        field: field.to_string(),
        message,
    };
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.trim() == "s,r,phi,psi" => {}
        Some((_, header)) => {
            return Err(malformed(1, "header", format!("expected `s,r,phi,psi`, got `{header}`")))
        }
        None => return Err(malformed(1, "header", "empty file".into())),
    }
    let mut samples = Vec::new();
    for (idx, line) in lines {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 {
            return Err(malformed(
                line_no,
                "row",
                format!("expected 4 fields, got {}", fields.len()),
            ));
        }
        let names = ["s", "r", "phi", "psi"];
        let mut vals = [0.0f64; 4];
        for (k, (raw, name)) in fields.iter().zip(names).enumerate() {
            vals[k] = raw
                .trim()
                .parse::<f64>()
                .map_err(|e| malformed(line_no, name, e.to_string()))?;
            if !vals[k].is_finite() {
                return Err(malformed(line_no, name, "non-finite value".into()));
            }
        }
        if vals[1] <= 0.0 {
            return Err(malformed(line_no, "r", format!("radius must be positive, got {}", vals[1])));
        }
        samples.push(ProfileSample {
            s: vals[0],
            r: vals[1],
            phi: vals[2],
            psi: vals[3],
        });
    }
    if samples.len() < 4 {
        return Err(malformed(samples.len() + 1, "row", "need at least 4 samples".into()));
    }
    let step = samples[1].s - samples[0].s;
    Ok(ProfileCurve::from_samples(samples, step)?)
}

/// Profile sidecar metadata (`{rays, tolerance, stepSize, residual}`).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProfileMetadata {
    pub rays: EquivariantRayPair,
    pub tolerance: f64,
    #[serde(rename = "stepSize")]
    pub step_size: f64,
    pub residual: f64,
}

// ---------------------------------------------------------------------------
// Density CSV
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug)]
pub struct DensityRow {
    pub center: C2,
    pub l: f64,
    pub t: f64,
    pub theta: f64,
}

/// Writes density sweep rows as CSV `x0_1,x0_2,x0_3,x0_4,l,t,theta`.
pub fn write_density_csv(path: &Path, rows: &[DensityRow]) -> Result<(), IoError> {
    let mut out = String::with_capacity(rows.len() * 160 + 32);
    out.push_str("x0_1,x0_2,x0_3,x0_4,l,t,theta\n");
    for row in rows {
        let c = row.center.coords();
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            fmt17(c[0]),
            fmt17(c[1]),
            fmt17(c[2]),
            fmt17(c[3]),
            fmt17(row.l),
            fmt17(row.t),
            fmt17(row.theta)
        ));
    }
    atomic_write(path, out.as_bytes())
}
