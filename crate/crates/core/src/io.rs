//! Deterministic serialization: JSON with floats at 17 significant digits
//! (lossless for f64 and byte-stable across runs) and the CSV formats for
//! profiles, simulation snapshots, and front traces.

use serde::Serialize;
use serde_json::ser::Formatter;

use crate::dispersion::ModelParams;
use crate::error::{Error, Result};
use crate::simulate::{FrontTrace, SimState};
use crate::wave::WaveProfile;

struct Sci17;

impl Formatter for Sci17 {
    fn write_f64<W: ?Sized + std::io::Write>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + std::io::Write>(&mut self, writer: &mut W, value: f32) -> std::io::Result<()> {
        write!(writer, "{value:.16e}")
    }
}

/// Serialize to JSON with every float at 17 significant digits.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, Sci17);
    value
        .serialize(&mut ser)
        .map_err(|e| Error::Invalid(format!("serialization failed: {e}")))?;
    out.push(b'\n');
    String::from_utf8(out).map_err(|e| Error::Invalid(format!("non-utf8 output: {e}")))
}

pub fn from_json<T: serde::de::DeserializeOwned>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Invalid(format!("malformed JSON: {e}")))
}

fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

/// Profile CSV: header `z,phi,psi` then one row per grid point.
pub fn profile_to_csv(profile: &WaveProfile) -> String {
    let mut out = String::with_capacity(profile.grid.len() * 72 + 16);
    out.push_str("z,phi,psi\n");
    for i in 0..profile.grid.len() {
        out.push_str(&fmt17(profile.grid[i]));
        out.push(',');
        out.push_str(&fmt17(profile.phi[i]));
        out.push(',');
        out.push_str(&fmt17(profile.psi[i]));
        out.push('\n');
    }
    out
}

/// Metadata written next to a profile CSV.
#[derive(Debug, Clone, Serialize, serde::Deserialize)]
pub struct ProfileSidecar {
    pub s: f64,
    pub params: ModelParams,
    pub beta: f64,
    pub residual: (f64, f64),
    pub iterations: usize,
    pub converged: bool,
    /// Name of the bundle document the profile was solved against.
    pub bundle: String,
}

impl ProfileSidecar {
    pub fn of(profile: &WaveProfile, bundle: &str) -> Self {
        Self {
            s: profile.s,
            params: profile.params,
            beta: profile.beta,
            residual: profile.residual,
            iterations: profile.iterations,
            converged: profile.converged,
            bundle: bundle.to_string(),
        }
    }
}

/// Rebuild a profile from its CSV plus sidecar.
pub fn profile_from_csv(csv: &str, sidecar: &ProfileSidecar) -> Result<WaveProfile> {
    let mut grid = Vec::new();
    let mut phi = Vec::new();
    let mut psi = Vec::new();
    for (ln, line) in csv.lines().enumerate() {
        if ln == 0 {
            if line.trim() != "z,phi,psi" {
                return Err(Error::Invalid(format!("profile CSV: unexpected header {line:?}")));
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let mut cols = line.split(',');
        let mut take = || -> Result<f64> {
            cols.next()
                .ok_or_else(|| Error::Invalid(format!("profile CSV: short row at line {}", ln + 1)))?
                .trim()
                .parse()
                .map_err(|e| Error::Invalid(format!("profile CSV line {}: {e}", ln + 1)))
        };
        grid.push(take()?);
        phi.push(take()?);
        psi.push(take()?);
    }
    if grid.len() < 2 {
        return Err(Error::Invalid("profile CSV: need at least two rows".into()));
    }
    Ok(WaveProfile {
        s: sidecar.s,
        params: sidecar.params,
        grid,
        phi,
        psi,
        beta: sidecar.beta,
        residual: sidecar.residual,
        iterations: sidecar.iterations,
        converged: sidecar.converged,
    })
}

/// Snapshot CSV: header `x,U,V`.
pub fn snapshot_to_csv(state: &SimState) -> String {
    let mut out = String::with_capacity(state.u.len() * 72 + 8);
    out.push_str("x,U,V\n");
    for i in 0..state.u.len() {
        out.push_str(&fmt17(state.x(i)));
        out.push(',');
        out.push_str(&fmt17(state.u[i]));
        out.push(',');
        out.push_str(&fmt17(state.v[i]));
        out.push('\n');
    }
    out
}

/// Front trace CSV: header `t,x_front`.
pub fn trace_to_csv(trace: &FrontTrace) -> String {
    let mut out = String::with_capacity(trace.samples.len() * 48 + 12);
    out.push_str("t,x_front\n");
    for (t, x) in &trace.samples {
        out.push_str(&fmt17(*t));
        out.push(',');
        out.push_str(&fmt17(*x));
        out.push('\n');
    }
    out
}
