//! Browser bindings for the traveling-wave toolkit: the dispersion curve,
//! bundle-plus-profile computation, and a live invasion simulation.
//!
//! Numeric results cross the boundary as JSON strings (floats at 17
//! significant digits) or as `Float64Array`s for the per-frame simulation
//! state; see `www/` for the page that drives them.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use nlwave_core::{bounds, dispersion, io, simulate, wave, Kernel, ModelParams};

fn kernel_from(kind: &str, param: f64) -> Result<Kernel, String> {
    let k = match kind {
        "uniform" => Kernel::uniform(param),
        "triangular" => Kernel::triangular(param),
        "laplace" => Kernel::laplace(param),
        "gaussian" => Kernel::gaussian(param),
        other => return Err(format!("unknown kernel kind {other:?}")),
    };
    k.map_err(|e| e.to_string())
}

fn params_from(a: f64, b: f64, d: f64) -> Result<ModelParams, String> {
    ModelParams::new(a, b, d).map_err(|e| e.to_string())
}

fn err(e: impl ToString) -> JsValue {
    JsValue::from_str(&e.to_string())
}

#[derive(Serialize)]
struct SpeedCurve {
    s_star: f64,
    lambda_star: f64,
    attained: bool,
    lambda: Vec<f64>,
    objective: Vec<f64>,
    /// Decay-rate roots of A(.; s) for the requested speed ratio, when the
    /// ratio is strictly supercritical.
    s: f64,
    lambda1: Option<f64>,
    lambda2: Option<f64>,
}

/// Sample the speed objective `F(lambda) = (d [I2 - 1] + b) / lambda` around
/// its minimum and locate the root pair at `s = ratio * s*`.
#[wasm_bindgen]
pub fn speed_curve(
    a: f64,
    b: f64,
    d: f64,
    kernel_kind: &str,
    kernel_param: f64,
    ratio: f64,
    samples: usize,
) -> Result<String, JsValue> {
    let params = params_from(a, b, d).map_err(err)?;
    let k2 = kernel_from(kernel_kind, kernel_param).map_err(err)?;
    let report = dispersion::minimal_speed(&params, &k2).map_err(err)?;

    let n = samples.clamp(16, 4000);
    let hat = k2.lambda_hat();
    let hi = (3.0 * report.lambda_star).min(0.95 * hat);
    let lo = report.lambda_star / 8.0;
    let mut lambda = Vec::with_capacity(n);
    let mut objective = Vec::with_capacity(n);
    for i in 0..n {
        let l = lo + (hi - lo) * i as f64 / (n - 1) as f64;
        let f = (params.d * (k2.mgf(l).map_err(err)? - 1.0) + params.b) / l;
        lambda.push(l);
        objective.push(f);
    }

    let s = ratio * report.s_star;
    let roots = if ratio > 1.0 + 1e-9 {
        dispersion::a_roots(&params, &k2, s).ok()
    } else {
        None
    };
    let curve = SpeedCurve {
        s_star: report.s_star,
        lambda_star: report.lambda_star,
        attained: report.attained,
        lambda,
        objective,
        s,
        lambda1: roots.map(|r| r.lambda1),
        lambda2: roots.map(|r| r.lambda2),
    };
    io::to_json(&curve).map_err(err)
}

#[derive(Serialize)]
struct ProfileOut {
    s: f64,
    s_star: f64,
    critical: bool,
    residual: (f64, f64),
    iterations: usize,
    z: Vec<f64>,
    phi: Vec<f64>,
    psi: Vec<f64>,
    phi_upper: Vec<f64>,
    phi_lower: Vec<f64>,
    psi_upper: Vec<f64>,
    psi_lower: Vec<f64>,
}

/// Construct the upper/lower solution bundle at `s = ratio * s*` (the
/// critical construction when `ratio <= 1`), solve for the wave between the
/// bounds, and return the curves downsampled for plotting.
#[wasm_bindgen]
pub fn wave_profile(
    a: f64,
    b: f64,
    d: f64,
    kernel_kind: &str,
    kernel_param: f64,
    ratio: f64,
    half_width: f64,
    intervals: usize,
) -> Result<String, JsValue> {
    let params = params_from(a, b, d).map_err(err)?;
    let k1 = kernel_from(kernel_kind, kernel_param).map_err(err)?;
    let k2 = k1.clone();
    let report = dispersion::minimal_speed(&params, &k2).map_err(err)?;
    let critical = ratio <= 1.0 + 1e-12;
    let bundle = if critical {
        bounds::construct_critical(&params, &k1, &k2).map_err(err)?
    } else {
        bounds::construct_supercritical(&params, &k1, &k2, ratio * report.s_star).map_err(err)?
    };
    let tol = if critical { 1e-5 } else { 1e-6 };
    let opts = wave::SolveOptions {
        half_width,
        intervals: intervals.max(2000),
        tol,
        max_iter: 60_000,
        shift: 0.0,
    };
    let profile = match wave::solve(&params, &k1, &k2, &bundle, &opts) {
        Ok(p) => p,
        Err(nlwave_core::Error::NonConvergence { best: Some(best), .. }) => *best,
        Err(e) => return Err(err(e)),
    };

    // Thin the grid for transfer; the page plots at canvas resolution anyway.
    let stride = (profile.grid.len() / 1200).max(1);
    let take = |v: &[f64]| v.iter().step_by(stride).copied().collect::<Vec<_>>();
    let z = take(&profile.grid);
    let eval = |f: fn(&bounds::BoundsBundle, f64) -> f64| z.iter().map(|&x| f(&bundle, x)).collect();
    let out = ProfileOut {
        s: profile.s,
        s_star: report.s_star,
        critical,
        residual: profile.residual,
        iterations: profile.iterations,
        phi: take(&profile.phi),
        psi: take(&profile.psi),
        phi_upper: eval(bounds::BoundsBundle::phi_upper),
        phi_lower: eval(bounds::BoundsBundle::phi_lower),
        psi_upper: eval(bounds::BoundsBundle::psi_upper),
        psi_lower: eval(bounds::BoundsBundle::psi_lower),
        z,
    };
    io::to_json(&out).map_err(err)
}

/// Live invasion run: prey at carrying capacity, a predator pocket at the
/// left edge, stepped on demand from the page's animation loop.
#[wasm_bindgen]
pub struct Invasion {
    params: ModelParams,
    k1: Kernel,
    k2: Kernel,
    state: simulate::SimState,
    dt: f64,
    level: f64,
    trace: Vec<(f64, f64)>,
    s_star: f64,
}

#[wasm_bindgen]
impl Invasion {
    #[wasm_bindgen(constructor)]
    pub fn new(
        a: f64,
        b: f64,
        d: f64,
        kernel_kind: &str,
        kernel_param: f64,
        x_max: f64,
        h: f64,
    ) -> Result<Invasion, JsValue> {
        let params = params_from(a, b, d).map_err(err)?;
        let k1 = kernel_from(kernel_kind, kernel_param).map_err(err)?;
        let k2 = k1.clone();
        let s_star = dispersion::minimal_speed(&params, &k2).map_err(err)?.s_star;
        let n = (x_max / h).round() as usize + 1;
        let mut state = simulate::SimState {
            h,
            u: vec![1.0; n],
            v: vec![0.0; n],
            t: 0.0,
            u_floor: simulate::U_FLOOR,
            guard_activated: false,
        };
        for i in 0..n {
            if state.x(i) <= 1.0 {
                state.v[i] = 0.5;
            }
        }
        let dt = simulate::dt_max(&params, simulate::U_REF);
        let level = 0.5 * params.a_star();
        Ok(Invasion { params, k1, k2, state, dt, level, trace: Vec::new(), s_star })
    }

    /// Advance `steps` RK4 steps; returns the new simulation time.
    pub fn advance(&mut self, steps: usize) -> Result<f64, JsValue> {
        for _ in 0..steps {
            self.state = simulate::step(&self.state, self.dt, &self.params, &self.k1, &self.k2)
                .map_err(err)?;
            let (x, found) = simulate::front_position(&self.state, self.level);
            if found {
                self.trace.push((self.state.t, x));
            }
        }
        Ok(self.state.t)
    }

    pub fn time(&self) -> f64 {
        self.state.t
    }

    pub fn prey(&self) -> Vec<f64> {
        self.state.u.clone()
    }

    pub fn predator(&self) -> Vec<f64> {
        self.state.v.clone()
    }

    pub fn x_max(&self) -> f64 {
        self.state.x_max()
    }

    pub fn front(&self) -> f64 {
        self.trace.last().map(|&(_, x)| x).unwrap_or(0.0)
    }

    pub fn minimal_speed(&self) -> f64 {
        self.s_star
    }

    /// Least-squares front speed over the trailing 70% of the samples; NaN
    /// until enough of the run has accumulated.
    pub fn measured_speed(&self) -> f64 {
        let trace = simulate::FrontTrace { samples: self.trace.clone(), level: self.level };
        simulate::spreading_speed(&trace).map(|fit| fit.speed).unwrap_or(f64::NAN)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn speed_curve_json_is_well_formed() {
        let text = speed_curve(5.0, 1.0, 0.5, "uniform", 1.0, 1.2, 64).unwrap();
        assert!(text.contains("\"s_star\""));
        assert!(text.contains("\"lambda1\""));
        let parsed: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert!(parsed["s_star"].as_f64().unwrap() > 0.0);
        assert_eq!(parsed["lambda"].as_array().unwrap().len(), 64);
    }

    #[test]
    fn wave_profile_json_sandwiches_the_wave() {
        let text = wave_profile(5.0, 1.0, 0.5, "uniform", 1.0, 1.2, 40.0, 4000).unwrap();
        let parsed: serde_json::Value = serde_json::from_str(&text).unwrap();
        let phi = parsed["phi"].as_array().unwrap();
        let lo = parsed["phi_lower"].as_array().unwrap();
        let hi = parsed["phi_upper"].as_array().unwrap();
        for i in 0..phi.len() {
            let (p, l, h) = (
                phi[i].as_f64().unwrap(),
                lo[i].as_f64().unwrap(),
                hi[i].as_f64().unwrap(),
            );
            assert!(l - 1e-12 <= p && p <= h + 1e-12);
        }
    }

    #[test]
    fn invasion_steps_and_reports() {
        let mut sim = Invasion::new(5.0, 1.0, 0.5, "uniform", 1.0, 40.0, 0.1).unwrap();
        sim.advance(200).unwrap();
        assert!(sim.time() > 0.0);
        assert!(sim.front() > 0.0);
        assert_eq!(sim.prey().len(), sim.predator().len());
    }
}
