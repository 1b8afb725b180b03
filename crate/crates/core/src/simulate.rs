//! Time integration of the full prey-predator system, invasion-front
//! tracking, and spreading-speed measurement.
//!
//! The dispersal operator is bounded (convolution minus identity), so an
//! explicit fourth-order Runge-Kutta step is stable without any 1/h^2 time
//! step restriction; the step bound comes from the reaction rates alone.
//! The singular term V/U is guarded by a floor on U that is reported
//! whenever it activates (it never does at reference parameters).

use serde::{Deserialize, Serialize};

use crate::dispersion::ModelParams;
use crate::error::{Error, Result};
use crate::kernels::{DiscreteKernel, Kernel};
use crate::numeric::linear_fit;
use crate::wave::WaveProfile;

/// Floor applied to the prey density inside V/U.
pub const U_FLOOR: f64 = 1e-8;

/// Reference prey level used in the explicit stability bound. The invasion
/// runs keep `min U` above 0.1, so the reaction Lipschitz constant is taken
/// at that level rather than at the singularity guard.
pub const U_REF: f64 = 0.1;

/// Predator densities this far below zero abort the run; smaller negative
/// round-off is clamped to zero.
pub const V_NEGATIVE_TOL: f64 = 1e-12;

/// Gridded state of the system on `[0, X]` with spacing `h`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimState {
    pub h: f64,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub t: f64,
    pub u_floor: f64,
    /// Sticky flag: the V/U guard clipped at least once during the run.
    pub guard_activated: bool,
}

impl SimState {
    pub fn x(&self, i: usize) -> f64 {
        i as f64 * self.h
    }

    pub fn x_max(&self) -> f64 {
        (self.u.len() - 1) as f64 * self.h
    }
}

/// Time step bound for the explicit RK4 update: the nonlocal operator
/// contributes at most `2 max(1, d)` and the reactions at most
/// `a + b (1 + 1/u_ref)` to the right-hand side Lipschitz constant.
pub fn dt_max(params: &ModelParams, u_ref: f64) -> f64 {
    0.25 / (params.d.max(1.0) + params.a + params.b * (1.0 + 1.0 / u_ref))
}

/// Right-hand side of the system at the given state.
pub fn rhs(state: &SimState, params: &ModelParams, k1: &Kernel, k2: &Kernel) -> (Vec<f64>, Vec<f64>) {
    let dk1 = k1.discrete(state.h);
    let dk2 = k2.discrete(state.h);
    rhs_with(&state.u, &state.v, params, &dk1, &dk2, state.u_floor)
}

fn rhs_with(
    u: &[f64],
    v: &[f64],
    params: &ModelParams,
    dk1: &DiscreteKernel,
    dk2: &DiscreteKernel,
    u_floor: f64,
) -> (Vec<f64>, Vec<f64>) {
    let n = u.len();
    let last = n as i64 - 1;
    // Both densities extend by their edge values, so spatially constant
    // states are exactly stationary. Ahead of an invasion front the predator
    // edge value is zero, which recovers the zero right extension.
    let u_of = |j: i64| u[j.clamp(0, last) as usize];
    let v_of = |j: i64| v[j.clamp(0, last) as usize];
    let mut du = vec![0.0; n];
    let mut dv = vec![0.0; n];
    for i in 0..n {
        let (ui, vi) = (u[i], v[i]);
        du[i] = dk1.apply_at(i as i64, &u_of) - ui + params.a * ui * (1.0 - ui) - vi;
        dv[i] = params.d * (dk2.apply_at(i as i64, &v_of) - vi)
            + params.b * vi * (1.0 - vi / ui.max(u_floor));
    }
    (du, dv)
}

/// One classical RK4 step with a state-invariant check afterwards.
pub fn step(
    state: &SimState,
    dt: f64,
    params: &ModelParams,
    k1: &Kernel,
    k2: &Kernel,
) -> Result<SimState> {
    let dk1 = k1.discrete(state.h);
    let dk2 = k2.discrete(state.h);
    step_with(state, dt, params, &dk1, &dk2)
}

fn step_with(
    state: &SimState,
    dt: f64,
    params: &ModelParams,
    dk1: &DiscreteKernel,
    dk2: &DiscreteKernel,
) -> Result<SimState> {
    let n = state.u.len();
    let fl = state.u_floor;
    let eval = |u: &[f64], v: &[f64]| rhs_with(u, v, params, dk1, dk2, fl);

    let (k1u, k1v) = eval(&state.u, &state.v);
    let mid = |base: &[f64], k: &[f64], w: f64| -> Vec<f64> {
        base.iter().zip(k).map(|(b, ki)| b + w * dt * ki).collect()
    };
    let (u2, v2) = (mid(&state.u, &k1u, 0.5), mid(&state.v, &k1v, 0.5));
    let (k2u, k2v) = eval(&u2, &v2);
    let (u3, v3) = (mid(&state.u, &k2u, 0.5), mid(&state.v, &k2v, 0.5));
    let (k3u, k3v) = eval(&u3, &v3);
    let (u4, v4) = (mid(&state.u, &k3u, 1.0), mid(&state.v, &k3v, 1.0));
    let (k4u, k4v) = eval(&u4, &v4);

    let mut u = vec![0.0; n];
    let mut v = vec![0.0; n];
    for i in 0..n {
        u[i] = state.u[i] + dt / 6.0 * (k1u[i] + 2.0 * k2u[i] + 2.0 * k3u[i] + k4u[i]);
        v[i] = state.v[i] + dt / 6.0 * (k1v[i] + 2.0 * k2v[i] + 2.0 * k3v[i] + k4v[i]);
    }

    let mut next = SimState {
        h: state.h,
        u,
        v,
        t: state.t + dt,
        u_floor: fl,
        guard_activated: state.guard_activated,
    };
    let min_u = next.u.iter().cloned().fold(f64::INFINITY, f64::min);
    if min_u <= 0.0 {
        return Err(Error::SimAbort {
            t: next.t,
            reason: format!("prey density reached {min_u}; the V/U singularity is live"),
            snapshot: Box::new(next),
        });
    }
    if min_u < fl {
        next.guard_activated = true;
    }
    let min_v = next.v.iter().cloned().fold(f64::INFINITY, f64::min);
    if min_v < -V_NEGATIVE_TOL {
        return Err(Error::SimAbort {
            t: next.t,
            reason: format!("predator density reached {min_v}"),
            snapshot: Box::new(next),
        });
    }
    for vi in next.v.iter_mut() {
        if *vi < 0.0 {
            *vi = 0.0;
        }
    }
    Ok(next)
}

/// Initial data for a run.
pub enum InitialData<'a> {
    /// Prey at carrying capacity everywhere, predator 0.5 on [0, 1].
    Invasion,
    /// A wave profile embedded with its center at `offset`.
    Wave { profile: &'a WaveProfile, offset: f64 },
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub x_max: f64,
    pub h: f64,
    pub t_end: f64,
    /// Explicit step; defaults to the stability bound.
    pub dt: Option<f64>,
    /// Interval between stored snapshots (time units); non-positive stores
    /// only the endpoints.
    pub snapshot_every: f64,
    /// Front-tracking level; defaults to half the co-existence level.
    pub level: Option<f64>,
    /// Additional thresholds to track alongside the primary level.
    pub extra_levels: Vec<f64>,
}

/// Run metadata and outputs.
#[derive(Debug)]
pub struct Trajectory {
    pub snapshots: Vec<SimState>,
    pub trace: FrontTrace,
    /// Traces for `RunOptions::extra_levels`, in order.
    pub extra_traces: Vec<FrontTrace>,
    pub dt: f64,
    pub dt_bound: f64,
    pub coarse_grid: bool,
}

/// Front-position samples at a fixed threshold level.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FrontTrace {
    pub samples: Vec<(f64, f64)>,
    pub level: f64,
}

/// Least-squares front speed over a trailing window.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpeedFit {
    pub speed: f64,
    pub window: (f64, f64),
    pub residual: f64,
    pub samples_used: usize,
}

/// Integrate the system from the given initial data, recording snapshots,
/// and the front position at every step.
pub fn run(
    params: &ModelParams,
    k1: &Kernel,
    k2: &Kernel,
    initial: InitialData,
    opts: &RunOptions,
) -> Result<Trajectory> {
    let n = (opts.x_max / opts.h).round() as usize + 1;
    let mut state = SimState {
        h: opts.h,
        u: vec![1.0; n],
        v: vec![0.0; n],
        t: 0.0,
        u_floor: U_FLOOR,
        guard_activated: false,
    };
    match initial {
        InitialData::Invasion => {
            for i in 0..n {
                let x = state.x(i);
                if x <= 1.0 {
                    state.v[i] = 0.5;
                }
            }
        }
        InitialData::Wave { profile, offset } => {
            for i in 0..n {
                let (phi, psi) = profile.interp(state.x(i) - offset);
                state.u[i] = phi;
                state.v[i] = psi;
            }
        }
    }

    let bound = dt_max(params, U_REF);
    let dt_req = opts.dt.unwrap_or(bound);
    if dt_req > bound * (1.0 + 1e-12) {
        return Err(Error::Invalid(format!(
            "dt = {dt_req} exceeds the stability bound {bound}"
        )));
    }
    let steps = if opts.t_end > 0.0 { (opts.t_end / dt_req).ceil() as usize } else { 0 };
    let dt = if steps > 0 { opts.t_end / steps as f64 } else { 0.0 };

    let dk1 = k1.discrete(opts.h);
    let dk2 = k2.discrete(opts.h);
    let coarse = dk1.coarse || dk2.coarse;
    let level = opts.level.unwrap_or(0.5 * params.a_star());

    let mut trace = FrontTrace { samples: Vec::with_capacity(steps + 1), level };
    let mut extra_traces: Vec<FrontTrace> = opts
        .extra_levels
        .iter()
        .map(|&lv| FrontTrace { samples: Vec::with_capacity(steps + 1), level: lv })
        .collect();
    let mut snapshots = Vec::new();
    let record_front = |trace: &mut FrontTrace, st: &SimState| {
        let (x, found) = front_position(st, trace.level);
        if found {
            trace.samples.push((st.t, x));
        }
    };
    let record_all = |trace: &mut FrontTrace, extra: &mut Vec<FrontTrace>, st: &SimState| {
        record_front(trace, st);
        for tr in extra.iter_mut() {
            record_front(tr, st);
        }
    };
    record_all(&mut trace, &mut extra_traces, &state);
    snapshots.push(state.clone());

    let mut next_snapshot = opts.snapshot_every;
    for k in 1..=steps {
        state = step_with(&state, dt, params, &dk1, &dk2)?;
        record_all(&mut trace, &mut extra_traces, &state);
        let want_snapshot = opts.snapshot_every > 0.0 && state.t + 1e-12 >= next_snapshot;
        if want_snapshot {
            snapshots.push(state.clone());
            while next_snapshot <= state.t + 1e-12 {
                next_snapshot += opts.snapshot_every;
            }
        } else if k == steps {
            snapshots.push(state.clone());
        }
    }

    Ok(Trajectory { snapshots, trace, extra_traces, dt, dt_bound: bound, coarse_grid: coarse })
}

/// Rightmost crossing of `level` by the predator density, linearly
/// interpolated; `(0.0, false)` when the level is never reached.
pub fn front_position(state: &SimState, level: f64) -> (f64, bool) {
    let n = state.v.len();
    let mut idx = None;
    for i in (0..n).rev() {
        if state.v[i] >= level {
            idx = Some(i);
            break;
        }
    }
    let Some(i) = idx else {
        return (0.0, false);
    };
    if i == n - 1 {
        return (state.x(i), true);
    }
    let (v0, v1) = (state.v[i], state.v[i + 1]);
    let frac = (v0 - level) / (v0 - v1);
    (state.x(i) + frac * state.h, true)
}

/// Least-squares front speed, excluding the leading fraction of the samples
/// as transient (the default window keeps the last 70%).
pub fn spreading_speed(trace: &FrontTrace) -> Result<SpeedFit> {
    spreading_speed_windowed(trace, 0.3)
}

pub fn spreading_speed_windowed(trace: &FrontTrace, exclude_frac: f64) -> Result<SpeedFit> {
    let n = trace.samples.len();
    let start = ((n as f64) * exclude_frac).floor() as usize;
    let window = &trace.samples[start.min(n)..];
    if window.len() < 20 {
        return Err(Error::Invalid(format!(
            "front trace has {} samples in the fit window; need at least 20",
            window.len()
        )));
    }
    let (slope, _, rms) = linear_fit(window);
    Ok(SpeedFit {
        speed: slope,
        window: (window[0].0, window[window.len() - 1].0),
        residual: rms,
        samples_used: window.len(),
    })
}

/// Drift diagnostic for a traveling profile evolved as initial data.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DriftReport {
    /// Sup-norm discrepancy against the translated profile, edges excluded.
    pub drift: f64,
    pub t: f64,
    pub translation: f64,
    /// Comparison window in simulation coordinates.
    pub window: (f64, f64),
}

/// Evolve a profile for time `t` on a grid of spacing `h` and return the
/// final state together with the embedding offset.
pub fn evolve_profile(
    profile: &WaveProfile,
    params: &ModelParams,
    k1: &Kernel,
    k2: &Kernel,
    t: f64,
    h: f64,
    dt: Option<f64>,
) -> Result<(SimState, f64)> {
    let l = -profile.grid[0];
    let pad = 20.0 + k1.effective_radius().max(k2.effective_radius());
    let offset = pad + l;
    let x_max = 2.0 * l + profile.s.abs() * t + 2.0 * pad;
    let opts = RunOptions { x_max, h, t_end: t, dt, snapshot_every: 0.0, level: None, extra_levels: Vec::new() };
    let traj = run(params, k1, k2, InitialData::Wave { profile, offset }, &opts)?;
    let last = traj.snapshots.into_iter().last().expect("run records the final state");
    Ok((last, offset))
}

/// Sup-norm discrepancy between an evolved state and the initial profile
/// translated by `translation`, measured over the central 80% of the
/// profile span.
pub fn drift_against_translation(
    state: &SimState,
    profile: &WaveProfile,
    offset: f64,
    translation: f64,
) -> DriftReport {
    let l = -profile.grid[0];
    let lo = offset + translation - 0.8 * l;
    let hi = offset + translation + 0.8 * l;
    let n = state.u.len();
    let mut sup = 0.0_f64;
    for i in 0..n {
        let x = state.x(i);
        if x < lo || x > hi {
            continue;
        }
        let (phi, psi) = profile.interp(x - offset - translation);
        sup = sup.max((state.u[i] - phi).abs()).max((state.v[i] - psi).abs());
    }
    DriftReport { drift: sup, t: state.t, translation, window: (lo, hi) }
}

/// Evolve the profile for time `t` and compare with the profile translated
/// by `s t`.
pub fn wave_drift_test(
    profile: &WaveProfile,
    params: &ModelParams,
    k1: &Kernel,
    k2: &Kernel,
    t: f64,
    h: f64,
    dt: Option<f64>,
) -> Result<DriftReport> {
    let (state, offset) = evolve_profile(profile, params, k1, k2, t, h, dt)?;
    Ok(drift_against_translation(&state, profile, offset, profile.s * t))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reference() -> (ModelParams, Kernel, Kernel) {
        (
            ModelParams::new(5.0, 1.0, 0.5).unwrap(),
            Kernel::uniform(1.0).unwrap(),
            Kernel::uniform(1.0).unwrap(),
        )
    }

    fn uniform_state(n: usize, h: f64, u: f64, v: f64) -> SimState {
        SimState { h, u: vec![u; n], v: vec![v; n], t: 0.0, u_floor: U_FLOOR, guard_activated: false }
    }

    #[test]
    fn steady_states_are_stationary() {
        let (p, k1, k2) = reference();
        for (u, v) in [(1.0, 0.0), (p.a_star(), p.a_star())] {
            let state = uniform_state(201, 0.05, u, v);
            let (du, dv) = rhs(&state, &p, &k1, &k2);
            for i in 0..201 {
                assert!(du[i].abs() < 1e-14 && dv[i].abs() < 1e-14);
            }
            let next = step(&state, 0.01, &p, &k1, &k2).unwrap();
            for i in 0..201 {
                assert!((next.u[i] - u).abs() < 1e-14);
                assert!((next.v[i] - v).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn predator_grows_on_abundant_prey() {
        let (p, k1, k2) = reference();
        let state = uniform_state(101, 0.05, 1.0, 0.01);
        let (_, dv) = rhs(&state, &p, &k1, &k2);
        let expect = p.b * 0.01 * (1.0 - 0.01);
        for i in 0..101 {
            assert!((dv[i] - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn rk4_order_four() {
        let (p, k1, k2) = reference();
        let n = 201;
        let h = 0.05;
        let mut state = uniform_state(n, h, 1.0, 0.0);
        for i in 0..n {
            let x = i as f64 * h - 5.0;
            state.u[i] = 1.0 - 0.3 * (-x * x).exp();
            state.v[i] = 0.4 * (-x * x).exp();
        }
        let dt = 0.2;
        let advance = |k: usize| -> SimState {
            let mut s = state.clone();
            for _ in 0..k {
                s = step(&s, dt / k as f64, &p, &k1, &k2).unwrap();
            }
            s
        };
        let coarse = advance(1);
        let fine = advance(2);
        let reference = advance(8);
        let err = |s: &SimState| -> f64 {
            s.u.iter()
                .zip(&reference.u)
                .chain(s.v.iter().zip(&reference.v))
                .map(|(a, b)| (a - b).abs())
                .fold(0.0_f64, f64::max)
        };
        let ratio = err(&coarse) / err(&fine);
        assert!(ratio > 10.0 && ratio < 24.0, "order-4 ratio was {ratio}");
    }

    #[test]
    fn zero_horizon_returns_initial_state() {
        let (p, k1, k2) = reference();
        let opts = RunOptions { x_max: 10.0, h: 0.1, t_end: 0.0, dt: None, snapshot_every: 1.0, level: None, extra_levels: Vec::new() };
        let traj = run(&p, &k1, &k2, InitialData::Invasion, &opts).unwrap();
        assert_eq!(traj.snapshots.len(), 1);
        assert_eq!(traj.snapshots[0].t, 0.0);
    }

    #[test]
    fn front_position_basics() {
        let (p, _, _) = reference();
        let a_star = p.a_star();
        let n = 401;
        let h = 0.05;
        let mut state = uniform_state(n, h, 1.0, 0.0);
        for i in 0..n {
            if state.x(i) <= 10.0 {
                state.v[i] = a_star;
            }
        }
        let (x, found) = front_position(&state, 0.5 * a_star);
        assert!(found);
        assert!((x - 10.0).abs() <= h, "front at {x}");

        let empty = uniform_state(n, h, 1.0, 0.0);
        let (_, found) = front_position(&empty, 0.1);
        assert!(!found);

        // Exact translation equivariance on grid shifts.
        let mut shifted = state.clone();
        shifted.v.rotate_right(40);
        let (x2, _) = front_position(&shifted, 0.5 * a_star);
        assert!((x2 - x - 40.0 * h).abs() < 1e-12);
    }

    #[test]
    fn synthetic_trace_speed() {
        let samples: Vec<(f64, f64)> = (0..100)
            .map(|i| {
                let t = i as f64 * 0.5;
                (t, 3.0 * t + 1e-6 * (i as f64).sin())
            })
            .collect();
        let trace = FrontTrace { samples, level: 0.4 };
        let fit = spreading_speed(&trace).unwrap();
        assert!((fit.speed - 3.0).abs() < 1e-4, "{}", fit.speed);
        assert!(fit.residual < 1e-5);

        let short = FrontTrace { samples: trace.samples[..20].to_vec(), level: 0.4 };
        assert!(spreading_speed(&short).is_err());
    }

    #[test]
    fn mass_free_prey_stays_at_capacity() {
        let (p, k1, k2) = reference();
        let opts = RunOptions { x_max: 20.0, h: 0.1, t_end: 2.0, dt: None, snapshot_every: 0.0, level: None, extra_levels: Vec::new() };
        let traj = run(&p, &k1, &k2, InitialData::Wave {
            profile: &flat_profile(&p),
            offset: 0.0,
        }, &opts);
        // A flat predator-free profile: U stays exactly 1, V stays 0.
        let traj = traj.unwrap();
        let last = traj.snapshots.last().unwrap();
        for i in 0..last.u.len() {
            assert!((last.u[i] - 1.0).abs() < 1e-13);
            assert_eq!(last.v[i], 0.0);
        }
    }

    fn flat_profile(p: &ModelParams) -> WaveProfile {
        // Degenerate helper: interp() returns (1, 0) right of the grid and
        // the grid itself is far to the left of the domain.
        WaveProfile {
            s: 1.0,
            params: *p,
            grid: vec![-1000.0, -999.0],
            phi: vec![1.0, 1.0],
            psi: vec![0.0, 0.0],
            beta: 1.0,
            residual: (0.0, 0.0),
            iterations: 0,
            converged: true,
        }
    }

    #[test]
    fn dt_bound_enforced() {
        let (p, k1, k2) = reference();
        let bound = dt_max(&p, U_REF);
        let opts = RunOptions {
            x_max: 5.0,
            h: 0.1,
            t_end: 1.0,
            dt: Some(2.0 * bound),
            snapshot_every: 0.0,
            level: None,
            extra_levels: Vec::new(),
        };
        assert!(run(&p, &k1, &k2, InitialData::Invasion, &opts).is_err());
    }
}
