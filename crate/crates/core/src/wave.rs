//! Wave profiles by damped integral fixed-point iteration between verified
//! upper and lower solutions.
//!
//! The wave system for the pair `(phi, psi)` is rewritten with a shift
//! `beta` as `s u' - beta u = -H(u, ...)`, whose bounded solution on the
//! line is `u(z) = (1/s) ∫_z^∞ e^{(beta/s)(z-t)} H(t) dt`. With
//! `beta = 1 + a + 2b + d` both reaction maps are nondecreasing in their
//! diagonal argument over the sandwich box, and iterating the integral map
//! with damping 0.5, clipping each sweep into the box, drives the residual
//! of the original system to zero. The converged profile certifies itself:
//! small residual, containment in the box, and boundary gaps.

use serde::{Deserialize, Serialize};

use crate::bounds::BoundsBundle;
use crate::dispersion::ModelParams;
use crate::error::{Error, Result};
use crate::kernels::{DiscreteKernel, Kernel};

/// Slack used by tail assertions: the left-tail statistics all collapse onto
/// the co-existence level, so the ordering and feeding inequalities are
/// equalities up to iteration residue. Genuine violations are O(0.1).
pub const TAIL_TOL: f64 = 1e-6;

/// Solver controls. `intervals` is the number of grid cells on
/// `[shift - half_width, shift + half_width]` (so there are `intervals + 1`
/// samples); keep `2 * half_width / intervals` commensurate with the kernel
/// support for best accuracy.
#[derive(Debug, Clone, Copy)]
pub struct SolveOptions {
    pub half_width: f64,
    pub intervals: usize,
    pub tol: f64,
    pub max_iter: usize,
    pub shift: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self { half_width: 80.0, intervals: 8000, tol: 1e-6, max_iter: 60_000, shift: 0.0 }
    }
}

/// A gridded wave profile together with its certification data.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WaveProfile {
    pub s: f64,
    pub params: ModelParams,
    pub grid: Vec<f64>,
    pub phi: Vec<f64>,
    pub psi: Vec<f64>,
    pub beta: f64,
    /// Sup-norm of the two wave equations at convergence.
    pub residual: (f64, f64),
    pub iterations: usize,
    pub converged: bool,
}

impl WaveProfile {
    pub fn spacing(&self) -> f64 {
        self.grid[1] - self.grid[0]
    }

    /// Linear interpolation with the boundary limits beyond the grid:
    /// co-existence on the left, predator-free on the right.
    pub fn interp(&self, z: f64) -> (f64, f64) {
        let n = self.grid.len();
        if z <= self.grid[0] {
            let a_star = self.params.a_star();
            return (a_star, a_star);
        }
        if z >= self.grid[n - 1] {
            return (1.0, 0.0);
        }
        let h = self.spacing();
        let t = (z - self.grid[0]) / h;
        let i = (t.floor() as usize).min(n - 2);
        let w = t - i as f64;
        (
            self.phi[i] * (1.0 - w) + self.phi[i + 1] * w,
            self.psi[i] * (1.0 - w) + self.psi[i + 1] * w,
        )
    }
}

/// Tail statistics of a converged profile: inf/sup over the outer 10% of
/// the grid on each side, the ordering of the left-tail values, the feeding
/// inequalities that pin the left limit, and the gaps to the two states.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TailReport {
    pub phi_minus: f64,
    pub phi_plus: f64,
    pub psi_minus: f64,
    pub psi_plus: f64,
    pub right_phi_min: f64,
    pub right_phi_max: f64,
    pub right_psi_min: f64,
    pub right_psi_max: f64,
    /// 1/2 < phi- <= psi- <= psi+ <= phi+ < 1 (within `TAIL_TOL`).
    pub ordering_ok: bool,
    /// a phi- (1 - phi-) <= psi+ and a phi+ (1 - phi+) >= psi- (within slack).
    pub feeding_ok: bool,
    /// max |phi - a*| + max |psi - a*| over the left window.
    pub left_gap: f64,
    /// max |phi - 1| + max |psi| over the right window.
    pub right_gap: f64,
}

struct Workspace<'a> {
    bundle: &'a BoundsBundle,
    params: ModelParams,
    s: f64,
    beta: f64,
    shift: f64,
    z0: f64,
    h: f64,
    n: usize,
    tail: usize,
    dk1: DiscreteKernel,
    dk2: DiscreteKernel,
    // exponential-kernel moments of 1, t, t^2, t^3 over one cell
    decay: f64,
    moments: [f64; 4],
    lower_phi: Vec<f64>,
    upper_phi: Vec<f64>,
    lower_psi: Vec<f64>,
    upper_psi: Vec<f64>,
}

impl<'a> Workspace<'a> {
    fn abscissa(&self, i: i64) -> f64 {
        self.z0 + i as f64 * self.h
    }

    fn phi_at<'b>(&'b self, phi: &'b [f64]) -> impl Fn(i64) -> f64 + 'b {
        move |j: i64| {
            if j < 0 {
                self.params.a_star()
            } else if j as usize > self.n {
                self.bundle.phi_upper(self.abscissa(j) - self.shift)
            } else {
                phi[j as usize]
            }
        }
    }

    fn psi_at<'b>(&'b self, psi: &'b [f64]) -> impl Fn(i64) -> f64 + 'b {
        move |j: i64| {
            if j < 0 {
                self.params.a_star()
            } else if j as usize > self.n {
                self.bundle.psi_upper(self.abscissa(j) - self.shift)
            } else {
                psi[j as usize]
            }
        }
    }

    /// One application of the integral map to the current iterate.
    fn sweep(&self, phi: &[f64], psi: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let (p, s, beta) = (self.params, self.s, self.beta);
        let top = (self.n + self.tail) as i64;
        let phi_of = self.phi_at(phi);
        let psi_of = self.psi_at(psi);

        // Reaction-plus-shift maps on the extended index range [-2, top+2].
        let len = (top + 5) as usize;
        let mut h1 = vec![0.0; len];
        let mut h2 = vec![0.0; len];
        for (slot, j) in (-2..=top + 2).enumerate() {
            let (f, g) = (phi_of(j), psi_of(j));
            let conv1 = self.dk1.apply_at(j, &phi_of);
            let conv2 = self.dk2.apply_at(j, &psi_of);
            h1[slot] = conv1 + (beta - 1.0) * f + p.a * f * (1.0 - f) - g;
            h2[slot] = p.d * (conv2 - g) + beta * g + p.b * g * (1.0 - g / f);
        }

        let integrate_back = |hs: &[f64], far: f64| -> Vec<f64> {
            // hs[slot] holds H at index slot-2. Each cell integrates a cubic
            // Hermite interpolant of H against e^{-(beta/s) t} exactly; the
            // node slopes use the fourth-order centered stencil so that the
            // interpolant's second derivative is continuous to O(h^3) and
            // the converged profile satisfies the wave equations at the
            // nodes to the same order as the residual's difference formula.
            let [m0, m1, m2, m3] = self.moments;
            let h = self.h;
            let slope = |slot: usize| {
                (-hs[slot + 2] + 8.0 * hs[slot + 1] - 8.0 * hs[slot - 1] + hs[slot - 2]) / (12.0 * h)
            };
            let mut u = vec![0.0; self.n + 1];
            let mut next = far;
            for i in (0..=top - 1).rev() {
                let slot = (i + 2) as usize;
                let (h0, hp) = (hs[slot], hs[slot + 1]);
                let d0 = slope(slot);
                let d1 = slope(slot + 1);
                let dh = hp - h0;
                let c2 = 3.0 * dh / (h * h) - (2.0 * d0 + d1) / h;
                let c3 = -2.0 * dh / (h * h * h) + (d0 + d1) / (h * h);
                let local = h0 * m0 + d0 * m1 + c2 * m2 + c3 * m3;
                let val = self.decay * next + local / s;
                if (i as usize) <= self.n {
                    u[i as usize] = val;
                }
                next = val;
            }
            u
        };

        // Far values: the upper pair's limits at the last virtual node.
        let far_phi = self.bundle.phi_upper(self.abscissa(top) - self.shift);
        let far_psi = self.bundle.psi_upper(self.abscissa(top) - self.shift);
        (integrate_back(&h1, far_phi), integrate_back(&h2, far_psi))
    }
}

fn make_workspace<'a>(
    params: &ModelParams,
    k1: &Kernel,
    k2: &Kernel,
    bundle: &'a BoundsBundle,
    opts: &SolveOptions,
) -> Result<Workspace<'a>> {
    let bp = bundle.params();
    let rel = |x: f64, y: f64| (x - y).abs() / x.abs().max(y.abs()).max(1e-300);
    if rel(bp.a, params.a) > 1e-12 || rel(bp.b, params.b) > 1e-12 || rel(bp.d, params.d) > 1e-12 {
        return Err(Error::Invalid("bundle was built for different parameters".into()));
    }
    if opts.intervals < 2000 {
        return Err(Error::Invalid(format!(
            "grid too coarse: need at least 2000 intervals, got {}",
            opts.intervals
        )));
    }
    let l = opts.half_width;
    let tail_gap = [
        (bundle.phi_upper(l) - 1.0).abs(),
        bundle.psi_upper(l),
        (bundle.phi_lower(l) - 1.0).abs(),
        bundle.psi_lower(l),
    ]
    .into_iter()
    .fold(0.0_f64, f64::max);
    if tail_gap > 1e-6 {
        return Err(Error::Invalid(format!(
            "half-width {l} too small: bundle tails are {tail_gap:.3e} from their limits"
        )));
    }

    let n = opts.intervals;
    let h = 2.0 * l / n as f64;
    let s = bundle.s;
    let beta = 1.0 + params.a + 2.0 * params.b + params.d;
    let rate = beta / s;
    let decay = (-rate * h).exp();
    let m0 = (1.0 - decay) / rate;
    let m1 = (m0 - h * decay) / rate;
    let m2 = (2.0 * m1 - h * h * decay) / rate;
    let m3 = (3.0 * m2 - h * h * h * decay) / rate;
    // Virtual nodes past +L until the integrating factor is machine-zero.
    let tail = (37.0 / (rate * h)).ceil() as usize;

    let z0 = opts.shift - l;
    let eval4 = |f: fn(&BoundsBundle, f64) -> f64| -> Vec<f64> {
        (0..=n).map(|i| f(bundle, z0 + i as f64 * h - opts.shift)).collect()
    };
    Ok(Workspace {
        bundle,
        params: *params,
        s,
        beta,
        shift: opts.shift,
        z0,
        h,
        n,
        tail,
        dk1: k1.discrete(h),
        dk2: k2.discrete(h),
        decay,
        moments: [m0, m1, m2, m3],
        lower_phi: eval4(BoundsBundle::phi_lower),
        upper_phi: eval4(BoundsBundle::phi_upper),
        lower_psi: eval4(BoundsBundle::psi_lower),
        upper_psi: eval4(BoundsBundle::psi_upper),
    })
}

/// One application of the integral map, exposed for scheme diagnostics.
#[doc(hidden)]
pub fn apply_map_once(
    params: &ModelParams,
    k1: &Kernel,
    k2: &Kernel,
    bundle: &BoundsBundle,
    opts: &SolveOptions,
    phi: &[f64],
    psi: &[f64],
) -> Result<(Vec<f64>, Vec<f64>)> {
    let ws = make_workspace(params, k1, k2, bundle, opts)?;
    Ok(ws.sweep(phi, psi))
}

/// The extended reaction arrays of one sweep, exposed for diagnostics.
#[doc(hidden)]
pub fn debug_h_arrays(
    params: &ModelParams,
    k1: &Kernel,
    k2: &Kernel,
    bundle: &BoundsBundle,
    opts: &SolveOptions,
    phi: &[f64],
    psi: &[f64],
) -> Result<(Vec<f64>, Vec<f64>)> {
    let ws = make_workspace(params, k1, k2, bundle, opts)?;
    let top = (ws.n + ws.tail) as i64;
    let phi_of = ws.phi_at(phi);
    let psi_of = ws.psi_at(psi);
    let mut h1 = Vec::new();
    let mut h2 = Vec::new();
    for j in -2..=top + 2 {
        let (f, g) = (phi_of(j), psi_of(j));
        h1.push(ws.dk1.apply_at(j, &phi_of) + (ws.beta - 1.0) * f + params.a * f * (1.0 - f) - g);
        h2.push(
            params.d * (ws.dk2.apply_at(j, &psi_of) - g)
                + ws.beta * g
                + params.b * g * (1.0 - g / f),
        );
    }
    Ok((h1, h2))
}

/// Compute a wave profile sandwiched by a verified bundle.
///
/// Non-convergence is reported as an error carrying the best iterate.
pub fn solve(
    params: &ModelParams,
    k1: &Kernel,
    k2: &Kernel,
    bundle: &BoundsBundle,
    opts: &SolveOptions,
) -> Result<WaveProfile> {
    let ws = make_workspace(params, k1, k2, bundle, opts)?;
    let n = ws.n;
    let s = ws.s;
    let beta = ws.beta;
    let grid: Vec<f64> = (0..=n).map(|i| ws.abscissa(i as i64)).collect();

    let mut phi: Vec<f64> = (0..=n).map(|i| 0.5 * (ws.lower_phi[i] + ws.upper_phi[i])).collect();
    let mut psi: Vec<f64> = (0..=n).map(|i| 0.5 * (ws.lower_psi[i] + ws.upper_psi[i])).collect();

    let make_profile = |phi: &Vec<f64>, psi: &Vec<f64>, iterations, residual, converged| WaveProfile {
        s,
        params: *params,
        grid: grid.clone(),
        phi: phi.clone(),
        psi: psi.clone(),
        beta,
        residual,
        iterations,
        converged,
    };

    // The linearization of the damped map has a translation quasi-mode with
    // contraction rate 1 - O(1e-6) (the sandwich pins the wave's phase only
    // through its exponentially small tail pinch), so the plain iteration
    // alone would need ~1e7 sweeps. A periodic Aitken extrapolation step on
    // the sweep-to-sweep change vector collapses that mode; the certificate
    // (residual + sandwich) is unaffected.
    let mut diff_prev = vec![0.0_f64; 2 * (n + 1)];
    let mut diff_now = vec![0.0_f64; 2 * (n + 1)];
    let mut have_prev = false;
    let mut next_check_allowed = 0usize;
    for iteration in 1..=opts.max_iter {
        let (u, v) = ws.sweep(&phi, &psi);
        let mut change = 0.0_f64;
        for i in 0..=n {
            let new_phi = (0.5 * phi[i] + 0.5 * u[i]).clamp(ws.lower_phi[i], ws.upper_phi[i]);
            let new_psi = (0.5 * psi[i] + 0.5 * v[i]).clamp(ws.lower_psi[i], ws.upper_psi[i]);
            change = change.max((new_phi - phi[i]).abs()).max((new_psi - psi[i]).abs());
            diff_now[i] = new_phi - phi[i];
            diff_now[n + 1 + i] = new_psi - psi[i];
            phi[i] = new_phi;
            psi[i] = new_psi;
        }

        if have_prev && iteration >= 80 && iteration % 40 == 0 {
            let num: f64 = diff_now.iter().zip(&diff_prev).map(|(a, b)| a * b).sum();
            let den: f64 = diff_prev.iter().map(|b| b * b).sum();
            if den > 0.0 {
                let rho = num / den;
                if rho > 0.8 && rho < 1.0 {
                    let gain = (rho / (1.0 - rho)).min(1e7);
                    for i in 0..=n {
                        phi[i] = (phi[i] + gain * diff_now[i])
                            .clamp(ws.lower_phi[i], ws.upper_phi[i]);
                        psi[i] = (psi[i] + gain * diff_now[n + 1 + i])
                            .clamp(ws.lower_psi[i], ws.upper_psi[i]);
                    }
                }
            }
        }
        std::mem::swap(&mut diff_prev, &mut diff_now);
        have_prev = true;

        if change < 0.1 * opts.tol && iteration >= next_check_allowed {
            let profile = make_profile(&phi, &psi, iteration, (0.0, 0.0), false);
            let res = residual(&profile, k1, k2);
            if res.0 <= opts.tol && res.1 <= opts.tol {
                let mut done = profile;
                done.residual = res;
                done.converged = true;
                return Ok(done);
            }
            next_check_allowed = iteration + 40;
            // Stalled below any movement the extrapolation could rescue.
            if change < 1e-6 * opts.tol {
                return Err(Error::NonConvergence {
                    context: "wave solve".into(),
                    iterations: iteration,
                    residual: res,
                    best: Some(Box::new(make_profile(&phi, &psi, iteration, res, false))),
                });
            }
        }
    }
    let profile = make_profile(&phi, &psi, opts.max_iter, (0.0, 0.0), false);
    let res = residual(&profile, k1, k2);
    Err(Error::NonConvergence {
        context: "wave solve".into(),
        iterations: opts.max_iter,
        residual: res,
        best: Some(Box::new(make_profile(&phi, &psi, opts.max_iter, res, false))),
    })
}

/// Sup-norm of the two wave equations over the profile, using centered
/// differences for the derivative and the discrete kernel quadrature with
/// the profile's boundary limit values extending the grid; five points are
/// dropped at each edge.
pub fn residual(profile: &WaveProfile, k1: &Kernel, k2: &Kernel) -> (f64, f64) {
    let n = profile.grid.len() - 1;
    let h = profile.spacing();
    let p = profile.params;
    let s = profile.s;
    let phi = &profile.phi;
    let psi = &profile.psi;

    let dk1 = k1.discrete(h);
    let dk2 = k2.discrete(h);
    let phi_of = |j: i64| phi[j.clamp(0, n as i64) as usize];
    let psi_of = |j: i64| psi[j.clamp(0, n as i64) as usize];

    // Fourth-order centered first derivative.
    let deriv = |f: &dyn Fn(i64) -> f64, i: i64| {
        (-f(i + 2) + 8.0 * f(i + 1) - 8.0 * f(i - 1) + f(i - 2)) / (12.0 * h)
    };

    let mut sup1 = 0.0_f64;
    let mut sup2 = 0.0_f64;
    for i in 5..=(n as i64 - 5) {
        let (f, g) = (phi[i as usize], psi[i as usize]);
        let r1 = dk1.apply_at(i, &phi_of) - f + s * deriv(&phi_of, i) + p.a * f * (1.0 - f) - g;
        let r2 = p.d * (dk2.apply_at(i, &psi_of) - g)
            + s * deriv(&psi_of, i)
            + p.b * g * (1.0 - g / f);
        sup1 = sup1.max(r1.abs());
        sup2 = sup2.max(r2.abs());
    }
    (sup1, sup2)
}

/// Check whether the profile stays inside the (shifted) sandwich.
pub fn in_sandwich(profile: &WaveProfile, bundle: &BoundsBundle, shift: f64) -> bool {
    profile.grid.iter().enumerate().all(|(i, &z)| {
        let (pu, pl, su, sl) = bundle.eval(z - shift);
        let slack = 1e-12;
        pl - slack <= profile.phi[i]
            && profile.phi[i] <= pu + slack
            && sl - slack <= profile.psi[i]
            && profile.psi[i] <= su + slack
    })
}

/// Tail statistics and the limit inequalities for a converged profile.
pub fn tail_check(profile: &WaveProfile) -> TailReport {
    let n = profile.grid.len();
    let w = (n / 10).max(2);
    let a = profile.params.a;
    let a_star = profile.params.a_star();

    let min_max = |v: &[f64]| {
        v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)))
    };
    let (phi_minus, phi_plus) = min_max(&profile.phi[..w]);
    let (psi_minus, psi_plus) = min_max(&profile.psi[..w]);
    let (right_phi_min, right_phi_max) = min_max(&profile.phi[n - w..]);
    let (right_psi_min, right_psi_max) = min_max(&profile.psi[n - w..]);

    let ordering_ok = 0.5 < phi_minus
        && phi_minus <= psi_minus + TAIL_TOL
        && psi_minus <= psi_plus + TAIL_TOL
        && psi_plus <= phi_plus + TAIL_TOL
        && phi_plus < 1.0;
    let feeding_ok = a * phi_minus * (1.0 - phi_minus) <= psi_plus + TAIL_TOL
        && a * phi_plus * (1.0 - phi_plus) >= psi_minus - TAIL_TOL;

    let left_gap = profile.phi[..w]
        .iter()
        .map(|&x| (x - a_star).abs())
        .fold(0.0_f64, f64::max)
        + profile.psi[..w].iter().map(|&x| (x - a_star).abs()).fold(0.0_f64, f64::max);
    let right_gap = profile.phi[n - w..]
        .iter()
        .map(|&x| (x - 1.0).abs())
        .fold(0.0_f64, f64::max)
        + profile.psi[n - w..].iter().map(|&x| x.abs()).fold(0.0_f64, f64::max);

    TailReport {
        phi_minus,
        phi_plus,
        psi_minus,
        psi_plus,
        right_phi_min,
        right_phi_max,
        right_psi_min,
        right_psi_max,
        ordering_ok,
        feeding_ok,
        left_gap,
        right_gap,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds;
    use crate::dispersion;

    fn reference() -> (ModelParams, Kernel, Kernel) {
        (
            ModelParams::new(5.0, 1.0, 0.5).unwrap(),
            Kernel::uniform(1.0).unwrap(),
            Kernel::uniform(1.0).unwrap(),
        )
    }

    fn constant_profile(p: &ModelParams, value: (f64, f64), l: f64, n: usize) -> WaveProfile {
        let h = 2.0 * l / n as f64;
        WaveProfile {
            s: 0.9,
            params: *p,
            grid: (0..=n).map(|i| -l + i as f64 * h).collect(),
            phi: vec![value.0; n + 1],
            psi: vec![value.1; n + 1],
            beta: 1.0,
            residual: (0.0, 0.0),
            iterations: 0,
            converged: true,
        }
    }

    #[test]
    fn steady_states_have_zero_residual() {
        let (p, k1, k2) = reference();
        for state in [(1.0, 0.0), (p.a_star(), p.a_star())] {
            let profile = constant_profile(&p, state, 30.0, 3000);
            let res = residual(&profile, &k1, &k2);
            assert!(res.0 < 1e-10 && res.1 < 1e-10, "state {state:?}: {res:?}");
        }
    }

    #[test]
    fn constant_coexistence_tail_report() {
        let (p, _, _) = reference();
        let a_star = p.a_star();
        let co = constant_profile(&p, (a_star, a_star), 30.0, 3000);
        let rep = tail_check(&co);
        assert!(rep.ordering_ok);
        assert!(rep.feeding_ok);
        assert!(rep.left_gap < 1e-14);
        for v in [rep.phi_minus, rep.phi_plus, rep.psi_minus, rep.psi_plus] {
            assert!((v - a_star).abs() < 1e-15);
        }
    }

    #[test]
    fn supercritical_solve_converges_and_stays_in_sandwich() {
        let (p, k1, k2) = reference();
        let s_star = dispersion::minimal_speed(&p, &k2).unwrap().s_star;
        let bundle = bounds::construct_supercritical(&p, &k1, &k2, 1.2 * s_star).unwrap();
        let opts = SolveOptions { half_width: 40.0, intervals: 4000, tol: 1e-6, ..Default::default() };
        let profile = solve(&p, &k1, &k2, &bundle, &opts).unwrap();
        assert!(profile.converged);
        assert!(profile.residual.0 < 1e-6 && profile.residual.1 < 1e-6, "{:?}", profile.residual);
        assert!(in_sandwich(&profile, &bundle, 0.0));
        let rep = tail_check(&profile);
        assert!(rep.ordering_ok, "{rep:?}");
        assert!(rep.feeding_ok, "{rep:?}");
        assert!(rep.right_gap < 1e-3, "{rep:?}");
        assert!(rep.left_gap < 1e-2, "{rep:?}");
        // The independent certificate: substitute into the equations with a
        // finer evaluation (halved grid via interpolation is not meaningful
        // here; instead verify that phi >= 1/2 so the singular term is tame,
        // and that psi transitions from ~a* to ~0 across the front).
        assert!(profile.phi.iter().all(|&x| x >= 0.5));
        assert!(profile.psi.first().unwrap() > &0.5);
        assert!(profile.psi.last().unwrap() < &1e-6);
    }

    #[test]
    fn translation_covariance_is_grid_exact() {
        let (p, k1, k2) = reference();
        let s_star = dispersion::minimal_speed(&p, &k2).unwrap().s_star;
        let bundle = bounds::construct_supercritical(&p, &k1, &k2, 1.2 * s_star).unwrap();
        let base = SolveOptions { half_width: 30.0, intervals: 3000, tol: 1e-5, ..Default::default() };
        let h = 2.0 * base.half_width / base.intervals as f64;
        let shifted = SolveOptions { shift: 100.0 * h, ..base };
        let p0 = solve(&p, &k1, &k2, &bundle, &base).unwrap();
        let p1 = solve(&p, &k1, &k2, &bundle, &shifted).unwrap();
        assert_eq!(p0.iterations, p1.iterations);
        for i in 0..p0.phi.len() {
            assert_eq!(p0.phi[i], p1.phi[i], "phi differs at {i}");
            assert_eq!(p0.psi[i], p1.psi[i]);
            assert!((p1.grid[i] - p0.grid[i] - 100.0 * h).abs() < 1e-12);
        }
    }

    #[test]
    fn coarse_grid_rejected() {
        let (p, k1, k2) = reference();
        let s_star = dispersion::minimal_speed(&p, &k2).unwrap().s_star;
        let bundle = bounds::construct_supercritical(&p, &k1, &k2, 1.2 * s_star).unwrap();
        let opts = SolveOptions { intervals: 500, ..Default::default() };
        assert!(solve(&p, &k1, &k2, &bundle, &opts).is_err());
    }

    #[test]
    fn mismatched_bundle_rejected() {
        let (p, k1, k2) = reference();
        let s_star = dispersion::minimal_speed(&p, &k2).unwrap().s_star;
        let bundle = bounds::construct_supercritical(&p, &k1, &k2, 1.2 * s_star).unwrap();
        let other = ModelParams::new(6.0, 1.0, 0.5).unwrap();
        assert!(solve(&other, &k1, &k2, &bundle, &SolveOptions::default()).is_err());
    }
}
