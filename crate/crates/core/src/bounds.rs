//! Upper/lower solution quadruples for the wave system, and the numerical
//! verifier for the defining differential inequalities.
//!
//! A bundle packages four piecewise-exponential functions
//! `(phi_upper, phi_lower, psi_upper, psi_lower)` together with every
//! constant used to build them. Two regimes exist: strictly supercritical
//! speeds `s > s*`, and the critical speed `s = s*` (which additionally
//! requires the predator kernel to be compactly supported). Every free
//! constant is selected by a deterministic rule with explicit margins, so a
//! bundle is reproducible from `(params, kernels, s)` alone.

use serde::{Deserialize, Serialize};

use crate::dispersion::{self, ModelParams};
use crate::error::{Error, Result};
use crate::kernels::Kernel;
use crate::numeric::{bisect, golden_min, integrate_piecewise};

/// Verification tolerance on the differential inequalities.
pub const VERIFY_TOL: f64 = 1e-9;

/// Quadrature tolerance for the convolutions inside [`verify`].
const CONV_QUAD_TOL: f64 = 1e-12;

/// Bisection tolerance for kink abscissae (continuity must hold to 1e-12).
const KINK_REL_TOL: f64 = 1e-14;

/// Smallest usable gap between the lower predator bound and zero. The
/// literal constant-selection rules can drive `delta` below representable
/// range; the constructor then switches to the tail-restricted rule.
const DELTA_FLOOR: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Supercritical,
    Critical,
}

/// An upper/lower solution quadruple with all of its selected constants.
///
/// Field availability by regime: `mu` is supercritical-only; `h`, `z2`,
/// `z3`, `z4` and `S` are critical-only. `z1` is the lower-predator kink in
/// the supercritical regime and the smaller root of `h z e^{-lambda1 z} = 1`
/// in the critical regime.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundsBundle {
    pub regime: Regime,
    pub s: f64,
    pub a: f64,
    pub b: f64,
    pub d: f64,
    pub lambda0: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    pub q: f64,
    pub delta: f64,
    pub epsilon: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h: Option<f64>,
    pub z0: f64,
    pub z1: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub z2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub z3: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub z4: Option<f64>,
    #[serde(rename = "zM")]
    pub z_m: f64,
    #[serde(rename = "S", skip_serializing_if = "Option::is_none")]
    pub support: Option<f64>,
}

impl BoundsBundle {
    pub fn params(&self) -> ModelParams {
        ModelParams { a: self.a, b: self.b, d: self.d }
    }

    /// Abscissae where one-sided derivatives of the four functions differ.
    pub fn kinks(&self) -> Vec<f64> {
        match self.regime {
            Regime::Supercritical => vec![0.0, self.z1],
            Regime::Critical => vec![
                0.0,
                self.z2.expect("critical bundle has z2"),
                self.z3.expect("critical bundle has z3"),
                self.z4.expect("critical bundle has z4"),
            ],
        }
    }

    pub fn phi_upper(&self, z: f64) -> f64 {
        if z <= 0.0 {
            1.0 - self.epsilon
        } else {
            1.0 - self.epsilon * (-self.lambda1 * z).exp()
        }
    }

    pub fn phi_upper_deriv(&self, z: f64) -> f64 {
        if z <= 0.0 {
            0.0
        } else {
            self.epsilon * self.lambda1 * (-self.lambda1 * z).exp()
        }
    }

    pub fn phi_lower(&self, z: f64) -> f64 {
        let knee = match self.regime {
            Regime::Supercritical => 0.0,
            Regime::Critical => self.z3.expect("critical bundle has z3"),
        };
        if z <= knee {
            0.5
        } else {
            1.0 - 0.5 * (-self.lambda0 * (z - knee)).exp()
        }
    }

    pub fn phi_lower_deriv(&self, z: f64) -> f64 {
        let knee = match self.regime {
            Regime::Supercritical => 0.0,
            Regime::Critical => self.z3.expect("critical bundle has z3"),
        };
        if z <= knee {
            0.0
        } else {
            0.5 * self.lambda0 * (-self.lambda0 * (z - knee)).exp()
        }
    }

    pub fn psi_upper(&self, z: f64) -> f64 {
        match self.regime {
            Regime::Supercritical => {
                if z <= 0.0 {
                    1.0
                } else {
                    (-self.lambda1 * z).exp()
                }
            }
            Regime::Critical => {
                let z2 = self.z2.expect("critical bundle has z2");
                if z <= z2 {
                    1.0
                } else {
                    self.h.unwrap() * z * (-self.lambda1 * z).exp()
                }
            }
        }
    }

    pub fn psi_upper_deriv(&self, z: f64) -> f64 {
        match self.regime {
            Regime::Supercritical => {
                if z <= 0.0 {
                    0.0
                } else {
                    -self.lambda1 * (-self.lambda1 * z).exp()
                }
            }
            Regime::Critical => {
                let z2 = self.z2.expect("critical bundle has z2");
                if z <= z2 {
                    0.0
                } else {
                    self.h.unwrap() * (1.0 - self.lambda1 * z) * (-self.lambda1 * z).exp()
                }
            }
        }
    }

    pub fn psi_lower(&self, z: f64) -> f64 {
        match self.regime {
            Regime::Supercritical => {
                if z <= self.z1 {
                    self.delta
                } else {
                    let mu = self.mu.expect("supercritical bundle has mu");
                    (-self.lambda1 * z).exp() - self.q * (-mu * self.lambda1 * z).exp()
                }
            }
            Regime::Critical => {
                let z4 = self.z4.expect("critical bundle has z4");
                if z <= z4 {
                    self.delta
                } else {
                    let h = self.h.unwrap();
                    (h * z - self.q * z.sqrt()) * (-self.lambda1 * z).exp()
                }
            }
        }
    }

    pub fn psi_lower_deriv(&self, z: f64) -> f64 {
        match self.regime {
            Regime::Supercritical => {
                if z <= self.z1 {
                    0.0
                } else {
                    let mu = self.mu.expect("supercritical bundle has mu");
                    -self.lambda1 * (-self.lambda1 * z).exp()
                        + self.q * mu * self.lambda1 * (-mu * self.lambda1 * z).exp()
                }
            }
            Regime::Critical => {
                let z4 = self.z4.expect("critical bundle has z4");
                if z <= z4 {
                    0.0
                } else {
                    let h = self.h.unwrap();
                    let l = self.lambda1;
                    let e = (-l * z).exp();
                    (h - 0.5 * self.q / z.sqrt()) * e - l * (h * z - self.q * z.sqrt()) * e
                }
            }
        }
    }

    /// Evaluate all four functions: `(phi_upper, phi_lower, psi_upper, psi_lower)`.
    pub fn eval(&self, z: f64) -> (f64, f64, f64, f64) {
        (self.phi_upper(z), self.phi_lower(z), self.psi_upper(z), self.psi_lower(z))
    }
}

/// Worst-case values of the four differential inequalities over a test grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerificationReport {
    /// max of U1 (must be <= tol) and its location.
    pub u1_max: f64,
    pub u1_at: f64,
    /// max of U2 (must be <= tol) and its location.
    pub u2_max: f64,
    pub u2_at: f64,
    /// min of L1 (must be >= -tol) and its location.
    pub l1_min: f64,
    pub l1_at: f64,
    /// min of L2 (must be >= -tol) and its location.
    pub l2_min: f64,
    pub l2_at: f64,
    pub tol: f64,
    pub points_checked: usize,
    pub pass: bool,
}

/// Build the supercritical bundle for `s > s*`.
///
/// Selection order: the root pair of `A`, then `mu` at the midpoint of its
/// admissible interval, `q` with a factor-2 margin over its lower bound,
/// the zero `z0` and maximizer `zM` of `f(z) = e^{-l1 z} - q e^{-mu l1 z}`
/// in closed form, `delta` at half its cap, `z1` where `f = delta`,
/// `epsilon` at half its cap, and finally `lambda0`.
pub fn construct_supercritical(
    params: &ModelParams,
    k1: &Kernel,
    k2: &Kernel,
    s: f64,
) -> Result<BoundsBundle> {
    params.require_wave_hypotheses()?;
    let roots = dispersion::a_roots(params, k2, s)?;
    let (l1, l2) = (roots.lambda1, roots.lambda2);

    let mu = 0.5 * (1.0 + (l2 / l1).min(2.0));
    let a_mu = dispersion::char_a(params, k2, mu * l1, s)?;
    debug_assert!(a_mu < 0.0, "A(mu lambda1) must be negative inside the root interval");
    let q = 2.0 * (1.0_f64).max(2.0 * params.b / (-a_mu));

    let rate = (mu - 1.0) * l1;
    let z0 = q.ln() / rate;
    let z_m = (q * mu).ln() / rate;
    let f = |z: f64| (-l1 * z).exp() - q * (-mu * l1 * z).exp();

    let a_star = params.a_star();
    let delta = 0.5 * f(z_m).min(a_star).min(0.5 * (1.0 - params.d / params.b));
    let z1 = bisect(&|z| f(z) - delta, z0, z_m, KINK_REL_TOL);

    let growth = (rate * z1).exp();
    let epsilon = 0.5 * delta.min((growth - q) / growth) / (1.0 + s * l1 + params.a);

    let lambda0 = dispersion::choose_lambda0(k1, s, l1)?;

    Ok(BoundsBundle {
        regime: Regime::Supercritical,
        s,
        a: params.a,
        b: params.b,
        d: params.d,
        lambda0,
        lambda1: l1,
        lambda2: l2,
        mu: Some(mu),
        q,
        delta,
        epsilon,
        h: None,
        z0,
        z1,
        z2: None,
        z3: None,
        z4: None,
        z_m,
        support: None,
    })
}

/// Build the critical bundle at `s = s*`; requires `k2` compactly supported.
pub fn construct_critical(params: &ModelParams, k1: &Kernel, k2: &Kernel) -> Result<BoundsBundle> {
    params.require_wave_hypotheses()?;
    let support = k2.support_radius().ok_or_else(|| {
        Error::Hypothesis("critical construction requires a compactly supported predator kernel".into())
    })?;

    let report = dispersion::minimal_speed(params, k2)?;
    if !report.attained {
        return Err(Error::Domain(
            "minimal speed not attained on the probe range; no critical construction".into(),
        ));
    }
    let s = report.s_star;
    let l1 = report.lambda_star;
    let double_root_defect = params.d * k2.mgf_d1(l1)? - s;
    if double_root_defect.abs() > 1e-8 {
        return Err(Error::Domain(format!(
            "double-root identity violated: d I2'(lambda*) - s* = {double_root_defect}"
        )));
    }

    // h: smallest doubling of 2 lambda1 e whose tent h z e^{-l1 z} = 1 has
    // roots separated by more than the support radius.
    let tent = |h: f64, z: f64| h * z * (-l1 * z).exp();
    let mut h = 2.0 * l1 * std::f64::consts::E;
    let (mut z1, mut z2);
    loop {
        // Roots straddle the maximizer 1/lambda1, where the tent exceeds 1.
        debug_assert!(tent(h, 1.0 / l1) > 1.0);
        z1 = bisect(&|z| tent(h, z) - 1.0, 1e-12, 1.0 / l1, KINK_REL_TOL);
        let mut hi = 2.0 / l1;
        while tent(h, hi) >= 1.0 {
            hi *= 2.0;
        }
        z2 = bisect(&|z| tent(h, z) - 1.0, 1.0 / l1, hi, KINK_REL_TOL);
        if z2 - z1 > support {
            break;
        }
        h *= 2.0;
    }

    let lambda0 = dispersion::choose_lambda0(k1, s, l1)?;

    // z3 large enough that h e^{-lambda0 z3} <= a (lambda1 - lambda0) e / 4.
    let z3_floor = (4.0 * h / (params.a * (l1 - lambda0) * std::f64::consts::E)).ln() / lambda0;
    let z3 = (2.0 * z2).max(z3_floor);

    let i2_dd = k2.mgf_d2(l1)?;
    let weight = |z: f64| z * z * (z + support).powf(1.5) * (-l1 * z).exp();
    let q_bound_over = |z_lo: f64| {
        // sup of `weight` over [z_lo, inf): the profile is unimodal, so the
        // sup sits either at the interior maximizer or at the left edge.
        let mut hi = z_lo.max(1.0 / l1);
        while weight(2.0 * hi) > weight(hi) {
            hi *= 2.0;
        }
        let (_, neg_max) = golden_min(&|z| -weight(z), z_lo, 2.0 * hi, 1e-12);
        let interior = -neg_max;
        16.0 * params.b * h * h * interior.max(weight(z_lo)) / (params.d * i2_dd)
    };

    // Literal rule: twice the bound taken over all z > 0, then doubled until
    // z0 = (q/h)^2 clears z2.
    let mut q = 2.0 * q_bound_over(1e-12);
    while (q / h) * (q / h) <= z2 {
        q *= 2.0;
    }

    let g_of = |q: f64, z: f64| (h * z - q * z.sqrt()) * (-l1 * z).exp();
    let locate_peak = |q: f64| -> (f64, f64) {
        let z0 = (q / h) * (q / h);
        // g'(z0+) = (h/2) e^{-l1 z0} > 0; past the peak the derivative stays
        // negative, so bisect the sign change on (z0, z0 + 20 / l1).
        let gd = |z: f64| {
            (h - 0.5 * q / z.sqrt()) - l1 * (h * z - q * z.sqrt())
        };
        let hi = z0 + 20.0 / l1;
        let z_m = bisect(&gd, z0 * (1.0 + 1e-14) + 1e-300, hi, 1e-13);
        (z0, z_m)
    };

    let (mut z0, mut z_m) = locate_peak(q);
    let cap = params.a_star().min(0.5 * (1.0 - params.d / params.b));
    let mut delta = 0.5 * g_of(q, z_m).min(cap);

    if !(delta > DELTA_FLOOR) {
        // The all-z bound drives z0 so far out that g underflows; restrict
        // the bound to the tail z >= z0 where it is actually used, searching
        // the smallest geometric step that is self-consistent.
        q = h * (2.0 * z2).sqrt();
        for _ in 0..400 {
            let z0_trial = (q / h) * (q / h);
            if q >= 2.0 * q_bound_over(z0_trial) {
                break;
            }
            q *= 1.25;
        }
        let peak = locate_peak(q);
        z0 = peak.0;
        z_m = peak.1;
        delta = 0.5 * g_of(q, z_m).min(cap);
        if !(delta > 0.0) {
            return Err(Error::Domain(
                "critical construction degenerate: lower-bound amplitude underflows".into(),
            ));
        }
    }

    let z4 = bisect(&|z| g_of(q, z) - delta, z0, z_m, KINK_REL_TOL);
    let epsilon = 0.5 * delta.min(h * z4 - q * z4.sqrt()) / (1.0 + s * l1 + params.a);

    Ok(BoundsBundle {
        regime: Regime::Critical,
        s,
        a: params.a,
        b: params.b,
        d: params.d,
        lambda0,
        lambda1: l1,
        lambda2: l1,
        mu: None,
        q,
        delta,
        epsilon,
        h: Some(h),
        z0,
        z1,
        z2: Some(z2),
        z3: Some(z3),
        z4: Some(z4),
        z_m,
        support: Some(support),
    })
}

/// Evaluate the four inequalities of the upper/lower-solution definition on
/// a uniform grid over `[-grid_span, grid_span]`, skipping points within
/// `kink_radius` of a kink, and report the worst values.
///
/// Convolutions use the piecewise-analytic bundle functions directly (no
/// grid interpolation), split at every kink the moving window crosses, so
/// the check is limited only by quadrature error.
pub fn verify(
    bundle: &BoundsBundle,
    k1: &Kernel,
    k2: &Kernel,
    grid_span: f64,
    grid_n: usize,
    kink_radius: f64,
) -> VerificationReport {
    let kinks = bundle.kinks();
    let params = bundle.params();
    let s = bundle.s;

    let r1 = k1.effective_radius();
    let r2 = k2.effective_radius();

    // phi-upper kink: 0. phi-lower: 0 or z3. psi-upper: 0 or z2. psi-lower: z1 or z4.
    let (phi_l_kink, psi_u_kink, psi_l_kink) = match bundle.regime {
        Regime::Supercritical => (0.0, 0.0, bundle.z1),
        Regime::Critical => (bundle.z3.unwrap(), bundle.z2.unwrap(), bundle.z4.unwrap()),
    };

    let nonlocal = |k: &Kernel, r: f64, u: &dyn Fn(f64) -> f64, u_kink: f64, z: f64| -> f64 {
        // breakpoints in y: the kernel's own kink at 0 and the image of the
        // function's kink at y = z - u_kink.
        let breaks = [0.0, z - u_kink];
        let integrand = |y: f64| k.evaluate(y) * u(z - y);
        integrate_piecewise(&integrand, -r, r, &breaks, CONV_QUAD_TOL) - u(z)
    };

    let mut rep = VerificationReport {
        u1_max: f64::NEG_INFINITY,
        u1_at: f64::NAN,
        u2_max: f64::NEG_INFINITY,
        u2_at: f64::NAN,
        l1_min: f64::INFINITY,
        l1_at: f64::NAN,
        l2_min: f64::INFINITY,
        l2_at: f64::NAN,
        tol: VERIFY_TOL,
        points_checked: 0,
        pass: false,
    };

    for i in 0..grid_n {
        let z = -grid_span + 2.0 * grid_span * i as f64 / (grid_n - 1) as f64;
        if kinks.iter().any(|&e| (z - e).abs() <= kink_radius) {
            continue;
        }
        rep.points_checked += 1;

        let phi_u = bundle.phi_upper(z);
        let phi_l = bundle.phi_lower(z);
        let psi_u = bundle.psi_upper(z);
        let psi_l = bundle.psi_lower(z);

        let n_phi_u = nonlocal(k1, r1, &|x| bundle.phi_upper(x), 0.0, z);
        let u1 = n_phi_u + s * bundle.phi_upper_deriv(z) + params.a * phi_u * (1.0 - phi_u) - psi_l;
        if u1 > rep.u1_max {
            rep.u1_max = u1;
            rep.u1_at = z;
        }

        let n_psi_u = nonlocal(k2, r2, &|x| bundle.psi_upper(x), psi_u_kink, z);
        let u2 = params.d * n_psi_u + s * bundle.psi_upper_deriv(z)
            + params.b * psi_u * (1.0 - psi_u / phi_u);
        if u2 > rep.u2_max {
            rep.u2_max = u2;
            rep.u2_at = z;
        }

        let n_phi_l = nonlocal(k1, r1, &|x| bundle.phi_lower(x), phi_l_kink, z);
        let l1v = n_phi_l + s * bundle.phi_lower_deriv(z) + params.a * phi_l * (1.0 - phi_l) - psi_u;
        if l1v < rep.l1_min {
            rep.l1_min = l1v;
            rep.l1_at = z;
        }

        let n_psi_l = nonlocal(k2, r2, &|x| bundle.psi_lower(x), psi_l_kink, z);
        let l2v = params.d * n_psi_l + s * bundle.psi_lower_deriv(z)
            + params.b * psi_l * (1.0 - psi_l / phi_l);
        if l2v < rep.l2_min {
            rep.l2_min = l2v;
            rep.l2_at = z;
        }
    }

    rep.pass = rep.u1_max <= VERIFY_TOL
        && rep.u2_max <= VERIFY_TOL
        && rep.l1_min >= -VERIFY_TOL
        && rep.l2_min >= -VERIFY_TOL;
    rep
}
