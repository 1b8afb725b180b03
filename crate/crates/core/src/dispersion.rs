//! Minimal wave speed and the characteristic functions controlling the
//! exponential decay of fronts.
//!
//! The predator equation linearized at the invasion front has solutions
//! `e^{-lambda z}` whenever `A(lambda; s) = d[I2(lambda) - 1] - s lambda + b`
//! vanishes. The minimal speed is
//! `s* = inf_{lambda in (0, lambda_hat_2)} (d[I2(lambda) - 1] + b) / lambda`;
//! for `s > s*` the function `A` has two positive roots, and at `s = s*` the
//! minimizer is a double root.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::Kernel;
use crate::numeric::{bisect, golden_min};

/// Relative tolerance on the minimizing lambda in [`minimal_speed`].
pub const SPEED_REL_TOL: f64 = 1e-10;

/// Relative tolerance on root brackets in [`a_roots`].
pub const ROOT_REL_TOL: f64 = 1e-12;

/// Relative margin below which a speed counts as critical (`s = s*`).
pub const CRITICAL_REL_MARGIN: f64 = 1e-12;

/// Model parameters: prey growth `a`, predator growth `b`, predator
/// dispersal coefficient `d` (the prey dispersal coefficient is normalized
/// to one).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub a: f64,
    pub b: f64,
    pub d: f64,
}

impl ModelParams {
    pub fn new(a: f64, b: f64, d: f64) -> Result<Self> {
        for (v, name) in [(a, "a"), (b, "b"), (d, "d")] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Invalid(format!("parameter {name} must be positive, got {v}")));
            }
        }
        Ok(Self { a, b, d })
    }

    /// Co-existence level `a* = 1 - 1/a`, in (0, 1) precisely when `a > 1`.
    pub fn a_star(&self) -> f64 {
        1.0 - 1.0 / self.a
    }

    /// The hypotheses of the wave construction: `a >= 4` and `d < b`.
    pub fn require_wave_hypotheses(&self) -> Result<()> {
        if self.a < 4.0 {
            return Err(Error::Hypothesis(format!(
                "construction requires a >= 4, got a = {}",
                self.a
            )));
        }
        if self.d >= self.b {
            return Err(Error::Hypothesis(format!(
                "construction requires d < b, got d = {}, b = {}",
                self.d, self.b
            )));
        }
        Ok(())
    }
}

/// Outcome of the minimal-speed search.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpeedReport {
    pub s_star: f64,
    pub lambda_star: f64,
    /// Whether the infimum is attained at an interior minimizer.
    pub attained: bool,
    /// Bracket handed to the golden-section refinement.
    pub bracket: (f64, f64),
    /// Probe values `(lambda, F(lambda))` from the bracketing stage.
    pub objective_samples: Vec<(f64, f64)>,
}

/// Roots `lambda1 <= lambda2` of `A(.; s)` for a supercritical speed.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct RootPair {
    pub lambda1: f64,
    pub lambda2: f64,
    pub s: f64,
}

/// `A(lambda; s) = d [I2(lambda) - 1] - s lambda + b`.
pub fn char_a(params: &ModelParams, k2: &Kernel, lambda: f64, s: f64) -> Result<f64> {
    if lambda < 0.0 {
        return Err(Error::Domain(format!("char_a requires lambda >= 0, got {lambda}")));
    }
    Ok(params.d * (k2.mgf(lambda)? - 1.0) - s * lambda + params.b)
}

/// `B(lambda; s) = [I1(lambda) - 1] - s lambda`.
pub fn char_b(k1: &Kernel, lambda: f64, s: f64) -> Result<f64> {
    if lambda < 0.0 {
        return Err(Error::Domain(format!("char_b requires lambda >= 0, got {lambda}")));
    }
    Ok(k1.mgf(lambda)? - 1.0 - s * lambda)
}

/// Upper end of the lambda probe range for a kernel: just below a finite
/// abscissa, or 50 kernel lengths for families with unbounded moments.
fn probe_cap(k: &Kernel) -> f64 {
    let hat = k.lambda_hat();
    if hat.is_finite() {
        0.999 * hat
    } else {
        50.0 / k.length_scale()
    }
}

/// Minimize `F(lambda) = (d [I2(lambda) - 1] + b) / lambda` over
/// `(0, lambda_hat_2)` by golden-section search on a doubling bracket.
///
/// When `F` is still decreasing at the probe cap the infimum is reported as
/// not attained, with the last probe as the estimate.
pub fn minimal_speed(params: &ModelParams, k2: &Kernel) -> Result<SpeedReport> {
    let cap = probe_cap(k2);
    let objective = |lambda: f64| {
        (params.d * (k2.mgf(lambda).expect("probe below abscissa") - 1.0) + params.b) / lambda
    };

    let mut samples: Vec<(f64, f64)> = Vec::new();
    let mut lambda = 1e-3_f64.min(0.5 * cap);
    loop {
        samples.push((lambda, objective(lambda)));
        if lambda >= cap {
            break;
        }
        lambda = (2.0 * lambda).min(cap);
    }

    let turn = samples.windows(2).position(|w| w[1].1 >= w[0].1);
    let Some(j) = turn else {
        // Monotone decreasing all the way to the cap: infimum not attained
        // on the probe range.
        let last = *samples.last().expect("at least one probe");
        return Ok(SpeedReport {
            s_star: last.1,
            lambda_star: last.0,
            attained: false,
            bracket: (samples[samples.len() - 2].0, last.0),
            objective_samples: samples,
        });
    };

    // samples[j] is the last strictly-descending probe; the minimum lies in
    // (samples[j-1].0, samples[j+1].0). If the turn happens at the very first
    // probe, extend the bracket downward until F rises again.
    let mut lo = if j > 0 { samples[j - 1].0 } else { samples[0].0 };
    if j == 0 {
        let mut f_lo = samples[0].1;
        while lo > 1e-12 {
            let half = 0.5 * lo;
            let f_half = objective(half);
            samples.push((half, f_half));
            if f_half >= f_lo {
                lo = half;
                break;
            }
            lo = half;
            f_lo = f_half;
        }
    }
    let hi = samples[j + 1].0;

    let (mut lambda_star, mut s_star) = golden_min(&objective, lo, hi, SPEED_REL_TOL);

    // Value comparisons saturate near sqrt(machine epsilon), leaving the
    // minimizer ~1e-8 off. Polish it as the root of the stationarity
    // condition lambda F'(lambda) = 0, i.e. of the increasing function
    // G(lambda) = d I2'(lambda) lambda - d [I2(lambda) - 1] - b, which also
    // enforces the double-root identity d I2'(lambda*) = s* to rounding.
    let stationarity = |lambda: f64| {
        params.d * k2.mgf_d1(lambda).expect("probe below abscissa") * lambda
            - params.d * (k2.mgf(lambda).expect("probe below abscissa") - 1.0)
            - params.b
    };
    let mut width = 1e-7 * lambda_star;
    for _ in 0..40 {
        let a = (lambda_star - width).max(0.5 * lo.min(lambda_star));
        let b = (lambda_star + width).min(cap);
        if stationarity(a) < 0.0 && stationarity(b) > 0.0 {
            lambda_star = bisect(&stationarity, a, b, 1e-15);
            s_star = objective(lambda_star);
            break;
        }
        width *= 8.0;
        if width > lambda_star {
            break;
        }
    }

    Ok(SpeedReport {
        s_star,
        lambda_star,
        attained: true,
        bracket: (lo, hi),
        objective_samples: samples,
    })
}

/// Both positive roots of `A(.; s)` for a strictly supercritical speed.
///
/// Fails with a pointer to [`minimal_speed`] when `s <= s* (1 + margin)`.
pub fn a_roots(params: &ModelParams, k2: &Kernel, s: f64) -> Result<RootPair> {
    let report = minimal_speed(params, k2)?;
    if !report.attained {
        return Err(Error::Domain(
            "minimal speed not attained on the probe range; A has no root pair".into(),
        ));
    }
    if s <= report.s_star * (1.0 + CRITICAL_REL_MARGIN) {
        return Err(Error::Hypothesis(format!(
            "a_roots requires s > s* = {}; got s = {s} (use minimal_speed / the critical construction)",
            report.s_star
        )));
    }
    let lambda_star = report.lambda_star;
    let a_of = |lambda: f64| char_a(params, k2, lambda, s).expect("probe below abscissa");

    // A(0) = b > 0 and A(lambda*) = -(s - s*) lambda* < 0.
    let lambda1 = bisect(&a_of, 1e-307, lambda_star, ROOT_REL_TOL);

    // March toward the probe cap until A turns positive again.
    let cap = probe_cap(k2);
    let mut hi = lambda_star;
    let mut found = false;
    for _ in 0..200 {
        hi = (2.0 * hi).min(cap);
        if a_of(hi) > 0.0 {
            found = true;
            break;
        }
        if hi >= cap {
            break;
        }
    }
    if !found {
        return Err(Error::Domain(format!(
            "no upper root of A below the probe cap {cap}; the kernel's exponential moment grows too slowly"
        )));
    }
    let lambda2 = bisect(&a_of, lambda_star, hi, ROOT_REL_TOL);
    Ok(RootPair { lambda1, lambda2, s })
}

/// Deterministic choice of the auxiliary decay rate `lambda0`: the largest
/// value of the form `min(lambda1, lambda_hat_1) / 2^k` (k >= 1) with
/// `B(lambda0; s) < 0`. Such a value exists because `B(0) = 0` and
/// `B'(0) = -s < 0`.
pub fn choose_lambda0(k1: &Kernel, s: f64, lambda1: f64) -> Result<f64> {
    let base = lambda1.min(k1.lambda_hat());
    let mut lambda0 = 0.5 * base;
    for _ in 0..128 {
        if char_b(k1, lambda0, s)? < 0.0 {
            return Ok(lambda0);
        }
        lambda0 *= 0.5;
    }
    Err(Error::Domain(format!(
        "no lambda0 with B(lambda0; {s}) < 0 found by halving from {}",
        0.5 * base
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reference() -> (ModelParams, Kernel) {
        (ModelParams::new(5.0, 1.0, 0.5).unwrap(), Kernel::uniform(1.0).unwrap())
    }

    /// Brute-force scan of the speed objective, the independent oracle for
    /// the golden-section search.
    fn grid_scan_oracle(params: &ModelParams, k2: &Kernel, lo: f64, hi: f64, n: usize) -> (f64, f64) {
        let mut best = (f64::INFINITY, 0.0);
        for i in 0..n {
            let lambda = lo + (hi - lo) * i as f64 / (n - 1) as f64;
            let f = (params.d * (k2.mgf(lambda).unwrap() - 1.0) + params.b) / lambda;
            if f < best.0 {
                best = (f, lambda);
            }
        }
        (best.0, best.1)
    }

    #[test]
    fn params_validation() {
        assert!(ModelParams::new(5.0, 1.0, 0.5).is_ok());
        assert!(ModelParams::new(-1.0, 1.0, 0.5).is_err());
        assert!(ModelParams::new(5.0, 0.0, 0.5).is_err());
        let p = ModelParams::new(5.0, 1.0, 0.5).unwrap();
        assert!((p.a_star() - 0.8).abs() < 1e-15);
        assert!(p.require_wave_hypotheses().is_ok());
        assert!(ModelParams::new(3.0, 1.0, 0.5).unwrap().require_wave_hypotheses().is_err());
        assert!(ModelParams::new(5.0, 1.0, 1.5).unwrap().require_wave_hypotheses().is_err());
    }

    #[test]
    fn char_a_at_zero_is_b() {
        let (p, k) = reference();
        assert!((char_a(&p, &k, 0.0, 0.77).unwrap() - p.b).abs() < 1e-15);
        // s = 0 keeps both terms nonnegative.
        assert!(char_a(&p, &k, 1.3, 0.0).unwrap() > 0.0);
    }

    #[test]
    fn char_b_small_lambda() {
        let (_, k) = reference();
        assert_eq!(char_b(&k, 0.0, 0.8).unwrap(), 0.0);
        assert!(char_b(&k, 1e-3, 0.8).unwrap() < 0.0);
        let v = char_b(&k, 1.0, 0.0).unwrap();
        assert!((v - (1f64.sinh() - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn minimal_speed_matches_grid_scan() {
        let (p, k) = reference();
        let report = minimal_speed(&p, &k).unwrap();
        assert!(report.attained);
        assert!(report.s_star > 0.0);
        let (scan_s, scan_l) = grid_scan_oracle(&p, &k, 1e-4, 30.0, 200_001);
        assert!(
            (report.s_star - scan_s).abs() < 1e-8,
            "golden {} vs scan {}",
            report.s_star,
            scan_s
        );
        assert!((report.lambda_star - scan_l).abs() < 1e-2);
        // All probes sit above the minimum.
        for &(_, f) in &report.objective_samples {
            assert!(f >= report.s_star - 1e-9);
        }
    }

    #[test]
    fn double_root_identity_at_the_minimizer() {
        let (p, k) = reference();
        let report = minimal_speed(&p, &k).unwrap();
        let a_val = char_a(&p, &k, report.lambda_star, report.s_star).unwrap();
        assert!(a_val.abs() <= 1e-8, "A at the minimizer: {a_val}");
        let identity = p.d * k.mgf_d1(report.lambda_star).unwrap() - report.s_star;
        assert!(identity.abs() <= 1e-8, "d I2'(lambda*) - s* = {identity}");
    }

    #[test]
    fn speed_independent_of_a_and_k1() {
        let k = Kernel::uniform(1.0).unwrap();
        let p1 = ModelParams::new(5.0, 1.0, 0.5).unwrap();
        let p2 = ModelParams::new(17.0, 1.0, 0.5).unwrap();
        let r1 = minimal_speed(&p1, &k).unwrap();
        let r2 = minimal_speed(&p2, &k).unwrap();
        assert_eq!(r1.s_star, r2.s_star);
    }

    #[test]
    fn speed_monotone_in_b_and_d() {
        let k = Kernel::uniform(1.0).unwrap();
        let bs = [0.5, 1.0, 2.0];
        let ds = [0.25, 0.5, 1.0];
        let mut table = [[0.0; 3]; 3];
        for (i, &b) in bs.iter().enumerate() {
            for (j, &d) in ds.iter().enumerate() {
                let p = ModelParams::new(5.0, b, d).unwrap();
                let r = minimal_speed(&p, &k).unwrap();
                let (scan, _) = grid_scan_oracle(&p, &k, 1e-4, 30.0, 100_001);
                assert!((r.s_star - scan).abs() < 1e-7);
                table[i][j] = r.s_star;
            }
        }
        for j in 0..3 {
            assert!(table[0][j] < table[1][j] && table[1][j] < table[2][j]);
        }
        for row in &table {
            assert!(row[0] < row[1] && row[1] < row[2]);
        }
    }

    #[test]
    fn roots_bracket_the_negative_well() {
        let (p, k) = reference();
        let report = minimal_speed(&p, &k).unwrap();
        let s = 1.2 * report.s_star;
        let roots = a_roots(&p, &k, s).unwrap();
        assert!(0.0 < roots.lambda1 && roots.lambda1 < roots.lambda2);
        for lambda in [roots.lambda1, roots.lambda2] {
            assert!(char_a(&p, &k, lambda, s).unwrap().abs() <= 1e-10);
        }
        let mid = 0.5 * (roots.lambda1 + roots.lambda2);
        assert!(char_a(&p, &k, mid, s).unwrap() < 0.0);
        // A > 0 outside the root interval.
        assert!(char_a(&p, &k, 0.5 * roots.lambda1, s).unwrap() > 0.0);
        for i in 1..=10 {
            let lambda = roots.lambda1 + (roots.lambda2 - roots.lambda1) * i as f64 / 11.0;
            assert!(char_a(&p, &k, lambda, s).unwrap() < 0.0);
        }
    }

    #[test]
    fn roots_collapse_toward_the_minimizer() {
        let (p, k) = reference();
        let report = minimal_speed(&p, &k).unwrap();
        let s = report.s_star * (1.0 + 1e-6);
        let roots = a_roots(&p, &k, s).unwrap();
        assert!(roots.lambda2 - roots.lambda1 < 0.1 * report.lambda_star);
        assert!(roots.lambda1 < report.lambda_star && report.lambda_star < roots.lambda2);
    }

    #[test]
    fn fast_wave_small_root_near_b_over_s() {
        let (p, k) = reference();
        let report = minimal_speed(&p, &k).unwrap();
        let s = 10.0 * report.s_star;
        let roots = a_roots(&p, &k, s).unwrap();
        let approx = p.b / s;
        assert!(
            (roots.lambda1 - approx).abs() <= 0.1 * approx,
            "lambda1 {} vs b/s {}",
            roots.lambda1,
            approx
        );
    }

    #[test]
    fn subcritical_speed_rejected() {
        let (p, k) = reference();
        let report = minimal_speed(&p, &k).unwrap();
        let err = a_roots(&p, &k, 0.9 * report.s_star).unwrap_err();
        assert!(err.to_string().contains("minimal_speed"), "{err}");
        assert!(a_roots(&p, &k, report.s_star).is_err());
    }

    #[test]
    fn lambda0_choice() {
        let (p, k) = reference();
        let report = minimal_speed(&p, &k).unwrap();
        for factor in [1.0, 1.2] {
            let s = factor * report.s_star;
            let lambda1 = if factor > 1.0 {
                a_roots(&p, &k, s).unwrap().lambda1
            } else {
                report.lambda_star
            };
            let lambda0 = choose_lambda0(&k, s, lambda1).unwrap();
            assert!(lambda0 < lambda1);
            assert!(char_b(&k, lambda0, s).unwrap() < 0.0);
        }
    }

    #[test]
    fn objective_definition_consistency() {
        // F(lambda) * lambda - (d [I2 - 1] + b) vanishes identically.
        let (p, k) = reference();
        let report = minimal_speed(&p, &k).unwrap();
        for &(lambda, f) in report.objective_samples.iter().take(12) {
            let direct = p.d * (k.mgf(lambda).unwrap() - 1.0) + p.b;
            assert!((f * lambda - direct).abs() <= 1e-12 * direct.abs().max(1.0));
        }
    }

    #[test]
    fn non_attainment_reported_not_guessed() {
        // A tabulated kernel declares lambda_hat = inf, but with a vanishing
        // dispersal coefficient the objective is still decreasing at the
        // probe cap; the report must say so instead of asserting a minimum.
        let mut text = String::from("lambda_hat=inf\n");
        for i in 0..41 {
            let y = -1.0 + 2.0 * i as f64 / 40.0;
            text.push_str(&format!("{y} 0.5\n"));
        }
        let k = Kernel::tabulated_from_str(&text).unwrap();
        let p = ModelParams::new(5.0, 1.0, 1e-25).unwrap();
        let report = minimal_speed(&p, &k).unwrap();
        assert!(!report.attained);
        assert!(report.s_star > 0.0);
        // And a_roots refuses to work from a non-attained infimum.
        assert!(a_roots(&p, &k, 1.0).is_err());
    }

    #[test]
    fn convexity_of_char_a() {
        let (p, k) = reference();
        let s = 0.9;
        for (la, lb, lc) in [(0.2, 0.9, 1.7), (0.5, 1.1, 2.9), (1.0, 2.0, 3.0)] {
            let fa = char_a(&p, &k, la, s).unwrap();
            let fb = char_a(&p, &k, lb, s).unwrap();
            let fc = char_a(&p, &k, lc, s).unwrap();
            let chord = ((lc - lb) * fa + (lb - la) * fc) / (lc - la);
            assert!(fb < chord);
        }
    }
}
