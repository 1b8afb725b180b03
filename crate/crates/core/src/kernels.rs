//! Dispersal kernels: symmetric probability densities with exponential
//! moments and discrete convolutions.
//!
//! A kernel `J` must be nonnegative, even, and integrate to one; its
//! exponential moment `I(lambda) = ∫ J(y) e^{lambda y} dy` is finite for
//! `|lambda|` below the abscissa `lambda_hat`. Built-in families carry
//! closed-form moments where available; the truncated Gaussian and tabulated
//! kernels fall back to quadrature.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::adaptive_simpson;

/// Tail mass discarded when truncating kernels with unbounded support.
pub const TRUNCATION_TAIL_MASS: f64 = 1e-10;

/// Quadrature tolerance for moments lacking a closed form.
const MGF_QUAD_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum KernelFamily {
    /// Density 1/(2S) on [-S, S].
    Uniform { radius: f64 },
    /// Tent density (1 - |y|/S)/S on [-S, S].
    Triangular { radius: f64 },
    /// Gaussian restricted to [-S, S] and renormalized.
    TruncatedGaussian { sigma: f64, radius: f64, norm: f64 },
    /// Density (alpha/2) e^{-alpha |y|}; exponential moments diverge at alpha.
    Laplace { rate: f64 },
    /// Normal density with standard deviation sigma.
    Gaussian { sigma: f64 },
    /// User-supplied samples on a symmetric grid, renormalized on load.
    Tabulated {
        ys: Vec<f64>,
        js: Vec<f64>,
        lambda_hat: f64,
        raw_mass_defect: f64,
        raw_symmetry_defect: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Kernel {
    family: KernelFamily,
}

impl Kernel {
    pub fn uniform(radius: f64) -> Result<Self> {
        require_positive(radius, "uniform kernel radius")?;
        Ok(Self { family: KernelFamily::Uniform { radius } })
    }

    pub fn triangular(radius: f64) -> Result<Self> {
        require_positive(radius, "triangular kernel radius")?;
        Ok(Self { family: KernelFamily::Triangular { radius } })
    }

    pub fn truncated_gaussian(sigma: f64, radius: f64) -> Result<Self> {
        require_positive(sigma, "truncated Gaussian sigma")?;
        require_positive(radius, "truncated Gaussian radius")?;
        let raw = adaptive_simpson(&|y: f64| (-0.5 * y * y / (sigma * sigma)).exp(), 0.0, radius, 1e-14);
        let norm = 1.0 / (2.0 * raw);
        Ok(Self { family: KernelFamily::TruncatedGaussian { sigma, radius, norm } })
    }

    pub fn laplace(rate: f64) -> Result<Self> {
        require_positive(rate, "Laplace kernel rate")?;
        Ok(Self { family: KernelFamily::Laplace { rate } })
    }

    pub fn gaussian(sigma: f64) -> Result<Self> {
        require_positive(sigma, "Gaussian kernel sigma")?;
        Ok(Self { family: KernelFamily::Gaussian { sigma } })
    }

    /// Parse a tabulated kernel from its file format: a header line
    /// `lambda_hat=<value|inf>` followed by whitespace-separated `y J(y)`
    /// pairs on a symmetric grid. The samples are symmetrized by averaging
    /// `J(y)` with `J(-y)` and renormalized to unit mass; the corrections
    /// applied are retained for reporting.
    pub fn tabulated_from_str(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| {
            let t = l.trim();
            !t.is_empty() && !t.starts_with('#')
        });
        let header = lines
            .next()
            .ok_or_else(|| Error::Invalid("tabulated kernel: empty file".into()))?;
        let header = header.trim();
        let lambda_hat = match header.strip_prefix("lambda_hat=") {
            Some("inf") => f64::INFINITY,
            Some(v) => v
                .trim()
                .parse::<f64>()
                .map_err(|_| Error::Invalid(format!("tabulated kernel: bad lambda_hat value {v:?}")))?,
            None => {
                return Err(Error::Invalid(
                    "tabulated kernel: first line must be `lambda_hat=<value|inf>`".into(),
                ))
            }
        };
        if lambda_hat <= 0.0 {
            return Err(Error::Invalid("tabulated kernel: lambda_hat must be positive".into()));
        }
        let mut pairs: Vec<(f64, f64)> = Vec::new();
        let mut tokens = lines.flat_map(|l| l.split_whitespace());
        while let Some(tok) = tokens.next() {
            let y: f64 = tok
                .parse()
                .map_err(|_| Error::Invalid(format!("tabulated kernel: bad abscissa {tok:?}")))?;
            let jtok = tokens
                .next()
                .ok_or_else(|| Error::Invalid("tabulated kernel: odd number of values".into()))?;
            let j: f64 = jtok
                .parse()
                .map_err(|_| Error::Invalid(format!("tabulated kernel: bad density {jtok:?}")))?;
            pairs.push((y, j));
        }
        if pairs.len() < 3 {
            return Err(Error::Invalid("tabulated kernel: need at least 3 samples".into()));
        }
        pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let n = pairs.len();
        let ys: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        let js_raw: Vec<f64> = pairs.iter().map(|p| p.1).collect();
        // Grid symmetry: y_i must mirror y_{n-1-i}.
        let span = ys[n - 1];
        for i in 0..n {
            if (ys[i] + ys[n - 1 - i]).abs() > 1e-9 * span.max(1.0) {
                return Err(Error::Invalid(format!(
                    "tabulated kernel: grid is not symmetric ({} vs {})",
                    ys[i],
                    ys[n - 1 - i]
                )));
            }
        }
        if js_raw.iter().any(|&j| j < 0.0) {
            return Err(Error::Invalid("tabulated kernel: negative density sample".into()));
        }
        let mut symmetry_defect: f64 = 0.0;
        let mut js: Vec<f64> = vec![0.0; n];
        for i in 0..n {
            let avg = 0.5 * (js_raw[i] + js_raw[n - 1 - i]);
            symmetry_defect = symmetry_defect.max((js_raw[i] - avg).abs() * 2.0);
            js[i] = avg;
        }
        let mass = trapezoid_mass(&ys, &js);
        if mass <= 0.0 {
            return Err(Error::Invalid("tabulated kernel: zero total mass".into()));
        }
        for j in js.iter_mut() {
            *j /= mass;
        }
        Ok(Self {
            family: KernelFamily::Tabulated {
                ys,
                js,
                lambda_hat,
                raw_mass_defect: (mass - 1.0).abs(),
                raw_symmetry_defect: symmetry_defect,
            },
        })
    }

    pub fn family(&self) -> &KernelFamily {
        &self.family
    }

    /// Abscissa of convergence of the exponential moment.
    pub fn lambda_hat(&self) -> f64 {
        match &self.family {
            KernelFamily::Laplace { rate } => *rate,
            KernelFamily::Tabulated { lambda_hat, .. } => *lambda_hat,
            _ => f64::INFINITY,
        }
    }

    /// Support radius for compactly supported families.
    pub fn support_radius(&self) -> Option<f64> {
        match &self.family {
            KernelFamily::Uniform { radius }
            | KernelFamily::Triangular { radius }
            | KernelFamily::TruncatedGaussian { radius, .. } => Some(*radius),
            KernelFamily::Tabulated { ys, .. } => Some(ys[ys.len() - 1]),
            _ => None,
        }
    }

    /// Radius of the support, or of the truncation interval carrying all but
    /// `TRUNCATION_TAIL_MASS` of the mass for unbounded families.
    pub fn effective_radius(&self) -> f64 {
        match &self.family {
            KernelFamily::Gaussian { sigma } => {
                // 2(1-Phi(z)) <= e^{-z^2/2} for z >= 1, so solving
                // e^{-z^2/2} = tail/2 over-covers the requested mass.
                sigma * (-2.0 * (0.5 * TRUNCATION_TAIL_MASS).ln()).sqrt()
            }
            KernelFamily::Laplace { rate } => (1.0 / TRUNCATION_TAIL_MASS).ln() / rate,
            _ => self.support_radius().expect("compact families have a support radius"),
        }
    }

    /// Characteristic length of the kernel, used for grid-resolution warnings.
    pub fn length_scale(&self) -> f64 {
        match &self.family {
            KernelFamily::Uniform { radius } | KernelFamily::Triangular { radius } => *radius,
            KernelFamily::TruncatedGaussian { sigma, radius, .. } => sigma.min(*radius),
            KernelFamily::Laplace { rate } => 1.0 / rate,
            KernelFamily::Gaussian { sigma } => *sigma,
            KernelFamily::Tabulated { ys, .. } => ys[ys.len() - 1],
        }
    }

    /// Density value `J(y)`. Compactly supported families return 0 outside
    /// their support; tabulated kernels return 0 outside their grid.
    pub fn evaluate(&self, y: f64) -> f64 {
        match &self.family {
            KernelFamily::Uniform { radius } => {
                if y.abs() <= *radius {
                    0.5 / radius
                } else {
                    0.0
                }
            }
            KernelFamily::Triangular { radius } => {
                let a = y.abs();
                if a <= *radius {
                    (1.0 - a / radius) / radius
                } else {
                    0.0
                }
            }
            KernelFamily::TruncatedGaussian { sigma, radius, norm } => {
                if y.abs() <= *radius {
                    norm * (-0.5 * y * y / (sigma * sigma)).exp()
                } else {
                    0.0
                }
            }
            KernelFamily::Laplace { rate } => 0.5 * rate * (-rate * y.abs()).exp(),
            KernelFamily::Gaussian { sigma } => {
                let z = y / sigma;
                (-0.5 * z * z).exp() / (sigma * (2.0 * std::f64::consts::PI).sqrt())
            }
            KernelFamily::Tabulated { ys, js, .. } => {
                let n = ys.len();
                if y < ys[0] || y > ys[n - 1] {
                    return 0.0;
                }
                // Linear interpolation on the sorted grid.
                let idx = match ys.binary_search_by(|p| p.partial_cmp(&y).unwrap()) {
                    Ok(i) => return js[i],
                    Err(i) => i,
                };
                let (y0, y1) = (ys[idx - 1], ys[idx]);
                let t = (y - y0) / (y1 - y0);
                js[idx - 1] * (1.0 - t) + js[idx] * t
            }
        }
    }

    fn check_lambda(&self, lambda: f64) -> Result<()> {
        let hat = self.lambda_hat();
        if lambda.abs() >= hat {
            return Err(Error::Domain(format!(
                "exponential moment diverges: |lambda| = {} >= lambda_hat = {hat}",
                lambda.abs()
            )));
        }
        Ok(())
    }

    /// Exponential moment `I(lambda) = ∫ J(y) e^{lambda y} dy`.
    pub fn mgf(&self, lambda: f64) -> Result<f64> {
        self.check_lambda(lambda)?;
        Ok(match &self.family {
            KernelFamily::Uniform { radius } => sinhc(lambda * radius),
            KernelFamily::Triangular { radius } => {
                let u = sinhc(0.5 * lambda * radius);
                u * u
            }
            KernelFamily::Laplace { rate } => {
                let a2 = rate * rate;
                a2 / (a2 - lambda * lambda)
            }
            KernelFamily::Gaussian { sigma } => (0.5 * sigma * sigma * lambda * lambda).exp(),
            KernelFamily::TruncatedGaussian { .. } => self.mgf_quadrature(lambda, 0),
            KernelFamily::Tabulated { ys, js, .. } => tabulated_moment(ys, js, lambda, 0),
        })
    }

    /// First moment derivative `I'(lambda) = ∫ J(y) y e^{lambda y} dy`.
    pub fn mgf_d1(&self, lambda: f64) -> Result<f64> {
        self.check_lambda(lambda)?;
        Ok(match &self.family {
            KernelFamily::Uniform { radius } => radius * sinhc_d1(lambda * radius),
            KernelFamily::Triangular { radius } => {
                let x = 0.5 * lambda * radius;
                2.0 * sinhc(x) * sinhc_d1(x) * 0.5 * radius
            }
            KernelFamily::Laplace { rate } => {
                let a2 = rate * rate;
                let den = a2 - lambda * lambda;
                2.0 * a2 * lambda / (den * den)
            }
            KernelFamily::Gaussian { sigma } => {
                let s2 = sigma * sigma;
                s2 * lambda * (0.5 * s2 * lambda * lambda).exp()
            }
            KernelFamily::TruncatedGaussian { .. } => self.mgf_quadrature(lambda, 1),
            KernelFamily::Tabulated { ys, js, .. } => tabulated_moment(ys, js, lambda, 1),
        })
    }

    /// Second moment derivative `I''(lambda) = ∫ J(y) y^2 e^{lambda y} dy`.
    pub fn mgf_d2(&self, lambda: f64) -> Result<f64> {
        self.check_lambda(lambda)?;
        Ok(match &self.family {
            KernelFamily::Uniform { radius } => radius * radius * sinhc_d2(lambda * radius),
            KernelFamily::Triangular { radius } => {
                let x = 0.5 * lambda * radius;
                let (u, u1, u2) = (sinhc(x), sinhc_d1(x), sinhc_d2(x));
                2.0 * (u1 * u1 + u * u2) * 0.25 * radius * radius
            }
            KernelFamily::Laplace { rate } => {
                let a2 = rate * rate;
                let den = a2 - lambda * lambda;
                2.0 * a2 * (a2 + 3.0 * lambda * lambda) / (den * den * den)
            }
            KernelFamily::Gaussian { sigma } => {
                let s2 = sigma * sigma;
                (s2 + s2 * s2 * lambda * lambda) * (0.5 * s2 * lambda * lambda).exp()
            }
            KernelFamily::TruncatedGaussian { .. } => self.mgf_quadrature(lambda, 2),
            KernelFamily::Tabulated { ys, js, .. } => tabulated_moment(ys, js, lambda, 2),
        })
    }

    /// Quadrature evaluation of `∫ J(y) y^order e^{lambda y} dy`, used both as
    /// the fallback for families without closed forms and as the independent
    /// cross-check in tests. The truncation radius accounts for the
    /// exponential weight, which shifts where the integrand's mass sits.
    pub fn mgf_quadrature(&self, lambda: f64, order: u32) -> f64 {
        let r = match &self.family {
            KernelFamily::Gaussian { sigma } => lambda.abs() * sigma * sigma + 8.0 * sigma,
            KernelFamily::Laplace { rate } => 32.0 / (rate - lambda.abs()).max(1e-6 * rate),
            _ => self.effective_radius(),
        };
        let f = |y: f64| self.evaluate(y) * y.powi(order as i32) * (lambda * y).exp();
        // Split at 0: several families have a kink there.
        adaptive_simpson(&f, -r, 0.0, 0.5 * MGF_QUAD_TOL) + adaptive_simpson(&f, 0.0, r, 0.5 * MGF_QUAD_TOL)
    }

    /// Hypothesis checks: normalization, symmetry, nonnegativity, and
    /// consistency of the declared abscissa.
    pub fn validate(&self) -> ValidationReport {
        let r = self.effective_radius();
        let (normalization_defect, symmetry_defect) = match &self.family {
            KernelFamily::Tabulated { raw_mass_defect, raw_symmetry_defect, .. } => {
                (*raw_mass_defect, *raw_symmetry_defect)
            }
            _ => {
                let half = adaptive_simpson(&|y| self.evaluate(y), 0.0, r, 1e-13);
                let mut sym: f64 = 0.0;
                for i in 1..=200 {
                    let y = r * i as f64 / 200.0;
                    sym = sym.max((self.evaluate(y) - self.evaluate(-y)).abs());
                }
                ((2.0 * half - 1.0).abs(), sym)
            }
        };
        let mut min_sampled = f64::INFINITY;
        for i in 0..=400 {
            let y = -r + 2.0 * r * i as f64 / 400.0;
            min_sampled = min_sampled.min(self.evaluate(y));
        }
        let hat = self.lambda_hat();
        let probes = if hat.is_finite() {
            vec![0.5 * hat, 0.9 * hat, 0.999 * hat]
        } else {
            let s = self.length_scale();
            vec![0.5 / s, 2.0 / s, 10.0 / s]
        };
        let lambda_hat_consistent = probes
            .iter()
            .all(|&l| matches!(self.mgf(l), Ok(v) if v.is_finite()));
        let pass = normalization_defect <= 1e-8
            && symmetry_defect <= 1e-12
            && min_sampled >= 0.0
            && lambda_hat_consistent;
        ValidationReport {
            normalization_defect,
            symmetry_defect,
            min_sampled_value: min_sampled,
            lambda_hat: hat,
            lambda_hat_consistent,
            pass,
        }
    }

    /// Quadrature weights for the kernel sampled at grid multiples of `h`
    /// (trapezoid rule over the effective support, renormalized to unit mass).
    ///
    /// The tap count is guarded against round-off in `h`: a spacing that
    /// divides the support up to float dust must yield the same weights as
    /// the exact ratio, or two callers with nominally equal grids would
    /// convolve with different operators.
    pub fn discrete(&self, h: f64) -> DiscreteKernel {
        assert!(h > 0.0, "grid spacing must be positive");
        let r = self.effective_radius();
        let ratio = r / h;
        let half_width = ((ratio * (1.0 + 1e-9)).floor() as usize).max(1);
        let mut weights = vec![0.0; 2 * half_width + 1];
        let edge_on_boundary = (half_width as f64 * h - r).abs() <= 1e-9 * r.max(1.0);
        for k in 0..=half_width {
            let y = if k == half_width && edge_on_boundary { r } else { k as f64 * h };
            let mut w = h * self.evaluate(y);
            if k == half_width && edge_on_boundary {
                w *= 0.5;
            }
            weights[half_width + k] = w;
            weights[half_width - k] = w;
        }
        let mass: f64 = weights.iter().sum();
        for w in weights.iter_mut() {
            *w /= mass;
        }
        DiscreteKernel {
            weights,
            half_width,
            h,
            coarse: h > self.length_scale(),
        }
    }

    /// Convolution `(J * f)` of samples on a uniform grid of spacing `h`.
    pub fn convolve(&self, f: &[f64], h: f64, extension: Extension) -> Convolved {
        let dk = self.discrete(h);
        let n = f.len() as i64;
        let values = match extension {
            Extension::ConstantTails { left, right } => dk.apply(f.len(), |j| {
                if j < 0 {
                    left
                } else if j >= n {
                    right
                } else {
                    f[j as usize]
                }
            }),
            Extension::Periodic => dk.apply(f.len(), |j| f[j.rem_euclid(n) as usize]),
        };
        Convolved { values, coarse_grid: dk.coarse }
    }
}

/// Boundary handling for [`Kernel::convolve`].
#[derive(Debug, Clone, Copy)]
pub enum Extension {
    ConstantTails { left: f64, right: f64 },
    Periodic,
}

#[derive(Debug, Clone)]
pub struct Convolved {
    pub values: Vec<f64>,
    /// Set when the grid spacing exceeds the kernel's length scale.
    pub coarse_grid: bool,
}

/// Kernel weights resolved onto a uniform grid; immutable once built.
#[derive(Debug, Clone)]
pub struct DiscreteKernel {
    weights: Vec<f64>,
    half_width: usize,
    h: f64,
    pub coarse: bool,
}

impl DiscreteKernel {
    pub fn half_width(&self) -> usize {
        self.half_width
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    /// Convolution value at index `i`, with `val` supplying samples at any
    /// signed index (callers encode their extension policy in `val`).
    pub fn apply_at<G: Fn(i64) -> f64>(&self, i: i64, val: &G) -> f64 {
        let k = self.half_width as i64;
        let mut acc = 0.0;
        for (m, &w) in self.weights.iter().enumerate() {
            let offset = m as i64 - k;
            acc += w * val(i - offset);
        }
        acc
    }

    /// Full convolution over indices `0..n`.
    pub fn apply<G: Fn(i64) -> f64>(&self, n: usize, val: G) -> Vec<f64> {
        (0..n as i64).map(|i| self.apply_at(i, &val)).collect()
    }
}

/// Outcome of [`Kernel::validate`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ValidationReport {
    pub normalization_defect: f64,
    pub symmetry_defect: f64,
    pub min_sampled_value: f64,
    pub lambda_hat: f64,
    pub lambda_hat_consistent: bool,
    pub pass: bool,
}

fn require_positive(v: f64, what: &str) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::Invalid(format!("{what} must be positive and finite, got {v}")))
    }
}

fn trapezoid_mass(ys: &[f64], js: &[f64]) -> f64 {
    ys.windows(2)
        .zip(js.windows(2))
        .map(|(y, j)| 0.5 * (y[1] - y[0]) * (j[0] + j[1]))
        .sum()
}

fn tabulated_moment(ys: &[f64], js: &[f64], lambda: f64, order: u32) -> f64 {
    let g = |i: usize| js[i] * ys[i].powi(order as i32) * (lambda * ys[i]).exp();
    let mut acc = 0.0;
    for i in 0..ys.len() - 1 {
        acc += 0.5 * (ys[i + 1] - ys[i]) * (g(i) + g(i + 1));
    }
    acc
}

// sinh(x)/x and its first two derivatives, with series fallbacks near zero
// where the closed forms cancel catastrophically.

fn sinhc(x: f64) -> f64 {
    if x.abs() < 0.5 {
        let x2 = x * x;
        let mut term = 1.0;
        let mut acc = 1.0;
        for m in 1..=10u32 {
            term *= x2 / ((2 * m) as f64 * (2 * m + 1) as f64);
            acc += term;
        }
        acc
    } else {
        x.sinh() / x
    }
}

fn sinhc_d1(x: f64) -> f64 {
    if x.abs() < 0.5 {
        // sum 2m x^{2m-1} / (2m+1)!
        let x2 = x * x;
        let mut fact = 6.0; // (2m+1)! at m=1
        let mut pow = x;
        let mut acc = 2.0 * pow / fact;
        for m in 2..=10u32 {
            fact *= (2 * m) as f64 * (2 * m + 1) as f64;
            pow *= x2;
            acc += (2 * m) as f64 * pow / fact;
        }
        acc
    } else {
        x.cosh() / x - x.sinh() / (x * x)
    }
}

fn sinhc_d2(x: f64) -> f64 {
    if x.abs() < 0.5 {
        // sum 2m(2m-1) x^{2m-2} / (2m+1)!
        let x2 = x * x;
        let mut fact = 6.0;
        let mut pow = 1.0;
        let mut acc = 2.0 * 1.0 * pow / fact;
        for m in 2..=10u32 {
            fact *= (2 * m) as f64 * (2 * m + 1) as f64;
            pow *= x2;
            acc += (2 * m) as f64 * (2 * m - 1) as f64 * pow / fact;
        }
        acc
    } else {
        x.sinh() / x - 2.0 * x.cosh() / (x * x) + 2.0 * x.sinh() / (x * x * x)
    }
}
