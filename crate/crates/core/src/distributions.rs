//! Parametric risk-size families with their block-maximum mode (MPMR) and mean (EMR).
//!
//! For a block of `n` i.i.d. draws with density `f` and CDF `F`, the block maximum `S`
//! has density `n f(s) F(s)^(n-1)`. MPMR is the mode of that density, EMR its mean.

use std::f64::consts::{PI, SQRT_2};

use rand_distr::{Distribution, Normal, StudentT};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed;
use crate::special::{harmonic, lambert_w0, ln_beta, log_gamma};

/// A risk-size distribution. The normal family is centered at zero.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum DistributionSpec {
    Normal { sigma: f64 },
    Exponential { xi: f64 },
    Pareto { scale_a: f64, xi: f64 },
    StudentT { nu: f64 },
}

/// Mode and (when it exists) mean of the maximum of a block of size `n`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaxStatistics {
    pub n: u64,
    pub mpmr: f64,
    pub emr: Option<f64>,
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} must be finite and > 0, got {v}")))
    }
}

impl DistributionSpec {
    pub fn normal(sigma: f64) -> Result<Self> {
        Self::Normal { sigma }.validated()
    }

    pub fn exponential(xi: f64) -> Result<Self> {
        Self::Exponential { xi }.validated()
    }

    pub fn pareto(scale_a: f64, xi: f64) -> Result<Self> {
        Self::Pareto { scale_a, xi }.validated()
    }

    pub fn student_t(nu: f64) -> Result<Self> {
        Self::StudentT { nu }.validated()
    }

    /// Checks that every parameter is strictly positive; returns `self` for chaining.
    pub fn validated(self) -> Result<Self> {
        match self {
            Self::Normal { sigma } => positive("sigma", sigma)?,
            Self::Exponential { xi } => positive("xi", xi)?,
            Self::Pareto { scale_a, xi } => {
                positive("scale_a", scale_a)?;
                positive("xi", xi)?;
            }
            Self::StudentT { nu } => positive("nu", nu)?,
        }
        Ok(self)
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Normal { .. } => "normal",
            Self::Exponential { .. } => "exponential",
            Self::Pareto { .. } => "pareto",
            Self::StudentT { .. } => "student-t",
        }
    }

    /// Power-law tail index, if the family has one.
    pub fn tail_index(&self) -> Option<f64> {
        match *self {
            Self::Pareto { xi, .. } => Some(xi),
            Self::StudentT { nu } => Some(nu),
            _ => None,
        }
    }

    /// Lower end of the support (`-inf` for the two-sided families).
    pub fn support_lower(&self) -> f64 {
        match *self {
            Self::Normal { .. } | Self::StudentT { .. } => f64::NEG_INFINITY,
            Self::Exponential { .. } => 0.0,
            Self::Pareto { scale_a, .. } => scale_a,
        }
    }

    pub fn pdf(&self, x: f64) -> f64 {
        match *self {
            Self::Normal { sigma } => {
                let z = x / sigma;
                (-0.5 * z * z).exp() / (sigma * (2.0 * PI).sqrt())
            }
            Self::Exponential { xi } => {
                if x < 0.0 {
                    0.0
                } else {
                    xi * (-xi * x).exp()
                }
            }
            Self::Pareto { scale_a, xi } => {
                if x < scale_a {
                    0.0
                } else {
                    xi / x * (scale_a / x).powf(xi)
                }
            }
            Self::StudentT { nu } => student_t_ln_norm(nu)
                .map(|c| (c - 0.5 * (nu + 1.0) * (x * x / nu).ln_1p()).exp())
                .unwrap_or(0.0),
        }
    }

    /// Derivative of the density, `f'(x)`, on the interior of the support.
    pub fn pdf_derivative(&self, x: f64) -> f64 {
        let f = self.pdf(x);
        match *self {
            Self::Normal { sigma } => -x / (sigma * sigma) * f,
            Self::Exponential { xi } => -xi * f,
            Self::Pareto { xi, .. } => -(xi + 1.0) / x * f,
            Self::StudentT { nu } => -(nu + 1.0) * x / (nu + x * x) * f,
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            Self::Normal { sigma } => 0.5 * libm::erfc(-x / (sigma * SQRT_2)),
            Self::StudentT { nu } => {
                if x > 0.0 {
                    1.0 - student_t_upper(nu, x)
                } else {
                    student_t_upper(nu, -x)
                }
            }
            _ => 1.0 - self.sf(x),
        }
    }

    /// Survival function `1 - F(x)`, accurate in the upper tail.
    pub fn sf(&self, x: f64) -> f64 {
        match *self {
            Self::Normal { sigma } => 0.5 * libm::erfc(x / (sigma * SQRT_2)),
            Self::Exponential { xi } => {
                if x <= 0.0 {
                    1.0
                } else {
                    (-xi * x).exp()
                }
            }
            Self::Pareto { scale_a, xi } => {
                if x <= scale_a {
                    1.0
                } else {
                    (scale_a / x).powf(xi)
                }
            }
            Self::StudentT { nu } => {
                if x > 0.0 {
                    student_t_upper(nu, x)
                } else {
                    1.0 - student_t_upper(nu, -x)
                }
            }
        }
    }

    /// Inverse CDF for `p` in `(0, 1)`.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::Domain(format!("quantile requires 0 < p < 1, got {p}")));
        }
        Ok(match *self {
            Self::Exponential { xi } => -(-p).ln_1p() / xi,
            Self::Pareto { scale_a, xi } => scale_a * (1.0 - p).powf(-1.0 / xi),
            Self::Normal { sigma } => {
                let seed = -SQRT_2 * sigma * statrs::function::erf::erfc_inv(2.0 * p);
                self.polish_quantile(p, seed)
            }
            Self::StudentT { nu } => {
                let tail = p.min(1.0 - p);
                let y = statrs::function::beta::inv_beta_reg(0.5 * nu, 0.5, 2.0 * tail);
                let mag = (nu * (1.0 - y) / y).sqrt();
                let seed = if p >= 0.5 { mag } else { -mag };
                self.polish_quantile(p, seed)
            }
        })
    }

    // A few Newton steps on the CDF (or the survival function in the upper half).
    fn polish_quantile(&self, p: f64, mut x: f64) -> f64 {
        if !x.is_finite() {
            return x;
        }
        for _ in 0..4 {
            let f = self.pdf(x);
            if f <= 0.0 || !f.is_finite() {
                break;
            }
            let step = if p > 0.5 {
                (self.sf(x) - (1.0 - p)) / f
            } else {
                (p - self.cdf(x)) / f
            };
            if !step.is_finite() {
                break;
            }
            x += step;
            if step.abs() <= f64::EPSILON * x.abs() {
                break;
            }
        }
        x
    }

    /// `count` draws, a pure function of `(self, count, seed)`.
    pub fn sample(&self, count: usize, seed: u64) -> Vec<f64> {
        let mut rng = seed::rng(seed);
        self.sample_with(&mut rng, count)
    }

    pub fn sample_with<R: rand::Rng + ?Sized>(&self, rng: &mut R, count: usize) -> Vec<f64> {
        match *self {
            Self::Exponential { xi } => (0..count)
                .map(|_| -(1.0 - rng.random::<f64>()).ln() / xi)
                .collect(),
            Self::Pareto { scale_a, xi } => (0..count)
                .map(|_| scale_a * (1.0 - rng.random::<f64>()).powf(-1.0 / xi))
                .collect(),
            Self::Normal { sigma } => {
                let d = Normal::new(0.0, sigma).expect("validated sigma");
                d.sample_iter(rng).take(count).collect()
            }
            Self::StudentT { nu } => {
                let d = StudentT::new(nu).expect("validated nu");
                d.sample_iter(rng).take(count).collect()
            }
        }
    }

    /// Density of the maximum of `n` draws at `s`: `n f(s) F(s)^(n-1)`.
    pub fn block_max_pdf(&self, n: u64, s: f64) -> f64 {
        let f = self.pdf(s);
        if f <= 0.0 || n == 0 {
            return 0.0;
        }
        if n == 1 {
            return f;
        }
        let ln_cdf = (-self.sf(s)).ln_1p();
        ((n as f64).ln() + f.ln() + (n - 1) as f64 * ln_cdf).exp()
    }

    /// Closed-form MPMR.
    ///
    /// Pareto is exact. Exponential is exact (and 0 at `n = 1`). Normal uses the
    /// large-`n` Lambert-W form `sigma * sqrt(W0(n^2 / 2pi))`. Student-t applies the
    /// Pareto result to its power-law tail, so it is only meaningful once the mode sits
    /// in the tail (roughly `n >= 10`).
    pub fn mpmr_closed_form(&self, n: u64) -> Result<f64> {
        if n == 0 {
            return Err(Error::Domain("block size must be >= 1".into()));
        }
        let nf = n as f64;
        Ok(match *self {
            Self::Normal { sigma } => sigma * lambert_w0(nf * nf / (2.0 * PI))?.sqrt(),
            Self::Exponential { xi } => nf.ln() / xi,
            Self::Pareto { scale_a, xi } => pareto_mode(scale_a, xi, nf),
            Self::StudentT { nu } => pareto_mode(student_t_tail_scale(nu)?, nu, nf),
        })
    }

    /// Closed-form EMR.
    ///
    /// Exponential: `H(n) / xi`. Pareto (`xi > 1`): `A n B(n, 1 - 1/xi)`. Student-t
    /// (`nu > 1`): the same beta form on the tail approximation. No closed form for Normal.
    pub fn emr_closed_form(&self, n: u64) -> Result<f64> {
        if n == 0 {
            return Err(Error::Domain("block size must be >= 1".into()));
        }
        match *self {
            Self::Normal { .. } => Err(Error::Unsupported(
                "no closed-form expected maximum for the normal family".into(),
            )),
            Self::Exponential { xi } => Ok(harmonic(n) / xi),
            Self::Pareto { scale_a, xi } => {
                if xi <= 1.0 {
                    return Err(Error::Existence(format!("Pareto mean requires xi > 1, got {xi}")));
                }
                pareto_beta_mean(scale_a, xi, n)
            }
            Self::StudentT { nu } => {
                if nu <= 1.0 {
                    return Err(Error::Existence(format!(
                        "Student-t mean requires nu > 1, got {nu}"
                    )));
                }
                pareto_beta_mean(student_t_tail_scale(nu)?, nu, n)
            }
        }
    }

    /// Both statistics at once; `emr` is `None` where no closed form exists.
    pub fn max_statistics(&self, n: u64) -> Result<MaxStatistics> {
        let mpmr = self.mpmr_closed_form(n)?;
        let emr = match self.emr_closed_form(n) {
            Ok(v) => Some(v),
            Err(Error::Existence(_)) | Err(Error::Unsupported(_)) => None,
            Err(e) => return Err(e),
        };
        Ok(MaxStatistics { n, mpmr, emr })
    }
}

fn pareto_mode(scale_a: f64, xi: f64, n: f64) -> f64 {
    scale_a * ((1.0 + n * xi) / (1.0 + xi)).powf(1.0 / xi)
}

fn pareto_beta_mean(scale_a: f64, xi: f64, n: u64) -> Result<f64> {
    let nf = n as f64;
    Ok(scale_a * (nf.ln() + ln_beta(nf, 1.0 - 1.0 / xi)?).exp())
}

fn student_t_ln_norm(nu: f64) -> Option<f64> {
    let a = log_gamma(0.5 * (nu + 1.0)).ok()?;
    let b = log_gamma(0.5 * nu).ok()?;
    Some(a - b - 0.5 * (nu * PI).ln())
}

// P(T > x) for x >= 0.
fn student_t_upper(nu: f64, x: f64) -> f64 {
    if x == 0.0 {
        return 0.5;
    }
    if x.is_infinite() {
        return 0.0;
    }
    0.5 * statrs::function::beta::beta_reg(0.5 * nu, 0.5, nu / (nu + x * x))
}

/// Scale `A` of the power-law tail `f(x) ~ nu A^nu / x^(nu+1)` used for Student-t:
/// `A = sqrt(nu) * (Gamma((nu+1)/2) / (sqrt(pi) Gamma((nu+2)/2)))^(1/nu)`.
pub fn student_t_tail_scale(nu: f64) -> Result<f64> {
    positive("nu", nu)?;
    let ratio = log_gamma(0.5 * (nu + 1.0))? - log_gamma(0.5 * (nu + 2.0))? - 0.5 * PI.ln();
    Ok(nu.sqrt() * (ratio / nu).exp())
}

/// Large-`n` expansions of the closed forms. These degrade at small `n` and are kept
/// for comparison against the exact expressions.
pub mod asymptotic {
    use std::f64::consts::PI;

    use crate::error::Result;
    use crate::special::{log_gamma, EULER_GAMMA};

    /// `A (xi/(1+xi))^(1/xi) n^(1/xi) (1 + 1/(n xi^2))`
    pub fn pareto_mpmr(scale_a: f64, xi: f64, n: f64) -> f64 {
        scale_a * (xi / (1.0 + xi)).powf(1.0 / xi) * n.powf(1.0 / xi) * (1.0 + 1.0 / (n * xi * xi))
    }

    /// `A Gamma(1 - 1/xi) n^(1/xi) + A Gamma(2 - 1/xi) / (2 xi) n^(1/xi - 1)`, for `xi > 1`.
    pub fn pareto_emr(scale_a: f64, xi: f64, n: f64) -> Result<f64> {
        let g1 = log_gamma(1.0 - 1.0 / xi)?.exp();
        let g2 = log_gamma(2.0 - 1.0 / xi)?.exp();
        let e = 1.0 / xi;
        Ok(scale_a * g1 * n.powf(e) + scale_a * g2 / (2.0 * xi) * n.powf(e - 1.0))
    }

    /// `sigma sqrt(L - ln L)` with `L = ln(n^2 / 2pi)`.
    pub fn normal_mpmr_loglog(sigma: f64, n: f64) -> f64 {
        let l = (n * n / (2.0 * PI)).ln();
        sigma * (l - l.ln()).sqrt()
    }

    /// `sigma sqrt(2 ln n) (1 - ln ln n / (4 ln n))`
    pub fn normal_mpmr_leading(sigma: f64, n: f64) -> f64 {
        let l = n.ln();
        sigma * (2.0 * l).sqrt() * (1.0 - l.ln() / (4.0 * l))
    }

    /// `(gamma + ln n) / xi`
    pub fn exponential_emr(xi: f64, n: f64) -> f64 {
        (EULER_GAMMA + n.ln()) / xi
    }
}
