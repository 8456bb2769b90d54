//! Weight functions `W: (0,1] -> (0,1]`, the log-weight `w = log(1/W)`,
//! the gauge `kappa(t) = t * w(t)` and a numerical classifier for the
//! regularity conditions that separate the two cyclicity regimes.
//!
//! Everything downstream works with `w` rather than `W`: for the fast-decaying
//! families `W` underflows long before the dyadic levels of interest, while
//! `w` stays finite.

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

pub const DEFAULT_T_MAX: f64 = 0.5;

/// Number of halvings below the finest classification sample used by the
/// improper-integral quadrature.
const QUADRATURE_EXTRA_DEPTH: usize = 64;
/// Trapezoid sub-steps per dyadic cell (in the variable `log t`).
const QUADRATURE_SUBSTEPS: usize = 32;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", content = "params", rename_all = "kebab-case")]
pub enum WeightFamily {
    /// `W(t) = t^alpha`.
    Power { alpha: f64 },
    /// `W(t) = exp(-c / (t log(e/t)))`.
    ExpInverseLog { c: f64 },
    /// `W(t) = exp(-c t^{-beta})`.
    ExpInversePower { c: f64, beta: f64 },
    /// Tabulated `(t, W(t))` samples, interpolated linearly in `(log t, w)`.
    Custom { samples: Vec<[f64; 2]> },
}

fn default_t_max() -> f64 {
    DEFAULT_T_MAX
}

fn default_exponent() -> f64 {
    1.0
}

fn is_one(x: &f64) -> bool {
    *x == 1.0
}

/// A weight together with the range `(0, t_max]` on which its asymptotic
/// regularity is judged.
///
/// `exponent` represents `W^s`; it scales `w` linearly.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Weight {
    #[serde(flatten)]
    pub family: WeightFamily,
    #[serde(default = "default_t_max")]
    pub t_max: f64,
    #[serde(default = "default_exponent", skip_serializing_if = "is_one")]
    pub exponent: f64,
}

impl Weight {
    pub fn new(family: WeightFamily) -> Result<Self> {
        let weight = Weight {
            family,
            t_max: DEFAULT_T_MAX,
            exponent: 1.0,
        };
        weight.validate()?;
        Ok(weight)
    }

    pub fn power(alpha: f64) -> Result<Self> {
        Self::new(WeightFamily::Power { alpha })
    }

    pub fn exp_inverse_log(c: f64) -> Result<Self> {
        Self::new(WeightFamily::ExpInverseLog { c })
    }

    pub fn exp_inverse_power(c: f64, beta: f64) -> Result<Self> {
        Self::new(WeightFamily::ExpInversePower { c, beta })
    }

    pub fn custom(samples: Vec<[f64; 2]>) -> Result<Self> {
        Self::new(WeightFamily::Custom { samples })
    }

    pub fn with_t_max(mut self, t_max: f64) -> Result<Self> {
        self.t_max = t_max;
        self.validate()?;
        Ok(self)
    }

    /// The weight `W^s`.
    pub fn powered(&self, s: f64) -> Result<Self> {
        let mut out = self.clone();
        out.exponent *= s;
        out.validate()?;
        Ok(out)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let weight: Weight = serde_json::from_str(text)?;
        weight.validate()?;
        Ok(weight)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(LabError::InvalidWeight(msg));
        if !(self.t_max > 0.0 && self.t_max <= 1.0) {
            return bad(format!("t_max = {} must lie in (0, 1]", self.t_max));
        }
        if !(self.exponent > 0.0 && self.exponent.is_finite()) {
            return bad(format!("exponent = {} must be positive", self.exponent));
        }
        match &self.family {
            WeightFamily::Power { alpha } => {
                if !(*alpha > 0.0 && alpha.is_finite()) {
                    return bad(format!("power weight needs alpha > 0, got {alpha}"));
                }
            }
            WeightFamily::ExpInverseLog { c } => {
                if !(*c > 0.0 && c.is_finite()) {
                    return bad(format!("exp-inverse-log weight needs c > 0, got {c}"));
                }
            }
            WeightFamily::ExpInversePower { c, beta } => {
                if !(*c > 0.0 && c.is_finite() && *beta > 0.0 && beta.is_finite()) {
                    return bad(format!(
                        "exp-inverse-power weight needs c, beta > 0, got c = {c}, beta = {beta}"
                    ));
                }
            }
            WeightFamily::Custom { samples } => {
                if samples.len() < 2 {
                    return bad("custom weight needs at least two samples".into());
                }
                for pair in samples.windows(2) {
                    let ([t0, w0], [t1, w1]) = (pair[0], pair[1]);
                    if !(t1 > t0) {
                        return bad(format!("sample abscissae not increasing at t = {t1}"));
                    }
                    if w1 < w0 {
                        return bad(format!("custom weight decreases between t = {t0} and t = {t1}"));
                    }
                }
                for &[t, w] in samples {
                    if !(t > 0.0 && t <= 1.0) {
                        return bad(format!("sample abscissa {t} outside (0, 1]"));
                    }
                    if !(w > 0.0 && w <= 1.0) {
                        return bad(format!("sample value W({t}) = {w} outside (0, 1]"));
                    }
                }
            }
        }
        Ok(())
    }

    fn check_domain(t: f64) -> Result<()> {
        if t > 0.0 && t <= 1.0 {
            Ok(())
        } else {
            Err(LabError::Domain {
                value: t,
                domain: "(0, 1]",
            })
        }
    }

    /// `w(t) = log(1/W(t))` without the domain check. Valid for any `t > 0`
    /// the family formula accepts; used on internally generated arguments.
    pub(crate) fn log_inv_raw(&self, t: f64) -> f64 {
        let base = match &self.family {
            WeightFamily::Power { alpha } => alpha * (-t.ln()),
            WeightFamily::ExpInverseLog { c } => c / (t * (1.0 - t.ln())),
            WeightFamily::ExpInversePower { c, beta } => c * t.powf(-beta),
            WeightFamily::Custom { samples } => custom_log_inv(samples, t),
        };
        (self.exponent * base).max(0.0)
    }

    /// `W(t)`.
    pub fn eval(&self, t: f64) -> Result<f64> {
        Self::check_domain(t)?;
        Ok((-self.log_inv_raw(t)).exp())
    }

    /// `w(t) = log(1/W(t))`.
    pub fn log_inv(&self, t: f64) -> Result<f64> {
        Self::check_domain(t)?;
        Ok(self.log_inv_raw(t))
    }

    /// The gauge `kappa_W(t) = t log(1/W(t))`.
    pub fn gauge(&self, t: f64) -> Result<f64> {
        Self::check_domain(t)?;
        Ok(t * self.log_inv_raw(t))
    }

    /// `w(2^-n)`, finite for every `n` up to the f64 exponent range.
    pub fn log_inv_dyadic(&self, n: u32) -> f64 {
        self.log_inv_raw(dyadic_length(n))
    }

    /// `kappa_W(2^-n)`.
    pub fn gauge_dyadic(&self, n: u32) -> f64 {
        dyadic_length(n) * self.log_inv_dyadic(n)
    }

    /// `w(1/n)`.
    pub fn log_inv_reciprocal(&self, n: u64) -> f64 {
        self.log_inv_raw(1.0 / n as f64)
    }

    pub fn classify(&self, resolution: usize) -> Result<WeightClassification> {
        classify_weight(self, resolution)
    }
}

/// `2^-n` as an exact power of two.
pub fn dyadic_length(n: u32) -> f64 {
    (-(n as f64)).exp2()
}

fn custom_log_inv(samples: &[[f64; 2]], t: f64) -> f64 {
    // interpolate w linearly in log t; extrapolate the first segment's slope
    // towards 0 and hold the last value above the table
    let node = |i: usize| (samples[i][0].ln(), -samples[i][1].ln());
    let x = t.ln();
    let last = samples.len() - 1;
    if t >= samples[last][0] {
        return node(last).1;
    }
    let seg = match samples.iter().position(|s| s[0] > t) {
        Some(0) | None => 0,
        Some(i) => i - 1,
    };
    let (x0, w0) = node(seg);
    let (x1, w1) = node(seg + 1);
    let slope = (w1 - w0) / (x1 - x0);
    w0 + slope * (x - x0)
}

/// Three-valued verdict used wherever a limit statement is judged from a
/// finite trace.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Yes,
    No,
    Inconclusive,
}

impl Verdict {
    pub fn is_yes(self) -> bool {
        self == Verdict::Yes
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FlagWithConstant {
    pub verdict: Verdict,
    /// Largest sampled value of the governing ratio.
    pub constant: f64,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct ClassificationTraces {
    /// Geometric sample points `t_j = t_max 2^-j`.
    pub t: Vec<f64>,
    /// `w(t_j / 2) / w(t_j)`.
    pub doubling_ratio: Vec<f64>,
    /// `(1 / (t_j w(t_j))) * int_0^{t_j} w`.
    pub dini_ratio: Vec<f64>,
    /// `int_{t_j}^{t_max} w`.
    pub log_integral: Vec<f64>,
    /// `int_{t_j}^{t_max} sqrt(w(t)/t) dt`.
    pub sqrt_integral: Vec<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WeightClassification {
    pub good: FlagWithConstant,
    pub dini_regular: FlagWithConstant,
    pub log_divergent: Verdict,
    pub beurling_divergent: Verdict,
    pub resolution: usize,
    pub t_max: f64,
    pub traces: ClassificationTraces,
}

/// Relative tolerance for "the tail of a ratio trace stays bounded".
const BOUNDED_TOL: f64 = 0.05;
/// Last-quarter share of the partial integral that counts as divergence.
const DIVERGENT_SHARE: f64 = 0.10;
/// Increment decay across the last quarter that counts as a Cauchy tail.
const TAIL_DECAY: f64 = 0.5;

/// Bounded-ratio verdict: `Yes` when the last quarter of the trace does not
/// exceed the earlier maximum by more than `tol`, `No` when it is still
/// climbing by at least `tol` across the last quarter.
pub(crate) fn bounded_trend(trace: &[f64], tol: f64) -> Verdict {
    if trace.len() < 4 {
        return Verdict::Inconclusive;
    }
    if trace.iter().any(|v| !v.is_finite()) {
        return Verdict::No;
    }
    let q = trace.len() * 3 / 4;
    let head_max = trace[..q].iter().cloned().fold(f64::MIN, f64::max);
    let tail_max = trace[q..].iter().cloned().fold(f64::MIN, f64::max);
    if tail_max <= head_max * (1.0 + tol) {
        return Verdict::Yes;
    }
    let last = *trace.last().unwrap();
    let growth = (last - trace[q]) / last.abs().max(f64::MIN_POSITIVE);
    if growth >= tol {
        Verdict::No
    } else {
        Verdict::Inconclusive
    }
}

/// Divergence verdict for partial integrals `I_j` over shrinking lower limits.
///
/// `Yes` when the last quarter of the trace adds at least `yes_share` of the
/// total; `No` when it adds less and the per-step increments have a Cauchy
/// tail (the final increment at most `tail_decay` times the increment at the
/// start of the last quarter); otherwise `Inconclusive`.
pub(crate) fn divergence_trend(partials: &[f64], yes_share: f64, tail_decay: f64) -> Verdict {
    if partials.len() < 5 {
        return Verdict::Inconclusive;
    }
    let last = *partials.last().unwrap();
    if !last.is_finite() {
        return Verdict::Yes;
    }
    if last <= 0.0 {
        return Verdict::No;
    }
    let q = partials.len() * 3 / 4;
    let share = (last - partials[q]) / last;
    if share >= yes_share {
        return Verdict::Yes;
    }
    let n = partials.len();
    let inc_q = partials[q] - partials[q - 1];
    let inc_last = partials[n - 1] - partials[n - 2];
    if inc_last <= tail_decay * inc_q {
        Verdict::No
    } else {
        Verdict::Inconclusive
    }
}

/// Composite trapezoid of `f` over `[a, 2a]` in the variable `u = log t`.
fn dyadic_cell_integral(f: impl Fn(f64) -> f64, a: f64) -> f64 {
    let (u0, u1) = (a.ln(), (2.0 * a).ln());
    let h = (u1 - u0) / QUADRATURE_SUBSTEPS as f64;
    let g = |u: f64| {
        let t = u.exp();
        f(t) * t
    };
    let mut acc = 0.5 * (g(u0) + g(u1));
    for i in 1..QUADRATURE_SUBSTEPS {
        acc += g(u0 + h * i as f64);
    }
    acc * h
}

pub fn classify_weight(weight: &Weight, resolution: usize) -> Result<WeightClassification> {
    if resolution < 16 {
        return Err(LabError::Precondition(format!(
            "classification resolution must be at least 16, got {resolution}"
        )));
    }
    weight.validate()?;
    let t_max = weight.t_max;
    let w = |t: f64| weight.log_inv_raw(t);

    let t: Vec<f64> = (0..=resolution).map(|j| t_max * dyadic_length(j as u32)).collect();

    let doubling_ratio: Vec<f64> = t
        .iter()
        .map(|&tj| {
            let (num, den) = (w(tj / 2.0), w(tj));
            if den > 0.0 {
                num / den
            } else if num > 0.0 {
                f64::INFINITY
            } else {
                1.0
            }
        })
        .collect();

    // cells [t_max 2^-(i+1), t_max 2^-i] down to the quadrature floor
    let depth = resolution + QUADRATURE_EXTRA_DEPTH;
    let cell = |f: &dyn Fn(f64) -> f64| -> Vec<f64> {
        (0..depth)
            .map(|i| dyadic_cell_integral(f, t_max * dyadic_length(i as u32 + 1)))
            .collect()
    };
    let w_cells = cell(&w);
    let sqrt_cells = cell(&|s: f64| (w(s) / s).sqrt());

    let partial = |cells: &[f64]| -> Vec<f64> {
        let mut out = Vec::with_capacity(resolution + 1);
        let mut acc = 0.0;
        out.push(0.0);
        for c in &cells[..resolution] {
            acc += c;
            out.push(acc);
        }
        out
    };
    let log_integral = partial(&w_cells);
    let sqrt_integral = partial(&sqrt_cells);

    // int_0^{t_j} w  =  sum of cells at index >= j
    let mut below = vec![0.0; depth + 1];
    for i in (0..depth).rev() {
        below[i] = below[i + 1] + w_cells[i];
    }
    let dini_ratio: Vec<f64> = t
        .iter()
        .enumerate()
        .map(|(j, &tj)| {
            let denom = tj * w(tj);
            if denom > 0.0 {
                below[j] / denom
            } else {
                f64::INFINITY
            }
        })
        .collect();

    let log_divergent = divergence_trend(&log_integral, DIVERGENT_SHARE, TAIL_DECAY);
    let beurling_divergent = divergence_trend(&sqrt_integral, DIVERGENT_SHARE, TAIL_DECAY);

    let good = FlagWithConstant {
        verdict: bounded_trend(&doubling_ratio, BOUNDED_TOL),
        constant: doubling_ratio.iter().cloned().fold(f64::MIN, f64::max),
    };
    // a non-integrable w makes the left side of the regularity inequality infinite
    let dini_verdict = match log_divergent {
        Verdict::Yes => Verdict::No,
        _ => bounded_trend(&dini_ratio, BOUNDED_TOL),
    };
    let dini_regular = FlagWithConstant {
        verdict: dini_verdict,
        constant: dini_ratio.iter().cloned().fold(f64::MIN, f64::max),
    };

    Ok(WeightClassification {
        good,
        dini_regular,
        log_divergent,
        beurling_divergent,
        resolution,
        t_max,
        traces: ClassificationTraces {
            t,
            doubling_ratio,
            dini_ratio,
            log_integral,
            sqrt_integral,
        },
    })
}
