//! Herglotz and Poisson transforms of step densities and atomic measures,
//! singular inner functions, the outer functions `exp(sum_k H(f_k))`, and
//! weighted sups / norms over disk sample grids.
//!
//! `H(g)(z) = int (zeta + z)/(zeta - z) g(zeta) dm(zeta)`. For an arc,
//! `H(1_arc)(z) = -|arc| + (1/(pi i)) [log(zeta - z)]` along the arc.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::measures::{Arc, AtomicMeasure, HybridSignedMeasure, PiecewiseConstantDensity};
use crate::schedules::{GridKind, GridSchedule};
use crate::weights::Weight;

/// Evaluation requires `|z| <= 1 - BOUNDARY_GUARD`.
pub const BOUNDARY_GUARD: f64 = 1e-9;
/// Innermost ring distance `1 - r` used by sample grids: `2^-30`.
pub const MIN_RING_DISTANCE: f64 = 1.0 / (1u64 << 30) as f64;
/// Arcs are cut into pieces no longer than this before taking logarithm increments.
pub const MAX_PIECE: f64 = 0.125;

pub fn check_guard(z: Complex64) -> Result<()> {
    let modulus = z.norm();
    if modulus <= 1.0 - BOUNDARY_GUARD {
        Ok(())
    } else {
        Err(LabError::BoundaryGuard { modulus })
    }
}

fn unit(theta: f64) -> Complex64 {
    let (s, c) = (TAU * theta).sin_cos();
    Complex64::new(c, s)
}

/// `exp(2 pi i len) - 1` without cancellation.
fn chord_factor(len: f64) -> Complex64 {
    let s = (PI * len).sin();
    Complex64::new(-2.0 * s * s, (TAU * len).sin())
}

/// `log(1 + u)` on the branch with argument in `(-pi/2, 3pi/2)`; the increments of
/// `arg(zeta - z)` along a piece of length at most 1/8 lie in `(0, 9pi/8)`.
fn log_increment(u: Complex64) -> Complex64 {
    let one_plus = Complex64::new(1.0 + u.re, u.im);
    let re = if u.norm_sqr() < 0.25 {
        0.5 * (2.0 * u.re + u.norm_sqr()).ln_1p()
    } else {
        one_plus.norm().ln()
    };
    let mut im = u.im.atan2(one_plus.re);
    if im < -0.5 * PI {
        im += TAU;
    }
    Complex64::new(re, im)
}

/// One sub-arc of length at most [`MAX_PIECE`], ready for repeated evaluation.
#[derive(Clone, Copy, Debug)]
struct Piece {
    weight: f64,
    start: Complex64,
    chord: Complex64,
}

impl Piece {
    /// `sum weight * [log(zeta - z)]` over the piece.
    #[inline]
    fn log_change(&self, z: Complex64) -> Complex64 {
        self.weight * log_increment(self.chord / (self.start - z))
    }
}

fn pieces_of(start: f64, length: f64, weight: f64, out: &mut Vec<Piece>) {
    let count = (length / MAX_PIECE).ceil().max(1.0) as usize;
    let step = length / count as f64;
    let chord = chord_factor(step);
    for i in 0..count {
        let a = unit(start + i as f64 * step);
        out.push(Piece {
            weight,
            start: a,
            chord: a * chord,
        });
    }
}

const I_PI: Complex64 = Complex64::new(0.0, PI);

/// `H(1_arc)(z)`.
pub fn herglotz_indicator(arc: &Arc, z: Complex64) -> Result<Complex64> {
    check_guard(z)?;
    if arc.is_full() {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let mut pieces = Vec::new();
    pieces_of(arc.start(), arc.length(), 1.0, &mut pieces);
    let change: Complex64 = pieces.iter().map(|p| p.log_change(z)).sum();
    Ok(-arc.length() + change / I_PI)
}

/// A step density prepared for repeated Herglotz evaluation; cost is linear in
/// the number of support cells.
#[derive(Clone, Debug)]
pub struct PreparedDensity {
    pieces: Vec<Piece>,
    integral: f64,
}

impl PreparedDensity {
    pub fn new(density: &PiecewiseConstantDensity) -> Self {
        let mut pieces = Vec::new();
        let mut integral = 0.0;
        for (a, b, v) in density.support_cells() {
            pieces_of(a, b - a, v, &mut pieces);
            integral += v * (b - a);
        }
        PreparedDensity { pieces, integral }
    }

    pub fn integral(&self) -> f64 {
        self.integral
    }

    pub fn piece_count(&self) -> usize {
        self.pieces.len()
    }

    /// `H(f)(z)` without the guard check.
    #[inline]
    pub fn herglotz_unchecked(&self, z: Complex64) -> Complex64 {
        let change: Complex64 = self.pieces.iter().map(|p| p.log_change(z)).sum();
        -self.integral + change / I_PI
    }

    pub fn herglotz(&self, z: Complex64) -> Result<Complex64> {
        check_guard(z)?;
        Ok(self.herglotz_unchecked(z))
    }
}

pub fn herglotz_density(density: &PiecewiseConstantDensity, z: Complex64) -> Result<Complex64> {
    PreparedDensity::new(density).herglotz(z)
}

#[derive(Clone, Debug)]
pub struct PreparedAtoms {
    points: Vec<(Complex64, f64)>,
    total: f64,
}

impl PreparedAtoms {
    pub fn new(mu: &AtomicMeasure) -> Self {
        let points: Vec<(Complex64, f64)> = mu.atoms().iter().map(|a| (unit(a.position), a.mass)).collect();
        let total = points.iter().map(|p| p.1).sum();
        PreparedAtoms { points, total }
    }

    pub fn total(&self) -> f64 {
        self.total
    }

    /// `sum_j m_j (zeta_j + z)/(zeta_j - z)` without the guard check.
    #[inline]
    pub fn herglotz_unchecked(&self, z: Complex64) -> Complex64 {
        // (zeta + z)/(zeta - z) = -1 + 2 zeta/(zeta - z)
        let s: Complex64 = self.points.iter().map(|&(zeta, m)| m * zeta / (zeta - z)).sum();
        2.0 * s - self.total
    }

    pub fn herglotz(&self, z: Complex64) -> Result<Complex64> {
        check_guard(z)?;
        Ok(self.herglotz_unchecked(z))
    }
}

pub fn herglotz_atomic(mu: &AtomicMeasure, z: Complex64) -> Result<Complex64> {
    PreparedAtoms::new(mu).herglotz(z)
}

/// `int P_z d nu`.
pub fn poisson(nu: &HybridSignedMeasure, z: Complex64) -> Result<f64> {
    check_guard(z)?;
    let density = PreparedDensity::new(&nu.density).herglotz_unchecked(z).re;
    let atomic = PreparedAtoms::new(&nu.atomic).herglotz_unchecked(z).re;
    Ok(density + nu.atomic_scale * atomic)
}

/// `Theta_mu(z) = exp(-H(mu)(z))`.
pub fn singular_inner(mu: &AtomicMeasure, z: Complex64) -> Result<Complex64> {
    Ok((-herglotz_atomic(mu, z)?).exp())
}

/// `e^w - 1` accurate for small `w`.
pub fn exp_m1(w: Complex64) -> Complex64 {
    let (s, c) = w.im.sin_cos();
    let half = (0.5 * w.im).sin();
    let em1 = w.re.exp_m1();
    Complex64::new(em1 * c - 2.0 * half * half, (em1 + 1.0) * s)
}

/// `F(z) = exp(sum_k H(level_k)(z))`.
#[derive(Clone, Debug)]
pub struct OuterConstruction {
    levels: Vec<PreparedDensity>,
}

/// Densities are non-negative by construction.
pub fn build_outer(levels: &[PiecewiseConstantDensity]) -> OuterConstruction {
    OuterConstruction {
        levels: levels.iter().map(PreparedDensity::new).collect(),
    }
}

impl OuterConstruction {
    pub fn levels(&self) -> &[PreparedDensity] {
        &self.levels
    }

    /// `log F(z) = sum_k H(f_k)(z)`.
    pub fn log_eval(&self, z: Complex64) -> Result<Complex64> {
        check_guard(z)?;
        Ok(self.log_eval_unchecked(z))
    }

    pub fn log_eval_unchecked(&self, z: Complex64) -> Complex64 {
        self.levels.iter().map(|l| l.herglotz_unchecked(z)).sum()
    }

    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        Ok(self.log_eval(z)?.exp())
    }

    /// `F(0) = exp(sum_k int f_k dm)`.
    pub fn value_at_origin(&self) -> f64 {
        self.levels.iter().map(|l| l.integral()).sum::<f64>().exp()
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Ring {
    pub radius: f64,
    /// Annulus index `k`, `None` for the core disk inside the first annulus.
    pub tag: Option<usize>,
    pub angles: Vec<f64>,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct SamplePoint {
    pub z: Complex64,
    pub radius: f64,
    pub tag: Option<usize>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DiskGridParams {
    pub rings_per_annulus: usize,
    pub core_rings: usize,
    pub min_angles: usize,
    pub max_angles: usize,
    /// At most this many focus positions are used (evenly subsampled).
    pub max_focus: usize,
}

impl Default for DiskGridParams {
    fn default() -> Self {
        DiskGridParams {
            rings_per_annulus: 8,
            core_rings: 6,
            min_angles: 64,
            max_angles: 512,
            max_focus: 96,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DiskSampleGrid {
    pub rings: Vec<Ring>,
    /// `(upper, lower)` bounds on `1 - |z|` of each annulus, clipped to the innermost ring.
    pub annuli: Vec<(f64, f64)>,
}

/// Offsets (in units of `(1 - r) / 2 pi`) placed around every focus angle.
const FOCUS_OFFSETS: [f64; 5] = [-2.0, -0.5, 0.0, 0.5, 2.0];

impl DiskSampleGrid {
    /// Rings aligned with the annuli `R_k = {l_{k+1} < 1-|z| <= l_k}` of a schedule
    /// (`l_k` its arc lengths; the last annulus runs down to the next level or the
    /// innermost ring). `active_arcs[k]` is the number of charged arcs at level `k`,
    /// and `focus` lists circle positions where extra angles are placed.
    pub fn for_schedule(
        grid: &GridSchedule,
        params: &DiskGridParams,
        active_arcs: &[usize],
        focus: &[f64],
    ) -> Result<Self> {
        if params.rings_per_annulus < 3 {
            return Err(LabError::Precondition("need at least 3 rings per annulus".into()));
        }
        let mut bounds: Vec<f64> = (0..grid.len()).map(|k| grid.arc_length(k)).collect();
        let next = grid.certificate.next_level.map(|n| match grid.kind {
            GridKind::Dyadic => crate::weights::dyadic_length(n as u32),
            GridKind::Uniform => 1.0 / n as f64,
        });
        bounds.push(next.unwrap_or(0.0).max(MIN_RING_DISTANCE));

        let focus: Vec<f64> = if focus.len() > params.max_focus {
            let step = focus.len() as f64 / params.max_focus as f64;
            (0..params.max_focus).map(|i| focus[(i as f64 * step) as usize]).collect()
        } else {
            focus.to_vec()
        };
        let angles_for = |t: f64, active: usize| -> Vec<f64> {
            let count = (4 * active).clamp(params.min_angles, params.max_angles.max(params.min_angles));
            let mut angles: Vec<f64> = (0..count).map(|i| i as f64 / count as f64).collect();
            for &f in &focus {
                for off in FOCUS_OFFSETS {
                    angles.push(crate::measures::wrap_unit(f + off * t / TAU));
                }
            }
            angles.sort_by(f64::total_cmp);
            angles.dedup();
            angles
        };

        let mut rings = Vec::new();
        let core_edge = 1.0 - bounds[0];
        rings.push(Ring {
            radius: 0.0,
            tag: None,
            angles: vec![0.0],
        });
        for i in 1..params.core_rings {
            let r = core_edge * i as f64 / params.core_rings as f64;
            rings.push(Ring {
                radius: r,
                tag: None,
                angles: angles_for(1.0 - r, 0),
            });
        }

        let mut annuli = Vec::new();
        for k in 0..grid.len() {
            let upper = bounds[k];
            if upper < MIN_RING_DISTANCE {
                break;
            }
            let lower_raw = bounds[k + 1];
            let clipped = lower_raw <= MIN_RING_DISTANCE;
            let lower = lower_raw.max(MIN_RING_DISTANCE);
            let m = params.rings_per_annulus;
            // geometric in 1 - r; include the lower end only when it is the clip
            let denom = if clipped { (m - 1) as f64 } else { m as f64 };
            let active = active_arcs.get(k).copied().unwrap_or(0);
            for i in 0..m {
                let t = upper * (lower / upper).powf(i as f64 / denom);
                rings.push(Ring {
                    radius: 1.0 - t,
                    tag: Some(k),
                    angles: angles_for(t, active),
                });
            }
            annuli.push((upper, lower));
            if clipped {
                break;
            }
        }
        rings.dedup_by(|b, a| b.radius <= a.radius);
        Ok(DiskSampleGrid { rings, annuli })
    }

    /// `rings` equally spaced radii in `[0, r_max]`, `angles` each.
    pub fn uniform(rings: usize, angles: usize, r_max: f64) -> Result<Self> {
        if rings < 2 || angles == 0 || !(0.0..=1.0 - BOUNDARY_GUARD).contains(&r_max) {
            return Err(LabError::Precondition("uniform grid needs >= 2 rings, >= 1 angle, r_max < 1".into()));
        }
        let ring_angles: Vec<f64> = (0..angles).map(|i| i as f64 / angles as f64).collect();
        Ok(DiskSampleGrid {
            rings: (0..rings)
                .map(|i| Ring {
                    radius: r_max * i as f64 / (rings - 1) as f64,
                    tag: None,
                    angles: ring_angles.clone(),
                })
                .collect(),
            annuli: Vec::new(),
        })
    }

    pub fn len(&self) -> usize {
        self.rings.iter().map(|r| r.angles.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.rings.is_empty()
    }

    pub fn points(&self) -> Vec<SamplePoint> {
        self.rings
            .iter()
            .flat_map(|ring| {
                ring.angles.iter().map(move |&theta| SamplePoint {
                    z: ring.radius * unit(theta),
                    radius: ring.radius,
                    tag: ring.tag,
                })
            })
            .collect()
    }

    /// Rings per annulus tag.
    pub fn rings_in_annulus(&self, k: usize) -> usize {
        self.rings.iter().filter(|r| r.tag == Some(k)).count()
    }

    /// Restrict to points with `|z| <= r_max`.
    pub fn within(&self, r_max: f64) -> DiskSampleGrid {
        DiskSampleGrid {
            rings: self.rings.iter().filter(|r| r.radius <= r_max).cloned().collect(),
            annuli: self.annuli.clone(),
        }
    }

    /// Data-parallel evaluation over the sample points.
    pub fn evaluate<T, F>(&self, f: F) -> Vec<(SamplePoint, T)>
    where
        T: Send,
        F: Fn(&SamplePoint) -> T + Sync + Send,
    {
        self.points().into_par_iter().map(|p| {
            let v = f(&p);
            (p, v)
        }).collect()
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct WeightedSup {
    pub sup: f64,
    /// `log` of the sup; stays finite when the sup underflows.
    pub log_sup: f64,
    pub argmax: Complex64,
}

/// `max W(1-|z|)^rho |f(z)|` over the grid, from `log |f|`.
pub fn weighted_sup_log<F>(log_abs: F, weight: &Weight, rho: f64, grid: &DiskSampleGrid) -> Result<WeightedSup>
where
    F: Fn(Complex64) -> f64 + Sync + Send,
{
    if grid.is_empty() {
        return Err(LabError::Precondition("empty disk grid".into()));
    }
    let best = grid
        .evaluate(|p| -rho * weight.log_inv_raw(1.0 - p.radius) + log_abs(p.z))
        .into_iter()
        .filter(|(_, v)| !v.is_nan())
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .ok_or_else(|| LabError::Precondition("no finite samples".into()))?;
    Ok(WeightedSup {
        sup: best.1.exp(),
        log_sup: best.1,
        argmax: best.0.z,
    })
}

pub fn weighted_sup<F>(f: F, weight: &Weight, rho: f64, grid: &DiskSampleGrid) -> Result<WeightedSup>
where
    F: Fn(Complex64) -> Complex64 + Sync + Send,
{
    weighted_sup_log(|z| f(z).norm().ln(), weight, rho, grid)
}

/// `int_D |f|^p W(1-|z|) dA/pi` by ring averages and the trapezoid rule in `r`.
pub fn ap_integral<F>(f: F, weight: &Weight, p: f64, grid: &DiskSampleGrid) -> Result<f64>
where
    F: Fn(Complex64) -> Complex64 + Sync + Send,
{
    if !(p > 0.0 && p.is_finite()) {
        return Err(LabError::Domain {
            value: p,
            domain: "(0, inf)",
        });
    }
    if grid.rings.len() < 2 {
        return Err(LabError::Precondition("need at least two rings".into()));
    }
    let profile: Vec<(f64, f64)> = grid
        .rings
        .par_iter()
        .map(|ring| {
            let mean = ring
                .angles
                .iter()
                .map(|&theta| f(ring.radius * unit(theta)).norm().powf(p))
                .sum::<f64>()
                / ring.angles.len() as f64;
            let w = (-weight.log_inv_raw(1.0 - ring.radius)).exp();
            (ring.radius, 2.0 * ring.radius * w * mean)
        })
        .collect();
    let mut total: f64 = profile
        .windows(2)
        .map(|s| 0.5 * (s[1].0 - s[0].0) * (s[0].1 + s[1].1))
        .sum();
    // the strip from the last ring to the circle, integrand held constant
    let (r_last, g_last) = profile[profile.len() - 1];
    total += (1.0 - r_last) * g_last;
    Ok(total)
}

/// The `A^p(W)` quasi-norm `(int |f|^p W dA/pi)^{min(1, 1/p)}`.
pub fn ap_norm<F>(f: F, weight: &Weight, p: f64, grid: &DiskSampleGrid) -> Result<f64>
where
    F: Fn(Complex64) -> Complex64 + Sync + Send,
{
    Ok(ap_integral(f, weight, p, grid)?.powf((1.0 / p).min(1.0)))
}

/// One row of a disk-grid evaluation dump.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EvalRow {
    pub re_z: f64,
    pub im_z: f64,
    pub ring_radius: f64,
    pub annulus_tag: Option<usize>,
    pub abs_f: f64,
    pub abs_theta: f64,
    pub weighted: f64,
    pub deviation: f64,
}

pub fn write_eval_csv<W: std::io::Write>(rows: &[EvalRow], out: W) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    for row in rows {
        writer.serialize(row)?;
    }
    writer.flush()?;
    Ok(())
}
