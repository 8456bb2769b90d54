//! The two end-to-end constructions.
//!
//! * `cidr`: dyadic W-adapted grid, Roberts decomposition with cap `eta`, level
//!   densities `f_k`, `F_eta = exp(sum_k H(f_k))`, swept over a list of `eta`.
//! * `cidd`: uniform doubling schedule, coefficients `eps_k`, level densities
//!   `phi_k = eps_k sum_I mu(I)/|I| 1_I`, `F_N = exp(sum_k H(phi_k))`, swept over `N`.
//!
//! Both evaluate `F Theta` on disk sample grids aligned with the level annuli and
//! record the level-wise Poisson bounds, the weighted sups and the deviation from 1.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, PipelineKind};
use crate::error::{LabError, Result};
use crate::measures::{sup_arc_mass, ArcMass, AtomicMeasure, HybridSignedMeasure, PiecewiseConstantDensity};
use crate::report::{spread, strictly_decreasing, Check, Inequality, SCHEMA_VERSION};
use crate::roberts::{build_level_density, decompose, residual_support_entropy, ResidualEntropyReport};
use crate::schedules::{
    build_disdini_schedule, build_epsilon_schedule, build_w_adapted_grid, verify_epsilon_schedule, CoefficientSchedule,
    EpsilonReport, GridSchedule,
};
use crate::transforms::{
    exp_m1, DiskSampleGrid, EvalRow, PreparedAtoms, PreparedDensity, SamplePoint, MIN_RING_DISTANCE,
};
use crate::weights::{Weight, WeightClassification};

/// Relative slack on the exact arc bounds.
pub const ARC_BOUND_TOL: f64 = 1e-12;
/// Absolute tolerance on `log(F Theta)(0)` in `cidd`; the finest levels have
/// arcs of length ~1e-9 and heights ~1e8, so the closed form loses a few digits.
pub const ORIGIN_TOL: f64 = 1e-9;
/// Engineering ceiling for the empirical Poisson constants.
pub const POISSON_CEILING: f64 = 100.0;
/// Allowed spread of the Poisson constants across levels of one run.
pub const POISSON_SPREAD: f64 = 2.0;

/// One level of the construction: `nu_k = density - scale * atoms[atom_set]`.
struct LevelTerm {
    density: PreparedDensity,
    atom_set: usize,
    scale: f64,
}

/// `log(F Theta) = sum_k H(nu_k) - sum_i tail_i H(atoms_i)` and
/// `log |Theta| = -sum_i theta_i Re H(atoms_i)`.
struct Construction {
    atom_sets: Vec<PreparedAtoms>,
    levels: Vec<LevelTerm>,
    tail: Vec<(usize, f64)>,
    theta: Vec<(usize, f64)>,
}

struct PointEval {
    point: SamplePoint,
    /// `P(nu_k)(z)` per level.
    poisson: Vec<f64>,
    log_abs_f: f64,
    log_abs_theta: f64,
    log_ft: Complex64,
}

impl PointEval {
    fn poisson_sum(&self) -> f64 {
        self.poisson.iter().sum()
    }

    fn deviation(&self) -> f64 {
        exp_m1(self.log_ft).norm()
    }
}

impl Construction {
    fn eval(&self, point: &SamplePoint) -> PointEval {
        let z = point.z;
        let h_sets: Vec<Complex64> = self.atom_sets.iter().map(|a| a.herglotz_unchecked(z)).collect();
        let mut poisson = Vec::with_capacity(self.levels.len());
        let mut sum_nu = Complex64::new(0.0, 0.0);
        let mut log_abs_f = 0.0;
        for level in &self.levels {
            let hf = level.density.herglotz_unchecked(z);
            let hnu = hf - level.scale * h_sets[level.atom_set];
            poisson.push(hnu.re);
            sum_nu += hnu;
            log_abs_f += hf.re;
        }
        let tail: Complex64 = self.tail.iter().map(|&(i, c)| c * h_sets[i]).sum();
        let log_abs_theta = -self.theta.iter().map(|&(i, c)| c * h_sets[i].re).sum::<f64>();
        PointEval {
            point: *point,
            poisson,
            log_abs_f,
            log_abs_theta,
            log_ft: sum_nu - tail,
        }
    }

    fn eval_grid(&self, grid: &DiskSampleGrid) -> Vec<PointEval> {
        grid.evaluate(|p| self.eval(p)).into_iter().map(|(_, v)| v).collect()
    }
}

/// Empirical constant of a level-wise Poisson bound `P(nu_k)(z) <= C s_k min(1/l_k, 1/(1-|z|))`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LevelConstant {
    pub level: u64,
    pub arc_length: f64,
    pub constant: f64,
    /// Whether the sample grid reaches `1 - |z| = l_k` (levels finer than the
    /// innermost ring cannot attain their bound on the grid).
    pub resolvable: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PoissonSummary {
    pub levels: Vec<LevelConstant>,
    /// Max over resolvable levels.
    pub constant: f64,
    /// `max / min` over resolvable levels with a positive constant.
    pub spread: f64,
}

fn poisson_summary(evals: &[PointEval], lengths: &[f64], levels: &[u64], scales: &[f64]) -> PoissonSummary {
    let constants: Vec<LevelConstant> = (0..lengths.len())
        .map(|k| {
            let constant = evals
                .iter()
                .map(|e| {
                    let t = 1.0 - e.point.radius;
                    let denom = scales[k] * (1.0 / lengths[k]).min(1.0 / t);
                    if denom > 0.0 {
                        e.poisson[k] / denom
                    } else {
                        0.0
                    }
                })
                .fold(0.0f64, f64::max);
            LevelConstant {
                level: levels[k],
                arc_length: lengths[k],
                constant,
                resolvable: lengths[k] >= MIN_RING_DISTANCE && scales[k] > 0.0,
            }
        })
        .collect();
    let resolved: Vec<f64> = constants
        .iter()
        .filter(|c| c.resolvable && c.constant > 0.0)
        .map(|c| c.constant)
        .collect();
    PoissonSummary {
        constant: resolved.iter().copied().fold(0.0, f64::max),
        spread: if resolved.is_empty() { 1.0 } else { spread(&resolved) },
        levels: constants,
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct Extremum {
    pub value: f64,
    pub log_value: f64,
    pub re_z: f64,
    pub im_z: f64,
}

fn extremum<F: Fn(&PointEval) -> f64>(evals: &[PointEval], log_value: F) -> Extremum {
    let best = evals
        .iter()
        .map(|e| (e, log_value(e)))
        .filter(|(_, v)| !v.is_nan())
        .max_by(|a, b| a.1.total_cmp(&b.1));
    match best {
        Some((e, v)) => Extremum {
            value: v.exp(),
            log_value: v,
            re_z: e.point.z.re,
            im_z: e.point.z.im,
        },
        None => Extremum {
            value: 0.0,
            log_value: f64::NEG_INFINITY,
            re_z: 0.0,
            im_z: 0.0,
        },
    }
}

fn log_weight(weight: &Weight, e: &PointEval) -> f64 {
    -weight.log_inv_raw(1.0 - e.point.radius)
}

fn rows(evals: &[PointEval], weight: &Weight, rho: f64) -> Vec<EvalRow> {
    evals
        .iter()
        .map(|e| EvalRow {
            re_z: e.point.z.re,
            im_z: e.point.z.im,
            ring_radius: e.point.radius,
            annulus_tag: e.point.tag,
            abs_f: e.log_abs_f.exp(),
            abs_theta: e.log_abs_theta.exp(),
            weighted: (rho * log_weight(weight, e) + e.log_ft.re).exp(),
            deviation: e.deviation(),
        })
        .collect()
}

/// Disk-grid evaluation table for CSV output.
#[derive(Clone, Debug)]
pub struct EvalDump {
    pub name: String,
    pub rows: Vec<EvalRow>,
}

fn compact_grid(config: &ExperimentConfig, focus: &[f64]) -> Result<DiskSampleGrid> {
    let c = &config.compact;
    let mut grid = DiskSampleGrid::uniform(c.rings, c.angles, c.radius)?;
    let focus: Vec<f64> = focus.iter().copied().take(config.disk.max_focus).collect();
    for ring in grid.rings.iter_mut().skip(1) {
        ring.angles.extend(focus.iter().copied());
        ring.angles.sort_by(f64::total_cmp);
        ring.angles.dedup();
    }
    Ok(grid)
}

/// Positions worth refining the angular sampling around: atoms, evenly subsampled.
fn focus_positions(mu: &AtomicMeasure, max: usize) -> Vec<f64> {
    let atoms = mu.atoms();
    if atoms.len() <= max {
        return atoms.iter().map(|a| a.position).collect();
    }
    let step = atoms.len() as f64 / max as f64;
    (0..max).map(|i| atoms[(i as f64 * step) as usize].position).collect()
}

fn require(flag: bool, what: &str, classification: &WeightClassification) -> Result<()> {
    if flag {
        Ok(())
    } else {
        Err(LabError::Precondition(format!(
            "weight is not {what} (good: {:?}, dini_regular: {:?}, log_divergent: {:?})",
            classification.good.verdict, classification.dini_regular, classification.log_divergent
        )))
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CidrRun {
    pub eta: f64,
    pub level_masses: Vec<f64>,
    pub residual_mass: f64,
    pub residual_fraction: f64,
    pub truncation_depth: usize,
    pub light_entropy: ResidualEntropyReport,
    /// `sup |nu_k(I)|` over arcs `|I| <= 2^-n_k` against `4 eta kappa_W(2^-n_k)`.
    pub arc_bounds: Vec<Inequality>,
    pub poisson: PoissonSummary,
    /// `sum_j P(nu_j)` on `|z| <= 1 - 2^-n_k` against `eta log(1/W(2^-n_{k+1}))`.
    pub lacunary: Vec<Inequality>,
    pub lacunary_spread: f64,
    /// `F(0)` against `exp(sum_k int f_k dm)`.
    pub origin_check: Inequality,
    /// `sup W(1-|z|)^rho |F Theta|`
    pub weighted_sup: Extremum,
    /// `D(eta) = max W(1-|z|) |F Theta - 1|`
    pub deviation: Extremum,
    /// `max_{|z| <= r} |F Theta - 1|`
    pub compact_deviation: Extremum,
    pub grid_points: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CidrTrend {
    pub deviations: Vec<f64>,
    pub strictly_decreasing: bool,
    pub last_over_first: f64,
    pub decay_factor_met: bool,
    pub sup_spread: f64,
    pub sup_uniform: bool,
    pub passed: bool,
}

pub const CIDR_DECAY: f64 = 3.0;
pub const CIDR_UNIFORMITY: f64 = 2.0;
pub const CIDD_DECAY: f64 = 2.0;
pub const CIDD_UNIFORMITY: f64 = 1.5;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CidrReport {
    pub schema: u32,
    pub pipeline: PipelineKind,
    pub weight: Weight,
    pub classification: WeightClassification,
    pub grid: GridSchedule,
    pub total_mass: f64,
    pub rho: f64,
    pub runs: Vec<CidrRun>,
    pub trend: CidrTrend,
}

pub struct CidrOutcome {
    pub report: CidrReport,
    pub dumps: Vec<EvalDump>,
}

pub fn run_cidr(config: &ExperimentConfig) -> Result<CidrOutcome> {
    let params = config.cidr_params();
    let weight = &config.weight;
    let classification = weight.classify(config.classification_resolution)?;
    require(
        classification.good.verdict.is_yes() && classification.dini_regular.verdict.is_yes(),
        "good and Dini-regular",
        &classification,
    )?;
    let mu = config.build_measure()?;
    let grid = build_w_adapted_grid(weight, params.n0, params.depth)?;
    let lengths: Vec<f64> = (0..grid.len()).map(|k| grid.arc_length(k)).collect();
    let next_length = grid
        .certificate
        .next_level
        .map(|n| crate::weights::dyadic_length(n as u32));
    let focus = focus_positions(&mu, config.disk.max_focus);
    let compact = compact_grid(config, &focus)?;

    let mut runs = Vec::with_capacity(params.etas.len());
    let mut dumps = Vec::with_capacity(params.etas.len());
    for (run_index, &eta) in params.etas.iter().enumerate() {
        let dec = decompose(&mu, weight, &grid, eta)?;
        let densities: Vec<PiecewiseConstantDensity> =
            (0..dec.pieces.len()).map(|k| build_level_density(&dec, k)).collect::<Result<_>>()?;

        let arc_bounds = (0..dec.pieces.len())
            .map(|k| {
                let nu = HybridSignedMeasure::balanced(densities[k].clone(), dec.pieces[k].piece.clone());
                let bound = 4.0 * eta * weight.gauge_dyadic(dec.pieces[k].level);
                Inequality::with_slack(
                    "arc-bound",
                    format!("level {}", dec.pieces[k].level),
                    sup_arc_mass(&nu, lengths[k]),
                    bound,
                    ARC_BOUND_TOL,
                )
            })
            .collect();

        let mut atom_sets: Vec<PreparedAtoms> = dec.pieces.iter().map(|p| PreparedAtoms::new(&p.piece)).collect();
        let residual_set = atom_sets.len();
        atom_sets.push(PreparedAtoms::new(&dec.residual));
        let construction = Construction {
            levels: densities
                .iter()
                .enumerate()
                .map(|(k, d)| LevelTerm {
                    density: PreparedDensity::new(d),
                    atom_set: k,
                    scale: 1.0,
                })
                .collect(),
            tail: vec![(residual_set, 1.0)],
            theta: (0..atom_sets.len()).map(|i| (i, 1.0)).collect(),
            atom_sets,
        };

        let active: Vec<usize> = dec.pieces.iter().map(|p| p.arcs.len()).collect();
        let disk = DiskSampleGrid::for_schedule(&grid, &config.disk, &active, &focus)?;
        let evals = construction.eval_grid(&disk);
        let compact_evals = construction.eval_grid(&compact);

        let scales: Vec<f64> = dec.pieces.iter().map(|p| eta * weight.gauge_dyadic(p.level)).collect();
        let poisson = poisson_summary(&evals, &lengths, &grid.levels, &scales);

        let mut lacunary = Vec::new();
        for k in 0..grid.len() {
            let finer = if k + 1 < grid.len() { Some(lengths[k + 1]) } else { next_length };
            let Some(finer) = finer else { continue };
            let rhs = eta * weight.log_inv_raw(finer);
            let lhs = evals
                .iter()
                .filter(|e| 1.0 - e.point.radius >= lengths[k])
                .map(PointEval::poisson_sum)
                .fold(f64::NEG_INFINITY, f64::max);
            if lhs.is_finite() {
                lacunary.push(Inequality::new("lacunary-bound", format!("|z| <= 1 - 2^-{}", grid.levels[k]), lhs, rhs));
            }
        }
        let lacunary_ratios: Vec<f64> = lacunary.iter().map(|q| q.ratio).filter(|r| *r > 0.0).collect();

        let origin = construction.eval(&SamplePoint {
            z: Complex64::new(0.0, 0.0),
            radius: 0.0,
            tag: None,
        });
        let extracted: f64 = densities.iter().map(|d| d.integral()).sum();
        let origin_check = Inequality::new(
            "origin-value",
            "|log F(0) - sum_k int f_k|",
            (origin.log_abs_f - extracted).abs(),
            1e-12 * extracted.max(1.0),
        );

        let rho = params.rho;
        let weighted_sup = extremum(&evals, |e| rho * log_weight(weight, e) + e.log_ft.re);
        let deviation = extremum(&evals, |e| log_weight(weight, e) + e.deviation().ln());
        let compact_deviation = extremum(&compact_evals, |e| e.deviation().ln());

        runs.push(CidrRun {
            eta,
            level_masses: dec.pieces.iter().map(|p| p.mass()).collect(),
            residual_mass: dec.residual_mass(),
            residual_fraction: dec.residual_fraction(),
            truncation_depth: dec.truncation_depth,
            light_entropy: residual_support_entropy(&dec, weight),
            arc_bounds,
            poisson,
            lacunary_spread: if lacunary_ratios.is_empty() { 1.0 } else { spread(&lacunary_ratios) },
            lacunary,
            origin_check,
            weighted_sup,
            deviation,
            compact_deviation,
            grid_points: disk.len(),
        });
        dumps.push(EvalDump {
            name: format!("cidr_eta_{run_index}"),
            rows: rows(&evals, weight, rho),
        });
    }

    let deviations: Vec<f64> = runs.iter().map(|r| r.deviation.value).collect();
    let sups: Vec<f64> = runs.iter().map(|r| r.weighted_sup.value).collect();
    let last_over_first = deviations.last().unwrap_or(&0.0) / deviations.first().unwrap_or(&1.0);
    let sup_spread = spread(&sups);
    let dec_ok = strictly_decreasing(&deviations);
    let decay_ok = last_over_first <= 1.0 / CIDR_DECAY;
    let uniform_ok = sup_spread <= CIDR_UNIFORMITY;
    let trend = CidrTrend {
        deviations,
        strictly_decreasing: dec_ok,
        last_over_first,
        decay_factor_met: decay_ok,
        sup_spread,
        sup_uniform: uniform_ok,
        passed: dec_ok && decay_ok && uniform_ok,
    };

    Ok(CidrOutcome {
        report: CidrReport {
            schema: SCHEMA_VERSION,
            pipeline: PipelineKind::Cidr,
            weight: weight.clone(),
            classification,
            total_mass: mu.total_mass(),
            rho: params.rho,
            grid,
            runs,
            trend,
        },
        dumps,
    })
}

/// `phi = eps sum_I mu(I)/|I| 1_I` over the arcs `[j/n, (j+1)/n)` charged by `mu`.
pub fn uniform_level_density(mu: &AtomicMeasure, n: u64, eps: f64) -> Result<PiecewiseConstantDensity> {
    let nf = n as f64;
    let mut cells: Vec<(u64, f64)> = Vec::new();
    for atom in mu.atoms() {
        let mut j = (atom.position * nf).floor() as u64;
        // keep j/n <= theta < (j+1)/n despite rounding in the product
        if j as f64 / nf > atom.position {
            j -= 1;
        } else if (j + 1) as f64 / nf <= atom.position {
            j += 1;
        }
        match cells.last_mut() {
            Some((idx, m)) if *idx == j => *m += atom.mass,
            _ => cells.push((j, atom.mass)),
        }
    }
    PiecewiseConstantDensity::from_cells(
        cells
            .into_iter()
            .map(|(j, m)| (j as f64 / nf, ((j + 1) as f64 / nf).min(1.0), eps * m * nf))
            .collect(),
    )
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CiddRun {
    pub n: usize,
    pub a: f64,
    pub eps0: f64,
    pub grid: GridSchedule,
    pub schedule: CoefficientSchedule,
    pub schedule_report: EpsilonReport,
    /// `sup |nu_k(I)|` over arcs `|I| <= 1/n_k` against `2 eps_k |mu|`.
    pub arc_bounds: Vec<Inequality>,
    pub poisson: PoissonSummary,
    /// On `R_k`: `sum_j P(nu_j)` against `sum_{j<=k} eps_j n_j + n_{k+1} sum_{j>k} eps_j`.
    pub annulus: Vec<Inequality>,
    pub annulus_spread: f64,
    /// `F_N(0) Theta(0)` against `exp(-eps_0 |mu|)`.
    pub origin_check: Inequality,
    pub weighted_sup: Extremum,
    pub compact_deviation: Extremum,
    pub grid_points: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CiddTrend {
    pub compact_deviations: Vec<f64>,
    pub strictly_decreasing: bool,
    pub last_over_first: f64,
    pub decay_factor_met: bool,
    pub sup_spread: f64,
    pub sup_uniform: bool,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CiddReport {
    pub schema: u32,
    pub pipeline: PipelineKind,
    pub weight: Weight,
    pub classification: WeightClassification,
    pub total_mass: f64,
    pub rho: f64,
    pub runs: Vec<CiddRun>,
    pub trend: CiddTrend,
}

pub struct CiddOutcome {
    pub report: CiddReport,
    pub dumps: Vec<EvalDump>,
}

pub fn run_cidd(config: &ExperimentConfig) -> Result<CiddOutcome> {
    let params = config.cidd_params();
    let weight = &config.weight;
    let classification = weight.classify(config.classification_resolution)?;
    require(
        classification.good.verdict.is_yes() && classification.log_divergent.is_yes(),
        "good and log-divergent",
        &classification,
    )?;
    let mu = config.build_measure()?;
    let total = mu.total_mass();
    let focus = focus_positions(&mu, config.disk.max_focus);
    let compact = compact_grid(config, &focus)?;

    // schedules first: the weight exponent is shared by every N
    let mut plans = Vec::with_capacity(params.n_list.len());
    for &n in &params.n_list {
        let a = params.a_for(n);
        let eps0 = params.eps0_for(n);
        let grid = build_disdini_schedule(weight, a, params.m0, n + 2)?;
        let schedule = build_epsilon_schedule(weight, &grid, eps0, n)?;
        plans.push((n, a, eps0, grid, schedule));
    }
    let rho = params.rho.unwrap_or_else(|| {
        let c0 = plans.iter().map(|p| p.4.c0).fold(0.0, f64::max);
        (2.0 * c0 + 0.5).max(1.0)
    });

    let mut runs = Vec::with_capacity(plans.len());
    let mut dumps = Vec::with_capacity(plans.len());
    for (n, a, eps0, grid, schedule) in plans {
        let schedule_report = verify_epsilon_schedule(&schedule, &grid, weight)?;
        let eps = &schedule.epsilons;
        // level k (1..=N) lives on grid level k
        let phis: Vec<PiecewiseConstantDensity> = (1..=n)
            .map(|k| uniform_level_density(&mu, grid.levels[k], eps[k]))
            .collect::<Result<_>>()?;
        let lengths: Vec<f64> = (1..=n).map(|k| grid.arc_length(k)).collect();
        let levels: Vec<u64> = grid.levels[1..=n].to_vec();

        let arc_bounds = (0..n)
            .map(|i| {
                let nu = HybridSignedMeasure::new(phis[i].clone(), mu.clone(), -eps[i + 1]);
                Inequality::with_slack(
                    "arc-bound",
                    format!("level {}", levels[i]),
                    sup_arc_mass(&nu, lengths[i]),
                    2.0 * eps[i + 1] * total,
                    ARC_BOUND_TOL,
                )
            })
            .collect();

        let construction = Construction {
            atom_sets: vec![PreparedAtoms::new(&mu)],
            levels: phis
                .iter()
                .enumerate()
                .map(|(i, phi)| LevelTerm {
                    density: PreparedDensity::new(phi),
                    atom_set: 0,
                    scale: eps[i + 1],
                })
                .collect(),
            tail: vec![(0, eps[0])],
            theta: vec![(0, 1.0)],
        };

        let mut active = vec![0usize];
        active.extend(phis.iter().map(|p| p.support_cells().count()));
        let disk = DiskSampleGrid::for_schedule(&grid, &config.disk, &active, &focus)?;
        let evals = construction.eval_grid(&disk);
        let compact_evals = construction.eval_grid(&compact);

        let scales: Vec<f64> = (1..=n).map(|k| eps[k] * total).collect();
        let poisson = poisson_summary(&evals, &lengths, &levels, &scales);

        let mut annulus = Vec::new();
        for k in 0..=n {
            let head: f64 = (1..=k).map(|j| eps[j] * grid.levels[j] as f64).sum();
            let tail: f64 = eps[k + 1..].iter().sum();
            let rhs = (head + grid.levels[k + 1] as f64 * tail) * total;
            let lhs = evals
                .iter()
                .filter(|e| e.point.tag == Some(k))
                .map(PointEval::poisson_sum)
                .fold(f64::NEG_INFINITY, f64::max);
            if lhs.is_finite() {
                annulus.push(Inequality::new("annulus-bound", format!("R_{k}"), lhs, rhs));
            }
        }
        let annulus_ratios: Vec<f64> = annulus.iter().map(|q| q.ratio).filter(|r| *r > 0.0).collect();

        let origin = construction.eval(&SamplePoint {
            z: Complex64::new(0.0, 0.0),
            radius: 0.0,
            tag: None,
        });
        let origin_check = Inequality::new(
            "origin-value",
            "|log(F Theta)(0) + eps_0 |mu||",
            (origin.log_ft - Complex64::new(-eps[0] * total, 0.0)).norm(),
            ORIGIN_TOL,
        );

        let weighted_sup = extremum(&evals, |e| rho * log_weight(weight, e) + e.log_ft.re);
        let compact_deviation = extremum(&compact_evals, |e| e.deviation().ln());

        runs.push(CiddRun {
            n,
            a,
            eps0,
            schedule_report,
            arc_bounds,
            poisson,
            annulus_spread: if annulus_ratios.is_empty() { 1.0 } else { spread(&annulus_ratios) },
            annulus,
            origin_check,
            weighted_sup,
            compact_deviation,
            grid_points: disk.len(),
            grid,
            schedule,
        });
        dumps.push(EvalDump {
            name: format!("cidd_n_{n}"),
            rows: rows(&evals, weight, rho),
        });
    }

    let compact_deviations: Vec<f64> = runs.iter().map(|r| r.compact_deviation.value).collect();
    let sups: Vec<f64> = runs.iter().map(|r| r.weighted_sup.value).collect();
    let last_over_first = compact_deviations.last().unwrap_or(&0.0) / compact_deviations.first().unwrap_or(&1.0);
    let sup_spread = spread(&sups);
    let dec_ok = strictly_decreasing(&compact_deviations);
    let decay_ok = last_over_first <= 1.0 / CIDD_DECAY;
    let uniform_ok = sup_spread <= CIDD_UNIFORMITY;

    Ok(CiddOutcome {
        report: CiddReport {
            schema: SCHEMA_VERSION,
            pipeline: PipelineKind::Cidd,
            weight: weight.clone(),
            classification,
            total_mass: total,
            rho,
            runs,
            trend: CiddTrend {
                compact_deviations,
                strictly_decreasing: dec_ok,
                last_over_first,
                decay_factor_met: decay_ok,
                sup_spread,
                sup_uniform: uniform_ok,
                passed: dec_ok && decay_ok && uniform_ok,
            },
        },
        dumps,
    })
}

fn ratios(qs: &[Inequality]) -> String {
    let r: Vec<String> = qs.iter().map(|q| format!("{:.4}", q.ratio)).collect();
    format!("ratios [{}]", r.join(", "))
}

fn poisson_check(name: String, p: &PoissonSummary) -> Check {
    Check::new(
        name,
        p.constant <= POISSON_CEILING && p.spread <= POISSON_SPREAD,
        format!("constant {:.4}, spread {:.4}", p.constant, p.spread),
    )
}

/// Flattened pass/fail view of a cidr report.
pub fn cidr_checks(report: &CidrReport) -> Vec<Check> {
    let mut checks = Vec::new();
    for run in &report.runs {
        let tag = format!("cidr eta={}", run.eta);
        checks.push(Check::new(
            format!("{tag} arc bounds"),
            run.arc_bounds.iter().all(|q| q.holds),
            ratios(&run.arc_bounds),
        ));
        checks.push(poisson_check(format!("{tag} poisson constants"), &run.poisson));
        checks.push(Check::soft(
            format!("{tag} lacunary bounds"),
            run.lacunary.iter().all(|q| q.holds),
            ratios(&run.lacunary),
        ));
        checks.push(Check::new(
            format!("{tag} origin value"),
            run.origin_check.holds,
            format!("error {:e}", run.origin_check.lhs),
        ));
        checks.push(Check::soft(
            format!("{tag} residual entropy"),
            run.light_entropy.holds,
            format!("light sum {:.4} vs |mu|/eta {:.4}", run.light_entropy.light_sum, run.light_entropy.comparison),
        ));
    }
    let t = &report.trend;
    checks.push(Check::soft(
        "cidr deviation trend",
        t.strictly_decreasing && t.decay_factor_met,
        format!("D = {:?}, last/first = {:.4}", t.deviations, t.last_over_first),
    ));
    checks.push(Check::soft(
        "cidr weighted sup uniformity",
        t.sup_uniform,
        format!("spread {:.4}", t.sup_spread),
    ));
    checks
}

pub fn cidd_checks(report: &CiddReport) -> Vec<Check> {
    let mut checks = Vec::new();
    for run in &report.runs {
        let tag = format!("cidd N={}", run.n);
        checks.push(Check::new(
            format!("{tag} coefficient schedule"),
            run.schedule_report.sum_passed && run.schedule_report.tail_passed,
            format!("sum {}, c0 {:.4}", run.schedule_report.sum, run.schedule.c0),
        ));
        checks.push(Check::new(
            format!("{tag} arc bounds"),
            run.arc_bounds.iter().all(|q| q.holds),
            ratios(&run.arc_bounds),
        ));
        checks.push(poisson_check(format!("{tag} poisson constants"), &run.poisson));
        checks.push(Check::soft(
            format!("{tag} annulus bounds"),
            run.annulus.iter().all(|q| q.holds),
            ratios(&run.annulus),
        ));
        checks.push(Check::new(
            format!("{tag} origin value"),
            run.origin_check.holds,
            format!("error {:e}", run.origin_check.lhs),
        ));
    }
    let t = &report.trend;
    checks.push(Check::soft(
        "cidd compact deviation trend",
        t.strictly_decreasing && t.decay_factor_met,
        format!("deviation = {:?}, last/first = {:.4}", t.compact_deviations, t.last_over_first),
    ));
    checks.push(Check::soft(
        "cidd weighted sup uniformity",
        t.sup_uniform,
        format!("spread {:.4} (rho {:.3})", t.sup_spread, report.rho),
    ));
    checks
}
