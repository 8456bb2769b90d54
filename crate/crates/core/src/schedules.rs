//! Level sequences: the W-adapted dyadic grid, the discretized-divergence
//! (uniform) schedule, and the explicit coefficient schedule `(eps_k, c_0)`.

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::weights::Weight;

/// Largest dyadic exponent a grid level may take. Arc starts `j 2^-n` stay
/// exactly representable in an f64 well past this.
pub const DYADIC_CAP: u32 = 48;
/// The would-be next level is searched past the cap (for the certificate) up to here.
pub const DYADIC_SEARCH_LIMIT: u32 = 1000;
pub const MAX_GRID_DEPTH: usize = 12;
pub const MAX_SCHEDULE_COUNT: usize = 40;
pub const UNIFORM_SEARCH_LIMIT: u64 = 1 << 40;
pub const GRID_RATIO: f64 = 10.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GridKind {
    /// Level `n` means arcs of length `2^-n`.
    Dyadic,
    /// Level `n` means arcs of length `1/n`.
    Uniform,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CumulativeCheck {
    /// `sum_{j<=k} w(level_j)`
    pub lhs: f64,
    /// `w(level_{k+1})`
    pub rhs: f64,
    pub holds: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct GridCertificate {
    /// `w` at each level (and at the would-be next level, last).
    pub w_values: Vec<f64>,
    /// Consecutive ratios `w(level_{k+1}) / w(level_k)`, including the next level.
    pub ratios: Vec<f64>,
    /// Sampled doubling constant of `w` over the grid's range (dyadic only).
    pub doubling_constant: Option<f64>,
    pub ratio_upper: Option<f64>,
    pub cumulative: Vec<CumulativeCheck>,
    /// `sum_{j<=k} w(1/n_j) / n_{j+1}` (uniform only).
    pub divergence_partial_sums: Vec<f64>,
    pub next_level: Option<u64>,
    /// Level that would have exceeded the dyadic cap, if the build stopped early.
    pub overflow: Option<u64>,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSchedule {
    pub kind: GridKind,
    pub levels: Vec<u64>,
    #[serde(default)]
    pub certificate: GridCertificate,
}

impl GridSchedule {
    pub fn new(kind: GridKind, levels: Vec<u64>) -> Result<Self> {
        if levels.is_empty() {
            return Err(LabError::Precondition("grid has no levels".into()));
        }
        if levels[0] == 0 || levels.windows(2).any(|p| p[1] <= p[0]) {
            return Err(LabError::Precondition(format!(
                "levels must be strictly increasing positive integers: {levels:?}"
            )));
        }
        if kind == GridKind::Dyadic && *levels.last().unwrap() > DYADIC_CAP as u64 {
            return Err(LabError::GridOverflow {
                attempted: *levels.last().unwrap() as u32,
                cap: DYADIC_CAP,
                achieved: levels.iter().copied().filter(|&n| n <= DYADIC_CAP as u64).collect(),
            });
        }
        Ok(GridSchedule {
            kind,
            levels,
            certificate: GridCertificate::default(),
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: GridSchedule = serde_json::from_str(text)?;
        let certificate = raw.certificate.clone();
        let mut grid = GridSchedule::new(raw.kind, raw.levels)?;
        grid.certificate = certificate;
        Ok(grid)
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn arc_length(&self, k: usize) -> f64 {
        level_length(self.kind, self.levels[k])
    }

    /// `w(arc length at level k)`.
    pub fn log_inv_at(&self, weight: &Weight, k: usize) -> f64 {
        level_log_inv(weight, self.kind, self.levels[k])
    }
}

fn level_length(kind: GridKind, n: u64) -> f64 {
    match kind {
        GridKind::Dyadic => crate::weights::dyadic_length(n as u32),
        GridKind::Uniform => 1.0 / n as f64,
    }
}

fn level_log_inv(weight: &Weight, kind: GridKind, n: u64) -> f64 {
    match kind {
        GridKind::Dyadic => weight.log_inv_dyadic(n as u32),
        GridKind::Uniform => weight.log_inv_reciprocal(n),
    }
}

fn cumulative_checks(w_values: &[f64]) -> Vec<CumulativeCheck> {
    let mut acc = 0.0;
    w_values
        .windows(2)
        .map(|p| {
            acc += p[0];
            CumulativeCheck {
                lhs: acc,
                rhs: p[1],
                holds: acc <= p[1],
            }
        })
        .collect()
}

/// W-adapted dyadic grid. Stops early (recording the overflow) when a level
/// would pass [`DYADIC_CAP`]; use [`build_w_adapted_grid_strict`] to turn that
/// into an error.
pub fn build_w_adapted_grid(weight: &Weight, n0: u32, depth: usize) -> Result<GridSchedule> {
    if n0 == 0 || n0 > DYADIC_CAP {
        return Err(LabError::Precondition(format!("n0 = {n0} outside 1..={DYADIC_CAP}")));
    }
    if depth == 0 || depth > MAX_GRID_DEPTH {
        return Err(LabError::Precondition(format!(
            "grid depth {depth} outside 1..={MAX_GRID_DEPTH}"
        )));
    }
    let next_after = |n: u32| -> Option<u32> {
        let target = GRID_RATIO * weight.log_inv_dyadic(n);
        (n + 1..=DYADIC_SEARCH_LIMIT).find(|&m| weight.log_inv_dyadic(m) >= target)
    };

    let mut levels = vec![n0];
    let mut next = None;
    let mut overflow = None;
    while let Some(m) = next_after(*levels.last().unwrap()) {
        if levels.len() == depth {
            next = Some(m);
            break;
        }
        if m > DYADIC_CAP {
            next = Some(m);
            overflow = Some(m as u64);
            break;
        }
        levels.push(m);
    }

    let mut w_values: Vec<f64> = levels.iter().map(|&n| weight.log_inv_dyadic(n)).collect();
    if let Some(m) = next {
        w_values.push(weight.log_inv_dyadic(m));
    }
    let ratios: Vec<f64> = w_values.windows(2).map(|p| p[1] / p[0]).collect();
    let top = next.unwrap_or(*levels.last().unwrap());
    let doubling = (n0..top)
        .map(|n| weight.log_inv_dyadic(n + 1) / weight.log_inv_dyadic(n))
        .filter(|r| r.is_finite())
        .fold(1.0f64, f64::max);
    let ratio_upper = GRID_RATIO * doubling.powi(10);
    let cumulative = cumulative_checks(&w_values);
    let passed = ratios.iter().all(|&r| r >= GRID_RATIO && r <= ratio_upper)
        && cumulative.iter().all(|c| c.holds);

    Ok(GridSchedule {
        kind: GridKind::Dyadic,
        levels: levels.into_iter().map(u64::from).collect(),
        certificate: GridCertificate {
            w_values,
            ratios,
            doubling_constant: Some(doubling),
            ratio_upper: Some(ratio_upper),
            cumulative,
            divergence_partial_sums: Vec::new(),
            next_level: next.map(u64::from),
            overflow,
            passed,
        },
    })
}

pub fn build_w_adapted_grid_strict(weight: &Weight, n0: u32, depth: usize) -> Result<GridSchedule> {
    let grid = build_w_adapted_grid(weight, n0, depth)?;
    match grid.certificate.overflow {
        Some(attempted) => Err(LabError::GridOverflow {
            attempted: attempted as u32,
            cap: DYADIC_CAP,
            achieved: grid.levels,
        }),
        None => Ok(grid),
    }
}

/// Smallest `m > from` with `w(1/m) >= target`; `w(1/m)` is non-decreasing in `m`,
/// so gallop then bisect.
fn search_reciprocal(weight: &Weight, from: u64, target: f64, limit: u64) -> Option<u64> {
    let ok = |m: u64| weight.log_inv_reciprocal(m) >= target;
    let mut lo = from;
    let mut step = 1u64;
    let mut hi = from + 1;
    while !ok(hi) {
        if hi >= limit {
            return None;
        }
        lo = hi;
        step = step.saturating_mul(2);
        hi = (from + step).min(limit);
    }
    // invariant: !ok(lo) or lo == from, ok(hi)
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if ok(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(hi)
}

/// The raw doubling sequence `m_0, m_1, ...` with `w(1/m_{k+1}) >= 2 w(1/m_k)`.
pub fn doubling_sequence(weight: &Weight, m0: u64, count: usize) -> Result<Vec<u64>> {
    let mut seq = vec![m0];
    while seq.len() < count {
        let last = *seq.last().unwrap();
        let target = 2.0 * weight.log_inv_reciprocal(last);
        match search_reciprocal(weight, last, target, UNIFORM_SEARCH_LIMIT) {
            Some(m) => seq.push(m),
            None => {
                return Err(LabError::SearchStall {
                    limit: UNIFORM_SEARCH_LIMIT,
                    achieved: seq,
                })
            }
        }
    }
    Ok(seq)
}

/// Uniform schedule: doubling search, then greedy thinning keeping
/// `n_{k+1} >= A n_k`. `count` is the number of thinned levels returned.
pub fn build_disdini_schedule(weight: &Weight, a: f64, m0: u64, count: usize) -> Result<GridSchedule> {
    if !(a >= 1.0) || !a.is_finite() {
        return Err(LabError::Precondition(format!("A = {a} must be >= 1")));
    }
    if m0 == 0 {
        return Err(LabError::Precondition("m0 must be positive".into()));
    }
    if count == 0 || count > MAX_SCHEDULE_COUNT {
        return Err(LabError::Precondition(format!(
            "count {count} outside 1..={MAX_SCHEDULE_COUNT}"
        )));
    }
    if weight.log_inv_reciprocal(m0) <= 0.0 {
        return Err(LabError::Precondition(format!("w(1/{m0}) = 0; doubling search cannot start")));
    }

    let mut levels = vec![m0];
    let mut current = m0;
    while levels.len() < count {
        let target = 2.0 * weight.log_inv_reciprocal(current);
        current = search_reciprocal(weight, current, target, UNIFORM_SEARCH_LIMIT).ok_or_else(|| {
            LabError::SearchStall {
                limit: UNIFORM_SEARCH_LIMIT,
                achieved: levels.clone(),
            }
        })?;
        if current as f64 >= a * *levels.last().unwrap() as f64 {
            levels.push(current);
        }
    }

    let w_values: Vec<f64> = levels.iter().map(|&n| weight.log_inv_reciprocal(n)).collect();
    let ratios = w_values.windows(2).map(|p| p[1] / p[0]).collect();
    let cumulative = cumulative_checks(&w_values);
    let mut acc = 0.0;
    let divergence_partial_sums = levels
        .windows(2)
        .zip(&w_values)
        .map(|(p, w)| {
            acc += w / p[1] as f64;
            acc
        })
        .collect();
    let thinned = levels.windows(2).all(|p| p[1] as f64 >= a * p[0] as f64);
    let passed = thinned && cumulative.iter().all(|c| c.holds);

    Ok(GridSchedule {
        kind: GridKind::Uniform,
        levels,
        certificate: GridCertificate {
            w_values,
            ratios,
            doubling_constant: None,
            ratio_upper: None,
            cumulative,
            divergence_partial_sums,
            next_level: None,
            overflow: None,
            passed,
        },
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoefficientSchedule {
    /// `(eps_0, ..., eps_N)`
    pub epsilons: Vec<f64>,
    pub c0: f64,
    /// `(w_1, ..., w_N)` with `w_k = w(1/n_k) / n_{k+1}`.
    pub w_values: Vec<f64>,
    #[serde(default)]
    pub degenerate: bool,
}

impl CoefficientSchedule {
    /// Coefficients from given `w_1 >= ... >= w_N` and `eps_0`.
    pub fn from_w_values(w_values: Vec<f64>, eps0: f64) -> Result<Self> {
        if !(eps0 > 0.0 && eps0 < 1.0) {
            return Err(LabError::Domain {
                value: eps0,
                domain: "(0, 1)",
            });
        }
        if w_values.is_empty() {
            return Err(LabError::ScheduleTooShort { needed: 1, have: 0 });
        }
        if let Some(bad) = w_values.iter().position(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(LabError::Precondition(format!(
                "w_{} = {} must be positive and finite",
                bad + 1,
                w_values[bad]
            )));
        }
        for (i, p) in w_values.windows(2).enumerate() {
            if p[0] < p[1] {
                return Err(LabError::NonMonotone {
                    index: i + 1,
                    lower: p[0],
                    upper: p[1],
                });
            }
        }
        let n = w_values.len();
        let c0 = (1.0 - eps0) / w_values[0];
        let mut epsilons = Vec::with_capacity(n + 1);
        epsilons.push(eps0);
        for k in 0..n - 1 {
            epsilons.push(c0 * (w_values[k] - w_values[k + 1]));
        }
        epsilons.push(c0 * w_values[n - 1]);
        let degenerate = n >= 2 && epsilons[1..n].iter().all(|&e| e == 0.0);
        Ok(CoefficientSchedule {
            epsilons,
            c0,
            w_values,
            degenerate,
        })
    }

    pub fn n(&self) -> usize {
        self.epsilons.len() - 1
    }

    pub fn total(&self) -> f64 {
        self.epsilons.iter().sum()
    }
}

/// `w_k = w(1/n_k) / n_{k+1}` for `k = 1..=N`; needs levels `n_0 ..= n_{N+1}`.
pub fn schedule_w_values(weight: &Weight, grid: &GridSchedule, n: usize) -> Result<Vec<f64>> {
    if grid.kind != GridKind::Uniform {
        return Err(LabError::Precondition("coefficient schedules need a uniform grid".into()));
    }
    if grid.len() < n + 2 {
        return Err(LabError::ScheduleTooShort {
            needed: n + 2,
            have: grid.len(),
        });
    }
    Ok((1..=n)
        .map(|k| weight.log_inv_reciprocal(grid.levels[k]) / grid.levels[k + 1] as f64)
        .collect())
}

pub fn build_epsilon_schedule(
    weight: &Weight,
    grid: &GridSchedule,
    eps0: f64,
    n: usize,
) -> Result<CoefficientSchedule> {
    if n == 0 {
        return Err(LabError::Precondition("N must be positive".into()));
    }
    CoefficientSchedule::from_w_values(schedule_w_values(weight, grid, n)?, eps0)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PrefixCheck {
    pub k: usize,
    /// `sum_{j<=k} n_j eps_j`
    pub lhs: f64,
    /// `c_0 w(1/n_k)`
    pub rhs: f64,
    pub ratio: f64,
    /// `c_0 w(1/n_{k+1})`
    pub rhs_next: f64,
    pub ratio_next: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TailCheck {
    pub k: usize,
    /// `sum_{k<j<=N} eps_j`
    pub tail: f64,
    /// `c_0 w_{k+1}` (zero for `k = N`): the telescoping value.
    pub telescoped: f64,
    pub identity_error: f64,
    /// `(c_0 / n_{k+1}) w(1/n_k)`
    pub bound: f64,
    pub bound_holds: bool,
    pub holds: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EpsilonReport {
    pub sum: f64,
    pub sum_passed: bool,
    pub prefix: Vec<PrefixCheck>,
    pub prefix_passed: bool,
    pub tail: Vec<TailCheck>,
    pub tail_passed: bool,
    pub passed: bool,
}

pub const SUM_TOL: f64 = 1e-12;

/// Checks the three coefficient properties. The prefix item passes when each
/// prefix sum is bounded by `c_0 w(1/n_{k+1})`; the ratio against `c_0 w(1/n_k)`
/// is reported alongside. The tail item passes on the telescoping identity
/// `sum_{j>k} eps_j = c_0 w_{k+1}`; the bound by `c_0 w_k` is reported per k.
pub fn verify_epsilon_schedule(
    sched: &CoefficientSchedule,
    grid: &GridSchedule,
    weight: &Weight,
) -> Result<EpsilonReport> {
    let n = sched.n();
    if grid.len() < n + 2 {
        return Err(LabError::ScheduleTooShort {
            needed: n + 2,
            have: grid.len(),
        });
    }
    let levels = &grid.levels;
    let w_at = |k: usize| grid.log_inv_at(weight, k);
    let c0 = sched.c0;

    let sum = sched.total();
    let sum_passed = (sum - 1.0).abs() <= SUM_TOL;

    let mut acc = 0.0;
    let prefix: Vec<PrefixCheck> = (0..=n)
        .map(|k| {
            acc += levels[k] as f64 * sched.epsilons[k];
            let rhs = c0 * w_at(k);
            let rhs_next = c0 * w_at(k + 1);
            PrefixCheck {
                k,
                lhs: acc,
                rhs,
                ratio: acc / rhs,
                rhs_next,
                ratio_next: acc / rhs_next,
            }
        })
        .collect();
    let prefix_passed = prefix.iter().all(|c| c.lhs <= c.rhs_next);

    let tail: Vec<TailCheck> = (0..=n)
        .map(|k| {
            let tail_sum: f64 = sched.epsilons[k + 1..].iter().sum();
            let telescoped = if k < n { c0 * sched.w_values[k] } else { 0.0 };
            let bound = c0 * w_at(k) / levels[k + 1] as f64;
            let identity_error = (tail_sum - telescoped).abs();
            TailCheck {
                k,
                tail: tail_sum,
                telescoped,
                identity_error,
                bound,
                bound_holds: tail_sum <= bound * (1.0 + SUM_TOL),
                holds: identity_error <= SUM_TOL,
            }
        })
        .collect();
    let tail_passed = tail.iter().all(|c| c.holds);

    Ok(EpsilonReport {
        sum,
        sum_passed,
        prefix,
        prefix_passed,
        tail,
        tail_passed,
        passed: sum_passed && prefix_passed && tail_passed,
    })
}
