//! Roberts-type decomposition of an atomic measure against a dyadic grid:
//! at level `n_k` every dyadic arc gives up at most `eta kappa_W(2^-n_k)` of the
//! running remainder.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::measures::{ArcMass, Atom, AtomicMeasure, HybridSignedMeasure, PiecewiseConstantDensity};
use crate::schedules::{GridKind, GridSchedule};
use crate::weights::{dyadic_length, Weight};

/// Relative slack for "the cap binds" when classifying an arc as heavy.
pub const HEAVY_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArcExtraction {
    /// Dyadic index `j`: the arc `[j 2^-n, (j+1) 2^-n)`.
    pub index: u64,
    pub mass: f64,
    pub heavy: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RobertsLevel {
    pub level: u32,
    pub cap: f64,
    pub piece: AtomicMeasure,
    /// Charged arcs at this level, in increasing index order.
    pub arcs: Vec<ArcExtraction>,
    /// Number of non-heavy arcs of this level meeting the previous level's heavy set
    /// (the whole circle before the first level).
    pub light_count: u64,
    /// False when the remainder was already exhausted before this level.
    pub processed: bool,
}

impl RobertsLevel {
    pub fn heavy_count(&self) -> u64 {
        self.arcs.iter().filter(|a| a.heavy).count() as u64
    }

    pub fn heavy_arcs(&self) -> impl Iterator<Item = u64> + '_ {
        self.arcs.iter().filter(|a| a.heavy).map(|a| a.index)
    }

    pub fn arc_length(&self) -> f64 {
        dyadic_length(self.level)
    }

    pub fn mass(&self) -> f64 {
        self.piece.total_mass()
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RobertsDecomposition {
    pub eta: f64,
    pub grid: GridSchedule,
    pub pieces: Vec<RobertsLevel>,
    pub residual: AtomicMeasure,
    pub total_mass: f64,
    /// Number of levels actually processed.
    pub truncation_depth: usize,
}

impl RobertsDecomposition {
    pub fn extracted_mass(&self) -> f64 {
        self.pieces.iter().map(|p| p.mass()).sum()
    }

    pub fn residual_mass(&self) -> f64 {
        self.residual.total_mass()
    }

    pub fn residual_fraction(&self) -> f64 {
        if self.total_mass > 0.0 {
            self.residual_mass() / self.total_mass
        } else {
            0.0
        }
    }

    /// The `nu_k = f_k dm - mu_k` of level `k`.
    pub fn level_signed(&self, k: usize) -> Result<HybridSignedMeasure> {
        let density = build_level_density(self, k)?;
        Ok(HybridSignedMeasure::balanced(density, self.pieces[k].piece.clone()))
    }
}

/// Group sorted atoms by dyadic index at level `n`; returns `(index, range)`.
fn dyadic_groups(atoms: &[Atom], n: u32) -> Vec<(u64, std::ops::Range<usize>)> {
    let scale = (n as f64).exp2();
    let mut groups: Vec<(u64, std::ops::Range<usize>)> = Vec::new();
    for (i, atom) in atoms.iter().enumerate() {
        let j = (atom.position * scale).floor() as u64;
        match groups.last_mut() {
            Some((idx, range)) if *idx == j => range.end = i + 1,
            _ => groups.push((j, i..i + 1)),
        }
    }
    groups
}

pub fn decompose(mu: &AtomicMeasure, weight: &Weight, grid: &GridSchedule, eta: f64) -> Result<RobertsDecomposition> {
    if grid.kind != GridKind::Dyadic {
        return Err(LabError::Precondition("the decomposition needs a dyadic grid".into()));
    }
    if grid.is_empty() {
        return Err(LabError::Precondition("grid has no levels".into()));
    }
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(LabError::Domain {
            value: eta,
            domain: "(0, inf)",
        });
    }

    let total_mass = mu.total_mass();
    let mut remainder = mu.clone();
    let mut pieces = Vec::with_capacity(grid.len());
    let mut previous_heavy: Option<(u32, u64)> = None;
    let mut truncation_depth = 0;

    for &level in &grid.levels {
        let n = level as u32;
        let cap = eta * weight.gauge_dyadic(n);
        if remainder.is_empty() {
            pieces.push(RobertsLevel {
                level: n,
                cap,
                piece: AtomicMeasure::empty(),
                arcs: Vec::new(),
                light_count: 0,
                processed: false,
            });
            continue;
        }
        truncation_depth += 1;

        let atoms = remainder.atoms();
        let groups = dyadic_groups(atoms, n);
        let split: Vec<(ArcExtraction, Vec<Atom>, Vec<Atom>)> = groups
            .par_iter()
            .map(|(index, range)| {
                let inside = &atoms[range.clone()];
                let mass: f64 = inside.iter().map(|a| a.mass).sum();
                let factor = if mass <= cap { 1.0 } else { cap / mass };
                let mut taken = Vec::with_capacity(inside.len());
                let mut kept = Vec::with_capacity(inside.len());
                for a in inside {
                    let t = a.mass * factor;
                    taken.push(Atom { position: a.position, mass: t });
                    kept.push(Atom { position: a.position, mass: a.mass - t });
                }
                let extracted: f64 = taken.iter().map(|a| a.mass).sum();
                let heavy = mass > 0.0 && (extracted - cap).abs() <= HEAVY_TOL * cap;
                (ArcExtraction { index: *index, mass: extracted, heavy }, taken, kept)
            })
            .collect();

        let mut arcs = Vec::with_capacity(split.len());
        let mut taken_all = Vec::with_capacity(atoms.len());
        let mut kept_all = Vec::with_capacity(atoms.len());
        for (arc, taken, kept) in split {
            arcs.push(arc);
            taken_all.extend(taken);
            kept_all.extend(kept);
        }
        let heavy_now = arcs.iter().filter(|a| a.heavy).count() as u64;
        let candidates = match previous_heavy {
            None => 1u64 << n,
            Some((prev_level, prev_count)) => prev_count << (n - prev_level),
        };
        previous_heavy = Some((n, heavy_now));

        pieces.push(RobertsLevel {
            level: n,
            cap,
            piece: AtomicMeasure::from_sorted(taken_all),
            arcs,
            light_count: candidates - heavy_now,
            processed: true,
        });
        remainder = AtomicMeasure::from_sorted(kept_all);
    }

    Ok(RobertsDecomposition {
        eta,
        grid: grid.clone(),
        pieces,
        residual: remainder,
        total_mass,
        truncation_depth,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ResidualEntropyReport {
    /// `sum_k |L_k| kappa_W(2^-n_k)`
    pub light_sum: f64,
    /// `|mu| / eta`
    pub comparison: f64,
    pub holds: bool,
    pub per_level: Vec<f64>,
    /// `|H_k|`, total length of the heavy arcs per processed level.
    pub heavy_lengths: Vec<f64>,
    pub truncation_depth: usize,
}

pub fn residual_support_entropy(dec: &RobertsDecomposition, weight: &Weight) -> ResidualEntropyReport {
    let processed = dec.pieces.iter().filter(|p| p.processed);
    let per_level: Vec<f64> = processed
        .clone()
        .map(|p| p.light_count as f64 * weight.gauge_dyadic(p.level))
        .collect();
    let heavy_lengths = processed.map(|p| p.heavy_count() as f64 * p.arc_length()).collect();
    let light_sum = per_level.iter().sum::<f64>();
    let comparison = dec.total_mass / dec.eta;
    ResidualEntropyReport {
        light_sum,
        comparison,
        holds: light_sum <= comparison,
        per_level,
        heavy_lengths,
        truncation_depth: dec.truncation_depth,
    }
}

/// `f_k = sum_I mu_k(I)/|I| 1_I` over the charged arcs of level `k`.
pub fn build_level_density(dec: &RobertsDecomposition, k: usize) -> Result<PiecewiseConstantDensity> {
    let level = dec.pieces.get(k).ok_or(LabError::Index {
        index: k,
        len: dec.pieces.len(),
    })?;
    let len = level.arc_length();
    let scale = (level.level as f64).exp2();
    let cells = level
        .arcs
        .iter()
        .filter(|a| a.mass > 0.0)
        .map(|a| (a.index as f64 * len, (a.index + 1) as f64 * len, a.mass * scale))
        .collect();
    PiecewiseConstantDensity::from_cells(cells)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LevelSummary {
    pub level: u32,
    pub cap: f64,
    pub extracted: f64,
    pub heavy: u64,
}

pub fn level_summaries(dec: &RobertsDecomposition) -> Vec<LevelSummary> {
    dec.pieces
        .iter()
        .map(|p| LevelSummary {
            level: p.level,
            cap: p.cap,
            extracted: p.mass(),
            heavy: p.heavy_count(),
        })
        .collect()
}

pub fn write_summary_csv<W: std::io::Write>(dec: &RobertsDecomposition, out: W) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    for row in level_summaries(dec) {
        writer.serialize(row)?;
    }
    writer.flush()?;
    Ok(())
}
