//! Measures on the normalized circle `[0, 1)`.
//!
//! Arcs are half-open, `[start, start + length)` taken mod 1: an atom sitting
//! on an arc's left endpoint belongs to the arc, one on the right endpoint does
//! not. With this convention the dyadic (or uniform) partitions of the circle
//! are true partitions of mass.

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

/// Wrap a real number into `[0, 1)`.
pub fn wrap_unit(theta: f64) -> f64 {
    let r = theta.rem_euclid(1.0);
    // rem_euclid can return exactly 1.0 for tiny negative inputs
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct Arc {
    start: f64,
    length: f64,
}

impl PartialEq for Arc {
    fn eq(&self, other: &Self) -> bool {
        self.start == other.start && self.length == other.length
    }
}

impl Arc {
    pub fn new(start: f64, length: f64) -> Result<Self> {
        if !(start.is_finite() && length > 0.0 && length <= 1.0) {
            return Err(LabError::InvalidMeasure(format!(
                "arc needs finite start and length in (0, 1], got start {start}, length {length}"
            )));
        }
        Ok(Arc {
            start: wrap_unit(start),
            length,
        })
    }

    pub fn full() -> Self {
        Arc {
            start: 0.0,
            length: 1.0,
        }
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    /// Unwrapped right endpoint, possibly beyond 1.
    pub fn end(&self) -> f64 {
        self.start + self.length
    }

    pub fn is_full(&self) -> bool {
        self.length >= 1.0
    }

    pub fn contains(&self, theta: f64) -> bool {
        if self.is_full() {
            return true;
        }
        let offset = wrap_unit(theta - self.start);
        offset < self.length
    }

    /// The (at most two) non-wrapping pieces `[a, b)` with `0 <= a < b <= 1`.
    pub fn pieces(&self) -> ([f64; 2], Option<[f64; 2]>) {
        if self.is_full() {
            return ([0.0, 1.0], None);
        }
        let end = self.end();
        if end <= 1.0 {
            ([self.start, end], None)
        } else {
            ([self.start, 1.0], Some([0.0, end - 1.0]))
        }
    }

    /// Dyadic arc `[j 2^-n, (j+1) 2^-n)`.
    pub fn dyadic(level: u32, index: u64) -> Self {
        let len = crate::weights::dyadic_length(level);
        Arc {
            start: index as f64 * len,
            length: len,
        }
    }
}

/// Anything that assigns a (signed) mass to arcs.
pub trait ArcMass {
    fn arc_mass(&self, arc: &Arc) -> f64;
    fn total_mass(&self) -> f64;
}

pub fn arc_mass<M: ArcMass + ?Sized>(measure: &M, arc: &Arc) -> f64 {
    measure.arc_mass(arc)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub position: f64,
    pub mass: f64,
}

/// Finite positive atomic measure with strictly increasing positions.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct AtomicMeasure {
    atoms: Vec<Atom>,
    // cum[i] = mass of atoms[..i]
    cum: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct AtomicMeasureFile {
    atoms: Vec<[f64; 2]>,
}

impl Serialize for AtomicMeasure {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        AtomicMeasureFile {
            atoms: self.atoms.iter().map(|a| [a.position, a.mass]).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for AtomicMeasure {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let file = AtomicMeasureFile::deserialize(d)?;
        AtomicMeasure::new(file.atoms.into_iter().map(|[p, m]| (p, m)).collect())
            .map_err(serde::de::Error::custom)
    }
}

impl AtomicMeasure {
    /// Build from `(position, mass)` pairs. Positions are wrapped into `[0, 1)`
    /// and coincident atoms are merged.
    pub fn new(pairs: Vec<(f64, f64)>) -> Result<Self> {
        let mut atoms = Vec::with_capacity(pairs.len());
        for (position, mass) in pairs {
            if !(position.is_finite() && mass.is_finite() && mass > 0.0) {
                return Err(LabError::InvalidMeasure(format!(
                    "atom ({position}, {mass}) needs a finite position and a positive finite mass"
                )));
            }
            atoms.push(Atom {
                position: wrap_unit(position),
                mass,
            });
        }
        atoms.sort_by(|a, b| a.position.total_cmp(&b.position));
        let mut merged: Vec<Atom> = Vec::with_capacity(atoms.len());
        for atom in atoms {
            match merged.last_mut() {
                Some(last) if last.position == atom.position => last.mass += atom.mass,
                _ => merged.push(atom),
            }
        }
        Ok(Self::from_sorted(merged))
    }

    pub fn empty() -> Self {
        Self::from_sorted(Vec::new())
    }

    pub fn dirac(position: f64, mass: f64) -> Result<Self> {
        Self::new(vec![(position, mass)])
    }

    /// Atoms already sorted with unique positions in `[0, 1)`; zero masses dropped.
    pub(crate) fn from_sorted(atoms: Vec<Atom>) -> Self {
        let atoms: Vec<Atom> = atoms.into_iter().filter(|a| a.mass > 0.0).collect();
        debug_assert!(atoms.windows(2).all(|p| p[0].position < p[1].position));
        let mut cum = Vec::with_capacity(atoms.len() + 1);
        let mut acc = 0.0;
        cum.push(0.0);
        for a in &atoms {
            acc += a.mass;
            cum.push(acc);
        }
        AtomicMeasure { atoms, cum }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// Mass of the atoms with position in `[a, b)`, `0 <= a <= b <= 1`.
    fn range_mass(&self, a: f64, b: f64) -> f64 {
        let lo = self.atoms.partition_point(|x| x.position < a);
        let hi = self.atoms.partition_point(|x| x.position < b);
        self.cum[hi] - self.cum[lo]
    }

    /// Mass sitting exactly at `theta`.
    pub fn atom_at(&self, theta: f64) -> f64 {
        let theta = wrap_unit(theta);
        match self.atoms.binary_search_by(|a| a.position.total_cmp(&theta)) {
            Ok(i) => self.atoms[i].mass,
            Err(_) => 0.0,
        }
    }

    pub fn restrict(&self, arc: &Arc) -> AtomicMeasure {
        Self::from_sorted(self.atoms.iter().copied().filter(|a| arc.contains(a.position)).collect())
    }

    pub fn scaled(&self, factor: f64) -> AtomicMeasure {
        Self::from_sorted(
            self.atoms
                .iter()
                .map(|a| Atom {
                    position: a.position,
                    mass: a.mass * factor,
                })
                .collect(),
        )
    }

    /// Sum of two atomic measures.
    pub fn plus(&self, other: &AtomicMeasure) -> AtomicMeasure {
        let mut out = Vec::with_capacity(self.len() + other.len());
        let (mut i, mut j) = (0, 0);
        while i < self.atoms.len() || j < other.atoms.len() {
            let take_left = match (self.atoms.get(i), other.atoms.get(j)) {
                (Some(a), Some(b)) if a.position == b.position => {
                    out.push(Atom {
                        position: a.position,
                        mass: a.mass + b.mass,
                    });
                    i += 1;
                    j += 1;
                    continue;
                }
                (Some(a), Some(b)) => a.position < b.position,
                (Some(_), None) => true,
                _ => false,
            };
            if take_left {
                out.push(self.atoms[i]);
                i += 1;
            } else {
                out.push(other.atoms[j]);
                j += 1;
            }
        }
        Self::from_sorted(out)
    }
}

impl ArcMass for AtomicMeasure {
    fn arc_mass(&self, arc: &Arc) -> f64 {
        let (first, second) = arc.pieces();
        let mut m = self.range_mass(first[0], first[1]);
        if let Some([a, b]) = second {
            m += self.range_mass(a, b);
        }
        m
    }

    fn total_mass(&self) -> f64 {
        *self.cum.last().unwrap_or(&0.0)
    }
}

/// Step density against normalized arclength. Cell `i` is
/// `[breakpoints[i], breakpoints[i+1])` with the last cell ending at 1.
#[derive(Clone, Debug, PartialEq)]
pub struct PiecewiseConstantDensity {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
    // cum[i] = integral over [0, breakpoints[i])
    cum: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct DensityBody {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct DensityFile {
    density: DensityBody,
}

impl Serialize for PiecewiseConstantDensity {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        DensityFile {
            density: DensityBody {
                breakpoints: self.breakpoints.clone(),
                values: self.values.clone(),
            },
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for PiecewiseConstantDensity {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let file = DensityFile::deserialize(d)?;
        PiecewiseConstantDensity::new(file.density.breakpoints, file.density.values)
            .map_err(serde::de::Error::custom)
    }
}

impl PiecewiseConstantDensity {
    pub fn new(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let bad = |msg: String| Err(LabError::InvalidMeasure(msg));
        if breakpoints.is_empty() || breakpoints.len() != values.len() {
            return bad(format!(
                "density needs matching non-empty breakpoints/values, got {} and {}",
                breakpoints.len(),
                values.len()
            ));
        }
        if breakpoints[0] != 0.0 {
            return bad("first breakpoint must be 0".into());
        }
        if !breakpoints.windows(2).all(|p| p[0] < p[1]) || *breakpoints.last().unwrap() >= 1.0 {
            return bad("breakpoints must be strictly increasing in [0, 1)".into());
        }
        if !values.iter().all(|v| v.is_finite() && *v >= 0.0) {
            return bad("density values must be finite and non-negative".into());
        }
        Ok(Self::from_parts(breakpoints, values))
    }

    fn from_parts(breakpoints: Vec<f64>, values: Vec<f64>) -> Self {
        let mut cum = Vec::with_capacity(breakpoints.len() + 1);
        let mut acc = 0.0;
        cum.push(0.0);
        for i in 0..breakpoints.len() {
            let end = breakpoints.get(i + 1).copied().unwrap_or(1.0);
            acc += values[i] * (end - breakpoints[i]);
            cum.push(acc);
        }
        PiecewiseConstantDensity {
            breakpoints,
            values,
            cum,
        }
    }

    pub fn constant(value: f64) -> Result<Self> {
        Self::new(vec![0.0], vec![value])
    }

    pub fn zero() -> Self {
        Self::from_parts(vec![0.0], vec![0.0])
    }

    /// Sparse construction from disjoint, non-wrapping cells `(start, end, value)`;
    /// the uncovered rest of the circle gets density 0.
    pub fn from_cells(mut cells: Vec<(f64, f64, f64)>) -> Result<Self> {
        cells.retain(|c| c.2 != 0.0);
        cells.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut breakpoints = Vec::with_capacity(2 * cells.len() + 1);
        let mut values = Vec::with_capacity(2 * cells.len() + 1);
        let mut cursor = 0.0;
        for &(start, end, value) in &cells {
            if !(start >= cursor && end > start && end <= 1.0) {
                return Err(LabError::InvalidMeasure(format!(
                    "cell [{start}, {end}) overlaps its neighbour or leaves [0, 1)"
                )));
            }
            if !(value.is_finite() && value >= 0.0) {
                return Err(LabError::InvalidMeasure(format!("cell value {value} invalid")));
            }
            if start > cursor {
                breakpoints.push(cursor);
                values.push(0.0);
            }
            breakpoints.push(start);
            values.push(value);
            cursor = end;
        }
        if cursor < 1.0 {
            breakpoints.push(cursor);
            values.push(0.0);
        }
        if breakpoints.is_empty() {
            return Ok(Self::zero());
        }
        Ok(Self::from_parts(breakpoints, values))
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Cells as `(start, end, value)`.
    pub fn cells(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        (0..self.breakpoints.len()).map(move |i| {
            let end = self.breakpoints.get(i + 1).copied().unwrap_or(1.0);
            (self.breakpoints[i], end, self.values[i])
        })
    }

    /// Cells with non-zero value.
    pub fn support_cells(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.cells().filter(|c| c.2 != 0.0)
    }

    pub fn value_at(&self, theta: f64) -> f64 {
        let theta = wrap_unit(theta);
        let i = self.breakpoints.partition_point(|&b| b <= theta) - 1;
        self.values[i]
    }

    /// `int_0^theta density`, `0 <= theta <= 1`.
    pub fn cumulative(&self, theta: f64) -> f64 {
        if theta >= 1.0 {
            return *self.cum.last().unwrap();
        }
        let i = self.breakpoints.partition_point(|&b| b <= theta).max(1) - 1;
        self.cum[i] + self.values[i] * (theta - self.breakpoints[i])
    }

    pub fn integral(&self) -> f64 {
        *self.cum.last().unwrap()
    }
}

impl ArcMass for PiecewiseConstantDensity {
    fn arc_mass(&self, arc: &Arc) -> f64 {
        let (first, second) = arc.pieces();
        let mut m = self.cumulative(first[1]) - self.cumulative(first[0]);
        if let Some([a, b]) = second {
            m += self.cumulative(b) - self.cumulative(a);
        }
        m
    }

    fn total_mass(&self) -> f64 {
        self.integral()
    }
}

/// `density dm + atomic_scale * atomic`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HybridSignedMeasure {
    pub density: PiecewiseConstantDensity,
    pub atomic: AtomicMeasure,
    pub atomic_scale: f64,
}

impl HybridSignedMeasure {
    pub fn new(density: PiecewiseConstantDensity, atomic: AtomicMeasure, atomic_scale: f64) -> Self {
        HybridSignedMeasure {
            density,
            atomic,
            atomic_scale,
        }
    }

    /// `density dm - atomic`, the balanced objects built level by level.
    pub fn balanced(density: PiecewiseConstantDensity, atomic: AtomicMeasure) -> Self {
        Self::new(density, atomic, -1.0)
    }

    pub fn zero() -> Self {
        Self::new(PiecewiseConstantDensity::zero(), AtomicMeasure::empty(), 1.0)
    }
}

impl ArcMass for HybridSignedMeasure {
    fn arc_mass(&self, arc: &Arc) -> f64 {
        self.density.arc_mass(arc) + self.atomic_scale * self.atomic.arc_mass(arc)
    }

    fn total_mass(&self) -> f64 {
        self.density.integral() + self.atomic_scale * self.atomic.total_mass()
    }
}

/// Split off at most `cap` of the mass `measure` puts on `arc`.
///
/// A light arc (mass at most `cap`) is extracted entirely; on a heavy arc every
/// atom inside is scaled by `cap / measure(arc)`.
pub fn extract_fraction(measure: &AtomicMeasure, arc: &Arc, cap: f64) -> (AtomicMeasure, AtomicMeasure) {
    let inside = measure.arc_mass(arc);
    let factor = if inside <= cap { 1.0 } else { cap / inside };
    let mut extracted = Vec::new();
    let mut remainder = Vec::with_capacity(measure.len());
    for atom in measure.atoms() {
        if arc.contains(atom.position) {
            let taken = atom.mass * factor;
            extracted.push(Atom {
                position: atom.position,
                mass: taken,
            });
            remainder.push(Atom {
                position: atom.position,
                mass: atom.mass - taken,
            });
        } else {
            remainder.push(*atom);
        }
    }
    extracted.sort_by(|a, b| a.position.total_cmp(&b.position));
    (AtomicMeasure::from_sorted(extracted), AtomicMeasure::from_sorted(remainder))
}

/// Stage lengths `L_n` of a symmetric Cantor-type construction: each stage
/// interval of length `L_{n-1}` keeps two children of length `L_n` flush with
/// its endpoints.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CantorSpec {
    /// `L_n = 3^-n`.
    MiddleThird,
    /// `L_n = 2^-n / (n + 1)`.
    EntropyDivergent,
    /// `L_n = ratio^n`, `ratio < 1/2`.
    Geometric { ratio: f64 },
    /// Explicit `L_0, L_1, ...`.
    Lengths { lengths: Vec<f64> },
}

pub const MAX_CANTOR_DEPTH: u32 = 30;

impl CantorSpec {
    pub fn stage_length(&self, n: u32) -> Option<f64> {
        match self {
            CantorSpec::MiddleThird => Some(3f64.powi(-(n as i32))),
            CantorSpec::EntropyDivergent => Some(crate::weights::dyadic_length(n) / (n as f64 + 1.0)),
            CantorSpec::Geometric { ratio } => Some(ratio.powi(n as i32)),
            CantorSpec::Lengths { lengths } => lengths.get(n as usize).copied(),
        }
    }

    /// `L_0 ..= L_depth`, validated.
    pub fn lengths(&self, depth: u32) -> Result<Vec<f64>> {
        if depth > MAX_CANTOR_DEPTH {
            return Err(LabError::InvalidCantorSpec(format!(
                "depth {depth} exceeds {MAX_CANTOR_DEPTH}"
            )));
        }
        let mut out = Vec::with_capacity(depth as usize + 1);
        for n in 0..=depth {
            let len = self.stage_length(n).ok_or_else(|| {
                LabError::InvalidCantorSpec(format!("no stage length given for stage {n}"))
            })?;
            if !(len > 0.0 && len.is_finite()) {
                return Err(LabError::InvalidCantorSpec(format!("L_{n} = {len} must be positive")));
            }
            if n == 0 && len > 1.0 {
                return Err(LabError::InvalidCantorSpec(format!("L_0 = {len} exceeds 1")));
            }
            if let Some(&prev) = out.last() {
                if 2.0 * len >= prev {
                    return Err(LabError::InvalidCantorSpec(format!(
                        "2 L_{n} = {} is not below L_{} = {prev}",
                        2.0 * len,
                        n - 1
                    )));
                }
            }
            out.push(len);
        }
        Ok(out)
    }

    /// Left endpoints of the `2^depth` stage-`depth` intervals, in increasing order.
    pub fn interval_starts(&self, depth: u32) -> Result<Vec<f64>> {
        let lengths = self.lengths(depth)?;
        let mut starts = vec![0.0];
        for n in 1..=depth as usize {
            let shift = lengths[n - 1] - lengths[n];
            starts = starts.iter().flat_map(|&s| [s, s + shift]).collect();
        }
        Ok(starts)
    }
}

/// Equal-mass atoms at the midpoints of the stage-`depth` construction intervals.
pub fn make_cantor_measure(spec: &CantorSpec, depth: u32, total_mass: f64) -> Result<AtomicMeasure> {
    if !(total_mass > 0.0 && total_mass.is_finite()) {
        return Err(LabError::InvalidMeasure(format!("total mass {total_mass} must be positive")));
    }
    let lengths = spec.lengths(depth)?;
    let half = lengths[depth as usize] / 2.0;
    let each = total_mass * crate::weights::dyadic_length(depth);
    let atoms = spec
        .interval_starts(depth)?
        .into_iter()
        .map(|s| Atom {
            position: s + half,
            mass: each,
        })
        .collect();
    Ok(AtomicMeasure::from_sorted(atoms))
}

/// `max |nu(J)|` over arcs `J` with `|J| <= max_length`, by exhaustive search.
///
/// The arc mass is piecewise linear in the endpoints between density
/// breakpoints and atoms, so the extremum is attained with both endpoints at
/// such candidates, or one candidate endpoint and length exactly `max_length`.
/// At an atom both one-sided limits are evaluated.
pub fn sup_arc_mass(signed: &HybridSignedMeasure, max_length: f64) -> f64 {
    let atoms: Vec<(f64, f64)> = signed
        .atomic
        .atoms()
        .iter()
        .map(|a| (a.position, signed.atomic_scale * a.mass))
        .collect();
    sup_arc_mass_parts(&signed.density, &atoms, max_length)
}

/// Signed point masses, sorted by position, with prefix sums.
struct SignedAtoms<'a> {
    atoms: &'a [(f64, f64)],
    cum: Vec<f64>,
}

impl<'a> SignedAtoms<'a> {
    fn new(atoms: &'a [(f64, f64)]) -> Self {
        let mut cum = Vec::with_capacity(atoms.len() + 1);
        let mut acc = 0.0;
        cum.push(0.0);
        for a in atoms {
            acc += a.1;
            cum.push(acc);
        }
        SignedAtoms { atoms, cum }
    }

    fn at(&self, theta: f64) -> f64 {
        match self.atoms.binary_search_by(|a| a.0.total_cmp(&theta)) {
            Ok(i) => self.atoms[i].1,
            Err(_) => 0.0,
        }
    }

    fn range(&self, a: f64, b: f64) -> f64 {
        let lo = self.atoms.partition_point(|x| x.0 < a);
        let hi = self.atoms.partition_point(|x| x.0 < b);
        self.cum[hi] - self.cum[lo]
    }

    fn arc(&self, arc: &Arc) -> f64 {
        let (first, second) = arc.pieces();
        let mut m = self.range(first[0], first[1]);
        if let Some([a, b]) = second {
            m += self.range(a, b);
        }
        m
    }
}

/// Exhaustive arc supremum for `density dm + sum_j s_j delta_{theta_j}` with
/// arbitrary signs `s_j`; `atoms` sorted by position in `[0, 1)`.
pub(crate) fn sup_arc_mass_parts(
    density: &PiecewiseConstantDensity,
    atoms: &[(f64, f64)],
    max_length: f64,
) -> f64 {
    let max_length = max_length.min(1.0);
    if max_length <= 0.0 {
        return 0.0;
    }
    let signed = SignedAtoms::new(atoms);
    let mut points: Vec<f64> = density
        .breakpoints()
        .iter()
        .copied()
        .chain(atoms.iter().map(|a| a.0))
        .collect();
    points.sort_by(f64::total_cmp);
    points.dedup();
    let m = points.len();
    let point_mass: Vec<f64> = points.iter().map(|&p| signed.at(p)).collect();
    // density mass from points[i] to the next point, wrapping past 1
    let gap_mass: Vec<f64> = (0..m)
        .map(|i| {
            let a = points[i];
            if i + 1 < m {
                density.cumulative(points[i + 1]) - density.cumulative(a)
            } else {
                density.integral() - density.cumulative(a) + density.cumulative(points[0])
            }
        })
        .collect();

    let mut best = point_mass.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    let eval = |best: &mut f64, base: f64, left_atom: f64, right_atom: f64| {
        for v in [base, base - left_atom, base + right_atom, base - left_atom + right_atom] {
            *best = best.max(v.abs());
        }
    };

    for i in 0..m {
        let mut acc = 0.0;
        for s in 1..=m {
            let prev = (i + s - 1) % m;
            acc += point_mass[prev] + gap_mass[prev];
            let j = (i + s) % m;
            let mut len = points[j] - points[i];
            if s == m || len <= 0.0 {
                len += 1.0;
            }
            if len > max_length {
                break;
            }
            // the full circle has no separate right endpoint
            let right = if s == m { 0.0 } else { point_mass[j] };
            eval(&mut best, acc, point_mass[i], right);
        }
    }

    if max_length < 1.0 {
        for &p in &points {
            for start in [p, wrap_unit(p - max_length)] {
                let arc = Arc {
                    start,
                    length: max_length,
                };
                let base = density.arc_mass(&arc) + signed.arc(&arc);
                eval(&mut best, base, signed.at(start), signed.at(wrap_unit(start + max_length)));
            }
        }
    }
    best
}
