//! Cantor-type compact sets described by their complementary arcs, and
//! partial sums of the `kappa_W`-entropy `sum_k kappa_W(l_k)`.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::measures::{Arc, CantorSpec};
use crate::weights::Weight;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Gap {
    pub arc: Arc,
    /// Construction stage that removed this arc; stage 0 is `[L_0, 1)`.
    pub stage: u32,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ComplementarySystem {
    gaps: Vec<Gap>,
    stages: u32,
    residual_length: f64,
}

#[derive(Serialize, Deserialize)]
struct SetFile {
    gaps: Vec<(f64, f64, u32)>,
    #[serde(default)]
    stages: u32,
    #[serde(default)]
    residual_length: f64,
}

impl Serialize for ComplementarySystem {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        SetFile {
            gaps: self
                .gaps
                .iter()
                .map(|g| (g.arc.start(), g.arc.length(), g.stage))
                .collect(),
            stages: self.stages,
            residual_length: self.residual_length,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for ComplementarySystem {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let file = SetFile::deserialize(d)?;
        let gaps = file
            .gaps
            .into_iter()
            .map(|(start, length, stage)| Arc::new(start, length).map(|arc| Gap { arc, stage }))
            .collect::<Result<Vec<_>>>()
            .map_err(serde::de::Error::custom)?;
        let stages = gaps.iter().map(|g| g.stage).max().unwrap_or(0).max(file.stages);
        let residual_length = if file.residual_length > 0.0 {
            file.residual_length
        } else {
            (1.0 - gaps.iter().map(|g| g.arc.length()).sum::<f64>()).max(0.0)
        };
        Ok(ComplementarySystem {
            gaps,
            stages,
            residual_length,
        })
    }
}

impl ComplementarySystem {
    pub fn gaps(&self) -> &[Gap] {
        &self.gaps
    }

    pub fn stages(&self) -> u32 {
        self.stages
    }

    /// Total length of the surviving stage intervals.
    pub fn residual_length(&self) -> f64 {
        self.residual_length
    }

    pub fn gap_length_total(&self) -> f64 {
        self.gaps.iter().map(|g| g.arc.length()).sum()
    }
}

/// Gaps removed by stages `1..=depth` (plus `[L_0, 1)` when `L_0 < 1`), laid out
/// exactly like the intervals of [`crate::measures::make_cantor_measure`].
pub fn make_cantor_set(spec: &CantorSpec, depth: u32) -> Result<ComplementarySystem> {
    let lengths = spec.lengths(depth)?;
    let mut gaps = Vec::new();
    if lengths[0] < 1.0 {
        gaps.push(Gap {
            arc: Arc::new(lengths[0], 1.0 - lengths[0])?,
            stage: 0,
        });
    }
    let mut starts = vec![0.0];
    for n in 1..=depth as usize {
        let (parent, child) = (lengths[n - 1], lengths[n]);
        let gap = parent - 2.0 * child;
        let mut next = Vec::with_capacity(starts.len() * 2);
        for &s in &starts {
            gaps.push(Gap {
                arc: Arc::new(s + child, gap)?,
                stage: n as u32,
            });
            next.push(s);
            next.push(s + parent - child);
        }
        starts = next;
    }
    let residual_length = starts.len() as f64 * lengths[depth as usize];
    Ok(ComplementarySystem {
        gaps,
        stages: depth,
        residual_length,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EntropySums {
    /// Cumulative entropy through stage `1, 2, ..., stages`; a stage-0 gap is
    /// counted from the first entry on.
    pub partial_sums: Vec<f64>,
    pub total: f64,
}

pub fn kappa_entropy(set: &ComplementarySystem, weight: &Weight) -> Result<EntropySums> {
    let stages = set.stages as usize;
    let mut per_stage = vec![0.0; stages + 1];
    for gap in &set.gaps {
        per_stage[gap.stage as usize] += weight.gauge(gap.arc.length())?;
    }
    let mut partial_sums = Vec::with_capacity(stages);
    let mut acc = per_stage[0];
    for contribution in &per_stage[1..] {
        acc += contribution;
        partial_sums.push(acc);
    }
    let total = partial_sums.last().copied().unwrap_or(per_stage[0]);
    Ok(EntropySums { partial_sums, total })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EntropyTrend {
    Converging,
    Diverging,
    Inconclusive,
}

const FLAT_TAIL: f64 = 1e-6;
const QUARTER_GROWTH: f64 = 0.05;
const RATIO_BOUND: f64 = 0.9;
const TAIL_BOUND: f64 = 0.05;

/// Finite-depth verdict on the entropy series.
///
/// Converging when the last quarter adds at most `1e-6` of the total, or when
/// the stage increments pass a ratio test over the last quarter (every ratio at
/// most 0.9, geometric tail bound at most 5% of the total). Diverging when each
/// quarter of the stages adds at least 5% of the running total.
pub fn entropy_trend(partial_sums: &[f64]) -> EntropyTrend {
    let n = partial_sums.len();
    if n < 8 {
        return EntropyTrend::Inconclusive;
    }
    let total = partial_sums[n - 1];
    let q = n * 3 / 4;
    if total - partial_sums[q - 1] <= FLAT_TAIL * total.abs() {
        return EntropyTrend::Converging;
    }

    let increments: Vec<f64> = std::iter::once(partial_sums[0])
        .chain(partial_sums.windows(2).map(|p| p[1] - p[0]))
        .collect();
    let tail = &increments[q..];
    let ratios_ok = tail
        .windows(2)
        .all(|p| p[0] > 0.0 && p[1] <= RATIO_BOUND * p[0]);
    if ratios_ok {
        let worst = tail.windows(2).map(|p| p[1] / p[0]).fold(0.0f64, f64::max);
        let bound = tail[tail.len() - 1] * worst / (1.0 - worst);
        if bound <= TAIL_BOUND * total {
            return EntropyTrend::Converging;
        }
    }

    let quarter = n / 4;
    let grows = (1..=4).all(|k| {
        let end = if k == 4 { n - 1 } else { k * quarter - 1 };
        let begin = (k - 1) * quarter;
        let before = if begin == 0 { 0.0 } else { partial_sums[begin - 1] };
        let running = partial_sums[end];
        running > 0.0 && running - before >= QUARTER_GROWTH * running
    });
    if grows {
        EntropyTrend::Diverging
    } else {
        EntropyTrend::Inconclusive
    }
}
