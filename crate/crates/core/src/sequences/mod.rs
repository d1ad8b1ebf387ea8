//! Separated real sequences: generation, indexing, gaps and serialization.
//!
//! Two-sided families are indexed by `n ∈ ℤ∖{0}`; index 0 is skipped so that
//! families defined through `|n|` never place a point at `n = 0`.

mod classify;
mod regularity;

pub use classify::{
    classify, decompose_clusters, detect_counterexample, ClassifyConfig, ClusterDecomposition,
    CounterexampleMatch, Orientation, Regime, RegimeVerdict,
};
pub use regularity::{
    regularity_functional, regularity_functional_runs, regular_punctured_runs, PointRuns,
    RegularityReport, Run,
};

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fmt;

/// Inclusive range of sequence indices (or, for `regular_punctured`, of natural numbers).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexWindow {
    pub lo: i64,
    pub hi: i64,
}

impl IndexWindow {
    pub fn new(lo: i64, hi: i64) -> Self {
        Self { lo, hi }
    }

    /// Symmetric window `|n| ≤ m`.
    pub fn symmetric(m: i64) -> Self {
        Self { lo: -m, hi: m }
    }
}

impl fmt::Display for IndexWindow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.lo, self.hi)
    }
}

/// How list positions map to sequence indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Indexing {
    /// `n = position + offset`, all indices positive.
    OneSided,
    /// `n = position + offset`, skipping `n = 0`.
    TwoSided,
    /// `n = position + offset`, any integer (external data).
    Positional,
}

/// Generator families.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum Family {
    /// `a_n = n`.
    Arithmetic,
    /// `a_n = sgn(n)|n|^k`.
    Power { k: f64 },
    /// `a_n = sgn(n) r^|n|`.
    Geometric { r: f64 },
    /// `a_n = sgn(n) exp(exp|n|)`.
    DoubleExponential,
    /// `a_1 = a1`, `a_{n+1} = a_n + c ln a_n`.
    LogGap { a1: f64, c: f64 },
    /// `t_1`, `t_2 = t_1 + N D`, then unit steps of `D` up to `N` points.
    ClusterGap { t1: f64, n: usize, d: f64 },
    /// `ℕ ∖ A` with `A = {2^{3^k} + m : 1 ≤ m ≤ k}`; the window ranges over values.
    RegularPunctured,
}

impl Family {
    fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Parameter(m.to_string()));
        match *self {
            Family::Power { k } if !(k > 0.0 && k.is_finite()) => bad("power family needs k > 0"),
            Family::Geometric { r } if !(r > 1.0 && r.is_finite()) => bad("geometric family needs r > 1"),
            Family::LogGap { a1, c } => {
                if !(c > 0.0 && c.is_finite()) {
                    bad("log_gap family needs c > 0")
                } else if !(a1 > 1.0 && a1.is_finite()) {
                    bad("log_gap family needs a1 > 1 so that ln a_n > 0")
                } else {
                    Ok(())
                }
            }
            Family::ClusterGap { n, d, t1 } => {
                if n < 2 {
                    bad("cluster_gap family needs N >= 2")
                } else if !(d > 0.0 && d.is_finite()) {
                    bad("cluster_gap family needs D > 0")
                } else if !t1.is_finite() {
                    bad("cluster_gap family needs a finite t1")
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }

    /// True for the families defined through `|n|` with odd symmetry.
    fn is_symmetric(&self) -> bool {
        matches!(self, Family::Power { .. } | Family::Geometric { .. } | Family::DoubleExponential)
    }

    /// Point for a real positive index; `None` when the family has no closed form.
    pub(crate) fn continuous_point(&self, x: f64) -> Option<f64> {
        match *self {
            Family::Arithmetic => Some(x),
            Family::Power { k } => Some(x.powf(k)),
            Family::Geometric { r } => Some(r.powf(x)),
            Family::DoubleExponential => Some(x.exp().exp()),
            _ => None,
        }
    }

    /// Closed-form lower bound on consecutive gaps inside `window`.
    pub fn analytic_separation(&self, window: IndexWindow) -> Option<f64> {
        let two_sided = window.lo < 0 && window.hi > 0;
        let m = if two_sided { 1 } else { window.lo.abs().min(window.hi.abs()).max(1) };
        let big = window.lo.abs().max(window.hi.abs()).max(1);
        let m = m as f64;
        match *self {
            Family::Arithmetic => Some(1.0),
            Family::Power { k } => {
                let side = if k >= 1.0 {
                    (m + 1.0).powf(k) - m.powf(k)
                } else {
                    let b = big as f64;
                    b.powf(k) - (b - 1.0).powf(k)
                };
                Some(if two_sided { side.min(2.0) } else { side })
            }
            Family::Geometric { r } => {
                let side = r.powf(m) * (r - 1.0);
                Some(if two_sided { side.min(2.0 * r) } else { side })
            }
            Family::DoubleExponential => {
                let side = (m + 1.0).exp().exp() - m.exp().exp();
                Some(if two_sided { side.min(2.0 * 1f64.exp().exp()) } else { side })
            }
            Family::LogGap { a1, c } => Some(c * a1.ln()),
            Family::ClusterGap { d, .. } => Some(d),
            Family::RegularPunctured => Some(1.0),
        }
    }
}

/// Where a sequence came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Provenance {
    Generated { family: Family, window: IndexWindow },
    External,
}

impl Provenance {
    pub fn family(&self) -> Option<(&Family, IndexWindow)> {
        match self {
            Provenance::Generated { family, window } => Some((family, *window)),
            Provenance::External => None,
        }
    }
}

/// Sorted, separated list of real points with an index map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SequenceRepr")]
pub struct SeparatedSequence {
    points: Vec<f64>,
    index_offset: i64,
    separation: f64,
    provenance: Provenance,
    indexing: Indexing,
}

#[derive(Deserialize)]
struct SequenceRepr {
    points: Vec<f64>,
    index_offset: i64,
    separation: f64,
    provenance: Provenance,
    #[serde(default = "default_indexing")]
    indexing: Indexing,
}

fn default_indexing() -> Indexing {
    Indexing::Positional
}

impl TryFrom<SequenceRepr> for SeparatedSequence {
    type Error = Error;

    fn try_from(r: SequenceRepr) -> Result<Self> {
        Self::with_indexing(r.points, r.index_offset, r.indexing, r.separation, r.provenance)
    }
}

impl SeparatedSequence {
    /// Builds a sequence from explicit parts, checking every invariant.
    pub fn with_indexing(
        points: Vec<f64>,
        index_offset: i64,
        indexing: Indexing,
        separation: f64,
        provenance: Provenance,
    ) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InsufficientData("sequence has no points".into()));
        }
        if !(separation > 0.0 && separation.is_finite()) {
            return Err(Error::Invariant(format!("separation must be positive, got {separation}")));
        }
        if let Some(p) = points.iter().find(|p| !p.is_finite()) {
            return Err(Error::Range(format!("non-finite point {p}")));
        }
        for w in points.windows(2) {
            if !(w[1] > w[0]) {
                return Err(Error::Invariant(format!("points not strictly increasing at {} , {}", w[0], w[1])));
            }
            if w[1] - w[0] < separation {
                return Err(Error::Invariant(format!(
                    "gap {} below separation {separation}",
                    w[1] - w[0]
                )));
            }
        }
        let seq = Self { points, index_offset, separation, provenance, indexing };
        if indexing == Indexing::OneSided && seq.index_of(0) < 1 {
            return Err(Error::Invariant("one-sided sequences start at index >= 1".into()));
        }
        Ok(seq)
    }

    /// External data: sorted on load, positional indices starting at 1.
    pub fn from_points(mut points: Vec<f64>) -> Result<Self> {
        points.sort_by(f64::total_cmp);
        let separation = min_gap(&points).unwrap_or(1.0);
        if separation <= 0.0 {
            return Err(Error::Parameter("duplicate points in external data".into()));
        }
        Self::with_indexing(points, 1, Indexing::Positional, separation, Provenance::External)
    }

    /// Parses CSV/line data: one real per line, blank lines and `#` comments ignored.
    pub fn from_csv_str(text: &str) -> Result<Self> {
        let mut pts = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let field = line.split(',').next().unwrap_or("").trim();
            if field.is_empty() || field.starts_with('#') {
                continue;
            }
            let v: f64 = field
                .parse()
                .map_err(|_| Error::Parameter(format!("line {}: not a real number: {field:?}", lineno + 1)))?;
            pts.push(v);
        }
        Self::from_points(pts)
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn index_offset(&self) -> i64 {
        self.index_offset
    }

    pub fn separation(&self) -> f64 {
        self.separation
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn indexing(&self) -> Indexing {
        self.indexing
    }

    pub fn is_two_sided(&self) -> bool {
        self.points[0] < 0.0 && *self.points.last().unwrap() > 0.0
    }

    /// Sequence index of the point at `position`.
    pub fn index_of(&self, position: usize) -> i64 {
        let n = position as i64 + self.index_offset;
        match self.indexing {
            Indexing::TwoSided if n >= 0 => n + 1,
            _ => n,
        }
    }

    /// List position of index `n`, if inside the stored window.
    pub fn position_of(&self, n: i64) -> Option<usize> {
        let raw = match self.indexing {
            Indexing::TwoSided => {
                if n == 0 {
                    return None;
                }
                if n > 0 {
                    n - 1
                } else {
                    n
                }
            }
            _ => n,
        };
        let p = raw - self.index_offset;
        (p >= 0 && (p as usize) < self.points.len()).then_some(p as usize)
    }

    pub fn index_range(&self) -> (i64, i64) {
        (self.index_of(0), self.index_of(self.points.len() - 1))
    }

    /// Checks that every consecutive difference is at least `delta`.
    pub fn check_separation(&self, delta: f64) -> bool {
        self.points.windows(2).all(|w| w[1] - w[0] >= delta * (1.0 - 1e-12))
    }

    /// Gap `Δ_n` attached to the point at `position`, if both neighbours it needs exist.
    ///
    /// `Δ_n = a_{n+1} - a_n` for `n > 0` and `Δ_n = a_n - a_{n-1}` for `n ≤ 0`.
    pub fn gap_at(&self, position: usize) -> Option<f64> {
        let n = self.index_of(position);
        if n > 0 {
            self.points.get(position + 1).map(|&next| next - self.points[position])
        } else if position > 0 {
            Some(self.points[position] - self.points[position - 1])
        } else {
            None
        }
    }

    /// Gap weight with the boundary convention: the single available neighbour gap.
    pub fn gap_weight_at(&self, position: usize) -> Option<f64> {
        self.gap_at(position).or_else(|| {
            let p = &self.points;
            if position + 1 < p.len() {
                Some(p[position + 1] - p[position])
            } else if position > 0 {
                Some(p[position] - p[position - 1])
            } else {
                None
            }
        })
    }

    /// Positions whose index lies in `window`, as a new sequence.
    pub fn restrict(&self, window: IndexWindow) -> Result<Self> {
        let positions: Vec<usize> = (0..self.len())
            .filter(|&p| {
                let n = self.index_of(p);
                n >= window.lo && n <= window.hi
            })
            .collect();
        let (Some(&first), Some(&last)) = (positions.first(), positions.last()) else {
            return Err(Error::InsufficientData(format!("no points with index in {window}")));
        };
        let pts = self.points[first..=last].to_vec();
        let raw_first = first as i64 + self.index_offset;
        Self::with_indexing(pts, raw_first, self.indexing, self.separation, self.provenance.clone())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

pub(crate) fn min_gap(points: &[f64]) -> Option<f64> {
    points.windows(2).map(|w| w[1] - w[0]).min_by(f64::total_cmp)
}

/// Natural numbers removed by the `regular_punctured` construction, ascending.
pub(crate) fn punctured_removed_upto(limit: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut k: i32 = 1;
    loop {
        let base = 2f64.powf(3f64.powi(k));
        if !base.is_finite() || base + 1.0 > limit {
            break;
        }
        for m in 1..=k {
            out.push(base + m as f64);
        }
        k += 1;
    }
    out
}

/// Generates the points of `family` over the index `window`.
pub fn generate(family: &Family, window: IndexWindow) -> Result<SeparatedSequence> {
    family.validate()?;
    if window.lo > window.hi {
        return Err(Error::Parameter(format!("empty window {window}")));
    }
    let provenance = Provenance::Generated { family: family.clone(), window };
    let (points, offset, indexing) = match *family {
        Family::Arithmetic => {
            let pts: Vec<f64> = (window.lo..=window.hi).map(|n| n as f64).collect();
            let indexing = if window.lo >= 1 { Indexing::OneSided } else { Indexing::Positional };
            (pts, window.lo, indexing)
        }
        ref f if f.is_symmetric() => {
            let mut pts = Vec::new();
            for n in window.lo..=window.hi {
                if n == 0 {
                    continue;
                }
                let mag = f.continuous_point(n.unsigned_abs() as f64).expect("closed form");
                if !mag.is_finite() {
                    return Err(Error::Range(format!("point at index {n} overflows f64")));
                }
                pts.push(mag.copysign(n as f64));
            }
            if pts.is_empty() {
                return Err(Error::Parameter("window contains only index 0".into()));
            }
            let first = if window.lo == 0 { 1 } else { window.lo };
            if first >= 1 {
                (pts, first, Indexing::OneSided)
            } else {
                (pts, first, Indexing::TwoSided)
            }
        }
        Family::LogGap { a1, c } => {
            if window.lo < 1 {
                return Err(Error::Parameter("log_gap is one-sided: window must start at 1 or later".into()));
            }
            let mut a = a1;
            let mut pts = Vec::with_capacity((window.hi - window.lo + 1) as usize);
            for n in 1..=window.hi {
                if n >= window.lo {
                    pts.push(a);
                }
                a += c * a.ln();
                if !a.is_finite() {
                    return Err(Error::Range(format!("log_gap overflow at index {n}")));
                }
            }
            (pts, window.lo, Indexing::OneSided)
        }
        Family::ClusterGap { t1, n, d } => {
            let lo = window.lo.max(1);
            let hi = window.hi.min(n as i64);
            if lo > hi {
                return Err(Error::Parameter(format!("window {window} misses indices 1..={n}")));
            }
            let pts: Vec<f64> = (lo..=hi)
                .map(|i| if i == 1 { t1 } else { t1 + n as f64 * d + (i - 2) as f64 * d })
                .collect();
            (pts, lo, Indexing::OneSided)
        }
        Family::RegularPunctured => {
            let lo = window.lo.max(1);
            if lo > window.hi {
                return Err(Error::Parameter(format!("window {window} contains no natural numbers")));
            }
            if window.hi > 1 << 40 {
                return Err(Error::Range("regular_punctured point list too large; use regular_punctured_runs".into()));
            }
            let removed = punctured_removed_upto(window.hi as f64);
            let is_removed = |v: f64| removed.binary_search_by(|r| r.total_cmp(&v)).is_ok();
            let before = (1..lo).filter(|&v| !is_removed(v as f64)).count() as i64;
            let pts: Vec<f64> = (lo..=window.hi).map(|v| v as f64).filter(|&v| !is_removed(v)).collect();
            if pts.is_empty() {
                return Err(Error::InsufficientData("window removes every point".into()));
            }
            (pts, before + 1, Indexing::OneSided)
        }
        _ => unreachable!("symmetric families handled above"),
    };
    if let Some(p) = points.iter().find(|p| !p.is_finite()) {
        return Err(Error::Range(format!("non-finite point {p}")));
    }
    let separation = min_gap(&points).unwrap_or(1.0);
    SeparatedSequence::with_indexing(points, offset, indexing, separation, provenance)
}

/// Gap profile over a window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapProfile {
    /// `(n, Δ_n)` for every index whose gap is defined inside the window.
    pub gaps: Vec<(i64, f64)>,
    pub ratio_stats: RatioStats,
    pub sidedness: Sidedness,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sidedness {
    OneSided,
    TwoSided,
}

/// Statistics of `Δ_{n+1}/Δ_n` (successor index, skipping 0 for two-sided data).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioStats {
    pub min: f64,
    pub max: f64,
    pub median: f64,
    pub count: usize,
}

impl GapProfile {
    pub fn gap(&self, n: i64) -> Option<f64> {
        self.gaps.iter().find(|(i, _)| *i == n).map(|(_, g)| *g)
    }

    pub fn values(&self) -> Vec<f64> {
        self.gaps.iter().map(|(_, g)| *g).collect()
    }
}

pub(crate) fn median(values: &mut [f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    values.sort_by(f64::total_cmp);
    let m = values.len() / 2;
    if values.len() % 2 == 1 {
        values[m]
    } else {
        0.5 * (values[m - 1] + values[m])
    }
}

/// Computes `Δ_n` per the two-branch definition plus consecutive-ratio statistics.
pub fn gaps(seq: &SeparatedSequence) -> Result<GapProfile> {
    if seq.len() < 2 {
        return Err(Error::InsufficientData("gaps need at least two points".into()));
    }
    let gaps: Vec<(i64, f64)> = (0..seq.len())
        .filter_map(|p| seq.gap_at(p).map(|g| (seq.index_of(p), g)))
        .collect();
    let successor = |n: i64| {
        if seq.indexing() == Indexing::TwoSided && n == -1 {
            1
        } else {
            n + 1
        }
    };
    let mut ratios: Vec<f64> = gaps
        .windows(2)
        .filter(|w| w[1].0 == successor(w[0].0))
        .map(|w| w[1].1 / w[0].1)
        .collect();
    let count = ratios.len();
    let (min, max) = ratios
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &r| (lo.min(r), hi.max(r)));
    let median = median(&mut ratios);
    let ratio_stats = if count == 0 {
        RatioStats { min: f64::NAN, max: f64::NAN, median: f64::NAN, count }
    } else {
        RatioStats { min, max, median, count }
    };
    let sidedness = if seq.is_two_sided() { Sidedness::TwoSided } else { Sidedness::OneSided };
    Ok(GapProfile { gaps, ratio_stats, sidedness })
}
