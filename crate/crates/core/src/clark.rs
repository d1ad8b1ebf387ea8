//! Atomic Clark measures over a separated spectrum.

use crate::error::{Error, Result};
use crate::quad::{integrate_to_infinity, QuadConfig};
use crate::sequences::{min_gap, Family, Indexing, Provenance, SeparatedSequence};
use crate::sum::NeumaierSum;
use crate::transform::{compensator, term_real};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::E;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightStrategy {
    Unit,
    Gap,
    KreinResidue,
    Custom,
}

impl std::str::FromStr for WeightStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "unit" => Ok(Self::Unit),
            "gap" => Ok(Self::Gap),
            "krein_residue" => Ok(Self::KreinResidue),
            "custom" => Ok(Self::Custom),
            other => Err(Error::Parameter(format!("unknown weight strategy {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub a: f64,
    pub w: f64,
}

/// Partial Poisson sum over the window plus a tail bound when one is available.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoissonWitness {
    pub partial_sum: f64,
    pub tail_bound: Option<f64>,
    pub window_only: bool,
}

/// Generator family and covered index range, used for integral-comparison tails.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct TailModel {
    family: Family,
    lo: i64,
    hi: i64,
    gap_weights: bool,
}

impl TailModel {
    fn new(seq: &SeparatedSequence, strategy: WeightStrategy) -> Option<Self> {
        let (family, _) = seq.provenance().family()?;
        let gap_weights = match strategy {
            WeightStrategy::Unit => false,
            WeightStrategy::Gap => true,
            _ => return None,
        };
        let ok = match family {
            Family::Arithmetic | Family::Power { .. } | Family::Geometric { .. } => true,
            // gap weights grow like a_n^{e-1}: not Poisson finite
            Family::DoubleExponential => !gap_weights,
            Family::ClusterGap { .. } => true,
            _ => false,
        };
        let (lo, hi) = seq.index_range();
        ok.then(|| Self { family: family.clone(), lo, hi, gap_weights })
    }

    fn weight(&self, x: f64) -> f64 {
        if self.gap_weights {
            let p = |t| self.family.continuous_point(t).unwrap_or(f64::NAN);
            p(x + 1.0) - p(x)
        } else {
            1.0
        }
    }

    /// Bounds `Σ |term(a_n, w_n)|` over the family indices outside the window.
    ///
    /// `exact` bounds a single term at a signed position, `envelope(|a|, w)` must
    /// be decreasing in the index once `|a| > threshold`.
    pub(crate) fn bound(
        &self,
        exact: impl Fn(f64, f64) -> f64,
        envelope: impl Fn(f64, f64) -> f64,
        threshold: f64,
    ) -> Option<f64> {
        if let Family::ClusterGap { n, .. } = self.family {
            return (self.lo <= 1 && self.hi >= n as i64).then_some(0.0);
        }
        let two_sided = self.lo < 1;
        let mut total = NeumaierSum::new();
        // (sign, covered |n| range on this side)
        let mut sides = vec![(1.0, covered(self.lo.max(1), self.hi))];
        if two_sided {
            let neg = covered(self.hi.min(-1).unsigned_abs() as i64, self.lo.unsigned_abs() as i64);
            sides.push((-1.0, neg));
            if matches!(self.family, Family::Arithmetic) && self.hi < 0 {
                total += exact(0.0, self.weight(0.0));
            }
        }
        for (sign, range) in sides {
            let (first_missing_tail, finite_upto) = match range {
                Some((lo, hi)) => (hi + 1, lo - 1),
                None => (1, 0),
            };
            if finite_upto > 1_000_000 {
                return None;
            }
            for m in 1..=finite_upto {
                let x = m as f64;
                total += exact(sign * self.family.continuous_point(x)?, self.weight(x));
            }
            let m0 = first_missing_tail as f64;
            let a0 = self.family.continuous_point(m0)?;
            if a0.is_finite() && a0 <= threshold {
                return None;
            }
            let g = |x: f64| {
                let a = self.family.continuous_point(x).unwrap_or(f64::INFINITY);
                if !a.is_finite() {
                    return 0.0;
                }
                envelope(a, self.weight(x))
            };
            let head = g(m0);
            let q = integrate_to_infinity(g, m0, &QuadConfig::default());
            if !(head.is_finite() && q.value.is_finite()) {
                return None;
            }
            total += head;
            total += q.value + q.error;
        }
        let t = total.sum();
        t.is_finite().then_some(t)
    }
}

/// `|n|` range covered on one side, as `(inner, outer)`.
fn covered(inner: i64, outer: i64) -> Option<(i64, i64)> {
    (inner >= 1 && outer >= inner).then_some((inner, outer))
}

/// Positive point masses `w_n` at the spectrum points `a_n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MeasureRepr", into = "MeasureRepr")]
pub struct ClarkMeasure {
    seq: SeparatedSequence,
    weights: Vec<f64>,
    compensators: Vec<f64>,
    strategy: WeightStrategy,
    witness: PoissonWitness,
    #[serde(skip)]
    tail: Option<TailModel>,
}

#[derive(Serialize, Deserialize)]
struct MeasureRepr {
    atoms: Vec<Atom>,
    strategy: WeightStrategy,
    source: Provenance,
    #[serde(default = "one")]
    index_offset: i64,
    #[serde(default = "positional")]
    indexing: Indexing,
}

fn one() -> i64 {
    1
}

fn positional() -> Indexing {
    Indexing::Positional
}

impl TryFrom<MeasureRepr> for ClarkMeasure {
    type Error = Error;

    fn try_from(r: MeasureRepr) -> Result<Self> {
        let points: Vec<f64> = r.atoms.iter().map(|a| a.a).collect();
        let weights = r.atoms.iter().map(|a| a.w).collect();
        let sep = min_gap(&points).unwrap_or(1.0);
        let seq = SeparatedSequence::with_indexing(points, r.index_offset, r.indexing, sep, r.source)?;
        ClarkMeasure::new(seq, weights, r.strategy)
    }
}

impl From<ClarkMeasure> for MeasureRepr {
    fn from(m: ClarkMeasure) -> Self {
        MeasureRepr {
            atoms: m.atoms().collect(),
            strategy: m.strategy,
            source: m.seq.provenance().clone(),
            index_offset: m.seq.index_offset(),
            indexing: m.seq.indexing(),
        }
    }
}

impl ClarkMeasure {
    /// Measure with explicit weights; checks positivity and length.
    pub fn new(seq: SeparatedSequence, weights: Vec<f64>, strategy: WeightStrategy) -> Result<Self> {
        if weights.len() != seq.len() {
            return Err(Error::Parameter(format!(
                "{} weights for {} atoms",
                weights.len(),
                seq.len()
            )));
        }
        if let Some((i, w)) = weights.iter().enumerate().find(|(_, w)| !(**w > 0.0 && w.is_finite())) {
            return Err(Error::Parameter(format!("weight {w} at position {i} is not positive")));
        }
        let compensators = seq.points().iter().zip(&weights).map(|(&a, &w)| compensator(a, w)).collect();
        let tail = TailModel::new(&seq, strategy);
        let mut m = Self {
            seq,
            weights,
            compensators,
            strategy,
            witness: PoissonWitness { partial_sum: 0.0, tail_bound: None, window_only: true },
            tail,
        };
        m.witness = m.compute_witness();
        if !m.witness.partial_sum.is_finite() {
            return Err(Error::Invariant("Poisson partial sum is not finite".into()));
        }
        Ok(m)
    }

    pub fn positions(&self) -> &[f64] {
        self.seq.points()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn compensators(&self) -> &[f64] {
        &self.compensators
    }

    pub fn atoms(&self) -> impl Iterator<Item = Atom> + '_ {
        self.positions().iter().zip(&self.weights).map(|(&a, &w)| Atom { a, w })
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn strategy(&self) -> WeightStrategy {
        self.strategy
    }

    pub fn sequence(&self) -> &SeparatedSequence {
        &self.seq
    }

    pub fn separation(&self) -> f64 {
        self.seq.separation()
    }

    pub fn witness(&self) -> PoissonWitness {
        self.witness
    }

    pub(crate) fn tail_model(&self) -> Option<&TailModel> {
        self.tail.as_ref()
    }

    /// Position of the atom nearest to `x` (ties go left).
    pub fn nearest_atom(&self, x: f64) -> usize {
        let p = self.positions();
        let i = p.partition_point(|&a| a < x);
        if i == 0 {
            0
        } else if i == p.len() || x - p[i - 1] <= p[i] - x {
            i - 1
        } else {
            i
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    fn compute_witness(&self) -> PoissonWitness {
        let partial_sum = self.atoms().map(|at| poisson_term(at.a, at.w)).collect::<NeumaierSum>().sum();
        let tail_bound = self.tail.as_ref().and_then(|t| t.bound(poisson_term, poisson_term, 0.0));
        PoissonWitness { partial_sum, tail_bound, window_only: tail_bound.is_none() }
    }
}

fn poisson_term(a: f64, w: f64) -> f64 {
    if a.abs() >= 1.0 {
        let u = 1.0 / a;
        w * u * u / (1.0 + u * u)
    } else {
        w / (1.0 + a * a)
    }
}

/// Builds a Clark measure with the requested weight strategy.
pub fn build_measure(
    seq: &SeparatedSequence,
    strategy: WeightStrategy,
    custom_weights: Option<&[f64]>,
) -> Result<ClarkMeasure> {
    let weights = match strategy {
        WeightStrategy::Unit => vec![1.0; seq.len()],
        WeightStrategy::Gap => (0..seq.len())
            .map(|p| {
                seq.gap_weight_at(p)
                    .ok_or_else(|| Error::InsufficientData("gap weights need at least two points".into()))
            })
            .collect::<Result<_>>()?,
        WeightStrategy::Custom | WeightStrategy::KreinResidue => custom_weights
            .ok_or_else(|| Error::Parameter(format!("{strategy:?} strategy needs explicit weights")))?
            .to_vec(),
    };
    ClarkMeasure::new(seq.clone(), weights, strategy)
}

/// Poisson finiteness witness `Σ w_n / (1 + a_n²)` with its tail status.
pub fn poisson_finiteness(measure: &ClarkMeasure) -> PoissonWitness {
    measure.witness()
}

/// `D_k = Σ_{n≠k} (w_n/(a_n - a_k) - w_n a_n/(1 + a_n²))` over the window.
pub fn discrepancy(measure: &ClarkMeasure, k: i64) -> Result<f64> {
    let seq = measure.sequence();
    let pos = seq.position_of(k).ok_or_else(|| {
        let (lo, hi) = seq.index_range();
        Error::Index { index: k, lo, hi }
    })?;
    Ok(discrepancy_at(measure, pos))
}

pub(crate) fn discrepancy_at(measure: &ClarkMeasure, pos: usize) -> f64 {
    let p = measure.positions();
    let w = measure.weights();
    let ak = p[pos];
    // walk outward from k: increasing distance, ties resolved left first
    let (mut l, mut r) = (pos as isize - 1, pos + 1);
    let mut acc = NeumaierSum::new();
    loop {
        let left = (l >= 0).then(|| ak - p[l as usize]);
        let right = (r < p.len()).then(|| p[r] - ak);
        let take_left = match (left, right) {
            (None, None) => break,
            (Some(_), None) => true,
            (None, Some(_)) => false,
            (Some(dl), Some(dr)) => dl <= dr,
        };
        let n = if take_left {
            l -= 1;
            (l + 1) as usize
        } else {
            r += 1;
            r - 1
        };
        acc += term_real(p[n], w[n], ak, p[n] - ak);
    }
    acc.sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscrepancyReport {
    pub per_index: BTreeMap<i64, f64>,
    pub sup_abs: f64,
    pub argmax: i64,
    /// `max |D_k| / ln|a_k|` over `|a_k| > e`; absent when no atom qualifies.
    pub normalized_sup: Option<f64>,
    pub normalized_argmax: Option<i64>,
    /// Largest integral-comparison bound on the missing terms, if every index admits one.
    pub tail_bound: Option<f64>,
    pub window_only: bool,
}

/// Discrepancy at every window index.
pub fn discrepancy_report(measure: &ClarkMeasure) -> Result<DiscrepancyReport> {
    if measure.len() < 2 {
        return Err(Error::InsufficientData("discrepancy report needs at least two atoms".into()));
    }
    let seq = measure.sequence();
    let values: Vec<f64> = (0..measure.len()).into_par_iter().map(|p| discrepancy_at(measure, p)).collect();
    let per_index: BTreeMap<i64, f64> = values.iter().enumerate().map(|(p, &d)| (seq.index_of(p), d)).collect();
    let (sup_pos, sup_abs) = values
        .iter()
        .enumerate()
        .map(|(p, d)| (p, d.abs()))
        .fold((0, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
    let normalized = values
        .iter()
        .enumerate()
        .filter(|(p, _)| measure.positions()[*p].abs() > E)
        .map(|(p, d)| (p, d.abs() / measure.positions()[p].abs().ln()))
        .fold(None, |best: Option<(usize, f64)>, cur| match best {
            Some(b) if b.1 >= cur.1 => Some(b),
            _ => Some(cur),
        });
    let tail_bound = measure.tail_model().and_then(|t| {
        measure
            .positions()
            .iter()
            .map(|&x| {
                t.bound(
                    |a, w| term_real(a, w, x, a - x).abs(),
                    |a, w| w * (1.0 + a * x.abs()) / ((a - x.abs()) * (1.0 + a * a)),
                    x.abs(),
                )
            })
            .try_fold(0.0f64, |m, b| b.map(|b| m.max(b)))
    });
    Ok(DiscrepancyReport {
        per_index,
        sup_abs,
        argmax: seq.index_of(sup_pos),
        normalized_sup: normalized.map(|n| n.1),
        normalized_argmax: normalized.map(|n| seq.index_of(n.0)),
        tail_bound,
        window_only: tail_bound.is_none(),
    })
}
