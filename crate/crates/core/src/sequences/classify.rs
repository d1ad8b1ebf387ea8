//! Finite-window regime classification.
//!
//! Every test here is a heuristic stand-in for an asymptotic relation
//! (`≲`, `≍`): least-squares slopes in log-log coordinates are compared with
//! a tolerance, and the verdict records the fitted constants.

use super::{gaps, median, GapProfile, IndexWindow, SeparatedSequence, Sidedness};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::E;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    BoundedGaps,
    SlowComeasurable,
    WideComeasurable,
    SparseClusters,
    CounterexamplePattern,
    Unknown,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassifyConfig {
    pub min_points: usize,
    /// Upper bound on `max(Δ_{n+1}/Δ_n, Δ_n/Δ_{n+1})` for co-measurability.
    pub ratio_bound: f64,
    /// Slope tolerance (log units) for the asymptotic fits.
    pub fit_tolerance: f64,
    pub cluster_d: f64,
    pub cluster_max_size: usize,
    /// Smallest cluster size that counts as the counterexample pattern.
    pub counterexample_n: usize,
    /// Cluster gap scale `D`; the median gap when absent.
    pub counterexample_d: Option<f64>,
}

impl Default for ClassifyConfig {
    fn default() -> Self {
        Self {
            min_points: 16,
            ratio_bound: 8.0,
            fit_tolerance: 0.25,
            cluster_d: 0.5,
            cluster_max_size: 4,
            counterexample_n: 8,
            counterexample_d: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeVerdict {
    pub regime: Regime,
    pub fitted_constants: BTreeMap<String, f64>,
    pub confidence_window: IndexWindow,
    pub notes: Vec<String>,
    /// Finite-window verdicts are never proofs.
    pub heuristic: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    /// Isolated point, long gap, then the cluster to its right.
    GapThenCluster,
    /// Mirror image: cluster, long gap, isolated point.
    ClusterThenGap,
}

/// Largest cluster-after-gap pattern found in the data for a given `D`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleMatch {
    /// Number of points `t_1, ..., t_N` in the pattern.
    pub n: usize,
    /// Position of `t_1` in the point list.
    pub start: usize,
    pub d: f64,
    pub orientation: Orientation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterDecomposition {
    /// Inclusive position ranges, in order.
    pub clusters: Vec<(usize, usize)>,
    pub max_cluster_size: usize,
    pub inter_cluster_ratio_gap: f64,
    pub intra_cluster_ratio_excess: f64,
    /// `None` on success; the offending cluster otherwise.
    pub failure: Option<String>,
}

impl ClusterDecomposition {
    pub fn succeeded(&self) -> bool {
        self.failure.is_none()
    }
}

/// Ratio excess `outer/inner - 1` between neighbours; infinite across the origin.
fn ratio_excess(left: f64, right: f64) -> f64 {
    if left > 0.0 {
        right / left - 1.0
    } else if right < 0.0 {
        left / right - 1.0
    } else {
        f64::INFINITY
    }
}

/// Greedy left-to-right cluster partition.
pub fn decompose_clusters(seq: &SeparatedSequence, d: f64, max_size: usize) -> Result<ClusterDecomposition> {
    if !(d > 0.0) || max_size < 1 {
        return Err(Error::Parameter("decompose_clusters needs d > 0 and max_size >= 1".into()));
    }
    let p = seq.points();
    let mut clusters = Vec::new();
    let mut start = 0;
    let mut intra: f64 = 0.0;
    for i in 0..p.len() - 1 {
        let r = ratio_excess(p[i], p[i + 1]);
        if r > d {
            clusters.push((start, i));
            start = i + 1;
        } else {
            intra = intra.max(r.abs());
        }
    }
    clusters.push((start, p.len() - 1));
    let max_cluster_size = clusters.iter().map(|(a, b)| b - a + 1).max().unwrap_or(0);
    let failure = clusters.iter().find(|(a, b)| b - a + 1 > max_size).map(|(a, b)| {
        format!(
            "cluster at positions {a}..={b} has {} points (max {max_size})",
            b - a + 1
        )
    });
    Ok(ClusterDecomposition {
        clusters,
        max_cluster_size,
        inter_cluster_ratio_gap: d,
        intra_cluster_ratio_excess: intra,
        failure,
    })
}

fn le_tol(x: f64, y: f64) -> bool {
    x <= y * (1.0 + 1e-12)
}

fn scan(points: &[f64], d: f64) -> Option<(usize, usize)> {
    let mut best: Option<(usize, usize)> = None;
    let mut i = 0;
    while i + 1 < points.len() {
        let gap = points[i + 1] - points[i];
        let mut small = 0;
        while i + 2 + small < points.len() && le_tol(points[i + 2 + small] - points[i + 1 + small], d) {
            small += 1;
        }
        let by_gap = ((gap / d) * (1.0 + 1e-12)).floor();
        let n = ((small + 2) as f64).min(by_gap) as usize;
        if n >= 2 && best.is_none_or(|(bn, _)| n > bn) {
            best = Some((n, i));
        }
        i += 1;
    }
    best
}

/// Scans every candidate start for `t_2 - t_1 ≥ N D` followed by gaps `≤ D`,
/// in both orientations, and returns the largest `N` achieved.
pub fn detect_counterexample(seq: &SeparatedSequence, d: f64) -> Option<CounterexampleMatch> {
    if !(d > 0.0) {
        return None;
    }
    let p = seq.points();
    let forward = scan(p, d).map(|(n, start)| CounterexampleMatch {
        n,
        start,
        d,
        orientation: Orientation::GapThenCluster,
    });
    let mirrored: Vec<f64> = p.iter().rev().map(|x| -x).collect();
    let backward = scan(&mirrored, d).map(|(n, start)| CounterexampleMatch {
        n,
        start: p.len() - 1 - start,
        d,
        orientation: Orientation::ClusterThenGap,
    });
    match (forward, backward) {
        (Some(f), Some(b)) => Some(if b.n > f.n { b } else { f }),
        (f, b) => f.or(b),
    }
}

/// Least-squares slope and RMS residual of `y` on `x`.
fn fit(xs: &[f64], ys: &[f64]) -> Option<(f64, f64)> {
    let n = xs.len();
    if n < 3 {
        return None;
    }
    let mx = xs.iter().sum::<f64>() / n as f64;
    let my = ys.iter().sum::<f64>() / n as f64;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx <= 1e-12 * n as f64 {
        return None;
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let rms = (xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - my - slope * (x - mx)).powi(2))
        .sum::<f64>()
        / n as f64)
        .sqrt();
    Some((slope, rms))
}

struct LogSample {
    lnln_a: f64,
    ln_a: f64,
    gap: f64,
}

fn log_samples(seq: &SeparatedSequence, profile: &GapProfile) -> Vec<LogSample> {
    profile
        .gaps
        .iter()
        .filter_map(|&(n, gap)| {
            let a = seq.points()[seq.position_of(n)?].abs();
            (a > E).then(|| LogSample { lnln_a: a.ln().ln(), ln_a: a.ln(), gap })
        })
        .collect()
}

/// Assigns one regime to a finite window.
pub fn classify(seq: &SeparatedSequence, cfg: &ClassifyConfig) -> Result<RegimeVerdict> {
    if seq.len() < cfg.min_points.max(3) {
        return Err(Error::InsufficientData(format!(
            "classification needs at least {} points, got {}",
            cfg.min_points.max(3),
            seq.len()
        )));
    }
    let profile = gaps(seq)?;
    let (lo, hi) = seq.index_range();
    let mut consts = BTreeMap::new();
    let mut notes = vec!["finite-window verdict: asymptotic relations tested by log-log fits".to_string()];
    let verdict = |regime, consts, notes| {
        Ok(RegimeVerdict {
            regime,
            fitted_constants: consts,
            confidence_window: IndexWindow::new(lo, hi),
            notes,
            heuristic: true,
        })
    };

    let all_gaps: Vec<f64> = seq.points().windows(2).map(|w| w[1] - w[0]).collect();
    let d = cfg.counterexample_d.unwrap_or_else(|| median(&mut all_gaps.clone()));
    consts.insert("counterexample_d".into(), d);
    if let Some(m) = detect_counterexample(seq, d) {
        consts.insert("counterexample_max_n".into(), m.n as f64);
        if m.n >= cfg.counterexample_n {
            notes.push(format!(
                "cluster of {} points with gaps <= {d} after a gap >= {}·{d} starting at position {} ({:?})",
                m.n, m.n, m.start, m.orientation
            ));
            return verdict(Regime::CounterexamplePattern, consts, notes);
        }
    }

    // co-measurability over consecutive positional gaps
    let comeasurable_ratio = all_gaps
        .windows(2)
        .map(|w| (w[1] / w[0]).max(w[0] / w[1]))
        .fold(1.0f64, f64::max);
    consts.insert("comeasurability_ratio".into(), comeasurable_ratio);
    let comeasurable = comeasurable_ratio <= cfg.ratio_bound;

    let samples = log_samples(seq, &profile);
    let xs: Vec<f64> = samples.iter().map(|s| s.lnln_a).collect();
    let gap_min = all_gaps.iter().copied().fold(f64::INFINITY, f64::min);
    let gap_max = all_gaps.iter().copied().fold(0.0, f64::max);
    consts.insert("gap_min".into(), gap_min);
    consts.insert("gap_max".into(), gap_max);

    let tol = cfg.fit_tolerance;
    let slope_of = |f: &dyn Fn(&LogSample) -> f64| {
        let ys: Vec<f64> = samples.iter().map(f).collect();
        fit(&xs, &ys)
    };

    // (a) bounded gaps: ln Δ flat against ln ln|a|
    let bounded = match slope_of(&|s| s.gap.ln()) {
        Some((slope, rms)) => {
            consts.insert("slope_ln_gap_vs_lnln_a".into(), slope);
            consts.insert("rms_ln_gap_vs_lnln_a".into(), rms);
            slope <= tol && gap_max / gap_min <= cfg.ratio_bound
        }
        None => gap_max / gap_min <= cfg.ratio_bound.min(2.0),
    };
    if bounded {
        if profile.sidedness == Sidedness::OneSided {
            notes.push(
                "one-sided bounded gaps: a two-sided completion carrying a bounded-derivative inner function \
                 must satisfy |λ_n| ≲ exp(c|n|) on the other side"
                    .into(),
            );
        }
        consts.insert("gap_sup".into(), gap_max);
        return verdict(Regime::BoundedGaps, consts, notes);
    }

    if comeasurable {
        // (b) ln|a|/ln ln Δ ≲ Δ ≲ ln|a|
        let upper = slope_of(&|s| (s.gap / s.ln_a).ln());
        if let Some((slope, _)) = upper {
            consts.insert("slope_gap_over_ln_a".into(), slope);
        }
        let lower_samples: Vec<&LogSample> = samples.iter().filter(|s| s.gap > E).collect();
        let excluded = samples.len() - lower_samples.len();
        if excluded > 0 {
            notes.push(format!("{excluded} indices with Δ_n <= e excluded from the ln ln Δ_n lower-bound fit"));
        }
        let lower = {
            let lx: Vec<f64> = lower_samples.iter().map(|s| s.lnln_a).collect();
            let ly: Vec<f64> = lower_samples
                .iter()
                .map(|s| (s.gap * s.gap.ln().ln() / s.ln_a).ln())
                .collect();
            fit(&lx, &ly)
        };
        if let Some((slope, _)) = lower {
            consts.insert("slope_lower_ratio".into(), slope);
        }
        let upper_ok = upper.is_some_and(|(s, _)| s <= tol);
        let lower_ok = match lower {
            Some((s, _)) => s >= -tol,
            None => {
                notes.push("lower bound untestable on this window (too few indices with Δ_n > e)".into());
                true
            }
        };
        if upper_ok && lower_ok {
            return verdict(Regime::SlowComeasurable, consts, notes);
        }

        // (c) Δ ≳ (ln|a|)²
        if let Some((slope, _)) = slope_of(&|s| (s.gap / (s.ln_a * s.ln_a)).ln()) {
            consts.insert("slope_gap_over_ln2_a".into(), slope);
            if slope >= -tol {
                let c = samples
                    .iter()
                    .map(|s| s.gap / (s.ln_a * s.ln_a))
                    .fold(f64::INFINITY, f64::min);
                consts.insert("wide_constant".into(), c);
                return verdict(Regime::WideComeasurable, consts, notes);
            }
        }
    }

    // (d) sparse clusters
    let dec = decompose_clusters(seq, cfg.cluster_d, cfg.cluster_max_size)?;
    consts.insert("cluster_max_size".into(), dec.max_cluster_size as f64);
    consts.insert("cluster_intra_excess".into(), dec.intra_cluster_ratio_excess);
    if dec.succeeded() && dec.clusters.len() >= 2 {
        return verdict(Regime::SparseClusters, consts, notes);
    }
    if let Some(f) = dec.failure {
        notes.push(format!("cluster decomposition failed: {f}"));
    }
    verdict(Regime::Unknown, consts, notes)
}
