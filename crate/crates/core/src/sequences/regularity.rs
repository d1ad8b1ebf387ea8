//! The a-regularity functional `∫ |n_Λ(x) - a x| / (1 + x²) dx`.
//!
//! The integrand is piecewise linear over piecewise-constant weights, so every
//! segment is integrated in closed form. Long arithmetic runs of points are
//! summed without visiting each segment, which lets windows reach `2^81`.

use super::SeparatedSequence;
use crate::error::{Error, Result};
use crate::sum::NeumaierSum;
use serde::{Deserialize, Serialize};

/// Arithmetic progression `start, start + step, ...` with `count` points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Run {
    pub start: f64,
    pub step: f64,
    pub count: u128,
}

impl Run {
    pub fn last(&self) -> f64 {
        self.start + (self.count - 1) as f64 * self.step
    }
}

/// Increasing point set stored as arithmetic runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointRuns {
    runs: Vec<Run>,
}

impl PointRuns {
    pub fn new(runs: Vec<Run>) -> Result<Self> {
        for r in &runs {
            if r.count == 0 || !r.start.is_finite() || (r.count > 1 && !(r.step > 0.0)) {
                return Err(Error::Parameter(format!("invalid run {r:?}")));
            }
        }
        for w in runs.windows(2) {
            if !(w[1].start > w[0].last()) {
                return Err(Error::Parameter("runs must be increasing and disjoint".into()));
            }
        }
        Ok(Self { runs })
    }

    /// Compresses sorted points into maximal runs of exactly equal steps.
    pub fn from_points(points: &[f64]) -> Self {
        let mut runs: Vec<Run> = Vec::new();
        for &p in points {
            match runs.last_mut() {
                Some(r) if r.count == 1 => {
                    r.step = p - r.start;
                    r.count = 2;
                }
                Some(r) if p - r.last() == r.step => r.count += 1,
                _ => runs.push(Run { start: p, step: 1.0, count: 1 }),
            }
        }
        Self { runs }
    }

    pub fn runs(&self) -> &[Run] {
        &self.runs
    }

    pub fn count(&self) -> u128 {
        self.runs.iter().map(|r| r.count).sum()
    }
}

/// `ℕ ∖ A` up to `hi`, with `A = {2^{3^k} + m : 1 ≤ m ≤ k}`.
pub fn regular_punctured_runs(hi: f64) -> Result<PointRuns> {
    if !(hi >= 1.0) || hi >= 2f64.powi(120) {
        return Err(Error::Range(format!("regular_punctured_runs needs 1 <= hi < 2^120, got {hi}")));
    }
    let top = hi.floor() as u128;
    let mut runs = Vec::new();
    let mut start: u128 = 1;
    let mut k: u32 = 1;
    while start <= top {
        let block = 3u32.pow(k);
        let end = if block < 127 { (1u128 << block).min(top) } else { top };
        runs.push(Run { start: start as f64, step: 1.0, count: end - start + 1 });
        if end == top {
            break;
        }
        start = (1u128 << block) + k as u128 + 1;
        k += 1;
    }
    PointRuns::new(runs)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NestedValue {
    pub window: (f64, f64),
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegularityReport {
    pub a: f64,
    pub window: (f64, f64),
    pub value: f64,
    /// Values over `[lo, lo + (hi - lo) 2^{-j}]`, `j = 3, 2, 1, 0`.
    pub nested: Vec<NestedValue>,
    pub increments: Vec<f64>,
    /// Increments shrink monotonically.
    pub tail_decreasing: bool,
    /// Segments integrated one by one (the rest went through run formulas).
    pub exact_segments: u64,
}

/// Regularity functional of an explicit point list.
pub fn regularity_functional(seq: &SeparatedSequence, a: f64, window: (f64, f64)) -> Result<RegularityReport> {
    regularity_functional_runs(&PointRuns::from_points(seq.points()), a, window)
}

/// Regularity functional of a run-encoded point set.
pub fn regularity_functional_runs(runs: &PointRuns, a: f64, window: (f64, f64)) -> Result<RegularityReport> {
    let (lo, hi) = window;
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::Parameter(format!("a must be positive, got {a}")));
    }
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::Parameter(format!("invalid window [{lo}, {hi}]")));
    }
    let mut exact_segments = 0;
    let mut nested = Vec::new();
    for j in (0..=3).rev() {
        let w = (lo, lo + (hi - lo) / f64::from(1u32 << j));
        let value = integrate_window(runs, a, w, &mut exact_segments)?;
        nested.push(NestedValue { window: w, value });
    }
    let increments: Vec<f64> = nested.windows(2).map(|w| w[1].value - w[0].value).collect();
    let tail_decreasing = increments.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12) + 1e-300);
    Ok(RegularityReport {
        a,
        window,
        value: nested.last().unwrap().value,
        nested,
        increments,
        tail_decreasing,
        exact_segments,
    })
}

fn integrate_window(runs: &PointRuns, a: f64, (lo, hi): (f64, f64), segs: &mut u64) -> Result<f64> {
    let mut total = 0.0;
    if hi > 0.0 {
        let positive = clip_runs(runs.runs(), |p| p > 0.0);
        total += integrate_positive(&positive, 0, a, lo.max(0.0), hi, segs)?;
    }
    if lo < 0.0 {
        // x = -y: |n(x) - a x| = |#{λ ∈ [x, 0]} - a y|, with λ = 0 counted from the start
        let mirrored: Vec<f64> = runs
            .runs()
            .iter()
            .flat_map(expand_nonpositive)
            .map(|p| -p)
            .collect::<Vec<_>>();
        let at_zero = mirrored.iter().filter(|&&p| p == 0.0).count() as u128;
        let mut pts: Vec<f64> = mirrored.into_iter().filter(|&p| p > 0.0).collect();
        pts.sort_by(f64::total_cmp);
        let neg = PointRuns::from_points(&pts);
        total += integrate_positive(neg.runs(), at_zero, a, (-hi).max(0.0), -lo, segs)?;
    }
    Ok(total)
}

/// Points `≤ 0` of a run, listed explicitly (negative data is expected to be modest).
fn expand_nonpositive(r: &Run) -> Vec<f64> {
    if r.start > 0.0 {
        return Vec::new();
    }
    let n = if r.count == 1 { 1 } else { (((-r.start) / r.step).floor() as u128 + 1).min(r.count) };
    (0..n).map(|j| r.start + j as f64 * r.step).collect()
}

/// Portion of each run satisfying `keep` (monotone in position).
fn clip_runs(runs: &[Run], keep: impl Fn(f64) -> bool) -> Vec<Run> {
    runs.iter()
        .filter_map(|r| {
            if keep(r.start) {
                return Some(*r);
            }
            if r.count == 1 || !keep(r.last()) {
                return None;
            }
            let mut skip = ((-r.start) / r.step).floor() as u128;
            while !keep(r.start + skip as f64 * r.step) {
                skip += 1;
            }
            Some(Run { start: r.start + skip as f64 * r.step, step: r.step, count: r.count - skip })
        })
        .collect()
}

/// `∫_{x0}^{x1} |e0 - a (x - x0)| / (1 + x²) dx`.
fn segment(x0: f64, x1: f64, e0: f64, a: f64) -> f64 {
    if x1 <= x0 {
        return 0.0;
    }
    let root = x0 + e0 / a;
    if root > x0 && root < x1 {
        return signed_segment(x0, root, e0, a).abs() + signed_segment(root, x1, 0.0, a).abs();
    }
    signed_segment(x0, x1, e0, a).abs()
}

/// `∫_{x0}^{x1} (e0 - a (x - x0)) / (1 + x²) dx` for `0 ≤ x0 < x1`.
fn signed_segment(x0: f64, x1: f64, e0: f64, a: f64) -> f64 {
    let m = e0 + a * x0;
    m * atan_diff(x0, x1) - 0.5 * a * ln_ratio(x0, x1)
}

fn atan_diff(x0: f64, x1: f64) -> f64 {
    let d = 1.0 + x0 * x1;
    if d > 0.0 {
        ((x1 - x0) / d).atan()
    } else {
        x1.atan() - x0.atan()
    }
}

/// `ln((1 + x1²) / (1 + x0²))`.
fn ln_ratio(x0: f64, x1: f64) -> f64 {
    if x1.abs() > 1e150 || x0.abs() > 1e150 {
        return 2.0 * (x1.abs() / x0.abs()).ln();
    }
    ((x1 - x0) * (x1 + x0) / (1.0 + x0 * x0)).ln_1p()
}

fn weight(x: f64) -> f64 {
    1.0 / (1.0 + x * x)
}

const EXACT_CAP: u128 = 4096;
const AMBIGUOUS_CAP: u128 = 50_000_000;

/// Integral over a block of `m` unit segments `[x0 + i h, x0 + (i+1) h)` on which
/// `e` starts at `e0 + i (1 - a h)` and decreases with slope `a`.
fn block(x0: f64, h: f64, m: u128, e0: f64, a: f64, segs: &mut u64) -> Result<f64> {
    let delta = 1.0 - a * h;
    let exact = |from: u128, to: u128, segs: &mut u64| {
        let mut acc = NeumaierSum::new();
        for i in from..to {
            let xs = x0 + i as f64 * h;
            acc += segment(xs, xs + h, e0 + i as f64 * delta, a);
        }
        *segs += (to - from) as u64;
        acc.sum()
    };
    if m <= EXACT_CAP {
        return Ok(exact(0, m, segs));
    }
    // walk out far enough that the smooth weight varies slowly over one step
    let warm = if x0 < 1024.0 * h { (((1024.0 * h - x0) / h).ceil() as u128).min(m) } else { 0 };
    let mut acc = NeumaierSum::new();
    acc += exact(0, warm, segs);
    if warm == m {
        return Ok(acc.sum());
    }
    let y0 = x0 + warm as f64 * h;
    let f0 = e0 + warm as f64 * delta;
    let rest = m - warm;
    if delta.abs() <= 1e-14 {
        acc += periodic(y0, h, rest, f0, a);
        return Ok(acc.sum());
    }
    // segment i is sign-ambiguous when 0 < f0 + i δ < a h
    let (ia, ib) = {
        let r0 = -f0 / delta;
        let r1 = (a * h - f0) / delta;
        let (lo, hi) = if r0 < r1 { (r0, r1) } else { (r1, r0) };
        let lo = lo.floor().max(0.0);
        let hi = hi.ceil().max(0.0);
        let clamp = |v: f64| if v >= rest as f64 { rest } else { v as u128 };
        (clamp(lo), clamp(hi + 1.0))
    };
    if ib - ia > AMBIGUOUS_CAP {
        return Err(Error::Range(format!(
            "{} sign-ambiguous segments near a ≈ 1/step; use a window closer to the sign change",
            ib - ia
        )));
    }
    let sub = |from: u128, to: u128| -> f64 {
        if to <= from {
            return 0.0;
        }
        let xa = y0 + from as f64 * h;
        let xb = y0 + to as f64 * h;
        let fa = f0 + from as f64 * delta;
        // sign of e over the whole sub-block is the sign at its first segment midpoint
        let sign = if fa - 0.5 * a * h >= 0.0 { 1.0 } else { -1.0 };
        sign * sawtooth_linear(xa, xb, h, fa, a)
    };
    acc += sub(0, ia);
    let shift = warm;
    let mut s = 0;
    acc += exact(shift + ia, shift + ib, &mut s);
    *segs += s;
    acc += sub(ib, rest);
    Ok(acc.sum())
}

/// Signed `∫ e w` over `[xa, xb]` where `e = f + floor((x - xa)/h) - a (x - xa)`.
fn sawtooth_linear(xa: f64, xb: f64, h: f64, f: f64, a: f64) -> f64 {
    // e = (f - a xa + xa/h... ) written around xa to keep the constant small:
    // e(x) = f + (x - xa)/h - a (x - xa) - σ(x),  σ = frac((x - xa)/h)
    let slope = 1.0 / h - a;
    let dat = atan_diff(xa, xb);
    let linear = signed_segment(xa, xb, f, -slope);
    let saw = 0.5 * dat + h / 12.0 * (weight(xb) - weight(xa));
    linear - saw
}

/// `∫ |e| w` over `m` periods when `a h = 1`, so `e` repeats each period.
fn periodic(y0: f64, h: f64, m: u128, f0: f64, a: f64) -> f64 {
    // g(t) = |f0 - a t| on [0, h)
    let (mut p0, mut p1) = (0.0, 0.0);
    let mut piece = |t0: f64, t1: f64| {
        // ∫ (f0 - a t) and ∫ t (f0 - a t) over [t0, t1], then absolute value by sign
        let i0 = f0 * (t1 - t0) - 0.5 * a * (t1 * t1 - t0 * t0);
        let i1 = 0.5 * f0 * (t1 * t1 - t0 * t0) - a / 3.0 * (t1.powi(3) - t0.powi(3));
        let sign = if f0 - a * 0.5 * (t0 + t1) >= 0.0 { 1.0 } else { -1.0 };
        p0 += sign * i0;
        p1 += sign * i1;
    };
    let root = f0 / a;
    if root > 0.0 && root < h {
        piece(0.0, root);
        piece(root, h);
    } else {
        piece(0.0, h);
    }
    let y1 = y0 + m as f64 * h;
    (p0 / h) * atan_diff(y0, y1) + (p1 / h - p0 / 2.0) * (weight(y1) - weight(y0))
}

/// `∫_u^v |n(x) - a x| w(x) dx` on `0 ≤ u < v`, with `n(0) = base` and the runs all positive.
fn integrate_positive(runs: &[Run], base: u128, a: f64, u: f64, v: f64, segs: &mut u64) -> Result<f64> {
    let mut acc = NeumaierSum::new();
    if v <= u {
        return Ok(0.0);
    }
    // state: e(x^+) at the last event position x
    let mut x = 0.0;
    let mut e = base as f64;
    let flat_to = |x: &mut f64, e: &mut f64, y: f64, acc: &mut NeumaierSum, segs: &mut u64| {
        let s = x.max(u);
        let t = y.min(v);
        if t > s {
            *acc += segment(s, t, *e - a * (s - *x), a);
            *segs += 1;
        }
        *e -= a * (y - *x);
        *x = y;
    };
    for r in runs {
        if r.start > v {
            break;
        }
        flat_to(&mut x, &mut e, r.start, &mut acc, segs);
        e += 1.0;
        if r.count == 1 {
            continue;
        }
        let h = r.step;
        let delta = 1.0 - a * h;
        let nseg = r.count - 1;
        let es = e;
        let last = r.last();
        // fully covered segments [j_lo, j_hi)
        let j_lo = if u <= r.start { 0 } else { (((u - r.start) / h).ceil() as u128).min(nseg) };
        let j_hi = if v >= last { nseg } else { (((v - r.start) / h).floor() as u128).min(nseg) };
        let at = |j: u128| (r.start + j as f64 * h, es + j as f64 * delta);
        if j_lo > 0 {
            let (xs, ev) = at(j_lo - 1);
            let s = xs.max(u);
            acc += segment(s, (xs + h).min(v), ev - a * (s - xs), a);
            *segs += 1;
        }
        if j_hi > j_lo {
            let (xs, ev) = at(j_lo);
            acc += block(xs, h, j_hi - j_lo, ev, a, segs)?;
        }
        if j_hi < nseg && j_hi >= j_lo {
            let (xs, ev) = at(j_hi);
            let s = xs.max(u);
            acc += segment(s, (xs + h).min(v), ev - a * (s - xs), a);
            *segs += 1;
        }
        if v < last {
            return Ok(acc.sum());
        }
        x = last;
        e = es + nseg as f64 * delta;
    }
    flat_to(&mut x, &mut e, v, &mut acc, segs);
    Ok(acc.sum())
}
