//! Time scales: closed subsets of the reals that are unbounded above.
//!
//! A [`TimeScale`] is a finite, increasing list of [`Block`]s (closed intervals
//! and isolated points) followed by an infinite [`Tail`]. Jump operators,
//! graininess and point classification are computed piecewise: every query is
//! first located in a block (binary search) or in the tail (closed form, or a
//! walk for generated tails).
//!
//! Membership is decided up to an absolute snap tolerance so that decimal
//! input such as `0.1 * 3` lands on lattice points. Every operation returns the
//! canonical representative of the point it found, never the raw input.

use std::fmt;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default absolute tolerance used to match floating-point input to scale points.
pub const DEFAULT_SNAP: f64 = 1e-12;

/// Number of generator queries that are checked for strict growth.
const GENERATOR_CHECKS: usize = 10_000;

/// A bounded building block of a time scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Block {
    Interval { lo: f64, hi: f64 },
    Point(f64),
}

impl Block {
    pub fn lo(&self) -> f64 {
        match *self {
            Block::Interval { lo, .. } => lo,
            Block::Point(p) => p,
        }
    }

    pub fn hi(&self) -> f64 {
        match *self {
            Block::Interval { hi, .. } => hi,
            Block::Point(p) => p,
        }
    }
}

/// Supplies the points of a discrete, strictly increasing, unbounded tail.
///
/// `successor(p)` is only ever called with `p` equal to `first()` or to a value
/// previously returned by `successor`.
pub trait PointGenerator: Send + Sync {
    fn first(&self) -> f64;
    fn successor(&self, p: f64) -> f64;
    fn name(&self) -> &str {
        "generated"
    }
}

/// A tail backed by a user [`PointGenerator`].
///
/// Strict growth is trusted, but the first `10^4` successor queries are checked.
#[derive(Clone)]
pub struct GeneratedTail {
    generator: Arc<dyn PointGenerator>,
    checked: Arc<AtomicUsize>,
}

impl GeneratedTail {
    pub fn new<G: PointGenerator + 'static>(generator: G) -> Self {
        Self {
            generator: Arc::new(generator),
            checked: Arc::new(AtomicUsize::new(0)),
        }
    }

    pub fn first(&self) -> f64 {
        self.generator.first()
    }

    fn successor(&self, p: f64) -> Result<f64> {
        let next = self.generator.successor(p);
        if !next.is_finite() {
            return Err(Error::NonMonotoneGenerator(p));
        }
        if self.checked.load(Ordering::Relaxed) < GENERATOR_CHECKS {
            self.checked.fetch_add(1, Ordering::Relaxed);
            if next <= p {
                return Err(Error::NonMonotoneGenerator(p));
            }
        }
        Ok(next)
    }

    /// Walks the generated points and returns the last point `<= t + tol`
    /// together with its successor.
    fn bracket(&self, t: f64, tol: f64) -> Result<(f64, f64)> {
        let mut p = self.first();
        let mut next = self.successor(p)?;
        while next <= t + tol {
            p = next;
            next = self.successor(p)?;
        }
        Ok((p, next))
    }
}

impl fmt::Debug for GeneratedTail {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GeneratedTail")
            .field("name", &self.generator.name())
            .field("first", &self.generator.first())
            .finish()
    }
}

/// The unbounded part of a time scale.
#[derive(Debug, Clone)]
pub enum Tail {
    /// `[start, inf)`.
    HalfLine { start: f64 },
    /// `{start + k * step : k >= 0}`.
    Arithmetic { start: f64, step: f64 },
    /// `{start * ratio^k : k >= 0}`, the q-scale when `start = 1`.
    Geometric { start: f64, ratio: f64 },
    /// `union over k >= 0 of [start + k * period, start + k * period + length]`.
    Periodic { start: f64, length: f64, period: f64 },
    Generated(GeneratedTail),
}

impl Tail {
    pub fn start(&self) -> f64 {
        match self {
            Tail::HalfLine { start }
            | Tail::Arithmetic { start, .. }
            | Tail::Geometric { start, .. }
            | Tail::Periodic { start, .. } => *start,
            Tail::Generated(g) => g.first(),
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidScale(msg.to_string()));
        if !self.start().is_finite() {
            return bad("tail start must be finite");
        }
        match *self {
            Tail::Arithmetic { step, .. } if !(step.is_finite() && step > 0.0) => {
                bad("arithmetic step must be positive")
            }
            Tail::Geometric { start, .. } if !(start > 0.0) => {
                bad("geometric start must be positive")
            }
            Tail::Geometric { ratio, .. } if !(ratio.is_finite() && ratio > 1.0) => {
                bad("geometric ratio must exceed 1")
            }
            Tail::Periodic { length, period, .. }
                if !(length > 0.0 && period.is_finite() && length < period) =>
            {
                bad("periodic tail needs 0 < length < period")
            }
            _ => Ok(()),
        }
    }

    fn arith_point(start: f64, step: f64, k: i64) -> f64 {
        start + k as f64 * step
    }

    fn geo_point(start: f64, ratio: f64, k: i64) -> f64 {
        start * ratio.powi(k as i32)
    }

    /// Index of the last lattice point `<= t + tol` for a lattice given by `point`.
    fn floor_index(guess: f64, t: f64, tol: f64, point: impl Fn(i64) -> f64) -> i64 {
        let mut k = if guess.is_finite() { guess.floor().max(0.0) as i64 } else { 0 };
        while k > 0 && point(k) > t + tol {
            k -= 1;
        }
        while point(k + 1) <= t + tol {
            k += 1;
        }
        k
    }

    /// Index of the periodic block whose left end is the last one `<= t + tol`.
    fn periodic_index(start: f64, period: f64, t: f64, tol: f64) -> i64 {
        let base = |k: i64| start + k as f64 * period;
        Self::floor_index((t - start) / period, t, tol, base)
    }

    /// Canonical tail point within `tol` of `t`, if any.
    fn snap(&self, t: f64, tol: f64) -> Result<Option<f64>> {
        let start = self.start();
        if t < start - tol {
            return Ok(None);
        }
        if (t - start).abs() <= tol {
            return Ok(Some(start));
        }
        let found = match *self {
            Tail::HalfLine { .. } => Some(t),
            Tail::Arithmetic { start, step } => {
                let k = ((t - start) / step).round() as i64;
                let p = Self::arith_point(start, step, k);
                ((p - t).abs() <= tol).then_some(p)
            }
            Tail::Geometric { start, ratio } => {
                let k = ((t / start).ln() / ratio.ln()).round().max(0.0) as i64;
                let p = Self::geo_point(start, ratio, k);
                ((p - t).abs() <= tol).then_some(p)
            }
            Tail::Periodic {
                start,
                length,
                period,
            } => {
                let k = Self::periodic_index(start, period, t, tol);
                let lo = start + k as f64 * period;
                let hi = lo + length;
                if (t - lo).abs() <= tol {
                    Some(lo)
                } else if (t - hi).abs() <= tol {
                    Some(hi)
                } else if t > lo && t < hi {
                    Some(t)
                } else {
                    None
                }
            }
            Tail::Generated(ref g) => {
                let (p, next) = g.bracket(t, tol)?;
                if (p - t).abs() <= tol {
                    Some(p)
                } else if (next - t).abs() <= tol {
                    Some(next)
                } else {
                    None
                }
            }
        };
        Ok(found)
    }

    /// `inf {s in tail : s > p}` for a canonical tail point `p`.
    fn sigma(&self, p: f64, tol: f64) -> Result<f64> {
        Ok(match *self {
            Tail::HalfLine { .. } => p,
            Tail::Arithmetic { start, step } => {
                let k = ((p - start) / step).round() as i64;
                Self::arith_point(start, step, k + 1)
            }
            Tail::Geometric { start, ratio } => {
                let k = ((p / start).ln() / ratio.ln()).round() as i64;
                Self::geo_point(start, ratio, k + 1)
            }
            Tail::Periodic {
                start,
                length,
                period,
            } => {
                let k = Self::periodic_index(start, period, p, tol);
                let lo = start + k as f64 * period;
                if p < lo + length - tol {
                    p
                } else {
                    start + (k + 1) as f64 * period
                }
            }
            Tail::Generated(ref g) => g.bracket(p, tol)?.1,
        })
    }

    /// `sup {s in tail : s < p}`, or `None` when `p` is the tail start.
    fn rho(&self, p: f64, tol: f64) -> Result<Option<f64>> {
        let start = self.start();
        if (p - start).abs() <= tol {
            return Ok(None);
        }
        Ok(Some(match *self {
            Tail::HalfLine { .. } => p,
            Tail::Arithmetic { start, step } => {
                let k = ((p - start) / step).round() as i64;
                Self::arith_point(start, step, k - 1)
            }
            Tail::Geometric { start, ratio } => {
                let k = ((p / start).ln() / ratio.ln()).round() as i64;
                Self::geo_point(start, ratio, k - 1)
            }
            Tail::Periodic {
                start,
                length,
                period,
            } => {
                let k = Self::periodic_index(start, period, p, tol);
                let lo = start + k as f64 * period;
                if p > lo + tol {
                    p
                } else {
                    start + (k - 1) as f64 * period + length
                }
            }
            Tail::Generated(ref g) => {
                let mut prev = g.first();
                let mut cur = g.successor(prev)?;
                while cur < p - tol {
                    prev = cur;
                    cur = g.successor(prev)?;
                }
                prev
            }
        }))
    }

    /// Largest tail point `<= t`; requires `t >= start - tol`.
    fn floor(&self, t: f64, tol: f64) -> Result<f64> {
        if let Some(p) = self.snap(t, tol)? {
            return Ok(p);
        }
        Ok(match *self {
            Tail::HalfLine { .. } => t,
            Tail::Arithmetic { start, step } => {
                let k = Self::floor_index((t - start) / step, t, tol, |k| {
                    Self::arith_point(start, step, k)
                });
                Self::arith_point(start, step, k)
            }
            Tail::Geometric { start, ratio } => {
                let k = Self::floor_index((t / start).ln() / ratio.ln(), t, tol, |k| {
                    Self::geo_point(start, ratio, k)
                });
                Self::geo_point(start, ratio, k)
            }
            Tail::Periodic {
                start,
                length,
                period,
            } => {
                let k = Self::periodic_index(start, period, t, tol);
                start + k as f64 * period + length
            }
            Tail::Generated(ref g) => g.bracket(t, tol)?.0,
        })
    }

    /// Smallest tail point `>= t`.
    fn ceil(&self, t: f64, tol: f64) -> Result<f64> {
        let start = self.start();
        if t <= start + tol {
            return Ok(start);
        }
        if let Some(p) = self.snap(t, tol)? {
            return Ok(p);
        }
        let below = self.floor(t, tol)?;
        self.sigma(below, tol)
    }

    /// Right end of the maximal dense interval that contains the right-dense point `p`.
    fn dense_end(&self, p: f64, tol: f64) -> f64 {
        match *self {
            Tail::HalfLine { .. } => f64::INFINITY,
            Tail::Periodic {
                start,
                length,
                period,
            } => start + Self::periodic_index(start, period, p, tol) as f64 * period + length,
            _ => p,
        }
    }

    fn is_discrete(&self) -> bool {
        matches!(
            self,
            Tail::Arithmetic { .. } | Tail::Geometric { .. } | Tail::Generated(_)
        )
    }
}

/// Which side of a point the scale approaches it from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Side {
    Dense,
    Scattered,
}

/// Classification of a point by its jump operators.
///
/// `left` is `None` at the minimum of the scale, which has no left neighbourhood.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PointClass {
    pub right: Side,
    pub left: Option<Side>,
}

impl PointClass {
    pub fn right_scattered(&self) -> bool {
        self.right == Side::Scattered
    }

    pub fn right_dense(&self) -> bool {
        self.right == Side::Dense
    }

    pub fn left_scattered(&self) -> bool {
        self.left == Some(Side::Scattered)
    }

    pub fn left_dense(&self) -> bool {
        self.left == Some(Side::Dense)
    }

    /// Right-scattered, and left-scattered or without a left neighbourhood.
    pub fn isolated(&self) -> bool {
        self.right_scattered() && self.left != Some(Side::Dense)
    }

    /// Right-dense, and left-dense or without a left neighbourhood.
    pub fn dense(&self) -> bool {
        self.right_dense() && self.left != Some(Side::Scattered)
    }
}

/// One piece of the decomposition of `[a, b]` in a time scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Segment {
    /// A closed subinterval of the scale with zero graininess in its interior.
    DenseRun { lo: f64, hi: f64 },
    /// A right-scattered point with `next = sigma(at)` and `gap = mu(at)`.
    Jump { at: f64, next: f64, gap: f64 },
}

impl Segment {
    pub fn start(&self) -> f64 {
        match *self {
            Segment::DenseRun { lo, .. } => lo,
            Segment::Jump { at, .. } => at,
        }
    }

    pub fn end(&self) -> f64 {
        match *self {
            Segment::DenseRun { hi, .. } => hi,
            Segment::Jump { next, .. } => next,
        }
    }

    pub fn length(&self) -> f64 {
        match *self {
            Segment::DenseRun { lo, hi } => hi - lo,
            Segment::Jump { gap, .. } => gap,
        }
    }
}

/// Controls what [`TimeScale::enumerate_points`] does when it meets a dense run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Enumeration {
    /// Every point from `a` on must be isolated; a dense run is an error.
    Full,
    /// Only right-scattered anchor points are returned; dense runs are skipped.
    ScatteredAnchors,
}

/// A closed subset of the reals, unbounded above.
#[derive(Debug, Clone)]
pub struct TimeScale {
    blocks: Vec<Block>,
    tail: Tail,
    snap: f64,
}

enum Location {
    Block(usize),
    Tail,
}

impl TimeScale {
    /// Builds a scale in canonical form.
    ///
    /// Blocks are sorted; overlapping or touching blocks are merged and points
    /// inside intervals are absorbed. Every block must end strictly before the
    /// tail starts.
    pub fn new(blocks: Vec<Block>, tail: Tail) -> Result<Self> {
        Self::with_snap(blocks, tail, DEFAULT_SNAP)
    }

    pub fn with_snap(mut blocks: Vec<Block>, tail: Tail, snap: f64) -> Result<Self> {
        tail.validate()?;
        if !(snap >= 0.0 && snap.is_finite()) {
            return Err(Error::InvalidScale("snap tolerance must be finite and >= 0".into()));
        }
        for b in &blocks {
            if !(b.lo().is_finite() && b.hi().is_finite() && b.lo() <= b.hi()) {
                return Err(Error::InvalidScale(format!("malformed block {b:?}")));
            }
        }
        blocks.sort_by(|x, y| x.lo().total_cmp(&y.lo()));
        let mut merged: Vec<Block> = Vec::with_capacity(blocks.len());
        for b in blocks {
            let b = match b {
                Block::Interval { lo, hi } if hi - lo <= snap => Block::Point(lo),
                other => other,
            };
            match merged.last_mut() {
                Some(last) if b.lo() <= last.hi() + snap => {
                    let lo = last.lo();
                    let hi = last.hi().max(b.hi());
                    *last = if hi - lo <= snap {
                        Block::Point(lo)
                    } else {
                        Block::Interval { lo, hi }
                    };
                }
                _ => merged.push(b),
            }
        }
        if let Some(last) = merged.last() {
            if last.hi() >= tail.start() - snap {
                return Err(Error::InvalidScale(format!(
                    "tail start {} must exceed the last block end {}",
                    tail.start(),
                    last.hi()
                )));
            }
        }
        Ok(Self {
            blocks: merged,
            tail,
            snap,
        })
    }

    /// `[start, inf)`.
    pub fn reals(start: f64) -> Self {
        Self::tail_only(Tail::HalfLine { start })
    }

    /// `{start, start + 1, ...}`.
    pub fn integers(start: f64) -> Self {
        Self::tail_only(Tail::Arithmetic { start, step: 1.0 })
    }

    pub fn arithmetic(start: f64, step: f64) -> Result<Self> {
        Self::new(Vec::new(), Tail::Arithmetic { start, step })
    }

    pub fn geometric(start: f64, ratio: f64) -> Result<Self> {
        Self::new(Vec::new(), Tail::Geometric { start, ratio })
    }

    pub fn periodic(start: f64, length: f64, period: f64) -> Result<Self> {
        Self::new(
            Vec::new(),
            Tail::Periodic {
                start,
                length,
                period,
            },
        )
    }

    /// `union over k >= 0 of [2k, 2k + 1]`.
    pub fn hybrid() -> Self {
        Self::tail_only(Tail::Periodic {
            start: 0.0,
            length: 1.0,
            period: 2.0,
        })
    }

    pub fn generated<G: PointGenerator + 'static>(generator: G) -> Self {
        Self::tail_only(Tail::Generated(GeneratedTail::new(generator)))
    }

    fn tail_only(tail: Tail) -> Self {
        Self {
            blocks: Vec::new(),
            tail,
            snap: DEFAULT_SNAP,
        }
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn tail(&self) -> &Tail {
        &self.tail
    }

    pub fn snap_tolerance(&self) -> f64 {
        self.snap
    }

    /// Effective matching tolerance at `t`: the absolute snap, widened to a few
    /// ulps for large magnitudes.
    fn tol(&self, t: f64) -> f64 {
        self.snap.max(t.abs() * 4.0 * f64::EPSILON)
    }

    pub fn min(&self) -> f64 {
        self.blocks
            .first()
            .map(Block::lo)
            .unwrap_or_else(|| self.tail.start())
    }

    fn block_upto(&self, t: f64, tol: f64) -> Option<usize> {
        let n = self.blocks.partition_point(|b| b.lo() <= t + tol);
        n.checked_sub(1)
    }

    fn locate(&self, t: f64) -> Result<Option<(Location, f64)>> {
        if !t.is_finite() {
            return Ok(None);
        }
        let tol = self.tol(t);
        if t >= self.tail.start() - tol {
            return Ok(self.tail.snap(t, tol)?.map(|p| (Location::Tail, p)));
        }
        let Some(i) = self.block_upto(t, tol) else {
            return Ok(None);
        };
        let found = match self.blocks[i] {
            Block::Point(p) => ((p - t).abs() <= tol).then_some(p),
            Block::Interval { lo, hi } => {
                if (t - lo).abs() <= tol {
                    Some(lo)
                } else if (t - hi).abs() <= tol {
                    Some(hi)
                } else if t > lo && t < hi {
                    Some(t)
                } else {
                    None
                }
            }
        };
        Ok(found.map(|p| (Location::Block(i), p)))
    }

    fn require(&self, t: f64) -> Result<(Location, f64)> {
        self.locate(t)?.ok_or(Error::NotInScale(t))
    }

    /// True iff `t` lies in a block or in the tail (up to the snap tolerance).
    pub fn contains(&self, t: f64) -> bool {
        matches!(self.locate(t), Ok(Some(_)))
    }

    /// The canonical scale point matching `t`.
    pub fn snap(&self, t: f64) -> Result<f64> {
        Ok(self.require(t)?.1)
    }

    /// Forward jump `sigma(t) = inf {s in T : s > t}`.
    pub fn sigma(&self, t: f64) -> Result<f64> {
        let (loc, p) = self.require(t)?;
        let tol = self.tol(p);
        match loc {
            Location::Tail => self.tail.sigma(p, tol),
            Location::Block(i) => {
                if let Block::Interval { hi, .. } = self.blocks[i] {
                    if p < hi {
                        return Ok(p);
                    }
                }
                Ok(self
                    .blocks
                    .get(i + 1)
                    .map(Block::lo)
                    .unwrap_or_else(|| self.tail.start()))
            }
        }
    }

    /// Backward jump `rho(t) = sup {s in T : s < t}`; the minimum maps to itself.
    pub fn rho(&self, t: f64) -> Result<f64> {
        let (loc, p) = self.require(t)?;
        let tol = self.tol(p);
        match loc {
            Location::Tail => match self.tail.rho(p, tol)? {
                Some(r) => Ok(r),
                None => Ok(self.blocks.last().map(Block::hi).unwrap_or(p)),
            },
            Location::Block(i) => {
                if let Block::Interval { lo, .. } = self.blocks[i] {
                    if p > lo {
                        return Ok(p);
                    }
                }
                Ok(if i == 0 { p } else { self.blocks[i - 1].hi() })
            }
        }
    }

    /// Graininess `mu(t) = sigma(t) - t`.
    pub fn graininess(&self, t: f64) -> Result<f64> {
        let p = self.snap(t)?;
        Ok(self.sigma(p)? - p)
    }

    pub fn classify(&self, t: f64) -> Result<PointClass> {
        let p = self.snap(t)?;
        let right = if self.sigma(p)? > p {
            Side::Scattered
        } else {
            Side::Dense
        };
        let left = if p == self.min() {
            None
        } else if self.rho(p)? < p {
            Some(Side::Scattered)
        } else {
            Some(Side::Dense)
        };
        Ok(PointClass { right, left })
    }

    /// Largest scale point `<= t`.
    pub fn floor(&self, t: f64) -> Result<f64> {
        let tol = self.tol(t);
        if !t.is_finite() || t < self.min() - tol {
            return Err(Error::BelowMinimum(t));
        }
        if t >= self.tail.start() - tol {
            return self.tail.floor(t, tol);
        }
        if let Some((_, p)) = self.locate(t)? {
            return Ok(p);
        }
        let i = self.block_upto(t, tol).ok_or(Error::BelowMinimum(t))?;
        Ok(self.blocks[i].hi())
    }

    /// Smallest scale point `>= t`.
    pub fn ceil(&self, t: f64) -> Result<f64> {
        if t.is_nan() {
            return Err(Error::NotInScale(t));
        }
        let tol = self.tol(t);
        if t <= self.min() + tol {
            return Ok(self.min());
        }
        if t >= self.tail.start() - tol {
            return self.tail.ceil(t, tol);
        }
        if let Some((_, p)) = self.locate(t)? {
            return Ok(p);
        }
        let i = self.block_upto(t, tol).ok_or(Error::BelowMinimum(t))?;
        Ok(self
            .blocks
            .get(i + 1)
            .map(Block::lo)
            .unwrap_or_else(|| self.tail.start()))
    }

    /// Right end of the maximal dense interval containing the right-dense point `p`.
    fn dense_end(&self, p: f64) -> Result<f64> {
        match self.require(p)?.0 {
            Location::Tail => Ok(self.tail.dense_end(p, self.tol(p))),
            Location::Block(i) => Ok(self.blocks[i].hi()),
        }
    }

    /// Lazily decomposes `[a, b] ∩ T` into dense runs and jumps.
    pub fn segments(&self, a: f64, b: f64) -> Result<Segments<'_>> {
        let a = self.snap(a)?;
        let b = self.snap(b)?;
        if a > b {
            return Err(Error::ReversedBounds { a, b });
        }
        Ok(Segments {
            scale: self,
            cursor: a,
            end: b,
            failed: false,
        })
    }

    /// Ordered tiling of `[a, b] ∩ T`.
    pub fn decompose(&self, a: f64, b: f64) -> Result<Vec<Segment>> {
        self.segments(a, b)?.collect()
    }

    /// Increasing scale points starting at `a`, at most `limit` of them.
    pub fn enumerate_points(&self, a: f64, limit: usize, mode: Enumeration) -> Result<Vec<f64>> {
        let mut p = self.snap(a)?;
        let mut out = Vec::with_capacity(limit.min(1 << 16));
        while out.len() < limit {
            let next = self.sigma(p)?;
            if next > p {
                out.push(p);
                p = next;
                continue;
            }
            match mode {
                Enumeration::Full => return Err(Error::DenseRun(p)),
                Enumeration::ScatteredAnchors => {
                    let end = self.dense_end(p)?;
                    if !end.is_finite() {
                        break;
                    }
                    p = end;
                }
            }
        }
        Ok(out)
    }

    /// True when every point of `[a, inf)` is isolated.
    pub fn is_discrete_from(&self, a: f64) -> bool {
        let Ok(a) = self.snap(a) else {
            return false;
        };
        let blocks_ok = self
            .blocks
            .iter()
            .filter(|b| b.hi() >= a)
            .all(|b| matches!(b, Block::Point(_)) || b.hi() == a);
        blocks_ok && self.tail.is_discrete()
    }
}

/// Iterator returned by [`TimeScale::segments`].
pub struct Segments<'a> {
    scale: &'a TimeScale,
    cursor: f64,
    end: f64,
    failed: bool,
}

impl Iterator for Segments<'_> {
    type Item = Result<Segment>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.failed || self.cursor >= self.end {
            return None;
        }
        let step = || -> Result<Segment> {
            let cur = self.cursor;
            let next = self.scale.sigma(cur)?;
            if next > cur {
                return Ok(Segment::Jump {
                    at: cur,
                    next,
                    gap: next - cur,
                });
            }
            let hi = self.scale.dense_end(cur)?.min(self.end);
            Ok(Segment::DenseRun { lo: cur, hi })
        };
        match step() {
            Ok(seg) => {
                self.cursor = seg.end();
                Some(Ok(seg))
            }
            Err(e) => {
                self.failed = true;
                Some(Err(e))
            }
        }
    }
}

/// JSON description of a time scale.
///
/// ```json
/// {"kind":"union","blocks":[{"interval":[0,1]},{"point":1.5}],
///  "tail":{"kind":"arithmetic","start":2,"step":1}}
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ScaleDescriptor {
    Reals {
        #[serde(default)]
        start: f64,
    },
    Integers {
        #[serde(default)]
        start: f64,
    },
    Arithmetic {
        start: f64,
        step: f64,
    },
    Geometric {
        start: f64,
        ratio: f64,
    },
    Periodic {
        start: f64,
        length: f64,
        period: f64,
    },
    Union {
        blocks: Vec<BlockDescriptor>,
        tail: Box<ScaleDescriptor>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum BlockDescriptor {
    Interval([f64; 2]),
    Point(f64),
}

impl ScaleDescriptor {
    fn tail(&self) -> Result<Tail> {
        Ok(match *self {
            ScaleDescriptor::Reals { start } => Tail::HalfLine { start },
            ScaleDescriptor::Integers { start } => Tail::Arithmetic { start, step: 1.0 },
            ScaleDescriptor::Arithmetic { start, step } => Tail::Arithmetic { start, step },
            ScaleDescriptor::Geometric { start, ratio } => Tail::Geometric { start, ratio },
            ScaleDescriptor::Periodic {
                start,
                length,
                period,
            } => Tail::Periodic {
                start,
                length,
                period,
            },
            ScaleDescriptor::Union { .. } => {
                return Err(Error::InvalidScale("a union tail cannot itself be a union".into()))
            }
        })
    }

    pub fn build(&self) -> Result<TimeScale> {
        match self {
            ScaleDescriptor::Union { blocks, tail } => {
                let blocks = blocks
                    .iter()
                    .map(|b| match *b {
                        BlockDescriptor::Interval([lo, hi]) => Block::Interval { lo, hi },
                        BlockDescriptor::Point(p) => Block::Point(p),
                    })
                    .collect();
                TimeScale::new(blocks, tail.tail()?)
            }
            simple => TimeScale::new(Vec::new(), simple.tail()?),
        }
    }

    /// Parses a JSON descriptor, or one of the shorthands `reals`, `integers`, `hybrid`.
    pub fn parse(src: &str) -> Result<Self> {
        match src.trim() {
            "reals" => Ok(ScaleDescriptor::Reals { start: 0.0 }),
            "integers" => Ok(ScaleDescriptor::Integers { start: 0.0 }),
            "hybrid" => Ok(ScaleDescriptor::Periodic {
                start: 0.0,
                length: 1.0,
                period: 2.0,
            }),
            json => serde_json::from_str(json)
                .map_err(|e| Error::InvalidScale(format!("bad scale descriptor: {e}"))),
        }
    }
}

impl std::str::FromStr for TimeScale {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ScaleDescriptor::parse(s)?.build()
    }
}
