//! Riemann Δ-sums and Δ-integrals.
//!
//! A bounded integral is assembled from the decomposition of `[a, b]`: every
//! jump contributes `mu(t) f(t)` exactly, every dense run is integrated with a
//! dyadically refined composite midpoint rule. Improper integrals follow
//! `F(A) = ∫_a^A f Δt` along an increasing target sequence until the
//! increments stall.

use std::cell::Cell;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::function::ScaleFunction;
use crate::partition::Partition;
use crate::scale::{Segment, TimeScale};

/// Outcome of a bounded or improper Δ-integral.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntegralResult {
    pub value: f64,
    pub abs_error_estimate: f64,
    pub converged: bool,
    pub evaluations: u64,
    /// Upper limit actually reached (equals `b` for bounded integrals).
    pub truncation_point: f64,
}

/// Composite midpoint rule with dyadic refinement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    /// Refinement levels per dense run; level `k` uses `2^k` cells.
    pub max_levels: u32,
    /// Levels that must be computed before a run may be accepted.
    pub min_levels: u32,
}

impl Default for Quadrature {
    fn default() -> Self {
        Self {
            max_levels: 24,
            min_levels: 4,
        }
    }
}

/// Target sequence `A_k -> inf` for improper integrals.
#[derive(Debug, Clone, PartialEq)]
pub enum Targets {
    /// `a + 1, a + 2, a + 4, ...`, each snapped forward to a scale point.
    Doubling,
    /// Caller-supplied increasing targets, snapped forward to scale points.
    Explicit(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TruncationPolicy {
    pub targets: Targets,
    /// Consecutive increments below the tolerance required to stop.
    pub stall_steps: usize,
    /// Give up once `A - a` exceeds this.
    pub max_offset: f64,
    pub max_evaluations: u64,
    /// Increments are not counted as stalls before this target is reached.
    pub min_target: Option<f64>,
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        Self {
            targets: Targets::Doubling,
            stall_steps: 3,
            max_offset: f64::powi(2.0, 30),
            max_evaluations: 1 << 24,
            min_target: None,
        }
    }
}

/// Per-segment record of a bounded integral, enough to recompute it by hand.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SegmentTrace {
    pub segment: Segment,
    /// Midpoint cells used on a dense run (0 for a jump).
    pub cells: u64,
    pub value: f64,
    pub error: f64,
}

impl SegmentTrace {
    /// The partition points this segment contributes after its start.
    pub fn partition_points(&self) -> Vec<f64> {
        match self.segment {
            Segment::Jump { next, .. } => vec![next],
            Segment::DenseRun { lo, hi } => {
                let n = self.cells.max(1);
                let h = (hi - lo) / n as f64;
                (1..n).map(|i| lo + i as f64 * h).chain([hi]).collect()
            }
        }
    }
}

/// One step `(A_k, F(A_k))` of an improper integral.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TargetTrace {
    pub target: f64,
    pub partial: f64,
    pub increment: f64,
}

/// Δ-integration engine with configurable quadrature and truncation.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DeltaIntegrator {
    pub quadrature: Quadrature,
    pub truncation: TruncationPolicy,
}

struct Counted<'f, F: ?Sized> {
    f: &'f F,
    count: Cell<u64>,
}

impl<'f, F: Fn(f64) -> f64 + ?Sized> Counted<'f, F> {
    fn new(f: &'f F) -> Self {
        Self {
            f,
            count: Cell::new(0),
        }
    }

    #[inline]
    fn eval(&self, t: f64) -> Result<f64> {
        self.count.set(self.count.get() + 1);
        let v = (self.f)(t);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFinite(t))
        }
    }
}

struct RunResult {
    value: f64,
    error: f64,
    cells: u64,
    converged: bool,
}

impl DeltaIntegrator {
    pub fn new(quadrature: Quadrature, truncation: TruncationPolicy) -> Self {
        Self {
            quadrature,
            truncation,
        }
    }

    /// `∫_a^b f(t) Δt` to absolute tolerance `tol`.
    ///
    /// A dense run receives `tol * length / (b - a)` of the budget; jumps are
    /// exact. Non-convergence of a run is reported through `converged`.
    pub fn integrate<F>(&self, scale: &TimeScale, f: &F, a: f64, b: f64, tol: f64) -> Result<IntegralResult>
    where
        F: Fn(f64) -> f64 + ?Sized,
    {
        let counted = Counted::new(f);
        self.bounded(scale, &counted, a, b, tol, None)
    }

    /// Like [`integrate`](Self::integrate), also returning one trace entry per segment.
    pub fn integrate_traced<F>(
        &self,
        scale: &TimeScale,
        f: &F,
        a: f64,
        b: f64,
        tol: f64,
    ) -> Result<(IntegralResult, Vec<SegmentTrace>)>
    where
        F: Fn(f64) -> f64 + ?Sized,
    {
        let counted = Counted::new(f);
        let mut trace = Vec::new();
        let res = self.bounded(scale, &counted, a, b, tol, Some(&mut trace))?;
        Ok((res, trace))
    }

    fn bounded<F>(
        &self,
        scale: &TimeScale,
        f: &Counted<'_, F>,
        a: f64,
        b: f64,
        tol: f64,
        mut trace: Option<&mut Vec<SegmentTrace>>,
    ) -> Result<IntegralResult>
    where
        F: Fn(f64) -> f64 + ?Sized,
    {
        if !(tol > 0.0) {
            return Err(Error::NonPositiveTolerance(tol));
        }
        let a = scale.snap(a)?;
        let b = scale.snap(b)?;
        if a > b {
            return Err(Error::ReversedBounds { a, b });
        }
        let start_count = f.count.get();
        let total = b - a;
        let mut value = 0.0;
        let mut error = 0.0;
        let mut converged = true;
        for seg in scale.segments(a, b)? {
            let seg = seg?;
            let (v, e, cells) = match seg {
                Segment::Jump { at, gap, .. } => (f.eval(at)? * gap, 0.0, 0),
                Segment::DenseRun { lo, hi } => {
                    let share = tol * (hi - lo) / total;
                    let run = self.midpoint(f, lo, hi, share)?;
                    converged &= run.converged;
                    (run.value, run.error, run.cells)
                }
            };
            value += v;
            error += e;
            if let Some(t) = trace.as_deref_mut() {
                t.push(SegmentTrace {
                    segment: seg,
                    cells,
                    value: v,
                    error: e,
                });
            }
        }
        Ok(IntegralResult {
            value,
            abs_error_estimate: error,
            converged,
            evaluations: f.count.get() - start_count,
            truncation_point: b,
        })
    }

    fn midpoint<F>(&self, f: &Counted<'_, F>, lo: f64, hi: f64, tol: f64) -> Result<RunResult>
    where
        F: Fn(f64) -> f64 + ?Sized,
    {
        let len = hi - lo;
        let sum = |n: u64| -> Result<f64> {
            let h = len / n as f64;
            let mut s = 0.0;
            for i in 0..n {
                s += f.eval(lo + (i as f64 + 0.5) * h)?;
            }
            Ok(s * h)
        };
        let mut prev = sum(1)?;
        let mut diff = f64::INFINITY;
        for level in 1..=self.quadrature.max_levels {
            let n = 1u64 << level;
            let cur = sum(n)?;
            diff = (cur - prev).abs();
            prev = cur;
            if level >= self.quadrature.min_levels && diff < tol {
                return Ok(RunResult {
                    value: cur,
                    error: diff,
                    cells: n,
                    converged: true,
                });
            }
        }
        Ok(RunResult {
            value: prev,
            error: diff,
            cells: 1 << self.quadrature.max_levels,
            converged: false,
        })
    }

    /// Improper integral of the first kind `∫_a^inf f(t) Δt`.
    ///
    /// Stops at the first target after which `|F(A_{k+1}) - F(A_k)| < tol` held
    /// for `stall_steps` consecutive steps. Divergence or an exhausted budget
    /// yields `converged = false` with the last partial value.
    pub fn improper<F>(&self, scale: &TimeScale, f: &F, a: f64, tol: f64) -> Result<IntegralResult>
    where
        F: Fn(f64) -> f64 + ?Sized,
    {
        self.improper_inner(scale, f, a, tol, None)
    }

    pub fn improper_traced<F>(
        &self,
        scale: &TimeScale,
        f: &F,
        a: f64,
        tol: f64,
    ) -> Result<(IntegralResult, Vec<TargetTrace>)>
    where
        F: Fn(f64) -> f64 + ?Sized,
    {
        let mut trace = Vec::new();
        let res = self.improper_inner(scale, f, a, tol, Some(&mut trace))?;
        Ok((res, trace))
    }

    fn improper_inner<F>(
        &self,
        scale: &TimeScale,
        f: &F,
        a: f64,
        tol: f64,
        mut trace: Option<&mut Vec<TargetTrace>>,
    ) -> Result<IntegralResult>
    where
        F: Fn(f64) -> f64 + ?Sized,
    {
        if !(tol > 0.0) {
            return Err(Error::NonPositiveTolerance(tol));
        }
        let policy = &self.truncation;
        let a = scale.snap(a)?;
        let counted = Counted::new(f);
        let mut partial = 0.0;
        let mut quad_error = 0.0;
        let mut quad_ok = true;
        let mut prev = a;
        let mut stalls = 0usize;
        let mut recent: Vec<f64> = Vec::new();
        let mut step = 0usize;
        loop {
            let raw = match &policy.targets {
                Targets::Doubling => {
                    if step >= 1000 {
                        break;
                    }
                    a + f64::powi(2.0, step as i32)
                }
                Targets::Explicit(v) => match v.get(step) {
                    Some(&t) => t,
                    None => break,
                },
            };
            step += 1;
            if raw - a > policy.max_offset {
                break;
            }
            let target = scale.ceil(raw)?;
            if target <= prev {
                continue;
            }
            if counted.count.get() >= policy.max_evaluations {
                break;
            }
            let share = tol * f64::powi(0.5, step.min(1000) as i32);
            let inc = self.bounded(scale, &counted, prev, target, share, None)?;
            quad_ok &= inc.converged;
            quad_error += inc.abs_error_estimate;
            partial += inc.value;
            prev = target;
            if let Some(t) = trace.as_deref_mut() {
                t.push(TargetTrace {
                    target,
                    partial,
                    increment: inc.value,
                });
            }
            let counts = policy.min_target.is_none_or(|m| target >= m);
            if counts && inc.value.abs() < tol {
                stalls += 1;
                recent.push(inc.value.abs());
            } else {
                stalls = 0;
                recent.clear();
            }
            if stalls >= policy.stall_steps {
                let tail = recent.iter().copied().fold(0.0, f64::max);
                return Ok(IntegralResult {
                    value: partial,
                    abs_error_estimate: tail.max(quad_error),
                    converged: quad_ok,
                    evaluations: counted.count.get(),
                    truncation_point: prev,
                });
            }
        }
        Ok(IntegralResult {
            value: partial,
            abs_error_estimate: f64::INFINITY,
            converged: false,
            evaluations: counted.count.get(),
            truncation_point: prev,
        })
    }
}

/// `∫_t^{sigma(t)} f(s) Δs = mu(t) f(t)`, without quadrature.
pub fn single_step_integral<F>(scale: &TimeScale, f: &F, t: f64) -> Result<f64>
where
    F: Fn(f64) -> f64 + ?Sized,
{
    let t = scale.snap(t)?;
    let mu = scale.graininess(t)?;
    if mu == 0.0 {
        return Ok(0.0);
    }
    let v = f(t);
    if !v.is_finite() {
        return Err(Error::NonFinite(t));
    }
    Ok(mu * v)
}

/// `∫_a^b f(t) Δt` with the default integrator.
pub fn delta_integral<F>(scale: &TimeScale, f: &F, a: f64, b: f64, tol: f64) -> Result<IntegralResult>
where
    F: Fn(f64) -> f64 + ?Sized,
{
    DeltaIntegrator::default().integrate(scale, f, a, b, tol)
}

/// `∫_a^inf f(t) Δt` with the default integrator.
pub fn improper_integral<F>(scale: &TimeScale, f: &F, a: f64, tol: f64) -> Result<IntegralResult>
where
    F: Fn(f64) -> f64 + ?Sized,
{
    DeltaIntegrator::default().improper(scale, f, a, tol)
}

/// Rule choosing the tag `xi_i` in `[t_{i-1}, t_i) ∩ T`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Tag {
    Left,
    /// The largest scale point not above `t_{i-1} + theta (t_i - t_{i-1})`, `0 <= theta < 1`.
    Fraction(f64),
}

/// Tagged Riemann sum `S = Σ f(xi_i) (t_i - t_{i-1})`.
pub fn riemann_sum<F>(scale: &TimeScale, p: &Partition, f: &F, tag: Tag) -> Result<f64>
where
    F: Fn(f64) -> f64 + ?Sized,
{
    riemann_sum_with(scale, p, f, |lo, hi| match tag {
        Tag::Left => Ok(lo),
        Tag::Fraction(theta) => scale.floor(lo + theta * (hi - lo)),
    })
}

/// Riemann sum with a caller-supplied tag selector, validated against each cell.
pub fn riemann_sum_with<F, S>(scale: &TimeScale, p: &Partition, f: &F, mut select: S) -> Result<f64>
where
    F: Fn(f64) -> f64 + ?Sized,
    S: FnMut(f64, f64) -> Result<f64>,
{
    let mut sum = 0.0;
    for (lo, hi) in p.cells() {
        let xi = select(lo, hi)?;
        if !(xi >= lo && xi < hi && scale.contains(xi)) {
            return Err(Error::TagOutsideCell { tag: xi, lo, hi });
        }
        let v = f(xi);
        if !v.is_finite() {
            return Err(Error::NonFinite(xi));
        }
        sum += v * (hi - lo);
    }
    Ok(sum)
}

impl ScaleFunction {
    /// `∫_a^b self Δt` with the default integrator.
    pub fn integral(&self, a: f64, b: f64, tol: f64) -> Result<IntegralResult> {
        delta_integral(self.scale(), &self.as_fn(), a, b, tol)
    }

    /// `∫_start^inf self Δt` with the default integrator.
    pub fn improper_integral(&self, tol: f64) -> Result<IntegralResult> {
        improper_integral(self.scale(), &self.as_fn(), self.start(), tol)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition::make_delta_partition;

    #[test]
    fn riemann_sums() {
        let z = TimeScale::integers(0.0);
        let p = Partition::new(&z, vec![0.0, 1.0, 2.0, 3.0]).unwrap();
        assert_eq!(riemann_sum(&z, &p, &|t: f64| t, Tag::Left).unwrap(), 3.0);
        assert_eq!(riemann_sum(&z, &p, &|t: f64| t, Tag::Fraction(0.9)).unwrap(), 3.0);

        let r = TimeScale::reals(0.0);
        let p = Partition::new(&r, vec![0.0, 0.5, 1.0]).unwrap();
        assert_eq!(riemann_sum(&r, &p, &|t: f64| t, Tag::Left).unwrap(), 0.25);

        let h = TimeScale::hybrid();
        let p = make_delta_partition(&h, 0.0, 5.0, 0.3).unwrap();
        let s = riemann_sum(&h, &p, &|_| 1.0, Tag::Fraction(0.5)).unwrap();
        assert!((s - 5.0).abs() < 1e-12);
    }

    #[test]
    fn riemann_sum_rejects_bad_tags() {
        let h = TimeScale::hybrid();
        let p = Partition::new(&h, vec![0.0, 1.0, 2.0]).unwrap();
        let err = riemann_sum_with(&h, &p, &|t: f64| t, |lo, hi| Ok(0.5 * (lo + hi)));
        assert_eq!(err, Err(Error::TagOutsideCell { tag: 1.5, lo: 1.0, hi: 2.0 }));
        let err = riemann_sum_with(&h, &p, &|t: f64| t, |_, hi| Ok(hi));
        assert!(err.is_err());
    }

    #[test]
    fn single_steps() {
        let z = TimeScale::integers(0.0);
        assert_eq!(single_step_integral(&z, &|t: f64| t * t, 3.0).unwrap(), 9.0);
        let r = TimeScale::reals(0.0);
        assert_eq!(single_step_integral(&r, &|t: f64| t.exp(), 2.0).unwrap(), 0.0);
        let h = TimeScale::hybrid();
        assert_eq!(single_step_integral(&h, &|t: f64| t, 1.0).unwrap(), 1.0);
        assert!(single_step_integral(&h, &|t: f64| t, 1.5).is_err());
    }

    #[test]
    fn bounded_integrals() {
        let z = TimeScale::integers(0.0);
        let r = delta_integral(&z, &|t: f64| t, 0.0, 4.0, 1e-8).unwrap();
        assert_eq!(r.value, 6.0);
        assert_eq!(r.abs_error_estimate, 0.0);
        assert!(r.converged);

        let reals = TimeScale::reals(0.0);
        let r = delta_integral(&reals, &|t: f64| t * t, 0.0, 1.0, 1e-8).unwrap();
        assert!((r.value - 1.0 / 3.0).abs() < 1e-8);
        assert!(r.converged && r.abs_error_estimate < 1e-8);

        let h = TimeScale::hybrid();
        let r = delta_integral(&h, &|t: f64| t, 0.0, 3.0, 1e-8).unwrap();
        assert!((r.value - 4.0).abs() < 1e-8);

        let r = delta_integral(&h, &|t: f64| t, 2.5, 2.5, 1e-8).unwrap();
        assert_eq!(r.value, 0.0);
    }

    #[test]
    fn bounded_errors() {
        let z = TimeScale::integers(0.0);
        assert_eq!(
            delta_integral(&z, &|t: f64| t, 4.0, 0.0, 1e-8),
            Err(Error::ReversedBounds { a: 4.0, b: 0.0 })
        );
        assert!(delta_integral(&z, &|t: f64| t, 0.5, 2.0, 1e-8).is_err());
        assert_eq!(
            delta_integral(&z, &|t: f64| 1.0 / (t - 1.0), 0.0, 3.0, 1e-8),
            Err(Error::NonFinite(1.0))
        );
    }

    #[test]
    fn refinement_budget_exhaustion() {
        let integ = DeltaIntegrator::new(
            Quadrature {
                max_levels: 6,
                min_levels: 2,
            },
            TruncationPolicy::default(),
        );
        let r = integ
            .integrate(&TimeScale::reals(0.0), &|t: f64| (200.0 * t).sin(), 0.0, 1.0, 1e-12)
            .unwrap();
        assert!(!r.converged);
    }

    #[test]
    fn traced_partition_recomputes_value() {
        let h = TimeScale::hybrid();
        let (res, trace) = DeltaIntegrator::default()
            .integrate_traced(&h, &|t: f64| t, 0.0, 3.0, 1e-6)
            .unwrap();
        let recomputed: f64 = trace.iter().map(|s| s.value).sum();
        assert_eq!(recomputed, res.value);
        assert_eq!(trace[1].partition_points(), vec![2.0]);
    }

    #[test]
    fn improper_integrals() {
        let z = TimeScale::integers(0.0);
        let r = improper_integral(&z, &|t: f64| f64::powf(2.0, -t), 0.0, 1e-6).unwrap();
        assert!(r.converged && (r.value - 2.0).abs() < 1e-6, "{r:?}");

        let reals = TimeScale::reals(0.0);
        let r = improper_integral(&reals, &|t: f64| (-t).exp(), 0.0, 1e-6).unwrap();
        assert!(r.converged && (r.value - 1.0).abs() < 1e-6, "{r:?}");

        let q = TimeScale::geometric(1.0, 2.0).unwrap();
        let r = improper_integral(&q, &|t: f64| 1.0 / (t * t), 1.0, 1e-6).unwrap();
        assert!(r.converged && (r.value - 2.0).abs() < 1e-6, "{r:?}");
    }

    #[test]
    fn improper_divergence() {
        for scale in [TimeScale::integers(0.0), TimeScale::reals(0.0), TimeScale::hybrid()] {
            let r = improper_integral(&scale, &|_| 1.0, 0.0, 1e-6).unwrap();
            assert!(!r.converged);
        }
    }

    #[test]
    fn explicit_targets_and_min_target() {
        let z = TimeScale::integers(0.0);
        let e5 = |t: f64| if t == 50.0 { 1.0 } else { 0.0 };
        let r = improper_integral(&z, &e5, 0.0, 1e-6).unwrap();
        assert_eq!(r.value, 0.0, "early stall misses late support");

        let integ = DeltaIntegrator {
            truncation: TruncationPolicy {
                min_target: Some(51.0),
                ..Default::default()
            },
            ..Default::default()
        };
        assert_eq!(integ.improper(&z, &e5, 0.0, 1e-6).unwrap().value, 1.0);

        let integ = DeltaIntegrator {
            truncation: TruncationPolicy {
                targets: Targets::Explicit(vec![10.0, 20.0, 30.0, 40.0]),
                ..Default::default()
            },
            ..Default::default()
        };
        let (r, trace) = integ.improper_traced(&z, &|t: f64| 0.5f64.powf(t), 0.0, 1e-2).unwrap();
        assert!(r.converged);
        assert_eq!(trace.len(), 4);
        assert_eq!(r.truncation_point, 40.0);
    }
}
