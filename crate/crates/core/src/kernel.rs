//! Kernel transforms `(Lf)(x) = ∫_β^inf K(x, t) f(t) Δt` between function spaces
//! on two time scales, and numerical audits of the conditions under which `L`
//! maps null functions to null functions (conditions (i)-(iii)) and preserves
//! limits at infinity (additionally (iv)).
//!
//! Every condition quantifies over infinite sets, so each check is evidence
//! drawn from a finite probe grid and carries its witnesses.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::function::ScaleFunction;
use crate::integrate::{DeltaIntegrator, IntegralResult, TruncationPolicy};
use crate::scale::{Segment, TimeScale};
use crate::spaces::{extrapolate_limit, Sampler};

type KernelFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;
type SupportFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A kernel `K : [α, inf) × [β, inf) -> R` over the scales `T1` (in `x`) and `T2` (in `t`).
#[derive(Clone)]
pub struct Kernel {
    eval: KernelFn,
    x_scale: TimeScale,
    alpha: f64,
    t_scale: TimeScale,
    beta: f64,
    support: Option<SupportFn>,
}

impl fmt::Debug for Kernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Kernel")
            .field("alpha", &self.alpha)
            .field("beta", &self.beta)
            .field("row_support", &self.support.is_some())
            .finish_non_exhaustive()
    }
}

impl Kernel {
    pub fn new<K>(x_scale: TimeScale, alpha: f64, t_scale: TimeScale, beta: f64, k: K) -> Result<Self>
    where
        K: Fn(f64, f64) -> f64 + Send + Sync + 'static,
    {
        let alpha = x_scale.snap(alpha)?;
        let beta = t_scale.snap(beta)?;
        Ok(Self {
            eval: Arc::new(k),
            x_scale,
            alpha,
            t_scale,
            beta,
            support: None,
        })
    }

    /// Declares `K(x, t) = 0` for `t > end(x)`, so rows can be integrated exactly.
    pub fn with_row_support<S>(mut self, end: S) -> Self
    where
        S: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        self.support = Some(Arc::new(end));
        self
    }

    /// Cesàro means on `Z≥0`: `K(n, k) = 1/(n+1)` for `k <= n`, else 0.
    pub fn cesaro() -> Self {
        let z = TimeScale::integers(0.0);
        Self {
            eval: Arc::new(|n, k| if k <= n { 1.0 / (n + 1.0) } else { 0.0 }),
            x_scale: z.clone(),
            alpha: 0.0,
            t_scale: z,
            beta: 0.0,
            support: Some(Arc::new(|n| n)),
        }
    }

    pub fn zero(x_scale: TimeScale, t_scale: TimeScale) -> Self {
        let alpha = x_scale.min();
        let beta = t_scale.min();
        Self {
            eval: Arc::new(|_, _| 0.0),
            x_scale,
            alpha,
            t_scale,
            beta,
            support: None,
        }
    }

    /// `c * K`, keeping scales and row support.
    pub fn scaled(&self, c: f64) -> Self {
        let k = Arc::clone(&self.eval);
        Self {
            eval: Arc::new(move |x, t| c * k(x, t)),
            ..self.clone()
        }
    }

    #[inline]
    pub fn eval(&self, x: f64, t: f64) -> f64 {
        (self.eval)(x, t)
    }

    pub fn x_scale(&self) -> &TimeScale {
        &self.x_scale
    }

    pub fn t_scale(&self) -> &TimeScale {
        &self.t_scale
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Last `t`-scale point a row may touch, if the row support is declared.
    fn row_end(&self, x: f64) -> Result<Option<f64>> {
        let Some(s) = &self.support else {
            return Ok(None);
        };
        let end = s(x);
        if end < self.beta {
            return Ok(Some(self.beta));
        }
        let p = self.t_scale.ceil(end)?;
        Ok(Some(self.t_scale.sigma(p)?))
    }

    /// `∫_β^inf g(t) Δt` for an integrand built from row `x`.
    fn row_integral<G>(&self, x: f64, g: &G, integ: &DeltaIntegrator, tol: f64) -> Result<IntegralResult>
    where
        G: Fn(f64) -> f64 + ?Sized,
    {
        if let Some(end) = self.row_end(x)? {
            return integ.integrate(&self.t_scale, g, self.beta, end, tol);
        }
        let reach = if x > self.beta { Some(self.t_scale.ceil(x)?) } else { None };
        let integ = DeltaIntegrator {
            truncation: TruncationPolicy {
                min_target: match (integ.truncation.min_target, reach) {
                    (Some(m), Some(r)) => Some(m.max(r)),
                    (m, r) => m.or(r),
                },
                ..integ.truncation.clone()
            },
            ..integ.clone()
        };
        integ.improper(&self.t_scale, g, self.beta, tol)
    }

    /// `(Lf)(x)`.
    pub fn apply(&self, f: &ScaleFunction, x: f64, tol: f64) -> Result<IntegralResult> {
        self.apply_with(&DeltaIntegrator::default(), f, x, tol)
    }

    pub fn apply_with(
        &self,
        integ: &DeltaIntegrator,
        f: &ScaleFunction,
        x: f64,
        tol: f64,
    ) -> Result<IntegralResult> {
        let x = self.x_scale.snap(x)?;
        let g = |t: f64| self.eval(x, t) * f.eval(t);
        self.row_integral(x, &g, integ, tol)
    }

    /// `Lf` as a function on `[α, inf) ∩ T1`; rows that fail to integrate evaluate to NaN.
    pub fn transform(&self, f: &ScaleFunction, tol: f64) -> ScaleFunction {
        let k = self.clone();
        let f = f.clone();
        ScaleFunction::new(self.x_scale.clone(), self.alpha, move |x| {
            match k.apply(&f, x, tol) {
                Ok(r) if r.converged => r.value,
                _ => f64::NAN,
            }
        })
        .expect("alpha is a point of the x scale")
    }

    /// `∫_β^inf |K(x, t)| Δt`.
    pub fn row_l1(&self, integ: &DeltaIntegrator, x: f64, tol: f64) -> Result<IntegralResult> {
        let x = self.x_scale.snap(x)?;
        self.row_integral(x, &|t: f64| self.eval(x, t).abs(), integ, tol)
    }

    /// `∫_β^inf K(x, t) Δt`.
    pub fn row_sum(&self, integ: &DeltaIntegrator, x: f64, tol: f64) -> Result<IntegralResult> {
        let x = self.x_scale.snap(x)?;
        self.row_integral(x, &|t: f64| self.eval(x, t), integ, tol)
    }
}

/// A probed value backing a condition check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Witness {
    pub x: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub y: Option<f64>,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionResult {
    pub passed: bool,
    pub witnesses: Vec<Witness>,
    pub tol: f64,
}

/// Points `α, ceil(α + 1), ceil(α + 2), ceil(α + 4), ...` up to the horizon.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct XProbe {
    pub horizon: f64,
}

impl Default for XProbe {
    fn default() -> Self {
        Self {
            horizon: f64::powi(2.0, 16),
        }
    }
}

impl XProbe {
    pub fn points(&self, scale: &TimeScale, alpha: f64) -> Result<Vec<f64>> {
        let mut out = vec![alpha];
        let mut k = 0;
        loop {
            let raw = alpha + f64::powi(2.0, k);
            k += 1;
            if raw > self.horizon || k > 1100 {
                break;
            }
            let p = scale.ceil(raw)?;
            if p > self.horizon {
                break;
            }
            if p > *out.last().unwrap() {
                out.push(p);
            }
        }
        Ok(out)
    }
}

/// The first `n` points after `start`: the next scattered point, or one unit on in a dense run.
pub fn leading_points(scale: &TimeScale, start: f64, n: usize) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(n);
    let mut p = scale.snap(start)?;
    while out.len() < n {
        let s = scale.sigma(p)?;
        p = if s > p { s } else { scale.ceil(p + 1.0)? };
        out.push(p);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegularityConfig {
    pub probe: XProbe,
    /// Number of `y` values for condition (iii), taken from [`leading_points`] after β.
    pub y_count: usize,
    /// Points `x0` for condition (i); `None` uses α and the three points after it.
    pub x0_samples: Option<Vec<f64>>,
    /// Approach distances `2^-j` used by condition (i).
    pub approach_exponents: Vec<i32>,
    pub tol: f64,
    pub integrator: DeltaIntegrator,
}

impl Default for RegularityConfig {
    fn default() -> Self {
        Self {
            probe: XProbe::default(),
            y_count: 8,
            x0_samples: None,
            approach_exponents: vec![4, 8, 12, 16, 20, 24],
            tol: 1e-6,
            integrator: DeltaIntegrator::default(),
        }
    }
}

impl RegularityConfig {
    /// Tolerance for individual row integrals; a tenth of the condition tolerance.
    fn row_tol(&self) -> f64 {
        self.tol / 10.0
    }

    /// Allowed non-monotonicity in trend tests, covering quadrature noise.
    fn slack(&self) -> f64 {
        self.tol / 5.0
    }
}

/// Estimate of `M = sup_x ∫_β^inf |K(x, t)| Δt`, with the condition (ii) evidence.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MEstimate {
    pub value: f64,
    pub condition: ConditionResult,
}

/// Lower bound for `M` from the rows at the probed `x`.
///
/// Condition (ii) fails when any probed row integral does not converge.
pub fn estimate_m(k: &Kernel, cfg: &RegularityConfig) -> Result<MEstimate> {
    let mut witnesses = Vec::new();
    let mut passed = true;
    let mut value = 0.0_f64;
    for x in cfg.probe.points(&k.x_scale, k.alpha)? {
        let r = k.row_l1(&cfg.integrator, x, cfg.row_tol())?;
        passed &= r.converged && r.value.is_finite();
        value = value.max(r.value);
        witnesses.push(Witness {
            x,
            y: None,
            value: r.value,
        });
    }
    Ok(MEstimate {
        value,
        condition: ConditionResult {
            passed,
            witnesses,
            tol: cfg.tol,
        },
    })
}

/// Condition (i): `∫ |K(x, t) - K(x0, t)| Δt -> 0` as `x -> x0`.
///
/// Passes vacuously at points isolated in the `x` scale. Elsewhere the `L¹` gap
/// is measured at `x0 ± 2^-j` on each dense side and must end below `tol`.
pub fn check_condition_i(k: &Kernel, x0_samples: &[f64], cfg: &RegularityConfig) -> Result<ConditionResult> {
    let mut witnesses = Vec::new();
    let mut passed = true;
    for &x0 in x0_samples {
        let x0 = k.x_scale.snap(x0)?;
        let class = k.x_scale.classify(x0)?;
        if class.isolated() {
            witnesses.push(Witness {
                x: x0,
                y: None,
                value: 0.0,
            });
            continue;
        }
        let mut sides = Vec::new();
        if class.right_dense() {
            sides.push(1.0);
        }
        if class.left_dense() {
            sides.push(-1.0);
        }
        for side in sides {
            let mut last = None;
            for &j in &cfg.approach_exponents {
                let x = x0 + side * f64::powi(2.0, -j);
                if !k.x_scale.contains(x) {
                    continue;
                }
                let gap = |t: f64| (k.eval(x, t) - k.eval(x0, t)).abs();
                let row = if k.support.is_some() { x.max(x0) } else { x };
                let r = k.row_integral(row, &gap, &cfg.integrator, cfg.row_tol())?;
                let v = if r.converged { r.value } else { f64::INFINITY };
                witnesses.push(Witness {
                    x,
                    y: Some(x0),
                    value: v,
                });
                last = Some(v);
            }
            passed &= matches!(last, Some(v) if v < cfg.tol);
        }
    }
    Ok(ConditionResult {
        passed,
        witnesses,
        tol: cfg.tol,
    })
}

/// Whether probe values approach `target`: the last three distances do not grow
/// (up to `slack`), and the final value or its extrapolation is within `tol`.
fn approaches(values: &[f64], target: f64, tol: f64, slack: f64) -> bool {
    let n = values.len();
    let Some(&last) = values.last() else {
        return false;
    };
    if !values.iter().all(|v| v.is_finite()) {
        return false;
    }
    if n < 3 {
        return (last - target).abs() < tol;
    }
    let tail = &values[n - 3..];
    let dist: Vec<f64> = tail.iter().map(|v| (v - target).abs()).collect();
    let monotone = dist[1] <= dist[0] + slack && dist[2] <= dist[1] + slack;
    let limit = extrapolate_limit(tail[0], tail[1], tail[2]);
    monotone && ((last - target).abs() < tol || (limit - target).abs() < tol)
}

/// Condition (iii): `∫_β^y |K(x, t)| Δt -> 0` as `x -> inf`, for each sampled `y`.
pub fn check_condition_iii(k: &Kernel, ys: &[f64], cfg: &RegularityConfig) -> Result<ConditionResult> {
    let xs = cfg.probe.points(&k.x_scale, k.alpha)?;
    let mut witnesses = Vec::new();
    let mut passed = true;
    for &y in ys {
        let y = k.t_scale.snap(y)?;
        let mut values = Vec::with_capacity(xs.len());
        for &x in &xs {
            let r = cfg.integrator.integrate(
                &k.t_scale,
                &|t: f64| k.eval(x, t).abs(),
                k.beta,
                y,
                cfg.row_tol(),
            )?;
            let v = if r.converged { r.value } else { f64::INFINITY };
            values.push(v);
            witnesses.push(Witness { x, y: Some(y), value: v });
        }
        passed &= approaches(&values, 0.0, cfg.tol, cfg.slack());
    }
    Ok(ConditionResult {
        passed,
        witnesses,
        tol: cfg.tol,
    })
}

/// Condition (iv): `∫_β^inf K(x, t) Δt -> 1` as `x -> inf`.
pub fn check_condition_iv(k: &Kernel, cfg: &RegularityConfig) -> Result<ConditionResult> {
    let mut witnesses = Vec::new();
    let mut values = Vec::new();
    for x in cfg.probe.points(&k.x_scale, k.alpha)? {
        let r = k.row_sum(&cfg.integrator, x, cfg.row_tol())?;
        let v = if r.converged { r.value } else { f64::NAN };
        values.push(v);
        witnesses.push(Witness { x, y: None, value: v });
    }
    Ok(ConditionResult {
        passed: approaches(&values, 1.0, cfg.tol, cfg.slack()),
        witnesses,
        tol: cfg.tol,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind")]
pub enum RegularityVerdict {
    /// All four conditions hold on the probes: limits at infinity are preserved.
    #[serde(rename = "Evidence-Regular")]
    Regular,
    /// (i)-(iii) hold on the probes but (iv) does not: null functions stay null.
    #[serde(rename = "Evidence-C0-Preserving")]
    C0Preserving,
    #[serde(rename = "Evidence-Fails")]
    Fails { failed: Vec<String> },
}

/// Conditions (i)-(iv), keyed by their roman numeral in JSON.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Conditions {
    pub i: ConditionResult,
    pub ii: ConditionResult,
    pub iii: ConditionResult,
    pub iv: ConditionResult,
}

impl Conditions {
    /// Names of the conditions that did not pass.
    pub fn failed(&self) -> Vec<String> {
        [("i", &self.i), ("ii", &self.ii), ("iii", &self.iii), ("iv", &self.iv)]
            .iter()
            .filter(|(_, c)| !c.passed)
            .map(|(name, _)| name.to_string())
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegularityReport {
    #[serde(rename = "M_estimate")]
    pub m_estimate: f64,
    pub conditions: Conditions,
    pub verdict: RegularityVerdict,
}

impl RegularityReport {
    fn new(m_estimate: f64, conditions: Conditions) -> Self {
        let failed = conditions.failed();
        let verdict = match failed.as_slice() {
            [] => RegularityVerdict::Regular,
            [only] if only == "iv" => RegularityVerdict::C0Preserving,
            _ => RegularityVerdict::Fails { failed },
        };
        Self {
            m_estimate,
            conditions,
            verdict,
        }
    }
}

/// Runs the four condition checks and the `M` estimate.
pub fn regularity_report(k: &Kernel, cfg: &RegularityConfig) -> Result<RegularityReport> {
    let x0s = match &cfg.x0_samples {
        Some(v) => v.clone(),
        None => {
            let mut v = vec![k.alpha];
            v.extend(leading_points(&k.x_scale, k.alpha, 3)?);
            v
        }
    };
    let ys = leading_points(&k.t_scale, k.beta, cfg.y_count)?;
    let m = estimate_m(k, cfg)?;
    let cond_i = check_condition_i(k, &x0s, cfg)?;
    let cond_iii = check_condition_iii(k, &ys, cfg)?;
    let cond_iv = check_condition_iv(k, cfg)?;
    Ok(RegularityReport::new(
        m.value,
        Conditions {
            i: cond_i,
            ii: m.condition,
            iii: cond_iii,
            iv: cond_iv,
        },
    ))
}

/// `f(t) = sgn K(x0, t)` for `t <= p` and `0` beyond, with `sgn 0 = 0`.
///
/// `‖f‖ = 1` and `(Lf)(x0) = ∫_β^{sigma(p)} |K(x0, t)| Δt`. Fails when the slice
/// vanishes on every sampled point of `[β, p]`.
pub fn extremal_function(k: &Kernel, x0: f64, p: f64) -> Result<ScaleFunction> {
    let x0 = k.x_scale.snap(x0)?;
    let p = k.t_scale.snap(p)?;
    if p < k.beta {
        return Err(Error::ReversedBounds { a: k.beta, b: p });
    }
    let slice_nonzero = |t: f64| k.eval(x0, t) != 0.0;
    let mut nonzero = slice_nonzero(k.beta) || slice_nonzero(p);
    if !nonzero {
        let h = Sampler::default().dense_spacing;
        'scan: for seg in k.t_scale.segments(k.beta, p)? {
            match seg? {
                Segment::Jump { at, .. } => {
                    if slice_nonzero(at) {
                        nonzero = true;
                        break 'scan;
                    }
                }
                Segment::DenseRun { lo, hi } => {
                    let n = ((hi - lo) / h).ceil() as u64;
                    for i in 0..=n {
                        if slice_nonzero((lo + i as f64 * h).min(hi)) {
                            nonzero = true;
                            break 'scan;
                        }
                    }
                }
            }
        }
    }
    if !nonzero {
        return Err(Error::ZeroSlice(x0));
    }
    let kk = k.clone();
    ScaleFunction::new(k.t_scale.clone(), k.beta, move |t| {
        if t <= p {
            let v = kk.eval(x0, t);
            if v > 0.0 {
                1.0
            } else if v < 0.0 {
                -1.0
            } else {
                0.0
            }
        } else {
            0.0
        }
    })
}

/// `max |(L f_{x0,p})(x0)|` over the probes, where `f_{x0,p}` is the extremal
/// function. Probes with a vanishing slice contribute nothing.
pub fn operator_norm_lower_bound(k: &Kernel, x0s: &[f64], ps: &[f64], tol: f64) -> Result<f64> {
    let integ = DeltaIntegrator::default();
    let mut best = 0.0_f64;
    for &x0 in x0s {
        let x0 = k.x_scale.snap(x0)?;
        for &p in ps {
            let p = k.t_scale.floor(p)?;
            let f = match extremal_function(k, x0, p) {
                Ok(f) => f,
                Err(Error::ZeroSlice(_)) => continue,
                Err(e) => return Err(e),
            };
            let end = k.t_scale.sigma(p)?;
            let r = integ.integrate(&k.t_scale, &|t: f64| k.eval(x0, t) * f.eval(t), k.beta, end, tol)?;
            if r.converged {
                best = best.max(r.value.abs());
            }
        }
    }
    Ok(best)
}
