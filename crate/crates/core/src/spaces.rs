//! Numerical evidence for membership in `C_T[β, inf)` (functions with a limit
//! at infinity) and `C⁰_T[β, inf)` (limit zero), under the sup norm.
//!
//! Everything here is a semi-decision from finitely many samples. Verdicts are
//! labelled as evidence and never as proof.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::function::ScaleFunction;
use crate::scale::Segment;

/// Ratio above which successive window means are not treated as a contracting sequence.
const MAX_CONTRACTION: f64 = 0.9;
/// Samples kept in a window even when they reach back past half the horizon.
const MIN_WINDOW: usize = 3;

/// Sampling density for dense runs; scattered points are always all visited.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Sampler {
    /// Grid spacing inside a dense run, anchored at the run's left end.
    pub dense_spacing: f64,
}

impl Default for Sampler {
    fn default() -> Self {
        Self {
            dense_spacing: 1.0 / 64.0,
        }
    }
}

impl Sampler {
    /// Same grid with half the spacing; its samples contain the current ones.
    pub fn refined(&self) -> Self {
        Self {
            dense_spacing: self.dense_spacing / 2.0,
        }
    }
}

/// Lower bound for `sup |f(t)|` over `[β, horizon] ∩ T`.
///
/// Every scattered point up to the horizon is visited, and each dense run is
/// sampled on a grid anchored at its left end. The sample set only grows with
/// the horizon and with a refined sampler, so the bound is monotone in both.
pub fn sup_norm(f: &ScaleFunction, horizon: f64, sampler: &Sampler) -> Result<f64> {
    let scale = f.scale();
    let end = scale.floor(horizon)?;
    if end < f.start() {
        return Err(Error::BelowMinimum(horizon));
    }
    let h = sampler.dense_spacing;
    if !(h > 0.0) {
        return Err(Error::NonPositiveDelta(h));
    }
    let mut best = 0.0_f64;
    let mut visit = |t: f64| -> Result<()> {
        let v = f.eval(t);
        if v.is_nan() {
            return Err(Error::NonFinite(t));
        }
        best = best.max(v.abs());
        Ok(())
    };
    visit(f.start())?;
    for seg in scale.segments(f.start(), end)? {
        match seg? {
            Segment::Jump { at, next, .. } => {
                visit(at)?;
                visit(next)?;
            }
            Segment::DenseRun { lo, hi } => {
                let mut i = 1u64;
                loop {
                    let t = lo + i as f64 * h;
                    if t >= hi {
                        break;
                    }
                    visit(t)?;
                    i += 1;
                }
                // the truncated end of a run that continues past the horizon is not a grid point
                if hi < end || scale.sigma(hi)? > hi {
                    visit(hi)?;
                }
            }
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LimitConfig {
    pub tol: f64,
    /// Samples per window, walking backwards from the horizon and staying in
    /// its far half once three samples are taken.
    pub window: usize,
    pub horizon: f64,
    /// `|f|` above this is reported as divergence.
    pub escape_bound: f64,
    /// Backward step used inside dense runs.
    pub dense_step: f64,
}

impl Default for LimitConfig {
    fn default() -> Self {
        Self {
            tol: 1e-6,
            window: 16,
            horizon: 1e6,
            escape_bound: 1e12,
            dense_step: 0.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum LimitStatus {
    Converged { value: f64 },
    Diverged,
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitDiagnosis {
    pub status: LimitStatus,
    pub horizon: f64,
    /// Spread `max - min` of the window at the horizon.
    pub oscillation: f64,
    pub window_mean: f64,
    /// The `(t, f(t))` samples of the window at the horizon.
    pub samples: Vec<(f64, f64)>,
}

impl LimitDiagnosis {
    pub fn limit(&self) -> Option<f64> {
        match self.status {
            LimitStatus::Converged { value } => Some(value),
            _ => None,
        }
    }
}

/// Extrapolated limit of a sequence from its last three terms.
///
/// When the differences keep their sign and contract by a ratio `r <= 0.9`, the
/// remaining geometric tail `d2 r / (1 - r)` is added (Aitken's Δ² step);
/// otherwise the last term is returned.
pub fn extrapolate_limit(a: f64, b: f64, c: f64) -> f64 {
    let d1 = b - a;
    let d2 = c - b;
    if d1 == 0.0 || d2 == 0.0 {
        return c;
    }
    let r = d2 / d1;
    if r > 0.0 && r <= MAX_CONTRACTION {
        c + d2 * r / (1.0 - r)
    } else {
        c
    }
}

struct Window {
    samples: Vec<(f64, f64)>,
    mean: f64,
    spread: f64,
    escaped: bool,
    nan: bool,
}

fn window_at(f: &ScaleFunction, horizon: f64, cfg: &LimitConfig) -> Result<Window> {
    let scale = f.scale();
    let mut p = scale.floor(horizon.max(f.start()))?;
    // Sparse scales would otherwise pull the window far back from the horizon.
    let far_half = f.start() + (p - f.start()) / 2.0;
    let mut samples = Vec::with_capacity(cfg.window);
    for _ in 0..cfg.window.max(1) {
        samples.push((p, f.eval(p)));
        if p <= f.start() || (p < far_half && samples.len() >= MIN_WINDOW) {
            break;
        }
        let back = scale.rho(p)?;
        p = if back < p {
            back
        } else {
            scale.floor((p - cfg.dense_step).max(f.start()))?
        };
    }
    let nan = samples.iter().any(|s| s.1.is_nan());
    let escaped = samples
        .iter()
        .any(|s| s.1.is_infinite() || s.1.abs() > cfg.escape_bound);
    let (lo, hi, sum) = samples.iter().fold(
        (f64::INFINITY, f64::NEG_INFINITY, 0.0),
        |(lo, hi, sum), &(_, v)| (lo.min(v), hi.max(v), sum + v),
    );
    Ok(Window {
        mean: sum / samples.len() as f64,
        spread: hi - lo,
        samples,
        escaped,
        nan,
    })
}

/// Diagnoses `lim_{t -> inf} f(t)` from sample windows ending at the horizon.
///
/// `Converged` requires the window at the horizon to spread by at most `tol`.
/// The reported value extrapolates the means of the windows at the horizon and
/// at `1/2` and `1/4` of the way there, which removes the bias of slowly
/// decaying tails such as `1/t` or `log t / t`.
pub fn limit_at_infinity(f: &ScaleFunction, cfg: &LimitConfig) -> Result<LimitDiagnosis> {
    if !(cfg.tol > 0.0) {
        return Err(Error::NonPositiveTolerance(cfg.tol));
    }
    let start = f.start();
    let far = window_at(f, cfg.horizon, cfg)?;
    let mid = window_at(f, start + (cfg.horizon - start) / 2.0, cfg)?;
    let near = window_at(f, start + (cfg.horizon - start) / 4.0, cfg)?;
    let status = if [&far, &mid, &near].iter().any(|w| w.escaped) {
        LimitStatus::Diverged
    } else if far.nan || !(far.spread <= cfg.tol) {
        LimitStatus::Unknown
    } else {
        let value = if mid.nan || near.nan {
            far.mean
        } else {
            extrapolate_limit(near.mean, mid.mean, far.mean)
        };
        LimitStatus::Converged { value }
    };
    Ok(LimitDiagnosis {
        status,
        horizon: far.samples[0].0,
        oscillation: far.spread,
        window_mean: far.mean,
        samples: far.samples,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    EvidenceFor,
    EvidenceAgainst,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MembershipConfig {
    pub limit: LimitConfig,
    pub sampler: Sampler,
    /// Horizon for the sup-norm estimate.
    pub norm_horizon: f64,
}

impl Default for MembershipConfig {
    fn default() -> Self {
        Self {
            limit: LimitConfig::default(),
            sampler: Sampler::default(),
            norm_horizon: 1e3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MembershipEvidence {
    pub limit: LimitDiagnosis,
    pub sup_norm_lower_bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MembershipReport {
    pub in_c: Verdict,
    pub in_c0: Verdict,
    pub evidence: MembershipEvidence,
}

/// Evidence for `f ∈ C_T` and `f ∈ C⁰_T`.
pub fn membership_report(f: &ScaleFunction, cfg: &MembershipConfig) -> Result<MembershipReport> {
    let limit = limit_at_infinity(f, &cfg.limit)?;
    let norm_horizon = cfg.norm_horizon.max(f.start());
    let sup = sup_norm(f, norm_horizon, &cfg.sampler)?;
    let (in_c, in_c0) = match limit.status {
        LimitStatus::Converged { value } => (
            Verdict::EvidenceFor,
            if value.abs() <= cfg.limit.tol {
                Verdict::EvidenceFor
            } else {
                Verdict::EvidenceAgainst
            },
        ),
        LimitStatus::Diverged => (Verdict::EvidenceAgainst, Verdict::EvidenceAgainst),
        LimitStatus::Unknown => (Verdict::Inconclusive, Verdict::Inconclusive),
    };
    Ok(MembershipReport {
        in_c,
        in_c0,
        evidence: MembershipEvidence {
            limit,
            sup_norm_lower_bound: sup,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scale::TimeScale;

    fn z() -> TimeScale {
        TimeScale::integers(0.0)
    }

    #[test]
    fn sup_norms() {
        let one = ScaleFunction::on(TimeScale::hybrid(), |_| 1.0);
        assert_eq!(sup_norm(&one, 10.0, &Sampler::default()).unwrap(), 1.0);
        let f = ScaleFunction::on(z(), |t| 1.0 / (t + 1.0));
        assert_eq!(sup_norm(&f, 100.0, &Sampler::default()).unwrap(), 1.0);
        let f = ScaleFunction::on(z(), |t| if t as i64 % 2 == 0 { 1.0 } else { -1.0 });
        assert_eq!(sup_norm(&f, 100.0, &Sampler::default()).unwrap(), 1.0);
        // the maximum sits at the far end of the window
        let f = ScaleFunction::on(z(), |t| t);
        assert_eq!(sup_norm(&f, 10.0, &Sampler::default()).unwrap(), 10.0);
    }

    #[test]
    fn sup_norm_monotone_in_horizon_and_density() {
        let f = ScaleFunction::on(TimeScale::hybrid(), |t| (3.7 * t).sin() * t);
        let s = Sampler { dense_spacing: 0.3 };
        let mut last = 0.0;
        for h in [1.0, 2.5, 4.0, 7.3, 12.0] {
            let v = sup_norm(&f, h, &s).unwrap();
            assert!(v >= last);
            last = v;
        }
        let coarse = sup_norm(&f, 7.3, &s).unwrap();
        let fine = sup_norm(&f, 7.3, &s.refined()).unwrap();
        assert!(fine >= coarse);
    }

    #[test]
    fn limits() {
        let f = ScaleFunction::on(z(), |t| 5.0 + 1.0 / (t + 1.0));
        let cfg = LimitConfig {
            horizon: 1e7,
            ..Default::default()
        };
        let d = limit_at_infinity(&f, &cfg).unwrap();
        let v = d.limit().expect("converged");
        assert!((v - 5.0).abs() < 1e-6, "{v}");
        assert!(d.oscillation <= cfg.tol);

        let alt = ScaleFunction::on(z(), |t| if t as i64 % 2 == 0 { 1.0 } else { -1.0 });
        let d = limit_at_infinity(&alt, &cfg).unwrap();
        assert_eq!(d.status, LimitStatus::Unknown);
        assert_eq!(d.oscillation, 2.0);

        let zero = ScaleFunction::on(TimeScale::hybrid(), |_| 0.0);
        let d = limit_at_infinity(&zero, &LimitConfig::default()).unwrap();
        assert_eq!(d.status, LimitStatus::Converged { value: 0.0 });

        let grow = ScaleFunction::on(TimeScale::reals(0.0), |t| t * t * t);
        let d = limit_at_infinity(&grow, &LimitConfig::default()).unwrap();
        assert_eq!(d.status, LimitStatus::Diverged);
    }

    #[test]
    fn limit_shift_equivariance() {
        let f = ScaleFunction::on(z(), |t| 2.0 / (t + 3.0));
        let cfg = LimitConfig::default();
        let base = limit_at_infinity(&f, &cfg).unwrap();
        let shifted = limit_at_infinity(&f.shifted(4.0), &cfg).unwrap();
        assert!((shifted.limit().unwrap() - base.limit().unwrap() - 4.0).abs() < 1e-9);
        let ts: Vec<f64> = base.samples.iter().map(|s| s.0).collect();
        let ts2: Vec<f64> = shifted.samples.iter().map(|s| s.0).collect();
        assert_eq!(ts, ts2);
    }

    #[test]
    fn extrapolation() {
        // geometric tail is removed exactly
        assert!((extrapolate_limit(1.0 + 0.25, 1.0 + 0.125, 1.0 + 0.0625) - 1.0).abs() < 1e-15);
        // alternating or expanding differences are left alone
        assert_eq!(extrapolate_limit(1.0, 2.0, 1.5), 1.5);
        assert_eq!(extrapolate_limit(1.0, 2.0, 4.0), 4.0);
        assert_eq!(extrapolate_limit(3.0, 3.0, 3.0), 3.0);
    }

    #[test]
    fn membership() {
        let cfg = MembershipConfig::default();
        let f = ScaleFunction::on(z(), |t| 1.0 / (t + 1.0));
        let r = membership_report(&f, &cfg).unwrap();
        assert_eq!((r.in_c, r.in_c0), (Verdict::EvidenceFor, Verdict::EvidenceFor));

        let three = ScaleFunction::on(TimeScale::hybrid(), |_| 3.0);
        let r = membership_report(&three, &cfg).unwrap();
        assert_eq!((r.in_c, r.in_c0), (Verdict::EvidenceFor, Verdict::EvidenceAgainst));

        let sin = ScaleFunction::on(TimeScale::reals(0.0), f64::sin);
        let r = membership_report(&sin, &cfg).unwrap();
        assert_eq!((r.in_c, r.in_c0), (Verdict::Inconclusive, Verdict::Inconclusive));
    }

    #[test]
    fn windows_on_sparse_scales_stay_near_the_horizon() {
        let q = TimeScale::geometric(1.0, 2.0).unwrap();
        let cfg = LimitConfig { horizon: 1e9, ..LimitConfig::default() };
        let f = ScaleFunction::on(q.clone(), |t| 1.0 + 1.0 / t);
        let d = limit_at_infinity(&f, &cfg).unwrap();
        assert_eq!(d.samples.len(), 3);
        assert!((d.limit().unwrap() - 1.0).abs() < 1e-6);
        let signs = ScaleFunction::on(q, |t| if (t.log2().round() as i64) % 2 == 0 { 1.0 } else { -1.0 });
        assert_eq!(limit_at_infinity(&signs, &cfg).unwrap().status, LimitStatus::Unknown);
    }
}
