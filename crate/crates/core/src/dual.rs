//! Continuous linear functionals on convergent functions over an isolated scale.
//!
//! When `[β, inf) ∩ T = {t_1 < t_2 < ...}` consists of isolated points, every
//! such functional has the form `F(f) = b lim f + Σ b_n f(t_n)` with
//! `(b_n) ∈ ℓ¹`, and `‖F‖ = |b| + Σ |b_n|`.

use std::fmt;
use std::sync::{Arc, RwLock};

use serde::de::{self, Deserializer};
use serde::ser::{SerializeStruct, Serializer};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::function::ScaleFunction;
use crate::scale::TimeScale;
use crate::spaces::{limit_at_infinity, LimitConfig};

/// Largest truncation index tried for generated coefficient sequences.
const MAX_TERMS: usize = 1 << 24;

/// The points `t_1 < t_2 < ...` of `[β, inf) ∩ T`, enumerated on demand and cached.
#[derive(Clone)]
pub struct IsolatedScale {
    scale: TimeScale,
    points: Arc<RwLock<Vec<f64>>>,
}

impl fmt::Debug for IsolatedScale {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("IsolatedScale")
            .field("beta", &self.beta())
            .field("cached", &self.points.read().map(|p| p.len()).unwrap_or(0))
            .finish()
    }
}

impl IsolatedScale {
    /// Fails unless every point of `[β, inf) ∩ T` is isolated.
    pub fn new(scale: TimeScale, beta: f64) -> Result<Self> {
        let beta = scale.snap(beta)?;
        if !scale.is_discrete_from(beta) {
            return Err(Error::NotIsolated(beta));
        }
        Ok(Self {
            scale,
            points: Arc::new(RwLock::new(vec![beta])),
        })
    }

    pub fn scale(&self) -> &TimeScale {
        &self.scale
    }

    pub fn beta(&self) -> f64 {
        self.points.read().expect("point cache poisoned")[0]
    }

    fn extend_to(&self, len: usize) -> Result<()> {
        let mut pts = self.points.write().expect("point cache poisoned");
        while pts.len() < len {
            let last = *pts.last().expect("cache holds beta");
            pts.push(self.scale.sigma(last)?);
        }
        Ok(())
    }

    /// `t_k`, with `t_1 = β`.
    pub fn point(&self, k: usize) -> Result<f64> {
        if k == 0 {
            return Err(Error::ZeroIndex(0));
        }
        if let Some(&p) = self.points.read().expect("point cache poisoned").get(k - 1) {
            return Ok(p);
        }
        self.extend_to(k)?;
        Ok(self.points.read().expect("point cache poisoned")[k - 1])
    }

    /// `t_1, ..., t_n`.
    pub fn points(&self, n: usize) -> Result<Vec<f64>> {
        self.extend_to(n)?;
        Ok(self.points.read().expect("point cache poisoned")[..n].to_vec())
    }

    /// The index `k` with `t_k = t`.
    pub fn index_of(&self, t: f64) -> Result<usize> {
        let t = self.scale.snap(t)?;
        if t < self.beta() {
            return Err(Error::BelowMinimum(t));
        }
        loop {
            {
                let pts = self.points.read().expect("point cache poisoned");
                if *pts.last().expect("cache holds beta") >= t {
                    let i = pts.partition_point(|&p| p < t);
                    return Ok(i + 1);
                }
            }
            let len = self.points.read().expect("point cache poisoned").len();
            self.extend_to(2 * len)?;
        }
    }

    /// `t_{k+1} - t_k`.
    pub fn gap(&self, k: usize) -> Result<f64> {
        Ok(self.point(k + 1)? - self.point(k)?)
    }
}

/// `e_k`: 1 at `t_k`, 0 at every other point.
pub fn basis_element(scale: &IsolatedScale, k: usize) -> Result<ScaleFunction> {
    let tk = scale.point(k)?;
    let hi = tk + 0.5 * scale.gap(k)?;
    let lo = if k > 1 { tk - 0.5 * (tk - scale.point(k - 1)?) } else { f64::NEG_INFINITY };
    ScaleFunction::new(scale.scale().clone(), scale.beta(), move |t| {
        if t > lo && t < hi {
            1.0
        } else {
            0.0
        }
    })
}

/// `e ≡ 1`.
pub fn unit_element(scale: &IsolatedScale) -> ScaleFunction {
    ScaleFunction::constant(scale.scale().clone(), scale.beta(), 1.0).expect("beta is a scale point")
}

/// `f` on the first `values.len()` points and `rest` beyond them.
pub fn from_values(scale: &IsolatedScale, values: Vec<f64>, rest: f64) -> Result<ScaleFunction> {
    let pts = scale.points(values.len() + 1)?;
    ScaleFunction::new(scale.scale().clone(), scale.beta(), move |t| {
        let i = pts.partition_point(|&p| p < t);
        let near = |j: usize| pts.get(j).map(|&p| (p - t).abs());
        let k = match (i.checked_sub(1).and_then(near), near(i)) {
            (Some(d0), Some(d1)) if d0 < d1 => i - 1,
            (Some(_), None) => i - 1,
            _ => i,
        };
        values.get(k).copied().unwrap_or(rest)
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SchauderExpansion {
    /// `l = lim f`.
    pub limit: f64,
    /// `f(t_n) - l` for `n = 1..=N`.
    pub coefficients: Vec<f64>,
}

/// `f = l e + Σ (f(t_n) - l) e_n`, truncated to `n_terms` coefficients.
pub fn schauder_expand(
    f: &ScaleFunction,
    scale: &IsolatedScale,
    n_terms: usize,
    cfg: &LimitConfig,
) -> Result<SchauderExpansion> {
    let limit = diagnosed_limit(f, cfg)?;
    let coefficients = scale
        .points(n_terms)?
        .into_iter()
        .map(|t| f.eval(t) - limit)
        .collect();
    Ok(SchauderExpansion {
        limit,
        coefficients,
    })
}

fn diagnosed_limit(f: &ScaleFunction, cfg: &LimitConfig) -> Result<f64> {
    let d = limit_at_infinity(f, cfg)?;
    d.limit().ok_or_else(|| {
        Error::NoLimit(format!(
            "window at {} spreads by {:e} (tolerance {:e})",
            d.horizon, d.oscillation, cfg.tol
        ))
    })
}

type TermFn = Arc<dyn Fn(usize) -> f64 + Send + Sync>;

/// An absolutely summable sequence given by a formula for `b_n` (`n >= 1`)
/// and a certified bound `tail(N) >= Σ_{n > N} |b_n|`.
#[derive(Clone)]
pub struct SummableSequence {
    term: TermFn,
    tail: TermFn,
    name: String,
}

impl SummableSequence {
    pub fn new<T, B>(name: &str, term: T, tail_bound: B) -> Self
    where
        T: Fn(usize) -> f64 + Send + Sync + 'static,
        B: Fn(usize) -> f64 + Send + Sync + 'static,
    {
        Self {
            term: Arc::new(term),
            tail: Arc::new(tail_bound),
            name: name.to_string(),
        }
    }

    /// `b_n = c r^n` with `0 < r < 1`.
    pub fn geometric(c: f64, r: f64) -> Self {
        let tail = move |n: usize| c.abs() * r.powi(n as i32 + 1) / (1.0 - r);
        Self::new(&format!("{c}*{r}^n"), move |n| c * r.powi(n as i32), tail)
    }

    pub fn term(&self, n: usize) -> f64 {
        (self.term)(n)
    }

    pub fn tail_bound(&self, n: usize) -> f64 {
        (self.tail)(n)
    }

    /// Smallest power-of-two `N` with `tail(N) <= tol`, capped at `2^24`.
    fn cutoff(&self, tol: f64) -> usize {
        let mut n = 1;
        while n < MAX_TERMS && !(self.tail_bound(n) <= tol) {
            n *= 2;
        }
        n
    }
}

impl fmt::Debug for SummableSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SummableSequence").field("name", &self.name).finish()
    }
}

#[derive(Debug, Clone)]
pub enum Coefficients {
    Finite(Vec<f64>),
    Generated(SummableSequence),
}

/// `F(f) = b lim f + Σ b_n f(t_n)`.
///
/// Finite representations serialize as `{"b": .., "coeffs": [..]}`.
#[derive(Debug, Clone)]
pub struct DualRep {
    pub b: f64,
    pub coeffs: Coefficients,
}

impl PartialEq for DualRep {
    /// Generated sequences compare by identity.
    fn eq(&self, other: &Self) -> bool {
        self.b == other.b
            && match (&self.coeffs, &other.coeffs) {
                (Coefficients::Finite(a), Coefficients::Finite(b)) => a == b,
                (Coefficients::Generated(a), Coefficients::Generated(b)) => Arc::ptr_eq(&a.term, &b.term),
                _ => false,
            }
    }
}

impl DualRep {
    pub fn finite(b: f64, coeffs: Vec<f64>) -> Self {
        Self {
            b,
            coeffs: Coefficients::Finite(coeffs),
        }
    }

    pub fn generated(b: f64, seq: SummableSequence) -> Self {
        Self {
            b,
            coeffs: Coefficients::Generated(seq),
        }
    }

    /// `b_n` for `n >= 1`.
    pub fn coeff(&self, n: usize) -> f64 {
        match &self.coeffs {
            Coefficients::Finite(c) => n.checked_sub(1).and_then(|i| c.get(i)).copied().unwrap_or(0.0),
            Coefficients::Generated(s) => s.term(n),
        }
    }

    /// Number of stored coefficients and the bound on the rest, for tolerance `tol`.
    fn truncation(&self, tol: f64) -> (usize, f64) {
        match &self.coeffs {
            Coefficients::Finite(c) => (c.len(), 0.0),
            Coefficients::Generated(s) => {
                let n = s.cutoff(tol);
                (n, s.tail_bound(n))
            }
        }
    }
}

impl Serialize for DualRep {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("DualRep", 2)?;
        st.serialize_field("b", &self.b)?;
        match &self.coeffs {
            Coefficients::Finite(c) => st.serialize_field("coeffs", c)?,
            Coefficients::Generated(g) => st.serialize_field("coeffs", &g.name)?,
        }
        st.end()
    }
}

impl<'de> Deserialize<'de> for DualRep {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Raw {
            b: f64,
            #[serde(default)]
            coeffs: Vec<f64>,
        }
        let raw = Raw::deserialize(d)?;
        if !raw.b.is_finite() || raw.coeffs.iter().any(|c| !c.is_finite()) {
            return Err(de::Error::custom("coefficients must be finite"));
        }
        Ok(DualRep::finite(raw.b, raw.coeffs))
    }
}

/// A value with a bound on its truncation error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub error_bound: f64,
}

/// `F(f)`; the series is truncated where the certified tail drops below `cfg.tol`.
///
/// The limit of `f` is diagnosed only when `b != 0`. The error bound is the
/// tail bound times the largest `|f|` seen.
pub fn apply_functional(rep: &DualRep, f: &ScaleFunction, scale: &IsolatedScale, cfg: &LimitConfig) -> Result<Estimate> {
    let limit = if rep.b != 0.0 { diagnosed_limit(f, cfg)? } else { 0.0 };
    let (n, tail) = rep.truncation(cfg.tol);
    let mut value = rep.b * limit;
    let mut f_max = limit.abs();
    for (i, t) in scale.points(n)?.into_iter().enumerate() {
        let v = f.eval(t);
        f_max = f_max.max(v.abs());
        value += rep.coeff(i + 1) * v;
    }
    Ok(Estimate {
        value,
        error_bound: tail * f_max,
    })
}

/// `|b| + Σ |b_n|` with the series truncated at tail bound `tol`.
pub fn functional_norm_bounded(rep: &DualRep, tol: f64) -> Estimate {
    let (n, tail) = rep.truncation(tol);
    let value = (1..=n).fold(rep.b.abs(), |s, k| s + rep.coeff(k).abs());
    Estimate {
        value,
        error_bound: tail,
    }
}

/// `‖F‖ = |b| + Σ |b_n|`; exact for finite coefficient lists.
pub fn functional_norm(rep: &DualRep) -> f64 {
    functional_norm_bounded(rep, 1e-15).value
}

fn sgn(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// `f(t_n) = sgn b_n` for `n <= r` and `sgn b` beyond; `‖f‖ <= 1` and
/// `F(f) -> ‖F‖` as `r` grows.
pub fn norm_witness(rep: &DualRep, scale: &IsolatedScale, r: usize) -> Result<ScaleFunction> {
    if r == 0 {
        return Err(Error::ZeroIndex(0));
    }
    let values = (1..=r).map(|n| sgn(rep.coeff(n))).collect();
    from_values(scale, values, sgn(rep.b))
}

/// `T(F) = (b, b_1, b_2, ...)`; only finite representations have a finite image.
pub fn to_ell1(rep: &DualRep) -> Result<Vec<f64>> {
    match &rep.coeffs {
        Coefficients::Finite(c) => Ok(std::iter::once(rep.b).chain(c.iter().copied()).collect()),
        Coefficients::Generated(g) => Err(Error::Unsupported(format!(
            "generated coefficients {} have no finite ℓ¹ image",
            g.name
        ))),
    }
}

/// Inverse of [`to_ell1`]; the empty sequence is the zero functional.
pub fn from_ell1(seq: &[f64]) -> DualRep {
    match seq.split_first() {
        Some((&b, rest)) => DualRep::finite(b, rest.to_vec()),
        None => DualRep::finite(0.0, Vec::new()),
    }
}

pub fn ell1_norm(seq: &[f64]) -> f64 {
    seq.iter().fold(0.0, |s, v| s + v.abs())
}
