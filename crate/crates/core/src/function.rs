use std::fmt;
use std::sync::Arc;

use crate::error::Result;
use crate::scale::TimeScale;

type Evaluator = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A real function on `[start, inf) ∩ T`.
///
/// Cloning is cheap; the evaluator is shared.
#[derive(Clone)]
pub struct ScaleFunction {
    eval: Evaluator,
    scale: TimeScale,
    start: f64,
}

impl ScaleFunction {
    pub fn new<F>(scale: TimeScale, start: f64, f: F) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let start = scale.snap(start)?;
        Ok(Self {
            eval: Arc::new(f),
            scale,
            start,
        })
    }

    /// A function on the whole scale, starting at its minimum.
    pub fn on<F>(scale: TimeScale, f: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let start = scale.min();
        Self {
            eval: Arc::new(f),
            scale,
            start,
        }
    }

    pub fn constant(scale: TimeScale, start: f64, c: f64) -> Result<Self> {
        Self::new(scale, start, move |_| c)
    }

    #[inline]
    pub fn eval(&self, t: f64) -> f64 {
        (self.eval)(t)
    }

    pub fn scale(&self) -> &TimeScale {
        &self.scale
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    /// Borrowable evaluator, for the integration routines.
    pub fn as_fn(&self) -> impl Fn(f64) -> f64 + '_ {
        move |t| self.eval(t)
    }

    /// Same domain, values transformed pointwise.
    pub fn map<G>(&self, g: G) -> Self
    where
        G: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let inner = Arc::clone(&self.eval);
        self.with_eval(move |t| g(inner(t)))
    }

    /// `alpha * self + other`; `other` is evaluated on this function's domain.
    pub fn axpy(&self, alpha: f64, other: &ScaleFunction) -> Self {
        let f = Arc::clone(&self.eval);
        let g = Arc::clone(&other.eval);
        self.with_eval(move |t| alpha * f(t) + g(t))
    }

    pub fn abs(&self) -> Self {
        self.map(f64::abs)
    }

    pub fn shifted(&self, c: f64) -> Self {
        self.map(move |v| v + c)
    }

    fn with_eval<F>(&self, f: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            eval: Arc::new(f),
            scale: self.scale.clone(),
            start: self.start,
        }
    }
}

impl fmt::Debug for ScaleFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScaleFunction")
            .field("scale", &self.scale)
            .field("start", &self.start)
            .finish_non_exhaustive()
    }
}
