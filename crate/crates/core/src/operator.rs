//! Black-box linear operators on functions over an isolated scale, and the
//! recovery of their kernel `K(x, t_k) (t_{k+1} - t_k) = (L e_k)(x)`.

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::dual::{basis_element, from_values, IsolatedScale};
use crate::error::{Error, Result};
use crate::function::ScaleFunction;
use crate::integrate::DeltaIntegrator;
use crate::kernel::Kernel;
use crate::scale::TimeScale;

/// Random `(f, g, α)` triples tried per extraction.
pub const LINEARITY_TRIALS: usize = 8;
/// Relative tolerance of the linearity spot-check.
pub const LINEARITY_TOL: f64 = 1e-9;
const LINEARITY_SEED: u64 = 0x7363_616c_6521;

/// `f -> Lf`, evaluated one point `x` at a time. Suppliers declare it linear and bounded.
pub trait LinearOperator: Send + Sync {
    fn name(&self) -> &str;
    fn apply(&self, f: &ScaleFunction, x: f64) -> Result<f64>;
}

/// `(Lf)(x) = f(x)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Identity;

impl LinearOperator for Identity {
    fn name(&self) -> &str {
        "identity"
    }

    fn apply(&self, f: &ScaleFunction, x: f64) -> Result<f64> {
        Ok(f.eval(x))
    }
}

/// `(Lf)(t_n) = f(t_{n+1})`.
#[derive(Debug, Clone)]
pub struct Shift {
    pub scale: IsolatedScale,
}

impl LinearOperator for Shift {
    fn name(&self) -> &str {
        "shift"
    }

    fn apply(&self, f: &ScaleFunction, x: f64) -> Result<f64> {
        let n = self.scale.index_of(x)?;
        Ok(f.eval(self.scale.point(n + 1)?))
    }
}

/// `(Lf)(t_n) = (f(t_1) + ... + f(t_n)) / n`.
#[derive(Debug, Clone)]
pub struct Cesaro {
    pub scale: IsolatedScale,
}

impl LinearOperator for Cesaro {
    fn name(&self) -> &str {
        "cesaro"
    }

    fn apply(&self, f: &ScaleFunction, x: f64) -> Result<f64> {
        let n = self.scale.index_of(x)?;
        let sum = self.scale.points(n)?.into_iter().fold(0.0, |s, t| s + f.eval(t));
        Ok(sum / n as f64)
    }
}

/// `(Lf)(x) = ∫_β^inf K(x, t) f(t) Δt`.
#[derive(Debug, Clone)]
pub struct KernelOperator {
    pub kernel: Kernel,
    pub tol: f64,
    pub name: String,
}

impl LinearOperator for KernelOperator {
    fn name(&self) -> &str {
        &self.name
    }

    fn apply(&self, f: &ScaleFunction, x: f64) -> Result<f64> {
        let r = self.kernel.apply(f, x, self.tol)?;
        if r.converged {
            Ok(r.value)
        } else {
            Err(Error::Operator {
                name: self.name.clone(),
                x,
                reason: format!("row integral did not converge (estimate {:e})", r.abs_error_estimate),
            })
        }
    }
}

/// Built-in operators by name: `identity`, `shift`, `cesaro`.
pub fn builtin_operator(name: &str, scale: &IsolatedScale) -> Option<Arc<dyn LinearOperator>> {
    match name {
        "identity" => Some(Arc::new(Identity)),
        "shift" => Some(Arc::new(Shift { scale: scale.clone() })),
        "cesaro" => Some(Arc::new(Cesaro { scale: scale.clone() })),
        _ => None,
    }
}

/// A failed linearity spot-check: `L(αf + g)(x) != α (Lf)(x) + (Lg)(x)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinearityWarning {
    pub alpha: f64,
    pub x: f64,
    pub combined: f64,
    pub separate: f64,
}

#[derive(Debug, Clone)]
pub struct ExtractedKernel {
    pub kernel: Kernel,
    /// Indices `k <= width` are materialized; the kernel vanishes beyond `t_width`.
    pub width: usize,
    pub warnings: Vec<LinearityWarning>,
}

type Memo = Arc<RwLock<HashMap<(u64, usize), f64>>>;

/// `K(x, t_k) = (L e_k)(x) / (t_{k+1} - t_k)` for `k <= width`, computed on
/// first use and memoized per `(x, k)`; `K` is zero beyond `t_width`.
///
/// Linearity is spot-checked on random triples; failures are returned as
/// warnings and extraction proceeds. Operator errors abort.
pub fn extract_kernel(
    op: Arc<dyn LinearOperator>,
    x_scale: TimeScale,
    alpha: f64,
    t_scale: &IsolatedScale,
    width: usize,
) -> Result<ExtractedKernel> {
    if width == 0 {
        return Err(Error::ZeroIndex(0));
    }
    let warnings = linearity_check(op.as_ref(), &x_scale, alpha, t_scale, width)?;
    let pts = Arc::new(t_scale.points(width + 1)?);
    let basis = (1..=width)
        .map(|k| basis_element(t_scale, k))
        .collect::<Result<Vec<_>>>()?;
    let memo: Memo = Arc::default();
    let last = pts[width - 1];
    let lookup = Arc::clone(&pts);
    let k = Kernel::new(x_scale, alpha, t_scale.scale().clone(), t_scale.beta(), move |x, t| {
        let Some(k) = nearest_index(&lookup[..width], t) else {
            return 0.0;
        };
        let key = (x.to_bits(), k);
        if let Some(&v) = memo.read().expect("kernel memo poisoned").get(&key) {
            return v;
        }
        let v = match op.apply(&basis[k], x) {
            Ok(b) => b / (lookup[k + 1] - lookup[k]),
            Err(_) => f64::NAN,
        };
        memo.write().expect("kernel memo poisoned").entry(key).or_insert(v);
        v
    })?
    .with_row_support(move |_| last);
    Ok(ExtractedKernel {
        kernel: k,
        width,
        warnings,
    })
}

/// Zero-based index of the point equal to `t` up to a relative `1e-9`.
fn nearest_index(pts: &[f64], t: f64) -> Option<usize> {
    let i = pts.partition_point(|&p| p < t);
    [i.checked_sub(1), Some(i)]
        .into_iter()
        .flatten()
        .filter(|&j| j < pts.len())
        .find(|&j| (pts[j] - t).abs() <= 1e-9 * 1f64.max(t.abs()))
}

fn linearity_check(
    op: &dyn LinearOperator,
    x_scale: &TimeScale,
    alpha: f64,
    t_scale: &IsolatedScale,
    width: usize,
) -> Result<Vec<LinearityWarning>> {
    let mut rng = ChaCha8Rng::seed_from_u64(LINEARITY_SEED);
    let n = width.min(16);
    let alpha0 = x_scale.snap(alpha)?;
    let random_fn = |rng: &mut ChaCha8Rng| {
        let vals = (0..n).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        from_values(t_scale, vals, 0.0)
    };
    let mut out = Vec::new();
    for _ in 0..LINEARITY_TRIALS {
        let f = random_fn(&mut rng)?;
        let g = random_fn(&mut rng)?;
        let a: f64 = rng.gen_range(-2.0..=2.0);
        let x = x_scale.floor(alpha0 + rng.gen_range(0.0..n as f64))?;
        let combined = op.apply(&f.axpy(a, &g), x)?;
        let separate = a * op.apply(&f, x)? + op.apply(&g, x)?;
        let scale = 1f64.max(combined.abs()).max(separate.abs());
        if !((combined - separate).abs() <= LINEARITY_TOL * scale) {
            out.push(LinearityWarning {
                alpha: a,
                x,
                combined,
                separate,
            });
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReconstructionCheck {
    pub function: usize,
    pub x: f64,
    pub operator: f64,
    pub kernel: f64,
    pub abs_diff: f64,
    pub pass: bool,
}

/// `∫ K(x, t) Δt` against `(L 1)(x)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RowSumCheck {
    pub x: f64,
    pub row_integral: f64,
    pub operator_on_one: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReconstructionReport {
    pub checks: Vec<ReconstructionCheck>,
    pub row_sums: Vec<RowSumCheck>,
    pub max_abs_diff: f64,
    pub pass: bool,
}

/// Compares `(L f)(x)` with `∫ K(x, t) f(t) Δt` for every test function and
/// `x`, plus the row sums against `L` applied to `f ≡ 1`.
///
/// A comparison passes within `tol * max(1, |(Lf)(x)|)`.
pub fn verify_reconstruction(
    op: &dyn LinearOperator,
    k: &Kernel,
    test_fns: &[ScaleFunction],
    xs: &[f64],
    tol: f64,
) -> Result<ReconstructionReport> {
    let integ = DeltaIntegrator::default();
    let within = |a: f64, b: f64| (a - b).abs() <= tol * 1f64.max(a.abs());
    let mut checks = Vec::with_capacity(test_fns.len() * xs.len());
    for (i, f) in test_fns.iter().enumerate() {
        for &x in xs {
            let operator = op.apply(f, x)?;
            let kernel = k.apply_with(&integ, f, x, tol)?.value;
            checks.push(ReconstructionCheck {
                function: i,
                x,
                operator,
                kernel,
                abs_diff: (operator - kernel).abs(),
                pass: within(operator, kernel),
            });
        }
    }
    let one = ScaleFunction::constant(k.t_scale().clone(), k.beta(), 1.0)?;
    let mut row_sums = Vec::with_capacity(xs.len());
    for &x in xs {
        let row_integral = k.row_sum(&integ, x, tol)?.value;
        let operator_on_one = op.apply(&one, x)?;
        row_sums.push(RowSumCheck {
            x,
            row_integral,
            operator_on_one,
            pass: within(operator_on_one, row_integral),
        });
    }
    let max_abs_diff = checks.iter().fold(0.0_f64, |m, c| m.max(c.abs_diff));
    let pass = checks.iter().all(|c| c.pass) && row_sums.iter().all(|r| r.pass);
    Ok(ReconstructionReport {
        checks,
        row_sums,
        max_abs_diff,
        pass,
    })
}
