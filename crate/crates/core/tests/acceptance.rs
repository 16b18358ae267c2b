//! Acceptance checks. Runs without the test harness and prints one PASS/FAIL
//! line per criterion; the process fails if any criterion fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tscale::dual::{ell1_norm, from_values, functional_norm, norm_witness, IsolatedScale};
use tscale::kernel::{estimate_m, extremal_function, RegularityConfig, RegularityVerdict};
use tscale::operator::{builtin_operator, extract_kernel, verify_reconstruction};
use tscale::spaces::LimitConfig;
use tscale::{
    apply_functional, basis_element, delta_integral, improper_integral, limit_at_infinity,
    operator_norm_lower_bound, parse_expr, regularity_report, single_step_integral, to_ell1,
    Bindings, DualRep, Kernel, ScaleFunction, TimeScale,
};

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn within_time(start: Instant, limit: Duration) -> Result<(), String> {
    let took = start.elapsed();
    ensure(took < limit, format!("took {took:?}, limit {limit:?}"))
}

fn polynomial(rng: &mut ChaCha8Rng) -> Vec<f64> {
    let degree = rng.gen_range(0..=4);
    (0..=degree).map(|_| rng.gen_range(-3.0..3.0)).collect()
}

fn horner(c: &[f64], t: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &ci| acc * t + ci)
}

fn integer_consistency() -> Check {
    let start = Instant::now();
    let z = TimeScale::integers(0.0);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for case in 0..100 {
        let c = polynomial(&mut rng);
        let a = rng.gen_range(0..=50) as f64;
        let b = rng.gen_range(a as i64..=50) as f64;
        let f = |t: f64| horner(&c, t);
        let got = delta_integral(&z, &f, a, b, 1e-12).map_err(|e| e.to_string())?;
        let mut direct = 0.0;
        let mut t = a;
        while t < b {
            direct += f(t);
            t += 1.0;
        }
        ensure(
            got.value == direct && got.abs_error_estimate == 0.0,
            format!("case {case}: {} vs direct sum {direct}", got.value),
        )?;
    }
    within_time(start, Duration::from_secs(1))?;
    Ok(format!("100 polynomials, all exact, {:?}", start.elapsed()))
}

fn real_consistency() -> Check {
    let start = Instant::now();
    let r = TimeScale::reals(0.0);
    let sq = delta_integral(&r, &|t: f64| t * t, 0.0, 1.0, 1e-9).map_err(|e| e.to_string())?;
    let pi = std::f64::consts::PI;
    let sin = delta_integral(&r, &f64::sin, 0.0, pi, 1e-9).map_err(|e| e.to_string())?;
    ensure((sq.value - 1.0 / 3.0).abs() <= 1e-8, format!("t^2 gave {}", sq.value))?;
    ensure((sin.value - 2.0).abs() <= 1e-8, format!("sin gave {}", sin.value))?;
    within_time(start, Duration::from_secs(1))?;
    Ok(format!(
        "errors {:.1e} and {:.1e}",
        (sq.value - 1.0 / 3.0).abs(),
        (sin.value - 2.0).abs()
    ))
}

fn single_step() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for case in 0..20 {
        let start = rng.gen_range(-5.0..5.0_f64).round();
        let period = rng.gen_range(1.5..4.0);
        let length = rng.gen_range(0.1..period - 0.2);
        let s = TimeScale::periodic(start, length, period).map_err(|e| e.to_string())?;
        let k = rng.gen_range(0..30) as f64;
        let t = s.snap(start + k * period + length).map_err(|e| e.to_string())?;
        let f = |u: f64| u.sin() + 0.5 * u;
        let sigma = s.sigma(t).map_err(|e| e.to_string())?;
        let mu = s.graininess(t).map_err(|e| e.to_string())?;
        let got = delta_integral(&s, &f, t, sigma, 1e-10).map_err(|e| e.to_string())?;
        let single = single_step_integral(&s, &f, t).map_err(|e| e.to_string())?;
        ensure(
            got.value == mu * f(t) && single == mu * f(t),
            format!("case {case}: {} vs {}", got.value, mu * f(t)),
        )?;
    }
    Ok("20 scattered points, all exact".into())
}

fn hybrid_oracle() -> Check {
    let h = TimeScale::hybrid();
    let r = delta_integral(&h, &|t: f64| t, 0.0, 3.0, 1e-9).map_err(|e| e.to_string())?;
    ensure((r.value - 4.0).abs() <= 1e-8, format!("got {}", r.value))?;
    Ok(format!("value {}", r.value))
}

fn q_scale_improper() -> Check {
    let q = TimeScale::geometric(1.0, 2.0).map_err(|e| e.to_string())?;
    let r = improper_integral(&q, &|t: f64| t.powi(-2), 1.0, 1e-7).map_err(|e| e.to_string())?;
    ensure(r.converged, "did not converge")?;
    ensure((r.value - 2.0).abs() <= 1e-6, format!("got {}", r.value))?;
    Ok(format!("value {}", r.value))
}

enum ScaleKind {
    Reals,
    Integers,
    Arithmetic(f64),
    Periodic(f64, f64),
    Union,
}

fn random_scale(rng: &mut ChaCha8Rng) -> TimeScale {
    let kind = match rng.gen_range(0..5) {
        0 => ScaleKind::Reals,
        1 => ScaleKind::Integers,
        2 => ScaleKind::Arithmetic(rng.gen_range(1..8) as f64 * 0.25),
        3 => {
            let period = rng.gen_range(1.5..3.0);
            ScaleKind::Periodic(rng.gen_range(0.2..period - 0.2), period)
        }
        _ => ScaleKind::Union,
    };
    match kind {
        ScaleKind::Reals => TimeScale::reals(0.0),
        ScaleKind::Integers => TimeScale::integers(0.0),
        ScaleKind::Arithmetic(h) => TimeScale::arithmetic(0.0, h).unwrap(),
        ScaleKind::Periodic(len, period) => TimeScale::periodic(0.0, len, period).unwrap(),
        ScaleKind::Union => r#"{"kind":"union","blocks":[{"interval":[0,1.5]},{"point":2},{"point":2.5},{"interval":[3,4]}],"tail":{"kind":"arithmetic","start":5,"step":0.5}}"#
            .parse()
            .unwrap(),
    }
}

fn random_function(rng: &mut ChaCha8Rng) -> Arc<dyn Fn(f64) -> f64 + Send + Sync> {
    let c: Vec<f64> = (0..=3).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let w = rng.gen_range(0.5..3.0);
    let amp = rng.gen_range(-1.0..1.0);
    Arc::new(move |t| horner(&c, t / 4.0) + amp * (w * t).sin())
}

fn interval(rng: &mut ChaCha8Rng, s: &TimeScale) -> (f64, f64, f64) {
    let a = s.floor(rng.gen_range(0.0..3.0)).unwrap();
    let c = s.ceil(rng.gen_range(a + 0.5..8.0)).unwrap();
    let mid = s.floor(rng.gen_range(a..=c)).unwrap().max(a);
    (a, mid, c)
}

fn integral_laws() -> Check {
    let start = Instant::now();
    let tol = 1e-8;
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut cases = 0;
    let integ = |s: &TimeScale, f: &dyn Fn(f64) -> f64, a: f64, b: f64| {
        delta_integral(s, f, a, b, tol).map(|r| r.value).map_err(|e| e.to_string())
    };
    for case in 0..150 {
        let s = random_scale(&mut rng);
        let f = random_function(&mut rng);
        let g = random_function(&mut rng);
        let (a, b, c) = interval(&mut rng, &s);
        let (alpha, beta) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));

        let combo = integ(&s, &|t| alpha * f(t) + beta * g(t), a, c)?;
        let (fi, gi) = (integ(&s, &*f, a, c)?, integ(&s, &*g, a, c)?);
        ensure(
            (combo - (alpha * fi + beta * gi)).abs() <= 2.0 * tol,
            format!("linearity, case {case}: {combo} vs {}", alpha * fi + beta * gi),
        )?;

        let split = integ(&s, &*f, a, b)? + integ(&s, &*f, b, c)?;
        ensure(
            (split - fi).abs() <= 2.0 * tol,
            format!("additivity, case {case}: {split} vs {fi}"),
        )?;

        let upper = |t: f64| f(t) + g(t).abs() + 0.1;
        ensure(
            fi <= integ(&s, &upper, a, c)? + 2.0 * tol,
            format!("monotonicity, case {case}"),
        )?;

        let abs = integ(&s, &|t| f(t).abs(), a, c)?;
        ensure(fi.abs() <= abs + 2.0 * tol, format!("triangle, case {case}"))?;
        cases += 4;
    }
    within_time(start, Duration::from_secs(30))?;
    Ok(format!("{cases} cases, {:?}", start.elapsed()))
}

fn cesaro_limit(k: &Kernel, s: f64, cfg: &LimitConfig) -> Result<f64, String> {
    let f = ScaleFunction::on(TimeScale::integers(0.0), move |n| s + 1.0 / (n + 1.0));
    let lf = k.transform(&f, 1e-10);
    let d = limit_at_infinity(&lf, cfg).map_err(|e| e.to_string())?;
    d.limit().ok_or_else(|| format!("no limit for s = {s}: {:?}", d.status))
}

fn regularity_preservation() -> Check {
    let cfg = LimitConfig {
        horizon: 1e5,
        ..LimitConfig::default()
    };
    let c = Kernel::cesaro();
    let doubled = c.scaled(2.0);
    let mut worst = 0.0_f64;
    for s in [-1.0, 0.0, 3.0] {
        let l = cesaro_limit(&c, s, &cfg)?;
        ensure((l - s).abs() <= 1e-4, format!("s = {s}: limit {l}"))?;
        let l2 = cesaro_limit(&doubled, s, &cfg)?;
        ensure((l2 - 2.0 * s).abs() <= 1e-4, format!("doubled, s = {s}: limit {l2}"))?;
        worst = worst.max((l - s).abs()).max((l2 - 2.0 * s).abs());
    }
    let report = regularity_report(&doubled, &RegularityConfig::default()).map_err(|e| e.to_string())?;
    ensure(
        report.verdict == RegularityVerdict::C0Preserving,
        format!("doubled kernel verdict {:?}", report.verdict),
    )?;
    Ok(format!("max deviation {worst:.1e}; doubled kernel fails only (iv)"))
}

fn cesaro_bounded_divergence() -> Check {
    let signs = ScaleFunction::on(TimeScale::integers(0.0), |n| if n as i64 % 2 == 0 { 1.0 } else { -1.0 });
    let lf = Kernel::cesaro().transform(&signs, 1e-10);
    let cfg = LimitConfig {
        horizon: 1e5,
        tol: 1e-4,
        ..LimitConfig::default()
    };
    let d = limit_at_infinity(&lf, &cfg).map_err(|e| e.to_string())?;
    let l = d.limit().ok_or_else(|| format!("no limit: {:?}", d.status))?;
    ensure(l.abs() <= 1e-4, format!("limit {l}"))?;
    Ok(format!("limit {l:.1e}"))
}

fn alternating_kernel() -> Kernel {
    let z = TimeScale::integers(0.0);
    Kernel::new(z.clone(), 0.0, z, 0.0, |n, k| {
        if k <= n {
            (if k as i64 % 2 == 0 { 1.0 } else { -1.0 }) / (n + 1.0)
        } else {
            0.0
        }
    })
    .unwrap()
    .with_row_support(|n| n)
}

fn operator_norm() -> Check {
    let k = alternating_kernel();
    let m = estimate_m(&k, &RegularityConfig::default()).map_err(|e| e.to_string())?;
    ensure((m.value - 1.0).abs() <= 1e-6, format!("M estimate {}", m.value))?;
    let probes = [1.0, 10.0, 100.0, 1000.0, 10000.0];
    let bound = operator_norm_lower_bound(&k, &probes, &probes, 1e-9).map_err(|e| e.to_string())?;
    ensure(bound >= 1.0 - 1e-3, format!("lower bound {bound}"))?;
    let f = extremal_function(&k, 100.0, 10000.0).map_err(|e| e.to_string())?;
    ensure(f.eval(3.0) == -1.0 && f.eval(4.0) == 1.0, "extremal signs")?;
    Ok(format!("M estimate {}, lower bound {bound}", m.value))
}

fn dual_norm_attainment() -> Check {
    let z = IsolatedScale::new(TimeScale::integers(0.0), 0.0).map_err(|e| e.to_string())?;
    let cfg = LimitConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for case in 0..50 {
        let len = rng.gen_range(0..20);
        let b = if rng.gen_bool(0.2) { 0.0 } else { rng.gen_range(-3.0..3.0) };
        let coeffs: Vec<f64> = (0..len)
            .map(|_| if rng.gen_bool(0.2) { 0.0 } else { rng.gen_range(-2.0..2.0) })
            .collect();
        let rep = DualRep::finite(b, coeffs);
        let norm = functional_norm(&rep);
        let w = norm_witness(&rep, &z, len.max(1)).map_err(|e| e.to_string())?;
        let value = apply_functional(&rep, &w, &z, &cfg).map_err(|e| e.to_string())?.value;
        ensure(
            value.abs() >= norm - 1e-9,
            format!("case {case}: |F(w)| = {} < {norm}", value.abs()),
        )?;
        let seq = to_ell1(&rep).map_err(|e| e.to_string())?;
        ensure(ell1_norm(&seq) == norm, format!("case {case}: l1 norm differs"))?;
    }
    Ok("50 functionals, norm attained, l1 norm preserved exactly".into())
}

fn kernel_extraction() -> Check {
    let z = TimeScale::integers(0.0);
    let iso = IsolatedScale::new(z.clone(), 0.0).map_err(|e| e.to_string())?;
    let xs: Vec<f64> = (0..=50).map(f64::from).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut random_fns = Vec::new();
    for _ in 0..20 {
        let n = rng.gen_range(1..=20);
        let vals = (0..n).map(|_| rng.gen_range(-5.0..5.0)).collect();
        random_fns.push(from_values(&iso, vals, 0.0).map_err(|e| e.to_string())?);
    }
    let basis = (1..=50)
        .map(|k| basis_element(&iso, k))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?;
    let mut summary = Vec::new();
    for name in ["identity", "shift", "cesaro"] {
        let op = builtin_operator(name, &iso).ok_or("missing operator")?;
        let ex = extract_kernel(Arc::clone(&op), z.clone(), 0.0, &iso, 64).map_err(|e| e.to_string())?;
        ensure(ex.warnings.is_empty(), format!("{name}: linearity warnings"))?;
        let on_basis = verify_reconstruction(op.as_ref(), &ex.kernel, &basis, &xs, 1e-12).map_err(|e| e.to_string())?;
        ensure(
            on_basis.checks.iter().all(|c| c.abs_diff == 0.0),
            format!("{name}: basis mismatch {:e}", on_basis.max_abs_diff),
        )?;
        let on_random = verify_reconstruction(op.as_ref(), &ex.kernel, &random_fns, &xs, 1e-12)
            .map_err(|e| e.to_string())?;
        ensure(
            on_random.checks.iter().all(|c| c.pass),
            format!("{name}: random mismatch {:e}", on_random.max_abs_diff),
        )?;
        if name == "cesaro" {
            ensure(
                on_random.row_sums.iter().all(|r| (r.row_integral - 1.0).abs() <= 1e-12),
                "cesaro row integrals differ from 1",
            )?;
        }
        summary.push(format!("{name} {:.0e}", on_random.max_abs_diff));
    }
    Ok(format!("max |diff| on random functions: {}", summary.join(", ")))
}

const FIXED: [&str; 30] = [
    "2*t+1",
    "t^2 - 3*t + 2",
    "-t^2",
    "2^3^2",
    "(1+t)/(1-t)",
    "sin(t)*cos(t)",
    "exp(-t/x)/x",
    "log(t+1)",
    "sqrt(t*t + x*x)",
    "abs(t - x)",
    "sgn(t - 2)",
    "min(t, x) + max(t, x)",
    "floor(t/2)",
    "if(t<=x, 1/(x+1), 0)",
    "if(t>x, t-x, x-t)",
    "if(t==x, 1, 0)",
    "if(t!=x, 1, 0)",
    "if(t>=1, t, -t)",
    "if(t<1, exp(t), log(t))",
    "1e-3*t + 2.5E2",
    "t/x/2",
    "t - x - 1",
    "-(-t)",
    "2^-t",
    "(t+x)^0.5",
    "sin(t)^2 + cos(t)^2",
    "exp(log(t+2))",
    "1/(x+1)*if(t<=x,1,0)",
    "min(1, max(0, t - x))",
    "x*t*exp(-x*t)",
];

fn expression_language() -> Check {
    let e = parse_expr("2*t+1").map_err(|e| e.to_string())?;
    ensure(e.eval(&Bindings::t(3.0)) == Ok(7.0), "2*t+1 at t=3")?;
    let k = parse_expr("if(t<=x, 1/(x+1), 0)").map_err(|e| e.to_string())?;
    ensure(k.eval(&Bindings::xt(4.0, 2.0)) == Ok(0.2), "cesaro row")?;
    let err = parse_expr("2**t").err().ok_or("2**t parsed")?;
    ensure(err.offset == 2, format!("2**t offset {}", err.offset))?;
    ensure(
        parse_expr("sgn(-3.5)").unwrap().eval(&Bindings::default()) == Ok(-1.0),
        "sgn",
    )?;
    ensure(
        parse_expr("exp(-t/x)/x").unwrap().eval(&Bindings::xt(2.0, 0.0)) == Ok(0.5),
        "exp kernel",
    )?;
    ensure(parse_expr("log(t)").unwrap().eval(&Bindings::t(0.0)).is_err(), "log(0)")?;
    let names = |s: &str| parse_expr(s).unwrap().free_vars().into_iter().map(|v| v.name()).collect::<Vec<_>>();
    ensure(names("2*t+1") == ["t"] && names("if(t<=x,1,0)") == ["t", "x"] && names("3.5").is_empty(), "free vars")?;

    let points = [(0.5, 0.25), (1.0, 3.0), (7.0, 2.0)];
    for src in FIXED {
        let a = parse_expr(src).map_err(|e| format!("{src}: {e}"))?;
        let b = parse_expr(&a.to_string()).map_err(|e| format!("{src} rendered: {e}"))?;
        ensure(a == b, format!("{src}: render does not round-trip"))?;
        for (x, t) in points {
            let v1 = a.eval(&Bindings::xt(x, t)).map(f64::to_bits);
            let v2 = b.eval(&Bindings::xt(x, t)).map(f64::to_bits);
            ensure(v1 == v2, format!("{src}: evaluation differs"))?;
        }
    }
    Ok("documented examples hold; 30 fixed expressions bit-identical".into())
}

fn main() {
    let criteria: [Criterion; 12] = [
        ("integer-scale consistency", integer_consistency),
        ("real-scale consistency", real_consistency),
        ("single-step integral", single_step),
        ("hybrid-scale oracle", hybrid_oracle),
        ("q-scale improper integral", q_scale_improper),
        ("integral laws", integral_laws),
        ("limit preservation under Cesaro means", regularity_preservation),
        ("Cesaro means of a bounded divergent sequence", cesaro_bounded_divergence),
        ("operator norm of the alternating kernel", operator_norm),
        ("dual norm attainment", dual_norm_attainment),
        ("kernel extraction round-trip", kernel_extraction),
        ("expression language", expression_language),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        match outcome {
            Ok(detail) => println!("PASS {:>2}. {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2}. {name}: {why}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
