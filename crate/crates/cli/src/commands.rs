use crate::{Command, Common, Failure};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};
use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, Write};
use std::path::Path;
use std::time::Instant;
use twm_core::arith::primes_up_to;
use twm_core::bump::{Bump, TestFunction};
use twm_core::eulerprod::moment_constant;
use twm_core::kernel::{central_truncation, shifted_truncation, AfeValue};
use twm_core::modform::{cache, tau_expansion_limit, EigenformCoefficients};
use twm_core::moments::*;
use twm_core::quadchar::{gauss_sum_bruteforce, gauss_sum_closed_form, poisson_identity_check};

const WEIGHT: u32 = 12;
/// Smallest table worth caching; requests are rounded up to 2^k − 1.
const MIN_TABLE: usize = 4095;

type Outcome<T = ()> = Result<T, Failure>;

fn io_err<'a>(what: &'a str, path: Option<&'a Path>) -> impl Fn(io::Error) -> Failure + 'a {
    move |e| match path {
        Some(p) => Failure::io(format!("{what} {}: {e}", p.display())),
        None => Failure::io(format!("{what}: {e}")),
    }
}

/// The destination for the main output: `--out` or stdout.
fn sink(path: Option<&Path>) -> Outcome<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(File::create(p).map_err(io_err("creating", Some(p)))?),
        None => Box::new(io::stdout().lock()),
    })
}

struct Run {
    common: Common,
    command: &'static str,
    start: Instant,
}

impl Run {
    fn new(common: Common, command: &'static str) -> Outcome<Self> {
        let eps = common.eps;
        if !(1e-15..=1e-6).contains(&eps) {
            return Err(Failure::range(format!("eps must lie in [1e-15, 1e-6], got {eps}")));
        }
        if let Some(t) = common.threads {
            if t == 0 {
                return Err(Failure::range("threads must be at least 1"));
            }
            rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build_global()
                .map_err(|e| Failure::usage(format!("thread pool: {e}")))?;
        }
        Ok(Self { common, command, start: Instant::now() })
    }

    fn x(&self, min: f64) -> Outcome<f64> {
        let x = self.common.x.ok_or_else(|| Failure::usage(format!("{} needs --X", self.command)))?;
        if !(x >= min) || !x.is_finite() {
            return Err(Failure::range(format!("X must be at least {min}, got {x}")));
        }
        Ok(x)
    }

    fn required(&self, v: Option<f64>, name: &str) -> Outcome<f64> {
        let v = v.ok_or_else(|| Failure::usage(format!("{} needs --{name}", self.command)))?;
        if !(v > 0.0) || !v.is_finite() {
            return Err(Failure::range(format!("{name} must be positive, got {v}")));
        }
        Ok(v)
    }

    /// Δ's table with at least `n_needed` coefficients, from the cache.
    fn coefficients(&self, n_needed: usize) -> Outcome<EigenformCoefficients> {
        let rounded = (n_needed.max(MIN_TABLE) + 1).next_power_of_two() - 1;
        let n = if rounded <= tau_expansion_limit() { rounded } else { n_needed };
        Ok(cache::load_or_expand_delta(&self.common.cache_dir, n)?.truncated(n_needed.max(1))?)
    }

    fn central_table(&self, q: f64) -> Outcome<EigenformCoefficients> {
        self.coefficients(central_truncation(WEIGHT, q, self.common.eps)?)
    }

    /// Writes {"command", "config", "report", "meta"}.
    fn emit(&self, config: Value, report: impl Serialize) -> Outcome {
        let doc = json!({
            "command": self.command,
            "config": config,
            "report": report,
            "meta": {
                "version": env!("CARGO_PKG_VERSION"),
                "threads": rayon::current_num_threads(),
                "wall_time_s": self.start.elapsed().as_secs_f64(),
                "cache_dir": self.common.cache_dir.display().to_string(),
            },
        });
        let out = self.common.out.as_deref();
        let mut w = sink(out)?;
        let text = serde_json::to_string_pretty(&doc).map_err(|e| Failure::io(e.to_string()))?;
        writeln!(w, "{text}").map_err(io_err("writing", out))
    }

    fn csv_writer(&self, path: Option<&Path>) -> Outcome<csv::Writer<Box<dyn Write>>> {
        Ok(csv::Writer::from_writer(sink(path)?))
    }
}

fn csv_fail(e: csv::Error) -> Failure {
    Failure::io(format!("writing CSV: {e}"))
}

#[derive(Serialize)]
struct LValueRow {
    d: u64,
    #[serde(rename = "8d")]
    eight_d: u64,
    #[serde(rename = "L")]
    l: f64,
    #[serde(rename = "N_trunc")]
    n_trunc: usize,
    tail_bound: f64,
}

fn write_lvalue_rows(run: &Run, path: Option<&Path>, values: &[AfeValue]) -> Outcome {
    let mut w = run.csv_writer(path)?;
    for v in values {
        w.serialize(LValueRow {
            d: v.d.d_odd(),
            eight_d: v.d.value(),
            l: v.value.re,
            n_trunc: v.truncation,
            tail_bound: v.tail_bound,
        })
        .map_err(csv_fail)?;
    }
    w.flush().map_err(io_err("writing CSV", path))
}

fn parse_shift(s: &str) -> Outcome<Complex64> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let num = |t: &str| t.parse::<f64>().map_err(|_| Failure::usage(format!("bad shift component '{t}' in '{s}'")));
    match parts.as_slice() {
        [re] => Ok(Complex64::new(num(re)?, 0.0)),
        [re, im] => Ok(Complex64::new(num(re)?, num(im)?)),
        _ => Err(Failure::usage(format!("shift must be `re` or `re,im`, got '{s}'"))),
    }
}

pub fn run(command: Command) -> Outcome {
    match command {
        Command::Coeffs { common, n_max, csv } => {
            let run = Run::new(common, "coeffs")?;
            if n_max == 0 {
                return Err(Failure::range("n-max must be at least 1"));
            }
            let coeffs = cache::load_or_expand_delta(&run.common.cache_dir, n_max)?;
            if let Some(path) = csv.as_deref() {
                let mut w = run.csv_writer(Some(path))?;
                w.write_record(["n", "lambda"]).map_err(csv_fail)?;
                for n in 1..=n_max {
                    w.write_record([n.to_string(), coeffs.get(n).to_string()]).map_err(csv_fail)?;
                }
                w.flush().map_err(io_err("writing CSV", Some(path)))?;
            }
            let report = coeffs.invariant_report();
            run.emit(
                json!({ "n_max": n_max }),
                json!({ "weight": coeffs.weight(), "n_max": coeffs.n_max(), "invariants": report, "holds": report.holds(1e-9) }),
            )
        }
        Command::Constant { common } => {
            let run = Run::new(common, "constant")?;
            let cutoff = run.common.prime_cutoff;
            let coeffs = run.coefficients(cutoff as usize)?;
            let c = moment_constant(&coeffs, cutoff)?;
            run.emit(json!({ "prime_cutoff": cutoff }), c)
        }
        Command::Lvalues { common } => {
            let run = Run::new(common, "lvalues")?;
            let x = run.x(8.0)?;
            let coeffs = run.central_table(x)?;
            let values = central_values(x, &coeffs, run.common.eps)?;
            write_lvalue_rows(&run, run.common.out.as_deref(), &values)
        }
        Command::Moment { common, f, csv } => {
            let run = Run::new(common, "moment")?;
            let x = run.x(8.0)?;
            let eps = run.common.eps;
            let cutoff = run.common.prime_cutoff;
            let support = f.map_or(1.0, Bump::support_end);
            let coeffs = run.coefficients(central_truncation(WEIGHT, x * support, eps)?.max(cutoff as usize))?;
            let constant = moment_constant(&coeffs, cutoff)?;
            let report = match f {
                Some(f) => second_moment_smoothed(x, TestFunction::new(f), &coeffs, &constant, eps)?,
                None => second_moment_sharp(x, &coeffs, &constant, eps)?,
            };
            if let Some(path) = csv.as_deref() {
                write_lvalue_rows(&run, Some(path), &central_values(x * support, &coeffs, eps)?)?;
            }
            run.emit(
                json!({ "X": x, "eps": eps, "prime_cutoff": cutoff, "f": f.map(Bump::name) }),
                json!({ "constant": constant, "moment": report }),
            )
        }
        Command::Prop31 { common, f, shape } => {
            let run = Run::new(common, "prop31")?;
            let x = run.x(8.0)?;
            let u1 = run.required(run.common.u1, "U1")?;
            let u2 = run.required(run.common.u2, "U2")?;
            let eps = run.common.eps;
            let coeffs = run.central_table(u1.max(u2).max(x * f.support_end()))?;
            let params = Prop31Params { x, u1, u2, f: TestFunction::new(f), shape: shape.into(), eps };
            let report = prop31_check_with(&params, &coeffs)?;
            run.emit(serde_json::to_value(params).unwrap(), report)
        }
        Command::Lowerbound { common, f } => {
            let run = Run::new(common, "lowerbound")?;
            let x = run.x(8.0)?;
            let u = run.required(run.common.u, "U")?;
            let coeffs = run.central_table(x * f.support_end())?;
            let report = lower_bound_ratio(x, u, TestFunction::new(f), &coeffs, run.common.eps)?;
            run.emit(json!({ "X": x, "U": u, "eps": run.common.eps, "f": f.name() }), report)
        }
        Command::Absplit { common, f } => {
            let run = Run::new(common, "absplit")?;
            let x = run.x(8.0)?;
            let u = run.required(run.common.u, "U")?;
            let coeffs = run.central_table(x * f.support_end())?;
            let report = ab_split_sizes(x, u, TestFunction::new(f), &coeffs, run.common.eps)?;
            run.emit(json!({ "X": x, "U": u, "eps": run.common.eps, "f": f.name() }), report)
        }
        Command::Distribution { common, z1, z2, csv } => {
            let run = Run::new(common, "distribution")?;
            let x = run.x(8.0)?;
            let eps = run.common.eps;
            let shift = ShiftPair::new(parse_shift(&z1)?, parse_shift(&z2)?, x)?;
            let mut n = 0;
            for z in [shift.z1(), shift.z2()] {
                n = n.max(shifted_truncation(WEIGHT, x, z, eps)?);
            }
            let coeffs = run.coefficients(n.max(central_truncation(WEIGHT, x, eps)?))?;
            let report = distribution_stats(&shift, &coeffs, eps)?;
            if let Some(path) = csv.as_deref() {
                let mut w = run.csv_writer(Some(path))?;
                w.write_record(["d", "8d", "log_abs_product"]).map_err(csv_fail)?;
                for (d, v) in log_abs_products(&shift, &coeffs, eps)? {
                    let v = v.map_or(String::new(), |v| v.to_string());
                    w.write_record([d.d_odd().to_string(), d.value().to_string(), v]).map_err(csv_fail)?;
                }
                w.flush().map_err(io_err("writing CSV", Some(path)))?;
            }
            run.emit(json!({ "X": x, "z1": z1, "z2": z2, "eps": eps }), report)
        }
        Command::GaussSelftest { common, n_max, k_max } => {
            let run = Run::new(common, "gauss-selftest")?;
            if !(1..=20_000).contains(&n_max) || !(0..=10_000).contains(&k_max) {
                return Err(Failure::range("need 1 ≤ n-max ≤ 20000 and 0 ≤ k-max ≤ 10000"));
            }
            let rows: Vec<(i64, i64, f64)> = (1..=n_max)
                .into_par_iter()
                .filter(|n| n % 2 == 1)
                .map(|n| -> Outcome<(i64, i64, f64)> {
                    let mut worst = (n, -k_max, 0.0f64);
                    for k in -k_max..=k_max {
                        let diff = (gauss_sum_closed_form(k, n)? - gauss_sum_bruteforce(k, n)?).norm();
                        if diff > worst.2 {
                            worst = (n, k, diff);
                        }
                    }
                    Ok(worst)
                })
                .collect::<Outcome<_>>()?;
            let mut w = run.csv_writer(run.common.out.as_deref())?;
            w.write_record(["n", "k", "abs_diff", "bound"]).map_err(csv_fail)?;
            let mut bad = Vec::new();
            for &(n, k, diff) in &rows {
                let bound = 1e-8 * (1.0 + n as f64);
                if !(diff < bound) {
                    bad.push(n);
                }
                w.write_record([n.to_string(), k.to_string(), diff.to_string(), bound.to_string()]).map_err(csv_fail)?;
            }
            w.flush().map_err(io_err("writing CSV", run.common.out.as_deref()))?;
            if !bad.is_empty() {
                return Err(Failure {
                    code: 5,
                    kind: "computation",
                    message: format!("closed form and brute force disagree for n in {bad:?}"),
                });
            }
            Ok(())
        }
        Command::PoissonCheck { common, n_max, z, f } => {
            let run = Run::new(common, "poisson-check")?;
            if !(1..=999).contains(&n_max) {
                return Err(Failure::range("need 1 ≤ n-max ≤ 999"));
            }
            let bumps: Vec<Bump> = f.map_or(Bump::ALL.to_vec(), |f| vec![f]);
            let cases: Vec<(Bump, f64, i64)> = bumps
                .iter()
                .flat_map(|&b| z.iter().flat_map(move |&zz| (1..=n_max).step_by(2).map(move |n| (b, zz, n))))
                .collect();
            let checks = cases
                .par_iter()
                .map(|&(b, zz, n)| poisson_identity_check(n, zz, b))
                .collect::<Result<Vec<_>, _>>()?;
            let mut w = run.csv_writer(run.common.out.as_deref())?;
            w.write_record(["n", "Z", "F", "residual"]).map_err(csv_fail)?;
            for c in checks {
                w.write_record([c.n.to_string(), c.z.to_string(), c.function.name().to_string(), c.residual.to_string()])
                    .map_err(csv_fail)?;
            }
            w.flush().map_err(io_err("writing CSV", run.common.out.as_deref()))
        }
        Command::SieveCheck { common, m, n } => {
            let run = Run::new(common, "sieve-check")?;
            let seed = run.common.seed;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a: Vec<Complex64> =
                (0..n).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
            let ratio = large_sieve_ratio(m, n, &a)?;
            run.emit(json!({ "M": m, "N": n, "seed": seed }), json!({ "ratio": ratio }))
        }
        Command::Polymoment { common, y, k, draws, report_only } => {
            let run = Run::new(common, "polymoment")?;
            let x = run.x(3.0)?;
            if !(y >= 3.0) || !y.is_finite() {
                return Err(Failure::range(format!("y must be at least 3, got {y}")));
            }
            let seed = run.common.seed;
            let policy = if report_only { HypothesisPolicy::ReportOnly } else { HypothesisPolicy::Enforce };
            let primes: Vec<u64> = primes_up_to(y as usize).into_iter().filter(|&p| p > 2).collect();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut checks = Vec::with_capacity(draws);
            for _ in 0..draws {
                let a: BTreeMap<u64, Complex64> = primes
                    .iter()
                    .map(|&p| (p, Complex64::from_polar(1.0, rng.gen_range(0.0..std::f64::consts::TAU))))
                    .collect();
                checks.push(dirichlet_poly_moment_check(x, y, k, &a, policy)?);
            }
            let max_ratio = checks.iter().map(|c| c.ratio).fold(0.0, f64::max);
            run.emit(
                json!({ "X": x, "y": y, "k": k, "draws": draws, "seed": seed, "policy": policy }),
                json!({ "max_ratio": max_ratio, "checks": checks }),
            )
        }
        Command::Decorrelation { common, sigma, t } => {
            let run = Run::new(common, "decorrelation")?;
            let x = run.x(8.0)?;
            let eps = run.common.eps;
            let mut n = central_truncation(WEIGHT, x, eps)?;
            for &ti in &t {
                n = n.max(shifted_truncation(WEIGHT, x, Complex64::new(sigma - 0.5, ti), eps)?);
            }
            let coeffs = run.coefficients(n)?;
            let report = shifted_decorrelation_scan(x, sigma, &t, &coeffs, eps)?;
            run.emit(json!({ "X": x, "sigma": sigma, "t": t, "eps": eps }), report)
        }
    }
}
