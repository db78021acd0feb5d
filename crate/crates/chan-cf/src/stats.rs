//! Monte-Carlo pushforward experiments, Birkhoff averages, the ergodic
//! constants (Khintchin-type, growth, entropy) and the random Fibonacci
//! recurrence.
//!
//! Orbits here run in plain f64: distributional statistics tolerate
//! pointwise shadowing error far above sampling noise. Digit-accurate work
//! lives in the validated expansion.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cf::{branch_index, tau_step};
use crate::error::{Error, Result};
use crate::measure::{cdf_omega, digit_probability, density_rho, MeasureSpec};
use crate::params::ChanParams;
use crate::quad::{adaptive_simpson, QuadratureResult};

const BLOCK: usize = 1 << 16;

/// Deterministic-seed Monte-Carlo experiment description. Identical configs
/// produce bit-identical reports: samples are generated in fixed-size blocks,
/// block b from stream b of a counter-based generator, and merged in block
/// order regardless of thread count.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimulationConfig {
    pub params: ChanParams,
    pub samples: usize,
    pub iterations: usize,
    pub seed: u64,
    pub initial: MeasureSpec,
    /// Evaluation grid size for the per-iteration error samples.
    pub eval_points: usize,
}

impl SimulationConfig {
    pub fn new(params: ChanParams, samples: usize, iterations: usize, seed: u64, initial: MeasureSpec) -> Self {
        Self { params, samples, iterations, seed, initial, eval_points: 101 }
    }
}

/// Per-iteration distances between the pushforward empirical CDF and the
/// invariant CDF.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ErrorReport {
    /// KS distance after n iterations, n = 0..=iterations.
    pub ks_per_iteration: Vec<f64>,
    /// Fixed evaluation abscissas.
    pub eval_grid: Vec<f64>,
    /// Signed empirical-CDF errors on the evaluation grid, per iteration.
    pub grid_errors: Vec<Vec<f64>>,
}

fn block_rng(seed: u64, block: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(block as u64);
    rng
}

/// One-sample Kolmogorov-Smirnov statistic for sorted samples against a
/// reference CDF, evaluated exactly from the order statistics.
pub fn ks_statistic(sorted: &[f64], cdf: impl Fn(f64) -> f64) -> Result<f64> {
    if sorted.is_empty() {
        return Err(Error::EmptySample);
    }
    let n = sorted.len() as f64;
    let mut sup = 0.0f64;
    for (idx, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        sup = sup.max(((idx + 1) as f64 / n - f).abs());
        sup = sup.max((idx as f64 / n - f).abs());
    }
    Ok(sup)
}

/// Push N samples of the initial measure through the map, reporting the KS
/// distance to the invariant CDF after every iteration.
pub fn simulate_pushforward(cfg: &SimulationConfig) -> Result<ErrorReport> {
    let params = cfg.params;
    let blocks = cfg.samples.div_ceil(BLOCK);
    let mut samples: Vec<f64> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = block_rng(cfg.seed, b);
            let count = BLOCK.min(cfg.samples - b * BLOCK);
            (0..count)
                .map(|_| {
                    let u: f64 = rng.gen();
                    cfg.initial.sample(u, &params).expect("u in [0,1]")
                })
                .collect::<Vec<f64>>()
        })
        .flatten()
        .collect();

    let eval_grid: Vec<f64> = (0..cfg.eval_points)
        .map(|k| k as f64 / (cfg.eval_points - 1) as f64)
        .collect();
    let omega = |x: f64| cdf_omega(x, &params).expect("x in [0,1]");

    let mut ks_per_iteration = Vec::with_capacity(cfg.iterations + 1);
    let mut grid_errors = Vec::with_capacity(cfg.iterations + 1);
    for step in 0..=cfg.iterations {
        let mut sorted = samples.clone();
        sorted.par_sort_unstable_by(f64::total_cmp);
        ks_per_iteration.push(ks_statistic(&sorted, omega)?);
        grid_errors.push(
            eval_grid
                .iter()
                .map(|&x| empirical_cdf(&sorted, x) - omega(x))
                .collect(),
        );
        if step < cfg.iterations {
            samples
                .par_iter_mut()
                .for_each(|x| *x = tau_step(*x, &params).expect("orbit stays in [0,1]"));
        }
    }
    Ok(ErrorReport { ks_per_iteration, eval_grid, grid_errors })
}

fn empirical_cdf(sorted: &[f64], x: f64) -> f64 {
    let count = sorted.partition_point(|&s| s <= x);
    count as f64 / sorted.len() as f64
}

/// Khintchin-type constant: (log m) * sum_i i * gamma_m(I_i), summed until
/// the closed-form geometric tail bound drops below `tol`.
pub fn khinchin_chi(params: &ChanParams, tol: f64) -> QuadratureResult {
    let m = params.m_f64();
    let log_m = m.ln();
    let rho_max = density_rho(0.0, params).expect("0 in domain");
    let mut total = 0.0;
    let mut i = 0u32;
    loop {
        total += f64::from(i) * digit_probability(i, params);
        // sum_{j>i} j p_j <= rho(0) (1-1/m) sum_{j>i} j m^-j, closed form
        let r = 1.0 / m;
        let j = f64::from(i) + 1.0;
        let tail = rho_max * (1.0 - r) * r.powf(j) * (j * (1.0 - r) + r)
            / ((1.0 - r) * (1.0 - r));
        if log_m * tail < tol || i > 4000 {
            return QuadratureResult {
                value: log_m * total,
                error: log_m * tail,
            };
        }
        i += 1;
    }
}

/// Growth constant of the random Fibonacci recurrence:
/// k_m * int_0^1 (-log t) / (((m-1)t+1)((m-1)t+m)) dt,
/// computed with the substitution t = e^-u that removes the endpoint
/// singularity.
pub fn levy_growth(params: &ChanParams, tol: f64) -> Result<QuadratureResult> {
    let m = params.m_f64();
    let k = params.k_m();
    let integrand = |u: f64| {
        let t = (-u).exp();
        u * t / (((m - 1.0) * t + 1.0) * ((m - 1.0) * t + m))
    };
    let cut = 40.0;
    let body = adaptive_simpson(&integrand, 0.0, cut, (tol / k).max(1e-14))?;
    // tail: integrand <= u e^-u / m beyond the cut
    let tail = (cut + 1.0) * (-cut).exp() / m;
    Ok(QuadratureResult {
        value: k * body.value,
        error: k * (body.error + tail),
    })
}

/// Upper bound k_m (3m-1) / (2m(2m-1)) for the growth constant.
pub fn levy_growth_bound(params: &ChanParams) -> f64 {
    let m = params.m_f64();
    params.k_m() * (3.0 * m - 1.0) / (2.0 * m * (2.0 * m - 1.0))
}

/// Entropy computed two ways.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct EntropyResult {
    /// Branch-wise quadrature of int log|tau'| rho.
    pub quadrature: QuadratureResult,
    /// 2*growth - chi - log(m-1).
    pub identity: QuadratureResult,
}

/// Rohlin entropy of the map under its invariant measure.
pub fn entropy(params: &ChanParams, tol: f64) -> Result<EntropyResult> {
    let m = params.m_f64();
    let log_m = m.ln();
    let log_m1 = (m - 1.0).ln();
    let rho_max = density_rho(0.0, params).expect("0 in domain");

    // |tau'| = m^-i / ((m-1) x^2) on I_i
    let mut total = 0.0;
    let mut quad_err = 0.0;
    let mut i = 0u32;
    loop {
        let lo = params.alpha_pow(i + 1);
        let hi = params.alpha_pow(i);
        let fi = f64::from(i);
        let integrand = |x: f64| {
            let rho = density_rho(x, params).expect("x in domain");
            (-fi * log_m - log_m1 - 2.0 * x.ln()) * rho
        };
        let part = adaptive_simpson(&integrand, lo, hi, tol * params.alpha_pow(i) / 4.0)?;
        total += part.value;
        quad_err += part.error;
        // |term_j| <= (3(j+1)log m + |log(m-1)|) * rho_max m^-j for j > i
        let r = 1.0 / m;
        let j = fi + 1.0;
        let tail = rho_max
            * (3.0 * log_m * (r.powf(j) * (j * (1.0 - r) + r) / ((1.0 - r) * (1.0 - r)) + r.powf(j) / (1.0 - r))
                + log_m1.abs() * r.powf(j) / (1.0 - r));
        if tail < tol / 2.0 || i > 4000 {
            quad_err += tail;
            break;
        }
        i += 1;
    }

    let growth = levy_growth(params, tol / 4.0)?;
    let chi = khinchin_chi(params, tol / 4.0);
    let identity = QuadratureResult {
        value: 2.0 * growth.value - chi.value - log_m1,
        error: 2.0 * growth.error + chi.error,
    };
    Ok(EntropyResult {
        quadrature: QuadratureResult { value: total, error: quad_err },
        identity,
    })
}

/// Observables for Birkhoff time averages.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Observable {
    /// First digit a_1 of the current orbit point.
    Digit,
    /// -log x.
    NegLog,
    /// log|tau'(x)|.
    LogDeriv,
}

/// Time average of an observable along a gamma_m-started orbit.
pub fn birkhoff_average(obs: Observable, params: &ChanParams, steps: usize, seed: u64) -> Result<f64> {
    let mut rng = block_rng(seed, 0);
    let u: f64 = rng.gen();
    let mut x = crate::measure::sample_gamma(u, params)?;
    let m = params.m_f64();
    let log_m = m.ln();
    let log_m1 = (m - 1.0).ln();
    let mut acc = 0.0;
    for _ in 0..steps {
        if x <= 0.0 {
            // the f64 orbit hit 0 (measure-zero in exact arithmetic);
            // restart from a fresh invariant-measure sample
            let u: f64 = rng.gen();
            x = crate::measure::sample_gamma(u, params)?;
        }
        let a = branch_index(x, params)?;
        acc += match obs {
            Observable::Digit => f64::from(a),
            Observable::NegLog => -x.ln(),
            Observable::LogDeriv => -f64::from(a) * log_m - log_m1 - 2.0 * x.ln(),
        };
        x = tau_step(x, params)?;
    }
    Ok(acc / steps as f64)
}

/// Log-growth estimates of the random Fibonacci recurrence.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GrowthResult {
    /// (1/n) log f_n for each seed.
    pub per_seed: Vec<f64>,
    pub mean: f64,
    pub std_error: f64,
}

/// (1/n) log f_n along an explicit digit stream, in log space: track
/// r = f_{n-1}/f_n in (0,1) and accumulate log increments, so the recurrence
/// never overflows.
pub fn fibonacci_log_growth(digits: &[u32], params: &ChanParams, n: usize) -> Result<Vec<f64>> {
    if n < 2 {
        return Err(Error::Domain("need n >= 2".into()));
    }
    if digits.len() < n {
        return Err(Error::DegenerateDigits { needed: n });
    }
    let m = params.m_f64();
    let mut log_f = 0.0f64; // log f_0, with f_0 = 1
    let mut ratio = 0.0f64; // f_{-1}/f_0 = 0
    let mut prev_digit = 0u32; // a_0 = 0
    let mut trace = Vec::with_capacity(n);
    for (k, &a) in digits.iter().take(n).enumerate() {
        let step = m.powi(a as i32) + (m - 1.0) * m.powi(prev_digit as i32) * ratio;
        log_f += step.ln();
        ratio = 1.0 / step;
        prev_digit = a;
        trace.push(log_f / (k + 1) as f64);
    }
    Ok(trace)
}

/// Growth of the recurrence driven by digits of gamma_m-random points, one
/// orbit per seed stream.
pub fn random_fibonacci(params: &ChanParams, n: usize, seed: u64, seeds: usize) -> Result<GrowthResult> {
    if seeds == 0 {
        return Err(Error::Domain("need at least one seed".into()));
    }
    let per_seed: Vec<f64> = (0..seeds)
        .into_par_iter()
        .map(|s| {
            let mut rng = block_rng(seed, s);
            let u: f64 = rng.gen();
            let mut x = crate::measure::sample_gamma(u, params)?;
            let mut digits = Vec::with_capacity(n);
            while digits.len() < n {
                if x <= 0.0 {
                    let u: f64 = rng.gen();
                    x = crate::measure::sample_gamma(u, params)?;
                }
                digits.push(branch_index(x, params)?);
                x = tau_step(x, params)?;
            }
            Ok(*fibonacci_log_growth(&digits, params, n)?
                .last()
                .expect("n >= 2"))
        })
        .collect::<Result<Vec<f64>>>()?;
    let mean = per_seed.iter().sum::<f64>() / seeds as f64;
    let var = per_seed.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>()
        / (seeds.max(2) - 1) as f64;
    Ok(GrowthResult {
        per_seed,
        mean,
        std_error: (var / seeds as f64).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigUint;

    fn p(m: u32) -> ChanParams {
        ChanParams::new(m).unwrap()
    }

    #[test]
    fn ks_statistic_hand_values() {
        let uniform = |x: f64| x;
        assert!((ks_statistic(&[0.25, 0.75], uniform).unwrap() - 0.25).abs() < 1e-15);
        // exact mid-quantiles reach the 1/(2N) floor
        let n = 100;
        let samples: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect();
        let ks = ks_statistic(&samples, uniform).unwrap();
        assert!((ks - 0.5 / n as f64).abs() < 1e-12);
        assert!(ks_statistic(&[], uniform).is_err());
    }

    #[test]
    fn ks_matches_brute_force() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(21);
        for _ in 0..50 {
            let mut samples: Vec<f64> = (0..37).map(|_| rng.gen()).collect();
            samples.sort_by(f64::total_cmp);
            let cdf = |x: f64| x * x;
            let fast = ks_statistic(&samples, cdf).unwrap();
            // brute force over all 2N candidate gaps
            let n = samples.len() as f64;
            let mut brute = 0.0f64;
            for (i, &x) in samples.iter().enumerate() {
                brute = brute.max((i as f64 / n - cdf(x)).abs());
                brute = brute.max(((i + 1) as f64 / n - cdf(x)).abs());
            }
            assert!((fast - brute).abs() < 1e-15);
        }
    }

    #[test]
    fn pushforward_is_deterministic() {
        let cfg = SimulationConfig::new(p(2), 20_000, 3, 42, MeasureSpec::Lebesgue);
        let a = simulate_pushforward(&cfg).unwrap();
        let b = simulate_pushforward(&cfg).unwrap();
        assert_eq!(a.ks_per_iteration, b.ks_per_iteration);
        assert_eq!(a.grid_errors, b.grid_errors);
    }

    #[test]
    fn lebesgue_start_ks_value() {
        // KS_0 = sup |x - omega_2(x)| ~ 0.136
        let cfg = SimulationConfig::new(p(2), 200_000, 0, 7, MeasureSpec::Lebesgue);
        let rep = simulate_pushforward(&cfg).unwrap();
        assert!((rep.ks_per_iteration[0] - 0.136).abs() < 0.004, "{}", rep.ks_per_iteration[0]);
    }

    #[test]
    fn khinchin_value_m2() {
        let chi = khinchin_chi(&p(2), 1e-10);
        assert!(chi.value > 0.95 && chi.value < 1.00, "{}", chi.value);
        for m in 2..=10 {
            assert!(khinchin_chi(&p(m), 1e-10).value > 0.0);
        }
    }

    #[test]
    fn levy_growth_m2_dilogarithm() {
        // closed form k_2 (pi^2/12 + Li2(-1/2)) as independent oracle
        let mut li2 = 0.0;
        for j in 1..200 {
            li2 += (-0.5f64).powi(j) / (j * j) as f64;
        }
        let oracle = p(2).k_m() * (std::f64::consts::PI.powi(2) / 12.0 + li2);
        let got = levy_growth(&p(2), 1e-8).unwrap();
        assert!((got.value - oracle).abs() < 1e-7, "{} vs {oracle}", got.value);
        assert!((got.value - 1.30025).abs() < 1e-4);
    }

    #[test]
    fn levy_growth_respects_upper_bound() {
        for m in 2..=10 {
            let params = p(m);
            let v = levy_growth(&params, 1e-8).unwrap().value;
            assert!(v <= levy_growth_bound(&params), "m={m}");
        }
        assert!((levy_growth_bound(&p(2)) - 1.44836).abs() < 1e-5);
    }

    #[test]
    fn entropy_routes_agree() {
        for m in [2u32, 3] {
            let e = entropy(&p(m), 1e-8).unwrap();
            assert!(
                (e.quadrature.value - e.identity.value).abs() <= 1e-6,
                "m={m}: {} vs {}",
                e.quadrature.value,
                e.identity.value
            );
        }
        let e2 = entropy(&p(2), 1e-8).unwrap();
        assert!((e2.quadrature.value - 1.62).abs() < 0.02);
    }

    #[test]
    fn birkhoff_constant_observable() {
        // the constant observable is exercised implicitly: digits >= 0 and
        // averages are finite; check the digit average against the series
        let params = p(2);
        let chi = khinchin_chi(&params, 1e-10).value;
        let avg = birkhoff_average(Observable::Digit, &params, 1_000_000, 2024).unwrap();
        let rel = (avg * params.m_f64().ln() - chi).abs() / chi;
        assert!(rel < 0.005, "relative error {rel}");
    }

    #[test]
    fn birkhoff_neg_log_matches_growth() {
        let params = p(2);
        let growth = levy_growth(&params, 1e-8).unwrap().value;
        let avg = birkhoff_average(Observable::NegLog, &params, 1_000_000, 2025).unwrap();
        assert!((avg - growth).abs() / growth < 0.005);
    }

    #[test]
    fn fibonacci_all_zero_digits_is_classical() {
        let digits = vec![0u32; 100_000];
        let trace = fibonacci_log_growth(&digits, &p(2), 100_000).unwrap();
        let golden = ((1.0 + 5f64.sqrt()) / 2.0).ln();
        assert!((trace.last().unwrap() - golden).abs() < 1e-3);
    }

    #[test]
    fn fibonacci_exact_first_steps() {
        // m=2, digits [0,1]: f_1 = 1, f_2 = 3
        let trace = fibonacci_log_growth(&[0, 1], &p(2), 2).unwrap();
        assert!((trace[0] - 0.0).abs() < 1e-14); // log 1
        assert!((trace[1] - 3f64.ln() / 2.0).abs() < 1e-14);
    }

    #[test]
    fn fibonacci_log_space_matches_bigint() {
        // exact integer recurrence as oracle for n <= 300
        let params = p(2);
        let digits: Vec<u32> = {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(31);
            (0..300).map(|_| rng.gen_range(0..5u32)).collect()
        };
        let trace = fibonacci_log_growth(&digits, &params, 300).unwrap();
        let m = BigUint::from(2u32);
        let mut f_prev = BigUint::from(1u32); // f_0
        let mut f_prev2 = BigUint::from(0u32); // f_-1
        let mut prev_digit = 0u32;
        for (k, &a) in digits.iter().enumerate() {
            let f = m.pow(a) * &f_prev + m.pow(prev_digit) * &f_prev2;
            let log_f = big_ln(&f);
            let rel = (trace[k] * (k + 1) as f64 - log_f).abs() / log_f.max(1.0);
            assert!(rel < 1e-10, "step {k}: {rel}");
            f_prev2 = std::mem::replace(&mut f_prev, f);
            prev_digit = a;
        }
    }

    fn big_ln(v: &BigUint) -> f64 {
        let bits = v.bits();
        if bits <= 52 {
            let d = v.to_u64_digits();
            return (*d.first().unwrap_or(&1) as f64).ln();
        }
        let shift = bits - 52;
        let top: BigUint = v >> shift;
        (top.to_u64_digits()[0] as f64).ln() + shift as f64 * 2f64.ln()
    }

    #[test]
    fn fibonacci_digit_source_too_short() {
        assert!(matches!(
            fibonacci_log_growth(&[0, 1], &p(2), 10),
            Err(Error::DegenerateDigits { .. })
        ));
    }
}
