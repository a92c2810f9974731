//! Monte-Carlo experiments on random Rips complexes: simplex-count moments,
//! clique-number regimes and a work audit of the reduction.
//!
//! Trial `t` of a run with seed `s` draws from stream `t` of `rng_for(s, _)`;
//! regime runs offset the stream by `2^32` per position in the `n` schedule.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::time::Instant;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::complex::{SimplicialComplex, VertexId, DEFAULT_SIMPLEX_CAP};
use crate::error::{Error, Result};
use crate::geometry::{
    binomial_points, clique_complex, proximity_graph, rips_complex, rng_for, PointConfiguration, RipsParams,
    TorusSpec, RNG_ALGORITHM,
};
use crate::reduction::{reduce, ReduceOptions, ReductionReport};

/// Parses `0.02`, `2e-2`, `1/50` or `-3` into an exact rational.
pub fn parse_rational(text: &str) -> Result<BigRational> {
    let t = text.trim();
    let bad = || Error::InvalidArgument(format!("`{text}` is not a decimal or fraction"));
    if let Some((num, den)) = t.split_once('/') {
        let num: BigInt = num.trim().parse().map_err(|_| bad())?;
        let den: BigInt = den.trim().parse().map_err(|_| bad())?;
        if den.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(num, den));
    }
    let (mantissa, exponent) = match t.find(['e', 'E']) {
        Some(i) => (&t[..i], t[i + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (t, 0),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    let negative = int_part.starts_with('-');
    let digits = format!("{}{}", int_part.trim_start_matches(['-', '+']), frac_part);
    if digits.is_empty() || !digits.chars().all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let mut value = BigRational::from_integer(digits.parse::<BigInt>().map_err(|_| bad())?);
    let scale = exponent - frac_part.len() as i32;
    let ten = BigRational::from_integer(BigInt::from(10));
    value *= if scale >= 0 { pow(&ten, scale as u32) } else { pow(&ten, (-scale) as u32).recip() };
    Ok(if negative { -value } else { value })
}

/// A coverage parameter given either as text or as a JSON number; numbers use
/// their shortest decimal form, so `0.02` means exactly 1/50.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Theta {
    Number(f64),
    Text(String),
}

impl Theta {
    pub fn exact(&self) -> Result<BigRational> {
        match self {
            Theta::Number(x) => parse_rational(&x.to_string()),
            Theta::Text(s) => parse_rational(s),
        }
    }

    pub fn value(&self) -> Result<f64> {
        Ok(to_f64(&self.exact()?))
    }
}

fn pow(x: &BigRational, e: u32) -> BigRational {
    num_traits::pow(x.clone(), e as usize)
}

fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    acc
}

fn ratio(n: BigUint) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

pub fn to_f64(x: &BigRational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// `E[N_k] = C(n, k) k^d θ^(k-1)`, with `N_1 = n`.
pub fn expected_nk(n: u64, k: u32, d: u32, theta: &BigRational) -> Result<BigRational> {
    match k {
        0 => Err(Error::InvalidArgument("k must be at least 1".into())),
        1 => Ok(BigRational::from_integer(n.into())),
        _ => {
            let kd = BigRational::from_integer(BigInt::from(k).pow(d));
            Ok(ratio(binomial(n, k as u64)) * kd * pow(theta, k - 1))
        }
    }
}

/// `Σ_{i=1..k} C(n,2k-i) C(2k-i,k) C(k,i) θ^(2k-i-1) (2k-i + 2(k-i)^2/(i+1))^d`.
pub fn variance_nk(n: u64, k: u32, d: u32, theta: &BigRational) -> Result<BigRational> {
    if k < 2 {
        return Err(Error::InvalidArgument("the variance formula needs k >= 2".into()));
    }
    let mut sum = BigRational::zero();
    let (k, n) = (k as u64, n);
    for i in 1..=k {
        let m = 2 * k - i;
        let count = binomial(n, m) * binomial(m, k) * binomial(k, i);
        if count.is_zero() {
            continue;
        }
        let base = BigRational::from_integer(BigInt::from(m))
            + BigRational::new(BigInt::from(2 * (k - i) * (k - i)), BigInt::from(i + 1));
        sum += ratio(count) * pow(theta, (m - 1) as u32) * pow(&base, d);
    }
    Ok(sum)
}

/// The variance formula completed with disjoint pairs and centred:
/// `Σ_i(...) + C(n,k) C(n-k,k) p^2 - (C(n,k) p)^2` with `p = k^d θ^(k-1)`.
/// Reported next to the formula for comparison with sample variances.
pub fn centered_variance_nk(n: u64, k: u32, d: u32, theta: &BigRational) -> Result<BigRational> {
    let overlapping = variance_nk(n, k, d, theta)?;
    let p = BigRational::from_integer(BigInt::from(k).pow(d)) * pow(theta, k - 1);
    let kk = k as u64;
    let disjoint = if n >= 2 * kk { binomial(n, kk) * binomial(n - kk, kk) } else { BigUint::zero() };
    let mean = ratio(binomial(n, kk)) * &p;
    Ok(overlapping + ratio(disjoint) * &p * &p - &mean * &mean)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    /// `θ'_k = k^((1+η-d)/(k-1)) / n^(k/(k-1))`
    pub theta_prime: f64,
    /// `θ_k = k^(-(1+η+d)/(k-1)) / n^(k/(k-1))`
    pub theta: f64,
    pub theta_next: f64,
    /// `θ'_k < θ_{k+1}`: the window for `C = k` is non-empty.
    pub valid: bool,
}

pub fn thresholds(n: u64, k: u32, d: u32, eta: f64) -> Result<Thresholds> {
    if k < 2 {
        return Err(Error::InvalidArgument(format!("thresholds need k >= 2, got {k}")));
    }
    if n < 2 || !(eta > 0.0) {
        return Err(Error::InvalidArgument(format!("need n >= 2 and eta > 0, got n={n}, eta={eta}")));
    }
    let upper = |k: u32| {
        let (k, n, d) = (k as f64, n as f64, d as f64);
        (-(1.0 + eta + d) / (k - 1.0) * k.ln() - k / (k - 1.0) * n.ln()).exp()
    };
    let (kf, nf, df) = (k as f64, n as f64, d as f64);
    let theta_prime = ((1.0 + eta - df) / (kf - 1.0) * kf.ln() - kf / (kf - 1.0) * nf.ln()).exp();
    let theta_next = upper(k + 1);
    Ok(Thresholds { theta_prime, theta: upper(k), theta_next, valid: theta_prime < theta_next })
}

fn mean_var(xs: &[f64]) -> (f64, Option<f64>, Option<f64>) {
    let t = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / t;
    if xs.len() < 2 {
        return (mean, None, None);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (t - 1.0);
    let m4 = xs.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / t;
    // standard error of the sample variance
    let se_var = ((m4 - var * var * (t - 3.0) / (t - 1.0)) / t).max(0.0).sqrt();
    (mean, Some(var), Some(se_var))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentSpec {
    pub n: u64,
    pub d: u32,
    #[serde(default = "unit_side")]
    pub a: f64,
    pub theta: Theta,
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    /// Largest `k` for which `N_k` is recorded.
    #[serde(default = "default_max_k")]
    pub max_k: u32,
    #[serde(default = "default_z")]
    pub z_threshold: f64,
}

fn unit_side() -> f64 {
    1.0
}

fn default_max_k() -> u32 {
    3
}

fn default_z() -> f64 {
    4.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentRow {
    pub k: u32,
    pub expected: f64,
    pub expected_exact: String,
    pub variance_formula: f64,
    pub variance_formula_exact: String,
    pub variance_centered: f64,
    pub sample_mean: f64,
    pub sample_variance: Option<f64>,
    pub se_mean: Option<f64>,
    pub se_variance: Option<f64>,
    pub z_mean: Option<f64>,
    pub z_variance: Option<f64>,
    pub mean_flag: bool,
    pub variance_flag: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentReport {
    pub format_version: u32,
    pub rng: String,
    pub spec: MomentSpec,
    pub epsilon: f64,
    pub rows: Vec<MomentRow>,
    /// `samples[t][k-1]` is `N_k` in trial `t`.
    pub samples: Vec<Vec<u64>>,
    pub wall_time_s: f64,
}

fn check_small_theta(theta: f64, d: u32) -> Result<()> {
    if !(theta > 0.0) || theta > 0.5f64.powi(d as i32) {
        return Err(Error::InvalidArgument(format!("theta = {theta} must lie in (0, 2^-{d}]")));
    }
    Ok(())
}

/// Simplex counts of one binomial Rips complex truncated at dimension `max_k - 1`.
pub fn simplex_counts(torus: TorusSpec, n: usize, epsilon: f64, max_k: u32, seed: u64, stream: u64) -> Result<Vec<u64>> {
    let config = PointConfiguration {
        torus,
        points: binomial_points(&torus, n, &mut rng_for(seed, stream)),
        seed: Some(seed),
    };
    let graph = proximity_graph(&config, epsilon);
    let complex = clique_complex(&graph, Some(max_k as usize - 1), DEFAULT_SIMPLEX_CAP)?;
    let mut counts: Vec<u64> = complex.s_counts().into_iter().map(|c| c as u64).collect();
    counts.resize(max_k as usize, 0);
    Ok(counts)
}

pub fn moment_experiment(spec: &MomentSpec) -> Result<MomentReport> {
    let start = Instant::now();
    let exact_theta = spec.theta.exact()?;
    let theta = to_f64(&exact_theta);
    check_small_theta(theta, spec.d)?;
    if spec.trials == 0 || spec.max_k < 2 {
        return Err(Error::InvalidArgument("need at least one trial and max_k >= 2".into()));
    }
    let torus = TorusSpec::new(spec.d as usize, spec.a)?;
    let epsilon = torus.epsilon_for_theta(theta);
    let samples = (0..spec.trials as u64)
        .into_par_iter()
        .map(|t| simplex_counts(torus, spec.n as usize, epsilon, spec.max_k, spec.seed, t))
        .collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::new();
    for k in 2..=spec.max_k {
        let xs: Vec<f64> = samples.iter().map(|s| s[k as usize - 1] as f64).collect();
        let expected = expected_nk(spec.n, k, spec.d, &exact_theta)?;
        let variance = variance_nk(spec.n, k, spec.d, &exact_theta)?;
        let centered = centered_variance_nk(spec.n, k, spec.d, &exact_theta)?;
        let (mean, var, se_var) = mean_var(&xs);
        let se_mean = var.map(|v| (v / xs.len() as f64).sqrt());
        let z = |x: f64, target: f64, se: Option<f64>| se.filter(|s| *s > 0.0).map(|s| (x - target) / s);
        let z_mean = z(mean, to_f64(&expected), se_mean);
        let z_variance = var.and_then(|v| z(v, to_f64(&variance), se_var));
        rows.push(MomentRow {
            k,
            expected: to_f64(&expected),
            expected_exact: expected.to_string(),
            variance_formula: to_f64(&variance),
            variance_formula_exact: variance.to_string(),
            variance_centered: to_f64(&centered),
            sample_mean: mean,
            sample_variance: var,
            se_mean,
            se_variance: se_var,
            z_mean,
            z_variance,
            mean_flag: z_mean.is_some_and(|z| z.abs() > spec.z_threshold),
            variance_flag: z_variance.is_some_and(|z| z.abs() > spec.z_threshold),
        });
    }
    Ok(MomentReport {
        format_version: 1,
        rng: RNG_ALGORITHM.into(),
        spec: spec.clone(),
        epsilon,
        rows,
        samples,
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Subcritical,
    Critical,
    Supercritical,
}

/// How `θ` is chosen for each `n`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum ThetaRule {
    /// `sqrt(θ'_k θ_{k+1})`
    GeometricMean,
    /// `c / n`
    Inverse { c: f64 },
    /// `n^(-exponent)`
    Power { exponent: f64 },
    Fixed { theta: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegimeSpec {
    pub regime: Regime,
    pub d: u32,
    #[serde(default = "unit_side")]
    pub a: f64,
    #[serde(default = "default_eta")]
    pub eta: f64,
    /// Target clique size in the subcritical regime.
    #[serde(default = "default_k")]
    pub k: u32,
    pub n_schedule: Vec<u64>,
    pub theta_rule: ThetaRule,
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
}

fn default_eta() -> f64 {
    1.0
}

fn default_k() -> u32 {
    2
}

impl RegimeSpec {
    pub fn theta_for(&self, n: u64) -> Result<f64> {
        let theta = match self.theta_rule {
            ThetaRule::GeometricMean => {
                let t = thresholds(n, self.k, self.d, self.eta)?;
                if !t.valid {
                    return Err(Error::InvalidArgument(format!(
                        "empty window for C = {} at n = {n}: theta'_k = {:e} >= theta_(k+1) = {:e}",
                        self.k, t.theta_prime, t.theta_next
                    )));
                }
                (t.theta_prime * t.theta_next).sqrt()
            }
            ThetaRule::Inverse { c } => c / n as f64,
            ThetaRule::Power { exponent } => (n as f64).powf(-exponent),
            ThetaRule::Fixed { theta } => theta,
        };
        check_small_theta(theta, self.d)?;
        Ok(theta)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegimeSample {
    pub trial: usize,
    pub stream: u64,
    pub n: u64,
    pub theta: f64,
    /// `N_1, N_2, N_3`.
    pub n_counts: Vec<u64>,
    pub clique_number: usize,
    pub wall_time_s: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegimeRow {
    pub n: u64,
    pub theta: f64,
    pub n_theta: f64,
    pub trials: usize,
    pub mean_c: f64,
    pub c_histogram: BTreeMap<usize, usize>,
    /// Subcritical: fraction with `C = k`.
    pub fraction_target: Option<f64>,
    /// Critical: fraction with `(ln n)^(1-η) < C < ln n`, and with `C < ln n`.
    pub fraction_window: Option<f64>,
    pub fraction_below_log: Option<f64>,
    pub mean_c_over_log_n: f64,
    /// Supercritical: mean of `C / (nθ)` and trials with `C <= nθ/(1+θ)`.
    pub mean_c_over_n_theta: Option<f64>,
    pub bound_violations: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegimeReport {
    pub format_version: u32,
    pub rng: String,
    pub spec: RegimeSpec,
    pub rows: Vec<RegimeRow>,
    /// Subcritical: the `C = k` fraction never decreases along the schedule.
    pub non_decreasing: Option<bool>,
    pub samples: Vec<RegimeSample>,
    pub wall_time_s: f64,
}

pub fn regime_sample(torus: TorusSpec, n: u64, theta: f64, seed: u64, stream: u64) -> RegimeSample {
    let start = Instant::now();
    let config = PointConfiguration {
        torus,
        points: binomial_points(&torus, n as usize, &mut rng_for(seed, stream)),
        seed: Some(seed),
    };
    let graph = proximity_graph(&config, torus.epsilon_for_theta(theta));
    let clique_number = graph.clique_number();
    let n_counts = graph.count_cliques(3);
    RegimeSample {
        trial: (stream & 0xffff_ffff) as usize,
        stream,
        n,
        theta,
        n_counts,
        clique_number,
        wall_time_s: start.elapsed().as_secs_f64(),
    }
}

pub fn clique_regime_experiment(spec: &RegimeSpec) -> Result<RegimeReport> {
    let start = Instant::now();
    if spec.n_schedule.is_empty() || spec.trials == 0 {
        return Err(Error::InvalidArgument("need a non-empty n schedule and at least one trial".into()));
    }
    let torus = TorusSpec::new(spec.d as usize, spec.a)?;
    let mut rows = Vec::new();
    let mut samples = Vec::new();
    for (pos, &n) in spec.n_schedule.iter().enumerate() {
        let theta = spec.theta_for(n)?;
        let batch: Vec<RegimeSample> = (0..spec.trials as u64)
            .into_par_iter()
            .map(|t| regime_sample(torus, n, theta, spec.seed, ((pos as u64) << 32) | t))
            .collect();
        let cs: Vec<usize> = batch.iter().map(|s| s.clique_number).collect();
        let trials = cs.len() as f64;
        let fraction = |pred: &dyn Fn(usize) -> bool| cs.iter().filter(|c| pred(**c)).count() as f64 / trials;
        let ln_n = (n as f64).ln();
        let n_theta = n as f64 * theta;
        let mut c_histogram = BTreeMap::new();
        for c in &cs {
            *c_histogram.entry(*c).or_insert(0) += 1;
        }
        let (fraction_target, fraction_window, fraction_below_log, mean_c_over_n_theta, bound_violations) =
            match spec.regime {
                Regime::Subcritical => (Some(fraction(&|c| c == spec.k as usize)), None, None, None, None),
                Regime::Critical => {
                    let lower = ln_n.powf(1.0 - spec.eta);
                    (
                        None,
                        Some(fraction(&|c| lower < c as f64 && (c as f64) < ln_n)),
                        Some(fraction(&|c| (c as f64) < ln_n)),
                        None,
                        None,
                    )
                }
                Regime::Supercritical => {
                    let bound = n_theta / (1.0 + theta);
                    (
                        None,
                        None,
                        None,
                        Some(cs.iter().map(|c| *c as f64 / n_theta).sum::<f64>() / trials),
                        Some(cs.iter().filter(|c| (**c as f64) <= bound).count()),
                    )
                }
            };
        rows.push(RegimeRow {
            n,
            theta,
            n_theta,
            trials: cs.len(),
            mean_c: cs.iter().sum::<usize>() as f64 / trials,
            c_histogram,
            fraction_target,
            fraction_window,
            fraction_below_log,
            mean_c_over_log_n: cs.iter().map(|c| *c as f64 / ln_n).sum::<f64>() / trials,
            mean_c_over_n_theta,
            bound_violations,
        });
        samples.extend(batch);
    }
    let non_decreasing = (spec.regime == Regime::Subcritical).then(|| {
        rows.windows(2).all(|w| w[0].fraction_target <= w[1].fraction_target)
    });
    Ok(RegimeReport {
        format_version: 1,
        rng: RNG_ALGORITHM.into(),
        spec: spec.clone(),
        rows,
        non_decreasing,
        samples,
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}

/// `n^2 s_{k0} + (n + s_{k0}) Σ_{k<C} s_k` on the initial complex.
pub fn complexity_bound(complex: &SimplicialComplex, k0: usize) -> u128 {
    let n = complex.num_vertices() as u128;
    let s_k0 = complex.count(k0) as u128;
    let total = complex.num_simplices() as u128;
    n * n * s_k0 + (n + s_k0) * total
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditResult {
    pub measured: u64,
    pub bound: u128,
    pub passed: bool,
}

pub fn complexity_audit(report: &ReductionReport, initial: &SimplicialComplex) -> AuditResult {
    let measured = report.counters.measured();
    let bound = complexity_bound(initial, report.k0);
    AuditResult { measured, bound, passed: measured as u128 <= bound }
}

/// Random reduction workloads: small Rips complexes with random critical vertices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditSpec {
    pub runs: usize,
    #[serde(default = "default_n_min")]
    pub n_min: usize,
    #[serde(default = "default_n_max")]
    pub n_max: usize,
    #[serde(default = "default_audit_d")]
    pub d: u32,
    #[serde(default = "default_audit_epsilon")]
    pub epsilon: f64,
    #[serde(default = "default_k0s")]
    pub k0_values: Vec<usize>,
    #[serde(default = "default_p_critical")]
    pub p_critical: f64,
    #[serde(default)]
    pub full_domain: bool,
    #[serde(default)]
    pub seed: u64,
}

fn default_n_min() -> usize {
    10
}
fn default_n_max() -> usize {
    30
}
fn default_audit_d() -> u32 {
    2
}
fn default_audit_epsilon() -> f64 {
    0.3
}
fn default_k0s() -> Vec<usize> {
    vec![1, 2]
}
fn default_p_critical() -> f64 {
    0.3
}

impl Default for AuditSpec {
    fn default() -> Self {
        AuditSpec {
            runs: 200,
            n_min: default_n_min(),
            n_max: default_n_max(),
            d: default_audit_d(),
            epsilon: default_audit_epsilon(),
            k0_values: default_k0s(),
            p_critical: default_p_critical(),
            full_domain: false,
            seed: 0,
        }
    }
}

/// One reduction input: a Rips complex on a random point set.
#[derive(Clone, Debug)]
pub struct ReductionCase {
    pub run: usize,
    pub k0: usize,
    pub complex: SimplicialComplex,
    pub critical: Vec<VertexId>,
}

impl AuditSpec {
    pub fn case(&self, run: usize) -> Result<ReductionCase> {
        if self.k0_values.is_empty() || self.n_min > self.n_max {
            return Err(Error::InvalidArgument("need k0 values and n_min <= n_max".into()));
        }
        let mut rng = rng_for(self.seed, run as u64);
        let n = rng.random_range(self.n_min..=self.n_max);
        let torus = TorusSpec::new(self.d as usize, 1.0)?;
        let config = PointConfiguration { torus, points: binomial_points(&torus, n, &mut rng), seed: Some(self.seed) };
        let complex = rips_complex(&config, &RipsParams::new(self.epsilon))?;
        let critical = (0..n as u32).filter(|_| rng.random::<f64>() < self.p_critical).map(VertexId).collect();
        let k0 = self.k0_values[run % self.k0_values.len()];
        Ok(ReductionCase { run, k0, complex, critical })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditRow {
    pub run: usize,
    pub n: usize,
    pub k0: usize,
    pub s_counts: Vec<usize>,
    pub removed: usize,
    pub bounds: (usize, usize),
    pub audit: AuditResult,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub format_version: u32,
    pub rng: String,
    pub spec: AuditSpec,
    pub rows: Vec<AuditRow>,
    pub failures: usize,
    pub wall_time_s: f64,
}

pub fn audit_experiment(spec: &AuditSpec) -> Result<AuditReport> {
    let start = Instant::now();
    let rows = (0..spec.runs)
        .into_par_iter()
        .map(|run| {
            let case = spec.case(run)?;
            let opts = ReduceOptions { full_domain: spec.full_domain, ..Default::default() };
            let report = reduce(&case.complex, &case.critical, case.k0, &opts, run as u64)?;
            Ok(AuditRow {
                run,
                n: case.complex.num_vertices(),
                k0: case.k0,
                s_counts: case.complex.s_counts(),
                removed: report.removed,
                bounds: report.bounds,
                audit: complexity_audit(&report, &case.complex),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(AuditReport {
        format_version: 1,
        rng: RNG_ALGORITHM.into(),
        spec: spec.clone(),
        failures: rows.iter().filter(|r| !r.audit.passed).count(),
        rows,
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map_or_else(String::new, |v| v.to_string())
}

impl MomentReport {
    pub fn summary_csv(&self) -> String {
        let mut out = String::from(
            "# k: simplex size; expected: E[N_k]; variance_formula: overlap-sum variance; \
             variance_centered: same completed with disjoint pairs minus E[N_k]^2\n\
             # z_*: (sample - formula) / standard error; *_flag: |z| above the threshold\n",
        );
        out.push_str("k,expected,variance_formula,variance_centered,sample_mean,sample_variance,se_mean,se_variance,z_mean,z_variance,mean_flag,variance_flag\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{}",
                r.k,
                r.expected,
                r.variance_formula,
                r.variance_centered,
                r.sample_mean,
                fmt_opt(r.sample_variance),
                fmt_opt(r.se_mean),
                fmt_opt(r.se_variance),
                fmt_opt(r.z_mean),
                fmt_opt(r.z_variance),
                r.mean_flag,
                r.variance_flag
            );
        }
        out
    }

    pub fn samples_csv(&self) -> String {
        let cols: Vec<String> = (1..=self.spec.max_k).map(|k| format!("n{k}")).collect();
        let mut out = format!("# one row per trial; nK is the number of (K-1)-simplices\ntrial,{}\n", cols.join(","));
        for (t, s) in self.samples.iter().enumerate() {
            let vals: Vec<String> = s.iter().map(u64::to_string).collect();
            let _ = writeln!(out, "{t},{}", vals.join(","));
        }
        out
    }

    pub fn svg(&self) -> String {
        let mean: Vec<(f64, f64)> = self.rows.iter().map(|r| (r.k as f64, r.sample_mean)).collect();
        let formula: Vec<(f64, f64)> = self.rows.iter().map(|r| (r.k as f64, r.expected)).collect();
        line_plot("Simplex counts: sample mean and formula", "k", "N_k", &[("sample mean", mean), ("E[N_k]", formula)])
    }
}

impl RegimeReport {
    pub fn summary_csv(&self) -> String {
        let mut out = String::from(
            "# n: points; theta: coverage parameter; mean_c: mean clique number; \
             fraction_target: share with C = k (subcritical)\n\
             # fraction_window: share with (ln n)^(1-eta) < C < ln n; fraction_below_log: share with C < ln n (critical)\n\
             # mean_c_over_n_theta, bound_violations: supercritical ratio and trials with C <= n*theta/(1+theta)\n",
        );
        out.push_str("n,theta,n_theta,trials,mean_c,fraction_target,fraction_window,fraction_below_log,mean_c_over_log_n,mean_c_over_n_theta,bound_violations\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{}",
                r.n,
                r.theta,
                r.n_theta,
                r.trials,
                r.mean_c,
                fmt_opt(r.fraction_target),
                fmt_opt(r.fraction_window),
                fmt_opt(r.fraction_below_log),
                r.mean_c_over_log_n,
                fmt_opt(r.mean_c_over_n_theta),
                r.bound_violations.map_or_else(String::new, |v| v.to_string())
            );
        }
        out
    }

    pub fn samples_csv(&self) -> String {
        let mut out = String::from("# one row per trial; n1..n3 are simplex counts, c the clique number\ntrial,stream,n,theta,n1,n2,n3,c\n");
        for s in &self.samples {
            let counts: Vec<String> = s.n_counts.iter().map(u64::to_string).collect();
            let _ = writeln!(out, "{},{},{},{},{},{}", s.trial, s.stream, s.n, s.theta, counts.join(","), s.clique_number);
        }
        out
    }

    pub fn svg(&self) -> String {
        let c: Vec<(f64, f64)> = self.rows.iter().map(|r| (r.n as f64, r.mean_c)).collect();
        let mut series = vec![("mean C", c)];
        match self.spec.regime {
            Regime::Critical => series.push(("ln n", self.rows.iter().map(|r| (r.n as f64, (r.n as f64).ln())).collect())),
            Regime::Supercritical => series.push((
                "n theta / (1 + theta)",
                self.rows.iter().map(|r| (r.n as f64, r.n_theta / (1.0 + r.theta))).collect(),
            )),
            Regime::Subcritical => {}
        }
        line_plot("Clique number against n", "n", "C", &series)
    }
}

impl AuditReport {
    pub fn summary_csv(&self) -> String {
        let mut out = String::from(
            "# measured: degree traversals + index scans + deletions; bound: n^2 s_k0 + (n + s_k0) * total simplices\n\
             run,n,k0,simplices,removed,lower,upper,measured,bound,passed\n",
        );
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{}",
                r.run,
                r.n,
                r.k0,
                r.s_counts.iter().sum::<usize>(),
                r.removed,
                r.bounds.0,
                r.bounds.1,
                r.audit.measured,
                r.audit.bound,
                r.audit.passed
            );
        }
        out
    }

    pub fn svg(&self) -> String {
        let pts = |f: &dyn Fn(&AuditRow) -> f64| -> Vec<(f64, f64)> {
            self.rows.iter().map(|r| (r.s_counts.iter().sum::<usize>() as f64, f(r))).collect()
        };
        line_plot(
            "Reduction work against complex size (log10)",
            "simplices",
            "log10 operations",
            &[
                ("measured", pts(&|r| (r.audit.measured.max(1) as f64).log10())),
                ("bound", pts(&|r| (r.audit.bound.max(1) as f64).log10())),
            ],
        )
    }
}

const PALETTE: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

/// A self-contained SVG with one polyline per series.
pub fn line_plot(title: &str, x_label: &str, y_label: &str, series: &[(&str, Vec<(f64, f64)>)]) -> String {
    let (w, h, margin) = (640.0, 420.0, 60.0);
    let all: Vec<(f64, f64)> = series.iter().flat_map(|(_, p)| p.iter().copied()).filter(|(x, y)| x.is_finite() && y.is_finite()).collect();
    let span = |vals: Vec<f64>| {
        let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if !lo.is_finite() {
            (0.0, 1.0)
        } else if hi - lo < 1e-12 {
            (lo - 0.5, hi + 0.5)
        } else {
            (lo, hi)
        }
    };
    let (x0, x1) = span(all.iter().map(|p| p.0).collect());
    let (y0, y1) = span(all.iter().map(|p| p.1).collect());
    let sx = |x: f64| margin + (x - x0) / (x1 - x0) * (w - 2.0 * margin);
    let sy = |y: f64| h - margin - (y - y0) / (y1 - y0) * (h - 2.0 * margin);
    let mut svg = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" font-family=\"sans-serif\" font-size=\"12\">\n\
         <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n\
         <text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">{}</text>\n\
         <line x1=\"{margin}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n\
         <line x1=\"{margin}\" y1=\"{margin}\" x2=\"{margin}\" y2=\"{}\" stroke=\"black\"/>\n\
         <text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n\
         <text x=\"16\" y=\"{}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {})\">{}</text>\n",
        w / 2.0,
        escape(title),
        h - margin,
        w - margin,
        h - margin,
        h - margin,
        w / 2.0,
        h - 18.0,
        escape(x_label),
        h / 2.0,
        h / 2.0,
        escape(y_label),
    );
    for (x, anchor) in [(x0, "start"), (x1, "end")] {
        let _ = writeln!(svg, "<text x=\"{}\" y=\"{}\" text-anchor=\"{anchor}\">{}</text>", sx(x), h - margin + 16.0, tick(x));
    }
    for y in [y0, y1] {
        let _ = writeln!(svg, "<text x=\"{}\" y=\"{}\" text-anchor=\"end\">{}</text>", margin - 4.0, sy(y) + 4.0, tick(y));
    }
    for (i, (name, points)) in series.iter().enumerate() {
        let colour = PALETTE[i % PALETTE.len()];
        let path: Vec<String> = points
            .iter()
            .filter(|(x, y)| x.is_finite() && y.is_finite())
            .map(|(x, y)| format!("{:.2},{:.2}", sx(*x), sy(*y)))
            .collect();
        let _ = writeln!(svg, "<polyline fill=\"none\" stroke=\"{colour}\" stroke-width=\"2\" points=\"{}\"/>", path.join(" "));
        for p in &path {
            let (cx, cy) = p.split_once(',').expect("formatted pair");
            let _ = writeln!(svg, "<circle cx=\"{cx}\" cy=\"{cy}\" r=\"3\" fill=\"{colour}\"/>");
        }
        let ly = margin + 16.0 * i as f64;
        let _ = writeln!(
            svg,
            "<text x=\"{}\" y=\"{ly}\" fill=\"{colour}\" text-anchor=\"end\">{}</text>",
            w - margin,
            escape(name)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

fn tick(x: f64) -> String {
    if x.abs() >= 1e4 || (x != 0.0 && x.abs() < 1e-2) {
        format!("{x:.2e}")
    } else {
        format!("{}", (x * 100.0).round() / 100.0)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
