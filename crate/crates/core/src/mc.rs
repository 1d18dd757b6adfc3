//! Monte Carlo experiment harness.
//!
//! Experiments are driven by an [`ExperimentConfig`]: a degree distribution
//! (or an explicit sequence), a grid of sizes, a replication count and a
//! master seed. Replication `r` of grid entry `i` always consumes the stream
//! `(master_seed, [i, r])`, so results are bit-identical across thread
//! counts and reruns; aggregation is a sequential reduce in replication
//! order.
//!
//! The distance to normality is the L¹ distance between the empirical CDF
//! and the standard normal CDF, computed exactly piecewise between order
//! statistics. This equals the 1-Wasserstein distance on the line.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::config::sample_configuration_with;
use crate::degseq::{check_conditions, ConditionReport, DegreeDistribution, DegreeSequence};
use crate::error::{Error, Result};
use crate::exec;
use crate::explore::components;
use crate::rng::{self, RandomSeed};
use crate::stats::{statistic_value, LocalStatistic, SmallComponentIndicator, StatisticSpec};

fn std_normal() -> Normal {
    Normal::new(0.0, 1.0).expect("standard normal")
}

fn phi_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Antiderivative of the standard normal CDF: `∫Φ = xΦ(x) + φ(x)`.
fn phi_integral(normal: &Normal, x: f64) -> f64 {
    x * normal.cdf(x) + phi_pdf(x)
}

/// Exact `∫ |F̂(x) − Φ(x)| dx` for the empirical CDF of `samples`.
pub fn wasserstein_to_std_normal(samples: &[f64]) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::EmptySample);
    }
    let normal = std_normal();
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("samples must not be NaN"));
    let n = sorted.len() as f64;

    // Left tail: F̂ = 0, so the integrand is Φ.
    let first = sorted[0];
    let last = *sorted.last().expect("nonempty");
    let mut total = phi_integral(&normal, first);
    // Right tail: F̂ = 1, integrand 1 − Φ.
    total += phi_pdf(last) - last * (1.0 - normal.cdf(last));

    for (i, window) in sorted.windows(2).enumerate() {
        let (a, b) = (window[0], window[1]);
        if a == b {
            continue;
        }
        let level = (i + 1) as f64 / n;
        let (fa, fb) = (normal.cdf(a), normal.cdf(b));
        if fb <= level {
            total += level * (b - a) - (phi_integral(&normal, b) - phi_integral(&normal, a));
        } else if fa >= level {
            total += (phi_integral(&normal, b) - phi_integral(&normal, a)) - level * (b - a);
        } else {
            let crossing = normal.inverse_cdf(level);
            total += level * (crossing - a)
                - (phi_integral(&normal, crossing) - phi_integral(&normal, a));
            total += (phi_integral(&normal, b) - phi_integral(&normal, crossing))
                - level * (b - crossing);
        }
    }
    Ok(total)
}

/// Anderson–Darling normality test with estimated mean and variance.
/// Returns `(a2_star, p_value)` using the case-3 small-sample correction
/// and the standard piecewise p-value approximation.
pub fn anderson_darling_normality(samples: &[f64]) -> Result<(f64, f64)> {
    if samples.len() < 8 {
        return Err(Error::EmptySample);
    }
    let n = samples.len() as f64;
    let (mean, var) = sample_mean_var(samples);
    if var <= 0.0 {
        return Err(Error::DegenerateVariance);
    }
    let sd = var.sqrt();
    let mut z: Vec<f64> = samples.iter().map(|x| (x - mean) / sd).collect();
    z.sort_by(|a, b| a.partial_cmp(b).expect("no NaN"));
    let normal = std_normal();
    let clamp = |p: f64| p.clamp(1e-300, 1.0 - 1e-15);
    let mut a2 = -n;
    let count = z.len();
    for i in 0..count {
        let fi = clamp(normal.cdf(z[i]));
        let fr = clamp(normal.cdf(z[count - 1 - i]));
        a2 -= (2.0 * i as f64 + 1.0) / n * (fi.ln() + (1.0 - fr).ln());
    }
    let a2_star = a2 * (1.0 + 0.75 / n + 2.25 / (n * n));
    let a = a2_star;
    let p = if a < 0.2 {
        1.0 - (-13.436 + 101.14 * a - 223.73 * a * a).exp()
    } else if a < 0.34 {
        1.0 - (-8.318 + 42.796 * a - 59.938 * a * a).exp()
    } else if a < 0.6 {
        (0.9177 - 4.279 * a - 1.38 * a * a).exp()
    } else if a <= 13.0 {
        (1.2937 - 5.709 * a + 0.0186 * a * a).exp()
    } else {
        0.0
    };
    Ok((a2_star, p.clamp(0.0, 1.0)))
}

/// Mean and unbiased sample variance.
pub fn sample_mean_var(samples: &[f64]) -> (f64, f64) {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    if samples.len() < 2 {
        return (mean, 0.0);
    }
    let ss: f64 = samples.iter().map(|x| (x - mean) * (x - mean)).sum();
    (mean, ss / (n - 1.0))
}

/// Jackknife standard error of the unbiased sample variance. `None` when
/// fewer than three samples are available.
pub fn jackknife_variance_se(samples: &[f64]) -> Option<f64> {
    let r = samples.len();
    if r < 3 {
        return None;
    }
    let rf = r as f64;
    let sum: f64 = samples.iter().sum();
    let sumsq: f64 = samples.iter().map(|x| x * x).sum();
    let thetas: Vec<f64> = samples
        .iter()
        .map(|&x| {
            let s = sum - x;
            let ss = sumsq - x * x;
            (ss - s * s / (rf - 1.0)) / (rf - 2.0)
        })
        .collect();
    let theta_bar = thetas.iter().sum::<f64>() / rf;
    let spread: f64 = thetas.iter().map(|t| (t - theta_bar) * (t - theta_bar)).sum();
    Some(((rf - 1.0) / rf * spread).sqrt())
}

/// How the exploration radius is chosen per grid size.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(rename_all = "snake_case")]
pub enum EllRule {
    /// A fixed radius.
    Fixed(usize),
    /// `max(12, ⌈n^{delta/10}⌉)`; the floor keeps the error-bound regime.
    Power { delta: f64 },
}

impl Default for EllRule {
    fn default() -> Self {
        EllRule::Power { delta: 1.0 }
    }
}

/// Resolves the exploration radius for size `n`.
pub fn ell_for(n: usize, rule: &EllRule) -> usize {
    match rule {
        EllRule::Fixed(ell) => *ell,
        EllRule::Power { delta } => {
            let raw = (n as f64).powf(delta / 10.0).ceil() as usize;
            raw.max(12)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentMode {
    /// Standardise the summed local statistic `U`.
    Statistic,
    /// Standardise the size of the largest component.
    GiantComponent,
}

fn default_true() -> bool {
    true
}

/// Declarative description of a Monte Carlo experiment.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    /// Degree distribution to sample sequences from (or give `degrees`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distribution: Option<DegreeDistribution>,
    /// Explicit degree sequence; overrides `distribution` and `n_grid`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degrees: Option<Vec<usize>>,
    #[serde(default)]
    pub n_grid: Vec<usize>,
    #[serde(default)]
    pub ell: EllRule,
    /// Statistic for `mode = "statistic"`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub statistic: Option<StatisticSpec>,
    pub replications: usize,
    pub master_seed: RandomSeed,
    pub mode: ExperimentMode,
    /// Resample the degree sequence for every replication instead of fixing
    /// one per grid size. Off by default: the model keeps `d` deterministic
    /// and lets the matching carry all randomness.
    #[serde(default)]
    pub resample_degrees: bool,
    /// Clamp for sampled degrees; defaults to the distribution's maximum.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degree_cap: Option<usize>,
    /// Evaluate the Wasserstein error bound per grid size.
    #[serde(default = "default_true")]
    pub compute_bound: bool,
    /// In giant-component mode, also evaluate the small-component count `U`
    /// per replication and report how often it disagrees with `n − R`.
    #[serde(default = "default_true")]
    pub track_small_components: bool,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.replications < 2 {
            return Err(Error::InvalidExperiment(
                "replications must be at least 2".into(),
            ));
        }
        match (&self.distribution, &self.degrees) {
            (None, None) => {
                return Err(Error::InvalidExperiment(
                    "need a distribution or an explicit degree sequence".into(),
                ))
            }
            (Some(_), None) => {
                if self.n_grid.is_empty() {
                    return Err(Error::InvalidExperiment("n_grid must be nonempty".into()));
                }
                if !self.n_grid.windows(2).all(|w| w[0] < w[1]) {
                    return Err(Error::InvalidExperiment(
                        "n_grid must be strictly increasing".into(),
                    ));
                }
            }
            _ => {}
        }
        if self.mode == ExperimentMode::Statistic && self.statistic.is_none() {
            return Err(Error::InvalidExperiment(
                "statistic mode needs a statistic spec".into(),
            ));
        }
        Ok(())
    }

    fn grid(&self) -> Vec<usize> {
        match &self.degrees {
            Some(d) => vec![d.len()],
            None => self.n_grid.clone(),
        }
    }

    fn sequence_for(&self, grid_index: usize, n: usize, replication: Option<usize>) -> Result<DegreeSequence> {
        if let Some(degrees) = &self.degrees {
            return DegreeSequence::validate(degrees.clone());
        }
        let pi = self
            .distribution
            .as_ref()
            .expect("validated: distribution present");
        let cap = self
            .degree_cap
            .unwrap_or_else(|| pi.iter().map(|(j, _)| j).max().unwrap_or(1).max(1));
        let path = match replication {
            Some(r) => [grid_index as u64, 1, r as u64],
            None => [grid_index as u64, 0, 0],
        };
        let seed = rng::derive_seed(self.master_seed, &path);
        Ok(pi.sample_degree_sequence(n, cap, seed))
    }
}

/// Per-grid-size outcome.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PerN {
    pub n: usize,
    pub ell: usize,
    pub m: usize,
    pub d_max: usize,
    /// Raw target values (U or R), one per replication.
    pub raw: Vec<f64>,
    /// Standardised target values.
    pub samples: Vec<f64>,
    #[serde(rename = "mean_U")]
    pub mean_u: f64,
    #[serde(rename = "var_U")]
    pub var_u: f64,
    pub var_over_n: f64,
    /// Jackknife standard error of `var_over_n`; absent below 3 replications.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub var_over_n_se: Option<f64>,
    pub wasserstein: f64,
    #[serde(rename = "theorem1_bound_value", skip_serializing_if = "Option::is_none")]
    pub theorem1_bound_value: Option<f64>,
    /// Number of replications where the small-component count disagreed
    /// with `n − R` (giant-component mode with tracking only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub u_mismatches: Option<usize>,
}

/// Full experiment outcome: the resolved config plus per-size results.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub config: ExperimentConfig,
    pub per_n: Vec<PerN>,
}

impl ExperimentResult {
    /// CSV of `(n, replication, raw_value, standardized_value)` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,replication,raw_value,standardized_value\n");
        for per in &self.per_n {
            for (r, (raw, std)) in per.raw.iter().zip(per.samples.iter()).enumerate() {
                out.push_str(&format!("{},{},{},{}\n", per.n, r, raw, std));
            }
        }
        out
    }
}

struct Replicate {
    target: f64,
    u_small: Option<f64>,
    mismatch: bool,
}

/// Runs the experiment described by `cfg`: per grid size, samples
/// configurations, evaluates the target, standardises by sample mean and
/// variance, and measures the Wasserstein distance to the standard normal.
pub fn run_clt_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    cfg.validate()?;
    let mut per_n = Vec::new();
    for (grid_index, n) in cfg.grid().into_iter().enumerate() {
        per_n.push(run_grid_point(cfg, grid_index, n)?);
    }
    Ok(ExperimentResult {
        config: cfg.clone(),
        per_n,
    })
}

fn run_grid_point(cfg: &ExperimentConfig, grid_index: usize, n: usize) -> Result<PerN> {
    let base_sequence = cfg.sequence_for(grid_index, n, None)?;
    let ell = match cfg.mode {
        ExperimentMode::GiantComponent => ell_for(n, &cfg.ell),
        ExperimentMode::Statistic => {
            let spec = cfg.statistic.as_ref().expect("validated");
            spec.build()?.ell()
        }
    };
    let statistic = match cfg.mode {
        ExperimentMode::Statistic => Some(cfg.statistic.as_ref().expect("validated").build()?),
        ExperimentMode::GiantComponent => None,
    };
    let small = SmallComponentIndicator { ell };
    let track_u = cfg.mode == ExperimentMode::GiantComponent && cfg.track_small_components;

    let rows = exec::map_indexed(cfg.replications, |r| -> Result<Replicate> {
        let d = if cfg.resample_degrees {
            cfg.sequence_for(grid_index, n, Some(r))?
        } else {
            base_sequence.clone()
        };
        let mut stream = rng::stream(cfg.master_seed, &[grid_index as u64, 2, r as u64]);
        let g = sample_configuration_with(&d, &mut stream);
        match cfg.mode {
            ExperimentMode::Statistic => {
                let h = statistic.as_ref().expect("statistic mode");
                let u = statistic_value(&g, h)?;
                Ok(Replicate {
                    target: u,
                    u_small: None,
                    mismatch: false,
                })
            }
            ExperimentMode::GiantComponent => {
                let parts = components(&g);
                let r_n = parts.largest as f64;
                let (u_small, mismatch) = if track_u {
                    let u = statistic_value(&g, &small)?;
                    let s_n = d.n() as f64 - r_n;
                    (Some(u), u != s_n)
                } else {
                    (None, false)
                };
                Ok(Replicate {
                    target: r_n,
                    u_small,
                    mismatch,
                })
            }
        }
    });

    let mut raw = Vec::with_capacity(cfg.replications);
    let mut u_values = Vec::new();
    let mut mismatches = 0usize;
    for row in rows {
        let row = row?;
        raw.push(row.target);
        if let Some(u) = row.u_small {
            u_values.push(u);
        }
        if row.mismatch {
            mismatches += 1;
        }
    }

    let (mean_u, var_u) = sample_mean_var(&raw);
    if var_u <= 0.0 {
        return Err(Error::DegenerateVariance);
    }
    let sd = var_u.sqrt();
    let samples: Vec<f64> = raw.iter().map(|x| (x - mean_u) / sd).collect();
    let wasserstein = wasserstein_to_std_normal(&samples)?;
    let var_over_n_se = jackknife_variance_se(&raw).map(|se| se / n as f64);

    let d_max = base_sequence.d_max();
    let m = base_sequence.m();
    let theorem1_bound_value = if cfg.compute_bound {
        let sigma = match cfg.mode {
            ExperimentMode::GiantComponent if !u_values.is_empty() => {
                let (_, var) = sample_mean_var(&u_values);
                var.sqrt()
            }
            _ => sd,
        };
        if sigma > 0.0 && d_max > 0 {
            Some(
                crate::bounds::theorem1_bound(&crate::bounds::BoundInputs {
                    sup_norm: 1.0,
                    d_max,
                    ell,
                    n,
                    m,
                    sigma,
                })
                .value,
            )
        } else {
            None
        }
    } else {
        None
    };

    Ok(PerN {
        n,
        ell,
        m,
        d_max,
        raw,
        samples,
        mean_u,
        var_u,
        var_over_n: var_u / n as f64,
        var_over_n_se,
        wasserstein,
        theorem1_bound_value,
        u_mismatches: track_u.then_some(mismatches),
    })
}

/// One point of the variance-scaling study.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VariancePoint {
    pub n: usize,
    pub var_over_n: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub std_error: Option<f64>,
}

/// Variance-scaling study outcome; the condition report flags regimes where
/// the linear-variance asymptotics are not guaranteed.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VarianceScalingStudy {
    pub points: Vec<VariancePoint>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub condition_report: Option<ConditionReport>,
}

/// Runs the giant-component experiment and reports `Var R_n / n` per size
/// with jackknife errors. Condition failures are reported, never fatal.
pub fn variance_scaling_study(cfg: &ExperimentConfig) -> Result<VarianceScalingStudy> {
    if cfg.mode != ExperimentMode::GiantComponent {
        return Err(Error::InvalidExperiment(
            "variance scaling runs in giant_component mode".into(),
        ));
    }
    let result = run_clt_experiment(cfg)?;
    let points = result
        .per_n
        .iter()
        .map(|p| VariancePoint {
            n: p.n,
            var_over_n: p.var_over_n,
            std_error: p.var_over_n_se,
        })
        .collect();
    let condition_report = match (&cfg.distribution, &cfg.degrees) {
        (Some(pi), None) if cfg.grid().len() >= 2 => {
            let family: Vec<DegreeSequence> = cfg
                .grid()
                .iter()
                .enumerate()
                .map(|(i, &n)| cfg.sequence_for(i, n, None))
                .collect::<Result<_>>()?;
            Some(check_conditions(pi, &family))
        }
        _ => None,
    };
    Ok(VarianceScalingStudy {
        points,
        condition_report,
    })
}
