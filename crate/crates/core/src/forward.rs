//! Forward simulation of continuous-time heat-bath Glauber dynamics and the
//! Monte Carlo estimators built on it: magnetization, `t_m`, the grand
//! coupling disagreement and spin covariance sums.

use serde::Serialize;

use crate::error::{Error, PartialEstimate, Result};
use crate::graph::Graph;
use crate::replicas;
use crate::rule::{HeatBathRule, SpinConfig};
use crate::stats::{pairwise_sum, MeanEstimate};
use crate::update_stream::UpdateSequence;

pub use crate::rule::heat_bath_threshold;

fn check_sizes(x0: &SpinConfig, seq: &UpdateSequence, g: &Graph) -> Result<()> {
    if x0.len() != g.n() || seq.n() != g.n() {
        return Err(Error::InvalidArgument(format!(
            "size mismatch: x0 has {}, sequence {}, graph {} sites",
            x0.len(),
            seq.n(),
            g.n()
        )));
    }
    Ok(())
}

/// Configuration at the sequence horizon starting from `x0`.
pub fn run_forward(x0: &SpinConfig, seq: &UpdateSequence, beta: f64, g: &Graph) -> Result<SpinConfig> {
    check_sizes(x0, seq, g)?;
    let rule = HeatBathRule::new(beta, g)?;
    let mut x = x0.clone();
    apply_events(&mut [&mut x], seq, &rule, g, &[], |_, _| {});
    Ok(x)
}

/// Advance every configuration in `states` through `seq` in global time
/// order. Before the first event past each `times[i]` (sorted ascending),
/// `observe(i, states)` sees the configurations at time `times[i]`.
pub(crate) fn apply_events(
    states: &mut [&mut SpinConfig],
    seq: &UpdateSequence,
    rule: &HeatBathRule,
    g: &Graph,
    times: &[f64],
    mut observe: impl FnMut(usize, &[&mut SpinConfig]),
) {
    let order = seq.global_order();
    let mut next_obs = 0;
    for (v, k) in order {
        let (v, k) = (v as usize, k as usize);
        let e = seq.event(v, k);
        while next_obs < times.len() && times[next_obs] < e.time {
            observe(next_obs, states);
            next_obs += 1;
        }
        let nb = g.neighbors(v);
        let deg = nb.len();
        for x in states.iter_mut() {
            let spins = x.spins();
            let sigma: i32 = nb.iter().map(|&w| spins[w] as i32).sum();
            let s = rule.update(deg, e.u, sigma);
            x.set(v, s);
        }
    }
    while next_obs < times.len() {
        observe(next_obs, states);
        next_obs += 1;
    }
}

fn validate_times(times: &[f64]) -> Result<()> {
    if times.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
        return Err(Error::InvalidArgument("times must be finite and nonnegative".into()));
    }
    if times.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidArgument("times must be sorted ascending".into()));
    }
    Ok(())
}

fn validate_vertex(g: &Graph, v: usize) -> Result<()> {
    if v >= g.n() {
        return Err(Error::InvalidArgument(format!("vertex {v} outside 0..{}", g.n())));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MagnetizationPoint {
    pub time: f64,
    pub estimate: f64,
    pub stderr: f64,
    pub replicas: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MagnetizationCurve {
    pub points: Vec<MagnetizationPoint>,
    /// Estimates average over all sites, which presumes transitivity.
    pub site_averaged: bool,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct MagnetizationOptions {
    pub site_average: bool,
    pub origin: usize,
}

/// Per-replica magnetization samples (site average or origin spin) at
/// sorted `times`, from the all-plus start.
fn magnetization_samples(
    g: &Graph,
    rule: &HeatBathRule,
    times: &[f64],
    opts: MagnetizationOptions,
    replica_seed: u64,
) -> Result<Vec<f64>> {
    let horizon = times.last().copied().unwrap_or(0.0);
    let seq = UpdateSequence::generate(g.n(), horizon, replica_seed)?;
    let mut x = SpinConfig::all_plus(g.n());
    let mut out = vec![0.0; times.len()];
    let n = g.n() as f64;
    apply_events(&mut [&mut x], &seq, rule, g, times, |i, states| {
        out[i] = if opts.site_average {
            states[0].magnetization_sum() as f64 / n
        } else {
            states[0].get(opts.origin) as f64
        };
    });
    Ok(out)
}

/// Monte Carlo estimate of `m_t = E X_t^+(origin)` at each of `times`.
pub fn estimate_magnetization(
    g: &Graph,
    beta: f64,
    times: &[f64],
    replicas: usize,
    seed: u64,
    opts: MagnetizationOptions,
) -> Result<MagnetizationCurve> {
    if replicas == 0 {
        return Err(Error::InvalidArgument("replicas must be ≥ 1".into()));
    }
    validate_vertex(g, opts.origin)?;
    let mut sorted: Vec<(usize, f64)> = times.iter().copied().enumerate().collect();
    sorted.sort_by(|a, b| a.1.total_cmp(&b.1));
    let sorted_times: Vec<f64> = sorted.iter().map(|p| p.1).collect();
    validate_times(&sorted_times)?;
    let rule = HeatBathRule::new(beta, g)?;
    let samples = replicas::map(seed, replicas, |_, s| {
        magnetization_samples(g, &rule, &sorted_times, opts, s)
    })?;
    let mut points = vec![None; times.len()];
    for (j, &(orig, t)) in sorted.iter().enumerate() {
        let column: Vec<f64> = samples.iter().map(|row| row[j]).collect();
        let est = MeanEstimate::from_samples(&column);
        points[orig] = Some(MagnetizationPoint {
            time: t,
            estimate: est.mean,
            stderr: est.stderr,
            replicas,
        });
    }
    Ok(MagnetizationCurve {
        points: points.into_iter().map(Option::unwrap).collect(),
        site_averaged: opts.site_average,
        seed,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TmEstimate {
    pub time: f64,
    pub lower: f64,
    pub upper: f64,
    pub replicas_used: usize,
    pub probes: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct TmOptions {
    /// Normal quantile used for magnetization confidence intervals.
    pub z: f64,
    pub initial_replicas: usize,
    /// Largest replica count spent on a single probe time.
    pub max_replicas: usize,
    pub site_average: bool,
}

impl Default for TmOptions {
    fn default() -> Self {
        Self {
            z: 1.96,
            initial_replicas: 256,
            max_replicas: 1 << 20,
            site_average: true,
        }
    }
}

/// Locate `t_m = inf{t : m_t ≤ 1/√n}`.
///
/// The magnetization obeys `e^{-s} m_t ≤ m_{t+s} ≤ e^{-(1-βd)s} m_t`, which
/// gives the deterministic bracket `[ln √n, ln √n / (1-βd)]` and turns a
/// confidence interval for `m_t` at a probe time into an interval for `t_m`.
/// Probes bisect the bracket; each probe doubles its replicas until the
/// interval for `m_t` excludes `1/√n` or the implied interval for `t_m` is
/// narrower than `precision`.
pub fn find_t_m(g: &Graph, beta: f64, precision: f64, seed: u64, opts: TmOptions) -> Result<TmEstimate> {
    if !(precision > 0.0) {
        return Err(Error::InvalidArgument("precision must be positive".into()));
    }
    let kappa = 1.0 - beta * g.max_degree() as f64;
    if !(kappa > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "t_m bracketing needs beta·d < 1, got {}",
            beta * g.max_degree() as f64
        )));
    }
    if opts.initial_replicas < 2 || opts.max_replicas < opts.initial_replicas {
        return Err(Error::InvalidArgument("bad replica limits".into()));
    }
    let rule = HeatBathRule::new(beta, g)?;
    let target = 1.0 / (g.n() as f64).sqrt();
    let mut lo = -target.ln();
    let mut hi = lo / kappa;
    let mut total = 0usize;
    let mut probes = 0usize;
    let sample_opts = MagnetizationOptions {
        site_average: opts.site_average,
        origin: 0,
    };
    while hi - lo >= precision {
        let t = 0.5 * (lo + hi);
        probes += 1;
        let mut samples: Vec<f64> = Vec::new();
        let mut want = opts.initial_replicas;
        loop {
            let have = samples.len();
            let more = replicas::map_range(seed, have, want, |_, s| {
                Ok(magnetization_samples(g, &rule, &[t], sample_opts, s)?[0])
            })?;
            total += more.len();
            samples.extend(more);
            let est = MeanEstimate::from_samples(&samples);
            let (a, b) = est.interval(opts.z);
            if b < target {
                // m_{t-s} ≤ e^{s} m_t: still below target for s < ln(target/b).
                let bound = if b > 0.0 { t - (target / b).ln() } else { t };
                hi = hi.min(bound).max(lo);
                break;
            }
            if a > target {
                // m_{t+s} ≥ e^{-s} m_t: still above target for s < ln(a/target).
                lo = lo.max(t + (a / target).ln()).min(hi);
                break;
            }
            let t_lo = if a > 0.0 {
                t - (target / a).ln() / kappa
            } else {
                f64::NEG_INFINITY
            };
            let t_hi = t + (b / target).ln() / kappa;
            let (l, h) = (lo.max(t_lo), hi.min(t_hi));
            if h - l < precision {
                return Ok(TmEstimate {
                    time: 0.5 * (l + h),
                    lower: l,
                    upper: h,
                    replicas_used: total,
                    probes,
                });
            }
            if want >= opts.max_replicas {
                return Err(Error::BudgetExceeded {
                    reason: format!("m_t at t={t:.4} not separated from 1/√n"),
                    partial: Some(PartialEstimate {
                        estimate: 0.5 * (l + h),
                        lower: l,
                        upper: h,
                        replicas: total,
                    }),
                });
            }
            want = (want * 2).min(opts.max_replicas);
        }
    }
    Ok(TmEstimate {
        time: 0.5 * (lo + hi),
        lower: lo,
        upper: hi,
        replicas_used: total,
        probes,
    })
}

/// Frequency with which the plus- and minus-started chains, driven by the
/// same update sequence, disagree at `origin` at time `t`.
pub fn grand_coupling_disagreement(
    g: &Graph,
    beta: f64,
    t: f64,
    replicas: usize,
    seed: u64,
    origin: usize,
) -> Result<MeanEstimate> {
    if replicas == 0 {
        return Err(Error::InvalidArgument("replicas must be ≥ 1".into()));
    }
    validate_vertex(g, origin)?;
    validate_times(&[t])?;
    let rule = HeatBathRule::new(beta, g)?;
    let samples = replicas::map(seed, replicas, |_, s| {
        let seq = UpdateSequence::generate(g.n(), t, s)?;
        let mut plus = SpinConfig::all_plus(g.n());
        let mut minus = SpinConfig::all_minus(g.n());
        apply_events(&mut [&mut plus, &mut minus], &seq, &rule, g, &[], |_, _| {});
        Ok(if plus.get(origin) != minus.get(origin) {
            1.0
        } else {
            0.0
        })
    })?;
    Ok(MeanEstimate::from_samples(&samples))
}

/// Monte Carlo estimate of `Σ_u Cov(X_t(u), X_t(v))` from start `x0`.
pub fn covariance_sum(
    g: &Graph,
    beta: f64,
    t: f64,
    v: usize,
    x0: &SpinConfig,
    replicas: usize,
    seed: u64,
) -> Result<MeanEstimate> {
    if replicas < 2 {
        return Err(Error::InvalidArgument("covariance needs at least 2 replicas".into()));
    }
    validate_vertex(g, v)?;
    validate_times(&[t])?;
    if x0.len() != g.n() {
        return Err(Error::InvalidArgument("x0 size mismatch".into()));
    }
    let rule = HeatBathRule::new(beta, g)?;
    let pairs = replicas::map(seed, replicas, |_, s| {
        let seq = UpdateSequence::generate(g.n(), t, s)?;
        let mut x = x0.clone();
        apply_events(&mut [&mut x], &seq, &rule, g, &[], |_, _| {});
        Ok((x.get(v) as f64, x.magnetization_sum() as f64))
    })?;
    let r = replicas as f64;
    let xs: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let ss: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let (mx, ms) = (pairwise_sum(&xs) / r, pairwise_sum(&ss) / r);
    let products: Vec<f64> = pairs.iter().map(|&(x, s)| (x - mx) * (s - ms)).collect();
    let est = MeanEstimate::from_samples(&products);
    Ok(MeanEstimate {
        mean: est.mean * r / (r - 1.0),
        stderr: est.stderr * r / (r - 1.0),
        count: replicas,
    })
}
