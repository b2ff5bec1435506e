//! Total-variation machinery: exact stationary and transient laws for tiny
//! systems, TV profiles, statistical lower bounds, cutoff windows and the
//! L² lemma check for mixtures of partially uniform measures.

use rand::Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::backward::perfect_sample;
use crate::error::{Error, Result};
use crate::forward::{apply_events, find_t_m, TmOptions};
use crate::graph::{Graph, GraphSpec};
use crate::replicas;
use crate::rule::{HeatBathRule, SpinConfig};
use crate::seeding::{self, tag};
use crate::stats::pairwise_sum;
use crate::update_stream::UpdateSequence;

pub const STATIONARY_MAX_SITES: usize = 20;
pub const TRANSIENT_MAX_SITES: usize = 12;
/// Poisson tail mass dropped by uniformization.
pub const UNIFORMIZATION_TAIL: f64 = 1e-12;
/// Block length for the perfect sampler used by the statistical profiles.
pub const PERFECT_HORIZON_STEP: f64 = 1.0;

/// A probability for each of the `2^n` configurations; bit `i` of the index
/// set means vertex `i` is plus.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistributionTable {
    n: usize,
    probs: Vec<f64>,
    /// Probability mass lost to truncation (0 for exact tables).
    truncation: f64,
}

impl DistributionTable {
    pub fn new(n: usize, probs: Vec<f64>) -> Result<Self> {
        Self::with_truncation(n, probs, 0.0)
    }

    fn with_truncation(n: usize, probs: Vec<f64>, truncation: f64) -> Result<Self> {
        if n >= usize::BITS as usize || probs.len() != 1 << n {
            return Err(Error::InvalidArgument(format!(
                "table for {n} sites needs 2^{n} entries, got {}",
                probs.len()
            )));
        }
        if probs.iter().any(|&p| !(p >= 0.0)) {
            return Err(Error::InvalidArgument("negative or NaN probability".into()));
        }
        let total = pairwise_sum(&probs);
        if (total - 1.0).abs() > 1e-10 + truncation {
            return Err(Error::InvalidArgument(format!("probabilities sum to {total}")));
        }
        Ok(Self { n, probs, truncation })
    }

    pub fn point_mass(x: &SpinConfig) -> Self {
        let mut probs = vec![0.0; 1 << x.len()];
        probs[x.to_index()] = 1.0;
        Self {
            n: x.len(),
            probs,
            truncation: 0.0,
        }
    }

    pub fn uniform(n: usize) -> Self {
        Self {
            n,
            probs: vec![1.0 / (1u64 << n) as f64; 1 << n],
            truncation: 0.0,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, x: &SpinConfig) -> f64 {
        self.probs[x.to_index()]
    }

    pub fn truncation_error(&self) -> f64 {
        self.truncation
    }

    pub fn total(&self) -> f64 {
        pairwise_sum(&self.probs)
    }
}

fn check_capacity(g: &Graph, max: usize) -> Result<()> {
    if g.n() > max {
        return Err(Error::Capacity(format!(
            "exact enumeration supports at most {max} sites, got {}",
            g.n()
        )));
    }
    Ok(())
}

/// The Ising measure `π(σ) ∝ exp(β Σ_{uv∈E} σ_u σ_v)` by enumeration.
pub fn exact_stationary(g: &Graph, beta: f64) -> Result<DistributionTable> {
    check_capacity(g, STATIONARY_MAX_SITES)?;
    HeatBathRule::new(beta, g)?;
    let n = g.n();
    let edges: Vec<(usize, usize)> = g.edges().collect();
    let energy: Vec<f64> = (0..1usize << n)
        .map(|s| {
            let agree = edges.iter().filter(|&&(u, v)| (s >> u ^ s >> v) & 1 == 0).count() as f64;
            beta * (2.0 * agree - edges.len() as f64)
        })
        .collect();
    let top = energy.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = energy.iter().map(|e| (e - top).exp()).collect();
    let z = pairwise_sum(&weights);
    DistributionTable::new(n, weights.into_iter().map(|w| w / z).collect())
}

/// One uniformized step: `p ↦ p P` with `P = (1/n) Σ_v K_v`, `K_v` the
/// heat-bath kernel at `v`.
fn uniformized_step(g: &Graph, plus_prob: &[Vec<f64>], p: &[f64], out: &mut [f64]) {
    let n = g.n();
    out.iter_mut().for_each(|x| *x = 0.0);
    let w = 1.0 / n as f64;
    for (s, &mass) in p.iter().enumerate() {
        if mass == 0.0 {
            continue;
        }
        let m = mass * w;
        for (v, probs) in plus_prob.iter().enumerate() {
            let sigma: i32 = g
                .neighbors(v)
                .iter()
                .map(|&u| if s >> u & 1 == 1 { 1 } else { -1 })
                .sum();
            let deg = g.deg(v) as i32;
            let q = probs[((sigma + deg) / 2) as usize];
            let bit = 1usize << v;
            out[s | bit] += m * q;
            out[s & !bit] += m * (1.0 - q);
        }
    }
}

/// Law of `X_t` from `x0`, by uniformization of the site-update generator.
pub fn exact_transient(g: &Graph, beta: f64, x0: &SpinConfig, t: f64) -> Result<DistributionTable> {
    check_capacity(g, TRANSIENT_MAX_SITES)?;
    if x0.len() != g.n() {
        return Err(Error::InvalidArgument("x0 size mismatch".into()));
    }
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::InvalidArgument(format!("time must be finite and ≥ 0, got {t}")));
    }
    let n = g.n();
    let plus_prob: Vec<Vec<f64>> = (0..n)
        .map(|v| {
            let d = g.deg(v);
            (0..=d)
                .map(|j| 0.5 * (1.0 + (beta * (2 * j as i32 - d as i32) as f64).tanh()))
                .collect()
        })
        .collect();
    let lambda_t = n as f64 * t;
    let mut p = DistributionTable::point_mass(x0).probs;
    let mut next = vec![0.0; p.len()];
    let mut acc = vec![0.0; p.len()];
    let mut covered = 0.0;
    let mut k = 0usize;
    loop {
        let log_w = if lambda_t == 0.0 {
            if k == 0 { 0.0 } else { f64::NEG_INFINITY }
        } else {
            -lambda_t + k as f64 * lambda_t.ln() - ln_gamma(k as f64 + 1.0)
        };
        let w = log_w.exp();
        if w > 0.0 {
            for (a, &x) in acc.iter_mut().zip(&p) {
                *a += w * x;
            }
            covered += w;
        }
        if 1.0 - covered < UNIFORMIZATION_TAIL && k as f64 >= lambda_t {
            break;
        }
        uniformized_step(g, &plus_prob, &p, &mut next);
        std::mem::swap(&mut p, &mut next);
        k += 1;
    }
    DistributionTable::with_truncation(n, acc, (1.0 - covered).max(0.0))
}

/// `½ Σ |p − q|`.
pub fn tv_distance(p: &DistributionTable, q: &DistributionTable) -> Result<f64> {
    if p.n != q.n {
        return Err(Error::InvalidArgument(format!(
            "tables over {} and {} sites",
            p.n, q.n
        )));
    }
    let diffs: Vec<f64> = p.probs.iter().zip(&q.probs).map(|(a, b)| (a - b).abs()).collect();
    Ok((0.5 * pairwise_sum(&diffs)).clamp(0.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TvMode {
    Exact,
    Statistical,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TvPoint {
    pub time: f64,
    /// Exact TV, or a certified lower bound in statistical mode.
    pub tv: f64,
    /// Zero for exact entries.
    pub stderr: f64,
    pub exact: bool,
    /// Statistical mode only: in-sample sup over thresholds (biased upward).
    pub plugin: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TvProfile {
    pub points: Vec<TvPoint>,
}

/// Fraction of sorted `xs` that are `≥ c`.
fn tail_fraction(sorted: &[i64], c: i64) -> f64 {
    (sorted.len() - sorted.partition_point(|&x| x < c)) as f64 / sorted.len() as f64
}

/// Threshold and sign maximizing `|P̂_a(f ≥ c) − P̂_b(f ≥ c)|`, with the gap.
fn best_threshold(a: &[i64], b: &[i64]) -> (i64, f64, f64) {
    let mut cands: Vec<i64> = a.iter().chain(b).copied().collect();
    cands.sort_unstable();
    cands.dedup();
    let mut best = (i64::MAX, 1.0, 0.0);
    for c in cands {
        let gap = tail_fraction(a, c) - tail_fraction(b, c);
        if gap.abs() > best.2 {
            best = (c, gap.signum(), gap.abs());
        }
    }
    best
}

fn gap_with_error(a: &[i64], b: &[i64], c: i64, sign: f64) -> (f64, f64) {
    let (pa, pb) = (tail_fraction(a, c), tail_fraction(b, c));
    let se = (pa * (1.0 - pa) / a.len() as f64 + pb * (1.0 - pb) / b.len() as f64).sqrt();
    (sign * (pa - pb), se)
}

fn split_halves(xs: &[i64]) -> (Vec<i64>, Vec<i64>) {
    let mut even: Vec<i64> = xs.iter().step_by(2).copied().collect();
    let mut odd: Vec<i64> = xs.iter().skip(1).step_by(2).copied().collect();
    even.sort_unstable();
    odd.sort_unstable();
    (even, odd)
}

/// Sums of spins of the all-plus chain at sorted `times`, one row per replica.
fn forward_sums(g: &Graph, beta: f64, times: &[f64], replicas: usize, seed: u64) -> Result<Vec<Vec<i64>>> {
    let rule = HeatBathRule::new(beta, g)?;
    let horizon = times.last().copied().unwrap_or(0.0);
    replicas::map(seed, replicas, |_, s| {
        let seq = UpdateSequence::generate(g.n(), horizon, s)?;
        let mut x = SpinConfig::all_plus(g.n());
        let mut out = vec![0; times.len()];
        apply_events(&mut [&mut x], &seq, &rule, g, times, |i, st| {
            out[i] = st[0].magnetization_sum();
        });
        Ok(out)
    })
}

/// Sums of spins of independent exact samples from the Ising measure.
pub fn stationary_sums(g: &Graph, beta: f64, replicas: usize, seed: u64) -> Result<Vec<i64>> {
    let base = seeding::derive(seed, &[tag::PERFECT]);
    replicas::map(base, replicas, |_, s| {
        Ok(perfect_sample(g, beta, s, PERFECT_HORIZON_STEP)?.magnetization_sum())
    })
}

/// Statistical TV lower bound from samples of the sum-of-spins statistic.
///
/// Even-indexed replicas pick the threshold event `{f ≥ c}` and its sign;
/// the odd-indexed ones evaluate it, so the reported gap is an unbiased
/// estimate of a genuine lower bound (clamped at 0). The plug-in value is
/// the sup over thresholds on all samples and is biased upward.
fn split_lower_bound(chain: &[i64], stationary: &[i64]) -> (f64, f64, f64) {
    let (chain_sel, chain_eval) = split_halves(chain);
    let (stat_sel, stat_eval) = split_halves(stationary);
    let (c, sign, _) = best_threshold(&chain_sel, &stat_sel);
    let (gap, se) = gap_with_error(&chain_eval, &stat_eval, c, sign);
    let mut all_a = chain.to_vec();
    let mut all_b = stationary.to_vec();
    all_a.sort_unstable();
    all_b.sort_unstable();
    let plugin = best_threshold(&all_a, &all_b).2;
    (gap.max(0.0), se, plugin)
}

/// Worst-start (all-plus) distance to stationarity at each time.
pub fn tv_profile(
    g: &Graph,
    beta: f64,
    times: &[f64],
    mode: TvMode,
    replicas: usize,
    seed: u64,
) -> Result<TvProfile> {
    if times.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
        return Err(Error::InvalidArgument("times must be finite and ≥ 0".into()));
    }
    match mode {
        TvMode::Exact => {
            check_capacity(g, TRANSIENT_MAX_SITES)?;
            let pi = exact_stationary(g, beta)?;
            let plus = SpinConfig::all_plus(g.n());
            let points = times
                .iter()
                .map(|&t| {
                    let p = exact_transient(g, beta, &plus, t)?;
                    Ok(TvPoint {
                        time: t,
                        tv: tv_distance(&p, &pi)?,
                        stderr: 0.0,
                        exact: true,
                        plugin: None,
                    })
                })
                .collect::<Result<_>>()?;
            Ok(TvProfile { points })
        }
        TvMode::Statistical => {
            if replicas < 4 {
                return Err(Error::InvalidArgument("statistical mode needs ≥ 4 replicas".into()));
            }
            let mut order: Vec<usize> = (0..times.len()).collect();
            order.sort_by(|&a, &b| times[a].total_cmp(&times[b]));
            let sorted: Vec<f64> = order.iter().map(|&i| times[i]).collect();
            let chain = forward_sums(g, beta, &sorted, replicas, seed)?;
            let stationary = stationary_sums(g, beta, replicas, seed)?;
            let mut points = vec![None; times.len()];
            for (j, &orig) in order.iter().enumerate() {
                let column: Vec<i64> = chain.iter().map(|r| r[j]).collect();
                let (tv, stderr, plugin) = split_lower_bound(&column, &stationary);
                points[orig] = Some(TvPoint {
                    time: sorted[j],
                    tv,
                    stderr,
                    exact: false,
                    plugin: Some(plugin),
                });
            }
            Ok(TvProfile {
                points: points.into_iter().map(Option::unwrap).collect(),
            })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TvBound {
    pub bound: f64,
    pub stderr: f64,
    /// Threshold `c = ÊY/2` on the sum of spins.
    pub threshold: f64,
}

/// Distinguishing-statistic lower bound: with `Y` the sum of spins of the
/// all-plus chain at `t`, the event `{Y ≥ ÊY/2}` has probability gap
/// `P(Y ≥ c) − P(Y' ≥ c)` against the stationary sum `Y'`. The threshold
/// is estimated on even-indexed replicas and evaluated on odd ones.
pub fn lower_bound_tv(g: &Graph, beta: f64, t: f64, replicas: usize, seed: u64) -> Result<TvBound> {
    if replicas < 100 {
        return Err(Error::InvalidArgument("lower bound needs ≥ 100 replicas".into()));
    }
    let chain: Vec<i64> = forward_sums(g, beta, &[t], replicas, seed)?
        .into_iter()
        .map(|r| r[0])
        .collect();
    let stationary = stationary_sums(g, beta, replicas, seed)?;
    let (sel, eval) = split_halves(&chain);
    let mean = pairwise_sum(&sel.iter().map(|&y| y as f64).collect::<Vec<_>>()) / sel.len() as f64;
    let threshold = mean / 2.0;
    let c = threshold.ceil() as i64;
    let (_, stat_eval) = split_halves(&stationary);
    let (gap, stderr) = gap_with_error(&eval, &stat_eval, c, 1.0);
    Ok(TvBound {
        bound: gap.max(0.0),
        stderr,
        threshold,
    })
}

/// First time the profile falls to `eps`, by linear interpolation between
/// the grid points straddling it.
pub fn mixing_time(profile: &TvProfile, eps: f64) -> Option<f64> {
    let mut pts: Vec<&TvPoint> = profile.points.iter().collect();
    pts.sort_by(|a, b| a.time.total_cmp(&b.time));
    let first = pts.first()?;
    if first.tv <= eps {
        return None;
    }
    pts.windows(2).find(|w| w[1].tv <= eps).map(|w| {
        let (a, b) = (w[0], w[1]);
        a.time + (a.tv - eps) / (a.tv - b.tv) * (b.time - a.time)
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CutoffRow {
    pub n: usize,
    pub t_m: f64,
    pub eps: f64,
    pub t_mix: f64,
    /// `t_mix − t_m`.
    pub offset: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CutoffWindow {
    pub n: usize,
    pub eps: f64,
    /// `t_mix(eps) − t_mix(1 − eps)`.
    pub width: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CutoffScan {
    pub rows: Vec<CutoffRow>,
    pub windows: Vec<CutoffWindow>,
    /// Statistical profiles keyed by `n`, times shifted by `t̂_m`.
    pub profiles: Vec<(usize, TvProfile)>,
}

#[derive(Debug, Clone)]
pub struct CutoffOptions {
    /// Profile grid as offsets from `t̂_m`.
    pub offsets: Vec<f64>,
    pub replicas: usize,
    pub t_m_precision: f64,
    pub t_m: TmOptions,
}

impl Default for CutoffOptions {
    fn default() -> Self {
        Self {
            offsets: (0..=48).map(|i| -6.0 + 0.25 * i as f64).collect(),
            replicas: 2000,
            t_m_precision: 0.05,
            t_m: TmOptions::default(),
        }
    }
}

/// Estimate `t̂_mix(ε) − t̂_m` for each size, and the windows
/// `t̂_mix(ε) − t̂_mix(1 − ε)` for each `ε < ½` whose partner is listed.
pub fn cutoff_window_scan(
    family: &GraphSpec,
    sizes: &[usize],
    beta: f64,
    eps: &[f64],
    seed: u64,
    opts: &CutoffOptions,
) -> Result<CutoffScan> {
    if eps.iter().any(|e| !(*e > 0.0 && *e < 1.0)) {
        return Err(Error::InvalidArgument("ε must lie in (0, 1)".into()));
    }
    let mut scan = CutoffScan {
        rows: Vec::new(),
        windows: Vec::new(),
        profiles: Vec::new(),
    };
    for (i, &size) in sizes.iter().enumerate() {
        let g = family.with_size(size)?.build()?;
        let n = g.n();
        let s = seeding::derive(seed, &[tag::INSTANCE, i as u64]);
        let tm = find_t_m(&g, beta, opts.t_m_precision, s, opts.t_m)?.time;
        let mut times: Vec<f64> = opts.offsets.iter().map(|o| (tm + o).max(0.0)).collect();
        times.sort_by(f64::total_cmp);
        times.dedup();
        let profile = tv_profile(&g, beta, &times, TvMode::Statistical, opts.replicas, s)?;
        let mut t_mix = Vec::new();
        for &e in eps {
            let t = mixing_time(&profile, e).ok_or_else(|| Error::BudgetExceeded {
                reason: format!("profile for n={n} does not bracket ε={e}"),
                partial: None,
            })?;
            t_mix.push((e, t));
            scan.rows.push(CutoffRow {
                n,
                t_m: tm,
                eps: e,
                t_mix: t,
                offset: t - tm,
            });
        }
        for &(e, t) in t_mix.iter().filter(|p| p.0 < 0.5) {
            if let Some(&(_, t2)) = t_mix.iter().find(|p| (p.0 - (1.0 - e)).abs() < 1e-12) {
                scan.windows.push(CutoffWindow {
                    n,
                    eps: e,
                    width: t - t2,
                });
            }
        }
        let shifted = TvProfile {
            points: profile
                .points
                .iter()
                .map(|p| TvPoint { time: p.time - tm, ..*p })
                .collect(),
        };
        scan.profiles.push((n, shifted));
    }
    Ok(scan)
}

/// One instance of the L² lemma: a law over subsets `R` and, for each `R`,
/// a law of the spins on `R`.
#[derive(Debug, Clone)]
pub struct MixtureInstance {
    pub n: usize,
    /// Weight per subset mask.
    pub subset_law: Vec<f64>,
    /// For each subset mask, a law over `{±1}^R` indexed by the spins of `R`
    /// in increasing vertex order.
    pub spin_laws: Vec<Vec<f64>>,
}

impl MixtureInstance {
    /// The mixed measure on `{±1}^V`, uniform off `R`.
    pub fn measure(&self) -> Vec<f64> {
        let n = self.n;
        let mut mu = vec![0.0; 1 << n];
        for (r, &w) in self.subset_law.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            let members: Vec<usize> = (0..n).filter(|i| r >> i & 1 == 1).collect();
            let free = (n - members.len()) as i32;
            for (s, m) in mu.iter_mut().enumerate() {
                let local = members
                    .iter()
                    .enumerate()
                    .fold(0usize, |acc, (j, &v)| acc | ((s >> v & 1) << j));
                *m += w * self.spin_laws[r][local] * 0.5f64.powi(free);
            }
        }
        mu
    }

    /// `‖μ − ν‖²_{L²(ν)} = 2^n Σ μ(σ)² − 1`.
    pub fn l2_distance_sq(&self) -> f64 {
        let mu = self.measure();
        let sq: Vec<f64> = mu.iter().map(|m| m * m).collect();
        (1u64 << self.n) as f64 * pairwise_sum(&sq) - 1.0
    }

    /// `E 2^{|R ∩ R'|} − 1` for independent `R, R'`.
    pub fn intersection_moment(&self) -> f64 {
        let mut terms = Vec::new();
        for (a, &wa) in self.subset_law.iter().enumerate() {
            for (b, &wb) in self.subset_law.iter().enumerate() {
                terms.push(wa * wb * ((a & b).count_ones() as f64).exp2());
            }
        }
        pairwise_sum(&terms) - 1.0
    }
}

fn random_law(rng: &mut impl Rng, size: usize) -> Vec<f64> {
    // Occasionally a point mass; otherwise normalized exponentials (a flat
    // Dirichlet), sometimes sparsified.
    if rng.random::<f64>() < 0.2 {
        let mut law = vec![0.0; size];
        law[rng.random_range(0..size)] = 1.0;
        return law;
    }
    let sparse = rng.random::<f64>() < 0.3;
    let mut w: Vec<f64> = (0..size)
        .map(|_| {
            if sparse && rng.random::<f64>() < 0.5 {
                0.0
            } else {
                rng.sample::<f64, _>(Exp1)
            }
        })
        .collect();
    if w.iter().all(|&x| x == 0.0) {
        w[0] = 1.0;
    }
    let total: f64 = w.iter().sum();
    w.iter().map(|x| x / total).collect()
}

pub fn random_mixture(n: usize, seed: u64) -> MixtureInstance {
    let mut rng = seeding::rng_from_seed(seed);
    let subset_law = random_law(&mut rng, 1 << n);
    let spin_laws = (0..1usize << n)
        .map(|r| random_law(&mut rng, 1 << (r as u32).count_ones()))
        .collect();
    MixtureInstance {
        n,
        subset_law,
        spin_laws,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MpCheck {
    pub trials: usize,
    pub violations: usize,
    /// Largest `LHS / RHS` seen over instances with positive RHS.
    pub max_ratio: f64,
}

/// Check `‖μ − ν‖²_{L²(ν)} ≤ E 2^{|R∩R'|} − 1` on random instances.
pub fn mp_l2_check(v_size: usize, trials: usize, seed: u64) -> Result<MpCheck> {
    if v_size == 0 || v_size > 4 {
        return Err(Error::InvalidArgument("|V| must lie in 1..=4".into()));
    }
    let results = replicas::map(seed, trials, |_, s| {
        let inst = random_mixture(v_size, s);
        Ok((inst.l2_distance_sq(), inst.intersection_moment()))
    })?;
    let mut violations = 0;
    let mut max_ratio = 0.0f64;
    for (lhs, rhs) in results {
        if lhs > rhs + 1e-12 * (1.0 + rhs.abs()) {
            violations += 1;
        }
        if rhs > 1e-12 {
            max_ratio = max_ratio.max(lhs / rhs);
        }
    }
    Ok(MpCheck {
        trials,
        violations,
        max_ratio,
    })
}
