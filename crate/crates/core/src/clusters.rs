//! Information-percolation clusters: connected components of the union of
//! all single-site histories, their colors, and moment statistics.

use rand::Rng;
use rand_distr::Exp1;
use serde::Serialize;

use crate::backward::{self, atom_id, Exploration, History, SpinMemo, DEFAULT_LENGTH_CAP_PER_SITE};
use crate::error::{Error, Result};
use crate::graph::{steiner_width, Graph, VertexSet};
use crate::replicas;
use crate::rule::{HeatBathRule, SpinConfig, Theta};
use crate::seeding::{self, tag};
use crate::stats::MeanEstimate;
use crate::update_stream::UpdateSequence;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Color {
    Red,
    Green,
    Blue,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClusterStats {
    /// Steiner width of the roots.
    pub width: usize,
    pub width_exact: bool,
    pub chi: usize,
    pub length: f64,
    pub survives: bool,
}

#[derive(Debug, Clone)]
pub struct Cluster {
    pub roots: VertexSet,
    pub history: History,
    pub color: Color,
    pub stats: ClusterStats,
}

/// Disjoint-set forest with path halving and union by size.
pub(crate) struct UnionFind {
    parent: Vec<usize>,
    size: Vec<u32>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub fn union(&mut self, a: usize, b: usize) {
        let (mut a, mut b) = (self.find(a), self.find(b));
        if a == b {
            return;
        }
        if self.size[a] < self.size[b] {
            std::mem::swap(&mut a, &mut b);
        }
        self.parent[b] = a;
        self.size[a] += self.size[b];
    }
}

/// Develop `H_v` for every site and split the union into clusters, ordered
/// by smallest root.
pub fn build_clusters(g: &Graph, seq: &UpdateSequence, beta: f64) -> Result<Vec<Cluster>> {
    build_clusters_capped(g, seq, beta, DEFAULT_LENGTH_CAP_PER_SITE * g.n() as f64)
}

pub fn build_clusters_capped(
    g: &Graph,
    seq: &UpdateSequence,
    beta: f64,
    length_cap: f64,
) -> Result<Vec<Cluster>> {
    if seq.n() != g.n() {
        return Err(Error::InvalidArgument("sequence and graph sizes differ".into()));
    }
    let rule = HeatBathRule::new(beta, g)?;
    let n = g.n();
    let roots: Vec<usize> = (0..n).collect();
    let mut exp = Exploration::new(seq);
    if let Err(explored) = exp.develop(seq, &rule, g, &roots, length_cap, true) {
        return Err(Error::Supercritical {
            cap: length_cap,
            explored,
            partial: None,
        });
    }

    let mut uf = UnionFind::new(seq.atom_count());
    for &(a, b) in &exp.edges {
        uf.union(a, b);
    }

    // Component label (by smallest root) for every root and atom.
    let mut label_of_rep = std::collections::HashMap::new();
    let mut root_sets: Vec<Vec<usize>> = Vec::new();
    for v in 0..n {
        let rep = uf.find(atom_id(seq, v, seq.site_len(v)));
        let label = *label_of_rep.entry(rep).or_insert_with(|| {
            root_sets.push(Vec::new());
            root_sets.len() - 1
        });
        root_sets[label].push(v);
    }
    let mut atom_sets: Vec<Vec<(usize, usize)>> = vec![Vec::new(); root_sets.len()];
    for &(v, k) in &exp.visited {
        let rep = uf.find(atom_id(seq, v, k));
        atom_sets[label_of_rep[&rep]].push((v, k));
    }

    let mut plus = SpinMemo::new(seq);
    let mut minus = SpinMemo::new(seq);
    let (xp, xm) = (SpinConfig::all_plus(n), SpinConfig::all_minus(n));
    let mut clusters = Vec::with_capacity(root_sets.len());
    for (r, atoms) in root_sets.into_iter().zip(atom_sets) {
        let red = r.iter().any(|&v| {
            let k = seq.site_len(v);
            plus.resolve(seq, &rule, g, &xp, v, k) != minus.resolve(seq, &rule, g, &xm, v, k)
        });
        let roots = VertexSet::new(r, n)?;
        let history = exp.history(seq, &rule, g, roots.clone(), atoms);
        let survives = history.survives();
        let color = color_from(red, roots.len(), survives);
        let w = steiner_width(g, &roots)?;
        clusters.push(Cluster {
            stats: ClusterStats {
                width: w.size,
                width_exact: w.exact,
                chi: history.chi(),
                length: history.length(),
                survives,
            },
            roots,
            history,
            color,
        });
    }
    Ok(clusters)
}

fn color_from(red: bool, roots: usize, survives: bool) -> Color {
    if red {
        Color::Red
    } else if roots == 1 && !survives {
        Color::Blue
    } else {
        Color::Green
    }
}

/// Color of a cluster, recomputed from its history: Red iff the all-plus and
/// all-minus initial states reconstruct differently at some root.
pub fn classify(c: &Cluster, seq: &UpdateSequence, beta: f64, g: &Graph) -> Result<Color> {
    let n = g.n();
    let p = backward::reconstruct(&c.history, seq, beta, g, &SpinConfig::all_plus(n))?;
    let m = backward::reconstruct(&c.history, seq, beta, g, &SpinConfig::all_minus(n))?;
    Ok(color_from(p != m, c.roots.len(), c.history.survives()))
}

/// Indicator per site of lying in a Red cluster.
pub fn red_sites(g: &Graph, seq: &UpdateSequence, beta: f64) -> Result<Vec<bool>> {
    let mut red = vec![false; g.n()];
    for c in build_clusters(g, seq, beta)? {
        if c.color == Color::Red {
            for v in c.roots.iter() {
                red[v] = true;
            }
        }
    }
    Ok(red)
}

/// Monte Carlo estimate of `E 2^{|V_Red ∩ V_Red'|}` for clusters built from
/// two independent update sequences on `[0, t_star]`.
pub fn red_intersection_moment(
    g: &Graph,
    beta: f64,
    t_star: f64,
    replicas: usize,
    seed: u64,
) -> Result<MeanEstimate> {
    if replicas < 2 {
        return Err(Error::InvalidArgument("need at least 2 replicas".into()));
    }
    if t_star == 0.0 && g.n() > 20 {
        return Err(Error::InvalidArgument(
            "t★ = 0 makes every site red; refusing 2^n for n > 20".into(),
        ));
    }
    let samples = replicas::map(seed, replicas, |_, s| {
        let a = UpdateSequence::generate(g.n(), t_star, seeding::derive(s, &[tag::PAIR, 0]))?;
        let b = UpdateSequence::generate(g.n(), t_star, seeding::derive(s, &[tag::PAIR, 1]))?;
        let (ra, rb) = (red_sites(g, &a, beta)?, red_sites(g, &b, beta)?);
        let common = ra.iter().zip(&rb).filter(|(x, y)| **x && **y).count();
        Ok((common as f64).exp2())
    })?;
    Ok(MeanEstimate::from_samples(&samples))
}

/// Frequency with which `A` is exactly the root set of a Red cluster.
pub fn estimate_red_prob(
    g: &Graph,
    beta: f64,
    t_star: f64,
    a: &VertexSet,
    replicas: usize,
    seed: u64,
) -> Result<MeanEstimate> {
    if a.is_empty() || a.len() > 6 {
        return Err(Error::InvalidArgument("A must have between 1 and 6 sites".into()));
    }
    if a.as_slice().last().is_some_and(|&v| v >= g.n()) {
        return Err(Error::InvalidArgument("A outside the graph".into()));
    }
    let samples = replicas::map(seed, replicas, |_, s| {
        let seq = UpdateSequence::generate(g.n(), t_star, s)?;
        let hit = build_clusters(g, &seq, beta)?
            .into_iter()
            .any(|c| c.color == Color::Red && &c.roots == a);
        Ok(if hit { 1.0 } else { 0.0 })
    })?;
    Ok(MeanEstimate::from_samples(&samples))
}

/// Length and branching count of `H_A` per replica, over `[0, t_star]`.
pub fn chi_length_samples(
    g: &Graph,
    beta: f64,
    a: &VertexSet,
    t_star: f64,
    replicas: usize,
    seed: u64,
) -> Result<Vec<(usize, f64)>> {
    let cap = DEFAULT_LENGTH_CAP_PER_SITE * g.n() as f64;
    let rule = HeatBathRule::new(beta, g)?;
    replicas::map(seed, replicas, |_, s| {
        let seq = UpdateSequence::generate(g.n(), t_star, s)?;
        let h = backward::develop_with_rule(a, &seq, &rule, g, cap)?;
        Ok((h.chi(), h.length()))
    })
}

/// Monte Carlo estimate of `E exp(η L(H_A) + λ χ(H_A))` for histories
/// developed over `[0, t_star]`.
#[allow(clippy::too_many_arguments)]
pub fn exp_moment_chi_length(
    g: &Graph,
    beta: f64,
    a: &VertexSet,
    eta: f64,
    lambda: f64,
    t_star: f64,
    replicas: usize,
    seed: u64,
) -> Result<MeanEstimate> {
    if !(eta > 0.0 && eta < 1.0) || !(lambda > 0.0) {
        return Err(Error::InvalidArgument("need 0 < η < 1 and λ > 0".into()));
    }
    let samples: Vec<f64> = chi_length_samples(g, beta, a, t_star, replicas, seed)?
        .into_iter()
        .map(|(chi, len)| (eta * len + lambda * chi as f64).exp())
        .collect();
    Ok(MeanEstimate::from_samples(&samples))
}

/// `η + θ(e^{−α} − 1) + (1 − θ)(e^{(λ+α)d} − 1)` with `θ = 1 − tanh(βd)`.
/// A negative value makes `exp(ηZ + λY + αW)` a supermartingale for the
/// dominating branching process.
pub fn drift_margin(beta: f64, d: usize, eta: f64, lambda: f64, alpha: f64) -> f64 {
    let theta = Theta::new(beta, d).value();
    margin_theta(theta, d, eta, lambda, alpha)
}

fn margin_theta(theta: f64, d: usize, eta: f64, lambda: f64, alpha: f64) -> f64 {
    eta + theta * ((-alpha).exp() - 1.0) + (1.0 - theta) * (((lambda + alpha) * d as f64).exp() - 1.0)
}

/// Smallest `α > 0` with negative drift margin, if any. The margin is convex
/// in `α` and positive at 0, so it is negative on an interval (possibly
/// empty); its left end is found by bisection after locating the minimum.
pub fn feasible_alpha(beta: f64, d: usize, eta: f64, lambda: f64) -> Option<f64> {
    let f = |a: f64| drift_margin(beta, d, eta, lambda, a);
    // Golden-section search for the minimum on [0, 50].
    let (mut a, mut b) = (0.0f64, 50.0f64);
    let r = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..200 {
        let (c, e) = (b - r * (b - a), a + r * (b - a));
        if f(c) < f(e) {
            b = e;
        } else {
            a = c;
        }
    }
    let argmin = 0.5 * (a + b);
    if f(argmin) >= 0.0 {
        return None;
    }
    let (mut lo, mut hi) = (0.0, argmin);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(hi)
}

/// Outcome of simulating the dominating process `(W̄, Ȳ, Z̄)` to extinction.
#[derive(Debug, Clone)]
pub struct DominatingSummary {
    /// Estimate of `E exp(η Z̄_τ + λ Ȳ_τ)`.
    pub moment: MeanEstimate,
    /// `Ȳ_τ` per replica.
    pub y: Vec<f64>,
    /// `Z̄_τ` per replica.
    pub z: Vec<f64>,
}

/// Event cap per trajectory before declaring the process supercritical.
pub const DOMINATING_EVENT_CAP: usize = 1_000_000;

/// Simulate the branching process started from `a_size` particles: each
/// particle dies at rate `θ` or adds `d` particles (and `d` to `Ȳ`) at rate
/// `1 − θ`; `Z̄` accumulates the particle count over time.
#[allow(clippy::too_many_arguments)]
pub fn dominating_process(
    a_size: usize,
    theta: f64,
    d: usize,
    eta: f64,
    lambda: f64,
    alpha: f64,
    replicas: usize,
    seed: u64,
) -> Result<DominatingSummary> {
    if !(0.0..=1.0).contains(&theta) || a_size == 0 {
        return Err(Error::InvalidArgument("need θ ∈ [0,1] and a_size ≥ 1".into()));
    }
    if margin_theta(theta, d, eta, lambda, alpha) >= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "drift margin is nonnegative at α = {alpha}"
        )));
    }
    let paths = replicas::map(seed, replicas, |_, s| {
        let mut rng = seeding::rng_from_seed(seeding::derive(s, &[tag::PROCESS]));
        let (mut w, mut y, mut z) = (a_size as f64, 0.0f64, 0.0f64);
        let mut events = 0usize;
        while w > 0.0 {
            // Time to the next event is Exp(W̄), so Z̄ grows by W̄·Exp(W̄) ~ Exp(1).
            let e: f64 = rng.sample(Exp1);
            z += e;
            if rng.random::<f64>() < theta {
                w -= 1.0;
            } else {
                w += d as f64;
                y += d as f64;
            }
            events += 1;
            if events > DOMINATING_EVENT_CAP {
                return Err(Error::Supercritical {
                    cap: DOMINATING_EVENT_CAP as f64,
                    explored: z,
                    partial: None,
                });
            }
        }
        Ok((y, z))
    })?;
    let moments: Vec<f64> = paths.iter().map(|&(y, z)| (eta * z + lambda * y).exp()).collect();
    Ok(DominatingSummary {
        moment: MeanEstimate::from_samples(&moments),
        y: paths.iter().map(|p| p.0).collect(),
        z: paths.iter().map(|p| p.1).collect(),
    })
}
