//! The cycle `Z_n` through killed coalescing random walks.
//!
//! On a cycle a non-oblivious update copies a uniformly chosen neighbor, so
//! the history of a single site is a random walk run backward in time that
//! dies at rate `θ`. A mark `u` reads as: die if `u < θ` (with spin plus iff
//! `u < θ/2`), step to `v − 1` if `u < θ + (1 − θ)/2`, else step to `v + 1`.
//! This equals the heat-bath rule in law only, not path by path.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{Graph, GraphSpec};
use crate::replicas;
use crate::rule::{Spin, SpinConfig, Theta};
use crate::seeding::{self, tag};
use crate::stats::MeanEstimate;
use crate::update_stream::UpdateSequence;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum WalkEnd {
    /// Killed by an oblivious update carrying `spin`.
    Died { time: f64, spin: Spin },
    /// Reached time 0 at `position`.
    Survived { position: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WalkTrace {
    pub start: usize,
    /// `(time, new position)` per step, in decreasing time.
    pub jumps: Vec<(f64, usize)>,
    pub end: WalkEnd,
}

impl WalkTrace {
    pub fn survives(&self) -> bool {
        matches!(self.end, WalkEnd::Survived { .. })
    }

    /// Spin at the start site at time `t★` given the initial state.
    pub fn spin(&self, x0: &SpinConfig) -> Spin {
        match self.end {
            WalkEnd::Died { spin, .. } => spin,
            WalkEnd::Survived { position } => x0.get(position),
        }
    }
}

fn check_theta(theta: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&theta) {
        return Err(Error::InvalidArgument(format!("θ must lie in [0, 1], got {theta}")));
    }
    Ok(())
}

/// Atom of site `v` current just below time `t` (the top atom at the horizon).
fn atom_below(seq: &UpdateSequence, v: usize, t: f64) -> usize {
    if t >= seq.horizon() {
        seq.site_len(v)
    } else {
        seq.count_before(v, t)
    }
}

/// One step of the walk from atom `(v, k)`, `k ≥ 1`.
enum Step {
    Die(f64, Spin),
    Move(f64, usize),
}

#[inline]
fn step(seq: &UpdateSequence, theta: f64, v: usize, k: usize) -> Step {
    let n = seq.n();
    let e = seq.event(v, k - 1);
    if e.u < theta {
        Step::Die(e.time, if e.u < theta / 2.0 { 1 } else { -1 })
    } else if e.u < theta + (1.0 - theta) / 2.0 {
        Step::Move(e.time, (v + n - 1) % n)
    } else {
        Step::Move(e.time, (v + 1) % n)
    }
}

/// Follow the backward walk of site `v` from time `t_star` (sites of `seq`
/// are read as a cycle).
pub fn walk_history(v: usize, seq: &UpdateSequence, theta: f64, t_star: f64) -> Result<WalkTrace> {
    check_theta(theta)?;
    if v >= seq.n() {
        return Err(Error::InvalidArgument(format!("site {v} outside the cycle")));
    }
    if !(0.0..=seq.horizon()).contains(&t_star) {
        return Err(Error::InvalidArgument(format!("t★ = {t_star} outside [0, horizon]")));
    }
    let mut pos = v;
    let mut k = atom_below(seq, v, t_star);
    let mut jumps = Vec::new();
    loop {
        if k == 0 {
            return Ok(WalkTrace {
                start: v,
                jumps,
                end: WalkEnd::Survived { position: pos },
            });
        }
        match step(seq, theta, pos, k) {
            Step::Die(time, spin) => {
                return Ok(WalkTrace {
                    start: v,
                    jumps,
                    end: WalkEnd::Died { time, spin },
                })
            }
            Step::Move(time, w) => {
                jumps.push((time, w));
                pos = w;
                k = seq.count_before(w, time);
            }
        }
    }
}

/// `e^{−θ t★}`, the probability a single walk reaches time 0.
pub fn survival_probability(theta: f64, t_star: f64) -> Result<f64> {
    check_theta(theta)?;
    if !(t_star >= 0.0) {
        return Err(Error::InvalidArgument("t★ must be ≥ 0".into()));
    }
    Ok((-theta * t_star).exp())
}

/// Monte Carlo frequency of single-walk survival.
pub fn survival_frequency(theta: f64, t_star: f64, replicas: usize, seed: u64) -> Result<MeanEstimate> {
    check_theta(theta)?;
    let samples = replicas::map(seed, replicas, |_, s| {
        let seq = UpdateSequence::generate(3, t_star, s)?;
        Ok(if walk_history(0, &seq, theta, t_star)?.survives() { 1.0 } else { 0.0 })
    })?;
    Ok(MeanEstimate::from_samples(&samples))
}

/// `(2θ)^{-1} ln n`: where the expected number of surviving walks is `√n`.
pub fn zn_cutoff_location(n: usize, theta: f64) -> Result<f64> {
    if n < 3 {
        return Err(Error::InvalidArgument("cycle needs n ≥ 3".into()));
    }
    check_theta(theta)?;
    if theta == 0.0 {
        return Err(Error::InvalidArgument("θ = 0: walks never die".into()));
    }
    Ok((n as f64).ln() / (2.0 * theta))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum WalkColor {
    Red,
    Green,
    Blue,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WalkCluster {
    pub roots: Vec<usize>,
    pub end: WalkEnd,
    pub color: WalkColor,
}

/// Clusters of coalescing walks: roots whose walks meet in a common atom.
#[derive(Debug, Clone)]
pub struct WalkClusters {
    /// Cluster index per site.
    pub label: Vec<usize>,
    pub clusters: Vec<WalkCluster>,
}

/// Run all `n` walks from the horizon, merging a walk into the first
/// earlier walk whose atom it enters.
pub fn walk_clusters(seq: &UpdateSequence, theta: f64) -> Result<WalkClusters> {
    check_theta(theta)?;
    let n = seq.n();
    let offsets: Vec<usize> = (0..n).scan(0, |acc, v| {
        let o = *acc;
        *acc += seq.site_len(v) + 1;
        Some(o)
    })
    .collect();
    let total = offsets.last().map_or(0, |&o| o + seq.site_len(n - 1) + 1);
    const NONE: usize = usize::MAX;
    let mut owner = vec![NONE; total];
    let mut label = vec![NONE; n];
    let mut clusters: Vec<WalkCluster> = Vec::new();
    let mut path: Vec<usize> = Vec::new();
    #[allow(clippy::needless_range_loop)]
    for v in 0..n {
        path.clear();
        let (mut pos, mut k) = (v, seq.site_len(v));
        let found = loop {
            let id = offsets[pos] + k;
            if owner[id] != NONE {
                break Ok(owner[id]);
            }
            path.push(id);
            if k == 0 {
                break Err(WalkEnd::Survived { position: pos });
            }
            match step(seq, theta, pos, k) {
                Step::Die(time, spin) => break Err(WalkEnd::Died { time, spin }),
                Step::Move(time, w) => {
                    pos = w;
                    k = seq.count_before(w, time);
                }
            }
        };
        let c = match found {
            Ok(c) => {
                clusters[c].roots.push(v);
                c
            }
            Err(end) => {
                clusters.push(WalkCluster {
                    roots: vec![v],
                    end,
                    color: WalkColor::Blue,
                });
                clusters.len() - 1
            }
        };
        for &id in &path {
            owner[id] = c;
        }
        label[v] = c;
    }
    for c in &mut clusters {
        c.color = match c.end {
            WalkEnd::Survived { .. } => WalkColor::Red,
            WalkEnd::Died { .. } if c.roots.len() == 1 => WalkColor::Blue,
            WalkEnd::Died { .. } => WalkColor::Green,
        };
    }
    Ok(WalkClusters { label, clusters })
}

fn cycle_size(g: &Graph) -> Result<usize> {
    match *g.spec() {
        GraphSpec::Cycle { n } => Ok(n),
        _ => Err(Error::InvalidGraph("walk representation needs a cycle".into())),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GreenCheck {
    pub violations: usize,
    pub green_clusters: usize,
    /// Green clusters whose common spin was plus.
    pub plus: usize,
}

/// Check that every Green walk cluster has a common root spin. Each root's
/// spin is recomputed from its own walk with a random initial state.
pub fn green_same_spin_check(
    g: &Graph,
    beta: f64,
    t_star: f64,
    replicas: usize,
    seed: u64,
) -> Result<GreenCheck> {
    let n = cycle_size(g)?;
    let theta = Theta::new(beta, 2).value();
    let per = replicas::map(seed, replicas, |_, s| {
        let seq = UpdateSequence::generate(n, t_star, s)?;
        let x0 = random_config(n, seeding::derive(s, &[tag::INSTANCE]));
        let wc = walk_clusters(&seq, theta)?;
        let (mut bad, mut green, mut plus) = (0, 0, 0);
        for c in wc.clusters.iter().filter(|c| c.color == WalkColor::Green) {
            green += 1;
            let spins: Vec<Spin> = c
                .roots
                .iter()
                .map(|&v| walk_history(v, &seq, theta, t_star).map(|w| w.spin(&x0)))
                .collect::<Result<_>>()?;
            if spins.iter().any(|&s| s != spins[0]) {
                bad += 1;
            } else if spins[0] > 0 {
                plus += 1;
            }
        }
        Ok((bad, green, plus))
    })?;
    Ok(GreenCheck {
        violations: per.iter().map(|p| p.0).sum(),
        green_clusters: per.iter().map(|p| p.1).sum(),
        plus: per.iter().map(|p| p.2).sum(),
    })
}

fn random_config(n: usize, seed: u64) -> SpinConfig {
    use rand::Rng;
    let mut rng = seeding::rng_from_seed(seed);
    SpinConfig::new((0..n).map(|_| if rng.random::<bool>() { 1 } else { -1 }).collect())
        .expect("±1 spins")
}

/// Sizes of `H_V(0)` under the walk representation at `t★`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SurvivorCounts {
    /// Number of walks reaching time 0, counted with multiplicity.
    pub walks: MeanEstimate,
    /// Number of distinct sites they occupy at time 0.
    pub distinct: MeanEstimate,
}

pub fn survivor_counts(n: usize, theta: f64, t_star: f64, replicas: usize, seed: u64) -> Result<SurvivorCounts> {
    if n < 3 {
        return Err(Error::InvalidArgument("cycle needs n ≥ 3".into()));
    }
    let per = replicas::map(seed, replicas, |_, s| {
        let seq = UpdateSequence::generate(n, t_star, s)?;
        let wc = walk_clusters(&seq, theta)?;
        let mut walks = 0usize;
        let mut distinct = 0usize;
        for c in &wc.clusters {
            if let WalkEnd::Survived { .. } = c.end {
                walks += c.roots.len();
                distinct += 1;
            }
        }
        Ok((walks as f64, distinct as f64))
    })?;
    let walks: Vec<f64> = per.iter().map(|p| p.0).collect();
    let distinct: Vec<f64> = per.iter().map(|p| p.1).collect();
    Ok(SurvivorCounts {
        walks: MeanEstimate::from_samples(&walks),
        distinct: MeanEstimate::from_samples(&distinct),
    })
}

/// Probability that sites at cycle distance `r` lie in the same Green walk
/// cluster, for `r = 1..=max_distance` (site-averaged per replica).
pub fn same_green_probability(
    g: &Graph,
    beta: f64,
    t_star: f64,
    max_distance: usize,
    replicas: usize,
    seed: u64,
) -> Result<Vec<MeanEstimate>> {
    let n = cycle_size(g)?;
    if max_distance == 0 || max_distance > n / 2 {
        return Err(Error::InvalidArgument("distance must lie in 1..=n/2".into()));
    }
    let theta = Theta::new(beta, 2).value();
    let per = replicas::map(seed, replicas, |_, s| {
        let seq = UpdateSequence::generate(n, t_star, s)?;
        let wc = walk_clusters(&seq, theta)?;
        Ok((1..=max_distance)
            .map(|r| {
                let hits = (0..n)
                    .filter(|&u| {
                        let (a, b) = (wc.label[u], wc.label[(u + r) % n]);
                        a == b && wc.clusters[a].color == WalkColor::Green
                    })
                    .count();
                hits as f64 / n as f64
            })
            .collect::<Vec<f64>>())
    })?;
    Ok((0..max_distance)
        .map(|i| MeanEstimate::from_samples(&per.iter().map(|p| p[i]).collect::<Vec<_>>()))
        .collect())
}

/// `E 2^{|V_Red ∩ V_Red'|}` for the walk representation: a site is Red iff
/// its walk reaches time 0, and the two sets come from independent sequences.
pub fn walk_red_intersection_moment(
    n: usize,
    theta: f64,
    t_star: f64,
    replicas: usize,
    seed: u64,
) -> Result<MeanEstimate> {
    if n < 3 {
        return Err(Error::InvalidArgument("cycle needs n ≥ 3".into()));
    }
    if t_star == 0.0 && n > 20 {
        return Err(Error::InvalidArgument(
            "t★ = 0 makes every site red; refusing 2^n for n > 20".into(),
        ));
    }
    let red = |s: u64| -> Result<Vec<bool>> {
        let seq = UpdateSequence::generate(n, t_star, s)?;
        let wc = walk_clusters(&seq, theta)?;
        Ok(wc
            .label
            .iter()
            .map(|&c| wc.clusters[c].color == WalkColor::Red)
            .collect())
    };
    let samples = replicas::map(seed, replicas, |_, s| {
        let a = red(seeding::derive(s, &[tag::PAIR, 0]))?;
        let b = red(seeding::derive(s, &[tag::PAIR, 1]))?;
        let common = a.iter().zip(&b).filter(|(x, y)| **x && **y).count();
        Ok((common as f64).exp2())
    })?;
    Ok(MeanEstimate::from_samples(&samples))
}
