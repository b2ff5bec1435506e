//! Backward construction of update histories, reconstruction of final spins
//! from them, and perfect sampling by coupling from the past.
//!
//! The space-time slab `V × [0, t★]` is cut by the update times of each site
//! into *atoms*: maximal intervals at one site with no update inside. Atom
//! `k` of site `v` lies between the `(k-1)`-th and `k`-th updates of `v`
//! (atom 0 touches time 0, the last atom touches the horizon). A history is
//! a set of atoms: a branch enters an atom from above, runs down to the
//! update bounding it from below, and there either stops (oblivious update),
//! branches into the atoms of all neighbors current at that time, or reaches
//! time 0. Each atom is explored once, however many branches enter it.

use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{Graph, VertexSet};
use crate::rule::{HeatBathRule, Spin, SpinConfig};
use crate::seeding::{self, tag};
use crate::update_stream::UpdateSequence;

/// Default total-length cap per site for explorations and perfect sampling.
pub const DEFAULT_LENGTH_CAP_PER_SITE: f64 = 1e4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Segment {
    pub site: usize,
    pub low: f64,
    pub high: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BranchPoint {
    pub site: usize,
    pub time: f64,
    pub neighbors: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ObliviousPoint {
    pub site: usize,
    pub time: f64,
    pub u: f64,
}

/// An explored history `H_A`.
#[derive(Debug, Clone, PartialEq)]
pub struct History {
    n: usize,
    horizon: f64,
    roots: VertexSet,
    segments: Vec<Segment>,
    branch_points: Vec<BranchPoint>,
    oblivious_points: Vec<ObliviousPoint>,
    surviving: VertexSet,
    /// `(site, atom index)` pairs, sorted.
    atoms: Vec<(usize, usize)>,
    chi: usize,
    length: f64,
    local_degrees: bool,
}

impl History {
    pub fn roots(&self) -> &VertexSet {
        &self.roots
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn branch_points(&self) -> &[BranchPoint] {
        &self.branch_points
    }

    pub fn oblivious_points(&self) -> &[ObliviousPoint] {
        &self.oblivious_points
    }

    /// Sites where the history reaches time 0.
    pub fn surviving(&self) -> &VertexSet {
        &self.surviving
    }

    pub fn survives(&self) -> bool {
        !self.surviving.is_empty()
    }

    /// Number of branching (spatial) edges.
    pub fn chi(&self) -> usize {
        self.chi
    }

    /// Total temporal length.
    pub fn length(&self) -> f64 {
        self.length
    }

    /// True when θ was taken per site from its own degree (non-regular graph).
    pub fn uses_local_degrees(&self) -> bool {
        self.local_degrees
    }

    pub fn atoms(&self) -> &[(usize, usize)] {
        &self.atoms
    }

    /// Line-based dump: `ROOTS ...`, then `SEG site low high`,
    /// `BR site time` and `OBL site time u` lines.
    pub fn write_dump(&self, mut w: impl Write) -> Result<()> {
        write!(w, "ROOTS")?;
        for r in self.roots.iter() {
            write!(w, " {r}")?;
        }
        writeln!(w)?;
        for s in &self.segments {
            writeln!(w, "SEG {} {:?} {:?}", s.site, s.low, s.high)?;
        }
        for b in &self.branch_points {
            writeln!(w, "BR {} {:?}", b.site, b.time)?;
        }
        for o in &self.oblivious_points {
            writeln!(w, "OBL {} {:?} {:?}", o.site, o.time, o.u)?;
        }
        Ok(())
    }

    pub fn dump_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_dump(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("ascii dump")
    }
}

#[inline]
pub(crate) fn atom_id(seq: &UpdateSequence, v: usize, k: usize) -> usize {
    seq.offset(v) + v + k
}

/// Raw result of a backward exploration over a sequence.
pub(crate) struct Exploration {
    /// Highest entry time per atom id; `NEG_INFINITY` when unvisited.
    pub top: Vec<f64>,
    /// Visited atoms `(site, k)` in discovery order.
    pub visited: Vec<(usize, usize)>,
    /// Branch connections between atom ids.
    pub edges: Vec<(usize, usize)>,
    pub length: f64,
}

impl Exploration {
    pub fn new(seq: &UpdateSequence) -> Self {
        Self {
            top: vec![f64::NEG_INFINITY; seq.atom_count()],
            visited: Vec::new(),
            edges: Vec::new(),
            length: 0.0,
        }
    }

    pub fn is_visited(&self, id: usize) -> bool {
        self.top[id] > f64::NEG_INFINITY
    }

    /// Develop the histories of `roots` from the horizon, sharing atoms
    /// with whatever this exploration already holds.
    pub fn develop(
        &mut self,
        seq: &UpdateSequence,
        rule: &HeatBathRule,
        g: &Graph,
        roots: &[usize],
        cap: f64,
        track_edges: bool,
    ) -> std::result::Result<(), f64> {
        let mut stack: Vec<(usize, usize, f64)> = roots
            .iter()
            .rev()
            .map(|&r| (r, seq.site_len(r), seq.horizon()))
            .collect();
        while let Some((v, k, entry)) = stack.pop() {
            let id = atom_id(seq, v, k);
            let bottom = if k == 0 { 0.0 } else { seq.site_times(v)[k - 1] };
            if self.is_visited(id) {
                if entry > self.top[id] {
                    self.length += entry - self.top[id];
                    self.top[id] = entry;
                }
            } else {
                self.top[id] = entry;
                self.length += entry - bottom;
                self.visited.push((v, k));
                if k > 0 {
                    let e = seq.event(v, k - 1);
                    let nb = g.neighbors(v);
                    if !rule.is_oblivious(nb.len(), e.u) {
                        for &w in nb.iter().rev() {
                            let kw = seq.count_before(w, e.time);
                            if track_edges {
                                self.edges.push((id, atom_id(seq, w, kw)));
                            }
                            stack.push((w, kw, e.time));
                        }
                    }
                }
            }
            if self.length > cap {
                return Err(self.length);
            }
        }
        Ok(())
    }

    /// Package the given atoms (a subset of the visited ones) as a history.
    pub fn history(
        &self,
        seq: &UpdateSequence,
        rule: &HeatBathRule,
        g: &Graph,
        roots: VertexSet,
        atoms: impl IntoIterator<Item = (usize, usize)>,
    ) -> History {
        let mut atoms: Vec<(usize, usize)> = atoms.into_iter().collect();
        atoms.sort_unstable();
        let mut segments = Vec::with_capacity(atoms.len());
        let mut branch_points = Vec::new();
        let mut oblivious_points = Vec::new();
        let mut surviving = Vec::new();
        let mut chi = 0;
        let mut length = 0.0;
        for &(v, k) in &atoms {
            let high = self.top[atom_id(seq, v, k)];
            let low = if k == 0 {
                surviving.push(v);
                0.0
            } else {
                let e = seq.event(v, k - 1);
                let nb = g.neighbors(v);
                if rule.is_oblivious(nb.len(), e.u) {
                    oblivious_points.push(ObliviousPoint {
                        site: v,
                        time: e.time,
                        u: e.u,
                    });
                } else {
                    chi += nb.len();
                    branch_points.push(BranchPoint {
                        site: v,
                        time: e.time,
                        neighbors: nb.to_vec(),
                    });
                }
                e.time
            };
            length += high - low;
            segments.push(Segment { site: v, low, high });
        }
        surviving.dedup();
        History {
            n: seq.n(),
            horizon: seq.horizon(),
            roots,
            segments,
            branch_points,
            oblivious_points,
            surviving: VertexSet::new(surviving, seq.n()).expect("sites in range"),
            atoms,
            chi,
            length,
            local_degrees: rule.uses_local_degrees(),
        }
    }
}

fn check_inputs(seq: &UpdateSequence, g: &Graph) -> Result<()> {
    if seq.n() != g.n() {
        return Err(Error::InvalidArgument(format!(
            "sequence has {} sites, graph {}",
            seq.n(),
            g.n()
        )));
    }
    Ok(())
}

/// Explore `H_A` backward from `A × {horizon}`.
///
/// Fails with [`Error::Supercritical`] (carrying the partial history) once
/// the total explored length exceeds `length_cap`.
pub fn develop_history(
    a: &VertexSet,
    seq: &UpdateSequence,
    beta: f64,
    g: &Graph,
    length_cap: f64,
) -> Result<History> {
    check_inputs(seq, g)?;
    if a.is_empty() {
        return Err(Error::InvalidArgument("history roots must be nonempty".into()));
    }
    if a.as_slice().last().is_some_and(|&v| v >= g.n()) {
        return Err(Error::InvalidArgument("root outside the graph".into()));
    }
    if !(length_cap > 0.0) {
        return Err(Error::InvalidArgument("length cap must be positive".into()));
    }
    let rule = HeatBathRule::new(beta, g)?;
    develop_with_rule(a, seq, &rule, g, length_cap)
}

pub(crate) fn develop_with_rule(
    a: &VertexSet,
    seq: &UpdateSequence,
    rule: &HeatBathRule,
    g: &Graph,
    length_cap: f64,
) -> Result<History> {
    let mut exp = Exploration::new(seq);
    let outcome = exp.develop(seq, rule, g, a.as_slice(), length_cap, false);
    let history = exp.history(seq, rule, g, a.clone(), exp.visited.iter().copied());
    match outcome {
        Ok(()) => Ok(history),
        Err(explored) => Err(Error::Supercritical {
            cap: length_cap,
            explored,
            partial: Some(Box::new(history)),
        }),
    }
}

/// Memoized spins per atom id; 0 marks "not yet resolved".
pub(crate) struct SpinMemo(Vec<Spin>);

impl SpinMemo {
    pub fn new(seq: &UpdateSequence) -> Self {
        Self(vec![0; seq.atom_count()])
    }

    /// Spin held by atom `(v, k)`, resolving everything below it on demand.
    pub fn resolve(
        &mut self,
        seq: &UpdateSequence,
        rule: &HeatBathRule,
        g: &Graph,
        x0: &SpinConfig,
        v: usize,
        k: usize,
    ) -> Spin {
        let start = atom_id(seq, v, k);
        if self.0[start] != 0 {
            return self.0[start];
        }
        let mut stack = vec![(v, k)];
        while let Some(&(v, k)) = stack.last() {
            let id = atom_id(seq, v, k);
            if self.0[id] != 0 {
                stack.pop();
                continue;
            }
            if k == 0 {
                self.0[id] = x0.get(v);
                stack.pop();
                continue;
            }
            let e = seq.event(v, k - 1);
            let nb = g.neighbors(v);
            let deg = nb.len();
            if rule.is_oblivious(deg, e.u) {
                self.0[id] = rule.oblivious_spin(deg, e.u);
                stack.pop();
                continue;
            }
            let mut sigma = 0i32;
            let mut pending = false;
            for &w in nb {
                let kw = seq.count_before(w, e.time);
                match self.0[atom_id(seq, w, kw)] {
                    0 => {
                        pending = true;
                        stack.push((w, kw));
                    }
                    s => sigma += s as i32,
                }
            }
            if !pending {
                self.0[id] = rule.branch_spin(deg, e.u, sigma);
                stack.pop();
            }
        }
        self.0[start]
    }
}

/// Check that `h` was developed from `seq` under `rule` on `g`.
fn verify_history(h: &History, seq: &UpdateSequence, rule: &HeatBathRule, g: &Graph) -> Result<()> {
    let bad = |msg: String| Err(Error::Integrity(msg));
    if h.n != seq.n() || h.n != g.n() {
        return bad(format!("history has {} sites, sequence {}, graph {}", h.n, seq.n(), g.n()));
    }
    if h.horizon != seq.horizon() {
        return bad(format!("history horizon {} vs sequence {}", h.horizon, seq.horizon()));
    }
    for &(v, k) in &h.atoms {
        if k > seq.site_len(v) {
            return bad(format!("atom {k} at site {v} does not exist"));
        }
    }
    let has = |v: usize, k: usize| h.atoms.binary_search(&(v, k)).is_ok();
    for r in h.roots.iter() {
        if !has(r, seq.site_len(r)) {
            return bad(format!("root {r} has no top atom"));
        }
    }
    for b in &h.branch_points {
        let k = seq.count_before(b.site, b.time);
        if k >= seq.site_len(b.site) || seq.site_times(b.site)[k] != b.time {
            return bad(format!("no update at site {} time {}", b.site, b.time));
        }
        let e = seq.event(b.site, k);
        if rule.is_oblivious(g.deg(b.site), e.u) {
            return bad(format!("update at site {} time {} is oblivious", b.site, b.time));
        }
        if b.neighbors != g.neighbors(b.site) {
            return bad(format!("branch neighbors at site {} differ from the graph", b.site));
        }
        for &w in &b.neighbors {
            if !has(w, seq.count_before(w, b.time)) {
                return bad(format!("branch at site {} time {} misses neighbor {w}", b.site, b.time));
            }
        }
    }
    for o in &h.oblivious_points {
        let k = seq.count_before(o.site, o.time);
        if k >= seq.site_len(o.site) || seq.site_times(o.site)[k] != o.time {
            return bad(format!("no update at site {} time {}", o.site, o.time));
        }
        let e = seq.event(o.site, k);
        if e.u != o.u || !rule.is_oblivious(g.deg(o.site), e.u) {
            return bad(format!("oblivious point at site {} time {} mismatched", o.site, o.time));
        }
    }
    if h.branch_points.len() + h.oblivious_points.len() + h.surviving.len() > h.atoms.len() {
        return bad("more endpoints than atoms".into());
    }
    Ok(())
}

/// Final spins at the roots of `h`, evaluated backward from the update marks
/// in `h` and the initial values `x0` where the history touches time 0.
pub fn reconstruct(
    h: &History,
    seq: &UpdateSequence,
    beta: f64,
    g: &Graph,
    x0: &SpinConfig,
) -> Result<Vec<Spin>> {
    check_inputs(seq, g)?;
    if x0.len() != g.n() {
        return Err(Error::InvalidArgument("x0 size mismatch".into()));
    }
    let rule = HeatBathRule::new(beta, g)?;
    reconstruct_with_rule(h, seq, &rule, g, x0)
}

pub(crate) fn reconstruct_with_rule(
    h: &History,
    seq: &UpdateSequence,
    rule: &HeatBathRule,
    g: &Graph,
    x0: &SpinConfig,
) -> Result<Vec<Spin>> {
    verify_history(h, seq, rule, g)?;
    let mut memo = SpinMemo::new(seq);
    Ok(h.roots
        .iter()
        .map(|r| memo.resolve(seq, rule, g, x0, r, seq.site_len(r)))
        .collect())
}

/// Exact sample from the Ising measure by coupling from the past.
///
/// Time blocks of length `horizon_step`, each with its own derived seed, are
/// stacked below the present; the stack is doubled until the joint history
/// of all sites dies out before reaching its bottom. Deeper blocks are only
/// ever appended, so earlier blocks are reused unchanged.
pub fn perfect_sample(g: &Graph, beta: f64, seed: u64, horizon_step: f64) -> Result<SpinConfig> {
    perfect_sample_capped(
        g,
        beta,
        seed,
        horizon_step,
        DEFAULT_LENGTH_CAP_PER_SITE * g.n() as f64,
    )
}

pub fn perfect_sample_capped(
    g: &Graph,
    beta: f64,
    seed: u64,
    horizon_step: f64,
    length_cap: f64,
) -> Result<SpinConfig> {
    if !(horizon_step > 0.0 && horizon_step.is_finite()) {
        return Err(Error::InvalidArgument("horizon step must be positive".into()));
    }
    let rule = HeatBathRule::new(beta, g)?;
    let n = g.n();
    let roots: Vec<usize> = (0..n).collect();
    let mut blocks: Vec<UpdateSequence> = Vec::new();
    let mut depth = 1usize;
    loop {
        while blocks.len() < depth {
            let block_seed = seeding::derive(seed, &[tag::PERFECT, tag::BLOCK, blocks.len() as u64]);
            blocks.push(UpdateSequence::generate(n, horizon_step, block_seed)?);
        }
        let seq = UpdateSequence::stack_blocks(&blocks[..depth], horizon_step)?;
        let mut exp = Exploration::new(&seq);
        if let Err(explored) = exp.develop(&seq, &rule, g, &roots, length_cap, false) {
            return Err(Error::Supercritical {
                cap: length_cap,
                explored,
                partial: None,
            });
        }
        let reaches_bottom = (0..n).any(|v| exp.is_visited(atom_id(&seq, v, 0)));
        if !reaches_bottom {
            // The initial state is never read; any x0 gives the same result.
            let x0 = SpinConfig::all_plus(n);
            let mut memo = SpinMemo::new(&seq);
            let spins = (0..n)
                .map(|v| memo.resolve(&seq, &rule, g, &x0, v, seq.site_len(v)))
                .collect();
            return SpinConfig::new(spins);
        }
        depth *= 2;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forward::run_forward;
    use crate::update_stream::UpdateEvent;

    fn cap() -> f64 {
        1e9
    }

    #[test]
    fn empty_sequence_history() {
        let g = Graph::cycle(5).unwrap();
        let seq = UpdateSequence::generate(5, 0.0, 0).unwrap();
        let a = VertexSet::new(vec![1, 3], 5).unwrap();
        let h = develop_history(&a, &seq, 0.3, &g, cap()).unwrap();
        assert_eq!(h.segments().len(), 2);
        assert_eq!(h.surviving(), &a);
        assert_eq!(h.chi(), 0);
        assert_eq!(h.length(), 0.0);
    }

    #[test]
    fn beta_zero_never_branches() {
        let g = Graph::cycle(12).unwrap();
        let seq = UpdateSequence::generate(12, 4.0, 11).unwrap();
        let h = develop_history(&VertexSet::all(12), &seq, 0.0, &g, cap()).unwrap();
        assert!(h.branch_points().is_empty());
        // Every branch stops at the first update it meets.
        for v in 0..12 {
            let last = seq.site_times(v).last().copied();
            let seg = h.segments().iter().find(|s| s.site == v).unwrap();
            assert_eq!(seg.low, last.unwrap_or(0.0));
            assert_eq!(seg.high, 4.0);
        }
    }

    #[test]
    fn lone_root_without_updates_reads_initial_state() {
        let g = Graph::cycle(4).unwrap();
        let seq = UpdateSequence::generate(4, 0.0, 0).unwrap();
        let h = develop_history(&VertexSet::singleton(2), &seq, 0.2, &g, cap()).unwrap();
        let x0 = SpinConfig::new(vec![1, 1, -1, 1]).unwrap();
        assert_eq!(reconstruct(&h, &seq, 0.2, &g, &x0).unwrap(), vec![-1]);
    }

    #[test]
    fn oblivious_history_ignores_initial_state() {
        let g = Graph::cycle(6).unwrap();
        let seq = UpdateSequence::generate(6, 3.0, 2).unwrap();
        let a = VertexSet::all(6);
        let h = develop_history(&a, &seq, 0.0, &g, cap()).unwrap();
        if !h.survives() {
            let plus = reconstruct(&h, &seq, 0.0, &g, &SpinConfig::all_plus(6)).unwrap();
            let minus = reconstruct(&h, &seq, 0.0, &g, &SpinConfig::all_minus(6)).unwrap();
            assert_eq!(plus, minus);
        }
        // A hand-built case where every root ends obliviously.
        let events: Vec<UpdateEvent> = (0..6)
            .map(|v| UpdateEvent { site: v, time: 1.0 + v as f64 * 0.1, u: 0.01 * v as f64 })
            .collect();
        let seq = UpdateSequence::from_events(6, 3.0, 0, &events).unwrap();
        let h = develop_history(&a, &seq, 0.1, &g, cap()).unwrap();
        assert!(!h.survives());
        let plus = reconstruct(&h, &seq, 0.1, &g, &SpinConfig::all_plus(6)).unwrap();
        let minus = reconstruct(&h, &seq, 0.1, &g, &SpinConfig::all_minus(6)).unwrap();
        assert_eq!(plus, minus);
    }

    #[test]
    fn matches_forward_on_small_instances() {
        let g = Graph::cycle(10).unwrap();
        for seed in 0..50 {
            let seq = UpdateSequence::generate(10, 3.0, seed).unwrap();
            let x0 = SpinConfig::from_index((seed as usize * 7919) % 1024, 10);
            let fwd = run_forward(&x0, &seq, 0.25, &g).unwrap();
            let h = develop_history(&VertexSet::all(10), &seq, 0.25, &g, cap()).unwrap();
            let back = reconstruct(&h, &seq, 0.25, &g, &x0).unwrap();
            assert_eq!(fwd.spins(), &back[..], "seed {seed}");
        }
    }

    #[test]
    fn length_cap_surfaces_partial_history() {
        let g = Graph::torus(4, 2).unwrap();
        let seq = UpdateSequence::generate(16, 10.0, 1).unwrap();
        match develop_history(&VertexSet::all(16), &seq, 2.0, &g, 5.0) {
            Err(Error::Supercritical { partial: Some(h), explored, .. }) => {
                assert!(explored > 5.0);
                assert!(!h.segments().is_empty());
            }
            other => panic!("expected supercritical error, got {other:?}"),
        }
    }

    #[test]
    fn mismatched_history_rejected() {
        let g = Graph::cycle(8).unwrap();
        let seq = UpdateSequence::generate(8, 3.0, 1).unwrap();
        let other = UpdateSequence::generate(8, 3.0, 2).unwrap();
        let h = develop_history(&VertexSet::all(8), &seq, 0.3, &g, cap()).unwrap();
        let x0 = SpinConfig::all_plus(8);
        assert!(matches!(
            reconstruct(&h, &other, 0.3, &g, &x0),
            Err(Error::Integrity(_))
        ));
        let longer = UpdateSequence::generate(8, 4.0, 1).unwrap();
        assert!(matches!(
            reconstruct(&h, &longer, 0.3, &g, &x0),
            Err(Error::Integrity(_))
        ));
    }

    #[test]
    fn history_invariants() {
        let g = Graph::torus(4, 2).unwrap();
        let seq = UpdateSequence::generate(16, 4.0, 9).unwrap();
        let h = develop_history(&VertexSet::new(vec![0, 5], 16).unwrap(), &seq, 0.15, &g, cap()).unwrap();
        assert_eq!(h.chi(), 4 * h.branch_points().len());
        let total: f64 = h.segments().iter().map(|s| s.high - s.low).sum();
        assert!((total - h.length()).abs() < 1e-9);
        for v in 0..16 {
            let mut segs: Vec<&Segment> = h.segments().iter().filter(|s| s.site == v).collect();
            segs.sort_by(|a, b| a.low.total_cmp(&b.low));
            assert!(segs.windows(2).all(|w| w[0].high <= w[1].low));
        }
        for s in h.segments() {
            let at_zero = s.low == 0.0;
            let at_point = h.branch_points().iter().any(|b| b.site == s.site && b.time == s.low)
                || h.oblivious_points().iter().any(|o| o.site == s.site && o.time == s.low);
            assert!(at_zero || at_point);
            assert_eq!(at_zero, h.surviving().contains(s.site) && s.low == 0.0);
        }
    }

    #[test]
    fn dump_format() {
        let g = Graph::cycle(3).unwrap();
        let seq = UpdateSequence::from_events(
            3,
            2.0,
            0,
            &[
                UpdateEvent { site: 0, time: 1.5, u: 0.99 },
                UpdateEvent { site: 1, time: 1.0, u: 0.05 },
            ],
        )
        .unwrap();
        let h = develop_history(&VertexSet::singleton(0), &seq, 0.3, &g, cap()).unwrap();
        let dump = h.dump_string();
        let expected = "ROOTS 0\nSEG 0 1.5 2.0\nSEG 1 1.0 1.5\nSEG 2 0.0 1.5\nBR 0 1.5\nOBL 1 1.0 0.05\n";
        assert_eq!(dump, expected);
    }

    #[test]
    fn perfect_sample_is_deterministic() {
        let g = Graph::cycle(8).unwrap();
        let a = perfect_sample(&g, 0.3, 42, 1.0).unwrap();
        let b = perfect_sample(&g, 0.3, 42, 1.0).unwrap();
        assert_eq!(a, b);
        assert!(perfect_sample(&g, 0.3, 42, 0.0).is_err());
    }

    #[test]
    fn perfect_sample_guard_trips_when_supercritical() {
        let g = Graph::torus(4, 2).unwrap();
        let r = perfect_sample_capped(&g, 3.0, 1, 1.0, 200.0);
        assert!(matches!(r, Err(Error::Supercritical { .. })));
    }
}
