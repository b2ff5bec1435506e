//! The random update sequence `(site, time, u)` shared by the forward and
//! backward simulations.
//!
//! Each site owns an independent rate-1 Poisson clock on `(0, horizon]`
//! driven by its own ChaCha8 stream (see [`crate::seeding::site_rng`]).
//! Events are stored site-major in compressed form: the events of site `v`
//! occupy `offsets[v]..offsets[v + 1]`, sorted by time.

use std::io::{BufRead, Read, Write};

use rand::Rng;
use rand_distr::Exp1;

use crate::error::{Error, Result};
use crate::seeding;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UpdateEvent {
    pub site: usize,
    pub time: f64,
    pub u: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UpdateSequence {
    n: usize,
    horizon: f64,
    seed: u64,
    offsets: Vec<usize>,
    times: Vec<f64>,
    marks: Vec<f64>,
}

impl UpdateSequence {
    /// Generate the sequence for `n` sites on `(0, horizon]`.
    ///
    /// The per-site streams do not depend on `n` or on the horizon, so a
    /// longer horizon extends a shorter one event for event.
    pub fn generate(n: usize, horizon: f64, seed: u64) -> Result<Self> {
        if !(horizon >= 0.0) || !horizon.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "horizon must be finite and nonnegative, got {horizon}"
            )));
        }
        let expected = (n as f64 * horizon * 1.1) as usize + 16;
        let mut offsets = Vec::with_capacity(n + 1);
        let mut times = Vec::with_capacity(expected);
        let mut marks = Vec::with_capacity(expected);
        offsets.push(0);
        for v in 0..n {
            if horizon > 0.0 {
                let mut rng = seeding::site_rng(seed, v);
                let mut t = 0.0f64;
                loop {
                    let dt: f64 = rng.sample(Exp1);
                    if dt <= 0.0 {
                        continue;
                    }
                    t += dt;
                    if t > horizon {
                        break;
                    }
                    times.push(t);
                    marks.push(rng.random::<f64>());
                }
            }
            offsets.push(times.len());
        }
        Ok(Self {
            n,
            horizon,
            seed,
            offsets,
            times,
            marks,
        })
    }

    /// Build a sequence from explicit events (any order). Used for replay
    /// and hand-made test fixtures.
    pub fn from_events(n: usize, horizon: f64, seed: u64, events: &[UpdateEvent]) -> Result<Self> {
        if !(horizon >= 0.0) || !horizon.is_finite() {
            return Err(Error::InvalidArgument(format!("bad horizon {horizon}")));
        }
        let mut sorted = events.to_vec();
        for e in &sorted {
            if e.site >= n {
                return Err(Error::InvalidArgument(format!("event site {} outside 0..{n}", e.site)));
            }
            if !(e.time > 0.0 && e.time <= horizon) {
                return Err(Error::InvalidArgument(format!(
                    "event time {} outside (0, {horizon}]",
                    e.time
                )));
            }
            if !(0.0..1.0).contains(&e.u) {
                return Err(Error::InvalidArgument(format!("event mark {} outside [0, 1)", e.u)));
            }
        }
        sorted.sort_by(|a, b| a.site.cmp(&b.site).then(a.time.total_cmp(&b.time)));
        for w in sorted.windows(2) {
            if w[0].site == w[1].site && w[0].time >= w[1].time {
                return Err(Error::InvalidArgument(format!(
                    "site {} has two events at time {}",
                    w[0].site, w[0].time
                )));
            }
        }
        let mut offsets = vec![0usize; n + 1];
        for e in &sorted {
            offsets[e.site + 1] += 1;
        }
        for v in 0..n {
            offsets[v + 1] += offsets[v];
        }
        Ok(Self {
            n,
            horizon,
            seed,
            offsets,
            times: sorted.iter().map(|e| e.time).collect(),
            marks: sorted.iter().map(|e| e.u).collect(),
        })
    }

    /// Stack time blocks: `blocks[0]` becomes the top slab
    /// `((k-1)·step, k·step]`, `blocks[k-1]` the bottom `(0, step]`.
    /// Every block must have horizon `step` and the same site count.
    pub fn stack_blocks(blocks: &[UpdateSequence], step: f64) -> Result<Self> {
        let Some(first) = blocks.first() else {
            return Err(Error::InvalidArgument("no blocks to stack".into()));
        };
        let n = first.n;
        if blocks.iter().any(|b| b.n != n || b.horizon != step) {
            return Err(Error::InvalidArgument("blocks disagree on size or step".into()));
        }
        let k = blocks.len();
        let total: usize = blocks.iter().map(|b| b.times.len()).sum();
        let mut offsets = Vec::with_capacity(n + 1);
        let mut times = Vec::with_capacity(total);
        let mut marks = Vec::with_capacity(total);
        offsets.push(0);
        for v in 0..n {
            for (depth, block) in blocks.iter().enumerate().rev() {
                let base = (k - 1 - depth) as f64 * step;
                let r = block.range(v);
                times.extend(block.times[r.clone()].iter().map(|&t| base + t));
                marks.extend_from_slice(&block.marks[r]);
            }
            offsets.push(times.len());
        }
        Ok(Self {
            n,
            horizon: k as f64 * step,
            seed: first.seed,
            offsets,
            times,
            marks,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn total_events(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    #[inline]
    fn range(&self, v: usize) -> std::ops::Range<usize> {
        self.offsets[v]..self.offsets[v + 1]
    }

    /// Number of events at site `v`.
    #[inline]
    pub fn site_len(&self, v: usize) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    /// Event times at site `v`, increasing.
    #[inline]
    pub fn site_times(&self, v: usize) -> &[f64] {
        &self.times[self.range(v)]
    }

    #[inline]
    pub fn site_marks(&self, v: usize) -> &[f64] {
        &self.marks[self.range(v)]
    }

    /// The `k`-th event of site `v`.
    #[inline]
    pub fn event(&self, v: usize, k: usize) -> UpdateEvent {
        let i = self.offsets[v] + k;
        UpdateEvent {
            site: v,
            time: self.times[i],
            u: self.marks[i],
        }
    }

    pub fn site_events(&self, v: usize) -> impl Iterator<Item = UpdateEvent> + '_ {
        (0..self.site_len(v)).map(move |k| self.event(v, k))
    }

    pub fn events(&self) -> impl Iterator<Item = UpdateEvent> + '_ {
        (0..self.n).flat_map(move |v| self.site_events(v))
    }

    /// Number of events at `v` with time strictly below `t`.
    #[inline]
    pub fn count_before(&self, v: usize, t: f64) -> usize {
        self.site_times(v).partition_point(|&s| s < t)
    }

    /// Offset of site `v` in the flat event arrays. Site `v`'s atoms (the
    /// intervals between consecutive updates) are numbered
    /// `offset(v) + v + k` for `k` in `0..=site_len(v)`.
    #[inline]
    pub(crate) fn offset(&self, v: usize) -> usize {
        self.offsets[v]
    }

    pub(crate) fn atom_count(&self) -> usize {
        self.times.len() + self.n
    }

    /// Latest update at `v` strictly before `t`. An update at exactly `t` is
    /// not returned: it belongs to the past of any later time only.
    pub fn latest_update_before(&self, v: usize, t: f64) -> Result<Option<UpdateEvent>> {
        if v >= self.n {
            return Err(Error::InvalidArgument(format!("site {v} outside 0..{}", self.n)));
        }
        if !(0.0..=self.horizon).contains(&t) {
            return Err(Error::InvalidArgument(format!(
                "time {t} outside [0, {}]",
                self.horizon
            )));
        }
        let k = self.count_before(v, t);
        Ok((k > 0).then(|| self.event(v, k - 1)))
    }

    /// All events in global time order as `(site, index within site)`;
    /// simultaneous events are ordered by site id.
    pub fn global_order(&self) -> Vec<(u32, u32)> {
        let mut keyed: Vec<(u64, u32, u32)> = Vec::with_capacity(self.times.len());
        for v in 0..self.n {
            for (k, &t) in self.site_times(v).iter().enumerate() {
                // Positive floats order like their bit patterns.
                keyed.push((t.to_bits(), v as u32, k as u32));
            }
        }
        keyed.sort_unstable();
        keyed.into_iter().map(|(_, v, k)| (v, k)).collect()
    }

    /// Line-based dump: a header then one `site time u` line per event.
    pub fn write_text(&self, mut w: impl Write) -> Result<()> {
        writeln!(w, "# n={} horizon={:?} seed={}", self.n, self.horizon, self.seed)?;
        for e in self.events() {
            writeln!(w, "{} {:?} {:?}", e.site, e.time, e.u)?;
        }
        Ok(())
    }

    pub fn read_text(r: impl BufRead) -> Result<Self> {
        let mut lines = r.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::InvalidArgument("empty sequence dump".into()))??;
        let mut n = None;
        let mut horizon = None;
        let mut seed = 0u64;
        for field in header.trim_start_matches('#').split_whitespace() {
            let bad = || Error::InvalidArgument(format!("bad header field {field}"));
            match field.split_once('=') {
                Some(("n", x)) => n = Some(x.parse().map_err(|_| bad())?),
                Some(("horizon", x)) => horizon = Some(x.parse().map_err(|_| bad())?),
                Some(("seed", x)) => seed = x.parse().map_err(|_| bad())?,
                _ => return Err(bad()),
            }
        }
        let (Some(n), Some(horizon)) = (n, horizon) else {
            return Err(Error::InvalidArgument("header lacks n or horizon".into()));
        };
        let mut events = Vec::new();
        for line in lines {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut it = line.split_whitespace();
            let bad = || Error::InvalidArgument(format!("bad event line `{line}`"));
            let site = it.next().and_then(|x| x.parse().ok()).ok_or_else(bad)?;
            let time = it.next().and_then(|x| x.parse().ok()).ok_or_else(bad)?;
            let u = it.next().and_then(|x| x.parse().ok()).ok_or_else(bad)?;
            events.push(UpdateEvent { site, time, u });
        }
        Self::from_events(n, horizon, seed, &events)
    }

    const MAGIC: &'static [u8; 4] = b"IPUS";
    const VERSION: u32 = 1;

    /// Flat little-endian binary dump: magic, version, n, horizon, seed,
    /// event count, then `(site: u32, time: f64, u: f64)` records.
    pub fn write_binary(&self, mut w: impl Write) -> Result<()> {
        w.write_all(Self::MAGIC)?;
        w.write_all(&Self::VERSION.to_le_bytes())?;
        w.write_all(&(self.n as u64).to_le_bytes())?;
        w.write_all(&self.horizon.to_le_bytes())?;
        w.write_all(&self.seed.to_le_bytes())?;
        w.write_all(&(self.times.len() as u64).to_le_bytes())?;
        for e in self.events() {
            w.write_all(&(e.site as u32).to_le_bytes())?;
            w.write_all(&e.time.to_le_bytes())?;
            w.write_all(&e.u.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_binary(mut r: impl Read) -> Result<Self> {
        fn take<const N: usize>(r: &mut impl Read) -> Result<[u8; N]> {
            let mut b = [0u8; N];
            r.read_exact(&mut b)?;
            Ok(b)
        }
        if &take::<4>(&mut r)? != Self::MAGIC {
            return Err(Error::InvalidArgument("not an update sequence dump".into()));
        }
        let version = u32::from_le_bytes(take(&mut r)?);
        if version != Self::VERSION {
            return Err(Error::InvalidArgument(format!("unsupported dump version {version}")));
        }
        let n = u64::from_le_bytes(take(&mut r)?) as usize;
        let horizon = f64::from_le_bytes(take(&mut r)?);
        let seed = u64::from_le_bytes(take(&mut r)?);
        let count = u64::from_le_bytes(take(&mut r)?) as usize;
        let mut events = Vec::with_capacity(count.min(1 << 24));
        for _ in 0..count {
            let site = u32::from_le_bytes(take(&mut r)?) as usize;
            let time = f64::from_le_bytes(take(&mut r)?);
            let u = f64::from_le_bytes(take(&mut r)?);
            events.push(UpdateEvent { site, time, u });
        }
        Self::from_events(n, horizon, seed, &events)
    }
}
