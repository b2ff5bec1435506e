//! Minimum number of vertices of a connected subgraph containing a terminal set.
//!
//! Exact for up to [`EXACT_TERMINAL_LIMIT`] terminals (Dreyfus–Wagner over
//! terminal subsets, unit edge weights); larger sets get the greedy
//! nearest-terminal tree, which is an upper bound. Cycles use the
//! largest-gap formula, exact for any terminal count.

use std::collections::VecDeque;

use serde::Serialize;

use super::{Graph, GraphSpec, VertexSet};
use crate::error::{Error, Result};

pub const EXACT_TERMINAL_LIMIT: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SteinerWidth {
    /// Vertex count of the connecting subgraph.
    pub size: usize,
    /// `false` when `size` is only an upper bound.
    pub exact: bool,
}

pub fn steiner_width(g: &Graph, terminals: &VertexSet) -> Result<SteinerWidth> {
    let a = terminals.as_slice();
    if a.is_empty() {
        return Err(Error::InvalidArgument("steiner width of an empty set".into()));
    }
    if a.len() == 1 {
        return Ok(SteinerWidth {
            size: 1,
            exact: true,
        });
    }
    if let GraphSpec::Cycle { n } = *g.spec() {
        // The complement of the best arc is the largest gap between terminals.
        let gap = a
            .windows(2)
            .map(|w| w[1] - w[0])
            .chain(std::iter::once(a[0] + n - a[a.len() - 1]))
            .max()
            .unwrap_or(0);
        return Ok(SteinerWidth {
            size: n - gap + 1,
            exact: true,
        });
    }
    let upper = greedy_tree_size(g, a)?;
    if a.len() > EXACT_TERMINAL_LIMIT {
        return Ok(SteinerWidth {
            size: upper,
            exact: false,
        });
    }
    if upper == a.len() {
        // A itself is connected.
        return Ok(SteinerWidth {
            size: upper,
            exact: true,
        });
    }
    Ok(SteinerWidth {
        size: dreyfus_wagner(g, a, upper),
        exact: true,
    })
}

/// Grow a tree from the first terminal, attaching the nearest outside
/// terminal by a shortest path each round.
fn greedy_tree_size(g: &Graph, a: &[usize]) -> Result<usize> {
    let n = g.n();
    let mut in_tree = vec![false; n];
    let mut is_terminal = vec![false; n];
    for &t in a {
        is_terminal[t] = true;
    }
    in_tree[a[0]] = true;
    let mut size = 1;
    let mut remaining = a.len() - 1;
    let mut parent = vec![usize::MAX; n];
    let mut seen = vec![false; n];
    let mut queue = VecDeque::new();
    while remaining > 0 {
        seen.iter_mut().for_each(|s| *s = false);
        queue.clear();
        for v in 0..n {
            if in_tree[v] {
                seen[v] = true;
                queue.push_back(v);
            }
        }
        let mut hit = None;
        'bfs: while let Some(u) = queue.pop_front() {
            for &w in g.neighbors(u) {
                if !seen[w] {
                    seen[w] = true;
                    parent[w] = u;
                    if is_terminal[w] {
                        hit = Some(w);
                        break 'bfs;
                    }
                    queue.push_back(w);
                }
            }
        }
        let Some(mut v) = hit else {
            return Err(Error::InvalidArgument(
                "terminals lie in different connected components".into(),
            ));
        };
        while !in_tree[v] {
            in_tree[v] = true;
            size += 1;
            if is_terminal[v] {
                remaining -= 1;
            }
            v = parent[v];
        }
    }
    Ok(size)
}

/// Exact Steiner tree vertex count. Every vertex of an optimal tree lies
/// within `upper - 1` hops of any terminal, so the search is confined to that
/// ball around `a[0]`.
fn dreyfus_wagner(g: &Graph, a: &[usize], upper: usize) -> usize {
    let dist0 = g.bfs_distances(a[0]);
    let region: Vec<usize> = (0..g.n()).filter(|&v| dist0[v] < upper).collect();
    let mut local = vec![usize::MAX; g.n()];
    for (i, &v) in region.iter().enumerate() {
        local[v] = i;
    }
    let adj: Vec<Vec<usize>> = region
        .iter()
        .map(|&v| {
            g.neighbors(v)
                .iter()
                .filter_map(|&w| (local[w] != usize::MAX).then_some(local[w]))
                .collect()
        })
        .collect();
    let m = region.len();
    let k = a.len();
    let full = (1usize << k) - 1;
    const INF: u32 = u32::MAX / 4;
    // dp[mask * m + v]: edges of a cheapest tree spanning terminals(mask) ∪ {v}.
    let mut dp = vec![INF; (full + 1) * m];
    for (i, &t) in a.iter().enumerate() {
        let row = &mut dp[(1 << i) * m..(1 << i) * m + m];
        row[local[t]] = 0;
        relax(&adj, row);
    }
    for mask in 1..=full {
        if mask.count_ones() < 2 {
            continue;
        }
        let mut row = vec![INF; m];
        // Enumerate each unordered split once by requiring the low bit in `sub`.
        let low = mask & mask.wrapping_neg();
        let mut sub = (mask - 1) & mask;
        while sub > 0 {
            if sub & low != 0 {
                let other = mask ^ sub;
                let (ra, rb) = (sub * m, other * m);
                for v in 0..m {
                    let c = dp[ra + v] + dp[rb + v];
                    if c < row[v] {
                        row[v] = c;
                    }
                }
            }
            sub = (sub - 1) & mask;
        }
        relax(&adj, &mut row);
        dp[mask * m..mask * m + m].copy_from_slice(&row);
    }
    let best = dp[full * m..].iter().copied().min().unwrap_or(INF);
    best as usize + 1
}

/// Shortest-path closure of `row` under unit edge weights (bucketed Dijkstra).
fn relax(adj: &[Vec<usize>], row: &mut [u32]) {
    let finite: Vec<u32> = row.iter().copied().filter(|&c| c < u32::MAX / 4).collect();
    let Some(&max0) = finite.iter().max() else {
        return;
    };
    let min0 = *finite.iter().min().unwrap();
    let mut buckets: Vec<Vec<usize>> = vec![Vec::new(); (max0 - min0) as usize + 1];
    for (v, &c) in row.iter().enumerate() {
        if c < u32::MAX / 4 {
            buckets[(c - min0) as usize].push(v);
        }
    }
    let mut level = 0;
    while level < buckets.len() {
        let mut i = 0;
        while i < buckets[level].len() {
            let v = buckets[level][i];
            i += 1;
            let c = min0 + level as u32;
            if row[v] != c {
                continue;
            }
            for &w in &adj[v] {
                if c + 1 < row[w] {
                    row[w] = c + 1;
                    let b = level + 1;
                    if b >= buckets.len() {
                        buckets.push(Vec::new());
                    }
                    buckets[b].push(w);
                }
            }
        }
        level += 1;
    }
}
