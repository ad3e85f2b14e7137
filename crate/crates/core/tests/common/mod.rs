//! Independent oracles for the integration tests. Nothing here calls the
//! library's distance tables, field arithmetic or gallery enumeration.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use ngon_core::{Flag, IncidenceStructure, VertexRef};

pub const INF: u32 = u32::MAX;

/// All-pairs distances by Floyd-Warshall over the flag list.
pub struct Metric {
    pub points: usize,
    pub lines: usize,
    pub d: Vec<Vec<u32>>,
    pub adj: Vec<Vec<usize>>,
}

impl Metric {
    pub fn new(s: &IncidenceStructure) -> Metric {
        let (points, lines) = (s.point_count(), s.line_count());
        let n = points + lines;
        let mut d = vec![vec![INF; n]; n];
        let mut adj = vec![Vec::new(); n];
        for (i, row) in d.iter_mut().enumerate() {
            row[i] = 0;
        }
        for f in s.flags() {
            let (a, b) = (f.point, points + f.line);
            d[a][b] = 1;
            d[b][a] = 1;
            adj[a].push(b);
            adj[b].push(a);
        }
        for k in 0..n {
            for i in 0..n {
                if d[i][k] == INF {
                    continue;
                }
                for j in 0..n {
                    if d[k][j] != INF && d[i][k] + d[k][j] < d[i][j] {
                        d[i][j] = d[i][k] + d[k][j];
                    }
                }
            }
        }
        Metric {
            points,
            lines,
            d,
            adj,
        }
    }

    pub fn id(&self, v: VertexRef) -> usize {
        if v.is_point() {
            v.index
        } else {
            self.points + v.index
        }
    }

    pub fn vertex(&self, i: usize) -> VertexRef {
        if i < self.points {
            VertexRef::point(i)
        } else {
            VertexRef::line(i - self.points)
        }
    }

    pub fn dist(&self, a: VertexRef, b: VertexRef) -> u32 {
        self.d[self.id(a)][self.id(b)]
    }

    pub fn diameter(&self) -> u32 {
        self.d.iter().flatten().copied().max().unwrap_or(0)
    }

    /// Shortest cycle length: for each edge (a, b), removing it and measuring
    /// the remaining a-b distance by BFS.
    pub fn girth(&self) -> u32 {
        let n = self.adj.len();
        let mut best = INF;
        for a in 0..n {
            for &b in &self.adj[a] {
                if a > b {
                    continue;
                }
                let mut dist = vec![INF; n];
                dist[a] = 0;
                let mut queue = std::collections::VecDeque::from([a]);
                while let Some(x) = queue.pop_front() {
                    for &y in &self.adj[x] {
                        if (x == a && y == b) || (x == b && y == a) || dist[y] != INF {
                            continue;
                        }
                        dist[y] = dist[x] + 1;
                        queue.push_back(y);
                    }
                }
                if dist[b] != INF {
                    best = best.min(dist[b] + 1);
                }
            }
        }
        best
    }

    pub fn thick(&self) -> bool {
        self.adj.iter().all(|a| a.len() >= 3)
    }

    /// The neighbor of `y` at distance k-1 from `x`, when `d(x, y) = k` and it is unique.
    pub fn f(&self, x: VertexRef, y: VertexRef) -> Option<VertexRef> {
        let (xi, yi) = (self.id(x), self.id(y));
        let k = self.d[xi][yi];
        if k == 0 || k == INF {
            return None;
        }
        let cands: Vec<usize> = self.adj[yi]
            .iter()
            .copied()
            .filter(|&w| self.d[xi][w] == k - 1)
            .collect();
        (cands.len() == 1).then(|| self.vertex(cands[0]))
    }

    pub fn neighbors(&self, v: VertexRef) -> Vec<VertexRef> {
        let mut out: Vec<VertexRef> = self.adj[self.id(v)].iter().map(|&i| self.vertex(i)).collect();
        out.sort_unstable();
        out
    }

    pub fn vertices(&self) -> Vec<VertexRef> {
        (0..self.adj.len()).map(|i| self.vertex(i)).collect()
    }
}

/// The thick + girth 2n + diameter n criterion, from the oracle metric.
pub fn graph_says_generalized(m: &Metric, n: u32) -> bool {
    m.thick() && m.girth() == 2 * n && m.diameter() == n
}

fn vectors(q: u32, dim: usize) -> Vec<Vec<u32>> {
    let mut out = vec![Vec::new()];
    for _ in 0..dim {
        out = out
            .into_iter()
            .flat_map(|v: Vec<u32>| {
                (0..q).map(move |c| {
                    let mut v = v.clone();
                    v.push(c);
                    v
                })
            })
            .collect();
    }
    out
}

fn span(q: u32, basis: &[Vec<u32>]) -> BTreeSet<Vec<u32>> {
    let dim = basis[0].len();
    let mut out = BTreeSet::new();
    for coeffs in vectors(q, basis.len()) {
        let v: Vec<u32> = (0..dim)
            .map(|i| basis.iter().zip(&coeffs).map(|(b, c)| b[i] * c).sum::<u32>() % q)
            .collect();
        out.insert(v);
    }
    out
}

/// (points, lines, flags) of the geometry of 1- and 2-spaces of GF(q)^dim
/// whose 2-spaces satisfy `keep`, counted by brute-force spans.
fn subspace_counts(q: u32, dim: usize, keep: impl Fn(&[u32], &[u32]) -> bool) -> (usize, usize, usize) {
    let nonzero: Vec<Vec<u32>> = vectors(q, dim).into_iter().filter(|v| v.iter().any(|&c| c != 0)).collect();
    let points: BTreeSet<BTreeSet<Vec<u32>>> = nonzero.iter().map(|v| span(q, std::slice::from_ref(v))).collect();
    let mut lines: BTreeSet<BTreeSet<Vec<u32>>> = BTreeSet::new();
    for a in &nonzero {
        for b in &nonzero {
            if keep(a, b) {
                let sp = span(q, &[a.clone(), b.clone()]);
                if sp.len() == (q * q) as usize {
                    lines.insert(sp);
                }
            }
        }
    }
    let flags = lines
        .iter()
        .map(|l| points.iter().filter(|p| p.is_subset(l)).count())
        .sum();
    (points.len(), lines.len(), flags)
}

pub fn plane_counts(q: u32) -> (usize, usize, usize) {
    subspace_counts(q, 3, |_, _| true)
}

pub fn quadrangle_counts(q: u32) -> (usize, usize, usize) {
    subspace_counts(q, 4, |x, y| {
        let form = (x[0] * y[1] + (q - 1) * x[1] * y[0] + x[2] * y[3] + (q - 1) * x[3] * y[2]) % q;
        form == 0
    })
}

/// Proper galleries of length k from `(u, v)`, by plain DFS over the oracle adjacency.
pub fn proper_galleries(m: &Metric, u: VertexRef, v: VertexRef, k: usize) -> Vec<Vec<VertexRef>> {
    fn rec(m: &Metric, path: &mut Vec<VertexRef>, len: usize, out: &mut Vec<Vec<VertexRef>>) {
        if path.len() == len {
            out.push(path.clone());
            return;
        }
        let cur = *path.last().unwrap();
        let prev = path[path.len() - 2];
        for w in m.neighbors(cur) {
            if w != prev {
                path.push(w);
                rec(m, path, len, out);
                path.pop();
            }
        }
    }
    let mut out = Vec::new();
    rec(m, &mut vec![u, v], k + 2, &mut out);
    out
}

/// End flag of a gallery.
pub fn end_flag(g: &[VertexRef]) -> Flag {
    Flag::from_pair(g[g.len() - 2], g[g.len() - 1]).unwrap()
}

/// All invertible 3x3 matrices over GF(2).
pub fn gl3_2() -> Vec<Vec<Vec<u32>>> {
    let det = |m: &[Vec<u32>]| -> u32 {
        let t = m[0][0] * (m[1][1] * m[2][2] + m[1][2] * m[2][1])
            + m[0][1] * (m[1][0] * m[2][2] + m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] + m[1][1] * m[2][0]);
        t % 2
    };
    (0u32..512)
        .map(|code| {
            (0..3)
                .map(|r| (0..3).map(|c| (code >> (3 * r + c)) & 1).collect())
                .collect::<Vec<Vec<u32>>>()
        })
        .filter(|m| det(m) == 1)
        .collect()
}

/// Groups members by a key, for comparing partitions.
pub fn partition<K: Ord, T: Ord + Copy>(items: impl IntoIterator<Item = (K, T)>) -> BTreeSet<BTreeSet<T>> {
    let mut groups: BTreeMap<K, BTreeSet<T>> = BTreeMap::new();
    for (k, t) in items {
        groups.entry(k).or_default().insert(t);
    }
    groups.into_values().collect()
}
