//! Chains, ordinary k-gons, the maps `f_k`, and galleries.

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::incidence::{Distance, DistanceTable, Flag, IncidenceStructure, Kind, VertexRef};

/// Default bound on the number of galleries an enumeration may produce.
pub const DEFAULT_GALLERY_CAP: usize = 10_000_000;

/// A vertex sequence with consecutive entries incident. A k-chain has k+1 vertices.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct Chain(Vec<VertexRef>);

impl Chain {
    pub fn new(s: &IncidenceStructure, vertices: Vec<VertexRef>) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::Argument("a chain needs at least one vertex".into()));
        }
        for &v in &vertices {
            s.check_vertex(v)?;
        }
        if let Some(w) = vertices.windows(2).find(|w| !s.incident(w[0], w[1])) {
            return Err(Error::Argument(format!("{} and {} are not incident", w[0], w[1])));
        }
        Ok(Chain(vertices))
    }

    pub fn vertices(&self) -> &[VertexRef] {
        &self.0
    }

    pub fn into_vertices(self) -> Vec<VertexRef> {
        self.0
    }

    /// Number of steps k.
    pub fn len(&self) -> usize {
        self.0.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.0.len() == 1
    }

    pub fn first(&self) -> VertexRef {
        self.0[0]
    }

    pub fn last(&self) -> VertexRef {
        self.0[self.0.len() - 1]
    }

    /// Some `x_i = x_{i-2}`.
    pub fn stammers(&self) -> bool {
        self.0.windows(3).any(|w| w[0] == w[2])
    }
}

impl fmt::Display for Chain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{v}")?;
        }
        f.write_str(")")
    }
}

/// True iff `c` is a closed 2k-chain whose first 2k vertices are pairwise distinct.
pub fn is_ordinary_kgon(s: &IncidenceStructure, c: &Chain, k: usize) -> bool {
    let v = c.vertices();
    if k == 0 || v.len() != 2 * k + 1 || v[0] != v[2 * k] {
        return false;
    }
    if !v.iter().all(|&x| s.contains(x)) || !v.windows(2).all(|w| s.incident(w[0], w[1])) {
        return false;
    }
    let distinct: BTreeSet<_> = v[..2 * k].iter().collect();
    distinct.len() == 2 * k
}

/// A shortest chain and whether it is the only one.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MinimalChain {
    pub chain: Chain,
    /// False when other shortest chains exist; `chain` is then the one that
    /// always steps back to the smallest predecessor.
    pub unique: bool,
}

/// Walks back from `y` toward the source of the table, taking the smallest
/// predecessor; records the first step with an alternative.
fn walk_back(
    s: &IncidenceStructure,
    x: VertexRef,
    y: VertexRef,
) -> Result<(Vec<VertexRef>, Option<(usize, VertexRef)>)> {
    let table = s.distance_table(x)?;
    s.check_vertex(y)?;
    let Distance::Finite(k) = table.get(y) else {
        return Err(Error::Domain(format!("{x} and {y} are not connected")));
    };
    let mut rev = vec![y];
    let mut branch = None;
    let mut cur = y;
    for d in (0..k).rev() {
        let mut preds = s
            .neighbors(cur)
            .iter()
            .copied()
            .filter(|&w| table.get(w) == Distance::Finite(d));
        let first = preds.next().expect("BFS layer has a predecessor");
        if branch.is_none() {
            if let Some(second) = preds.next() {
                branch = Some((rev.len(), second));
            }
        }
        rev.push(first);
        cur = first;
    }
    rev.reverse();
    // branch position in forward order: the alternative replaces chain[k - pos]
    let branch = branch.map(|(pos, alt)| (k - pos, alt));
    Ok((rev, branch))
}

/// Completes a chain prefix `x .. alt` backwards from `alt` to `x` with smallest predecessors.
fn alternative_chain(
    s: &IncidenceStructure,
    chain: &[VertexRef],
    at: usize,
    alt: VertexRef,
) -> Result<Vec<VertexRef>> {
    let (mut head, _) = walk_back(s, chain[0], alt)?;
    head.extend_from_slice(&chain[at + 1..]);
    Ok(head)
}

/// A shortest chain from `x` to `y`.
///
/// With `claimed_n = Some(n)` and `d(x, y) < n`, a second shortest chain is
/// an integrity error (the structure is not a partial n-gon).
pub fn minimal_chain(
    s: &IncidenceStructure,
    x: VertexRef,
    y: VertexRef,
    claimed_n: Option<usize>,
) -> Result<MinimalChain> {
    let (chain, branch) = walk_back(s, x, y)?;
    let k = chain.len() - 1;
    if let Some((at, alt)) = branch {
        if claimed_n.is_some_and(|n| k < n) {
            let other = alternative_chain(s, &chain, at, alt)?;
            return Err(Error::integrity(
                format!("two shortest chains of length {k} join {x} and {y}"),
                vec![chain, other],
            ));
        }
    }
    Ok(MinimalChain {
        chain: Chain(chain),
        unique: branch.is_none(),
    })
}

/// `f_k(x, y)`: the penultimate vertex of the unique k-chain from `x` to `y`.
pub fn f_k(s: &IncidenceStructure, x: VertexRef, y: VertexRef, k: usize) -> Result<VertexRef> {
    if k == 0 {
        return Err(Error::Domain("f_k needs k >= 1".into()));
    }
    let d = s.distance(x, y)?;
    if d != Distance::Finite(k) {
        return Err(Error::Domain(format!("f_{k}({x}, {y}) needs distance {k}, got {d}")));
    }
    let (chain, branch) = walk_back(s, x, y)?;
    if let Some((at, alt)) = branch {
        let other = alternative_chain(s, &chain, at, alt)?;
        return Err(Error::integrity(
            format!("the {k}-chain from {x} to {y} is not unique"),
            vec![chain, other],
        ));
    }
    Ok(chain[k - 1])
}

/// An ordinary n-gon through `x` and `y`, found by exhaustive backtracking.
///
/// Returns the closed chain `(x, ..., x)` of length 2n, or `None`.
pub fn find_ordinary_ngon(
    s: &IncidenceStructure,
    x: VertexRef,
    y: VertexRef,
    n: usize,
) -> Result<Option<Chain>> {
    s.check_vertex(x)?;
    s.check_vertex(y)?;
    if n < 2 {
        return Ok(None);
    }
    let dxy = s.table(x).raw(y);
    if dxy == u32::MAX || dxy as usize > n {
        return Ok(None);
    }
    let mut search = CycleSearch {
        s,
        len: 2 * n,
        y,
        dx: s.table(x),
        dy: s.table(y),
        dxy,
        path: vec![x],
        on_path: vec![false; s.vertex_count()],
    };
    search.on_path[s.id(x)] = true;
    if search.run() {
        search.path.push(x);
        Ok(Some(Chain(search.path)))
    } else {
        Ok(None)
    }
}

struct CycleSearch<'a> {
    s: &'a IncidenceStructure,
    len: usize,
    y: VertexRef,
    dx: &'a DistanceTable,
    dy: &'a DistanceTable,
    dxy: u32,
    path: Vec<VertexRef>,
    on_path: Vec<bool>,
}

impl CycleSearch<'_> {
    fn run(&mut self) -> bool {
        let s = self.s;
        let cur = *self.path.last().expect("nonempty");
        let steps = self.path.len() - 1;
        let has_y = self.on_path[s.id(self.y)];
        if steps == self.len - 1 {
            return has_y && s.incident(cur, self.path[0]);
        }
        // after this step, `r` steps remain to get back to x
        let r = (self.len - steps - 1) as u32;
        for &w in s.neighbors(cur) {
            if self.on_path[s.id(w)] || self.dx.raw(w) > r {
                continue;
            }
            if !has_y && w != self.y && self.dy.raw(w).saturating_add(self.dxy) > r {
                continue;
            }
            self.path.push(w);
            self.on_path[s.id(w)] = true;
            if self.run() {
                return true;
            }
            self.on_path[s.id(w)] = false;
            self.path.pop();
        }
        false
    }
}

/// An ordinary n-gon through `x` and `y` built by completing a minimal chain.
///
/// Only valid when the incidence graph has girth at least 2n: a geodesic from
/// `x` through `y` is extended to a vertex `w` at distance n and closed up with
/// a second geodesic leaving `x` by a different edge.
pub fn complete_to_ngon(
    s: &IncidenceStructure,
    x: VertexRef,
    y: VertexRef,
    n: usize,
) -> Result<Option<Chain>> {
    let d = s.distance(x, y)?;
    if d.finite().is_none_or(|k| k > n) {
        return Ok(None);
    }
    let base = minimal_chain(s, x, y, None)?.chain.into_vertices();
    let mut path = base;
    Ok(extend_and_close(s, &mut path, n).map(Chain))
}

fn extend_and_close(
    s: &IncidenceStructure,
    path: &mut Vec<VertexRef>,
    n: usize,
) -> Option<Vec<VertexRef>> {
    let x = path[0];
    if path.len() == n + 1 {
        let w = path[n];
        if s.dist(x, w) as usize != n {
            return None;
        }
        for &a in s.neighbors(x) {
            if a == path[1] || s.dist(a, w) as usize != n - 1 {
                continue;
            }
            let back = minimal_chain(s, a, w, None).ok()?.chain.into_vertices();
            let mut cycle = path.clone();
            cycle.extend(back.iter().rev().skip(1));
            cycle.push(x);
            let c = Chain(cycle);
            if is_ordinary_kgon(s, &c, n) {
                return Some(c.into_vertices());
            }
        }
        return None;
    }
    let cur = *path.last().expect("nonempty");
    let prev = (path.len() >= 2).then(|| path[path.len() - 2]);
    for &w in s.neighbors(cur) {
        if Some(w) == prev {
            continue;
        }
        path.push(w);
        if let Some(c) = extend_and_close(s, path, n) {
            return Some(c);
        }
        path.pop();
    }
    None
}

/// Which element of the base flag a gallery starts with: `(u, v) = (p, l)` or `(l, p)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Orientation {
    PointLine,
    LinePoint,
}

impl Orientation {
    pub fn reversed(self) -> Orientation {
        match self {
            Orientation::PointLine => Orientation::LinePoint,
            Orientation::LinePoint => Orientation::PointLine,
        }
    }

    /// `(u, v)` for the given flag.
    pub fn apply(self, flag: Flag) -> (VertexRef, VertexRef) {
        match self {
            Orientation::PointLine => (flag.point_ref(), flag.line_ref()),
            Orientation::LinePoint => (flag.line_ref(), flag.point_ref()),
        }
    }

    /// Orientation whose first element has the given kind.
    pub fn starting_with(kind: Kind) -> Orientation {
        match kind {
            Kind::Point => Orientation::PointLine,
            Kind::Line => Orientation::LinePoint,
        }
    }
}

impl fmt::Display for Orientation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Orientation::PointLine => "(p,l)",
            Orientation::LinePoint => "(l,p)",
        })
    }
}

/// A gallery of length k: a (k+1)-chain `(u, v, x_2, ..., x_{k+1})` starting at a flag.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Gallery {
    chain: Chain,
}

impl Gallery {
    pub fn new(chain: Chain) -> Result<Self> {
        if chain.vertices().len() < 2 {
            return Err(Error::Argument("a gallery starts with a flag".into()));
        }
        Ok(Gallery { chain })
    }

    pub fn chain(&self) -> &Chain {
        &self.chain
    }

    pub fn vertices(&self) -> &[VertexRef] {
        self.chain.vertices()
    }

    /// Gallery length k (the chain has k + 2 vertices).
    pub fn len(&self) -> usize {
        self.chain.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn base(&self) -> (VertexRef, VertexRef) {
        (self.vertices()[0], self.vertices()[1])
    }

    pub fn orientation(&self) -> Orientation {
        Orientation::starting_with(self.vertices()[0].kind)
    }

    pub fn is_proper(&self) -> bool {
        !self.chain.stammers()
    }

    pub fn end_vertex(&self) -> VertexRef {
        self.chain.last()
    }

    /// The flag formed by the last two vertices.
    pub fn end_flag(&self) -> Flag {
        let v = self.vertices();
        Flag::from_pair(v[v.len() - 2], v[v.len() - 1]).expect("consecutive vertices differ in kind")
    }
}

/// All galleries of one length from one oriented flag.
#[derive(Clone, Debug, Default)]
pub struct GalleryEnumeration {
    pub proper: Vec<Gallery>,
    pub stammering: Vec<Gallery>,
}

impl GalleryEnumeration {
    pub fn total(&self) -> usize {
        self.proper.len() + self.stammering.len()
    }
}

/// Enumerates `Gall_k(u, v)` depth-first in lexicographic order.
pub fn enumerate_galleries(
    s: &IncidenceStructure,
    base: Flag,
    orientation: Orientation,
    k: usize,
    cap: usize,
) -> Result<GalleryEnumeration> {
    if !s.is_flag(base) {
        return Err(Error::Argument(format!("{base} is not a flag")));
    }
    let (u, v) = orientation.apply(base);
    let mut out = GalleryEnumeration::default();
    let mut path = vec![u, v];

    fn rec(
        s: &IncidenceStructure,
        path: &mut Vec<VertexRef>,
        k: usize,
        cap: usize,
        out: &mut GalleryEnumeration,
    ) -> Result<()> {
        if path.len() == k + 2 {
            if out.total() >= cap {
                return Err(Error::Resource {
                    what: "gallery enumeration".into(),
                    cap,
                    reached: out.total() + 1,
                });
            }
            let g = Gallery {
                chain: Chain(path.clone()),
            };
            if g.is_proper() {
                out.proper.push(g);
            } else {
                out.stammering.push(g);
            }
            return Ok(());
        }
        let cur = *path.last().expect("nonempty");
        for &w in s.neighbors(cur) {
            path.push(w);
            rec(s, path, k, cap, out)?;
            path.pop();
        }
        Ok(())
    }

    rec(s, &mut path, k, cap, &mut out)?;
    Ok(out)
}

/// Drops the last vertex: `Gall_{k+1} -> Gall_k`.
pub fn gallery_pr(g: &Gallery) -> Result<Gallery> {
    if g.is_empty() {
        return Err(Error::Domain("pr is undefined on galleries of length 0".into()));
    }
    let mut v = g.vertices().to_vec();
    v.pop();
    Ok(Gallery { chain: Chain(v) })
}

/// Steps back onto `x_k`: `(.., x_k, x_{k+1}) -> (.., x_k, x_{k+1}, x_k)`.
pub fn gallery_s(g: &Gallery) -> Gallery {
    let mut v = g.vertices().to_vec();
    v.push(v[v.len() - 2]);
    Gallery { chain: Chain(v) }
}

/// `(v, u, x_2, ..) -> (u, v, u, x_2, ..)`: `Gall_k(v, u) -> StamGall_{k+1}(u, v)`.
pub fn stam_inject(g: &Gallery) -> Gallery {
    let mut v = Vec::with_capacity(g.vertices().len() + 1);
    v.push(g.vertices()[1]);
    v.extend_from_slice(g.vertices());
    Gallery { chain: Chain(v) }
}
