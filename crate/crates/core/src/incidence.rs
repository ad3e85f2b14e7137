//! Incidence structures and their metric primitives.
//!
//! An incidence structure is a bipartite graph on points and lines; every
//! query here is phrased on that graph. Vertices are addressed by
//! [`VertexRef`], a kind tag plus a dense 0-based index within the kind.
//! Globally, points come first: point `i` has id `i`, line `j` has id
//! `point_count + j`.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Kind {
    Point,
    Line,
}

impl Kind {
    pub fn other(self) -> Kind {
        match self {
            Kind::Point => Kind::Line,
            Kind::Line => Kind::Point,
        }
    }
}

/// Handle to a vertex. Orders points before lines, then by index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VertexRef {
    pub kind: Kind,
    pub index: usize,
}

impl VertexRef {
    pub const fn point(index: usize) -> Self {
        VertexRef {
            kind: Kind::Point,
            index,
        }
    }

    pub const fn line(index: usize) -> Self {
        VertexRef {
            kind: Kind::Line,
            index,
        }
    }

    pub fn is_point(self) -> bool {
        self.kind == Kind::Point
    }
}

impl fmt::Display for VertexRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            Kind::Point => write!(f, "p{}", self.index),
            Kind::Line => write!(f, "l{}", self.index),
        }
    }
}

impl FromStr for VertexRef {
    type Err = Error;

    /// Parses `p<i>` or `l<i>`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (kind, rest) = if let Some(rest) = s.strip_prefix('p') {
            (Kind::Point, rest)
        } else if let Some(rest) = s.strip_prefix('l') {
            (Kind::Line, rest)
        } else {
            return Err(Error::Argument(format!(
                "vertex `{s}` must look like p<index> or l<index>"
            )));
        };
        let index = rest
            .parse()
            .map_err(|_| Error::Argument(format!("vertex `{s}` has a malformed index")))?;
        Ok(VertexRef { kind, index })
    }
}

impl Serialize for VertexRef {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for VertexRef {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// An incident (point, line) pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Flag {
    pub point: usize,
    pub line: usize,
}

impl Flag {
    pub const fn new(point: usize, line: usize) -> Self {
        Flag { point, line }
    }

    pub fn point_ref(self) -> VertexRef {
        VertexRef::point(self.point)
    }

    pub fn line_ref(self) -> VertexRef {
        VertexRef::line(self.line)
    }

    /// The flag formed by two incident vertices of different kinds, in either order.
    pub fn from_pair(x: VertexRef, y: VertexRef) -> Option<Flag> {
        match (x.kind, y.kind) {
            (Kind::Point, Kind::Line) => Some(Flag::new(x.index, y.index)),
            (Kind::Line, Kind::Point) => Some(Flag::new(y.index, x.index)),
            _ => None,
        }
    }
}

impl fmt::Display for Flag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(p{}, l{})", self.point, self.line)
    }
}

/// Graph distance; `Infinite` sorts above every finite value.
///
/// Serializes as a number, or `null` when infinite.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Distance {
    Finite(usize),
    Infinite,
}

impl Distance {
    pub fn finite(self) -> Option<usize> {
        match self {
            Distance::Finite(d) => Some(d),
            Distance::Infinite => None,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, Distance::Finite(_))
    }
}

impl PartialEq<usize> for Distance {
    fn eq(&self, other: &usize) -> bool {
        *self == Distance::Finite(*other)
    }
}

impl fmt::Display for Distance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Distance::Finite(d) => write!(f, "{d}"),
            Distance::Infinite => f.write_str("inf"),
        }
    }
}

/// Outcome of a check that carries a counterexample when it fails.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum Check<W> {
    Pass,
    Fail(W),
}

impl<W> Check<W> {
    pub fn passed(&self) -> bool {
        matches!(self, Check::Pass)
    }

    pub fn witness(&self) -> Option<&W> {
        match self {
            Check::Pass => None,
            Check::Fail(w) => Some(w),
        }
    }
}

const UNREACHED: u32 = u32::MAX;

/// BFS distances and one predecessor per vertex from a fixed source.
#[derive(Clone, Debug)]
pub struct DistanceTable {
    source: VertexRef,
    point_count: usize,
    dist: Vec<u32>,
    parent: Vec<u32>,
}

impl DistanceTable {
    pub fn source(&self) -> VertexRef {
        self.source
    }

    fn id(&self, v: VertexRef) -> usize {
        match v.kind {
            Kind::Point => v.index,
            Kind::Line => self.point_count + v.index,
        }
    }

    fn vertex(&self, id: usize) -> VertexRef {
        if id < self.point_count {
            VertexRef::point(id)
        } else {
            VertexRef::line(id - self.point_count)
        }
    }

    /// Distance from the source. `v` must be a valid vertex of the structure.
    pub fn get(&self, v: VertexRef) -> Distance {
        match self.dist[self.id(v)] {
            UNREACHED => Distance::Infinite,
            d => Distance::Finite(d as usize),
        }
    }

    pub(crate) fn raw(&self, v: VertexRef) -> u32 {
        self.dist[self.id(v)]
    }

    /// The BFS predecessor (smallest-id neighbor one step closer to the source).
    pub fn parent(&self, v: VertexRef) -> Option<VertexRef> {
        match self.parent[self.id(v)] {
            UNREACHED => None,
            p => Some(self.vertex(p as usize)),
        }
    }

    /// Largest finite distance, or `Infinite` if some vertex is unreachable.
    pub fn eccentricity(&self) -> Distance {
        let mut max = 0;
        for &d in &self.dist {
            if d == UNREACHED {
                return Distance::Infinite;
            }
            max = max.max(d);
        }
        Distance::Finite(max as usize)
    }
}

/// A violated automorphism condition.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum AutomorphismViolation {
    KindChanged(VertexRef),
    Collision {
        first: VertexRef,
        second: VertexRef,
        image: VertexRef,
    },
    FlagNotPreserved(Flag),
}

/// A finite incidence structure (P, L, F). Immutable once built.
#[derive(Clone, Debug)]
pub struct IncidenceStructure {
    point_count: usize,
    line_count: usize,
    flags: Vec<Flag>,
    adjacency: Vec<Vec<VertexRef>>,
    gon_claim: Option<usize>,
    tables: Vec<OnceLock<DistanceTable>>,
    cycle: OnceLock<Option<Vec<VertexRef>>>,
}

impl IncidenceStructure {
    /// Builds a structure from (point, line) index pairs.
    pub fn new(
        point_count: usize,
        line_count: usize,
        flags: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self> {
        if point_count == 0 || line_count == 0 {
            return Err(Error::Argument(
                "point and line sets must both be nonempty".into(),
            ));
        }
        let mut set = BTreeSet::new();
        for (p, l) in flags {
            if p >= point_count || l >= line_count {
                return Err(Error::Argument(format!(
                    "flag ({p}, {l}) is out of range for {point_count} points and {line_count} lines"
                )));
            }
            if !set.insert(Flag::new(p, l)) {
                return Err(Error::Argument(format!("duplicate flag ({p}, {l})")));
            }
        }
        let flags: Vec<Flag> = set.into_iter().collect();
        let mut adjacency = vec![Vec::new(); point_count + line_count];
        for f in &flags {
            adjacency[f.point].push(f.line_ref());
            adjacency[point_count + f.line].push(f.point_ref());
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        let tables = (0..point_count + line_count)
            .map(|_| OnceLock::new())
            .collect();
        Ok(IncidenceStructure {
            point_count,
            line_count,
            flags,
            adjacency,
            gon_claim: None,
            tables,
            cycle: OnceLock::new(),
        })
    }

    /// Attaches the polygon order this structure claims to be (`gon n` in files).
    pub fn with_gon_claim(mut self, n: Option<usize>) -> Self {
        self.gon_claim = n.filter(|&n| n > 0);
        self
    }

    pub fn gon_claim(&self) -> Option<usize> {
        self.gon_claim
    }

    pub fn point_count(&self) -> usize {
        self.point_count
    }

    pub fn line_count(&self) -> usize {
        self.line_count
    }

    pub fn vertex_count(&self) -> usize {
        self.point_count + self.line_count
    }

    /// Flags in lexicographic (point, line) order.
    pub fn flags(&self) -> &[Flag] {
        &self.flags
    }

    pub fn flag_count(&self) -> usize {
        self.flags.len()
    }

    pub fn flag_index(&self, flag: Flag) -> Option<usize> {
        self.flags.binary_search(&flag).ok()
    }

    pub fn is_flag(&self, flag: Flag) -> bool {
        self.flag_index(flag).is_some()
    }

    pub fn points(&self) -> impl Iterator<Item = VertexRef> {
        (0..self.point_count).map(VertexRef::point)
    }

    pub fn lines(&self) -> impl Iterator<Item = VertexRef> {
        (0..self.line_count).map(VertexRef::line)
    }

    /// All vertices, points first.
    pub fn vertices(&self) -> impl Iterator<Item = VertexRef> {
        self.points().chain(self.lines())
    }

    pub fn contains(&self, v: VertexRef) -> bool {
        match v.kind {
            Kind::Point => v.index < self.point_count,
            Kind::Line => v.index < self.line_count,
        }
    }

    pub fn check_vertex(&self, v: VertexRef) -> Result<()> {
        if self.contains(v) {
            Ok(())
        } else {
            Err(Error::Argument(format!(
                "vertex {v} is out of range ({} points, {} lines)",
                self.point_count, self.line_count
            )))
        }
    }

    pub fn id(&self, v: VertexRef) -> usize {
        match v.kind {
            Kind::Point => v.index,
            Kind::Line => self.point_count + v.index,
        }
    }

    pub fn vertex(&self, id: usize) -> VertexRef {
        if id < self.point_count {
            VertexRef::point(id)
        } else {
            VertexRef::line(id - self.point_count)
        }
    }

    /// Sorted incident vertices of the other kind. Panics on an invalid vertex.
    pub fn neighbors(&self, v: VertexRef) -> &[VertexRef] {
        &self.adjacency[self.id(v)]
    }

    pub fn degree(&self, v: VertexRef) -> usize {
        self.neighbors(v).len()
    }

    pub fn incident(&self, x: VertexRef, y: VertexRef) -> bool {
        Flag::from_pair(x, y).is_some_and(|f| self.is_flag(f))
    }

    /// Lines through a point.
    pub fn pencil(&self, p: VertexRef) -> Result<&[VertexRef]> {
        self.check_vertex(p)?;
        if p.kind != Kind::Point {
            return Err(Error::Argument(format!("pencil needs a point, got {p}")));
        }
        Ok(self.neighbors(p))
    }

    /// Points on a line.
    pub fn point_row(&self, l: VertexRef) -> Result<&[VertexRef]> {
        self.check_vertex(l)?;
        if l.kind != Kind::Line {
            return Err(Error::Argument(format!("point row needs a line, got {l}")));
        }
        Ok(self.neighbors(l))
    }

    /// Vertices incident with some neighbor of `x`.
    pub fn perp(&self, x: VertexRef) -> Result<BTreeSet<VertexRef>> {
        self.check_vertex(x)?;
        Ok(self
            .neighbors(x)
            .iter()
            .flat_map(|&z| self.neighbors(z).iter().copied())
            .collect())
    }

    /// Memoized BFS table from `source`.
    pub fn distance_table(&self, source: VertexRef) -> Result<&DistanceTable> {
        self.check_vertex(source)?;
        Ok(self.table(source))
    }

    pub(crate) fn table(&self, source: VertexRef) -> &DistanceTable {
        self.tables[self.id(source)].get_or_init(|| self.bfs(source))
    }

    fn bfs(&self, source: VertexRef) -> DistanceTable {
        let n = self.vertex_count();
        let mut dist = vec![UNREACHED; n];
        let mut parent = vec![UNREACHED; n];
        let start = self.id(source);
        dist[start] = 0;
        let mut queue = VecDeque::from([start]);
        while let Some(u) = queue.pop_front() {
            let du = dist[u];
            for &w in &self.adjacency[u] {
                let wi = self.id(w);
                if dist[wi] == UNREACHED {
                    dist[wi] = du + 1;
                    parent[wi] = u as u32;
                    queue.push_back(wi);
                }
            }
        }
        DistanceTable {
            source,
            point_count: self.point_count,
            dist,
            parent,
        }
    }

    pub fn distance(&self, x: VertexRef, y: VertexRef) -> Result<Distance> {
        self.check_vertex(x)?;
        self.check_vertex(y)?;
        Ok(self.table(x).get(y))
    }

    /// Unchecked distance as a raw integer (`u32::MAX` when unreachable).
    pub(crate) fn dist(&self, x: VertexRef, y: VertexRef) -> u32 {
        self.table(x).raw(y)
    }

    /// Vertices at distance exactly `n` from `x`.
    pub fn opposites(&self, x: VertexRef, n: usize) -> Result<Vec<VertexRef>> {
        let table = self.distance_table(x)?;
        Ok(self
            .vertices()
            .filter(|&y| table.get(y) == Distance::Finite(n))
            .collect())
    }

    /// A shortest cycle of the incidence graph as a closed chain
    /// `(x_0, ..., x_{2k-1}, x_0)`, or `None` for a forest.
    pub fn shortest_cycle(&self) -> Option<&[VertexRef]> {
        self.cycle
            .get_or_init(|| self.find_shortest_cycle())
            .as_deref()
    }

    fn find_shortest_cycle(&self) -> Option<Vec<VertexRef>> {
        // A non-tree edge (u, w) with d(r, w) = d(r, u) + 1 closes a walk of
        // length 2 d(r, w). At a root minimizing this length the two BFS
        // paths are internally disjoint, so the walk is a shortest cycle.
        let mut best: Option<(u32, VertexRef, VertexRef, VertexRef)> = None;
        for root in self.vertices() {
            let table = self.table(root);
            for u in self.vertices() {
                let du = table.raw(u);
                if du == UNREACHED {
                    continue;
                }
                for &w in self.neighbors(u) {
                    let dw = table.raw(w);
                    if dw == du + 1 && table.parent(w) != Some(u) {
                        let len = 2 * dw;
                        if best.is_none_or(|(b, ..)| len < b) {
                            best = Some((len, root, u, w));
                        }
                    }
                }
            }
        }
        let (_, root, u, w) = best?;
        let table = self.table(root);
        let path_to = |mut v: VertexRef| {
            let mut path = vec![v];
            while let Some(p) = table.parent(v) {
                path.push(p);
                v = p;
            }
            path.reverse();
            path
        };
        // root .. u, w .. root
        let mut cycle = path_to(u);
        let mut back = path_to(w);
        back.reverse();
        cycle.extend(back);
        Some(cycle)
    }

    /// Length of a shortest cycle of the incidence graph (always even).
    pub fn girth(&self) -> Distance {
        match self.shortest_cycle() {
            Some(c) => Distance::Finite(c.len() - 1),
            None => Distance::Infinite,
        }
    }

    /// Largest distance between two vertices.
    pub fn diameter(&self) -> Distance {
        self.vertices()
            .map(|v| self.table(v).eccentricity())
            .max()
            .unwrap_or(Distance::Finite(0))
    }

    /// Some pair of vertices with no chain between them.
    pub fn unreachable_pair(&self) -> Option<(VertexRef, VertexRef)> {
        let root = self.vertex(0);
        let table = self.table(root);
        self.vertices()
            .find(|&v| !table.get(v).is_finite())
            .map(|v| (root, v))
    }

    /// Every point row and every pencil has at least 3 elements.
    pub fn is_thick(&self) -> Check<VertexRef> {
        match self.vertices().find(|&v| self.degree(v) < 3) {
            None => Check::Pass,
            Some(v) => Check::Fail(v),
        }
    }

    /// Checks that `phi` is a kind-preserving bijection mapping flags to flags.
    pub fn is_automorphism(
        &self,
        phi: &BTreeMap<VertexRef, VertexRef>,
    ) -> Result<Check<AutomorphismViolation>> {
        for v in self.vertices() {
            let image = phi
                .get(&v)
                .ok_or_else(|| Error::Argument(format!("mapping is not defined at {v}")))?;
            self.check_vertex(*image)?;
        }
        let mut preimage: BTreeMap<VertexRef, VertexRef> = BTreeMap::new();
        for v in self.vertices() {
            let image = phi[&v];
            if image.kind != v.kind {
                return Ok(Check::Fail(AutomorphismViolation::KindChanged(v)));
            }
            if let Some(&first) = preimage.get(&image) {
                return Ok(Check::Fail(AutomorphismViolation::Collision {
                    first,
                    second: v,
                    image,
                }));
            }
            preimage.insert(image, v);
        }
        // A bijection on a finite flag set maps F onto F iff it maps F into F.
        for &f in &self.flags {
            let image = Flag::new(phi[&f.point_ref()].index, phi[&f.line_ref()].index);
            if !self.is_flag(image) {
                return Ok(Check::Fail(AutomorphismViolation::FlagNotPreserved(f)));
            }
        }
        Ok(Check::Pass)
    }
}
