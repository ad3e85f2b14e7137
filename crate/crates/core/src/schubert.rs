//! Schubert cells of an n-gon relative to a base flag, their closures, the
//! retraction onto an ordinary n-gon, coordinates on each cell, and the
//! separation of a big-cell point from a smaller cell.
//!
//! Cells are computed from distances to the base flag. A point `q` lies in
//! `P_k` with `k = min(d(p, q), d(l, q))`; the orientation of the cell is
//! fixed by the parity of `k`.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use rayon::prelude::*;
use serde::Serialize;

use crate::chains::{f_k, is_ordinary_kgon, minimal_chain, Chain, Orientation};
use crate::error::{Error, Result};
use crate::incidence::{Flag, IncidenceStructure, Kind, VertexRef};
use crate::verify::require_polygon;

/// An ordinary n-gon `(x_0, ..., x_{2n-1})`. Indices are taken mod 2n.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct OrdinaryNgon(Vec<VertexRef>);

impl OrdinaryNgon {
    /// Takes the 2n vertices, optionally followed by a repeat of `x_0`.
    pub fn new(s: &IncidenceStructure, vertices: Vec<VertexRef>) -> Result<Self> {
        let mut v = vertices;
        if v.len() > 1 && v.first() == v.last() {
            v.pop();
        }
        if v.len() < 4 || !v.len().is_multiple_of(2) {
            return Err(Error::Argument(format!(
                "an ordinary n-gon has 2n >= 4 vertices, got {}",
                v.len()
            )));
        }
        let n = v.len() / 2;
        let mut closed = v.clone();
        closed.push(v[0]);
        let chain = Chain::new(s, closed)?;
        if !is_ordinary_kgon(s, &chain, n) {
            return Err(Error::Argument(format!("{chain} is not an ordinary {n}-gon")));
        }
        Ok(OrdinaryNgon(v))
    }

    pub fn n(&self) -> usize {
        self.0.len() / 2
    }

    pub fn vertices(&self) -> &[VertexRef] {
        &self.0
    }

    pub fn x(&self, i: usize) -> VertexRef {
        self.0[i % self.0.len()]
    }

    /// The flag `{x_0, x_1}`.
    pub fn base(&self) -> Flag {
        Flag::from_pair(self.0[0], self.0[1]).expect("adjacent vertices of an n-gon")
    }

    /// `x'_i = x_{1-i}`: the same n-gon read from `x_1` towards `x_0`.
    pub fn swapped(&self) -> OrdinaryNgon {
        let len = self.0.len();
        OrdinaryNgon((0..len).map(|i| self.x(len + 1 - i)).collect())
    }

    /// The labelling with `(x_0, x_1) = (u, v)` for the given orientation of the base flag.
    pub fn oriented(&self, orientation: Orientation) -> OrdinaryNgon {
        let (u, _) = orientation.apply(self.base());
        if self.0[0] == u {
            self.clone()
        } else {
            self.swapped()
        }
    }

    /// The image under a vertex map, or `None` if the map misses a vertex.
    pub fn map(&self, phi: &BTreeMap<VertexRef, VertexRef>) -> Option<OrdinaryNgon> {
        self.0
            .iter()
            .map(|v| phi.get(v).copied())
            .collect::<Option<Vec<_>>>()
            .map(OrdinaryNgon)
    }

    /// The 2n flags `{x_i, x_{i+1}}`.
    pub fn flags(&self) -> Vec<Flag> {
        (0..self.0.len())
            .map(|i| Flag::from_pair(self.x(i), self.x(i + 1)).expect("adjacent"))
            .collect()
    }
}

impl fmt::Display for OrdinaryNgon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(ToString::to_string).collect();
        write!(f, "[{}]", parts.join(" "))
    }
}

/// Ordinary n-gons with `(x_0, x_1) = (p, l)` for the base flag, in
/// lexicographic order, at most `limit` of them.
pub fn ngons_through(
    s: &IncidenceStructure,
    base: Flag,
    n: usize,
    limit: Option<usize>,
) -> Result<Vec<OrdinaryNgon>> {
    if !s.is_flag(base) {
        return Err(Error::Argument(format!("{base} is not a flag")));
    }
    if n < 2 {
        return Err(Error::Argument(format!("n = {n} is too small")));
    }
    let (p, l) = (base.point_ref(), base.line_ref());
    let mut search = NgonSearch {
        s,
        n,
        origin: p,
        limit: limit.unwrap_or(usize::MAX),
        path: vec![p, l],
        on_path: vec![false; s.vertex_count()],
        found: Vec::new(),
    };
    search.on_path[s.id(p)] = true;
    search.on_path[s.id(l)] = true;
    search.run();
    Ok(search.found)
}

/// The lexicographically smallest ordinary n-gon through the base flag.
pub fn default_ngon(s: &IncidenceStructure, base: Flag, n: usize) -> Result<OrdinaryNgon> {
    ngons_through(s, base, n, Some(1))?
        .pop()
        .ok_or_else(|| Error::Precondition(format!("no ordinary {n}-gon through {base}")))
}

struct NgonSearch<'a> {
    s: &'a IncidenceStructure,
    n: usize,
    origin: VertexRef,
    limit: usize,
    path: Vec<VertexRef>,
    on_path: Vec<bool>,
    found: Vec<OrdinaryNgon>,
}

impl NgonSearch<'_> {
    fn run(&mut self) {
        if self.found.len() >= self.limit {
            return;
        }
        let cur = *self.path.last().expect("nonempty");
        if self.path.len() == 2 * self.n {
            if self.s.incident(cur, self.origin) {
                self.found.push(OrdinaryNgon(self.path.clone()));
            }
            return;
        }
        let remaining = 2 * self.n - self.path.len() + 1;
        for &w in self.s.neighbors(cur) {
            let wi = self.s.id(w);
            if self.on_path[wi] || self.s.dist(w, self.origin) as usize > remaining - 1 {
                continue;
            }
            self.on_path[wi] = true;
            self.path.push(w);
            self.run();
            self.path.pop();
            self.on_path[wi] = false;
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Carrier {
    Point,
    Line,
    Flag,
}

/// `P_k(u, v)`, `L_k(u, v)` or `F_k(u, v)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct CellLabel {
    pub carrier: Carrier,
    pub k: usize,
    /// `None` for `F_0` and `F_n`, where both orientations give the same cell.
    pub orientation: Option<Orientation>,
}

impl fmt::Display for CellLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = match self.carrier {
            Carrier::Point => 'P',
            Carrier::Line => 'L',
            Carrier::Flag => 'F',
        };
        write!(f, "{c}_{}", self.k)?;
        if let Some(o) = self.orientation {
            write!(f, "{o}")?;
        }
        Ok(())
    }
}

/// `(l, p)` for even k, `(p, l)` for odd k.
pub fn point_cell_orientation(k: usize) -> Orientation {
    if k.is_multiple_of(2) {
        Orientation::LinePoint
    } else {
        Orientation::PointLine
    }
}

/// `(p, l)` for even k, `(l, p)` for odd k.
pub fn line_cell_orientation(k: usize) -> Orientation {
    point_cell_orientation(k).reversed()
}

/// The base element `v` that every member of a vertex cell of label k is
/// at distance k from.
fn vertex_cell_center(base: Flag, carrier: Carrier, k: usize) -> VertexRef {
    let orientation = match carrier {
        Carrier::Line => line_cell_orientation(k),
        _ => point_cell_orientation(k),
    };
    orientation.apply(base).1
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(untagged)]
pub enum CellElement {
    Vertex(VertexRef),
    Flag(Flag),
}

impl fmt::Display for CellElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CellElement::Vertex(v) => write!(f, "{v}"),
            CellElement::Flag(fl) => write!(f, "{fl}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Cell<T> {
    pub label: CellLabel,
    pub size: usize,
    /// Sorted.
    pub members: Vec<T>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CellSizes {
    pub points: Vec<usize>,
    pub lines: Vec<usize>,
    pub flags: Vec<usize>,
}

/// Cell of a vertex relative to the base flag.
pub fn classify_vertex(
    s: &IncidenceStructure,
    base: Flag,
    n: usize,
    x: VertexRef,
) -> Result<CellLabel> {
    s.check_vertex(x)?;
    let (dp, dl) = (s.dist(base.point_ref(), x), s.dist(base.line_ref(), x));
    let k = dp.min(dl) as usize;
    if k >= n || dp.abs_diff(dl) != 1 {
        return Err(Error::integrity(
            format!("{x} has distances ({dp}, {dl}) to the base flag {base}"),
            vec![vec![base.point_ref(), base.line_ref(), x]],
        ));
    }
    Ok(match x.kind {
        Kind::Point => CellLabel {
            carrier: Carrier::Point,
            k,
            orientation: Some(point_cell_orientation(k)),
        },
        Kind::Line => CellLabel {
            carrier: Carrier::Line,
            k,
            orientation: Some(line_cell_orientation(k)),
        },
    })
}

/// Cell of a flag relative to the base flag: `F_{m+1}(u, v)` where `m` is the
/// least distance between an element of the flag and the base element `v`.
pub fn classify_flag(s: &IncidenceStructure, base: Flag, n: usize, flag: Flag) -> Result<CellLabel> {
    if !s.is_flag(flag) {
        return Err(Error::Argument(format!("{flag} is not a flag")));
    }
    let symmetric = |k| CellLabel {
        carrier: Carrier::Flag,
        k,
        orientation: None,
    };
    if flag == base {
        return Ok(symmetric(0));
    }
    let (p, l) = (base.point_ref(), base.line_ref());
    let near = |v: VertexRef| s.dist(v, flag.point_ref()).min(s.dist(v, flag.line_ref())) as usize;
    let (mp, ml) = (near(p), near(l));
    let m = mp.min(ml);
    if m >= n - 1 {
        if m > n - 1 {
            return Err(Error::integrity(
                format!("{flag} is at distance {m} from the base flag {base}"),
                vec![vec![p, l, flag.point_ref(), flag.line_ref()]],
            ));
        }
        return Ok(symmetric(n));
    }
    if mp == ml {
        return Err(Error::integrity(
            format!("{flag} is equidistant ({m}) from both elements of {base}"),
            vec![vec![p, l, flag.point_ref(), flag.line_ref()]],
        ));
    }
    let orientation = if mp < ml {
        Orientation::LinePoint
    } else {
        Orientation::PointLine
    };
    Ok(CellLabel {
        carrier: Carrier::Flag,
        k: m + 1,
        orientation: Some(orientation),
    })
}

/// Flag cell labels in canonical order: `F_0`, then `F_k(p,l)`, `F_k(l,p)`
/// for `0 < k < n`, then `F_n`.
pub fn flag_cell_labels(n: usize) -> Vec<CellLabel> {
    let mut labels = vec![CellLabel {
        carrier: Carrier::Flag,
        k: 0,
        orientation: None,
    }];
    for k in 1..n {
        for o in [Orientation::PointLine, Orientation::LinePoint] {
            labels.push(CellLabel {
                carrier: Carrier::Flag,
                k,
                orientation: Some(o),
            });
        }
    }
    labels.push(CellLabel {
        carrier: Carrier::Flag,
        k: n,
        orientation: None,
    });
    labels
}

/// The Schubert cell decomposition of points, lines and flags.
///
/// `point_cells[k]` and `line_cells[k]` have label k; `flag_cells` follow
/// [`flag_cell_labels`].
#[derive(Clone, Debug, Serialize)]
pub struct SchubertDecomposition {
    pub base: Flag,
    pub n: usize,
    pub point_cells: Vec<Cell<VertexRef>>,
    pub line_cells: Vec<Cell<VertexRef>>,
    pub flag_cells: Vec<Cell<Flag>>,
    #[serde(skip)]
    flag_slot: HashMap<CellLabel, usize>,
}

pub fn decompose(s: &IncidenceStructure, base: Flag, n: usize) -> Result<SchubertDecomposition> {
    require_polygon(s, n)?;
    if !s.is_flag(base) {
        return Err(Error::Argument(format!("{base} is not a flag")));
    }
    let vertex_labels: Vec<(VertexRef, CellLabel)> = s
        .vertices()
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|x| classify_vertex(s, base, n, x).map(|label| (x, label)))
        .collect::<Result<_>>()?;
    let flag_labels: Vec<(Flag, CellLabel)> = s
        .flags()
        .par_iter()
        .map(|&f| classify_flag(s, base, n, f).map(|label| (f, label)))
        .collect::<Result<_>>()?;

    let vertex_cells = |carrier: Carrier, kind: Kind| -> Vec<Cell<VertexRef>> {
        (0..n)
            .map(|k| {
                let members: Vec<VertexRef> = vertex_labels
                    .iter()
                    .filter(|(x, label)| x.kind == kind && label.k == k)
                    .map(|&(x, _)| x)
                    .collect();
                let orientation = match carrier {
                    Carrier::Point => point_cell_orientation(k),
                    _ => line_cell_orientation(k),
                };
                Cell {
                    label: CellLabel {
                        carrier,
                        k,
                        orientation: Some(orientation),
                    },
                    size: members.len(),
                    members,
                }
            })
            .collect()
    };
    let point_cells = vertex_cells(Carrier::Point, Kind::Point);
    let line_cells = vertex_cells(Carrier::Line, Kind::Line);

    let labels = flag_cell_labels(n);
    let flag_slot: HashMap<CellLabel, usize> =
        labels.iter().enumerate().map(|(i, &l)| (l, i)).collect();
    let mut flag_members: Vec<Vec<Flag>> = vec![Vec::new(); labels.len()];
    for (f, label) in flag_labels {
        flag_members[flag_slot[&label]].push(f);
    }
    let flag_cells = labels
        .into_iter()
        .zip(flag_members)
        .map(|(label, members)| Cell {
            label,
            size: members.len(),
            members,
        })
        .collect();
    Ok(SchubertDecomposition {
        base,
        n,
        point_cells,
        line_cells,
        flag_cells,
        flag_slot,
    })
}

impl SchubertDecomposition {
    pub fn sizes(&self) -> CellSizes {
        CellSizes {
            points: self.point_cells.iter().map(|c| c.size).collect(),
            lines: self.line_cells.iter().map(|c| c.size).collect(),
            flags: self.flag_cells.iter().map(|c| c.size).collect(),
        }
    }

    pub fn flag_cell(&self, label: CellLabel) -> Option<&Cell<Flag>> {
        self.flag_slot.get(&label).map(|&i| &self.flag_cells[i])
    }

    /// `P_{n-1}`.
    pub fn big_point_cell(&self) -> &Cell<VertexRef> {
        &self.point_cells[self.n - 1]
    }

    pub fn big_line_cell(&self) -> &Cell<VertexRef> {
        &self.line_cells[self.n - 1]
    }

    pub fn big_flag_cell(&self) -> &Cell<Flag> {
        self.flag_cells.last().expect("2n flag cells")
    }

    /// Every vertex and flag cell label with its members, points first.
    pub fn cells(&self) -> Vec<(CellLabel, Vec<CellElement>)> {
        let vertex = |c: &Cell<VertexRef>| {
            (c.label, c.members.iter().map(|&v| CellElement::Vertex(v)).collect())
        };
        let flag = |c: &Cell<Flag>| (c.label, c.members.iter().map(|&f| CellElement::Flag(f)).collect());
        self.point_cells
            .iter()
            .map(vertex)
            .chain(self.line_cells.iter().map(vertex))
            .chain(self.flag_cells.iter().map(flag))
            .collect()
    }
}

/// Closed Schubert cells.
#[derive(Clone, Debug, Serialize)]
pub struct SchubertVarieties {
    /// `ClP_k` for `k = 0..n`, sorted.
    pub points: Vec<Vec<VertexRef>>,
    pub lines: Vec<Vec<VertexRef>>,
    /// `ClF_k(u, v)` in the order of the flag cells.
    pub flags: Vec<(CellLabel, Vec<Flag>)>,
}

/// Builds the varieties as unions of cells and checks `ClP_k` and `ClL_k`
/// against balls around the base flag.
pub fn varieties(s: &IncidenceStructure, dec: &SchubertDecomposition) -> Result<SchubertVarieties> {
    let n = dec.n;
    let closures = |cells: &[Cell<VertexRef>], carrier: Carrier, kind: Kind| -> Result<Vec<Vec<VertexRef>>> {
        let mut acc = BTreeSet::new();
        let mut out = Vec::with_capacity(n);
        for (k, cell) in cells.iter().enumerate() {
            acc.extend(cell.members.iter().copied());
            let center = vertex_cell_center(dec.base, carrier, k);
            let ball: BTreeSet<VertexRef> = s
                .vertices()
                .filter(|&x| x.kind == kind && s.dist(center, x) as usize <= k)
                .collect();
            if ball != acc {
                let diff: Vec<VertexRef> = ball.symmetric_difference(&acc).copied().collect();
                return Err(Error::integrity(
                    format!("closed cell {} differs from the {k}-ball around {center}", cell.label),
                    vec![diff],
                ));
            }
            out.push(acc.iter().copied().collect());
        }
        Ok(out)
    };
    let points = closures(&dec.point_cells, Carrier::Point, Kind::Point)?;
    let lines = closures(&dec.line_cells, Carrier::Line, Kind::Line)?;

    let flags = dec
        .flag_cells
        .iter()
        .map(|cell| {
            let k = cell.label.k;
            let mut members: BTreeSet<Flag> = cell.members.iter().copied().collect();
            for other in &dec.flag_cells {
                if other.label.k < k {
                    members.extend(other.members.iter().copied());
                }
            }
            (cell.label, members.into_iter().collect())
        })
        .collect();
    Ok(SchubertVarieties {
        points,
        lines,
        flags,
    })
}

/// Flags of `s` mapped to the flag of `ngon` in the same Schubert cell
/// relative to `ngon.base()`.
///
/// Cells are matched by the four distances from the flag to `x_0` and `x_1`,
/// independently of the cell classification.
pub fn retraction(s: &IncidenceStructure, ngon: &OrdinaryNgon) -> Result<BTreeMap<Flag, Flag>> {
    require_polygon(s, ngon.n())?;
    let (a, b) = (ngon.x(0), ngon.x(1));
    let signature = |f: Flag| {
        [
            s.dist(a, f.point_ref()),
            s.dist(a, f.line_ref()),
            s.dist(b, f.point_ref()),
            s.dist(b, f.line_ref()),
        ]
    };
    let mut targets = HashMap::new();
    for f in ngon.flags() {
        if let Some(prev) = targets.insert(signature(f), f) {
            return Err(Error::integrity(
                format!("flags {prev} and {f} of the n-gon have equal distance signatures"),
                vec![ngon.vertices().to_vec()],
            ));
        }
    }
    s.flags()
        .iter()
        .map(|&f| {
            targets.get(&signature(f)).map(|&t| (f, t)).ok_or_else(|| {
                Error::integrity(
                    format!("{f} matches no flag of the n-gon"),
                    vec![vec![f.point_ref(), f.line_ref()]],
                )
            })
        })
        .collect()
}

/// One coordinate: an element of `V_anchor - {excluded}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Factor {
    pub anchor: VertexRef,
    pub excluded: VertexRef,
}

/// Coordinates on one cell.
#[derive(Clone, Debug, Serialize)]
pub struct CellChart {
    pub label: CellLabel,
    pub factors: Vec<Factor>,
    /// Members with their coordinate tuples, sorted by member.
    pub entries: Vec<(CellElement, Vec<VertexRef>)>,
}

/// Coordinate charts on every cell, relative to an ordinary n-gon.
#[derive(Clone, Debug, Serialize)]
pub struct Coordinatization {
    pub ngon: OrdinaryNgon,
    pub charts: Vec<CellChart>,
    #[serde(skip)]
    lookup: HashMap<CellElement, (usize, usize)>,
}

impl Coordinatization {
    pub fn coordinates(&self, element: CellElement) -> Option<&[VertexRef]> {
        self.lookup
            .get(&element)
            .map(|&(c, e)| self.charts[c].entries[e].1.as_slice())
    }

    pub fn chart_of(&self, element: CellElement) -> Option<&CellChart> {
        self.lookup.get(&element).map(|&(c, _)| &self.charts[c])
    }
}

/// Gallery length m, orientation, and the relabelled n-gon with `(x'_0, x'_1) = (u, v)`.
struct ChartFrame {
    m: usize,
    x: OrdinaryNgon,
    is_flag: bool,
}

impl ChartFrame {
    fn new(ngon: &OrdinaryNgon, label: CellLabel) -> ChartFrame {
        let orientation = label
            .orientation
            .unwrap_or_else(|| Orientation::starting_with(ngon.x(0).kind));
        ChartFrame {
            m: label.k,
            x: ngon.oriented(orientation),
            is_flag: label.carrier == Carrier::Flag,
        }
    }

    fn factors(&self) -> Vec<Factor> {
        let n = self.x.n();
        (2..=self.m + 1)
            .map(|j| Factor {
                anchor: self.x.x(n + j - 1),
                excluded: self.x.x(n + j),
            })
            .collect()
    }
}

/// `f_{n-1}`, with a domain failure reported as a broken n-gon.
fn f_top(s: &IncidenceStructure, x: VertexRef, y: VertexRef, n: usize) -> Result<VertexRef> {
    f_k(s, x, y, n - 1).map_err(|e| match e {
        Error::Domain(msg) => Error::integrity(msg, vec![vec![x, y]]),
        other => other,
    })
}

/// The proper gallery `(u, v, y_2, ..., y_{m+1})` ending at a cell element.
fn gallery_to(
    s: &IncidenceStructure,
    frame: &ChartFrame,
    element: CellElement,
) -> Result<Vec<VertexRef>> {
    let n = frame.x.n();
    let (u, v) = (frame.x.x(0), frame.x.x(1));
    let m = frame.m;
    let mut ys = vec![u];
    match element {
        CellElement::Flag(f) if frame.is_flag && m == 0 && Flag::from_pair(u, v) == Some(f) => {
            ys.push(v);
        }
        CellElement::Vertex(w) if !frame.is_flag => {
            ys.extend(minimal_chain(s, v, w, Some(n))?.chain.into_vertices());
        }
        CellElement::Flag(f) if frame.is_flag => {
            let (a, b) = (f.point_ref(), f.line_ref());
            let (near, far) = if s.dist(v, a) < s.dist(v, b) { (a, b) } else { (b, a) };
            ys.extend(minimal_chain(s, v, near, Some(n))?.chain.into_vertices());
            ys.push(far);
        }
        _ => return Err(Error::Argument(format!("{element} does not belong to this kind of cell"))),
    }
    if ys.len() != m + 2 || ys.windows(3).any(|w| w[0] == w[2]) {
        return Err(Error::Argument(format!(
            "{element} is not the end of a proper gallery of length {m} from ({u}, {v})"
        )));
    }
    Ok(ys)
}

fn forward(s: &IncidenceStructure, frame: &ChartFrame, element: CellElement) -> Result<Vec<VertexRef>> {
    let n = frame.x.n();
    let ys = gallery_to(s, frame, element)?;
    (2..=frame.m + 1)
        .map(|j| f_top(s, ys[j], frame.x.x(n + j - 1), n))
        .collect()
}

fn backward(s: &IncidenceStructure, frame: &ChartFrame, coords: &[VertexRef]) -> Result<CellElement> {
    let n = frame.x.n();
    if coords.len() != frame.m {
        return Err(Error::Argument(format!(
            "expected {} coordinates, got {}",
            frame.m,
            coords.len()
        )));
    }
    for (q, factor) in coords.iter().zip(frame.factors()) {
        if !s.incident(*q, factor.anchor) || *q == factor.excluded {
            return Err(Error::Domain(format!(
                "coordinate {q} is not in V_{} - {{{}}}",
                factor.anchor, factor.excluded
            )));
        }
    }
    let mut ys = vec![frame.x.x(0), frame.x.x(1)];
    for (j, &q) in (2..).zip(coords) {
        let prev = ys[j - 1];
        ys.push(f_top(s, q, prev, n)?);
    }
    let m = frame.m;
    Ok(if frame.is_flag {
        CellElement::Flag(Flag::from_pair(ys[m], ys[m + 1]).expect("adjacent"))
    } else {
        CellElement::Vertex(ys[m + 1])
    })
}

/// Coordinates of a single element of the cell `label`.
pub fn coordinates_of(
    s: &IncidenceStructure,
    ngon: &OrdinaryNgon,
    label: CellLabel,
    element: CellElement,
) -> Result<Vec<VertexRef>> {
    forward(s, &ChartFrame::new(ngon, label), element)
}

/// The element of the cell `label` with the given coordinates.
pub fn element_at(
    s: &IncidenceStructure,
    ngon: &OrdinaryNgon,
    label: CellLabel,
    coords: &[VertexRef],
) -> Result<CellElement> {
    backward(s, &ChartFrame::new(ngon, label), coords)
}

/// Charts on all cells relative to `ngon.base()`, each checked to be a
/// bijection onto the full product of its punctured factors.
pub fn coordinatize(s: &IncidenceStructure, ngon: &OrdinaryNgon) -> Result<Coordinatization> {
    let n = ngon.n();
    let dec = decompose(s, ngon.base(), n)?;
    let charts: Vec<CellChart> = dec
        .cells()
        .into_par_iter()
        .map(|(label, members)| build_chart(s, ngon, label, members))
        .collect::<Result<_>>()?;
    let mut lookup = HashMap::new();
    for (c, chart) in charts.iter().enumerate() {
        for (e, (element, _)) in chart.entries.iter().enumerate() {
            lookup.insert(*element, (c, e));
        }
    }
    Ok(Coordinatization {
        ngon: ngon.clone(),
        charts,
        lookup,
    })
}

fn build_chart(
    s: &IncidenceStructure,
    ngon: &OrdinaryNgon,
    label: CellLabel,
    members: Vec<CellElement>,
) -> Result<CellChart> {
    let frame = ChartFrame::new(ngon, label);
    let factors = frame.factors();
    let mut entries = Vec::with_capacity(members.len());
    let mut by_coords = HashMap::new();
    for element in members {
        let coords = forward(s, &frame, element)?;
        if backward(s, &frame, &coords)? != element {
            return Err(Error::integrity(
                format!("coordinates of {element} in {label} do not recover it"),
                vec![coords],
            ));
        }
        if let Some(prev) = by_coords.insert(coords.clone(), element) {
            return Err(Error::integrity(
                format!("{prev} and {element} share coordinates in {label}"),
                vec![coords],
            ));
        }
        entries.push((element, coords));
    }
    let product: usize = factors.iter().map(|f| s.degree(f.anchor) - 1).product();
    if product != entries.len() {
        return Err(Error::integrity(
            format!("{label} has {} members but its coordinate product has {product}", entries.len()),
            vec![],
        ));
    }
    for tuple in product_tuples(s, &factors) {
        let element = backward(s, &frame, &tuple)?;
        if by_coords.get(&tuple) != Some(&element) {
            return Err(Error::integrity(
                format!("tuple maps to {element}, which does not map back in {label}"),
                vec![tuple],
            ));
        }
    }
    Ok(CellChart {
        label,
        factors,
        entries,
    })
}

/// All tuples in `(V_a1 - {e1}) x ... x (V_am - {em})`, lexicographically.
fn product_tuples(s: &IncidenceStructure, factors: &[Factor]) -> Vec<Vec<VertexRef>> {
    let mut out = vec![Vec::new()];
    for factor in factors {
        let choices: Vec<VertexRef> = s
            .neighbors(factor.anchor)
            .iter()
            .copied()
            .filter(|&w| w != factor.excluded)
            .collect();
        out = out
            .into_iter()
            .flat_map(|t| {
                choices.iter().map(move |&w| {
                    let mut t = t.clone();
                    t.push(w);
                    t
                })
            })
            .collect();
    }
    out
}

/// A flag `{u, v}` separating a big-cell point from a smaller cell.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Separation {
    pub u: VertexRef,
    pub v: VertexRef,
    /// The constant value of `x -> f_{n-1}(x, v)` on the cell.
    pub z: VertexRef,
    /// The chain `(x_0, ..., x_{n-k})` that produced it.
    pub chain: Vec<VertexRef>,
}

/// Finds `(u, v)` with `q` and the whole point cell `P_k` in the big cell
/// `P_{n-1}(u, v)`, such that `f_{n-1}(-, v)` is constant on `P_k` with a
/// value different from `f_{n-1}(q, v)`.
///
/// Searches non-stammering chains from the base element at distance k from
/// the cell, staying at distance at least n-1 from `q`; the first chain in
/// lexicographic order whose end satisfies the conditions wins.
pub fn separate(
    s: &IncidenceStructure,
    dec: &SchubertDecomposition,
    q: VertexRef,
    k: usize,
) -> Result<Separation> {
    let n = dec.n;
    if !dec.big_point_cell().members.contains(&q) {
        return Err(Error::Argument(format!("{q} is not in the big point cell")));
    }
    if k + 1 >= n {
        return Err(Error::Argument(format!("cell P_{k} is not smaller than the big cell")));
    }
    let start = vertex_cell_center(dec.base, Carrier::Point, k);
    let mut path = vec![start];
    let mut found = None;
    separation_search(s, dec, q, k, n - k, &mut path, &mut found);
    found.ok_or_else(|| {
        Error::integrity(
            format!("no chain from {start} separates {q} from P_{k}"),
            vec![vec![q], dec.point_cells[k].members.clone()],
        )
    })
}

fn separation_search(
    s: &IncidenceStructure,
    dec: &SchubertDecomposition,
    q: VertexRef,
    k: usize,
    len: usize,
    path: &mut Vec<VertexRef>,
    found: &mut Option<Separation>,
) {
    let n = dec.n;
    if path.len() == len + 1 {
        let candidate = Separation {
            u: path[len],
            v: path[len - 1],
            z: path[len - 2],
            chain: path.clone(),
        };
        if check_separation(s, dec, q, k, &candidate) {
            *found = Some(candidate);
        }
        return;
    }
    let cur = *path.last().expect("nonempty");
    let prev = (path.len() >= 2).then(|| path[path.len() - 2]);
    for &w in s.neighbors(cur) {
        if Some(w) == prev || (s.dist(w, q) as usize) < n - 1 {
            continue;
        }
        path.push(w);
        separation_search(s, dec, q, k, len, path, found);
        path.pop();
        if found.is_some() {
            return;
        }
    }
}

/// The three conditions a separation must meet.
pub fn check_separation(
    s: &IncidenceStructure,
    dec: &SchubertDecomposition,
    q: VertexRef,
    k: usize,
    sep: &Separation,
) -> bool {
    let n = dec.n;
    let in_big_cell = |x: VertexRef| s.dist(sep.v, x) as usize == n - 1 && s.dist(sep.u, x) as usize == n;
    if !s.incident(sep.u, sep.v) || !in_big_cell(q) {
        return false;
    }
    let Some(cell) = dec.point_cells.get(k) else {
        return false;
    };
    let constant = cell
        .members
        .iter()
        .all(|&c| in_big_cell(c) && f_k(s, c, sep.v, n - 1).ok() == Some(sep.z));
    constant && f_k(s, q, sep.v, n - 1).is_ok_and(|w| w != sep.z)
}

/// `perp(x) - {x}` split into fibers of `y -> f_2(x, y)`, keyed by the joining element.
pub fn perp_fibration(
    s: &IncidenceStructure,
    x: VertexRef,
    n: usize,
) -> Result<BTreeMap<VertexRef, Vec<VertexRef>>> {
    require_polygon(s, n)?;
    if n < 3 {
        return Err(Error::Precondition(format!("perp fibration needs n >= 3, got {n}")));
    }
    let mut fibers: BTreeMap<VertexRef, Vec<VertexRef>> = BTreeMap::new();
    for y in s.perp(x)? {
        if y != x {
            fibers.entry(f_k(s, x, y, 2)?).or_default().push(y);
        }
    }
    Ok(fibers)
}

/// The smallest flag whose big cell (of the kind of `a`) contains both `a` and `b`.
pub fn common_big_cell(s: &IncidenceStructure, n: usize, a: VertexRef, b: VertexRef) -> Option<Flag> {
    if a.kind != b.kind {
        return None;
    }
    let far = |f: Flag, x: VertexRef| {
        s.dist(f.point_ref(), x).min(s.dist(f.line_ref(), x)) as usize == n - 1
    };
    s.flags().iter().copied().find(|&f| far(f, a) && far(f, b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::{dihedral_ngon, projective_plane, symplectic_quadrangle};

    #[test]
    fn w2_cell_sizes() {
        let s = symplectic_quadrangle(2).unwrap();
        let dec = decompose(&s, Flag::new(0, 0), 4).unwrap();
        let sizes = dec.sizes();
        assert_eq!(sizes.points, vec![1, 2, 4, 8]);
        assert_eq!(sizes.lines, vec![1, 2, 4, 8]);
        assert_eq!(sizes.flags, vec![1, 2, 2, 4, 4, 8, 8, 16]);
    }

    #[test]
    fn plane_cells_are_point_row_and_complement() {
        let s = projective_plane(2).unwrap();
        let base = Flag::new(0, 0);
        let dec = decompose(&s, base, 3).unwrap();
        assert_eq!(dec.sizes().points, vec![1, 2, 4]);
        assert_eq!(dec.sizes().flags, vec![1, 2, 2, 4, 4, 8]);
        assert_eq!(dec.point_cells[0].members, vec![base.point_ref()]);
        let row: BTreeSet<_> = s.point_row(base.line_ref()).unwrap().iter().copied().collect();
        let p1: BTreeSet<_> = dec.point_cells[1].members.iter().copied().collect();
        let expected: BTreeSet<_> = row.iter().copied().filter(|&x| x != base.point_ref()).collect();
        assert_eq!(p1, expected);
    }

    #[test]
    fn thin_polygon_cells_are_singletons() {
        for n in 3..7 {
            let s = dihedral_ngon(n).unwrap();
            let dec = decompose(&s, Flag::new(0, 0), n).unwrap();
            let sizes = dec.sizes();
            assert_eq!(sizes.points, vec![1; n]);
            assert_eq!(sizes.flags, vec![1; 2 * n]);
        }
    }

    #[test]
    fn decompose_rejects_wrong_n_and_non_flags() {
        let s = projective_plane(2).unwrap();
        assert!(matches!(decompose(&s, Flag::new(0, 0), 4), Err(Error::Precondition(_))));
        let bad = (0..7).map(|l| Flag::new(0, l)).find(|&f| !s.is_flag(f)).unwrap();
        assert!(matches!(decompose(&s, bad, 3), Err(Error::Argument(_))));
    }

    #[test]
    fn varieties_match_balls() {
        let s = symplectic_quadrangle(2).unwrap();
        let dec = decompose(&s, Flag::new(0, 0), 4).unwrap();
        let var = varieties(&s, &dec).unwrap();
        let p = VertexRef::point(0);
        assert_eq!(var.points[2].len(), s.perp(p).unwrap().len());
        assert_eq!(var.points[3].len(), s.point_count());
        assert_eq!(var.flags.last().unwrap().1.len(), s.flag_count());
    }

    #[test]
    fn ngons_through_w2_base() {
        let s = symplectic_quadrangle(2).unwrap();
        let all = ngons_through(&s, Flag::new(0, 0), 4, None).unwrap();
        // x_2..x_5 have two choices each; x_6 and x_7 are then forced
        assert_eq!(all.len(), 16);
        assert!(all.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(default_ngon(&s, Flag::new(0, 0), 4).unwrap(), all[0]);
    }

    #[test]
    fn ngon_relabelling() {
        let s = projective_plane(2).unwrap();
        let x = default_ngon(&s, Flag::new(0, 0), 3).unwrap();
        let y = x.swapped();
        assert_eq!(y.x(0), x.x(1));
        assert_eq!(y.x(1), x.x(0));
        assert_eq!(y.x(2), x.x(5));
        assert_eq!(y.swapped(), x);
        assert_eq!(y.base(), x.base());
        assert!(OrdinaryNgon::new(&s, y.vertices().to_vec()).is_ok());
        let mut broken = x.vertices().to_vec();
        broken.swap(2, 4);
        assert!(OrdinaryNgon::new(&s, broken).is_err());
    }

    #[test]
    fn retraction_fixes_ngon_flags() {
        let s = projective_plane(2).unwrap();
        let x = default_ngon(&s, Flag::new(0, 0), 3).unwrap();
        let r = retraction(&s, &x).unwrap();
        for f in x.flags() {
            assert_eq!(r[&f], f);
        }
        let mut sizes: Vec<usize> = x
            .flags()
            .iter()
            .map(|t| r.values().filter(|&&v| v == *t).count())
            .collect();
        sizes.sort_unstable();
        assert_eq!(sizes, vec![1, 2, 2, 4, 4, 8]);
    }

    #[test]
    fn w2_big_point_cell_chart() {
        let s = symplectic_quadrangle(2).unwrap();
        let x = default_ngon(&s, Flag::new(0, 0), 4).unwrap();
        let c = coordinatize(&s, &x).unwrap();
        let big = c
            .charts
            .iter()
            .find(|ch| ch.label.carrier == Carrier::Point && ch.label.k == 3)
            .unwrap();
        assert_eq!(big.factors.len(), 3);
        assert_eq!(big.entries.len(), 8);
        let p1 = c
            .charts
            .iter()
            .find(|ch| ch.label.carrier == Carrier::Point && ch.label.k == 1)
            .unwrap();
        assert_eq!(p1.factors.len(), 1);
        assert_eq!(p1.entries.len(), 2);
    }

    #[test]
    fn element_at_rejects_excluded_coordinate() {
        let s = symplectic_quadrangle(2).unwrap();
        let x = default_ngon(&s, Flag::new(0, 0), 4).unwrap();
        let label = CellLabel {
            carrier: Carrier::Point,
            k: 1,
            orientation: Some(Orientation::PointLine),
        };
        let c = coordinatize(&s, &x).unwrap();
        let factor = c.charts.iter().find(|ch| ch.label == label).unwrap().factors[0];
        assert!(matches!(
            element_at(&s, &x, label, &[factor.excluded]),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn separate_on_w2() {
        let s = symplectic_quadrangle(2).unwrap();
        let dec = decompose(&s, Flag::new(0, 0), 4).unwrap();
        for &q in &dec.big_point_cell().members {
            for k in 0..3 {
                let sep = separate(&s, &dec, q, k).unwrap();
                assert!(check_separation(&s, &dec, q, k, &sep), "q={q} k={k}");
            }
        }
        let q = dec.point_cells[1].members[0];
        assert!(separate(&s, &dec, q, 0).is_err());
    }

    #[test]
    fn perp_fibers() {
        let s = symplectic_quadrangle(2).unwrap();
        let fibers = perp_fibration(&s, VertexRef::point(0), 4).unwrap();
        assert_eq!(fibers.len(), 3);
        assert!(fibers.values().all(|f| f.len() == 2));
        let pg = projective_plane(3).unwrap();
        let fibers = perp_fibration(&pg, VertexRef::point(0), 3).unwrap();
        assert_eq!(fibers.len(), 4);
        assert!(fibers.values().all(|f| f.len() == 3));
        let thin = dihedral_ngon(5).unwrap();
        let fibers = perp_fibration(&thin, VertexRef::line(2), 5).unwrap();
        assert!(fibers.values().all(|f| f.len() == 1));
    }
}
