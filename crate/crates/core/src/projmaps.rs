//! Perspectivities, projectivities and the groups of projectivities `Pi(x)`.
//!
//! A projectivity is written in bracket order `[z_k, ..., z_1, z_0]`: it maps
//! `V_{z_0}` to `V_{z_k}` and consecutive entries are opposite.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;

use rayon::prelude::*;
use serde::Serialize;

use crate::chains::f_k;
use crate::error::{Error, Result};
use crate::incidence::{IncidenceStructure, VertexRef};
use crate::verify::{lemma_vertex, require_polygon};

/// Default bound on the size of an enumerated group.
pub const DEFAULT_GROUP_CAP: usize = 1_000_000;

/// A bijection `V_source -> V_target` with the path that realizes it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Projectivity {
    /// Bracket order: `path[0]` is the target, the last entry the source.
    path: Vec<VertexRef>,
    /// `V_source`, sorted.
    domain: Vec<VertexRef>,
    /// `image[i]` is the image of `domain[i]`.
    image: Vec<VertexRef>,
}

impl Projectivity {
    pub fn source(&self) -> VertexRef {
        *self.path.last().expect("nonempty path")
    }

    pub fn target(&self) -> VertexRef {
        self.path[0]
    }

    pub fn path(&self) -> &[VertexRef] {
        &self.path
    }

    pub fn domain(&self) -> &[VertexRef] {
        &self.domain
    }

    pub fn apply(&self, z: VertexRef) -> Option<VertexRef> {
        self.domain.binary_search(&z).ok().map(|i| self.image[i])
    }

    pub fn pairs(&self) -> impl Iterator<Item = (VertexRef, VertexRef)> + '_ {
        self.domain.iter().copied().zip(self.image.iter().copied())
    }

    pub fn is_identity(&self) -> bool {
        self.domain == self.image
    }

    /// The permutation of `V_x` for a closed projectivity.
    pub fn to_permutation(&self) -> Option<Permutation> {
        if self.source() != self.target() {
            return None;
        }
        Some(Permutation(
            self.image
                .iter()
                .map(|w| self.domain.binary_search(w).expect("closed projectivity"))
                .collect(),
        ))
    }
}

impl fmt::Display for Projectivity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.path.iter().map(ToString::to_string).collect();
        write!(f, "[{}]", parts.join(","))
    }
}

/// `[y, x]`: `z -> f_{n-1}(z, y)` on `V_x`.
pub fn perspectivity(s: &IncidenceStructure, x: VertexRef, y: VertexRef, n: usize) -> Result<Projectivity> {
    let d = s.distance(x, y)?;
    if d != n {
        return Err(Error::Domain(format!(
            "perspectivity [{y},{x}] needs opposite vertices, distance is {d}"
        )));
    }
    let domain = s.neighbors(x).to_vec();
    let image = domain
        .iter()
        .map(|&z| f_k(s, z, y, n - 1))
        .collect::<Result<Vec<_>>>()?;
    Ok(Projectivity {
        path: vec![y, x],
        domain,
        image,
    })
}

/// The projectivity `[z_k, ..., z_0]`.
pub fn from_path(s: &IncidenceStructure, path: &[VertexRef], n: usize) -> Result<Projectivity> {
    let (&source, _) = path
        .split_last()
        .ok_or_else(|| Error::Argument("a projectivity needs a nonempty path".into()))?;
    s.check_vertex(source)?;
    let mut acc = identity(s, source);
    for w in path.windows(2).rev() {
        acc = compose(&perspectivity(s, w[1], w[0], n)?, &acc)?;
    }
    Ok(acc)
}

/// The identity on `V_x`, with path `[x]`.
pub fn identity(s: &IncidenceStructure, x: VertexRef) -> Projectivity {
    let domain = s.neighbors(x).to_vec();
    Projectivity {
        path: vec![x],
        image: domain.clone(),
        domain,
    }
}

/// `a o b`: first `b`, then `a`.
pub fn compose(a: &Projectivity, b: &Projectivity) -> Result<Projectivity> {
    if a.source() != b.target() {
        return Err(Error::Argument(format!(
            "cannot compose {a} after {b}: {} != {}",
            a.source(),
            b.target()
        )));
    }
    let image = b
        .image
        .iter()
        .map(|&w| a.apply(w).expect("V_target of b is the domain of a"))
        .collect();
    let mut path = a.path.clone();
    path.extend_from_slice(&b.path[1..]);
    Ok(Projectivity {
        path,
        domain: b.domain.clone(),
        image,
    })
}

pub fn invert(a: &Projectivity) -> Projectivity {
    let mut pairs: Vec<(VertexRef, VertexRef)> = a.pairs().map(|(x, y)| (y, x)).collect();
    pairs.sort_unstable();
    let (domain, image) = pairs.into_iter().unzip();
    Projectivity {
        path: a.path.iter().rev().copied().collect(),
        domain,
        image,
    }
}

/// A projectivity `V_x -> V_y`.
///
/// Same kinds: `[y, z, x]` with `z` opposite both. Different kinds (odd n
/// only): `[y, y', z, x]` through an opposite `y'` of `y`.
pub fn connecting_projectivity(
    s: &IncidenceStructure,
    x: VertexRef,
    y: VertexRef,
    n: usize,
) -> Result<Projectivity> {
    require_polygon(s, n)?;
    s.check_vertex(x)?;
    s.check_vertex(y)?;
    if x.kind == y.kind {
        let z = lemma_vertex(s, x, y, n).ok_or_else(|| {
            Error::integrity(format!("no vertex is opposite both {x} and {y}"), vec![vec![x, y]])
        })?;
        return from_path(s, &[y, z, x], n);
    }
    if n.is_multiple_of(2) {
        return Err(Error::Unsupported(format!(
            "{x} and {y} have different kinds and n = {n} is even"
        )));
    }
    let y_opp = *s
        .opposites(y, n)?
        .first()
        .ok_or_else(|| Error::integrity(format!("{y} has no opposite vertex"), vec![vec![y]]))?;
    let inner = connecting_projectivity(s, x, y_opp, n)?;
    compose(&perspectivity(s, y_opp, y, n)?, &inner)
}

/// A permutation of `0..degree`; entry `i` is the image of `i`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct Permutation(pub Vec<usize>);

impl Permutation {
    pub fn identity(degree: usize) -> Self {
        Permutation((0..degree).collect())
    }

    pub fn degree(&self) -> usize {
        self.0.len()
    }

    pub fn apply(&self, i: usize) -> usize {
        self.0[i]
    }

    /// `self o other`: first `other`.
    pub fn after(&self, other: &Permutation) -> Permutation {
        Permutation(other.0.iter().map(|&i| self.0[i]).collect())
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0; self.0.len()];
        for (i, &j) in self.0.iter().enumerate() {
            inv[j] = i;
        }
        Permutation(inv)
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().enumerate().all(|(i, &j)| i == j)
    }
}

/// The closure of a set of permutations under composition.
///
/// Fails with a resource error once more than `cap` elements are found.
pub fn generate_group(degree: usize, generators: &[Permutation], cap: usize) -> Result<Vec<Permutation>> {
    if let Some(g) = generators.iter().find(|g| g.degree() != degree) {
        return Err(Error::Argument(format!(
            "generator of degree {} in a group of degree {degree}",
            g.degree()
        )));
    }
    let id = Permutation::identity(degree);
    let mut seen: HashSet<Permutation> = HashSet::from([id.clone()]);
    let mut frontier = vec![id];
    while !frontier.is_empty() {
        let products: Vec<Permutation> = frontier
            .par_iter()
            .flat_map_iter(|h| generators.iter().map(move |g| g.after(h)))
            .collect();
        frontier = Vec::new();
        for p in products {
            if seen.insert(p.clone()) {
                if seen.len() > cap {
                    return Err(Error::Resource {
                        what: "permutation group closure".into(),
                        cap,
                        reached: seen.len(),
                    });
                }
                frontier.push(p);
            }
        }
    }
    let mut elements: Vec<Permutation> = seen.into_iter().collect();
    elements.sort_unstable();
    Ok(elements)
}

/// Orbit of the tuple `(0, 1, ..., k-1)`.
fn tuple_orbit_size(elements: &[Permutation], k: usize) -> usize {
    let start: Vec<usize> = (0..k).collect();
    let orbit: HashSet<Vec<usize>> = elements
        .iter()
        .map(|g| start.iter().map(|&i| g.apply(i)).collect())
        .collect();
    orbit.len()
}

fn falling_factorial(d: usize, k: usize) -> usize {
    (d + 1 - k..=d).product()
}

/// Transitive on ordered k-tuples of distinct letters. `elements` must be a group.
pub fn is_k_transitive(elements: &[Permutation], degree: usize, k: usize) -> bool {
    if k > degree {
        return false;
    }
    k == 0 || tuple_orbit_size(elements, k) == falling_factorial(degree, k)
}

/// k-transitive with trivial stabilizer of a k-tuple.
pub fn is_sharply_k_transitive(elements: &[Permutation], degree: usize, k: usize) -> bool {
    is_k_transitive(elements, degree, k) && elements.len() == falling_factorial(degree, k)
}

/// One orbit on ordered pairs of distinct letters (so at least two letters).
pub fn check_doubly_transitive(elements: &[Permutation], degree: usize) -> bool {
    degree >= 2 && is_k_transitive(elements, degree, 2)
}

/// The largest k for which the group is k-transitive.
pub fn transitivity_degree(elements: &[Permutation], degree: usize) -> usize {
    (1..=degree)
        .take_while(|&k| is_k_transitive(elements, degree, k))
        .last()
        .unwrap_or(0)
}

#[derive(Clone, Debug, Serialize)]
pub struct Generator {
    /// Bracket-order path of a closed projectivity at the base vertex.
    pub word: Vec<VertexRef>,
    pub permutation: Permutation,
}

/// `Pi(x)` acting on `V_x`.
#[derive(Clone, Debug, Serialize)]
pub struct ProjectivityGroup {
    pub at: VertexRef,
    /// `V_x`, sorted; permutations act on indices into it.
    pub carrier: Vec<VertexRef>,
    pub order: usize,
    pub generators: Vec<Generator>,
    pub transitivity: usize,
    /// Some k when the action is sharply k-transitive.
    pub sharply: Option<usize>,
    #[serde(skip)]
    pub elements: Vec<Permutation>,
}

/// Enumerates `Pi(x)`.
///
/// Generators come from a spanning tree of the opposition graph rooted at `x`:
/// with `t_a` the tree projectivity `V_x -> V_a`, each non-tree opposite pair
/// `{a, b}` gives `t_b^-1 [b, a] t_a`. These generate every closed projectivity.
pub fn projectivity_group(
    s: &IncidenceStructure,
    x: VertexRef,
    n: usize,
    cap: usize,
) -> Result<ProjectivityGroup> {
    require_polygon(s, n)?;
    s.check_vertex(x)?;
    let mut tree: HashMap<VertexRef, Projectivity> = HashMap::from([(x, identity(s, x))]);
    let mut order = vec![x];
    let mut parent: HashMap<VertexRef, VertexRef> = HashMap::new();
    let mut queue = VecDeque::from([x]);
    while let Some(a) = queue.pop_front() {
        for b in s.opposites(a, n)? {
            if tree.contains_key(&b) {
                continue;
            }
            let step = compose(&perspectivity(s, a, b, n)?, &tree[&a])?;
            tree.insert(b, step);
            parent.insert(b, a);
            order.push(b);
            queue.push_back(b);
        }
    }

    let mut generators: Vec<Generator> = Vec::new();
    let mut seen: HashSet<Permutation> = HashSet::new();
    for &a in &order {
        for b in s.opposites(a, n)? {
            if a >= b || parent.get(&b) == Some(&a) || parent.get(&a) == Some(&b) {
                continue;
            }
            let loop_ = compose(
                &invert(&tree[&b]),
                &compose(&perspectivity(s, a, b, n)?, &tree[&a])?,
            )?;
            let permutation = loop_.to_permutation().expect("closed at x");
            if !permutation.is_identity() && seen.insert(permutation.clone()) {
                generators.push(Generator {
                    word: loop_.path,
                    permutation,
                });
            }
        }
    }

    let carrier = s.neighbors(x).to_vec();
    let degree = carrier.len();
    let gens: Vec<Permutation> = generators.iter().map(|g| g.permutation.clone()).collect();
    let elements = generate_group(degree, &gens, cap)?;
    let transitivity = transitivity_degree(&elements, degree);
    let sharply = (transitivity > 0 && is_sharply_k_transitive(&elements, degree, transitivity))
        .then_some(transitivity);
    Ok(ProjectivityGroup {
        at: x,
        carrier,
        order: elements.len(),
        generators,
        transitivity,
        sharply,
        elements,
    })
}
