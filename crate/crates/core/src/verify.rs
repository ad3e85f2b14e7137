//! Axiom verification for generalized and partial n-gons.
//!
//! Two independent routes decide whether a structure is a generalized
//! n-gon: the axioms themselves (no ordinary k-gons for k < n, every pair of
//! vertices on an ordinary n-gon, thickness) and the graph criterion (thick,
//! girth 2n, diameter n). Reports carry both and whether they agree.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::chains::{complete_to_ngon, find_ordinary_ngon, Chain};
use crate::error::{Error, Result};
use crate::incidence::{Check, Distance, IncidenceStructure, Kind, VertexRef};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Verdict {
    GeneralizedNGon,
    PartialNGonOnly,
    Fails,
}

/// A named rule violation with the vertices that exhibit it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub rule: String,
    pub vertices: Vec<VertexRef>,
}

impl Witness {
    fn new(rule: &str, vertices: Vec<VertexRef>) -> Self {
        Witness {
            rule: rule.to_string(),
            vertices,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Orders {
    /// Every point row has s+1 points and every pencil t+1 lines.
    Regular { s: usize, t: usize },
    Irregular {
        /// row size -> number of lines with that many points
        row_sizes: BTreeMap<usize, usize>,
        /// pencil size -> number of points with that many lines
        pencil_sizes: BTreeMap<usize, usize>,
        deviating: Vec<VertexRef>,
        note: String,
    },
}

#[derive(Clone, Debug, Serialize)]
pub struct VerificationReport {
    pub structure_id: String,
    pub n: usize,
    pub verdict: Verdict,
    pub girth: Distance,
    pub diameter: Distance,
    pub thick: bool,
    pub orders: Orders,
    pub no_short_gons: bool,
    pub pairs_on_ngons: bool,
    /// Verdict of the thick + girth 2n + diameter n criterion.
    pub graph_criterion: bool,
    pub criteria_agree: bool,
    pub witnesses: Vec<Witness>,
}

/// Stable FNV-1a fingerprint of the counts and flag list.
pub fn structure_id(s: &IncidenceStructure) -> String {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    let mut eat = |x: usize| {
        for b in (x as u64).to_le_bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
    };
    eat(s.point_count());
    eat(s.line_count());
    for f in s.flags() {
        eat(f.point);
        eat(f.line);
    }
    format!(
        "P{}-L{}-F{}-{h:016x}",
        s.point_count(),
        s.line_count(),
        s.flag_count()
    )
}

/// No ordinary k-gons for 2 <= k < n, i.e. girth at least 2n. On failure the
/// witness is a shortest cycle, which is an ordinary (girth/2)-gon.
pub fn verify_partial_ngon(s: &IncidenceStructure, n: usize) -> Check<Chain> {
    if n <= 2 {
        return Check::Pass;
    }
    match s.girth() {
        Distance::Finite(g) if g < 2 * n => {
            let cycle = s.shortest_cycle().expect("finite girth").to_vec();
            Check::Fail(Chain::new(s, cycle).expect("cycle is a chain"))
        }
        _ => Check::Pass,
    }
}

/// Row and pencil sizes; for odd `n` also demands s = t.
pub fn infer_orders(s: &IncidenceStructure, n: Option<usize>) -> Orders {
    let histogram = |it: &mut dyn Iterator<Item = VertexRef>| {
        let mut h = BTreeMap::new();
        for v in it {
            *h.entry(s.degree(v)).or_insert(0) += 1;
        }
        h
    };
    let row_sizes: BTreeMap<usize, usize> = histogram(&mut s.lines());
    let pencil_sizes: BTreeMap<usize, usize> = histogram(&mut s.points());
    if row_sizes.len() == 1 && pencil_sizes.len() == 1 {
        let row = *row_sizes.keys().next().expect("nonempty");
        let pencil = *pencil_sizes.keys().next().expect("nonempty");
        if row > 0 && pencil > 0 {
            let (order_s, order_t) = (row - 1, pencil - 1);
            if n.is_some_and(|n| n % 2 == 1) && order_s != order_t {
                return Orders::Irregular {
                    row_sizes,
                    pencil_sizes,
                    deviating: Vec::new(),
                    note: format!("odd n forces s = t, found s = {order_s}, t = {order_t}"),
                };
            }
            return Orders::Regular {
                s: order_s,
                t: order_t,
            };
        }
    }
    // most common size wins, smaller size on ties
    let mode = |h: &BTreeMap<usize, usize>| {
        h.iter()
            .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0)))
            .map(|(&size, _)| size)
            .unwrap_or(0)
    };
    let row_mode = mode(&row_sizes);
    let pencil_mode = mode(&pencil_sizes);
    let deviating = s
        .vertices()
        .filter(|&v| {
            let expected = if v.kind == Kind::Line { row_mode } else { pencil_mode };
            s.degree(v) != expected
        })
        .collect();
    Orders::Irregular {
        row_sizes,
        pencil_sizes,
        deviating,
        note: "point rows or pencils differ in size".into(),
    }
}

/// The graph criterion: thick, girth 2n, diameter n.
pub fn graph_criterion(s: &IncidenceStructure, n: usize) -> bool {
    s.is_thick().passed() && s.girth() == 2 * n && s.diameter() == n
}

/// Proposes n = diameter when girth = 2 * diameter.
pub fn infer_gon(s: &IncidenceStructure) -> Option<usize> {
    match (s.girth(), s.diameter()) {
        (Distance::Finite(g), Distance::Finite(d)) if g == 2 * d && d >= 2 => Some(d),
        _ => None,
    }
}

/// Girth 2n, diameter n and every vertex on at least two others: an n-gon,
/// possibly thin. The Schubert machinery only needs this much.
pub fn require_polygon(s: &IncidenceStructure, n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::Precondition(format!("n = {n} is too small")));
    }
    if s.girth() != 2 * n || s.diameter() != n {
        return Err(Error::Precondition(format!(
            "not an n-gon for n = {n}: girth {}, diameter {}",
            s.girth(),
            s.diameter()
        )));
    }
    if let Some(v) = s.vertices().find(|&v| s.degree(v) < 2) {
        return Err(Error::Precondition(format!("{v} lies on fewer than two elements")));
    }
    Ok(())
}

/// Thick n-gon (girth 2n, diameter n).
pub fn require_generalized(s: &IncidenceStructure, n: usize) -> Result<()> {
    require_polygon(s, n)?;
    if let Check::Fail(v) = s.is_thick() {
        return Err(Error::Precondition(format!("not thick at {v}")));
    }
    Ok(())
}

/// Full check of the generalized n-gon axioms, every vertex pair included.
pub fn verify_generalized_ngon(s: &IncidenceStructure, n: usize) -> Result<VerificationReport> {
    if n < 3 {
        return Err(Error::Argument(format!(
            "generalized n-gons are checked for n >= 3, got {n}"
        )));
    }
    let mut witnesses = Vec::new();

    let thick_check = s.is_thick();
    if let Check::Fail(v) = thick_check {
        witnesses.push(Witness::new("thickness: fewer than 3 incident elements", vec![v]));
    }
    let partial = verify_partial_ngon(s, n);
    if let Check::Fail(c) = &partial {
        witnesses.push(Witness::new(
            &format!("axiom (i): ordinary {}-gon", c.len() / 2),
            c.vertices().to_vec(),
        ));
    }
    let missing = pair_without_ngon(s, n, partial.passed());
    if let Some((x, y)) = missing {
        witnesses.push(Witness::new(
            "axiom (ii): no ordinary n-gon through the pair",
            vec![x, y],
        ));
    }
    let girth = s.girth();
    let diameter = s.diameter();
    if let Some((x, y)) = s.unreachable_pair() {
        witnesses.push(Witness::new("disconnected pair", vec![x, y]));
    }

    let thick = thick_check.passed();
    let no_short_gons = partial.passed();
    let pairs_on_ngons = missing.is_none();
    let verdict = if thick && no_short_gons && pairs_on_ngons {
        Verdict::GeneralizedNGon
    } else if no_short_gons && thick {
        Verdict::PartialNGonOnly
    } else {
        Verdict::Fails
    };
    let graph = thick && girth == 2 * n && diameter == n;
    Ok(VerificationReport {
        structure_id: structure_id(s),
        n,
        verdict,
        girth,
        diameter,
        thick,
        orders: infer_orders(s, Some(n)),
        no_short_gons,
        pairs_on_ngons,
        graph_criterion: graph,
        criteria_agree: graph == (verdict == Verdict::GeneralizedNGon),
        witnesses,
    })
}

/// Smallest pair (x <= y) not contained in a common ordinary n-gon.
fn pair_without_ngon(s: &IncidenceStructure, n: usize, partial: bool) -> Option<(VertexRef, VertexRef)> {
    let vertices: Vec<VertexRef> = s.vertices().collect();
    // warm the distance cache once per source before fanning out
    vertices.par_iter().for_each(|&v| {
        let _ = s.distance_table(v);
    });
    vertices
        .par_iter()
        .enumerate()
        .filter_map(|(i, &x)| {
            vertices[i..].iter().find_map(|&y| {
                let fast = if partial {
                    complete_to_ngon(s, x, y, n).ok().flatten()
                } else {
                    None
                };
                let found = fast.is_some()
                    || find_ordinary_ngon(s, x, y, n).ok().flatten().is_some();
                (!found).then_some((x, y))
            })
        })
        .min()
}

/// A vertex opposite both `x` and `y` (same kind), or opposite `x` at
/// distance n-1 from `y` (different kinds). Smallest such vertex.
pub fn lemma_vertex(s: &IncidenceStructure, x: VertexRef, y: VertexRef, n: usize) -> Option<VertexRef> {
    let target_y = if x.kind == y.kind { n } else { n - 1 };
    let dx = s.table(x);
    let dy = s.table(y);
    s.vertices()
        .find(|&z| dx.get(z) == n && dy.get(z) == target_y)
}

/// Exhaustive check of the opposite-vertex lemma over all ordered pairs.
pub fn check_opposite_lemma(s: &IncidenceStructure, n: usize) -> Result<Check<(VertexRef, VertexRef)>> {
    require_generalized(s, n)?;
    let vertices: Vec<VertexRef> = s.vertices().collect();
    let failure = vertices
        .par_iter()
        .filter_map(|&x| {
            vertices
                .iter()
                .find(|&&y| lemma_vertex(s, x, y, n).is_none())
                .map(|&y| (x, y))
        })
        .min();
    Ok(match failure {
        None => Check::Pass,
        Some(pair) => Check::Fail(pair),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::{dihedral_ngon, projective_plane, symplectic_quadrangle};

    #[test]
    fn partial_ngon_checks() {
        let w2 = symplectic_quadrangle(2).unwrap();
        assert!(verify_partial_ngon(&w2, 4).passed());
        let pg = projective_plane(2).unwrap();
        match verify_partial_ngon(&pg, 4) {
            Check::Fail(c) => assert_eq!(c.len(), 6),
            Check::Pass => panic!("PG(2,2) has triangles"),
        }
        assert!(verify_partial_ngon(&pg, 2).passed());
    }

    #[test]
    fn pg22_is_a_projective_plane() {
        let s = projective_plane(2).unwrap();
        let r = verify_generalized_ngon(&s, 3).unwrap();
        assert_eq!(r.verdict, Verdict::GeneralizedNGon);
        assert_eq!(r.orders, Orders::Regular { s: 2, t: 2 });
        assert!(r.criteria_agree);
        assert!(r.witnesses.is_empty());
    }

    #[test]
    fn pg22_fails_as_quadrangle() {
        let s = projective_plane(2).unwrap();
        let r = verify_generalized_ngon(&s, 4).unwrap();
        assert_eq!(r.verdict, Verdict::Fails);
        assert!(!r.no_short_gons);
        let w = r.witnesses.iter().find(|w| w.rule.starts_with("axiom (i)")).unwrap();
        assert_eq!(w.vertices.len(), 7);
        assert!(r.criteria_agree);
    }

    #[test]
    fn thin_ngon_fails_thickness_only() {
        let s = dihedral_ngon(5).unwrap();
        let r = verify_generalized_ngon(&s, 5).unwrap();
        assert_eq!(r.verdict, Verdict::Fails);
        assert!(!r.thick);
        assert!(r.no_short_gons && r.pairs_on_ngons);
        assert_eq!(r.girth, 10);
        assert_eq!(r.diameter, 5);
    }

    #[test]
    fn digons_rejected() {
        let s = projective_plane(2).unwrap();
        assert!(matches!(verify_generalized_ngon(&s, 2), Err(Error::Argument(_))));
    }

    #[test]
    fn orders() {
        assert_eq!(
            infer_orders(&symplectic_quadrangle(2).unwrap(), Some(4)),
            Orders::Regular { s: 2, t: 2 }
        );
        assert_eq!(
            infer_orders(&projective_plane(3).unwrap(), Some(3)),
            Orders::Regular { s: 3, t: 3 }
        );
        // one fat line through all three points, plus two thin ones
        let fat = IncidenceStructure::new(3, 3, [(0, 0), (1, 0), (2, 0), (0, 1), (1, 1), (1, 2), (2, 2)]).unwrap();
        match infer_orders(&fat, None) {
            Orders::Irregular { deviating, .. } => {
                assert!(deviating.contains(&VertexRef::line(0)));
            }
            other => panic!("expected irregular, got {other:?}"),
        }
    }

    #[test]
    fn odd_n_demands_equal_orders() {
        // K_{2,3}: every line has 2 points, every point lies on 3 lines
        let s = IncidenceStructure::new(2, 3, (0..2).flat_map(|p| (0..3).map(move |l| (p, l)))).unwrap();
        assert!(matches!(infer_orders(&s, Some(3)), Orders::Irregular { .. }));
        assert!(matches!(infer_orders(&s, Some(4)), Orders::Regular { s: 1, t: 2 }));
    }

    #[test]
    fn opposite_lemma() {
        for (s, n) in [
            (projective_plane(2).unwrap(), 3),
            (symplectic_quadrangle(2).unwrap(), 4),
        ] {
            assert!(check_opposite_lemma(&s, n).unwrap().passed());
            let x = VertexRef::point(0);
            let z = lemma_vertex(&s, x, x, n).unwrap();
            assert!(s.opposites(x, n).unwrap().contains(&z));
        }
        assert!(matches!(
            check_opposite_lemma(&dihedral_ngon(4).unwrap(), 4),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn gon_inference() {
        assert_eq!(infer_gon(&projective_plane(2).unwrap()), Some(3));
        assert_eq!(infer_gon(&symplectic_quadrangle(2).unwrap()), Some(4));
        assert_eq!(infer_gon(&dihedral_ngon(6).unwrap()), Some(6));
    }

    #[test]
    fn structure_ids_are_stable() {
        let a = structure_id(&projective_plane(2).unwrap());
        let b = structure_id(&projective_plane(2).unwrap());
        assert_eq!(a, b);
        assert!(a.starts_with("P7-L7-F21-"));
        assert_ne!(a, structure_id(&projective_plane(3).unwrap()));
    }
}
