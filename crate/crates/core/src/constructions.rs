//! Builders for the classical and synthetic test geometries.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::error::{Error, Result};
use crate::field::PrimeField;
use crate::group::FiniteGroupTable;
use crate::incidence::{IncidenceStructure, VertexRef};

/// Coset geometry `(G/A, G/B)`: cosets are incident when they intersect.
///
/// Points and lines are the left cosets ordered by their smallest element.
pub fn coset_geometry(
    group: &FiniteGroupTable,
    a: &[usize],
    b: &[usize],
) -> Result<IncidenceStructure> {
    let a = group.subgroup(a)?;
    let b = group.subgroup(b)?;
    if a == b {
        return Err(Error::Unsupported(
            "coset geometry with A = B has no meaningful incidence".into(),
        ));
    }
    let point_cosets = cosets(group, &a);
    let line_cosets = cosets(group, &b);
    let mut flags = Vec::new();
    for (i, pc) in point_cosets.iter().enumerate() {
        for (j, lc) in line_cosets.iter().enumerate() {
            if intersects(pc, lc) {
                flags.push((i, j));
            }
        }
    }
    IncidenceStructure::new(point_cosets.len(), line_cosets.len(), flags)
}

/// Left cosets of `subgroup`, each sorted, ordered by smallest element.
pub fn cosets(group: &FiniteGroupTable, subgroup: &[usize]) -> Vec<Vec<usize>> {
    let mut seen = vec![false; group.order()];
    let mut out = Vec::new();
    for g in 0..group.order() {
        if !seen[g] {
            let coset = group.left_coset(g, subgroup);
            for &x in &coset {
                seen[x] = true;
            }
            out.push(coset);
        }
    }
    out
}

fn intersects(a: &[usize], b: &[usize]) -> bool {
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => return true,
        }
    }
    false
}

/// The thin n-gon: a 2n-cycle `p0 l0 p1 l1 ... p(n-1) l(n-1) p0`.
pub fn dihedral_ngon(n: usize) -> Result<IncidenceStructure> {
    if n < 3 {
        return Err(Error::Argument(format!("an ordinary n-gon needs n >= 3, got {n}")));
    }
    let flags = (0..n).flat_map(|i| [(i, i), ((i + 1) % n, i)]);
    Ok(IncidenceStructure::new(n, n, flags)?.with_gon_claim(Some(n)))
}

/// PG(2, q) for prime q.
pub fn projective_plane(q: u32) -> Result<IncidenceStructure> {
    Ok(LinearModel::projective_plane(q)?.into_structure())
}

/// The symplectic quadrangle W(q) for prime q.
pub fn symplectic_quadrangle(q: u32) -> Result<IncidenceStructure> {
    Ok(LinearModel::symplectic_quadrangle(q)?.into_structure())
}

/// A point-line geometry of projective points and 2-dimensional subspaces
/// of GF(q)^d, keeping the coordinates so that linear maps can be applied.
///
/// Points are normalized vectors (first nonzero coordinate 1) and lines are
/// reduced row echelon bases; both are indexed in lexicographic order.
#[derive(Clone, Debug)]
pub struct LinearModel {
    field: PrimeField,
    points: Vec<Vec<u32>>,
    lines: Vec<Vec<Vec<u32>>>,
    point_index: HashMap<Vec<u32>, usize>,
    line_index: HashMap<Vec<Vec<u32>>, usize>,
    structure: IncidenceStructure,
}

impl LinearModel {
    /// All lines of PG(2, q).
    pub fn projective_plane(q: u32) -> Result<Self> {
        Self::build(q, 3, |_, _, _| true, 3)
    }

    /// Lines of PG(3, q) totally isotropic for `x0 y1 - x1 y0 + x2 y3 - x3 y2`.
    pub fn symplectic_quadrangle(q: u32) -> Result<Self> {
        Self::build(q, 4, |f, x, y| symplectic_form(f, x, y) == 0, 4)
    }

    fn build(
        q: u32,
        dim: usize,
        admissible: impl Fn(PrimeField, &[u32], &[u32]) -> bool,
        gon: usize,
    ) -> Result<Self> {
        let field = PrimeField::new(q)?;
        let points = projective_points(field, dim);
        let point_index: HashMap<Vec<u32>, usize> = points
            .iter()
            .enumerate()
            .map(|(i, v)| (v.clone(), i))
            .collect();
        let mut spans: BTreeMap<Vec<Vec<u32>>, BTreeSet<usize>> = BTreeMap::new();
        for i in 0..points.len() {
            for j in i + 1..points.len() {
                if !admissible(field, &points[i], &points[j]) {
                    continue;
                }
                let key = field.rref(&[points[i].clone(), points[j].clone()]);
                let row = spans.entry(key).or_default();
                row.insert(i);
                row.insert(j);
            }
        }
        let lines: Vec<Vec<Vec<u32>>> = spans.keys().cloned().collect();
        let line_index = lines
            .iter()
            .enumerate()
            .map(|(i, k)| (k.clone(), i))
            .collect();
        let flags = spans
            .values()
            .enumerate()
            .flat_map(|(l, row)| row.iter().map(move |&p| (p, l)));
        let structure =
            IncidenceStructure::new(points.len(), lines.len(), flags)?.with_gon_claim(Some(gon));
        Ok(LinearModel {
            field,
            points,
            lines,
            point_index,
            line_index,
            structure,
        })
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn structure(&self) -> &IncidenceStructure {
        &self.structure
    }

    pub fn into_structure(self) -> IncidenceStructure {
        self.structure
    }

    pub fn point_coordinates(&self, index: usize) -> &[u32] {
        &self.points[index]
    }

    pub fn line_basis(&self, index: usize) -> &[Vec<u32>] {
        &self.lines[index]
    }

    /// The vertex map induced by an invertible matrix (acting on column vectors).
    ///
    /// Fails if the matrix is singular or does not preserve the line set.
    pub fn collineation(&self, matrix: &[Vec<u32>]) -> Result<BTreeMap<VertexRef, VertexRef>> {
        let dim = self.points[0].len();
        if matrix.len() != dim || matrix.iter().any(|r| r.len() != dim) {
            return Err(Error::Argument(format!("matrix must be {dim}x{dim}")));
        }
        if self.field.rref(matrix).len() != dim {
            return Err(Error::Argument("matrix is singular".into()));
        }
        let apply = |v: &[u32]| -> Vec<u32> { matrix.iter().map(|row| self.field.dot(row, v)).collect() };
        let mut map = BTreeMap::new();
        for (i, v) in self.points.iter().enumerate() {
            let image = self.field.normalize(&apply(v)).expect("nonsingular");
            map.insert(VertexRef::point(i), VertexRef::point(self.point_index[&image]));
        }
        for (i, basis) in self.lines.iter().enumerate() {
            let image: Vec<Vec<u32>> = basis.iter().map(|v| apply(v)).collect();
            let key = self.field.rref(&image);
            let j = self.line_index.get(&key).ok_or_else(|| {
                Error::Argument(format!("matrix maps line {i} outside the geometry"))
            })?;
            map.insert(VertexRef::line(i), VertexRef::line(*j));
        }
        Ok(map)
    }
}

fn symplectic_form(f: PrimeField, x: &[u32], y: &[u32]) -> u32 {
    let a = f.sub(f.mul(x[0], y[1]), f.mul(x[1], y[0]));
    let b = f.sub(f.mul(x[2], y[3]), f.mul(x[3], y[2]));
    f.add(a, b)
}

/// Normalized nonzero vectors of GF(q)^dim in lexicographic order.
fn projective_points(field: PrimeField, dim: usize) -> Vec<Vec<u32>> {
    let q = field.modulus() as usize;
    let mut out = Vec::new();
    for code in 1..q.pow(dim as u32) {
        let mut v = vec![0u32; dim];
        let mut c = code;
        for slot in v.iter_mut().rev() {
            *slot = (c % q) as u32;
            c /= q;
        }
        if v.iter().find(|&&x| x != 0) == Some(&1) {
            out.push(v);
        }
    }
    out
}
