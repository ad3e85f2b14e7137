mod common;

use std::collections::BTreeSet;

use common::{proper_galleries, Metric};
use ngon_core::algebra::{
    divide, multiply, operation_table, sweep_right_loop, verify_right_loop, CoordinateFrame, Operation,
};
use ngon_core::chains::{enumerate_galleries, gallery_pr, stam_inject, Orientation, DEFAULT_GALLERY_CAP};
use ngon_core::constructions::{projective_plane, symplectic_quadrangle};
use ngon_core::projmaps::{compose, from_path, invert, perspectivity};
use ngon_core::schubert::{common_big_cell, default_ngon, perp_fibration};
use ngon_core::{IncidenceStructure, VertexRef};

#[test]
fn gallery_counts_match_the_oracle() {
    for (s, n) in [(projective_plane(2).unwrap(), 3), (symplectic_quadrangle(2).unwrap(), 4)] {
        let m = Metric::new(&s);
        let base = s.flags()[3];
        for orientation in [Orientation::PointLine, Orientation::LinePoint] {
            let (u, v) = orientation.apply(base);
            for k in 0..=n {
                let e = enumerate_galleries(&s, base, orientation, k, DEFAULT_GALLERY_CAP).unwrap();
                let oracle: BTreeSet<Vec<VertexRef>> = proper_galleries(&m, u, v, k).into_iter().collect();
                let lib: BTreeSet<Vec<VertexRef>> = e.proper.iter().map(|g| g.vertices().to_vec()).collect();
                assert_eq!(lib, oracle, "k = {k}");
                // every chain of length k+1 from (u, v) is proper or stammering
                let all = (0..k).fold(1usize, |acc, i| acc * s.degree(if i % 2 == 0 { v } else { u }));
                assert_eq!(e.total(), all);
            }
        }
    }
}

#[test]
fn gallery_maps_land_in_the_right_sets() {
    let s = symplectic_quadrangle(2).unwrap();
    let base = s.flags()[0];
    let e = enumerate_galleries(&s, base, Orientation::PointLine, 3, DEFAULT_GALLERY_CAP).unwrap();
    for g in &e.proper {
        let shorter = gallery_pr(g).unwrap();
        assert!(shorter.is_proper());
        assert_eq!(shorter.len(), g.len() - 1);
        let injected = stam_inject(g);
        assert!(!injected.is_proper());
        assert_eq!(injected.vertices()[2], injected.vertices()[0]);
    }
}

#[test]
fn every_same_kind_pair_shares_a_big_cell() {
    for (s, n) in [(projective_plane(3).unwrap(), 3), (symplectic_quadrangle(2).unwrap(), 4)] {
        let m = Metric::new(&s);
        let vs: Vec<VertexRef> = s.vertices().collect();
        for &a in &vs {
            for &b in vs.iter().filter(|b| b.kind == a.kind) {
                let f = common_big_cell(&s, n, a, b).expect("no common big cell");
                for x in [a, b] {
                    let d = m.dist(f.point_ref(), x).min(m.dist(f.line_ref(), x));
                    assert_eq!(d as usize, n - 1);
                }
            }
        }
    }
}

#[test]
fn perp_fibers_are_pencils_through_neighbors() {
    let s = symplectic_quadrangle(2).unwrap();
    let m = Metric::new(&s);
    for x in [VertexRef::point(3), VertexRef::line(7)] {
        let fibers = perp_fibration(&s, x, 4).unwrap();
        let keys: Vec<VertexRef> = fibers.keys().copied().collect();
        assert_eq!(keys, m.neighbors(x));
        for (w, fiber) in &fibers {
            let expected: Vec<VertexRef> = m.neighbors(*w).into_iter().filter(|&y| y != x).collect();
            assert_eq!(fiber, &expected);
        }
    }
}

#[test]
fn perspectivities_follow_the_projection_map() {
    let s = projective_plane(3).unwrap();
    let m = Metric::new(&s);
    let (x, y) = (VertexRef::point(0), VertexRef::line(0));
    let y = if m.dist(x, y) == 3 { y } else { s.opposites(x, 3).unwrap()[0] };
    let p = perspectivity(&s, x, y, 3).unwrap();
    for (z, w) in p.pairs() {
        assert!(s.incident(w, y));
        // w is the neighbor of y closest to z
        assert_eq!(m.f(z, y), Some(w));
    }
    let back = compose(&invert(&p), &p).unwrap();
    assert!(back.is_identity());
}

#[test]
fn composed_paths_agree_with_stepwise_application() {
    let s = symplectic_quadrangle(2).unwrap();
    let x = VertexRef::point(0);
    let opp = s.opposites(x, 4).unwrap();
    let y = opp[0];
    let z = *s.opposites(y, 4).unwrap().iter().find(|&&z| z != x).unwrap();
    // bracket order: [z, y, x] maps V_x to V_z
    let full = from_path(&s, &[z, y, x], 4).unwrap();
    let first = perspectivity(&s, x, y, 4).unwrap();
    let second = perspectivity(&s, y, z, 4).unwrap();
    for &w in full.domain() {
        assert_eq!(full.apply(w), second.apply(first.apply(w).unwrap()));
    }
}

/// PG(2,3) with two flags exchanged: (p, l), (p', l') become (p, l'), (p', l).
fn corrupted_plane() -> IncidenceStructure {
    let s = projective_plane(3).unwrap();
    let frame = CoordinateFrame::auto(&s, 3).unwrap();
    let keep: BTreeSet<VertexRef> = frame.ngon.vertices().iter().copied().chain([frame.one_l, frame.e]).collect();
    let mut flags: Vec<(usize, usize)> = s.flags().iter().map(|f| (f.point, f.line)).collect();
    let free = |f: &(usize, usize)| !keep.contains(&VertexRef::point(f.0)) && !keep.contains(&VertexRef::line(f.1));
    let i = flags.iter().position(free).unwrap();
    let j = (0..flags.len())
        .find(|&j| {
            let (a, b) = (flags[i], flags[j]);
            free(&b) && a.0 != b.0 && a.1 != b.1 && !flags.contains(&(a.0, b.1)) && !flags.contains(&(b.0, a.1))
        })
        .unwrap();
    let (a, b) = (flags[i], flags[j]);
    flags[i] = (a.0, b.1);
    flags[j] = (b.0, a.1);
    IncidenceStructure::new(13, 13, flags).unwrap()
}

#[test]
fn corrupted_geometry_violates_the_loop_axioms() {
    let s = corrupted_plane();
    let frame = CoordinateFrame::auto(&s, 3).unwrap();
    let mut violations = verify_right_loop(&s, &frame).violations.len();
    if violations == 0 {
        violations = sweep_right_loop(&s, &frame.ngon)
            .unwrap()
            .iter()
            .map(|r| r.violations.len())
            .sum();
    }
    assert!(violations > 0);
}

#[test]
fn multiplication_tables_are_latin_on_nonzero_elements() {
    let s = projective_plane(3).unwrap();
    let frame = CoordinateFrame::auto(&s, 3).unwrap();
    let table = operation_table(&s, &frame, Operation::Multiply);
    let rows: Vec<usize> = (0..table.rows.len()).filter(|&i| table.rows[i] != frame.zero_k()).collect();
    let cols: Vec<usize> = (0..table.columns.len()).filter(|&j| table.columns[j] != frame.zero_l()).collect();
    for &i in &rows {
        let row: BTreeSet<_> = cols.iter().filter_map(|&j| table.entries[i][j]).collect();
        assert_eq!(row.len(), cols.len());
        assert!(!row.contains(&frame.zero_k()));
    }
    let csv = table.to_csv();
    assert_eq!(csv.lines().count(), table.rows.len() + 1);
    assert_eq!(multiply(&s, &frame, frame.zero_k(), frame.zero_l()).unwrap(), frame.zero_k());
    assert!(divide(&s, &frame, frame.zero_k(), frame.zero_l()).is_err());
}

#[test]
fn every_ngon_frame_of_w2_is_a_right_loop() {
    let s = symplectic_quadrangle(2).unwrap();
    let ngon = default_ngon(&s, s.flags()[0], 4).unwrap();
    for ngon in [ngon.clone(), ngon.swapped()] {
        for report in sweep_right_loop(&s, &ngon).unwrap() {
            assert!(report.passed(), "{:?}", report.violations);
        }
    }
}
