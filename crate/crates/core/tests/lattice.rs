use lgt_core::lattice::{walk, RectangleKind};
use lgt_core::{CellComplex, CellSet, DirEdge, LatticeBox, LatticeError, Loop, PlaquetteSet};
use proptest::prelude::*;

fn cube(dim: usize, side: i32) -> CellComplex {
    CellComplex::new(LatticeBox::cube(dim, side).unwrap()).unwrap()
}

fn binom(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

/// Cells of `[0, s]^d`: choose the moving axes, then a base among `s^k (s+1)^{d-k}`.
fn closed_form(d: usize, s: usize, k: usize) -> usize {
    if k > d {
        return 0;
    }
    binom(d, k) * s.pow(k as u32) * (s + 1).pow((d - k) as u32)
}

#[test]
fn cell_counts() {
    let c = cube(4, 1);
    assert_eq!((c.num_vertices(), c.num_edges(), c.num_plaquettes(), c.num_cubes()), (16, 32, 24, 8));
    let c = cube(2, 2);
    assert_eq!((c.num_vertices(), c.num_edges(), c.num_plaquettes(), c.num_cubes()), (9, 12, 4, 0));
    for d in 2..=4 {
        for s in 1..=3usize {
            if d == 4 && s == 3 {
                continue;
            }
            let c = cube(d, s as i32);
            assert_eq!(c.num_vertices(), closed_form(d, s, 0));
            assert_eq!(c.num_edges(), closed_form(d, s, 1));
            assert_eq!(c.num_plaquettes(), closed_form(d, s, 2));
            assert_eq!(c.num_cubes(), closed_form(d, s, 3));
        }
    }
}

#[test]
fn bad_boxes_are_rejected() {
    assert!(matches!(
        CellComplex::new(LatticeBox::new(&[(0, 1), (0, 0)]).unwrap()),
        Err(LatticeError::ZeroSide(1))
    ));
    assert!(matches!(CellComplex::new(LatticeBox::new(&[(0, 1), (0, 2)]).unwrap()), Err(LatticeError::UnequalSides(_))));
    assert!(matches!(CellComplex::new(LatticeBox::new(&[(0, 1)]).unwrap()), Err(LatticeError::BadDimension(1))));
    assert!(matches!(LatticeBox::new(&[]), Err(LatticeError::BadDimension(0))));
    assert!(matches!(LatticeBox::new(&[(0, 1), (2, 1)]), Err(LatticeError::InvertedRange { .. })));
}

#[test]
fn plaquette_loops_close_and_start_at_base() {
    let c = cube(3, 2);
    for p in 0..c.num_plaquettes() {
        let lp = c.plaquette_loop(p);
        let base = c.plaquette(p).base;
        assert_eq!(walk(&c, base, &lp).unwrap(), base);
        let mut edges: Vec<usize> = lp.iter().map(|d| d.edge).collect();
        edges.sort();
        edges.dedup();
        assert_eq!(edges.len(), 4);
        let lex_min = c.plaquette(p).vertices.iter().map(|&v| *c.coord(v)).min().unwrap();
        assert_eq!(*c.coord(base), lex_min);
    }
    // (1,2)-plane plaquette at the origin: +e1, +e2, −e1, −e2.
    let o = c.vertex_at(&[0, 0, 0]).unwrap();
    let p = c.plaquette_index(o, 0, 1).unwrap();
    let lp = c.plaquette_loop(p);
    let axes: Vec<(usize, bool)> = lp.iter().map(|d| (c.edge(d.edge).axis, d.forward)).collect();
    assert_eq!(axes, vec![(0, true), (1, true), (0, false), (1, false)]);
}

#[test]
fn spanning_tree_counts() {
    let c = cube(2, 2);
    for root in 0..c.num_vertices() {
        let t = c.spanning_tree(root);
        assert!(t.validate(&c));
        assert_eq!(t.tree_edge_count(), 8);
        assert_eq!(t.cotree_edges().len(), 4);
        assert!(t.path(&c, root).is_empty());
    }
    let c = cube(4, 1);
    let t = c.spanning_tree(0);
    assert_eq!((t.tree_edge_count(), t.cotree_edges().len()), (15, 17));
    for x in 0..c.num_vertices() {
        assert_eq!(walk(&c, 0, &t.path(&c, x)).unwrap(), x);
    }
}

#[test]
fn rectangle_pieces() {
    let c = cube(3, 2);
    let whole = c.lattice().clone();
    let r = c.rectangle_complexes(&whole).unwrap();
    assert!(r.boundary.is_empty());
    assert!(r.outside.is_empty());
    let slab = LatticeBox::new(&[(0, 1), (0, 2), (0, 2)]).unwrap();
    let r = c.rectangle_complexes(&slab).unwrap();
    assert_eq!(r.boundary.len(), 4);
    for p in r.boundary.iter() {
        assert!(c.plaquette(p).axes == (1, 2) && c.coord(c.plaquette(p).base)[0] == 1);
    }
    let face = LatticeBox::new(&[(0, 0), (0, 2), (0, 2)]).unwrap();
    assert!(c.rectangle_complexes(&face).unwrap().boundary.is_empty());
    let outside = LatticeBox::new(&[(0, 3), (0, 2), (0, 2)]).unwrap();
    assert!(matches!(c.rectangle_complexes(&outside), Err(LatticeError::NotInside(_))));
}

#[test]
fn good_rectangles() {
    let c4 = cube(4, 3);
    let inner = LatticeBox::new(&[(0, 2), (1, 3), (0, 2), (1, 3)]).unwrap();
    assert_eq!(c4.classify_rectangle(&inner), RectangleKind::Interior);
    let c = cube(3, 2);
    let half = LatticeBox::new(&[(0, 1), (0, 2), (0, 2)]).unwrap();
    assert!(matches!(c.classify_rectangle(&half), RectangleKind::HalfSpace { axis: 0, k: 1, upper: false }));
    assert_eq!(c.classify_rectangle(c.lattice()), RectangleKind::NotGood);
    let c2 = cube(2, 2);
    assert_eq!(c2.classify_rectangle(c2.lattice()), RectangleKind::Unsupported);
}

#[test]
fn well_separation() {
    let c = cube(3, 2);
    let half = LatticeBox::new(&[(0, 1), (0, 2), (0, 2)]).unwrap();
    let empty = c.empty_plaquettes();
    assert!(c.well_separates(&half, &empty, &empty));
    let x0 = c.plaquette_index(c.vertex_at(&[0, 0, 0]).unwrap(), 1, 2).unwrap();
    let x2 = c.plaquette_index(c.vertex_at(&[2, 0, 0]).unwrap(), 1, 2).unwrap();
    let p1 = PlaquetteSet::from_indices(c.num_plaquettes(), [x0]);
    let p2 = PlaquetteSet::from_indices(c.num_plaquettes(), [x2]);
    assert!(c.well_separates(&half, &p1, &p2));
    let mid = c.plaquette_index(c.vertex_at(&[1, 0, 0]).unwrap(), 1, 2).unwrap();
    let bad = PlaquetteSet::from_indices(c.num_plaquettes(), [x0, mid]);
    assert!(!c.well_separates(&half, &bad, &p2));
}

#[test]
fn constrained_tree_spans_pieces() {
    let c = cube(3, 2);
    let slab = LatticeBox::new(&[(0, 1), (0, 2), (0, 2)]).unwrap();
    let ct = c.constrained_spanning_tree(&slab, 0).unwrap();
    assert!(ct.report.all());
    assert!(ct.tree.validate(&c));
    // The x = 1 plane's 1-skeleton is spanned by tree edges lying in it.
    let plane = CellSet::from_indices(
        c.num_edges(),
        (0..c.num_edges()).filter(|&e| {
            let ed = c.edge(e);
            c.coord(ed.tail)[0] == 1 && c.coord(ed.head)[0] == 1
        }),
    );
    assert!(ct.tree.spans_subgraph(&c, &plane));
    // Corner cube: its boundary piece has several components.
    let corner = LatticeBox::new(&[(1, 2), (1, 2), (0, 1)]).unwrap();
    assert!(c.constrained_spanning_tree(&corner, 0).unwrap().report.all());
    assert!(c.constrained_spanning_tree(c.lattice(), 5).unwrap().report.all());
}

#[test]
fn loops() {
    let c = cube(2, 2);
    let p = Loop::plaquette(&c, 0);
    assert!(Loop::new(&c, 0, p.steps()[..3].to_vec()).is_err());
    let bad = vec![DirEdge::fwd(0), DirEdge::fwd(0)];
    assert!(matches!(Loop::new(&c, 0, bad), Err(LatticeError::NotChained(1))));
    let rot = p.rotated(&c, 1);
    assert_eq!(walk(&c, rot.start(), rot.steps()).unwrap(), rot.start());
}

proptest! {
    #[test]
    fn rectangle_pieces_partition(lo in proptest::array::uniform3(0i32..3), ext in proptest::array::uniform3(0i32..3)) {
        let c = cube(3, 2);
        let ranges: Vec<(i32, i32)> = (0..3).map(|i| (lo[i].min(2), (lo[i] + ext[i]).min(2))).collect();
        let b = LatticeBox::new(&ranges).unwrap();
        let r = c.rectangle_complexes(&b).unwrap();
        prop_assert_eq!(r.inside.union(&r.outside), c.all_plaquettes());
        prop_assert_eq!(r.inside.intersection(&r.outside), r.boundary.clone());
        let parts = r.inside_strict().len() + r.boundary.len() + r.outside_strict().len();
        prop_assert_eq!(parts, c.num_plaquettes());
    }

    #[test]
    fn well_separated_sets_are_disjoint(a in proptest::collection::vec(0usize..36, 0..5), b in proptest::collection::vec(0usize..36, 0..5), k in 1i32..2) {
        let c = cube(3, 2);
        let n = c.num_plaquettes();
        let p1 = PlaquetteSet::from_indices(n, a.into_iter().map(|x| x % n));
        let p2 = PlaquetteSet::from_indices(n, b.into_iter().map(|x| x % n));
        let half = LatticeBox::new(&[(0, k), (0, 2), (0, 2)]).unwrap();
        if c.well_separates(&half, &p1, &p2) {
            prop_assert!(!p1.intersects(&p2));
        }
    }

    #[test]
    fn trees_have_euler_count(root in 0usize..27) {
        let c = cube(3, 2);
        let t = c.spanning_tree(root);
        prop_assert!(t.validate(&c));
        prop_assert_eq!(t.cotree_edges().len(), c.num_edges() - c.num_vertices() + 1);
    }
}

#[test]
fn indexing_is_deterministic() {
    let a = cube(3, 2);
    let b = cube(3, 2);
    for p in 0..a.num_plaquettes() {
        assert_eq!(a.plaquette(p), b.plaquette(p));
    }
}
