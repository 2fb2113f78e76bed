//! Box lattices as cubical cell complexes: cells, loops, spanning trees and
//! the sub-rectangle pieces S₂(B), ∂S₂(B), S₂ᶜ(B).

use petgraph::unionfind::UnionFind;
use thiserror::Error;

use crate::cellset::{CellSet, PlaquetteSet};

pub const MAX_DIM: usize = 4;
pub type Coord = [i32; MAX_DIM];

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LatticeError {
    #[error("dimension {0} not supported (expected 2, 3 or 4)")]
    BadDimension(usize),
    #[error("axis {axis}: upper end {hi} below lower end {lo}")]
    InvertedRange { axis: usize, lo: i32, hi: i32 },
    #[error("ambient lattice has a side of length 0 on axis {0}")]
    ZeroSide(usize),
    #[error("ambient lattice sides differ ({0:?})")]
    UnequalSides(Vec<i32>),
    #[error("box {0:?} is not contained in the lattice")]
    NotInside(LatticeBox),
    #[error("edge sequence does not chain at step {0}")]
    NotChained(usize),
    #[error("loop is not closed")]
    NotClosed,
    #[error("no vertex at {0:?}")]
    NoVertex(Vec<i32>),
    #[error("structural pieces are disabled in dimension 2")]
    Unsupported,
}

/// Product of integer intervals `[lo_i, hi_i]`; degenerate axes allowed.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LatticeBox {
    dim: usize,
    lo: Coord,
    hi: Coord,
}

impl LatticeBox {
    pub fn new(ranges: &[(i32, i32)]) -> Result<Self, LatticeError> {
        if ranges.is_empty() || ranges.len() > MAX_DIM {
            return Err(LatticeError::BadDimension(ranges.len()));
        }
        let mut lo = [0; MAX_DIM];
        let mut hi = [0; MAX_DIM];
        for (axis, &(a, b)) in ranges.iter().enumerate() {
            if b < a {
                return Err(LatticeError::InvertedRange { axis, lo: a, hi: b });
            }
            lo[axis] = a;
            hi[axis] = b;
        }
        Ok(LatticeBox { dim: ranges.len(), lo, hi })
    }

    /// `[0, side]^dim`.
    pub fn cube(dim: usize, side: i32) -> Result<Self, LatticeError> {
        Self::new(&vec![(0, side); dim])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn lo(&self, axis: usize) -> i32 {
        self.lo[axis]
    }

    pub fn hi(&self, axis: usize) -> i32 {
        self.hi[axis]
    }

    pub fn ranges(&self) -> Vec<(i32, i32)> {
        (0..self.dim).map(|i| (self.lo[i], self.hi[i])).collect()
    }

    pub fn side(&self, axis: usize) -> i32 {
        self.hi[axis] - self.lo[axis]
    }

    pub fn contains_point(&self, x: &Coord) -> bool {
        (0..self.dim).all(|i| self.lo[i] <= x[i] && x[i] <= self.hi[i])
    }

    pub fn contains_box(&self, other: &LatticeBox) -> bool {
        self.dim == other.dim
            && (0..self.dim).all(|i| self.lo[i] <= other.lo[i] && other.hi[i] <= self.hi[i])
    }

    /// `{x ∈ ambient : x_axis ≤ k}` (or `≥ k` when `upper`).
    pub fn half_space(ambient: &LatticeBox, axis: usize, k: i32, upper: bool) -> Result<Self, LatticeError> {
        let mut r = ambient.ranges();
        if upper {
            r[axis].0 = k;
        } else {
            r[axis].1 = k;
        }
        Self::new(&r)
    }

    /// Intersection, if nonempty.
    pub fn intersect(&self, other: &LatticeBox) -> Option<LatticeBox> {
        let r: Vec<(i32, i32)> = (0..self.dim)
            .map(|i| (self.lo[i].max(other.lo[i]), self.hi[i].min(other.hi[i])))
            .collect();
        Self::new(&r).ok()
    }
}

/// An edge traversed in a direction.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DirEdge {
    pub edge: usize,
    pub forward: bool,
}

impl DirEdge {
    pub fn fwd(edge: usize) -> Self {
        DirEdge { edge, forward: true }
    }

    pub fn back(edge: usize) -> Self {
        DirEdge { edge, forward: false }
    }

    pub fn reversed(self) -> Self {
        DirEdge { edge: self.edge, forward: !self.forward }
    }
}

/// Positively oriented nearest-neighbour edge `tail → tail + e_axis`.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct Edge {
    pub tail: usize,
    pub head: usize,
    pub axis: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Plaquette {
    /// Lexicographically least vertex.
    pub base: usize,
    pub axes: (usize, usize),
    /// Counter-clockwise loop `(+e_i, +e_j, −e_i, −e_j)` from `base`.
    pub boundary: [DirEdge; 4],
    pub vertices: [usize; 4],
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cube {
    pub base: usize,
    pub axes: [usize; 3],
    pub faces: [usize; 6],
}

/// Cells of a box lattice with lexicographic indexing.
#[derive(Clone, Debug)]
pub struct CellComplex {
    bx: LatticeBox,
    strides: Coord,
    coords: Vec<Coord>,
    edges: Vec<Edge>,
    edge_at: Vec<Option<u32>>,
    plaquettes: Vec<Plaquette>,
    plaquette_at: Vec<Option<u32>>,
    cubes: Vec<Cube>,
    edge_plaquettes: Vec<Vec<usize>>,
    plaquette_cubes: Vec<Vec<usize>>,
    vertex_plaquettes: Vec<Vec<usize>>,
    adjacency: Vec<Vec<(usize, usize)>>,
}

fn axis_pairs(dim: usize) -> Vec<(usize, usize)> {
    let mut v = Vec::new();
    for i in 0..dim {
        for j in i + 1..dim {
            v.push((i, j));
        }
    }
    v
}

impl CellComplex {
    pub fn new(bx: LatticeBox) -> Result<Self, LatticeError> {
        let dim = bx.dim();
        if !(2..=MAX_DIM).contains(&dim) {
            return Err(LatticeError::BadDimension(dim));
        }
        let sides: Vec<i32> = (0..dim).map(|i| bx.side(i)).collect();
        if let Some(axis) = sides.iter().position(|&s| s == 0) {
            return Err(LatticeError::ZeroSide(axis));
        }
        if sides.iter().any(|&s| s != sides[0]) {
            return Err(LatticeError::UnequalSides(sides));
        }
        let mut strides = [0; MAX_DIM];
        let mut acc = 1;
        for i in (0..dim).rev() {
            strides[i] = acc;
            acc *= bx.side(i) + 1;
        }
        let nv = acc as usize;
        let mut coords = Vec::with_capacity(nv);
        for idx in 0..nv {
            let mut x = [0; MAX_DIM];
            let mut rem = idx as i32;
            for i in 0..dim {
                x[i] = bx.lo(i) + rem / strides[i];
                rem %= strides[i];
            }
            coords.push(x);
        }
        let mut cx = CellComplex {
            bx,
            strides,
            coords,
            edges: Vec::new(),
            edge_at: vec![None; nv * dim],
            plaquettes: Vec::new(),
            plaquette_at: Vec::new(),
            cubes: Vec::new(),
            edge_plaquettes: Vec::new(),
            plaquette_cubes: Vec::new(),
            vertex_plaquettes: vec![Vec::new(); nv],
            adjacency: vec![Vec::new(); nv],
        };
        for v in 0..nv {
            for axis in 0..dim {
                if let Some(head) = cx.step(v, axis) {
                    cx.edge_at[v * dim + axis] = Some(cx.edges.len() as u32);
                    cx.edges.push(Edge { tail: v, head, axis });
                }
            }
        }
        for (e, edge) in cx.edges.iter().enumerate() {
            cx.adjacency[edge.tail].push((e, edge.head));
            cx.adjacency[edge.head].push((e, edge.tail));
        }
        for adj in &mut cx.adjacency {
            adj.sort_unstable();
        }
        let pairs = axis_pairs(dim);
        cx.plaquette_at = vec![None; nv * pairs.len()];
        for v in 0..nv {
            for (k, &(i, j)) in pairs.iter().enumerate() {
                let (Some(vi), Some(vj)) = (cx.step(v, i), cx.step(v, j)) else { continue };
                let vij = cx.step(vi, j).expect("box is convex");
                let e = |x: usize, a: usize| cx.edge_at[x * dim + a].expect("edge exists") as usize;
                let boundary = [
                    DirEdge::fwd(e(v, i)),
                    DirEdge::fwd(e(vi, j)),
                    DirEdge::back(e(vj, i)),
                    DirEdge::back(e(v, j)),
                ];
                cx.plaquette_at[v * pairs.len() + k] = Some(cx.plaquettes.len() as u32);
                cx.plaquettes.push(Plaquette { base: v, axes: (i, j), boundary, vertices: [v, vi, vij, vj] });
            }
        }
        cx.edge_plaquettes = vec![Vec::new(); cx.edges.len()];
        for (p, plaq) in cx.plaquettes.iter().enumerate() {
            for d in plaq.boundary {
                cx.edge_plaquettes[d.edge].push(p);
            }
            for &v in &plaq.vertices {
                cx.vertex_plaquettes[v].push(p);
            }
        }
        cx.plaquette_cubes = vec![Vec::new(); cx.plaquettes.len()];
        for v in 0..nv {
            for i in 0..dim {
                for j in i + 1..dim {
                    for k in j + 1..dim {
                        let (Some(vi), Some(vj), Some(vk)) = (cx.step(v, i), cx.step(v, j), cx.step(v, k))
                        else {
                            continue;
                        };
                        let p = |x: usize, a: usize, b: usize| cx.plaquette_index(x, a, b).expect("face exists");
                        let faces = [p(v, i, j), p(vk, i, j), p(v, i, k), p(vj, i, k), p(v, j, k), p(vi, j, k)];
                        let c = cx.cubes.len();
                        for &f in &faces {
                            cx.plaquette_cubes[f].push(c);
                        }
                        cx.cubes.push(Cube { base: v, axes: [i, j, k], faces });
                    }
                }
            }
        }
        Ok(cx)
    }

    fn step(&self, v: usize, axis: usize) -> Option<usize> {
        let x = &self.coords[v];
        (x[axis] < self.bx.hi(axis)).then(|| v + self.strides[axis] as usize)
    }

    pub fn lattice(&self) -> &LatticeBox {
        &self.bx
    }

    pub fn dim(&self) -> usize {
        self.bx.dim()
    }

    pub fn side(&self) -> i32 {
        self.bx.side(0)
    }

    pub fn num_vertices(&self) -> usize {
        self.coords.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn num_plaquettes(&self) -> usize {
        self.plaquettes.len()
    }

    pub fn num_cubes(&self) -> usize {
        self.cubes.len()
    }

    pub fn coord(&self, v: usize) -> &Coord {
        &self.coords[v]
    }

    pub fn vertex_at(&self, x: &[i32]) -> Result<usize, LatticeError> {
        let mut c = [0; MAX_DIM];
        c[..x.len()].copy_from_slice(x);
        if x.len() != self.dim() || !self.bx.contains_point(&c) {
            return Err(LatticeError::NoVertex(x.to_vec()));
        }
        Ok((0..self.dim()).map(|i| ((c[i] - self.bx.lo(i)) * self.strides[i]) as usize).sum())
    }

    pub fn edge(&self, e: usize) -> &Edge {
        &self.edges[e]
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge_index(&self, tail: usize, axis: usize) -> Option<usize> {
        self.edge_at.get(tail * self.dim() + axis).copied().flatten().map(|e| e as usize)
    }

    pub fn plaquette(&self, p: usize) -> &Plaquette {
        &self.plaquettes[p]
    }

    pub fn plaquettes(&self) -> &[Plaquette] {
        &self.plaquettes
    }

    /// Plaquette with least vertex `base` spanning axes `a`, `b` (any order).
    pub fn plaquette_index(&self, base: usize, a: usize, b: usize) -> Option<usize> {
        let (i, j) = if a < b { (a, b) } else { (b, a) };
        let d = self.dim();
        let k = axis_pairs(d).iter().position(|&pr| pr == (i, j))?;
        self.plaquette_at.get(base * (d * (d - 1) / 2) + k).copied().flatten().map(|p| p as usize)
    }

    pub fn cube(&self, c: usize) -> &Cube {
        &self.cubes[c]
    }

    pub fn cubes(&self) -> &[Cube] {
        &self.cubes
    }

    pub fn edge_plaquettes(&self, e: usize) -> &[usize] {
        &self.edge_plaquettes[e]
    }

    pub fn plaquette_cubes(&self, p: usize) -> &[usize] {
        &self.plaquette_cubes[p]
    }

    pub fn vertex_plaquettes(&self, v: usize) -> &[usize] {
        &self.vertex_plaquettes[v]
    }

    /// `(edge, neighbour)` pairs sorted by edge index.
    pub fn neighbours(&self, v: usize) -> &[(usize, usize)] {
        &self.adjacency[v]
    }

    pub fn source(&self, d: DirEdge) -> usize {
        let e = &self.edges[d.edge];
        if d.forward {
            e.tail
        } else {
            e.head
        }
    }

    pub fn target(&self, d: DirEdge) -> usize {
        let e = &self.edges[d.edge];
        if d.forward {
            e.head
        } else {
            e.tail
        }
    }

    /// Ordered boundary loop of `p`.
    pub fn plaquette_loop(&self, p: usize) -> [DirEdge; 4] {
        self.plaquettes[p].boundary
    }

    pub fn all_plaquettes(&self) -> PlaquetteSet {
        CellSet::full(self.num_plaquettes())
    }

    pub fn empty_plaquettes(&self) -> PlaquetteSet {
        CellSet::empty(self.num_plaquettes())
    }

    /// Lower corner and per-axis extent of a plaquette as a degenerate box.
    pub fn plaquette_box(&self, p: usize) -> LatticeBox {
        let pl = &self.plaquettes[p];
        let x = self.coords[pl.base];
        let r: Vec<(i32, i32)> = (0..self.dim())
            .map(|a| if a == pl.axes.0 || a == pl.axes.1 { (x[a], x[a] + 1) } else { (x[a], x[a]) })
            .collect();
        LatticeBox::new(&r).expect("valid plaquette box")
    }

    pub fn plaquette_in_box(&self, p: usize, b: &LatticeBox) -> bool {
        let pl = &self.plaquettes[p];
        b.contains_point(&self.coords[pl.vertices[0]]) && b.contains_point(&self.coords[pl.vertices[2]])
    }

    /// Whether a plaquette lying in `b` lies on one of its faces.
    pub fn plaquette_on_box_boundary(&self, p: usize, b: &LatticeBox) -> bool {
        let pl = &self.plaquettes[p];
        let x = &self.coords[pl.base];
        (0..self.dim())
            .filter(|&k| k != pl.axes.0 && k != pl.axes.1)
            .any(|k| x[k] == b.lo(k) || x[k] == b.hi(k))
    }

    pub fn plaquettes_in_box(&self, b: &LatticeBox) -> PlaquetteSet {
        CellSet::from_indices(self.num_plaquettes(), (0..self.num_plaquettes()).filter(|&p| self.plaquette_in_box(p, b)))
    }

    /// Edges of the 1-skeleton of a plaquette set.
    pub fn edges_of(&self, ps: &PlaquetteSet) -> CellSet {
        let mut s = CellSet::empty(self.num_edges());
        for p in ps.iter() {
            for d in self.plaquettes[p].boundary {
                s.insert(d.edge);
            }
        }
        s
    }

    pub fn vertices_of(&self, ps: &PlaquetteSet) -> CellSet {
        let mut s = CellSet::empty(self.num_vertices());
        for p in ps.iter() {
            for &v in &self.plaquettes[p].vertices {
                s.insert(v);
            }
        }
        s
    }

    /// ℓ∞ distance between the vertex sets of two plaquette sets.
    pub fn linf_distance(&self, a: &PlaquetteSet, b: &PlaquetteSet) -> i32 {
        let va: Vec<usize> = self.vertices_of(a).iter().collect();
        let vb: Vec<usize> = self.vertices_of(b).iter().collect();
        let mut best = i32::MAX;
        for &x in &va {
            for &y in &vb {
                let d = (0..self.dim()).map(|i| (self.coords[x][i] - self.coords[y][i]).abs()).max().unwrap_or(0);
                best = best.min(d);
            }
        }
        best
    }

    /// S₂(B), ∂S₂(B) and S₂ᶜ(B).
    pub fn rectangle_complexes(&self, b: &LatticeBox) -> Result<RectangleCells, LatticeError> {
        if !self.bx.contains_box(b) {
            return Err(LatticeError::NotInside(b.clone()));
        }
        let n = self.num_plaquettes();
        let mut inside = CellSet::empty(n);
        let mut boundary = CellSet::empty(n);
        let mut outside = CellSet::empty(n);
        for p in 0..n {
            if self.plaquette_in_box(p, b) {
                inside.insert(p);
                if self.plaquette_on_box_boundary(p, b) && !self.plaquette_on_box_boundary(p, &self.bx) {
                    boundary.insert(p);
                    outside.insert(p);
                }
            } else {
                outside.insert(p);
            }
        }
        Ok(RectangleCells { bx: b.clone(), inside, boundary, outside })
    }

    /// Two-case classifier (small box or interior half-space); dimension 2 is reported as unsupported.
    pub fn classify_rectangle(&self, b: &LatticeBox) -> RectangleKind {
        let d = self.dim();
        if d < 3 {
            return RectangleKind::Unsupported;
        }
        if !self.bx.contains_box(b) {
            return RectangleKind::NotGood;
        }
        let n = self.side();
        let kind = if (0..d).all(|i| b.side(i) < n) {
            RectangleKind::Interior
        } else {
            let partial: Vec<usize> = (0..d).filter(|&i| b.side(i) < n).collect();
            match partial.as_slice() {
                [i] => {
                    let (lo, hi) = (self.bx.lo(*i), self.bx.hi(*i));
                    if b.lo(*i) == lo && lo < b.hi(*i) && b.hi(*i) < hi {
                        RectangleKind::HalfSpace { axis: *i, k: b.hi(*i), upper: false }
                    } else if b.hi(*i) == hi && lo < b.lo(*i) && b.lo(*i) < hi {
                        RectangleKind::HalfSpace { axis: *i, k: b.lo(*i), upper: true }
                    } else {
                        RectangleKind::NotGood
                    }
                }
                _ => RectangleKind::NotGood,
            }
        };
        if kind == RectangleKind::NotGood {
            return kind;
        }
        // Empty pieces are not path connected.
        let cells = self.rectangle_complexes(b).expect("checked containment");
        if cells.inside.is_empty() || cells.boundary.is_empty() {
            return RectangleKind::NotGood;
        }
        kind
    }

    pub fn is_good_rectangle(&self, b: &LatticeBox) -> bool {
        self.classify_rectangle(b).is_good()
    }

    /// P₁ in S₂(B), P₂ in S₂ᶜ(B), neither touching ∂S₂(B), B good.
    pub fn well_separates(&self, b: &LatticeBox, p1: &PlaquetteSet, p2: &PlaquetteSet) -> bool {
        if !self.is_good_rectangle(b) {
            return false;
        }
        let cells = self.rectangle_complexes(b).expect("good implies inside");
        cells.separates(p1, p2)
    }

    /// Breadth-first spanning tree from `root`, visiting neighbours by edge index.
    pub fn spanning_tree(&self, root: usize) -> SpanningTree {
        let mut parent = vec![None; self.num_vertices()];
        let mut seen = vec![false; self.num_vertices()];
        let mut in_tree = vec![false; self.num_edges()];
        let mut queue = std::collections::VecDeque::from([root]);
        seen[root] = true;
        while let Some(v) = queue.pop_front() {
            for &(e, w) in &self.adjacency[v] {
                if !seen[w] {
                    seen[w] = true;
                    in_tree[e] = true;
                    parent[w] = Some(if self.edges[e].tail == v { DirEdge::fwd(e) } else { DirEdge::back(e) });
                    queue.push_back(w);
                }
            }
        }
        SpanningTree::from_parts(self, root, in_tree)
    }

    /// Spanning tree containing spanning forests of ∂S₂(B), then S₂(B), then S₂ᶜ(B).
    pub fn constrained_spanning_tree(&self, b: &LatticeBox, root: usize) -> Result<ConstrainedTree, LatticeError> {
        let cells = self.rectangle_complexes(b)?;
        let e_bd = self.edges_of(&cells.boundary);
        let e_in = self.edges_of(&cells.inside);
        let e_out = self.edges_of(&cells.outside);
        let mut uf = UnionFind::<usize>::new(self.num_vertices());
        let mut in_tree = vec![false; self.num_edges()];
        let phases = [&e_bd, &e_in, &e_out, &CellSet::full(self.num_edges())];
        for set in phases {
            for e in set.iter() {
                let ed = &self.edges[e];
                if uf.union(ed.tail, ed.head) {
                    in_tree[e] = true;
                }
            }
        }
        let tree = SpanningTree::from_parts(self, root, in_tree);
        let check = |edges: &CellSet| tree.spans_subgraph(self, edges);
        let report = ForestReport {
            spans_boundary: check(&e_bd),
            spans_inside: check(&e_in),
            spans_outside: check(&e_out),
        };
        Ok(ConstrainedTree { tree, report, cells })
    }
}

/// Outcome of the good-rectangle classifier.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum RectangleKind {
    /// All sides strictly shorter than the lattice side.
    Interior,
    /// `{x_axis ≤ k}` or `{x_axis ≥ k}` with `k` strictly inside.
    HalfSpace { axis: usize, k: i32, upper: bool },
    NotGood,
    Unsupported,
}

impl RectangleKind {
    pub fn is_good(self) -> bool {
        matches!(self, RectangleKind::Interior | RectangleKind::HalfSpace { .. })
    }
}

/// Plaquette pieces of a sub-rectangle.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RectangleCells {
    pub bx: LatticeBox,
    /// S₂(B)
    pub inside: PlaquetteSet,
    /// ∂S₂(B)
    pub boundary: PlaquetteSet,
    /// S₂ᶜ(B)
    pub outside: PlaquetteSet,
}

impl RectangleCells {
    pub fn inside_strict(&self) -> PlaquetteSet {
        self.inside.difference(&self.boundary)
    }

    pub fn outside_strict(&self) -> PlaquetteSet {
        self.outside.difference(&self.boundary)
    }

    /// Set-level separation test (goodness checked by the caller).
    pub fn separates(&self, p1: &PlaquetteSet, p2: &PlaquetteSet) -> bool {
        p1.is_subset(&self.inside)
            && p2.is_subset(&self.outside)
            && !p1.intersects(&self.boundary)
            && !p2.intersects(&self.boundary)
    }
}

/// Which pieces the constrained tree restricts to spanning forests of.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct ForestReport {
    pub spans_boundary: bool,
    pub spans_inside: bool,
    pub spans_outside: bool,
}

impl ForestReport {
    pub fn all(&self) -> bool {
        self.spans_boundary && self.spans_inside && self.spans_outside
    }
}

#[derive(Clone, Debug)]
pub struct ConstrainedTree {
    pub tree: SpanningTree,
    pub report: ForestReport,
    pub cells: RectangleCells,
}

/// Rooted spanning tree with tree paths `w_x` and co-tree numbering.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpanningTree {
    root: usize,
    parent: Vec<Option<DirEdge>>,
    depth: Vec<usize>,
    in_tree: Vec<bool>,
    cotree_index: Vec<Option<usize>>,
    cotree: Vec<usize>,
}

impl SpanningTree {
    /// Orients a set of tree edges from `root` by breadth-first search.
    fn from_parts(cx: &CellComplex, root: usize, in_tree: Vec<bool>) -> Self {
        let nv = cx.num_vertices();
        let mut parent = vec![None; nv];
        let mut depth = vec![usize::MAX; nv];
        depth[root] = 0;
        let mut queue = std::collections::VecDeque::from([root]);
        while let Some(v) = queue.pop_front() {
            for &(e, w) in cx.neighbours(v) {
                if in_tree[e] && depth[w] == usize::MAX {
                    depth[w] = depth[v] + 1;
                    parent[w] = Some(if cx.edge(e).tail == v { DirEdge::fwd(e) } else { DirEdge::back(e) });
                    queue.push_back(w);
                }
            }
        }
        let mut cotree_index = vec![None; cx.num_edges()];
        let mut cotree = Vec::new();
        for e in 0..cx.num_edges() {
            if !in_tree[e] {
                cotree_index[e] = Some(cotree.len());
                cotree.push(e);
            }
        }
        SpanningTree { root, parent, depth, in_tree, cotree_index, cotree }
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn is_tree_edge(&self, e: usize) -> bool {
        self.in_tree[e]
    }

    pub fn tree_edge_count(&self) -> usize {
        self.in_tree.iter().filter(|&&t| t).count()
    }

    pub fn cotree_edges(&self) -> &[usize] {
        &self.cotree
    }

    pub fn cotree_index(&self, e: usize) -> Option<usize> {
        self.cotree_index[e]
    }

    /// Edge from the parent into `v` (None at the root).
    pub fn parent(&self, v: usize) -> Option<DirEdge> {
        self.parent[v]
    }

    pub fn depth(&self, v: usize) -> usize {
        self.depth[v]
    }

    /// Vertices sorted by depth (parents before children).
    pub fn order(&self) -> Vec<usize> {
        let mut v: Vec<usize> = (0..self.depth.len()).collect();
        v.sort_by_key(|&x| (self.depth[x], x));
        v
    }

    /// Tree path `w_x` from the root to `x`.
    pub fn path(&self, cx: &CellComplex, x: usize) -> Vec<DirEdge> {
        let mut rev = Vec::new();
        let mut v = x;
        while let Some(d) = self.parent[v] {
            rev.push(d);
            v = cx.source(d);
        }
        rev.reverse();
        rev
    }

    /// Connected, acyclic and spanning.
    pub fn validate(&self, cx: &CellComplex) -> bool {
        let n = cx.num_vertices();
        if self.tree_edge_count() != n - 1 || self.depth.contains(&usize::MAX) {
            return false;
        }
        let mut uf = UnionFind::<usize>::new(n);
        (0..cx.num_edges()).filter(|&e| self.in_tree[e]).all(|e| uf.union(cx.edge(e).tail, cx.edge(e).head))
    }

    /// Whether tree edges inside `edges` form a spanning forest of that subgraph.
    pub fn spans_subgraph(&self, cx: &CellComplex, edges: &CellSet) -> bool {
        let mut sub = UnionFind::<usize>::new(cx.num_vertices());
        for e in edges.iter().filter(|&e| self.in_tree[e]) {
            sub.union(cx.edge(e).tail, cx.edge(e).head);
        }
        edges.iter().all(|e| sub.equiv(cx.edge(e).tail, cx.edge(e).head))
    }
}

/// Closed edge path.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Loop {
    start: usize,
    steps: Vec<DirEdge>,
}

impl Loop {
    pub fn new(cx: &CellComplex, start: usize, steps: Vec<DirEdge>) -> Result<Self, LatticeError> {
        let end = walk(cx, start, &steps)?;
        if end != start {
            return Err(LatticeError::NotClosed);
        }
        Ok(Loop { start, steps })
    }

    pub fn plaquette(cx: &CellComplex, p: usize) -> Self {
        Loop { start: cx.plaquette(p).base, steps: cx.plaquette_loop(p).to_vec() }
    }

    pub fn start(&self) -> usize {
        self.start
    }

    pub fn steps(&self) -> &[DirEdge] {
        &self.steps
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Same loop read from step `k`.
    pub fn rotated(&self, cx: &CellComplex, k: usize) -> Self {
        if self.steps.is_empty() {
            return self.clone();
        }
        let k = k % self.steps.len();
        let mut steps = self.steps[k..].to_vec();
        steps.extend_from_slice(&self.steps[..k]);
        Loop { start: cx.source(steps[0]), steps }
    }

    /// Inserts `d d⁻¹` before step `at` (at must be a valid position).
    pub fn with_backtrack(&self, cx: &CellComplex, at: usize, d: DirEdge) -> Result<Self, LatticeError> {
        let mut steps = self.steps.clone();
        steps.splice(at..at, [d, d.reversed()]);
        Loop::new(cx, self.start, steps)
    }
}

/// Follows an edge sequence, returning the end vertex.
pub fn walk(cx: &CellComplex, start: usize, steps: &[DirEdge]) -> Result<usize, LatticeError> {
    let mut v = start;
    for (i, &d) in steps.iter().enumerate() {
        if cx.source(d) != v {
            return Err(LatticeError::NotChained(i));
        }
        v = cx.target(d);
    }
    Ok(v)
}
