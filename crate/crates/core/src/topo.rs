//! Vortex and knot decompositions of plaquette sets, minimal cubes and the
//! hierarchy graphs used to count knots.

use petgraph::unionfind::UnionFind;
use thiserror::Error;

use crate::cellset::{CellSet, PlaquetteSet};
use crate::lattice::{CellComplex, LatticeBox, RectangleCells, RectangleKind};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TopoError {
    #[error("knot machinery needs dimension 3 or 4")]
    Unsupported,
    #[error("no cube of the lattice holds the set away from its boundary layer")]
    NoAdmissibleCube,
    #[error("knot size {0} exceeds the enumeration limit {1}")]
    TooLarge(usize, usize),
}

/// Partition of `ps` into components under "share a 3-cell", ordered by least plaquette.
pub fn vortex_decomposition(cx: &CellComplex, ps: &PlaquetteSet) -> Vec<PlaquetteSet> {
    let n = cx.num_plaquettes();
    let mut uf = UnionFind::<usize>::new(n);
    for p in ps.iter() {
        for &c in cx.plaquette_cubes(p) {
            for &q in &cx.cube(c).faces {
                if q != p && ps.contains(q) {
                    uf.union(p, q);
                }
            }
        }
    }
    let mut parts: Vec<PlaquetteSet> = Vec::new();
    let mut slot = vec![usize::MAX; n];
    for p in ps.iter() {
        let r = uf.find(p);
        if slot[r] == usize::MAX {
            slot[r] = parts.len();
            parts.push(CellSet::empty(n));
        }
        parts[slot[r]].insert(p);
    }
    parts
}

/// A classifier-good rectangle with its plaquette pieces.
#[derive(Clone, Debug)]
pub struct Separator {
    pub kind: RectangleKind,
    pub cells: RectangleCells,
    inside_strict: PlaquetteSet,
}

impl Separator {
    pub fn bx(&self) -> &LatticeBox {
        &self.cells.bx
    }

    /// S₂(B) ∖ ∂S₂(B).
    pub fn inside_strict(&self) -> &PlaquetteSet {
        &self.inside_strict
    }

    pub fn boundary(&self) -> &PlaquetteSet {
        &self.cells.boundary
    }

    /// The part of `x` this separator peels off, if it splits `x` into two nonempty halves.
    pub fn split_of(&self, x: &PlaquetteSet) -> Option<PlaquetteSet> {
        if x.intersects(&self.cells.boundary) {
            return None;
        }
        let a = x.intersection(&self.inside_strict);
        (!a.is_empty() && a.len() < x.len()).then_some(a)
    }
}

/// Every good rectangle of a lattice, in lexicographic order of `(lo, hi)` per axis.
#[derive(Clone, Debug)]
pub struct SeparatorCatalog {
    separators: Vec<Separator>,
}

impl SeparatorCatalog {
    pub fn new(cx: &CellComplex) -> Result<Self, TopoError> {
        if cx.dim() < 3 {
            return Err(TopoError::Unsupported);
        }
        let d = cx.dim();
        let lat = cx.lattice();
        let intervals: Vec<Vec<(i32, i32)>> = (0..d)
            .map(|i| {
                let (lo, hi) = (lat.lo(i), lat.hi(i));
                (lo..=hi).flat_map(|a| (a..=hi).map(move |b| (a, b))).collect()
            })
            .collect();
        let mut separators = Vec::new();
        let mut idx = vec![0usize; d];
        'outer: loop {
            let ranges: Vec<(i32, i32)> = (0..d).map(|i| intervals[i][idx[i]]).collect();
            let b = LatticeBox::new(&ranges).expect("valid intervals");
            let kind = cx.classify_rectangle(&b);
            if kind.is_good() {
                let cells = cx.rectangle_complexes(&b).expect("inside lattice");
                let inside_strict = cells.inside_strict();
                separators.push(Separator { kind, cells, inside_strict });
            }
            for i in (0..d).rev() {
                idx[i] += 1;
                if idx[i] < intervals[i].len() {
                    continue 'outer;
                }
                idx[i] = 0;
            }
            break;
        }
        Ok(SeparatorCatalog { separators })
    }

    /// No separators: every set is a single knot.
    pub fn empty() -> Self {
        SeparatorCatalog { separators: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.separators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.separators.is_empty()
    }

    pub fn get(&self, i: usize) -> &Separator {
        &self.separators[i]
    }

    pub fn iter(&self) -> impl Iterator<Item = &Separator> {
        self.separators.iter()
    }

    /// First separator (catalog index) that splits `x`.
    pub fn find_split(&self, x: &PlaquetteSet) -> Option<(usize, PlaquetteSet)> {
        self.separators.iter().enumerate().find_map(|(i, s)| s.split_of(x).map(|a| (i, a)))
    }

    /// True when no good rectangle well separates a nonempty part of `k` from the rest.
    pub fn is_knot(&self, k: &PlaquetteSet) -> bool {
        !k.is_empty() && self.find_split(k).is_none()
    }
}

/// Ordered parts `K₁ … K_m` with separators `B₁ … B_{m−1}` (catalog indices).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KnotDecomposition {
    pub parts: Vec<PlaquetteSet>,
    pub separators: Vec<usize>,
    /// False if some peeled part could itself still be split.
    pub maximal: bool,
}

impl KnotDecomposition {
    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    /// Index of the part containing all of `b`, if one does.
    pub fn part_containing(&self, b: &PlaquetteSet) -> Option<usize> {
        if b.is_empty() {
            return None;
        }
        self.parts.iter().position(|k| b.is_subset(k))
    }

    pub fn part_of(&self, p: usize) -> Option<usize> {
        self.parts.iter().position(|k| k.contains(p))
    }

    /// Each `B_i` separates `K_i` from `K_{i+1} ∪ … ∪ K_m`.
    pub fn chain_holds(&self, catalog: &SeparatorCatalog) -> bool {
        let n = match self.parts.first() {
            Some(k) => k.universe(),
            None => return self.separators.is_empty(),
        };
        if self.separators.len() + 1 != self.parts.len() {
            return false;
        }
        let mut rest = self.parts.iter().fold(CellSet::empty(n), |acc, k| acc.union(k));
        for (i, &s) in self.separators.iter().enumerate() {
            rest = rest.difference(&self.parts[i]);
            if !catalog.get(s).cells.separates(&self.parts[i], &rest) {
                return false;
            }
        }
        true
    }

    /// No catalog separator splits any part.
    pub fn certify_maximal(&self, catalog: &SeparatorCatalog) -> bool {
        self.parts.iter().all(|k| catalog.is_knot(k))
    }
}

/// Peels parts off `ps` one separator at a time.
///
/// A peelable part is `rest ∩ inside(B)` for a separator avoiding `rest` on
/// its boundary layer. Among those, the smallest one that is itself a knot is
/// taken (earliest separator on ties); what is left at the end cannot be split.
pub fn knot_decomposition(cx: &CellComplex, catalog: &SeparatorCatalog, ps: &PlaquetteSet) -> KnotDecomposition {
    debug_assert_eq!(ps.universe(), cx.num_plaquettes());
    let mut parts = Vec::new();
    let mut separators = Vec::new();
    let mut maximal = true;
    let mut rest = ps.clone();
    while !rest.is_empty() {
        let mut best: Option<(usize, usize, PlaquetteSet, bool)> = None;
        for (i, s) in catalog.iter().enumerate() {
            let Some(a) = s.split_of(&rest) else { continue };
            let knot = catalog.is_knot(&a);
            let better = match &best {
                None => true,
                Some((len, _, _, bk)) => (knot && !bk) || (knot == *bk && a.len() < *len),
            };
            if better {
                best = Some((a.len(), i, a, knot));
            }
        }
        match best {
            Some((_, i, a, knot)) => {
                maximal &= knot;
                rest = rest.difference(&a);
                parts.push(a);
                separators.push(i);
            }
            None => {
                parts.push(rest.clone());
                break;
            }
        }
    }
    KnotDecomposition { parts, separators, maximal }
}

/// The cube `B(P)`: least side, then least corner, with `P` inside it and off its boundary layer.
pub fn minimal_cube(cx: &CellComplex, ps: &PlaquetteSet) -> Result<LatticeBox, TopoError> {
    let d = cx.dim();
    let lat = cx.lattice();
    let n = cx.side();
    for s in 0..=n {
        let mut corner = vec![0i32; d];
        'corners: loop {
            let ranges: Vec<(i32, i32)> = (0..d).map(|i| (lat.lo(i) + corner[i], lat.lo(i) + corner[i] + s)).collect();
            let b = LatticeBox::new(&ranges).expect("valid cube");
            let cells = cx.rectangle_complexes(&b).expect("inside lattice");
            if ps.is_subset(&cells.inside) && !ps.intersects(&cells.boundary) {
                return Ok(b);
            }
            for i in (0..d).rev() {
                corner[i] += 1;
                if corner[i] <= n - s {
                    continue 'corners;
                }
                corner[i] = 0;
            }
            break;
        }
    }
    Err(TopoError::NoAdmissibleCube)
}

/// `J(P, P')`: some plaquette of one set lies in the other's minimal cube.
pub fn j_relation(cx: &CellComplex, a: &PlaquetteSet, b: &PlaquetteSet) -> Result<bool, TopoError> {
    let ba = minimal_cube(cx, a)?;
    let bb = minimal_cube(cx, b)?;
    Ok(a.iter().any(|p| cx.plaquette_in_box(p, &bb)) || b.iter().any(|p| cx.plaquette_in_box(p, &ba)))
}

/// One level `G^s(P)` of the hierarchy.
#[derive(Clone, Debug)]
pub struct HierarchyLevel {
    pub vertices: Vec<PlaquetteSet>,
    pub edges: Vec<(usize, usize)>,
}

impl HierarchyLevel {
    pub fn isolated(&self) -> Vec<usize> {
        (0..self.vertices.len())
            .filter(|&v| !self.edges.iter().any(|&(a, b)| a == v || b == v))
            .collect()
    }
}

#[derive(Clone, Debug)]
pub struct Hierarchy {
    pub levels: Vec<HierarchyLevel>,
    /// First level with a single vertex, if reached within the cap.
    pub s_star: Option<usize>,
}

/// Builds `G⁰(P), G¹(P), …` until one vertex remains, the graph stops merging,
/// or `⌊log₂|P|⌋ + 1` levels have been built.
pub fn hierarchy_graphs(cx: &CellComplex, ps: &PlaquetteSet) -> Result<Hierarchy, TopoError> {
    if cx.dim() < 3 {
        return Err(TopoError::Unsupported);
    }
    let cap = if ps.is_empty() { 1 } else { (usize::BITS - ps.len().leading_zeros()) as usize };
    let mut vertices = vortex_decomposition(cx, ps);
    let mut levels = Vec::new();
    let mut s_star = None;
    for s in 0..=cap {
        if vertices.len() <= 1 {
            s_star = Some(s);
            levels.push(HierarchyLevel { vertices, edges: Vec::new() });
            break;
        }
        let cubes = vertices.iter().map(|v| minimal_cube(cx, v)).collect::<Result<Vec<_>, _>>()?;
        let mut edges = Vec::new();
        for i in 0..vertices.len() {
            for j in i + 1..vertices.len() {
                let linked = vertices[i].iter().any(|p| cx.plaquette_in_box(p, &cubes[j]))
                    || vertices[j].iter().any(|p| cx.plaquette_in_box(p, &cubes[i]));
                if linked {
                    edges.push((i, j));
                }
            }
        }
        let mut uf = UnionFind::<usize>::new(vertices.len());
        for &(a, b) in &edges {
            uf.union(a, b);
        }
        let mut next: Vec<PlaquetteSet> = Vec::new();
        let mut slot = vec![usize::MAX; vertices.len()];
        for (i, v) in vertices.iter().enumerate() {
            let r = uf.find(i);
            if slot[r] == usize::MAX {
                slot[r] = next.len();
                next.push(CellSet::empty(cx.num_plaquettes()));
            }
            next[slot[r]].union_with(v);
        }
        let stalled = next.len() == vertices.len();
        levels.push(HierarchyLevel { vertices, edges });
        if stalled {
            break;
        }
        vertices = next;
    }
    Ok(Hierarchy { levels, s_star })
}

pub const MAX_KNOT_ENUMERATION: usize = 4;

/// All knots of size `m` containing plaquette `p`, by filtering every `m`-subset.
pub fn enumerate_knots_containing(
    cx: &CellComplex,
    catalog: &SeparatorCatalog,
    p: usize,
    m: usize,
) -> Result<Vec<PlaquetteSet>, TopoError> {
    if m > MAX_KNOT_ENUMERATION {
        return Err(TopoError::TooLarge(m, MAX_KNOT_ENUMERATION));
    }
    let n = cx.num_plaquettes();
    let mut out = Vec::new();
    if m == 0 {
        return Ok(out);
    }
    let others: Vec<usize> = (0..n).filter(|&q| q != p).collect();
    let mut chosen = Vec::with_capacity(m);
    subsets(&others, m - 1, 0, &mut chosen, &mut |rest| {
        let k = CellSet::from_indices(n, std::iter::once(p).chain(rest.iter().copied()));
        if catalog.is_knot(&k) {
            out.push(k);
        }
    });
    Ok(out)
}

fn subsets(items: &[usize], k: usize, from: usize, chosen: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
    if chosen.len() == k {
        f(chosen);
        return;
    }
    for i in from..items.len() {
        if items.len() - i < k - chosen.len() {
            break;
        }
        chosen.push(items[i]);
        subsets(items, k, i + 1, chosen, f);
        chosen.pop();
    }
}

/// Largest coordinate gap between two plaquette sets: the greatest `m₂ − m₁`
/// over axes with one set at `x_i ≤ m₁` and the other at `x_i ≥ m₂`.
pub fn coordinate_separation(cx: &CellComplex, a: &PlaquetteSet, b: &PlaquetteSet) -> i32 {
    let va: Vec<usize> = cx.vertices_of(a).iter().collect();
    let vb: Vec<usize> = cx.vertices_of(b).iter().collect();
    if va.is_empty() || vb.is_empty() {
        return 0;
    }
    (0..cx.dim())
        .map(|i| {
            let range = |vs: &[usize]| {
                let xs = vs.iter().map(|&v| cx.coord(v)[i]);
                (xs.clone().min().unwrap(), xs.max().unwrap())
            };
            let (amin, amax) = range(&va);
            let (bmin, bmax) = range(&vb);
            (bmin - amax).max(amin - bmax)
        })
        .max()
        .unwrap_or(0)
}

/// `|P₁| + |P₂| + L − 1`.
pub fn knot_size_floor_value(p1: usize, p2: usize, separation: i32) -> i64 {
    p1 as i64 + p2 as i64 + separation as i64 - 1
}

/// Whether `|K| ≥ |P₁| + |P₂| + L − 1`.
pub fn knot_size_floor(p1: &PlaquetteSet, p2: &PlaquetteSet, separation: i32, k: &PlaquetteSet) -> bool {
    k.len() as i64 >= knot_size_floor_value(p1.len(), p2.len(), separation)
}
