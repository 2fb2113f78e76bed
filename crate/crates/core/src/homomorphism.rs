//! Holonomy homomorphisms ψ on the free group generated by co-tree loops.

use std::sync::Arc;

use thiserror::Error;

use crate::cellset::{CellSet, PlaquetteSet};
use crate::gibbs::{path_product, EdgeConfig, GibbsSpec};
use crate::group::{Element, GaugeGroup, GroupTable};
use crate::lattice::{walk, CellComplex, DirEdge, Loop, SpanningTree};
use crate::scalar::{compensated_sum, Real};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HomError {
    #[error("path is not a closed loop")]
    NotClosed,
    #[error("edge sequence does not chain")]
    NotChained,
    #[error("enumeration needs {needed} states, cap is {cap}")]
    CapExceeded { needed: f64, cap: u64 },
    #[error("frames have different roots")]
    RootMismatch,
}

/// Letter `a_e^{±1}` of a co-tree generator.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter {
    pub generator: usize,
    pub inverse: bool,
}

/// Freely reduced word in the co-tree generators.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct GeneratorWord {
    letters: Vec<Letter>,
}

impl GeneratorWord {
    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn push(&mut self, l: Letter) {
        match self.letters.last() {
            Some(&last) if last.generator == l.generator && last.inverse != l.inverse => {
                self.letters.pop();
            }
            _ => self.letters.push(l),
        }
    }

    pub fn concat(&self, other: &GeneratorWord) -> GeneratorWord {
        let mut w = self.clone();
        for &l in &other.letters {
            w.push(l);
        }
        w
    }

    pub fn inverse(&self) -> GeneratorWord {
        GeneratorWord {
            letters: self.letters.iter().rev().map(|l| Letter { generator: l.generator, inverse: !l.inverse }).collect(),
        }
    }

    pub fn is_reduced(&self) -> bool {
        self.letters
            .windows(2)
            .all(|w| !(w[0].generator == w[1].generator && w[0].inverse != w[1].inverse))
    }
}

/// Images of the co-tree generators `[a_e]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Homomorphism {
    images: Vec<Element>,
}

impl Homomorphism {
    pub fn trivial(rank: usize) -> Self {
        Homomorphism { images: vec![Element::IDENTITY; rank] }
    }

    pub fn from_images(images: Vec<Element>) -> Self {
        Homomorphism { images }
    }

    pub fn images(&self) -> &[Element] {
        &self.images
    }

    pub fn image(&self, generator: usize) -> Element {
        self.images[generator]
    }

    pub fn rank(&self) -> usize {
        self.images.len()
    }

    pub fn is_trivial(&self) -> bool {
        self.images.iter().all(|g| g.is_identity())
    }

    /// Mixed-radix decoding, generator 0 least significant.
    pub fn from_index(mut index: u64, rank: usize, order: usize) -> Self {
        let images = (0..rank)
            .map(|_| {
                let g = Element((index % order as u64) as u16);
                index /= order as u64;
                g
            })
            .collect();
        Homomorphism { images }
    }

    pub fn index(&self, order: usize) -> u64 {
        self.images.iter().rev().fold(0u64, |acc, g| acc * order as u64 + g.0 as u64)
    }
}

/// A spanning tree with the free-group presentation it induces.
#[derive(Clone, Debug)]
pub struct Presentation {
    complex: Arc<CellComplex>,
    tree: SpanningTree,
    plaquette_words: Vec<GeneratorWord>,
}

impl Presentation {
    pub fn new(complex: Arc<CellComplex>, tree: SpanningTree) -> Self {
        let plaquette_words = (0..complex.num_plaquettes())
            .map(|p| word_of_steps(&tree, &complex.plaquette_loop(p)))
            .collect();
        Presentation { complex, tree, plaquette_words }
    }

    /// Lexicographic breadth-first tree rooted at `root`.
    pub fn lexicographic(complex: Arc<CellComplex>, root: usize) -> Self {
        let tree = complex.spanning_tree(root);
        Self::new(complex, tree)
    }

    pub fn complex(&self) -> &Arc<CellComplex> {
        &self.complex
    }

    pub fn tree(&self) -> &SpanningTree {
        &self.tree
    }

    pub fn root(&self) -> usize {
        self.tree.root()
    }

    /// Number of free generators, |Λ₁| − |Λ₀| + 1.
    pub fn rank(&self) -> usize {
        self.tree.cotree_edges().len()
    }

    pub fn omega_size(&self, order: usize) -> f64 {
        (order as f64).powi(self.rank() as i32)
    }

    /// Word of an edge path: co-tree letters in order, tree edges dropped.
    pub fn word_of_steps(&self, steps: &[DirEdge]) -> GeneratorWord {
        word_of_steps(&self.tree, steps)
    }

    pub fn generator_word(&self, gamma: &Loop) -> GeneratorWord {
        self.word_of_steps(gamma.steps())
    }

    /// ξ_γ = w_x γ w_x⁻¹ for γ based at x.
    pub fn xi_of_loop(&self, gamma: &Loop) -> GeneratorWord {
        let w = self.tree.path(&self.complex, gamma.start());
        self.xi_with_path(gamma, &w).expect("tree path reaches every vertex")
    }

    /// ℓ γ ℓ⁻¹ for an arbitrary path ℓ from the root to γ's start.
    pub fn xi_with_path(&self, gamma: &Loop, path: &[DirEdge]) -> Result<GeneratorWord, HomError> {
        let end = walk(&self.complex, self.root(), path).map_err(|_| HomError::NotChained)?;
        if end != gamma.start() {
            return Err(HomError::NotChained);
        }
        let l = self.word_of_steps(path);
        Ok(l.concat(&self.generator_word(gamma)).concat(&l.inverse()))
    }

    /// Loop `w_x e w_y⁻¹` for co-tree generator `k`, as an edge path.
    pub fn generator_loop(&self, k: usize) -> Vec<DirEdge> {
        let e = self.tree.cotree_edges()[k];
        let ed = self.complex.edge(e);
        let mut steps = self.tree.path(&self.complex, ed.tail);
        steps.push(DirEdge::fwd(e));
        steps.extend(self.tree.path(&self.complex, ed.head).iter().rev().map(|d| d.reversed()));
        steps
    }

    pub fn plaquette_word(&self, p: usize) -> &GeneratorWord {
        &self.plaquette_words[p]
    }

    pub fn eval(&self, t: &GroupTable, psi: &Homomorphism, word: &GeneratorWord) -> Element {
        eval_word(t, psi, word)
    }

    /// ψ(ξ_p).
    #[inline]
    pub fn plaquette_image(&self, t: &GroupTable, psi: &Homomorphism, p: usize) -> Element {
        eval_word(t, psi, &self.plaquette_words[p])
    }

    /// ψ_{x₀}(σ): image of a_e is the holonomy of σ around `w_x e w_y⁻¹`.
    pub fn psi_of_config<F: Real>(&self, group: &GaugeGroup<F>, sigma: &EdgeConfig) -> Homomorphism {
        let t = &group.table;
        let mut h = vec![Element::IDENTITY; self.complex.num_vertices()];
        for v in self.tree.order() {
            if let Some(d) = self.tree.parent(v) {
                h[v] = t.mul(h[self.complex.source(d)], sigma.along(group, d));
            }
        }
        let images = self
            .tree
            .cotree_edges()
            .iter()
            .map(|&e| {
                let ed = self.complex.edge(e);
                t.mul(t.mul(h[ed.tail], sigma.get(e)), t.inv(h[ed.head]))
            })
            .collect();
        Homomorphism { images }
    }

    /// The GF(T) representative: identity on the tree, ψ(a_e) on co-tree edges.
    pub fn gauge_fix(&self, psi: &Homomorphism) -> EdgeConfig {
        let mut sigma = EdgeConfig::identity(self.complex.num_edges());
        for (k, &e) in self.tree.cotree_edges().iter().enumerate() {
            sigma.set(e, psi.image(k));
        }
        sigma
    }

    pub fn support(&self, t: &GroupTable, psi: &Homomorphism) -> PlaquetteSet {
        CellSet::from_indices(
            self.complex.num_plaquettes(),
            (0..self.complex.num_plaquettes()).filter(|&p| !self.plaquette_image(t, psi, p).is_identity()),
        )
    }

    /// Re-expresses ψ in the generators of another frame with the same root.
    pub fn reencode(&self, t: &GroupTable, psi: &Homomorphism, target: &Presentation) -> Result<Homomorphism, HomError> {
        if self.root() != target.root() {
            return Err(HomError::RootMismatch);
        }
        let images = (0..target.rank())
            .map(|k| eval_word(t, psi, &self.word_of_steps(&target.generator_loop(k))))
            .collect();
        Ok(Homomorphism { images })
    }

    /// Π_p φ_β(ψ(ξ_p)).
    pub fn nu_weight<F: Real>(&self, spec: &GibbsSpec<F>, psi: &Homomorphism) -> F {
        let g = &spec.group;
        (0..self.complex.num_plaquettes())
            .map(|p| g.phi(spec.beta(), self.plaquette_image(&g.table, psi, p)))
            .fold(F::one(), |a, b| a * b)
    }

    /// Class indices of ψ(ξ_p), sorted; equal multisets give equal ν-weights.
    pub fn class_multiset<F: Real>(&self, group: &GaugeGroup<F>, psi: &Homomorphism) -> Vec<usize> {
        let mut v: Vec<usize> = (0..self.complex.num_plaquettes())
            .map(|p| group.class_of(self.plaquette_image(&group.table, psi, p)))
            .collect();
        v.sort_unstable();
        v
    }

    /// Exact normalized ν, indexed by [`Homomorphism::index`].
    pub fn enumerate_nu<F: Real>(&self, spec: &GibbsSpec<F>, cap: u64) -> Result<Vec<F>, HomError> {
        let order = spec.group.order();
        let needed = self.omega_size(order);
        if needed > cap as f64 {
            return Err(HomError::CapExceeded { needed, cap });
        }
        let w: Vec<F> = (0..needed as u64)
            .map(|i| self.nu_weight(spec, &Homomorphism::from_index(i, self.rank(), order)))
            .collect();
        let z = compensated_sum(w.iter().copied());
        Ok(w.into_iter().map(|x| x / z).collect())
    }

    /// All ψ with supp(ψ) ⊆ P, sorted.
    pub fn solve_support_constraints<F: Real>(
        &self,
        group: &GaugeGroup<F>,
        allowed: &PlaquetteSet,
        cap: u64,
    ) -> Result<Vec<Homomorphism>, HomError> {
        let constraints: Vec<&GeneratorWord> = (0..self.complex.num_plaquettes())
            .filter(|&p| !allowed.contains(p))
            .map(|p| &self.plaquette_words[p])
            .filter(|w| !w.is_empty())
            .collect();
        match cyclic_prime_exponents(&group.table) {
            Some(exps) => solve_linear(&group.table, &exps, self.rank(), &constraints, cap),
            None => solve_dfs(&group.table, self.rank(), &constraints, cap),
        }
    }

    /// Σ_γ's law transferred: χ(ψ(ξ_γ)) for σ.
    pub fn xi_image(&self, t: &GroupTable, psi: &Homomorphism, gamma: &Loop) -> Element {
        eval_word(t, psi, &self.xi_of_loop(gamma))
    }

    /// Holonomy of σ along a path.
    pub fn config_holonomy<F: Real>(&self, group: &GaugeGroup<F>, sigma: &EdgeConfig, steps: &[DirEdge]) -> Element {
        path_product(group, sigma, steps)
    }
}

fn word_of_steps(tree: &SpanningTree, steps: &[DirEdge]) -> GeneratorWord {
    let mut w = GeneratorWord::default();
    for d in steps {
        if let Some(k) = tree.cotree_index(d.edge) {
            w.push(Letter { generator: k, inverse: !d.forward });
        }
    }
    w
}

#[inline]
pub fn eval_word(t: &GroupTable, psi: &Homomorphism, word: &GeneratorWord) -> Element {
    word.letters.iter().fold(Element::IDENTITY, |acc, l| {
        let g = psi.images[l.generator];
        t.mul(acc, if l.inverse { t.inv(g) } else { g })
    })
}

/// For a cyclic group of prime order, the exponent of each element w.r.t. a generator.
fn cyclic_prime_exponents(t: &GroupTable) -> Option<(Vec<u32>, Vec<Element>)> {
    let n = t.order();
    if n < 2 || (2..n).any(|d| d * d <= n && n.is_multiple_of(d)) {
        return None;
    }
    let gen = t.cyclic_generator()?;
    let mut exps = vec![0u32; n];
    let mut powers = vec![Element::IDENTITY; n];
    let mut x = Element::IDENTITY;
    for (k, slot) in powers.iter_mut().enumerate() {
        exps[x.index()] = k as u32;
        *slot = x;
        x = t.mul(x, gen);
    }
    Some((exps, powers))
}

fn mod_inv(a: u64, p: u64) -> u64 {
    // p prime: a^{p-2}
    let (mut base, mut e, mut r) = (a % p, p - 2, 1u64);
    while e > 0 {
        if e & 1 == 1 {
            r = r * base % p;
        }
        base = base * base % p;
        e >>= 1;
    }
    r
}

fn solve_linear(
    t: &GroupTable,
    (_, powers): &(Vec<u32>, Vec<Element>),
    rank: usize,
    constraints: &[&GeneratorWord],
    cap: u64,
) -> Result<Vec<Homomorphism>, HomError> {
    let p = t.order() as u64;
    let mut rows: Vec<Vec<u64>> = constraints
        .iter()
        .map(|w| {
            let mut r = vec![0u64; rank];
            for l in w.letters() {
                let c = if l.inverse { p - 1 } else { 1 };
                r[l.generator] = (r[l.generator] + c) % p;
            }
            r
        })
        .collect();
    let mut pivots: Vec<usize> = Vec::new();
    let mut row = 0;
    for col in 0..rank {
        let Some(sel) = (row..rows.len()).find(|&r| rows[r][col] != 0) else { continue };
        rows.swap(row, sel);
        let inv = mod_inv(rows[row][col], p);
        for v in rows[row].iter_mut() {
            *v = *v * inv % p;
        }
        let pivot = rows[row].clone();
        for (r, other) in rows.iter_mut().enumerate() {
            if r != row && other[col] != 0 {
                let f = other[col];
                for (x, &y) in other.iter_mut().zip(&pivot).take(rank) {
                    *x = (*x + (p - f) * y) % p;
                }
            }
        }
        pivots.push(col);
        row += 1;
        if row == rows.len() {
            break;
        }
    }
    let free: Vec<usize> = (0..rank).filter(|c| !pivots.contains(c)).collect();
    let needed = (p as f64).powi(free.len() as i32);
    if needed > cap as f64 {
        return Err(HomError::CapExceeded { needed, cap });
    }
    let mut out = Vec::with_capacity(needed as usize);
    for idx in 0..needed as u64 {
        let mut x = vec![0u64; rank];
        let mut rem = idx;
        for &c in &free {
            x[c] = rem % p;
            rem /= p;
        }
        for (r, &pc) in pivots.iter().enumerate() {
            let s: u64 = free.iter().map(|&c| rows[r][c] * x[c] % p).sum::<u64>() % p;
            x[pc] = (p - s) % p;
        }
        out.push(Homomorphism { images: x.iter().map(|&k| powers[k as usize]).collect() });
    }
    out.sort();
    Ok(out)
}

fn solve_dfs(t: &GroupTable, rank: usize, constraints: &[&GeneratorWord], cap: u64) -> Result<Vec<Homomorphism>, HomError> {
    let mut completing: Vec<Vec<&GeneratorWord>> = vec![Vec::new(); rank];
    for w in constraints {
        let last = w.letters().iter().map(|l| l.generator).max().expect("nonempty word");
        completing[last].push(w);
    }
    let mut out = Vec::new();
    let mut psi = Homomorphism::trivial(rank);
    dfs(t, 0, &completing, &mut psi, &mut out, cap)?;
    Ok(out)
}

fn dfs(
    t: &GroupTable,
    k: usize,
    completing: &[Vec<&GeneratorWord>],
    psi: &mut Homomorphism,
    out: &mut Vec<Homomorphism>,
    cap: u64,
) -> Result<(), HomError> {
    if k == psi.rank() {
        if out.len() as u64 >= cap {
            return Err(HomError::CapExceeded { needed: (out.len() + 1) as f64, cap });
        }
        out.push(psi.clone());
        return Ok(());
    }
    let forced = completing[k].iter().find_map(|w| forced_value(t, psi, w, k));
    let candidates: Vec<Element> = match forced {
        Some(g) => vec![g],
        None => t.elements().collect(),
    };
    for g in candidates {
        psi.images[k] = g;
        if completing[k].iter().all(|w| eval_word(t, psi, w).is_identity()) {
            dfs(t, k + 1, completing, psi, out, cap)?;
        }
    }
    psi.images[k] = Element::IDENTITY;
    Ok(())
}

/// If generator `k` occurs once in `w = A x^s B`, the value making `w` trivial.
fn forced_value(t: &GroupTable, psi: &Homomorphism, w: &GeneratorWord, k: usize) -> Option<Element> {
    let pos: Vec<usize> = w.letters().iter().enumerate().filter(|(_, l)| l.generator == k).map(|(i, _)| i).collect();
    let [i] = pos.as_slice() else { return None };
    let prefix = GeneratorWord { letters: w.letters()[..*i].to_vec() };
    let suffix = GeneratorWord { letters: w.letters()[*i + 1..].to_vec() };
    let a = eval_word(t, psi, &prefix);
    let b = eval_word(t, psi, &suffix);
    // x^s = A⁻¹ B⁻¹
    let xs = t.mul(t.inv(a), t.inv(b));
    Some(if w.letters()[*i].inverse { t.inv(xs) } else { xs })
}
