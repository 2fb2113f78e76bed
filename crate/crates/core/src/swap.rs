//! Splitting homomorphisms along knot decompositions, the swap map T on pairs,
//! and the polymer weights Φ⁽²⁾.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use thiserror::Error;

use crate::cellset::{CellSet, PlaquetteSet};
use crate::gibbs::{EdgeConfig, GibbsSpec};
use crate::homomorphism::{eval_word, GeneratorWord, HomError, Homomorphism, Presentation};
use crate::lattice::{ForestReport, LatticeError};
use crate::scalar::Real;
use crate::topo::{knot_decomposition, KnotDecomposition, SeparatorCatalog, TopoError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SwapError {
    #[error(transparent)]
    Topo(#[from] TopoError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Hom(#[from] HomError),
    #[error("constrained tree does not restrict to spanning forests: {0:?}")]
    TreeNotAdapted(ForestReport),
    #[error("configuration is not trivial on shared edge {0}")]
    BoundaryNotTrivial(usize),
    #[error("support is not contained in the decomposed set")]
    SupportNotContained,
    #[error("split has {got} parts, decomposition has {expected}")]
    PartCount { got: usize, expected: usize },
    #[error("pair is not in E(B1, B2)")]
    NotInE,
}

/// A separator's constrained tree and its edge classes.
#[derive(Clone, Debug)]
pub struct Frame {
    pub pres: Presentation,
    /// Edges of both S₂(B) and S₂ᶜ(B).
    pub shared: CellSet,
    /// Edges of S₂(B) only.
    pub inside_only: CellSet,
    /// Words of this frame's generator loops in the main generators.
    from_main: Vec<GeneratorWord>,
}

/// Pair `(ψ₁, ψ₂)` with its joint support, decomposition and the knots of `B₁`, `B₂`.
#[derive(Clone, Debug)]
pub struct PairState {
    pub joint: PlaquetteSet,
    pub decomposition: Arc<KnotDecomposition>,
    pub j1: Option<usize>,
    pub j2: Option<usize>,
}

impl PairState {
    /// `B₁` and `B₂` lie in different knots.
    pub fn in_e(&self) -> bool {
        matches!((self.j1, self.j2), (Some(a), Some(b)) if a != b)
    }
}

/// Everything needed to split, swap and sum over homomorphisms on one lattice.
pub struct SwapContext<F> {
    spec: GibbsSpec<F>,
    pres: Arc<Presentation>,
    catalog: Arc<SeparatorCatalog>,
    frames: Vec<OnceLock<Result<Arc<Frame>, SwapError>>>,
    decompositions: Mutex<HashMap<PlaquetteSet, Arc<KnotDecomposition>>>,
    corrupt_theta: bool,
}

impl<F: Real> SwapContext<F> {
    pub fn new(spec: GibbsSpec<F>, root: usize) -> Result<Self, SwapError> {
        let catalog = Arc::new(SeparatorCatalog::new(&spec.complex)?);
        let pres = Arc::new(Presentation::lexicographic(spec.complex.clone(), root));
        Ok(Self::with_parts(spec, pres, catalog))
    }

    pub fn with_parts(spec: GibbsSpec<F>, pres: Arc<Presentation>, catalog: Arc<SeparatorCatalog>) -> Self {
        let frames = (0..catalog.len()).map(|_| OnceLock::new()).collect();
        SwapContext { spec, pres, catalog, frames, decompositions: Mutex::new(HashMap::new()), corrupt_theta: false }
    }

    /// Makes Θ⁻¹ perturb its output; used to exercise failure reporting.
    pub fn with_corrupted_theta(mut self) -> Self {
        self.corrupt_theta = true;
        self
    }

    pub fn spec(&self) -> &GibbsSpec<F> {
        &self.spec
    }

    pub fn presentation(&self) -> &Arc<Presentation> {
        &self.pres
    }

    pub fn catalog(&self) -> &Arc<SeparatorCatalog> {
        &self.catalog
    }

    pub fn support(&self, psi: &Homomorphism) -> PlaquetteSet {
        self.pres.support(&self.spec.group.table, psi)
    }

    pub fn frame(&self, sep: usize) -> Result<Arc<Frame>, SwapError> {
        self.frames[sep].get_or_init(|| self.build_frame(sep)).clone()
    }

    fn build_frame(&self, sep: usize) -> Result<Arc<Frame>, SwapError> {
        let cx = &self.spec.complex;
        let s = self.catalog.get(sep);
        let ct = cx.constrained_spanning_tree(s.bx(), self.pres.root())?;
        if !ct.report.all() {
            return Err(SwapError::TreeNotAdapted(ct.report));
        }
        let e_in = cx.edges_of(&ct.cells.inside);
        let e_out = cx.edges_of(&ct.cells.outside);
        let shared = e_in.intersection(&e_out);
        let inside_only = e_in.difference(&shared);
        let pres = Presentation::new(cx.clone(), ct.tree);
        let from_main = (0..pres.rank()).map(|k| self.pres.word_of_steps(&pres.generator_loop(k))).collect();
        Ok(Arc::new(Frame { pres, shared, inside_only, from_main }))
    }

    fn to_frame(&self, frame: &Frame, psi: &Homomorphism) -> Homomorphism {
        let t = &self.spec.group.table;
        Homomorphism::from_images(frame.from_main.iter().map(|w| eval_word(t, psi, w)).collect())
    }

    /// Splits σ ∈ GF(T_B) into the part on S₂(B) and the part on S₂ᶜ(B).
    pub fn split_config(&self, sep: usize, sigma: &EdgeConfig) -> Result<(EdgeConfig, EdgeConfig), SwapError> {
        let frame = self.frame(sep)?;
        split_with(&frame, sigma)
    }

    pub fn decomposition(&self, ps: &PlaquetteSet) -> Arc<KnotDecomposition> {
        if let Some(d) = self.decompositions.lock().expect("cache lock").get(ps) {
            return d.clone();
        }
        let d = Arc::new(knot_decomposition(&self.spec.complex, &self.catalog, ps));
        self.decompositions.lock().expect("cache lock").insert(ps.clone(), d.clone());
        d
    }

    /// Θ(P): ψ with supp(ψ) ⊆ P to one homomorphism per knot of P.
    pub fn theta(&self, ps: &PlaquetteSet, psi: &Homomorphism) -> Result<Vec<Homomorphism>, SwapError> {
        if !self.support(psi).is_subset(ps) {
            return Err(SwapError::SupportNotContained);
        }
        let d = self.decomposition(ps);
        self.theta_with(&d, psi)
    }

    pub fn theta_with(&self, d: &KnotDecomposition, psi: &Homomorphism) -> Result<Vec<Homomorphism>, SwapError> {
        let group = &self.spec.group;
        let mut parts = Vec::with_capacity(d.len());
        let mut cur = psi.clone();
        for &sep in &d.separators {
            let frame = self.frame(sep)?;
            let sigma = frame.pres.gauge_fix(&self.to_frame(&frame, &cur));
            let (s1, s2) = split_with(&frame, &sigma)?;
            parts.push(self.pres.psi_of_config(group, &s1));
            cur = self.pres.psi_of_config(group, &s2);
        }
        parts.push(cur);
        Ok(parts)
    }

    /// Θ⁻¹: glue one homomorphism per knot back together.
    pub fn theta_inverse(&self, d: &KnotDecomposition, parts: &[Homomorphism]) -> Result<Homomorphism, SwapError> {
        if parts.len() != d.len().max(1) {
            return Err(SwapError::PartCount { got: parts.len(), expected: d.len() });
        }
        let group = &self.spec.group;
        let t = &group.table;
        let mut cur = parts.last().expect("nonempty").clone();
        for (i, &sep) in d.separators.iter().enumerate().rev() {
            let frame = self.frame(sep)?;
            let s1 = frame.pres.gauge_fix(&self.to_frame(&frame, &parts[i]));
            let s2 = frame.pres.gauge_fix(&self.to_frame(&frame, &cur));
            let glued: Vec<_> = s1.values().iter().zip(s2.values()).map(|(&a, &b)| t.mul(a, b)).collect();
            cur = self.pres.psi_of_config(group, &EdgeConfig::from_values(glued));
        }
        if self.corrupt_theta && cur.rank() > 0 && d.len() > 1 {
            let mut images = cur.images().to_vec();
            images[0] = t.mul(images[0], t.element(1));
            cur = Homomorphism::from_images(images);
        }
        Ok(cur)
    }

    /// Decomposition of `supp(ψ₁) ∪ supp(ψ₂) ∪ B₁ ∪ B₂` and the knots holding `B₁`, `B₂`.
    pub fn pair_state(&self, psi1: &Homomorphism, psi2: &Homomorphism, b1: &PlaquetteSet, b2: &PlaquetteSet) -> PairState {
        let joint = self.support(psi1).union(&self.support(psi2)).union(b1).union(b2);
        let decomposition = self.decomposition(&joint);
        let j1 = decomposition.part_containing(b1);
        let j2 = decomposition.part_containing(b2);
        PairState { joint, decomposition, j1, j2 }
    }

    pub fn in_e(&self, psi1: &Homomorphism, psi2: &Homomorphism, b1: &PlaquetteSet, b2: &PlaquetteSet) -> bool {
        self.pair_state(psi1, psi2, b1, b2).in_e()
    }

    /// T: exchange the components on `B₂`'s knot.
    pub fn swap_t(
        &self,
        psi1: &Homomorphism,
        psi2: &Homomorphism,
        b1: &PlaquetteSet,
        b2: &PlaquetteSet,
    ) -> Result<(Homomorphism, Homomorphism), SwapError> {
        let st = self.pair_state(psi1, psi2, b1, b2);
        if !st.in_e() {
            return Err(SwapError::NotInE);
        }
        self.swap_component(&st.decomposition, st.j2.expect("in E"), psi1, psi2)
    }

    /// Exchanges component `j` of Θ(ψ₁) and Θ(ψ₂).
    pub fn swap_component(
        &self,
        d: &KnotDecomposition,
        j: usize,
        psi1: &Homomorphism,
        psi2: &Homomorphism,
    ) -> Result<(Homomorphism, Homomorphism), SwapError> {
        let mut a = self.theta_with(d, psi1)?;
        let mut b = self.theta_with(d, psi2)?;
        std::mem::swap(&mut a[j], &mut b[j]);
        Ok((self.theta_inverse(d, &a)?, self.theta_inverse(d, &b)?))
    }

    /// Unnormalized ν-weight Π_p φ_β(ψ(ξ_p)).
    pub fn weight(&self, psi: &Homomorphism) -> F {
        self.pres.nu_weight(&self.spec, psi)
    }

    /// Sorted class indices of ψ₁(ξ_p) and ψ₂(ξ_p) over all plaquettes.
    pub fn pair_class_multiset(&self, psi1: &Homomorphism, psi2: &Homomorphism) -> Vec<usize> {
        let mut v = self.pres.class_multiset(&self.spec.group, psi1);
        v.extend(self.pres.class_multiset(&self.spec.group, psi2));
        v.sort_unstable();
        v
    }

    /// ψ with supp(ψ) ⊆ `allowed`.
    pub fn homomorphisms_within(&self, allowed: &PlaquetteSet, cap: u64) -> Result<Vec<Homomorphism>, SwapError> {
        Ok(self.pres.solve_support_constraints(&self.spec.group, allowed, cap)?)
    }

    /// Total ν-weight per exact support, over ψ with supp(ψ) ⊆ `allowed`.
    pub fn support_weights(&self, allowed: &PlaquetteSet, cap: u64) -> Result<Vec<(PlaquetteSet, F)>, SwapError> {
        let mut acc: HashMap<PlaquetteSet, F> = HashMap::new();
        for psi in self.homomorphisms_within(allowed, cap)? {
            *acc.entry(self.support(&psi)).or_insert(F::zero()) += self.weight(&psi);
        }
        let mut v: Vec<_> = acc.into_iter().collect();
        v.sort_by(|a, b| a.0.cmp(&b.0));
        Ok(v)
    }

    /// Φ⁽²⁾_{P₀}(P): total pair weight with supp(ψ₁) ∪ supp(ψ₂) ∪ P₀ = P.
    pub fn phi2(&self, p0: &PlaquetteSet, ps: &PlaquetteSet, cap: u64) -> Result<F, SwapError> {
        if !p0.is_subset(ps) {
            return Ok(F::zero());
        }
        let table = self.support_weights(ps, cap)?;
        Ok(phi2_from_table(&table, p0, ps))
    }
}

/// Exact pair sums over a finite family of homomorphisms under ν⊗².
#[derive(Clone, Debug, PartialEq)]
pub struct PairStatistics<F> {
    pub pairs: usize,
    pub pairs_in_e: usize,
    /// Σ_E ν⊗² h₁(ψ₁) h₂(ψ₁), normalized.
    pub same_copy_on_e: F,
    /// Σ_E ν⊗² h₁(ψ₁) h₂(ψ₂), normalized.
    pub cross_copy_on_e: F,
    /// ν⊗²(∉ E).
    pub p_out: F,
    /// Cov(h₁(Ψ), h₂(Ψ)) under ν.
    pub covariance: F,
}

impl<F: Real> SwapContext<F> {
    /// Exact exchange sums, `P(∉E)` and the covariance over `family`, which
    /// must be closed under T.
    pub fn pair_statistics(
        &self,
        family: &[Homomorphism],
        b1: &PlaquetteSet,
        b2: &PlaquetteSet,
        h1: impl Fn(&Homomorphism) -> F,
        h2: impl Fn(&Homomorphism) -> F,
    ) -> PairStatistics<F> {
        let w: Vec<F> = family.iter().map(|p| self.weight(p)).collect();
        let a: Vec<F> = family.iter().map(&h1).collect();
        let b: Vec<F> = family.iter().map(&h2).collect();
        let z: F = w.iter().copied().sum();
        let (mut same, mut cross, mut out) = (F::zero(), F::zero(), F::zero());
        let mut in_e = 0;
        for (i, p1) in family.iter().enumerate() {
            for (j, p2) in family.iter().enumerate() {
                let wij = w[i] * w[j];
                if self.in_e(p1, p2, b1, b2) {
                    in_e += 1;
                    same += wij * a[i] * b[i];
                    cross += wij * a[i] * b[j];
                } else {
                    out += wij;
                }
            }
        }
        let z2 = z * z;
        let mean = |v: &[F]| v.iter().zip(&w).map(|(x, y)| *x * *y).sum::<F>() / z;
        let joint = a.iter().zip(&b).zip(&w).map(|((x, y), u)| *x * *y * *u).sum::<F>() / z;
        PairStatistics {
            pairs: family.len() * family.len(),
            pairs_in_e: in_e,
            same_copy_on_e: same / z2,
            cross_copy_on_e: cross / z2,
            p_out: out / z2,
            covariance: joint - mean(&a) * mean(&b),
        }
    }
}

/// Φ⁽²⁾ from per-support weight totals.
pub fn phi2_from_table<F: Real>(table: &[(PlaquetteSet, F)], p0: &PlaquetteSet, ps: &PlaquetteSet) -> F {
    let mut total = F::zero();
    for (s1, w1) in table {
        let base = s1.union(p0);
        if !base.is_subset(ps) {
            continue;
        }
        for (s2, w2) in table {
            if base.union(s2) == *ps {
                total += *w1 * *w2;
            }
        }
    }
    total
}

fn split_with(frame: &Frame, sigma: &EdgeConfig) -> Result<(EdgeConfig, EdgeConfig), SwapError> {
    if let Some(e) = frame.shared.iter().find(|&e| !sigma.get(e).is_identity()) {
        return Err(SwapError::BoundaryNotTrivial(e));
    }
    let mut s1 = EdgeConfig::identity(sigma.len());
    let mut s2 = sigma.clone();
    for e in frame.inside_only.iter() {
        s1.set(e, sigma.get(e));
        s2.set(e, crate::group::Element::IDENTITY);
    }
    Ok((s1, s2))
}
