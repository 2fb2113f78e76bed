use std::collections::{HashMap, VecDeque};
use std::sync::Arc;

use petgraph::unionfind::UnionFind;

use super::{HiggsError, HiggsQuotient};
use crate::cellset::{CellSet, PlaquetteSet};
use crate::gibbs::{EdgeConfig, GibbsSpec};
use crate::group::Element;
use crate::lattice::CellComplex;
use crate::scalar::Real;
use crate::swap::phi2_from_table;
use crate::topo::vortex_decomposition;

/// Gauge field σ and Higgs field φ (one coset index per vertex).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct HiggsConfig {
    pub sigma: EdgeConfig,
    pub phi: Vec<u16>,
}

impl HiggsConfig {
    pub fn trivial(cx: &CellComplex) -> Self {
        HiggsConfig { sigma: EdgeConfig::identity(cx.num_edges()), phi: vec![0; cx.num_vertices()] }
    }
}

/// The large-κ model with Hamiltonian
/// `Σ_p β Re[χ(σ_p) − d] + κ Σ_e Re[φ_x χ(σ_e) φ_y⁻¹ − d]`, each cell counted once.
#[derive(Clone, Debug)]
pub struct HiggsModel<F> {
    pub spec: GibbsSpec<F>,
    pub quotient: HiggsQuotient<F>,
    pub kappa: F,
}

impl<F: Real> HiggsModel<F> {
    pub fn new(spec: GibbsSpec<F>, h_order: usize, kappa: F) -> Result<Self, HiggsError> {
        let quotient = HiggsQuotient::new(&spec.group, h_order)?;
        Ok(HiggsModel { spec, quotient, kappa })
    }

    fn cx(&self) -> &Arc<CellComplex> {
        &self.spec.complex
    }

    fn dim(&self) -> F {
        F::lit(self.spec.group.rep.dim() as f64)
    }

    fn check(&self, c: &HiggsConfig) -> Result<(), HiggsError> {
        if c.sigma.len() != self.cx().num_edges() || c.phi.len() != self.cx().num_vertices() {
            return Err(HiggsError::Shape);
        }
        if c.phi.iter().any(|&k| k as usize >= self.quotient.order()) {
            return Err(HiggsError::Shape);
        }
        Ok(())
    }

    pub fn plaquette_term(&self, c: &HiggsConfig, p: usize) -> F {
        let g = self.spec.plaquette_value(&c.sigma, p);
        self.spec.beta() * (self.spec.group.rep.chi(g).re - self.dim())
    }

    pub fn edge_term(&self, c: &HiggsConfig, e: usize) -> F {
        let ed = self.cx().edge(e);
        let a = self.quotient.ratio(c.phi[ed.tail], c.phi[ed.head]);
        self.edge_term_of(a, c.sigma.get(e))
    }

    fn edge_term_of(&self, ratio: u16, g: Element) -> F {
        self.kappa * ((self.quotient.value(ratio) * self.spec.group.rep.chi(g)).re - self.dim())
    }

    pub fn hamiltonian(&self, c: &HiggsConfig) -> Result<F, HiggsError> {
        self.check(c)?;
        let cx = self.cx();
        let gauge: F = (0..cx.num_plaquettes()).map(|p| self.plaquette_term(c, p)).sum();
        let higgs: F = (0..cx.num_edges()).map(|e| self.edge_term(c, e)).sum();
        Ok(gauge + higgs)
    }

    /// Unnormalized weight `exp(H)`.
    pub fn weight(&self, c: &HiggsConfig) -> Result<F, HiggsError> {
        Ok(self.hamiltonian(c)?.exp())
    }

    /// Edges with `φ_x ≠ φ_y` or `σ_e ≠ 1`.
    pub fn excited_edges(&self, c: &HiggsConfig) -> CellSet {
        let cx = self.cx();
        CellSet::from_indices(
            cx.num_edges(),
            (0..cx.num_edges()).filter(|&e| {
                let ed = cx.edge(e);
                c.phi[ed.tail] != c.phi[ed.head] || !c.sigma.get(e).is_identity()
            }),
        )
    }

    /// Plaquettes with a boundary edge in the excited set.
    pub fn support(&self, c: &HiggsConfig) -> PlaquetteSet {
        let cx = self.cx();
        let mut s = cx.empty_plaquettes();
        for e in self.excited_edges(c).iter() {
            for &p in cx.edge_plaquettes(e) {
                s.insert(p);
            }
        }
        s
    }

    /// Sorted plaquette classes and sorted `(φ_xφ_y⁻¹, class σ_e)` keys; equal
    /// keys mean equal Hamiltonians term by term.
    pub fn energy_keys(&self, c: &HiggsConfig) -> (Vec<usize>, Vec<(u16, usize)>) {
        let cx = self.cx();
        let g = &self.spec.group;
        let mut ps: Vec<usize> =
            (0..cx.num_plaquettes()).map(|p| g.class_of(self.spec.plaquette_value(&c.sigma, p))).collect();
        let mut es: Vec<(u16, usize)> = (0..cx.num_edges())
            .map(|e| {
                let ed = cx.edge(e);
                (self.quotient.ratio(c.phi[ed.tail], c.phi[ed.head]), g.class_of(c.sigma.get(e)))
            })
            .collect();
        ps.sort_unstable();
        es.sort_unstable();
        (ps, es)
    }

    /// Merged energy keys of a pair.
    pub fn pair_energy_keys(&self, a: &HiggsConfig, b: &HiggsConfig) -> (Vec<usize>, Vec<(u16, usize)>) {
        let (mut p1, mut e1) = self.energy_keys(a);
        let (p2, e2) = self.energy_keys(b);
        p1.extend(p2);
        e1.extend(e2);
        p1.sort_unstable();
        e1.sort_unstable();
        (p1, e1)
    }

    /// Edges across which φ jumps.
    pub fn boundary_edges(&self, phi: &[u16]) -> CellSet {
        let cx = self.cx();
        CellSet::from_indices(
            cx.num_edges(),
            (0..cx.num_edges()).filter(|&e| phi[cx.edge(e).tail] != phi[cx.edge(e).head]),
        )
    }

    /// Connected components of the jump edges, two edges being adjacent when
    /// they bound a common plaquette. Ordered by least edge.
    pub fn phase_boundaries(&self, phi: &[u16]) -> Vec<CellSet> {
        let cx = self.cx();
        let jumps = self.boundary_edges(phi);
        let mut uf = UnionFind::<usize>::new(cx.num_edges());
        for p in 0..cx.num_plaquettes() {
            let mut prev = None;
            for d in cx.plaquette_loop(p) {
                if jumps.contains(d.edge) {
                    if let Some(q) = prev {
                        uf.union(q, d.edge);
                    }
                    prev = Some(d.edge);
                }
            }
        }
        let mut by_root: Vec<(usize, CellSet)> = Vec::new();
        for e in jumps.iter() {
            let r = uf.find(e);
            match by_root.iter_mut().find(|(root, _)| *root == r) {
                Some((_, s)) => s.insert(e),
                None => by_root.push((r, CellSet::from_indices(cx.num_edges(), [e]))),
            }
        }
        by_root.into_iter().map(|(_, s)| s).collect()
    }

    /// Vertex flips χ (χ at vertex 0 unflipped) such that `φχ` keeps exactly
    /// the boundaries not in `selected`.
    pub fn flip_map(&self, phi: &[u16], selected: &CellSet) -> Result<Vec<bool>, HiggsError> {
        if self.quotient.order() != 2 {
            return Err(HiggsError::NotBinary(self.quotient.order()));
        }
        let whole = self
            .phase_boundaries(phi)
            .iter()
            .filter(|b| b.intersects(selected))
            .all(|b| b.is_subset(selected));
        if !whole || !selected.is_subset(&self.boundary_edges(phi)) {
            return Err(HiggsError::NotWholeBoundaries);
        }
        let cx = self.cx();
        let mut flip: Vec<Option<bool>> = vec![None; cx.num_vertices()];
        flip[0] = Some(false);
        let mut queue = VecDeque::from([0usize]);
        while let Some(v) = queue.pop_front() {
            let fv = flip[v].expect("visited");
            for &(e, w) in cx.neighbours(v) {
                let fw = fv ^ selected.contains(e);
                match flip[w] {
                    None => {
                        flip[w] = Some(fw);
                        queue.push_back(w);
                    }
                    Some(x) if x != fw => return Err(HiggsError::NotWholeBoundaries),
                    Some(_) => {}
                }
            }
        }
        Ok(flip.into_iter().map(|f| f.expect("connected lattice")).collect())
    }

    fn apply_flips(phi: &[u16], flips: &[&[bool]]) -> Vec<u16> {
        phi.iter()
            .enumerate()
            .map(|(v, &k)| {
                let odd = flips.iter().filter(|f| f[v]).count() % 2 == 1;
                if odd {
                    1 - k
                } else {
                    k
                }
            })
            .collect()
    }

    /// Exchanges the vortex of `B₂` between the two configurations.
    pub fn swap(
        &self,
        c1: &HiggsConfig,
        c2: &HiggsConfig,
        b1: &PlaquetteSet,
        b2: &PlaquetteSet,
    ) -> Result<(HiggsConfig, HiggsConfig), HiggsError> {
        self.check(c1)?;
        self.check(c2)?;
        if self.quotient.order() != 2 {
            return Err(HiggsError::NotBinary(self.quotient.order()));
        }
        let cx = self.cx();
        let joint = self.support(c1).union(&self.support(c2)).union(b1).union(b2);
        let vortices = vortex_decomposition(cx, &joint);
        let locate = |b: &PlaquetteSet| vortices.iter().position(|v| b.is_subset(v)).ok_or(HiggsError::Scattered("vortex"));
        let (v1, v2) = (locate(b1)?, locate(b2)?);
        if v1 == v2 {
            return Err(HiggsError::SameComponent("vortex"));
        }
        let region = cx.edges_of(&vortices[v2]);
        let mut s1 = c1.sigma.clone();
        let mut s2 = c2.sigma.clone();
        for e in region.iter() {
            s1.set(e, c2.sigma.get(e));
            s2.set(e, c1.sigma.get(e));
        }
        let chi1 = self.flip_map(&c1.phi, &self.boundary_edges(&c1.phi).intersection(&region))?;
        let chi2 = self.flip_map(&c2.phi, &self.boundary_edges(&c2.phi).intersection(&region))?;
        let phi1 = Self::apply_flips(&c1.phi, &[&chi1, &chi2]);
        let phi2 = Self::apply_flips(&c2.phi, &[&chi2, &chi1]);
        Ok((HiggsConfig { sigma: s1, phi: phi1 }, HiggsConfig { sigma: s2, phi: phi2 }))
    }

    /// Whether `B₁`, `B₂` sit in distinct vortices of the joint support.
    pub fn admissible(&self, c1: &HiggsConfig, c2: &HiggsConfig, b1: &PlaquetteSet, b2: &PlaquetteSet) -> bool {
        let joint = self.support(c1).union(&self.support(c2)).union(b1).union(b2);
        let vortices = vortex_decomposition(self.cx(), &joint);
        let v1 = vortices.iter().position(|v| b1.is_subset(v));
        let v2 = vortices.iter().position(|v| b2.is_subset(v));
        matches!((v1, v2), (Some(a), Some(b)) if a != b)
    }

    /// `2 max_{(a,b) ≠ (1,1)} Re[a χ(b) − d]`, negative for a nondegenerate quotient.
    pub fn frak_c(&self) -> F {
        F::lit(2.0) * (self.quotient.max_off_identity(&self.spec.group) - self.dim())
    }

    /// ln of `4^{|P|} |G|^{8|P|} |H/H_t|^{8|P|} exp(κ𝔠/6)^{excess}`.
    pub fn ln_phi2_bound(&self, p_len: usize, excess: usize) -> F {
        let n = F::lit(p_len as f64);
        let g = F::lit(self.spec.group.order() as f64);
        let q = F::lit(self.quotient.order() as f64);
        n * F::lit(4.0).ln() + F::lit(8.0) * n * (g.ln() + q.ln())
            + self.kappa * self.frak_c() / F::lit(6.0) * F::lit(excess as f64)
    }

    /// More `+1` than `−1` charges.
    pub fn positive_majority(c: &HiggsConfig) -> bool {
        let minus = c.phi.iter().filter(|&&k| k != 0).count();
        2 * minus < c.phi.len()
    }

    /// Φ⁽²⁾ restricted to `family`, both copies under the majority constraint.
    pub fn phi2(&self, family: &[HiggsConfig], p0: &PlaquetteSet, ps: &PlaquetteSet) -> Result<F, HiggsError> {
        let mut acc: HashMap<PlaquetteSet, F> = HashMap::new();
        for c in family.iter().filter(|c| Self::positive_majority(c)) {
            let s = self.support(c);
            if s.is_subset(ps) {
                *acc.entry(s).or_insert(F::zero()) += self.weight(c)?;
            }
        }
        let mut table: Vec<_> = acc.into_iter().collect();
        table.sort_by(|a, b| a.0.cmp(&b.0));
        Ok(phi2_from_table(&table, p0, ps))
    }
}

/// All configurations with σ supported on `edges` and φ = +1 off `vertices`.
pub fn capped_configs<F: Real>(model: &HiggsModel<F>, edges: &[usize], vertices: &[usize]) -> Vec<HiggsConfig> {
    let cx = &model.spec.complex;
    let g = model.spec.group.order();
    let q = model.quotient.order();
    let n_sigma = g.pow(edges.len() as u32);
    let n_phi = q.pow(vertices.len() as u32);
    let mut out = Vec::with_capacity(n_sigma * n_phi);
    for si in 0..n_sigma {
        let mut sigma = EdgeConfig::identity(cx.num_edges());
        let mut r = si;
        for &e in edges {
            sigma.set(e, model.spec.group.table.element(r % g));
            r /= g;
        }
        for pi in 0..n_phi {
            let mut phi = vec![0u16; cx.num_vertices()];
            let mut r = pi;
            for &v in vertices {
                phi[v] = (r % q) as u16;
                r /= q;
            }
            out.push(HiggsConfig { sigma: sigma.clone(), phi });
        }
    }
    out
}
