use std::collections::HashMap;

use petgraph::unionfind::UnionFind;

use super::{HiggsError, HiggsQuotient};
use crate::cellset::{CellSet, PlaquetteSet};
use crate::gibbs::EdgeConfig;
use crate::group::Element;
use crate::homomorphism::Homomorphism;
use crate::scalar::Real;
use crate::swap::{phi2_from_table, SwapContext};
use crate::topo::KnotDecomposition;

/// Reduced configuration: gauge class ψ, Higgs field φ and current `I`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ReducedConfig {
    pub psi: Homomorphism,
    pub phi: Vec<u16>,
    pub current: Vec<u32>,
}

impl ReducedConfig {
    /// Edges with `I(e) ≠ 0`.
    pub fn active_edges(&self) -> Vec<usize> {
        (0..self.current.len()).filter(|&e| self.current[e] != 0).collect()
    }
}

/// `Σ_{i>k} x^i/i! ≤ x^{k+1}/(k+1)! · e^x`.
pub fn poisson_tail_bound<F: Real>(x: F, k: u32) -> F {
    let mut term = F::one();
    for i in 1..=k + 1 {
        term = term * x / F::lit(i as f64);
    }
    term * x.exp()
}

/// Random-current form of the small-κ model.
pub struct CurrentModel<F> {
    pub gauge: SwapContext<F>,
    pub quotient: HiggsQuotient<F>,
    pub kappa: F,
    c: F,
}

impl<F: Real> CurrentModel<F> {
    pub fn new(gauge: SwapContext<F>, h_order: usize, kappa: F) -> Result<Self, HiggsError> {
        let quotient = HiggsQuotient::new(&gauge.spec().group, h_order)?;
        let c = F::lit((2 * gauge.spec().group.rep.dim() + 1) as f64);
        Ok(CurrentModel { gauge, quotient, kappa, c })
    }

    /// Positivity margin `2d + 1`.
    pub fn c_constant(&self) -> F {
        self.c
    }

    fn group(&self) -> &crate::group::GaugeGroup<F> {
        &self.gauge.spec().group
    }

    /// `w = 2 Re[φ_x χ(g) φ_y⁻¹] + c`.
    pub fn edge_weight(&self, ratio: u16, g: Element) -> F {
        F::lit(2.0) * (self.quotient.value(ratio) * self.group().rep.chi(g)).re + self.c
    }

    /// `(κ w)^I / I!`.
    pub fn current_factor(&self, w: F, i: u32) -> F {
        let x = self.kappa * w;
        (1..=i).fold(F::one(), |acc, k| acc * x / F::lit(k as f64))
    }

    fn check(&self, rc: &ReducedConfig) -> Result<(), HiggsError> {
        let cx = &self.gauge.spec().complex;
        if rc.phi.len() != cx.num_vertices()
            || rc.current.len() != cx.num_edges()
            || rc.psi.rank() != self.gauge.presentation().rank()
            || rc.phi.iter().any(|&k| k as usize >= self.quotient.order())
        {
            return Err(HiggsError::Shape);
        }
        Ok(())
    }

    pub fn active_vertices(&self, rc: &ReducedConfig) -> CellSet {
        let cx = &self.gauge.spec().complex;
        let mut s = CellSet::empty(cx.num_vertices());
        for e in rc.active_edges() {
            s.insert(cx.edge(e).tail);
            s.insert(cx.edge(e).head);
        }
        s
    }

    fn edge_factor(&self, rc: &ReducedConfig, e: usize, g: Element) -> Result<F, HiggsError> {
        let ed = self.gauge.spec().complex.edge(e);
        let w = self.edge_weight(self.quotient.ratio(rc.phi[ed.tail], rc.phi[ed.head]), g);
        if w <= F::zero() {
            return Err(HiggsError::NonPositiveCurrent(e));
        }
        Ok(self.current_factor(w, rc.current[e]))
    }

    /// `|G|^{-|AV|} Σ_η Π_{e∈AE} (κ w_e(η_x σ_e η_y⁻¹))^I/I!`, one sum per
    /// connected component of the active edges.
    pub fn aux_current_sum(&self, sigma: &EdgeConfig, rc: &ReducedConfig, cap: u64) -> Result<F, HiggsError> {
        let cx = &self.gauge.spec().complex;
        let t = &self.group().table;
        let n = t.order();
        let active = rc.active_edges();
        let mut uf = UnionFind::<usize>::new(cx.num_vertices());
        for &e in &active {
            uf.union(cx.edge(e).tail, cx.edge(e).head);
        }
        let mut comps: Vec<(usize, Vec<usize>)> = Vec::new();
        for &e in &active {
            let r = uf.find(cx.edge(e).tail);
            match comps.iter_mut().find(|(root, _)| *root == r) {
                Some((_, es)) => es.push(e),
                None => comps.push((r, vec![e])),
            }
        }
        let mut needed = 0f64;
        let mut plans = Vec::with_capacity(comps.len());
        for (_, es) in &comps {
            let mut vs: Vec<usize> = es.iter().flat_map(|&e| [cx.edge(e).tail, cx.edge(e).head]).collect();
            vs.sort_unstable();
            vs.dedup();
            needed += (n as f64).powi(vs.len() as i32);
            plans.push((vs, es));
        }
        if needed > cap as f64 {
            return Err(HiggsError::CapExceeded { needed, cap });
        }
        let mut total = F::one();
        for (vs, es) in plans {
            let local = |v: usize| vs.binary_search(&v).expect("component vertex");
            let count = n.pow(vs.len() as u32);
            let mut eta = vec![Element::IDENTITY; vs.len()];
            let mut sum = F::zero();
            for idx in 0..count {
                let mut r = idx;
                for x in eta.iter_mut() {
                    *x = t.element(r % n);
                    r /= n;
                }
                let mut prod = F::one();
                for &e in es {
                    let ed = cx.edge(e);
                    let g = t.mul(t.mul(eta[local(ed.tail)], sigma.get(e)), t.inv(eta[local(ed.head)]));
                    prod *= self.edge_factor(rc, e, g)?;
                }
                sum += prod;
            }
            total = total * sum / F::lit(count as f64);
        }
        Ok(total)
    }

    /// Reduced weight through the auxiliary-field sum.
    pub fn reduced_weight(&self, rc: &ReducedConfig, cap: u64) -> Result<F, HiggsError> {
        self.check(rc)?;
        let sigma = self.gauge.presentation().gauge_fix(&rc.psi);
        Ok(self.gauge.weight(&rc.psi) * self.aux_current_sum(&sigma, rc, cap)?)
    }

    /// Reduced weight by direct summation over the fiber of ψ.
    pub fn reduced_weight_fiber(&self, rc: &ReducedConfig, cap: u64) -> Result<F, HiggsError> {
        self.check(rc)?;
        let spec = self.gauge.spec();
        let cx = &spec.complex;
        let t = &spec.group.table;
        let n = t.order();
        let root = self.gauge.presentation().root();
        let free = cx.num_vertices() - 1;
        let needed = (n as f64).powi(free as i32);
        if needed > cap as f64 {
            return Err(HiggsError::CapExceeded { needed, cap });
        }
        let base = self.gauge.presentation().gauge_fix(&rc.psi);
        let active = rc.active_edges();
        let mut h = vec![Element::IDENTITY; cx.num_vertices()];
        let mut sum = F::zero();
        for idx in 0..n.pow(free as u32) {
            let mut r = idx;
            for (v, x) in h.iter_mut().enumerate() {
                if v != root {
                    *x = t.element(r % n);
                    r /= n;
                }
            }
            let sigma = base.gauge_transform(cx, &spec.group, &h);
            let mut term = spec.weight(&sigma);
            for &e in &active {
                term *= self.edge_factor(rc, e, sigma.get(e))?;
            }
            sum += term;
        }
        Ok(sum / F::lit(needed))
    }

    /// Plaquettes meeting an active vertex or carrying a nontrivial ψ.
    pub fn support(&self, rc: &ReducedConfig) -> PlaquetteSet {
        let cx = &self.gauge.spec().complex;
        let mut s = self.gauge.support(&rc.psi);
        for v in self.active_vertices(rc).iter() {
            for &p in cx.vertex_plaquettes(v) {
                s.insert(p);
            }
        }
        s
    }

    fn star_part(&self, d: &KnotDecomposition, v: usize) -> Result<usize, HiggsError> {
        let cx = &self.gauge.spec().complex;
        let mut parts = cx.vertex_plaquettes(v).iter().map(|&p| d.part_of(p));
        let first = parts.next().flatten().ok_or(HiggsError::SplitStar(v))?;
        if parts.all(|x| x == Some(first)) {
            Ok(first)
        } else {
            Err(HiggsError::SplitStar(v))
        }
    }

    /// T on ψ, then the currents and active charges of `B₂`'s knot exchanged.
    pub fn swap(
        &self,
        a: &ReducedConfig,
        b: &ReducedConfig,
        b1: &PlaquetteSet,
        b2: &PlaquetteSet,
    ) -> Result<(ReducedConfig, ReducedConfig), HiggsError> {
        self.check(a)?;
        self.check(b)?;
        let joint = self.support(a).union(&self.support(b)).union(b1).union(b2);
        let d = self.gauge.decomposition(&joint);
        let (j1, j2) = match (d.part_containing(b1), d.part_containing(b2)) {
            (Some(x), Some(y)) => (x, y),
            _ => return Err(HiggsError::Scattered("knot")),
        };
        if j1 == j2 {
            return Err(HiggsError::SameComponent("knot"));
        }
        let (psi_a, psi_b) = self.gauge.swap_component(&d, j2, &a.psi, &b.psi)?;
        let mut na = ReducedConfig { psi: psi_a, ..a.clone() };
        let mut nb = ReducedConfig { psi: psi_b, ..b.clone() };
        let cx = &self.gauge.spec().complex;
        let active_v = self.active_vertices(a).union(&self.active_vertices(b));
        for v in active_v.iter() {
            if self.star_part(&d, v)? == j2 {
                std::mem::swap(&mut na.phi[v], &mut nb.phi[v]);
            }
        }
        for e in 0..cx.num_edges() {
            if a.current[e] == 0 && b.current[e] == 0 {
                continue;
            }
            if self.star_part(&d, cx.edge(e).tail)? == j2 {
                std::mem::swap(&mut na.current[e], &mut nb.current[e]);
            }
        }
        Ok((na, nb))
    }

    /// One reduced configuration per knot of `ps ⊇ supp`.
    pub fn split(&self, rc: &ReducedConfig, ps: &PlaquetteSet) -> Result<Vec<ReducedConfig>, HiggsError> {
        self.check(rc)?;
        if !self.support(rc).is_subset(ps) {
            return Err(HiggsError::Swap(crate::swap::SwapError::SupportNotContained));
        }
        let d = self.gauge.decomposition(ps);
        if d.len() <= 1 {
            return Ok(vec![rc.clone()]);
        }
        let psis = self.gauge.theta_with(&d, &rc.psi)?;
        let cx = &self.gauge.spec().complex;
        let mut out: Vec<ReducedConfig> = psis
            .into_iter()
            .map(|psi| ReducedConfig { psi, phi: vec![0; cx.num_vertices()], current: vec![0; cx.num_edges()] })
            .collect();
        for v in self.active_vertices(rc).iter() {
            out[self.star_part(&d, v)?].phi[v] = rc.phi[v];
        }
        for e in rc.active_edges() {
            out[self.star_part(&d, cx.edge(e).tail)?].current[e] = rc.current[e];
        }
        Ok(out)
    }

    /// `max(exp(β max_{g≠1} 2Re[χ(g) − d]), κ/24 · exp(max_{(a,b)≠(1,1)} 2Re[aχ(b)] + c))`.
    pub fn frak_c(&self) -> F {
        let g = self.group();
        let d = F::lit(g.rep.dim() as f64);
        let beta = self.gauge.spec().beta();
        let gauge_gap = g
            .table
            .elements()
            .skip(1)
            .map(|x| F::lit(2.0) * (g.rep.chi(x).re - d))
            .fold(F::neg_infinity(), F::max);
        let current = self.kappa / F::lit(24.0)
            * (F::lit(2.0) * self.quotient.max_off_identity(g) + self.c).exp();
        (beta * gauge_gap).exp().max(current)
    }

    /// ln of `16^{|P|} |G|^{2|P|} 2^{8|P|} 𝔠^{excess}`.
    pub fn ln_phi2_bound(&self, p_len: usize, excess: usize) -> F {
        let n = F::lit(p_len as f64);
        let g = F::lit(self.group().order() as f64);
        n * F::lit(16.0).ln() + F::lit(2.0) * n * g.ln() + F::lit(8.0) * n * F::lit(2.0).ln()
            + F::lit(excess as f64) * self.frak_c().ln()
    }

    /// Φ⁽²⁾ restricted to `family`.
    pub fn phi2(&self, family: &[ReducedConfig], p0: &PlaquetteSet, ps: &PlaquetteSet, cap: u64) -> Result<F, HiggsError> {
        let mut acc: HashMap<PlaquetteSet, F> = HashMap::new();
        for rc in family {
            let s = self.support(rc);
            if s.is_subset(ps) {
                *acc.entry(s).or_insert(F::zero()) += self.reduced_weight(rc, cap)?;
            }
        }
        let mut table: Vec<_> = acc.into_iter().collect();
        table.sort_by(|a, b| a.0.cmp(&b.0));
        Ok(phi2_from_table(&table, p0, ps))
    }
}

/// For each ψ: every current `≤ i_max` on `edges`, every φ on the active
/// vertices, φ = +1 elsewhere.
pub fn capped_reduced<F: Real>(model: &CurrentModel<F>, psis: &[Homomorphism], edges: &[usize], i_max: u32) -> Vec<ReducedConfig> {
    let cx = &model.gauge.spec().complex;
    let q = model.quotient.order();
    let levels = i_max as usize + 1;
    let mut out = Vec::new();
    for psi in psis {
        for ci in 0..levels.pow(edges.len() as u32) {
            let mut current = vec![0u32; cx.num_edges()];
            let mut r = ci;
            for &e in edges {
                current[e] = (r % levels) as u32;
                r /= levels;
            }
            let mut active: Vec<usize> = edges
                .iter()
                .filter(|&&e| current[e] != 0)
                .flat_map(|&e| [cx.edge(e).tail, cx.edge(e).head])
                .collect();
            active.sort_unstable();
            active.dedup();
            for pi in 0..q.pow(active.len() as u32) {
                let mut phi = vec![0u16; cx.num_vertices()];
                let mut r = pi;
                for &v in &active {
                    phi[v] = (r % q) as u16;
                    r /= q;
                }
                out.push(ReducedConfig { psi: psi.clone(), phi, current: current.clone() });
            }
        }
    }
    out
}
