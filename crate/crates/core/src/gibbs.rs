//! Edge configurations, the Wilson action, exact enumeration and heat-bath sampling.

use std::sync::Arc;

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::group::{ClassFunction, Element, GaugeGroup};
use crate::lattice::{CellComplex, DirEdge, Loop};
use crate::scalar::{compensated_sum, Real};

/// Default enumeration cap, 2²⁴ configurations.
pub const DEFAULT_CAP: u64 = 1 << 24;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GibbsError {
    #[error("enumeration needs {needed} states, cap is {cap}")]
    CapExceeded { needed: f64, cap: u64 },
    #[error("beta must be nonnegative, got {0}")]
    NegativeBeta(f64),
    #[error("need at least 10 batches, got {0}")]
    InsufficientSamples(usize),
    #[error("batch size must be positive")]
    ZeroBatch,
    #[error("total weight is zero")]
    ZeroWeight,
}

/// One group element per positively oriented edge.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EdgeConfig {
    values: Vec<Element>,
}

impl EdgeConfig {
    pub fn identity(num_edges: usize) -> Self {
        EdgeConfig { values: vec![Element::IDENTITY; num_edges] }
    }

    pub fn from_values(values: Vec<Element>) -> Self {
        EdgeConfig { values }
    }

    pub fn values(&self) -> &[Element] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    #[inline]
    pub fn get(&self, e: usize) -> Element {
        self.values[e]
    }

    #[inline]
    pub fn set(&mut self, e: usize, g: Element) {
        self.values[e] = g;
    }

    /// σ along an oriented edge: σ_e forwards, σ_e⁻¹ backwards.
    #[inline]
    pub fn along<F: Real>(&self, group: &GaugeGroup<F>, d: DirEdge) -> Element {
        let g = self.values[d.edge];
        if d.forward {
            g
        } else {
            group.table.inv(g)
        }
    }

    /// Mixed-radix decoding of an enumeration index.
    pub fn from_index(mut index: u64, num_edges: usize, order: usize) -> Self {
        let values = (0..num_edges)
            .map(|_| {
                let g = (index % order as u64) as u16;
                index /= order as u64;
                Element(g)
            })
            .collect();
        EdgeConfig { values }
    }

    /// `σ_e ↦ h_x σ_e h_y⁻¹`.
    pub fn gauge_transform<F: Real>(&self, cx: &CellComplex, group: &GaugeGroup<F>, h: &[Element]) -> Self {
        let t = &group.table;
        let values = cx
            .edges()
            .iter()
            .zip(&self.values)
            .map(|(e, &g)| t.mul(t.mul(h[e.tail], g), t.inv(h[e.head])))
            .collect();
        EdgeConfig { values }
    }
}

/// Product of σ along an edge sequence.
pub fn path_product<F: Real>(group: &GaugeGroup<F>, sigma: &EdgeConfig, steps: &[DirEdge]) -> Element {
    steps
        .iter()
        .fold(Element::IDENTITY, |acc, &d| group.table.mul(acc, sigma.along(group, d)))
}

/// The model: complex, gauge group with representation, inverse temperature.
#[derive(Clone, Debug)]
pub struct GibbsSpec<F> {
    pub complex: Arc<CellComplex>,
    pub group: Arc<GaugeGroup<F>>,
    beta: F,
}

impl<F: Real> GibbsSpec<F> {
    pub fn new(complex: Arc<CellComplex>, group: Arc<GaugeGroup<F>>, beta: F) -> Result<Self, GibbsError> {
        if beta.is_nan() || beta < F::zero() {
            return Err(GibbsError::NegativeBeta(beta.to_f64().unwrap_or(f64::NAN)));
        }
        Ok(GibbsSpec { complex, group, beta })
    }

    pub fn beta(&self) -> F {
        self.beta
    }

    pub fn with_beta(&self, beta: F) -> Result<Self, GibbsError> {
        Self::new(self.complex.clone(), self.group.clone(), beta)
    }

    pub fn plaquette_value(&self, sigma: &EdgeConfig, p: usize) -> Element {
        path_product(&self.group, sigma, &self.complex.plaquette_loop(p))
    }

    /// Σ_p Re(χ(1) − χ(σ_p)).
    pub fn action(&self, sigma: &EdgeConfig) -> F {
        (0..self.complex.num_plaquettes())
            .map(|p| self.group.excitation(self.plaquette_value(sigma, p)))
            .sum()
    }

    /// Π_p φ_β(σ_p).
    pub fn weight(&self, sigma: &EdgeConfig) -> F {
        (0..self.complex.num_plaquettes())
            .map(|p| self.group.phi(self.beta, self.plaquette_value(sigma, p)))
            .fold(F::one(), |a, b| a * b)
    }

    pub fn holonomy(&self, sigma: &EdgeConfig, gamma: &Loop) -> Element {
        path_product(&self.group, sigma, gamma.steps())
    }

    pub fn wilson(&self, sigma: &EdgeConfig, gamma: &Loop, chi0: &ClassFunction<F>) -> Complex<F> {
        chi0.eval(self.holonomy(sigma, gamma))
    }

    /// Number of edge configurations, |G|^{|Λ₁|}.
    pub fn config_count(&self) -> f64 {
        (self.group.order() as f64).powi(self.complex.num_edges() as i32)
    }

    /// Exact normalized law of Σ over all edge configurations.
    pub fn enumerate_mu(&self, cap: u64) -> Result<ExactDistribution<F>, GibbsError> {
        let needed = self.config_count();
        if needed > cap as f64 {
            return Err(GibbsError::CapExceeded { needed, cap });
        }
        let n = needed as u64;
        let ne = self.complex.num_edges();
        let order = self.group.order();
        let weights: Vec<F> = (0..n).map(|i| self.weight(&EdgeConfig::from_index(i, ne, order))).collect();
        ExactDistribution::from_weights(weights, ne, order)
    }
}

/// Normalized probabilities indexed by mixed-radix configuration index.
#[derive(Clone, Debug)]
pub struct ExactDistribution<F> {
    probs: Vec<F>,
    partition: F,
    num_edges: usize,
    order: usize,
}

impl<F: Real> ExactDistribution<F> {
    fn from_weights(weights: Vec<F>, num_edges: usize, order: usize) -> Result<Self, GibbsError> {
        let z = compensated_sum(weights.iter().copied());
        if z.is_nan() || z <= F::zero() {
            return Err(GibbsError::ZeroWeight);
        }
        let probs = weights.into_iter().map(|w| w / z).collect();
        Ok(ExactDistribution { probs, partition: z, num_edges, order })
    }

    pub fn partition_function(&self) -> F {
        self.partition
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn prob(&self, index: usize) -> F {
        self.probs[index]
    }

    pub fn iter(&self) -> impl Iterator<Item = (EdgeConfig, F)> + '_ {
        self.probs
            .iter()
            .enumerate()
            .map(|(i, &p)| (EdgeConfig::from_index(i as u64, self.num_edges, self.order), p))
    }

    pub fn expectation(&self, f: impl Fn(&EdgeConfig) -> F) -> F {
        compensated_sum(self.iter().map(|(s, p)| p * f(&s)))
    }
}

/// Per-edge stencil: each plaquette through the edge as `g^{±1} · rest`.
#[derive(Clone, Debug)]
struct Stencil {
    forward: bool,
    /// The three remaining oriented edges, in loop order after this edge.
    rest: [DirEdge; 3],
}

/// Single-edge heat-bath kernel with a fixed sweep order.
#[derive(Clone, Debug)]
pub struct HeatBath<F> {
    spec: GibbsSpec<F>,
    stencils: Vec<Vec<Stencil>>,
    phi: Vec<F>,
}

impl<F: Real> HeatBath<F> {
    pub fn new(spec: GibbsSpec<F>) -> Self {
        let cx = &spec.complex;
        let mut stencils = vec![Vec::new(); cx.num_edges()];
        for p in 0..cx.num_plaquettes() {
            let lp = cx.plaquette_loop(p);
            for k in 0..4 {
                stencils[lp[k].edge].push(Stencil {
                    forward: lp[k].forward,
                    rest: [lp[(k + 1) % 4], lp[(k + 2) % 4], lp[(k + 3) % 4]],
                });
            }
        }
        let phi = spec.group.table.elements().map(|g| spec.group.phi(spec.beta, g)).collect();
        HeatBath { spec, stencils, phi }
    }

    pub fn spec(&self) -> &GibbsSpec<F> {
        &self.spec
    }

    /// Unnormalized conditional weights of each value at edge `e`.
    pub fn conditional(&self, sigma: &EdgeConfig, e: usize) -> Vec<F> {
        let mut out = vec![F::zero(); self.spec.group.order()];
        self.fill_conditional(sigma, e, &mut out);
        out
    }

    fn fill_conditional(&self, sigma: &EdgeConfig, e: usize, out: &mut [F]) {
        let g = &self.spec.group;
        let t = &g.table;
        let mut rests = [(true, Element::IDENTITY); 2 * crate::lattice::MAX_DIM];
        let st = &self.stencils[e];
        for (slot, s) in rests.iter_mut().zip(st) {
            *slot = (s.forward, path_product(g, sigma, &s.rest));
        }
        for (x, w) in t.elements().zip(out.iter_mut()) {
            let xi = t.inv(x);
            *w = rests[..st.len()].iter().fold(F::one(), |acc, &(fw, r)| {
                acc * self.phi[t.mul(if fw { x } else { xi }, r).index()]
            });
        }
    }

    pub fn update_edge(&self, sigma: &mut EdgeConfig, e: usize, rng: &mut impl Rng) {
        let n = self.spec.group.order();
        let mut stack = [F::zero(); 64];
        let mut heap = Vec::new();
        let w: &mut [F] = if n <= stack.len() {
            &mut stack[..n]
        } else {
            heap.resize(n, F::zero());
            &mut heap
        };
        self.fill_conditional(sigma, e, w);
        let total: F = w.iter().copied().sum();
        let u = F::from_f64(rng.gen::<f64>()).expect("f64 fits") * total;
        let mut acc = F::zero();
        let mut pick = n - 1;
        for (i, &wi) in w.iter().enumerate() {
            acc += wi;
            if u < acc {
                pick = i;
                break;
            }
        }
        sigma.set(e, Element(pick as u16));
    }

    /// One pass over all edges in index order.
    pub fn sweep(&self, sigma: &mut EdgeConfig, rng: &mut impl Rng) {
        for e in 0..sigma.len() {
            self.update_edge(sigma, e, rng);
        }
    }
}

/// Per-chain random stream: ChaCha8 keyed by `seed`, stream selected by chain id.
pub fn chain_rng(seed: u64, chain: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chain);
    rng
}

/// A heat-bath chain started from σ ≡ 1.
pub struct Chain<F> {
    kernel: Arc<HeatBath<F>>,
    state: EdgeConfig,
    rng: ChaCha8Rng,
}

impl<F: Real> Chain<F> {
    pub fn new(kernel: Arc<HeatBath<F>>, seed: u64, chain: u64) -> Self {
        let state = EdgeConfig::identity(kernel.spec.complex.num_edges());
        Chain { kernel, state, rng: chain_rng(seed, chain) }
    }

    pub fn state(&self) -> &EdgeConfig {
        &self.state
    }

    pub fn sweep(&mut self) -> &EdgeConfig {
        self.kernel.sweep(&mut self.state, &mut self.rng);
        &self.state
    }
}

impl<F: Real> Iterator for Chain<F> {
    type Item = EdgeConfig;

    fn next(&mut self) -> Option<EdgeConfig> {
        Some(self.sweep().clone())
    }
}

/// `steps` successive sweeps of a chain with the given seed.
pub fn mcmc_chain<F: Real>(spec: &GibbsSpec<F>, steps: usize, seed: u64) -> impl Iterator<Item = EdgeConfig> {
    Chain::new(Arc::new(HeatBath::new(spec.clone())), seed, 0).take(steps)
}

/// One observation for a covariance estimate.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct CovSample<F> {
    pub f1: F,
    pub f2: F,
    pub weight: F,
}

impl<F: Real> CovSample<F> {
    pub fn new(f1: F, f2: F) -> Self {
        CovSample { f1, f2, weight: F::one() }
    }
}

#[derive(Copy, Clone, Debug, PartialEq)]
pub struct CovEstimate<F> {
    pub cov: F,
    pub stderr: F,
    pub n: usize,
    pub batches: usize,
}

#[derive(Default, Clone, Copy)]
struct Moments<F> {
    w: F,
    x: F,
    y: F,
    xy: F,
}

impl<F: Real> Moments<F> {
    fn add(&mut self, s: &CovSample<F>) {
        self.w += s.weight;
        self.x += s.weight * s.f1;
        self.y += s.weight * s.f2;
        self.xy += s.weight * s.f1 * s.f2;
    }

    fn minus(&self, o: &Self) -> Self {
        Moments { w: self.w - o.w, x: self.x - o.x, y: self.y - o.y, xy: self.xy - o.xy }
    }

    fn cov(&self) -> F {
        let mx = self.x / self.w;
        let my = self.y / self.w;
        self.xy / self.w - mx * my
    }
}

/// Weighted covariance over the stream, jackknifed over consecutive batches.
pub fn estimate_cov<F: Real>(samples: &[CovSample<F>], batch_size: usize) -> Result<CovEstimate<F>, GibbsError> {
    if batch_size == 0 {
        return Err(GibbsError::ZeroBatch);
    }
    let batches = samples.len() / batch_size;
    if batches < 10 {
        return Err(GibbsError::InsufficientSamples(batches));
    }
    let used = &samples[..batches * batch_size];
    // Covariance is shift invariant; shifting by the first sample keeps constant observables exact.
    let (x0, y0) = (used[0].f1, used[0].f2);
    let per_batch: Vec<Moments<F>> = used
        .chunks(batch_size)
        .map(|c| {
            let mut m = Moments::default();
            c.iter().for_each(|s| m.add(&CovSample { f1: s.f1 - x0, f2: s.f2 - y0, weight: s.weight }));
            m
        })
        .collect();
    let mut total = Moments::<F>::default();
    for m in &per_batch {
        total.w += m.w;
        total.x += m.x;
        total.y += m.y;
        total.xy += m.xy;
    }
    if total.w.is_nan() || total.w <= F::zero() {
        return Err(GibbsError::ZeroWeight);
    }
    let cov = total.cov();
    let nb = F::from_usize(batches).expect("batch count");
    let loo: Vec<F> = per_batch.iter().map(|m| total.minus(m).cov()).collect();
    let mean = loo.iter().copied().sum::<F>() / nb;
    let var = loo.iter().map(|&v| (v - mean) * (v - mean)).sum::<F>() * (nb - F::one()) / nb;
    Ok(CovEstimate { cov, stderr: var.sqrt(), n: used.len(), batches })
}
