use std::sync::Arc;

use lgt_core::higgs::{
    capped_configs, capped_reduced, poisson_tail_bound, CurrentModel, HiggsConfig, HiggsError, HiggsModel, HiggsQuotient,
    ReducedConfig,
};
use lgt_core::swap::SwapContext;
use lgt_core::{CellComplex, Element, GaugeGroup, GibbsSpec, GroupFamily, Homomorphism, LatticeBox, PlaquetteSet};

fn complex(dim: usize, side: i32) -> Arc<CellComplex> {
    Arc::new(CellComplex::new(LatticeBox::cube(dim, side).unwrap()).unwrap())
}

fn group(f: GroupFamily) -> Arc<GaugeGroup<f64>> {
    Arc::new(GaugeGroup::builtin(&f).unwrap())
}

fn s3_model(kappa: f64) -> HiggsModel<f64> {
    let spec = GibbsSpec::new(complex(3, 2), group(GroupFamily::Symmetric3), 1.0).unwrap();
    HiggsModel::new(spec, 2, kappa).unwrap()
}

fn plaq(cx: &CellComplex, x: [i32; 3], a: usize, b: usize) -> usize {
    cx.plaquette_index(cx.vertex_at(&x).unwrap(), a, b).unwrap()
}

fn edge(cx: &CellComplex, x: [i32; 3], axis: usize) -> usize {
    cx.edge_index(cx.vertex_at(&x).unwrap(), axis).unwrap()
}

fn one(cx: &CellComplex, p: usize) -> PlaquetteSet {
    PlaquetteSet::from_indices(cx.num_plaquettes(), [p])
}

#[test]
fn s3_quotient_is_z2_and_sign_rep_degenerates() {
    let s3 = group(GroupFamily::Symmetric3);
    let q = HiggsQuotient::new(&s3, 2).unwrap();
    assert_eq!((q.order(), q.ht_order()), (2, 1));
    let z2 = group(GroupFamily::Cyclic(2));
    assert_eq!(HiggsQuotient::new(&z2, 2).unwrap_err(), HiggsError::DegenerateQuotient);
    assert_eq!(HiggsQuotient::new(&s3, 1).unwrap_err(), HiggsError::BadOrder(1));
}

#[test]
fn frak_c_for_s3_is_minus_two() {
    let m = s3_model(2.0);
    assert!((m.frak_c() + 2.0).abs() < 1e-12);
}

#[test]
fn hamiltonian_basics() {
    let m = s3_model(2.0);
    let cx = m.spec.complex.clone();
    let t = HiggsConfig::trivial(&cx);
    assert_eq!(m.hamiltonian(&t).unwrap(), 0.0);
    assert!(m.excited_edges(&t).is_empty() && m.support(&t).is_empty());
    // One flipped charge at the centre: every incident edge pays κ(−2d).
    let centre = cx.vertex_at(&[1, 1, 1]).unwrap();
    let mut c = t.clone();
    c.phi[centre] = 1;
    let deg = cx.neighbours(centre).len() as f64;
    assert!((m.hamiltonian(&c).unwrap() - 2.0 * (-4.0) * deg).abs() < 1e-12);
    assert_eq!(m.excited_edges(&c).len(), cx.neighbours(centre).len());
    let shifted = HiggsConfig { sigma: c.sigma.clone(), phi: c.phi.iter().map(|k| 1 - k).collect() };
    assert!((m.hamiltonian(&shifted).unwrap() - m.hamiltonian(&c).unwrap()).abs() < 1e-12);
    // One nonidentity edge with constant φ: support is the plaquettes around it.
    let e = edge(&cx, [1, 1, 1], 0);
    let mut s = t.clone();
    s.sigma.set(e, Element(1));
    assert_eq!(m.support(&s).iter().collect::<Vec<_>>(), cx.edge_plaquettes(e).to_vec());
    assert!(m.hamiltonian(&s).unwrap() < 0.0);
}

#[test]
fn flip_map_removes_selected_islands() {
    let m = s3_model(2.0);
    let cx = m.spec.complex.clone();
    let mut phi = vec![0u16; cx.num_vertices()];
    assert!(m.phase_boundaries(&phi).is_empty());
    assert!(m.flip_map(&phi, &m.boundary_edges(&phi)).unwrap().iter().all(|f| !f));
    // Outer island {x0 ≥ 1} with an inner island at (2,2,2) flipped back.
    for (v, k) in phi.iter_mut().enumerate() {
        if cx.coord(v)[0] >= 1 {
            *k = 1;
        }
    }
    let corner = cx.vertex_at(&[2, 2, 2]).unwrap();
    phi[corner] = 0;
    let bounds = m.phase_boundaries(&phi);
    assert_eq!(bounds.len(), 2);
    for (i, b) in bounds.iter().enumerate() {
        let chi = m.flip_map(&phi, b).unwrap();
        let flipped: Vec<u16> = phi.iter().zip(&chi).map(|(&k, &f)| if f { 1 - k } else { k }).collect();
        let rest = m.phase_boundaries(&flipped);
        assert_eq!(rest, vec![bounds[1 - i].clone()]);
    }
    let partial = lgt_core::CellSet::from_indices(cx.num_edges(), bounds[0].iter().take(1));
    assert_eq!(m.flip_map(&phi, &partial).unwrap_err(), HiggsError::NotWholeBoundaries);
}

#[test]
fn large_kappa_swap_on_capped_family() {
    let m = s3_model(2.0);
    let cx = m.spec.complex.clone();
    let b1 = one(&cx, plaq(&cx, [0, 0, 0], 0, 1));
    let b2 = one(&cx, plaq(&cx, [1, 1, 2], 0, 1));
    let edges = [edge(&cx, [0, 0, 0], 0), edge(&cx, [1, 2, 2], 0)];
    let verts = [cx.vertex_at(&[1, 0, 0]).unwrap(), cx.vertex_at(&[2, 2, 2]).unwrap()];
    let family = capped_configs(&m, &edges, &verts);
    assert_eq!(family.len(), 144);
    let (mut admissible, mut moved) = (0, 0);
    for c1 in &family {
        for c2 in &family {
            if !m.admissible(c1, c2, &b1, &b2) {
                assert!(m.swap(c1, c2, &b1, &b2).is_err());
                continue;
            }
            admissible += 1;
            let (t1, t2) = m.swap(c1, c2, &b1, &b2).unwrap();
            let joint = |a: &HiggsConfig, b: &HiggsConfig| m.support(a).union(&m.support(b)).union(&b1).union(&b2);
            assert_eq!(joint(&t1, &t2), joint(c1, c2));
            assert_eq!(m.pair_energy_keys(&t1, &t2), m.pair_energy_keys(c1, c2));
            assert_eq!(m.swap(&t1, &t2, &b1, &b2).unwrap(), (c1.clone(), c2.clone()));
            moved += usize::from(&t1 != c1);
        }
    }
    assert!(admissible > 10_000 && moved > 0);
}

#[test]
fn large_kappa_phi2_below_bound() {
    for kappa in [2.0, 4.0] {
        let m = s3_model(kappa);
        let cx = m.spec.complex.clone();
        let edges = [edge(&cx, [0, 0, 0], 0)];
        let verts = [cx.vertex_at(&[1, 0, 0]).unwrap()];
        let family = capped_configs(&m, &edges, &verts);
        let p0 = one(&cx, plaq(&cx, [0, 0, 0], 0, 1));
        let mut supports: Vec<PlaquetteSet> = family.iter().map(|c| m.support(c).union(&p0)).collect();
        supports.sort();
        supports.dedup();
        for ps in &supports {
            let v = m.phi2(&family, &p0, ps).unwrap();
            let bound = m.ln_phi2_bound(ps.len(), ps.difference(&p0).len()).exp();
            assert!(v > 0.0 && v <= bound, "{v} > {bound}");
        }
    }
}

fn z3_current(side: i32, dim: usize, beta: f64, kappa: f64) -> CurrentModel<f64> {
    let spec = GibbsSpec::new(complex(dim, side), group(GroupFamily::Cyclic(3)), beta).unwrap();
    let ctx = if dim >= 3 {
        SwapContext::new(spec, 0).unwrap()
    } else {
        let pres = Arc::new(lgt_core::Presentation::lexicographic(spec.complex.clone(), 0));
        SwapContext::with_parts(spec, pres, Arc::new(lgt_core::topo::SeparatorCatalog::empty()))
    };
    CurrentModel::new(ctx, 2, kappa).unwrap()
}

#[test]
fn current_factor_marginalizes_to_exponential() {
    let m = z3_current(1, 3, 1.0, 2.0);
    assert_eq!(m.c_constant(), 3.0);
    for w in [0.5, 1.0, 5.0] {
        let x = m.kappa * w;
        let s: f64 = (0..=40).map(|i| m.current_factor(w, i)).sum();
        assert!((s - x.exp()).abs() < 1e-12 * x.exp());
        for k in 0..6 {
            let partial: f64 = (0..=k).map(|i| m.current_factor(w, i)).sum();
            assert!(x.exp() - partial <= poisson_tail_bound(x, k) * (1.0 + 1e-12));
        }
    }
}

#[test]
fn reduced_weight_fiber_and_aux_agree_in_two_dimensions() {
    let m = z3_current(2, 2, 0.8, 0.3);
    let cx = m.gauge.spec().complex.clone();
    let pres = m.gauge.presentation().clone();
    let edges = [0usize, 1, 5];
    let psis: Vec<Homomorphism> = (0..9).map(|i| Homomorphism::from_index(i * 37 % 81, pres.rank(), 3)).collect();
    let family = capped_reduced(&m, &psis, &edges, 1);
    for rc in family.iter().step_by(7) {
        let a = m.reduced_weight(rc, 1 << 20).unwrap();
        let b = m.reduced_weight_fiber(rc, 1 << 20).unwrap();
        assert!((a - b).abs() <= 1e-10 * a.abs(), "{a} vs {b}");
    }
    let t = ReducedConfig { psi: Homomorphism::trivial(pres.rank()), phi: vec![0; cx.num_vertices()], current: vec![0; cx.num_edges()] };
    assert_eq!(m.reduced_weight(&t, 1).unwrap(), 1.0);
}

#[test]
fn aux_sum_is_constant_on_fibers() {
    let m = z3_current(1, 3, 0.8, 0.3);
    let spec = m.gauge.spec().clone();
    let cx = spec.complex.clone();
    let pres = m.gauge.presentation().clone();
    let psi = Homomorphism::from_index(7, pres.rank(), 3);
    let mut current = vec![0u32; cx.num_edges()];
    current[0] = 1;
    current[3] = 1;
    let mut phi = vec![0u16; cx.num_vertices()];
    phi[cx.edge(3).head] = 1;
    let rc = ReducedConfig { psi: psi.clone(), phi, current };
    let base = pres.gauge_fix(&psi);
    let reference = m.aux_current_sum(&base, &rc, 1 << 20).unwrap();
    let n = cx.num_vertices();
    for idx in 0..3usize.pow(n as u32 - 1) {
        let mut h = vec![Element(0); n];
        let mut r = idx;
        for x in h.iter_mut().skip(1) {
            *x = Element((r % 3) as u16);
            r /= 3;
        }
        let sigma = base.gauge_transform(&cx, &spec.group, &h);
        assert_eq!(pres.psi_of_config(&spec.group, &sigma), psi);
        let v = m.aux_current_sum(&sigma, &rc, 1 << 20).unwrap();
        assert!((v - reference).abs() <= 1e-12 * reference);
    }
}

#[test]
fn small_kappa_swap_factorization_and_bound_on_3_cube() {
    let m = z3_current(2, 3, 3.0, 0.01);
    let cx = m.gauge.spec().complex.clone();
    let near = plaq(&cx, [0, 0, 0], 0, 1);
    let far = plaq(&cx, [1, 1, 2], 0, 1);
    let q = PlaquetteSet::from_indices(cx.num_plaquettes(), [near, plaq(&cx, [0, 0, 0], 0, 2), far, plaq(&cx, [1, 2, 1], 0, 2)]);
    let psis = m.gauge.homomorphisms_within(&q, 1 << 20).unwrap();
    let edges = [edge(&cx, [0, 0, 0], 2), edge(&cx, [2, 2, 1], 2)];
    let family = capped_reduced(&m, &psis, &edges, 1);
    let (b1, b2) = (one(&cx, near), one(&cx, far));
    let mut checked = 0;
    for a in family.iter().step_by(3) {
        for b in family.iter().step_by(5) {
            let Ok((ta, tb)) = m.swap(a, b, &b1, &b2) else { continue };
            checked += 1;
            assert_eq!(m.swap(&ta, &tb, &b1, &b2).unwrap(), (a.clone(), b.clone()));
            let joint = |x: &ReducedConfig, y: &ReducedConfig| m.support(x).union(&m.support(y)).union(&b1).union(&b2);
            assert_eq!(joint(&ta, &tb), joint(a, b));
            let before = m.reduced_weight(a, 1 << 16).unwrap() * m.reduced_weight(b, 1 << 16).unwrap();
            let after = m.reduced_weight(&ta, 1 << 16).unwrap() * m.reduced_weight(&tb, 1 << 16).unwrap();
            assert!((before - after).abs() <= 1e-10 * before);
        }
    }
    assert!(checked > 100);
    let mut multi = 0;
    for rc in &family {
        let ps = m.support(rc).union(&b1).union(&b2);
        let parts = m.split(rc, &ps).unwrap();
        multi += usize::from(parts.len() > 1 && rc.current.iter().any(|&i| i > 0));
        let whole = m.reduced_weight(rc, 1 << 16).unwrap();
        let prod: f64 = parts.iter().map(|p| m.reduced_weight(p, 1 << 16).unwrap()).product();
        assert!((whole - prod).abs() <= 1e-10 * whole);
    }
    assert!(multi > 0);
    assert!(m.frak_c() < 1.0);
    let p0 = b1.clone();
    let mut supports: Vec<PlaquetteSet> = family.iter().map(|rc| m.support(rc).union(&p0)).collect();
    supports.sort();
    supports.dedup();
    for ps in supports.iter().take(12) {
        let v = m.phi2(&family, &p0, ps, 1 << 16).unwrap();
        let bound = m.ln_phi2_bound(ps.len(), ps.difference(&p0).len()).exp();
        assert!(v <= bound, "{v} > {bound}");
    }
}
