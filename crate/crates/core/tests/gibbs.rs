use std::sync::Arc;

use approx::assert_relative_eq;
use lgt_core::gibbs::{chain_rng, mcmc_chain, path_product, Chain, DEFAULT_CAP};
use lgt_core::group::{class_index, ClassFunction};
use lgt_core::{
    estimate_cov, CellComplex, CovSample, DirEdge, EdgeConfig, Element, GaugeGroup, GibbsError, GibbsSpec, GroupFamily,
    HeatBath, LatticeBox, Loop,
};
use num_complex::Complex;
use proptest::prelude::*;
use rand::Rng;

fn spec(dim: usize, side: i32, family: GroupFamily, beta: f64) -> GibbsSpec<f64> {
    let cx = Arc::new(CellComplex::new(LatticeBox::cube(dim, side).unwrap()).unwrap());
    let g = Arc::new(GaugeGroup::builtin(&family).unwrap());
    GibbsSpec::new(cx, g, beta).unwrap()
}

fn random_config(s: &GibbsSpec<f64>, rng: &mut impl Rng) -> EdgeConfig {
    let n = s.group.order();
    EdgeConfig::from_values((0..s.complex.num_edges()).map(|_| Element(rng.gen_range(0..n) as u16)).collect())
}

/// Action from raw matrices: multiply the four link matrices and take the trace.
fn brute_action(s: &GibbsSpec<f64>, sigma: &EdgeConfig) -> f64 {
    let rep = &s.group.rep;
    let d = rep.dim();
    let mat = |g: Element| rep.matrix(g).to_vec();
    let mul = |a: &[Complex<f64>], b: &[Complex<f64>]| {
        let mut c = vec![Complex::new(0.0, 0.0); d * d];
        for i in 0..d {
            for k in 0..d {
                for j in 0..d {
                    c[i * d + j] += a[i * d + k] * b[k * d + j];
                }
            }
        }
        c
    };
    let t = &s.group.table;
    let mut total = 0.0;
    for p in 0..s.complex.num_plaquettes() {
        let mut m = mat(Element::IDENTITY);
        for step in s.complex.plaquette_loop(p) {
            let g = sigma.get(step.edge);
            m = mul(&m, &mat(if step.forward { g } else { t.inv(g) }));
        }
        let tr: f64 = (0..d).map(|i| m[i * d + i].re).sum();
        total += d as f64 - tr;
    }
    total
}

#[test]
fn plaquette_values() {
    let s = spec(2, 2, GroupFamily::Cyclic(2), 1.0);
    let one = EdgeConfig::identity(s.complex.num_edges());
    assert!((0..4).all(|p| s.plaquette_value(&one, p).is_identity()));
    let lp = s.complex.plaquette_loop(0);
    let mut sigma = one.clone();
    sigma.set(lp[2].edge, Element(1));
    assert_eq!(s.plaquette_value(&sigma, 0), Element(1));
}

#[test]
fn rotation_conjugates_plaquette_value() {
    let s = spec(2, 2, GroupFamily::Symmetric3, 1.0);
    let t = &s.group.table;
    let classes = class_index(t);
    let mut rng = chain_rng(11, 0);
    for _ in 0..50 {
        let sigma = random_config(&s, &mut rng);
        for p in 0..s.complex.num_plaquettes() {
            let lp = Loop::plaquette(&s.complex, p);
            let v = s.holonomy(&sigma, &lp);
            for k in 1..4 {
                let w = s.holonomy(&sigma, &lp.rotated(&s.complex, k));
                assert_eq!(classes[v.index()], classes[w.index()]);
                let chi = s.group.rep.chi(v) - s.group.rep.chi(w);
                assert!(chi.norm() < 1e-12);
            }
        }
    }
}

#[test]
fn action_examples() {
    let s = spec(2, 2, GroupFamily::Cyclic(2), 0.7);
    let mut sigma = EdgeConfig::identity(s.complex.num_edges());
    assert_eq!(s.action(&sigma), 0.0);
    assert_eq!(s.weight(&sigma), 1.0);
    let c = s.complex.vertex_at(&[1, 1]).unwrap();
    let interior = (0..s.complex.num_edges())
        .find(|&e| s.complex.edge(e).tail == c || s.complex.edge(e).head == c)
        .unwrap();
    sigma.set(interior, Element(1));
    assert_relative_eq!(s.action(&sigma), 4.0, epsilon = 1e-12);
    assert_relative_eq!(brute_action(&s, &sigma), 4.0, epsilon = 1e-12);
}

#[test]
fn action_agrees_with_raw_matrices() {
    for fam in [GroupFamily::Cyclic(3), GroupFamily::Symmetric3, GroupFamily::Quaternion8] {
        let s = spec(3, 1, fam, 0.9);
        let mut rng = chain_rng(3, 1);
        for _ in 0..40 {
            let sigma = random_config(&s, &mut rng);
            let a = s.action(&sigma);
            assert_relative_eq!(a, brute_action(&s, &sigma), epsilon = 1e-9);
            let w = s.weight(&sigma);
            assert!(w > 0.0 && w <= 1.0);
            assert_relative_eq!(w.ln(), -s.beta() * a, max_relative = 1e-10, epsilon = 1e-12);
        }
    }
}

#[test]
fn holonomy_and_backtracks() {
    let s = spec(2, 2, GroupFamily::Symmetric3, 1.0);
    let cx = &s.complex;
    let one = EdgeConfig::identity(cx.num_edges());
    let lp = Loop::plaquette(cx, 2);
    assert!(s.holonomy(&one, &lp).is_identity());
    let mut rng = chain_rng(5, 0);
    for _ in 0..30 {
        let sigma = random_config(&s, &mut rng);
        let v = s.holonomy(&sigma, &lp);
        assert_eq!(v, s.plaquette_value(&sigma, 2));
        for at in 0..lp.len() {
            for e in 0..cx.num_edges() {
                for fw in [true, false] {
                    if let Ok(b) = lp.with_backtrack(cx, at, DirEdge { edge: e, forward: fw }) {
                        assert_eq!(s.holonomy(&sigma, &b), v);
                    }
                }
            }
        }
    }
    let bad = vec![DirEdge::fwd(0), DirEdge::fwd(5)];
    assert!(Loop::new(cx, 0, bad).is_err());
}

#[test]
fn wilson_loops() {
    let s = spec(2, 2, GroupFamily::Cyclic(2), 1.0);
    let chi = ClassFunction::new(s.group.rep.character().to_vec());
    let lp = Loop::plaquette(&s.complex, 0);
    let mut sigma = EdgeConfig::identity(s.complex.num_edges());
    assert_eq!(s.wilson(&sigma, &lp, &chi), Complex::new(1.0, 0.0));
    sigma.set(lp.steps()[1].edge, Element(1));
    assert!((s.wilson(&sigma, &lp, &chi) - Complex::new(-1.0, 0.0)).norm() < 1e-12);
    for k in 0..4 {
        assert!((s.wilson(&sigma, &lp.rotated(&s.complex, k), &chi) - Complex::new(-1.0, 0.0)).norm() < 1e-12);
    }
    let s3 = spec(2, 1, GroupFamily::Symmetric3, 1.0);
    assert!(ClassFunction::new(s3.group.rep.character().to_vec()).validate(&s3.group.table, 1e-12).is_ok());
    let mut vals = vec![0.0; 6];
    vals[1] = 1.0;
    assert!(ClassFunction::from_real(&vals).validate(&s3.group.table, 1e-12).is_err());
}

#[test]
fn wilson_is_gauge_invariant_exhaustively() {
    // Every gauge transformation of a fixed S₃ configuration on the single plaquette.
    let s = spec(2, 1, GroupFamily::Symmetric3, 1.0);
    let chi = ClassFunction::new(s.group.rep.character().to_vec());
    let lp = Loop::plaquette(&s.complex, 0);
    let mut rng = chain_rng(8, 0);
    let sigma = random_config(&s, &mut rng);
    let w0 = s.wilson(&sigma, &lp, &chi);
    let nv = s.complex.num_vertices();
    for idx in 0..6u64.pow(nv as u32) {
        let h = EdgeConfig::from_index(idx, nv, 6);
        let moved = sigma.gauge_transform(&s.complex, &s.group, h.values());
        assert!((s.wilson(&moved, &lp, &chi) - w0).norm() < 1e-12);
        assert_relative_eq!(s.action(&moved), s.action(&sigma), epsilon = 1e-12);
    }
}

#[test]
fn enumeration() {
    let s = spec(2, 2, GroupFamily::Cyclic(2), 0.0);
    let mu = s.enumerate_mu(DEFAULT_CAP).unwrap();
    assert_eq!(mu.len(), 4096);
    assert!((0..mu.len()).all(|i| (mu.prob(i) - 1.0 / 4096.0).abs() < 1e-15));
    let s = s.with_beta(1.0).unwrap();
    let mu = s.enumerate_mu(DEFAULT_CAP).unwrap();
    let total: f64 = (0..mu.len()).map(|i| mu.prob(i)).sum();
    assert!((total - 1.0).abs() < 1e-12);
    let mut z = 0.0;
    for i in 0..4096u64 {
        z += (-brute_action(&s, &EdgeConfig::from_index(i, 12, 2))).exp();
    }
    assert_relative_eq!(mu.partition_function(), z, max_relative = 1e-12);
    assert!(matches!(s.enumerate_mu(1000), Err(GibbsError::CapExceeded { .. })));
    assert!(matches!(s.with_beta(-1.0), Err(GibbsError::NegativeBeta(_))));
}

#[test]
fn heat_bath_detailed_balance() {
    // Single-edge kernel on the single Z₃ plaquette: π(x) K_e(x→y) = π(y) K_e(y→x).
    let s = spec(2, 1, GroupFamily::Cyclic(3), 0.8);
    let mu = s.enumerate_mu(DEFAULT_CAP).unwrap();
    let kernel = HeatBath::new(s.clone());
    let ne = s.complex.num_edges();
    let configs: Vec<EdgeConfig> = (0..mu.len() as u64).map(|i| EdgeConfig::from_index(i, ne, 3)).collect();
    let index_of = |c: &EdgeConfig| configs.iter().position(|x| x == c).unwrap();
    let k = |x: &EdgeConfig, e: usize, g: Element| {
        let w = kernel.conditional(x, e);
        w[g.index()] / w.iter().sum::<f64>()
    };
    for (ix, x) in configs.iter().enumerate() {
        for e in 0..ne {
            for g in s.group.table.elements() {
                let mut y = x.clone();
                y.set(e, g);
                let iy = index_of(&y);
                let lhs = mu.prob(ix) * k(x, e, g);
                let rhs = mu.prob(iy) * k(&y, e, x.get(e));
                assert!((lhs - rhs).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn chains_are_reproducible() {
    let s = spec(2, 2, GroupFamily::Symmetric3, 1.0);
    let a: Vec<_> = mcmc_chain(&s, 20, 42).collect();
    let b: Vec<_> = mcmc_chain(&s, 20, 42).collect();
    let c: Vec<_> = mcmc_chain(&s, 20, 43).collect();
    assert_eq!(a, b);
    assert_ne!(a, c);
    let k = Arc::new(HeatBath::new(s));
    let d: Vec<_> = Chain::new(k.clone(), 42, 1).take(20).collect();
    assert_ne!(a, d);
}

#[test]
fn uniform_marginals_at_zero_beta() {
    let s = spec(2, 1, GroupFamily::Cyclic(3), 0.0);
    let n = 100_000;
    let mut counts = vec![[0usize; 3]; s.complex.num_edges()];
    for sigma in mcmc_chain(&s, n, 7) {
        for (e, c) in counts.iter_mut().enumerate() {
            c[sigma.get(e).index()] += 1;
        }
    }
    for c in counts {
        let expect = n as f64 / 3.0;
        let stat: f64 = c.iter().map(|&o| (o as f64 - expect).powi(2) / expect).sum();
        // χ² with two degrees of freedom, upper 1% point.
        assert!(stat < 9.2103, "chi-square {stat}");
    }
}

fn batch_mean_check(samples: &[f64], exact: f64) {
    let batches = 50;
    let bs = samples.len() / batches;
    let means: Vec<f64> = samples.chunks(bs).take(batches).map(|c| c.iter().sum::<f64>() / bs as f64).collect();
    let m = means.iter().sum::<f64>() / batches as f64;
    let var = means.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (batches - 1) as f64;
    let se = (var / batches as f64).sqrt();
    assert!((m - exact).abs() < 3.0 * se, "mean {m}, exact {exact}, stderr {se}");
}

#[test]
fn single_plaquette_excitation_frequency() {
    let beta = 0.6;
    let s = spec(2, 1, GroupFamily::Cyclic(2), beta);
    let samples: Vec<f64> = mcmc_chain(&s, 100_000, 9)
        .map(|x| if s.plaquette_value(&x, 0).is_identity() { 0.0 } else { 1.0 })
        .collect();
    let q = (-2.0 * beta).exp();
    batch_mean_check(&samples, q / (1.0 + q));
}

#[test]
fn sampler_matches_enumeration() {
    let s = spec(2, 2, GroupFamily::Cyclic(2), 1.0);
    let mu = s.enumerate_mu(DEFAULT_CAP).unwrap();
    let path = s.complex.spanning_tree(0).path(&s.complex, 8);
    let obs = |x: &EdgeConfig| {
        let a = if path_product(&s.group, x, &path).is_identity() { 1.0 } else { -1.0 };
        a + s.action(x)
    };
    let exact = mu.expectation(obs);
    let samples: Vec<f64> = mcmc_chain(&s, 60_000, 1).map(|x| obs(&x)).collect();
    batch_mean_check(&samples[1000..], exact);
}

#[test]
fn covariance_estimator() {
    let s = spec(2, 2, GroupFamily::Cyclic(2), 1.0);
    let mu = s.enumerate_mu(DEFAULT_CAP).unwrap();
    let f1 = |x: &EdgeConfig| if s.plaquette_value(x, 0).is_identity() { 1.0 } else { -1.0 };
    let f2 = |x: &EdgeConfig| if s.plaquette_value(x, 3).is_identity() { 1.0 } else { -1.0 };
    let stream: Vec<CovSample<f64>> = mu.iter().map(|(x, p)| CovSample { f1: f1(&x), f2: f2(&x), weight: p }).collect();
    let est = estimate_cov(&stream, 256).unwrap();
    let exact = mu.expectation(|x| f1(x) * f2(x)) - mu.expectation(f1) * mu.expectation(f2);
    assert!((est.cov - exact).abs() < 1e-12);
    assert_eq!(est.batches, 16);

    let constant: Vec<_> = stream.iter().map(|c| CovSample { f2: 3.5, ..*c }).collect();
    assert_eq!(estimate_cov(&constant, 256).unwrap().cov, 0.0);
    let same: Vec<_> = stream.iter().map(|c| CovSample { f2: c.f1, ..*c }).collect();
    assert!(estimate_cov(&same, 256).unwrap().cov >= 0.0);
    assert!(matches!(estimate_cov(&stream[..100], 20), Err(GibbsError::InsufficientSamples(5))));
    assert!(matches!(estimate_cov(&stream, 0), Err(GibbsError::ZeroBatch)));
}

proptest! {
    #[test]
    fn weight_is_exp_of_action(idx in 0u64..(1 << 24), beta in 0.0f64..5.0) {
        let s = spec(2, 2, GroupFamily::Cyclic(4), beta);
        let sigma = EdgeConfig::from_index(idx, 12, 4);
        let w = s.weight(&sigma);
        prop_assert!(w > 0.0 && w <= 1.0);
        prop_assert!((w.ln() + beta * s.action(&sigma)).abs() <= 1e-10 * (1.0 + beta * s.action(&sigma)));
    }
}

#[test]
fn compensated_sum_beats_naive_accumulation() {
    let xs = vec![0.1f64; 1_000_000];
    let exact = 100_000.0;
    let naive: f64 = xs.iter().sum();
    let comp = lgt_core::compensated_sum(xs.iter().copied());
    assert!((comp - exact).abs() < 1e-9);
    assert!((comp - exact).abs() < (naive - exact).abs());
    assert_eq!(lgt_core::compensated_sum([1e100, 1.0, -1e100]), 1.0);
    assert_eq!(lgt_core::compensated_sum(std::iter::empty::<f64>()), 0.0);
}
