//! The `enumerate`, `bounds` and `higgs` subcommands.

use std::sync::Arc;

use lgt_core::bounds::percolation_and_theorem_bounds;
use lgt_core::higgs::{capped_configs, capped_reduced, CurrentModel, HiggsConfig, HiggsError, HiggsModel, ReducedConfig};
use lgt_core::swap::SwapContext;
use lgt_core::topo::SeparatorCatalog;
use lgt_core::{Homomorphism, PlaquetteSet, Presentation};
use serde::Serialize;

use crate::config::{plaquette_set, resolve_edge, ExperimentConfig, HiggsMode};
use crate::error::CliError;
use crate::verify::{instance_name, sup_norm, Check, CheckRow};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnumerateRow {
    pub beta: f64,
    pub configs: u64,
    pub homomorphisms: u64,
    pub partition_function: f64,
    pub mean_plaquette: f64,
    pub tv: f64,
}

pub const ENUMERATE_HEADER: [&str; 6] = ["beta", "configs", "homomorphisms", "partition_function", "mean_plaquette", "tv"];

/// Exact partition function, mean plaquette and pushforward distance per β.
pub fn run_enumerate(cfg: &ExperimentConfig) -> Result<Vec<EnumerateRow>, CliError> {
    let cx = cfg.complex()?;
    let pres = Presentation::lexicographic(cx.clone(), cfg.root);
    let mut rows = Vec::new();
    for &beta in &cfg.betas {
        let spec = cfg.spec(beta)?;
        let order = spec.group.order();
        let mu = spec.enumerate_mu(cfg.cap).map_err(|e| CliError::Config(e.to_string()))?;
        let nu = pres.enumerate_nu(&spec, cfg.cap).map_err(|e| CliError::Config(e.to_string()))?;
        let mut push = vec![0.0; nu.len()];
        let mut mean = 0.0;
        let np = cx.num_plaquettes() as f64;
        for (sigma, p) in mu.iter() {
            push[pres.psi_of_config(&spec.group, &sigma).index(order) as usize] += p;
            let s: f64 = (0..cx.num_plaquettes()).map(|q| spec.group.rep.chi(spec.plaquette_value(&sigma, q)).re).sum();
            mean += p * s / np;
        }
        let tv = push.iter().zip(&nu).map(|(a, b)| (a - b).abs()).sum::<f64>() / 2.0;
        rows.push(EnumerateRow {
            beta,
            configs: mu.len() as u64,
            homomorphisms: nu.len() as u64,
            partition_function: mu.partition_function(),
            mean_plaquette: mean,
            tv,
        });
    }
    Ok(rows)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundsRow {
    pub beta: f64,
    #[serde(rename = "L")]
    pub l: i32,
    pub ln_p_out: f64,
    pub p_out: f64,
    pub ln_cov: f64,
    pub cov: f64,
    pub below_threshold: bool,
}

pub const BOUNDS_HEADER: [&str; 7] = ["beta", "L", "ln_p_out", "p_out", "ln_cov", "cov", "below_threshold"];

pub struct BoundsReport {
    pub threshold: f64,
    pub delta: f64,
    pub rows: Vec<BoundsRow>,
}

/// Percolation and covariance bounds for each β and each L of the decay sweep.
pub fn run_bounds(cfg: &ExperimentConfig) -> Result<BoundsReport, CliError> {
    let g = cfg.group()?;
    let threshold = g.beta_threshold().map_err(|e| CliError::Run(e.to_string()))?;
    let (b1, b2) = (cfg.b1.len().max(1), cfg.b2.len().max(1));
    let sup = sup_norm(&g);
    let mut rows = Vec::new();
    for &beta in &cfg.betas {
        for &l in &cfg.decay.l_values {
            let b = percolation_and_theorem_bounds(g.order(), g.delta(), beta, threshold, b1, b2, l as i64, sup, sup);
            rows.push(BoundsRow {
                beta,
                l,
                ln_p_out: b.ln_p_out,
                p_out: b.p_out,
                ln_cov: b.ln_covariance,
                cov: b.covariance,
                below_threshold: b.below_threshold,
            });
        }
    }
    Ok(BoundsReport { threshold, delta: g.delta(), rows })
}

fn higgs_err(e: HiggsError) -> CliError {
    match e {
        HiggsError::DegenerateQuotient | HiggsError::BadOrder(_) | HiggsError::NotBinary(_) | HiggsError::CapExceeded { .. } => {
            CliError::Config(e.to_string())
        }
        other => CliError::Run(other.to_string()),
    }
}

pub fn run_higgs(cfg: &ExperimentConfig) -> Result<Vec<CheckRow>, CliError> {
    if cfg.higgs.edges.is_empty() {
        return Err(CliError::Config("higgs needs at least one edge in higgs.edges".into()));
    }
    match cfg.higgs.mode {
        HiggsMode::Large => higgs_large(cfg),
        HiggsMode::Small => higgs_small(cfg),
    }
}

fn tagged(name: &str, kappa: f64) -> String {
    format!("{name}[kappa={kappa}]")
}

fn higgs_large(cfg: &ExperimentConfig) -> Result<Vec<CheckRow>, CliError> {
    let inst = instance_name(cfg);
    let cx = cfg.complex()?;
    let edges = cfg.higgs.edges.iter().map(|e| resolve_edge(&cx, e)).collect::<Result<Vec<_>, _>>()?;
    let verts = cfg
        .higgs
        .vertices
        .iter()
        .map(|x| cx.vertex_at(x).map_err(|e| CliError::Config(format!("vertex {x:?}: {e}"))))
        .collect::<Result<Vec<_>, _>>()?;
    let (b1, b2) = cfg.rectangles(&cx)?;
    let mut rows = Vec::new();
    for &kappa in &cfg.higgs.kappas {
        let m = HiggsModel::new(cfg.spec(cfg.betas[0])?, cfg.higgs.h_order, kappa).map_err(higgs_err)?;
        let family = capped_configs(&m, &edges, &verts);
        let n = family.len() as u64;
        let mut inv = Check::new(tagged("swap_involution", kappa));
        let mut supp = Check::new(tagged("swap_support", kappa));
        let mut energy = Check::new(tagged("swap_hamiltonian", kappa));
        let joint = |a: &HiggsConfig, b: &HiggsConfig| m.support(a).union(&m.support(b)).union(&b1).union(&b2);
        for (i, c1) in family.iter().enumerate() {
            for (j, c2) in family.iter().enumerate() {
                if !m.admissible(c1, c2, &b1, &b2) {
                    continue;
                }
                let id = i as u64 * n + j as u64;
                let Ok((t1, t2)) = m.swap(c1, c2, &b1, &b2) else {
                    inv.case(id, false);
                    continue;
                };
                inv.case(id, matches!(m.swap(&t1, &t2, &b1, &b2), Ok((a, b)) if &a == c1 && &b == c2));
                supp.case(id, joint(&t1, &t2) == joint(c1, c2));
                energy.case(id, m.pair_energy_keys(&t1, &t2) == m.pair_energy_keys(c1, c2));
            }
        }
        rows.extend([inv, supp, energy].map(|c| c.row(&inst)));
        let mut bound = Check::new(tagged("phi2_bound", kappa));
        for (k, ps) in support_family(family.iter().map(|c| m.support(c)), &b1).iter().enumerate() {
            let v = m.phi2(&family, &b1, ps).map_err(higgs_err)?;
            let ub = m.ln_phi2_bound(ps.len(), ps.difference(&b1).len()).exp();
            bound.case(k as u64, v <= ub);
        }
        rows.push(bound.row(&inst));
    }
    Ok(rows)
}

/// Distinct `supp ∪ P₀`, sorted.
fn support_family(supports: impl Iterator<Item = PlaquetteSet>, p0: &PlaquetteSet) -> Vec<PlaquetteSet> {
    let mut v: Vec<PlaquetteSet> = supports.map(|s| s.union(p0)).collect();
    v.sort();
    v.dedup();
    v
}

fn higgs_small(cfg: &ExperimentConfig) -> Result<Vec<CheckRow>, CliError> {
    let inst = instance_name(cfg);
    let cx = cfg.complex()?;
    let edges = cfg.higgs.edges.iter().map(|e| resolve_edge(&cx, e)).collect::<Result<Vec<_>, _>>()?;
    let (b1, b2) = cfg.rectangles(&cx)?;
    let allowed = if cfg.higgs.plaquettes.is_empty() { cx.all_plaquettes() } else { plaquette_set(&cx, &cfg.higgs.plaquettes)? };
    let order = cfg.group()?.order();
    let fiber_size = (order as f64).powi(cx.num_vertices() as i32 - 1);
    let mut rows = Vec::new();
    for &kappa in &cfg.higgs.kappas {
        let spec = cfg.spec(cfg.betas[0])?;
        let ctx = if cx.dim() >= 3 {
            SwapContext::new(spec, cfg.root).map_err(|e| CliError::Config(e.to_string()))?
        } else {
            let pres = Arc::new(Presentation::lexicographic(cx.clone(), cfg.root));
            SwapContext::with_parts(spec, pres, Arc::new(SeparatorCatalog::empty()))
        };
        let m = CurrentModel::new(ctx, cfg.higgs.h_order, kappa).map_err(higgs_err)?;
        let psis: Vec<Homomorphism> = m.gauge.homomorphisms_within(&allowed, cfg.cap).map_err(|e| CliError::Config(e.to_string()))?;
        let family = capped_reduced(&m, &psis, &edges, cfg.higgs.i_max);
        let weights = family.iter().map(|rc| m.reduced_weight(rc, cfg.cap)).collect::<Result<Vec<_>, _>>().map_err(higgs_err)?;

        if fiber_size <= cfg.cap as f64 {
            let mut fiber = Check::new(tagged("fiber_invariance", kappa));
            for (k, (rc, &w)) in family.iter().zip(&weights).enumerate() {
                let f = m.reduced_weight_fiber(rc, cfg.cap).map_err(higgs_err)?;
                fiber.case(k as u64, (w - f).abs() <= 1e-10 * w.abs());
            }
            rows.push(fiber.row(&inst));
        }

        if cx.dim() >= 3 {
            let mut fact = Check::new(tagged("knot_factorization", kappa));
            for (k, (rc, &w)) in family.iter().zip(&weights).enumerate() {
                let ps = m.support(rc).union(&b1).union(&b2);
                let parts = m.split(rc, &ps).map_err(higgs_err)?;
                let prod = parts.iter().map(|p| m.reduced_weight(p, cfg.cap)).collect::<Result<Vec<_>, _>>().map_err(higgs_err)?;
                let prod: f64 = prod.iter().product();
                fact.case(k as u64, (w - prod).abs() <= 1e-10 * w.abs());
            }
            rows.push(fact.row(&inst));

            let index: std::collections::HashMap<&ReducedConfig, usize> = family.iter().enumerate().map(|(i, r)| (r, i)).collect();
            let n = family.len() as u64;
            let mut inv = Check::new(tagged("swap_involution", kappa));
            let mut supp = Check::new(tagged("swap_support", kappa));
            let mut weight = Check::new(tagged("swap_weight", kappa));
            let joint = |x: &ReducedConfig, y: &ReducedConfig| m.support(x).union(&m.support(y)).union(&b1).union(&b2);
            let weight_of = |r: &ReducedConfig| match index.get(r) {
                Some(&i) => Ok(weights[i]),
                None => m.reduced_weight(r, cfg.cap),
            };
            for (i, a) in family.iter().enumerate() {
                for (j, b) in family.iter().enumerate() {
                    let Ok((ta, tb)) = m.swap(a, b, &b1, &b2) else { continue };
                    let id = i as u64 * n + j as u64;
                    inv.case(id, matches!(m.swap(&ta, &tb, &b1, &b2), Ok((x, y)) if &x == a && &y == b));
                    supp.case(id, joint(&ta, &tb) == joint(a, b));
                    let before = weights[i] * weights[j];
                    let after = weight_of(&ta).map_err(higgs_err)? * weight_of(&tb).map_err(higgs_err)?;
                    weight.case(id, (before - after).abs() <= 1e-10 * before.abs());
                }
            }
            rows.extend([inv, supp, weight].map(|c| c.row(&inst)));

            if m.frak_c() < 1.0 {
                let mut bound = Check::new(tagged("phi2_bound", kappa));
                for (k, ps) in support_family(family.iter().map(|rc| m.support(rc)), &b1).iter().enumerate() {
                    let v = m.phi2(&family, &b1, ps, cfg.cap).map_err(higgs_err)?;
                    let ub = m.ln_phi2_bound(ps.len(), ps.difference(&b1).len()).exp();
                    bound.case(k as u64, v <= ub);
                }
                rows.push(bound.row(&inst));
            } else {
                eprintln!("kappa={kappa}: constant {} is not below 1, Φ⁽²⁾ bound not checked", m.frak_c());
            }
        }
    }
    Ok(rows)
}
