//! Exhaustive verification suites. Each check becomes one CSV row carrying
//! the index of the first failing case.

use std::collections::HashMap;

use lgt_core::bounds::{covariance_bound, phi2_upper};
use lgt_core::group::{conjugacy_classes, ClassFunction};
use lgt_core::swap::{phi2_from_table, SwapContext};
use lgt_core::topo::{coordinate_separation, enumerate_knots_containing, knot_size_floor};
use lgt_core::{compensated_sum, EdgeConfig, GaugeGroup, GibbsError, Homomorphism, Loop, PlaquetteSet, Presentation};
use serde::Serialize;

use crate::config::{plaquette_set, ExperimentConfig, Fault};
use crate::error::CliError;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckRow {
    pub instance: String,
    pub check: String,
    pub pass: bool,
    pub witness: Option<u64>,
    pub cases: u64,
}

pub const CHECK_HEADER: [&str; 5] = ["instance", "check", "pass", "witness", "cases"];

/// Accumulates cases for one check and remembers the first failure.
pub struct Check {
    name: String,
    witness: Option<u64>,
    cases: u64,
}

impl Check {
    pub fn new(name: impl Into<String>) -> Self {
        Check { name: name.into(), witness: None, cases: 0 }
    }

    pub fn case(&mut self, index: u64, ok: bool) {
        self.cases += 1;
        if !ok && self.witness.is_none() {
            self.witness = Some(index);
        }
    }

    pub fn row(self, instance: &str) -> CheckRow {
        CheckRow { instance: instance.to_string(), check: self.name, pass: self.witness.is_none(), witness: self.witness, cases: self.cases }
    }
}

pub fn instance_name(cfg: &ExperimentConfig) -> String {
    let params: Vec<String> = cfg.group.params.iter().map(|p| p.to_string()).collect();
    format!("d{}-n{}-{}{}", cfg.lattice.dim, cfg.lattice.side, cfg.group.name, params.join("x"))
}

/// Runs every suite the instance is small enough for.
pub fn run_verify(cfg: &ExperimentConfig) -> Result<Vec<CheckRow>, CliError> {
    let mut rows = Vec::new();
    let spec = cfg.spec(cfg.betas[0])?;
    if spec.config_count() <= cfg.cap as f64 {
        rows.extend(gauge_suite(cfg)?);
    }
    if cfg.lattice.dim >= 3 {
        rows.extend(swap_suite(cfg)?);
        rows.extend(peierls_suite(cfg)?);
    }
    if rows.is_empty() {
        return Err(CliError::Config("instance too large for every suite; raise cap or shrink the lattice".into()));
    }
    Ok(rows)
}

fn beta_tag(b: f64) -> String {
    format!("beta={b}")
}

/// Fibers, gauge fixing, the pushforward law and observable transfer, by exact enumeration.
pub fn gauge_suite(cfg: &ExperimentConfig) -> Result<Vec<CheckRow>, CliError> {
    let inst = instance_name(cfg);
    let cx = cfg.complex()?;
    let g = cfg.group()?;
    let order = g.order();
    let pres = Presentation::lexicographic(cx.clone(), cfg.root);
    let omega = pres.omega_size(order) as u64;
    let mut rows = Vec::new();

    let expected = (order as u64).pow(cx.num_vertices() as u32 - 1);
    let total = (order as f64).powi(cx.num_edges() as i32) as u64;
    let mut fiber = vec![0u64; omega as usize];
    for i in 0..total {
        let sigma = EdgeConfig::from_index(i, cx.num_edges(), order);
        fiber[pres.psi_of_config(&g, &sigma).index(order) as usize] += 1;
    }
    let mut c = Check::new("fiber_count");
    for (k, &n) in fiber.iter().enumerate() {
        c.case(k as u64, n == expected);
    }
    rows.push(c.row(&inst));

    let mut c = Check::new("gauge_fix_round_trip");
    for k in 0..omega {
        let psi = Homomorphism::from_index(k, pres.rank(), order);
        c.case(k, pres.psi_of_config(&g, &pres.gauge_fix(&psi)) == psi);
    }
    rows.push(c.row(&inst));

    let classes = conjugacy_classes(&g.table);
    let class_fns: Vec<ClassFunction<f64>> = classes.iter().map(|cl| ClassFunction::indicator(&g.table, cl)).collect();
    for &beta in &cfg.betas {
        let spec = cfg.spec(beta)?;
        let mu = spec.enumerate_mu(cfg.cap).map_err(|e| match e {
            GibbsError::CapExceeded { .. } => CliError::Config(e.to_string()),
            other => CliError::Run(other.to_string()),
        })?;
        let nu = pres.enumerate_nu(&spec, cfg.cap).map_err(|e| CliError::Config(e.to_string()))?;
        let mut push = vec![0.0; nu.len()];
        let mut images = Vec::with_capacity(mu.len());
        for (sigma, p) in mu.iter() {
            let psi = pres.psi_of_config(&g, &sigma);
            push[psi.index(order) as usize] += p;
            images.push(sigma);
        }
        let tv: f64 = push.iter().zip(&nu).map(|(a, b)| (a - b).abs()).sum::<f64>() / 2.0;
        let mut c = Check::new(format!("pushforward_tv[{}]", beta_tag(beta)));
        c.case(0, tv < 1e-12);
        rows.push(c.row(&inst));

        let mut c = Check::new(format!("observable_transfer[{}]", beta_tag(beta)));
        let homs: Vec<Homomorphism> = (0..omega).map(|k| Homomorphism::from_index(k, pres.rank(), order)).collect();
        for p in 0..cx.num_plaquettes() {
            let gamma = Loop::plaquette(&cx, p);
            let xi = pres.xi_of_loop(&gamma);
            let held: Vec<_> = images.iter().map(|sigma| spec.holonomy(sigma, &gamma)).collect();
            let pushed: Vec<_> = homs.iter().map(|psi| pres.eval(&g.table, psi, &xi)).collect();
            let lhs: Vec<f64> = class_fns
                .iter()
                .map(|f| compensated_sum(held.iter().enumerate().map(|(i, &h)| mu.prob(i) * f.eval(h).re)))
                .collect();
            let rhs: Vec<f64> =
                class_fns.iter().map(|f| compensated_sum(pushed.iter().zip(&nu).map(|(&h, &q)| q * f.eval(h).re))).collect();
            c.case(p as u64, lhs.iter().zip(&rhs).all(|(a, b)| (a - b).abs() < 1e-12));
        }
        rows.push(c.row(&inst));
    }
    Ok(rows)
}

pub fn swap_context(cfg: &ExperimentConfig, beta: f64) -> Result<SwapContext<f64>, CliError> {
    let ctx = SwapContext::new(cfg.spec(beta)?, cfg.root).map_err(|e| CliError::Config(e.to_string()))?;
    Ok(match cfg.fault {
        Some(Fault::CorruptTheta) => ctx.with_corrupted_theta(),
        None => ctx,
    })
}

/// Plaquettes the family may excite.
pub fn family_universe(cfg: &ExperimentConfig, n_plaquettes: usize) -> Result<PlaquetteSet, CliError> {
    let cx = cfg.complex()?;
    if cfg.family.is_empty() {
        Ok(PlaquetteSet::full(n_plaquettes))
    } else {
        plaquette_set(&cx, &cfg.family)
    }
}

/// Re χ at B's first plaquette.
fn wilson_at<'a>(ctx: &'a SwapContext<f64>, b: &PlaquetteSet) -> impl Fn(&Homomorphism) -> f64 + 'a {
    let p = b.first().expect("nonempty rectangle");
    move |psi| {
        let g = &ctx.spec().group;
        g.rep.chi(ctx.presentation().plaquette_image(&g.table, psi, p)).re
    }
}

pub fn sup_norm(g: &GaugeGroup<f64>) -> f64 {
    g.table.elements().map(|x| g.rep.chi(x).re.abs()).fold(0.0, f64::max)
}

/// The swap map, its exchange identity and the covariance bound over the family.
pub fn swap_suite(cfg: &ExperimentConfig) -> Result<Vec<CheckRow>, CliError> {
    let inst = instance_name(cfg);
    let mut rows = Vec::new();
    for &beta in &cfg.betas {
        let ctx = swap_context(cfg, beta)?;
        let cx = ctx.spec().complex.clone();
        let (b1, b2) = cfg.rectangles(&cx)?;
        let allowed = family_universe(cfg, cx.num_plaquettes())?;
        let family = ctx.homomorphisms_within(&allowed, cfg.cap).map_err(|e| CliError::Config(e.to_string()))?;
        let index: HashMap<&Homomorphism, usize> = family.iter().enumerate().map(|(i, p)| (p, i)).collect();
        let n = family.len() as u64;
        let tag = beta_tag(beta);
        let mut theta = Check::new(format!("theta_round_trip[{tag}]"));
        for (i, psi) in family.iter().enumerate() {
            let ps = ctx.support(psi).union(&b1).union(&b2);
            let d = ctx.decomposition(&ps);
            let ok = ctx.theta_with(&d, psi).and_then(|parts| ctx.theta_inverse(&d, &parts)).map(|back| back == *psi);
            theta.case(i as u64, ok.unwrap_or(false));
        }
        let mut inv = Check::new(format!("swap_involution[{tag}]"));
        let mut supp = Check::new(format!("swap_support[{tag}]"));
        let mut weight = Check::new(format!("swap_weight_classes[{tag}]"));
        let mut closed = Check::new(format!("swap_stays_in_family[{tag}]"));
        for (i, p1) in family.iter().enumerate() {
            for (j, p2) in family.iter().enumerate() {
                if !ctx.in_e(p1, p2, &b1, &b2) {
                    continue;
                }
                let id = i as u64 * n + j as u64;
                let Ok((t1, t2)) = ctx.swap_t(p1, p2, &b1, &b2) else {
                    inv.case(id, false);
                    continue;
                };
                let back = ctx.swap_t(&t1, &t2, &b1, &b2);
                inv.case(id, matches!(&back, Ok((a, b)) if a == p1 && b == p2));
                let joint = |a: &Homomorphism, b: &Homomorphism| ctx.support(a).union(&ctx.support(b)).union(&b1).union(&b2);
                supp.case(id, joint(&t1, &t2) == joint(p1, p2));
                weight.case(id, ctx.pair_class_multiset(&t1, &t2) == ctx.pair_class_multiset(p1, p2));
                closed.case(id, index.contains_key(&t1) && index.contains_key(&t2));
            }
        }
        let closed_ok = closed.witness.is_none();
        rows.extend([theta, inv, supp, weight, closed].map(|c| c.row(&inst)));

        let h1 = wilson_at(&ctx, &b1);
        let h2 = wilson_at(&ctx, &b2);
        let stats = ctx.pair_statistics(&family, &b1, &b2, &h1, &h2);
        let mut exch = Check::new(format!("exchange_identity[{tag}]"));
        exch.case(0, closed_ok && (stats.same_copy_on_e - stats.cross_copy_on_e).abs() <= 1e-12);
        rows.push(exch.row(&inst));
        let sup = sup_norm(&ctx.spec().group);
        let bound = covariance_bound(sup, sup, stats.p_out.clamp(0.0, 1.0)).map_err(|e| CliError::Run(e.to_string()))?;
        let mut cov = Check::new(format!("covariance_bound[{tag}]"));
        cov.case(0, stats.covariance.abs() <= bound + 1e-12);
        rows.push(cov.row(&inst));
    }
    Ok(rows)
}

/// Largest plaquette universe for the exhaustive Φ⁽²⁾ scans.
pub const MAX_SCAN_PLAQUETTES: usize = 12;

/// Φ⁽²⁾ against its upper bound and across separated pairs, and the knot-size floor.
pub fn peierls_suite(cfg: &ExperimentConfig) -> Result<Vec<CheckRow>, CliError> {
    let inst = instance_name(cfg);
    let mut rows = Vec::new();
    let cx = cfg.complex()?;
    let universe = family_universe(cfg, cx.num_plaquettes())?;
    let members: Vec<usize> = universe.iter().collect();
    let subset = |mask: u32| PlaquetteSet::from_indices(cx.num_plaquettes(), members.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &p)| p));
    if members.len() <= MAX_SCAN_PLAQUETTES {
        let m = members.len() as u32;
        for &beta in &cfg.betas {
            let ctx = swap_context(cfg, beta)?;
            let table = ctx.support_weights(&universe, cfg.cap).map_err(|e| CliError::Config(e.to_string()))?;
            let g = &ctx.spec().group;
            let mut upper = Check::new(format!("phi2_upper_bound[{}]", beta_tag(beta)));
            for mask in 0..(1u32 << m) {
                let ps = subset(mask);
                // Submasks of `mask`, including zero.
                let mut sub = mask;
                loop {
                    let p0 = subset(sub);
                    let v = phi2_from_table(&table, &p0, &ps);
                    let ub = phi2_upper(g.order(), g.delta(), beta, ps.len(), ps.len() - p0.len());
                    upper.case(((mask as u64) << 32) | sub as u64, v <= ub * (1.0 + 1e-12));
                    if sub == 0 {
                        break;
                    }
                    sub = (sub - 1) & mask;
                }
            }
            rows.push(upper.row(&inst));

            let mut fact = Check::new(format!("phi2_factorization[{}]", beta_tag(beta)));
            let empty = cx.empty_plaquettes();
            for a in 1..(1u32 << m) {
                let pa = subset(a);
                let rest = ((1u32 << m) - 1) & !a;
                let mut b = rest;
                while b != 0 {
                    let pb = subset(b);
                    if ctx.catalog().iter().any(|s| s.cells.separates(&pa, &pb)) {
                        let whole = phi2_from_table(&table, &empty, &pa.union(&pb));
                        let prod = phi2_from_table(&table, &empty, &pa) * phi2_from_table(&table, &empty, &pb);
                        fact.case(((a as u64) << 32) | b as u64, (whole - prod).abs() <= 1e-10 * prod.abs().max(f64::MIN_POSITIVE));
                    }
                    b = (b - 1) & rest;
                }
            }
            rows.push(fact.row(&inst));
        }
    }
    let ctx = swap_context(cfg, cfg.betas[0])?;
    let (b1, _) = cfg.rectangles(&cx)?;
    let p = b1.first().expect("nonempty rectangle");
    let single = |q: usize| PlaquetteSet::from_indices(cx.num_plaquettes(), [q]);
    let mut floor = Check::new("knot_size_floor");
    let mut id = 0u64;
    for m in 1..=cfg.knot_size {
        let knots = enumerate_knots_containing(&cx, ctx.catalog(), p, m).map_err(|e| CliError::Config(e.to_string()))?;
        for k in knots {
            for q in k.iter() {
                let l = coordinate_separation(&cx, &single(p), &single(q));
                if l > 0 {
                    floor.case(id, knot_size_floor(&single(p), &single(q), l, &k));
                }
                id += 1;
            }
        }
    }
    rows.push(floor.row(&inst));
    Ok(rows)
}
