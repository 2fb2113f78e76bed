//! Covariance of two single-plaquette Wilson loops as their separation grows.

use std::sync::Arc;

use lgt_core::gibbs::Chain;
use lgt_core::{estimate_cov, CellComplex, CovSample, HeatBath};
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::fit::{fit_exponential, ExponentialFit, FitError};
use crate::pool::ordered_map;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayRow {
    #[serde(rename = "L")]
    pub l: i32,
    pub cov: f64,
    pub stderr: f64,
    pub n: usize,
    pub beta: f64,
}

#[derive(Clone, Debug)]
pub struct DecayResult {
    pub rows: Vec<DecayRow>,
    pub fit: Result<ExponentialFit, FitError>,
    /// `−(β/2) Δ_G`.
    pub reference_slope: f64,
}

/// Plaquettes spanning the two axes other than `axis`, at `start` and at
/// `start + L e_axis` for each L.
pub fn decay_plaquettes(cx: &CellComplex, cfg: &ExperimentConfig) -> Result<(usize, Vec<usize>), CliError> {
    let d = cx.dim();
    let spec = &cfg.decay;
    if d < 2 || spec.axis >= d {
        return Err(CliError::Config(format!("decay axis {} invalid in dimension {d}", spec.axis)));
    }
    let axes: Vec<usize> = (0..d).filter(|&i| i != spec.axis).take(2).collect();
    if axes.len() < 2 {
        return Err(CliError::Config("decay needs dimension ≥ 3".into()));
    }
    let start = spec.start.clone().unwrap_or_else(|| vec![1; d]);
    let find = |x: &[i32]| -> Result<usize, CliError> {
        let v = cx.vertex_at(x).map_err(|e| CliError::Config(format!("decay plaquette at {x:?}: {e}")))?;
        cx.plaquette_index(v, axes[0], axes[1])
            .ok_or_else(|| CliError::Config(format!("decay plaquette at {x:?} leaves the lattice")))
    };
    let p1 = find(&start)?;
    let p2 = spec
        .l_values
        .iter()
        .map(|&l| {
            let mut x = start.clone();
            x[spec.axis] += l;
            find(&x)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok((p1, p2))
}

/// Runs independent heat-bath chains at the first β and estimates each covariance.
pub fn run_decay(cfg: &ExperimentConfig, seed: u64, workers: usize) -> Result<DecayResult, CliError> {
    let spec = &cfg.decay;
    if spec.l_values.len() < 3 {
        return Err(CliError::Config("decay needs at least three L values".into()));
    }
    if spec.chains == 0 || spec.batches_per_chain == 0 || spec.sweeps < spec.batches_per_chain {
        return Err(CliError::Config("decay needs chains, batches and enough sweeps".into()));
    }
    let beta = cfg.betas[0];
    let gibbs = cfg.spec(beta)?;
    let (p1, p2s) = decay_plaquettes(&gibbs.complex, cfg)?;
    let group = gibbs.group.clone();
    let kernel = Arc::new(HeatBath::new(gibbs.clone()));
    let per_chain = spec.sweeps / spec.batches_per_chain * spec.batches_per_chain;
    let chains: Vec<u64> = (0..spec.chains as u64).collect();
    // Per chain, per L: (f₁, f₂) for every retained sweep.
    let streams: Vec<Vec<Vec<(f64, f64)>>> = ordered_map(&chains, workers, |&c| {
        let mut chain = Chain::new(kernel.clone(), seed, c);
        for _ in 0..spec.burn_in {
            chain.sweep();
        }
        let mut out = vec![Vec::with_capacity(per_chain); p2s.len()];
        for _ in 0..per_chain {
            let sigma = chain.sweep();
            let f1 = group.rep.chi(gibbs.plaquette_value(sigma, p1)).re;
            for (k, &p2) in p2s.iter().enumerate() {
                let f2 = if spec.constant_f2 { 1.0 } else { group.rep.chi(gibbs.plaquette_value(sigma, p2)).re };
                out[k].push((f1, f2));
            }
        }
        out
    });
    let batch = per_chain / spec.batches_per_chain;
    let mut rows = Vec::with_capacity(p2s.len());
    for (k, &l) in spec.l_values.iter().enumerate() {
        let samples: Vec<CovSample<f64>> =
            streams.iter().flat_map(|s| s[k].iter().map(|&(a, b)| CovSample::new(a, b))).collect();
        let est = estimate_cov(&samples, batch).map_err(|e| CliError::Run(e.to_string()))?;
        rows.push(DecayRow { l, cov: est.cov, stderr: est.stderr, n: est.n, beta });
    }
    let fit = fit_exponential(&rows);
    Ok(DecayResult { rows, fit, reference_slope: -(beta / 2.0) * gibbs.group.delta() })
}

/// Whether `|cov|` never rises by more than `k` combined standard errors from one L to the next.
pub fn nonincreasing_within(rows: &[DecayRow], k: f64) -> Result<(), usize> {
    for (i, w) in rows.windows(2).enumerate() {
        let slack = k * (w[0].stderr.powi(2) + w[1].stderr.powi(2)).sqrt();
        if w[1].cov.abs() > w[0].cov.abs() + slack {
            return Err(i + 1);
        }
    }
    Ok(())
}
