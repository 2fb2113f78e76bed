//! JSON experiment configuration. Every field has a default, so `{}` is the
//! `[0,2]²` Z₂ verification instance.

use std::path::Path;
use std::sync::Arc;

use lgt_core::{CellComplex, GaugeGroup, GibbsSpec, GroupFamily, LatticeBox, PlaquetteSet};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LatticeSpec {
    pub dim: usize,
    pub side: i32,
}

impl Default for LatticeSpec {
    fn default() -> Self {
        LatticeSpec { dim: 2, side: 2 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GroupSpec {
    pub name: String,
    pub params: Vec<usize>,
}

impl Default for GroupSpec {
    fn default() -> Self {
        GroupSpec { name: "cyclic".into(), params: vec![2] }
    }
}

/// A plaquette by its least corner and the two axes it spans.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlaquetteRef {
    pub at: Vec<i32>,
    pub axes: [usize; 2],
}

/// An edge by its tail and axis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeRef {
    pub at: Vec<i32>,
    pub axis: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DecaySpec {
    pub l_values: Vec<i32>,
    pub chains: usize,
    pub sweeps: usize,
    pub burn_in: usize,
    pub batches_per_chain: usize,
    /// Axis along which the second plaquette is translated.
    pub axis: usize,
    /// Least corner of the first plaquette; defaults to `(1, 1, …)`.
    pub start: Option<Vec<i32>>,
    /// Replace the second observable by a constant.
    pub constant_f2: bool,
}

impl Default for DecaySpec {
    fn default() -> Self {
        DecaySpec {
            l_values: vec![1, 2, 3, 4, 5],
            chains: 8,
            sweeps: 200_000,
            burn_in: 1_000,
            batches_per_chain: 10,
            axis: 0,
            start: None,
            constant_f2: false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HiggsMode {
    Large,
    Small,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HiggsSpec {
    pub mode: HiggsMode,
    pub h_order: usize,
    pub kappas: Vec<f64>,
    /// Edges allowed to carry nontrivial values in the capped family.
    pub edges: Vec<EdgeRef>,
    /// Vertices allowed to carry a flipped charge (large κ).
    pub vertices: Vec<Vec<i32>>,
    /// Plaquettes the gauge part may excite (small κ).
    pub plaquettes: Vec<PlaquetteRef>,
    pub i_max: u32,
}

impl Default for HiggsSpec {
    fn default() -> Self {
        HiggsSpec {
            mode: HiggsMode::Large,
            h_order: 2,
            kappas: vec![2.0, 4.0],
            edges: Vec::new(),
            vertices: Vec::new(),
            plaquettes: Vec::new(),
            i_max: 1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Fault {
    CorruptTheta,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub lattice: LatticeSpec,
    pub group: GroupSpec,
    pub betas: Vec<f64>,
    pub root: usize,
    pub b1: Vec<PlaquetteRef>,
    pub b2: Vec<PlaquetteRef>,
    /// Plaquettes the homomorphism family may excite; empty means all.
    pub family: Vec<PlaquetteRef>,
    pub decay: DecaySpec,
    pub higgs: HiggsSpec,
    /// Enumeration cap on configurations or homomorphisms.
    pub cap: u64,
    /// Largest knot size enumerated by the size-floor check.
    pub knot_size: usize,
    pub seed: u64,
    pub fault: Option<Fault>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            lattice: LatticeSpec::default(),
            group: GroupSpec::default(),
            betas: vec![0.0, 0.3, 1.0],
            root: 0,
            b1: Vec::new(),
            b2: Vec::new(),
            family: Vec::new(),
            decay: DecaySpec::default(),
            higgs: HiggsSpec::default(),
            cap: 1 << 24,
            knot_size: 4,
            seed: 0,
            fault: None,
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        // An unreadable config is a configuration error, not a run failure.
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.check()?;
        Ok(cfg)
    }

    pub fn check(&self) -> Result<(), CliError> {
        if self.betas.is_empty() {
            return Err(CliError::Config("betas is empty".into()));
        }
        if let Some(b) = self.betas.iter().find(|b| b.is_nan() || **b < 0.0) {
            return Err(CliError::Config(format!("beta {b} is negative")));
        }
        let cx = self.complex()?;
        self.group_family()?;
        for p in self.b1.iter().chain(&self.b2).chain(&self.family).chain(&self.higgs.plaquettes) {
            resolve_plaquette(&cx, p)?;
        }
        for e in &self.higgs.edges {
            resolve_edge(&cx, e)?;
        }
        for v in &self.higgs.vertices {
            cx.vertex_at(v).map_err(|e| CliError::Config(format!("vertex {v:?}: {e}")))?;
        }
        if self.root >= cx.num_vertices() {
            return Err(CliError::Config(format!("root {} out of range", self.root)));
        }
        Ok(())
    }

    pub fn complex(&self) -> Result<Arc<CellComplex>, CliError> {
        let bx = LatticeBox::cube(self.lattice.dim, self.lattice.side).map_err(|e| CliError::Config(e.to_string()))?;
        Ok(Arc::new(CellComplex::new(bx).map_err(|e| CliError::Config(e.to_string()))?))
    }

    pub fn group_family(&self) -> Result<GroupFamily, CliError> {
        GroupFamily::parse(&self.group.name, &self.group.params).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn group(&self) -> Result<Arc<GaugeGroup<f64>>, CliError> {
        let g = GaugeGroup::builtin(&self.group_family()?).map_err(|e| CliError::Config(e.to_string()))?;
        Ok(Arc::new(g))
    }

    pub fn spec(&self, beta: f64) -> Result<GibbsSpec<f64>, CliError> {
        GibbsSpec::new(self.complex()?, self.group()?, beta).map_err(|e| CliError::Config(e.to_string()))
    }

    /// B₁ and B₂, defaulting to the first and last plaquettes.
    pub fn rectangles(&self, cx: &CellComplex) -> Result<(PlaquetteSet, PlaquetteSet), CliError> {
        let n = cx.num_plaquettes();
        let pick = |refs: &[PlaquetteRef], default: usize| -> Result<PlaquetteSet, CliError> {
            if refs.is_empty() {
                return Ok(PlaquetteSet::from_indices(n, [default]));
            }
            plaquette_set(cx, refs)
        };
        Ok((pick(&self.b1, 0)?, pick(&self.b2, n - 1)?))
    }
}

pub fn resolve_plaquette(cx: &CellComplex, p: &PlaquetteRef) -> Result<usize, CliError> {
    let v = cx.vertex_at(&p.at).map_err(|e| CliError::Config(format!("plaquette at {:?}: {e}", p.at)))?;
    cx.plaquette_index(v, p.axes[0], p.axes[1])
        .ok_or_else(|| CliError::Config(format!("no plaquette at {:?} spanning axes {:?}", p.at, p.axes)))
}

pub fn resolve_edge(cx: &CellComplex, e: &EdgeRef) -> Result<usize, CliError> {
    let v = cx.vertex_at(&e.at).map_err(|err| CliError::Config(format!("edge at {:?}: {err}", e.at)))?;
    cx.edge_index(v, e.axis).ok_or_else(|| CliError::Config(format!("no edge at {:?} along axis {}", e.at, e.axis)))
}

pub fn plaquette_set(cx: &CellComplex, refs: &[PlaquetteRef]) -> Result<PlaquetteSet, CliError> {
    let idx = refs.iter().map(|p| resolve_plaquette(cx, p)).collect::<Result<Vec<_>, _>>()?;
    Ok(PlaquetteSet::from_indices(cx.num_plaquettes(), idx))
}
