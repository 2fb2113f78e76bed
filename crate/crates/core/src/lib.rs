//! Finite lattice gauge theories: groups, cell complexes, Gibbs measures,
//! holonomy homomorphisms, vortex/knot decompositions, the swap map and
//! Higgs couplings.

pub mod bounds;
pub mod cellset;
pub mod gibbs;
pub mod group;
pub mod higgs;
pub mod homomorphism;
pub mod lattice;
pub mod scalar;
pub mod stream;
pub mod swap;
pub mod topo;

pub use cellset::{CellSet, PlaquetteSet};
pub use gibbs::{estimate_cov, CovEstimate, CovSample, EdgeConfig, ExactDistribution, GibbsError, GibbsSpec, HeatBath};
pub use group::{Element, GaugeGroup, GroupError, GroupFamily, GroupTable, UnitaryRep};
pub use homomorphism::{GeneratorWord, HomError, Homomorphism, Letter, Presentation};
pub use lattice::{CellComplex, DirEdge, LatticeBox, LatticeError, Loop, SpanningTree};
pub use scalar::{compensated_sum, Real};

/// Double-precision aliases.
pub type Gauge = GaugeGroup<f64>;
pub type Rep = UnitaryRep<f64>;
pub type Gibbs = GibbsSpec<f64>;
