//! Flexibility regions of DC power networks.
//!
//! Regions are H-polytopes (`A·x <= b`) over labeled injection variables.
//! The extended security region of a network is assembled from DC flow
//! sensitivities, projected onto the uncertain injections by Fourier-Motzkin
//! elimination, and unioned over switching topologies. Grid-side flexibility
//! is the set difference between the region with and without grid-side
//! resources. A set of flexibility metrics rounds out the toolkit.

pub mod io;
pub mod lp;
pub mod metrics;
pub mod network;
pub mod polytope;
pub mod regions;
pub mod scalar;

pub use lp::{lp_solve, LinearProgram, LpError, LpOutcome, LpStatus};
pub use metrics::{
    active_flexibility_set, generator_flex, irre, lorp, pfd, tef, weighted_distribution_factor, ContingencyModel,
    FlexDistribution, FlexSetSpec, GeneratorSpec, MetricError, MetricReport, NetLoadModel,
};
pub use network::{
    apply_topology, dc_sensitivity, validate_network, Bus, BusId, FlowMap, InjectionBounds, InjectionClassification,
    Line, LineId, Network, NetworkError, TopologyState, Violation,
};
pub use polytope::{
    area_2d, contains_polytope, difference_contains, mc_measure, minimal_representation, project, region_equal,
    vertices_2d, HPolytope, PolytopeError, RegionDifference, RegionUnion,
};
pub use regions::{
    admissible_region, build_essr, enumerate_topologies, facts_columns, grid_flexibility_region, AdmissibleRegion,
    EssrSystem, FlexResource, GridFlexibilityRegion, RegionError,
};
pub use scalar::{Rational, Scalar};
