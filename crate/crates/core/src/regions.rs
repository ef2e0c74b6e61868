//! Security regions, admissible regions and grid-side flexibility regions.
//!
//! The security system for one topology lives over the non-reference bus
//! injections plus one variable per series FACTS device. The reference
//! injection is substituted out (`P_ref = -Σ P_k`) and its bounds kept as
//! rows. Projecting onto the uncertain injections gives one member of the
//! admissible region; switching and candidate lines contribute one member per
//! connected topology.

use std::collections::BTreeSet;

use rayon::prelude::*;
use thiserror::Error;

use crate::network::BusId;
use crate::network::{
    dc_sensitivity, validate_network, FlowMap, InjectionBounds, InjectionClassification, LineId, Network, NetworkError,
    TopologyState, Violation,
};
use crate::polytope::{contains_polytope, project, HPolytope, PolytopeError, RegionDifference, RegionUnion};
use crate::scalar::Scalar;

/// Upper limit on discrete (switchable + candidate) lines enumerated.
pub const MAX_DISCRETE: usize = 20;

#[derive(Debug, Clone, PartialEq)]
pub enum FlexResource<S> {
    ControllableInjection { bus: BusId, p_min: Option<S>, p_max: Option<S> },
    SeriesFacts { host_line: LineId, capacity: S },
    SwitchableLine { line: LineId },
    CandidateLine { line: LineId },
}

impl<S: Scalar> FlexResource<S> {
    /// Stable identifier used to select resources for freezing.
    pub fn key(&self) -> String {
        match self {
            FlexResource::ControllableInjection { bus, .. } => format!("injection:{bus}"),
            FlexResource::SeriesFacts { host_line, .. } => format!("facts:{host_line}"),
            FlexResource::SwitchableLine { line } => format!("switch:{line}"),
            FlexResource::CandidateLine { line } => format!("candidate:{line}"),
        }
    }

    pub fn is_grid_side(&self) -> bool {
        !matches!(self, FlexResource::ControllableInjection { .. })
    }

    fn discrete_line(&self) -> Option<&LineId> {
        match self {
            FlexResource::SwitchableLine { line } | FlexResource::CandidateLine { line } => Some(line),
            _ => None,
        }
    }
}

/// Variable name of the FACTS device hosted on `line`.
pub fn device_label(line: &LineId) -> String {
    format!("u_{line}")
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RegionError {
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error(transparent)]
    Polytope(#[from] PolytopeError),
    #[error("invalid network or classification: {}", join_violations(.0))]
    Invalid(Vec<Violation>),
    #[error("resource {0}: {1}")]
    Resource(String, String),
    #[error("{0} discrete lines exceed the enumeration limit of {MAX_DISCRETE}")]
    TooManyDiscrete(usize),
    #[error("frozen resource {0} is not declared")]
    UnknownFrozen(String),
    #[error("no topology admits a feasible operating point")]
    Infeasible,
}

fn join_violations(v: &[Violation]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

/// Security system of one topology.
#[derive(Debug, Clone, PartialEq)]
pub struct EssrSystem<S> {
    pub polytope: HPolytope<S>,
    pub topology: TopologyState,
    pub controllable: Vec<String>,
    pub uncertain: Vec<String>,
    pub devices: Vec<String>,
}

/// Union of projected members, with the topology that produced each.
#[derive(Debug, Clone, PartialEq)]
pub struct AdmissibleRegion<S> {
    pub region: RegionUnion<S>,
    pub provenance: Vec<TopologyState>,
}

impl<S: Scalar> AdmissibleRegion<S> {
    pub fn labels(&self) -> &[String] {
        self.region.labels()
    }

    pub fn contains(&self, point: &[S]) -> bool {
        self.region.contains(point)
    }

    /// For a projection onto no variables: whether the system is feasible.
    pub fn feasibility_verdict(&self) -> Option<bool> {
        self.labels().is_empty().then(|| !self.region.is_empty())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridFlexibilityRegion<S> {
    pub difference: RegionDifference<S>,
    pub active: AdmissibleRegion<S>,
    pub frozen: AdmissibleRegion<S>,
}

impl<S: Scalar> GridFlexibilityRegion<S> {
    pub fn contains(&self, point: &[S]) -> bool {
        self.difference.contains(point)
    }

    /// Sufficient LP certificate that the frozen region lies inside the
    /// active one (each frozen member inside some active member).
    pub fn frozen_within_active(&self) -> Result<bool, RegionError> {
        Ok(self.active.region.covers_memberwise(&self.frozen.region)?)
    }
}

fn check_inputs<S: Scalar>(
    network: &Network<S>,
    classification: &InjectionClassification<S>,
    resources: &[FlexResource<S>],
) -> Result<(), RegionError> {
    let report = validate_network(network, Some(classification));
    if !report.is_empty() {
        return Err(RegionError::Invalid(report));
    }
    let mut keys = BTreeSet::new();
    for r in resources {
        let key = r.key();
        if !keys.insert(key.clone()) {
            return Err(RegionError::Resource(key, "declared twice".into()));
        }
        let line_of = |id: &LineId| {
            network.line_index(id).ok_or_else(|| RegionError::Resource(key.clone(), format!("unknown line {id}")))
        };
        match r {
            FlexResource::ControllableInjection { bus, p_min, p_max } => {
                if network.bus_index(bus).is_none() {
                    return Err(RegionError::Resource(key, format!("unknown bus {bus}")));
                }
                if classification.uncertain.contains(bus) {
                    return Err(RegionError::Resource(key, "bus is classified uncertain".into()));
                }
                if let (Some(lo), Some(hi)) = (p_min, p_max) {
                    if lo > hi {
                        return Err(RegionError::Resource(key, "p_min > p_max".into()));
                    }
                }
            }
            FlexResource::SeriesFacts { host_line, capacity } => {
                line_of(host_line)?;
                if capacity.is_negative() {
                    return Err(RegionError::Resource(key, "capacity must be >= 0".into()));
                }
            }
            FlexResource::SwitchableLine { line } => {
                if !network.lines[line_of(line)?].switchable {
                    return Err(RegionError::Resource(key, "line is not switchable".into()));
                }
            }
            FlexResource::CandidateLine { line } => {
                if !network.lines[line_of(line)?].candidate {
                    return Err(RegionError::Resource(key, "line is not a candidate".into()));
                }
            }
        }
    }
    Ok(())
}

/// Flow-row coefficients of a series device on `host` (one entry per
/// in-service line, in `map` row order).
///
/// The device is a pair of injections, `+u` at the host's from-bus and `-u`
/// at its to-bus, so every row picks up `S·e_pair`; the host row additionally
/// carries `-u` for the flow routed through the device itself.
fn facts_columns_with<S: Scalar>(
    network: &Network<S>,
    map: &FlowMap<S>,
    host: &LineId,
) -> Result<Vec<S>, NetworkError> {
    let k = network.line_index(host).ok_or_else(|| NetworkError::UnknownLine(host.clone()))?;
    let row = map.row_of_line(k).ok_or_else(|| NetworkError::LineOutOfService(host.clone()))?;
    let line = &network.lines[k];
    let from = network.bus_index(&line.from_bus).ok_or_else(|| NetworkError::UnknownBus(line.from_bus.clone()))?;
    let to = network.bus_index(&line.to_bus).ok_or_else(|| NetworkError::UnknownBus(line.to_bus.clone()))?;
    let mut col: Vec<S> =
        map.injection_column(from).into_iter().zip(map.injection_column(to)).map(|(a, b)| a - b).collect();
    col[row] = col[row].clone() - S::one();
    Ok(col)
}

/// Line-flow coefficients of a series device on `host_line` under `state`.
pub fn facts_columns<S: Scalar>(
    network: &Network<S>,
    state: &TopologyState,
    host_line: &LineId,
) -> Result<Vec<S>, NetworkError> {
    let map = dc_sensitivity(network, state)?;
    facts_columns_with(network, &map, host_line)
}

/// Security system for one topology.
pub fn build_essr<S: Scalar>(
    network: &Network<S>,
    classification: &InjectionClassification<S>,
    resources: &[FlexResource<S>],
    state: &TopologyState,
) -> Result<EssrSystem<S>, RegionError> {
    check_inputs(network, classification, resources)?;
    let map = dc_sensitivity(network, state)?;
    let reference = network.reference_index()?;
    let injection_buses = map.buses.clone();

    let mut bounds: Vec<InjectionBounds<S>> = network.buses.iter().map(|b| classification.bounds_of(&b.id)).collect();
    for r in resources {
        if let FlexResource::ControllableInjection { bus, p_min, p_max } = r {
            let i = network.bus_index(bus).expect("checked");
            bounds[i] = InjectionBounds { p_min: p_min.clone(), p_max: p_max.clone() };
        }
    }

    let devices: Vec<(&LineId, &S)> = resources
        .iter()
        .filter_map(|r| match r {
            FlexResource::SeriesFacts { host_line, capacity } => Some((host_line, capacity)),
            _ => None,
        })
        .collect();
    let device_cols: Vec<Vec<S>> =
        devices.iter().map(|(host, _)| facts_columns_with(network, &map, host)).collect::<Result<_, _>>()?;

    let mut labels: Vec<String> = injection_buses.iter().map(|&i| network.buses[i].label.clone()).collect();
    labels.extend(devices.iter().map(|(host, _)| device_label(host)));
    let n_inj = injection_buses.len();
    let n = labels.len();
    let mut poly = HPolytope::universe(labels)?;

    // Flow limits, one row pair per corridor.
    let line_rows: Vec<Vec<S>> = (0..map.lines.len())
        .map(|r| {
            let mut row = map.matrix[r].clone();
            row.extend(device_cols.iter().map(|c| c[r].clone()));
            row
        })
        .collect();
    for corridor in network.corridors(state)? {
        let mut coeffs = vec![S::zero(); n];
        let mut lo = Some(S::zero());
        let mut hi = Some(S::zero());
        for &(k, aligned) in &corridor {
            let line = &network.lines[k];
            let r = map.row_of_line(k).expect("in service");
            let (line_lo, line_hi) = if aligned {
                (line.flow_min.clone(), line.flow_max.clone())
            } else {
                (line.flow_max.clone().map(|v| -v), line.flow_min.clone().map(|v| -v))
            };
            for (c, v) in coeffs.iter_mut().zip(&line_rows[r]) {
                *c = if aligned { c.clone() + v.clone() } else { c.clone() - v.clone() };
            }
            lo = lo.zip(line_lo).map(|(a, b)| a + b);
            hi = hi.zip(line_hi).map(|(a, b)| a + b);
        }
        poly.push_range(coeffs, lo, hi)?;
    }

    // Injection bounds of the non-reference buses.
    for (j, &bus) in injection_buses.iter().enumerate() {
        let mut e = vec![S::zero(); n];
        e[j] = S::one();
        poly.push_range(e, bounds[bus].p_min.clone(), bounds[bus].p_max.clone())?;
    }
    // Reference injection P_ref = -Σ P_k.
    let mut minus_sum = vec![S::zero(); n];
    for c in minus_sum.iter_mut().take(n_inj) {
        *c = -S::one();
    }
    poly.push_range(minus_sum, bounds[reference].p_min.clone(), bounds[reference].p_max.clone())?;

    // Device capacities.
    for (d, (_, capacity)) in devices.iter().enumerate() {
        let mut e = vec![S::zero(); n];
        e[n_inj + d] = S::one();
        poly.push_range(e, Some(-(*capacity).clone()), Some((*capacity).clone()))?;
    }

    let label_of = |ids: &[BusId]| -> Vec<String> {
        network.buses.iter().filter(|b| ids.contains(&b.id)).map(|b| b.label.clone()).collect()
    };
    Ok(EssrSystem {
        polytope: poly,
        topology: state.clone(),
        controllable: label_of(&classification.controllable),
        uncertain: label_of(&classification.uncertain),
        devices: devices.iter().map(|(h, _)| device_label(h)).collect(),
    })
}

/// Every on/off combination of the discrete lines (sorted by id, on before
/// off), other lines at base state.
pub fn enumerate_topologies<S: Scalar>(
    network: &Network<S>,
    resources: &[FlexResource<S>],
    require_connected: bool,
) -> Result<Vec<TopologyState>, RegionError> {
    let mut discrete: Vec<&LineId> = resources.iter().filter_map(FlexResource::discrete_line).collect();
    discrete.sort();
    discrete.dedup();
    if discrete.len() > MAX_DISCRETE {
        return Err(RegionError::TooManyDiscrete(discrete.len()));
    }
    let indices: Vec<usize> = discrete
        .iter()
        .map(|id| network.line_index(id).ok_or_else(|| NetworkError::UnknownLine((*id).clone())))
        .collect::<Result<_, _>>()?;
    let k = indices.len();
    let base = network.base_state();
    let mut out = Vec::with_capacity(1 << k);
    for combo in 0u32..(1u32 << k) {
        let mut state = base.clone();
        for (i, &line) in indices.iter().enumerate() {
            state.0[line] = combo & (1 << (k - 1 - i)) == 0;
        }
        if !require_connected || network.is_connected(&state)? {
            out.push(state);
        }
    }
    Ok(out)
}

/// Admissible region projected onto `keep` (uncertain labels by default).
pub fn admissible_region_onto<S: Scalar>(
    network: &Network<S>,
    classification: &InjectionClassification<S>,
    resources: &[FlexResource<S>],
    keep: &[String],
) -> Result<AdmissibleRegion<S>, RegionError> {
    check_inputs(network, classification, resources)?;
    let states = enumerate_topologies(network, resources, true)?;
    let projected: Vec<Result<Option<HPolytope<S>>, RegionError>> = states
        .par_iter()
        .map(|state| {
            let essr = build_essr(network, classification, resources, state)?;
            match project(&essr.polytope, keep) {
                Ok(p) => Ok(Some(p)),
                Err(PolytopeError::Empty) => {
                    log::info!("topology {state} admits no operating point");
                    Ok(None)
                }
                Err(e) => Err(e.into()),
            }
        })
        .collect();
    let mut members = Vec::new();
    let mut provenance = Vec::new();
    for (state, result) in states.into_iter().zip(projected) {
        if let Some(p) = result? {
            members.push(p);
            provenance.push(state);
        }
    }
    if members.is_empty() && !keep.is_empty() {
        return Err(RegionError::Infeasible);
    }
    Ok(AdmissibleRegion { region: RegionUnion::new(keep.to_vec(), members)?, provenance })
}

pub fn admissible_region<S: Scalar>(
    network: &Network<S>,
    classification: &InjectionClassification<S>,
    resources: &[FlexResource<S>],
) -> Result<AdmissibleRegion<S>, RegionError> {
    let keep: Vec<String> =
        network.buses.iter().filter(|b| classification.uncertain.contains(&b.id)).map(|b| b.label.clone()).collect();
    admissible_region_onto(network, classification, resources, &keep)
}

/// Resource list with the selected resources at their base values: FACTS
/// pinned to zero, switchable lines at base status, candidates out,
/// controllable-injection overrides dropped.
pub fn freeze<S: Scalar>(
    resources: &[FlexResource<S>],
    frozen: &[String],
) -> Result<Vec<FlexResource<S>>, RegionError> {
    let keys: Vec<String> = resources.iter().map(FlexResource::key).collect();
    if let Some(missing) = frozen.iter().find(|f| !keys.contains(f)) {
        return Err(RegionError::UnknownFrozen(missing.clone()));
    }
    Ok(resources
        .iter()
        .filter_map(|r| {
            if !frozen.contains(&r.key()) {
                return Some(r.clone());
            }
            match r {
                FlexResource::SeriesFacts { host_line, .. } => {
                    Some(FlexResource::SeriesFacts { host_line: host_line.clone(), capacity: S::zero() })
                }
                _ => None,
            }
        })
        .collect())
}

/// Keys of every grid-side resource.
pub fn grid_side_keys<S: Scalar>(resources: &[FlexResource<S>]) -> Vec<String> {
    resources.iter().filter(|r| r.is_grid_side()).map(FlexResource::key).collect()
}

pub fn grid_flexibility_region<S: Scalar>(
    network: &Network<S>,
    classification: &InjectionClassification<S>,
    resources: &[FlexResource<S>],
    frozen: &[String],
) -> Result<GridFlexibilityRegion<S>, RegionError> {
    let active = admissible_region(network, classification, resources)?;
    let frozen_resources = freeze(resources, frozen)?;
    let base = admissible_region(network, classification, &frozen_resources)?;
    Ok(GridFlexibilityRegion {
        difference: RegionDifference::new(active.region.clone(), base.region.clone())?,
        active,
        frozen: base,
    })
}

/// Whether `poly` lies inside the admissible region member-wise.
pub fn member_contains<S: Scalar>(region: &AdmissibleRegion<S>, poly: &HPolytope<S>) -> Result<bool, RegionError> {
    for m in region.region.members() {
        if contains_polytope(m, poly)? {
            return Ok(true);
        }
    }
    Ok(false)
}
