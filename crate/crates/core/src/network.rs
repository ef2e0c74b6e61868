//! DC network model and injection-to-flow sensitivities.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BusId(pub String);

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LineId(pub String);

impl fmt::Display for BusId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Display for LineId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for BusId {
    fn from(s: &str) -> Self {
        BusId(s.to_string())
    }
}

impl From<&str> for LineId {
    fn from(s: &str) -> Self {
        LineId(s.to_string())
    }
}

/// A bus; `label` doubles as the name of its injection variable.
#[derive(Debug, Clone, PartialEq)]
pub struct Bus {
    pub id: BusId,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Line<S> {
    pub id: LineId,
    pub from_bus: BusId,
    pub to_bus: BusId,
    pub susceptance: S,
    /// `None` is an unbounded side.
    pub flow_min: Option<S>,
    pub flow_max: Option<S>,
    pub in_service: bool,
    pub switchable: bool,
    pub candidate: bool,
}

impl<S: Scalar> Line<S> {
    /// Line with symmetric limits `[-limit, limit]`, in service, not switchable.
    pub fn new(id: &str, from: &str, to: &str, susceptance: S, limit: S) -> Self {
        Line {
            id: id.into(),
            from_bus: from.into(),
            to_bus: to.into(),
            susceptance,
            flow_min: Some(-limit.clone()),
            flow_max: Some(limit),
            in_service: true,
            switchable: false,
            candidate: false,
        }
    }

    pub fn switchable(mut self) -> Self {
        self.switchable = true;
        self
    }

    pub fn candidate(mut self) -> Self {
        self.candidate = true;
        self.in_service = false;
        self
    }
}

/// Buses, lines and the reference bus. `reference_buses` must hold exactly
/// one entry for the network to be usable; it is a list only so that files
/// declaring several can be loaded and reported on.
#[derive(Debug, Clone, PartialEq)]
pub struct Network<S> {
    pub buses: Vec<Bus>,
    pub reference_buses: Vec<BusId>,
    pub lines: Vec<Line<S>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InjectionBounds<S> {
    pub p_min: Option<S>,
    pub p_max: Option<S>,
}

impl<S> InjectionBounds<S> {
    pub fn unbounded() -> Self {
        InjectionBounds { p_min: None, p_max: None }
    }
}

/// Split of the non-reference buses into controllable and uncertain
/// injections, plus per-bus bounds (the reference bus included).
#[derive(Debug, Clone, PartialEq)]
pub struct InjectionClassification<S> {
    pub controllable: Vec<BusId>,
    pub uncertain: Vec<BusId>,
    pub bounds: BTreeMap<BusId, InjectionBounds<S>>,
}

impl<S: Scalar> InjectionClassification<S> {
    pub fn bounds_of(&self, bus: &BusId) -> InjectionBounds<S> {
        self.bounds.get(bus).cloned().unwrap_or_else(InjectionBounds::unbounded)
    }
}

/// Per-line in-service vector, indexed like `Network::lines`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TopologyState(pub Vec<bool>);

impl TopologyState {
    pub fn is_on(&self, line: usize) -> bool {
        self.0[line]
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for TopologyState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<&str> = self.0.iter().map(|&on| if on { "on" } else { "off" }).collect();
        write!(f, "({})", parts.join(","))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    ReferenceBusCount(usize),
    UnknownReferenceBus(BusId),
    DuplicateBus(BusId),
    DuplicateLabel(String),
    DuplicateLine(LineId),
    UnknownBus { line: LineId, bus: BusId },
    SelfLoop(LineId),
    NonPositiveSusceptance(LineId),
    InvertedFlowLimits(LineId),
    CandidateInService(LineId),
    Disconnected(Vec<Vec<BusId>>),
    ClassificationOverlap(BusId),
    ClassificationMissing(BusId),
    ClassificationUnknown(BusId),
    ClassifiedReference(BusId),
    InvertedInjectionBounds(BusId),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::ReferenceBusCount(n) => write!(f, "exactly one reference bus required, found {n}"),
            Violation::UnknownReferenceBus(b) => write!(f, "reference bus {b} is not a bus"),
            Violation::DuplicateBus(b) => write!(f, "duplicate bus id {b}"),
            Violation::DuplicateLabel(l) => write!(f, "duplicate bus label {l}"),
            Violation::DuplicateLine(l) => write!(f, "duplicate line id {l}"),
            Violation::UnknownBus { line, bus } => write!(f, "line {line} references unknown bus {bus}"),
            Violation::SelfLoop(l) => write!(f, "line {l} has from_bus == to_bus"),
            Violation::NonPositiveSusceptance(l) => write!(f, "line {l} susceptance must be positive"),
            Violation::InvertedFlowLimits(l) => write!(f, "line {l} has flow_min > flow_max"),
            Violation::CandidateInService(l) => write!(f, "candidate line {l} must start out of service"),
            Violation::Disconnected(islands) => write!(f, "base topology disconnected: {}", format_islands(islands)),
            Violation::ClassificationOverlap(b) => write!(f, "bus {b} is both controllable and uncertain"),
            Violation::ClassificationMissing(b) => write!(f, "bus {b} is neither controllable nor uncertain"),
            Violation::ClassificationUnknown(b) => write!(f, "classification names unknown bus {b}"),
            Violation::ClassifiedReference(b) => write!(f, "reference bus {b} cannot be classified"),
            Violation::InvertedInjectionBounds(b) => write!(f, "bus {b} has p_min > p_max"),
        }
    }
}

pub fn format_islands(islands: &[Vec<BusId>]) -> String {
    islands
        .iter()
        .map(|island| {
            let ids: Vec<&str> = island.iter().map(|b| b.0.as_str()).collect();
            format!("{{{}}}", ids.join(","))
        })
        .collect::<Vec<_>>()
        .join(" ")
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NetworkError {
    #[error("topology disconnected into islands {}", format_islands(.0))]
    Disconnected(Vec<Vec<BusId>>),
    #[error("network has {0} reference buses, expected exactly one")]
    ReferenceBus(usize),
    #[error("unknown bus {0}")]
    UnknownBus(BusId),
    #[error("unknown line {0}")]
    UnknownLine(LineId),
    #[error("line {0} is neither switchable nor a candidate")]
    NotSwitchable(LineId),
    #[error("topology state has {got} entries for {expected} lines")]
    StateLength { expected: usize, got: usize },
    #[error("line {0} is out of service in this topology")]
    LineOutOfService(LineId),
    #[error("susceptance matrix is singular")]
    Singular,
}

impl<S: Scalar> Network<S> {
    pub fn new(buses: Vec<Bus>, reference: &str, lines: Vec<Line<S>>) -> Self {
        Network { buses, reference_buses: vec![reference.into()], lines }
    }

    pub fn bus_index(&self, id: &BusId) -> Option<usize> {
        self.buses.iter().position(|b| &b.id == id)
    }

    pub fn line_index(&self, id: &LineId) -> Option<usize> {
        self.lines.iter().position(|l| &l.id == id)
    }

    pub fn reference_index(&self) -> Result<usize, NetworkError> {
        match self.reference_buses.as_slice() {
            [only] => self.bus_index(only).ok_or_else(|| NetworkError::UnknownBus(only.clone())),
            other => Err(NetworkError::ReferenceBus(other.len())),
        }
    }

    /// Indices of the non-reference buses in declaration order.
    pub fn non_reference_buses(&self) -> Result<Vec<usize>, NetworkError> {
        let r = self.reference_index()?;
        Ok((0..self.buses.len()).filter(|&i| i != r).collect())
    }

    /// All non-candidate lines at their declared status, candidates out.
    pub fn base_state(&self) -> TopologyState {
        TopologyState(self.lines.iter().map(|l| l.in_service && !l.candidate).collect())
    }

    fn endpoints(&self, line: &Line<S>) -> Result<(usize, usize), NetworkError> {
        let from = self.bus_index(&line.from_bus).ok_or_else(|| NetworkError::UnknownBus(line.from_bus.clone()))?;
        let to = self.bus_index(&line.to_bus).ok_or_else(|| NetworkError::UnknownBus(line.to_bus.clone()))?;
        Ok((from, to))
    }

    fn check_state(&self, state: &TopologyState) -> Result<(), NetworkError> {
        if state.len() != self.lines.len() {
            return Err(NetworkError::StateLength { expected: self.lines.len(), got: state.len() });
        }
        Ok(())
    }

    /// Connected components over in-service lines, each sorted by bus order;
    /// a single entry means the topology is connected.
    pub fn islands(&self, state: &TopologyState) -> Result<Vec<Vec<BusId>>, NetworkError> {
        self.check_state(state)?;
        let n = self.buses.len();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for (k, line) in self.lines.iter().enumerate() {
            if !state.is_on(k) {
                continue;
            }
            let (a, b) = self.endpoints(line)?;
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            if ra != rb {
                parent[ra.max(rb)] = ra.min(rb);
            }
        }
        let mut groups: BTreeMap<usize, Vec<BusId>> = BTreeMap::new();
        for i in 0..n {
            let root = find(&mut parent, i);
            groups.entry(root).or_default().push(self.buses[i].id.clone());
        }
        Ok(groups.into_values().collect())
    }

    pub fn is_connected(&self, state: &TopologyState) -> Result<bool, NetworkError> {
        Ok(self.islands(state)?.len() <= 1)
    }

    /// In-service lines grouped by unordered endpoint pair, in order of first
    /// appearance. Each member carries `true` when oriented like the first.
    pub fn corridors(&self, state: &TopologyState) -> Result<Vec<Vec<(usize, bool)>>, NetworkError> {
        self.check_state(state)?;
        let mut keyed: Vec<((usize, usize), Vec<(usize, bool)>)> = Vec::new();
        for (k, line) in self.lines.iter().enumerate() {
            if !state.is_on(k) {
                continue;
            }
            let (a, b) = self.endpoints(line)?;
            let key = (a.min(b), a.max(b));
            match keyed.iter_mut().find(|(kk, _)| *kk == key) {
                Some((_, members)) => {
                    let (first_from, _) = self.endpoints(&self.lines[members[0].0])?;
                    members.push((k, first_from == a));
                }
                None => keyed.push((key, vec![(k, true)])),
            }
        }
        Ok(keyed.into_iter().map(|(_, m)| m).collect())
    }
}

/// Every violated invariant of `network` (and of `classification`, when
/// given). An empty report means the network is usable.
pub fn validate_network<S: Scalar>(
    network: &Network<S>,
    classification: Option<&InjectionClassification<S>>,
) -> Vec<Violation> {
    let mut report = Vec::new();
    let mut seen = BTreeSet::new();
    let mut labels = BTreeSet::new();
    for bus in &network.buses {
        if !seen.insert(bus.id.clone()) {
            report.push(Violation::DuplicateBus(bus.id.clone()));
        }
        if !labels.insert(bus.label.clone()) {
            report.push(Violation::DuplicateLabel(bus.label.clone()));
        }
    }
    if network.reference_buses.len() != 1 {
        report.push(Violation::ReferenceBusCount(network.reference_buses.len()));
    }
    for r in &network.reference_buses {
        if network.bus_index(r).is_none() {
            report.push(Violation::UnknownReferenceBus(r.clone()));
        }
    }
    let mut line_ids = BTreeSet::new();
    let mut endpoints_ok = true;
    for line in &network.lines {
        if !line_ids.insert(line.id.clone()) {
            report.push(Violation::DuplicateLine(line.id.clone()));
        }
        for bus in [&line.from_bus, &line.to_bus] {
            if network.bus_index(bus).is_none() {
                endpoints_ok = false;
                report.push(Violation::UnknownBus { line: line.id.clone(), bus: bus.clone() });
            }
        }
        if line.from_bus == line.to_bus {
            report.push(Violation::SelfLoop(line.id.clone()));
        }
        if !line.susceptance.is_positive() {
            report.push(Violation::NonPositiveSusceptance(line.id.clone()));
        }
        if let (Some(lo), Some(hi)) = (&line.flow_min, &line.flow_max) {
            if lo > hi {
                report.push(Violation::InvertedFlowLimits(line.id.clone()));
            }
        }
        if line.candidate && line.in_service {
            report.push(Violation::CandidateInService(line.id.clone()));
        }
    }
    if endpoints_ok && !network.buses.is_empty() {
        if let Ok(islands) = network.islands(&network.base_state()) {
            if islands.len() > 1 {
                report.push(Violation::Disconnected(islands));
            }
        }
    }
    if let Some(cls) = classification {
        report.extend(validate_classification(network, cls));
    }
    report
}

fn validate_classification<S: Scalar>(network: &Network<S>, cls: &InjectionClassification<S>) -> Vec<Violation> {
    let mut report = Vec::new();
    let controllable: BTreeSet<&BusId> = cls.controllable.iter().collect();
    let uncertain: BTreeSet<&BusId> = cls.uncertain.iter().collect();
    for bus in controllable.intersection(&uncertain) {
        report.push(Violation::ClassificationOverlap((*bus).clone()));
    }
    for bus in controllable.union(&uncertain).chain(cls.bounds.keys().collect::<Vec<_>>().iter()) {
        if network.bus_index(bus).is_none() {
            report.push(Violation::ClassificationUnknown((*bus).clone()));
        }
    }
    for bus in &network.buses {
        let is_ref = network.reference_buses.contains(&bus.id);
        let classified = controllable.contains(&bus.id) || uncertain.contains(&bus.id);
        if is_ref && classified {
            report.push(Violation::ClassifiedReference(bus.id.clone()));
        } else if !is_ref && !classified {
            report.push(Violation::ClassificationMissing(bus.id.clone()));
        }
    }
    for (bus, b) in &cls.bounds {
        if let (Some(lo), Some(hi)) = (&b.p_min, &b.p_max) {
            if lo > hi {
                report.push(Violation::InvertedInjectionBounds(bus.clone()));
            }
        }
    }
    report
}

/// Linear map from non-reference injections to in-service line flows.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowMap<S> {
    /// Row order: indices into `Network::lines`, in-service only.
    pub lines: Vec<usize>,
    /// Column order: indices into `Network::buses`, reference excluded.
    pub buses: Vec<usize>,
    pub matrix: Vec<Vec<S>>,
}

impl<S: Scalar> FlowMap<S> {
    pub fn row_of_line(&self, line: usize) -> Option<usize> {
        self.lines.iter().position(|&l| l == line)
    }

    pub fn column_of_bus(&self, bus: usize) -> Option<usize> {
        self.buses.iter().position(|&b| b == bus)
    }

    /// Flow response to a unit injection at `bus` withdrawn at the reference.
    pub fn injection_column(&self, bus: usize) -> Vec<S> {
        match self.column_of_bus(bus) {
            Some(c) => self.matrix.iter().map(|row| row[c].clone()).collect(),
            None => vec![S::zero(); self.lines.len()],
        }
    }

    pub fn flows(&self, injections: &[S]) -> Vec<S> {
        self.matrix
            .iter()
            .map(|row| row.iter().zip(injections).fold(S::zero(), |acc, (s, p)| acc + s.clone() * p.clone()))
            .collect()
    }
}

/// DC flow sensitivities for `state`; the reference bus absorbs imbalance.
pub fn dc_sensitivity<S: Scalar>(network: &Network<S>, state: &TopologyState) -> Result<FlowMap<S>, NetworkError> {
    let islands = network.islands(state)?;
    if islands.len() > 1 {
        return Err(NetworkError::Disconnected(islands));
    }
    let reference = network.reference_index()?;
    let columns = network.non_reference_buses()?;
    let n = columns.len();
    let slot = |bus: usize| columns.iter().position(|&b| b == bus);

    let mut b_matrix = vec![vec![S::zero(); n]; n];
    let mut active = Vec::new();
    for (k, line) in network.lines.iter().enumerate() {
        if !state.is_on(k) {
            continue;
        }
        active.push(k);
        let (a, b) = network.endpoints(line)?;
        let y = line.susceptance.clone();
        for (p, q) in [(a, b), (b, a)] {
            if let Some(i) = slot(p) {
                b_matrix[i][i] = b_matrix[i][i].clone() + y.clone();
                if let Some(j) = slot(q) {
                    b_matrix[i][j] = b_matrix[i][j].clone() - y.clone();
                }
            }
        }
    }
    let reactance = invert(b_matrix).ok_or(NetworkError::Singular)?;
    let angle_row = |bus: usize| -> Vec<S> {
        match slot(bus) {
            Some(i) => reactance[i].clone(),
            None => {
                debug_assert_eq!(bus, reference);
                vec![S::zero(); n]
            }
        }
    };
    let mut matrix = Vec::with_capacity(active.len());
    for &k in &active {
        let line = &network.lines[k];
        let (a, b) = network.endpoints(line)?;
        let (ra, rb) = (angle_row(a), angle_row(b));
        matrix.push(ra.into_iter().zip(rb).map(|(x, y)| line.susceptance.clone() * (x - y)).collect());
    }
    Ok(FlowMap { lines: active, buses: columns, matrix })
}

/// Gauss-Jordan inverse; `None` when singular.
pub(crate) fn invert<S: Scalar>(mut m: Vec<Vec<S>>) -> Option<Vec<Vec<S>>> {
    let n = m.len();
    let mut inv: Vec<Vec<S>> =
        (0..n).map(|i| (0..n).map(|j| if i == j { S::one() } else { S::zero() }).collect()).collect();
    for col in 0..n {
        let pivot = if S::EXACT {
            (col..n).find(|&r| !m[r][col].is_zero())?
        } else {
            let best = (col..n)
                .max_by(|&a, &b| m[a][col].abs().partial_cmp(&m[b][col].abs()).unwrap_or(std::cmp::Ordering::Equal))?;
            if m[best][col].near_zero() {
                return None;
            }
            best
        };
        m.swap(col, pivot);
        inv.swap(col, pivot);
        let p = m[col][col].clone();
        for j in 0..n {
            m[col][j] = m[col][j].clone() / p.clone();
            inv[col][j] = inv[col][j].clone() / p.clone();
        }
        for r in 0..n {
            if r == col || m[r][col].is_zero() {
                continue;
            }
            let f = m[r][col].clone();
            for j in 0..n {
                m[r][j] = m[r][j].clone() - f.clone() * m[col][j].clone();
                inv[r][j] = inv[r][j].clone() - f.clone() * inv[col][j].clone();
            }
        }
    }
    Some(inv)
}

/// Base state with the listed lines set on/off. Only switchable or
/// candidate lines may change.
pub fn apply_topology<S: Scalar>(
    network: &Network<S>,
    changes: &[(LineId, bool)],
) -> Result<TopologyState, NetworkError> {
    let mut state = network.base_state();
    for (id, on) in changes {
        let k = network.line_index(id).ok_or_else(|| NetworkError::UnknownLine(id.clone()))?;
        let line = &network.lines[k];
        if !line.switchable && !line.candidate {
            return Err(NetworkError::NotSwitchable(id.clone()));
        }
        state.0[k] = *on;
    }
    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;

    fn q(n: i64, d: i64) -> Rational {
        Rational::ratio(n, d)
    }

    fn buses(n: usize) -> Vec<Bus> {
        (1..=n).map(|i| Bus { id: BusId(i.to_string()), label: format!("P{i}") }).collect()
    }

    fn three_bus() -> Network<Rational> {
        Network::new(
            buses(3),
            "3",
            vec![
                Line::new("L12", "1", "2", q(1, 1), q(2, 1)),
                Line::new("L23", "2", "3", q(1, 1), q(2, 1)),
                Line::new("L13", "1", "3", q(1, 1), q(1, 1)).switchable(),
            ],
        )
    }

    #[test]
    fn three_bus_is_valid() {
        assert!(validate_network(&three_bus(), None).is_empty());
    }

    #[test]
    fn reference_count_is_reported() {
        let mut net = three_bus();
        net.reference_buses.push("1".into());
        let report = validate_network(&net, None);
        assert_eq!(report, vec![Violation::ReferenceBusCount(2)]);
        assert!(report[0].to_string().contains("exactly one reference bus"));
    }

    #[test]
    fn candidate_only_path_disconnects_base() {
        let net = Network::new(
            buses(3),
            "3",
            vec![
                Line::new("L12", "1", "2", q(1, 1), q(2, 1)),
                Line::new("L23", "2", "3", q(1, 1), q(2, 1)).candidate(),
            ],
        );
        let report = validate_network(&net, None);
        assert_eq!(report, vec![Violation::Disconnected(vec![vec!["1".into(), "2".into()], vec!["3".into()]])]);
    }

    #[test]
    fn structural_violations() {
        let mut bad = Line::new("L11", "1", "1", q(0, 1), q(1, 1));
        bad.flow_min = Some(q(2, 1));
        bad.in_service = true;
        bad.candidate = true;
        let net = Network::new(buses(2), "2", vec![Line::new("L12", "1", "2", q(1, 1), q(1, 1)), bad]);
        let report = validate_network(&net, None);
        assert!(report.contains(&Violation::SelfLoop("L11".into())));
        assert!(report.contains(&Violation::NonPositiveSusceptance("L11".into())));
        assert!(report.contains(&Violation::InvertedFlowLimits("L11".into())));
        assert!(report.contains(&Violation::CandidateInService("L11".into())));
    }

    #[test]
    fn classification_checks() {
        let net = three_bus();
        let mut bounds = BTreeMap::new();
        bounds.insert("1".into(), InjectionBounds { p_min: Some(q(1, 1)), p_max: Some(q(0, 1)) });
        let cls =
            InjectionClassification { controllable: vec!["1".into(), "3".into()], uncertain: vec!["1".into()], bounds };
        let report = validate_network(&net, Some(&cls));
        assert!(report.contains(&Violation::ClassificationOverlap("1".into())));
        assert!(report.contains(&Violation::ClassifiedReference("3".into())));
        assert!(report.contains(&Violation::ClassificationMissing("2".into())));
        assert!(report.contains(&Violation::InvertedInjectionBounds("1".into())));
    }

    #[test]
    fn three_bus_sensitivity_matches_thirds() {
        let net = three_bus();
        let map = dc_sensitivity(&net, &net.base_state()).unwrap();
        let expected = vec![vec![q(1, 3), q(-1, 3)], vec![q(1, 3), q(2, 3)], vec![q(2, 3), q(1, 3)]];
        assert_eq!(map.matrix, expected);
        assert_eq!(map.lines, vec![0, 1, 2]);
        assert_eq!(map.buses, vec![0, 1]);
    }

    #[test]
    fn single_line_identity() {
        let net = Network::new(buses(2), "2", vec![Line::new("L12", "1", "2", q(1, 1), q(1, 1))]);
        let map = dc_sensitivity(&net, &net.base_state()).unwrap();
        assert_eq!(map.matrix, vec![vec![q(1, 1)]]);
    }

    #[test]
    fn radial_after_switching_off_line_13() {
        let net = three_bus();
        let state = apply_topology(&net, &[("L13".into(), false)]).unwrap();
        assert_eq!(state, TopologyState(vec![true, true, false]));
        let map = dc_sensitivity(&net, &state).unwrap();
        // f12 = P1, f23 = P1 + P2
        assert_eq!(map.matrix, vec![vec![q(1, 1), q(0, 1)], vec![q(1, 1), q(1, 1)]]);
        assert_eq!(map.lines, vec![0, 1]);
    }

    #[test]
    fn doubled_corridor_sensitivities_sum() {
        let mut net = three_bus();
        net.lines.push(Line::new("L13b", "1", "3", q(1, 1), q(1, 1)).candidate());
        let state = apply_topology(&net, &[("L13b".into(), true)]).unwrap();
        let map = dc_sensitivity(&net, &state).unwrap();
        let corridor: Vec<Rational> = (0..2).map(|c| map.matrix[2][c].clone() + map.matrix[3][c].clone()).collect();
        assert_eq!(corridor, vec![q(4, 5), q(2, 5)]);
        assert_eq!(map.matrix[0], vec![q(1, 5), q(-2, 5)]);
        assert_eq!(map.matrix[1], vec![q(1, 5), q(3, 5)]);
        let corridors = net.corridors(&state).unwrap();
        assert_eq!(corridors, vec![vec![(0, true)], vec![(1, true)], vec![(2, true), (3, true)]]);
    }

    #[test]
    fn apply_topology_rules() {
        let net = three_bus();
        assert_eq!(apply_topology(&net, &[]).unwrap(), net.base_state());
        assert_eq!(apply_topology(&net, &[("L12".into(), false)]), Err(NetworkError::NotSwitchable("L12".into())));
        assert_eq!(apply_topology(&net, &[("nope".into(), false)]), Err(NetworkError::UnknownLine("nope".into())));
    }

    #[test]
    fn disconnected_topology_names_islands() {
        let net = three_bus();
        let err = dc_sensitivity(&net, &TopologyState(vec![false, true, false])).unwrap_err();
        assert_eq!(err, NetworkError::Disconnected(vec![vec!["1".into()], vec!["2".into(), "3".into()]]));
        assert_eq!(err.to_string(), "topology disconnected into islands {1} {2,3}");
    }

    #[test]
    fn antiparallel_corridor_orientation() {
        let mut net = three_bus();
        net.lines.push(Line::new("L31", "3", "1", q(1, 1), q(1, 1)));
        let corridors = net.corridors(&net.base_state()).unwrap();
        assert_eq!(corridors[2], vec![(2, true), (3, false)]);
    }
}
