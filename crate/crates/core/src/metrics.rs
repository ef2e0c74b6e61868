//! Flexibility metrics: generator flexibility, ramp adequacy (LORP, IRRE,
//! PFD), the active flexibility set, transmission expansion flexibility and
//! the weighted distribution-factor index.

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::lp::{lp_solve, LinearProgram, LpError, LpOutcome};
use crate::network::{dc_sensitivity, BusId, InjectionBounds, LineId, Network, NetworkError};
use crate::polytope::{HPolytope, PolytopeError};
use crate::scalar::Scalar;

pub const DEFAULT_TEF_STEPS: usize = 50;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricError {
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("generator has zero capacity")]
    ZeroCapacity,
    #[error("empty sample set")]
    EmptySamples,
    #[error("no distribution for {0}")]
    MissingHorizon(RampKey),
    #[error("no ramp series for {0}")]
    UnusedHorizon(RampKey),
    #[error("all branch margins are zero")]
    NoMargin,
    #[error("shedding problem infeasible at load {level} under outage {outage}")]
    ShedInfeasible { level: String, outage: usize },
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Polytope(#[from] PolytopeError),
}

fn invalid(msg: impl Into<String>) -> MetricError {
    MetricError::Invalid(msg.into())
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorSpec<S> {
    pub p_max: S,
    pub p_min: S,
    pub ramp_up: S,
    pub ramp_down: S,
    pub dispatch: Vec<S>,
}

impl<S: Scalar> GeneratorSpec<S> {
    pub fn validate(&self) -> Result<(), MetricError> {
        if self.p_min > self.p_max {
            return Err(invalid("p_min exceeds p_max"));
        }
        if self.ramp_up.is_negative() || self.ramp_down.is_negative() {
            return Err(invalid("negative ramp rate"));
        }
        if let Some(t) = self.dispatch.iter().position(|p| *p < self.p_min || *p > self.p_max) {
            return Err(invalid(format!("dispatch at period {t} outside [p_min, p_max]")));
        }
        Ok(())
    }

    /// Average of the up and down ramp rates.
    pub fn ramp(&self) -> S {
        (self.ramp_up.clone() + self.ramp_down.clone()) / S::from_int(2)
    }
}

/// Normalised flexibility of one unit over a period of length `dt`.
pub fn generator_flex<S: Scalar>(spec: &GeneratorSpec<S>, dt: &S) -> Result<S, MetricError> {
    spec.validate()?;
    if !dt.is_positive() {
        return Err(invalid("dt must be positive"));
    }
    if spec.p_max.is_zero() {
        return Err(MetricError::ZeroCapacity);
    }
    let half = S::ratio(1, 2);
    let range = half.clone() * (spec.p_max.clone() - spec.p_min.clone());
    let ramping = half * spec.ramp() * dt.clone();
    Ok((range + ramping) / spec.p_max.clone())
}

/// Empirical probability that the ramp-limited capability of `generators`
/// at period `t` over horizon `tau` falls strictly short of the net load.
pub fn lorp<S: Scalar>(
    generators: &[GeneratorSpec<S>],
    net_load_samples: &[S],
    t: usize,
    tau: &S,
) -> Result<S, MetricError> {
    if net_load_samples.is_empty() {
        return Err(MetricError::EmptySamples);
    }
    if tau.is_negative() {
        return Err(invalid("negative horizon"));
    }
    let mut capability = S::zero();
    for (i, g) in generators.iter().enumerate() {
        g.validate()?;
        let p = g.dispatch.get(t).ok_or_else(|| invalid(format!("generator {i} has no dispatch at period {t}")))?;
        let headroom = S::min_of(tau.clone() * g.ramp_up.clone(), g.p_max.clone() - p.clone());
        capability = capability + p.clone() + headroom;
    }
    let short = net_load_samples.iter().filter(|s| capability < **s).count();
    Ok(S::ratio(short as i64, net_load_samples.len() as i64))
}

/// One block `C_i p_i + C_e p_e <= b`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintBlock<S> {
    pub internal: Vec<Vec<S>>,
    pub external: Vec<Vec<S>>,
    pub rhs: Vec<S>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlexSetSpec<S> {
    pub internal_labels: Vec<String>,
    pub external_labels: Vec<String>,
    pub normal: ConstraintBlock<S>,
    pub contingencies: Vec<ConstraintBlock<S>>,
}

/// Stacked polytope over `(p_i, p_e)`.
pub fn active_flexibility_set<S: Scalar>(spec: &FlexSetSpec<S>) -> Result<HPolytope<S>, MetricError> {
    let (ni, ne) = (spec.internal_labels.len(), spec.external_labels.len());
    let mut labels = spec.internal_labels.clone();
    labels.extend(spec.external_labels.iter().cloned());
    let mut a = Vec::new();
    let mut b = Vec::new();
    for (k, block) in std::iter::once(&spec.normal).chain(&spec.contingencies).enumerate() {
        let m = block.rhs.len();
        if block.internal.len() != m || block.external.len() != m {
            return Err(invalid(format!(
                "block {k}: {m} rhs entries, {} internal rows, {} external rows",
                block.internal.len(),
                block.external.len()
            )));
        }
        for (r, (ci, ce)) in block.internal.iter().zip(&block.external).enumerate() {
            if ci.len() != ni || ce.len() != ne {
                return Err(invalid(format!("block {k} row {r}: expected {ni}+{ne} coefficients")));
            }
            a.push(ci.iter().chain(ce).cloned().collect());
            b.push(block.rhs[r].clone());
        }
    }
    Ok(HPolytope::new(labels, a, b)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Up,
    Down,
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Up => "up",
            Direction::Down => "down",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RampKey {
    pub horizon: u32,
    pub direction: Direction,
}

impl fmt::Display for RampKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "horizon {} {}", self.horizon, self.direction)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetLoadModel<S> {
    /// Net-load samples per horizon.
    pub samples: BTreeMap<u32, Vec<S>>,
    /// Observed net-load ramps per horizon and direction.
    pub ramps: BTreeMap<RampKey, Vec<S>>,
}

/// Right-continuous step function through `(x, value)` breakpoints, zero
/// left of the first one.
#[derive(Debug, Clone, PartialEq)]
pub struct StepFunction<S> {
    breakpoints: Vec<(S, S)>,
}

impl<S: Scalar> StepFunction<S> {
    pub fn new(breakpoints: Vec<(S, S)>) -> Result<Self, MetricError> {
        let mut last: Option<&(S, S)> = None;
        for p in &breakpoints {
            if !p.0.is_finite_value() || p.1.is_negative() || p.1 > S::one() {
                return Err(invalid("distribution values must lie in [0, 1]"));
            }
            if let Some(prev) = last {
                if p.0 <= prev.0 {
                    return Err(invalid("breakpoints must be strictly increasing"));
                }
                if p.1 < prev.1 {
                    return Err(invalid("distribution must be nondecreasing"));
                }
            }
            last = Some(p);
        }
        Ok(StepFunction { breakpoints })
    }

    pub fn breakpoints(&self) -> &[(S, S)] {
        &self.breakpoints
    }

    pub fn eval(&self, x: &S) -> S {
        let idx = self.breakpoints.partition_point(|(bx, _)| bx <= x);
        if idx == 0 {
            S::zero()
        } else {
            self.breakpoints[idx - 1].1.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlexDistribution<S> {
    pub afd: BTreeMap<RampKey, StepFunction<S>>,
}

/// Expected count of periods with insufficient ramping, per horizon and
/// direction: the distribution read at every observed ramp minus one.
pub fn irre<S: Scalar>(
    model: &NetLoadModel<S>,
    dist: &FlexDistribution<S>,
) -> Result<BTreeMap<RampKey, S>, MetricError> {
    if let Some(k) = dist.afd.keys().find(|k| !model.ramps.contains_key(k)) {
        return Err(MetricError::UnusedHorizon(*k));
    }
    let mut out = BTreeMap::new();
    for (key, ramps) in &model.ramps {
        let afd = dist.afd.get(key).ok_or(MetricError::MissingHorizon(*key))?;
        let total = ramps.iter().fold(S::zero(), |acc, r| acc + afd.eval(&(r.clone() - S::one())));
        out.insert(*key, total);
    }
    Ok(out)
}

/// Number of periods where the requirement exceeds what is available.
pub fn pfd<S: Scalar>(available: &[S], required: &[S]) -> Result<usize, MetricError> {
    if available.len() != required.len() {
        return Err(invalid(format!("{} available vs {} required periods", available.len(), required.len())));
    }
    Ok(available.iter().zip(required).filter(|(a, r)| r > a).count())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outage<S> {
    pub lines: Vec<LineId>,
    pub probability: S,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContingencyModel<S> {
    pub outages: Vec<Outage<S>>,
    pub medium_load: S,
    pub high_load: S,
    /// Fraction of the system load drawn at each bus.
    pub load_shares: BTreeMap<BusId, S>,
    pub generation: BTreeMap<BusId, InjectionBounds<S>>,
}

impl<S: Scalar> ContingencyModel<S> {
    fn validate(&self, network: &Network<S>) -> Result<(), MetricError> {
        if self.medium_load > self.high_load {
            return Err(invalid("medium_load exceeds high_load"));
        }
        for (j, o) in self.outages.iter().enumerate() {
            if o.probability.is_negative() || o.probability > S::one() {
                return Err(invalid(format!("outage {j}: probability outside [0, 1]")));
            }
            for l in &o.lines {
                network.line_index(l).ok_or_else(|| NetworkError::UnknownLine(l.clone()))?;
            }
        }
        for bus in self.load_shares.keys().chain(self.generation.keys()) {
            network.bus_index(bus).ok_or_else(|| NetworkError::UnknownBus(bus.clone()))?;
        }
        if self.load_shares.values().any(|s| s.is_negative()) {
            return Err(invalid("negative load share"));
        }
        Ok(())
    }
}

/// Minimum total shedding at system load `level` with outage `outage`
/// applied to the base topology.
///
/// Angle formulation: one angle per bus (reference pinned at zero), one
/// output per generating bus, one shed per loaded bus; nodal balance as
/// equalities, flow limits per in-service line.
pub fn minimum_shedding<S: Scalar>(
    network: &Network<S>,
    model: &ContingencyModel<S>,
    outage: usize,
    level: &S,
) -> Result<S, MetricError> {
    let out = model.outages.get(outage).ok_or_else(|| invalid(format!("no outage {outage}")))?;
    let mut state = network.base_state();
    for l in &out.lines {
        let k = network.line_index(l).ok_or_else(|| NetworkError::UnknownLine(l.clone()))?;
        state.0[k] = false;
    }
    let reference = network.reference_index()?;
    let nb = network.buses.len();
    let gens: Vec<(usize, &InjectionBounds<S>)> =
        model.generation.iter().map(|(b, bounds)| (network.bus_index(b).expect("validated"), bounds)).collect();
    let loads: Vec<(usize, S)> = model
        .load_shares
        .iter()
        .map(|(b, share)| (network.bus_index(b).expect("validated"), share.clone() * level.clone()))
        .filter(|(_, d)| d.is_positive())
        .collect();
    // columns: angles, generators, sheds
    let n = nb + gens.len() + loads.len();
    let mut rows: Vec<Vec<S>> = Vec::new();
    let mut rhs: Vec<S> = Vec::new();
    let mut balance = vec![vec![S::zero(); n]; nb];
    let mut demand = vec![S::zero(); nb];
    for (g, (bus, _)) in gens.iter().enumerate() {
        balance[*bus][nb + g] = S::one();
    }
    for (s, (bus, d)) in loads.iter().enumerate() {
        balance[*bus][nb + gens.len() + s] = S::one();
        demand[*bus] = demand[*bus].clone() + d.clone();
    }
    for (k, line) in network.lines.iter().enumerate() {
        if !state.is_on(k) {
            continue;
        }
        let f = network.bus_index(&line.from_bus).ok_or_else(|| NetworkError::UnknownBus(line.from_bus.clone()))?;
        let t = network.bus_index(&line.to_bus).ok_or_else(|| NetworkError::UnknownBus(line.to_bus.clone()))?;
        let b = line.susceptance.clone();
        // flow leaves `f`, enters `t`
        balance[f][f] = balance[f][f].clone() - b.clone();
        balance[f][t] = balance[f][t].clone() + b.clone();
        balance[t][t] = balance[t][t].clone() - b.clone();
        balance[t][f] = balance[t][f].clone() + b.clone();
        let mut flow = vec![S::zero(); n];
        flow[f] = b.clone();
        flow[t] = -b;
        if let Some(hi) = &line.flow_max {
            rows.push(flow.clone());
            rhs.push(hi.clone());
        }
        if let Some(lo) = &line.flow_min {
            rows.push(flow.iter().map(|v| -v.clone()).collect());
            rhs.push(-lo.clone());
        }
    }
    for (row, d) in balance.into_iter().zip(demand) {
        rows.push(row.iter().map(|v| -v.clone()).collect());
        rhs.push(-d.clone());
        rows.push(row);
        rhs.push(d);
    }
    let mut lower: Vec<Option<S>> = vec![None; n];
    let mut upper: Vec<Option<S>> = vec![None; n];
    lower[reference] = Some(S::zero());
    upper[reference] = Some(S::zero());
    for (g, (_, bounds)) in gens.iter().enumerate() {
        lower[nb + g] = bounds.p_min.clone();
        upper[nb + g] = bounds.p_max.clone();
    }
    let mut objective = vec![S::zero(); n];
    for (s, (_, d)) in loads.iter().enumerate() {
        let col = nb + gens.len() + s;
        lower[col] = Some(S::zero());
        upper[col] = Some(d.clone());
        objective[col] = S::one();
    }
    let program = LinearProgram::minimize(objective, rows, rhs).with_bounds(lower, upper);
    match lp_solve(&program)? {
        LpOutcome::Optimal { value, .. } => Ok(S::max_of(value, S::zero())),
        _ => Err(MetricError::ShedInfeasible { level: level.literal(), outage }),
    }
}

/// Probability-weighted shedding at one load level.
pub fn expected_shedding<S: Scalar>(
    network: &Network<S>,
    model: &ContingencyModel<S>,
    level: &S,
) -> Result<S, MetricError> {
    let mut total = S::zero();
    for (j, o) in model.outages.iter().enumerate() {
        if o.probability.is_zero() {
            continue;
        }
        total = total + o.probability.clone() * minimum_shedding(network, model, j, level)?;
    }
    Ok(total)
}

/// Trapezoidal integral of the expected shedding over
/// `[medium_load, high_load]` on `steps` uniform intervals.
pub fn tef<S: Scalar>(network: &Network<S>, model: &ContingencyModel<S>, steps: usize) -> Result<S, MetricError> {
    model.validate(network)?;
    if steps == 0 {
        return Err(invalid("at least one integration step is required"));
    }
    if !network.is_connected(&network.base_state())? {
        return Err(NetworkError::Disconnected(network.islands(&network.base_state())?).into());
    }
    let width = model.high_load.clone() - model.medium_load.clone();
    if width.is_zero() {
        return Ok(S::zero());
    }
    let h = width / S::from_int(steps as i64);
    let levels: Vec<S> = (0..=steps).map(|i| model.medium_load.clone() + h.clone() * S::from_int(i as i64)).collect();
    let values: Vec<S> = levels.par_iter().map(|l| expected_shedding(network, model, l)).collect::<Result<_, _>>()?;
    let half = S::ratio(1, 2);
    let inner = values[1..steps].iter().fold(S::zero(), |acc, v| acc + v.clone());
    let ends = half * (values[0].clone() + values[steps].clone());
    Ok(h * (ends + inner))
}

/// Margin-weighted mean of per-branch distribution factors at the operating
/// point given by `injections` (non-reference buses, missing entries zero).
///
/// A branch's factor is the mean absolute flow sensitivity over all
/// non-reference buses; its weight is the distance of its flow to the nearer
/// limit, clipped at zero. Branches without both limits are skipped.
pub fn weighted_distribution_factor<S: Scalar>(
    network: &Network<S>,
    injections: &BTreeMap<BusId, S>,
) -> Result<S, MetricError> {
    let state = network.base_state();
    let map = dc_sensitivity(network, &state)?;
    for bus in injections.keys() {
        let i = network.bus_index(bus).ok_or_else(|| NetworkError::UnknownBus(bus.clone()))?;
        if map.column_of_bus(i).is_none() {
            return Err(invalid(format!("bus {bus} is the reference")));
        }
    }
    let p: Vec<S> =
        map.buses.iter().map(|&i| injections.get(&network.buses[i].id).cloned().unwrap_or_else(S::zero)).collect();
    let flows = map.flows(&p);
    let buses = S::from_int(map.buses.len().max(1) as i64);
    let mut weighted = S::zero();
    let mut weights = S::zero();
    for (r, &k) in map.lines.iter().enumerate() {
        let line = &network.lines[k];
        let (Some(lo), Some(hi)) = (&line.flow_min, &line.flow_max) else {
            log::debug!("branch {} has an open limit, skipped", line.id);
            continue;
        };
        let f = &flows[r];
        let margin = S::max_of(S::min_of(hi.clone() - f.clone(), f.clone() - lo.clone()), S::zero());
        let c_tot = map.matrix[r].iter().fold(S::zero(), |acc, v| acc + v.abs()) / buses.clone();
        weighted = weighted + margin.clone() * c_tot;
        weights = weights + margin;
    }
    if weights.is_zero() {
        return Err(MetricError::NoMargin);
    }
    Ok(weighted / weights)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricEntry {
    pub metric: String,
    pub detail: String,
    /// Exact literal in rational mode.
    pub value: String,
    pub approx: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct MetricReport {
    pub entries: Vec<MetricEntry>,
}

impl MetricReport {
    pub fn push<S: Scalar>(&mut self, metric: &str, detail: impl Into<String>, value: &S) {
        self.entries.push(MetricEntry {
            metric: metric.to_string(),
            detail: detail.into(),
            value: value.literal(),
            approx: value.to_f64_lossy(),
        });
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }

    pub fn to_table(&self) -> String {
        let header = ["metric", "detail", "value", "approx"];
        let cells: Vec<[String; 4]> = self
            .entries
            .iter()
            .map(|e| [e.metric.clone(), e.detail.clone(), e.value.clone(), format!("{:.6}", e.approx)])
            .collect();
        let mut widths = header.map(str::len);
        for row in &cells {
            for (w, c) in widths.iter_mut().zip(row) {
                *w = (*w).max(c.chars().count());
            }
        }
        let line = |row: [&str; 4]| -> String {
            let mut s = String::new();
            for (i, (c, w)) in row.iter().zip(widths).enumerate() {
                if i > 0 {
                    s.push_str("  ");
                }
                if i >= 2 {
                    s.push_str(&format!("{c:>w$}"));
                } else {
                    s.push_str(&format!("{c:<w$}"));
                }
            }
            s.trim_end().to_string() + "\n"
        };
        let mut out = line(header);
        let rule: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
        out.push_str(&line([&rule[0], &rule[1], &rule[2], &rule[3]]));
        for row in &cells {
            out.push_str(&line([&row[0], &row[1], &row[2], &row[3]]));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polytope::{project, region_equal};
    use crate::regions::fixtures::{hexagon, q, qr, three_bus};
    use crate::scalar::Rational;

    fn unit(p_max: i64, p_min: i64, up: i64, down: i64) -> GeneratorSpec<Rational> {
        GeneratorSpec { p_max: q(p_max), p_min: q(p_min), ramp_up: q(up), ramp_down: q(down), dispatch: vec![] }
    }

    #[test]
    fn generator_flex_cases() {
        assert_eq!(generator_flex(&unit(100, 40, 30, 30), &q(1)).unwrap(), qr(45, 100));
        assert_eq!(generator_flex(&unit(50, 50, 0, 0), &q(1)).unwrap(), q(0));
        assert_eq!(generator_flex(&unit(10, 0, 10, 10), &q(1)).unwrap(), q(1));
        // asymmetric ramps average
        assert_eq!(generator_flex(&unit(100, 40, 20, 40), &q(1)).unwrap(), qr(45, 100));
        assert_eq!(generator_flex(&unit(0, 0, 1, 1), &q(1)), Err(MetricError::ZeroCapacity));
        assert!(generator_flex(&unit(10, 20, 1, 1), &q(1)).is_err());
    }

    fn dispatched(p_max: i64, ramp: i64, p: i64) -> GeneratorSpec<Rational> {
        GeneratorSpec { p_max: q(p_max), p_min: q(0), ramp_up: q(ramp), ramp_down: q(ramp), dispatch: vec![q(p)] }
    }

    #[test]
    fn lorp_cases() {
        let g = [dispatched(100, 10, 50)];
        assert_eq!(lorp(&g, &[q(60), q(75)], 0, &q(2)).unwrap(), qr(1, 2));
        let idle = [dispatched(100, 0, 50)];
        assert_eq!(lorp(&idle, &[q(10), q(50)], 0, &q(2)).unwrap(), q(0));
        // saturated capability
        assert_eq!(lorp(&g, &[q(99), q(100)], 0, &q(1000)).unwrap(), q(0));
        assert_eq!(lorp(&g, &[], 0, &q(2)), Err(MetricError::EmptySamples));
        assert!(lorp(&g, &[q(1)], 3, &q(2)).is_err());
    }

    fn key(h: u32, d: Direction) -> RampKey {
        RampKey { horizon: h, direction: d }
    }

    #[test]
    fn irre_step_function() {
        let k = key(1, Direction::Up);
        let model = NetLoadModel { samples: BTreeMap::new(), ramps: BTreeMap::from([(k, vec![q(5), q(10)])]) };
        let afd = StepFunction::new(vec![(q(4), qr(1, 4)), (q(9), qr(3, 4))]).unwrap();
        let dist = FlexDistribution { afd: BTreeMap::from([(k, afd)]) };
        assert_eq!(irre(&model, &dist).unwrap()[&k], q(1));

        let zero = FlexDistribution { afd: BTreeMap::from([(k, StepFunction::new(vec![(q(100), q(1))]).unwrap())]) };
        assert_eq!(irre(&model, &zero).unwrap()[&k], q(0));

        let other =
            FlexDistribution { afd: BTreeMap::from([(key(2, Direction::Up), StepFunction::new(vec![]).unwrap())]) };
        assert_eq!(irre(&model, &other), Err(MetricError::UnusedHorizon(key(2, Direction::Up))));
        let none = FlexDistribution { afd: BTreeMap::new() };
        assert_eq!(irre(&model, &none), Err(MetricError::MissingHorizon(k)));
    }

    #[test]
    fn step_function_validation() {
        assert!(StepFunction::new(vec![(q(1), qr(1, 2)), (q(2), qr(1, 4))]).is_err());
        assert!(StepFunction::new(vec![(q(1), qr(1, 2)), (q(1), qr(3, 4))]).is_err());
        assert!(StepFunction::new(vec![(q(1), q(2))]).is_err());
        let f = StepFunction::new(vec![(q(0), qr(1, 2))]).unwrap();
        assert_eq!(f.eval(&q(-1)), q(0));
        assert_eq!(f.eval(&q(0)), qr(1, 2));
    }

    #[test]
    fn pfd_counts_shortfalls() {
        assert_eq!(pfd(&[q(3), q(3), q(3)], &[q(1), q(2), q(3)]).unwrap(), 0);
        assert_eq!(pfd(&[q(1), q(3)], &[q(2), q(4)]).unwrap(), 2);
        assert!(pfd(&[q(1)], &[]).is_err());
    }

    /// Base-case flow limits of the 3-bus system as one block with the
    /// reference injection internal.
    fn three_bus_blocks() -> FlexSetSpec<Rational> {
        let t = |n| qr(n, 3);
        let mut internal = Vec::new();
        let mut external = Vec::new();
        let mut rhs = Vec::new();
        let mut range = |ci: Rational, ce: Vec<Rational>, bound: Rational| {
            internal.push(vec![ci.clone()]);
            external.push(ce.clone());
            rhs.push(bound.clone());
            internal.push(vec![-ci]);
            external.push(ce.into_iter().map(|v| -v).collect());
            rhs.push(bound);
        };
        range(q(0), vec![t(1), t(-1)], q(2));
        range(q(0), vec![t(1), t(2)], q(2));
        range(q(0), vec![t(2), t(1)], q(1));
        range(q(0), vec![q(1), q(0)], q(4));
        range(q(0), vec![q(0), q(1)], q(4));
        range(q(1), vec![q(0), q(0)], q(4));
        range(q(1), vec![q(1), q(1)], q(0));
        FlexSetSpec {
            internal_labels: vec!["P3".into()],
            external_labels: vec!["P1".into(), "P2".into()],
            normal: ConstraintBlock { internal, external, rhs },
            contingencies: vec![],
        }
    }

    #[test]
    fn flex_set_projects_to_hexagon() {
        let set = active_flexibility_set(&three_bus_blocks()).unwrap();
        assert_eq!(set.labels(), &["P3", "P1", "P2"]);
        let ext = project(&set, &["P1".to_string(), "P2".to_string()]).unwrap();
        assert!(region_equal(&ext, &hexagon()).unwrap());
    }

    #[test]
    fn flex_set_stacks_and_checks_dimensions() {
        let mut spec = three_bus_blocks();
        let zero = ConstraintBlock { internal: vec![vec![q(1)]], external: vec![vec![q(1), q(1)]], rhs: vec![q(0)] };
        spec.contingencies.push(zero.clone());
        let set = active_flexibility_set(&spec).unwrap();
        assert_eq!(set.n_rows(), 15);
        assert!(set.contains(&[q(0), q(0), q(0)]));
        spec.contingencies.push(ConstraintBlock { external: vec![vec![q(1)]], ..zero });
        assert!(active_flexibility_set(&spec).is_err());
    }

    fn shedding_case(limit: i64, probability: Rational) -> (Network<Rational>, ContingencyModel<Rational>) {
        let (mut net, _) = three_bus();
        for l in &mut net.lines {
            l.flow_min = Some(q(-limit.max(1)));
            l.flow_max = Some(q(limit.max(1)));
        }
        net.lines[1].flow_min = Some(q(-limit));
        net.lines[1].flow_max = Some(q(limit));
        let gen = InjectionBounds { p_min: Some(q(0)), p_max: Some(q(4)) };
        let model = ContingencyModel {
            outages: vec![Outage { lines: vec!["L13".into()], probability }],
            medium_load: q(2),
            high_load: q(3),
            load_shares: BTreeMap::from([(BusId("3".into()), q(1))]),
            generation: BTreeMap::from([(BusId("1".into()), gen.clone()), (BusId("2".into()), gen)]),
        };
        (net, model)
    }

    #[test]
    fn shedding_follows_corridor_limit() {
        let (net, model) = shedding_case(2, qr(1, 10));
        for (level, shed) in [(q(2), q(0)), (qr(5, 2), qr(1, 2)), (q(3), q(1))] {
            assert_eq!(minimum_shedding(&net, &model, 0, &level).unwrap(), shed);
        }
        assert_eq!(tef(&net, &model, 4).unwrap(), qr(1, 20));
    }

    #[test]
    fn tef_trivial_cases() {
        let (net, model) = shedding_case(10, qr(1, 10));
        assert_eq!(tef(&net, &model, DEFAULT_TEF_STEPS).unwrap(), q(0));
        let (net, model) = shedding_case(2, q(0));
        assert_eq!(tef(&net, &model, 10).unwrap(), q(0));
        let (net, mut model) = shedding_case(2, qr(1, 10));
        model.high_load = q(1);
        assert!(tef(&net, &model, 10).is_err());
    }

    #[test]
    fn islanded_outage_sheds_all_island_load() {
        let (net, mut model) = shedding_case(10, q(1));
        model.outages[0].lines = vec!["L13".into(), "L23".into()];
        assert_eq!(minimum_shedding(&net, &model, 0, &q(3)).unwrap(), q(3));
    }

    #[test]
    fn wdf_three_bus() {
        let (net, _) = three_bus();
        assert_eq!(weighted_distribution_factor(&net, &BTreeMap::new()).unwrap(), qr(13, 30));
        let at = BTreeMap::from([(BusId("1".into()), q(1))]);
        assert_eq!(weighted_distribution_factor(&net, &at).unwrap(), qr(14, 33));
        let mut doubled = net.clone();
        for l in &mut doubled.lines {
            l.flow_min = l.flow_min.clone().map(|v| v * q(2));
            l.flow_max = l.flow_max.clone().map(|v| v * q(2));
        }
        // uniform margin scaling at the zero point leaves the weights proportional
        assert_eq!(weighted_distribution_factor(&doubled, &BTreeMap::new()).unwrap(), qr(13, 30));
        assert_eq!(weighted_distribution_factor(&doubled, &at).unwrap(), qr(67, 156));
    }

    #[test]
    fn wdf_errors() {
        let (net, _) = three_bus();
        let saturating = BTreeMap::from([(BusId("1".into()), q(6)), (BusId("2".into()), q(-6))]);
        // f12 = 4 > 2, f23 = -2, f13 = 2 > 1: every margin clipped
        assert_eq!(weighted_distribution_factor(&net, &saturating), Err(MetricError::NoMargin));
        let at_ref = BTreeMap::from([(BusId("3".into()), q(1))]);
        assert!(weighted_distribution_factor(&net, &at_ref).is_err());
    }

    #[test]
    fn report_formats() {
        let mut r = MetricReport::default();
        r.push("generator_flex", "unit", &qr(9, 20));
        r.push("lorp", "t=0", &qr(1, 2));
        let table = r.to_table();
        let lines: Vec<&str> = table.lines().collect();
        assert_eq!(lines.len(), 4);
        assert!(lines[2].starts_with("generator_flex  unit"));
        assert!(lines[2].ends_with("9/20  0.450000"));
        let json: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(json["entries"][1]["value"], "1/2");
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]

            #[test]
            fn lorp_in_unit_interval_and_monotone_in_ramp(
                p in 0i64..100, r in 0i64..20, extra in 0i64..20,
                samples in prop::collection::vec(0i64..200, 1..20),
            ) {
                let s: Vec<Rational> = samples.iter().map(|&v| q(v)).collect();
                let slow = lorp(&[dispatched(100, r, p)], &s, 0, &q(3)).unwrap();
                let fast = lorp(&[dispatched(100, r + extra, p)], &s, 0, &q(3)).unwrap();
                prop_assert!(slow >= q(0) && slow <= q(1));
                prop_assert!(fast <= slow);
            }

            #[test]
            fn irre_nonnegative_and_monotone(
                ramps in prop::collection::vec(-10i64..30, 0..15),
                xs in prop::collection::btree_set(-10i64..30, 1..6),
                bump in 0i64..4,
            ) {
                let k = key(1, Direction::Down);
                let model = NetLoadModel { samples: BTreeMap::new(), ramps: BTreeMap::from([(k, ramps.iter().map(|&v| q(v)).collect())]) };
                let n = xs.len() as i64;
                let low: Vec<_> = xs.iter().enumerate().map(|(i, &x)| (q(x), qr(i as i64, n + 4))).collect();
                let high: Vec<_> = xs.iter().enumerate().map(|(i, &x)| (q(x), qr(i as i64 + bump, n + 4))).collect();
                let a = irre(&model, &FlexDistribution { afd: BTreeMap::from([(k, StepFunction::new(low).unwrap())]) }).unwrap()[&k].clone();
                let b = irre(&model, &FlexDistribution { afd: BTreeMap::from([(k, StepFunction::new(high).unwrap())]) }).unwrap()[&k].clone();
                prop_assert!(a >= q(0));
                prop_assert!(b >= a);
            }

            #[test]
            fn generator_flex_scale_invariant(
                p_max in 1i64..200, frac in 0i64..=10, up in 0i64..50, down in 0i64..50, k in 1i64..9,
            ) {
                let p_min = p_max * frac / 10;
                let base = generator_flex(&unit(p_max, p_min, up, down), &q(1)).unwrap();
                let scaled = generator_flex(&unit(k * p_max, k * p_min, k * up, k * down), &q(1)).unwrap();
                prop_assert_eq!(base, scaled);
            }

            #[test]
            fn tef_monotone_in_probability(a in 0i64..=10, b in 0i64..=10) {
                let (lo, hi) = (a.min(b), a.max(b));
                let (net, m_lo) = shedding_case(2, qr(lo, 10));
                let (_, m_hi) = shedding_case(2, qr(hi, 10));
                let t_lo = tef(&net, &m_lo, 2).unwrap();
                let t_hi = tef(&net, &m_hi, 2).unwrap();
                prop_assert!(t_lo >= q(0));
                prop_assert!(t_hi >= t_lo);
            }
        }
    }
}
