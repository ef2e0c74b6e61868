//! JSON documents: network, classification, resources, regions and metric
//! inputs.
//!
//! Numbers are accepted as JSON numbers (read through their decimal text, so
//! `0.1` is exactly 1/10 in rational mode) or as strings holding a decimal
//! or a fraction `p/q`. Open bounds are `null`, absent, or `"inf"`/`"-inf"`.
//! Written region files use integers where possible and fraction strings
//! otherwise; object keys come out sorted.

use std::collections::BTreeMap;

use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::metrics::{
    active_flexibility_set, generator_flex, irre, lorp, pfd, tef, weighted_distribution_factor, ConstraintBlock,
    ContingencyModel, Direction, FlexDistribution, FlexSetSpec, GeneratorSpec, MetricError, MetricReport, NetLoadModel,
    Outage, RampKey, StepFunction, DEFAULT_TEF_STEPS,
};
use crate::network::{Bus, BusId, InjectionBounds, InjectionClassification, Line, LineId, Network};
use crate::polytope::{HPolytope, PolytopeError, RegionDifference, RegionUnion};
use crate::regions::{AdmissibleRegion, FlexResource, GridFlexibilityRegion};
use crate::scalar::Scalar;

/// Malformed document; `field` is a dotted path such as `lines[2].susceptance`.
#[derive(Debug, Error, Clone, PartialEq)]
#[error("{field}: {message}")]
pub struct FormatError {
    pub field: String,
    pub message: String,
}

fn fail<T>(field: &str, message: impl Into<String>) -> Result<T, FormatError> {
    Err(FormatError { field: field.to_string(), message: message.into() })
}

#[derive(Clone, Copy)]
struct Node<'a> {
    value: &'a Value,
    path: &'a str,
}

fn child_path(parent: &str, key: &str) -> String {
    if parent.is_empty() {
        key.to_string()
    } else {
        format!("{parent}.{key}")
    }
}

impl<'a> Node<'a> {
    fn object(&self, allowed: &[&str]) -> Result<&'a Map<String, Value>, FormatError> {
        let Value::Object(map) = self.value else {
            return fail(self.field(), "expected an object");
        };
        if let Some(k) = map.keys().find(|k| !allowed.contains(&k.as_str())) {
            return fail(&child_path(self.path, k), "unknown field");
        }
        Ok(map)
    }

    fn field(&self) -> &str {
        if self.path.is_empty() {
            "<document>"
        } else {
            self.path
        }
    }

    fn array(&self) -> Result<&'a Vec<Value>, FormatError> {
        match self.value {
            Value::Array(v) => Ok(v),
            _ => fail(self.field(), "expected an array"),
        }
    }

    fn string(&self) -> Result<&'a str, FormatError> {
        match self.value {
            Value::String(s) => Ok(s),
            _ => fail(self.field(), "expected a string"),
        }
    }

    fn boolean(&self) -> Result<bool, FormatError> {
        match self.value {
            Value::Bool(b) => Ok(*b),
            _ => fail(self.field(), "expected true or false"),
        }
    }

    fn unsigned(&self) -> Result<u64, FormatError> {
        self.value.as_u64().map_or_else(|| fail(self.field(), "expected a nonnegative integer"), Ok)
    }

    fn number<S: Scalar>(&self) -> Result<S, FormatError> {
        match self.bound::<S>()? {
            Some(v) => Ok(v),
            None => fail(self.field(), "expected a finite number"),
        }
    }

    /// Number or open side (`null`, "inf", "-inf", "+inf").
    fn bound<S: Scalar>(&self) -> Result<Option<S>, FormatError> {
        let text = match self.value {
            Value::Null => return Ok(None),
            Value::Number(n) => n.to_string(),
            Value::String(s) => {
                let t = s.trim();
                if matches!(t, "inf" | "+inf" | "-inf" | "infinity" | "-infinity") {
                    return Ok(None);
                }
                t.to_string()
            }
            _ => return fail(self.field(), "expected a number or a fraction string"),
        };
        match S::parse_literal(&text) {
            Some(v) if v.is_finite_value() => Ok(Some(v)),
            _ => fail(self.field(), format!("cannot read {text:?} as a number")),
        }
    }
}

/// Run `f` on `value[key]` with a proper path, or on `None` when absent.
fn with_key<'a, T>(
    parent: &Node<'a>,
    map: &'a Map<String, Value>,
    key: &str,
    f: impl FnOnce(Option<Node<'_>>) -> Result<T, FormatError>,
) -> Result<T, FormatError> {
    let path = child_path(parent.path, key);
    f(map.get(key).map(|value| Node { value, path: &path }))
}

fn required<'a, T>(
    parent: &Node<'a>,
    map: &'a Map<String, Value>,
    key: &str,
    f: impl FnOnce(Node<'_>) -> Result<T, FormatError>,
) -> Result<T, FormatError> {
    with_key(parent, map, key, |n| match n {
        Some(n) => f(n),
        None => fail(&child_path(parent.path, key), "missing field"),
    })
}

fn each<T>(node: Node<'_>, mut f: impl FnMut(Node<'_>) -> Result<T, FormatError>) -> Result<Vec<T>, FormatError> {
    node.array()?
        .iter()
        .enumerate()
        .map(|(i, value)| {
            let path = format!("{}[{i}]", node.path);
            f(Node { value, path: &path })
        })
        .collect()
}

fn root(v: &Value) -> Node<'_> {
    Node { value: v, path: "" }
}

fn parse_json(text: &str) -> Result<Value, FormatError> {
    serde_json::from_str(text).map_err(|e| FormatError { field: "<document>".into(), message: e.to_string() })
}

fn strings(node: Node<'_>) -> Result<Vec<String>, FormatError> {
    each(node, |n| n.string().map(str::to_string))
}

fn numbers<S: Scalar>(node: Node<'_>) -> Result<Vec<S>, FormatError> {
    each(node, |n| n.number())
}

fn matrix<S: Scalar>(node: Node<'_>) -> Result<Vec<Vec<S>>, FormatError> {
    each(node, numbers)
}

fn bounds_map<S: Scalar>(node: Node<'_>) -> Result<BTreeMap<BusId, InjectionBounds<S>>, FormatError> {
    let Value::Object(map) = node.value else {
        return fail(node.field(), "expected an object keyed by bus id");
    };
    let mut out = BTreeMap::new();
    for (bus, value) in map {
        let path = child_path(node.path, bus);
        let n = Node { value, path: &path };
        let obj = n.object(&["p_min", "p_max"])?;
        let p_min = with_key(&n, obj, "p_min", |v| v.map_or(Ok(None), |v| v.bound()))?;
        let p_max = with_key(&n, obj, "p_max", |v| v.map_or(Ok(None), |v| v.bound()))?;
        out.insert(BusId(bus.clone()), InjectionBounds { p_min, p_max });
    }
    Ok(out)
}

fn classification_node<S: Scalar>(node: Node<'_>) -> Result<InjectionClassification<S>, FormatError> {
    let obj = node.object(&["controllable", "uncertain", "bounds"])?;
    let ids = |n: Option<Node<'_>>| -> Result<Vec<BusId>, FormatError> {
        n.map_or(Ok(vec![]), |n| Ok(strings(n)?.into_iter().map(BusId).collect()))
    };
    Ok(InjectionClassification {
        controllable: with_key(&node, obj, "controllable", ids)?,
        uncertain: with_key(&node, obj, "uncertain", ids)?,
        bounds: with_key(&node, obj, "bounds", |n| n.map_or(Ok(BTreeMap::new()), bounds_map))?,
    })
}

/// Network document, with its embedded classification when present.
pub fn parse_network<S: Scalar>(text: &str) -> Result<(Network<S>, Option<InjectionClassification<S>>), FormatError> {
    let v = parse_json(text)?;
    let doc = root(&v);
    let obj = doc.object(&["buses", "reference_bus", "lines", "classification"])?;
    let buses = required(&doc, obj, "buses", |n| {
        each(n, |b| {
            let o = b.object(&["id", "label"])?;
            let id = required(&b, o, "id", |n| n.string().map(str::to_string))?;
            let label =
                with_key(&b, o, "label", |n| n.map_or(Ok(format!("P{id}")), |n| n.string().map(str::to_string)))?;
            Ok(Bus { id: BusId(id), label })
        })
    })?;
    let reference_buses = required(&doc, obj, "reference_bus", |n| match n.value {
        Value::String(s) => Ok(vec![BusId(s.clone())]),
        Value::Array(_) => Ok(strings(n)?.into_iter().map(BusId).collect()),
        _ => fail(n.field(), "expected a bus id or a list of ids"),
    })?;
    let lines = required(&doc, obj, "lines", |n| {
        each(n, |l| {
            let o = l.object(&[
                "id",
                "from_bus",
                "to_bus",
                "susceptance",
                "flow_min",
                "flow_max",
                "in_service",
                "switchable",
                "candidate",
            ])?;
            let text = |key: &str| required(&l, o, key, |n| n.string().map(str::to_string));
            let flag = |key: &str, default: bool| with_key(&l, o, key, |n| n.map_or(Ok(default), |n| n.boolean()));
            let open = |key: &str| with_key(&l, o, key, |n| n.map_or(Ok(None), |n| n.bound::<S>()));
            let candidate = flag("candidate", false)?;
            Ok(Line {
                id: LineId(text("id")?),
                from_bus: BusId(text("from_bus")?),
                to_bus: BusId(text("to_bus")?),
                susceptance: required(&l, o, "susceptance", |n| n.number())?,
                flow_min: open("flow_min")?,
                flow_max: open("flow_max")?,
                in_service: flag("in_service", !candidate)?,
                switchable: flag("switchable", false)?,
                candidate,
            })
        })
    })?;
    let classification = with_key(&doc, obj, "classification", |n| n.map(classification_node).transpose())?;
    Ok((Network { buses, reference_buses, lines }, classification))
}

pub fn parse_classification<S: Scalar>(text: &str) -> Result<InjectionClassification<S>, FormatError> {
    let v = parse_json(text)?;
    classification_node(root(&v))
}

/// Resource list: objects tagged by `type`.
pub fn parse_resources<S: Scalar>(text: &str) -> Result<Vec<FlexResource<S>>, FormatError> {
    let v = parse_json(text)?;
    each(root(&v), |r| {
        let Value::Object(map) = r.value else {
            return fail(r.field(), "expected an object");
        };
        let kind = required(&r, map, "type", |n| n.string().map(str::to_string))?;
        let id = |key: &str| required(&r, map, key, |n| n.string().map(str::to_string));
        match kind.as_str() {
            "controllable_injection" => {
                r.object(&["type", "bus", "p_min", "p_max"])?;
                let open = |key: &str| with_key(&r, map, key, |n| n.map_or(Ok(None), |n| n.bound::<S>()));
                Ok(FlexResource::ControllableInjection {
                    bus: BusId(id("bus")?),
                    p_min: open("p_min")?,
                    p_max: open("p_max")?,
                })
            }
            "series_facts" => {
                r.object(&["type", "host_line", "capacity"])?;
                Ok(FlexResource::SeriesFacts {
                    host_line: LineId(id("host_line")?),
                    capacity: required(&r, map, "capacity", |n| n.number())?,
                })
            }
            "switchable_line" => {
                r.object(&["type", "line"])?;
                Ok(FlexResource::SwitchableLine { line: LineId(id("line")?) })
            }
            "candidate_line" => {
                r.object(&["type", "line"])?;
                Ok(FlexResource::CandidateLine { line: LineId(id("line")?) })
            }
            other => fail(&child_path(r.path, "type"), format!("unknown resource type {other:?}")),
        }
    })
}

/// Members of a region file sharing one label list.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionFile<S> {
    pub union: RegionUnion<S>,
    pub provenance: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum RegionDocument<S> {
    Union(RegionFile<S>),
    Difference { minuend: RegionFile<S>, subtrahend: RegionFile<S> },
}

impl<S: Scalar> RegionDocument<S> {
    pub fn labels(&self) -> &[String] {
        match self {
            RegionDocument::Union(f) => f.union.labels(),
            RegionDocument::Difference { minuend, .. } => minuend.union.labels(),
        }
    }
}

fn polytope_node<S: Scalar>(
    node: Node<'_>,
    labels: &[String],
    map: &Map<String, Value>,
) -> Result<HPolytope<S>, FormatError> {
    let a = required(&node, map, "A", matrix::<S>)?;
    let b = required(&node, map, "b", numbers::<S>)?;
    HPolytope::new(labels.to_vec(), a, b)
        .map_err(|e| FormatError { field: node.field().to_string(), message: e.to_string() })
}

fn region_file_node<S: Scalar>(node: Node<'_>, labels: Option<&[String]>) -> Result<RegionFile<S>, FormatError> {
    let obj = node.object(&["labels", "A", "b", "union", "provenance", "feasible"])?;
    let labels = match with_key(&node, obj, "labels", |n| n.map(strings).transpose())? {
        Some(l) => l,
        None => match labels {
            Some(l) => l.to_vec(),
            None => return fail(&child_path(node.path, "labels"), "missing field"),
        },
    };
    let members = if obj.contains_key("union") {
        if obj.contains_key("A") || obj.contains_key("b") {
            return fail(node.field(), "give either A/b or union, not both");
        }
        required(&node, obj, "union", |n| {
            each(n, |m| {
                let o = m.object(&["A", "b", "topology"])?;
                polytope_node(m, &labels, o)
            })
        })?
    } else {
        vec![polytope_node(node, &labels, obj)?]
    };
    let provenance = with_key(&node, obj, "provenance", |n| n.map_or(Ok(vec![]), strings))?;
    let union = RegionUnion::new(labels, members)
        .map_err(|e| FormatError { field: node.field().to_string(), message: e.to_string() })?;
    Ok(RegionFile { union, provenance })
}

pub fn parse_region<S: Scalar>(text: &str) -> Result<RegionDocument<S>, FormatError> {
    let v = parse_json(text)?;
    let doc = root(&v);
    if let Value::Object(map) = &v {
        if map.contains_key("minuend") || map.contains_key("subtrahend") {
            let obj = doc.object(&["labels", "minuend", "subtrahend", "measure", "subtrahend_within_minuend"])?;
            let labels = with_key(&doc, obj, "labels", |n| n.map(strings).transpose())?;
            let minuend = required(&doc, obj, "minuend", |n| region_file_node(n, labels.as_deref()))?;
            let subtrahend = required(&doc, obj, "subtrahend", |n| region_file_node(n, labels.as_deref()))?;
            if minuend.union.labels() != subtrahend.union.labels() {
                return fail("subtrahend.labels", "labels differ from the minuend");
            }
            return Ok(RegionDocument::Difference { minuend, subtrahend });
        }
    }
    Ok(RegionDocument::Union(region_file_node(doc, None)?))
}

fn number_value<S: Scalar>(v: &S) -> Value {
    let text = v.literal();
    if let Ok(i) = text.parse::<i64>() {
        return Value::from(i);
    }
    if S::EXACT {
        Value::String(text)
    } else {
        serde_json::Number::from_f64(v.to_f64_lossy()).map_or(Value::String(text), Value::Number)
    }
}

fn polytope_value<S: Scalar>(p: &HPolytope<S>) -> (Value, Value) {
    let a = p.matrix().iter().map(|row| Value::Array(row.iter().map(number_value).collect())).collect();
    let b = p.rhs().iter().map(number_value).collect();
    (Value::Array(a), Value::Array(b))
}

fn union_value<S: Scalar>(union: &RegionUnion<S>, provenance: &[String]) -> Value {
    let mut obj = Map::new();
    obj.insert("labels".into(), json!(union.labels()));
    match union.members() {
        [single] if provenance.len() <= 1 => {
            let (a, b) = polytope_value(single);
            obj.insert("A".into(), a);
            obj.insert("b".into(), b);
        }
        members => {
            let list = members
                .iter()
                .enumerate()
                .map(|(i, m)| {
                    let (a, b) = polytope_value(m);
                    let mut o = Map::new();
                    o.insert("A".into(), a);
                    o.insert("b".into(), b);
                    if let Some(t) = provenance.get(i) {
                        o.insert("topology".into(), Value::String(t.clone()));
                    }
                    Value::Object(o)
                })
                .collect();
            obj.insert("union".into(), Value::Array(list));
        }
    }
    if !provenance.is_empty() {
        obj.insert("provenance".into(), json!(provenance));
    }
    if union.labels().is_empty() {
        obj.insert("feasible".into(), Value::Bool(!union.is_empty()));
    }
    Value::Object(obj)
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json value serialises");
    s.push('\n');
    s
}

pub fn region_json<S: Scalar>(union: &RegionUnion<S>, provenance: &[String]) -> String {
    pretty(&union_value(union, provenance))
}

pub fn admissible_region_json<S: Scalar>(region: &AdmissibleRegion<S>) -> String {
    let provenance: Vec<String> = region.provenance.iter().map(ToString::to_string).collect();
    region_json(&region.region, &provenance)
}

pub fn difference_json<S: Scalar>(
    diff: &RegionDifference<S>,
    minuend_prov: &[String],
    subtrahend_prov: &[String],
) -> String {
    let mut obj = Map::new();
    obj.insert("labels".into(), json!(diff.labels()));
    obj.insert("minuend".into(), union_value(&diff.minuend, minuend_prov));
    obj.insert("subtrahend".into(), union_value(&diff.subtrahend, subtrahend_prov));
    pretty(&Value::Object(obj))
}

pub fn grid_region_json<S: Scalar>(region: &GridFlexibilityRegion<S>) -> String {
    let prov = |r: &AdmissibleRegion<S>| r.provenance.iter().map(ToString::to_string).collect::<Vec<_>>();
    difference_json(&region.difference, &prov(&region.active), &prov(&region.frozen))
}

impl<S: Scalar> RegionFile<S> {
    pub fn to_json(&self) -> String {
        region_json(&self.union, &self.provenance)
    }
}

/// Emptiness-preserving conversion of a parsed document into a difference.
impl<S: Scalar> RegionDocument<S> {
    pub fn into_difference(self) -> Result<RegionDifference<S>, PolytopeError> {
        match self {
            RegionDocument::Union(f) => {
                let labels = f.union.labels().to_vec();
                RegionDifference::new(f.union, RegionUnion::new(labels, vec![])?)
            }
            RegionDocument::Difference { minuend, subtrahend } => {
                RegionDifference::new(minuend.union, subtrahend.union)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NamedGenerator<S> {
    pub name: String,
    pub spec: GeneratorSpec<S>,
    pub dt: S,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LorpInput<S> {
    pub generators: Vec<GeneratorSpec<S>>,
    pub samples: Vec<S>,
    pub t: usize,
    pub tau: S,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlexSetInput<S> {
    pub spec: FlexSetSpec<S>,
    pub points: Vec<Vec<S>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TefInput<S> {
    pub model: ContingencyModel<S>,
    pub steps: usize,
}

/// Every metric section is optional; `tef` and `wdf` need a network.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricInputs<S> {
    pub generator_flex: Vec<NamedGenerator<S>>,
    pub lorp: Option<LorpInput<S>>,
    pub irre: Option<(NetLoadModel<S>, FlexDistribution<S>)>,
    pub pfd: Option<(Vec<S>, Vec<S>)>,
    pub flex_set: Option<FlexSetInput<S>>,
    pub tef: Option<TefInput<S>>,
    pub wdf: Option<BTreeMap<BusId, S>>,
}

impl<S> Default for MetricInputs<S> {
    fn default() -> Self {
        MetricInputs { generator_flex: vec![], lorp: None, irre: None, pfd: None, flex_set: None, tef: None, wdf: None }
    }
}

impl<S: Scalar> MetricInputs<S> {
    pub fn needs_network(&self) -> bool {
        self.tef.is_some() || self.wdf.is_some()
    }

    pub fn evaluate(&self, network: Option<&Network<S>>) -> Result<MetricReport, MetricError> {
        let mut report = MetricReport::default();
        for g in &self.generator_flex {
            report.push("generator_flex", g.name.clone(), &generator_flex(&g.spec, &g.dt)?);
        }
        if let Some(l) = &self.lorp {
            report.push(
                "lorp",
                format!("t={} tau={}", l.t, l.tau.literal()),
                &lorp(&l.generators, &l.samples, l.t, &l.tau)?,
            );
        }
        if let Some((model, dist)) = &self.irre {
            for (key, value) in irre(model, dist)? {
                report.push("irre", key.to_string(), &value);
            }
        }
        if let Some((available, required)) = &self.pfd {
            report.push("pfd", format!("{} periods", available.len()), &S::from_int(pfd(available, required)? as i64));
        }
        if let Some(f) = &self.flex_set {
            let set = active_flexibility_set(&f.spec)?;
            for (i, p) in f.points.iter().enumerate() {
                if p.len() != set.dim() {
                    return Err(MetricError::Invalid(format!(
                        "flex_set point {i} has {} coordinates, set has {}",
                        p.len(),
                        set.dim()
                    )));
                }
                report.push("flex_set_contains", format!("point {i}"), &S::from_int(i64::from(set.contains(p))));
            }
        }
        let need = || network.ok_or_else(|| MetricError::Invalid("a network is required".into()));
        if let Some(t) = &self.tef {
            report.push("tef", format!("{} steps", t.steps), &tef(need()?, &t.model, t.steps)?);
        }
        if let Some(injections) = &self.wdf {
            report.push(
                "weighted_distribution_factor",
                "base point",
                &weighted_distribution_factor(need()?, injections)?,
            );
        }
        Ok(report)
    }
}

fn generator_node<S: Scalar>(n: Node<'_>, extra: &[&str]) -> Result<GeneratorSpec<S>, FormatError> {
    let mut allowed = vec!["p_max", "p_min", "ramp_up", "ramp_down", "dispatch"];
    allowed.extend_from_slice(extra);
    let o = n.object(&allowed)?;
    Ok(GeneratorSpec {
        p_max: required(&n, o, "p_max", |v| v.number())?,
        p_min: required(&n, o, "p_min", |v| v.number())?,
        ramp_up: required(&n, o, "ramp_up", |v| v.number())?,
        ramp_down: required(&n, o, "ramp_down", |v| v.number())?,
        dispatch: with_key(&n, o, "dispatch", |v| v.map_or(Ok(vec![]), numbers))?,
    })
}

fn direction(n: Node<'_>) -> Result<Direction, FormatError> {
    match n.string()? {
        "up" => Ok(Direction::Up),
        "down" => Ok(Direction::Down),
        other => fail(n.field(), format!("expected \"up\" or \"down\", got {other:?}")),
    }
}

fn ramp_key(n: Node<'_>, o: &Map<String, Value>) -> Result<RampKey, FormatError> {
    let horizon = required(&n, o, "horizon", |v| v.unsigned())?;
    let horizon = u32::try_from(horizon).or_else(|_| fail(&child_path(n.path, "horizon"), "too large"))?;
    if horizon == 0 {
        return fail(&child_path(n.path, "horizon"), "horizon must be positive");
    }
    Ok(RampKey { horizon, direction: required(&n, o, "direction", direction)? })
}

fn block_node<S: Scalar>(n: Node<'_>) -> Result<ConstraintBlock<S>, FormatError> {
    let o = n.object(&["internal", "external", "rhs"])?;
    Ok(ConstraintBlock {
        internal: required(&n, o, "internal", matrix)?,
        external: required(&n, o, "external", matrix)?,
        rhs: required(&n, o, "rhs", numbers)?,
    })
}

pub fn parse_metric_inputs<S: Scalar>(text: &str) -> Result<MetricInputs<S>, FormatError> {
    let v = parse_json(text)?;
    let doc = root(&v);
    let obj = doc.object(&["generator_flex", "lorp", "irre", "pfd", "flex_set", "tef", "wdf"])?;
    let mut out = MetricInputs::default();

    out.generator_flex = with_key(&doc, obj, "generator_flex", |n| {
        n.map_or(Ok(vec![]), |n| {
            each(n, |g| {
                let spec = generator_node::<S>(g, &["name", "dt"])?;
                let Value::Object(o) = g.value else { unreachable!("checked by generator_node") };
                let name =
                    with_key(&g, o, "name", |v| v.map_or(Ok(String::new()), |v| v.string().map(str::to_string)))?;
                let dt = with_key(&g, o, "dt", |v| v.map_or(Ok(S::one()), |v| v.number()))?;
                Ok(NamedGenerator { name, spec, dt })
            })
        })
    })?;

    out.lorp = with_key(&doc, obj, "lorp", |n| {
        n.map(|n| {
            let o = n.object(&["generators", "samples", "t", "tau"])?;
            Ok(LorpInput {
                generators: required(&n, o, "generators", |g| each(g, |g| generator_node(g, &[])))?,
                samples: required(&n, o, "samples", numbers)?,
                t: with_key(&n, o, "t", |v| v.map_or(Ok(0), |v| v.unsigned()))? as usize,
                tau: required(&n, o, "tau", |v| v.number())?,
            })
        })
        .transpose()
    })?;

    out.irre = with_key(&doc, obj, "irre", |n| {
        n.map(|n| {
            let o = n.object(&["ramps", "afd"])?;
            let ramps = required(&n, o, "ramps", |r| {
                each(r, |r| {
                    let ro = r.object(&["horizon", "direction", "values"])?;
                    Ok((ramp_key(r, ro)?, required(&r, ro, "values", numbers)?))
                })
            })?;
            let afd = required(&n, o, "afd", |r| {
                each(r, |r| {
                    let ro = r.object(&["horizon", "direction", "breakpoints"])?;
                    let pts = required(&r, ro, "breakpoints", |b| {
                        each(b, |p| {
                            let pair: Vec<S> = numbers(p)?;
                            match <[S; 2]>::try_from(pair) {
                                Ok([x, y]) => Ok((x, y)),
                                Err(_) => fail(p.field(), "expected [x, value]"),
                            }
                        })
                    })?;
                    let step =
                        StepFunction::new(pts).or_else(|e| fail(&child_path(r.path, "breakpoints"), e.to_string()))?;
                    Ok((ramp_key(r, ro)?, step))
                })
            })?;
            Ok((
                NetLoadModel { samples: BTreeMap::new(), ramps: ramps.into_iter().collect() },
                FlexDistribution { afd: afd.into_iter().collect() },
            ))
        })
        .transpose()
    })?;

    out.pfd = with_key(&doc, obj, "pfd", |n| {
        n.map(|n| {
            let o = n.object(&["available", "required"])?;
            Ok((required(&n, o, "available", numbers)?, required(&n, o, "required", numbers)?))
        })
        .transpose()
    })?;

    out.flex_set = with_key(&doc, obj, "flex_set", |n| {
        n.map(|n| {
            let o = n.object(&["internal_labels", "external_labels", "normal", "contingencies", "points"])?;
            Ok(FlexSetInput {
                spec: FlexSetSpec {
                    internal_labels: required(&n, o, "internal_labels", strings)?,
                    external_labels: required(&n, o, "external_labels", strings)?,
                    normal: required(&n, o, "normal", block_node)?,
                    contingencies: with_key(&n, o, "contingencies", |c| c.map_or(Ok(vec![]), |c| each(c, block_node)))?,
                },
                points: with_key(&n, o, "points", |p| p.map_or(Ok(vec![]), matrix))?,
            })
        })
        .transpose()
    })?;

    out.tef = with_key(&doc, obj, "tef", |n| {
        n.map(|n| {
            let o = n.object(&["outages", "medium_load", "high_load", "load_shares", "generation", "steps"])?;
            let outages = required(&n, o, "outages", |c| {
                each(c, |c| {
                    let co = c.object(&["lines", "probability"])?;
                    Ok(Outage {
                        lines: required(&c, co, "lines", strings)?.into_iter().map(LineId).collect(),
                        probability: required(&c, co, "probability", |v| v.number())?,
                    })
                })
            })?;
            let shares = required(&n, o, "load_shares", |s| {
                let Value::Object(map) = s.value else {
                    return fail(s.field(), "expected an object");
                };
                map.iter()
                    .map(|(bus, value)| {
                        let path = child_path(s.path, bus);
                        Ok((BusId(bus.clone()), Node { value, path: &path }.number()?))
                    })
                    .collect::<Result<BTreeMap<_, _>, _>>()
            })?;
            Ok(TefInput {
                model: ContingencyModel {
                    outages,
                    medium_load: required(&n, o, "medium_load", |v| v.number())?,
                    high_load: required(&n, o, "high_load", |v| v.number())?,
                    load_shares: shares,
                    generation: required(&n, o, "generation", bounds_map)?,
                },
                steps: with_key(&n, o, "steps", |v| v.map_or(Ok(DEFAULT_TEF_STEPS as u64), |v| v.unsigned()))? as usize,
            })
        })
        .transpose()
    })?;

    out.wdf = with_key(&doc, obj, "wdf", |n| {
        n.map(|n| {
            let o = n.object(&["injections"])?;
            with_key(&n, o, "injections", |i| {
                let Some(i) = i else { return Ok(BTreeMap::new()) };
                let Value::Object(map) = i.value else {
                    return fail(i.field(), "expected an object");
                };
                map.iter()
                    .map(|(bus, value)| {
                        let path = child_path(i.path, bus);
                        Ok((BusId(bus.clone()), Node { value, path: &path }.number()?))
                    })
                    .collect()
            })
        })
        .transpose()
    })?;
    Ok(out)
}
