//! Brute-force cross-checks reported as PASS/FAIL lines.

use std::fmt::Write;

use flexreg::io::RegionDocument;
use flexreg::polytope::{bounding_box, containment_witness, BoundingBox, Witness};
use flexreg::regions::device_label;
use flexreg::{
    admissible_region, area_2d, build_essr, contains_polytope, enumerate_topologies, mc_measure, project, FlexResource,
    HPolytope, PolytopeError, Rational, Scalar,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::error::{CliError, EXIT_FAILURE};
use crate::load::{self, Problem};
use crate::{output, Format, NetworkInput, OracleArgs, OracleKind};

struct Check {
    name: String,
    pass: bool,
    detail: String,
}

fn check(name: impl Into<String>, pass: bool, detail: impl Into<String>) -> Check {
    Check { name: name.into(), pass, detail: detail.into() }
}

pub fn run(a: &OracleArgs) -> Result<i32, CliError> {
    let checks = match a.kind {
        OracleKind::Sampling => sampling(a)?,
        OracleKind::Equal => equal(a)?,
        OracleKind::Projection | OracleKind::FactsSweep => {
            let input = network_input(a)?;
            let exact = load::exact_mode(&input.network)?;
            match (a.kind, exact) {
                (OracleKind::Projection, true) => projection::<Rational>(a, &load::problem(&input)?)?,
                (OracleKind::Projection, false) => projection::<f64>(a, &load::problem(&input)?)?,
                (_, true) => facts_sweep::<Rational>(a, &load::problem(&input)?)?,
                (_, false) => facts_sweep::<f64>(a, &load::problem(&input)?)?,
            }
        }
    };
    let all = checks.iter().all(|c| c.pass);
    let text = match a.output.format {
        Format::Json => {
            let list: Vec<_> =
                checks.iter().map(|c| json!({ "name": c.name, "pass": c.pass, "detail": c.detail })).collect();
            serde_json::to_string_pretty(&json!({ "checks": list, "pass": all })).expect("serialises") + "\n"
        }
        Format::Table => {
            let mut s = String::new();
            for c in &checks {
                let _ = writeln!(s, "{} {}: {}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            s
        }
        Format::Svg => return Err(CliError::input("oracle reports are json or table")),
    };
    output::emit(a.output.out.as_deref(), &text)?;
    Ok(if all { 0 } else { EXIT_FAILURE })
}

fn network_input(a: &OracleArgs) -> Result<NetworkInput, CliError> {
    Ok(NetworkInput {
        network: a.network.clone().ok_or_else(|| CliError::input("this oracle needs --network"))?,
        classification: a.classification.clone(),
        resources: a.resources.clone(),
    })
}

fn region_arg(a: &OracleArgs, which: &str) -> Result<RegionDocument<Rational>, CliError> {
    let path = if which == "region" { &a.region } else { &a.against };
    let path = path.as_ref().ok_or_else(|| CliError::input(format!("this oracle needs --{which}")))?;
    load::region(path)
}

fn point_text<S: Scalar>(p: &[S]) -> String {
    format!("({})", p.iter().map(Scalar::literal).collect::<Vec<_>>().join(", "))
}

/// Shoelace area of each planar member against its sampled measure.
fn sampling(a: &OracleArgs) -> Result<Vec<Check>, CliError> {
    let RegionDocument::Union(file) = region_arg(a, "region")? else {
        return Err(CliError::input("the sampling oracle takes a union region file"));
    };
    if file.union.labels().len() != 2 {
        return Err(CliError::input("the sampling oracle needs a planar region"));
    }
    let mut out = Vec::new();
    for (i, m) in file.union.members().iter().enumerate() {
        let exact = area_2d(m)?.to_f64_lossy();
        let bbox = bounding_box(m.into())?;
        let est = mc_measure(m.into(), &bbox, a.sampling.samples, a.sampling.seed)?;
        let gap = (est.value - exact).abs();
        let pass = gap <= 3.0 * est.std_error + 1e-12 * exact.abs().max(1.0);
        out.push(check(
            format!("member {i} area"),
            pass,
            format!(
                "shoelace {exact} vs sampled {:.6} +/- {:.6} ({} samples, seed {})",
                est.value, est.std_error, est.samples, a.sampling.seed
            ),
        ));
    }
    Ok(out)
}

fn witness_text<S: Scalar>(outer: &HPolytope<S>, w: &Witness<S>) -> String {
    let row: Vec<String> = outer.matrix()[w.row].iter().map(Scalar::literal).collect();
    match (&w.point, &w.attained) {
        (Some(p), Some(v)) => format!(
            "row {} [{}] <= {} violated: witness {} reaches {}",
            w.row,
            row.join(" "),
            w.bound.literal(),
            point_text(p),
            v.literal()
        ),
        _ => format!("row {} [{}] <= {} is unbounded over the other region", w.row, row.join(" "), w.bound.literal()),
    }
}

/// Member-wise equality of two region files.
fn equal(a: &OracleArgs) -> Result<Vec<Check>, CliError> {
    let left = region_arg(a, "region")?;
    let right = region_arg(a, "against")?;
    if left.labels() != right.labels() {
        return Err(CliError::input(format!("labels differ: {:?} vs {:?}", left.labels(), right.labels())));
    }
    let (RegionDocument::Union(l), RegionDocument::Union(r)) = (left, right) else {
        return Err(CliError::input("the equal oracle takes union region files"));
    };
    let (lm, rm) = (l.union.members(), r.union.members());
    if lm.len() != rm.len() {
        return Ok(vec![check("member count", false, format!("{} vs {}", lm.len(), rm.len()))]);
    }
    let mut out = Vec::new();
    for (i, (x, y)) in lm.iter().zip(rm).enumerate() {
        let failures: Vec<String> = [(x, y, "second inside first"), (y, x, "first inside second")]
            .into_iter()
            .filter_map(|(outer, inner, what)| {
                containment_witness(outer, inner)
                    .map(|w| w.map(|w| format!("{what}: {}", witness_text(outer, &w))))
                    .transpose()
            })
            .collect::<Result<_, PolytopeError>>()?;
        let detail = if failures.is_empty() { "mutual containment".to_string() } else { failures.join("; ") };
        out.push(check(format!("member {i} equal"), failures.is_empty(), detail));
    }
    Ok(out)
}

fn sample_points(bbox: &BoundingBox, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| bbox.lower.iter().zip(&bbox.upper).map(|(lo, hi)| lo + (hi - lo) * rng.random::<f64>()).collect())
        .collect()
}

/// Box around `bbox` widened by a tenth of each side.
fn widened(bbox: &BoundingBox) -> BoundingBox {
    let (lower, upper) = bbox
        .lower
        .iter()
        .zip(&bbox.upper)
        .map(|(lo, hi)| {
            let pad = (hi - lo) / 10.0;
            (lo - pad, hi + pad)
        })
        .unzip();
    BoundingBox { lower, upper }
}

fn to_scalar<S: Scalar>(p: &[f64]) -> Vec<S> {
    p.iter().map(|v| S::from_f64(*v).expect("finite sample")).collect()
}

/// Membership against direct LP completion of the security system.
fn projection<S: Scalar>(a: &OracleArgs, p: &Problem<S>) -> Result<Vec<Check>, CliError> {
    let ar = admissible_region(&p.network, &p.classification, &p.resources)?;
    if ar.labels().is_empty() {
        return Err(CliError::input("no uncertain injections to sample"));
    }
    let states = enumerate_topologies(&p.network, &p.resources, true)?;
    let systems = states
        .iter()
        .map(|s| build_essr(&p.network, &p.classification, &p.resources, s))
        .collect::<Result<Vec<_>, _>>()?;
    let bbox = widened(&bounding_box((&ar.region).into())?);
    let mut disagreements = 0usize;
    let mut first = None;
    let mut inside = 0usize;
    for pt in sample_points(&bbox, a.points, a.sampling.seed) {
        let x: Vec<S> = to_scalar(&pt);
        let fixed: Vec<(String, S)> = ar.labels().iter().cloned().zip(x.iter().cloned()).collect();
        let mut completes = false;
        for essr in &systems {
            completes = match essr.polytope.fix(&fixed) {
                Ok(rest) => rest.is_feasible()?,
                Err(PolytopeError::Empty) => false,
                Err(e) => return Err(e.into()),
            };
            if completes {
                break;
            }
        }
        let member = ar.contains(&x);
        inside += usize::from(member);
        if member != completes {
            disagreements += 1;
            first.get_or_insert_with(|| point_text(&x));
        }
    }
    let mut detail =
        format!("{disagreements} disagreements over {} points ({inside} inside, seed {})", a.points, a.sampling.seed);
    if let Some(w) = first {
        let _ = write!(detail, "; first at {w}");
    }
    Ok(vec![check("projection membership", disagreements == 0, detail)])
}

/// FACTS region on the base topology against fixed-setting projections.
fn facts_sweep<S: Scalar>(a: &OracleArgs, p: &Problem<S>) -> Result<Vec<Check>, CliError> {
    let devices: Vec<(&flexreg::LineId, &S)> = p
        .resources
        .iter()
        .filter_map(|r| match r {
            FlexResource::SeriesFacts { host_line, capacity } => Some((host_line, capacity)),
            _ => None,
        })
        .collect();
    let [(host, capacity)] = devices.as_slice() else {
        return Err(CliError::input(format!(
            "the sweep needs exactly one series_facts resource, found {}",
            devices.len()
        )));
    };
    if p.resources.iter().any(|r| matches!(r, FlexResource::SwitchableLine { .. } | FlexResource::CandidateLine { .. }))
    {
        return Err(CliError::input("the sweep runs on the base topology; remove switching and candidate resources"));
    }
    if a.steps == 0 {
        return Err(CliError::input("--steps must be positive"));
    }
    let essr = build_essr(&p.network, &p.classification, &p.resources, &p.network.base_state())?;
    let keep = essr.uncertain.clone();
    let region = project(&essr.polytope, &keep)?;
    let steps = i64::from(a.steps);
    let device = device_label(host);
    let slices = (-steps..=steps)
        .map(|k| {
            let u = (*capacity).clone() * S::ratio(k, steps);
            match essr.polytope.fix(&[(device.clone(), u)]) {
                Ok(fixed) => match project(&fixed, &keep) {
                    Ok(s) => Ok(Some(s)),
                    Err(PolytopeError::Empty) => Ok(None),
                    Err(e) => Err(e),
                },
                Err(PolytopeError::Empty) => Ok(None),
                Err(e) => Err(e),
            }
        })
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .flatten()
        .collect::<Vec<_>>();

    let mut outside = 0;
    for s in &slices {
        if !contains_polytope(&region, s)? {
            outside += 1;
        }
    }
    let contained = check(
        "sweep slices inside region",
        outside == 0,
        format!("{} of {} slices escape the projected region", outside, slices.len()),
    );

    let bbox = bounding_box((&region).into())?;
    let fregion: HPolytope<f64> = region.convert();
    let fslices: Vec<HPolytope<f64>> = slices.iter().map(HPolytope::convert).collect();
    let (mut inside, mut missed) = (0u64, 0u64);
    for pt in sample_points(&bbox, a.sampling.samples as usize, a.sampling.seed) {
        if fregion.contains(&pt) {
            inside += 1;
            if !fslices.iter().any(|s| s.contains(&pt)) {
                missed += 1;
            }
        }
    }
    let fraction = if inside == 0 { 0.0 } else { missed as f64 / inside as f64 };
    let covered = check(
        "sweep covers region",
        inside > 0 && fraction <= a.tolerance,
        format!(
            "uncovered fraction {fraction:.6} (tolerance {}) over {inside} region samples, {} settings of {device}",
            a.tolerance,
            2 * steps + 1
        ),
    );
    Ok(vec![contained, covered])
}
