use std::fmt::Write;

use flexreg::io::{
    admissible_region_json, grid_region_json, parse_metric_inputs, MetricInputs, RegionDocument, RegionFile,
};
use flexreg::polytope::{bounding_box, MeasureEstimate};
use flexreg::regions::{admissible_region_onto, grid_side_keys};
use flexreg::{
    area_2d, grid_flexibility_region, mc_measure, vertices_2d, HPolytope, PolytopeError, Rational, RegionUnion, Scalar,
};
use serde_json::{json, Value};

use crate::error::{CliError, EXIT_INFEASIBLE};
use crate::{load, output, svg, Format, GridRegionArgs, MetricsArgs, PlotArgs, RegionArgs};

pub fn region(a: &RegionArgs) -> Result<i32, CliError> {
    if load::exact_mode(&a.input.network)? {
        region_in::<Rational>(a)
    } else {
        region_in::<f64>(a)
    }
}

fn region_in<S: Scalar>(a: &RegionArgs) -> Result<i32, CliError> {
    let p = load::problem::<S>(&a.input)?;
    let keep = match &a.keep {
        Some(k) => load::list("keep", k)?,
        None => p
            .network
            .buses
            .iter()
            .filter(|b| p.classification.uncertain.contains(&b.id))
            .map(|b| b.label.clone())
            .collect(),
    };
    let ar = admissible_region_onto(&p.network, &p.classification, &p.resources, &keep)?;
    if ar.feasibility_verdict() == Some(false) {
        return Err(CliError::new(
            EXIT_INFEASIBLE,
            "infeasible",
            "no operating point satisfies the security constraints",
        ));
    }
    let provenance: Vec<String> = ar.provenance.iter().map(ToString::to_string).collect();
    let text = match a.output.format {
        Format::Json => admissible_region_json(&ar),
        Format::Table => union_table("admissible region", &ar.region, &provenance)?,
        Format::Svg => {
            let doc = RegionDocument::Union(RegionFile { union: ar.region.clone(), provenance });
            svg::render(doc.labels(), &svg::document_layers(&doc)?)
        }
    };
    output::emit(a.output.out.as_deref(), &text)?;
    Ok(0)
}

fn term<S: Scalar>(c: &S, label: &str, first: bool) -> String {
    let neg = c.is_negative();
    let mag = c.abs();
    let body = if mag == S::one() { label.to_string() } else { format!("{}*{label}", mag.literal()) };
    match (first, neg) {
        (true, false) => body,
        (true, true) => format!("-{body}"),
        (false, false) => format!(" + {body}"),
        (false, true) => format!(" - {body}"),
    }
}

fn row_text<S: Scalar>(labels: &[String], row: &[S], b: &S) -> String {
    let mut s = String::new();
    for (c, l) in row.iter().zip(labels) {
        if !c.is_zero() {
            s.push_str(&term(c, l, s.is_empty()));
        }
    }
    if s.is_empty() {
        s.push('0');
    }
    format!("{s} <= {}", b.literal())
}

fn polytope_table<S: Scalar>(out: &mut String, poly: &HPolytope<S>) -> Result<(), CliError> {
    for (row, b) in poly.rows() {
        let _ = writeln!(out, "  {}", row_text(poly.labels(), row, b));
    }
    if poly.dim() == 2 {
        match vertices_2d(poly) {
            Ok(v) => {
                let pts: Vec<String> = v.iter().map(|[x, y]| format!("({}, {})", x.literal(), y.literal())).collect();
                let _ = writeln!(out, "  vertices: {}", pts.join(" "));
                let _ = writeln!(out, "  area: {}", area_2d(poly)?.literal());
            }
            Err(PolytopeError::Unbounded(axis)) => {
                let _ = writeln!(out, "  unbounded along {axis}");
            }
            Err(e) => return Err(e.into()),
        }
    }
    Ok(())
}

fn union_table<S: Scalar>(title: &str, union: &RegionUnion<S>, provenance: &[String]) -> Result<String, CliError> {
    let mut out = String::new();
    let _ = writeln!(out, "{title} over ({}), {} member(s)", union.labels().join(", "), union.members().len());
    for (i, m) in union.members().iter().enumerate() {
        let topo = provenance.get(i).map(|t| format!(" topology {t}")).unwrap_or_default();
        let _ = writeln!(out, "member {i}{topo}, {} rows", m.n_rows());
        polytope_table(&mut out, m)?;
    }
    Ok(out)
}

pub fn grid_region(a: &GridRegionArgs) -> Result<i32, CliError> {
    if load::exact_mode(&a.input.network)? {
        grid_region_in::<Rational>(a)
    } else {
        grid_region_in::<f64>(a)
    }
}

fn grid_region_in<S: Scalar>(a: &GridRegionArgs) -> Result<i32, CliError> {
    let p = load::problem::<S>(&a.input)?;
    let frozen = match &a.frozen {
        Some(f) => load::list("frozen", f)?,
        None => grid_side_keys(&p.resources),
    };
    log::info!("freezing {}", if frozen.is_empty() { "nothing".to_string() } else { frozen.join(", ") });
    let gr = grid_flexibility_region(&p.network, &p.classification, &p.resources, &frozen)?;
    let certified = gr.frozen_within_active()?;
    let measure = if a.sampling.samples > 0 && !gr.difference.labels().is_empty() {
        match bounding_box((&gr.difference).into()) {
            Ok(bbox) => Some(mc_measure((&gr.difference).into(), &bbox, a.sampling.samples, a.sampling.seed)?),
            Err(e) => {
                log::warn!("measure skipped: {e}");
                None
            }
        }
    } else {
        None
    };

    let text = match a.output.format {
        Format::Json => {
            let mut v: Value = serde_json::from_str(&grid_region_json(&gr)).expect("own output parses");
            let obj = v.as_object_mut().expect("object");
            obj.insert("subtrahend_within_minuend".into(), Value::Bool(certified));
            if let Some(m) = &measure {
                obj.insert("measure".into(), measure_json(m, a.sampling.seed));
            }
            serde_json::to_string_pretty(&v).expect("serialises") + "\n"
        }
        Format::Table => {
            let prov =
                |r: &flexreg::AdmissibleRegion<S>| r.provenance.iter().map(ToString::to_string).collect::<Vec<_>>();
            let mut out = union_table("active region", &gr.active.region, &prov(&gr.active))?;
            out.push_str(&union_table("frozen region", &gr.frozen.region, &prov(&gr.frozen))?);
            let _ = writeln!(
                out,
                "frozen region within active region: {}",
                if certified { "certified" } else { "not certified" }
            );
            if let Some(m) = &measure {
                let _ = writeln!(
                    out,
                    "grid-side region measure: {:.6} +/- {:.6} ({} of {} samples, seed {})",
                    m.value, m.std_error, m.hits, m.samples, a.sampling.seed
                );
            }
            out
        }
        Format::Svg => {
            let prov =
                |r: &flexreg::AdmissibleRegion<S>| r.provenance.iter().map(ToString::to_string).collect::<Vec<_>>();
            let doc = RegionDocument::Difference {
                minuend: RegionFile { union: gr.active.region.clone(), provenance: prov(&gr.active) },
                subtrahend: RegionFile { union: gr.frozen.region.clone(), provenance: prov(&gr.frozen) },
            };
            svg::render(doc.labels(), &svg::document_layers(&doc)?)
        }
    };
    output::emit(a.output.out.as_deref(), &text)?;
    Ok(0)
}

fn measure_json(m: &MeasureEstimate, seed: u64) -> Value {
    json!({ "value": m.value, "std_error": m.std_error, "hits": m.hits, "samples": m.samples, "seed": seed })
}

pub fn metrics(a: &MetricsArgs) -> Result<i32, CliError> {
    if a.float {
        metrics_in::<f64>(a)
    } else {
        metrics_in::<Rational>(a)
    }
}

fn metrics_in<S: Scalar>(a: &MetricsArgs) -> Result<i32, CliError> {
    let inputs: MetricInputs<S> =
        parse_metric_inputs(&load::read(&a.input)?).map_err(|e| CliError::format(&a.input, e))?;
    let network = match &a.network {
        Some(p) => Some(load::network::<S>(p)?.0),
        None if inputs.needs_network() => {
            return Err(CliError::input("tef and wdf sections need --network").at(&a.input));
        }
        None => None,
    };
    let report = inputs.evaluate(network.as_ref())?;
    let text = match a.output.format {
        Format::Json => report.to_json() + "\n",
        Format::Table => report.to_table(),
        Format::Svg => return Err(CliError::input("metrics support json and table output")),
    };
    output::emit(a.output.out.as_deref(), &text)?;
    Ok(0)
}

pub fn plot(a: &PlotArgs) -> Result<i32, CliError> {
    let doc = load::region::<Rational>(&a.region)?;
    let layers = svg::document_layers(&doc).map_err(|e| e.at(&a.region))?;
    output::emit(a.out.as_deref(), &svg::render(doc.labels(), &layers))?;
    Ok(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rows_read_naturally() {
        let labels = vec!["P1".to_string(), "P2".to_string()];
        let r = |a: i64, b: i64| vec![Rational::from_int(a), Rational::from_int(b)];
        assert_eq!(row_text(&labels, &r(2, 1), &Rational::from_int(3)), "2*P1 + P2 <= 3");
        assert_eq!(row_text(&labels, &r(-1, -2), &Rational::from_int(6)), "-P1 - 2*P2 <= 6");
        assert_eq!(row_text(&labels, &r(0, 1), &Rational::ratio(13, 2)), "P2 <= 13/2");
    }
}
