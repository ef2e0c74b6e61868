//! Region construction checked against direct LP feasibility of the
//! security system, plus network sensitivity properties.

use std::collections::BTreeMap;

use flexreg::polytope::project;
use flexreg::regions::{admissible_region_onto, freeze, grid_side_keys};
use flexreg::{
    admissible_region, build_essr, contains_polytope, dc_sensitivity, enumerate_topologies, grid_flexibility_region,
    region_equal, Bus, BusId, FlexResource, HPolytope, InjectionBounds, InjectionClassification, Line, Network,
    PolytopeError, Rational, Scalar, TopologyState,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn q(n: i64) -> Rational {
    Rational::from_int(n)
}

fn qr(n: i64, d: i64) -> Rational {
    Rational::ratio(n, d)
}

fn buses(n: usize) -> Vec<Bus> {
    (1..=n).map(|i| Bus { id: BusId(i.to_string()), label: format!("P{i}") }).collect()
}

fn three_bus() -> (Network<Rational>, InjectionClassification<Rational>) {
    let net = Network::new(
        buses(3),
        "3",
        vec![
            Line::new("L12", "1", "2", q(1), q(2)),
            Line::new("L23", "2", "3", q(1), q(2)),
            Line::new("L13", "1", "3", q(1), q(1)).switchable(),
        ],
    );
    let bounds =
        (1..=3).map(|i| (BusId(i.to_string()), InjectionBounds { p_min: Some(q(-4)), p_max: Some(q(4)) })).collect();
    (net, InjectionClassification { controllable: vec![], uncertain: vec!["1".into(), "2".into()], bounds })
}

fn facts(capacity: Rational) -> FlexResource<Rational> {
    FlexResource::SeriesFacts { host_line: "L13".into(), capacity }
}

/// Some completion of the security system exists with the uncertain
/// injections pinned to `point`.
fn essr_feasible(
    net: &Network<Rational>,
    cls: &InjectionClassification<Rational>,
    resources: &[FlexResource<Rational>],
    state: &TopologyState,
    point: &[Rational],
) -> bool {
    let essr = build_essr(net, cls, resources, state).unwrap();
    let fixed: Vec<(String, Rational)> = essr.uncertain.iter().cloned().zip(point.iter().cloned()).collect();
    match essr.polytope.fix(&fixed) {
        Ok(rest) => rest.is_feasible().unwrap(),
        Err(PolytopeError::Empty) => false,
        Err(e) => panic!("{e}"),
    }
}

fn in_some_topology(
    net: &Network<Rational>,
    cls: &InjectionClassification<Rational>,
    resources: &[FlexResource<Rational>],
    point: &[Rational],
) -> bool {
    enumerate_topologies(net, resources, true).unwrap().iter().any(|s| essr_feasible(net, cls, resources, s, point))
}

fn random_points(seed: u64, n: usize, half_width: i64) -> Vec<Vec<Rational>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| (0..2).map(|_| qr(rng.random_range(-half_width * 20..=half_width * 20), 20)).collect()).collect()
}

#[test]
fn switching_union_matches_per_topology_lp() {
    let (net, cls) = three_bus();
    let res = vec![FlexResource::SwitchableLine { line: "L13".into() }];
    let ar = admissible_region(&net, &cls, &res).unwrap();
    for p in random_points(11, 1000, 5) {
        assert_eq!(ar.contains(&p), in_some_topology(&net, &cls, &res, &p), "{p:?}");
    }
}

#[test]
fn facts_region_matches_direct_lp() {
    let (net, cls) = three_bus();
    let res = vec![facts(qr(1, 2))];
    let ar = admissible_region(&net, &cls, &res).unwrap();
    for p in random_points(12, 600, 5) {
        assert_eq!(ar.contains(&p), in_some_topology(&net, &cls, &res, &p), "{p:?}");
    }
}

#[test]
fn difference_matches_two_lp_membership() {
    let (net, cls) = three_bus();
    let res = vec![facts(qr(1, 2))];
    let gr = grid_flexibility_region(&net, &cls, &res, &grid_side_keys(&res)).unwrap();
    let frozen = freeze(&res, &grid_side_keys(&res)).unwrap();
    let base = net.base_state();
    let mut hits = 0;
    for p in random_points(13, 1000, 4) {
        let direct = essr_feasible(&net, &cls, &res, &base, &p) && !essr_feasible(&net, &cls, &frozen, &base, &p);
        assert_eq!(gr.contains(&p), direct, "{p:?}");
        hits += usize::from(direct);
    }
    assert!(hits > 0);
}

/// Union of fixed-device-setting projections on a u grid.
fn u_sweep(net: &Network<Rational>, cls: &InjectionClassification<Rational>, steps: i64) -> Vec<HPolytope<Rational>> {
    let essr = build_essr(net, cls, &[facts(qr(1, 2))], &net.base_state()).unwrap();
    let keep = vec!["P1".to_string(), "P2".to_string()];
    (-steps..=steps)
        .map(|k| {
            let u = qr(k, 2 * steps);
            project(&essr.polytope.fix(&[("u_L13".into(), u)]).unwrap(), &keep).unwrap()
        })
        .collect()
}

#[test]
fn facts_region_matches_u_sweep() {
    let (net, cls) = three_bus();
    let region = admissible_region(&net, &cls, &[facts(qr(1, 2))]).unwrap();
    let f = &region.region.members()[0];
    let slices = u_sweep(&net, &cls, 5);
    for s in &slices {
        assert!(contains_polytope(f, s).unwrap());
    }
    // area missed by the discrete sweep
    let (mut inside, mut missed) = (0u32, 0u32);
    for i in -80..=80 {
        for j in -100..=100 {
            let p = [qr(i, 20), qr(j, 20)];
            if f.contains(&p) {
                inside += 1;
                if !slices.iter().any(|s| s.contains(&p)) {
                    missed += 1;
                }
            }
        }
    }
    assert!(f64::from(missed) / f64::from(inside) < 0.01, "{missed}/{inside}");
}

#[test]
fn zero_capacity_equivalence() {
    let (net, cls) = three_bus();
    let res = vec![facts(q(0))];
    let gr = grid_flexibility_region(&net, &cls, &res, &grid_side_keys(&res)).unwrap();
    assert!(region_equal(&gr.active.region.members()[0], &gr.frozen.region.members()[0]).unwrap());
}

#[test]
fn keep_list_may_include_controllables() {
    let (net, mut cls) = three_bus();
    cls.uncertain = vec!["1".into()];
    cls.controllable = vec!["2".into()];
    let both = admissible_region_onto(&net, &cls, &[], &["P1".to_string(), "P2".to_string()]).unwrap();
    let (_, full) = three_bus();
    let hex = admissible_region(&net, &full, &[]).unwrap();
    assert!(region_equal(&both.region.members()[0], &hex.region.members()[0]).unwrap());
    let only = admissible_region(&net, &cls, &[]).unwrap();
    assert_eq!(only.labels(), &["P1"]);
    assert_eq!(only.region.members()[0].extents().unwrap(), vec![(q(-3), q(3))]);
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 20, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn enlarging_resources_never_shrinks(
        c1 in 0i64..=8, extra in 0i64..=8,
        lo in -4i64..=0, hi in 0i64..=4, widen in 0i64..=3,
        limits in prop::collection::vec(1i64..=4, 3),
    ) {
        let (mut net, mut cls) = three_bus();
        for (l, lim) in net.lines.iter_mut().zip(&limits) {
            l.flow_min = Some(q(-lim));
            l.flow_max = Some(q(*lim));
        }
        cls.uncertain = vec!["1".into()];
        cls.controllable = vec!["2".into()];
        let inj = |w: i64| FlexResource::ControllableInjection { bus: "2".into(), p_min: Some(q(lo - w)), p_max: Some(q(hi + w)) };
        let small = admissible_region(&net, &cls, &[facts(qr(c1, 4)), inj(0)]).unwrap();
        let large = admissible_region(&net, &cls, &[facts(qr(c1 + extra, 4)), inj(widen)]).unwrap();
        prop_assert!(contains_polytope(&large.region.members()[0], &small.region.members()[0]).unwrap());
    }
}

/// Connected random network: a spanning path in random order plus chords.
fn random_network(seed: u64) -> Network<Rational> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(3..=6usize);
    let mut order: Vec<usize> = (1..=n).collect();
    for i in (1..n).rev() {
        order.swap(i, rng.random_range(0..=i));
    }
    let mut lines = Vec::new();
    for w in order.windows(2) {
        let id = format!("L{}", lines.len());
        lines.push(Line::new(&id, &w[0].to_string(), &w[1].to_string(), q(rng.random_range(1..=5)), q(10)));
    }
    for _ in 0..rng.random_range(0..=n) {
        let (a, b) = (rng.random_range(1..=n), rng.random_range(1..=n));
        if a != b {
            let id = format!("L{}", lines.len());
            lines.push(Line::new(&id, &a.to_string(), &b.to_string(), qr(rng.random_range(1..=9), 2), q(10)));
        }
    }
    Network::new(buses(n), &rng.random_range(1..=n).to_string(), lines)
}

#[test]
fn sensitivities_satisfy_kirchhoff() {
    for seed in 0..30 {
        let net = random_network(seed);
        let map = dc_sensitivity(&net, &net.base_state()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed + 100);
        let p: Vec<Rational> = map.buses.iter().map(|_| qr(rng.random_range(-50..=50), 7)).collect();
        let flows = map.flows(&p);
        let mut net_out = vec![q(0); net.buses.len()];
        for (r, &k) in map.lines.iter().enumerate() {
            let line = &net.lines[k];
            let f = net.bus_index(&line.from_bus).unwrap();
            let t = net.bus_index(&line.to_bus).unwrap();
            net_out[f] = net_out[f].clone() + flows[r].clone();
            net_out[t] = net_out[t].clone() - flows[r].clone();
        }
        for (c, &bus) in map.buses.iter().enumerate() {
            assert_eq!(net_out[bus], p[c], "seed {seed} bus {bus}");
        }

        // f64 mode agrees within tolerance
        let float_net: Network<f64> = Network {
            buses: net.buses.clone(),
            reference_buses: net.reference_buses.clone(),
            lines: net
                .lines
                .iter()
                .map(|l| Line {
                    id: l.id.clone(),
                    from_bus: l.from_bus.clone(),
                    to_bus: l.to_bus.clone(),
                    susceptance: l.susceptance.to_f64_lossy(),
                    flow_min: l.flow_min.as_ref().map(Scalar::to_f64_lossy),
                    flow_max: l.flow_max.as_ref().map(Scalar::to_f64_lossy),
                    in_service: l.in_service,
                    switchable: l.switchable,
                    candidate: l.candidate,
                })
                .collect(),
        };
        let fmap = dc_sensitivity(&float_net, &float_net.base_state()).unwrap();
        for (row, frow) in map.matrix.iter().zip(&fmap.matrix) {
            for (a, b) in row.iter().zip(frow) {
                assert!((a.to_f64_lossy() - b).abs() < 1e-9);
            }
        }
    }
}

#[test]
fn sensitivities_follow_line_order() {
    for seed in 0..20 {
        let net = random_network(seed);
        let map = dc_sensitivity(&net, &net.base_state()).unwrap();
        let mut reversed = net.clone();
        reversed.lines.reverse();
        let rmap = dc_sensitivity(&reversed, &reversed.base_state()).unwrap();
        let by_id = |n: &Network<Rational>, m: &flexreg::FlowMap<Rational>| -> BTreeMap<String, Vec<Rational>> {
            m.lines.iter().enumerate().map(|(r, &k)| (n.lines[k].id.0.clone(), m.matrix[r].clone())).collect()
        };
        assert_eq!(by_id(&net, &map), by_id(&reversed, &rmap));

        // remove the last line and add it back
        let mut trimmed = net.clone();
        let last = trimmed.lines.pop().unwrap();
        if trimmed.is_connected(&trimmed.base_state()).unwrap() {
            dc_sensitivity(&trimmed, &trimmed.base_state()).unwrap();
        }
        trimmed.lines.push(last);
        assert_eq!(dc_sensitivity(&trimmed, &trimmed.base_state()).unwrap(), map);
    }
}
