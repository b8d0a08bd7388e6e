//! Protocol behavior on small hand-built topologies and short seeded runs.

use std::collections::HashSet;

use termite_hill::baselines::{AodvLite, AodvParams, FfParams, FloodedForward, ScParams, SensorDriven};
use termite_hill::net::{Area, ChargeKind, Energy, NetworkConfig, PlacementPolicy, Position};
use termite_hill::termite::{compute_reward, default_gamma_max, RelayMiss, RewardInputs, TermiteHill, TermiteParams};
use termite_hill::{NodeId, Protocol, SimConfig, Simulation, SinkMode, SourceSet};

fn lossless(range: f64) -> NetworkConfig {
    let mut net = NetworkConfig {
        area: Area::new(200.0, 200.0),
        ..NetworkConfig::default()
    };
    net.radio.range = range;
    net.radio.delivery_probability = 1.0;
    net.energy.idle_joules_per_second = 0.0;
    net
}

fn quiet(net: NetworkConfig, duration: f64) -> SimConfig {
    SimConfig {
        network: net,
        traffic_rate: 0.0,
        duration,
        sample_period: 0.0,
        ..SimConfig::default()
    }
}

fn at(points: &[(f64, f64)]) -> Vec<Position> {
    points.iter().map(|&(x, y)| Position::new(x + 20.0, y + 100.0)).collect()
}

/// Sink 0, relays 1 and 2 between the sink and source 4, relay 3 hanging off
/// the source and node 2.
fn five_nodes() -> Vec<Position> {
    at(&[(0.0, 0.0), (30.0, 20.0), (30.0, -20.0), (60.0, -40.0), (60.0, 0.0)])
}

fn line(n: usize, spacing: f64) -> Vec<Position> {
    (0..n).map(|i| Position::new(10.0 + spacing * i as f64, 100.0)).collect()
}

fn termite(params: TermiteParams, positions: &[Position], duration: f64) -> Simulation<TermiteHill> {
    let p = TermiteHill::new(params, positions.len()).unwrap();
    Simulation::with_positions(quiet(lossless(41.0), duration), positions, p, 7).unwrap()
}

/// Follows `path` from `start` through forwarding entries. Returns the nodes
/// visited, or `None` when a node repeats.
fn walk(th: &TermiteHill, sink: NodeId, start: NodeId, first: NodeId, path: u64) -> Option<Vec<NodeId>> {
    let mut seen = vec![start];
    let mut cur = first;
    loop {
        if seen.contains(&cur) {
            return None;
        }
        seen.push(cur);
        if cur == sink {
            return Some(seen);
        }
        match th.node(cur).forwarding.get(&path) {
            Some(&next) => cur = next,
            None => return Some(seen),
        }
    }
}

fn simple_paths(adj: &[Vec<NodeId>], from: NodeId, to: NodeId) -> Vec<Vec<NodeId>> {
    fn go(adj: &[Vec<NodeId>], to: NodeId, path: &mut Vec<NodeId>, out: &mut Vec<Vec<NodeId>>) {
        let last = *path.last().unwrap();
        if last == to {
            out.push(path.clone());
            return;
        }
        for &n in &adj[last] {
            if !path.contains(&n) {
                path.push(n);
                go(adj, to, path, out);
                path.pop();
            }
        }
    }
    let mut out = Vec::new();
    go(adj, to, &mut vec![from], &mut out);
    out
}

#[test]
fn discovery_installs_the_best_simple_path() {
    let pos = five_nodes();
    let params = TermiteParams {
        sink_reply_window: 0.2,
        ..TermiteParams::default()
    };
    let mut sim = termite(params, &pos, 2.0);
    sim.network_mut().charge(0.0, 1, ChargeKind::Idle, Energy::from_joules(0.1));
    sim.network_mut().charge(0.0, 2, ChargeKind::Idle, Energy::from_joules(0.3));
    let energy: Vec<f64> = sim.network().nodes().iter().map(|n| n.energy.joules() * 1000.0).collect();
    let adj: Vec<Vec<NodeId>> = (0..pos.len())
        .map(|a| (0..pos.len()).filter(|&b| b != a && sim.network().in_range(a, b)).collect())
        .collect();

    let n = pos.len() as f64;
    let reward = |path: &[NodeId]| {
        let carriers = &path[..path.len() - 1];
        let e: Vec<f64> = carriers.iter().map(|&k| energy[k]).collect();
        compute_reward(
            &RewardInputs {
                network_size: n,
                initial_energy: 1000.0,
                min_energy: e.iter().copied().fold(f64::INFINITY, f64::min),
                avg_energy: e.iter().sum::<f64>() / e.len() as f64,
                visited: (carriers.len() - 1) as f64,
            },
            default_gamma_max(10.0, n, 1000.0),
        )
        .value()
    };
    let paths = simple_paths(&adj, 4, 0);
    assert_eq!(paths.len(), 6);
    let best = paths.iter().max_by(|a, b| reward(a).total_cmp(&reward(b))).unwrap().clone();

    sim.inject_event(0.1, 4);
    sim.run();
    let th = sim.protocol();
    assert_eq!(th.counters.discoveries, 1);
    assert_eq!(th.node(4).paths.len(), 1);
    let (&first, &path) = th.node(4).paths.iter().next().unwrap();
    let installed = walk(th, 0, 4, first, path).expect("loop-free");
    assert_eq!(installed, best);
    assert_eq!(th.counters.bs_sent, 1);
    assert_eq!(th.counters.bs_forwarded as usize, installed.len() - 2);
    assert_eq!(sim.stats().delivered(), 1);
}

#[test]
fn lost_first_hop_triggers_rediscovery_within_a_tick() {
    let pos = five_nodes();
    let mut sim = termite(TermiteParams::default(), &pos, 20.0);
    sim.inject_event(0.1, 4);
    sim.run_until(1.0);
    let first = *sim.protocol().node(4).paths.keys().next().unwrap();
    let before = sim.protocol().counters.discoveries;
    sim.network_mut().kill(1.5, first);
    sim.inject_event(2.0, 4);
    sim.run_until(3.0);
    assert!(sim.protocol().counters.discoveries > before);
    assert!(!sim.protocol().node(4).paths.contains_key(&first));
    sim.run();
    assert_eq!(sim.stats().delivered(), 2);
}

fn relay_without_entry(policy: RelayMiss) -> Simulation<TermiteHill> {
    let pos = line(3, 35.0);
    let params = TermiteParams {
        relay_miss: policy,
        ..TermiteParams::default()
    };
    let mut sim = termite(params, &pos, 10.0);
    sim.inject_event(0.1, 2);
    sim.run_until(1.0);
    assert_eq!(sim.stats().delivered(), 1);
    sim.protocol_mut().node_mut(1).forwarding.clear();
    sim.inject_event(2.0, 2);
    sim.run_until(2.5);
    sim
}

#[test]
fn relay_without_entry_drops_and_repairs() {
    let mut sim = relay_without_entry(RelayMiss::Drop);
    assert_eq!(sim.stats().discarded, 1);
    assert_eq!(sim.protocol().counters.route_failures, 1);
    assert_eq!(sim.protocol().counters.discoveries, 2);
    assert!(!sim.protocol().node(1).paths.is_empty());
    sim.run();
    assert_eq!(sim.stats().delivered(), 1);
}

#[test]
fn relay_without_entry_can_hold_the_worker() {
    let mut sim = relay_without_entry(RelayMiss::Hold);
    assert_eq!(sim.stats().discarded, 0);
    assert_eq!(sim.protocol().counters.discoveries, 2);
    sim.run();
    assert_eq!(sim.stats().delivered(), 2);
}

#[test]
fn soldiers_stop_past_hmax_without_stochastic_forwarding() {
    let pos = line(6, 35.0);
    let run = |p_sf: f64| {
        let params = TermiteParams {
            hmax: 2,
            p_sf,
            ..TermiteParams::default()
        };
        let mut sim = termite(params, &pos, 5.0);
        sim.inject_event(0.1, 5);
        sim.run();
        (sim.stats().delivered(), sim.protocol().counters.clone())
    };
    let (delivered, c) = run(0.0);
    assert_eq!(delivered, 0);
    assert_eq!(c.fs_rebroadcasts_beyond_hmax, 0);
    assert_eq!(c.fs_rebroadcasts, 2 * c.discoveries);
    let (delivered, c) = run(1.0);
    assert_eq!(delivered, 1);
    assert!(c.fs_rebroadcasts_beyond_hmax > 0);
}

fn random_config(nodes: usize, dynamic: bool, duration: f64) -> SimConfig {
    let mut net = NetworkConfig::default();
    net.radio.range = 35.0;
    net.radio.delivery_probability = 0.95;
    SimConfig {
        network: net,
        nodes,
        placement: PlacementPolicy::Connected { max_attempts: 100_000 },
        sink_mode: if dynamic {
            SinkMode::Dynamic { t_change: 2.0 }
        } else {
            SinkMode::Static
        },
        traffic_rate: 0.1,
        sources: SourceSet::AllSensors,
        duration,
        sample_period: 0.0,
        ..SimConfig::default()
    }
}

#[test]
fn installed_paths_never_loop() {
    for seed in 1..=3 {
        for dynamic in [false, true] {
            let cfg = random_config(49, dynamic, 60.0);
            let p = TermiteHill::new(TermiteParams::default(), 49).unwrap();
            let mut sim = Simulation::new(cfg, p, seed).unwrap();
            for t in 1..=60 {
                sim.run_until(t as f64);
                let th = sim.protocol();
                for n in 1..49 {
                    for (&first, &path) in &th.node(n).paths {
                        assert!(walk(th, 0, n, first, path).is_some(), "loop on path {path} from {n}");
                    }
                }
            }
        }
    }
}

#[test]
fn delivered_never_exceeds_generated() {
    let cfg = random_config(25, true, 60.0);
    let p = TermiteHill::new(TermiteParams::default(), 25).unwrap();
    let mut sim = Simulation::new(cfg.clone(), p, 3).unwrap();
    sim.run();
    assert!(sim.stats().delivered() <= sim.stats().generated);
    let ff = FloodedForward::new(FfParams::default(), 25).unwrap();
    let mut sim = Simulation::new(cfg, ff, 3).unwrap();
    sim.run();
    assert!(sim.stats().delivered() <= sim.stats().generated);
}

fn aodv_diamond() -> Simulation<AodvLite> {
    let p = AodvLite::new(AodvParams::default(), 5).unwrap();
    Simulation::with_positions(quiet(lossless(41.0), 20.0), &five_nodes(), p, 7).unwrap()
}

#[test]
fn aodv_relay_death_breaks_then_rediscovers() {
    let mut sim = aodv_diamond();
    sim.inject_event(0.1, 4);
    sim.run_until(1.0);
    assert_eq!(sim.stats().delivered(), 1);
    let relay = sim.protocol().route(4).unwrap().next_hop;
    sim.network_mut().kill(1.2, relay);
    sim.inject_event(1.5, 4);
    sim.run_until(2.0);
    assert_eq!(sim.stats().discarded, 1);
    assert!(!sim.protocol().route(4).unwrap().valid);
    sim.inject_event(3.0, 4);
    sim.run();
    assert_eq!(sim.stats().delivered(), 2);
    assert_ne!(sim.protocol().route(4).unwrap().next_hop, relay);
}

#[test]
fn aodv_routes_stay_loop_free() {
    for seed in 1..=3 {
        let cfg = random_config(49, true, 60.0);
        let p = AodvLite::new(AodvParams::default(), 49).unwrap();
        let mut sim = Simulation::new(cfg, p, seed).unwrap();
        for k in 1..=240 {
            let now = sim.run_until(k as f64 * 0.25);
            let a = sim.protocol();
            for start in 1..49 {
                let mut seen = HashSet::from([start]);
                let mut cur = start;
                while let Some(r) = a.route(cur).filter(|r| r.usable(now)) {
                    cur = r.next_hop;
                    if cur == 0 {
                        break;
                    }
                    assert!(seen.insert(cur), "routing loop through {cur} at t={now}");
                }
            }
        }
    }
}

#[test]
fn flood_reaches_every_node_and_costs_more_than_termite_hill() {
    let mut net = lossless(35.0);
    net.area = Area::new(100.0, 100.0);
    let cfg = SimConfig {
        network: net,
        nodes: 20,
        sink_position: Position::new(50.0, 50.0),
        traffic_rate: 0.0,
        duration: 5.0,
        sample_period: 0.0,
        ..SimConfig::default()
    };
    let ff = FloodedForward::new(FfParams::default(), 20).unwrap();
    let mut sim = Simulation::new(cfg.clone(), ff, 11).unwrap();
    sim.inject_event(0.5, 7);
    sim.run();
    assert_eq!(sim.stats().delivered(), 1);
    assert_eq!(sim.protocol().rebroadcasts, 18);

    let busy = SimConfig {
        traffic_rate: 0.1,
        duration: 120.0,
        ..cfg
    };
    let ff = FloodedForward::new(FfParams::default(), 20).unwrap();
    let mut a = Simulation::new(busy.clone(), ff, 11).unwrap();
    a.run();
    let th = TermiteHill::new(TermiteParams::default(), 20).unwrap();
    let mut b = Simulation::new(busy, th, 11).unwrap();
    b.run();
    assert!(a.network().total_energy_consumed() > b.network().total_energy_consumed());
}

#[test]
fn sensor_driven_costs_follow_hop_distance() {
    let pos = line(5, 35.0);
    let p = SensorDriven::new(ScParams::default(), 5).unwrap();
    let mut sim = Simulation::with_positions(quiet(lossless(41.0), 5.0), &pos, p, 7).unwrap();
    sim.inject_event(1.0, 4);
    sim.run();
    for n in 0..5 {
        assert_eq!(sim.protocol().table(n).own, Some(n as u32));
    }
    assert_eq!(sim.stats().delivered(), 1);
}

#[test]
fn sensor_driven_suffers_from_stale_costs() {
    let rate = |dynamic: bool| {
        let mut total = 0.0;
        for seed in 1..=3 {
            let cfg = random_config(49, dynamic, 120.0);
            let p = SensorDriven::new(ScParams::default(), 49).unwrap();
            let mut sim = Simulation::new(cfg, p, seed).unwrap();
            sim.run();
            total += sim.stats().delivered() as f64 / sim.stats().generated as f64;
        }
        total / 3.0
    };
    assert!(rate(true) < rate(false) - 0.2);
}

fn transmissions<P: Protocol>(p: P) -> Energy {
    let cfg = SimConfig {
        traffic_rate: 0.0,
        duration: 60.0,
        nodes: 30,
        sample_period: 0.0,
        ..SimConfig::default()
    };
    let mut sim = Simulation::new(cfg, p, 5).unwrap();
    sim.run();
    sim.network().ledger().tx
}

#[test]
fn on_demand_protocols_stay_silent_without_traffic() {
    assert_eq!(transmissions(TermiteHill::new(TermiteParams::default(), 30).unwrap()), Energy::ZERO);
    assert_eq!(transmissions(AodvLite::new(AodvParams::default(), 30).unwrap()), Energy::ZERO);
    assert_eq!(transmissions(FloodedForward::new(FfParams::default(), 30).unwrap()), Energy::ZERO);
}
