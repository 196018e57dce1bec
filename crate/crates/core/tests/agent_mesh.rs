mod common;

use std::collections::BTreeMap;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::*;
use nucleate::agent::{attachable, beta_hat, embed_tile_system, model_step, nucleate as nucleate_surface, AgentId, AgentModel, Scheduler, Surface};
use nucleate::assembly::{reachable_configurations, Assembler};
use nucleate::lattice::{Mesh, Point};
use nucleate::lcl::{check_weak_coloring, CoverageMode};
use nucleate::mesh::{simulate, ExecMode, MeshNetwork, MAX_PACKET_SYMBOLS};
use nucleate::tam::attachments;
use nucleate::tilesets::{nucleation_family, tileset_t_star};

fn family(rule: &str, pi_nu: f64) -> AgentModel {
    nucleation_family(8, pi_nu, rule).unwrap().model().unwrap().clone()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn beta_hat_is_a_distribution(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let model = random_model(&mut rng);
        for _ in 0..50 {
            let d = beta_hat(&model, &random_view(&mut rng, &model));
            prop_assert!(d.probs().iter().all(|&p| (0.0..=1.0).contains(&p)));
            prop_assert!((d.total() - 1.0).abs() <= 1e-9);
        }
    }

    /// β̂ reads nothing beyond its tuple: evaluating it inside different
    /// surfaces that agree on the tuple gives the same law.
    #[test]
    fn beta_hat_depends_only_on_the_tuple(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let model = random_model(&mut rng);
        let mesh = Mesh::square(5).unwrap();
        let mut occ: Vec<Option<AgentId>> = (0..25).map(|_| rng.gen_bool(0.5).then(|| AgentId(rng.gen_range(0..model.agents.len())))).collect();
        let a = Surface::from_occupancy(&model, mesh, &occ).unwrap();
        let center = mesh.index(Point::xy(2, 2)).unwrap();
        // scramble everything at distance ≥ 3 from the center
        for p in mesh.points().filter(|p| p.l1_distance(Point::xy(2, 2)) >= 3) {
            occ[mesh.index(p).unwrap()] = rng.gen_bool(0.5).then(|| AgentId(rng.gen_range(0..model.agents.len())));
        }
        let b = Surface::from_occupancy(&model, mesh, &occ).unwrap();
        prop_assert_eq!(a.view(&model, center), b.view(&model, center));
        prop_assert_eq!(beta_hat(&model, &a.view(&model, center)), beta_hat(&model, &b.view(&model, center)));
    }

    #[test]
    fn irreversible_models_never_lose_agents(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut model = random_model(&mut rng);
        model.kinetics.epsilon = 0.0;
        model.kinetics.p_off = 0.0;
        let mesh = Mesh::square(5).unwrap();
        let mut s = Surface::seeded(&model, mesh).unwrap();
        nucleate_surface(&mut s, &model, &mut rng).unwrap();
        for _ in 0..8 {
            let before = s.occupancy();
            model_step(&mut s, &model, Scheduler::Synchronous, &mut rng);
            let after = s.occupancy();
            prop_assert!(before.iter().zip(&after).all(|(b, a)| b.is_none() || b == a));
        }
    }

    #[test]
    fn embedding_reaches_the_same_configurations(seed in any::<u64>(), tau in 1u32..=2, n in 1usize..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sys = random_system(&mut rng, 4, tau);
        let mesh = Mesh::square(n).unwrap();
        let tiles: std::collections::BTreeSet<_> =
            reachable_configurations(&sys, mesh).unwrap().iter().map(|c| as_occupancy(mesh, c)).collect();
        prop_assert_eq!(model_reachable(&embed_tile_system(&sys), mesh), tiles);
    }

    #[test]
    fn speed_of_light(seed in any::<u64>(), rounds in 0u64..6) {
        let model = family("forced-growth", 0.0);
        let (net, _) = simulate(&model, Mesh::square(7).unwrap(), seed, rounds, ExecMode::Sequential).unwrap();
        for p in net.mesh().points() {
            prop_assert_eq!(net.processor(p).unwrap().state.is_some(), p.l1_distance(Point::xy(0, 0)) <= rounds);
        }
    }
}

#[test]
fn embedded_t_star_frontiers_match() {
    let t = tileset_t_star();
    let sys = t.tiles().unwrap();
    let model = embed_tile_system(sys);
    assert_eq!(model.temperature, 2);
    assert_eq!(model.seed, vec![(Point::xy(0, 0), AgentId(0))]);
    assert!(model.agents.iter().all(|a| a.rule.is_null()));
    let mesh = Mesh::square(8).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..100 {
        let mut asm = Assembler::new(sys, mesh).unwrap();
        for _ in 0..rng.gen_range(0..64) {
            asm.step(&mut rng);
        }
        let cfg = asm.configuration();
        let occ = as_occupancy(mesh, &cfg.iter().collect::<Vec<_>>());
        let surface = Surface::from_occupancy(&model, mesh, &occ).unwrap();
        let mut from_model = Vec::new();
        for (i, p) in mesh.points().enumerate() {
            from_model.extend(attachable(&model, &surface, i).into_iter().map(|a| (p, a.0)));
            assert!(surface.outgoing(i).iter().all(Option::is_none));
        }
        let from_tiles: Vec<(Point, usize)> = attachments(cfg, &sys.tiles, 2).unwrap().into_iter().map(|(p, t)| (p, t.0)).collect();
        assert_eq!(from_model, from_tiles);
    }
}

#[test]
fn nucleation_type_frequencies() {
    let model = family("checkerboard-local", 1.0);
    let mesh = Mesh::square(100).unwrap();
    let mut counts = [0usize; 2];
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..10 {
        let mut s = Surface::seeded(&model, mesh).unwrap();
        nucleate_surface(&mut s, &model, &mut rng).unwrap();
        for a in s.occupancy() {
            counts[a.unwrap().0] += 1;
        }
    }
    let f = counts[0] as f64 / 1e5;
    assert!((f - 0.5).abs() <= 0.01, "{f}");
}

#[test]
fn nucleation_count_is_binomial() {
    let model = family("checkerboard-local", 0.1);
    let mesh = Mesh::square(10).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let total: usize = (0..1000)
        .map(|_| {
            let mut s = Surface::seeded(&model, mesh).unwrap();
            nucleate_surface(&mut s, &model, &mut rng).unwrap()
        })
        .sum();
    let mean = total as f64 / 1000.0;
    let sigma = (100.0 * 0.1 * 0.9 / 1000.0f64).sqrt();
    assert!((mean - 10.0).abs() <= 3.0 * sigma, "{mean}");
}

#[test]
fn wake_up_state_frequencies() {
    let model = family("checkerboard-local", 0.5);
    let mesh = Mesh::square(100).unwrap();
    let mut counts = [0usize; 3];
    for seed in 0..10 {
        let mut net = MeshNetwork::new(&model, mesh, seed).unwrap();
        net.init_round0().unwrap();
        for s in net.snapshot() {
            counts[s.map_or(0, |a| a.0 + 1)] += 1;
        }
    }
    for &c in &counts[1..] {
        let f = c as f64 / 1e5;
        assert!((f - 0.25).abs() <= 0.01, "{counts:?}");
    }
}

const WEAK_PAIR: &str = r#"{
    "agents": [
        {"name": "A", "color": 1, "glues": {"east": "a"}},
        {"name": "B", "color": 2, "glues": {"west": "a", "south": "z"}}
    ],
    "rules": [{"a": "a", "b": "a", "strength": 1}],
    "temperature": 1,
    "seed": [{"x": 0, "y": 0, "agent": "A"}, {"x": 0, "y": 1, "agent": "B"}],
    "kinetics": {"lambda_on": 0.5, "p_off": 0.3, "epsilon": 0.2}
}"#;

fn tv(a: &BTreeMap<Vec<Option<AgentId>>, f64>, b: &BTreeMap<Vec<Option<AgentId>>, f64>) -> f64 {
    let keys: std::collections::BTreeSet<_> = a.keys().chain(b.keys()).collect();
    0.5 * keys.into_iter().map(|k| (a.get(k).unwrap_or(&0.0) - b.get(k).unwrap_or(&0.0)).abs()).sum::<f64>()
}

/// 2×2 window: A seeded at (0,0) hears B's unbound glue "z" from above, so
/// it is under-bonded; B at (0,1) and (1,1) hear nothing and never change;
/// (1,0) hears A's east glue. By hand: (0,0) keeps A w.p. 0.7 and empties
/// w.p. 0.3; (1,0) gets B w.p. 0.5·0.8 + 0.5·0.2/2 = 0.45, A w.p. 0.05 and
/// stays empty w.p. 0.5.
#[test]
fn one_step_laws_on_a_strip() {
    let model = AgentModel::from_json(WEAK_PAIR).unwrap();
    let mesh = Mesh::new(2, 2).unwrap();
    let (a, b, e) = (Some(AgentId(0)), Some(AgentId(1)), None);
    let key = |x0, x1| vec![x0, x1, b, None];
    let cell0 = [(a, 0.7), (e, 0.3)];
    let cell1 = [(e, 0.5), (a, 0.05), (b, 0.45)];
    let mut sync = BTreeMap::new();
    for &(s0, p0) in &cell0 {
        for &(s1, p1) in &cell1 {
            sync.insert(key(s0, s1), p0 * p1);
        }
    }
    // sequential: one of four locations, uniformly; the top row is a no-op
    let mut seq = BTreeMap::new();
    for &(s0, p0) in &cell0 {
        *seq.entry(key(s0, e)).or_insert(0.0) += 0.25 * p0;
    }
    for &(s1, p1) in &cell1 {
        *seq.entry(key(a, s1)).or_insert(0.0) += 0.25 * p1;
    }
    *seq.entry(key(a, e)).or_insert(0.0) += 0.5;

    let samples = 100_000;
    for (scheduler, oracle) in [(Scheduler::Synchronous, &sync), (Scheduler::Sequential, &seq)] {
        let mut counts: BTreeMap<Vec<Option<AgentId>>, f64> = BTreeMap::new();
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let start = Surface::seeded(&model, mesh).unwrap();
        for _ in 0..samples {
            let mut s = start.clone();
            model_step(&mut s, &model, scheduler, &mut rng);
            *counts.entry(s.occupancy()).or_insert(0.0) += 1.0 / samples as f64;
        }
        let d = tv(&counts, oracle);
        assert!(d <= 0.02, "{scheduler:?}: TV {d}");
        let support: Vec<_> = oracle.iter().filter(|(_, &p)| p > 0.0).map(|(k, _)| k.clone()).collect();
        assert_eq!(counts.keys().cloned().collect::<Vec<_>>(), support, "{scheduler:?}");
    }
}

#[test]
fn detach_frequency() {
    let model = AgentModel::from_json(WEAK_PAIR).unwrap();
    // a lone seed hears nothing and never changes
    let mut lone = model.clone();
    lone.seed.truncate(1);
    let (net, _) = simulate(&lone, Mesh::square(1).unwrap(), 0, 5, ExecMode::Sequential).unwrap();
    assert_eq!(net.snapshot(), vec![Some(AgentId(0))]);
    // beside a non-binding neighbour it detaches at rate p_off
    let mut m = lone;
    m.agents[1].glues = vec![None; 4];
    m.seed.push((Point::xy(1, 0), AgentId(1)));
    let mesh = Mesh::new(2, 2).unwrap();
    let trials = 100_000;
    let mut detached = 0;
    for seed in 0..trials {
        let mut net = MeshNetwork::new(&m, mesh, seed).unwrap();
        net.init_round0().unwrap();
        // B at (1,0) hears A's glue "a" but offers no glue back: bond 0 < τ
        net.run_round().unwrap();
        detached += net.processor(Point::xy(1, 0)).unwrap().state.is_none() as u64;
    }
    let f = detached as f64 / trials as f64;
    assert!((f - 0.3).abs() <= 0.01, "{f}");
}

#[test]
fn network_dynamics_are_local() {
    let model = family("checkerboard-local", 0.1);
    let mesh = Mesh::square(16).unwrap();
    let (net, _) = simulate(&model, mesh, 5, 3, ExecMode::Sequential).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..200 {
        let p = mesh.point(rng.gen_range(0..mesh.vertex_count()));
        let q = mesh.point(rng.gen_range(0..mesh.vertex_count()));
        if q == p {
            continue;
        }
        let mut perturbed = net.clone();
        let new = rng.gen_bool(0.5).then(|| AgentId(rng.gen_range(0..2)));
        perturbed.set_state(q, new).unwrap();
        // the next state depends on p's own state and its input buffers only
        assert_eq!(perturbed.peek_next_state(p).unwrap(), net.peek_next_state(p).unwrap(), "{p} vs {q}");
    }
    assert_eq!(net.locality().violations, 0);
    assert!(net.message_stats().max_symbols <= MAX_PACKET_SYMBOLS);
}

#[test]
fn extracted_configurations() {
    let mut model = family("forced-growth", 0.0);
    let mesh = Mesh::square(4).unwrap();
    let mut net = MeshNetwork::new(&model, mesh, 0).unwrap();
    net.init_round0().unwrap();
    let ex = net.extract_configuration();
    assert_eq!(ex.cells.into_iter().collect::<Vec<_>>(), model.seed);
    model.seed.clear();
    let (net, _) = simulate(&model, mesh, 0, 3, ExecMode::Parallel).unwrap();
    assert!(net.extract_configuration().cells.is_empty());
    assert_eq!(net.coloring().colored_count(), 0);
}

/// Every one-round network outcome on a 3×3 window is a configuration the
/// synchronous model can reach in one step from the same start.
#[test]
fn network_outcomes_are_model_reachable() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..20 {
        let mut model = random_model(&mut rng);
        model.pi_nu = 0.0;
        model.seed = vec![(Point::xy(1, 1), AgentId(0)), (Point::xy(0, 1), AgentId(model.agents.len() - 1))];
        let mesh = Mesh::square(3).unwrap();
        let start = Surface::seeded(&model, mesh).unwrap();
        let laws: Vec<_> = (0..9).map(|i| beta_hat(&model, &start.view(&model, i))).collect();
        for seed in 0..50 {
            let (net, _) = simulate(&model, mesh, seed, 1, ExecMode::Sequential).unwrap();
            for (i, s) in net.snapshot().into_iter().enumerate() {
                assert!(laws[i].prob(s) > 0.0);
            }
        }
    }
}

#[test]
fn three_dimensional_growth() {
    let mut model = family("forced-growth", 0.0);
    model.dimension = 3;
    for a in &mut model.agents {
        a.glues = vec![a.glues[0]; 6];
    }
    let (net, _) = simulate(&model, Mesh::new(3, 3).unwrap(), 0, 6, ExecMode::Parallel).unwrap();
    assert_eq!(net.coloring().colored_count(), 27);
}

#[test]
fn checkerboard_family_behaviour() {
    // an isolated vertex is exempt, so a nucleated 1×1 surface is valid at once
    let model = family("checkerboard-local", 1.0);
    let (net, _) = simulate(&model, Mesh::square(1).unwrap(), 0, 0, ExecMode::Sequential).unwrap();
    assert!(check_weak_coloring(&net.coloring(), CoverageMode::FullSurface).unwrap().valid);
    // without nucleation nothing ever appears
    let model = family("checkerboard-local", 0.0);
    let (net, trace) = simulate(&model, Mesh::square(8).unwrap(), 0, 10, ExecMode::Sequential).unwrap();
    assert!(trace.events.is_empty() && net.coloring().colored_count() == 0);
    // collisions make success uncertain at n = 8
    let model = family("checkerboard-local", 0.1);
    let successes = (0..200).filter(|&t| nucleate::harness::run_trial(&model, 8, 10, t).unwrap().success).count();
    assert!(successes < 200);
}
