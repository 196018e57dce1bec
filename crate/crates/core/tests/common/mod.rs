//! Independent oracles shared by the integration tests. Nothing here calls
//! into the routines it checks.
#![allow(dead_code)]

use std::collections::{BTreeSet, VecDeque};

use rand::Rng;

use nucleate::agent::{beta_hat, AgentId, AgentModel, Surface};
use nucleate::lattice::{Mesh, Point};
use nucleate::tam::{Configuration, Glue, TileAssemblySystem, TileId, TileSet, TileType};

/// West, north, east, south offsets, matching the glue order of 2D tiles.
pub const SIDES_2D: [(i64, i64); 4] = [(-1, 0), (0, 1), (1, 0), (0, -1)];

pub fn random_glue<R: Rng>(rng: &mut R, labels: &[&str], max_strength: u32) -> Glue {
    if rng.gen_bool(0.25) {
        Glue::empty()
    } else {
        Glue::new(labels[rng.gen_range(0..labels.len())], rng.gen_range(0..=max_strength))
    }
}

pub fn random_tileset<R: Rng>(rng: &mut R, types: usize, labels: &[&str], max_strength: u32) -> TileSet {
    let tiles = (0..types)
        .map(|i| TileType::new(format!("t{i}"), rng.gen_range(1..=3), (0..4).map(|_| random_glue(rng, labels, max_strength)).collect()))
        .collect();
    TileSet::new(2, tiles).unwrap()
}

/// Def 6 evaluated directly: the sum over the four sides of `str(u)` where
/// the neighbour's facing glue has the same label and strength.
pub fn def6_strength(cfg: &Configuration, tiles: &TileSet, p: Point, t: &TileType) -> u64 {
    let mut total = 0;
    for (u, (dx, dy)) in SIDES_2D.iter().enumerate() {
        let q = Point::xy(p.x + dx, p.y + dy);
        let Some(id) = cfg.get(q) else { continue };
        let facing = &tiles.tile(id).glues[(u + 2) % 4];
        let mine = &t.glues[u];
        if facing.label == mine.label && facing.strength == mine.strength {
            total += mine.strength as u64;
        }
    }
    total
}

/// Minimum cut by enumerating every bipartition with vertex 0 on one side.
pub fn exhaustive_min_cut(n: usize, edges: &[(usize, usize, u64)]) -> u64 {
    assert!(n >= 2);
    let mut best = u64::MAX;
    // mask 0 would put every vertex on vertex 0's side
    for mask in 1u32..(1 << (n - 1)) {
        let side = |v: usize| v > 0 && mask >> (v - 1) & 1 == 1;
        let cut: u64 = edges.iter().filter(|&&(a, b, _)| side(a) != side(b)).map(|e| e.2).sum();
        best = best.min(cut);
    }
    best
}

/// Random connected graph on `n` vertices: a random spanning tree plus extra edges.
pub fn random_connected_graph<R: Rng>(rng: &mut R, n: usize) -> Vec<(usize, usize, u64)> {
    let mut edges = Vec::new();
    for v in 1..n {
        edges.push((rng.gen_range(0..v), v, rng.gen_range(1..=4)));
    }
    for _ in 0..rng.gen_range(0..=n * 2) {
        let a = rng.gen_range(0..n);
        let b = rng.gen_range(0..n);
        if a != b {
            edges.push((a, b, rng.gen_range(1..=4)));
        }
    }
    edges
}

/// Configurations reachable under the sequential scheduler: every single
/// location update with positive β̂ probability, explored breadth first.
pub fn model_reachable(model: &AgentModel, mesh: Mesh) -> BTreeSet<Vec<Option<AgentId>>> {
    let start = Surface::seeded(model, mesh).unwrap();
    let mut seen = BTreeSet::from([start.occupancy()]);
    let mut queue = VecDeque::from([start]);
    while let Some(s) = queue.pop_front() {
        for i in 0..mesh.vertex_count() {
            for o in beta_hat(model, &s.view(model, i)).support() {
                let mut occ = s.occupancy();
                occ[i] = o;
                if seen.insert(occ.clone()) {
                    queue.push_back(Surface::from_occupancy(model, mesh, &occ).unwrap());
                }
            }
        }
    }
    seen
}

/// Tile-engine reachable set expressed as occupancy vectors over `mesh`.
pub fn as_occupancy(mesh: Mesh, cells: &[(Point, TileId)]) -> Vec<Option<AgentId>> {
    let mut occ = vec![None; mesh.vertex_count()];
    for &(p, TileId(t)) in cells {
        occ[mesh.index(p).unwrap()] = Some(AgentId(t));
    }
    occ
}

/// A random single-seed tile system whose seed tile is type 0 at the origin.
pub fn random_system<R: Rng>(rng: &mut R, types: usize, tau: u32) -> TileAssemblySystem {
    let tiles = random_tileset(rng, types, &["a", "b", "c"], 2);
    let seed = Configuration::from_names(2, &[(Point::xy(0, 0), "t0")], &tiles).unwrap();
    TileAssemblySystem::new(tiles, seed, tau).unwrap()
}

use nucleate::agent::{AgentType, BindingRules, GlueId, Kinetics, LocalInputs, LocalView, MessageId, MessageRule, Pattern, RuleCase};

fn random_pattern<T, R: Rng>(rng: &mut R, n: usize, make: impl Fn(usize) -> T) -> Pattern<T> {
    match rng.gen_range(0..4) {
        0 => Pattern::Any,
        1 => Pattern::Empty,
        2 => Pattern::Present,
        _ if n > 0 => Pattern::Is(make(rng.gen_range(0..n))),
        _ => Pattern::Any,
    }
}

/// A random 2D model: negative strengths, messages and rule cases included.
pub fn random_model<R: Rng>(rng: &mut R) -> AgentModel {
    let labels = rng.gen_range(1..=3);
    let messages = rng.gen_range(0..=2);
    let types = rng.gen_range(1..=4);
    let agents = (0..types)
        .map(|i| {
            let cases = (0..rng.gen_range(0..=2))
                .map(|_| {
                    let mut c = RuleCase { detach: rng.gen_bool(0.3), ..Default::default() };
                    for u in 0..4 {
                        c.glues[u] = random_pattern(rng, labels, GlueId);
                        c.messages[u] = random_pattern(rng, messages, MessageId);
                        if messages > 0 && rng.gen_bool(0.5) {
                            c.send[u] = Some(MessageId(rng.gen_range(0..messages)));
                        }
                    }
                    c
                })
                .collect();
            AgentType {
                name: format!("a{i}"),
                color: rng.gen_range(1..=3),
                glues: (0..4).map(|_| rng.gen_bool(0.7).then(|| GlueId(rng.gen_range(0..labels)))).collect(),
                rule: MessageRule { cases },
            }
        })
        .collect();
    let mut rules = BindingRules::default();
    for a in 0..labels {
        for b in a..labels {
            if rng.gen_bool(0.6) {
                rules.insert(GlueId(a), GlueId(b), rng.gen_range(-2..=3));
            }
        }
    }
    AgentModel {
        name: None,
        dimension: 2,
        agents,
        glue_labels: (0..labels).map(|i| format!("g{i}")).collect(),
        messages: (0..messages).map(|i| format!("m{i}")).collect(),
        rules,
        temperature: rng.gen_range(1..=3),
        seed: Vec::new(),
        pi_nu: rng.gen(),
        kinetics: Kinetics {
            lambda_on: 1.0 - rng.gen::<f64>(),
            p_off: rng.gen::<f64>() * 0.999,
            epsilon: rng.gen::<f64>() * 0.999,
            detach: rng.gen_bool(0.7),
        },
        use_ids: false,
        nucleate_every_round: false,
    }
}

/// A uniformly random β̂ input tuple for `model`.
pub fn random_view<R: Rng>(rng: &mut R, model: &AgentModel) -> LocalView {
    let mut inputs = LocalInputs::default();
    for u in 0..model.degree() {
        if rng.gen_bool(0.6) {
            inputs.glues[u] = Some(GlueId(rng.gen_range(0..model.glue_labels.len())));
        }
        if !model.messages.is_empty() && rng.gen_bool(0.4) {
            inputs.messages[u] = Some(MessageId(rng.gen_range(0..model.messages.len())));
        }
    }
    let occupant = rng.gen_bool(0.5).then(|| AgentId(rng.gen_range(0..model.agents.len())));
    LocalView { occupant, inputs }
}
