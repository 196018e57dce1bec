//! aTAM dynamics: single-tile steps, runs, assembly sequences and the
//! local-determinism checker.
//!
//! Nondeterminism is resolved by a uniform choice over all legal
//! `(location, tile)` pairs using a seeded PRNG, so every run is reproducible
//! from its 64-bit seed.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{Direction, Mesh, Point};
use crate::tam::{self, attachable_at, attachment_strength, Configuration, TileAssemblySystem, TileId};

/// One single-tile extension: `tile` placed at `location` to form stage `stage`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Addition {
    pub stage: usize,
    pub location: Point,
    pub tile: TileId,
}

/// A τ-assembly sequence recorded as its seed plus the ordered additions.
/// Stage 0 is the seed; addition `i` produces stage `i + 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AssemblySequence {
    pub seed: Configuration,
    pub additions: Vec<Addition>,
}

impl AssemblySequence {
    pub fn new(seed: Configuration) -> AssemblySequence {
        AssemblySequence { seed, additions: Vec::new() }
    }

    /// Number of stages (configurations) in the sequence, seed included.
    pub fn stages(&self) -> usize {
        self.additions.len() + 1
    }

    pub fn push(&mut self, location: Point, tile: TileId) {
        let stage = self.additions.len() + 1;
        self.additions.push(Addition { stage, location, tile });
    }
}

/// Outcome of a single nondeterministic step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepOutcome {
    Attached { location: Point, tile: TileId },
    Terminal,
}

/// Add one tile chosen uniformly among all legal `(location, tile)` pairs.
pub fn step<R: Rng + ?Sized>(cfg: &mut Configuration, system: &TileAssemblySystem, rng: &mut R) -> Result<StepOutcome> {
    let options = tam::attachments(cfg, &system.tiles, system.temperature)?;
    if options.is_empty() {
        return Ok(StepOutcome::Terminal);
    }
    let (location, tile) = options[rng.gen_range(0..options.len())];
    cfg.insert(location, tile)?;
    Ok(StepOutcome::Attached { location, tile })
}

/// Incremental assembler: keeps the legal attachments of every frontier
/// cell and refreshes only the neighbourhood of each new tile.
#[derive(Debug, Clone)]
pub struct Assembler<'a> {
    system: &'a TileAssemblySystem,
    cfg: Configuration,
    options: BTreeMap<Point, Vec<TileId>>,
    total: usize,
    sequence: AssemblySequence,
}

impl<'a> Assembler<'a> {
    pub fn new(system: &'a TileAssemblySystem, window: Mesh) -> Result<Assembler<'a>> {
        if window.dim() != system.dim() {
            return Err(Error::Configuration("window and system dimensions differ".into()));
        }
        let cfg = system
            .seed
            .windowed(window)
            .map_err(|_| Error::Configuration(format!("seed does not fit in a window of side {}", window.side())))?;
        let mut asm = Assembler { system, sequence: AssemblySequence::new(cfg.clone()), cfg, options: BTreeMap::new(), total: 0 };
        for (p, t) in tam::attachments(&asm.cfg, &system.tiles, system.temperature)? {
            asm.options.entry(p).or_default().push(t);
            asm.total += 1;
        }
        Ok(asm)
    }

    pub fn configuration(&self) -> &Configuration {
        &self.cfg
    }

    pub fn sequence(&self) -> &AssemblySequence {
        &self.sequence
    }

    pub fn is_terminal(&self) -> bool {
        self.total == 0
    }

    /// Legal attachments in the same order as [`tam::attachments`].
    pub fn attachments(&self) -> impl Iterator<Item = (Point, TileId)> + '_ {
        self.options.iter().flat_map(|(&p, ts)| ts.iter().map(move |&t| (p, t)))
    }

    fn refresh(&mut self, p: Point) {
        if let Some(old) = self.options.remove(&p) {
            self.total -= old.len();
        }
        if self.cfg.contains(p) || !self.cfg.in_bounds(p) {
            return;
        }
        let ts = attachable_at(&self.cfg, &self.system.tiles, self.system.temperature, p);
        if !ts.is_empty() {
            self.total += ts.len();
            self.options.insert(p, ts);
        }
    }

    pub fn step<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Option<Addition> {
        if self.total == 0 {
            return None;
        }
        let pick = rng.gen_range(0..self.total);
        let (location, tile) = self.attachments().nth(pick).expect("pick < total");
        self.cfg.insert(location, tile).expect("frontier cells are empty and in bounds");
        self.sequence.push(location, tile);
        self.refresh(location);
        for &d in Direction::all(self.cfg.dim()) {
            self.refresh(location.step(d));
        }
        self.sequence.additions.last().copied()
    }

    pub fn into_sequence(self) -> AssemblySequence {
        self.sequence
    }
}

/// Result of a run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AssemblyResult {
    pub configuration: Configuration,
    /// The frontier of `configuration` (within the window) is empty.
    pub terminal: bool,
    /// Configurations in the sequence, seed stage included.
    pub stages: usize,
    pub seed: u64,
    pub sequence: AssemblySequence,
}

impl AssemblyResult {
    pub fn additions(&self) -> usize {
        self.sequence.additions.len()
    }
}

/// Default budget: one tile per stage cannot exceed the window.
pub fn default_max_stages(window: Mesh) -> usize {
    window.vertex_count() + 1
}

/// Assemble inside `window` until terminal or until `max_stages` tiles have
/// been added.
pub fn run(system: &TileAssemblySystem, window: Mesh, seed: u64, max_stages: Option<usize>) -> Result<AssemblyResult> {
    let budget = max_stages.unwrap_or_else(|| default_max_stages(window));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut asm = Assembler::new(system, window)?;
    let mut added = 0;
    while added < budget && asm.step(&mut rng).is_some() {
        added += 1;
    }
    let terminal = asm.is_terminal();
    let configuration = asm.configuration().clone();
    let sequence = asm.into_sequence();
    Ok(AssemblyResult { configuration, terminal, stages: sequence.stages(), seed, sequence })
}

/// A sequence replayed against its system: every stage checked for legality.
#[derive(Debug, Clone)]
pub struct Replay {
    pub result: Configuration,
    /// Stage at which each non-seed location was filled.
    pub stage_of: HashMap<Point, usize>,
    /// Input sides of each non-seed tile: sides contributing positive
    /// strength at the stage it bound.
    pub inputs: HashMap<Point, Vec<Direction>>,
}

/// Validate a sequence from the record alone. Any illegal stage is a
/// definition error naming the offending addition.
pub fn replay(system: &TileAssemblySystem, seq: &AssemblySequence) -> Result<Replay> {
    let tau = system.temperature as u64;
    let mut cfg = seq.seed.clone();
    let mut stage_of = HashMap::new();
    let mut inputs = HashMap::new();
    for (i, add) in seq.additions.iter().enumerate() {
        let bad = |why: &str| Error::Definition(format!("addition {} ({} at {}): {why}", i + 1, add.tile.0, add.location));
        if add.stage != i + 1 {
            return Err(bad("stage indices must increase by one from the seed"));
        }
        let tile = system.tiles.get(add.tile).ok_or_else(|| bad("unknown tile"))?;
        if cfg.contains(add.location) {
            return Err(bad("location already occupied"));
        }
        if !cfg.in_bounds(add.location) {
            return Err(bad("location outside the window"));
        }
        if attachment_strength(&cfg, &system.tiles, add.location, tile) < tau {
            return Err(bad("tile is not in the frontier at this stage"));
        }
        let ins: Vec<Direction> = Direction::all(cfg.dim())
            .iter()
            .copied()
            .filter(|&u| match cfg.get(add.location.step(u)) {
                Some(nb) => system.tiles.tile(nb).glue(u.opposite()).bond(tile.glue(u)) > 0,
                None => false,
            })
            .collect();
        cfg.insert(add.location, add.tile)?;
        stage_of.insert(add.location, add.stage);
        inputs.insert(add.location, ins);
    }
    Ok(Replay { result: cfg, stage_of, inputs })
}

/// First failed local-determinism condition.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeterminismViolation {
    /// 1: input strength ≠ τ; 2: another tile type could bind at the location;
    /// 3: the result is not terminal.
    pub condition: u8,
    pub location: Point,
    pub tile: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeterminismReport {
    pub passed: bool,
    pub violation: Option<DeterminismViolation>,
}

/// Check the three local-determinism conditions on a sequence.
///
/// Condition 2 removes the tile at `m` together with its OUT-neighbours
/// (later tiles that used `m` as an input side) and asks whether any other
/// tile type reaches τ at `m` from what remains.
pub fn check_local_determinism(system: &TileAssemblySystem, seq: &AssemblySequence) -> Result<DeterminismReport> {
    let rep = replay(system, seq)?;
    let tau = system.temperature as u64;
    let tiles = &system.tiles;
    let fail = |condition, location, tile: TileId| DeterminismReport {
        passed: false,
        violation: Some(DeterminismViolation { condition, location, tile: tiles.tile(tile).name.clone() }),
    };
    for add in &seq.additions {
        let m = add.location;
        let tile = tiles.tile(add.tile);
        let ins = &rep.inputs[&m];
        let input_strength: u64 = ins.iter().map(|&u| tile.glue(u).strength as u64).sum();
        if input_strength != tau {
            return Ok(fail(1, m, add.tile));
        }
        let mut without = rep.result.clone();
        without.remove(m);
        for &u in Direction::all(without.dim()) {
            let q = m.step(u);
            if rep.inputs.get(&q).is_some_and(|qin| qin.contains(&u.opposite())) {
                without.remove(q);
            }
        }
        for other in tiles.ids().filter(|&t| t != add.tile) {
            if attachment_strength(&without, tiles, m, tiles.tile(other)) >= tau {
                return Ok(fail(2, m, other));
            }
        }
    }
    if let Some(&(p, t)) = tam::attachments(&rep.result, tiles, system.temperature)?.first() {
        return Ok(fail(3, p, t));
    }
    Ok(DeterminismReport { passed: true, violation: None })
}

/// Whether two terminal results are the same assembly.
pub fn terminal_assemblies_equal(a: &AssemblyResult, b: &AssemblyResult) -> Result<bool> {
    if !a.terminal || !b.terminal {
        return Err(Error::Precondition("both results must be terminal".into()));
    }
    Ok(a.configuration.same_cells(&b.configuration))
}

/// Every configuration reachable from the seed inside `window`, by
/// exhaustive search over single-tile extensions.
pub fn reachable_configurations(system: &TileAssemblySystem, window: Mesh) -> Result<BTreeSet<Vec<(Point, TileId)>>> {
    let start = system.seed.windowed(window)?;
    let key = |c: &Configuration| c.iter().collect::<Vec<_>>();
    let mut seen = BTreeSet::from([key(&start)]);
    let mut stack = vec![start];
    while let Some(cfg) = stack.pop() {
        for (p, t) in tam::attachments(&cfg, &system.tiles, system.temperature)? {
            let mut next = cfg.clone();
            next.insert(p, t)?;
            if seen.insert(key(&next)) {
                stack.push(next);
            }
        }
    }
    Ok(seen)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Direction::*;
    use crate::tam::{Glue, TileSet, TileType};

    fn g(l: &str, s: u32) -> Glue {
        Glue::new(l, s)
    }

    /// Seed plus a horizontal chain type at temperature 1.
    fn chain(extra_type: bool) -> TileAssemblySystem {
        let mut tiles = vec![
            TileType::with_sides("seed", 1, 2, &[(East, g("a", 1))]),
            TileType::with_sides("link", 2, 2, &[(West, g("a", 1)), (East, g("a", 1))]),
        ];
        if extra_type {
            tiles.push(TileType::with_sides("rival", 1, 2, &[(West, g("a", 1)), (East, g("a", 1))]));
        }
        let tiles = TileSet::new(2, tiles).unwrap();
        let mut seed = Configuration::new(2);
        seed.insert(Point::xy(0, 0), TileId(0)).unwrap();
        TileAssemblySystem::new(tiles, seed, 1).unwrap()
    }

    #[test]
    fn terminal_when_nothing_binds() {
        let tiles = TileSet::new(2, vec![TileType::with_sides("s", 1, 2, &[])]).unwrap();
        let mut seed = Configuration::new(2);
        seed.insert(Point::xy(0, 0), TileId(0)).unwrap();
        let sys = TileAssemblySystem::new(tiles, seed, 1).unwrap();
        let res = run(&sys, Mesh::square(4).unwrap(), 1, None).unwrap();
        assert!(res.terminal);
        assert_eq!(res.stages, 1);
        assert!(res.configuration.same_cells(&sys.seed));
        let mut cfg = sys.seed.windowed(Mesh::square(4).unwrap()).unwrap();
        assert_eq!(step(&mut cfg, &sys, &mut ChaCha8Rng::seed_from_u64(0)).unwrap(), StepOutcome::Terminal);
    }

    #[test]
    fn single_option_is_forced() {
        let sys = chain(false);
        let mut cfg = sys.seed.windowed(Mesh::square(3).unwrap()).unwrap();
        for s in 0..20 {
            let mut c = cfg.clone();
            let out = step(&mut c, &sys, &mut ChaCha8Rng::seed_from_u64(s)).unwrap();
            assert_eq!(out, StepOutcome::Attached { location: Point::xy(1, 0), tile: TileId(1) });
        }
        step(&mut cfg, &sys, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        assert_eq!(cfg.len(), 2);
    }

    #[test]
    fn budget_cuts_run_short() {
        let sys = chain(false);
        let res = run(&sys, Mesh::square(10).unwrap(), 3, Some(5)).unwrap();
        assert!(!res.terminal);
        assert_eq!(res.additions(), 5);
        let full = run(&sys, Mesh::square(10).unwrap(), 3, None).unwrap();
        assert!(full.terminal);
        assert_eq!(full.configuration.len(), 10);
    }

    #[test]
    fn incremental_matches_direct_step() {
        let sys = chain(true);
        let window = Mesh::square(6).unwrap();
        let mut asm = Assembler::new(&sys, window).unwrap();
        let mut cfg = sys.seed.windowed(window).unwrap();
        let mut r1 = ChaCha8Rng::seed_from_u64(11);
        let mut r2 = ChaCha8Rng::seed_from_u64(11);
        loop {
            assert_eq!(asm.attachments().collect::<Vec<_>>(), tam::attachments(&cfg, &sys.tiles, 1).unwrap());
            let a = asm.step(&mut r1);
            let b = step(&mut cfg, &sys, &mut r2).unwrap();
            match (a, b) {
                (None, StepOutcome::Terminal) => break,
                (Some(add), StepOutcome::Attached { location, tile }) => {
                    assert_eq!((add.location, add.tile), (location, tile));
                }
                other => panic!("diverged: {other:?}"),
            }
        }
    }

    #[test]
    fn rival_breaks_local_determinism() {
        let sys = chain(true);
        let res = run(&sys, Mesh::square(4).unwrap(), 9, None).unwrap();
        let report = check_local_determinism(&sys, &res.sequence).unwrap();
        assert!(!report.passed);
        let v = report.violation.unwrap();
        assert_eq!(v.condition, 2);
        assert_eq!(v.location, Point::xy(1, 0));
    }

    #[test]
    fn chain_is_locally_deterministic() {
        let sys = chain(false);
        let res = run(&sys, Mesh::square(5).unwrap(), 2, None).unwrap();
        assert!(check_local_determinism(&sys, &res.sequence).unwrap().passed);
    }

    #[test]
    fn seed_only_is_vacuously_deterministic() {
        let sys = chain(false);
        let res = run(&sys, Mesh::square(1).unwrap(), 0, None).unwrap();
        assert!(res.terminal);
        assert!(check_local_determinism(&sys, &res.sequence).unwrap().passed);
    }

    #[test]
    fn truncated_sequence_fails_condition_three() {
        let sys = chain(false);
        let res = run(&sys, Mesh::square(5).unwrap(), 2, Some(2)).unwrap();
        let v = check_local_determinism(&sys, &res.sequence).unwrap().violation.unwrap();
        assert_eq!(v.condition, 3);
        assert_eq!(v.location, Point::xy(3, 0));
    }

    #[test]
    fn over_strength_input_fails_condition_one() {
        // a link binding with strength 2 at temperature 1
        let tiles = TileSet::new(
            2,
            vec![
                TileType::with_sides("seed", 1, 2, &[(East, g("a", 2))]),
                TileType::with_sides("end", 2, 2, &[(West, g("a", 2))]),
            ],
        )
        .unwrap();
        let mut seed = Configuration::new(2);
        seed.insert(Point::xy(0, 0), TileId(0)).unwrap();
        let sys = TileAssemblySystem::new(tiles, seed, 1).unwrap();
        let res = run(&sys, Mesh::square(3).unwrap(), 0, None).unwrap();
        assert_eq!(check_local_determinism(&sys, &res.sequence).unwrap().violation.unwrap().condition, 1);
    }

    #[test]
    fn malformed_sequences_are_rejected() {
        let sys = chain(false);
        let seed = sys.seed.windowed(Mesh::square(4).unwrap()).unwrap();
        let mut seq = AssemblySequence::new(seed.clone());
        seq.push(Point::xy(2, 0), TileId(1));
        assert!(matches!(check_local_determinism(&sys, &seq), Err(Error::Definition(_))));
        let mut seq = AssemblySequence::new(seed.clone());
        seq.push(Point::xy(1, 0), TileId(1));
        seq.push(Point::xy(1, 0), TileId(1));
        assert!(matches!(replay(&sys, &seq), Err(Error::Definition(_))));
        let mut seq = AssemblySequence::new(seed);
        seq.additions.push(Addition { stage: 3, location: Point::xy(1, 0), tile: TileId(1) });
        assert!(matches!(replay(&sys, &seq), Err(Error::Definition(_))));
    }

    #[test]
    fn equality_needs_terminal_results() {
        let sys = chain(false);
        let a = run(&sys, Mesh::square(4).unwrap(), 1, None).unwrap();
        let b = run(&sys, Mesh::square(4).unwrap(), 2, None).unwrap();
        assert!(terminal_assemblies_equal(&a, &a).unwrap());
        assert!(terminal_assemblies_equal(&a, &b).unwrap());
        let c = run(&sys, Mesh::square(4).unwrap(), 1, Some(1)).unwrap();
        assert!(matches!(terminal_assemblies_equal(&a, &c), Err(Error::Precondition(_))));
        let d = run(&chain(true), Mesh::square(4).unwrap(), 1, None).unwrap();
        let differs = (0..20).any(|s| {
            let e = run(&chain(true), Mesh::square(4).unwrap(), s, None).unwrap();
            !terminal_assemblies_equal(&d, &e).unwrap()
        });
        assert!(differs);
    }

    #[test]
    fn seed_outside_window_is_rejected() {
        let sys = chain(false);
        let mut seed = Configuration::new(2);
        seed.insert(Point::xy(5, 5), TileId(0)).unwrap();
        let far = TileAssemblySystem::new(sys.tiles.clone(), seed, 1).unwrap();
        assert!(matches!(run(&far, Mesh::square(3).unwrap(), 0, None), Err(Error::Configuration(_))));
    }
}
