//! Models of d-regular self-assembling agents with multiple nucleation.
//!
//! An agent type carries one glue label (or none) per side, a color and a
//! memoryless message rule. Binding is governed by a symmetric table of
//! glue-pair strengths, a temperature, and kinetic rates that make the model
//! reversible and error-permitting when asked to. The surface is always a
//! mesh window; growth beyond it is not represented.

mod beta;
mod file;
mod rule;

use std::collections::BTreeMap;

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{Direction, Mesh, Point, MAX_DEGREE};
use crate::lcl::Coloring;
use crate::rng::CellStreams;
use crate::tam::{TileAssemblySystem, TileId};

pub use beta::{beta_hat, induce_beta_hat, Distribution, TransitionFunction};
pub use file::{lint_model, AgentDoc, AgentModelDoc, AgentSeedDoc, BindingRuleDoc, Diagnostic, KineticsDoc, RuleCaseDoc, Severity, WhenDoc};
pub use rule::{MessageRule, Pattern, RuleCase};

/// A message slot carries at most this many symbols.
pub const MAX_MESSAGE_SYMBOLS: usize = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AgentId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GlueId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MessageId(pub usize);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AgentType {
    pub name: String,
    pub color: u32,
    /// One entry per side in canonical order; `None` means no glue.
    pub glues: Vec<Option<GlueId>>,
    pub rule: MessageRule,
}

/// Symmetric glue-pair strengths. Pairs absent from the table bind with 0.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct BindingRules {
    strengths: BTreeMap<(GlueId, GlueId), i64>,
}

impl BindingRules {
    fn key(a: GlueId, b: GlueId) -> (GlueId, GlueId) {
        (a.min(b), a.max(b))
    }

    /// Returns false if the pair was already present.
    pub fn insert(&mut self, a: GlueId, b: GlueId, strength: i64) -> bool {
        self.strengths.insert(Self::key(a, b), strength).is_none()
    }

    pub fn strength(&self, a: GlueId, b: GlueId) -> Option<i64> {
        self.strengths.get(&Self::key(a, b)).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (GlueId, GlueId, i64)> + '_ {
        self.strengths.iter().map(|(&(a, b), &s)| (a, b, s))
    }

    pub fn len(&self) -> usize {
        self.strengths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.strengths.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Kinetics {
    /// Total attachment probability per round at a cell with neighbours, in (0, 1].
    pub lambda_on: f64,
    /// Per-round detachment probability of an under-bonded agent, in [0, 1).
    pub p_off: f64,
    /// Fraction of attachments that pick a uniformly random type, in [0, 1).
    pub epsilon: f64,
    pub detach: bool,
}

impl Kinetics {
    /// Irreversible, error-free attachment with probability `lambda_on`.
    pub fn irreversible(lambda_on: f64) -> Kinetics {
        Kinetics { lambda_on, p_off: 0.0, epsilon: 0.0, detach: false }
    }
}

/// What a cell hears from its neighbours: one glue and one message per side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct LocalInputs {
    pub glues: [Option<GlueId>; MAX_DEGREE],
    pub messages: [Option<MessageId>; MAX_DEGREE],
}

impl LocalInputs {
    pub fn is_silent(&self) -> bool {
        self.glues.iter().all(Option::is_none) && self.messages.iter().all(Option::is_none)
    }
}

/// β̂'s input tuple.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct LocalView {
    pub occupant: Option<AgentId>,
    pub inputs: LocalInputs,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AgentModel {
    pub name: Option<String>,
    pub dimension: usize,
    pub agents: Vec<AgentType>,
    pub glue_labels: Vec<String>,
    pub messages: Vec<String>,
    pub rules: BindingRules,
    pub temperature: i64,
    pub seed: Vec<(Point, AgentId)>,
    pub pi_nu: f64,
    pub kinetics: Kinetics,
    pub use_ids: bool,
    pub nucleate_every_round: bool,
}

impl AgentModel {
    pub fn degree(&self) -> usize {
        2 * self.dimension
    }

    pub fn agent(&self, id: AgentId) -> &AgentType {
        &self.agents[id.0]
    }

    pub fn agent_id(&self, name: &str) -> Option<AgentId> {
        self.agents.iter().position(|a| a.name == name).map(AgentId)
    }

    pub fn max_color(&self) -> u32 {
        self.agents.iter().map(|a| a.color).max().unwrap_or(1)
    }

    /// Realized binding strength of agent `t` against the neighbour glues.
    pub fn bond_total(&self, t: AgentId, inputs: &LocalInputs) -> i64 {
        let agent = &self.agents[t.0];
        (0..self.degree())
            .map(|u| match (agent.glues[u], inputs.glues[u]) {
                (Some(a), Some(b)) => self.rules.strength(a, b).unwrap_or(0),
                _ => 0,
            })
            .sum()
    }

    pub fn beta_hat(&self) -> TransitionFunction {
        induce_beta_hat(self)
    }
}

/// One agent placed on the surface.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Placed {
    pub agent: AgentId,
    pub id: Option<u64>,
}

/// State of the model on a mesh window: occupancy plus each agent's
/// outgoing messages.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Surface {
    mesh: Mesh,
    cells: Vec<Option<Placed>>,
    outgoing: Vec<[Option<MessageId>; MAX_DEGREE]>,
    seed_mask: Vec<bool>,
    round: u64,
}

impl Surface {
    /// Stage 0 before nucleation: the seed assembly on an otherwise empty mesh.
    pub fn seeded(model: &AgentModel, mesh: Mesh) -> Result<Surface> {
        if mesh.dim() != model.dimension {
            return Err(Error::Configuration("mesh and model dimensions differ".into()));
        }
        let n = mesh.vertex_count();
        let mut s = Surface { mesh, cells: vec![None; n], outgoing: vec![[None; MAX_DEGREE]; n], seed_mask: vec![false; n], round: 0 };
        for &(p, a) in &model.seed {
            let i = mesh.index(p).ok_or_else(|| Error::Configuration(format!("seed agent at {p} lies outside the mesh")))?;
            s.place(model, i, a);
            s.seed_mask[i] = true;
        }
        Ok(s)
    }

    /// A surface with the given occupancy and freshly computed messages.
    pub fn from_occupancy(model: &AgentModel, mesh: Mesh, occupancy: &[Option<AgentId>]) -> Result<Surface> {
        if occupancy.len() != mesh.vertex_count() {
            return Err(Error::Domain("occupancy length does not match the mesh".into()));
        }
        let mut s = Surface::seeded(&AgentModel { seed: Vec::new(), ..model.clone() }, mesh)?;
        for (i, a) in occupancy.iter().enumerate() {
            if let Some(a) = *a {
                s.place(model, i, a);
            }
        }
        Ok(s)
    }

    fn place(&mut self, model: &AgentModel, i: usize, a: AgentId) {
        let placed = Placed { agent: a, id: model.use_ids.then_some(i as u64) };
        self.cells[i] = Some(placed);
        self.outgoing[i] = model.agent(a).rule.outgoing(&LocalInputs::default(), placed.id);
    }

    pub fn mesh(&self) -> Mesh {
        self.mesh
    }

    pub fn round(&self) -> u64 {
        self.round
    }

    pub fn cell(&self, i: usize) -> Option<Placed> {
        self.cells[i]
    }

    pub fn outgoing(&self, i: usize) -> &[Option<MessageId>; MAX_DEGREE] {
        &self.outgoing[i]
    }

    pub fn occupancy(&self) -> Vec<Option<AgentId>> {
        self.cells.iter().map(|c| c.map(|p| p.agent)).collect()
    }

    pub fn occupied_count(&self) -> usize {
        self.cells.iter().filter(|c| c.is_some()).count()
    }

    pub fn coloring(&self, model: &AgentModel) -> Coloring {
        let colors = self.cells.iter().map(|c| c.map(|p| model.agent(p.agent).color)).collect();
        Coloring::from_colors(self.mesh, model.max_color(), colors).expect("one color per vertex")
    }

    /// Glue and message heard at cell `i` from each side.
    pub fn inputs_at(&self, model: &AgentModel, i: usize) -> LocalInputs {
        let mut inputs = LocalInputs::default();
        for &d in self.mesh.directions() {
            let Some(j) = self.mesh.neighbor_index(i, d) else { continue };
            if let Some(nb) = self.cells[j] {
                let back = d.opposite().index();
                inputs.glues[d.index()] = model.agent(nb.agent).glues[back];
                inputs.messages[d.index()] = self.outgoing[j][back];
            }
        }
        inputs
    }

    pub fn view(&self, model: &AgentModel, i: usize) -> LocalView {
        LocalView { occupant: self.cells[i].map(|p| p.agent), inputs: self.inputs_at(model, i) }
    }

    /// Sample cell `i`'s next state and outgoing messages from β̂ and the agent rule.
    fn next_cell<R: Rng + ?Sized>(&self, model: &AgentModel, i: usize, rng: &mut R) -> (Option<Placed>, [Option<MessageId>; MAX_DEGREE]) {
        let view = self.view(model, i);
        let next = beta_hat(model, &view).sample(rng.gen::<f64>());
        let placed = match (self.cells[i], next) {
            (Some(p), Some(a)) if p.agent == a => Some(p),
            (_, Some(a)) => Some(Placed { agent: a, id: model.use_ids.then_some(i as u64) }),
            (_, None) => None,
        };
        let out = placed.map(|p| model.agent(p.agent).rule.outgoing(&view.inputs, p.id)).unwrap_or_default();
        (placed, out)
    }
}

/// How a model step updates the surface.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheduler {
    /// One uniformly chosen location per step.
    Sequential,
    /// Every location samples β̂ from the pre-step state at once.
    Synchronous,
}

impl std::str::FromStr for Scheduler {
    type Err = Error;
    fn from_str(s: &str) -> Result<Scheduler> {
        match s {
            "sequential" => Ok(Scheduler::Sequential),
            "synchronous" => Ok(Scheduler::Synchronous),
            other => Err(Error::Configuration(format!("unknown scheduler {other:?}"))),
        }
    }
}

/// Advance the surface by one step. Messages are recomputed from the agent
/// rules using the inputs each cell heard before the update.
pub fn model_step<R: RngCore + ?Sized>(surface: &mut Surface, model: &AgentModel, scheduler: Scheduler, rng: &mut R) {
    let round = surface.round + 1;
    match scheduler {
        Scheduler::Sequential => {
            let i = rng.gen_range(0..surface.cells.len());
            let (cell, out) = surface.next_cell(model, i, rng);
            surface.cells[i] = cell;
            surface.outgoing[i] = out;
        }
        Scheduler::Synchronous => {
            let streams = CellStreams::new(rng.next_u64());
            let next: Vec<_> = (0..surface.cells.len()).map(|i| surface.next_cell(model, i, &mut streams.stream(round, i))).collect();
            for (i, (cell, out)) in next.into_iter().enumerate() {
                surface.cells[i] = cell;
                surface.outgoing[i] = out;
            }
        }
    }
    surface.round = round;
}

/// Multiple nucleation: every empty non-seed location independently receives
/// an agent with probability π_ν, of a uniformly random type.
pub fn nucleate<R: RngCore + ?Sized>(surface: &mut Surface, model: &AgentModel, rng: &mut R) -> Result<usize> {
    if surface.round > 0 && !model.nucleate_every_round {
        return Err(Error::Precondition(format!("nucleation happens at round 0 only (surface is at round {})", surface.round)));
    }
    if model.agents.is_empty() {
        return Ok(0);
    }
    let streams = CellStreams::new(rng.next_u64());
    let mut placed = 0;
    for i in 0..surface.cells.len() {
        if surface.cells[i].is_some() || surface.seed_mask[i] {
            continue;
        }
        let mut r = streams.stream(surface.round, i);
        if r.gen::<f64>() < model.pi_nu {
            let a = AgentId(r.gen_range(0..model.agents.len()));
            surface.place(model, i, a);
            placed += 1;
        }
    }
    Ok(placed)
}

/// Agent types with positive attachment probability at an empty cell.
pub fn attachable(model: &AgentModel, surface: &Surface, i: usize) -> Vec<AgentId> {
    if surface.cells[i].is_some() {
        return Vec::new();
    }
    let d = beta_hat(model, &surface.view(model, i));
    d.support().into_iter().flatten().collect()
}

/// Express a tile assembly system as an agent model: passive agents, glue
/// `(label, s)` with `s > 0` becomes the agent glue `label@s`, and each such
/// glue binds only to itself with strength `s`. Attachment is certain and
/// irreversible and there is no nucleation.
pub fn embed_tile_system(system: &TileAssemblySystem) -> AgentModel {
    let dim = system.dim();
    let mut labels: Vec<String> = Vec::new();
    let mut rules = BindingRules::default();
    let mut intern = |label: &str, strength: u32, rules: &mut BindingRules| {
        let name = format!("{label}@{strength}");
        let id = match labels.iter().position(|l| *l == name) {
            Some(i) => GlueId(i),
            None => {
                labels.push(name);
                GlueId(labels.len() - 1)
            }
        };
        rules.insert(id, id, strength as i64);
        id
    };
    let agents = system
        .tiles
        .tiles()
        .iter()
        .map(|t| AgentType {
            name: t.name.clone(),
            color: t.color,
            glues: Direction::all(dim)
                .iter()
                .map(|&d| {
                    let g = t.glue(d);
                    (g.strength > 0).then(|| intern(&g.label, g.strength, &mut rules))
                })
                .collect(),
            rule: MessageRule::null(),
        })
        .collect();
    AgentModel {
        name: system.name.clone(),
        dimension: dim,
        agents,
        glue_labels: labels,
        messages: Vec::new(),
        rules,
        temperature: system.temperature as i64,
        seed: system.seed.iter().map(|(p, TileId(t))| (p, AgentId(t))).collect(),
        pi_nu: 0.0,
        kinetics: Kinetics::irreversible(1.0),
        use_ids: false,
        nucleate_every_round: false,
    }
}
