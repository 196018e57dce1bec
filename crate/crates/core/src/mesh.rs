//! The synchronous processor network that simulates an agent model.
//!
//! One processor per mesh vertex. Each holds the simulated local state (an
//! agent type or EMPTY), its COLOR, and one input and one output buffer per
//! side. A round has two phases: every processor computes from its input
//! buffers only, then all output buffers are delivered to the neighbours'
//! input buffers at the barrier. Randomness comes from a per-processor,
//! per-round stream, so sequential and parallel evaluation agree exactly.

use std::collections::BTreeMap;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::agent::{AgentId, AgentModel, GlueId, LocalInputs, LocalView, MessageId, TransitionFunction, MAX_MESSAGE_SYMBOLS};
use crate::error::{Error, Result};
use crate::lattice::{Mesh, Point, MAX_DEGREE};
use crate::lcl::Coloring;
use crate::rng::CellStreams;

/// Largest payload of one packet in symbols: one glue plus one message.
pub const MAX_PACKET_SYMBOLS: usize = 1 + MAX_MESSAGE_SYMBOLS;

/// What a processor sends across one side in one round.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Packet {
    pub glue: Option<GlueId>,
    pub message: Option<MessageId>,
}

impl Packet {
    pub fn symbols(&self) -> usize {
        self.glue.is_some() as usize + self.message.is_some() as usize
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProcessorState {
    pub coords: Point,
    /// `None` is EMPTY.
    pub state: Option<AgentId>,
    pub color: Option<u32>,
    pub id: Option<u64>,
    pub inbuf: [Option<Packet>; MAX_DEGREE],
    pub outbuf: [Option<Packet>; MAX_DEGREE],
}

impl ProcessorState {
    fn inputs(&self) -> LocalInputs {
        let mut inputs = LocalInputs::default();
        for (u, p) in self.inbuf.iter().enumerate() {
            if let Some(p) = p {
                inputs.glues[u] = p.glue;
                inputs.messages[u] = p.message;
            }
        }
        inputs
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TraceEvent {
    pub round: u64,
    pub location: Point,
    pub old: Option<AgentId>,
    pub new: Option<AgentId>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExecMode {
    #[default]
    Sequential,
    Parallel,
}

/// Counts cross-processor data movement; every transfer must be between
/// mesh neighbours.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct LocalityProbe {
    pub transfers: u64,
    pub violations: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct MessageStats {
    pub packets: u64,
    pub max_symbols: usize,
}

#[derive(Debug, Clone)]
pub struct MeshNetwork {
    mesh: Mesh,
    procs: Vec<ProcessorState>,
    beta: TransitionFunction,
    round: u64,
    initialized: bool,
    master_seed: u64,
    streams: CellStreams,
    mode: ExecMode,
    probe: LocalityProbe,
    stats: MessageStats,
}

/// A processor's view of the network after its compute phase.
struct Next {
    state: Option<AgentId>,
    outbuf: [Option<Packet>; MAX_DEGREE],
}

impl MeshNetwork {
    pub fn new(model: &AgentModel, mesh: Mesh, master_seed: u64) -> Result<MeshNetwork> {
        if mesh.dim() != model.dimension {
            return Err(Error::Configuration(format!("model is {}-dimensional but the mesh is {}-dimensional", model.dimension, mesh.dim())));
        }
        let procs = mesh
            .points()
            .enumerate()
            .map(|(i, p)| ProcessorState {
                coords: p,
                state: None,
                color: None,
                id: model.use_ids.then_some(i as u64),
                inbuf: [None; MAX_DEGREE],
                outbuf: [None; MAX_DEGREE],
            })
            .collect();
        Ok(MeshNetwork {
            mesh,
            procs,
            beta: model.beta_hat(),
            round: 0,
            initialized: false,
            master_seed,
            streams: CellStreams::new(master_seed),
            mode: ExecMode::Sequential,
            probe: LocalityProbe::default(),
            stats: MessageStats::default(),
        })
    }

    pub fn with_mode(mut self, mode: ExecMode) -> MeshNetwork {
        self.mode = mode;
        self
    }

    pub fn set_mode(&mut self, mode: ExecMode) {
        self.mode = mode;
    }

    pub fn model(&self) -> &AgentModel {
        self.beta.model()
    }

    pub fn mesh(&self) -> Mesh {
        self.mesh
    }

    pub fn round(&self) -> u64 {
        self.round
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn processors(&self) -> &[ProcessorState] {
        &self.procs
    }

    pub fn processor(&self, p: Point) -> Option<&ProcessorState> {
        self.mesh.index(p).map(|i| &self.procs[i])
    }

    pub fn locality(&self) -> LocalityProbe {
        self.probe
    }

    pub fn message_stats(&self) -> MessageStats {
        self.stats
    }

    /// Overwrite one processor's simulated state, as an outside perturbation.
    /// Its buffers are left untouched.
    pub fn set_state(&mut self, p: Point, state: Option<AgentId>) -> Result<()> {
        let i = self.mesh.index(p).ok_or_else(|| Error::Domain(format!("{p} is not a processor")))?;
        self.procs[i].state = state;
        self.procs[i].color = state.map(|a| self.beta.model().agent(a).color);
        Ok(())
    }

    fn posts(&self, state: Option<AgentId>, inputs: &LocalInputs, id: Option<u64>) -> [Option<Packet>; MAX_DEGREE] {
        let mut out = [None; MAX_DEGREE];
        let Some(a) = state else { return out };
        let agent = self.model().agent(a);
        let messages = agent.rule.outgoing(inputs, id);
        for &d in self.mesh.directions() {
            let u = d.index();
            let packet = Packet { glue: agent.glues[u], message: messages[u] };
            if packet.symbols() > 0 {
                out[u] = Some(packet);
            }
        }
        out
    }

    fn enter(&mut self, i: usize, state: Option<AgentId>, outbuf: [Option<Packet>; MAX_DEGREE]) {
        let color = state.map(|a| self.model().agent(a).color);
        let p = &mut self.procs[i];
        p.state = state;
        p.color = color;
        p.outbuf = outbuf;
    }

    /// Round 0: seed processors take the seed's agent types; every other
    /// processor wakes with probability π_ν into a uniformly random agent
    /// state. Initial outputs are posted and delivered.
    pub fn init_round0(&mut self) -> Result<Vec<TraceEvent>> {
        if self.initialized || self.round != 0 || self.procs.iter().any(|p| p.state.is_some()) {
            return Err(Error::Precondition("round 0 runs once, on a fresh all-EMPTY network".into()));
        }
        let model = self.model().clone();
        let mut seeded = vec![false; self.procs.len()];
        for &(p, a) in &model.seed {
            let i = self.mesh.index(p).ok_or_else(|| Error::Configuration(format!("seed agent at {p} lies outside the mesh")))?;
            seeded[i] = true;
            let out = self.posts(Some(a), &LocalInputs::default(), self.procs[i].id);
            self.enter(i, Some(a), out);
        }
        if !model.agents.is_empty() && model.pi_nu > 0.0 {
            for i in 0..self.procs.len() {
                if seeded[i] {
                    continue;
                }
                let mut r = self.streams.stream(0, i);
                if r.gen::<f64>() < model.pi_nu {
                    let a = AgentId(r.gen_range(0..model.agents.len()));
                    let out = self.posts(Some(a), &LocalInputs::default(), self.procs[i].id);
                    self.enter(i, Some(a), out);
                }
            }
        }
        self.initialized = true;
        self.deliver()?;
        Ok(self
            .procs
            .iter()
            .filter_map(|p| p.state.map(|a| TraceEvent { round: 0, location: p.coords, old: None, new: Some(a) }))
            .collect())
    }

    /// Compute phase for processor `i`; reads only its own state and buffers.
    fn compute(&self, i: usize) -> Next {
        let p = &self.procs[i];
        let inputs = p.inputs();
        let model = self.model();
        let mut rng = self.streams.stream(self.round + 1, i);
        if p.state.is_none() && inputs.is_silent() {
            // idle; optionally wake up as a late nucleation site
            if model.nucleate_every_round && !model.agents.is_empty() {
                let _ = rng.gen::<f64>();
                if rng.gen::<f64>() < model.pi_nu {
                    let a = AgentId(rng.gen_range(0..model.agents.len()));
                    return Next { state: Some(a), outbuf: self.posts(Some(a), &inputs, p.id) };
                }
            }
            return Next { state: None, outbuf: [None; MAX_DEGREE] };
        }
        let view = LocalView { occupant: p.state, inputs };
        let state = self.beta.distribution(&view).sample(rng.gen::<f64>());
        Next { state, outbuf: self.posts(state, &inputs, p.id) }
    }

    /// Barrier: move every output buffer into the facing input buffer.
    fn deliver(&mut self) -> Result<()> {
        let mut inboxes = vec![[None; MAX_DEGREE]; self.procs.len()];
        let limit = self.model().messages.len();
        let glues = self.model().glue_labels.len();
        for i in 0..self.procs.len() {
            for &d in self.mesh.directions() {
                let Some(packet) = self.procs[i].outbuf[d.index()] else { continue };
                let size = packet.symbols();
                if size > MAX_PACKET_SYMBOLS || packet.message.is_some_and(|m| m.0 >= limit) || packet.glue.is_some_and(|g| g.0 >= glues) {
                    return Err(Error::Definition(format!("processor {} posted an out-of-bound packet", self.procs[i].coords)));
                }
                self.stats.packets += 1;
                self.stats.max_symbols = self.stats.max_symbols.max(size);
                let Some(j) = self.mesh.neighbor_index(i, d) else { continue };
                self.probe.transfers += 1;
                if self.procs[i].coords.l1_distance(self.procs[j].coords) != 1 {
                    self.probe.violations += 1;
                }
                inboxes[j][d.opposite().index()] = Some(packet);
            }
        }
        for (p, inbox) in self.procs.iter_mut().zip(inboxes) {
            p.inbuf = inbox;
            p.outbuf = [None; MAX_DEGREE];
        }
        Ok(())
    }

    /// Processor `i`'s next simulated state given the current buffers,
    /// without changing the network.
    pub fn peek_next_state(&self, p: Point) -> Result<Option<AgentId>> {
        let i = self.mesh.index(p).ok_or_else(|| Error::Domain(format!("{p} is not a processor")))?;
        Ok(self.compute(i).state)
    }

    pub fn run_round(&mut self) -> Result<Vec<TraceEvent>> {
        if !self.initialized {
            return Err(Error::Precondition("init_round0 must run before any round".into()));
        }
        let next: Vec<Next> = match self.mode {
            ExecMode::Sequential => (0..self.procs.len()).map(|i| self.compute(i)).collect(),
            ExecMode::Parallel => (0..self.procs.len()).into_par_iter().map(|i| self.compute(i)).collect(),
        };
        self.round += 1;
        let mut events = Vec::new();
        for (i, n) in next.into_iter().enumerate() {
            let old = self.procs[i].state;
            if old != n.state {
                events.push(TraceEvent { round: self.round, location: self.procs[i].coords, old, new: n.state });
            }
            self.enter(i, n.state, n.outbuf);
        }
        self.deliver()?;
        Ok(events)
    }

    pub fn run(&mut self, rounds: u64) -> Result<Vec<TraceEvent>> {
        let mut events = Vec::new();
        for _ in 0..rounds {
            events.extend(self.run_round()?);
        }
        Ok(events)
    }

    pub fn snapshot(&self) -> Vec<Option<AgentId>> {
        self.procs.iter().map(|p| p.state).collect()
    }

    pub fn coloring(&self) -> Coloring {
        Coloring::from_colors(self.mesh, self.model().max_color(), self.procs.iter().map(|p| p.color).collect()).expect("one color per processor")
    }

    pub fn extract_configuration(&self) -> Extracted {
        Extracted {
            cells: self.procs.iter().filter_map(|p| p.state.map(|a| (p.coords, a))).collect(),
            coloring: self.coloring(),
        }
    }
}

/// The simulated surface read back from a network.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Extracted {
    pub cells: BTreeMap<Point, AgentId>,
    pub coloring: Coloring,
}

impl Extracted {
    pub fn occupancy(&self) -> Vec<Option<AgentId>> {
        let mesh = self.coloring.mesh();
        mesh.points().map(|p| self.cells.get(&p).copied()).collect()
    }
}

/// Full trace of a run: round-0 events followed by every later state change.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trace {
    pub master_seed: u64,
    pub events: Vec<TraceEvent>,
}

/// Build a network, run round 0 and then `rounds` rounds.
pub fn simulate(model: &AgentModel, mesh: Mesh, master_seed: u64, rounds: u64, mode: ExecMode) -> Result<(MeshNetwork, Trace)> {
    let mut net = MeshNetwork::new(model, mesh, master_seed)?.with_mode(mode);
    let mut events = net.init_round0()?;
    events.extend(net.run(rounds)?);
    Ok((net, Trace { master_seed, events }))
}


#[cfg(test)]
mod tests {
    use super::*;

    fn forced() -> AgentModel {
        AgentModel::from_json(
            r#"{
                "agents": [{"name": "F", "color": 1, "glues": {"west": "f", "north": "f", "east": "f", "south": "f"}}],
                "rules": [{"a": "f", "b": "f", "strength": 1}],
                "temperature": 1,
                "seed": [{"x": 0, "y": 0, "agent": "F"}],
                "kinetics": {"lambda_on": 1.0, "detach": false}
            }"#,
        )
        .unwrap()
    }

    #[test]
    fn seed_only_round_zero() {
        let m = forced();
        let (net, trace) = simulate(&m, Mesh::square(3).unwrap(), 1, 0, ExecMode::Sequential).unwrap();
        assert_eq!(trace.events.len(), 1);
        assert_eq!(net.extract_configuration().cells.len(), 1);
    }

    #[test]
    fn forced_growth_wavefront() {
        let m = forced();
        let (net, _) = simulate(&m, Mesh::square(3).unwrap(), 1, 2, ExecMode::Sequential).unwrap();
        for p in net.mesh().points() {
            assert_eq!(net.processor(p).unwrap().state.is_some(), p.x + p.y <= 2, "{p}");
        }
    }

    #[test]
    fn empty_network_is_a_fixed_point() {
        let mut m = forced();
        m.seed.clear();
        let (net, trace) = simulate(&m, Mesh::square(4).unwrap(), 3, 5, ExecMode::Parallel).unwrap();
        assert!(trace.events.is_empty());
        assert!(net.snapshot().iter().all(Option::is_none));
    }

    #[test]
    fn round_zero_once() {
        let m = forced();
        let mut net = MeshNetwork::new(&m, Mesh::square(2).unwrap(), 0).unwrap();
        assert!(matches!(net.run_round(), Err(Error::Precondition(_))));
        net.init_round0().unwrap();
        assert!(matches!(net.init_round0(), Err(Error::Precondition(_))));
    }

    #[test]
    fn seed_outside_mesh() {
        let mut m = forced();
        m.seed = vec![(Point::xy(5, 5), AgentId(0))];
        let mut net = MeshNetwork::new(&m, Mesh::square(2).unwrap(), 0).unwrap();
        assert!(matches!(net.init_round0(), Err(Error::Configuration(_))));
    }
}
