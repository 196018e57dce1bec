//! Static objects of the abstract Tile Assembly Model: glues, tile types,
//! configurations, binding graphs and their cuts, τ-stability and frontiers.

mod file;
mod mincut;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{Direction, Mesh, Point};

pub use file::{GlueDoc, SeedDoc, TileDoc, TileSystemDoc};
pub use mincut::stoer_wagner;

/// A glue: a label and a nonnegative strength. The empty glue has an empty
/// label and strength 0 and never binds.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
pub struct Glue {
    pub label: String,
    pub strength: u32,
}

impl Glue {
    pub fn new(label: impl Into<String>, strength: u32) -> Glue {
        Glue { label: label.into(), strength }
    }

    pub fn empty() -> Glue {
        Glue::default()
    }

    pub fn is_empty(&self) -> bool {
        self.label.is_empty() && self.strength == 0
    }

    /// Strength with which two abutting glues bind: the shared strength when
    /// label and strength agree, 0 otherwise.
    pub fn bond(&self, other: &Glue) -> u32 {
        if self == other {
            self.strength
        } else {
            0
        }
    }
}

impl fmt::Display for Glue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.label, self.strength)
    }
}

/// Index of a tile type within its [`TileSet`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TileId(pub usize);

/// A translatable, non-rotatable unit cell with one glue per direction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TileType {
    pub name: String,
    pub color: u32,
    /// One glue per direction, canonical order.
    pub glues: Vec<Glue>,
}

impl TileType {
    pub fn new(name: impl Into<String>, color: u32, glues: Vec<Glue>) -> TileType {
        TileType { name: name.into(), color, glues }
    }

    /// Build a tile from `(direction, glue)` pairs; unspecified sides get the empty glue.
    pub fn with_sides(name: impl Into<String>, color: u32, dim: usize, sides: &[(Direction, Glue)]) -> TileType {
        let mut glues = vec![Glue::empty(); 2 * dim];
        for (d, g) in sides {
            glues[d.index()] = g.clone();
        }
        TileType::new(name, color, glues)
    }

    pub fn glue(&self, d: Direction) -> &Glue {
        &self.glues[d.index()]
    }
}

/// A finite set of tile types with unique names.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TileSet {
    dim: usize,
    tiles: Vec<TileType>,
    by_name: HashMap<String, TileId>,
}

impl TileSet {
    pub fn new(dim: usize, tiles: Vec<TileType>) -> Result<TileSet> {
        if dim != 2 && dim != 3 {
            return Err(Error::UnsupportedDimension(dim));
        }
        let mut by_name = HashMap::new();
        for (i, t) in tiles.iter().enumerate() {
            if t.glues.len() != 2 * dim {
                return Err(Error::Definition(format!(
                    "tile {:?} has {} glues, expected {}",
                    t.name,
                    t.glues.len(),
                    2 * dim
                )));
            }
            if t.color == 0 {
                return Err(Error::Definition(format!("tile {:?} has color 0; colors start at 1", t.name)));
            }
            if by_name.insert(t.name.clone(), TileId(i)).is_some() {
                return Err(Error::Definition(format!("duplicate tile name {:?}", t.name)));
            }
        }
        Ok(TileSet { dim, tiles, by_name })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.tiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tiles.is_empty()
    }

    pub fn get(&self, id: TileId) -> Option<&TileType> {
        self.tiles.get(id.0)
    }

    pub fn tile(&self, id: TileId) -> &TileType {
        &self.tiles[id.0]
    }

    pub fn id(&self, name: &str) -> Option<TileId> {
        self.by_name.get(name).copied()
    }

    pub fn ids(&self) -> impl Iterator<Item = TileId> {
        (0..self.tiles.len()).map(TileId)
    }

    pub fn tiles(&self) -> &[TileType] {
        &self.tiles
    }

    pub fn max_color(&self) -> u32 {
        self.tiles.iter().map(|t| t.color).max().unwrap_or(1)
    }

    fn resolve(&self, id: TileId) -> Result<&TileType> {
        self.get(id).ok_or_else(|| Error::Definition(format!("tile id {} does not resolve in a set of {}", id.0, self.len())))
    }
}

/// A finite partial map from lattice points to tile types, optionally
/// confined to a window (an `n^k` mesh anchored at the origin).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Configuration {
    dim: usize,
    cells: BTreeMap<Point, TileId>,
    window: Option<Mesh>,
}

impl Configuration {
    pub fn new(dim: usize) -> Configuration {
        Configuration { dim, cells: BTreeMap::new(), window: None }
    }

    pub fn with_window(window: Mesh) -> Configuration {
        Configuration { dim: window.dim(), cells: BTreeMap::new(), window: Some(window) }
    }

    /// Resolve `(point, tile name)` pairs against a tile set.
    pub fn from_names(dim: usize, entries: &[(Point, &str)], tiles: &TileSet) -> Result<Configuration> {
        let mut cfg = Configuration::new(dim);
        for &(p, name) in entries {
            let id = tiles.id(name).ok_or_else(|| Error::Definition(format!("unknown tile {name:?}")))?;
            cfg.insert(p, id)?;
        }
        Ok(cfg)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn window(&self) -> Option<Mesh> {
        self.window
    }

    /// Same cells, confined to `window`. Fails if a cell lies outside it.
    pub fn windowed(&self, window: Mesh) -> Result<Configuration> {
        let mut out = Configuration::with_window(window);
        for (&p, &t) in &self.cells {
            out.insert(p, t)?;
        }
        Ok(out)
    }

    pub fn get(&self, p: Point) -> Option<TileId> {
        self.cells.get(&p).copied()
    }

    pub fn contains(&self, p: Point) -> bool {
        self.cells.contains_key(&p)
    }

    pub fn in_bounds(&self, p: Point) -> bool {
        match self.window {
            Some(w) => w.contains(p),
            None => self.dim == 3 || p.z == 0,
        }
    }

    pub fn insert(&mut self, p: Point, t: TileId) -> Result<()> {
        if !self.in_bounds(p) {
            return Err(Error::Domain(format!("{p} lies outside the configuration window")));
        }
        if self.cells.contains_key(&p) {
            return Err(Error::Domain(format!("{p} is already occupied")));
        }
        self.cells.insert(p, t);
        Ok(())
    }

    pub fn remove(&mut self, p: Point) -> Option<TileId> {
        self.cells.remove(&p)
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Point, TileId)> + '_ {
        self.cells.iter().map(|(&p, &t)| (p, t))
    }

    pub fn domain(&self) -> impl Iterator<Item = Point> + '_ {
        self.cells.keys().copied()
    }

    /// Same domain and same tile at every location; windows are ignored.
    pub fn same_cells(&self, other: &Configuration) -> bool {
        self.cells == other.cells
    }

    pub fn cells(&self) -> &BTreeMap<Point, TileId> {
        &self.cells
    }
}

/// One edge of a binding graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BindingEdge {
    pub a: usize,
    pub b: usize,
    pub strength: u64,
}

/// Vertices are occupied points; edges join abutting tiles whose glues match
/// with positive strength, weighted by that strength.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct BindingGraph {
    pub vertices: Vec<Point>,
    pub edges: Vec<BindingEdge>,
}

/// Binding strength of a graph: the minimum cut, or infinity when no cut exists.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BindingStrength {
    Finite(u64),
    Infinite,
}

impl BindingStrength {
    pub fn at_least(self, tau: u64) -> bool {
        match self {
            BindingStrength::Finite(s) => s >= tau,
            BindingStrength::Infinite => true,
        }
    }
}

impl fmt::Display for BindingStrength {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BindingStrength::Finite(s) => write!(f, "{s}"),
            BindingStrength::Infinite => write!(f, "inf"),
        }
    }
}

impl BindingGraph {
    /// A graph over arbitrary vertex labels, e.g. for testing the cut routines.
    pub fn from_edges(vertices: Vec<Point>, edges: Vec<BindingEdge>) -> Result<BindingGraph> {
        for e in &edges {
            if e.a >= vertices.len() || e.b >= vertices.len() || e.a == e.b {
                return Err(Error::Domain(format!("edge {}-{} is not between two distinct vertices", e.a, e.b)));
            }
        }
        Ok(BindingGraph { vertices, edges })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    /// Total strength of edges crossing the cut whose one side is `side`.
    pub fn cut_strength(&self, side: &BTreeSet<Point>) -> Result<u64> {
        let mask: Vec<bool> = self.vertices.iter().map(|p| side.contains(p)).collect();
        let inside = mask.iter().filter(|&&m| m).count();
        if inside != side.len() {
            return Err(Error::Domain("cut side contains points that are not vertices".into()));
        }
        if inside == 0 || inside == self.vertices.len() {
            return Err(Error::Domain("both sides of a cut must be nonempty".into()));
        }
        Ok(self.crossing(&mask))
    }

    pub(crate) fn crossing(&self, mask: &[bool]) -> u64 {
        self.edges.iter().filter(|e| mask[e.a] != mask[e.b]).map(|e| e.strength).sum()
    }

    /// Minimum cut strength via Stoer–Wagner; graphs with at most one vertex
    /// have no cut and report infinity.
    pub fn binding_strength(&self) -> BindingStrength {
        let n = self.vertices.len();
        if n <= 1 {
            return BindingStrength::Infinite;
        }
        let mut w = vec![vec![0u64; n]; n];
        for e in &self.edges {
            w[e.a][e.b] += e.strength;
            w[e.b][e.a] += e.strength;
        }
        BindingStrength::Finite(stoer_wagner(w))
    }
}

/// Def-3 binding graph of a configuration.
pub fn build_binding_graph(cfg: &Configuration, tiles: &TileSet) -> Result<BindingGraph> {
    let vertices: Vec<Point> = cfg.domain().collect();
    let index: HashMap<Point, usize> = vertices.iter().enumerate().map(|(i, &p)| (p, i)).collect();
    let mut edges = Vec::new();
    for (i, &p) in vertices.iter().enumerate() {
        let tp = tiles.resolve(cfg.get(p).unwrap())?;
        for &d in Direction::all(cfg.dim()) {
            let q = p.step(d);
            let Some(&j) = index.get(&q) else { continue };
            if j <= i {
                continue;
            }
            let tq = tiles.resolve(cfg.get(q).unwrap())?;
            let s = tp.glue(d).bond(tq.glue(d.opposite()));
            if s > 0 {
                edges.push(BindingEdge { a: i, b: j, strength: s as u64 });
            }
        }
    }
    Ok(BindingGraph { vertices, edges })
}

pub fn cut_strength(g: &BindingGraph, side: &BTreeSet<Point>) -> Result<u64> {
    g.cut_strength(side)
}

pub fn binding_strength(g: &BindingGraph) -> BindingStrength {
    g.binding_strength()
}

pub fn is_tau_stable(cfg: &Configuration, tiles: &TileSet, tau: u32) -> Result<bool> {
    Ok(build_binding_graph(cfg, tiles)?.binding_strength().at_least(tau as u64))
}

/// Total strength with which tile `t` would bind at `p`: the sum over sides of
/// `str_t(u)` for every side whose abutting glue equals `t`'s glue.
pub fn attachment_strength(cfg: &Configuration, tiles: &TileSet, p: Point, t: &TileType) -> u64 {
    Direction::all(cfg.dim())
        .iter()
        .map(|&u| match cfg.get(p.step(u)).and_then(|id| tiles.get(id)) {
            Some(nb) if nb.glue(u.opposite()) == t.glue(u) => t.glue(u).strength as u64,
            _ => 0,
        })
        .sum()
}

/// Empty cells that could possibly receive a tile. At τ = 0 that is every
/// empty cell, so a window is required.
fn candidate_cells(cfg: &Configuration, tau: u32) -> Result<BTreeSet<Point>> {
    if tau == 0 {
        let w = cfg.window.ok_or_else(|| Error::Domain("the τ = 0 frontier is unbounded without a window".into()))?;
        return Ok(w.points().filter(|p| !cfg.contains(*p)).collect());
    }
    let mut out = BTreeSet::new();
    for p in cfg.domain() {
        for &d in Direction::all(cfg.dim()) {
            let q = p.step(d);
            if cfg.in_bounds(q) && !cfg.contains(q) {
                out.insert(q);
            }
        }
    }
    Ok(out)
}

/// The τ-t-frontier: empty cells where `t` binds with total strength ≥ τ.
pub fn frontier(cfg: &Configuration, tiles: &TileSet, tau: u32, t: TileId) -> Result<BTreeSet<Point>> {
    let tile = tiles.resolve(t)?;
    Ok(candidate_cells(cfg, tau)?
        .into_iter()
        .filter(|&p| attachment_strength(cfg, tiles, p, tile) >= tau as u64)
        .collect())
}

/// The τ-frontier, the union of all τ-t-frontiers.
pub fn tau_frontier(cfg: &Configuration, tiles: &TileSet, tau: u32) -> Result<BTreeSet<Point>> {
    Ok(attachments(cfg, tiles, tau)?.into_iter().map(|(p, _)| p).collect())
}

/// All legal `(location, tile)` attachments, sorted by location then tile id.
pub fn attachments(cfg: &Configuration, tiles: &TileSet, tau: u32) -> Result<Vec<(Point, TileId)>> {
    let mut out = Vec::new();
    for p in candidate_cells(cfg, tau)? {
        out.extend(attachable_at(cfg, tiles, tau, p).into_iter().map(|t| (p, t)));
    }
    Ok(out)
}

/// Tile types that can attach at the (empty) cell `p`.
pub fn attachable_at(cfg: &Configuration, tiles: &TileSet, tau: u32, p: Point) -> Vec<TileId> {
    tiles
        .ids()
        .filter(|&id| attachment_strength(cfg, tiles, p, tiles.tile(id)) >= tau as u64)
        .collect()
}

/// A tile assembly system `(T, σ, τ)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TileAssemblySystem {
    pub tiles: TileSet,
    pub seed: Configuration,
    pub temperature: u32,
    pub name: Option<String>,
}

impl TileAssemblySystem {
    /// Validates that the seed resolves and is τ-stable.
    pub fn new(tiles: TileSet, seed: Configuration, temperature: u32) -> Result<TileAssemblySystem> {
        if seed.dim() != tiles.dim() {
            return Err(Error::Configuration("seed and tile set have different dimensions".into()));
        }
        for (p, t) in seed.iter() {
            if tiles.get(t).is_none() {
                return Err(Error::Definition(format!("seed tile at {p} does not resolve")));
            }
        }
        if !is_tau_stable(&seed, &tiles, temperature)? {
            return Err(Error::Configuration(format!("seed assembly is not {temperature}-stable")));
        }
        Ok(TileAssemblySystem { tiles, seed, temperature, name: None })
    }

    pub fn named(mut self, name: impl Into<String>) -> TileAssemblySystem {
        self.name = Some(name.into());
        self
    }

    pub fn dim(&self) -> usize {
        self.tiles.dim()
    }

    /// Non-fatal observations about the system.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.temperature == 0 {
            out.push("temperature 0: every empty cell is in the frontier".to_string());
        }
        out
    }
}
