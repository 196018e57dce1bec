//! JSON tile-system documents.
//!
//! ```json
//! {
//!   "name": "example",
//!   "dimension": 2,
//!   "temperature": 2,
//!   "tiles": [{"name": "seed", "color": 1, "glues": {"east": {"label": "x", "strength": 2}}}],
//!   "seed": [{"x": 0, "y": 0, "tile": "seed"}]
//! }
//! ```
//!
//! Omitted sides carry the empty glue. `down`/`up` sides and the `z`
//! coordinate are only accepted when `dimension` is 3. Unknown keys are rejected.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{Configuration, Glue, TileAssemblySystem, TileSet, TileType};
use crate::error::{Error, Result};
use crate::lattice::{Direction, Point};

fn default_dimension() -> usize {
    2
}

fn is_two(d: &usize) -> bool {
    *d == 2
}

fn is_zero(z: &i64) -> bool {
    *z == 0
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GlueDoc {
    pub label: String,
    pub strength: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TileDoc {
    pub name: String,
    pub color: u32,
    #[serde(default)]
    pub glues: BTreeMap<Direction, GlueDoc>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeedDoc {
    pub x: i64,
    pub y: i64,
    #[serde(default, skip_serializing_if = "is_zero")]
    pub z: i64,
    pub tile: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TileSystemDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default = "default_dimension", skip_serializing_if = "is_two")]
    pub dimension: usize,
    pub temperature: u32,
    pub tiles: Vec<TileDoc>,
    pub seed: Vec<SeedDoc>,
}

impl TileSystemDoc {
    pub fn parse(text: &str) -> Result<TileSystemDoc> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn into_system(self) -> Result<TileAssemblySystem> {
        let dim = self.dimension;
        if dim != 2 && dim != 3 {
            return Err(Error::UnsupportedDimension(dim));
        }
        let tiles = self
            .tiles
            .into_iter()
            .map(|t| {
                let mut glues = vec![Glue::empty(); 2 * dim];
                for (d, g) in t.glues {
                    if d.index() >= 2 * dim {
                        return Err(Error::Definition(format!("tile {:?}: side {} needs dimension 3", t.name, d.name())));
                    }
                    glues[d.index()] = Glue::new(g.label, g.strength);
                }
                Ok(TileType::new(t.name, t.color, glues))
            })
            .collect::<Result<Vec<_>>>()?;
        let tiles = TileSet::new(dim, tiles)?;
        let mut seed = Configuration::new(dim);
        for s in &self.seed {
            if dim == 2 && s.z != 0 {
                return Err(Error::Definition(format!("seed tile {:?} has z ≠ 0 in a 2-dimensional system", s.tile)));
            }
            let id = tiles.id(&s.tile).ok_or_else(|| Error::Definition(format!("seed refers to unknown tile {:?}", s.tile)))?;
            seed.insert(Point::new(s.x, s.y, s.z), id)?;
        }
        let system = TileAssemblySystem::new(tiles, seed, self.temperature)?;
        Ok(match self.name {
            Some(n) => system.named(n),
            None => system,
        })
    }

    pub fn from_system(system: &TileAssemblySystem) -> TileSystemDoc {
        let tiles = system
            .tiles
            .tiles()
            .iter()
            .map(|t| TileDoc {
                name: t.name.clone(),
                color: t.color,
                glues: Direction::all(system.dim())
                    .iter()
                    .filter(|&&d| !t.glue(d).is_empty())
                    .map(|&d| (d, GlueDoc { label: t.glue(d).label.clone(), strength: t.glue(d).strength }))
                    .collect(),
            })
            .collect();
        let seed = system
            .seed
            .iter()
            .map(|(p, id)| SeedDoc { x: p.x, y: p.y, z: p.z, tile: system.tiles.tile(id).name.clone() })
            .collect();
        TileSystemDoc { name: system.name.clone(), dimension: system.dim(), temperature: system.temperature, tiles, seed }
    }
}

impl TileAssemblySystem {
    pub fn from_json(text: &str) -> Result<TileAssemblySystem> {
        TileSystemDoc::parse(text)?.into_system()
    }

    pub fn load(path: impl AsRef<Path>) -> Result<TileAssemblySystem> {
        TileAssemblySystem::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(&TileSystemDoc::from_system(self)).expect("documents always serialize")
    }

    /// SHA-256 of the canonical (compact) JSON document, hex encoded.
    pub fn content_hash(&self) -> String {
        let bytes = serde_json::to_vec(&TileSystemDoc::from_system(self)).expect("documents always serialize");
        format!("{:x}", Sha256::digest(bytes))
    }
}
