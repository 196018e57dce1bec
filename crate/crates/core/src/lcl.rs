//! Weak c-coloring verification on k-dimensional meshes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{Mesh, Point};
use crate::tam::{Configuration, TileSet};

/// Reports list at most this many violating vertices.
pub const REPORTED_VIOLATIONS: usize = 100;

/// A (possibly partial) assignment of colors `1..=c` to mesh vertices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Coloring {
    mesh: Mesh,
    colors: Vec<Option<u32>>,
    c: u32,
}

impl Coloring {
    pub fn new(mesh: Mesh, c: u32) -> Coloring {
        Coloring { mesh, colors: vec![None; mesh.vertex_count()], c }
    }

    pub fn from_colors(mesh: Mesh, c: u32, colors: Vec<Option<u32>>) -> Result<Coloring> {
        if colors.len() != mesh.vertex_count() {
            return Err(Error::Domain(format!("{} colors given for {} vertices", colors.len(), mesh.vertex_count())));
        }
        Ok(Coloring { mesh, colors, c })
    }

    /// Colors of the tiles of `cfg` inside `mesh`; cells outside the mesh are ignored.
    pub fn from_configuration(cfg: &Configuration, tiles: &TileSet, mesh: Mesh) -> Coloring {
        let mut col = Coloring::new(mesh, tiles.max_color());
        for (p, t) in cfg.iter() {
            if let Some(i) = mesh.index(p) {
                col.colors[i] = Some(tiles.tile(t).color);
            }
        }
        col
    }

    pub fn mesh(&self) -> Mesh {
        self.mesh
    }

    pub fn c(&self) -> u32 {
        self.c
    }

    pub fn get(&self, p: Point) -> Option<u32> {
        self.mesh.index(p).and_then(|i| self.colors[i])
    }

    pub fn set(&mut self, p: Point, color: Option<u32>) -> Result<()> {
        let i = self.mesh.index(p).ok_or_else(|| Error::Domain(format!("{p} is not a mesh vertex")))?;
        self.colors[i] = color;
        Ok(())
    }

    pub fn colors(&self) -> &[Option<u32>] {
        &self.colors
    }

    pub fn colored_count(&self) -> usize {
        self.colors.iter().filter(|c| c.is_some()).count()
    }

    fn validate(&self) -> Result<()> {
        if self.c == 0 {
            return Err(Error::Domain("c must be at least 1".into()));
        }
        for (i, col) in self.colors.iter().enumerate() {
            if let Some(k) = *col {
                if k == 0 || k > self.c {
                    return Err(Error::Domain(format!("vertex {} has color {k} outside 1..={}", self.mesh.point(i), self.c)));
                }
            }
        }
        Ok(())
    }
}

/// How uncolored vertices are treated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CoverageMode {
    /// Every vertex must be colored; a colored vertex with no colored
    /// neighbour (but some mesh neighbour) is a violation.
    #[default]
    FullSurface,
    /// Only the subgraph induced by colored vertices is checked.
    Induced,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Coverage {
    pub colored: usize,
    pub total: usize,
    pub complete: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColoringReport {
    pub valid: bool,
    pub coverage: Coverage,
    pub violation_count: usize,
    /// The first [`REPORTED_VIOLATIONS`] violating vertices in mesh order.
    pub violations: Vec<Point>,
    /// Monochromatic "+" centers; only computed for 2-dimensional meshes.
    pub plus_centers: Vec<Point>,
}

impl ColoringReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports always serialize")
    }
}

/// Decide whether `v` violates the weak-coloring condition, reading colors
/// only through `color_of`. Only `v` and its mesh neighbours are queried.
pub fn vertex_violates<F>(mesh: &Mesh, v: Point, mode: CoverageMode, mut color_of: F) -> bool
where
    F: FnMut(Point) -> Option<u32>,
{
    let Some(own) = color_of(v) else { return false };
    let mut has_neighbor = false;
    let mut colored_neighbors = 0;
    let mut differs = false;
    for &d in mesh.directions() {
        let q = v.step(d);
        if !mesh.contains(q) {
            continue;
        }
        has_neighbor = true;
        if let Some(k) = color_of(q) {
            colored_neighbors += 1;
            differs |= k != own;
        }
    }
    if differs || !has_neighbor {
        return false;
    }
    colored_neighbors > 0 || mode == CoverageMode::FullSurface
}

/// Check a coloring. `valid` requires zero violations, and full coverage in
/// [`CoverageMode::FullSurface`].
pub fn check_weak_coloring(col: &Coloring, mode: CoverageMode) -> Result<ColoringReport> {
    col.validate()?;
    let mesh = col.mesh;
    let violating: Vec<Point> = mesh.points().filter(|&v| vertex_violates(&mesh, v, mode, |p| col.get(p))).collect();
    let colored = col.colored_count();
    let coverage = Coverage { colored, total: mesh.vertex_count(), complete: colored == mesh.vertex_count() };
    let valid = violating.is_empty() && (coverage.complete || mode == CoverageMode::Induced);
    let plus_centers = if mesh.dim() == 2 { find_monochromatic_plus(col)? } else { Vec::new() };
    Ok(ColoringReport {
        valid,
        coverage,
        violation_count: violating.len(),
        violations: violating.into_iter().take(REPORTED_VIOLATIONS).collect(),
        plus_centers,
    })
}

/// Interior vertices whose four neighbours share the vertex's own color.
pub fn find_monochromatic_plus(col: &Coloring) -> Result<Vec<Point>> {
    let mesh = col.mesh;
    if mesh.dim() != 2 {
        return Err(Error::UnsupportedDimension(mesh.dim()));
    }
    Ok(mesh
        .points()
        .filter(|&v| {
            let Some(own) = col.get(v) else { return false };
            mesh.directions().iter().all(|&d| {
                let q = v.step(d);
                mesh.contains(q) && col.get(q) == Some(own)
            })
        })
        .collect())
}
