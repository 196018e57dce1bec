//! Line-oriented traces and grid snapshots.
//!
//! Assembly trace:
//!
//! ```text
//! # system <sha256 of the system document>
//! # seed <u64>
//! # temperature <τ>
//! 0 0 0 seed
//! 1 1 0 x-odd
//! ```
//!
//! one `stage x y [z] tile` record per tile, seed tiles at stage 0. Mesh
//! traces use `round x y [z] old new` with `EMPTY` for the empty state.
//! Snapshots draw one character per vertex, rows from the top (`y = n−1`)
//! down; colors 1–9 are digits, 10 and up are letters from `a`, and `.` is
//! uncolored. 3D snapshots stack z-slices separated by blank lines.

use std::fmt::Write as _;

use crate::agent::{AgentId, AgentModel};
use crate::assembly::{AssemblyResult, AssemblySequence};
use crate::error::{Error, Result};
use crate::lattice::{Mesh, Point};
use crate::lcl::Coloring;
use crate::mesh::{Trace, TraceEvent};
use crate::tam::{Configuration, TileAssemblySystem};

pub const EMPTY: &str = "EMPTY";

fn coords(p: Point, dim: usize) -> String {
    if dim == 3 {
        format!("{} {} {}", p.x, p.y, p.z)
    } else {
        format!("{} {}", p.x, p.y)
    }
}

fn header<'a>(lines: &mut impl Iterator<Item = &'a str>, key: &str) -> Result<String> {
    let line = lines.next().ok_or_else(|| Error::Parse(format!("missing '# {key}' header")))?;
    line.strip_prefix("# ")
        .and_then(|l| l.strip_prefix(key))
        .and_then(|l| l.strip_prefix(' '))
        .map(str::to_owned)
        .ok_or_else(|| Error::Parse(format!("expected '# {key} ...', found {line:?}")))
}

fn num<T: std::str::FromStr>(s: &str, what: &str) -> Result<T> {
    s.parse().map_err(|_| Error::Parse(format!("bad {what}: {s:?}")))
}

pub fn write_assembly_trace(system: &TileAssemblySystem, result: &AssemblyResult) -> String {
    let dim = system.dim();
    let mut out = String::new();
    writeln!(out, "# system {}", system.content_hash()).unwrap();
    writeln!(out, "# seed {}", result.seed).unwrap();
    writeln!(out, "# temperature {}", system.temperature).unwrap();
    for (p, t) in result.sequence.seed.iter() {
        writeln!(out, "0 {} {}", coords(p, dim), system.tiles.tile(t).name).unwrap();
    }
    for a in &result.sequence.additions {
        writeln!(out, "{} {} {}", a.stage, coords(a.location, dim), system.tiles.tile(a.tile).name).unwrap();
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AssemblyTrace {
    pub system_hash: String,
    pub seed: u64,
    pub temperature: u32,
    pub sequence: AssemblySequence,
}

/// Read an assembly trace back against the system it was produced from.
/// Legality is not checked here; replay the sequence for that.
pub fn parse_assembly_trace(text: &str, system: &TileAssemblySystem) -> Result<AssemblyTrace> {
    let dim = system.dim();
    let mut lines = text.lines();
    let system_hash = header(&mut lines, "system")?;
    let seed = num(&header(&mut lines, "seed")?, "seed")?;
    let temperature = num(&header(&mut lines, "temperature")?, "temperature")?;
    let mut seed_cfg = Configuration::new(dim);
    let mut sequence: Option<AssemblySequence> = None;
    for line in lines.filter(|l| !l.trim().is_empty()) {
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.len() != dim + 2 {
            return Err(Error::Parse(format!("expected {} fields in {line:?}", dim + 2)));
        }
        let stage: usize = num(f[0], "stage")?;
        let z = if dim == 3 { num(f[3], "z")? } else { 0 };
        let p = Point::new(num(f[1], "x")?, num(f[2], "y")?, z);
        let tile = system.tiles.id(f[dim + 1]).ok_or_else(|| Error::Parse(format!("unknown tile {:?}", f[dim + 1])))?;
        if stage == 0 {
            if sequence.is_some() {
                return Err(Error::Parse("seed records must precede additions".into()));
            }
            seed_cfg.insert(p, tile)?;
        } else {
            let seq = sequence.get_or_insert_with(|| AssemblySequence::new(seed_cfg.clone()));
            if stage != seq.stages() {
                return Err(Error::Parse(format!("stage {stage} out of order")));
            }
            seq.push(p, tile);
        }
    }
    let sequence = sequence.unwrap_or_else(|| AssemblySequence::new(seed_cfg));
    Ok(AssemblyTrace { system_hash, seed, temperature, sequence })
}

fn state_name(model: &AgentModel, s: Option<AgentId>) -> &str {
    s.map_or(EMPTY, |a| model.agent(a).name.as_str())
}

pub fn write_mesh_trace(model: &AgentModel, mesh: Mesh, trace: &Trace) -> String {
    let mut out = String::new();
    writeln!(out, "# model {}", model.content_hash()).unwrap();
    writeln!(out, "# seed {}", trace.master_seed).unwrap();
    writeln!(out, "# mesh {} {}", mesh.dim(), mesh.side()).unwrap();
    for e in &trace.events {
        writeln!(out, "{} {} {} {}", e.round, coords(e.location, mesh.dim()), state_name(model, e.old), state_name(model, e.new)).unwrap();
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MeshTrace {
    pub model_hash: String,
    pub mesh: Mesh,
    pub trace: Trace,
}

pub fn parse_mesh_trace(text: &str, model: &AgentModel) -> Result<MeshTrace> {
    let mut lines = text.lines();
    let model_hash = header(&mut lines, "model")?;
    let master_seed = num(&header(&mut lines, "seed")?, "seed")?;
    let m = header(&mut lines, "mesh")?;
    let (dim, side) = m.split_once(' ').ok_or_else(|| Error::Parse(format!("bad mesh header {m:?}")))?;
    let mesh = Mesh::new(num(dim, "dimension")?, num(side, "side")?)?;
    let dim = mesh.dim();
    let state = |s: &str| -> Result<Option<AgentId>> {
        if s == EMPTY {
            Ok(None)
        } else {
            model.agent_id(s).map(Some).ok_or_else(|| Error::Parse(format!("unknown agent {s:?}")))
        }
    };
    let mut events = Vec::new();
    for line in lines.filter(|l| !l.trim().is_empty()) {
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.len() != dim + 3 {
            return Err(Error::Parse(format!("expected {} fields in {line:?}", dim + 3)));
        }
        let z = if dim == 3 { num(f[3], "z")? } else { 0 };
        events.push(TraceEvent {
            round: num(f[0], "round")?,
            location: Point::new(num(f[1], "x")?, num(f[2], "y")?, z),
            old: state(f[dim + 1])?,
            new: state(f[dim + 2])?,
        });
    }
    Ok(MeshTrace { model_hash, mesh, trace: Trace { master_seed, events } })
}

fn color_char(c: Option<u32>) -> char {
    match c {
        None => '.',
        Some(c @ 0..=9) => char::from_digit(c, 10).unwrap(),
        Some(c) => char::from_u32('a' as u32 + c - 10).unwrap_or('?'),
    }
}

fn char_color(ch: char) -> Result<Option<u32>> {
    match ch {
        '.' => Ok(None),
        '1'..='9' => Ok(ch.to_digit(10)),
        'a'..='z' => Ok(Some(ch as u32 - 'a' as u32 + 10)),
        other => Err(Error::Parse(format!("unexpected snapshot character {other:?}"))),
    }
}

pub fn render_ascii(col: &Coloring) -> String {
    let mesh = col.mesh();
    let n = mesh.side() as i64;
    let depth = if mesh.dim() == 3 { n } else { 1 };
    let mut out = String::new();
    for z in 0..depth {
        if z > 0 {
            out.push('\n');
        }
        for y in (0..n).rev() {
            for x in 0..n {
                out.push(color_char(col.get(Point::new(x, y, z))));
            }
            out.push('\n');
        }
    }
    out
}

/// Parse a snapshot. The dimension is inferred: one block of n rows of n
/// characters is 2D, n blank-line-separated blocks is 3D.
pub fn parse_ascii(text: &str) -> Result<Coloring> {
    let blocks: Vec<Vec<&str>> = text
        .split("\n\n")
        .map(|b| b.lines().map(str::trim_end).filter(|l| !l.is_empty()).collect::<Vec<_>>())
        .filter(|b| !b.is_empty())
        .collect();
    let n = blocks.first().map_or(0, Vec::len);
    if n == 0 {
        return Err(Error::Parse("empty snapshot".into()));
    }
    let dim = if blocks.len() == 1 { 2 } else { 3 };
    if dim == 3 && blocks.len() != n {
        return Err(Error::Parse(format!("{} slices for side {n}", blocks.len())));
    }
    let mesh = Mesh::new(dim, n)?;
    let mut colors = vec![None; mesh.vertex_count()];
    for (z, block) in blocks.iter().enumerate() {
        if block.len() != n {
            return Err(Error::Parse(format!("slice {z} has {} rows, expected {n}", block.len())));
        }
        for (r, row) in block.iter().enumerate() {
            let chars: Vec<char> = row.chars().collect();
            if chars.len() != n {
                return Err(Error::Parse(format!("row {r} has {} cells, expected {n}", chars.len())));
            }
            let y = (n - 1 - r) as i64;
            for (x, &ch) in chars.iter().enumerate() {
                colors[mesh.index(Point::new(x as i64, y, z as i64)).unwrap()] = char_color(ch)?;
            }
        }
    }
    let c = colors.iter().flatten().copied().max().unwrap_or(1);
    Coloring::from_colors(mesh, c, colors)
}

const PALETTE: [[u8; 3]; 8] =
    [[230, 80, 60], [60, 110, 220], [70, 180, 90], [240, 190, 50], [150, 80, 190], [40, 180, 190], [230, 120, 180], [120, 120, 120]];

/// Binary PPM (P6) of a 2D coloring, `scale` pixels per vertex. Uncolored
/// vertices are white.
pub fn render_ppm(col: &Coloring, scale: usize) -> Result<Vec<u8>> {
    let mesh = col.mesh();
    if mesh.dim() != 2 {
        return Err(Error::UnsupportedDimension(mesh.dim()));
    }
    let scale = scale.max(1);
    let w = mesh.side() * scale;
    let mut out = format!("P6\n{w} {w}\n255\n").into_bytes();
    for py in 0..w {
        let y = (mesh.side() - 1 - py / scale) as i64;
        for px in 0..w {
            let rgb = match col.get(Point::xy((px / scale) as i64, y)) {
                None => [255, 255, 255],
                Some(c) => PALETTE[(c as usize).saturating_sub(1) % PALETTE.len()],
            };
            out.extend_from_slice(&rgb);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::run;
    use crate::tilesets::tileset_t_star;

    #[test]
    fn assembly_trace_round_trip() {
        let t = tileset_t_star();
        let sys = t.tiles().unwrap();
        let r = run(sys, Mesh::square(4).unwrap(), 9, None).unwrap();
        let text = write_assembly_trace(sys, &r);
        assert!(text.starts_with("# system "));
        assert!(text.contains("\n0 0 0 seed\n"));
        let back = parse_assembly_trace(&text, sys).unwrap();
        assert_eq!(back.seed, 9);
        assert_eq!(back.temperature, 2);
        assert_eq!(back.sequence.additions, r.sequence.additions);
        assert!(back.sequence.seed.same_cells(&r.sequence.seed));
        assert_eq!(back.system_hash, sys.content_hash());
    }

    #[test]
    fn ascii_round_trip() {
        let mesh = Mesh::square(3).unwrap();
        let col = Coloring::from_colors(mesh, 12, vec![Some(1), None, Some(12), Some(2), Some(2), Some(1), None, None, Some(3)]).unwrap();
        let text = render_ascii(&col);
        assert_eq!(text, "..3\n221\n1.c\n");
        let back = parse_ascii(&text).unwrap();
        assert_eq!(back.colors(), col.colors());
        let cube = Coloring::from_colors(Mesh::new(3, 2).unwrap(), 2, vec![Some(1); 8]).unwrap();
        assert_eq!(parse_ascii(&render_ascii(&cube)).unwrap().colors(), cube.colors());
        assert!(parse_ascii("12\n1").is_err());
        assert!(parse_ascii("1#\n11").is_err());
    }

    #[test]
    fn ppm_header() {
        let col = Coloring::from_colors(Mesh::square(2).unwrap(), 2, vec![Some(1), Some(2), None, Some(1)]).unwrap();
        let img = render_ppm(&col, 3).unwrap();
        assert!(img.starts_with(b"P6\n6 6\n255\n"));
        assert_eq!(img.len(), b"P6\n6 6\n255\n".len() + 6 * 6 * 3);
    }
}
