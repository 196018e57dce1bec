//! Shipped systems and models, each with a manifest of properties the test
//! suite re-checks.
//!
//! T* is a reconstruction: a temperature-2 system with seven tile types
//! whose unique terminal assembly on any n×n window is a two-colored
//! checkerboard. The seed sits at the origin; the x- and y-axis rows carry
//! parity in strength-2 glue labels; interior tiles bind cooperatively from
//! the west and south with strength-1 glues naming the neighbour's color.

use serde::{Deserialize, Serialize};

use crate::agent::{AgentModel, Severity};
use crate::assembly::{self, check_local_determinism};
use crate::error::{Error, Result};
use crate::lattice::Mesh;
use crate::lcl::{check_weak_coloring, find_monochromatic_plus, Coloring, CoverageMode};
use crate::rng::derive_seed;
use crate::tam::TileAssemblySystem;

pub const TSTAR_JSON: &str = include_str!("../../../data/tstar.json");
pub const CHECKERBOARD_LOCAL_JSON: &str = include_str!("../../../data/checkerboard_local.json");
pub const FORCED_GROWTH_JSON: &str = include_str!("../../../data/forced_growth.json");
pub const FIDELITY_JSON: &str = include_str!("../../../data/fidelity_2type.json");

/// Content hash of the frozen T* instance. Changing the data file must be
/// a deliberate act: update this constant along with it.
pub const TSTAR_HASH: &str = "d6d8e28ea68ab42475deacfdc3ab0ed0a68127ee9f5b32cbab4fe805b841eca5";

/// Rule families accepted by [`nucleation_family`].
pub const RULE_FAMILIES: &[&str] = &["checkerboard-local", "forced-growth"];

#[derive(Debug, Clone, PartialEq)]
pub enum SystemKind {
    Tiles(TileAssemblySystem),
    Agents(AgentModel),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "claim", content = "value")]
pub enum Claim {
    TileTypes(usize),
    LocallyDeterministic,
    UniqueTerminal,
    WeakColors,
    PlusFree,
    /// The model document passes validation without errors.
    ValidModel,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClaimCheck {
    pub claim: Claim,
    pub holds: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NamedSystem {
    pub id: String,
    pub system: SystemKind,
    pub provenance: String,
    pub manifest: Vec<Claim>,
    /// Intended window, if the instance was built for one.
    pub window: Option<Mesh>,
}

impl NamedSystem {
    pub fn tiles(&self) -> Option<&TileAssemblySystem> {
        match &self.system {
            SystemKind::Tiles(t) => Some(t),
            SystemKind::Agents(_) => None,
        }
    }

    pub fn model(&self) -> Option<&AgentModel> {
        match &self.system {
            SystemKind::Agents(m) => Some(m),
            SystemKind::Tiles(_) => None,
        }
    }

    /// Check every manifest claim on an n×n window using `runs` seeded
    /// assembly runs.
    pub fn verify(&self, n: usize, runs: usize, master_seed: u64) -> Result<Vec<ClaimCheck>> {
        let mut out = Vec::new();
        match &self.system {
            SystemKind::Tiles(sys) => {
                let window = Mesh::new(sys.dim(), n)?;
                let results = (0..runs.max(1))
                    .map(|r| assembly::run(sys, window, derive_seed(master_seed, &[r as u64]), None))
                    .collect::<Result<Vec<_>>>()?;
                let first = &results[0];
                let coloring = Coloring::from_configuration(&first.configuration, &sys.tiles, window);
                for &claim in &self.manifest {
                    let (holds, detail) = match claim {
                        Claim::TileTypes(k) => (sys.tiles.len() == k, format!("{} tile types", sys.tiles.len())),
                        Claim::LocallyDeterministic => {
                            let mut bad = None;
                            for r in &results {
                                let rep = check_local_determinism(sys, &r.sequence)?;
                                if !rep.passed {
                                    bad = Some((r.seed, rep.violation));
                                    break;
                                }
                            }
                            match bad {
                                None => (true, format!("{} sequences pass", results.len())),
                                Some((s, v)) => (false, format!("seed {s}: {v:?}")),
                            }
                        }
                        Claim::UniqueTerminal => {
                            let same = results.iter().all(|r| r.terminal && r.configuration.same_cells(&first.configuration));
                            (same, format!("{} runs compared", results.len()))
                        }
                        Claim::WeakColors => {
                            let rep = check_weak_coloring(&coloring, CoverageMode::FullSurface)?;
                            (rep.valid, format!("{} violations, {}/{} colored", rep.violation_count, rep.coverage.colored, rep.coverage.total))
                        }
                        Claim::PlusFree => {
                            let centers = find_monochromatic_plus(&coloring)?;
                            (centers.is_empty(), format!("{} plus centers", centers.len()))
                        }
                        Claim::ValidModel => (false, "not an agent model".into()),
                    };
                    out.push(ClaimCheck { claim, holds, detail });
                }
            }
            SystemKind::Agents(m) => {
                for &claim in &self.manifest {
                    let check = match claim {
                        Claim::ValidModel => {
                            let errors = crate::agent::AgentModelDoc::from_model(m).lint(false).into_iter().filter(|d| d.severity == Severity::Error).count();
                            ClaimCheck { claim, holds: errors == 0, detail: format!("{errors} errors") }
                        }
                        other => ClaimCheck { claim: other, holds: false, detail: "only checkable on tile systems".into() },
                    };
                    out.push(check);
                }
            }
        }
        Ok(out)
    }
}

/// The canonical seven-type weak-coloring system.
pub fn tileset_t_star() -> NamedSystem {
    let sys = TileAssemblySystem::from_json(TSTAR_JSON).expect("shipped T* parses");
    NamedSystem {
        id: "tstar".into(),
        system: SystemKind::Tiles(sys),
        provenance: "reconstructed seven-type checkerboard system, temperature 2, frozen in data/tstar.json".into(),
        manifest: vec![Claim::TileTypes(7), Claim::LocallyDeterministic, Claim::UniqueTerminal, Claim::WeakColors, Claim::PlusFree],
        window: None,
    }
}

/// The two-type model used to compare the network against the model.
pub fn fidelity_model() -> AgentModel {
    AgentModel::from_json(FIDELITY_JSON).expect("shipped fidelity model parses")
}

/// A purely local agent model for an n×n surface with nucleation
/// probability `pi_nu`.
///
/// * `checkerboard-local`: two colors; a type binds only to the other type,
///   so an agent attaching next to bound agents takes a color that differs
///   from at least one of them. Domains grown from different nucleation
///   sites meet in seams.
/// * `forced-growth`: one type that binds to itself; deterministic growth.
pub fn nucleation_family(n: usize, pi_nu: f64, rule_id: &str) -> Result<NamedSystem> {
    let (text, provenance) = match rule_id {
        "checkerboard-local" => (CHECKERBOARD_LOCAL_JSON, "local two-color attachment rule"),
        "forced-growth" => (FORCED_GROWTH_JSON, "single self-binding type"),
        other => return Err(Error::Configuration(format!("unknown rule family {other:?}; known: {}", RULE_FAMILIES.join(", ")))),
    };
    let mut model = AgentModel::from_json(text)?;
    if !(0.0..=1.0).contains(&pi_nu) {
        return Err(Error::Configuration(format!("pi_nu = {pi_nu} is not a probability")));
    }
    model.pi_nu = pi_nu;
    Ok(NamedSystem {
        id: rule_id.into(),
        window: Some(Mesh::new(model.dimension, n)?),
        system: SystemKind::Agents(model),
        provenance: provenance.into(),
        manifest: vec![Claim::ValidModel],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn t_star_is_frozen() {
        let t = tileset_t_star();
        assert_eq!(t.tiles().unwrap().content_hash(), TSTAR_HASH);
    }

    #[test]
    fn t_star_manifest_small() {
        let t = tileset_t_star();
        for check in t.verify(8, 5, 1).unwrap() {
            assert!(check.holds, "{check:?}");
        }
    }

    #[test]
    fn families() {
        assert!(matches!(nucleation_family(4, 0.1, "nope"), Err(Error::Configuration(_))));
        let f = nucleation_family(8, 0.25, "checkerboard-local").unwrap();
        assert_eq!(f.model().unwrap().pi_nu, 0.25);
        assert!(f.verify(8, 1, 0).unwrap().iter().all(|c| c.holds));
        assert_eq!(fidelity_model().agents.len(), 2);
    }
}
