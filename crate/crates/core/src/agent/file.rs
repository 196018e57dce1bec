//! JSON agent-model documents and their validator.
//!
//! ```json
//! {
//!   "dimension": 2,
//!   "agents": [
//!     {"name": "A", "color": 1, "glues": {"west": "a", "east": "a"},
//!      "rule": [{"when": {"glues": {"west": "+"}}, "send": {"east": "ping"}}]}
//!   ],
//!   "rules": [{"a": "a", "b": "a", "strength": 1}],
//!   "temperature": 1,
//!   "seed": [{"x": 0, "y": 0, "agent": "A"}],
//!   "pi_nu": 0.1,
//!   "kinetics": {"lambda_on": 0.5, "p_off": 0.0, "epsilon": 0.0},
//!   "messages": ["ping"],
//!   "use_ids": false
//! }
//! ```
//!
//! A side with no glue is omitted or `null`. In rule patterns a missing side
//! matches anything, `null` matches nothing present, `"+"` matches anything
//! present and any other string matches that glue label or message symbol.
//! Cases are tried in order; `id_mod: [m, r]` additionally requires
//! `id % m == r` and needs `use_ids`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{AgentId, AgentModel, AgentType, BindingRules, GlueId, Kinetics, MessageId, MessageRule, Pattern, RuleCase};
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

fn is_false(b: &bool) -> bool {
    !*b
}

fn yes() -> bool {
    true
}

fn is_true(b: &bool) -> bool {
    *b
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WhenDoc {
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub glues: BTreeMap<Direction, Option<String>>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub messages: BTreeMap<Direction, Option<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id_mod: Option<(u64, u64)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RuleCaseDoc {
    #[serde(default)]
    pub when: WhenDoc,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub send: BTreeMap<Direction, String>,
    #[serde(default, skip_serializing_if = "is_false")]
    pub detach: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentDoc {
    pub name: String,
    pub color: u32,
    #[serde(default)]
    pub glues: BTreeMap<Direction, Option<String>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub rule: Vec<RuleCaseDoc>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BindingRuleDoc {
    pub a: String,
    pub b: String,
    pub strength: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentSeedDoc {
    pub x: i64,
    pub y: i64,
    #[serde(default, skip_serializing_if = "is_zero")]
    pub z: i64,
    pub agent: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KineticsDoc {
    pub lambda_on: f64,
    #[serde(default)]
    pub p_off: f64,
    #[serde(default)]
    pub epsilon: f64,
    #[serde(default = "yes", skip_serializing_if = "is_true")]
    pub detach: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentModelDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default = "default_dimension", skip_serializing_if = "is_two")]
    pub dimension: usize,
    pub agents: Vec<AgentDoc>,
    #[serde(default)]
    pub rules: Vec<BindingRuleDoc>,
    pub temperature: i64,
    #[serde(default)]
    pub seed: Vec<AgentSeedDoc>,
    #[serde(default)]
    pub pi_nu: f64,
    pub kinetics: KineticsDoc,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub messages: Vec<String>,
    #[serde(default, skip_serializing_if = "is_false")]
    pub use_ids: bool,
    #[serde(default, skip_serializing_if = "is_false")]
    pub nucleate_every_round: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

/// One validator finding.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub code: String,
    pub message: String,
}

impl Diagnostic {
    fn error(code: &str, message: String) -> Diagnostic {
        Diagnostic { severity: Severity::Error, code: code.into(), message }
    }

    fn warning(code: &str, message: String) -> Diagnostic {
        Diagnostic { severity: Severity::Warning, code: code.into(), message }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{sev}[{}]: {}", self.code, self.message)
    }
}

fn probability(out: &mut Vec<Diagnostic>, name: &str, v: f64, lo_open: bool, hi_open: bool) {
    let lo_ok = if lo_open { v > 0.0 } else { v >= 0.0 };
    let hi_ok = if hi_open { v < 1.0 } else { v <= 1.0 };
    if !(v.is_finite() && lo_ok && hi_ok) {
        let lo = if lo_open { "(0" } else { "[0" };
        let hi = if hi_open { "1)" } else { "1]" };
        out.push(Diagnostic::error("bad-probability", format!("{name} = {v} is outside {lo}, {hi}")));
    }
}

impl AgentModelDoc {
    pub fn parse(text: &str) -> Result<AgentModelDoc> {
        Ok(serde_json::from_str(text)?)
    }

    /// Glue labels in order of first appearance on an agent.
    fn glue_labels(&self) -> Vec<String> {
        let mut labels: Vec<String> = Vec::new();
        for a in &self.agents {
            for l in a.glues.values().flatten() {
                if !labels.contains(l) {
                    labels.push(l.clone());
                }
            }
        }
        labels
    }

    /// Validate the document. `strict` additionally flags negative binding
    /// strengths, which the nonnegative reading of the model forbids.
    pub fn lint(&self, strict: bool) -> Vec<Diagnostic> {
        let mut out = Vec::new();
        if self.dimension != 2 && self.dimension != 3 {
            out.push(Diagnostic::error("bad-dimension", format!("dimension must be 2 or 3, got {}", self.dimension)));
            return out;
        }
        let dirs = Direction::all(self.dimension);
        let labels: BTreeSet<String> = self.glue_labels().into_iter().collect();
        let messages: BTreeSet<&str> = self.messages.iter().map(String::as_str).collect();
        if messages.len() != self.messages.len() {
            out.push(Diagnostic::error("duplicate-message", "message alphabet lists a symbol twice".into()));
        }
        for m in &self.messages {
            if m == "+" || m == "*" || m.is_empty() {
                out.push(Diagnostic::error("bad-message", format!("{m:?} is reserved and cannot be a message symbol")));
            }
        }
        if self.agents.is_empty() {
            out.push(Diagnostic::error("no-agents", "model has no agent types".into()));
        }
        let mut names = BTreeSet::new();
        for a in &self.agents {
            if !names.insert(a.name.as_str()) {
                out.push(Diagnostic::error("duplicate-agent", format!("agent {:?} is defined twice", a.name)));
            }
            if a.color == 0 {
                out.push(Diagnostic::error("bad-color", format!("agent {:?} has color 0; colors start at 1", a.name)));
            }
            let side_ok = |d: &Direction| dirs.contains(d);
            for d in a.glues.keys().filter(|d| !side_ok(d)) {
                out.push(Diagnostic::error("bad-direction", format!("agent {:?} has a {} glue in dimension {}", a.name, d.name(), self.dimension)));
            }
            for (ci, c) in a.rule.iter().enumerate() {
                let at = format!("agent {:?} rule case {ci}", a.name);
                for d in c.when.glues.keys().chain(c.when.messages.keys()).chain(c.send.keys()).filter(|d| !side_ok(d)) {
                    out.push(Diagnostic::error("bad-direction", format!("{at} refers to side {} in dimension {}", d.name(), self.dimension)));
                }
                for l in c.when.glues.values().flatten() {
                    if l != "*" && l != "+" && !labels.contains(l) {
                        out.push(Diagnostic::error("unknown-glue", format!("{at} tests for glue {l:?}, which no agent carries")));
                    }
                }
                for m in c.when.messages.values().flatten() {
                    if m != "*" && m != "+" && !messages.contains(m.as_str()) {
                        out.push(Diagnostic::error("unknown-message", format!("{at} tests for message {m:?}, which is not in the alphabet")));
                    }
                }
                for m in c.send.values() {
                    if !messages.contains(m.as_str()) {
                        out.push(Diagnostic::error("unknown-message", format!("{at} sends {m:?}, which is not in the alphabet")));
                    }
                }
                if let Some((m, r)) = c.when.id_mod {
                    if !self.use_ids {
                        out.push(Diagnostic::error("ids-disabled", format!("{at} tests the agent ID but use_ids is off")));
                    }
                    if m == 0 || r >= m {
                        out.push(Diagnostic::error("bad-id-mod", format!("{at} has id_mod [{m}, {r}]; need m > 0 and r < m")));
                    }
                    if c.detach {
                        out.push(Diagnostic::error("id-detach", format!("{at} detaches based on the agent ID; binding must not depend on IDs")));
                    }
                }
            }
        }
        let mut pairs = BTreeSet::new();
        let mut bound = BTreeSet::new();
        for r in &self.rules {
            for l in [&r.a, &r.b] {
                if !labels.contains(l) {
                    out.push(Diagnostic::error("unknown-glue", format!("binding rule mentions glue {l:?}, which no agent carries")));
                }
                bound.insert(l.as_str());
            }
            let key = if r.a <= r.b { (&r.a, &r.b) } else { (&r.b, &r.a) };
            if !pairs.insert(key) {
                out.push(Diagnostic::error("duplicate-rule", format!("glue pair ({:?}, {:?}) has two strengths", r.a, r.b)));
            }
            if strict && r.strength < 0 {
                out.push(Diagnostic::warning("negative-strength", format!("glue pair ({:?}, {:?}) has negative strength {}", r.a, r.b, r.strength)));
            }
        }
        for l in &labels {
            if !bound.contains(l.as_str()) {
                out.push(Diagnostic::warning("unbound-glue", format!("glue {l:?} appears in no binding rule and never binds")));
            }
        }
        if self.temperature < 1 {
            out.push(Diagnostic::warning("nonpositive-temperature", format!("temperature {} lets agents attach without any bond", self.temperature)));
        }
        let mut seen = BTreeSet::new();
        for s in &self.seed {
            if !names.contains(s.agent.as_str()) {
                out.push(Diagnostic::error("unknown-agent", format!("seed refers to unknown agent {:?}", s.agent)));
            }
            if self.dimension == 2 && s.z != 0 {
                out.push(Diagnostic::error("bad-direction", format!("seed agent at z = {} in dimension 2", s.z)));
            }
            if !seen.insert((s.x, s.y, s.z)) {
                out.push(Diagnostic::error("duplicate-seed", format!("two seed agents at ({}, {}, {})", s.x, s.y, s.z)));
            }
        }
        probability(&mut out, "pi_nu", self.pi_nu, false, false);
        probability(&mut out, "lambda_on", self.kinetics.lambda_on, true, false);
        probability(&mut out, "p_off", self.kinetics.p_off, false, true);
        probability(&mut out, "epsilon", self.kinetics.epsilon, false, true);
        out
    }

    /// Validate and build the model; any error-level diagnostic fails.
    pub fn into_model(self) -> Result<AgentModel> {
        let errors: Vec<String> = self.lint(false).into_iter().filter(Diagnostic::is_error).map(|d| d.to_string()).collect();
        if !errors.is_empty() {
            return Err(Error::Configuration(errors.join("; ")));
        }
        let labels = self.glue_labels();
        let glue = |l: &str| GlueId(labels.iter().position(|x| x == l).expect("validated glue label"));
        let message = |m: &str| MessageId(self.messages.iter().position(|x| x == m).expect("validated message"));
        let dirs = Direction::all(self.dimension);
        fn pattern<T>(p: &Option<String>, f: impl Fn(&str) -> T) -> Pattern<T> {
            match p.as_deref() {
                None => Pattern::Empty,
                Some("*") => Pattern::Any,
                Some("+") => Pattern::Present,
                Some(s) => Pattern::Is(f(s)),
            }
        }
        let agents = self
            .agents
            .iter()
            .map(|a| {
                let cases = a
                    .rule
                    .iter()
                    .map(|c| {
                        let mut case = RuleCase { id_mod: c.when.id_mod, detach: c.detach, ..Default::default() };
                        for (d, p) in &c.when.glues {
                            case.glues[d.index()] = pattern(p, glue);
                        }
                        for (d, p) in &c.when.messages {
                            case.messages[d.index()] = pattern(p, message);
                        }
                        for (d, m) in &c.send {
                            case.send[d.index()] = Some(message(m));
                        }
                        case
                    })
                    .collect();
                AgentType {
                    name: a.name.clone(),
                    color: a.color,
                    glues: dirs.iter().map(|d| a.glues.get(d).cloned().flatten().map(|l| glue(&l))).collect(),
                    rule: MessageRule { cases },
                }
            })
            .collect::<Vec<_>>();
        let mut rules = BindingRules::default();
        for r in &self.rules {
            rules.insert(glue(&r.a), glue(&r.b), r.strength);
        }
        let agent_id = |n: &str| AgentId(agents.iter().position(|a| a.name == n).expect("validated agent"));
        let seed = self.seed.iter().map(|s| (Point::new(s.x, s.y, s.z), agent_id(&s.agent))).collect();
        Ok(AgentModel {
            name: self.name.clone(),
            dimension: self.dimension,
            glue_labels: labels.clone(),
            messages: self.messages.clone(),
            rules,
            temperature: self.temperature,
            seed,
            pi_nu: self.pi_nu,
            kinetics: Kinetics {
                lambda_on: self.kinetics.lambda_on,
                p_off: self.kinetics.p_off,
                epsilon: self.kinetics.epsilon,
                detach: self.kinetics.detach,
            },
            use_ids: self.use_ids,
            nucleate_every_round: self.nucleate_every_round,
            agents,
        })
    }

    pub fn from_model(model: &AgentModel) -> AgentModelDoc {
        let dirs = Direction::all(model.dimension);
        let glue = |g: GlueId| model.glue_labels[g.0].clone();
        let message = |m: MessageId| model.messages[m.0].clone();
        fn unpattern<T: Copy>(p: Pattern<T>, f: impl Fn(T) -> String) -> Option<Option<String>> {
            match p {
                Pattern::Any => None,
                Pattern::Empty => Some(None),
                Pattern::Present => Some(Some("+".into())),
                Pattern::Is(t) => Some(Some(f(t))),
            }
        }
        let agents = model
            .agents
            .iter()
            .map(|a| AgentDoc {
                name: a.name.clone(),
                color: a.color,
                glues: dirs.iter().filter_map(|&d| a.glues[d.index()].map(|g| (d, Some(glue(g))))).collect(),
                rule: a
                    .rule
                    .cases
                    .iter()
                    .map(|c| RuleCaseDoc {
                        when: WhenDoc {
                            glues: dirs.iter().filter_map(|&d| unpattern(c.glues[d.index()], glue).map(|p| (d, p))).collect(),
                            messages: dirs.iter().filter_map(|&d| unpattern(c.messages[d.index()], message).map(|p| (d, p))).collect(),
                            id_mod: c.id_mod,
                        },
                        send: dirs.iter().filter_map(|&d| c.send[d.index()].map(|m| (d, message(m)))).collect(),
                        detach: c.detach,
                    })
                    .collect(),
            })
            .collect();
        AgentModelDoc {
            name: model.name.clone(),
            dimension: model.dimension,
            agents,
            rules: model.rules.iter().map(|(a, b, s)| BindingRuleDoc { a: glue(a), b: glue(b), strength: s }).collect(),
            temperature: model.temperature,
            seed: model
                .seed
                .iter()
                .map(|&(p, a)| AgentSeedDoc { x: p.x, y: p.y, z: p.z, agent: model.agents[a.0].name.clone() })
                .collect(),
            pi_nu: model.pi_nu,
            kinetics: KineticsDoc {
                lambda_on: model.kinetics.lambda_on,
                p_off: model.kinetics.p_off,
                epsilon: model.kinetics.epsilon,
                detach: model.kinetics.detach,
            },
            messages: model.messages.clone(),
            use_ids: model.use_ids,
            nucleate_every_round: model.nucleate_every_round,
        }
    }
}

impl AgentModel {
    pub fn from_json(text: &str) -> Result<AgentModel> {
        AgentModelDoc::parse(text)?.into_model()
    }

    pub fn load(path: impl AsRef<Path>) -> Result<AgentModel> {
        AgentModel::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(&AgentModelDoc::from_model(self)).expect("model documents serialize")
    }

    /// Hex SHA-256 of the model's compact canonical JSON document.
    pub fn content_hash(&self) -> String {
        let text = serde_json::to_string(&AgentModelDoc::from_model(self)).expect("model documents serialize");
        format!("{:x}", Sha256::digest(text.as_bytes()))
    }
}

/// Parse and validate a model document without building it.
pub fn lint_model(text: &str, strict: bool) -> Vec<Diagnostic> {
    match AgentModelDoc::parse(text) {
        Ok(doc) => doc.lint(strict),
        Err(e) => vec![Diagnostic::error("parse", e.to_string())],
    }
}
