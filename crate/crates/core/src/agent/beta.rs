//! The induced one-round local transition law β̂.
//!
//! For a cell holding `occupant` (or nothing) that hears glue types and
//! messages from its `d` neighbours, β̂ returns a probability for every agent
//! type and for EMPTY. The kinetics are:
//!
//! * silent inputs (no glue, no message on any side): the cell keeps its state;
//! * empty cell: let `S` be the agent types whose summed binding strength
//!   against the neighbour glues reaches τ. Attachment happens with total
//!   probability `λ_on`; a fraction `1 − ε` of it is spread uniformly over `S`
//!   and a fraction `ε` uniformly over all types (binding errors);
//! * occupied cell: when its realized bond total is below τ, or its rule
//!   signals detachment, it empties with probability `p_off` (if detachment is
//!   enabled); otherwise it stays.
//!
//! Negative strengths only lower bond totals; probabilities are built from
//! the kinetic rates alone and never go negative.

use std::sync::Arc;

use super::{AgentId, AgentModel, LocalView};

/// Probabilities over `EMPTY` (index 0) and every agent type (index `i + 1`).
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution {
    probs: Vec<f64>,
}

impl Distribution {
    fn point(agents: usize, outcome: Option<AgentId>) -> Distribution {
        let mut probs = vec![0.0; agents + 1];
        probs[slot(outcome)] = 1.0;
        Distribution { probs }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, outcome: Option<AgentId>) -> f64 {
        self.probs[slot(outcome)]
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    /// Outcomes with positive probability.
    pub fn support(&self) -> Vec<Option<AgentId>> {
        self.probs.iter().enumerate().filter(|(_, &p)| p > 0.0).map(|(i, _)| outcome(i)).collect()
    }

    /// Inverse-CDF sample from a uniform draw `u ∈ [0, 1)`.
    pub fn sample(&self, u: f64) -> Option<AgentId> {
        let mut acc = 0.0;
        let mut last = 0;
        for (i, &p) in self.probs.iter().enumerate() {
            if p <= 0.0 {
                continue;
            }
            acc += p;
            last = i;
            if u < acc {
                return outcome(i);
            }
        }
        outcome(last)
    }
}

fn slot(outcome: Option<AgentId>) -> usize {
    outcome.map_or(0, |a| a.0 + 1)
}

fn outcome(slot: usize) -> Option<AgentId> {
    slot.checked_sub(1).map(AgentId)
}

/// β̂ evaluated directly from a model.
pub fn beta_hat(model: &AgentModel, view: &LocalView) -> Distribution {
    let n = model.agents.len();
    if view.inputs.is_silent() {
        return Distribution::point(n, view.occupant);
    }
    let k = &model.kinetics;
    match view.occupant {
        None => {
            let candidates: Vec<usize> =
                (0..n).filter(|&t| model.bond_total(AgentId(t), &view.inputs) >= model.temperature).collect();
            let mut probs = vec![0.0; n + 1];
            let error_share = k.lambda_on * k.epsilon / n as f64;
            for p in probs.iter_mut().skip(1) {
                *p = error_share;
            }
            if !candidates.is_empty() {
                let share = k.lambda_on * (1.0 - k.epsilon) / candidates.len() as f64;
                for t in candidates {
                    probs[t + 1] += share;
                }
            }
            let attached: f64 = probs[1..].iter().sum();
            probs[0] = (1.0 - attached).max(0.0);
            Distribution { probs }
        }
        Some(t) => {
            let weak = model.bond_total(t, &view.inputs) < model.temperature || model.agents[t.0].rule.detach_intent(&view.inputs);
            if weak && k.detach && k.p_off > 0.0 {
                let mut d = Distribution::point(n, Some(t));
                d.probs[0] = k.p_off;
                d.probs[t.0 + 1] = 1.0 - k.p_off;
                d
            } else {
                Distribution::point(n, Some(t))
            }
        }
    }
}

/// β̂ bound to its model; shared by every cell and every processor.
#[derive(Debug, Clone)]
pub struct TransitionFunction {
    model: Arc<AgentModel>,
}

impl TransitionFunction {
    pub fn model(&self) -> &AgentModel {
        &self.model
    }

    pub fn distribution(&self, view: &LocalView) -> Distribution {
        beta_hat(&self.model, view)
    }

    /// Size of β̂'s input domain: `(|T|+1)·(|Γ|+1)^d·(|M|+1)^d`.
    pub fn domain_size(&self) -> u128 {
        let m = &self.model;
        let d = m.degree() as u32;
        (m.agents.len() as u128 + 1) * (m.glue_labels.len() as u128 + 1).pow(d) * (m.messages.len() as u128 + 1).pow(d)
    }
}

/// Induce the one-round transition function of a model.
pub fn induce_beta_hat(model: &AgentModel) -> TransitionFunction {
    TransitionFunction { model: Arc::new(model.clone()) }
}
