//! Memoryless message rules.
//!
//! A rule is an ordered list of cases. Outgoing messages come from the first
//! case whose conditions match; with no match the agent stays silent. An
//! agent intends to detach when any matching case says so. Cases that look
//! at the agent's ID may send messages but never request detachment, which
//! keeps occupancy dynamics independent of IDs.

use crate::lattice::MAX_DEGREE;

use super::{GlueId, LocalInputs, MessageId};

/// Condition on one side's glue or message.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Pattern<T> {
    #[default]
    Any,
    /// Nothing on this side.
    Empty,
    /// Something on this side.
    Present,
    Is(T),
}

impl<T: PartialEq> Pattern<T> {
    pub fn matches(&self, value: Option<&T>) -> bool {
        match self {
            Pattern::Any => true,
            Pattern::Empty => value.is_none(),
            Pattern::Present => value.is_some(),
            Pattern::Is(t) => value == Some(t),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RuleCase {
    pub glues: [Pattern<GlueId>; MAX_DEGREE],
    pub messages: [Pattern<MessageId>; MAX_DEGREE],
    /// `(modulus, residue)` condition on the agent's ID.
    pub id_mod: Option<(u64, u64)>,
    pub send: [Option<MessageId>; MAX_DEGREE],
    pub detach: bool,
}

impl RuleCase {
    fn matches_inputs(&self, inputs: &LocalInputs) -> bool {
        (0..MAX_DEGREE).all(|i| self.glues[i].matches(inputs.glues[i].as_ref()) && self.messages[i].matches(inputs.messages[i].as_ref()))
    }

    fn matches(&self, inputs: &LocalInputs, id: Option<u64>) -> bool {
        let id_ok = match (self.id_mod, id) {
            (None, _) => true,
            (Some((m, r)), Some(id)) => m > 0 && id % m == r,
            (Some(_), None) => false,
        };
        id_ok && self.matches_inputs(inputs)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct MessageRule {
    pub cases: Vec<RuleCase>,
}

impl MessageRule {
    /// The rule of a passive agent: never sends, never detaches.
    pub fn null() -> MessageRule {
        MessageRule::default()
    }

    pub fn is_null(&self) -> bool {
        self.cases.is_empty()
    }

    pub fn outgoing(&self, inputs: &LocalInputs, id: Option<u64>) -> [Option<MessageId>; MAX_DEGREE] {
        self.cases.iter().find(|c| c.matches(inputs, id)).map(|c| c.send).unwrap_or_default()
    }

    pub fn detach_intent(&self, inputs: &LocalInputs) -> bool {
        self.cases.iter().any(|c| c.detach && c.id_mod.is_none() && c.matches_inputs(inputs))
    }
}
