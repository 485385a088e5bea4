//! Call-sequence log used to check that candidate-side work finishes before
//! any private sample is read.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    ReadPublic,
    CandidateGeneration,
    CandidateMass,
    ReadPrivate,
    EmpiricalMass,
    Utilities,
    Mechanism,
    Cover,
    SmallDb,
    MinimumDistance,
}

impl Stage {
    pub fn touches_private(self) -> bool {
        matches!(
            self,
            Stage::ReadPrivate | Stage::EmpiricalMass | Stage::SmallDb
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditEvent {
    pub stage: Stage,
    pub detail: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AuditLog {
    events: Vec<AuditEvent>,
}

impl AuditLog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record(&mut self, stage: Stage, detail: impl Into<String>) {
        self.events.push(AuditEvent {
            stage,
            detail: detail.into(),
        });
    }

    pub fn events(&self) -> &[AuditEvent] {
        &self.events
    }

    /// True when no private-touching stage precedes a public-only one.
    pub fn private_after_public(&self) -> bool {
        let first_private = self.events.iter().position(|e| e.stage.touches_private());
        match first_private {
            None => true,
            Some(p) => self.events[p..].iter().all(|e| {
                !matches!(
                    e.stage,
                    Stage::ReadPublic
                        | Stage::CandidateGeneration
                        | Stage::CandidateMass
                        | Stage::Cover
                )
            }),
        }
    }
}
