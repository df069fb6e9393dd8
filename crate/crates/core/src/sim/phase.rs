use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Phase {
    Initialization,
    ClusterFormation,
    SectorFormation,
    IdsActivation,
    DataTransfer,
    Reconfiguration,
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Phase::Initialization => "initialization",
            Phase::ClusterFormation => "cluster-formation",
            Phase::SectorFormation => "sector-formation",
            Phase::IdsActivation => "ids-activation",
            Phase::DataTransfer => "data-transfer",
            Phase::Reconfiguration => "reconfiguration",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IllegalTransition {
    pub from: Phase,
    pub to: Phase,
}

/// Tracks the protocol phase and rejects out-of-order transitions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhaseState {
    phase: Phase,
    ids_active: bool,
}

impl Default for PhaseState {
    fn default() -> Self {
        PhaseState {
            phase: Phase::Initialization,
            ids_active: false,
        }
    }
}

impl PhaseState {
    pub fn phase(&self) -> Phase {
        self.phase
    }

    /// True once the detectors have been switched on.
    pub fn ids_active(&self) -> bool {
        self.ids_active
    }

    pub fn can_transition(&self, to: Phase) -> bool {
        use Phase::*;
        matches!(
            (self.phase, to),
            (Initialization, ClusterFormation)
                | (ClusterFormation, SectorFormation)
                | (SectorFormation, IdsActivation)
                | (IdsActivation, DataTransfer)
                | (DataTransfer, Reconfiguration)
                | (Reconfiguration, DataTransfer)
        )
    }

    pub fn transition(&mut self, to: Phase) -> Result<(), IllegalTransition> {
        if !self.can_transition(to) {
            return Err(IllegalTransition {
                from: self.phase,
                to,
            });
        }
        if self.phase == Phase::IdsActivation {
            self.ids_active = true;
        }
        self.phase = to;
        Ok(())
    }
}
