use std::fmt::Write as _;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::model::{Mode, QueueCapacity, SimConfig};

use super::{Fcfs, Mect, Meet, MinMin, MinUrgency, Policy, PolicyId, SoonestDeadline};

/// Policies selectable by name. Built-ins come first, in their canonical
/// order, followed by registered policies in registration order.
#[derive(Clone)]
pub struct PolicyRegistry {
    entries: Vec<(PolicyId, Arc<dyn Policy>)>,
}

impl Default for PolicyRegistry {
    fn default() -> Self {
        Self::with_builtins()
    }
}

impl std::fmt::Debug for PolicyRegistry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_list().entries(self.entries.iter().map(|(id, _)| id)).finish()
    }
}

impl PolicyRegistry {
    pub fn with_builtins() -> Self {
        let entries: Vec<(PolicyId, Arc<dyn Policy>)> = vec![
            (PolicyId::Fcfs, Arc::new(Fcfs)),
            (PolicyId::Mect, Arc::new(Mect)),
            (PolicyId::Meet, Arc::new(Meet)),
            (PolicyId::Mm, Arc::new(MinMin)),
            (PolicyId::Mmu, Arc::new(MinUrgency)),
            (PolicyId::Msd, Arc::new(SoonestDeadline)),
        ];
        Self { entries }
    }

    /// Adds a custom policy. Names are case-insensitive and must be new.
    pub fn register(&mut self, name: &str, policy: Arc<dyn Policy>) -> Result<PolicyId> {
        let id: PolicyId = name.parse()?;
        if !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-') {
            return Err(Error::Config(format!("invalid policy name {name:?}")));
        }
        if self.get(&id).is_some() || !matches!(id, PolicyId::Custom(_)) {
            return Err(Error::Config(format!("policy {name} is already registered")));
        }
        self.entries.push((id.clone(), policy));
        Ok(id)
    }

    pub fn get(&self, id: &PolicyId) -> Option<Arc<dyn Policy>> {
        self.entries.iter().find(|(k, _)| k == id).map(|(_, p)| Arc::clone(p))
    }

    /// Resolves a user-supplied name to a registered policy.
    pub fn resolve(&self, name: &str) -> Result<PolicyId> {
        let id: PolicyId = name.parse()?;
        if self.get(&id).is_none() {
            return Err(Error::Config(format!("unknown policy {name:?}")));
        }
        Ok(id)
    }

    pub fn ids(&self) -> impl Iterator<Item = &PolicyId> {
        self.entries.iter().map(|(id, _)| id)
    }

    pub fn mode_of(&self, id: &PolicyId) -> Result<Mode> {
        self.get(id).map(|p| p.mode()).ok_or_else(|| Error::Config(format!("unknown policy {id}")))
    }

    /// Builds a checked config, taking the mode from the policy.
    pub fn config(&self, name: &str, capacity: QueueCapacity, seed: u64) -> Result<SimConfig> {
        let policy = self.resolve(name)?;
        let mode = self.mode_of(&policy)?;
        let cfg = SimConfig { policy, mode, machine_queue_capacity: capacity, seed };
        self.check(&cfg)?;
        Ok(cfg)
    }

    /// Rejects unknown policies, mode mismatches, and bounded immediate queues.
    pub fn check(&self, cfg: &SimConfig) -> Result<()> {
        let mode = self.mode_of(&cfg.policy)?;
        if mode != cfg.mode {
            return Err(Error::Config(format!(
                "policy {} is {mode}-mode but the configuration requests {} mode",
                cfg.policy, cfg.mode
            )));
        }
        cfg.check()
    }

    /// One `name mode` line per policy.
    pub fn listing(&self) -> String {
        let mut out = String::new();
        for (id, policy) in &self.entries {
            let _ = writeln!(out, "{} {}", id.key(), policy.mode());
        }
        out
    }
}
