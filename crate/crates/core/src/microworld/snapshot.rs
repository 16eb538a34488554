use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::events::TraceEntry;
use super::{Microworld, MicroworldError, TimelineEvent};
use crate::fingerprint::Fingerprint;
use crate::lang::RuleDef;
use crate::ontology::Registry;
use crate::relations::{Store, Tick};

pub const SNAPSHOT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct Envelope {
    version: u32,
    #[serde(default)]
    world: Option<serde_json::Value>,
}

#[derive(Serialize, Deserialize)]
struct WorldDoc {
    name: String,
    registry: Fingerprint,
    store: Store,
    clock: Tick,
    timeline: Vec<TimelineEvent>,
    trace: Vec<TraceEntry>,
    rules: Vec<RuleDef>,
    cascade_cap: usize,
}

impl Microworld {
    /// Serializes the full world state. The registry is referenced by
    /// fingerprint, not copied.
    pub fn snapshot(&self) -> String {
        let doc = WorldDoc {
            name: self.name.clone(),
            registry: self.registry.fingerprint(),
            store: self.store.clone(),
            clock: self.clock,
            timeline: self.timeline.clone(),
            trace: self.trace.clone(),
            rules: self.rules.clone(),
            cascade_cap: self.cascade_cap,
        };
        let env =
            Envelope { version: SNAPSHOT_VERSION, world: Some(serde_json::to_value(doc).expect("world serializes")) };
        serde_json::to_string(&env).expect("snapshot serializes")
    }

    pub fn restore(registry: Arc<Registry>, snapshot: &str) -> Result<Self, MicroworldError> {
        let env: Envelope = serde_json::from_str(snapshot).map_err(|e| MicroworldError::BadSnapshot(e.to_string()))?;
        if env.version != SNAPSHOT_VERSION {
            return Err(MicroworldError::SnapshotVersionMismatch { found: env.version, expected: SNAPSHOT_VERSION });
        }
        let doc: WorldDoc =
            serde_json::from_value(env.world.ok_or_else(|| MicroworldError::BadSnapshot("no world".into()))?)
                .map_err(|e| MicroworldError::BadSnapshot(e.to_string()))?;
        if doc.registry != registry.fingerprint() {
            return Err(MicroworldError::SnapshotRegistryMismatch);
        }
        Ok(Microworld {
            name: doc.name,
            registry,
            store: doc.store,
            clock: doc.clock,
            timeline: doc.timeline,
            trace: doc.trace,
            rules: doc.rules,
            cascade_cap: doc.cascade_cap,
        })
    }
}
