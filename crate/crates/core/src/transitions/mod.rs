//! Transitionals as guarded atomic edits, chains of them with flow control,
//! chain summaries and brute-force equivalence checking.

mod apply;
mod chain;
mod equiv;
mod summary;

pub use apply::{apply_transitional, AppliedRecord, BlockReason, Blocked, Edit, EditOp, Outcome};
pub use chain::{instantiate_chain, step_chain, AbortReason, ChainInstance, ChainStatus, StepOutcome, LOOP_CAP};
pub use equiv::{
    check_equivalence, parse_space_spec, run_from, Axis, AxisSpec, Counterexample, Equivalence, LiveSet, StateSpace,
    DEFAULT_STATE_BOUND,
};
pub use summary::{thick_chain_summary, ThickChainSummary};

use std::collections::BTreeMap;

use thiserror::Error;

use crate::ontology::Registry;
use crate::relations::{InstanceId, RelationError, Store};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TransitionError {
    #[error("no transitional `{0}`")]
    UnknownTransitional(String),
    #[error("no instance `{0}`")]
    UnknownInstance(String),
    #[error("bearer `{0}` has been destroyed")]
    DestroyedBearer(String),
    #[error("`{transitional}` is borne by `{expected}`, not `{found}`")]
    BearerKindMismatch { transitional: String, expected: String, found: String },
    #[error("no chain `{0}`")]
    UnknownChain(String),
    #[error("chain `{chain}` needs a binding for `{param}`")]
    MissingBinding { chain: String, param: String },
    #[error("chain `{chain}`: cannot tell which parameter bears `{transitional}`")]
    AmbiguousBearer { chain: String, transitional: String },
    #[error("chain `{chain}` is already {status}")]
    ChainAlreadyFinished { chain: String, status: ChainStatus },
    #[error("state space has {size} states, more than the bound of {bound}")]
    StateSpaceTooLarge { size: u64, bound: u64 },
    #[error("chain `{0}` hit the loop cap")]
    NonterminatingChain(String),
    #[error("bad state space: {0}")]
    InvalidSpace(String),
    #[error(transparent)]
    Relation(#[from] RelationError),
}

/// Binds each chain parameter: an explicit `param=instance` wins, then an
/// alive instance named like the parameter, then the only alive instance of
/// the parameter's kind.
pub fn bind_params(
    reg: &Registry,
    store: &Store,
    chain: &str,
    explicit: &BTreeMap<String, String>,
) -> Result<BTreeMap<String, InstanceId>, TransitionError> {
    let schema = reg.chain(chain).ok_or_else(|| TransitionError::UnknownChain(chain.to_string()))?;
    let mut out = BTreeMap::new();
    for p in &schema.params {
        let id = if let Some(name) = explicit.get(&p.name) {
            store.id_of(name).ok_or_else(|| TransitionError::UnknownInstance(name.clone()))?
        } else if let Some(id) = store.id_of(&p.name).filter(|id| store.is_alive(*id)) {
            id
        } else {
            let mut fits =
                store.alive_instances().filter(|(_, r)| reg.is_subkind(&r.schema, &p.kind)).map(|(id, _)| id);
            match (fits.next(), fits.next()) {
                (Some(id), None) => id,
                _ => return Err(TransitionError::MissingBinding { chain: chain.to_string(), param: p.name.clone() }),
            }
        };
        out.insert(p.name.clone(), id);
    }
    Ok(out)
}
