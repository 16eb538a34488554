use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::apply::{apply_transitional, AppliedRecord, Blocked, Outcome};
use super::TransitionError;
use crate::ontology::{infer_bearer, ChainSchema, Guard, Pattern, Registry, Step, Term};
use crate::relations::{Bindings, InstanceId, Node, Store, Tick};

/// Iterations one `while` may run before the chain is aborted.
pub const LOOP_CAP: u64 = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChainStatus {
    Planned,
    Running,
    Completed,
    Aborted,
}

impl ChainStatus {
    pub fn is_finished(self) -> bool {
        matches!(self, ChainStatus::Completed | ChainStatus::Aborted)
    }

    /// Whether moving from `self` to `next` respects planned → running → finished.
    pub fn may_become(self, next: ChainStatus) -> bool {
        match self {
            ChainStatus::Planned => true,
            ChainStatus::Running => next != ChainStatus::Planned,
            done => done == next,
        }
    }
}

impl fmt::Display for ChainStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ChainStatus::Planned => "planned",
            ChainStatus::Running => "running",
            ChainStatus::Completed => "completed",
            ChainStatus::Aborted => "aborted",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AbortReason {
    Blocked(Blocked),
    /// The `while` at this program counter exceeded the loop cap.
    LoopCap {
        pc: usize,
        cap: u64,
    },
}

impl fmt::Display for AbortReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AbortReason::Blocked(b) => write!(f, "`{}` on {} blocked: {}", b.transitional, b.bearer, b.reason),
            AbortReason::LoopCap { pc, cap } => write!(f, "loop at step {pc} ran more than {cap} times"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Instr {
    Do {
        transitional: String,
        bearer: String,
        intervention: bool,
    },
    /// Falls through when `cond` holds, otherwise jumps to `otherwise`.
    Test {
        cond: Guard,
        otherwise: usize,
        is_loop: bool,
    },
    Jump(usize),
    Begin {
        process: String,
        participants: Vec<String>,
    },
    End {
        process: String,
    },
}

/// What one call to [`step_chain`] did.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StepOutcome {
    Applied(AppliedRecord),
    Tested {
        cond: String,
        held: bool,
    },
    Begin {
        process: String,
        participants: Vec<InstanceId>,
    },
    End {
        process: String,
    },
    Aborted(AbortReason),
    /// Nothing left to run.
    Completed,
}

/// A chain Particular: a running copy of a chain schema.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainInstance {
    pub chain: String,
    status: ChainStatus,
    pub pc: usize,
    pub bindings: BTreeMap<String, InstanceId>,
    pub log: Vec<AppliedRecord>,
    pub abort: Option<AbortReason>,
    pub loop_cap: u64,
    params: Vec<String>,
    program: Vec<Instr>,
    iterations: BTreeMap<usize, u64>,
}

impl ChainInstance {
    pub fn status(&self) -> ChainStatus {
        self.status
    }

    fn set_status(&mut self, next: ChainStatus) {
        assert!(self.status.may_become(next), "chain status cannot go from {} to {next}", self.status);
        self.status = next;
    }

    pub fn interventions(&self) -> usize {
        self.log.iter().filter(|r| r.intervention).count()
    }

    /// Steps until completion or abort, giving each applied transitional the
    /// next tick after `after`. Returns the last tick used.
    pub fn run_to_end(&mut self, reg: &Registry, store: &mut Store, mut after: Tick) -> Result<Tick, TransitionError> {
        while !self.status.is_finished() {
            if let StepOutcome::Applied(_) = step_chain(reg, store, self, after + 1)? {
                after += 1;
            }
        }
        Ok(after)
    }
}

pub fn instantiate_chain(
    reg: &Registry,
    name: &str,
    bindings: BTreeMap<String, InstanceId>,
) -> Result<ChainInstance, TransitionError> {
    let chain = reg.chain(name).ok_or_else(|| TransitionError::UnknownChain(name.to_string()))?;
    if let Some(missing) = chain.params.iter().find(|p| !bindings.contains_key(&p.name)) {
        return Err(TransitionError::MissingBinding { chain: name.to_string(), param: missing.name.clone() });
    }
    let mut program = Vec::new();
    compile_steps(reg, chain, &chain.body, &mut program)?;
    Ok(ChainInstance {
        chain: name.to_string(),
        status: ChainStatus::Planned,
        pc: 0,
        bindings,
        log: Vec::new(),
        abort: None,
        loop_cap: LOOP_CAP,
        params: chain.params.iter().map(|p| p.name.clone()).collect(),
        program,
        iterations: BTreeMap::new(),
    })
}

fn compile_steps(
    reg: &Registry,
    chain: &ChainSchema,
    steps: &[Step],
    out: &mut Vec<Instr>,
) -> Result<(), TransitionError> {
    for step in steps {
        match step {
            Step::Do { transitional, bearer, intervention } => {
                let bearer = match bearer {
                    Some(b) => b.clone(),
                    None => {
                        let t = reg
                            .transitional(transitional)
                            .ok_or_else(|| TransitionError::UnknownTransitional(transitional.clone()))?;
                        infer_bearer(reg, chain, t)
                            .ok_or_else(|| TransitionError::AmbiguousBearer {
                                chain: chain.name.clone(),
                                transitional: transitional.clone(),
                            })?
                            .name
                            .clone()
                    }
                };
                out.push(Instr::Do { transitional: transitional.clone(), bearer, intervention: *intervention });
            }
            Step::If { cond, then, otherwise } => {
                let test = out.len();
                out.push(Instr::Test { cond: cond.clone(), otherwise: 0, is_loop: false });
                compile_steps(reg, chain, then, out)?;
                let jump = out.len();
                out.push(Instr::Jump(0));
                let else_start = out.len();
                compile_steps(reg, chain, otherwise, out)?;
                let end = out.len();
                if let Instr::Test { otherwise, .. } = &mut out[test] {
                    *otherwise = else_start;
                }
                out[jump] = Instr::Jump(end);
            }
            Step::While { cond, body } => {
                let head = out.len();
                out.push(Instr::Test { cond: cond.clone(), otherwise: 0, is_loop: true });
                compile_steps(reg, chain, body, out)?;
                out.push(Instr::Jump(head));
                let end = out.len();
                if let Instr::Test { otherwise, .. } = &mut out[head] {
                    *otherwise = end;
                }
            }
            Step::Begin { process, participants } => {
                out.push(Instr::Begin { process: process.clone(), participants: participants.clone() })
            }
            Step::End { process } => out.push(Instr::End { process: process.clone() }),
        }
    }
    Ok(())
}

impl ChainInstance {
    fn binding(&self, param: &str) -> Result<InstanceId, TransitionError> {
        self.bindings
            .get(param)
            .copied()
            .ok_or_else(|| TransitionError::MissingBinding { chain: self.chain.clone(), param: param.to_string() })
    }

    /// Parameter names used bare in a condition become variables bound to
    /// their instances.
    fn condition(&self, cond: &Guard) -> (Guard, Bindings) {
        let lift = |t: &Term| match t {
            Term::Const(c) if self.params.contains(c) => Term::Var(c.clone()),
            other => other.clone(),
        };
        let pattern =
            Pattern::new(cond.pattern.predicate.clone(), lift(&cond.pattern.subject), lift(&cond.pattern.object));
        let bindings = self.bindings.iter().map(|(k, v)| (k.clone(), Node::Instance(*v))).collect();
        (Guard { negated: cond.negated, pattern }, bindings)
    }

    fn follow_jumps(&mut self) {
        while let Some(Instr::Jump(target)) = self.program.get(self.pc) {
            self.pc = *target;
        }
        if self.pc >= self.program.len() && self.status == ChainStatus::Running {
            self.set_status(ChainStatus::Completed);
        }
    }
}

/// Runs one step. A `do` that is blocked aborts the chain and leaves the
/// store as it was before the step.
pub fn step_chain(
    reg: &Registry,
    store: &mut Store,
    inst: &mut ChainInstance,
    tick: Tick,
) -> Result<StepOutcome, TransitionError> {
    if inst.status.is_finished() {
        return Err(TransitionError::ChainAlreadyFinished { chain: inst.chain.clone(), status: inst.status });
    }
    if inst.status == ChainStatus::Planned {
        inst.set_status(ChainStatus::Running);
    }
    inst.follow_jumps();
    let Some(instr) = inst.program.get(inst.pc).cloned() else {
        return Ok(StepOutcome::Completed);
    };
    let outcome = match instr {
        Instr::Do { transitional, bearer, intervention } => {
            let bearer = inst.binding(&bearer)?;
            match apply_transitional(reg, store, &transitional, bearer, tick)? {
                Outcome::Applied(mut record) => {
                    record.intervention = intervention;
                    inst.log.push(record.clone());
                    inst.pc += 1;
                    StepOutcome::Applied(record)
                }
                Outcome::Blocked(b) => {
                    let reason = AbortReason::Blocked(b);
                    inst.abort = Some(reason.clone());
                    inst.set_status(ChainStatus::Aborted);
                    return Ok(StepOutcome::Aborted(reason));
                }
            }
        }
        Instr::Test { cond, otherwise, is_loop } => {
            let (guard, bindings) = inst.condition(&cond);
            let held = store.solve(reg, std::slice::from_ref(&guard), &bindings)?.is_ok();
            if held {
                if is_loop {
                    let n = inst.iterations.entry(inst.pc).or_insert(0);
                    *n += 1;
                    if *n > inst.loop_cap {
                        let reason = AbortReason::LoopCap { pc: inst.pc, cap: inst.loop_cap };
                        inst.abort = Some(reason.clone());
                        inst.set_status(ChainStatus::Aborted);
                        return Ok(StepOutcome::Aborted(reason));
                    }
                }
                inst.pc += 1;
            } else {
                inst.iterations.remove(&inst.pc);
                inst.pc = otherwise;
            }
            StepOutcome::Tested { cond: cond.to_string(), held }
        }
        Instr::Begin { process, participants } => {
            let ids = participants.iter().map(|p| inst.binding(p)).collect::<Result<Vec<_>, _>>()?;
            inst.pc += 1;
            StepOutcome::Begin { process, participants: ids }
        }
        Instr::End { process } => {
            inst.pc += 1;
            StepOutcome::End { process }
        }
        Instr::Jump(_) => unreachable!("jumps are followed above"),
    };
    inst.follow_jumps();
    Ok(outcome)
}
