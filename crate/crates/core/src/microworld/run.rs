use std::sync::Arc;

use super::{Cause, Microworld, MicroworldError, TimelineEvent};
use crate::lang::RuleDef;
use crate::ontology::{Registry, SELF_VAR};
use crate::relations::{Bindings, InstanceId, Node};
use crate::transitions::{apply_transitional, step_chain, AbortReason, ChainInstance, Outcome, StepOutcome};

/// Firings allowed in one disposition fixpoint before giving up.
pub const DEFAULT_CASCADE_CAP: usize = 1_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiredDisposition {
    pub disposition: String,
    pub bearer: InstanceId,
    pub transitional: String,
    pub tick: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RunEnd {
    Completed,
    Aborted(AbortReason),
    /// A full scan of the interaction rules fired nothing.
    Quiescent,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunReport {
    pub end: RunEnd,
    /// Transitionals applied by the chain or rules, not counting dispositions.
    pub applied: usize,
    pub fired: Vec<FiredDisposition>,
    pub ticks_used: u64,
}

impl Microworld {
    /// Fires every triggered disposition until none is triggered.
    pub fn fire_dispositions(&mut self) -> Result<Vec<FiredDisposition>, MicroworldError> {
        let reg = Arc::clone(&self.registry);
        let mut fired = Vec::new();
        while let Some((disposition, bearer, transitional)) = self.next_trigger(&reg)? {
            if fired.len() >= self.cascade_cap {
                return Err(MicroworldError::DispositionCascadeOverflow(self.cascade_cap));
            }
            let tick = self.clock + 1;
            match apply_transitional(&reg, &mut self.store, &transitional, bearer, tick)? {
                Outcome::Applied(record) => {
                    self.clock = tick;
                    self.record(TimelineEvent::TransitionInstant {
                        tick,
                        transitional: transitional.clone(),
                        bearer,
                        edits: record.edits,
                        cause: Cause::Disposition { disposition: disposition.clone() },
                    });
                    fired.push(FiredDisposition { disposition, bearer, transitional, tick });
                }
                Outcome::Blocked(b) => {
                    return Err(MicroworldError::DispositionBlocked {
                        disposition,
                        bearer: self.store.render(&Node::Instance(bearer)),
                        transitional,
                        reason: b.reason.to_string(),
                    })
                }
            }
        }
        Ok(fired)
    }

    /// First triggered disposition: declaration order, then bearer id order.
    pub(crate) fn next_trigger(&self, reg: &Registry) -> Result<Option<(String, InstanceId, String)>, MicroworldError> {
        for d in reg.dispositions() {
            let (Some(trigger), Some(realization)) = (&d.trigger, &d.realization) else {
                continue;
            };
            let guard = crate::ontology::Guard::positive(trigger.clone());
            for (id, r) in self.store.alive_instances() {
                if !reg.is_subkind(&r.schema, &d.bearer) {
                    continue;
                }
                let b = Bindings::from([(SELF_VAR.to_string(), Node::Instance(id))]);
                if self.store.solve(reg, std::slice::from_ref(&guard), &b)?.is_ok() {
                    return Ok(Some((d.name.clone(), id, realization.clone())));
                }
            }
        }
        Ok(None)
    }

    /// Whether any disposition trigger currently matches.
    pub fn has_live_trigger(&self) -> Result<bool, MicroworldError> {
        Ok(self.next_trigger(&self.registry)?.is_some())
    }

    /// Steps `chain` until it finishes. Dispositions settle after every
    /// applied transitional. Fails once the run would need more than
    /// `max_ticks` ticks; the world keeps everything done up to then.
    pub fn run_chain(&mut self, chain: &mut ChainInstance, max_ticks: u64) -> Result<RunReport, MicroworldError> {
        if max_ticks == 0 {
            return Err(MicroworldError::ZeroTickBudget);
        }
        let reg = Arc::clone(&self.registry);
        let start = self.clock;
        let mut report = RunReport { end: RunEnd::Completed, applied: 0, fired: Vec::new(), ticks_used: 0 };
        while !chain.status().is_finished() {
            let budget_left = self.clock - start < max_ticks;
            let saved = (!budget_left).then(|| (self.store.clone(), chain.clone()));
            let outcome = step_chain(&reg, &mut self.store, chain, self.clock + 1)?;
            if let (Some((store, ch)), StepOutcome::Applied(_)) = (saved, &outcome) {
                self.store = store;
                *chain = ch;
                report.ticks_used = self.clock - start;
                return Err(MicroworldError::TickBudgetExhausted(max_ticks));
            }
            match outcome {
                StepOutcome::Applied(record) => {
                    self.clock = record.tick;
                    self.record(TimelineEvent::TransitionInstant {
                        tick: record.tick,
                        transitional: record.transitional.clone(),
                        bearer: record.bearer,
                        edits: record.edits,
                        cause: Cause::Chain { chain: chain.chain.clone(), intervention: record.intervention },
                    });
                    report.applied += 1;
                    report.fired.extend(self.fire_dispositions()?);
                    if self.clock - start > max_ticks {
                        return Err(MicroworldError::TickBudgetExhausted(max_ticks));
                    }
                }
                StepOutcome::Begin { process, participants } => {
                    self.begin_process(&process, &participants)?;
                }
                StepOutcome::End { process } => {
                    self.end_process(&process, None)?;
                }
                StepOutcome::Aborted(reason) => report.end = RunEnd::Aborted(reason),
                StepOutcome::Tested { .. } | StepOutcome::Completed => {}
            }
        }
        report.ticks_used = self.clock - start;
        Ok(report)
    }

    /// Repeatedly fires the first applicable interaction rule until a full
    /// scan fires nothing.
    ///
    /// Rules are scanned in declaration order, each over tuples of distinct
    /// alive instances in id order. A tuple goes to the most specific rule
    /// whose kinds it fits (summed kind depth, earlier rule on ties); the
    /// winner fires if its `when` guards hold and its transitional applies.
    pub fn run_interactions(&mut self, max_ticks: u64) -> Result<RunReport, MicroworldError> {
        if max_ticks == 0 {
            return Err(MicroworldError::ZeroTickBudget);
        }
        let reg = Arc::clone(&self.registry);
        let start = self.clock;
        let mut report = RunReport { end: RunEnd::Quiescent, applied: 0, fired: Vec::new(), ticks_used: 0 };
        while let Some((rule, bindings)) = self.next_rule_firing(&reg)? {
            if self.clock - start >= max_ticks {
                report.ticks_used = self.clock - start;
                return Err(MicroworldError::TickBudgetExhausted(max_ticks));
            }
            let rule = &self.rules[rule];
            let bearer = bindings[&rule.bearer].instance().expect("rule params bind instances");
            let (name, transitional) = (rule.name.clone(), rule.transitional.clone());
            let tick = self.clock + 1;
            let Outcome::Applied(record) = apply_transitional(&reg, &mut self.store, &transitional, bearer, tick)?
            else {
                unreachable!("next_rule_firing only returns applicable rules");
            };
            self.clock = tick;
            self.record(TimelineEvent::TransitionInstant {
                tick,
                transitional,
                bearer,
                edits: record.edits,
                cause: Cause::Rule { rule: name },
            });
            report.applied += 1;
            report.fired.extend(self.fire_dispositions()?);
        }
        report.ticks_used = self.clock - start;
        Ok(report)
    }

    /// The rule that would fire next, with its parameter bindings.
    pub fn next_rule_firing(&self, reg: &Registry) -> Result<Option<(usize, Bindings)>, MicroworldError> {
        let alive: Vec<(InstanceId, String)> =
            self.store.alive_instances().map(|(id, r)| (id, r.schema.clone())).collect();
        for (ri, rule) in self.rules.iter().enumerate() {
            for tuple in tuples(&alive, rule, reg) {
                let kinds: Vec<&str> = tuple.iter().map(|&i| alive[i].1.as_str()).collect();
                if dispatch(reg, &self.rules, &kinds) != Some(ri) {
                    continue;
                }
                let b: Bindings = rule
                    .params
                    .iter()
                    .zip(&tuple)
                    .map(|((v, _), &i)| (v.clone(), Node::Instance(alive[i].0)))
                    .collect();
                let Ok(full) = self.store.solve(reg, &rule.when, &b)? else {
                    continue;
                };
                let bearer = full[&rule.bearer].instance().expect("rule params bind instances");
                let mut trial = self.store.clone();
                if let Outcome::Applied(_) =
                    apply_transitional(reg, &mut trial, &rule.transitional, bearer, self.clock + 1)?
                {
                    return Ok(Some((ri, full)));
                }
            }
        }
        Ok(None)
    }
}

/// Most specific rule accepting instances of `kinds`, earliest on ties.
pub(crate) fn dispatch(reg: &Registry, rules: &[RuleDef], kinds: &[&str]) -> Option<usize> {
    let mut best: Option<(usize, usize)> = None;
    for (i, r) in rules.iter().enumerate() {
        if r.params.len() != kinds.len() || !r.params.iter().zip(kinds).all(|((_, k), kind)| reg.is_subkind(kind, k)) {
            continue;
        }
        let depth: usize = r.params.iter().map(|(_, k)| reg.specificity(k).unwrap_or(0)).sum();
        if best.is_none_or(|(_, d)| depth > d) {
            best = Some((i, depth));
        }
    }
    best.map(|(i, _)| i)
}

/// Index tuples of distinct instances fitting the rule's kinds, lexicographic in id order.
fn tuples(alive: &[(InstanceId, String)], rule: &RuleDef, reg: &Registry) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for (_, kind) in &rule.params {
        let mut next = Vec::new();
        for prefix in &out {
            for (i, (_, k)) in alive.iter().enumerate() {
                if !prefix.contains(&i) && reg.is_subkind(k, kind) {
                    let mut t: Vec<usize> = prefix.clone();
                    t.push(i);
                    next.push(t);
                }
            }
        }
        out = next;
    }
    out
}
