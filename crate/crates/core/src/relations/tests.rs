use std::collections::{BTreeSet, HashMap, VecDeque};
use std::path::PathBuf;

use proptest::prelude::*;

use super::*;
use crate::lang::{compile, compile_sources, load_files};
use crate::ontology::{Pattern, Term};

pub(crate) fn corpus_compiled(files: &[&str]) -> crate::lang::Compiled {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../models");
    let paths: Vec<PathBuf> = files.iter().map(|f| dir.join(f)).collect();
    let (modules, _) = load_files(&paths).unwrap();
    compile(&modules).unwrap()
}

pub(crate) fn corpus_registry(files: &[&str]) -> Registry {
    std::sync::Arc::try_unwrap(corpus_compiled(files).registry).unwrap()
}

fn light_registry() -> Registry {
    corpus_registry(&["trafficlight.xfo"])
}

fn v(s: &str) -> Node {
    Node::value(s)
}

fn var(s: &str) -> Term {
    Term::Var(s.into())
}

fn spawn(store: &mut Store, reg: &Registry, name: &str, kind: &str) -> InstanceId {
    store.create_instance(reg, Some(name), kind, 0).unwrap()
}

#[test]
fn married_to_is_live_after_assert() {
    let reg = corpus_registry(&["village-gangjin.xfo"]);
    let mut s = Store::default();
    let p1 = spawn(&mut s, &reg, "p1", "Person");
    let p2 = spawn(&mut s, &reg, "p2", "Person");
    s.assert_relation(&reg, p1.into(), "married_to", p2.into(), 3).unwrap();
    assert!(s.is_live(&p1.into(), "married_to", &p2.into()));
    assert_eq!(s.history()[0].asserted_at, 3);
    s.assert_relation(&reg, p1.into(), "has_role", v("Superintendent"), 3).unwrap();
    assert!(s.is_live(&p1.into(), "has_role", &v("Superintendent")));
    let err = s.assert_relation(&reg, p1.into(), "has_role", v("Nobody"), 3).unwrap_err();
    assert!(matches!(err, RelationError::KindMismatch(_)));
}

#[test]
fn out_of_ontology_value_is_rejected() {
    let reg = light_registry();
    let mut s = Store::default();
    let l = spawn(&mut s, &reg, "light1", "TrafficLight");
    let err = s.assert_relation(&reg, l.into(), "color", v("blue"), 1).unwrap_err();
    assert!(matches!(err, RelationError::KindMismatch(_)));
    assert!(matches!(
        s.assert_relation(&reg, l.into(), "colour", v("red"), 1),
        Err(RelationError::UndeclaredPredicate(_))
    ));
}

#[test]
fn identical_assert_is_a_no_op() {
    let reg = light_registry();
    let mut s = Store::default();
    let l = spawn(&mut s, &reg, "light1", "TrafficLight");
    s.assert_relation(&reg, l.into(), "color", v("red"), 1).unwrap();
    s.assert_relation(&reg, l.into(), "color", v("red"), 2).unwrap();
    assert_eq!(s.history().len(), 1);
    let err = s.assert_relation(&reg, l.into(), "color", v("green"), 2).unwrap_err();
    assert!(matches!(err, RelationError::FunctionalViolation { .. }));
}

#[test]
fn retraction_keeps_history() {
    let reg = light_registry();
    let mut s = Store::default();
    let l = spawn(&mut s, &reg, "light1", "TrafficLight");
    s.assert_relation(&reg, l.into(), "color", v("red"), 1).unwrap();
    s.retract_relation(&l.into(), "color", &v("red"), 5).unwrap();
    assert_eq!(s.history()[0].asserted_at, 1);
    assert_eq!(s.history()[0].retracted_at, Some(5));
    assert!(matches!(s.retract_relation(&l.into(), "color", &v("red"), 6), Err(RelationError::NoSuchLiveTriple(_))));
    assert!(matches!(s.retract_relation(&l.into(), "color", &v("green"), 6), Err(RelationError::NoSuchLiveTriple(_))));
    // Past ticks still see the old value.
    let at = s
        .query(&reg, &Pattern::new("color", Term::Const("light1".into()), var("c")), &Bindings::new(), Some(3))
        .unwrap();
    assert_eq!(at[0]["c"], v("red"));
}

#[test]
fn query_sees_value_after_move() {
    let reg = light_registry();
    let mut s = Store::default();
    let pattern = Pattern::new("color", Term::Const("light1".into()), var("c"));
    let l = spawn(&mut s, &reg, "light1", "TrafficLight");
    assert!(s.query(&reg, &pattern, &Bindings::new(), None).unwrap().is_empty());
    s.assert_relation(&reg, l.into(), "color", v("red"), 1).unwrap();
    s.retract_relation(&l.into(), "color", &v("red"), 2).unwrap();
    s.assert_relation(&reg, l.into(), "color", v("green"), 2).unwrap();
    let got = s.query(&reg, &pattern, &Bindings::new(), None).unwrap();
    assert_eq!(got, vec![Bindings::from([("c".to_string(), v("green"))])]);
    assert!(matches!(
        s.query(&reg, &Pattern::new("nope", var("a"), var("b")), &Bindings::new(), None),
        Err(RelationError::UndeclaredPredicate(_))
    ));
}

fn build_clock(reg: &Registry, s: &mut Store) -> InstanceId {
    let clock = spawn(s, reg, "clock1", "Clock");
    for (name, kind, pred, whole) in [
        ("escapement1", "Escapement", PART_OF, "clock1"),
        ("pallet1", "Pallet", PART_OF, "escapement1"),
        ("train1", "GearTrain", PART_OF, "clock1"),
        ("mainspring1", "Mainspring", PART_OF, "clock1"),
        ("key1", "WindingKey", CONTAINED_IN, "clock1"),
    ] {
        let id = spawn(s, reg, name, kind);
        let w = s.id_of(whole).unwrap();
        s.assert_relation(reg, id.into(), pred, w.into(), 1).unwrap();
    }
    clock
}

#[test]
fn part_query_returns_composed_parts_in_id_order() {
    let reg = corpus_registry(&["clock-orchestra.xfo"]);
    let mut s = Store::default();
    build_clock(&reg, &mut s);
    let got =
        s.query(&reg, &Pattern::new(PART_OF, var("p"), Term::Const("clock1".into())), &Bindings::new(), None).unwrap();
    let names: Vec<String> = got.iter().map(|b| s.render(&b["p"])).collect();
    assert_eq!(names, ["escapement1", "train1", "mainspring1"]);
}

/// Composition closure by breadth-first search over an adjacency list built
/// from the history, independent of the store's own cascade.
fn closure_oracle(s: &Store, root: InstanceId) -> BTreeSet<InstanceId> {
    let mut children: HashMap<InstanceId, Vec<InstanceId>> = HashMap::new();
    for t in s.history() {
        if t.predicate == PART_OF && t.retracted_at.is_none() {
            if let (Node::Instance(part), Node::Instance(whole)) = (&t.subject, &t.object) {
                children.entry(*whole).or_default().push(*part);
            }
        }
    }
    let mut seen = BTreeSet::from([root]);
    let mut queue = VecDeque::from([root]);
    while let Some(n) = queue.pop_front() {
        for c in children.get(&n).into_iter().flatten() {
            if seen.insert(*c) {
                queue.push_back(*c);
            }
        }
    }
    seen
}

#[test]
fn destroying_clock_destroys_composed_parts_only() {
    let reg = corpus_registry(&["clock-orchestra.xfo"]);
    let mut s = Store::default();
    let clock = build_clock(&reg, &mut s);
    let expected = closure_oracle(&s, clock);
    let destroyed = s.destroy_instance(clock, 9).unwrap();
    assert_eq!(destroyed[0], clock);
    assert_eq!(destroyed.iter().copied().collect::<BTreeSet<_>>(), expected);
    assert_eq!(expected.len(), 5);
    let key = s.id_of("key1").unwrap();
    assert!(s.is_alive(key));
    assert!(!s.is_live(&key.into(), CONTAINED_IN, &clock.into()));
    for t in s.live_triples() {
        assert!(![&t.subject, &t.object].iter().any(|n| n.instance().is_some_and(|i| expected.contains(&i))));
    }
    assert!(matches!(s.destroy_instance(clock, 10), Err(RelationError::AlreadyDestroyed(_))));
    assert!(matches!(
        s.assert_relation(&reg, clock.into(), "running", v("ticking"), 10),
        Err(RelationError::SubjectDestroyed(_))
    ));
}

fn musicians(reg: &Registry, s: &mut Store) -> Vec<(&'static str, InstanceId)> {
    vec![
        ("strings", spawn(s, reg, "violinist1", "Violinist")),
        ("brass", spawn(s, reg, "trumpeter1", "Trumpeter")),
        ("percussion", spawn(s, reg, "percussionist1", "Percussionist")),
        ("conductor", spawn(s, reg, "conductor1", "Conductor")),
    ]
}

#[test]
fn one_member_instantiates_the_whole_orchestra() {
    let reg = corpus_registry(&["clock-orchestra.xfo"]);
    let mut s = Store::default();
    let players = musicians(&reg, &mut s);
    let orch = s.instantiate_aggregate_from_member(&reg, "Orchestra", players[0].1, "strings", Some("o"), 1).unwrap();
    let agg = s.aggregate(orch).unwrap();
    assert_eq!(agg.bound_slots().collect::<Vec<_>>(), vec![("strings", players[0].1)]);
    assert_eq!(agg.slots["conductor"].kind, "Conductor");
    assert!(agg.slots["conductor"].bound.is_none());
    assert!(s.is_live(&players[0].1.into(), MEMBER_OF, &orch.into()));
    // Binding the conductor completes the strings link.
    s.bind_member(&reg, orch, "conductor", players[3].1, 2).unwrap();
    assert!(s.is_live(&players[0].1.into(), "follows", &players[3].1.into()));
    assert!(matches!(s.bind_member(&reg, orch, "conductor", players[3].1, 2), Err(RelationError::SlotTypeMismatch(_))));
}

#[test]
fn wrong_kind_in_slot_is_rejected() {
    let reg = corpus_registry(&["village-gangjin.xfo"]);
    let mut s = Store::default();
    let kiln = spawn(&mut s, &reg, "kiln1", "Kiln");
    let err = s.instantiate_aggregate_from_member(&reg, "KilnCommunity", kiln, "potter", None, 1).unwrap_err();
    assert!(matches!(err, RelationError::SlotTypeMismatch(_)));
    assert_eq!(s.instances().count(), 1);
}

#[test]
fn every_entry_member_gives_the_same_structure() {
    let reg = corpus_registry(&["clock-orchestra.xfo"]);
    let schema = reg.aggregate("Orchestra").unwrap();
    let mut shapes = Vec::new();
    for slot in &schema.members {
        let mut s = Store::default();
        let players = musicians(&reg, &mut s);
        let member = players.iter().find(|(n, _)| *n == slot.slot).unwrap().1;
        let id = s.instantiate_aggregate_from_member(&reg, "Orchestra", member, &slot.slot, None, 1).unwrap();
        let agg = s.aggregate(id).unwrap();
        let bound: Vec<&str> = agg.bound_slots().map(|(n, _)| n).collect();
        assert_eq!(bound, [slot.slot.as_str()]);
        shapes.push(agg.structure().into_iter().map(|(a, b)| (a.to_string(), b.to_string())).collect::<Vec<_>>());
    }
    assert_eq!(shapes.len(), 4);
    assert!(shapes.windows(2).all(|w| w[0] == w[1]));
}

#[test]
fn destroying_orchestra_keeps_members() {
    let reg = corpus_registry(&["clock-orchestra.xfo"]);
    let mut s = Store::default();
    let players = musicians(&reg, &mut s);
    let orch = s.instantiate_aggregate_from_member(&reg, "Orchestra", players[0].1, "strings", None, 1).unwrap();
    for (slot, id) in &players[1..] {
        s.bind_member(&reg, orch, slot, *id, 1).unwrap();
    }
    assert_eq!(s.live_with_predicate(MEMBER_OF).count(), 4);
    assert_eq!(s.destroy_instance(orch, 2).unwrap(), vec![orch]);
    assert!(players.iter().all(|(_, id)| s.is_alive(*id)));
    assert_eq!(s.live_with_predicate(MEMBER_OF).count(), 0);
    // Links between members do not touch the aggregate and stay.
    assert_eq!(s.live_with_predicate("follows").count(), 3);
}

#[test]
fn serialized_store_rebuilds_indexes() {
    let reg = corpus_registry(&["clock-orchestra.xfo"]);
    let mut s = Store::new(IdGen::seeded(3));
    let clock = build_clock(&reg, &mut s);
    s.destroy_instance(s.id_of("train1").unwrap(), 2).unwrap();
    let json = serde_json::to_string(&s).unwrap();
    let back: Store = serde_json::from_str(&json).unwrap();
    assert_eq!(back, s);
    assert_eq!(back.fingerprint(), s.fingerprint());
    assert_eq!(back.id_of("clock1"), Some(clock));
}

const TOY: &str = r#"
quality level { low, mid, high }
object Box { quality level : level }
object Crate {}
relation holds(Crate, Box)
"#;

#[derive(Debug, Clone)]
enum Op {
    Assert(usize, usize),
    Retract(usize, usize),
    Level(usize, usize),
    Destroy(usize),
}

fn op() -> impl Strategy<Value = Op> {
    prop_oneof![
        (0..3usize, 0..3usize).prop_map(|(a, b)| Op::Assert(a, b)),
        (0..3usize, 0..3usize).prop_map(|(a, b)| Op::Retract(a, b)),
        (0..3usize, 0..3usize).prop_map(|(a, b)| Op::Level(a, b)),
        (0..6usize).prop_map(Op::Destroy),
    ]
}

proptest! {
    #[test]
    fn store_invariants_hold_under_random_ops(ops in prop::collection::vec(op(), 0..40)) {
        let reg = std::sync::Arc::try_unwrap(compile_sources(&[("toy", TOY)]).unwrap().registry).unwrap();
        let mut s = Store::default();
        let crates: Vec<InstanceId> = (0..3).map(|i| spawn(&mut s, &reg, &format!("c{i}"), "Crate")).collect();
        let boxes: Vec<InstanceId> = (0..3).map(|i| spawn(&mut s, &reg, &format!("b{i}"), "Box")).collect();
        let levels = ["low", "mid", "high"];
        let mut prev_history: Vec<Triple> = Vec::new();
        for (tick, op) in ops.into_iter().enumerate() {
            let tick = tick as Tick + 1;
            let _ = match op {
                Op::Assert(c, b) => s.assert_relation(&reg, crates[c].into(), "holds", boxes[b].into(), tick),
                Op::Retract(c, b) => s.retract_relation(&crates[c].into(), "holds", &boxes[b].into(), tick),
                Op::Level(b, l) => {
                    let old: Vec<Node> = s.objects_of(&boxes[b].into(), "level").cloned().collect();
                    for o in old {
                        let _ = s.retract_relation(&boxes[b].into(), "level", &o, tick);
                    }
                    s.assert_relation(&reg, boxes[b].into(), "level", v(levels[l]), tick)
                }
                Op::Destroy(i) => {
                    let id = if i < 3 { crates[i] } else { boxes[i - 3] };
                    s.destroy_instance(id, tick).map(|_| ())
                }
            };
            // History only grows, and old records change only by being retracted.
            prop_assert!(s.history().len() >= prev_history.len());
            for (old, new) in prev_history.iter().zip(s.history()) {
                prop_assert_eq!((&old.subject, &old.predicate, &old.object, old.asserted_at), (&new.subject, &new.predicate, &new.object, new.asserted_at));
                if old.retracted_at.is_some() {
                    prop_assert_eq!(old.retracted_at, new.retracted_at);
                }
            }
            for t in s.history() {
                prop_assert!(t.retracted_at.is_none_or(|r| r >= t.asserted_at));
            }
            for b in &boxes {
                prop_assert!(s.objects_of(&(*b).into(), "level").count() <= 1);
            }
            for t in s.live_triples() {
                for n in [&t.subject, &t.object] {
                    if let Some(id) = n.instance() {
                        prop_assert!(s.is_alive(id));
                    }
                }
            }
            let live: BTreeSet<_> = s.live_triples().map(|t| (t.predicate.clone(), t.subject.clone(), t.object.clone())).collect();
            prop_assert_eq!(live.len(), s.live_count());
            prev_history = s.history().to_vec();
        }
    }
}
