use std::collections::BTreeSet;

use proptest::prelude::*;

use super::*;
use crate::microworld::Microworld;
use crate::relations::tests::corpus_compiled;

fn set(items: &[&str]) -> BTreeSet<String> {
    items.iter().map(|s| s.to_string()).collect()
}

#[test]
fn corpus_claims_resolve_and_are_supported() {
    let c = corpus_compiled(&["waterdropper-goryeo.xfo", "village-gangjin.xfo"]);
    let w = Microworld::from_def(c.registry.clone(), c.world("gangjin").unwrap(), None).unwrap();
    let ledger = ClaimLedger::from_defs(&c.claims, w.store()).unwrap();
    assert!(ledger.is_supported("joseon_austerity").unwrap());
    assert!(ledger.is_supported("goryeo_duck").unwrap());
    let austerity = ledger.claim("joseon_austerity").unwrap();
    assert!(austerity.evidence.iter().any(|e| !e.validated));
    assert!(matches!(austerity.evidence[0].artifact, Artifact::Document(_)));
    assert_eq!(ledger.is_supported("x"), Err(DiscourseError::UnknownClaim("x".into())));
}

#[test]
fn evidence_must_point_at_something_that_existed() {
    let c = corpus_compiled(&["waterdropper-goryeo.xfo"]);
    let mut w = Microworld::from_def(c.registry.clone(), c.world("workshop").unwrap(), None).unwrap();
    let dropper = w.id("dropper1").unwrap();
    w.destroy("dropper1").unwrap();
    let mut ledger = ClaimLedger::default();
    ledger.add_claim(Claim::new("c", "a dropper was made")).unwrap();
    let weak = Evidence { artifact: Artifact::Document("sherd notes".into()), note: String::new(), validated: false };
    ledger.attach_evidence(w.store(), "c", weak.clone()).unwrap();
    assert!(!ledger.is_supported("c").unwrap());
    let gone = Evidence { artifact: Artifact::Instance(dropper), note: "destroyed but real".into(), validated: true };
    ledger.attach_evidence(w.store(), "c", gone).unwrap();
    assert!(ledger.is_supported("c").unwrap());
    let ghost = Evidence { artifact: Artifact::Instance(InstanceId(9_999)), note: String::new(), validated: true };
    assert_eq!(ledger.attach_evidence(w.store(), "c", ghost), Err(DiscourseError::DanglingEvidenceRef("#9999".into())));
    assert_eq!(ledger.attach_evidence(w.store(), "d", weak), Err(DiscourseError::UnknownClaim("d".into())));
    assert_eq!(ledger.add_claim(Claim::new("c", "again")).unwrap_err(), DiscourseError::DuplicateClaim("c".into()));
}

#[test]
fn short_circuit_is_inus() {
    let f = CausalField::new(
        "fire",
        &["short_circuit", "flammable_material", "arson"],
        &[&["short_circuit", "flammable_material"], &["arson"]],
    )
    .unwrap();
    let v = check_inus(&f, "short_circuit").unwrap();
    assert!(v.inus);
    assert_eq!(v.witness, Some(set(&["short_circuit", "flammable_material"])));
    assert!(!check_inus(&f, "arson").unwrap().inus);
    assert_eq!(check_inus(&f, "lightning"), Err(DiscourseError::UnknownCondition("lightning".into())));
}

#[test]
fn sole_sufficient_condition_is_not_inus() {
    let f = CausalField::new("fire", &["arson", "wind"], &[&["arson"]]).unwrap();
    assert!(!check_inus(&f, "arson").unwrap().inus);
    assert!(!check_inus(&f, "wind").unwrap().inus);
    assert!(CausalField::new("fire", &["a"], &[&["b"]]).is_err());
    assert!(CausalField::new("fire", &["a"], &[]).is_err());
}

#[test]
fn field_text_round() {
    let f = parse_field(
        "# house fire\noutcome fire\nconditions short_circuit flammable_material arson\n\
         sufficient short_circuit flammable_material\nsufficient arson # alone\n",
    )
    .unwrap();
    assert_eq!(f.universe.len(), 3);
    assert_eq!(f.sufficient[1], set(&["arson"]));
    assert!(matches!(parse_field("outcome a b\n"), Err(DiscourseError::FieldSyntax { line: 1, .. })));
    assert!(matches!(parse_field("outcome a\nmaybe x\n"), Err(DiscourseError::FieldSyntax { line: 2, .. })));
    assert!(matches!(parse_field("outcome a\n"), Err(DiscourseError::InvalidField(_))));
    assert!(matches!(parse_field("outcome a\nconditions x\nsufficient y\n"), Err(DiscourseError::InvalidField(_))));
}

/// Set-based restatement: list the whole power set, mark each subset
/// sufficient when it includes a declared set, then read the four clauses off.
fn oracle(field: &CausalField, c: &str) -> Option<BTreeSet<String>> {
    let n = field.universe.len();
    let power: Vec<BTreeSet<String>> = (0..1usize << n)
        .map(|bits| (0..n).filter(|i| bits >> i & 1 == 1).map(|i| field.universe[i].clone()).collect())
        .collect();
    let sufficient = |t: &BTreeSet<String>| field.sufficient.iter().any(|d| d.is_subset(t));
    let alone: BTreeSet<String> = [c.to_string()].into();
    let insufficient = power.iter().filter(|t| t.is_subset(&alone)).all(|t| !sufficient(t));
    let unnecessary = field.sufficient.iter().any(|d| !d.contains(c));
    if !(insufficient && unnecessary) {
        return None;
    }
    field
        .sufficient
        .iter()
        .find(|s| {
            let mut rest = (*s).clone();
            s.contains(c) && rest.remove(c) && !sufficient(&rest) && power.contains(s)
        })
        .cloned()
}

fn field_strategy(max: usize) -> impl Strategy<Value = CausalField> {
    (1..=max).prop_flat_map(|n| {
        prop::collection::vec(prop::collection::btree_set(0..n, 1..=n), 1..5).prop_map(move |sets| CausalField {
            outcome: "e".into(),
            universe: (0..n).map(|i| format!("c{i}")).collect(),
            sufficient: sets.into_iter().map(|s| s.into_iter().map(|i| format!("c{i}")).collect()).collect(),
        })
    })
}

proptest! {
    #[test]
    fn agrees_with_power_set_oracle(field in field_strategy(10)) {
        for c in &field.universe {
            let v = check_inus(&field, c).unwrap();
            prop_assert_eq!(&v.witness, &oracle(&field, c));
            prop_assert_eq!(v.inus, v.witness.is_some());
        }
        let seq = check_inus_all(&field, crate::par::Exec::Sequential).unwrap();
        prop_assert_eq!(&seq, &check_inus_all(&field, crate::par::Exec::Parallel).unwrap());
        prop_assert_eq!(seq.len(), field.universe.len());
    }

    #[test]
    fn pinned_witness_survives_harmless_additions(field in field_strategy(6), extra in prop::collection::btree_set(0..6usize, 1..6)) {
        let extra: BTreeSet<String> = extra.into_iter().filter(|i| *i < field.universe.len()).map(|i| format!("c{i}")).collect();
        prop_assume!(!extra.is_empty());
        for c in &field.universe {
            let Some(w) = check_inus(&field, c).unwrap().witness else { continue };
            let mut rest = w.clone();
            rest.remove(c);
            let alone: BTreeSet<String> = [c.clone()].into();
            // A new set inside the witness remainder or inside {c} changes the clauses themselves.
            if extra.is_subset(&rest) || extra.is_subset(&alone) {
                continue;
            }
            let mut grown = field.clone();
            grown.sufficient.push(extra.clone());
            prop_assert!(is_witness(&grown, c, &w).unwrap());
            prop_assert!(check_inus(&grown, c).unwrap().inus);
        }
    }
}
