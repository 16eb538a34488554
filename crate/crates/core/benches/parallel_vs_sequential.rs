use std::collections::BTreeMap;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use xfo_core::discourse::{check_inus_all, CausalField};
use xfo_core::lang::compile_sources;
use xfo_core::microworld::Microworld;
use xfo_core::ontology::Term;
use xfo_core::par::Exec;
use xfo_core::relations::IdGen;
use xfo_core::transitions::{check_equivalence, AxisSpec, StateSpace};

const KNOBS: &str = "
quality dial { zero, one, two }
object Knob { quality dial : dial required }
transitional up1 on Knob { require dial(?self, zero) delete dial(?self, zero) create dial(?self, one) }
transitional up2 on Knob { require dial(?self, one) delete dial(?self, one) create dial(?self, two) }
chain procedure climb(k: Knob) { while dial(k, zero) { do up1 } while dial(k, one) { do up2 } }
chain procedure steps(k: Knob) { if dial(k, zero) { do up1 } if dial(k, one) { do up2 } }
";

fn equivalence(c: &mut Criterion) {
    let reg = compile_sources(&[("knobs", KNOBS)]).unwrap().registry;
    let mut w = Microworld::new("bench", reg.clone(), IdGen::sequential());
    let mut axes = Vec::new();
    for i in 0..6 {
        let name = format!("knob{i}");
        w.spawn("Knob", Some(&name), &[("dial".into(), Term::Const("zero".into()))]).unwrap();
        axes.push(AxisSpec { instance: name, determinable: "dial".into(), values: None });
    }
    let space = StateSpace::new(&reg, w.store().clone(), w.clock(), &axes).unwrap();
    let b = BTreeMap::from([("k".to_string(), w.id("knob0").unwrap())]);
    let mut group = c.benchmark_group("equivalence_729_states");
    for exec in [Exec::Sequential, Exec::Parallel] {
        group.bench_with_input(BenchmarkId::from_parameter(format!("{exec:?}")), &exec, |bench, &exec| {
            bench.iter(|| check_equivalence(&reg, "climb", "steps", &b, &b, &space, 1_000, exec).unwrap())
        });
    }
    group.finish();
}

fn inus(c: &mut Criterion) {
    let universe: Vec<String> = (0..20).map(|i| format!("c{i}")).collect();
    let sufficient = (0..20)
        .map(|i| {
            [universe[i].clone(), universe[(i + 1) % 20].clone(), universe[(i + 7) % 20].clone()].into_iter().collect()
        })
        .collect();
    let field = CausalField { outcome: "e".into(), universe, sufficient };
    let mut group = c.benchmark_group("inus_20_conditions");
    for exec in [Exec::Sequential, Exec::Parallel] {
        group.bench_with_input(BenchmarkId::from_parameter(format!("{exec:?}")), &exec, |bench, &exec| {
            bench.iter(|| check_inus_all(&field, exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, equivalence, inus);
criterion_main!(benches);
