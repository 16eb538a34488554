use std::fmt::Write;

use super::ast::*;
use crate::ontology::{Linkage, Term};

/// Renders a module back to source. Re-parsing the output gives a tree that
/// equals the input once spans are cleared.
pub fn print_module(module: &SourceModule) -> String {
    let mut out = String::new();
    for import in &module.imports {
        let _ = writeln!(out, "import {}", name(import));
    }
    if !module.imports.is_empty() && !module.decls.is_empty() {
        out.push('\n');
    }
    for (i, decl) in module.decls.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        print_decl(&mut out, decl);
    }
    out
}

pub fn quote(text: &str) -> String {
    let mut s = String::with_capacity(text.len() + 2);
    s.push('"');
    for c in text.chars() {
        match c {
            '"' => s.push_str("\\\""),
            '\\' => s.push_str("\\\\"),
            '\n' => s.push_str("\\n"),
            '\t' => s.push_str("\\t"),
            c => s.push(c),
        }
    }
    s.push('"');
    s
}

fn name(n: &Name) -> String {
    match &n.module {
        Some(m) => format!("{m}.{}", n.text),
        None => n.text.clone(),
    }
}

fn term(t: &TermAst) -> String {
    match &t.term {
        Term::Var(v) => format!("?{v}"),
        Term::Const(c) => c.clone(),
        Term::Text(s) => quote(s),
    }
}

fn pattern(p: &PatternAst) -> String {
    format!("{}({}, {})", name(&p.predicate), term(&p.subject), term(&p.object))
}

fn guard(g: &GuardAst) -> String {
    if g.negated {
        format!("not {}", pattern(&g.pattern))
    } else {
        pattern(&g.pattern)
    }
}

fn print_decl(out: &mut String, decl: &Decl) {
    match decl {
        Decl::Quality(q) => {
            let values: Vec<String> = q.determinants.iter().map(name).collect();
            let _ = writeln!(out, "quality {} {{ {} }}", name(&q.name), values.join(", "));
        }
        Decl::Object(o) => {
            let _ = write!(out, "object {}", name(&o.name));
            if let Some(p) = &o.parent {
                let _ = write!(out, " : {}", name(p));
            }
            out.push_str(" {\n");
            for item in &o.items {
                out.push_str("    ");
                match item {
                    ObjItem::Quality { determinable, ontology, required } => {
                        let _ = write!(out, "quality {} : {}", name(determinable), name(ontology));
                        if *required {
                            out.push_str(" required");
                        }
                    }
                    ObjItem::Part { slot, schema, function, linkage } => {
                        let _ = write!(out, "part {} : {} function {}", name(slot), name(schema), quote(function));
                        match linkage {
                            Some(Linkage::Composition) => out.push_str(" composition"),
                            Some(Linkage::Containment) => out.push_str(" contained"),
                            None => {}
                        }
                    }
                    ObjItem::Function { name: n, purpose, serves } => {
                        let _ = write!(out, "function {}", name(n));
                        if let Some(p) = purpose {
                            let _ = write!(out, " {}", quote(p));
                        }
                        if let Some(s) = serves {
                            let _ = write!(out, " serves {}", name(s));
                        }
                    }
                    ObjItem::Role { name: n } => {
                        let _ = write!(out, "role {}", name(n));
                    }
                    ObjItem::Location { kind } => {
                        let _ = write!(out, "location {}", name(kind));
                    }
                }
                out.push('\n');
            }
            out.push_str("}\n");
        }
        Decl::Aggregate(a) => {
            let _ = writeln!(out, "aggregate {} {{", name(&a.name));
            for (slot, kind) in &a.members {
                let _ = writeln!(out, "    member {} : {}", name(slot), name(kind));
            }
            for l in &a.links {
                let _ = writeln!(out, "    link {}({}, {})", name(&l.relation), name(&l.from), name(&l.to));
            }
            out.push_str("}\n");
        }
        Decl::Relation(r) => {
            let _ = write!(out, "relation {}({}, {})", name(&r.name), name(&r.subject), name(&r.object));
            if r.relational_quality {
                out.push_str(" relational-quality");
            }
            out.push('\n');
        }
        Decl::Transitional(t) => {
            let _ = write!(out, "transitional {}", name(&t.name));
            if let Some(b) = &t.bearer {
                let _ = write!(out, " on {}", name(b));
            }
            out.push_str(" {\n");
            for g in &t.requires {
                let _ = writeln!(out, "    require {}", guard(g));
            }
            for p in &t.deletes {
                let _ = writeln!(out, "    delete {}", pattern(p));
            }
            for p in &t.creates {
                let _ = writeln!(out, "    create {}", pattern(p));
            }
            out.push_str("}\n");
        }
        Decl::Chain(c) => {
            let _ = write!(out, "chain {} {}", c.kind.keyword(), name(&c.name));
            if !c.params.is_empty() {
                let params: Vec<String> = c.params.iter().map(|(p, k)| format!("{}: {}", name(p), name(k))).collect();
                let _ = write!(out, "({})", params.join(", "));
            }
            out.push_str(" {\n");
            print_steps(out, &c.body, 1);
            out.push_str("}\n");
        }
        Decl::Disposition(d) => {
            let _ = writeln!(
                out,
                "disposition {} on {} when {} realize {}",
                name(&d.name),
                name(&d.bearer),
                pattern(&d.trigger),
                name(&d.realization)
            );
        }
        Decl::World(w) => {
            let _ = writeln!(out, "world {} {{", name(&w.name));
            for item in &w.items {
                match item {
                    WorldItem::Spawn { name: n, kind, bindings, .. } => {
                        let _ = write!(out, "    spawn {} : {}", name(n), name(kind));
                        for (k, v) in bindings {
                            let _ = write!(out, " {} = {}", name(k), term(v));
                        }
                        out.push('\n');
                    }
                    WorldItem::Assert(p) => {
                        let _ = writeln!(out, "    assert {}", pattern(p));
                    }
                    WorldItem::Rule(r) => {
                        let params: Vec<String> =
                            r.params.iter().map(|(v, k)| format!("?{}: {}", v.text, name(k))).collect();
                        let _ = write!(out, "    rule {}({})", name(&r.name), params.join(", "));
                        if !r.when.is_empty() {
                            let guards: Vec<String> = r.when.iter().map(guard).collect();
                            let _ = write!(out, " when {}", guards.join(" and "));
                        }
                        let _ = writeln!(out, " do {}(?{})", name(&r.transitional), r.bearer.text);
                    }
                }
            }
            out.push_str("}\n");
        }
        Decl::Claim(c) => {
            let _ = writeln!(out, "claim {} {}", name(&c.name), quote(&c.statement));
            for e in &c.evidence {
                let artifact = match &e.artifact {
                    ArtifactAst::Instance(n) => name(n),
                    ArtifactAst::Document(d) => quote(d),
                };
                let _ = write!(out, "    evidence {artifact} {}", quote(&e.note));
                if e.validated {
                    out.push_str(" validated");
                }
                out.push('\n');
            }
        }
        Decl::Process(p) => {
            let _ = writeln!(out, "process {} {{", name(&p.name));
            for (kind, role) in &p.participants {
                let _ = write!(out, "    participant {}", name(kind));
                if let Some(r) = role {
                    let _ = write!(out, " as {}", name(r));
                }
                out.push('\n');
            }
            if let Some(l) = &p.location {
                let _ = writeln!(out, "    at {}", name(l));
            }
            out.push_str("}\n");
        }
        Decl::Role(r) => {
            let _ = write!(out, "role {} on {}", name(&r.name), name(&r.bearer));
            if let Some(c) = &r.context {
                let _ = write!(out, " in {}", name(c));
            }
            out.push('\n');
        }
        Decl::Need(n) => {
            let _ = writeln!(out, "need {} {}", name(&n.name), quote(&n.description));
        }
        Decl::Facet(f) => {
            let _ = writeln!(out, "facet {}", name(&f.name));
        }
    }
}

fn print_steps(out: &mut String, steps: &[StepAst], depth: usize) {
    let pad = "    ".repeat(depth);
    for step in steps {
        match step {
            StepAst::Do { transitional, bearer, intervention, .. } => {
                out.push_str(&pad);
                if *intervention {
                    out.push_str("intervention ");
                }
                let _ = write!(out, "do {}", name(transitional));
                if let Some(b) = bearer {
                    let _ = write!(out, "({})", name(b));
                }
                out.push('\n');
            }
            StepAst::If { cond, then, otherwise, .. } => {
                let _ = writeln!(out, "{pad}if {} {{", guard(cond));
                print_steps(out, then, depth + 1);
                if otherwise.is_empty() {
                    let _ = writeln!(out, "{pad}}}");
                } else {
                    let _ = writeln!(out, "{pad}}} else {{");
                    print_steps(out, otherwise, depth + 1);
                    let _ = writeln!(out, "{pad}}}");
                }
            }
            StepAst::While { cond, body, .. } => {
                let _ = writeln!(out, "{pad}while {} {{", guard(cond));
                print_steps(out, body, depth + 1);
                let _ = writeln!(out, "{pad}}}");
            }
            StepAst::Begin { process, participants, .. } => {
                let _ = write!(out, "{pad}begin {}", name(process));
                if !participants.is_empty() {
                    let ps: Vec<String> = participants.iter().map(name).collect();
                    let _ = write!(out, "({})", ps.join(", "));
                }
                out.push('\n');
            }
            StepAst::End { process, .. } => {
                let _ = writeln!(out, "{pad}end {}", name(process));
            }
        }
    }
}
