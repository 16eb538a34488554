use super::ast::*;
use super::diagnostic::{Diagnostic, Span};
use super::lexer::{tokenize, Tok, Token};
use crate::ontology::{ChainKind, Linkage, Term};

/// Keywords that start a top-level declaration; error recovery resumes at
/// the next one found outside any braces.
pub const DECL_KEYWORDS: &[&str] = &[
    "import",
    "quality",
    "object",
    "aggregate",
    "relation",
    "transitional",
    "chain",
    "disposition",
    "world",
    "claim",
    "process",
    "role",
    "need",
    "facet",
];

const SYNTAX: &str = "syntax";

type PResult<T> = Result<T, Diagnostic>;

/// Parses one module. Always returns a module; syntax errors are collected
/// and parsing resumes at the next declaration keyword.
pub fn parse_module(name: &str, text: &str) -> (SourceModule, Vec<Diagnostic>) {
    let file = format!("{name}.xfo");
    let mut p = Parser { toks: tokenize(text), pos: 0, file, depth: 0, last: Span::default(), diags: Vec::new() };
    let mut module =
        SourceModule { name: name.to_string(), text: text.to_string(), imports: Vec::new(), decls: Vec::new() };

    while !p.at_eof() {
        p.depth = 0;
        let Some(kw) = p.peek_decl_keyword() else {
            let t = p.peek().clone();
            p.diags.push(Diagnostic::error(
                &p.file,
                t.span,
                SYNTAX,
                format!("expected a declaration, found {}", t.tok.describe()),
            ));
            p.bump();
            p.recover();
            continue;
        };
        let result = if kw == "import" {
            p.bump();
            p.name().map(|n| module.imports.push(n))
        } else {
            p.decl(&kw).map(|d| module.decls.push(d))
        };
        if let Err(d) = result {
            p.diags.push(d);
            p.recover();
        }
    }
    (module, p.diags)
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    file: String,
    depth: usize,
    last: Span,
    diags: Vec<Diagnostic>,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.toks[self.pos.min(self.toks.len() - 1)]
    }

    fn peek_at(&self, ahead: usize) -> &Tok {
        &self.toks[(self.pos + ahead).min(self.toks.len() - 1)].tok
    }

    fn at_eof(&self) -> bool {
        self.peek().tok == Tok::Eof
    }

    fn bump(&mut self) -> Token {
        let t = self.peek().clone();
        match t.tok {
            Tok::LBrace => self.depth += 1,
            Tok::RBrace => self.depth = self.depth.saturating_sub(1),
            Tok::Eof => return t,
            _ => {}
        }
        self.last = t.span;
        self.pos += 1;
        t
    }

    fn peek_decl_keyword(&self) -> Option<String> {
        match &self.peek().tok {
            Tok::Ident(s) if DECL_KEYWORDS.contains(&s.as_str()) => Some(s.clone()),
            _ => None,
        }
    }

    fn recover(&mut self) {
        loop {
            match &self.peek().tok {
                Tok::Eof => return,
                Tok::Ident(s) if self.depth == 0 && DECL_KEYWORDS.contains(&s.as_str()) => return,
                _ => {
                    self.bump();
                }
            }
        }
    }

    fn error_here(&self, expected: &str) -> Diagnostic {
        let t = self.peek();
        Diagnostic::error(&self.file, t.span, SYNTAX, format!("expected {expected}, found {}", t.tok.describe()))
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(&self.peek().tok, Tok::Ident(s) if s == kw)
    }

    fn eat_kw(&mut self, kw: &str) -> bool {
        if self.is_kw(kw) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_kw(&mut self, kw: &str) -> PResult<Span> {
        if self.is_kw(kw) {
            Ok(self.bump().span)
        } else {
            Err(self.error_here(&format!("`{kw}`")))
        }
    }

    fn expect(&mut self, tok: Tok) -> PResult<Span> {
        if self.peek().tok == tok {
            Ok(self.bump().span)
        } else {
            Err(self.error_here(&tok.describe()))
        }
    }

    fn eat(&mut self, tok: Tok) -> bool {
        if self.peek().tok == tok {
            self.bump();
            true
        } else {
            false
        }
    }

    fn ident(&mut self) -> PResult<Name> {
        match self.peek().tok.clone() {
            Tok::Ident(s) => {
                let span = self.bump().span;
                Ok(Name::new(s, span))
            }
            _ => Err(self.error_here("an identifier")),
        }
    }

    /// `IDENT` or `IDENT . IDENT`.
    fn name(&mut self) -> PResult<Name> {
        let first = self.ident()?;
        if self.peek().tok == Tok::Dot {
            self.bump();
            let second = self.ident()?;
            return Ok(Name { module: Some(first.text), text: second.text, span: first.span.to(second.span) });
        }
        Ok(first)
    }

    fn var(&mut self) -> PResult<Name> {
        match self.peek().tok.clone() {
            Tok::Var(v) => {
                let span = self.bump().span;
                Ok(Name::new(v, span))
            }
            _ => Err(self.error_here("a `?variable`")),
        }
    }

    fn string(&mut self) -> PResult<String> {
        match self.peek().tok.clone() {
            Tok::Str(s) => {
                self.bump();
                Ok(s)
            }
            _ => Err(self.error_here("a string")),
        }
    }

    fn term(&mut self) -> PResult<TermAst> {
        let t = self.peek().clone();
        let term = match t.tok {
            Tok::Ident(s) => Term::Const(s),
            Tok::Var(v) => Term::Var(v),
            Tok::Str(s) => Term::Text(s),
            _ => return Err(self.error_here("a term")),
        };
        self.bump();
        Ok(TermAst { term, span: t.span })
    }

    fn pattern(&mut self) -> PResult<PatternAst> {
        let predicate = self.name()?;
        self.expect(Tok::LParen)?;
        let subject = self.term()?;
        self.expect(Tok::Comma)?;
        let object = self.term()?;
        self.expect(Tok::RParen)?;
        let span = predicate.span.to(self.last);
        Ok(PatternAst { predicate, subject, object, span })
    }

    fn guard(&mut self) -> PResult<GuardAst> {
        let negated = self.eat_kw("not");
        Ok(GuardAst { negated, pattern: self.pattern()? })
    }

    fn decl(&mut self, kw: &str) -> PResult<Decl> {
        let start = self.bump().span;
        let decl = match kw {
            "quality" => Decl::Quality(self.quality(start)?),
            "object" => Decl::Object(self.object(start)?),
            "aggregate" => Decl::Aggregate(self.aggregate(start)?),
            "relation" => Decl::Relation(self.relation(start)?),
            "transitional" => Decl::Transitional(self.transitional(start)?),
            "chain" => Decl::Chain(self.chain(start)?),
            "disposition" => Decl::Disposition(self.disposition(start)?),
            "world" => Decl::World(self.world(start)?),
            "claim" => Decl::Claim(self.claim(start)?),
            "process" => Decl::Process(self.process(start)?),
            "role" => Decl::Role(self.role(start)?),
            "need" => {
                let name = self.ident()?;
                let description = self.string()?;
                Decl::Need(NeedDecl { name, description, span: start.to(self.last) })
            }
            "facet" => {
                let name = self.ident()?;
                Decl::Facet(FacetDecl { name, span: start.to(self.last) })
            }
            _ => unreachable!("caller checked DECL_KEYWORDS"),
        };
        Ok(decl)
    }

    fn quality(&mut self, start: Span) -> PResult<QualityDecl> {
        let name = self.ident()?;
        self.expect(Tok::LBrace)?;
        let mut determinants = vec![self.ident()?];
        while self.eat(Tok::Comma) {
            determinants.push(self.ident()?);
        }
        self.expect(Tok::RBrace)?;
        Ok(QualityDecl { name, determinants, span: start.to(self.last) })
    }

    fn object(&mut self, start: Span) -> PResult<ObjectDecl> {
        let name = self.ident()?;
        let parent = if self.eat(Tok::Colon) { Some(self.name()?) } else { None };
        self.expect(Tok::LBrace)?;
        let mut items = Vec::new();
        while !self.eat(Tok::RBrace) {
            let item = if self.eat_kw("quality") {
                let determinable = self.ident()?;
                self.expect(Tok::Colon)?;
                let ontology = self.name()?;
                let required = self.eat_kw("required");
                ObjItem::Quality { determinable, ontology, required }
            } else if self.eat_kw("part") {
                let slot = self.ident()?;
                self.expect(Tok::Colon)?;
                let schema = self.name()?;
                self.expect_kw("function")?;
                let function = self.string()?;
                let linkage = if self.eat_kw("composition") {
                    Some(Linkage::Composition)
                } else if self.eat_kw("contained") {
                    Some(Linkage::Containment)
                } else {
                    None
                };
                ObjItem::Part { slot, schema, function, linkage }
            } else if self.eat_kw("function") {
                let name = self.ident()?;
                let purpose = if matches!(self.peek().tok, Tok::Str(_)) { Some(self.string()?) } else { None };
                let serves = if self.eat_kw("serves") { Some(self.name()?) } else { None };
                ObjItem::Function { name, purpose, serves }
            } else if self.eat_kw("role") {
                ObjItem::Role { name: self.ident()? }
            } else if self.eat_kw("location") {
                ObjItem::Location { kind: self.name()? }
            } else {
                return Err(self.error_here("`quality`, `part`, `function`, `role`, `location` or `}`"));
            };
            items.push(item);
        }
        Ok(ObjectDecl { name, parent, items, span: start.to(self.last) })
    }

    fn aggregate(&mut self, start: Span) -> PResult<AggregateDecl> {
        let name = self.ident()?;
        self.expect(Tok::LBrace)?;
        let (mut members, mut links) = (Vec::new(), Vec::new());
        while !self.eat(Tok::RBrace) {
            if self.eat_kw("member") {
                let slot = self.ident()?;
                self.expect(Tok::Colon)?;
                members.push((slot, self.name()?));
            } else if self.eat_kw("link") {
                let relation = self.name()?;
                self.expect(Tok::LParen)?;
                let from = self.ident()?;
                self.expect(Tok::Comma)?;
                let to = self.ident()?;
                self.expect(Tok::RParen)?;
                links.push(LinkAst { relation, from, to });
            } else {
                return Err(self.error_here("`member`, `link` or `}`"));
            }
        }
        Ok(AggregateDecl { name, members, links, span: start.to(self.last) })
    }

    fn relation(&mut self, start: Span) -> PResult<RelationDecl> {
        let name = self.ident()?;
        self.expect(Tok::LParen)?;
        let subject = self.name()?;
        self.expect(Tok::Comma)?;
        let object = self.name()?;
        self.expect(Tok::RParen)?;
        let relational_quality = self.eat_kw("relational-quality");
        Ok(RelationDecl { name, subject, object, relational_quality, span: start.to(self.last) })
    }

    fn transitional(&mut self, start: Span) -> PResult<TransitionalDecl> {
        let name = self.ident()?;
        let bearer = if self.eat_kw("on") { Some(self.name()?) } else { None };
        self.expect(Tok::LBrace)?;
        let (mut requires, mut deletes, mut creates) = (Vec::new(), Vec::new(), Vec::new());
        while !self.eat(Tok::RBrace) {
            if self.eat_kw("require") {
                requires.push(self.guard()?);
            } else if self.eat_kw("delete") {
                deletes.push(self.pattern()?);
            } else if self.eat_kw("create") {
                creates.push(self.pattern()?);
            } else {
                return Err(self.error_here("`require`, `delete`, `create` or `}`"));
            }
        }
        Ok(TransitionalDecl { name, bearer, requires, deletes, creates, span: start.to(self.last) })
    }

    fn chain(&mut self, start: Span) -> PResult<ChainDecl> {
        let kind = match &self.peek().tok {
            Tok::Ident(s) => ChainKind::from_keyword(s),
            _ => None,
        }
        .ok_or_else(|| self.error_here("`sequence`, `mechanism`, `procedure` or `workflow`"))?;
        self.bump();
        let name = self.ident()?;
        let mut params = Vec::new();
        if self.eat(Tok::LParen) {
            loop {
                let p = self.ident()?;
                self.expect(Tok::Colon)?;
                params.push((p, self.name()?));
                if !self.eat(Tok::Comma) {
                    break;
                }
            }
            self.expect(Tok::RParen)?;
        }
        let body = self.block()?;
        Ok(ChainDecl { kind, name, params, body, span: start.to(self.last) })
    }

    fn block(&mut self) -> PResult<Vec<StepAst>> {
        self.expect(Tok::LBrace)?;
        let mut steps = Vec::new();
        while !self.eat(Tok::RBrace) {
            steps.push(self.step()?);
        }
        Ok(steps)
    }

    fn step(&mut self) -> PResult<StepAst> {
        let start = self.peek().span;
        if self.is_kw("do") || self.is_kw("intervention") {
            let intervention = self.eat_kw("intervention");
            self.expect_kw("do")?;
            let transitional = self.name()?;
            let bearer = if self.eat(Tok::LParen) {
                let b = self.ident()?;
                self.expect(Tok::RParen)?;
                Some(b)
            } else {
                None
            };
            return Ok(StepAst::Do { transitional, bearer, intervention, span: start.to(self.last) });
        }
        if self.eat_kw("if") {
            let cond = self.guard()?;
            let then = self.block()?;
            let otherwise = if self.eat_kw("else") { self.block()? } else { Vec::new() };
            return Ok(StepAst::If { cond, then, otherwise, span: start });
        }
        if self.eat_kw("while") {
            let cond = self.guard()?;
            let body = self.block()?;
            return Ok(StepAst::While { cond, body, span: start });
        }
        if self.eat_kw("begin") {
            let process = self.name()?;
            let mut participants = Vec::new();
            if self.eat(Tok::LParen) {
                loop {
                    participants.push(self.ident()?);
                    if !self.eat(Tok::Comma) {
                        break;
                    }
                }
                self.expect(Tok::RParen)?;
            }
            return Ok(StepAst::Begin { process, participants, span: start.to(self.last) });
        }
        if self.eat_kw("end") {
            let process = self.name()?;
            return Ok(StepAst::End { process, span: start.to(self.last) });
        }
        Err(self.error_here("a step (`do`, `if`, `while`, `begin`, `end`)"))
    }

    fn disposition(&mut self, start: Span) -> PResult<DispositionDecl> {
        let name = self.ident()?;
        self.expect_kw("on")?;
        let bearer = self.name()?;
        self.expect_kw("when")?;
        let trigger = self.pattern()?;
        self.expect_kw("realize")?;
        let realization = self.name()?;
        Ok(DispositionDecl { name, bearer, trigger, realization, span: start.to(self.last) })
    }

    fn world(&mut self, start: Span) -> PResult<WorldDecl> {
        let name = self.ident()?;
        self.expect(Tok::LBrace)?;
        let mut items = Vec::new();
        while !self.eat(Tok::RBrace) {
            let item_start = self.peek().span;
            if self.eat_kw("spawn") {
                let name = self.ident()?;
                self.expect(Tok::Colon)?;
                let kind = self.name()?;
                let mut bindings = Vec::new();
                while matches!(self.peek().tok, Tok::Ident(_)) && *self.peek_at(1) == Tok::Eq {
                    let key = self.ident()?;
                    self.expect(Tok::Eq)?;
                    bindings.push((key, self.term()?));
                }
                items.push(WorldItem::Spawn { name, kind, bindings, span: item_start.to(self.last) });
            } else if self.eat_kw("assert") {
                items.push(WorldItem::Assert(self.pattern()?));
            } else if self.eat_kw("rule") {
                items.push(WorldItem::Rule(self.rule(item_start)?));
            } else {
                return Err(self.error_here("`spawn`, `assert`, `rule` or `}`"));
            }
        }
        Ok(WorldDecl { name, items, span: start.to(self.last) })
    }

    fn rule(&mut self, start: Span) -> PResult<RuleAst> {
        let name = self.ident()?;
        self.expect(Tok::LParen)?;
        let mut params = Vec::new();
        loop {
            let v = self.var()?;
            self.expect(Tok::Colon)?;
            params.push((v, self.name()?));
            if !self.eat(Tok::Comma) {
                break;
            }
        }
        self.expect(Tok::RParen)?;
        let mut when = Vec::new();
        if self.eat_kw("when") {
            when.push(self.guard()?);
            while self.eat_kw("and") {
                when.push(self.guard()?);
            }
        }
        self.expect_kw("do")?;
        let transitional = self.name()?;
        self.expect(Tok::LParen)?;
        let bearer = self.var()?;
        self.expect(Tok::RParen)?;
        Ok(RuleAst { name, params, when, transitional, bearer, span: start.to(self.last) })
    }

    fn claim(&mut self, start: Span) -> PResult<ClaimDecl> {
        let name = self.ident()?;
        let statement = self.string()?;
        let mut evidence = Vec::new();
        while self.is_kw("evidence") {
            let ev_start = self.bump().span;
            let artifact = match self.peek().tok.clone() {
                Tok::Str(s) => {
                    self.bump();
                    ArtifactAst::Document(s)
                }
                _ => ArtifactAst::Instance(self.ident()?),
            };
            let note = self.string()?;
            let validated = self.eat_kw("validated");
            evidence.push(EvidenceAst { artifact, note, validated, span: ev_start.to(self.last) });
        }
        Ok(ClaimDecl { name, statement, evidence, span: start.to(self.last) })
    }

    fn process(&mut self, start: Span) -> PResult<ProcessDecl> {
        let name = self.ident()?;
        self.expect(Tok::LBrace)?;
        let mut participants = Vec::new();
        let mut location = None;
        while !self.eat(Tok::RBrace) {
            if self.eat_kw("participant") {
                let kind = self.name()?;
                let role = if self.eat_kw("as") { Some(self.name()?) } else { None };
                participants.push((kind, role));
            } else if self.eat_kw("at") {
                location = Some(self.name()?);
            } else {
                return Err(self.error_here("`participant`, `at` or `}`"));
            }
        }
        Ok(ProcessDecl { name, participants, location, span: start.to(self.last) })
    }

    fn role(&mut self, start: Span) -> PResult<RoleDecl> {
        let name = self.ident()?;
        self.expect_kw("on")?;
        let bearer = self.name()?;
        let context = if self.eat_kw("in") { Some(self.name()?) } else { None };
        Ok(RoleDecl { name, bearer, context, span: start.to(self.last) })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse_ok(src: &str) -> SourceModule {
        let (m, d) = parse_module("t", src);
        assert!(d.is_empty(), "{d:?}");
        m
    }

    #[test]
    fn quality_with_three_determinants() {
        let m = parse_ok("quality color { green, yellow, red }");
        let Decl::Quality(q) = &m.decls[0] else { panic!() };
        let names: Vec<_> = q.determinants.iter().map(|d| d.text.as_str()).collect();
        assert_eq!(names, ["green", "yellow", "red"]);
        assert_eq!(q.span, Span::new(1, 1, 36));
    }

    #[test]
    fn empty_file_is_empty_module() {
        let (m, d) = parse_module("empty", "");
        assert!(m.decls.is_empty() && m.imports.is_empty() && d.is_empty());
    }

    #[test]
    fn missing_object_name_reports_col_8_and_resumes() {
        let (m, d) = parse_module("t", "object { }\nquality color { red }");
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].span.line, 1);
        assert_eq!(d[0].span.col, 8);
        assert_eq!(d[0].code, "syntax");
        assert_eq!(m.decls.len(), 1, "parsing resumed at the next declaration");
    }

    #[test]
    fn one_typo_does_not_hide_later_errors() {
        let src = "object A { quality q : c requird }\nobject B { part p Gear }\nquality ok { x }";
        let (m, d) = parse_module("t", src);
        assert_eq!(d.len(), 2, "{d:?}");
        assert_eq!(d[0].span.line, 1);
        assert_eq!(d[1].span.line, 2);
        assert_eq!(m.decls.len(), 1);
    }

    #[test]
    fn transitional_chain_and_world() {
        let m = parse_ok(
            r#"
            transitional turn_green on TrafficLight {
                require color(?self, red)
                delete color(?self, red)
                create color(?self, green)
            }
            chain procedure mix(stick: InkStick) {
                while not consistency(?ink, desired) { intervention do rub(stick) }
                if wet(?s, yes) { do dry } else { do wet }
            }
            world demo {
                spawn light1 : TrafficLight color = red
                assert located_in(light1, corner)
                rule blink(?l: TrafficLight) when color(?l, red) and not broken(?l, yes) do turn_green(?l)
            }
            "#,
        );
        assert_eq!(m.decls.len(), 3);
        let Decl::Chain(c) = &m.decls[1] else { panic!() };
        assert_eq!(c.kind, ChainKind::Procedure);
        assert!(matches!(&c.body[0], StepAst::While { cond, .. } if cond.negated));
        let Decl::World(w) = &m.decls[2] else { panic!() };
        assert_eq!(w.items.len(), 3);
        let WorldItem::Rule(r) = &w.items[2] else { panic!() };
        assert_eq!(r.when.len(), 2);
    }

    #[test]
    fn qualified_names() {
        let m = parse_ok("object Jar : pottery.Vessel { }");
        let Decl::Object(o) = &m.decls[0] else { panic!() };
        let p = o.parent.as_ref().unwrap();
        assert_eq!((p.module.as_deref(), p.text.as_str()), (Some("pottery"), "Vessel"));
    }

    #[test]
    fn stray_tokens_at_top_level() {
        let (m, d) = parse_module("t", "@@ quality q { a }");
        assert_eq!(d.len(), 1, "recovery skips the whole run of stray tokens");
        assert_eq!(m.decls.len(), 1);
    }
}
