use indexmap::IndexMap;
use std::collections::HashMap;
use thiserror::Error;

use super::lexer::{tokenize, Pos, Tok};
use super::{Constraint, EventDecl, Literal, Membership, OrderExpr, Param, PredicateRef, RuleSpec};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}, column {column}: {message}")]
pub struct RuleParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

const SECTIONS: &[&str] = &[
    "SPEC",
    "OBJECTS",
    "EVENTS",
    "ORDER",
    "CONSTRAINTS",
    "REQUIRES",
    "ENSURES",
];
const UNSUPPORTED_SECTIONS: &[&str] = &["FORBIDDEN", "NEGATES"];

struct Parser {
    toks: Vec<(Tok, Pos)>,
    at: usize,
    end: Pos,
    /// Where each name was declared or first used, for error reporting.
    positions: HashMap<String, Pos>,
    order_refs: Vec<(String, Pos)>,
}

type PResult<T> = Result<T, RuleParseError>;

fn error_at<T>(pos: Pos, message: impl Into<String>) -> PResult<T> {
    Err(RuleParseError {
        line: pos.line,
        column: pos.column,
        message: message.into(),
    })
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|(t, _)| t)
    }

    fn peek_at(&self, offset: usize) -> Option<&Tok> {
        self.toks.get(self.at + offset).map(|(t, _)| t)
    }

    fn pos(&self) -> Pos {
        self.toks.get(self.at).map(|(_, p)| *p).unwrap_or(self.end)
    }

    fn bump(&mut self) -> Option<(Tok, Pos)> {
        let t = self.toks.get(self.at).cloned();
        self.at += 1;
        t
    }

    fn unexpected<T>(&self, wanted: &str) -> PResult<T> {
        match self.peek() {
            Some(t) => error_at(self.pos(), format!("expected {wanted}, found {}", t.describe())),
            None => error_at(self.end, format!("expected {wanted}, found end of input")),
        }
    }

    fn expect(&mut self, tok: Tok, wanted: &str) -> PResult<Pos> {
        if self.peek() == Some(&tok) {
            Ok(self.bump().expect("peeked").1)
        } else {
            self.unexpected(wanted)
        }
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == Some(tok) {
            self.at += 1;
            true
        } else {
            false
        }
    }

    fn ident(&mut self, wanted: &str) -> PResult<(String, Pos)> {
        match self.peek() {
            Some(Tok::Ident(s)) if !is_section(s) => {
                let s = s.clone();
                let pos = self.bump().expect("peeked").1;
                Ok((s, pos))
            }
            _ => self.unexpected(wanted),
        }
    }

    fn at_section_end(&self) -> bool {
        match self.peek() {
            None => true,
            Some(Tok::Ident(s)) => is_section(s),
            _ => false,
        }
    }

    fn literal(&mut self) -> PResult<Literal> {
        match self.peek() {
            Some(Tok::Str(s)) => {
                let l = Literal::Str(s.clone());
                self.at += 1;
                Ok(l)
            }
            Some(Tok::Int(n)) => {
                let l = Literal::Int(*n);
                self.at += 1;
                Ok(l)
            }
            _ => self.unexpected("a string or integer literal"),
        }
    }

    fn objects(&mut self, objects: &mut IndexMap<String, String>) -> PResult<()> {
        while !self.at_section_end() {
            let (mut ty, _) = self.ident("an object type")?;
            while self.peek() == Some(&Tok::LBracket) && self.peek_at(1) == Some(&Tok::RBracket) {
                self.at += 2;
                ty.push_str("[]");
            }
            let (name, pos) = self.ident("an object name")?;
            self.expect(Tok::Semi, "';'")?;
            if objects.insert(name.clone(), ty).is_some() {
                return error_at(pos, format!("object {name:?} declared twice"));
            }
            self.positions.insert(name, pos);
        }
        Ok(())
    }

    fn events(
        &mut self,
        events: &mut IndexMap<String, EventDecl>,
        aliases: &mut IndexMap<String, Vec<String>>,
    ) -> PResult<()> {
        while !self.at_section_end() {
            let (label, pos) = self.ident("an event label")?;
            if events.contains_key(&label) || aliases.contains_key(&label) {
                return error_at(pos, format!("label {label:?} defined twice"));
            }
            self.positions.insert(label.clone(), pos);
            if self.eat(&Tok::Define) {
                let mut members = Vec::new();
                loop {
                    let (m, mpos) = self.ident("an event label")?;
                    self.positions.entry(format!("{label}->{m}")).or_insert(mpos);
                    members.push(m);
                    if !self.eat(&Tok::Pipe) {
                        break;
                    }
                }
                self.expect(Tok::Semi, "';'")?;
                aliases.insert(label, members);
                continue;
            }
            self.expect(Tok::Colon, "':' or ':='")?;
            let binds = if matches!(self.peek(), Some(Tok::Ident(_))) && self.peek_at(1) == Some(&Tok::Eq) {
                let (b, bpos) = self.ident("an object name")?;
                self.at += 1;
                self.positions.entry(format!("{label}.binds")).or_insert(bpos);
                Some(b)
            } else {
                None
            };
            let (method_name, _) = self.ident("a method name")?;
            self.expect(Tok::LParen, "'('")?;
            let mut params = Vec::new();
            if !self.eat(&Tok::RParen) {
                loop {
                    let p = match self.peek() {
                        Some(Tok::Ident(s)) if s == "_" => {
                            self.at += 1;
                            Param::Wildcard
                        }
                        Some(Tok::Ident(_)) => {
                            let (o, opos) = self.ident("a parameter")?;
                            self.positions.entry(format!("{label}.{o}")).or_insert(opos);
                            Param::Object(o)
                        }
                        _ => Param::Literal(self.literal()?),
                    };
                    params.push(p);
                    if self.eat(&Tok::RParen) {
                        break;
                    }
                    self.expect(Tok::Comma, "',' or ')'")?;
                }
            }
            self.expect(Tok::Semi, "';'")?;
            events.insert(
                label.clone(),
                EventDecl {
                    label,
                    method_name,
                    params,
                    binds,
                },
            );
        }
        Ok(())
    }

    fn order_alt(&mut self) -> PResult<OrderExpr> {
        let mut items = vec![self.order_seq()?];
        while self.eat(&Tok::Pipe) {
            items.push(self.order_seq()?);
        }
        Ok(if items.len() == 1 { items.pop().expect("one") } else { OrderExpr::Alt(items) })
    }

    fn order_seq(&mut self) -> PResult<OrderExpr> {
        let mut items = vec![self.order_postfix()?];
        while self.eat(&Tok::Comma) {
            items.push(self.order_postfix()?);
        }
        Ok(if items.len() == 1 { items.pop().expect("one") } else { OrderExpr::Seq(items) })
    }

    fn order_postfix(&mut self) -> PResult<OrderExpr> {
        let mut e = self.order_primary()?;
        loop {
            e = match self.peek() {
                Some(Tok::Question) => OrderExpr::Opt(Box::new(e)),
                Some(Tok::Star) => OrderExpr::Star(Box::new(e)),
                Some(Tok::Plus) => OrderExpr::Plus(Box::new(e)),
                _ => return Ok(e),
            };
            self.at += 1;
        }
    }

    fn order_primary(&mut self) -> PResult<OrderExpr> {
        if self.eat(&Tok::LParen) {
            let e = self.order_alt()?;
            self.expect(Tok::RParen, "')'")?;
            return Ok(e);
        }
        let (name, pos) = self.ident("an event label, alias or '('")?;
        self.order_refs.push((name.clone(), pos));
        Ok(OrderExpr::Atom(name))
    }

    fn membership(&mut self) -> PResult<(Membership, Pos)> {
        let (object, pos) = self.ident("an object name")?;
        match self.bump() {
            Some((Tok::Ident(kw), _)) if kw == "in" => {}
            _ => {
                self.at -= 1;
                return self.unexpected("'in'");
            }
        }
        self.expect(Tok::LBrace, "'{'")?;
        let mut allowed = Vec::new();
        loop {
            allowed.push(self.literal()?);
            if self.eat(&Tok::RBrace) {
                break;
            }
            self.expect(Tok::Comma, "',' or '}'")?;
        }
        Ok((Membership { object, allowed }, pos))
    }

    fn constraints(&mut self, out: &mut Vec<(Constraint, Vec<Pos>)>) -> PResult<()> {
        while !self.at_section_end() {
            let (antecedent, apos) = self.membership()?;
            let c = if self.eat(&Tok::Implies) {
                let (consequent, cpos) = self.membership()?;
                (Constraint::Implication { antecedent, consequent }, vec![apos, cpos])
            } else {
                (Constraint::Membership(antecedent), vec![apos])
            };
            self.expect(Tok::Semi, "';'")?;
            out.push(c);
        }
        Ok(())
    }

    fn predicates(&mut self, out: &mut Vec<PredicateRef>) -> PResult<()> {
        while !self.at_section_end() {
            let (name, _) = self.ident("a predicate name")?;
            self.expect(Tok::LBracket, "'['")?;
            let mut args = Vec::new();
            if !self.eat(&Tok::RBracket) {
                loop {
                    let arg = match self.bump() {
                        Some((Tok::Ident(s), _)) => s,
                        Some((Tok::Str(s), _)) => format!("{:?}", s),
                        Some((Tok::Int(n), _)) => n.to_string(),
                        _ => {
                            self.at -= 1;
                            return self.unexpected("a predicate argument");
                        }
                    };
                    args.push(arg);
                    if self.eat(&Tok::RBracket) {
                        break;
                    }
                    self.expect(Tok::Comma, "',' or ']'")?;
                }
            }
            // `after <label>` qualifiers are accepted and dropped.
            if matches!(self.peek(), Some(Tok::Ident(s)) if s == "after") {
                self.at += 1;
                self.ident("an event label")?;
            }
            self.expect(Tok::Semi, "';'")?;
            out.push(PredicateRef { name, args });
        }
        Ok(())
    }
}

fn is_section(word: &str) -> bool {
    SECTIONS.contains(&word) || UNSUPPORTED_SECTIONS.contains(&word)
}

pub fn parse_rule(text: &str) -> Result<RuleSpec, RuleParseError> {
    let toks = tokenize(text)?;
    let end = Pos {
        line: text.lines().count().max(1),
        column: text.lines().last().map_or(1, |l| l.chars().count() + 1),
    };
    let mut p = Parser {
        toks,
        at: 0,
        end,
        positions: HashMap::new(),
        order_refs: Vec::new(),
    };

    match p.bump() {
        Some((Tok::Ident(s), _)) if s == "SPEC" => {}
        _ => return error_at(Pos { line: 1, column: 1 }, "rule must start with SPEC"),
    }
    let (class_name, _) = p.ident("a class name after SPEC")?;

    let mut objects = IndexMap::new();
    let mut events = IndexMap::new();
    let mut aliases = IndexMap::new();
    let mut order = None;
    let mut constraints = Vec::new();
    let mut requires = Vec::new();
    let mut ensures = Vec::new();
    let mut seen: Vec<String> = Vec::new();

    while let Some((tok, pos)) = p.bump() {
        let Tok::Ident(section) = tok else {
            p.at -= 1;
            return p.unexpected("a section keyword");
        };
        if !is_section(&section) || section == "SPEC" {
            p.at -= 1;
            return p.unexpected("a section keyword");
        }
        if UNSUPPORTED_SECTIONS.contains(&section.as_str()) {
            return error_at(pos, format!("section {section} is not supported"));
        }
        if seen.contains(&section) {
            return error_at(pos, format!("section {section} appears twice"));
        }
        seen.push(section.clone());
        match section.as_str() {
            "OBJECTS" => p.objects(&mut objects)?,
            "EVENTS" => p.events(&mut events, &mut aliases)?,
            "ORDER" => {
                order = Some(p.order_alt()?);
                p.eat(&Tok::Semi);
                if !p.at_section_end() {
                    return p.unexpected("end of ORDER");
                }
            }
            "CONSTRAINTS" => p.constraints(&mut constraints)?,
            "REQUIRES" => p.predicates(&mut requires)?,
            "ENSURES" => p.predicates(&mut ensures)?,
            _ => unreachable!("checked against SECTIONS"),
        }
    }

    for required in ["OBJECTS", "EVENTS", "ORDER"] {
        if !seen.iter().any(|s| s == required) {
            return error_at(p.end, format!("missing {required} section"));
        }
    }
    let order = order.expect("ORDER section seen");

    let pos_of = |key: &str| p.positions.get(key).copied().unwrap_or(p.end);

    for (label, ev) in &events {
        for param in &ev.params {
            if let Param::Object(o) = param {
                if o != "this" && !objects.contains_key(o) {
                    return error_at(pos_of(&format!("{label}.{o}")), format!("undeclared object {o:?}"));
                }
            }
        }
        if let Some(b) = &ev.binds {
            if !objects.contains_key(b) {
                return error_at(pos_of(&format!("{label}.binds")), format!("undeclared object {b:?}"));
            }
        }
    }
    for (alias, members) in &aliases {
        for m in members {
            if !events.contains_key(m) && !aliases.contains_key(m) {
                return error_at(pos_of(&format!("{alias}->{m}")), format!("unknown label {m:?} in alias {alias}"));
            }
        }
    }
    if let Some(alias) = alias_cycle(&aliases) {
        return error_at(pos_of(&alias), format!("alias {alias:?} is defined in terms of itself"));
    }
    for (name, pos) in &p.order_refs {
        if !events.contains_key(name) && !aliases.contains_key(name) {
            return error_at(*pos, format!("ORDER refers to unknown label {name:?}"));
        }
    }
    let mut checked = Vec::with_capacity(constraints.len());
    for (c, positions) in constraints {
        for (object, pos) in c.objects().into_iter().zip(positions) {
            if !objects.contains_key(object) {
                return error_at(pos, format!("constraint on undeclared object {object:?}"));
            }
        }
        checked.push(c);
    }

    Ok(RuleSpec {
        class_name,
        objects,
        events,
        aliases,
        order,
        constraints: checked,
        requires,
        ensures,
    })
}

/// The first alias that can reach itself, if any.
fn alias_cycle(aliases: &IndexMap<String, Vec<String>>) -> Option<String> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        Open,
        Done,
    }
    fn visit(
        name: &str,
        aliases: &IndexMap<String, Vec<String>>,
        marks: &mut HashMap<String, Mark>,
    ) -> bool {
        match marks.get(name) {
            Some(Mark::Open) => return true,
            Some(Mark::Done) => return false,
            None => {}
        }
        let Some(members) = aliases.get(name) else {
            return false;
        };
        marks.insert(name.to_string(), Mark::Open);
        for m in members {
            if visit(m, aliases, marks) {
                return true;
            }
        }
        marks.insert(name.to_string(), Mark::Done);
        false
    }
    let mut marks = HashMap::new();
    aliases
        .keys()
        .find(|a| visit(a, aliases, &mut marks))
        .cloned()
}
