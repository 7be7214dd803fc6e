//! Recursive-descent parser for the `.pta` format.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Signed, Zero};

use super::lex::{lex, Diagnostic, Tok, Token};
use super::ModelSource;
use crate::constraint::Relation;
use crate::pta::{
    ClockAtom, Edge, Guard, Location, ParamAtom, ParamExpr, ParamRole, Pta,
};
use crate::rational::{parse_rat, Rat};

const RESERVED: &[&str] = &[
    "pta", "clock", "param", "bool", "sync", "automaton", "init", "private", "loc", "invariant",
    "when", "do", "goto", "true", "false", "shared", "input",
];

pub fn parse(text: &str) -> Result<ModelSource, Diagnostic> {
    let tokens = lex(text)?;
    Parser {
        tokens,
        pos: 0,
    }
    .model()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum SymKind {
    Clock,
    Param,
    Bool,
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

/// A linear expression accumulated during parsing, with symbols resolved
/// against the global declaration table.
#[derive(Default, Clone)]
struct ExprAcc {
    clock_coeffs: BTreeMap<usize, Rat>,
    param_coeffs: BTreeMap<usize, Rat>,
    constant: Rat,
}

impl ExprAcc {
    fn add_clock(&mut self, id: usize, coeff: Rat) {
        let e = self.clock_coeffs.entry(id).or_insert_with(Rat::zero);
        *e += coeff;
        if e.is_zero() {
            self.clock_coeffs.remove(&id);
        }
    }
    fn add_param(&mut self, id: usize, coeff: Rat) {
        let e = self.param_coeffs.entry(id).or_insert_with(Rat::zero);
        *e += coeff;
        if e.is_zero() {
            self.param_coeffs.remove(&id);
        }
    }
    fn subtract(mut self, other: &ExprAcc) -> ExprAcc {
        for (id, c) in &other.clock_coeffs {
            self.add_clock(*id, -c.clone());
        }
        for (id, c) in &other.param_coeffs {
            self.add_param(*id, -c.clone());
        }
        self.constant -= &other.constant;
        self
    }
}

enum AtomAst {
    BoolTest { var: usize, expected: bool, line: usize, col: usize },
    Cmp { diff: ExprAcc, rel: Relation, line: usize, col: usize },
}

struct EdgeAst {
    private: bool,
    guard: Vec<AtomAst>,
    action: Option<String>,
    resets: BTreeSet<usize>,
    bool_updates: Vec<(usize, bool)>,
    target: (String, usize, usize),
}

struct LocationAst {
    name: String,
    line: usize,
    col: usize,
    init: bool,
    private: bool,
    invariant: Vec<AtomAst>,
    edges: Vec<EdgeAst>,
}

struct AutomatonAst {
    name: String,
    locations: Vec<LocationAst>,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn here(&self) -> (usize, usize) {
        self.tokens
            .get(self.pos)
            .map(|t| (t.line, t.col))
            .or_else(|| self.tokens.last().map(|t| (t.line, t.col + 1)))
            .unwrap_or((1, 1))
    }

    fn fail<T>(&self, message: impl Into<String>) -> Result<T, Diagnostic> {
        let (line, col) = self.here();
        Err(Diagnostic {
            line,
            col,
            message: message.into(),
        })
    }

    fn bump(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek().map(|t| &t.tok) == Some(tok) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: Tok) -> Result<(), Diagnostic> {
        if self.eat(&tok) {
            Ok(())
        } else {
            match self.peek() {
                Some(t) => self.fail(format!("expected {tok}, found {}", t.tok)),
                None => self.fail(format!("expected {tok}, found end of input")),
            }
        }
    }

    fn eat_keyword(&mut self, word: &str) -> bool {
        matches!(self.peek(), Some(Token { tok: Tok::Ident(s), .. }) if s == word)
            && self.bump().is_some()
    }

    fn expect_keyword(&mut self, word: &str) -> Result<(), Diagnostic> {
        if self.eat_keyword(word) {
            Ok(())
        } else {
            match self.peek() {
                Some(t) => self.fail(format!("expected `{word}`, found {}", t.tok)),
                None => self.fail(format!("expected `{word}`, found end of input")),
            }
        }
    }

    fn ident(&mut self, what: &str) -> Result<(String, usize, usize), Diagnostic> {
        match self.peek().cloned() {
            Some(Token {
                tok: Tok::Ident(s),
                line,
                col,
            }) => {
                self.pos += 1;
                Ok((s, line, col))
            }
            Some(t) => self.fail(format!("expected {what}, found {}", t.tok)),
            None => self.fail(format!("expected {what}, found end of input")),
        }
    }

    fn name_ident(&mut self, what: &str) -> Result<(String, usize, usize), Diagnostic> {
        let (name, line, col) = self.ident(what)?;
        if RESERVED.contains(&name.as_str()) {
            return Err(Diagnostic {
                line,
                col,
                message: format!("`{name}` is a reserved word"),
            });
        }
        Ok((name, line, col))
    }

    fn model(mut self) -> Result<ModelSource, Diagnostic> {
        self.expect_keyword("pta")?;
        let (name, ..) = self.name_ident("model name")?;

        let mut symbols: BTreeMap<String, (SymKind, usize)> = BTreeMap::new();
        let mut clocks: Vec<String> = Vec::new();
        let mut params: Vec<(String, ParamRole)> = Vec::new();
        let mut bools: Vec<(String, bool)> = Vec::new();
        let mut sync: Vec<String> = Vec::new();

        loop {
            if self.eat_keyword("clock") {
                loop {
                    let (n, line, col) = self.name_ident("clock name")?;
                    if symbols.contains_key(&n) {
                        return Err(Diagnostic {
                            line,
                            col,
                            message: format!("duplicate declaration of `{n}`"),
                        });
                    }
                    symbols.insert(n.clone(), (SymKind::Clock, clocks.len()));
                    clocks.push(n);
                    if !self.eat(&Tok::Comma) {
                        break;
                    }
                }
                self.expect(Tok::Semi)?;
            } else if self.eat_keyword("param") {
                loop {
                    let (n, line, col) = self.name_ident("parameter name")?;
                    if symbols.contains_key(&n) {
                        return Err(Diagnostic {
                            line,
                            col,
                            message: format!("duplicate declaration of `{n}`"),
                        });
                    }
                    let role = if self.eat(&Tok::Colon) {
                        if self.eat_keyword("shared") {
                            ParamRole::Shared
                        } else if self.eat_keyword("input") {
                            ParamRole::Input
                        } else {
                            return self.fail("expected `shared` or `input`");
                        }
                    } else {
                        ParamRole::Shared
                    };
                    symbols.insert(n.clone(), (SymKind::Param, params.len()));
                    params.push((n, role));
                    if !self.eat(&Tok::Comma) {
                        break;
                    }
                }
                self.expect(Tok::Semi)?;
            } else if self.eat_keyword("bool") {
                let (n, line, col) = self.name_ident("boolean name")?;
                if symbols.contains_key(&n) {
                    return Err(Diagnostic {
                        line,
                        col,
                        message: format!("duplicate declaration of `{n}`"),
                    });
                }
                self.expect(Tok::EqRel)?;
                let init = self.bool_literal()?;
                symbols.insert(n.clone(), (SymKind::Bool, bools.len()));
                bools.push((n, init));
                self.expect(Tok::Semi)?;
            } else if self.eat_keyword("sync") {
                loop {
                    let (n, ..) = self.name_ident("action name")?;
                    if !sync.contains(&n) {
                        sync.push(n);
                    }
                    if !self.eat(&Tok::Comma) {
                        break;
                    }
                }
                self.expect(Tok::Semi)?;
            } else {
                break;
            }
        }

        let mut automata = Vec::new();
        while self.peek().is_some() {
            automata.push(self.automaton(&symbols)?);
        }
        if automata.is_empty() {
            return self.fail("expected at least one automaton");
        }
        let mut seen = BTreeSet::new();
        for a in &automata {
            if !seen.insert(a.name.clone()) {
                return self.fail(format!("duplicate automaton `{}`", a.name));
            }
        }

        let only_automaton = automata.len() == 1;
        let components: Vec<Pta> = automata
            .iter()
            .map(|ast| resolve(ast, only_automaton, &clocks, &params, &bools))
            .collect::<Result<_, _>>()?;

        Ok(ModelSource {
            name,
            sync: sync.into_iter().collect(),
            components,
        })
    }

    fn bool_literal(&mut self) -> Result<bool, Diagnostic> {
        if self.eat_keyword("true") {
            Ok(true)
        } else if self.eat_keyword("false") {
            Ok(false)
        } else {
            self.fail("expected `true` or `false`")
        }
    }

    fn automaton(
        &mut self,
        symbols: &BTreeMap<String, (SymKind, usize)>,
    ) -> Result<AutomatonAst, Diagnostic> {
        self.expect_keyword("automaton")?;
        let (name, ..) = self.name_ident("automaton name")?;
        self.expect(Tok::LBrace)?;
        let mut locations: Vec<LocationAst> = Vec::new();
        while !self.eat(&Tok::RBrace) {
            let init = self.eat_keyword("init");
            let private = self.eat_keyword("private");
            self.expect_keyword("loc")?;
            let (loc_name, line, col) = self.name_ident("location name")?;
            if locations.iter().any(|l| l.name == loc_name) {
                return Err(Diagnostic {
                    line,
                    col,
                    message: format!("duplicate location `{loc_name}`"),
                });
            }
            let invariant = if self.eat(&Tok::Colon) {
                self.expect_keyword("invariant")?;
                self.guard(symbols)?
            } else {
                Vec::new()
            };
            self.expect(Tok::LBrace)?;
            let mut edges = Vec::new();
            while !self.eat(&Tok::RBrace) {
                edges.push(self.edge(symbols)?);
            }
            locations.push(LocationAst {
                name: loc_name,
                line,
                col,
                init,
                private,
                invariant,
                edges,
            });
        }
        Ok(AutomatonAst { name, locations })
    }

    fn edge(
        &mut self,
        symbols: &BTreeMap<String, (SymKind, usize)>,
    ) -> Result<EdgeAst, Diagnostic> {
        let private = self.eat_keyword("private");
        self.expect_keyword("when")?;
        let guard = self.guard(symbols)?;
        let action = if self.eat_keyword("sync") {
            Some(self.name_ident("action name")?.0)
        } else {
            None
        };
        let mut resets = BTreeSet::new();
        let mut bool_updates = Vec::new();
        if self.eat_keyword("do") {
            loop {
                let (n, line, col) = self.ident("update target")?;
                match symbols.get(&n) {
                    Some((SymKind::Clock, id)) => {
                        self.expect(Tok::Assign)?;
                        let (value, vline, vcol) = self.number()?;
                        if !value.is_zero() {
                            return Err(Diagnostic {
                                line: vline,
                                col: vcol,
                                message: "clocks can only be reset to 0".to_string(),
                            });
                        }
                        resets.insert(*id);
                    }
                    Some((SymKind::Bool, id)) => {
                        self.expect(Tok::Assign)?;
                        let value = self.bool_literal()?;
                        bool_updates.push((*id, value));
                    }
                    Some((SymKind::Param, _)) => {
                        return Err(Diagnostic {
                            line,
                            col,
                            message: format!("parameter `{n}` cannot be assigned"),
                        });
                    }
                    None => {
                        return Err(Diagnostic {
                            line,
                            col,
                            message: format!("undeclared identifier `{n}`"),
                        });
                    }
                }
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
        }
        self.expect_keyword("goto")?;
        let target = self.name_ident("target location")?;
        self.expect(Tok::Semi)?;
        Ok(EdgeAst {
            private,
            guard,
            action,
            resets,
            bool_updates,
            target,
        })
    }

    fn number(&mut self) -> Result<(Rat, usize, usize), Diagnostic> {
        match self.peek().cloned() {
            Some(Token {
                tok: Tok::Number(text),
                line,
                col,
            }) => {
                self.pos += 1;
                match parse_rat(&text) {
                    Some(value) => Ok((value, line, col)),
                    None => Err(Diagnostic {
                        line,
                        col,
                        message: format!("invalid number `{text}`"),
                    }),
                }
            }
            Some(t) => self.fail(format!("expected number, found {}", t.tok)),
            None => self.fail("expected number, found end of input"),
        }
    }

    fn guard(
        &mut self,
        symbols: &BTreeMap<String, (SymKind, usize)>,
    ) -> Result<Vec<AtomAst>, Diagnostic> {
        let mut atoms = Vec::new();
        loop {
            if self.eat_keyword("true") {
                // contributes nothing
            } else if self.eat(&Tok::Bang) {
                let (name, line, col) = self.ident("boolean variable")?;
                let var = self.lookup_bool(symbols, &name, line, col)?;
                atoms.push(AtomAst::BoolTest {
                    var,
                    expected: false,
                    line,
                    col,
                });
            } else if let Some(var) = self.bare_bool_test(symbols) {
                let (line, col) = self.here();
                self.pos += 1;
                atoms.push(AtomAst::BoolTest {
                    var,
                    expected: true,
                    line,
                    col,
                });
            } else {
                let (line, col) = self.here();
                let lhs = self.linexpr(symbols)?;
                let Some(rel) = self.relation() else {
                    return Err(Diagnostic {
                        line,
                        col,
                        message: "expected comparison operator".to_string(),
                    });
                };
                let rhs = self.linexpr(symbols)?;
                atoms.push(AtomAst::Cmp {
                    diff: lhs.subtract(&rhs),
                    rel,
                    line,
                    col,
                });
            }
            if !self.eat(&Tok::AndAnd) {
                break;
            }
        }
        Ok(atoms)
    }

    /// A declared boolean used on its own (not as part of an arithmetic
    /// comparison) is a positive test.
    fn bare_bool_test(&self, symbols: &BTreeMap<String, (SymKind, usize)>) -> Option<usize> {
        let Some(Token {
            tok: Tok::Ident(name),
            ..
        }) = self.peek()
        else {
            return None;
        };
        let (SymKind::Bool, id) = symbols.get(name)? else {
            return None;
        };
        match self.tokens.get(self.pos + 1).map(|t| &t.tok) {
            Some(
                Tok::Star
                | Tok::Plus
                | Tok::Minus
                | Tok::Lt
                | Tok::Le
                | Tok::EqRel
                | Tok::Ge
                | Tok::Gt,
            ) => None,
            _ => Some(*id),
        }
    }

    fn relation(&mut self) -> Option<Relation> {
        let rel = match self.peek().map(|t| &t.tok) {
            Some(Tok::Lt) => Relation::Lt,
            Some(Tok::Le) => Relation::Le,
            Some(Tok::EqRel) => Relation::Eq,
            Some(Tok::Ge) => Relation::Ge,
            Some(Tok::Gt) => Relation::Gt,
            _ => return None,
        };
        self.pos += 1;
        Some(rel)
    }

    fn lookup_bool(
        &self,
        symbols: &BTreeMap<String, (SymKind, usize)>,
        name: &str,
        line: usize,
        col: usize,
    ) -> Result<usize, Diagnostic> {
        match symbols.get(name) {
            Some((SymKind::Bool, id)) => Ok(*id),
            Some(_) => Err(Diagnostic {
                line,
                col,
                message: format!("`{name}` is not a boolean variable"),
            }),
            None => Err(Diagnostic {
                line,
                col,
                message: format!("undeclared identifier `{name}`"),
            }),
        }
    }

    fn linexpr(
        &mut self,
        symbols: &BTreeMap<String, (SymKind, usize)>,
    ) -> Result<ExprAcc, Diagnostic> {
        let mut acc = ExprAcc::default();
        let mut negate = self.eat(&Tok::Minus);
        loop {
            self.term(symbols, &mut acc, negate)?;
            if self.eat(&Tok::Plus) {
                negate = false;
            } else if self.eat(&Tok::Minus) {
                negate = true;
            } else {
                break;
            }
        }
        Ok(acc)
    }

    fn term(
        &mut self,
        symbols: &BTreeMap<String, (SymKind, usize)>,
        acc: &mut ExprAcc,
        negate: bool,
    ) -> Result<(), Diagnostic> {
        let sign = if negate { -Rat::one() } else { Rat::one() };
        match self.peek().cloned() {
            Some(Token {
                tok: Tok::Number(_),
                ..
            }) => {
                let (value, ..) = self.number()?;
                if self.eat(&Tok::Star) {
                    let (name, line, col) = self.ident("variable")?;
                    self.add_symbol(symbols, acc, &name, sign * value, line, col)?;
                } else {
                    acc.constant += sign * value;
                }
                Ok(())
            }
            Some(Token {
                tok: Tok::Ident(name),
                line,
                col,
            }) => {
                self.pos += 1;
                if self.eat(&Tok::Star) {
                    let (value, ..) = self.number()?;
                    self.add_symbol(symbols, acc, &name, sign * value, line, col)?;
                } else {
                    self.add_symbol(symbols, acc, &name, sign, line, col)?;
                }
                Ok(())
            }
            Some(t) => self.fail(format!("expected term, found {}", t.tok)),
            None => self.fail("expected term, found end of input"),
        }
    }

    fn add_symbol(
        &mut self,
        symbols: &BTreeMap<String, (SymKind, usize)>,
        acc: &mut ExprAcc,
        name: &str,
        coeff: Rat,
        line: usize,
        col: usize,
    ) -> Result<(), Diagnostic> {
        match symbols.get(name) {
            Some((SymKind::Clock, id)) => {
                acc.add_clock(*id, coeff);
                Ok(())
            }
            Some((SymKind::Param, id)) => {
                acc.add_param(*id, coeff);
                Ok(())
            }
            Some((SymKind::Bool, _)) => Err(Diagnostic {
                line,
                col,
                message: format!("boolean `{name}` cannot appear in an expression"),
            }),
            None => Err(Diagnostic {
                line,
                col,
                message: format!("undeclared identifier `{name}`"),
            }),
        }
    }
}

/// Builds one component automaton from its AST with guards lowered to the
/// model shape. Every declared parameter goes to every component; clocks
/// and booleans go to the single automaton of a one-automaton file, and
/// otherwise to the automata mentioning them (components of a product
/// must keep disjoint clock and boolean namespaces).
fn resolve(
    ast: &AutomatonAst,
    only_automaton: bool,
    clocks: &[String],
    params: &[(String, ParamRole)],
    bools: &[(String, bool)],
) -> Result<Pta, Diagnostic> {
    let inits: Vec<&LocationAst> = ast.locations.iter().filter(|l| l.init).collect();
    if inits.len() != 1 {
        let (line, col) = ast
            .locations
            .first()
            .map(|l| (l.line, l.col))
            .unwrap_or((1, 1));
        return Err(Diagnostic {
            line,
            col,
            message: format!(
                "automaton `{}` must have exactly one `init` location, found {}",
                ast.name,
                inits.len()
            ),
        });
    }

    // Which global clocks and booleans does this automaton mention?
    let mut used_clocks: BTreeSet<usize> = BTreeSet::new();
    let mut used_bools: BTreeSet<usize> = BTreeSet::new();
    let mark_atoms = |atoms: &[AtomAst], used_clocks: &mut BTreeSet<usize>, used_bools: &mut BTreeSet<usize>| {
        for atom in atoms {
            match atom {
                AtomAst::BoolTest { var, .. } => {
                    used_bools.insert(*var);
                }
                AtomAst::Cmp { diff, .. } => {
                    used_clocks.extend(diff.clock_coeffs.keys().copied());
                }
            }
        }
    };
    for loc in &ast.locations {
        mark_atoms(&loc.invariant, &mut used_clocks, &mut used_bools);
        for edge in &loc.edges {
            mark_atoms(&edge.guard, &mut used_clocks, &mut used_bools);
            used_clocks.extend(edge.resets.iter().copied());
            used_bools.extend(edge.bool_updates.iter().map(|(d, _)| *d));
        }
    }
    if only_automaton {
        used_clocks.extend(0..clocks.len());
        used_bools.extend(0..bools.len());
    }
    let clock_list: Vec<usize> = used_clocks.iter().copied().collect();
    let bool_list: Vec<usize> = used_bools.iter().copied().collect();
    let clock_local = |global: usize| clock_list.iter().position(|&g| g == global).unwrap();
    let bool_local = |global: usize| bool_list.iter().position(|&g| g == global).unwrap();

    let lower_atoms = |atoms: &[AtomAst],
                       allow_state: bool|
     -> Result<Guard, Diagnostic> {
        let mut guard = Guard::always();
        for atom in atoms {
            match atom {
                AtomAst::BoolTest {
                    var,
                    expected,
                    line,
                    col,
                } => {
                    if !allow_state {
                        return Err(Diagnostic {
                            line: *line,
                            col: *col,
                            message: "invariants admit clock constraints only".to_string(),
                        });
                    }
                    guard.bool_tests.push((bool_local(*var), *expected));
                }
                AtomAst::Cmp {
                    diff,
                    rel,
                    line,
                    col,
                } => {
                    match diff.clock_coeffs.len() {
                        0 => {
                            if !allow_state {
                                return Err(Diagnostic {
                                    line: *line,
                                    col: *col,
                                    message: "invariants admit clock constraints only"
                                        .to_string(),
                                });
                            }
                            let mut expr = ParamExpr::constant(diff.constant.clone());
                            for (p, c) in &diff.param_coeffs {
                                expr.add(*p, c.clone());
                            }
                            guard.param_atoms.push(ParamAtom { expr, rel: *rel });
                        }
                        1 => {
                            let (&clock, coeff) = diff.clock_coeffs.iter().next().unwrap();
                            // diff = coeff*x + params + k ⋈ 0 becomes
                            // x ⋈' -(params + k)/coeff.
                            let mut bound = ParamExpr::constant(-&diff.constant / coeff);
                            for (p, c) in &diff.param_coeffs {
                                bound.add(*p, -c / coeff);
                            }
                            let rel = if coeff.is_positive() {
                                *rel
                            } else {
                                rel.flipped()
                            };
                            guard.clock_atoms.push(ClockAtom {
                                clock: clock_local(clock),
                                rel,
                                bound,
                            });
                        }
                        _ => {
                            return Err(Diagnostic {
                                line: *line,
                                col: *col,
                                message: "comparisons between clocks are not supported"
                                    .to_string(),
                            });
                        }
                    }
                }
            }
        }
        Ok(guard)
    };

    let mut actions: Vec<String> = Vec::new();
    let mut locations = Vec::new();
    let mut initial = 0;
    for (id, loc) in ast.locations.iter().enumerate() {
        if loc.init {
            initial = id;
        }
        let invariant_guard = lower_atoms(&loc.invariant, false)?;
        locations.push(Location {
            name: loc.name.clone(),
            invariant: invariant_guard.clock_atoms,
            private: loc.private,
        });
    }

    let mut edges = Vec::new();
    for (source, loc) in ast.locations.iter().enumerate() {
        for edge in &loc.edges {
            let (target_name, line, col) = &edge.target;
            let target = ast
                .locations
                .iter()
                .position(|l| &l.name == target_name)
                .ok_or_else(|| Diagnostic {
                    line: *line,
                    col: *col,
                    message: format!("unknown location `{target_name}`"),
                })?;
            let action = edge.action.as_ref().map(|name| {
                match actions.iter().position(|a| a == name) {
                    Some(id) => id,
                    None => {
                        actions.push(name.clone());
                        actions.len() - 1
                    }
                }
            });
            edges.push(Edge {
                source,
                guard: lower_atoms(&edge.guard, true)?,
                action,
                resets: edge.resets.iter().map(|&c| clock_local(c)).collect(),
                bool_updates: edge
                    .bool_updates
                    .iter()
                    .map(|(d, v)| (bool_local(*d), *v))
                    .collect(),
                target,
                private: edge.private,
            });
        }
    }

    let pta = Pta {
        name: ast.name.clone(),
        actions,
        locations,
        initial,
        clocks: clock_list.iter().map(|&g| clocks[g].clone()).collect(),
        params: params.to_vec(),
        discretes: bool_list.iter().map(|&g| bools[g].clone()).collect(),
        edges,
    };
    if let Err(err) = pta.validate() {
        return Err(Diagnostic {
            line: 1,
            col: 1,
            message: err.to_string(),
        });
    }
    Ok(pta)
}
