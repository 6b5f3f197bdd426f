//! Monadic second-order logic over coloured graphs, with both edge and
//! vertex individuals and both kinds of set variables.
//!
//! Formulas are s-expressions:
//!
//! ```text
//! (exists-v x f) (forall-v x f)     vertex individuals
//! (exists-e e f) (forall-e e f)     edge individuals
//! (exists-V X f) (forall-V X f)     vertex sets
//! (exists-E F f) (forall-E F f)     edge sets
//! (and f ...) (or f ...) (not f)    connectives
//! (implies f g) (iff f g)           sugar over and/or/not
//! (adj x y)                         an edge joins x and y
//! (inc x e)                         x is an endpoint of e
//! (in-v x X) (in-e e F)             membership
//! (=v x y) (=e e f)                 equality
//! (vcolor NAME x) (ecolor NAME e)   colours
//! (badj NAME x y)                   an edge coloured NAME joins x and y
//! (setadj F x y)                    an edge in F joins x and y
//! (atmost k e f)                    at most k edges e satisfy f
//! true false
//! ```
//!
//! `atmost` is expanded at parse time into k+1 universal edge quantifiers
//! with a pairwise-equality escape, so it never appears in printed
//! output; everything else round-trips through print and parse verbatim.
//! Parsing alpha-normalises: every binder gets a unique variable, keeping
//! the original name whenever it is not reused.
//!
//! Evaluation is by direct enumeration with three mitigations that make
//! desk-scale model checking practical: conjunction and disjunction
//! short-circuit, quantifier bodies are charged against a work budget one
//! candidate at a time, and quantifier nodes are memoised on the values
//! of their free variables.

use crate::caps::{CapExceeded, WorkBudget};
use crate::graph::ColouredGraph;
use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::rc::Rc;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sort {
    Vertex,
    Edge,
    VertexSet,
    EdgeSet,
}

impl Sort {
    pub fn name(self) -> &'static str {
        match self {
            Sort::Vertex => "vertex",
            Sort::Edge => "edge",
            Sort::VertexSet => "vertex set",
            Sort::EdgeSet => "edge set",
        }
    }

    fn is_set(self) -> bool {
        matches!(self, Sort::VertexSet | Sort::EdgeSet)
    }
}

pub type VarId = usize;
pub type NodeId = usize;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VarInfo {
    pub name: String,
    pub sort: Sort,
}

/// One node of a formula. Variables are indices into the formula's
/// variable table; children are node ids in its arena.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Node {
    Const(bool),
    And(Vec<NodeId>),
    Or(Vec<NodeId>),
    Not(NodeId),
    Exists(VarId, NodeId),
    Forall(VarId, NodeId),
    Adj(VarId, VarId),
    Inc(VarId, VarId),
    InV(VarId, VarId),
    InE(VarId, VarId),
    EqV(VarId, VarId),
    EqE(VarId, VarId),
    VColour(String, VarId),
    EColour(String, VarId),
    BAdj(String, VarId, VarId),
    SetAdj(VarId, VarId, VarId),
}

/// A value an environment can assign to a variable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Value {
    Vertex(usize),
    Edge(usize),
    VertexSet(Rc<Vec<u64>>),
    EdgeSet(Rc<Vec<u64>>),
}

impl Value {
    pub fn sort(&self) -> Sort {
        match self {
            Value::Vertex(_) => Sort::Vertex,
            Value::Edge(_) => Sort::Edge,
            Value::VertexSet(_) => Sort::VertexSet,
            Value::EdgeSet(_) => Sort::EdgeSet,
        }
    }

    /// Build a vertex-set value from ids.
    pub fn vertex_set<I: IntoIterator<Item = usize>>(n: usize, ids: I) -> Value {
        Value::VertexSet(Rc::new(ids_to_words(n, ids)))
    }

    /// Build an edge-set value from ids.
    pub fn edge_set<I: IntoIterator<Item = usize>>(m: usize, ids: I) -> Value {
        Value::EdgeSet(Rc::new(ids_to_words(m, ids)))
    }
}

fn ids_to_words<I: IntoIterator<Item = usize>>(domain: usize, ids: I) -> Vec<u64> {
    let mut words = vec![0u64; domain.div_ceil(64)];
    for id in ids {
        assert!(id < domain, "set member {id} outside domain of size {domain}");
        words[id / 64] |= 1 << (id % 64);
    }
    words
}

fn word_contains(words: &[u64], id: usize) -> bool {
    words.get(id / 64).is_some_and(|w| w & (1 << (id % 64)) != 0)
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("parse error at line {line}: {msg}")]
pub struct ParseError {
    pub line: usize,
    pub msg: String,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error(transparent)]
    Capped(#[from] CapExceeded),
    #[error("no value for free variable {0}")]
    Unbound(String),
    #[error("variable {variable} has sort {expected} but was given a {found}")]
    SortMismatch { variable: String, expected: &'static str, found: &'static str },
    #[error("value {value} for variable {variable} is outside the graph (limit {limit})")]
    OutOfRange { variable: String, value: usize, limit: usize },
    #[error("witness variable {0} is not an outermost existential set quantifier")]
    NotOutermost(String),
}

/// An alpha-normalised formula: an arena of nodes plus a variable table
/// in which every binder owns a distinct entry with a unique name.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Formula {
    nodes: Vec<Node>,
    vars: Vec<VarInfo>,
    root: NodeId,
    /// Variables not bound by any quantifier, in first-use order.
    free: Vec<VarId>,
    /// Free variables of each node, sorted.
    node_free: Vec<Vec<VarId>>,
}

impl Formula {
    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id]
    }

    pub fn var(&self, id: VarId) -> &VarInfo {
        &self.vars[id]
    }

    pub fn var_count(&self) -> usize {
        self.vars.len()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Free variables with their sorts, in first-use order.
    pub fn free_variables(&self) -> Vec<(&str, Sort)> {
        self.free.iter().map(|&v| (self.vars[v].name.as_str(), self.vars[v].sort)).collect()
    }

    pub fn parse(src: &str) -> Result<Formula, ParseError> {
        let tokens = tokenize(src)?;
        let (sexp, rest) = read_sexp(&tokens, 0)?;
        if rest != tokens.len() {
            return Err(ParseError {
                line: tokens.get(rest).map_or(0, |t| t.line),
                msg: "trailing input after the formula".into(),
            });
        }
        let mut b = FormulaBuilder::new();
        let mut scope: Vec<(String, VarId)> = Vec::new();
        let root = build_from_sexp(&sexp, &mut b, &mut scope)?;
        Ok(b.finish(root))
    }

    pub fn print(&self) -> String {
        let mut out = String::new();
        self.print_node(self.root, &mut out);
        out
    }

    fn print_node(&self, id: NodeId, out: &mut String) {
        let v = |id: VarId| self.vars[id].name.as_str();
        match &self.nodes[id] {
            Node::Const(true) => out.push_str("true"),
            Node::Const(false) => out.push_str("false"),
            Node::And(xs) | Node::Or(xs) => {
                let tag = if matches!(self.nodes[id], Node::And(_)) { "and" } else { "or" };
                let _ = write!(out, "({tag}");
                for &x in xs {
                    out.push(' ');
                    self.print_node(x, out);
                }
                out.push(')');
            }
            Node::Not(x) => {
                out.push_str("(not ");
                self.print_node(*x, out);
                out.push(')');
            }
            Node::Exists(var, body) | Node::Forall(var, body) => {
                let is_exists = matches!(self.nodes[id], Node::Exists(..));
                let tag = match (is_exists, self.vars[*var].sort) {
                    (true, Sort::Vertex) => "exists-v",
                    (true, Sort::Edge) => "exists-e",
                    (true, Sort::VertexSet) => "exists-V",
                    (true, Sort::EdgeSet) => "exists-E",
                    (false, Sort::Vertex) => "forall-v",
                    (false, Sort::Edge) => "forall-e",
                    (false, Sort::VertexSet) => "forall-V",
                    (false, Sort::EdgeSet) => "forall-E",
                };
                let _ = write!(out, "({tag} {} ", v(*var));
                self.print_node(*body, out);
                out.push(')');
            }
            Node::Adj(x, y) => {
                let _ = write!(out, "(adj {} {})", v(*x), v(*y));
            }
            Node::Inc(x, e) => {
                let _ = write!(out, "(inc {} {})", v(*x), v(*e));
            }
            Node::InV(x, s) => {
                let _ = write!(out, "(in-v {} {})", v(*x), v(*s));
            }
            Node::InE(e, s) => {
                let _ = write!(out, "(in-e {} {})", v(*e), v(*s));
            }
            Node::EqV(x, y) => {
                let _ = write!(out, "(=v {} {})", v(*x), v(*y));
            }
            Node::EqE(x, y) => {
                let _ = write!(out, "(=e {} {})", v(*x), v(*y));
            }
            Node::VColour(c, x) => {
                let _ = write!(out, "(vcolor {c} {})", v(*x));
            }
            Node::EColour(c, e) => {
                let _ = write!(out, "(ecolor {c} {})", v(*e));
            }
            Node::BAdj(c, x, y) => {
                let _ = write!(out, "(badj {c} {} {})", v(*x), v(*y));
            }
            Node::SetAdj(f, x, y) => {
                let _ = write!(out, "(setadj {} {} {})", v(*f), v(*x), v(*y));
            }
        }
    }
}

// ---------------------------------------------------------------------
// Builder
// ---------------------------------------------------------------------

/// Programmatic construction of formulas. Other modules assemble their
/// formulas through this; `Formula::parse` is itself a client.
#[derive(Debug, Default)]
pub struct FormulaBuilder {
    nodes: Vec<Node>,
    vars: Vec<VarInfo>,
    free: Vec<VarId>,
}

impl FormulaBuilder {
    pub fn new() -> FormulaBuilder {
        FormulaBuilder::default()
    }

    fn push(&mut self, n: Node) -> NodeId {
        self.nodes.push(n);
        self.nodes.len() - 1
    }

    /// Declare a free variable (or return the existing one of this name).
    pub fn free_var(&mut self, name: &str, sort: Sort) -> VarId {
        if let Some(&v) = self.free.iter().find(|&&v| self.vars[v].name == name) {
            assert_eq!(self.vars[v].sort, sort, "free variable {name} reused at another sort");
            return v;
        }
        self.vars.push(VarInfo { name: name.into(), sort });
        let v = self.vars.len() - 1;
        self.free.push(v);
        v
    }

    /// Allocate a fresh bound variable. Names are deduplicated in
    /// `finish`, so passing the same suggestion twice is fine.
    pub fn bound_var(&mut self, name: &str, sort: Sort) -> VarId {
        self.vars.push(VarInfo { name: name.into(), sort });
        self.vars.len() - 1
    }

    pub fn tru(&mut self) -> NodeId {
        self.push(Node::Const(true))
    }

    pub fn fls(&mut self) -> NodeId {
        self.push(Node::Const(false))
    }

    pub fn and(&mut self, xs: Vec<NodeId>) -> NodeId {
        match xs.len() {
            0 => self.tru(),
            1 => xs[0],
            _ => self.push(Node::And(xs)),
        }
    }

    pub fn or(&mut self, xs: Vec<NodeId>) -> NodeId {
        match xs.len() {
            0 => self.fls(),
            1 => xs[0],
            _ => self.push(Node::Or(xs)),
        }
    }

    pub fn not(&mut self, x: NodeId) -> NodeId {
        self.push(Node::Not(x))
    }

    pub fn implies(&mut self, a: NodeId, b: NodeId) -> NodeId {
        let na = self.not(a);
        self.or(vec![na, b])
    }

    pub fn iff(&mut self, a: NodeId, b: NodeId) -> NodeId {
        let na = self.not(a);
        let nb = self.not(b);
        let both_false = self.and(vec![na, nb]);
        let both_true = self.and(vec![a, b]);
        self.or(vec![both_true, both_false])
    }

    pub fn exists(&mut self, var: VarId, body: NodeId) -> NodeId {
        self.push(Node::Exists(var, body))
    }

    pub fn forall(&mut self, var: VarId, body: NodeId) -> NodeId {
        self.push(Node::Forall(var, body))
    }

    pub fn adj(&mut self, x: VarId, y: VarId) -> NodeId {
        self.expect(x, Sort::Vertex);
        self.expect(y, Sort::Vertex);
        self.push(Node::Adj(x, y))
    }

    pub fn inc(&mut self, x: VarId, e: VarId) -> NodeId {
        self.expect(x, Sort::Vertex);
        self.expect(e, Sort::Edge);
        self.push(Node::Inc(x, e))
    }

    pub fn in_v(&mut self, x: VarId, s: VarId) -> NodeId {
        self.expect(x, Sort::Vertex);
        self.expect(s, Sort::VertexSet);
        self.push(Node::InV(x, s))
    }

    pub fn in_e(&mut self, e: VarId, s: VarId) -> NodeId {
        self.expect(e, Sort::Edge);
        self.expect(s, Sort::EdgeSet);
        self.push(Node::InE(e, s))
    }

    pub fn eq_v(&mut self, x: VarId, y: VarId) -> NodeId {
        self.expect(x, Sort::Vertex);
        self.expect(y, Sort::Vertex);
        self.push(Node::EqV(x, y))
    }

    pub fn eq_e(&mut self, x: VarId, y: VarId) -> NodeId {
        self.expect(x, Sort::Edge);
        self.expect(y, Sort::Edge);
        self.push(Node::EqE(x, y))
    }

    pub fn vcolour(&mut self, colour: &str, x: VarId) -> NodeId {
        self.expect(x, Sort::Vertex);
        self.push(Node::VColour(colour.into(), x))
    }

    pub fn ecolour(&mut self, colour: &str, e: VarId) -> NodeId {
        self.expect(e, Sort::Edge);
        self.push(Node::EColour(colour.into(), e))
    }

    pub fn badj(&mut self, colour: &str, x: VarId, y: VarId) -> NodeId {
        self.expect(x, Sort::Vertex);
        self.expect(y, Sort::Vertex);
        self.push(Node::BAdj(colour.into(), x, y))
    }

    pub fn setadj(&mut self, f: VarId, x: VarId, y: VarId) -> NodeId {
        self.expect(f, Sort::EdgeSet);
        self.expect(x, Sort::Vertex);
        self.expect(y, Sort::Vertex);
        self.push(Node::SetAdj(f, x, y))
    }

    fn expect(&self, v: VarId, sort: Sort) {
        assert_eq!(
            self.vars[v].sort, sort,
            "variable {} used at the wrong sort",
            self.vars[v].name
        );
    }

    /// Deep-copy a subtree, remapping the variables in `map` (used for
    /// macro expansion). Variables outside the map are shared.
    pub fn clone_subtree(&mut self, id: NodeId, map: &BTreeMap<VarId, VarId>) -> NodeId {
        let node = self.nodes[id].clone();
        let remap = |v: VarId, map: &BTreeMap<VarId, VarId>| *map.get(&v).unwrap_or(&v);
        let new = match node {
            Node::Const(b) => Node::Const(b),
            Node::And(xs) => {
                let ys = xs.into_iter().map(|x| self.clone_subtree(x, map)).collect();
                Node::And(ys)
            }
            Node::Or(xs) => {
                let ys = xs.into_iter().map(|x| self.clone_subtree(x, map)).collect();
                Node::Or(ys)
            }
            Node::Not(x) => Node::Not(self.clone_subtree(x, map)),
            Node::Exists(v, b) => {
                // Bound variables inside the copied subtree must stay
                // distinct: allocate a twin and extend the map.
                let twin = self.bound_var(&self.vars[v].name.clone(), self.vars[v].sort);
                let mut inner = map.clone();
                inner.insert(v, twin);
                Node::Exists(twin, self.clone_subtree(b, &inner))
            }
            Node::Forall(v, b) => {
                let twin = self.bound_var(&self.vars[v].name.clone(), self.vars[v].sort);
                let mut inner = map.clone();
                inner.insert(v, twin);
                Node::Forall(twin, self.clone_subtree(b, &inner))
            }
            Node::Adj(x, y) => Node::Adj(remap(x, map), remap(y, map)),
            Node::Inc(x, e) => Node::Inc(remap(x, map), remap(e, map)),
            Node::InV(x, s) => Node::InV(remap(x, map), remap(s, map)),
            Node::InE(e, s) => Node::InE(remap(e, map), remap(s, map)),
            Node::EqV(x, y) => Node::EqV(remap(x, map), remap(y, map)),
            Node::EqE(x, y) => Node::EqE(remap(x, map), remap(y, map)),
            Node::VColour(c, x) => Node::VColour(c, remap(x, map)),
            Node::EColour(c, e) => Node::EColour(c, remap(e, map)),
            Node::BAdj(c, x, y) => Node::BAdj(c, remap(x, map), remap(y, map)),
            Node::SetAdj(f, x, y) => Node::SetAdj(remap(f, map), remap(x, map), remap(y, map)),
        };
        self.push(new)
    }

    /// Seal the formula: give duplicate variable names unique suffixes
    /// and precompute per-node free-variable lists.
    pub fn finish(mut self, root: NodeId) -> Formula {
        let mut seen: BTreeMap<String, usize> = BTreeMap::new();
        let taken: std::collections::BTreeSet<String> =
            self.vars.iter().map(|v| v.name.clone()).collect();
        for v in &mut self.vars {
            let count = seen.entry(v.name.clone()).or_insert(0);
            *count += 1;
            if *count > 1 {
                let mut k = *count;
                loop {
                    let candidate = format!("{}{}", v.name, k);
                    if !taken.contains(&candidate) && !seen.contains_key(&candidate) {
                        seen.insert(candidate.clone(), 1);
                        v.name = candidate;
                        break;
                    }
                    k += 1;
                }
            }
        }
        let node_free = compute_free(&self.nodes);
        Formula { nodes: self.nodes, vars: self.vars, root, free: self.free, node_free }
    }
}

fn compute_free(nodes: &[Node]) -> Vec<Vec<VarId>> {
    let mut free: Vec<Vec<VarId>> = vec![Vec::new(); nodes.len()];
    for id in 0..nodes.len() {
        // Children always precede parents in the arena.
        let mut collect: Vec<VarId> = Vec::new();
        match &nodes[id] {
            Node::Const(_) => {}
            Node::And(xs) | Node::Or(xs) => {
                for &x in xs {
                    collect.extend(&free[x]);
                }
            }
            Node::Not(x) => collect.extend(&free[*x]),
            Node::Exists(v, b) | Node::Forall(v, b) => {
                collect.extend(free[*b].iter().filter(|&&w| w != *v));
            }
            Node::Adj(x, y) | Node::EqV(x, y) | Node::EqE(x, y) => {
                collect.extend([*x, *y]);
            }
            Node::Inc(x, e) => collect.extend([*x, *e]),
            Node::InV(x, s) => collect.extend([*x, *s]),
            Node::InE(e, s) => collect.extend([*e, *s]),
            Node::VColour(_, x) | Node::EColour(_, x) => collect.push(*x),
            Node::BAdj(_, x, y) => collect.extend([*x, *y]),
            Node::SetAdj(f, x, y) => collect.extend([*f, *x, *y]),
        }
        collect.sort_unstable();
        collect.dedup();
        free[id] = collect;
    }
    free
}

// ---------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq)]
struct Token {
    text: String,
    line: usize,
}

fn tokenize(src: &str) -> Result<Vec<Token>, ParseError> {
    let mut tokens = Vec::new();
    let mut line = 1usize;
    let mut cur = String::new();
    let mut in_comment = false;
    for ch in src.chars() {
        if ch == '\n' {
            line += 1;
            in_comment = false;
        }
        if in_comment {
            continue;
        }
        match ch {
            '#' => {
                if !cur.is_empty() {
                    tokens.push(Token { text: std::mem::take(&mut cur), line });
                }
                in_comment = true;
            }
            '(' | ')' => {
                if !cur.is_empty() {
                    tokens.push(Token { text: std::mem::take(&mut cur), line });
                }
                tokens.push(Token { text: ch.to_string(), line });
            }
            c if c.is_whitespace() => {
                if !cur.is_empty() {
                    tokens.push(Token { text: std::mem::take(&mut cur), line });
                }
            }
            c => cur.push(c),
        }
    }
    if !cur.is_empty() {
        tokens.push(Token { text: cur, line });
    }
    if tokens.is_empty() {
        return Err(ParseError { line: 1, msg: "empty input".into() });
    }
    Ok(tokens)
}

#[derive(Debug, Clone)]
enum Sexp {
    Atom(String, usize),
    List(Vec<Sexp>, usize),
}

fn read_sexp(tokens: &[Token], at: usize) -> Result<(Sexp, usize), ParseError> {
    let Some(tok) = tokens.get(at) else {
        return Err(ParseError {
            line: tokens.last().map_or(1, |t| t.line),
            msg: "unexpected end of input".into(),
        });
    };
    match tok.text.as_str() {
        "(" => {
            let mut items = Vec::new();
            let mut pos = at + 1;
            loop {
                match tokens.get(pos) {
                    Some(t) if t.text == ")" => return Ok((Sexp::List(items, tok.line), pos + 1)),
                    Some(_) => {
                        let (item, next) = read_sexp(tokens, pos)?;
                        items.push(item);
                        pos = next;
                    }
                    None => {
                        return Err(ParseError { line: tok.line, msg: "unclosed parenthesis".into() })
                    }
                }
            }
        }
        ")" => Err(ParseError { line: tok.line, msg: "unexpected closing parenthesis".into() }),
        _ => Ok((Sexp::Atom(tok.text.clone(), tok.line), at + 1)),
    }
}

const KEYWORDS: &[&str] = &[
    "exists-v", "forall-v", "exists-e", "forall-e", "exists-V", "forall-V", "exists-E",
    "forall-E", "and", "or", "not", "implies", "iff", "adj", "inc", "in-v", "in-e", "=v", "=e",
    "vcolor", "ecolor", "badj", "setadj", "atmost", "true", "false",
];

fn check_var_name(name: &str, line: usize) -> Result<(), ParseError> {
    if name.is_empty() || KEYWORDS.contains(&name) || name.chars().any(|c| c == '(' || c == ')') {
        return Err(ParseError { line, msg: format!("invalid variable name {name:?}") });
    }
    Ok(())
}

fn atom<'s>(sexp: &'s Sexp, what: &str) -> Result<(&'s str, usize), ParseError> {
    match sexp {
        Sexp::Atom(s, l) => Ok((s.as_str(), *l)),
        Sexp::List(_, l) => {
            Err(ParseError { line: *l, msg: format!("expected {what}, found a list") })
        }
    }
}

/// Resolve a variable reference: innermost binding of the name, or a
/// free variable of the inferred sort.
fn resolve(
    name: &str,
    line: usize,
    sort: Sort,
    b: &mut FormulaBuilder,
    scope: &[(String, VarId)],
) -> Result<VarId, ParseError> {
    check_var_name(name, line)?;
    if let Some((_, v)) = scope.iter().rev().find(|(n, _)| n == name) {
        if b.vars[*v].sort != sort {
            return Err(ParseError {
                line,
                msg: format!(
                    "variable {name} has sort {} but is used as a {}",
                    b.vars[*v].sort.name(),
                    sort.name()
                ),
            });
        }
        return Ok(*v);
    }
    // Free variable: first use fixes the sort.
    if let Some(&v) = b.free.iter().find(|&&v| b.vars[v].name == name) {
        if b.vars[v].sort != sort {
            return Err(ParseError {
                line,
                msg: format!(
                    "free variable {name} has sort {} but is used as a {}",
                    b.vars[v].sort.name(),
                    sort.name()
                ),
            });
        }
        return Ok(v);
    }
    Ok(b.free_var(name, sort))
}

fn build_from_sexp(
    sexp: &Sexp,
    b: &mut FormulaBuilder,
    scope: &mut Vec<(String, VarId)>,
) -> Result<NodeId, ParseError> {
    let (items, line) = match sexp {
        Sexp::Atom(s, l) => {
            return match s.as_str() {
                "true" => Ok(b.tru()),
                "false" => Ok(b.fls()),
                other => {
                    Err(ParseError { line: *l, msg: format!("bare atom {other:?} is not a formula") })
                }
            }
        }
        Sexp::List(items, l) => (items, *l),
    };
    let Some(head) = items.first() else {
        return Err(ParseError { line, msg: "empty list".into() });
    };
    let (op, op_line) = atom(head, "an operator")?;
    let args = &items[1..];
    let quantifier = |op: &str| -> Option<(bool, Sort)> {
        match op {
            "exists-v" => Some((true, Sort::Vertex)),
            "forall-v" => Some((false, Sort::Vertex)),
            "exists-e" => Some((true, Sort::Edge)),
            "forall-e" => Some((false, Sort::Edge)),
            "exists-V" => Some((true, Sort::VertexSet)),
            "forall-V" => Some((false, Sort::VertexSet)),
            "exists-E" => Some((true, Sort::EdgeSet)),
            "forall-E" => Some((false, Sort::EdgeSet)),
            _ => None,
        }
    };
    if let Some((is_exists, sort)) = quantifier(op) {
        if args.len() != 2 {
            return Err(ParseError {
                line: op_line,
                msg: format!("{op} takes a variable and a body"),
            });
        }
        let (name, nline) = atom(&args[0], "a variable")?;
        check_var_name(name, nline)?;
        let var = b.bound_var(name, sort);
        scope.push((name.to_string(), var));
        let body = build_from_sexp(&args[1], b, scope)?;
        scope.pop();
        return Ok(if is_exists { b.exists(var, body) } else { b.forall(var, body) });
    }
    let want = |n: usize| -> Result<(), ParseError> {
        if args.len() != n {
            Err(ParseError { line: op_line, msg: format!("{op} takes {n} arguments") })
        } else {
            Ok(())
        }
    };
    match op {
        "and" | "or" => {
            let mut xs = Vec::with_capacity(args.len());
            for a in args {
                xs.push(build_from_sexp(a, b, scope)?);
            }
            Ok(if op == "and" { b.and(xs) } else { b.or(xs) })
        }
        "not" => {
            want(1)?;
            let x = build_from_sexp(&args[0], b, scope)?;
            Ok(b.not(x))
        }
        "implies" => {
            want(2)?;
            let x = build_from_sexp(&args[0], b, scope)?;
            let y = build_from_sexp(&args[1], b, scope)?;
            Ok(b.implies(x, y))
        }
        "iff" => {
            want(2)?;
            let x = build_from_sexp(&args[0], b, scope)?;
            let y = build_from_sexp(&args[1], b, scope)?;
            Ok(b.iff(x, y))
        }
        "adj" | "=v" | "=e" | "inc" | "in-v" | "in-e" | "setadj" => {
            let arity = if op == "setadj" { 3 } else { 2 };
            want(arity)?;
            let mut names = Vec::with_capacity(arity);
            for a in args {
                names.push(atom(a, "a variable")?);
            }
            let sorts: &[Sort] = match op {
                "adj" | "=v" => &[Sort::Vertex, Sort::Vertex],
                "=e" => &[Sort::Edge, Sort::Edge],
                "inc" => &[Sort::Vertex, Sort::Edge],
                "in-v" => &[Sort::Vertex, Sort::VertexSet],
                "in-e" => &[Sort::Edge, Sort::EdgeSet],
                "setadj" => &[Sort::EdgeSet, Sort::Vertex, Sort::Vertex],
                _ => unreachable!(),
            };
            let mut vars = Vec::with_capacity(arity);
            for ((name, nline), &sort) in names.iter().zip(sorts) {
                vars.push(resolve(name, *nline, sort, b, scope)?);
            }
            Ok(match op {
                "adj" => b.adj(vars[0], vars[1]),
                "=v" => b.eq_v(vars[0], vars[1]),
                "=e" => b.eq_e(vars[0], vars[1]),
                "inc" => b.inc(vars[0], vars[1]),
                "in-v" => b.in_v(vars[0], vars[1]),
                "in-e" => b.in_e(vars[0], vars[1]),
                "setadj" => b.setadj(vars[0], vars[1], vars[2]),
                _ => unreachable!(),
            })
        }
        "vcolor" | "ecolor" => {
            want(2)?;
            let (colour, _) = atom(&args[0], "a colour name")?;
            let (name, nline) = atom(&args[1], "a variable")?;
            let sort = if op == "vcolor" { Sort::Vertex } else { Sort::Edge };
            let var = resolve(name, nline, sort, b, scope)?;
            Ok(if op == "vcolor" { b.vcolour(colour, var) } else { b.ecolour(colour, var) })
        }
        "badj" => {
            want(3)?;
            let (colour, _) = atom(&args[0], "a colour name")?;
            let (xn, xl) = atom(&args[1], "a variable")?;
            let (yn, yl) = atom(&args[2], "a variable")?;
            let x = resolve(xn, xl, Sort::Vertex, b, scope)?;
            let y = resolve(yn, yl, Sort::Vertex, b, scope)?;
            Ok(b.badj(colour, x, y))
        }
        "atmost" => {
            want(3)?;
            let (ks, kline) = atom(&args[0], "a count")?;
            let k: usize = ks.parse().map_err(|_| ParseError {
                line: kline,
                msg: format!("atmost count {ks:?} is not a number"),
            })?;
            if k > 8 {
                return Err(ParseError {
                    line: kline,
                    msg: format!("atmost count {k} too large (limit 8)"),
                });
            }
            let (name, nline) = atom(&args[1], "a variable")?;
            check_var_name(name, nline)?;
            // Parse the body once with the bound edge variable, then
            // instantiate k + 1 copies.
            let template_var = b.bound_var(name, Sort::Edge);
            scope.push((name.to_string(), template_var));
            let template = build_from_sexp(&args[2], b, scope)?;
            scope.pop();
            let copies: Vec<VarId> =
                (0..=k).map(|_| b.bound_var(name, Sort::Edge)).collect();
            let mut body_parts = Vec::with_capacity(k + 1);
            for &c in &copies {
                let map = BTreeMap::from([(template_var, c)]);
                body_parts.push(b.clone_subtree(template, &map));
            }
            let all_hold = b.and(body_parts);
            let mut equal_pair = Vec::new();
            for i in 0..copies.len() {
                for j in i + 1..copies.len() {
                    equal_pair.push(b.eq_e(copies[i], copies[j]));
                }
            }
            let some_equal = b.or(equal_pair);
            let mut node = b.implies(all_hold, some_equal);
            for &c in copies.iter().rev() {
                node = b.forall(c, node);
            }
            Ok(node)
        }
        other => Err(ParseError { line: op_line, msg: format!("unknown operator {other:?}") }),
    }
}

// ---------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------

struct Evaluator<'a> {
    g: &'a ColouredGraph,
    f: &'a Formula,
    budget: &'a WorkBudget,
    env: Vec<Option<Value>>,
    /// Interned set values for memo keys.
    interned: HashMap<Vec<u64>, u64>,
    memo: HashMap<(NodeId, Box<[u64]>), bool>,
}

impl<'a> Evaluator<'a> {
    fn value_key(&mut self, v: &Value) -> u64 {
        match v {
            Value::Vertex(x) | Value::Edge(x) => *x as u64,
            Value::VertexSet(s) | Value::EdgeSet(s) => {
                let next = self.interned.len() as u64;
                *self.interned.entry(s.as_ref().clone()).or_insert(next)
            }
        }
    }

    fn var_value(&self, v: VarId) -> Result<&Value, EvalError> {
        self.env[v].as_ref().ok_or_else(|| EvalError::Unbound(self.f.var(v).name.clone()))
    }

    fn vertex(&self, v: VarId) -> Result<usize, EvalError> {
        match self.var_value(v)? {
            Value::Vertex(x) => Ok(*x),
            other => Err(self.mismatch(v, other)),
        }
    }

    fn edge(&self, v: VarId) -> Result<usize, EvalError> {
        match self.var_value(v)? {
            Value::Edge(x) => Ok(*x),
            other => Err(self.mismatch(v, other)),
        }
    }

    fn mismatch(&self, v: VarId, found: &Value) -> EvalError {
        EvalError::SortMismatch {
            variable: self.f.var(v).name.clone(),
            expected: self.f.var(v).sort.name(),
            found: found.sort().name(),
        }
    }

    fn eval(&mut self, id: NodeId) -> Result<bool, EvalError> {
        self.budget.charge(1)?;
        match self.f.node(id) {
            Node::Const(b) => Ok(*b),
            Node::And(xs) => {
                for &x in xs {
                    if !self.eval(x)? {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            Node::Or(xs) => {
                for &x in xs {
                    if self.eval(x)? {
                        return Ok(true);
                    }
                }
                Ok(false)
            }
            Node::Not(x) => Ok(!self.eval(*x)?),
            Node::Exists(var, body) => self.quantify(id, *var, *body, true),
            Node::Forall(var, body) => self.quantify(id, *var, *body, false),
            Node::Adj(x, y) => {
                let (a, b) = (self.vertex(*x)?, self.vertex(*y)?);
                Ok(a != b && self.g.edge_between(a, b).is_some())
            }
            Node::Inc(x, e) => {
                let (v, ed) = (self.vertex(*x)?, self.edge(*e)?);
                Ok(self.g.is_incident(v, ed))
            }
            Node::InV(x, s) => {
                let v = self.vertex(*x)?;
                match self.var_value(*s)? {
                    Value::VertexSet(words) => Ok(word_contains(words, v)),
                    other => Err(self.mismatch(*s, other)),
                }
            }
            Node::InE(e, s) => {
                let ed = self.edge(*e)?;
                match self.var_value(*s)? {
                    Value::EdgeSet(words) => Ok(word_contains(words, ed)),
                    other => Err(self.mismatch(*s, other)),
                }
            }
            Node::EqV(x, y) => Ok(self.vertex(*x)? == self.vertex(*y)?),
            Node::EqE(x, y) => Ok(self.edge(*x)? == self.edge(*y)?),
            Node::VColour(c, x) => {
                let v = self.vertex(*x)?;
                Ok(self.g.vertex_has_colour(v, c))
            }
            Node::EColour(c, e) => {
                let ed = self.edge(*e)?;
                Ok(self.g.edge_has_colour(ed, c))
            }
            Node::BAdj(c, x, y) => {
                let (a, b) = (self.vertex(*x)?, self.vertex(*y)?);
                Ok(a != b
                    && self
                        .g
                        .edge_between(a, b)
                        .is_some_and(|e| self.g.edge_has_colour(e, c)))
            }
            Node::SetAdj(f, x, y) => {
                let (a, b) = (self.vertex(*x)?, self.vertex(*y)?);
                if a == b {
                    return Ok(false);
                }
                let Some(e) = self.g.edge_between(a, b) else { return Ok(false) };
                match self.var_value(*f)? {
                    Value::EdgeSet(words) => Ok(word_contains(words, e)),
                    other => Err(self.mismatch(*f, other)),
                }
            }
        }
    }

    fn quantify(
        &mut self,
        id: NodeId,
        var: VarId,
        body: NodeId,
        is_exists: bool,
    ) -> Result<bool, EvalError> {
        // Memo key: values of this node's free variables.
        let key: Box<[u64]> = {
            let frees = &self.f.node_free[id];
            let mut key = Vec::with_capacity(frees.len());
            for &fv in frees.iter() {
                let val = self
                    .env[fv]
                    .clone()
                    .ok_or_else(|| EvalError::Unbound(self.f.var(fv).name.clone()))?;
                key.push(self.value_key(&val));
            }
            key.into_boxed_slice()
        };
        if let Some(&cached) = self.memo.get(&(id, key.clone())) {
            return Ok(cached);
        }
        let sort = self.f.var(var).sort;
        let result = match sort {
            Sort::Vertex => {
                let mut out = !is_exists;
                for v in 0..self.g.n() {
                    self.budget.charge(1)?;
                    self.env[var] = Some(Value::Vertex(v));
                    let r = self.eval(body)?;
                    if r == is_exists {
                        out = is_exists;
                        break;
                    }
                }
                self.env[var] = None;
                out
            }
            Sort::Edge => {
                let mut out = !is_exists;
                for e in 0..self.g.m() {
                    self.budget.charge(1)?;
                    self.env[var] = Some(Value::Edge(e));
                    let r = self.eval(body)?;
                    if r == is_exists {
                        out = is_exists;
                        break;
                    }
                }
                self.env[var] = None;
                out
            }
            Sort::VertexSet | Sort::EdgeSet => {
                let domain = if sort == Sort::VertexSet { self.g.n() } else { self.g.m() };
                let mut out = !is_exists;
                let mut mask = vec![0u64; domain.div_ceil(64).max(1)];
                loop {
                    self.budget.charge(1)?;
                    let value = Rc::new(if domain == 0 { Vec::new() } else { mask.clone() });
                    self.env[var] = Some(if sort == Sort::VertexSet {
                        Value::VertexSet(value)
                    } else {
                        Value::EdgeSet(value)
                    });
                    let r = self.eval(body)?;
                    if r == is_exists {
                        out = is_exists;
                        break;
                    }
                    if domain == 0 || !increment(&mut mask, domain) {
                        break;
                    }
                }
                self.env[var] = None;
                out
            }
        };
        self.memo.insert((id, key), result);
        Ok(result)
    }
}

/// Binary increment of a bitmask over `domain` bits; false on wraparound.
fn increment(mask: &mut [u64], domain: usize) -> bool {
    for i in 0..mask.len() {
        let bits = if (i + 1) * 64 <= domain { 64 } else { domain - i * 64 };
        let cap = if bits == 64 { u64::MAX } else { (1u64 << bits) - 1 };
        if mask[i] < cap {
            mask[i] += 1;
            return true;
        }
        mask[i] = 0;
    }
    false
}

fn build_env(
    f: &Formula,
    g: &ColouredGraph,
    env: &BTreeMap<String, Value>,
) -> Result<Vec<Option<Value>>, EvalError> {
    let mut slots: Vec<Option<Value>> = vec![None; f.var_count()];
    for &fv in &f.free {
        let info = f.var(fv);
        let Some(value) = env.get(&info.name) else {
            return Err(EvalError::Unbound(info.name.clone()));
        };
        if value.sort() != info.sort {
            return Err(EvalError::SortMismatch {
                variable: info.name.clone(),
                expected: info.sort.name(),
                found: value.sort().name(),
            });
        }
        match value {
            Value::Vertex(v) if *v >= g.n() => {
                return Err(EvalError::OutOfRange {
                    variable: info.name.clone(),
                    value: *v,
                    limit: g.n(),
                })
            }
            Value::Edge(e) if *e >= g.m() => {
                return Err(EvalError::OutOfRange {
                    variable: info.name.clone(),
                    value: *e,
                    limit: g.m(),
                })
            }
            _ => {}
        }
        slots[fv] = Some(value.clone());
    }
    Ok(slots)
}

/// Evaluate a formula on a coloured graph under an environment for its
/// free variables.
pub fn evaluate(
    g: &ColouredGraph,
    f: &Formula,
    env: &BTreeMap<String, Value>,
    budget: &WorkBudget,
) -> Result<bool, EvalError> {
    let slots = build_env(f, g, env)?;
    let mut ev = Evaluator {
        g,
        f,
        budget,
        env: slots,
        interned: HashMap::new(),
        memo: HashMap::new(),
    };
    ev.eval(f.root())
}

/// Evaluate with a witness: the named set variables must be existential
/// set quantifiers in the outermost block of the formula; they are bound
/// to the given values instead of being searched. Unnamed quantifiers in
/// the block are still enumerated. `Ok(true)` certifies the formula
/// (soundness: a witnessed true implies plain evaluation is true).
pub fn evaluate_with_witness(
    g: &ColouredGraph,
    f: &Formula,
    env: &BTreeMap<String, Value>,
    witness: &BTreeMap<String, Value>,
    budget: &WorkBudget,
) -> Result<bool, EvalError> {
    let mut slots = build_env(f, g, env)?;
    // Collect the outermost existential set block.
    let mut block: Vec<VarId> = Vec::new();
    let mut node = f.root();
    loop {
        match f.node(node) {
            Node::Exists(v, body) if f.var(*v).sort.is_set() => {
                block.push(*v);
                node = *body;
            }
            _ => break,
        }
    }
    let mut unwitnessed: Vec<VarId> = Vec::new();
    let mut named: BTreeMap<&str, VarId> = BTreeMap::new();
    for &v in &block {
        named.insert(f.var(v).name.as_str(), v);
    }
    for (name, value) in witness {
        let Some(&v) = named.get(name.as_str()) else {
            return Err(EvalError::NotOutermost(name.clone()));
        };
        let info = f.var(v);
        if value.sort() != info.sort {
            return Err(EvalError::SortMismatch {
                variable: info.name.clone(),
                expected: info.sort.name(),
                found: value.sort().name(),
            });
        }
        slots[v] = Some(value.clone());
    }
    for &v in &block {
        if slots[v].is_none() {
            unwitnessed.push(v);
        }
    }
    let mut ev = Evaluator {
        g,
        f,
        budget,
        env: slots,
        interned: HashMap::new(),
        memo: HashMap::new(),
    };
    // Enumerate the unwitnessed block variables outermost-first, then
    // evaluate the matrix under the combined assignment.
    fn go(
        ev: &mut Evaluator<'_>,
        unwitnessed: &[VarId],
        matrix: NodeId,
    ) -> Result<bool, EvalError> {
        let Some((&v, rest)) = unwitnessed.split_first() else {
            return ev.eval(matrix);
        };
        let sort = ev.f.var(v).sort;
        let domain = if sort == Sort::VertexSet { ev.g.n() } else { ev.g.m() };
        let mut mask = vec![0u64; domain.div_ceil(64).max(1)];
        loop {
            ev.budget.charge(1)?;
            let value = Rc::new(if domain == 0 { Vec::new() } else { mask.clone() });
            ev.env[v] = Some(if sort == Sort::VertexSet {
                Value::VertexSet(value)
            } else {
                Value::EdgeSet(value)
            });
            if go(ev, rest, matrix)? {
                ev.env[v] = None;
                return Ok(true);
            }
            if domain == 0 || !increment(&mut mask, domain) {
                break;
            }
        }
        ev.env[v] = None;
        Ok(false)
    }
    go(&mut ev, &unwitnessed, node)
}

// ---------------------------------------------------------------------
// Three-colourability
// ---------------------------------------------------------------------

/// The sentence "the vertex set splits into three classes with no edge
/// inside any class".
pub fn formula_three_colourability() -> Formula {
    let mut b = FormulaBuilder::new();
    let r = b.bound_var("R", Sort::VertexSet);
    let gr = b.bound_var("G", Sort::VertexSet);
    let bl = b.bound_var("B", Sort::VertexSet);
    // Every vertex lies in one of the three classes.
    let x = b.bound_var("x", Sort::Vertex);
    let in_r = b.in_v(x, r);
    let in_g = b.in_v(x, gr);
    let in_b = b.in_v(x, bl);
    let somewhere = b.or(vec![in_r, in_g, in_b]);
    let cover = b.forall(x, somewhere);
    // No edge joins two vertices of the same class.
    let u = b.bound_var("u", Sort::Vertex);
    let y = b.bound_var("y", Sort::Vertex);
    let mut clash = Vec::new();
    for set in [r, gr, bl] {
        let uin = b.in_v(u, set);
        let yin = b.in_v(y, set);
        clash.push(b.and(vec![uin, yin]));
    }
    let same_class = b.or(clash);
    let e = b.adj(u, y);
    let bad = b.and(vec![e, same_class]);
    let no_bad = b.not(bad);
    let inner = b.forall(y, no_bad);
    let proper = b.forall(u, inner);
    let body = b.and(vec![cover, proper]);
    let q3 = b.exists(bl, body);
    let q2 = b.exists(gr, q3);
    let q1 = b.exists(r, q2);
    b.finish(q1)
}

/// Direct enumeration oracle for three-colourability.
pub fn three_colourable_oracle(g: &ColouredGraph) -> bool {
    let n = g.n();
    if n == 0 {
        return true;
    }
    let mut colour = vec![0u8; n];
    loop {
        let ok = g.edge_ids().all(|e| {
            let (u, v) = g.endpoints(e);
            colour[u] != colour[v]
        });
        if ok {
            return true;
        }
        let mut i = 0;
        loop {
            if i == n {
                return false;
            }
            if colour[i] < 2 {
                colour[i] += 1;
                break;
            }
            colour[i] = 0;
            i += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::caps::Caps;
    use crate::graph::{make_grid, ColouredGraph, Signature};

    fn budget() -> crate::caps::WorkBudget {
        Caps::default().budget()
    }

    fn eval_closed(g: &ColouredGraph, src: &str) -> bool {
        let f = Formula::parse(src).unwrap();
        evaluate(g, &f, &BTreeMap::new(), &budget()).unwrap()
    }

    fn triangle() -> ColouredGraph {
        let mut g = ColouredGraph::plain(3);
        g.add_edge(0, 1).unwrap();
        g.add_edge(1, 2).unwrap();
        g.add_edge(0, 2).unwrap();
        g
    }

    #[test]
    fn parse_print_round_trip() {
        let sources = [
            "(exists-v x (forall-v y (or (adj x y) (=v x y))))",
            "(exists-E F (forall-e e (in-e e F)))",
            "(forall-V X (exists-v x (not (in-v x X))))",
            "(and (adj x y) (vcolor C1 x) (ecolor B e))",
            "(exists-e e (and (inc x e) (inc y e)))",
            "(badj B x y)",
            "(setadj F x y)",
            "true",
            "(not false)",
        ];
        for src in sources {
            let f = Formula::parse(src).unwrap();
            let printed = f.print();
            let g = Formula::parse(&printed).unwrap();
            assert_eq!(printed, g.print(), "printing is stable for {src}");
        }
    }

    #[test]
    fn alpha_normalisation_renames_shadowed_binders() {
        let f = Formula::parse("(exists-v x (and (exists-v x (adj x x)) (exists-v x true)))")
            .unwrap();
        let printed = f.print();
        // Three binders, three distinct names.
        let g = Formula::parse(&printed).unwrap();
        assert_eq!(printed, g.print());
        let names: std::collections::BTreeSet<&str> =
            (0..f.var_count()).map(|v| f.var(v).name.as_str()).collect();
        assert_eq!(names.len(), f.var_count(), "names are unique after normalisation");
    }

    #[test]
    fn sort_errors_name_the_variable() {
        let err = Formula::parse("(exists-v x (inc x x))").unwrap_err();
        assert!(err.msg.contains('x'), "{err}");
        let err = Formula::parse("(exists-E F (in-v x F))").unwrap_err();
        assert!(err.msg.contains('F'), "{err}");
    }

    #[test]
    fn simple_truths_on_a_triangle() {
        let g = triangle();
        assert!(eval_closed(&g, "(forall-v x (forall-v y (or (=v x y) (adj x y))))"));
        assert!(eval_closed(&g, "(exists-e e (exists-v x (inc x e)))"));
        assert!(!eval_closed(&g, "(exists-v x (forall-v y (not (adj x y))))"));
        // Derived adjacency through an edge individual.
        assert!(eval_closed(
            &g,
            "(forall-v x (forall-v y (implies (adj x y) \
              (exists-e e (and (inc x e) (inc y e))))))"
        ));
    }

    #[test]
    fn set_quantifiers_enumerate_subsets() {
        let g = triangle();
        // There is a vertex set of exactly two members.
        assert!(eval_closed(
            &g,
            "(exists-V X (exists-v x (exists-v y (and (not (=v x y)) (in-v x X) (in-v y X) \
              (forall-v z (implies (in-v z X) (or (=v z x) (=v z y))))))))"
        ));
        // No edge set covers a triangle with one edge.
        assert!(!eval_closed(
            &g,
            "(exists-E F (and (forall-e e (in-e e F)) \
              (exists-e e (forall-e f (implies (in-e f F) (=e e f))))))"
        ));
    }

    #[test]
    fn colours_are_visible() {
        let sig = Signature::new(["C1", "C2"]).unwrap();
        let mut g = ColouredGraph::new(3, sig);
        g.add_edge(0, 1).unwrap();
        g.add_edge(1, 2).unwrap();
        g.add_vertex_colour(0, "C1").unwrap();
        g.add_vertex_colour(1, "R").unwrap();
        g.add_edge_colour(0, "B").unwrap();
        assert!(eval_closed(&g, "(exists-v x (vcolor C1 x))"));
        assert!(eval_closed(&g, "(exists-v x (vcolor R x))"));
        assert!(!eval_closed(&g, "(exists-v x (vcolor C2 x))"));
        assert!(eval_closed(&g, "(exists-e e (ecolor B e))"));
        assert!(eval_closed(&g, "(exists-v x (exists-v y (badj B x y)))"));
        assert!(!eval_closed(
            &g,
            "(forall-v x (forall-v y (implies (adj x y) (badj B x y))))"
        ));
    }

    #[test]
    fn atmost_expands_to_a_counting_bound() {
        let g = triangle();
        assert!(eval_closed(&g, "(atmost 3 e true)"));
        assert!(!eval_closed(&g, "(atmost 2 e true)"));
        // Each vertex of a triangle is on exactly 2 edges.
        assert!(eval_closed(&g, "(forall-v x (atmost 2 e (inc x e)))"));
        assert!(!eval_closed(&g, "(forall-v x (atmost 1 e (inc x e)))"));
    }

    #[test]
    fn free_variables_come_from_the_environment() {
        let g = triangle();
        let f = Formula::parse("(adj x y)").unwrap();
        assert_eq!(f.free_variables().len(), 2);
        let mut env = BTreeMap::new();
        env.insert("x".to_string(), Value::Vertex(0));
        env.insert("y".to_string(), Value::Vertex(1));
        assert!(evaluate(&g, &f, &env, &budget()).unwrap());
        env.insert("y".to_string(), Value::Vertex(0));
        assert!(!evaluate(&g, &f, &env, &budget()).unwrap());
        // Missing value.
        let err = evaluate(&g, &f, &BTreeMap::new(), &budget()).unwrap_err();
        assert!(matches!(err, EvalError::Unbound(_)));
        // Wrong sort.
        env.insert("y".to_string(), Value::Edge(0));
        let err = evaluate(&g, &f, &env, &budget()).unwrap_err();
        assert!(matches!(err, EvalError::SortMismatch { .. }));
    }

    #[test]
    fn witness_mode_binds_outer_existential_sets() {
        let g = triangle();
        let f = Formula::parse(
            "(exists-V X (and (exists-v x (in-v x X)) (forall-v y (in-v y X))))",
        )
        .unwrap();
        let mut witness = BTreeMap::new();
        witness.insert("X".to_string(), Value::vertex_set(3, [0, 1, 2]));
        assert!(evaluate_with_witness(&g, &f, &BTreeMap::new(), &witness, &budget()).unwrap());
        witness.insert("X".to_string(), Value::vertex_set(3, [0]));
        assert!(!evaluate_with_witness(&g, &f, &BTreeMap::new(), &witness, &budget()).unwrap());
        // A name that is not an outermost existential set is refused.
        let mut bad = BTreeMap::new();
        bad.insert("Y".to_string(), Value::vertex_set(3, [0]));
        let err =
            evaluate_with_witness(&g, &f, &BTreeMap::new(), &bad, &budget()).unwrap_err();
        assert!(matches!(err, EvalError::NotOutermost(_)));
    }

    #[test]
    fn witness_soundness_spot_checks() {
        let g = make_grid(2, 2);
        let f = Formula::parse(
            "(exists-V X (forall-v x (forall-v y \
              (implies (and (in-v x X) (in-v y X)) (not (adj x y))))))",
        )
        .unwrap();
        // Diagonal of the grid is independent.
        let mut witness = BTreeMap::new();
        witness.insert("X".to_string(), Value::vertex_set(4, [0, 3]));
        let witnessed =
            evaluate_with_witness(&g, &f, &BTreeMap::new(), &witness, &budget()).unwrap();
        assert!(witnessed);
        assert!(evaluate(&g, &f, &BTreeMap::new(), &budget()).unwrap());
    }

    #[test]
    fn three_colourability_matches_the_oracle() {
        let f = formula_three_colourability();
        let mut cases: Vec<ColouredGraph> = vec![triangle(), make_grid(2, 2), make_grid(2, 3)];
        let mut k4 = ColouredGraph::plain(4);
        for u in 0..4 {
            for v in u + 1..4 {
                k4.add_edge(u, v).unwrap();
            }
        }
        cases.push(k4);
        // Odd wheel: centre joined to a 5-cycle, chromatic number 4.
        let mut wheel = ColouredGraph::plain(6);
        for i in 0..5 {
            wheel.add_edge(i, (i + 1) % 5).unwrap();
            wheel.add_edge(i, 5).unwrap();
        }
        cases.push(wheel);
        for g in &cases {
            let by_formula = evaluate(g, &f, &BTreeMap::new(), &budget()).unwrap();
            assert_eq!(by_formula, three_colourable_oracle(g));
        }
    }

    #[test]
    fn quantifier_duality_and_double_negation() {
        let g = make_grid(2, 3);
        let pairs = [
            ("(forall-v x (exists-v y (adj x y)))",
             "(not (exists-v x (not (exists-v y (adj x y)))))"),
            ("(exists-e e (ecolor B e))",
             "(not (forall-e e (not (ecolor B e))))"),
            ("(forall-V X (exists-v x (or (in-v x X) (not (in-v x X)))))",
             "(not (exists-V X (not (exists-v x (or (in-v x X) (not (in-v x X)))))))"),
        ];
        for (a, bsrc) in pairs {
            let fa = Formula::parse(a).unwrap();
            let fb = Formula::parse(bsrc).unwrap();
            let va = evaluate(&g, &fa, &BTreeMap::new(), &budget()).unwrap();
            let vb = evaluate(&g, &fb, &BTreeMap::new(), &budget()).unwrap();
            assert_eq!(va, vb, "{a} vs its dual");
        }
        let f = Formula::parse("(exists-v x (vcolor R x))").unwrap();
        let nn = Formula::parse("(not (not (exists-v x (vcolor R x))))").unwrap();
        assert_eq!(
            evaluate(&g, &f, &BTreeMap::new(), &budget()).unwrap(),
            evaluate(&g, &nn, &BTreeMap::new(), &budget()).unwrap()
        );
    }

    #[test]
    fn caps_stop_large_set_searches() {
        let g = make_grid(3, 4);
        // 2^12 vertex sets * 2^17 edge sets would be explored without a cap.
        let f = Formula::parse(
            "(exists-V X (exists-E F (and (exists-v x (in-v x X)) (exists-e e (in-e e F)) false)))",
        )
        .unwrap();
        let caps = Caps::new(10_000);
        let err = evaluate(&g, &f, &BTreeMap::new(), &caps.budget()).unwrap_err();
        assert!(matches!(err, EvalError::Capped(_)));
    }

    #[test]
    fn memoisation_reuses_quantified_subformulas() {
        // Without memoisation this nesting re-evaluates the inner
        // existential for each outer pair; with it, the inner node is
        // computed once per distinct binding of its free variables.
        let g = make_grid(3, 3);
        let f = Formula::parse(
            "(forall-v x (forall-v y (implies (adj x y) (exists-v z (adj y z)))))",
        )
        .unwrap();
        let caps = Caps::default();
        let b = caps.budget();
        assert!(evaluate(&g, &f, &BTreeMap::new(), &b).unwrap());
        // The inner exists has one free variable (y): at most n distinct
        // evaluations of its body, so the total work stays near-linear
        // in n^2 for the outer loops rather than n^3.
        assert!(b.spent() < 2_000, "spent {}", b.spent());
    }

    #[test]
    fn empty_graphs_and_empty_domains() {
        let g = ColouredGraph::plain(0);
        assert!(!eval_closed(&g, "(exists-v x true)"));
        assert!(eval_closed(&g, "(forall-v x false)"));
        // The empty set still exists.
        assert!(eval_closed(&g, "(exists-V X true)"));
        let g1 = ColouredGraph::plain(1);
        assert!(!eval_closed(&g1, "(exists-e e true)"));
        assert!(eval_closed(&g1, "(forall-e e false)"));
    }
}
