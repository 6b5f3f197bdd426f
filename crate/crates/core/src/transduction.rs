//! Set-parameterised transductions between classes of coloured graphs.
//!
//! A [`Transduction`] carves a new coloured graph out of a host graph
//! `A` once a tuple of edge sets is chosen: `k` vertex-defining sets
//! whose connected components become the image vertices, and `l`
//! auxiliary sets that the formulas may consult. Image edges are
//! encoded by host vertices: a witness formula selects the encoding
//! vertices, a class relation groups witnesses that encode the same
//! edge, and an incidence formula attaches each class to one component
//! per side. Colour formulas transfer vertex letters and the edge
//! colour into the image.
//!
//! Three views of the same data are kept in sync and cross-checked by
//! the tests: [`Transduction::apply`] builds the image combinatorially,
//! [`Transduction::translate`] rewrites a formula about the image into
//! a formula about the host, and [`Transduction::check_interpretation`]
//! verifies that both roads agree. [`wall_transduction`] packages the
//! wall-recognition formulas so that hosts carrying a pseudo-wall are
//! mapped to the subdivided wall they contain.
//!
//! Set quantifiers in translated formulas sweep every subset of the
//! host, so direct evaluation is a desk-scale affair; every operation
//! takes a [`Caps`] and reports an exceeded budget instead of guessing.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::caps::{CapExceeded, Caps, WorkBudget};
use crate::definability::build_wall_formulas;
use crate::graph::{ColouredGraph, GraphError, Signature, COLOUR_B, COLOUR_R};
use crate::logic::{
    evaluate, EvalError, Formula, FormulaBuilder, Node, NodeId, Sort, Value, VarId,
};

/// Distinguished free-variable name for the encoding vertex in witness,
/// incidence, class and edge-colour formulas.
pub const VAR_X: &str = "x";
/// Second encoding vertex in the class relation.
pub const VAR_Y: &str = "y";
/// First component argument of the incidence formula.
pub const VAR_P: &str = "P";
/// Second component argument of the incidence formula; also the
/// component argument of vertex-colour formulas.
pub const VAR_Q: &str = "Q";

/// Witness sets up to this size have their class relation verified by a
/// full pairwise matrix; larger sets fall back to per-witness batch
/// sweeps that keep each evaluation's memo warm.
const MATRIX_LIMIT: usize = 24;

/// Fraction of the cap spent probing the parameter formula during
/// validation. The probe is best effort: on large hosts the formula's
/// set quantifiers are unaffordable and the precondition stays with the
/// caller, which the report records.
const PROBE_DIVISOR: u64 = 8;

// ---------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------

/// A named breach of the instance contract: the parameter formula, the
/// equivalence requirement on the class relation, the one-pair
/// incidence requirement, or edge-colour containment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// The parameter formula is false on the given sets.
    ParameterFormula,
    /// The class relation misses a witness paired with itself.
    NotReflexive { pair: (usize, usize), vertex: usize },
    /// The class relation holds one way round but not the other.
    NotSymmetric { pair: (usize, usize), x: usize, y: usize },
    /// Two steps of the class relation do not compose.
    NotTransitive { pair: (usize, usize), x: usize, y: usize, z: usize },
    /// A witness is incident to `found` component pairs instead of
    /// exactly one.
    IncidencePairs { pair: (usize, usize), vertex: usize, found: usize },
    /// Two witnesses share a class but name different component pairs.
    IncidenceClass { pair: (usize, usize), vertex: usize, other: usize },
    /// An edge-colour formula holds on a vertex that is no witness.
    ColourContainment { pair: (usize, usize), colour: String, vertex: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let pair = |p: (usize, usize)| format!("pair ({}, {})", p.0 + 1, p.1 + 1);
        match self {
            Violation::ParameterFormula => {
                write!(f, "the parameter formula rejects the given sets")
            }
            Violation::NotReflexive { pair: p, vertex } => {
                write!(f, "class relation on {} is not reflexive at vertex {vertex}", pair(*p))
            }
            Violation::NotSymmetric { pair: p, x, y } => {
                write!(f, "class relation on {} is not symmetric at ({x}, {y})", pair(*p))
            }
            Violation::NotTransitive { pair: p, x, y, z } => {
                write!(f, "class relation on {} is not transitive at ({x}, {y}, {z})", pair(*p))
            }
            Violation::IncidencePairs { pair: p, vertex, found } => write!(
                f,
                "witness {vertex} on {} is incident to {found} component pairs, not one",
                pair(*p)
            ),
            Violation::IncidenceClass { pair: p, vertex, other } => write!(
                f,
                "witnesses {vertex} and {other} on {} share a class but not their components",
                pair(*p)
            ),
            Violation::ColourContainment { pair: p, colour, vertex } => write!(
                f,
                "edge colour {colour} on {} holds at vertex {vertex}, which is no witness",
                pair(*p)
            ),
        }
    }
}

fn describe(vs: &[Violation]) -> String {
    vs.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; ")
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TransductionError {
    /// The transduction itself is malformed: bad parameter names, a
    /// formula with stray free variables, an index out of range.
    #[error("malformed transduction: {0}")]
    Shape(String),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    /// The instance fails the contract; apply refuses to build.
    #[error("invalid instance: {}", describe(.0))]
    Invalid(Vec<Violation>),
    /// The formula uses a construct the translation does not cover.
    #[error("no translation for {0}")]
    Untranslatable(String),
    /// Two edge classes join the same pair of image vertices, which a
    /// simple graph cannot carry.
    #[error("image is not simple: two classes on pair ({}, {}) join one vertex pair", .pair.0 + 1, .pair.1 + 1)]
    NotSimple { pair: (usize, usize) },
    /// The textual form could not be read.
    #[error("transduction text: {0}")]
    Format(String),
}

impl From<CapExceeded> for TransductionError {
    fn from(c: CapExceeded) -> Self {
        TransductionError::Eval(EvalError::Capped(c))
    }
}

// ---------------------------------------------------------------------
// The transduction type
// ---------------------------------------------------------------------

/// The three formulas that define the image edges contributed by one
/// pair `(i, j)` of vertex-defining parameters.
///
/// Free variables beyond the parameter sets: `witness` sees the vertex
/// `x`; `incidence` sees `x` and the component sets `P` (side `i`) and
/// `Q` (side `j`); `same_class` sees the vertices `x` and `y`.
#[derive(Debug, Clone)]
pub struct EdgeRelation {
    pub witness: Formula,
    pub incidence: Formula,
    pub same_class: Formula,
}

/// A transduction between classes of coloured graphs: `k` edge-set
/// parameters whose components become vertices, `l` auxiliary edge-set
/// parameters, a parameter formula admitting assignments, and per-pair
/// edge, colour and incidence formulas. Built with
/// [`TransductionBuilder`]; immutable afterwards.
#[derive(Debug, Clone)]
pub struct Transduction {
    image_sig: Signature,
    host_sig: Signature,
    u_names: Vec<String>,
    x_names: Vec<String>,
    phi_u: Formula,
    relations: BTreeMap<(usize, usize), EdgeRelation>,
    edge_colours: BTreeMap<(usize, usize), BTreeMap<String, Formula>>,
    vertex_colours: Vec<BTreeMap<String, Formula>>,
}

impl Transduction {
    /// Number of vertex-defining parameters.
    pub fn k(&self) -> usize {
        self.u_names.len()
    }

    /// Number of auxiliary parameters.
    pub fn l(&self) -> usize {
        self.x_names.len()
    }

    pub fn vertex_param_names(&self) -> &[String] {
        &self.u_names
    }

    pub fn aux_param_names(&self) -> &[String] {
        &self.x_names
    }

    pub fn parameter_formula(&self) -> &Formula {
        &self.phi_u
    }

    pub fn relation(&self, i: usize, j: usize) -> Option<&EdgeRelation> {
        self.relations.get(&(i, j))
    }

    pub fn image_signature(&self) -> &Signature {
        &self.image_sig
    }

    pub fn host_signature(&self) -> &Signature {
        &self.host_sig
    }

    /// Vertex colours readable on components of parameter `i`.
    pub fn vertex_colour_names(&self, i: usize) -> Vec<&str> {
        self.vertex_colours.get(i).map_or(Vec::new(), |m| m.keys().map(|s| s.as_str()).collect())
    }

    /// Edge colours declared on at least one parameter pair.
    pub fn edge_colour_names(&self) -> BTreeSet<&str> {
        self.edge_colours.values().flat_map(|m| m.keys().map(|s| s.as_str())).collect()
    }

    /// Environment binding every parameter name to its edge set.
    pub fn parameter_env(
        &self,
        g: &ColouredGraph,
        u_sets: &[BTreeSet<usize>],
        x_sets: &[BTreeSet<usize>],
    ) -> BTreeMap<String, Value> {
        let m = g.m();
        let mut env = BTreeMap::new();
        for (name, set) in self.u_names.iter().zip(u_sets) {
            env.insert(name.clone(), Value::edge_set(m, set.iter().copied()));
        }
        for (name, set) in self.x_names.iter().zip(x_sets) {
            env.insert(name.clone(), Value::edge_set(m, set.iter().copied()));
        }
        env
    }

    fn check_arity(
        &self,
        g: &ColouredGraph,
        u_sets: &[BTreeSet<usize>],
        x_sets: &[BTreeSet<usize>],
    ) -> Result<(), TransductionError> {
        if u_sets.len() != self.k() || x_sets.len() != self.l() {
            return Err(TransductionError::Shape(format!(
                "expected {} vertex-defining and {} auxiliary sets, got {} and {}",
                self.k(),
                self.l(),
                u_sets.len(),
                x_sets.len()
            )));
        }
        for set in u_sets.iter().chain(x_sets) {
            if let Some(&e) = set.iter().find(|&&e| e >= g.m()) {
                return Err(TransductionError::Shape(format!(
                    "edge {e} is outside the host (limit {})",
                    g.m()
                )));
            }
        }
        Ok(())
    }
}

/// Step-by-step construction of a [`Transduction`].
#[derive(Debug)]
pub struct TransductionBuilder {
    image_sig: Signature,
    host_sig: Signature,
    u_names: Vec<String>,
    x_names: Vec<String>,
    phi_u: Option<Formula>,
    relations: BTreeMap<(usize, usize), EdgeRelation>,
    edge_colours: BTreeMap<(usize, usize), BTreeMap<String, Formula>>,
    vertex_colours: BTreeMap<usize, BTreeMap<String, Formula>>,
}

impl TransductionBuilder {
    pub fn new(image_sig: Signature, host_sig: Signature) -> Self {
        TransductionBuilder {
            image_sig,
            host_sig,
            u_names: Vec::new(),
            x_names: Vec::new(),
            phi_u: None,
            relations: BTreeMap::new(),
            edge_colours: BTreeMap::new(),
            vertex_colours: BTreeMap::new(),
        }
    }

    /// Names of the vertex-defining edge-set parameters, in order.
    pub fn vertex_params<I, S>(mut self, names: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.u_names = names.into_iter().map(Into::into).collect();
        self
    }

    /// Names of the auxiliary edge-set parameters, in order.
    pub fn aux_params<I, S>(mut self, names: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.x_names = names.into_iter().map(Into::into).collect();
        self
    }

    /// The formula admitting parameter assignments.
    pub fn parameter_formula(mut self, f: Formula) -> Self {
        self.phi_u = Some(f);
        self
    }

    /// Edge formulas for the parameter pair `(i, j)`, `i < j`, 0-based.
    pub fn edge_relation(mut self, i: usize, j: usize, r: EdgeRelation) -> Self {
        self.relations.insert((i, j), r);
        self
    }

    /// Edge-colour formula for pair `(i, j)`; sees the vertex `x`.
    pub fn edge_colour(mut self, i: usize, j: usize, colour: &str, f: Formula) -> Self {
        self.edge_colours.entry((i, j)).or_default().insert(colour.to_string(), f);
        self
    }

    /// Vertex-colour formula for components of parameter `i`; sees the
    /// component set as `P`.
    pub fn vertex_colour(mut self, i: usize, colour: &str, f: Formula) -> Self {
        self.vertex_colours.entry(i).or_default().insert(colour.to_string(), f);
        self
    }

    pub fn finish(self) -> Result<Transduction, TransductionError> {
        let shape = |msg: String| Err(TransductionError::Shape(msg));
        if self.u_names.is_empty() {
            return shape("at least one vertex-defining parameter is required".into());
        }
        let k = self.u_names.len();
        let reserved = [VAR_X, VAR_Y, VAR_P, VAR_Q, "Grp"];
        let mut seen = BTreeSet::new();
        for name in self.u_names.iter().chain(&self.x_names) {
            if name.is_empty()
                || name.contains(char::is_whitespace)
                || name.contains(['(', ')', '[', ']', '#'])
            {
                return shape(format!("parameter name {name:?} is not a usable variable name"));
            }
            if reserved.contains(&name.as_str()) {
                return shape(format!("parameter name {name} is reserved"));
            }
            if !seen.insert(name.clone()) {
                return shape(format!("parameter name {name} appears twice"));
            }
        }
        let params: BTreeMap<&str, Sort> = self
            .u_names
            .iter()
            .chain(&self.x_names)
            .map(|n| (n.as_str(), Sort::EdgeSet))
            .collect();
        let check = |f: &Formula, what: &str, extra: &[(&str, Sort)]| {
            for (name, sort) in f.free_variables() {
                let expected = extra
                    .iter()
                    .find(|(n, _)| *n == name)
                    .map(|&(_, s)| s)
                    .or_else(|| params.get(name).copied());
                match expected {
                    None => {
                        return Err(TransductionError::Shape(format!(
                            "{what} has stray free variable {name}"
                        )))
                    }
                    Some(s) if s != sort => {
                        return Err(TransductionError::Shape(format!(
                            "{what} uses {name} as a {} where a {} is expected",
                            sort.name(),
                            s.name()
                        )))
                    }
                    Some(_) => {}
                }
            }
            Ok(())
        };
        let Some(phi_u) = self.phi_u else {
            return shape("a parameter formula is required".into());
        };
        check(&phi_u, "the parameter formula", &[])?;
        for (&(i, j), r) in &self.relations {
            if !(i < j && j < k) {
                return shape(format!("pair ({i}, {j}) is not an ordered pair below {k}"));
            }
            let at = |part: &str| format!("the {part} formula of pair ({}, {})", i + 1, j + 1);
            check(&r.witness, &at("witness"), &[(VAR_X, Sort::Vertex)])?;
            check(
                &r.incidence,
                &at("incidence"),
                &[(VAR_X, Sort::Vertex), (VAR_P, Sort::EdgeSet), (VAR_Q, Sort::EdgeSet)],
            )?;
            check(
                &r.same_class,
                &at("class"),
                &[(VAR_X, Sort::Vertex), (VAR_Y, Sort::Vertex)],
            )?;
        }
        for (&(i, j), colours) in &self.edge_colours {
            if !(i < j && j < k) {
                return shape(format!("pair ({i}, {j}) is not an ordered pair below {k}"));
            }
            for (colour, f) in colours {
                if colour != COLOUR_B {
                    return shape(format!("{colour} is not an edge colour"));
                }
                let what = format!("the {colour} formula of pair ({}, {})", i + 1, j + 1);
                check(f, &what, &[(VAR_X, Sort::Vertex)])?;
            }
        }
        let mut vertex_colours = vec![BTreeMap::new(); k];
        for (i, colours) in self.vertex_colours {
            if i >= k {
                return shape(format!("vertex colour index {i} is out of range"));
            }
            for (colour, f) in colours {
                if colour != COLOUR_R && !self.image_sig.has_letter(&colour) {
                    return shape(format!("{colour} is not a vertex colour of the image"));
                }
                let what = format!("the {colour} formula of parameter {}", i + 1);
                check(&f, &what, &[(VAR_P, Sort::EdgeSet)])?;
                vertex_colours[i].insert(colour, f);
            }
        }
        Ok(Transduction {
            image_sig: self.image_sig,
            host_sig: self.host_sig,
            u_names: self.u_names,
            x_names: self.x_names,
            phi_u,
            relations: self.relations,
            edge_colours: self.edge_colours,
            vertex_colours,
        })
    }
}

// ---------------------------------------------------------------------
// Formula plumbing
// ---------------------------------------------------------------------

fn used_vars(f: &Formula) -> BTreeSet<VarId> {
    let mut used = BTreeSet::new();
    let mut visited = vec![false; f.node_count()];
    let mut stack = vec![f.root()];
    while let Some(id) = stack.pop() {
        if visited[id] {
            continue;
        }
        visited[id] = true;
        match f.node(id) {
            Node::Const(_) => {}
            Node::And(xs) | Node::Or(xs) => stack.extend(xs.iter().copied()),
            Node::Not(x) => stack.push(*x),
            Node::Exists(v, body) | Node::Forall(v, body) => {
                used.insert(*v);
                stack.push(*body);
            }
            Node::Adj(a, b)
            | Node::Inc(a, b)
            | Node::InV(a, b)
            | Node::InE(a, b)
            | Node::EqV(a, b)
            | Node::EqE(a, b) => {
                used.insert(*a);
                used.insert(*b);
            }
            Node::VColour(_, a) | Node::EColour(_, a) => {
                used.insert(*a);
            }
            Node::BAdj(_, a, b) => {
                used.insert(*a);
                used.insert(*b);
            }
            Node::SetAdj(s, a, b) => {
                used.insert(*s);
                used.insert(*a);
                used.insert(*b);
            }
        }
    }
    used
}

/// Rebuild a formula keeping only the free variables its tree actually
/// reads. Shared builders declare one block of free variables for a
/// whole family of formulas; dropping the unused ones here lets a
/// formula state its real interface.
pub fn prune_unused_frees(f: &Formula) -> Formula {
    let used = used_vars(f);
    let free_names: BTreeSet<&str> = f.free_variables().iter().map(|&(n, _)| n).collect();
    let mut b = FormulaBuilder::new();
    let mut vmap: BTreeMap<VarId, VarId> = BTreeMap::new();
    for v in 0..f.var_count() {
        if !used.contains(&v) {
            continue;
        }
        let info = f.var(v);
        let nv = if free_names.contains(info.name.as_str()) {
            b.free_var(&info.name, info.sort)
        } else {
            b.bound_var(&info.name, info.sort)
        };
        vmap.insert(v, nv);
    }
    let mut memo: BTreeMap<NodeId, NodeId> = BTreeMap::new();
    let root = copy_node(f, f.root(), &mut b, &vmap, &mut memo);
    b.finish(root)
}

fn copy_node(
    f: &Formula,
    id: NodeId,
    b: &mut FormulaBuilder,
    vmap: &BTreeMap<VarId, VarId>,
    memo: &mut BTreeMap<NodeId, NodeId>,
) -> NodeId {
    if let Some(&done) = memo.get(&id) {
        return done;
    }
    let var = |v: &VarId| vmap[v];
    let out = match f.node(id) {
        Node::Const(true) => b.tru(),
        Node::Const(false) => b.fls(),
        Node::And(xs) => {
            let ys: Vec<NodeId> = xs.iter().map(|&x| copy_node(f, x, b, vmap, memo)).collect();
            b.and(ys)
        }
        Node::Or(xs) => {
            let ys: Vec<NodeId> = xs.iter().map(|&x| copy_node(f, x, b, vmap, memo)).collect();
            b.or(ys)
        }
        Node::Not(x) => {
            let y = copy_node(f, *x, b, vmap, memo);
            b.not(y)
        }
        Node::Exists(v, body) => {
            let y = copy_node(f, *body, b, vmap, memo);
            b.exists(var(v), y)
        }
        Node::Forall(v, body) => {
            let y = copy_node(f, *body, b, vmap, memo);
            b.forall(var(v), y)
        }
        Node::Adj(x, y) => b.adj(var(x), var(y)),
        Node::Inc(x, e) => b.inc(var(x), var(e)),
        Node::InV(x, s) => b.in_v(var(x), var(s)),
        Node::InE(e, s) => b.in_e(var(e), var(s)),
        Node::EqV(x, y) => b.eq_v(var(x), var(y)),
        Node::EqE(x, y) => b.eq_e(var(x), var(y)),
        Node::VColour(c, x) => b.vcolour(c, var(x)),
        Node::EColour(c, e) => b.ecolour(c, var(e)),
        Node::BAdj(c, x, y) => b.badj(c, var(x), var(y)),
        Node::SetAdj(s, x, y) => b.setadj(var(s), var(x), var(y)),
    };
    memo.insert(id, out);
    out
}

/// Copy `f` into the builder, routing each free variable through `map`
/// and giving every bound variable a twin. The caller wires stored
/// formulas into a larger one this way.
fn splice(
    b: &mut FormulaBuilder,
    f: &Formula,
    map: &BTreeMap<String, VarId>,
) -> Result<NodeId, TransductionError> {
    let free_names: BTreeSet<&str> = f.free_variables().iter().map(|&(n, _)| n).collect();
    let used = used_vars(f);
    let mut vmap: BTreeMap<VarId, VarId> = BTreeMap::new();
    for v in 0..f.var_count() {
        if !used.contains(&v) {
            continue;
        }
        let info = f.var(v);
        let nv = if free_names.contains(info.name.as_str()) {
            match map.get(&info.name) {
                Some(&target) => target,
                None => {
                    return Err(TransductionError::Shape(format!(
                        "no binding for free variable {} while splicing",
                        info.name
                    )))
                }
            }
        } else {
            b.bound_var(&info.name, info.sort)
        };
        vmap.insert(v, nv);
    }
    let mut memo = BTreeMap::new();
    Ok(copy_node(f, f.root(), b, &vmap, &mut memo))
}

// ---------------------------------------------------------------------
// Instance analysis
// ---------------------------------------------------------------------

/// Connected components of the subgraph formed by an edge set, as
/// sorted edge lists ordered by smallest edge.
pub fn edge_components(g: &ColouredGraph, set: &BTreeSet<usize>) -> Vec<Vec<usize>> {
    let edges: Vec<usize> = set.iter().copied().collect();
    let mut parent: Vec<usize> = (0..edges.len()).collect();
    fn find(parent: &mut Vec<usize>, a: usize) -> usize {
        if parent[a] != a {
            let r = find(parent, parent[a]);
            parent[a] = r;
        }
        parent[a]
    }
    let mut at_vertex: BTreeMap<usize, usize> = BTreeMap::new();
    for (i, &e) in edges.iter().enumerate() {
        let (u, v) = g.endpoints(e);
        for w in [u, v] {
            if let Some(&first) = at_vertex.get(&w) {
                let (a, b) = (find(&mut parent, first), find(&mut parent, i));
                if a != b {
                    parent[a] = b;
                }
            } else {
                at_vertex.insert(w, i);
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, &e) in edges.iter().enumerate() {
        groups.entry(find(&mut parent, i)).or_default().push(e);
    }
    let mut comps: Vec<Vec<usize>> = groups.into_values().collect();
    comps.sort_by_key(|c| c[0]);
    comps
}

/// What validation found: the violations, and whether the parameter
/// formula itself could be evaluated within the probe budget. A capped
/// probe leaves that precondition with the caller.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    pub parameter_formula_verified: bool,
}

impl ValidationReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

struct PairData {
    pair: (usize, usize),
    /// Witness vertices, ascending.
    witnesses: Vec<usize>,
    /// For each witness, its unique (component of i, component of j)
    /// address when it has exactly one.
    address: BTreeMap<usize, (usize, usize)>,
    /// Classes as sorted member lists, ordered by smallest member.
    classes: Vec<Vec<usize>>,
}

struct Analysis {
    report: ValidationReport,
    /// Components per vertex-defining parameter.
    components: Vec<Vec<Vec<usize>>>,
    pairs: Vec<PairData>,
}

impl Transduction {
    fn analyse(
        &self,
        g: &ColouredGraph,
        u_sets: &[BTreeSet<usize>],
        x_sets: &[BTreeSet<usize>],
        caps: &Caps,
    ) -> Result<Analysis, TransductionError> {
        self.check_arity(g, u_sets, x_sets)?;
        let base_env = self.parameter_env(g, u_sets, x_sets);
        let mut violations: Vec<Violation> = Vec::new();

        // Best-effort probe of the parameter formula. Its set
        // quantifiers can be far beyond any budget on real hosts, so a
        // capped probe is recorded, not treated as failure.
        let probe = Caps::new((caps.max_work / PROBE_DIVISOR).max(1)).budget();
        let parameter_formula_verified = match evaluate(g, &self.phi_u, &base_env, &probe) {
            Ok(true) => true,
            Ok(false) => {
                violations.push(Violation::ParameterFormula);
                return Ok(Analysis {
                    report: ValidationReport { violations, parameter_formula_verified: true },
                    components: Vec::new(),
                    pairs: Vec::new(),
                });
            }
            Err(EvalError::Capped(_)) => false,
            Err(e) => return Err(e.into()),
        };

        let budget = caps.budget();
        let components: Vec<Vec<Vec<usize>>> =
            u_sets.iter().map(|s| edge_components(g, s)).collect();

        let mut pairs = Vec::new();
        let mut colour_pairs: BTreeSet<(usize, usize)> =
            self.edge_colours.keys().copied().collect();
        for (&(i, j), rel) in &self.relations {
            colour_pairs.remove(&(i, j));
            let data = self.analyse_pair(
                g,
                &base_env,
                &components,
                (i, j),
                rel,
                &budget,
                &mut violations,
            )?;
            self.check_colour_containment(
                g,
                &base_env,
                (i, j),
                &data.witnesses,
                &budget,
                &mut violations,
            )?;
            pairs.push(data);
        }
        // Colour formulas on pairs without an edge relation must hold
        // nowhere: such a pair contributes no witnesses at all.
        for pair in colour_pairs {
            self.check_colour_containment(g, &base_env, pair, &[], &budget, &mut violations)?;
        }
        Ok(Analysis {
            report: ValidationReport { violations, parameter_formula_verified },
            components,
            pairs,
        })
    }

    fn analyse_pair(
        &self,
        g: &ColouredGraph,
        base_env: &BTreeMap<String, Value>,
        components: &[Vec<Vec<usize>>],
        pair: (usize, usize),
        rel: &EdgeRelation,
        budget: &WorkBudget,
        violations: &mut Vec<Violation>,
    ) -> Result<PairData, TransductionError> {
        let (i, j) = pair;
        let comp_value = |comp: &[usize]| Value::edge_set(g.m(), comp.iter().copied());

        let mut witnesses = Vec::new();
        {
            let mut env = base_env.clone();
            for v in g.vertices() {
                env.insert(VAR_X.into(), Value::Vertex(v));
                if evaluate(g, &rel.witness, &env, budget)? {
                    witnesses.push(v);
                }
            }
        }

        // Incidence: each witness must name exactly one component pair.
        let mut address: BTreeMap<usize, (usize, usize)> = BTreeMap::new();
        {
            let mut env = base_env.clone();
            for &w in &witnesses {
                env.insert(VAR_X.into(), Value::Vertex(w));
                let mut found = Vec::new();
                for (ci, comp_i) in components[i].iter().enumerate() {
                    env.insert(VAR_P.into(), comp_value(comp_i));
                    for (cj, comp_j) in components[j].iter().enumerate() {
                        env.insert(VAR_Q.into(), comp_value(comp_j));
                        if evaluate(g, &rel.incidence, &env, budget)? {
                            found.push((ci, cj));
                        }
                    }
                }
                if found.len() == 1 {
                    address.insert(w, found[0]);
                } else {
                    violations.push(Violation::IncidencePairs {
                        pair,
                        vertex: w,
                        found: found.len(),
                    });
                }
                env.remove(VAR_P);
                env.remove(VAR_Q);
            }
        }

        let sim = |a: usize, bb: usize| -> Result<bool, TransductionError> {
            let mut env = base_env.clone();
            env.insert(VAR_X.into(), Value::Vertex(a));
            env.insert(VAR_Y.into(), Value::Vertex(bb));
            Ok(evaluate(g, &rel.same_class, &env, budget)?)
        };

        let mut classes: Vec<Vec<usize>>;
        if witnesses.len() <= MATRIX_LIMIT {
            // Small witness sets: the full relation matrix, checked as
            // an equivalence directly.
            let n = witnesses.len();
            let mut matrix = vec![vec![false; n]; n];
            for a in 0..n {
                for b in 0..n {
                    matrix[a][b] = sim(witnesses[a], witnesses[b])?;
                }
            }
            for (a, row) in matrix.iter().enumerate() {
                if !row[a] {
                    violations.push(Violation::NotReflexive { pair, vertex: witnesses[a] });
                }
            }
            'sym: for a in 0..n {
                for b in a + 1..n {
                    if matrix[a][b] != matrix[b][a] {
                        violations.push(Violation::NotSymmetric {
                            pair,
                            x: witnesses[a],
                            y: witnesses[b],
                        });
                        break 'sym;
                    }
                }
            }
            'trans: for a in 0..n {
                for b in 0..n {
                    if !matrix[a][b] {
                        continue;
                    }
                    for c in 0..n {
                        if matrix[b][c] && !matrix[a][c] {
                            violations.push(Violation::NotTransitive {
                                pair,
                                x: witnesses[a],
                                y: witnesses[b],
                                z: witnesses[c],
                            });
                            break 'trans;
                        }
                    }
                }
            }
            // Classes from the matrix; members must agree on their
            // component address.
            let mut assigned = vec![false; n];
            classes = Vec::new();
            for a in 0..n {
                if assigned[a] {
                    continue;
                }
                let mut class = Vec::new();
                for b in a..n {
                    if matrix[a][b] || matrix[b][a] {
                        if !assigned[b] {
                            class.push(witnesses[b]);
                            assigned[b] = true;
                        }
                        if address.get(&witnesses[a]) != address.get(&witnesses[b]) {
                            violations.push(Violation::IncidenceClass {
                                pair,
                                vertex: witnesses[a],
                                other: witnesses[b],
                            });
                        }
                    }
                }
                classes.push(class);
            }
        } else {
            // Large witness sets: group witnesses by component address,
            // verify the relation inside each group, and sweep for
            // stray relations leaving a group with one batched
            // evaluation per witness. A relation crossing groups links
            // witnesses with different addresses, which the contract
            // forbids, so it is reported against the incidence bullet.
            let mut groups: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
            for &w in &witnesses {
                if let Some(&addr) = address.get(&w) {
                    groups.entry(addr).or_default().push(w);
                }
            }
            for &w in &witnesses {
                if !sim(w, w)? {
                    violations.push(Violation::NotReflexive { pair, vertex: w });
                }
            }
            classes = Vec::new();
            for members in groups.values() {
                let n = members.len();
                let mut matrix = vec![vec![false; n]; n];
                for a in 0..n {
                    for b in 0..n {
                        matrix[a][b] = a == b || sim(members[a], members[b])?;
                    }
                }
                'sym2: for a in 0..n {
                    for b in a + 1..n {
                        if matrix[a][b] != matrix[b][a] {
                            violations.push(Violation::NotSymmetric {
                                pair,
                                x: members[a],
                                y: members[b],
                            });
                            break 'sym2;
                        }
                    }
                }
                'trans2: for a in 0..n {
                    for b in 0..n {
                        if !matrix[a][b] {
                            continue;
                        }
                        for c in 0..n {
                            if matrix[b][c] && !matrix[a][c] {
                                violations.push(Violation::NotTransitive {
                                    pair,
                                    x: members[a],
                                    y: members[b],
                                    z: members[c],
                                });
                                break 'trans2;
                            }
                        }
                    }
                }
                let mut assigned = vec![false; n];
                for a in 0..n {
                    if assigned[a] {
                        continue;
                    }
                    let mut class = Vec::new();
                    for b in a..n {
                        if (matrix[a][b] || matrix[b][a]) && !assigned[b] {
                            class.push(members[b]);
                            assigned[b] = true;
                        }
                    }
                    classes.push(class);
                }
            }
            classes.sort_by_key(|c| c[0]);

            // One evaluation per witness: anything related to it must
            // stay inside its own group.
            let escape = self.group_escape_formula(rel)?;
            let mut env = base_env.clone();
            for &w in &witnesses {
                let Some(&addr) = address.get(&w) else { continue };
                let group = &groups[&addr];
                env.insert(VAR_X.into(), Value::Vertex(w));
                env.insert(
                    "Grp".into(),
                    Value::vertex_set(g.n(), group.iter().copied()),
                );
                if !evaluate(g, &escape, &env, budget)? {
                    // Locate one offender to name it.
                    let mut other = None;
                    for y in g.vertices() {
                        if group.contains(&y) {
                            continue;
                        }
                        let mut env2 = base_env.clone();
                        env2.insert(VAR_X.into(), Value::Vertex(y));
                        if !evaluate(g, &rel.witness, &env2, budget)? {
                            continue;
                        }
                        if sim(w, y)? {
                            other = Some(y);
                            break;
                        }
                    }
                    violations.push(Violation::IncidenceClass {
                        pair,
                        vertex: w,
                        other: other.unwrap_or(w),
                    });
                }
            }
        }
        classes.retain(|c| !c.is_empty());
        Ok(PairData { pair, witnesses, address, classes })
    }

    /// `forall y ((witness(y) and class(x, y)) implies y in Grp)`:
    /// true when nothing related to `x` escapes its group. One
    /// evaluation sweeps all vertices, keeping the evaluator's memo
    /// warm across the sweep.
    fn group_escape_formula(
        &self,
        rel: &EdgeRelation,
    ) -> Result<Formula, TransductionError> {
        let mut b = FormulaBuilder::new();
        let mut map: BTreeMap<String, VarId> = BTreeMap::new();
        for name in self.u_names.iter().chain(&self.x_names) {
            map.insert(name.clone(), b.free_var(name, Sort::EdgeSet));
        }
        let x = b.free_var(VAR_X, Sort::Vertex);
        let grp = b.free_var("Grp", Sort::VertexSet);
        let y = b.bound_var("y0", Sort::Vertex);
        map.insert(VAR_X.into(), y);
        let wit_y = splice(&mut b, &rel.witness, &map)?;
        map.insert(VAR_X.into(), x);
        map.insert(VAR_Y.into(), y);
        let sim_xy = splice(&mut b, &rel.same_class, &map)?;
        let related = b.and(vec![wit_y, sim_xy]);
        let inside = b.in_v(y, grp);
        let body = b.implies(related, inside);
        let root = b.forall(y, body);
        Ok(b.finish(root))
    }

    fn check_colour_containment(
        &self,
        g: &ColouredGraph,
        base_env: &BTreeMap<String, Value>,
        pair: (usize, usize),
        witnesses: &[usize],
        budget: &WorkBudget,
        violations: &mut Vec<Violation>,
    ) -> Result<(), TransductionError> {
        let Some(colours) = self.edge_colours.get(&pair) else {
            return Ok(());
        };
        let witness_set: BTreeSet<usize> = witnesses.iter().copied().collect();
        let mut env = base_env.clone();
        for (colour, f) in colours {
            for v in g.vertices() {
                if witness_set.contains(&v) {
                    continue;
                }
                env.insert(VAR_X.into(), Value::Vertex(v));
                if evaluate(g, f, &env, budget)? {
                    violations.push(Violation::ColourContainment {
                        pair,
                        colour: colour.clone(),
                        vertex: v,
                    });
                    break;
                }
            }
        }
        Ok(())
    }

    /// Check an instance against the contract: the parameter formula
    /// is probed first (within an eighth of the cap), then the class
    /// relation must be an equivalence on the witnesses, each witness
    /// must be incident to exactly one component pair shared by its
    /// whole class, and edge-colour formulas must hold only on
    /// witnesses. An exceeded budget during the checks is an error,
    /// never a pass.
    pub fn validate_instance(
        &self,
        g: &ColouredGraph,
        u_sets: &[BTreeSet<usize>],
        x_sets: &[BTreeSet<usize>],
        caps: &Caps,
    ) -> Result<ValidationReport, TransductionError> {
        Ok(self.analyse(g, u_sets, x_sets, caps)?.report)
    }
}

// ---------------------------------------------------------------------
// Building the image
// ---------------------------------------------------------------------

/// One image vertex: a connected component of a vertex-defining
/// parameter, tagged by that parameter's index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImageVertex {
    pub param: usize,
    pub component: Vec<usize>,
}

/// One image edge: a class of encoding vertices, tagged by its pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImageEdge {
    pub pair: (usize, usize),
    pub members: Vec<usize>,
    /// Image vertex ids of the two endpoints.
    pub ends: (usize, usize),
}

/// The image graph together with the provenance of every vertex and
/// edge in the host.
#[derive(Debug, Clone)]
pub struct Image {
    pub graph: ColouredGraph,
    pub vertices: Vec<ImageVertex>,
    pub edges: Vec<ImageEdge>,
}

impl Transduction {
    /// Build the image and keep the provenance of each part.
    pub fn apply_detailed(
        &self,
        g: &ColouredGraph,
        u_sets: &[BTreeSet<usize>],
        x_sets: &[BTreeSet<usize>],
        caps: &Caps,
    ) -> Result<Image, TransductionError> {
        let analysis = self.analyse(g, u_sets, x_sets, caps)?;
        if !analysis.report.ok() {
            return Err(TransductionError::Invalid(analysis.report.violations));
        }
        let budget = caps.budget();
        let base_env = self.parameter_env(g, u_sets, x_sets);

        let mut vertices = Vec::new();
        let mut vertex_id: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        for (i, comps) in analysis.components.iter().enumerate() {
            for (ci, comp) in comps.iter().enumerate() {
                vertex_id.insert((i, ci), vertices.len());
                vertices.push(ImageVertex { param: i, component: comp.clone() });
            }
        }
        let mut graph = ColouredGraph::new(vertices.len(), self.image_sig.clone());

        // Vertex colours.
        for v in 0..vertices.len() {
            let part = &vertices[v];
            let Some(colours) = self.vertex_colours.get(part.param) else { continue };
            let mut env = base_env.clone();
            env.insert(
                VAR_P.into(),
                Value::edge_set(g.m(), part.component.iter().copied()),
            );
            for (colour, f) in colours {
                if evaluate(g, f, &env, &budget)? {
                    graph.add_vertex_colour(v, colour)?;
                }
            }
        }

        // Edges: one per class, joined by the class's component pair.
        let mut edges = Vec::new();
        for data in &analysis.pairs {
            let (i, j) = data.pair;
            let colours = self.edge_colours.get(&data.pair);
            for class in &data.classes {
                let addr = data.address[&class[0]];
                let u = vertex_id[&(i, addr.0)];
                let v = vertex_id[&(j, addr.1)];
                let eid = match graph.add_edge(u, v) {
                    Ok(eid) => eid,
                    Err(GraphError::ParallelEdge(..)) => {
                        return Err(TransductionError::NotSimple { pair: data.pair })
                    }
                    Err(e) => return Err(e.into()),
                };
                if let Some(colours) = colours {
                    let mut env = base_env.clone();
                    for (colour, f) in colours {
                        let mut holds = false;
                        for &w in class {
                            env.insert(VAR_X.into(), Value::Vertex(w));
                            if evaluate(g, f, &env, &budget)? {
                                holds = true;
                                break;
                            }
                        }
                        if holds {
                            graph.add_edge_colour(eid, colour)?;
                        }
                    }
                }
                edges.push(ImageEdge {
                    pair: data.pair,
                    members: class.clone(),
                    ends: (u, v),
                });
            }
        }
        Ok(Image { graph, vertices, edges })
    }

    /// The image graph alone. Validation failures surface as
    /// [`TransductionError::Invalid`].
    pub fn apply(
        &self,
        g: &ColouredGraph,
        u_sets: &[BTreeSet<usize>],
        x_sets: &[BTreeSet<usize>],
        caps: &Caps,
    ) -> Result<ColouredGraph, TransductionError> {
        Ok(self.apply_detailed(g, u_sets, x_sets, caps)?.graph)
    }
}

// ---------------------------------------------------------------------
// Translation
// ---------------------------------------------------------------------

/// How a variable of the source formula is carried over the host:
/// an individual or a set of image vertices becomes one edge set per
/// vertex-defining parameter; a set of image edges becomes one vertex
/// set per parameter pair.
enum Enc {
    Vertex(Vec<VarId>),
    VertexSet(Vec<VarId>),
    EdgeSet(BTreeMap<(usize, usize), VarId>),
}

struct Translator<'a> {
    t: &'a Transduction,
    b: FormulaBuilder,
    /// Parameter variables, vertex-defining first.
    params: Vec<VarId>,
    fresh: usize,
}

impl<'a> Translator<'a> {
    fn new(t: &'a Transduction, params_bound: bool) -> Translator<'a> {
        let mut b = FormulaBuilder::new();
        let params = t
            .u_names
            .iter()
            .chain(&t.x_names)
            .map(|n| {
                if params_bound {
                    b.bound_var(n, Sort::EdgeSet)
                } else {
                    b.free_var(n, Sort::EdgeSet)
                }
            })
            .collect();
        Translator { t, b, params, fresh: 0 }
    }

    fn name(&mut self, stem: &str) -> String {
        self.fresh += 1;
        format!("{stem}{}", self.fresh)
    }

    fn param_map(&self) -> BTreeMap<String, VarId> {
        self.t
            .u_names
            .iter()
            .chain(&self.t.x_names)
            .zip(&self.params)
            .map(|(n, &v)| (n.clone(), v))
            .collect()
    }

    fn nonempty_e(&mut self, set: VarId) -> NodeId {
        let e_name = self.name("ne");
        let e = self.b.bound_var(&e_name, Sort::Edge);
        let body = self.b.in_e(e, set);
        self.b.exists(e, body)
    }

    fn empty_e(&mut self, set: VarId) -> NodeId {
        let ne = self.nonempty_e(set);
        self.b.not(ne)
    }

    fn subset_e(&mut self, a: VarId, bb: VarId) -> NodeId {
        let e_name = self.name("se");
        let e = self.b.bound_var(&e_name, Sort::Edge);
        let ina = self.b.in_e(e, a);
        let inb = self.b.in_e(e, bb);
        let body = self.b.implies(ina, inb);
        self.b.forall(e, body)
    }

    fn set_eq_e(&mut self, a: VarId, bb: VarId) -> NodeId {
        let e_name = self.name("qe");
        let e = self.b.bound_var(&e_name, Sort::Edge);
        let ina = self.b.in_e(e, a);
        let inb = self.b.in_e(e, bb);
        let body = self.b.iff(ina, inb);
        self.b.forall(e, body)
    }

    fn share_vertex(&mut self, e: VarId, f: VarId) -> NodeId {
        let u_name = self.name("sv");
        let u = self.b.bound_var(&u_name, Sort::Vertex);
        let ue = self.b.inc(u, e);
        let uf = self.b.inc(u, f);
        let body = self.b.and(vec![ue, uf]);
        self.b.exists(u, body)
    }

    /// `set` is a union of connected components of `carrier`: every
    /// edge lies in the carrier, and any carrier edge touching the set
    /// belongs to it.
    fn union_of_components(&mut self, set: VarId, carrier: VarId) -> NodeId {
        let sub = self.subset_e(set, carrier);
        let e_name = self.name("uc");
        let e = self.b.bound_var(&e_name, Sort::Edge);
        let f_name = self.name("uc");
        let f = self.b.bound_var(&f_name, Sort::Edge);
        let es = self.b.in_e(e, set);
        let fc = self.b.in_e(f, carrier);
        let share = self.share_vertex(e, f);
        let reach = self.b.and(vec![es, fc, share]);
        let fs = self.b.in_e(f, set);
        let closed_body = self.b.implies(reach, fs);
        let inner = self.b.forall(f, closed_body);
        let closed = self.b.forall(e, inner);
        self.b.and(vec![sub, closed])
    }

    /// The edge set is connected: every nonempty subset closed under
    /// shared vertices inside it already covers it.
    fn connected_e(&mut self, set: VarId) -> NodeId {
        let z_name = self.name("cn");
        let z = self.b.bound_var(&z_name, Sort::EdgeSet);
        let nz = self.nonempty_e(z);
        let sub = self.subset_e(z, set);
        let e_name = self.name("cn");
        let e = self.b.bound_var(&e_name, Sort::Edge);
        let f_name = self.name("cn");
        let f = self.b.bound_var(&f_name, Sort::Edge);
        let ez = self.b.in_e(e, z);
        let fs = self.b.in_e(f, set);
        let share = self.share_vertex(e, f);
        let touch = self.b.and(vec![ez, fs, share]);
        let fz = self.b.in_e(f, z);
        let grow_body = self.b.implies(touch, fz);
        let grow_inner = self.b.forall(f, grow_body);
        let grow = self.b.forall(e, grow_inner);
        let covers = self.subset_e(set, z);
        let closed = self.b.and(vec![nz, sub, grow]);
        let body = self.b.implies(closed, covers);
        self.b.forall(z, body)
    }

    /// Guard hoisted after an individual-encoding binder: the set is
    /// empty or one whole component of its parameter. Cheap clauses
    /// come first so the evaluator discards junk sets early.
    fn empty_or_single(&mut self, set: VarId, param: usize) -> NodeId {
        let carrier = self.params[param];
        let empty = self.empty_e(set);
        let union = self.union_of_components(set, carrier);
        let nonempty = self.nonempty_e(set);
        let connected = self.connected_e(set);
        let single = self.b.and(vec![union, nonempty, connected]);
        self.b.or(vec![empty, single])
    }

    /// Exactly one part of an individual encoding is inhabited.
    fn exactly_one_nonempty(&mut self, parts: &[VarId]) -> NodeId {
        let mut options = Vec::new();
        for i in 0..parts.len() {
            let mut cl = vec![self.nonempty_e(parts[i])];
            for (j, &p) in parts.iter().enumerate() {
                if j != i {
                    cl.push(self.empty_e(p));
                }
            }
            options.push(self.b.and(cl));
        }
        self.b.or(options)
    }

    /// Guard for an edge-set encoding part on one pair: contained in
    /// the witnesses and closed under the class relation. Pairs without
    /// an edge relation admit only the empty set.
    fn edge_part_guard(
        &mut self,
        pair: (usize, usize),
        part: VarId,
    ) -> Result<NodeId, TransductionError> {
        let Some(rel) = self.t.relations.get(&pair) else {
            return Ok(self.empty_e(part));
        };
        let mut map = self.param_map();
        let w_name = self.name("eg");
        let w = self.b.bound_var(&w_name, Sort::Vertex);
        let inw = self.b.in_v(w, part);
        map.insert(VAR_X.into(), w);
        let wit = splice(&mut self.b, &rel.witness, &map)?;
        let sub_body = self.b.implies(inw, wit);
        let sub = self.b.forall(w, sub_body);

        let a_name = self.name("eg");
        let a = self.b.bound_var(&a_name, Sort::Vertex);
        let c_name = self.name("eg");
        let c = self.b.bound_var(&c_name, Sort::Vertex);
        let ina = self.b.in_v(a, part);
        map.insert(VAR_X.into(), a);
        map.insert(VAR_Y.into(), c);
        let sim = splice(&mut self.b, &rel.same_class, &map)?;
        let both = self.b.and(vec![ina, sim]);
        let inc_ = self.b.in_v(c, part);
        let closed_body = self.b.implies(both, inc_);
        let closed_in = self.b.forall(c, closed_body);
        let closed = self.b.forall(a, closed_in);
        Ok(self.b.and(vec![sub, closed]))
    }

    fn all_pairs(&self) -> Vec<(usize, usize)> {
        let k = self.t.k();
        let mut out = Vec::new();
        for i in 0..k {
            for j in i + 1..k {
                out.push((i, j));
            }
        }
        out
    }

    /// One disjunct of an adjacency-style atom: sides `i` (for the
    /// first argument) and `j` (for the second), joined through an
    /// encoding vertex accepted by `edge_formula` of the ordered pair.
    fn adjacency_disjunct(
        &mut self,
        xi: VarId,
        yj: VarId,
        i: usize,
        j: usize,
        edge_formula: &Formula,
        incidence: &Formula,
    ) -> Result<NodeId, TransductionError> {
        let nx = self.nonempty_e(xi);
        let ny = self.nonempty_e(yj);
        let w_name = self.name("ad");
        let w = self.b.bound_var(&w_name, Sort::Vertex);
        let mut map = self.param_map();
        map.insert(VAR_X.into(), w);
        let on_edge = splice(&mut self.b, edge_formula, &map)?;
        let (p, q) = if i < j { (xi, yj) } else { (yj, xi) };
        map.insert(VAR_P.into(), p);
        map.insert(VAR_Q.into(), q);
        let inc_ = splice(&mut self.b, incidence, &map)?;
        let body = self.b.and(vec![on_edge, inc_]);
        let joined = self.b.exists(w, body);
        Ok(self.b.and(vec![nx, ny, joined]))
    }

    fn tr(
        &mut self,
        f: &Formula,
        node: NodeId,
        env: &mut BTreeMap<VarId, Enc>,
    ) -> Result<NodeId, TransductionError> {
        let k = self.t.k();
        match f.node(node) {
            Node::Const(true) => Ok(self.b.tru()),
            Node::Const(false) => Ok(self.b.fls()),
            Node::And(xs) => {
                let xs = xs.clone();
                let mut ys = Vec::with_capacity(xs.len());
                for x in xs {
                    ys.push(self.tr(f, x, env)?);
                }
                Ok(self.b.and(ys))
            }
            Node::Or(xs) => {
                let xs = xs.clone();
                let mut ys = Vec::with_capacity(xs.len());
                for x in xs {
                    ys.push(self.tr(f, x, env)?);
                }
                Ok(self.b.or(ys))
            }
            Node::Not(x) => {
                let y = self.tr(f, *x, env)?;
                Ok(self.b.not(y))
            }
            Node::Exists(v, body) | Node::Forall(v, body) => {
                let is_exists = matches!(f.node(node), Node::Exists(..));
                let (v, body) = (*v, *body);
                let info = f.var(v).clone();
                match info.sort {
                    Sort::Edge => Err(TransductionError::Untranslatable(format!(
                        "a quantifier over the edge individual {}",
                        info.name
                    ))),
                    Sort::Vertex => {
                        let parts: Vec<VarId> = (0..k)
                            .map(|i| {
                                let n = format!("{}_{}", info.name, i + 1);
                                self.b.bound_var(&n, Sort::EdgeSet)
                            })
                            .collect();
                        env.insert(v, Enc::Vertex(parts.clone()));
                        let one = self.exactly_one_nonempty(&parts);
                        let inner = self.tr(f, body, env)?;
                        env.remove(&v);
                        let mut out = if is_exists {
                            self.b.and(vec![one, inner])
                        } else {
                            self.b.implies(one, inner)
                        };
                        for i in (0..k).rev() {
                            let guard = self.empty_or_single(parts[i], i);
                            out = if is_exists {
                                let g = self.b.and(vec![guard, out]);
                                self.b.exists(parts[i], g)
                            } else {
                                let g = self.b.implies(guard, out);
                                self.b.forall(parts[i], g)
                            };
                        }
                        Ok(out)
                    }
                    Sort::VertexSet => {
                        let parts: Vec<VarId> = (0..k)
                            .map(|i| {
                                let n = format!("{}_{}", info.name, i + 1);
                                self.b.bound_var(&n, Sort::EdgeSet)
                            })
                            .collect();
                        env.insert(v, Enc::VertexSet(parts.clone()));
                        let mut out = self.tr(f, body, env)?;
                        env.remove(&v);
                        for i in (0..k).rev() {
                            let guard = self.union_of_components(parts[i], self.params[i]);
                            out = if is_exists {
                                let g = self.b.and(vec![guard, out]);
                                self.b.exists(parts[i], g)
                            } else {
                                let g = self.b.implies(guard, out);
                                self.b.forall(parts[i], g)
                            };
                        }
                        Ok(out)
                    }
                    Sort::EdgeSet => {
                        let pairs = self.all_pairs();
                        let mut part_map = BTreeMap::new();
                        for &(i, j) in &pairs {
                            let n = format!("{}_{}_{}", info.name, i + 1, j + 1);
                            part_map.insert((i, j), self.b.bound_var(&n, Sort::VertexSet));
                        }
                        env.insert(v, Enc::EdgeSet(part_map.clone()));
                        let mut out = self.tr(f, body, env)?;
                        env.remove(&v);
                        for &(i, j) in pairs.iter().rev() {
                            let part = part_map[&(i, j)];
                            let guard = self.edge_part_guard((i, j), part)?;
                            out = if is_exists {
                                let g = self.b.and(vec![guard, out]);
                                self.b.exists(part, g)
                            } else {
                                let g = self.b.implies(guard, out);
                                self.b.forall(part, g)
                            };
                        }
                        Ok(out)
                    }
                }
            }
            Node::Adj(x, y) => {
                let ex = self.encoding(f, *x, env)?;
                let ey = self.encoding(f, *y, env)?;
                let (Enc::Vertex(xs), Enc::Vertex(ys)) = (ex, ey) else {
                    return Err(TransductionError::Untranslatable(
                        "an adjacency atom over non-vertex arguments".into(),
                    ));
                };
                let (xs, ys) = (xs.clone(), ys.clone());
                let mut options = Vec::new();
                for i in 0..k {
                    for j in 0..k {
                        if i == j {
                            continue;
                        }
                        let key = (i.min(j), i.max(j));
                        let Some(rel) = self.t.relations.get(&key) else { continue };
                        let rel = rel.clone();
                        options.push(self.adjacency_disjunct(
                            xs[i],
                            ys[j],
                            i,
                            j,
                            &rel.witness,
                            &rel.incidence,
                        )?);
                    }
                }
                Ok(self.b.or(options))
            }
            Node::BAdj(colour, x, y) => {
                let colour = colour.clone();
                let ex = self.encoding(f, *x, env)?;
                let ey = self.encoding(f, *y, env)?;
                let (Enc::Vertex(xs), Enc::Vertex(ys)) = (ex, ey) else {
                    return Err(TransductionError::Untranslatable(
                        "a coloured adjacency atom over non-vertex arguments".into(),
                    ));
                };
                let (xs, ys) = (xs.clone(), ys.clone());
                let mut options = Vec::new();
                for i in 0..k {
                    for j in 0..k {
                        if i == j {
                            continue;
                        }
                        let key = (i.min(j), i.max(j));
                        let Some(rel) = self.t.relations.get(&key) else { continue };
                        let Some(cf) =
                            self.t.edge_colours.get(&key).and_then(|m| m.get(&colour))
                        else {
                            continue;
                        };
                        let (cf, incidence) = (cf.clone(), rel.incidence.clone());
                        options.push(
                            self.adjacency_disjunct(xs[i], ys[j], i, j, &cf, &incidence)?,
                        );
                    }
                }
                Ok(self.b.or(options))
            }
            Node::SetAdj(s, x, y) => {
                let es = self.encoding(f, *s, env)?;
                let Enc::EdgeSet(parts) = es else {
                    return Err(TransductionError::Untranslatable(
                        "a set adjacency atom over a non-edge-set variable".into(),
                    ));
                };
                let parts = parts.clone();
                let ex = self.encoding(f, *x, env)?;
                let ey = self.encoding(f, *y, env)?;
                let (Enc::Vertex(xs), Enc::Vertex(ys)) = (ex, ey) else {
                    return Err(TransductionError::Untranslatable(
                        "a set adjacency atom over non-vertex arguments".into(),
                    ));
                };
                let (xs, ys) = (xs.clone(), ys.clone());
                let mut options = Vec::new();
                for i in 0..k {
                    for j in 0..k {
                        if i == j {
                            continue;
                        }
                        let key = (i.min(j), i.max(j));
                        let Some(rel) = self.t.relations.get(&key) else { continue };
                        let incidence = rel.incidence.clone();
                        let part = parts[&key];
                        let nx = self.nonempty_e(xs[i]);
                        let ny = self.nonempty_e(ys[j]);
                        let w_name = self.name("sa");
                        let w = self.b.bound_var(&w_name, Sort::Vertex);
                        let inw = self.b.in_v(w, part);
                        let mut map = self.param_map();
                        map.insert(VAR_X.into(), w);
                        let (p, q) = if i < j { (xs[i], ys[j]) } else { (ys[j], xs[i]) };
                        map.insert(VAR_P.into(), p);
                        map.insert(VAR_Q.into(), q);
                        let inc_ = splice(&mut self.b, &incidence, &map)?;
                        let body = self.b.and(vec![inw, inc_]);
                        let joined = self.b.exists(w, body);
                        options.push(self.b.and(vec![nx, ny, joined]));
                    }
                }
                Ok(self.b.or(options))
            }
            Node::VColour(colour, x) => {
                let colour = colour.clone();
                let ex = self.encoding(f, *x, env)?;
                let Enc::Vertex(xs) = ex else {
                    return Err(TransductionError::Untranslatable(
                        "a vertex colour atom over a non-vertex variable".into(),
                    ));
                };
                let xs = xs.clone();
                let mut options = Vec::new();
                for (i, &xi) in xs.iter().enumerate() {
                    let Some(cf) =
                        self.t.vertex_colours.get(i).and_then(|m| m.get(&colour))
                    else {
                        continue;
                    };
                    let cf = cf.clone();
                    let nx = self.nonempty_e(xi);
                    let mut map = self.param_map();
                    map.insert(VAR_P.into(), xi);
                    let holds = splice(&mut self.b, &cf, &map)?;
                    options.push(self.b.and(vec![nx, holds]));
                }
                Ok(self.b.or(options))
            }
            Node::EqV(x, y) => {
                let ex = self.encoding(f, *x, env)?;
                let ey = self.encoding(f, *y, env)?;
                let (Enc::Vertex(xs), Enc::Vertex(ys)) = (ex, ey) else {
                    return Err(TransductionError::Untranslatable(
                        "an equality atom over non-vertex arguments".into(),
                    ));
                };
                let (xs, ys) = (xs.clone(), ys.clone());
                let mut clauses = Vec::new();
                for i in 0..k {
                    clauses.push(self.set_eq_e(xs[i], ys[i]));
                }
                Ok(self.b.and(clauses))
            }
            Node::InV(x, s) => {
                let ex = self.encoding(f, *x, env)?;
                let es = self.encoding(f, *s, env)?;
                let (Enc::Vertex(xs), Enc::VertexSet(ss)) = (ex, es) else {
                    return Err(TransductionError::Untranslatable(
                        "a membership atom with unexpected argument sorts".into(),
                    ));
                };
                let (xs, ss) = (xs.clone(), ss.clone());
                let mut options = Vec::new();
                for i in 0..k {
                    let nx = self.nonempty_e(xs[i]);
                    let sub = self.subset_e(xs[i], ss[i]);
                    options.push(self.b.and(vec![nx, sub]));
                }
                Ok(self.b.or(options))
            }
            Node::Inc(..) => Err(TransductionError::Untranslatable(
                "a vertex-edge incidence atom (edge individuals are not encoded)".into(),
            )),
            Node::InE(..) => Err(TransductionError::Untranslatable(
                "an edge-membership atom (edge individuals are not encoded)".into(),
            )),
            Node::EqE(..) => Err(TransductionError::Untranslatable(
                "an edge equality atom (edge individuals are not encoded)".into(),
            )),
            Node::EColour(..) => Err(TransductionError::Untranslatable(
                "an edge colour atom (edge individuals are not encoded)".into(),
            )),
        }
    }

    fn encoding<'e>(
        &mut self,
        f: &Formula,
        v: VarId,
        env: &'e BTreeMap<VarId, Enc>,
    ) -> Result<&'e Enc, TransductionError> {
        env.get(&v).ok_or_else(|| {
            TransductionError::Shape(format!(
                "variable {} has no encoding; was it bound by an edge quantifier?",
                f.var(v).name
            ))
        })
    }
}

impl Transduction {
    /// Rewrite a formula about the image into a formula about the host.
    /// Quantifiers over image vertices become tuples of edge-set
    /// quantifiers constrained to single components, sets of image
    /// vertices become component-closed edge sets, sets of image edges
    /// become class-closed witness sets, and atoms go through the
    /// stored formulas. Free variables are encoded the same way with
    /// suffixed names; the parameters appear free in the result.
    /// Formulas involving edge individuals have no translation and
    /// name the offending construct.
    pub fn translate(&self, phi: &Formula) -> Result<Formula, TransductionError> {
        let mut tr = Translator::new(self, false);
        let mut env: BTreeMap<VarId, Enc> = BTreeMap::new();
        self.register_frees(phi, &mut tr, &mut env)?;
        let root = tr.tr(phi, phi.root(), &mut env)?;
        Ok(tr.b.finish(root))
    }

    /// The sentence asking for some satisfying parameter assignment
    /// whose image satisfies `phi`: the parameters are quantified
    /// existentially around the parameter formula and the translation.
    pub fn satisfiability_sentence(&self, phi: &Formula) -> Result<Formula, TransductionError> {
        if !phi.free_variables().is_empty() {
            return Err(TransductionError::Shape(
                "the satisfiability sentence needs a closed formula".into(),
            ));
        }
        let mut tr = Translator::new(self, true);
        let mut env: BTreeMap<VarId, Enc> = BTreeMap::new();
        let map = tr.param_map();
        let admitted = splice(&mut tr.b, &self.phi_u, &map)?;
        let body = tr.tr(phi, phi.root(), &mut env)?;
        let mut root = tr.b.and(vec![admitted, body]);
        let params = tr.params.clone();
        for &p in params.iter().rev() {
            root = tr.b.exists(p, root);
        }
        Ok(tr.b.finish(root))
    }

    fn register_frees(
        &self,
        phi: &Formula,
        tr: &mut Translator,
        env: &mut BTreeMap<VarId, Enc>,
    ) -> Result<(), TransductionError> {
        let free_names: BTreeSet<&str> = phi.free_variables().iter().map(|&(n, _)| n).collect();
        let k = self.k();
        let mut taken: BTreeSet<String> =
            self.u_names.iter().chain(&self.x_names).cloned().collect();
        let mut claim = |tr: &mut Translator, name: String, sort: Sort| {
            if !taken.insert(name.clone()) {
                return Err(TransductionError::Shape(format!(
                    "the encoded name {name} collides with another variable"
                )));
            }
            Ok(tr.b.free_var(&name, sort))
        };
        for v in 0..phi.var_count() {
            let info = phi.var(v);
            if !free_names.contains(info.name.as_str()) {
                continue;
            }
            let enc = match info.sort {
                Sort::Edge => {
                    return Err(TransductionError::Untranslatable(format!(
                        "the free edge individual {}",
                        info.name
                    )))
                }
                Sort::Vertex | Sort::VertexSet => {
                    let mut parts = Vec::with_capacity(k);
                    for i in 0..k {
                        parts.push(claim(
                            tr,
                            format!("{}_{}", info.name, i + 1),
                            Sort::EdgeSet,
                        )?);
                    }
                    if info.sort == Sort::Vertex {
                        Enc::Vertex(parts)
                    } else {
                        Enc::VertexSet(parts)
                    }
                }
                Sort::EdgeSet => {
                    let mut parts = BTreeMap::new();
                    for i in 0..k {
                        for j in i + 1..k {
                            parts.insert(
                                (i, j),
                                claim(
                                    tr,
                                    format!("{}_{}_{}", info.name, i + 1, j + 1),
                                    Sort::VertexSet,
                                )?,
                            );
                        }
                    }
                    Enc::EdgeSet(parts)
                }
            };
            env.insert(v, enc);
        }
        Ok(())
    }

    /// Evaluate `phi` both ways: translated on the host under the given
    /// sets, and directly on the image built from them. Returns whether
    /// the two verdicts agree. Every phase gets a fresh budget from
    /// `caps`; an exceeded budget is an error, leaving the question
    /// open rather than guessed.
    pub fn check_interpretation(
        &self,
        g: &ColouredGraph,
        u_sets: &[BTreeSet<usize>],
        x_sets: &[BTreeSet<usize>],
        phi: &Formula,
        caps: &Caps,
    ) -> Result<bool, TransductionError> {
        if !phi.free_variables().is_empty() {
            return Err(TransductionError::Shape(
                "interpretation checking needs a closed formula".into(),
            ));
        }
        let image = self.apply_detailed(g, u_sets, x_sets, caps)?;
        let direct = evaluate(&image.graph, phi, &BTreeMap::new(), &caps.budget())?;
        let translated = self.translate(phi)?;
        let env = self.parameter_env(g, u_sets, x_sets);
        let through_host = evaluate(g, &translated, &env, &caps.budget())?;
        Ok(direct == through_host)
    }
}

// ---------------------------------------------------------------------
// Image enumeration
// ---------------------------------------------------------------------

/// Everything [`Transduction::enumerate_images`] found: how many
/// assignments the parameter formula admits and one image per
/// isomorphism class, each with the first assignment that produced it.
#[derive(Debug, Clone)]
pub struct ImageEnumeration {
    pub satisfying: usize,
    pub images: Vec<ColouredGraph>,
    pub witnesses: Vec<(Vec<BTreeSet<usize>>, Vec<BTreeSet<usize>>)>,
}

/// Backtracking isomorphism over vertex colours, edge colours and
/// adjacency. Intended for the small images enumeration produces.
fn coloured_isomorphic(
    a: &ColouredGraph,
    b: &ColouredGraph,
    budget: &WorkBudget,
) -> Result<bool, CapExceeded> {
    if a.n() != b.n() || a.m() != b.m() {
        return Ok(false);
    }
    let n = a.n();
    let key = |g: &ColouredGraph, v: usize| (g.degree(v), g.vertex_colours(v).clone());
    let a_keys: Vec<_> = a.vertices().map(|v| key(a, v)).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&v| std::cmp::Reverse(a.degree(v)));
    let b_keys: Vec<_> = b.vertices().map(|v| key(b, v)).collect();
    {
        let mut xs = a_keys.clone();
        let mut ys = b_keys.clone();
        xs.sort();
        ys.sort();
        if xs != ys {
            return Ok(false);
        }
    }
    fn place(
        a: &ColouredGraph,
        b: &ColouredGraph,
        order: &[usize],
        at: usize,
        map: &mut Vec<Option<usize>>,
        used: &mut Vec<bool>,
        a_keys: &[(usize, BTreeSet<String>)],
        b_keys: &[(usize, BTreeSet<String>)],
        budget: &WorkBudget,
    ) -> Result<bool, CapExceeded> {
        if at == order.len() {
            return Ok(true);
        }
        let v = order[at];
        'cand: for w in b.vertices() {
            budget.charge(1)?;
            if used[w] || a_keys[v] != b_keys[w] {
                continue;
            }
            for u in a.neighbours(v) {
                if let Some(mu) = map[u] {
                    let Some(be) = b.edge_between(w, mu) else { continue 'cand };
                    let ae = a.edge_between(v, u).expect("neighbour edge");
                    if a.edge_colours(ae) != b.edge_colours(be) {
                        continue 'cand;
                    }
                }
            }
            // Mapped b-neighbours of w must all be neighbours of v.
            let mapped_deg = a.neighbours(v).filter(|&u| map[u].is_some()).count();
            let w_mapped = b.neighbours(w).filter(|&u2| {
                map.iter().any(|&mv| mv == Some(u2))
            });
            if w_mapped.count() != mapped_deg {
                continue 'cand;
            }
            map[v] = Some(w);
            used[w] = true;
            if place(a, b, order, at + 1, map, used, a_keys, b_keys, budget)? {
                return Ok(true);
            }
            map[v] = None;
            used[w] = false;
        }
        Ok(false)
    }
    let mut map = vec![None; n];
    let mut used = vec![false; n];
    place(a, b, &order, 0, &mut map, &mut used, &a_keys, &b_keys, budget)
}

impl Transduction {
    /// Walk every parameter assignment, keep those the parameter
    /// formula admits, and build one image per isomorphism class. The
    /// sweep refuses upfront when the assignment count alone exceeds
    /// the cap.
    pub fn enumerate_images(
        &self,
        g: &ColouredGraph,
        caps: &Caps,
    ) -> Result<ImageEnumeration, TransductionError> {
        let slots = self.k() + self.l();
        let bits = (g.m() * slots) as u32;
        if bits >= 63 || (1u64 << bits) > caps.max_work {
            return Err(CapExceeded { max: caps.max_work }.into());
        }
        let budget = caps.budget();
        let m = g.m();
        let mut out = ImageEnumeration {
            satisfying: 0,
            images: Vec::new(),
            witnesses: Vec::new(),
        };
        for mask in 0u64..(1u64 << bits) {
            budget.charge(1)?;
            let set_at = |slot: usize| -> BTreeSet<usize> {
                (0..m).filter(|e| mask >> (slot * m + e) & 1 == 1).collect()
            };
            let u_sets: Vec<BTreeSet<usize>> = (0..self.k()).map(set_at).collect();
            let x_sets: Vec<BTreeSet<usize>> =
                (self.k()..slots).map(set_at).collect();
            let env = self.parameter_env(g, &u_sets, &x_sets);
            if !evaluate(g, &self.phi_u, &env, &budget)? {
                continue;
            }
            out.satisfying += 1;
            let image = self.apply_detailed(g, &u_sets, &x_sets, caps)?;
            let mut known = false;
            for seen in &out.images {
                if coloured_isomorphic(&image.graph, seen, &budget)? {
                    known = true;
                    break;
                }
            }
            if !known {
                out.images.push(image.graph);
                out.witnesses.push((u_sets, x_sets));
            }
        }
        Ok(out)
    }
}

// ---------------------------------------------------------------------
// Textual form
// ---------------------------------------------------------------------

impl Transduction {
    /// Serialise: a header declaring the parameter counts, the image
    /// and host letters and the parameter names, then one named section
    /// per formula in the logic grammar.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str("transduction\n");
        out.push_str(&format!("k {}\n", self.k()));
        out.push_str(&format!("l {}\n", self.l()));
        out.push_str(&format!("image-letters {}\n", self.image_sig.sigma().join(" ")));
        out.push_str(&format!("host-letters {}\n", self.host_sig.sigma().join(" ")));
        out.push_str(&format!("vertex-params {}\n", self.u_names.join(" ")));
        out.push_str(&format!("aux-params {}\n", self.x_names.join(" ")));
        out.push_str("\n[parameter-formula]\n");
        out.push_str(&self.phi_u.print());
        out.push('\n');
        for (&(i, j), rel) in &self.relations {
            out.push_str(&format!("\n[edge {} {}]\n", self.u_names[i], self.u_names[j]));
            out.push_str(&format!("witness {}\n", rel.witness.print()));
            out.push_str(&format!("incidence {}\n", rel.incidence.print()));
            out.push_str(&format!("class {}\n", rel.same_class.print()));
        }
        for (&(i, j), colours) in &self.edge_colours {
            for (colour, f) in colours {
                out.push_str(&format!(
                    "\n[edge-colour {} {} {colour}]\n",
                    self.u_names[i], self.u_names[j]
                ));
                out.push_str(&f.print());
                out.push('\n');
            }
        }
        for (i, colours) in self.vertex_colours.iter().enumerate() {
            for (colour, f) in colours {
                out.push_str(&format!("\n[vertex-colour {} {colour}]\n", self.u_names[i]));
                out.push_str(&f.print());
                out.push('\n');
            }
        }
        out
    }

    /// Read a transduction back from its textual form.
    pub fn from_text(src: &str) -> Result<Transduction, TransductionError> {
        let bad = |msg: String| TransductionError::Format(msg);
        let mut lines = src.lines().peekable();
        loop {
            match lines.next() {
                Some(l) if l.trim().is_empty() => continue,
                Some(l) if l.trim() == "transduction" => break,
                Some(l) => return Err(bad(format!("expected the transduction header, got {l:?}"))),
                None => return Err(bad("empty input".into())),
            }
        }
        let mut k: Option<usize> = None;
        let mut l: Option<usize> = None;
        let mut image_letters: Option<Vec<String>> = None;
        let mut host_letters: Option<Vec<String>> = None;
        let mut u_names: Option<Vec<String>> = None;
        let mut x_names: Option<Vec<String>> = None;
        while let Some(line) = lines.peek() {
            let trimmed = line.trim();
            if trimmed.starts_with('[') {
                break;
            }
            let line = lines.next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let mut words = line.split_whitespace();
            let keyword = words.next().unwrap();
            let rest: Vec<String> = words.map(str::to_string).collect();
            match keyword {
                "k" => {
                    k = Some(
                        rest.first()
                            .and_then(|w| w.parse().ok())
                            .ok_or_else(|| bad("k needs a number".into()))?,
                    )
                }
                "l" => {
                    l = Some(
                        rest.first()
                            .and_then(|w| w.parse().ok())
                            .ok_or_else(|| bad("l needs a number".into()))?,
                    )
                }
                "image-letters" => image_letters = Some(rest),
                "host-letters" => host_letters = Some(rest),
                "vertex-params" => u_names = Some(rest),
                "aux-params" => x_names = Some(rest),
                other => return Err(bad(format!("unknown header line {other:?}"))),
            }
        }
        let u_names = u_names.ok_or_else(|| bad("missing vertex-params line".into()))?;
        let x_names = x_names.unwrap_or_default();
        if k != Some(u_names.len()) {
            return Err(bad(format!(
                "k is {k:?} but {} vertex params are named",
                u_names.len()
            )));
        }
        if l != Some(x_names.len()) {
            return Err(bad(format!("l is {l:?} but {} aux params are named", x_names.len())));
        }
        let sig = |letters: Option<Vec<String>>, what: &str| {
            let letters = letters.ok_or_else(|| bad(format!("missing {what} line")))?;
            Signature::new(letters).map_err(|e| bad(format!("{what}: {e}")))
        };
        let image_sig = sig(image_letters, "image-letters")?;
        let host_sig = sig(host_letters, "host-letters")?;
        let param_index = |name: &str| -> Result<usize, TransductionError> {
            u_names
                .iter()
                .position(|n| n == name)
                .ok_or_else(|| bad(format!("{name} is not a vertex-defining parameter")))
        };

        // Collect sections: header line plus body lines.
        let mut sections: Vec<(Vec<String>, Vec<String>)> = Vec::new();
        for line in lines {
            let trimmed = line.trim();
            if trimmed.is_empty() {
                continue;
            }
            if let Some(inner) = trimmed.strip_prefix('[') {
                let Some(inner) = inner.strip_suffix(']') else {
                    return Err(bad(format!("unterminated section header {trimmed:?}")));
                };
                sections
                    .push((inner.split_whitespace().map(str::to_string).collect(), Vec::new()));
            } else {
                let Some(last) = sections.last_mut() else {
                    return Err(bad(format!("text outside any section: {trimmed:?}")));
                };
                last.1.push(trimmed.to_string());
            }
        }
        let parse_formula = |text: &str, what: &str| {
            Formula::parse(text).map_err(|e| bad(format!("{what}: {e}")))
        };
        let mut builder = TransductionBuilder::new(image_sig, host_sig)
            .vertex_params(u_names.clone())
            .aux_params(x_names.clone());
        let mut saw_parameter = false;
        for (header, body) in sections {
            match header.first().map(String::as_str) {
                Some("parameter-formula") => {
                    saw_parameter = true;
                    builder = builder
                        .parameter_formula(parse_formula(&body.join("\n"), "parameter-formula")?);
                }
                Some("edge") => {
                    if header.len() != 3 {
                        return Err(bad("an edge section names two parameters".into()));
                    }
                    let i = param_index(&header[1])?;
                    let j = param_index(&header[2])?;
                    if i >= j {
                        return Err(bad(format!(
                            "edge pair ({}, {}) must follow declaration order",
                            header[1], header[2]
                        )));
                    }
                    let mut parts: BTreeMap<&str, String> = BTreeMap::new();
                    let mut current: Option<&str> = None;
                    for line in &body {
                        let (label, rest) = match line.split_once(char::is_whitespace) {
                            Some((w, r)) if ["witness", "incidence", "class"].contains(&w) => {
                                (Some(w), r)
                            }
                            _ => (None, line.as_str()),
                        };
                        if let Some(label) = label {
                            current = Some(match label {
                                "witness" => "witness",
                                "incidence" => "incidence",
                                _ => "class",
                            });
                            parts.entry(current.unwrap()).or_default().push_str(rest);
                        } else {
                            let Some(cur) = current else {
                                return Err(bad(format!(
                                    "edge section line {line:?} has no witness/incidence/class label"
                                )));
                            };
                            let buf = parts.entry(cur).or_default();
                            buf.push('\n');
                            buf.push_str(rest);
                        }
                    }
                    let get = |label: &str| -> Result<Formula, TransductionError> {
                        let text = parts
                            .get(label)
                            .ok_or_else(|| bad(format!("edge section misses {label}")))?;
                        parse_formula(text, label)
                    };
                    builder = builder.edge_relation(
                        i,
                        j,
                        EdgeRelation {
                            witness: get("witness")?,
                            incidence: get("incidence")?,
                            same_class: get("class")?,
                        },
                    );
                }
                Some("edge-colour") => {
                    if header.len() != 4 {
                        return Err(bad(
                            "an edge-colour section names two parameters and a colour".into(),
                        ));
                    }
                    let i = param_index(&header[1])?;
                    let j = param_index(&header[2])?;
                    let f = parse_formula(&body.join("\n"), "edge-colour")?;
                    builder = builder.edge_colour(i, j, &header[3], f);
                }
                Some("vertex-colour") => {
                    if header.len() != 3 {
                        return Err(bad(
                            "a vertex-colour section names a parameter and a colour".into(),
                        ));
                    }
                    let i = param_index(&header[1])?;
                    let f = parse_formula(&body.join("\n"), "vertex-colour")?;
                    builder = builder.vertex_colour(i, &header[2], f);
                }
                other => return Err(bad(format!("unknown section {other:?}"))),
            }
        }
        if !saw_parameter {
            return Err(bad("missing [parameter-formula] section".into()));
        }
        builder.finish()
    }
}

// ---------------------------------------------------------------------
// The wall transduction
// ---------------------------------------------------------------------

/// Package the wall-recognition formulas as a transduction: the nail
/// and cross families define the vertices, the spine, left and top
/// sets ride along as auxiliaries, crossings encode the edges, and the
/// colour readers transfer letters and endpoint marks. Applied to a
/// host carrying a pseudo-wall with its planted sets, the image is the
/// subdivided wall the host contains.
pub fn wall_transduction(sig: &Signature) -> Transduction {
    let bundle = build_wall_formulas(sig);
    let witness = prune_unused_frees(&bundle.crossing);
    let same_class = prune_unused_frees(&bundle.same_class);

    // The stored incidence formula takes one set; the edge contract
    // wants both sides at once.
    let incidence = {
        let mut b = FormulaBuilder::new();
        let x = b.free_var(VAR_X, Sort::Vertex);
        let p = b.free_var(VAR_P, Sort::EdgeSet);
        let q = b.free_var(VAR_Q, Sort::EdgeSet);
        let mut map = BTreeMap::new();
        map.insert(VAR_X.to_string(), x);
        map.insert(VAR_P.to_string(), p);
        let on_p = splice(&mut b, &bundle.incidence, &map).expect("incidence splice");
        map.insert(VAR_P.to_string(), q);
        let on_q = splice(&mut b, &bundle.incidence, &map).expect("incidence splice");
        let root = b.and(vec![on_p, on_q]);
        b.finish(root)
    };

    // A crossing's edge colour is read off its cross-family edge. Nail
    // edges belong to the spine and are blue on every valid host, so
    // reading those would paint every image edge.
    let blue = {
        let mut b = FormulaBuilder::new();
        let x = b.free_var(VAR_X, Sort::Vertex);
        let ps = b.free_var("Ps", Sort::EdgeSet);
        let qs = b.free_var("Qs", Sort::EdgeSet);
        let mut map = BTreeMap::new();
        map.insert(VAR_X.to_string(), x);
        map.insert("Ps".to_string(), ps);
        map.insert("Qs".to_string(), qs);
        let crossing = splice(&mut b, &witness, &map).expect("crossing splice");
        let e = b.bound_var("e0", Sort::Edge);
        let eq = b.in_e(e, qs);
        let xe = b.inc(x, e);
        let be = b.ecolour(COLOUR_B, e);
        let body = b.and(vec![eq, xe, be]);
        let on_blue = b.exists(e, body);
        let root = b.and(vec![crossing, on_blue]);
        b.finish(root)
    };

    let mut builder = TransductionBuilder::new(sig.clone(), sig.clone())
        .vertex_params(["Ps", "Qs"])
        .aux_params(["A", "L", "T"])
        .parameter_formula(bundle.phi_u.clone())
        .edge_relation(0, 1, EdgeRelation { witness, incidence, same_class })
        .edge_colour(0, 1, COLOUR_B, blue);
    for i in 0..2 {
        for (colour, f) in &bundle.colours {
            builder = builder.vertex_colour(i, colour, f.clone());
        }
    }
    builder.finish().expect("the wall transduction is well-shaped")
}


#[cfg(test)]
mod scratch {
    use super::tests::*;
    use super::*;
}
