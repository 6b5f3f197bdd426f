//! Coloured finite simple graphs, paths and disjoint path systems.
//!
//! Graphs carry a [`Signature`]: an ordered list of letter colours `sigma`
//! (at least two), plus the two reserved names `B` (an edge colour) and
//! `R` (a vertex colour). Vertex colours are drawn from `sigma ∪ {R}`,
//! edge colours from `{B}`. Vertices are `0..n`, edges are `0..m` in
//! insertion order; both ids are stable and appear verbatim in the text
//! format.

use std::collections::BTreeSet;
use std::fmt::Write as _;

/// Reserved edge colour name.
pub const COLOUR_B: &str = "B";
/// Reserved vertex colour name.
pub const COLOUR_R: &str = "R";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GraphError {
    #[error("vertex {0} out of range")]
    VertexOutOfRange(usize),
    #[error("edge {0} out of range")]
    EdgeOutOfRange(usize),
    #[error("self loop at vertex {0}")]
    SelfLoop(usize),
    #[error("parallel edge between {0} and {1}")]
    ParallelEdge(usize, usize),
    #[error("unknown colour {0:?}")]
    UnknownColour(String),
    #[error("colour {0:?} not allowed on a {1}")]
    ColourSort(String, &'static str),
    #[error("signature must list at least two distinct letters, none named B or R")]
    BadSignature,
    #[error("path is empty")]
    EmptyPath,
    #[error("path repeats vertex {0}")]
    PathRepeatsVertex(usize),
    #[error("vertices {0} and {1} are not adjacent")]
    NotAdjacent(usize, usize),
    #[error("paths {0} and {1} share vertex {2}")]
    PathsShareVertex(usize, usize, usize),
    #[error("path {0} has no edge; every path of a system needs at least one")]
    SingleVertexPathInSystem(usize),
    #[error("path appears in both systems")]
    DuplicatePathAcrossSystems,
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("subdivision length for edge {0} must be at least 1")]
    BadSubdivisionLength(usize),
}

/// Colour palette of a graph: the ordered letters plus reserved `B`, `R`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Signature {
    sigma: Vec<String>,
}

impl Signature {
    /// Two default letters, for graphs whose letter colours are unused.
    pub fn default_letters() -> Self {
        Signature::new(["C1", "C2"]).expect("default letters are valid")
    }

    pub fn new<I, S>(letters: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let sigma: Vec<String> = letters.into_iter().map(Into::into).collect();
        let mut seen = BTreeSet::new();
        if sigma.len() < 2 {
            return Err(GraphError::BadSignature);
        }
        for s in &sigma {
            if s == COLOUR_B || s == COLOUR_R || s.is_empty() || !seen.insert(s.clone()) {
                return Err(GraphError::BadSignature);
            }
            if s.contains(char::is_whitespace) || s.starts_with('#') {
                return Err(GraphError::BadSignature);
            }
        }
        Ok(Signature { sigma })
    }

    pub fn sigma(&self) -> &[String] {
        &self.sigma
    }

    pub fn has_letter(&self, name: &str) -> bool {
        self.sigma.iter().any(|s| s == name)
    }

    /// Position of a letter in the declared order.
    pub fn letter_index(&self, name: &str) -> Option<usize> {
        self.sigma.iter().position(|s| s == name)
    }

    fn check_vertex_colour(&self, name: &str) -> Result<(), GraphError> {
        if name == COLOUR_R || self.has_letter(name) {
            Ok(())
        } else if name == COLOUR_B {
            Err(GraphError::ColourSort(name.to_string(), "vertex"))
        } else {
            Err(GraphError::UnknownColour(name.to_string()))
        }
    }

    fn check_edge_colour(&self, name: &str) -> Result<(), GraphError> {
        if name == COLOUR_B {
            Ok(())
        } else if name == COLOUR_R || self.has_letter(name) {
            Err(GraphError::ColourSort(name.to_string(), "edge"))
        } else {
            Err(GraphError::UnknownColour(name.to_string()))
        }
    }
}

/// A finite simple graph with vertex and edge colour sets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColouredGraph {
    signature: Signature,
    n: usize,
    edges: Vec<(usize, usize)>,
    adj: Vec<Vec<(usize, usize)>>, // vertex -> (neighbour, edge id)
    vertex_colours: Vec<BTreeSet<String>>,
    edge_colours: Vec<BTreeSet<String>>,
}

impl ColouredGraph {
    pub fn new(n: usize, signature: Signature) -> Self {
        ColouredGraph {
            signature,
            n,
            edges: Vec::new(),
            adj: vec![Vec::new(); n],
            vertex_colours: vec![BTreeSet::new(); n],
            edge_colours: Vec::new(),
        }
    }

    /// Uncoloured graph over the default two-letter signature.
    pub fn plain(n: usize) -> Self {
        ColouredGraph::new(n, Signature::default_letters())
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn vertices(&self) -> std::ops::Range<usize> {
        0..self.n
    }

    pub fn edge_ids(&self) -> std::ops::Range<usize> {
        0..self.edges.len()
    }

    pub fn check_vertex(&self, v: usize) -> Result<(), GraphError> {
        if v < self.n {
            Ok(())
        } else {
            Err(GraphError::VertexOutOfRange(v))
        }
    }

    pub fn check_edge(&self, e: usize) -> Result<(), GraphError> {
        if e < self.edges.len() {
            Ok(())
        } else {
            Err(GraphError::EdgeOutOfRange(e))
        }
    }

    pub fn add_edge(&mut self, u: usize, v: usize) -> Result<usize, GraphError> {
        self.check_vertex(u)?;
        self.check_vertex(v)?;
        if u == v {
            return Err(GraphError::SelfLoop(u));
        }
        if self.edge_between(u, v).is_some() {
            return Err(GraphError::ParallelEdge(u, v));
        }
        let id = self.edges.len();
        self.edges.push((u.min(v), u.max(v)));
        self.adj[u].push((v, id));
        self.adj[v].push((u, id));
        self.edge_colours.push(BTreeSet::new());
        Ok(id)
    }

    /// Endpoints as stored: `(min, max)`.
    pub fn endpoints(&self, e: usize) -> (usize, usize) {
        self.edges[e]
    }

    pub fn edge_between(&self, u: usize, v: usize) -> Option<usize> {
        self.adj.get(u)?.iter().find(|&&(w, _)| w == v).map(|&(_, e)| e)
    }

    pub fn neighbours(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.adj[v].iter().map(|&(w, _)| w)
    }

    /// `(neighbour, edge id)` pairs at `v`.
    pub fn incident(&self, v: usize) -> &[(usize, usize)] {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn is_incident(&self, v: usize, e: usize) -> bool {
        let (a, b) = self.edges[e];
        a == v || b == v
    }

    pub fn other_endpoint(&self, e: usize, v: usize) -> usize {
        let (a, b) = self.edges[e];
        if a == v {
            b
        } else {
            a
        }
    }

    pub fn add_vertex_colour(&mut self, v: usize, name: &str) -> Result<(), GraphError> {
        self.check_vertex(v)?;
        self.signature.check_vertex_colour(name)?;
        self.vertex_colours[v].insert(name.to_string());
        Ok(())
    }

    pub fn add_edge_colour(&mut self, e: usize, name: &str) -> Result<(), GraphError> {
        self.check_edge(e)?;
        self.signature.check_edge_colour(name)?;
        self.edge_colours[e].insert(name.to_string());
        Ok(())
    }

    pub fn vertex_colours(&self, v: usize) -> &BTreeSet<String> {
        &self.vertex_colours[v]
    }

    pub fn edge_colours(&self, e: usize) -> &BTreeSet<String> {
        &self.edge_colours[e]
    }

    pub fn vertex_has_colour(&self, v: usize, name: &str) -> bool {
        self.vertex_colours[v].contains(name)
    }

    pub fn edge_has_colour(&self, e: usize, name: &str) -> bool {
        self.edge_colours[e].contains(name)
    }

    /// Letter colours (members of sigma) present on `v`, in sigma order.
    pub fn vertex_letters(&self, v: usize) -> Vec<&str> {
        self.signature
            .sigma()
            .iter()
            .filter(|s| self.vertex_colours[v].contains(s.as_str()))
            .map(|s| s.as_str())
            .collect()
    }

    /// Replace all colours by the given assignments. Entries missing from a
    /// map mean "no colours"; empty maps therefore produce a colour-free
    /// copy. Every name is validated against the signature.
    pub fn recolour(
        &self,
        vertex_map: &[(usize, Vec<String>)],
        edge_map: &[(usize, Vec<String>)],
    ) -> Result<ColouredGraph, GraphError> {
        let mut out = self.clone();
        for set in &mut out.vertex_colours {
            set.clear();
        }
        for set in &mut out.edge_colours {
            set.clear();
        }
        for (v, names) in vertex_map {
            out.check_vertex(*v)?;
            for name in names {
                out.add_vertex_colour(*v, name)?;
            }
        }
        for (e, names) in edge_map {
            out.check_edge(*e)?;
            for name in names {
                out.add_edge_colour(*e, name)?;
            }
        }
        Ok(out)
    }

    pub fn colour_free(&self) -> ColouredGraph {
        self.recolour(&[], &[]).expect("empty maps are valid")
    }

    pub fn connected(&self) -> bool {
        if self.n == 0 {
            return true;
        }
        let mut seen = vec![false; self.n];
        let mut stack = vec![0usize];
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = stack.pop() {
            for w in self.neighbours(v) {
                if !seen[w] {
                    seen[w] = true;
                    count += 1;
                    stack.push(w);
                }
            }
        }
        count == self.n
    }

    /// Connected components as sorted vertex lists.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.n];
        let mut out = Vec::new();
        for s in 0..self.n {
            if seen[s] {
                continue;
            }
            let mut comp = vec![s];
            seen[s] = true;
            let mut stack = vec![s];
            while let Some(v) = stack.pop() {
                for w in self.neighbours(v) {
                    if !seen[w] {
                        seen[w] = true;
                        comp.push(w);
                        stack.push(w);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    /// BFS distances from `src` inside the vertex set `allowed` (which must
    /// contain `src`). Unreachable vertices get `usize::MAX`.
    pub fn bfs_within(&self, src: usize, allowed: &[bool]) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.n];
        dist[src] = 0;
        let mut queue = std::collections::VecDeque::from([src]);
        while let Some(v) = queue.pop_front() {
            for w in self.neighbours(v) {
                if allowed[w] && dist[w] == usize::MAX {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    /// Serialise to the line-oriented text format.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "graph {} {}", self.n, self.m());
        let _ = writeln!(s, "sigma {}", self.signature.sigma().join(" "));
        for v in 0..self.n {
            let _ = write!(s, "v {}", v);
            for c in &self.vertex_colours[v] {
                let _ = write!(s, " {}", c);
            }
            let _ = writeln!(s);
        }
        for e in 0..self.m() {
            let (u, v) = self.edges[e];
            let _ = write!(s, "e {} {} {}", e, u, v);
            for c in &self.edge_colours[e] {
                let _ = write!(s, " {}", c);
            }
            let _ = writeln!(s);
        }
        s
    }

    /// Parse the text format:
    ///
    /// ```text
    /// # comment
    /// graph <n> <m>
    /// sigma <letter> <letter> ...
    /// v <id> [colour]...
    /// e <id> <u> <v> [colour]...
    /// ```
    ///
    /// The `graph` header must come first (comments aside); `sigma` may
    /// appear anywhere and defaults to `C1 C2`. Every vertex and edge id
    /// must be declared exactly once and ids are dense.
    pub fn parse(text: &str) -> Result<ColouredGraph, GraphError> {
        let err = |line: usize, msg: &str| GraphError::Parse { line, msg: msg.to_string() };
        let mut header: Option<(usize, usize)> = None;
        let mut sigma: Option<Signature> = None;
        let mut v_lines: Vec<(usize, usize, Vec<String>)> = Vec::new();
        let mut e_lines: Vec<(usize, usize, usize, usize, Vec<String>)> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split_whitespace();
            let head = parts.next().unwrap();
            match head {
                "graph" => {
                    if header.is_some() {
                        return Err(err(line_no, "duplicate graph header"));
                    }
                    let n = parts
                        .next()
                        .and_then(|t| t.parse().ok())
                        .ok_or_else(|| err(line_no, "graph header needs <n> <m>"))?;
                    let m = parts
                        .next()
                        .and_then(|t| t.parse().ok())
                        .ok_or_else(|| err(line_no, "graph header needs <n> <m>"))?;
                    header = Some((n, m));
                }
                "sigma" => {
                    if sigma.is_some() {
                        return Err(err(line_no, "duplicate sigma line"));
                    }
                    let letters: Vec<&str> = parts.collect();
                    sigma = Some(
                        Signature::new(letters)
                            .map_err(|_| err(line_no, "invalid sigma letters"))?,
                    );
                }
                "v" => {
                    if header.is_none() {
                        return Err(err(line_no, "v line before graph header"));
                    }
                    let id = parts
                        .next()
                        .and_then(|t| t.parse().ok())
                        .ok_or_else(|| err(line_no, "v line needs an id"))?;
                    let colours = parts.map(str::to_string).collect();
                    v_lines.push((line_no, id, colours));
                }
                "e" => {
                    if header.is_none() {
                        return Err(err(line_no, "e line before graph header"));
                    }
                    let mut num = || -> Result<usize, GraphError> {
                        parts
                            .next()
                            .and_then(|t| t.parse().ok())
                            .ok_or_else(|| err(line_no, "e line needs <id> <u> <v>"))
                    };
                    let id = num()?;
                    let u = num()?;
                    let v = num()?;
                    let colours = parts.map(str::to_string).collect();
                    e_lines.push((line_no, id, u, v, colours));
                }
                other => {
                    return Err(err(line_no, &format!("unknown directive {other:?}")));
                }
            }
        }
        let (n, m) = header.ok_or_else(|| err(0, "missing graph header"))?;
        let signature = sigma.unwrap_or_else(Signature::default_letters);
        let mut g = ColouredGraph::new(n, signature);
        let mut v_seen = vec![false; n];
        for (line_no, id, colours) in v_lines {
            if id >= n {
                return Err(err(line_no, "vertex id out of range"));
            }
            if v_seen[id] {
                return Err(err(line_no, "vertex declared twice"));
            }
            v_seen[id] = true;
            for c in colours {
                g.add_vertex_colour(id, &c)
                    .map_err(|e| err(line_no, &e.to_string()))?;
            }
        }
        if let Some(missing) = v_seen.iter().position(|&s| !s) {
            return Err(err(0, &format!("vertex {missing} never declared")));
        }
        if e_lines.len() != m {
            return Err(err(0, &format!("expected {m} edges, found {}", e_lines.len())));
        }
        e_lines.sort_by_key(|&(_, id, ..)| id);
        for (idx, (line_no, id, u, v, colours)) in e_lines.into_iter().enumerate() {
            if id != idx {
                return Err(err(line_no, "edge ids must be dense 0..m"));
            }
            let added = g.add_edge(u, v).map_err(|e| err(line_no, &e.to_string()))?;
            debug_assert_eq!(added, id);
            for c in colours {
                g.add_edge_colour(id, &c)
                    .map_err(|e| err(line_no, &e.to_string()))?;
            }
        }
        Ok(g)
    }
}

/// Grid on `rows * cols` vertices, ids row-major (`r * cols + c`). Edges:
/// all right-neighbour edges, then all down-neighbour edges, scanning
/// row-major.
pub fn make_grid(rows: usize, cols: usize) -> ColouredGraph {
    let mut g = ColouredGraph::plain(rows * cols);
    for r in 0..rows {
        for c in 0..cols {
            let v = r * cols + c;
            if c + 1 < cols {
                g.add_edge(v, v + 1).expect("grid edges are simple");
            }
            if r + 1 < rows {
                g.add_edge(v, v + cols).expect("grid edges are simple");
            }
        }
    }
    g
}

/// Vertex id in [`make_grid`]'s numbering.
pub fn grid_vertex(cols: usize, r: usize, c: usize) -> usize {
    r * cols + c
}

/// Replace every edge `e` by a path of `lengths[e]` edges (1 keeps the
/// edge). New interior vertices are appended after the original vertices,
/// in edge-id order; replacement edges inherit the colours of the edge
/// they subdivide and interior vertices carry no colours.
pub fn subdivide(g: &ColouredGraph, lengths: &[usize]) -> Result<ColouredGraph, GraphError> {
    if lengths.len() != g.m() {
        return Err(GraphError::EdgeOutOfRange(lengths.len()));
    }
    if let Some(e) = lengths.iter().position(|&l| l == 0) {
        return Err(GraphError::BadSubdivisionLength(e));
    }
    let extra: usize = lengths.iter().map(|&l| l - 1).sum();
    let mut out = ColouredGraph::new(g.n() + extra, g.signature().clone());
    for v in g.vertices() {
        for c in g.vertex_colours(v) {
            out.add_vertex_colour(v, c)?;
        }
    }
    let mut next = g.n();
    for e in g.edge_ids() {
        let (u, v) = g.endpoints(e);
        let mut chain = vec![u];
        for _ in 0..lengths[e] - 1 {
            chain.push(next);
            next += 1;
        }
        chain.push(v);
        for pair in chain.windows(2) {
            let id = out.add_edge(pair[0], pair[1])?;
            for c in g.edge_colours(e) {
                out.add_edge_colour(id, c)?;
            }
        }
    }
    Ok(out)
}

/// A path given by its vertex sequence; edges are looked up in the host.
/// A single vertex is a valid (edgeless) path.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Path {
    vertices: Vec<usize>,
    edges: Vec<usize>,
}

impl Path {
    pub fn new(g: &ColouredGraph, vertices: Vec<usize>) -> Result<Path, GraphError> {
        if vertices.is_empty() {
            return Err(GraphError::EmptyPath);
        }
        let mut seen = BTreeSet::new();
        for &v in &vertices {
            g.check_vertex(v)?;
            if !seen.insert(v) {
                return Err(GraphError::PathRepeatsVertex(v));
            }
        }
        let mut edges = Vec::with_capacity(vertices.len() - 1);
        for pair in vertices.windows(2) {
            let e = g
                .edge_between(pair[0], pair[1])
                .ok_or(GraphError::NotAdjacent(pair[0], pair[1]))?;
            edges.push(e);
        }
        Ok(Path { vertices, edges })
    }

    pub fn vertices(&self) -> &[usize] {
        &self.vertices
    }

    pub fn edges(&self) -> &[usize] {
        &self.edges
    }

    pub fn len_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn first(&self) -> usize {
        self.vertices[0]
    }

    pub fn last(&self) -> usize {
        *self.vertices.last().unwrap()
    }

    pub fn contains(&self, v: usize) -> bool {
        self.vertices.contains(&v)
    }

    pub fn vertex_set(&self) -> BTreeSet<usize> {
        self.vertices.iter().copied().collect()
    }

    /// Same underlying path regardless of direction.
    pub fn same_route(&self, other: &Path) -> bool {
        self.vertices == other.vertices
            || self.vertices.iter().rev().eq(other.vertices.iter())
    }

    pub fn reversed(&self) -> Path {
        let mut p = self.clone();
        p.vertices.reverse();
        p.edges.reverse();
        p
    }
}

/// A set of pairwise vertex-disjoint paths, each with at least one edge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathSystem {
    paths: Vec<Path>,
}

impl PathSystem {
    pub fn new(g: &ColouredGraph, paths: Vec<Path>) -> Result<PathSystem, GraphError> {
        let mut owner: Vec<Option<usize>> = vec![None; g.n()];
        for (i, p) in paths.iter().enumerate() {
            if p.len_edges() == 0 {
                return Err(GraphError::SingleVertexPathInSystem(i));
            }
            for &v in p.vertices() {
                g.check_vertex(v)?;
                if let Some(j) = owner[v] {
                    return Err(GraphError::PathsShareVertex(j, i, v));
                }
                owner[v] = Some(i);
            }
        }
        Ok(PathSystem { paths })
    }

    pub fn paths(&self) -> &[Path] {
        &self.paths
    }

    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    /// All vertices used by the system.
    pub fn vertex_set(&self) -> BTreeSet<usize> {
        self.paths.iter().flat_map(|p| p.vertices().iter().copied()).collect()
    }

    /// All edges used by the system.
    pub fn edge_set(&self) -> BTreeSet<usize> {
        self.paths.iter().flat_map(|p| p.edges().iter().copied()).collect()
    }

    /// Index of the path containing `v`, if any.
    pub fn path_of(&self, v: usize) -> Option<usize> {
        self.paths.iter().position(|p| p.contains(v))
    }
}

/// Which side of an intersection graph a vertex came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PathOrigin {
    P(usize),
    Q(usize),
}

/// Intersection graph of two disjoint path systems: one vertex per path
/// (`P` paths first, then `Q` paths), an edge whenever a `P` path and a
/// `Q` path share a host vertex. Within one system paths are disjoint, so
/// no other edges can arise. The same route may not appear in both
/// systems.
pub fn intersection_graph(
    _g: &ColouredGraph,
    ps: &PathSystem,
    qs: &PathSystem,
) -> Result<(ColouredGraph, Vec<PathOrigin>), GraphError> {
    for p in ps.paths() {
        for q in qs.paths() {
            if p.same_route(q) {
                return Err(GraphError::DuplicatePathAcrossSystems);
            }
        }
    }
    let np = ps.len();
    let nq = qs.len();
    let mut ig = ColouredGraph::plain(np + nq);
    let mut origins = Vec::with_capacity(np + nq);
    origins.extend((0..np).map(PathOrigin::P));
    origins.extend((0..nq).map(PathOrigin::Q));
    let q_sets: Vec<BTreeSet<usize>> = qs.paths().iter().map(Path::vertex_set).collect();
    for (i, p) in ps.paths().iter().enumerate() {
        let pset = p.vertex_set();
        for (j, qset) in q_sets.iter().enumerate() {
            if pset.intersection(qset).next().is_some() {
                ig.add_edge(i, np + j)?;
            }
        }
    }
    Ok((ig, origins))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_counts() {
        for (r, c) in [(1, 1), (2, 2), (3, 4), (5, 2)] {
            let g = make_grid(r, c);
            assert_eq!(g.n(), r * c);
            assert_eq!(g.m(), r * (c - 1) + c * (r - 1));
        }
    }

    #[test]
    fn grid_rejects_nothing_but_structure_is_simple() {
        let g = make_grid(3, 3);
        assert!(g.connected());
        assert_eq!(g.degree(grid_vertex(3, 1, 1)), 4);
        assert_eq!(g.degree(0), 2);
    }

    #[test]
    fn no_loops_or_parallels() {
        let mut g = ColouredGraph::plain(3);
        g.add_edge(0, 1).unwrap();
        assert_eq!(g.add_edge(1, 1), Err(GraphError::SelfLoop(1)));
        assert_eq!(g.add_edge(1, 0), Err(GraphError::ParallelEdge(1, 0)));
    }

    #[test]
    fn colour_sorts_enforced() {
        let mut g = ColouredGraph::plain(2);
        let e = g.add_edge(0, 1).unwrap();
        g.add_vertex_colour(0, "C1").unwrap();
        g.add_vertex_colour(0, "R").unwrap();
        g.add_edge_colour(e, "B").unwrap();
        assert!(matches!(g.add_vertex_colour(1, "B"), Err(GraphError::ColourSort(..))));
        assert!(matches!(g.add_edge_colour(e, "C1"), Err(GraphError::ColourSort(..))));
        assert!(matches!(g.add_vertex_colour(1, "Z"), Err(GraphError::UnknownColour(_))));
    }

    #[test]
    fn recolour_replaces_everything() {
        let mut g = ColouredGraph::plain(2);
        let e = g.add_edge(0, 1).unwrap();
        g.add_vertex_colour(0, "C1").unwrap();
        g.add_edge_colour(e, "B").unwrap();
        let h = g.recolour(&[(1, vec!["C2".into()])], &[]).unwrap();
        assert!(h.vertex_colours(0).is_empty());
        assert!(h.vertex_has_colour(1, "C2"));
        assert!(h.edge_colours(e).is_empty());
        let bare = g.colour_free();
        assert!(bare.vertex_colours(0).is_empty());
        assert!(bare.edge_colours(e).is_empty());
    }

    #[test]
    fn text_round_trip() {
        let mut g = ColouredGraph::new(3, Signature::new(["C1", "C2", "C3"]).unwrap());
        g.add_edge(0, 1).unwrap();
        let e = g.add_edge(1, 2).unwrap();
        g.add_vertex_colour(2, "C3").unwrap();
        g.add_vertex_colour(2, "R").unwrap();
        g.add_edge_colour(e, "B").unwrap();
        let text = g.to_text();
        let h = ColouredGraph::parse(&text).unwrap();
        assert_eq!(g, h);
    }

    #[test]
    fn parse_accepts_comments_and_default_sigma() {
        let text = "# a graph\ngraph 2 1\nv 0\nv 1\ne 0 0 1\n";
        let g = ColouredGraph::parse(text).unwrap();
        assert_eq!(g.n(), 2);
        assert_eq!(g.signature().sigma(), ["C1", "C2"]);
    }

    #[test]
    fn parse_rejects_malformed() {
        assert!(ColouredGraph::parse("v 0\n").is_err());
        assert!(ColouredGraph::parse("graph 1 0\n").is_err()); // v 0 missing
        assert!(ColouredGraph::parse("graph 2 1\nv 0\nv 1\n").is_err()); // edge count
        assert!(ColouredGraph::parse("graph 2 1\nv 0\nv 0\ne 0 0 1\n").is_err());
        assert!(ColouredGraph::parse("graph 2 1\nv 0\nv 1\ne 0 0 0\n").is_err());
        assert!(ColouredGraph::parse("graph 2 1\nv 0\nv 1\ne 1 0 1\n").is_err());
    }

    #[test]
    fn subdivision_inherits_edge_colours() {
        let mut g = ColouredGraph::plain(2);
        let e = g.add_edge(0, 1).unwrap();
        g.add_edge_colour(e, "B").unwrap();
        let s = subdivide(&g, &[3]).unwrap();
        assert_eq!(s.n(), 4);
        assert_eq!(s.m(), 3);
        for e in s.edge_ids() {
            assert!(s.edge_has_colour(e, "B"));
        }
        assert!(subdivide(&g, &[0]).is_err());
    }

    #[test]
    fn path_validation() {
        let g = make_grid(2, 2);
        assert!(Path::new(&g, vec![0, 1, 3]).is_ok());
        assert!(Path::new(&g, vec![0]).is_ok());
        assert!(Path::new(&g, vec![0, 3]).is_err());
        assert!(Path::new(&g, vec![0, 1, 0]).is_err());
        assert!(Path::new(&g, vec![]).is_err());
    }

    #[test]
    fn path_system_disjointness() {
        let g = make_grid(2, 3);
        let p1 = Path::new(&g, vec![0, 1]).unwrap();
        let p2 = Path::new(&g, vec![3, 4]).unwrap();
        assert!(PathSystem::new(&g, vec![p1.clone(), p2]).is_ok());
        let p3 = Path::new(&g, vec![1, 2]).unwrap();
        assert!(matches!(
            PathSystem::new(&g, vec![p1.clone(), p3]),
            Err(GraphError::PathsShareVertex(0, 1, 1))
        ));
        let single = Path::new(&g, vec![5]).unwrap();
        assert!(matches!(
            PathSystem::new(&g, vec![single]),
            Err(GraphError::SingleVertexPathInSystem(0))
        ));
    }

    #[test]
    fn intersection_graph_basic() {
        // Two P paths crossing one Q path in a 3x3 grid.
        let g = make_grid(3, 3);
        let p = PathSystem::new(
            &g,
            vec![Path::new(&g, vec![0, 1, 2]).unwrap(), Path::new(&g, vec![6, 7, 8]).unwrap()],
        )
        .unwrap();
        let q = PathSystem::new(&g, vec![Path::new(&g, vec![2, 5, 8]).unwrap()]).unwrap();
        let (ig, origins) = intersection_graph(&g, &p, &q).unwrap();
        assert_eq!(ig.n(), 3);
        assert_eq!(ig.m(), 2);
        assert_eq!(origins[0], PathOrigin::P(0));
        assert_eq!(origins[2], PathOrigin::Q(0));
        assert!(ig.edge_between(0, 2).is_some());
        assert!(ig.edge_between(1, 2).is_some());
        assert!(ig.edge_between(0, 1).is_none());
    }

    #[test]
    fn intersection_graph_rejects_shared_route() {
        let g = make_grid(1, 4);
        let p = PathSystem::new(&g, vec![Path::new(&g, vec![0, 1]).unwrap()]).unwrap();
        let q = PathSystem::new(&g, vec![Path::new(&g, vec![1, 0]).unwrap()]).unwrap();
        assert_eq!(
            intersection_graph(&g, &p, &q).unwrap_err(),
            GraphError::DuplicatePathAcrossSystems
        );
    }
}
