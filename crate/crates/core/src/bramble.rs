//! Brambles: families of pairwise touching connected vertex sets, their
//! exact order, hitting paths, and path-segment systems.
//!
//! A bramble element is a vertex set inducing a connected subgraph; two
//! elements touch when they share a vertex or an edge joins them. The
//! order of a bramble is the size of a smallest hitting set. Brambles of
//! order `k + 1` certify treewidth at least `k`, which is how they are
//! used here: as robust "highly connected" witnesses that survive the
//! passage to paths and walls.

use crate::caps::{CapExceeded, WorkBudget};
use crate::flow::max_vertex_disjoint_paths;
use crate::graph::{ColouredGraph, GraphError, Path};
use std::collections::BTreeSet;

/// Why a family of vertex sets fails to be a bramble.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BrambleViolation {
    EmptyElement(usize),
    VertexOutOfRange { element: usize, vertex: usize },
    DisconnectedElement(usize),
    NotTouching(usize, usize),
}

impl std::fmt::Display for BrambleViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BrambleViolation::EmptyElement(i) => write!(f, "element {i} is empty"),
            BrambleViolation::VertexOutOfRange { element, vertex } => {
                write!(f, "element {element} names vertex {vertex} outside the graph")
            }
            BrambleViolation::DisconnectedElement(i) => {
                write!(f, "element {i} does not induce a connected subgraph")
            }
            BrambleViolation::NotTouching(i, j) => {
                write!(f, "elements {i} and {j} neither intersect nor are joined by an edge")
            }
        }
    }
}

/// Check the bramble axioms, reporting every violation.
pub fn is_bramble(g: &ColouredGraph, elements: &[Vec<usize>]) -> Result<(), Vec<BrambleViolation>> {
    let mut violations = Vec::new();
    let mut sets: Vec<BTreeSet<usize>> = Vec::with_capacity(elements.len());
    for (i, el) in elements.iter().enumerate() {
        if el.is_empty() {
            violations.push(BrambleViolation::EmptyElement(i));
            sets.push(BTreeSet::new());
            continue;
        }
        let mut ok = true;
        for &v in el {
            if v >= g.n() {
                violations.push(BrambleViolation::VertexOutOfRange { element: i, vertex: v });
                ok = false;
            }
        }
        let set: BTreeSet<usize> = el.iter().copied().collect();
        if ok && !induces_connected(g, &set) {
            violations.push(BrambleViolation::DisconnectedElement(i));
        }
        sets.push(set);
    }
    for i in 0..sets.len() {
        for j in i + 1..sets.len() {
            if sets[i].is_empty() || sets[j].is_empty() {
                continue;
            }
            if !touch(g, &sets[i], &sets[j]) {
                violations.push(BrambleViolation::NotTouching(i, j));
            }
        }
    }
    if violations.is_empty() {
        Ok(())
    } else {
        Err(violations)
    }
}

fn induces_connected(g: &ColouredGraph, set: &BTreeSet<usize>) -> bool {
    let Some(&start) = set.iter().next() else { return false };
    let mut seen = BTreeSet::from([start]);
    let mut stack = vec![start];
    while let Some(v) = stack.pop() {
        for w in g.neighbours(v) {
            if set.contains(&w) && seen.insert(w) {
                stack.push(w);
            }
        }
    }
    seen.len() == set.len()
}

fn touch(g: &ColouredGraph, a: &BTreeSet<usize>, b: &BTreeSet<usize>) -> bool {
    if a.intersection(b).next().is_some() {
        return true;
    }
    a.iter().any(|&u| g.neighbours(u).any(|w| b.contains(&w)))
}

/// A validated bramble.
#[derive(Debug, Clone)]
pub struct Bramble {
    elements: Vec<BTreeSet<usize>>,
}

impl Bramble {
    pub fn new(g: &ColouredGraph, elements: Vec<Vec<usize>>) -> Result<Bramble, Vec<BrambleViolation>> {
        is_bramble(g, &elements)?;
        Ok(Bramble { elements: elements.into_iter().map(|e| e.into_iter().collect()).collect() })
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[BTreeSet<usize>] {
        &self.elements
    }

    /// The cross bramble of a grid-like arrangement: one element per
    /// (row, column) pair, the union of that row and column. For an
    /// `r x c` grid this is the standard order-(min(r,c) + 1) bramble.
    pub fn grid_crosses(rows: usize, cols: usize) -> Vec<Vec<usize>> {
        let mut elements = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                let mut el: Vec<usize> = (0..cols).map(|cc| r * cols + cc).collect();
                el.extend((0..rows).filter(|&rr| rr != r).map(|rr| rr * cols + c));
                elements.push(el);
            }
        }
        elements
    }
}

/// Exact bramble order: the size of a smallest vertex set meeting every
/// element, by branch and bound.
pub fn bramble_order(
    g: &ColouredGraph,
    bramble: &Bramble,
    budget: &WorkBudget,
) -> Result<usize, CapExceeded> {
    let _ = g;
    let elements = bramble.elements();
    if elements.is_empty() {
        return Ok(0);
    }
    // Greedy upper bound: repeatedly take the vertex covering the most
    // uncovered elements.
    let mut upper = 0usize;
    {
        let mut covered = vec![false; elements.len()];
        while covered.iter().any(|&c| !c) {
            budget.charge(elements.len() as u64)?;
            let mut counts: std::collections::BTreeMap<usize, usize> = Default::default();
            for (i, el) in elements.iter().enumerate() {
                if !covered[i] {
                    for &v in el {
                        *counts.entry(v).or_insert(0) += 1;
                    }
                }
            }
            let (&best, _) = counts.iter().max_by_key(|&(_, &c)| c).unwrap();
            for (i, el) in elements.iter().enumerate() {
                if el.contains(&best) {
                    covered[i] = true;
                }
            }
            upper += 1;
        }
    }
    let mut best = upper;
    let mut chosen: Vec<usize> = Vec::new();
    branch(elements, &mut chosen, 0, &mut best, budget)?;
    Ok(best)
}

/// Lower bound: a greedy packing of pairwise disjoint uncovered elements,
/// each of which needs its own hitter.
fn packing_bound(elements: &[BTreeSet<usize>], covered: &[bool]) -> usize {
    let mut used: BTreeSet<usize> = BTreeSet::new();
    let mut count = 0;
    let mut order: Vec<usize> = (0..elements.len()).filter(|&i| !covered[i]).collect();
    order.sort_by_key(|&i| elements[i].len());
    for i in order {
        if elements[i].iter().all(|v| !used.contains(v)) {
            used.extend(elements[i].iter().copied());
            count += 1;
        }
    }
    count
}

fn branch(
    elements: &[BTreeSet<usize>],
    chosen: &mut Vec<usize>,
    depth_cost: usize,
    best: &mut usize,
    budget: &WorkBudget,
) -> Result<(), CapExceeded> {
    budget.charge(1)?;
    let covered: Vec<bool> = elements
        .iter()
        .map(|el| chosen.iter().any(|v| el.contains(v)))
        .collect();
    if covered.iter().all(|&c| c) {
        *best = (*best).min(depth_cost);
        return Ok(());
    }
    if depth_cost + packing_bound(elements, &covered) >= *best {
        return Ok(());
    }
    // Branch on the smallest uncovered element: one of its vertices must
    // be chosen.
    let pivot = (0..elements.len())
        .filter(|&i| !covered[i])
        .min_by_key(|&i| elements[i].len())
        .unwrap();
    for &v in &elements[pivot] {
        chosen.push(v);
        branch(elements, chosen, depth_cost + 1, best, budget)?;
        chosen.pop();
    }
    Ok(())
}

/// A path meeting every element of the bramble, built greedily: keep a
/// path whose last vertex is the only path vertex inside the most
/// recently reached element, then walk to the next unreached element
/// through the union of the two (connected because elements touch). The
/// walk is the breadth-first shortest and therefore stops at the first
/// vertex of the new element, preserving the invariant.
pub fn hitting_path(
    g: &ColouredGraph,
    bramble: &Bramble,
    budget: &WorkBudget,
) -> Result<Path, CapExceeded> {
    assert!(!bramble.is_empty(), "hitting path of an empty bramble");
    let elements = bramble.elements();
    let first = &elements[0];
    let mut vertices: Vec<usize> = vec![*first.iter().next().unwrap()];
    let mut cur = 0usize;
    loop {
        let on_path: BTreeSet<usize> = vertices.iter().copied().collect();
        let next = (0..elements.len()).find(|&i| elements[i].is_disjoint(&on_path));
        let Some(next) = next else { break };
        // Shortest walk from the path's last vertex to the next element
        // inside the union of the current and next elements. Neighbours
        // are scanned in ascending order, so among shortest walks the
        // breadth-first tree picks a deterministic one.
        let allowed: BTreeSet<usize> =
            elements[cur].union(&elements[next]).copied().collect();
        let start = *vertices.last().unwrap();
        let mut prev: std::collections::BTreeMap<usize, usize> = Default::default();
        let mut queue = std::collections::VecDeque::from([start]);
        let mut seen = BTreeSet::from([start]);
        let mut reached = None;
        'bfs: while let Some(v) = queue.pop_front() {
            for w in g.neighbours(v) {
                budget.charge(1)?;
                if !allowed.contains(&w) || !seen.insert(w) {
                    continue;
                }
                prev.insert(w, v);
                if elements[next].contains(&w) {
                    reached = Some(w);
                    break 'bfs;
                }
                queue.push_back(w);
            }
        }
        let end = reached.expect("touching elements have a connecting walk");
        let mut walk = vec![end];
        while *walk.last().unwrap() != start {
            walk.push(prev[walk.last().unwrap()]);
        }
        walk.reverse();
        vertices.extend_from_slice(&walk[1..]);
        cur = next;
    }
    let path = Path::new(g, vertices).expect("greedy construction yields a path");
    debug_assert!(hits_all(&path, bramble));
    Ok(path)
}

/// Does the path meet every element?
pub fn hits_all(path: &Path, bramble: &Bramble) -> bool {
    let on_path: BTreeSet<usize> = path.vertices().iter().copied().collect();
    bramble.elements().iter().all(|el| !el.is_disjoint(&on_path))
}

/// Why a segment decomposition or connector system could not be built.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SystemError {
    #[error("bramble order {order} is below the required {required} (k * l)")]
    OrderTooLow { order: usize, required: usize },
    #[error("hitting path exhausted before {built} of {wanted} segments reached order {k}")]
    PathExhausted { built: usize, wanted: usize, k: usize },
    #[error("segment {index} cannot be widened to two vertices")]
    SegmentTooShort { index: usize },
    #[error("only {found} of {wanted} disjoint connectors between segments {i} and {j}")]
    TooFewConnectors { i: usize, j: usize, found: usize, wanted: usize },
    #[error(transparent)]
    Capped(#[from] CapExceeded),
    #[error("graph error: {0}")]
    Graph(String),
}

impl From<GraphError> for SystemError {
    fn from(e: GraphError) -> Self {
        SystemError::Graph(e.to_string())
    }
}

/// Split a prefix of the hitting path into `l` consecutive disjoint
/// segments, each controlling a sub-bramble of order at least `k`: the
/// elements that avoid everything before the segment but meet it. Cut
/// points are chosen minimally, and a segment that would end up with a
/// single vertex is widened one step to the right so every segment is a
/// real path with at least one edge.
pub fn segment_decomposition(
    g: &ColouredGraph,
    bramble: &Bramble,
    path: &Path,
    k: usize,
    l: usize,
    budget: &WorkBudget,
) -> Result<Vec<Path>, SystemError> {
    assert!(k >= 1 && l >= 1);
    let verts = path.vertices();
    let mut segments: Vec<Path> = Vec::with_capacity(l);
    let mut start = 0usize; // index into verts: first unused position
    for index in 0..l {
        // Find the minimal end such that the elements avoiding
        // verts[..start] but meeting verts[start..=end] form a bramble of
        // order at least k.
        let prefix: BTreeSet<usize> = verts[..start].iter().copied().collect();
        let alive: Vec<usize> = (0..bramble.len())
            .filter(|&i| bramble.elements()[i].is_disjoint(&prefix))
            .collect();
        let mut end = None;
        for t in start..verts.len() {
            budget.charge(1)?;
            let window: BTreeSet<usize> = verts[start..=t].iter().copied().collect();
            let members: Vec<BTreeSet<usize>> = alive
                .iter()
                .map(|&i| bramble.elements()[i].clone())
                .filter(|el| !el.is_disjoint(&window))
                .collect();
            if members.len() < k {
                continue;
            }
            let sub = Bramble { elements: members };
            if bramble_order(g, &sub, budget)? >= k {
                end = Some(t);
                break;
            }
        }
        let Some(mut end) = end else {
            return Err(SystemError::PathExhausted { built: index, wanted: l, k });
        };
        if end == start {
            // Widen single-vertex segments; the controlled sub-bramble
            // only grows with the window.
            if end + 1 >= verts.len() {
                return Err(SystemError::SegmentTooShort { index });
            }
            end += 1;
        }
        segments.push(Path::new(g, verts[start..=end].to_vec())?);
        start = end + 1;
    }
    Ok(segments)
}

/// A hitting path cut into segments together with, for every segment
/// pair, a family of pairwise vertex-disjoint connector paths.
#[derive(Debug, Clone)]
pub struct ReedWoodSystem {
    pub path: Path,
    pub segments: Vec<Path>,
    /// `connectors[idx]` holds the paths for pair `(i, j)`, `i < j`, in
    /// lexicographic pair order: idx = pair_index(i, j, l).
    pub connectors: Vec<Vec<Vec<usize>>>,
    pub k: usize,
}

/// Index of the unordered pair `(i, j)`, `i < j`, among all pairs of `l`.
pub fn pair_index(i: usize, j: usize, l: usize) -> usize {
    debug_assert!(i < j && j < l);
    i * l - i * (i + 1) / 2 + (j - i - 1)
}

/// Build the full system: hitting path, `l` segments each controlling
/// order `k`, and `k` vertex-disjoint connectors per segment pair. The
/// precondition is `order(bramble) >= k * l`; it is checked first and a
/// shortfall is reported rather than worked around.
pub fn reed_wood_system(
    g: &ColouredGraph,
    bramble: &Bramble,
    k: usize,
    l: usize,
    budget: &WorkBudget,
) -> Result<ReedWoodSystem, SystemError> {
    let order = bramble_order(g, bramble, budget)?;
    if order < k * l {
        return Err(SystemError::OrderTooLow { order, required: k * l });
    }
    let path = hitting_path(g, bramble, budget)?;
    let segments = segment_decomposition(g, bramble, &path, k, l, budget)?;
    let mut connectors = Vec::with_capacity(l * (l - 1) / 2);
    for i in 0..l {
        for j in i + 1..l {
            let a: Vec<usize> = segments[i].vertices().to_vec();
            let b: Vec<usize> = segments[j].vertices().to_vec();
            let paths = max_vertex_disjoint_paths(g, &a, &b, budget)?;
            if paths.len() < k {
                return Err(SystemError::TooFewConnectors { i, j, found: paths.len(), wanted: k });
            }
            connectors.push(paths.into_iter().take(k).collect());
        }
    }
    Ok(ReedWoodSystem { path, segments, connectors, k })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::caps::Caps;
    use crate::flow::verify_disjoint_paths;
    use crate::graph::make_grid;
    use crate::treewidth::treewidth_exact;

    fn budget() -> crate::caps::WorkBudget {
        Caps::default().budget()
    }

    fn complete(n: usize) -> ColouredGraph {
        let mut g = ColouredGraph::plain(n);
        for u in 0..n {
            for v in u + 1..n {
                g.add_edge(u, v).unwrap();
            }
        }
        g
    }

    #[test]
    fn crosses_form_a_bramble_of_known_order() {
        let g = make_grid(3, 3);
        let elements = Bramble::grid_crosses(3, 3);
        let bramble = Bramble::new(&g, elements).unwrap();
        assert_eq!(bramble.len(), 9);
        // Any full row hits all nine crosses, and two vertices always miss
        // some row and some column entirely, so the order is exactly 3.
        let order = bramble_order(&g, &bramble, &budget()).unwrap();
        assert_eq!(order, 3, "cross bramble of the 3x3 grid has order 3");
        assert!(order <= treewidth_exact(&g, &budget()).unwrap() + 1);
    }

    #[test]
    fn violations_are_reported_by_kind() {
        let g = make_grid(2, 3);
        // 0 1 2 / 3 4 5. {0, 5} is disconnected; {} is empty; {0},{5}
        // do not touch.
        let err = is_bramble(&g, &[vec![0, 5], vec![]]).unwrap_err();
        assert!(err.iter().any(|v| matches!(v, BrambleViolation::DisconnectedElement(0))));
        assert!(err.iter().any(|v| matches!(v, BrambleViolation::EmptyElement(1))));
        let err = is_bramble(&g, &[vec![0], vec![5]]).unwrap_err();
        assert!(err.iter().any(|v| matches!(v, BrambleViolation::NotTouching(0, 1))));
        let err = is_bramble(&g, &[vec![0, 99]]).unwrap_err();
        assert!(err
            .iter()
            .any(|v| matches!(v, BrambleViolation::VertexOutOfRange { element: 0, vertex: 99 })));
    }

    #[test]
    fn singletons_of_a_complete_graph() {
        let n = 7;
        let g = complete(n);
        let elements: Vec<Vec<usize>> = (0..n).map(|v| vec![v]).collect();
        let bramble = Bramble::new(&g, elements).unwrap();
        assert_eq!(bramble_order(&g, &bramble, &budget()).unwrap(), n);
        let path = hitting_path(&g, &bramble, &budget()).unwrap();
        assert!(hits_all(&path, &bramble));
        assert_eq!(path.vertices().len(), n);
    }

    #[test]
    fn hitting_path_touches_every_cross() {
        for (r, c) in [(3usize, 3usize), (3, 4), (4, 4)] {
            let g = make_grid(r, c);
            let bramble = Bramble::new(&g, Bramble::grid_crosses(r, c)).unwrap();
            let path = hitting_path(&g, &bramble, &budget()).unwrap();
            assert!(hits_all(&path, &bramble), "{r}x{c} grid");
            let order = bramble_order(&g, &bramble, &budget()).unwrap();
            assert!(path.vertices().len() >= order);
        }
    }

    #[test]
    fn order_lower_bound_from_treewidth_on_small_graphs() {
        // order(B) <= tw(G) + 1 for every bramble.
        let g = make_grid(2, 3);
        let tw = treewidth_exact(&g, &budget()).unwrap();
        let bramble = Bramble::new(&g, Bramble::grid_crosses(2, 3)).unwrap();
        assert!(bramble_order(&g, &bramble, &budget()).unwrap() <= tw + 1);
    }

    #[test]
    fn segments_control_sub_brambles() {
        let n = 12;
        let g = complete(n);
        let elements: Vec<Vec<usize>> = (0..n).map(|v| vec![v]).collect();
        let bramble = Bramble::new(&g, elements).unwrap();
        let path = hitting_path(&g, &bramble, &budget()).unwrap();
        let segments = segment_decomposition(&g, &bramble, &path, 3, 4, &budget()).unwrap();
        assert_eq!(segments.len(), 4);
        // Segments are consecutive and disjoint.
        let mut seen = BTreeSet::new();
        for s in &segments {
            assert!(s.len_edges() >= 1);
            for &v in s.vertices() {
                assert!(seen.insert(v));
            }
        }
        // Each segment sees at least 3 singleton elements.
        for s in &segments {
            let hits = (0..n).filter(|v| s.vertices().contains(v)).count();
            assert!(hits >= 3);
        }
    }

    #[test]
    fn reed_wood_on_a_grid() {
        let g = make_grid(4, 4);
        let bramble = Bramble::new(&g, Bramble::grid_crosses(4, 4)).unwrap();
        let sys = reed_wood_system(&g, &bramble, 2, 2, &budget()).unwrap();
        assert_eq!(sys.segments.len(), 2);
        let pair = &sys.connectors[pair_index(0, 1, 2)];
        assert_eq!(pair.len(), 2);
        let a: Vec<usize> = sys.segments[0].vertices().to_vec();
        let b: Vec<usize> = sys.segments[1].vertices().to_vec();
        assert_eq!(verify_disjoint_paths(&g, &a, &b, pair), Ok(()));
    }

    #[test]
    fn reed_wood_reports_low_order() {
        let g = make_grid(3, 3);
        let bramble = Bramble::new(&g, Bramble::grid_crosses(3, 3)).unwrap();
        // Order 3 < 2 * 16.
        match reed_wood_system(&g, &bramble, 2, 16, &budget()) {
            Err(SystemError::OrderTooLow { order: 3, required: 32 }) => {}
            other => panic!("expected an order shortfall, got {other:?}"),
        }
    }

    #[test]
    fn order_respects_caps() {
        let g = complete(10);
        let elements: Vec<Vec<usize>> = (0..10).map(|v| vec![v]).collect();
        let bramble = Bramble::new(&g, elements).unwrap();
        let caps = Caps::new(2);
        assert!(matches!(
            bramble_order(&g, &bramble, &caps.budget()),
            Err(CapExceeded { .. })
        ));
    }
}
