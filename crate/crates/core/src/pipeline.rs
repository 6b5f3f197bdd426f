//! From a graph with a high-order bramble to a coloured pseudo-wall.
//!
//! The construction follows the path–segment–connector route: a path
//! hitting every bramble element is cut into as many segments as the
//! target wall has vertices, each segment still controlling enough of
//! the bramble; flows between segment pairs supply connector paths; an
//! independent transversal picks one clean connector per wall edge; and
//! the result is painted with the marker colours and the word.
//!
//! When the word is long enough and the host contains a large enough
//! clique minor, the clique route is taken instead: branch sets become
//! nails directly and the result is a complex pseudo-wall. Every
//! outcome is re-checked by the pseudo-wall validators before it is
//! returned, and every failure names the stage that could not be
//! completed.

use crate::bramble::{pair_index, reed_wood_system, Bramble, SystemError};
use crate::caps::{CapExceeded, Search, WorkBudget};
use crate::graph::{ColouredGraph, GraphError, Path, COLOUR_B, COLOUR_R};
use crate::minor::{find_clique_minor, independent_transversal};
use crate::pseudowall::{validate_complex, validate_simple, ComplexPseudoWall, PseudoWall};
use crate::topo::make_elementary_wall;
use std::collections::BTreeSet;
use thiserror::Error;

/// Vertices of the elementary wall of the given order.
pub fn wall_vertex_count(order: usize) -> usize {
    2 * order * order + 4 * order
}

/// How many vertex-disjoint connectors the construction requests per
/// segment pair. Three, because a wall vertex has degree at most three,
/// so three choices per incident wall edge leave the transversal room.
pub const CONNECTORS_PER_PAIR: usize = 3;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    System(#[from] SystemError),
    #[error("connector selection is inconclusive: {0}")]
    Transversal(String),
    #[error("assembly failed: {0}")]
    Assembly(String),
    #[error(transparent)]
    Capped(#[from] CapExceeded),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

impl PipelineError {
    /// True when the failure is a work cap rather than a conclusion.
    pub fn is_capped(&self) -> bool {
        matches!(
            self,
            PipelineError::Capped(_) | PipelineError::System(SystemError::Capped(_))
        )
    }
}

/// A successfully built pseudo-wall, either kind, on a repainted copy
/// of the host.
#[derive(Debug, Clone)]
pub enum WallCase {
    Simple { graph: ColouredGraph, wall: PseudoWall },
    Complex { graph: ColouredGraph, wall: ComplexPseudoWall },
}

/// Build a pseudo-wall of order `|word|^power` encoding `word` in a
/// host with a bramble of order at least `3 * wall_vertex_count(order)`.
/// Hosts with a clique minor large enough for the clique route (and a
/// word of at least three letters) take that route first; everything
/// else goes through the path-and-connector construction.
pub fn build_pseudo_wall(
    g: &ColouredGraph,
    bramble: &Bramble,
    word: &[String],
    power: u32,
    budget: &WorkBudget,
) -> Result<WallCase, PipelineError> {
    if word.is_empty() {
        return Err(GraphError::Parameter("the word must not be empty".into()).into());
    }
    for letter in word {
        if !g.signature().has_letter(letter) {
            return Err(GraphError::UnknownColour(letter.clone()).into());
        }
    }
    if power == 0 {
        return Err(GraphError::Parameter("the power must be at least 1".into()).into());
    }
    let order = word
        .len()
        .checked_pow(power)
        .filter(|&m| m <= 64)
        .ok_or_else(|| GraphError::Parameter("order above 64 is not supported".into()))?;

    // Clique route. The check is free when the host is clearly too
    // small: the minor search refuses before spending any budget.
    if word.len() >= 3 {
        let complex_order = word.len() - 1;
        let groups_needed = wall_vertex_count(complex_order) + 2;
        match find_clique_minor(g, 4 * groups_needed, budget) {
            Search::Found(sets) => {
                let groups: Vec<Vec<usize>> = sets
                    .chunks(4)
                    .map(|c| c.iter().flatten().copied().collect())
                    .collect();
                match assemble_complex_wall(g, &groups, word, budget) {
                    Ok((graph, wall)) => return Ok(WallCase::Complex { graph, wall }),
                    Err(e) if e.is_capped() => return Err(e),
                    // An assembly that does not come together is not a
                    // verdict on the host; try the path route instead.
                    Err(_) => {}
                }
            }
            Search::Exhausted => {}
            Search::Capped => return Err(CapExceeded { max: budget.max() }.into()),
        }
    }

    let l = wall_vertex_count(order);
    let sys = reed_wood_system(g, bramble, CONNECTORS_PER_PAIR, l, budget)?;
    let (graph, wall) = assemble_simple_wall(g, &sys.segments, &sys.connectors, word, order, budget)?;
    Ok(WallCase::Simple { graph, wall })
}

/// The standard high-treewidth fixture for a wall of the given order: a
/// complete graph on `3 * wall_vertex_count(order) + 1` vertices with
/// the bramble of all singletons, whose order is the vertex count.
pub fn clique_fixture(order: usize) -> (ColouredGraph, Bramble) {
    let n = 3 * wall_vertex_count(order) + 1;
    let mut g = ColouredGraph::plain(n);
    for u in 0..n {
        for v in u + 1..n {
            g.add_edge(u, v).expect("complete graph edges");
        }
    }
    let elements: Vec<Vec<usize>> = (0..n).map(|v| vec![v]).collect();
    let bramble = Bramble::new(&g, elements).expect("singletons of a complete graph");
    (g, bramble)
}

fn assemble_simple_wall(
    g: &ColouredGraph,
    segments: &[Path],
    connectors: &[Vec<Vec<usize>>],
    word: &[String],
    order: usize,
    budget: &WorkBudget,
) -> Result<(ColouredGraph, PseudoWall), PipelineError> {
    let (wall, layout) = make_elementary_wall(order)?;
    let l = wall.n();
    debug_assert_eq!(segments.len(), l);
    let row_major: Vec<usize> = layout.rows().iter().flatten().copied().collect();
    let mut pos_of = vec![usize::MAX; l];
    for (t, &wv) in row_major.iter().enumerate() {
        pos_of[wv] = t;
    }
    // Which segment owns each host vertex.
    let mut owner: Vec<Option<usize>> = vec![None; g.n()];
    for (t, seg) in segments.iter().enumerate() {
        for &v in seg.vertices() {
            owner[v] = Some(t);
        }
    }

    // Candidate connectors per wall edge: the flow connectors for that
    // segment pair plus every direct host edge between the segments,
    // kept only when the interior stays off every segment.
    let mut classes: Vec<Vec<Vec<usize>>> = Vec::with_capacity(wall.m());
    for e in wall.edge_ids() {
        let (wu, wv) = wall.endpoints(e);
        let (i, j) = {
            let (a, b) = (pos_of[wu], pos_of[wv]);
            (a.min(b), a.max(b))
        };
        let mut seen: BTreeSet<Vec<usize>> = BTreeSet::new();
        let mut list: Vec<Vec<usize>> = Vec::new();
        let mut offer = |path: Vec<usize>| {
            let clean = path[1..path.len() - 1].iter().all(|&v| owner[v].is_none());
            if clean && seen.insert(path.clone()) {
                list.push(path);
            }
        };
        for path in &connectors[pair_index(i, j, l)] {
            budget.charge(1)?;
            if path.len() >= 2 {
                offer(path.clone());
            }
        }
        for &u in segments[i].vertices() {
            for &(v, _) in g.incident(u) {
                budget.charge(1)?;
                if owner[v] == Some(j) {
                    offer(vec![u, v]);
                }
            }
        }
        if list.is_empty() {
            return Err(PipelineError::Transversal(format!(
                "no clean connector joins segments {i} and {j}"
            )));
        }
        classes.push(list);
    }

    // One connector per wall edge, pairwise vertex-disjoint: a conflict
    // graph on all candidates, an independent transversal through it.
    let flat: Vec<(usize, usize)> = classes
        .iter()
        .enumerate()
        .flat_map(|(c, list)| (0..list.len()).map(move |i| (c, i)))
        .collect();
    let mut conflict = ColouredGraph::plain(flat.len());
    for x in 0..flat.len() {
        let px: BTreeSet<usize> =
            classes[flat[x].0][flat[x].1].iter().copied().collect();
        for y in x + 1..flat.len() {
            budget.charge(1)?;
            if classes[flat[y].0][flat[y].1].iter().any(|v| px.contains(v)) {
                conflict.add_edge(x, y)?;
            }
        }
    }
    let mut node_classes: Vec<Vec<usize>> = vec![Vec::new(); classes.len()];
    for (node, &(c, _)) in flat.iter().enumerate() {
        node_classes[c].push(node);
    }
    let picks = match independent_transversal(&conflict, &node_classes, budget) {
        Search::Found(p) => p,
        Search::Exhausted => {
            return Err(PipelineError::Transversal(
                "no pairwise disjoint choice of connectors exists among the candidates".into(),
            ))
        }
        Search::Capped => return Err(CapExceeded { max: budget.max() }.into()),
    };
    let q: Vec<Vec<usize>> = picks
        .iter()
        .map(|&node| classes[flat[node].0][flat[node].1].clone())
        .collect();

    // The long path: the segments in order, which tile a prefix of the
    // hitting path, so consecutive nails are one edge apart.
    let a: Vec<usize> = segments.iter().flat_map(|s| s.vertices().iter().copied()).collect();
    let a_path = Path::new(g, a.clone())?;

    // Paint: B on the long path, R on nail endpoints, the word on the
    // first nails of the top row.
    let mut vertex_map: Vec<(usize, Vec<String>)> = Vec::new();
    for (t, seg) in segments.iter().enumerate() {
        for &v in seg.vertices() {
            let mut colours = Vec::new();
            if v == seg.first() || v == seg.last() {
                colours.push(COLOUR_R.to_string());
            }
            if t < word.len() {
                colours.push(word[t].clone());
            }
            if !colours.is_empty() {
                vertex_map.push((v, colours));
            }
        }
    }
    let edge_map: Vec<(usize, Vec<String>)> = a_path
        .edges()
        .iter()
        .map(|&e| (e, vec![COLOUR_B.to_string()]))
        .collect();
    let painted = g.recolour(&vertex_map, &edge_map)?;

    let wall = PseudoWall {
        order,
        p: segments.iter().map(|s| s.vertices().to_vec()).collect(),
        q,
        a,
        word: word.to_vec(),
    };
    match validate_simple(&painted, &wall) {
        Ok(_) => Ok((painted, wall)),
        Err(vs) => Err(PipelineError::Assembly(format!(
            "the assembled wall fails its own check: {}",
            vs.iter()
                .map(|v| v.to_string())
                .collect::<Vec<_>>()
                .join("; ")
        ))),
    }
}

/// Build a complex pseudo-wall from disjoint vertex groups that are
/// pairwise joined by edges, as delivered by a clique-minor search. The
/// word must have at least three letters; the wall has order one less
/// than the word length. Intended for dense hosts; any missing edge or
/// too-small group is reported, not worked around.
pub fn assemble_complex_wall(
    g: &ColouredGraph,
    groups: &[Vec<usize>],
    word: &[String],
    budget: &WorkBudget,
) -> Result<(ColouredGraph, ComplexPseudoWall), PipelineError> {
    if word.len() < 3 {
        return Err(PipelineError::Assembly(
            "a complex wall needs a word of at least three letters".into(),
        ));
    }
    for letter in word {
        if !g.signature().has_letter(letter) {
            return Err(GraphError::UnknownColour(letter.clone()).into());
        }
    }
    let order = word.len() - 1;
    let (wall, layout) = make_elementary_wall(order)?;
    let n_core = wall.n();
    if groups.len() < n_core + 2 {
        return Err(PipelineError::Assembly(format!(
            "{} groups supplied, a wall of order {order} needs {}",
            groups.len(),
            n_core + 2
        )));
    }
    let row_major: Vec<usize> = layout.rows().iter().flatten().copied().collect();
    let mut pos_of = vec![usize::MAX; n_core];
    for (t, &wv) in row_major.iter().enumerate() {
        pos_of[wv] = t;
    }

    // Core nails: inside group t, a path with one vertex per incident
    // wall edge plus one more to anchor the long path.
    let mut p: Vec<Vec<usize>> = Vec::with_capacity(n_core + 1);
    for t in 0..n_core {
        let deg = wall.degree(row_major[t]);
        let nail = path_in_group(g, &groups[t], deg + 1, budget)?.ok_or_else(|| {
            PipelineError::Assembly(format!(
                "group {t} holds no path of {} vertices",
                deg + 1
            ))
        })?;
        p.push(nail);
    }
    let leftover_p = path_in_group(g, &groups[n_core], 3, budget)?.ok_or_else(|| {
        PipelineError::Assembly("the leftover nail group holds no path of 3 vertices".into())
    })?;
    let leftover_q = path_in_group(g, &groups[n_core + 1], 2, budget)?.ok_or_else(|| {
        PipelineError::Assembly("the leftover cross group holds no edge".into())
    })?;

    // Cross paths: one host edge per wall edge, endpoints drawn from the
    // nails' slot vertices (everything but the anchor), each slot used
    // at most once.
    let mut used_slot: BTreeSet<usize> = BTreeSet::new();
    let anchor = |nail: &[usize]| *nail.last().unwrap();
    let mut q: Vec<Vec<usize>> = Vec::with_capacity(wall.m() + 1);
    for e in wall.edge_ids() {
        let (wu, wv) = wall.endpoints(e);
        let (i, j) = (pos_of[wu], pos_of[wv]);
        let mut pick: Option<(usize, usize)> = None;
        'outer: for &u in &p[i] {
            if u == anchor(&p[i]) || used_slot.contains(&u) {
                continue;
            }
            for &v in &p[j] {
                budget.charge(1)?;
                if v == anchor(&p[j]) || used_slot.contains(&v) {
                    continue;
                }
                if g.edge_between(u, v).is_some() {
                    pick = Some((u, v));
                    break 'outer;
                }
            }
        }
        let (u, v) = pick.ok_or_else(|| {
            PipelineError::Assembly(format!(
                "no free joining edge between nails {i} and {j}"
            ))
        })?;
        used_slot.insert(u);
        used_slot.insert(v);
        q.push(vec![u, v]);
    }

    // The long path: each nail's anchor in row-major order, then the
    // leftover nail's anchor. Every hop must be a host edge.
    let mut a: Vec<usize> = (0..n_core).map(|t| anchor(&p[t])).collect();
    a.push(anchor(&leftover_p));
    for w in 1..a.len() {
        budget.charge(1)?;
        if g.edge_between(a[w - 1], a[w]).is_none() {
            return Err(PipelineError::Assembly(format!(
                "no edge joins the anchors of nails {} and {}",
                w - 1,
                w
            )));
        }
    }

    // Connectors: a direct edge from each leftover path to a descent
    // nail. Sharing a vertex with a cross path is fine; only connector
    // interiors must stay clear, and a two-vertex path has none.
    let descents = layout.top_descents();
    let connector = |source: &[usize], target_nail: &[usize]| -> Option<Vec<usize>> {
        for &s in source {
            for &t in target_nail {
                if g.edge_between(s, t).is_some() {
                    return Some(vec![s, t]);
                }
            }
        }
        None
    };
    let target0 = p[pos_of[descents[0]]].clone();
    let target1 = p[pos_of[descents[1]]].clone();
    let c1 = connector(&leftover_p, &target0).ok_or_else(|| {
        PipelineError::Assembly("the leftover nail reaches no descent nail".into())
    })?;
    let c2 = connector(&leftover_q, &target1).ok_or_else(|| {
        PipelineError::Assembly("the leftover cross path reaches no descent nail".into())
    })?;

    p.push(leftover_p);
    q.push(leftover_q);

    // Paint: R on nail endpoints, B on the long path's edges, the word
    // on the descent nails.
    let mut vertex_colours: Vec<(usize, Vec<String>)> = Vec::new();
    let mut planned: std::collections::BTreeMap<usize, Vec<String>> = Default::default();
    for nail in &p {
        planned.entry(nail[0]).or_default().push(COLOUR_R.to_string());
        planned
            .entry(*nail.last().unwrap())
            .or_default()
            .push(COLOUR_R.to_string());
    }
    for (t, &d) in descents.iter().enumerate() {
        for &v in &p[pos_of[d]] {
            planned.entry(v).or_default().push(word[t].clone());
        }
    }
    for (v, colours) in planned {
        vertex_colours.push((v, colours));
    }
    let mut edge_colours: Vec<(usize, Vec<String>)> = Vec::new();
    for w in 1..a.len() {
        let e = g.edge_between(a[w - 1], a[w]).expect("checked above");
        edge_colours.push((e, vec![COLOUR_B.to_string()]));
    }
    let painted = g.recolour(&vertex_colours, &edge_colours)?;

    let wall = ComplexPseudoWall {
        order,
        p,
        q,
        a,
        word: word.to_vec(),
        p_core: (0..n_core).collect(),
        q_core: (0..wall.m()).collect(),
        connectors: vec![c1, c2],
    };
    match validate_complex(&painted, &wall, budget) {
        Ok(()) => Ok((painted, wall)),
        Err(vs) => Err(PipelineError::Assembly(format!(
            "the assembled complex wall fails its own check: {}",
            vs.iter()
                .map(|v| v.to_string())
                .collect::<Vec<_>>()
                .join("; ")
        ))),
    }
}

/// A path of exactly `len` distinct vertices inside the given group,
/// found by depth-first search over the induced subgraph.
fn path_in_group(
    g: &ColouredGraph,
    group: &[usize],
    len: usize,
    budget: &WorkBudget,
) -> Result<Option<Vec<usize>>, CapExceeded> {
    let members: BTreeSet<usize> = group.iter().copied().collect();
    if members.len() < len {
        return Ok(None);
    }
    fn extend(
        g: &ColouredGraph,
        members: &BTreeSet<usize>,
        path: &mut Vec<usize>,
        len: usize,
        budget: &WorkBudget,
    ) -> Result<bool, CapExceeded> {
        if path.len() == len {
            return Ok(true);
        }
        let cur = *path.last().unwrap();
        for next in g.neighbours(cur) {
            budget.charge(1)?;
            if members.contains(&next) && !path.contains(&next) {
                path.push(next);
                if extend(g, members, path, len, budget)? {
                    return Ok(true);
                }
                path.pop();
            }
        }
        Ok(false)
    }
    for &start in &members {
        budget.charge(1)?;
        let mut path = vec![start];
        if extend(g, &members, &mut path, len, budget)? {
            return Ok(Some(path));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::caps::Caps;
    use crate::graph::make_grid;
    use crate::pseudowall::decode_word;

    fn budget() -> WorkBudget {
        Caps::default().budget()
    }

    fn letters(ls: &[&str]) -> Vec<String> {
        ls.iter().map(|s| s.to_string()).collect()
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
    fn the_clique_fixture_has_the_advertised_order() {
        let (g, bramble) = clique_fixture(1);
        assert_eq!(g.n(), 3 * 6 + 1);
        assert_eq!(bramble.len(), g.n());
        let order = crate::bramble::bramble_order(&g, &bramble, &budget()).unwrap();
        assert_eq!(order, g.n());
    }

    #[test]
    fn builds_a_simple_wall_on_the_clique_fixture() {
        let (g, bramble) = clique_fixture(2);
        assert_eq!(g.n(), 49);
        let word = letters(&["C1", "C2"]);
        match build_pseudo_wall(&g, &bramble, &word, 1, &budget()).unwrap() {
            WallCase::Simple { graph, wall } => {
                assert_eq!(wall.order, 2);
                let report = validate_simple(&graph, &wall).unwrap();
                assert_eq!(report.word, word);
                assert_eq!(decode_word(&graph, &wall).unwrap(), word);
            }
            WallCase::Complex { .. } => panic!("a two-letter word cannot go the clique route"),
        }
    }

    #[test]
    fn grid_brambles_are_too_weak_and_say_so() {
        let g = make_grid(6, 6);
        let bramble = Bramble::new(&g, Bramble::grid_crosses(6, 6)).unwrap();
        let word = letters(&["C1", "C2"]);
        match build_pseudo_wall(&g, &bramble, &word, 1, &budget()) {
            Err(PipelineError::System(SystemError::OrderTooLow { order: 6, required: 48 })) => {}
            other => panic!("expected an order shortfall, got {other:?}"),
        }
    }

    #[test]
    fn big_cliques_take_the_complex_route() {
        let groups_needed = wall_vertex_count(2) + 2;
        let g = complete(4 * groups_needed);
        let elements: Vec<Vec<usize>> = (0..g.n()).map(|v| vec![v]).collect();
        let bramble = Bramble::new(&g, elements).unwrap();
        let word = letters(&["C1", "C2", "C1"]);
        match build_pseudo_wall(&g, &bramble, &word, 1, &budget()).unwrap() {
            WallCase::Complex { graph, wall } => {
                assert_eq!(wall.order, 2);
                assert_eq!(wall.word, word);
                validate_complex(&graph, &wall, &budget()).unwrap();
            }
            WallCase::Simple { .. } => panic!("a 72-clique should take the clique route"),
        }
    }

    #[test]
    fn complex_assembly_works_from_synthetic_groups() {
        let groups_needed = wall_vertex_count(2) + 2;
        let g = complete(4 * groups_needed);
        let groups: Vec<Vec<usize>> =
            (0..groups_needed).map(|i| (4 * i..4 * i + 4).collect()).collect();
        let word = letters(&["C2", "C1", "C2"]);
        let (painted, wall) = assemble_complex_wall(&g, &groups, &word, &budget()).unwrap();
        validate_complex(&painted, &wall, &budget()).unwrap();
        assert_eq!(wall.p.len(), wall_vertex_count(2) + 1);
        assert_eq!(wall.connectors.len(), 2);
    }

    #[test]
    fn unknown_letters_are_rejected() {
        let (g, bramble) = clique_fixture(1);
        let word = letters(&["Z"]);
        assert!(matches!(
            build_pseudo_wall(&g, &bramble, &word, 1, &budget()),
            Err(PipelineError::Graph(GraphError::UnknownColour(_)))
        ));
    }

    #[test]
    fn small_budgets_cap_honestly() {
        let (g, bramble) = clique_fixture(2);
        let caps = Caps::new(100);
        let word = letters(&["C1", "C2"]);
        let err = build_pseudo_wall(&g, &bramble, &word, 1, &caps.budget()).unwrap_err();
        assert!(err.is_capped(), "expected a cap, got {err:?}");
    }

    #[test]
    fn groups_without_long_paths_are_reported() {
        // A star: 0 joined to 1, 2, 3; no path of four vertices.
        let mut g = ColouredGraph::plain(8);
        for v in 1..4 {
            g.add_edge(0, v).unwrap();
        }
        let got = path_in_group(&g, &[0, 1, 2, 3], 4, &budget()).unwrap();
        assert_eq!(got, None);
        let got = path_in_group(&g, &[0, 1, 2, 3], 3, &budget()).unwrap();
        assert!(got.is_some());
    }
}
