//! Clique minors, degeneracy orderings, and independent transversals.

use crate::caps::{Search, WorkBudget};
use crate::graph::ColouredGraph;

/// Degeneracy of the graph together with a peeling order: vertices are
/// listed in the order they were removed, always taking a vertex of
/// minimum degree in what remains. Every vertex has at most `d`
/// neighbours later in the order.
pub fn degeneracy(g: &ColouredGraph) -> (usize, Vec<usize>) {
    let n = g.n();
    let mut deg: Vec<usize> = g.vertices().map(|v| g.degree(v)).collect();
    let mut removed = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut d = 0;
    for _ in 0..n {
        let v = (0..n)
            .filter(|&v| !removed[v])
            .min_by_key(|&v| deg[v])
            .expect("a vertex remains");
        d = d.max(deg[v]);
        removed[v] = true;
        order.push(v);
        for &(w, _) in g.incident(v) {
            if !removed[w] {
                deg[w] -= 1;
            }
        }
    }
    (d, order)
}

/// Check that `sets` is a clique-minor model: disjoint nonempty branch
/// sets, each inducing a connected subgraph, pairwise joined by an edge.
pub fn verify_clique_minor(g: &ColouredGraph, sets: &[Vec<usize>]) -> Result<(), String> {
    let mut owner = vec![usize::MAX; g.n()];
    for (i, set) in sets.iter().enumerate() {
        if set.is_empty() {
            return Err(format!("branch set {i} is empty"));
        }
        for &v in set {
            if v >= g.n() {
                return Err(format!("branch set {i} contains vertex {v} outside the graph"));
            }
            if owner[v] != usize::MAX {
                return Err(format!("vertex {v} appears in branch sets {} and {i}", owner[v]));
            }
            owner[v] = i;
        }
        if !induces_connected(g, set) {
            return Err(format!("branch set {i} is not connected"));
        }
    }
    for i in 0..sets.len() {
        for j in i + 1..sets.len() {
            let touching = sets[i].iter().any(|&v| {
                g.incident(v).iter().any(|&(w, _)| sets[j].contains(&w))
            });
            if !touching {
                return Err(format!("no edge joins branch sets {i} and {j}"));
            }
        }
    }
    Ok(())
}

fn induces_connected(g: &ColouredGraph, set: &[usize]) -> bool {
    if set.is_empty() {
        return false;
    }
    let inside = |v: usize| set.contains(&v);
    let mut seen = vec![set[0]];
    let mut stack = vec![set[0]];
    while let Some(v) = stack.pop() {
        for &(w, _) in g.incident(v) {
            if inside(w) && !seen.contains(&w) {
                seen.push(w);
                stack.push(w);
            }
        }
    }
    seen.len() == set.len()
}

/// Search for a complete minor on `l` branch sets. Found results are
/// models that pass `verify_clique_minor`. Exhausted is conclusive: the
/// whole model space was ruled out. Hosts with fewer than `l` vertices
/// or fewer than l(l-1)/2 edges are refused immediately, which is the
/// cheap conclusive path callers rely on.
pub fn find_clique_minor(
    g: &ColouredGraph,
    l: usize,
    budget: &WorkBudget,
) -> Search<Vec<Vec<usize>>> {
    if l == 0 {
        return Search::Found(Vec::new());
    }
    if g.n() < l || g.m() < l * (l - 1) / 2 {
        return Search::Exhausted;
    }
    if l == 1 {
        return Search::Found(vec![vec![0]]);
    }
    let mut used = vec![false; g.n()];
    let mut sets: Vec<Vec<usize>> = Vec::new();
    match place_branch_sets(g, l, 0, &mut sets, &mut used, budget) {
        Ok(Some(model)) => {
            debug_assert!(verify_clique_minor(g, &model).is_ok());
            Search::Found(model)
        }
        Ok(None) => Search::Exhausted,
        Err(_) => Search::Capped,
    }
}

/// Extend a partial model with branch set `i`. Models are canonicalised
/// by insisting the minimum vertices of the branch sets increase, so
/// each unordered family is visited once.
fn place_branch_sets(
    g: &ColouredGraph,
    l: usize,
    i: usize,
    sets: &mut Vec<Vec<usize>>,
    used: &mut [bool],
    budget: &WorkBudget,
) -> Result<Option<Vec<Vec<usize>>>, crate::caps::CapExceeded> {
    if i == l {
        return Ok(Some(sets.clone()));
    }
    let min_root = if i == 0 {
        0
    } else {
        sets[i - 1][0] + 1 // sets are stored with their root (minimum) first
    };
    let unused = used.iter().filter(|&&u| !u).count();
    if unused < l - i {
        return Ok(None);
    }
    for root in min_root..g.n() {
        if used[root] {
            continue;
        }
        budget.charge(1)?;
        used[root] = true;
        sets.push(vec![root]);
        let mut visited = vec![false; g.n()];
        visited[root] = true;
        let mut ext: Vec<usize> = Vec::new();
        for &(w, _) in g.incident(root) {
            if !used[w] && w > root {
                visited[w] = true;
                ext.push(w);
            }
        }
        if let Some(hit) = grow_branch_set(g, l, i, sets, used, &mut visited, &ext, budget)? {
            return Ok(Some(hit));
        }
        sets.pop();
        used[root] = false;
    }
    Ok(None)
}

/// Either accept the current branch set (if it touches every earlier
/// one) and move on, or grow it by one vertex from the extension list.
/// The usual connected-subset enumeration applies: including `ext[idx]`
/// implicitly declines `ext[..idx]`, and `visited` keeps declined or
/// queued vertices from re-entering, so every connected superset of the
/// root (with the root as minimum) is reached exactly once.
fn grow_branch_set(
    g: &ColouredGraph,
    l: usize,
    i: usize,
    sets: &mut Vec<Vec<usize>>,
    used: &mut [bool],
    visited: &mut [bool],
    ext: &[usize],
    budget: &WorkBudget,
) -> Result<Option<Vec<Vec<usize>>>, crate::caps::CapExceeded> {
    budget.charge(1)?;
    let adjacent_to_all = (0..i).all(|j| {
        sets[j].iter().any(|&v| g.incident(v).iter().any(|&(w, _)| sets[i].contains(&w)))
    });
    if adjacent_to_all {
        if let Some(hit) = place_branch_sets(g, l, i + 1, sets, used, budget)? {
            return Ok(Some(hit));
        }
    }
    // Spare enough vertices for the remaining branch sets.
    let unused = used.iter().filter(|&&u| !u).count();
    if unused < l - i {
        return Ok(None);
    }
    let root = sets[i][0];
    for (idx, &w) in ext.iter().enumerate() {
        used[w] = true;
        sets[i].push(w);
        let mut new_ext: Vec<usize> = ext[idx + 1..].to_vec();
        let mut newly_visited: Vec<usize> = Vec::new();
        for &(x, _) in g.incident(w) {
            if !used[x] && x > root && !visited[x] {
                visited[x] = true;
                newly_visited.push(x);
                new_ext.push(x);
            }
        }
        if let Some(hit) = grow_branch_set(g, l, i, sets, used, visited, &new_ext, budget)? {
            return Ok(Some(hit));
        }
        for x in newly_visited {
            visited[x] = false;
        }
        sets[i].pop();
        used[w] = false;
    }
    Ok(None)
}

/// Search for a transversal of the given vertex classes that is an
/// independent set: one vertex from each class, all distinct, no two
/// adjacent. The result is indexed like `classes`. Classes are tried
/// smallest first, which keeps the branching shallow.
pub fn independent_transversal(
    g: &ColouredGraph,
    classes: &[Vec<usize>],
    budget: &WorkBudget,
) -> Search<Vec<usize>> {
    for class in classes {
        if class.is_empty() {
            return Search::Exhausted;
        }
        if let Some(&v) = class.iter().find(|&&v| v >= g.n()) {
            let _ = v;
            return Search::Exhausted;
        }
    }
    let mut order: Vec<usize> = (0..classes.len()).collect();
    order.sort_by_key(|&i| classes[i].len());
    let mut chosen: Vec<Option<usize>> = vec![None; classes.len()];
    fn go(
        g: &ColouredGraph,
        classes: &[Vec<usize>],
        order: &[usize],
        at: usize,
        chosen: &mut Vec<Option<usize>>,
        budget: &WorkBudget,
    ) -> Result<bool, crate::caps::CapExceeded> {
        let Some(&class) = order.get(at) else {
            return Ok(true);
        };
        'cand: for &v in &classes[class] {
            budget.charge(1)?;
            for picked in chosen.iter().flatten() {
                if *picked == v || g.edge_between(*picked, v).is_some() {
                    continue 'cand;
                }
            }
            chosen[class] = Some(v);
            if go(g, classes, order, at + 1, chosen, budget)? {
                return Ok(true);
            }
            chosen[class] = None;
        }
        Ok(false)
    }
    match go(g, classes, &order, 0, &mut chosen, budget) {
        Ok(true) => Search::Found(chosen.into_iter().map(|c| c.unwrap()).collect()),
        Ok(false) => Search::Exhausted,
        Err(_) => Search::Capped,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::caps::Caps;
    use crate::graph::{make_grid, ColouredGraph};

    fn budget() -> WorkBudget {
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

    fn path(n: usize) -> ColouredGraph {
        let mut g = ColouredGraph::plain(n);
        for v in 0..n - 1 {
            g.add_edge(v, v + 1).unwrap();
        }
        g
    }

    #[test]
    fn degeneracy_of_standard_graphs() {
        assert_eq!(degeneracy(&path(7)).0, 1);
        assert_eq!(degeneracy(&complete(5)).0, 4);
        assert_eq!(degeneracy(&make_grid(4, 5)).0, 2);
        let mut cycle = path(6);
        cycle.add_edge(0, 5).unwrap();
        assert_eq!(degeneracy(&cycle).0, 2);
    }

    #[test]
    fn peeling_order_bounds_later_neighbours() {
        for g in [make_grid(3, 4), complete(6), path(9)] {
            let (d, order) = degeneracy(&g);
            assert_eq!(order.len(), g.n());
            let position: Vec<usize> = {
                let mut pos = vec![0; g.n()];
                for (i, &v) in order.iter().enumerate() {
                    pos[v] = i;
                }
                pos
            };
            for &v in &order {
                let later = g
                    .incident(v)
                    .iter()
                    .filter(|&&(w, _)| position[w] > position[v])
                    .count();
                assert!(later <= d, "vertex {v} keeps {later} later neighbours, d = {d}");
            }
        }
    }

    #[test]
    fn complete_graphs_contain_themselves() {
        let g = complete(5);
        let model = find_clique_minor(&g, 5, &budget()).found().unwrap();
        verify_clique_minor(&g, &model).unwrap();
        assert_eq!(model.len(), 5);
    }

    #[test]
    fn grids_have_a_k4_minor_but_not_k5() {
        let g = make_grid(3, 3);
        let model = find_clique_minor(&g, 4, &budget()).found().unwrap();
        verify_clique_minor(&g, &model).unwrap();
        // Planar graphs have no complete minor on five branch sets.
        assert!(find_clique_minor(&g, 5, &budget()).is_exhausted());
    }

    #[test]
    fn trees_have_no_triangle_minor() {
        assert!(find_clique_minor(&path(8), 3, &budget()).is_exhausted());
    }

    #[test]
    fn small_hosts_are_refused_immediately() {
        let g = complete(3);
        let b = budget();
        assert!(find_clique_minor(&g, 10, &b).is_exhausted());
        assert_eq!(b.spent(), 0, "the vertex-count gate needs no search");
    }

    #[test]
    fn subdivided_cliques_still_have_the_minor() {
        let k4 = complete(4);
        let lengths: Vec<usize> = vec![2; k4.m()];
        let sub = crate::graph::subdivide(&k4, &lengths).unwrap();
        let model = find_clique_minor(&sub, 4, &budget()).found().unwrap();
        verify_clique_minor(&sub, &model).unwrap();
    }

    #[test]
    fn minor_search_respects_caps() {
        let g = make_grid(4, 4);
        let caps = Caps::new(5);
        assert!(find_clique_minor(&g, 5, &caps.budget()).is_capped());
    }

    #[test]
    fn transversal_on_a_path() {
        let g = path(6);
        let classes = vec![vec![0, 1], vec![2, 3], vec![4, 5]];
        let pick = independent_transversal(&g, &classes, &budget()).found().unwrap();
        assert_eq!(pick.len(), 3);
        for (i, &v) in pick.iter().enumerate() {
            assert!(classes[i].contains(&v));
        }
        for i in 0..3 {
            for j in i + 1..3 {
                assert_ne!(pick[i], pick[j]);
                assert!(g.edge_between(pick[i], pick[j]).is_none());
            }
        }
    }

    #[test]
    fn adjacent_singletons_admit_no_transversal() {
        let g = path(2);
        let classes = vec![vec![0], vec![1]];
        assert!(independent_transversal(&g, &classes, &budget()).is_exhausted());
    }

    #[test]
    fn shared_vertices_must_not_be_picked_twice() {
        let g = ColouredGraph::plain(3);
        let classes = vec![vec![0, 1], vec![0], vec![0, 2]];
        let pick = independent_transversal(&g, &classes, &budget()).found().unwrap();
        assert_eq!(pick[1], 0);
        assert_eq!(pick[0], 1);
        assert_eq!(pick[2], 2);
    }

    #[test]
    fn transversal_respects_caps() {
        let g = complete(8);
        let classes: Vec<Vec<usize>> = (0..8).map(|_| (0..8).collect()).collect();
        let caps = Caps::new(3);
        assert!(independent_transversal(&g, &classes, &caps.budget()).is_capped());
    }
}
