//! Exact treewidth by dynamic programming over vertex subsets.
//!
//! For a set `S` of vertices let `f(S)` be the least width of an
//! elimination prefix covering `S`. Then
//!
//! ```text
//! f({}) = 0
//! f(S)  = min over v in S of max(f(S - v), q(S - v, v))
//! ```
//!
//! where `q(S, v)` counts the vertices outside `S + v` reachable from `v`
//! by paths whose interior stays inside `S`. The treewidth of a connected
//! graph is `f(V)`, and of a general graph the maximum over components.
//! Space and time are exponential in the component size, so the work
//! budget is charged for the table allocation up front and for every
//! table entry filled.

use crate::caps::{CapExceeded, WorkBudget};
use crate::graph::ColouredGraph;

/// Exact treewidth of `g`. Intended for graphs whose largest connected
/// component has at most roughly 16 vertices; beyond that the budget
/// refuses before memory does.
pub fn treewidth_exact(g: &ColouredGraph, budget: &WorkBudget) -> Result<usize, CapExceeded> {
    let mut width = 0usize;
    for comp in g.components() {
        width = width.max(component_width(g, &comp, budget)?);
    }
    Ok(width)
}

fn component_width(
    g: &ColouredGraph,
    comp: &[usize],
    budget: &WorkBudget,
) -> Result<usize, CapExceeded> {
    let k = comp.len();
    if k <= 1 {
        return Ok(0);
    }
    if k >= 26 {
        // The table alone would dwarf any realistic budget; refuse
        // outright rather than attempt the allocation.
        budget.charge(u64::MAX)?;
        return Err(CapExceeded { max: budget.max() });
    }
    budget.charge(1u64 << k)?;
    let mut index = vec![usize::MAX; g.n()];
    for (i, &v) in comp.iter().enumerate() {
        index[v] = i;
    }
    let nbr: Vec<u64> = comp
        .iter()
        .map(|&v| {
            g.neighbours(v)
                .filter(|&w| index[w] != usize::MAX)
                .fold(0u64, |m, w| m | (1u64 << index[w]))
        })
        .collect();
    let full = (1u64 << k) - 1;
    let mut f = vec![u8::MAX; 1usize << k];
    f[0] = 0;
    for s in 1..=full {
        budget.charge(s.count_ones() as u64)?;
        let mut best = u8::MAX;
        let mut rest = s;
        while rest != 0 {
            let v = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            let s2 = s & !(1u64 << v);
            let q = reach_outside(&nbr, s2, v) as u8;
            best = best.min(f[s2 as usize].max(q));
        }
        f[s as usize] = best;
    }
    Ok(f[full as usize] as usize)
}

/// Number of component vertices outside `s + v` reachable from `v` along
/// paths whose interior vertices all lie in `s`.
fn reach_outside(nbr: &[u64], s: u64, v: usize) -> u32 {
    let start = 1u64 << v;
    let mut seen = start;
    let mut frontier = nbr[v] & !seen;
    let mut outside = 0u64;
    while frontier != 0 {
        let u = frontier.trailing_zeros() as usize;
        let bit = 1u64 << u;
        frontier &= !bit;
        if seen & bit != 0 {
            continue;
        }
        seen |= bit;
        if s & bit != 0 {
            frontier |= nbr[u] & !seen;
        } else {
            outside |= bit;
        }
    }
    outside.count_ones()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::caps::Caps;
    use crate::graph::{make_grid, ColouredGraph};

    fn budget() -> crate::caps::WorkBudget {
        Caps::default().budget()
    }

    /// Independent oracle: minimum over all elimination orderings of the
    /// largest neighbourhood at elimination time, with fill edges added
    /// as vertices go. Exact for any graph, usable up to ~7 vertices.
    fn elimination_oracle(g: &ColouredGraph) -> usize {
        let n = g.n();
        if n == 0 {
            return 0;
        }
        let base: Vec<u64> = (0..n)
            .map(|v| g.neighbours(v).fold(0u64, |m, w| m | (1 << w)))
            .collect();
        fn go(adj: &[u64], remaining: u64, acc: usize, best: &mut usize) {
            if remaining == 0 {
                *best = (*best).min(acc);
                return;
            }
            if acc >= *best {
                return;
            }
            let mut rest = remaining;
            while rest != 0 {
                let v = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                let nb = adj[v] & remaining & !(1u64 << v);
                let deg = nb.count_ones() as usize;
                if deg.max(acc) >= *best {
                    continue;
                }
                // Eliminate v: clique up its current neighbourhood.
                let mut next: Vec<u64> = adj.to_vec();
                let mut xs = nb;
                while xs != 0 {
                    let x = xs.trailing_zeros() as usize;
                    xs &= xs - 1;
                    next[x] |= nb & !(1u64 << x);
                }
                go(&next, remaining & !(1u64 << v), acc.max(deg), best);
            }
        }
        let mut best = n;
        go(&base, (1u64 << n) - 1, 0, &mut best);
        best
    }

    fn path(n: usize) -> ColouredGraph {
        let mut g = ColouredGraph::plain(n);
        for i in 0..n - 1 {
            g.add_edge(i, i + 1).unwrap();
        }
        g
    }

    fn cycle(n: usize) -> ColouredGraph {
        let mut g = ColouredGraph::plain(n);
        for i in 0..n {
            g.add_edge(i, (i + 1) % n).unwrap();
        }
        g
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
    fn known_values() {
        assert_eq!(treewidth_exact(&path(5), &budget()).unwrap(), 1);
        assert_eq!(treewidth_exact(&cycle(6), &budget()).unwrap(), 2);
        for n in 2..=6 {
            assert_eq!(treewidth_exact(&complete(n), &budget()).unwrap(), n - 1);
        }
        assert_eq!(treewidth_exact(&make_grid(3, 3), &budget()).unwrap(), 3);
        assert_eq!(treewidth_exact(&make_grid(2, 5), &budget()).unwrap(), 2);
        assert_eq!(treewidth_exact(&make_grid(4, 4), &budget()).unwrap(), 4);
        assert_eq!(treewidth_exact(&ColouredGraph::plain(4), &budget()).unwrap(), 0);
        assert_eq!(treewidth_exact(&ColouredGraph::plain(0), &budget()).unwrap(), 0);
    }

    #[test]
    fn walls_have_small_treewidth() {
        // The order-1 wall is a hexagon. The order-2 wall is a subgraph
        // of the 3x6 grid (treewidth 3) and has a K4 minor, so its
        // treewidth is exactly 3.
        let (w1, _) = crate::topo::make_elementary_wall(1).unwrap();
        assert_eq!(treewidth_exact(&w1, &budget()).unwrap(), 2);
        let (w2, _) = crate::topo::make_elementary_wall(2).unwrap();
        assert_eq!(treewidth_exact(&w2, &budget()).unwrap(), 3);
    }

    #[test]
    fn agrees_with_elimination_oracle_on_all_small_graphs() {
        // Every graph on 4 labelled vertices, connected or not.
        let pairs4: Vec<(usize, usize)> =
            (0..4).flat_map(|u| (u + 1..4).map(move |v| (u, v))).collect();
        for mask in 0u32..(1 << pairs4.len()) {
            let mut g = ColouredGraph::plain(4);
            for (i, &(u, v)) in pairs4.iter().enumerate() {
                if mask & (1 << i) != 0 {
                    g.add_edge(u, v).unwrap();
                }
            }
            assert_eq!(
                treewidth_exact(&g, &budget()).unwrap(),
                elimination_oracle(&g),
                "mask {mask:#b}"
            );
        }
    }

    #[test]
    fn agrees_with_elimination_oracle_on_pseudorandom_six_vertex_graphs() {
        // Deterministic pseudorandom edge masks over 15 possible edges.
        let pairs: Vec<(usize, usize)> =
            (0..6).flat_map(|u| (u + 1..6).map(move |v| (u, v))).collect();
        let mut state = 0x243f_6a88_85a3_08d3u64;
        for _ in 0..40 {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let mask = (state >> 17) as u32 & ((1 << pairs.len()) - 1);
            let mut g = ColouredGraph::plain(6);
            for (i, &(u, v)) in pairs.iter().enumerate() {
                if mask & (1 << i) != 0 {
                    g.add_edge(u, v).unwrap();
                }
            }
            assert_eq!(
                treewidth_exact(&g, &budget()).unwrap(),
                elimination_oracle(&g),
                "mask {mask:#b}"
            );
        }
    }

    #[test]
    fn large_components_refuse_instead_of_allocating() {
        let g = make_grid(6, 6);
        let caps = Caps::new(1 << 20);
        assert!(treewidth_exact(&g, &caps.budget()).is_err());
        let huge = complete(40);
        assert!(treewidth_exact(&huge, &Caps::new(u64::MAX / 2).budget()).is_err());
    }

    #[test]
    fn disconnected_graphs_take_the_maximum() {
        // K4 plus an isolated path: treewidth 3.
        let mut g = ColouredGraph::plain(7);
        for u in 0..4 {
            for v in u + 1..4 {
                g.add_edge(u, v).unwrap();
            }
        }
        g.add_edge(4, 5).unwrap();
        g.add_edge(5, 6).unwrap();
        assert_eq!(treewidth_exact(&g, &budget()).unwrap(), 3);
    }
}
