//! Elementary walls, wall layouts, and recognition of subdivisions.
//!
//! The elementary wall of order `q` is cut out of a `(q+1) x (2q+2)` grid:
//! all horizontal edges are kept, vertical edges survive exactly where the
//! row and column indices have even sum, and the one or two vertices this
//! leaves with degree at most 1 are discarded. The result has `2q^2 + 4q`
//! vertices, `3q^2 + 4q - 1` edges and `q^2` bricks.
//!
//! A wall of order `q` is any subdivision of the elementary wall. Its
//! nails are the images of the elementary wall's vertices. Recognition
//! works on the topological core: suppress degree-2 vertices on both
//! sides, match the resulting multigraphs by colour refinement plus
//! backtracking, and accept only if every core path of the candidate is
//! at least as long as the corresponding elementary core path.

use crate::caps::{CapExceeded, Search, WorkBudget};
use crate::graph::{ColouredGraph, GraphError, Path};
use std::collections::{BTreeMap, BTreeSet};

/// Geometry of the elementary wall of order `q`, in grid coordinates.
///
/// Rows are the maximal horizontal paths, numbered top to bottom. The
/// vertical paths zigzag: path `j` descends through columns `2j` and
/// `2j + 1`, switching columns with a single horizontal jog edge in each
/// interior row, so jog edges belong to a row and a vertical path at
/// once. Together rows and vertical paths cover every edge. The top row
/// is row 0 and the leftmost vertical path is path 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WallLayout {
    order: usize,
    grid_rows: usize,
    grid_cols: usize,
    ids: Vec<Option<usize>>,
    coords: Vec<(usize, usize)>,
    rows: Vec<Vec<usize>>,
    verticals: Vec<Vec<usize>>,
}

impl WallLayout {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn vertex_count(&self) -> usize {
        self.coords.len()
    }

    pub fn brick_count(&self) -> usize {
        self.order * self.order
    }

    /// Grid coordinate of a wall vertex.
    pub fn coord(&self, v: usize) -> (usize, usize) {
        self.coords[v]
    }

    /// Wall vertex at a grid coordinate, if it survived trimming.
    pub fn id_at(&self, r: usize, c: usize) -> Option<usize> {
        if r < self.grid_rows && c < self.grid_cols {
            self.ids[r * self.grid_cols + c]
        } else {
            None
        }
    }

    /// Horizontal paths, top to bottom, each as a left-to-right vertex list.
    pub fn rows(&self) -> &[Vec<usize>] {
        &self.rows
    }

    /// Vertical zigzag paths, left to right, each as a top-to-bottom vertex list.
    pub fn verticals(&self) -> &[Vec<usize>] {
        &self.verticals
    }

    pub fn top_row(&self) -> &[usize] {
        &self.rows[0]
    }

    pub fn left_vertical(&self) -> &[usize] {
        &self.verticals[0]
    }

    /// The vertex where vertical path `j` meets the top row, for each `j`.
    /// These are the `order + 1` descent points of the top row.
    pub fn top_descents(&self) -> Vec<usize> {
        self.verticals.iter().map(|p| p[0]).collect()
    }
}

/// Build the elementary wall of order `q >= 1` together with its layout.
pub fn make_elementary_wall(order: usize) -> Result<(ColouredGraph, WallLayout), GraphError> {
    if order == 0 {
        return Err(GraphError::Parameter("wall order must be at least 1".into()));
    }
    let q = order;
    let grid_rows = q + 1;
    let grid_cols = 2 * q + 2;
    let keep = |r: usize, c: usize| -> bool {
        // Degree in the pre-trim graph: horizontal neighbours plus the
        // surviving vertical edges at even coordinate sum.
        let mut deg = 0;
        if c > 0 {
            deg += 1;
        }
        if c + 1 < grid_cols {
            deg += 1;
        }
        if r + 1 < grid_rows && (r + c) % 2 == 0 {
            deg += 1;
        }
        if r > 0 && (r - 1 + c) % 2 == 0 {
            deg += 1;
        }
        deg >= 2
    };
    let mut ids = vec![None; grid_rows * grid_cols];
    let mut coords = Vec::new();
    for r in 0..grid_rows {
        for c in 0..grid_cols {
            if keep(r, c) {
                ids[r * grid_cols + c] = Some(coords.len());
                coords.push((r, c));
            }
        }
    }
    let at = |r: usize, c: usize| ids[r * grid_cols + c];
    let mut g = ColouredGraph::plain(coords.len());
    for r in 0..grid_rows {
        for c in 0..grid_cols - 1 {
            if let (Some(u), Some(v)) = (at(r, c), at(r, c + 1)) {
                g.add_edge(u, v)?;
            }
        }
    }
    for r in 0..grid_rows - 1 {
        for c in 0..grid_cols {
            if (r + c) % 2 == 0 {
                if let (Some(u), Some(v)) = (at(r, c), at(r + 1, c)) {
                    g.add_edge(u, v)?;
                }
            }
        }
    }
    let mut rows = Vec::with_capacity(grid_rows);
    for r in 0..grid_rows {
        let row: Vec<usize> = (0..grid_cols).filter_map(|c| at(r, c)).collect();
        rows.push(row);
    }
    let mut verticals = Vec::with_capacity(q + 1);
    for j in 0..=q {
        let mut cur = 2 * j;
        let mut path = vec![at(0, cur).expect("top descent exists")];
        for r in 0..q {
            path.push(at(r + 1, cur).expect("descent target exists"));
            if r + 1 < q {
                let other = 2 * j + (r + 1) % 2;
                if other != cur {
                    path.push(at(r + 1, other).expect("jog target exists"));
                    cur = other;
                }
            }
        }
        verticals.push(path);
    }
    let layout = WallLayout { order, grid_rows, grid_cols, ids, coords, rows, verticals };
    Ok((g, layout))
}

/// An embedding that exhibits `g` as a subdivision of a pattern graph:
/// an injective image for every pattern vertex and, per pattern edge, a
/// route in `g` between the two images. Routes are internally disjoint
/// and jointly use every vertex and edge of `g` exactly once.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubdivisionModel {
    /// Pattern vertex id to `g` vertex id.
    pub branch: Vec<usize>,
    /// Pattern edge id to its route in `g`, oriented from the image of
    /// the pattern edge's smaller endpoint to the larger one.
    pub edge_routes: Vec<Vec<usize>>,
}

/// Check a [`SubdivisionModel`] from first principles. Used as the
/// independent referee for the recognition search.
pub fn verify_subdivision(
    g: &ColouredGraph,
    pattern: &ColouredGraph,
    model: &SubdivisionModel,
) -> Result<(), String> {
    if model.branch.len() != pattern.n() {
        return Err("branch map has wrong length".into());
    }
    let mut image_of = vec![None; g.n()];
    for (p, &h) in model.branch.iter().enumerate() {
        if h >= g.n() {
            return Err(format!("branch image {h} out of range"));
        }
        if let Some(other) = image_of[h] {
            return Err(format!("vertices {other} and {p} share image {h}"));
        }
        image_of[h] = Some(p);
    }
    if model.edge_routes.len() != pattern.m() {
        return Err("route list has wrong length".into());
    }
    let mut vertex_used = vec![false; g.n()];
    let mut edge_used = vec![false; g.m()];
    for (e, route) in model.edge_routes.iter().enumerate() {
        let (pu, pv) = pattern.endpoints(e);
        if route.len() < 2 {
            return Err(format!("route {e} too short"));
        }
        if route[0] != model.branch[pu] || *route.last().unwrap() != model.branch[pv] {
            return Err(format!("route {e} endpoints do not match its pattern edge"));
        }
        for pair in route.windows(2) {
            match g.edge_between(pair[0], pair[1]) {
                Some(ge) => {
                    if edge_used[ge] {
                        return Err(format!("edge {ge} used by two routes"));
                    }
                    edge_used[ge] = true;
                }
                None => return Err(format!("route {e} uses a non-edge")),
            }
        }
        for &v in &route[1..route.len() - 1] {
            if image_of[v].is_some() {
                return Err(format!("route {e} passes through a branch image"));
            }
            if vertex_used[v] {
                return Err(format!("interior vertex {v} on two routes"));
            }
            vertex_used[v] = true;
        }
    }
    for v in g.vertices() {
        if image_of[v].is_none() && !vertex_used[v] {
            return Err(format!("vertex {v} not covered"));
        }
    }
    if let Some(e) = edge_used.iter().position(|&u| !u) {
        return Err(format!("edge {e} not covered"));
    }
    Ok(())
}

/// Topological core of a graph whose degrees all lie in `{1, 2, 3}`:
/// branch vertices are those of degree 3 (or 1), core edges are the
/// maximal paths between them through degree-2 vertices.
struct Core {
    /// Core vertex id to original vertex id.
    verts: Vec<usize>,
    /// `(core u, core v, route)` with the route listing original
    /// vertices from `verts[u]` to `verts[v]`.
    edges: Vec<(usize, usize, Vec<usize>)>,
}

impl Core {
    /// Extract the core. Returns `None` when some edge lies on a cycle
    /// of degree-2 vertices avoiding every branch vertex (such a graph
    /// is not a subdivision of anything with a branch vertex).
    fn extract(g: &ColouredGraph) -> Option<Core> {
        let branch: Vec<usize> = g.vertices().filter(|&v| g.degree(v) != 2).collect();
        let mut index = vec![usize::MAX; g.n()];
        for (i, &b) in branch.iter().enumerate() {
            index[b] = i;
        }
        let mut edge_used = vec![false; g.m()];
        let mut edges = Vec::new();
        for (ci, &b) in branch.iter().enumerate() {
            for &(first, e0) in g.incident(b) {
                if edge_used[e0] {
                    continue;
                }
                edge_used[e0] = true;
                let mut route = vec![b, first];
                let mut prev_edge = e0;
                let mut cur = first;
                while index[cur] == usize::MAX {
                    let &(next, e) = g
                        .incident(cur)
                        .iter()
                        .find(|&&(_, e)| e != prev_edge)
                        .expect("degree-2 vertex has a second edge");
                    edge_used[e] = true;
                    route.push(next);
                    prev_edge = e;
                    cur = next;
                }
                edges.push((ci, index[cur], route));
            }
        }
        if edge_used.iter().any(|&u| !u) {
            return None;
        }
        Some(Core { verts: branch, edges })
    }

    /// Bundles of core edges per unordered core vertex pair, each entry
    /// `(edge index, length)` sorted by length.
    fn bundles(&self) -> BTreeMap<(usize, usize), Vec<(usize, usize)>> {
        let mut map: BTreeMap<(usize, usize), Vec<(usize, usize)>> = BTreeMap::new();
        for (i, (a, b, route)) in self.edges.iter().enumerate() {
            let key = (*a.min(b), *a.max(b));
            map.entry(key).or_default().push((i, route.len() - 1));
        }
        for list in map.values_mut() {
            list.sort_by_key(|&(_, len)| len);
        }
        map
    }
}

/// Stable colour refinement for multigraph cores; the colour of a vertex
/// folds in its bundle profile and, iteratively, its neighbours' colours.
fn refine_colours(n: usize, bundles: &BTreeMap<(usize, usize), Vec<(usize, usize)>>) -> Vec<u64> {
    fn mix(h: u64, x: u64) -> u64 {
        (h ^ x).wrapping_mul(0x9e37_79b9_7f4a_7c15).rotate_left(27)
    }
    let mut nbr: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for (&(a, b), list) in bundles {
        let size = list.len();
        if a == b {
            nbr[a].push((a, size));
        } else {
            nbr[a].push((b, size));
            nbr[b].push((a, size));
        }
    }
    let mut colour: Vec<u64> = (0..n)
        .map(|v| {
            let mut sizes: Vec<usize> = nbr[v].iter().map(|&(_, s)| s).collect();
            sizes.sort_unstable();
            let mut h = 0xcbf2_9ce4_8422_2325u64;
            for s in sizes {
                h = mix(h, s as u64 + 1);
            }
            h
        })
        .collect();
    for _ in 0..n.max(3).min(16) {
        let mut next = vec![0u64; n];
        for v in 0..n {
            let mut sig: Vec<u64> = nbr[v]
                .iter()
                .map(|&(w, s)| mix(colour[w], s as u64))
                .collect();
            sig.sort_unstable();
            let mut h = mix(colour[v], 0x100);
            for x in sig {
                h = mix(h, x);
            }
            next[v] = h;
        }
        if next == colour {
            break;
        }
        colour = next;
    }
    colour
}

/// Search for a core-vertex bijection under which every pattern bundle
/// matches a host bundle of the same size whose sorted lengths dominate
/// the pattern's pointwise. Returns the mapping pattern core index to
/// host core index.
fn core_embedding(
    pat: &Core,
    host: &Core,
    budget: &WorkBudget,
) -> Result<Option<Vec<usize>>, CapExceeded> {
    let np = pat.verts.len();
    if np != host.verts.len() || pat.edges.len() != host.edges.len() {
        return Ok(None);
    }
    let pb = pat.bundles();
    let hb = host.bundles();
    if pb.len() != hb.len() {
        return Ok(None);
    }
    let pc = refine_colours(np, &pb);
    let hc = refine_colours(np, &hb);
    {
        let mut a = pc.clone();
        let mut b = hc.clone();
        a.sort_unstable();
        b.sort_unstable();
        if a != b {
            return Ok(None);
        }
    }
    // Order pattern vertices so each one (after the first) touches an
    // earlier one where possible, for early pruning.
    let mut order: Vec<usize> = Vec::with_capacity(np);
    let mut placed = vec![false; np];
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); np];
    for &(a, b) in pb.keys() {
        if a != b {
            adj[a].push(b);
            adj[b].push(a);
        }
    }
    while order.len() < np {
        let next = (0..np)
            .filter(|&v| !placed[v])
            .max_by_key(|&v| adj[v].iter().filter(|&&w| placed[w]).count())
            .unwrap();
        placed[next] = true;
        order.push(next);
    }

    let bundle_fits = |pk: (usize, usize), hk: (usize, usize)| -> bool {
        match (pb.get(&pk), hb.get(&hk)) {
            (None, None) => true,
            (Some(pl), Some(hl)) => {
                pl.len() == hl.len()
                    && pl.iter().zip(hl.iter()).all(|(&(_, lp), &(_, lh))| lp <= lh)
            }
            _ => false,
        }
    };

    let mut map = vec![usize::MAX; np];
    let mut used = vec![false; np];
    fn assign(
        depth: usize,
        order: &[usize],
        np: usize,
        pc: &[u64],
        hc: &[u64],
        map: &mut Vec<usize>,
        used: &mut Vec<bool>,
        bundle_fits: &dyn Fn((usize, usize), (usize, usize)) -> bool,
        budget: &WorkBudget,
    ) -> Result<bool, CapExceeded> {
        if depth == order.len() {
            return Ok(true);
        }
        let p = order[depth];
        for h in 0..np {
            budget.charge(1)?;
            if used[h] || pc[p] != hc[h] {
                continue;
            }
            let mut ok = bundle_fits((p, p), (h, h));
            if ok {
                for q in 0..np {
                    if map[q] == usize::MAX || q == p {
                        continue;
                    }
                    let pk = (p.min(q), p.max(q));
                    let hk = (h.min(map[q]), h.max(map[q]));
                    if !bundle_fits(pk, hk) {
                        ok = false;
                        break;
                    }
                }
            }
            if !ok {
                continue;
            }
            map[p] = h;
            used[h] = true;
            if assign(depth + 1, order, np, pc, hc, map, used, bundle_fits, budget)? {
                return Ok(true);
            }
            map[p] = usize::MAX;
            used[h] = false;
        }
        Ok(false)
    }
    if assign(0, &order, np, &pc, &hc, &mut map, &mut used, &bundle_fits, budget)? {
        Ok(Some(map))
    } else {
        Ok(None)
    }
}

/// Decide whether `g` is a subdivision of `pattern` (colours ignored) and
/// return an embedding when it is. Both graphs must be connected and the
/// pattern must have no isolated vertices; degrees above 3 are rejected
/// since every client here works with subcubic patterns.
pub fn subdivision_model(
    g: &ColouredGraph,
    pattern: &ColouredGraph,
    budget: &WorkBudget,
) -> Result<Option<SubdivisionModel>, CapExceeded> {
    if pattern.n() == 0 || g.n() == 0 || !pattern.connected() || !g.connected() {
        return Ok(None);
    }
    let pmax = pattern.vertices().map(|v| pattern.degree(v)).max().unwrap();
    let gmax = g.vertices().map(|v| g.degree(v)).max().unwrap();
    if pmax > 3 || gmax > 3 {
        return Ok(None);
    }
    for d in [0usize, 1, 3] {
        let pd = pattern.vertices().filter(|&v| pattern.degree(v) == d).count();
        let gd = g.vertices().filter(|&v| g.degree(v) == d).count();
        if pd != gd {
            return Ok(None);
        }
    }
    if g.m() < pattern.m() || g.n() < pattern.n() {
        return Ok(None);
    }
    // A connected 2-regular pattern is a cycle: any cycle of g at least
    // as long is a subdivision of it.
    if pmax == 2 && pattern.vertices().all(|v| pattern.degree(v) == 2) {
        return Ok(cycle_model(g, pattern));
    }
    let (pcore, gcore) = match (Core::extract(pattern), Core::extract(g)) {
        (Some(p), Some(h)) => (p, h),
        _ => return Ok(None),
    };
    let map = match core_embedding(&pcore, &gcore, budget)? {
        Some(m) => m,
        None => return Ok(None),
    };
    // Pair off bundle members by ascending length and stretch each
    // pattern core route along its host route.
    let mut branch = vec![usize::MAX; pattern.n()];
    let mut edge_routes: Vec<Vec<usize>> = vec![Vec::new(); pattern.m()];
    let pbundles = pcore.bundles();
    let hbundles = gcore.bundles();
    for (pk, plist) in &pbundles {
        let hk = (map[pk.0].min(map[pk.1]), map[pk.0].max(map[pk.1]));
        let hlist = &hbundles[&hk];
        for (&(pe, _), &(he, _)) in plist.iter().zip(hlist.iter()) {
            let (pa, _, proute) = &pcore.edges[pe];
            let (ha, _, hroute) = &gcore.edges[he];
            let want_start = gcore.verts[map[*pa]];
            let hroute: Vec<usize> = if gcore.verts[*ha] == want_start {
                hroute.clone()
            } else {
                hroute.iter().rev().copied().collect()
            };
            let lp = proute.len() - 1;
            let lg = hroute.len() - 1;
            debug_assert!(lg >= lp);
            // Pattern vertex i on the route sits at host position i,
            // except the far endpoint which sits at the end.
            for (i, &pv) in proute.iter().enumerate() {
                let hpos = if i == lp { lg } else { i };
                branch[pv] = hroute[hpos];
            }
            for i in 0..lp {
                let pe_id = pattern
                    .edge_between(proute[i], proute[i + 1])
                    .expect("route steps along pattern edges");
                let (from, to) = (i, if i + 1 == lp { lg } else { i + 1 });
                let mut seg: Vec<usize> = hroute[from..=to].to_vec();
                let (smaller, _) = pattern.endpoints(pe_id);
                if proute[i] != smaller {
                    seg.reverse();
                }
                edge_routes[pe_id] = seg;
            }
        }
    }
    let model = SubdivisionModel { branch, edge_routes };
    debug_assert_eq!(verify_subdivision(g, pattern, &model), Ok(()));
    Ok(Some(model))
}

/// `pattern` is a cycle; succeed iff `g` is one cycle at least as long.
fn cycle_model(g: &ColouredGraph, pattern: &ColouredGraph) -> Option<SubdivisionModel> {
    if g.n() != g.m() || g.n() < pattern.n() || !g.vertices().all(|v| g.degree(v) == 2) {
        return None;
    }
    // Walk g around from vertex 0.
    let mut cyc = vec![0usize];
    let mut prev = usize::MAX;
    loop {
        let cur = *cyc.last().unwrap();
        let next = g.neighbours(cur).find(|&w| w != prev).unwrap();
        if next == 0 {
            break;
        }
        prev = cur;
        cyc.push(next);
    }
    if cyc.len() != g.n() {
        return None;
    }
    // Walk the pattern cycle the same way.
    let mut pcyc = vec![0usize];
    let mut prev = usize::MAX;
    loop {
        let cur = *pcyc.last().unwrap();
        let next = pattern.neighbours(cur).find(|&w| w != prev).unwrap();
        if next == 0 {
            break;
        }
        prev = cur;
        pcyc.push(next);
    }
    // First pattern.n() - 1 steps take one g edge each; the final edge
    // back to the start absorbs the slack.
    let mut branch = vec![usize::MAX; pattern.n()];
    for (i, &pv) in pcyc.iter().enumerate() {
        branch[pv] = cyc[i];
    }
    let mut edge_routes = vec![Vec::new(); pattern.m()];
    for i in 0..pcyc.len() {
        let pu = pcyc[i];
        let pv = pcyc[(i + 1) % pcyc.len()];
        let pe = pattern.edge_between(pu, pv).unwrap();
        let mut seg: Vec<usize> = if i + 1 < pcyc.len() {
            vec![cyc[i], cyc[i + 1]]
        } else {
            let mut tail: Vec<usize> = cyc[i..].to_vec();
            tail.push(cyc[0]);
            tail
        };
        let (smaller, _) = pattern.endpoints(pe);
        if pu != smaller {
            seg.reverse();
        }
        edge_routes[pe] = seg;
    }
    let model = SubdivisionModel { branch, edge_routes };
    debug_assert_eq!(verify_subdivision(g, pattern, &model), Ok(()));
    Some(model)
}

/// A recognised wall: the elementary wall it subdivides, the embedding,
/// and the row and vertical paths transported into the host graph.
#[derive(Debug, Clone)]
pub struct SubdividedWall {
    order: usize,
    layout: WallLayout,
    /// Elementary wall vertex to host vertex: the nails.
    nails: Vec<usize>,
    /// Elementary wall edge to host route.
    edge_routes: Vec<Vec<usize>>,
    rows: Vec<Vec<usize>>,
    verticals: Vec<Vec<usize>>,
}

impl SubdividedWall {
    fn build(
        elem: &ColouredGraph,
        layout: WallLayout,
        model: SubdivisionModel,
    ) -> SubdividedWall {
        let transport = |walk: &[usize]| -> Vec<usize> {
            let mut out = vec![model.branch[walk[0]]];
            for pair in walk.windows(2) {
                let e = elem.edge_between(pair[0], pair[1]).expect("layout walks are edges");
                let route = &model.edge_routes[e];
                let (smaller, _) = elem.endpoints(e);
                if pair[0] == smaller {
                    out.extend_from_slice(&route[1..]);
                } else {
                    out.extend(route[..route.len() - 1].iter().rev());
                }
            }
            out
        };
        let rows = layout.rows().iter().map(|r| transport(r)).collect();
        let verticals = layout.verticals().iter().map(|p| transport(p)).collect();
        SubdividedWall {
            order: layout.order(),
            layout,
            nails: model.branch,
            edge_routes: model.edge_routes,
            rows,
            verticals,
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn layout(&self) -> &WallLayout {
        &self.layout
    }

    /// Host vertices of the nails, indexed by elementary wall vertex id.
    pub fn nails(&self) -> &[usize] {
        &self.nails
    }

    pub fn edge_routes(&self) -> &[Vec<usize>] {
        &self.edge_routes
    }

    /// Row paths in the host graph, top to bottom.
    pub fn rows(&self) -> &[Vec<usize>] {
        &self.rows
    }

    /// Vertical zigzag paths in the host graph, left to right.
    pub fn verticals(&self) -> &[Vec<usize>] {
        &self.verticals
    }

    pub fn top_row(&self) -> &[usize] {
        &self.rows[0]
    }

    pub fn left_vertical(&self) -> &[usize] {
        &self.verticals[0]
    }

    /// Host images of the top row's descent points.
    pub fn top_descents(&self) -> Vec<usize> {
        self.layout
            .top_descents()
            .into_iter()
            .map(|w| self.nails[w])
            .collect()
    }

    pub fn row_paths(&self, g: &ColouredGraph) -> Result<Vec<Path>, GraphError> {
        self.rows.iter().map(|r| Path::new(g, r.clone())).collect()
    }

    pub fn vertical_paths(&self, g: &ColouredGraph) -> Result<Vec<Path>, GraphError> {
        self.verticals.iter().map(|p| Path::new(g, p.clone())).collect()
    }

    /// Flatten the embedding into a plain certificate over `g`'s ids.
    pub fn certificate(&self, g: &ColouredGraph) -> WallCertificate {
        let edge_set = |walks: &[Vec<usize>]| -> BTreeSet<usize> {
            walks
                .iter()
                .flat_map(|w| {
                    w.windows(2)
                        .map(|p| g.edge_between(p[0], p[1]).expect("walk steps along edges"))
                })
                .collect()
        };
        WallCertificate {
            order: self.order,
            nails: self.nails.clone(),
            nail_coords: (0..self.nails.len()).map(|w| self.layout.coord(w)).collect(),
            horizontal_edges: edge_set(&self.rows),
            vertical_edges: edge_set(&self.verticals),
            top_row_edges: edge_set(std::slice::from_ref(&self.rows[0])),
            left_column_edges: edge_set(std::slice::from_ref(&self.verticals[0])),
        }
    }
}

/// A recognised wall flattened to plain data: the nails with their grid
/// coordinates, and the horizontal and vertical edge sets (which jointly
/// cover the wall; jog edges appear in both). `top_row_edges` and
/// `left_column_edges` single out the designated row and column.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WallCertificate {
    pub order: usize,
    /// Host ids of the nails, indexed by elementary-wall vertex id.
    pub nails: Vec<usize>,
    /// Grid coordinate of each nail, parallel to `nails`.
    pub nail_coords: Vec<(usize, usize)>,
    pub horizontal_edges: BTreeSet<usize>,
    pub vertical_edges: BTreeSet<usize>,
    pub top_row_edges: BTreeSet<usize>,
    pub left_column_edges: BTreeSet<usize>,
}

/// Decide whether `g` is a wall of order `q`, returning the embedding
/// when it is. Colours are ignored. `Exhausted` is a definite no;
/// `Capped` means the search hit its work cap first.
pub fn is_wall_of_order(g: &ColouredGraph, order: usize, budget: &WorkBudget) -> Search<SubdividedWall> {
    let (elem, layout) = match make_elementary_wall(order) {
        Ok(pair) => pair,
        Err(_) => return Search::Exhausted,
    };
    match subdivision_model(g, &elem, budget) {
        Ok(Some(model)) => Search::Found(SubdividedWall::build(&elem, layout, model)),
        Ok(None) => Search::Exhausted,
        Err(_) => Search::Capped,
    }
}

/// An embedding witnessing that a pattern graph is a topological minor of
/// a host: pattern vertices map injectively to host vertices and pattern
/// edges map to internally disjoint host paths between the images. Unlike
/// [`SubdivisionModel`] there is no coverage requirement; the host may be
/// much larger than the embedded pattern.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TopoEmbedding {
    /// Pattern vertex id to host vertex id.
    pub branch: Vec<usize>,
    /// Pattern edge id to its host path, oriented from the image of the
    /// pattern edge's smaller endpoint.
    pub edge_routes: Vec<Vec<usize>>,
}

/// Check a [`TopoEmbedding`] from first principles.
pub fn verify_topological_embedding(
    host: &ColouredGraph,
    pattern: &ColouredGraph,
    emb: &TopoEmbedding,
) -> Result<(), String> {
    if emb.branch.len() != pattern.n() {
        return Err("branch map has wrong length".into());
    }
    let mut is_branch = vec![false; host.n()];
    for (p, &h) in emb.branch.iter().enumerate() {
        if h >= host.n() {
            return Err(format!("branch image {h} out of range"));
        }
        if is_branch[h] {
            return Err(format!("two pattern vertices share image {h} ({p} is one)"));
        }
        is_branch[h] = true;
    }
    if emb.edge_routes.len() != pattern.m() {
        return Err("route list has wrong length".into());
    }
    let mut interior_used = vec![false; host.n()];
    for (e, route) in emb.edge_routes.iter().enumerate() {
        let (pu, pv) = pattern.endpoints(e);
        if route.len() < 2 {
            return Err(format!("route {e} too short"));
        }
        if route[0] != emb.branch[pu] || *route.last().unwrap() != emb.branch[pv] {
            return Err(format!("route {e} endpoints do not match its pattern edge"));
        }
        for pair in route.windows(2) {
            if host.edge_between(pair[0], pair[1]).is_none() {
                return Err(format!("route {e} uses a non-edge"));
            }
        }
        for &v in &route[1..route.len() - 1] {
            if is_branch[v] {
                return Err(format!("route {e} passes through a branch image"));
            }
            if interior_used[v] {
                return Err(format!("interior vertex {v} on two routes"));
            }
            interior_used[v] = true;
        }
    }
    Ok(())
}

/// Search for `pattern` as a topological minor of `host`. `Found` carries
/// a verified embedding, `Exhausted` means the whole search space was
/// covered without one, and `Capped` means the work cap cut the search
/// short, so absence is not established.
pub fn find_topological_minor(
    host: &ColouredGraph,
    pattern: &ColouredGraph,
    budget: &WorkBudget,
) -> Search<TopoEmbedding> {
    if pattern.n() > host.n() || pattern.m() > host.m() {
        return Search::Exhausted;
    }
    if pattern.n() == 0 {
        return Search::Found(TopoEmbedding { branch: Vec::new(), edge_routes: Vec::new() });
    }
    // Place well-anchored, high-degree pattern vertices first, and route
    // every pattern edge as soon as both its ends are placed. Routing
    // early kills inconsistent placements before they multiply.
    let mut order: Vec<usize> = Vec::with_capacity(pattern.n());
    let mut placed = vec![false; pattern.n()];
    while order.len() < pattern.n() {
        let next = pattern
            .vertices()
            .filter(|&v| !placed[v])
            .max_by_key(|&v| {
                let anchored = pattern.neighbours(v).filter(|&w| placed[w]).count();
                (anchored, pattern.degree(v))
            })
            .unwrap();
        placed[next] = true;
        order.push(next);
    }
    let mut steps: Vec<Step> = Vec::with_capacity(pattern.n() + pattern.m());
    let mut routed = vec![false; pattern.m()];
    let mut in_prefix = vec![false; pattern.n()];
    for &p in &order {
        steps.push(Step::Place(p));
        in_prefix[p] = true;
        for &(w, e) in pattern.incident(p) {
            if in_prefix[w] && !routed[e] {
                routed[e] = true;
                steps.push(Step::Route(e));
            }
        }
    }
    let mut branch = vec![usize::MAX; pattern.n()];
    let mut taken = vec![false; host.n()];
    let mut used = vec![false; host.n()];
    let mut routes = vec![Vec::new(); pattern.m()];
    match solve(host, pattern, &steps, 0, &mut branch, &mut taken, &mut used, &mut routes, budget)
    {
        Ok(true) => {
            let emb = TopoEmbedding { branch, edge_routes: routes };
            debug_assert_eq!(verify_topological_embedding(host, pattern, &emb), Ok(()));
            Search::Found(emb)
        }
        Ok(false) => Search::Exhausted,
        Err(_) => Search::Capped,
    }
}

enum Step {
    /// Choose a host vertex for this pattern vertex.
    Place(usize),
    /// Choose a host path for this pattern edge.
    Route(usize),
}

/// One backtracking step of the topological-minor search. `taken` marks
/// branch vertices, `used` marks interiors of already-routed edges; both
/// are off limits for everything placed later.
#[allow(clippy::too_many_arguments)]
fn solve(
    host: &ColouredGraph,
    pattern: &ColouredGraph,
    steps: &[Step],
    at: usize,
    branch: &mut Vec<usize>,
    taken: &mut Vec<bool>,
    used: &mut Vec<bool>,
    routes: &mut Vec<Vec<usize>>,
    budget: &WorkBudget,
) -> Result<bool, CapExceeded> {
    let Some(step) = steps.get(at) else {
        return Ok(true);
    };
    match *step {
        Step::Place(p) => {
            for h in host.vertices() {
                budget.charge(1)?;
                if taken[h] || used[h] || host.degree(h) < pattern.degree(p) {
                    continue;
                }
                branch[p] = h;
                taken[h] = true;
                if solve(host, pattern, steps, at + 1, branch, taken, used, routes, budget)? {
                    return Ok(true);
                }
                branch[p] = usize::MAX;
                taken[h] = false;
            }
            Ok(false)
        }
        Step::Route(e) => {
            let (pu, pv) = pattern.endpoints(e);
            let mut path = vec![branch[pu]];
            extend_route(
                host, pattern, steps, at, e, branch, taken, used, routes, &mut path,
                branch[pv], budget,
            )
        }
    }
}

/// Depth-first extension of the partial route for pattern edge `e`; on
/// reaching the target, commits the route and moves to the next step.
#[allow(clippy::too_many_arguments)]
fn extend_route(
    host: &ColouredGraph,
    pattern: &ColouredGraph,
    steps: &[Step],
    at: usize,
    e: usize,
    branch: &mut Vec<usize>,
    taken: &mut Vec<bool>,
    used: &mut Vec<bool>,
    routes: &mut Vec<Vec<usize>>,
    path: &mut Vec<usize>,
    target: usize,
    budget: &WorkBudget,
) -> Result<bool, CapExceeded> {
    let cur = *path.last().unwrap();
    for next in host.neighbours(cur) {
        budget.charge(1)?;
        if next == target {
            path.push(next);
            routes[e] = path.clone();
            for &v in &path[1..path.len() - 1] {
                used[v] = true;
            }
            if solve(host, pattern, steps, at + 1, branch, taken, used, routes, budget)? {
                return Ok(true);
            }
            for &v in &path[1..path.len() - 1] {
                used[v] = false;
            }
            routes[e].clear();
            path.pop();
        } else if !taken[next] && !used[next] && !path.contains(&next) {
            path.push(next);
            if extend_route(
                host, pattern, steps, at, e, branch, taken, used, routes, path, target, budget,
            )? {
                return Ok(true);
            }
            path.pop();
        }
    }
    Ok(false)
}

/// Isomorphism of uncoloured simple graphs by refinement plus
/// backtracking. Returns a vertex bijection from `a` to `b` when the
/// graphs are isomorphic.
pub fn graph_isomorphism(
    a: &ColouredGraph,
    b: &ColouredGraph,
    budget: &WorkBudget,
) -> Result<Option<Vec<usize>>, CapExceeded> {
    if a.n() != b.n() || a.m() != b.m() {
        return Ok(None);
    }
    let n = a.n();
    if n == 0 {
        return Ok(Some(Vec::new()));
    }
    fn colours(g: &ColouredGraph) -> Vec<u64> {
        fn mix(h: u64, x: u64) -> u64 {
            (h ^ x).wrapping_mul(0x9e37_79b9_7f4a_7c15).rotate_left(29)
        }
        let mut col: Vec<u64> = g.vertices().map(|v| g.degree(v) as u64 + 1).collect();
        for _ in 0..g.n().min(16) {
            let mut next = vec![0u64; g.n()];
            for v in g.vertices() {
                let mut sig: Vec<u64> = g.neighbours(v).map(|w| col[w]).collect();
                sig.sort_unstable();
                let mut h = mix(col[v], 0x55);
                for x in sig {
                    h = mix(h, x);
                }
                next[v] = h;
            }
            if next == col {
                break;
            }
            col = next;
        }
        col
    }
    let ca = colours(a);
    let cb = colours(b);
    {
        let mut x = ca.clone();
        let mut y = cb.clone();
        x.sort_unstable();
        y.sort_unstable();
        if x != y {
            return Ok(None);
        }
    }
    let mut order: Vec<usize> = Vec::with_capacity(n);
    let mut placed = vec![false; n];
    while order.len() < n {
        let next = (0..n)
            .filter(|&v| !placed[v])
            .max_by_key(|&v| a.neighbours(v).filter(|&w| placed[w]).count())
            .unwrap();
        placed[next] = true;
        order.push(next);
    }
    let mut map = vec![usize::MAX; n];
    let mut used = vec![false; n];
    fn assign(
        depth: usize,
        order: &[usize],
        a: &ColouredGraph,
        b: &ColouredGraph,
        ca: &[u64],
        cb: &[u64],
        map: &mut Vec<usize>,
        used: &mut Vec<bool>,
        budget: &WorkBudget,
    ) -> Result<bool, CapExceeded> {
        if depth == order.len() {
            return Ok(true);
        }
        let p = order[depth];
        'cand: for h in b.vertices() {
            budget.charge(1)?;
            if used[h] || ca[p] != cb[h] {
                continue;
            }
            for q in a.neighbours(p) {
                if map[q] != usize::MAX && b.edge_between(h, map[q]).is_none() {
                    continue 'cand;
                }
            }
            for hq in b.neighbours(h) {
                if let Some(q) = map.iter().position(|&m| m == hq) {
                    if a.edge_between(p, q).is_none() {
                        continue 'cand;
                    }
                }
            }
            map[p] = h;
            used[h] = true;
            if assign(depth + 1, order, a, b, ca, cb, map, used, budget)? {
                return Ok(true);
            }
            map[p] = usize::MAX;
            used[h] = false;
        }
        Ok(false)
    }
    if assign(0, &order, a, b, &ca, &cb, &mut map, &mut used, budget)? {
        debug_assert!(check_isomorphism(a, b, &map));
        Ok(Some(map))
    } else {
        Ok(None)
    }
}

/// Full check that `map` is an isomorphism from `a` to `b`.
pub fn check_isomorphism(a: &ColouredGraph, b: &ColouredGraph, map: &[usize]) -> bool {
    if map.len() != a.n() || a.n() != b.n() || a.m() != b.m() {
        return false;
    }
    let mut seen = vec![false; b.n()];
    for &h in map {
        if h >= b.n() || seen[h] {
            return false;
        }
        seen[h] = true;
    }
    a.edge_ids().all(|e| {
        let (u, v) = a.endpoints(e);
        b.edge_between(map[u], map[v]).is_some()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::caps::Caps;
    use crate::graph::{make_grid, subdivide};

    fn budget() -> crate::caps::WorkBudget {
        Caps::default().budget()
    }

    #[test]
    fn wall_counts_match_closed_forms() {
        for q in 1..=5 {
            let (g, layout) = make_elementary_wall(q).unwrap();
            assert_eq!(g.n(), 2 * q * q + 4 * q, "vertices at order {q}");
            assert_eq!(g.m(), 3 * q * q + 4 * q - 1, "edges at order {q}");
            let deg3 = g.vertices().filter(|&v| g.degree(v) == 3).count();
            let expect3 = if q == 1 { 0 } else { 2 * q * q - 2 };
            assert_eq!(deg3, expect3, "degree-3 count at order {q}");
            assert!(g.vertices().all(|v| (2..=3).contains(&g.degree(v))));
            assert_eq!(g.m() - g.n() + 1, layout.brick_count());
            assert!(g.connected());
        }
        assert!(make_elementary_wall(0).is_err());
    }

    #[test]
    fn order_one_is_a_hexagon() {
        let (g, _) = make_elementary_wall(1).unwrap();
        assert_eq!(g.n(), 6);
        assert_eq!(g.m(), 6);
        assert!(g.vertices().all(|v| g.degree(v) == 2));
    }

    #[test]
    fn layout_paths_cover_all_edges() {
        for q in 1..=4 {
            let (g, layout) = make_elementary_wall(q).unwrap();
            let mut covered = vec![false; g.m()];
            let mut row_owner = vec![None; g.n()];
            for (r, row) in layout.rows().iter().enumerate() {
                Path::new(&g, row.clone()).expect("row is a path");
                for pair in row.windows(2) {
                    covered[g.edge_between(pair[0], pair[1]).unwrap()] = true;
                }
                for &v in row {
                    assert_eq!(row_owner[v], None, "vertex in two rows");
                    row_owner[v] = Some(r);
                }
            }
            assert!(row_owner.iter().all(Option::is_some), "rows cover all vertices");
            let mut col_owner = vec![None; g.n()];
            for (j, p) in layout.verticals().iter().enumerate() {
                Path::new(&g, p.clone()).expect("vertical is a path");
                for pair in p.windows(2) {
                    covered[g.edge_between(pair[0], pair[1]).unwrap()] = true;
                }
                for &v in p {
                    assert_eq!(col_owner[v], None, "vertex in two verticals");
                    col_owner[v] = Some(j);
                }
            }
            assert!(covered.iter().all(|&c| c), "rows and verticals cover all edges");
            assert_eq!(layout.verticals().len(), q + 1);
            assert_eq!(layout.rows().len(), q + 1);
            assert_eq!(layout.top_descents().len(), q + 1);
            for (j, &d) in layout.top_descents().iter().enumerate() {
                assert_eq!(layout.coord(d), (0, 2 * j));
            }
        }
    }

    #[test]
    fn recognises_elementary_walls() {
        for q in 1..=4 {
            let (g, _) = make_elementary_wall(q).unwrap();
            let wall = is_wall_of_order(&g, q, &budget());
            let wall = wall.found().expect("elementary wall recognised");
            assert_eq!(wall.order(), q);
            for row in wall.rows() {
                Path::new(&g, row.clone()).unwrap();
            }
            for p in wall.verticals() {
                Path::new(&g, p.clone()).unwrap();
            }
            if q >= 2 {
                assert!(is_wall_of_order(&g, q + 1, &budget()).is_exhausted());
                assert!(is_wall_of_order(&g, q - 1, &budget()).is_exhausted());
            }
        }
    }

    #[test]
    fn recognises_subdivisions() {
        for q in 1..=3 {
            let (w, _) = make_elementary_wall(q).unwrap();
            let lengths: Vec<usize> = (0..w.m()).map(|e| 1 + (e % 3)).collect();
            let g = subdivide(&w, &lengths).unwrap();
            let wall = is_wall_of_order(&g, q, &budget());
            assert!(wall.is_found(), "subdivided wall of order {q} recognised");
            let wall = wall.found().unwrap();
            // Nails of degree 3 in the host are exactly the degree-3 images.
            let deg3 = wall
                .nails()
                .iter()
                .filter(|&&v| g.degree(v) == 3)
                .count();
            let expect = if q == 1 { 0 } else { 2 * q * q - 2 };
            assert_eq!(deg3, expect);
        }
    }

    #[test]
    fn cycles_are_order_one_walls() {
        for len in [6usize, 7, 11] {
            let mut g = ColouredGraph::plain(len);
            for i in 0..len {
                g.add_edge(i, (i + 1) % len).unwrap();
            }
            assert!(is_wall_of_order(&g, 1, &budget()).is_found(), "cycle of length {len}");
        }
        let mut c5 = ColouredGraph::plain(5);
        for i in 0..5 {
            c5.add_edge(i, (i + 1) % 5).unwrap();
        }
        assert!(is_wall_of_order(&c5, 1, &budget()).is_exhausted());
    }

    #[test]
    fn rejects_non_walls() {
        let g = make_grid(3, 3);
        for q in 1..=3 {
            assert!(is_wall_of_order(&g, q, &budget()).is_exhausted());
        }
        // A wall with one extra edge is no longer a wall.
        let (mut w, _) = make_elementary_wall(2).unwrap();
        let u = w.vertices().find(|&v| w.degree(v) == 2).unwrap();
        let v = w
            .vertices()
            .rev()
            .find(|&v| w.degree(v) == 2 && v != u && w.edge_between(u, v).is_none())
            .unwrap();
        w.add_edge(u, v).unwrap();
        assert!(is_wall_of_order(&w, 2, &budget()).is_exhausted());
    }

    #[test]
    fn recognition_respects_caps() {
        let (w, _) = make_elementary_wall(3).unwrap();
        let caps = Caps::new(10);
        let b = caps.budget();
        assert!(is_wall_of_order(&w, 3, &b).is_capped());
    }

    #[test]
    fn finds_itself_and_subdivisions_as_topological_minors() {
        let (w, _) = make_elementary_wall(2).unwrap();
        let found = find_topological_minor(&w, &w, &budget());
        let emb = found.found().expect("identity embedding");
        assert_eq!(verify_topological_embedding(&w, &w, &emb), Ok(()));

        let lengths: Vec<usize> = (0..w.m()).map(|e| 1 + (e % 2)).collect();
        let host = subdivide(&w, &lengths).unwrap();
        let emb = find_topological_minor(&host, &w, &budget())
            .found()
            .expect("subdivision embeds its pattern");
        assert_eq!(verify_topological_embedding(&host, &w, &emb), Ok(()));
    }

    #[test]
    fn subdivided_graphs_embed_their_patterns() {
        // A handful of shapes up to 8 vertices, including degree > 3.
        let mut shapes: Vec<ColouredGraph> = Vec::new();
        let mut k5 = ColouredGraph::plain(5);
        for u in 0..5 {
            for v in u + 1..5 {
                k5.add_edge(u, v).unwrap();
            }
        }
        shapes.push(k5);
        let mut star = ColouredGraph::plain(6);
        for v in 1..6 {
            star.add_edge(0, v).unwrap();
        }
        shapes.push(star);
        let mut theta = ColouredGraph::plain(8);
        // Two hubs joined by three paths of lengths 2, 3, 3.
        theta.add_edge(0, 2).unwrap();
        theta.add_edge(2, 1).unwrap();
        theta.add_edge(0, 3).unwrap();
        theta.add_edge(3, 4).unwrap();
        theta.add_edge(4, 1).unwrap();
        theta.add_edge(0, 5).unwrap();
        theta.add_edge(5, 6).unwrap();
        theta.add_edge(6, 7).unwrap();
        theta.add_edge(7, 1).unwrap();
        shapes.push(theta);
        for g in &shapes {
            let lengths: Vec<usize> = (0..g.m()).map(|e| 1 + (e % 3)).collect();
            let host = subdivide(g, &lengths).unwrap();
            let emb = find_topological_minor(&host, g, &budget())
                .found()
                .expect("pattern found in its own subdivision");
            assert_eq!(verify_topological_embedding(&host, g, &emb), Ok(()));
        }
    }

    #[test]
    fn small_grid_has_no_k4_topological_minor() {
        let grid = make_grid(2, 2);
        let mut k4 = ColouredGraph::plain(4);
        for u in 0..4 {
            for v in u + 1..4 {
                k4.add_edge(u, v).unwrap();
            }
        }
        assert!(find_topological_minor(&grid, &k4, &budget()).is_exhausted());
        // K4 does sit inside the 3x3 grid topologically.
        let grid3 = make_grid(3, 3);
        let emb = find_topological_minor(&grid3, &k4, &budget())
            .found()
            .expect("K4 in the 3x3 grid");
        assert_eq!(verify_topological_embedding(&grid3, &k4, &emb), Ok(()));
    }

    #[test]
    fn order_one_wall_sits_inside_larger_walls() {
        let (w1, _) = make_elementary_wall(1).unwrap();
        let (w3, _) = make_elementary_wall(3).unwrap();
        let emb = find_topological_minor(&w3, &w1, &budget())
            .found()
            .expect("hexagon inside an order-3 wall");
        assert_eq!(verify_topological_embedding(&w3, &w1, &emb), Ok(()));
    }

    #[test]
    fn topological_minor_search_respects_caps() {
        let (w2, _) = make_elementary_wall(2).unwrap();
        let (w3, _) = make_elementary_wall(3).unwrap();
        let caps = Caps::new(5);
        assert!(find_topological_minor(&w3, &w2, &caps.budget()).is_capped());
    }

    #[test]
    fn certificates_expose_rows_and_columns() {
        let (g, _) = make_elementary_wall(2).unwrap();
        let wall = is_wall_of_order(&g, 2, &budget()).found().unwrap();
        let cert = wall.certificate(&g);
        assert_eq!(cert.order, 2);
        assert_eq!(cert.nails.len(), g.n());
        let all: BTreeSet<usize> = cert
            .horizontal_edges
            .union(&cert.vertical_edges)
            .copied()
            .collect();
        assert_eq!(all.len(), g.m(), "rows and columns cover every edge");
        assert!(cert.top_row_edges.is_subset(&cert.horizontal_edges));
        assert!(cert.left_column_edges.is_subset(&cert.vertical_edges));
        // Jog edges are shared between the two sets at order >= 2.
        assert!(cert.horizontal_edges.intersection(&cert.vertical_edges).next().is_some());
    }

    #[test]
    fn isomorphism_on_small_graphs() {
        let (a, _) = make_elementary_wall(2).unwrap();
        // Relabel by a fixed permutation.
        let n = a.n();
        let perm: Vec<usize> = (0..n).map(|v| (v * 7 + 3) % n).collect();
        let mut b = ColouredGraph::plain(n);
        for e in a.edge_ids() {
            let (u, v) = a.endpoints(e);
            b.add_edge(perm[u], perm[v]).unwrap();
        }
        let map = graph_isomorphism(&a, &b, &budget()).unwrap().unwrap();
        assert!(check_isomorphism(&a, &b, &map));
        let grid = make_grid(4, 4);
        let (w2, _) = make_elementary_wall(2).unwrap();
        assert_eq!(grid.n(), w2.n());
        assert!(graph_isomorphism(&grid, &w2, &budget()).unwrap().is_none());
    }
}
