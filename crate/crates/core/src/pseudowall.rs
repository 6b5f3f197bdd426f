//! Coloured pseudo-walls: path families in a host graph whose
//! intersection graph is a subdivided wall, together with a long marked
//! path that threads the nails and a word written in vertex colours.
//!
//! A *simple* pseudo-wall of order `l` in a host `G` consists of
//!
//! * a family `P` of pairwise disjoint paths (the nails) and a family
//!   `Q` of pairwise disjoint paths such that the intersection graph of
//!   `P` and `Q` is the 1-subdivision of the elementary wall of order
//!   `l`, with the nails on the branch side;
//! * a path `A` that traverses every nail in row-major wall order,
//!   consecutive nails joined by single linking edges;
//! * edge colour `B` on exactly the edges of `A`, vertex colour `R` on
//!   exactly the nail endpoints;
//! * a word over the alphabet written on a prefix of the top-row nails,
//!   each carrying one letter on all its vertices, with no alphabet
//!   colours anywhere else.
//!
//! A *complex* pseudo-wall relaxes the shape: only core subfamilies
//! form the wall, `A` meets each nail in exactly one endpoint and no
//! `Q`-path at all, leftover paths hang off the top-row descents
//! through connector paths, and the word sits on the descent nails.
//!
//! Validators are deterministic referees that report which clause
//! failed; generators build hosts that pass them by construction.

use crate::bramble::Bramble;
use crate::caps::{Search, WorkBudget};
use crate::graph::{
    ColouredGraph, GraphError, Path, PathSystem, Signature, COLOUR_B, COLOUR_R,
};
use crate::topo::{graph_isomorphism, make_elementary_wall, WallLayout};
use std::collections::BTreeSet;

/// A simple pseudo-wall, stored as raw vertex sequences in the host.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PseudoWall {
    pub order: usize,
    pub p: Vec<Vec<usize>>,
    pub q: Vec<Vec<usize>>,
    pub a: Vec<usize>,
    pub word: Vec<String>,
}

/// A complex pseudo-wall: the full families plus the indices of the
/// core subfamilies and the connector paths for the leftovers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComplexPseudoWall {
    pub order: usize,
    pub p: Vec<Vec<usize>>,
    pub q: Vec<Vec<usize>>,
    pub a: Vec<usize>,
    pub word: Vec<String>,
    pub p_core: Vec<usize>,
    pub q_core: Vec<usize>,
    pub connectors: Vec<Vec<usize>>,
}

/// Either kind, as read from the text format.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PseudoWallDoc {
    Simple(PseudoWall),
    Complex(ComplexPseudoWall),
}

/// The clause of the definition a violation belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Clause {
    /// The path families are not well formed.
    PathFamilies,
    /// The intersection graph is not the subdivided wall of this order.
    WallShape,
    /// `A` does not traverse the nails in row-major order.
    RowMajorPath,
    /// The `B`-coloured edges are not exactly the edges of `A`.
    BlueEdges,
    /// The `R`-coloured vertices are not exactly the nail endpoints.
    RedVertices,
    /// The word colouring is broken.
    WordColours,
    /// The core subfamilies do not form a wall (complex only).
    CoreWall,
    /// `A` does not meet the families as required (complex only).
    PathAnchors,
    /// The leftover paths are not connected to the descents (complex only).
    Connectors,
}

impl std::fmt::Display for Clause {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            Clause::PathFamilies => "path-families",
            Clause::WallShape => "wall-shape",
            Clause::RowMajorPath => "row-major-path",
            Clause::BlueEdges => "blue-edges",
            Clause::RedVertices => "red-vertices",
            Clause::WordColours => "word-colours",
            Clause::CoreWall => "core-wall",
            Clause::PathAnchors => "path-anchors",
            Clause::Connectors => "connectors",
        };
        write!(f, "{name}")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WallViolation {
    pub clause: Clause,
    pub detail: String,
}

impl std::fmt::Display for WallViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[{}] {}", self.clause, self.detail)
    }
}

/// What a successful simple validation learned.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimpleWallReport {
    pub order: usize,
    /// The word read off the colours.
    pub word: Vec<String>,
    /// Nail indices in row-major wall order, as discovered along `A`.
    pub nail_order: Vec<usize>,
    /// Wall coordinates of each nail, indexed like `p`.
    pub coords: Vec<(usize, usize)>,
}

fn violation(clause: Clause, detail: impl Into<String>) -> WallViolation {
    WallViolation { clause, detail: detail.into() }
}

/// Validate a simple pseudo-wall and additionally require the stored
/// word to match the colours.
pub fn validate_simple(
    g: &ColouredGraph,
    pw: &PseudoWall,
) -> Result<SimpleWallReport, Vec<WallViolation>> {
    let report = check_simple(g, pw)?;
    if report.word != pw.word {
        return Err(vec![violation(
            Clause::WordColours,
            format!(
                "the colours spell {:?} but the wall claims {:?}",
                report.word, pw.word
            ),
        )]);
    }
    Ok(report)
}

/// Read the encoded word off a simple pseudo-wall, ignoring its stored
/// word field.
pub fn decode_word(g: &ColouredGraph, pw: &PseudoWall) -> Result<Vec<String>, Vec<WallViolation>> {
    check_simple(g, pw).map(|r| r.word)
}

fn build_family(
    g: &ColouredGraph,
    raw: &[Vec<usize>],
    name: &str,
    out: &mut Vec<WallViolation>,
) -> Option<Vec<Path>> {
    let mut paths = Vec::with_capacity(raw.len());
    for (i, seq) in raw.iter().enumerate() {
        match Path::new(g, seq.clone()) {
            Ok(p) => paths.push(p),
            Err(e) => {
                out.push(violation(Clause::PathFamilies, format!("{name} path {i}: {e}")));
                return None;
            }
        }
    }
    match PathSystem::new(g, paths) {
        Ok(sys) => Some(sys.paths().to_vec()),
        Err(e) => {
            out.push(violation(Clause::PathFamilies, format!("{name} family: {e}")));
            None
        }
    }
}

fn owner_map(n: usize, paths: &[Path]) -> Vec<Option<usize>> {
    let mut owner = vec![None; n];
    for (i, p) in paths.iter().enumerate() {
        for &v in p.vertices() {
            owner[v] = Some(i);
        }
    }
    owner
}

/// Split `A` into the nail paths it concatenates and return their order.
fn split_along_a(
    a: &Path,
    p_paths: &[Path],
    p_owner: &[Option<usize>],
) -> Result<Vec<usize>, String> {
    let seq = a.vertices();
    let mut used = vec![false; p_paths.len()];
    let mut order = Vec::new();
    let mut pos = 0;
    while pos < seq.len() {
        let v = seq[pos];
        let Some(i) = p_owner[v] else {
            return Err(format!("vertex {v} on the path lies on no nail path"));
        };
        if used[i] {
            return Err(format!("nail path {i} is visited twice"));
        }
        let nail = p_paths[i].vertices();
        let len = nail.len();
        if pos + len > seq.len() {
            return Err(format!("the path ends inside nail path {i}"));
        }
        let window = &seq[pos..pos + len];
        let forward = window == nail;
        let backward = window.iter().rev().eq(nail.iter());
        if !forward && !backward {
            return Err(format!(
                "starting at vertex {v} the path does not traverse nail path {i} in full"
            ));
        }
        used[i] = true;
        order.push(i);
        pos += len;
        // If more follows, the next edge of the path is the single link.
    }
    if let Some(missed) = used.iter().position(|&u| !u) {
        return Err(format!("the path never visits nail path {missed}"));
    }
    Ok(order)
}

/// Read the word: the letters on the row-major prefix of nails. Every
/// alphabet-coloured vertex must lie on a prefix nail carrying exactly
/// its letter.
fn read_word(
    g: &ColouredGraph,
    p_paths: &[Path],
    order: &[usize],
    top_row_len: usize,
    out: &mut Vec<WallViolation>,
) -> Vec<String> {
    let nail_letters = |i: usize| -> Result<Option<String>, String> {
        let mut letter: Option<String> = None;
        let mut any = false;
        let mut all = true;
        for &v in p_paths[i].vertices() {
            let ls = g.vertex_letters(v);
            match ls.len() {
                0 => all = false,
                1 => {
                    any = true;
                    match &letter {
                        None => letter = Some(ls[0].to_string()),
                        Some(prev) if prev == ls[0] => {}
                        Some(prev) => {
                            return Err(format!(
                                "nail path {i} mixes letters {prev} and {}",
                                ls[0]
                            ))
                        }
                    }
                }
                _ => return Err(format!("vertex {v} carries more than one letter")),
            }
        }
        match (any, all) {
            (false, _) => Ok(None),
            (true, true) => Ok(letter),
            (true, false) => Err(format!("nail path {i} is only partly coloured")),
        }
    };
    let mut word = Vec::new();
    let mut ended = false;
    for (t, &i) in order.iter().enumerate() {
        match nail_letters(i) {
            Ok(Some(letter)) => {
                if ended {
                    out.push(violation(
                        Clause::WordColours,
                        format!("nail {t} is coloured after an uncoloured nail"),
                    ));
                    return word;
                }
                if t >= top_row_len {
                    out.push(violation(
                        Clause::WordColours,
                        format!("the word runs past the top row at nail {t}"),
                    ));
                    return word;
                }
                word.push(letter);
            }
            Ok(None) => ended = true,
            Err(msg) => {
                out.push(violation(Clause::WordColours, msg));
                return word;
            }
        }
    }
    if word.is_empty() {
        out.push(violation(Clause::WordColours, "the word is empty"));
    }
    word
}

fn check_simple(
    g: &ColouredGraph,
    pw: &PseudoWall,
) -> Result<SimpleWallReport, Vec<WallViolation>> {
    let mut out: Vec<WallViolation> = Vec::new();
    let Some(p_paths) = build_family(g, &pw.p, "nail", &mut out) else {
        return Err(out);
    };
    let Some(q_paths) = build_family(g, &pw.q, "cross", &mut out) else {
        return Err(out);
    };
    let (wall, layout) = match make_elementary_wall(pw.order) {
        Ok(w) => w,
        Err(e) => {
            out.push(violation(Clause::WallShape, format!("order {}: {e}", pw.order)));
            return Err(out);
        }
    };
    let p_owner = owner_map(g.n(), &p_paths);

    // Row-major traversal by A.
    let a_path = match Path::new(g, pw.a.clone()) {
        Ok(a) => Some(a),
        Err(e) => {
            out.push(violation(Clause::RowMajorPath, format!("the A path is broken: {e}")));
            None
        }
    };
    let order = a_path.as_ref().and_then(|a| match split_along_a(a, &p_paths, &p_owner) {
        Ok(order) => Some(order),
        Err(msg) => {
            out.push(violation(Clause::RowMajorPath, msg));
            None
        }
    });

    // Wall shape, relative to the row-major order.
    let row_major: Vec<usize> = layout.rows().iter().flatten().copied().collect();
    if p_paths.len() != wall.n() {
        out.push(violation(
            Clause::WallShape,
            format!("{} nail paths, but a wall of order {} has {} vertices",
                p_paths.len(), pw.order, wall.n()),
        ));
    }
    if q_paths.len() != wall.m() {
        out.push(violation(
            Clause::WallShape,
            format!("{} cross paths, but a wall of order {} has {} edges",
                q_paths.len(), pw.order, wall.m()),
        ));
    }
    let mut coords = vec![(usize::MAX, usize::MAX); p_paths.len()];
    if let Some(order) = &order {
        if order.len() == row_major.len() {
            // Wall vertex of each nail path under the row-major order.
            let mut wall_of_p = vec![usize::MAX; p_paths.len()];
            for (t, &i) in order.iter().enumerate() {
                wall_of_p[i] = row_major[t];
                coords[i] = layout.coord(row_major[t]);
            }
            let mut seen_edge = vec![false; wall.m()];
            for (j, q) in q_paths.iter().enumerate() {
                let mut met = BTreeSet::new();
                for &v in q.vertices() {
                    if let Some(i) = p_owner[v] {
                        met.insert(i);
                    }
                }
                if met.len() != 2 {
                    out.push(violation(
                        Clause::WallShape,
                        format!("cross path {j} meets {} nail paths instead of 2", met.len()),
                    ));
                    continue;
                }
                let mut it = met.into_iter();
                let (i1, i2) = (it.next().unwrap(), it.next().unwrap());
                match wall.edge_between(wall_of_p[i1], wall_of_p[i2]) {
                    Some(e) if !seen_edge[e] => seen_edge[e] = true,
                    Some(_) => out.push(violation(
                        Clause::WallShape,
                        format!("two cross paths join nail paths {i1} and {i2}"),
                    )),
                    None => out.push(violation(
                        Clause::WallShape,
                        format!("cross path {j} joins nail paths {i1} and {i2}, \
                                 which are not wall-adjacent"),
                    )),
                }
            }
        }
    }

    // Blue edges are exactly the edges of A. Only meaningful once A
    // itself parsed, so a broken A reports a single clause.
    if let (Some(a), Some(_)) = (&a_path, &order) {
        let blue: BTreeSet<usize> =
            g.edge_ids().filter(|&e| g.edge_has_colour(e, COLOUR_B)).collect();
        let on_a: BTreeSet<usize> = a.edges().iter().copied().collect();
        for &e in blue.difference(&on_a).take(3) {
            let (u, v) = g.endpoints(e);
            out.push(violation(
                Clause::BlueEdges,
                format!("edge {e} ({u}-{v}) is coloured B but is not on the A path"),
            ));
        }
        for &e in on_a.difference(&blue).take(3) {
            let (u, v) = g.endpoints(e);
            out.push(violation(
                Clause::BlueEdges,
                format!("edge {e} ({u}-{v}) of the A path is not coloured B"),
            ));
        }
    }

    // Red vertices are exactly the nail endpoints.
    let red: BTreeSet<usize> =
        g.vertices().filter(|&v| g.vertex_has_colour(v, COLOUR_R)).collect();
    let ends: BTreeSet<usize> =
        p_paths.iter().flat_map(|p| [p.first(), p.last()]).collect();
    for &v in red.difference(&ends).take(3) {
        out.push(violation(
            Clause::RedVertices,
            format!("vertex {v} is coloured R but is not a nail endpoint"),
        ));
    }
    for &v in ends.difference(&red).take(3) {
        out.push(violation(
            Clause::RedVertices,
            format!("nail endpoint {v} is not coloured R"),
        ));
    }

    // The word.
    let word = match &order {
        Some(order) if order.len() == row_major.len() => {
            read_word(g, &p_paths, order, layout.top_row().len(), &mut out)
        }
        _ => Vec::new(),
    };

    if out.is_empty() {
        Ok(SimpleWallReport {
            order: pw.order,
            word,
            nail_order: order.unwrap(),
            coords,
        })
    } else {
        Err(out)
    }
}

// ---------------------------------------------------------------------
// Complex validation
// ---------------------------------------------------------------------

/// Coordinate transforms of the wall layout that are graph
/// automorphisms; returned as vertex permutations (including identity).
fn wall_automorphisms(wall: &ColouredGraph, layout: &WallLayout) -> Vec<Vec<usize>> {
    let q = layout.order();
    let rows = q + 1;
    let cols = 2 * q + 2;
    let transforms: [&dyn Fn(usize, usize) -> (usize, usize); 4] = [
        &|r, c| (r, c),
        &|r, c| (r, cols - 1 - c),
        &|r, c| (rows - 1 - r, c),
        &|r, c| (rows - 1 - r, cols - 1 - c),
    ];
    let mut perms = Vec::new();
    'next: for t in transforms {
        let mut perm = vec![usize::MAX; wall.n()];
        for v in wall.vertices() {
            let (r, c) = layout.coord(v);
            let (r2, c2) = t(r, c);
            match layout.id_at(r2, c2) {
                Some(w) => perm[v] = w,
                None => continue 'next,
            }
        }
        for e in wall.edge_ids() {
            let (u, v) = wall.endpoints(e);
            if wall.edge_between(perm[u], perm[v]).is_none() {
                continue 'next;
            }
        }
        perms.push(perm);
    }
    perms
}

/// Validate a complex pseudo-wall.
pub fn validate_complex(
    g: &ColouredGraph,
    cw: &ComplexPseudoWall,
    budget: &WorkBudget,
) -> Result<(), Vec<WallViolation>> {
    let mut out: Vec<WallViolation> = Vec::new();
    let Some(p_paths) = build_family(g, &cw.p, "nail", &mut out) else {
        return Err(out);
    };
    let Some(q_paths) = build_family(g, &cw.q, "cross", &mut out) else {
        return Err(out);
    };
    let check_indices = |idx: &[usize], limit: usize, what: &str,
                         out: &mut Vec<WallViolation>| -> bool {
        let distinct: BTreeSet<usize> = idx.iter().copied().collect();
        if distinct.len() != idx.len() || idx.iter().any(|&i| i >= limit) {
            out.push(violation(
                Clause::PathFamilies,
                format!("{what} indices must be distinct and in range"),
            ));
            return false;
        }
        true
    };
    if !check_indices(&cw.p_core, p_paths.len(), "core nail", &mut out)
        || !check_indices(&cw.q_core, q_paths.len(), "core cross", &mut out)
    {
        return Err(out);
    }
    let (wall, layout) = match make_elementary_wall(cw.order) {
        Ok(w) => w,
        Err(e) => {
            out.push(violation(Clause::CoreWall, format!("order {}: {e}", cw.order)));
            return Err(out);
        }
    };

    // Core shape: contract each core cross path to an edge between the
    // two core nails it meets, and match the result against the wall.
    let core_p: Vec<&Path> = cw.p_core.iter().map(|&i| &p_paths[i]).collect();
    let core_owner = {
        let mut owner = vec![None; g.n()];
        for (k, p) in core_p.iter().enumerate() {
            for &v in p.vertices() {
                owner[v] = Some(k);
            }
        }
        owner
    };
    let mut iso: Option<Vec<usize>> = None;
    if core_p.len() != wall.n() {
        out.push(violation(
            Clause::CoreWall,
            format!("{} core nails, wall of order {} needs {}",
                core_p.len(), cw.order, wall.n()),
        ));
    } else if cw.q_core.len() != wall.m() {
        out.push(violation(
            Clause::CoreWall,
            format!("{} core cross paths, wall of order {} needs {}",
                cw.q_core.len(), cw.order, wall.m()),
        ));
    } else {
        let mut contracted = ColouredGraph::plain(core_p.len());
        let mut broken = false;
        for &j in &cw.q_core {
            let mut met = BTreeSet::new();
            for &v in q_paths[j].vertices() {
                if let Some(k) = core_owner[v] {
                    met.insert(k);
                }
            }
            if met.len() != 2 {
                out.push(violation(
                    Clause::CoreWall,
                    format!("core cross path {j} meets {} core nails instead of 2", met.len()),
                ));
                broken = true;
                continue;
            }
            let mut it = met.into_iter();
            let (k1, k2) = (it.next().unwrap(), it.next().unwrap());
            if contracted.add_edge(k1, k2).is_err() {
                out.push(violation(
                    Clause::CoreWall,
                    format!("two core cross paths join core nails {k1} and {k2}"),
                ));
                broken = true;
            }
        }
        if !broken {
            match graph_isomorphism(&contracted, &wall, budget) {
                Ok(Some(map)) => iso = Some(map),
                Ok(None) => out.push(violation(
                    Clause::CoreWall,
                    "the contracted core is not a wall of this order",
                )),
                Err(_) => out.push(violation(
                    Clause::CoreWall,
                    "the core shape check ran out of budget",
                )),
            }
        }
    }

    // A meets each nail in exactly one endpoint and the cross paths not
    // at all.
    let a_path = match Path::new(g, cw.a.clone()) {
        Ok(a) => Some(a),
        Err(e) => {
            out.push(violation(Clause::PathAnchors, format!("the A path is broken: {e}")));
            None
        }
    };
    if let Some(a) = &a_path {
        let on_a: BTreeSet<usize> = a.vertices().iter().copied().collect();
        for (i, p) in p_paths.iter().enumerate() {
            let ends_on_a =
                usize::from(on_a.contains(&p.first())) + usize::from(on_a.contains(&p.last()));
            let interior_on_a =
                p.vertices()[1..p.vertices().len() - 1].iter().any(|v| on_a.contains(v));
            if ends_on_a != 1 || interior_on_a {
                out.push(violation(
                    Clause::PathAnchors,
                    format!("nail path {i} must meet the A path in exactly one endpoint"),
                ));
            }
        }
        for (j, q) in q_paths.iter().enumerate() {
            if q.vertices().iter().any(|v| on_a.contains(v)) {
                out.push(violation(
                    Clause::PathAnchors,
                    format!("cross path {j} meets the A path"),
                ));
            }
        }
    }

    // Blue and red colours, as for simple walls but with A's own edges.
    if let Some(a) = &a_path {
        let blue: BTreeSet<usize> =
            g.edge_ids().filter(|&e| g.edge_has_colour(e, COLOUR_B)).collect();
        let on_a: BTreeSet<usize> = a.edges().iter().copied().collect();
        if blue != on_a {
            out.push(violation(
                Clause::BlueEdges,
                "the B-coloured edges are not exactly the edges of the A path",
            ));
        }
    }
    let red: BTreeSet<usize> =
        g.vertices().filter(|&v| g.vertex_has_colour(v, COLOUR_R)).collect();
    let ends: BTreeSet<usize> =
        p_paths.iter().flat_map(|p| [p.first(), p.last()]).collect();
    if red != ends {
        out.push(violation(
            Clause::RedVertices,
            "the R-coloured vertices are not exactly the nail endpoints",
        ));
    }

    // Word on the descent nails plus connectors for the leftovers, under
    // some wall orientation.
    if let Some(iso) = &iso {
        // iso maps contracted index -> wall id; invert.
        let mut of_wall = vec![usize::MAX; wall.n()];
        for (k, &w) in iso.iter().enumerate() {
            of_wall[w] = k;
        }
        let leftovers: Vec<(char, usize)> = (0..p_paths.len())
            .filter(|i| !cw.p_core.contains(i))
            .map(|i| ('p', i))
            .chain((0..q_paths.len()).filter(|j| !cw.q_core.contains(j)).map(|j| ('q', j)))
            .collect();
        let mut best: Option<Vec<WallViolation>> = None;
        for auto in wall_automorphisms(&wall, &layout) {
            let mut local: Vec<WallViolation> = Vec::new();
            // Anchor nails, left to right, under this orientation: the
            // p-indices of the top-row descents.
            let anchors: Vec<usize> = layout
                .top_descents()
                .iter()
                .map(|&d| cw.p_core[of_wall[auto[d]]])
                .collect();
            check_complex_word(g, &p_paths, &anchors, &cw.word, &mut local);
            check_connectors(g, cw, &p_paths, &q_paths, a_path.as_ref(), &leftovers,
                &anchors, &mut local);
            if local.is_empty() {
                best = Some(local);
                break;
            }
            if best.as_ref().is_none_or(|b| local.len() < b.len()) {
                best = Some(local);
            }
        }
        out.extend(best.unwrap_or_default());
    }

    if out.is_empty() {
        Ok(())
    } else {
        Err(out)
    }
}

fn check_complex_word(
    g: &ColouredGraph,
    p_paths: &[Path],
    anchors: &[usize],
    word: &[String],
    out: &mut Vec<WallViolation>,
) {
    if word.len() != anchors.len() {
        out.push(violation(
            Clause::WordColours,
            format!("the word has {} letters but there are {} descent nails",
                word.len(), anchors.len()),
        ));
        return;
    }
    let mut lettered: BTreeSet<usize> = BTreeSet::new();
    for (t, &i) in anchors.iter().enumerate() {
        for &v in p_paths[i].vertices() {
            lettered.insert(v);
            let ls = g.vertex_letters(v);
            if ls != vec![word[t].as_str()] {
                out.push(violation(
                    Clause::WordColours,
                    format!("vertex {v} of descent nail {t} should carry exactly {}", word[t]),
                ));
                return;
            }
        }
    }
    for v in g.vertices() {
        if !lettered.contains(&v) && !g.vertex_letters(v).is_empty() {
            out.push(violation(
                Clause::WordColours,
                format!("vertex {v} carries a letter but is not on a descent nail"),
            ));
            return;
        }
    }
}

fn check_connectors(
    g: &ColouredGraph,
    cw: &ComplexPseudoWall,
    p_paths: &[Path],
    q_paths: &[Path],
    a_path: Option<&Path>,
    leftovers: &[(char, usize)],
    anchors: &[usize],
    out: &mut Vec<WallViolation>,
) {
    if cw.connectors.len() != leftovers.len() {
        out.push(violation(
            Clause::Connectors,
            format!("{} connectors for {} leftover paths",
                cw.connectors.len(), leftovers.len()),
        ));
        return;
    }
    let mut reserved: BTreeSet<usize> = p_paths
        .iter()
        .chain(q_paths.iter())
        .flat_map(|p| p.vertices().iter().copied())
        .collect();
    if let Some(a) = a_path {
        reserved.extend(a.vertices().iter().copied());
    }
    let anchor_vertices: BTreeSet<usize> = anchors
        .iter()
        .flat_map(|&i| p_paths[i].vertices().iter().copied())
        .collect();
    for (k, seq) in cw.connectors.iter().enumerate() {
        let c = match Path::new(g, seq.clone()) {
            Ok(c) => c,
            Err(e) => {
                out.push(violation(Clause::Connectors, format!("connector {k}: {e}")));
                continue;
            }
        };
        let (kind, idx) = leftovers[k];
        let source = if kind == 'p' { &p_paths[idx] } else { &q_paths[idx] };
        if !source.contains(c.first()) {
            out.push(violation(
                Clause::Connectors,
                format!("connector {k} does not start on its leftover path"),
            ));
        }
        if !anchor_vertices.contains(&c.last()) {
            out.push(violation(
                Clause::Connectors,
                format!("connector {k} does not end on a descent nail"),
            ));
        }
        let interior: &[usize] = match c.vertices() {
            vs if vs.len() >= 2 => &vs[1..vs.len() - 1],
            _ => &[],
        };
        for &v in interior {
            if reserved.contains(&v) {
                out.push(violation(
                    Clause::Connectors,
                    format!("connector {k} passes through reserved vertex {v}"),
                ));
                break;
            }
        }
        reserved.extend(interior.iter().copied());
    }
}

// ---------------------------------------------------------------------
// Generation
// ---------------------------------------------------------------------

struct NailPlan {
    /// First host vertex id of each nail's path, in row-major order.
    base: Vec<usize>,
    /// Number of vertices on each nail's path.
    len: Vec<usize>,
    /// Wall vertex id at each row-major position.
    row_major: Vec<usize>,
    /// Row-major position of each wall vertex id.
    pos_of: Vec<usize>,
    total_vertices: usize,
}

fn plan_nails(wall: &ColouredGraph, layout: &WallLayout) -> NailPlan {
    let row_major: Vec<usize> = layout.rows().iter().flatten().copied().collect();
    let mut pos_of = vec![usize::MAX; wall.n()];
    for (t, &v) in row_major.iter().enumerate() {
        pos_of[v] = t;
    }
    let mut base = Vec::with_capacity(row_major.len());
    let mut len = Vec::with_capacity(row_major.len());
    let mut next = 0usize;
    for &wv in &row_major {
        let l = wall.degree(wv).max(2) + 1;
        base.push(next);
        len.push(l);
        next += l;
    }
    NailPlan { base, len, row_major, pos_of, total_vertices: next }
}

impl NailPlan {
    /// Host vertex carrying the given wall edge on the given wall
    /// vertex's nail path: a distinct early vertex per incident edge.
    fn slot(&self, wall: &ColouredGraph, wv: usize, e: usize) -> usize {
        let mut incident: Vec<usize> =
            wall.incident(wv).iter().map(|&(_, eid)| eid).collect();
        incident.sort_unstable();
        let s = incident.iter().position(|&x| x == e).expect("edge is incident");
        self.base[self.pos_of[wv]] + s
    }

    fn path_vertices(&self, t: usize) -> Vec<usize> {
        (self.base[t]..self.base[t] + self.len[t]).collect()
    }

    fn path_last(&self, t: usize) -> usize {
        self.base[t] + self.len[t] - 1
    }
}

/// Build a host graph that encodes `word` with the given power: it
/// carries a simple pseudo-wall of order `|word|^power` by
/// construction. Each nail becomes a short path with one slot vertex
/// per incident wall edge, wall edges become single-edge cross paths
/// between slots, and fresh linking edges chain the nails row-major.
pub fn generate_host(
    word: &[String],
    power: u32,
    sig: &Signature,
) -> Result<(ColouredGraph, PseudoWall), GraphError> {
    if word.is_empty() {
        return Err(GraphError::Parameter("the word must not be empty".into()));
    }
    for letter in word {
        if !sig.has_letter(letter) {
            return Err(GraphError::UnknownColour(letter.clone()));
        }
    }
    if power == 0 {
        return Err(GraphError::Parameter("the power must be at least 1".into()));
    }
    let order = word
        .len()
        .checked_pow(power)
        .filter(|&l| l <= 64)
        .ok_or_else(|| GraphError::Parameter("order above 64 is not supported".into()))?;
    let (wall, layout) = make_elementary_wall(order)?;
    let plan = plan_nails(&wall, &layout);
    let mut g = ColouredGraph::new(plan.total_vertices, sig.clone());

    // Nail paths.
    let mut p: Vec<Vec<usize>> = Vec::with_capacity(plan.row_major.len());
    for t in 0..plan.row_major.len() {
        let vs = plan.path_vertices(t);
        for pair in vs.windows(2) {
            let e = g.add_edge(pair[0], pair[1])?;
            g.add_edge_colour(e, COLOUR_B)?;
        }
        g.add_vertex_colour(vs[0], COLOUR_R)?;
        g.add_vertex_colour(*vs.last().unwrap(), COLOUR_R)?;
        p.push(vs);
    }
    // Cross paths: one host edge per wall edge, slot to slot.
    let mut q: Vec<Vec<usize>> = Vec::with_capacity(wall.m());
    for e in wall.edge_ids() {
        let (wu, wv) = wall.endpoints(e);
        let (su, sv) = (plan.slot(&wall, wu, e), plan.slot(&wall, wv, e));
        g.add_edge(su, sv)?;
        q.push(vec![su, sv]);
    }
    // Linking edges and the A path.
    let mut a: Vec<usize> = Vec::with_capacity(plan.total_vertices);
    for t in 0..plan.row_major.len() {
        a.extend(plan.path_vertices(t));
        if t + 1 < plan.row_major.len() {
            let e = g.add_edge(plan.path_last(t), plan.base[t + 1])?;
            g.add_edge_colour(e, COLOUR_B)?;
        }
    }
    // The word, on the first nails of the top row.
    for (t, letter) in word.iter().enumerate() {
        for v in plan.path_vertices(t) {
            g.add_vertex_colour(v, letter)?;
        }
    }
    let pw = PseudoWall { order, p, q, a, word: word.to_vec() };
    Ok((g, pw))
}

/// The cross bramble planted by `generate_host`: one element per (row,
/// vertical) pair of the wall, taking all host vertices of the nails on
/// that row and that vertical path. Quadratic in the order; intended
/// for small walls.
pub fn planted_cross_bramble(
    g: &ColouredGraph,
    pw: &PseudoWall,
) -> Result<Bramble, Vec<crate::bramble::BrambleViolation>> {
    let (wall, layout) = make_elementary_wall(pw.order).expect("validated order");
    let plan = plan_nails(&wall, &layout);
    let mut elements = Vec::new();
    for row in layout.rows() {
        for vertical in layout.verticals() {
            let mut el: BTreeSet<usize> = BTreeSet::new();
            for &wv in row.iter().chain(vertical.iter()) {
                el.extend(pw.p[plan.pos_of[wv]].iter().copied());
            }
            elements.push(el.into_iter().collect());
        }
    }
    Bramble::new(g, elements)
}

/// Build a host carrying a complex pseudo-wall that encodes `word` on
/// the top-row descents of a core wall of order `|word| - 1`.
pub fn generate_complex_host(
    word: &[String],
    sig: &Signature,
) -> Result<(ColouredGraph, ComplexPseudoWall), GraphError> {
    if word.len() < 3 {
        return Err(GraphError::Parameter(
            "a complex host needs a word of at least three letters".into(),
        ));
    }
    for letter in word {
        if !sig.has_letter(letter) {
            return Err(GraphError::UnknownColour(letter.clone()));
        }
    }
    let order = word.len() - 1;
    let (wall, layout) = make_elementary_wall(order)?;
    let plan = plan_nails(&wall, &layout);
    let n_core = plan.row_major.len();
    // Extra vertices: leftover nail path (3), leftover cross path (2),
    // two connector interiors.
    let pr_base = plan.total_vertices;
    let qr_base = pr_base + 3;
    let conn_base = qr_base + 2;
    let total = conn_base + 2;
    let mut g = ColouredGraph::new(total, sig.clone());

    let mut p: Vec<Vec<usize>> = Vec::with_capacity(n_core + 1);
    for t in 0..n_core {
        let vs = plan.path_vertices(t);
        for pair in vs.windows(2) {
            g.add_edge(pair[0], pair[1])?;
        }
        g.add_vertex_colour(vs[0], COLOUR_R)?;
        g.add_vertex_colour(*vs.last().unwrap(), COLOUR_R)?;
        p.push(vs);
    }
    let mut q: Vec<Vec<usize>> = Vec::with_capacity(wall.m() + 1);
    for e in wall.edge_ids() {
        let (wu, wv) = wall.endpoints(e);
        let (su, sv) = (plan.slot(&wall, wu, e), plan.slot(&wall, wv, e));
        g.add_edge(su, sv)?;
        q.push(vec![su, sv]);
    }
    // Leftover nail path and leftover cross path.
    g.add_edge(pr_base, pr_base + 1)?;
    g.add_edge(pr_base + 1, pr_base + 2)?;
    g.add_vertex_colour(pr_base, COLOUR_R)?;
    g.add_vertex_colour(pr_base + 2, COLOUR_R)?;
    p.push(vec![pr_base, pr_base + 1, pr_base + 2]);
    g.add_edge(qr_base, qr_base + 1)?;
    q.push(vec![qr_base, qr_base + 1]);

    // A: one endpoint of every nail path (the last vertex of each core
    // nail, one end of the leftover nail), chained by fresh edges.
    let mut a: Vec<usize> = (0..n_core).map(|t| plan.path_last(t)).collect();
    a.push(pr_base + 2);
    for w in 1..a.len() {
        let e = g.add_edge(a[w - 1], a[w])?;
        g.add_edge_colour(e, COLOUR_B)?;
    }

    // Connectors: leftover nail and leftover cross path each reach a
    // descent nail through a fresh interior vertex. Slots sit at the
    // start of a nail path and A uses the end, so slot vertices are
    // safe interior targets.
    let descents = layout.top_descents();
    let anchor0 = plan.pos_of[descents[0]];
    let anchor1 = plan.pos_of[descents[1]];
    let c1 = vec![pr_base, conn_base, plan.base[anchor0] + 1];
    g.add_edge(c1[0], c1[1])?;
    g.add_edge(c1[1], c1[2])?;
    let c2 = vec![qr_base, conn_base + 1, plan.base[anchor1] + 1];
    g.add_edge(c2[0], c2[1])?;
    g.add_edge(c2[1], c2[2])?;

    // The word sits on the descent nails.
    for (t, &d) in descents.iter().enumerate() {
        for v in plan.path_vertices(plan.pos_of[d]) {
            g.add_vertex_colour(v, &word[t])?;
        }
    }

    let cw = ComplexPseudoWall {
        order,
        p,
        q,
        a,
        word: word.to_vec(),
        p_core: (0..n_core).collect(),
        q_core: (0..wall.m()).collect(),
        connectors: vec![c1, c2],
    };
    Ok((g, cw))
}

// ---------------------------------------------------------------------
// Enumeration and size bounds
// ---------------------------------------------------------------------

/// Enumerate the simple pseudo-walls of the given order whose cross
/// paths are single edges. The `B` and `R` colours pin down the A path
/// and the nails (up to direction), so the search space is the choice
/// of one host edge per wall edge; every reported wall passes
/// `validate_simple`.
pub fn enumerate_pseudo_walls(
    g: &ColouredGraph,
    order: usize,
    budget: &WorkBudget,
) -> Search<Vec<PseudoWall>> {
    let Ok((wall, layout)) = make_elementary_wall(order) else {
        return Search::Exhausted;
    };
    // The A path is forced: the B-coloured edges must form one path.
    let blue: Vec<usize> = g.edge_ids().filter(|&e| g.edge_has_colour(e, COLOUR_B)).collect();
    let Some(a_seq) = edges_to_path(g, &blue) else {
        return Search::Exhausted;
    };
    let row_major: Vec<usize> = layout.rows().iter().flatten().copied().collect();
    let mut found: Vec<PseudoWall> = Vec::new();
    for direction in [a_seq.clone(), a_seq.iter().rev().copied().collect()] {
        // Nails from the R marks along A.
        let Some(p) = nails_from_marks(g, &direction) else { continue };
        if p.len() != wall.n() {
            continue;
        }
        let mut owner = vec![None; g.n()];
        for (i, nail) in p.iter().enumerate() {
            for &v in nail {
                owner[v] = Some(i);
            }
        }
        // Candidate host edges per wall edge.
        let mut candidates: Vec<Vec<(usize, usize, usize)>> = vec![Vec::new(); wall.m()];
        for e in g.edge_ids() {
            let (u, v) = g.endpoints(e);
            if let (Some(i), Some(j)) = (owner[u], owner[v]) {
                if i != j {
                    if let Some(we) = wall.edge_between(row_major[i], row_major[j]) {
                        candidates[we].push((e, u, v));
                    }
                }
            }
        }
        if candidates.iter().any(|c| c.is_empty()) {
            continue;
        }
        let mut vertex_used = vec![false; g.n()];
        let mut chosen: Vec<Vec<usize>> = Vec::with_capacity(wall.m());
        if pick_crosses(
            g, &p, &direction, order, &candidates, 0, &mut vertex_used, &mut chosen,
            &mut found, budget,
        )
        .is_err()
        {
            return Search::Capped;
        }
    }
    if found.is_empty() {
        Search::Exhausted
    } else {
        Search::Found(found)
    }
}

#[allow(clippy::too_many_arguments)]
fn pick_crosses(
    g: &ColouredGraph,
    p: &[Vec<usize>],
    a: &[usize],
    order: usize,
    candidates: &[Vec<(usize, usize, usize)>],
    at: usize,
    vertex_used: &mut [bool],
    chosen: &mut Vec<Vec<usize>>,
    found: &mut Vec<PseudoWall>,
    budget: &WorkBudget,
) -> Result<(), crate::caps::CapExceeded> {
    if at == candidates.len() {
        let mut pw = PseudoWall {
            order,
            p: p.to_vec(),
            q: chosen.clone(),
            a: a.to_vec(),
            word: Vec::new(),
        };
        if let Ok(word) = decode_word(g, &pw) {
            pw.word = word;
            found.push(pw);
        }
        return Ok(());
    }
    for &(_, u, v) in &candidates[at] {
        budget.charge(1)?;
        if vertex_used[u] || vertex_used[v] {
            continue;
        }
        vertex_used[u] = true;
        vertex_used[v] = true;
        chosen.push(vec![u, v]);
        pick_crosses(g, p, a, order, candidates, at + 1, vertex_used, chosen, found, budget)?;
        chosen.pop();
        vertex_used[u] = false;
        vertex_used[v] = false;
    }
    Ok(())
}

/// Arrange the given edges into a simple path if possible, returning
/// its vertex sequence.
fn edges_to_path(g: &ColouredGraph, edges: &[usize]) -> Option<Vec<usize>> {
    if edges.is_empty() {
        return None;
    }
    let mut deg: std::collections::BTreeMap<usize, Vec<usize>> = std::collections::BTreeMap::new();
    for &e in edges {
        let (u, v) = g.endpoints(e);
        deg.entry(u).or_default().push(v);
        deg.entry(v).or_default().push(u);
    }
    if deg.values().any(|nb| nb.len() > 2) {
        return None;
    }
    let ends: Vec<usize> =
        deg.iter().filter(|(_, nb)| nb.len() == 1).map(|(&v, _)| v).collect();
    if ends.len() != 2 {
        return None;
    }
    let mut seq = vec![ends[0]];
    let mut prev = usize::MAX;
    let mut cur = ends[0];
    while seq.len() <= edges.len() {
        let next = deg[&cur].iter().copied().find(|&w| w != prev)?;
        seq.push(next);
        prev = cur;
        cur = next;
        if cur == ends[1] {
            break;
        }
    }
    if seq.len() != edges.len() + 1 {
        return None; // a cycle component exists alongside the path
    }
    Some(seq)
}

/// Split a vertex sequence into nail paths at the R marks: each segment
/// runs from one R vertex to the next, and consecutive segments are
/// separated by a single linking edge.
fn nails_from_marks(g: &ColouredGraph, seq: &[usize]) -> Option<Vec<Vec<usize>>> {
    let mut nails = Vec::new();
    let mut pos = 0;
    while pos < seq.len() {
        if !g.vertex_has_colour(seq[pos], COLOUR_R) {
            return None;
        }
        let mut end = pos + 1;
        while end < seq.len() && !g.vertex_has_colour(seq[end], COLOUR_R) {
            end += 1;
        }
        if end == seq.len() {
            return None;
        }
        nails.push(seq[pos..=end].to_vec());
        pos = end + 1;
    }
    Some(nails)
}

/// Host sizes for encodings of growing word lengths at a fixed power,
/// with the least-squares slope of log size against log length.
pub fn size_bound_check(power: u32, lengths: &[usize]) -> Result<(Vec<(usize, usize)>, f64), GraphError> {
    let sig = Signature::default_letters();
    let letters = sig.sigma().to_vec();
    let mut points = Vec::with_capacity(lengths.len());
    for &len in lengths {
        let word: Vec<String> =
            (0..len).map(|i| letters[i % letters.len()].clone()).collect();
        let (g, _) = generate_host(&word, power, &sig)?;
        points.push((len, g.n()));
    }
    let xs: Vec<f64> = points.iter().map(|&(l, _)| (l as f64).ln()).collect();
    let ys: Vec<f64> = points.iter().map(|&(_, n)| (n as f64).ln()).collect();
    let mx = xs.iter().sum::<f64>() / xs.len() as f64;
    let my = ys.iter().sum::<f64>() / ys.len() as f64;
    let num: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    Ok((points, if den == 0.0 { 0.0 } else { num / den }))
}

// ---------------------------------------------------------------------
// Text format
// ---------------------------------------------------------------------

/// Serialise a simple pseudo-wall.
pub fn simple_to_text(pw: &PseudoWall) -> String {
    let mut out = String::new();
    out.push_str("pseudowall simple\n");
    doc_body(&mut out, pw.order, &pw.word, &pw.p, &pw.q, &pw.a);
    out
}

/// Serialise a complex pseudo-wall.
pub fn complex_to_text(cw: &ComplexPseudoWall) -> String {
    let mut out = String::new();
    out.push_str("pseudowall complex\n");
    doc_body(&mut out, cw.order, &cw.word, &cw.p, &cw.q, &cw.a);
    let join = |ids: &[usize]| {
        ids.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(" ")
    };
    out.push_str(&format!("pcore {}\n", join(&cw.p_core)));
    out.push_str(&format!("qcore {}\n", join(&cw.q_core)));
    for c in &cw.connectors {
        out.push_str(&format!("connector {}\n", join(c)));
    }
    out
}

fn doc_body(
    out: &mut String,
    order: usize,
    word: &[String],
    p: &[Vec<usize>],
    q: &[Vec<usize>],
    a: &[usize],
) {
    let join = |ids: &[usize]| {
        ids.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(" ")
    };
    out.push_str(&format!("order {order}\n"));
    out.push_str(&format!("word {}\n", word.join(" ")));
    for path in p {
        out.push_str(&format!("p {}\n", join(path)));
    }
    for path in q {
        out.push_str(&format!("q {}\n", join(path)));
    }
    out.push_str(&format!("a {}\n", join(a)));
}

/// Parse the pseudo-wall text format.
pub fn parse_pseudo_wall(src: &str) -> Result<PseudoWallDoc, GraphError> {
    let mut kind: Option<bool> = None; // true = simple
    let mut order: Option<usize> = None;
    let mut word: Option<Vec<String>> = None;
    let mut p: Vec<Vec<usize>> = Vec::new();
    let mut q: Vec<Vec<usize>> = Vec::new();
    let mut a: Option<Vec<usize>> = None;
    let mut p_core: Option<Vec<usize>> = None;
    let mut q_core: Option<Vec<usize>> = None;
    let mut connectors: Vec<Vec<usize>> = Vec::new();
    let parse_ids = |fields: &[&str], line: usize| -> Result<Vec<usize>, GraphError> {
        fields
            .iter()
            .map(|f| {
                f.parse::<usize>().map_err(|_| GraphError::Parse {
                    line,
                    msg: format!("bad vertex id {f:?}"),
                })
            })
            .collect()
    };
    for (no, raw) in src.lines().enumerate() {
        let line = no + 1;
        let text = raw.split('#').next().unwrap_or("").trim();
        if text.is_empty() {
            continue;
        }
        let fields: Vec<&str> = text.split_whitespace().collect();
        let err = |msg: String| GraphError::Parse { line, msg };
        match fields[0] {
            "pseudowall" => {
                if kind.is_some() {
                    return Err(err("duplicate pseudowall line".into()));
                }
                match fields.get(1) {
                    Some(&"simple") => kind = Some(true),
                    Some(&"complex") => kind = Some(false),
                    _ => return Err(err("expected 'pseudowall simple' or 'pseudowall complex'".into())),
                }
            }
            _ if kind.is_none() => {
                return Err(err("the file must start with a pseudowall line".into()))
            }
            "order" => {
                if fields.len() != 2 || order.is_some() {
                    return Err(err("order takes one value, once".into()));
                }
                order = Some(
                    fields[1]
                        .parse()
                        .map_err(|_| GraphError::Parse { line, msg: "bad order".into() })?,
                );
            }
            "word" => {
                if word.is_some() {
                    return Err(err("duplicate word line".into()));
                }
                word = Some(fields[1..].iter().map(|s| s.to_string()).collect());
            }
            "p" => p.push(parse_ids(&fields[1..], line)?),
            "q" => q.push(parse_ids(&fields[1..], line)?),
            "a" => {
                if a.is_some() {
                    return Err(err("duplicate a line".into()));
                }
                a = Some(parse_ids(&fields[1..], line)?);
            }
            "pcore" => p_core = Some(parse_ids(&fields[1..], line)?),
            "qcore" => q_core = Some(parse_ids(&fields[1..], line)?),
            "connector" => connectors.push(parse_ids(&fields[1..], line)?),
            other => return Err(err(format!("unknown line kind {other:?}"))),
        }
    }
    let simple = kind.ok_or(GraphError::Parse { line: 0, msg: "empty input".into() })?;
    let order = order.ok_or(GraphError::Parse { line: 0, msg: "missing order line".into() })?;
    let word = word.unwrap_or_default();
    let a = a.ok_or(GraphError::Parse { line: 0, msg: "missing a line".into() })?;
    if simple {
        if p_core.is_some() || q_core.is_some() || !connectors.is_empty() {
            return Err(GraphError::Parse {
                line: 0,
                msg: "core and connector lines belong to complex walls".into(),
            });
        }
        Ok(PseudoWallDoc::Simple(PseudoWall { order, p, q, a, word }))
    } else {
        Ok(PseudoWallDoc::Complex(ComplexPseudoWall {
            order,
            p,
            q,
            a,
            word,
            p_core: p_core
                .ok_or(GraphError::Parse { line: 0, msg: "missing pcore line".into() })?,
            q_core: q_core
                .ok_or(GraphError::Parse { line: 0, msg: "missing qcore line".into() })?,
            connectors,
        }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::caps::Caps;

    fn sig() -> Signature {
        Signature::default_letters()
    }

    fn letters(ls: &[&str]) -> Vec<String> {
        ls.iter().map(|s| s.to_string()).collect()
    }

    /// Full colour maps of a graph, for surgical recolouring.
    fn colour_maps(g: &ColouredGraph) -> (Vec<(usize, Vec<String>)>, Vec<(usize, Vec<String>)>) {
        let vs = g
            .vertices()
            .map(|v| (v, g.vertex_colours(v).iter().cloned().collect::<Vec<_>>()))
            .collect();
        let es = g
            .edge_ids()
            .map(|e| (e, g.edge_colours(e).iter().cloned().collect::<Vec<_>>()))
            .collect();
        (vs, es)
    }

    #[test]
    fn generated_hosts_validate_and_decode() {
        for (word, power, order) in [
            (letters(&["C1"]), 1, 1),
            (letters(&["C1", "C2"]), 1, 2),
            (letters(&["C2", "C1", "C2"]), 1, 3),
            (letters(&["C1", "C2"]), 2, 4),
        ] {
            let (g, pw) = generate_host(&word, power, &sig()).unwrap();
            assert_eq!(pw.order, order);
            assert_eq!(g.n(), 8 * order * order + 12 * order - 2);
            let report = validate_simple(&g, &pw).unwrap();
            assert_eq!(report.word, word);
            assert_eq!(decode_word(&g, &pw).unwrap(), word);
            assert_eq!(report.nail_order.len(), 2 * order * order + 4 * order);
        }
    }

    #[test]
    fn planted_bramble_is_a_bramble() {
        let (g, pw) = generate_host(&letters(&["C1", "C2"]), 1, &sig()).unwrap();
        let bramble = planted_cross_bramble(&g, &pw).unwrap();
        assert_eq!(bramble.len(), 9); // (order + 1)^2
    }

    #[test]
    fn mutations_trigger_exactly_their_clause() {
        let (g, pw) = generate_host(&letters(&["C1", "C2"]), 1, &sig()).unwrap();

        // Drop a cross path: wall shape only.
        let mut broken = pw.clone();
        broken.q.remove(0);
        let clauses = clauses_of(&g, &broken);
        assert_eq!(clauses, vec![Clause::WallShape]);

        // Strip B from one linking edge: blue edges only.
        let (vs, mut es) = colour_maps(&g);
        let link = pw.a[pw.p[0].len() - 1]; // last vertex of the first nail
        let next = pw.a[pw.p[0].len()];
        let link_edge = g.edge_between(link, next).unwrap();
        es[link_edge].1.clear();
        let g2 = g.recolour(&vs, &es).unwrap();
        assert_eq!(clauses_of(&g2, &pw), vec![Clause::BlueEdges]);

        // Mark an interior vertex R: red vertices only.
        let (mut vs, es) = colour_maps(&g);
        let interior = pw.p[0][1];
        vs[interior].1.push("R".into());
        let g3 = g.recolour(&vs, &es).unwrap();
        assert_eq!(clauses_of(&g3, &pw), vec![Clause::RedVertices]);

        // Strip the letter from one vertex of a word nail: word only.
        let (mut vs, es) = colour_maps(&g);
        let lettered = pw.p[1][0]; // endpoint of the second top nail: R + C2
        vs[lettered].1.retain(|c| c == "R");
        let g4 = g.recolour(&vs, &es).unwrap();
        assert_eq!(clauses_of(&g4, &pw), vec![Clause::WordColours]);

        // Truncate A: row-major only (dependent checks stay quiet).
        let mut broken = pw.clone();
        broken.a.truncate(broken.a.len() - pw.p.last().unwrap().len() - 1);
        assert_eq!(clauses_of(&g, &broken), vec![Clause::RowMajorPath]);

        // Two nail paths sharing a vertex: families only.
        let mut broken = pw.clone();
        broken.p[1][0] = pw.p[0][0];
        assert_eq!(clauses_of(&g, &broken), vec![Clause::PathFamilies]);
    }

    fn clauses_of(g: &ColouredGraph, pw: &PseudoWall) -> Vec<Clause> {
        let mut cs: Vec<Clause> = validate_simple(g, pw)
            .unwrap_err()
            .into_iter()
            .map(|v| v.clause)
            .collect();
        cs.sort();
        cs.dedup();
        cs
    }

    #[test]
    fn the_claimed_word_must_match_the_colours() {
        let (g, mut pw) = generate_host(&letters(&["C1", "C2"]), 1, &sig()).unwrap();
        pw.word = letters(&["C2", "C2"]);
        let vs = validate_simple(&g, &pw).unwrap_err();
        assert!(vs.iter().all(|v| v.clause == Clause::WordColours));
        // decode ignores the claim.
        assert_eq!(decode_word(&g, &pw).unwrap(), letters(&["C1", "C2"]));
    }

    #[test]
    fn complex_hosts_validate() {
        let word = letters(&["C1", "C2", "C1"]);
        let (g, cw) = generate_complex_host(&word, &sig()).unwrap();
        assert_eq!(cw.order, 2);
        validate_complex(&g, &cw, &Caps::default().budget()).unwrap();
    }

    #[test]
    fn complex_violations_are_reported_by_clause() {
        let word = letters(&["C1", "C2", "C1"]);
        let (g, cw) = generate_complex_host(&word, &sig()).unwrap();
        let budget = Caps::default().budget();

        let mut broken = cw.clone();
        broken.connectors.pop();
        let vs = validate_complex(&g, &broken, &budget).unwrap_err();
        assert!(vs.iter().any(|v| v.clause == Clause::Connectors));

        let mut broken = cw.clone();
        broken.q_core.pop();
        let vs = validate_complex(&g, &broken, &budget).unwrap_err();
        assert!(vs.iter().any(|v| v.clause == Clause::CoreWall));

        let mut broken = cw.clone();
        broken.word[0] = "C2".into();
        let vs = validate_complex(&g, &broken, &budget).unwrap_err();
        assert!(vs.iter().any(|v| v.clause == Clause::WordColours));
    }

    #[test]
    fn enumeration_finds_the_planted_wall() {
        let (g, pw) = generate_host(&letters(&["C1"]), 1, &sig()).unwrap();
        let walls = enumerate_pseudo_walls(&g, 1, &Caps::default().budget())
            .found()
            .unwrap();
        assert!(!walls.is_empty());
        for w in &walls {
            let report = validate_simple(&g, w).unwrap();
            assert_eq!(report.word, letters(&["C1"]));
        }
        let planted_q: BTreeSet<Vec<usize>> = pw.q.iter().cloned().collect();
        assert!(
            walls.iter().any(|w| {
                let qs: BTreeSet<Vec<usize>> = w.q.iter().cloned().collect();
                qs == planted_q && w.p == pw.p && w.a == pw.a
            }),
            "the planted wall is among the {} found", walls.len()
        );
    }

    #[test]
    fn enumeration_is_exhausted_on_unmarked_graphs() {
        let g = crate::graph::make_grid(3, 3);
        assert!(enumerate_pseudo_walls(&g, 1, &Caps::default().budget()).is_exhausted());
    }

    #[test]
    fn enumeration_respects_caps() {
        let (g, _) = generate_host(&letters(&["C1", "C2"]), 1, &sig()).unwrap();
        let caps = Caps::new(5);
        assert!(enumerate_pseudo_walls(&g, 2, &caps.budget()).is_capped());
    }

    #[test]
    fn size_growth_is_quadratic_in_the_word_length() {
        let (points, slope) = size_bound_check(1, &[2, 3, 4, 5, 6]).unwrap();
        assert_eq!(points.len(), 5);
        for &(len, n) in &points {
            assert_eq!(n, 8 * len * len + 12 * len - 2);
        }
        assert!(slope <= 2.0, "slope {slope}");
        assert!(slope > 1.0, "slope {slope}");
    }

    #[test]
    fn text_round_trips() {
        let (_, pw) = generate_host(&letters(&["C1", "C2"]), 1, &sig()).unwrap();
        let text = simple_to_text(&pw);
        match parse_pseudo_wall(&text).unwrap() {
            PseudoWallDoc::Simple(back) => assert_eq!(back, pw),
            _ => panic!("kind changed in flight"),
        }
        let (_, cw) = generate_complex_host(&letters(&["C1", "C2", "C1"]), &sig()).unwrap();
        let text = complex_to_text(&cw);
        match parse_pseudo_wall(&text).unwrap() {
            PseudoWallDoc::Complex(back) => assert_eq!(back, cw),
            _ => panic!("kind changed in flight"),
        }
    }

    #[test]
    fn parse_rejects_malformed_documents() {
        assert!(parse_pseudo_wall("").is_err());
        assert!(parse_pseudo_wall("order 2\n").is_err());
        assert!(parse_pseudo_wall("pseudowall simple\nword C1\n").is_err());
        assert!(parse_pseudo_wall("pseudowall simple\norder 1\na 0 1\npcore 0\n").is_err());
        assert!(parse_pseudo_wall("pseudowall simple\norder x\na 0\n").is_err());
    }
}
