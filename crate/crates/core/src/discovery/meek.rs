use super::graph::Cpdag;

/// Which Meek rule forces `a → b` for the undirected edge `a – b`, if any.
fn forced(g: &Cpdag, a: usize, b: usize) -> Option<u8> {
    let n = g.n_vars();
    // R1: c → a, c and b nonadjacent
    if (0..n).any(|c| g.has_directed(c, a) && c != b && !g.is_adjacent(c, b)) {
        return Some(1);
    }
    // R2: a → c → b
    if (0..n).any(|c| g.has_directed(a, c) && g.has_directed(c, b)) {
        return Some(2);
    }
    // R3: a – c → b, a – d → b, c and d nonadjacent
    let kite: Vec<usize> = (0..n)
        .filter(|&c| g.has_undirected(a, c) && g.has_directed(c, b))
        .collect();
    for (i, &c) in kite.iter().enumerate() {
        if kite[i + 1..].iter().any(|&d| !g.is_adjacent(c, d)) {
            return Some(3);
        }
    }
    // R4: a – c → d → b, c and b nonadjacent, a adjacent to d
    for c in g.neighbors(a) {
        if c == b || g.is_adjacent(c, b) {
            continue;
        }
        if (0..n).any(|d| g.has_directed(c, d) && g.has_directed(d, b) && g.is_adjacent(a, d)) {
            return Some(4);
        }
    }
    None
}

/// Applies Meek rules R1–R4 until no undirected edge can be oriented.
/// Candidate edges are scanned in index order, so the result is
/// deterministic.
pub fn meek_orient(g: &Cpdag) -> Cpdag {
    let mut g = g.clone();
    loop {
        let mut changed = false;
        for (x, y) in g.undirected_edges() {
            if !g.has_undirected(x, y) {
                continue;
            }
            if forced(&g, x, y).is_some() {
                g.orient(x, y);
                changed = true;
            } else if forced(&g, y, x).is_some() {
                g.orient(y, x);
                changed = true;
            }
        }
        if !changed {
            return g;
        }
    }
}
