use super::{degrees, Graph, NodeMask};

/// Coreness of every node (Batagelj–Zaversnik bucket peeling).
pub fn core_decomposition(g: &Graph) -> Vec<usize> {
    core_decomposition_masked(g, &NodeMask::for_graph(g))
}

/// Coreness within the surviving subgraph; removed nodes report 0.
pub fn core_decomposition_masked(g: &Graph, mask: &NodeMask) -> Vec<usize> {
    let n = g.node_count();
    let mut deg = degrees(g, mask);
    let max_deg = deg.iter().copied().max().unwrap_or(0);

    // vert holds surviving nodes sorted by current degree; bin[d] is the
    // first slot of degree d; pos is the inverse of vert.
    let mut bin = vec![0usize; max_deg + 2];
    for v in mask.surviving() {
        bin[deg[v] + 1] += 1;
    }
    for d in 1..bin.len() {
        bin[d] += bin[d - 1];
    }
    let mut next = bin.clone();
    let mut vert = vec![0usize; mask.surviving_count()];
    let mut pos = vec![usize::MAX; n];
    for v in mask.surviving() {
        pos[v] = next[deg[v]];
        vert[pos[v]] = v;
        next[deg[v]] += 1;
    }

    for i in 0..vert.len() {
        let v = vert[i];
        for &u in g.neighbors(v) {
            if mask.is_removed(u) || deg[u] <= deg[v] {
                continue;
            }
            let du = deg[u];
            let pu = pos[u];
            let pw = bin[du];
            let w = vert[pw];
            if u != w {
                vert.swap(pu, pw);
                pos[u] = pw;
                pos[w] = pu;
            }
            bin[du] += 1;
            deg[u] -= 1;
        }
    }
    for (v, d) in deg.iter_mut().enumerate() {
        if mask.is_removed(v) {
            *d = 0;
        }
    }
    deg
}
