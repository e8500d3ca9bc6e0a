//! Separation of blossom and connectivity cuts on the support graph of a
//! fractional edge vector.
//!
//! Blossom cuts come from a Gomory–Hu tree (Gusfield's construction): with
//! every vertex an odd terminal, a minimum odd cut is one of the tree's
//! fundamental cuts with an odd side. Connectivity cuts come from a
//! Stoer–Wagner global minimum cut, or directly from the components when the
//! support is disconnected.

use std::collections::{BTreeSet, VecDeque};

use crate::error::{Error, Result};
use crate::geom::Segment;
use crate::instance::UnionFind;

/// Edges at or below this weight are dropped from the support graph.
pub const SUPPORT_EPS: f64 = 1e-7;
/// A cut is violated when its value is below `1 − VIOLATION_EPS`.
pub const VIOLATION_EPS: f64 = 1e-7;

const FLOW_EPS: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct WeightedSupportGraph {
    n: usize,
    edges: Vec<(usize, usize, f64)>,
}

impl WeightedSupportGraph {
    /// Keeps edges heavier than [`SUPPORT_EPS`]; parallel entries are summed.
    pub fn new(n: usize, weights: &[(Segment, f64)]) -> Self {
        let mut acc = std::collections::BTreeMap::new();
        for &(e, w) in weights {
            *acc.entry((e.a(), e.b())).or_insert(0.0) += w;
        }
        let edges = acc
            .into_iter()
            .filter(|&(_, w)| w > SUPPORT_EPS)
            .map(|((a, b), w)| (a, b, w))
            .collect();
        WeightedSupportGraph { n, edges }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize, f64)] {
        &self.edges
    }

    fn dense(&self) -> Vec<Vec<f64>> {
        let mut m = vec![vec![0.0; self.n]; self.n];
        for &(a, b, w) in &self.edges {
            m[a][b] += w;
            m[b][a] += w;
        }
        m
    }
}

/// A vertex set `S` and the weight of `δ(S)`. Members are sorted and always
/// contain vertex 0 (a set and its complement define the same cut).
#[derive(Clone, Debug, PartialEq)]
pub struct VertexCut {
    pub members: Vec<usize>,
    pub cut_value: f64,
}

pub type OddSetCut = VertexCut;
pub type ConnCut = VertexCut;

impl VertexCut {
    fn canonical(side: &[bool], weights: &[(Segment, f64)]) -> Self {
        let flip = !side[0];
        let members: Vec<usize> = (0..side.len()).filter(|&v| side[v] != flip).collect();
        let cut_value = cut_weight(side, weights);
        VertexCut { members, cut_value }
    }

    pub fn contains(&self, v: usize) -> bool {
        self.members.binary_search(&v).is_ok()
    }

    /// Edges of `δ(S)` among the given candidates.
    pub fn crossing_edges<'a>(&'a self, edges: &'a [Segment]) -> impl Iterator<Item = usize> + 'a {
        edges
            .iter()
            .enumerate()
            .filter(move |(_, e)| self.contains(e.a()) != self.contains(e.b()))
            .map(|(i, _)| i)
    }
}

/// Total weight of the edges with exactly one endpoint in `side`.
pub fn cut_weight(side: &[bool], weights: &[(Segment, f64)]) -> f64 {
    weights
        .iter()
        .filter(|(e, _)| side[e.a()] != side[e.b()])
        .map(|&(_, w)| w)
        .sum()
}

/// Maximum flow between `s` and `t` in an undirected capacity matrix by
/// augmenting paths with capacity scaling. Returns the value and the source
/// side of a minimum cut.
pub fn max_flow(cap: &[Vec<f64>], s: usize, t: usize) -> (f64, Vec<bool>) {
    let n = cap.len();
    let mut res: Vec<Vec<f64>> = cap.to_vec();
    let max_cap = cap.iter().flatten().cloned().fold(0.0, f64::max);
    let mut delta = if max_cap > 0.0 {
        2f64.powi(max_cap.log2().floor() as i32)
    } else {
        0.0
    };
    let mut prev = vec![usize::MAX; n];
    let mut augment = |res: &mut Vec<Vec<f64>>, threshold: f64| loop {
        prev.iter_mut().for_each(|p| *p = usize::MAX);
        prev[s] = s;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            if u == t {
                break;
            }
            for v in 0..n {
                if prev[v] == usize::MAX && res[u][v] > threshold {
                    prev[v] = u;
                    queue.push_back(v);
                }
            }
        }
        if prev[t] == usize::MAX {
            return;
        }
        let mut bottleneck = f64::INFINITY;
        let mut v = t;
        while v != s {
            let u = prev[v];
            bottleneck = bottleneck.min(res[u][v]);
            v = u;
        }
        let mut v = t;
        while v != s {
            let u = prev[v];
            res[u][v] -= bottleneck;
            res[v][u] += bottleneck;
            v = u;
        }
    };
    while delta > 1e-6 {
        augment(&mut res, delta * (1.0 - 1e-12));
        delta /= 2.0;
    }
    augment(&mut res, FLOW_EPS);

    let mut side = vec![false; n];
    side[s] = true;
    let mut queue = VecDeque::from([s]);
    while let Some(u) = queue.pop_front() {
        for v in 0..n {
            if !side[v] && res[u][v] > FLOW_EPS {
                side[v] = true;
                queue.push_back(v);
            }
        }
    }
    let value: f64 = (0..n).map(|v| cap[s][v] - res[s][v]).sum();
    (value.max(0.0), side)
}

/// Gomory–Hu cut tree rooted at vertex 0: `parent[v]` and the minimum cut
/// value `value[v]` of the tree edge `(v, parent[v])` for `v ≥ 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct GomoryHuTree {
    pub parent: Vec<usize>,
    pub value: Vec<f64>,
}

impl GomoryHuTree {
    pub fn n(&self) -> usize {
        self.parent.len()
    }

    /// Tree edges `(v, parent[v], value)`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (1..self.n()).map(move |v| (v, self.parent[v], self.value[v]))
    }

    /// Membership of the subtree below `v`; the fundamental cut of the edge
    /// `(v, parent[v])`.
    pub fn subtree(&self, v: usize) -> Vec<bool> {
        let n = self.n();
        let mut inside = vec![false; n];
        for u in 0..n {
            let mut w = u;
            let mut steps = 0;
            while w != 0 && w != v && steps <= n {
                w = self.parent[w];
                steps += 1;
            }
            inside[u] = w == v;
        }
        inside
    }

    /// Minimum edge value on the tree path between `u` and `v`.
    pub fn min_cut_value(&self, u: usize, v: usize) -> f64 {
        let path_to_root = |mut w: usize| {
            let mut path = vec![w];
            while w != 0 {
                w = self.parent[w];
                path.push(w);
            }
            path
        };
        let pu = path_to_root(u);
        let pv = path_to_root(v);
        let on_v: BTreeSet<usize> = pv.iter().copied().collect();
        let lca = *pu.iter().find(|w| on_v.contains(w)).expect("common root");
        let mut best = f64::INFINITY;
        for path in [&pu, &pv] {
            for &w in path.iter().take_while(|&&w| w != lca) {
                best = best.min(self.value[w]);
            }
        }
        best
    }
}

/// Gusfield's construction with `n − 1` max-flow calls.
pub fn gomory_hu(g: &WeightedSupportGraph) -> Result<GomoryHuTree> {
    let n = g.n;
    if n < 2 {
        return Err(Error::TooSmall("Gomory–Hu tree needs at least two vertices".into()));
    }
    let cap = g.dense();
    let mut parent = vec![0usize; n];
    let mut value = vec![0.0; n];
    for s in 1..n {
        let t = parent[s];
        let (f, side) = max_flow(&cap, s, t);
        value[s] = f;
        for i in 0..n {
            if i != s && side[i] && parent[i] == t {
                parent[i] = s;
            }
        }
        if side[parent[t]] {
            parent[s] = parent[t];
            parent[t] = s;
            value[s] = value[t];
            value[t] = f;
        }
    }
    Ok(GomoryHuTree { parent, value })
}

fn finish(mut cuts: Vec<VertexCut>) -> Vec<VertexCut> {
    cuts.sort_by(|a, b| {
        a.cut_value
            .partial_cmp(&b.cut_value)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| a.members.cmp(&b.members))
    });
    cuts.dedup_by(|a, b| a.members == b.members);
    cuts
}

/// Violated blossom inequalities `x(δ(S)) ≥ 1`, `|S|` odd, most violated
/// first. An empty result certifies that none is violated (given degree
/// equalities).
pub fn separate_blossom(x: &[(Segment, f64)], n: usize) -> Result<Vec<OddSetCut>> {
    if n % 2 == 1 {
        return Err(Error::OddMatching(n));
    }
    if n < 2 {
        return Err(Error::TooSmall("blossom separation needs at least two vertices".into()));
    }
    let tree = gomory_hu(&WeightedSupportGraph::new(n, x))?;
    let mut cuts = Vec::new();
    for v in 1..n {
        if tree.value[v] > 1.0 {
            continue;
        }
        let side = tree.subtree(v);
        if side.iter().filter(|&&s| s).count() % 2 == 0 {
            continue;
        }
        let cut = VertexCut::canonical(&side, x);
        if cut.cut_value < 1.0 - VIOLATION_EPS {
            cuts.push(cut);
        }
    }
    Ok(finish(cuts))
}

/// Stoer–Wagner. Returns every cut-of-the-phase as a side vector with its
/// weight; the minimum among them is a global minimum cut.
fn stoer_wagner_phases(w: &[Vec<f64>]) -> Vec<(Vec<bool>, f64)> {
    let n = w.len();
    let mut w = w.to_vec();
    let mut groups: Vec<Vec<usize>> = (0..n).map(|v| vec![v]).collect();
    let mut active: Vec<usize> = (0..n).collect();
    let mut out = Vec::new();
    while active.len() > 1 {
        let mut in_a = vec![false; n];
        let mut conn = vec![0.0; n];
        let mut prev = active[0];
        let mut last = active[0];
        for step in 0..active.len() {
            let v = *active
                .iter()
                .filter(|&&v| !in_a[v])
                .max_by(|&&a, &&b| conn[a].partial_cmp(&conn[b]).unwrap().then(b.cmp(&a)))
                .expect("vertex left");
            in_a[v] = true;
            if step + 1 == active.len() {
                last = v;
            } else {
                prev = v;
            }
            for &u in &active {
                if !in_a[u] {
                    conn[u] += w[v][u];
                }
            }
        }
        let mut side = vec![false; n];
        for &v in &groups[last] {
            side[v] = true;
        }
        out.push((side, conn[last]));
        let moved = std::mem::take(&mut groups[last]);
        groups[prev].extend(moved);
        for &u in &active {
            w[prev][u] += w[last][u];
            w[u][prev] = w[prev][u];
        }
        w[prev][prev] = 0.0;
        active.retain(|&v| v != last);
    }
    out
}

/// Violated connectivity cuts `x(δ(S)) ≥ 1`. A disconnected support yields
/// one cut per component; otherwise the global minimum cut comes first,
/// followed by other violated cuts met during the Stoer–Wagner phases.
pub fn separate_connectivity(x: &[(Segment, f64)], n: usize) -> Result<Vec<ConnCut>> {
    if n < 2 {
        return Err(Error::TooSmall("connectivity separation needs at least two vertices".into()));
    }
    let g = WeightedSupportGraph::new(n, x);
    let mut uf = UnionFind::new(n);
    for &(a, b, _) in g.edges() {
        uf.union(a, b);
    }
    let roots: BTreeSet<usize> = (0..n).map(|v| uf.find(v)).collect();
    let mut cuts = Vec::new();
    if roots.len() > 1 {
        for r in roots {
            let side: Vec<bool> = (0..n).map(|v| uf.find(v) == r).collect();
            cuts.push(VertexCut::canonical(&side, x));
        }
    } else {
        for (side, _) in stoer_wagner_phases(&g.dense()) {
            let cut = VertexCut::canonical(&side, x);
            if cut.cut_value < 1.0 - VIOLATION_EPS {
                cuts.push(cut);
            }
        }
    }
    Ok(finish(cuts))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(edges: &[(usize, usize, f64)]) -> Vec<(Segment, f64)> {
        edges.iter().map(|&(a, b, v)| (Segment::new(a, b), v)).collect()
    }

    fn brute_min(x: &[(Segment, f64)], n: usize, odd_only: bool) -> f64 {
        let mut best = f64::INFINITY;
        for mask in 1u32..(1 << n) - 1 {
            if odd_only && mask.count_ones() % 2 == 0 {
                continue;
            }
            let side: Vec<bool> = (0..n).map(|v| mask >> v & 1 == 1).collect();
            best = best.min(cut_weight(&side, x));
        }
        best
    }

    #[test]
    fn gomory_hu_examples() {
        let path = w(&[(0, 1, 1.0), (1, 2, 1.0)]);
        let t = gomory_hu(&WeightedSupportGraph::new(3, &path)).unwrap();
        let mut vals: Vec<f64> = t.edges().map(|e| e.2).collect();
        vals.sort_by(f64::total_cmp);
        assert_eq!(vals, vec![1.0, 1.0]);

        let apart = w(&[(0, 1, 1.0), (2, 3, 1.0)]);
        let t = gomory_hu(&WeightedSupportGraph::new(4, &apart)).unwrap();
        assert!(t.edges().any(|e| e.2 == 0.0));
        assert_eq!(t.min_cut_value(0, 2), 0.0);
        assert_eq!(t.min_cut_value(0, 1), 1.0);

        let tri = w(&[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]);
        let t = gomory_hu(&WeightedSupportGraph::new(3, &tri)).unwrap();
        for (u, v) in [(0, 1), (0, 2), (1, 2)] {
            assert!((t.min_cut_value(u, v) - 2.0).abs() < 1e-12);
        }
        assert!(gomory_hu(&WeightedSupportGraph::new(1, &[])).is_err());
    }

    #[test]
    fn gomory_hu_matches_pairwise_flows() {
        let mut seed = 11u64;
        let mut next = || {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1);
            (seed >> 33) as f64 / (1u64 << 31) as f64
        };
        for _ in 0..40 {
            let n = 2 + (next() * 10.0) as usize;
            let mut edges = Vec::new();
            for a in 0..n {
                for b in a + 1..n {
                    if next() < 0.4 {
                        edges.push((a, b, (next() * 8.0).round() / 4.0));
                    }
                }
            }
            let g = WeightedSupportGraph::new(n, &w(&edges));
            let t = gomory_hu(&g).unwrap();
            let cap = g.dense();
            for u in 0..n {
                for v in u + 1..n {
                    let (f, _) = max_flow(&cap, u, v);
                    assert!((t.min_cut_value(u, v) - f).abs() < 1e-9);
                }
            }
            // fundamental cuts realise the tree values
            for (v, _, val) in t.edges() {
                let side = t.subtree(v);
                assert!((cut_weight(&side, &w(&edges)) - val).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn blossom_two_triangles() {
        let x = w(&[
            (0, 1, 0.5),
            (1, 2, 0.5),
            (0, 2, 0.5),
            (3, 4, 0.5),
            (4, 5, 0.5),
            (3, 5, 0.5),
        ]);
        let cuts = separate_blossom(&x, 6).unwrap();
        assert_eq!(brute_min(&x, 6, true), 0.0);
        // {0,1,2} and {3,4,5} are the same inequality
        assert_eq!(cuts.len(), 1);
        assert_eq!(cuts[0].members, vec![0, 1, 2]);
        assert_eq!(cuts[0].cut_value, 0.0);
    }

    #[test]
    fn blossom_four_cycle_and_integral() {
        let x = w(&[(0, 1, 0.5), (1, 2, 0.5), (2, 3, 0.5), (0, 3, 0.5)]);
        assert!(separate_blossom(&x, 4).unwrap().is_empty());
        assert!(brute_min(&x, 4, true) >= 1.0);
        let m = w(&[(0, 3, 1.0), (1, 5, 1.0), (2, 4, 1.0)]);
        assert!(separate_blossom(&m, 6).unwrap().is_empty());
        assert_eq!(separate_blossom(&m, 5), Err(Error::OddMatching(5)));
    }

    #[test]
    fn connectivity_examples() {
        let x = w(&[(0, 1, 1.0), (2, 3, 1.0)]);
        let cuts = separate_connectivity(&x, 4).unwrap();
        assert_eq!(cuts.len(), 1);
        assert_eq!(cuts[0].members, vec![0, 1]);
        assert_eq!(cuts[0].cut_value, 0.0);

        let path = w(&[(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0)]);
        assert!(separate_connectivity(&path, 4).unwrap().is_empty());

        let x = w(&[(0, 1, 1.0), (2, 3, 1.0), (1, 2, 0.5)]);
        let cuts = separate_connectivity(&x, 4).unwrap();
        assert_eq!(cuts[0].members, vec![0, 1]);
        assert!((cuts[0].cut_value - 0.5).abs() < 1e-12);
        assert!((brute_min(&x, 4, false) - 0.5).abs() < 1e-12);
        assert!(separate_connectivity(&x, 1).is_err());
    }

    #[test]
    fn three_components_give_three_cuts() {
        let x = w(&[(0, 1, 1.0), (2, 3, 1.0), (4, 5, 1.0)]);
        let cuts = separate_connectivity(&x, 6).unwrap();
        assert_eq!(cuts.len(), 3);
        assert!(cuts.iter().all(|c| c.cut_value == 0.0 && c.contains(0)));
    }

    #[test]
    fn separators_agree_with_enumeration() {
        let mut seed = 5u64;
        let mut next = || {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (seed >> 33) as f64 / (1u64 << 31) as f64
        };
        for round in 0..150 {
            let n = 2 * (1 + round % 6);
            let mut x = Vec::new();
            for a in 0..n {
                for b in a + 1..n {
                    if next() < 0.35 {
                        x.push((Segment::new(a, b), (next() * 6.0).round() / 6.0));
                    }
                }
            }
            let odd = brute_min(&x, n, true);
            let cuts = separate_blossom(&x, n).unwrap();
            if odd < 1.0 - VIOLATION_EPS {
                assert!((cuts[0].cut_value - odd).abs() < 1e-9, "round {round}");
            } else {
                assert!(cuts.is_empty());
            }
            for c in &cuts {
                assert_eq!(c.members.len() % 2, 1);
                assert!(c.cut_value < 1.0 - VIOLATION_EPS);
            }
            let any = brute_min(&x, n, false);
            let conn = separate_connectivity(&x, n).unwrap();
            if any < 1.0 - VIOLATION_EPS {
                assert!((conn[0].cut_value - any).abs() < 1e-9, "round {round}");
            } else {
                assert!(conn.is_empty());
            }
        }
    }
}
