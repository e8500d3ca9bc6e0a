//! Integral solutions: iterated rounding, branch-and-bound, and
//! minimum-length matchings and trees.

use std::cmp::{Ordering, Reverse};
use std::collections::{BTreeSet, BinaryHeap};
use std::time::{Duration, Instant};

use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::cuts;
use crate::error::{Error, Result};
use crate::geom::{self, LineFamily, Segment};
use crate::instance::{self, Instance, Method, Problem, Solution, UnionFind};
use crate::lp::{self, Engine, LinearProgram, LpStatus, Relation, Row};
use crate::models::{self, complete_edges, RelaxationResult, StabModel, INTEGRALITY_TOL};

/// One fixing step of iterated rounding, measured on the refined LP.
#[derive(Clone, Debug, PartialEq)]
pub struct RoundingStep {
    pub k_frac: f64,
    pub fixed: Segment,
    /// Weight of the fixed edge.
    pub weight: f64,
    /// Largest weight among edges not fixed before this step.
    pub max_free_weight: f64,
    /// Properly crossing pairs among the free support edges.
    pub free_crossings: usize,
    /// Properly crossing pairs in the whole support, fixed edges included.
    pub support_crossings: usize,
    pub cuts_added: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RoundingOutcome {
    pub solution: Solution,
    /// Root fractional optimum.
    pub k_frac: f64,
    pub steps: Vec<RoundingStep>,
}

fn complete(problem: Problem, fixed: &BTreeSet<Segment>, n: usize) -> bool {
    match problem {
        Problem::Matching => 2 * fixed.len() == n,
        _ => fixed.len() + 1 == n,
    }
}

fn crossing_pairs(edges: &[Segment], pts: &[geom::Point]) -> usize {
    let mut count = 0;
    for (i, &e) in edges.iter().enumerate() {
        count += edges[i + 1..]
            .iter()
            .filter(|&&f| geom::is_crossing_pair(e, f, pts))
            .count();
    }
    count
}

/// Rounds the refined LP one heavy edge at a time.
pub fn iterated_rounding(inst: &Instance, problem: Problem, family: LineFamily) -> Result<Solution> {
    Ok(iterated_rounding_traced(inst, problem, family)?.solution)
}

pub fn iterated_rounding_traced(
    inst: &Instance,
    problem: Problem,
    family: LineFamily,
) -> Result<RoundingOutcome> {
    let mut model = models::build_model(inst, problem, family)?;
    rounding_on(&mut model, inst)
}

fn rounding_on(model: &mut StabModel, inst: &Instance) -> Result<RoundingOutcome> {
    let n = inst.len();
    let problem = model.problem();
    let pts = inst.points();
    let mut root_k = None;
    let mut steps = Vec::new();
    let mut forest = UnionFind::new(n);
    for e in model.fixed_ones().clone() {
        forest.union(e.a(), e.b());
    }
    while !complete(problem, model.fixed_ones(), n) {
        let relaxed = models::solve_relaxation(model)?;
        root_k.get_or_insert(relaxed.k_frac);
        let refined = models::lexicographic_refine(model, &relaxed)?;

        let fixed = model.fixed_ones().clone();
        let free: Vec<(usize, Segment, f64)> = model
            .edges()
            .iter()
            .enumerate()
            .filter(|(_, e)| !fixed.contains(e))
            .map(|(j, &e)| (j, e, refined.x[j]))
            .collect();
        let max_free_weight = free.iter().map(|t| t.2).fold(0.0, f64::max);
        let free_support: Vec<Segment> = free
            .iter()
            .filter(|t| t.2 > cuts::SUPPORT_EPS)
            .map(|t| t.1)
            .collect();
        let all_support: Vec<Segment> = refined.support(model.edges()).iter().map(|s| s.0).collect();

        // heaviest free edge, ties to the lexicographically smallest; trees
        // skip edges closing a cycle with the fixed ones
        let mut best: Option<(Segment, f64)> = None;
        for &(_, e, w) in &free {
            if problem == Problem::SpanningTree && forest.find(e.a()) == forest.find(e.b()) {
                continue;
            }
            if problem == Problem::Matching && w <= cuts::SUPPORT_EPS {
                continue;
            }
            if best.is_none_or(|(_, bw)| w > bw + 1e-12) {
                best = Some((e, w));
            }
        }
        let (edge, weight) = best.ok_or_else(|| {
            Error::Numerical("rounding found no edge to fix".into())
        })?;
        steps.push(RoundingStep {
            k_frac: relaxed.k_frac,
            fixed: edge,
            weight,
            max_free_weight,
            free_crossings: crossing_pairs(&free_support, pts),
            support_crossings: crossing_pairs(&all_support, pts),
            cuts_added: refined.cuts_added,
        });
        log::debug!("rounding fixes {edge} at weight {weight:.6}");
        forest.union(edge.a(), edge.b());
        model.fix(edge, true)?;
    }
    let edges: Vec<Segment> = model.fixed_ones().iter().copied().collect();
    let k_frac = match root_k {
        Some(k) => k,
        // already complete: the LP at the fixing is the structure itself
        None => models::solve_relaxation(model)?.k_frac,
    };
    let solution = Solution::build(
        inst,
        problem,
        model.family(),
        edges,
        Some(models::rational_approx(k_frac)),
        Method::Rounding,
    )?;
    Ok(RoundingOutcome {
        solution,
        k_frac,
        steps,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NodeOrder {
    BestFirst,
    DepthFirst,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BnbOptions {
    /// Milliseconds; 0 means unlimited.
    pub time_limit_ms: u64,
    pub order: NodeOrder,
}

impl Default for BnbOptions {
    fn default() -> Self {
        BnbOptions {
            time_limit_ms: 0,
            order: NodeOrder::BestFirst,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BnbNode {
    pub fixed_ones: BTreeSet<Segment>,
    pub fixed_zeros: BTreeSet<Segment>,
    pub bound: f64,
    pub depth: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BnbOutcome {
    pub solution: Solution,
    /// False when the time limit stopped the search.
    pub proven: bool,
    pub nodes: usize,
    pub root_k_frac: f64,
    /// Size of the shared cut pool at the end of the search.
    pub cuts_added: usize,
    /// The rounding incumbent that seeded the search.
    pub rounding: Solution,
}

/// Integer bound implied by a fractional optimum.
pub fn ceil_bound(k_frac: f64) -> usize {
    (k_frac - 1e-6).ceil().max(0.0) as usize
}

fn fractionality(w: f64) -> f64 {
    w.abs().min((w - 1.0).abs())
}

/// Most fractional edge (weight nearest 1/2), ties to the smallest index.
fn branch_edge(r: &RelaxationResult, edges: &[Segment]) -> Option<Segment> {
    let mut best: Option<(usize, f64)> = None;
    for (j, &w) in r.x.iter().enumerate() {
        let f = fractionality(w);
        if f > INTEGRALITY_TOL && best.is_none_or(|(_, bf)| f > bf + 1e-12) {
            best = Some((j, f));
        }
    }
    best.map(|(j, _)| edges[j])
}

pub fn branch_and_bound(
    inst: &Instance,
    problem: Problem,
    family: LineFamily,
    time_limit_ms: u64,
) -> Result<BnbOutcome> {
    let opts = BnbOptions {
        time_limit_ms,
        ..BnbOptions::default()
    };
    branch_and_bound_with(inst, problem, family, &opts)
}

struct Open {
    key: (u64, Reverse<usize>),
    node: BnbNode,
}

impl PartialEq for Open {
    fn eq(&self, o: &Self) -> bool {
        self.key == o.key
    }
}
impl Eq for Open {}
impl PartialOrd for Open {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Open {
    fn cmp(&self, o: &Self) -> Ordering {
        // min-heap on (bound, insertion order)
        o.key.cmp(&self.key)
    }
}

/// Exact minimum stabbing number by LP-based branch-and-bound, seeded with
/// the iterated-rounding incumbent.
pub fn branch_and_bound_with(
    inst: &Instance,
    problem: Problem,
    family: LineFamily,
    opts: &BnbOptions,
) -> Result<BnbOutcome> {
    let start = Instant::now();
    let deadline = (opts.time_limit_ms > 0).then(|| start + Duration::from_millis(opts.time_limit_ms));
    let rounding = iterated_rounding_traced(inst, problem, family)?;
    let root_k_frac = rounding.k_frac;
    let lower = ceil_bound(root_k_frac);
    let mut incumbent = rounding.solution.clone();
    let mut from_search = false;

    let mut model = models::build_model(inst, problem, family)?;
    let root = BnbNode {
        fixed_ones: BTreeSet::new(),
        fixed_zeros: BTreeSet::new(),
        bound: root_k_frac,
        depth: 0,
    };
    let mut heap = BinaryHeap::new();
    let mut stack = Vec::new();
    let mut seq = 0usize;
    let mut push = |node: BnbNode, heap: &mut BinaryHeap<Open>, stack: &mut Vec<BnbNode>| {
        match opts.order {
            NodeOrder::BestFirst => heap.push(Open {
                key: (node.bound.max(0.0).to_bits(), Reverse(seq)),
                node,
            }),
            NodeOrder::DepthFirst => stack.push(node),
        }
        seq += 1;
    };
    push(root, &mut heap, &mut stack);

    let mut nodes = 0;
    let mut proven = true;
    loop {
        if incumbent.k <= lower {
            break;
        }
        let node = match opts.order {
            NodeOrder::BestFirst => heap.pop().map(|o| o.node),
            NodeOrder::DepthFirst => stack.pop(),
        };
        let Some(node) = node else { break };
        if ceil_bound(node.bound) >= incumbent.k {
            continue;
        }
        if deadline.is_some_and(|d| Instant::now() >= d) {
            proven = false;
            break;
        }
        nodes += 1;
        model.set_fixings(&node.fixed_ones, &node.fixed_zeros)?;
        let r = match models::solve_relaxation(&mut model) {
            Ok(r) => r,
            Err(Error::Infeasible { .. }) => continue,
            Err(e) => return Err(e),
        };
        if ceil_bound(r.k_frac) >= incumbent.k {
            continue;
        }
        match branch_edge(&r, model.edges()) {
            None => {
                let edges: Vec<Segment> = model
                    .edges()
                    .iter()
                    .zip(&r.x)
                    .filter(|(_, &w)| w > 0.5)
                    .map(|(&e, _)| e)
                    .collect();
                match Solution::build(inst, problem, family, edges, None, Method::Exact) {
                    Ok(sol) if sol.k < incumbent.k => {
                        incumbent = sol;
                        from_search = true;
                    }
                    Ok(_) => {}
                    Err(e) => {
                        return Err(Error::Numerical(format!(
                            "integral LP point is not a {problem}: {e}"
                        )))
                    }
                }
            }
            Some(e) => {
                for value in [false, true] {
                    let mut child = BnbNode {
                        fixed_ones: node.fixed_ones.clone(),
                        fixed_zeros: node.fixed_zeros.clone(),
                        bound: r.k_frac,
                        depth: node.depth + 1,
                    };
                    if value {
                        child.fixed_ones.insert(e);
                    } else {
                        child.fixed_zeros.insert(e);
                    }
                    push(child, &mut heap, &mut stack);
                }
            }
        }
    }
    let lb = models::rational_approx(root_k_frac);
    let method = if proven || from_search {
        Method::Exact
    } else {
        Method::Rounding
    };
    let solution = Solution::build(inst, problem, family, incumbent.edges.clone(), Some(lb), method)?;
    log::info!("branch-and-bound: {nodes} nodes, k = {}, proven = {proven}", solution.k);
    Ok(BnbOutcome {
        solution,
        proven,
        nodes,
        root_k_frac,
        cuts_added: model.added_cuts().len(),
        rounding: rounding.solution,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Metric {
    Euclidean,
    Manhattan,
}

impl Metric {
    /// The line family whose average stabbing number this length matches.
    pub fn family(self) -> LineFamily {
        match self {
            Metric::Euclidean => LineFamily::General,
            Metric::Manhattan => LineFamily::AxisParallel,
        }
    }

    pub fn length(self, e: Segment, pts: &[geom::Point]) -> f64 {
        match self {
            Metric::Euclidean => geom::euclidean_length(e, pts),
            Metric::Manhattan => geom::manhattan_length(e, pts) as f64,
        }
    }
}

struct LengthLp {
    n: usize,
    edges: Vec<Segment>,
    engine: Engine,
    cut_keys: BTreeSet<Vec<usize>>,
}

impl LengthLp {
    fn new(inst: &Instance, metric: Metric) -> Result<Self> {
        let n = inst.len();
        let edges = complete_edges(n);
        let mut lp = LinearProgram::new(edges.len());
        for j in 0..edges.len() {
            lp.set_bounds(j, 0.0, 1.0)?;
        }
        lp.set_objective(
            edges
                .iter()
                .enumerate()
                .map(|(j, &e)| (j, metric.length(e, inst.points())))
                .collect(),
        )?;
        for v in 0..n {
            let coeffs = edges
                .iter()
                .enumerate()
                .filter(|(_, e)| e.touches(v))
                .map(|(j, _)| (j, 1.0))
                .collect();
            lp.add_row(Row::new(coeffs, Relation::Eq, 1.0))?;
        }
        Ok(LengthLp {
            n,
            edges,
            engine: Engine::new(lp),
            cut_keys: BTreeSet::new(),
        })
    }

    /// Optimum over the perfect matching polytope, or None if infeasible.
    fn solve(&mut self) -> Result<Option<lp::LpResult>> {
        loop {
            let res = self.engine.solve()?;
            match res.status {
                LpStatus::Optimal => {}
                LpStatus::Infeasible => return Ok(None),
                LpStatus::Unbounded => return Err(Error::Unbounded),
            }
            let weights: Vec<(Segment, f64)> =
                self.edges.iter().copied().zip(res.primal.iter().copied()).collect();
            let fresh: Vec<_> = cuts::separate_blossom(&weights, self.n)?
                .into_iter()
                .filter(|c| !self.cut_keys.contains(&c.members))
                .take(models::MAX_CUTS_PER_ROUND)
                .collect();
            if fresh.is_empty() {
                return Ok(Some(res));
            }
            for c in fresh {
                let coeffs = c.crossing_edges(&self.edges).map(|j| (j, 1.0)).collect();
                self.engine.add_row(Row::new(coeffs, Relation::Ge, 1.0))?;
                self.cut_keys.insert(c.members);
            }
        }
    }

    /// Matching read off an optimum; non-integral points are re-solved in
    /// exact arithmetic before giving up.
    fn matching(&self, res: &lp::LpResult) -> Result<Vec<Segment>> {
        let integral = res.primal.iter().all(|&w| fractionality(w) <= INTEGRALITY_TOL);
        if integral {
            return Ok(self.pick(res.primal.iter().map(|&w| w > 0.5)));
        }
        let exact = lp::solve_exact(self.engine.lp(), Some(res))?;
        let half = BigRational::new(1.into(), 2.into());
        let ok = exact.status == LpStatus::Optimal
            && exact.primal.iter().all(|w| w.is_zero() || w.is_one());
        if !ok {
            return Err(Error::Integrality(
                "length-optimal matching LP has a fractional optimum".into(),
            ));
        }
        Ok(self.pick(exact.primal.iter().map(|w| *w > half)))
    }

    fn pick(&self, chosen: impl Iterator<Item = bool>) -> Vec<Segment> {
        self.edges
            .iter()
            .zip(chosen)
            .filter(|(_, c)| *c)
            .map(|(&e, _)| e)
            .collect()
    }
}

/// Minimum-total-length perfect matching. Among optimal matchings the one
/// with the lexicographically smallest sorted edge list is returned.
pub fn min_length_matching(inst: &Instance, metric: Metric) -> Result<Solution> {
    inst.require_even()?;
    if inst.len() < 2 {
        return Err(Error::TooSmall("a matching needs at least two points".into()));
    }
    let n = inst.len();
    let mut lp = LengthLp::new(inst, metric)?;
    let first = lp.solve()?.ok_or(Error::Numerical("matching LP infeasible".into()))?;
    let optimum = first.objective_value;
    let tol = 1e-7 * optimum.abs().max(1.0);
    // edges priced out at the optimum lie in no optimal matching
    let reduced = lp.engine.reduced_costs();
    let mut current = lp.matching(&first)?;
    let mut covered = vec![false; n];
    for v in 0..n {
        if covered[v] {
            continue;
        }
        let partner = current
            .iter()
            .find(|e| e.touches(v))
            .map(|e| e.other(v))
            .expect("perfect matching covers v");
        let mut chosen = partner;
        for u in v + 1..partner {
            let j = models::edge_index(n, Segment::new(v, u));
            if covered[u] || reduced[j] > 1e-7 {
                continue;
            }
            lp.engine.set_bounds(j, 1.0, 1.0)?;
            match lp.solve()? {
                Some(res) if res.objective_value <= optimum + tol => {
                    current = lp.matching(&res)?;
                    chosen = u;
                    break;
                }
                _ => lp.engine.set_bounds(j, 0.0, 1.0)?,
            }
        }
        let j = models::edge_index(n, Segment::new(v, chosen));
        lp.engine.set_bounds(j, 1.0, 1.0)?;
        covered[v] = true;
        covered[chosen] = true;
    }
    let edges: Vec<Segment> = (0..n)
        .filter_map(|v| {
            let e = current.iter().find(|e| e.a() == v)?;
            Some(*e)
        })
        .collect();
    let family = metric.family();
    Solution::build(inst, Problem::Matching, family, edges, None, Method::MinLength)
}

/// Minimum spanning tree by Kruskal, ordering edges by exact length and then
/// lexicographically.
pub fn min_length_tree(inst: &Instance, metric: Metric) -> Result<Solution> {
    let n = inst.len();
    if n < 2 {
        return Err(Error::TooSmall("a spanning tree needs at least two points".into()));
    }
    let pts = inst.points();
    let mut edges = complete_edges(n);
    match metric {
        Metric::Manhattan => edges.sort_by_key(|&e| (geom::manhattan_length(e, pts), e)),
        Metric::Euclidean => edges.sort_by_key(|&e| (geom::squared_length(e, pts), e)),
    }
    let mut uf = UnionFind::new(n);
    let tree: Vec<Segment> = edges.into_iter().filter(|e| uf.union(e.a(), e.b())).collect();
    debug_assert!(instance::is_spanning_tree(&tree, n));
    Solution::build(inst, Problem::SpanningTree, metric.family(), tree, None, Method::MinLength)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Point;
    use crate::oracle::{self, Objective, Value};

    fn inst(pts: &[(i32, i32)]) -> Instance {
        Instance::new("t", pts.iter().map(|&(x, y)| Point::new(x, y)).collect()).unwrap()
    }

    fn square() -> Instance {
        inst(&[(0, 0), (1, 0), (0, 1), (1, 1)])
    }

    #[test]
    fn rounding_examples() {
        let s = iterated_rounding(&inst(&[(0, 0), (4, 1)]), Problem::Matching, LineFamily::General)
            .unwrap();
        assert_eq!((s.k, s.edges.len()), (1, 1));
        let out = iterated_rounding_traced(&square(), Problem::Matching, LineFamily::AxisParallel)
            .unwrap();
        assert_eq!(out.solution.k, 2);
        assert!((out.k_frac - 1.5).abs() < 1e-9);
        assert!((out.steps[0].weight - 0.5).abs() < 1e-9);
        assert_eq!(out.solution.method, Method::Rounding);
        assert_eq!(
            out.solution.lower_bound,
            Some(BigRational::new(3.into(), 2.into()))
        );
        let s = iterated_rounding(&inst(&[(0, 0), (1, 0), (2, 0)]), Problem::SpanningTree, LineFamily::AxisParallel)
            .unwrap();
        assert_eq!(s.k, 2);
        assert_eq!(s.edges, vec![Segment::new(0, 1), Segment::new(1, 2)]);
    }

    #[test]
    fn exact_on_unit_square() {
        // every line through two corners touches all edges at those corners,
        // so no spanning tree of the square gets below 3
        for (problem, k) in [(Problem::Matching, 2), (Problem::SpanningTree, 3)] {
            let out = branch_and_bound(&square(), problem, LineFamily::AxisParallel, 0).unwrap();
            assert!(out.proven);
            assert_eq!(out.solution.k, k);
            assert_eq!(out.solution.method, Method::Exact);
        }
    }

    #[test]
    fn exact_matches_oracle_on_small_instances() {
        for seed in 0..12u64 {
            for family in LineFamily::ALL {
                let m = instance::gen_random(8, 30, seed).unwrap();
                let t = instance::gen_random(6, 30, seed).unwrap();
                for (inst, problem) in [(m, Problem::Matching), (t, Problem::SpanningTree)] {
                    let bnb = branch_and_bound(&inst, problem, family, 0).unwrap();
                    let brute = oracle::brute_optimum(&inst, problem, family, Objective::Stabbing).unwrap();
                    assert_eq!(Value::Count(bnb.solution.k as i64), brute.value, "seed {seed} {problem} {family}");
                    assert!(ceil_bound(bnb.root_k_frac) <= bnb.solution.k);
                    assert!(bnb.solution.k <= bnb.rounding.k);
                    let dfs = branch_and_bound_with(&inst, problem, family, &BnbOptions {
                        time_limit_ms: 0,
                        order: NodeOrder::DepthFirst,
                    })
                    .unwrap();
                    assert_eq!(dfs.solution.k, bnb.solution.k);
                }
            }
        }
    }

    #[test]
    fn time_limit_returns_unproven_incumbent() {
        let inst = instance::gen_random(16, 1000, 3).unwrap();
        let out = branch_and_bound(&inst, Problem::Matching, LineFamily::General, 1).unwrap();
        assert!(instance::is_perfect_matching(&out.solution.edges, 16));
        if !out.proven {
            assert!(out.solution.k >= ceil_bound(out.root_k_frac));
        }
    }

    #[test]
    fn min_length_examples() {
        let four = inst(&[(0, 0), (1, 0), (2, 0), (3, 0)]);
        let s = min_length_matching(&four, Metric::Euclidean).unwrap();
        assert_eq!(s.edges, vec![Segment::new(0, 1), Segment::new(2, 3)]);
        let s = min_length_matching(&square(), Metric::Euclidean).unwrap();
        // both side pairs are optimal; (0,1),(2,3) is lexicographically first
        assert_eq!(s.edges, vec![Segment::new(0, 1), Segment::new(2, 3)]);
        let two = inst(&[(3, 3), (0, 0)]);
        assert_eq!(min_length_matching(&two, Metric::Manhattan).unwrap().edges.len(), 1);

        let s = min_length_tree(&inst(&[(0, 0), (1, 0), (2, 0)]), Metric::Euclidean).unwrap();
        assert_eq!(s.edges, vec![Segment::new(0, 1), Segment::new(1, 2)]);
        let s = min_length_tree(&square(), Metric::Manhattan).unwrap();
        assert_eq!(
            s.edges,
            vec![Segment::new(0, 1), Segment::new(0, 2), Segment::new(1, 3)]
        );
        assert_eq!(min_length_tree(&two, Metric::Euclidean).unwrap().edges.len(), 1);
    }

    #[test]
    fn min_length_matching_is_lexicographic_argmin() {
        for seed in 0..20u64 {
            // small grid forces many ties
            let inst = instance::gen_random(8, 3, seed).unwrap();
            for metric in [Metric::Manhattan, Metric::Euclidean] {
                let s = min_length_matching(&inst, metric).unwrap();
                let brute = oracle::brute_optimum(&inst, Problem::Matching, metric.family(), Objective::Length)
                    .unwrap();
                let mut best = brute.argmin.clone();
                best.sort();
                assert_eq!(s.edges, best[0], "seed {seed} {metric:?}");
            }
        }
    }
}
