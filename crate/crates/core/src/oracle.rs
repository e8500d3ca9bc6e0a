//! Exhaustive enumeration of perfect matchings, spanning trees and
//! triangulations, and brute-force optima over them.

use std::cmp::Ordering;
use std::time::{Duration, Instant};

use num_rational::Ratio;

use crate::error::{Error, Result};
use crate::geom::{self, AverageStabbing, LineFamily, Segment};
use crate::instance::{self, Instance, Problem};
use crate::models::{complete_edges, edge_index};

pub const MAX_MATCHING_N: usize = 14;
pub const MAX_TREE_N: usize = 8;
pub const MAX_TRIANGULATION_N: usize = 9;

/// Caps for a brute-force run. Exceeding either is an error, never a
/// silently partial optimum.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnumBudget {
    pub max_structures: usize,
    pub time_limit: Option<Duration>,
}

impl Default for EnumBudget {
    fn default() -> Self {
        EnumBudget {
            max_structures: 5_000_000,
            time_limit: None,
        }
    }
}

/// Perfect matchings of `K_n`, each once, in lexicographic order of their
/// sorted edge lists.
#[derive(Clone, Debug)]
pub struct PerfectMatchings {
    n: usize,
    used: Vec<bool>,
    pairs: Vec<(usize, usize)>,
    started: bool,
}

impl PerfectMatchings {
    fn complete(&mut self) {
        while let Some(v) = (0..self.n).find(|&v| !self.used[v]) {
            let u = (v + 1..self.n).find(|&u| !self.used[u]).expect("even n");
            self.used[v] = true;
            self.used[u] = true;
            self.pairs.push((v, u));
        }
    }
}

impl Iterator for PerfectMatchings {
    type Item = Vec<Segment>;

    fn next(&mut self) -> Option<Vec<Segment>> {
        if !self.started {
            self.started = true;
            self.complete();
        } else {
            loop {
                let (v, u) = self.pairs.pop()?;
                self.used[u] = false;
                if let Some(w) = (u + 1..self.n).find(|&w| !self.used[w]) {
                    self.used[w] = true;
                    self.pairs.push((v, w));
                    self.complete();
                    break;
                }
                self.used[v] = false;
            }
        }
        Some(self.pairs.iter().map(|&(a, b)| Segment::new(a, b)).collect())
    }
}

pub fn enum_perfect_matchings(n: usize) -> Result<PerfectMatchings> {
    if n % 2 == 1 {
        return Err(Error::OddMatching(n));
    }
    if n == 0 {
        return Err(Error::EmptyInstance);
    }
    if n > MAX_MATCHING_N {
        return Err(Error::EnumerationCap(format!(
            "matching enumeration is limited to n <= {MAX_MATCHING_N}, got {n}"
        )));
    }
    Ok(PerfectMatchings {
        n,
        used: vec![false; n],
        pairs: Vec::new(),
        started: false,
    })
}

/// Labeled spanning trees of `K_n` via Prüfer sequences.
#[derive(Clone, Debug)]
pub struct SpanningTrees {
    n: usize,
    code: Vec<usize>,
    done: bool,
}

fn decode_pruefer(code: &[usize], n: usize) -> Vec<Segment> {
    let mut degree = vec![1usize; n];
    for &c in code {
        degree[c] += 1;
    }
    let mut edges = Vec::with_capacity(n - 1);
    for &c in code {
        let leaf = (0..n).find(|&v| degree[v] == 1).expect("leaf exists");
        edges.push(Segment::new(leaf, c));
        degree[leaf] = 0;
        degree[c] -= 1;
    }
    let rest: Vec<usize> = (0..n).filter(|&v| degree[v] == 1).collect();
    edges.push(Segment::new(rest[0], rest[1]));
    edges.sort_unstable();
    edges
}

impl Iterator for SpanningTrees {
    type Item = Vec<Segment>;

    fn next(&mut self) -> Option<Vec<Segment>> {
        if self.done {
            return None;
        }
        let tree = decode_pruefer(&self.code, self.n);
        // odometer over [0, n)^(n-2)
        let mut i = self.code.len();
        loop {
            if i == 0 {
                self.done = true;
                break;
            }
            i -= 1;
            self.code[i] += 1;
            if self.code[i] < self.n {
                break;
            }
            self.code[i] = 0;
        }
        Some(tree)
    }
}

pub fn enum_spanning_trees(n: usize) -> Result<SpanningTrees> {
    if n < 2 {
        return Err(Error::TooSmall("spanning tree enumeration needs n >= 2".into()));
    }
    if n > MAX_TREE_N {
        return Err(Error::EnumerationCap(format!(
            "spanning tree enumeration is limited to n <= {MAX_TREE_N}, got {n}"
        )));
    }
    Ok(SpanningTrees {
        n,
        code: vec![0; n - 2],
        done: false,
    })
}

/// All triangulations (maximal non-crossing sets of segments with no point
/// in their relative interior), each once, with sorted edge lists.
pub fn enum_triangulations(inst: &Instance) -> Result<std::vec::IntoIter<Vec<Segment>>> {
    let pts = inst.points();
    let n = pts.len();
    if n > MAX_TRIANGULATION_N {
        return Err(Error::EnumerationCap(format!(
            "triangulation enumeration is limited to n <= {MAX_TRIANGULATION_N}, got {n}"
        )));
    }
    let collinear = n < 3 || (2..n).all(|k| geom::orient(pts[0], pts[1], pts[k]) == 0);
    if collinear {
        return Err(Error::NoTriangulation);
    }
    let cands = instance::triangulation_candidates(pts);
    let m = cands.len();
    let mut crosses = vec![vec![false; m]; m];
    for i in 0..m {
        for j in i + 1..m {
            let c = geom::is_crossing_pair(cands[i], cands[j], pts);
            crosses[i][j] = c;
            crosses[j][i] = c;
        }
    }
    let mut out = Vec::new();
    let mut chosen = Vec::new();
    let mut excluded = Vec::new();
    extend(0, &cands, &crosses, &mut chosen, &mut excluded, &mut out);
    Ok(out.into_iter())
}

fn extend(
    i: usize,
    cands: &[Segment],
    crosses: &[Vec<bool>],
    chosen: &mut Vec<usize>,
    excluded: &mut Vec<usize>,
    out: &mut Vec<Vec<Segment>>,
) {
    // every excluded candidate must be blocked by a chosen or a still-possible
    // later candidate
    let blockable = |e: usize, chosen: &[usize]| {
        chosen.iter().any(|&c| crosses[e][c])
            || (i..cands.len()).any(|j| crosses[e][j] && chosen.iter().all(|&c| !crosses[j][c]))
    };
    if excluded.iter().any(|&e| !blockable(e, chosen)) {
        return;
    }
    if i == cands.len() {
        out.push(chosen.iter().map(|&c| cands[c]).collect());
        return;
    }
    let compatible = chosen.iter().all(|&c| !crosses[i][c]);
    if compatible {
        chosen.push(i);
        extend(i + 1, cands, crosses, chosen, excluded, out);
        chosen.pop();
        excluded.push(i);
        extend(i + 1, cands, crosses, chosen, excluded, out);
        excluded.pop();
    } else {
        extend(i + 1, cands, crosses, chosen, excluded, out);
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Objective {
    Stabbing,
    Crossing,
    AverageStabbing,
    /// Manhattan length for the axis-parallel family, Euclidean otherwise.
    Length,
}

/// An objective value; reals compare with a relative tolerance of `1e-9`.
#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Count(i64),
    Exact(Ratio<i128>),
    Real(f64),
}

impl Value {
    pub fn to_f64(&self) -> f64 {
        match self {
            Value::Count(c) => *c as f64,
            Value::Exact(r) => *r.numer() as f64 / *r.denom() as f64,
            Value::Real(v) => *v,
        }
    }

    pub fn cmp_tol(&self, other: &Value) -> Ordering {
        match (self, other) {
            (Value::Count(a), Value::Count(b)) => a.cmp(b),
            (Value::Exact(a), Value::Exact(b)) => a.cmp(b),
            _ => geom::cmp_real(self.to_f64(), other.to_f64()),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BruteOptimum {
    pub value: Value,
    /// Every optimal structure, in enumeration order.
    pub argmin: Vec<Vec<Segment>>,
    pub evaluated: usize,
}

/// Edge bitmask per stabbing line, for fast maxima over many structures.
struct StabTable {
    n: usize,
    masks: Vec<u128>,
}

impl StabTable {
    fn new(inst: &Instance, family: LineFamily) -> Result<Option<StabTable>> {
        let n = inst.len();
        let edges = complete_edges(n);
        if edges.len() > 128 {
            return Ok(None);
        }
        let lines = geom::representative_lines(inst.points(), family)?;
        let masks = lines
            .iter()
            .map(|l| {
                edges
                    .iter()
                    .enumerate()
                    .filter(|(_, &e)| geom::stabs(l, e, inst.points()))
                    .fold(0u128, |m, (j, _)| m | 1 << j)
            })
            .collect();
        Ok(Some(StabTable { n, masks }))
    }

    fn eval(&self, edges: &[Segment]) -> i64 {
        let s = edges.iter().fold(0u128, |m, &e| m | 1 << edge_index(self.n, e));
        self.masks.iter().map(|&m| (m & s).count_ones()).max().unwrap_or(0) as i64
    }
}

fn evaluate(
    edges: &[Segment],
    inst: &Instance,
    family: LineFamily,
    objective: Objective,
    table: Option<&StabTable>,
) -> Result<Value> {
    let pts = inst.points();
    Ok(match objective {
        Objective::Stabbing => match table {
            Some(t) => Value::Count(t.eval(edges)),
            None => Value::Count(geom::stabbing_number(edges, pts, family)?.0 as i64),
        },
        Objective::Crossing => Value::Count(geom::crossing_number(edges, pts, family)? as i64),
        Objective::AverageStabbing => match geom::average_stabbing(edges, pts, family)? {
            AverageStabbing::Exact(r) => Value::Exact(r),
            AverageStabbing::Real(v) => Value::Real(v),
        },
        Objective::Length => match family {
            LineFamily::AxisParallel => {
                Value::Count(edges.iter().map(|&e| geom::manhattan_length(e, pts)).sum())
            }
            LineFamily::General => {
                Value::Real(edges.iter().map(|&e| geom::euclidean_length(e, pts)).sum())
            }
        },
    })
}

/// Exact optimum of `objective` over every structure of `problem`, with all
/// minimizers.
pub fn brute_optimum(
    inst: &Instance,
    problem: Problem,
    family: LineFamily,
    objective: Objective,
) -> Result<BruteOptimum> {
    brute_optimum_with(inst, problem, family, objective, &EnumBudget::default())
}

pub fn brute_optimum_with(
    inst: &Instance,
    problem: Problem,
    family: LineFamily,
    objective: Objective,
    budget: &EnumBudget,
) -> Result<BruteOptimum> {
    let n = inst.len();
    let structures: Box<dyn Iterator<Item = Vec<Segment>>> = match problem {
        Problem::Matching => Box::new(enum_perfect_matchings(n)?),
        Problem::SpanningTree => Box::new(enum_spanning_trees(n)?),
        Problem::Triangulation => Box::new(enum_triangulations(inst)?),
    };
    let table = match objective {
        Objective::Stabbing => StabTable::new(inst, family)?,
        _ => None,
    };
    let start = Instant::now();
    let mut best: Option<Value> = None;
    let mut argmin = Vec::new();
    let mut evaluated = 0;
    for s in structures {
        evaluated += 1;
        if evaluated > budget.max_structures {
            return Err(Error::EnumerationCap(format!(
                "more than {} structures",
                budget.max_structures
            )));
        }
        if let Some(limit) = budget.time_limit {
            if evaluated % 1024 == 0 && start.elapsed() > limit {
                return Err(Error::EnumerationCap(format!("time limit {limit:?} exceeded")));
            }
        }
        let v = evaluate(&s, inst, family, objective, table.as_ref())?;
        match best.as_ref().map(|b| v.cmp_tol(b)) {
            None | Some(Ordering::Less) => {
                best = Some(v);
                argmin = vec![s];
            }
            Some(Ordering::Equal) => argmin.push(s),
            Some(Ordering::Greater) => {}
        }
    }
    let value = best.ok_or(Error::NoTriangulation)?;
    Ok(BruteOptimum {
        value,
        argmin,
        evaluated,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Point;
    use std::collections::HashSet;

    fn inst(pts: &[(i32, i32)]) -> Instance {
        Instance::new("t", pts.iter().map(|&(x, y)| Point::new(x, y)).collect()).unwrap()
    }

    fn square() -> Instance {
        inst(&[(0, 0), (1, 0), (0, 1), (1, 1)])
    }

    fn double_factorial(n: usize) -> usize {
        (1..n).step_by(2).product()
    }

    #[test]
    fn matching_counts_and_uniqueness() {
        for n in [2, 4, 6, 8, 10] {
            let all: Vec<_> = enum_perfect_matchings(n).unwrap().collect();
            assert_eq!(all.len(), double_factorial(n));
            let set: HashSet<_> = all.iter().cloned().collect();
            assert_eq!(set.len(), all.len());
            assert!(all.iter().all(|m| instance::is_perfect_matching(m, n)));
            let mut sorted = all.clone();
            sorted.sort();
            assert_eq!(sorted, all);
        }
        assert!(enum_perfect_matchings(5).is_err());
        assert!(enum_perfect_matchings(16).is_err());
    }

    #[test]
    fn tree_counts_and_uniqueness() {
        for n in 2..=7 {
            let all: Vec<_> = enum_spanning_trees(n).unwrap().collect();
            assert_eq!(all.len(), n.pow(n as u32 - 2));
            let set: HashSet<_> = all.iter().cloned().collect();
            assert_eq!(set.len(), all.len());
            assert!(all.iter().all(|t| instance::is_spanning_tree(t, n)));
        }
        assert!(enum_spanning_trees(9).is_err());
        assert!(enum_spanning_trees(1).is_err());
    }

    #[test]
    fn triangulation_counts() {
        let convex = |k: usize| {
            // points on a parabola are in convex position
            inst(&(0..k as i32).map(|i| (i, i * i)).collect::<Vec<_>>())
        };
        let catalan = [1, 1, 2, 5, 14, 42, 132, 429];
        for k in 3..=9 {
            let all: Vec<_> = enum_triangulations(&convex(k)).unwrap().collect();
            assert_eq!(all.len(), catalan[k - 2], "k = {k}");
            let set: HashSet<_> = all.iter().cloned().collect();
            assert_eq!(set.len(), all.len());
            assert!(all.iter().all(|t| instance::is_triangulation(t, convex(k).points())));
        }
        assert_eq!(enum_triangulations(&square()).unwrap().count(), 2);
        assert_eq!(
            enum_triangulations(&inst(&[(0, 0), (1, 0), (2, 0)])).unwrap_err(),
            Error::NoTriangulation
        );
        // a point inside a triangle: one triangulation
        let inner = inst(&[(0, 0), (4, 0), (0, 4), (1, 1)]);
        assert_eq!(enum_triangulations(&inner).unwrap().count(), 1);
    }

    #[test]
    fn brute_force_examples() {
        let sq = square();
        let r = brute_optimum(&sq, Problem::Matching, LineFamily::AxisParallel, Objective::Stabbing)
            .unwrap();
        assert_eq!(r.value, Value::Count(2));
        assert_eq!(r.evaluated, 3);
        let line = inst(&[(0, 0), (1, 0), (2, 0)]);
        let r = brute_optimum(&line, Problem::SpanningTree, LineFamily::AxisParallel, Objective::Stabbing)
            .unwrap();
        assert_eq!(r.value, Value::Count(2));
        let r = brute_optimum(&sq, Problem::Triangulation, LineFamily::AxisParallel, Objective::Crossing)
            .unwrap();
        assert_eq!(r.value, Value::Count(3));
        assert_eq!(r.argmin.len(), 2);
    }

    #[test]
    fn table_matches_geometry() {
        for seed in 0..5 {
            let inst = instance::gen_random(8, 20, seed).unwrap();
            for family in LineFamily::ALL {
                let t = StabTable::new(&inst, family).unwrap().unwrap();
                for tree in enum_spanning_trees(8).unwrap().step_by(997) {
                    let (k, _) = geom::stabbing_number(&tree, inst.points(), family).unwrap();
                    assert_eq!(t.eval(&tree), k as i64);
                }
            }
        }
    }

    #[test]
    fn budget_is_enforced() {
        let inst = instance::gen_random(8, 50, 1).unwrap();
        let tight = EnumBudget {
            max_structures: 100,
            time_limit: None,
        };
        let r = brute_optimum_with(&inst, Problem::SpanningTree, LineFamily::General, Objective::Stabbing, &tight);
        assert!(matches!(r, Err(Error::EnumerationCap(_))));
    }
}
