//! Stabbing LPs for perfect matchings and spanning trees, the lazy cut loop,
//! and the length-minimizing second phase.

use std::collections::{BTreeSet, HashSet};

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::cuts::{self, VertexCut};
use crate::error::{Error, Result};
use crate::geom::{self, LineFamily, Segment, StabLine};
use crate::instance::{Instance, Problem};
use crate::lp::{self, Engine, LinearProgram, LpResult, LpStatus, Relation, Row};

/// Cuts added per separation round.
pub const MAX_CUTS_PER_ROUND: usize = 10;
/// Slack on `k` while the length objective is optimized.
pub const K_CAP_SLACK: f64 = 1e-6;
/// Weights within this distance of 0 or 1 count as integral.
pub const INTEGRALITY_TOL: f64 = 1e-6;

/// Index of segment `(a, b)`, `a < b`, in lexicographic order over `K_n`.
pub fn edge_index(n: usize, e: Segment) -> usize {
    let (a, b) = (e.a(), e.b());
    a * n - a * (a + 1) / 2 + (b - a - 1)
}

/// All segments of `K_n` in lexicographic order.
pub fn complete_edges(n: usize) -> Vec<Segment> {
    (0..n)
        .flat_map(|a| (a + 1..n).map(move |b| Segment::new(a, b)))
        .collect()
}

#[derive(Clone, Debug)]
pub struct StabModel {
    problem: Problem,
    family: LineFamily,
    n: usize,
    edges: Vec<Segment>,
    edge_hi: f64,
    lengths: Vec<f64>,
    k_index: usize,
    lines: Vec<(StabLine, usize)>,
    fixed_ones: BTreeSet<Segment>,
    fixed_zeros: BTreeSet<Segment>,
    added_cuts: Vec<VertexCut>,
    cut_keys: HashSet<Vec<usize>>,
    engine: Engine,
    last: Option<LpResult>,
}

/// Fractional optimum after the separation loop.
#[derive(Clone, Debug, PartialEq)]
pub struct RelaxationResult {
    pub k_frac: f64,
    /// Weight of every edge variable, indexed like [`StabModel::edges`].
    pub x: Vec<f64>,
    pub cuts_added: usize,
    pub lp_iterations: usize,
}

impl RelaxationResult {
    /// Edges with weight above the support threshold, paired with weights.
    pub fn support(&self, edges: &[Segment]) -> Vec<(Segment, f64)> {
        edges
            .iter()
            .zip(&self.x)
            .filter(|(_, &w)| w > cuts::SUPPORT_EPS)
            .map(|(&e, &w)| (e, w))
            .collect()
    }

    pub fn is_integral(&self) -> bool {
        self.x
            .iter()
            .all(|&w| w.abs() <= INTEGRALITY_TOL || (w - 1.0).abs() <= INTEGRALITY_TOL)
    }
}

fn build(inst: &Instance, problem: Problem, family: LineFamily) -> Result<StabModel> {
    let n = inst.len();
    let pts = inst.points();
    let edges = complete_edges(n);
    let m = edges.len();
    let k_index = m;
    // Degree rows already imply x <= 1 for matchings. Tree edges stay
    // unbounded above: a unit cap can block uncrossing a crossing pair.
    let edge_hi = match problem {
        Problem::Matching => 1.0,
        _ => f64::INFINITY,
    };
    let mut lp = LinearProgram::new(m + 1);
    for j in 0..m {
        lp.set_bounds(j, 0.0, edge_hi)?;
    }
    lp.set_objective(vec![(k_index, 1.0)])?;

    match problem {
        Problem::Matching => {
            for v in 0..n {
                let coeffs = edges
                    .iter()
                    .enumerate()
                    .filter(|(_, e)| e.touches(v))
                    .map(|(j, _)| (j, 1.0))
                    .collect();
                lp.add_row(Row::new(coeffs, Relation::Eq, 1.0))?;
            }
        }
        Problem::SpanningTree => {
            let coeffs = (0..m).map(|j| (j, 1.0)).collect();
            lp.add_row(Row::new(coeffs, Relation::Eq, (n - 1) as f64))?;
        }
        Problem::Triangulation => {
            return Err(Error::Unsupported("no LP model for triangulations".into()))
        }
    }

    let mut lines = Vec::new();
    for line in geom::representative_lines(pts, family)? {
        let mut coeffs: Vec<(usize, f64)> = edges
            .iter()
            .enumerate()
            .filter(|(_, &e)| geom::stabs(&line, e, pts))
            .map(|(j, _)| (j, 1.0))
            .collect();
        coeffs.push((k_index, -1.0));
        let r = lp.add_row(Row::new(coeffs, Relation::Le, 0.0))?;
        lines.push((line, r));
    }

    let lengths = edges.iter().map(|&e| geom::euclidean_length(e, pts)).collect();
    Ok(StabModel {
        problem,
        family,
        n,
        edges,
        edge_hi,
        lengths,
        k_index,
        lines,
        fixed_ones: BTreeSet::new(),
        fixed_zeros: BTreeSet::new(),
        added_cuts: Vec::new(),
        cut_keys: HashSet::new(),
        engine: Engine::new(lp),
        last: None,
    })
}

pub fn build_matching_model(inst: &Instance, family: LineFamily) -> Result<StabModel> {
    inst.require_even()?;
    if inst.len() < 2 {
        return Err(Error::TooSmall("a matching needs at least two points".into()));
    }
    build(inst, Problem::Matching, family)
}

pub fn build_tree_model(inst: &Instance, family: LineFamily) -> Result<StabModel> {
    if inst.len() < 2 {
        return Err(Error::TooSmall("a spanning tree needs at least two points".into()));
    }
    build(inst, Problem::SpanningTree, family)
}

pub fn build_model(inst: &Instance, problem: Problem, family: LineFamily) -> Result<StabModel> {
    match problem {
        Problem::Matching => build_matching_model(inst, family),
        Problem::SpanningTree => build_tree_model(inst, family),
        Problem::Triangulation => Err(Error::Unsupported("no LP model for triangulations".into())),
    }
}

impl StabModel {
    pub fn problem(&self) -> Problem {
        self.problem
    }

    pub fn family(&self) -> LineFamily {
        self.family
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[Segment] {
        &self.edges
    }

    pub fn k_index(&self) -> usize {
        self.k_index
    }

    pub fn edge_index(&self, e: Segment) -> usize {
        edge_index(self.n, e)
    }

    /// Representative lines with the index of their stabbing row.
    pub fn lines(&self) -> &[(StabLine, usize)] {
        &self.lines
    }

    pub fn fixed_ones(&self) -> &BTreeSet<Segment> {
        &self.fixed_ones
    }

    pub fn fixed_zeros(&self) -> &BTreeSet<Segment> {
        &self.fixed_zeros
    }

    pub fn added_cuts(&self) -> &[VertexCut] {
        &self.added_cuts
    }

    pub fn lp(&self) -> &LinearProgram {
        self.engine.lp()
    }

    /// Result of the most recent LP solve.
    pub fn last_lp(&self) -> Option<&LpResult> {
        self.last.as_ref()
    }

    /// Fixes `e` to `value` (0 or 1) through its bounds.
    pub fn fix(&mut self, e: Segment, value: bool) -> Result<()> {
        let j = self.edge_index(e);
        self.fixed_ones.remove(&e);
        self.fixed_zeros.remove(&e);
        if value {
            self.fixed_ones.insert(e);
        } else {
            self.fixed_zeros.insert(e);
        }
        let v = if value { 1.0 } else { 0.0 };
        self.engine.set_bounds(j, v, v)
    }

    /// Replaces all fixings.
    pub fn set_fixings(&mut self, ones: &BTreeSet<Segment>, zeros: &BTreeSet<Segment>) -> Result<()> {
        let stale: Vec<Segment> = self
            .fixed_ones
            .iter()
            .chain(&self.fixed_zeros)
            .filter(|e| !ones.contains(e) && !zeros.contains(e))
            .copied()
            .collect();
        for e in stale {
            let j = self.edge_index(e);
            self.engine.set_bounds(j, 0.0, self.edge_hi)?;
        }
        self.fixed_ones.clear();
        self.fixed_zeros.clear();
        for &e in ones {
            self.fix(e, true)?;
        }
        for &e in zeros {
            self.fix(e, false)?;
        }
        Ok(())
    }

    fn infeasible(&self) -> Error {
        Error::Infeasible {
            fixed_ones: self.fixed_ones.iter().copied().collect(),
            fixed_zeros: self.fixed_zeros.iter().copied().collect(),
        }
    }

    fn separate(&self, x: &[f64]) -> Result<Vec<VertexCut>> {
        let weights: Vec<(Segment, f64)> =
            self.edges.iter().copied().zip(x.iter().copied()).collect();
        match self.problem {
            Problem::Matching => cuts::separate_blossom(&weights, self.n),
            _ => cuts::separate_connectivity(&weights, self.n),
        }
    }

    /// Solves, separates and adds violated cuts until none remain.
    fn cut_loop(&mut self) -> Result<(LpResult, usize, usize)> {
        let mut added = 0;
        let mut iterations = 0;
        loop {
            let res = self.engine.solve()?;
            iterations += res.iterations;
            match res.status {
                LpStatus::Optimal => {}
                LpStatus::Infeasible => {
                    self.last = None;
                    return Err(self.infeasible());
                }
                LpStatus::Unbounded => return Err(Error::Unbounded),
            }
            let x = &res.primal[..self.k_index];
            let fresh: Vec<VertexCut> = self
                .separate(x)?
                .into_iter()
                .filter(|c| !self.cut_keys.contains(&c.members))
                .take(MAX_CUTS_PER_ROUND)
                .collect();
            if fresh.is_empty() {
                self.last = Some(res.clone());
                return Ok((res, added, iterations));
            }
            for cut in fresh {
                let coeffs = cut
                    .crossing_edges(&self.edges)
                    .map(|j| (j, 1.0))
                    .collect();
                self.engine.add_row(Row::new(coeffs, Relation::Ge, 1.0))?;
                self.cut_keys.insert(cut.members.clone());
                self.added_cuts.push(cut);
                added += 1;
            }
            log::debug!("separation round added cuts, total {}", self.added_cuts.len());
        }
    }

    fn restore_phase_one(&mut self) -> Result<()> {
        self.engine.set_bounds(self.k_index, 0.0, f64::INFINITY)?;
        self.engine.set_objective(vec![(self.k_index, 1.0)])
    }

    fn result(&self, res: &LpResult, k_frac: f64, added: usize, iterations: usize) -> RelaxationResult {
        RelaxationResult {
            k_frac,
            x: res.primal[..self.k_index].to_vec(),
            cuts_added: added,
            lp_iterations: iterations,
        }
    }

    /// Exact rational optimum of the current LP, warm-started from the last
    /// float basis.
    pub fn certify(&self) -> Result<BigRational> {
        let exact = lp::solve_exact(self.engine.lp(), self.last.as_ref())?;
        match exact.status {
            LpStatus::Optimal => Ok(exact.objective_value.expect("optimal value")),
            LpStatus::Infeasible => Err(self.infeasible()),
            LpStatus::Unbounded => Err(Error::Unbounded),
        }
    }

    pub fn lengths(&self) -> &[f64] {
        &self.lengths
    }
}

/// Minimizes `k` over the model, adding blossom or connectivity cuts lazily.
pub fn solve_relaxation(model: &mut StabModel) -> Result<RelaxationResult> {
    model.restore_phase_one()?;
    let (res, added, iterations) = model.cut_loop()?;
    let k = res.primal[model.k_index];
    Ok(model.result(&res, k, added, iterations))
}

/// Caps `k` at its optimum and minimizes total Euclidean edge length over the
/// same cut-closed polytope. The reported `k_frac` is the phase-one value.
pub fn lexicographic_refine(model: &mut StabModel, result: &RelaxationResult) -> Result<RelaxationResult> {
    model
        .engine
        .set_bounds(model.k_index, 0.0, result.k_frac + K_CAP_SLACK)?;
    let obj = model.lengths.iter().copied().enumerate().collect();
    model.engine.set_objective(obj)?;
    let (res, added, iterations) = model.cut_loop()?;
    Ok(model.result(
        &res,
        result.k_frac,
        result.cuts_added + added,
        result.lp_iterations + iterations,
    ))
}

/// Simplest rational within `1e-9` of `v` (denominator at most `10^6`), by
/// continued fractions.
pub fn rational_approx(v: f64) -> BigRational {
    let (mut p0, mut q0, mut p1, mut q1) = (0i64, 1i64, 1i64, 0i64);
    let mut r = v;
    for _ in 0..64 {
        let a = r.floor();
        let ai = a as i64;
        let (p2, q2) = (ai * p1 + p0, ai * q1 + q0);
        if q2 > 1_000_000 {
            break;
        }
        (p0, q0, p1, q1) = (p1, q1, p2, q2);
        if (p1 as f64 / q1 as f64 - v).abs() <= 1e-9 || (r - a).abs() < 1e-15 {
            break;
        }
        r = 1.0 / (r - a);
    }
    BigRational::new(BigInt::from(p1), BigInt::from(q1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Point;

    fn square() -> Instance {
        let pts = [(0, 0), (1, 0), (0, 1), (1, 1)].map(|(x, y)| Point::new(x, y));
        Instance::new("square", pts.to_vec()).unwrap()
    }

    fn inst(pts: &[(i32, i32)]) -> Instance {
        Instance::new("t", pts.iter().map(|&(x, y)| Point::new(x, y)).collect()).unwrap()
    }

    #[test]
    fn edge_index_is_lexicographic() {
        for n in 2..9 {
            for (j, e) in complete_edges(n).into_iter().enumerate() {
                assert_eq!(edge_index(n, e), j);
            }
        }
    }

    #[test]
    fn matching_model_structure() {
        let m = build_matching_model(&square(), LineFamily::AxisParallel).unwrap();
        assert_eq!(m.edges().len(), 6);
        assert_eq!(m.lp().num_vars(), 7);
        assert_eq!(m.lp().rows().len(), 8);
        assert_eq!(m.lines().len(), 4);
        let pts = square();
        for (line, r) in m.lines() {
            let row = &m.lp().rows()[*r];
            for (j, &e) in m.edges().iter().enumerate() {
                let has = row.coeffs.iter().any(|&(c, v)| c == j && v == 1.0);
                assert_eq!(has, geom::stabs(line, e, pts.points()));
            }
            assert!(row.coeffs.contains(&(m.k_index(), -1.0)));
        }
        // x = 0 touches every edge at points 0 or 2
        let (_, r) = m.lines()[0];
        assert_eq!(m.lp().rows()[r].coeffs.len(), 6);

        let two = inst(&[(0, 0), (3, 4)]);
        let m = build_matching_model(&two, LineFamily::General).unwrap();
        assert_eq!(m.edges().len(), 1);
        assert!(build_matching_model(&inst(&[(0, 0), (1, 0), (2, 2)]), LineFamily::General).is_err());
    }

    #[test]
    fn tree_model_structure() {
        let m = build_tree_model(&inst(&[(0, 0), (1, 0), (2, 0)]), LineFamily::AxisParallel).unwrap();
        assert_eq!(m.edges().len(), 3);
        let row = &m.lp().rows()[0];
        assert_eq!((row.rel, row.rhs, row.coeffs.len()), (Relation::Eq, 2.0, 3));
        let m = build_tree_model(&square(), LineFamily::AxisParallel).unwrap();
        assert_eq!(m.lp().rows()[0].rhs, 3.0);
        assert!(build_tree_model(&inst(&[(0, 0)]), LineFamily::General).is_err());
    }

    #[test]
    fn unit_square_relaxation() {
        let sq = square();
        let mut m = build_matching_model(&sq, LineFamily::AxisParallel).unwrap();
        let r = solve_relaxation(&mut m).unwrap();
        assert!((r.k_frac - 1.5).abs() < 1e-9);
        assert_eq!(m.certify().unwrap(), BigRational::new(3.into(), 2.into()));
        let refined = lexicographic_refine(&mut m, &r).unwrap();
        for (j, e) in m.edges().iter().enumerate() {
            let diagonal = geom::is_crossing_pair(*e, Segment::new(0, 3), sq.points())
                || *e == Segment::new(0, 3);
            let w = refined.x[j];
            if diagonal {
                assert!(w.abs() < 1e-9, "{e} carries {w}");
            } else {
                assert!((w - 0.5).abs() < 1e-9, "{e} carries {w}");
            }
        }
    }

    #[test]
    fn two_points_and_two_triangles() {
        let mut m = build_matching_model(&inst(&[(0, 0), (5, 5)]), LineFamily::General).unwrap();
        assert!((solve_relaxation(&mut m).unwrap().k_frac - 1.0).abs() < 1e-9);

        let tri = inst(&[(0, 0), (2, 0), (1, 2), (100, 100), (102, 100), (101, 102)]);
        let mut m = build_matching_model(&tri, LineFamily::AxisParallel).unwrap();
        let r = solve_relaxation(&mut m).unwrap();
        assert!(r.cuts_added >= 1);
        for mask in 1u32..63 {
            if mask.count_ones() % 2 == 1 {
                let side: Vec<bool> = (0..6).map(|v| mask >> v & 1 == 1).collect();
                let w: Vec<(Segment, f64)> = r.support(m.edges());
                assert!(cuts::cut_weight(&side, &w) >= 1.0 - 1e-7);
            }
        }
    }

    #[test]
    fn fixings_and_infeasibility() {
        let sq = square();
        let mut m = build_matching_model(&sq, LineFamily::AxisParallel).unwrap();
        m.fix(Segment::new(0, 1), true).unwrap();
        m.fix(Segment::new(0, 2), true).unwrap();
        match solve_relaxation(&mut m) {
            Err(Error::Infeasible { fixed_ones, .. }) => assert_eq!(fixed_ones.len(), 2),
            other => panic!("expected infeasible, got {other:?}"),
        }
        m.set_fixings(&BTreeSet::from([Segment::new(0, 1)]), &BTreeSet::new()).unwrap();
        let r = solve_relaxation(&mut m).unwrap();
        assert!((r.k_frac - 2.0).abs() < 1e-9);
        assert!(r.is_integral());
    }

    #[test]
    fn integral_optimum_is_kept_by_refine() {
        let pts = inst(&[(0, 0), (1, 5), (2, 10), (3, 15)]);
        let mut m = build_tree_model(&pts, LineFamily::General).unwrap();
        let r = solve_relaxation(&mut m).unwrap();
        let refined = lexicographic_refine(&mut m, &r).unwrap();
        assert!(refined.is_integral());
        assert!((refined.k_frac - r.k_frac).abs() < 1e-12);
    }

    #[test]
    fn rational_approximation() {
        assert_eq!(rational_approx(1.5), BigRational::new(3.into(), 2.into()));
        assert_eq!(rational_approx(4.0 / 3.0), BigRational::new(4.into(), 3.into()));
        assert_eq!(rational_approx(2.0), BigRational::from_integer(2.into()));
        assert_eq!(rational_approx(0.0), BigRational::from_integer(0.into()));
    }

    #[test]
    fn refined_support_has_no_crossing_pair() {
        use crate::instance::gen_random;
        for seed in 0..50u64 {
            let n = 4 + 2 * (seed as usize % 5);
            let inst = gen_random(n, 100, seed).unwrap();
            for family in LineFamily::ALL {
                for problem in [Problem::Matching, Problem::SpanningTree] {
                    let mut m = build_model(&inst, problem, family).unwrap();
                    let r = solve_relaxation(&mut m).unwrap();
                    let refined = lexicographic_refine(&mut m, &r).unwrap();
                    let sup = refined.support(m.edges());
                    for (i, &(e, _)) in sup.iter().enumerate() {
                        for &(f, _) in &sup[i + 1..] {
                            assert!(
                                !geom::is_crossing_pair(e, f, inst.points()),
                                "seed {seed} {problem} {family}: {e} crosses {f}"
                            );
                        }
                    }
                    let heavy = refined.x.iter().cloned().fold(0.0, f64::max);
                    let need = if problem == Problem::Matching { 0.2 } else { 1.0 / 3.0 };
                    assert!(heavy >= need - 1e-6);
                }
            }
        }
    }
}
