//! Instances, solutions, file formats and seeded generators.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{self, LineFamily, Point, Segment};

/// A named point set with distinct integer points.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Instance {
    name: String,
    points: Vec<Point>,
}

impl Instance {
    pub fn new(name: impl Into<String>, points: Vec<Point>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptyInstance);
        }
        let mut seen = HashSet::with_capacity(points.len());
        for (i, p) in points.iter().enumerate() {
            if !seen.insert(*p) {
                return Err(Error::DuplicatePoint(i + 1));
            }
        }
        Ok(Instance {
            name: name.into(),
            points,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Fails with [`Error::OddMatching`] unless the point count is even.
    pub fn require_even(&self) -> Result<()> {
        if self.points.len() % 2 == 1 {
            Err(Error::OddMatching(self.points.len()))
        } else {
            Ok(())
        }
    }

    /// Removes the last point. This is the explicit way to make an odd
    /// instance usable for matchings.
    pub fn drop_last(&self) -> Result<Instance> {
        if self.points.len() < 2 {
            return Err(Error::TooSmall("cannot drop the only point".into()));
        }
        let mut points = self.points.clone();
        points.pop();
        Ok(Instance {
            name: format!("{}-dropped", self.name),
            points,
        })
    }

    /// Native text format. The name travels in a leading `# name:` comment.
    pub fn serialize(&self) -> String {
        let mut out = format!("# name: {}\n{}\n", self.name, self.points.len());
        for p in &self.points {
            out.push_str(&format!("{} {}\n", p.x, p.y));
        }
        out
    }
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

/// Reads either the native format or the TSPLIB `NODE_COORD_SECTION` subset.
///
/// `default_name` is used when the text does not carry a name.
pub fn parse_instance(text: &str, default_name: &str) -> Result<Instance> {
    if text.lines().any(|l| l.trim() == "NODE_COORD_SECTION") {
        parse_tsplib(text, default_name)
    } else {
        parse_native(text, default_name)
    }
}

fn parse_native(text: &str, default_name: &str) -> Result<Instance> {
    let mut name = default_name.to_string();
    let mut expected: Option<usize> = None;
    let mut points = Vec::new();
    let mut seen = HashSet::new();
    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.trim();
        if let Some(rest) = line.strip_prefix('#') {
            if let Some(n) = rest.trim_start().strip_prefix("name:") {
                name = n.trim().to_string();
            }
            continue;
        }
        if line.is_empty() {
            continue;
        }
        match expected {
            None => {
                let n: usize = line
                    .parse()
                    .map_err(|_| parse_err(lineno, format!("expected point count, got {line:?}")))?;
                expected = Some(n);
            }
            Some(n) => {
                if points.len() == n {
                    return Err(parse_err(lineno, "more points than declared"));
                }
                let toks: Vec<&str> = line.split_whitespace().collect();
                if toks.len() != 2 {
                    return Err(parse_err(lineno, "expected two integer coordinates"));
                }
                let x = i32::from_str(toks[0]).map_err(|_| parse_err(lineno, "bad x coordinate"))?;
                let y = i32::from_str(toks[1]).map_err(|_| parse_err(lineno, "bad y coordinate"))?;
                let p = Point::new(x, y);
                if !seen.insert(p) {
                    return Err(Error::DuplicatePoint(lineno));
                }
                points.push(p);
            }
        }
    }
    match expected {
        None => Err(parse_err(1, "missing point count")),
        Some(n) if n != points.len() => Err(parse_err(
            text.lines().count(),
            format!("declared {n} points, found {}", points.len()),
        )),
        Some(_) => Instance::new(name, points),
    }
}

/// Number of decimals a TSPLIB coordinate token needs to be integral.
fn decimals(tok: &str) -> usize {
    let lower = tok.to_ascii_lowercase();
    let (mantissa, exp) = match lower.split_once('e') {
        Some((m, e)) => (m.to_string(), e.parse::<i64>().unwrap_or(0)),
        None => (lower, 0),
    };
    let frac = mantissa
        .split_once('.')
        .map(|(_, f)| f.trim_end_matches('0').len())
        .unwrap_or(0) as i64;
    (frac - exp).max(0) as usize
}

fn parse_tsplib(text: &str, default_name: &str) -> Result<Instance> {
    let mut name = default_name.to_string();
    let mut in_coords = false;
    let mut raw: Vec<(usize, f64, f64)> = Vec::new();
    let mut max_dec = 0;
    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if !in_coords {
            if line == "NODE_COORD_SECTION" {
                in_coords = true;
            } else if let Some((key, value)) = line.split_once(':') {
                if key.trim() == "NAME" {
                    name = value.trim().to_string();
                }
            }
            continue;
        }
        if line == "EOF" {
            break;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() != 3 {
            if toks.first().is_some_and(|t| t.chars().all(|c| c.is_ascii_uppercase() || c == '_')) {
                break;
            }
            return Err(parse_err(lineno, "expected `id x y`"));
        }
        let x: f64 = toks[1].parse().map_err(|_| parse_err(lineno, "bad x coordinate"))?;
        let y: f64 = toks[2].parse().map_err(|_| parse_err(lineno, "bad y coordinate"))?;
        max_dec = max_dec.max(decimals(toks[1])).max(decimals(toks[2]));
        raw.push((lineno, x, y));
    }
    let d = max_dec.min(4);
    let scale = 10f64.powi(d as i32);
    let mut points = Vec::with_capacity(raw.len());
    let mut seen = HashSet::new();
    for (lineno, x, y) in raw {
        let (sx, sy) = ((x * scale).round(), (y * scale).round());
        if sx.abs() > i32::MAX as f64 || sy.abs() > i32::MAX as f64 {
            return Err(Error::CoordinateRange(lineno));
        }
        let p = Point::new(sx as i32, sy as i32);
        if !seen.insert(p) {
            return Err(Error::DuplicatePoint(lineno));
        }
        points.push(p);
    }
    if d > 0 {
        name = format!("{name}@1e{d}");
    }
    Instance::new(name, points)
}

/// `n` distinct uniform points in `[0, bbox]²`, drawn with ChaCha8 seeded by
/// `seed`.
///
/// At most `⌈(bbox+1)²/2⌉` points are allowed so rejection sampling keeps a
/// free-cell margin.
pub fn gen_random(n: usize, bbox: u32, seed: u64) -> Result<Instance> {
    if n == 0 {
        return Err(Error::Generator("n must be at least 1".into()));
    }
    if bbox > i32::MAX as u32 {
        return Err(Error::Generator("bbox exceeds coordinate range".into()));
    }
    let cells = (bbox as u128 + 1) * (bbox as u128 + 1);
    if n as u128 > cells.div_ceil(2) {
        return Err(Error::Generator(format!(
            "cannot place {n} distinct points in a {bbox}x{bbox} box"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen = HashSet::with_capacity(n);
    let mut points = Vec::with_capacity(n);
    while points.len() < n {
        let p = Point::new(
            rng.gen_range(0..=bbox) as i32,
            rng.gen_range(0..=bbox) as i32,
        );
        if seen.insert(p) {
            points.push(p);
        }
    }
    Instance::new(format!("random-n{n}-b{bbox}-s{seed}"), points)
}

/// Unit grid with `cols` columns and `rows` rows, keeping
/// `round(keep_fraction · rows · cols)` points chosen by a seeded sample.
/// Points are listed row by row.
pub fn gen_grid(rows: usize, cols: usize, keep_fraction: f64, seed: u64) -> Result<Instance> {
    if rows == 0 || cols == 0 {
        return Err(Error::Generator("grid must have at least one cell".into()));
    }
    if !(keep_fraction > 0.0 && keep_fraction <= 1.0) {
        return Err(Error::Generator("keep fraction must lie in (0, 1]".into()));
    }
    let total = rows * cols;
    let keep = (keep_fraction * total as f64).round() as usize;
    if keep == 0 {
        return Err(Error::Generator("grid subset is empty".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut idx: Vec<usize> = if keep == total {
        (0..total).collect()
    } else {
        sample(&mut rng, total, keep).into_vec()
    };
    idx.sort_unstable();
    let points = idx
        .into_iter()
        .map(|k| Point::new((k % cols) as i32, (k / cols) as i32))
        .collect();
    Instance::new(format!("grid-{rows}x{cols}-k{keep}-s{seed}"), points)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Problem {
    Matching,
    SpanningTree,
    Triangulation,
}

impl fmt::Display for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Problem::Matching => "matching",
            Problem::SpanningTree => "tree",
            Problem::Triangulation => "triangulation",
        })
    }
}

impl FromStr for Problem {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "matching" => Ok(Problem::Matching),
            "tree" => Ok(Problem::SpanningTree),
            "triangulation" => Ok(Problem::Triangulation),
            other => Err(Error::Unsupported(format!("problem {other:?}"))),
        }
    }
}

pub fn parse_family(s: &str) -> Result<LineFamily> {
    match s {
        "axis" => Ok(LineFamily::AxisParallel),
        "general" => Ok(LineFamily::General),
        other => Err(Error::Unsupported(format!("family {other:?}"))),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    LpBound,
    Rounding,
    Exact,
    Brute,
    MinLength,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// A feasible structure together with its stabbing number.
#[derive(Clone, Debug, PartialEq)]
pub struct Solution {
    pub problem: Problem,
    pub family: LineFamily,
    pub edges: Vec<Segment>,
    pub k: usize,
    pub lower_bound: Option<BigRational>,
    pub method: Method,
}

impl Solution {
    /// Checks feasibility for `problem`, sorts the edges and computes `k`.
    pub fn build(
        inst: &Instance,
        problem: Problem,
        family: LineFamily,
        mut edges: Vec<Segment>,
        lower_bound: Option<BigRational>,
        method: Method,
    ) -> Result<Solution> {
        edges.sort_unstable();
        check_structure(problem, &edges, inst.points())?;
        let (k, _) = geom::stabbing_number(&edges, inst.points(), family)?;
        Ok(Solution {
            problem,
            family,
            edges,
            k,
            lower_bound,
            method,
        })
    }

    pub fn to_json(&self) -> String {
        let doc = SolutionDoc {
            problem: self.problem.to_string(),
            family: self.family.to_string(),
            k: self.k,
            lower_bound: self.lower_bound.as_ref().map(rational_string),
            method: self.method.to_string(),
            edges: self.edges.iter().map(|e| [e.a(), e.b()]).collect(),
        };
        serde_json::to_string_pretty(&doc).expect("solution serialises") + "\n"
    }

    /// Parses a solution document and re-validates it against `inst`.
    /// The stored `k` must match the recomputed stabbing number.
    pub fn from_json(text: &str, inst: &Instance) -> Result<Solution> {
        let doc: SolutionDoc = serde_json::from_str(text)
            .map_err(|e| parse_err(e.line(), e.to_string()))?;
        let problem: Problem = doc.problem.parse()?;
        let family = parse_family(&doc.family)?;
        let method = match doc.method.as_str() {
            "LpBound" => Method::LpBound,
            "Rounding" => Method::Rounding,
            "Exact" => Method::Exact,
            "Brute" => Method::Brute,
            "MinLength" => Method::MinLength,
            other => return Err(Error::Unsupported(format!("method {other:?}"))),
        };
        let lower_bound = doc.lower_bound.as_deref().map(parse_rational).transpose()?;
        let mut edges = Vec::with_capacity(doc.edges.len());
        for [i, j] in doc.edges {
            if i == j {
                return Err(Error::InvalidEdge((i, j), inst.len()));
            }
            edges.push(Segment::new(i, j));
        }
        let sol = Solution::build(inst, problem, family, edges, lower_bound, method)?;
        if sol.k != doc.k {
            return Err(Error::InconsistentSolution(format!(
                "stored k = {} but recomputed k = {}",
                doc.k, sol.k
            )));
        }
        Ok(sol)
    }
}

#[derive(Serialize, Deserialize)]
struct SolutionDoc {
    problem: String,
    family: String,
    k: usize,
    lower_bound: Option<String>,
    method: String,
    edges: Vec<[usize; 2]>,
}

/// Always `p/q`, also for integers.
pub fn rational_string(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn parse_rational(s: &str) -> Result<BigRational> {
    let bad = || parse_err(0, format!("bad rational {s:?}"));
    let (p, q) = s.split_once('/').unwrap_or((s, "1"));
    let p: BigInt = p.trim().parse().map_err(|_| bad())?;
    let q: BigInt = q.trim().parse().map_err(|_| bad())?;
    if q == BigInt::from(0) {
        return Err(bad());
    }
    Ok(BigRational::new(p, q))
}

pub fn is_perfect_matching(edges: &[Segment], n: usize) -> bool {
    let mut deg = vec![0u32; n];
    for e in edges {
        if e.b() >= n {
            return false;
        }
        deg[e.a()] += 1;
        deg[e.b()] += 1;
    }
    deg.iter().all(|&d| d == 1)
}

pub fn is_spanning_tree(edges: &[Segment], n: usize) -> bool {
    if n == 0 || edges.len() + 1 != n {
        return false;
    }
    let mut uf = UnionFind::new(n);
    edges.iter().all(|e| e.b() < n && uf.union(e.a(), e.b()))
}

/// Segments allowed in a triangulation: no other point on their relative
/// interior.
pub fn triangulation_candidates(pts: &[Point]) -> Vec<Segment> {
    let n = pts.len();
    let mut out = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let blocked =
                (0..n).any(|k| k != i && k != j && geom::strictly_inside_segment(pts[i], pts[j], pts[k]));
            if !blocked {
                out.push(Segment::new(i, j));
            }
        }
    }
    out
}

/// Maximal set of pairwise non-crossing candidate segments.
pub fn is_triangulation(edges: &[Segment], pts: &[Point]) -> bool {
    let cands = triangulation_candidates(pts);
    let set: HashSet<Segment> = edges.iter().copied().collect();
    if set.len() != edges.len() || !edges.iter().all(|e| cands.contains(e)) {
        return false;
    }
    for (i, &e) in edges.iter().enumerate() {
        if edges[i + 1..].iter().any(|&f| geom::is_crossing_pair(e, f, pts)) {
            return false;
        }
    }
    cands
        .iter()
        .filter(|c| !set.contains(c))
        .all(|&c| edges.iter().any(|&e| geom::is_crossing_pair(c, e, pts)))
}

pub fn check_structure(problem: Problem, edges: &[Segment], pts: &[Point]) -> Result<()> {
    geom::validate_edges(edges, pts.len())?;
    let ok = match problem {
        Problem::Matching => is_perfect_matching(edges, pts.len()),
        Problem::SpanningTree => is_spanning_tree(edges, pts.len()),
        Problem::Triangulation => is_triangulation(edges, pts),
    };
    if ok {
        Ok(())
    } else {
        Err(Error::InconsistentSolution(format!("edges do not form a {problem}")))
    }
}

/// Disjoint-set forest with path halving.
#[derive(Clone, Debug)]
pub struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    pub fn find(&mut self, mut v: usize) -> usize {
        while self.parent[v] != v {
            self.parent[v] = self.parent[self.parent[v]];
            v = self.parent[v];
        }
        v
    }

    /// Returns false if `a` and `b` were already joined.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra.max(rb)] = ra.min(rb);
        true
    }
}
