//! Exact integer geometry: orientation, line stabbing, representative line
//! families and the stabbing / crossing / average-stabbing measures of an
//! edge set.
//!
//! Every predicate works on integer coordinates. Determinants are evaluated
//! in `i128`, which is wide enough for any pair of `i32` points. Positions of
//! proper intersection points along a line are compared as big rationals.

use std::cmp::Ordering;
use std::collections::HashSet;
use std::fmt;

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Point {
    pub x: i32,
    pub y: i32,
}

impl Point {
    pub const fn new(x: i32, y: i32) -> Self {
        Point { x, y }
    }
}

/// An edge between two point indices, stored with `a < b`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Segment {
    a: usize,
    b: usize,
}

impl Segment {
    /// Builds the canonical segment for the unordered pair `{i, j}`.
    ///
    /// Panics if `i == j`.
    pub fn new(i: usize, j: usize) -> Self {
        assert_ne!(i, j, "segment endpoints must differ");
        if i < j {
            Segment { a: i, b: j }
        } else {
            Segment { a: j, b: i }
        }
    }

    pub fn a(&self) -> usize {
        self.a
    }

    pub fn b(&self) -> usize {
        self.b
    }

    pub fn touches(&self, v: usize) -> bool {
        self.a == v || self.b == v
    }

    pub fn other(&self, v: usize) -> usize {
        if self.a == v {
            self.b
        } else {
            self.a
        }
    }
}

impl fmt::Display for Segment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.a, self.b)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LineFamily {
    AxisParallel,
    General,
}

impl LineFamily {
    pub const ALL: [LineFamily; 2] = [LineFamily::AxisParallel, LineFamily::General];
}

impl fmt::Display for LineFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LineFamily::AxisParallel => f.write_str("axis"),
            LineFamily::General => f.write_str("general"),
        }
    }
}

/// The line `a·x + b·y = c` in lowest terms with a canonical sign.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StabLine {
    a: i128,
    b: i128,
    c: i128,
}

fn gcd(mut a: i128, mut b: i128) -> i128 {
    a = a.abs();
    b = b.abs();
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

impl StabLine {
    /// Panics if `a` and `b` are both zero.
    pub fn new(a: i128, b: i128, c: i128) -> Self {
        assert!(a != 0 || b != 0, "degenerate line");
        let g = gcd(gcd(a, b), c);
        let (mut a, mut b, mut c) = (a / g, b / g, c / g);
        if a < 0 || (a == 0 && b < 0) {
            a = -a;
            b = -b;
            c = -c;
        }
        StabLine { a, b, c }
    }

    pub fn vertical(x: i32) -> Self {
        StabLine::new(1, 0, x as i128)
    }

    pub fn horizontal(y: i32) -> Self {
        StabLine::new(0, 1, y as i128)
    }

    /// The line through two distinct points.
    pub fn through(p: Point, q: Point) -> Self {
        let a = q.y as i128 - p.y as i128;
        let b = p.x as i128 - q.x as i128;
        let c = a * p.x as i128 + b * p.y as i128;
        StabLine::new(a, b, c)
    }

    pub fn coefficients(&self) -> (i128, i128, i128) {
        (self.a, self.b, self.c)
    }

    pub fn is_axis_parallel(&self) -> bool {
        self.a == 0 || self.b == 0
    }

    /// `a·x + b·y − c`; its sign tells the side of `p`.
    pub fn eval(&self, p: Point) -> i128 {
        self.a * p.x as i128 + self.b * p.y as i128 - self.c
    }

    /// Coordinate along the line direction `(−b, a)`.
    fn along(&self, p: Point) -> i128 {
        -self.b * p.x as i128 + self.a * p.y as i128
    }

    /// The parallel line shifted by half a unit of `a·x + b·y` in the given
    /// direction. Since vertex values are integral, no vertex lies strictly
    /// between this line and `self`.
    pub fn half_offset(&self, up: bool) -> Self {
        let d = if up { 1 } else { -1 };
        StabLine::new(2 * self.a, 2 * self.b, 2 * self.c + d)
    }
}

impl fmt::Display for StabLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x + {}y = {}", self.a, self.b, self.c)
    }
}

/// Sign of `(q − p) × (r − p)`.
pub fn orient(p: Point, q: Point, r: Point) -> i32 {
    let det = (q.x as i128 - p.x as i128) * (r.y as i128 - p.y as i128)
        - (q.y as i128 - p.y as i128) * (r.x as i128 - p.x as i128);
    det.signum() as i32
}

fn endpoints(seg: Segment, pts: &[Point]) -> (Point, Point) {
    (pts[seg.a], pts[seg.b])
}

/// Whether the closed segment meets the line. Endpoint contact counts.
pub fn stabs(line: &StabLine, seg: Segment, pts: &[Point]) -> bool {
    let (p, q) = endpoints(seg, pts);
    let sp = line.eval(p).signum();
    let sq = line.eval(q).signum();
    sp == 0 || sq == 0 || sp != sq
}

/// True iff the segments cross at a point interior to both. Shared endpoints,
/// T-junctions and collinear overlaps are not crossings.
pub fn is_crossing_pair(e1: Segment, e2: Segment, pts: &[Point]) -> bool {
    let (p1, p2) = endpoints(e1, pts);
    let (q1, q2) = endpoints(e2, pts);
    let d1 = orient(p1, p2, q1);
    let d2 = orient(p1, p2, q2);
    let d3 = orient(q1, q2, p1);
    let d4 = orient(q1, q2, p2);
    d1 * d2 < 0 && d3 * d4 < 0
}

pub fn validate_edges(edges: &[Segment], n: usize) -> Result<()> {
    for e in edges {
        if e.b >= n {
            return Err(Error::InvalidEdge((e.a, e.b), n));
        }
    }
    Ok(())
}

fn sorted_distinct<I: Iterator<Item = i32>>(it: I) -> Vec<i32> {
    let mut v: Vec<i32> = it.collect();
    v.sort_unstable();
    v.dedup();
    v
}

fn axis_lines(pts: &[Point]) -> Vec<StabLine> {
    let xs = sorted_distinct(pts.iter().map(|p| p.x));
    let ys = sorted_distinct(pts.iter().map(|p| p.y));
    xs.into_iter()
        .map(StabLine::vertical)
        .chain(ys.into_iter().map(StabLine::horizontal))
        .collect()
}

/// A finite set of lines on which the maximum stab count over the whole
/// family is attained.
///
/// Axis-parallel: one vertical line per distinct x and one horizontal line per
/// distinct y (verticals first, both ascending). General: every line through
/// two points in pair order, followed by the axis-parallel lines not already
/// present.
pub fn representative_lines(pts: &[Point], family: LineFamily) -> Result<Vec<StabLine>> {
    if pts.is_empty() {
        return Err(Error::EmptyInstance);
    }
    let axis = axis_lines(pts);
    match family {
        LineFamily::AxisParallel => Ok(axis),
        LineFamily::General => {
            let mut seen = HashSet::new();
            let mut out = Vec::new();
            for i in 0..pts.len() {
                for j in i + 1..pts.len() {
                    let l = StabLine::through(pts[i], pts[j]);
                    if seen.insert(l) {
                        out.push(l);
                    }
                }
            }
            for l in axis {
                if seen.insert(l) {
                    out.push(l);
                }
            }
            Ok(out)
        }
    }
}

/// Lines used to evaluate crossing numbers: the representative lines plus one
/// line inside every open cell adjacent to them. Exact for the axis-parallel
/// family; for the general family the offset parallels are a heuristic
/// superset and do not sample rotated cells.
pub fn crossing_evaluation_lines(pts: &[Point], family: LineFamily) -> Result<Vec<StabLine>> {
    let mut lines = representative_lines(pts, family)?;
    match family {
        LineFamily::AxisParallel => {
            let xs = sorted_distinct(pts.iter().map(|p| p.x));
            let ys = sorted_distinct(pts.iter().map(|p| p.y));
            for w in xs.windows(2) {
                lines.push(StabLine::new(2, 0, w[0] as i128 + w[1] as i128));
            }
            for w in ys.windows(2) {
                lines.push(StabLine::new(0, 2, w[0] as i128 + w[1] as i128));
            }
        }
        LineFamily::General => {
            let base = lines.clone();
            let mut seen: HashSet<StabLine> = base.iter().copied().collect();
            for l in base {
                for up in [false, true] {
                    let o = l.half_offset(up);
                    if seen.insert(o) {
                        lines.push(o);
                    }
                }
            }
        }
    }
    Ok(lines)
}

/// Maximum number of edges met by one line of the family, with a witness
/// line attaining it (the first in enumeration order). Empty edge sets give
/// `(0, None)`.
pub fn stabbing_number(
    edges: &[Segment],
    pts: &[Point],
    family: LineFamily,
) -> Result<(usize, Option<StabLine>)> {
    validate_edges(edges, pts.len())?;
    if edges.is_empty() {
        return Ok((0, None));
    }
    let mut best = (0, None);
    for line in representative_lines(pts, family)? {
        let count = edges.iter().filter(|&&e| stabs(&line, e, pts)).count();
        if count > best.0 {
            best = (count, Some(line));
        }
    }
    Ok(best)
}

/// Number of connected components of the line's intersection with the union
/// of the segments. Touching pieces merge.
pub fn components_on_line(line: &StabLine, edges: &[Segment], pts: &[Point]) -> usize {
    let mut pieces: Vec<(BigRational, BigRational)> = Vec::new();
    for &e in edges {
        let (p, q) = endpoints(e, pts);
        let lp = line.eval(p);
        let lq = line.eval(q);
        let piece = if lp == 0 && lq == 0 {
            let (tp, tq) = (line.along(p), line.along(q));
            let (lo, hi) = if tp <= tq { (tp, tq) } else { (tq, tp) };
            Some((rat(lo), rat(hi)))
        } else if lp == 0 {
            let t = rat(line.along(p));
            Some((t.clone(), t))
        } else if lq == 0 {
            let t = rat(line.along(q));
            Some((t.clone(), t))
        } else if lp.signum() != lq.signum() {
            // p + s (q - p) with s = -lp / (lq - lp)
            let tp = BigInt::from(line.along(p));
            let tq = BigInt::from(line.along(q));
            let den = BigInt::from(lq) - BigInt::from(lp);
            let num = &tp * &den - BigInt::from(lp) * (&tq - &tp);
            let t = BigRational::new(num, den);
            Some((t.clone(), t))
        } else {
            None
        };
        if let Some(pc) = piece {
            pieces.push(pc);
        }
    }
    if pieces.is_empty() {
        return 0;
    }
    pieces.sort_by(|x, y| x.0.cmp(&y.0).then_with(|| x.1.cmp(&y.1)));
    let mut count = 1;
    let mut reach = pieces[0].1.clone();
    for (lo, hi) in pieces.into_iter().skip(1) {
        if lo > reach {
            count += 1;
            reach = hi;
        } else if hi > reach {
            reach = hi;
        }
    }
    count
}

fn rat(v: i128) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

pub fn crossing_number(edges: &[Segment], pts: &[Point], family: LineFamily) -> Result<usize> {
    validate_edges(edges, pts.len())?;
    if edges.is_empty() {
        return Ok(0);
    }
    Ok(crossing_evaluation_lines(pts, family)?
        .iter()
        .map(|l| components_on_line(l, edges, pts))
        .max()
        .unwrap_or(0))
}

/// Average stab count over a uniform line distribution.
#[derive(Clone, Debug, PartialEq)]
pub enum AverageStabbing {
    /// Axis-parallel family: exact rational.
    Exact(Ratio<i128>),
    /// General family: real value (edge lengths are irrational).
    Real(f64),
}

impl AverageStabbing {
    pub fn to_f64(&self) -> f64 {
        match self {
            AverageStabbing::Exact(r) => *r.numer() as f64 / *r.denom() as f64,
            AverageStabbing::Real(v) => *v,
        }
    }

    /// Compares two values of the same kind; reals within a relative `1e-9`
    /// are equal.
    pub fn cmp_tol(&self, other: &AverageStabbing) -> Ordering {
        match (self, other) {
            (AverageStabbing::Exact(a), AverageStabbing::Exact(b)) => a.cmp(b),
            _ => cmp_real(self.to_f64(), other.to_f64()),
        }
    }
}

pub(crate) fn cmp_real(a: f64, b: f64) -> Ordering {
    let scale = a.abs().max(b.abs()).max(1.0);
    if (a - b).abs() <= 1e-9 * scale {
        Ordering::Equal
    } else {
        a.partial_cmp(&b).unwrap_or(Ordering::Equal)
    }
}

/// ∫ (number of edges met by the line x = t) dt, by sweeping the cells
/// between consecutive vertex coordinates.
fn sweep_integral(edges: &[Segment], coords: &[i32], key: impl Fn(usize) -> i32) -> i128 {
    let events = sorted_distinct(coords.iter().copied());
    let mut total: i128 = 0;
    for w in events.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let count = edges
            .iter()
            .filter(|e| {
                let (u, v) = (key(e.a), key(e.b));
                u.min(v) <= lo && u.max(v) >= hi
            })
            .count() as i128;
        total += count * (hi as i128 - lo as i128);
    }
    total
}

/// Expected number of edges met by a random line of the family.
///
/// Axis-parallel: vertical and horizontal lines are equally likely and their
/// intercepts are uniform over a common interval of length
/// `D = max(width, height)` of the bounding box, giving
/// `(Σ|Δx| + Σ|Δy|) / (2D)`. General: by the Cauchy–Crofton formula the
/// measure of lines meeting a segment is twice its length, normalised by the
/// measure `2πR` of lines meeting the bounding disk of radius `R` (half the
/// bounding-box diagonal).
pub fn average_stabbing(
    edges: &[Segment],
    pts: &[Point],
    family: LineFamily,
) -> Result<AverageStabbing> {
    validate_edges(edges, pts.len())?;
    if pts.is_empty() {
        return Err(Error::EmptyInstance);
    }
    let (xmin, xmax) = min_max(pts.iter().map(|p| p.x));
    let (ymin, ymax) = min_max(pts.iter().map(|p| p.y));
    let w = xmax as i128 - xmin as i128;
    let h = ymax as i128 - ymin as i128;
    if w == 0 && h == 0 {
        return Err(Error::DegenerateInstance);
    }
    match family {
        LineFamily::AxisParallel => {
            let xs: Vec<i32> = pts.iter().map(|p| p.x).collect();
            let ys: Vec<i32> = pts.iter().map(|p| p.y).collect();
            let ix = sweep_integral(edges, &xs, |i| pts[i].x);
            let iy = sweep_integral(edges, &ys, |i| pts[i].y);
            Ok(AverageStabbing::Exact(Ratio::new(ix + iy, 2 * w.max(h))))
        }
        LineFamily::General => {
            let total: f64 = edges.iter().map(|e| euclidean_length(*e, pts)).sum();
            let radius = ((w * w + h * h) as f64).sqrt() / 2.0;
            Ok(AverageStabbing::Real(total / (std::f64::consts::PI * radius)))
        }
    }
}

fn min_max(it: impl Iterator<Item = i32>) -> (i32, i32) {
    it.fold((i32::MAX, i32::MIN), |(lo, hi), v| (lo.min(v), hi.max(v)))
}

pub fn euclidean_length(e: Segment, pts: &[Point]) -> f64 {
    let (p, q) = endpoints(e, pts);
    let dx = p.x as f64 - q.x as f64;
    let dy = p.y as f64 - q.y as f64;
    dx.hypot(dy)
}

pub fn manhattan_length(e: Segment, pts: &[Point]) -> i64 {
    let (p, q) = endpoints(e, pts);
    (p.x as i64 - q.x as i64).abs() + (p.y as i64 - q.y as i64).abs()
}

/// Squared Euclidean length, exact.
pub fn squared_length(e: Segment, pts: &[Point]) -> i128 {
    let (p, q) = endpoints(e, pts);
    let dx = p.x as i128 - q.x as i128;
    let dy = p.y as i128 - q.y as i128;
    dx * dx + dy * dy
}

/// Whether the open segment `pq` contains the point `r`.
pub fn strictly_inside_segment(p: Point, q: Point, r: Point) -> bool {
    if orient(p, q, r) != 0 || r == p || r == q {
        return false;
    }
    let within = |a: i32, b: i32, v: i32| a.min(b) <= v && v <= a.max(b);
    within(p.x, q.x, r.x) && within(p.y, q.y, r.y)
}

/// Whether the line meets the open triangle `ijk`.
pub fn meets_triangle_interior(line: &StabLine, tri: [usize; 3], pts: &[Point]) -> bool {
    let s: Vec<i128> = tri.iter().map(|&v| line.eval(pts[v]).signum()).collect();
    s.iter().any(|&v| v > 0) && s.iter().any(|&v| v < 0)
}

/// Signed area of a triangle, doubled. Used by tests and by triangle
/// extraction.
pub fn area2(p: Point, q: Point, r: Point) -> i128 {
    (q.x as i128 - p.x as i128) * (r.y as i128 - p.y as i128)
        - (q.y as i128 - p.y as i128) * (r.x as i128 - p.x as i128)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(x: i32, y: i32) -> Point {
        Point::new(x, y)
    }

    fn seg(i: usize, j: usize) -> Segment {
        Segment::new(i, j)
    }

    #[test]
    fn orient_examples() {
        assert_eq!(orient(p(0, 0), p(1, 0), p(0, 1)), 1);
        assert_eq!(orient(p(0, 0), p(1, 1), p(2, 2)), 0);
        assert_eq!(orient(p(0, 0), p(1, 1), p(2, 0)), -1);
    }

    #[test]
    fn orient_extreme_coordinates() {
        let a = p(i32::MIN, i32::MIN);
        let b = p(i32::MAX, i32::MAX);
        let c = p(i32::MAX, i32::MIN);
        assert_eq!(orient(a, b, c), -1);
        assert_eq!(orient(a, c, b), 1);
    }

    #[test]
    fn stabs_examples() {
        let pts = [p(0, 0), p(2, 0), p(1, 0)];
        assert!(stabs(&StabLine::vertical(1), seg(0, 1), &pts));
        assert!(stabs(&StabLine::vertical(1), seg(2, 1), &pts));
        assert!(!stabs(&StabLine::vertical(3), seg(0, 1), &pts));
        // collinear overlap
        assert!(stabs(&StabLine::horizontal(0), seg(0, 1), &pts));
    }

    #[test]
    fn canonical_lines_compare_equal() {
        assert_eq!(StabLine::new(-2, 0, -4), StabLine::vertical(2));
        assert_eq!(StabLine::through(p(0, 0), p(2, 2)), StabLine::through(p(3, 3), p(1, 1)));
        assert_eq!(StabLine::new(0, -3, 6), StabLine::horizontal(-2));
    }

    #[test]
    fn axis_representatives() {
        let pts = [p(0, 0), p(1, 2), p(3, 1)];
        let lines = representative_lines(&pts, LineFamily::AxisParallel).unwrap();
        let expect: Vec<StabLine> = [0, 1, 3]
            .iter()
            .map(|&x| StabLine::vertical(x))
            .chain([0, 1, 2].iter().map(|&y| StabLine::horizontal(y)))
            .collect();
        assert_eq!(lines, expect);

        let pts = [p(0, 0), p(0, 5), p(2, 0)];
        let lines = representative_lines(&pts, LineFamily::AxisParallel).unwrap();
        let oracle: HashSet<StabLine> = pts
            .iter()
            .flat_map(|q| [StabLine::vertical(q.x), StabLine::horizontal(q.y)])
            .collect();
        assert_eq!(lines.len(), 4);
        assert_eq!(lines.iter().copied().collect::<HashSet<_>>(), oracle);
    }

    #[test]
    fn general_representatives() {
        let pts = [p(0, 0), p(4, 1), p(1, 3)];
        let lines = representative_lines(&pts, LineFamily::General).unwrap();
        // three slanted pair lines plus 3 + 3 axis lines
        assert_eq!(lines.len(), 9);
        let pts = [p(0, 0), p(1, 0), p(0, 1)];
        let lines = representative_lines(&pts, LineFamily::General).unwrap();
        // two of the pair lines coincide with axis lines
        assert_eq!(lines.len(), 3 + 4 - 2);
        assert_eq!(representative_lines(&[], LineFamily::General), Err(Error::EmptyInstance));
    }

    #[test]
    fn stabbing_examples() {
        let pts = [p(0, 0), p(1, 0), p(0, 1), p(1, 1)];
        let (k, w) = stabbing_number(&[seg(0, 1)], &pts, LineFamily::AxisParallel).unwrap();
        assert_eq!(k, 1);
        assert!(w.is_some());
        let (k, w) = stabbing_number(&[seg(0, 1), seg(2, 3)], &pts, LineFamily::AxisParallel).unwrap();
        assert_eq!(k, 2);
        assert_eq!(w, Some(StabLine::vertical(0)));
        assert_eq!(stabbing_number(&[], &pts, LineFamily::General).unwrap(), (0, None));
        assert!(stabbing_number(&[seg(0, 7)], &pts, LineFamily::General).is_err());
    }

    #[test]
    fn crossing_examples() {
        let pts = [p(0, 0), p(1, 0), p(2, 0), p(3, 0)];
        let adj = [seg(0, 1), seg(1, 2)];
        for fam in LineFamily::ALL {
            assert_eq!(crossing_number(&adj, &pts, fam).unwrap(), 1);
            assert_eq!(stabbing_number(&adj, &pts, fam).unwrap().0, 2);
        }
        let apart = [seg(0, 1), seg(2, 3)];
        for fam in LineFamily::ALL {
            assert_eq!(crossing_number(&apart, &pts, fam).unwrap(), 2);
            assert_eq!(stabbing_number(&apart, &pts, fam).unwrap().0, 2);
        }
        let sq = [p(0, 0), p(1, 0), p(0, 1), p(1, 1)];
        let tri = [seg(0, 1), seg(0, 2), seg(1, 3), seg(2, 3), seg(0, 3)];
        assert_eq!(crossing_number(&tri, &sq, LineFamily::AxisParallel).unwrap(), 3);
        assert_eq!(components_on_line(&StabLine::vertical(0), &tri, &sq), 1);
        assert_eq!(components_on_line(&StabLine::new(2, 0, 1), &tri, &sq), 3);
    }

    #[test]
    fn proper_crossing_examples() {
        let pts = [p(0, 0), p(1, 1), p(1, 0), p(0, 1), p(2, 1)];
        assert!(is_crossing_pair(seg(0, 1), seg(2, 3), &pts));
        assert!(!is_crossing_pair(seg(0, 2), seg(3, 1), &pts));
        assert!(!is_crossing_pair(seg(0, 2), seg(2, 4), &pts));
        // T-junction and collinear overlap
        let pts = [p(0, 0), p(2, 0), p(1, 0), p(1, 1), p(3, 0)];
        assert!(!is_crossing_pair(seg(0, 1), seg(2, 3), &pts));
        assert!(!is_crossing_pair(seg(0, 1), seg(2, 4), &pts));
    }

    #[test]
    fn average_examples() {
        let pts = [p(0, 0), p(1, 0)];
        assert_eq!(
            average_stabbing(&[seg(0, 1)], &pts, LineFamily::AxisParallel).unwrap(),
            AverageStabbing::Exact(Ratio::new(1, 2))
        );
        assert_eq!(
            average_stabbing(&[], &pts, LineFamily::AxisParallel).unwrap(),
            AverageStabbing::Exact(Ratio::from_integer(0))
        );
        let pts = [p(0, 0), p(1, 0), p(0, 1), p(1, 1)];
        assert_eq!(
            average_stabbing(&[seg(0, 1), seg(2, 3)], &pts, LineFamily::AxisParallel).unwrap(),
            AverageStabbing::Exact(Ratio::from_integer(1))
        );
        assert_eq!(
            average_stabbing(&[], &[p(3, 3)], LineFamily::General),
            Err(Error::DegenerateInstance)
        );
    }

    #[test]
    fn general_average_matches_crofton_integral() {
        // numeric integration over directions of the projected edge lengths
        let pts = [p(0, 0), p(3, 1), p(1, 4), p(5, 5)];
        let edges = [seg(0, 1), seg(2, 3), seg(1, 2)];
        let steps = 20_000;
        let mut measure = 0.0;
        for s in 0..steps {
            let th = std::f64::consts::PI * (s as f64 + 0.5) / steps as f64;
            let (c, sn) = (th.cos(), th.sin());
            for e in &edges {
                let (u, v) = (pts[e.a()], pts[e.b()]);
                measure += ((u.x - v.x) as f64 * c + (u.y - v.y) as f64 * sn).abs();
            }
        }
        measure *= std::f64::consts::PI / steps as f64;
        let radius = ((25.0f64 + 25.0).sqrt()) / 2.0;
        let expect = measure / (2.0 * std::f64::consts::PI * radius);
        let got = average_stabbing(&edges, &pts, LineFamily::General).unwrap().to_f64();
        assert!((got - expect).abs() < 1e-6, "{got} vs {expect}");
    }
}
