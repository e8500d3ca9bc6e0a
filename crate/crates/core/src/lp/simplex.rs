//! Dense bounded-variable tableau simplex.
//!
//! Columns are the structural variables followed by one slack per row and,
//! while a phase-1 start is in progress, artificial columns. Every row reads
//! `a·x + s·slack = b` with `s = −1` for `≥` rows and `+1` otherwise; slacks
//! live in `[0, ∞)` or `[0, 0]` for equalities. Nonbasic variables sit at one
//! of their bounds, so upper bounds never become rows.
//!
//! The engine keeps its basis across calls: adding rows or tightening bounds
//! leaves the basis dual feasible and the next [`Simplex::solve`] runs the dual
//! simplex; changing the objective keeps it primal feasible and the primal
//! simplex resumes.

use log::debug;

use super::scalar::Scalar;
use super::{LinearProgram, LpStatus, Relation};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum ColKind {
    Structural,
    Slack(usize),
    Artificial,
}

#[derive(Clone, Debug)]
struct OrigRow<T> {
    coeffs: Vec<(usize, T)>,
    rel: Relation,
    rhs: T,
}

impl<T> OrigRow<T> {
    fn slack_sign(&self) -> i8 {
        match self.rel {
            Relation::Ge => -1,
            Relation::Le | Relation::Eq => 1,
        }
    }
}

/// Consecutive degenerate pivots tolerated before switching to Bland's rule.
const DEGENERATE_LIMIT: usize = 50;

#[derive(Clone, Debug)]
pub struct Simplex<T: Scalar> {
    n_struct: usize,
    rows: Vec<OrigRow<T>>,
    obj: Vec<T>,

    kind: Vec<ColKind>,
    lo: Vec<T>,
    hi: Vec<Option<T>>,
    x: Vec<T>,
    at_upper: Vec<bool>,

    tab: Vec<Vec<T>>,
    beta: Vec<T>,
    basis: Vec<usize>,
    row_of: Vec<Option<usize>>,
    d: Vec<T>,

    phase_one: bool,
    valid: bool,
    iterations: usize,
}

fn signed<T: Scalar>(v: &T, s: i8) -> T {
    if s < 0 {
        v.neg()
    } else {
        v.clone()
    }
}

enum Entering {
    Optimal,
    Column(usize, i8),
}

impl<T: Scalar> Simplex<T> {
    pub fn new(lp: &LinearProgram) -> Self {
        let n = lp.num_vars();
        let mut obj = vec![T::zero(); n];
        for &(j, c) in lp.objective() {
            obj[j] = obj[j].add(&T::from_f64(c));
        }
        let mut s = Simplex {
            n_struct: n,
            rows: Vec::new(),
            obj,
            kind: vec![ColKind::Structural; n],
            lo: lp.lower_bounds().iter().map(|&v| T::from_f64(v)).collect(),
            hi: lp
                .upper_bounds()
                .iter()
                .map(|&v| if v.is_finite() { Some(T::from_f64(v)) } else { None })
                .collect(),
            x: lp.lower_bounds().iter().map(|&v| T::from_f64(v)).collect(),
            at_upper: vec![false; n],
            tab: Vec::new(),
            beta: Vec::new(),
            basis: Vec::new(),
            row_of: vec![None; n],
            d: vec![T::zero(); n],
            phase_one: false,
            valid: false,
            iterations: 0,
        };
        for row in lp.rows() {
            s.rows.push(OrigRow {
                coeffs: row.coeffs.iter().map(|&(j, a)| (j, T::from_f64(a))).collect(),
                rel: row.rel,
                rhs: T::from_f64(row.rhs),
            });
        }
        s
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    fn ncols(&self) -> usize {
        self.kind.len()
    }

    fn cost(&self, j: usize) -> T {
        match self.kind[j] {
            ColKind::Artificial if self.phase_one => T::from_f64(1.0),
            ColKind::Structural if !self.phase_one => self.obj[j].clone(),
            _ => T::zero(),
        }
    }

    fn is_fixed(&self, j: usize) -> bool {
        matches!(&self.hi[j], Some(h) if *h == self.lo[j])
    }

    /// Structural values.
    pub fn primal(&self) -> Vec<T> {
        self.x[..self.n_struct].to_vec()
    }

    /// Reduced costs of the structural columns at the current basis; zero
    /// for basic columns.
    pub fn reduced_costs(&self) -> Vec<T> {
        (0..self.n_struct)
            .map(|j| {
                if self.row_of[j].is_some() {
                    T::zero()
                } else {
                    self.d[j].clone()
                }
            })
            .collect()
    }

    pub fn objective_value(&self) -> T {
        self.obj
            .iter()
            .zip(&self.x)
            .fold(T::zero(), |acc, (c, v)| acc.add(&c.mul(v)))
    }

    /// Basic columns in LP numbering: structural `j` is `j`, the slack of row
    /// `r` is `num_vars + r`. Artificial columns are omitted.
    pub fn basis(&self) -> Vec<usize> {
        if !self.valid {
            return Vec::new();
        }
        self.basis
            .iter()
            .filter_map(|&c| match self.kind[c] {
                ColKind::Structural => Some(c),
                ColKind::Slack(r) => Some(self.n_struct + r),
                ColKind::Artificial => None,
            })
            .collect()
    }

    pub fn set_objective(&mut self, obj: Vec<T>) {
        assert_eq!(obj.len(), self.n_struct);
        self.obj = obj;
        if self.valid && !self.phase_one {
            self.recompute_d();
        }
    }

    pub fn set_bounds(&mut self, j: usize, lo: T, hi: Option<T>) {
        assert!(j < self.n_struct);
        self.lo[j] = lo;
        self.hi[j] = hi;
        if self.row_of[j].is_none() {
            self.place_nonbasic(j);
        }
    }

    fn place_nonbasic(&mut self, j: usize) {
        match (&self.hi[j], self.at_upper[j]) {
            (Some(h), true) => self.x[j] = h.clone(),
            _ => {
                self.at_upper[j] = false;
                self.x[j] = self.lo[j].clone();
            }
        }
    }

    pub fn add_row(&mut self, coeffs: Vec<(usize, T)>, rel: Relation, rhs: T) {
        let row = OrigRow { coeffs, rel, rhs };
        let s = row.slack_sign();
        let r = self.rows.len();
        if !self.valid {
            self.rows.push(row);
            return;
        }
        let col = self.ncols();
        for t in &mut self.tab {
            t.push(T::zero());
        }
        self.kind.push(ColKind::Slack(r));
        self.lo.push(T::zero());
        self.hi.push(if rel == Relation::Eq { Some(T::zero()) } else { None });
        self.x.push(T::zero());
        self.at_upper.push(false);
        self.d.push(T::zero());
        self.row_of.push(Some(r));

        let mut new_row = vec![T::zero(); col + 1];
        for (j, a) in &row.coeffs {
            new_row[*j] = new_row[*j].add(&signed(a, s));
        }
        new_row[col] = T::from_f64(1.0);
        let mut beta = signed(&row.rhs, s);
        for k in 0..self.tab.len() {
            let bc = self.basis[k];
            let v = new_row[bc].clone();
            if v.is_zero() {
                continue;
            }
            for (c, t) in self.tab[k].iter().enumerate() {
                if !t.is_zero() {
                    new_row[c] = new_row[c].sub(&v.mul(t)).clean();
                }
            }
            new_row[bc] = T::zero();
            beta = beta.sub(&v.mul(&self.beta[k]));
        }
        self.rows.push(row);
        self.tab.push(new_row);
        self.beta.push(beta);
        self.basis.push(col);
        self.refresh_row(r);
    }

    /// Rebuilds the slack-basis tableau. Structural nonbasic positions are
    /// kept.
    fn fresh(&mut self) {
        let n = self.n_struct;
        let m = self.rows.len();
        self.kind.truncate(n);
        self.lo.truncate(n);
        self.hi.truncate(n);
        self.x.truncate(n);
        self.at_upper.truncate(n);
        for (r, row) in self.rows.iter().enumerate() {
            self.kind.push(ColKind::Slack(r));
            self.lo.push(T::zero());
            self.hi.push(if row.rel == Relation::Eq { Some(T::zero()) } else { None });
            self.x.push(T::zero());
            self.at_upper.push(false);
        }
        let ncols = n + m;
        self.tab = Vec::with_capacity(m);
        self.beta = Vec::with_capacity(m);
        for (r, row) in self.rows.iter().enumerate() {
            let s = row.slack_sign();
            let mut t = vec![T::zero(); ncols];
            for (j, a) in &row.coeffs {
                t[*j] = t[*j].add(&signed(a, s));
            }
            t[n + r] = T::from_f64(1.0);
            self.tab.push(t);
            self.beta.push(signed(&row.rhs, s));
        }
        self.basis = (n..n + m).collect();
        self.row_of = vec![None; ncols];
        for r in 0..m {
            self.row_of[n + r] = Some(r);
        }
        for j in 0..n {
            self.place_nonbasic(j);
        }
        self.phase_one = false;
        self.valid = true;
        self.recompute_d();
        self.refresh();
    }

    fn recompute_d(&mut self) {
        let ncols = self.ncols();
        let mut d: Vec<T> = (0..ncols).map(|j| self.cost(j)).collect();
        for (r, &bc) in self.basis.iter().enumerate() {
            let cb = self.cost(bc);
            if cb.is_zero() {
                continue;
            }
            for (j, t) in self.tab[r].iter().enumerate() {
                if !t.is_zero() {
                    d[j] = d[j].sub(&cb.mul(t));
                }
            }
        }
        for &bc in &self.basis {
            d[bc] = T::zero();
        }
        self.d = d;
    }

    fn refresh_row(&mut self, r: usize) {
        let mut v = self.beta[r].clone();
        for (j, t) in self.tab[r].iter().enumerate() {
            if self.row_of[j].is_none() && !t.is_zero() && !self.x[j].is_zero() {
                v = v.sub(&t.mul(&self.x[j]));
            }
        }
        let bc = self.basis[r];
        self.x[bc] = v;
    }

    /// Recomputes basic values from `B⁻¹b` and the nonbasic values.
    fn refresh(&mut self) {
        for r in 0..self.tab.len() {
            self.refresh_row(r);
        }
    }

    fn pivot(&mut self, r: usize, j: usize) {
        let piv = self.tab[r][j].clone();
        let mut prow = std::mem::take(&mut self.tab[r]);
        for v in prow.iter_mut() {
            if !v.is_zero() {
                *v = v.div(&piv);
            }
        }
        prow[j] = T::from_f64(1.0);
        let pbeta = self.beta[r].div(&piv);
        let nz: Vec<usize> = (0..prow.len()).filter(|&k| !prow[k].is_zero()).collect();
        for (i, row) in self.tab.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[j].clone();
            if f.is_zero() {
                continue;
            }
            for &k in &nz {
                row[k] = row[k].sub(&f.mul(&prow[k])).clean();
            }
            row[j] = T::zero();
            self.beta[i] = self.beta[i].sub(&f.mul(&pbeta));
        }
        let f = self.d[j].clone();
        if !f.is_zero() {
            for &k in &nz {
                self.d[k] = self.d[k].sub(&f.mul(&prow[k])).clean();
            }
            self.d[j] = T::zero();
        }
        self.tab[r] = prow;
        self.beta[r] = pbeta;
        let old = self.basis[r];
        self.row_of[old] = None;
        self.row_of[j] = Some(r);
        self.basis[r] = j;
    }

    fn bound_violation(&self, c: usize) -> Option<(bool, T)> {
        let v = &self.x[c];
        let tol = T::feas_tol();
        let below = self.lo[c].sub(v);
        if below > tol {
            return Some((false, below));
        }
        if let Some(h) = &self.hi[c] {
            let above = v.sub(h);
            if above > tol {
                return Some((true, above));
            }
        }
        None
    }

    fn primal_feasible(&self) -> bool {
        self.basis.iter().all(|&c| self.bound_violation(c).is_none())
    }

    fn dual_feasible(&self) -> bool {
        let tol = T::opt_tol().neg();
        (0..self.ncols()).all(|j| {
            if self.row_of[j].is_some() || self.is_fixed(j) || self.kind[j] == ColKind::Artificial {
                return true;
            }
            if self.at_upper[j] {
                self.d[j].neg() >= tol
            } else {
                self.d[j] >= tol
            }
        })
    }

    fn iteration_cap(&self) -> usize {
        20_000 + 50 * (self.ncols() + self.rows.len())
    }

    fn choose_entering(&self, bland: bool) -> Entering {
        let tol = T::opt_tol();
        let mut best: Option<(usize, i8, T)> = None;
        for j in 0..self.ncols() {
            if self.row_of[j].is_some() || self.is_fixed(j) || self.kind[j] == ColKind::Artificial {
                continue;
            }
            let dj = &self.d[j];
            let dir = if !self.at_upper[j] && *dj < tol.neg() {
                1
            } else if self.at_upper[j] && *dj > tol {
                -1
            } else {
                continue;
            };
            if bland {
                return Entering::Column(j, dir);
            }
            let gain = dj.abs();
            if best.as_ref().is_none_or(|(_, _, g)| gain > *g) {
                best = Some((j, dir, gain));
            }
        }
        match best {
            Some((j, dir, _)) => Entering::Column(j, dir),
            None => Entering::Optimal,
        }
    }

    /// Runs primal iterations from a primal feasible basis. Returns
    /// `Unbounded` or `Optimal`.
    fn primal_loop(&mut self) -> Result<LpStatus> {
        let mut degenerate = 0usize;
        let mut bland = false;
        let mut count = 0usize;
        let cap = self.iteration_cap();
        loop {
            count += 1;
            if count > cap {
                return Err(Error::CyclingGuard(count));
            }
            let (j, dir) = match self.choose_entering(bland) {
                Entering::Optimal => return Ok(LpStatus::Optimal),
                Entering::Column(j, dir) => (j, dir),
            };
            self.iterations += 1;

            // Ratio test.
            let piv_tol = T::pivot_tol();
            let step_tol = T::step_tol();
            let mut best_t: Option<T> = self.hi[j].as_ref().map(|h| h.sub(&self.lo[j]));
            let mut leave: Option<(usize, bool)> = None;
            let mut best_alpha = T::zero();
            for (i, row) in self.tab.iter().enumerate() {
                let a = signed(&row[j], dir);
                if a.abs() <= piv_tol {
                    continue;
                }
                let bc = self.basis[i];
                let xb = &self.x[bc];
                let (limit, to_upper) = if a > T::zero() {
                    (xb.sub(&self.lo[bc]).div(&a), false)
                } else {
                    match &self.hi[bc] {
                        Some(h) => (h.sub(xb).div(&a.neg()), true),
                        None => continue,
                    }
                };
                let limit = if limit < T::zero() { T::zero() } else { limit };
                let take = match &best_t {
                    None => true,
                    Some(bt) => {
                        if limit < bt.sub(&step_tol) {
                            true
                        } else if limit.sub(bt).abs() <= step_tol {
                            match leave {
                                None => false,
                                Some((li, _)) => {
                                    if bland {
                                        bc < self.basis[li]
                                    } else {
                                        a.abs() > best_alpha
                                    }
                                }
                            }
                        } else {
                            false
                        }
                    }
                };
                if take {
                    best_t = Some(limit);
                    leave = Some((i, to_upper));
                    best_alpha = a.abs();
                }
            }
            let t = match best_t {
                None => return Ok(LpStatus::Unbounded),
                Some(t) => t,
            };

            if t > step_tol {
                degenerate = 0;
                bland = false;
            } else {
                degenerate += 1;
                if degenerate > DEGENERATE_LIMIT {
                    bland = true;
                }
            }

            let delta = signed(&t, dir);
            self.x[j] = self.x[j].add(&delta);
            for i in 0..self.tab.len() {
                let a = &self.tab[i][j];
                if !a.is_zero() {
                    let bc = self.basis[i];
                    self.x[bc] = self.x[bc].sub(&a.mul(&delta));
                }
            }
            match leave {
                Some((r, to_upper)) => {
                    let bc = self.basis[r];
                    self.x[bc] = if to_upper {
                        self.hi[bc].clone().expect("upper bound")
                    } else {
                        self.lo[bc].clone()
                    };
                    self.at_upper[bc] = to_upper;
                    self.pivot(r, j);
                }
                None => {
                    self.at_upper[j] = dir > 0;
                    self.x[j] = if dir > 0 {
                        self.hi[j].clone().expect("finite range")
                    } else {
                        self.lo[j].clone()
                    };
                }
            }
        }
    }

    /// Dual simplex from a dual feasible basis. Returns `Infeasible` or
    /// `Optimal` (meaning primal feasible).
    fn dual_loop(&mut self) -> Result<LpStatus> {
        let mut count = 0usize;
        let cap = self.iteration_cap();
        let piv_tol = T::pivot_tol();
        let step_tol = T::step_tol();
        loop {
            count += 1;
            if count > cap {
                return Err(Error::CyclingGuard(count));
            }
            let bland = count > DEGENERATE_LIMIT * 4;
            let mut pick: Option<(usize, bool, T)> = None;
            for (r, &bc) in self.basis.iter().enumerate() {
                if let Some((above, amount)) = self.bound_violation(bc) {
                    let better = match &pick {
                        None => true,
                        Some((pr, _, pa)) => {
                            if bland {
                                bc < self.basis[*pr]
                            } else {
                                amount > *pa
                            }
                        }
                    };
                    if better {
                        pick = Some((r, above, amount));
                    }
                }
            }
            let (r, above, _) = match pick {
                None => return Ok(LpStatus::Optimal),
                Some(p) => p,
            };
            self.iterations += 1;

            // x_B[r] moves by −α_rj·Δx_j; it has to decrease if `above`.
            let mut best: Option<(usize, T, T)> = None;
            for j in 0..self.ncols() {
                if self.row_of[j].is_some() || self.is_fixed(j) || self.kind[j] == ColKind::Artificial {
                    continue;
                }
                let a = &self.tab[r][j];
                if a.abs() <= piv_tol {
                    continue;
                }
                let up = !self.at_upper[j];
                let pos = *a > T::zero();
                // increasing x_j moves x_B[r] against the sign of α
                let eligible = if above { up == pos } else { up != pos };
                if !eligible {
                    continue;
                }
                let ratio = self.d[j].abs().div(&a.abs());
                let take = match &best {
                    None => true,
                    Some((bj, br, ba)) => {
                        if ratio < br.sub(&step_tol) {
                            true
                        } else if ratio.sub(br).abs() <= step_tol {
                            if bland {
                                j < *bj
                            } else {
                                a.abs() > *ba
                            }
                        } else {
                            false
                        }
                    }
                };
                if take {
                    best = Some((j, ratio, a.abs()));
                }
            }
            let j = match best {
                None => return Ok(LpStatus::Infeasible),
                Some((j, _, _)) => j,
            };
            let bc = self.basis[r];
            let target = if above {
                self.hi[bc].clone().expect("upper bound")
            } else {
                self.lo[bc].clone()
            };
            let alpha = self.tab[r][j].clone();
            let dxj = target.sub(&self.x[bc]).div(&alpha).neg();
            self.x[j] = self.x[j].add(&dxj);
            for i in 0..self.tab.len() {
                let a = &self.tab[i][j];
                if !a.is_zero() {
                    let b = self.basis[i];
                    self.x[b] = self.x[b].sub(&a.mul(&dxj));
                }
            }
            self.x[bc] = target;
            self.at_upper[bc] = above;
            self.pivot(r, j);
        }
    }

    fn add_artificial(&mut self, r: usize, sigma: i8) -> usize {
        let col = self.ncols();
        let s = self.rows[r].slack_sign();
        for (i, t) in self.tab.iter_mut().enumerate() {
            t.push(if i == r {
                T::from_f64((sigma * s) as f64)
            } else {
                T::zero()
            });
        }
        self.kind.push(ColKind::Artificial);
        self.lo.push(T::zero());
        self.hi.push(None);
        self.x.push(T::zero());
        self.at_upper.push(false);
        self.d.push(T::zero());
        self.row_of.push(None);
        col
    }

    fn remove_nonbasic_artificials(&mut self) {
        let keep: Vec<bool> = (0..self.ncols())
            .map(|j| self.kind[j] != ColKind::Artificial || self.row_of[j].is_some())
            .collect();
        if keep.iter().all(|&k| k) {
            return;
        }
        let mut map = vec![usize::MAX; keep.len()];
        let mut next = 0;
        for (j, &k) in keep.iter().enumerate() {
            if k {
                map[j] = next;
                next += 1;
            }
        }
        fn retain<V>(v: &mut Vec<V>, keep: &[bool]) {
            let mut i = 0;
            v.retain(|_| {
                let k = keep[i];
                i += 1;
                k
            });
        }
        for t in &mut self.tab {
            retain(t, &keep);
        }
        retain(&mut self.kind, &keep);
        retain(&mut self.lo, &keep);
        retain(&mut self.hi, &keep);
        retain(&mut self.x, &keep);
        retain(&mut self.at_upper, &keep);
        retain(&mut self.d, &keep);
        retain(&mut self.row_of, &keep);
        for b in &mut self.basis {
            *b = map[*b];
        }
    }

    /// Slack basis plus a phase-1 run when it is infeasible.
    fn cold_start(&mut self) -> Result<LpStatus> {
        for j in 0..self.n_struct {
            self.at_upper[j] = false;
        }
        self.fresh();
        let n = self.n_struct;
        let tol = T::feas_tol();
        let mut any = false;
        for r in 0..self.rows.len() {
            let sc = n + r;
            let v = self.x[sc].clone();
            let eq = self.rows[r].rel == Relation::Eq;
            let bad = v < tol.neg() || (eq && v > tol);
            if !bad {
                continue;
            }
            // residual b − a·x_N equals s·slack
            let s = self.rows[r].slack_sign();
            let resid_pos = if s > 0 { v > T::zero() } else { v < T::zero() };
            let art = self.add_artificial(r, if resid_pos { 1 } else { -1 });
            self.pivot(r, art);
            self.x[sc] = T::zero();
            self.at_upper[sc] = false;
            any = true;
        }
        if !any {
            return Ok(LpStatus::Optimal);
        }
        self.phase_one = true;
        self.recompute_d();
        self.refresh();
        self.primal_loop()?;
        let infeas = (0..self.ncols())
            .filter(|&j| self.kind[j] == ColKind::Artificial)
            .fold(T::zero(), |acc, j| acc.add(&self.x[j]));
        if infeas > tol {
            self.phase_one = false;
            self.valid = false;
            return Ok(LpStatus::Infeasible);
        }
        // Drive basic artificials out where possible.
        for r in 0..self.tab.len() {
            let bc = self.basis[r];
            if self.kind[bc] != ColKind::Artificial {
                continue;
            }
            let mut best: Option<(usize, T)> = None;
            for j in 0..self.ncols() {
                if self.row_of[j].is_some() || self.kind[j] == ColKind::Artificial {
                    continue;
                }
                let a = self.tab[r][j].abs();
                if a > T::pivot_tol() && best.as_ref().is_none_or(|(_, b)| a > *b) {
                    best = Some((j, a));
                }
            }
            if let Some((j, _)) = best {
                self.x[bc] = T::zero();
                self.pivot(r, j);
            }
        }
        for j in 0..self.ncols() {
            if self.kind[j] == ColKind::Artificial {
                self.hi[j] = Some(T::zero());
            }
        }
        self.remove_nonbasic_artificials();
        self.phase_one = false;
        self.recompute_d();
        self.refresh();
        Ok(LpStatus::Optimal)
    }

    /// Rebuilds the tableau and pivots the given LP-numbered columns back into
    /// the basis. Columns that cannot enter (singular choice) are skipped.
    pub fn load_basis(&mut self, basis: &[usize], upper: &[bool]) {
        self.fresh();
        let n = self.n_struct;
        for j in 0..n {
            self.at_upper[j] = upper.get(j).copied().unwrap_or(false) && self.hi[j].is_some();
        }
        let wanted: Vec<usize> = basis.iter().copied().filter(|&c| c < self.ncols()).collect();
        let mut is_wanted = vec![false; self.ncols()];
        for &c in &wanted {
            is_wanted[c] = true;
        }
        for &c in &wanted {
            if self.row_of[c].is_some() {
                continue;
            }
            let mut best: Option<(usize, T)> = None;
            for r in 0..self.tab.len() {
                if is_wanted[self.basis[r]] {
                    continue;
                }
                let a = self.tab[r][c].abs();
                if a > T::pivot_tol() && best.as_ref().is_none_or(|(_, b)| a > *b) {
                    best = Some((r, a));
                }
            }
            if let Some((r, _)) = best {
                let leaving = self.basis[r];
                self.pivot(r, c);
                self.at_upper[leaving] = false;
            }
        }
        for j in 0..self.ncols() {
            if self.row_of[j].is_none() {
                self.place_nonbasic(j);
            }
        }
        self.recompute_d();
        self.refresh();
    }

    fn max_residual(&self) -> f64 {
        let n = self.n_struct;
        let mut worst = 0.0f64;
        for (r, row) in self.rows.iter().enumerate() {
            let slack_col = self
                .kind
                .iter()
                .position(|k| *k == ColKind::Slack(r))
                .expect("slack column");
            let mut act = signed(&self.x[slack_col], row.slack_sign());
            for (j, a) in &row.coeffs {
                act = act.add(&a.mul(&self.x[*j]));
            }
            worst = worst.max(act.sub(&row.rhs).to_f64().abs());
        }
        for j in 0..n {
            let lo = self.lo[j].sub(&self.x[j]).to_f64();
            worst = worst.max(lo);
            if let Some(h) = &self.hi[j] {
                worst = worst.max(self.x[j].sub(h).to_f64());
            }
        }
        worst
    }

    pub fn solve(&mut self) -> Result<LpStatus> {
        let mut reinverts = 0;
        loop {
            if !self.valid {
                if self.cold_start()? == LpStatus::Infeasible {
                    return Ok(LpStatus::Infeasible);
                }
            } else {
                if self.phase_one {
                    self.valid = false;
                    continue;
                }
                self.refresh();
                if !self.primal_feasible() {
                    if self.dual_feasible() {
                        if self.dual_loop()? == LpStatus::Infeasible {
                            return Ok(LpStatus::Infeasible);
                        }
                    } else {
                        debug!("basis neither primal nor dual feasible, cold start");
                        self.valid = false;
                        continue;
                    }
                }
            }
            if self.primal_loop()? == LpStatus::Unbounded {
                return Ok(LpStatus::Unbounded);
            }
            self.refresh();
            let resid = self.max_residual();
            if T::EXACT || (resid <= 1e-9 && self.primal_feasible()) {
                return Ok(LpStatus::Optimal);
            }
            if reinverts >= 3 {
                return Err(Error::Numerical(format!("residual {resid:e} after refactorisation")));
            }
            debug!("residual {resid:e}, refactorising");
            reinverts += 1;
            let basis = self.basis();
            let upper = self.at_upper[..self.n_struct].to_vec();
            self.load_basis(&basis, &upper);
        }
    }
}
