//! Linear programming: a bounded-variable primal/dual simplex over `f64`
//! with an exact rational instantiation used for certification.

mod scalar;
mod simplex;

use num_rational::BigRational;

pub use scalar::{exact, Scalar, FEAS_TOL, OPT_TOL, PIVOT_TOL};
pub use simplex::Simplex;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Row {
    pub coeffs: Vec<(usize, f64)>,
    pub rel: Relation,
    pub rhs: f64,
}

impl Row {
    pub fn new(coeffs: Vec<(usize, f64)>, rel: Relation, rhs: f64) -> Self {
        Row { coeffs, rel, rhs }
    }

    pub fn activity(&self, x: &[f64]) -> f64 {
        self.coeffs.iter().map(|&(j, a)| a * x[j]).sum()
    }

    /// Amount by which `x` violates the row (0 when satisfied).
    pub fn violation(&self, x: &[f64]) -> f64 {
        let act = self.activity(x);
        match self.rel {
            Relation::Le => (act - self.rhs).max(0.0),
            Relation::Ge => (self.rhs - act).max(0.0),
            Relation::Eq => (act - self.rhs).abs(),
        }
    }
}

/// `minimize c·x` subject to rows and per-variable bounds `lo ≤ x ≤ hi`.
/// Lower bounds are finite (default 0); upper bounds may be `+∞`.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearProgram {
    num_vars: usize,
    objective: Vec<(usize, f64)>,
    rows: Vec<Row>,
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl LinearProgram {
    pub fn new(num_vars: usize) -> Self {
        LinearProgram {
            num_vars,
            objective: Vec::new(),
            rows: Vec::new(),
            lo: vec![0.0; num_vars],
            hi: vec![f64::INFINITY; num_vars],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn objective(&self) -> &[(usize, f64)] {
        &self.objective
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    pub fn lower_bounds(&self) -> &[f64] {
        &self.lo
    }

    pub fn upper_bounds(&self) -> &[f64] {
        &self.hi
    }

    pub fn set_objective(&mut self, coeffs: Vec<(usize, f64)>) -> Result<()> {
        self.check_indices(&coeffs)?;
        self.objective = coeffs;
        Ok(())
    }

    pub fn add_row(&mut self, row: Row) -> Result<usize> {
        self.check_indices(&row.coeffs)?;
        if !row.rhs.is_finite() {
            return Err(Error::Numerical("non-finite right-hand side".into()));
        }
        self.rows.push(row);
        Ok(self.rows.len() - 1)
    }

    pub fn set_bounds(&mut self, var: usize, lo: f64, hi: f64) -> Result<()> {
        if var >= self.num_vars || !lo.is_finite() || lo > hi || hi.is_nan() {
            return Err(Error::Numerical(format!("bad bounds [{lo}, {hi}] for variable {var}")));
        }
        self.lo[var] = lo;
        self.hi[var] = hi;
        Ok(())
    }

    fn check_indices(&self, coeffs: &[(usize, f64)]) -> Result<()> {
        for &(j, a) in coeffs {
            if j >= self.num_vars {
                return Err(Error::Numerical(format!("variable index {j} out of range")));
            }
            if !a.is_finite() {
                return Err(Error::Numerical("non-finite coefficient".into()));
            }
        }
        Ok(())
    }

    pub fn objective_at(&self, x: &[f64]) -> f64 {
        self.objective.iter().map(|&(j, c)| c * x[j]).sum()
    }

    /// Largest row violation and largest bound violation of `x`.
    pub fn violations(&self, x: &[f64]) -> (f64, f64) {
        let rows = self.rows.iter().map(|r| r.violation(x)).fold(0.0, f64::max);
        let bounds = (0..self.num_vars)
            .map(|j| (self.lo[j] - x[j]).max(x[j] - self.hi[j]).max(0.0))
            .fold(0.0, f64::max);
        (rows, bounds)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LpResult {
    pub status: LpStatus,
    pub objective_value: f64,
    pub primal: Vec<f64>,
    /// Basic columns: variable `j` is `j`, the slack of row `r` is
    /// `num_vars + r`.
    pub basis: Vec<usize>,
    pub iterations: usize,
}

/// A float simplex that keeps its basis between modifications.
#[derive(Clone, Debug)]
pub struct Engine {
    lp: LinearProgram,
    simplex: Simplex<f64>,
}

impl Engine {
    pub fn new(lp: LinearProgram) -> Self {
        let simplex = Simplex::new(&lp);
        Engine { lp, simplex }
    }

    /// Starts from a prior basis; nonbasic variables at their upper bound
    /// are read off `primal`.
    pub fn with_basis(lp: LinearProgram, basis: &[usize], primal: &[f64]) -> Self {
        let mut e = Engine::new(lp);
        let upper: Vec<bool> = (0..e.lp.num_vars)
            .map(|j| {
                let h = e.lp.hi[j];
                h.is_finite() && primal.get(j).is_some_and(|&v| (v - h).abs() <= FEAS_TOL)
            })
            .collect();
        e.simplex.load_basis(basis, &upper);
        e
    }

    pub fn lp(&self) -> &LinearProgram {
        &self.lp
    }

    pub fn add_row(&mut self, row: Row) -> Result<usize> {
        let idx = self.lp.add_row(row.clone())?;
        self.simplex.add_row(row.coeffs, row.rel, row.rhs);
        Ok(idx)
    }

    pub fn set_bounds(&mut self, var: usize, lo: f64, hi: f64) -> Result<()> {
        self.lp.set_bounds(var, lo, hi)?;
        self.simplex
            .set_bounds(var, lo, if hi.is_finite() { Some(hi) } else { None });
        Ok(())
    }

    pub fn set_objective(&mut self, coeffs: Vec<(usize, f64)>) -> Result<()> {
        self.lp.set_objective(coeffs)?;
        let mut dense = vec![0.0; self.lp.num_vars];
        for &(j, c) in self.lp.objective() {
            dense[j] += c;
        }
        self.simplex.set_objective(dense);
        Ok(())
    }

    /// Reduced costs after the last optimal solve.
    pub fn reduced_costs(&self) -> Vec<f64> {
        self.simplex.reduced_costs()
    }

    pub fn solve(&mut self) -> Result<LpResult> {
        let before = self.simplex.iterations();
        let status = self.simplex.solve()?;
        let iterations = self.simplex.iterations() - before;
        let primal = if status == LpStatus::Optimal {
            self.simplex.primal()
        } else {
            Vec::new()
        };
        let objective_value = match status {
            LpStatus::Optimal => self.lp.objective_at(&primal),
            LpStatus::Infeasible => f64::INFINITY,
            LpStatus::Unbounded => f64::NEG_INFINITY,
        };
        Ok(LpResult {
            status,
            objective_value,
            primal,
            basis: self.simplex.basis(),
            iterations,
        })
    }
}

pub fn lp_solve(lp: &LinearProgram, warm: Option<&LpResult>) -> Result<LpResult> {
    let mut engine = match warm {
        Some(prior) if !prior.basis.is_empty() => {
            Engine::with_basis(lp.clone(), &prior.basis, &prior.primal)
        }
        _ => Engine::new(lp.clone()),
    };
    engine.solve()
}

/// Solves `lp` extended by `new_rows`, restarting from the prior basis.
pub fn lp_add_rows(lp: &LinearProgram, new_rows: &[Row], prior: &LpResult) -> Result<LpResult> {
    let mut grown = lp.clone();
    for r in new_rows {
        grown.add_row(r.clone())?;
    }
    lp_solve(&grown, Some(prior))
}

/// Copy of `lp` with `var` fixed to `value`, which must lie within the
/// variable's current bounds.
pub fn lp_fix_variable(lp: &LinearProgram, var: usize, value: f64) -> Result<LinearProgram> {
    if var >= lp.num_vars {
        return Err(Error::Numerical(format!("variable index {var} out of range")));
    }
    let (lo, hi) = (lp.lo[var], lp.hi[var]);
    if !(value >= lo && value <= hi) {
        return Err(Error::FixOutOfBounds { var, value, lo, hi });
    }
    let mut out = lp.clone();
    out.set_bounds(var, value, value)?;
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExactResult {
    pub status: LpStatus,
    pub objective_value: Option<BigRational>,
    pub primal: Vec<BigRational>,
}

/// Solves `lp` in exact rational arithmetic. A float basis, when given, is
/// loaded first so that certification of a float optimum usually needs no
/// pivots.
pub fn solve_exact(lp: &LinearProgram, warm: Option<&LpResult>) -> Result<ExactResult> {
    let mut s: Simplex<BigRational> = Simplex::new(lp);
    if let Some(prior) = warm.filter(|p| !p.basis.is_empty()) {
        let upper: Vec<bool> = (0..lp.num_vars)
            .map(|j| {
                let h = lp.hi[j];
                h.is_finite() && prior.primal.get(j).is_some_and(|&v| (v - h).abs() <= FEAS_TOL)
            })
            .collect();
        s.load_basis(&prior.basis, &upper);
    }
    let status = s.solve()?;
    if status != LpStatus::Optimal {
        return Ok(ExactResult {
            status,
            objective_value: None,
            primal: Vec::new(),
        });
    }
    Ok(ExactResult {
        status,
        objective_value: Some(s.objective_value()),
        primal: s.primal(),
    })
}
