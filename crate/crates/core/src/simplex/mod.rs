//! Bounded-variable revised primal simplex over the sparse LU factors in
//! [`lu`]. Phase 1 minimizes the total infeasibility of the basic variables,
//! phase 2 the true objective; the solver switches automatically, so bound
//! edits and appended rows warm-start from the previous basis.

pub mod lu;

use crate::error::{Error, Result};
use crate::model::{LinearModel, Relation, Row};
use crate::scalar::Scalar;
use lu::{Eta, LuFactors};

pub use lu::LuFactors as BasisFactors;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

#[derive(Clone, Debug)]
pub struct LpSolution<F: Scalar = f64> {
    pub status: SolveStatus,
    /// Values of the structural (model) variables.
    pub x: Vec<F>,
    pub objective: F,
    pub iterations: u64,
    pub max_row_violation: F,
    pub max_bound_violation: F,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum VarState {
    Basic,
    AtLower,
    AtUpper,
}

/// Refactorize after this many eta updates.
const REFACTOR_INTERVAL: usize = 192;
/// Consecutive degenerate pivots before switching to Bland's rule.
const DEGENERATE_STREAK_LIMIT: u64 = 300;

pub struct SimplexSolver<F: Scalar = f64> {
    m: usize,
    nstruct: usize,
    /// Columns of the computational form, structural then one logical per
    /// row (slack for <=, fixed artificial for =).
    cols: Vec<Vec<(usize, F)>>,
    cost: Vec<F>,
    /// Objective magnitude divided out of `cost`, multiplied back into
    /// reported objectives. Keeps the absolute optimality tolerance
    /// meaningful for models with very large cost coefficients.
    cost_scale: F,
    lower: Vec<F>,
    upper: Vec<F>,
    rhs: Vec<F>,
    basis: Vec<usize>,
    state: Vec<VarState>,
    x: Vec<F>,
    lu: Option<LuFactors<F>>,
    etas: Vec<Eta<F>>,
    /// Devex reference weights, one per column.
    devex: Vec<F>,
    /// Flat copy of `cols` for the cache-bound pricing loops.
    csc_ptr: Vec<usize>,
    csc_idx: Vec<usize>,
    csc_val: Vec<F>,
    /// Row-major copy for the sparse pivot-row pass.
    csr_ptr: Vec<usize>,
    csr_idx: Vec<usize>,
    csr_val: Vec<F>,
    csc_dirty: bool,
    /// Scratch: per-column accumulator and touch list for the pivot row.
    arj_acc: Vec<F>,
    arj_touched: Vec<usize>,
    /// Cached phase-2 reduced costs, updated incrementally between
    /// refactorizations.
    dvec: Vec<F>,
    d_valid: bool,
    pub iteration_cap: u64,
    iterations: u64,
    debug: bool,
    timers: [f64; 7],
    stat_alpha_nnz: u64,
    stat_rho_nnz: u64,
    stat_pivots: u64,
}

const TIMER_NAMES: [&str; 7] =
    ["infeas", "btran", "price", "ftran", "ratio", "devex", "refactor"];

impl<F: Scalar> SimplexSolver<F> {
    pub fn new(model: &LinearModel<F>) -> Result<Self> {
        model.validate()?;
        let m = model.num_rows();
        let nstruct = model.num_vars();
        let mut cols: Vec<Vec<(usize, F)>> = vec![Vec::new(); nstruct];
        for (i, row) in model.rows.iter().enumerate() {
            for &(j, a) in &row.coeffs {
                cols[j].push((i, a));
            }
        }
        let mut cost = model.objective.clone();
        let mut lower: Vec<F> = model.bounds.iter().map(|b| b.0).collect();
        let mut upper: Vec<F> = model.bounds.iter().map(|b| b.1).collect();
        for (j, (&lo, &hi)) in lower.iter().zip(&upper).enumerate() {
            if lo.is_infinite() && hi.is_infinite() {
                return Err(Error::Solver(format!("variable {j} is free on both sides")));
            }
        }
        let mut basis = Vec::with_capacity(m);
        for (i, row) in model.rows.iter().enumerate() {
            let logical = cols.len();
            cols.push(vec![(i, F::one())]);
            cost.push(F::zero());
            match row.relation {
                Relation::Le => {
                    lower.push(F::zero());
                    upper.push(F::infinity());
                }
                Relation::Eq => {
                    lower.push(F::zero());
                    upper.push(F::zero());
                }
            }
            basis.push(logical);
        }
        let mut cost_scale = F::zero();
        for &c in &cost {
            cost_scale = cost_scale.max(c.abs());
        }
        if cost_scale <= F::zero() {
            cost_scale = F::one();
        }
        for c in &mut cost {
            *c = *c / cost_scale;
        }
        let n = cols.len();
        let mut state = vec![VarState::Basic; n];
        let mut x = vec![F::zero(); n];
        for j in 0..nstruct {
            if lower[j].is_finite() {
                state[j] = VarState::AtLower;
                x[j] = lower[j];
            } else {
                state[j] = VarState::AtUpper;
                x[j] = upper[j];
            }
        }
        let devex = vec![F::one(); n];
        Ok(SimplexSolver {
            m,
            nstruct,
            cols,
            cost,
            cost_scale,
            lower,
            upper,
            rhs: model.rows.iter().map(|r| r.rhs).collect(),
            basis,
            state,
            x,
            lu: None,
            etas: Vec::new(),
            devex,
            csc_ptr: Vec::new(),
            csc_idx: Vec::new(),
            csc_val: Vec::new(),
            csr_ptr: Vec::new(),
            csr_idx: Vec::new(),
            csr_val: Vec::new(),
            csc_dirty: true,
            arj_acc: Vec::new(),
            arj_touched: Vec::new(),
            dvec: Vec::new(),
            d_valid: false,
            iteration_cap: 10_000_000,
            iterations: 0,
            debug: std::env::var_os("CURVCOMPLEX_LP_DEBUG").is_some(),
            timers: [0.0; 7],
            stat_alpha_nnz: 0,
            stat_rho_nnz: 0,
            stat_pivots: 0,
        })
    }

    /// Crash start: moves the given nonbasic structural variables onto their
    /// upper bound before the first solve. Infeasibility this introduces in
    /// the logical basis is repaired by phase 1, which is far cheaper than
    /// pivoting the whole way from the all-lower point.
    pub fn warm_start_at_upper(&mut self, vars: &[usize]) {
        for &j in vars {
            assert!(j < self.nstruct);
            if self.state[j] != VarState::Basic && self.upper[j].is_finite() {
                self.state[j] = VarState::AtUpper;
                self.x[j] = self.upper[j];
            }
        }
        self.lu = None;
    }

    /// Tightens or relaxes a variable's bounds; the next solve warm-starts.
    pub fn set_var_bounds(&mut self, j: usize, lo: F, hi: F) {
        assert!(j < self.nstruct && lo <= hi);
        self.lower[j] = lo;
        self.upper[j] = hi;
        if self.state[j] != VarState::Basic {
            // A nonbasic variable must sit exactly on a bound: snap to the
            // nearer one. The basic values are rebuilt on refactorization.
            let v = self.x[j].max(lo).min(hi);
            if hi.is_infinite() || (v - lo <= hi - v && lo.is_finite()) {
                self.x[j] = lo;
                self.state[j] = VarState::AtLower;
            } else {
                self.x[j] = hi;
                self.state[j] = VarState::AtUpper;
            }
        }
        self.lu = None;
    }

    /// Appends a constraint row; its logical variable joins the basis, so
    /// the next solve warm-starts from the extended basis.
    pub fn append_row(&mut self, row: &Row<F>) {
        let i = self.m;
        self.m += 1;
        for &(j, a) in &row.coeffs {
            self.cols[j].push((i, a));
        }
        let logical = self.cols.len();
        self.cols.push(vec![(i, F::one())]);
        self.cost.push(F::zero());
        match row.relation {
            Relation::Le => {
                self.lower.push(F::zero());
                self.upper.push(F::infinity());
            }
            Relation::Eq => {
                self.lower.push(F::zero());
                self.upper.push(F::zero());
            }
        }
        self.rhs.push(row.rhs);
        self.basis.push(logical);
        self.state.push(VarState::Basic);
        self.x.push(F::zero());
        self.devex.push(F::one());
        self.csc_dirty = true;
        self.d_valid = false;
        self.lu = None;
    }

    pub fn iterations(&self) -> u64 {
        self.iterations
    }

    fn build_csc(&mut self) {
        self.csc_ptr.clear();
        self.csc_idx.clear();
        self.csc_val.clear();
        self.csc_ptr.push(0);
        for col in &self.cols {
            for &(i, a) in col {
                self.csc_idx.push(i);
                self.csc_val.push(a);
            }
            self.csc_ptr.push(self.csc_idx.len());
        }
        let nnz = self.csc_idx.len();
        self.csr_ptr.clear();
        self.csr_ptr.resize(self.m + 1, 0);
        for &i in &self.csc_idx {
            self.csr_ptr[i + 1] += 1;
        }
        for i in 0..self.m {
            self.csr_ptr[i + 1] += self.csr_ptr[i];
        }
        self.csr_idx.resize(nnz, 0);
        self.csr_val.resize(nnz, F::zero());
        let mut next = self.csr_ptr.clone();
        for (j, col) in self.cols.iter().enumerate() {
            for &(i, a) in col {
                let t = next[i];
                next[i] += 1;
                self.csr_idx[t] = j;
                self.csr_val[t] = a;
            }
        }
        self.arj_acc = vec![F::zero(); self.cols.len()];
        self.arj_touched = Vec::with_capacity(256);
        self.csc_dirty = false;
    }

    fn tick(&mut self, slot: usize, t0: std::time::Instant) {
        if self.debug {
            self.timers[slot] += t0.elapsed().as_secs_f64();
        }
    }

    fn refactorize(&mut self) -> Result<()> {
        let t_start = std::time::Instant::now();
        self.etas.clear();
        let factors = {
            let cols = &self.cols;
            let basis = &self.basis;
            LuFactors::factor(self.m, |k| cols[basis[k]].as_slice())
        };
        let lu = match factors {
            Ok(lu) => lu,
            Err(_) => {
                // Recovery: restart from the all-logical basis, which is
                // always nonsingular (unit diagonal per row).
                for k in 0..self.m {
                    let old = self.basis[k];
                    self.state[old] = if self.lower[old].is_finite() {
                        self.x[old] = self.lower[old];
                        VarState::AtLower
                    } else {
                        self.x[old] = self.upper[old];
                        VarState::AtUpper
                    };
                    let logical = self.nstruct + k;
                    self.basis[k] = logical;
                    self.state[logical] = VarState::Basic;
                }
                let cols = &self.cols;
                let basis = &self.basis;
                LuFactors::factor(self.m, |k| cols[basis[k]].as_slice())?
            }
        };
        if std::env::var_os("CURVCOMPLEX_LP_DEBUG").is_some() {
            eprintln!(
                "refactor m={} lu_nnz={} iter={}",
                self.m,
                lu.nnz(),
                self.iterations
            );
        }
        // Recompute the basic values from the nonbasic ones.
        let mut b = self.rhs.clone();
        for (j, col) in self.cols.iter().enumerate() {
            if self.state[j] != VarState::Basic && self.x[j] != F::zero() {
                for &(i, a) in col {
                    b[i] = b[i] - a * self.x[j];
                }
            }
        }
        lu.ftran(&mut b);
        for k in 0..self.m {
            self.x[self.basis[k]] = b[k];
        }
        self.lu = Some(lu);
        self.d_valid = false;
        self.tick(6, t_start);
        Ok(())
    }

    /// Rebuilds the cached reduced costs from dual values `y`.
    fn recompute_d(&mut self, y: &[F], phase1: bool) {
        let n = self.cols.len();
        self.dvec.resize(n, F::zero());
        for j in 0..n {
            let mut d = if phase1 { F::zero() } else { self.cost[j] };
            for t in self.csc_ptr[j]..self.csc_ptr[j + 1] {
                d = d - self.csc_val[t] * y[self.csc_idx[t]];
            }
            self.dvec[j] = d;
        }
    }

    fn ftran_col(&self, j: usize) -> Vec<F> {
        let mut w = vec![F::zero(); self.m];
        for &(i, a) in &self.cols[j] {
            w[i] = a;
        }
        self.lu.as_ref().unwrap().ftran(&mut w);
        for eta in &self.etas {
            eta.apply_ftran(&mut w);
        }
        w
    }

    fn btran_vec(&self, mut w: Vec<F>) -> Vec<F> {
        for eta in self.etas.iter().rev() {
            eta.apply_btran(&mut w);
        }
        self.lu.as_ref().unwrap().btran(&mut w);
        w
    }

    /// Pivot-row pass done before the basis swap of entering `j_in` against
    /// basis position `k_out`: propagates the Devex weights and, in phase 2,
    /// the cached reduced costs.
    fn update_pivot_row(&mut self, j_in: usize, k_out: usize, alpha: &[F], track_d: bool) {
        let a_rq = alpha[k_out];
        let wq = self.devex[j_in].max(F::one());
        let step = self.dvec[j_in] / a_rq;
        let mut e = vec![F::zero(); self.m];
        e[k_out] = F::one();
        let rho = self.btran_vec(e);
        // Scatter the pivot row of B^-1 A through the row-major copy; only
        // the columns it actually touches need weight or cost updates.
        self.arj_touched.clear();
        if self.debug {
            self.stat_rho_nnz += rho.iter().filter(|v| **v != F::zero()).count() as u64;
        }
        for (i, &r) in rho.iter().enumerate() {
            if r == F::zero() {
                continue;
            }
            for t in self.csr_ptr[i]..self.csr_ptr[i + 1] {
                let j = self.csr_idx[t];
                if self.arj_acc[j] == F::zero() {
                    self.arj_touched.push(j);
                }
                self.arj_acc[j] = self.arj_acc[j] + self.csr_val[t] * r;
            }
        }
        let mut max_w = F::one();
        for idx in 0..self.arj_touched.len() {
            let j = self.arj_touched[idx];
            let arj = self.arj_acc[j];
            self.arj_acc[j] = F::zero();
            if arj == F::zero()
                || self.state[j] == VarState::Basic
                || self.lower[j] == self.upper[j]
            {
                continue;
            }
            let ratio = arj / a_rq;
            let cand = ratio * ratio * wq;
            if cand > self.devex[j] {
                self.devex[j] = cand;
            }
            max_w = max_w.max(self.devex[j]);
            if track_d {
                self.dvec[j] = self.dvec[j] - step * arj;
            }
        }
        let j_out = self.basis[k_out];
        self.devex[j_out] = (wq / (a_rq * a_rq)).max(F::one());
        max_w = max_w.max(self.devex[j_out]);
        if track_d {
            // The leaver's column maps to the unit vector e_r, so its new
            // reduced cost is just the negated pivot step.
            self.dvec[j_out] = -step;
        }
        // Reference framework reset once the weights drift too far.
        if max_w > crate::scalar::fl(1e8) {
            for w in &mut self.devex {
                *w = F::one();
            }
        }
    }

    /// Total infeasibility of the basic variables and the phase-1 gradient.
    fn infeasibility(&self) -> (F, Vec<F>) {
        let tol = F::feas_tol();
        let mut total = F::zero();
        let mut grad = vec![F::zero(); self.m];
        for k in 0..self.m {
            let j = self.basis[k];
            let v = self.x[j];
            if v < self.lower[j] - tol {
                total = total + (self.lower[j] - v);
                grad[k] = -F::one();
            } else if v > self.upper[j] + tol {
                total = total + (v - self.upper[j]);
                grad[k] = F::one();
            }
        }
        (total, grad)
    }

    /// Snaps every nonbasic variable onto its (possibly just changed) bound.
    fn snap_nonbasic(&mut self) {
        for j in 0..self.cols.len() {
            match self.state[j] {
                VarState::Basic => {}
                VarState::AtLower => {
                    if self.lower[j].is_finite() {
                        self.x[j] = self.lower[j];
                    } else {
                        self.state[j] = VarState::AtUpper;
                        self.x[j] = self.upper[j];
                    }
                }
                VarState::AtUpper => {
                    if self.upper[j].is_finite() {
                        self.x[j] = self.upper[j];
                    } else {
                        self.state[j] = VarState::AtLower;
                        self.x[j] = self.lower[j];
                    }
                }
            }
        }
    }

    pub fn solve(&mut self) -> Result<LpSolution<F>> {
        if self.m == 0 {
            return self.solve_boxed();
        }
        if self.csc_dirty {
            self.build_csc();
        }
        // The combinatorial models are massively degenerate (every vertex
        // pins thousands of variables to identical bounds), which stalls the
        // ratio test. A first pass on deterministically jittered bounds
        // breaks the ties; a second pass on the true bounds warm-starts from
        // its basis and restores the exact optimum.
        let saved_lower = self.lower.clone();
        let saved_upper = self.upper.clone();
        let eps = F::feas_tol() * crate::scalar::fl(1e5);
        let jitter = |seed: usize| -> F {
            let phi = (seed as f64 * 0.618_033_988_749_894_9).fract();
            eps * crate::scalar::fl(1.0 + phi)
        };
        for j in 0..self.cols.len() {
            // Fixed variables (equality logicals among them) stay fixed, or
            // they would churn through worthless bound flips.
            if self.lower[j] == self.upper[j] {
                continue;
            }
            if self.lower[j].is_finite() {
                self.lower[j] = self.lower[j] - jitter(2 * j);
            }
            if self.upper[j].is_finite() {
                self.upper[j] = self.upper[j] + jitter(2 * j + 1);
            }
        }
        self.snap_nonbasic();
        self.lu = None;
        let first = self.iterate()?;
        self.lower = saved_lower;
        self.upper = saved_upper;
        self.snap_nonbasic();
        self.lu = None;
        if first.status == SolveStatus::IterationLimit {
            return Ok(first);
        }
        let out = self.iterate();
        if self.debug {
            let line: Vec<String> = TIMER_NAMES
                .iter()
                .zip(&self.timers)
                .map(|(n, t)| format!("{n}={t:.2}s"))
                .collect();
            eprintln!(
                "timers {} iters={} avg_alpha_nnz={} avg_rho_nnz={}",
                line.join(" "),
                self.iterations,
                self.stat_alpha_nnz / self.stat_pivots.max(1),
                self.stat_rho_nnz / self.stat_pivots.max(1)
            );
        }
        out
    }

    /// Box-constrained problem: each variable at its cheaper bound.
    fn solve_boxed(&mut self) -> Result<LpSolution<F>> {
        for j in 0..self.nstruct {
            let c = self.cost[j];
            if c < F::zero() {
                if self.upper[j].is_infinite() {
                    return Ok(self.solution(SolveStatus::Unbounded));
                }
                self.x[j] = self.upper[j];
                self.state[j] = VarState::AtUpper;
            } else if c > F::zero() {
                if self.lower[j].is_infinite() {
                    return Ok(self.solution(SolveStatus::Unbounded));
                }
                self.x[j] = self.lower[j];
                self.state[j] = VarState::AtLower;
            }
        }
        Ok(self.solution(SolveStatus::Optimal))
    }

    /// Runs the pivot loop to optimality on the current bounds.
    fn iterate(&mut self) -> Result<LpSolution<F>> {
        if self.lu.is_none() {
            self.refactorize()?;
        }
        let opt_tol = F::opt_tol();
        let mut degenerate_streak: u64 = 0;
        loop {
            self.iterations += 1;
            if self.iterations > self.iteration_cap {
                return Ok(self.solution(SolveStatus::IterationLimit));
            }
            if self.etas.len() >= REFACTOR_INTERVAL {
                self.refactorize()?;
            }
            let bland = degenerate_streak > DEGENERATE_STREAK_LIMIT;

            let t0 = std::time::Instant::now();
            let (infeas, grad) = self.infeasibility();
            self.tick(0, t0);
            let phase1 = infeas > F::feas_tol();
            let t0 = std::time::Instant::now();
            if phase1 {
                // The phase-1 gradient moves with the basic values, so its
                // reduced costs cannot be cached across pivots.
                let y = self.btran_vec(grad);
                self.recompute_d(&y, true);
                self.d_valid = false;
            } else if !self.d_valid {
                let cb: Vec<F> = self.basis.iter().map(|&j| self.cost[j]).collect();
                let y = self.btran_vec(cb);
                self.recompute_d(&y, false);
                self.d_valid = true;
            }
            self.tick(1, t0);

            // Pricing: Devex-weighted reduced cost (or Bland: lowest index).
            let t0 = std::time::Instant::now();
            let mut entering = None;
            let mut best = F::zero();
            for j in 0..self.cols.len() {
                if self.state[j] == VarState::Basic || self.lower[j] == self.upper[j] {
                    continue;
                }
                let d = self.dvec[j];
                let attract = match self.state[j] {
                    VarState::AtLower => -d,
                    VarState::AtUpper => d,
                    VarState::Basic => unreachable!(),
                };
                if attract <= opt_tol {
                    continue;
                }
                if bland {
                    entering = Some((j, d));
                    break;
                }
                let score = attract * attract / self.devex[j];
                if score > best {
                    entering = Some((j, d));
                    best = score;
                }
            }
            self.tick(2, t0);
            let Some((j_in, _)) = entering else {
                return Ok(if phase1 {
                    self.solution(SolveStatus::Infeasible)
                } else {
                    self.solution(SolveStatus::Optimal)
                });
            };
            let sigma = if self.state[j_in] == VarState::AtLower { F::one() } else { -F::one() };
            let t0 = std::time::Instant::now();
            let alpha = self.ftran_col(j_in);
            let alive: Vec<usize> = (0..self.m).filter(|&k| alpha[k] != F::zero()).collect();
            self.stat_alpha_nnz += alive.len() as u64;
            self.stat_pivots += 1;
            self.tick(3, t0);
            let t0 = std::time::Instant::now();

            // Ratio test. rho_k is the rate of change of the k-th basic
            // variable per unit step of the entering variable.
            let flip_dist = self.upper[j_in] - self.lower[j_in];
            let mut t_best = flip_dist;
            let mut leaving: Option<(usize, VarState)> = None;
            let mut leave_alpha = F::zero();
            let floor = F::pivot_floor();
            for &k in &alive {
                if alpha[k].abs() <= floor {
                    continue;
                }
                let rho = -sigma * alpha[k];
                let jb = self.basis[k];
                let v = self.x[jb];
                let (lo, hi) = (self.lower[jb], self.upper[jb]);
                let hit = if phase1 && v < lo - F::feas_tol() {
                    // Infeasible below: blocks only when climbing back to lo.
                    (rho > F::zero()).then(|| ((lo - v) / rho, VarState::AtLower))
                } else if phase1 && v > hi + F::feas_tol() {
                    (rho < F::zero()).then(|| ((hi - v) / rho, VarState::AtUpper))
                } else if rho > F::zero() {
                    hi.is_finite().then(|| (((hi - v) / rho).max(F::zero()), VarState::AtUpper))
                } else {
                    lo.is_finite().then(|| (((lo - v) / rho).max(F::zero()), VarState::AtLower))
                };
                if let Some((t, bound)) = hit {
                    let better = match leaving {
                        None => t < t_best,
                        Some((kb, _)) => {
                            t < t_best - F::feas_tol()
                                || (t < t_best + F::feas_tol()
                                    && if bland {
                                        self.basis[k] < self.basis[kb]
                                    } else {
                                        alpha[k].abs() > leave_alpha.abs()
                                    })
                        }
                    };
                    if better {
                        t_best = t.max(F::zero());
                        leaving = Some((k, bound));
                        leave_alpha = alpha[k];
                    }
                }
            }

            self.tick(4, t0);
            match leaving {
                None if t_best.is_infinite() => {
                    if phase1 {
                        // A strictly improving unblocked phase-1 ray cannot
                        // exist; treat as numerical failure.
                        return Err(Error::Solver("unbounded phase-1 ray".into()));
                    }
                    return Ok(self.solution(SolveStatus::Unbounded));
                }
                None => {
                    // Bound flip: the entering variable crosses to its
                    // opposite bound without a basis change.
                    let t = t_best;
                    for &k in &alive {
                        let jb = self.basis[k];
                        self.x[jb] = self.x[jb] - sigma * t * alpha[k];
                    }
                    if self.state[j_in] == VarState::AtLower {
                        self.x[j_in] = self.upper[j_in];
                        self.state[j_in] = VarState::AtUpper;
                    } else {
                        self.x[j_in] = self.lower[j_in];
                        self.state[j_in] = VarState::AtLower;
                    }
                    degenerate_streak = if t.abs() <= F::feas_tol() { degenerate_streak + 1 } else { 0 };
                }
                Some((k_out, bound)) => {
                    if bland {
                        self.d_valid = false;
                    } else {
                        let t0 = std::time::Instant::now();
                        self.update_pivot_row(j_in, k_out, &alpha, !phase1);
                        self.tick(5, t0);
                    }
                    let t = t_best;
                    for &k in &alive {
                        let jb = self.basis[k];
                        self.x[jb] = self.x[jb] - sigma * t * alpha[k];
                    }
                    self.x[j_in] = self.x[j_in] + sigma * t;
                    let j_out = self.basis[k_out];
                    // Pin the leaving variable exactly onto its bound.
                    self.x[j_out] = match bound {
                        VarState::AtLower => self.lower[j_out],
                        VarState::AtUpper => self.upper[j_out],
                        VarState::Basic => unreachable!(),
                    };
                    self.state[j_out] = bound;
                    self.basis[k_out] = j_in;
                    self.state[j_in] = VarState::Basic;
                    self.etas.push(Eta::from_sparse(k_out, &alpha, &alive));
                    degenerate_streak = if t.abs() <= F::feas_tol() { degenerate_streak + 1 } else { 0 };
                }
            }
        }
    }

    fn solution(&self, status: SolveStatus) -> LpSolution<F> {
        let x: Vec<F> = self.x[..self.nstruct].to_vec();
        let objective = self
            .cost[..self.nstruct]
            .iter()
            .zip(&x)
            .map(|(&c, &v)| c * v)
            .sum::<F>()
            * self.cost_scale;
        let mut row_violation = F::zero();
        let mut activity = vec![F::zero(); self.m];
        for (j, col) in self.cols.iter().enumerate() {
            // Logical columns carry the slack values; exclude them so the
            // violation is measured against the original rows.
            if j >= self.nstruct {
                continue;
            }
            for &(i, a) in col {
                activity[i] = activity[i] + a * self.x[j];
            }
        }
        for i in 0..self.m {
            let slack_bounds = (self.lower[self.nstruct + i], self.upper[self.nstruct + i]);
            let v = activity[i] - self.rhs[i];
            let viol = if slack_bounds.1.is_infinite() {
                v.max(F::zero()) // <= row
            } else {
                v.abs() // = row
            };
            row_violation = row_violation.max(viol);
        }
        let mut bound_violation = F::zero();
        for j in 0..self.nstruct {
            let v = self.x[j];
            bound_violation = bound_violation
                .max(self.lower[j] - v)
                .max(v - self.upper[j]);
        }
        LpSolution {
            status,
            x,
            objective,
            iterations: self.iterations,
            max_row_violation: row_violation,
            max_bound_violation: bound_violation.max(F::zero()),
        }
    }
}

/// One-shot cold solve of a model's LP relaxation.
pub fn solve_model<F: Scalar>(model: &LinearModel<F>) -> Result<LpSolution<F>> {
    SimplexSolver::new(model)?.solve()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn status_of(m: &LinearModel) -> (SolveStatus, f64, Vec<f64>) {
        let s = solve_model(m).unwrap();
        (s.status, s.objective, s.x)
    }

    #[test]
    fn simple_inequality_lp() {
        // min -x - 2y s.t. x + y <= 1, 0 <= x,y <= 1: optimum at (0,1).
        let mut m = LinearModel::new();
        let x = m.add_var("x", -1.0, 0.0, 1.0, false);
        let y = m.add_var("y", -2.0, 0.0, 1.0, false);
        m.add_row("r", Relation::Le, vec![(x, 1.0), (y, 1.0)], 1.0);
        let (st, obj, sol) = status_of(&m);
        assert_eq!(st, SolveStatus::Optimal);
        assert!((obj + 2.0).abs() < 1e-9);
        assert!(sol[x].abs() < 1e-9 && (sol[y] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn equality_lp() {
        // min x s.t. x + y = 1, x,y in [0,1]: optimum x = 0, y = 1.
        let mut m = LinearModel::new();
        let x = m.add_var("x", 1.0, 0.0, 1.0, false);
        let y = m.add_var("y", 0.0, 0.0, 1.0, false);
        m.add_row("r", Relation::Eq, vec![(x, 1.0), (y, 1.0)], 1.0);
        let (st, obj, sol) = status_of(&m);
        assert_eq!(st, SolveStatus::Optimal);
        assert!(obj.abs() < 1e-9);
        assert!((sol[y] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn infeasible_lp() {
        // 0 = 1 has no solution.
        let mut m = LinearModel::new();
        let _ = m.add_var("x", 0.0, 0.0, 1.0, false);
        m.add_row("bad", Relation::Eq, vec![], 1.0);
        let (st, _, _) = status_of(&m);
        assert_eq!(st, SolveStatus::Infeasible);
    }

    #[test]
    fn infeasible_bounds_through_rows() {
        // x <= 1 with x fixed to 3 by bounds is caught by phase 1... the
        // interesting case is conflicting rows: x <= 1 and x = 3.
        let mut m = LinearModel::new();
        let x = m.add_var("x", 0.0, 0.0, 10.0, false);
        m.add_row("cap", Relation::Le, vec![(x, 1.0)], 1.0);
        m.add_row("fix", Relation::Eq, vec![(x, 1.0)], 3.0);
        let (st, _, _) = status_of(&m);
        assert_eq!(st, SolveStatus::Infeasible);
    }

    #[test]
    fn unbounded_lp() {
        // min -x with x >= 0 unconstrained above.
        let mut m = LinearModel::new();
        let x = m.add_var("x", -1.0, 0.0, f64::INFINITY, false);
        m.add_row("r", Relation::Le, vec![(x, -1.0)], 0.0);
        let (st, _, _) = status_of(&m);
        assert_eq!(st, SolveStatus::Unbounded);
    }

    #[test]
    fn rowless_model_uses_bounds() {
        let mut m = LinearModel::new();
        let x = m.add_var("x", -2.0, 0.0, 5.0, false);
        let y = m.add_var("y", 3.0, 1.0, 4.0, false);
        let (st, obj, sol) = status_of(&m);
        assert_eq!(st, SolveStatus::Optimal);
        assert!((sol[x] - 5.0).abs() < 1e-12 && (sol[y] - 1.0).abs() < 1e-12);
        assert!((obj + 7.0).abs() < 1e-12);
    }

    #[test]
    fn beale_cycling_example_terminates() {
        // Beale's classic degenerate LP that cycles under naive pivoting.
        let mut m = LinearModel::new();
        let inf = f64::INFINITY;
        let x1 = m.add_var("x1", -0.75, 0.0, inf, false);
        let x2 = m.add_var("x2", 150.0, 0.0, inf, false);
        let x3 = m.add_var("x3", -0.02, 0.0, inf, false);
        let x4 = m.add_var("x4", 6.0, 0.0, inf, false);
        m.add_row("r1", Relation::Le, vec![(x1, 0.25), (x2, -60.0), (x3, -0.04), (x4, 9.0)], 0.0);
        m.add_row("r2", Relation::Le, vec![(x1, 0.5), (x2, -90.0), (x3, -0.02), (x4, 3.0)], 0.0);
        m.add_row("r3", Relation::Le, vec![(x3, 1.0)], 1.0);
        let (st, obj, _) = status_of(&m);
        assert_eq!(st, SolveStatus::Optimal);
        assert!((obj + 0.05).abs() < 1e-9, "objective {obj}");
    }

    #[test]
    fn iteration_cap_reports_limit() {
        let mut m: LinearModel = LinearModel::new();
        let x = m.add_var("x", -1.0, 0.0, 1.0, false);
        let y = m.add_var("y", -2.0, 0.0, 1.0, false);
        m.add_row("r", Relation::Le, vec![(x, 1.0), (y, 1.0)], 1.0);
        let mut s = SimplexSolver::new(&m).unwrap();
        s.iteration_cap = 0;
        assert_eq!(s.solve().unwrap().status, SolveStatus::IterationLimit);
    }

    /// Brute-force LP oracle: enumerates all bases (subsets of columns
    /// including logicals) and nonbasic bound assignments, solving each
    /// square system densely.
    fn oracle(m: &LinearModel) -> Option<f64> {
        let nrows = m.num_rows();
        let nstruct = m.num_vars();
        let mut cols: Vec<Vec<f64>> = vec![vec![0.0; nrows]; nstruct];
        let mut lower: Vec<f64> = m.bounds.iter().map(|b| b.0).collect();
        let mut upper: Vec<f64> = m.bounds.iter().map(|b| b.1).collect();
        for (i, row) in m.rows.iter().enumerate() {
            for &(j, a) in &row.coeffs {
                cols[j][i] = a;
            }
        }
        for (i, row) in m.rows.iter().enumerate() {
            let mut col = vec![0.0; nrows];
            col[i] = 1.0;
            cols.push(col);
            match row.relation {
                Relation::Le => {
                    lower.push(0.0);
                    upper.push(1e6); // effectively unbounded for the test data
                }
                Relation::Eq => {
                    lower.push(0.0);
                    upper.push(0.0);
                }
            }
        }
        let n = cols.len();
        let mut best: Option<f64> = None;
        // Choose nrows basic columns.
        let mut choose = vec![0usize; nrows];
        fn rec(
            start: usize,
            slot: usize,
            n: usize,
            choose: &mut Vec<usize>,
            visit: &mut impl FnMut(&[usize]),
        ) {
            if slot == choose.len() {
                visit(choose);
                return;
            }
            for j in start..n {
                choose[slot] = j;
                rec(j + 1, slot + 1, n, choose, visit);
            }
        }
        let rows_rhs: Vec<f64> = m.rows.iter().map(|r| r.rhs).collect();
        let objective = |x: &[f64]| -> f64 {
            (0..nstruct).map(|j| m.objective[j] * x[j]).sum()
        };
        let mut visit = |basic: &[usize]| {
            let nonbasic: Vec<usize> = (0..n).filter(|j| !basic.contains(j)).collect();
            for mask in 0..(1u32 << nonbasic.len()) {
                let mut x = vec![0.0; n];
                let mut ok = true;
                for (b, &j) in nonbasic.iter().enumerate() {
                    let v = if mask >> b & 1 == 0 { lower[j] } else { upper[j] };
                    if !v.is_finite() {
                        ok = false;
                        break;
                    }
                    x[j] = v;
                }
                if !ok {
                    continue;
                }
                // Solve the dense square system for the basic values.
                let mut a = vec![vec![0.0; basic.len() + 1]; nrows];
                for (c, &j) in basic.iter().enumerate() {
                    for i in 0..nrows {
                        a[i][c] = cols[j][i];
                    }
                }
                for i in 0..nrows {
                    let mut rhs = rows_rhs[i];
                    for &j in &nonbasic {
                        rhs -= cols[j][i] * x[j];
                    }
                    a[i][basic.len()] = rhs;
                }
                if !gauss(&mut a) {
                    continue;
                }
                for (c, &j) in basic.iter().enumerate() {
                    x[j] = a[c][basic.len()];
                }
                let feasible = (0..n).all(|j| {
                    x[j] >= lower[j] - 1e-7 && x[j] <= upper[j] + 1e-7
                });
                if feasible {
                    let obj = objective(&x);
                    if best.is_none() || obj < best.unwrap() {
                        best = Some(obj);
                    }
                }
            }
        };
        rec(0, 0, n, &mut choose, &mut visit);
        best
    }

    /// In-place Gaussian elimination on [A | b]; false if singular.
    fn gauss(a: &mut [Vec<f64>]) -> bool {
        let n = a.len();
        for c in 0..n {
            let p = (c..n).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs())).unwrap();
            if a[p][c].abs() < 1e-9 {
                return false;
            }
            a.swap(c, p);
            for r in 0..n {
                if r != c && a[r][c] != 0.0 {
                    let f = a[r][c] / a[c][c];
                    for k in c..=n {
                        a[r][k] -= f * a[c][k];
                    }
                }
            }
        }
        for c in 0..n {
            a[c][n] /= a[c][c];
        }
        true
    }

    #[test]
    fn random_lps_match_vertex_enumeration() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
        let mut solved = 0;
        for _ in 0..30 {
            let mut m = LinearModel::new();
            let nv = 4;
            for j in 0..nv {
                let c = rng.gen_range(-3i32..=3) as f64;
                m.add_var(format!("x{j}"), c, 0.0, rng.gen_range(1..=3) as f64, false);
            }
            for i in 0..2 {
                let coeffs: Vec<(usize, f64)> = (0..nv)
                    .filter_map(|j| {
                        let a = rng.gen_range(-2i32..=2);
                        (a != 0).then(|| (j, a as f64))
                    })
                    .collect();
                let rel = if rng.gen_bool(0.5) { Relation::Le } else { Relation::Eq };
                m.add_row(format!("r{i}"), rel, coeffs, rng.gen_range(-2i32..=4) as f64);
            }
            let got = solve_model(&m).unwrap();
            let want = oracle(&m);
            match want {
                None => assert_eq!(got.status, SolveStatus::Infeasible, "model {m:?}"),
                Some(obj) => {
                    assert_eq!(got.status, SolveStatus::Optimal, "model {m:?}");
                    assert!(
                        (got.objective - obj).abs() < 1e-6,
                        "objective {} vs oracle {obj} for {m:?}",
                        got.objective
                    );
                    assert!(got.max_row_violation < 1e-7);
                    assert!(got.max_bound_violation < 1e-7);
                    solved += 1;
                }
            }
        }
        assert!(solved >= 10, "too few feasible random instances ({solved})");
    }

    #[test]
    fn warm_start_after_bound_change_matches_cold_solve() {
        let mut m: LinearModel = LinearModel::new();
        let x = m.add_var("x", -1.0, 0.0, 1.0, false);
        let y = m.add_var("y", -2.0, 0.0, 1.0, false);
        let z = m.add_var("z", 1.0, 0.0, 1.0, false);
        m.add_row("r1", Relation::Le, vec![(x, 1.0), (y, 1.0), (z, 1.0)], 1.5);
        m.add_row("r2", Relation::Eq, vec![(x, 1.0), (z, -1.0)], 0.0);
        let mut s = SimplexSolver::new(&m).unwrap();
        let first = s.solve().unwrap();
        assert_eq!(first.status, SolveStatus::Optimal);
        // Fix y to 0 and re-solve warm; compare with a cold solve.
        s.set_var_bounds(y, 0.0, 0.0);
        let warm = s.solve().unwrap();
        m.bounds[y] = (0.0, 0.0);
        let cold = solve_model(&m).unwrap();
        assert_eq!(warm.status, SolveStatus::Optimal);
        assert!((warm.objective - cold.objective).abs() < 1e-9);
    }

    #[test]
    fn warm_start_after_appended_row_matches_cold_solve() {
        let mut m: LinearModel = LinearModel::new();
        let x = m.add_var("x", -1.0, 0.0, 1.0, false);
        let y = m.add_var("y", -1.0, 0.0, 1.0, false);
        m.add_row("r1", Relation::Le, vec![(x, 1.0), (y, 1.0)], 2.0);
        let mut s = SimplexSolver::new(&m).unwrap();
        assert_eq!(s.solve().unwrap().status, SolveStatus::Optimal);
        let cut = Row { coeffs: vec![(x, 1.0), (y, 1.0)], relation: Relation::Le, rhs: 1.0 };
        s.append_row(&cut);
        let warm = s.solve().unwrap();
        m.add_row("cut", Relation::Le, cut.coeffs.clone(), cut.rhs);
        let cold = solve_model(&m).unwrap();
        assert_eq!(warm.status, SolveStatus::Optimal);
        assert!((warm.objective - cold.objective).abs() < 1e-9);
        assert!((warm.objective + 1.0).abs() < 1e-9);
    }

    #[test]
    fn solves_are_deterministic() {
        let mut m: LinearModel = LinearModel::new();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for j in 0..6 {
            m.add_var(format!("x{j}"), rng.gen::<f64>() - 0.5, 0.0, 1.0, false);
        }
        for i in 0..4 {
            let coeffs = (0..6).map(|j| (j, rng.gen_range(-2i32..=2) as f64)).collect();
            m.add_row(format!("r{i}"), Relation::Le, coeffs, 1.0);
        }
        let a = solve_model(&m).unwrap();
        let b = solve_model(&m).unwrap();
        assert_eq!(a.status, b.status);
        assert_eq!(a.x, b.x);
        assert_eq!(a.objective.to_bits(), b.objective.to_bits());
    }
}
