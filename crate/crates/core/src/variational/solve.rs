use rayon::prelude::*;
use serde::Serialize;

use crate::calculus::DiffStencil;
use crate::expr::Expr;
use crate::fuzzy::Bound;

use super::extremal::NodeViolation;
use super::residual::level_residual;
use super::{EngineError, Extremal, LagrangianSpec, LevelPath, VariationalProblem};

/// Knobs for the per-level Gauss-Newton iteration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolveOptions {
    pub max_iter: usize,
    /// Consistency threshold is this factor times `1 + max |L|`.
    pub consistency_factor: f64,
    /// Stop once the update is below this relative to the iterate.
    pub step_tol: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            max_iter: 100,
            consistency_factor: 1e-6,
            step_tol: 1e-12,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LevelDiagnostics {
    pub r: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Max |R| per equation over the interior nodes.
    pub residual_max: [f64; 4],
    pub consistent: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SolveDiagnostics {
    pub levels: Vec<LevelDiagnostics>,
    pub tol_consistent: f64,
    /// Every level converged.
    pub converged: bool,
    /// Every level satisfies all four equations within `tol_consistent`;
    /// otherwise the result is only a least-squares fit.
    pub consistent: bool,
    pub fuzzy_violation: Option<NodeViolation>,
}

impl SolveDiagnostics {
    pub fn max_residual(&self) -> f64 {
        self.levels
            .iter()
            .flat_map(|l| l.residual_max)
            .fold(0.0, f64::max)
    }
}

#[derive(Clone, Debug)]
pub struct Solution {
    pub extremal: Extremal,
    pub diagnostics: SolveDiagnostics,
}

/// [`solve_extremal_with`] under default options.
pub fn solve_extremal(problem: &VariationalProblem) -> Result<Solution, EngineError> {
    solve_extremal_with(problem, &SolveOptions::default())
}

/// Solves the four Euler-Lagrange equations per level in the least-squares
/// sense, with the boundary values eliminated from the unknowns.
///
/// Starts from the linear interpolant of the boundary data and runs damped
/// Gauss-Newton with an exact (symbolic) Jacobian. Levels run in parallel.
/// For a delayed problem whose Lagrangian has no delayed arguments the
/// plain problem is solved and the history velocities are attached.
pub fn solve_extremal_with(
    problem: &VariationalProblem,
    options: &SolveOptions,
) -> Result<Solution, EngineError> {
    if problem.lagrangian().delayed() {
        return Err(EngineError::DelayedSolve);
    }
    let xs = problem.xs();
    let stencil = DiffStencil::new(xs);
    let hessian = Hessian::new(problem.lagrangian());
    let outcomes = (0..problem.grid().len())
        .into_par_iter()
        .map(|level| solve_level(problem, &stencil, &hessian, level, options))
        .collect::<Result<Vec<_>, _>>()?;

    let mut scale: f64 = 0.0;
    for (level, (path, _)) in outcomes.iter().enumerate() {
        for (i, &x) in xs.iter().enumerate() {
            for bound in Bound::BOTH {
                let v = problem
                    .lagrangian()
                    .eval(bound, &path.env(x, i))
                    .map_err(|source| EngineError::Eval {
                        level,
                        node: i,
                        x,
                        bound,
                        source,
                    })?;
                scale = scale.max(v.abs());
            }
        }
    }
    let tol_consistent = options.consistency_factor * (1.0 + scale);

    let mut levels = Vec::with_capacity(outcomes.len());
    let mut paths = Vec::with_capacity(outcomes.len());
    for ((path, stats), r) in outcomes.into_iter().zip(problem.grid().iter()) {
        let residual_max = stats.residual_max;
        levels.push(LevelDiagnostics {
            r,
            iterations: stats.iterations,
            converged: stats.converged,
            residual_max,
            consistent: residual_max.iter().all(|v| *v <= tol_consistent),
        });
        paths.push(path);
    }
    let mut extremal = Extremal::from_levels(xs.to_vec(), problem.grid().clone(), paths);
    if problem.is_delayed() {
        extremal = extremal.attach_history(problem)?;
    }
    let diagnostics = SolveDiagnostics {
        converged: levels.iter().all(|l| l.converged),
        consistent: levels.iter().all(|l| l.consistent),
        fuzzy_violation: extremal.fuzzy_violation(),
        tol_consistent,
        levels,
    };
    let solution = Solution {
        extremal,
        diagnostics,
    };
    if solution.diagnostics.converged {
        Ok(solution)
    } else {
        Err(EngineError::NonConvergence(Box::new(solution)))
    }
}

struct LevelStats {
    iterations: usize,
    converged: bool,
    residual_max: [f64; 4],
}

/// Second partials among slots 2..=5 for both bounds; `None` marks zeros.
struct Hessian {
    terms: [[[Option<Expr>; 4]; 4]; 2],
}

impl Hessian {
    fn new(l: &LagrangianSpec) -> Self {
        let terms = std::array::from_fn(|b| {
            let bound = Bound::BOTH[b];
            std::array::from_fn(|i| {
                std::array::from_fn(|j| {
                    let e = l.second_partial(bound, i + 2, j + 2);
                    (!e.is_zero()).then(|| e.clone())
                })
            })
        });
        Self { terms }
    }

    /// Nodal values, indexed `[bound][slot i - 2][slot j - 2][node]`.
    fn eval(
        &self,
        xs: &[f64],
        path: &LevelPath,
        level: usize,
    ) -> Result<[[[Option<Vec<f64>>; 4]; 4]; 2], EngineError> {
        let mut out: [[[Option<Vec<f64>>; 4]; 4]; 2] = Default::default();
        for (b, bound) in Bound::BOTH.into_iter().enumerate() {
            for i in 0..4 {
                for j in 0..4 {
                    let Some(e) = &self.terms[b][i][j] else {
                        continue;
                    };
                    let vals = xs
                        .iter()
                        .enumerate()
                        .map(|(node, &x)| {
                            e.eval(&path.env(x, node))
                                .map_err(|source| EngineError::Eval {
                                    level,
                                    node,
                                    x,
                                    bound,
                                    source,
                                })
                        })
                        .collect::<Result<Vec<_>, _>>()?;
                    out[b][i][j] = Some(vals);
                }
            }
        }
        Ok(out)
    }
}

fn solve_level(
    problem: &VariationalProblem,
    stencil: &DiffStencil,
    hessian: &Hessian,
    level: usize,
    options: &SolveOptions,
) -> Result<(LevelPath, LevelStats), EngineError> {
    let xs = problem.xs();
    let n = xs.len() - 1;
    let (a, b) = (xs[0], xs[n]);
    let (la, ua) = problem.bc_a().cut(level);
    let (lb, ub) = problem.bc_b().cut(level);
    let interp = |ya: f64, yb: f64| -> Vec<f64> {
        xs.iter()
            .map(|&x| ya + (yb - ya) * (x - a) / (b - a))
            .collect()
    };
    let mut ql = interp(la, lb);
    let mut qu = interp(ua, ub);
    ql[n] = lb;
    qu[n] = ub;

    let residual = |ql: &[f64], qu: &[f64]| -> Result<(LevelPath, Vec<f64>), EngineError> {
        let path = LevelPath::from_states(stencil, ql.to_vec(), qu.to_vec());
        let eqs = level_residual(problem.lagrangian(), xs, stencil, &path, level, None)?;
        let r = (0..n - 1)
            .flat_map(|k| (0..4).map(move |eq| (k, eq)))
            .map(|(k, eq)| eqs[eq][k])
            .collect();
        Ok((path, r))
    };
    let cost = |r: &[f64]| r.iter().map(|v| v * v).sum::<f64>();

    let (mut path, mut r) = residual(&ql, &qu)?;
    let mut current = cost(&r);
    let mut iterations = 0;
    let mut converged = false;
    while iterations < options.max_iter {
        if current == 0.0 {
            converged = true;
            break;
        }
        iterations += 1;
        let h = hessian.eval(xs, &path, level)?;
        let delta = gauss_newton_step(stencil, &h, n, &r);
        let size = delta.iter().fold(0.0_f64, |m, d| m.max(d.abs()));
        let magnitude = ql.iter().chain(&qu).fold(0.0_f64, |m, q| m.max(q.abs()));
        let mut alpha = 1.0;
        let mut accepted = false;
        while alpha >= 1.0 / 1024.0 {
            let mut tl = ql.clone();
            let mut tu = qu.clone();
            for m in 1..n {
                tl[m] += alpha * delta[2 * (m - 1)];
                tu[m] += alpha * delta[2 * (m - 1) + 1];
            }
            // out-of-domain trial points count as a failed step
            if let Ok((tp, tr)) = residual(&tl, &tu) {
                let c = cost(&tr);
                if c.is_finite() && c < current {
                    (ql, qu, path, r, current) = (tl, tu, tp, tr, c);
                    accepted = true;
                    break;
                }
            }
            alpha *= 0.5;
        }
        if alpha * size <= options.step_tol * (1.0 + magnitude) || !accepted {
            // a rejected step means no descent is left at working precision
            converged = true;
            break;
        }
    }

    let mut residual_max = [0.0_f64; 4];
    for chunk in r.chunks(4) {
        for (m, v) in residual_max.iter_mut().zip(chunk) {
            *m = m.max(v.abs());
        }
    }
    Ok((
        path,
        LevelStats {
            iterations,
            converged,
            residual_max,
        },
    ))
}

/// Band width (in unknowns) of a Jacobian row; the row touches nodes
/// `i-2..=i+2`, two unknowns each.
const BAND: usize = 12;

/// Least-squares Gauss-Newton update `min |J d + r|` via banded Givens QR.
fn gauss_newton_step(
    stencil: &DiffStencil,
    h: &[[[Option<Vec<f64>>; 4]; 4]; 2],
    n: usize,
    r: &[f64],
) -> Vec<f64> {
    let unknowns = 2 * (n - 1);
    let mut qr = BandedQr::new(unknowns, BAND);
    let get = |b: usize, i: usize, j: usize, node: usize| -> f64 {
        h[b][i - 2][j - 2].as_ref().map_or(0.0, |v| v[node])
    };
    for i in 1..n {
        for b in 0..2 {
            for (pair, (s, t)) in [(2usize, 4usize), (3, 5)].into_iter().enumerate() {
                // derivative of R_i = P_s(i) - sum_j w_ij P_t(j) w.r.t. node states
                let base = i as isize - 2;
                let mut acc = [0.0; 10];
                let mut add = |m: usize, comp: usize, v: f64| {
                    let slot = (m as isize - base) as usize;
                    acc[2 * slot + comp] += v;
                };
                for (comp, kq, kv) in [(0, 2, 4), (1, 3, 5)] {
                    add(i, comp, get(b, s, kq, i));
                    let hv = get(b, s, kv, i);
                    if hv != 0.0 {
                        for (m, w) in stencil.row(i) {
                            add(m, comp, hv * w);
                        }
                    }
                    for (j, wij) in stencil.row(i) {
                        add(j, comp, -wij * get(b, t, kq, j));
                        let hv = get(b, t, kv, j);
                        if hv != 0.0 {
                            for (m, w) in stencil.row(j) {
                                add(m, comp, -wij * hv * w);
                            }
                        }
                    }
                }
                let first_node = (i.saturating_sub(2)).max(1);
                let first_col = 2 * (first_node - 1);
                let mut row = vec![0.0; BAND];
                for (slot, pair_vals) in acc.chunks(2).enumerate() {
                    let m = (base + slot as isize) as usize;
                    if m == 0 || m >= n {
                        continue;
                    }
                    for (comp, v) in pair_vals.iter().enumerate() {
                        row[2 * (m - 1) + comp - first_col] = *v;
                    }
                }
                let eq = 2 * b + pair;
                qr.add_row(first_col, row, -r[4 * (i - 1) + eq]);
            }
        }
    }
    qr.solve()
}

/// Incremental QR of a banded least-squares system by Givens rotations.
///
/// Row `c` of the triangular factor is stored as columns `c..c+band`.
struct BandedQr {
    n: usize,
    band: usize,
    r: Vec<f64>,
    filled: Vec<bool>,
    rhs: Vec<f64>,
}

impl BandedQr {
    fn new(n: usize, band: usize) -> Self {
        Self {
            n,
            band,
            r: vec![0.0; n * band],
            filled: vec![false; n],
            rhs: vec![0.0; n],
        }
    }

    /// Adds the equation `sum_k row[k] * d[first + k] = b`.
    fn add_row(&mut self, first: usize, mut row: Vec<f64>, mut b: f64) {
        let band = self.band;
        let mut c = first;
        loop {
            if row.iter().all(|v| *v == 0.0) {
                return;
            }
            while c < self.n && row[0] == 0.0 {
                row.rotate_left(1);
                row[band - 1] = 0.0;
                c += 1;
            }
            if c >= self.n {
                return;
            }
            let rc = &mut self.r[c * band..(c + 1) * band];
            if !self.filled[c] {
                rc.copy_from_slice(&row);
                self.rhs[c] = b;
                self.filled[c] = true;
                return;
            }
            let rho = rc[0].hypot(row[0]);
            let (cs, sn) = (rc[0] / rho, row[0] / rho);
            for (x, y) in rc.iter_mut().zip(row.iter_mut()) {
                let (u, v) = (*x, *y);
                *x = cs * u + sn * v;
                *y = -sn * u + cs * v;
            }
            row[0] = 0.0;
            let u = self.rhs[c];
            self.rhs[c] = cs * u + sn * b;
            b = -sn * u + cs * b;
        }
    }

    /// Back substitution; directions with a vanishing pivot get zero.
    fn solve(&self) -> Vec<f64> {
        let band = self.band;
        let max_diag = (0..self.n)
            .map(|c| self.r[c * band].abs())
            .fold(0.0, f64::max);
        let floor = 1e-14 * max_diag;
        let mut d = vec![0.0; self.n];
        for c in (0..self.n).rev() {
            let row = &self.r[c * band..(c + 1) * band];
            if !self.filled[c] || row[0].abs() <= floor {
                continue;
            }
            let mut s = self.rhs[c];
            for k in 1..band.min(self.n - c) {
                s -= row[k] * d[c + k];
            }
            d[c] = s / row[0];
        }
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fuzzy::{FuzzyNumber, LevelGrid};
    use crate::variational::el_residual;

    #[test]
    fn banded_qr_solves_least_squares() {
        // overdetermined: d0 = 1, d1 = 2, d0 + d1 = 3 (consistent)
        let mut qr = BandedQr::new(2, 2);
        qr.add_row(0, vec![1.0, 0.0], 1.0);
        qr.add_row(1, vec![1.0, 0.0], 2.0);
        qr.add_row(0, vec![1.0, 1.0], 3.0);
        let d = qr.solve();
        assert!((d[0] - 1.0).abs() < 1e-14 && (d[1] - 2.0).abs() < 1e-14);

        // inconsistent: d = 0 and d = 2 gives the mean
        let mut qr = BandedQr::new(1, 1);
        qr.add_row(0, vec![1.0], 0.0);
        qr.add_row(0, vec![1.0], 2.0);
        assert!((qr.solve()[0] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn crisp_weighted_problem_recovers_log() {
        let grid = LevelGrid::uniform(3).unwrap();
        let p = VariationalProblem::uniform(
            1.0,
            std::f64::consts::E,
            500,
            LagrangianSpec::parse("x*vl^2", "x*vu^2").unwrap(),
            FuzzyNumber::crisp(0.0, &grid),
            FuzzyNumber::crisp(1.0, &grid),
        )
        .unwrap();
        let s = solve_extremal(&p).unwrap();
        assert!(s.diagnostics.consistent);
        for path in s.extremal.levels() {
            for (q, x) in path.ql.iter().zip(p.xs()) {
                assert!((q - x.ln()).abs() < 1e-4);
            }
        }
        let r = el_residual(&p, &s.extremal).unwrap();
        assert!(r.max_abs() <= s.diagnostics.tol_consistent);
    }

    #[test]
    fn nonlinear_lagrangian_converges() {
        // q'' = q^2 style problem from L = vl^2/2 + ql^3/3
        let grid = LevelGrid::uniform(2).unwrap();
        let p = VariationalProblem::uniform(
            0.0,
            1.0,
            200,
            LagrangianSpec::parse("vl^2/2 + ql^3/3", "vu^2/2 + qu^3/3").unwrap(),
            FuzzyNumber::triangular(0.0, 0.5, 1.0, &grid).unwrap(),
            FuzzyNumber::triangular(1.0, 1.5, 2.0, &grid).unwrap(),
        )
        .unwrap();
        let s = solve_extremal(&p).unwrap();
        assert!(s.diagnostics.consistent, "{:?}", s.diagnostics);
        assert!(s.diagnostics.levels.iter().all(|l| l.iterations > 1));
    }

    #[test]
    fn equal_boundaries_give_constant() {
        let grid = LevelGrid::uniform(3).unwrap();
        let bc = FuzzyNumber::triangular(1.0, 2.0, 3.0, &grid).unwrap();
        let p = VariationalProblem::uniform(
            0.0,
            1.0,
            50,
            LagrangianSpec::parse("vl^2", "vu^2").unwrap(),
            bc.clone(),
            bc.clone(),
        )
        .unwrap();
        let s = solve_extremal(&p).unwrap();
        for (level, path) in s.extremal.levels().iter().enumerate() {
            let (l, u) = bc.cut(level);
            assert!(path.ql.iter().all(|q| (q - l).abs() < 1e-12));
            assert!(path.qu.iter().all(|q| (q - u).abs() < 1e-12));
        }
        assert!(s.diagnostics.fuzzy_violation.is_none());
    }
}
