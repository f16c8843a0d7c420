use serde::Serialize;

use crate::calculus::trapezoid;
use crate::expr::Env;
use crate::fuzzy::Bound;
use crate::variational::{nodal_partial, Extremal, LevelPath, VariationalProblem};

use super::{GeneratorValues, NoetherError, SymmetryGenerator};

/// Settings of the epsilon-scaling invariance test.
#[derive(Clone, Debug, PartialEq)]
pub struct InvarianceOptions {
    /// Positive and strictly decreasing.
    pub epsilons: Vec<f64>,
    /// Subintervals to test; `None` uses the whole interval and its halves.
    pub subintervals: Option<Vec<(f64, f64)>>,
    /// Slopes at or above `2 - slope_tol` count as invariant.
    pub slope_tol: f64,
    /// Discrepancies at or below this are treated as exact zeros.
    pub floor: f64,
}

impl Default for InvarianceOptions {
    fn default() -> Self {
        Self {
            epsilons: vec![1e-2, 5e-3, 2.5e-3, 1.25e-3],
            subintervals: None,
            slope_tol: 0.2,
            floor: 1e-13,
        }
    }
}

/// Scaling fit of one (level, bound, subinterval) triple.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InvarianceFit {
    pub level: usize,
    pub r: f64,
    pub bound: Bound,
    /// Snapped to nodes.
    pub interval: (f64, f64),
    /// One discrepancy per used epsilon.
    pub deltas: Vec<f64>,
    /// Log-log slope; `None` when fewer than two discrepancies exceed the floor.
    pub slope: Option<f64>,
    pub invariant: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InvarianceReport {
    /// Epsilons that entered the fits.
    pub epsilons: Vec<f64>,
    /// Epsilons dropped because `dx^/dx <= 0` somewhere.
    pub skipped: Vec<f64>,
    pub fits: Vec<InvarianceFit>,
    pub invariant: bool,
}

impl InvarianceReport {
    /// Smallest fitted slope, if any fit had one.
    pub fn min_slope(&self) -> Option<f64> {
        self.fits
            .iter()
            .filter_map(|f| f.slope)
            .min_by(|a, b| a.total_cmp(b))
    }

    pub fn max_delta(&self) -> f64 {
        self.fits
            .iter()
            .flat_map(|f| f.deltas.iter())
            .fold(0.0, |m: f64, d| m.max(*d))
    }
}

/// Tests invariance of both endpoint functionals under the generator by
/// comparing the integrals before and after the transformation for a
/// decreasing sequence of epsilons.
///
/// The transformed integral is taken over the original nodes by
/// substitution: the integrand is multiplied by `dx^/dx = 1 + eps*tau'` and
/// the velocity is `(v + eps*zeta') / (1 + eps*tau')`. Invariance means the
/// discrepancy shrinks like `eps^2`.
pub fn check_invariance(
    problem: &VariationalProblem,
    generator: &SymmetryGenerator,
    trajectory: &Extremal,
    options: &InvarianceOptions,
) -> Result<InvarianceReport, NoetherError> {
    trajectory.check_against(problem)?;
    let delayed_l = problem.lagrangian().delayed();
    if delayed_l && generator.tau().is_some() {
        return Err(NoetherError::TimeWithDelay);
    }
    if delayed_l && !trajectory.has_history() {
        return Err(NoetherError::Engine(
            crate::variational::EngineError::MissingHistory,
        ));
    }
    if options.epsilons.is_empty()
        || options
            .epsilons
            .iter()
            .any(|e| !(*e > 0.0 && e.is_finite()))
        || options.epsilons.windows(2).any(|w| w[1] >= w[0])
    {
        return Err(NoetherError::Epsilons(options.epsilons.clone()));
    }
    let xs = problem.xs();
    let ranges = snap_subintervals(problem, options.subintervals.as_deref())?;
    let k = problem.delay_shift();

    // discrepancies[level][bound][range][eps]
    let mut deltas = Vec::new();
    let mut skipped = Vec::new();
    let mut used = Vec::new();
    let gens: Vec<GeneratorValues> = trajectory
        .levels()
        .iter()
        .enumerate()
        .map(|(level, path)| generator.along(xs, path, level))
        .collect::<Result<_, _>>()?;
    for &eps in &options.epsilons {
        let jac: Vec<Vec<f64>> = gens
            .iter()
            .map(|g| match &g.tau {
                Some((_, tau_dot)) => tau_dot.iter().map(|t| 1.0 + eps * t).collect(),
                None => vec![1.0; xs.len()],
            })
            .collect();
        if jac.iter().flatten().any(|j| *j <= 0.0) {
            skipped.push(eps);
            continue;
        }
        used.push(eps);
        let mut per_eps = Vec::new();
        for (level, path) in trajectory.levels().iter().enumerate() {
            let moved = transformed(path, xs, &gens[level], &jac[level], eps, k, delayed_l);
            let mut per_bound = Vec::new();
            for bound in Bound::BOTH {
                let l = problem.lagrangian().lagrangian(bound);
                let mut before = Vec::with_capacity(xs.len());
                let mut after = Vec::with_capacity(xs.len());
                for (i, &x) in xs.iter().enumerate() {
                    let err = |source| NoetherError::Eval {
                        what: "Lagrangian",
                        level,
                        node: i,
                        x,
                        source,
                    };
                    before.push(l.eval(&path.env(x, i)).map_err(err)?);
                    after.push(l.eval(&moved[i]).map_err(err)? * jac[level][i]);
                }
                let per_range: Vec<f64> = ranges
                    .iter()
                    .map(|&(s, e)| {
                        (trapezoid(&xs[s..=e], &before[s..=e])
                            - trapezoid(&xs[s..=e], &after[s..=e]))
                        .abs()
                    })
                    .collect();
                per_bound.push(per_range);
            }
            per_eps.push(per_bound);
        }
        deltas.push(per_eps);
    }

    let mut fits = Vec::new();
    for (level, r) in problem.grid().iter().enumerate() {
        for bound in Bound::BOTH {
            for (ri, &(s, e)) in ranges.iter().enumerate() {
                let ds: Vec<f64> = deltas.iter().map(|d| d[level][bound.index()][ri]).collect();
                let slope = fit_slope(&used, &ds, options.floor);
                let invariant = match slope {
                    Some(s) => s >= 2.0 - options.slope_tol,
                    None => true,
                };
                fits.push(InvarianceFit {
                    level,
                    r,
                    bound,
                    interval: (xs[s], xs[e]),
                    deltas: ds,
                    slope,
                    invariant,
                });
            }
        }
    }
    let invariant = !used.is_empty() && fits.iter().all(|f| f.invariant);
    Ok(InvarianceReport {
        epsilons: used,
        skipped,
        fits,
        invariant,
    })
}

/// Argument tuples of the transformed path at every node.
fn transformed(
    path: &LevelPath,
    xs: &[f64],
    g: &GeneratorValues,
    jac: &[f64],
    eps: f64,
    k: usize,
    delayed_l: bool,
) -> Vec<Env> {
    let v_hat = |b: usize, i: usize| (path.v(Bound::BOTH[b])[i] + eps * g.zeta_dot[b][i]) / jac[i];
    (0..xs.len())
        .map(|i| {
            let x_hat = xs[i] + g.tau.as_ref().map_or(0.0, |(t, _)| eps * t[i]);
            // the generator vanishes on the history, so early w is unchanged
            let w = |b: usize, orig: &Option<Vec<f64>>| {
                if !delayed_l {
                    0.0
                } else if i >= k {
                    v_hat(b, i - k)
                } else {
                    orig.as_ref().map_or(0.0, |w| w[i])
                }
            };
            Env::full([
                x_hat,
                path.ql[i] + eps * g.zeta[0][i],
                path.qu[i] + eps * g.zeta[1][i],
                v_hat(0, i),
                v_hat(1, i),
                w(0, &path.wl),
                w(1, &path.wu),
            ])
        })
        .collect()
}

/// Least-squares slope of `log delta` against `log eps` over the points
/// above `floor`.
fn fit_slope(eps: &[f64], deltas: &[f64], floor: f64) -> Option<f64> {
    let pts: Vec<(f64, f64)> = eps
        .iter()
        .zip(deltas)
        .filter(|(_, d)| **d > floor)
        .map(|(e, d)| (e.ln(), d.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Some(sxy / sxx)
}

/// Node ranges `(start, end)` of the requested subintervals.
fn snap_subintervals(
    problem: &VariationalProblem,
    requested: Option<&[(f64, f64)]>,
) -> Result<Vec<(usize, usize)>, NoetherError> {
    let (a, b) = (problem.a(), problem.b());
    let default = [(a, b), (a, 0.5 * (a + b)), (0.5 * (a + b), b)];
    let wanted = requested.unwrap_or(&default);
    let xs = problem.xs();
    let nearest = |t: f64| {
        let i = xs.partition_point(|x| *x < t);
        match i {
            0 => 0,
            i if i >= xs.len() => xs.len() - 1,
            i if (xs[i] - t) < (t - xs[i - 1]) => i,
            i => i - 1,
        }
    };
    wanted
        .iter()
        .map(|&(ta, tb)| {
            let span = b - a;
            if !(ta < tb) || ta < a - 1e-12 * span || tb > b + 1e-12 * span {
                return Err(NoetherError::Subinterval(ta, tb));
            }
            let (s, e) = (nearest(ta), nearest(tb));
            if s >= e {
                return Err(NoetherError::Subinterval(ta, tb));
            }
            Ok((s, e))
        })
        .collect()
}

/// Residuals of the necessary condition of invariance (no time generator):
/// `d2 L zeta_l + d3 L zeta_u + d4 L zeta_l' + d5 L zeta_u'` at every node,
/// plus the advanced terms `d6 L[x + tau_d] zeta_l' + d7 L[x + tau_d] zeta_u'`
/// on `[a, b - tau_d]` for delayed problems.
///
/// Returned as `[level][bound][node]`.
pub fn invariance_residual(
    problem: &VariationalProblem,
    trajectory: &Extremal,
    generator: &SymmetryGenerator,
) -> Result<Vec<[Vec<f64>; 2]>, NoetherError> {
    if generator.tau().is_some() {
        return Err(NoetherError::TimeGenerator);
    }
    trajectory.check_against(problem)?;
    let xs = problem.xs();
    let split = problem.regime_split();
    if split.is_some() && !trajectory.has_history() {
        return Err(NoetherError::Engine(
            crate::variational::EngineError::MissingHistory,
        ));
    }
    let k = problem.delay_shift();
    let lag = problem.lagrangian();
    trajectory
        .levels()
        .iter()
        .enumerate()
        .map(|(level, path)| {
            let g = generator.along(xs, path, level)?;
            let mut out: [Vec<f64>; 2] = Default::default();
            for bound in Bound::BOTH {
                let p = |slot| nodal_partial(lag, bound, slot, xs, path, level);
                let (p2, p3, p4, p5) = (p(2)?, p(3)?, p(4)?, p(5)?);
                let adv = match split {
                    Some(_) => Some((p(6)?, p(7)?)),
                    None => None,
                };
                out[bound.index()] = (0..xs.len())
                    .map(|i| {
                        let mut v = p2[i] * g.zeta[0][i]
                            + p3[i] * g.zeta[1][i]
                            + p4[i] * g.zeta_dot[0][i]
                            + p5[i] * g.zeta_dot[1][i];
                        if let (Some((p6, p7)), Some(split)) = (&adv, split) {
                            if i <= split {
                                v += p6[i + k] * g.zeta_dot[0][i] + p7[i + k] * g.zeta_dot[1][i];
                            }
                        }
                        v
                    })
                    .collect();
            }
            Ok(out)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fuzzy::{FuzzyNumber, LevelGrid};
    use crate::variational::LagrangianSpec;

    fn problem(l: (&str, &str), a: f64, b: f64, n: usize) -> VariationalProblem {
        let grid = LevelGrid::uniform(3).unwrap();
        VariationalProblem::uniform(
            a,
            b,
            n,
            LagrangianSpec::parse(l.0, l.1).unwrap(),
            FuzzyNumber::crisp(0.0, &grid),
            FuzzyNumber::crisp(1.0, &grid),
        )
        .unwrap()
    }

    fn log_path(p: &VariationalProblem) -> Extremal {
        Extremal::from_analytic(p.xs().to_vec(), p.grid().clone(), |_, x| {
            [x.ln(), x.ln(), 1.0 / x, 1.0 / x]
        })
        .unwrap()
    }

    #[test]
    fn weighted_lagrangian_is_invariant_under_the_time_generator() {
        let p = problem(("x*vl^2", "x*vu^2"), 1.0, std::f64::consts::E, 400);
        let g = SymmetryGenerator::parse(Some("2*x*ln(x)"), "ql", "qu").unwrap();
        let rep = check_invariance(&p, &g, &log_path(&p), &InvarianceOptions::default()).unwrap();
        assert!(rep.invariant);
        assert!(rep.min_slope().unwrap() >= 1.8);
        assert!(rep.skipped.is_empty());
    }

    #[test]
    fn identity_and_translations_give_exact_zero() {
        let p = problem(("vl^2", "vu^2"), 0.0, 1.0, 50);
        let e = Extremal::sample(p.xs().to_vec(), p.grid().clone(), |_, x| (x, 2.0 * x)).unwrap();
        for g in [
            SymmetryGenerator::zero(),
            SymmetryGenerator::parse(None, "1", "1").unwrap(),
        ] {
            let rep = check_invariance(&p, &g, &e, &InvarianceOptions::default()).unwrap();
            assert!(rep.invariant);
            assert_eq!(rep.max_delta(), 0.0);
        }
    }

    #[test]
    fn breaking_generator_is_detected() {
        let p = problem(("x*vl^2", "x*vu^2"), 1.0, std::f64::consts::E, 200);
        let g = SymmetryGenerator::parse(None, "ql", "qu").unwrap();
        let rep = check_invariance(&p, &g, &log_path(&p), &InvarianceOptions::default()).unwrap();
        assert!(!rep.invariant);
        // first-order discrepancy
        assert!((rep.min_slope().unwrap() - 1.0).abs() < 0.1);
    }

    #[test]
    fn non_monotone_epsilon_is_skipped() {
        let p = problem(("vl^2", "vu^2"), 0.0, 1.0, 20);
        let e = Extremal::sample(p.xs().to_vec(), p.grid().clone(), |_, x| (x, x)).unwrap();
        // dx^/dx = 1 - 200 eps
        let g = SymmetryGenerator::parse(Some("-200*x"), "0", "0").unwrap();
        let rep = check_invariance(&p, &g, &e, &InvarianceOptions::default()).unwrap();
        assert_eq!(rep.skipped, vec![1e-2, 5e-3]);
        assert_eq!(rep.epsilons.len(), 2);
    }

    #[test]
    fn necessary_condition_residuals() {
        let p = problem(("x*vl^2", "x*vu^2"), 1.0, std::f64::consts::E, 100);
        let e = log_path(&p);
        let zero = invariance_residual(&p, &e, &SymmetryGenerator::zero()).unwrap();
        assert!(zero.iter().all(|lv| lv.iter().flatten().all(|v| *v == 0.0)));

        let g = SymmetryGenerator::parse(None, "ql", "qu").unwrap();
        let res = invariance_residual(&p, &e, &g).unwrap();
        for (i, &x) in p.xs().iter().enumerate() {
            let v = 1.0 / x;
            assert!((res[0][0][i] - 2.0 * x * v * v).abs() < 1e-12);
        }

        let timed = SymmetryGenerator::parse(Some("x"), "0", "0").unwrap();
        assert!(matches!(
            invariance_residual(&p, &e, &timed),
            Err(NoetherError::TimeGenerator)
        ));
    }

    #[test]
    fn constant_zeta_has_no_residual_for_free_particle() {
        let p = problem(("vl^2", "vu^2"), 0.0, 1.0, 20);
        let e = Extremal::sample(p.xs().to_vec(), p.grid().clone(), |_, x| (x * x, x)).unwrap();
        let g = SymmetryGenerator::parse(None, "1", "0").unwrap();
        let res = invariance_residual(&p, &e, &g).unwrap();
        assert!(res.iter().all(|lv| lv.iter().flatten().all(|v| *v == 0.0)));
    }
}
