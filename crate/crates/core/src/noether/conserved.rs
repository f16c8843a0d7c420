use serde::Serialize;

use crate::calculus::derivative_short;
use crate::fuzzy::Bound;
use crate::variational::{nodal_partial, Extremal, VariationalProblem};

use super::{NoetherError, SymmetryGenerator};

/// Which pairing the advanced `d6` term of the upper bound uses in the
/// delayed conserved quantity.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub enum DelayedNoetherVariant {
    /// `d6 U * zeta_l + d7 U * zeta_u`, mirroring the lower bound.
    #[default]
    Symmetric,
    /// `d6 U * zeta_u + d7 U * zeta_u`.
    Literal,
}

/// Which conserved-quantity formula was evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Formula {
    /// `d4 L zeta_l + d5 L zeta_u`.
    WithoutTime,
    /// Adds `(L - d4 L vl - d5 L vu) tau`.
    General,
    /// Adds the advanced delayed terms on `[a, b - tau_d]`.
    Delayed(DelayedNoetherVariant),
}

/// Conservation thresholds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ConservationTolerances {
    /// Bound on max |dC/dx|.
    pub tol_cons: f64,
    /// Bound on `(max C - min C) / max(1, |mean C|)` per regime.
    pub tol_span: f64,
}

impl Default for ConservationTolerances {
    fn default() -> Self {
        Self {
            tol_cons: 1e-5,
            tol_span: 1e-4,
        }
    }
}

/// Statistics of one conserved curve on one regime segment.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CurveStats {
    pub level: usize,
    pub bound: Bound,
    /// Inclusive node range.
    pub segment: (usize, usize),
    pub mean: f64,
    pub max_deviation: f64,
    pub relative_span: f64,
    pub max_dcdx: f64,
    pub worst_node: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LevelConserved {
    pub r: f64,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub dlower: Vec<f64>,
    pub dupper: Vec<f64>,
}

impl LevelConserved {
    pub fn values(&self, bound: Bound) -> &[f64] {
        match bound {
            Bound::Lower => &self.lower,
            Bound::Upper => &self.upper,
        }
    }

    pub fn derivative(&self, bound: Bound) -> &[f64] {
        match bound {
            Bound::Lower => &self.dlower,
            Bound::Upper => &self.dupper,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConservationReport {
    pub formula: Formula,
    pub xs: Vec<f64>,
    pub levels: Vec<LevelConserved>,
    /// Inclusive node ranges differentiated separately.
    pub segments: Vec<(usize, usize)>,
    pub stats: Vec<CurveStats>,
    pub tolerances: ConservationTolerances,
    pub max_dcdx: f64,
    pub max_relative_span: f64,
    pub verdict: bool,
}

/// Outcome of [`conservation_check`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ConservationVerdict {
    pub conserved: bool,
    pub max_dcdx: f64,
    pub max_relative_span: f64,
    pub worst_level: usize,
    pub worst_bound: Bound,
    pub worst_node: usize,
}

/// Evaluates the conserved quantity of the generator along the extremal.
///
/// The formula follows the situation: without a time generator the
/// momentum-like sum `d4 L zeta_l + d5 L zeta_u`; with one the general
/// form adding `(L - d4 L vl - d5 L vu) tau`; for delayed problems the
/// advanced partials at `x + tau_d` join on `[a, b - tau_d]`.
pub fn conserved_quantity(
    problem: &VariationalProblem,
    generator: &SymmetryGenerator,
    extremal: &Extremal,
    variant: DelayedNoetherVariant,
    tolerances: ConservationTolerances,
) -> Result<ConservationReport, NoetherError> {
    extremal.check_against(problem)?;
    let split = problem.regime_split();
    let formula = match (split, generator.tau()) {
        (Some(_), Some(_)) => return Err(NoetherError::TimeWithDelay),
        (Some(_), None) => Formula::Delayed(variant),
        (None, Some(_)) => Formula::General,
        (None, None) => Formula::WithoutTime,
    };
    if split.is_some() && !extremal.has_history() {
        return Err(NoetherError::Engine(
            crate::variational::EngineError::MissingHistory,
        ));
    }
    let xs = problem.xs();
    let n = xs.len() - 1;
    let k = problem.delay_shift();
    let lag = problem.lagrangian();
    let segments = match split {
        Some(s) if s < n => vec![(0, s), (s + 1, n)],
        _ => vec![(0, n)],
    };

    let mut levels = Vec::with_capacity(extremal.levels().len());
    for ((level, path), r) in extremal
        .levels()
        .iter()
        .enumerate()
        .zip(problem.grid().iter())
    {
        let g = generator.along(xs, path, level)?;
        let mut curves: [Vec<f64>; 2] = Default::default();
        for bound in Bound::BOTH {
            let p = |slot| nodal_partial(lag, bound, slot, xs, path, level);
            let (p4, p5) = (p(4)?, p(5)?);
            let mut c: Vec<f64> = (0..=n)
                .map(|i| p4[i] * g.zeta[0][i] + p5[i] * g.zeta[1][i])
                .collect();
            if let Some((tau, _)) = &g.tau {
                for (i, &x) in xs.iter().enumerate() {
                    let l =
                        lag.eval(bound, &path.env(x, i))
                            .map_err(|source| NoetherError::Eval {
                                what: "Lagrangian",
                                level,
                                node: i,
                                x,
                                source,
                            })?;
                    c[i] += (l - p4[i] * path.vl[i] - p5[i] * path.vu[i]) * tau[i];
                }
            }
            if let Some(split) = split {
                let (p6, p7) = (p(6)?, p(7)?);
                // which zeta multiplies the advanced d6 term
                let z6 = match (bound, variant) {
                    (Bound::Upper, DelayedNoetherVariant::Literal) => &g.zeta[1],
                    _ => &g.zeta[0],
                };
                for i in 0..=split {
                    c[i] += p6[i + k] * z6[i] + p7[i + k] * g.zeta[1][i];
                }
            }
            curves[bound.index()] = c;
        }
        let deriv = |c: &[f64]| -> Vec<f64> {
            let mut d = Vec::with_capacity(c.len());
            for &(s, e) in &segments {
                d.extend(derivative_short(&xs[s..=e], &c[s..=e]));
            }
            d
        };
        let [lower, upper] = curves;
        levels.push(LevelConserved {
            r,
            dlower: deriv(&lower),
            dupper: deriv(&upper),
            lower,
            upper,
        });
    }

    let mut stats = Vec::new();
    for (level, lc) in levels.iter().enumerate() {
        for bound in Bound::BOTH {
            for &(s, e) in &segments {
                stats.push(curve_stats(
                    level,
                    bound,
                    (s, e),
                    lc.values(bound),
                    lc.derivative(bound),
                ));
            }
        }
    }
    let max_dcdx = stats.iter().map(|s| s.max_dcdx).fold(0.0, f64::max);
    let max_relative_span = stats.iter().map(|s| s.relative_span).fold(0.0, f64::max);
    Ok(ConservationReport {
        formula,
        xs: xs.to_vec(),
        levels,
        segments,
        stats,
        tolerances,
        max_dcdx,
        max_relative_span,
        verdict: max_dcdx <= tolerances.tol_cons && max_relative_span <= tolerances.tol_span,
    })
}

fn curve_stats(
    level: usize,
    bound: Bound,
    (s, e): (usize, usize),
    c: &[f64],
    d: &[f64],
) -> CurveStats {
    let seg = &c[s..=e];
    let mean = seg.iter().sum::<f64>() / seg.len() as f64;
    let max = seg.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = seg.iter().copied().fold(f64::INFINITY, f64::min);
    let max_deviation = seg.iter().map(|v| (v - mean).abs()).fold(0.0, f64::max);
    let (worst_node, max_dcdx) = d[s..=e]
        .iter()
        .enumerate()
        .map(|(j, v)| (s + j, v.abs()))
        .fold(
            (s, 0.0),
            |best, cur| if cur.1 > best.1 { cur } else { best },
        );
    CurveStats {
        level,
        bound,
        segment: (s, e),
        mean,
        max_deviation,
        relative_span: (max - min) / mean.abs().max(1.0),
        max_dcdx,
        worst_node,
    }
}

/// Verdict of a report plus the location of the largest |dC/dx|.
pub fn conservation_check(report: &ConservationReport) -> ConservationVerdict {
    let worst = report
        .stats
        .iter()
        .max_by(|a, b| a.max_dcdx.total_cmp(&b.max_dcdx));
    ConservationVerdict {
        conserved: report.verdict,
        max_dcdx: report.max_dcdx,
        max_relative_span: report.max_relative_span,
        worst_level: worst.map_or(0, |w| w.level),
        worst_bound: worst.map_or(Bound::Lower, |w| w.bound),
        worst_node: worst.map_or(0, |w| w.worst_node),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use crate::fuzzy::{FuzzyNumber, LevelGrid};
    use crate::variational::{Delay, LagrangianSpec};

    fn grid() -> LevelGrid {
        LevelGrid::uniform(3).unwrap()
    }

    fn weighted(n: usize) -> VariationalProblem {
        VariationalProblem::uniform(
            1.0,
            std::f64::consts::E,
            n,
            LagrangianSpec::parse("x*vl^2", "x*vu^2").unwrap(),
            FuzzyNumber::crisp(1.0, &grid()),
            FuzzyNumber::crisp(3.0, &grid()),
        )
        .unwrap()
    }

    #[test]
    fn log_family_conserves_two_a_b() {
        let p = weighted(2000);
        let (a, b) = (1.0, 2.0);
        let e = Extremal::from_analytic(p.xs().to_vec(), grid(), |_, x| {
            let q = a + b * x.ln();
            [q, q, b / x, b / x]
        })
        .unwrap();
        let g = SymmetryGenerator::parse(Some("2*x*ln(x)"), "ql", "qu").unwrap();
        let rep = conserved_quantity(
            &p,
            &g,
            &e,
            DelayedNoetherVariant::Symmetric,
            ConservationTolerances::default(),
        )
        .unwrap();
        assert_eq!(rep.formula, Formula::General);
        for lc in &rep.levels {
            assert!(lc.lower.iter().all(|c| (c - 4.0).abs() < 1e-12));
        }
        assert!(rep.max_dcdx <= 1e-6);
        assert!(conservation_check(&rep).conserved);
    }

    #[test]
    fn zero_generator_and_momentum() {
        let p = VariationalProblem::uniform(
            0.0,
            1.0,
            20,
            LagrangianSpec::parse("vl^2", "vu^2").unwrap(),
            FuzzyNumber::crisp(0.0, &grid()),
            FuzzyNumber::crisp(1.0, &grid()),
        )
        .unwrap();
        let e = Extremal::sample(p.xs().to_vec(), grid(), |_, x| (x, 3.0 * x)).unwrap();
        let tol = ConservationTolerances::default();
        let zero = conserved_quantity(&p, &SymmetryGenerator::zero(), &e, Default::default(), tol)
            .unwrap();
        assert!(zero
            .levels
            .iter()
            .all(|l| l.lower.iter().chain(&l.upper).all(|c| *c == 0.0)));
        let g = SymmetryGenerator::parse(None, "1", "1").unwrap();
        let rep = conserved_quantity(&p, &g, &e, Default::default(), tol).unwrap();
        assert_eq!(rep.formula, Formula::WithoutTime);
        assert!(rep.levels[1].lower.iter().all(|c| (c - 2.0).abs() < 1e-12));
        assert!(rep.levels[1].upper.iter().all(|c| (c - 6.0).abs() < 1e-12));
        assert!(rep.verdict);
    }

    #[test]
    fn growing_curve_fails() {
        let p = VariationalProblem::uniform(
            0.0,
            1.0,
            20,
            LagrangianSpec::parse("vl^2/2", "vu^2/2").unwrap(),
            FuzzyNumber::crisp(0.0, &grid()),
            FuzzyNumber::crisp(1.0, &grid()),
        )
        .unwrap();
        // C = vl = x for ql = x^2 / 2
        let e = Extremal::sample(p.xs().to_vec(), grid(), |_, x| (x * x / 2.0, 0.0)).unwrap();
        let g = SymmetryGenerator::parse(None, "1", "0").unwrap();
        let rep = conserved_quantity(&p, &g, &e, Default::default(), Default::default()).unwrap();
        let v = conservation_check(&rep);
        assert!(!v.conserved);
        assert!((v.max_dcdx - 1.0).abs() < 1e-9);
        assert_eq!(v.worst_bound, Bound::Lower);
    }

    #[test]
    fn delayed_regimes_and_variants() {
        let xs: Vec<f64> = (0..=20).map(|i| i as f64 * 0.1).collect();
        let zero = FuzzyNumber::crisp(0.0, &grid());
        let one = FuzzyNumber::crisp(1.0, &grid());
        let delay = || Delay::new(1.0, parse("0").unwrap(), parse("0").unwrap());
        let p = VariationalProblem::delayed(
            xs.clone(),
            LagrangianSpec::parse("vl^2 + wl", "vu^2 + 3*wl").unwrap(),
            zero,
            one,
            delay(),
        )
        .unwrap();
        let e = Extremal::sample(xs, grid(), |_, x| (x, 2.0 * x))
            .unwrap()
            .attach_history(&p)
            .unwrap();
        let g = SymmetryGenerator::parse(None, "1", "5").unwrap();
        let sym = conserved_quantity(
            &p,
            &g,
            &e,
            DelayedNoetherVariant::Symmetric,
            Default::default(),
        )
        .unwrap();
        let lit = conserved_quantity(
            &p,
            &g,
            &e,
            DelayedNoetherVariant::Literal,
            Default::default(),
        )
        .unwrap();
        assert_eq!(sym.segments, vec![(0, 10), (11, 20)]);
        // lower: 2 vl * 1 + 1 * 1 before the split, 2 vl after
        assert!((sym.levels[0].lower[3] - 3.0).abs() < 1e-12);
        assert!((sym.levels[0].lower[15] - 2.0).abs() < 1e-12);
        // upper: 2 vu * 5 + 3 * zeta_l (symmetric) or 3 * zeta_u (literal)
        assert!((sym.levels[0].upper[3] - 23.0).abs() < 1e-12);
        assert!((lit.levels[0].upper[3] - 35.0).abs() < 1e-12);
        assert!((sym.levels[0].upper[15] - 20.0).abs() < 1e-12);
        assert!(sym.verdict && lit.verdict);
    }
}
