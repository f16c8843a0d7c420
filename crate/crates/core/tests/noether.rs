use std::f64::consts::E;

use fuzzy_noether::expr::parse;
use fuzzy_noether::fuzzy::{Bound, FuzzyNumber, LevelGrid};
use fuzzy_noether::noether::{
    check_invariance, conservation_check, conserved_quantity, invariance_residual,
    ConservationTolerances, DelayedNoetherVariant, Formula, InvarianceOptions, NoetherError,
    SymmetryGenerator,
};
use fuzzy_noether::variational::{
    solve_extremal, Delay, Extremal, LagrangianSpec, VariationalProblem,
};

const SYM: DelayedNoetherVariant = DelayedNoetherVariant::Symmetric;

fn tol() -> ConservationTolerances {
    ConservationTolerances::default()
}

fn problem(l: (&str, &str), a: f64, b: f64, n: usize, grid: &LevelGrid) -> VariationalProblem {
    VariationalProblem::uniform(
        a,
        b,
        n,
        LagrangianSpec::parse(l.0, l.1).unwrap(),
        FuzzyNumber::triangular(0.0, 1.0, 2.0, grid).unwrap(),
        FuzzyNumber::triangular(1.0, 2.0, 3.0, grid).unwrap(),
    )
    .unwrap()
}

fn dilation_generator() -> SymmetryGenerator {
    SymmetryGenerator::parse(Some("2*x*ln(x)"), "ql", "qu").unwrap()
}

#[test]
fn dilation_quantity_on_the_analytic_extremal() {
    // q = A + B ln x gives 2(x q v - v^2 x^2 ln x) = 2 A B
    let grid = LevelGrid::uniform(3).unwrap();
    let p = problem(("x*vl^2", "x*vu^2"), 1.0, E, 2001, &grid);
    let (al, bl, au, bu) = (1.0, 2.0, 1.5, 3.0);
    let e = Extremal::from_analytic(p.xs().to_vec(), grid.clone(), |_, x| {
        [al + bl * x.ln(), au + bu * x.ln(), bl / x, bu / x]
    })
    .unwrap();
    let report = conserved_quantity(&p, &dilation_generator(), &e, SYM, tol()).unwrap();
    assert_eq!(report.formula, Formula::General);
    for level in &report.levels {
        assert!(level
            .lower
            .iter()
            .all(|c| (c - 2.0 * al * bl).abs() < 1e-12));
        assert!(level
            .upper
            .iter()
            .all(|c| (c - 2.0 * au * bu).abs() < 1e-12));
    }
    assert!(report.max_dcdx <= 1e-6);
    assert!(conservation_check(&report).conserved);
}

#[test]
fn linear_in_the_generator() {
    let grid = LevelGrid::uniform(4).unwrap();
    let p = problem(("x*vl^2", "x*vu^2"), 1.0, E, 300, &grid);
    let e = solve_extremal(&p).unwrap().extremal;
    let g = dilation_generator();
    let base = conserved_quantity(&p, &g, &e, SYM, tol()).unwrap();
    for k in [-2.5, 0.5, 3.0] {
        let scaled = conserved_quantity(&p, &g.scaled(k), &e, SYM, tol()).unwrap();
        for (a, b) in base.levels.iter().zip(&scaled.levels) {
            for bound in Bound::BOTH {
                for (u, v) in a.values(bound).iter().zip(b.values(bound)) {
                    assert!((k * u - v).abs() <= 1e-12 * u.abs().max(1.0));
                }
            }
        }
    }
}

#[test]
fn general_formula_with_zero_tau_is_the_time_free_one() {
    let grid = LevelGrid::uniform(4).unwrap();
    let p = problem(("x*vl^2 + ql*qu", "x*vu^2 + sin(ql)"), 1.0, E, 200, &grid);
    let e = Extremal::sample(p.xs().to_vec(), grid.clone(), |r, x| {
        (r + x.ln(), 2.0 - r + x * x)
    })
    .unwrap();
    let free = SymmetryGenerator::parse(None, "ql*x", "1 + qu").unwrap();
    let zero_tau = SymmetryGenerator::parse(Some("0*x"), "ql*x", "1 + qu").unwrap();
    let a = conserved_quantity(&p, &free, &e, SYM, tol()).unwrap();
    let b = conserved_quantity(&p, &zero_tau, &e, SYM, tol()).unwrap();
    assert_eq!(a.formula, Formula::WithoutTime);
    assert_eq!(b.formula, Formula::General);
    for (u, v) in a.levels.iter().zip(&b.levels) {
        for bound in Bound::BOTH {
            for (s, t) in u.values(bound).iter().zip(v.values(bound)) {
                assert!((s - t).abs() <= 1e-14);
            }
        }
    }
}

#[test]
fn zero_generator_and_momentum() {
    let grid = LevelGrid::uniform(3).unwrap();
    let p = problem(("vl^2", "vu^2"), 0.0, 1.0, 100, &grid);
    let e = solve_extremal(&p).unwrap().extremal;
    let zero = conserved_quantity(&p, &SymmetryGenerator::zero(), &e, SYM, tol()).unwrap();
    assert!(zero
        .levels
        .iter()
        .all(|l| l.lower.iter().chain(&l.upper).all(|c| *c == 0.0)));

    // linear extremals between (0,1,2) and (1,2,3): slope 1 everywhere
    let translate = SymmetryGenerator::parse(None, "1", "1").unwrap();
    let m = conserved_quantity(&p, &translate, &e, SYM, tol()).unwrap();
    for l in &m.levels {
        assert!(l
            .lower
            .iter()
            .chain(&l.upper)
            .all(|c| (c - 2.0).abs() < 1e-9));
    }
    assert!(conservation_check(&m).conserved);
}

#[test]
fn check_flags_a_drifting_quantity() {
    // L = x vl with zeta = (1, 0) gives C_lower = x
    let grid = LevelGrid::uniform(3).unwrap();
    let p = problem(("x*vl", "vu^2"), 0.0, 1.0, 50, &grid);
    let e = Extremal::sample(p.xs().to_vec(), grid.clone(), |r, x| (r * x, 2.0 + x)).unwrap();
    let g = SymmetryGenerator::parse(None, "1", "0").unwrap();
    let v = conservation_check(&conserved_quantity(&p, &g, &e, SYM, tol()).unwrap());
    assert!(!v.conserved);
    assert!((v.max_dcdx - 1.0).abs() < 1e-12);
    assert_eq!(v.worst_bound, Bound::Lower);
}

#[test]
fn invariance_detection() {
    let grid = LevelGrid::uniform(3).unwrap();
    let p = problem(("x*vl^2", "x*vu^2"), 1.0, E, 400, &grid);
    let e = Extremal::from_analytic(p.xs().to_vec(), grid.clone(), |r, x| {
        [r + x.ln(), 2.0 - r + x.ln(), 1.0 / x, 1.0 / x]
    })
    .unwrap();
    let opts = InvarianceOptions::default();
    let inv = check_invariance(&p, &dilation_generator(), &e, &opts).unwrap();
    assert!(inv.invariant);
    assert!(inv.min_slope().unwrap() >= 1.8);
    assert_eq!(inv.fits.len(), 3 * 2 * 3);

    let id = check_invariance(&p, &SymmetryGenerator::zero(), &e, &opts).unwrap();
    assert!(id.invariant && id.fits.iter().all(|f| f.deltas.iter().all(|d| *d == 0.0)));

    let scaling_only = SymmetryGenerator::parse(None, "ql", "qu").unwrap();
    let broken = check_invariance(&p, &scaling_only, &e, &opts).unwrap();
    assert!(!broken.invariant);
    assert!(broken
        .fits
        .iter()
        .all(|f| f.slope.is_some_and(|s| (s - 1.0).abs() < 0.1)));

    let bad = InvarianceOptions {
        epsilons: vec![1e-3, 1e-2],
        ..InvarianceOptions::default()
    };
    assert!(matches!(
        check_invariance(&p, &dilation_generator(), &e, &bad),
        Err(NoetherError::Epsilons(_))
    ));
}

#[test]
fn invariance_residual_examples() {
    let grid = LevelGrid::uniform(3).unwrap();
    let p = problem(("x*vl^2", "x*vu^2"), 1.0, E, 200, &grid);
    let e = Extremal::from_analytic(p.xs().to_vec(), grid.clone(), |_, x| {
        [x.ln(), 1.0 + x.ln(), 1.0 / x, 1.0 / x]
    })
    .unwrap();
    // zeta = q without time: d4 L zeta' = 2 x v^2
    let res =
        invariance_residual(&p, &e, &SymmetryGenerator::parse(None, "ql", "qu").unwrap()).unwrap();
    for (i, &x) in p.xs().iter().enumerate() {
        assert!((res[0][0][i] - 2.0 / x).abs() < 1e-12);
    }
    assert!(matches!(
        invariance_residual(&p, &e, &dilation_generator()),
        Err(NoetherError::TimeGenerator)
    ));
}

#[test]
fn invariance_residual_vanishes_under_refinement() {
    // both bounds see (vl^2 + vu^2) / (ql^2 + qu^2), invariant under rotations of (ql, qu)
    let grid = LevelGrid::uniform(3).unwrap();
    let rot = SymmetryGenerator::parse(None, "-qu", "ql").unwrap();
    let mut prev: Option<f64> = None;
    for n in [50, 100, 200] {
        let l = "(vl^2 + vu^2)/(ql^2 + qu^2)";
        let p = problem((l, l), 0.0, 1.0, n, &grid);
        let e = Extremal::sample(p.xs().to_vec(), grid.clone(), |r, x| {
            (r + x.sin(), 3.0 - r + x * x)
        })
        .unwrap();
        let res = invariance_residual(&p, &e, &rot).unwrap();
        let m = res
            .iter()
            .flatten()
            .flatten()
            .fold(0.0_f64, |m, v| m.max(v.abs()));
        if let Some(prev) = prev {
            assert!(m <= 1e-12 || prev / m >= 3.5, "{prev} -> {m}");
        }
        prev = Some(m);
    }
}

fn delayed_problem(l: (&str, &str), grid: &LevelGrid) -> VariationalProblem {
    let xs: Vec<f64> = (0..=100).map(|i| 2.0 * i as f64 / 100.0).collect();
    VariationalProblem::delayed(
        xs,
        LagrangianSpec::parse(l.0, l.1).unwrap(),
        FuzzyNumber::crisp(0.0, grid),
        FuzzyNumber::triangular(1.0, 2.0, 3.0, grid).unwrap(),
        Delay::new(0.5, parse("0").unwrap(), parse("0").unwrap()),
    )
    .unwrap()
}

#[test]
fn delayed_quantity_reduces_without_delayed_arguments() {
    let grid = LevelGrid::uniform(3).unwrap();
    let delayed = delayed_problem(("vl^2 + x*ql", "vu^2"), &grid);
    let plain = VariationalProblem::with_nodes(
        delayed.xs().to_vec(),
        delayed.lagrangian().clone(),
        delayed.bc_a().clone(),
        delayed.bc_b().clone(),
    )
    .unwrap();
    let e = Extremal::sample(delayed.xs().to_vec(), grid.clone(), |r, x| {
        (r * x * x / 4.0, (3.0 - r) * x / 2.0)
    })
    .unwrap();
    let g = SymmetryGenerator::parse(None, "x*ql", "qu^2").unwrap();
    let d = conserved_quantity(
        &delayed,
        &g,
        &e.clone().attach_history(&delayed).unwrap(),
        SYM,
        tol(),
    )
    .unwrap();
    let p = conserved_quantity(&plain, &g, &e, SYM, tol()).unwrap();
    assert_eq!(d.formula, Formula::Delayed(SYM));
    assert_eq!(d.segments, vec![(0, 75), (76, 100)]);
    assert!((d.xs[75] - (2.0 - 0.5)).abs() < 1e-15);
    for (u, v) in d.levels.iter().zip(&p.levels) {
        for bound in Bound::BOTH {
            for (s, t) in u.values(bound).iter().zip(v.values(bound)) {
                assert!((s - t).abs() <= 1e-14);
            }
        }
    }
}

#[test]
fn delayed_variants_differ_by_the_advanced_pairing() {
    let grid = LevelGrid::uniform(3).unwrap();
    let p = delayed_problem(("vl*wl", "vu*wl + vu*wu"), &grid);
    let e = Extremal::sample(p.xs().to_vec(), grid.clone(), |r, x| {
        (r * x / 2.0, (3.0 - r) * x * x / 4.0)
    })
    .unwrap()
    .attach_history(&p)
    .unwrap();
    let g = SymmetryGenerator::parse(None, "1", "2").unwrap();
    let sym = conserved_quantity(&p, &g, &e, DelayedNoetherVariant::Symmetric, tol()).unwrap();
    let lit = conserved_quantity(&p, &g, &e, DelayedNoetherVariant::Literal, tol()).unwrap();
    let k = p.delay_shift();
    let split = p.regime_split().unwrap();
    for (level, path) in e.levels().iter().enumerate() {
        for i in 0..p.xs().len() {
            // d6 of the upper Lagrangian is vu, taken k nodes ahead
            let want = if i <= split {
                path.vu[i + k] * (1.0 - 2.0)
            } else {
                0.0
            };
            let got = sym.levels[level].upper[i] - lit.levels[level].upper[i];
            assert!(
                (got - want).abs() < 1e-12,
                "level {level}, node {i}: {got} vs {want}"
            );
            assert_eq!(sym.levels[level].lower[i], lit.levels[level].lower[i]);
        }
    }
}

#[test]
fn delayed_generators_are_checked() {
    let grid = LevelGrid::uniform(3).unwrap();
    let p = delayed_problem(("vl^2", "vu^2"), &grid);
    let e = solve_extremal(&p).unwrap().extremal;
    assert_eq!(
        SymmetryGenerator::zero().history_magnitude(&p).unwrap(),
        0.0
    );
    let shift = SymmetryGenerator::parse(None, "1", "x").unwrap();
    assert!((shift.history_magnitude(&p).unwrap() - 1.0).abs() < 1e-15);
    assert!(matches!(
        conserved_quantity(&p, &dilation_generator(), &e, SYM, tol()),
        Err(NoetherError::TimeWithDelay)
    ));
}
