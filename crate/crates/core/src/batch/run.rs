use std::fmt::{self, Write as _};
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::expr::{parse, ParseError};
use crate::fuzzy::{Bound, FuzzyError, FuzzyNumber, LevelGrid};
use crate::noether::{
    check_invariance, conservation_check, conserved_quantity, ConservationReport,
    ConservationTolerances, DelayedNoetherVariant, Formula, InvarianceOptions, InvarianceReport,
    NoetherError, SymmetryGenerator,
};
use crate::variational::{
    delayed_el_residual, el_residual, solve_extremal_with, Delay, EngineError, Extremal,
    LagrangianSpec, NodeViolation, SolveOptions, VariationalProblem,
};

use super::format::fmt_g12;
use super::{ConfigError, ProblemConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_VERDICT: i32 = 2;

/// Generators whose magnitude on the history window exceeds this draw a warning.
const HISTORY_VANISH_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Solve,
    Invariance,
    Noether,
    Conservation,
}

impl Stage {
    pub const ALL: [Stage; 4] = [
        Stage::Solve,
        Stage::Invariance,
        Stage::Noether,
        Stage::Conservation,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Solve => "solve",
            Stage::Invariance => "invariance",
            Stage::Noether => "noether",
            Stage::Conservation => "conservation",
        }
    }

    /// Parses a comma-separated list such as `solve,noether`.
    pub fn parse_list(text: &str) -> Result<Vec<Stage>, String> {
        let mut out = Vec::new();
        for part in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let stage: Stage = part.parse()?;
            if !out.contains(&stage) {
                out.push(stage);
            }
        }
        if out.is_empty() {
            return Err("no stages given".into());
        }
        Ok(out)
    }
}

impl FromStr for Stage {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Stage::ALL
            .into_iter()
            .find(|st| st.name() == s)
            .ok_or_else(|| {
                format!("unknown stage `{s}` (expected solve, invariance, noether, conservation)")
            })
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunOptions {
    pub stages: Vec<Stage>,
    /// Let a failed invariance fit fail the run.
    pub require_invariance: bool,
    /// Output directory; falls back to the config's `output`, then `out`.
    pub out: Option<PathBuf>,
    pub nodes: Option<usize>,
    pub levels: Option<usize>,
    pub variant: DelayedNoetherVariant,
    /// Extra lines for the report, such as a catalog entry's remarks.
    pub notes: Vec<String>,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            stages: Stage::ALL.to_vec(),
            require_invariance: false,
            out: None,
            nodes: None,
            levels: None,
            variant: DelayedNoetherVariant::Symmetric,
            notes: Vec::new(),
        }
    }
}

impl RunOptions {
    /// The configuration with the node and level overrides applied.
    pub fn effective(&self, config: &ProblemConfig) -> ProblemConfig {
        let mut c = config.clone();
        if let Some(n) = self.nodes {
            c.nodes = n;
        }
        if let Some(m) = self.levels {
            c.levels = m;
        }
        c
    }

    fn wants(&self, stage: Stage) -> bool {
        self.stages.contains(&stage)
    }
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error("cannot read {}: {source}", path.display())]
    Read { path: PathBuf, source: io::Error },
    #[error("{}: {source}", path.display())]
    Config { path: PathBuf, source: ConfigError },
    #[error("cannot write {}: {source}", path.display())]
    Write { path: PathBuf, source: io::Error },
    #[error("{what}: {source}")]
    Expr {
        what: &'static str,
        source: ParseError,
    },
    #[error(transparent)]
    Fuzzy(#[from] FuzzyError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Noether(#[from] NoetherError),
    #[error("{0}")]
    Options(String),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        EXIT_ERROR
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StageVerdict {
    pub stage: Stage,
    pub passed: bool,
    /// Whether this verdict enters the exit status.
    pub counted: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SolveSummary {
    pub converged: bool,
    pub consistent: bool,
    pub tol_consistent: f64,
    pub max_iterations: usize,
    /// Max |R| per equation over all levels, recomputed from the extremal.
    pub residual_max: [f64; 4],
    pub fuzzy_violation: Option<NodeViolation>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FailedFit {
    pub r: f64,
    pub bound: Bound,
    pub interval: (f64, f64),
    pub slope: Option<f64>,
    pub deltas: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InvarianceSummary {
    pub invariant: bool,
    pub epsilons: Vec<f64>,
    pub skipped_epsilons: Vec<f64>,
    pub min_slope: Option<f64>,
    pub max_delta: f64,
    pub slope_threshold: f64,
    pub failed_fits: Vec<FailedFit>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VariantCheck {
    pub variant: DelayedNoetherVariant,
    pub conserved: bool,
    pub max_dcdx: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConservationSummary {
    pub formula: Formula,
    pub conserved: bool,
    pub max_dcdx: f64,
    pub max_relative_span: f64,
    pub tolerances: ConservationTolerances,
    pub worst_r: f64,
    pub worst_bound: Bound,
    pub worst_node: usize,
    /// Per level, the mean of `[C_lower, C_upper]` over the last regime.
    pub constants: Vec<(f64, [f64; 2])>,
    /// For delayed problems, how each pairing of the advanced term fares.
    pub variants: Vec<VariantCheck>,
}

/// Machine-readable summary of a run, also written as `run.json`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunReport {
    pub exit_status: i32,
    pub a: f64,
    pub b: f64,
    pub nodes: usize,
    pub levels: usize,
    pub tau_d: Option<f64>,
    pub stages: Vec<StageVerdict>,
    pub solve: Option<SolveSummary>,
    pub invariance: Option<InvarianceSummary>,
    pub conservation: Option<ConservationSummary>,
    pub output_dir: PathBuf,
    /// File names written into `output_dir`.
    pub files: Vec<String>,
    pub warnings: Vec<String>,
}

/// Reads, parses and runs a configuration file.
pub fn run_file(path: &Path, options: &RunOptions) -> Result<RunReport, RunError> {
    let text = fs::read_to_string(path).map_err(|source| RunError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    let config = ProblemConfig::parse(&text).map_err(|source| RunError::Config {
        path: path.to_path_buf(),
        source,
    })?;
    run_config(&config, options)
}

/// Builds the problem and the generator a configuration describes.
pub fn build_problem(
    config: &ProblemConfig,
) -> Result<(VariationalProblem, SymmetryGenerator), RunError> {
    let expr = |what: &'static str, text: &str| {
        parse(text).map_err(|source| RunError::Expr { what, source })
    };
    let grid = LevelGrid::uniform(config.levels)?;
    let lagrangian = LagrangianSpec::new(
        expr("L_lower", &config.l_lower)?,
        expr("L_upper", &config.l_upper)?,
    );
    let tri = |t: &[super::Constant; 3]| {
        FuzzyNumber::triangular(t[0].value, t[1].value, t[2].value, &grid)
    };
    let bc_a = tri(&config.q_a)?;
    let bc_b = tri(&config.q_b)?;
    let (a, b, n) = (config.a.value, config.b.value, config.nodes);
    let problem = match &config.delay {
        None => VariationalProblem::uniform(a, b, n, lagrangian, bc_a, bc_b)?,
        Some(d) => {
            let h = (b - a) / n as f64;
            let mut xs: Vec<f64> = (0..=n).map(|i| a + h * i as f64).collect();
            xs[n] = b;
            let delay = Delay::new(
                d.tau_d.value,
                expr("psi_lower", &d.psi_lower)?,
                expr("psi_upper", &d.psi_upper)?,
            );
            VariationalProblem::delayed(xs, lagrangian, bc_a, bc_b, delay)?
        }
    };
    let g = &config.generator;
    let generator = SymmetryGenerator::parse(g.tau.as_deref(), &g.zeta_lower, &g.zeta_upper)?;
    Ok((problem, generator))
}

/// Runs the requested stages and writes `extremal.csv`, `conserved.csv`,
/// `report.txt` and `run.json` into the output directory.
///
/// Solving always happens since every other stage needs the extremal.
/// Verdict failures are reported through `exit_status`; errors abort.
pub fn run_config(config: &ProblemConfig, options: &RunOptions) -> Result<RunReport, RunError> {
    if options.stages.is_empty() {
        return Err(RunError::Options("no stages requested".into()));
    }
    let config = options.effective(config);
    if config.nodes < 2 || config.levels < 2 {
        return Err(RunError::Options(
            "need at least 2 nodes and 2 levels".into(),
        ));
    }
    let (problem, generator) = build_problem(&config)?;
    let tol = &config.tolerances;
    let mut warnings = Vec::new();
    let mut verdicts = Vec::new();

    if problem.is_delayed() {
        let m = generator.history_magnitude(&problem)?;
        if m > HISTORY_VANISH_TOL {
            warnings.push(format!(
                "generator does not vanish on the history window (max magnitude {})",
                fmt_g12(m)
            ));
        }
    }

    let solve_options = SolveOptions {
        max_iter: tol.max_iter.unwrap_or(SolveOptions::default().max_iter),
        ..SolveOptions::default()
    };
    let solution = solve_extremal_with(&problem, &solve_options)?;
    let extremal = &solution.extremal;
    let diag = &solution.diagnostics;
    let residuals = if problem.is_delayed() {
        delayed_el_residual(&problem, extremal)?
    } else {
        el_residual(&problem, extremal)?
    };
    let solve = SolveSummary {
        converged: diag.converged,
        consistent: diag.consistent,
        tol_consistent: diag.tol_consistent,
        max_iterations: diag.levels.iter().map(|l| l.iterations).max().unwrap_or(0),
        residual_max: residuals.max_abs_per_equation(),
        fuzzy_violation: diag.fuzzy_violation,
    };
    let solve_ok = solve.consistent && solve.fuzzy_violation.is_none();
    verdicts.push(StageVerdict {
        stage: Stage::Solve,
        passed: solve_ok,
        counted: options.wants(Stage::Solve),
        detail: match (solve.consistent, solve.fuzzy_violation) {
            (_, Some(v)) => format!(
                "extremal is not a fuzzy number at node {}, level index {}: {}",
                v.node, v.level, v.violation.condition
            ),
            (false, None) => format!(
                "least-squares only: max residual {} exceeds {}",
                fmt_g12(diag.max_residual()),
                fmt_g12(diag.tol_consistent)
            ),
            (true, None) => "all four equations satisfied".into(),
        },
    });

    let invariance = if options.wants(Stage::Invariance) || options.require_invariance {
        let defaults = InvarianceOptions::default();
        let inv_options = InvarianceOptions {
            slope_tol: tol
                .slope_tol
                .as_ref()
                .map_or(defaults.slope_tol, |c| c.value),
            floor: tol.delta_floor.as_ref().map_or(defaults.floor, |c| c.value),
            ..defaults
        };
        let report = check_invariance(&problem, &generator, extremal, &inv_options)?;
        let summary = summarize_invariance(&report, 2.0 - inv_options.slope_tol);
        verdicts.push(StageVerdict {
            stage: Stage::Invariance,
            passed: summary.invariant,
            counted: options.require_invariance,
            detail: if summary.invariant {
                "every slope fit passed".into()
            } else {
                format!(
                    "{} slope fit(s) below {}",
                    summary.failed_fits.len(),
                    fmt_g12(summary.slope_threshold)
                )
            },
        });
        Some(summary)
    } else {
        None
    };

    let tolerances = {
        let d = ConservationTolerances::default();
        ConservationTolerances {
            tol_cons: tol.tol_cons.as_ref().map_or(d.tol_cons, |c| c.value),
            tol_span: tol.tol_span.as_ref().map_or(d.tol_span, |c| c.value),
        }
    };
    let conserved = if options.wants(Stage::Noether) || options.wants(Stage::Conservation) {
        Some(conserved_quantity(
            &problem,
            &generator,
            extremal,
            options.variant,
            tolerances,
        )?)
    } else {
        None
    };
    if let Some(report) = &conserved {
        verdicts.push(StageVerdict {
            stage: Stage::Noether,
            passed: true,
            counted: options.wants(Stage::Noether),
            detail: format!("evaluated the {} formula", formula_name(report.formula)),
        });
    }
    let conservation = match &conserved {
        Some(report) if options.wants(Stage::Conservation) => {
            let summary =
                summarize_conservation(&problem, &generator, extremal, report, options.variant)?;
            verdicts.push(StageVerdict {
                stage: Stage::Conservation,
                passed: summary.conserved,
                counted: true,
                detail: format!(
                    "max |dC/dx| {} (tol {}), max relative span {} (tol {})",
                    fmt_g12(summary.max_dcdx),
                    fmt_g12(tolerances.tol_cons),
                    fmt_g12(summary.max_relative_span),
                    fmt_g12(tolerances.tol_span)
                ),
            });
            Some(summary)
        }
        _ => None,
    };

    let exit_status = if verdicts.iter().all(|v| v.passed || !v.counted) {
        EXIT_OK
    } else {
        EXIT_VERDICT
    };
    let out = options
        .out
        .clone()
        .or_else(|| config.output.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));
    fs::create_dir_all(&out).map_err(|source| RunError::Write {
        path: out.clone(),
        source,
    })?;

    let mut report = RunReport {
        exit_status,
        a: problem.a(),
        b: problem.b(),
        nodes: problem.subintervals(),
        levels: problem.grid().len(),
        tau_d: problem.delay().map(|d| d.tau_d),
        stages: verdicts,
        solve: Some(solve),
        invariance,
        conservation,
        output_dir: out.clone(),
        files: Vec::new(),
        warnings,
    };
    let write = |name: &str, body: String| -> Result<(), RunError> {
        let path = out.join(name);
        fs::write(&path, body).map_err(|source| RunError::Write { path, source })
    };
    write("extremal.csv", extremal_csv(extremal))?;
    report.files.push("extremal.csv".into());
    if let Some(c) = &conserved {
        write("conserved.csv", conserved_csv(c))?;
        report.files.push("conserved.csv".into());
    }
    report
        .files
        .extend(["report.txt".into(), "run.json".into()]);
    write(
        "report.txt",
        render_report(&config, &report, &options.notes),
    )?;
    write(
        "run.json",
        serde_json::to_string_pretty(&report).expect("report serializes") + "\n",
    )?;
    Ok(report)
}

fn formula_name(f: Formula) -> &'static str {
    match f {
        Formula::WithoutTime => "without-time",
        Formula::General => "general (with time generator)",
        Formula::Delayed(DelayedNoetherVariant::Symmetric) => "delayed (symmetric)",
        Formula::Delayed(DelayedNoetherVariant::Literal) => "delayed (literal)",
    }
}

fn summarize_invariance(report: &InvarianceReport, threshold: f64) -> InvarianceSummary {
    InvarianceSummary {
        invariant: report.invariant,
        epsilons: report.epsilons.clone(),
        skipped_epsilons: report.skipped.clone(),
        min_slope: report.min_slope(),
        max_delta: report.max_delta(),
        slope_threshold: threshold,
        failed_fits: report
            .fits
            .iter()
            .filter(|f| !f.invariant)
            .map(|f| FailedFit {
                r: f.r,
                bound: f.bound,
                interval: f.interval,
                slope: f.slope,
                deltas: f.deltas.clone(),
            })
            .collect(),
    }
}

fn summarize_conservation(
    problem: &VariationalProblem,
    generator: &SymmetryGenerator,
    extremal: &Extremal,
    report: &ConservationReport,
    chosen: DelayedNoetherVariant,
) -> Result<ConservationSummary, RunError> {
    let verdict = conservation_check(report);
    let last = *report.segments.last().expect("at least one segment");
    let constants = report
        .levels
        .iter()
        .map(|l| {
            let mean =
                |c: &[f64]| c[last.0..=last.1].iter().sum::<f64>() / (last.1 - last.0 + 1) as f64;
            (l.r, [mean(&l.lower), mean(&l.upper)])
        })
        .collect();
    let mut variants = Vec::new();
    if let Formula::Delayed(_) = report.formula {
        for variant in [
            DelayedNoetherVariant::Symmetric,
            DelayedNoetherVariant::Literal,
        ] {
            let v = if variant == chosen {
                verdict
            } else {
                conservation_check(&conserved_quantity(
                    problem,
                    generator,
                    extremal,
                    variant,
                    report.tolerances,
                )?)
            };
            variants.push(VariantCheck {
                variant,
                conserved: v.conserved,
                max_dcdx: v.max_dcdx,
            });
        }
    }
    Ok(ConservationSummary {
        formula: report.formula,
        conserved: verdict.conserved,
        max_dcdx: verdict.max_dcdx,
        max_relative_span: verdict.max_relative_span,
        tolerances: report.tolerances,
        worst_r: report.levels[verdict.worst_level].r,
        worst_bound: verdict.worst_bound,
        worst_node: verdict.worst_node,
        constants,
        variants,
    })
}

/// `r,x,q_lower,q_upper,v_lower,v_upper`, one block of `N + 1` rows per level.
pub fn extremal_csv(extremal: &Extremal) -> String {
    let mut s = String::from("r,x,q_lower,q_upper,v_lower,v_upper\n");
    for (path, r) in extremal.levels().iter().zip(extremal.grid().iter()) {
        for (i, &x) in extremal.xs().iter().enumerate() {
            let row = [r, x, path.ql[i], path.qu[i], path.vl[i], path.vu[i]];
            push_row(&mut s, &row);
        }
    }
    s
}

/// `r,x,C_lower,C_upper`, one block of `N + 1` rows per level.
pub fn conserved_csv(report: &ConservationReport) -> String {
    let mut s = String::from("r,x,C_lower,C_upper\n");
    for level in &report.levels {
        for (i, &x) in report.xs.iter().enumerate() {
            push_row(&mut s, &[level.r, x, level.lower[i], level.upper[i]]);
        }
    }
    s
}

fn push_row(s: &mut String, row: &[f64]) {
    for (j, v) in row.iter().enumerate() {
        if j > 0 {
            s.push(',');
        }
        s.push_str(&fmt_g12(*v));
    }
    s.push('\n');
}

fn render_report(config: &ProblemConfig, report: &RunReport, notes: &[String]) -> String {
    let mut s = String::new();
    // writing to a String cannot fail
    let _ = writeln!(s, "fuzzy-noether run report");
    let _ = writeln!(s);
    let _ = writeln!(
        s,
        "interval [{}, {}] = [{}, {}], N = {} subintervals, {} levels",
        config.a,
        config.b,
        fmt_g12(report.a),
        fmt_g12(report.b),
        report.nodes,
        report.levels
    );
    let _ = writeln!(s, "L_lower = {}", config.l_lower);
    let _ = writeln!(s, "L_upper = {}", config.l_upper);
    if let Some(d) = &config.delay {
        let _ = writeln!(
            s,
            "delay tau_d = {}, history ({}, {})",
            d.tau_d, d.psi_lower, d.psi_upper
        );
    }
    let g = &config.generator;
    let _ = writeln!(
        s,
        "generator: tau = {}, zeta = ({}, {})",
        g.tau.as_deref().unwrap_or("none"),
        g.zeta_lower,
        g.zeta_upper
    );
    if !config.header.is_empty() {
        let _ = writeln!(s, "note: {}", config.header.join(" "));
    }
    for note in notes {
        let _ = writeln!(s, "note: {note}");
    }
    let _ = writeln!(s);
    for v in &report.stages {
        let status = match (v.passed, v.counted) {
            (true, _) => "PASS",
            (false, true) => "FAIL",
            (false, false) => "FAIL (not counted)",
        };
        let _ = writeln!(s, "[{}] {status}: {}", v.stage, v.detail);
    }

    if let Some(solve) = &report.solve {
        let _ = writeln!(s);
        let _ = writeln!(s, "solve");
        let _ = writeln!(
            s,
            "  converged: {}, max iterations {}",
            solve.converged, solve.max_iterations
        );
        let _ = writeln!(
            s,
            "  max |R| per equation: {} (tol_consistent {})",
            solve.residual_max.map(fmt_g12).join(", "),
            fmt_g12(solve.tol_consistent)
        );
    }
    if let Some(inv) = &report.invariance {
        let _ = writeln!(s);
        let _ = writeln!(s, "invariance");
        let _ = writeln!(
            s,
            "  epsilons: {}",
            inv.epsilons
                .iter()
                .map(|e| fmt_g12(*e))
                .collect::<Vec<_>>()
                .join(", ")
        );
        if !inv.skipped_epsilons.is_empty() {
            let _ = writeln!(
                s,
                "  skipped (non-monotone transformation): {}",
                inv.skipped_epsilons
                    .iter()
                    .map(|e| fmt_g12(*e))
                    .collect::<Vec<_>>()
                    .join(", ")
            );
        }
        let _ = writeln!(
            s,
            "  min slope: {}, max discrepancy: {}",
            inv.min_slope
                .map_or("n/a (all below floor)".into(), fmt_g12),
            fmt_g12(inv.max_delta)
        );
        for f in &inv.failed_fits {
            let _ = writeln!(
                s,
                "  failed slope fit: r = {}, {} bound on [{}, {}]: slope {} < {}",
                fmt_g12(f.r),
                f.bound.name(),
                fmt_g12(f.interval.0),
                fmt_g12(f.interval.1),
                f.slope.map_or("n/a".into(), fmt_g12),
                fmt_g12(inv.slope_threshold)
            );
        }
    }
    if let Some(c) = &report.conservation {
        let _ = writeln!(s);
        let _ = writeln!(s, "conservation ({} formula)", formula_name(c.formula));
        let _ = writeln!(
            s,
            "  worst |dC/dx| at r = {}, {} bound, node {}",
            fmt_g12(c.worst_r),
            c.worst_bound.name(),
            c.worst_node
        );
        for (r, [lo, up]) in &c.constants {
            let _ = writeln!(
                s,
                "  r = {}: C_lower = {}, C_upper = {}",
                fmt_g12(*r),
                fmt_g12(*lo),
                fmt_g12(*up)
            );
        }
        for v in &c.variants {
            let _ = writeln!(
                s,
                "  variant {:?}: {} (max |dC/dx| {})",
                v.variant,
                if v.conserved {
                    "conserved"
                } else {
                    "not conserved"
                },
                fmt_g12(v.max_dcdx)
            );
        }
    }
    for w in &report.warnings {
        let _ = writeln!(s, "warning: {w}");
    }
    let _ = writeln!(s);
    let _ = writeln!(s, "exit status {}", report.exit_status);
    let _ = writeln!(s, "files: {}", report.files.join(", "));
    s
}
