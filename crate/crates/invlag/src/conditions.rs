//! Condition suites as residual computations.
//!
//! Every check returns a [`ConditionReport`] whose cells carry the exact
//! residual, so a failure shows the obstruction rather than just a verdict.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::expr::{Expr, ExprContext, ExprError, Var, VarKind};
use crate::geometry::{vertical, GeometryError, SodeGeometry};
use crate::tensor::{Symmetry, TensorField};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConditionError {
    #[error("{what} has dimension {found}, expected {expected}")]
    Dimension { what: String, expected: usize, found: usize },
    #[error("{0} must be a symmetric (0,2) tensor")]
    NotSymmetric(String),
    #[error("omega must be antisymmetric")]
    NotAntisymmetric,
    #[error("omega must depend on positions and parameters only")]
    NotBasic,
    #[error("f{index} depends on jets of order {order}; at most 2 is allowed")]
    JetOrder { index: usize, order: u8 },
    #[error("implicit systems need a context with time and jets up to order 4")]
    Context,
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Expr(#[from] ExprError),
}

/// The named condition sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Suite {
    Classical,
    Dissipative,
    Gyroscopic,
    Thm3,
    Thm4,
    Prop2a,
    Rayleigh,
    Implicit,
}

impl Suite {
    pub const ALL: [Suite; 8] = [
        Suite::Classical,
        Suite::Dissipative,
        Suite::Gyroscopic,
        Suite::Thm3,
        Suite::Thm4,
        Suite::Prop2a,
        Suite::Rayleigh,
        Suite::Implicit,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Classical => "classical",
            Suite::Dissipative => "dissipative",
            Suite::Gyroscopic => "gyroscopic",
            Suite::Thm3 => "thm3",
            Suite::Thm4 => "thm4",
            Suite::Prop2a => "prop2a",
            Suite::Rayleigh => "rayleigh",
            Suite::Implicit => "implicit",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| format!("unknown suite `{s}` (expected one of {})", Suite::ALL.map(Suite::name).join(", ")))
    }
}

/// What a cell's residual must be for the cell to pass.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Expect {
    Zero,
    NonZero,
}

#[derive(Debug, Clone)]
pub struct Cell {
    pub label: String,
    pub residual: Expr,
    pub expect: Expect,
    pub pass: bool,
    terms: Vec<Expr>,
}

impl Cell {
    /// A cell whose residual is the sum of `terms` and must vanish.
    pub fn zero(label: impl Into<String>, terms: Vec<Expr>) -> Cell {
        let residual: Expr = terms.iter().cloned().sum();
        let pass = residual.is_zero();
        Cell { label: label.into(), residual, expect: Expect::Zero, pass, terms }
    }

    /// A cell whose residual must not vanish identically.
    pub fn nonzero(label: impl Into<String>, value: Expr) -> Cell {
        let pass = !value.is_zero();
        Cell { label: label.into(), residual: value.clone(), expect: Expect::NonZero, pass, terms: vec![value] }
    }

    /// The unsummed contributions; their sum is the residual.
    pub fn terms(&self) -> &[Expr] {
        &self.terms
    }

    /// Recomputes the pass flag from the residual alone.
    pub fn recomputed_pass(&self) -> bool {
        match self.expect {
            Expect::Zero => self.residual.is_zero(),
            Expect::NonZero => !self.residual.is_zero(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ConditionReport {
    pub suite: String,
    pub cells: Vec<Cell>,
    pub pass: bool,
    /// det g, when the suite involves a multiplier.
    pub determinant: Option<Expr>,
    pub notes: Vec<String>,
}

impl ConditionReport {
    pub fn new(suite: impl Into<String>, cells: Vec<Cell>) -> Self {
        let pass = cells.iter().all(|c| c.pass);
        ConditionReport { suite: suite.into(), cells, pass, determinant: None, notes: Vec::new() }
    }

    pub fn cell(&self, label: &str) -> Option<&Cell> {
        self.cells.iter().find(|c| c.label == label)
    }

    pub fn failing(&self) -> impl Iterator<Item = &Cell> {
        self.cells.iter().filter(|c| !c.pass)
    }

    /// Whether any failing cell's label starts with `prefix`.
    pub fn fails_on(&self, prefix: &str) -> bool {
        self.failing().any(|c| c.label.starts_with(prefix))
    }

    /// Pass flags as the residuals dictate.
    pub fn is_consistent(&self) -> bool {
        self.cells.iter().all(|c| c.pass == c.recomputed_pass()) && self.pass == self.cells.iter().all(|c| c.pass)
    }

    fn push(&mut self, cell: Cell) {
        self.pass &= cell.pass;
        self.cells.push(cell);
    }

    fn with_regularity(mut self, g: &TensorField) -> Self {
        let det = g.determinant();
        if !det.is_zero() && !det.is_constant() {
            self.notes.push("det g is not constant; it vanishes on a proper subset, where the verdict does not apply".into());
        }
        self.push(Cell::nonzero("Regular", det.clone()));
        self.determinant = Some(det);
        self
    }

    pub fn display<'a>(&'a self, ctx: &'a ExprContext) -> ReportDisplay<'a> {
        ReportDisplay { report: self, ctx, truncate: Some(72) }
    }
}

pub struct ReportDisplay<'a> {
    report: &'a ConditionReport,
    ctx: &'a ExprContext,
    truncate: Option<usize>,
}

impl ReportDisplay<'_> {
    pub fn full(mut self) -> Self {
        self.truncate = None;
        self
    }
}

/// One line per cell, then the verdict.
impl fmt::Display for ReportDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let r = self.report;
        writeln!(f, "suite {}", r.suite)?;
        for c in &r.cells {
            let mut text = self.ctx.print(&c.residual);
            if let Some(max) = self.truncate {
                if text.chars().count() > max {
                    text = text.chars().take(max).collect::<String>() + " ...";
                }
            }
            let status = if c.pass { "pass" } else { "FAIL" };
            writeln!(f, "  {status}  {}: {text}", c.label)?;
        }
        for n in &r.notes {
            writeln!(f, "  note: {n}")?;
        }
        writeln!(f, "{}", if r.pass { "PASS" } else { "FAIL" })
    }
}

fn label(name: &str, ix: &[usize]) -> String {
    let ix: Vec<String> = ix.iter().map(|i| (i + 1).to_string()).collect();
    format!("{name}[{}]", ix.join(","))
}

fn require_symmetric(name: &str, g: &TensorField, n: usize) -> Result<(), ConditionError> {
    if g.shape() != (0, 2) {
        return Err(ConditionError::NotSymmetric(name.into()));
    }
    if g.n() != n {
        return Err(ConditionError::Dimension { what: name.into(), expected: n, found: g.n() });
    }
    if !g.satisfies(Symmetry::Symmetric(0, 1)) {
        return Err(ConditionError::NotSymmetric(name.into()));
    }
    Ok(())
}

fn require_omega(omega: &TensorField, n: usize) -> Result<(), ConditionError> {
    if omega.shape() != (0, 2) || omega.n() != n {
        return Err(ConditionError::Dimension { what: "omega".into(), expected: n, found: omega.n() });
    }
    if !omega.satisfies(Symmetry::Antisymmetric(0, 1)) {
        return Err(ConditionError::NotAntisymmetric);
    }
    if omega.entries().iter().any(|e| e.depends_on_any(|v| !v.is_position() && !v.is_parameter())) {
        return Err(ConditionError::NotBasic);
    }
    Ok(())
}

/// HD1: Vₖ(gᵢⱼ) − Vⱼ(gᵢₖ), for j < k.
pub(crate) fn hd1_cells(n: usize, g: &TensorField) -> Vec<Cell> {
    let mut out = Vec::new();
    for i in 0..n {
        for j in 0..n {
            for k in j + 1..n {
                out.push(Cell::zero(label("HD1", &[i, j, k]), vec![vertical(k, g.at(i, j)), -vertical(j, g.at(i, k))]));
            }
        }
    }
    out
}

/// Γ(gᵢⱼ) − gᵢₖΓᵏⱼ − gⱼₖΓᵏᵢ − extra(i, j), for i ≤ j.
fn nabla_cells(geo: &SodeGeometry, name: &str, g: &TensorField, extra: impl Fn(usize, usize) -> Expr) -> Vec<Cell> {
    let n = geo.n();
    let c = &geo.connection;
    let mut out = Vec::new();
    for i in 0..n {
        for j in i..n {
            let mut terms = vec![geo.gamma(g.at(i, j))];
            for k in 0..n {
                terms.push(-(g.at(i, k) * c.at(k, j)));
                terms.push(-(g.at(j, k) * c.at(k, i)));
            }
            terms.push(-extra(i, j));
            out.push(Cell::zero(label(name, &[i, j]), terms));
        }
    }
    out
}

/// Terms of gᵢₖΦᵏⱼ − gⱼₖΦᵏᵢ.
fn phi_antisym_terms(geo: &SodeGeometry, g: &TensorField, i: usize, j: usize) -> Vec<Expr> {
    let p = &geo.jacobi;
    let mut terms = Vec::new();
    for k in 0..geo.n() {
        terms.push(g.at(i, k) * p.at(k, j));
        terms.push(-(g.at(j, k) * p.at(k, i)));
    }
    terms
}

fn phi_cells(geo: &SodeGeometry, name: &str, g: &TensorField, extra: impl Fn(usize, usize) -> Vec<Expr>) -> Vec<Cell> {
    let n = geo.n();
    let mut out = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let mut terms = phi_antisym_terms(geo, g, i, j);
            terms.extend(extra(i, j).into_iter().map(|e| -e));
            out.push(Cell::zero(label(name, &[i, j]), terms));
        }
    }
    out
}

/// (∂ωᵢⱼ/∂qᵏ + ∂ωⱼₖ/∂qⁱ + ∂ωₖᵢ/∂qʲ)vᵏ, the right-hand side of Hg3 when the
/// left-hand side is the full difference (gΦ)ᵢⱼ − (gΦ)ⱼᵢ.
pub(crate) fn hg3_rhs(n: usize, omega: &TensorField, i: usize, j: usize) -> Vec<Expr> {
    let mut terms = Vec::new();
    for k in 0..n {
        let d = omega.at(i, j).diff(Var::q(k + 1)) + omega.at(j, k).diff(Var::q(i + 1)) + omega.at(k, i).diff(Var::q(j + 1));
        if !d.is_zero() {
            terms.push(&d * &Expr::var(Var::v(k + 1)));
        }
    }
    terms
}

/// The g-weighted cyclic curvature sum gᵢⱼRʲₖₗ + gₗⱼRʲᵢₖ + gₖⱼRʲₗᵢ.
pub(crate) fn rcycle_terms(geo: &SodeGeometry, g: &TensorField, i: usize, k: usize, l: usize) -> Vec<Expr> {
    let r = &geo.curvature;
    let mut terms = Vec::new();
    for j in 0..geo.n() {
        terms.push(g.at(i, j) * r.at3(j, k, l));
        terms.push(g.at(l, j) * r.at3(j, i, k));
        terms.push(g.at(k, j) * r.at3(j, l, i));
    }
    terms
}

/// Hᵢ(gⱼₖ) − Hⱼ(gᵢₖ) + gᵢₗθˡⱼₖ − gⱼₗθˡᵢₖ, for i < j.
fn dh_cells(geo: &SodeGeometry, g: &TensorField) -> Vec<Cell> {
    let n = geo.n();
    let th = &geo.theta;
    let mut out = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            for k in 0..n {
                let mut terms = vec![geo.horizontal(i, g.at(j, k)), -geo.horizontal(j, g.at(i, k))];
                for l in 0..n {
                    terms.push(g.at(i, l) * th.at3(l, j, k));
                    terms.push(-(g.at(j, l) * th.at3(l, i, k)));
                }
                out.push(Cell::zero(label("DHSym", &[i, j, k]), terms));
            }
        }
    }
    out
}

fn rcond_cells(geo: &SodeGeometry, g: &TensorField) -> Vec<Cell> {
    let n = geo.n();
    let mut out = Vec::new();
    for i in 0..n {
        for k in i + 1..n {
            for l in k + 1..n {
                out.push(Cell::zero(label("Rcond", &[i, k, l]), rcycle_terms(geo, g, i, k, l)));
            }
        }
    }
    out
}

/// gₗⱼΦʲₖ − gₖⱼΦʲₗ − (gᵢⱼRʲₖₗ + gₗⱼRʲᵢₖ + gₖⱼRʲₗᵢ)vⁱ, for k < l.
fn rcond2_cells(geo: &SodeGeometry, g: &TensorField) -> Vec<Cell> {
    let n = geo.n();
    let mut out = Vec::new();
    for k in 0..n {
        for l in k + 1..n {
            let mut terms = phi_antisym_terms(geo, g, l, k);
            for i in 0..n {
                let vi = Expr::var(Var::v(i + 1));
                terms.extend(rcycle_terms(geo, g, i, k, l).into_iter().map(|t| -(&t * &vi)));
            }
            out.push(Cell::zero(label("Rcond2", &[k, l]), terms));
        }
    }
    out
}

/// Residual cells of a multiplier suite, without the regularity cell.
/// Every residual is linear in `g` (and in `omega` for the gyroscopic suite).
pub(crate) fn multiplier_cells(
    geo: &SodeGeometry,
    suite: Suite,
    g: &TensorField,
    omega: Option<&TensorField>,
) -> Vec<Cell> {
    let n = geo.n();
    let mut cells = if suite == Suite::Rayleigh { Vec::new() } else { hd1_cells(n, g) };
    match suite {
        Suite::Classical => {
            cells.extend(nabla_cells(geo, "NablaG", g, |_, _| Expr::zero()));
            cells.extend(phi_cells(geo, "PhiSym", g, |_, _| Vec::new()));
        }
        Suite::Prop2a => cells.extend(nabla_cells(geo, "NablaG", g, |_, _| Expr::zero())),
        Suite::Thm3 => {
            cells.extend(dh_cells(geo, g));
            cells.extend(rcond_cells(geo, g));
        }
        Suite::Thm4 => {
            cells.extend(nabla_cells(geo, "NablaG", g, |_, _| Expr::zero()));
            cells.extend(rcond2_cells(geo, g));
        }
        Suite::Gyroscopic => {
            let zero = TensorField::zeros(0, 2, n);
            let omega = omega.unwrap_or(&zero);
            cells.extend(nabla_cells(geo, "Hg2", g, |_, _| Expr::zero()));
            cells.extend(phi_cells(geo, "Hg3", g, |i, j| hg3_rhs(n, omega, i, j)));
        }
        Suite::Rayleigh => {
            let ng = geo.nabla02(g).expect("shape checked");
            for i in 0..n {
                for j in i..n {
                    for k in 0..n {
                        cells.push(Cell::zero(label("Rayleigh", &[i, j, k]), vec![vertical(k, ng.at(i, j))]));
                    }
                }
            }
        }
        Suite::Dissipative | Suite::Implicit => unreachable!("not a multiplier-only suite"),
    }
    cells
}

fn multiplier_report(
    geo: &SodeGeometry,
    suite: Suite,
    g: &TensorField,
    omega: Option<&TensorField>,
) -> Result<ConditionReport, ConditionError> {
    require_symmetric("g", g, geo.n())?;
    if let Some(w) = omega {
        require_omega(w, geo.n())?;
    }
    let report = ConditionReport::new(suite.name(), multiplier_cells(geo, suite, g, omega));
    Ok(report.with_regularity(g))
}

/// Classical Helmholtz conditions: HD1, ∇g = 0 and gΦ symmetric.
pub fn check_classical(geo: &SodeGeometry, g: &TensorField) -> Result<ConditionReport, ConditionError> {
    multiplier_report(geo, Suite::Classical, g, None)
}

/// Conditions (HD1)–(HD3) for a multiplier and dissipation function.
pub fn check_dissipative(geo: &SodeGeometry, g: &TensorField, d: &Expr) -> Result<ConditionReport, ConditionError> {
    let n = geo.n();
    require_symmetric("g", g, n)?;
    let vd: Vec<Expr> = (0..n).map(|i| vertical(i, d)).collect();
    let mut cells = hd1_cells(n, g);
    cells.extend(nabla_cells(geo, "HD2", g, |i, j| vertical(i, &vd[j])));
    cells.extend(phi_cells(geo, "HD3", g, |i, j| {
        vec![geo.horizontal(i, &vd[j]), -geo.horizontal(j, &vd[i])]
    }));
    Ok(ConditionReport::new(Suite::Dissipative.name(), cells).with_regularity(g))
}

/// Conditions HD1, (Hg2), (Hg3) for a multiplier and a basic 2-form.
pub fn check_gyroscopic(geo: &SodeGeometry, g: &TensorField, omega: &TensorField) -> Result<ConditionReport, ConditionError> {
    multiplier_report(geo, Suite::Gyroscopic, g, Some(omega))
}

/// Conditions on g alone for a dissipative representation.
pub fn check_multiplier_dissipative(geo: &SodeGeometry, g: &TensorField) -> Result<ConditionReport, ConditionError> {
    multiplier_report(geo, Suite::Thm3, g, None)
}

/// Conditions on g alone for a gyroscopic representation. The converse
/// direction also needs Φ⌟g smooth on the zero section; within rational
/// functions that holds unless a denominator vanishes identically at v = 0,
/// which is reported as a `ZeroSection` cell.
pub fn check_multiplier_gyroscopic(geo: &SodeGeometry, g: &TensorField) -> Result<ConditionReport, ConditionError> {
    let mut report = multiplier_report(geo, Suite::Thm4, g, None)?;
    let n = geo.n();
    let at_rest: std::collections::HashMap<Var, Expr> = (1..=n).map(|k| (Var::v(k), Expr::zero())).collect();
    for i in 0..n {
        for j in 0..n {
            let gp: Expr = (0..n).map(|k| g.at(i, k) * geo.jacobi.at(k, j)).sum();
            for (name, e) in [("g", g.at(i, j)), ("gPhi", &gp)] {
                if e.denom().is_constant() {
                    continue;
                }
                let den = Expr::from_poly(e.denom().clone()).subst(&at_rest)?;
                report.push(Cell::nonzero(label(&format!("ZeroSection.{name}"), &[i, j]), den));
            }
        }
    }
    Ok(report)
}

/// HD1 and ∇g = 0 only.
pub fn check_prop2a(geo: &SodeGeometry, g: &TensorField) -> Result<ConditionReport, ConditionError> {
    multiplier_report(geo, Suite::Prop2a, g, None)
}

/// Vₖ((∇g)ᵢⱼ) = 0: the dissipation function is quadratic in v.
pub fn check_rayleigh(geo: &SodeGeometry, g: &TensorField) -> Result<ConditionReport, ConditionError> {
    let mut report = multiplier_report(geo, Suite::Rayleigh, g, None)?;
    if !check_multiplier_dissipative(geo, g)?.pass {
        report.notes.push("g does not satisfy the thm3 conditions, so no dissipative representation uses it".into());
    }
    Ok(report)
}

/// A second-order system in implicit form fᵢ(t, q, q̇, q̈) = 0.
#[derive(Clone, Debug)]
pub struct ImplicitSystem {
    ctx: ExprContext,
    f: Vec<Expr>,
}

fn jet_orders(e: &Expr) -> impl Iterator<Item = u8> {
    e.vars().into_iter().filter(|v| matches!(v.kind(), VarKind::Position | VarKind::Jet)).map(Var::order)
}

impl ImplicitSystem {
    pub fn new(ctx: ExprContext, f: Vec<Expr>) -> Result<Self, ConditionError> {
        if !ctx.uses_time() || ctx.max_jet_order() < Var::MAX_JET_ORDER {
            return Err(ConditionError::Context);
        }
        if f.len() != ctx.n() {
            return Err(ConditionError::Dimension { what: "f".into(), expected: ctx.n(), found: f.len() });
        }
        for (i, fi) in f.iter().enumerate() {
            if let Some(order) = jet_orders(fi).find(|&o| o > 2) {
                return Err(ConditionError::JetOrder { index: i + 1, order });
            }
        }
        Ok(ImplicitSystem { ctx, f })
    }

    pub fn parse(ctx: ExprContext, f: &[&str]) -> Result<Self, ConditionError> {
        let f = f.iter().map(|s| ctx.parse(s)).collect::<Result<Vec<_>, _>>()?;
        Self::new(ctx, f)
    }

    pub fn n(&self) -> usize {
        self.ctx.n()
    }

    pub fn ctx(&self) -> &ExprContext {
        &self.ctx
    }

    pub fn f(&self) -> &[Expr] {
        &self.f
    }
}

/// d/dt = ∂/∂t + Σ jet_{k+1} ∂/∂jet_k.
pub fn total_derivative(e: &Expr) -> Expr {
    let mut acc = e.diff(Var::time());
    for v in e.vars() {
        if let Some(next) = v.next_jet() {
            acc = acc + &Expr::var(next) * &e.diff(v);
        }
    }
    acc
}

fn acc_var(i: usize) -> Var {
    Var::jet(i + 1, 2)
}

/// The coefficients r, s, t of δε for the source form with components f.
pub struct SourceCoefficients {
    pub r: TensorField,
    pub s: TensorField,
    pub t: TensorField,
}

pub fn source_coefficients(sys: &ImplicitSystem) -> SourceCoefficients {
    let n = sys.n();
    let f = &sys.f;
    let half = Expr::ratio(1, 2);
    let t = TensorField::from_fn(0, 2, n, |ix| {
        let (i, j) = (ix[0], ix[1]);
        f[i].diff(acc_var(j)) - f[j].diff(acc_var(i))
    });
    let r = TensorField::from_fn(0, 2, n, |ix| {
        let (i, j) = (ix[0], ix[1]);
        let a = f[i].diff(Var::q(j + 1)) - f[j].diff(Var::q(i + 1));
        let b = total_derivative(&(f[i].diff(Var::v(j + 1)) - f[j].diff(Var::v(i + 1))));
        let c = total_derivative(&total_derivative(t.at(i, j)));
        a - &half * &b + &half * &c
    });
    let s = TensorField::from_fn(0, 2, n, |ix| {
        let (i, j) = (ix[0], ix[1]);
        f[i].diff(Var::v(j + 1)) + f[j].diff(Var::v(i + 1)) - total_derivative(&f[j].diff(acc_var(i))).scale(&crate::expr::rat(2))
    });
    SourceCoefficients { r, s, t }
}

/// Residual that vanishes iff `e` is free of jets of order ≥ 2.
fn first_order_terms(e: &Expr) -> Vec<Expr> {
    let higher: Vec<Var> = e.vars().into_iter().filter(|v| v.is_higher_jet()).collect();
    if higher.is_empty() {
        return vec![];
    }
    let at_zero: std::collections::HashMap<Var, Expr> = higher.iter().map(|&v| (v, Expr::zero())).collect();
    match e.subst(&at_zero) {
        Ok(base) => vec![e.clone(), -base],
        // a pole on the zero section of the higher jets: fall back to the
        // partial derivatives, which all vanish iff e is first order
        Err(_) => higher.iter().map(|&v| {
            let d = e.diff(v);
            &d * &d
        }).collect(),
    }
}

/// The generalized Helmholtz conditions for an implicit system, plus the
/// equivalent reduced conditions on fᵢ = gᵢⱼq̈ʲ + hᵢ as an independent
/// cross-check.
pub fn check_implicit(sys: &ImplicitSystem) -> ConditionReport {
    let n = sys.n();
    let SourceCoefficients { r, s, t } = source_coefficients(sys);
    let half = Expr::ratio(1, 2);
    let q = |k: usize| Var::q(k + 1);
    let v = |k: usize| Var::v(k + 1);
    let mut cells = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            cells.push(Cell::zero(label("t", &[i, j]), vec![t.at(i, j).clone()]));
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            cells.push(Cell::zero(label("SSym", &[i, j]), vec![s.at(i, j).clone(), -s.at(j, i)]));
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            cells.push(Cell::zero(label("FirstOrder.r", &[i, j]), first_order_terms(r.at(i, j))));
        }
    }
    for i in 0..n {
        for j in 0..n {
            cells.push(Cell::zero(label("FirstOrder.s", &[i, j]), first_order_terms(s.at(i, j))));
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                cells.push(Cell::zero(
                    label("Closure1", &[i, j, k]),
                    vec![r.at(i, j).diff(q(k)), r.at(j, k).diff(q(i)), r.at(k, i).diff(q(j))],
                ));
            }
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            for k in 0..n {
                cells.push(Cell::zero(
                    label("Closure2", &[i, j, k]),
                    vec![r.at(i, j).diff(v(k)), -(&half * &s.at(i, k).diff(q(j))), &half * &s.at(j, k).diff(q(i))],
                ));
            }
        }
    }
    for i in 0..n {
        for j in 0..n {
            for k in j + 1..n {
                cells.push(Cell::zero(label("Closure3", &[i, j, k]), vec![s.at(i, j).diff(v(k)), -s.at(i, k).diff(v(j))]));
            }
        }
    }
    cells.extend(reduced_cells(sys));
    ConditionReport::new(Suite::Implicit.name(), cells)
}

/// The reduced form of the conditions, on fᵢ = gᵢⱼq̈ʲ + hᵢ.
fn reduced_cells(sys: &ImplicitSystem) -> Vec<Cell> {
    let n = sys.n();
    let f = &sys.f;
    let q = |k: usize| Var::q(k + 1);
    let v = |k: usize| Var::v(k + 1);
    let half = Expr::ratio(1, 2);
    let mut cells = Vec::new();
    for i in 0..n {
        for j in 0..n {
            for k in j..n {
                cells.push(Cell::zero(label("Reduced.Affine", &[i, j, k]), vec![f[i].diff(acc_var(j)).diff(acc_var(k))]));
            }
        }
    }
    let g = TensorField::from_fn(0, 2, n, |ix| f[ix[0]].diff(acc_var(ix[1])));
    let h: Vec<Expr> = (0..n)
        .map(|i| {
            let mut acc = f[i].clone();
            for j in 0..n {
                acc = acc - g.at(i, j) * &Expr::var(acc_var(j));
            }
            acc
        })
        .collect();
    for i in 0..n {
        for j in i + 1..n {
            cells.push(Cell::zero(label("Reduced.GSym", &[i, j]), vec![g.at(i, j).clone(), -g.at(j, i)]));
        }
    }
    for i in 0..n {
        for j in 0..n {
            for k in j + 1..n {
                cells.push(Cell::zero(label("Reduced.1", &[i, j, k]), vec![g.at(i, j).diff(v(k)), -g.at(i, k).diff(v(j))]));
            }
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            for k in 0..n {
                cells.push(Cell::zero(
                    label("Reduced.2", &[i, j, k]),
                    vec![
                        g.at(i, k).diff(q(j)),
                        -(&half * &h[i].diff(v(j)).diff(v(k))),
                        -g.at(j, k).diff(q(i)),
                        &half * &h[j].diff(v(i)).diff(v(k)),
                    ],
                ));
            }
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                let mut terms = Vec::new();
                for (a, b, c) in [(i, j, k), (j, k, i), (k, i, j)] {
                    terms.push(h[a].diff(q(b)).diff(v(c)));
                    terms.push(-h[a].diff(q(c)).diff(v(b)));
                }
                cells.push(Cell::zero(label("Reduced.3", &[i, j, k]), terms));
            }
        }
    }
    cells
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::tests::{example1, example2};

    fn geo1() -> SodeGeometry {
        SodeGeometry::new(&example1()).unwrap()
    }

    fn g(ctx: &ExprContext, rows: &[&[&str]]) -> TensorField {
        TensorField::from_rows(rows.iter().map(|r| r.iter().map(|s| ctx.parse(s).unwrap()).collect()).collect())
    }

    #[test]
    fn classical_example1() {
        let geo = geo1();
        let ctx = geo.ctx().clone();
        let g2 = g(&ctx, &[&["0", "1"], &["1", "0"]]);
        assert!(check_classical(&geo, &g2).unwrap().pass);
        let id = TensorField::identity(2);
        let rep = check_classical(&geo, &id).unwrap();
        assert!(!rep.pass);
        assert!(!rep.cell("PhiSym[1,2]").unwrap().pass);
        assert!(rep.is_consistent());
        let free = SodeGeometry::new(&crate::geometry::Sode::free(2)).unwrap();
        assert!(check_classical(&free, &id).unwrap().pass);
    }

    #[test]
    fn dissipative_example1() {
        let geo = geo1();
        let ctx = geo.ctx().clone();
        let g1 = g(&ctx, &[&["1", "0"], &["0", "-1"]]);
        let d1 = ctx.parse("-omega*(v1^2 + v2^2)/2").unwrap();
        assert!(check_dissipative(&geo, &g1, &d1).unwrap().pass);
        let d3 = ctx.parse("-a*(q1*v1 + q2*v2) + b*(q1*v2 - q2*v1) + omega*(v2^2 - v1^2)/2").unwrap();
        assert!(check_dissipative(&geo, &TensorField::identity(2), &d3).unwrap().pass);
    }

    #[test]
    fn dissipative_example2() {
        let geo = SodeGeometry::new(&example2()).unwrap();
        let ctx = geo.ctx().clone();
        let gd = TensorField::diagonal(vec![Expr::int(4), Expr::one(), ctx.parse("2*q2").unwrap()]);
        let d = ctx.parse("2*q2*v1^2*v3").unwrap();
        let rep = check_dissipative(&geo, &gd, &d).unwrap();
        assert!(rep.pass, "{}", rep.display(&ctx));
        assert_eq!(rep.determinant, Some(ctx.parse("8*q2").unwrap()));
        assert!(check_multiplier_dissipative(&geo, &gd).unwrap().pass);
        let rep = check_multiplier_dissipative(&geo, &TensorField::identity(3)).unwrap();
        assert!(rep.fails_on("Rcond"));
        assert!(!check_rayleigh(&geo, &gd).unwrap().pass);
        assert!(!check_classical(&geo, &gd).unwrap().pass);
    }

    #[test]
    fn gyroscopic_and_thm4_example1() {
        let geo = geo1();
        let ctx = geo.ctx().clone();
        let g1 = g(&ctx, &[&["1", "0"], &["0", "-1"]]);
        let g2 = g(&ctx, &[&["0", "1"], &["1", "0"]]);
        let w = g(&ctx, &[&["0", "omega"], &["-omega", "0"]]);
        assert!(check_gyroscopic(&geo, &g2, &w).unwrap().pass);
        let rep = check_gyroscopic(&geo, &g1, &w).unwrap();
        assert!(rep.fails_on("Hg2"));
        assert!(check_multiplier_gyroscopic(&geo, &g2).unwrap().pass);
        assert!(check_multiplier_gyroscopic(&geo, &g1).unwrap().fails_on("NablaG"));
        assert!(!check_multiplier_gyroscopic(&geo, &TensorField::identity(2)).unwrap().pass);
        assert!(check_prop2a(&geo, &g2).unwrap().pass);
        assert!(!check_prop2a(&geo, &g1).unwrap().pass);
        assert!(check_rayleigh(&geo, &g1).unwrap().pass);
        // any constant symmetric g satisfies the thm3 conditions here
        for rows in [[["1", "0"], ["0", "-1"]], [["2", "3"], ["3", "7"]]] {
            let rows: Vec<&[&str]> = rows.iter().map(|r| &r[..]).collect();
            assert!(check_multiplier_dissipative(&geo, &g(&ctx, &rows)).unwrap().pass);
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let geo = geo1();
        let ctx = geo.ctx().clone();
        let asym = g(&ctx, &[&["1", "2"], &["0", "1"]]);
        assert_eq!(check_classical(&geo, &asym).unwrap_err(), ConditionError::NotSymmetric("g".into()));
        let sym_w = g(&ctx, &[&["0", "1"], &["1", "0"]]);
        assert_eq!(check_gyroscopic(&geo, &sym_w, &sym_w).unwrap_err(), ConditionError::NotAntisymmetric);
        let v_w = g(&ctx, &[&["0", "v1"], &["-v1", "0"]]);
        assert_eq!(check_gyroscopic(&geo, &sym_w, &v_w).unwrap_err(), ConditionError::NotBasic);
        assert!(matches!(
            check_classical(&geo, &TensorField::identity(3)),
            Err(ConditionError::Dimension { .. })
        ));
    }

    fn implicit(n: usize, f: &[&str]) -> ImplicitSystem {
        ImplicitSystem::parse(ExprContext::implicit(n, &["omega"]).unwrap(), f).unwrap()
    }

    #[test]
    fn implicit_examples() {
        // Euler-Lagrange of ½Σv² minus ∂D/∂v with D = −½ωΣv²
        let rep = check_implicit(&implicit(2, &["d2q1 + omega*v1", "d2q2 + omega*v2"]));
        assert!(rep.pass, "{}", rep.display(&ExprContext::implicit(2, &["omega"]).unwrap()));
        assert!(check_implicit(&implicit(2, &["d2q1 + q1^3", "d2q2 + q2^3"])).pass);
        let rep = check_implicit(&implicit(2, &["d2q1 + v2^2", "d2q2"]));
        assert!(!rep.pass);
        // s stays symmetric; r₁₂ = −q̈2 is what breaks first order
        assert!(rep.cell("SSym[1,2]").unwrap().pass);
        assert!(rep.fails_on("FirstOrder.r") && rep.fails_on("Reduced.2"));
    }

    #[test]
    fn implicit_time_dependent_lagrangian() {
        // L = ½ e(t) v² with D = 0 and a v-dependent metric term
        let rep = check_implicit(&implicit(2, &[
            "t*d2q1 + v1 + q2*d2q2 + v1*v2",
            "q2*d2q1 + d2q2",
        ]));
        assert!(rep.is_consistent());
        let closure = rep.cells.iter().filter(|c| c.label.starts_with("Closure") || c.label.starts_with("FirstOrder")).all(|c| c.pass);
        let reduced = rep.cells.iter().filter(|c| c.label.starts_with("Reduced")).all(|c| c.pass);
        assert_eq!(closure, reduced);
    }

    #[test]
    fn implicit_rejects_third_order() {
        let ctx = ExprContext::implicit(1, &[]).unwrap();
        assert_eq!(
            ImplicitSystem::parse(ctx, &["d3q1"]).unwrap_err(),
            ConditionError::JetOrder { index: 1, order: 3 }
        );
    }

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert!("nope".parse::<Suite>().is_err());
    }
}
