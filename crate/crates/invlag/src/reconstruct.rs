//! Certificates: reconstructing (L, D) or (L, ω) from a multiplier by
//! homotopy integrals, verifying Lagrange residuals, and the forward map
//! from (L, D) to the system it describes.
//!
//! Homotopies are taken around v = 0 in the fibre and q = 0 on the base.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use crate::conditions::{self, Cell, ConditionError, ConditionReport};
use crate::expr::{Expr, ExprContext, ExprError, Var};
use crate::geometry::{vertical, GeometryError, Sode, SodeGeometry};
use crate::tensor::{Symmetry, TensorField};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReconstructError {
    #[error("the {suite} conditions fail ({failing}); no certificate exists for this multiplier")]
    Precondition { suite: String, failing: String },
    #[error("{0} is not polynomial in the velocities")]
    NotPolynomialInV(String),
    #[error("{0} is not polynomial in the positions")]
    NotPolynomialInQ(String),
    #[error("{0} has a denominator vanishing at the base point q = 0")]
    BasePointPole(String),
    #[error("{0} must be symmetric")]
    NotSymmetric(String),
    #[error("{0} has a non-symmetric vertical derivative, so it is not a Hessian")]
    NotHessian(String),
    #[error("{0} is not affine in the velocities")]
    NotAffine(String),
    #[error("{0} depends on the velocities but must be basic")]
    NotBasic(String),
    #[error("{0} is not closed")]
    NotClosed(String),
    #[error("the Hessian of L is singular")]
    Singular,
    #[error("internal error: {0}")]
    Internal(String),
    #[error(transparent)]
    Condition(#[from] ConditionError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Expr(#[from] ExprError),
}

/// gᵢⱼ = ∂²L/∂vⁱ∂vʲ.
pub fn hessian(l: &Expr, n: usize) -> TensorField {
    let first: Vec<Expr> = (0..n).map(|i| vertical(i, l)).collect();
    TensorField::from_fn(0, 2, n, |ix| {
        if ix[0] <= ix[1] {
            vertical(ix[1], &first[ix[0]])
        } else {
            vertical(ix[0], &first[ix[1]])
        }
    })
    .with_symmetry(Symmetry::Symmetric(0, 1))
}

fn homotopy_var() -> Var {
    Var::aux(0)
}

/// ∫₀¹ e ds for e polynomial in the homotopy variable s.
fn unit_integral(e: &Expr) -> Result<Expr, ExprError> {
    e.integrate_poly(homotopy_var())?.subst_one(homotopy_var(), &Expr::one())
}

fn scaling(vars: impl Iterator<Item = Var>) -> HashMap<Var, Expr> {
    let s = Expr::var(homotopy_var());
    vars.map(|v| (v, &s * &Expr::var(v))).collect()
}

/// F with ∂²F/∂vⁱ∂vʲ = Mᵢⱼ and F, ∂F/∂v vanishing at v = 0:
/// F(q, v) = ∫₀¹ (1 − s) Mᵢⱼ(q, s·v) vⁱvʲ ds.
pub fn vertical_homotopy2(m: &TensorField) -> Result<Expr, ReconstructError> {
    let n = m.n();
    if !m.satisfies(Symmetry::Symmetric(0, 1)) {
        return Err(ReconstructError::NotSymmetric("M".into()));
    }
    if m.entries().iter().any(|e| !e.is_polynomial_in(Var::is_velocity)) {
        return Err(ReconstructError::NotPolynomialInV("M".into()));
    }
    for i in 0..n {
        for j in 0..n {
            for k in j + 1..n {
                if vertical(k, m.at(i, j)) != vertical(j, m.at(i, k)) {
                    return Err(ReconstructError::NotHessian("M".into()));
                }
            }
        }
    }
    let scale = scaling((1..=n).map(Var::v));
    let weight = Expr::one() - Expr::var(homotopy_var());
    let mut integrand = Expr::zero();
    for i in 0..n {
        for j in 0..n {
            if m.at(i, j).is_zero() {
                continue;
            }
            let vv = Expr::var(Var::v(i + 1)) * Expr::var(Var::v(j + 1));
            integrand = integrand + m.at(i, j).subst(&scale)? * vv;
        }
    }
    Ok(unit_integral(&(weight * integrand))?)
}

fn require_base_polynomial(what: &str, e: &Expr) -> Result<(), ReconstructError> {
    if e.depends_on_any(|v| !v.is_position() && !v.is_parameter()) {
        return Err(ReconstructError::NotBasic(what.into()));
    }
    if e.is_polynomial_in(Var::is_position) {
        return Ok(());
    }
    let origin: HashMap<Var, Expr> = e.denom().vars().into_iter().filter(|v| v.is_position()).map(|v| (v, Expr::zero())).collect();
    match Expr::from_poly(e.denom().clone()).subst(&origin) {
        Ok(d) if !d.is_zero() => Err(ReconstructError::NotPolynomialInQ(what.into())),
        _ => Err(ReconstructError::BasePointPole(what.into())),
    }
}

/// c with ∂c/∂qⁱ = Aᵢ for a closed basic 1-form A: c = ∫₀¹ Aᵢ(s·q) qⁱ ds.
pub fn base_potential(a: &[Expr]) -> Result<Expr, ReconstructError> {
    let n = a.len();
    for (i, ai) in a.iter().enumerate() {
        require_base_polynomial(&format!("A[{}]", i + 1), ai)?;
    }
    for i in 0..n {
        for j in i + 1..n {
            if a[i].diff(Var::q(j + 1)) != a[j].diff(Var::q(i + 1)) {
                return Err(ReconstructError::NotClosed("1-form".into()));
            }
        }
    }
    let scale = scaling((1..=n).map(Var::q));
    let mut integrand = Expr::zero();
    for (i, ai) in a.iter().enumerate() {
        integrand = integrand + ai.subst(&scale)? * Expr::var(Var::q(i + 1));
    }
    Ok(unit_integral(&integrand)?)
}

/// (dα)ᵢⱼ = ∂ᵢαⱼ − ∂ⱼαᵢ.
pub fn exterior_derivative1(alpha: &[Expr]) -> TensorField {
    TensorField::from_fn(0, 2, alpha.len(), |ix| alpha[ix[1]].diff(Var::q(ix[0] + 1)) - alpha[ix[0]].diff(Var::q(ix[1] + 1)))
}

/// (dω)ᵢⱼₖ = ∂ᵢωⱼₖ + ∂ⱼωₖᵢ + ∂ₖωᵢⱼ.
pub fn exterior_derivative2(omega: &TensorField) -> TensorField {
    let q = |k: usize| Var::q(k + 1);
    TensorField::from_fn(0, 3, omega.n(), |ix| {
        let (i, j, k) = (ix[0], ix[1], ix[2]);
        omega.at(j, k).diff(q(i)) + omega.at(k, i).diff(q(j)) + omega.at(i, j).diff(q(k))
    })
}

/// α with dα = ρ for a closed basic 2-form ρ: αⱼ = ∫₀¹ s ρᵢⱼ(s·q) qⁱ ds.
pub fn base_homotopy2(rho: &TensorField) -> Result<Vec<Expr>, ReconstructError> {
    let n = rho.n();
    if !rho.satisfies(Symmetry::Antisymmetric(0, 1)) {
        return Err(ReconstructError::NotSymmetric("2-form (antisymmetry)".into()));
    }
    for e in rho.entries() {
        require_base_polynomial("2-form", e)?;
    }
    if !exterior_derivative2(rho).is_zero() {
        return Err(ReconstructError::NotClosed("2-form".into()));
    }
    let scale = scaling((1..=n).map(Var::q));
    let s = Expr::var(homotopy_var());
    (0..n)
        .map(|j| {
            let mut integrand = Expr::zero();
            for i in 0..n {
                if !rho.at(i, j).is_zero() {
                    integrand = integrand + rho.at(i, j).subst(&scale)? * Expr::var(Var::q(i + 1));
                }
            }
            Ok(unit_integral(&(&s * &integrand))?)
        })
        .collect()
}

/// ω with dω = ρ for a closed basic 3-form ρ: ωⱼₖ = ∫₀¹ s² ρᵢⱼₖ(s·q) qⁱ ds.
pub fn base_homotopy3(rho: &TensorField) -> Result<TensorField, ReconstructError> {
    let n = rho.n();
    for e in rho.entries() {
        require_base_polynomial("3-form", e)?;
    }
    let q = |k: usize| Var::q(k + 1);
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                for l in k + 1..n {
                    let d = rho.at3(j, k, l).diff(q(i)) - rho.at3(i, k, l).diff(q(j)) + rho.at3(i, j, l).diff(q(k))
                        - rho.at3(i, j, k).diff(q(l));
                    if !d.is_zero() {
                        return Err(ReconstructError::NotClosed("3-form".into()));
                    }
                }
            }
        }
    }
    let scale = scaling((1..=n).map(Var::q));
    let s = Expr::var(homotopy_var());
    let s2 = &s * &s;
    let mut out = TensorField::zeros(0, 2, n);
    for j in 0..n {
        for k in j + 1..n {
            let mut integrand = Expr::zero();
            for i in 0..n {
                if !rho.at3(i, j, k).is_zero() {
                    integrand = integrand + rho.at3(i, j, k).subst(&scale)? * Expr::var(q(i));
                }
            }
            let w = unit_integral(&(&s2 * &integrand))?;
            out.set(&[k, j], -w.clone());
            out.set(&[j, k], w);
        }
    }
    Ok(out.with_symmetry(Symmetry::Antisymmetric(0, 1)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CertificateKind {
    Dissipative,
    Gyroscopic,
    Classical,
}

impl CertificateKind {
    pub fn name(self) -> &'static str {
        match self {
            CertificateKind::Dissipative => "dissipative",
            CertificateKind::Gyroscopic => "gyroscopic",
            CertificateKind::Classical => "classical",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Force {
    Dissipation(Expr),
    Gyroscopic(TensorField),
}

/// Terms added beyond the two fibre homotopies.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Gauge {
    /// Added to L: a 1-form bᵢvⁱ and/or a potential.
    pub lagrangian: Expr,
    /// Added to D: aᵢvⁱ terms (dissipative case).
    pub dissipation: Expr,
    /// Added to ω from the affine residual (gyroscopic case).
    pub omega: Option<TensorField>,
}

#[derive(Debug, Clone)]
pub struct Certificate {
    pub kind: CertificateKind,
    pub lagrangian: Expr,
    pub force: Force,
    pub gauge: Gauge,
}

impl Certificate {
    pub fn dissipation(&self) -> Option<&Expr> {
        match &self.force {
            Force::Dissipation(d) => Some(d),
            Force::Gyroscopic(_) => None,
        }
    }

    pub fn omega(&self) -> Option<&TensorField> {
        match &self.force {
            Force::Gyroscopic(w) => Some(w),
            Force::Dissipation(_) => None,
        }
    }

    /// Re-runs the matching verify suite against `s`.
    pub fn verify(&self, s: &Sode) -> Result<ConditionReport, ReconstructError> {
        match &self.force {
            Force::Dissipation(d) => Ok(verify_dissipative(s, &self.lagrangian, d)),
            Force::Gyroscopic(w) => verify_gyroscopic(s, &self.lagrangian, w),
        }
    }

    pub fn display<'a>(&'a self, ctx: &'a ExprContext) -> CertificateDisplay<'a> {
        CertificateDisplay { cert: self, ctx }
    }
}

pub struct CertificateDisplay<'a> {
    cert: &'a Certificate,
    ctx: &'a ExprContext,
}

impl fmt::Display for CertificateDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = self.cert;
        writeln!(f, "certificate {}", c.kind.name())?;
        writeln!(f, "L = {}", self.ctx.display(&c.lagrangian))?;
        match &c.force {
            Force::Dissipation(d) => writeln!(f, "D = {}", self.ctx.display(d))?,
            Force::Gyroscopic(w) => {
                writeln!(f, "omega:")?;
                for line in w.display(self.ctx).to_string().lines() {
                    writeln!(f, "  {line}")?;
                }
            }
        }
        writeln!(f, "gauge (base point q = 0, fibre point v = 0):")?;
        writeln!(f, "  L terms: {}", self.ctx.display(&c.gauge.lagrangian))?;
        if let Force::Dissipation(_) = c.force {
            writeln!(f, "  D terms: {}", self.ctx.display(&c.gauge.dissipation))?;
        }
        if let Some(w) = &c.gauge.omega {
            writeln!(f, "  omega terms:")?;
            for line in w.display(self.ctx).to_string().lines() {
                writeln!(f, "    {line}")?;
            }
        }
        Ok(())
    }
}

fn lagrange_terms(s: &Sode, l: &Expr, i: usize) -> Vec<Expr> {
    vec![s.gamma_apply(&vertical(i, l)), -l.diff(Var::q(i + 1))]
}

fn regularity(l: &Expr, n: usize) -> Cell {
    Cell::nonzero("Regular", hessian(l, n).determinant())
}

/// rᵢ = Γ(∂L/∂vⁱ) − ∂L/∂qⁱ − ∂D/∂vⁱ, plus regularity of L.
pub fn verify_dissipative(s: &Sode, l: &Expr, d: &Expr) -> ConditionReport {
    let n = s.n();
    let mut cells: Vec<Cell> = (0..n)
        .map(|i| {
            let mut terms = lagrange_terms(s, l, i);
            terms.push(-vertical(i, d));
            Cell::zero(format!("EL[{}]", i + 1), terms)
        })
        .collect();
    cells.push(regularity(l, n));
    ConditionReport::new("verify-dissipative", cells)
}

fn require_gyro_form(omega: &TensorField, n: usize) -> Result<(), ReconstructError> {
    if omega.n() != n || omega.shape() != (0, 2) {
        return Err(ConditionError::Dimension { what: "omega".into(), expected: n, found: omega.n() }.into());
    }
    if !omega.satisfies(Symmetry::Antisymmetric(0, 1)) {
        return Err(ConditionError::NotAntisymmetric.into());
    }
    if omega.entries().iter().any(|e| e.depends_on_any(|v| !v.is_position() && !v.is_parameter())) {
        return Err(ConditionError::NotBasic.into());
    }
    Ok(())
}

/// ωᵢₖvᵏ, the gyroscopic force in equation i.
pub fn gyroscopic_force(omega: &TensorField, i: usize) -> Expr {
    (0..omega.n()).map(|k| omega.at(i, k) * &Expr::var(Var::v(k + 1))).sum()
}

/// rᵢ = Γ(∂L/∂vⁱ) − ∂L/∂qⁱ − ωᵢₖvᵏ, plus regularity of L.
pub fn verify_gyroscopic(s: &Sode, l: &Expr, omega: &TensorField) -> Result<ConditionReport, ReconstructError> {
    let n = s.n();
    require_gyro_form(omega, n)?;
    let mut cells: Vec<Cell> = (0..n)
        .map(|i| {
            let mut terms = lagrange_terms(s, l, i);
            for k in 0..n {
                terms.push(-(omega.at(i, k) * &Expr::var(Var::v(k + 1))));
            }
            Cell::zero(format!("EL[{}]", i + 1), terms)
        })
        .collect();
    cells.push(regularity(l, n));
    Ok(ConditionReport::new("verify-gyroscopic", cells))
}

/// fⁱ = (g⁻¹)ⁱʲ(Qⱼ + ∂L/∂qʲ − vᵏ∂²L/∂qᵏ∂vʲ) for a generalized force Q.
fn forward(ctx: &ExprContext, l: &Expr, force: impl Fn(usize) -> Expr) -> Result<Sode, ReconstructError> {
    let n = ctx.n();
    let g = hessian(l, n);
    let inv = g.inverse().ok_or(ReconstructError::Singular)?;
    let rhs: Vec<Expr> = (0..n)
        .map(|j| {
            let p = vertical(j, l);
            let mut acc = l.diff(Var::q(j + 1)) + force(j);
            for k in 0..n {
                acc = acc - Expr::var(Var::v(k + 1)) * p.diff(Var::q(k + 1));
            }
            acc
        })
        .collect();
    let f = (0..n).map(|i| (0..n).map(|j| inv.at(i, j) * &rhs[j]).sum()).collect();
    Ok(Sode::new(ctx.clone(), f)?)
}

/// The system described by (L, D), asserted to verify.
pub fn forward_sode(ctx: &ExprContext, l: &Expr, d: &Expr) -> Result<Sode, ReconstructError> {
    let s = forward(ctx, l, |j| vertical(j, d))?;
    if !verify_dissipative(&s, l, d).pass {
        return Err(ReconstructError::Internal("forward system does not verify".into()));
    }
    Ok(s)
}

/// The system described by (L, ω), asserted to verify.
pub fn forward_gyroscopic(ctx: &ExprContext, l: &Expr, omega: &TensorField) -> Result<Sode, ReconstructError> {
    require_gyro_form(omega, ctx.n())?;
    let s = forward(ctx, l, |j| gyroscopic_force(omega, j))?;
    if !verify_gyroscopic(&s, l, omega)?.pass {
        return Err(ReconstructError::Internal("forward system does not verify".into()));
    }
    Ok(s)
}

fn failing_labels(r: &ConditionReport) -> String {
    let v: Vec<&str> = r.failing().map(|c| c.label.as_str()).take(6).collect();
    v.join(", ")
}

/// Splits rᵢ = Bᵢₖ(q)vᵏ + Aᵢ(q); errors when rᵢ is not affine in v.
fn split_affine(r: &[Expr]) -> Result<(TensorField, Vec<Expr>), ReconstructError> {
    let n = r.len();
    let at_rest: HashMap<Var, Expr> = (1..=n).map(|k| (Var::v(k), Expr::zero())).collect();
    let b = TensorField::from_fn(0, 2, n, |ix| vertical(ix[1], &r[ix[0]]));
    for (i, e) in b.entries().iter().enumerate() {
        if e.depends_on_any(Var::is_velocity) {
            return Err(ReconstructError::NotAffine(format!("gauge residual {}", i / n + 1)));
        }
    }
    let a = r.iter().map(|e| e.subst(&at_rest)).collect::<Result<Vec<_>, _>>()?;
    Ok((b, a))
}

fn require_fibre_polynomial(what: &str, t: &TensorField) -> Result<(), ReconstructError> {
    if t.entries().iter().any(|e| !e.is_polynomial_in(Var::is_velocity)) {
        return Err(ReconstructError::NotPolynomialInV(what.into()));
    }
    Ok(())
}

/// From a multiplier satisfying the thm3 conditions, builds (L, D) with
/// D = homotopy(∇g) + aᵢvⁱ and L = homotopy(g) + gauge terms.
pub fn reconstruct_dissipative(geo: &SodeGeometry, g: &TensorField) -> Result<Certificate, ReconstructError> {
    let n = geo.n();
    let pre = conditions::check_multiplier_dissipative(geo, g)?;
    if !pre.pass {
        return Err(ReconstructError::Precondition { suite: pre.suite.clone(), failing: failing_labels(&pre) });
    }
    require_fibre_polynomial("g", g)?;
    let ng = geo.nabla02(g)?;
    require_fibre_polynomial("nabla g", &ng)?;
    let d0 = vertical_homotopy2(&ng)?;

    // the HD3 defect must be a closed basic 2-form; absorb it into D
    let vd: Vec<Expr> = (0..n).map(|i| vertical(i, &d0)).collect();
    let gphi = TensorField::from_fn(0, 2, n, |ix| (0..n).map(|k| g.at(ix[0], k) * geo.jacobi.at(k, ix[1])).sum());
    let beta = TensorField::from_fn(0, 2, n, |ix| {
        let (i, j) = (ix[0], ix[1]);
        gphi.at(i, j) - gphi.at(j, i) - (geo.horizontal(i, &vd[j]) - geo.horizontal(j, &vd[i]))
    });
    let a_form = if beta.is_zero() { vec![Expr::zero(); n] } else { base_homotopy2(&beta)? };
    let v = |k: usize| Expr::var(Var::v(k + 1));
    let a_terms: Expr = (0..n).map(|k| &a_form[k] * &v(k)).sum();
    let mut d = &d0 + &a_terms;

    let f0 = vertical_homotopy2(g)?;
    let residual: Vec<Expr> = (0..n)
        .map(|i| geo.gamma(&vertical(i, &f0)) - f0.diff(Var::q(i + 1)) - vertical(i, &d))
        .collect();
    let (b, a) = split_affine(&residual)?;
    if !b.satisfies(Symmetry::Antisymmetric(0, 1)) {
        return Err(ReconstructError::Internal("velocity part of the residual is not antisymmetric".into()));
    }
    let b_form = if b.is_zero() { vec![Expr::zero(); n] } else { base_homotopy2(&b)? };
    let mut l_terms: Expr = (0..n).map(|k| &b_form[k] * &v(k)).sum();
    // a closed remainder is conservative and goes into L as a potential;
    // otherwise it is a velocity-linear dissipation term
    let basic_terms: Expr = if exterior_derivative1(&a).is_zero() {
        l_terms = l_terms + base_potential(&a)?;
        Expr::zero()
    } else {
        (0..n).map(|k| &a[k] * &v(k)).sum()
    };
    d = d + &basic_terms;
    let l = &f0 + &l_terms;

    let cert = Certificate {
        kind: if d.is_zero() { CertificateKind::Classical } else { CertificateKind::Dissipative },
        lagrangian: l,
        force: Force::Dissipation(d),
        gauge: Gauge { lagrangian: l_terms, dissipation: a_terms + basic_terms, omega: None },
    };
    finish(geo, g, cert)
}

/// Factor relating the g-weighted cyclic curvature sum ρ to dω: dω = OMEGA_FACTOR·ρ.
const OMEGA_FACTOR: i64 = -1;

/// ρᵢⱼₖ = gᵢₗRˡⱼₖ + gₖₗRˡᵢⱼ + gⱼₗRˡₖᵢ, which must be basic.
pub fn curvature_three_form(geo: &SodeGeometry, g: &TensorField) -> TensorField {
    TensorField::from_fn(0, 3, geo.n(), |ix| conditions::rcycle_terms(geo, g, ix[0], ix[1], ix[2]).into_iter().sum())
}

/// From a multiplier satisfying the thm4 conditions, builds (L, ω) with
/// dω = −ρ by a base homotopy and L = homotopy(g) + potential.
pub fn reconstruct_gyroscopic(geo: &SodeGeometry, g: &TensorField) -> Result<Certificate, ReconstructError> {
    let n = geo.n();
    let pre = conditions::check_multiplier_gyroscopic(geo, g)?;
    if !pre.pass {
        return Err(ReconstructError::Precondition { suite: pre.suite.clone(), failing: failing_labels(&pre) });
    }
    require_fibre_polynomial("g", g)?;
    let rho = curvature_three_form(geo, g);
    if rho.entries().iter().any(|e| e.depends_on_any(Var::is_velocity)) {
        return Err(ReconstructError::NotBasic("curvature 3-form".into()));
    }
    let factor = Expr::int(OMEGA_FACTOR);
    let mut omega = if rho.is_zero() { TensorField::zeros(0, 2, n) } else { base_homotopy3(&rho.map(|e| &factor * e))? };

    let f0 = vertical_homotopy2(g)?;
    let residual: Vec<Expr> = (0..n)
        .map(|i| geo.gamma(&vertical(i, &f0)) - f0.diff(Var::q(i + 1)) - gyroscopic_force(&omega, i))
        .collect();
    let (b, a) = split_affine(&residual)?;
    if !b.satisfies(Symmetry::Antisymmetric(0, 1)) {
        return Err(ReconstructError::Internal("velocity part of the residual is not antisymmetric".into()));
    }
    for e in b.entries() {
        require_base_polynomial("velocity part of the residual", e)?;
    }
    if !exterior_derivative2(&b).is_zero() {
        return Err(ReconstructError::NotClosed("velocity part of the residual".into()));
    }
    omega = TensorField::from_fn(0, 2, n, |ix| omega.at(ix[0], ix[1]) + b.at(ix[0], ix[1]))
        .with_symmetry(Symmetry::Antisymmetric(0, 1));
    let potential = base_potential(&a)?;
    let l = &f0 + &potential;
    let cert = Certificate {
        kind: if omega.is_zero() { CertificateKind::Classical } else { CertificateKind::Gyroscopic },
        lagrangian: l,
        force: Force::Gyroscopic(omega),
        gauge: Gauge { lagrangian: potential, dissipation: Expr::zero(), omega: Some(b.with_symmetry(Symmetry::Antisymmetric(0, 1))) },
    };
    finish(geo, g, cert)
}

fn finish(geo: &SodeGeometry, g: &TensorField, cert: Certificate) -> Result<Certificate, ReconstructError> {
    if hessian(&cert.lagrangian, geo.n()).entries() != g.entries() {
        return Err(ReconstructError::Internal("Hessian of the reconstructed L differs from g".into()));
    }
    let report = cert.verify(&geo.sode)?;
    if !report.pass {
        return Err(ReconstructError::Internal(format!("certificate does not verify ({})", failing_labels(&report))));
    }
    Ok(cert)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::tests::{example1, example2};

    fn e(ctx: &ExprContext, s: &str) -> Expr {
        ctx.parse(s).unwrap()
    }

    #[test]
    fn hessians() {
        let ctx = ExprContext::explicit(3, &[]).unwrap();
        let l = e(&ctx, "(4*v1^2 + v2^2 + 2*q2*v3^2)/2");
        assert_eq!(hessian(&l, 3), TensorField::diagonal(vec![Expr::int(4), Expr::one(), e(&ctx, "2*q2")]));
        let l2 = e(&ctx, "v1*v2");
        assert_eq!(hessian(&l2, 2).at(0, 1), &Expr::one());
        assert!(hessian(&e(&ctx, "q1*v2 + q3"), 3).is_zero());
    }

    #[test]
    fn fibre_homotopy() {
        let ctx = ExprContext::explicit(3, &[]).unwrap();
        let m = TensorField::diagonal(vec![Expr::int(4), Expr::one(), e(&ctx, "2*q2")]);
        assert_eq!(vertical_homotopy2(&m).unwrap(), e(&ctx, "(4*v1^2 + v2^2 + 2*q2*v3^2)/2"));
        let geo = SodeGeometry::new(&example2()).unwrap();
        let ng = geo.nabla02(&m).unwrap();
        assert_eq!(vertical_homotopy2(&ng).unwrap(), e(&ctx, "2*q2*v1^2*v3"));
        assert!(vertical_homotopy2(&TensorField::zeros(0, 2, 3)).unwrap().is_zero());
        let bad = TensorField::diagonal(vec![e(&ctx, "1/v1"), Expr::one()]);
        assert_eq!(vertical_homotopy2(&bad), Err(ReconstructError::NotPolynomialInV("M".into())));
        let not_hessian = TensorField::diagonal(vec![e(&ctx, "v2"), Expr::one()]);
        assert_eq!(vertical_homotopy2(&not_hessian), Err(ReconstructError::NotHessian("M".into())));
    }

    #[test]
    fn base_homotopies_invert_d() {
        let ctx = ExprContext::explicit(3, &["c"]).unwrap();
        let a = vec![e(&ctx, "2*q1*q2"), e(&ctx, "q1^2 + c")];
        let pot = base_potential(&a).unwrap();
        assert_eq!(pot, e(&ctx, "q1^2*q2 + c*q2"));
        assert_eq!(base_potential(&[e(&ctx, "q2"), Expr::zero()]), Err(ReconstructError::NotClosed("1-form".into())));
        assert_eq!(base_potential(&[e(&ctx, "1/q1")]), Err(ReconstructError::BasePointPole("A[1]".into())));
        assert_eq!(base_potential(&[e(&ctx, "1/(q1+1)")]), Err(ReconstructError::NotPolynomialInQ("A[1]".into())));

        let mut rho = TensorField::zeros(0, 2, 3);
        rho.set(&[0, 1], e(&ctx, "c - q3"));
        rho.set(&[1, 0], e(&ctx, "q3 - c"));
        rho.set(&[1, 2], e(&ctx, "q1"));
        rho.set(&[2, 1], e(&ctx, "-q1"));
        rho.set(&[0, 2], e(&ctx, "-q1"));
        rho.set(&[2, 0], e(&ctx, "q1"));
        assert!(exterior_derivative2(&rho).is_zero());
        let alpha = base_homotopy2(&rho).unwrap();
        assert_eq!(exterior_derivative1(&alpha), rho);

        let mut r3 = TensorField::zeros(0, 3, 3);
        for (p, sign) in [([0, 1, 2], 1), ([1, 2, 0], 1), ([2, 0, 1], 1), ([1, 0, 2], -1), ([0, 2, 1], -1), ([2, 1, 0], -1)] {
            r3.set(&p, e(&ctx, "c*q1 + 1") * Expr::int(sign));
        }
        let w = base_homotopy3(&r3).unwrap();
        assert_eq!(exterior_derivative2(&w), r3);
    }

    #[test]
    fn verify_example1() {
        let s = example1();
        let ctx = s.ctx().clone();
        let l1 = e(&ctx, "(v1^2 - v2^2)/2 - a*(q1^2 - q2^2)/2 - b*q1*q2");
        let d1 = e(&ctx, "-omega*(v1^2 + v2^2)/2");
        assert!(verify_dissipative(&s, &l1, &d1).pass);
        let l2 = e(&ctx, "v1*v2 - a*q1*q2 - b*(q2^2 - q1^2)/2 + omega*(q1*v2 - q2*v1)/2");
        assert!(verify_dissipative(&s, &l2, &Expr::zero()).pass);
        let rep = verify_dissipative(&s, &l1, &Expr::zero());
        assert!(!rep.pass);
        assert_eq!(rep.cell("EL[1]").unwrap().residual, e(&ctx, "-omega*v1"));

        let l4 = e(&ctx, "v1*v2 - a*q1*q2 - b*(q2^2 - q1^2)/2");
        let mut w = TensorField::zeros(0, 2, 2);
        w.set(&[0, 1], e(&ctx, "omega"));
        w.set(&[1, 0], e(&ctx, "-omega"));
        assert!(verify_gyroscopic(&s, &l4, &w).unwrap().pass);
        assert!(verify_gyroscopic(&s, &l2, &TensorField::zeros(0, 2, 2)).unwrap().pass);
        assert!(!verify_gyroscopic(&s, &l4, &w.map(|x| -x)).unwrap().pass);
    }

    #[test]
    fn forward_examples() {
        let s = example1();
        let ctx = s.ctx().clone();
        let l1 = e(&ctx, "(v1^2 - v2^2)/2 - a*(q1^2 - q2^2)/2 - b*q1*q2");
        let d1 = e(&ctx, "-omega*(v1^2 + v2^2)/2");
        assert_eq!(forward_sode(&ctx, &l1, &d1).unwrap(), s);
        let s2 = example2();
        let ctx2 = s2.ctx().clone();
        let l = e(&ctx2, "(4*v1^2 + v2^2 + 2*q2*v3^2)/2");
        assert_eq!(forward_sode(&ctx2, &l, &e(&ctx2, "2*q2*v1^2*v3")).unwrap(), s2);
        let free = ExprContext::explicit(2, &[]).unwrap();
        assert_eq!(forward_sode(&free, &e(&free, "(v1^2 + v2^2)/2"), &Expr::zero()).unwrap(), Sode::free(2));
        assert_eq!(forward_sode(&free, &e(&free, "v1"), &Expr::zero()).unwrap_err(), ReconstructError::Singular);
    }

    #[test]
    fn reconstruct_example2() {
        let s = example2();
        let ctx = s.ctx().clone();
        let geo = SodeGeometry::new(&s).unwrap();
        let g = TensorField::diagonal(vec![Expr::int(4), Expr::one(), e(&ctx, "2*q2")]);
        let cert = reconstruct_dissipative(&geo, &g).unwrap();
        assert_eq!(cert.kind, CertificateKind::Dissipative);
        assert_eq!(cert.lagrangian, e(&ctx, "(4*v1^2 + v2^2 + 2*q2*v3^2)/2"));
        assert_eq!(cert.dissipation(), Some(&e(&ctx, "2*q2*v1^2*v3")));
        assert!(cert.gauge.lagrangian.is_zero() && cert.gauge.dissipation.is_zero());
    }

    #[test]
    fn reconstruct_example1() {
        let s = example1();
        let ctx = s.ctx().clone();
        let geo = SodeGeometry::new(&s).unwrap();
        let cert = reconstruct_dissipative(&geo, &TensorField::identity(2)).unwrap();
        // the conservative part −a·q becomes a potential rather than the
        // −a(q1v1 + q2v2) term of D
        assert_eq!(cert.lagrangian, e(&ctx, "(v1^2 + v2^2)/2 - a*(q1^2 + q2^2)/2"));
        let d = e(&ctx, "b*(q1*v2 - q2*v1) + omega*(v2^2 - v1^2)/2");
        assert_eq!(cert.dissipation(), Some(&d));
        let d3 = e(&ctx, "-a*(q1*v1 + q2*v2) + b*(q1*v2 - q2*v1) + omega*(v2^2 - v1^2)/2");
        assert!(verify_dissipative(&s, &e(&ctx, "(v1^2 + v2^2)/2"), &d3).pass);

        let g2 = TensorField::from_rows(vec![vec![Expr::zero(), Expr::one()], vec![Expr::one(), Expr::zero()]]);
        let cert = reconstruct_gyroscopic(&geo, &g2).unwrap();
        assert_eq!(cert.kind, CertificateKind::Gyroscopic);
        let w = cert.omega().unwrap();
        assert_eq!(w.at(0, 1), &e(&ctx, "omega"));
        assert_eq!(cert.lagrangian, e(&ctx, "v1*v2 - a*q1*q2 - b*(q2^2 - q1^2)/2"));
        assert!(exterior_derivative2(w).is_zero());

        assert!(matches!(
            reconstruct_gyroscopic(&geo, &TensorField::identity(2)),
            Err(ReconstructError::Precondition { .. })
        ));
    }

    #[test]
    fn reconstruct_free_particle() {
        let s = Sode::free(2);
        let geo = SodeGeometry::new(&s).unwrap();
        let cert = reconstruct_dissipative(&geo, &TensorField::identity(2)).unwrap();
        assert_eq!(cert.kind, CertificateKind::Classical);
        assert_eq!(cert.lagrangian, s.ctx().parse("(v1^2 + v2^2)/2").unwrap());
        assert!(cert.dissipation().unwrap().is_zero());
        let cert = reconstruct_gyroscopic(&geo, &TensorField::identity(2)).unwrap();
        assert_eq!(cert.kind, CertificateKind::Classical);
    }

    #[test]
    fn gyroscopic_sign_matches_hg3() {
        // a position-dependent magnetic-type field in three dimensions
        let ctx = ExprContext::explicit(3, &[]).unwrap();
        let mut w = TensorField::zeros(0, 2, 3);
        for (i, j, s) in [(0, 1, "q3"), (1, 2, "q1^2"), (0, 2, "q2 + 1")] {
            w.set(&[i, j], e(&ctx, s));
            w.set(&[j, i], -e(&ctx, s));
        }
        let l = e(&ctx, "(v1^2 + v2^2 + v3^2)/2 - q1*q2");
        let s = forward_gyroscopic(&ctx, &l, &w).unwrap();
        let geo = SodeGeometry::new(&s).unwrap();
        let g = TensorField::identity(3);
        assert!(conditions::check_gyroscopic(&geo, &g, &w).unwrap().pass);
        assert!(!conditions::check_gyroscopic(&geo, &g, &w.map(|x| -x)).unwrap().pass);
        assert!(conditions::check_multiplier_gyroscopic(&geo, &g).unwrap().pass);
        let cert = reconstruct_gyroscopic(&geo, &g).unwrap();
        let rebuilt = cert.omega().unwrap();
        assert_eq!(exterior_derivative2(rebuilt), exterior_derivative2(&w));
    }
}
