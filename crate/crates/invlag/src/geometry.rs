//! Geometric objects attached to an explicit second-order system
//! `q̈ⁱ = fⁱ(q, v)`: the connection, horizontal and vertical derivatives,
//! the Jacobi endomorphism, curvature, θ, and the dynamical covariant
//! derivative ∇.
//!
//! Tensor index conventions (all 0-based in arrays):
//! - connection `[j, i]` is Γʲᵢ
//! - jacobi `[i, j]` is Φⁱⱼ
//! - curvature `[k, i, j]` is Rᵏᵢⱼ
//! - theta `[l, j, k]` is θˡⱼₖ = Vₖ(Γˡⱼ)

use thiserror::Error;

use crate::expr::{Expr, ExprContext, ExprError, Var};
use crate::tensor::{Symmetry, TensorField};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GeometryError {
    #[error("expected {expected} right-hand sides, found {found}")]
    Dimension { expected: usize, found: usize },
    #[error("f{index} may depend only on positions, velocities and parameters (found `{var}`)")]
    IllegalVariable { index: usize, var: String },
    #[error("explicit systems need a context with jet order 1 and no time")]
    Context,
    #[error("the two curvature formulas disagree at [{k},{i},{j}]")]
    CurvatureMismatch { k: usize, i: usize, j: usize },
    #[error("tensor has shape {found:?}, expected {expected:?}")]
    Shape { expected: (usize, usize), found: (usize, usize) },
    #[error(transparent)]
    Expr(#[from] ExprError),
}

/// An explicit second-order system q̈ⁱ = fⁱ(q, v).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sode {
    ctx: ExprContext,
    f: Vec<Expr>,
}

impl Sode {
    pub fn new(ctx: ExprContext, f: Vec<Expr>) -> Result<Self, GeometryError> {
        if ctx.max_jet_order() != 1 || ctx.uses_time() {
            return Err(GeometryError::Context);
        }
        if f.len() != ctx.n() {
            return Err(GeometryError::Dimension { expected: ctx.n(), found: f.len() });
        }
        for (i, fi) in f.iter().enumerate() {
            if let Some(v) = fi.vars().into_iter().find(|&v| !ctx.admits(v) || v.kind() == crate::expr::VarKind::Aux) {
                return Err(GeometryError::IllegalVariable { index: i + 1, var: ctx.var_name(v) });
            }
        }
        Ok(Sode { ctx, f })
    }

    /// Parses the right-hand sides under `ctx`.
    pub fn parse(ctx: ExprContext, f: &[&str]) -> Result<Self, GeometryError> {
        let f = f.iter().map(|s| ctx.parse(s)).collect::<Result<Vec<_>, _>>()?;
        Self::new(ctx, f)
    }

    /// The free particle q̈ = 0.
    pub fn free(n: usize) -> Self {
        let ctx = ExprContext::explicit(n, &[]).expect("no parameters");
        Sode { ctx, f: vec![Expr::zero(); n] }
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

    /// Γ(F) = vᵏ ∂F/∂qᵏ + fᵏ ∂F/∂vᵏ.
    pub fn gamma_apply(&self, e: &Expr) -> Expr {
        let mut acc = Expr::zero();
        for k in 1..=self.n() {
            let dq = e.diff(Var::q(k));
            if !dq.is_zero() {
                acc = acc + &Expr::var(Var::v(k)) * &dq;
            }
            let dv = e.diff(Var::v(k));
            if !dv.is_zero() {
                acc = acc + &self.f[k - 1] * &dv;
            }
        }
        acc
    }
}

/// Vᵢ(F) = ∂F/∂vⁱ, with a 0-based index.
pub fn vertical(i: usize, e: &Expr) -> Expr {
    e.diff(Var::v(i + 1))
}

/// Γʲᵢ = −½ ∂fʲ/∂vⁱ, stored at `[j, i]`.
pub fn connection(s: &Sode) -> TensorField {
    let half = Expr::ratio(-1, 2);
    TensorField::from_fn(1, 1, s.n(), |ix| &half * &vertical(ix[1], &s.f[ix[0]]))
}

pub fn gamma_apply(s: &Sode, e: &Expr) -> Expr {
    s.gamma_apply(e)
}

/// Hᵢ(F) = ∂F/∂qⁱ − Γʲᵢ ∂F/∂vʲ, with a 0-based index.
pub fn horizontal_apply(s: &Sode, i: usize, e: &Expr) -> Expr {
    horizontal_with(&connection(s), i, e)
}

fn horizontal_with(conn: &TensorField, i: usize, e: &Expr) -> Expr {
    let mut acc = e.diff(Var::q(i + 1));
    for j in 0..conn.n() {
        let g = conn.at(j, i);
        if g.is_zero() {
            continue;
        }
        let dv = vertical(j, e);
        if !dv.is_zero() {
            acc = acc - g * &dv;
        }
    }
    acc
}

pub fn jacobi(s: &Sode) -> TensorField {
    jacobi_with(s, &connection(s))
}

fn jacobi_with(s: &Sode, conn: &TensorField) -> TensorField {
    let n = s.n();
    TensorField::from_fn(1, 1, n, |ix| {
        let (i, j) = (ix[0], ix[1]);
        let mut acc = -s.f[i].diff(Var::q(j + 1));
        for k in 0..n {
            acc = acc - conn.at(k, j) * conn.at(i, k);
        }
        acc - s.gamma_apply(conn.at(i, j))
    })
}

/// Rᵏᵢⱼ = Hⱼ(Γᵏᵢ) − Hᵢ(Γᵏⱼ), cross-checked against ⅓(Vᵢ(Φᵏⱼ) − Vⱼ(Φᵏᵢ)).
pub fn curvature(s: &Sode) -> Result<TensorField, GeometryError> {
    SodeGeometry::new(s).map(|g| g.curvature)
}

pub fn theta_tensor(s: &Sode) -> TensorField {
    theta_with(&connection(s))
}

fn theta_with(conn: &TensorField) -> TensorField {
    TensorField::from_fn(1, 2, conn.n(), |ix| vertical(ix[2], conn.at(ix[0], ix[1])))
        .with_symmetry(Symmetry::Symmetric(1, 2))
}

pub fn nabla_tensor02(s: &Sode, g: &TensorField) -> Result<TensorField, GeometryError> {
    nabla02_with(s, &connection(s), g)
}

fn expect_shape(t: &TensorField, shape: (usize, usize), n: usize) -> Result<(), GeometryError> {
    if t.shape() != shape {
        return Err(GeometryError::Shape { expected: shape, found: t.shape() });
    }
    if t.n() != n {
        return Err(GeometryError::Dimension { expected: n, found: t.n() });
    }
    Ok(())
}

fn nabla02_with(s: &Sode, conn: &TensorField, g: &TensorField) -> Result<TensorField, GeometryError> {
    let n = s.n();
    expect_shape(g, (0, 2), n)?;
    Ok(TensorField::from_fn(0, 2, n, |ix| {
        let (i, j) = (ix[0], ix[1]);
        let mut acc = s.gamma_apply(g.at(i, j));
        for k in 0..n {
            acc = acc - g.at(i, k) * conn.at(k, j);
            acc = acc - g.at(j, k) * conn.at(k, i);
        }
        acc
    }))
}

/// Everything derived from a SODE, computed once.
#[derive(Clone, Debug)]
pub struct SodeGeometry {
    pub sode: Sode,
    pub connection: TensorField,
    pub jacobi: TensorField,
    pub curvature: TensorField,
    pub theta: TensorField,
}

impl SodeGeometry {
    pub fn new(s: &Sode) -> Result<Self, GeometryError> {
        let n = s.n();
        let conn = connection(s);
        let jac = jacobi_with(s, &conn);
        let curv = TensorField::from_fn(1, 2, n, |ix| {
            let (k, i, j) = (ix[0], ix[1], ix[2]);
            horizontal_with(&conn, j, conn.at(k, i)) - horizontal_with(&conn, i, conn.at(k, j))
        })
        .with_symmetry(Symmetry::Antisymmetric(1, 2));
        let third = Expr::ratio(1, 3);
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let alt = &third * &(vertical(i, jac.at(k, j)) - vertical(j, jac.at(k, i)));
                    if alt != *curv.at3(k, i, j) {
                        return Err(GeometryError::CurvatureMismatch { k: k + 1, i: i + 1, j: j + 1 });
                    }
                }
            }
        }
        let theta = theta_with(&conn);
        Ok(SodeGeometry { sode: s.clone(), connection: conn, jacobi: jac, curvature: curv, theta })
    }

    pub fn n(&self) -> usize {
        self.sode.n()
    }

    pub fn ctx(&self) -> &ExprContext {
        self.sode.ctx()
    }

    pub fn gamma(&self, e: &Expr) -> Expr {
        self.sode.gamma_apply(e)
    }

    pub fn horizontal(&self, i: usize, e: &Expr) -> Expr {
        horizontal_with(&self.connection, i, e)
    }

    pub fn vertical(&self, i: usize, e: &Expr) -> Expr {
        vertical(i, e)
    }

    /// Γⁱⱼ (0-based).
    pub fn gamma_coeff(&self, i: usize, j: usize) -> &Expr {
        self.connection.at(i, j)
    }

    pub fn nabla02(&self, g: &TensorField) -> Result<TensorField, GeometryError> {
        nabla02_with(&self.sode, &self.connection, g)
    }

    /// (∇A)ᵏₗ = Γ(Aᵏₗ) − AᵏᵢΓⁱₗ + ΓᵏₘAᵐₗ.
    pub fn nabla11(&self, a: &TensorField) -> Result<TensorField, GeometryError> {
        let n = self.n();
        expect_shape(a, (1, 1), n)?;
        let c = &self.connection;
        Ok(TensorField::from_fn(1, 1, n, |ix| {
            let (k, l) = (ix[0], ix[1]);
            let mut acc = self.gamma(a.at(k, l));
            for m in 0..n {
                acc = acc - a.at(k, m) * c.at(m, l);
                acc = acc + c.at(k, m) * a.at(m, l);
            }
            acc
        }))
    }

    /// (∇T)ᵏᵢⱼ = Γ(Tᵏᵢⱼ) + ΓᵏₘTᵐᵢⱼ − TᵏₘⱼΓᵐᵢ − TᵏᵢₘΓᵐⱼ.
    pub fn nabla12(&self, t: &TensorField) -> Result<TensorField, GeometryError> {
        let n = self.n();
        expect_shape(t, (1, 2), n)?;
        let c = &self.connection;
        Ok(TensorField::from_fn(1, 2, n, |ix| {
            let (k, i, j) = (ix[0], ix[1], ix[2]);
            let mut acc = self.gamma(t.at3(k, i, j));
            for m in 0..n {
                acc = acc + c.at(k, m) * t.at3(m, i, j);
                acc = acc - t.at3(k, m, j) * c.at(m, i);
                acc = acc - t.at3(k, i, m) * c.at(m, j);
            }
            acc
        }))
    }

    /// Coefficients of the curvature written as a vector-valued 2-form
    /// Σ_{i<j} cᵏᵢⱼ dqⁱ∧dqʲ ⊗ ∂/∂qᵏ, i.e. cᵏᵢⱼ = ½Rᵏᵢⱼ.
    pub fn curvature_form(&self) -> TensorField {
        let half = crate::expr::ratio(1, 2);
        self.curvature.map(|e| e.scale(&half)).with_symmetry(Symmetry::Antisymmetric(1, 2))
    }

    /// (d_hΦ)ᵏᵢⱼ = Hᵢ(Φᵏⱼ) − Hⱼ(Φᵏᵢ) + θᵏᵢₗΦˡⱼ − θᵏⱼₗΦˡᵢ.
    pub fn horizontal_exterior_jacobi(&self) -> TensorField {
        let n = self.n();
        let (p, th) = (&self.jacobi, &self.theta);
        TensorField::from_fn(1, 2, n, |ix| {
            let (k, i, j) = (ix[0], ix[1], ix[2]);
            let mut acc = self.horizontal(i, p.at(k, j)) - self.horizontal(j, p.at(k, i));
            for l in 0..n {
                acc = acc + th.at3(k, i, l) * p.at(l, j);
                acc = acc - th.at3(k, j, l) * p.at(l, i);
            }
            acc
        })
    }

    /// (d_vΦ)ᵏᵢⱼ = Vᵢ(Φᵏⱼ) − Vⱼ(Φᵏᵢ).
    pub fn vertical_exterior_jacobi(&self) -> TensorField {
        let p = &self.jacobi;
        TensorField::from_fn(1, 2, self.n(), |ix| {
            let (k, i, j) = (ix[0], ix[1], ix[2]);
            vertical(i, p.at(k, j)) - vertical(j, p.at(k, i))
        })
    }
}
