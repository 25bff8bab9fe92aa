//! Index-shaped arrays of expressions.

use std::fmt;

use crate::expr::{Expr, ExprContext};

/// A symmetry between two index slots (counted over upper then lower
/// indices).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Symmetry {
    Symmetric(usize, usize),
    Antisymmetric(usize, usize),
}

/// Components of a tensor field along the tangent bundle projection.
///
/// Entries are stored row-major with upper indices first: `get(&[k, i, j])`
/// of a `(1, 2)` field is `T^k_{ij}`. Indices are 0-based.
#[derive(Clone, PartialEq, Eq)]
pub struct TensorField {
    upper: usize,
    lower: usize,
    n: usize,
    entries: Vec<Expr>,
    symmetries: Vec<Symmetry>,
}

impl TensorField {
    pub fn zeros(upper: usize, lower: usize, n: usize) -> Self {
        let len = n.pow((upper + lower) as u32);
        TensorField { upper, lower, n, entries: vec![Expr::zero(); len], symmetries: Vec::new() }
    }

    pub fn from_fn(upper: usize, lower: usize, n: usize, mut f: impl FnMut(&[usize]) -> Expr) -> Self {
        let mut t = Self::zeros(upper, lower, n);
        let rank = upper + lower;
        let mut idx = vec![0; rank];
        for slot in 0..t.entries.len() {
            let mut r = slot;
            for pos in (0..rank).rev() {
                idx[pos] = r % n;
                r /= n;
            }
            t.entries[slot] = f(&idx);
        }
        t
    }

    /// A `(0, 2)` field from its component rows.
    pub fn from_rows(rows: Vec<Vec<Expr>>) -> Self {
        let n = rows.len();
        assert!(rows.iter().all(|r| r.len() == n), "matrix must be square");
        let entries = rows.into_iter().flatten().collect();
        TensorField { upper: 0, lower: 2, n, entries, symmetries: Vec::new() }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(0, 2, n, |ix| if ix[0] == ix[1] { Expr::one() } else { Expr::zero() })
            .with_symmetry(Symmetry::Symmetric(0, 1))
    }

    pub fn diagonal(entries: Vec<Expr>) -> Self {
        let n = entries.len();
        Self::from_fn(0, 2, n, |ix| if ix[0] == ix[1] { entries[ix[0]].clone() } else { Expr::zero() })
            .with_symmetry(Symmetry::Symmetric(0, 1))
    }

    pub fn with_symmetry(mut self, s: Symmetry) -> Self {
        if !self.symmetries.contains(&s) {
            self.symmetries.push(s);
        }
        self
    }

    pub fn symmetries(&self) -> &[Symmetry] {
        &self.symmetries
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.upper, self.lower)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rank(&self) -> usize {
        self.upper + self.lower
    }

    fn offset(&self, idx: &[usize]) -> usize {
        assert_eq!(idx.len(), self.rank(), "index arity");
        idx.iter().fold(0, |acc, &i| {
            assert!(i < self.n, "index {i} out of range");
            acc * self.n + i
        })
    }

    pub fn get(&self, idx: &[usize]) -> &Expr {
        &self.entries[self.offset(idx)]
    }

    pub fn set(&mut self, idx: &[usize], value: Expr) {
        let o = self.offset(idx);
        self.entries[o] = value;
    }

    pub fn entries(&self) -> &[Expr] {
        &self.entries
    }

    pub fn map(&self, f: impl Fn(&Expr) -> Expr) -> TensorField {
        TensorField {
            entries: self.entries.iter().map(f).collect(),
            symmetries: Vec::new(),
            ..*self
        }
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(Expr::is_zero)
    }

    /// Every declared symmetry holds entry-wise.
    pub fn symmetries_hold(&self) -> bool {
        self.symmetries.iter().all(|&s| self.satisfies(s))
    }

    pub fn satisfies(&self, s: Symmetry) -> bool {
        let (a, b, anti) = match s {
            Symmetry::Symmetric(a, b) => (a, b, false),
            Symmetry::Antisymmetric(a, b) => (a, b, true),
        };
        let rank = self.rank();
        (0..self.entries.len()).all(|slot| {
            let mut idx = vec![0; rank];
            let mut r = slot;
            for pos in (0..rank).rev() {
                idx[pos] = r % self.n;
                r /= self.n;
            }
            let here = &self.entries[slot];
            idx.swap(a, b);
            let there = self.get(&idx);
            if anti {
                (here + there).is_zero()
            } else {
                (here - there).is_zero()
            }
        })
    }

    /// Shorthand for rank-2 access.
    pub fn at(&self, i: usize, j: usize) -> &Expr {
        self.get(&[i, j])
    }

    pub fn at3(&self, i: usize, j: usize, k: usize) -> &Expr {
        self.get(&[i, j, k])
    }

    /// Rows of a rank-2 field.
    pub fn rows(&self) -> Vec<Vec<Expr>> {
        assert_eq!(self.rank(), 2);
        self.entries.chunks(self.n).map(|c| c.to_vec()).collect()
    }

    /// Determinant of a rank-2 field, by elimination over the field of
    /// rational functions.
    pub fn determinant(&self) -> Expr {
        assert_eq!(self.rank(), 2, "determinant needs a matrix");
        let n = self.n;
        let mut m = self.rows();
        let mut det = Expr::one();
        for col in 0..n {
            let Some(pivot) = (col..n).find(|&r| !m[r][col].is_zero()) else {
                return Expr::zero();
            };
            if pivot != col {
                m.swap(pivot, col);
                det = -det;
            }
            let p = m[col][col].clone();
            det = &det * &p;
            let inv = p.recip().expect("non-zero pivot");
            for r in col + 1..n {
                if m[r][col].is_zero() {
                    continue;
                }
                let factor = &m[r][col] * &inv;
                for c in col..n {
                    let v = &m[r][c] - &(&factor * &m[col][c]);
                    m[r][c] = v;
                }
            }
        }
        det
    }

    /// Inverse of a rank-2 field, or `None` when singular.
    pub fn inverse(&self) -> Option<TensorField> {
        assert_eq!(self.rank(), 2);
        let n = self.n;
        let mut m = self.rows();
        let mut inv: Vec<Vec<Expr>> =
            (0..n).map(|i| (0..n).map(|j| if i == j { Expr::one() } else { Expr::zero() }).collect()).collect();
        for col in 0..n {
            let pivot = (col..n).find(|&r| !m[r][col].is_zero())?;
            m.swap(pivot, col);
            inv.swap(pivot, col);
            let p = m[col][col].recip().ok()?;
            for c in 0..n {
                m[col][c] = &m[col][c] * &p;
                inv[col][c] = &inv[col][c] * &p;
            }
            for r in 0..n {
                if r == col || m[r][col].is_zero() {
                    continue;
                }
                let factor = m[r][col].clone();
                for c in 0..n {
                    let a = &m[r][c] - &(&factor * &m[col][c]);
                    m[r][c] = a;
                    let b = &inv[r][c] - &(&factor * &inv[col][c]);
                    inv[r][c] = b;
                }
            }
        }
        Some(TensorField::from_rows(inv))
    }

    pub fn display<'a>(&'a self, ctx: &'a ExprContext) -> TensorDisplay<'a> {
        TensorDisplay { t: self, ctx: Some(ctx) }
    }
}

impl fmt::Debug for TensorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", TensorDisplay { t: self, ctx: None })
    }
}

pub struct TensorDisplay<'a> {
    t: &'a TensorField,
    ctx: Option<&'a ExprContext>,
}

/// One line per non-zero component, `[i,j,..] = expr` with 1-based indices.
impl fmt::Display for TensorDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let t = self.t;
        let mut any = false;
        for (slot, e) in t.entries.iter().enumerate() {
            if e.is_zero() {
                continue;
            }
            any = true;
            let mut idx = vec![0; t.rank()];
            let mut r = slot;
            for pos in (0..t.rank()).rev() {
                idx[pos] = r % t.n + 1;
                r /= t.n;
            }
            let label = idx.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(",");
            match self.ctx {
                Some(ctx) => writeln!(f, "[{label}] = {}", ctx.display(e))?,
                None => writeln!(f, "[{label}] = {e}")?,
            }
        }
        if !any {
            writeln!(f, "0")?;
        }
        Ok(())
    }
}
