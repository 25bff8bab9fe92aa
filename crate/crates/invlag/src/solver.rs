//! Multiplier search in finite ansatz families: the linear condition suites
//! become an exact linear system over Q, solved by reduced row echelon form.

use std::collections::{BTreeMap, HashMap, HashSet};

use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::conditions::{self, multiplier_cells, ConditionError, ConditionReport, Expect, Suite};
use crate::expr::{Expr, ExprError, Monomial, Rational, Var, VarKind};
use crate::geometry::{GeometryError, Sode, SodeGeometry};
use crate::tensor::{Symmetry, TensorField};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolverError {
    #[error("suite '{0}' cannot be searched; use classical, thm3, thm4, prop2a, rayleigh or gyroscopic")]
    UnsupportedSuite(String),
    #[error("omega entries are only meaningful for the gyroscopic suite")]
    OmegaWithoutGyroscopic,
    #[error("index ({0},{1}) out of range for dimension {2}")]
    Index(usize, usize, usize),
    #[error("omega entry ({0},{0}) lies on the diagonal")]
    DiagonalOmega(usize),
    #[error("basis function {0} uses an auxiliary variable")]
    AuxInBasis(String),
    #[error("condition {0} is not linear in the unknowns")]
    Nonlinear(String),
    #[error("solution vector failed the symbolic re-check on {0}")]
    Unsound(String),
    #[error(transparent)]
    Condition(#[from] ConditionError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Expr(#[from] ExprError),
}

/// One ansatz entry: `fixed + Σₖ cₖ·basis[k]` with unknown rationals cₖ.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct AnsatzEntry {
    pub fixed: Expr,
    pub basis: Vec<Expr>,
}

impl AnsatzEntry {
    pub fn basis(basis: Vec<Expr>) -> Self {
        AnsatzEntry { fixed: Expr::zero(), basis }
    }

    pub fn fixed(value: Expr) -> Self {
        AnsatzEntry { fixed: value, basis: Vec::new() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Target {
    G(usize, usize),
    Omega(usize, usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Unknown {
    pub name: String,
    pub target: Target,
    pub basis_index: usize,
}

/// Unknown-coefficient parametrization of g (entries with i ≤ j; symmetry
/// is built in) and optionally ω (entries with i < j; antisymmetry built in).
/// Indices are 0-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnsatzProblem {
    pub suite: Suite,
    n: usize,
    g: BTreeMap<(usize, usize), AnsatzEntry>,
    omega: BTreeMap<(usize, usize), AnsatzEntry>,
}

/// All monomials in `vars` of total degree ≤ `degree`, by degree and then
/// in declaration order.
pub fn monomials(vars: &[Var], degree: u32) -> Vec<Expr> {
    let mut out = vec![Expr::one()];
    let mut frontier: Vec<(Expr, usize)> = vec![(Expr::one(), 0)];
    for _ in 0..degree {
        let mut next = Vec::new();
        for (m, start) in &frontier {
            for (k, v) in vars.iter().enumerate().skip(*start) {
                let e = m * &Expr::var(*v);
                out.push(e.clone());
                next.push((e, k));
            }
        }
        frontier = next;
    }
    out
}

impl AnsatzProblem {
    pub fn new(suite: Suite, n: usize) -> Result<Self, SolverError> {
        match suite {
            Suite::Dissipative | Suite::Implicit => Err(SolverError::UnsupportedSuite(suite.name().into())),
            _ => Ok(AnsatzProblem { suite, n, g: BTreeMap::new(), omega: BTreeMap::new() }),
        }
    }

    /// Every gᵢⱼ an unknown constant.
    pub fn constant(suite: Suite, n: usize) -> Result<Self, SolverError> {
        Self::polynomial(suite, n, &[], 0)
    }

    /// Every gᵢⱼ a polynomial of degree ≤ `degree` in `vars`.
    pub fn polynomial(suite: Suite, n: usize, vars: &[Var], degree: u32) -> Result<Self, SolverError> {
        let mut p = Self::new(suite, n)?;
        let basis = monomials(vars, degree);
        for i in 0..n {
            for j in i..n {
                p.g.insert((i, j), AnsatzEntry::basis(basis.clone()));
            }
        }
        Ok(p)
    }

    /// Every gᵢⱼ a polynomial of degree ≤ `degree` in all positions.
    pub fn polynomial_q(suite: Suite, n: usize, degree: u32) -> Result<Self, SolverError> {
        let q: Vec<Var> = (1..=n).map(Var::q).collect();
        Self::polynomial(suite, n, &q, degree)
    }

    /// Drops every off-diagonal g entry.
    pub fn diagonal(mut self) -> Self {
        self.g.retain(|(i, j), _| i == j);
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn set_entry(&mut self, i: usize, j: usize, entry: AnsatzEntry) -> Result<(), SolverError> {
        let (i, j) = (i.min(j), i.max(j));
        if j >= self.n {
            return Err(SolverError::Index(i + 1, j + 1, self.n));
        }
        check_basis(&entry)?;
        if entry.fixed.is_zero() && entry.basis.is_empty() {
            self.g.remove(&(i, j));
        } else {
            self.g.insert((i, j), entry);
        }
        Ok(())
    }

    /// Sets ωᵢⱼ (and ωⱼᵢ = −ωᵢⱼ).
    pub fn set_omega(&mut self, i: usize, j: usize, entry: AnsatzEntry) -> Result<(), SolverError> {
        if self.suite != Suite::Gyroscopic {
            return Err(SolverError::OmegaWithoutGyroscopic);
        }
        if i.max(j) >= self.n {
            return Err(SolverError::Index(i + 1, j + 1, self.n));
        }
        if i == j {
            return Err(SolverError::DiagonalOmega(i + 1));
        }
        check_basis(&entry)?;
        let entry = if i < j {
            entry
        } else {
            AnsatzEntry { fixed: -entry.fixed, basis: entry.basis.into_iter().map(|b| -b).collect() }
        };
        self.omega.insert((i.min(j), i.max(j)), entry);
        Ok(())
    }

    pub fn g_entries(&self) -> &BTreeMap<(usize, usize), AnsatzEntry> {
        &self.g
    }

    pub fn omega_entries(&self) -> &BTreeMap<(usize, usize), AnsatzEntry> {
        &self.omega
    }

    /// Unknowns in declaration order: g entries row by row, then ω.
    pub fn unknowns(&self) -> Vec<Unknown> {
        let mut out = Vec::new();
        for (&(i, j), e) in &self.g {
            for k in 0..e.basis.len() {
                out.push(Unknown { name: format!("g[{},{}]#{}", i + 1, j + 1, k + 1), target: Target::G(i, j), basis_index: k });
            }
        }
        for (&(i, j), e) in &self.omega {
            for k in 0..e.basis.len() {
                out.push(Unknown { name: format!("omega[{},{}]#{}", i + 1, j + 1, k + 1), target: Target::Omega(i, j), basis_index: k });
            }
        }
        out
    }

    /// g and ω for the given unknown values; `with_fixed` adds the fixed parts.
    pub fn instantiate_with(&self, values: &[Expr], with_fixed: bool) -> (TensorField, Option<TensorField>) {
        let mut g = TensorField::zeros(0, 2, self.n);
        let mut w = TensorField::zeros(0, 2, self.n);
        let mut pos = 0;
        let mut fill = |entries: &BTreeMap<(usize, usize), AnsatzEntry>, t: &mut TensorField, sign: i64| {
            for (&(i, j), e) in entries {
                let mut acc = if with_fixed { e.fixed.clone() } else { Expr::zero() };
                for b in &e.basis {
                    acc = acc + &values[pos] * b;
                    pos += 1;
                }
                t.set(&[j, i], &acc * &Expr::int(sign));
                t.set(&[i, j], acc);
            }
        };
        fill(&self.g, &mut g, 1);
        fill(&self.omega, &mut w, -1);
        let g = g.with_symmetry(Symmetry::Symmetric(0, 1));
        let w = (self.suite == Suite::Gyroscopic).then(|| w.with_symmetry(Symmetry::Antisymmetric(0, 1)));
        (g, w)
    }

    /// g and ω for rational unknown values, fixed parts included.
    pub fn instantiate(&self, values: &[Rational]) -> (TensorField, Option<TensorField>) {
        let v: Vec<Expr> = values.iter().map(|c| Expr::constant(c.clone())).collect();
        self.instantiate_with(&v, true)
    }

    fn symbolic(&self) -> (TensorField, Option<TensorField>) {
        let count = self.unknowns().len();
        let v: Vec<Expr> = (0..count).map(|k| Expr::var(unknown_var(k))).collect();
        self.instantiate_with(&v, true)
    }
}

fn check_basis(e: &AnsatzEntry) -> Result<(), SolverError> {
    for b in std::iter::once(&e.fixed).chain(&e.basis) {
        if b.depends_on_any(|v| v.kind() == VarKind::Aux) {
            return Err(SolverError::AuxInBasis(b.to_string()));
        }
    }
    Ok(())
}

fn unknown_var(k: usize) -> Var {
    Var::aux(k + 1)
}

fn unknown_index(v: Var) -> Option<usize> {
    (v.kind() == VarKind::Aux && v.index() > 0).then(|| v.index() - 1)
}

/// One linear equation Σ coeffs·c = rhs and the cell/monomial it came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Equation {
    pub coeffs: Vec<Rational>,
    pub rhs: Rational,
    pub origin: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearSystem {
    pub unknowns: Vec<String>,
    pub equations: Vec<Equation>,
}

impl LinearSystem {
    pub fn is_homogeneous(&self) -> bool {
        self.equations.iter().all(|e| e.rhs.is_zero())
    }
}

/// Splits every zero-expected residual of the suite, with g (and ω) built
/// from symbolic unknowns, into one equation per monomial in the remaining
/// variables (positions, velocities and parameters).
pub fn assemble(geo: &SodeGeometry, p: &AnsatzProblem) -> Result<LinearSystem, SolverError> {
    if geo.n() != p.n {
        return Err(ConditionError::Dimension { what: "ansatz".into(), expected: geo.n(), found: p.n }.into());
    }
    let unknowns: Vec<String> = p.unknowns().into_iter().map(|u| u.name).collect();
    let m = unknowns.len();
    let (g, w) = p.symbolic();
    let cells = multiplier_cells(geo, p.suite, &g, w.as_ref());
    let mut seen: HashSet<(Vec<Rational>, Rational)> = HashSet::new();
    let mut equations = Vec::new();
    for cell in cells.iter().filter(|c| c.expect == Expect::Zero) {
        let by_unknown = cell.residual.numer().split_by(|v| unknown_index(v).is_some());
        let mut rows: BTreeMap<Monomial, (Vec<Rational>, Rational)> = BTreeMap::new();
        for (um, poly) in by_unknown {
            let slot = match um.factors() {
                [] => None,
                [(v, 1)] => unknown_index(*v),
                _ => return Err(SolverError::Nonlinear(cell.label.clone())),
            };
            for (mono, c) in poly.terms() {
                let row = rows.entry(mono.clone()).or_insert_with(|| (vec![Rational::zero(); m], Rational::zero()));
                match slot {
                    Some(k) => row.0[k] += c,
                    None => row.1 -= c,
                }
            }
        }
        for (mono, (coeffs, rhs)) in rows {
            let Some(lead) = coeffs.iter().find(|c| !c.is_zero()).cloned().or_else(|| (!rhs.is_zero()).then(|| rhs.clone()))
            else {
                continue;
            };
            let key = (coeffs.iter().map(|c| c / &lead).collect(), &rhs / &lead);
            if seen.insert(key) {
                let origin = if mono.is_one() { cell.label.clone() } else { format!("{} @ {}", cell.label, Expr::from_poly(crate::expr::Poly::term(mono, Rational::one()))) };
                equations.push(Equation { coeffs, rhs, origin });
            }
        }
    }
    Ok(LinearSystem { unknowns, equations })
}

/// The solution set of a linear system: `particular + span(basis)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolutionSpace {
    pub unknowns: Vec<String>,
    pub equations: usize,
    pub rank: usize,
    /// None when the system is inconsistent.
    pub particular: Option<Vec<Rational>>,
    /// Primitive integer vectors, one per free unknown in declaration
    /// order, scaled so the first non-zero entry is positive.
    pub basis: Vec<Vec<Rational>>,
    /// The equation that reduced to 0 = c ≠ 0, when inconsistent.
    pub inconsistency: Option<String>,
}

impl SolutionSpace {
    pub fn dimension(&self) -> usize {
        if self.particular.is_some() {
            self.basis.len()
        } else {
            0
        }
    }

    pub fn is_consistent(&self) -> bool {
        self.particular.is_some()
    }

    /// True when the only solution is the zero vector.
    pub fn is_trivial(&self) -> bool {
        self.basis.is_empty() && self.particular.as_ref().is_none_or(|p| p.iter().all(|c| c.is_zero()))
    }

    /// particular + Σ tₖ·basis[k].
    pub fn combine<T: Into<Rational> + Clone>(&self, t: &[T]) -> Option<Vec<Rational>> {
        let mut out = self.particular.clone()?;
        for (b, tk) in self.basis.iter().zip(t) {
            let tk: Rational = tk.clone().into();
            for (o, bi) in out.iter_mut().zip(b) {
                *o += &tk * bi;
            }
        }
        Some(out)
    }
}

fn primitive(v: Vec<Rational>) -> Vec<Rational> {
    use num_integer::Integer;
    let den = v.iter().fold(num_bigint::BigInt::one(), |acc, c| acc.lcm(c.denom()));
    let ints: Vec<num_bigint::BigInt> = v.iter().map(|c| (c * Rational::from_integer(den.clone())).to_integer()).collect();
    let g = ints.iter().fold(num_bigint::BigInt::zero(), |acc, c| acc.gcd(c));
    if g.is_zero() {
        return v;
    }
    let sign = if ints.iter().find(|c| !c.is_zero()).is_some_and(|c| c.is_negative()) { -g.clone() } else { g.clone() };
    ints.into_iter().map(|c| Rational::from_integer(c / &sign)).collect()
}

/// Exact reduced row echelon form; free unknowns in declaration order.
pub fn solve(system: &LinearSystem) -> SolutionSpace {
    let m = system.unknowns.len();
    let mut rows: Vec<(Vec<Rational>, Rational, usize)> =
        system.equations.iter().enumerate().map(|(k, e)| (e.coeffs.clone(), e.rhs.clone(), k)).collect();
    let mut pivots: Vec<usize> = Vec::new();
    let mut r = 0;
    for col in 0..m {
        let Some(p) = (r..rows.len()).find(|&i| !rows[i].0[col].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let inv = rows[r].0[col].recip();
        for c in rows[r].0.iter_mut() {
            *c *= &inv;
        }
        rows[r].1 *= &inv;
        let (pc, prhs) = (rows[r].0.clone(), rows[r].1.clone());
        for (i, row) in rows.iter_mut().enumerate() {
            if i == r || row.0[col].is_zero() {
                continue;
            }
            let f = row.0[col].clone();
            for (c, pcv) in row.0.iter_mut().zip(&pc) {
                if !pcv.is_zero() {
                    *c -= &f * pcv;
                }
            }
            row.1 -= &f * &prhs;
        }
        pivots.push(col);
        r += 1;
    }
    let bad = rows[r..].iter().find(|row| !row.1.is_zero());
    let base = SolutionSpace {
        unknowns: system.unknowns.clone(),
        equations: system.equations.len(),
        rank: pivots.len(),
        particular: None,
        basis: Vec::new(),
        inconsistency: None,
    };
    if let Some(row) = bad {
        return SolutionSpace { inconsistency: Some(system.equations[row.2].origin.clone()), ..base };
    }
    let mut particular = vec![Rational::zero(); m];
    for (i, &col) in pivots.iter().enumerate() {
        particular[col] = rows[i].1.clone();
    }
    let pivot_set: HashSet<usize> = pivots.iter().copied().collect();
    let basis = (0..m)
        .filter(|c| !pivot_set.contains(c))
        .map(|free| {
            let mut v = vec![Rational::zero(); m];
            v[free] = Rational::one();
            for (i, &col) in pivots.iter().enumerate() {
                v[col] = -rows[i].0[free].clone();
            }
            primitive(v)
        })
        .collect();
    SolutionSpace { particular: Some(particular), basis, ..base }
}

/// The suite report for a concrete g (and ω), including regularity.
pub fn check_suite(geo: &SodeGeometry, suite: Suite, g: &TensorField, omega: Option<&TensorField>) -> Result<ConditionReport, SolverError> {
    let zero = TensorField::zeros(0, 2, geo.n());
    Ok(match suite {
        Suite::Classical => conditions::check_classical(geo, g)?,
        Suite::Thm3 => conditions::check_multiplier_dissipative(geo, g)?,
        Suite::Thm4 => conditions::check_multiplier_gyroscopic(geo, g)?,
        Suite::Prop2a => conditions::check_prop2a(geo, g)?,
        Suite::Rayleigh => conditions::check_rayleigh(geo, g)?,
        Suite::Gyroscopic => conditions::check_gyroscopic(geo, g, omega.unwrap_or(&zero))?,
        Suite::Dissipative | Suite::Implicit => return Err(SolverError::UnsupportedSuite(suite.name().into())),
    })
}

/// Ansatz g entries that vanish for every solution: no fixed part and all
/// their coefficients zero in the particular solution and every basis vector.
pub fn forced_zero_entries(p: &AnsatzProblem, space: &SolutionSpace) -> Vec<(usize, usize)> {
    let unknowns = p.unknowns();
    let Some(part) = &space.particular else {
        return Vec::new();
    };
    p.g_entries()
        .iter()
        .filter(|(&(i, j), e)| {
            e.fixed.is_zero()
                && unknowns.iter().enumerate().filter(|(_, u)| u.target == Target::G(i, j)).all(|(k, _)| {
                    part[k].is_zero() && space.basis.iter().all(|b| b[k].is_zero())
                })
        })
        .map(|(&ij, _)| ij)
        .collect()
}

/// Symbolic soundness re-check: the particular solution and every basis
/// vector (the latter without fixed parts) make all residuals vanish.
pub fn recheck(geo: &SodeGeometry, p: &AnsatzProblem, space: &SolutionSpace) -> Result<(), SolverError> {
    let Some(part) = &space.particular else {
        return Ok(());
    };
    let mut candidates = vec![(part.clone(), true)];
    candidates.extend(space.basis.iter().map(|b| (b.clone(), false)));
    for (vector, with_fixed) in candidates {
        let values: Vec<Expr> = vector.iter().map(|c| Expr::constant(c.clone())).collect();
        let (g, w) = p.instantiate_with(&values, with_fixed);
        for cell in multiplier_cells(geo, p.suite, &g, w.as_ref()) {
            if cell.expect == Expect::Zero && !cell.pass {
                return Err(SolverError::Unsound(cell.label));
            }
        }
    }
    Ok(())
}

/// Assemble, solve and re-check.
pub fn solve_problem(geo: &SodeGeometry, p: &AnsatzProblem) -> Result<(LinearSystem, SolutionSpace), SolverError> {
    let system = assemble(geo, p)?;
    let space = solve(&system);
    recheck(geo, p, &space)?;
    Ok((system, space))
}

#[derive(Debug, Clone)]
pub struct Representative {
    /// Integer combination of the basis vectors.
    pub combination: Vec<i64>,
    pub values: Vec<Rational>,
    pub g: TensorField,
    pub omega: Option<TensorField>,
    pub det: Expr,
    pub report: ConditionReport,
}

#[derive(Debug, Clone)]
pub enum SearchOutcome {
    Found(Box<Representative>),
    /// Every member of the solution space is singular; the reason says why.
    StructurallySingular(String),
    /// No nonsingular member inside the searched box.
    Exhausted { tried: u64, bound: u32, capped: bool },
}

impl SearchOutcome {
    pub fn representative(&self) -> Option<&Representative> {
        match self {
            SearchOutcome::Found(r) => Some(r),
            _ => None,
        }
    }

    pub fn is_definitive_none(&self) -> bool {
        matches!(self, SearchOutcome::StructurallySingular(_))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchOptions {
    pub bound: u32,
    pub cap: u64,
    pub seed: u64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions { bound: 2, cap: 200_000, seed: 0 }
    }
}

fn random_point(rng: &mut ChaCha8Rng, vars: &[Var]) -> BTreeMap<Var, Rational> {
    vars.iter()
        .map(|&v| {
            let num: i64 = rng.gen_range(-40..=40);
            let den: i64 = rng.gen_range(7..=23);
            (v, Rational::new(num.into(), den.into()))
        })
        .collect()
}

fn rational_det(mut m: Vec<Vec<Rational>>) -> Rational {
    let n = m.len();
    let mut det = Rational::one();
    for c in 0..n {
        let Some(p) = (c..n).find(|&r| !m[r][c].is_zero()) else {
            return Rational::zero();
        };
        if p != c {
            m.swap(p, c);
            det = -det;
        }
        det *= &m[c][c];
        for r in c + 1..n {
            if m[r][c].is_zero() {
                continue;
            }
            let f = &m[r][c] / &m[c][c];
            for k in c..n {
                let t = &f * &m[c][k];
                m[r][k] -= t;
            }
        }
    }
    det
}

/// det g at a random point, resampling on poles.
fn det_at_random_point(g: &TensorField, vars: &[Var], rng: &mut ChaCha8Rng) -> Option<Rational> {
    for _ in 0..20 {
        let point = random_point(rng, vars);
        let rows: Result<Vec<Vec<Rational>>, _> = g.rows().iter().map(|row| row.iter().map(|e| e.eval(&point)).collect()).collect();
        if let Ok(rows) = rows {
            return Some(rational_det(rows));
        }
    }
    None
}

fn vars_of(g: &TensorField) -> Vec<Var> {
    let mut set = std::collections::BTreeSet::new();
    for e in g.entries() {
        set.extend(e.vars());
    }
    set.into_iter().collect()
}

/// Integer vectors with max-norm exactly `s` in `d` slots, values ordered
/// 0, 1, −1, 2, −2, ….
fn shell(d: usize, s: i64) -> impl Iterator<Item = Vec<i64>> {
    let values: Vec<i64> = std::iter::once(0).chain((1..=s).flat_map(|k| [k, -k])).collect();
    let radix = values.len();
    let total = (radix as u128).checked_pow(d as u32).unwrap_or(u128::MAX);
    (0..total).filter_map(move |mut idx| {
        let mut v = vec![0i64; d];
        for slot in v.iter_mut().rev() {
            *slot = values[(idx % radix as u128) as usize];
            idx /= radix as u128;
        }
        v.iter().any(|c| c.abs() == s).then_some(v)
    })
}

/// Looks for a member of the solution space with det g ≢ 0. A row of g
/// that vanishes for every member, or a determinant vanishing identically
/// on the whole space, is a definitive negative; otherwise integer
/// combinations in [−bound, bound] are enumerated shell by shell.
pub fn find_nonsingular(
    geo: &SodeGeometry,
    p: &AnsatzProblem,
    space: &SolutionSpace,
    opts: SearchOptions,
) -> Result<SearchOutcome, SolverError> {
    let n = p.n();
    let Some(part) = &space.particular else {
        return Ok(SearchOutcome::StructurallySingular("the linear system is inconsistent".into()));
    };
    if space.is_trivial() {
        let (g, _) = p.instantiate(part);
        if g.is_zero() {
            return Ok(SearchOutcome::StructurallySingular("the solution space contains only g = 0".into()));
        }
    }
    // general member with the free coefficients as symbols
    let d = space.basis.len();
    let t: Vec<Expr> = (0..d).map(|k| Expr::var(unknown_var(k))).collect();
    let general: Vec<Expr> = (0..part.len())
        .map(|i| {
            let mut acc = Expr::constant(part[i].clone());
            for (k, b) in space.basis.iter().enumerate() {
                if !b[i].is_zero() {
                    acc = acc + &t[k] * &Expr::constant(b[i].clone());
                }
            }
            acc
        })
        .collect();
    let (gen_g, _) = p.instantiate_with(&general, true);
    for i in 0..n {
        if (0..n).all(|j| gen_g.at(i, j).is_zero()) {
            return Ok(SearchOutcome::StructurallySingular(format!("row {} of g vanishes for every solution", i + 1)));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let gen_vars = vars_of(&gen_g);
    let generic_zero = (0..3).all(|_| det_at_random_point(&gen_g, &gen_vars, &mut rng).is_none_or(|x| x.is_zero()));
    if generic_zero && gen_g.determinant().is_zero() {
        return Ok(SearchOutcome::StructurallySingular("det g vanishes identically on the solution space".into()));
    }

    let mut tried = 0u64;
    // the zero combination is the particular solution, worth trying only
    // when the system is inhomogeneous
    let first = if part.iter().all(|c| c.is_zero()) { 1 } else { 0 };
    let mut candidates: Box<dyn Iterator<Item = Vec<i64>>> = if d == 0 {
        Box::new(std::iter::once(Vec::new()))
    } else {
        Box::new((first..=opts.bound as i64).flat_map(move |s| shell(d, s)))
    };
    loop {
        let Some(combo) = candidates.next() else {
            return Ok(SearchOutcome::Exhausted { tried, bound: opts.bound, capped: false });
        };
        if tried >= opts.cap {
            return Ok(SearchOutcome::Exhausted { tried, bound: opts.bound, capped: true });
        }
        tried += 1;
        let values = space.combine(&combo.iter().map(|&c| Rational::from_integer(c.into())).collect::<Vec<_>>()).expect("consistent");
        let (g, w) = p.instantiate(&values);
        let det = g.determinant();
        if det.is_zero() {
            continue;
        }
        let report = check_suite(geo, p.suite, &g, w.as_ref())?;
        if !report.pass {
            let failing: Vec<&str> = report.failing().map(|c| c.label.as_str()).collect();
            return Err(SolverError::Unsound(failing.join(", ")));
        }
        return Ok(SearchOutcome::Found(Box::new(Representative { combination: combo, values, g, omega: w, det, report })));
    }
}

/// Replaces parameters by rational values in f.
pub fn instantiate_sode(s: &Sode, values: &HashMap<Var, Rational>) -> Result<Sode, SolverError> {
    let bindings: HashMap<Var, Expr> = values.iter().map(|(v, c)| (*v, Expr::constant(c.clone()))).collect();
    let f = s.f().iter().map(|e| e.subst(&bindings)).collect::<Result<Vec<_>, _>>()?;
    Ok(Sode::new(s.ctx().clone(), f)?)
}
