//! Helpers shared by the integration tests: bundled fixtures and random
//! systems drawn from a seeded generator.

#![allow(dead_code)]

use std::path::PathBuf;

use invlag::cli::problem::Problem;
use invlag::conditions::{total_derivative, ImplicitSystem};
use invlag::expr::{Expr, ExprContext, Rational, Var};
use invlag::geometry::Sode;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn example_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("examples").join(format!("{name}.json"))
}

pub fn example_text(name: &str) -> String {
    std::fs::read_to_string(example_path(name)).expect("bundled example")
}

/// Loads a bundled example, optionally selecting a named candidate.
pub fn load(name: &str, candidate: Option<&str>) -> Problem {
    Problem::load(name, &example_text(name), candidate, &[], None).expect("bundled example loads")
}

pub fn rng(stream: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(invlag::crosscheck::seed_from_env() ^ stream)
}

/// A non-zero rational in [−3, 3] with denominator 1 or 2.
pub fn coefficient(rng: &mut impl Rng) -> Rational {
    loop {
        let num: i64 = rng.gen_range(-6..=6);
        if num != 0 {
            return Rational::new(num.into(), 2.into());
        }
    }
}

/// Monomials in `vars` of total degree between `min` and `max`.
pub fn monomials(vars: &[Var], min: u32, max: u32) -> Vec<Expr> {
    invlag::solver::monomials(vars, max)
        .into_iter()
        .filter(|m| {
            let deg = m.numer().terms().next().map(|(mono, _)| mono.total_degree()).unwrap_or(0);
            deg >= min
        })
        .collect()
}

/// A sparse random polynomial: `terms` distinct monomials with random coefficients.
pub fn random_poly(rng: &mut impl Rng, basis: &[Expr], terms: usize) -> Expr {
    basis
        .choose_multiple(rng, terms.min(basis.len()))
        .map(|m| m.scale(&coefficient(rng)))
        .sum()
}

pub fn positions(n: usize) -> Vec<Var> {
    (1..=n).map(Var::q).collect()
}

pub fn velocities(n: usize) -> Vec<Var> {
    (1..=n).map(Var::v).collect()
}

/// A random SODE with polynomial right-hand side of degree ≤ 2 in (q, v).
pub fn random_sode(rng: &mut impl Rng, n: usize) -> Sode {
    let ctx = ExprContext::explicit(n, &[]).unwrap();
    let vars: Vec<Var> = positions(n).into_iter().chain(velocities(n)).collect();
    let basis = monomials(&vars, 0, 2);
    let f = (0..n).map(|_| random_poly(rng, &basis, 4)).collect();
    Sode::new(ctx, f).unwrap()
}

/// A regular Lagrangian with constant positive-definite kinetic term and a
/// polynomial potential of degree ≤ 3, plus a dissipation function of
/// degree ≤ 3 in v whose coefficients are at most linear in q.
pub struct Mechanical {
    pub ctx: ExprContext,
    pub lagrangian: Expr,
    pub dissipation: Expr,
}

pub fn random_mechanical(rng: &mut impl Rng, n: usize) -> Mechanical {
    let ctx = ExprContext::explicit(n, &[]).unwrap();
    let (q, v) = (positions(n), velocities(n));
    let half = Expr::ratio(1, 2);
    let mut kinetic = Expr::zero();
    for i in 0..n {
        // diagonally dominant: diagonal ≥ 2, off-diagonal |m| ≤ ½
        let m = Expr::int(rng.gen_range(2..=4));
        kinetic = kinetic + &half * &(&m * &(&Expr::var(v[i]) * &Expr::var(v[i])));
        for j in i + 1..n {
            let m = Expr::ratio(rng.gen_range(-2..=2), 4);
            kinetic = kinetic + &m * &(&Expr::var(v[i]) * &Expr::var(v[j]));
        }
    }
    let potential = random_poly(rng, &monomials(&q, 1, 3), 3);
    let fibre = monomials(&v, 1, 3);
    let mut dissipation = random_poly(rng, &fibre, 3);
    if rng.gen_bool(0.5) {
        let qk = Expr::var(*q.choose(rng).unwrap());
        dissipation = dissipation + &qk * &random_poly(rng, &fibre, 1);
    }
    Mechanical { ctx, lagrangian: kinetic - potential, dissipation }
}

/// fᵢ = d/dt(∂L/∂vⁱ) − ∂L/∂qⁱ − ∂D/∂vⁱ as an implicit system.
pub fn implicit_form(m: &Mechanical) -> ImplicitSystem {
    let n = m.ctx.n();
    let ctx = ExprContext::implicit(n, &[]).unwrap();
    let f = (0..n)
        .map(|i| {
            let p = m.lagrangian.diff(Var::v(i + 1));
            total_derivative(&p) - m.lagrangian.diff(Var::q(i + 1)) - m.dissipation.diff(Var::v(i + 1))
        })
        .collect();
    ImplicitSystem::new(ctx, f).unwrap()
}
