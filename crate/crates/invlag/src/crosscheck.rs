//! Randomized numeric confirmation of symbolic verdicts: every passing
//! zero-cell is re-evaluated term by term at random rational points (the sum
//! must be exactly 0), and recorded derivatives are compared with central
//! finite differences.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::conditions::{ConditionReport, Expect};
use crate::expr::{DerivativeSample, Expr, ExprError, Rational, Var};

/// Environment variable holding the seed for randomized checks.
pub const SEED_VAR: &str = "INVLAG_SEED";
const DEFAULT_SEED: u64 = 0x1a9_5eed;

/// The seed from `INVLAG_SEED`, or a fixed default.
pub fn seed_from_env() -> u64 {
    std::env::var(SEED_VAR).ok().and_then(|s| s.trim().parse().ok()).unwrap_or(DEFAULT_SEED)
}

/// Random sample points with coordinates of absolute value in [1/2, 3/2].
pub struct Sampler {
    rng: ChaCha8Rng,
}

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Sampler { rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn from_env() -> Self {
        Self::new(seed_from_env())
    }

    pub fn rational(&mut self) -> Rational {
        let den: i64 = self.rng.gen_range(4..=16);
        let num: i64 = self.rng.gen_range((den + 1) / 2..=(3 * den) / 2);
        let sign = if self.rng.gen_bool(0.5) { 1 } else { -1 };
        Rational::new((sign * num).into(), den.into())
    }

    pub fn float(&mut self) -> f64 {
        let x: f64 = self.rng.gen_range(0.5..=1.5);
        if self.rng.gen_bool(0.5) {
            x
        } else {
            -x
        }
    }

    pub fn point(&mut self, vars: &BTreeSet<Var>) -> BTreeMap<Var, Rational> {
        vars.iter().map(|&v| (v, self.rational())).collect()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct NumericCheck {
    pub checked: usize,
    pub evaluations: usize,
    /// Items skipped because every sampled point was a pole.
    pub skipped: usize,
    pub failures: Vec<String>,
}

impl NumericCheck {
    pub fn ok(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn merge(&mut self, other: NumericCheck) {
        self.checked += other.checked;
        self.evaluations += other.evaluations;
        self.skipped += other.skipped;
        self.failures.extend(other.failures);
    }
}

const MAX_RESAMPLES: usize = 50;

/// Evaluates each term of every passing zero-cell at `points` random
/// non-pole points; their sum must vanish exactly. Passing non-zero cells
/// must be non-zero at one of the points.
pub fn crosscheck_report(report: &ConditionReport, sampler: &mut Sampler, points: usize) -> NumericCheck {
    let mut out = NumericCheck::default();
    for cell in report.cells.iter().filter(|c| c.pass) {
        let terms: Vec<Expr> = match cell.expect {
            Expect::Zero => cell.terms().to_vec(),
            Expect::NonZero => vec![cell.residual.clone()],
        };
        let vars: BTreeSet<Var> = terms.iter().flat_map(|t| t.vars()).collect();
        out.checked += 1;
        let mut good = 0;
        let mut nonzero_seen = false;
        for _ in 0..points * MAX_RESAMPLES {
            if good == points {
                break;
            }
            let point = sampler.point(&vars);
            let values: Result<Vec<Rational>, ExprError> = terms.iter().map(|t| t.eval(&point)).collect();
            let Ok(values) = values else {
                continue;
            };
            good += 1;
            out.evaluations += 1;
            let sum: Rational = values.into_iter().sum();
            match cell.expect {
                Expect::Zero if !sum.is_zero() => {
                    out.failures.push(format!("{}: residual {} at a sample point", cell.label, sum));
                    break;
                }
                Expect::NonZero if !sum.is_zero() => nonzero_seen = true,
                _ => {}
            }
        }
        if good == 0 {
            out.skipped += 1;
        } else if cell.expect == Expect::NonZero && !nonzero_seen {
            out.failures.push(format!("{}: vanishes at every sample point", cell.label));
        }
    }
    out
}

const STEP: f64 = 1e-5;
const TOLERANCE: f64 = 1e-6;

/// Compares each recorded derivative with a central finite difference at a
/// random point, to relative tolerance 1e−6.
pub fn crosscheck_derivatives(samples: &[DerivativeSample], sampler: &mut Sampler) -> NumericCheck {
    let mut out = NumericCheck::default();
    for s in samples {
        out.checked += 1;
        let vars = s.expr.vars();
        let mut done = false;
        for _ in 0..MAX_RESAMPLES {
            let mut point: BTreeMap<Var, f64> = vars.iter().map(|&v| (v, sampler.float())).collect();
            if !well_conditioned(&s.expr, &point) || !well_conditioned(&s.derivative, &point) {
                continue;
            }
            let x = point[&s.var];
            let exact = s.derivative.eval_f64(&point);
            point.insert(s.var, x + STEP);
            let up = s.expr.eval_f64(&point);
            point.insert(s.var, x - STEP);
            let down = s.expr.eval_f64(&point);
            let fd = (up - down) / (2.0 * STEP);
            out.evaluations += 1;
            if !fd.is_finite() || !exact.is_finite() {
                continue;
            }
            if (fd - exact).abs() > TOLERANCE * exact.abs().max(1.0) {
                out.failures.push(format!("d/d{} of {}: symbolic {exact}, finite difference {fd}", s.var, s.expr));
            }
            done = true;
            break;
        }
        if !done {
            out.skipped += 1;
        }
    }
    out
}

/// Away from poles, so finite differences are meaningful.
fn well_conditioned(e: &Expr, point: &BTreeMap<Var, f64>) -> bool {
    let den = Expr::from_poly(e.denom().clone()).eval_f64(point);
    den.abs() > 1e-2
}
