//! Optional sampling of the derivatives computed by [`Expr::diff`], so a
//! caller can cross-check them against finite differences afterwards.

use std::cell::RefCell;

use super::{Expr, Var};

#[derive(Clone, Debug)]
pub struct DerivativeSample {
    pub expr: Expr,
    pub var: Var,
    pub derivative: Expr,
}

struct Recorder {
    cap: usize,
    seen: u64,
    state: u64,
    samples: Vec<DerivativeSample>,
}

thread_local! {
    static RECORDER: RefCell<Option<Recorder>> = const { RefCell::new(None) };
}

/// Runs `f` while reservoir-sampling up to `cap` derivative computations
/// made on the current thread.
pub fn record_derivatives<R>(cap: usize, seed: u64, f: impl FnOnce() -> R) -> (R, Vec<DerivativeSample>) {
    let prev = RECORDER.with(|r| {
        r.borrow_mut().replace(Recorder { cap, seen: 0, state: seed | 1, samples: Vec::new() })
    });
    let out = f();
    let rec = RECORDER.with(|r| std::mem::replace(&mut *r.borrow_mut(), prev));
    (out, rec.map(|r| r.samples).unwrap_or_default())
}

pub(super) fn note(expr: &Expr, var: Var, derivative: &Expr) {
    RECORDER.with(|r| {
        let mut guard = r.borrow_mut();
        let Some(rec) = guard.as_mut() else {
            return;
        };
        // constant results carry no information worth re-checking
        if !expr.depends_on(var) {
            return;
        }
        rec.seen += 1;
        let sample = || DerivativeSample { expr: expr.clone(), var, derivative: derivative.clone() };
        if rec.samples.len() < rec.cap {
            rec.samples.push(sample());
        } else {
            // xorshift64
            rec.state ^= rec.state << 13;
            rec.state ^= rec.state >> 7;
            rec.state ^= rec.state << 17;
            let j = (rec.state % rec.seen) as usize;
            if j < rec.cap {
                rec.samples[j] = sample();
            }
        }
    });
}
