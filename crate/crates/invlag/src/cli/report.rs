//! JSON renderings shared by the commands.

use serde_json::{json, Map, Value};

use crate::conditions::{ConditionReport, Expect};
use crate::crosscheck::NumericCheck;
use crate::expr::{Expr, ExprContext};
use crate::reconstruct::{Certificate, Force};
use crate::tensor::TensorField;

pub fn expr_json(e: &Expr, ctx: &ExprContext) -> Value {
    Value::String(ctx.print(e))
}

/// Nested arrays of expression strings, one level per index.
pub fn tensor_json(t: &TensorField, ctx: &ExprContext) -> Value {
    fn level(t: &TensorField, ctx: &ExprContext, prefix: &mut Vec<usize>) -> Value {
        if prefix.len() == t.rank() {
            return expr_json(t.get(prefix), ctx);
        }
        let items = (0..t.n())
            .map(|i| {
                prefix.push(i);
                let v = level(t, ctx, prefix);
                prefix.pop();
                v
            })
            .collect();
        Value::Array(items)
    }
    level(t, ctx, &mut Vec::new())
}

pub fn report_json(r: &ConditionReport, ctx: &ExprContext) -> Value {
    let cells: Vec<Value> = r
        .cells
        .iter()
        .map(|c| {
            json!({
                "label": c.label,
                "expect": match c.expect { Expect::Zero => "zero", Expect::NonZero => "nonzero" },
                "pass": c.pass,
                "residual": ctx.print(&c.residual),
            })
        })
        .collect();
    let mut out = Map::new();
    out.insert("suite".into(), json!(r.suite));
    out.insert("pass".into(), json!(r.pass));
    out.insert("cells".into(), Value::Array(cells));
    if let Some(d) = &r.determinant {
        out.insert("determinant".into(), expr_json(d, ctx));
    }
    out.insert("notes".into(), json!(r.notes));
    Value::Object(out)
}

pub fn crosscheck_json(points: usize, cells: &NumericCheck, derivatives: &NumericCheck) -> Value {
    json!({
        "ok": cells.ok() && derivatives.ok(),
        "points": points,
        "cells_checked": cells.checked,
        "evaluations": cells.evaluations,
        "derivatives_checked": derivatives.checked,
        "skipped": cells.skipped + derivatives.skipped,
        "failures": cells.failures.iter().chain(&derivatives.failures).collect::<Vec<_>>(),
    })
}

pub fn certificate_json(c: &Certificate, ctx: &ExprContext) -> Value {
    let mut out = Map::new();
    out.insert("kind".into(), json!(c.kind.name()));
    out.insert("L".into(), expr_json(&c.lagrangian, ctx));
    let mut gauge = Map::new();
    gauge.insert("L".into(), expr_json(&c.gauge.lagrangian, ctx));
    match &c.force {
        Force::Dissipation(d) => {
            out.insert("D".into(), expr_json(d, ctx));
            gauge.insert("D".into(), expr_json(&c.gauge.dissipation, ctx));
        }
        Force::Gyroscopic(w) => {
            out.insert("omega".into(), tensor_json(w, ctx));
            if let Some(gw) = &c.gauge.omega {
                gauge.insert("omega".into(), tensor_json(gw, ctx));
            }
        }
    }
    out.insert("gauge".into(), Value::Object(gauge));
    Value::Object(out)
}

/// Matrix rows as expression strings, for writing problem files.
pub fn matrix_strings(t: &TensorField, ctx: &ExprContext) -> Vec<Vec<String>> {
    t.rows().iter().map(|r| r.iter().map(|e| ctx.print(e)).collect()).collect()
}
