//! The JSON problem file and its translation into library objects.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use super::CliError;
use crate::conditions::{ImplicitSystem, Suite};
use crate::expr::{Expr, ExprContext, Rational, Var};
use crate::geometry::Sode;
use crate::solver::{AnsatzEntry, AnsatzProblem};
use crate::tensor::TensorField;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Explicit,
    Implicit,
}

/// Candidate data: a multiplier, a dissipation function, a Lagrangian and
/// a gyroscopic 2-form, each optional.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Candidate {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g: Option<Vec<Vec<String>>>,
    #[serde(rename = "D", default, skip_serializing_if = "Option::is_none")]
    pub d: Option<String>,
    #[serde(rename = "L", default, skip_serializing_if = "Option::is_none")]
    pub l: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega: Option<Vec<Vec<String>>>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnsatzSpec {
    pub suite: String,
    /// "constant" or "polynomial"; absent means only the explicit entries.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<String>,
    #[serde(default)]
    pub degree: u32,
    /// Variables of the polynomial family; all positions when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vars: Option<Vec<String>>,
    #[serde(default)]
    pub diagonal: bool,
    /// Per-entry bases keyed "i,j" (1-based), replacing the family's.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub entries: BTreeMap<String, Vec<String>>,
    /// Known parts of entries, keyed "i,j".
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub fixed: BTreeMap<String, String>,
    /// Bases for ω entries keyed "i,j" (gyroscopic suite only).
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub omega: BTreeMap<String, Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bound: Option<u32>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Options {
    /// Parameter values "p/q", applied to every expression on load.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub instantiate: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<String>,
    /// Default suite for `check` and `reconstruct`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub suite: Option<String>,
    /// Further named candidates, selected with `--candidate`.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub candidates: BTreeMap<String, Candidate>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub n: usize,
    #[serde(default)]
    pub parameters: Vec<String>,
    #[serde(default)]
    pub mode: Mode,
    pub f: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g: Option<Vec<Vec<String>>>,
    #[serde(rename = "D", default, skip_serializing_if = "Option::is_none")]
    pub d: Option<String>,
    #[serde(rename = "L", default, skip_serializing_if = "Option::is_none")]
    pub l: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega: Option<Vec<Vec<String>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ansatz: Option<AnsatzSpec>,
    #[serde(default, skip_serializing_if = "is_default")]
    pub options: Options,
}

fn is_default(o: &Options) -> bool {
    *o == Options::default()
}

impl ProblemFile {
    pub fn from_json(name: &str, text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Json { file: name.into(), line: e.line(), column: e.column(), message: e.to_string() })
    }
}

/// Parses "p/q" or "p" as a rational.
pub fn parse_rational(text: &str) -> Option<Rational> {
    let text = text.trim();
    let (num, den) = match text.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (text, "1"),
    };
    let num: num_bigint::BigInt = num.parse().ok()?;
    let den: num_bigint::BigInt = den.parse().ok()?;
    if den == 0.into() {
        return None;
    }
    Some(Rational::new(num, den))
}

/// "i,j" (1-based) to 0-based indices below n.
fn parse_key(key: &str, n: usize) -> Option<(usize, usize)> {
    let (i, j) = key.split_once(',')?;
    let i: usize = i.trim().parse().ok()?;
    let j: usize = j.trim().parse().ok()?;
    (1..=n).contains(&i).then_some(())?;
    (1..=n).contains(&j).then_some(())?;
    Some((i - 1, j - 1))
}

/// Candidate data after parsing.
#[derive(Debug, Clone, Default)]
pub struct LoadedCandidate {
    pub g: Option<TensorField>,
    pub d: Option<Expr>,
    pub l: Option<Expr>,
    pub omega: Option<TensorField>,
}

#[derive(Debug, Clone)]
pub enum System {
    Explicit(Sode),
    Implicit(ImplicitSystem),
}

/// A problem file resolved against its context.
#[derive(Debug, Clone)]
pub struct Problem {
    pub file: ProblemFile,
    pub name: String,
    pub ctx: ExprContext,
    pub system: System,
    pub candidate: LoadedCandidate,
    pub candidate_name: Option<String>,
    pub ansatz: Option<(AnsatzProblem, Option<u32>)>,
}

struct Loader<'a> {
    name: &'a str,
    raw: &'a str,
    ctx: &'a ExprContext,
    values: HashMap<Var, Expr>,
}

impl Loader<'_> {
    /// Line of the first occurrence of the JSON-encoded string, if any.
    fn line_of(&self, text: &str) -> Option<usize> {
        let encoded = serde_json::to_string(text).ok()?;
        let at = self.raw.find(&encoded)?;
        Some(self.raw[..at].matches('\n').count() + 1)
    }

    fn expr(&self, field: &str, text: &str) -> Result<Expr, CliError> {
        let e = self.ctx.parse(text).map_err(|err| CliError::Parse {
            file: self.name.into(),
            field: field.into(),
            line: self.line_of(text),
            message: err.to_string(),
        })?;
        if self.values.is_empty() {
            return Ok(e);
        }
        e.subst(&self.values).map_err(|err| CliError::Invalid(format!("{field}: {err}")))
    }

    fn matrix(&self, field: &str, rows: &[Vec<String>]) -> Result<TensorField, CliError> {
        let n = self.ctx.n();
        if rows.len() != n || rows.iter().any(|r| r.len() != n) {
            return Err(CliError::Invalid(format!("{field} must be a {n}x{n} matrix")));
        }
        let parsed = rows
            .iter()
            .enumerate()
            .map(|(i, r)| r.iter().enumerate().map(|(j, s)| self.expr(&format!("{field}[{},{}]", i + 1, j + 1), s)).collect())
            .collect::<Result<Vec<Vec<Expr>>, _>>()?;
        Ok(TensorField::from_rows(parsed))
    }

    fn basis(&self, field: &str, list: &[String]) -> Result<Vec<Expr>, CliError> {
        list.iter().map(|s| self.expr(field, s)).collect()
    }
}

pub fn parse_suite(name: &str) -> Result<Suite, CliError> {
    name.parse().map_err(|_| CliError::Usage(format!("unknown suite '{name}'")))
}

impl Problem {
    pub fn load(
        name: &str,
        raw: &str,
        candidate: Option<&str>,
        instantiate: &[(String, Rational)],
        suite_override: Option<Suite>,
    ) -> Result<Problem, CliError> {
        let file = ProblemFile::from_json(name, raw)?;
        let params: Vec<&str> = file.parameters.iter().map(String::as_str).collect();
        let ctx = match file.mode {
            Mode::Explicit => ExprContext::explicit(file.n, &params),
            Mode::Implicit => ExprContext::implicit(file.n, &params),
        }
        .map_err(|e| CliError::Invalid(format!("{name}: {e}")))?;
        if file.f.len() != file.n {
            return Err(CliError::Invalid(format!("f has {} entries but n = {}", file.f.len(), file.n)));
        }

        let mut values = HashMap::new();
        let from_file = file.options.instantiate.iter().map(|(k, v)| {
            parse_rational(v).map(|r| (k.clone(), r)).ok_or_else(|| CliError::Invalid(format!("instantiate {k}: '{v}' is not a rational")))
        });
        let mut pairs = from_file.collect::<Result<Vec<_>, _>>()?;
        pairs.extend(instantiate.iter().cloned());
        for (k, r) in pairs {
            let v = ctx.param(&k).ok_or_else(|| CliError::Usage(format!("instantiate: '{k}' is not a declared parameter")))?;
            values.insert(v, Expr::constant(r));
        }
        let loader = Loader { name, raw, ctx: &ctx, values };

        let f = file.f.iter().enumerate().map(|(i, s)| loader.expr(&format!("f[{}]", i + 1), s)).collect::<Result<Vec<_>, _>>()?;
        let system = match file.mode {
            Mode::Explicit => System::Explicit(Sode::new(ctx.clone(), f).map_err(|e| CliError::Invalid(e.to_string()))?),
            Mode::Implicit => System::Implicit(ImplicitSystem::new(ctx.clone(), f).map_err(|e| CliError::Invalid(e.to_string()))?),
        };

        let chosen = match candidate {
            None => Candidate { g: file.g.clone(), d: file.d.clone(), l: file.l.clone(), omega: file.omega.clone() },
            Some(c) => file
                .options
                .candidates
                .get(c)
                .cloned()
                .ok_or_else(|| CliError::Usage(format!("no candidate named '{c}' in {name}")))?,
        };
        let mut loaded = LoadedCandidate::default();
        if let Some(g) = &chosen.g {
            let g = loader.matrix("g", g)?;
            if !g.satisfies(crate::tensor::Symmetry::Symmetric(0, 1)) {
                return Err(CliError::Invalid("g is not symmetric as written".into()));
            }
            loaded.g = Some(g.with_symmetry(crate::tensor::Symmetry::Symmetric(0, 1)));
        }
        if let Some(w) = &chosen.omega {
            let w = loader.matrix("omega", w)?;
            if !w.satisfies(crate::tensor::Symmetry::Antisymmetric(0, 1)) {
                return Err(CliError::Invalid("omega is not antisymmetric as written".into()));
            }
            loaded.omega = Some(w.with_symmetry(crate::tensor::Symmetry::Antisymmetric(0, 1)));
        }
        loaded.d = chosen.d.as_deref().map(|s| loader.expr("D", s)).transpose()?;
        loaded.l = chosen.l.as_deref().map(|s| loader.expr("L", s)).transpose()?;

        let ansatz = match &file.ansatz {
            None => None,
            Some(spec) => Some(build_ansatz(&loader, spec, suite_override)?),
        };
        Ok(Problem { name: name.into(), ctx: ctx.clone(), system, candidate: loaded, candidate_name: candidate.map(Into::into), ansatz, file })
    }

    pub fn sode(&self) -> Result<&Sode, CliError> {
        match &self.system {
            System::Explicit(s) => Ok(s),
            System::Implicit(_) => Err(CliError::Usage("this command needs an explicit-mode problem".into())),
        }
    }
}

fn build_ansatz(loader: &Loader, spec: &AnsatzSpec, suite_override: Option<Suite>) -> Result<(AnsatzProblem, Option<u32>), CliError> {
    let n = loader.ctx.n();
    let suite = match suite_override {
        Some(s) => s,
        None => parse_suite(&spec.suite)?,
    };
    let mut p = match spec.family.as_deref() {
        None => AnsatzProblem::new(suite, n),
        Some("constant") => AnsatzProblem::constant(suite, n),
        Some("polynomial") => {
            let vars = match &spec.vars {
                None => (1..=n).map(Var::q).collect(),
                Some(names) => names
                    .iter()
                    .map(|s| match loader.expr("ansatz.vars", s)?.vars().into_iter().collect::<Vec<_>>().as_slice() {
                        [v] => Ok(*v),
                        _ => Err(CliError::Invalid(format!("ansatz.vars: '{s}' is not a single variable"))),
                    })
                    .collect::<Result<Vec<_>, _>>()?,
            };
            AnsatzProblem::polynomial(suite, n, &vars, spec.degree)
        }
        Some(other) => return Err(CliError::Invalid(format!("unknown ansatz family '{other}'"))),
    }
    .map_err(|e| CliError::Invalid(e.to_string()))?;
    if spec.diagonal {
        p = p.diagonal();
    }
    let key = |k: &str| parse_key(k, n).ok_or_else(|| CliError::Invalid(format!("ansatz key '{k}' is not 'i,j' with 1 ≤ i,j ≤ {n}")));
    for (k, list) in &spec.entries {
        let (i, j) = key(k)?;
        let basis = loader.basis(&format!("ansatz.entries[{k}]"), list)?;
        let fixed = p.g_entries().get(&(i.min(j), i.max(j))).map(|e| e.fixed.clone()).unwrap_or_default();
        p.set_entry(i, j, AnsatzEntry { fixed, basis }).map_err(|e| CliError::Invalid(e.to_string()))?;
    }
    for (k, s) in &spec.fixed {
        let (i, j) = key(k)?;
        let fixed = loader.expr(&format!("ansatz.fixed[{k}]"), s)?;
        let basis = p.g_entries().get(&(i.min(j), i.max(j))).map(|e| e.basis.clone()).unwrap_or_default();
        p.set_entry(i, j, AnsatzEntry { fixed, basis }).map_err(|e| CliError::Invalid(e.to_string()))?;
    }
    for (k, list) in &spec.omega {
        let (i, j) = key(k)?;
        let basis = loader.basis(&format!("ansatz.omega[{k}]"), list)?;
        p.set_omega(i, j, AnsatzEntry::basis(basis)).map_err(|e| CliError::Invalid(e.to_string()))?;
    }
    Ok((p, spec.bound))
}
