use super::{parse, Expr, ExprDisplay, ExprError, Var, VarKind};

/// Declares which variables expressions may mention.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExprContext {
    n: usize,
    max_jet_order: u8,
    parameters: Vec<String>,
    uses_time: bool,
}

impl ExprContext {
    /// Context for explicit systems: positions and velocities only.
    pub fn explicit(n: usize, parameters: &[&str]) -> Result<Self, ExprError> {
        Self::new(n, 1, parameters.iter().map(|s| s.to_string()).collect(), false)
    }

    /// Context for implicit systems: time and jets up to order four.
    pub fn implicit(n: usize, parameters: &[&str]) -> Result<Self, ExprError> {
        Self::new(n, Var::MAX_JET_ORDER, parameters.iter().map(|s| s.to_string()).collect(), true)
    }

    pub fn new(n: usize, max_jet_order: u8, parameters: Vec<String>, uses_time: bool) -> Result<Self, ExprError> {
        assert!(max_jet_order <= Var::MAX_JET_ORDER);
        for (i, p) in parameters.iter().enumerate() {
            if !is_valid_parameter_name(p) || parameters[..i].contains(p) {
                return Err(ExprError::InvalidParameterName(p.clone()));
            }
        }
        Ok(ExprContext { n, max_jet_order, parameters, uses_time })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn max_jet_order(&self) -> u8 {
        self.max_jet_order
    }

    pub fn uses_time(&self) -> bool {
        self.uses_time
    }

    pub fn parameters(&self) -> &[String] {
        &self.parameters
    }

    pub fn param(&self, name: &str) -> Option<Var> {
        self.parameters.iter().position(|p| p == name).map(Var::param)
    }

    pub fn param_vars(&self) -> impl Iterator<Item = Var> {
        (0..self.parameters.len()).map(Var::param)
    }

    pub fn param_name(&self, v: Var) -> Option<&str> {
        if v.kind() == VarKind::Parameter {
            self.parameters.get(v.index()).map(String::as_str)
        } else {
            None
        }
    }

    pub fn positions(&self) -> Vec<Var> {
        (1..=self.n).map(Var::q).collect()
    }

    pub fn velocities(&self) -> Vec<Var> {
        (1..=self.n).map(Var::v).collect()
    }

    /// Same context with a different jet cap and time flag.
    pub fn with_jets(&self, max_jet_order: u8, uses_time: bool) -> Self {
        ExprContext { max_jet_order, uses_time, ..self.clone() }
    }

    pub fn admits(&self, v: Var) -> bool {
        match v.kind() {
            VarKind::Time => self.uses_time,
            VarKind::Position | VarKind::Jet => {
                (1..=self.n).contains(&v.index()) && v.order() <= self.max_jet_order
            }
            VarKind::Parameter => v.index() < self.parameters.len(),
            VarKind::Aux => true,
        }
    }

    /// True when every variable of `e` is legal here.
    pub fn admits_expr(&self, e: &Expr) -> bool {
        e.vars().into_iter().all(|v| self.admits(v))
    }

    pub fn parse(&self, text: &str) -> Result<Expr, ExprError> {
        parse::parse(text, self)
    }

    pub fn display<'a>(&'a self, e: &'a Expr) -> ExprDisplay<'a> {
        ExprDisplay::new(e, Some(self))
    }

    pub fn print(&self, e: &Expr) -> String {
        self.display(e).to_string()
    }

    pub fn var_name(&self, v: Var) -> String {
        match self.param_name(v) {
            Some(name) => name.to_string(),
            None => v.to_string(),
        }
    }
}

/// A name taken by the coordinate grammar.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Reserved {
    Time,
    /// `q<k>` (order 0), `v<k>` (order 1) or `d<order>q<k>`.
    Jet { index: usize, order: u8 },
}

pub(crate) fn reserved(name: &str) -> Option<Reserved> {
    if name == "t" {
        return Some(Reserved::Time);
    }
    let index = |digits: &str| -> Option<usize> {
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        digits.parse().ok()
    };
    if let Some(rest) = name.strip_prefix('q') {
        return index(rest).map(|index| Reserved::Jet { index, order: 0 });
    }
    if let Some(rest) = name.strip_prefix('v') {
        return index(rest).map(|index| Reserved::Jet { index, order: 1 });
    }
    let rest = name.strip_prefix('d')?;
    let order = rest.chars().next()?.to_digit(10)? as u8;
    let index = index(rest[1..].strip_prefix('q')?)?;
    Some(Reserved::Jet { index, order })
}

pub fn is_valid_parameter_name(name: &str) -> bool {
    let mut chars = name.chars();
    let Some(first) = chars.next() else {
        return false;
    };
    first.is_ascii_alphabetic()
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
        && reserved(name).is_none()
}
