use std::fmt;

/// What a variable stands for.
///
/// The derived ordering fixes the monomial order used by the polynomial
/// kernel: time, then positions, then jets by increasing order, then
/// parameters, then scratch variables.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum VarKind {
    Time,
    Position,
    Jet,
    Parameter,
    /// Internal integration variable; never produced by the parser.
    Aux,
}

/// A coordinate on the jet space or a symbolic parameter.
///
/// Positions and jets use 1-based indices, matching the way they are
/// written in expression text (`q1`, `v2`, `d2q3`). Parameters are indexed
/// by their position in the owning [`ExprContext`](super::ExprContext).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var {
    kind: VarKind,
    order: u8,
    index: u16,
}

impl Var {
    pub const MAX_JET_ORDER: u8 = 4;

    pub fn time() -> Self {
        Var { kind: VarKind::Time, order: 0, index: 0 }
    }

    /// Position coordinate `q<k>`, `k` starting at 1.
    pub fn q(k: usize) -> Self {
        Var { kind: VarKind::Position, order: 0, index: k as u16 }
    }

    /// Velocity `v<k>` (first jet).
    pub fn v(k: usize) -> Self {
        Self::jet(k, 1)
    }

    /// Jet of the given derivative order; order 0 is the position itself.
    pub fn jet(k: usize, order: u8) -> Self {
        assert!(order <= Self::MAX_JET_ORDER, "jet order {order} above {}", Self::MAX_JET_ORDER);
        if order == 0 {
            Self::q(k)
        } else {
            Var { kind: VarKind::Jet, order, index: k as u16 }
        }
    }

    /// Parameter number `i` (0-based) of the owning context.
    pub fn param(i: usize) -> Self {
        Var { kind: VarKind::Parameter, order: 0, index: i as u16 }
    }

    pub fn aux(i: usize) -> Self {
        Var { kind: VarKind::Aux, order: 0, index: i as u16 }
    }

    pub fn kind(self) -> VarKind {
        self.kind
    }

    /// Derivative order: 0 for positions, time, parameters.
    pub fn order(self) -> u8 {
        self.order
    }

    pub fn index(self) -> usize {
        self.index as usize
    }

    pub fn is_position(self) -> bool {
        self.kind == VarKind::Position
    }

    pub fn is_velocity(self) -> bool {
        self.kind == VarKind::Jet && self.order == 1
    }

    pub fn is_parameter(self) -> bool {
        self.kind == VarKind::Parameter
    }

    /// True for jets of order two and higher.
    pub fn is_higher_jet(self) -> bool {
        self.kind == VarKind::Jet && self.order >= 2
    }

    /// The jet one order up (`q1 -> v1 -> d2q1 ...`), if within the cap.
    pub fn next_jet(self) -> Option<Var> {
        match self.kind {
            VarKind::Position => Some(Var::v(self.index())),
            VarKind::Jet if self.order < Self::MAX_JET_ORDER => {
                Some(Var::jet(self.index(), self.order + 1))
            }
            _ => None,
        }
    }
}

/// Context-free rendering; parameters print as `p#<i>`.
impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            VarKind::Time => write!(f, "t"),
            VarKind::Position => write!(f, "q{}", self.index),
            VarKind::Jet if self.order == 1 => write!(f, "v{}", self.index),
            VarKind::Jet => write!(f, "d{}q{}", self.order, self.index),
            VarKind::Parameter => write!(f, "p#{}", self.index),
            VarKind::Aux => write!(f, "_s{}", self.index),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ordering_groups_kinds() {
        assert!(Var::time() < Var::q(1));
        assert!(Var::q(3) < Var::v(1));
        assert!(Var::v(3) < Var::jet(1, 2));
        assert!(Var::jet(1, 4) < Var::param(0));
        assert!(Var::param(5) < Var::aux(0));
    }

    #[test]
    fn jet_chain() {
        assert_eq!(Var::jet(2, 0), Var::q(2));
        assert_eq!(Var::q(2).next_jet(), Some(Var::v(2)));
        assert_eq!(Var::v(2).next_jet(), Some(Var::jet(2, 2)));
        assert_eq!(Var::jet(2, 4).next_jet(), None);
        assert_eq!(Var::jet(2, 3).to_string(), "d3q2");
    }
}
