use super::TOL_EQ;

/// Result of comparing two fuzzy numbers under the level-wise partial order.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OrderRelation {
    Equivalent,
    Precedes,
    StrictlyPrecedes,
    Succeeds,
    StrictlySucceeds,
    Noncomparable,
}

impl OrderRelation {
    /// The relation seen from the other operand.
    pub fn reverse(self) -> Self {
        match self {
            OrderRelation::Precedes => OrderRelation::Succeeds,
            OrderRelation::StrictlyPrecedes => OrderRelation::StrictlySucceeds,
            OrderRelation::Succeeds => OrderRelation::Precedes,
            OrderRelation::StrictlySucceeds => OrderRelation::StrictlyPrecedes,
            other => other,
        }
    }

    /// True for `a ⪯ b` in any form, including equivalence.
    pub fn is_preceding(self) -> bool {
        matches!(
            self,
            OrderRelation::Equivalent | OrderRelation::Precedes | OrderRelation::StrictlyPrecedes
        )
    }

    pub(crate) fn classify(al: &[f64], au: &[f64], bl: &[f64], bu: &[f64]) -> Self {
        let n = al.len();
        let equivalent =
            (0..n).all(|i| (al[i] - bl[i]).abs() <= TOL_EQ && (au[i] - bu[i]).abs() <= TOL_EQ);
        if equivalent {
            return OrderRelation::Equivalent;
        }
        let le = (0..n).all(|i| al[i] <= bl[i] + TOL_EQ && au[i] <= bu[i] + TOL_EQ);
        if le {
            // strictness needs one level where both endpoints are strictly below
            let strict = (0..n).any(|i| al[i] < bl[i] - TOL_EQ && au[i] < bu[i] - TOL_EQ);
            return if strict {
                OrderRelation::StrictlyPrecedes
            } else {
                OrderRelation::Precedes
            };
        }
        let ge = (0..n).all(|i| al[i] + TOL_EQ >= bl[i] && au[i] + TOL_EQ >= bu[i]);
        if ge {
            let strict = (0..n).any(|i| al[i] > bl[i] + TOL_EQ && au[i] > bu[i] + TOL_EQ);
            return if strict {
                OrderRelation::StrictlySucceeds
            } else {
                OrderRelation::Succeeds
            };
        }
        OrderRelation::Noncomparable
    }
}
