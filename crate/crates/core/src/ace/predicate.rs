use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

#[derive(Clone)]
enum Kind {
    Constant(bool),
    Set(Arc<BTreeSet<u64>>),
    /// TRUE unless the most significant message bit equals `bit`.
    NotPrefix(bool),
    Custom(Arc<dyn Fn(u64) -> bool + Send + Sync>),
}

/// A total boolean predicate on `n`-bit messages. TRUE means punctured.
#[derive(Clone)]
pub struct PuncturingPredicate {
    n: Option<u32>,
    label: String,
    kind: Kind,
}

impl fmt::Debug for PuncturingPredicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PuncturingPredicate({})", self.label)
    }
}

impl PuncturingPredicate {
    /// FALSE everywhere: nothing is punctured.
    pub fn never() -> Self {
        Self {
            n: None,
            label: "FALSE".into(),
            kind: Kind::Constant(false),
        }
    }

    /// TRUE everywhere.
    pub fn always() -> Self {
        Self {
            n: None,
            label: "TRUE".into(),
            kind: Kind::Constant(true),
        }
    }

    pub fn point(n: u32, m: u64) -> Self {
        Self::set(n, [m])
    }

    pub fn set(n: u32, points: impl IntoIterator<Item = u64>) -> Self {
        let points: BTreeSet<u64> = points.into_iter().collect();
        let label = if points.len() == 1 {
            format!("point({:#x})", points.first().unwrap())
        } else {
            format!("set({})", points.len())
        };
        Self {
            n: Some(n),
            label,
            kind: Kind::Set(Arc::new(points)),
        }
    }

    /// `PRE_b`: TRUE iff the first message bit is not `b`, so keys built
    /// with it only handle messages starting with `b`.
    pub fn prefix(n: u32, b: bool) -> Self {
        Self {
            n: Some(n),
            label: format!("PRE{}", b as u8),
            kind: Kind::NotPrefix(b),
        }
    }

    pub fn custom(n: u32, label: &str, f: impl Fn(u64) -> bool + Send + Sync + 'static) -> Self {
        Self {
            n: Some(n),
            label: label.to_string(),
            kind: Kind::Custom(Arc::new(f)),
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// `Some(b)` for the constant predicates.
    pub fn constant(&self) -> Option<bool> {
        match self.kind {
            Kind::Constant(b) => Some(b),
            _ => None,
        }
    }

    pub fn eval(&self, m: u64) -> bool {
        match &self.kind {
            Kind::Constant(b) => *b,
            Kind::Set(s) => s.contains(&m),
            Kind::NotPrefix(b) => {
                let n = self.n.unwrap_or(1);
                ((m >> (n - 1)) & 1 == 1) != *b
            }
            Kind::Custom(f) => f(m),
        }
    }

    /// Pointwise OR, used when a hybrid adds punctured points.
    pub fn or(&self, other: &PuncturingPredicate) -> Self {
        let (a, b) = (self.clone(), other.clone());
        Self {
            n: self.n.or(other.n),
            label: format!("{}|{}", self.label, other.label),
            kind: Kind::Custom(Arc::new(move |m| a.eval(m) || b.eval(m))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prefix_predicates() {
        let pre1 = PuncturingPredicate::prefix(4, true);
        let pre0 = PuncturingPredicate::prefix(4, false);
        for m in 0..16u64 {
            let top = m >> 3 == 1;
            assert_eq!(pre1.eval(m), !top);
            assert_eq!(pre0.eval(m), top);
        }
    }

    #[test]
    fn constants_and_points() {
        assert_eq!(PuncturingPredicate::never().constant(), Some(false));
        assert!(PuncturingPredicate::always().eval(9));
        let p = PuncturingPredicate::point(4, 3);
        assert!(p.eval(3) && !p.eval(4));
        assert!(p.or(&PuncturingPredicate::point(4, 4)).eval(4));
    }
}
