use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

/// A B type. Relations are `Set(Pair(a, b))`, sequences `Set(Pair(Integer, a))`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BType {
    Integer,
    Bool,
    String,
    /// Enumerated set declared in SETS.
    Given(String),
    /// Deferred set declared in SETS.
    Deferred(String),
    Set(Box<BType>),
    Pair(Box<BType>, Box<BType>),
    Var(u32),
}

impl BType {
    pub fn set(elem: BType) -> BType {
        BType::Set(Box::new(elem))
    }

    pub fn pair(a: BType, b: BType) -> BType {
        BType::Pair(Box::new(a), Box::new(b))
    }

    pub fn relation(a: BType, b: BType) -> BType {
        BType::set(BType::pair(a, b))
    }

    pub fn sequence(elem: BType) -> BType {
        BType::relation(BType::Integer, elem)
    }

    /// Left-nested pair type for an n-tuple.
    pub fn tuple(mut items: Vec<BType>) -> BType {
        assert!(!items.is_empty(), "empty tuple type");
        let first = items.remove(0);
        items.into_iter().fold(first, BType::pair)
    }

    pub fn is_resolved(&self) -> bool {
        match self {
            BType::Var(_) => false,
            BType::Set(e) => e.is_resolved(),
            BType::Pair(a, b) => a.is_resolved() && b.is_resolved(),
            _ => true,
        }
    }

    pub fn occurs(&self, var: u32) -> bool {
        match self {
            BType::Var(v) => *v == var,
            BType::Set(e) => e.occurs(var),
            BType::Pair(a, b) => a.occurs(var) || b.occurs(var),
            _ => false,
        }
    }

    pub fn element(&self) -> Option<&BType> {
        match self {
            BType::Set(e) => Some(e),
            _ => None,
        }
    }
}

impl fmt::Display for BType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BType::Integer => write!(f, "INTEGER"),
            BType::Bool => write!(f, "BOOL"),
            BType::String => write!(f, "STRING"),
            BType::Given(n) | BType::Deferred(n) => write!(f, "{n}"),
            BType::Set(e) => write!(f, "POW({e})"),
            BType::Pair(a, b) => {
                write!(f, "{a}*")?;
                if matches!(**b, BType::Pair(..)) {
                    write!(f, "({b})")
                } else {
                    write!(f, "{b}")
                }
            }
            BType::Var(v) => write!(f, "_T{v}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum UnifyError {
    #[error("type mismatch: {0} vs {1}")]
    Mismatch(BType, BType),
    #[error("occurs check: _T{0} in {1}")]
    Occurs(u32, BType),
}

/// Bindings from type variables to types.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TypeSubstitution {
    bindings: BTreeMap<u32, BType>,
}

impl TypeSubstitution {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, var: u32) -> Option<&BType> {
        self.bindings.get(&var)
    }

    pub fn len(&self) -> usize {
        self.bindings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }

    pub fn bindings(&self) -> impl Iterator<Item = (u32, &BType)> {
        self.bindings.iter().map(|(k, v)| (*k, v))
    }

    /// Apply the substitution until no bound variable remains.
    pub fn apply(&self, ty: &BType) -> BType {
        match ty {
            BType::Var(v) => match self.bindings.get(v) {
                Some(t) => self.apply(t),
                None => ty.clone(),
            },
            BType::Set(e) => BType::set(self.apply(e)),
            BType::Pair(a, b) => BType::pair(self.apply(a), self.apply(b)),
            _ => ty.clone(),
        }
    }

    /// Bind `var` to `ty`. The caller guarantees `var` is unbound.
    fn bind(&mut self, var: u32, ty: BType) -> Result<(), UnifyError> {
        if let BType::Var(v) = ty {
            if v == var {
                return Ok(());
            }
        }
        if ty.occurs(var) {
            return Err(UnifyError::Occurs(var, ty));
        }
        self.bindings.insert(var, ty);
        Ok(())
    }

    /// Extend the substitution to a most general unifier of `a` and `b`.
    pub fn unify(&mut self, a: &BType, b: &BType) -> Result<(), UnifyError> {
        let a = self.apply(a);
        let b = self.apply(b);
        match (&a, &b) {
            (BType::Var(v), _) => self.bind(*v, b),
            (_, BType::Var(v)) => self.bind(*v, a),
            (BType::Set(x), BType::Set(y)) => self.unify(x, y),
            (BType::Pair(a1, b1), BType::Pair(a2, b2)) => {
                self.unify(a1, a2)?;
                self.unify(b1, b2)
            }
            _ if a == b => Ok(()),
            _ => Err(UnifyError::Mismatch(a, b)),
        }
    }

    /// Rewrite every binding to its fully applied form.
    pub fn normalize(&mut self) {
        let keys: Vec<u32> = self.bindings.keys().copied().collect();
        for k in keys {
            let t = self.apply(&BType::Var(k));
            self.bindings.insert(k, t);
        }
    }
}

/// Functional form of [`TypeSubstitution::unify`].
pub fn unify(a: &BType, b: &BType, s: &TypeSubstitution) -> Result<TypeSubstitution, UnifyError> {
    let mut out = s.clone();
    out.unify(a, b)?;
    out.normalize();
    Ok(out)
}
