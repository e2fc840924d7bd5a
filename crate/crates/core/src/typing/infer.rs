//! Constraint-based type inference.
//!
//! Pass one walks the tree, gives every expression node a type (fresh
//! variables where unknown) and records equality constraints. Pass two
//! solves them by unification, settles the overloaded `*` and `-`, then
//! writes resolved types back and rejects anything still ambiguous.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use super::types::{BType, TypeSubstitution, UnifyError};
use crate::syntax::{Kind, MachineAst, Node, ParseUnit, SetDeclaration, SourceSpan};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TypeError {
    #[error("TYPE ERROR {span}: expected {expected}, found {found}")]
    Mismatch {
        span: SourceSpan,
        expected: BType,
        found: BType,
    },
    #[error("TYPE ERROR {span}: expected {expected}, found {found} (occurs check)")]
    Occurs {
        span: SourceSpan,
        expected: BType,
        found: BType,
    },
    #[error("TYPE ERROR {span}: expected a B type, found unresolved type of {what}")]
    Unresolved { span: SourceSpan, what: String },
    #[error("TYPE ERROR {span}: expected a declared identifier, found {name}")]
    UnknownIdentifier { span: SourceSpan, name: String },
    #[error("TYPE ERROR {span}: {message}")]
    Invalid { span: SourceSpan, message: String },
}

impl TypeError {
    pub fn span(&self) -> SourceSpan {
        match self {
            TypeError::Mismatch { span, .. }
            | TypeError::Occurs { span, .. }
            | TypeError::Unresolved { span, .. }
            | TypeError::UnknownIdentifier { span, .. }
            | TypeError::Invalid { span, .. } => *span,
        }
    }
}

/// Identifier scopes and declared sets used during inference.
#[derive(Debug, Clone, Default)]
pub struct TypeContext {
    scopes: Vec<BTreeMap<String, BType>>,
    given_sets: Vec<SetDeclaration>,
    /// Undeclared identifiers are implicitly declared in the outermost scope.
    pub allow_free: bool,
    /// When set, only these identifiers may be assigned by substitutions.
    pub assignable: Option<BTreeSet<String>>,
}

impl TypeContext {
    /// Empty context that declares unknown identifiers on first use.
    pub fn new() -> Self {
        Self {
            scopes: vec![BTreeMap::new()],
            given_sets: Vec::new(),
            allow_free: true,
            assignable: None,
        }
    }

    /// Context with the machine's sets and their elements in scope.
    pub fn with_sets(sets: &[SetDeclaration]) -> Self {
        let mut ctx = Self::new();
        ctx.allow_free = false;
        for decl in sets {
            let elem = if decl.is_enumerated() {
                BType::Given(decl.name.clone())
            } else {
                BType::Deferred(decl.name.clone())
            };
            ctx.declare(&decl.name, BType::set(elem.clone()));
            for e in decl.elements.iter().flatten() {
                ctx.declare(e, elem.clone());
            }
        }
        ctx.given_sets = sets.to_vec();
        ctx
    }

    /// Context for closed formulas over a typed machine: sets, constants and
    /// variables are in scope.
    pub fn for_machine(machine: &TypedMachine) -> Self {
        let mut ctx = Self::with_sets(&machine.ast.sets);
        for (name, ty) in &machine.types {
            ctx.declare(name, ty.clone());
        }
        ctx
    }

    pub fn given_sets(&self) -> &[SetDeclaration] {
        &self.given_sets
    }

    pub fn push_scope(&mut self) {
        self.scopes.push(BTreeMap::new());
    }

    pub fn pop_scope(&mut self) {
        assert!(self.scopes.len() > 1, "cannot pop the outermost scope");
        self.scopes.pop();
    }

    pub fn depth(&self) -> usize {
        self.scopes.len()
    }

    pub fn declare(&mut self, name: &str, ty: BType) {
        self.scopes
            .last_mut()
            .expect("at least one scope")
            .insert(name.to_owned(), ty);
    }

    pub fn lookup(&self, name: &str) -> Option<&BType> {
        self.scopes.iter().rev().find_map(|s| s.get(name))
    }

    fn declare_outermost(&mut self, name: &str, ty: BType) {
        self.scopes[0].insert(name.to_owned(), ty);
    }
}

struct Constraint {
    expected: BType,
    found: BType,
    span: SourceSpan,
}

/// `l * r = result`: multiplication or cartesian product.
struct Product {
    left: BType,
    right: BType,
    result: BType,
    span: SourceSpan,
}

struct Inferencer<'c> {
    ctx: &'c mut TypeContext,
    next_var: u32,
    constraints: Vec<Constraint>,
    products: Vec<Product>,
    minus: Vec<(BType, SourceSpan)>,
    /// Identifiers implicitly declared through `allow_free`.
    free: Vec<String>,
}

type TResult<T> = Result<T, TypeError>;

fn mismatch(e: UnifyError, span: SourceSpan, s: &TypeSubstitution) -> TypeError {
    match e {
        UnifyError::Mismatch(a, b) => TypeError::Mismatch {
            span,
            expected: s.apply(&a),
            found: s.apply(&b),
        },
        UnifyError::Occurs(v, t) => TypeError::Occurs {
            span,
            expected: BType::Var(v),
            found: s.apply(&t),
        },
    }
}

impl<'c> Inferencer<'c> {
    fn new(ctx: &'c mut TypeContext) -> Self {
        Self {
            ctx,
            next_var: 0,
            constraints: Vec::new(),
            products: Vec::new(),
            minus: Vec::new(),
            free: Vec::new(),
        }
    }

    fn fresh(&mut self) -> BType {
        self.next_var += 1;
        BType::Var(self.next_var)
    }

    fn require(&mut self, expected: BType, found: BType, span: SourceSpan) {
        self.constraints.push(Constraint {
            expected,
            found,
            span,
        });
    }

    fn set_elem(&mut self, set: BType, span: SourceSpan) -> BType {
        let e = self.fresh();
        self.require(BType::set(e.clone()), set, span);
        e
    }

    fn rel_parts(&mut self, rel: BType, span: SourceSpan) -> (BType, BType) {
        let a = self.fresh();
        let b = self.fresh();
        self.require(BType::relation(a.clone(), b.clone()), rel, span);
        (a, b)
    }

    fn declare_ids(&mut self, ids: &mut Node) -> Vec<BType> {
        let mut types = Vec::new();
        for id in &mut ids.children {
            let t = self.fresh();
            if let Some(name) = id.identifier_name() {
                self.ctx.declare(name, t.clone());
            }
            id.ty = Some(t.clone());
            types.push(t);
        }
        types
    }

    fn identifier(&mut self, node: &mut Node) -> TResult<BType> {
        let name = node.identifier_name().expect("identifier node").to_owned();
        let ty = match self.ctx.lookup(&name) {
            Some(t) => t.clone(),
            None if self.ctx.allow_free => {
                let t = self.fresh();
                self.ctx.declare_outermost(&name, t.clone());
                self.free.push(name);
                t
            }
            None => {
                return Err(TypeError::UnknownIdentifier {
                    span: node.span,
                    name,
                })
            }
        };
        node.ty = Some(ty.clone());
        Ok(ty)
    }

    fn expr(&mut self, node: &mut Node) -> TResult<BType> {
        use Kind::*;
        let span = node.span;
        let ty = match node.kind.clone() {
            Integer(_) | MaxInt | MinInt => BType::Integer,
            String(_) => BType::String,
            True | False => BType::Bool,
            Identifier(_) => return self.identifier(node),
            Builtin(b) => {
                use crate::syntax::BuiltinSet as B;
                match b {
                    B::Bool => BType::set(BType::Bool),
                    B::String => BType::set(BType::String),
                    _ => BType::set(BType::Integer),
                }
            }
            EmptySet => BType::set(self.fresh()),
            EmptySequence => BType::sequence(self.fresh()),
            Add | Mult | Div | Mod | Power => {
                for i in 0..2 {
                    let t = self.expr(&mut node.children[i])?;
                    self.require(BType::Integer, t, node.children[i].span);
                }
                BType::Integer
            }
            UnaryMinus | Succ | Pred => {
                let t = self.expr(&mut node.children[0])?;
                self.require(BType::Integer, t, node.children[0].span);
                BType::Integer
            }
            MinusOrSetSubtract => {
                let l = self.expr(&mut node.children[0])?;
                let r = self.expr(&mut node.children[1])?;
                self.require(l.clone(), r, node.children[1].span);
                self.minus.push((l.clone(), span));
                l
            }
            MultOrCart => {
                let left = self.expr(&mut node.children[0])?;
                let right = self.expr(&mut node.children[1])?;
                let result = self.fresh();
                self.products.push(Product {
                    left,
                    right,
                    result: result.clone(),
                    span,
                });
                result
            }
            Cartesian => {
                let l = self.expr(&mut node.children[0])?;
                let a = self.set_elem(l, node.children[0].span);
                let r = self.expr(&mut node.children[1])?;
                let b = self.set_elem(r, node.children[1].span);
                BType::relation(a, b)
            }
            SetExtension => {
                let e = self.fresh();
                for child in &mut node.children {
                    let t = self.expr(child)?;
                    self.require(e.clone(), t, child.span);
                }
                BType::set(e)
            }
            SequenceExtension => {
                let e = self.fresh();
                for child in &mut node.children {
                    let t = self.expr(child)?;
                    self.require(e.clone(), t, child.span);
                }
                BType::sequence(e)
            }
            Interval => {
                for i in 0..2 {
                    let t = self.expr(&mut node.children[i])?;
                    self.require(BType::Integer, t, node.children[i].span);
                }
                BType::set(BType::Integer)
            }
            PowerSet | PowerSet1 | FinSet | FinSet1 => {
                let t = self.expr(&mut node.children[0])?;
                let e = self.set_elem(t, node.children[0].span);
                BType::set(BType::set(e))
            }
            Union | Intersection => {
                let l = self.expr(&mut node.children[0])?;
                let e = self.set_elem(l.clone(), node.children[0].span);
                let r = self.expr(&mut node.children[1])?;
                self.require(BType::set(e), r, node.children[1].span);
                l
            }
            Card => {
                let t = self.expr(&mut node.children[0])?;
                self.set_elem(t, node.children[0].span);
                BType::Integer
            }
            Min | Max => {
                let t = self.expr(&mut node.children[0])?;
                self.require(BType::set(BType::Integer), t, node.children[0].span);
                BType::Integer
            }
            Comprehension => {
                self.ctx.push_scope();
                let types = self.declare_ids(&mut node.children[0]);
                let r = self.pred(&mut node.children[1]);
                self.ctx.pop_scope();
                r?;
                BType::set(BType::tuple(types))
            }
            Lambda => {
                self.ctx.push_scope();
                let types = self.declare_ids(&mut node.children[0]);
                let r = self
                    .pred(&mut node.children[1])
                    .and_then(|_| self.expr(&mut node.children[2]));
                self.ctx.pop_scope();
                BType::relation(BType::tuple(types), r?)
            }
            BoolOf => {
                self.pred(&mut node.children[0])?;
                BType::Bool
            }
            Pair => {
                let a = self.expr(&mut node.children[0])?;
                let b = self.expr(&mut node.children[1])?;
                BType::pair(a, b)
            }
            Relations | Functions(_) => {
                let l = self.expr(&mut node.children[0])?;
                let a = self.set_elem(l, node.children[0].span);
                let r = self.expr(&mut node.children[1])?;
                let b = self.set_elem(r, node.children[1].span);
                BType::set(BType::relation(a, b))
            }
            Domain | Range => {
                let t = self.expr(&mut node.children[0])?;
                let (a, b) = self.rel_parts(t, node.children[0].span);
                BType::set(if node.kind == Domain { a } else { b })
            }
            Inverse => {
                let t = self.expr(&mut node.children[0])?;
                let (a, b) = self.rel_parts(t, node.children[0].span);
                BType::relation(b, a)
            }
            Image => {
                let t = self.expr(&mut node.children[0])?;
                let (a, b) = self.rel_parts(t, node.children[0].span);
                let s = self.expr(&mut node.children[1])?;
                self.require(BType::set(a), s, node.children[1].span);
                BType::set(b)
            }
            Composition => {
                let t1 = self.expr(&mut node.children[0])?;
                let (a, b) = self.rel_parts(t1, node.children[0].span);
                let t2 = self.expr(&mut node.children[1])?;
                let (b2, c) = self.rel_parts(t2, node.children[1].span);
                self.require(b, b2, node.children[1].span);
                BType::relation(a, c)
            }
            Override => {
                let t1 = self.expr(&mut node.children[0])?;
                self.rel_parts(t1.clone(), node.children[0].span);
                let t2 = self.expr(&mut node.children[1])?;
                self.require(t1.clone(), t2, node.children[1].span);
                t1
            }
            DomainRestrict | DomainSubtract => {
                let s = self.expr(&mut node.children[0])?;
                let r = self.expr(&mut node.children[1])?;
                let (a, _) = self.rel_parts(r.clone(), node.children[1].span);
                self.require(BType::set(a), s, node.children[0].span);
                r
            }
            RangeRestrict | RangeSubtract => {
                let r = self.expr(&mut node.children[0])?;
                let (_, b) = self.rel_parts(r.clone(), node.children[0].span);
                let s = self.expr(&mut node.children[1])?;
                self.require(BType::set(b), s, node.children[1].span);
                r
            }
            Apply => {
                let f = self.expr(&mut node.children[0])?;
                let mut args = Vec::new();
                for child in &mut node.children[1..] {
                    args.push(self.expr(child)?);
                }
                let result = self.fresh();
                self.require(
                    BType::relation(BType::tuple(args), result.clone()),
                    f,
                    node.children[0].span,
                );
                result
            }
            Seq | Seq1 => {
                let t = self.expr(&mut node.children[0])?;
                let e = self.set_elem(t, node.children[0].span);
                BType::set(BType::sequence(e))
            }
            Size => {
                let t = self.expr(&mut node.children[0])?;
                let e = self.fresh();
                self.require(BType::sequence(e), t, node.children[0].span);
                BType::Integer
            }
            Concat => {
                let l = self.expr(&mut node.children[0])?;
                let e = self.fresh();
                self.require(BType::sequence(e), l.clone(), node.children[0].span);
                let r = self.expr(&mut node.children[1])?;
                self.require(l.clone(), r, node.children[1].span);
                l
            }
            First | Last => {
                let t = self.expr(&mut node.children[0])?;
                let e = self.fresh();
                self.require(BType::sequence(e.clone()), t, node.children[0].span);
                e
            }
            Front | Tail => {
                let t = self.expr(&mut node.children[0])?;
                let e = self.fresh();
                self.require(BType::sequence(e), t.clone(), node.children[0].span);
                t
            }
            other => {
                return Err(TypeError::Invalid {
                    span,
                    message: format!("expected an expression, found {other:?}"),
                })
            }
        };
        node.ty = Some(ty.clone());
        Ok(ty)
    }

    fn pred(&mut self, node: &mut Node) -> TResult<()> {
        use Kind::*;
        match node.kind.clone() {
            And | Or | Implies | Equivalence => {
                self.pred(&mut node.children[0])?;
                self.pred(&mut node.children[1])
            }
            Not => self.pred(&mut node.children[0]),
            Forall | Exists => {
                self.ctx.push_scope();
                self.declare_ids(&mut node.children[0]);
                let r = self.pred(&mut node.children[1]);
                self.ctx.pop_scope();
                r
            }
            Equal | NotEqual => {
                let l = self.expr(&mut node.children[0])?;
                let r = self.expr(&mut node.children[1])?;
                self.require(l, r, node.children[1].span);
                Ok(())
            }
            Less | LessEqual | Greater | GreaterEqual => {
                for i in 0..2 {
                    let t = self.expr(&mut node.children[i])?;
                    self.require(BType::Integer, t, node.children[i].span);
                }
                Ok(())
            }
            Member | NotMember => {
                let e = self.expr(&mut node.children[0])?;
                let s = self.expr(&mut node.children[1])?;
                self.require(BType::set(e), s, node.children[1].span);
                Ok(())
            }
            Subset | StrictSubset | NotSubset | NotStrictSubset => {
                let l = self.expr(&mut node.children[0])?;
                let e = self.set_elem(l.clone(), node.children[0].span);
                let r = self.expr(&mut node.children[1])?;
                self.require(BType::set(e), r, node.children[1].span);
                Ok(())
            }
            other => Err(TypeError::Invalid {
                span: node.span,
                message: format!("expected a predicate, found {other:?}"),
            }),
        }
    }

    fn check_assignable(&self, target: &Node) -> TResult<()> {
        let name = match &target.kind {
            Kind::Identifier(n) => n.as_str(),
            Kind::Apply => target.children[0].identifier_name().unwrap_or_default(),
            _ => "",
        };
        if let Some(allowed) = &self.ctx.assignable {
            if !allowed.contains(name) {
                return Err(TypeError::Invalid {
                    span: target.span,
                    message: format!("expected an assignable variable, found {name}"),
                });
            }
        }
        Ok(())
    }

    fn subst(&mut self, node: &mut Node) -> TResult<()> {
        use Kind::*;
        match node.kind.clone() {
            Skip => Ok(()),
            Assign => {
                let (targets, values) = node.children.split_at_mut(1);
                for (target, value) in targets[0].children.iter_mut().zip(values[0].children.iter_mut()) {
                    self.check_assignable(target)?;
                    let t = self.expr(target)?;
                    let v = self.expr(value)?;
                    self.require(t, v, value.span);
                }
                Ok(())
            }
            BecomesElementOf => {
                let target = &mut node.children[0].children[0];
                self.check_assignable(target)?;
                let t = self.expr(target)?;
                let s = self.expr(&mut node.children[1])?;
                self.require(BType::set(t), s, node.children[1].span);
                Ok(())
            }
            BecomesSuchThat => {
                for target in &mut node.children[0].children {
                    self.check_assignable(target)?;
                    self.expr(target)?;
                }
                self.pred(&mut node.children[1])
            }
            Block | Sequence | Parallel | Choice => {
                for child in &mut node.children {
                    self.subst(child)?;
                }
                Ok(())
            }
            Precondition => {
                self.pred(&mut node.children[0])?;
                self.subst(&mut node.children[1])
            }
            If => {
                self.pred(&mut node.children[0])?;
                self.subst(&mut node.children[1])?;
                self.subst(&mut node.children[2])
            }
            Select { has_else } => {
                let len = node.children.len();
                let pairs = if has_else { len - 1 } else { len };
                for i in 0..pairs {
                    if i % 2 == 0 {
                        self.pred(&mut node.children[i])?;
                    } else {
                        self.subst(&mut node.children[i])?;
                    }
                }
                if has_else {
                    self.subst(&mut node.children[len - 1])?;
                }
                Ok(())
            }
            Any => {
                self.ctx.push_scope();
                self.declare_ids(&mut node.children[0]);
                let r = self
                    .pred(&mut node.children[1])
                    .and_then(|_| self.subst(&mut node.children[2]));
                self.ctx.pop_scope();
                r
            }
            Call(name) => Err(TypeError::Invalid {
                span: node.span,
                message: format!("expected a substitution, found call of unknown {name}"),
            }),
            other => Err(TypeError::Invalid {
                span: node.span,
                message: format!("expected a substitution, found {other:?}"),
            }),
        }
    }

    /// Solve all recorded constraints into a substitution.
    fn solve(&mut self) -> TResult<TypeSubstitution> {
        let mut s = TypeSubstitution::new();
        for c in &self.constraints {
            s.unify(&c.expected, &c.found)
                .map_err(|e| mismatch(e, c.span, &s))?;
        }
        let mut pending: Vec<&Product> = self.products.iter().collect();
        loop {
            let mut progressed = false;
            let mut still = Vec::new();
            for p in pending {
                let resolved = [s.apply(&p.left), s.apply(&p.right), s.apply(&p.result)];
                let is_int = resolved.contains(&BType::Integer);
                let is_set = resolved.iter().any(|t| matches!(t, BType::Set(_)));
                if is_int {
                    for t in [&p.left, &p.right, &p.result] {
                        s.unify(&BType::Integer, t).map_err(|e| mismatch(e, p.span, &s))?;
                    }
                    progressed = true;
                } else if is_set {
                    self.next_var += 2;
                    let a = BType::Var(self.next_var - 1);
                    let b = BType::Var(self.next_var);
                    s.unify(&BType::set(a.clone()), &p.left).map_err(|e| mismatch(e, p.span, &s))?;
                    s.unify(&BType::set(b.clone()), &p.right).map_err(|e| mismatch(e, p.span, &s))?;
                    s.unify(&BType::relation(a, b), &p.result)
                        .map_err(|e| mismatch(e, p.span, &s))?;
                    progressed = true;
                } else if let Some(bad) = resolved.iter().find(|t| !matches!(t, BType::Var(_))) {
                    return Err(TypeError::Invalid {
                        span: p.span,
                        message: format!("expected INTEGER or a set, found {bad}"),
                    });
                } else {
                    still.push(p);
                }
            }
            pending = still;
            if !progressed || pending.is_empty() {
                break;
            }
        }
        for (t, span) in &self.minus {
            match s.apply(t) {
                BType::Integer | BType::Set(_) | BType::Var(_) => {}
                other => {
                    return Err(TypeError::Invalid {
                        span: *span,
                        message: format!("expected INTEGER or a set, found {other}"),
                    })
                }
            }
        }
        s.normalize();
        Ok(s)
    }
}

/// Write resolved types into every typed node and rewrite `MultOrCart`.
fn annotate(node: &mut Node, s: &TypeSubstitution) -> TResult<()> {
    if let Some(t) = &node.ty {
        let resolved = s.apply(t);
        if !resolved.is_resolved() {
            let what = match &node.kind {
                Kind::Identifier(n) => n.clone(),
                _ => crate::syntax::pretty_print(node),
            };
            return Err(TypeError::Unresolved {
                span: node.span,
                what,
            });
        }
        if node.kind == Kind::MultOrCart {
            node.kind = if resolved == BType::Integer {
                Kind::Mult
            } else {
                Kind::Cartesian
            };
        }
        node.ty = Some(resolved);
    }
    for child in &mut node.children {
        annotate(child, s)?;
    }
    Ok(())
}

/// Type a parse unit in place. Returns the types of the identifiers that were
/// implicitly declared (free identifiers of the unit).
pub fn infer(unit: &mut ParseUnit, ctx: &mut TypeContext) -> Result<BTreeMap<String, BType>, TypeError> {
    let mut inf = Inferencer::new(ctx);
    match unit.kind {
        crate::syntax::UnitKind::Predicate => inf.pred(&mut unit.root)?,
        crate::syntax::UnitKind::Expression => {
            inf.expr(&mut unit.root)?;
        }
        crate::syntax::UnitKind::Substitution => inf.subst(&mut unit.root)?,
    }
    let s = inf.solve()?;
    let mut free = BTreeMap::new();
    for name in &inf.free {
        let t = s.apply(inf.ctx.lookup(name).expect("declared free identifier"));
        free.insert(name.clone(), t);
    }
    annotate(&mut unit.root, &s)?;
    for name in &inf.free {
        let t = s.apply(inf.ctx.lookup(name).expect("declared"));
        inf.ctx.declare_outermost(name, t);
    }
    Ok(free)
}

/// Type `node` as an expression that must have type `expected`.
pub fn infer_expression_as(node: &mut Node, expected: &BType, ctx: &mut TypeContext) -> Result<(), TypeError> {
    let mut inf = Inferencer::new(ctx);
    let t = inf.expr(node)?;
    inf.require(expected.clone(), t, node.span);
    let s = inf.solve()?;
    annotate(node, &s)
}

/// A definition-free machine whose clauses are fully typed.
#[derive(Debug, Clone)]
pub struct TypedMachine {
    pub ast: MachineAst,
    /// Types of the constants and variables.
    pub types: BTreeMap<String, BType>,
}

impl TypedMachine {
    pub fn name(&self) -> &str {
        &self.ast.name
    }

    pub fn constant_names(&self) -> Vec<&str> {
        self.ast.constant_names()
    }

    pub fn variable_names(&self) -> Vec<&str> {
        self.ast.variable_names()
    }

    pub fn type_of(&self, name: &str) -> Option<&BType> {
        self.types.get(name)
    }
}

/// Type every clause of a definition-free machine.
pub fn infer_machine(mut machine: MachineAst) -> Result<TypedMachine, TypeError> {
    let mut ctx = TypeContext::with_sets(&machine.sets);
    let variables: BTreeSet<String> = machine.variable_names().into_iter().map(str::to_owned).collect();
    let mut inf = Inferencer::new(&mut ctx);
    for id in machine.constants.iter_mut().chain(machine.variables.iter_mut()) {
        let name = id.identifier_name().expect("identifier").to_owned();
        if inf.ctx.lookup(&name).is_some() {
            return Err(TypeError::Invalid {
                span: id.span,
                message: format!("expected a fresh name, found {name} already declared"),
            });
        }
        let t = inf.fresh();
        inf.ctx.declare(&name, t.clone());
        id.ty = Some(t);
    }
    if let Some(p) = &mut machine.properties {
        inf.pred(p)?;
    }
    if let Some(p) = &mut machine.invariant {
        inf.pred(p)?;
    }
    for a in &mut machine.assertions {
        inf.pred(a)?;
    }
    inf.ctx.assignable = Some(variables.clone());
    if let Some(init) = &mut machine.initialisation {
        inf.subst(init)?;
    }
    for op in &mut machine.operations {
        inf.ctx.push_scope();
        for p in &mut op.params {
            let name = p.identifier_name().unwrap_or_default().to_owned();
            if variables.contains(&name) || inf.ctx.lookup(&name).is_some() {
                inf.ctx.pop_scope();
                return Err(TypeError::Invalid {
                    span: p.span,
                    message: format!("expected a fresh parameter name, found {name}"),
                });
            }
            let t = inf.fresh();
            inf.ctx.declare(&name, t.clone());
            p.ty = Some(t);
        }
        let r = inf.subst(&mut op.body);
        inf.ctx.pop_scope();
        r?;
    }
    let s = inf.solve()?;
    let mut types = BTreeMap::new();
    for id in machine.constants.iter_mut().chain(machine.variables.iter_mut()) {
        annotate(id, &s)?;
        types.insert(
            id.identifier_name().expect("identifier").to_owned(),
            id.ty.clone().expect("annotated"),
        );
    }
    if let Some(p) = &mut machine.properties {
        annotate(p, &s)?;
    }
    if let Some(p) = &mut machine.invariant {
        annotate(p, &s)?;
    }
    for a in &mut machine.assertions {
        annotate(a, &s)?;
    }
    if let Some(init) = &mut machine.initialisation {
        annotate(init, &s)?;
    }
    for op in &mut machine.operations {
        for p in &mut op.params {
            annotate(p, &s)?;
        }
        annotate(&mut op.body, &s)?;
    }
    Ok(TypedMachine { ast: machine, types })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_machine, parse_predicate, parse_expression, expand_machine};

    fn infer_pred(src: &str) -> Result<BTreeMap<String, BType>, TypeError> {
        let mut unit = parse_predicate(src).unwrap();
        infer(&mut unit, &mut TypeContext::new())
    }

    #[test]
    fn untyped_addition() {
        let types = infer_pred("x = y+1").unwrap();
        assert_eq!(types["x"], BType::Integer);
        assert_eq!(types["y"], BType::Integer);
    }

    #[test]
    fn empty_set_is_ambiguous() {
        assert!(matches!(infer_pred("x = {}"), Err(TypeError::Unresolved { .. })));
    }

    #[test]
    fn star_resolution() {
        let mut unit = parse_predicate("z = x*y & x : INTEGER & y : INTEGER").unwrap();
        let types = infer(&mut unit, &mut TypeContext::new()).unwrap();
        assert_eq!(types["z"], BType::Integer);
        let eq = &unit.root.conjuncts()[0];
        assert_eq!(eq.children[1].kind, Kind::Mult);

        let mut unit = parse_predicate("z = x*y & x <: INTEGER & y <: BOOL").unwrap();
        let types = infer(&mut unit, &mut TypeContext::new()).unwrap();
        assert_eq!(types["z"], BType::relation(BType::Integer, BType::Bool));
        assert_eq!(unit.root.conjuncts()[0].children[1].kind, Kind::Cartesian);

        assert!(matches!(infer_pred("z = x*y"), Err(TypeError::Unresolved { .. })));
        assert!(infer_pred("z = x*y & x : POW(INTEGER*INTEGER) & y = 2").is_err());
    }

    #[test]
    fn mismatch_message() {
        let err = infer_pred("1 = TRUE").unwrap_err();
        assert_eq!(err.to_string(), "TYPE ERROR 1:5: expected INTEGER, found BOOL");
    }

    #[test]
    fn every_expression_is_annotated() {
        let mut unit = parse_expression("%x.(x>0 & x<4|x*x)").unwrap();
        infer(&mut unit, &mut TypeContext::new()).unwrap();
        unit.root.walk(&mut |n| {
            if n.category() == crate::syntax::Category::Expression {
                assert!(n.ty.as_ref().is_some_and(BType::is_resolved), "{n:?}");
            }
        });
        assert_eq!(
            unit.root.ty,
            Some(BType::relation(BType::Integer, BType::Integer))
        );
    }

    #[test]
    fn machine_types() {
        let src = "MACHINE M SETS S = {a, b}; D CONSTANTS c PROPERTIES c : 1..3
                   VARIABLES f, s INVARIANT f : S +-> NAT & s <: D
                   INITIALISATION f := {} || s := {}
                   OPERATIONS put(e, v) = PRE e : S & v : NAT THEN f(e) := v END END";
        let m = infer_machine(expand_machine(&parse_machine(src).unwrap()).unwrap()).unwrap();
        assert_eq!(m.types["c"], BType::Integer);
        assert_eq!(m.types["f"], BType::relation(BType::Given("S".into()), BType::Integer));
        assert_eq!(m.types["s"], BType::set(BType::Deferred("D".into())));
        assert_eq!(m.ast.operations[0].params[0].ty, Some(BType::Given("S".into())));
    }

    #[test]
    fn constants_are_not_assignable() {
        let src = "MACHINE M CONSTANTS c PROPERTIES c = 1 VARIABLES x INVARIANT x : NAT
                   INITIALISATION x := 0 OPERATIONS bad = c := 2 END";
        assert!(infer_machine(parse_machine(src).unwrap()).is_err());
    }
}
