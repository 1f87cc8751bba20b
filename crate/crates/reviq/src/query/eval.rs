//! Deterministic evaluator.
//!
//! Multiset semantics before DISTINCT; OPTIONAL is a left join; FILTER
//! errors collapse to false and drop the binding; aggregates skip unbound
//! and (for SUM/AVG) non-numeric values. Output ordering is total: ORDER
//! BY keys first, then a lexicographic tiebreak over the projected row and
//! the full binding.

use super::ast::*;
use crate::model::{Comparison, LABEL_PREDICATE, PAPER_PREDICATE};
use crate::tableio::ResultTable;
use crate::value::{normalize, round_dp, CellValue};
use rust_decimal::Decimal;
use std::cmp::Ordering;
use std::collections::BTreeMap;
use thiserror::Error;

pub const PROPERTY_NS: &str = "http://orkg.org/property/";
pub const RDFS_LABEL: &str = "http://www.w3.org/2000/01/rdf-schema#label";

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("query references no patterns but projects variables")]
    EmptyWhere,
}

/// One edge of the queryable graph.
#[derive(Debug, Clone, PartialEq)]
pub struct StoreTriple {
    pub subject: String,
    pub predicate: String,
    pub object: CellValue,
}

/// Immutable triple view over a set of comparisons.
#[derive(Debug, Clone, Default)]
pub struct Store {
    pub triples: Vec<StoreTriple>,
}

impl Store {
    pub fn from_comparisons<'a>(comparisons: impl IntoIterator<Item = &'a Comparison>) -> Store {
        let mut triples = Vec::new();
        // resources shared across comparisons repeat their label triples;
        // exact duplicates must not inflate multiset joins
        let mut seen = std::collections::BTreeSet::new();
        for c in comparisons {
            for t in c.to_triples() {
                let predicate = match t.predicate.as_str() {
                    LABEL_PREDICATE => RDFS_LABEL.to_string(),
                    PAPER_PREDICATE => format!("{PROPERTY_NS}paper"),
                    other => format!("{PROPERTY_NS}{other}"),
                };
                if seen.insert(format!("{}\u{1f}{}\u{1f}{:?}", t.subject, predicate, t.object)) {
                    triples.push(StoreTriple { subject: t.subject, predicate, object: t.object });
                }
            }
        }
        Store { triples }
    }
}

/// A value bound to a variable: a graph node (subject position) or a cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Bound {
    Node(String),
    Cell(CellValue),
}

impl Bound {
    pub fn as_cell(&self) -> CellValue {
        match self {
            Bound::Node(n) => CellValue::Text(n.clone()),
            Bound::Cell(c) => c.clone(),
        }
    }

    fn render(&self) -> String {
        self.as_cell().render()
    }
}

pub type Env = BTreeMap<String, Bound>;

/// Equality used by joins and pattern constants: numbers by numeric value
/// (qualifiers ignored), resources by id, text by bytes.
fn cell_eq(a: &CellValue, b: &CellValue) -> bool {
    match (a, b) {
        (CellValue::Number(x), CellValue::Number(y)) => x.value == y.value,
        (CellValue::Range { lo: a0, hi: a1 }, CellValue::Range { lo: b0, hi: b1 }) => {
            a0 == b0 && a1 == b1
        }
        (CellValue::Text(x), CellValue::Text(y)) => x == y,
        (CellValue::Resource { id: x, .. }, CellValue::Resource { id: y, .. }) => x == y,
        (CellValue::Absent, CellValue::Absent) => true,
        _ => false,
    }
}

fn bound_matches_subject(b: &Bound, subject: &str) -> bool {
    match b {
        Bound::Node(n) => n == subject,
        Bound::Cell(CellValue::Resource { id, .. }) => id == subject,
        Bound::Cell(CellValue::Text(t)) => t == subject,
        _ => false,
    }
}

fn bound_matches_object(b: &Bound, object: &CellValue) -> bool {
    match b {
        Bound::Node(n) => matches!(object, CellValue::Resource { id, .. } if id == n),
        Bound::Cell(c) => cell_eq(c, object),
    }
}

/// Total deterministic order over bound values: unbound < numeric < text
/// < resource; numerics by value, text by bytes, resources by label.
pub fn term_cmp(a: Option<&Bound>, b: Option<&Bound>) -> Ordering {
    fn key(b: Option<&Bound>) -> (u8, Option<(Decimal, Decimal)>, String) {
        match b {
            None => (0, None, String::new()),
            Some(Bound::Cell(CellValue::Absent)) => (0, None, String::new()),
            Some(Bound::Cell(CellValue::Number(n))) => (1, Some((n.value, n.value)), n.to_string()),
            Some(Bound::Cell(CellValue::Range { lo, hi })) => {
                (1, Some((*lo, *hi)), format!("{lo}--{hi}"))
            }
            Some(Bound::Cell(CellValue::Text(t))) => (2, None, t.clone()),
            Some(Bound::Node(n)) => (2, None, n.clone()),
            Some(Bound::Cell(CellValue::Resource { label, id })) => {
                (3, None, format!("{label}\u{1f}{id}"))
            }
        }
    }
    let (ra, na, sa) = key(a);
    let (rb, nb, sb) = key(b);
    ra.cmp(&rb)
        .then_with(|| match (na, nb) {
            (Some(x), Some(y)) => x.cmp(&y),
            _ => Ordering::Equal,
        })
        .then_with(|| sa.cmp(&sb))
}

// ---------------------------------------------------------------------------
// Expression evaluation
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
enum Value {
    Cell(CellValue),
    Bool(bool),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ExprError {
    Unbound,
    Type,
    DivZero,
}

struct Scope<'a> {
    env: Option<&'a Env>,
    group: Option<&'a [Env]>,
    keys: Option<&'a Env>,
}

fn eval_expr(expr: &Expr, scope: &Scope) -> Result<Value, ExprError> {
    match expr {
        Expr::Var(v) => {
            let bound = scope
                .keys
                .and_then(|k| k.get(v))
                .or_else(|| scope.env.and_then(|e| e.get(v)));
            match bound {
                Some(b) => Ok(Value::Cell(b.as_cell())),
                None => Err(ExprError::Unbound),
            }
        }
        Expr::Lit(c) => Ok(Value::Cell(c.clone())),
        Expr::Unary(UnOp::Not, e) => match eval_expr(e, scope)? {
            Value::Bool(b) => Ok(Value::Bool(!b)),
            _ => Err(ExprError::Type),
        },
        Expr::Unary(UnOp::Neg, e) => {
            let n = numeric(&eval_expr(e, scope)?)?;
            Ok(Value::Cell(CellValue::number(-n)))
        }
        Expr::Bin(op, a, b) => eval_bin(*op, a, b, scope),
        Expr::Call(f, args) => eval_call(*f, args, scope),
        Expr::Agg(agg) => {
            let rows = scope.group.ok_or(ExprError::Type)?;
            Ok(Value::Cell(eval_aggregate(agg, rows)))
        }
    }
}

fn numeric(v: &Value) -> Result<Decimal, ExprError> {
    match v {
        Value::Cell(CellValue::Number(n)) => Ok(n.value),
        _ => Err(ExprError::Type),
    }
}

fn eval_bin(op: BinOp, a: &Expr, b: &Expr, scope: &Scope) -> Result<Value, ExprError> {
    match op {
        BinOp::And => {
            let left = truthy(&eval_expr(a, scope)?)?;
            if !left {
                return Ok(Value::Bool(false));
            }
            Ok(Value::Bool(truthy(&eval_expr(b, scope)?)?))
        }
        BinOp::Or => {
            // collapsed three-valued logic: an erroring arm is false
            let left = eval_expr(a, scope).and_then(|v| truthy(&v)).unwrap_or(false);
            if left {
                return Ok(Value::Bool(true));
            }
            Ok(Value::Bool(eval_expr(b, scope).and_then(|v| truthy(&v)).unwrap_or(false)))
        }
        BinOp::Add | BinOp::Sub | BinOp::Mul | BinOp::Div => {
            let x = numeric(&eval_expr(a, scope)?)?;
            let y = numeric(&eval_expr(b, scope)?)?;
            let r = match op {
                BinOp::Add => x + y,
                BinOp::Sub => x - y,
                BinOp::Mul => x * y,
                BinOp::Div => {
                    if y.is_zero() {
                        return Err(ExprError::DivZero);
                    }
                    normalize(x / y)
                }
                _ => unreachable!(),
            };
            Ok(Value::Cell(CellValue::number(r)))
        }
        BinOp::Eq | BinOp::Ne | BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => {
            let x = eval_expr(a, scope)?;
            let y = eval_expr(b, scope)?;
            compare(op, &x, &y).map(Value::Bool)
        }
    }
}

fn truthy(v: &Value) -> Result<bool, ExprError> {
    match v {
        Value::Bool(b) => Ok(*b),
        _ => Err(ExprError::Type),
    }
}

/// Comparison semantics over typed cells. Numbers compare by numeric part
/// (qualifiers ignored). A range satisfies an inequality if any part of it
/// does; equality means containment. Text compares bytewise.
fn compare(op: BinOp, x: &Value, y: &Value) -> Result<bool, ExprError> {
    let (cx, cy) = match (x, y) {
        (Value::Cell(a), Value::Cell(b)) => (a, b),
        (Value::Bool(a), Value::Bool(b)) => {
            return Ok(match op {
                BinOp::Eq => a == b,
                BinOp::Ne => a != b,
                _ => return Err(ExprError::Type),
            });
        }
        _ => return Err(ExprError::Type),
    };
    match (cx, cy) {
        (CellValue::Text(a), CellValue::Text(b)) => Ok(match op {
            BinOp::Eq => a == b,
            BinOp::Ne => a != b,
            BinOp::Lt => a < b,
            BinOp::Le => a <= b,
            BinOp::Gt => a > b,
            BinOp::Ge => a >= b,
            _ => unreachable!(),
        }),
        (CellValue::Resource { id: a, .. }, CellValue::Resource { id: b, .. }) => Ok(match op {
            BinOp::Eq => a == b,
            BinOp::Ne => a != b,
            _ => return Err(ExprError::Type),
        }),
        (CellValue::Resource { label, .. }, CellValue::Text(t))
        | (CellValue::Text(t), CellValue::Resource { label, .. }) => Ok(match op {
            BinOp::Eq => label == t,
            BinOp::Ne => label != t,
            _ => return Err(ExprError::Type),
        }),
        (CellValue::Number(a), CellValue::Number(b)) => {
            Ok(cmp_decimals(op, a.value, b.value))
        }
        (CellValue::Range { lo, hi }, CellValue::Number(b)) => {
            let k = b.value;
            Ok(match op {
                BinOp::Le => *lo <= k,
                BinOp::Lt => *lo < k,
                BinOp::Ge => *hi >= k,
                BinOp::Gt => *hi > k,
                BinOp::Eq => *lo <= k && k <= *hi,
                BinOp::Ne => !(*lo == k && *hi == k),
                _ => unreachable!(),
            })
        }
        (CellValue::Number(a), CellValue::Range { lo, hi }) => {
            let k = a.value;
            Ok(match op {
                BinOp::Le => k <= *hi,
                BinOp::Lt => k < *hi,
                BinOp::Ge => k >= *lo,
                BinOp::Gt => k > *lo,
                BinOp::Eq => *lo <= k && k <= *hi,
                BinOp::Ne => !(*lo == k && *hi == k),
                _ => unreachable!(),
            })
        }
        (CellValue::Range { lo: a0, hi: a1 }, CellValue::Range { lo: b0, hi: b1 }) => {
            Ok(match op {
                BinOp::Eq => a0 == b0 && a1 == b1,
                BinOp::Ne => !(a0 == b0 && a1 == b1),
                BinOp::Le => a0 <= b1,
                BinOp::Lt => a0 < b1,
                BinOp::Ge => a1 >= b0,
                BinOp::Gt => a1 > b0,
                _ => unreachable!(),
            })
        }
        _ => Err(ExprError::Type),
    }
}

fn cmp_decimals(op: BinOp, a: Decimal, b: Decimal) -> bool {
    match op {
        BinOp::Eq => a == b,
        BinOp::Ne => a != b,
        BinOp::Lt => a < b,
        BinOp::Le => a <= b,
        BinOp::Gt => a > b,
        BinOp::Ge => a >= b,
        _ => unreachable!(),
    }
}

fn eval_call(f: Func, args: &[Expr], scope: &Scope) -> Result<Value, ExprError> {
    match f {
        Func::Num => {
            let v = eval_expr(args.first().ok_or(ExprError::Type)?, scope)?;
            match v {
                Value::Cell(c) => c
                    .numeric_part()
                    .map(|d| Value::Cell(CellValue::number(d)))
                    .ok_or(ExprError::Type),
                _ => Err(ExprError::Type),
            }
        }
        Func::Round => {
            if args.len() != 2 {
                return Err(ExprError::Type);
            }
            let x = numeric(&eval_expr(&args[0], scope)?)?;
            let n = numeric(&eval_expr(&args[1], scope)?)?;
            let dp: u32 = n.try_into().map_err(|_| ExprError::Type)?;
            Ok(Value::Cell(CellValue::number(round_dp(x, dp))))
        }
        Func::Norm => {
            let x = numeric(&eval_expr(args.first().ok_or(ExprError::Type)?, scope)?)?;
            Ok(Value::Cell(CellValue::number(normalize(x))))
        }
        Func::Concat => {
            let mut out = String::new();
            for a in args {
                match eval_expr(a, scope)? {
                    Value::Cell(c) => out.push_str(&c.render()),
                    Value::Bool(_) => return Err(ExprError::Type),
                }
            }
            Ok(Value::Cell(CellValue::Text(out)))
        }
        Func::Str => {
            let v = eval_expr(args.first().ok_or(ExprError::Type)?, scope)?;
            match v {
                Value::Cell(c) => Ok(Value::Cell(CellValue::Text(c.render()))),
                Value::Bool(_) => Err(ExprError::Type),
            }
        }
        Func::Contains => {
            if args.len() != 2 {
                return Err(ExprError::Type);
            }
            let hay = match eval_expr(&args[0], scope)? {
                Value::Cell(c) => c.render(),
                _ => return Err(ExprError::Type),
            };
            let needle = match eval_expr(&args[1], scope)? {
                Value::Cell(c) => c.render(),
                _ => return Err(ExprError::Type),
            };
            Ok(Value::Bool(hay.contains(&needle)))
        }
    }
}

fn eval_aggregate(agg: &Aggregate, rows: &[Env]) -> CellValue {
    let mut values: Vec<CellValue> = Vec::new();
    for env in rows {
        match &agg.arg {
            None => values.push(CellValue::Text(String::new())), // COUNT(*)
            Some(expr) => {
                let scope = Scope { env: Some(env), group: None, keys: None };
                if let Ok(Value::Cell(c)) = eval_expr(expr, &scope) {
                    if !c.is_absent() {
                        values.push(c);
                    }
                }
            }
        }
    }
    if agg.distinct {
        let mut seen = std::collections::BTreeSet::new();
        values.retain(|v| seen.insert(typed_render(v)));
    }
    match agg.func {
        AggFunc::Count => CellValue::number(Decimal::from(if agg.arg.is_none() {
            rows.len()
        } else {
            values.len()
        })),
        AggFunc::Sum | AggFunc::Avg => {
            let nums: Vec<Decimal> = values.iter().filter_map(|v| match v {
                CellValue::Number(n) => Some(n.value),
                _ => None,
            }).collect();
            if nums.is_empty() {
                return CellValue::Absent;
            }
            let sum: Decimal = nums.iter().copied().sum();
            if agg.func == AggFunc::Sum {
                CellValue::number(sum)
            } else {
                CellValue::number(normalize(sum / Decimal::from(nums.len())))
            }
        }
        AggFunc::Min | AggFunc::Max => {
            let mut best: Option<CellValue> = None;
            for v in values {
                let replace = match &best {
                    None => true,
                    Some(b) => {
                        let ord = term_cmp(
                            Some(&Bound::Cell(v.clone())),
                            Some(&Bound::Cell(b.clone())),
                        );
                        if agg.func == AggFunc::Min {
                            ord == Ordering::Less
                        } else {
                            ord == Ordering::Greater
                        }
                    }
                };
                if replace {
                    best = Some(v);
                }
            }
            best.unwrap_or(CellValue::Absent)
        }
        AggFunc::GroupConcat => {
            if values.is_empty() {
                return CellValue::Absent;
            }
            let mut parts: Vec<String> = values.iter().map(|v| v.render()).collect();
            parts.sort();
            CellValue::Text(parts.join(&agg.separator))
        }
    }
}

fn typed_render(c: &CellValue) -> String {
    match c {
        CellValue::Number(n) => format!("N:{}", normalize(n.value)),
        CellValue::Range { lo, hi } => format!("G:{lo}--{hi}"),
        CellValue::Text(t) => format!("T:{t}"),
        CellValue::Resource { id, .. } => format!("R:{id}"),
        CellValue::Absent => "U:".into(),
    }
}

// ---------------------------------------------------------------------------
// Pattern matching
// ---------------------------------------------------------------------------

fn match_pattern(store: &Store, pattern: &TriplePattern, envs: Vec<Env>) -> Vec<Env> {
    let mut out = Vec::new();
    for env in envs {
        for t in &store.triples {
            if let Some(next) = try_match(pattern, t, &env) {
                out.push(next);
            }
        }
    }
    out
}

fn try_match(pattern: &TriplePattern, t: &StoreTriple, env: &Env) -> Option<Env> {
    let mut next = env.clone();
    // subject
    match &pattern.subject {
        TermPattern::Iri(iri) => {
            if iri != &t.subject {
                return None;
            }
        }
        TermPattern::Lit(_) => return None,
        TermPattern::Var(v) => match next.get(v) {
            Some(b) => {
                if !bound_matches_subject(b, &t.subject) {
                    return None;
                }
            }
            None => {
                next.insert(v.clone(), Bound::Node(t.subject.clone()));
            }
        },
    }
    // predicate
    match &pattern.predicate {
        TermPattern::Iri(iri) => {
            if iri != &t.predicate {
                return None;
            }
        }
        TermPattern::Lit(_) => return None,
        TermPattern::Var(v) => match next.get(v) {
            Some(Bound::Node(n)) => {
                if n != &t.predicate {
                    return None;
                }
            }
            Some(_) => return None,
            None => {
                next.insert(v.clone(), Bound::Node(t.predicate.clone()));
            }
        },
    }
    // object
    match &pattern.object {
        TermPattern::Iri(iri) => {
            let matches = match &t.object {
                CellValue::Resource { id, .. } => id == iri,
                CellValue::Text(txt) => txt == iri,
                _ => false,
            };
            if !matches {
                return None;
            }
        }
        TermPattern::Lit(lit) => {
            if !cell_eq(lit, &t.object) {
                return None;
            }
        }
        TermPattern::Var(v) => match next.get(v) {
            Some(b) => {
                if !bound_matches_object(b, &t.object) {
                    return None;
                }
            }
            None => {
                next.insert(v.clone(), Bound::Cell(t.object.clone()));
            }
        },
    }
    Some(next)
}

// ---------------------------------------------------------------------------
// Top-level evaluation
// ---------------------------------------------------------------------------

/// Evaluate a query over the union of the given comparisons.
pub fn evaluate(ast: &QueryAst, store: &[Comparison]) -> Result<ResultTable, EvalError> {
    let store = Store::from_comparisons(store.iter());
    evaluate_on_store(ast, &store)
}

/// Cross-comparison queries are ordinary multi-pattern queries over a
/// merged store; this alias names that contract.
pub fn evaluate_join(ast: &QueryAst, comparisons: &[Comparison]) -> Result<ResultTable, EvalError> {
    evaluate(ast, comparisons)
}

pub fn evaluate_on_store(ast: &QueryAst, store: &Store) -> Result<ResultTable, EvalError> {
    // 1. base patterns (multiset join)
    let mut envs: Vec<Env> = vec![Env::new()];
    for p in &ast.patterns {
        envs = match_pattern(store, p, envs);
    }
    // 2. binds, in order
    for (expr, var) in &ast.binds {
        for env in &mut envs {
            let scope = Scope { env: Some(env), group: None, keys: None };
            if let Ok(Value::Cell(c)) = eval_expr(expr, &scope) {
                env.insert(var.clone(), Bound::Cell(c));
            }
        }
    }
    // 3. optional groups (left join, one group at a time)
    for group in &ast.optionals {
        let mut joined = Vec::new();
        for env in envs {
            let mut extended = vec![env.clone()];
            for p in group {
                extended = match_pattern(store, p, extended);
            }
            if extended.is_empty() {
                joined.push(env);
            } else {
                joined.extend(extended);
            }
        }
        envs = joined;
    }
    // 4. filters: non-true (including type errors) drops the binding
    for f in &ast.filters {
        envs.retain(|env| {
            let scope = Scope { env: Some(env), group: None, keys: None };
            matches!(eval_expr(f, &scope), Ok(Value::Bool(true)))
        });
    }

    let columns: Vec<String> = ast.select.iter().map(|p| p.name().to_string()).collect();
    let mut rows: Vec<(Vec<CellValue>, Vec<Option<Bound>>, String)> = Vec::new();

    if ast.uses_aggregates() {
        // group rows by key tuple
        let mut groups: BTreeMap<String, (Env, Vec<Env>)> = BTreeMap::new();
        for env in envs {
            let mut keys = Env::new();
            let mut key_render = String::new();
            for k in &ast.group_by {
                let b = env.get(k).cloned();
                key_render.push_str(&b.as_ref().map(|b| typed_render(&b.as_cell())).unwrap_or_else(|| "U:".into()));
                key_render.push('\u{1f}');
                if let Some(b) = b {
                    keys.insert(k.clone(), b);
                }
            }
            groups.entry(key_render).or_insert_with(|| (keys, Vec::new())).1.push(env);
        }
        if groups.is_empty() && ast.group_by.is_empty() {
            // aggregate over the empty solution sequence: one empty group
            groups.insert(String::new(), (Env::new(), Vec::new()));
        }
        for (_, (keys, members)) in groups {
            let scope = Scope { env: None, group: Some(&members), keys: Some(&keys) };
            let mut row = Vec::new();
            let mut alias_vals: BTreeMap<String, CellValue> = BTreeMap::new();
            for proj in &ast.select {
                let cell = match proj {
                    Projection::Var(v) => {
                        keys.get(v).map(|b| b.as_cell()).unwrap_or(CellValue::Absent)
                    }
                    Projection::Expr { expr, .. } => match eval_expr(expr, &scope) {
                        Ok(Value::Cell(c)) => c,
                        _ => CellValue::Absent,
                    },
                };
                alias_vals.insert(proj.name().to_string(), cell.clone());
                row.push(cell);
            }
            let order_keys = order_keys_for(ast, &scope, &alias_vals);
            let tiebreak = keys.values().map(|b| b.render()).collect::<Vec<_>>().join("\u{1f}");
            rows.push((row, order_keys, tiebreak));
        }
    } else {
        for env in envs {
            let scope = Scope { env: Some(&env), group: None, keys: None };
            let mut row = Vec::new();
            let mut alias_vals: BTreeMap<String, CellValue> = BTreeMap::new();
            for proj in &ast.select {
                let cell = match proj {
                    Projection::Var(v) => env.get(v).map(|b| b.as_cell()).unwrap_or(CellValue::Absent),
                    Projection::Expr { expr, .. } => match eval_expr(expr, &scope) {
                        Ok(Value::Cell(c)) => c,
                        _ => CellValue::Absent,
                    },
                };
                alias_vals.insert(proj.name().to_string(), cell.clone());
                row.push(cell);
            }
            let order_keys = order_keys_for(ast, &scope, &alias_vals);
            let tiebreak = env
                .iter()
                .map(|(k, v)| format!("{k}={}", v.render()))
                .collect::<Vec<_>>()
                .join("\u{1f}");
            rows.push((row, order_keys, tiebreak));
        }
    }

    // 5. DISTINCT over projected rows
    if ast.distinct {
        let mut seen = std::collections::BTreeSet::new();
        rows.retain(|(row, _, _)| seen.insert(row.iter().map(typed_render).collect::<Vec<_>>().join("\u{1f}")));
    }

    // 6. total order: ORDER BY keys, then projected row, then full binding
    rows.sort_by(|a, b| {
        for (i, (_, dir)) in ast.order_by.iter().enumerate() {
            let ord = term_cmp(a.1[i].as_ref(), b.1[i].as_ref());
            let ord = if *dir == Direction::Desc { ord.reverse() } else { ord };
            if ord != Ordering::Equal {
                return ord;
            }
        }
        let ra: Vec<String> = a.0.iter().map(|c| c.render()).collect();
        let rb: Vec<String> = b.0.iter().map(|c| c.render()).collect();
        ra.cmp(&rb).then_with(|| a.2.cmp(&b.2))
    });

    // 7. limit
    if let Some(limit) = ast.limit {
        rows.truncate(limit);
    }

    let mut table = ResultTable::new(columns);
    for (row, _, _) in rows {
        table.push_row(row);
    }
    Ok(table)
}

fn order_keys_for(
    ast: &QueryAst,
    scope: &Scope,
    alias_vals: &BTreeMap<String, CellValue>,
) -> Vec<Option<Bound>> {
    ast.order_by
        .iter()
        .map(|(expr, _)| {
            if let Expr::Var(v) = expr {
                if let Some(c) = alias_vals.get(v) {
                    return if c.is_absent() { None } else { Some(Bound::Cell(c.clone())) };
                }
            }
            match eval_expr(expr, scope) {
                Ok(Value::Cell(c)) if !c.is_absent() => Some(Bound::Cell(c)),
                _ => None,
            }
        })
        .collect()
}

/// Human-readable evaluation plan for debugging fixtures.
pub fn explain(ast: &QueryAst) -> String {
    let mut out = String::new();
    if ast.patterns.is_empty() {
        out.push_str("scan: nothing\n");
    } else {
        out.push_str(&format!("scan: {} pattern(s)\n", ast.patterns.len()));
        for p in &ast.patterns {
            out.push_str(&format!("  {} {} {}\n", term_str(&p.subject), term_str(&p.predicate), term_str(&p.object)));
        }
    }
    for group in &ast.optionals {
        out.push_str(&format!("left-join: optional group of {} pattern(s)\n", group.len()));
    }
    for _ in &ast.binds {
        out.push_str("bind: computed column\n");
    }
    if !ast.filters.is_empty() {
        out.push_str(&format!("filter: {} condition(s)\n", ast.filters.len()));
    }
    let n_aggs = ast
        .select
        .iter()
        .filter(|p| matches!(p, Projection::Expr { expr, .. } if expr.contains_aggregate()))
        .count();
    if !ast.group_by.is_empty() || n_aggs > 0 {
        out.push_str(&format!(
            "group: {} key(s), {} aggregate(s)\n",
            ast.group_by.len(),
            n_aggs
        ));
    }
    if !ast.order_by.is_empty() {
        out.push_str(&format!("sort: {} key(s)\n", ast.order_by.len()));
    }
    if ast.distinct {
        out.push_str("distinct\n");
    }
    if let Some(l) = ast.limit {
        out.push_str(&format!("limit: {l}\n"));
    }
    out.push_str(&format!("project: {} column(s)\n", ast.select.len()));
    out
}

fn term_str(t: &TermPattern) -> String {
    match t {
        TermPattern::Var(v) => format!("?{v}"),
        TermPattern::Iri(iri) => format!("<{iri}>"),
        TermPattern::Lit(l) => format!("{:?}", l.render()),
    }
}
