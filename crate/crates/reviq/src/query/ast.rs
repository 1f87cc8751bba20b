//! Abstract syntax for the query subset.
//!
//! The grammar covers PREFIX, SELECT (DISTINCT), WHERE with triple
//! patterns, OPTIONAL groups, FILTER, BIND, GROUP BY with aggregates,
//! ORDER BY and LIMIT. Property paths, subqueries, UNION and federation
//! are deliberately out.

use crate::value::CellValue;
use std::collections::BTreeMap;

#[derive(Debug, Clone, PartialEq)]
pub enum TermPattern {
    Var(String),
    /// Fully expanded IRI.
    Iri(String),
    Lit(CellValue),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TriplePattern {
    pub subject: TermPattern,
    pub predicate: TermPattern,
    pub object: TermPattern,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    And,
    Or,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnOp {
    Not,
    Neg,
}

/// Scalar builtins available in FILTER, BIND and projection expressions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    /// Numeric part of a value: a number's value (qualifier dropped) or a
    /// range's lower bound.
    Num,
    /// `round(x, n)`: half-away-from-zero to exactly n decimals, trailing
    /// zeros kept.
    Round,
    /// Strip trailing fractional zeros.
    Norm,
    Concat,
    Str,
    Contains,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AggFunc {
    Count,
    Sum,
    Avg,
    Min,
    Max,
    GroupConcat,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Aggregate {
    pub func: AggFunc,
    pub distinct: bool,
    /// None means COUNT(*).
    pub arg: Option<Expr>,
    pub separator: String,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Var(String),
    Lit(CellValue),
    Unary(UnOp, Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Vec<Expr>),
    Agg(Box<Aggregate>),
}

impl Expr {
    pub fn contains_aggregate(&self) -> bool {
        match self {
            Expr::Agg(_) => true,
            Expr::Var(_) | Expr::Lit(_) => false,
            Expr::Unary(_, e) => e.contains_aggregate(),
            Expr::Bin(_, a, b) => a.contains_aggregate() || b.contains_aggregate(),
            Expr::Call(_, args) => args.iter().any(Expr::contains_aggregate),
        }
    }

    /// Variables referenced outside aggregate arguments.
    pub fn free_vars(&self, out: &mut Vec<String>) {
        match self {
            Expr::Var(v) => out.push(v.clone()),
            Expr::Lit(_) => {}
            Expr::Unary(_, e) => e.free_vars(out),
            Expr::Bin(_, a, b) => {
                a.free_vars(out);
                b.free_vars(out);
            }
            Expr::Call(_, args) => args.iter().for_each(|a| a.free_vars(out)),
            Expr::Agg(_) => {}
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Projection {
    Var(String),
    Expr { expr: Expr, alias: String },
}

impl Projection {
    pub fn name(&self) -> &str {
        match self {
            Projection::Var(v) => v,
            Projection::Expr { alias, .. } => alias,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Asc,
    Desc,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QueryAst {
    pub prefixes: BTreeMap<String, String>,
    pub distinct: bool,
    pub select: Vec<Projection>,
    pub patterns: Vec<TriplePattern>,
    /// BIND(expr AS ?var) clauses, applied in order after base patterns.
    pub binds: Vec<(Expr, String)>,
    pub optionals: Vec<Vec<TriplePattern>>,
    pub filters: Vec<Expr>,
    pub group_by: Vec<String>,
    pub order_by: Vec<(Expr, Direction)>,
    pub limit: Option<usize>,
}

impl QueryAst {
    pub fn uses_aggregates(&self) -> bool {
        !self.group_by.is_empty() || self.select.iter().any(|p| match p {
            Projection::Var(_) => false,
            Projection::Expr { expr, .. } => expr.contains_aggregate(),
        })
    }

    /// Variables bound by WHERE patterns, OPTIONAL patterns or BINDs.
    pub fn bound_vars(&self) -> Vec<String> {
        let mut vars = Vec::new();
        let mut add = |t: &TermPattern| {
            if let TermPattern::Var(v) = t {
                if !vars.contains(v) {
                    vars.push(v.clone());
                }
            }
        };
        for p in self.patterns.iter().chain(self.optionals.iter().flatten()) {
            add(&p.subject);
            add(&p.predicate);
            add(&p.object);
        }
        for (_, v) in &self.binds {
            if !vars.contains(v) {
                vars.push(v.clone());
            }
        }
        vars
    }
}
