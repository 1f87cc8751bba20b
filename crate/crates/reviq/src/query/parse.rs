//! Recursive-descent parser with position-annotated errors.

use super::ast::*;
use crate::value::{parse_scalar, CellValue};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("syntax error at line {line}, column {col}: {message}")]
    Syntax { line: usize, col: usize, message: String },
    #[error("unknown aggregate {0}")]
    UnknownAggregate(String),
    #[error("unknown prefix {0}")]
    UnknownPrefix(String),
    #[error("projected variable ?{0} is unbound")]
    UnboundProjection(String),
    #[error("aggregate used without GROUP BY context on ?{0}")]
    BareAggregate(String),
    #[error("projected variable ?{0} is not a group key")]
    NotAGroupKey(String),
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),   // bare word, possibly a keyword
    Prefixed(String, String), // pfx:local
    Var(String),     // ?name
    IriRef(String),  // <...>
    Str(String),     // "..."
    Number(String),
    Punct(char),     // ( ) { } . ; , * plus comparison glyphs handled as Op
    Op(String),      // = != < <= > >= + - * / && ||
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

struct Lexer<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
    col: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer { chars: src.chars().peekable(), line: 1, col: 1 }
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn tokenize(mut self) -> Result<Vec<Spanned>, ParseError> {
        let mut out = Vec::new();
        loop {
            while matches!(self.chars.peek(), Some(c) if c.is_whitespace()) {
                self.bump();
            }
            if matches!(self.chars.peek(), Some('#')) {
                while !matches!(self.chars.peek(), None | Some('\n')) {
                    self.bump();
                }
                continue;
            }
            let (line, col) = (self.line, self.col);
            let Some(&c) = self.chars.peek() else { break };
            let tok = match c {
                '?' | '$' => {
                    self.bump();
                    Tok::Var(self.take_while(|c| c.is_alphanumeric() || c == '_'))
                }
                '<' => {
                    // IRI ref or comparison operator
                    self.bump();
                    match self.chars.peek() {
                        Some('=') => {
                            self.bump();
                            Tok::Op("<=".into())
                        }
                        Some(c2) if iri_start(*c2) => {
                            let mut iri = String::new();
                            loop {
                                match self.bump() {
                                    Some('>') => break,
                                    Some(ch) => iri.push(ch),
                                    None => {
                                        return Err(self.err(line, col, "unterminated IRI"));
                                    }
                                }
                            }
                            Tok::IriRef(iri)
                        }
                        _ => Tok::Op("<".into()),
                    }
                }
                '"' => {
                    self.bump();
                    let mut s = String::new();
                    loop {
                        match self.bump() {
                            Some('"') => break,
                            Some('\\') => match self.bump() {
                                Some('n') => s.push('\n'),
                                Some(ch) => s.push(ch),
                                None => return Err(self.err(line, col, "unterminated string")),
                            },
                            Some(ch) => s.push(ch),
                            None => return Err(self.err(line, col, "unterminated string")),
                        }
                    }
                    Tok::Str(s)
                }
                '>' => {
                    self.bump();
                    if matches!(self.chars.peek(), Some('=')) {
                        self.bump();
                        Tok::Op(">=".into())
                    } else {
                        Tok::Op(">".into())
                    }
                }
                '!' => {
                    self.bump();
                    if matches!(self.chars.peek(), Some('=')) {
                        self.bump();
                        Tok::Op("!=".into())
                    } else {
                        Tok::Op("!".into())
                    }
                }
                '&' => {
                    self.bump();
                    if matches!(self.chars.peek(), Some('&')) {
                        self.bump();
                        Tok::Op("&&".into())
                    } else {
                        return Err(self.err(line, col, "expected &&"));
                    }
                }
                '|' => {
                    self.bump();
                    if matches!(self.chars.peek(), Some('|')) {
                        self.bump();
                        Tok::Op("||".into())
                    } else {
                        return Err(self.err(line, col, "expected ||"));
                    }
                }
                '=' | '+' | '/' => {
                    self.bump();
                    Tok::Op(c.to_string())
                }
                '-' => {
                    self.bump();
                    Tok::Op("-".into())
                }
                '(' | ')' | '{' | '}' | '.' | ';' | ',' | '*' => {
                    self.bump();
                    if c == '.' && matches!(self.chars.peek(), Some(d) if d.is_ascii_digit()) {
                        let rest = self.take_while(|c| c.is_ascii_digit());
                        Tok::Number(format!("0.{rest}"))
                    } else if c == '*' {
                        Tok::Op("*".into())
                    } else {
                        Tok::Punct(c)
                    }
                }
                d if d.is_ascii_digit() => {
                    let num = self.take_while(|c| c.is_ascii_digit() || c == '.');
                    Tok::Number(num)
                }
                a if a.is_alphabetic() || a == '_' => {
                    let word = self.take_while(|c| c.is_alphanumeric() || c == '_');
                    if matches!(self.chars.peek(), Some(':')) {
                        self.bump();
                        let local = self.take_while(|c| c.is_alphanumeric() || c == '_' || c == '-');
                        Tok::Prefixed(word, local)
                    } else {
                        Tok::Ident(word)
                    }
                }
                other => return Err(self.err(line, col, &format!("unexpected character {other:?}"))),
            };
            out.push(Spanned { tok, line, col });
        }
        Ok(out)
    }

    fn take_while(&mut self, pred: impl Fn(char) -> bool) -> String {
        let mut s = String::new();
        while matches!(self.chars.peek(), Some(&c) if pred(c)) {
            s.push(self.bump().unwrap());
        }
        s
    }

    fn err(&self, line: usize, col: usize, message: &str) -> ParseError {
        ParseError::Syntax { line, col, message: message.to_string() }
    }
}

fn iri_start(c: char) -> bool {
    c.is_alphabetic() || c == '/' || c == '_'
}

pub struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    prefixes: BTreeMap<String, String>,
}

/// Parse a query text into an AST, validating that every projected
/// variable is bound and that aggregates appear in a grouping context.
pub fn parse_query(text: &str) -> Result<QueryAst, ParseError> {
    let toks = Lexer::new(text).tokenize()?;
    let mut p = Parser { toks, pos: 0, prefixes: BTreeMap::new() };
    let ast = p.query()?;
    validate(&ast)?;
    Ok(ast)
}

fn validate(ast: &QueryAst) -> Result<(), ParseError> {
    let bound = ast.bound_vars();
    let grouped = ast.uses_aggregates();
    for proj in &ast.select {
        match proj {
            Projection::Var(v) => {
                if !bound.contains(v) {
                    return Err(ParseError::UnboundProjection(v.clone()));
                }
                if grouped && !ast.group_by.contains(v) {
                    return Err(ParseError::NotAGroupKey(v.clone()));
                }
            }
            Projection::Expr { expr, alias } => {
                let mut vars = Vec::new();
                expr.free_vars(&mut vars);
                for v in vars {
                    let aliased = ast.select.iter().any(|p| p.name() == v);
                    if !bound.contains(&v) && !aliased {
                        return Err(ParseError::UnboundProjection(v));
                    }
                    if grouped && !ast.group_by.contains(&v) {
                        return Err(ParseError::NotAGroupKey(v));
                    }
                }
                if expr.contains_aggregate() && !grouped {
                    return Err(ParseError::BareAggregate(alias.clone()));
                }
            }
        }
    }
    Ok(())
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|s| &s.tok)
    }

    fn advance(&mut self) -> Option<Spanned> {
        let t = self.toks.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn here(&self) -> (usize, usize) {
        self.toks
            .get(self.pos.min(self.toks.len().saturating_sub(1)))
            .map(|s| (s.line, s.col))
            .unwrap_or((1, 1))
    }

    fn fail(&self, message: impl Into<String>) -> ParseError {
        let (line, col) = self.here();
        ParseError::Syntax { line, col, message: message.into() }
    }

    fn keyword(&mut self, kw: &str) -> bool {
        if let Some(Tok::Ident(w)) = self.peek() {
            if w.eq_ignore_ascii_case(kw) {
                self.pos += 1;
                return true;
            }
        }
        false
    }

    fn expect_keyword(&mut self, kw: &str) -> Result<(), ParseError> {
        if self.keyword(kw) {
            Ok(())
        } else {
            Err(self.fail(format!("expected {kw}")))
        }
    }

    fn expect_punct(&mut self, c: char) -> Result<(), ParseError> {
        match self.peek() {
            Some(Tok::Punct(p)) if *p == c => {
                self.pos += 1;
                Ok(())
            }
            _ => Err(self.fail(format!("expected {c:?}"))),
        }
    }

    fn expect_op(&mut self, op: &str) -> Result<(), ParseError> {
        match self.peek() {
            Some(Tok::Op(o)) if o == op => {
                self.pos += 1;
                Ok(())
            }
            _ => Err(self.fail(format!("expected {op:?}"))),
        }
    }

    fn query(&mut self) -> Result<QueryAst, ParseError> {
        while self.keyword("PREFIX") {
            let name = match self.advance().map(|s| s.tok) {
                Some(Tok::Prefixed(p, local)) if local.is_empty() => p,
                _ => return Err(self.fail("expected prefix name ending in ':'")),
            };
            let iri = match self.advance().map(|s| s.tok) {
                Some(Tok::IriRef(iri)) => iri,
                _ => return Err(self.fail("expected <iri>")),
            };
            self.prefixes.insert(name, iri);
        }
        self.expect_keyword("SELECT")?;
        let distinct = self.keyword("DISTINCT");
        let mut select = Vec::new();
        loop {
            match self.peek() {
                Some(Tok::Var(_)) => {
                    if let Some(Tok::Var(v)) = self.advance().map(|s| s.tok) {
                        select.push(Projection::Var(v));
                    }
                }
                Some(Tok::Punct('(')) => {
                    self.pos += 1;
                    let expr = self.expr()?;
                    self.expect_keyword("AS")?;
                    let alias = match self.advance().map(|s| s.tok) {
                        Some(Tok::Var(v)) => v,
                        _ => return Err(self.fail("expected ?alias")),
                    };
                    self.expect_punct(')')?;
                    select.push(Projection::Expr { expr, alias });
                }
                _ => break,
            }
        }
        if select.is_empty() {
            return Err(self.fail("SELECT needs at least one projection"));
        }
        self.expect_keyword("WHERE")?;
        self.expect_punct('{')?;
        let mut ast = QueryAst {
            prefixes: self.prefixes.clone(),
            distinct,
            select,
            patterns: Vec::new(),
            binds: Vec::new(),
            optionals: Vec::new(),
            filters: Vec::new(),
            group_by: Vec::new(),
            order_by: Vec::new(),
            limit: None,
        };
        loop {
            match self.peek() {
                Some(Tok::Punct('}')) => {
                    self.pos += 1;
                    break;
                }
                Some(Tok::Ident(w)) if w.eq_ignore_ascii_case("FILTER") => {
                    self.pos += 1;
                    self.expect_punct('(')?;
                    let e = self.expr()?;
                    self.expect_punct(')')?;
                    ast.filters.push(e);
                    self.eat_dot();
                }
                Some(Tok::Ident(w)) if w.eq_ignore_ascii_case("BIND") => {
                    self.pos += 1;
                    self.expect_punct('(')?;
                    let e = self.expr()?;
                    self.expect_keyword("AS")?;
                    let v = match self.advance().map(|s| s.tok) {
                        Some(Tok::Var(v)) => v,
                        _ => return Err(self.fail("expected ?var")),
                    };
                    self.expect_punct(')')?;
                    ast.binds.push((e, v));
                    self.eat_dot();
                }
                Some(Tok::Ident(w)) if w.eq_ignore_ascii_case("OPTIONAL") => {
                    self.pos += 1;
                    self.expect_punct('{')?;
                    let mut group = Vec::new();
                    while !matches!(self.peek(), Some(Tok::Punct('}'))) {
                        self.triple_block(&mut group)?;
                    }
                    self.expect_punct('}')?;
                    ast.optionals.push(group);
                    self.eat_dot();
                }
                Some(_) => {
                    let mut block = Vec::new();
                    self.triple_block(&mut block)?;
                    ast.patterns.extend(block);
                }
                None => return Err(self.fail("unterminated WHERE block")),
            }
        }
        if self.keyword("GROUP") {
            self.expect_keyword("BY")?;
            while let Some(Tok::Var(_)) = self.peek() {
                if let Some(Tok::Var(v)) = self.advance().map(|s| s.tok) {
                    ast.group_by.push(v);
                }
            }
            if ast.group_by.is_empty() {
                return Err(self.fail("GROUP BY needs at least one variable"));
            }
        }
        if self.keyword("ORDER") {
            self.expect_keyword("BY")?;
            loop {
                match self.peek() {
                    Some(Tok::Ident(w)) if w.eq_ignore_ascii_case("ASC") => {
                        self.pos += 1;
                        self.expect_punct('(')?;
                        let e = self.expr()?;
                        self.expect_punct(')')?;
                        ast.order_by.push((e, Direction::Asc));
                    }
                    Some(Tok::Ident(w)) if w.eq_ignore_ascii_case("DESC") => {
                        self.pos += 1;
                        self.expect_punct('(')?;
                        let e = self.expr()?;
                        self.expect_punct(')')?;
                        ast.order_by.push((e, Direction::Desc));
                    }
                    Some(Tok::Var(_)) => {
                        if let Some(Tok::Var(v)) = self.advance().map(|s| s.tok) {
                            ast.order_by.push((Expr::Var(v), Direction::Asc));
                        }
                    }
                    _ => break,
                }
            }
            if ast.order_by.is_empty() {
                return Err(self.fail("ORDER BY needs at least one key"));
            }
        }
        if self.keyword("LIMIT") {
            match self.advance().map(|s| s.tok) {
                Some(Tok::Number(n)) => {
                    ast.limit = Some(
                        n.parse::<usize>().map_err(|_| self.fail("LIMIT expects an integer"))?,
                    );
                }
                _ => return Err(self.fail("LIMIT expects an integer")),
            }
        }
        if self.pos != self.toks.len() {
            return Err(self.fail("unexpected trailing input"));
        }
        Ok(ast)
    }

    fn eat_dot(&mut self) {
        if matches!(self.peek(), Some(Tok::Punct('.'))) {
            self.pos += 1;
        }
    }

    /// One subject with one or more `pred obj` groups separated by ';'.
    fn triple_block(&mut self, out: &mut Vec<TriplePattern>) -> Result<(), ParseError> {
        let subject = self.term()?;
        loop {
            let predicate = self.term()?;
            let object = self.term()?;
            out.push(TriplePattern {
                subject: subject.clone(),
                predicate,
                object,
            });
            match self.peek() {
                Some(Tok::Punct(';')) => {
                    self.pos += 1;
                    // allow a trailing ';' before '.' or '}'
                    if matches!(self.peek(), Some(Tok::Punct('.')) | Some(Tok::Punct('}'))) {
                        break;
                    }
                }
                _ => break,
            }
        }
        self.eat_dot();
        Ok(())
    }

    fn term(&mut self) -> Result<TermPattern, ParseError> {
        match self.advance().map(|s| s.tok) {
            Some(Tok::Var(v)) => Ok(TermPattern::Var(v)),
            Some(Tok::IriRef(iri)) => Ok(TermPattern::Iri(iri)),
            Some(Tok::Prefixed(p, local)) => {
                let ns = self
                    .prefixes
                    .get(&p)
                    .ok_or(ParseError::UnknownPrefix(p))?;
                Ok(TermPattern::Iri(format!("{ns}{local}")))
            }
            Some(Tok::Str(s)) => Ok(TermPattern::Lit(CellValue::Text(s))),
            Some(Tok::Number(n)) => Ok(TermPattern::Lit(parse_scalar(&n))),
            Some(Tok::Op(o)) if o == "-" => match self.advance().map(|s| s.tok) {
                Some(Tok::Number(n)) => Ok(TermPattern::Lit(parse_scalar(&format!("-{n}")))),
                _ => Err(self.fail("expected number after '-'")),
            },
            _ => Err(self.fail("expected term")),
        }
    }

    // expression grammar: or -> and -> cmp -> additive -> multiplicative -> unary -> primary
    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut left = self.and_expr()?;
        while matches!(self.peek(), Some(Tok::Op(o)) if o == "||") {
            self.pos += 1;
            let right = self.and_expr()?;
            left = Expr::Bin(BinOp::Or, Box::new(left), Box::new(right));
        }
        Ok(left)
    }

    fn and_expr(&mut self) -> Result<Expr, ParseError> {
        let mut left = self.cmp_expr()?;
        while matches!(self.peek(), Some(Tok::Op(o)) if o == "&&") {
            self.pos += 1;
            let right = self.cmp_expr()?;
            left = Expr::Bin(BinOp::And, Box::new(left), Box::new(right));
        }
        Ok(left)
    }

    fn cmp_expr(&mut self) -> Result<Expr, ParseError> {
        let left = self.add_expr()?;
        let op = match self.peek() {
            Some(Tok::Op(o)) => match o.as_str() {
                "=" => BinOp::Eq,
                "!=" => BinOp::Ne,
                "<" => BinOp::Lt,
                "<=" => BinOp::Le,
                ">" => BinOp::Gt,
                ">=" => BinOp::Ge,
                _ => return Ok(left),
            },
            _ => return Ok(left),
        };
        self.pos += 1;
        let right = self.add_expr()?;
        Ok(Expr::Bin(op, Box::new(left), Box::new(right)))
    }

    fn add_expr(&mut self) -> Result<Expr, ParseError> {
        let mut left = self.mul_expr()?;
        loop {
            let op = match self.peek() {
                Some(Tok::Op(o)) if o == "+" => BinOp::Add,
                Some(Tok::Op(o)) if o == "-" => BinOp::Sub,
                _ => break,
            };
            self.pos += 1;
            let right = self.mul_expr()?;
            left = Expr::Bin(op, Box::new(left), Box::new(right));
        }
        Ok(left)
    }

    fn mul_expr(&mut self) -> Result<Expr, ParseError> {
        let mut left = self.unary_expr()?;
        loop {
            let op = match self.peek() {
                Some(Tok::Op(o)) if o == "*" => BinOp::Mul,
                Some(Tok::Op(o)) if o == "/" => BinOp::Div,
                _ => break,
            };
            self.pos += 1;
            let right = self.unary_expr()?;
            left = Expr::Bin(op, Box::new(left), Box::new(right));
        }
        Ok(left)
    }

    fn unary_expr(&mut self) -> Result<Expr, ParseError> {
        match self.peek() {
            Some(Tok::Op(o)) if o == "!" => {
                self.pos += 1;
                Ok(Expr::Unary(UnOp::Not, Box::new(self.unary_expr()?)))
            }
            Some(Tok::Op(o)) if o == "-" => {
                self.pos += 1;
                Ok(Expr::Unary(UnOp::Neg, Box::new(self.unary_expr()?)))
            }
            _ => self.primary(),
        }
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        match self.peek().cloned() {
            Some(Tok::Var(_)) => {
                if let Some(Tok::Var(v)) = self.advance().map(|s| s.tok) {
                    Ok(Expr::Var(v))
                } else {
                    unreachable!()
                }
            }
            Some(Tok::Str(_)) => {
                if let Some(Tok::Str(s)) = self.advance().map(|s| s.tok) {
                    Ok(Expr::Lit(CellValue::Text(s)))
                } else {
                    unreachable!()
                }
            }
            Some(Tok::Number(_)) => {
                if let Some(Tok::Number(n)) = self.advance().map(|s| s.tok) {
                    Ok(Expr::Lit(parse_scalar(&n)))
                } else {
                    unreachable!()
                }
            }
            Some(Tok::Punct('(')) => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect_punct(')')?;
                Ok(e)
            }
            Some(Tok::Ident(word)) => {
                self.pos += 1;
                self.call(&word)
            }
            _ => Err(self.fail("expected expression")),
        }
    }

    fn call(&mut self, word: &str) -> Result<Expr, ParseError> {
        let upper = word.to_ascii_uppercase();
        if let Some(func) = match upper.as_str() {
            "COUNT" => Some(AggFunc::Count),
            "SUM" => Some(AggFunc::Sum),
            "AVG" => Some(AggFunc::Avg),
            "MIN" => Some(AggFunc::Min),
            "MAX" => Some(AggFunc::Max),
            "GROUP_CONCAT" => Some(AggFunc::GroupConcat),
            "MEDIAN" | "SAMPLE" | "STDEV" => {
                return Err(ParseError::UnknownAggregate(word.to_string()));
            }
            _ => None,
        } {
            self.expect_punct('(')?;
            let distinct = self.keyword("DISTINCT");
            let arg = if matches!(self.peek(), Some(Tok::Op(o)) if o == "*") {
                self.pos += 1;
                None
            } else {
                Some(self.expr()?)
            };
            let mut separator = "; ".to_string();
            if matches!(self.peek(), Some(Tok::Punct(';'))) {
                self.pos += 1;
                self.expect_keyword("SEPARATOR")?;
                self.expect_op("=")?;
                separator = match self.advance().map(|s| s.tok) {
                    Some(Tok::Str(s)) => s,
                    _ => return Err(self.fail("SEPARATOR expects a string")),
                };
            }
            self.expect_punct(')')?;
            return Ok(Expr::Agg(Box::new(Aggregate { func, distinct, arg, separator })));
        }
        let func = match upper.as_str() {
            "NUM" => Func::Num,
            "ROUND" => Func::Round,
            "NORM" => Func::Norm,
            "CONCAT" => Func::Concat,
            "STR" => Func::Str,
            "CONTAINS" => Func::Contains,
            _ => return Err(self.fail(format!("unknown function {word}"))),
        };
        self.expect_punct('(')?;
        let mut args = Vec::new();
        if !matches!(self.peek(), Some(Tok::Punct(')'))) {
            loop {
                args.push(self.expr()?);
                if matches!(self.peek(), Some(Tok::Punct(','))) {
                    self.pos += 1;
                } else {
                    break;
                }
            }
        }
        self.expect_punct(')')?;
        Ok(Expr::Call(func, args))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const Q1: &str = r#"
PREFIX orkgp: <http://orkg.org/property/>
SELECT ?reactor ?lhar (COUNT(*) AS ?n)
WHERE {
  ?c orkgp:P180009 ?reactor ;
     orkgp:P180003 ?lhar .
}
GROUP BY ?reactor ?lhar
ORDER BY DESC(?n) ?reactor ?lhar
"#;

    #[test]
    fn parses_group_count_query() {
        let ast = parse_query(Q1).unwrap();
        assert_eq!(ast.patterns.len(), 2);
        assert_eq!(ast.group_by.len(), 2);
        assert_eq!(ast.order_by.len(), 3);
        let aggs = ast
            .select
            .iter()
            .filter(|p| matches!(p, Projection::Expr { expr, .. } if expr.contains_aggregate()))
            .count();
        assert_eq!(aggs, 1);
    }

    #[test]
    fn rejects_unbound_projection() {
        assert_eq!(
            parse_query("SELECT ?x WHERE { }").unwrap_err(),
            ParseError::UnboundProjection("x".into())
        );
    }

    #[test]
    fn parses_arithmetic_bind() {
        let q = r#"
PREFIX orkgp: <http://orkg.org/property/>
SELECT ?host ?score
WHERE {
  ?c orkgp:P180031 ?host ;
     orkgp:P180033 ?eqe ;
     orkgp:P180035 ?vol .
  BIND(?eqe / ?vol AS ?score)
}
ORDER BY DESC(?score)
"#;
        let ast = parse_query(q).unwrap();
        assert_eq!(ast.binds.len(), 1);
        assert!(matches!(ast.binds[0].0, Expr::Bin(BinOp::Div, _, _)));
    }

    #[test]
    fn syntax_errors_carry_position() {
        let err = parse_query("SELECT ?x WHERE ?x").unwrap_err();
        match err {
            ParseError::Syntax { line, col, .. } => {
                assert_eq!(line, 1);
                assert!(col > 1);
            }
            other => panic!("expected syntax error, got {other:?}"),
        }
    }

    #[test]
    fn rejects_unknown_aggregate() {
        let err = parse_query(
            "SELECT (MEDIAN(?x) AS ?m) WHERE { ?a <http://p/q> ?x } GROUP BY ?a",
        )
        .unwrap_err();
        assert_eq!(err, ParseError::UnknownAggregate("MEDIAN".into()));
    }

    #[test]
    fn rejects_projected_non_group_key() {
        let err = parse_query(
            "SELECT ?x (COUNT(*) AS ?n) WHERE { ?x <http://p/q> ?y } GROUP BY ?y",
        )
        .unwrap_err();
        assert_eq!(err, ParseError::NotAGroupKey("x".into()));
    }

    #[test]
    fn parses_optional_and_filter() {
        let q = r#"
PREFIX orkgp: <http://orkg.org/property/>
SELECT ?t ?pr
WHERE {
  ?c orkgp:P37561 ?t .
  OPTIONAL { ?c orkgp:P32 ?pr . }
  FILTER(?t = 300 && ?t <= 400)
}
"#;
        let ast = parse_query(q).unwrap();
        assert_eq!(ast.optionals.len(), 1);
        assert_eq!(ast.filters.len(), 1);
    }
}
