//! Parsers for the `bertiniInput_variables` and `bertiniInput_equations`
//! grammars.
//!
//! Both files are sequences of `;`-terminated statements with `#` comments.
//! Equations are expanded into canonical sparse form while parsing.

use std::collections::HashMap;

use num_complex::Complex64;

use super::{GroupKind, PolySystem, Polynomial, VariableGroup, VariableGroups};
use crate::error::{Error, ParseError, Result};

const VARIABLES_FILE: &str = "bertiniInput_variables";
const EQUATIONS_FILE: &str = "bertiniInput_equations";

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Number(f64),
    Sym(char),
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
}

fn lex(text: &str) -> std::result::Result<Vec<Token>, ParseError> {
    let mut out = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let body = raw.split('#').next().unwrap_or("");
        let chars: Vec<char> = body.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let ch = chars[i];
            if ch.is_whitespace() {
                i += 1;
            } else if ch.is_ascii_alphabetic() || ch == '_' {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                out.push(Token {
                    tok: Tok::Ident(chars[start..i].iter().collect()),
                    line,
                });
            } else if ch.is_ascii_digit() || ch == '.' {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                    i += 1;
                }
                if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                    let mut k = i + 1;
                    if k < chars.len() && (chars[k] == '+' || chars[k] == '-') {
                        k += 1;
                    }
                    if k < chars.len() && chars[k].is_ascii_digit() {
                        i = k;
                        while i < chars.len() && chars[i].is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let s: String = chars[start..i].iter().collect();
                let v: f64 = s
                    .parse()
                    .map_err(|_| ParseError::new(line, format!("bad number literal `{s}`")))?;
                out.push(Token {
                    tok: Tok::Number(v),
                    line,
                });
            } else if "+-*/^()=,;".contains(ch) {
                out.push(Token {
                    tok: Tok::Sym(ch),
                    line,
                });
                i += 1;
            } else {
                return Err(ParseError::new(line, format!("unexpected character `{ch}`")));
            }
        }
    }
    Ok(out)
}

/// Splits a token stream into `;`-terminated statements.
fn statements(tokens: Vec<Token>) -> std::result::Result<Vec<Vec<Token>>, ParseError> {
    let mut out = Vec::new();
    let mut cur: Vec<Token> = Vec::new();
    for t in tokens {
        if t.tok == Tok::Sym(';') {
            if !cur.is_empty() {
                out.push(std::mem::take(&mut cur));
            }
        } else {
            cur.push(t);
        }
    }
    if let Some(t) = cur.first() {
        return Err(ParseError::new(t.line, "missing `;` at end of statement"));
    }
    Ok(out)
}

/// Comma-separated identifiers.
fn name_list(toks: &[Token], line: usize) -> std::result::Result<Vec<String>, ParseError> {
    let mut names = Vec::new();
    let mut expect_name = true;
    for t in toks {
        match (&t.tok, expect_name) {
            (Tok::Ident(s), true) => {
                names.push(s.clone());
                expect_name = false;
            }
            (Tok::Sym(','), false) => expect_name = true,
            (other, _) => {
                return Err(ParseError::new(t.line, format!("unexpected {other:?} in name list")))
            }
        }
    }
    if names.is_empty() {
        return Err(ParseError::new(line, "empty name list"));
    }
    if expect_name {
        return Err(ParseError::new(line, "trailing `,` in name list"));
    }
    Ok(names)
}

fn parse_err(file: &str, e: ParseError) -> Error {
    Error::Parse {
        file: file.to_string(),
        source: e,
    }
}

/// Parses `hom_variable_group ...;` / `variable_group ...;` declarations.
pub fn parse_variables(text: &str) -> Result<VariableGroups> {
    let err = |e| parse_err(VARIABLES_FILE, e);
    let stmts = statements(lex(text).map_err(err)?).map_err(err)?;
    let mut groups = Vec::new();
    let mut seen: HashMap<String, usize> = HashMap::new();
    for stmt in stmts {
        let line = stmt[0].line;
        let kind = match &stmt[0].tok {
            Tok::Ident(k) if k == "hom_variable_group" => GroupKind::Projective,
            Tok::Ident(k) if k == "variable_group" => GroupKind::Affine,
            other => {
                return Err(err(ParseError::new(
                    line,
                    format!("unknown declaration {other:?}"),
                )))
            }
        };
        let names = name_list(&stmt[1..], line).map_err(err)?;
        for n in &names {
            if let Some(prev) = seen.insert(n.clone(), line) {
                return Err(err(ParseError::new(
                    line,
                    format!("variable {n} already declared on line {prev}"),
                )));
            }
        }
        if kind == GroupKind::Projective && names.len() < 2 {
            return Err(err(ParseError::new(
                line,
                "hom_variable_group needs at least two variables",
            )));
        }
        groups.push(VariableGroup { names, kind });
    }
    if groups.is_empty() {
        return Err(err(ParseError::new(1, "no variable groups declared")));
    }
    VariableGroups::new(groups)
}

#[derive(Debug, Clone)]
enum Expr {
    Const(Complex64),
    Var(usize),
    Name(String, usize),
    Neg(Box<Expr>),
    Bin(char, Box<Expr>, Box<Expr>, usize),
    Pow(Box<Expr>, Box<Expr>, usize),
}

struct ExprParser<'a> {
    toks: &'a [Token],
    pos: usize,
    groups: &'a VariableGroups,
}

impl<'a> ExprParser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn line(&self) -> usize {
        self.toks
            .get(self.pos)
            .or_else(|| self.toks.last())
            .map_or(0, |t| t.line)
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Sym(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> std::result::Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let line = self.line();
            if self.eat('+') {
                lhs = Expr::Bin('+', Box::new(lhs), Box::new(self.term()?), line);
            } else if self.eat('-') {
                lhs = Expr::Bin('-', Box::new(lhs), Box::new(self.term()?), line);
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> std::result::Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let line = self.line();
            if self.eat('*') {
                lhs = Expr::Bin('*', Box::new(lhs), Box::new(self.unary()?), line);
            } else if self.eat('/') {
                lhs = Expr::Bin('/', Box::new(lhs), Box::new(self.unary()?), line);
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> std::result::Result<Expr, ParseError> {
        if self.eat('-') {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        if self.eat('+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> std::result::Result<Expr, ParseError> {
        let base = self.atom()?;
        let line = self.line();
        if self.eat('^') {
            let exp = self.unary()?;
            return Ok(Expr::Pow(Box::new(base), Box::new(exp), line));
        }
        Ok(base)
    }

    fn atom(&mut self) -> std::result::Result<Expr, ParseError> {
        let line = self.line();
        let Some(tok) = self.peek().cloned() else {
            return Err(ParseError::new(line, "unexpected end of expression"));
        };
        self.pos += 1;
        match tok {
            Tok::Number(v) => Ok(Expr::Const(Complex64::new(v, 0.0))),
            Tok::Ident(name) => {
                if let Some(v) = self.groups.index_of(&name) {
                    Ok(Expr::Var(v))
                } else if name == "I" {
                    Ok(Expr::Const(Complex64::new(0.0, 1.0)))
                } else {
                    Ok(Expr::Name(name, line))
                }
            }
            Tok::Sym('(') => {
                let e = self.expr()?;
                if !self.eat(')') {
                    return Err(ParseError::new(self.line(), "expected `)`"));
                }
                Ok(e)
            }
            Tok::Sym(c) => Err(ParseError::new(line, format!("unexpected `{c}`"))),
        }
    }
}

enum Slot {
    Pending(Expr),
    InProgress,
    Done(Polynomial),
}

struct Resolver {
    nvars: usize,
    slots: HashMap<String, (usize, Slot)>,
}

impl Resolver {
    fn resolve(&mut self, name: &str, use_line: usize) -> std::result::Result<Polynomial, ParseError> {
        let Some((_, slot)) = self.slots.get_mut(name) else {
            return Err(ParseError::new(use_line, format!("undeclared identifier `{name}`")));
        };
        match std::mem::replace(slot, Slot::InProgress) {
            Slot::Done(p) => {
                let out = p.clone();
                self.slots.get_mut(name).unwrap().1 = Slot::Done(p);
                Ok(out)
            }
            Slot::InProgress => Err(ParseError::new(
                use_line,
                format!("cyclic assignment involving `{name}`"),
            )),
            Slot::Pending(expr) => {
                let p = self.eval(&expr)?;
                self.slots.get_mut(name).unwrap().1 = Slot::Done(p.clone());
                Ok(p)
            }
        }
    }

    fn eval(&mut self, e: &Expr) -> std::result::Result<Polynomial, ParseError> {
        Ok(match e {
            Expr::Const(c) => Polynomial::constant(self.nvars, *c),
            Expr::Var(v) => Polynomial::variable(self.nvars, *v),
            Expr::Name(n, l) => self.resolve(n, *l)?,
            Expr::Neg(a) => -&self.eval(a)?,
            Expr::Bin(op, a, b, l) => {
                let a = self.eval(a)?;
                let b = self.eval(b)?;
                match op {
                    '+' => &a + &b,
                    '-' => &a - &b,
                    '*' => &a * &b,
                    '/' => match b.as_constant() {
                        Some(c) if c.norm() != 0.0 => a.scale(c.inv()),
                        Some(_) => return Err(ParseError::new(*l, "division by zero")),
                        None => {
                            return Err(ParseError::new(
                                *l,
                                "division is only supported by constants",
                            ))
                        }
                    },
                    _ => unreachable!(),
                }
            }
            Expr::Pow(base, exp, l) => {
                let base = self.eval(base)?;
                let exp = self.eval(exp)?;
                let k = exp
                    .as_constant()
                    .filter(|c| c.im == 0.0 && c.re.fract() == 0.0)
                    .ok_or_else(|| ParseError::new(*l, "exponent must be an integer constant"))?;
                if k.re < 0.0 {
                    return Err(ParseError::new(*l, "negative exponent"));
                }
                base.pow(k.re as u32)
            }
        })
    }
}

/// Parses a `function ...;` declaration followed by `name = expr;`
/// assignments. Names that are assigned but not declared as functions act
/// as subexpressions and may be referenced from any other assignment.
pub fn parse_equations(text: &str, groups: &VariableGroups) -> Result<PolySystem> {
    let err = |e| parse_err(EQUATIONS_FILE, e);
    let stmts = statements(lex(text).map_err(err)?).map_err(err)?;
    let nvars = groups.total_vars();
    let mut functions: Vec<(String, usize)> = Vec::new();
    let mut slots: HashMap<String, (usize, Slot)> = HashMap::new();

    for stmt in &stmts {
        let line = stmt[0].line;
        match (&stmt[0].tok, stmt.get(1).map(|t| &t.tok)) {
            (Tok::Ident(k), _) if k == "function" || k == "constant" => {
                for n in name_list(&stmt[1..], line).map_err(err)? {
                    if groups.index_of(&n).is_some() {
                        return Err(err(ParseError::new(
                            line,
                            format!("`{n}` is already a variable"),
                        )));
                    }
                    if k == "function" {
                        if functions.iter().any(|(f, _)| *f == n) {
                            return Err(err(ParseError::new(
                                line,
                                format!("function `{n}` declared twice"),
                            )));
                        }
                        functions.push((n, line));
                    }
                }
            }
            (Tok::Ident(k), None) if k == "END" => {}
            (Tok::Ident(name), Some(Tok::Sym('='))) => {
                if groups.index_of(name).is_some() || name == "I" {
                    return Err(err(ParseError::new(
                        line,
                        format!("cannot assign to `{name}`"),
                    )));
                }
                let mut p = ExprParser {
                    toks: &stmt[2..],
                    pos: 0,
                    groups,
                };
                let expr = p.expr().map_err(err)?;
                if p.pos != stmt.len() - 2 {
                    return Err(err(ParseError::new(p.line(), "trailing tokens in expression")));
                }
                if slots
                    .insert(name.clone(), (line, Slot::Pending(expr)))
                    .is_some()
                {
                    return Err(err(ParseError::new(
                        line,
                        format!("`{name}` assigned twice"),
                    )));
                }
            }
            (other, _) => {
                return Err(err(ParseError::new(
                    line,
                    format!("expected declaration or assignment, found {other:?}"),
                )))
            }
        }
    }

    if functions.is_empty() {
        return Err(err(ParseError::new(1, "no `function` declaration")));
    }
    let mut resolver = Resolver { nvars, slots };
    let mut names = Vec::new();
    let mut polys = Vec::new();
    for (f, line) in &functions {
        if !resolver.slots.contains_key(f) {
            return Err(err(ParseError::new(
                *line,
                format!("function `{f}` is never assigned"),
            )));
        }
        polys.push(resolver.resolve(f, *line).map_err(err)?);
        names.push(f.clone());
    }
    // Unused subexpressions must still be well formed.
    let pending: Vec<(String, usize)> = resolver
        .slots
        .iter()
        .filter(|(_, (_, s))| matches!(s, Slot::Pending(_)))
        .map(|(n, (l, _))| (n.clone(), *l))
        .collect();
    for (n, l) in pending {
        resolver.resolve(&n, l).map_err(err)?;
    }
    PolySystem::new(groups.clone(), names, polys)
}

#[cfg(test)]
mod tests {
    use super::*;

    const TWISTED_VARS: &str = "# The text in bertiniInput_variables for the twisted cubic example.
# Use variable_group to work with affine coordinates and
#  multiple lines to work with several variable groups.
hom_variable_group x_0, x_1, x_2, x_3;
";

    const TWISTED_EQS: &str = "# The text in bertiniInput_equations.
# It follows the same syntax as Bertini.
function f1, f2, f3;
f1 = x_1^2 - x_0*x_2; f2 = x_2^2 - x_1*x_3; f3 = x_0*x_3 - x_1*x_2;
";

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn variables_examples() {
        let g = parse_variables(TWISTED_VARS).unwrap();
        assert_eq!(g.len(), 1);
        assert_eq!(g.group(0).len(), 4);
        assert_eq!(g.group(0).kind, GroupKind::Projective);

        let g = parse_variables("hom_variable_group x_0,x_1;\nhom_variable_group y_0,y_1;")
            .unwrap();
        assert_eq!(g.dims(), vec![1, 1]);

        let g = parse_variables("variable_group x, y;").unwrap();
        assert_eq!(g.group(0).kind, GroupKind::Affine);
        assert_eq!(g.group(0).len(), 2);
    }

    #[test]
    fn variables_errors() {
        assert!(parse_variables("hom_variable_group x, y, x;").is_err());
        assert!(parse_variables("hom_variable_group ;").is_err());
        assert!(parse_variables("group x, y;").is_err());
        let e = parse_variables("hom_variable_group x, y").unwrap_err();
        assert!(e.to_string().contains("missing `;`"), "{e}");
        assert!(parse_variables("hom_variable_group x;").is_err());
    }

    #[test]
    fn twisted_cubic_equations() {
        let g = parse_variables(TWISTED_VARS).unwrap();
        let sys = parse_equations(TWISTED_EQS, &g).unwrap();
        assert_eq!(sys.len(), 3);
        assert_eq!(sys.degrees(), &[vec![2], vec![2], vec![2]]);
        assert_eq!(sys.names(), &["f1", "f2", "f3"]);
        assert_eq!(sys.polys()[0].terms().len(), 2);
    }

    #[test]
    fn bilinear_degrees() {
        let g = parse_variables("hom_variable_group x_0,x_1;\nhom_variable_group y_0,y_1;")
            .unwrap();
        let sys = parse_equations("function f1; f1 = x_0*y_0 + x_1*y_1;", &g).unwrap();
        assert_eq!(sys.degrees(), &[vec![1, 1]]);
        let e = parse_equations("function f1; f1 = x_0 + x_0*y_0;", &g).unwrap_err();
        assert!(matches!(e, Error::NotMultihomogeneous { .. }), "{e}");
    }

    #[test]
    fn complex_literals_subexpressions_and_forward_refs() {
        let g = parse_variables("hom_variable_group x, y;").unwrap();
        let sys = parse_equations(
            "function f; f = a*x - (2.5e-1 - 3*I)*y^2/2; a = x + b; b = -y;",
            &g,
        )
        .unwrap();
        // f = x^2 - xy - (0.125 - 1.5 I) y^2
        let p = &sys.polys()[0];
        let x = [c(0.7, 0.2), c(-0.3, 1.1)];
        let expect = x[0] * x[0] - x[0] * x[1] - c(0.125, -1.5) * x[1] * x[1];
        assert!((p.evaluate(&x) - expect).norm() < 1e-14);
        assert_eq!(sys.degrees(), &[vec![2]]);
    }

    #[test]
    fn equation_errors() {
        let g = parse_variables("hom_variable_group x, y;").unwrap();
        let cases = [
            ("function f; f = x*z;", "undeclared"),
            ("function f; f = x^-1;", "negative exponent"),
            ("function f; f = x^1.5;", "integer"),
            ("function f; f = a; a = b*x; b = a;", "cyclic"),
            ("function f, g; f = x;", "never assigned"),
            ("function f; f = x; f = y;", "twice"),
            ("function f; f = x + ;", "unexpected"),
            ("function f; f = x y;", "trailing"),
            ("function f; f = x / y;", "constants"),
            ("function f; f = x", "missing `;`"),
        ];
        for (text, needle) in cases {
            let e = parse_equations(text, &g).unwrap_err().to_string();
            assert!(e.contains(needle), "{text}: {e}");
        }
    }

    #[test]
    fn error_reports_line_number() {
        let g = parse_variables("hom_variable_group x, y;").unwrap();
        let e = parse_equations("function f;\n\nf = x*q;", &g).unwrap_err();
        match e {
            Error::Parse { source, .. } => assert_eq!(source.line, 3),
            other => panic!("{other}"),
        }
    }
}
