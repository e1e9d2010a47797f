use super::ast::{AggOp, BinaryOp, Metric, ScoreExpr, UnaryOp, MAX_KHOP};
use super::DslError;

/// Nesting guard for the recursive descent; independent of the tree depth
/// bound, which is checked on the finished tree.
const MAX_NESTING: usize = 256;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64, String),
    Ident(String),
    Sym(char),
}

fn tokenize(src: &str) -> Result<Vec<(usize, Tok)>, DslError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || (c == '.' && bytes.get(i + 1).is_some_and(u8::is_ascii_digit)) {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && bytes[j].is_ascii_digit() {
                    i = j;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text = &src[start..i];
            let value: f64 = text.parse().map_err(|_| DslError::Syntax {
                pos: start,
                message: format!("malformed number `{text}`"),
            })?;
            if !value.is_finite() {
                return Err(DslError::Syntax {
                    pos: start,
                    message: format!("number `{text}` out of range"),
                });
            }
            out.push((start, Tok::Num(value, text.to_string())));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((start, Tok::Ident(src[start..i].to_string())));
        } else if "+-*/(),".contains(c) {
            out.push((i, Tok::Sym(c)));
            i += 1;
        } else {
            let ch = src[i..].chars().next().unwrap_or(c);
            return Err(DslError::Syntax {
                pos: i,
                message: format!("unexpected character `{ch}`"),
            });
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    at: usize,
    end: usize,
    nesting: usize,
}

enum Callee {
    Unary(UnaryOp),
    Agg(AggOp),
    Binary(BinaryOp),
    Khop,
}

fn callee(name: &str) -> Option<Callee> {
    if name == "khop" {
        return Some(Callee::Khop);
    }
    if let Some(op) = UnaryOp::ALL.into_iter().find(|o| o.name() == name) {
        return Some(Callee::Unary(op));
    }
    if let Some(op) = AggOp::ALL.into_iter().find(|o| o.name() == name) {
        return Some(Callee::Agg(op));
    }
    [BinaryOp::Min, BinaryOp::Max, BinaryOp::Pow]
        .into_iter()
        .find(|o| o.name() == name)
        .map(Callee::Binary)
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|(_, t)| t)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.at).map(|(p, _)| *p).unwrap_or(self.end)
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Sym(c)) {
            self.at += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), DslError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.unexpected(&format!("expected `{c}`")))
        }
    }

    fn unexpected(&self, what: &str) -> DslError {
        let found = match self.peek() {
            None => "end of input".to_string(),
            Some(Tok::Num(_, t)) => format!("`{t}`"),
            Some(Tok::Ident(t)) => format!("`{t}`"),
            Some(Tok::Sym(c)) => format!("`{c}`"),
        };
        DslError::Syntax {
            pos: self.pos(),
            message: format!("{what}, found {found}"),
        }
    }

    fn enter(&mut self) -> Result<(), DslError> {
        self.nesting += 1;
        if self.nesting > MAX_NESTING {
            return Err(DslError::TooDeep { depth: self.nesting });
        }
        Ok(())
    }

    fn expr(&mut self) -> Result<ScoreExpr, DslError> {
        self.enter()?;
        let mut left = self.term()?;
        loop {
            let op = if self.eat('+') {
                BinaryOp::Add
            } else if self.eat('-') {
                BinaryOp::Sub
            } else {
                break;
            };
            let right = self.term()?;
            left = ScoreExpr::binary(op, left, right);
        }
        self.nesting -= 1;
        Ok(left)
    }

    fn term(&mut self) -> Result<ScoreExpr, DslError> {
        let mut left = self.factor()?;
        loop {
            let op = if self.eat('*') {
                BinaryOp::Mul
            } else if self.eat('/') {
                BinaryOp::Div
            } else {
                break;
            };
            let right = self.factor()?;
            left = ScoreExpr::binary(op, left, right);
        }
        Ok(left)
    }

    fn factor(&mut self) -> Result<ScoreExpr, DslError> {
        self.enter()?;
        let pos = self.pos();
        let result = match self.peek().cloned() {
            Some(Tok::Num(v, _)) => {
                self.at += 1;
                ScoreExpr::Const(v)
            }
            Some(Tok::Sym('(')) => {
                self.at += 1;
                let inner = self.expr()?;
                self.expect(')')?;
                inner
            }
            Some(Tok::Sym('-')) => {
                self.at += 1;
                // Negated literals fold into the constant so that negative
                // constants print and re-parse as themselves.
                match self.factor()? {
                    ScoreExpr::Const(c) => ScoreExpr::Const(-c),
                    other => ScoreExpr::unary(UnaryOp::Neg, other),
                }
            }
            Some(Tok::Ident(name)) => {
                self.at += 1;
                self.identifier(&name, pos)?
            }
            _ => return Err(self.unexpected("expected a number, name or `(`")),
        };
        self.nesting -= 1;
        Ok(result)
    }

    fn identifier(&mut self, name: &str, pos: usize) -> Result<ScoreExpr, DslError> {
        if let Some(metric) = Metric::from_name(name) {
            if self.peek() == Some(&Tok::Sym('(')) {
                let found = self.count_call_args()?;
                return Err(DslError::Arity {
                    name: name.to_string(),
                    expected: 0,
                    found,
                });
            }
            return Ok(ScoreExpr::Metric(metric));
        }
        let Some(callee) = callee(name) else {
            return Err(DslError::UnknownIdentifier {
                name: name.to_string(),
                pos,
            });
        };
        if self.peek() != Some(&Tok::Sym('(')) {
            let expected = match callee {
                Callee::Binary(_) => 2,
                _ => 1,
            };
            return Err(DslError::Arity {
                name: name.to_string(),
                expected,
                found: 0,
            });
        }
        if let Callee::Khop = callee {
            return self.khop();
        }
        self.expect('(')?;
        let mut args = vec![self.expr()?];
        while self.eat(',') {
            args.push(self.expr()?);
        }
        self.expect(')')?;
        let expected = if matches!(callee, Callee::Binary(_)) { 2 } else { 1 };
        if args.len() != expected {
            return Err(DslError::Arity {
                name: name.to_string(),
                expected,
                found: args.len(),
            });
        }
        let mut args = args.into_iter();
        let first = args.next().expect("arity checked");
        Ok(match callee {
            Callee::Unary(op) => ScoreExpr::unary(op, first),
            Callee::Agg(op) => ScoreExpr::agg(op, first),
            Callee::Binary(op) => ScoreExpr::binary(op, first, args.next().expect("arity checked")),
            Callee::Khop => unreachable!(),
        })
    }

    fn khop(&mut self) -> Result<ScoreExpr, DslError> {
        self.expect('(')?;
        let k = match self.peek().cloned() {
            Some(Tok::Num(v, text)) if text.bytes().all(|b| b.is_ascii_digit()) => {
                self.at += 1;
                if v >= 1.0 && v <= MAX_KHOP as f64 {
                    v as u8
                } else {
                    return Err(DslError::KhopRange { found: text });
                }
            }
            Some(Tok::Sym(')')) => {
                return Err(DslError::Arity {
                    name: "khop".into(),
                    expected: 1,
                    found: 0,
                })
            }
            _ => {
                let arg = self.expr()?;
                if self.peek() == Some(&Tok::Sym(',')) {
                    return Err(DslError::Arity {
                        name: "khop".into(),
                        expected: 1,
                        found: 2,
                    });
                }
                return Err(DslError::KhopRange { found: arg.to_string() });
            }
        };
        if self.peek() == Some(&Tok::Sym(',')) {
            let found = 1 + self.count_remaining_args()?;
            return Err(DslError::Arity {
                name: "khop".into(),
                expected: 1,
                found,
            });
        }
        self.expect(')')?;
        Ok(ScoreExpr::Metric(Metric::Khop(k)))
    }

    fn count_call_args(&mut self) -> Result<usize, DslError> {
        self.expect('(')?;
        if self.eat(')') {
            return Ok(0);
        }
        self.expr()?;
        Ok(1 + self.count_remaining_args()?)
    }

    fn count_remaining_args(&mut self) -> Result<usize, DslError> {
        let mut n = 0;
        while self.eat(',') {
            self.expr()?;
            n += 1;
        }
        self.expect(')')?;
        Ok(n)
    }
}

/// Parses DSL text and enforces every [`ScoreExpr`] invariant.
pub fn parse(text: &str) -> Result<ScoreExpr, DslError> {
    let toks = tokenize(text)?;
    let mut p = Parser {
        toks,
        at: 0,
        end: text.len(),
        nesting: 0,
    };
    let expr = p.expr()?;
    if p.at != p.toks.len() {
        return Err(p.unexpected("expected end of input"));
    }
    expr.check_invariants()?;
    Ok(expr)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::ErrorKind;

    fn kind(text: &str) -> ErrorKind {
        parse(text).unwrap_err().kind()
    }

    #[test]
    fn single_metric() {
        assert_eq!(parse("degree").unwrap(), ScoreExpr::Metric(Metric::Degree));
    }

    #[test]
    fn precedence_is_grammar_forced() {
        let e = parse("normalize(degree) + 0.5 * pagerank").unwrap();
        let expected = ScoreExpr::binary(
            BinaryOp::Add,
            ScoreExpr::unary(UnaryOp::Normalize, ScoreExpr::Metric(Metric::Degree)),
            ScoreExpr::binary(
                BinaryOp::Mul,
                ScoreExpr::Const(0.5),
                ScoreExpr::Metric(Metric::PageRank),
            ),
        );
        assert_eq!(e, expected);
    }

    #[test]
    fn left_associative_subtraction() {
        let e = parse("degree - 1 - 2").unwrap();
        assert_eq!(e.to_string(), "(degree - 1) - 2");
    }

    #[test]
    fn whitespace_is_insignificant() {
        assert_eq!(
            parse(" nsum ( degree )*2 ").unwrap(),
            parse("nsum(degree) * 2").unwrap()
        );
    }

    #[test]
    fn unary_minus() {
        assert_eq!(parse("-3").unwrap(), ScoreExpr::Const(-3.0));
        assert_eq!(
            parse("-degree").unwrap(),
            ScoreExpr::unary(UnaryOp::Neg, ScoreExpr::Metric(Metric::Degree))
        );
        assert_eq!(parse("degree * -2").unwrap().to_string(), "degree * -2");
        assert_eq!(parse("- -2").unwrap(), ScoreExpr::Const(2.0));
    }

    #[test]
    fn pow_requires_bounded_constant_exponent() {
        assert_eq!(kind("pow(degree, pagerank)"), ErrorKind::NonConstantExponent);
        assert_eq!(kind("pow(degree, 5)"), ErrorKind::ExponentRange);
        assert!(parse("pow(degree, -4)").is_ok());
        assert!(parse("pow(degree, 0.5)").is_ok());
    }

    #[test]
    fn khop_takes_small_integer_literal() {
        assert_eq!(parse("khop(3)").unwrap(), ScoreExpr::Metric(Metric::Khop(3)));
        assert_eq!(kind("khop(9)"), ErrorKind::KhopRange);
        assert_eq!(kind("khop(0)"), ErrorKind::KhopRange);
        assert_eq!(kind("khop(2.5)"), ErrorKind::KhopRange);
        assert_eq!(kind("khop(degree)"), ErrorKind::KhopRange);
        assert_eq!(kind("khop"), ErrorKind::Arity);
        assert_eq!(kind("khop(1, 2)"), ErrorKind::Arity);
    }

    #[test]
    fn distinct_error_kinds() {
        assert_eq!(kind("degree +"), ErrorKind::Syntax);
        assert_eq!(kind("degree ** 2"), ErrorKind::Syntax);
        assert_eq!(kind("(degree"), ErrorKind::Syntax);
        assert_eq!(kind("degree $"), ErrorKind::Syntax);
        assert_eq!(kind(""), ErrorKind::Syntax);
        assert_eq!(kind("Degree"), ErrorKind::UnknownIdentifier);
        assert_eq!(kind("fiedler"), ErrorKind::UnknownIdentifier);
        assert_eq!(kind("normalize(degree, pagerank)"), ErrorKind::Arity);
        assert_eq!(kind("max(degree)"), ErrorKind::Arity);
        assert_eq!(kind("degree(1)"), ErrorKind::Arity);
        assert_eq!(kind("sqrt"), ErrorKind::Arity);
    }

    #[test]
    fn syntax_error_reports_position() {
        match parse("degree + * 2") {
            Err(DslError::Syntax { pos, .. }) => assert_eq!(pos, 9),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn size_and_depth_bounds() {
        let wide = vec!["degree"; 150].join(" + ");
        assert_eq!(kind(&wide), ErrorKind::SizeBound);
        let deep = format!("{}degree{}", "abs(".repeat(12), ")".repeat(12));
        assert_eq!(kind(&deep), ErrorKind::DepthBound);
        let ok = format!("{}degree{}", "abs(".repeat(11), ")".repeat(11));
        assert!(parse(&ok).is_ok());
        let nested = format!("{}degree{}", "(".repeat(10_000), ")".repeat(10_000));
        assert_eq!(kind(&nested), ErrorKind::DepthBound);
    }

    #[test]
    fn numbers() {
        assert_eq!(parse(".5").unwrap(), ScoreExpr::Const(0.5));
        assert_eq!(parse("1e-3").unwrap(), ScoreExpr::Const(0.001));
        assert_eq!(parse("2.5E2").unwrap(), ScoreExpr::Const(250.0));
        assert_eq!(kind("1.2.3"), ErrorKind::Syntax);
        assert_eq!(kind("1e999"), ErrorKind::Syntax);
    }
}
