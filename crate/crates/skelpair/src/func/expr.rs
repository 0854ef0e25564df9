//! Chart-local expression language: parser and evaluator.
//!
//! Grammar (whitespace between tokens is ignored):
//!
//! ```text
//! expr     := term (("+" | "-") term)*
//! term     := unary (("*" | "/") unary)*
//! unary    := "-" unary | power
//! power    := atom ("^" exponent)?
//! exponent := "-"? integer
//! atom     := number | "pi" | variable | function "(" args ")" | "(" expr ")"
//! args     := expr ("," expr)*
//! number   := digits ("." digits)?
//! variable := "x" positive-integer
//! function := "sin" | "cos" | "exp" | "abs" | "min" | "max"
//! ```
//!
//! Exponents are integer literals, so `^` binds tighter than unary minus
//! (`-x1^2` is `-(x1^2)`) and is not associative (`x1^2^3` is a syntax
//! error). Variables are 1-based: `x1` is the first coordinate.

use super::FuncError;

/// Parsed expression tree. Variable indices are 0-based internally.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Pi,
    Var(usize),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i32),
    Sin(Box<Expr>),
    Cos(Box<Expr>),
    Exp(Box<Expr>),
    Abs(Box<Expr>),
    Min(Box<Expr>, Box<Expr>),
    Max(Box<Expr>, Box<Expr>),
}

impl Expr {
    /// Largest 0-based variable index used, if any variable occurs.
    pub fn max_var(&self) -> Option<usize> {
        match self {
            Expr::Const(_) | Expr::Pi => None,
            Expr::Var(i) => Some(*i),
            Expr::Neg(a) | Expr::Sin(a) | Expr::Cos(a) | Expr::Exp(a) | Expr::Abs(a) => {
                a.max_var()
            }
            Expr::Pow(a, _) => a.max_var(),
            Expr::Add(a, b)
            | Expr::Sub(a, b)
            | Expr::Mul(a, b)
            | Expr::Div(a, b)
            | Expr::Min(a, b)
            | Expr::Max(a, b) => match (a.max_var(), b.max_var()) {
                (Some(x), Some(y)) => Some(x.max(y)),
                (x, None) => x,
                (None, y) => y,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Comma,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Num(_) => "a number".into(),
            Tok::Ident(name) => format!("identifier {name:?}"),
            Tok::Plus => "'+'".into(),
            Tok::Minus => "'-'".into(),
            Tok::Star => "'*'".into(),
            Tok::Slash => "'/'".into(),
            Tok::Caret => "'^'".into(),
            Tok::LParen => "'('".into(),
            Tok::RParen => "')'".into(),
            Tok::Comma => "','".into(),
        }
    }
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>, FuncError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0usize;
    while i < bytes.len() {
        let b = bytes[i];
        match b {
            b' ' | b'\t' | b'\n' | b'\r' => i += 1,
            b'+' => {
                out.push((Tok::Plus, i));
                i += 1;
            }
            b'-' => {
                out.push((Tok::Minus, i));
                i += 1;
            }
            b'*' => {
                out.push((Tok::Star, i));
                i += 1;
            }
            b'/' => {
                out.push((Tok::Slash, i));
                i += 1;
            }
            b'^' => {
                out.push((Tok::Caret, i));
                i += 1;
            }
            b'(' => {
                out.push((Tok::LParen, i));
                i += 1;
            }
            b')' => {
                out.push((Tok::RParen, i));
                i += 1;
            }
            b',' => {
                out.push((Tok::Comma, i));
                i += 1;
            }
            b'0'..=b'9' => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                if i < bytes.len() && bytes[i] == b'.' {
                    i += 1;
                    let frac_start = i;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                    if i == frac_start {
                        return Err(FuncError::SyntaxError {
                            position: i,
                            expected: "digits after the decimal point".into(),
                        });
                    }
                }
                let text = &src[start..i];
                let value: f64 = text.parse().map_err(|_| FuncError::SyntaxError {
                    position: start,
                    expected: "a number".into(),
                })?;
                out.push((Tok::Num(value), start));
            }
            b'.' => {
                return Err(FuncError::SyntaxError {
                    position: i,
                    expected: "a digit before the decimal point".into(),
                })
            }
            b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                let start = i;
                while i < bytes.len()
                    && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_')
                {
                    i += 1;
                }
                out.push((Tok::Ident(src[start..i].to_string()), start));
            }
            _ => {
                return Err(FuncError::SyntaxError {
                    position: i,
                    expected: "a token (number, identifier, operator, or parenthesis)".into(),
                })
            }
        }
    }
    Ok(out)
}

struct Parser<'a> {
    tokens: &'a [(Tok, usize)],
    pos: usize,
    src_len: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&'a (Tok, usize)> {
        self.tokens.get(self.pos)
    }

    fn bump(&mut self) -> Option<&'a (Tok, usize)> {
        let t = self.tokens.get(self.pos);
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn here(&self) -> usize {
        self.peek().map(|(_, p)| *p).unwrap_or(self.src_len)
    }

    fn expect(&mut self, want: &Tok, expected: &str) -> Result<(), FuncError> {
        match self.bump() {
            Some((t, _)) if t == want => Ok(()),
            Some((_, p)) => Err(FuncError::SyntaxError {
                position: *p,
                expected: expected.into(),
            }),
            None => Err(FuncError::SyntaxError {
                position: self.src_len,
                expected: expected.into(),
            }),
        }
    }

    fn expr(&mut self) -> Result<Expr, FuncError> {
        let mut lhs = self.term()?;
        while let Some((t, _)) = self.peek() {
            match t {
                Tok::Plus => {
                    self.bump();
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Tok::Minus => {
                    self.bump();
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => break,
            }
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr, FuncError> {
        let mut lhs = self.unary()?;
        while let Some((t, _)) = self.peek() {
            match t {
                Tok::Star => {
                    self.bump();
                    lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
                }
                Tok::Slash => {
                    self.bump();
                    lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
                }
                _ => break,
            }
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, FuncError> {
        if let Some((Tok::Minus, _)) = self.peek() {
            self.bump();
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, FuncError> {
        let base = self.atom()?;
        if let Some((Tok::Caret, _)) = self.peek() {
            self.bump();
            let exponent = self.exponent()?;
            return Ok(Expr::Pow(Box::new(base), exponent));
        }
        Ok(base)
    }

    fn exponent(&mut self) -> Result<i32, FuncError> {
        let negative = matches!(self.peek(), Some((Tok::Minus, _)));
        if negative {
            self.bump();
        }
        let position = self.here();
        match self.bump() {
            Some((Tok::Num(v), _)) if v.fract() == 0.0 && v.abs() <= i32::MAX as f64 => {
                let k = *v as i32;
                Ok(if negative { -k } else { k })
            }
            _ => Err(FuncError::SyntaxError {
                position,
                expected: "an integer exponent".into(),
            }),
        }
    }

    fn atom(&mut self) -> Result<Expr, FuncError> {
        let position = self.here();
        match self.bump() {
            Some((Tok::Num(v), _)) => Ok(Expr::Const(*v)),
            Some((Tok::LParen, _)) => {
                let inner = self.expr()?;
                self.expect(&Tok::RParen, "')'")?;
                Ok(inner)
            }
            Some((Tok::Ident(name), p)) => self.ident(name, *p),
            Some((t, p)) => Err(FuncError::SyntaxError {
                position: *p,
                expected: format!("a number, identifier, or '(' (found {})", t.describe()),
            }),
            None => Err(FuncError::SyntaxError {
                position,
                expected: "a number, identifier, or '('".into(),
            }),
        }
    }

    fn ident(&mut self, name: &str, position: usize) -> Result<Expr, FuncError> {
        if name == "pi" {
            return Ok(Expr::Pi);
        }
        if let Some(rest) = name.strip_prefix('x') {
            if !rest.is_empty() && !rest.starts_with('0') && rest.bytes().all(|b| b.is_ascii_digit())
            {
                let k: usize = rest.parse().map_err(|_| FuncError::UnknownIdentifier {
                    position,
                    name: name.to_string(),
                })?;
                return Ok(Expr::Var(k - 1));
            }
        }
        let arity = match name {
            "sin" | "cos" | "exp" | "abs" => 1,
            "min" | "max" => 2,
            _ => {
                return Err(FuncError::UnknownIdentifier {
                    position,
                    name: name.to_string(),
                })
            }
        };
        self.expect(&Tok::LParen, "'(' after a function name")?;
        let mut args = vec![self.expr()?];
        while let Some((Tok::Comma, _)) = self.peek() {
            self.bump();
            args.push(self.expr()?);
        }
        self.expect(&Tok::RParen, "')' or ','")?;
        if args.len() != arity {
            return Err(FuncError::ArityMismatch {
                position,
                name: name.to_string(),
                expected: arity,
                got: args.len(),
            });
        }
        let mut args = args.into_iter();
        let first = Box::new(args.next().expect("arity checked above"));
        Ok(match name {
            "sin" => Expr::Sin(first),
            "cos" => Expr::Cos(first),
            "exp" => Expr::Exp(first),
            "abs" => Expr::Abs(first),
            "min" => Expr::Min(first, Box::new(args.next().expect("arity checked above"))),
            "max" => Expr::Max(first, Box::new(args.next().expect("arity checked above"))),
            _ => unreachable!("arity table covers all function names"),
        })
    }
}

/// Parses one expression, consuming all input.
pub fn parse_expr(src: &str) -> Result<Expr, FuncError> {
    let tokens = lex(src)?;
    let mut parser = Parser {
        tokens: &tokens,
        pos: 0,
        src_len: src.len(),
    };
    let e = parser.expr()?;
    if let Some((t, p)) = parser.peek() {
        return Err(FuncError::SyntaxError {
            position: *p,
            expected: format!("end of input (found {})", t.describe()),
        });
    }
    Ok(e)
}

/// IEEE double evaluation; division by zero and non-finite intermediate
/// results become `EvalError`.
pub fn evaluate(e: &Expr, x: &[f64]) -> Result<f64, FuncError> {
    let value = eval_node(e, x)?;
    Ok(value)
}

fn eval_node(e: &Expr, x: &[f64]) -> Result<f64, FuncError> {
    let value = match e {
        Expr::Const(v) => *v,
        Expr::Pi => std::f64::consts::PI,
        Expr::Var(i) => *x.get(*i).ok_or_else(|| FuncError::EvalError {
            detail: format!("variable x{} beyond the point dimension {}", i + 1, x.len()),
        })?,
        Expr::Neg(a) => -eval_node(a, x)?,
        Expr::Add(a, b) => eval_node(a, x)? + eval_node(b, x)?,
        Expr::Sub(a, b) => eval_node(a, x)? - eval_node(b, x)?,
        Expr::Mul(a, b) => eval_node(a, x)? * eval_node(b, x)?,
        Expr::Div(a, b) => {
            let denom = eval_node(b, x)?;
            if denom == 0.0 {
                return Err(FuncError::EvalError {
                    detail: "division by zero".into(),
                });
            }
            eval_node(a, x)? / denom
        }
        Expr::Pow(a, k) => eval_node(a, x)?.powi(*k),
        Expr::Sin(a) => eval_node(a, x)?.sin(),
        Expr::Cos(a) => eval_node(a, x)?.cos(),
        Expr::Exp(a) => eval_node(a, x)?.exp(),
        Expr::Abs(a) => eval_node(a, x)?.abs(),
        Expr::Min(a, b) => eval_node(a, x)?.min(eval_node(b, x)?),
        Expr::Max(a, b) => eval_node(a, x)?.max(eval_node(b, x)?),
    };
    if !value.is_finite() {
        return Err(FuncError::EvalError {
            detail: "non-finite intermediate value".into(),
        });
    }
    Ok(value)
}
