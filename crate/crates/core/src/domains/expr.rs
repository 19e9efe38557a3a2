//! A small expression language for implicit level-set functions.
//!
//! Supports `+ - * / ^`, unary minus, parentheses, the variables
//! `x y z w` (or `x0..x3`), the constants `pi` and `e`, and the functions
//! `sqrt abs exp log sin cos tan sinh cosh tanh atan2 pow min max`.

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Num(f64),
    Var(usize),
    Neg(Box<Node>),
    Bin(Op, Box<Node>, Box<Node>),
    Call(Func, Vec<Node>),
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Op {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Func {
    Sqrt,
    Abs,
    Exp,
    Log,
    Sin,
    Cos,
    Tan,
    Sinh,
    Cosh,
    Tanh,
    Atan2,
    Pow,
    Min,
    Max,
}

impl Func {
    fn lookup(name: &str) -> Option<(Func, usize, bool)> {
        // (func, arity, variadic)
        Some(match name {
            "sqrt" => (Func::Sqrt, 1, false),
            "abs" => (Func::Abs, 1, false),
            "exp" => (Func::Exp, 1, false),
            "log" | "ln" => (Func::Log, 1, false),
            "sin" => (Func::Sin, 1, false),
            "cos" => (Func::Cos, 1, false),
            "tan" => (Func::Tan, 1, false),
            "sinh" => (Func::Sinh, 1, false),
            "cosh" => (Func::Cosh, 1, false),
            "tanh" => (Func::Tanh, 1, false),
            "atan2" => (Func::Atan2, 2, false),
            "pow" => (Func::Pow, 2, false),
            "min" => (Func::Min, 2, true),
            "max" => (Func::Max, 2, true),
            _ => return None,
        })
    }
}

/// A parsed expression in up to four variables.
#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    root: Node,
    max_var: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Sym(char),
}

fn tokenize(src: &str) -> Result<Vec<(Tok, usize)>> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text: String = chars[start..i].iter().collect();
            let v = text.parse::<f64>().map_err(|_| Error::Expr {
                column: col,
                message: format!("bad number '{text}'"),
            })?;
            out.push((Tok::Num(v), col));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push((Tok::Ident(chars[start..i].iter().collect()), col));
        } else if "+-*/^(),".contains(c) {
            out.push((Tok::Sym(c), col));
            i += 1;
        } else {
            return Err(Error::Expr {
                column: col,
                message: format!("unexpected character '{c}'"),
            });
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    end_col: usize,
    max_var: Option<usize>,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.0)
    }

    fn col(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end_col, |t| t.1)
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T> {
        Err(Error::Expr {
            column: self.col(),
            message: message.into(),
        })
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Sym(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Node> {
        let mut lhs = self.term()?;
        loop {
            let op = if self.eat('+') {
                Op::Add
            } else if self.eat('-') {
                Op::Sub
            } else {
                return Ok(lhs);
            };
            let rhs = self.term()?;
            lhs = Node::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Node> {
        let mut lhs = self.unary()?;
        loop {
            let op = if self.eat('*') {
                Op::Mul
            } else if self.eat('/') {
                Op::Div
            } else {
                return Ok(lhs);
            };
            let rhs = self.unary()?;
            lhs = Node::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<Node> {
        if self.eat('-') {
            return Ok(Node::Neg(Box::new(self.unary()?)));
        }
        if self.eat('+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Node> {
        let base = self.primary()?;
        if self.eat('^') {
            // right associative, binds tighter than unary minus on the left
            let exp = self.unary()?;
            return Ok(Node::Bin(Op::Pow, Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Node> {
        match self.peek().cloned() {
            Some(Tok::Num(v)) => {
                self.pos += 1;
                Ok(Node::Num(v))
            }
            Some(Tok::Sym('(')) => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(')') {
                    return self.err("expected ')'");
                }
                Ok(e)
            }
            Some(Tok::Ident(name)) => {
                let col = self.col();
                self.pos += 1;
                if self.eat('(') {
                    let Some((func, arity, variadic)) = Func::lookup(&name) else {
                        return Err(Error::Expr {
                            column: col,
                            message: format!("unknown function '{name}'"),
                        });
                    };
                    let mut args = vec![self.expr()?];
                    while self.eat(',') {
                        args.push(self.expr()?);
                    }
                    if !self.eat(')') {
                        return self.err("expected ')' after arguments");
                    }
                    let ok = if variadic {
                        args.len() >= arity
                    } else {
                        args.len() == arity
                    };
                    if !ok {
                        return Err(Error::Expr {
                            column: col,
                            message: format!("'{name}' takes {arity} argument(s), got {}", args.len()),
                        });
                    }
                    return Ok(Node::Call(func, args));
                }
                let var = match name.as_str() {
                    "pi" => return Ok(Node::Num(std::f64::consts::PI)),
                    "e" => return Ok(Node::Num(std::f64::consts::E)),
                    "x" | "x0" => 0,
                    "y" | "x1" => 1,
                    "z" | "x2" => 2,
                    "w" | "x3" => 3,
                    _ => {
                        return Err(Error::Expr {
                            column: col,
                            message: format!("unknown identifier '{name}'"),
                        })
                    }
                };
                self.max_var = Some(self.max_var.map_or(var, |m: usize| m.max(var)));
                Ok(Node::Var(var))
            }
            Some(_) => self.err("unexpected token"),
            None => self.err("unexpected end of expression"),
        }
    }
}

impl Expr {
    pub fn parse(src: &str) -> Result<Self> {
        let toks = tokenize(src)?;
        let mut p = Parser {
            toks,
            pos: 0,
            end_col: src.chars().count() + 1,
            max_var: None,
        };
        let root = p.expr()?;
        if p.pos != p.toks.len() {
            return p.err("trailing input");
        }
        Ok(Self {
            root,
            max_var: p.max_var,
        })
    }

    /// Number of leading variables the expression refers to.
    pub fn arity(&self) -> usize {
        self.max_var.map_or(0, |m| m + 1)
    }

    pub fn eval(&self, vars: &[f64]) -> f64 {
        eval(&self.root, vars)
    }
}

fn eval(node: &Node, v: &[f64]) -> f64 {
    match node {
        Node::Num(x) => *x,
        Node::Var(i) => v.get(*i).copied().unwrap_or(0.0),
        Node::Neg(a) => -eval(a, v),
        Node::Bin(op, a, b) => {
            let (a, b) = (eval(a, v), eval(b, v));
            match op {
                Op::Add => a + b,
                Op::Sub => a - b,
                Op::Mul => a * b,
                Op::Div => a / b,
                Op::Pow => a.powf(b),
            }
        }
        Node::Call(f, args) => {
            let a = eval(&args[0], v);
            match f {
                Func::Sqrt => a.sqrt(),
                Func::Abs => a.abs(),
                Func::Exp => a.exp(),
                Func::Log => a.ln(),
                Func::Sin => a.sin(),
                Func::Cos => a.cos(),
                Func::Tan => a.tan(),
                Func::Sinh => a.sinh(),
                Func::Cosh => a.cosh(),
                Func::Tanh => a.tanh(),
                Func::Atan2 => a.atan2(eval(&args[1], v)),
                Func::Pow => a.powf(eval(&args[1], v)),
                Func::Min => args[1..].iter().fold(a, |m, e| m.min(eval(e, v))),
                Func::Max => args[1..].iter().fold(a, |m, e| m.max(eval(e, v))),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence_and_functions() {
        let e = Expr::parse("1 + 2*3^2 - -4/2").unwrap();
        assert_eq!(e.eval(&[]), 1.0 + 18.0 + 2.0);
        let e = Expr::parse("sqrt(x^2 + y^2) - 1").unwrap();
        assert_eq!(e.arity(), 2);
        assert!((e.eval(&[3.0, 4.0]) - 4.0).abs() < 1e-15);
        let e = Expr::parse("min(x, y, -2) + max(z, 1e-1)").unwrap();
        assert_eq!(e.eval(&[1.0, 0.0, 0.0]), -2.0 + 0.1);
        let e = Expr::parse("-x^2").unwrap();
        assert_eq!(e.eval(&[3.0]), -9.0);
        let e = Expr::parse("cos(pi) + atan2(0, 1)").unwrap();
        assert_eq!(e.eval(&[]), -1.0);
    }

    #[test]
    fn errors_carry_columns() {
        match Expr::parse("x + foo(1)") {
            Err(Error::Expr { column, .. }) => assert_eq!(column, 5),
            other => panic!("{other:?}"),
        }
        match Expr::parse("(x + 1") {
            Err(Error::Expr { column, .. }) => assert_eq!(column, 7),
            other => panic!("{other:?}"),
        }
        assert!(Expr::parse("x $ 2").is_err());
        assert!(Expr::parse("sqrt(1, 2)").is_err());
        assert!(Expr::parse("q + 1").is_err());
    }
}
