use std::collections::BTreeSet;
use std::fmt;

use num_traits::{One, ToPrimitive, Zero};

use crate::scalar::Rational;

/// Expression tree for a right-hand side of a `dyn` line.
#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(Rational),
    Var(String),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    Pow(Box<Expr>, u32),
    Sin(String),
    Cos(String),
}

impl Expr {
    pub fn num(value: Rational) -> Expr {
        Expr::Num(value)
    }

    pub fn var(name: &str) -> Expr {
        Expr::Var(name.to_string())
    }

    /// Every symbol referenced, including sin/cos arguments.
    pub fn symbols(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.walk(&mut |e| match e {
            Expr::Var(n) | Expr::Sin(n) | Expr::Cos(n) => {
                out.insert(n.clone());
            }
            _ => {}
        });
        out
    }

    /// Symbols used outside sin/cos.
    pub fn polynomial_symbols(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.walk(&mut |e| {
            if let Expr::Var(n) = e {
                out.insert(n.clone());
            }
        });
        out
    }

    /// Symbols used as sin/cos arguments.
    pub fn trig_symbols(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.walk(&mut |e| match e {
            Expr::Sin(n) | Expr::Cos(n) => {
                out.insert(n.clone());
            }
            _ => {}
        });
        out
    }

    fn walk(&self, f: &mut impl FnMut(&Expr)) {
        f(self);
        match self {
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) => {
                a.walk(f);
                b.walk(f);
            }
            Expr::Neg(a) | Expr::Pow(a, _) => a.walk(f),
            _ => {}
        }
    }

    /// Flattens a chain of `+`, `-` and unary minus into signed summands.
    pub fn signed_terms(&self) -> Vec<(bool, &Expr)> {
        let mut out = Vec::new();
        self.collect_terms(true, &mut out);
        out
    }

    fn collect_terms<'a>(&'a self, positive: bool, out: &mut Vec<(bool, &'a Expr)>) {
        match self {
            Expr::Add(a, b) => {
                a.collect_terms(positive, out);
                b.collect_terms(positive, out);
            }
            Expr::Sub(a, b) => {
                a.collect_terms(positive, out);
                b.collect_terms(!positive, out);
            }
            Expr::Neg(a) => a.collect_terms(!positive, out),
            other => out.push((positive, other)),
        }
    }

    /// Numeric evaluation with `lookup` supplying variable values.
    pub fn eval(&self, lookup: &impl Fn(&str) -> f64) -> f64 {
        match self {
            Expr::Num(q) => q.to_f64().unwrap_or(f64::NAN),
            Expr::Var(n) => lookup(n),
            Expr::Add(a, b) => a.eval(lookup) + b.eval(lookup),
            Expr::Sub(a, b) => a.eval(lookup) - b.eval(lookup),
            Expr::Mul(a, b) => a.eval(lookup) * b.eval(lookup),
            Expr::Neg(a) => -a.eval(lookup),
            Expr::Pow(a, k) => a.eval(lookup).powi(*k as i32),
            Expr::Sin(n) => lookup(n).sin(),
            Expr::Cos(n) => lookup(n).cos(),
        }
    }

    /// Symbolic partial derivative with light constant folding.
    pub fn diff(&self, var: &str) -> Expr {
        use Expr::*;
        match self {
            Num(_) => Num(Rational::zero()),
            Var(n) => Num(if n == var { Rational::one() } else { Rational::zero() }),
            Add(a, b) => add(a.diff(var), b.diff(var)),
            Sub(a, b) => sub(a.diff(var), b.diff(var)),
            Mul(a, b) => add(mul(a.diff(var), (**b).clone()), mul((**a).clone(), b.diff(var))),
            Neg(a) => neg(a.diff(var)),
            Pow(a, k) => match k {
                0 => Num(Rational::zero()),
                1 => a.diff(var),
                _ => mul(mul(Num(Rational::from_integer((*k).into())), pow((**a).clone(), k - 1)), a.diff(var)),
            },
            Sin(n) if n == var => Cos(n.clone()),
            Cos(n) if n == var => neg(Sin(n.clone())),
            Sin(_) | Cos(_) => Num(Rational::zero()),
        }
    }

    /// Stack-machine form for fast repeated evaluation; `slot` maps a symbol to
    /// its position in the value array passed to [`Program::eval`].
    pub fn compile(&self, slot: &impl Fn(&str) -> usize) -> Program {
        let mut ops = Vec::new();
        self.emit(slot, &mut ops);
        let mut depth = 0usize;
        let mut max_depth = 0usize;
        for op in &ops {
            match op {
                Op::Const(_) | Op::Load(_) | Op::Sin(_) | Op::Cos(_) => depth += 1,
                Op::Add | Op::Sub | Op::Mul => depth -= 1,
                Op::Neg | Op::Pow(_) => {}
            }
            max_depth = max_depth.max(depth);
        }
        Program { ops, max_depth }
    }

    fn emit(&self, slot: &impl Fn(&str) -> usize, ops: &mut Vec<Op>) {
        match self {
            Expr::Num(q) => ops.push(Op::Const(q.to_f64().unwrap_or(f64::NAN))),
            Expr::Var(n) => ops.push(Op::Load(slot(n))),
            Expr::Sin(n) => ops.push(Op::Sin(slot(n))),
            Expr::Cos(n) => ops.push(Op::Cos(slot(n))),
            Expr::Add(a, b) => {
                a.emit(slot, ops);
                b.emit(slot, ops);
                ops.push(Op::Add);
            }
            Expr::Sub(a, b) => {
                a.emit(slot, ops);
                b.emit(slot, ops);
                ops.push(Op::Sub);
            }
            Expr::Mul(a, b) => {
                a.emit(slot, ops);
                b.emit(slot, ops);
                ops.push(Op::Mul);
            }
            Expr::Neg(a) => {
                a.emit(slot, ops);
                ops.push(Op::Neg);
            }
            Expr::Pow(a, k) => {
                a.emit(slot, ops);
                ops.push(Op::Pow(*k as i32));
            }
        }
    }
}

fn is_zero(e: &Expr) -> bool {
    matches!(e, Expr::Num(q) if q.is_zero())
}

fn is_one(e: &Expr) -> bool {
    matches!(e, Expr::Num(q) if q.is_one())
}

fn add(a: Expr, b: Expr) -> Expr {
    match (&a, &b) {
        _ if is_zero(&a) => b,
        _ if is_zero(&b) => a,
        (Expr::Num(x), Expr::Num(y)) => Expr::Num(x + y),
        _ => Expr::Add(Box::new(a), Box::new(b)),
    }
}

fn sub(a: Expr, b: Expr) -> Expr {
    match (&a, &b) {
        _ if is_zero(&b) => a,
        _ if is_zero(&a) => neg(b),
        (Expr::Num(x), Expr::Num(y)) => Expr::Num(x - y),
        _ => Expr::Sub(Box::new(a), Box::new(b)),
    }
}

fn mul(a: Expr, b: Expr) -> Expr {
    match (&a, &b) {
        _ if is_zero(&a) || is_zero(&b) => Expr::Num(Rational::zero()),
        _ if is_one(&a) => b,
        _ if is_one(&b) => a,
        (Expr::Num(x), Expr::Num(y)) => Expr::Num(x * y),
        _ => Expr::Mul(Box::new(a), Box::new(b)),
    }
}

fn neg(a: Expr) -> Expr {
    match a {
        Expr::Num(x) => Expr::Num(-x),
        Expr::Neg(inner) => *inner,
        other => Expr::Neg(Box::new(other)),
    }
}

fn pow(a: Expr, k: u32) -> Expr {
    match k {
        0 => Expr::Num(Rational::one()),
        1 => a,
        _ => Expr::Pow(Box::new(a), k),
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(q) => {
                if q.is_integer() {
                    write!(f, "{}", q.numer())
                } else {
                    write!(f, "({q})")
                }
            }
            Expr::Var(n) => write!(f, "{n}"),
            Expr::Add(a, b) => write!(f, "({a} + {b})"),
            Expr::Sub(a, b) => write!(f, "({a} - {b})"),
            Expr::Mul(a, b) => write!(f, "{a}*{b}"),
            Expr::Neg(a) => write!(f, "-({a})"),
            Expr::Pow(a, k) => write!(f, "({a})^{k}"),
            Expr::Sin(n) => write!(f, "sin({n})"),
            Expr::Cos(n) => write!(f, "cos({n})"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Op {
    Const(f64),
    Load(usize),
    Sin(usize),
    Cos(usize),
    Add,
    Sub,
    Mul,
    Neg,
    Pow(i32),
}

/// Compiled expression.
#[derive(Clone, Debug)]
pub struct Program {
    ops: Vec<Op>,
    max_depth: usize,
}

impl Program {
    pub fn eval(&self, values: &[f64]) -> f64 {
        let mut small = [0.0f64; 32];
        let mut heap;
        let stack: &mut [f64] = if self.max_depth <= small.len() {
            &mut small
        } else {
            heap = vec![0.0; self.max_depth];
            &mut heap
        };
        let mut sp = 0usize;
        for op in &self.ops {
            match *op {
                Op::Const(c) => {
                    stack[sp] = c;
                    sp += 1;
                }
                Op::Load(i) => {
                    stack[sp] = values[i];
                    sp += 1;
                }
                Op::Sin(i) => {
                    stack[sp] = values[i].sin();
                    sp += 1;
                }
                Op::Cos(i) => {
                    stack[sp] = values[i].cos();
                    sp += 1;
                }
                Op::Add => {
                    sp -= 1;
                    stack[sp - 1] += stack[sp];
                }
                Op::Sub => {
                    sp -= 1;
                    stack[sp - 1] -= stack[sp];
                }
                Op::Mul => {
                    sp -= 1;
                    stack[sp - 1] *= stack[sp];
                }
                Op::Neg => stack[sp - 1] = -stack[sp - 1],
                Op::Pow(k) => stack[sp - 1] = stack[sp - 1].powi(k),
            }
        }
        stack[0]
    }
}

#[cfg(test)]
mod tests {
    use crate::sysspec::parse::parse_expr;

    fn lookup(name: &str) -> f64 {
        match name {
            "x" => 0.7,
            "v" => 1.3,
            "theta" => 0.4,
            "w" => -0.2,
            _ => panic!("unknown {name}"),
        }
    }

    #[test]
    fn program_matches_tree_evaluation() {
        let e = parse_expr("x + v*cos(theta) - 0.5*(x - w)^3 * sin(theta) + -w").unwrap();
        let names = ["x", "v", "theta", "w"];
        let values: Vec<f64> = names.iter().map(|n| lookup(n)).collect();
        let prog = e.compile(&|n| names.iter().position(|m| *m == n).unwrap());
        assert!((prog.eval(&values) - e.eval(&lookup)).abs() < 1e-15);
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let e = parse_expr("x^3*v + v*sin(theta) - cos(theta)*x + 2").unwrap();
        for var in ["x", "v", "theta"] {
            let d = e.diff(var).eval(&lookup);
            let h = 1e-6;
            let shifted = |delta: f64| e.eval(&|n: &str| if n == var { lookup(n) + delta } else { lookup(n) });
            let fd = (shifted(h) - shifted(-h)) / (2.0 * h);
            assert!((d - fd).abs() < 1e-6, "{var}: {d} vs {fd}");
        }
    }

    #[test]
    fn signed_terms_flatten() {
        let e = parse_expr("theta + a - b - (c - d)").unwrap();
        let terms: Vec<(bool, String)> = e.signed_terms().iter().map(|(s, e)| (*s, e.to_string())).collect();
        assert_eq!(
            terms,
            vec![
                (true, "theta".into()),
                (true, "a".into()),
                (false, "b".into()),
                (false, "c".into()),
                (true, "d".into())
            ]
        );
    }
}
