//! Line-oriented reader for system descriptions.
//!
//! ```text
//! # Dubins car
//! state x y v theta
//! angle theta(c, s)
//! disturbance w_v w_theta
//! dyn x' = x + v*cos(theta)
//! dyn y' = y + v*sin(theta)
//! dyn v' = v + w_v
//! dyn theta' = theta + w_theta
//! independent {v} {theta}
//! moments x y x*y x^2 y^2
//! dist w_v = beta(10, 1000)
//! dist w_theta = gaussian(0.04, 0.03)
//! init v = 1
//! ```

use std::collections::BTreeMap;

use crate::distmoments::Distribution;
use crate::error::{Error, Result};
use crate::scalar::{parse_decimal, Rational};

use super::expr::Expr;
use super::{AngleDecl, SystemSpec};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Number(String),
    Sym(char),
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    col: usize,
}

fn perr(line: usize, col: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, col, message: message.into() }
}

fn lex(line_no: usize, text: &str) -> Result<Vec<Token>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Token { tok: Tok::Ident(chars[start..i].iter().collect()), col });
        } else if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
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
            out.push(Token { tok: Tok::Number(chars[start..i].iter().collect()), col });
        } else if "+-*^()'={},".contains(c) {
            out.push(Token { tok: Tok::Sym(c), col });
            i += 1;
        } else {
            return Err(perr(line_no, col, format!("unexpected character `{c}`")));
        }
    }
    Ok(out)
}

struct Cursor<'a> {
    toks: &'a [Token],
    pos: usize,
    line: usize,
    end_col: usize,
}

impl<'a> Cursor<'a> {
    fn new(toks: &'a [Token], line: usize, end_col: usize) -> Self {
        Cursor { toks, pos: 0, line, end_col }
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn col(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end_col, |t| t.col)
    }

    fn err(&self, message: impl Into<String>) -> Error {
        perr(self.line, self.col(), message)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|t| t.tok.clone());
        self.pos += 1;
        t
    }

    fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Sym(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.err(format!("expected `{c}`")))
        }
    }

    fn ident(&mut self) -> Result<(String, usize)> {
        let col = self.col();
        match self.next() {
            Some(Tok::Ident(s)) => Ok((s, col)),
            _ => Err(perr(self.line, col, "expected identifier")),
        }
    }

    fn uint(&mut self) -> Result<u32> {
        let col = self.col();
        match self.next() {
            Some(Tok::Number(s)) => s.parse::<u32>().map_err(|_| perr(self.line, col, "expected non-negative integer")),
            _ => Err(perr(self.line, col, "expected non-negative integer")),
        }
    }

    fn signed_number(&mut self) -> Result<Rational> {
        let neg = self.eat('-');
        let col = self.col();
        match self.next() {
            Some(Tok::Number(s)) => {
                let q = parse_decimal(&s).ok_or_else(|| perr(self.line, col, format!("bad number `{s}`")))?;
                Ok(if neg { -q } else { q })
            }
            _ => Err(perr(self.line, col, "expected number")),
        }
    }

    fn finish(&self) -> Result<()> {
        if self.at_end() {
            Ok(())
        } else {
            Err(self.err("unexpected trailing input"))
        }
    }
}

/// Symbol reference with its source position.
#[derive(Clone, Debug)]
pub(crate) struct SymRef {
    pub name: String,
    pub col: usize,
}

struct ExprParser<'c, 'a> {
    cur: &'c mut Cursor<'a>,
    refs: Vec<SymRef>,
}

impl ExprParser<'_, '_> {
    // expr ::= term (('+'|'-') term)*
    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            if self.cur.eat('+') {
                lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.cur.eat('-') {
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    // term ::= factor ('*' factor)*
    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.factor()?;
        while self.cur.eat('*') {
            lhs = Expr::Mul(Box::new(lhs), Box::new(self.factor()?));
        }
        Ok(lhs)
    }

    // factor ::= '-' factor | base ('^' uint)?
    fn factor(&mut self) -> Result<Expr> {
        if self.cur.eat('-') {
            return Ok(Expr::Neg(Box::new(self.factor()?)));
        }
        let base = self.base()?;
        if self.cur.eat('^') {
            let k = self.cur.uint()?;
            Ok(Expr::Pow(Box::new(base), k))
        } else {
            Ok(base)
        }
    }

    fn base(&mut self) -> Result<Expr> {
        let col = self.cur.col();
        match self.cur.next() {
            Some(Tok::Number(s)) => {
                parse_decimal(&s).map(Expr::Num).ok_or_else(|| perr(self.cur.line, col, format!("bad number `{s}`")))
            }
            Some(Tok::Ident(name)) if name == "sin" || name == "cos" => {
                self.cur.expect('(')?;
                let (arg, arg_col) = self.cur.ident()?;
                self.cur.expect(')')?;
                self.refs.push(SymRef { name: arg.clone(), col: arg_col });
                Ok(if name == "sin" { Expr::Sin(arg) } else { Expr::Cos(arg) })
            }
            Some(Tok::Ident(name)) => {
                self.refs.push(SymRef { name: name.clone(), col });
                Ok(Expr::Var(name))
            }
            Some(Tok::Sym('(')) => {
                let e = self.expr()?;
                self.cur.expect(')')?;
                Ok(e)
            }
            _ => Err(perr(self.cur.line, col, "expected number, identifier, sin(..), cos(..) or `(`")),
        }
    }
}

/// Parses a standalone expression (line 1).
pub fn parse_expr(text: &str) -> Result<Expr> {
    let toks = lex(1, text)?;
    let mut cur = Cursor::new(&toks, 1, text.chars().count() + 1);
    let mut p = ExprParser { cur: &mut cur, refs: Vec::new() };
    let e = p.expr()?;
    cur.finish()?;
    Ok(e)
}

/// Parses a whitespace-separated list of monomials such as `x^2 x*y`.
pub fn parse_monomials(text: &str) -> Result<Vec<Vec<(String, u32)>>> {
    let toks = lex(1, text)?;
    let mut cur = Cursor::new(&toks, 1, text.chars().count() + 1);
    let list = monomial_list(&mut cur)?;
    Ok(list.into_iter().map(|m| m.into_iter().map(|(n, e, _)| (n, e)).collect()).collect())
}

type RawMonomial = Vec<(String, u32, usize)>;
/// A name with its column.
type Located = (String, usize);

fn monomial_list(cur: &mut Cursor<'_>) -> Result<Vec<RawMonomial>> {
    let mut out = Vec::new();
    while !cur.at_end() {
        let mut mono = Vec::new();
        loop {
            let (name, col) = cur.ident()?;
            let exp = if cur.eat('^') { cur.uint()? } else { 1 };
            mono.push((name, exp, col));
            if !cur.eat('*') {
                break;
            }
        }
        out.push(mono);
    }
    Ok(out)
}

pub(crate) struct DynLine {
    pub line: usize,
    pub col: usize,
    pub target: String,
    pub expr: Expr,
    pub refs: Vec<SymRef>,
}

/// Parses and validates a full system description.
pub fn parse_spec(text: &str) -> Result<SystemSpec> {
    let mut state: Vec<(String, usize, usize)> = Vec::new();
    let mut angles: Vec<(AngleDecl, usize, usize)> = Vec::new();
    let mut disturbances: Vec<(String, usize, usize)> = Vec::new();
    let mut dyns: Vec<DynLine> = Vec::new();
    let mut independence: Vec<(Vec<Located>, Vec<Located>, usize)> = Vec::new();
    let mut moments: Vec<(RawMonomial, usize)> = Vec::new();
    let mut dists: Vec<(String, Distribution<f64>, usize, usize)> = Vec::new();
    let mut inits: Vec<(String, f64, usize, usize)> = Vec::new();

    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let content = match raw_line.find('#') {
            Some(p) => &raw_line[..p],
            None => raw_line,
        };
        let toks = lex(line_no, content)?;
        if toks.is_empty() {
            continue;
        }
        let mut cur = Cursor::new(&toks, line_no, content.chars().count() + 1);
        let (keyword, kw_col) = cur.ident()?;
        match keyword.as_str() {
            "state" | "disturbance" => {
                let target = if keyword == "state" { &mut state } else { &mut disturbances };
                while !cur.at_end() {
                    let (name, col) = cur.ident()?;
                    target.push((name, line_no, col));
                }
            }
            "angle" => {
                while !cur.at_end() {
                    let (name, col) = cur.ident()?;
                    let (cos_name, sin_name) = if cur.eat('(') {
                        let (c, _) = cur.ident()?;
                        cur.expect(',')?;
                        let (s, _) = cur.ident()?;
                        cur.expect(')')?;
                        (c, s)
                    } else {
                        (format!("c_{name}"), format!("s_{name}"))
                    };
                    angles.push((AngleDecl { name, cos_name, sin_name }, line_no, col));
                }
            }
            "dyn" => {
                let (target, col) = cur.ident()?;
                cur.expect('\'')?;
                cur.expect('=')?;
                let mut p = ExprParser { cur: &mut cur, refs: Vec::new() };
                let expr = p.expr()?;
                let refs = std::mem::take(&mut p.refs);
                cur.finish()?;
                dyns.push(DynLine { line: line_no, col, target, expr, refs });
            }
            "independent" => {
                let mut sets = Vec::new();
                for _ in 0..2 {
                    cur.expect('{')?;
                    let mut names = Vec::new();
                    while !cur.eat('}') {
                        if cur.at_end() {
                            return Err(cur.err("unterminated `{`"));
                        }
                        if cur.eat(',') {
                            continue;
                        }
                        let (n, c) = cur.ident()?;
                        names.push((n, c));
                    }
                    sets.push(names);
                }
                cur.finish()?;
                let b = sets.pop().unwrap_or_default();
                let a = sets.pop().unwrap_or_default();
                independence.push((a, b, line_no));
            }
            "moments" => {
                for m in monomial_list(&mut cur)? {
                    moments.push((m, line_no));
                }
            }
            "dist" => {
                let (name, col) = cur.ident()?;
                cur.expect('=')?;
                let kind_col = cur.col();
                let (kind, _) = cur.ident()?;
                cur.expect('(')?;
                let mut params = Vec::new();
                loop {
                    use num_traits::ToPrimitive;
                    params.push(cur.signed_number()?.to_f64().unwrap_or(f64::NAN));
                    if !cur.eat(',') {
                        break;
                    }
                }
                cur.expect(')')?;
                cur.finish()?;
                let arity = |n: usize| -> Result<()> {
                    if params.len() == n {
                        Ok(())
                    } else {
                        Err(perr(line_no, kind_col, format!("`{kind}` takes {n} parameter(s)")))
                    }
                };
                let dist = match kind.as_str() {
                    "gaussian" | "normal" => {
                        arity(2)?;
                        Distribution::gaussian(params[0], params[1])
                    }
                    "uniform" => {
                        arity(2)?;
                        Distribution::uniform(params[0], params[1])
                    }
                    "beta" => {
                        arity(2)?;
                        Distribution::beta(params[0], params[1])
                    }
                    "degenerate" => {
                        arity(1)?;
                        Ok(Distribution::Degenerate(params[0]))
                    }
                    other => return Err(perr(line_no, kind_col, format!("unknown distribution `{other}`"))),
                }
                .map_err(|e| perr(line_no, kind_col, e.to_string()))?;
                dists.push((name, dist, line_no, col));
            }
            "init" => {
                let (name, col) = cur.ident()?;
                cur.expect('=')?;
                use num_traits::ToPrimitive;
                let value = cur.signed_number()?.to_f64().unwrap_or(f64::NAN);
                cur.finish()?;
                inits.push((name, value, line_no, col));
            }
            other => return Err(perr(line_no, kw_col, format!("unknown directive `{other}`"))),
        }
    }

    // Declarations.
    let mut kinds: BTreeMap<String, &'static str> = BTreeMap::new();
    for (name, line, col) in &state {
        if kinds.insert(name.clone(), "state").is_some() {
            return Err(perr(*line, *col, format!("`{name}` declared twice")));
        }
    }
    for (name, line, col) in &disturbances {
        if kinds.insert(name.clone(), "disturbance").is_some() {
            return Err(perr(*line, *col, format!("`{name}` declared twice")));
        }
    }
    if state.is_empty() {
        return Err(Error::InvalidSpec("no state variables declared".into()));
    }
    for (a, line, col) in &angles {
        if kinds.get(&a.name) != Some(&"state") {
            return Err(perr(*line, *col, format!("angle `{}` is not a declared state variable", a.name)));
        }
        if angles.iter().filter(|(b, _, _)| b.name == a.name).count() > 1 {
            return Err(perr(*line, *col, format!("angle `{}` declared twice", a.name)));
        }
    }

    // Updates, in state order.
    let mut updates = Vec::with_capacity(state.len());
    for d in &dyns {
        if kinds.get(&d.target) != Some(&"state") {
            return Err(perr(d.line, d.col, format!("`{}` is not a state variable", d.target)));
        }
        for r in &d.refs {
            if !kinds.contains_key(&r.name) {
                return Err(perr(d.line, r.col, format!("undeclared symbol `{}`", r.name)));
            }
        }
    }
    for (name, line, col) in &state {
        let mut it = dyns.iter().filter(|d| &d.target == name);
        let d = it.next().ok_or_else(|| perr(*line, *col, format!("no `dyn` line for `{name}`")))?;
        if let Some(dup) = it.next() {
            return Err(perr(dup.line, dup.col, format!("second `dyn` line for `{name}`")));
        }
        updates.push(d);
    }

    let angle_names: Vec<&str> = angles.iter().map(|(a, _, _)| a.name.as_str()).collect();
    let is_angle = |n: &str| angle_names.contains(&n);
    let is_dist = |n: &str| kinds.get(n) == Some(&"disturbance");

    // Angle updates must read `theta + (±w)*`.
    let mut angular: BTreeMap<String, (usize, usize)> = BTreeMap::new();
    for d in &updates {
        if !is_angle(&d.target) {
            continue;
        }
        let terms = d.expr.signed_terms();
        let mut self_count = 0;
        for (positive, term) in &terms {
            match term {
                Expr::Var(n) if n == &d.target && *positive => self_count += 1,
                Expr::Var(n) if is_dist(n) => {
                    let col = d.refs.iter().find(|r| &r.name == n).map_or(d.col, |r| r.col);
                    angular.entry(n.clone()).or_insert((d.line, col));
                }
                _ => {
                    return Err(perr(
                        d.line,
                        d.col,
                        format!("angle update must have the form {0}' = {0} + <sum of disturbances>", d.target),
                    ))
                }
            }
        }
        if self_count != 1 {
            return Err(perr(
                d.line,
                d.col,
                format!("angle update must have the form {0}' = {0} + <sum of disturbances>", d.target),
            ));
        }
        let mut seen = std::collections::BTreeSet::new();
        for (_, term) in &terms {
            if let Expr::Var(n) = term {
                if n != &d.target && !seen.insert(n.clone()) {
                    return Err(perr(d.line, d.col, format!("disturbance `{n}` repeated in angle increment")));
                }
            }
        }
    }

    // Non-angle updates: angles only inside sin/cos, sin/cos only of angles or disturbances.
    let mut polynomial_dist: BTreeMap<String, (usize, usize)> = BTreeMap::new();
    for d in &updates {
        if is_angle(&d.target) {
            continue;
        }
        for n in d.expr.trig_symbols() {
            let col = d.refs.iter().find(|r| r.name == n).map_or(d.col, |r| r.col);
            if is_dist(&n) {
                angular.entry(n.clone()).or_insert((d.line, col));
            } else if !is_angle(&n) {
                return Err(perr(d.line, col, format!("sin/cos of `{n}`, which is not an angle or disturbance")));
            }
        }
        for n in d.expr.polynomial_symbols() {
            let col = d.refs.iter().find(|r| r.name == n).map_or(d.col, |r| r.col);
            if is_angle(&n) {
                return Err(perr(d.line, col, format!("angle `{n}` may only appear inside sin/cos")));
            }
            if is_dist(&n) {
                polynomial_dist.entry(n.clone()).or_insert((d.line, col));
            }
        }
    }
    for (n, (line, col)) in &polynomial_dist {
        if angular.contains_key(n) {
            return Err(perr(
                *line,
                *col,
                format!("disturbance `{n}` is used both polynomially and trigonometrically"),
            ));
        }
    }

    let state_names: Vec<String> = state.iter().map(|(n, _, _)| n.clone()).collect();
    let check_state = |n: &str, line: usize, col: usize| -> Result<()> {
        if kinds.get(n) == Some(&"state") {
            Ok(())
        } else {
            Err(perr(line, col, format!("`{n}` is not a state variable")))
        }
    };

    let mut indep = Vec::new();
    for (a, b, line) in &independence {
        for (n, c) in a.iter().chain(b) {
            check_state(n, *line, *c)?;
        }
        indep.push((a.iter().map(|(n, _)| n.clone()).collect(), b.iter().map(|(n, _)| n.clone()).collect()));
    }

    let encoded_names: Vec<String> = state_names
        .iter()
        .flat_map(|n| match angles.iter().find(|(a, _, _)| &a.name == n) {
            Some((a, _, _)) => vec![a.cos_name.clone(), a.sin_name.clone()],
            None => vec![n.clone()],
        })
        .collect();
    let mut target_moments = Vec::new();
    for (m, line) in &moments {
        for (n, _, col) in m {
            if !encoded_names.contains(n) {
                let hint = if is_angle(n) { " (use its cos/sin names)" } else { "" };
                return Err(perr(*line, *col, format!("`{n}` is not a moment variable{hint}")));
            }
        }
        target_moments.push(m.iter().map(|(n, e, _)| (n.clone(), *e)).collect());
    }

    let mut distributions: Vec<(String, Distribution<f64>)> = Vec::new();
    for (name, dist, line, col) in dists {
        if !is_dist(&name) {
            return Err(perr(line, col, format!("`{name}` is not a disturbance")));
        }
        if distributions.iter().any(|(n, _)| n == &name) {
            return Err(perr(line, col, format!("second `dist` line for `{name}`")));
        }
        distributions.push((name, dist));
    }

    let mut initial: Vec<(String, f64)> = Vec::new();
    for (name, value, line, col) in inits {
        check_state(&name, line, col)?;
        initial.push((name, value));
    }

    Ok(SystemSpec {
        state_vars: state_names,
        angles: angles.into_iter().map(|(a, _, _)| a).collect(),
        disturbance_vars: disturbances.into_iter().map(|(n, _, _)| n).collect(),
        updates: updates.iter().map(|d| d.expr.clone()).collect(),
        independence: indep,
        target_moments,
        distributions,
        initial,
        angular_disturbances: angular.into_keys().collect(),
    })
}
