//! System descriptions, the trigonometric change of variables, and the
//! dependence graph used to factor moments.

pub mod expr;
pub mod parse;

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::sync::Arc;

use crate::distmoments::Distribution;
use crate::error::{Error, Result};
use crate::polyring::{ambient, MultiIndex, Polynomial};
use crate::scalar::Rational;

pub use expr::Expr;
pub use parse::{parse_expr, parse_monomials, parse_spec};

/// An angle state and the names of its encoded cosine/sine variables.
#[derive(Clone, Debug, PartialEq)]
pub struct AngleDecl {
    pub name: String,
    pub cos_name: String,
    pub sin_name: String,
}

/// Parsed and validated system description.
#[derive(Clone, Debug)]
pub struct SystemSpec {
    pub state_vars: Vec<String>,
    pub angles: Vec<AngleDecl>,
    pub disturbance_vars: Vec<String>,
    /// One update per state variable, aligned with `state_vars`.
    pub updates: Vec<Expr>,
    pub independence: Vec<(Vec<String>, Vec<String>)>,
    /// Monomials over the encoded state variables.
    pub target_moments: Vec<Vec<(String, u32)>>,
    pub distributions: Vec<(String, Distribution<f64>)>,
    pub initial: Vec<(String, f64)>,
    /// Disturbances that enter through an angle increment or a sin/cos.
    pub angular_disturbances: BTreeSet<String>,
}

impl SystemSpec {
    pub fn parse(text: &str) -> Result<SystemSpec> {
        parse_spec(text)
    }

    pub fn is_angle(&self, name: &str) -> bool {
        self.angles.iter().any(|a| a.name == name)
    }

    pub fn angle(&self, name: &str) -> Option<&AngleDecl> {
        self.angles.iter().find(|a| a.name == name)
    }

    pub fn is_angular_disturbance(&self, name: &str) -> bool {
        self.angular_disturbances.contains(name)
    }

    pub fn update_of(&self, state: &str) -> Option<&Expr> {
        self.state_vars.iter().position(|s| s == state).map(|i| &self.updates[i])
    }

    pub fn distribution(&self, name: &str) -> Option<&Distribution<f64>> {
        self.distributions.iter().find(|(n, _)| n == name).map(|(_, d)| d)
    }

    /// Initial state in original coordinates; undeclared entries are zero.
    pub fn initial_state(&self) -> Vec<f64> {
        self.state_vars.iter().map(|s| self.initial.iter().find(|(n, _)| n == s).map_or(0.0, |(_, v)| *v)).collect()
    }
}

/// Links an angle to the positions of its encoded cosine and sine.
#[derive(Clone, Debug, PartialEq)]
pub struct TrigLink {
    pub angle: String,
    pub cos_index: usize,
    pub sin_index: usize,
}

/// How one original disturbance appears among the encoded disturbance variables.
#[derive(Clone, Debug, PartialEq)]
pub enum DistGroup {
    Plain { name: String, index: usize },
    Trig { name: String, cos_index: usize, sin_index: usize },
}

impl DistGroup {
    pub fn name(&self) -> &str {
        match self {
            DistGroup::Plain { name, .. } | DistGroup::Trig { name, .. } => name,
        }
    }
}

/// Undirected graph on state variables; an edge means "may be dependent".
#[derive(Clone, Debug, PartialEq)]
pub struct DependenceGraph {
    vertices: Vec<String>,
    adjacency: Vec<Vec<bool>>,
}

impl DependenceGraph {
    pub fn complete(vertices: Vec<String>) -> Self {
        let n = vertices.len();
        let adjacency = (0..n).map(|i| (0..n).map(|j| i != j).collect()).collect();
        DependenceGraph { vertices, adjacency }
    }

    pub fn edgeless(vertices: Vec<String>) -> Self {
        let n = vertices.len();
        DependenceGraph { vertices, adjacency: vec![vec![false; n]; n] }
    }

    pub fn vertices(&self) -> &[String] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn index(&self, name: &str) -> Option<usize> {
        self.vertices.iter().position(|v| v == name)
    }

    pub fn connect(&mut self, i: usize, j: usize) {
        if i != j {
            self.adjacency[i][j] = true;
            self.adjacency[j][i] = true;
        }
    }

    pub fn disconnect(&mut self, i: usize, j: usize) {
        self.adjacency[i][j] = false;
        self.adjacency[j][i] = false;
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.adjacency[i][j]
    }

    /// Edges `(i, j)` with `i < j`.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let n = self.len();
        (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).filter(|&(i, j)| self.adjacency[i][j]).collect()
    }

    /// Connected components of the subgraph induced by `subset`, each sorted,
    /// ordered by smallest member.
    pub fn components(&self, subset: &[usize]) -> Vec<Vec<usize>> {
        let inside: BTreeSet<usize> = subset.iter().copied().collect();
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for &start in &inside {
            if !seen.insert(start) {
                continue;
            }
            let mut comp = vec![start];
            let mut queue = VecDeque::from([start]);
            while let Some(u) = queue.pop_front() {
                for &v in &inside {
                    if self.adjacency[u][v] && seen.insert(v) {
                        comp.push(v);
                        queue.push_back(v);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }
}

/// Partitions the support of `beta_x` into connected components of `graph`,
/// returning one multi-index per block in graded-lex order. The blocks sum to
/// `beta_x`; the zero multi-index yields no blocks.
pub fn components_of_support(graph: &DependenceGraph, beta_x: &MultiIndex) -> Result<Vec<MultiIndex>> {
    if beta_x.len() != graph.len() {
        return Err(Error::LengthMismatch { expected: graph.len(), actual: beta_x.len() });
    }
    let support: Vec<usize> = beta_x.support().collect();
    let mut blocks: Vec<MultiIndex> = graph.components(&support).iter().map(|c| beta_x.restrict(c)).collect();
    blocks.sort();
    Ok(blocks)
}

/// The encoded, purely polynomial system `x' = f(x, w)`.
#[derive(Clone, Debug)]
pub struct PolynomialSystem {
    pub vars: Vec<String>,
    pub dist_vars: Vec<String>,
    /// Shared ambient list `vars ++ dist_vars`.
    pub ambient: Arc<[String]>,
    /// One component per entry of `vars`.
    pub f: Vec<Polynomial<Rational>>,
    pub graph: DependenceGraph,
    pub state_links: Vec<TrigLink>,
    pub dist_groups: Vec<DistGroup>,
    pub spec: SystemSpec,
}

impl PolynomialSystem {
    /// Builds a system directly from polynomial components (no angles, every
    /// disturbance plain, complete dependence graph unless replaced).
    pub fn from_polynomials(
        vars: Vec<String>,
        dist_vars: Vec<String>,
        f: Vec<Polynomial<Rational>>,
        spec: SystemSpec,
    ) -> Result<Self> {
        if f.len() != vars.len() {
            return Err(Error::LengthMismatch { expected: vars.len(), actual: f.len() });
        }
        let amb: Arc<[String]> = ambient(&vars.iter().chain(&dist_vars).collect::<Vec<_>>());
        for p in &f {
            if p.vars()[..] != amb[..] {
                return Err(Error::AmbientMismatch);
            }
        }
        let dist_groups =
            dist_vars.iter().enumerate().map(|(i, n)| DistGroup::Plain { name: n.clone(), index: i }).collect();
        Ok(PolynomialSystem {
            graph: DependenceGraph::complete(vars.clone()),
            vars,
            dist_vars,
            ambient: amb,
            f,
            state_links: Vec::new(),
            dist_groups,
            spec,
        })
    }

    pub fn nvars(&self) -> usize {
        self.vars.len()
    }

    pub fn ndist(&self) -> usize {
        self.dist_vars.len()
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v == name)
    }

    /// Multi-index over `vars` for a monomial given as `(name, exponent)` pairs.
    pub fn monomial(&self, factors: &[(String, u32)]) -> Result<MultiIndex> {
        let mut e = vec![0u32; self.nvars()];
        for (name, k) in factors {
            let i = self
                .var_index(name)
                .ok_or_else(|| Error::InvalidArgument(format!("`{name}` is not a state variable")))?;
            e[i] += k;
        }
        Ok(MultiIndex::new(e))
    }

    /// Parses monomials like `x^2 x*y` into multi-indices over `vars`.
    pub fn parse_moments(&self, text: &str) -> Result<Vec<MultiIndex>> {
        parse_monomials(text)?.iter().map(|m| self.monomial(m)).collect()
    }

    /// The `moments` line of the spec as multi-indices.
    pub fn target_moments(&self) -> Result<Vec<MultiIndex>> {
        self.spec.target_moments.iter().map(|m| self.monomial(m)).collect()
    }

    /// Maps an original-coordinate state to encoded coordinates.
    pub fn encode_state(&self, original: &[f64]) -> Result<Vec<f64>> {
        if original.len() != self.spec.state_vars.len() {
            return Err(Error::LengthMismatch { expected: self.spec.state_vars.len(), actual: original.len() });
        }
        let mut out = Vec::with_capacity(self.nvars());
        for (name, &value) in self.spec.state_vars.iter().zip(original) {
            if self.spec.is_angle(name) {
                out.push(value.cos());
                out.push(value.sin());
            } else {
                out.push(value);
            }
        }
        Ok(out)
    }
}

/// Rewrites angles as `(cos, sin)` pairs and angular disturbances as
/// `(cos w, sin w)` pairs, expanding angle increments with the sum formulas.
pub fn trig_encode(spec: &SystemSpec) -> Result<PolynomialSystem> {
    let mut vars = Vec::new();
    for s in &spec.state_vars {
        match spec.angle(s) {
            Some(a) => {
                vars.push(a.cos_name.clone());
                vars.push(a.sin_name.clone());
            }
            None => vars.push(s.clone()),
        }
    }
    let mut dist_vars = Vec::new();
    let mut dist_groups = Vec::new();
    for w in &spec.disturbance_vars {
        if spec.is_angular_disturbance(w) {
            dist_groups.push(DistGroup::Trig {
                name: w.clone(),
                cos_index: dist_vars.len(),
                sin_index: dist_vars.len() + 1,
            });
            dist_vars.push(format!("c_{w}"));
            dist_vars.push(format!("s_{w}"));
        } else {
            dist_groups.push(DistGroup::Plain { name: w.clone(), index: dist_vars.len() });
            dist_vars.push(w.clone());
        }
    }
    let all: Vec<&String> = vars.iter().chain(&dist_vars).collect();
    let amb = ambient(&all);
    let pos = |name: &str| all.iter().position(|v| *v == name).expect("encoded name exists");

    // Polynomial for a symbol used polynomially / inside cos / inside sin.
    let var_poly = |name: &str| -> Polynomial<Rational> { Polynomial::var(amb.clone(), pos(name)) };
    let trig_poly = |name: &str, want_sin: bool| -> Polynomial<Rational> {
        if let Some(a) = spec.angle(name) {
            var_poly(if want_sin { &a.sin_name } else { &a.cos_name })
        } else {
            var_poly(&format!("{}_{name}", if want_sin { "s" } else { "c" }))
        }
    };

    fn lower(
        e: &Expr,
        var_poly: &dyn Fn(&str) -> Polynomial<Rational>,
        trig_poly: &dyn Fn(&str, bool) -> Polynomial<Rational>,
        amb: &Arc<[String]>,
    ) -> Polynomial<Rational> {
        match e {
            Expr::Num(q) => Polynomial::constant(amb.clone(), q.clone()),
            Expr::Var(n) => var_poly(n),
            Expr::Sin(n) => trig_poly(n, true),
            Expr::Cos(n) => trig_poly(n, false),
            Expr::Add(a, b) => lower(a, var_poly, trig_poly, amb) + lower(b, var_poly, trig_poly, amb),
            Expr::Sub(a, b) => lower(a, var_poly, trig_poly, amb) - lower(b, var_poly, trig_poly, amb),
            Expr::Mul(a, b) => lower(a, var_poly, trig_poly, amb) * lower(b, var_poly, trig_poly, amb),
            Expr::Neg(a) => -lower(a, var_poly, trig_poly, amb),
            Expr::Pow(a, k) => lower(a, var_poly, trig_poly, amb).pow(*k),
        }
    }

    let mut f = Vec::with_capacity(vars.len());
    for (s, update) in spec.state_vars.iter().zip(&spec.updates) {
        match spec.angle(s) {
            None => f.push(lower(update, &var_poly, &trig_poly, &amb)),
            Some(a) => {
                // cos/sin of the increment, accumulated term by term.
                let mut cos_d = Polynomial::one(amb.clone());
                let mut sin_d = Polynomial::zero(amb.clone());
                for (positive, term) in update.signed_terms() {
                    let Expr::Var(w) = term else { unreachable!("validated angle increment") };
                    if w == s {
                        continue;
                    }
                    let cw = trig_poly(w, false);
                    let sw = if positive { trig_poly(w, true) } else { -trig_poly(w, true) };
                    let next_cos = &(&cos_d * &cw) - &(&sin_d * &sw);
                    let next_sin = &(&sin_d * &cw) + &(&cos_d * &sw);
                    cos_d = next_cos;
                    sin_d = next_sin;
                }
                let c = var_poly(&a.cos_name);
                let sn = var_poly(&a.sin_name);
                f.push(&(&c * &cos_d) - &(&sn * &sin_d));
                f.push(&(&sn * &cos_d) + &(&c * &sin_d));
            }
        }
    }

    let mut state_links = Vec::new();
    for a in &spec.angles {
        state_links.push(TrigLink { angle: a.name.clone(), cos_index: pos(&a.cos_name), sin_index: pos(&a.sin_name) });
    }

    let mut graph = DependenceGraph::complete(vars.clone());
    let expand = |names: &[String]| -> Vec<usize> {
        names
            .iter()
            .flat_map(|n| match spec.angle(n) {
                Some(a) => vec![pos(&a.cos_name), pos(&a.sin_name)],
                None => vec![pos(n)],
            })
            .collect()
    };
    for (a, b) in &spec.independence {
        for i in expand(a) {
            for j in expand(b) {
                graph.disconnect(i, j);
            }
        }
    }
    for link in &state_links {
        graph.connect(link.cos_index, link.sin_index);
    }

    Ok(PolynomialSystem { vars, dist_vars, ambient: amb, f, graph, state_links, dist_groups, spec: spec.clone() })
}

/// Severity of an independence diagnostic.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Severity {
    Warning,
    Error,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub message: String,
}

/// Transitive support of each state variable: every state variable and
/// disturbance its update reaches through the update chain.
fn transitive_supports(spec: &SystemSpec) -> BTreeMap<String, BTreeSet<String>> {
    let direct: BTreeMap<&String, BTreeSet<String>> =
        spec.state_vars.iter().zip(&spec.updates).map(|(s, e)| (s, e.symbols())).collect();
    let mut out = BTreeMap::new();
    for s in &spec.state_vars {
        let mut seen: BTreeSet<String> = BTreeSet::new();
        let mut stack = vec![s.clone()];
        while let Some(u) = stack.pop() {
            if let Some(refs) = direct.get(&u) {
                for r in refs {
                    if seen.insert(r.clone()) && direct.contains_key(r) {
                        stack.push(r.clone());
                    }
                }
            }
        }
        out.insert(s.clone(), seen);
    }
    out
}

/// Static check of declared independences: two variables declared independent
/// must not reach each other through their updates, nor share a disturbance.
pub fn validate_independence(spec: &SystemSpec) -> Vec<Diagnostic> {
    let supports = transitive_supports(spec);
    let is_dist = |n: &str| spec.disturbance_vars.iter().any(|d| d == n);
    let mut out = Vec::new();
    for (a_set, b_set) in &spec.independence {
        for a in a_set {
            for b in b_set {
                if a == b {
                    out.push(Diagnostic {
                        severity: Severity::Error,
                        message: format!("`{a}` declared independent of itself"),
                    });
                    continue;
                }
                let sa = &supports[a];
                let sb = &supports[b];
                if sa.contains(b) || sb.contains(a) {
                    out.push(Diagnostic {
                        severity: Severity::Error,
                        message: format!(
                            "`{a}` and `{b}` are declared independent but one's update depends on the other"
                        ),
                    });
                }
                let shared: Vec<&String> = sa.intersection(sb).filter(|n| is_dist(n)).collect();
                if !shared.is_empty() {
                    let names: Vec<&str> = shared.iter().map(|s| s.as_str()).collect();
                    out.push(Diagnostic {
                        severity: Severity::Error,
                        message: format!(
                            "`{a}` and `{b}` are declared independent but share disturbance(s) {}",
                            names.join(", ")
                        ),
                    });
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;
    use num_bigint::BigInt;

    fn q(n: i64) -> Rational {
        Rational::from_integer(BigInt::from(n))
    }

    #[test]
    fn parses_dubins() {
        let spec = parse_spec(presets::DUBINS).unwrap();
        assert_eq!(spec.state_vars, ["x", "y", "v", "theta"]);
        assert_eq!(spec.angles.len(), 1);
        assert_eq!(spec.disturbance_vars.len(), 2);
        assert!(spec.is_angular_disturbance("w_theta"));
        assert!(!spec.is_angular_disturbance("w_v"));
        assert_eq!(spec.target_moments.len(), 5);
    }

    #[test]
    fn parses_one_liner() {
        let spec = parse_spec("state x\ndisturbance w\ndyn x' = x + w\n").unwrap();
        assert_eq!(spec.state_vars.len(), 1);
        assert_eq!(spec.disturbance_vars.len(), 1);
    }

    #[test]
    fn rejects_multiplicative_angle_update() {
        let err = parse_spec("state theta\nangle theta\ndisturbance w\ndyn theta' = theta * w\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 4, .. }), "{err}");
    }

    #[test]
    fn rejects_bad_inputs_with_positions() {
        let cases = [
            ("state x\ndyn x' = x + y\n", 2, 14),
            ("state x\ndyn x' = x +\n", 2, 13),
            ("state x\ndisturbance w\ndyn x' = x + w + sin(w)\n", 3, 14),
            ("state x theta\nangle theta\ndyn x' = x + theta\ndyn theta' = theta\n", 3, 14),
            ("state x\ndyn x' = x $ 1\n", 2, 12),
            ("state x\nfoo x\n", 2, 1),
        ];
        for (text, line, col) in cases {
            match parse_spec(text) {
                Err(Error::Parse { line: l, col: c, message }) => {
                    assert_eq!((l, c), (line, col), "{text:?}: {message}");
                }
                other => panic!("{text:?}: expected parse error, got {other:?}"),
            }
        }
    }

    #[test]
    fn dubins_encoding_matches_sum_formulas() {
        let sys = presets::dubins_system().unwrap();
        assert_eq!(sys.vars, ["x", "y", "v", "c", "s"]);
        assert_eq!(sys.dist_vars, ["w_v", "c_w_theta", "s_w_theta"]);
        let amb = sys.ambient.clone();
        let v = |i| Polynomial::<Rational>::var(amb.clone(), i);
        let (x, y, sp, c, s, wv, cw, sw) = (v(0), v(1), v(2), v(3), v(4), v(5), v(6), v(7));
        assert_eq!(sys.f[0], &x + &(&sp * &c));
        assert_eq!(sys.f[1], &y + &(&sp * &s));
        assert_eq!(sys.f[2], &sp + &wv);
        assert_eq!(sys.f[3], &(&c * &cw) - &(&s * &sw));
        assert_eq!(sys.f[4], &(&s * &cw) + &(&c * &sw));

        // Preset graph: everything connected except v with c/s.
        let g = &sys.graph;
        let edges: Vec<(String, String)> =
            g.edges().iter().map(|&(i, j)| (sys.vars[i].clone(), sys.vars[j].clone())).collect();
        let expected = [("x", "y"), ("x", "v"), ("x", "c"), ("x", "s"), ("y", "v"), ("y", "c"), ("y", "s"), ("c", "s")];
        assert_eq!(edges.len(), expected.len());
        for (a, b) in expected {
            assert!(edges.contains(&(a.to_string(), b.to_string())), "{a}-{b}");
        }
    }

    #[test]
    fn no_angles_is_identity() {
        let spec = parse_spec("state x y\ndisturbance w\ndyn x' = x*y + 2*w\ndyn y' = y - 0.5\n").unwrap();
        let sys = trig_encode(&spec).unwrap();
        assert_eq!(sys.vars, ["x", "y"]);
        assert_eq!(sys.dist_vars, ["w"]);
        let amb = sys.ambient.clone();
        let v = |i| Polynomial::<Rational>::var(amb.clone(), i);
        assert_eq!(sys.f[0], &(&v(0) * &v(1)) + &v(2).scale(&q(2)));
        assert_eq!(sys.f[1], &v(1) - &Polynomial::constant(amb.clone(), Rational::new(1.into(), 2.into())));
    }

    #[test]
    fn two_angles_get_separate_pairs() {
        let text = "state a b\nangle a b\ndisturbance u w\ndyn a' = a + u\ndyn b' = b - w\nindependent {a} {b}\n";
        let sys = trig_encode(&parse_spec(text).unwrap()).unwrap();
        assert_eq!(sys.vars, ["c_a", "s_a", "c_b", "s_b"]);
        assert_eq!(sys.graph.edges(), vec![(0, 1), (2, 3)]);
        // b' = b - w: cos(b - w) = c_b c_w + s_b s_w
        let amb = sys.ambient.clone();
        let v = |i| Polynomial::<Rational>::var(amb.clone(), i);
        assert_eq!(sys.f[2], &(&v(2) * &v(6)) + &(&v(3) * &v(7)));
        assert!(validate_independence(&sys.spec).is_empty());
    }

    #[test]
    fn multi_disturbance_increment_expands() {
        let text = "state t\nangle t\ndisturbance a b\ndyn t' = t + a + b\n";
        let sys = trig_encode(&parse_spec(text).unwrap()).unwrap();
        // Numeric spot check: cos(t + a + b).
        let (t, a, b) = (0.3f64, -0.7f64, 1.1f64);
        let vals: Vec<Rational> = [t.cos(), t.sin(), a.cos(), a.sin(), b.cos(), b.sin()]
            .iter()
            .map(|x| Rational::from_float(*x).unwrap())
            .collect();
        use num_traits::ToPrimitive;
        let c = sys.f[0].eval(&vals).to_f64().unwrap();
        let s = sys.f[1].eval(&vals).to_f64().unwrap();
        assert!((c - (t + a + b).cos()).abs() < 1e-14);
        assert!((s - (t + a + b).sin()).abs() < 1e-14);
    }

    #[test]
    fn components_partition_support() {
        // Fig.-1-style graph: {1,2,3,4} connected, {5,6}, {7}, {8}.
        let names: Vec<String> = (1..=8).map(|i| format!("x{i}")).collect();
        let mut g = DependenceGraph::edgeless(names);
        for (i, j) in [(0, 1), (1, 2), (2, 3), (4, 5)] {
            g.connect(i, j);
        }
        let beta = MultiIndex::new(vec![1, 2, 1, 1, 1, 1, 3, 1]);
        let blocks = components_of_support(&g, &beta).unwrap();
        let mut expected = vec![
            MultiIndex::new(vec![1, 2, 1, 1, 0, 0, 0, 0]),
            MultiIndex::new(vec![0, 0, 0, 0, 1, 1, 0, 0]),
            MultiIndex::new(vec![0, 0, 0, 0, 0, 0, 3, 0]),
            MultiIndex::new(vec![0, 0, 0, 0, 0, 0, 0, 1]),
        ];
        expected.sort();
        assert_eq!(blocks, expected);
        let sum = blocks.iter().fold(MultiIndex::zeros(8), |acc, b| acc.plus(b));
        assert_eq!(sum, beta);

        let complete = DependenceGraph::complete(vec!["a".into(), "b".into(), "c".into()]);
        let beta = MultiIndex::new(vec![1, 1, 1]);
        assert_eq!(components_of_support(&complete, &beta).unwrap(), vec![beta.clone()]);

        let empty = DependenceGraph::edgeless(vec!["a".into(), "b".into(), "c".into()]);
        let beta = MultiIndex::new(vec![1, 1, 0]);
        assert_eq!(
            components_of_support(&empty, &beta).unwrap(),
            vec![MultiIndex::new(vec![0, 1, 0]), MultiIndex::new(vec![1, 0, 0])]
        );
        assert!(components_of_support(&empty, &MultiIndex::zeros(3)).unwrap().is_empty());
    }

    #[test]
    fn independence_diagnostics() {
        let spec = parse_spec(presets::DUBINS).unwrap();
        assert!(validate_independence(&spec).is_empty());

        let bad =
            parse_spec("state x y\ndisturbance w\ndyn x' = x + w\ndyn y' = y + w\nindependent {x} {y}\n").unwrap();
        let diags = validate_independence(&bad);
        assert_eq!(diags.len(), 1);
        assert_eq!(diags[0].severity, Severity::Error);

        let chained = parse_spec("state x y\ndyn x' = x + y\ndyn y' = y\nindependent {x} {y}\n").unwrap();
        assert_eq!(validate_independence(&chained).len(), 1);

        let none = parse_spec("state x\ndisturbance w\ndyn x' = x + w\n").unwrap();
        assert!(validate_independence(&none).is_empty());
    }

    #[test]
    fn encoded_system_tracks_original_sample_paths() {
        use rand::{Rng, SeedableRng};
        let sys = presets::dubins_system().unwrap();
        let spec = &sys.spec;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let mut orig = vec![0.5, -0.2, 0.8, 0.3];
        let mut enc: Vec<f64> = sys.encode_state(&orig).unwrap();
        let fs: Vec<Polynomial<f64>> =
            sys.f.iter().map(|p| p.map_coeffs(|c| num_traits::ToPrimitive::to_f64(c).unwrap())).collect();
        for _ in 0..500 {
            let wv: f64 = rng.random_range(-0.05..0.05);
            let wt: f64 = rng.random_range(-0.3..0.3);
            let lookup = |n: &str| match n {
                "w_v" => wv,
                "w_theta" => wt,
                other => orig[spec.state_vars.iter().position(|s| s == other).unwrap()],
            };
            let next: Vec<f64> = spec.updates.iter().map(|e| e.eval(&lookup)).collect();
            let mut point = enc.clone();
            point.extend([wv, wt.cos(), wt.sin()]);
            let next_enc: Vec<f64> = fs.iter().map(|p| p.eval(&point)).collect();
            for k in 0..3 {
                assert!((next[k] - next_enc[k]).abs() <= 1e-12 * (1.0 + next[k].abs()));
            }
            assert!((next_enc[3].powi(2) + next_enc[4].powi(2) - 1.0).abs() < 1e-12);
            // Keep both in lockstep; the pair drifts from cos/sin only by roundoff.
            orig = next;
            enc = next_enc;
            assert!((enc[3] - orig[3].cos()).abs() < 1e-9 && (enc[4] - orig[3].sin()).abs() < 1e-9);
        }
    }
}
