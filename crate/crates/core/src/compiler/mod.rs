//! Moment update forms and basis completion.
//!
//! For a system `x' = f(x, w)` and a multi-index `α`, expanding `f^α` and taking
//! expectations gives
//!
//! ```text
//! E[x'^α] = Σ c_β E[x^{β_x}] E[w^{β_w}]
//! ```
//!
//! because `x` and `w` are independent. The reduced form additionally splits
//! each `E[x^{β_x}]` into a product over the connected components of the
//! dependence graph. [`treering`] grows a seed basis until every state moment
//! referenced by a form is itself in the basis.

mod format;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::polyring::{pow_multiindex, Coefficient, MultiIndex};
use crate::scalar::{Rational, Scalar};
use crate::sysspec::{components_of_support, DependenceGraph, DistGroup, PolynomialSystem, TrigLink};

pub use format::FORMAT_HEADER;

/// One term `c_β · E[w^{β_w}] · Π E[x^{β_x^(i)}]`.
#[derive(Clone, Debug, PartialEq)]
pub struct MufTerm {
    pub coeff: Rational,
    pub beta_w: MultiIndex,
    /// State moment factors in graded-lex order; empty when `β_x = 0`.
    pub factors: Vec<MultiIndex>,
}

/// `E[x_{t+1}^α]` as a combination of current state and disturbance moments.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentUpdateForm {
    pub target: MultiIndex,
    pub terms: Vec<MufTerm>,
    pub reduced: bool,
}

impl MomentUpdateForm {
    /// Distinct state factors in graded-lex order.
    pub fn distinct_factors(&self) -> Vec<MultiIndex> {
        let set: BTreeSet<&MultiIndex> = self.terms.iter().flat_map(|t| &t.factors).collect();
        set.into_iter().cloned().collect()
    }

    /// Sums terms that share `(β_w, factors)` and drops zero coefficients.
    fn merge(mut self) -> Self {
        let mut merged: BTreeMap<(MultiIndex, Vec<MultiIndex>), Rational> = BTreeMap::new();
        let mut order = Vec::new();
        for t in self.terms.drain(..) {
            let key = (t.beta_w, t.factors);
            match merged.get_mut(&key) {
                Some(c) => *c += t.coeff,
                None => {
                    order.push(key.clone());
                    merged.insert(key, t.coeff);
                }
            }
        }
        self.terms = order
            .into_iter()
            .filter_map(|key| {
                let coeff = merged.remove(&key)?;
                (!coeff.is_zero()).then_some(MufTerm { coeff, beta_w: key.0, factors: key.1 })
            })
            .collect();
        self
    }

    /// Renders as `E[x^2]' = E[x^2] + 2 E[x*v*c] + ...`.
    pub fn render(&self, vars: &[String], dist_vars: &[String]) -> String {
        let mut out = format!("E[{}]' =", self.target.render(vars));
        if self.terms.is_empty() {
            out.push_str(" 0");
        }
        for (k, t) in self.terms.iter().enumerate() {
            let negative = t.coeff.is_negative();
            let mag = t.coeff.abs();
            out.push_str(match (k, negative) {
                (0, false) => " ",
                (0, true) => " -",
                (_, false) => " + ",
                (_, true) => " - ",
            });
            let mut parts = Vec::new();
            if !mag.is_one() || (t.factors.is_empty() && t.beta_w.is_zero()) {
                parts.push(mag.to_string());
            }
            if !t.beta_w.is_zero() {
                parts.push(format!("E[{}]", t.beta_w.render(dist_vars)));
            }
            for f in &t.factors {
                parts.push(format!("E[{}]", f.render(vars)));
            }
            out.push_str(&parts.join(" "));
        }
        out
    }
}

/// Un-reduced moment update form of `α`.
pub fn muf(system: &PolynomialSystem, alpha: &MultiIndex) -> Result<MomentUpdateForm> {
    if alpha.len() != system.nvars() {
        return Err(Error::LengthMismatch { expected: system.nvars(), actual: alpha.len() });
    }
    let expansion = pow_multiindex(&system.f, alpha)?;
    let n = system.nvars();
    let terms = expansion
        .terms()
        .map(|(mi, c)| {
            let (beta_x, beta_w) = mi.split_at(n);
            let factors = if beta_x.is_zero() { Vec::new() } else { vec![beta_x] };
            MufTerm { coeff: c.clone(), beta_w, factors }
        })
        .collect();
    Ok(MomentUpdateForm { target: alpha.clone(), terms, reduced: false })
}

/// Factors every state moment of `form` over the connected components of `graph`.
pub fn reduce(form: &MomentUpdateForm, graph: &DependenceGraph) -> Result<MomentUpdateForm> {
    let mut terms = Vec::with_capacity(form.terms.len());
    for t in &form.terms {
        let beta_x = t.factors.iter().fold(MultiIndex::zeros(graph.len()), |acc, f| acc.plus(f));
        let factors = components_of_support(graph, &beta_x)?;
        terms.push(MufTerm { coeff: t.coeff.clone(), beta_w: t.beta_w.clone(), factors });
    }
    Ok(MomentUpdateForm { target: form.target.clone(), terms, reduced: true }.merge())
}

/// Ordered set of distinct state multi-indices.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct MomentBasis {
    elements: Vec<MultiIndex>,
    lookup: HashMap<MultiIndex, usize>,
}

impl MomentBasis {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a basis, dropping repeated entries after their first occurrence.
    pub fn from_indices(indices: impl IntoIterator<Item = MultiIndex>) -> Self {
        let mut b = Self::new();
        for mi in indices {
            b.insert(mi);
        }
        b
    }

    /// Appends `mi` if absent; returns its position.
    pub fn insert(&mut self, mi: MultiIndex) -> usize {
        if let Some(&i) = self.lookup.get(&mi) {
            return i;
        }
        let i = self.elements.len();
        self.lookup.insert(mi.clone(), i);
        self.elements.push(mi);
        i
    }

    pub fn index(&self, mi: &MultiIndex) -> Option<usize> {
        self.lookup.get(mi).copied()
    }

    pub fn contains(&self, mi: &MultiIndex) -> bool {
        self.lookup.contains_key(mi)
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, MultiIndex> {
        self.elements.iter()
    }

    pub fn as_slice(&self) -> &[MultiIndex] {
        &self.elements
    }

    pub fn get(&self, i: usize) -> &MultiIndex {
        &self.elements[i]
    }
}

impl<'a> IntoIterator for &'a MomentBasis {
    type Item = &'a MultiIndex;
    type IntoIter = std::slice::Iter<'a, MultiIndex>;
    fn into_iter(self) -> Self::IntoIter {
        self.elements.iter()
    }
}

/// True iff every state factor of every form is in `basis`.
pub fn is_complete(basis: &MomentBasis, forms: &[MomentUpdateForm]) -> bool {
    forms.iter().flat_map(|f| &f.terms).flat_map(|t| &t.factors).all(|f| basis.contains(f))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CompileOptions {
    pub reduced: bool,
    pub max_basis: usize,
    pub max_degree: u32,
}

impl Default for CompileOptions {
    fn default() -> Self {
        CompileOptions { reduced: true, max_basis: 10_000, max_degree: 32 }
    }
}

impl CompileOptions {
    pub fn unreduced() -> Self {
        CompileOptions { reduced: false, ..Self::default() }
    }
}

/// A complete basis with one update form per element: the deterministic
/// recursion `x_{t+1}[A] = h(x_t[A], w_t moments)`.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentStateSystem {
    pub vars: Vec<String>,
    pub dist_vars: Vec<String>,
    pub dist_groups: Vec<DistGroup>,
    pub state_links: Vec<TrigLink>,
    pub basis: MomentBasis,
    /// Aligned with `basis`.
    pub forms: Vec<MomentUpdateForm>,
    pub reduced: bool,
}

/// Runs TreeRing with default guards.
pub fn treering(system: &PolynomialSystem, seed: &[MultiIndex], reduced: bool) -> Result<MomentStateSystem> {
    treering_with(system, seed, &CompileOptions { reduced, ..CompileOptions::default() })
}

/// Depth-first completion of `seed`. Children of a form are its distinct state
/// factors in graded-lex order; the basis lists elements in discovery order.
pub fn treering_with(
    system: &PolynomialSystem,
    seed: &[MultiIndex],
    opts: &CompileOptions,
) -> Result<MomentStateSystem> {
    if seed.is_empty() {
        return Err(Error::InvalidArgument("seed basis is empty".into()));
    }
    for mi in seed {
        if mi.len() != system.nvars() {
            return Err(Error::LengthMismatch { expected: system.nvars(), actual: mi.len() });
        }
        if mi.is_zero() {
            return Err(Error::InvalidArgument("seed contains the constant moment".into()));
        }
    }
    let mut basis = MomentBasis::new();
    let mut forms = Vec::new();
    let mut parent: Vec<Option<usize>> = Vec::new();
    let chain = |parent: &[Option<usize>], basis: &MomentBasis, mut at: Option<usize>, last: &MultiIndex| {
        let mut names = vec![last.render(&system.vars)];
        while let Some(i) = at {
            names.push(basis.get(i).render(&system.vars));
            at = parent[i];
        }
        names.reverse();
        names.join(" -> ")
    };

    // Explicit stack reproducing the recursive visit order.
    let mut stack: Vec<(MultiIndex, Option<usize>)> = seed.iter().rev().map(|m| (m.clone(), None)).collect();
    while let Some((alpha, from)) = stack.pop() {
        if basis.contains(&alpha) {
            continue;
        }
        if alpha.degree() > opts.max_degree {
            return Err(Error::BasisExplosion {
                reason: format!("moment degree {} exceeds {}", alpha.degree(), opts.max_degree),
                chain: chain(&parent, &basis, from, &alpha),
            });
        }
        if basis.len() >= opts.max_basis {
            return Err(Error::BasisExplosion {
                reason: format!("basis size exceeds {}", opts.max_basis),
                chain: chain(&parent, &basis, from, &alpha),
            });
        }
        let mut form = muf(system, &alpha)?;
        if opts.reduced {
            form = reduce(&form, &system.graph)?;
        }
        let children = form.distinct_factors();
        basis.insert(alpha);
        parent.push(from);
        let here = basis.len() - 1;
        forms.push(form);
        for child in children.into_iter().rev() {
            if !basis.contains(&child) {
                stack.push((child, Some(here)));
            }
        }
    }

    let out = MomentStateSystem {
        vars: system.vars.clone(),
        dist_vars: system.dist_vars.clone(),
        dist_groups: system.dist_groups.clone(),
        state_links: system.state_links.clone(),
        basis,
        forms,
        reduced: opts.reduced,
    };
    assert!(is_complete(&out.basis, &out.forms), "TreeRing produced an incomplete basis");
    Ok(out)
}

impl MomentStateSystem {
    /// Compiles the `moments` line of the system's spec.
    pub fn compile(system: &PolynomialSystem, opts: &CompileOptions) -> Result<Self> {
        let seed = system.target_moments()?;
        treering_with(system, &seed, opts)
    }

    pub fn len(&self) -> usize {
        self.basis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.basis.is_empty()
    }

    pub fn is_complete(&self) -> bool {
        is_complete(&self.basis, &self.forms)
    }

    pub fn term_count(&self) -> usize {
        self.forms.iter().map(|f| f.terms.len()).sum()
    }

    /// Every disturbance multi-index referenced by some form.
    pub fn dist_requirements(&self) -> BTreeSet<MultiIndex> {
        self.forms.iter().flat_map(|f| &f.terms).map(|t| t.beta_w.clone()).collect()
    }

    pub fn moment_name(&self, i: usize) -> String {
        self.basis.get(i).render(&self.vars)
    }

    pub fn moment_names(&self) -> Vec<String> {
        (0..self.len()).map(|i| self.moment_name(i)).collect()
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v == name)
    }

    /// Basis position of a monomial given by `(name, exponent)` pairs.
    pub fn moment_index(&self, factors: &[(&str, u32)]) -> Result<usize> {
        let mut e = vec![0; self.vars.len()];
        for &(name, k) in factors {
            let i = self.var_index(name).ok_or_else(|| Error::InvalidArgument(format!("unknown variable `{name}`")))?;
            e[i] += k;
        }
        let mi = MultiIndex::new(e);
        self.basis.index(&mi).ok_or_else(|| Error::MissingMoment(mi.render(&self.vars)))
    }

    /// One equation per basis element.
    pub fn equations(&self) -> String {
        let mut out = String::new();
        for f in &self.forms {
            let _ = writeln!(out, "{}", f.render(&self.vars, &self.dist_vars));
        }
        out
    }

    /// Applies the update once in any coefficient ring. `dist` returns
    /// `E[w^β_w]` and `coeff` converts the exact coefficients.
    pub fn apply<C: Coefficient>(
        &self,
        state: &[C],
        dist: impl Fn(&MultiIndex) -> C,
        coeff: impl Fn(&Rational) -> C,
    ) -> Result<Vec<C>> {
        if state.len() != self.len() {
            return Err(Error::LengthMismatch { expected: self.len(), actual: state.len() });
        }
        let mut out = Vec::with_capacity(self.len());
        for form in &self.forms {
            let mut acc = C::zero();
            for t in &form.terms {
                let mut v = coeff(&t.coeff) * dist(&t.beta_w);
                for f in &t.factors {
                    let i = self.basis.index(f).ok_or_else(|| Error::MissingMoment(f.render(&self.vars)))?;
                    v = v * state[i].clone();
                }
                acc = acc + v;
            }
            out.push(acc);
        }
        Ok(out)
    }

    /// For an un-reduced system, `(A, b)` with `m_{t+1} = A m_t + b` given the
    /// disturbance moments of the step.
    pub fn ltv_matrices<F: Scalar + nalgebra::RealField>(
        &self,
        dist_moments: &BTreeMap<MultiIndex, F>,
    ) -> Result<(DMatrix<F>, DVector<F>)> {
        if self.reduced {
            return Err(Error::ReducedSystem);
        }
        let n = self.len();
        let mut a = DMatrix::<F>::zeros(n, n);
        let mut b = DVector::<F>::zeros(n);
        for (row, form) in self.forms.iter().enumerate() {
            for t in &form.terms {
                let w = if t.beta_w.is_zero() {
                    F::one()
                } else {
                    *dist_moments
                        .get(&t.beta_w)
                        .ok_or_else(|| Error::MissingMoment(t.beta_w.render(&self.dist_vars)))?
                };
                let v = F::from_rational(&t.coeff) * w;
                match t.factors.as_slice() {
                    [] => b[row] += v,
                    [f] => {
                        let col = self.basis.index(f).ok_or_else(|| Error::MissingMoment(f.render(&self.vars)))?;
                        a[(row, col)] += v;
                    }
                    _ => return Err(Error::ReducedSystem),
                }
            }
        }
        Ok((a, b))
    }

    /// Serializes to the versioned text format.
    pub fn to_text(&self) -> String {
        format::write(self)
    }

    pub fn from_text(text: &str) -> Result<Self> {
        format::read(text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;
    use crate::sysspec::{parse_spec, trig_encode};
    use num_bigint::BigInt;

    fn q(n: i64) -> Rational {
        Rational::from_integer(BigInt::from(n))
    }

    fn system(text: &str) -> PolynomialSystem {
        trig_encode(&parse_spec(text).unwrap()).unwrap()
    }

    fn mono(sys: &MomentStateSystem, text: &str) -> MultiIndex {
        let mut e = vec![0; sys.vars.len()];
        for part in text.split('*') {
            let (name, k) = match part.split_once('^') {
                Some((n, k)) => (n, k.parse().unwrap()),
                None => (part, 1),
            };
            e[sys.var_index(name).unwrap()] += k;
        }
        MultiIndex::new(e)
    }

    fn basis_set(sys: &MomentStateSystem) -> BTreeSet<String> {
        sys.moment_names().into_iter().collect()
    }

    #[test]
    fn random_walk_muf() {
        let sys = system("state x\ndisturbance w\ndyn x' = x + w\n");
        let form = muf(&sys, &MultiIndex::new(vec![2])).unwrap();
        let rendered = form.render(&sys.vars, &sys.dist_vars);
        assert_eq!(rendered, "E[x^2]' = E[w^2] + 2 E[w] E[x] + E[x^2]");
        let zero = muf(&sys, &MultiIndex::new(vec![0])).unwrap();
        assert_eq!(zero.terms, vec![MufTerm { coeff: q(1), beta_w: MultiIndex::zeros(1), factors: vec![] }]);
    }

    #[test]
    fn dubins_x_squared_muf() {
        let sys = presets::dubins_system().unwrap();
        let alpha = sys.monomial(&[("x".into(), 2)]).unwrap();
        let form = muf(&sys, &alpha).unwrap();
        let mut got: Vec<(String, Rational)> =
            form.terms.iter().map(|t| (t.factors[0].render(&sys.vars), t.coeff.clone())).collect();
        got.sort();
        assert_eq!(got, vec![("v^2*c^2".into(), q(1)), ("x*v*c".into(), q(2)), ("x^2".into(), q(1))]);
        assert!(form.terms.iter().all(|t| t.beta_w.is_zero()));

        let reduced = reduce(&form, &sys.graph).unwrap();
        let vc = reduced.terms.iter().find(|t| t.factors.len() == 2).unwrap();
        let names: Vec<String> = vc.factors.iter().map(|f| f.render(&sys.vars)).collect();
        assert_eq!(names, ["c^2", "v^2"]);
        let xvc = reduced.terms.iter().find(|t| t.coeff == q(2)).unwrap();
        assert_eq!(xvc.factors.len(), 1);
    }

    #[test]
    fn reduce_on_complete_graph_is_identity() {
        let sys = system("state x y\ndisturbance w\ndyn x' = x*y + w\ndyn y' = y + x\n");
        let form = muf(&sys, &MultiIndex::new(vec![2, 1])).unwrap();
        let reduced = reduce(&form, &sys.graph).unwrap();
        assert_eq!(reduced.terms, form.terms);
    }

    #[test]
    fn dubins_reduced_completion() {
        let sys = presets::dubins_system().unwrap();
        let seed = sys.target_moments().unwrap();
        let compiled = treering(&sys, &seed, true).unwrap();
        let expected: BTreeSet<String> = [
            "x", "y", "x*y", "x^2", "y^2", "c", "s", "v", "v^2", "x*s", "y*s", "x*c", "y*c", "s^2", "c^2", "c*s",
            "x*v*s", "x*v*c", "y*v*s", "y*v*c",
        ]
        .iter()
        .map(|s| mono(&compiled, s).render(&compiled.vars))
        .collect();
        assert_eq!(basis_set(&compiled), expected);
        assert!(compiled.is_complete());
        // Seed comes first, in order.
        assert_eq!(&compiled.basis.as_slice()[..1], &seed[..1]);
    }

    #[test]
    fn dubins_unreduced_completion() {
        let sys = presets::dubins_system().unwrap();
        let seed = sys.target_moments().unwrap();
        let reduced = treering(&sys, &seed, true).unwrap();
        let full = treering(&sys, &seed, false).unwrap();
        let full_set = basis_set(&full);
        for m in ["s^2*v^2", "s^2*v", "c*s*v^2", "c^2*v", "c^2*v^2"] {
            assert!(full_set.contains(&mono(&full, m).render(&full.vars)), "{m}");
        }
        // Without factoring, v only ever appears next to c or s, so E[v] and
        // E[v^2] are never requested; E[vc] is needed directly by x' = x + vc.
        let expected: BTreeSet<String> = [
            "x", "y", "x*y", "x^2", "y^2", "c", "s", "x*s", "y*s", "x*c", "y*c", "s^2", "c^2", "c*s", "x*v*s", "x*v*c",
            "y*v*s", "y*v*c", "v*c", "v*s", "v*c^2", "v*s^2", "v*c*s", "v^2*c^2", "v^2*s^2", "v^2*c*s",
        ]
        .iter()
        .map(|s| mono(&full, s).render(&full.vars))
        .collect();
        assert_eq!(full_set, expected);
        let missing: Vec<String> = basis_set(&reduced).difference(&full_set).cloned().collect();
        assert_eq!(missing, ["v", "v^2"]);
        assert!(full.is_complete());
    }

    #[test]
    fn random_walk_completion() {
        let sys = system("state x\ndisturbance w\ndyn x' = x + w\n");
        let compiled = treering(&sys, &[MultiIndex::new(vec![2])], true).unwrap();
        assert_eq!(compiled.basis.as_slice(), &[MultiIndex::new(vec![2]), MultiIndex::new(vec![1])]);
    }

    #[test]
    fn completeness_checks() {
        let sys = system("state x\ndisturbance w\ndyn x' = x + w\n");
        let form = muf(&sys, &MultiIndex::new(vec![2])).unwrap();
        let basis = MomentBasis::from_indices([MultiIndex::new(vec![2])]);
        assert!(!is_complete(&basis, &[form]));
        assert!(is_complete(&MomentBasis::new(), &[]));
    }

    #[test]
    fn explosion_is_reported() {
        let sys = system("state x\ndisturbance w\ndyn x' = x^2 + w\n");
        let err = treering(&sys, &[MultiIndex::new(vec![1])], true).unwrap_err();
        match err {
            Error::BasisExplosion { chain, .. } => assert!(chain.starts_with("x -> x^2 -> x^4"), "{chain}"),
            other => panic!("{other:?}"),
        }
        let opts = CompileOptions { max_basis: 3, max_degree: 1000, reduced: true };
        assert!(matches!(treering_with(&sys, &[MultiIndex::new(vec![1])], &opts), Err(Error::BasisExplosion { .. })));
        assert!(treering(&sys, &[MultiIndex::new(vec![0])], true).is_err());
    }

    #[test]
    fn ltv_random_walk() {
        let sys = system("state x\ndisturbance w\ndyn x' = x + w\n");
        let compiled = treering(&sys, &[MultiIndex::new(vec![1]), MultiIndex::new(vec![2])], false).unwrap();
        let mut w = BTreeMap::new();
        w.insert(MultiIndex::new(vec![1]), 0.0);
        w.insert(MultiIndex::new(vec![2]), 0.25);
        let (a, b) = compiled.ltv_matrices::<f64>(&w).unwrap();
        assert_eq!(a, DMatrix::identity(2, 2));
        assert_eq!(b, DVector::from_vec(vec![0.0, 0.25]));

        let reduced = treering(&sys, &[MultiIndex::new(vec![1])], true).unwrap();
        assert!(matches!(reduced.ltv_matrices::<f64>(&w), Err(Error::ReducedSystem)));
    }

    #[test]
    fn ltv_linear_system_recovers_coefficients() {
        let sys = system("state x y\ndyn x' = 2*x - y\ndyn y' = 0.5*x + 3*y\n");
        let compiled = treering(&sys, &[MultiIndex::new(vec![1, 0]), MultiIndex::new(vec![0, 1])], false).unwrap();
        let (a, b) = compiled.ltv_matrices::<f64>(&BTreeMap::new()).unwrap();
        assert_eq!(a, DMatrix::from_row_slice(2, 2, &[2.0, -1.0, 0.5, 3.0]));
        assert_eq!(b, DVector::zeros(2));
    }

    #[test]
    fn deterministic_step_is_exact() {
        let sys = presets::dubins_system().unwrap();
        let compiled = MomentStateSystem::compile(&sys, &CompileOptions::default()).unwrap();
        // Rational point with c^2 + s^2 = 1: (3/5, 4/5).
        let point = [
            q(1),
            q(-2),
            Rational::new(3.into(), 2.into()),
            Rational::new(3.into(), 5.into()),
            Rational::new(4.into(), 5.into()),
        ];
        let w = [
            Rational::new(1.into(), 10.into()),
            Rational::new(5.into(), 13.into()),
            Rational::new(12.into(), 13.into()),
        ];
        let state: Vec<Rational> = compiled.basis.iter().map(|m| m.eval(&point)).collect();
        let next = compiled.apply(&state, |b| b.eval(&w), |c| c.clone()).unwrap();
        let mut full = point.to_vec();
        full.extend(w.iter().cloned());
        let next_point: Vec<Rational> = sys.f.iter().map(|p| p.eval(&full)).collect();
        for (m, v) in compiled.basis.iter().zip(&next) {
            assert_eq!(&m.eval(&next_point), v);
        }
    }

    #[test]
    fn text_round_trip() {
        for reduced in [true, false] {
            let sys = presets::dubins_system().unwrap();
            let compiled =
                MomentStateSystem::compile(&sys, &CompileOptions { reduced, ..CompileOptions::default() }).unwrap();
            let text = compiled.to_text();
            let back = MomentStateSystem::from_text(&text).unwrap();
            assert_eq!(back, compiled);
            assert_eq!(back.to_text(), text);
        }
    }

    #[test]
    fn equations_listing_has_one_line_per_moment() {
        let sys = presets::dubins_system().unwrap();
        let compiled = MomentStateSystem::compile(&sys, &CompileOptions::default()).unwrap();
        let eqs = compiled.equations();
        assert_eq!(eqs.lines().count(), 20);
        assert!(eqs.lines().next().unwrap().starts_with("E[x]' ="));
    }
}
