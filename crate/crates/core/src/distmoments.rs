//! Raw and trigonometric moments of disturbance distributions.
//!
//! Trigonometric moments `E[cos^m X sin^n X]` go through one route only: the
//! product `(z + 1/z)^m (z - 1/z)^n / (i^n 2^(m+n))` is expanded as a Laurent
//! polynomial in `z = e^{iX}` with exact Gaussian-integer coefficients, and each
//! power `z^k` is replaced by the characteristic function at `k`.

use std::collections::HashMap;

use num_complex::Complex;
use parking_lot::RwLock;
use rand::Rng;
use rand_distr::{Beta, Distribution as _, Normal, Uniform};

use crate::error::{Error, Result};
use crate::polyring::MultiIndex;
use crate::scalar::Scalar;
use crate::sysspec::DistGroup;

/// Disturbance distribution, parameters in natural units.
#[derive(Clone, Debug, PartialEq)]
pub enum Distribution<F> {
    Degenerate(F),
    Gaussian { mean: F, variance: F },
    Uniform { lower: F, upper: F },
    Beta { a: F, b: F },
}

impl<F: Scalar> Distribution<F> {
    pub fn gaussian(mean: F, variance: F) -> Result<Self> {
        if !(variance >= F::zero()) || !mean.is_finite() || !variance.is_finite() {
            return Err(Error::InvalidDistribution(format!("gaussian needs finite variance >= 0, got {variance}")));
        }
        Ok(Distribution::Gaussian { mean, variance })
    }

    pub fn uniform(lower: F, upper: F) -> Result<Self> {
        if !(lower < upper) || !lower.is_finite() || !upper.is_finite() {
            return Err(Error::InvalidDistribution(format!("uniform needs lower < upper, got ({lower}, {upper})")));
        }
        Ok(Distribution::Uniform { lower, upper })
    }

    pub fn beta(a: F, b: F) -> Result<Self> {
        if !(a > F::zero() && b > F::zero()) || !a.is_finite() || !b.is_finite() {
            return Err(Error::InvalidDistribution(format!("beta needs a, b > 0, got ({a}, {b})")));
        }
        Ok(Distribution::Beta { a, b })
    }

    pub fn mean(&self) -> F {
        match *self {
            Distribution::Degenerate(v) => v,
            Distribution::Gaussian { mean, .. } => mean,
            Distribution::Uniform { lower, upper } => (lower + upper) / F::of(2.0),
            Distribution::Beta { a, b } => a / (a + b),
        }
    }

    pub fn variance(&self) -> F {
        match *self {
            Distribution::Degenerate(_) => F::zero(),
            Distribution::Gaussian { variance, .. } => variance,
            Distribution::Uniform { lower, upper } => (upper - lower).powi(2) / F::of(12.0),
            Distribution::Beta { a, b } => a * b / ((a + b).powi(2) * (a + b + F::one())),
        }
    }

    pub fn cast<G: Scalar>(&self) -> Distribution<G> {
        let c = |v: F| G::of(v.as_f64());
        match *self {
            Distribution::Degenerate(v) => Distribution::Degenerate(c(v)),
            Distribution::Gaussian { mean, variance } => {
                Distribution::Gaussian { mean: c(mean), variance: c(variance) }
            }
            Distribution::Uniform { lower, upper } => Distribution::Uniform { lower: c(lower), upper: c(upper) },
            Distribution::Beta { a, b } => Distribution::Beta { a: c(a), b: c(b) },
        }
    }
}

/// Characteristic function of `X + shift` at integer `t`.
pub fn char_fn<F: Scalar>(dist: &Distribution<F>, shift: F, t: i64) -> Result<Complex<F>> {
    let tf = F::of(t as f64);
    let rotate = |phase: F| Complex::new(phase.cos(), phase.sin());
    let base = match *dist {
        Distribution::Degenerate(v) => rotate(tf * v),
        Distribution::Gaussian { mean, variance } => rotate(tf * mean) * (-variance * tf * tf / F::of(2.0)).exp(),
        Distribution::Uniform { lower, upper } => {
            if t == 0 {
                Complex::new(F::one(), F::zero())
            } else {
                // (e^{itb} - e^{ita}) / (it(b - a)), written around the midpoint so the
                // narrow-interval limit stays accurate: e^{itm} sin(th)/th, th = t(b-a)/2.
                let mid = (lower + upper) / F::of(2.0);
                let half = tf * (upper - lower) / F::of(2.0);
                rotate(tf * mid) * (half.sin() / half)
            }
        }
        Distribution::Beta { .. } => {
            return Err(Error::Unsupported("trigonometric moments of beta-distributed disturbances".into()))
        }
    };
    Ok(base * rotate(tf * shift))
}

/// Laurent expansion of `(z + 1/z)^m (z - 1/z)^n / i^n` as `(power, coefficient)`
/// pairs; divide by `2^(m+n)` to get the trigonometric product.
pub fn trig_laurent(m: u32, n: u32) -> Result<Vec<(i64, Complex<i128>)>> {
    if m + n > 120 {
        return Err(Error::Unsupported(format!("trigonometric moment order {} too large", m + n)));
    }
    // Coefficients indexed by power + (m + n).
    let width = 2 * (m + n) as usize + 1;
    let offset = (m + n) as i64;
    let mut coeffs = vec![0i128; width];
    coeffs[offset as usize] = 1;
    let mut apply = |sign: i128| {
        let mut next = vec![0i128; width];
        for (k, &c) in coeffs.iter().enumerate() {
            if c != 0 {
                next[k + 1] += c;
                next[k - 1] += sign * c;
            }
        }
        coeffs = next;
    };
    for _ in 0..m {
        apply(1);
    }
    for _ in 0..n {
        apply(-1);
    }
    // 1 / i^n = (-i)^n
    let unit = match n % 4 {
        0 => Complex::new(1i128, 0),
        1 => Complex::new(0, -1),
        2 => Complex::new(-1, 0),
        _ => Complex::new(0, 1),
    };
    Ok(coeffs.iter().enumerate().filter(|(_, &c)| c != 0).map(|(k, &c)| (k as i64 - offset, unit * c)).collect())
}

/// `E[cos^m(X + shift) sin^n(X + shift)]`.
pub fn trig_moment<F: Scalar>(dist: &Distribution<F>, shift: F, m: u32, n: u32) -> Result<F> {
    if let Distribution::Beta { .. } = dist {
        return Err(Error::Unsupported("trigonometric moments of beta-distributed disturbances".into()));
    }
    if m + n == 0 {
        return Ok(F::one());
    }
    if let Distribution::Degenerate(v) = *dist {
        let a = v + shift;
        return Ok(a.cos().powi(m as i32) * a.sin().powi(n as i32));
    }
    let mut acc = Complex::new(F::zero(), F::zero());
    for (power, coeff) in trig_laurent(m, n)? {
        let phi = char_fn(dist, shift, power)?;
        let c = Complex::new(F::of(coeff.re as f64), F::of(coeff.im as f64));
        acc += c * phi;
    }
    let scale = F::of(2f64.powi((m + n) as i32));
    let value = acc / scale;
    debug_assert!(
        value.im.abs().as_f64() <= 1e-12f64.max(64.0 * F::epsilon().as_f64()),
        "imaginary residue {}",
        value.im
    );
    Ok(value.re)
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn double_factorial_odd(j: u32) -> f64 {
    // (2j - 1)!!
    (1..=j).fold(1.0, |acc, i| acc * (2 * i - 1) as f64)
}

/// `E[(X + shift)^k]`.
pub fn raw_moment<F: Scalar>(dist: &Distribution<F>, shift: F, k: u32) -> F {
    if k == 0 {
        return F::one();
    }
    match *dist {
        Distribution::Degenerate(v) => (v + shift).powi(k as i32),
        Distribution::Gaussian { mean, variance } => {
            let mu = mean + shift;
            let mut acc = F::zero();
            for j in 0..=k / 2 {
                let central = variance.powi(j as i32) * F::of(double_factorial_odd(j));
                acc += F::of(binomial(k, 2 * j)) * mu.powi((k - 2 * j) as i32) * central;
            }
            acc
        }
        Distribution::Uniform { lower, upper } => {
            let (a, b) = (lower + shift, upper + shift);
            // (b^{k+1} - a^{k+1}) / ((k+1)(b-a)) = mean of a^i b^{k-i}
            let mut acc = F::zero();
            for i in 0..=k {
                acc += a.powi(i as i32) * b.powi((k - i) as i32);
            }
            acc / F::of((k + 1) as f64)
        }
        Distribution::Beta { a, b } => {
            let mut acc = F::zero();
            let mut raw = F::one(); // E[X^j]
            for j in 0..=k {
                if j > 0 {
                    let r = F::of((j - 1) as f64);
                    raw = raw * (a + r) / (a + b + r);
                }
                acc += F::of(binomial(k, j)) * raw * shift.powi((k - j) as i32);
            }
            acc
        }
    }
}

/// Sampler for one distribution, built once.
#[derive(Clone, Debug)]
pub enum Sampler {
    Degenerate(f64),
    Gaussian(Normal<f64>),
    Uniform(Uniform<f64>),
    Beta(Beta<f64>),
}

impl Sampler {
    pub fn new(dist: &Distribution<f64>) -> Result<Self> {
        let bad = |e: String| Error::InvalidDistribution(e);
        Ok(match *dist {
            Distribution::Degenerate(v) => Sampler::Degenerate(v),
            Distribution::Gaussian { mean, variance: 0.0 } => Sampler::Degenerate(mean),
            Distribution::Gaussian { mean, variance } => {
                Sampler::Gaussian(Normal::new(mean, variance.sqrt()).map_err(|e| bad(e.to_string()))?)
            }
            Distribution::Uniform { lower, upper } => {
                Sampler::Uniform(Uniform::new(lower, upper).map_err(|e| bad(e.to_string()))?)
            }
            Distribution::Beta { a, b } => Sampler::Beta(Beta::new(a, b).map_err(|e| bad(e.to_string()))?),
        })
    }

    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            Sampler::Degenerate(v) => *v,
            Sampler::Gaussian(d) => d.sample(rng),
            Sampler::Uniform(d) => d.sample(rng),
            Sampler::Beta(d) => d.sample(rng),
        }
    }
}

/// One disturbance: distribution plus per-step control shift.
#[derive(Clone, Debug, PartialEq)]
pub struct DisturbanceEntry<F> {
    pub name: String,
    pub dist: Distribution<F>,
    /// Shift added at step `t`; an empty schedule means zero shift at every step.
    pub shifts: Vec<F>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum Query {
    Raw(u32),
    Trig(u32, u32),
}

/// Disturbance distributions with shift schedules. Components are mutually
/// independent and independent across time.
#[derive(Debug)]
pub struct DisturbanceModel<F> {
    entries: Vec<DisturbanceEntry<F>>,
    cache: RwLock<HashMap<(usize, u64, Query), F>>,
}

impl<F: Clone> Clone for DisturbanceModel<F> {
    fn clone(&self) -> Self {
        DisturbanceModel { entries: self.entries.clone(), cache: RwLock::new(HashMap::new()) }
    }
}

impl<F: Scalar> DisturbanceModel<F> {
    pub fn new(entries: Vec<DisturbanceEntry<F>>) -> Self {
        DisturbanceModel { entries, cache: RwLock::new(HashMap::new()) }
    }

    /// Stationary model (no shifts) from `(name, distribution)` pairs.
    pub fn stationary(dists: impl IntoIterator<Item = (String, Distribution<F>)>) -> Self {
        Self::new(dists.into_iter().map(|(name, dist)| DisturbanceEntry { name, dist, shifts: Vec::new() }).collect())
    }

    /// Stationary model from the `dist` lines of a spec.
    pub fn from_spec(spec: &crate::sysspec::SystemSpec) -> Result<Self> {
        let mut entries = Vec::new();
        for name in &spec.disturbance_vars {
            let dist = spec.distribution(name).ok_or_else(|| Error::MissingDisturbance(name.clone()))?;
            entries.push(DisturbanceEntry { name: name.clone(), dist: dist.cast(), shifts: Vec::new() });
        }
        Ok(Self::new(entries))
    }

    pub fn entries(&self) -> &[DisturbanceEntry<F>] {
        &self.entries
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.entries.iter().position(|e| e.name == name)
    }

    pub fn entry(&self, name: &str) -> Option<&DisturbanceEntry<F>> {
        self.entries.iter().find(|e| e.name == name)
    }

    /// Replaces the shift schedule of `name`.
    pub fn set_shifts(&mut self, name: &str, shifts: Vec<F>) -> Result<()> {
        let i = self.position(name).ok_or_else(|| Error::MissingDisturbance(name.to_string()))?;
        self.entries[i].shifts = shifts;
        Ok(())
    }

    /// Copy with a different schedule for `name` and empty schedules elsewhere.
    pub fn with_shifts(&self, name: &str, shifts: Vec<F>) -> Result<Self> {
        let mut entries = self.entries.clone();
        for e in &mut entries {
            e.shifts.clear();
        }
        let mut model = Self::new(entries);
        model.set_shifts(name, shifts)?;
        Ok(model)
    }

    /// Steps covered by every non-empty schedule (`None` if all are empty).
    pub fn horizon(&self) -> Option<usize> {
        self.entries.iter().filter(|e| !e.shifts.is_empty()).map(|e| e.shifts.len()).min()
    }

    pub fn is_stationary(&self) -> bool {
        self.entries.iter().all(|e| e.shifts.iter().all(|s| *s == e.shifts.first().copied().unwrap_or(F::zero())))
    }

    pub fn shift(&self, index: usize, t: usize) -> Result<F> {
        let e = &self.entries[index];
        if e.shifts.is_empty() {
            Ok(F::zero())
        } else {
            e.shifts.get(t).copied().ok_or_else(|| Error::ScheduleTooShort {
                name: e.name.clone(),
                len: e.shifts.len(),
                step: t,
            })
        }
    }

    /// Current shift of every entry at step `t`.
    pub fn shifts_at(&self, t: usize) -> Result<Vec<F>> {
        (0..self.entries.len()).map(|i| self.shift(i, t)).collect()
    }

    fn cached(&self, index: usize, shift: F, query: Query) -> Result<F> {
        let key = (index, shift.as_f64().to_bits(), query);
        if let Some(v) = self.cache.read().get(&key) {
            return Ok(*v);
        }
        let dist = &self.entries[index].dist;
        let value = match query {
            Query::Raw(k) => raw_moment(dist, shift, k),
            Query::Trig(m, n) => trig_moment(dist, shift, m, n)?,
        };
        self.cache.write().insert(key, value);
        Ok(value)
    }

    /// Resolves encoded disturbance groups against this model's entries.
    pub fn bind(&self, groups: &[DistGroup]) -> Result<Vec<usize>> {
        groups
            .iter()
            .map(|g| self.position(g.name()).ok_or_else(|| Error::MissingDisturbance(g.name().to_string())))
            .collect()
    }

    /// `E[w_t^beta_w]` for a multi-index over the encoded disturbance variables.
    pub fn dist_moment(&self, groups: &[DistGroup], beta_w: &MultiIndex, t: usize) -> Result<F> {
        let binding = self.bind(groups)?;
        let shifts = self.shifts_at(t)?;
        self.dist_moment_bound(groups, &binding, &shifts, beta_w)
    }

    /// As [`dist_moment`](Self::dist_moment) with a precomputed binding and shifts.
    pub fn dist_moment_bound(
        &self,
        groups: &[DistGroup],
        binding: &[usize],
        shifts: &[F],
        beta_w: &MultiIndex,
    ) -> Result<F> {
        let mut acc = F::one();
        for (g, &entry) in groups.iter().zip(binding) {
            let shift = shifts[entry];
            match *g {
                DistGroup::Plain { index, .. } => {
                    let k = beta_w.get(index);
                    if k > 0 {
                        acc *= self.cached(entry, shift, Query::Raw(k))?;
                    }
                }
                DistGroup::Trig { cos_index, sin_index, .. } => {
                    let (m, n) = (beta_w.get(cos_index), beta_w.get(sin_index));
                    if m + n > 0 {
                        acc *= self.cached(entry, shift, Query::Trig(m, n))?;
                    }
                }
            }
        }
        Ok(acc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn char_fn_examples() {
        let th: f64 = 0.7;
        let phi = char_fn(&Distribution::Degenerate(th), 0.0, 1).unwrap();
        assert!((phi.re - th.cos()).abs() < 1e-15 && (phi.im - th.sin()).abs() < 1e-15);

        let s2: f64 = 0.3;
        let phi = char_fn(&Distribution::gaussian(0.0, s2).unwrap(), 0.0, 1).unwrap();
        assert!((phi.re - (-s2 / 2.0).exp()).abs() < 1e-15 && phi.im.abs() < 1e-15);

        // gaussian(mu, s2) shifted by u at t = 2: e^{2i(mu+u)} e^{-2 s2}
        let (mu, u): (f64, f64) = (0.04, 0.5);
        let phi = char_fn(&Distribution::gaussian(mu, s2).unwrap(), u, 2).unwrap();
        let expected = Complex::new((2.0 * (mu + u)).cos(), (2.0 * (mu + u)).sin()) * (-2.0 * s2).exp();
        assert!((phi - expected).norm() < 1e-15);

        let uni = Distribution::uniform(-1.0, 2.0).unwrap();
        assert_eq!(char_fn(&uni, 0.0, 0).unwrap(), Complex::new(1.0, 0.0));
        let direct = (Complex::new(0.0, 6.0f64).exp() - Complex::new(0.0, -3.0f64).exp()) / Complex::new(0.0, 9.0);
        let phi = char_fn(&uni, 0.0, 3).unwrap();
        assert!((phi - direct).norm() < 1e-14);

        assert!(matches!(char_fn(&Distribution::beta(2.0, 3.0).unwrap(), 0.0, 1), Err(Error::Unsupported(_))));
    }

    #[test]
    fn laurent_expansion_small_cases() {
        // cos^2 = (z^2 + 2 + z^-2)/4
        let l = trig_laurent(2, 0).unwrap();
        assert_eq!(l, vec![(-2, Complex::new(1, 0)), (0, Complex::new(2, 0)), (2, Complex::new(1, 0))]);
        // sin = (z - 1/z)/(2i) -> coefficients (-i)(z - 1/z) = -i z + i/z
        let l = trig_laurent(0, 1).unwrap();
        assert_eq!(l, vec![(-1, Complex::new(0, 1)), (1, Complex::new(0, -1))]);
    }

    #[test]
    fn trig_moment_examples() {
        let g = Distribution::<f64>::gaussian(0.0, 0.2).unwrap();
        assert!(trig_moment(&g, 0.0, 0, 1).unwrap().abs() < 1e-16);

        let th: f64 = 1.1;
        let d = Distribution::Degenerate(th);
        for (m, n) in [(1, 0), (0, 1), (2, 3), (4, 1)] {
            let expected = th.cos().powi(m) * th.sin().powi(n);
            assert!((trig_moment(&d, 0.0, m as u32, n as u32).unwrap() - expected).abs() < 1e-15);
        }

        // gaussian cos*sin = 1/2 e^{-2 s2} sin(2 mu)
        let (mu, s2): (f64, f64) = (0.04, 0.03);
        let g = Distribution::gaussian(mu, s2).unwrap();
        let expected = 0.5 * (-2.0 * s2).exp() * (2.0 * mu).sin();
        assert!((trig_moment(&g, 0.0, 1, 1).unwrap() - expected).abs() < 1e-15);
    }

    #[test]
    fn pythagoras_and_bounds() {
        let dists = [
            Distribution::gaussian(0.04, 0.03).unwrap(),
            Distribution::gaussian(-1.0, 1.0).unwrap(),
            Distribution::uniform(0.0, PI).unwrap(),
            Distribution::uniform(0.95, 1.05).unwrap(),
            Distribution::Degenerate(2.0),
        ];
        for d in &dists {
            for shift in [0.0, 0.3, -2.0] {
                let c2 = trig_moment(d, shift, 2, 0).unwrap();
                let s2 = trig_moment(d, shift, 0, 2).unwrap();
                assert!((c2 + s2 - 1.0).abs() < 1e-12);
                for m in 0..4 {
                    for n in 0..4 {
                        assert!(trig_moment(d, shift, m, n).unwrap().abs() <= 1.0 + 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn raw_moment_examples() {
        let beta = Distribution::<f64>::beta(10.0, 1000.0).unwrap();
        assert!((raw_moment(&beta, 0.0, 1) - 10.0 / 1010.0).abs() < 1e-16);
        assert_eq!(raw_moment(&beta, 0.3, 0), 1.0);
        let g = Distribution::<f64>::gaussian(0.0, 2.5).unwrap();
        assert!((raw_moment(&g, 0.0, 2) - 2.5).abs() < 1e-15);
        assert!((raw_moment(&g, 0.0, 4) - 3.0 * 2.5 * 2.5).abs() < 1e-12);
        let u = Distribution::<f64>::uniform(-1.0, 3.0).unwrap();
        assert!((raw_moment(&u, 0.0, 2) - (27.0 + 1.0) / 12.0).abs() < 1e-15);
    }

    #[test]
    fn shift_recombination() {
        let dists = [
            Distribution::gaussian(0.3, 0.7).unwrap(),
            Distribution::uniform(-0.5, 2.0).unwrap(),
            Distribution::beta(2.0, 5.0).unwrap(),
            Distribution::Degenerate(-1.2),
        ];
        for d in &dists {
            for u in [0.0, 0.25, -1.5] {
                for k in 0..8u32 {
                    let direct = raw_moment(d, u, k);
                    let recombined: f64 =
                        (0..=k).map(|j| binomial(k, j) * raw_moment(d, 0.0, j) * u.powi((k - j) as i32)).sum();
                    assert!((direct - recombined).abs() <= 1e-12 * direct.abs().max(1.0), "{d:?} {u} {k}");
                }
            }
        }
    }

    #[test]
    fn dist_moment_products() {
        let groups = vec![
            DistGroup::Trig { name: "w_theta".into(), cos_index: 0, sin_index: 1 },
            DistGroup::Plain { name: "w_v".into(), index: 2 },
        ];
        let ang = Distribution::<f64>::gaussian(0.04, 0.03).unwrap();
        let spd = Distribution::beta(10.0, 1000.0).unwrap();
        let model =
            DisturbanceModel::stationary([("w_v".to_string(), spd.clone()), ("w_theta".to_string(), ang.clone())]);
        let beta = MultiIndex::new(vec![2, 0, 1]);
        let value = model.dist_moment(&groups, &beta, 0).unwrap();
        let expected = trig_moment(&ang, 0.0, 2, 0).unwrap() * raw_moment(&spd, 0.0, 1);
        assert!((value - expected).abs() < 1e-16);
        assert_eq!(model.dist_moment(&groups, &MultiIndex::zeros(3), 5).unwrap(), 1.0);

        let det = DisturbanceModel::stationary([
            ("w_v".to_string(), Distribution::Degenerate(0.5)),
            ("w_theta".to_string(), Distribution::Degenerate(0.2)),
        ]);
        let beta = MultiIndex::new(vec![1, 2, 3]);
        let expected = 0.2f64.cos() * 0.2f64.sin().powi(2) * 0.5f64.powi(3);
        assert!((det.dist_moment(&groups, &beta, 0).unwrap() - expected).abs() < 1e-16);

        let missing = DisturbanceModel::stationary([("w_v".to_string(), spd)]);
        assert!(matches!(missing.dist_moment(&groups, &beta, 0), Err(Error::MissingDisturbance(_))));
    }

    #[test]
    fn shifts_enter_moments() {
        let groups = vec![DistGroup::Trig { name: "w".into(), cos_index: 0, sin_index: 1 }];
        let mut model = DisturbanceModel::stationary([("w".to_string(), Distribution::gaussian(0.0, 0.01).unwrap())]);
        model.set_shifts("w", vec![0.0, 0.5]).unwrap();
        let b = MultiIndex::new(vec![0, 1]);
        let e1 = model.dist_moment(&groups, &b, 1).unwrap();
        assert!((e1 - 0.5f64.sin() * (-0.005f64).exp()).abs() < 1e-15);
        assert!(matches!(model.dist_moment(&groups, &b, 2), Err(Error::ScheduleTooShort { .. })));
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(Distribution::gaussian(0.0, -1.0).is_err());
        assert!(Distribution::uniform(1.0, 1.0).is_err());
        assert!(Distribution::beta(0.0, 1.0).is_err());
        assert!(trig_moment(&Distribution::beta(1.0, 1.0).unwrap(), 0.0, 1, 0).is_err());
    }
}
