//! Floating-point evaluation of compiled moment systems.

use std::io::{self, Write};
use std::sync::Arc;

use crate::compiler::{MomentBasis, MomentStateSystem};
use crate::distmoments::DisturbanceModel;
use crate::error::{Error, Result};
use crate::polyring::MultiIndex;
use crate::scalar::Scalar;

/// Moment values at one time step, aligned with the basis.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentState<F> {
    pub time: usize,
    pub values: Vec<F>,
}

/// Mean and covariance of a pair of state variables.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeanCov<F> {
    pub mean: [F; 2],
    pub cov: [[F; 2]; 2],
}

/// Moment states for `t = 0..=T`.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentTrajectory<F> {
    pub vars: Arc<[String]>,
    pub basis: Arc<MomentBasis>,
    pub states: Vec<MomentState<F>>,
}

impl<F: Scalar> MomentTrajectory<F> {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Number of steps taken (`len - 1`).
    pub fn horizon(&self) -> usize {
        self.states.len().saturating_sub(1)
    }

    pub fn last(&self) -> &MomentState<F> {
        self.states.last().expect("trajectory holds at least the initial state")
    }

    pub fn moment_names(&self) -> Vec<String> {
        self.basis.iter().map(|m| m.render(&self.vars)).collect()
    }

    fn lookup(&self, factors: &[(usize, u32)]) -> Result<usize> {
        let mut e = vec![0; self.vars.len()];
        for &(i, k) in factors {
            e[i] += k;
        }
        let mi = MultiIndex::new(e);
        self.basis.index(&mi).ok_or_else(|| Error::MissingMoment(mi.render(&self.vars)))
    }

    fn var(&self, name: &str) -> Result<usize> {
        self.vars
            .iter()
            .position(|v| v == name)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown variable `{name}`")))
    }

    /// Series of a single moment given by `(name, exponent)` pairs.
    pub fn series(&self, factors: &[(&str, u32)]) -> Result<Vec<F>> {
        let idx: Vec<(usize, u32)> = factors.iter().map(|&(n, k)| Ok((self.var(n)?, k))).collect::<Result<_>>()?;
        let i = self.lookup(&idx)?;
        Ok(self.states.iter().map(|s| s.values[i]).collect())
    }

    /// Mean vector and covariance of `(a, b)` at every step.
    pub fn mean_cov(&self, a: &str, b: &str) -> Result<Vec<MeanCov<F>>> {
        let (ia, ib) = (self.var(a)?, self.var(b)?);
        let ma = self.lookup(&[(ia, 1)])?;
        let mb = self.lookup(&[(ib, 1)])?;
        let maa = self.lookup(&[(ia, 2)])?;
        let mbb = self.lookup(&[(ib, 2)])?;
        let mab = self.lookup(&[(ia, 1), (ib, 1)])?;
        Ok(self
            .states
            .iter()
            .map(|s| {
                let v = &s.values;
                let (ea, eb) = (v[ma], v[mb]);
                let cross = v[mab] - ea * eb;
                MeanCov { mean: [ea, eb], cov: [[v[maa] - ea * ea, cross], [cross, v[mbb] - eb * eb]] }
            })
            .collect())
    }

    /// CSV with header `t,<moment>...`, one row per step.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        write!(out, "t")?;
        for n in self.moment_names() {
            write!(out, ",{n}")?;
        }
        writeln!(out)?;
        for s in &self.states {
            write!(out, "{}", s.time)?;
            for v in &s.values {
                write!(out, ",{v}")?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

/// Flattened, floating-point form of a [`MomentStateSystem`].
#[derive(Clone, Debug)]
pub struct Propagator<F> {
    system: Arc<MomentStateSystem>,
    vars: Arc<[String]>,
    basis: Arc<MomentBasis>,
    /// Distinct disturbance multi-indices; terms refer to them by slot.
    betas: Vec<MultiIndex>,
    row_start: Vec<usize>,
    coeff: Vec<F>,
    dist_slot: Vec<usize>,
    factor_start: Vec<usize>,
    factor_idx: Vec<usize>,
}

impl<F: Scalar> Propagator<F> {
    pub fn new(system: impl Into<Arc<MomentStateSystem>>) -> Result<Self> {
        let system: Arc<MomentStateSystem> = system.into();
        let mut betas: Vec<MultiIndex> = Vec::new();
        let mut row_start = vec![0];
        let (mut coeff, mut dist_slot, mut factor_start, mut factor_idx) = (vec![], vec![], vec![0], vec![]);
        for form in &system.forms {
            for t in &form.terms {
                let slot = match betas.iter().position(|b| *b == t.beta_w) {
                    Some(s) => s,
                    None => {
                        betas.push(t.beta_w.clone());
                        betas.len() - 1
                    }
                };
                coeff.push(F::from_rational(&t.coeff));
                dist_slot.push(slot);
                for f in &t.factors {
                    factor_idx.push(system.basis.index(f).ok_or_else(|| Error::MissingMoment(f.render(&system.vars)))?);
                }
                factor_start.push(factor_idx.len());
            }
            row_start.push(coeff.len());
        }
        Ok(Propagator {
            vars: system.vars.clone().into(),
            basis: Arc::new(system.basis.clone()),
            system,
            betas,
            row_start,
            coeff,
            dist_slot,
            factor_start,
            factor_idx,
        })
    }

    pub fn moment_name(&self, i: usize) -> String {
        self.basis.get(i).render(&self.vars)
    }

    pub fn system(&self) -> &MomentStateSystem {
        &self.system
    }

    pub fn len(&self) -> usize {
        self.basis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.basis.is_empty()
    }

    /// Moments of a point mass at `x0` (encoded coordinates).
    pub fn init_deterministic(&self, x0: &[F]) -> Result<MomentState<F>> {
        if x0.len() != self.vars.len() {
            return Err(Error::LengthMismatch { expected: self.vars.len(), actual: x0.len() });
        }
        for link in &self.system.state_links {
            let (c, s) = (x0[link.cos_index], x0[link.sin_index]);
            let norm = c * c + s * s;
            if (norm - F::one()).abs().as_f64() > 1e-9 {
                return Err(Error::InconsistentTrigPair {
                    cos_var: self.vars[link.cos_index].clone(),
                    sin_var: self.vars[link.sin_index].clone(),
                    norm: norm.as_f64(),
                });
            }
        }
        let values = self
            .basis
            .iter()
            .map(|m| m.as_slice().iter().zip(x0).fold(F::one(), |acc, (&e, &x)| acc * x.powi(e as i32)))
            .collect();
        Ok(MomentState { time: 0, values })
    }

    /// Wraps raw moment values as a state at time 0.
    pub fn state_from_values(&self, values: Vec<F>) -> Result<MomentState<F>> {
        if values.len() != self.len() {
            return Err(Error::LengthMismatch { expected: self.len(), actual: values.len() });
        }
        Ok(MomentState { time: 0, values })
    }

    /// Disturbance moments for every slot at step `t`.
    pub fn dist_values(&self, model: &DisturbanceModel<F>, t: usize) -> Result<Vec<F>> {
        let binding = model.bind(&self.system.dist_groups)?;
        let shifts = model.shifts_at(t)?;
        self.resolve(model, &binding, &shifts)
    }

    fn resolve(&self, model: &DisturbanceModel<F>, binding: &[usize], shifts: &[F]) -> Result<Vec<F>> {
        self.betas.iter().map(|b| model.dist_moment_bound(&self.system.dist_groups, binding, shifts, b)).collect()
    }

    /// Inner loop: `next = h(current, w)` with resolved disturbance moments.
    #[inline]
    pub fn apply(&self, current: &[F], w: &[F], next: &mut [F]) {
        for (row, out) in next.iter_mut().enumerate() {
            let mut acc = F::zero();
            for k in self.row_start[row]..self.row_start[row + 1] {
                let mut v = self.coeff[k] * w[self.dist_slot[k]];
                for &i in &self.factor_idx[self.factor_start[k]..self.factor_start[k + 1]] {
                    v *= current[i];
                }
                acc += v;
            }
            *out = acc;
        }
    }

    fn check_finite(&self, values: &[F], step: usize) -> Result<()> {
        match values.iter().position(|v| !v.is_finite()) {
            None => Ok(()),
            Some(i) => Err(Error::NonFinite { step, moment: self.basis.get(i).render(&self.vars) }),
        }
    }

    pub fn step(&self, state: &MomentState<F>, model: &DisturbanceModel<F>) -> Result<MomentState<F>> {
        if state.values.len() != self.len() {
            return Err(Error::LengthMismatch { expected: self.len(), actual: state.values.len() });
        }
        let w = self.dist_values(model, state.time)?;
        let mut next = vec![F::zero(); self.len()];
        self.apply(&state.values, &w, &mut next);
        self.check_finite(&next, state.time + 1)?;
        Ok(MomentState { time: state.time + 1, values: next })
    }

    /// `T` steps from `init`; disturbance moments are recomputed only when
    /// the shifts change.
    pub fn propagate(
        &self,
        init: &MomentState<F>,
        model: &DisturbanceModel<F>,
        steps: usize,
    ) -> Result<MomentTrajectory<F>> {
        if init.values.len() != self.len() {
            return Err(Error::LengthMismatch { expected: self.len(), actual: init.values.len() });
        }
        let binding = model.bind(&self.system.dist_groups)?;
        let mut states = Vec::with_capacity(steps + 1);
        states.push(init.clone());
        let mut last_shifts: Option<Vec<F>> = None;
        let mut w = Vec::new();
        for k in 0..steps {
            let t = init.time + k;
            let shifts = model.shifts_at(t)?;
            if last_shifts.as_ref() != Some(&shifts) {
                w = self.resolve(model, &binding, &shifts)?;
                last_shifts = Some(shifts);
            }
            let mut next = vec![F::zero(); self.len()];
            self.apply(&states[k].values, &w, &mut next);
            self.check_finite(&next, t + 1)?;
            states.push(MomentState { time: t + 1, values: next });
        }
        Ok(MomentTrajectory { vars: self.vars.clone(), basis: self.basis.clone(), states })
    }

    /// Final state only, without storing the trajectory.
    pub fn propagate_final(
        &self,
        init: &MomentState<F>,
        model: &DisturbanceModel<F>,
        steps: usize,
    ) -> Result<MomentState<F>> {
        let binding = model.bind(&self.system.dist_groups)?;
        let mut cur = init.values.clone();
        let mut next = vec![F::zero(); self.len()];
        let mut last_shifts: Option<Vec<F>> = None;
        let mut w = Vec::new();
        for k in 0..steps {
            let t = init.time + k;
            let shifts = model.shifts_at(t)?;
            if last_shifts.as_ref() != Some(&shifts) {
                w = self.resolve(model, &binding, &shifts)?;
                last_shifts = Some(shifts);
            }
            self.apply(&cur, &w, &mut next);
            self.check_finite(&next, t + 1)?;
            std::mem::swap(&mut cur, &mut next);
        }
        Ok(MomentState { time: init.time + steps, values: cur })
    }
}

impl Propagator<f64> {
    /// Stationary fast path for un-reduced systems: the step is a fixed affine
    /// map, so `T` steps are taken by repeated squaring of its augmented matrix.
    pub fn jump(
        &self,
        init: &MomentState<f64>,
        model: &DisturbanceModel<f64>,
        steps: usize,
    ) -> Result<MomentState<f64>> {
        if self.system.reduced {
            return Err(Error::ReducedSystem);
        }
        if !model.is_stationary() {
            return Err(Error::InvalidArgument("jump needs a stationary disturbance model".into()));
        }
        let w = self.dist_values(model, 0)?;
        let dist: std::collections::BTreeMap<MultiIndex, f64> = self.betas.iter().cloned().zip(w).collect();
        let (a, b) = self.system.ltv_matrices::<f64>(&dist)?;
        let n = self.len();
        let mut m = nalgebra::DMatrix::<f64>::zeros(n + 1, n + 1);
        m.view_mut((0, 0), (n, n)).copy_from(&a);
        m.view_mut((0, n), (n, 1)).copy_from(&b);
        m[(n, n)] = 1.0;
        let mut power = nalgebra::DMatrix::<f64>::identity(n + 1, n + 1);
        let (mut base, mut k) = (m, steps);
        while k > 0 {
            if k & 1 == 1 {
                power = &power * &base;
            }
            base = &base * &base;
            k >>= 1;
        }
        let mut x = nalgebra::DVector::<f64>::zeros(n + 1);
        x.rows_mut(0, n).copy_from_slice(&init.values);
        x[n] = 1.0;
        let y = power * x;
        let values: Vec<f64> = y.rows(0, n).iter().copied().collect();
        self.check_finite(&values, init.time + steps)?;
        Ok(MomentState { time: init.time + steps, values })
    }
}
