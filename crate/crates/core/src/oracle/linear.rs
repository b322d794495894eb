//! Linearized mean/covariance baseline.

use nalgebra::{DMatrix, DVector};

use crate::distmoments::DisturbanceModel;
use crate::error::{Error, Result};
use crate::polyring::MultiIndex;
use crate::sysspec::{Expr, SystemSpec};

/// `x' = (I + A) x + B w + c`, in original coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearModel {
    pub state_vars: Vec<String>,
    pub disturbance_vars: Vec<String>,
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub c: DVector<f64>,
    pub x_op: DVector<f64>,
    pub w_op: DVector<f64>,
}

/// Symbolic Jacobians of the update map evaluated at `(x_op, w_op)`.
pub fn jacobians(spec: &SystemSpec, x_op: &[f64], w_op: &[f64]) -> Result<(DMatrix<f64>, DMatrix<f64>, DVector<f64>)> {
    let (n, m) = (spec.state_vars.len(), spec.disturbance_vars.len());
    if x_op.len() != n {
        return Err(Error::LengthMismatch { expected: n, actual: x_op.len() });
    }
    if w_op.len() != m {
        return Err(Error::LengthMismatch { expected: m, actual: w_op.len() });
    }
    let lookup = |name: &str| -> f64 {
        if let Some(i) = spec.state_vars.iter().position(|s| s == name) {
            x_op[i]
        } else {
            let j = spec.disturbance_vars.iter().position(|d| d == name).expect("validated symbol");
            w_op[j]
        }
    };
    let eval = |e: &Expr| e.eval(&lookup);
    let mut jx = DMatrix::zeros(n, n);
    let mut jw = DMatrix::zeros(n, m);
    let mut f = DVector::zeros(n);
    for (i, update) in spec.updates.iter().enumerate() {
        f[i] = eval(update);
        for (j, s) in spec.state_vars.iter().enumerate() {
            jx[(i, j)] = eval(&update.diff(s));
        }
        for (j, w) in spec.disturbance_vars.iter().enumerate() {
            jw[(i, j)] = eval(&update.diff(w));
        }
    }
    Ok((jx, jw, f))
}

/// Linearizes about `(x_op, w_op)`. The discrete update is read as an Euler
/// step `x' = x + g(x, w)` of unit length; `dt` rescales `g`.
pub fn linearize(spec: &SystemSpec, x_op: &[f64], w_op: &[f64], dt: f64) -> Result<LinearModel> {
    let (jx, jw, f) = jacobians(spec, x_op, w_op)?;
    let n = x_op.len();
    let xs = DVector::from_column_slice(x_op);
    let ws = DVector::from_column_slice(w_op);
    let gx = &jx - DMatrix::identity(n, n);
    let g = &f - &xs;
    let c = (g - &gx * &xs - &jw * &ws) * dt;
    Ok(LinearModel {
        state_vars: spec.state_vars.clone(),
        disturbance_vars: spec.disturbance_vars.clone(),
        a: gx * dt,
        b: jw * dt,
        c,
        x_op: xs,
        w_op: ws,
    })
}

/// Linearizes about `x0` with every disturbance at its mean plus its first shift.
pub fn linearize_at_initial(
    spec: &SystemSpec,
    model: &DisturbanceModel<f64>,
    x0: &[f64],
    dt: f64,
) -> Result<LinearModel> {
    let w = disturbance_stats(spec, model, 0)?.0;
    linearize(spec, x0, w.as_slice(), dt)
}

/// Disturbance mean vector and diagonal covariance at step `t`.
fn disturbance_stats(
    spec: &SystemSpec,
    model: &DisturbanceModel<f64>,
    t: usize,
) -> Result<(DVector<f64>, DMatrix<f64>)> {
    let m = spec.disturbance_vars.len();
    let mut mean = DVector::zeros(m);
    let mut cov = DMatrix::zeros(m, m);
    for (j, w) in spec.disturbance_vars.iter().enumerate() {
        let k = model.position(w).ok_or_else(|| Error::MissingDisturbance(w.clone()))?;
        let e = &model.entries()[k];
        mean[j] = e.dist.mean() + model.shift(k, t)?;
        cov[(j, j)] = e.dist.variance();
    }
    Ok((mean, cov))
}

/// Mean and covariance at one step of the linear recursion.
#[derive(Clone, Debug, PartialEq)]
pub struct Gaussian {
    pub mean: DVector<f64>,
    pub cov: DMatrix<f64>,
}

impl Gaussian {
    /// Raw moment `E[z^alpha]` of a Gaussian of degree at most two.
    pub fn raw_moment(&self, alpha: &MultiIndex) -> Option<f64> {
        let support: Vec<usize> = alpha.support().collect();
        match (alpha.degree(), support.as_slice()) {
            (0, _) => Some(1.0),
            (1, [i]) => Some(self.mean[*i]),
            (2, [i]) => Some(self.cov[(*i, *i)] + self.mean[*i] * self.mean[*i]),
            (2, [i, j]) => Some(self.cov[(*i, *j)] + self.mean[*i] * self.mean[*j]),
            _ => None,
        }
    }
}

/// `μ' = (I + A)μ + Bμ_w + c`, `Σ' = (I + A)Σ(I + A)ᵀ + BΣ_wBᵀ`, symmetrized
/// every step. Returns `T + 1` entries.
pub fn linear_propagate(
    lin: &LinearModel,
    mu0: &DVector<f64>,
    sigma0: &DMatrix<f64>,
    spec: &SystemSpec,
    model: &DisturbanceModel<f64>,
    steps: usize,
) -> Result<Vec<Gaussian>> {
    let n = lin.a.nrows();
    if mu0.len() != n || sigma0.shape() != (n, n) {
        return Err(Error::LengthMismatch { expected: n, actual: mu0.len() });
    }
    let phi = DMatrix::identity(n, n) + &lin.a;
    let mut out = Vec::with_capacity(steps + 1);
    let mut cur = Gaussian { mean: mu0.clone(), cov: sigma0.clone() };
    out.push(cur.clone());
    for t in 0..steps {
        let (mw, sw) = disturbance_stats(spec, model, t)?;
        let mean = &phi * &cur.mean + &lin.b * mw + &lin.c;
        let cov = &phi * &cur.cov * phi.transpose() + &lin.b * sw * lin.b.transpose();
        let cov = (&cov + cov.transpose()) * 0.5;
        cur = Gaussian { mean, cov };
        out.push(cur.clone());
    }
    Ok(out)
}
