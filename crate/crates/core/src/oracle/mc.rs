//! Monte Carlo rollouts of the original (un-encoded) system.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::distmoments::{DisturbanceModel, Sampler};
use crate::error::{Error, Result};
use crate::polyring::MultiIndex;
use crate::sysspec::expr::Program;
use crate::sysspec::SystemSpec;

/// Where an encoded state variable comes from in the original state.
#[derive(Clone, Copy, Debug)]
enum Source {
    Plain(usize),
    Cos(usize),
    Sin(usize),
}

/// Samples trajectories of a [`SystemSpec`] by evaluating its updates directly,
/// `sin`/`cos` included.
#[derive(Clone, Debug)]
pub struct Simulator {
    nstate: usize,
    updates: Vec<Program>,
    samplers: Vec<Sampler>,
    shifts: Vec<Vec<f64>>,
    encoded_names: Vec<String>,
    sources: Vec<Source>,
}

impl Simulator {
    pub fn new(spec: &SystemSpec, model: &DisturbanceModel<f64>) -> Result<Self> {
        let nstate = spec.state_vars.len();
        let slot = |name: &str| -> usize {
            spec.state_vars
                .iter()
                .position(|s| s == name)
                .or_else(|| spec.disturbance_vars.iter().position(|d| d == name).map(|i| nstate + i))
                .expect("validated symbol")
        };
        let updates = spec.updates.iter().map(|e| e.compile(&slot)).collect();
        let mut samplers = Vec::new();
        let mut shifts = Vec::new();
        for w in &spec.disturbance_vars {
            let entry = model.entry(w).ok_or_else(|| Error::MissingDisturbance(w.clone()))?;
            samplers.push(Sampler::new(&entry.dist)?);
            shifts.push(entry.shifts.clone());
        }
        let mut encoded_names = Vec::new();
        let mut sources = Vec::new();
        for (i, s) in spec.state_vars.iter().enumerate() {
            match spec.angle(s) {
                Some(a) => {
                    encoded_names.push(a.cos_name.clone());
                    sources.push(Source::Cos(i));
                    encoded_names.push(a.sin_name.clone());
                    sources.push(Source::Sin(i));
                }
                None => {
                    encoded_names.push(s.clone());
                    sources.push(Source::Plain(i));
                }
            }
        }
        Ok(Simulator { nstate, updates, samplers, shifts, encoded_names, sources })
    }

    /// Names of the encoded state variables, the coordinates moments refer to.
    pub fn encoded_names(&self) -> &[String] {
        &self.encoded_names
    }

    pub fn nstate(&self) -> usize {
        self.nstate
    }

    /// Steps covered by every non-empty shift schedule.
    pub fn horizon(&self) -> Option<usize> {
        self.shifts.iter().filter(|s| !s.is_empty()).map(Vec::len).min()
    }

    /// Writes the encoded form of an original state into `out`.
    pub fn encode(&self, state: &[f64], out: &mut [f64]) {
        for (o, src) in out.iter_mut().zip(&self.sources) {
            *o = match *src {
                Source::Plain(i) => state[i],
                Source::Cos(i) => state[i].cos(),
                Source::Sin(i) => state[i].sin(),
            };
        }
    }

    /// One rollout of `steps` steps from `x0` (original coordinates). `visit` sees
    /// the state after every step, starting with `t = 0`.
    pub fn rollout<R: rand::Rng + ?Sized>(
        &self,
        rng: &mut R,
        x0: &[f64],
        steps: usize,
        mut visit: impl FnMut(usize, &[f64]),
    ) {
        let n = self.nstate;
        let mut cur = vec![0.0; n + self.samplers.len()];
        cur[..n].copy_from_slice(x0);
        let mut next = vec![0.0; n];
        visit(0, &cur[..n]);
        for t in 0..steps {
            for (k, s) in self.samplers.iter().enumerate() {
                let shift = self.shifts[k].get(t).copied().unwrap_or(0.0);
                cur[n + k] = s.sample(rng) + shift;
            }
            for (o, p) in next.iter_mut().zip(&self.updates) {
                *o = p.eval(&cur);
            }
            cur[..n].copy_from_slice(&next);
            visit(t + 1, &cur[..n]);
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct McConfig {
    pub steps: usize,
    pub samples: usize,
    pub seed: u64,
    pub batch_size: usize,
}

impl McConfig {
    pub fn new(steps: usize, samples: usize, seed: u64) -> Self {
        McConfig { steps, samples, seed, batch_size: 4096 }
    }
}

/// Per-step sample means and standard errors of the requested moments.
#[derive(Clone, Debug, PartialEq)]
pub struct McEstimate {
    pub names: Vec<String>,
    pub moments: Vec<MultiIndex>,
    pub samples: usize,
    /// `mean[t][k]`.
    pub mean: Vec<Vec<f64>>,
    /// Sum of squared deviations, `m2[t][k]`.
    pub m2: Vec<Vec<f64>>,
}

impl McEstimate {
    pub fn steps(&self) -> usize {
        self.mean.len().saturating_sub(1)
    }

    pub fn index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Standard error of the mean: sample std / sqrt(N).
    pub fn se(&self, t: usize, k: usize) -> f64 {
        let n = self.samples as f64;
        (self.m2[t][k] / (n - 1.0)).max(0.0).sqrt() / n.sqrt()
    }

    /// Variance of a scalar `z` from its first four raw moment estimates
    /// (indices of `z`, `z^2`, `z^3`, `z^4`), with the delta-method standard error
    /// `sqrt((mu4 - var^2) / N)`.
    pub fn variance_with_se(&self, t: usize, idx: [usize; 4]) -> (f64, f64) {
        let [m1, m2, m3, m4] = idx.map(|k| self.mean[t][k]);
        let var = m2 - m1 * m1;
        let mu4 = m4 - 4.0 * m3 * m1 + 6.0 * m2 * m1 * m1 - 3.0 * m1.powi(4);
        let se = ((mu4 - var * var).max(0.0) / self.samples as f64).sqrt();
        (var, se)
    }

    /// CSV with columns `t,<m>...,se(<m>)...`.
    pub fn write_csv<W: std::io::Write>(&self, mut out: W) -> std::io::Result<()> {
        write!(out, "t")?;
        for n in &self.names {
            write!(out, ",{n}")?;
        }
        for n in &self.names {
            write!(out, ",se({n})")?;
        }
        writeln!(out)?;
        for t in 0..self.mean.len() {
            write!(out, "{t}")?;
            for v in &self.mean[t] {
                write!(out, ",{v}")?;
            }
            for k in 0..self.names.len() {
                write!(out, ",{}", self.se(t, k))?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

/// Well-mixed seed for batch `i` (splitmix64 finalizer).
pub fn batch_seed(seed: u64, i: u64) -> u64 {
    let mut z = seed ^ i.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

struct Partial {
    n: f64,
    mean: Vec<f64>,
    m2: Vec<f64>,
}

/// Chan et al. pairwise merge of two (count, mean, M2) summaries.
fn merge(acc: &mut Partial, b: Partial) {
    if acc.n == 0.0 {
        *acc = b;
        return;
    }
    let n = acc.n + b.n;
    for k in 0..acc.mean.len() {
        let delta = b.mean[k] - acc.mean[k];
        acc.mean[k] += delta * b.n / n;
        acc.m2[k] += b.m2[k] + delta * delta * acc.n * b.n / n;
    }
    acc.n = n;
}

fn monomial(exps: &[(usize, i32)], x: &[f64]) -> f64 {
    exps.iter().fold(1.0, |acc, &(i, e)| acc * x[i].powi(e))
}

/// Rolls out `cfg.samples` trajectories and estimates `E[x_t^m]` for every
/// requested monomial `m` over the encoded state variables. Batches run in
/// parallel and are merged in batch order, so results do not depend on the
/// thread count.
pub fn mc_simulate(
    spec: &SystemSpec,
    model: &DisturbanceModel<f64>,
    x0: &[f64],
    moments: &[MultiIndex],
    cfg: &McConfig,
) -> Result<McEstimate> {
    if cfg.samples < 2 {
        return Err(Error::InvalidArgument("Monte Carlo needs at least two samples".into()));
    }
    if cfg.batch_size == 0 {
        return Err(Error::InvalidArgument("batch size must be positive".into()));
    }
    if x0.len() != spec.state_vars.len() {
        return Err(Error::LengthMismatch { expected: spec.state_vars.len(), actual: x0.len() });
    }
    let sim = Simulator::new(spec, model)?;
    if let Some(h) = sim.horizon() {
        if h < cfg.steps {
            return Err(Error::HorizonMismatch(format!("shift schedules cover {h} steps, {} requested", cfg.steps)));
        }
    }
    let nenc = sim.encoded_names.len();
    for m in moments {
        if m.len() != nenc {
            return Err(Error::LengthMismatch { expected: nenc, actual: m.len() });
        }
    }
    let exps: Vec<Vec<(usize, i32)>> =
        moments.iter().map(|m| m.support().map(|i| (i, m.get(i) as i32)).collect()).collect();
    let nm = moments.len();
    let width = (cfg.steps + 1) * nm;
    let batches = cfg.samples.div_ceil(cfg.batch_size);

    let partials: Vec<Partial> = (0..batches)
        .into_par_iter()
        .map(|b| {
            let count = cfg.batch_size.min(cfg.samples - b * cfg.batch_size);
            let mut rng = ChaCha8Rng::seed_from_u64(batch_seed(cfg.seed, b as u64));
            // Shifted sums around the first sample keep cancellation small and
            // give exactly zero spread for degenerate inputs.
            let mut pivot = vec![0.0; width];
            let mut s1 = vec![0.0; width];
            let mut s2 = vec![0.0; width];
            let mut enc = vec![0.0; nenc];
            for j in 0..count {
                sim.rollout(&mut rng, x0, cfg.steps, |t, state| {
                    sim.encode(state, &mut enc);
                    let base = t * nm;
                    for (k, e) in exps.iter().enumerate() {
                        let v = monomial(e, &enc);
                        if j == 0 {
                            pivot[base + k] = v;
                        } else {
                            let d = v - pivot[base + k];
                            s1[base + k] += d;
                            s2[base + k] += d * d;
                        }
                    }
                });
            }
            let n = count as f64;
            let mean: Vec<f64> = (0..width).map(|i| pivot[i] + s1[i] / n).collect();
            let m2: Vec<f64> = (0..width).map(|i| (s2[i] - s1[i] * s1[i] / n).max(0.0)).collect();
            Partial { n, mean, m2 }
        })
        .collect();

    let mut total = Partial { n: 0.0, mean: Vec::new(), m2: Vec::new() };
    for p in partials {
        merge(&mut total, p);
    }
    let split = |v: &[f64]| -> Vec<Vec<f64>> { v.chunks(nm.max(1)).map(<[f64]>::to_vec).collect() };
    let (mean, m2) = if nm == 0 {
        (vec![Vec::new(); cfg.steps + 1], vec![Vec::new(); cfg.steps + 1])
    } else {
        (split(&total.mean), split(&total.m2))
    };
    Ok(McEstimate {
        names: moments.iter().map(|m| m.render(&sim.encoded_names)).collect(),
        moments: moments.to_vec(),
        samples: cfg.samples,
        mean,
        m2,
    })
}
