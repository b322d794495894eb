//! Tables of moment series and the exact / Monte Carlo / linearized comparison.

use std::io::{self, Write};

use crate::distmoments::{trig_moment, Distribution};
use crate::error::{Error, Result};
use crate::polyring::MultiIndex;
use crate::propagator::MomentTrajectory;
use crate::sysspec::SystemSpec;

use super::linear::Gaussian;
use super::mc::McEstimate;

/// Named moment columns over time.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentTable {
    pub names: Vec<String>,
    pub times: Vec<usize>,
    /// `values[row][column]`.
    pub values: Vec<Vec<f64>>,
}

impl MomentTable {
    pub fn from_trajectory(traj: &MomentTrajectory<f64>) -> Self {
        MomentTable {
            names: traj.moment_names(),
            times: traj.states.iter().map(|s| s.time).collect(),
            values: traj.states.iter().map(|s| s.values.clone()).collect(),
        }
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Parses `t,<name>...` CSV; lines starting with `#` are skipped.
    pub fn parse_csv(text: &str) -> Result<Self> {
        let mut lines =
            text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'));
        let (_, header) = lines.next().ok_or_else(|| Error::Format { line: 1, message: "empty table".into() })?;
        let mut cols = header.split(',').map(str::trim);
        if cols.next() != Some("t") {
            return Err(Error::Format { line: 1, message: "first column must be `t`".into() });
        }
        let names: Vec<String> = cols.map(String::from).collect();
        let mut times = Vec::new();
        let mut values = Vec::new();
        for (i, line) in lines {
            let bad = |m: &str| Error::Format { line: i + 1, message: m.to_string() };
            let mut fields = line.split(',').map(str::trim);
            let t: usize = fields.next().and_then(|f| f.parse().ok()).ok_or_else(|| bad("bad time index"))?;
            let row: Vec<f64> =
                fields.map(|f| f.parse::<f64>().map_err(|_| bad("bad number"))).collect::<Result<_>>()?;
            if row.len() != names.len() {
                return Err(bad("wrong number of columns"));
            }
            times.push(t);
            values.push(row);
        }
        Ok(MomentTable { names, times, values })
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "t,{}", self.names.join(","))?;
        for (t, row) in self.times.iter().zip(&self.values) {
            write!(out, "{t}")?;
            for v in row {
                write!(out, ",{v}")?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

/// Monte Carlo means with their standard errors.
#[derive(Clone, Debug, PartialEq)]
pub struct McTable {
    pub mean: MomentTable,
    pub se: MomentTable,
}

impl McTable {
    pub fn from_estimate(est: &McEstimate) -> Self {
        let times: Vec<usize> = (0..est.mean.len()).collect();
        let se = times.iter().map(|&t| (0..est.names.len()).map(|k| est.se(t, k)).collect()).collect();
        McTable {
            mean: MomentTable { names: est.names.clone(), times: times.clone(), values: est.mean.clone() },
            se: MomentTable { names: est.names.clone(), times, values: se },
        }
    }

    /// Parses the `t,<m>...,se(<m>)...` layout written by [`McEstimate::write_csv`].
    pub fn parse_csv(text: &str) -> Result<Self> {
        let all = MomentTable::parse_csv(text)?;
        let mut mean_cols = Vec::new();
        let mut se_cols = Vec::new();
        for (i, n) in all.names.iter().enumerate() {
            if n.starts_with("se(") && n.ends_with(')') {
                se_cols.push((n[3..n.len() - 1].to_string(), i));
            } else {
                mean_cols.push((n.clone(), i));
            }
        }
        let mut names = Vec::new();
        let mut pairs = Vec::new();
        for (n, i) in &mean_cols {
            let j = se_cols
                .iter()
                .find(|(m, _)| m == n)
                .map(|(_, j)| *j)
                .ok_or_else(|| Error::Format { line: 1, message: format!("no se({n}) column") })?;
            names.push(n.clone());
            pairs.push((*i, j));
        }
        let pick = |col: fn(&(usize, usize)) -> usize| MomentTable {
            names: names.clone(),
            times: all.times.clone(),
            values: all.values.iter().map(|row| pairs.iter().map(|p| row[col(p)]).collect()).collect(),
        };
        Ok(McTable { mean: pick(|p| p.0), se: pick(|p| p.1) })
    }
}

/// Linearized-model values for moments over the encoded variables. Monomials in
/// non-angle variables of degree at most two use the Gaussian moments; pure
/// `cos`/`sin` moments of a single angle use the Gaussian trigonometric moments.
/// Anything else is NaN.
pub fn linear_table(spec: &SystemSpec, gaussians: &[Gaussian], moments: &[MultiIndex]) -> MomentTable {
    // Encoded position -> (original index, 0 plain / 1 cos / 2 sin).
    let mut map = Vec::new();
    let mut names = Vec::new();
    for (i, s) in spec.state_vars.iter().enumerate() {
        match spec.angle(s) {
            Some(a) => {
                map.push((i, 1));
                names.push(a.cos_name.clone());
                map.push((i, 2));
                names.push(a.sin_name.clone());
            }
            None => {
                map.push((i, 0));
                names.push(s.clone());
            }
        }
    }
    let n = spec.state_vars.len();
    let value = |g: &Gaussian, m: &MultiIndex| -> f64 {
        let support: Vec<usize> = m.support().collect();
        if support.iter().all(|&k| map[k].1 == 0) {
            let mut e = vec![0; n];
            for &k in &support {
                e[map[k].0] += m.get(k);
            }
            return g.raw_moment(&MultiIndex::new(e)).unwrap_or(f64::NAN);
        }
        let angle = map[support[0]].0;
        if support.iter().all(|&k| map[k].0 == angle && map[k].1 != 0) {
            let (mut cm, mut sm) = (0, 0);
            for &k in &support {
                if map[k].1 == 1 {
                    cm += m.get(k);
                } else {
                    sm += m.get(k);
                }
            }
            let var = g.cov[(angle, angle)].max(0.0);
            return Distribution::gaussian(g.mean[angle], var)
                .and_then(|d| trig_moment(&d, 0.0, cm, sm))
                .unwrap_or(f64::NAN);
        }
        f64::NAN
    };
    MomentTable {
        names: moments.iter().map(|m| m.render(&names)).collect(),
        times: (0..gaussians.len()).collect(),
        values: gaussians.iter().map(|g| moments.iter().map(|m| value(g, m)).collect()).collect(),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReportRow {
    pub t: usize,
    pub moment: String,
    pub exact: f64,
    pub mc_mean: f64,
    pub mc_se: f64,
    pub linearized: Option<f64>,
    pub z_exact: f64,
    pub z_linearized: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub rows: Vec<ReportRow>,
    pub threshold: f64,
}

/// `(value - mean) / se`, with a zero standard error giving 0 for an exact
/// match and an infinite score otherwise.
pub fn z_score(value: f64, mean: f64, se: f64) -> f64 {
    let d = value - mean;
    if se > 0.0 {
        d / se
    } else if d == 0.0 {
        0.0
    } else {
        d.signum() * f64::INFINITY
    }
}

impl Report {
    pub fn max_abs_z_exact(&self) -> f64 {
        self.rows.iter().map(|r| r.z_exact.abs()).fold(0.0, f64::max)
    }

    pub fn max_abs_z_linearized(&self) -> Option<f64> {
        self.rows.iter().filter_map(|r| r.z_linearized).map(f64::abs).reduce(f64::max)
    }

    pub fn flagged_exact(&self) -> Vec<&ReportRow> {
        self.rows.iter().filter(|r| r.z_exact.abs() > self.threshold).collect()
    }

    pub fn flagged_linearized(&self) -> Vec<&ReportRow> {
        self.rows.iter().filter(|r| r.z_linearized.is_some_and(|z| z.abs() > self.threshold)).collect()
    }

    /// One-paragraph summary suitable for a CSV comment or a terminal.
    pub fn summary(&self) -> String {
        let mut s = format!(
            "max |z| exact vs MC = {:.3}; {} of {} rows exceed {}",
            self.max_abs_z_exact(),
            self.flagged_exact().len(),
            self.rows.len(),
            self.threshold
        );
        if let Some(z) = self.max_abs_z_linearized() {
            s.push_str(&format!(
                "; max |z| linearized vs MC = {z:.3}; {} rows exceed {}",
                self.flagged_linearized().len(),
                self.threshold
            ));
        }
        s
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "t,moment,exact,mc_mean,mc_se,linearized,z_exact,z_linearized")?;
        let opt = |v: Option<f64>| v.map_or(String::new(), |x| x.to_string());
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                r.t,
                r.moment,
                r.exact,
                r.mc_mean,
                r.mc_se,
                opt(r.linearized),
                r.z_exact,
                opt(r.z_linearized)
            )?;
        }
        Ok(())
    }

    /// Per-moment series with a ±2 SE Monte Carlo band, for external plotting.
    pub fn write_plot_data<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "moment,t,exact,mc_mean,mc_lo,mc_hi,linearized")?;
        let mut rows: Vec<&ReportRow> = self.rows.iter().collect();
        rows.sort_by(|a, b| a.moment.cmp(&b.moment).then(a.t.cmp(&b.t)));
        for r in rows {
            writeln!(
                out,
                "{},{},{},{},{},{},{}",
                r.moment,
                r.t,
                r.exact,
                r.mc_mean,
                r.mc_mean - 2.0 * r.mc_se,
                r.mc_mean + 2.0 * r.mc_se,
                r.linearized.map_or(String::new(), |x| x.to_string())
            )?;
        }
        Ok(())
    }
}

/// Per-moment, per-step comparison over the moments present in both `exact`
/// and `mc`. Horizons must agree.
pub fn compare(exact: &MomentTable, mc: &McTable, lin: Option<&MomentTable>) -> Result<Report> {
    if exact.times != mc.mean.times {
        return Err(Error::HorizonMismatch(format!(
            "exact covers {} rows, Monte Carlo {}",
            exact.times.len(),
            mc.mean.times.len()
        )));
    }
    if let Some(l) = lin {
        if l.times != exact.times {
            return Err(Error::HorizonMismatch(format!(
                "exact covers {} rows, linearized {}",
                exact.times.len(),
                l.times.len()
            )));
        }
    }
    let mut rows = Vec::new();
    for (row, &t) in exact.times.iter().enumerate() {
        for (k, name) in exact.names.iter().enumerate() {
            let Some(j) = mc.mean.column(name) else { continue };
            let (mean, se) = (mc.mean.values[row][j], mc.se.values[row][j]);
            let value = exact.values[row][k];
            let linearized = lin.and_then(|l| l.column(name).map(|c| l.values[row][c])).filter(|v| v.is_finite());
            rows.push(ReportRow {
                t,
                moment: name.clone(),
                exact: value,
                mc_mean: mean,
                mc_se: se,
                linearized,
                z_exact: z_score(value, mean, se),
                z_linearized: linearized.map(|v| z_score(v, mean, se)),
            });
        }
    }
    Ok(Report { rows, threshold: 5.0 })
}
