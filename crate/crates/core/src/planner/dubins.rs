//! Shortest bounded-curvature paths and their discretization into heading
//! increments for the unit-step car `p' = p + v(cos θ, sin θ)`, `θ' = θ + u`.

use std::f64::consts::TAU;

use crate::error::{Error, Result};

use super::geometry::Pose;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Segment {
    Left,
    Straight,
    Right,
}

impl Segment {
    fn curvature(self) -> f64 {
        match self {
            Segment::Left => 1.0,
            Segment::Straight => 0.0,
            Segment::Right => -1.0,
        }
    }
}

/// Path word (e.g. LSL) and segment lengths in metres.
#[derive(Clone, Debug, PartialEq)]
pub struct DubinsPath {
    pub start: Pose,
    pub radius: f64,
    pub segments: [(Segment, f64); 3],
}

fn mod2pi(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    if TAU - r < 1e-10 {
        0.0
    } else {
        r
    }
}

impl DubinsPath {
    pub fn length(&self) -> f64 {
        self.segments.iter().map(|s| s.1).sum()
    }

    pub fn word(&self) -> String {
        self.segments
            .iter()
            .map(|(s, _)| match s {
                Segment::Left => 'L',
                Segment::Straight => 'S',
                Segment::Right => 'R',
            })
            .collect()
    }

    /// Heading change accumulated after arc length `s`.
    pub fn turned(&self, s: f64) -> f64 {
        let mut left = s.clamp(0.0, self.length());
        let mut acc = 0.0;
        for &(seg, len) in &self.segments {
            let d = left.min(len);
            acc += seg.curvature() * d / self.radius;
            left -= d;
        }
        acc
    }

    /// Exact pose after arc length `s`.
    pub fn sample(&self, s: f64) -> Pose {
        let r = self.radius;
        let mut p = self.start;
        let mut left = s.clamp(0.0, self.length());
        for &(seg, len) in &self.segments {
            let d = left.min(len);
            left -= d;
            match seg {
                Segment::Straight => {
                    p.x += d * p.theta.cos();
                    p.y += d * p.theta.sin();
                }
                Segment::Left | Segment::Right => {
                    let k = seg.curvature();
                    let phi = k * d / r;
                    // Centre sits at distance r to the turning side.
                    let (cx, cy) = (p.x - k * r * p.theta.sin(), p.y + k * r * p.theta.cos());
                    let th = p.theta + phi;
                    p = Pose::new(cx + k * r * th.sin(), cy - k * r * th.cos(), th);
                }
            }
        }
        p.theta = p.theta.rem_euclid(TAU);
        p
    }
}

/// Shortest of the six standard words, or `None` for coincident poses.
pub fn dubins_shortest(from: Pose, to: Pose, radius: f64) -> Option<DubinsPath> {
    use Segment::*;
    let (dx, dy) = (to.x - from.x, to.y - from.y);
    if dx.hypot(dy) <= 1e-12 && mod2pi(to.theta - from.theta) == 0.0 {
        return None;
    }
    let d = dx.hypot(dy) / radius;
    let th = mod2pi(dy.atan2(dx));
    let a = mod2pi(from.theta - th);
    let b = mod2pi(to.theta - th);
    let (sa, sb, ca, cb) = (a.sin(), b.sin(), a.cos(), b.cos());
    let cab = (a - b).cos();
    let mut best: Option<([Segment; 3], [f64; 3])> = None;
    let mut consider = |word: [Segment; 3], params: Option<[f64; 3]>| {
        if let Some(p) = params {
            if p.iter().all(|v| v.is_finite()) {
                let total: f64 = p.iter().sum();
                if best.as_ref().is_none_or(|(_, q)| total < q.iter().sum::<f64>()) {
                    best = Some((word, p));
                }
            }
        }
    };

    consider([Left, Straight, Left], {
        let p2 = 2.0 + d * d - 2.0 * cab + 2.0 * d * (sa - sb);
        (p2 >= -1e-10).then(|| {
            let t1 = (cb - ca).atan2(d + sa - sb);
            [mod2pi(-a + t1), p2.max(0.0).sqrt(), mod2pi(b - t1)]
        })
    });
    consider([Right, Straight, Right], {
        let p2 = 2.0 + d * d - 2.0 * cab + 2.0 * d * (sb - sa);
        (p2 >= -1e-10).then(|| {
            let t1 = (ca - cb).atan2(d - sa + sb);
            [mod2pi(a - t1), p2.max(0.0).sqrt(), mod2pi(-b + t1)]
        })
    });
    consider([Left, Straight, Right], {
        let p2 = -2.0 + d * d + 2.0 * cab + 2.0 * d * (sa + sb);
        (p2 >= -1e-10).then(|| {
            let p = p2.max(0.0).sqrt();
            let t2 = (-ca - cb).atan2(d + sa + sb) - (-2.0f64).atan2(p);
            [mod2pi(-a + t2), p, mod2pi(-b + t2)]
        })
    });
    consider([Right, Straight, Left], {
        let p2 = d * d - 2.0 + 2.0 * cab - 2.0 * d * (sa + sb);
        (p2 >= -1e-10).then(|| {
            let p = p2.max(0.0).sqrt();
            let t2 = (ca + cb).atan2(d - sa - sb) - 2.0f64.atan2(p);
            [mod2pi(a - t2), p, mod2pi(b - t2)]
        })
    });
    consider([Right, Left, Right], {
        let tmp = (6.0 - d * d + 2.0 * cab + 2.0 * d * (sa - sb)) / 8.0;
        (tmp.abs() <= 1.0 + 1e-10).then(|| {
            let p = mod2pi(TAU - tmp.clamp(-1.0, 1.0).acos());
            let t = mod2pi(a - (ca - cb).atan2(d - sa + sb) + p / 2.0);
            [t, p, mod2pi(a - b - t + p)]
        })
    });
    consider([Left, Right, Left], {
        let tmp = (6.0 - d * d + 2.0 * cab + 2.0 * d * (sb - sa)) / 8.0;
        (tmp.abs() <= 1.0 + 1e-10).then(|| {
            let p = mod2pi(TAU - tmp.clamp(-1.0, 1.0).acos());
            let t = mod2pi(-a - (ca - cb).atan2(d + sa - sb) + p / 2.0);
            [t, p, mod2pi(b - a - t + p)]
        })
    });

    let (word, p) = best?;
    if p.iter().sum::<f64>() * radius <= 1e-12 {
        return None;
    }
    Some(DubinsPath {
        start: from,
        radius,
        segments: [(word[0], p[0] * radius), (word[1], p[1] * radius), (word[2], p[2] * radius)],
    })
}

/// Steering result: per-step heading increments and the poses the
/// deterministic car visits (`controls.len() + 1` entries).
#[derive(Clone, Debug, PartialEq)]
pub struct Steer {
    pub path: Option<DubinsPath>,
    pub controls: Vec<f64>,
    pub poses: Vec<Pose>,
}

/// Poses of the deterministic unit-step car under `controls`.
pub fn simulate_controls(from: Pose, speed: f64, controls: &[f64]) -> Vec<Pose> {
    let mut out = Vec::with_capacity(controls.len() + 1);
    let mut p = from;
    out.push(p);
    for &u in controls {
        p = Pose::new(p.x + speed * p.theta.cos(), p.y + speed * p.theta.sin(), p.theta + u);
        out.push(p);
    }
    out
}

/// Tracks the shortest Dubins path at constant `speed`. Step `k` turns by the
/// path's heading change over arc length `[k v, (k+1) v]`, so arcs get the
/// constant increment `v / R` and straights get zero.
pub fn dubins_steer(from: Pose, to: Pose, speed: f64, turn_radius: f64) -> Result<Steer> {
    if !(speed > 0.0) || !(turn_radius > 0.0) {
        return Err(Error::InvalidArgument("speed and turn radius must be positive".into()));
    }
    let Some(path) = dubins_shortest(from, to, turn_radius) else {
        return Ok(Steer { path: None, controls: Vec::new(), poses: vec![from] });
    };
    let len = path.length();
    let n = (len / speed - 1e-9).ceil().max(1.0) as usize;
    let controls: Vec<f64> =
        (0..n).map(|k| path.turned(((k + 1) as f64 * speed).min(len)) - path.turned(k as f64 * speed)).collect();
    let poses = simulate_controls(from, speed, &controls);
    Ok(Steer { path: Some(path), controls, poses })
}

/// As [`dubins_steer`], failing if the deterministic track leaves `bounds`
/// (`[xmin, xmax, ymin, ymax]`).
pub fn dubins_steer_within(from: Pose, to: Pose, speed: f64, turn_radius: f64, bounds: [f64; 4]) -> Result<Steer> {
    let steer = dubins_steer(from, to, speed, turn_radius)?;
    let [x0, x1, y0, y1] = bounds;
    if steer.poses.iter().any(|p| p.x < x0 || p.x > x1 || p.y < y0 || p.y > y1) {
        return Err(Error::Steering("path leaves the workspace".into()));
    }
    Ok(steer)
}
