//! Convex obstacles, workspace and environment files.

use crate::error::{Error, Result};

/// Planar pose: position in metres, heading in radians.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

impl Pose {
    pub fn new(x: f64, y: f64, theta: f64) -> Self {
        Pose { x, y, theta }
    }

    pub fn distance(&self, other: &Pose) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Convex polygon `{p : a_jᵀp + b_j ≤ 0 for all j}` with unit normals.
#[derive(Clone, Debug, PartialEq)]
pub struct Polytope {
    pub halfspaces: Vec<([f64; 2], f64)>,
    pub vertices: Vec<[f64; 2]>,
}

impl Polytope {
    /// Builds the halfspace form from vertices in counterclockwise order.
    pub fn from_ccw_vertices(vertices: &[[f64; 2]]) -> Result<Self> {
        let n = vertices.len();
        if n < 3 {
            return Err(Error::InvalidArgument(format!("obstacle needs at least 3 vertices, got {n}")));
        }
        let mut area2 = 0.0;
        for i in 0..n {
            let (p, q) = (vertices[i], vertices[(i + 1) % n]);
            area2 += p[0] * q[1] - q[0] * p[1];
        }
        if area2 <= 0.0 {
            return Err(Error::InvalidArgument("obstacle vertices must be in counterclockwise order".into()));
        }
        let mut halfspaces = Vec::with_capacity(n);
        for i in 0..n {
            let (p, q, r) = (vertices[i], vertices[(i + 1) % n], vertices[(i + 2) % n]);
            let e = [q[0] - p[0], q[1] - p[1]];
            let len = e[0].hypot(e[1]);
            if len == 0.0 {
                return Err(Error::InvalidArgument("obstacle has a repeated vertex".into()));
            }
            let turn = e[0] * (r[1] - q[1]) - e[1] * (r[0] - q[0]);
            if turn < 0.0 {
                return Err(Error::InvalidArgument("obstacle must be convex".into()));
            }
            let a = [e[1] / len, -e[0] / len];
            let b = (e[0] * p[1] - e[1] * p[0]) / len;
            halfspaces.push((a, b));
        }
        Ok(Polytope { halfspaces, vertices: vertices.to_vec() })
    }

    /// Axis-aligned box `[x0, x1] × [y0, y1]`.
    pub fn rectangle(x0: f64, y0: f64, x1: f64, y1: f64) -> Result<Self> {
        Self::from_ccw_vertices(&[[x0, y0], [x1, y0], [x1, y1], [x0, y1]])
    }

    pub fn contains(&self, p: [f64; 2]) -> bool {
        self.halfspaces.iter().all(|(a, b)| a[0] * p[0] + a[1] * p[1] + b <= 0.0)
    }
}

/// Workspace, obstacles, start pose and goal disc.
#[derive(Clone, Debug, PartialEq)]
pub struct Environment {
    /// `[xmin, xmax, ymin, ymax]`.
    pub bounds: [f64; 4],
    pub obstacles: Vec<Polytope>,
    pub start: Pose,
    pub goal: [f64; 2],
    pub goal_radius: f64,
}

impl Environment {
    pub fn in_bounds(&self, p: [f64; 2]) -> bool {
        let [x0, x1, y0, y1] = self.bounds;
        p[0] >= x0 && p[0] <= x1 && p[1] >= y0 && p[1] <= y1
    }

    pub fn in_collision(&self, p: [f64; 2]) -> bool {
        self.obstacles.iter().any(|o| o.contains(p))
    }

    pub fn in_goal(&self, p: [f64; 2]) -> bool {
        (p[0] - self.goal[0]).hypot(p[1] - self.goal[1]) <= self.goal_radius
    }

    fn validate(&self) -> Result<()> {
        let [x0, x1, y0, y1] = self.bounds;
        if !(x0 < x1 && y0 < y1) {
            return Err(Error::InvalidArgument("workspace bounds are empty".into()));
        }
        let start = [self.start.x, self.start.y];
        if !self.in_bounds(start) {
            return Err(Error::InvalidArgument("start lies outside the workspace".into()));
        }
        if self.in_collision(start) {
            return Err(Error::InvalidArgument("start lies inside an obstacle".into()));
        }
        if !(self.goal_radius > 0.0) {
            return Err(Error::InvalidArgument("goal radius must be positive".into()));
        }
        Ok(())
    }

    pub fn new(
        bounds: [f64; 4],
        obstacles: Vec<Polytope>,
        start: Pose,
        goal: [f64; 2],
        goal_radius: f64,
    ) -> Result<Self> {
        let env = Environment { bounds, obstacles, start, goal, goal_radius };
        env.validate()?;
        Ok(env)
    }

    /// Reads an environment file:
    ///
    /// ```text
    /// bounds 0 100 0 100
    /// start 5 5 0
    /// goal 90 90 5
    /// obstacle 30,20 45,20 45,60 30,60
    /// ```
    pub fn parse(text: &str) -> Result<Self> {
        let mut bounds = None;
        let mut start = None;
        let mut goal = None;
        let mut obstacles = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |m: String| Error::Parse { line: i + 1, col: 1, message: m };
            let mut parts = line.split_whitespace();
            let key = parts.next().unwrap_or_default();
            let rest: Vec<&str> = parts.collect();
            let nums = |want: usize| -> Result<Vec<f64>> {
                if rest.len() != want {
                    return Err(err(format!("`{key}` takes {want} numbers")));
                }
                rest.iter().map(|s| s.parse::<f64>().map_err(|_| err(format!("bad number `{s}`")))).collect()
            };
            match key {
                "bounds" => bounds = Some(nums(4)?),
                "start" => start = Some(nums(3)?),
                "goal" => goal = Some(nums(3)?),
                "obstacle" => {
                    let mut verts = Vec::new();
                    for v in &rest {
                        let (a, b) = v.split_once(',').ok_or_else(|| err(format!("vertex `{v}` must be x,y")))?;
                        let x = a.trim().parse::<f64>().map_err(|_| err(format!("bad number `{a}`")))?;
                        let y = b.trim().parse::<f64>().map_err(|_| err(format!("bad number `{b}`")))?;
                        verts.push([x, y]);
                    }
                    obstacles.push(Polytope::from_ccw_vertices(&verts).map_err(|e| err(e.to_string()))?);
                }
                other => return Err(err(format!("unknown directive `{other}`"))),
            }
        }
        let missing = |k: &str| Error::InvalidArgument(format!("environment file lacks a `{k}` line"));
        let b = bounds.ok_or_else(|| missing("bounds"))?;
        let s = start.ok_or_else(|| missing("start"))?;
        let g = goal.ok_or_else(|| missing("goal"))?;
        Self::new([b[0], b[1], b[2], b[3]], obstacles, Pose::new(s[0], s[1], s[2]), [g[0], g[1]], g[2])
    }
}
