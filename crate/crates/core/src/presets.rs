//! Built-in systems.

use crate::error::Result;
use crate::sysspec::{trig_encode, PolynomialSystem, SystemSpec};

/// Stochastic Dubins car with speed and heading disturbances.
pub const DUBINS: &str = "\
# Dubins car
state x y v theta
angle theta(c, s)
disturbance w_v w_theta
dyn x' = x + v*cos(theta)
dyn y' = y + v*sin(theta)
dyn v' = v + w_v
dyn theta' = theta + w_theta
independent {v} {theta}
moments x y x*y x^2 y^2
dist w_v = beta(10, 1000)
dist w_theta = gaussian(0.04, 0.03)
init v = 1
";

pub fn dubins_spec() -> Result<SystemSpec> {
    SystemSpec::parse(DUBINS)
}

/// The encoded Dubins system `(x, y, v, c, s)` with the preset dependence graph.
pub fn dubins_system() -> Result<PolynomialSystem> {
    trig_encode(&dubins_spec()?)
}
