//! Turbine and torque-controller parameters.

use crate::sim::PiecewiseLinear;

use super::WindError;

/// Betz limit: no performance coefficient above this is physical.
pub const BETZ_LIMIT: f64 = 0.593;

/// A tabulated rotor coefficient versus tip-speed ratio. Clamps to the end
/// values outside the tabulated range.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerCurve {
    table: PiecewiseLinear,
}

impl PowerCurve {
    /// Performance coefficient curve; values must lie in [0, 0.593].
    pub fn power_coefficient(points: Vec<(f64, f64)>) -> Result<Self, WindError> {
        Self::bounded(points, 0.0, BETZ_LIMIT, "cp curve")
    }

    /// Thrust coefficient curve; values must lie in [0, 1).
    pub fn thrust_coefficient(points: Vec<(f64, f64)>) -> Result<Self, WindError> {
        let curve = Self::bounded(points, 0.0, 1.0, "ct curve")?;
        if curve.table.y_values().iter().any(|&y| y >= 1.0) {
            return Err(WindError::Invalid {
                what: "ct curve",
                why: "thrust coefficient must stay below 1".into(),
            });
        }
        Ok(curve)
    }

    fn bounded(
        points: Vec<(f64, f64)>,
        lo: f64,
        hi: f64,
        what: &'static str,
    ) -> Result<Self, WindError> {
        let table = PiecewiseLinear::from_pairs(points).map_err(|e| WindError::Invalid {
            what,
            why: e.to_string(),
        })?;
        if table.x_min() < 0.0 {
            return Err(WindError::Invalid {
                what,
                why: "tip-speed ratio must be nonnegative".into(),
            });
        }
        for (x, y) in table.breakpoints() {
            if y < lo || y > hi {
                return Err(WindError::Invalid {
                    what,
                    why: format!("value {y} at lambda={x} outside [{lo}, {hi}]"),
                });
            }
        }
        Ok(Self { table })
    }

    pub fn value(&self, lambda: f64) -> f64 {
        self.table.eval(lambda)
    }

    /// Segment slope at `lambda` (zero in the clamped regions).
    pub fn slope(&self, lambda: f64) -> f64 {
        self.table.slope(lambda)
    }

    /// Largest tabulated value.
    pub fn max_value(&self) -> f64 {
        self.table
            .y_values()
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Default performance coefficient table: peak 0.48 at tip-speed ratio 7.55,
/// shaped like a 5 MW class three-blade rotor at fine pitch.
pub fn default_cp_points() -> Vec<(f64, f64)> {
    vec![
        (1.0, 0.0),
        (2.0, 0.05),
        (3.0, 0.12),
        (4.0, 0.22),
        (5.0, 0.32),
        (6.0, 0.41),
        (7.0, 0.465),
        (7.55, 0.48),
        (8.5, 0.468),
        (10.0, 0.42),
        (12.0, 0.32),
        (14.0, 0.21),
        (16.0, 0.11),
        (18.0, 0.03),
        (19.0, 0.0),
    ]
}

/// Default thrust coefficient table for the same rotor; stays below 1.
pub fn default_ct_points() -> Vec<(f64, f64)> {
    vec![
        (1.0, 0.10),
        (3.0, 0.30),
        (5.0, 0.55),
        (7.0, 0.75),
        (7.55, 0.78),
        (9.0, 0.83),
        (11.0, 0.88),
        (14.0, 0.93),
        (19.0, 0.97),
    ]
}

/// Physical constants of one turbine.
#[derive(Debug, Clone, PartialEq)]
pub struct TurbineParams {
    /// Air density, kg/m^3.
    pub rho: f64,
    /// Rotor radius, m.
    pub r_r: f64,
    /// Rotor swept area, m^2. Must equal pi*r_r^2.
    pub a_r: f64,
    /// Rotor-side inertia, kg*m^2.
    pub j_r: f64,
    /// Nameplate power, W. Caps the available-power estimate only.
    pub rated_power: f64,
    /// Largest generator torque the converter can realize, N*m.
    pub tg_max: f64,
    /// Effective wind speeds are floored here before use, m/s.
    pub u_min: f64,
    /// Rotor speeds are floored here after integration, rad/s.
    pub omega_floor: f64,
    pub cp: PowerCurve,
    pub ct: PowerCurve,
}

impl TurbineParams {
    pub fn new(
        rho: f64,
        r_r: f64,
        j_r: f64,
        rated_power: f64,
        tg_max: f64,
        u_min: f64,
        omega_floor: f64,
        cp: PowerCurve,
        ct: PowerCurve,
    ) -> Result<Self, WindError> {
        let p = Self {
            rho,
            r_r,
            a_r: std::f64::consts::PI * r_r * r_r,
            j_r,
            rated_power,
            tg_max,
            u_min,
            omega_floor,
            cp,
            ct,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), WindError> {
        let positive = [
            ("rho", self.rho),
            ("r_r", self.r_r),
            ("a_r", self.a_r),
            ("j_r", self.j_r),
            ("rated_power", self.rated_power),
            ("tg_max", self.tg_max),
            ("u_min", self.u_min),
            ("omega_floor", self.omega_floor),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(WindError::Invalid {
                    what: "turbine params",
                    why: format!("{name} must be positive and finite, got {v}"),
                });
            }
        }
        let expect = std::f64::consts::PI * self.r_r * self.r_r;
        if (self.a_r - expect).abs() > 1e-9 * expect {
            return Err(WindError::Invalid {
                what: "turbine params",
                why: format!("a_r={} does not match pi*r_r^2={expect}", self.a_r),
            });
        }
        Ok(())
    }
}

impl Default for TurbineParams {
    /// 5 MW class rotor: 63 m radius, 3.88e7 kg*m^2 inertia. The torque limit
    /// is a model-level value allowing the torque loop to hold the tip-speed
    /// barrier at high wind without a pitch system.
    fn default() -> Self {
        Self::new(
            1.225,
            63.0,
            3.8759228e7,
            5.0e6,
            1.0e7,
            0.5,
            0.1,
            PowerCurve::power_coefficient(default_cp_points()).unwrap(),
            PowerCurve::thrust_coefficient(default_ct_points()).unwrap(),
        )
        .unwrap()
    }
}

/// Torque tracking and barrier parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindControllerParams {
    /// Tracking gain replacing the inverse curve slope in the torque law.
    pub k: f64,
    /// Barrier decay rate for the tip-speed-ratio constraint, 1/s.
    pub c_w: f64,
    /// Tip-speed ratio the rotor must stay below.
    pub lambda_barrier: f64,
}

impl WindControllerParams {
    pub fn new(k: f64, c_w: f64, lambda_barrier: f64) -> Result<Self, WindError> {
        if !(k > 0.0) || !k.is_finite() {
            return Err(WindError::Invalid {
                what: "wind controller",
                why: format!("gain k must be positive, got {k}"),
            });
        }
        if !(c_w > 0.0) || !c_w.is_finite() {
            return Err(WindError::Invalid {
                what: "wind controller",
                why: format!("barrier rate c_w must be positive, got {c_w}"),
            });
        }
        if !(lambda_barrier > 0.0) || !lambda_barrier.is_finite() {
            return Err(WindError::Invalid {
                what: "wind controller",
                why: format!("lambda_barrier must be positive, got {lambda_barrier}"),
            });
        }
        Ok(Self {
            k,
            c_w,
            lambda_barrier,
        })
    }
}

impl Default for WindControllerParams {
    /// Barrier at 95% of the optimal tip-speed ratio of the default curve.
    fn default() -> Self {
        Self::new(2.0, 1.0, 0.95 * 7.55).unwrap()
    }
}
