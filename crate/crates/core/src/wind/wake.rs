//! Steady-state engineering wake model.
//!
//! A rotor extracting momentum leaves a velocity deficit behind it. The
//! deficit scales with the source turbine's axial induction, spreads with a
//! logistically expanding wake diameter, and deficits from several upstream
//! turbines combine by root-sum-square. Only turbines in the same column
//! interact; the model is quasi-static (re-evaluated from current rotor
//! states each step, no advection delay).

use super::{TurbineParams, WindError};

/// Axial induction from the thrust coefficient: `a = (1 - sqrt(1 - ct)) / 2`.
pub fn axial_induction(ct: f64) -> Result<f64, WindError> {
    if !(0.0..1.0).contains(&ct) {
        return Err(WindError::CtOutOfRange { ct });
    }
    Ok(0.5 * (1.0 - (1.0 - ct).sqrt()))
}

/// `ln(1 + e^x)` without overflow for large `x`.
fn softplus(x: f64) -> f64 {
    if x > 30.0 {
        // e^-x below 1e-13: ln(1+e^x) = x + ln(1+e^-x)
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// Velocity deficit a source turbine with induction `a` imprints on a point
/// `dx` metres downstream, given the wind speed `u_source` at the source.
///
/// The normalized wake diameter grows as `d_w = 1 + k_w * ln(1 + e^(dx/r_r))`
/// and the deficit is `u_source * (2a / d_w^2) * (1 + erf(dx / (r_r*sqrt(2))))`.
pub fn wake_deficit(u_source: f64, a: f64, dx: f64, r_r: f64, k_w: f64) -> f64 {
    debug_assert!(dx > 0.0, "deficit is defined downstream only");
    let d_w = 1.0 + k_w * softplus(dx / r_r);
    let spread = 1.0 + libm::erf(dx / (r_r * std::f64::consts::SQRT_2));
    u_source * (2.0 * a / (d_w * d_w)) * spread
}

/// Geometric arrangement of the farm and its wake interaction graph.
#[derive(Debug, Clone, PartialEq)]
pub struct FarmLayout {
    /// Streamwise coordinate of each turbine, m.
    positions: Vec<f64>,
    /// Column id of each turbine; only same-column turbines interact.
    columns: Vec<usize>,
    /// Per-turbine list of upstream turbine indices (same column, strictly
    /// smaller streamwise coordinate).
    graph: Vec<Vec<usize>>,
    /// Turbine indices sorted by streamwise coordinate, for one-pass sweeps.
    order: Vec<usize>,
    /// Wake expansion coefficient.
    pub k_w: f64,
}

impl FarmLayout {
    /// Build a layout from explicit positions and column assignments.
    pub fn new(positions: Vec<f64>, columns: Vec<usize>, k_w: f64) -> Result<Self, WindError> {
        if positions.is_empty() {
            return Err(WindError::Invalid {
                what: "farm layout",
                why: "no turbines".into(),
            });
        }
        if positions.len() != columns.len() {
            return Err(WindError::Invalid {
                what: "farm layout",
                why: format!(
                    "{} positions but {} column ids",
                    positions.len(),
                    columns.len()
                ),
            });
        }
        if !(k_w > 0.0) || !k_w.is_finite() {
            return Err(WindError::Invalid {
                what: "farm layout",
                why: format!("k_w must be positive, got {k_w}"),
            });
        }
        let n = positions.len();
        let mut graph = vec![Vec::new(); n];
        for j in 0..n {
            for i in 0..n {
                if i != j && columns[i] == columns[j] {
                    if positions[i] == positions[j] {
                        return Err(WindError::Invalid {
                            what: "farm layout",
                            why: format!("turbines {i} and {j} share a column and position"),
                        });
                    }
                    if positions[i] < positions[j] {
                        graph[j].push(i);
                    }
                }
            }
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| positions[a].total_cmp(&positions[b]));
        Ok(Self {
            positions,
            columns,
            graph,
            order,
            k_w,
        })
    }

    /// Regular grid: `n_rows` turbines behind each other in each of `n_cols`
    /// columns, `spacing_m` apart streamwise. Turbine index is
    /// `col * n_rows + row`, row 0 furthest upwind.
    pub fn rectangular(
        n_rows: usize,
        n_cols: usize,
        spacing_m: f64,
        k_w: f64,
    ) -> Result<Self, WindError> {
        if n_rows == 0 || n_cols == 0 {
            return Err(WindError::Invalid {
                what: "farm layout",
                why: "need at least one row and one column".into(),
            });
        }
        if !(spacing_m > 0.0) {
            return Err(WindError::Invalid {
                what: "farm layout",
                why: format!("row spacing must be positive, got {spacing_m}"),
            });
        }
        let mut positions = Vec::with_capacity(n_rows * n_cols);
        let mut columns = Vec::with_capacity(n_rows * n_cols);
        for col in 0..n_cols {
            for row in 0..n_rows {
                positions.push(row as f64 * spacing_m);
                columns.push(col);
            }
        }
        Self::new(positions, columns, k_w)
    }

    pub fn n_turbines(&self) -> usize {
        self.positions.len()
    }

    pub fn upstream_of(&self, j: usize) -> &[usize] {
        &self.graph[j]
    }

    pub fn position(&self, j: usize) -> f64 {
        self.positions[j]
    }

    pub fn sweep_order(&self) -> &[usize] {
        &self.order
    }
}

/// Wind speed at every turbine given free-stream speed `u_inf` and current
/// rotor speeds.
///
/// Single upwind-to-downwind sweep: each turbine's induction is evaluated at
/// its own effective wind (already known when it is reached), and the
/// deficits imprinted on a downstream turbine combine as
/// `u_j = u_inf - sqrt(sum_i deficit_i^2)`. Results are floored at
/// `params.u_min`.
pub fn effective_wind_field(
    layout: &FarmLayout,
    params: &TurbineParams,
    omegas: &[f64],
    u_inf: f64,
) -> Result<Vec<f64>, WindError> {
    if !(u_inf > 0.0) {
        return Err(WindError::NonPositiveWind { u: u_inf });
    }
    let n = layout.n_turbines();
    assert_eq!(omegas.len(), n, "one rotor speed per turbine");

    let mut u_eff = vec![0.0; n];
    let mut induction = vec![0.0; n];
    for &j in layout.sweep_order() {
        let mut sum_sq = 0.0;
        for &i in layout.upstream_of(j) {
            let dx = layout.position(j) - layout.position(i);
            let d = wake_deficit(u_eff[i], induction[i], dx, params.r_r, layout.k_w);
            sum_sq += d * d;
        }
        u_eff[j] = (u_inf - sum_sq.sqrt()).max(params.u_min);
        let lambda = params.r_r * omegas[j] / u_eff[j];
        induction[j] = axial_induction(params.ct.value(lambda))?;
    }
    Ok(u_eff)
}
