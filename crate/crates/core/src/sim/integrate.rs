//! Classical fourth-order Runge-Kutta, one fixed step at a time.
//!
//! The plant dynamics are autonomous within a step: exogenous inputs and
//! control commands are sampled at the step start and held (zero-order hold),
//! so the derivative closure sees state only.

use super::SimError;

/// Advance `state` by one RK4 step of length `dt`.
///
/// `dt` must be positive and finite. Any NaN or infinite component coming out
/// of a stage evaluation aborts the step with
/// [`SimError::NonFiniteDerivative`]; the original state is untouched.
pub fn integrate_step<const N: usize, F>(
    state: &[f64; N],
    derivative_fn: F,
    dt: f64,
) -> Result<[f64; N], SimError>
where
    F: Fn(&[f64; N]) -> [f64; N],
{
    assert!(dt > 0.0 && dt.is_finite(), "dt must be positive, got {dt}");

    let check = |k: &[f64; N], stage: usize| -> Result<(), SimError> {
        for (component, v) in k.iter().enumerate() {
            if !v.is_finite() {
                return Err(SimError::NonFiniteDerivative { stage, component });
            }
        }
        Ok(())
    };

    let k1 = derivative_fn(state);
    check(&k1, 1)?;

    let mut mid = *state;
    for i in 0..N {
        mid[i] = state[i] + 0.5 * dt * k1[i];
    }
    let k2 = derivative_fn(&mid);
    check(&k2, 2)?;

    for i in 0..N {
        mid[i] = state[i] + 0.5 * dt * k2[i];
    }
    let k3 = derivative_fn(&mid);
    check(&k3, 3)?;

    for i in 0..N {
        mid[i] = state[i] + dt * k3[i];
    }
    let k4 = derivative_fn(&mid);
    check(&k4, 4)?;

    let mut next = *state;
    for i in 0..N {
        next[i] = state[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    Ok(next)
}
