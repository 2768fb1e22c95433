//! Brute-force minimisation of the scalar prox objective.
//!
//! Only [`scalar_objective`] is used here, never the closed-form prox, so these
//! routines can be used to check it.

use crate::penalty::{scalar_objective, PenaltyParams};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridMinimum {
    pub argmin: f64,
    pub value: f64,
}

/// Minimise `objective` over `lo, lo + step, ...` up to and including `hi`.
pub fn grid_minimize(objective: impl Fn(f64) -> f64, lo: f64, hi: f64, step: f64) -> GridMinimum {
    assert!(
        step > 0.0 && hi >= lo,
        "empty grid [{lo}, {hi}] with step {step}"
    );
    let count = ((hi - lo) / step).floor() as usize;
    let mut best = GridMinimum {
        argmin: lo,
        value: objective(lo),
    };
    for i in 1..=count + 1 {
        let beta = if i > count { hi } else { lo + i as f64 * step };
        let value = objective(beta);
        if value < best.value {
            best = GridMinimum {
                argmin: beta,
                value,
            };
        }
    }
    best
}

/// Grid search for `argmin_beta (beta - gamma)^2 + lambda rho_a(beta)` on the
/// segment between 0 and `gamma`, which contains every minimiser. Both
/// endpoints are evaluated exactly.
pub fn prox_grid(p: PenaltyParams, gamma: f64, step: f64) -> GridMinimum {
    let (lo, hi) = if gamma < 0.0 {
        (gamma, 0.0)
    } else {
        (0.0, gamma)
    };
    let found = grid_minimize(|b| scalar_objective(p, b, gamma), lo, hi, step);
    let zero = scalar_objective(p, 0.0, gamma);
    if zero <= found.value {
        GridMinimum {
            argmin: 0.0,
            value: zero,
        }
    } else {
        found
    }
}

/// Two-level grid search: a `1e-3` pass over the segment, then a `1e-7` pass
/// around the best nonzero coarse point, compared against `beta = 0`.
pub fn prox_refined(p: PenaltyParams, gamma: f64) -> GridMinimum {
    let coarse_step = 1e-3;
    let fine_step = 1e-7;
    let (lo, hi) = if gamma < 0.0 {
        (gamma, 0.0)
    } else {
        (0.0, gamma)
    };
    let zero = GridMinimum {
        argmin: 0.0,
        value: scalar_objective(p, 0.0, gamma),
    };
    if hi - lo <= coarse_step {
        return prox_grid(p, gamma, fine_step);
    }
    // coarse pass skipping beta = 0 so the nonzero basin is located
    let objective = |b: f64| {
        if b == 0.0 {
            f64::INFINITY
        } else {
            scalar_objective(p, b, gamma)
        }
    };
    let coarse = grid_minimize(objective, lo, hi, coarse_step);
    let fine = grid_minimize(
        objective,
        (coarse.argmin - 2.0 * coarse_step).max(lo),
        (coarse.argmin + 2.0 * coarse_step).min(hi),
        fine_step,
    );
    if zero.value <= fine.value {
        zero
    } else {
        fine
    }
}
