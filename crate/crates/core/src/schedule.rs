//! Adaptive risk levels and the effective-sample-size budget rule.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::order::ceil_ratio;

/// Current risk level `α_k`, target `α*`, and the previous gradient norm.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RiskSchedule {
    alpha_current: f64,
    alpha_target: f64,
    prev_grad_norm: Option<f64>,
}

impl RiskSchedule {
    pub fn new(alpha_init: f64, alpha_target: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&alpha_target) {
            return Err(Error::input(format!("target risk level {alpha_target} is outside [0, 1)")));
        }
        if !(alpha_init >= 0.0 && alpha_init <= alpha_target) {
            return Err(Error::input(format!(
                "initial risk level {alpha_init} is outside [0, {alpha_target}]"
            )));
        }
        Ok(RiskSchedule {
            alpha_current: alpha_init,
            alpha_target,
            prev_grad_norm: None,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha_current
    }

    pub fn target(&self) -> f64 {
        self.alpha_target
    }

    pub fn prev_grad_norm(&self) -> Option<f64> {
        self.prev_grad_norm
    }

    /// One step of the gradient-ratio rule.
    ///
    /// When the norm drops from `g_prev` to `g`, the gap to the target shrinks by
    /// the factor `g / g_prev`; otherwise the level is held. The stored norm is
    /// always replaced by `g`.
    pub fn update(&self, grad_norm: f64) -> Result<Self> {
        if !grad_norm.is_finite() || grad_norm < 0.0 {
            return Err(Error::input(format!("gradient norm {grad_norm} must be finite and nonnegative")));
        }
        let mut next = *self;
        next.prev_grad_norm = Some(grad_norm);
        if let Some(prev) = self.prev_grad_norm {
            if grad_norm < prev {
                let gap = self.alpha_target - self.alpha_current;
                let alpha = self.alpha_target - (grad_norm / prev) * gap;
                // rounding must never undo monotonicity or overshoot
                next.alpha_current = alpha.clamp(self.alpha_current, self.alpha_target);
            }
        }
        Ok(next)
    }
}

pub fn update_risk_level(schedule: &RiskSchedule, grad_norm: f64) -> Result<RiskSchedule> {
    schedule.update(grad_norm)
}

/// Inner sample size `⌈effective_size / (1 - alpha)⌉` keeping `(1 - α) M` fixed.
pub fn inner_sample_size(alpha: f64, effective_size: usize) -> Result<usize> {
    if !(0.0..1.0).contains(&alpha) {
        return Err(Error::input(format!("risk level {alpha} is outside [0, 1)")));
    }
    if effective_size == 0 {
        return Err(Error::input("effective sample size must be at least 1"));
    }
    Ok(ceil_ratio(effective_size as f64, 1.0 - alpha) as usize)
}
