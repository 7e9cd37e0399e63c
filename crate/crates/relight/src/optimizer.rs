//! Adam-based fitting of lighting and depth against a target image.
//!
//! One fit runs the render → loss → backward → update loop single-threaded;
//! the render and backward passes parallelize internally.

use crate::autodiff::{backward, record_and_render};
use crate::geometry::DepthMap;
use crate::losses;
use crate::shading::{ImagePlane, LightingParams};
use crate::shadow::{LightDirection, ShadowConfig};
use crate::vec3::Vec3;
use crate::{RelightError, Result};

#[derive(Debug, Clone, Copy)]
pub struct AdamParams {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamParams {
    fn default() -> Self {
        AdamParams { lr: 1e-4, beta1: 0.9, beta2: 0.999, eps: 1e-8 }
    }
}

/// Per-parameter-group Adam buffers. `t` counts completed steps.
#[derive(Debug, Clone)]
pub struct AdamState {
    pub t: usize,
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub hyper: AdamParams,
}

impl AdamState {
    pub fn new(len: usize, hyper: AdamParams) -> Self {
        AdamState { t: 0, m: vec![0.0; len], v: vec![0.0; len], hyper }
    }
}

/// One bias-corrected Adam update of `params` in place. Gradients must be
/// finite; `name` identifies the parameter group in errors.
pub fn adam_step(
    state: &mut AdamState,
    params: &mut [f64],
    grads: &[f64],
    name: &'static str,
) -> Result<()> {
    if params.len() != state.m.len() || grads.len() != params.len() {
        return Err(RelightError::DimensionMismatch(format!(
            "adam buffers for `{name}`"
        )));
    }
    if grads.iter().any(|g| !g.is_finite()) {
        return Err(RelightError::NonFiniteGradient(name));
    }
    let h = state.hyper;
    state.t += 1;
    let bc1 = 1.0 - h.beta1.powi(state.t as i32);
    let bc2 = 1.0 - h.beta2.powi(state.t as i32);
    for k in 0..params.len() {
        let g = grads[k];
        state.m[k] = h.beta1 * state.m[k] + (1.0 - h.beta1) * g;
        state.v[k] = h.beta2 * state.v[k] + (1.0 - h.beta2) * g * g;
        let m_hat = state.m[k] / bc1;
        let v_hat = state.v[k] / bc2;
        params[k] -= h.lr * m_hat / (v_hat.sqrt() + h.eps);
    }
    Ok(())
}

/// Which parameters the fit is allowed to move.
#[derive(Debug, Clone, Copy, Default)]
pub struct FreeParams {
    pub depth: bool,
    pub ambient: bool,
    pub directional: bool,
    pub omega: bool,
}

impl FreeParams {
    pub fn any(&self) -> bool {
        self.depth || self.ambient || self.directional || self.omega
    }
}

/// Image objective driving the fit. L1's constant-magnitude gradients pair
/// well with Adam's small fixed learning rate; L2 gradients shrink with the
/// residual and close the last stretch slowly.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitLoss {
    ReconL2,
    ReconL1,
}

#[derive(Debug, Clone)]
pub struct FitProblem {
    pub target: ImagePlane,
    pub depth: DepthMap,
    pub albedo: ImagePlane,
    pub lighting: LightingParams,
    pub cfg: ShadowConfig,
    pub free: FreeParams,
    pub loss: FitLoss,
    /// Iteration budget; 0 returns the initialization untouched.
    pub iters: usize,
    pub adam: AdamParams,
    /// Stop when |loss_{k−1} − loss_k| < tol; ≤ 0 disables.
    pub tol: f64,
}

#[derive(Debug, Clone)]
pub struct FitResult {
    pub depth: DepthMap,
    pub lighting: LightingParams,
    /// Loss at the start of each executed iteration.
    pub trace: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

pub fn fit(problem: &FitProblem) -> Result<FitResult> {
    if !problem.free.any() {
        return Err(RelightError::InvalidInput("no free parameters selected".into()));
    }
    let mut depth = problem.depth.clone();
    let mut lighting = problem.lighting;

    let n_depth = depth.width() * depth.height();
    let mut st_depth = AdamState::new(n_depth, problem.adam);
    let mut st_ambient = AdamState::new(1, problem.adam);
    let mut st_directional = AdamState::new(1, problem.adam);
    let mut st_omega = AdamState::new(3, problem.adam);

    let mut trace: Vec<f64> = Vec::new();
    let mut converged = false;
    let mut iterations = 0;

    for it in 0..problem.iters {
        let (image, tape) = record_and_render(&depth, &problem.albedo, &lighting, &problem.cfg)?;
        let (loss, seed) = match problem.loss {
            FitLoss::ReconL2 => (
                losses::recon_loss(&image, &problem.target, &depth.valid)?,
                losses::recon_loss_grad(&image, &problem.target, &depth.valid)?,
            ),
            FitLoss::ReconL1 => (
                losses::l1_recon_loss(&image, &problem.target, &depth.valid)?,
                losses::l1_recon_loss_grad(&image, &problem.target, &depth.valid)?,
            ),
        };
        if !loss.is_finite() {
            return Err(RelightError::Diverged(it));
        }
        if let Some(&prev) = trace.last() {
            if problem.tol > 0.0 && (prev - loss).abs() < problem.tol {
                trace.push(loss);
                converged = true;
                break;
            }
        }
        trace.push(loss);
        iterations = it + 1;

        let grads = backward(&tape, &seed)?;

        if problem.free.depth {
            adam_step(&mut st_depth, depth.values.data_mut(), grads.depth.data(), "depth")?;
        }
        if problem.free.ambient {
            let mut p = [lighting.ambient];
            adam_step(&mut st_ambient, &mut p, &[grads.ambient], "ambient")?;
            lighting = LightingParams::unchecked(lighting.omega, p[0].max(0.0), lighting.directional);
        }
        if problem.free.directional {
            let mut p = [lighting.directional];
            adam_step(&mut st_directional, &mut p, &[grads.directional], "directional")?;
            lighting = LightingParams::unchecked(lighting.omega, lighting.ambient, p[0].max(0.0));
        }
        if problem.free.omega {
            let o = lighting.omega.as_vec();
            let mut p = [o.x, o.y, o.z];
            adam_step(&mut st_omega, &mut p, &[grads.omega.x, grads.omega.y, grads.omega.z], "omega")?;
            let v = Vec3::new(p[0], p[1], p[2])
                .normalized()
                .ok_or(RelightError::NonFiniteGradient("omega"))?;
            lighting = LightingParams::unchecked(LightDirection::new(v)?, lighting.ambient, lighting.directional);
        }
    }

    Ok(FitResult { depth, lighting, trace, iterations, converged })
}
