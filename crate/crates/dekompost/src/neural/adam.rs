//! Adam optimizer with bias correction, β1=0.9, β2=0.999, ε=1e-8.

use crate::mat::Matrix;

use super::{LabelerParams, NeuralError};

pub const BETA1: f64 = 0.9;
pub const BETA2: f64 = 0.999;
pub const EPSILON: f64 = 1e-8;

/// First- and second-moment accumulators shaped like the parameter blocks.
#[derive(Debug, Clone)]
pub struct AdamState {
    step: u64,
    m: Vec<Matrix>,
    v: Vec<Matrix>,
}

impl AdamState {
    pub fn new(params: &LabelerParams) -> AdamState {
        let shapes: Vec<Matrix> = params
            .blocks()
            .into_iter()
            .map(|(_, b)| Matrix::zeros(b.rows(), b.cols()))
            .collect();
        AdamState {
            step: 0,
            m: shapes.clone(),
            v: shapes,
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }
}

/// One Adam update in place. The gradient container must mirror the
/// parameter block shapes exactly.
pub fn adam_step(
    params: &mut LabelerParams,
    grads: &LabelerParams,
    state: &mut AdamState,
    lr: f64,
) -> Result<(), NeuralError> {
    let gblocks = grads.blocks();
    let mut pblocks = params.blocks_mut();
    if gblocks.len() != pblocks.len() || gblocks.len() != state.m.len() {
        return Err(NeuralError::ShapeMismatch);
    }
    for ((_, p), (_, g)) in pblocks.iter().zip(gblocks.iter()) {
        if !p.same_shape(g) {
            return Err(NeuralError::ShapeMismatch);
        }
    }

    state.step += 1;
    let bc1 = 1.0 - BETA1.powi(state.step as i32);
    let bc2 = 1.0 - BETA2.powi(state.step as i32);

    for (k, (_, p)) in pblocks.iter_mut().enumerate() {
        let g = gblocks[k].1.data();
        let m = state.m[k].data_mut();
        let v = state.v[k].data_mut();
        let pd = p.data_mut();
        for i in 0..pd.len() {
            m[i] = BETA1 * m[i] + (1.0 - BETA1) * g[i];
            v[i] = BETA2 * v[i] + (1.0 - BETA2) * g[i] * g[i];
            let m_hat = m[i] / bc1;
            let v_hat = v[i] / bc2;
            pd[i] -= lr * m_hat / (v_hat.sqrt() + EPSILON);
        }
    }
    Ok(())
}
