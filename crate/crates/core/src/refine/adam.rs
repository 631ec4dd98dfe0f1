use std::io::Write;

use crate::config::RefineConfig;
use crate::error::{Error, Result};
use crate::grid::PixelGrid;

use super::loss::{LossBreakdown, LossWeights, Objective, RefineInputs};

/// Optimized depth and the loss at every iterate (`steps + 1` entries).
#[derive(Debug, Clone)]
pub struct Refinement {
    pub depth: PixelGrid,
    pub trace: Vec<LossBreakdown>,
}

/// Adam with bias-corrected moments on raw per-pixel depth.
///
/// Depth is clamped to `cfg.depth_floor` after every update.
pub fn refine_depth(depth_init: &PixelGrid, inputs: &RefineInputs, cfg: &RefineConfig) -> Result<Refinement> {
    inputs.check(depth_init)?;
    let objective = Objective::new(inputs, LossWeights::from(cfg));
    let n = depth_init.len();
    let mut depth = depth_init.data().to_vec();
    let mut grad = vec![0.0; n];
    let mut m = vec![0.0; n];
    let mut v = vec![0.0; n];
    let mut trace = Vec::with_capacity(cfg.steps + 1);
    let (b1, b2) = (cfg.adam_beta1, cfg.adam_beta2);
    let mut b1t = 1.0;
    let mut b2t = 1.0;

    for step in 0..cfg.steps {
        let loss = objective.evaluate(&depth, Some(&mut grad));
        if !loss.total.is_finite() {
            return Err(Error::NonFiniteLoss { step });
        }
        trace.push(loss);
        b1t *= b1;
        b2t *= b2;
        for i in 0..n {
            let g = grad[i];
            m[i] = b1 * m[i] + (1.0 - b1) * g;
            v[i] = b2 * v[i] + (1.0 - b2) * g * g;
            let m_hat = m[i] / (1.0 - b1t);
            let v_hat = v[i] / (1.0 - b2t);
            depth[i] -= cfg.learning_rate * m_hat / (v_hat.sqrt() + cfg.adam_epsilon);
            depth[i] = depth[i].max(cfg.depth_floor);
        }
    }
    let last = objective.evaluate(&depth, None);
    if !last.total.is_finite() {
        return Err(Error::NonFiniteLoss { step: cfg.steps });
    }
    trace.push(last);

    Ok(Refinement {
        depth: PixelGrid::new(depth_init.width(), depth_init.height(), 1, depth)?,
        trace,
    })
}

/// Writes one `step normal continuity depth total` line per iterate.
pub fn write_loss_trace(trace: &[LossBreakdown], mut out: impl Write) -> std::io::Result<()> {
    writeln!(out, "# step normal continuity depth total")?;
    for (i, l) in trace.iter().enumerate() {
        writeln!(
            out,
            "{i} {:e} {:e} {:e} {:e}",
            l.normal_loss, l.continuity_loss, l.depth_loss, l.total
        )?;
    }
    Ok(())
}
