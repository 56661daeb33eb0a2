use crate::embedding::EmbeddingSet;
use crate::error::Result;
use crate::geometry::{projections, GenderDirection};

use super::{AuditContext, Experiment, ExperimentResult};

/// Largest and mean absolute projection on `g` over each audited vocabulary.
/// The debiased side is skipped when its dimensionality differs from `g`.
pub fn projection_summary(
    biased: &EmbeddingSet,
    debiased: &EmbeddingSet,
    g: &GenderDirection,
) -> Result<ExperimentResult> {
    let mut result = ExperimentResult::new("projection");
    let mut record = |phase: &str, emb: &EmbeddingSet| -> Result<()> {
        let proj = projections(emb, g)?;
        let max = proj.iter().fold(0.0f64, |m, p| m.max(p.abs()));
        let mean = proj.iter().map(|p| p.abs()).sum::<f64>() / proj.len().max(1) as f64;
        result
            .scalar(format!("max_abs_projection_{phase}"), max)
            .scalar(format!("mean_abs_projection_{phase}"), mean)
            .scalar(format!("n_{phase}"), proj.len() as f64);
        Ok(())
    };
    record("before", biased)?;
    if debiased.dim() == g.dim() {
        record("after", debiased)?;
    }
    result.setting("direction", g.method);
    Ok(result)
}

pub struct ProjectionExperiment;

impl Experiment for ProjectionExperiment {
    fn name(&self) -> &'static str {
        "projection"
    }

    fn description(&self) -> &'static str {
        "residual bias-by-projection over the audited vocabulary"
    }

    fn run(&self, ctx: &AuditContext<'_>) -> Result<ExperimentResult> {
        projection_summary(ctx.biased, ctx.debiased, ctx.direction)
    }
}
