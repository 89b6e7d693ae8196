use super::spec::{discretize, FisSpec};
use super::FisError;

/// Reference single-controller Mamdani evaluation with plain per-rule loops.
///
/// Rules are clipped and merged point by point on the output grid rather than
/// through per-set activations, so it reaches the crisp value by a different
/// route than the batch engine.
pub fn evaluate_scalar(x: &[f64], spec: &FisSpec) -> Result<f64, FisError> {
    if x.len() != spec.n_inputs() {
        return Err(FisError::Dimension {
            what: "input vector",
            expected: spec.n_inputs(),
            got: x.len(),
        });
    }

    let strengths: Vec<f64> = spec
        .rules()
        .rows()
        .iter()
        .map(|row| {
            spec.inputs()
                .iter()
                .zip(row)
                .zip(x)
                .map(|((part, &idx), &xi)| part.sets()[idx - 1].membership(part.clamp(xi)))
                .fold(1.0, f64::min)
        })
        .collect();

    let out = spec.output();
    let (lo, hi) = out.universe();
    let mut num = 0.0;
    let mut den = 0.0;
    for xo in discretize(lo, hi, spec.n_dis()) {
        let mut mu = 0.0f64;
        for (row, &s) in spec.rules().rows().iter().zip(&strengths) {
            let set = &out.sets()[row[row.len() - 1] - 1];
            mu = mu.max(s.min(set.membership(xo)));
        }
        num += xo * mu;
        den += mu;
    }
    Ok(if den > 0.0 {
        (num / den).clamp(lo, hi)
    } else {
        0.5 * (lo + hi)
    })
}
