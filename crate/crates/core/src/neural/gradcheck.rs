use super::math::TensorSpec;

#[derive(Debug, Clone, PartialEq)]
pub struct TensorCheck {
    pub name: String,
    pub max_rel_error: f64,
    pub worst_index: usize,
}

/// Relative error |a − n| / max(|a| + |n|, floor), which stays meaningful
/// when both gradients are near zero.
pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    let denom = (analytic.abs() + numeric.abs()).max(1e-8);
    (analytic - numeric).abs() / denom
}

/// Compare an analytic gradient against central differences of `f`,
/// tensor by tensor.
pub fn gradient_check<F>(f: F, params: &[f64], analytic: &[f64], layout: &[TensorSpec], h: f64) -> Vec<TensorCheck>
where
    F: Fn(&[f64]) -> f64,
{
    let mut work = params.to_vec();
    layout
        .iter()
        .map(|spec| {
            let mut worst = (0.0, spec.offset);
            for i in spec.range() {
                let orig = work[i];
                work[i] = orig + h;
                let up = f(&work);
                work[i] = orig - h;
                let down = f(&work);
                work[i] = orig;
                let numeric = (up - down) / (2.0 * h);
                let err = relative_error(analytic[i], numeric);
                if err > worst.0 {
                    worst = (err, i);
                }
            }
            TensorCheck {
                name: spec.name.clone(),
                max_rel_error: worst.0,
                worst_index: worst.1,
            }
        })
        .collect()
}
