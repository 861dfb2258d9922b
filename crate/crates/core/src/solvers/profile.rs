use super::QuadObjective;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Exact minimum of `w_j(λ − m_j)² + Σ_{k≠j} w_k (m_k − λ)_+²` over `λ`,
/// returned as `(value, λ*)`.
///
/// This is the weighted sum of squares over `{v : v_j ≥ v_k ∀k}`: at the
/// optimum `v_j = λ` and `v_k = min(m_k, λ)`. Breakpoints `m_k` are scanned
/// from the top; the first quadratic piece whose stationary point lies on
/// that piece holds the minimizer. When `w_j = 0` and no other arm sits above
/// `λ` the function is flat at zero and the lowest such `λ` is reported.
pub fn min_profile_ssq<T: Real>(obj: &QuadObjective<T>, j: usize) -> Result<(T, T)> {
    let order = sorted_breakpoints(obj)?;
    if j >= obj.dim() {
        return Err(Error::InvalidArgument(format!(
            "arm {j} out of range for {} arms",
            obj.dim()
        )));
    }
    Ok(scan(obj, &order, j))
}

/// [`min_profile_ssq`] for every arm, sharing one sort.
pub fn min_profile_ssq_all<T: Real>(obj: &QuadObjective<T>) -> Result<Vec<(T, T)>> {
    let order = sorted_breakpoints(obj)?;
    Ok((0..obj.dim()).map(|j| scan(obj, &order, j)).collect())
}

/// Indices with positive weight, by target descending (index ascending on ties).
fn sorted_breakpoints<T: Real>(obj: &QuadObjective<T>) -> Result<Vec<usize>> {
    let mut order: Vec<usize> = (0..obj.dim()).filter(|&k| obj.weights()[k] > T::zero()).collect();
    if order.is_empty() {
        return Err(Error::AllWeightsZero);
    }
    let m = obj.targets();
    order.sort_by(|&a, &b| m[b].partial_cmp(&m[a]).unwrap().then(a.cmp(&b)));
    Ok(order)
}

fn scan<T: Real>(obj: &QuadObjective<T>, order: &[usize], j: usize) -> (T, T) {
    let w = obj.weights();
    let m = obj.targets();
    let bps: Vec<usize> = order.iter().copied().filter(|&k| k != j).collect();

    let mut sw = w[j];
    let mut swm = w[j] * m[j];
    let mut lambda = None;
    let mut active = 0;
    for r in 0..=bps.len() {
        let lower = if r == bps.len() { T::neg_infinity() } else { m[bps[r]] };
        if sw > T::zero() {
            // On the top piece only arm j is active; avoid rounding w m / w.
            let stationary = if r == 0 { m[j] } else { swm / sw };
            if stationary >= lower {
                lambda = Some(stationary);
                active = r;
                break;
            }
        } else if r < bps.len() {
            // Flat zero piece above the highest breakpoint.
            lambda = Some(lower);
            active = r;
            break;
        }
        if r < bps.len() {
            let k = bps[r];
            sw += w[k];
            swm += w[k] * m[k];
        }
    }
    // At least one weight is positive, so the scan always terminates above.
    let lambda = lambda.expect("breakpoint scan found a minimizer");
    let mut value = if w[j] > T::zero() {
        w[j] * (lambda - m[j]) * (lambda - m[j])
    } else {
        T::zero()
    };
    for &k in &bps[..active] {
        let gap = m[k] - lambda;
        if gap > T::zero() {
            value += w[k] * gap * gap;
        }
    }
    (value, lambda)
}
