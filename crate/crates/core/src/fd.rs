//! Central finite differences over chart coordinates, Richardson
//! extrapolation, and observed convergence orders.

use nalgebra::DVector;

use crate::error::Result;

/// Residuals at or below this level are floating-point noise; convergence
/// orders measured there are meaningless and are not recorded. Second
/// differences of O(1) fields at steps near 1e-3 carry rounding noise of
/// roughly eps/h^2, which this floor clears with margin.
pub const ORDER_NOISE_FLOOR: f64 = 1e-8;

fn shifted(u: &[f64], axis: usize, delta: f64) -> Vec<f64> {
    let mut v = u.to_vec();
    v[axis] += delta;
    v
}

/// First partial of a scalar field along `axis` by central differences.
pub fn partial_scalar<F>(field: &F, u: &[f64], axis: usize, h: f64) -> Result<f64>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    let up = field(&shifted(u, axis, h))?;
    let dn = field(&shifted(u, axis, -h))?;
    Ok((up - dn) / (2.0 * h))
}

/// First partial of a vector field along `axis` by central differences.
pub fn partial_vector<F>(field: &F, u: &[f64], axis: usize, h: f64) -> Result<DVector<f64>>
where
    F: Fn(&[f64]) -> Result<DVector<f64>>,
{
    let up = field(&shifted(u, axis, h))?;
    let dn = field(&shifted(u, axis, -h))?;
    Ok((up - dn) / (2.0 * h))
}

/// Second partial of a scalar field in directions (i, j). Uses the standard
/// 3-point formula on the diagonal and the 4-point cross formula off it.
pub fn second_partial_scalar<F>(field: &F, u: &[f64], i: usize, j: usize, h: f64) -> Result<f64>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    if i == j {
        let up = field(&shifted(u, i, h))?;
        let mid = field(u)?;
        let dn = field(&shifted(u, i, -h))?;
        Ok((up - 2.0 * mid + dn) / (h * h))
    } else {
        let pp = field(&shifted(&shifted(u, i, h), j, h))?;
        let pm = field(&shifted(&shifted(u, i, h), j, -h))?;
        let mp = field(&shifted(&shifted(u, i, -h), j, h))?;
        let mm = field(&shifted(&shifted(u, i, -h), j, -h))?;
        Ok((pp - pm - mp + mm) / (4.0 * h * h))
    }
}

/// Richardson extrapolation of a second-order central difference computed at
/// steps `h` and `h/2`: error drops from O(h^2) to O(h^4).
pub fn richardson(coarse: f64, fine: f64) -> f64 {
    (4.0 * fine - coarse) / 3.0
}

pub fn richardson_vec(coarse: &DVector<f64>, fine: &DVector<f64>) -> DVector<f64> {
    (fine * 4.0 - coarse) / 3.0
}

/// Observed convergence order from residuals at steps h and h/2. Returns
/// `None` when the h-step residual already sits at the rounding floor:
/// refinement below noise only measures noise.
pub fn observed_order(residual_h: f64, residual_h2: f64) -> Option<f64> {
    if residual_h <= ORDER_NOISE_FLOOR {
        return None;
    }
    if residual_h2 == 0.0 {
        return Some(f64::INFINITY);
    }
    Some((residual_h / residual_h2).log2())
}

/// An order requirement holds when the measured order meets `min_order` or
/// both residuals are at the noise floor.
pub fn order_ok(residual_h: f64, residual_h2: f64, min_order: f64) -> bool {
    match observed_order(residual_h, residual_h2) {
        Some(order) => order >= min_order,
        None => true,
    }
}
