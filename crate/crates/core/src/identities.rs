//! Tensor identities evaluated as numerical residuals: the Laplacian of
//! `|A_V|^2` against its algebraic expansion, the symmetry defect of
//! `nabla A_V`, the Laplacian of `|T|^2`, and the flatness relation
//! `4|H|^2 = c|T|^2`.

use nalgebra::DVector;

use crate::biharmonic::{self, ClassifyTolerances, Verdict};
use crate::error::{Error, Result};
use crate::extrinsic::{self, NormalField, PARALLEL_TOL, TRACE_CONST_TOL};
use crate::fd;
use crate::immersion::ImmersionSpec;

/// One identity check at one chart point. `lhs`/`rhs` are scalar summaries
/// of the two sides; `residual` is the full defect between them. The order
/// is observed from steps `h` and `h/2` and recorded only when the
/// residuals sit above the rounding floor.
#[derive(Debug, Clone)]
pub struct IdentityResidual {
    pub name: String,
    pub u: Vec<f64>,
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
    pub fd_step: f64,
    pub order: Option<f64>,
}

/// Laplace-Beltrami of a chart scalar field with exact metric data at the
/// center: `Delta f = g^{ij}(d_i d_j f - Gamma^k_ij d_k f)`.
pub fn laplace_beltrami<F>(spec: &ImmersionSpec, field: &F, u: &[f64], h: f64) -> Result<f64>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    let data = extrinsic::extrinsic_data(spec, u)?;
    let m = spec.chart_dim();
    let mut grads = Vec::with_capacity(m);
    for k in 0..m {
        grads.push(fd::partial_scalar(field, u, k, h)?);
    }
    let mut lap = 0.0;
    for i in 0..m {
        for j in 0..m {
            let mut v = fd::second_partial_scalar(field, u, i, j, h)?;
            for k in 0..m {
                v -= data.christoffels[k][(i, j)] * grads[k];
            }
            lap += data.metric_inv[(i, j)] * v;
        }
    }
    Ok(lap)
}

fn v_norm_sq_field(spec: &ImmersionSpec, field: NormalField) -> impl Fn(&[f64]) -> Result<f64> + '_ {
    move |q: &[f64]| {
        let data = extrinsic::extrinsic_data(spec, q)?;
        let v = match field {
            NormalField::MeanCurvature => data.h_coeffs.clone(),
            NormalField::FrameIndex(alpha) => {
                let mut e = DVector::zeros(data.normal_dim());
                e[alpha] = 1.0;
                e
            }
        };
        Ok(data.shape_operator(&v).norm_squared())
    }
}

fn check_hypotheses(packet: &extrinsic::DerivativePacket) -> Result<()> {
    if let Some(res) = packet.v_parallel_residual {
        if res > PARALLEL_TOL {
            return Err(Error::HypothesisViolation {
                what: format!("normal field is not parallel along the stencil: ||nabla_perp V|| = {res:.3e}"),
            });
        }
    }
    if let Some(var) = packet.trace_variation {
        if var > TRACE_CONST_TOL {
            return Err(Error::HypothesisViolation {
                what: format!("trace A_V varies along the stencil by {var:.3e}"),
            });
        }
    }
    Ok(())
}

fn simons_sides(spec: &ImmersionSpec, u: &[f64], field: NormalField, h: f64) -> Result<(f64, f64)> {
    let packet = extrinsic::covariant_da(spec, u, field, h, true)?;
    check_hypotheses(&packet)?;
    let data = extrinsic::extrinsic_data(spec, u)?;
    let c = spec.ambient().c();
    let m = data.chart_dim();
    let mf = m as f64;

    let norm_sq = v_norm_sq_field(spec, field);
    let lhs = 0.5 * laplace_beltrami(spec, &norm_sq, u, h)?;

    let v_coeffs = match field {
        NormalField::MeanCurvature => data.h_coeffs.clone(),
        NormalField::FrameIndex(alpha) => {
            let mut e = DVector::zeros(data.normal_dim());
            e[alpha] = 1.0;
            e
        }
    };
    let a_v = data.shape_operator(&v_coeffs);
    let a_v_sq = a_v.norm_squared();
    let trace_v = a_v.trace();
    let a_v_t = &a_v * &data.t_coeffs;
    let avt_t = a_v_t.dot(&data.t_coeffs);
    let a_n = data.a_n();
    let trace_nv = (&a_n * &a_v).trace();
    let v_dot_n = v_coeffs.dot(&data.n_coeffs);
    let h_dot_n = data.h_coeffs.dot(&data.n_coeffs);

    let c_block = c
        * ((mf - data.t_norm_sq()) * a_v_sq - 2.0 * mf * a_v_t.norm_squared()
            + 3.0 * trace_v * avt_t
            + mf * trace_nv * v_dot_n
            - trace_v * trace_v
            - mf * trace_v * h_dot_n * v_dot_n);

    let mut alpha_sum = 0.0;
    let a_v2 = &a_v * &a_v;
    for op in &data.shape_ops {
        let tr_alpha = op.trace();
        let tr_v2a = (&a_v2 * op).trace();
        let tr_va = (&a_v * op).trace();
        alpha_sum += tr_alpha * tr_v2a - tr_va * tr_va;
    }

    let rhs = packet.nabla_a_norm_sq.expect("covariant_da fills nabla_a_norm_sq")
        + c_block
        + alpha_sum;
    Ok((lhs, rhs))
}

/// Residual of the Laplacian identity for `|A_V|^2` under a parallel normal
/// field with constant trace: one half the Laplace-Beltrami of `|A_V|^2`
/// against `|nabla A_V|^2` plus the curvature and shape-operator trace
/// blocks.
pub fn simons_residual(
    spec: &ImmersionSpec,
    u: &[f64],
    field: NormalField,
    h: f64,
) -> Result<IdentityResidual> {
    let (lhs, rhs) = simons_sides(spec, u, field, h)?;
    let (lhs2, rhs2) = simons_sides(spec, u, field, h / 2.0)?;
    let residual = (lhs - rhs).abs();
    let residual2 = (lhs2 - rhs2).abs();
    Ok(IdentityResidual {
        name: "simons".into(),
        u: u.to_vec(),
        lhs,
        rhs,
        residual,
        fd_step: h,
        order: fd::observed_order(residual, residual2),
    })
}

fn codazzi_defect(
    spec: &ImmersionSpec,
    u: &[f64],
    i: usize,
    j: usize,
    field: NormalField,
    h: f64,
) -> Result<(f64, f64, f64)> {
    let packet = extrinsic::covariant_da(spec, u, field, h, true)?;
    if let Some(res) = packet.v_parallel_residual {
        if res > PARALLEL_TOL {
            return Err(Error::HypothesisViolation {
                what: format!("normal field is not parallel along the stencil: ||nabla_perp V|| = {res:.3e}"),
            });
        }
    }
    let data = extrinsic::extrinsic_data(spec, u)?;
    let c = spec.ambient().c();
    let nabla = packet.nabla_a.expect("covariant_da fills nabla_a");
    let m = data.chart_dim();
    if i >= m || j >= m {
        return Err(Error::InvalidArgument {
            what: format!("frame indices ({i}, {j}) out of range for chart dimension {m}"),
        });
    }
    let v_coeffs = match field {
        NormalField::MeanCurvature => data.h_coeffs.clone(),
        NormalField::FrameIndex(alpha) => {
            let mut e = DVector::zeros(data.normal_dim());
            e[alpha] = 1.0;
            e
        }
    };
    let v_dot_n = v_coeffs.dot(&data.n_coeffs);
    let lhs_vec = nabla[i].column(j) - nabla[j].column(i);
    let t = &data.t_coeffs;
    let mut rhs_vec = DVector::zeros(m);
    rhs_vec[i] += c * v_dot_n * t[j];
    rhs_vec[j] -= c * v_dot_n * t[i];
    let defect = (DVector::from(lhs_vec.clone_owned()) - &rhs_vec).norm();
    Ok((lhs_vec.norm(), rhs_vec.norm(), defect))
}

/// Residual of the symmetry relation for `nabla A_V`:
/// `(nabla_{E_i} A_V) E_j - (nabla_{E_j} A_V) E_i = c <V,N>(<E_j,T> E_i - <E_i,T> E_j)`.
pub fn codazzi_residual(
    spec: &ImmersionSpec,
    u: &[f64],
    i: usize,
    j: usize,
    field: NormalField,
    h: f64,
) -> Result<IdentityResidual> {
    let (lhs, rhs, residual) = codazzi_defect(spec, u, i, j, field, h)?;
    let (_, _, residual2) = codazzi_defect(spec, u, i, j, field, h / 2.0)?;
    Ok(IdentityResidual {
        name: "codazzi".into(),
        u: u.to_vec(),
        lhs,
        rhs,
        residual,
        fd_step: h,
        order: fd::observed_order(residual, residual2),
    })
}

fn delta_t_sides(spec: &ImmersionSpec, u: &[f64], h: f64) -> Result<(f64, f64)> {
    let data = extrinsic::extrinsic_data(spec, u)?;
    let c = spec.ambient().c();

    let t_sq_field = |q: &[f64]| -> Result<f64> {
        Ok(extrinsic::extrinsic_data(spec, q)?.t_norm_sq())
    };
    let lhs = 0.5 * laplace_beltrami(spec, &t_sq_field, u, h)?;

    let a_n = data.a_n();
    let k = extrinsic::intrinsic_curvature(&data, c)
        .gaussian
        .expect("chart dimension 2");
    // T(<H,N>): directional derivative of the vertical component of H along T
    let h_xi_field = |q: &[f64]| -> Result<f64> {
        let d = extrinsic::extrinsic_data(spec, q)?;
        Ok(d.h_dot_xi())
    };
    let m = data.chart_dim();
    let mut t_of_f = 0.0;
    for a in 0..m {
        let mut ea_f = 0.0;
        for kk in 0..m {
            ea_f += data.tangent_coeffs[a][kk] * fd::partial_scalar(&h_xi_field, u, kk, h)?;
        }
        t_of_f += data.t_coeffs[a] * ea_f;
    }
    let rhs = a_n.norm_squared() + k * data.t_norm_sq() + 2.0 * t_of_f;
    Ok((lhs, rhs))
}

/// Residual of the surface identity
/// `Delta |T|^2 / 2 = |A_N|^2 + K |T|^2 + 2 T(<H,N>)`; requires a pmc
/// surface chart.
pub fn delta_t_residual(spec: &ImmersionSpec, u: &[f64], h: f64) -> Result<IdentityResidual> {
    if spec.chart_dim() != 2 {
        return Err(Error::Precondition {
            what: "the |T|^2 Laplacian identity is stated for surfaces".into(),
        });
    }
    // pmc certification over the stencil
    let mut stencil = vec![u.to_vec()];
    for k in 0..2 {
        let mut up = u.to_vec();
        up[k] += h;
        let mut dn = u.to_vec();
        dn[k] -= h;
        stencil.push(up);
        stencil.push(dn);
    }
    for q in &stencil {
        let packet = extrinsic::normal_connection_h(spec, q, h, true)?;
        let res = packet.nabla_perp_h_norm().unwrap_or(f64::INFINITY);
        if res > PARALLEL_TOL {
            return Err(Error::Precondition {
                what: format!("surface is not pmc on the stencil: ||nabla_perp H|| = {res:.3e}"),
            });
        }
    }
    let (lhs, rhs) = delta_t_sides(spec, u, h)?;
    let (lhs2, rhs2) = delta_t_sides(spec, u, h / 2.0)?;
    let residual = (lhs - rhs).abs();
    let residual2 = (lhs2 - rhs2).abs();
    Ok(IdentityResidual {
        name: "deltaT".into(),
        u: u.to_vec(),
        lhs,
        rhs,
        residual,
        fd_step: h,
        order: fd::observed_order(residual, residual2),
    })
}

/// Pseudo-umbilicity defect below which the flatness relation's
/// non-pseudo-umbilical precondition fails.
pub const PSEUDO_UMBILICAL_TOL: f64 = 1e-6;

/// The flatness relation `4|H|^2 = c|T|^2`, valid for non-pseudo-umbilical
/// proper-biharmonic pmc surfaces.
pub fn flatness_relation(spec: &ImmersionSpec, u: &[f64], h: f64) -> Result<IdentityResidual> {
    if spec.chart_dim() != 2 {
        return Err(Error::Precondition {
            what: "the flatness relation is stated for surfaces".into(),
        });
    }
    let residuals = biharmonic::pmc_bih_conditions(spec, u, h)?;
    let class = biharmonic::classify_point(&residuals, &ClassifyTolerances::default())?;
    if class.verdict != Verdict::ProperBiharmonic {
        return Err(Error::Precondition {
            what: format!(
                "flatness relation needs a proper-biharmonic point, got {}",
                class.verdict.as_str()
            ),
        });
    }
    let data = extrinsic::extrinsic_data(spec, u)?;
    if data.pseudo_umbilical_defect() <= PSEUDO_UMBILICAL_TOL {
        return Err(Error::Precondition {
            what: "flatness relation needs a non-pseudo-umbilical point".into(),
        });
    }
    let lhs = 4.0 * data.h_norm_sq();
    let rhs = spec.ambient().c() * data.t_norm_sq();
    Ok(IdentityResidual {
        name: "flatness".into(),
        u: u.to_vec(),
        lhs,
        rhs,
        residual: (lhs - rhs).abs(),
        fd_step: h,
        order: None,
    })
}
