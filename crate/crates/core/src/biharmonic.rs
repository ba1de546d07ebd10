//! Tension and bitension fields, the pmc biharmonicity conditions, and
//! point classification.
//!
//! Two routes decide biharmonicity: an algebraic one available where the
//! mean curvature is parallel in the normal bundle, and a finite-difference
//! bitension route available everywhere. The rough Laplacian is the trace of
//! the second covariant differential throughout.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::extrinsic::{self, ExtrinsicData, PARALLEL_TOL};
use crate::fd;
use crate::immersion::ImmersionSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Harmonic,
    ProperBiharmonic,
    Neither,
    Inconclusive,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Harmonic => "harmonic",
            Verdict::ProperBiharmonic => "proper_biharmonic",
            Verdict::Neither => "neither",
            Verdict::Inconclusive => "inconclusive",
        }
    }

    /// Harmonic maps are biharmonic.
    pub fn is_biharmonic(self) -> bool {
        matches!(self, Verdict::Harmonic | Verdict::ProperBiharmonic)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Route {
    AlgebraicPmc,
    FdBitension,
}

impl Route {
    pub fn as_str(self) -> &'static str {
        match self {
            Route::AlgebraicPmc => "pmc",
            Route::FdBitension => "fd",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Classification {
    pub verdict: Verdict,
    pub route: Route,
}

/// Algebraic biharmonicity data for a pmc point. The three conditions are
/// `<H, xi> = 0`, `|A_H|^2 = c(m - |T|^2)|H|^2`, and `trace(A_H A_U) = 0`
/// for every normal direction `U` orthogonal to `H`.
#[derive(Debug, Clone)]
pub struct PmcConditions {
    /// Measured `||nabla_perp H||` used for the pmc certification.
    pub pmc_residual: f64,
    /// Condition 1: `<H, xi>`.
    pub h_dot_xi: f64,
    /// Condition 2, raw: `|A_H|^2 - c(m - |T|^2)|H|^2`.
    pub cond2_raw: f64,
    /// Condition 2 normalized by the larger side (scale-free margin).
    pub cond2_rel: f64,
    /// Condition 3: largest `|trace(A_H A_U)|` over unit normals `U` orthogonal to `H`.
    pub cond3_max: f64,
    /// Normal part of the biharmonicity system (normal-frame coefficients).
    pub normal_residual: DVector<f64>,
    /// Tangent part of the biharmonicity system (tangent-frame coefficients).
    pub tangent_residual: DVector<f64>,
}

impl PmcConditions {
    pub fn worst(&self) -> f64 {
        self.h_dot_xi
            .abs()
            .max(self.cond2_raw.abs())
            .max(self.cond3_max)
    }
}

/// Bitension data from the finite-difference route, evaluated at `h` and
/// `h/2` so the refinement behavior is part of the record.
#[derive(Debug, Clone)]
pub struct FdBitension {
    /// Bitension vector at the reported step `h`.
    pub bitension: DVector<f64>,
    pub norm_h: f64,
    pub norm_h2: f64,
    pub fd_step: f64,
    /// Set when the `h` and `h/2` results differ by more than ten times the
    /// reported residual.
    pub unstable: bool,
}

#[derive(Debug, Clone)]
pub struct BiharmonicResiduals {
    /// Tension vector `tau = m H`.
    pub tau: DVector<f64>,
    pub tau_norm: f64,
    /// `e(psi) = |d psi|^2 / 2`.
    pub energy_density: f64,
    /// `|tau|^2 / 2`.
    pub bienergy_density: f64,
    pub pmc: Option<PmcConditions>,
    pub fd: Option<FdBitension>,
}

#[derive(Debug, Clone, Copy)]
pub struct ClassifyTolerances {
    /// `|tau|` at or below this is harmonic.
    pub tension: f64,
    /// Algebraic-route tolerance on the pmc condition triple.
    pub algebraic: f64,
    /// FD-route tolerance on `|tau_2|`, paired with a mandatory refinement check.
    pub fd: f64,
}

impl Default for ClassifyTolerances {
    fn default() -> Self {
        ClassifyTolerances {
            tension: 1e-8,
            algebraic: 1e-8,
            fd: 5e-3,
        }
    }
}

fn base_residuals(data: &ExtrinsicData) -> BiharmonicResiduals {
    let m = data.chart_dim() as f64;
    let tau = &data.mean_curvature * m;
    let tau_norm = tau.norm();
    let energy_density = 0.5 * (&data.metric_inv * &data.metric).trace();
    BiharmonicResiduals {
        bienergy_density: 0.5 * tau_norm * tau_norm,
        tau,
        tau_norm,
        energy_density,
        pmc: None,
        fd: None,
    }
}

/// Rough Laplacian of the tension field at `u`: nested central differences
/// of the tau field with tangent projection at every step,
/// `g^{ij}(nabla_i W_j - Gamma^k_ij W_k)` where `W_j = P(d_j tau)`.
fn rough_laplacian_tau(spec: &ImmersionSpec, u: &[f64], h: f64) -> Result<DVector<f64>> {
    let center = extrinsic::extrinsic_data(spec, u)?;
    let ambient = spec.ambient();
    let m = center.chart_dim();
    let mf = m as f64;

    let tau_at = |q: &[f64]| -> Result<DVector<f64>> {
        Ok(extrinsic::extrinsic_data(spec, q)?.mean_curvature * mf)
    };
    let w_at = |j: usize, q: &[f64]| -> Result<DVector<f64>> {
        let p = ambient.point(spec.eval(q)?.value)?;
        let d = fd::partial_vector(&tau_at, q, j, h)?;
        Ok(ambient.tangent_project(&p, &d))
    };

    let p0 = ambient.point(center.point.clone())?;
    let mut w_center = Vec::with_capacity(m);
    for k in 0..m {
        w_center.push(w_at(k, u)?);
    }

    let mut lap = DVector::zeros(ambient.dim());
    for i in 0..m {
        for j in 0..m {
            let gij = center.metric_inv[(i, j)];
            let w_j = |q: &[f64]| w_at(j, q);
            let d = fd::partial_vector(&w_j, u, i, h)?;
            let mut term = ambient.tangent_project(&p0, &d);
            for k in 0..m {
                term -= &w_center[k] * center.christoffels[k][(i, j)];
            }
            lap += term * gij;
        }
    }
    Ok(lap)
}

fn bitension_at(spec: &ImmersionSpec, center: &ExtrinsicData, u: &[f64], h: f64) -> Result<DVector<f64>> {
    let ambient = spec.ambient();
    let m = center.chart_dim();
    let tau = &center.mean_curvature * m as f64;
    let lap = rough_laplacian_tau(spec, u, h)?;
    // curvature term: sum_a R(E_a, tau) E_a
    let mut curv = DVector::zeros(ambient.dim());
    for e in &center.tangent_frame {
        curv += ambient.curvature_unchecked(e, &tau, e);
    }
    Ok(lap - curv)
}

/// Tension, energy densities, and the finite-difference bitension at steps
/// `h` and `h/2`.
pub fn tension_and_bitension(spec: &ImmersionSpec, u: &[f64], h: f64) -> Result<BiharmonicResiduals> {
    spec.stencil_fits(u, 2.0 * h)?;
    let center = extrinsic::extrinsic_data(spec, u)?;
    let mut out = base_residuals(&center);
    let coarse = bitension_at(spec, &center, u, h)?;
    let fine = bitension_at(spec, &center, u, h / 2.0)?;
    let norm_h = coarse.norm();
    let norm_h2 = fine.norm();
    let unstable = (norm_h - norm_h2).abs() > 10.0 * norm_h2.max(fd::ORDER_NOISE_FLOOR);
    out.fd = Some(FdBitension {
        bitension: coarse,
        norm_h,
        norm_h2,
        fd_step: h,
        unstable,
    });
    Ok(out)
}

/// Trace of the ambient curvature against the mean curvature,
/// `sum_a R(E_a, H) E_a`, split into normal and tangent frame coefficients.
fn curvature_trace_split(data: &ExtrinsicData, spec: &ImmersionSpec) -> (DVector<f64>, DVector<f64>) {
    let ambient = spec.ambient();
    let mut total = DVector::zeros(ambient.dim());
    for e in &data.tangent_frame {
        total += ambient.curvature_unchecked(e, &data.mean_curvature, e);
    }
    (data.normal_coeffs_of(&total), data.tangent_coeffs_of(&total))
}

/// The algebraic pmc biharmonicity conditions at `u`. Requires the mean
/// curvature to be parallel at `u` (certified by finite differences at step
/// `h`); this is the hypothesis under which the conditions characterize
/// biharmonicity.
pub fn pmc_bih_conditions(spec: &ImmersionSpec, u: &[f64], h: f64) -> Result<BiharmonicResiduals> {
    let m = spec.chart_dim();
    if m < 2 {
        return Err(Error::Precondition {
            what: "pmc biharmonicity conditions need chart dimension at least 2".into(),
        });
    }
    let packet = extrinsic::normal_connection_h(spec, u, h, true)?;
    let pmc_residual = packet.nabla_perp_h_norm().unwrap_or(f64::INFINITY);
    if pmc_residual > PARALLEL_TOL {
        return Err(Error::Precondition {
            what: format!(
                "mean curvature is not parallel at this point: ||nabla_perp H|| = {pmc_residual:.3e}"
            ),
        });
    }
    let data = extrinsic::extrinsic_data(spec, u)?;
    let c = spec.ambient().c();
    let mf = m as f64;

    let a_h = data.a_h();
    let a_h_sq = a_h.norm_squared();
    let target = c * (mf - data.t_norm_sq()) * data.h_norm_sq();
    let cond2_raw = a_h_sq - target;
    let cond2_rel = cond2_raw.abs() / a_h_sq.max(target).max(1e-300);

    // condition 3: complete H/|H| to an orthonormal basis of the normal
    // space and scan trace(A_H A_U) over the complement
    let cond3_max = {
        let nd = data.normal_dim();
        let h_norm = data.h_norm();
        let mut dirs: Vec<DVector<f64>> = Vec::new();
        if h_norm > 1e-14 {
            dirs.push(&data.h_coeffs / h_norm);
        }
        let mut worst: f64 = 0.0;
        for beta in 0..nd {
            let mut w = DVector::zeros(nd);
            w[beta] = 1.0;
            for _ in 0..2 {
                for d in &dirs {
                    let t = w.dot(d);
                    w -= d * t;
                }
            }
            let norm = w.norm();
            if norm < 1e-8 {
                continue;
            }
            w /= norm;
            let a_u = data.shape_operator(&w);
            worst = worst.max((&a_h * &a_u).trace().abs());
            dirs.push(w);
        }
        worst
    };

    // biharmonicity system, specialization without the normal Laplacian
    // (it vanishes term-by-term under the pmc certification above):
    //   normal:  trace sigma(., A_H .) + (trace R(., H) .)^perp
    //   tangent: (m/2) grad|H|^2 + 2 trace A_{nabla_perp H}(.) + 2 (trace R(., H) .)^top
    let (curv_normal, curv_tangent) = curvature_trace_split(&data, spec);
    let mut trace_sigma_ah = DVector::zeros(data.normal_dim());
    for a in 0..m {
        for b in 0..m {
            trace_sigma_ah += &data.sff[a][b] * a_h[(a, b)];
        }
    }
    let normal_residual = trace_sigma_ah + curv_normal;

    let h_sq_field = |q: &[f64]| -> Result<f64> { Ok(extrinsic::extrinsic_data(spec, q)?.h_norm_sq()) };
    let mut grad_h_sq = DVector::zeros(m);
    for a in 0..m {
        let mut d = 0.0;
        for k in 0..m {
            d += data.tangent_coeffs[a][k] * fd::partial_scalar(&h_sq_field, u, k, h)?;
        }
        grad_h_sq[a] = d;
    }
    let nabla_perp = packet.nabla_perp_h.as_ref().expect("packet carries nabla_perp_h");
    let mut trace_a_nabla = DVector::zeros(m);
    for (a, dv) in nabla_perp.iter().enumerate() {
        let a_w = data.shape_operator(dv);
        for b in 0..m {
            trace_a_nabla[b] += a_w[(b, a)];
        }
    }
    let tangent_residual = grad_h_sq * (mf / 2.0) + trace_a_nabla * 2.0 + curv_tangent * 2.0;

    let mut out = base_residuals(&data);
    out.pmc = Some(PmcConditions {
        pmc_residual,
        h_dot_xi: data.h_dot_xi(),
        cond2_raw,
        cond2_rel,
        cond3_max,
        normal_residual,
        tangent_residual,
    });
    Ok(out)
}

/// Classify a point as harmonic, proper-biharmonic, or neither from the
/// residuals of whichever route was computed. The FD route demands that the
/// residual drop by at least 2x under step halving before it certifies
/// biharmonicity; otherwise the verdict is inconclusive.
pub fn classify_point(residuals: &BiharmonicResiduals, tol: &ClassifyTolerances) -> Result<Classification> {
    if residuals.tau_norm <= tol.tension {
        let route = if residuals.pmc.is_some() {
            Route::AlgebraicPmc
        } else {
            Route::FdBitension
        };
        return Ok(Classification {
            verdict: Verdict::Harmonic,
            route,
        });
    }
    if let Some(pmc) = &residuals.pmc {
        let verdict = if pmc.worst() <= tol.algebraic {
            Verdict::ProperBiharmonic
        } else {
            Verdict::Neither
        };
        return Ok(Classification {
            verdict,
            route: Route::AlgebraicPmc,
        });
    }
    if let Some(fd_route) = &residuals.fd {
        let verdict = if fd_route.norm_h2 > tol.fd {
            Verdict::Neither
        } else {
            let at_noise = fd_route.norm_h <= fd::ORDER_NOISE_FLOOR;
            let halves = fd_route.norm_h >= 2.0 * fd_route.norm_h2;
            if (at_noise || halves) && !fd_route.unstable {
                Verdict::ProperBiharmonic
            } else {
                Verdict::Inconclusive
            }
        };
        return Ok(Classification {
            verdict,
            route: Route::FdBitension,
        });
    }
    Err(Error::Precondition {
        what: "classification needs at least one computed route".into(),
    })
}

/// Convenience: classify `u` using the pmc route when the point certifies as
/// pmc and the FD bitension route otherwise.
pub fn classify_at(
    spec: &ImmersionSpec,
    u: &[f64],
    h: f64,
    tol: &ClassifyTolerances,
) -> Result<Classification> {
    match pmc_bih_conditions(spec, u, h) {
        Ok(res) => classify_point(&res, tol),
        Err(Error::Precondition { .. }) => {
            let res = tension_and_bitension(spec, u, h)?;
            classify_point(&res, tol)
        }
        Err(e) => Err(e),
    }
}
