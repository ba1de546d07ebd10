//! Scalar inequalities and classification predicates: the cubic-sum bound
//! for traceless tuples, the mean-curvature gap constant, and grid-level
//! predicate reports.

use std::collections::BTreeMap;

use crate::biharmonic::{self, ClassifyTolerances, Verdict};
use crate::error::{Error, Result};
use crate::extrinsic;
use crate::immersion::ImmersionSpec;

/// Evaluation of the sharp cubic-sum bound for a traceless tuple:
/// `|sum a_i^3| <= (m-2)/sqrt(m(m-1)) * b^3` with `b^2 = sum a_i^2`.
#[derive(Debug, Clone, Copy)]
pub struct OkumuraEval {
    pub sum_cubes: f64,
    pub bound: f64,
    /// `bound - sum_cubes` (>= 0 when the upper bound holds).
    pub slack_upper: f64,
    /// `sum_cubes + bound` (>= 0 when the lower bound holds).
    pub slack_lower: f64,
    pub equality_upper: bool,
    pub equality_lower: bool,
}

pub fn okumura_eval(a: &[f64]) -> Result<OkumuraEval> {
    let m = a.len();
    if m < 2 {
        return Err(Error::InvalidArgument {
            what: format!("need at least 2 entries, got {m}"),
        });
    }
    let sum: f64 = a.iter().sum();
    let b_sq: f64 = a.iter().map(|x| x * x).sum();
    let b = b_sq.sqrt();
    if sum.abs() > 1e-12 * b.max(1e-300) {
        return Err(Error::Precondition {
            what: format!("input is not traceless: sum = {sum:.3e}, norm = {b:.3e}"),
        });
    }
    let mf = m as f64;
    let b_cubed = b_sq * b;
    let bound = (mf - 2.0) / (mf * (mf - 1.0)).sqrt() * b_cubed;
    let sum_cubes: f64 = a.iter().map(|x| x * x * x).sum();
    let slack_upper = bound - sum_cubes;
    let slack_lower = sum_cubes + bound;
    let eq_tol = 1e-10 * b_cubed.max(1e-300);
    Ok(OkumuraEval {
        sum_cubes,
        bound,
        slack_upper,
        slack_lower,
        equality_upper: slack_upper <= eq_tol,
        equality_lower: slack_lower <= eq_tol,
    })
}

/// The mean-curvature gap threshold
/// `C(m) = ((m-1)(m^2+4) + (m-2) sqrt((m-1)(m-2)(m^2+m+2))) / (2 m^3)`.
pub fn gap_constant(m: usize) -> Result<f64> {
    if m < 2 {
        return Err(Error::InvalidArgument {
            what: format!("gap constant needs m >= 2, got {m}"),
        });
    }
    let mf = m as f64;
    let root = ((mf - 1.0) * (mf - 2.0) * (mf * mf + mf + 2.0)).sqrt();
    Ok(((mf - 1.0) * (mf * mf + 4.0) + (mf - 2.0) * root) / (2.0 * mf * mf * mf))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PredicateVerdict {
    Holds,
    Violated,
    NotApplicable,
}

impl PredicateVerdict {
    pub fn as_str(self) -> &'static str {
        match self {
            PredicateVerdict::Holds => "holds",
            PredicateVerdict::Violated => "violated",
            PredicateVerdict::NotApplicable => "not_applicable",
        }
    }
}

/// One predicate with its numeric margin; a bare boolean is never reported.
#[derive(Debug, Clone)]
pub struct PredicateReport {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    /// Positive margins mean the predicate holds with room to spare.
    pub margin: f64,
    pub verdict: PredicateVerdict,
    /// Required predicates decide pass/fail; the rest are informational
    /// memberships.
    pub required: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct ScalarAggregate {
    pub min: f64,
    pub median: f64,
    pub max: f64,
}

impl ScalarAggregate {
    pub fn from_samples(samples: &mut Vec<f64>) -> Self {
        samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
        ScalarAggregate {
            min: samples[0],
            median: samples[samples.len() / 2],
            max: samples[samples.len() - 1],
        }
    }

    pub fn spread(&self) -> f64 {
        self.max - self.min
    }
}

#[derive(Debug, Clone)]
pub struct ClassificationReport {
    pub m: usize,
    pub c: f64,
    pub h_norm_sq: ScalarAggregate,
    pub sigma_norm_sq: ScalarAggregate,
    pub t_norm_sq: ScalarAggregate,
    pub predicates: Vec<PredicateReport>,
}

impl ClassificationReport {
    pub fn all_required_hold(&self) -> bool {
        self.predicates
            .iter()
            .filter(|p| p.required)
            .all(|p| p.verdict == PredicateVerdict::Holds)
    }
}

/// Evaluate the scalar predicates over a grid of chart points. The grid must
/// certify as pmc and proper-biharmonic pointwise (that is the hypothesis of
/// every predicate here); certification failure is an error, not a report.
pub fn classification_report(
    spec: &ImmersionSpec,
    grid: &[Vec<f64>],
    h: f64,
    tol: f64,
) -> Result<ClassificationReport> {
    if grid.is_empty() {
        return Err(Error::InvalidArgument {
            what: "empty sample grid".into(),
        });
    }
    let m = spec.chart_dim();
    let mf = m as f64;
    let c = spec.ambient().c();
    let class_tol = ClassifyTolerances::default();

    let mut h_sq = Vec::with_capacity(grid.len());
    let mut s_sq = Vec::with_capacity(grid.len());
    let mut t_sq = Vec::with_capacity(grid.len());
    let mut umb_defect: f64 = 0.0;
    for u in grid {
        let residuals = biharmonic::pmc_bih_conditions(spec, u, h).map_err(|e| match e {
            Error::Precondition { what } => Error::Precondition {
                what: format!("certification failed at {u:?}: {what}"),
            },
            other => other,
        })?;
        let class = biharmonic::classify_point(&residuals, &class_tol)?;
        if class.verdict != Verdict::ProperBiharmonic {
            return Err(Error::Precondition {
                what: format!(
                    "classification predicates need proper-biharmonic points, got {} at {u:?}",
                    class.verdict.as_str()
                ),
            });
        }
        let data = extrinsic::extrinsic_data(spec, u)?;
        h_sq.push(data.h_norm_sq());
        s_sq.push(data.sigma_norm_sq());
        t_sq.push(data.t_norm_sq());
        umb_defect = umb_defect.max(data.pseudo_umbilical_defect());
    }
    let h_agg = ScalarAggregate::from_samples(&mut h_sq);
    let s_agg = ScalarAggregate::from_samples(&mut s_sq);
    let t_agg = ScalarAggregate::from_samples(&mut t_sq);

    let mut predicates = Vec::new();

    // |H|^2 <= c, worst case over the grid
    predicates.push(PredicateReport {
        name: "H_sq_le_c".into(),
        value: h_agg.max,
        threshold: c,
        margin: c - h_agg.max,
        verdict: if h_agg.max <= c + tol {
            PredicateVerdict::Holds
        } else {
            PredicateVerdict::Violated
        },
        required: true,
    });

    // |sigma|^2 >= c(m-1), worst case over the grid
    let sigma_floor = c * (mf - 1.0);
    predicates.push(PredicateReport {
        name: "sigma_sq_ge_c_m_minus_1".into(),
        value: s_agg.min,
        threshold: sigma_floor,
        margin: s_agg.min - sigma_floor,
        verdict: if s_agg.min >= sigma_floor - tol {
            PredicateVerdict::Holds
        } else {
            PredicateVerdict::Violated
        },
        required: true,
    });

    // gap hypothesis |H|^2 > C(m): membership information, not a requirement
    let gap = gap_constant(m)?;
    predicates.push(PredicateReport {
        name: "H_sq_gt_gap".into(),
        value: h_agg.min,
        threshold: gap,
        margin: h_agg.min - gap,
        verdict: if h_agg.min > gap {
            PredicateVerdict::Holds
        } else {
            PredicateVerdict::Violated
        },
        required: false,
    });

    // pseudo-umbilical flag
    predicates.push(PredicateReport {
        name: "pseudo_umbilical".into(),
        value: umb_defect,
        threshold: tol,
        margin: tol - umb_defect,
        verdict: if umb_defect <= tol {
            PredicateVerdict::Holds
        } else {
            PredicateVerdict::Violated
        },
        required: false,
    });

    // cylinder flag |T| = 1
    let cyl_defect = (1.0 - t_agg.min).abs().max((1.0 - t_agg.max).abs());
    predicates.push(PredicateReport {
        name: "cylinder".into(),
        value: cyl_defect,
        threshold: tol,
        margin: tol - cyl_defect,
        verdict: if cyl_defect <= tol {
            PredicateVerdict::Holds
        } else {
            PredicateVerdict::Violated
        },
        required: false,
    });

    // band membership |H| in (0, (m-2)/m sqrt(c)] u {sqrt(c)}, applicable
    // only when the submanifold lies in the sphere factor (T = 0)
    let in_sphere_factor = t_agg.max <= tol;
    let band_pred = if in_sphere_factor {
        let interval_hi = (mf - 2.0) / mf * c.sqrt();
        let dist = |h: f64| -> f64 {
            let to_point = (h - c.sqrt()).abs();
            let to_interval = if h <= 0.0 {
                f64::INFINITY
            } else if h <= interval_hi {
                0.0
            } else {
                h - interval_hi
            };
            to_point.min(to_interval)
        };
        let worst = dist(h_agg.min.sqrt()).max(dist(h_agg.max.sqrt()));
        PredicateReport {
            name: "sphere_band".into(),
            value: worst,
            threshold: tol,
            margin: tol - worst,
            verdict: if worst <= tol {
                PredicateVerdict::Holds
            } else {
                PredicateVerdict::Violated
            },
            required: true,
        }
    } else {
        PredicateReport {
            name: "sphere_band".into(),
            value: t_agg.max,
            threshold: tol,
            margin: 0.0,
            verdict: PredicateVerdict::NotApplicable,
            required: false,
        }
    };
    predicates.push(band_pred);

    // equality cross-references
    let sigma_eq = (s_agg.min - sigma_floor).abs().max((s_agg.max - sigma_floor).abs()) <= tol;
    let h_eq = (h_agg.min - c).abs().max((h_agg.max - c).abs()) <= tol;
    let cylinder_flag = cyl_defect <= tol;
    let pseudo_and_vertical_zero = umb_defect <= tol && t_agg.max <= tol;
    predicates.push(crossref(
        "eq_sigma_iff_cylinder",
        sigma_eq,
        cylinder_flag,
        s_agg.min - sigma_floor,
        tol,
    ));
    predicates.push(crossref(
        "eq_H_iff_pseudo_umbilical",
        h_eq,
        pseudo_and_vertical_zero,
        h_agg.max - c,
        tol,
    ));

    Ok(ClassificationReport {
        m,
        c,
        h_norm_sq: h_agg,
        sigma_norm_sq: s_agg,
        t_norm_sq: t_agg,
        predicates,
    })
}

fn crossref(name: &str, left: bool, right: bool, value: f64, tol: f64) -> PredicateReport {
    let consistent = left == right;
    PredicateReport {
        name: name.into(),
        value,
        threshold: tol,
        margin: if consistent { tol } else { -tol },
        verdict: if consistent {
            PredicateVerdict::Holds
        } else {
            PredicateVerdict::Violated
        },
        required: true,
    }
}

/// Scalar names used by catalog expectations mapped to aggregates.
pub fn aggregate_map(report: &ClassificationReport) -> BTreeMap<String, f64> {
    let mut map = BTreeMap::new();
    map.insert("H_norm".into(), report.h_norm_sq.median.sqrt());
    map.insert("T_norm".into(), report.t_norm_sq.median.sqrt());
    map.insert("sigma_norm_sq".into(), report.sigma_norm_sq.median);
    map
}
