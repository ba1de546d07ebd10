//! Deterministic generators for reference immersions: the classified
//! examples with their closed-form scalars attached, plus controlled
//! non-examples used to confirm that the engine rejects them.
//!
//! Entries are addressable by id strings such as `cyl:c=1:kappa=1`.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use crate::ambient::AmbientSpace;
use crate::biharmonic::Verdict;
use crate::error::{Error, Result};
use crate::exprdsl::{self, Params};
use crate::immersion::ImmersionSpec;

/// A catalog fixture: an immersion plus the closed-form scalar values the
/// engine must reproduce.
#[derive(Debug, Clone)]
pub struct CatalogEntry {
    pub id: String,
    pub description: String,
    pub immersion: ImmersionSpec,
    /// Closed-form scalar targets by name: `H_norm`, `T_norm`,
    /// `sigma_norm_sq`, `K`.
    pub expected_scalars: BTreeMap<String, f64>,
    pub expected_verdict: Option<Verdict>,
}

fn fmt_f(v: f64) -> String {
    format!("{v}")
}

fn build(
    id: String,
    description: String,
    n: usize,
    c: f64,
    m: usize,
    source: &str,
    params: Params,
    domain: Vec<(f64, f64)>,
    scalars: &[(&str, f64)],
    verdict: Option<Verdict>,
) -> Result<CatalogEntry> {
    let ambient = AmbientSpace::new(n, c)?;
    let exprs = exprdsl::parse(source, m, n + 2)?;
    let immersion = ImmersionSpec::new(ambient, exprs, params, domain)?;
    Ok(CatalogEntry {
        id,
        description,
        immersion,
        expected_scalars: scalars
            .iter()
            .map(|&(k, v)| (k.to_string(), v))
            .collect(),
        expected_verdict: verdict,
    })
}

/// Vertical cylinder over a latitude circle of geodesic curvature `kappa`
/// inside the 2-sphere of curvature `c`, embedded in `S^3(c) x R`.
///
/// The circle sits at polar angle `phi` with `cot(phi) = kappa / sqrt(c)`
/// and the chart is arclength in both directions.
pub fn make_vertical_cylinder(c: f64, kappa: f64) -> Result<CatalogEntry> {
    if !(c > 0.0) {
        return Err(Error::InvalidArgument {
            what: format!("curvature must be positive, got {c}"),
        });
    }
    if !(kappa >= 0.0) {
        return Err(Error::InvalidArgument {
            what: format!("circle curvature must be non-negative, got {kappa}"),
        });
    }
    let r = 1.0 / c.sqrt();
    let phi = c.sqrt().atan2(kappa); // cot(phi) = kappa/sqrt(c)
    let rho = r * phi.sin();
    let zc = r * phi.cos();
    let mut params = Params::new();
    params.insert("rho".into(), rho);
    params.insert("zc".into(), zc);
    let source = "rho*cos(u1/rho)\nrho*sin(u1/rho)\nzc\n0\nu2";
    let domain = vec![(0.0, 2.0 * PI * rho), (-1.0, 1.0)];
    let verdict = if kappa == 0.0 {
        Verdict::Harmonic
    } else if (kappa * kappa - c).abs() <= 1e-12 * c {
        Verdict::ProperBiharmonic
    } else {
        Verdict::Neither
    };
    build(
        format!("cyl:c={}:kappa={}", fmt_f(c), fmt_f(kappa)),
        format!(
            "vertical cylinder over the circle of curvature {} in the 2-sphere of curvature {}",
            fmt_f(kappa),
            fmt_f(c)
        ),
        3,
        c,
        2,
        source,
        params,
        domain,
        &[
            ("H_norm", kappa / 2.0),
            ("T_norm", 1.0),
            ("sigma_norm_sq", kappa * kappa),
            ("K", 0.0),
        ],
        Some(verdict),
    )
}

fn small_sphere_at(c: f64, c_small: f64) -> Result<(Params, Vec<(f64, f64)>)> {
    if !(c_small > c) {
        return Err(Error::InvalidArgument {
            what: format!("small-sphere curvature {c_small} must exceed the ambient curvature {c}"),
        });
    }
    let rhos = 1.0 / c_small.sqrt();
    let zc = (1.0 / c - 1.0 / c_small).sqrt();
    let mut params = Params::new();
    params.insert("rhos".into(), rhos);
    params.insert("zc".into(), zc);
    params.insert("t0".into(), 0.0);
    let domain = vec![(0.5 * rhos, (PI - 0.5) * rhos), (0.0, 2.0 * PI * rhos)];
    Ok((params, domain))
}

/// Totally umbilical 2-sphere of curvature `c_prime` inside `S^3(c)`,
/// placed in the `t = t0` slice (`t0 = 0` by default).
pub fn make_small_sphere_surface(c: f64, c_prime: f64) -> Result<CatalogEntry> {
    let (params, domain) = small_sphere_at(c, c_prime)?;
    let source = "rhos*sin(u1/rhos)*cos(u2/rhos)\nrhos*sin(u1/rhos)*sin(u2/rhos)\nrhos*cos(u1/rhos)\nzc\nt0";
    let h_sq = c_prime - c;
    let verdict = if (c_prime - 2.0 * c).abs() <= 1e-12 * c {
        Verdict::ProperBiharmonic
    } else {
        Verdict::Neither
    };
    build(
        format!("sph:c={}:cp={}", fmt_f(c), fmt_f(c_prime)),
        format!(
            "2-sphere of curvature {} embedded in the sphere factor of curvature {}",
            fmt_f(c_prime),
            fmt_f(c)
        ),
        3,
        c,
        2,
        source,
        params,
        domain,
        &[
            ("H_norm", h_sq.sqrt()),
            ("T_norm", 0.0),
            ("sigma_norm_sq", 2.0 * h_sq),
            ("K", c_prime),
        ],
        Some(verdict),
    )
}

/// Square (minimal) torus inside the small 3-sphere of curvature `c_small`
/// of `S^4(c)`, in the `t = t0` slice. The classified example is
/// `c_small = 2c`.
pub fn clifford_at(c: f64, c_small: f64) -> Result<CatalogEntry> {
    if !(c_small > c) {
        return Err(Error::InvalidArgument {
            what: format!("small-sphere curvature {c_small} must exceed the ambient curvature {c}"),
        });
    }
    let rho_small = 1.0 / c_small.sqrt();
    let s = rho_small / 2.0_f64.sqrt();
    let zc = (1.0 / c - 1.0 / c_small).sqrt();
    let mut params = Params::new();
    params.insert("s".into(), s);
    params.insert("zc".into(), zc);
    params.insert("t0".into(), 0.0);
    let source =
        "s*cos(u1/s)\ns*sin(u1/s)\ns*cos(u2/s)\ns*sin(u2/s)\nzc\nt0";
    let domain = vec![(0.0, 2.0 * PI * s), (0.0, 2.0 * PI * s)];
    let h_sq = c_small - c;
    let verdict = if (c_small - 2.0 * c).abs() <= 1e-12 * c {
        Verdict::ProperBiharmonic
    } else {
        Verdict::Neither
    };
    build(
        format!("clifford:c={}", fmt_f(c)),
        format!(
            "square torus, minimal in the 3-sphere of curvature {}, inside the sphere factor of curvature {}",
            fmt_f(c_small),
            fmt_f(c)
        ),
        4,
        c,
        2,
        source,
        params,
        domain,
        &[
            ("H_norm", h_sq.sqrt()),
            ("T_norm", 0.0),
            ("sigma_norm_sq", 2.0 * (2.0 * c_small - c)),
            ("K", 0.0),
        ],
        Some(verdict),
    )
}

/// The classified square-torus example: minimal in the small 3-sphere of
/// curvature `2c`.
pub fn make_clifford_in_small_sphere(c: f64) -> Result<CatalogEntry> {
    clifford_at(c, 2.0 * c)
}

/// Vertical cylinder over a small 2-sphere of curvature `c_small` in
/// `S^3(c)`, chart dimension 3.
pub fn cylinder_over_sphere_at(c: f64, c_small: f64) -> Result<CatalogEntry> {
    let (mut params, mut domain) = small_sphere_at(c, c_small)?;
    params.remove("t0");
    domain.push((-1.0, 1.0));
    let source = "rhos*sin(u1/rhos)*cos(u2/rhos)\nrhos*sin(u1/rhos)*sin(u2/rhos)\nrhos*cos(u1/rhos)\nzc\nu3";
    let h0 = (c_small - c).sqrt();
    let verdict = if (c_small - 2.0 * c).abs() <= 1e-12 * c {
        Verdict::ProperBiharmonic
    } else {
        Verdict::Neither
    };
    build(
        format!("cylsph:c={}", fmt_f(c)),
        format!(
            "vertical cylinder over the 2-sphere of curvature {} in the sphere factor of curvature {}",
            fmt_f(c_small),
            fmt_f(c)
        ),
        3,
        c,
        3,
        source,
        params,
        domain,
        &[
            ("H_norm", 2.0 * h0 / 3.0),
            ("T_norm", 1.0),
            ("sigma_norm_sq", 2.0 * (c_small - c)),
        ],
        Some(verdict),
    )
}

/// The classified 3-dimensional example: vertical cylinder over the small
/// 2-sphere of curvature `2c`.
pub fn make_cylinder_over_small_sphere(c: f64) -> Result<CatalogEntry> {
    cylinder_over_sphere_at(c, 2.0 * c)
}

/// Totally geodesic slice: the great 2-sphere of `S^3(c)` at constant height.
pub fn great_sphere_slice(c: f64) -> Result<CatalogEntry> {
    if !(c > 0.0) {
        return Err(Error::InvalidArgument {
            what: format!("curvature must be positive, got {c}"),
        });
    }
    let r = 1.0 / c.sqrt();
    let mut params = Params::new();
    params.insert("r".into(), r);
    params.insert("t0".into(), 0.0);
    let source = "r*sin(u1/r)*cos(u2/r)\nr*sin(u1/r)*sin(u2/r)\nr*cos(u1/r)\n0\nt0";
    let domain = vec![(0.5 * r, (PI - 0.5) * r), (0.0, 2.0 * PI * r)];
    build(
        format!("slice:c={}", fmt_f(c)),
        "totally geodesic great 2-sphere in a constant-height slice".into(),
        3,
        c,
        2,
        source,
        params,
        domain,
        &[
            ("H_norm", 0.0),
            ("T_norm", 0.0),
            ("sigma_norm_sq", 0.0),
            ("K", c),
        ],
        Some(Verdict::Harmonic),
    )
}

/// Minimal helicoid in `S^2(c) x R`: a great circle rotating at rate `omega`
/// while translating vertically at rate `lambda`. The tangent part of the
/// vertical direction has non-constant length, which makes this the
/// reference fixture for identities with genuinely varying fields.
pub fn minimal_helicoid(c: f64, omega: f64, lambda: f64) -> Result<CatalogEntry> {
    if !(c > 0.0) || !(lambda > 0.0) || !(omega != 0.0) {
        return Err(Error::InvalidArgument {
            what: "helicoid needs c > 0, lambda > 0, omega != 0".into(),
        });
    }
    let r = 1.0 / c.sqrt();
    let mut params = Params::new();
    params.insert("r".into(), r);
    params.insert("om".into(), omega);
    params.insert("lam".into(), lambda);
    let source = "r*cos(u1/r)*cos(om*u2)\nr*cos(u1/r)*sin(om*u2)\nr*sin(u1/r)\nlam*u2";
    let domain = vec![(-0.6 * r, 0.6 * r), (-1.0, 1.0)];
    build(
        format!(
            "helicoid:c={}:omega={}:lambda={}",
            fmt_f(c),
            fmt_f(omega),
            fmt_f(lambda)
        ),
        "minimal helicoid in the product of a 2-sphere and a line".into(),
        2,
        c,
        2,
        source,
        params,
        domain,
        &[("H_norm", 0.0)],
        Some(Verdict::Harmonic),
    )
}

/// Cylinder with the latitude angle modulated by `amp * sin(u2)`: stays on
/// the ambient model but is neither pmc nor biharmonic for `amp != 0`.
pub fn perturbed_cylinder(c: f64, kappa: f64, amp: f64) -> Result<CatalogEntry> {
    if !(c > 0.0) || !(kappa >= 0.0) {
        return Err(Error::InvalidArgument {
            what: "perturbed cylinder needs c > 0 and kappa >= 0".into(),
        });
    }
    let r = 1.0 / c.sqrt();
    let phi0 = c.sqrt().atan2(kappa);
    let rho0 = r * phi0.sin();
    let mut params = Params::new();
    params.insert("r".into(), r);
    params.insert("phi0".into(), phi0);
    params.insert("amp".into(), amp);
    params.insert("rho0".into(), rho0);
    let source = "r*sin(phi0+amp*sin(u2))*cos(u1/rho0)\nr*sin(phi0+amp*sin(u2))*sin(u1/rho0)\nr*cos(phi0+amp*sin(u2))\n0\nu2";
    let domain = vec![(0.0, 2.0 * PI * rho0), (-1.0, 1.0)];
    build(
        format!(
            "pcyl:c={}:kappa={}:amp={}",
            fmt_f(c),
            fmt_f(kappa),
            fmt_f(amp)
        ),
        "vertical cylinder with a height-modulated latitude angle (controlled non-example)".into(),
        3,
        c,
        2,
        source,
        params,
        domain,
        &[],
        Some(if amp == 0.0 {
            if (kappa * kappa - c).abs() <= 1e-12 * c {
                Verdict::ProperBiharmonic
            } else {
                Verdict::Neither
            }
        } else {
            Verdict::Neither
        }),
    )
}

/// Id templates understood by [`parse_id`], with the parameters each takes.
pub fn id_templates() -> &'static [(&'static str, &'static str)] {
    &[
        ("cyl:c=<c>:kappa=<k>", "vertical cylinder over a circle of curvature k"),
        ("sph:c=<c>:cp=<cp>", "small 2-sphere of curvature cp in the sphere factor"),
        ("clifford:c=<c>", "minimal square torus in the small 3-sphere of curvature 2c"),
        ("cylsph:c=<c>", "vertical cylinder over the small 2-sphere of curvature 2c"),
        ("slice:c=<c>", "totally geodesic great-sphere slice"),
        ("helicoid:c=<c>:omega=<o>:lambda=<l>", "minimal helicoid in S^2(c) x R"),
        ("pcyl:c=<c>:kappa=<k>:amp=<a>", "perturbed cylinder (non-example)"),
    ]
}

/// Entries exercised by default in tests and `catalog list`.
pub fn canonical_entries() -> Result<Vec<CatalogEntry>> {
    Ok(vec![
        make_vertical_cylinder(1.0, 1.0)?,
        make_vertical_cylinder(1.0, 0.5)?,
        make_vertical_cylinder(1.0, 0.0)?,
        make_vertical_cylinder(4.0, 2.0)?,
        make_small_sphere_surface(1.0, 2.0)?,
        make_small_sphere_surface(1.0, 3.0)?,
        make_clifford_in_small_sphere(1.0)?,
        make_cylinder_over_small_sphere(1.0)?,
        great_sphere_slice(1.0)?,
        minimal_helicoid(1.0, 2.0, 0.6)?,
        perturbed_cylinder(1.0, 1.0, 0.1)?,
    ])
}

/// Resolve an id string like `cyl:c=1:kappa=0.5` to a catalog entry.
pub fn parse_id(id: &str) -> Result<CatalogEntry> {
    let bad = |msg: String| Error::InvalidArgument { what: msg };
    let mut parts = id.split(':');
    let kind = parts.next().unwrap_or("");
    let mut kv = BTreeMap::new();
    for part in parts {
        let (k, v) = part
            .split_once('=')
            .ok_or_else(|| bad(format!("bad id segment '{part}' in '{id}'")))?;
        let value: f64 = v
            .parse()
            .map_err(|_| bad(format!("bad numeric value '{v}' in '{id}'")))?;
        kv.insert(k.to_string(), value);
    }
    let get = |key: &str| {
        kv.get(key)
            .copied()
            .ok_or_else(|| bad(format!("id '{id}' is missing '{key}='")))
    };
    match kind {
        "cyl" => make_vertical_cylinder(get("c")?, get("kappa")?),
        "sph" => make_small_sphere_surface(get("c")?, get("cp")?),
        "clifford" => make_clifford_in_small_sphere(get("c")?),
        "cylsph" => make_cylinder_over_small_sphere(get("c")?),
        "slice" => great_sphere_slice(get("c")?),
        "helicoid" => minimal_helicoid(get("c")?, get("omega")?, get("lambda")?),
        "pcyl" => perturbed_cylinder(get("c")?, get("kappa")?, get("amp")?),
        other => Err(bad(format!("unknown catalog kind '{other}'"))),
    }
}
