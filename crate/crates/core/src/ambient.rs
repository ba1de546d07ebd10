//! The product space `S^n(c) x R`, realized as
//! `{(x, t) in R^{n+1} x R : |x|^2 = 1/c}` with the metric induced from
//! `R^{n+2}`. The vertical direction is the last coordinate axis, which is a
//! parallel field of the product.

use nalgebra::DVector;

use crate::error::{Error, Result};

const ON_MANIFOLD_REL_TOL: f64 = 1e-12;
const TANGENT_REL_TOL: f64 = 1e-8;

/// The ambient model: sphere dimension `n >= 2` and curvature `c > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmbientSpace {
    n: usize,
    c: f64,
    radius: f64,
}

/// A point of the product, validated to lie on the sphere factor.
#[derive(Debug, Clone, PartialEq)]
pub struct AmbientPoint {
    coords: DVector<f64>,
}

impl AmbientPoint {
    pub fn coords(&self) -> &DVector<f64> {
        &self.coords
    }

    pub fn height(&self) -> f64 {
        self.coords[self.coords.len() - 1]
    }
}

impl AmbientSpace {
    pub fn new(n: usize, c: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidArgument {
                what: format!("sphere dimension must be at least 2, got {n}"),
            });
        }
        if !(c > 0.0) || !c.is_finite() {
            return Err(Error::InvalidArgument {
                what: format!("curvature must be strictly positive, got {c}"),
            });
        }
        Ok(AmbientSpace {
            n,
            c,
            radius: 1.0 / c.sqrt(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Dimension of the surrounding Euclidean space, `n + 2`.
    pub fn dim(&self) -> usize {
        self.n + 2
    }

    /// The unit vertical direction (tangent to the line factor everywhere).
    pub fn vertical(&self) -> DVector<f64> {
        let mut xi = DVector::zeros(self.dim());
        xi[self.n + 1] = 1.0;
        xi
    }

    /// Validate that `coords` lies on the manifold and wrap it.
    pub fn point(&self, coords: DVector<f64>) -> Result<AmbientPoint> {
        if coords.len() != self.dim() {
            return Err(Error::InvalidArgument {
                what: format!("point has {} coordinates, expected {}", coords.len(), self.dim()),
            });
        }
        let r2 = 1.0 / self.c;
        let sphere_sq: f64 = coords.rows(0, self.n + 1).norm_squared();
        let deviation = (sphere_sq - r2).abs();
        if deviation > ON_MANIFOLD_REL_TOL * r2 {
            return Err(Error::OffManifold { deviation });
        }
        Ok(AmbientPoint { coords })
    }

    /// Orthogonal projection of `v` onto the tangent space of the product at
    /// `p`: removes the sphere-radial component, leaves the `t`-component.
    pub fn tangent_project(&self, p: &AmbientPoint, v: &DVector<f64>) -> DVector<f64> {
        let ns = self.n + 1;
        let x = p.coords.rows(0, ns);
        let vx = v.rows(0, ns);
        let coeff = vx.dot(&x) * self.c; // <v,x>/|x|^2 with |x|^2 = 1/c
        let mut out = v.clone();
        for i in 0..ns {
            out[i] -= coeff * x[i];
        }
        out
    }

    fn radial_component(&self, p: &AmbientPoint, v: &DVector<f64>) -> f64 {
        let ns = self.n + 1;
        v.rows(0, ns).dot(&p.coords.rows(0, ns)) * self.c.sqrt()
    }

    fn check_tangent(&self, p: &AmbientPoint, v: &DVector<f64>) -> Result<()> {
        let radial = self.radial_component(p, v);
        let scale = v.norm().max(1e-300);
        if radial.abs() > TANGENT_REL_TOL * scale {
            return Err(Error::NotTangent { radial });
        }
        Ok(())
    }

    /// Levi-Civita covariant derivative of a tangent field along `direction`
    /// at `p`: the Euclidean directional derivative (`field_derivative`)
    /// followed by tangent projection.
    pub fn covariant_derivative(
        &self,
        p: &AmbientPoint,
        direction: &DVector<f64>,
        field_derivative: &DVector<f64>,
    ) -> Result<DVector<f64>> {
        self.check_tangent(p, direction)?;
        Ok(self.tangent_project(p, field_derivative))
    }

    /// Curvature tensor of the product applied to tangent vectors at `p`:
    ///
    /// ```text
    /// R(X,Y)Z = c{ <Y,Z>X - <X,Z>Y - <Y,xi><Z,xi>X + <X,xi><Z,xi>Y
    ///              + <X,Z><Y,xi>xi - <Y,Z><X,xi>xi }
    /// ```
    pub fn curvature(
        &self,
        p: &AmbientPoint,
        x: &DVector<f64>,
        y: &DVector<f64>,
        z: &DVector<f64>,
    ) -> Result<DVector<f64>> {
        self.check_tangent(p, x)?;
        self.check_tangent(p, y)?;
        self.check_tangent(p, z)?;
        Ok(self.curvature_unchecked(x, y, z))
    }

    /// Same as [`curvature`](Self::curvature) but without tangency checks;
    /// the formula only depends on the vector values.
    pub fn curvature_unchecked(
        &self,
        x: &DVector<f64>,
        y: &DVector<f64>,
        z: &DVector<f64>,
    ) -> DVector<f64> {
        let t = self.n + 1;
        let (xv, yv, zv) = (x[t], y[t], z[t]);
        let yz = y.dot(z);
        let xz = x.dot(z);
        let mut out = x * (yz - yv * zv) - y * (xz - xv * zv);
        out[t] += xz * yv - yz * xv;
        out * self.c
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn unit_space() -> AmbientSpace {
        AmbientSpace::new(2, 1.0).unwrap()
    }

    fn basis(space: &AmbientSpace, i: usize) -> DVector<f64> {
        let mut e = DVector::zeros(space.dim());
        e[i] = 1.0;
        e
    }

    fn random_point(space: &AmbientSpace, rng: &mut impl Rng) -> AmbientPoint {
        let ns = space.n() + 1;
        let mut x = DVector::from_fn(space.dim(), |_, _| rng.gen_range(-1.0..1.0));
        let norm = x.rows(0, ns).norm();
        for i in 0..ns {
            x[i] *= space.radius() / norm;
        }
        space.point(x).unwrap()
    }

    fn random_tangent(space: &AmbientSpace, p: &AmbientPoint, rng: &mut impl Rng) -> DVector<f64> {
        let v = DVector::from_fn(space.dim(), |_, _| rng.gen_range(-1.0..1.0));
        space.tangent_project(p, &v)
    }

    #[test]
    fn rejects_nonpositive_curvature_and_small_n() {
        assert!(AmbientSpace::new(2, 0.0).is_err());
        assert!(AmbientSpace::new(2, -1.0).is_err());
        assert!(AmbientSpace::new(1, 1.0).is_err());
    }

    #[test]
    fn projection_examples() {
        let space = unit_space();
        // p = (r e1, 0)
        let p = space.point(basis(&space, 0)).unwrap();
        // pure radial direction projects to zero
        let w = space.tangent_project(&p, &basis(&space, 0));
        assert!(w.norm() < 1e-15);
        // already tangent stays unchanged
        let w = space.tangent_project(&p, &basis(&space, 1));
        assert_relative_eq!(w, basis(&space, 1));
        // linearity: e1 + e2 + xi -> e2 + xi
        let v = basis(&space, 0) + basis(&space, 1) + space.vertical();
        let w = space.tangent_project(&p, &v);
        assert_relative_eq!(w, basis(&space, 1) + space.vertical(), epsilon = 1e-15);
    }

    #[test]
    fn projection_idempotent_and_self_adjoint() {
        let space = AmbientSpace::new(3, 2.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let p = random_point(&space, &mut rng);
            let v = DVector::from_fn(space.dim(), |_, _| rng.gen_range(-2.0..2.0));
            let w = DVector::from_fn(space.dim(), |_, _| rng.gen_range(-2.0..2.0));
            let pv = space.tangent_project(&p, &v);
            let ppv = space.tangent_project(&p, &pv);
            assert!((&ppv - &pv).norm() <= 1e-14 * pv.norm().max(1.0));
            let pw = space.tangent_project(&p, &w);
            assert!((pv.dot(&w) - v.dot(&pw)).abs() <= 1e-14 * v.norm() * w.norm());
        }
    }

    #[test]
    fn vertical_field_is_parallel() {
        let space = unit_space();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let p = random_point(&space, &mut rng);
            let dir = random_tangent(&space, &p, &mut rng);
            // constant field: Euclidean derivative is zero
            let zero = DVector::zeros(space.dim());
            let d = space.covariant_derivative(&p, &dir, &zero).unwrap();
            assert!(d.norm() == 0.0);
        }
    }

    #[test]
    fn curvature_constant_block_and_vertical_flatness() {
        let space = AmbientSpace::new(3, 2.0).unwrap();
        let p = space.point({
            let mut x = DVector::zeros(space.dim());
            x[0] = space.radius();
            x[space.n() + 1] = 3.0;
            x
        })
        .unwrap();
        // horizontal orthonormal X, Y with Z = Y gives c*X
        let x = basis(&space, 1);
        let y = basis(&space, 2);
        let r = space.curvature(&p, &x, &y, &y).unwrap();
        assert_relative_eq!(r, &x * space.c(), epsilon = 1e-14);
        // Y = Z = xi kills every term
        let xi = space.vertical();
        let r = space.curvature(&p, &x, &xi, &xi).unwrap();
        assert!(r.norm() <= 1e-15);
    }

    #[test]
    fn curvature_symmetries_on_random_tuples() {
        let space = AmbientSpace::new(3, 2.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..1000 {
            let p = random_point(&space, &mut rng);
            let x = random_tangent(&space, &p, &mut rng);
            let y = random_tangent(&space, &p, &mut rng);
            let z = random_tangent(&space, &p, &mut rng);
            let w = random_tangent(&space, &p, &mut rng);
            let scale = x.norm() * y.norm() * z.norm() * space.c();
            let rxyz = space.curvature(&p, &x, &y, &z).unwrap();
            let ryxz = space.curvature(&p, &y, &x, &z).unwrap();
            assert!((&rxyz + &ryxz).norm() <= 1e-12 * scale);
            // metric antisymmetry <R(X,Y)Z,W> = -<R(X,Y)W,Z>
            let rxyw = space.curvature(&p, &x, &y, &w).unwrap();
            assert!(
                (rxyz.dot(&w) + rxyw.dot(&z)).abs() <= 1e-12 * scale * w.norm().max(1.0)
            );
            // first Bianchi identity
            let ryzx = space.curvature(&p, &y, &z, &x).unwrap();
            let rzxy = space.curvature(&p, &z, &x, &y).unwrap();
            assert!((&rxyz + &ryzx + &rzxy).norm() <= 1e-12 * scale);
        }
    }

    #[test]
    fn non_tangent_input_rejected() {
        let space = unit_space();
        let p = space.point(basis(&space, 0)).unwrap();
        let radial = basis(&space, 0);
        assert!(matches!(
            space.curvature(&p, &radial, &basis(&space, 1), &basis(&space, 1)),
            Err(Error::NotTangent { .. })
        ));
    }

    #[test]
    fn off_manifold_point_rejected() {
        let space = unit_space();
        let mut x = DVector::zeros(space.dim());
        x[0] = 1.1;
        assert!(matches!(space.point(x), Err(Error::OffManifold { .. })));
    }
}
