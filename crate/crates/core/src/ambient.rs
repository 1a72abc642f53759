//! Closed-form geometry of the model space: metric, canonical frame,
//! Levi-Civita connection, curvature tensor, sectional curvature and
//! geodesic flow.
//!
//! Tangent vectors are carried in components of the canonical orthonormal
//! frame E₁ = e^{−z}∂x, E₂ = e^{z}∂y, E₃ = ∂z. The frame is orthonormal at
//! every point, so inner products reduce to the Euclidean dot of components
//! and the connection coefficients are position-independent constants; the
//! e^{±2z} metric weights enter only at the coordinate boundary
//! ([`frame_convert`] / [`coordinate_convert`]).

use crate::{lit, Real};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum AmbientError {
    #[error("non-finite input in {0}")]
    NonFinite(&'static str),
    #[error("degenerate plane: Gram determinant {gram:e} below {min:e}")]
    DegeneratePlane { gram: f64, min: f64 },
    #[error("step dt={dt} exceeds the integration horizon t_final={t_final}")]
    StepTooLarge { dt: f64, t_final: f64 },
    #[error("step size and horizon must be positive, got dt={dt}, t_final={t_final}")]
    NonPositiveStep { dt: f64, t_final: f64 },
}

/// A point of the model space in global coordinates (x, y, z).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AmbientPoint<T> {
    pub x: T,
    pub y: T,
    pub z: T,
}

impl<T: Real> AmbientPoint<T> {
    pub fn new(x: T, y: T, z: T) -> Self {
        Self { x, y, z }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

/// A tangent vector in canonical-frame components (a1, a2, a3); the frame is
/// orthonormal, so |v|² = a1² + a2² + a3² at every base point.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct AmbientVector<T> {
    pub a1: T,
    pub a2: T,
    pub a3: T,
}

impl<T: Real> AmbientVector<T> {
    pub fn new(a1: T, a2: T, a3: T) -> Self {
        Self { a1, a2, a3 }
    }

    pub fn zero() -> Self {
        Self::new(T::zero(), T::zero(), T::zero())
    }

    /// Frame vector Eₖ for k = 1, 2, 3.
    pub fn frame_basis(k: usize) -> Self {
        let mut v = Self::zero();
        match k {
            1 => v.a1 = T::one(),
            2 => v.a2 = T::one(),
            3 => v.a3 = T::one(),
            _ => panic!("frame index must be 1, 2 or 3, got {k}"),
        }
        v
    }

    pub fn dot(&self, other: &Self) -> T {
        self.a1 * other.a1 + self.a2 * other.a2 + self.a3 * other.a3
    }

    pub fn norm_sq(&self) -> T {
        self.dot(self)
    }

    pub fn norm(&self) -> T {
        self.norm_sq().sqrt()
    }

    pub fn cross(&self, other: &Self) -> Self {
        Self::new(
            self.a2 * other.a3 - self.a3 * other.a2,
            self.a3 * other.a1 - self.a1 * other.a3,
            self.a1 * other.a2 - self.a2 * other.a1,
        )
    }

    pub fn scale(&self, s: T) -> Self {
        Self::new(self.a1 * s, self.a2 * s, self.a3 * s)
    }

    pub fn is_finite(&self) -> bool {
        self.a1.is_finite() && self.a2.is_finite() && self.a3.is_finite()
    }
}

impl<T: Real> std::ops::Add for AmbientVector<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self::new(self.a1 + rhs.a1, self.a2 + rhs.a2, self.a3 + rhs.a3)
    }
}

impl<T: Real> std::ops::Sub for AmbientVector<T> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self::new(self.a1 - rhs.a1, self.a2 - rhs.a2, self.a3 - rhs.a3)
    }
}

impl<T: Real> std::ops::Neg for AmbientVector<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.a1, -self.a2, -self.a3)
    }
}

/// A tangent vector in coordinate-basis components (∂x, ∂y, ∂z).
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct CoordinateVector<T> {
    pub vx: T,
    pub vy: T,
    pub vz: T,
}

impl<T: Real> CoordinateVector<T> {
    pub fn new(vx: T, vy: T, vz: T) -> Self {
        Self { vx, vy, vz }
    }

    pub fn is_finite(&self) -> bool {
        self.vx.is_finite() && self.vy.is_finite() && self.vz.is_finite()
    }
}

/// Metric pairing e^{2z}·ux·vx + e^{−2z}·uy·vy + uz·vz of two
/// coordinate-basis vectors at p.
pub fn metric<T: Real>(
    p: &AmbientPoint<T>,
    u: &CoordinateVector<T>,
    v: &CoordinateVector<T>,
) -> Result<T, AmbientError> {
    if !p.is_finite() {
        return Err(AmbientError::NonFinite("point"));
    }
    if !u.is_finite() || !v.is_finite() {
        return Err(AmbientError::NonFinite("vector"));
    }
    let w = (lit::<T>(2.0) * p.z).exp();
    Ok(w * u.vx * v.vx + u.vy * v.vy / w + u.vz * v.vz)
}

/// Coordinate components → frame components at p: a1 = e^z·vx, a2 = e^{−z}·vy, a3 = vz.
pub fn frame_convert<T: Real>(p: &AmbientPoint<T>, v: &CoordinateVector<T>) -> AmbientVector<T> {
    let ez = p.z.exp();
    AmbientVector::new(ez * v.vx, v.vy / ez, v.vz)
}

/// Inverse of [`frame_convert`].
pub fn coordinate_convert<T: Real>(
    p: &AmbientPoint<T>,
    v: &AmbientVector<T>,
) -> CoordinateVector<T> {
    let ez = p.z.exp();
    CoordinateVector::new(v.a1 / ez, v.a2 * ez, v.a3)
}

/// ∇̄_u v from the constant frame connection table
///
/// ∇̄_{E₁}E₁ = −E₃   ∇̄_{E₁}E₂ = 0    ∇̄_{E₁}E₃ = E₁
/// ∇̄_{E₂}E₁ = 0     ∇̄_{E₂}E₂ = E₃   ∇̄_{E₂}E₃ = −E₂
/// ∇̄_{E₃}Eₖ = 0
///
/// plus the directional-derivative term: `dv` must hold u(v₁), u(v₂), u(v₃),
/// the derivatives of v's frame components along u, supplied by the caller
/// (zero for frame-constant fields).
pub fn covariant_derivative<T: Real>(
    u: &AmbientVector<T>,
    v: &AmbientVector<T>,
    dv: &AmbientVector<T>,
) -> AmbientVector<T> {
    AmbientVector::new(
        dv.a1 + u.a1 * v.a3,
        dv.a2 - u.a2 * v.a3,
        dv.a3 - u.a1 * v.a1 + u.a2 * v.a2,
    )
}

/// Curvature tensor of the model space, with the sign convention
/// R(X,Y)Z = ∇_X∇_Y Z − ∇_Y∇_X Z − ∇_{[X,Y]}Z:
///
/// R̄(X,Y)Z = ⟨Y,Z⟩X − ⟨X,Z⟩Y + 2⟨Z,E₃⟩(⟨X,E₃⟩Y − ⟨Y,E₃⟩X)
///           + 2(⟨X,Z⟩⟨Y,E₃⟩ − ⟨Y,Z⟩⟨X,E₃⟩)E₃.
pub fn curvature_tensor<T: Real>(
    x: &AmbientVector<T>,
    y: &AmbientVector<T>,
    z: &AmbientVector<T>,
) -> AmbientVector<T> {
    let two = lit::<T>(2.0);
    let yz = y.dot(z);
    let xz = x.dot(z);
    let first = x.scale(yz) - y.scale(xz);
    let second = (y.scale(x.a3) - x.scale(y.a3)).scale(two * z.a3);
    let third = AmbientVector::new(T::zero(), T::zero(), two * (xz * y.a3 - yz * x.a3));
    first + second + third
}

/// ⟨R̄(u,v)v,u⟩ / (|u|²|v|² − ⟨u,v⟩²); rejects planes whose Gram determinant
/// falls below 1e−12.
pub fn sectional_curvature<T: Real>(
    u: &AmbientVector<T>,
    v: &AmbientVector<T>,
) -> Result<T, AmbientError> {
    let gram = u.norm_sq() * v.norm_sq() - u.dot(v) * u.dot(v);
    let min = 1e-12;
    if gram.to_f64().map_or(true, |g| g < min) {
        return Err(AmbientError::DegeneratePlane {
            gram: gram.to_f64().unwrap_or(f64::NAN),
            min,
        });
    }
    Ok(curvature_tensor(u, v, v).dot(u) / gram)
}

/// Coordinate-basis Christoffel symbols Γ[k][i][j] (k the upper index) of
/// the metric e^{2z}dx² + e^{−2z}dy² + dz²; the only nonzero entries are
/// Γ^x_{xz} = 1, Γ^y_{yz} = −1, Γ^z_{xx} = −e^{2z}, Γ^z_{yy} = e^{−2z}.
pub fn christoffel<T: Real>(p: &AmbientPoint<T>) -> [[[T; 3]; 3]; 3] {
    let zero = T::zero();
    let one = T::one();
    let w = (lit::<T>(2.0) * p.z).exp();
    let mut gamma = [[[zero; 3]; 3]; 3];
    gamma[0][0][2] = one;
    gamma[0][2][0] = one;
    gamma[1][1][2] = -one;
    gamma[1][2][1] = -one;
    gamma[2][0][0] = -w;
    gamma[2][1][1] = one / w;
    gamma
}

/// One sample of a geodesic path: parameter value, position, velocity.
#[derive(Clone, Copy, Debug)]
pub struct GeodesicSample<T> {
    pub t: T,
    pub point: AmbientPoint<T>,
    pub velocity: CoordinateVector<T>,
}

// State layout for the geodesic ODE: (x, y, z, vx, vy, vz).
fn geodesic_rhs<T: Real>(state: &[T; 6]) -> [T; 6] {
    let p = AmbientPoint::new(state[0], state[1], state[2]);
    let v = [state[3], state[4], state[5]];
    let gamma = christoffel(&p);
    let mut acc = [T::zero(); 3];
    for k in 0..3 {
        let mut s = T::zero();
        for i in 0..3 {
            for j in 0..3 {
                s = s + gamma[k][i][j] * v[i] * v[j];
            }
        }
        acc[k] = -s;
    }
    [v[0], v[1], v[2], acc[0], acc[1], acc[2]]
}

/// Classical fourth-order fixed-step integration of the geodesic equation
/// v̇^k = −Γ^k_{ij} v^i v^j. The horizon is rounded to a whole number of
/// steps; the returned path includes the initial sample.
pub fn geodesic_flow<T: Real>(
    p: &AmbientPoint<T>,
    v: &CoordinateVector<T>,
    t_final: T,
    dt: T,
) -> Result<Vec<GeodesicSample<T>>, AmbientError> {
    if dt <= T::zero() || t_final <= T::zero() {
        return Err(AmbientError::NonPositiveStep {
            dt: dt.to_f64().unwrap_or(f64::NAN),
            t_final: t_final.to_f64().unwrap_or(f64::NAN),
        });
    }
    if dt > t_final {
        return Err(AmbientError::StepTooLarge {
            dt: dt.to_f64().unwrap_or(f64::NAN),
            t_final: t_final.to_f64().unwrap_or(f64::NAN),
        });
    }
    let steps = (t_final / dt).round().to_usize().unwrap_or(0).max(1);
    let half = lit::<T>(0.5);
    let sixth = T::one() / lit::<T>(6.0);
    let two = lit::<T>(2.0);

    let mut state = [p.x, p.y, p.z, v.vx, v.vy, v.vz];
    let mut path = Vec::with_capacity(steps + 1);
    let sample = |t: T, s: &[T; 6]| GeodesicSample {
        t,
        point: AmbientPoint::new(s[0], s[1], s[2]),
        velocity: CoordinateVector::new(s[3], s[4], s[5]),
    };
    path.push(sample(T::zero(), &state));

    for n in 0..steps {
        let k1 = geodesic_rhs(&state);
        let mut s2 = state;
        for i in 0..6 {
            s2[i] = state[i] + half * dt * k1[i];
        }
        let k2 = geodesic_rhs(&s2);
        let mut s3 = state;
        for i in 0..6 {
            s3[i] = state[i] + half * dt * k2[i];
        }
        let k3 = geodesic_rhs(&s3);
        let mut s4 = state;
        for i in 0..6 {
            s4[i] = state[i] + dt * k3[i];
        }
        let k4 = geodesic_rhs(&s4);
        for i in 0..6 {
            state[i] = state[i] + dt * sixth * (k1[i] + two * k2[i] + two * k3[i] + k4[i]);
        }
        let t = dt * T::from_usize(n + 1).unwrap();
        path.push(sample(t, &state));
    }
    Ok(path)
}
