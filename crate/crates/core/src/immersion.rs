//! The surface catalog and pointwise second-order surface geometry:
//! induced metric, unit normal, second fundamental form, shape operator,
//! normal angles against the left-invariant frame, and tangential frame
//! projections.
//!
//! Charts are analytic second-order jets; everything downstream of the jet
//! (metric, normal, curvature) is exact arithmetic on the jet, so grid
//! resolution only enters through the stencil operators of `surfcalc`.

use crate::ambient::{
    covariant_derivative, frame_convert, AmbientError, AmbientPoint, AmbientVector,
    CoordinateVector,
};
use crate::surfcalc::{partial, CalcError, GridField};
use crate::{lit, Real};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ImmersionError {
    #[error("unknown surface '{0}' (catalog: leaf_x, leaf_y, leaf_z, graph, torus, sphere)")]
    UnknownSurface(String),
    #[error("invalid parameter: {0}")]
    BadParameter(String),
    #[error("resolution {0} too small for 3-point stencils (need at least 4)")]
    ResolutionTooSmall(usize),
    #[error("immersion singular at (s,t) = ({s}, {t}): normalized Gram determinant {ratio:e}")]
    SingularPoint { s: f64, t: f64, ratio: f64 },
    #[error(transparent)]
    Ambient(#[from] AmbientError),
    #[error(transparent)]
    Calc(#[from] CalcError),
}

/// Shape parameters for the catalog; unused entries are ignored by charts
/// that do not read them.
#[derive(Clone, Copy, Debug)]
pub struct SurfaceParams<T> {
    /// Level of the coordinate plane charts.
    pub c: T,
    /// Height amplitude of the periodic graph.
    pub eps: T,
    /// Torus ring radius.
    pub major: T,
    /// Torus tube radius.
    pub minor: T,
    /// Sphere radius.
    pub rho: T,
    /// Angular width of the polar caps removed from the sphere chart.
    pub band: T,
}

impl<T: Real> Default for SurfaceParams<T> {
    fn default() -> Self {
        Self {
            c: T::zero(),
            eps: lit(0.1),
            major: lit(2.0),
            minor: lit(0.5),
            rho: T::one(),
            band: lit(0.3),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum ChartKind {
    LeafX,
    LeafY,
    LeafZ,
    Graph,
    Torus,
    Sphere,
    /// `graph` with the two chart coordinates exchanged; not part of the
    /// public catalog, used to exercise reparametrization invariance.
    #[cfg_attr(not(test), allow(dead_code))]
    GraphSwapped,
}

/// Second-order jet of the immersion at one parameter point, in ambient
/// coordinates. The second partials are plain componentwise derivatives of
/// the chart map (not tensorial); the covariant correction is applied when
/// the second fundamental form is assembled.
#[derive(Clone, Copy, Debug)]
pub struct Jet2<T> {
    pub p: AmbientPoint<T>,
    pub ds: CoordinateVector<T>,
    pub dt: CoordinateVector<T>,
    pub dss: CoordinateVector<T>,
    pub dst: CoordinateVector<T>,
    pub dtt: CoordinateVector<T>,
}

/// Everything second-order at one surface point, in chart-basis components
/// (indices 0 = s, 1 = t) and frame components where noted.
#[derive(Clone, Copy, Debug)]
pub struct SurfacePointData<T> {
    pub point: AmbientPoint<T>,
    /// Induced metric g_ij.
    pub g: [[T; 2]; 2],
    pub g_inv: [[T; 2]; 2],
    pub sqrt_det_g: T,
    /// Chart tangents φ_s, φ_t in frame components.
    pub tangent: [AmbientVector<T>; 2],
    /// Unit normal in frame components, oriented by φ_s × φ_t.
    pub xi: AmbientVector<T>,
    /// Second fundamental form h_ij = ⟨∇̄_{∂_i}φ_j, ξ⟩.
    pub h: [[T; 2]; 2],
    /// Shape operator A^i_j = g^{ik} h_{kj}.
    pub a: [[T; 2]; 2],
    /// Mean curvature f = ½ tr A.
    pub f: T,
    /// Squared norm of the shape operator S = tr(A²).
    pub norm_a2: T,
    /// Gauss curvature from the ambient curvature data.
    pub k: T,
    /// Normal angles c_k = ⟨ξ, E_k⟩.
    pub c: [T; 3],
    /// Chart components of the tangential projections E_k^T = E_k − c_k ξ:
    /// `etop[k][i]` with (E_k^T)^i = g^{ij} ⟨E_k, φ_j⟩.
    pub etop: [[T; 2]; 3],
}

/// Gauss curvature K = 2c₃² − 1 + 2f² − ½S, i.e. the ambient sectional
/// curvature of the tangent plane plus the determinant of the shape
/// operator.
pub fn gaussian_curvature_extrinsic<T: Real>(c3: T, f: T, norm_a2: T) -> T {
    let two = lit::<T>(2.0);
    two * c3 * c3 - T::one() + two * f * f - lit::<T>(0.5) * norm_a2
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub domain: &'static str,
    pub periodic: [bool; 2],
    /// Whether the mean curvature is constant along the surface.
    pub cmc: bool,
    pub description: &'static str,
}

pub fn catalog() -> Vec<CatalogEntry> {
    vec![
        CatalogEntry {
            name: "leaf_x",
            domain: "[-1,1] x [-1,1]",
            periodic: [false, false],
            cmc: true,
            description: "totally geodesic plane x = c: A = 0, K = -1, normal E1",
        },
        CatalogEntry {
            name: "leaf_y",
            domain: "[-1,1] x [-1,1]",
            periodic: [false, false],
            cmc: true,
            description: "totally geodesic plane y = c: A = 0, K = -1, normal -E2",
        },
        CatalogEntry {
            name: "leaf_z",
            domain: "[-1,1] x [-1,1]",
            periodic: [false, false],
            cmc: true,
            description: "minimal plane z = c: f = 0, S = 2, K = 0, normal E3",
        },
        CatalogEntry {
            name: "graph",
            domain: "[0,2pi) x [0,2pi)",
            periodic: [true, true],
            cmc: false,
            description: "doubly periodic graph z = eps sin(s) sin(t); closed in the stencil sense",
        },
        CatalogEntry {
            name: "torus",
            domain: "[0,2pi) x [0,2pi)",
            periodic: [true, true],
            cmc: false,
            description: "torus of revolution about the z-axis (ring radius `major`, tube radius `minor`); closed",
        },
        CatalogEntry {
            name: "sphere",
            domain: "[0,2pi) x [-pi/2+band, pi/2-band]",
            periodic: [true, false],
            cmc: false,
            description: "round-profile sphere of radius rho with both polar caps masked off",
        },
    ]
}

/// A catalog surface with fixed parameters.
#[derive(Clone, Copy, Debug)]
pub struct Chart<T> {
    kind: ChartKind,
    params: SurfaceParams<T>,
}

impl<T: Real> Chart<T> {
    pub fn by_name(name: &str, params: SurfaceParams<T>) -> Result<Self, ImmersionError> {
        let kind = match name {
            "leaf_x" => ChartKind::LeafX,
            "leaf_y" => ChartKind::LeafY,
            "leaf_z" => ChartKind::LeafZ,
            "graph" => ChartKind::Graph,
            "torus" => ChartKind::Torus,
            "sphere" => ChartKind::Sphere,
            other => return Err(ImmersionError::UnknownSurface(other.to_string())),
        };
        let bad = |msg: &str| Err(ImmersionError::BadParameter(msg.to_string()));
        match kind {
            ChartKind::Torus => {
                if !(params.minor > T::zero() && params.minor < params.major) {
                    return bad("torus requires 0 < minor < major");
                }
            }
            ChartKind::Sphere => {
                if !(params.rho > T::zero()) {
                    return bad("sphere requires rho > 0");
                }
                let half_pi = lit::<T>(std::f64::consts::FRAC_PI_2);
                if !(params.band > T::zero() && params.band < half_pi) {
                    return bad("sphere requires 0 < band < pi/2");
                }
            }
            _ => {}
        }
        Ok(Self { kind, params })
    }

    /// The `graph` chart with (s,t) exchanged; same surface, opposite
    /// orientation. Test-only entry point for invariance checks.
    #[cfg_attr(not(test), allow(dead_code))]
    pub(crate) fn graph_swapped(params: SurfaceParams<T>) -> Self {
        Self {
            kind: ChartKind::GraphSwapped,
            params,
        }
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            ChartKind::LeafX => "leaf_x",
            ChartKind::LeafY => "leaf_y",
            ChartKind::LeafZ => "leaf_z",
            ChartKind::Graph => "graph",
            ChartKind::Torus => "torus",
            ChartKind::Sphere => "sphere",
            ChartKind::GraphSwapped => "graph_swapped",
        }
    }

    pub fn params(&self) -> SurfaceParams<T> {
        self.params
    }

    /// ((s0, s1), (t0, t1)); on periodic axes the right endpoint is the
    /// identified seam and is excluded from the node set.
    pub fn domain(&self) -> ([T; 2], [T; 2]) {
        let tau = lit::<T>(2.0 * std::f64::consts::PI);
        let one = T::one();
        match self.kind {
            ChartKind::LeafX | ChartKind::LeafY | ChartKind::LeafZ => {
                ([-one, one], [-one, one])
            }
            ChartKind::Graph | ChartKind::Torus | ChartKind::GraphSwapped => {
                ([T::zero(), tau], [T::zero(), tau])
            }
            ChartKind::Sphere => {
                let half_pi = lit::<T>(std::f64::consts::FRAC_PI_2);
                (
                    [T::zero(), tau],
                    [-half_pi + self.params.band, half_pi - self.params.band],
                )
            }
        }
    }

    pub fn periodic(&self) -> [bool; 2] {
        match self.kind {
            ChartKind::LeafX | ChartKind::LeafY | ChartKind::LeafZ => [false, false],
            ChartKind::Graph | ChartKind::Torus | ChartKind::GraphSwapped => [true, true],
            ChartKind::Sphere => [true, false],
        }
    }

    /// Doubly periodic lattice: stencil sums telescope, integrals are exact
    /// in the quadrature sense.
    pub fn closed(&self) -> bool {
        self.periodic() == [true, true]
    }

    /// Compact surface sampled with a documented excluded region (the
    /// sphere's polar caps); integrals are allowed but flagged.
    pub fn masked_compact(&self) -> bool {
        self.kind == ChartKind::Sphere
    }

    /// Whether the mean curvature is constant along the surface.
    pub fn constant_mean_curvature(&self) -> bool {
        matches!(
            self.kind,
            ChartKind::LeafX | ChartKind::LeafY | ChartKind::LeafZ
        )
    }

    pub fn jet(&self, s: T, t: T) -> Jet2<T> {
        let zero = T::zero();
        let one = T::one();
        let cv = CoordinateVector::new;
        match self.kind {
            ChartKind::LeafX => Jet2 {
                p: AmbientPoint::new(self.params.c, s, t),
                ds: cv(zero, one, zero),
                dt: cv(zero, zero, one),
                dss: cv(zero, zero, zero),
                dst: cv(zero, zero, zero),
                dtt: cv(zero, zero, zero),
            },
            ChartKind::LeafY => Jet2 {
                p: AmbientPoint::new(s, self.params.c, t),
                ds: cv(one, zero, zero),
                dt: cv(zero, zero, one),
                dss: cv(zero, zero, zero),
                dst: cv(zero, zero, zero),
                dtt: cv(zero, zero, zero),
            },
            ChartKind::LeafZ => Jet2 {
                p: AmbientPoint::new(s, t, self.params.c),
                ds: cv(one, zero, zero),
                dt: cv(zero, one, zero),
                dss: cv(zero, zero, zero),
                dst: cv(zero, zero, zero),
                dtt: cv(zero, zero, zero),
            },
            ChartKind::Graph => {
                let e = self.params.eps;
                Jet2 {
                    p: AmbientPoint::new(s, t, e * s.sin() * t.sin()),
                    ds: cv(one, zero, e * s.cos() * t.sin()),
                    dt: cv(zero, one, e * s.sin() * t.cos()),
                    dss: cv(zero, zero, -e * s.sin() * t.sin()),
                    dst: cv(zero, zero, e * s.cos() * t.cos()),
                    dtt: cv(zero, zero, -e * s.sin() * t.sin()),
                }
            }
            ChartKind::GraphSwapped => {
                let j = Chart {
                    kind: ChartKind::Graph,
                    params: self.params,
                }
                .jet(t, s);
                Jet2 {
                    p: j.p,
                    ds: j.dt,
                    dt: j.ds,
                    dss: j.dtt,
                    dst: j.dst,
                    dtt: j.dss,
                }
            }
            ChartKind::Torus => {
                let (rr, r) = (self.params.major, self.params.minor);
                let ring = rr + r * t.cos();
                Jet2 {
                    p: AmbientPoint::new(ring * s.cos(), ring * s.sin(), r * t.sin()),
                    ds: cv(-ring * s.sin(), ring * s.cos(), zero),
                    dt: cv(-r * t.sin() * s.cos(), -r * t.sin() * s.sin(), r * t.cos()),
                    dss: cv(-ring * s.cos(), -ring * s.sin(), zero),
                    dst: cv(r * t.sin() * s.sin(), -r * t.sin() * s.cos(), zero),
                    dtt: cv(-r * t.cos() * s.cos(), -r * t.cos() * s.sin(), -r * t.sin()),
                }
            }
            ChartKind::Sphere => {
                let rho = self.params.rho;
                Jet2 {
                    p: AmbientPoint::new(
                        rho * t.cos() * s.cos(),
                        rho * t.cos() * s.sin(),
                        rho * t.sin(),
                    ),
                    ds: cv(-rho * t.cos() * s.sin(), rho * t.cos() * s.cos(), zero),
                    dt: cv(
                        -rho * t.sin() * s.cos(),
                        -rho * t.sin() * s.sin(),
                        rho * t.cos(),
                    ),
                    dss: cv(-rho * t.cos() * s.cos(), -rho * t.cos() * s.sin(), zero),
                    dst: cv(rho * t.sin() * s.sin(), -rho * t.sin() * s.cos(), zero),
                    dtt: cv(
                        -rho * t.cos() * s.cos(),
                        -rho * t.cos() * s.sin(),
                        -rho * t.sin(),
                    ),
                }
            }
        }
    }

    pub fn evaluate_point(&self, s: T, t: T) -> Result<SurfacePointData<T>, ImmersionError> {
        let jet = self.jet(s, t);
        let p = jet.p;
        let t1 = frame_convert(&p, &jet.ds);
        let t2 = frame_convert(&p, &jet.dt);
        let g = [[t1.dot(&t1), t1.dot(&t2)], [t2.dot(&t1), t2.dot(&t2)]];
        let det = g[0][0] * g[1][1] - g[0][1] * g[1][0];
        let half_trace = lit::<T>(0.5) * (g[0][0] + g[1][1]);
        let ratio = det / (half_trace * half_trace);
        if !ratio.is_finite() || ratio < lit(1e-10) {
            return Err(ImmersionError::SingularPoint {
                s: s.to_f64().unwrap_or(f64::NAN),
                t: t.to_f64().unwrap_or(f64::NAN),
                ratio: ratio.to_f64().unwrap_or(f64::NAN),
            });
        }
        let g_inv = [
            [g[1][1] / det, -g[0][1] / det],
            [-g[1][0] / det, g[0][0] / det],
        ];
        let sqrt_det_g = det.sqrt();
        let xi = t1.cross(&t2).scale(T::one() / sqrt_det_g);

        // d/dλ of the frame components (e^z vx, e^{−z} vy, vz) of a
        // coordinate field v along a curve with ż = z_dir.
        let comp_rate = |z_dir: T, v: &CoordinateVector<T>, dv: &CoordinateVector<T>| {
            let ez = p.z.exp();
            AmbientVector::new(
                ez * (dv.vx + z_dir * v.vx),
                (dv.vy - z_dir * v.vy) / ez,
                dv.vz,
            )
        };
        let dds_t1 = covariant_derivative(&t1, &t1, &comp_rate(jet.ds.vz, &jet.ds, &jet.dss));
        let dds_t2 = covariant_derivative(&t1, &t2, &comp_rate(jet.ds.vz, &jet.dt, &jet.dst));
        let ddt_t1 = covariant_derivative(&t2, &t1, &comp_rate(jet.dt.vz, &jet.ds, &jet.dst));
        let ddt_t2 = covariant_derivative(&t2, &t2, &comp_rate(jet.dt.vz, &jet.dt, &jet.dtt));
        let half = lit::<T>(0.5);
        let h_off = half * (dds_t2.dot(&xi) + ddt_t1.dot(&xi));
        let h = [[dds_t1.dot(&xi), h_off], [h_off, ddt_t2.dot(&xi)]];

        let mut a = [[T::zero(); 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                a[i][j] = g_inv[i][0] * h[0][j] + g_inv[i][1] * h[1][j];
            }
        }
        let f = half * (a[0][0] + a[1][1]);
        let norm_a2 =
            a[0][0] * a[0][0] + a[0][1] * a[1][0] + a[1][0] * a[0][1] + a[1][1] * a[1][1];
        let c = [xi.a1, xi.a2, xi.a3];
        let k = gaussian_curvature_extrinsic(c[2], f, norm_a2);

        let tangents = [t1, t2];
        let mut etop = [[T::zero(); 2]; 3];
        for (kk, e) in etop.iter_mut().enumerate() {
            let ek = AmbientVector::frame_basis(kk + 1);
            let cov = [ek.dot(&tangents[0]), ek.dot(&tangents[1])];
            for i in 0..2 {
                e[i] = g_inv[i][0] * cov[0] + g_inv[i][1] * cov[1];
            }
        }

        Ok(SurfacePointData {
            point: p,
            g,
            g_inv,
            sqrt_det_g,
            tangent: tangents,
            xi,
            h,
            a,
            f,
            norm_a2,
            k,
            c,
            etop,
        })
    }

    /// Node coordinates at resolution n: periodic axes take n nodes with
    /// spacing L/n (seam excluded), non-periodic axes n nodes with spacing
    /// L/(n−1) (endpoints included).
    pub fn lattice(&self, n: usize) -> Result<(Vec<T>, Vec<T>, T, T), ImmersionError> {
        if n < 4 {
            return Err(ImmersionError::ResolutionTooSmall(n));
        }
        let ([s0, s1], [t0, t1]) = self.domain();
        let periodic = self.periodic();
        let axis = |a: T, b: T, per: bool| {
            let steps = if per { n } else { n - 1 };
            let h = (b - a) / T::from_usize(steps).unwrap();
            let nodes: Vec<T> = (0..n)
                .map(|k| a + h * T::from_usize(k).unwrap())
                .collect();
            (nodes, h)
        };
        let (ss, hs) = axis(s0, s1, periodic[0]);
        let (ts, ht) = axis(t0, t1, periodic[1]);
        Ok((ss, ts, hs, ht))
    }

    pub fn sample_grid(
        &self,
        n: usize,
    ) -> Result<GridField<T, SurfacePointData<T>>, ImmersionError> {
        let (ss, ts, hs, ht) = self.lattice(n)?;
        GridField::try_from_fn(n, n, hs, ht, self.periodic(), |i, j| {
            self.evaluate_point(ss[i], ts[j])
        })
    }
}

fn det3<T: Real>(m: [[T; 3]; 3]) -> T {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Intrinsic Gauss curvature from the metric alone (Brioschi determinant
/// formula), with metric derivatives by central differences; margin 2.
/// Entirely independent of the normal/shape-operator pipeline.
pub fn gaussian_curvature_intrinsic<T: Real>(
    g: &GridField<T, [[T; 2]; 2]>,
) -> Result<GridField<T>, ImmersionError> {
    let e = g.map(|m| m[0][0]);
    let f = g.map(|m| m[0][1]);
    let gg = g.map(|m| m[1][1]);
    let e_s = partial(0, &e)?;
    let e_t = partial(1, &e)?;
    let f_s = partial(0, &f)?;
    let f_t = partial(1, &f)?;
    let g_s = partial(0, &gg)?;
    let g_t = partial(1, &gg)?;
    let e_tt = partial(1, &e_t)?;
    let g_ss = partial(0, &g_s)?;
    let f_st = partial(1, &f_s)?;
    let margin = e_tt.margin().max(g.margin());
    let half = lit::<T>(0.5);
    let out = GridField::from_fn(g.ns(), g.nt(), g.hs(), g.ht(), g.periodic(), |i, j| {
        let (ev, fv, gv) = (e.at(i, j), f.at(i, j), gg.at(i, j));
        let m1 = [
            [
                -half * e_tt.at(i, j) + f_st.at(i, j) - half * g_ss.at(i, j),
                half * e_s.at(i, j),
                f_s.at(i, j) - half * e_t.at(i, j),
            ],
            [f_t.at(i, j) - half * g_s.at(i, j), ev, fv],
            [half * g_t.at(i, j), fv, gv],
        ];
        let m2 = [
            [T::zero(), half * e_t.at(i, j), half * g_s.at(i, j)],
            [half * e_t.at(i, j), ev, fv],
            [half * g_s.at(i, j), fv, gv],
        ];
        let den = ev * gv - fv * fv;
        (det3(m1) - det3(m2)) / (den * den)
    });
    Ok(out.with_margin(margin))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surfcalc::max_abs;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn p() -> SurfaceParams<f64> {
        SurfaceParams::default()
    }

    #[test]
    fn catalog_lists_six_charts() {
        let cat = catalog();
        assert_eq!(cat.len(), 6);
        for entry in cat {
            let chart = Chart::<f64>::by_name(entry.name, p()).unwrap();
            assert_eq!(chart.name(), entry.name);
            assert_eq!(chart.periodic(), entry.periodic);
            assert_eq!(chart.constant_mean_curvature(), entry.cmc);
        }
        assert!(matches!(
            Chart::<f64>::by_name("klein", p()),
            Err(ImmersionError::UnknownSurface(_))
        ));
    }

    #[test]
    fn parameter_validation() {
        let mut bad = p();
        bad.minor = 3.0; // > major
        assert!(matches!(
            Chart::<f64>::by_name("torus", bad),
            Err(ImmersionError::BadParameter(_))
        ));
        let mut bad = p();
        bad.band = 0.0;
        assert!(matches!(
            Chart::<f64>::by_name("sphere", bad),
            Err(ImmersionError::BadParameter(_))
        ));
    }

    #[test]
    fn horizontal_leaf_geometry_is_exact() {
        // z = c: g = diag(e^{2c}, e^{−2c}), ξ = E3, A = diag(−1, +1),
        // f = 0, S = 2, K = 0.
        for c in [0.0, 0.7, -1.3] {
            let mut params = p();
            params.c = c;
            let chart = Chart::by_name("leaf_z", params).unwrap();
            let d = chart.evaluate_point(0.3, -0.8).unwrap();
            let e2c = (2.0 * c).exp();
            assert_abs_diff_eq!(d.g[0][0], e2c, epsilon = 1e-14 * e2c);
            assert_abs_diff_eq!(d.g[1][1], 1.0 / e2c, epsilon = 1e-14 / e2c);
            assert_eq!(d.g[0][1], 0.0);
            assert_abs_diff_eq!(d.h[0][0], -e2c, epsilon = 1e-14 * e2c);
            assert_abs_diff_eq!(d.h[1][1], 1.0 / e2c, epsilon = 1e-14 / e2c);
            assert_abs_diff_eq!(d.a[0][0], -1.0, epsilon = 1e-14);
            assert_abs_diff_eq!(d.a[1][1], 1.0, epsilon = 1e-14);
            assert_eq!(d.a[0][1], 0.0);
            assert_eq!(d.a[1][0], 0.0);
            assert_abs_diff_eq!(d.f, 0.0, epsilon = 1e-15);
            assert_abs_diff_eq!(d.norm_a2, 2.0, epsilon = 1e-14);
            assert_abs_diff_eq!(d.k, 0.0, epsilon = 1e-14);
            assert_eq!(d.c[0], 0.0);
            assert_eq!(d.c[1], 0.0);
            assert_abs_diff_eq!(d.c[2], 1.0, epsilon = 1e-15);
            // E3 is normal, so E3^T = 0.
            assert_abs_diff_eq!(d.etop[2][0], 0.0, epsilon = 1e-15);
            assert_abs_diff_eq!(d.etop[2][1], 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn vertical_leaves_are_totally_geodesic_with_k_minus_one() {
        for (name, want_c) in [("leaf_x", [1.0, 0.0, 0.0]), ("leaf_y", [0.0, -1.0, 0.0])] {
            let chart = Chart::by_name(name, p()).unwrap();
            for (s, t) in [(0.0, 0.0), (0.5, -0.9), (-1.0, 1.0)] {
                let d = chart.evaluate_point(s, t).unwrap();
                for i in 0..2 {
                    for j in 0..2 {
                        assert_abs_diff_eq!(d.h[i][j], 0.0, epsilon = 1e-14);
                        assert_abs_diff_eq!(d.a[i][j], 0.0, epsilon = 1e-14);
                    }
                }
                assert_abs_diff_eq!(d.k, -1.0, epsilon = 1e-14);
                for k in 0..3 {
                    assert_abs_diff_eq!(d.c[k], want_c[k], epsilon = 1e-14);
                }
            }
        }
    }

    #[test]
    fn graph_at_zero_amplitude_matches_flat_leaf() {
        let mut params = p();
        params.eps = 0.0;
        let graph = Chart::by_name("graph", params).unwrap();
        let leaf = Chart::by_name("leaf_z", params).unwrap();
        let a = graph.evaluate_point(1.2, 2.3).unwrap();
        let b = leaf.evaluate_point(1.2, 2.3).unwrap();
        assert_eq!(a.g, b.g);
        assert_eq!(a.a, b.a);
        assert_eq!(a.c, b.c);
    }

    #[test]
    fn jets_match_position_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let charts = [
            Chart::by_name("graph", p()).unwrap(),
            Chart::by_name("torus", p()).unwrap(),
            Chart::by_name("sphere", p()).unwrap(),
        ];
        let delta = 1e-5;
        for chart in charts {
            for _ in 0..20 {
                let s = rng.gen_range(0.0..2.0 * PI);
                let t = rng.gen_range(-1.0..1.0);
                let j = chart.jet(s, t);
                let pos = |s: f64, t: f64| chart.jet(s, t).p;
                let fd = |a: AmbientPoint<f64>, b: AmbientPoint<f64>| {
                    CoordinateVector::new(
                        (a.x - b.x) / (2.0 * delta),
                        (a.y - b.y) / (2.0 * delta),
                        (a.z - b.z) / (2.0 * delta),
                    )
                };
                let ds = fd(pos(s + delta, t), pos(s - delta, t));
                let dt = fd(pos(s, t + delta), pos(s, t - delta));
                for (got, want) in [(j.ds, ds), (j.dt, dt)] {
                    assert_abs_diff_eq!(got.vx, want.vx, epsilon = 1e-7);
                    assert_abs_diff_eq!(got.vy, want.vy, epsilon = 1e-7);
                    assert_abs_diff_eq!(got.vz, want.vz, epsilon = 1e-7);
                }
                let second = |a: Jet2<f64>, b: Jet2<f64>, pick: fn(&Jet2<f64>) -> CoordinateVector<f64>| {
                    let (va, vb) = (pick(&a), pick(&b));
                    CoordinateVector::new(
                        (va.vx - vb.vx) / (2.0 * delta),
                        (va.vy - vb.vy) / (2.0 * delta),
                        (va.vz - vb.vz) / (2.0 * delta),
                    )
                };
                let dss = second(chart.jet(s + delta, t), chart.jet(s - delta, t), |j| j.ds);
                let dst = second(chart.jet(s, t + delta), chart.jet(s, t - delta), |j| j.ds);
                let dtt = second(chart.jet(s, t + delta), chart.jet(s, t - delta), |j| j.dt);
                for (got, want) in [(j.dss, dss), (j.dst, dst), (j.dtt, dtt)] {
                    assert_abs_diff_eq!(got.vx, want.vx, epsilon = 1e-6);
                    assert_abs_diff_eq!(got.vy, want.vy, epsilon = 1e-6);
                    assert_abs_diff_eq!(got.vz, want.vz, epsilon = 1e-6);
                }
            }
        }
    }

    #[test]
    fn normal_is_unit_and_orthogonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for name in ["leaf_x", "leaf_y", "leaf_z", "graph", "torus", "sphere"] {
            let chart = Chart::by_name(name, p()).unwrap();
            for _ in 0..25 {
                let s = rng.gen_range(0.0..2.0 * PI);
                let t = rng.gen_range(-1.0..1.0);
                let d = chart.evaluate_point(s, t).unwrap();
                assert_abs_diff_eq!(d.xi.norm(), 1.0, epsilon = 1e-12);
                assert_abs_diff_eq!(d.xi.dot(&d.tangent[0]), 0.0, epsilon = 1e-12);
                assert_abs_diff_eq!(d.xi.dot(&d.tangent[1]), 0.0, epsilon = 1e-12);
                let c2: f64 = d.c.iter().map(|c| c * c).sum();
                assert_abs_diff_eq!(c2, 1.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn tangential_projections_satisfy_gram_identities() {
        // |E_k^T|² = 1 − c_k² and ⟨E_k^T, E_l^T⟩ = −c_k c_l for k ≠ l,
        // evaluated through the chart components and the induced metric.
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        for name in ["graph", "torus", "sphere"] {
            let chart = Chart::by_name(name, p()).unwrap();
            for _ in 0..25 {
                let s = rng.gen_range(0.0..2.0 * PI);
                let t = rng.gen_range(-1.0..1.0);
                let d = chart.evaluate_point(s, t).unwrap();
                let pair = |u: [f64; 2], v: [f64; 2]| {
                    let mut acc = 0.0;
                    for i in 0..2 {
                        for j in 0..2 {
                            acc += d.g[i][j] * u[i] * v[j];
                        }
                    }
                    acc
                };
                for k in 0..3 {
                    for l in 0..3 {
                        let want = if k == l {
                            1.0 - d.c[k] * d.c[k]
                        } else {
                            -d.c[k] * d.c[l]
                        };
                        assert_abs_diff_eq!(pair(d.etop[k], d.etop[l]), want, epsilon = 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn weingarten_oracle_matches_shape_operator() {
        // ⟨∇̄_{∂_i} ξ, φ_j⟩ = −h_ij with the normal differentiated by
        // central differences in the chart parameters.
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let delta = 1e-5;
        for name in ["graph", "torus", "sphere"] {
            let chart = Chart::<f64>::by_name(name, p()).unwrap();
            for _ in 0..12 {
                let s = rng.gen_range(0.0..2.0 * PI);
                let t = rng.gen_range(-1.0..1.0);
                let d = chart.evaluate_point(s, t).unwrap();
                let xi_at = |s: f64, t: f64| chart.evaluate_point(s, t).unwrap().xi;
                let rate = |a: AmbientVector<f64>, b: AmbientVector<f64>| {
                    AmbientVector::new(
                        (a.a1 - b.a1) / (2.0 * delta),
                        (a.a2 - b.a2) / (2.0 * delta),
                        (a.a3 - b.a3) / (2.0 * delta),
                    )
                };
                let dxi = [
                    rate(xi_at(s + delta, t), xi_at(s - delta, t)),
                    rate(xi_at(s, t + delta), xi_at(s, t - delta)),
                ];
                for i in 0..2 {
                    let nab = covariant_derivative(&d.tangent[i], &d.xi, &dxi[i]);
                    for j in 0..2 {
                        assert_abs_diff_eq!(
                            nab.dot(&d.tangent[j]),
                            -d.h[i][j],
                            epsilon = 1e-6
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn sphere_pole_is_rejected_as_singular() {
        let chart = Chart::by_name("sphere", p()).unwrap();
        assert!(matches!(
            chart.evaluate_point(1.0, FRAC_PI_2),
            Err(ImmersionError::SingularPoint { .. })
        ));
    }

    #[test]
    fn lattice_spacing_conventions() {
        let torus = Chart::<f64>::by_name("torus", p()).unwrap();
        let (ss, _, hs, _) = torus.lattice(8).unwrap();
        assert_abs_diff_eq!(hs, 2.0 * PI / 8.0, epsilon = 1e-15);
        assert_abs_diff_eq!(ss[7], 2.0 * PI - hs, epsilon = 1e-12);
        let leaf = Chart::<f64>::by_name("leaf_z", p()).unwrap();
        let (ss, _, hs, _) = leaf.lattice(9).unwrap();
        assert_abs_diff_eq!(hs, 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(ss[8], 1.0, epsilon = 1e-15);
        assert!(matches!(
            leaf.lattice(3),
            Err(ImmersionError::ResolutionTooSmall(3))
        ));
    }

    #[test]
    fn intrinsic_curvature_on_constant_metric_is_zero() {
        let chart = Chart::<f64>::by_name("leaf_z", p()).unwrap();
        let grid = chart.sample_grid(16).unwrap();
        let g = grid.map(|d| d.g);
        let k = gaussian_curvature_intrinsic(&g).unwrap();
        assert_eq!(k.margin(), 2);
        assert_eq!(max_abs(&k), 0.0);
    }

    #[test]
    fn intrinsic_curvature_matches_hyperbolic_leaf() {
        let chart = Chart::<f64>::by_name("leaf_x", p()).unwrap();
        let grid = chart.sample_grid(128).unwrap();
        let g = grid.map(|d| d.g);
        let k = gaussian_curvature_intrinsic(&g).unwrap();
        let (ri, rj) = k.interior();
        for i in ri.step_by(11) {
            for j in rj.clone().step_by(13) {
                assert_abs_diff_eq!(k.at(i, j), -1.0, epsilon = 1e-3);
                assert_abs_diff_eq!(k.at(i, j), grid.at(i, j).k, epsilon = 1e-3);
            }
        }
    }

    #[test]
    fn swapped_graph_transposes_pointwise_scalars() {
        let graph = Chart::<f64>::by_name("graph", p()).unwrap();
        let swapped = Chart::graph_swapped(p());
        let n = 16;
        let a = graph.sample_grid(n).unwrap();
        let b = swapped.sample_grid(n).unwrap();
        for i in 0..n {
            for j in 0..n {
                let da = a.at(i, j);
                let db = b.at(j, i);
                // Orientation flips, so f and c3 change sign; S and K are even.
                assert_abs_diff_eq!(da.f, -db.f, epsilon = 1e-15);
                assert_abs_diff_eq!(da.norm_a2, db.norm_a2, epsilon = 1e-15);
                assert_abs_diff_eq!(da.k, db.k, epsilon = 1e-15);
                assert_abs_diff_eq!(da.c[2], -db.c[2], epsilon = 1e-15);
            }
        }
    }
}
