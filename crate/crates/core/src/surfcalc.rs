//! Intrinsic differential operators on rectangular chart lattices:
//! gradient, divergence, Laplace–Beltrami, induced Christoffel symbols,
//! covariant derivative of the shape operator, quadrature.
//!
//! Every stencil is a 3-point central difference. Periodic directions wrap;
//! non-periodic directions never use one-sided stencils — instead each
//! derivative application grows the field's `margin` by one ring, the
//! affected edge nodes are poisoned with NaN, and all reductions
//! (max, mean, integral) read the unmasked interior only.

use crate::{lit, Real};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum CalcError {
    #[error("grid shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("metric not positive definite at node ({i},{j}): det = {det:e}")]
    NonSpd { i: usize, j: usize, det: f64 },
    #[error("integration domain is not closed and no masked region was acknowledged")]
    NonCompactDomain,
    #[error("axis must be 0 or 1, got {0}")]
    BadAxis(usize),
}

/// Samples of a scalar/vector/tensor quantity on a rectangular chart
/// lattice. `margin` counts boundary rings (per non-periodic axis) whose
/// values are not trusted; stencil application increments it.
#[derive(Clone, Debug)]
pub struct GridField<T, V = T> {
    ns: usize,
    nt: usize,
    hs: T,
    ht: T,
    periodic: [bool; 2],
    margin: usize,
    vals: Vec<V>,
}

impl<T: Real, V: Copy> GridField<T, V> {
    pub fn from_fn(
        ns: usize,
        nt: usize,
        hs: T,
        ht: T,
        periodic: [bool; 2],
        mut f: impl FnMut(usize, usize) -> V,
    ) -> Self {
        let mut vals = Vec::with_capacity(ns * nt);
        for i in 0..ns {
            for j in 0..nt {
                vals.push(f(i, j));
            }
        }
        Self {
            ns,
            nt,
            hs,
            ht,
            periodic,
            margin: 0,
            vals,
        }
    }

    pub fn try_from_fn<E>(
        ns: usize,
        nt: usize,
        hs: T,
        ht: T,
        periodic: [bool; 2],
        mut f: impl FnMut(usize, usize) -> Result<V, E>,
    ) -> Result<Self, E> {
        let mut vals = Vec::with_capacity(ns * nt);
        for i in 0..ns {
            for j in 0..nt {
                vals.push(f(i, j)?);
            }
        }
        Ok(Self {
            ns,
            nt,
            hs,
            ht,
            periodic,
            margin: 0,
            vals,
        })
    }

    pub fn ns(&self) -> usize {
        self.ns
    }

    pub fn nt(&self) -> usize {
        self.nt
    }

    pub fn hs(&self) -> T {
        self.hs
    }

    pub fn ht(&self) -> T {
        self.ht
    }

    pub fn periodic(&self) -> [bool; 2] {
        self.periodic
    }

    pub fn margin(&self) -> usize {
        self.margin
    }

    fn idx(&self, i: usize, j: usize) -> usize {
        i * self.nt + j
    }

    pub fn at(&self, i: usize, j: usize) -> V {
        self.vals[self.idx(i, j)]
    }

    /// Index of the neighbour `delta` steps away along `axis`, or None when
    /// the stencil would leave a non-periodic edge.
    fn neighbor(&self, i: usize, j: usize, axis: usize, delta: isize) -> Option<(usize, usize)> {
        let (pos, n) = if axis == 0 { (i, self.ns) } else { (j, self.nt) };
        let moved = if self.periodic[axis] {
            (pos as isize + delta).rem_euclid(n as isize) as usize
        } else {
            let q = pos as isize + delta;
            if q < 0 || q >= n as isize {
                return None;
            }
            q as usize
        };
        Some(if axis == 0 { (moved, j) } else { (i, moved) })
    }

    /// Per-axis index range of trusted nodes: the margin rings are skipped
    /// on non-periodic axes, periodic axes are whole.
    pub fn interior(&self) -> (std::ops::Range<usize>, std::ops::Range<usize>) {
        let range = |n: usize, per: bool| {
            if per || self.margin == 0 {
                0..n
            } else if 2 * self.margin >= n {
                0..0
            } else {
                self.margin..n - self.margin
            }
        };
        (
            range(self.ns, self.periodic[0]),
            range(self.nt, self.periodic[1]),
        )
    }

    pub fn map<U: Copy>(&self, mut f: impl FnMut(&V) -> U) -> GridField<T, U> {
        GridField {
            ns: self.ns,
            nt: self.nt,
            hs: self.hs,
            ht: self.ht,
            periodic: self.periodic,
            margin: self.margin,
            vals: self.vals.iter().map(|v| f(v)).collect(),
        }
    }

    pub fn zip<U: Copy, W: Copy>(
        &self,
        other: &GridField<T, U>,
        mut f: impl FnMut(&V, &U) -> W,
    ) -> Result<GridField<T, W>, CalcError> {
        self.check_lattice(other)?;
        Ok(GridField {
            ns: self.ns,
            nt: self.nt,
            hs: self.hs,
            ht: self.ht,
            periodic: self.periodic,
            margin: self.margin.max(other.margin),
            vals: self
                .vals
                .iter()
                .zip(other.vals.iter())
                .map(|(a, b)| f(a, b))
                .collect(),
        })
    }

    /// Raise (never lower) the untrusted-ring count; for assembling
    /// node-by-node combinations of stencil outputs outside this module.
    pub(crate) fn with_margin(mut self, margin: usize) -> Self {
        self.margin = self.margin.max(margin);
        self
    }

    pub fn check_lattice<U: Copy>(&self, other: &GridField<T, U>) -> Result<(), CalcError> {
        if self.ns != other.ns
            || self.nt != other.nt
            || self.hs != other.hs
            || self.ht != other.ht
            || self.periodic != other.periodic
        {
            return Err(CalcError::ShapeMismatch(format!(
                "{}x{} vs {}x{}",
                self.ns, self.nt, other.ns, other.nt
            )));
        }
        Ok(())
    }
}

/// 2×2 inverse with a positive-definiteness check.
fn inv2<T: Real>(g: &[[T; 2]; 2], i: usize, j: usize) -> Result<([[T; 2]; 2], T), CalcError> {
    let det = g[0][0] * g[1][1] - g[0][1] * g[1][0];
    if det <= T::zero() || g[0][0] <= T::zero() {
        return Err(CalcError::NonSpd {
            i,
            j,
            det: det.to_f64().unwrap_or(f64::NAN),
        });
    }
    let inv = [
        [g[1][1] / det, -g[0][1] / det],
        [-g[1][0] / det, g[0][0] / det],
    ];
    Ok((inv, det))
}

/// Central first derivative along `axis`; margin grows by one ring, edge
/// nodes on non-periodic axes are poisoned with NaN.
pub fn partial<T: Real>(axis: usize, u: &GridField<T>) -> Result<GridField<T>, CalcError> {
    if axis > 1 {
        return Err(CalcError::BadAxis(axis));
    }
    let h = if axis == 0 { u.hs } else { u.ht };
    let two_h = lit::<T>(2.0) * h;
    let mut out = u.map(|_| T::nan());
    for i in 0..u.ns {
        for j in 0..u.nt {
            if let (Some((ip, jp)), Some((im, jm))) =
                (u.neighbor(i, j, axis, 1), u.neighbor(i, j, axis, -1))
            {
                let idx = out.idx(i, j);
                out.vals[idx] = (u.at(ip, jp) - u.at(im, jm)) / two_h;
            }
        }
    }
    out.margin = u.margin + 1;
    Ok(out)
}

/// (grad u)^i = g^{ij} ∂_j u.
pub fn surface_gradient<T: Real>(
    u: &GridField<T>,
    g: &GridField<T, [[T; 2]; 2]>,
) -> Result<GridField<T, [T; 2]>, CalcError> {
    u.check_lattice(g)?;
    let d0 = partial(0, u)?;
    let d1 = partial(1, u)?;
    let mut out = d0.zip(&d1, |a, b| [*a, *b])?;
    for i in 0..out.ns {
        for j in 0..out.nt {
            let (ginv, _) = inv2(&g.at(i, j), i, j)?;
            let idx = out.idx(i, j);
            let d = out.vals[idx];
            out.vals[idx] = [
                ginv[0][0] * d[0] + ginv[0][1] * d[1],
                ginv[1][0] * d[0] + ginv[1][1] * d[1],
            ];
        }
    }
    out.margin = out.margin.max(g.margin);
    Ok(out)
}

/// Div V = (1/√det g) ∂_i(√det g · V^i).
pub fn surface_divergence<T: Real>(
    v: &GridField<T, [T; 2]>,
    g: &GridField<T, [[T; 2]; 2]>,
) -> Result<GridField<T>, CalcError> {
    v.check_lattice(g)?;
    let mut sqrt_det = g.map(|_| T::zero());
    for i in 0..g.ns {
        for j in 0..g.nt {
            let (_, det) = inv2(&g.at(i, j), i, j)?;
            let idx = sqrt_det.idx(i, j);
            sqrt_det.vals[idx] = det.sqrt();
        }
    }
    let w0 = v.zip(&sqrt_det, |v, s| v[0] * *s)?;
    let w1 = v.zip(&sqrt_det, |v, s| v[1] * *s)?;
    let d0 = partial(0, &w0)?;
    let d1 = partial(1, &w1)?;
    let sum = d0.zip(&d1, |a, b| *a + *b)?;
    sum.zip(&sqrt_det, |s, w| *s / *w)
}

/// Laplace–Beltrami operator, by construction the exact composition
/// `surface_divergence(surface_gradient(u))` (identical stencils).
pub fn laplace_beltrami<T: Real>(
    u: &GridField<T>,
    g: &GridField<T, [[T; 2]; 2]>,
) -> Result<GridField<T>, CalcError> {
    surface_divergence(&surface_gradient(u, g)?, g)
}

/// Γ^k_{ij} = ½ g^{kl} (∂_i g_{jl} + ∂_j g_{il} − ∂_l g_{ij}) with metric
/// derivatives by central differences. Layout: `out[k][i][j]`.
pub fn induced_christoffels<T: Real>(
    g: &GridField<T, [[T; 2]; 2]>,
) -> Result<GridField<T, [[[T; 2]; 2]; 2]>, CalcError> {
    // dg[axis][a][b] = ∂_axis g_{ab}
    let comp = |a: usize, b: usize| g.map(|m| m[a][b]);
    let mut dg = [[[None, None], [None, None]], [[None, None], [None, None]]];
    for axis in 0..2 {
        for a in 0..2 {
            for b in 0..2 {
                dg[axis][a][b] = Some(partial(axis, &comp(a, b))?);
            }
        }
    }
    let dgat = |axis: usize, a: usize, b: usize, i: usize, j: usize| {
        dg[axis][a][b].as_ref().unwrap().at(i, j)
    };
    let half = lit::<T>(0.5);
    let mut out = g.map(|_| [[[T::zero(); 2]; 2]; 2]);
    for i in 0..g.ns {
        for j in 0..g.nt {
            let (ginv, _) = inv2(&g.at(i, j), i, j)?;
            let mut gamma = [[[T::zero(); 2]; 2]; 2];
            for k in 0..2 {
                for a in 0..2 {
                    for b in 0..2 {
                        let mut s = T::zero();
                        for l in 0..2 {
                            s = s
                                + ginv[k][l]
                                    * (dgat(a, b, l, i, j) + dgat(b, a, l, i, j)
                                        - dgat(l, a, b, i, j));
                        }
                        gamma[k][a][b] = half * s;
                    }
                }
            }
            let idx = out.idx(i, j);
            out.vals[idx] = gamma;
        }
    }
    out.margin = g.margin + 1;
    Ok(out)
}

/// Covariant derivative of the chart-basis shape operator,
/// (∇_i A)^k_j = ∂_i A^k_j + Γ^k_{ip} A^p_j − Γ^p_{ij} A^k_p
/// (layout `out[i][k][j]`), together with the fully contracted scalar
/// |∇A|² = g^{ii'} g^{jj'} g_{kk'} (∇_i A)^k_j (∇_{i'} A)^{k'}_{j'}.
#[allow(clippy::type_complexity)]
pub fn covariant_derivative_a<T: Real>(
    a: &GridField<T, [[T; 2]; 2]>,
    gamma: &GridField<T, [[[T; 2]; 2]; 2]>,
    g: &GridField<T, [[T; 2]; 2]>,
) -> Result<(GridField<T, [[[T; 2]; 2]; 2]>, GridField<T>), CalcError> {
    a.check_lattice(gamma)?;
    a.check_lattice(g)?;
    let comp = |k: usize, j: usize| a.map(|m| m[k][j]);
    let mut da = [[[None, None], [None, None]], [[None, None], [None, None]]];
    for axis in 0..2 {
        for k in 0..2 {
            for j in 0..2 {
                da[axis][k][j] = Some(partial(axis, &comp(k, j))?);
            }
        }
    }
    let daat = |axis: usize, k: usize, j: usize, i: usize, jj: usize| {
        da[axis][k][j].as_ref().unwrap().at(i, jj)
    };
    let margin = (a.margin + 1).max(gamma.margin).max(g.margin);
    let mut nabla = a.map(|_| [[[T::zero(); 2]; 2]; 2]);
    let mut norm2 = a.map(|_| T::zero());
    for i in 0..a.ns {
        for j in 0..a.nt {
            let am = a.at(i, j);
            let gm = g.at(i, j);
            let (ginv, _) = inv2(&gm, i, j)?;
            let gam = gamma.at(i, j);
            let mut t = [[[T::zero(); 2]; 2]; 2];
            for dir in 0..2 {
                for k in 0..2 {
                    for jj in 0..2 {
                        let mut s = daat(dir, k, jj, i, j);
                        for p in 0..2 {
                            s = s + gam[k][dir][p] * am[p][jj] - gam[p][dir][jj] * am[k][p];
                        }
                        t[dir][k][jj] = s;
                    }
                }
            }
            let mut n = T::zero();
            for dir in 0..2 {
                for dir2 in 0..2 {
                    for jj in 0..2 {
                        for jj2 in 0..2 {
                            for k in 0..2 {
                                for k2 in 0..2 {
                                    n = n + ginv[dir][dir2]
                                        * ginv[jj][jj2]
                                        * gm[k][k2]
                                        * t[dir][k][jj]
                                        * t[dir2][k2][jj2];
                                }
                            }
                        }
                    }
                }
            }
            let idx = nabla.idx(i, j);
            nabla.vals[idx] = t;
            norm2.vals[idx] = n;
        }
    }
    nabla.margin = margin;
    norm2.margin = margin;
    Ok((nabla, norm2))
}

/// Rectangle rule with √det g weight over the trusted interior. Closed
/// (doubly periodic) lattices integrate exactly in the stencil sense;
/// lattices with a non-periodic direction are rejected unless the caller
/// acknowledges the documented mask with `mask_ok`.
pub fn integrate<T: Real>(
    u: &GridField<T>,
    g: &GridField<T, [[T; 2]; 2]>,
    mask_ok: bool,
) -> Result<T, CalcError> {
    u.check_lattice(g)?;
    if !(u.periodic[0] && u.periodic[1]) && !mask_ok {
        return Err(CalcError::NonCompactDomain);
    }
    let mut probe = u.map(|x| *x);
    probe.margin = u.margin.max(g.margin);
    let (ri, rj) = probe.interior();
    let mut sum = T::zero();
    for i in ri {
        for j in rj.clone() {
            let (_, det) = inv2(&g.at(i, j), i, j)?;
            sum = sum + u.at(i, j) * det.sqrt();
        }
    }
    Ok(sum * u.hs * u.ht)
}

/// Maximum |value| over the trusted interior.
pub fn max_abs<T: Real>(u: &GridField<T>) -> T {
    let (ri, rj) = u.interior();
    let mut m = T::zero();
    for i in ri {
        for j in rj.clone() {
            m = m.max(u.at(i, j).abs());
        }
    }
    m
}

/// Mean of |value| over the trusted interior.
pub fn mean_abs<T: Real>(u: &GridField<T>) -> T {
    let (ri, rj) = u.interior();
    let mut sum = T::zero();
    let mut count = 0usize;
    for i in ri {
        for j in rj.clone() {
            sum = sum + u.at(i, j).abs();
            count += 1;
        }
    }
    if count == 0 {
        T::nan()
    } else {
        sum / T::from_usize(count).unwrap()
    }
}

/// log₂(r_N / r_{2N}): the observed convergence order between a coarse and
/// a doubled resolution.
pub fn order_estimate<T: Real>(coarse: T, fine: T) -> T {
    (coarse / fine).log2()
}

/// Residual study of one identity across grid resolutions.
#[derive(Clone, Debug, Serialize)]
pub struct ResidualReport<T> {
    pub id: String,
    pub surface: String,
    pub resolutions: Vec<usize>,
    pub max_abs: Vec<T>,
    pub mean_abs: Vec<T>,
    /// Pairwise order estimates log₂(r_N / r_{2N}); one fewer than resolutions.
    pub orders: Vec<T>,
    /// Headline order: the finest pairwise estimate, only when three or
    /// more resolutions were run.
    pub order: Option<T>,
    pub notes: Vec<String>,
}

impl<T: Real> ResidualReport<T> {
    pub fn new(
        id: impl Into<String>,
        surface: impl Into<String>,
        resolutions: Vec<usize>,
        max_abs: Vec<T>,
        mean_abs: Vec<T>,
        notes: Vec<String>,
    ) -> Self {
        assert_eq!(resolutions.len(), max_abs.len());
        assert_eq!(resolutions.len(), mean_abs.len());
        assert!(
            resolutions.windows(2).all(|w| w[0] < w[1]),
            "resolutions must be strictly increasing"
        );
        let orders: Vec<T> = max_abs
            .windows(2)
            .map(|w| order_estimate(w[0], w[1]))
            .collect();
        let order = if resolutions.len() >= 3 {
            orders.last().copied()
        } else {
            None
        };
        Self {
            id: id.into(),
            surface: surface.into(),
            resolutions,
            max_abs,
            mean_abs,
            orders,
            order,
            notes,
        }
    }

    /// Finest-resolution max residual.
    pub fn final_max(&self) -> T {
        *self.max_abs.last().expect("at least one resolution")
    }
}
