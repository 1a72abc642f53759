//! End-to-end acceptance gates: model-space curvature, flat-catalog
//! floors, geodesic integrity, second-order convergence of every
//! differential identity, pointwise algebra certificates, and the closed
//! quartic/branch forms of the gap predicates.

use std::time::Instant;

use solgeo_core::ambient::{
    geodesic_flow, sectional_curvature, AmbientPoint, AmbientVector, CoordinateVector,
};
use solgeo_core::gapscan::{branch_check, quartic_scan, scan};
use solgeo_core::immersion::{Chart, SurfaceParams};
use solgeo_core::simons::{
    closed_surface_check, consistency_delta_combination, frame_independence_check,
    identity_residual, identity_residual_field, passes, IdentityId,
};
use solgeo_core::surfcalc::max_abs;

const CATALOG: [&str; 6] = ["leaf_x", "leaf_y", "leaf_z", "graph", "torus", "sphere"];

fn chart(name: &str) -> Chart<f64> {
    Chart::by_name(name, SurfaceParams::default()).unwrap()
}

#[test]
fn frame_plane_sectional_curvatures_certify_the_model() {
    let start = Instant::now();
    let e1: AmbientVector<f64> = AmbientVector::frame_basis(1);
    let e2: AmbientVector<f64> = AmbientVector::frame_basis(2);
    let e3: AmbientVector<f64> = AmbientVector::frame_basis(3);
    let cases = [(&e1, &e3, -1.0), (&e2, &e3, -1.0), (&e1, &e2, 1.0)];
    for (u, v, want) in cases {
        let k = sectional_curvature(u, v).unwrap();
        assert!((k - want).abs() <= 1e-10, "sectional {k} vs {want}");
        // Plane invariance: replace v by a combination keeping the span.
        let w = *u + v.scale(0.5);
        let mixed = sectional_curvature(&w, v).unwrap();
        assert!((mixed - want).abs() <= 1e-10);
    }
    assert!(start.elapsed().as_secs_f64() < 1.0, "sectional check too slow");
    println!("PASS frame-plane sectional curvatures (-1, -1, +1)");
}

#[test]
fn vertical_leaves_are_totally_geodesic_at_the_floor() {
    let start = Instant::now();
    let grid = chart("leaf_x").sample_grid(64).unwrap();
    let mut worst_h: f64 = 0.0;
    let mut worst_k: f64 = 0.0;
    let (ri, rj) = grid.interior();
    for i in ri {
        for j in rj.clone() {
            let d = grid.at(i, j);
            for row in d.h {
                for v in row {
                    worst_h = worst_h.max(v.abs());
                }
            }
            worst_k = worst_k.max((d.k + 1.0).abs());
        }
    }
    assert!(worst_h <= 1e-8, "second fundamental form {worst_h:e}");
    assert!(worst_k <= 1e-6, "Gauss curvature off -1 by {worst_k:e}");
    assert!(start.elapsed().as_secs_f64() < 5.0);
    println!("PASS totally geodesic leaf: |h| <= 1e-8, K = -1 +/- 1e-6 on 64x64");
}

#[test]
fn horizontal_leaf_invariants_hold_at_the_floor() {
    let start = Instant::now();
    let c = chart("leaf_z");
    let grid = c.sample_grid(64).unwrap();
    let f = grid.map(|d| d.f);
    let k = grid.map(|d| d.k);
    let s = grid.map(|d| (d.norm_a2 - 2.0).abs());
    assert!(max_abs(&f) <= 1e-10, "mean curvature {:e}", max_abs(&f));
    assert!(max_abs(&k) <= 1e-10, "Gauss curvature {:e}", max_abs(&k));
    assert!(max_abs(&s) <= 1e-10, "|A|^2 - 2 at {:e}", max_abs(&s));
    let g = grid.map(|d| d.g);
    let a = grid.map(|d| d.a);
    let gamma = solgeo_core::surfcalc::induced_christoffels(&g).unwrap();
    let (_, nabla_sq) = solgeo_core::surfcalc::covariant_derivative_a(&a, &gamma, &g).unwrap();
    assert!(
        max_abs(&nabla_sq) <= 1e-8,
        "|nabla A|^2 = {:e}",
        max_abs(&nabla_sq)
    );
    assert!(start.elapsed().as_secs_f64() < 5.0);
    println!("PASS minimal flat leaf: f, K, |A|^2-2 <= 1e-10 and |nabla A|^2 <= 1e-8 on 64x64");
}

#[test]
fn vertical_lines_flow_as_geodesics() {
    let p = AmbientPoint::new(0.0f64, 0.0, 0.0);
    let v = CoordinateVector::new(0.0, 0.0, 1.0);
    let path = geodesic_flow(&p, &v, 10.0, 1e-3).unwrap();
    let mut drift: f64 = 0.0;
    for sample in &path {
        drift = drift.max(sample.point.x.abs()).max(sample.point.y.abs());
    }
    let end = path.last().unwrap();
    assert!(drift <= 1e-8, "horizontal drift {drift:e}");
    assert!((end.point.z - 10.0).abs() <= 1e-8, "z(10) = {}", end.point.z);
    println!("PASS vertical geodesic: drift <= 1e-8 over t in [0,10], dt = 1e-3");
}

#[test]
fn differential_identities_converge_at_second_order() {
    let start = Instant::now();
    let ids = [
        IdentityId::Codazzi,
        IdentityId::TraceNablaA,
        IdentityId::NablaE3,
        IdentityId::GradAngle,
        IdentityId::LemmaDivF,
        IdentityId::LemmaDivA,
        IdentityId::Delta2,
        IdentityId::Delta3,
        IdentityId::DeltaAngle,
        IdentityId::DeltaAAngle,
    ];
    let resolutions = [32usize, 64, 128];
    for name in ["graph", "torus"] {
        let c = chart(name);
        for id in ids {
            let rep = identity_residual(&c, id, &resolutions).unwrap();
            assert!(
                passes(&rep, 1e-8),
                "{name} {id}: maxes {:?}, orders {:?}",
                rep.max_abs,
                rep.orders
            );
            let order = rep.order.unwrap();
            assert!(
                rep.final_max() <= 1e-8 || (1.5..=2.5).contains(&order),
                "{name} {id}: order {order}"
            );
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    assert!(elapsed < 120.0, "refinement studies took {elapsed:.1}s");
    println!("PASS ten differential identities at second order on graph and torus ({elapsed:.1}s)");
}

#[test]
fn pointwise_certificates_hold_on_the_whole_catalog() {
    for name in CATALOG {
        let c = chart(name);
        let remark = identity_residual_field(&c, IdentityId::Remark, 32).unwrap();
        let worst = max_abs(&remark);
        assert!(worst <= 1e-10, "{name}: REMARK {worst:e}");
        let frame = frame_independence_check(&c, 32, 2024).unwrap();
        assert!(
            frame.max_residual <= 1e-12,
            "{name}: frame independence {:e}",
            frame.max_residual
        );
    }
    println!("PASS pointwise certificates: REMARK <= 1e-10, frame independence <= 1e-12");
}

#[test]
fn cmc_specialization_sits_on_the_floor_for_leaves() {
    for name in ["leaf_x", "leaf_y", "leaf_z"] {
        let c = chart(name);
        let field = identity_residual_field(&c, IdentityId::DeltaCmc, 64).unwrap();
        let worst = max_abs(&field);
        assert!(worst <= 1e-8, "{name}: DELTA_CMC {worst:e}");
    }
    println!("PASS CMC specialization at the floor on all leaves (64x64)");
}

#[test]
fn delta_formulas_are_mutually_consistent_without_stencils() {
    for name in CATALOG {
        let c = chart(name);
        let field = consistency_delta_combination(&c, 32).unwrap();
        let worst = max_abs(&field);
        assert!(worst <= 1e-10, "{name}: combination {worst:e}");
    }
    println!("PASS pure-algebra consistency of the three Delta formulas");
}

#[test]
fn quartic_normal_form_certificate() {
    let q = quartic_scan::<f64>(10_000, 1234);
    assert!(
        q.max_abs_residual <= 1e-10,
        "E - Q/2 over 10^4 tuples: {:e}",
        q.max_abs_residual
    );
    assert!(q.factor_eight_min_residual > 0.1);
    let report = scan(&chart("torus"), 16, 1234).unwrap();
    assert!(
        report.flags.iter().any(|f| f.contains("one half of the quartic")),
        "normalization flag must be spelled out"
    );
    println!("PASS quartic normal form: E = Q/2 to 1e-10, factor-8 form excluded");
}

#[test]
fn branch_solution_certificate() {
    let b = branch_check::<f64>(1_000, 77);
    assert!(b.max_residual <= 1e-12, "branch residual {:e}", b.max_residual);
    assert!(b.no_solution_below_threshold);
    println!("PASS solution branches close to 1e-12; no real branch below the threshold");
}

#[test]
fn closed_surface_divergence_certificate() {
    let rep = closed_surface_check(&chart("torus"), 128).unwrap();
    let tol = 1e-6 * rep.area;
    assert!(
        rep.integral_laplace_s.abs() <= tol,
        "integral of Laplacian {:e} vs tol {tol:e}",
        rep.integral_laplace_s
    );
    assert!(
        rep.integral_div_a_grad_f.abs() <= tol,
        "integral of Div(A grad f) {:e} vs tol {tol:e}",
        rep.integral_div_a_grad_f
    );
    println!("PASS closed-surface integrals telescope on the torus at 128x128");
}
