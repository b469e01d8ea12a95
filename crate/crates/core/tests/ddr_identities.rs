mod common;

use common::*;
use ddr_plates::ddr::{LocalCell, SigmaDofVec, SigmaOps, VDofVec, VOps};
use ddr_plates::polycalc::poly_dim;
use ddr_plates::{SymTensor, Vec2};
use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SAMPLES: usize = 5;

fn cells(k: usize) -> Vec<(&'static str, LocalCell)> {
    cell_suite().into_iter().map(|(name, pts)| (name, LocalCell::new(&single(&pts), 0, k + 1).unwrap())).collect()
}

fn max_tensor_error(cell: &LocalCell, coeffs: &DVector<f64>, exact: &PolyTens) -> f64 {
    let pts = sample_points(&cell.points);
    let (mut err, mut scale) = (0.0f64, 0.0f64);
    for x in &pts {
        let a = cell.space.eval_tensor(coeffs, x);
        let b = ddr_plates::ddr::TensorField::value(exact, x);
        err = err.max((a - b).norm());
        scale = scale.max(b.norm());
    }
    rel(err, scale)
}

#[test]
fn edge_trace_reproduces_polynomials() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for k in 3..=5 {
        for (name, cell) in cells(k) {
            let ops = VOps::new(&cell, k).unwrap();
            for _ in 0..SAMPLES {
                let v = PolyVec::random(k as i32, &mut rng);
                let dofs = ops.interpolate(&cell, &v);
                for (e, edge) in cell.edges.iter().enumerate() {
                    for s in [-1.0, -0.4, 0.3, 1.0] {
                        let x = edge.space.point(s);
                        let a = ops.eval_edge_trace(&cell, e, &dofs, s);
                        let b = ddr_plates::ddr::VectorField::value(&v, &x);
                        assert!((a - b).norm() < 1e-11 * b.norm().max(1.0), "{name} k={k} edge {e}: {a:?} vs {b:?}");
                    }
                }
            }
        }
    }
}

#[test]
fn full_sym_curl_is_consistent() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for k in 3..=5 {
        for (name, cell) in cells(k) {
            let ops = VOps::new(&cell, k).unwrap();
            for _ in 0..SAMPLES {
                let v = PolyVec::random(k as i32, &mut rng);
                let c = ops.apply_csym(&ops.interpolate(&cell, &v));
                let r = max_tensor_error(&cell, &c, &v.sym_curl());
                assert!(r < 1e-10, "{name} k={k}: residual {r:e}");
            }
        }
    }
}

#[test]
fn vector_potential_is_consistent() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for k in 3..=5 {
        for (name, cell) in cells(k) {
            let ops = VOps::new(&cell, k).unwrap();
            for _ in 0..SAMPLES {
                let v = PolyVec::random(k as i32, &mut rng);
                let p = ops.apply_potential(&ops.interpolate(&cell, &v));
                let (mut err, mut scale) = (0.0f64, 0.0f64);
                for x in sample_points(&cell.points) {
                    let b = ddr_plates::ddr::VectorField::value(&v, &x);
                    err = err.max((cell.space.eval_vector(&p, &x) - b).norm());
                    scale = scale.max(b.norm());
                }
                assert!(rel(err, scale) < 1e-10, "{name} k={k}: residual {:e}", rel(err, scale));
            }
        }
    }
}

#[test]
fn edge_and_tensor_potentials_are_consistent() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for l in 2..=4 {
        for (name, cell) in cells(l + 1) {
            let ops = SigmaOps::new(&cell, l).unwrap();
            for _ in 0..SAMPLES {
                let tau = PolyTens::random(l as i32, &mut rng);
                let dofs = ops.interpolate(&cell, &tau);
                let r = max_tensor_error(&cell, &ops.apply_potential(&dofs), &tau);
                assert!(r < 1e-10, "{name} ℓ={l}: tensor potential residual {r:e}");
                for (e, edge) in cell.edges.iter().enumerate() {
                    let pe = ops.apply_edge_potential(e, &dofs);
                    for s in [-1.0, -0.3, 0.6, 1.0] {
                        let x = edge.space.point(s);
                        let exact = ddr_plates::ddr::TensorField::value(&tau, &x).bilinear(&edge.normal, &edge.normal);
                        let got = edge.space.eval(&pe, s);
                        assert!((got - exact).abs() < 1e-10 * exact.abs().max(1.0), "{name} ℓ={l} edge {e}");
                    }
                }
                let s = ops.stabilization_form(&dofs, &dofs);
                let bound = 1e-10 * ops.operator_norm(&dofs).powi(2);
                assert!(s.abs() < bound, "{name} ℓ={l}: s = {s:e}, bound {bound:e}");
            }
        }
    }
}

#[test]
fn stabilization_vanishes_on_interpolates() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for l in 2..=4 {
        for (name, cell) in cells(l + 1) {
            let ops = SigmaOps::new(&cell, l).unwrap();
            let tau = ops.interpolate(&cell, &PolyTens::random(l as i32, &mut rng));
            let other = SigmaDofVec::new(ops.layout, DVector::from_fn(ops.dim(), |_, _| rng.gen_range(-1.0..1.0))).unwrap();
            let s = ops.stabilization_form(&tau, &other);
            let bound = 1e-10 * ops.operator_norm(&tau) * ops.operator_norm(&other);
            assert!(s.abs() < bound, "{name} ℓ={l}: s = {s:e}");
        }
    }
}

#[test]
fn div_div_commutes_with_interpolation() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for l in 2..=4 {
        for (name, cell) in cells(l + 1) {
            let ops = SigmaOps::new(&cell, l).unwrap();
            for _ in 0..SAMPLES {
                let tau = PolyTens::random(l as i32 + 2, &mut rng);
                let dd = ops.apply_dd(&ops.interpolate(&cell, &tau));
                let g = tau.div_vdiv();
                let proj = cell.space.project_scalar(l as isize - 1, |x| g.eval(x));
                let scale = proj.amax().max(ops.interpolate(&cell, &tau).values.amax() / cell.h().powi(2));
                let r = (&dd - &proj).amax() / scale;
                assert!(r < 1e-10, "{name} ℓ={l}: commutation residual {r:e}");
            }
        }
    }
}

#[test]
fn potential_curl_link_and_complex_property() {
    for k in 3..=5 {
        for (name, cell) in cells(k) {
            let v_ops = VOps::new(&cell, k).unwrap();
            let s_ops = SigmaOps::new(&cell, k - 1).unwrap();
            let mt = cell.space.tensor_mass();
            for j in 0..v_ops.dim() {
                let mut e = VDofVec::zeros(v_ops.layout);
                e.values[j] = 1.0;
                let sigma = SigmaDofVec::new(s_ops.layout, v_ops.apply_ucsym(&e)).unwrap();
                let diff = s_ops.apply_potential(&sigma) - v_ops.apply_csym(&e);
                let scale = v_ops.apply_csym(&e).dot(&(&mt * v_ops.apply_csym(&e))).sqrt().max(1.0);
                let r = diff.dot(&(&mt * &diff)).sqrt() / scale;
                assert!(r < 1e-10, "{name} k={k} dof {j}: potential-curl residual {r:e}");
                let dd = s_ops.apply_dd(&sigma);
                assert!(dd.amax() < 1e-9 * sigma.values.amax().max(1.0) / cell.h().powi(2), "{name} k={k}: DD∘uCsym ≠ 0");
            }
        }
    }
}

#[test]
fn rigid_motions_are_in_the_kernel() {
    for k in 3..=5 {
        for (name, cell) in cells(k) {
            let ops = VOps::new(&cell, k).unwrap();
            let rt: [PolyVec; 3] = [
                PolyVec([Poly::constant(1.0), Poly::zero()]),
                PolyVec([Poly::zero(), Poly::constant(1.0)]),
                PolyVec([Poly::monomial(1.0, 1, 0), Poly::monomial(1.0, 0, 1)]),
            ];
            for w in &rt {
                let d = ops.interpolate(&cell, w);
                let img = ops.apply_ucsym(&d);
                assert!(img.amax() < 1e-11 * d.values.amax(), "{name} k={k}: {:e}", img.amax());
            }
        }
    }
}

#[test]
fn sym_curl_example_quadratic_field() {
    let pts = [Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0), Vec2::new(0.0, 1.0)];
    let cell = LocalCell::new(&single(&pts), 0, 4).unwrap();
    let ops = VOps::new(&cell, 3).unwrap();
    let v = PolyVec([Poly::monomial(1.0, 1, 1), Poly::monomial(1.0, 0, 2)]);
    let c = ops.apply_csym(&ops.interpolate(&cell, &v));
    // SYMCURL (x1 x2, x2²) = [[x1, (2x2 − x2)/2], [·, 0]]
    for x in sample_points(&pts) {
        let got = cell.space.eval_tensor(&c, &x);
        assert!((got - SymTensor::new(x.x, 0.5 * x.y, 0.0)).norm() < 1e-12);
    }
}

#[test]
fn vector_potential_example_cubic() {
    let pts = [Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0), Vec2::new(0.0, 1.0)];
    let cell = LocalCell::new(&single(&pts), 0, 4).unwrap();
    let ops = VOps::new(&cell, 3).unwrap();
    let v = PolyVec([Poly::monomial(1.0, 0, 3), Poly::zero()]);
    let p = ops.apply_potential(&ops.interpolate(&cell, &v));
    for x in sample_points(&pts) {
        assert!((cell.space.eval_vector(&p, &x) - Vec2::new(x.y.powi(3), 0.0)).norm() < 1e-10);
    }
}

#[test]
fn div_div_example_quartic() {
    let pts = [Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0), Vec2::new(1.0, 1.0), Vec2::new(0.0, 1.0)];
    let cell = LocalCell::new(&single(&pts), 0, 5).unwrap();
    let ops = SigmaOps::new(&cell, 3).unwrap();
    let tau = PolyTens([Poly::monomial(1.0, 3, 1), Poly::zero(), Poly::monomial(1.0, 0, 4)]);
    let dd = ops.apply_dd(&ops.interpolate(&cell, &tau));
    // DIV VDIV τ = 6 x1 x2 + 12 x2²
    let proj = cell.space.project_scalar(2, |x| 6.0 * x.x * x.y + 12.0 * x.y * x.y);
    assert!((dd - proj).amax() < 1e-10);
}

#[test]
fn low_degree_div_div_has_no_cell_term() {
    let (_, pts) = &cell_suite()[2];
    let cell = LocalCell::new(&single(pts), 0, 4).unwrap();
    let ops = SigmaOps::new(&cell, 2).unwrap();
    assert_eq!(ops.layout.holy_len(), 0);
    assert_eq!(ops.dd.nrows(), poly_dim(1));
    let constant = ops.interpolate(&cell, &PolyTens([Poly::constant(2.0), Poly::constant(-1.0), Poly::constant(0.5)]));
    assert!(ops.apply_dd(&constant).amax() < 1e-12);
}
