use ddr_plates::exactness::{builtin_cells, verify_cell, CertifyOptions};
use ddr_plates::mesh::Mesh;
use ddr_plates::Vec2;

fn verify(pts: &[Vec2], k: usize) -> ddr_plates::exactness::CellVerification {
    let mesh = Mesh::single_cell(pts).unwrap();
    verify_cell(&mesh, 0, k, &CertifyOptions::default(), false).unwrap()
}

#[test]
fn builtin_suite_is_certified() {
    for k in 3..=5 {
        for (name, pts) in builtin_cells() {
            let v = verify(&pts, k);
            let c = &v.certificate;
            assert!(c.passed(), "{name} k={k}\n{}", c.report());
            assert_eq!(c.check('d').rank, Some(k * (k - 1) + 2 * k * pts.len() - 3), "{name} k={k}");
            assert!(v.identities.max() < 1e-10, "{name} k={k}\n{}", v.identities.report());
        }
    }
}

#[test]
fn chevron_quadrilateral_is_certified() {
    // Arrowhead with a reflex vertex at (0.8, 1).
    let pts = [Vec2::new(0.0, 0.0), Vec2::new(2.0, 1.0), Vec2::new(0.0, 2.0), Vec2::new(0.8, 1.0)];
    assert!(verify(&pts, 4).certificate.passed());
}

#[test]
fn ranks_invariant_under_rigid_motion_and_scaling() {
    let (c, s) = (0.6f64.cos(), 0.6f64.sin());
    let motions: [(&str, Box<dyn Fn(&Vec2) -> Vec2>); 3] = [
        ("translated", Box::new(|p: &Vec2| p + Vec2::new(3.0, -7.5))),
        ("rotated", Box::new(move |p: &Vec2| Vec2::new(c * p.x - s * p.y, s * p.x + c * p.y))),
        ("scaled", Box::new(|p: &Vec2| p * 10.0)),
    ];
    for (name, pts) in builtin_cells().into_iter().filter(|c| ["pentagon", "lshape", "sliver-quad"].contains(&c.0)) {
        for k in [3, 5] {
            let base = verify(&pts, k).certificate;
            for (motion, f) in &motions {
                let moved: Vec<Vec2> = pts.iter().map(|p| f(p)).collect();
                let cert = verify(&moved, k).certificate;
                assert!(cert.passed(), "{name} {motion} k={k}\n{}", cert.report());
                for label in ['b', 'd', 'e'] {
                    assert_eq!(cert.check(label).rank, base.check(label).rank, "{name} {motion} k={k} check {label}");
                }
            }
        }
    }
}

#[test]
fn constants_have_vanishing_residuals() {
    use ddr_plates::ddr::{FnTensor, LocalCell, SigmaOps};
    use ddr_plates::SymTensor;
    let pts = &builtin_cells()[3].1;
    let cell = LocalCell::new(&Mesh::single_cell(pts).unwrap(), 0, 5).unwrap();
    let ops = SigmaOps::new(&cell, 3).unwrap();
    let c = FnTensor { value: |_: &Vec2| SymTensor::new(0.3, -1.2, 2.0), derivatives: |_: &Vec2| (SymTensor::ZERO, SymTensor::ZERO) };
    let dofs = ops.interpolate(&cell, &c);
    assert!(ops.apply_dd(&dofs).amax() < 1e-13);
    assert!(ops.stabilization_form(&dofs, &dofs).abs() < 1e-20 * ops.operator_norm(&dofs).powi(2));
}
