use stadisc::fixtures::{Fixtures, Signature};
use stadisc::jetdet::{determination_gap, reconstruct_polymap};
use stadisc::quadric::QuadricAutomorphism;
use stadisc::scaling::to_normal_form;
use stadisc::solver::SolveOptions;
use stadisc::{ComplexPoint, DefiningPolynomial, NormalFormSurface, PolyMap, C64};

#[test]
fn automorphisms_are_rebuilt_from_their_jets() {
    let mut fx = Fixtures::new(4);
    let a = fx.hermitian_form(2, Signature::Mixed);
    let q = NormalFormSurface::quadric(a.clone());
    let pts: Vec<ComplexPoint> = (0..5).map(|_| fx.admissible_center(&a, 0.3).1).collect();
    let maps = [
        QuadricAutomorphism::Dilation { t: 0.7 },
        QuadricAutomorphism::Heisenberg { w: vec![C64::new(0.1, 0.0), C64::new(0.0, -0.05)], s: 0.2 },
    ];
    for aut in maps {
        let f = aut.map(&a).unwrap();
        let rec = reconstruct_polymap(&f, &q, &q, &pts, &SolveOptions::default()).unwrap();
        for (z, w) in pts.iter().zip(&rec) {
            assert!(w.distance(&f.eval_point(z)) < 1e-9, "{aut:?}");
        }
    }
}

#[test]
fn distinct_jets_give_distinct_maps() {
    let a = stadisc::HermitianForm::identity(1);
    let q = NormalFormSurface::quadric(a.clone());
    let mut fx = Fixtures::new(0);
    let pts: Vec<ComplexPoint> = (0..4).map(|_| fx.admissible_center(&a, 0.3).1).collect();
    let f = PolyMap::dilation(1, 0.9);
    let g = PolyMap::dilation(1, 0.6);
    let gap = determination_gap(&f, &g, &q, None, &pts, &SolveOptions::default()).unwrap();
    assert!(!gap.same_jet);
    assert!(gap.reconstruction_gap > 0.1);
    assert!(gap.fidelity < 1e-9);
    let same = determination_gap(&f, &f, &q, None, &pts, &SolveOptions::default()).unwrap();
    assert!(same.same_jet && same.reconstruction_gap == 0.0);
}

#[test]
fn normal_form_of_a_translated_quadric() {
    let a = stadisc::HermitianForm::identity(1);
    let q = DefiningPolynomial::quadric(&a);
    // the point (1, 1) lies on x0 = |z1|^2
    let p = ComplexPoint::new(vec![C64::new(1.0, 0.3), C64::new(1.0, 0.0)]).unwrap();
    let (s, rec) = to_normal_form(&q, &p).unwrap();
    assert!(s.is_quadric());
    assert_eq!(s.form().signature(), (1, 0));
    assert_eq!(rec.truncation_residual, 0.0);
    assert!(rec.phi.eval_point(&ComplexPoint::zero(1)).distance(&p) < 1e-14);
    let mut fx = Fixtures::new(1);
    for _ in 0..20 {
        let w = ComplexPoint::new(fx.complex_vec(2, 0.5)).unwrap();
        let back = rec.phi_inv.eval_point(&rec.phi.eval_point(&w));
        assert!(back.distance(&w) < 1e-12);
    }
}
