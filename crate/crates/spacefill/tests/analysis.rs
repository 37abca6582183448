//! Integration tests for the analysis layer and the shipped fixtures.

use num_bigint::BigUint;
use num_rational::BigRational;

use spacefill::analysis::{gamma, rho, search_mu, vcsc};
use spacefill::generators::{mu2_shape, shape_class_regular, tower};
use spacefill::geometry::{Cube, SpaceParams};
use spacefill::partition::{boundary_intrinsic, classification_growth, Partition};
use spacefill::sfc::CurveSpec;

fn params(k: u32, d: u32) -> SpaceParams {
    SpaceParams::new(k, d).unwrap()
}

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

fn fixture(name: &str) -> String {
    std::fs::read_to_string(format!("{}/fixtures/{name}", env!("CARGO_MANIFEST_DIR"))).unwrap()
}

#[test]
fn rho_plateaus() {
    assert_eq!(rho(params(2, 2)), q(1, 3));
    assert_eq!(rho(params(3, 2)), q(1, 4));
    assert_eq!(rho(params(3, 3)) * q(3, 1), q(12, 13));
}

#[test]
fn vertex_class_volume_and_prediction() {
    let root = [Cube::root(params(2, 2))];
    for m in [4u32, 8, 16] {
        let r = vcsc(&root, m, 2).unwrap();
        assert_eq!(r.v, BigUint::from(12 * m - 8));
        assert_eq!(r.s, BigUint::from(8 * m));
        assert_eq!(r.v_pred, q(12 * (m as i64 - 1), 1));
    }
    assert!(vcsc(&root, 0, 2).is_err());
}

#[test]
fn volume_and_surface_chains_are_monotone() {
    let p = Partition::from_json(&fixture("example_p.json")).unwrap();
    let q = p.shape();
    for m in [4u32, 5] {
        let mut vs = Vec::new();
        let mut ss = Vec::new();
        for c in 0..=2 {
            let r = vcsc(&q, m, c).unwrap();
            vs.push(r.v);
            ss.push(r.s);
        }
        assert!(vs.windows(2).all(|w| w[0] >= w[1]), "{vs:?}");
        assert!(ss.windows(2).all(|w| w[0] >= w[1]), "{ss:?}");
    }
}

#[test]
fn search_mu_grows_with_depth_bound() {
    let c = CurveSpec::from_name("hilbert2d", params(2, 2)).unwrap();
    let mut last = q(0, 1);
    for depth in 1..=3 {
        let est = search_mu(&c, 1, depth, 6, 1_000_000).unwrap();
        assert!(est.lower_bound >= last);
        assert!(est.analytic_lower <= est.lower_bound && est.lower_bound <= est.analytic_upper);
        assert!(est.best >= q(4, 1));
        last = est.lower_bound;
    }
    // Per the definition, the class-0 constant is the largest volume of a
    // shape, which is 1.
    assert_eq!(search_mu(&c, 0, 2, 6, 1_000_000).unwrap().lower_bound, q(1, 1));
}

#[test]
fn gamma_of_staircase_shapes() {
    let c = CurveSpec::from_name("hilbert2d", params(2, 2)).unwrap();
    assert_eq!(gamma(&[Cube::root(params(2, 2))], 7).unwrap(), 24);
    let shape = mu2_shape(10, &c).unwrap();
    let g = gamma(&shape, 12).unwrap();
    assert!(4 * g >= 12 * 12, "{g}");
    assert!(g <= 16 * 12 * 12);
}

#[test]
fn tower_fixtures_match_generator_and_growth() {
    let family: Vec<Partition> = (1..=6u32)
        .map(|m| Partition::from_json(&fixture(&format!("tower_{m}.json"))).unwrap())
        .collect();
    for (i, p) in family.iter().enumerate() {
        let fresh = tower(i as u32 + 1).unwrap();
        assert_eq!(p.cells(), fresh.cells());
        let view = p.classify().unwrap();
        let n = view.classified().iter().map(Cube::depth).max().unwrap() as usize;
        assert_eq!(n, i + 2);
        assert_eq!(view.classified().len(), 4 * n - 4);
        assert_eq!(view.class_sum() as usize, 5 * n - 2);
    }
    let rows = classification_growth(&family).unwrap();
    assert_eq!(rows.len(), family.len());
}

#[test]
fn hc_refines_toward_higher_classes() {
    let root = [Cube::root(params(2, 2))];
    for m in 2..=5u32 {
        let h1 = shape_class_regular(&root, m, 1).unwrap();
        let h2 = shape_class_regular(&root, m, 2).unwrap();
        assert!(h1.len() >= h2.len());
        assert_eq!(boundary_intrinsic(&h2, 1).unwrap().len() as u32, 8 * m);
    }
}
