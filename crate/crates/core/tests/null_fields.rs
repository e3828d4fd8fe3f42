use eigentomo::cosine::{assemble_constraints, coeffs_from_generator, eval_stress, null_basis, DEFAULT_NULL_TOL};
use eigentomo::diagnostics::{diagnose_potential, Tolerances};
use eigentomo::field::{
    hooke_strain_from_stress, hooke_stress_from_strain, read_field_csv, write_field_csv, write_field_vtk,
};
use eigentomo::{CosinePotential, ElasticConstants, Grid3, NullBasis, NullGenerator};
use proptest::prelude::*;
use std::sync::OnceLock;

fn basis3() -> &'static NullBasis {
    static B: OnceLock<NullBasis> = OnceLock::new();
    B.get_or_init(|| {
        null_basis(&assemble_constraints(3, &ElasticConstants::default()).unwrap(), DEFAULT_NULL_TOL).unwrap()
    })
}

fn n2_potential(c: &ElasticConstants) -> CosinePotential {
    let nb = null_basis(&assemble_constraints(2, c).unwrap(), DEFAULT_NULL_TOL).unwrap();
    coeffs_from_generator(&nb.generator(0).unwrap(), c).unwrap()
}

#[test]
fn generator_json_round_trip_rebuilds_the_same_field() {
    let c = ElasticConstants::default();
    let g = basis3().generator(4).unwrap();
    let json = serde_json::to_string(&g).unwrap();
    assert!(json.starts_with("{\"N\":3,"));
    let back: NullGenerator = serde_json::from_str(&json).unwrap();
    assert_eq!(back, g);
    let grid = Grid3::new(9).unwrap();
    let a = eval_stress(&coeffs_from_generator(&g, &c).unwrap(), grid);
    let b = eval_stress(&coeffs_from_generator(&back, &c).unwrap(), grid);
    assert_eq!(a, b);
}

#[test]
fn null_field_strain_maps_back_to_its_stress() {
    let c = ElasticConstants::default();
    let sigma = eval_stress(&n2_potential(&c), Grid3::new(17).unwrap());
    let back = hooke_stress_from_strain(&hooke_strain_from_stress(&sigma, &c).unwrap(), &c).unwrap();
    let scale = sigma.max_abs_all();
    for s in 0..6 {
        for (x, y) in back.comps[s].iter().zip(&sigma.comps[s]) {
            assert!((x - y).abs() <= 1e-13 * scale);
        }
    }
}

#[test]
fn null_field_survives_csv_and_vtk_export() {
    let sigma = eval_stress(&n2_potential(&ElasticConstants::default()), Grid3::new(5).unwrap());
    let mut csv = Vec::new();
    write_field_csv(&sigma, &mut csv).unwrap();
    assert_eq!(read_field_csv(&csv[..]).unwrap(), sigma);
    let mut vtk = Vec::new();
    write_field_vtk(&sigma, "N=2 null field", &mut vtk).unwrap();
    let text = String::from_utf8(vtk).unwrap();
    assert_eq!(text.lines().filter(|l| l.starts_with("SCALARS")).count(), 6);
}

#[test]
fn every_poisson_ratio_gives_a_valid_null_field() {
    for nu in [-0.5, 0.1, 0.28, 0.45] {
        let c = ElasticConstants::new(2.5, nu).unwrap();
        let d = diagnose_potential(&n2_potential(&c), Grid3::new(17).unwrap(), &c).unwrap();
        assert!(d.passes(&Tolerances::default()), "nu = {nu}: {d:?}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    // the null span is closed under linear combination
    #[test]
    fn combinations_of_basis_fields_stay_null(w in prop::collection::vec(-1.0f64..1.0, 8)) {
        let c = ElasticConstants::default();
        let g = basis3().combine(&w).unwrap();
        let d = diagnose_potential(&coeffs_from_generator(&g, &c).unwrap(), Grid3::new(9).unwrap(), &c).unwrap();
        prop_assert!(d.passes(&Tolerances::default()), "{:?}", d);
    }
}
