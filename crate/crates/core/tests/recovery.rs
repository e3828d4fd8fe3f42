use eigentomo::cosine::{assemble_constraints, coeffs_from_generator, null_basis, DEFAULT_NULL_TOL};
use eigentomo::field::{read_field_csv, write_field_csv};
use eigentomo::recovery::{
    assemble_shear_recovery, recover_diagonal_from_shear, relative_l2, solve_shear_recovery, BoundaryMode,
    RecoveryMode, RecoveryProblem,
};
use eigentomo::{CosinePotential, ElasticConstants, Grid3, SymTensorField3};

fn n2_potential() -> CosinePotential {
    let c = ElasticConstants::default();
    let nb = null_basis(&assemble_constraints(2, &c).unwrap(), DEFAULT_NULL_TOL).unwrap();
    coeffs_from_generator(&nb.generator(0).unwrap(), &c).unwrap()
}

fn shear_error(pot: &CosinePotential, m: usize) -> f64 {
    let g = Grid3::new(m).unwrap();
    let truth = pot.stress_series().eval(g);
    let p =
        RecoveryProblem::from_potential(pot, g, RecoveryMode::ShearFromDiagonal).with_boundary(BoundaryMode::Traction);
    let sol = solve_shear_recovery(&assemble_shear_recovery(&p).unwrap()).unwrap();
    let mut f = truth.clone();
    for k in 0..3 {
        f.comps[3 + k] = sol.tau[k].clone();
    }
    relative_l2(&f, &truth, &[3, 4, 5])
}

#[test]
fn zero_inputs_recover_zero_in_both_directions() {
    let g = Grid3::new(9).unwrap();
    let zero = SymTensorField3::zeros(g);
    let diag =
        recover_diagonal_from_shear(&RecoveryProblem::from_field(&zero, RecoveryMode::DiagonalFromShear)).unwrap();
    assert_eq!(diag.max_abs_all(), 0.0);
    let p = RecoveryProblem::from_field(&zero, RecoveryMode::ShearFromDiagonal).with_boundary(BoundaryMode::Dirichlet);
    let sol = solve_shear_recovery(&assemble_shear_recovery(&p).unwrap()).unwrap();
    assert!(sol.tau.iter().flatten().all(|&v| v == 0.0));
    assert!(sol.min_singular_value_relative > 1e-8);
}

#[test]
fn diagonal_recovery_from_a_csv_field_matches_in_memory() {
    let g = Grid3::new(17).unwrap();
    let truth = n2_potential().stress_series().eval(g);
    let mut csv = Vec::new();
    write_field_csv(&truth, &mut csv).unwrap();
    let loaded = read_field_csv(&csv[..]).unwrap();
    let direct =
        recover_diagonal_from_shear(&RecoveryProblem::from_field(&truth, RecoveryMode::DiagonalFromShear)).unwrap();
    let via_file =
        recover_diagonal_from_shear(&RecoveryProblem::from_field(&loaded, RecoveryMode::DiagonalFromShear)).unwrap();
    assert_eq!(direct, via_file);
}

#[test]
fn n2_shear_error_at_m17_is_within_five_percent() {
    let err = shear_error(&n2_potential(), 17);
    assert!(err <= 5e-2, "relative shear error at m = 17 is {err:.4}");
}
