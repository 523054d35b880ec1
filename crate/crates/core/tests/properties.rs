mod common;

fn check(r: Result<(), String>) {
    if let Err(e) = r {
        panic!("{e}");
    }
}

#[test]
fn polynomial_ring_identities() {
    check(common::poly_arith_identities());
}

#[test]
fn basis_count_matches_binomial() {
    check(common::basis_count_binomial());
}

#[test]
fn chordal_cover_has_rip_and_is_perfect() {
    check(common::chordal_rip());
}

#[test]
fn sdpa_write_read_write_is_stable() {
    check(common::sdpa_round_trip());
}

#[test]
fn identity_residual_small_on_optimal_solves() {
    let n = common::identity_reconstruction(1e-6).unwrap();
    assert!(n >= 5, "only {n} instances solved to optimality");
}

#[test]
fn psi_is_monotone_and_nonpositive_on_feasible_set() {
    check(common::psi_monotone());
}

#[test]
fn psi_degree() {
    check(common::psi_degree());
}

#[test]
fn gamma_bounds_hold_inside_and_outside() {
    check(common::gamma_certificate());
}

#[test]
fn bound_r_dominates_grid() {
    check(common::bound_r_dominance());
}

#[test]
fn theta_has_even_positive_terms() {
    check(common::theta_even_nonneg());
}

#[test]
fn adaptive_bases_within_lasserre() {
    check(common::adaptive_within_lasserre());
}

#[test]
fn reduction_is_idempotent() {
    check(common::reduce_idempotent());
}

#[test]
fn copositivity_offdiagonal_is_centered() {
    let mean = common::copositivity_offdiag_mean(10_000);
    assert!(mean.abs() < 0.02, "mean {mean}");
}

#[test]
fn boxqp_density_matches() {
    let d = common::boxqp_density(50, 0.6, 4);
    assert!((d - 0.6).abs() < 0.02, "density {d}");
}

#[test]
fn solved_count_monotone_in_threshold() {
    check(common::solved_monotone());
}

#[test]
fn csv_is_deterministic() {
    check(common::csv_deterministic());
}
