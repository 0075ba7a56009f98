mod common;

#[test]
fn complexes_are_face_and_intersection_closed() {
    common::complex_closure(256).unwrap();
}

#[test]
fn transport_is_unimodular_and_invertible() {
    common::transport_round_trip(256).unwrap();
}

#[test]
fn truncated_ring_axioms() {
    common::ring_axioms(256).unwrap();
}

#[test]
fn exp_and_log_are_inverse() {
    common::exp_log(256).unwrap();
}

#[test]
fn products_reduce_to_zeroth_order() {
    common::flat_reduction(128).unwrap();
}

#[test]
fn degeneration_products_respect_grading() {
    common::grading_additivity(128).unwrap();
}
