mod common;

use common::SEEDS;

fn all_seeds(suite: fn(u64) -> Result<(), String>) {
    for seed in SEEDS {
        if let Err(e) = suite(seed) {
            panic!("seed {seed}: {e}");
        }
    }
}

#[test]
fn leibniz_rule() {
    all_seeds(common::leibniz);
}

#[test]
fn r_norm_submultiplicativity() {
    all_seeds(common::r_norm_submultiplicative);
}

#[test]
fn herglotz_property() {
    all_seeds(common::herglotz);
}

#[test]
fn subordination_semigroup() {
    all_seeds(common::subordination_semigroup);
}

#[test]
fn discrepancy_degree_monotonicity() {
    all_seeds(common::discrepancy_monotone);
}

#[test]
fn evaluation_is_star_homomorphism() {
    all_seeds(common::star_homomorphism);
}

#[test]
fn tangent_line_inequality() {
    all_seeds(common::tangent_lines);
}
