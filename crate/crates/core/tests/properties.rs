mod common;

use common::ssp104_stability;

macro_rules! suite {
    ($($name:ident),* $(,)?) => {
        $(
            #[test]
            fn $name() {
                if let Err(e) = common::$name() {
                    panic!("{e}");
                }
            }
        )*
    };
}

suite!(
    simplex_projection,
    kks_partition_oracle,
    sparse_vs_dense,
    rates_sum_to_zero,
    mass_conservation,
    stability_polynomials,
    pid_bias_bounds,
    rejection_shrinks,
    stage_count_minimal,
);

#[test]
fn ssp104_polynomial_has_fourth_order_taylor_terms() {
    // finite differences of the oracle polynomial at 0 reproduce 1, 1, 1/2
    let h = 1e-2f64;
    let f = ssp104_stability;
    let d1 = (f(h) - f(-h)) / (2.0 * h);
    let d2 = (f(h) - 2.0 * f(0.0) + f(-h)) / (h * h);
    assert!((f(0.0) - 1.0).abs() < 1e-14);
    assert!((d1 - 1.0).abs() < 1e-4);
    assert!((d2 - 1.0).abs() < 1e-4);
    let e = f(-0.05) - (-0.05f64).exp();
    // local error of a fourth-order method scales like z^5
    assert!(e.abs() < 1e-7, "{e}");
}
