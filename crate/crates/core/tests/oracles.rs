//! Self-checks of the independent test oracles.

mod common;

use common::conway_c2;

#[test]
fn conway_coefficients_of_small_braids() {
    assert_eq!(conway_c2(2, &[1, 1, 1]), 1, "trefoil");
    assert_eq!(conway_c2(2, &[-1, -1, -1]), 1, "mirror trefoil");
    assert_eq!(conway_c2(3, &[1, -2, 1, -2]), -1, "figure eight");
    assert_eq!(conway_c2(3, &[1, 2]), 0, "unknot");
    assert_eq!(conway_c2(2, &[1, 1, 1, 1, 1]), 3, "cinquefoil");
}
