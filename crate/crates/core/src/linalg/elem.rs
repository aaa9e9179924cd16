//! Elementary one- and two-site matrices.
//!
//! `e_trans(a, b)` sends `v_a ↦ v_b`, `e_proj(a)` is the covector
//! `v_a ↦ 1`, and `e_merge(a, b, c)` sends `v_a ⊗ v_b ↦ v_c`.

use super::{LinOp, Spin, C64};

fn one() -> C64 {
    C64::new(1.0, 0.0)
}

pub fn e_trans(from: Spin, to: Spin) -> LinOp {
    LinOp::from_triplets(1, 1, [(to.index(), from.index(), one())]).expect("2x2")
}

pub fn e_proj(on: Spin) -> LinOp {
    LinOp::from_triplets(0, 1, [(0, on.index(), one())]).expect("1x2")
}

pub fn e_merge(high: Spin, low: Spin, to: Spin) -> LinOp {
    LinOp::from_triplets(1, 2, [(to.index(), 2 * high.index() + low.index(), one())])
        .expect("2x4")
}

/// Single-site σᶻ.
pub fn sigma_z() -> LinOp {
    LinOp::from_triplets(1, 1, [(0, 0, one()), (1, 1, -one())]).expect("2x2")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::kron;
    use Spin::{Down, Up};

    #[test]
    fn merge_factorisations() {
        // E^{ab}_c = E^a ⊗ E^b_c = E^a_c ⊗ E^b
        for a in [Up, Down] {
            for b in [Up, Down] {
                for c in [Up, Down] {
                    let m = e_merge(a, b, c);
                    assert_eq!(m.max_abs_diff(&kron(&e_proj(a), &e_trans(b, c))).unwrap(), 0.0);
                    assert_eq!(m.max_abs_diff(&kron(&e_trans(a, c), &e_proj(b))).unwrap(), 0.0);
                }
            }
        }
    }
}
