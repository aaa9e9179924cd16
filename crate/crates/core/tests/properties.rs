use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use susyx_core::bethe::{parse_root_sets, root_sets_to_json, susy_pairing_check, BetheRootSet};
use susyx_core::linalg::{eig_hermitian, kron, rank, rank_nullspace, re, DEFAULT_RANK_TOL};
use susyx_core::reflection::{monodromy_direct, monodromy_recursive, Weights, ETA};
use susyx_core::susy::{hamiltonian, supercharge, supercharge_or_zero, total_sz};
use susyx_core::{LinOp, StateVec, C64};

fn complex(r: f64) -> impl Strategy<Value = C64> {
    (-r..r, -r..r).prop_map(|(x, y)| C64::new(x, y))
}

fn op(n_out: usize, n_in: usize) -> impl Strategy<Value = LinOp> {
    let (rows, cols) = (1usize << n_out, 1usize << n_in);
    prop::collection::vec(complex(2.0), rows * cols)
        .prop_map(move |v| LinOp::from_dense(n_out, n_in, DMatrix::from_vec(rows, cols, v)).unwrap())
}

fn state(n: usize) -> impl Strategy<Value = StateVec> {
    prop::collection::vec(complex(1.0), 1 << n)
        .prop_map(move |v| StateVec::from_amplitudes(n, DVector::from_vec(v)).unwrap())
}

fn spectral() -> impl Strategy<Value = C64> {
    (0.2f64..1.2, -0.4f64..0.4).prop_map(|(x, y)| C64::new(x, y))
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    #[test]
    fn kron_is_associative(a in op(1, 1), b in op(1, 0), c in op(0, 1)) {
        let l = kron(&kron(&a, &b), &c);
        let r = kron(&a, &kron(&b, &c));
        prop_assert!(l.max_abs_diff(&r).unwrap() < 1e-12);
    }

    #[test]
    fn kron_mixed_product(a in op(1, 1), b in op(1, 1), c in op(1, 1), d in op(1, 1)) {
        let l = &kron(&a, &b) * &kron(&c, &d);
        let r = kron(&(&a * &c), &(&b * &d));
        prop_assert!(l.max_abs_diff(&r).unwrap() < 1e-11);
    }

    #[test]
    fn rank_plus_nullity(a in op(2, 2), keep in 0usize..4) {
        // zero out rows to force a rank deficit
        let mut m = a.to_dense();
        for r in keep..4 {
            m.row_mut(r).fill(re(0.0));
        }
        let lo = LinOp::from_dense(2, 2, m).unwrap();
        let (r, null) = rank_nullspace(&lo, DEFAULT_RANK_TOL).unwrap();
        prop_assert_eq!(r, rank(&lo, DEFAULT_RANK_TOL).unwrap());
        prop_assert_eq!(r + null.len(), 4);
        prop_assert!(r <= keep);
        for (i, v) in null.iter().enumerate() {
            prop_assert!(lo.apply(v).unwrap().norm() < 1e-9);
            for w in &null[..i] {
                prop_assert!(v.inner(w).unwrap().norm() < 1e-10);
            }
            prop_assert!((v.norm() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn eigen_reconstruction(a in op(3, 3)) {
        let h = &a + &a.adjoint();
        let eig = eig_hermitian(&h).unwrap();
        prop_assert!(eig.values.windows(2).all(|w| w[0] <= w[1]));
        for (lam, v) in eig.values.iter().zip(&eig.vectors) {
            let r = h.apply(v).unwrap().sub(&v.scale(re(*lam))).unwrap().norm();
            prop_assert!(r < 1e-10 * h.max_abs().max(1.0));
        }
    }

    #[test]
    fn weight_identities(u in complex(3.0)) {
        let w = Weights::new(u);
        let (r1, r2) = w.identity_residuals();
        let scale = w.a.norm().max(w.b.norm()).max(1.0);
        prop_assert!(r1 < 1e-12 * scale);
        prop_assert!(r2 < 1e-12 * scale * scale);
    }

    #[test]
    fn direct_matches_recursive(u in spectral(), n in 1usize..5) {
        let r = monodromy_direct(n, u).unwrap().max_rel_diff(&monodromy_recursive(n, u).unwrap()).unwrap();
        prop_assert!(r < 1e-10);
    }

    #[test]
    fn supercharge_nilpotent_on_states(n in 2usize..7, seed in any::<u64>()) {
        let v = StateVec::from_amplitudes(
            n,
            DVector::from_fn(1 << n, |i, _| C64::new(((seed ^ i as u64) % 97) as f64, (i % 5) as f64)),
        ).unwrap();
        let w = supercharge_or_zero(n - 1).unwrap().apply(&supercharge(n).unwrap().apply(&v).unwrap()).unwrap();
        prop_assert_eq!(w.max_abs(), 0.0);
    }

    #[test]
    fn hamiltonian_is_real_symmetric_and_conserves_sz(n in 1usize..7) {
        let h = hamiltonian(n).unwrap();
        prop_assert!(h.is_real());
        prop_assert_eq!(h.hermiticity_defect().unwrap(), 0.0);
        let hs = &h * &total_sz(n);
        let sh = &total_sz(n) * &h;
        prop_assert_eq!(hs.max_abs_diff(&sh).unwrap(), 0.0);
    }

    #[test]
    fn hamiltonian_nonnegative(v in state(4)) {
        let e = v.inner(&hamiltonian(4).unwrap().apply(&v).unwrap()).unwrap();
        prop_assert!(e.re >= -1e-12 * v.norm() * v.norm());
        prop_assert!(e.im.abs() < 1e-12 * v.norm() * v.norm());
    }

    #[test]
    fn key_relation_off_shell(
        n in 2usize..5,
        roots in prop::collection::vec((0.1f64..1.0, -1.2f64..1.2), 1..3),
    ) {
        prop_assume!(roots.len() <= n);
        let roots: Vec<C64> = roots.into_iter().map(|(x, y)| C64::new(x, y)).collect();
        let Ok(rs) = BetheRootSet::new(n, roots) else { return Ok(()) };
        let rep = &susy_pairing_check(n, &rs, 0, 1).unwrap()[0];
        prop_assert!(rep.pass, "{:?}", rep);
    }

    #[test]
    fn kernel_when_eta_is_a_root(n in 2usize..5, extra in prop::option::of((0.1f64..1.0, -1.2f64..1.2))) {
        let mut roots = vec![ETA];
        roots.extend(extra.map(|(x, y)| C64::new(x, y)));
        prop_assume!(roots.len() <= n);
        let Ok(rs) = BetheRootSet::allowing_eta(n, roots) else { return Ok(()) };
        let rep = &susy_pairing_check(n, &rs, 0, 1).unwrap()[0];
        prop_assert_eq!(rep.check_name.as_str(), "pairing.kernel");
        prop_assert!(rep.pass, "{:?}", rep);
    }

    #[test]
    fn root_file_roundtrip(n in 1usize..6, roots in prop::collection::vec((-2.0f64..2.0, -3.0f64..3.0), 1..4)) {
        let roots: Vec<C64> = roots.into_iter().map(|(x, y)| C64::new(x, y)).collect();
        let Ok(rs) = BetheRootSet::new(n, roots) else { return Ok(()) };
        let back = parse_root_sets(&root_sets_to_json(std::slice::from_ref(&rs))).unwrap();
        prop_assert_eq!(back, vec![rs]);
    }
}
