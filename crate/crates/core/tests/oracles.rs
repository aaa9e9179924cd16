//! Independent constructions compared against the library.

use std::f64::consts::PI;

use approx::assert_relative_eq;
use nalgebra::DMatrix;
use susyx_core::bethe::{
    ansatz_singular, bethe_state, eigen_residual, m1_roots_closed_form, max_bethe_residual, onshell_check,
    solve_bethe, tau_energy, BetheRootSet, SolverConfig,
};
use susyx_core::cohomology::{exact_supercharge_rank, iota_formula, kappa_formula, vacuum_singlet, SINGLET_TOL};
use susyx_core::linalg::{eig_hermitian, re};
use susyx_core::reflection::{transfer, Weights, ETA};
use susyx_core::susy::{hamiltonian, supercharge};
use susyx_core::{LinOp, StateVec, C64};

fn c(x: f64, y: f64) -> C64 {
    C64::new(x, y)
}

fn pauli() -> [DMatrix<C64>; 3] {
    let z = c(0.0, 0.0);
    let o = c(1.0, 0.0);
    let i = c(0.0, 1.0);
    [
        DMatrix::from_row_slice(2, 2, &[z, o, o, z]),
        DMatrix::from_row_slice(2, 2, &[z, -i, i, z]),
        DMatrix::from_row_slice(2, 2, &[o, z, z, -o]),
    ]
}

/// `op` on site `site` (1 = least significant) of `n` sites.
fn on_site(op: &DMatrix<C64>, site: usize, n: usize) -> DMatrix<C64> {
    let mut m = DMatrix::<C64>::identity(1, 1);
    for s in (1..=n).rev() {
        let f = if s == site { op.clone() } else { DMatrix::identity(2, 2) };
        m = m.kronecker(&f);
    }
    m
}

/// The open XXZ Hamiltonian at Δ = −1/2 from Pauli matrices.
fn pauli_hamiltonian(n: usize) -> DMatrix<C64> {
    let [sx, sy, sz] = pauli();
    let dim = 1 << n;
    let mut h = DMatrix::<C64>::identity(dim, dim) * re((3.0 * n as f64 - 1.0) / 4.0);
    for i in 1..n {
        let xx = on_site(&sx, i, n) * on_site(&sx, i + 1, n);
        let yy = on_site(&sy, i, n) * on_site(&sy, i + 1, n);
        let zz = on_site(&sz, i, n) * on_site(&sz, i + 1, n);
        h -= (xx + yy - zz * re(0.5)) * re(0.5);
    }
    h -= (on_site(&sz, 1, n) + on_site(&sz, n, n)) * re(0.25);
    h
}

#[test]
fn hamiltonian_matches_pauli_form() {
    for n in 1..=6 {
        let diff = (hamiltonian(n).unwrap().to_dense() - pauli_hamiltonian(n)).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(diff < 1e-14, "n={n} diff={diff}");
    }
}

#[test]
fn small_spectra() {
    let vals = |n| eig_hermitian(&hamiltonian(n).unwrap()).unwrap().values;
    let v1 = vals(1);
    assert!((v1[0]).abs() < 1e-12 && (v1[1] - 1.0).abs() < 1e-12);
    let v2 = vals(2);
    for (x, want) in v2.iter().zip([0.0, 1.0, 2.0, 2.0]) {
        assert!((x - want).abs() < 1e-12, "{v2:?}");
    }
    let up = StateVec::all_up(2);
    assert_eq!(hamiltonian(2).unwrap().apply(&up).unwrap(), up);
}

#[test]
fn q3_on_all_up_in_bit_form() {
    // bit form: site 1 is the lowest bit; v₋ on site 1 is |0b01⟩
    let got = supercharge(3).unwrap().apply(&StateVec::all_up(3)).unwrap();
    let want = StateVec::basis(2, 0b01).unwrap().sub(&StateVec::basis(2, 0b10).unwrap()).unwrap();
    assert_eq!(got, want);
}

#[test]
fn ranks_against_closed_forms() {
    for n in 2..=9 {
        assert_eq!(exact_supercharge_rank(n).unwrap(), iota_formula(n), "n={n}");
        assert_eq!(kappa_formula(n) + iota_formula(n), 1 << n);
    }
}

#[test]
fn weights_at_one() {
    let w = Weights::new(re(1.0));
    let s3 = 3f64.sqrt();
    let (ch, sh) = (1f64.cosh(), 1f64.sinh());
    assert_relative_eq!(w.a.re, ch, epsilon = 1e-14);
    assert_relative_eq!(w.a.im, sh / s3, epsilon = 1e-14);
    assert_relative_eq!(w.b.im, -2.0 * sh / s3, epsilon = 1e-14);
    assert_relative_eq!(w.d.re, -ch, epsilon = 1e-14);
    assert_relative_eq!(w.d.im, sh / s3, epsilon = 1e-14);
}

#[test]
fn transfer_spectrum_contains_bethe_eigenvalue() {
    // the Bethe eigenvalue must be one of the eigenvalues of the dense transfer matrix
    let u = c(0.4, 0.15);
    for rs in m1_roots_closed_form(3) {
        let t = transfer(3, u).unwrap().to_dense();
        let v = bethe_state(3, &rs).unwrap();
        let tv = &t * v.amplitudes();
        let k = v.amplitudes().iter().enumerate().max_by(|a, b| a.1.norm().total_cmp(&b.1.norm())).unwrap().0;
        let tau = tv[k] / v.amplitudes()[k];
        assert!(eigen_residual(3, u, &rs, &v).unwrap() < 1e-9);
        let tau_formula = susyx_core::bethe::tau_eigenvalue(3, u, &rs).unwrap();
        assert!((tau - tau_formula).norm() < 1e-9 * tau.norm().max(1.0), "{tau} vs {tau_formula}");
    }
}

#[test]
fn genuine_two_site_roots() {
    // tanh λ = (i√3/2)/(ω + 1/2) with ω = ±i gives Re λ = ±0.6585…, Im λ = π/6 (mod iπ)
    let sets = m1_roots_closed_form(2);
    assert_eq!(sets.len(), 4);
    for rs in &sets {
        let l = rs.roots()[0];
        assert_relative_eq!(l.re.abs(), 0.658_478_948_462_408_7, epsilon = 1e-12);
        assert!(((l.im - PI / 6.0) / PI).fract().abs() < 1e-12 || ((l.im - PI / 6.0) / PI).fract().abs() > 1.0 - 1e-12);
        let rep = onshell_check(2, rs, 3, 5).unwrap();
        assert!(rep.pass, "{rep:?}");
        assert!(tau_energy(2, rs).unwrap().norm() < 1e-9);
    }
}

#[test]
fn ipi6_solves_the_equations_but_not_the_eigenproblem() {
    let rs = BetheRootSet::new(2, vec![c(0.0, PI / 6.0)]).unwrap();
    let w = Weights::new(rs.roots()[0]);
    assert!((w.a.norm() - 1.0 / 3f64.sqrt()).abs() < 1e-14 && (w.b.norm() - 1.0 / 3f64.sqrt()).abs() < 1e-14);
    assert!(max_bethe_residual(&rs) < 1e-12);
    assert!(ansatz_singular(&rs).is_some());
    assert!(onshell_check(2, &rs, 3, 1).is_err());
    // the state is v₊⊗v₋/3 + v₋⊗v₊ up to scale, which is not an H eigenvector
    let v = bethe_state(2, &rs).unwrap();
    let a = v.amplitudes();
    assert!((a[0b01].norm() / a[0b10].norm() - 1.0 / 3.0).abs() < 1e-12 || (a[0b10].norm() / a[0b01].norm() - 1.0 / 3.0).abs() < 1e-12);
    let hv = hamiltonian(2).unwrap().apply(&v).unwrap();
    let ray = hv.inner(&v).unwrap() / v.inner(&v).unwrap();
    assert!(hv.sub(&v.scale(ray)).unwrap().norm() > 0.1 * v.norm());
    // the solver meets it and records the exclusion
    let out = solve_bethe(2, 1, &SolverConfig { seed: 7, ..SolverConfig::default() }).unwrap();
    assert!(out.solutions.iter().all(|s| (s.roots()[0] - c(0.0, PI / 6.0)).norm() > 1e-6));
    assert!(out.excluded.iter().any(|e| (e.roots[0][0]).abs() < 1e-8 && (e.roots[0][1] - PI / 6.0).abs() < 1e-8));
}

#[test]
fn eta_is_flagged() {
    assert!(BetheRootSet::new(3, vec![ETA]).is_err());
    let rs = BetheRootSet::allowing_eta(3, vec![ETA]).unwrap();
    assert!(rs.contains_eta());
}

#[test]
fn singlet_in_expected_sector() {
    for n in 1..=7 {
        let (w, rep) = vacuum_singlet(n, SINGLET_TOL).unwrap();
        assert!(rep.pass, "{rep:?}");
        let k = w.sector(1e-10).unwrap();
        assert_eq!(n as i64 - 2 * k as i64, (n % 2) as i64);
        let e = hamiltonian(n).unwrap().apply(&w).unwrap().norm();
        assert!(e < 1e-10);
    }
}

#[test]
fn monodromy_at_zero_is_minus_identity_on_both_constructions() {
    let minus = &LinOp::identity(3) * re(-1.0);
    for blocks in [
        susyx_core::reflection::monodromy_direct(3, re(0.0)).unwrap(),
        susyx_core::reflection::monodromy_recursive(3, re(0.0)).unwrap(),
    ] {
        assert!(blocks.a.max_abs_diff(&minus).unwrap() < 1e-14);
        assert!(blocks.d.max_abs_diff(&minus).unwrap() < 1e-14);
        assert!(blocks.b.max_abs() < 1e-14 && blocks.c.max_abs() < 1e-14);
    }
}
