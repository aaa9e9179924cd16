//! Length-changing supercharges and the Hamiltonian they square to.
//!
//! The local merge `q: V⊗V → V` sends `v₊⊗v₊ ↦ v₋` and kills every other
//! basis state; `Q^(n) = Σ_{i=1}^{n-1} (-1)^{i+1} q_{i,i+1}` maps `n` sites to
//! `n-1`. The Hamiltonian is the open XXZ chain at Δ = −1/2 with boundary
//! fields and the constant shift `(3n-1)/4`, which makes
//! `H^(n) = Q^(n)†Q^(n) + Q^(n+1)Q^(n+1)†` hold exactly.

use crate::error::{Error, Result};
use crate::linalg::elem::{e_merge, sigma_z};
use crate::linalg::{embed_pair, kron, re, LinOp, Spin, C64};
use crate::report::CheckReport;

/// Residual bound for identities between integer/dyadic matrices.
pub const EXACT_TOL: f64 = 1e-12;

pub fn local_q() -> LinOp {
    e_merge(Spin::Up, Spin::Up, Spin::Down)
}

pub fn local_q_dag() -> LinOp {
    local_q().adjoint()
}

fn alternating_sign(i: usize) -> f64 {
    if i % 2 == 1 {
        1.0
    } else {
        -1.0
    }
}

/// `Q^(n)` for `n ≥ 2`.
pub fn supercharge(n: usize) -> Result<LinOp> {
    if n < 2 {
        return Err(Error::ChainLength { n, min: 2, what: "supercharge" });
    }
    let q = local_q();
    let mut terms = Vec::with_capacity(n - 1);
    for i in 1..n {
        terms.push((re(alternating_sign(i)), embed_pair(&q, i, n)?));
    }
    let refs: Vec<(C64, &LinOp)> = terms.iter().map(|(k, op)| (*k, op)).collect();
    LinOp::lin_comb(&refs)
}

pub fn supercharge_dag(n: usize) -> Result<LinOp> {
    Ok(supercharge(n)?.adjoint())
}

/// `Q^(n)` extended to `n = 1` (an empty sum, the zero map to the 0-site space).
pub fn supercharge_or_zero(n: usize) -> Result<LinOp> {
    match n {
        0 => Err(Error::ChainLength { n, min: 1, what: "supercharge" }),
        1 => Ok(LinOp::zeros(0, 1)),
        _ => supercharge(n),
    }
}

/// A supercharge together with its adjoint.
#[derive(Clone, Debug)]
pub struct SusyPair {
    pub n: usize,
    pub q_op: LinOp,
    pub q_dag_op: LinOp,
}

impl SusyPair {
    pub fn new(n: usize) -> Result<Self> {
        let q_op = supercharge(n)?;
        let q_dag_op = q_op.adjoint();
        Ok(SusyPair { n, q_op, q_dag_op })
    }
}

/// The open XXZ Hamiltonian on `n ≥ 1` sites, assembled in quarter units.
pub fn hamiltonian(n: usize) -> Result<LinOp> {
    if n < 1 {
        return Err(Error::ChainLength { n, min: 1, what: "Hamiltonian" });
    }
    let dim = 1usize << n;
    let sz = |bits: usize, site: usize| -> i64 { if (bits >> (site - 1)) & 1 == 0 { 1 } else { -1 } };
    let mut trip = Vec::new();
    for bits in 0..dim {
        // quarters: +σᶻσᶻ per bond, −σᶻ₁ − σᶻ_n, + (3n − 1)
        let mut diag: i64 = 3 * n as i64 - 1;
        diag -= sz(bits, 1) + sz(bits, n);
        for i in 1..n {
            diag += sz(bits, i) * sz(bits, i + 1);
            if sz(bits, i) != sz(bits, i + 1) {
                let flipped = bits ^ (0b11 << (i - 1));
                trip.push((flipped, bits, re(-1.0)));
            }
        }
        if diag != 0 {
            trip.push((bits, bits, re(diag as f64 / 4.0)));
        }
    }
    LinOp::from_triplets(n, n, trip)
}

/// `Σ_i σᶻ_i` on `n` sites.
pub fn total_sz(n: usize) -> LinOp {
    let mut acc = LinOp::zeros(n, n);
    for i in 0..n {
        let op = kron(&kron(&LinOp::identity(n - i - 1), &sigma_z()), &LinOp::identity(i));
        acc = &acc + &op;
    }
    acc
}

/// `‖H − (Q^(n)†Q^(n) + Q^(n+1)Q^(n+1)†)‖` for a candidate Hamiltonian `h` on `n` sites.
pub fn decomposition_residual(h: &LinOp, n: usize) -> Result<f64> {
    let qn = supercharge_or_zero(n)?;
    let qn1 = supercharge(n + 1)?;
    let rhs = &(&qn.adjoint() * &qn) + &(&qn1 * &qn1.adjoint());
    h.max_abs_diff(&rhs)
}

/// The supersymmetry identities on `n ≥ 2` sites: nilpotency, the
/// factorisation of `H`, intertwining, (co)associativity of `q`, the
/// recursive split of `Q^(n+1)` and magnetisation conservation.
pub fn check_susy_suite(n: usize) -> Result<Vec<CheckReport>> {
    if n < 2 {
        return Err(Error::ChainLength { n, min: 2, what: "SUSY suite" });
    }
    let q_prev = supercharge_or_zero(n - 1)?;
    let qn = supercharge(n)?;
    let qn1 = supercharge(n + 1)?;
    let h_prev = hamiltonian(n - 1)?;
    let h = hamiltonian(n)?;
    let mut out = Vec::new();
    let rep = |name: &str, r: f64| CheckReport::new(name, r, EXACT_TOL).param("n", n);

    out.push(rep("susy.nilpotent_q", (&q_prev * &qn).max_abs()));
    out.push(rep("susy.nilpotent_qdag", (&qn1.adjoint() * &qn.adjoint()).max_abs()));
    out.push(rep("susy.h_decomposition", decomposition_residual(&h, n)?));
    out.push(rep("susy.intertwine_q", (&h_prev * &qn).max_abs_diff(&(&qn * &h))?));
    out.push(rep("susy.intertwine_qdag", (&h * &qn.adjoint()).max_abs_diff(&(&qn.adjoint() * &h_prev))?));

    let q = local_q();
    let i1 = LinOp::identity(1);
    let assoc = (&q * &kron(&q, &i1)).max_abs_diff(&(&q * &kron(&i1, &q)))?;
    out.push(rep("susy.q_associativity", assoc));
    let qd = local_q_dag();
    let coassoc = (&kron(&qd, &i1) * &qd).max_abs_diff(&(&kron(&i1, &qd) * &qd))?;
    out.push(rep("susy.qdag_coassociativity", coassoc));

    let split = &kron(&i1, &qn) + &(&embed_pair(&q, n, n + 1)? * re(if n.is_multiple_of(2) { -1.0 } else { 1.0 }));
    out.push(rep("susy.q_split", qn1.max_abs_diff(&split)?));
    out.push(rep("susy.h_conserves_sz", crate::linalg::comm_norm(&h, &total_sz(n))?));
    Ok(out)
}
