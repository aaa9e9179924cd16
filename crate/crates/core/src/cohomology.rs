//! Kernel and image dimensions of the supercharges, the zero-energy singlet,
//! and the split of the spectrum of `H` into singlet and doublet partners.
//!
//! `Q⁽ⁿ⁾` sends `k` down spins on `n` sites to `k + 1` down spins on `n − 1`
//! sites, so ranks are computed blockwise by magnetisation sector.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{eig_hermitian, rank_dense, rank_nullspace_dense, LinOp, StateVec, C64};
use crate::report::CheckReport;
use crate::susy::{hamiltonian, supercharge, supercharge_dag, supercharge_or_zero};

/// Gap below which eigenvalues are treated as one degenerate level.
pub const DEGENERACY_TOL: f64 = 1e-8;
pub const SINGLET_TOL: f64 = 1e-10;
pub const PAIRING_TOL: f64 = 1e-9;

/// `⌈(2/3)(2^(n−1) − 1)⌉`, the rank of `Q⁽ⁿ⁾`.
pub fn iota_formula(n: usize) -> usize {
    if n == 0 {
        return 0;
    }
    let x = (1usize << (n - 1)) - 1;
    (2 * x).div_ceil(3)
}

/// `ι⁽ⁿ⁺¹⁾ + 1`, the nullity of `Q⁽ⁿ⁾`.
pub fn kappa_formula(n: usize) -> usize {
    iota_formula(n + 1) + 1
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DimReport {
    pub n: usize,
    pub kappa: usize,
    pub iota: usize,
    pub kappa_formula: usize,
    pub iota_formula: usize,
    pub exact_iota: Option<usize>,
}

fn sector_indices(n: usize, k: usize) -> Vec<usize> {
    (0..1usize << n).filter(|i| i.count_ones() as usize == k).collect()
}

/// Dense block of `op` between the `k_in`-down and `k_out`-down sectors.
pub fn sector_block(op: &LinOp, k_in: usize, k_out: usize) -> DMatrix<C64> {
    let rows = sector_indices(op.n_out(), k_out);
    let cols = sector_indices(op.n_in(), k_in);
    DMatrix::from_fn(rows.len(), cols.len(), |r, c| op.get(rows[r], cols[c]))
}

/// Floating-point rank of `Q⁽ⁿ⁾`, summed over sector blocks.
pub fn supercharge_rank(n: usize, tol: f64) -> Result<usize> {
    let q = supercharge(n)?;
    let mut total = 0;
    for k in 0..n {
        let b = sector_block(&q, k, k + 1);
        if b.nrows() == 0 || b.ncols() == 0 {
            continue;
        }
        total += rank_dense(&b, tol)?;
    }
    Ok(total)
}

fn gcd(mut a: i128, mut b: i128) -> i128 {
    a = a.abs();
    b = b.abs();
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Exact rank of an integer matrix by fraction-free elimination. Rows are
/// divided by their gcd after every update to keep entries small.
pub fn integer_rank(mut rows: Vec<Vec<i128>>) -> Result<usize> {
    let cols = rows.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for c in 0..cols {
        let Some(p) = (rank..rows.len()).find(|&r| rows[r][c] != 0) else { continue };
        rows.swap(rank, p);
        let pivot = rows[rank].clone();
        for row in rows.iter_mut().skip(rank + 1) {
            let f = row[c];
            if f == 0 {
                continue;
            }
            let mut g = 0;
            for (x, &pv) in row.iter_mut().zip(&pivot) {
                let lhs = x.checked_mul(pivot[c]).ok_or(Error::Overflow)?;
                let rhs = pv.checked_mul(f).ok_or(Error::Overflow)?;
                *x = lhs.checked_sub(rhs).ok_or(Error::Overflow)?;
                g = gcd(g, *x);
            }
            if g > 1 {
                row.iter_mut().for_each(|x| *x /= g);
            }
        }
        rank += 1;
    }
    Ok(rank)
}

/// Exact rank of `Q⁽ⁿ⁾` from its integer entries, blockwise by sector.
pub fn exact_supercharge_rank(n: usize) -> Result<usize> {
    let q = supercharge(n)?;
    let mut total = 0;
    for k in 0..n {
        let b = sector_block(&q, k, k + 1);
        let mut rows = Vec::with_capacity(b.nrows());
        for r in 0..b.nrows() {
            let mut row = Vec::with_capacity(b.ncols());
            for c in 0..b.ncols() {
                let z = b[(r, c)];
                if z.im != 0.0 || z.re.fract() != 0.0 {
                    return Err(Error::InvalidArgument(format!("non-integer entry {z}")));
                }
                row.push(z.re as i128);
            }
            rows.push(row);
        }
        total += integer_rank(rows)?;
    }
    Ok(total)
}

/// Rank and nullity of `Q⁽ⁿ⁾` against the closed forms, backed by exact elimination.
pub fn dims(n: usize, tol: f64) -> Result<(DimReport, CheckReport)> {
    if n < 2 {
        return Err(Error::ChainLength { n, min: 2, what: "dimension count" });
    }
    let iota = supercharge_rank(n, tol)?;
    let exact = exact_supercharge_rank(n)?;
    let rep = DimReport {
        n,
        kappa: (1 << n) - iota,
        iota,
        kappa_formula: kappa_formula(n),
        iota_formula: iota_formula(n),
        exact_iota: Some(exact),
    };
    let mismatch = rep.iota.abs_diff(rep.iota_formula) + rep.kappa.abs_diff(rep.kappa_formula) + exact.abs_diff(rep.iota);
    let check = CheckReport::new("cohomology.dims", mismatch as f64, 0.0)
        .param("n", n)
        .param("kappa", rep.kappa)
        .param("iota", rep.iota)
        .param("exact_iota", exact)
        .param("kappa_formula", rep.kappa_formula)
        .param("iota_formula", rep.iota_formula);
    Ok((rep, check))
}

fn stack(ops: &[&LinOp]) -> DMatrix<C64> {
    let cols = ops[0].cols();
    let rows: usize = ops.iter().map(|o| o.rows()).sum();
    let mut m = DMatrix::zeros(rows, cols);
    let mut at = 0;
    for op in ops {
        m.view_mut((at, 0), (op.rows(), cols)).copy_from(&op.to_dense());
        at += op.rows();
    }
    m
}

/// `Ker Q⁽ⁿ⁾ ∩ Ker Q⁽ⁿ⁺¹⁾†`, expected one-dimensional, cross-checked against
/// the zero modes of `H⁽ⁿ⁾`.
pub fn vacuum_singlet(n: usize, tol: f64) -> Result<(StateVec, CheckReport)> {
    if n < 1 {
        return Err(Error::ChainLength { n, min: 1, what: "vacuum singlet" });
    }
    let q = supercharge_or_zero(n)?;
    let qd_next = supercharge_dag(n + 1)?;
    let (_, null) = rank_nullspace_dense(&stack(&[&q, &qd_next]), tol)?;
    let base = CheckReport::new("cohomology.vacuum_singlet", 0.0, tol)
        .param("n", n)
        .param("intersection_dim", null.len());
    if null.len() != 1 {
        return Ok((StateVec::zeros(n), base.fail("intersection is not one-dimensional")));
    }
    let mut omega = StateVec::from_amplitudes(n, null.into_iter().next().unwrap())?.normalized();
    // fix the phase by the largest amplitude
    let (_, big) = omega.amplitudes().iter().fold((0.0, C64::new(1.0, 0.0)), |acc, &z| {
        if z.norm() > acc.0 + 1e-12 {
            (z.norm(), z)
        } else {
            acc
        }
    });
    omega = omega.scale(big.conj() / big.norm());

    let h = hamiltonian(n)?;
    let energy = h.apply(&omega)?.norm();
    let eig = eig_hermitian(&h)?;
    let zero_modes: Vec<&StateVec> =
        eig.values.iter().zip(&eig.vectors).filter(|(e, _)| e.abs() < DEGENERACY_TOL).map(|(_, v)| v).collect();
    let overlap_defect = if zero_modes.len() == 1 {
        1.0 - omega.inner(zero_modes[0])?.norm()
    } else {
        1.0
    };
    let sector = omega.sector(tol);
    let sz = sector.map(|k| n as i64 - 2 * k as i64);
    let sector_defect = match sector {
        Some(k) => omega.weight_outside_sector(k),
        None => 1.0,
    };
    let residual = energy.max(overlap_defect).max(sector_defect);
    let mut rep = CheckReport::new("cohomology.vacuum_singlet", residual, tol);
    rep.params = base.params;
    let rep = rep
        .param("energy_residual", energy)
        .param("h_zero_modes", zero_modes.len())
        .param("overlap_defect", overlap_defect)
        .param("sz", sz)
        .param("n_mod_2", n % 2)
        .param("interpretation", "spin sector read as the total-sz eigenvalue n mod 2");
    Ok((omega, rep))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectrumDecomposition {
    pub n: usize,
    pub singlet_count: usize,
    pub paired_up: usize,
    pub paired_down: usize,
    pub pairing_tolerance: f64,
}

/// Eigenvalues grouped into degenerate levels, as index ranges into the sorted spectrum.
fn levels(values: &[f64]) -> Vec<std::ops::Range<usize>> {
    let mut out = Vec::new();
    let mut start = 0;
    for i in 1..=values.len() {
        if i == values.len() || values[i] - values[i - 1] > DEGENERACY_TOL {
            out.push(start..i);
            start = i;
        }
    }
    out
}

/// Classifies the eigenvectors of `H⁽ⁿ⁾`: the zero-energy singlet, states
/// with a partner on `n − 1` sites (nonzero image under `Q⁽ⁿ⁾`), and states
/// with a partner on `n + 1` sites. Within each degenerate level the count of
/// the middle class is the rank of `Q` restricted to that level.
pub fn spectrum_decomposition(n: usize, tol: f64) -> Result<(SpectrumDecomposition, Vec<CheckReport>)> {
    if n < 2 {
        return Err(Error::ChainLength { n, min: 2, what: "spectrum decomposition" });
    }
    let h = hamiltonian(n)?;
    let q = supercharge(n)?;
    let h_small = hamiltonian(n - 1)?;
    let eig = eig_hermitian(&h)?;
    let vecs = eig.vector_matrix();
    let qd = q.to_dense();

    let mut singlet = 0;
    let mut down = 0;
    let mut spot: Vec<(f64, StateVec)> = Vec::new();
    for lv in levels(&eig.values) {
        let e = eig.values[lv.start];
        if e.abs() < DEGENERACY_TOL {
            singlet += lv.len();
            continue;
        }
        let block = vecs.columns(lv.start, lv.len()).into_owned();
        let image = &qd * &block;
        // rank is relative to σ_max, so an image that is zero up to rounding must be caught first
        let r = if image.iter().all(|z| z.norm() < tol) { 0 } else { rank_dense(&image, tol)? };
        down += r;
        for c in 0..lv.len() {
            if spot.len() >= 5 {
                break;
            }
            let w = image.column(c).into_owned();
            if w.norm() > 1e-6 {
                spot.push((e, StateVec::from_amplitudes(n - 1, w)?));
            }
        }
    }
    let total = 1usize << n;
    let up = total - singlet - down;
    let dec = SpectrumDecomposition { n, singlet_count: singlet, paired_up: up, paired_down: down, pairing_tolerance: PAIRING_TOL };

    let want = (1, iota_formula(n + 1), iota_formula(n));
    let mismatch = singlet.abs_diff(want.0) + up.abs_diff(want.1) + down.abs_diff(want.2);
    let counts = CheckReport::new("cohomology.spectrum_counts", mismatch as f64, 0.0)
        .param("n", n)
        .param("singlet", singlet)
        .param("paired_up", up)
        .param("paired_down", down)
        .param("expected", vec![want.0, want.1, want.2]);
    let mut pair_res: f64 = 0.0;
    for (e, w) in &spot {
        let r = h_small.apply(w)?.sub(&w.scale(C64::new(*e, 0.0)))?.norm() / w.norm();
        pair_res = pair_res.max(r);
    }
    let pairing = CheckReport::new("cohomology.pair_energies", pair_res, PAIRING_TOL)
        .param("n", n)
        .param("pairs_checked", spot.len());
    Ok((dec, vec![counts, pairing]))
}
