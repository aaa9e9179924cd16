//! Bethe equations, a multistart Newton solver, Bethe states and their
//! transfer-matrix eigenvalues, and the checks relating Bethe states on
//! chains of length `n` and `n − 1`.
//!
//! Residuals use the reduced form of the equations,
//! `a(λⱼ)^{2n} ∏ sinh(λⱼ−λₖ−η) sinh(λⱼ+λₖ) = b(λⱼ)^{2n} ∏ sinh(λⱼ−λₖ+η) sinh(λⱼ+λₖ+2η)`,
//! obtained from the cleared-denominator form by removing the common factor
//! `−sinh(2λⱼ) sinh(λⱼ−η)/sinh η`. Each residual is normalised by the larger
//! of the two sides.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{re, StateVec, C64};
use crate::reflection::{
    delta_minus, delta_plus, energy_from_derivative, monodromy_recursive, richardson_derivative, sinh_eta,
    Weights, DERIVATIVE_STEP, ETA,
};
use crate::report::CheckReport;
use crate::sampling::SpectralSampler;
use crate::susy::{hamiltonian, supercharge};

/// Separation below which roots, denominators and sinh factors count as coincident or singular.
pub const ROOT_TOL: f64 = 1e-8;
pub const SOLVER_TOL: f64 = 1e-11;
pub const ONSHELL_TOL: f64 = 1e-9;
pub const EIGEN_TOL: f64 = 1e-8;
pub const ENERGY_TOL: f64 = 1e-6;
pub const KEY_RELATION_TOL: f64 = 1e-9;
pub const AUGMENTED_TOL: f64 = 1e-8;
pub const KERNEL_TOL: f64 = 1e-12;
/// Relative norm below which a Bethe state counts as zero.
pub const VANISHING_TOL: f64 = 1e-8;

/// Imaginary part folded into `(−π, π]`.
pub fn fold(z: C64) -> C64 {
    // in-range values pass through so that folding is idempotent
    if z.im > -PI && z.im <= PI {
        return z;
    }
    let mut t = z.im.rem_euclid(2.0 * PI);
    if t > PI {
        t -= 2.0 * PI;
    }
    C64::new(z.re, t)
}

/// Distance modulo `2πi`.
pub fn periodic_dist(x: C64, y: C64) -> f64 {
    let d = fold(x - y);
    let im = d.im.abs().min(2.0 * PI - d.im.abs());
    d.re.hypot(im)
}

pub fn is_eta(z: C64) -> bool {
    periodic_dist(z, ETA) < ROOT_TOL
}

/// A set of rapidities for a chain of length `n`, in canonical order.
#[derive(Clone, Debug, PartialEq)]
pub struct BetheRootSet {
    n: usize,
    roots: Vec<C64>,
    contains_eta: bool,
}

fn canonical(mut roots: Vec<C64>) -> Vec<C64> {
    for r in roots.iter_mut() {
        *r = fold(*r);
    }
    roots.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    roots
}

impl BetheRootSet {
    /// Validated, canonicalised root set; a root at `η` is rejected.
    pub fn new(n: usize, roots: Vec<C64>) -> Result<Self> {
        Self::build(n, roots, false)
    }

    /// As [`BetheRootSet::new`], but roots at `η` are accepted and flagged.
    pub fn allowing_eta(n: usize, roots: Vec<C64>) -> Result<Self> {
        Self::build(n, roots, true)
    }

    fn build(n: usize, roots: Vec<C64>, allow_eta: bool) -> Result<Self> {
        if n < 1 {
            return Err(Error::ChainLength { n, min: 1, what: "Bethe root set" });
        }
        let roots = canonical(roots);
        let mut contains_eta = false;
        for &l in &roots {
            if !(l.re.is_finite() && l.im.is_finite()) {
                return Err(Error::InvalidArgument(format!("non-finite root {l}")));
            }
            if is_eta(l) {
                if !allow_eta {
                    return Err(Error::Singular(format!("root {l} equals eta")));
                }
                contains_eta = true;
                continue;
            }
            if (2.0 * l).sinh().norm() < ROOT_TOL {
                return Err(Error::Singular(format!("sinh(2λ) vanishes at λ = {l}")));
            }
        }
        for j in 0..roots.len() {
            for k in 0..j {
                let (x, y) = (roots[j], roots[k]);
                if periodic_dist(x, y) < ROOT_TOL {
                    return Err(Error::Singular(format!("roots {x} and {y} coincide")));
                }
                let checks = [
                    ("sinh(λj−λk−η)", (x - y - ETA).sinh()),
                    ("sinh(λj−λk+η)", (x - y + ETA).sinh()),
                    ("sinh(λj+λk)", (x + y).sinh()),
                ];
                for (name, v) in checks {
                    if v.norm() < ROOT_TOL {
                        return Err(Error::Singular(format!("{name} vanishes for λj = {x}, λk = {y}")));
                    }
                }
            }
        }
        Ok(BetheRootSet { n, roots, contains_eta })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.roots.len()
    }

    pub fn roots(&self) -> &[C64] {
        &self.roots
    }

    pub fn contains_eta(&self) -> bool {
        self.contains_eta
    }

    /// The roots together with `η`, on a chain one site shorter.
    pub fn augmented_with_eta(&self) -> Result<BetheRootSet> {
        if self.n < 2 {
            return Err(Error::ChainLength { n: self.n, min: 2, what: "augmented root set" });
        }
        let mut r = self.roots.clone();
        r.push(ETA);
        BetheRootSet::allowing_eta(self.n - 1, r)
    }

    /// Image under `λ ↦ −λ − η`, which maps solutions to solutions.
    pub fn reflected(&self) -> Result<BetheRootSet> {
        BetheRootSet::allowing_eta(self.n, self.roots.iter().map(|&l| -l - ETA).collect())
    }

    /// Largest periodic distance between corresponding roots.
    pub fn distance(&self, other: &BetheRootSet) -> f64 {
        if self.n != other.n || self.m() != other.m() {
            return f64::INFINITY;
        }
        self.roots.iter().zip(&other.roots).map(|(&x, &y)| periodic_dist(x, y)).fold(0.0, f64::max)
    }
}

/// Roots other than `η` at which `sinh(2λ+η)` vanishes. The ansatz divides by
/// this factor, and there a solution of the equations need not give an
/// eigenvector (for example `λ = iπ/6` at `n = 2`). Such sets are not admissible.
///
/// The exchange relations of two creation operators have poles where
/// `sinh(λⱼ−λₖ)` or `sinh(λⱼ+λₖ+η)` vanish, that is where two roots agree
/// modulo `iπ` or one is the reflection `−λ−η` of the other. Such pairs are
/// not admissible either.
pub fn ansatz_singular(rs: &BetheRootSet) -> Option<String> {
    if let Some(l) = rs.roots.iter().find(|&&l| !is_eta(l) && (2.0 * l + ETA).sinh().norm() < ROOT_TOL) {
        return Some(format!("sinh(2λ+η) vanishes at λ = {l}"));
    }
    for j in 0..rs.m() {
        for k in 0..j {
            let (x, y) = (rs.roots[j], rs.roots[k]);
            if (x - y).sinh().norm() < ROOT_TOL {
                return Some(format!("sinh(λj−λk) vanishes for λj = {x}, λk = {y}"));
            }
            if (x + y + ETA).sinh().norm() < ROOT_TOL {
                return Some(format!("sinh(λj+λk+η) vanishes for λj = {x}, λk = {y}"));
            }
        }
    }
    None
}

/// The Bethe state is zero relative to `∏ ‖ℬ(λⱼ)‖`.
pub fn vanishing_state(n: usize, rs: &BetheRootSet) -> Result<Option<String>> {
    let v = bethe_state(n, rs)?;
    let mut scale = 1.0;
    for &l in &rs.roots {
        scale *= monodromy_recursive(n, l)?.b.max_abs();
    }
    let rel = v.norm() / f64::max(scale, f64::MIN_POSITIVE);
    Ok((rel < VANISHING_TOL).then(|| format!("Bethe state vanishes (relative norm {rel:.1e})")))
}

/// Invariant violations, ansatz singularities and spurious zeros, in that order.
pub fn admissibility(rs: &BetheRootSet) -> Option<String> {
    ansatz_singular(rs).or_else(|| spurious(rs))
}

/// The two sides of the reduced equation for root `j`.
fn reduced_terms(n: usize, roots: &[C64], j: usize) -> (C64, C64) {
    let l = roots[j];
    let w = Weights::new(l);
    let mut lhs = w.a.powu(2 * n as u32);
    let mut rhs = w.b.powu(2 * n as u32);
    for (k, &lk) in roots.iter().enumerate() {
        if k != j {
            lhs *= (l - lk - ETA).sinh() * (l + lk).sinh();
            rhs *= (l - lk + ETA).sinh() * (l + lk + 2.0 * ETA).sinh();
        }
    }
    (lhs, rhs)
}

fn normalised(lhs: C64, rhs: C64) -> f64 {
    let scale = lhs.norm().max(rhs.norm());
    if scale == 0.0 {
        0.0
    } else {
        (lhs - rhs).norm() / scale
    }
}

/// Normalised residual of each Bethe equation.
pub fn bethe_residual(rs: &BetheRootSet) -> Vec<f64> {
    (0..rs.m())
        .map(|j| {
            let (l, r) = reduced_terms(rs.n, &rs.roots, j);
            normalised(l, r)
        })
        .collect()
}

pub fn max_bethe_residual(rs: &BetheRootSet) -> f64 {
    bethe_residual(rs).into_iter().fold(0.0, f64::max)
}

/// Residuals of the cleared-denominator form
/// `−sinh(2λ)Δ₊(λ)∏ sinh(λ−λₖ−η)sinh(λ+λₖ) − Δ₋(λ)∏ sinh(λ−λₖ+η)sinh(λ+λₖ+2η)`,
/// normalised by the larger term.
pub fn cleared_residual(rs: &BetheRootSet) -> Vec<f64> {
    let n = rs.n;
    (0..rs.m())
        .map(|j| {
            let l = rs.roots[j];
            let mut t1 = -(2.0 * l).sinh() * delta_plus(n, l);
            let mut t2 = delta_minus(n, l);
            for (k, &lk) in rs.roots.iter().enumerate() {
                if k != j {
                    t1 *= (l - lk - ETA).sinh() * (l + lk).sinh();
                    t2 *= (l - lk + ETA).sinh() * (l + lk + 2.0 * ETA).sinh();
                }
            }
            normalised(t1, t2)
        })
        .collect()
}

/// All `m = 1` solutions modulo `2πi`: `tanh λ = sinh η / (ω − cosh η)` over
/// the `2n`-th roots of unity `ω`, both branches of `tanh` (`λ` and `λ + iπ`).
/// `ω = −1` gives `λ ∈ {η, η − iπ}` and `ω = 1` gives `λ ∈ {iπ/6, −5iπ/6}`;
/// all four sit where `sinh(2λ+η) = 0` and are dropped.
pub fn m1_roots_closed_form(n: usize) -> Vec<BetheRootSet> {
    if n < 1 {
        return Vec::new();
    }
    let mut out: Vec<BetheRootSet> = Vec::new();
    for k in 0..2 * n {
        let omega = C64::from_polar(1.0, PI * k as f64 / n as f64);
        let t = sinh_eta() / (omega - ETA.cosh());
        if (t - 1.0).norm() < ROOT_TOL || (t + 1.0).norm() < ROOT_TOL {
            continue;
        }
        let l0 = t.atanh();
        for l in [l0, l0 + C64::new(0.0, PI)] {
            if let Ok(rs) = BetheRootSet::new(n, vec![l]) {
                if admissibility(&rs).is_none() && !out.iter().any(|o| o.distance(&rs) < ROOT_TOL) {
                    out.push(rs);
                }
            }
        }
    }
    out.sort_by(cmp_sets);
    out
}

fn cmp_sets(a: &BetheRootSet, b: &BetheRootSet) -> std::cmp::Ordering {
    for (x, y) in a.roots.iter().zip(&b.roots) {
        let o = x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im));
        if o.is_ne() {
            return o;
        }
    }
    a.m().cmp(&b.m())
}

/// Forward-mode dual number carrying the gradient with respect to all roots.
#[derive(Clone, Debug)]
struct Dual {
    v: C64,
    g: Vec<C64>,
}

impl Dual {
    fn var(v: C64, i: usize, m: usize) -> Self {
        let mut g = vec![re(0.0); m];
        g[i] = re(1.0);
        Dual { v, g }
    }

    fn constant(v: C64, m: usize) -> Self {
        Dual { v, g: vec![re(0.0); m] }
    }

    fn lin(&self, other: &Dual, s: f64) -> Dual {
        Dual { v: self.v + other.v * s, g: self.g.iter().zip(&other.g).map(|(x, y)| x + y * s).collect() }
    }

    fn shift(&self, c: C64) -> Dual {
        Dual { v: self.v + c, g: self.g.clone() }
    }

    fn scale(&self, c: C64) -> Dual {
        Dual { v: self.v * c, g: self.g.iter().map(|x| x * c).collect() }
    }

    fn mul(&self, other: &Dual) -> Dual {
        Dual {
            v: self.v * other.v,
            g: self.g.iter().zip(&other.g).map(|(x, y)| x * other.v + y * self.v).collect(),
        }
    }

    fn sinh(&self) -> Dual {
        let c = self.v.cosh();
        Dual { v: self.v.sinh(), g: self.g.iter().map(|x| x * c).collect() }
    }

    fn powu(&self, k: u32) -> Dual {
        if k == 0 {
            return Dual::constant(re(1.0), self.g.len());
        }
        let d = self.v.powu(k - 1) * k as f64;
        Dual { v: self.v.powu(k), g: self.g.iter().map(|x| x * d).collect() }
    }
}

/// Reduced residual vector `F` with its Jacobian, plus per-equation scales.
fn newton_system(n: usize, roots: &[C64]) -> (DVector<C64>, DMatrix<C64>, Vec<f64>) {
    let m = roots.len();
    let vars: Vec<Dual> = roots.iter().enumerate().map(|(i, &l)| Dual::var(l, i, m)).collect();
    let s = sinh_eta();
    let mut f = DVector::zeros(m);
    let mut jac = DMatrix::zeros(m, m);
    let mut scales = vec![0.0; m];
    for j in 0..m {
        let l = &vars[j];
        let mut lhs = l.shift(ETA).sinh().scale(1.0 / s).powu(2 * n as u32);
        let mut rhs = l.sinh().scale(1.0 / s).powu(2 * n as u32);
        for (k, lk) in vars.iter().enumerate() {
            if k != j {
                let diff = l.lin(lk, -1.0);
                let sum = l.lin(lk, 1.0);
                lhs = lhs.mul(&diff.shift(-ETA).sinh()).mul(&sum.sinh());
                rhs = rhs.mul(&diff.shift(ETA).sinh()).mul(&sum.shift(2.0 * ETA).sinh());
            }
        }
        let fj = lhs.lin(&rhs, -1.0);
        f[j] = fj.v;
        for (k, g) in fj.g.iter().enumerate() {
            jac[(j, k)] = *g;
        }
        scales[j] = lhs.v.norm().max(rhs.v.norm());
    }
    (f, jac, scales)
}

fn normalised_norm(f: &DVector<C64>, scales: &[f64]) -> f64 {
    f.iter().zip(scales).map(|(x, &s)| if s > 0.0 { x.norm() / s } else { 0.0 }).fold(0.0, f64::max)
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
pub struct SolverConfig {
    pub starts: usize,
    pub seed: u64,
    pub max_iter: usize,
    pub tol: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { starts: 200, seed: 42, max_iter: 100, tol: SOLVER_TOL }
    }
}

/// Newton iteration from one start; `None` if it does not converge.
pub fn newton(n: usize, start: &[C64], max_iter: usize, tol: f64) -> Option<Vec<C64>> {
    let mut x = start.to_vec();
    for _ in 0..max_iter {
        let (f, jac, scales) = newton_system(n, &x);
        if normalised_norm(&f, &scales) < tol {
            return Some(x);
        }
        let step = jac.lu().solve(&f)?;
        let len = step.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if !len.is_finite() {
            return None;
        }
        let damp = if len > 0.5 { 0.5 / len } else { 1.0 };
        for (xi, si) in x.iter_mut().zip(step.iter()) {
            *xi = fold(*xi - si * damp);
        }
        if x.iter().any(|z| z.re.abs() > 10.0) {
            return None;
        }
    }
    let (f, _, scales) = newton_system(n, &x);
    (normalised_norm(&f, &scales) < tol).then_some(x)
}

/// Why a converged Newton point was not reported as a solution.
#[derive(Clone, Debug, Serialize)]
pub struct Exclusion {
    pub roots: Vec<[f64; 2]>,
    pub reason: String,
}

#[derive(Clone, Debug)]
pub struct SolveOutcome {
    pub solutions: Vec<BetheRootSet>,
    pub converged: usize,
    pub excluded: Vec<Exclusion>,
}

fn warm_starts(n: usize, m: usize) -> Vec<Vec<C64>> {
    let singles: Vec<C64> = m1_roots_closed_form(n).iter().map(|r| r.roots[0]).collect();
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..m).collect();
    if m > singles.len() {
        return out;
    }
    loop {
        out.push(idx.iter().map(|&i| singles[i]).collect());
        if out.len() >= 256 {
            break;
        }
        // next m-combination in lexicographic order
        let mut i = m;
        while i > 0 && idx[i - 1] == singles.len() - m + i - 1 {
            i -= 1;
        }
        if i == 0 {
            break;
        }
        idx[i - 1] += 1;
        for k in i..m {
            idx[k] = idx[k - 1] + 1;
        }
    }
    out
}

/// Multistart Newton solve of the Bethe equations for `m` roots on `n` sites.
pub fn solve_bethe(n: usize, m: usize, cfg: &SolverConfig) -> Result<SolveOutcome> {
    if n < 1 || m < 1 || m > n {
        return Err(Error::InvalidArgument(format!("need 1 <= m <= n, got n={n}, m={m}")));
    }
    if cfg.starts < 1 {
        return Err(Error::InvalidArgument("starts must be >= 1".into()));
    }
    let mut starts = warm_starts(n, m);
    starts.extend((0..cfg.starts).map(|k| {
        let mut s = SpectralSampler::for_stream(cfg.seed, k as u64);
        (0..m).map(|_| s.uniform_box((-1.5, 1.5), (-PI, PI))).collect()
    }));
    let found: Vec<Option<Vec<C64>>> =
        starts.par_iter().map(|s| newton(n, s, cfg.max_iter, cfg.tol)).collect();

    let mut solutions: Vec<BetheRootSet> = Vec::new();
    let mut excluded: Vec<Exclusion> = Vec::new();
    let mut converged = 0;
    for roots in found.into_iter().flatten() {
        converged += 1;
        let verdict = match BetheRootSet::new(n, roots.clone()) {
            Err(e) => Err(e.to_string()),
            Ok(rs) => {
                if solutions.iter().any(|o| o.distance(&rs) < ROOT_TOL) {
                    continue;
                }
                match admissibility(&rs).map_or_else(|| vanishing_state(n, &rs), |r| Ok(Some(r)))? {
                    Some(reason) => Err(reason),
                    None => Ok(rs),
                }
            }
        };
        match verdict {
            Ok(rs) => solutions.push(rs),
            Err(reason) => {
                let c = canonical(roots);
                let seen = excluded.iter().any(|o| {
                    o.roots.len() == c.len()
                        && o.roots.iter().zip(&c).all(|(p, &z)| periodic_dist(C64::new(p[0], p[1]), z) < ROOT_TOL)
                });
                if !seen {
                    excluded.push(Exclusion { roots: c.iter().map(|z| [z.re, z.im]).collect(), reason });
                }
            }
        }
    }
    solutions.sort_by(cmp_sets);
    Ok(SolveOutcome { solutions, converged, excluded })
}

/// Both sides of some reduced equation vanish.
fn spurious(rs: &BetheRootSet) -> Option<String> {
    for j in 0..rs.m() {
        let (l, r) = reduced_terms(rs.n, &rs.roots, j);
        let w = Weights::new(rs.roots[j]);
        let scale = w.a.norm().max(w.b.norm()).powi(2 * rs.n as i32);
        if l.norm().max(r.norm()) < ROOT_TOL * scale {
            return Some(format!("both sides of equation {j} vanish"));
        }
    }
    None
}

/// `ℬ(λ₁)⋯ℬ(λₘ)Ω` on `n` sites; vanishes identically when `m > n`.
pub fn bethe_state(n: usize, rs: &BetheRootSet) -> Result<StateVec> {
    let mut v = StateVec::all_up(n);
    for &l in rs.roots.iter().rev() {
        v = monodromy_recursive(n, l)?.b.apply(&v)?;
    }
    Ok(v)
}

/// Transfer-matrix eigenvalue for the Bethe state of `rs` on `n` sites.
pub fn tau_eigenvalue(n: usize, u: C64, rs: &BetheRootSet) -> Result<C64> {
    let pole = (2.0 * u + ETA).sinh();
    if pole.norm() < ROOT_TOL {
        return Err(Error::Singular(format!("sinh(2u+η) vanishes at u = {u}")));
    }
    let mut p1 = re(1.0);
    let mut p2 = re(1.0);
    for &l in &rs.roots {
        let den = (u - l).sinh() * (u + l + ETA).sinh();
        if (u - l).sinh().norm() < ROOT_TOL {
            return Err(Error::Singular(format!("sinh(u−λ) vanishes at u = {u}, λ = {l}")));
        }
        if (u + l + ETA).sinh().norm() < ROOT_TOL {
            return Err(Error::Singular(format!("sinh(u+λ+η) vanishes at u = {u}, λ = {l}")));
        }
        p1 *= (u - l - ETA).sinh() * (u + l).sinh() / den;
        p2 *= (u - l + ETA).sinh() * (u + l - ETA).sinh() / den;
    }
    let sme = (u - ETA).sinh();
    let t1 = (2.0 * u - ETA).sinh() * sme * delta_plus(n, u) * p1;
    let t2 = sme * delta_minus(n, u) * p2;
    Ok((t1 - t2) / (sinh_eta() * pole))
}

/// Energy implied by the transfer eigenvalue via its derivative at `u = 0`.
pub fn tau_energy(n: usize, rs: &BetheRootSet) -> Result<C64> {
    for x in [DERIVATIVE_STEP, -DERIVATIVE_STEP, DERIVATIVE_STEP / 2.0, -DERIVATIVE_STEP / 2.0] {
        tau_eigenvalue(n, re(x), rs)?;
    }
    let d = richardson_derivative(|x| tau_eigenvalue(n, re(x), rs).unwrap(), DERIVATIVE_STEP);
    Ok(energy_from_derivative(n, d))
}

/// `‖t(u)v − τ(u)v‖ / ‖v‖` for the Bethe state `v`.
pub fn eigen_residual(n: usize, u: C64, rs: &BetheRootSet, v: &StateVec) -> Result<f64> {
    let tau = tau_eigenvalue(n, u, rs)?;
    let tv = monodromy_recursive(n, u)?.transfer().apply(v)?;
    Ok(tv.sub(&v.scale(tau))?.norm() / v.norm())
}

/// Draws `u` avoiding the poles of `τ` for every set in `sets`.
fn sample_regular(sampler: &mut SpectralSampler, sets: &[(usize, &BetheRootSet)]) -> C64 {
    loop {
        let u = sampler.sample();
        let ok = sets.iter().all(|(n, rs)| {
            tau_eigenvalue(*n, u, rs).is_ok()
                && rs.roots.iter().all(|&l| (u - l).sinh().norm() > 1e-3 && (u + l + ETA).sinh().norm() > 1e-3)
        });
        if ok {
            return u;
        }
    }
}

/// Eigenvector and energy checks for an on-shell set. The reported residual
/// is the larger of the two residuals, each divided by its tolerance.
pub fn onshell_check(n: usize, rs: &BetheRootSet, n_samples: usize, seed: u64) -> Result<CheckReport> {
    if let Some(reason) = ansatz_singular(rs) {
        return Err(Error::Singular(reason));
    }
    let bres = max_bethe_residual(rs);
    if bres > ONSHELL_TOL {
        return Err(Error::InvalidArgument(format!("root set is not on-shell (residual {bres:.3e})")));
    }
    let v = bethe_state(n, rs)?;
    let base = CheckReport::new("bethe.onshell", 0.0, 1.0)
        .param("n", n)
        .param("m", rs.m())
        .param("seed", seed)
        .roots_param("roots", &rs.roots);
    if let Some(reason) = vanishing_state(n, rs)? {
        return Ok(base.fail(&reason));
    }
    let mut sampler = SpectralSampler::for_stream(seed, 0x6f6e);
    let mut eig: f64 = 0.0;
    for _ in 0..n_samples {
        let u = sample_regular(&mut sampler, &[(n, rs)]);
        eig = eig.max(eigen_residual(n, u, rs, &v)?);
    }
    let e = tau_energy(n, rs)?;
    let hv = hamiltonian(n)?.apply(&v)?;
    let hres = hv.sub(&v.scale(e))?.norm() / v.norm();
    let residual = (eig / EIGEN_TOL).max(hres / ENERGY_TOL);
    let mut rep = CheckReport::new("bethe.onshell", residual, 1.0);
    rep.params = base.params;
    Ok(rep
        .param("eigen_residual", eig)
        .param("eigen_tol", EIGEN_TOL)
        .param("energy_residual", hres)
        .param("energy_tol", ENERGY_TOL)
        .complex_param("energy", e)
        .param("samples", n_samples))
}

/// `Q⁽ⁿ⁾Ω⁽ⁿ⁾ = (−1)ⁿ ℬ⁽ⁿ⁻¹⁾(η)Ω⁽ⁿ⁻¹⁾`, entrywise.
pub fn q_omega_identity(n: usize) -> Result<CheckReport> {
    if n < 2 {
        return Err(Error::ChainLength { n, min: 2, what: "Q Omega identity" });
    }
    let lhs = supercharge(n)?.apply(&StateVec::all_up(n))?;
    let sign = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
    let rhs = monodromy_recursive(n - 1, ETA)?.b.apply(&StateVec::all_up(n - 1))?.scale(re(sign));
    Ok(CheckReport::new("bethe.q_omega", lhs.max_abs_diff(&rhs)?, KERNEL_TOL).param("n", n))
}

fn roots_report(name: &str, residual: f64, tol: f64, n: usize, rs: &BetheRootSet) -> CheckReport {
    CheckReport::new(name, residual, tol).param("n", n).param("m", rs.m()).roots_param("roots", &rs.roots)
}

/// Checks relating the Bethe state of `rs` on `n` sites to that of
/// `rs ∪ {η}` on `n − 1` sites. With a root at `η` only the kernel check
/// runs; the on-shell checks run only when `rs` solves the equations.
pub fn susy_pairing_check(n: usize, rs: &BetheRootSet, u_samples: usize, seed: u64) -> Result<Vec<CheckReport>> {
    if n < 2 {
        return Err(Error::ChainLength { n, min: 2, what: "pairing check" });
    }
    if rs.n != n {
        return Err(Error::InvalidArgument(format!("root set is for n={}, not n={n}", rs.n)));
    }
    let q = supercharge(n)?;
    let v = bethe_state(n, rs)?;
    let qv = q.apply(&v)?;
    let scale = v.norm().max(f64::MIN_POSITIVE);
    if rs.contains_eta {
        return Ok(vec![roots_report("pairing.kernel", qv.norm() / scale, KERNEL_TOL, n, rs)]);
    }

    let aug = rs.augmented_with_eta()?;
    let partner = bethe_state(n - 1, &aug)?;
    let sign = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
    let coeff: C64 = rs.roots.iter().map(|&l| Weights::new(l).d.powu(2)).product::<C64>() * sign;
    let rhs = partner.scale(coeff);
    let denom = qv.norm().max(rhs.norm()).max(scale);
    let key = qv.sub(&rhs)?.norm() / denom;
    let sector_leak = qv.weight_outside_sector(rs.m() + 1) / scale;
    let mut out = vec![roots_report("pairing.key_relation", key.max(sector_leak), KEY_RELATION_TOL, n, rs)
        .param("sector_leak", sector_leak)];

    if max_bethe_residual(rs) > ONSHELL_TOL || ansatz_singular(rs).is_some() {
        return Ok(out);
    }
    let aug_res = max_bethe_residual(&aug);
    out.push(roots_report("pairing.augmented_bethe", aug_res, AUGMENTED_TOL, n, rs));

    let mut sampler = SpectralSampler::for_stream(seed, 0x7061);
    let mut tau_res: f64 = 0.0;
    for _ in 0..u_samples {
        let u = sample_regular(&mut sampler, &[(n, rs), (n - 1, &aug)]);
        let big = tau_eigenvalue(n, u, rs)?;
        let small = tau_eigenvalue(n - 1, u, &aug)? * Weights::new(u).d.powu(2);
        tau_res = tau_res.max((big - small).norm() / big.norm().max(small.norm()).max(f64::MIN_POSITIVE));
    }
    out.push(roots_report("pairing.tau_relation", tau_res, KEY_RELATION_TOL, n, rs).param("seed", seed));

    let e_big = tau_energy(n, rs)?;
    let e_small = tau_energy(n - 1, &aug)?;
    out.push(
        roots_report("pairing.energy", (e_big - e_small).norm(), ENERGY_TOL, n, rs)
            .complex_param("energy_n", e_big)
            .complex_param("energy_n_minus_1", e_small),
    );
    Ok(out)
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RootRecord {
    n: usize,
    m: usize,
    roots: Vec<[f64; 2]>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RootFile {
    One(RootRecord),
    Many(Vec<RootRecord>),
}

/// Parses a root file: one `{"n", "m", "roots"}` object or an array of them.
pub fn parse_root_sets(text: &str) -> Result<Vec<BetheRootSet>> {
    // untagged enums hide the position of syntax errors, so check syntax first
    let value: serde_json::Value = serde_json::from_str(text)
        .map_err(|e| Error::InvalidArgument(format!("root file: line {}, column {}: {e}", e.line(), e.column())))?;
    let records = match serde_json::from_value::<RootFile>(value.clone()) {
        Ok(RootFile::One(r)) => vec![r],
        Ok(RootFile::Many(v)) => v,
        Err(_) => {
            let items = match &value {
                serde_json::Value::Array(a) => a.clone(),
                other => vec![other.clone()],
            };
            for (i, item) in items.into_iter().enumerate() {
                if let Err(e) = serde_json::from_value::<RootRecord>(item) {
                    return Err(Error::InvalidArgument(format!("root file: record {i}: {e}")));
                }
            }
            return Err(Error::InvalidArgument("root file: expected an object or an array of objects".into()));
        }
    };
    records
        .into_iter()
        .enumerate()
        .map(|(i, r)| {
            if r.roots.len() != r.m {
                return Err(Error::InvalidArgument(format!(
                    "root file: record {i}: field \"m\" is {} but \"roots\" has {} entries",
                    r.m,
                    r.roots.len()
                )));
            }
            let roots = r.roots.iter().map(|p| C64::new(p[0], p[1])).collect();
            BetheRootSet::allowing_eta(r.n, roots)
                .map_err(|e| Error::InvalidArgument(format!("root file: record {i}: {e}")))
        })
        .collect()
}

/// Serialises root sets as a JSON array of `{"n", "m", "roots"}` objects.
pub fn root_sets_to_json(sets: &[BetheRootSet]) -> String {
    let recs: Vec<RootRecord> = sets
        .iter()
        .map(|s| RootRecord { n: s.n, m: s.m(), roots: s.roots.iter().map(|z| [z.re, z.im]).collect() })
        .collect();
    serde_json::to_string_pretty(&recs).expect("plain data")
}

/// Off-shell Bethe state norm, useful to reject vanishing states in sweeps.
pub fn state_norm(n: usize, rs: &BetheRootSet) -> Result<f64> {
    Ok(bethe_state(n, rs)?.norm())
}
