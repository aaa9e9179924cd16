use nalgebra::DVector;

use super::{Spin, C64};
use crate::error::{Error, Result};

/// A basis configuration of `n_sites` spins, bit `i-1` encoding site `i`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SpinConfig {
    n_sites: usize,
    bits: usize,
}

impl SpinConfig {
    pub fn new(n_sites: usize, bits: usize) -> Result<Self> {
        if n_sites >= usize::BITS as usize || bits >> n_sites != 0 {
            return Err(Error::InvalidArgument(format!(
                "bits {bits:#b} do not fit {n_sites} sites"
            )));
        }
        Ok(SpinConfig { n_sites, bits })
    }

    pub fn from_spins(spins_low_to_high: &[Spin]) -> Self {
        let bits = spins_low_to_high
            .iter()
            .enumerate()
            .map(|(i, s)| s.index() << i)
            .sum();
        SpinConfig { n_sites: spins_low_to_high.len(), bits }
    }

    pub fn all_up(n_sites: usize) -> Self {
        SpinConfig { n_sites, bits: 0 }
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn bits(&self) -> usize {
        self.bits
    }

    /// Spin at site `i` (1-based).
    pub fn site(&self, i: usize) -> Result<Spin> {
        if i == 0 || i > self.n_sites {
            return Err(Error::SiteRange { index: i, max: self.n_sites });
        }
        Ok(Spin::from_bit(self.bits >> (i - 1)))
    }

    pub fn down_count(&self) -> usize {
        self.bits.count_ones() as usize
    }

    /// Eigenvalue of Σσᶻ.
    pub fn total_sz(&self) -> i64 {
        self.n_sites as i64 - 2 * self.down_count() as i64
    }
}

/// A vector in `V^{⊗n_sites}`.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVec {
    n_sites: usize,
    amps: DVector<C64>,
}

impl StateVec {
    pub fn zeros(n_sites: usize) -> Self {
        StateVec { n_sites, amps: DVector::zeros(1 << n_sites) }
    }

    pub fn basis(n_sites: usize, bits: usize) -> Result<Self> {
        let cfg = SpinConfig::new(n_sites, bits)?;
        let mut v = StateVec::zeros(n_sites);
        v.amps[cfg.bits()] = C64::new(1.0, 0.0);
        Ok(v)
    }

    /// The pseudovacuum: every spin up.
    pub fn all_up(n_sites: usize) -> Self {
        StateVec::basis(n_sites, 0).expect("all-up state fits")
    }

    pub fn from_amplitudes(n_sites: usize, amps: DVector<C64>) -> Result<Self> {
        if amps.len() != 1 << n_sites {
            return Err(Error::Shape(format!(
                "{} amplitudes for {n_sites} sites",
                amps.len()
            )));
        }
        Ok(StateVec { n_sites, amps })
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amps
    }

    pub fn into_amplitudes(self) -> DVector<C64> {
        self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.norm()
    }

    pub fn max_abs(&self) -> f64 {
        self.amps.iter().map(|a| a.norm()).fold(0.0, f64::max)
    }

    pub fn normalized(&self) -> Self {
        let n = self.norm();
        StateVec { n_sites: self.n_sites, amps: &self.amps / C64::new(n, 0.0) }
    }

    pub fn scale(&self, k: C64) -> Self {
        StateVec { n_sites: self.n_sites, amps: &self.amps * k }
    }

    /// `⟨self, other⟩`, antilinear in `self`.
    pub fn inner(&self, other: &StateVec) -> Result<C64> {
        self.check_same(other)?;
        Ok(self.amps.dotc(&other.amps))
    }

    pub fn sub(&self, other: &StateVec) -> Result<StateVec> {
        self.check_same(other)?;
        Ok(StateVec { n_sites: self.n_sites, amps: &self.amps - &other.amps })
    }

    pub fn max_abs_diff(&self, other: &StateVec) -> Result<f64> {
        Ok(self.sub(other)?.max_abs())
    }

    /// Largest amplitude on configurations whose number of down spins is not `k`.
    pub fn weight_outside_sector(&self, k: usize) -> f64 {
        self.amps
            .iter()
            .enumerate()
            .filter(|(i, _)| i.count_ones() as usize != k)
            .map(|(_, a)| a.norm())
            .fold(0.0, f64::max)
    }

    /// Number of down spins carrying amplitude above `tol`, if that number is unique.
    pub fn sector(&self, tol: f64) -> Option<usize> {
        let mut found: Option<usize> = None;
        for (i, a) in self.amps.iter().enumerate() {
            if a.norm() > tol {
                let k = i.count_ones() as usize;
                match found {
                    None => found = Some(k),
                    Some(prev) if prev != k => return None,
                    _ => {}
                }
            }
        }
        found
    }

    fn check_same(&self, other: &StateVec) -> Result<()> {
        if self.n_sites != other.n_sites {
            return Err(Error::Shape(format!(
                "{}-site vs {}-site state",
                self.n_sites, other.n_sites
            )));
        }
        Ok(())
    }
}
