//! Excitation-number-restricted Fock basis: all occupations of `m` modes
//! with exactly `n` photons.

use std::collections::HashMap;

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct EnrBasis {
    photon_number: usize,
    mode_count: usize,
    /// Row-major `dim x mode_count` occupation table.
    occupations: Vec<u8>,
    index: HashMap<Box<[u8]>, u32>,
}

impl EnrBasis {
    /// Enumerates occupations in lexicographically descending order,
    /// `(n, 0, ..)` first and `(.., 0, n)` last.
    pub fn new(photon_number: usize, mode_count: usize) -> Result<Self> {
        if photon_number < 2 {
            return Err(Error::PhotonNumber(photon_number));
        }
        if mode_count < 2 {
            return Err(Error::ModeCount(mode_count));
        }
        if photon_number > u8::MAX as usize {
            return Err(Error::InvalidParameter(format!(
                "photon number {photon_number} exceeds the packed occupation range"
            )));
        }
        let dim = binomial(photon_number + mode_count - 1, mode_count - 1);
        if dim > u32::MAX as usize {
            return Err(Error::InvalidParameter(format!(
                "basis dimension {dim} too large"
            )));
        }
        let mut occupations = Vec::with_capacity(dim * mode_count);
        let mut current = vec![0u8; mode_count];
        fill(&mut current, 0, photon_number, &mut occupations);
        debug_assert_eq!(occupations.len(), dim * mode_count);

        let mut index = HashMap::with_capacity(dim);
        for (i, occ) in occupations.chunks_exact(mode_count).enumerate() {
            index.insert(occ.to_vec().into_boxed_slice(), i as u32);
        }
        Ok(Self {
            photon_number,
            mode_count,
            occupations,
            index,
        })
    }

    pub fn photon_number(&self) -> usize {
        self.photon_number
    }

    pub fn mode_count(&self) -> usize {
        self.mode_count
    }

    pub fn dim(&self) -> usize {
        self.occupations.len() / self.mode_count
    }

    pub fn state(&self, i: usize) -> &[u8] {
        &self.occupations[i * self.mode_count..(i + 1) * self.mode_count]
    }

    pub fn states(&self) -> impl Iterator<Item = &[u8]> {
        self.occupations.chunks_exact(self.mode_count)
    }

    pub fn index_of(&self, occupation: &[u8]) -> Option<usize> {
        self.index.get(occupation).map(|&i| i as usize)
    }

    fn check_modes(&self, modes: &[usize]) -> Result<()> {
        for &index in modes {
            if index >= self.mode_count {
                return Err(Error::ModeIndex {
                    index,
                    mode_count: self.mode_count,
                });
            }
        }
        Ok(())
    }

    /// Applies `a+_j a+_k a_l a_q` to basis state `state_index`.
    ///
    /// Returns `None` when an annihilated mode runs out of photons; otherwise
    /// the single target state and its bosonic amplitude.
    pub fn apply_quartic_term(
        &self,
        creators: (usize, usize),
        annihilators: (usize, usize),
        state_index: usize,
    ) -> Result<Option<(usize, f64)>> {
        self.check_modes(&[creators.0, creators.1, annihilators.0, annihilators.1])?;
        let mut scratch = self.state(state_index).to_vec();
        Ok(self.apply_quartic_in_place(creators, annihilators, &mut scratch))
    }

    /// Unchecked variant for assembly loops; `scratch` must hold the source
    /// occupation and is left in an unspecified state.
    pub(crate) fn apply_quartic_in_place(
        &self,
        (j, k): (usize, usize),
        (l, q): (usize, usize),
        scratch: &mut [u8],
    ) -> Option<(usize, f64)> {
        let mut amp = 1.0;
        for mode in [q, l] {
            let occ = scratch[mode];
            if occ == 0 {
                return None;
            }
            amp *= (occ as f64).sqrt();
            scratch[mode] = occ - 1;
        }
        for mode in [k, j] {
            let occ = scratch[mode];
            amp *= (occ as f64 + 1.0).sqrt();
            scratch[mode] = occ + 1;
        }
        self.index_of(scratch).map(|target| (target, amp))
    }

    /// Applies `a+_j a_k` to basis state `state_index`.
    pub fn apply_quadratic_term(
        &self,
        creator: usize,
        annihilator: usize,
        state_index: usize,
    ) -> Result<Option<(usize, f64)>> {
        self.check_modes(&[creator, annihilator])?;
        let mut scratch = self.state(state_index).to_vec();
        let occ = scratch[annihilator];
        if occ == 0 {
            return Ok(None);
        }
        let mut amp = (occ as f64).sqrt();
        scratch[annihilator] -= 1;
        amp *= (scratch[creator] as f64 + 1.0).sqrt();
        scratch[creator] += 1;
        Ok(self.index_of(&scratch).map(|t| (t, amp)))
    }
}

impl PartialEq for EnrBasis {
    fn eq(&self, other: &Self) -> bool {
        self.photon_number == other.photon_number && self.mode_count == other.mode_count
    }
}

pub fn enumerate_enr(photon_number: usize, mode_count: usize) -> Result<EnrBasis> {
    EnrBasis::new(photon_number, mode_count)
}

fn fill(current: &mut [u8], pos: usize, remaining: usize, out: &mut Vec<u8>) {
    if pos == current.len() - 1 {
        current[pos] = remaining as u8;
        out.extend_from_slice(current);
        return;
    }
    for take in (0..=remaining).rev() {
        current[pos] = take as u8;
        fill(current, pos + 1, remaining - take, out);
    }
    current[pos] = 0;
}

/// Binomial coefficient `C(n, k)`; saturates at `usize::MAX`.
pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > usize::MAX as u128 {
            return usize::MAX;
        }
    }
    acc as usize
}
