use std::collections::HashMap;

use crate::linalg::{CMatrix, C64};

/// Occupation-number basis truncated at `cutoff` excitations.
///
/// States are ordered by excitation number, then by bitmask, so index 0 is
/// the vacuum and indices `1..=N` are the single-excitation states with the
/// excitation on sites `1..=N`. With `cutoff = 1` this is exactly the
/// single-excitation sector.
#[derive(Debug, Clone)]
pub struct Basis {
    n_sites: usize,
    cutoff: usize,
    states: Vec<u64>,
    index: HashMap<u64, usize>,
}

/// Sparse operator as a list of `(row, col, value)` triplets.
#[derive(Debug, Clone, Default)]
pub struct SparseOp {
    pub entries: Vec<(usize, usize, C64)>,
}

impl SparseOp {
    pub fn scaled(mut self, s: f64) -> Self {
        for e in &mut self.entries {
            e.2 *= s;
        }
        self
    }

    pub fn to_dense(&self, dim: usize) -> CMatrix {
        let mut m = CMatrix::zeros(dim, dim);
        for &(r, c, v) in &self.entries {
            m[(r, c)] += v;
        }
        m
    }

    pub fn adjoint(&self) -> Self {
        Self {
            entries: self
                .entries
                .iter()
                .map(|&(r, c, v)| (c, r, v.conj()))
                .collect(),
        }
    }
}

impl Basis {
    pub fn sector(n_sites: usize) -> Self {
        Self::truncated(n_sites, 1)
    }

    pub fn truncated(n_sites: usize, cutoff: usize) -> Self {
        assert!(n_sites <= 63, "at most 63 sites fit the bitmask encoding");
        let cutoff = cutoff.min(n_sites);
        let mut states: Vec<u64> = Vec::new();
        if n_sites <= 20 {
            states = (0u64..(1u64 << n_sites))
                .filter(|s| s.count_ones() as usize <= cutoff)
                .collect();
        } else {
            // only small cutoffs make sense for long chains
            states.push(0);
            let mut frontier = vec![0u64];
            for _ in 0..cutoff {
                let mut next = Vec::new();
                for s in &frontier {
                    let top = if *s == 0 {
                        0
                    } else {
                        64 - s.leading_zeros() as usize
                    };
                    for b in top..n_sites {
                        next.push(s | (1 << b));
                    }
                }
                states.extend(next.iter().copied());
                frontier = next;
            }
        }
        states.sort_by_key(|s| (s.count_ones(), *s));
        let index = states.iter().enumerate().map(|(k, s)| (*s, k)).collect();
        Self {
            n_sites,
            cutoff,
            states,
            index,
        }
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn is_sector(&self) -> bool {
        self.cutoff == 1
    }

    pub fn state(&self, k: usize) -> u64 {
        self.states[k]
    }

    pub fn index_of(&self, state: u64) -> Option<usize> {
        self.index.get(&state).copied()
    }

    /// Basis index of the state with a single excitation at `site` (1-based).
    pub fn site_index(&self, site: usize) -> usize {
        self.index_of(1 << (site - 1))
            .expect("single-excitation states are always present")
    }

    pub fn excitations(&self, k: usize) -> usize {
        self.states[k].count_ones() as usize
    }

    pub fn occupied(&self, k: usize, site: usize) -> bool {
        self.states[k] & (1 << (site - 1)) != 0
    }

    pub fn lowering(&self, site: usize) -> SparseOp {
        let bit = 1u64 << (site - 1);
        let entries = self
            .states
            .iter()
            .enumerate()
            .filter(|(_, s)| *s & bit != 0)
            .map(|(k, s)| (self.index[&(s ^ bit)], k, C64::new(1.0, 0.0)))
            .collect();
        SparseOp { entries }
    }

    /// Raising operator; transitions that would exceed the cutoff are dropped.
    pub fn raising(&self, site: usize) -> SparseOp {
        let bit = 1u64 << (site - 1);
        let entries = self
            .states
            .iter()
            .enumerate()
            .filter(|(_, s)| *s & bit == 0)
            .filter_map(|(k, s)| self.index_of(s | bit).map(|r| (r, k, C64::new(1.0, 0.0))))
            .collect();
        SparseOp { entries }
    }

    pub fn number(&self, site: usize) -> SparseOp {
        let entries = (0..self.dim())
            .filter(|&k| self.occupied(k, site))
            .map(|k| (k, k, C64::new(1.0, 0.0)))
            .collect();
        SparseOp { entries }
    }

    /// Flip-flop hopping `Σ_{i≠j} J_ij σ⁺_i σ⁻_j` (Hermitian for symmetric `J`).
    pub fn hopping(&self, j: &nalgebra::DMatrix<f64>) -> CMatrix {
        let n = self.n_sites;
        let mut h = CMatrix::zeros(self.dim(), self.dim());
        for (k, &s) in self.states.iter().enumerate() {
            for from in 0..n {
                if s & (1 << from) == 0 {
                    continue;
                }
                for to in 0..n {
                    if to == from || s & (1 << to) != 0 || j[(to, from)] == 0.0 {
                        continue;
                    }
                    let t = (s ^ (1 << from)) | (1 << to);
                    let r = self.index[&t];
                    h[(r, k)] += C64::new(j[(to, from)], 0.0);
                }
            }
        }
        h
    }

    /// Pair creation `Σ_{i<j} J_ij σ⁺_i σ⁺_j`, truncated at the cutoff.
    pub fn pair_creation(&self, j: &nalgebra::DMatrix<f64>) -> CMatrix {
        let n = self.n_sites;
        let mut h = CMatrix::zeros(self.dim(), self.dim());
        for (k, &s) in self.states.iter().enumerate() {
            for a in 0..n {
                for b in (a + 1)..n {
                    if s & (1 << a) != 0 || s & (1 << b) != 0 || j[(a, b)] == 0.0 {
                        continue;
                    }
                    if let Some(r) = self.index_of(s | (1 << a) | (1 << b)) {
                        h[(r, k)] += C64::new(j[(a, b)], 0.0);
                    }
                }
            }
        }
        h
    }

    /// Diagonal on-site energy term `Σ_i ω_i σ⁺_i σ⁻_i`.
    pub fn onsite(&self, energies: &[f64]) -> Vec<f64> {
        self.states
            .iter()
            .map(|s| {
                energies
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| s & (1 << i) != 0)
                    .map(|(_, w)| w)
                    .sum()
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sector_ordering_matches_site_labels() {
        let b = Basis::sector(5);
        assert_eq!(b.dim(), 6);
        assert_eq!(b.state(0), 0);
        for site in 1..=5 {
            assert_eq!(b.site_index(site), site);
        }
    }

    #[test]
    fn truncated_dimensions() {
        assert_eq!(Basis::truncated(6, 6).dim(), 64);
        assert_eq!(Basis::truncated(6, 3).dim(), 1 + 6 + 15 + 20);
        assert_eq!(Basis::truncated(30, 2).dim(), 1 + 30 + 435);
        assert_eq!(Basis::truncated(10, 1).dim(), 11);
    }

    #[test]
    fn raising_respects_cutoff() {
        let b = Basis::truncated(3, 1);
        let up = b.raising(2);
        // only the vacuum can be raised without leaving the sector
        assert_eq!(up.entries.len(), 1);
        assert_eq!(up.entries[0], (2, 0, C64::new(1.0, 0.0)));
    }

    #[test]
    fn hopping_is_hermitian() {
        let j = nalgebra::DMatrix::from_fn(4, 4, |a, c| {
            if a == c {
                0.0
            } else {
                1.0 / (1.0 + (a + c) as f64)
            }
        });
        let b = Basis::truncated(4, 4);
        let h = b.hopping(&j);
        assert!((&h - h.adjoint()).norm() < 1e-15);
        // excitation number conserved
        for (r, c) in (0..b.dim()).flat_map(|r| (0..b.dim()).map(move |c| (r, c))) {
            if h[(r, c)].norm() > 0.0 {
                assert_eq!(b.excitations(r), b.excitations(c));
            }
        }
    }
}
