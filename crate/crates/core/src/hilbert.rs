//! Atom-cavity-array Hamiltonian restricted to fixed excitation number.
//!
//! Two three-level atoms (levels `0`, `1`, `e`) sit in the first and last of
//! `N` coupled cavities. In the interaction picture
//!
//! ```text
//! H = sum_i Omega_i (|e_i><1_i| + h.c.) + Delta |e_i><e_i|
//!   + g (a_1 |e_1><0_1| + a_N |e_2><0_2| + h.c.)
//!   + J sum_k (a_k^dag a_{k+1} + h.c.)
//! ```
//!
//! The excitation number `[atom1 != 0] + [atom2 != 0] + sum_k n_k` is
//! conserved, so each sector is built as its own sparse block.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::sparse::{SparseHermitian, SparseMatrix};

/// Highest excitation sector this crate builds.
pub const MAX_SECTOR: usize = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Level {
    Zero,
    One,
    Excited,
}

impl Level {
    fn excitations(self) -> usize {
        match self {
            Level::Zero => 0,
            Level::One | Level::Excited => 1,
        }
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Level::Zero => "0",
            Level::One => "1",
            Level::Excited => "e",
        })
    }
}

/// Product state of both atoms and the cavity Fock occupations.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BasisState {
    pub atom1: Level,
    pub atom2: Level,
    pub photons: Vec<u8>,
}

impl BasisState {
    pub fn vacuum(atom1: Level, atom2: Level, n_cavities: usize) -> Self {
        Self { atom1, atom2, photons: vec![0; n_cavities] }
    }

    pub fn excitation_number(&self) -> usize {
        self.atom1.excitations() + self.atom2.excitations() + self.photons.iter().map(|&n| n as usize).sum::<usize>()
    }

    pub fn is_vacuum(&self) -> bool {
        self.photons.iter().all(|&n| n == 0)
    }

    pub fn atom(&self, which: Atom) -> Level {
        match which {
            Atom::First => self.atom1,
            Atom::Second => self.atom2,
        }
    }

    fn with_atom(&self, which: Atom, level: Level) -> Self {
        let mut s = self.clone();
        match which {
            Atom::First => s.atom1 = level,
            Atom::Second => s.atom2 = level,
        }
        s
    }

    /// `a_c |self>`, with its bosonic amplitude.
    pub fn annihilate(&self, cavity: usize) -> Option<(Self, f64)> {
        let n = self.photons[cavity];
        (n > 0).then(|| {
            let mut s = self.clone();
            s.photons[cavity] -= 1;
            (s, (n as f64).sqrt())
        })
    }

    /// `a_c^dag |self>`, with its bosonic amplitude.
    pub fn create(&self, cavity: usize) -> (Self, f64) {
        let mut s = self.clone();
        s.photons[cavity] += 1;
        let amp = (s.photons[cavity] as f64).sqrt();
        (s, amp)
    }

    /// `|to><from|` on one atom.
    pub fn transition(&self, which: Atom, from: Level, to: Level) -> Option<Self> {
        (self.atom(which) == from).then(|| self.with_atom(which, to))
    }
}

impl fmt::Display for BasisState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "|{}{};", self.atom1, self.atom2)?;
        for n in &self.photons {
            write!(f, "{n}")?;
        }
        write!(f, ">")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Atom {
    First,
    Second,
}

/// Ordered basis of one excitation sector.
///
/// Ordering:
/// * sector 1: `(1,0)`, `(e,0)`, one photon in cavity `1..=N`, `(0,e)`, `(0,1)`;
/// * sector 2: `(1,1)`, `(e,1)`, `(1,e)`, `(e,e)`; then one photon in each
///   cavity for atom configurations `(1,0)`, `(e,0)`, `(0,e)`, `(0,1)` in that
///   order; then two-photon states for cavity pairs `c1 <= c2` in
///   lexicographic order.
#[derive(Clone, Debug)]
pub struct SectorBasis {
    sector: usize,
    n_cavities: usize,
    states: Vec<BasisState>,
    index: HashMap<BasisState, usize>,
}

impl SectorBasis {
    pub fn sector(&self) -> usize {
        self.sector
    }

    pub fn n_cavities(&self) -> usize {
        self.n_cavities
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[BasisState] {
        &self.states
    }

    pub fn state(&self, i: usize) -> &BasisState {
        &self.states[i]
    }

    pub fn position(&self, state: &BasisState) -> Option<usize> {
        self.index.get(state).copied()
    }

    /// Indices of the chain block `(e,0), photon@1..N, (0,e)` in sector 1.
    pub fn chain_indices(&self) -> Option<Vec<usize>> {
        if self.sector != 1 {
            return None;
        }
        Some((1..self.n_cavities + 3).collect())
    }
}

/// Expected sector dimension: 1, N + 4 and 4 + 4N + N(N+1)/2.
pub fn sector_dimension(n_cavities: usize, sector: usize) -> Result<usize> {
    let n = n_cavities;
    match sector {
        0 => Ok(1),
        1 => Ok(n + 4),
        2 => Ok(4 + 4 * n + n * (n + 1) / 2),
        s => Err(Error::UnsupportedSector(s)),
    }
}

pub fn enumerate_sector(n_cavities: usize, sector: usize) -> Result<SectorBasis> {
    use Level::*;
    if n_cavities == 0 {
        return Err(Error::InvalidParams("at least one cavity is required".into()));
    }
    let n = n_cavities;
    let vac = |a, b| BasisState::vacuum(a, b, n);
    let photon = |a, b, c: usize| {
        let mut s = BasisState::vacuum(a, b, n);
        s.photons[c] += 1;
        s
    };

    let mut states = Vec::new();
    match sector {
        0 => states.push(vac(Zero, Zero)),
        1 => {
            states.push(vac(One, Zero));
            states.push(vac(Excited, Zero));
            states.extend((0..n).map(|c| photon(Zero, Zero, c)));
            states.push(vac(Zero, Excited));
            states.push(vac(Zero, One));
        }
        2 => {
            for (a, b) in [(One, One), (Excited, One), (One, Excited), (Excited, Excited)] {
                states.push(vac(a, b));
            }
            for (a, b) in [(One, Zero), (Excited, Zero), (Zero, Excited), (Zero, One)] {
                states.extend((0..n).map(|c| photon(a, b, c)));
            }
            for c1 in 0..n {
                for c2 in c1..n {
                    let mut s = photon(Zero, Zero, c1);
                    s.photons[c2] += 1;
                    states.push(s);
                }
            }
        }
        s => return Err(Error::UnsupportedSector(s)),
    }
    let index = states.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
    Ok(SectorBasis { sector, n_cavities, states, index })
}

/// Physical configuration, all energies and rates in units of the hopping.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelParams {
    pub n_cavities: usize,
    pub g: f64,
    pub j: f64,
    pub delta: f64,
    pub omega1: f64,
    pub omega2: f64,
    pub kappa: f64,
    pub gamma: f64,
    weak_drive: bool,
}

impl ModelParams {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        n_cavities: usize,
        g: f64,
        j: f64,
        delta: f64,
        omega1: f64,
        omega2: f64,
        kappa: f64,
        gamma: f64,
    ) -> Result<Self> {
        let mut problems = Vec::new();
        if n_cavities < 1 {
            problems.push("n_cavities must be >= 1".to_string());
        }
        if !(g >= 0.0 && g.is_finite()) {
            problems.push(format!("g must be >= 0, got {g}"));
        }
        if !(j > 0.0 && j.is_finite()) {
            problems.push(format!("j must be positive, got {j}"));
        }
        for (name, v) in [("delta", delta), ("omega1", omega1), ("omega2", omega2)] {
            if !v.is_finite() {
                problems.push(format!("{name} must be finite"));
            }
        }
        for (name, v) in [("kappa", kappa), ("gamma", gamma)] {
            if !(v >= 0.0 && v.is_finite()) {
                problems.push(format!("{name} must be >= 0, got {v}"));
            }
        }
        if !problems.is_empty() {
            return Err(Error::InvalidParams(problems.join("; ")));
        }
        let mut p = Self { n_cavities, g, j, delta, omega1, omega2, kappa, gamma, weak_drive: false };
        p.weak_drive = p.compute_weak_drive();
        Ok(p)
    }

    /// Closed-system parameters satisfying the sqrt(swap) condition
    /// `(-1)^((N-1)/2) Omega_1 = Omega_2 = Omega`, with `g = J = 1`.
    pub fn gate_condition(n_cavities: usize, delta: f64, omega: f64) -> Result<Self> {
        let sign = gate_sign(n_cavities);
        Self::new(n_cavities, 1.0, 1.0, delta, sign * omega, omega, 0.0, 0.0)
    }

    pub fn with_decay(self, kappa: f64, gamma: f64) -> Result<Self> {
        Self::new(self.n_cavities, self.g, self.j, self.delta, self.omega1, self.omega2, kappa, gamma)
    }

    /// Whether `max |Omega_i|` is below a tenth of the smallest
    /// `|E_k|`, `|E_k - E_k'|` of the undriven single-excitation chain.
    pub fn weak_drive(&self) -> bool {
        self.weak_drive
    }

    pub fn is_closed(&self) -> bool {
        self.kappa == 0.0 && self.gamma == 0.0
    }

    /// The `(N+2)`-site chain matrix of the undriven single-excitation block.
    pub fn chain_block(&self) -> DMatrix<f64> {
        let m = self.n_cavities + 2;
        let mut h = DMatrix::zeros(m, m);
        for i in 0..m - 1 {
            let t = if i == 0 || i == m - 2 { self.g } else { self.j };
            h[(i, i + 1)] = t;
            h[(i + 1, i)] = t;
        }
        h[(0, 0)] = self.delta;
        h[(m - 1, m - 1)] = self.delta;
        h
    }

    fn compute_weak_drive(&self) -> bool {
        let mut e: Vec<f64> = self.chain_block().symmetric_eigen().eigenvalues.iter().copied().collect();
        e.sort_by(f64::total_cmp);
        let mut scale = e.iter().map(|x| x.abs()).fold(f64::INFINITY, f64::min);
        for w in e.windows(2) {
            scale = scale.min(w[1] - w[0]);
        }
        self.omega1.abs().max(self.omega2.abs()) < 0.1 * scale
    }
}

/// `(-1)^((N-1)/2)` for odd `N`, the sign relating the two drives under the
/// gate condition. Even `N` returns `+1`.
pub fn gate_sign(n_cavities: usize) -> f64 {
    if n_cavities % 2 == 1 && ((n_cavities - 1) / 2) % 2 == 1 {
        -1.0
    } else {
        1.0
    }
}

/// Terms of `H |state>`.
fn hamiltonian_action(p: &ModelParams, s: &BasisState) -> Vec<(BasisState, f64)> {
    use Level::*;
    let n = p.n_cavities;
    let mut out = Vec::new();

    let diag = p.delta * [s.atom1, s.atom2].iter().filter(|&&l| l == Excited).count() as f64;
    if diag != 0.0 {
        out.push((s.clone(), diag));
    }

    for (atom, omega, cavity) in [(Atom::First, p.omega1, 0), (Atom::Second, p.omega2, n - 1)] {
        match s.atom(atom) {
            One => out.push((s.with_atom(atom, Excited), omega)),
            Excited => out.push((s.with_atom(atom, One), omega)),
            Zero => {}
        }
        match s.atom(atom) {
            Zero => {
                if let Some((t, amp)) = s.annihilate(cavity) {
                    out.push((t.with_atom(atom, Excited), p.g * amp));
                }
            }
            Excited => {
                let (t, amp) = s.with_atom(atom, Zero).create(cavity);
                out.push((t, p.g * amp));
            }
            One => {}
        }
    }

    for k in 0..n.saturating_sub(1) {
        for (from, to) in [(k + 1, k), (k, k + 1)] {
            let nf = s.photons[from] as u32;
            if nf == 0 {
                continue;
            }
            let nt = s.photons[to] as u32;
            let mut t = s.clone();
            t.photons[from] -= 1;
            t.photons[to] += 1;
            out.push((t, p.j * ((nf * (nt + 1)) as f64).sqrt()));
        }
    }
    out
}

/// Sparse matrix of an operator given by its action on basis states, mapping
/// `src` into `dst`. Images outside `dst` are an error in the caller.
pub fn sector_operator<F>(src: &SectorBasis, dst: &SectorBasis, action: F) -> SparseMatrix
where
    F: Fn(&BasisState) -> Vec<(BasisState, Complex64)>,
{
    let mut trip = Vec::new();
    for (col, s) in src.states().iter().enumerate() {
        for (t, amp) in action(s) {
            let row = dst.position(&t).unwrap_or_else(|| panic!("{t} is not in sector {}", dst.sector()));
            trip.push((row, col, amp));
        }
    }
    SparseMatrix::from_triplets(dst.dim(), src.dim(), trip)
}

pub fn build_hamiltonian(params: &ModelParams, basis: &SectorBasis) -> Result<SparseHermitian> {
    if basis.n_cavities() != params.n_cavities {
        return Err(Error::DimensionMismatch { expected: params.n_cavities, found: basis.n_cavities() });
    }
    let m = sector_operator(basis, basis, |s| {
        hamiltonian_action(params, s).into_iter().map(|(t, a)| (t, Complex64::new(a, 0.0))).collect()
    });
    SparseHermitian::new(m)
}

/// Two-qubit computational basis state `|a b>`, `a` for the first atom.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Computational {
    Q00,
    Q01,
    Q10,
    Q11,
}

impl Computational {
    pub const ALL: [Computational; 4] = [Self::Q00, Self::Q01, Self::Q10, Self::Q11];

    /// Position in the `(|00>, |01>, |10>, |11>)` ordering.
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn levels(self) -> (Level, Level) {
        use Level::*;
        match self {
            Self::Q00 => (Zero, Zero),
            Self::Q01 => (Zero, One),
            Self::Q10 => (One, Zero),
            Self::Q11 => (One, One),
        }
    }
}

impl FromStr for Computational {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "00" => Ok(Self::Q00),
            "01" => Ok(Self::Q01),
            "10" => Ok(Self::Q10),
            "11" => Ok(Self::Q11),
            other => Err(Error::InvalidParams(format!("unknown computational label {other:?}"))),
        }
    }
}

/// Sector and basis state of a computational state with empty cavities.
pub fn embed_computational_state(label: Computational, n_cavities: usize) -> (usize, BasisState) {
    let (a, b) = label.levels();
    let s = BasisState::vacuum(a, b, n_cavities);
    (s.excitation_number(), s)
}

/// Direct sum of sectors `0..=MAX_SECTOR`, laid out sector by sector.
#[derive(Clone, Debug)]
pub struct TruncatedSpace {
    sectors: Vec<SectorBasis>,
    offsets: Vec<usize>,
}

impl TruncatedSpace {
    pub fn new(n_cavities: usize) -> Result<Self> {
        let sectors = (0..=MAX_SECTOR).map(|n| enumerate_sector(n_cavities, n)).collect::<Result<Vec<_>>>()?;
        let mut offsets = vec![0];
        for s in &sectors {
            offsets.push(offsets.last().unwrap() + s.dim());
        }
        Ok(Self { sectors, offsets })
    }

    pub fn dim(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    pub fn sectors(&self) -> &[SectorBasis] {
        &self.sectors
    }

    pub fn sector(&self, n: usize) -> &SectorBasis {
        &self.sectors[n]
    }

    /// Index range of sector `n` inside the direct sum.
    pub fn range(&self, n: usize) -> std::ops::Range<usize> {
        self.offsets[n]..self.offsets[n + 1]
    }

    pub fn position(&self, state: &BasisState) -> Option<usize> {
        let n = state.excitation_number();
        if n > MAX_SECTOR {
            return None;
        }
        self.sectors[n].position(state).map(|i| self.offsets[n] + i)
    }

    /// Global index of a computational state.
    pub fn computational_position(&self, label: Computational) -> usize {
        let (_, s) = embed_computational_state(label, self.sectors[0].n_cavities());
        self.position(&s).expect("computational states lie in sectors 0..=2")
    }

    /// The Hamiltonian on the whole direct sum, assembled from sector blocks.
    pub fn hamiltonian(&self, params: &ModelParams) -> Result<SparseHermitian> {
        let mut trip = Vec::new();
        for (n, basis) in self.sectors.iter().enumerate() {
            let off = self.offsets[n];
            let h = build_hamiltonian(params, basis)?;
            trip.extend(h.matrix().iter().map(|(r, c, v)| (r + off, c + off, v)));
        }
        SparseHermitian::new(SparseMatrix::from_triplets(self.dim(), self.dim(), trip))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(n: usize, delta: f64, omega: f64) -> ModelParams {
        ModelParams::new(n, 1.0, 1.0, delta, omega, omega, 0.0, 0.0).unwrap()
    }

    #[test]
    fn sector_sizes_for_five_cavities() {
        assert_eq!(enumerate_sector(5, 0).unwrap().dim(), 1);
        assert_eq!(enumerate_sector(5, 1).unwrap().dim(), 9);
        assert_eq!(enumerate_sector(5, 2).unwrap().dim(), 39);
        assert!(matches!(enumerate_sector(5, 3), Err(Error::UnsupportedSector(3))));
    }

    #[test]
    fn sector_zero_is_the_dark_ground_state() {
        let b = enumerate_sector(5, 0).unwrap();
        assert_eq!(b.state(0), &BasisState::vacuum(Level::Zero, Level::Zero, 5));
        let h = build_hamiltonian(&params(5, 1.0, 0.03), &b).unwrap();
        assert_eq!(h.dim(), 1);
        assert_eq!(h.matrix().nnz(), 0);
    }

    #[test]
    fn single_cavity_chain_block() {
        let delta = 0.7;
        let b = enumerate_sector(1, 1).unwrap();
        let h = build_hamiltonian(&params(1, delta, 0.0), &b).unwrap().to_dense();
        let idx = b.chain_indices().unwrap();
        let expect = [[delta, 1.0, 0.0], [1.0, 0.0, 1.0], [0.0, 1.0, delta]];
        for (r, &i) in idx.iter().enumerate() {
            for (c, &k) in idx.iter().enumerate() {
                assert_eq!(h[(i, k)].re, expect[r][c]);
            }
        }
    }

    #[test]
    fn two_photon_hopping_carries_sqrt_two() {
        let b = enumerate_sector(2, 2).unwrap();
        let h = build_hamiltonian(&params(2, 1.0, 0.0), &b).unwrap();
        let mut s20 = BasisState::vacuum(Level::Zero, Level::Zero, 2);
        s20.photons = vec![2, 0];
        let mut s11 = s20.clone();
        s11.photons = vec![1, 1];
        let (i, k) = (b.position(&s20).unwrap(), b.position(&s11).unwrap());
        assert!((h.get(i, k).re - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(h.get(i, k), h.get(k, i));
    }

    #[test]
    fn computational_embedding() {
        let (n, s) = embed_computational_state(Computational::Q00, 3);
        assert_eq!((n, s.atom1, s.atom2), (0, Level::Zero, Level::Zero));
        let (n, s) = embed_computational_state(Computational::Q10, 3);
        assert_eq!((n, s.atom1, s.atom2), (1, Level::One, Level::Zero));
        let (n, s) = embed_computational_state(Computational::Q11, 3);
        assert_eq!((n, s.atom1, s.atom2), (2, Level::One, Level::One));
        assert!(s.is_vacuum());
        assert_eq!("01".parse::<Computational>().unwrap(), Computational::Q01);
        assert!("12".parse::<Computational>().is_err());
    }

    #[test]
    fn params_validation_collects_problems() {
        let err = ModelParams::new(0, -1.0, 1.0, 1.0, 0.0, 0.0, -0.1, 0.0).unwrap_err();
        let Error::InvalidParams(msg) = err else { panic!() };
        assert!(msg.contains("n_cavities") && msg.contains("g must") && msg.contains("kappa"));
    }

    #[test]
    fn weak_drive_flag() {
        assert!(params(5, 1.0, 0.01).weak_drive());
        // smallest level spacing of the 7-site chain at delta = 1 is 0.198
        assert!(!params(5, 1.0, 0.03).weak_drive());
        assert!(!params(5, 1.0, 0.5).weak_drive());
    }

    #[test]
    fn gate_sign_alternates_with_half_parity() {
        assert_eq!(gate_sign(1), 1.0);
        assert_eq!(gate_sign(3), -1.0);
        assert_eq!(gate_sign(5), 1.0);
        assert_eq!(gate_sign(29), 1.0);
        assert_eq!(gate_sign(99), -1.0);
    }

    #[test]
    fn truncated_space_layout() {
        let space = TruncatedSpace::new(5).unwrap();
        assert_eq!(space.dim(), 49);
        assert_eq!(space.computational_position(Computational::Q00), 0);
        assert_eq!(space.computational_position(Computational::Q10), 1);
        assert_eq!(space.computational_position(Computational::Q01), 9);
        assert_eq!(space.computational_position(Computational::Q11), 10);
    }
}
