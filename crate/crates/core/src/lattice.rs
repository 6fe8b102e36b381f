//! Spectral analysis of an open tight-binding chain with diagonal impurities on
//! its two end sites.
//!
//! The chain Hamiltonian is
//!
//! ```text
//! H = d1 |1><1| + d2 |M><M| + j * sum_i (|i><i+1| + |i+1><i|)
//! ```
//!
//! Two independent routes to its spectrum are provided. [`direct_diagonalize`]
//! is a dense symmetric eigensolver (split into mirror-parity blocks when the
//! chain is mirror symmetric). [`find_spectrum_by_poles`] works purely from the
//! closed-form free-chain resolvent and two rank-one Dyson updates: first the
//! impurity at site M, then the impurity at site 1. The eigenvalues are the
//! zeros of `1 - d1 * G_0M(1,1; E)`, isolated between consecutive poles.
//!
//! Site and band indices are zero-based in the API: site `0` is the first
//! site, band `0` the lowest energy.

use std::f64::consts::PI;
use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Minimum distance from a pole at which a resolvent is evaluated.
pub const POLE_TOLERANCE: f64 = 1e-12;
/// Minimum distance between a dressed energy and a free-chain energy for the
/// Lippmann-Schwinger construction.
pub const LS_SINGULAR_TOLERANCE: f64 = 1e-10;
/// Eigenvalues smaller than this in magnitude make the coupling sums undefined.
pub const ZERO_EIGENVALUE_TOLERANCE: f64 = 1e-10;
/// Splitting below which an adjacent root pair is reported as quasi-degenerate.
pub const QUASI_DEGENERATE_SPLIT: f64 = 1e-12;

/// An `m`-site chain with hopping `j` and end-site energies `delta1`, `delta2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChainSpec {
    m: usize,
    j: f64,
    delta1: f64,
    delta2: f64,
}

impl ChainSpec {
    pub fn new(m: usize, j: f64, delta1: f64, delta2: f64) -> Result<Self> {
        if m < 2 {
            return Err(Error::InvalidChain(format!("site count must be >= 2, got {m}")));
        }
        if !(j > 0.0 && j.is_finite()) {
            return Err(Error::InvalidChain(format!("hopping must be positive and finite, got {j}")));
        }
        if !(delta1.is_finite() && delta2.is_finite()) {
            return Err(Error::InvalidChain("impurity energies must be finite".into()));
        }
        Ok(Self { m, j, delta1, delta2 })
    }

    /// Mirror-symmetric chain with equal impurities on both ends.
    pub fn symmetric(m: usize, j: f64, delta: f64) -> Result<Self> {
        Self::new(m, j, delta, delta)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn j(&self) -> f64 {
        self.j
    }

    pub fn delta1(&self) -> f64 {
        self.delta1
    }

    pub fn delta2(&self) -> f64 {
        self.delta2
    }

    pub fn is_mirror_symmetric(&self) -> bool {
        self.delta1 == self.delta2
    }

    pub fn dense(&self) -> DMatrix<f64> {
        let m = self.m;
        let mut h = DMatrix::zeros(m, m);
        for i in 0..m - 1 {
            h[(i, i + 1)] = self.j;
            h[(i + 1, i)] = self.j;
        }
        h[(0, 0)] += self.delta1;
        h[(m - 1, m - 1)] += self.delta2;
        h
    }

    /// Gershgorin-padded window `[lo, hi]` containing every eigenvalue.
    pub fn spectral_window(&self) -> (f64, f64) {
        let pad = 2.0 * self.j + self.delta1.abs() + self.delta2.abs() + self.j;
        (-pad, pad)
    }
}

/// Eigenvalues in ascending order with matching orthonormal eigenvectors.
/// `vectors[k][i]` is the amplitude of site `i` in band `k`; the first entry
/// that is not negligible is positive.
#[derive(Clone, Debug, PartialEq)]
pub struct ChainSpectrum {
    pub energies: Vec<f64>,
    pub vectors: Vec<DVector<f64>>,
}

impl ChainSpectrum {
    pub fn len(&self) -> usize {
        self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }

    pub fn amplitude(&self, band: usize, site: usize) -> f64 {
        self.vectors[band][site]
    }
}

/// Energy `2 j cos(q pi / (m + 1))` of the free-chain mode `q` (one-based,
/// descending in `q`).
pub fn free_energy(m: usize, j: f64, q: usize) -> f64 {
    2.0 * j * (q as f64 * PI / (m as f64 + 1.0)).cos()
}

/// Normalised free-chain mode `q` (one-based): entries
/// `sqrt(2/(m+1)) sin(i q pi / (m+1))`, `i = 1..=m`.
pub fn free_mode(m: usize, q: usize) -> DVector<f64> {
    let norm = (2.0 / (m as f64 + 1.0)).sqrt();
    DVector::from_fn(m, |i, _| norm * (((i + 1) * q) as f64 * PI / (m as f64 + 1.0)).sin())
}

fn fix_sign(v: &mut DVector<f64>) {
    let max = v.amax();
    if let Some(first) = v.iter().copied().find(|x| x.abs() > 1e-8 * max) {
        if first < 0.0 {
            v.neg_mut();
        }
    }
}

/// Parity `(-1)^(m-1-k)` of band `k` in a mirror-symmetric chain: the top
/// band is even and parities alternate downward.
pub fn band_parity(m: usize, k: usize) -> f64 {
    if (m - 1 - k).is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// Dense eigendecomposition of the chain. Mirror-symmetric chains are
/// diagonalised in their even and odd blocks separately, which keeps
/// exponentially close bound-state pairs exactly parity-resolved.
pub fn direct_diagonalize(chain: &ChainSpec) -> ChainSpectrum {
    let h = chain.dense();
    let m = chain.m;
    let mut pairs: Vec<(f64, DVector<f64>, f64)> = Vec::with_capacity(m);

    if chain.is_mirror_symmetric() {
        let half = m / 2;
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let n_even = half + m % 2;
        let mut even = DMatrix::zeros(m, n_even);
        let mut odd = DMatrix::zeros(m, half);
        for i in 0..half {
            even[(i, i)] = s;
            even[(m - 1 - i, i)] = s;
            odd[(i, i)] = s;
            odd[(m - 1 - i, i)] = -s;
        }
        if m % 2 == 1 {
            even[(half, half)] = 1.0;
        }
        for (basis, parity) in [(even, 1.0), (odd, -1.0)] {
            if basis.ncols() == 0 {
                continue;
            }
            let reduced = basis.transpose() * &h * &basis;
            let eig = reduced.symmetric_eigen();
            for (c, &e) in eig.eigenvalues.iter().enumerate() {
                let v = &basis * eig.eigenvectors.column(c);
                pairs.push((e, v, parity));
            }
        }
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        // Exponentially split pairs may come out of the blocks in the wrong
        // order; parities must alternate from the top band down.
        for k in 0..m.saturating_sub(1) {
            let close = (pairs[k + 1].0 - pairs[k].0).abs() <= QUASI_DEGENERATE_SPLIT * chain.j.max(pairs[k].0.abs());
            if close && pairs[k].2 != band_parity(m, k) && pairs[k + 1].2 == band_parity(m, k) {
                pairs.swap(k, k + 1);
            }
        }
    } else {
        let eig = h.symmetric_eigen();
        for (c, &e) in eig.eigenvalues.iter().enumerate() {
            pairs.push((e, eig.eigenvectors.column(c).into_owned(), 0.0));
        }
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    }

    let mut energies = Vec::with_capacity(m);
    let mut vectors = Vec::with_capacity(m);
    for (e, mut v, _) in pairs {
        v.normalize_mut();
        fix_sign(&mut v);
        energies.push(e);
        vectors.push(v);
    }
    ChainSpectrum { energies, vectors }
}

fn check_free_poles(m: usize, j: f64, z: Complex64, tol: f64) -> Result<()> {
    for q in 1..=m {
        let e = free_energy(m, j, q);
        if (z - e).norm() <= tol {
            return Err(Error::PoleProximity { z: z.re, pole: e, tol });
        }
    }
    Ok(())
}

/// Resolvent `(z - H0)^{-1}` of the impurity-free `m`-site chain, built from
/// its sine eigenbasis.
pub fn free_resolvent(m: usize, j: f64, z: Complex64) -> Result<DMatrix<Complex64>> {
    if m == 0 {
        return Err(Error::InvalidChain("site count must be >= 1".into()));
    }
    check_free_poles(m, j, z, POLE_TOLERANCE)?;
    let modes: Vec<DVector<f64>> = (1..=m).map(|q| free_mode(m, q)).collect();
    let denom: Vec<Complex64> = (1..=m).map(|q| (z - free_energy(m, j, q)).inv()).collect();
    let mut g = DMatrix::zeros(m, m);
    for a in 0..m {
        for b in a..m {
            let val: Complex64 = (0..m).map(|q| denom[q] * (modes[q][a] * modes[q][b])).sum();
            g[(a, b)] = val;
            g[(b, a)] = val;
        }
    }
    Ok(g)
}

fn dyson_update(g: &DMatrix<Complex64>, site: usize, delta: f64) -> Result<DMatrix<Complex64>> {
    if delta == 0.0 {
        return Ok(g.clone());
    }
    let denom = Complex64::new(1.0, 0.0) - g[(site, site)] * delta;
    if denom.norm() < POLE_TOLERANCE {
        return Err(Error::ResonanceDenominator(denom.norm()));
    }
    let col = g.column(site).into_owned();
    let row = g.row(site).into_owned();
    Ok(g + (col * row) * (delta / denom))
}

/// Resolvent of the full chain: the free resolvent dressed first by the
/// impurity at the last site, then by the impurity at the first site.
pub fn dressed_resolvent(chain: &ChainSpec, z: Complex64) -> Result<DMatrix<Complex64>> {
    let g0 = free_resolvent(chain.m, chain.j, z)?;
    let g0m = dyson_update(&g0, chain.m - 1, chain.delta2)?;
    dyson_update(&g0m, 0, chain.delta1)
}

/// A set of resolvent entries at one energy.
#[derive(Clone, Debug, PartialEq)]
pub struct ResolventQuery {
    pub z: Complex64,
    pub entries: Vec<(usize, usize)>,
}

impl ResolventQuery {
    pub fn free(&self, m: usize, j: f64) -> Result<Vec<Complex64>> {
        let g = free_resolvent(m, j, self.z)?;
        self.pick(&g)
    }

    pub fn dressed(&self, chain: &ChainSpec) -> Result<Vec<Complex64>> {
        let g = dressed_resolvent(chain, self.z)?;
        self.pick(&g)
    }

    fn pick(&self, g: &DMatrix<Complex64>) -> Result<Vec<Complex64>> {
        self.entries
            .iter()
            .map(|&(r, c)| {
                if r >= g.nrows() || c >= g.ncols() {
                    Err(Error::DimensionMismatch { expected: g.nrows(), found: r.max(c) + 1 })
                } else {
                    Ok(g[(r, c)])
                }
            })
            .collect()
    }
}

/// A rational function `sum_i w_i / (z - p_i)` with simple real poles.
#[derive(Clone, Debug)]
struct PoleSum {
    poles: Vec<f64>,
    weights: Vec<f64>,
}

impl PoleSum {
    fn eval(&self, z: f64) -> f64 {
        self.poles.iter().zip(&self.weights).map(|(p, w)| w / (z - p)).sum()
    }

    /// All real solutions of `1 = coupling * self(z)` inside `[lo, hi]`.
    /// `F(z) = 1/coupling - self(z)` increases monotonically between poles,
    /// so each gap holds exactly one root, plus one beyond the outermost pole
    /// on the side of `sign(coupling)`.
    fn secular_roots(&self, coupling: f64, lo: f64, hi: f64) -> (Vec<f64>, bool) {
        let f = |z: f64| 1.0 / coupling - self.eval(z);
        let mut roots = Vec::with_capacity(self.poles.len());
        let mut quasi = false;

        let mut brackets: Vec<(f64, f64)> = Vec::with_capacity(self.poles.len() + 1);
        let (first, last) = (self.poles[0], *self.poles.last().unwrap());
        if coupling < 0.0 && f(lo) < 0.0 {
            brackets.push((lo, first));
        }
        for w in self.poles.windows(2) {
            brackets.push((w[0], w[1]));
        }
        if coupling > 0.0 && f(hi) > 0.0 {
            brackets.push((last, hi));
        }

        for (a0, b0) in brackets {
            let (mut a, mut b) = (a0, b0);
            for _ in 0..200 {
                let mid = 0.5 * (a + b);
                if mid <= a || mid >= b {
                    break;
                }
                if f(mid) < 0.0 {
                    a = mid;
                } else {
                    b = mid;
                }
            }
            let root = 0.5 * (a + b);
            let near_pole = (self.poles.contains(&a0) && root - a0 < QUASI_DEGENERATE_SPLIT)
                || (self.poles.contains(&b0) && b0 - root < QUASI_DEGENERATE_SPLIT);
            quasi |= near_pole;
            roots.push(root);
        }
        (roots, quasi)
    }
}

/// Result of the Green's-function root search.
#[derive(Clone, Debug, PartialEq)]
pub struct PoleSpectrum {
    pub energies: Vec<f64>,
    /// Set when some root could only be located within
    /// [`QUASI_DEGENERATE_SPLIT`] of a pole of `G_0M(1,1)`, i.e. it belongs to
    /// a bound-state pair whose splitting is below double precision.
    pub quasi_degenerate: bool,
}

/// Eigenvalues of the chain as zeros of `1 - d1 * G_0M(1,1; E)`.
///
/// `G_0M(1,1)` is represented exactly as a partial-fraction sum over the
/// eigenvalues of the chain carrying only the site-M impurity; those
/// eigenvalues are in turn the zeros of `1 - d2 * G_0(M,M; E)`, whose poles
/// are the closed-form free energies. The residue at each intermediate pole
/// `p` is `G_0(1,M; p)^2 / sum_q |<M|q>|^2 / (p - e_q)^2`.
pub fn find_spectrum_by_poles(chain: &ChainSpec) -> Result<PoleSpectrum> {
    let m = chain.m;
    let j = chain.j;
    let (lo, hi) = chain.spectral_window();

    // free modes in ascending energy
    let qs: Vec<usize> = (1..=m).rev().collect();
    let free_e: Vec<f64> = qs.iter().map(|&q| free_energy(m, j, q)).collect();
    let free_v: Vec<DVector<f64>> = qs.iter().map(|&q| free_mode(m, q)).collect();

    let mut quasi = false;
    let site_one = if chain.delta2 == 0.0 {
        PoleSum { poles: free_e.clone(), weights: free_v.iter().map(|v| v[0] * v[0]).collect() }
    } else {
        let g0_mm = PoleSum { poles: free_e.clone(), weights: free_v.iter().map(|v| v[m - 1] * v[m - 1]).collect() };
        let (poles, q1) = g0_mm.secular_roots(chain.delta2, lo, hi);
        quasi |= q1;
        if poles.len() != m {
            return Err(Error::RootCountMismatch { found: poles.len(), expected: m });
        }
        let weights = poles
            .iter()
            .map(|&p| {
                let g_1m: f64 = (0..m).map(|q| free_v[q][0] * free_v[q][m - 1] / (p - free_e[q])).sum();
                let norm: f64 = (0..m).map(|q| free_v[q][m - 1].powi(2) / (p - free_e[q]).powi(2)).sum();
                g_1m * g_1m / norm
            })
            .collect();
        PoleSum { poles, weights }
    };

    let energies = if chain.delta1 == 0.0 {
        site_one.poles
    } else {
        let (roots, q2) = site_one.secular_roots(chain.delta1, lo, hi);
        quasi |= q2;
        roots
    };
    if energies.len() != m {
        return Err(Error::RootCountMismatch { found: energies.len(), expected: m });
    }
    Ok(PoleSpectrum { energies, quasi_degenerate: quasi })
}

/// Normalised eigenvector of band `band` at the (dressed) energy `energy`,
/// from the Lippmann-Schwinger form `[1 - G0(E) V]^{-1} |E0>` with
/// `V = d1|1><1| + d2|M><M|` and `|E0>` the free mode of the same band index.
///
/// At an exact eigenvalue the system is singular and the normalised solution
/// is its null direction. Because `V` has rank two the inverse reduces to a
/// 2x2 system on the end sites; the solution is evaluated as
/// `det * |E0> + G0 V adj(1 - A) |E0>` (the inverse scaled by its
/// determinant), which stays finite as the determinant vanishes.
pub fn lippmann_schwinger_vector(chain: &ChainSpec, energy: f64, band: usize) -> Result<DVector<f64>> {
    let m = chain.m;
    let j = chain.j;
    if band >= m {
        return Err(Error::DimensionMismatch { expected: m, found: band + 1 });
    }
    let q_of_band = m - band;
    if chain.delta1 == 0.0 && chain.delta2 == 0.0 {
        let mut v = free_mode(m, q_of_band);
        fix_sign(&mut v);
        return Ok(v);
    }
    check_free_poles(m, j, Complex64::new(energy, 0.0), LS_SINGULAR_TOLERANCE)
        .map_err(|_| Error::SingularSystem(energy))?;

    let modes: Vec<DVector<f64>> = (1..=m).map(|q| free_mode(m, q)).collect();
    let inv: Vec<f64> = (1..=m).map(|q| 1.0 / (energy - free_energy(m, j, q))).collect();
    let column = |site: usize| -> DVector<f64> {
        DVector::from_fn(m, |i, _| (0..m).map(|q| modes[q][i] * modes[q][site] * inv[q]).sum())
    };
    let g1 = column(0);
    let gm = column(m - 1);
    let (d1, d2) = (chain.delta1, chain.delta2);

    let solve = |b: &DVector<f64>| -> DVector<f64> {
        if chain.is_mirror_symmetric() {
            let p = band_parity(m, band);
            let lambda = 1.0 - d1 * (g1[0] + p * g1[m - 1]);
            b * lambda + (&g1 + &gm * p) * (d1 * b[0])
        } else {
            let a11 = d1 * g1[0];
            let a12 = d2 * gm[0];
            let a21 = d1 * g1[m - 1];
            let a22 = d2 * gm[m - 1];
            let det = (1.0 - a11) * (1.0 - a22) - a12 * a21;
            let u1 = (1.0 - a22) * b[0] + a12 * b[m - 1];
            let u2 = a21 * b[0] + (1.0 - a11) * b[m - 1];
            b * det + &g1 * (d1 * u1) + &gm * (d2 * u2)
        }
    };

    let scale = (d1.abs() * g1.norm() + d2.abs() * gm.norm()).max(1.0);
    let mut y = solve(&modes[q_of_band - 1]);
    if y.norm() < 1e-8 * scale {
        // the designated free mode is (nearly) orthogonal to the left null
        // vector; fall back to whichever mode overlaps it best
        y = modes.iter().map(solve).max_by(|a, b| a.norm().total_cmp(&b.norm())).unwrap();
    }
    let n = y.norm();
    if !(n.is_finite() && n > 0.0) {
        return Err(Error::SingularSystem(energy));
    }
    let mut v = y / n;
    fix_sign(&mut v);
    Ok(v)
}

/// `sum_k f_k^1 f_k^M / E_k` and the two local sums `sum_k |f_k^i|^2 / E_k`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CouplingSums {
    pub cross: f64,
    pub local_first: f64,
    pub local_last: f64,
}

pub fn coupling_sums(spectrum: &ChainSpectrum) -> Result<CouplingSums> {
    if let Some(&e) = spectrum.energies.iter().find(|e| e.abs() < ZERO_EIGENVALUE_TOLERANCE) {
        return Err(Error::ZeroEigenvalue(e));
    }
    let last = spectrum.vectors[0].len() - 1;
    let mut sums = CouplingSums { cross: 0.0, local_first: 0.0, local_last: 0.0 };
    for (e, v) in spectrum.energies.iter().zip(&spectrum.vectors) {
        sums.cross += v[0] * v[last] / e;
        sums.local_first += v[0] * v[0] / e;
        sums.local_last += v[last] * v[last] / e;
    }
    Ok(sums)
}

/// Closed forms of the coupling sums for a mirror-symmetric chain:
/// odd `m`: `cross = (-1)^((m-1)/2) / (2 d)`, `local = 1 / (2 d)`;
/// even `m`: `cross = (-1)^(m/2) j / (d^2 - j^2)`, `local = d / (d^2 - j^2)`.
pub fn closed_form_sums(chain: &ChainSpec) -> Result<CouplingSums> {
    if !chain.is_mirror_symmetric() {
        return Err(Error::InvalidChain("closed forms require equal end impurities".into()));
    }
    let (m, j, d) = (chain.m, chain.j, chain.delta1);
    if d == 0.0 {
        return Err(Error::ZeroDetuning);
    }
    let (cross, local) = if m % 2 == 1 {
        let sign = if ((m - 1) / 2) % 2 == 0 { 1.0 } else { -1.0 };
        (sign / (2.0 * d), 1.0 / (2.0 * d))
    } else {
        let gap = d * d - j * j;
        if gap.abs() < 1e-10 {
            return Err(Error::EvenChainResonance(gap.abs()));
        }
        let sign = if (m / 2) % 2 == 0 { 1.0 } else { -1.0 };
        (sign * j / gap, d / gap)
    };
    Ok(CouplingSums { cross, local_first: local, local_last: local })
}

/// One spectrum per impurity value, for a mirror-symmetric chain.
#[derive(Clone, Debug, PartialEq)]
pub struct DispersionTable {
    pub m: usize,
    pub rows: Vec<(f64, Vec<f64>)>,
}

impl DispersionTable {
    /// CSV with header `delta,E1,...,EM` and 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("delta");
        for k in 1..=self.m {
            let _ = write!(out, ",E{k}");
        }
        out.push('\n');
        for (delta, energies) in &self.rows {
            let _ = write!(out, "{delta:.16e}");
            for e in energies {
                let _ = write!(out, ",{e:.16e}");
            }
            out.push('\n');
        }
        out
    }
}

pub fn dispersion_scan(m: usize, j: f64, deltas: &[f64]) -> Result<DispersionTable> {
    let rows = deltas
        .iter()
        .map(|&d| Ok((d, direct_diagonalize(&ChainSpec::symmetric(m, j, d)?).energies)))
        .collect::<Result<Vec<_>>>()?;
    Ok(DispersionTable { m, rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn defect_free_three_site_spectrum() {
        let s = direct_diagonalize(&ChainSpec::symmetric(3, 1.0, 0.0).unwrap());
        let r2 = 2f64.sqrt();
        for (e, x) in s.energies.iter().zip([-r2, 0.0, r2]) {
            assert_abs_diff_eq!(*e, x, epsilon = 1e-14);
        }
    }

    #[test]
    fn unit_impurity_three_site_spectrum() {
        // (1-E)(E-2)(E+1) = 0
        let s = direct_diagonalize(&ChainSpec::symmetric(3, 1.0, 1.0).unwrap());
        for (e, x) in s.energies.iter().zip([-1.0, 1.0, 2.0]) {
            assert_abs_diff_eq!(*e, x, epsilon = 1e-14);
        }
    }

    #[test]
    fn middle_site_decouples_from_antisymmetric_mode() {
        for delta in [-3.0, 0.4, 7.0] {
            let chain = ChainSpec::symmetric(3, 1.0, delta).unwrap();
            let v = DVector::from_vec(vec![1.0, 0.0, -1.0]) / 2f64.sqrt();
            let hv = chain.dense() * &v;
            assert!((hv - &v * delta).norm() < 1e-15);
        }
    }

    #[test]
    fn free_resolvent_small_cases() {
        let g = free_resolvent(1, 1.0, c(0.7)).unwrap();
        assert_abs_diff_eq!(g[(0, 0)].re, 1.0 / 0.7, epsilon = 1e-14);
        // inverse of [[3,-1],[-1,3]]
        let g = free_resolvent(2, 1.0, c(3.0)).unwrap();
        assert_abs_diff_eq!(g[(0, 0)].re, 3.0 / 8.0, epsilon = 1e-15);
        assert_abs_diff_eq!(g[(0, 1)].re, 1.0 / 8.0, epsilon = 1e-15);
        let z = 1e6;
        let g = free_resolvent(3, 1.0, c(z)).unwrap();
        for i in 0..3 {
            assert!((g[(i, i)].re * z - 1.0).abs() < 1e-11);
        }
    }

    #[test]
    fn free_resolvent_rejects_poles() {
        let e = free_energy(4, 1.0, 2);
        assert!(matches!(free_resolvent(4, 1.0, c(e)), Err(Error::PoleProximity { .. })));
    }

    #[test]
    fn dressed_resolvent_reduces_to_free() {
        let chain = ChainSpec::symmetric(5, 1.0, 0.0).unwrap();
        let z = Complex64::new(0.3, 0.2);
        let g = dressed_resolvent(&chain, z).unwrap();
        let g0 = free_resolvent(5, 1.0, z).unwrap();
        assert!((g - g0).norm() < 1e-15);
    }

    #[test]
    fn dressed_resolvent_three_site() {
        let chain = ChainSpec::symmetric(3, 1.0, 1.0).unwrap();
        let g = dressed_resolvent(&chain, c(3.0)).unwrap();
        let a = DMatrix::from_row_slice(3, 3, &[2.0, -1.0, 0.0, -1.0, 3.0, -1.0, 0.0, -1.0, 2.0]);
        let inv = a.try_inverse().unwrap();
        assert_abs_diff_eq!(g[(0, 0)].re, inv[(0, 0)], epsilon = 1e-12);
        assert_abs_diff_eq!(g[(0, 0)].im, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn dressed_resolvent_seven_site_large_impurity() {
        let chain = ChainSpec::symmetric(7, 1.0, 5.0).unwrap();
        let g = dressed_resolvent(&chain, c(10.0)).unwrap();
        let oracle = (DMatrix::<f64>::identity(7, 7) * 10.0 - chain.dense()).try_inverse().unwrap();
        for r in 0..7 {
            for k in 0..7 {
                assert!((g[(r, k)].re - oracle[(r, k)]).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn pole_spectrum_three_site() {
        let ps = find_spectrum_by_poles(&ChainSpec::symmetric(3, 1.0, 1.0).unwrap()).unwrap();
        for (e, x) in ps.energies.iter().zip([-1.0, 1.0, 2.0]) {
            assert_abs_diff_eq!(*e, x, epsilon = 1e-12);
        }
    }

    #[test]
    fn pole_spectrum_weak_impurity_stays_in_band() {
        let ps = find_spectrum_by_poles(&ChainSpec::symmetric(7, 1.0, 0.01).unwrap()).unwrap();
        assert_eq!(ps.energies.len(), 7);
        assert!(ps.energies.iter().all(|e| e.abs() < 2.0));
    }

    #[test]
    fn pole_spectrum_strong_impurity_binds_two_states() {
        let ps = find_spectrum_by_poles(&ChainSpec::symmetric(7, 1.0, 5.0).unwrap()).unwrap();
        let above: Vec<f64> = ps.energies.iter().copied().filter(|&e| e > 2.0).collect();
        assert_eq!(above.len(), 2);
        assert!((above[1] - above[0]).abs() < 1e-2);
    }

    #[test]
    fn pole_spectrum_handles_single_and_no_impurity() {
        for (d1, d2) in [(0.0, 0.0), (0.0, 2.5), (-1.5, 0.0), (3.0, -0.7)] {
            let chain = ChainSpec::new(6, 1.0, d1, d2).unwrap();
            let ps = find_spectrum_by_poles(&chain).unwrap();
            let direct = direct_diagonalize(&chain);
            for (a, b) in ps.energies.iter().zip(&direct.energies) {
                assert!((a - b).abs() < 1e-9, "({d1},{d2}): {a} vs {b}");
            }
        }
    }

    #[test]
    fn ls_vector_examples() {
        let chain = ChainSpec::symmetric(3, 1.0, 1.0).unwrap();
        let v = lippmann_schwinger_vector(&chain, 2.0, 2).unwrap();
        let expect = DVector::from_element(3, 1.0 / 3f64.sqrt());
        assert!((v - expect).norm() < 1e-12);
        let v = lippmann_schwinger_vector(&chain, 1.0, 1).unwrap();
        let expect = DVector::from_vec(vec![1.0, 0.0, -1.0]) / 2f64.sqrt();
        assert!((v - expect).norm() < 1e-12);

        let free = ChainSpec::symmetric(5, 1.0, 0.0).unwrap();
        let v = lippmann_schwinger_vector(&free, free_energy(5, 1.0, 2), 3).unwrap();
        assert!((v - free_mode(5, 2)).norm() < 1e-15);
    }

    #[test]
    fn ls_vector_rejects_free_energy_collision() {
        let chain = ChainSpec::symmetric(5, 1.0, 1.0).unwrap();
        let e = free_energy(5, 1.0, 3);
        assert!(matches!(lippmann_schwinger_vector(&chain, e, 2), Err(Error::SingularSystem(_))));
    }

    #[test]
    fn coupling_sums_three_site() {
        let s = direct_diagonalize(&ChainSpec::symmetric(3, 1.0, 1.0).unwrap());
        let sums = coupling_sums(&s).unwrap();
        assert_abs_diff_eq!(sums.cross, -0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(sums.local_first, 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(sums.local_last, 0.5, epsilon = 1e-14);
        let closed = closed_form_sums(&ChainSpec::symmetric(3, 1.0, 1.0).unwrap()).unwrap();
        assert_eq!(closed.cross, -0.5);
        assert_eq!(closed.local_first, 0.5);
    }

    #[test]
    fn coupling_sums_four_site() {
        let chain = ChainSpec::symmetric(4, 1.0, 2.0).unwrap();
        let sums = coupling_sums(&direct_diagonalize(&chain)).unwrap();
        assert_abs_diff_eq!(sums.cross, 1.0 / 3.0, epsilon = 1e-13);
        assert_abs_diff_eq!(sums.local_first, 2.0 / 3.0, epsilon = 1e-13);
    }

    #[test]
    fn coupling_sum_errors() {
        let free = direct_diagonalize(&ChainSpec::symmetric(3, 1.0, 0.0).unwrap());
        assert!(matches!(coupling_sums(&free), Err(Error::ZeroEigenvalue(_))));
        let res = ChainSpec::symmetric(6, 1.0, 1.0).unwrap();
        assert!(matches!(closed_form_sums(&res), Err(Error::EvenChainResonance(_))));
    }

    #[test]
    fn dispersion_scan_free_and_strong() {
        let table = dispersion_scan(7, 1.0, &[0.0, 10.0]).unwrap();
        for (k, e) in table.rows[0].1.iter().enumerate() {
            assert_abs_diff_eq!(*e, free_energy(7, 1.0, 7 - k), epsilon = 1e-14);
        }
        let strong = &table.rows[1].1;
        assert!(strong[5] > 2.0 && strong[6] > 2.0);
        assert!(strong[6] - strong[5] < 1e-2);
        // interior levels approach the 5-site free spectrum from below; the
        // offsets at delta = 10 come from a dense eigensolver oracle
        let five = [-3f64.sqrt(), -1.0, 0.0, 1.0, 3f64.sqrt()];
        let offsets = [-0.01472683, -0.04628797, -0.06617995, -0.05370223, -0.01910302];
        for ((e, x), off) in strong[..5].iter().zip(five).zip(offsets) {
            assert!((e - x - off).abs() < 1e-7);
        }
        let csv = table.to_csv();
        assert!(csv.starts_with("delta,E1,E2,E3,E4,E5,E6,E7\n"));
        assert_eq!(csv.lines().count(), 3);
    }

    #[test]
    fn chain_validation() {
        assert!(ChainSpec::new(1, 1.0, 0.0, 0.0).is_err());
        assert!(ChainSpec::new(4, 0.0, 0.0, 0.0).is_err());
        assert!(ChainSpec::new(4, 1.0, f64::NAN, 0.0).is_err());
    }
}
