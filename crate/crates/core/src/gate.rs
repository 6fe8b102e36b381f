//! Two-qubit channel extracted from full dynamics, average gate fidelity and
//! chi-matrix process tomography.
//!
//! Operators on the computational space are vectorised row-major:
//! `|i><j|` sits at index `4 i + j`.

use nalgebra::{DMatrix, DVector, Matrix2, Matrix4};
use num_complex::Complex64;

use crate::dynamics::{LindbladSolver, StateVector, UnitaryPropagator};
use crate::effective::TwoQubitUnitary;
use crate::error::{Error, Result};
use crate::hilbert::{Computational, ModelParams, TruncatedSpace};

type C64 = Complex64;

const D: usize = 4;
const D2: usize = 16;

fn unit(i: usize, j: usize) -> Matrix4<C64> {
    let mut m = Matrix4::zeros();
    m[(i, j)] = C64::new(1.0, 0.0);
    m
}

fn vec_row_major(m: &Matrix4<C64>) -> DVector<C64> {
    DVector::from_fn(D2, |k, _| m[(k / D, k % D)])
}

fn unvec_row_major(v: &DVector<C64>) -> Matrix4<C64> {
    Matrix4::from_fn(|a, b| v[D * a + b])
}

/// Linear map on 4x4 operators, `vec(eps(X)) = S vec(X)`.
#[derive(Clone, Debug, PartialEq)]
pub struct GateChannel {
    superop: DMatrix<C64>,
}

impl GateChannel {
    pub fn from_superoperator(superop: DMatrix<C64>) -> Result<Self> {
        if superop.shape() != (D2, D2) {
            return Err(Error::DimensionMismatch { expected: D2, found: superop.nrows() });
        }
        Ok(Self { superop })
    }

    /// Channel from the images of the sixteen `|i><j|`.
    pub fn from_images<F>(mut image: F) -> Self
    where
        F: FnMut(usize, usize) -> Matrix4<C64>,
    {
        let mut superop = DMatrix::zeros(D2, D2);
        for i in 0..D {
            for j in 0..D {
                superop.set_column(D * i + j, &vec_row_major(&image(i, j)));
            }
        }
        Self { superop }
    }

    /// `X -> A X A^dag`.
    pub fn from_kraus(a: &Matrix4<C64>) -> Self {
        Self::from_images(|i, j| a * unit(i, j) * a.adjoint())
    }

    pub fn from_unitary(u: &TwoQubitUnitary) -> Self {
        Self::from_kraus(u.matrix())
    }

    pub fn identity() -> Self {
        Self { superop: DMatrix::identity(D2, D2) }
    }

    /// `X -> tr(X) I / 4`.
    pub fn depolarizing() -> Self {
        Self::from_images(|i, j| if i == j { Matrix4::identity() / C64::new(4.0, 0.0) } else { Matrix4::zeros() })
    }

    pub fn superoperator(&self) -> &DMatrix<C64> {
        &self.superop
    }

    pub fn apply(&self, x: &Matrix4<C64>) -> Matrix4<C64> {
        unvec_row_major(&(&self.superop * vec_row_major(x)))
    }

    /// `C[(4a + i, 4b + j)] = eps(|i><j|)_{ab}`.
    pub fn choi(&self) -> DMatrix<C64> {
        DMatrix::from_fn(D2, D2, |r, c| {
            let (a, i, b, j) = (r / D, r % D, c / D, c % D);
            self.superop[(D * a + b, D * i + j)]
        })
    }

    pub fn choi_min_eigenvalue(&self) -> f64 {
        let c = self.choi();
        let herm = (&c + c.adjoint()) * C64::new(0.5, 0.0);
        herm.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Mean probability lost from the computational subspace over the four
    /// basis inputs, `1 - tr(C) / 4`.
    pub fn leakage(&self) -> f64 {
        1.0 - self.choi().trace().re / D as f64
    }

    /// `max |tr eps(|i><j|) - delta_ij|`.
    pub fn trace_preservation_error(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..D {
            for j in 0..D {
                let tr: C64 = (0..D).map(|a| self.superop[(D * a + a, D * i + j)]).sum();
                let expect = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((tr - expect).norm());
            }
        }
        worst
    }
}

fn computational_positions(space: &TruncatedSpace) -> [usize; D] {
    Computational::ALL.map(|c| space.computational_position(c))
}

/// Channels at each of `times` (sorted, non-negative). The closed case
/// propagates the four basis states; the open case evolves `|i><j|` under the
/// master equation. Both project onto computational states with empty
/// cavities.
pub fn reconstruct_channels(params: &ModelParams, times: &[f64], open_system: bool) -> Result<Vec<GateChannel>> {
    if times.iter().any(|t| !t.is_finite() || *t < 0.0) {
        return Err(Error::InvalidParams("channel times must be finite and non-negative".into()));
    }
    let space = TruncatedSpace::new(params.n_cavities)?;
    let pos = computational_positions(&space);
    if !open_system {
        let prop = UnitaryPropagator::new(&space.hamiltonian(params)?);
        let inputs: Vec<StateVector> =
            pos.iter().map(|&p| StateVector::basis(vec![0, 1, 2], space.dim(), p)).collect();
        return times
            .iter()
            .map(|&t| {
                let mut a = Matrix4::zeros();
                for (i, psi) in inputs.iter().enumerate() {
                    let out = prop.propagate(psi, t)?;
                    for (k, &p) in pos.iter().enumerate() {
                        a[(k, i)] = out.amplitudes()[p];
                    }
                }
                Ok(GateChannel::from_kraus(&a))
            })
            .collect();
    }

    let solver = LindbladSolver::new(params)?;
    let dim = space.dim();
    // images[(i, j)][sample], for i <= j; the rest follow by adjoint
    let mut images = vec![Vec::new(); D2];
    for i in 0..D {
        for j in i..D {
            let mut rho = DMatrix::zeros(dim, dim);
            rho[(pos[i], pos[j])] = C64::new(1.0, 0.0);
            images[D * i + j] = solver
                .trajectory(&rho, times)?
                .into_iter()
                .map(|m| Matrix4::from_fn(|a, b| m[(pos[a], pos[b])]))
                .collect();
        }
    }
    Ok((0..times.len())
        .map(|s| {
            GateChannel::from_images(|i, j| if i <= j { images[D * i + j][s] } else { images[D * j + i][s].adjoint() })
        })
        .collect())
}

pub fn reconstruct_channel(params: &ModelParams, t: f64, open_system: bool) -> Result<GateChannel> {
    if !(t > 0.0) {
        return Err(Error::InvalidParams(format!("channel time must be positive, got {t}")));
    }
    Ok(reconstruct_channels(params, &[t], open_system)?.remove(0))
}

/// Single-qubit Pauli matrices `I, X, Y, Z`, or `I, X, -iY, Z` when
/// `modified`.
fn single_paulis(modified: bool) -> [Matrix2<C64>; 4] {
    let c = |re: f64, im: f64| C64::new(re, im);
    let o = c(0.0, 0.0);
    let y = if modified {
        Matrix2::new(o, c(-1.0, 0.0), c(1.0, 0.0), o)
    } else {
        Matrix2::new(o, c(0.0, -1.0), c(0.0, 1.0), o)
    };
    [
        Matrix2::new(c(1.0, 0.0), o, o, c(1.0, 0.0)),
        Matrix2::new(o, c(1.0, 0.0), c(1.0, 0.0), o),
        y,
        Matrix2::new(c(1.0, 0.0), o, o, c(-1.0, 0.0)),
    ]
}

fn kron(a: &Matrix2<C64>, b: &Matrix2<C64>) -> Matrix4<C64> {
    Matrix4::from_fn(|r, c| a[(r / 2, c / 2)] * b[(r % 2, c % 2)])
}

/// Operator basis for the chi matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PauliBasis {
    /// `{I, X, Y, Z}` tensor products.
    Standard,
    /// `{I, X, -iY, Z}` tensor products.
    Modified,
}

impl PauliBasis {
    /// The sixteen products in the order `II, IX, IY, IZ, XI, ..., ZZ`.
    pub fn elements(self) -> Vec<Matrix4<C64>> {
        let p = single_paulis(self == PauliBasis::Modified);
        let mut out = Vec::with_capacity(D2);
        for a in &p {
            for b in &p {
                out.push(kron(a, b));
            }
        }
        out
    }

    pub fn labels(self) -> Vec<String> {
        let names = match self {
            PauliBasis::Standard => ["I", "X", "Y", "Z"],
            PauliBasis::Modified => ["I", "X", "~Y", "Z"],
        };
        let mut out = Vec::with_capacity(D2);
        for a in names {
            for b in names {
                out.push(format!("{a}{b}"));
            }
        }
        out
    }

    fn matrix(self) -> DMatrix<C64> {
        let elems = self.elements();
        DMatrix::from_fn(D2, D2, |r, m| elems[m][(r / D, r % D)])
    }
}

/// Process matrix: `eps(rho) = sum_mn chi_mn E_m rho E_n^dag`.
#[derive(Clone, Debug, PartialEq)]
pub struct ChiMatrix {
    basis: PauliBasis,
    chi: DMatrix<C64>,
}

impl ChiMatrix {
    pub fn new(basis: PauliBasis, chi: DMatrix<C64>) -> Result<Self> {
        if chi.shape() != (D2, D2) {
            return Err(Error::DimensionMismatch { expected: D2, found: chi.nrows() });
        }
        Ok(Self { basis, chi })
    }

    pub fn basis(&self) -> PauliBasis {
        self.basis
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.chi
    }

    pub fn trace(&self) -> C64 {
        self.chi.trace()
    }

    pub fn hermiticity_error(&self) -> f64 {
        (&self.chi - self.chi.adjoint()).camax()
    }

    /// Rebuild the channel from the process matrix.
    pub fn to_channel(&self) -> GateChannel {
        let e = self.basis.elements();
        GateChannel::from_images(|i, j| {
            let x = unit(i, j);
            let mut out = Matrix4::zeros();
            for m in 0..D2 {
                let left = e[m] * x;
                for n in 0..D2 {
                    let c = self.chi[(m, n)];
                    if c != C64::new(0.0, 0.0) {
                        out += left * e[n].adjoint() * c;
                    }
                }
            }
            out
        })
    }

    /// Rows of `label,v1,...,v16` with a header line, one matrix of either
    /// real or imaginary parts.
    pub fn to_csv(&self, imaginary: bool) -> String {
        let labels = self.basis.labels();
        let mut out = String::from("label");
        for l in &labels {
            out.push(',');
            out.push_str(l);
        }
        out.push('\n');
        for (r, l) in labels.iter().enumerate() {
            out.push_str(l);
            for c in 0..D2 {
                let v = self.chi[(r, c)];
                out.push_str(&format!(",{:.16e}", if imaginary { v.im } else { v.re }));
            }
            out.push('\n');
        }
        out
    }
}

/// Chi matrix in the modified Pauli basis.
pub fn chi_tomography(channel: &GateChannel) -> ChiMatrix {
    chi_tomography_in(channel, PauliBasis::Modified)
}

/// With `B` holding the row-major vectorised basis elements, the Choi matrix
/// is `B chi B^dag` and `B^dag B = 4`, so `chi = B^dag C B / 16`.
pub fn chi_tomography_in(channel: &GateChannel, basis: PauliBasis) -> ChiMatrix {
    let b = basis.matrix();
    let chi = b.adjoint() * channel.choi() * &b / C64::new((D * D) as f64, 0.0);
    ChiMatrix { basis, chi }
}

/// `tr(a b) / (tr a tr b)`.
pub fn chi_overlap(a: &ChiMatrix, b: &ChiMatrix) -> Result<f64> {
    let (ta, tb) = (a.trace(), b.trace());
    if ta.norm() < 1e-14 || tb.norm() < 1e-14 {
        return Err(Error::ZeroTrace);
    }
    Ok(((&a.chi * &b.chi).trace() / (ta * tb)).re)
}

/// `[sum_j tr(U U_j^dag U^dag eps(U_j)) + d^2] / [d^2 (d + 1)]` over the
/// sixteen Pauli products `U_j`, `d = 4`.
pub fn average_fidelity(channel: &GateChannel, ideal: &TwoQubitUnitary) -> f64 {
    let u = ideal.matrix();
    let sum: C64 = PauliBasis::Standard
        .elements()
        .iter()
        .map(|uj| (u * uj.adjoint() * u.adjoint() * channel.apply(uj)).trace())
        .sum();
    let d = D as f64;
    (sum.re + d * d) / (d * d * (d + 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::effective::ideal_sqrt_swap;

    #[test]
    fn ideal_channel_has_unit_fidelity() {
        let u = ideal_sqrt_swap();
        let f = average_fidelity(&GateChannel::from_unitary(&u), &u);
        assert!((f - 1.0).abs() < 1e-14);
    }

    #[test]
    fn depolarizing_fidelity_is_a_quarter() {
        let f = average_fidelity(&GateChannel::depolarizing(), &ideal_sqrt_swap());
        assert!((f - 0.25).abs() < 1e-12);
    }

    #[test]
    fn identity_chi_is_single_entry() {
        let chi = chi_tomography(&GateChannel::identity());
        for r in 0..D2 {
            for c in 0..D2 {
                let expect = if (r, c) == (0, 0) { 1.0 } else { 0.0 };
                assert!((chi.matrix()[(r, c)] - C64::new(expect, 0.0)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn sqrt_swap_chi_is_rank_one() {
        let chi = chi_tomography(&GateChannel::from_unitary(&ideal_sqrt_swap()));
        assert!((chi.trace() - C64::new(1.0, 0.0)).norm() < 1e-14);
        assert!(chi.hermiticity_error() < 1e-15);
        let ev = chi.matrix().clone().symmetric_eigenvalues();
        let mut ev: Vec<f64> = ev.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        assert!((ev[15] - 1.0).abs() < 1e-14);
        assert!(ev[..15].iter().all(|x| x.abs() < 1e-14));
    }

    #[test]
    fn sqrt_swap_versus_identity_overlap() {
        let a = chi_tomography(&GateChannel::from_unitary(&ideal_sqrt_swap()));
        let b = chi_tomography(&GateChannel::identity());
        // |tr U / 4|^2 = |3 + i|^2 / 16
        assert!((chi_overlap(&a, &b).unwrap() - 0.625).abs() < 1e-14);
        assert!((chi_overlap(&a, &a).unwrap() - 1.0).abs() < 1e-14);
        let zero = ChiMatrix::new(PauliBasis::Modified, DMatrix::zeros(16, 16)).unwrap();
        assert_eq!(chi_overlap(&a, &zero), Err(Error::ZeroTrace));
    }

    #[test]
    fn chi_rebuilds_channel_in_both_bases() {
        let u = ideal_sqrt_swap();
        let mut a = *u.matrix() * C64::new(0.9, 0.0);
        a[(0, 3)] = C64::new(0.1, 0.2);
        let ch = GateChannel::from_kraus(&a);
        for basis in [PauliBasis::Modified, PauliBasis::Standard] {
            let chi = chi_tomography_in(&ch, basis);
            assert!((chi.to_channel().superoperator() - ch.superoperator()).camax() < 1e-12);
        }
    }

    #[test]
    fn choi_of_unitary_is_pure() {
        let ch = GateChannel::from_unitary(&ideal_sqrt_swap());
        assert!(ch.choi_min_eigenvalue() > -1e-14);
        assert!(ch.leakage().abs() < 1e-14);
        assert!(ch.trace_preservation_error() < 1e-14);
        let x = Matrix4::from_fn(|r, c| C64::new(r as f64, c as f64 * 0.5));
        let u = ideal_sqrt_swap();
        assert!((ch.apply(&x) - u.matrix() * x * u.matrix().adjoint()).norm() < 1e-13);
    }

    #[test]
    fn csv_layout() {
        let csv = chi_tomography(&GateChannel::identity()).to_csv(false);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 17);
        assert!(lines[0].starts_with("label,II,IX,I~Y,IZ,XI"));
        assert!(lines[1].starts_with("II,1.0000000000000000e0,"));
    }
}
