//! Independent references shared by the integration targets.

use cca_core::dynamics::JumpOperatorSet;
use cca_core::hilbert::{ModelParams, TruncatedSpace};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C;

/// Column-stacked Lindblad generator: vec(A X B) = (B^T kron A) vec(X).
pub fn liouvillian(params: &ModelParams, space: &TruncatedSpace) -> DMatrix<C> {
    let d = space.dim();
    let id = DMatrix::<C>::identity(d, d);
    let h = space.hamiltonian(params).unwrap().to_dense();
    let mut l = (id.kronecker(&h) - h.transpose().kronecker(&id)) * C::new(0.0, -1.0);
    for j in JumpOperatorSet::new(params, space).operators() {
        let a = j.full_matrix(space).to_dense();
        let ada = a.adjoint() * &a;
        l += a.conjugate().kronecker(&a);
        l -= (id.kronecker(&ada) + ada.transpose().kronecker(&id)) * C::new(0.5, 0.0);
    }
    l
}

/// `exp(L t)` applied to `rho0` by dense matrix exponentiation.
pub fn liouvillian_oracle(params: &ModelParams, rho0: &DMatrix<C>, t: f64) -> DMatrix<C> {
    let space = TruncatedSpace::new(params.n_cavities).unwrap();
    let d = space.dim();
    let prop = (liouvillian(params, &space) * C::new(t, 0.0)).exp();
    let v = prop * DVector::from_column_slice(rho0.as_slice());
    DMatrix::from_column_slice(d, d, v.as_slice())
}
