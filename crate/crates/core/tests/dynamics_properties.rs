use cca_core::dynamics::*;
use cca_core::effective::*;
use cca_core::hilbert::*;
use nalgebra::DVector;
use num_complex::Complex64 as C;
use proptest::prelude::*;

struct SectorOne {
    basis: SectorBasis,
    prop: UnitaryPropagator,
    h: cca_core::sparse::SparseHermitian,
    i01: usize,
    i10: usize,
}

fn sector_one(p: &ModelParams) -> SectorOne {
    let n = p.n_cavities;
    let basis = enumerate_sector(n, 1).unwrap();
    let h = build_hamiltonian(p, &basis).unwrap();
    let prop = UnitaryPropagator::new(&h);
    let i01 = basis.position(&BasisState::vacuum(Level::Zero, Level::One, n)).unwrap();
    let i10 = basis.position(&BasisState::vacuum(Level::One, Level::Zero, n)).unwrap();
    SectorOne { basis, prop, h, i01, i10 }
}

impl SectorOne {
    fn state(&self, a01: C, a10: C) -> StateVector {
        let mut v = DVector::zeros(self.basis.dim());
        v[self.i01] = a01;
        v[self.i10] = a10;
        StateVector::new(vec![1], v)
    }
}

#[test]
fn effective_model_tracks_full_dynamics() {
    for n in [3, 5, 7] {
        for omega in [0.01, 0.03] {
            let p = ModelParams::gate_condition(n, 1.0, omega).unwrap();
            let model = build_effective(&p).unwrap();
            let t_gate = gate_time(&p).unwrap();
            let s = sector_one(&p);
            let one = C::new(1.0, 0.0);
            let zero = C::new(0.0, 0.0);
            let psi0 = s.state(one, zero);
            for k in 0..50 {
                let t = 2.0 * t_gate * k as f64 / 49.0;
                let full = s.prop.propagate(&psi0, t).unwrap();
                let (a, b) = evolve_effective(&model, one, zero, t);
                let f = state_fidelity(&full, &s.state(a, b)).unwrap();
                assert!(f >= 0.99, "N = {n}, omega = {omega}, t = {t}: {f}");
            }
        }
    }
}

#[test]
fn fidelity_peaks_near_gate_time() {
    for n in [3, 5, 7, 9] {
        let p = ModelParams::gate_condition(n, 1.0, 0.03).unwrap();
        let t_gate = gate_time(&p).unwrap();
        let s = sector_one(&p);
        let psi0 = s.state(C::new(1.0, 0.0), C::new(0.0, 0.0));
        let target = s.state(C::new(0.5, 0.5), C::new(0.5, -0.5));
        let (mut best_t, mut best_f) = (0.0, -1.0);
        for k in 0..=2000 {
            let t = t_gate * (0.5 + k as f64 / 2000.0);
            let f = state_fidelity(&s.prop.propagate(&psi0, t).unwrap(), &target).unwrap();
            if f > best_f {
                best_f = f;
                best_t = t;
            }
        }
        let offset = (best_t / t_gate - 1.0).abs();
        assert!(offset < 0.02, "N = {n}: peak at {:.4} T", best_t / t_gate);
    }
}

#[test]
fn energy_is_conserved() {
    for n in [2, 5, 12] {
        let p = ModelParams::new(n, 1.0, 1.0, 0.6, 0.2, -0.1, 0.0, 0.0).unwrap();
        let basis = enumerate_sector(n, 2).unwrap();
        let h = build_hamiltonian(&p, &basis).unwrap();
        let prop = UnitaryPropagator::new(&h);
        let psi0 = StateVector::new(
            vec![2],
            DVector::from_fn(basis.dim(), |i, _| C::new(1.0 / (1.0 + i as f64), (i as f64).cos())).normalize(),
        );
        let e0 = h.expectation(psi0.amplitudes());
        for t in [1.0, 50.0, 3000.0] {
            let psi = prop.propagate(&psi0, t).unwrap();
            assert!((h.expectation(psi.amplitudes()) - e0).abs() < 1e-9);
            assert!((psi.norm() - 1.0).abs() < 1e-10);
        }
    }
}

#[test]
fn large_sector_uses_chebyshev_and_stays_unitary() {
    // N = 62: the two-excitation sector has 2205 states, above the dense limit
    let n = 62;
    let p = ModelParams::gate_condition(n, 1.0, 0.03).unwrap();
    let basis = enumerate_sector(n, 2).unwrap();
    assert!(basis.dim() > DENSE_EIGEN_LIMIT);
    let h = build_hamiltonian(&p, &basis).unwrap();
    let prop = UnitaryPropagator::new(&h);
    let idx = basis.position(&BasisState::vacuum(Level::One, Level::One, n)).unwrap();
    let psi0 = StateVector::basis(vec![2], basis.dim(), idx);
    let e0 = h.expectation(psi0.amplitudes());
    let psi = prop.propagate(&psi0, 200.0).unwrap();
    assert!((psi.norm() - 1.0).abs() < 1e-10);
    assert!((h.expectation(psi.amplitudes()) - e0).abs() < 1e-9);
    let back = prop.propagate(&psi, -200.0).unwrap();
    assert!((back.amplitudes() - psi0.amplitudes()).norm() < 1e-9);
}

#[test]
fn sector_one_evolution_matches_dense_exponential() {
    let p = ModelParams::gate_condition(5, 1.0, 0.3).unwrap();
    let s = sector_one(&p);
    let psi0 = s.state(C::new(0.6, 0.0), C::new(0.0, 0.8));
    let t = 13.7;
    let u = (s.h.to_dense() * C::new(0.0, -t)).exp();
    let expect = u * psi0.amplitudes();
    let got = s.prop.propagate(&psi0, t).unwrap();
    assert!((got.amplitudes() - expect).norm() < 1e-10);
}

#[test]
fn lindblad_trajectory_stays_physical() {
    let p = ModelParams::new(2, 1.0, 1.0, 1.0, 0.3, 0.3, 0.1, 0.1).unwrap();
    let solver = LindbladSolver::new(&p).unwrap();
    let space = solver.space();
    let psi = StateVector::basis(vec![0, 1, 2], space.dim(), space.computational_position(Computational::Q11));
    let rho0 = DensityOperator::from_pure(&psi);
    let times: Vec<f64> = (0..=10).map(|k| 4.0 * k as f64).collect();
    for m in solver.trajectory(rho0.matrix(), &times).unwrap() {
        let rho = DensityOperator::new(m).unwrap();
        rho.validate().unwrap();
        assert!((rho.trace().re - 1.0).abs() < 1e-8);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 16, ..ProptestConfig::default() })]

    #[test]
    fn unitary_evolution_preserves_norm_and_inverts(
        n in 1usize..8,
        delta in -3.0f64..3.0,
        o1 in -0.5f64..0.5,
        o2 in -0.5f64..0.5,
        t in 0.0f64..500.0,
        seed in 0u32..1000,
    ) {
        let p = ModelParams::new(n, 1.0, 1.0, delta, o1, o2, 0.0, 0.0).unwrap();
        let basis = enumerate_sector(n, 2).unwrap();
        let h = build_hamiltonian(&p, &basis).unwrap();
        let prop = UnitaryPropagator::new(&h);
        let psi0 = StateVector::new(
            vec![2],
            DVector::from_fn(basis.dim(), |i, _| {
                let x = (seed as f64 + 1.3 * i as f64).sin();
                C::new(x, (2.0 * x).cos())
            })
            .normalize(),
        );
        let psi = prop.propagate(&psi0, t).unwrap();
        prop_assert!((psi.norm() - 1.0).abs() < 1e-10);
        let back = prop.propagate(&psi, -t).unwrap();
        prop_assert!((back.amplitudes() - psi0.amplitudes()).norm() < 1e-9);
    }
}
