//! Time evolution: exact unitary propagation and a Lindblad integrator on the
//! space of at most two excitations.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hilbert::{build_hamiltonian, sector_operator, Atom, Level, ModelParams, TruncatedSpace, MAX_SECTOR};
use crate::sparse::{SparseHermitian, SparseMatrix};

type C64 = Complex64;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };
const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Components larger than this use the Chebyshev expansion.
pub const DENSE_EIGEN_LIMIT: usize = 2000;

/// Pure state over one sector or the direct sum of several.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    sectors: Vec<usize>,
    amplitudes: DVector<C64>,
}

impl StateVector {
    pub fn new(sectors: Vec<usize>, amplitudes: DVector<C64>) -> Self {
        Self { sectors, amplitudes }
    }

    /// Unit vector `e_index` of a `dim`-dimensional space.
    pub fn basis(sectors: Vec<usize>, dim: usize, index: usize) -> Self {
        let mut a = DVector::zeros(dim);
        a[index] = ONE;
        Self { sectors, amplitudes: a }
    }

    pub fn sectors(&self) -> &[usize] {
        &self.sectors
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amplitudes
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }
}

/// `|<target|psi>|^2`.
pub fn state_fidelity(psi: &StateVector, target: &StateVector) -> Result<f64> {
    if psi.dim() != target.dim() {
        return Err(Error::DimensionMismatch { expected: target.dim(), found: psi.dim() });
    }
    Ok(target.amplitudes.dotc(&psi.amplitudes).norm_sqr())
}

enum Method {
    Eigen { energies: DVector<f64>, vectors: DMatrix<C64> },
    Chebyshev { h: SparseMatrix, center: f64, radius: f64 },
}

struct Component {
    indices: Vec<usize>,
    method: Method,
}

/// `exp(-i H t)` for a fixed Hamiltonian. The sparsity graph is split into
/// connected components first, so amplitudes never move between blocks.
pub struct UnitaryPropagator {
    dim: usize,
    components: Vec<Component>,
}

impl UnitaryPropagator {
    pub fn new(h: &SparseHermitian) -> Self {
        Self::with_limit(h, DENSE_EIGEN_LIMIT)
    }

    /// Like [`UnitaryPropagator::new`] with a custom threshold between the
    /// dense and the Chebyshev route.
    pub fn with_limit(h: &SparseHermitian, dense_limit: usize) -> Self {
        let dim = h.dim();
        let mut local = vec![0usize; dim];
        let components = connected_components(h.matrix())
            .into_iter()
            .map(|indices| {
                for (k, &i) in indices.iter().enumerate() {
                    local[i] = k;
                }
                let trip = h
                    .matrix()
                    .iter()
                    .filter(|&(r, _, _)| indices.binary_search(&r).is_ok())
                    .map(|(r, c, v)| (local[r], local[c], v));
                let block = SparseMatrix::from_triplets(indices.len(), indices.len(), trip);
                let method = if indices.len() <= dense_limit {
                    eigen_method(&block, h.is_real())
                } else {
                    let (center, radius) = gershgorin(&block);
                    Method::Chebyshev { h: block, center, radius }
                };
                Component { indices, method }
            })
            .collect();
        Self { dim, components }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn propagate(&self, psi: &StateVector, t: f64) -> Result<StateVector> {
        if psi.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: psi.dim() });
        }
        let mut out = DVector::zeros(self.dim);
        for comp in &self.components {
            let sub = DVector::from_iterator(comp.indices.len(), comp.indices.iter().map(|&i| psi.amplitudes[i]));
            if sub.iter().all(|a| *a == ZERO) {
                continue;
            }
            let evolved = match &comp.method {
                Method::Eigen { energies, vectors } => {
                    let mut c = vectors.ad_mul(&sub);
                    for (ck, e) in c.iter_mut().zip(energies.iter()) {
                        *ck *= C64::from_polar(1.0, -e * t);
                    }
                    vectors * c
                }
                Method::Chebyshev { h, center, radius } => chebyshev_propagate(h, *center, *radius, sub, t),
            };
            for (k, &i) in comp.indices.iter().enumerate() {
                out[i] = evolved[k];
            }
        }
        Ok(StateVector { sectors: psi.sectors.clone(), amplitudes: out })
    }
}

/// `exp(-i H t) psi0`.
pub fn evolve_unitary(h: &SparseHermitian, psi0: &StateVector, t: f64) -> Result<StateVector> {
    UnitaryPropagator::new(h).propagate(psi0, t)
}

fn connected_components(m: &SparseMatrix) -> Vec<Vec<usize>> {
    let n = m.nrows();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for (r, c, _) in m.iter() {
        let (a, b) = (find(&mut parent, r), find(&mut parent, c));
        if a != b {
            parent[a.max(b)] = a.min(b);
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; n];
    for i in 0..n {
        let root = find(&mut parent, i);
        if slot[root] == usize::MAX {
            slot[root] = groups.len();
            groups.push(Vec::new());
        }
        groups[slot[root]].push(i);
    }
    groups
}

fn eigen_method(block: &SparseMatrix, real: bool) -> Method {
    if real {
        let dense = DMatrix::from_fn(block.nrows(), block.ncols(), |r, c| block.get(r, c).re);
        let eig = dense.symmetric_eigen();
        Method::Eigen { energies: eig.eigenvalues, vectors: eig.eigenvectors.map(|x| C64::new(x, 0.0)) }
    } else {
        let eig = block.to_dense().symmetric_eigen();
        Method::Eigen { energies: eig.eigenvalues, vectors: eig.eigenvectors }
    }
}

/// Center and half-width of an interval containing the spectrum.
fn gershgorin(h: &SparseMatrix) -> (f64, f64) {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for r in 0..h.nrows() {
        let mut d = 0.0;
        let mut off = 0.0;
        for (_, c, v) in h.iter().filter(|&(row, _, _)| row == r) {
            if c == r {
                d = v.re;
            } else {
                off += v.norm();
            }
        }
        lo = lo.min(d - off);
        hi = hi.max(d + off);
    }
    (0.5 * (hi + lo), 0.5 * (hi - lo))
}

/// Bessel functions `J_0..=J_kmax` at `x >= 0` by Miller's backward recurrence.
pub fn bessel_j_sequence(x: f64, kmax: usize) -> Vec<f64> {
    let mut out = vec![0.0; kmax + 1];
    if x == 0.0 {
        out[0] = 1.0;
        return out;
    }
    let start = {
        let s = kmax.max(x.ceil() as usize) + 40 + (x.sqrt() as usize) * 4;
        s + s % 2
    };
    let mut vals = vec![0.0; start + 2];
    vals[start] = 1e-300;
    for k in (1..=start).rev() {
        vals[k - 1] = 2.0 * k as f64 / x * vals[k] - vals[k + 1];
        if vals[k - 1].abs() > 1e250 {
            for v in vals[k - 1..].iter_mut() {
                *v *= 1e-250;
            }
        }
    }
    let norm = vals[0] + 2.0 * vals.iter().skip(2).step_by(2).sum::<f64>();
    for k in 0..=kmax {
        out[k] = vals[k] / norm;
    }
    out
}

/// Largest `r t` handled in a single Chebyshev expansion.
const CHEBYSHEV_CHUNK: f64 = 40.0;

fn chebyshev_propagate(h: &SparseMatrix, center: f64, radius: f64, mut psi: DVector<C64>, t: f64) -> DVector<C64> {
    if radius == 0.0 {
        return psi * C64::from_polar(1.0, -center * t);
    }
    let chunks = ((radius * t.abs()) / CHEBYSHEV_CHUNK).ceil().max(1.0) as usize;
    let dt = t / chunks as f64;
    let x = radius * dt.abs();
    let kmax = (x + 10.0 * x.cbrt() + 40.0) as usize;
    let bessel = bessel_j_sequence(x, kmax);
    let sign = if dt < 0.0 { -1.0 } else { 1.0 };
    let apply = |v: &DVector<C64>| -> DVector<C64> {
        // (H - center) / radius
        let mut w = h.mul_vec(v);
        w.axpy(C64::new(-center / radius, 0.0), v, C64::new(1.0 / radius, 0.0));
        w
    };
    for _ in 0..chunks {
        let mut prev = psi.clone();
        let mut cur = apply(&psi);
        let mut acc = psi.scale(bessel[0]);
        let mut phase = C64::new(0.0, -sign);
        acc.axpy(phase * 2.0 * bessel[1], &cur, ONE);
        for (k, &jk) in bessel.iter().enumerate().skip(2) {
            let mut next = apply(&cur) * C64::new(2.0, 0.0);
            next -= &prev;
            prev = cur;
            cur = next;
            phase *= C64::new(0.0, -sign);
            acc.axpy(phase * 2.0 * jk, &cur, ONE);
            if k as f64 > x && jk.abs() < 1e-17 {
                break;
            }
        }
        psi = acc * C64::from_polar(1.0, -center * dt);
    }
    psi
}

/// Density matrix over the direct sum of sectors `0..=2`.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityOperator {
    matrix: DMatrix<C64>,
}

impl DensityOperator {
    pub fn new(matrix: DMatrix<C64>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::DimensionMismatch { expected: matrix.nrows(), found: matrix.ncols() });
        }
        Ok(Self { matrix })
    }

    pub fn from_pure(psi: &StateVector) -> Self {
        let a = psi.amplitudes();
        Self { matrix: a * a.adjoint() }
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    pub fn hermiticity_error(&self) -> f64 {
        (&self.matrix - self.matrix.adjoint()).camax()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let herm = (&self.matrix + self.matrix.adjoint()) * C64::new(0.5, 0.0);
        herm.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn population(&self, index: usize) -> f64 {
        self.matrix[(index, index)].re
    }

    /// Checks Hermiticity (1e-10), trace in `[0, 1 + 1e-8]` and eigenvalues
    /// above `-1e-6`.
    pub fn validate(&self) -> Result<()> {
        let herm = self.hermiticity_error();
        if herm > 1e-10 {
            return Err(Error::IntegratorDrift(format!("Hermiticity error {herm:e}")));
        }
        let tr = self.trace().re;
        if !(-1e-8..=1.0 + 1e-8).contains(&tr) {
            return Err(Error::IntegratorDrift(format!("trace {tr} outside [0, 1]")));
        }
        let min = self.min_eigenvalue();
        if min < -1e-6 {
            return Err(Error::IntegratorDrift(format!("eigenvalue {min:e} below -1e-6")));
        }
        Ok(())
    }
}

/// Which channel a jump operator describes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum JumpKind {
    /// Photon loss from cavity `i` (0-based).
    Cavity(usize),
    /// `|to><e|` on one atom.
    Atomic { atom: Atom, to: Level },
}

/// One Lindblad operator `sqrt(rate) * A`, stored as blocks between sectors.
#[derive(Clone, Debug)]
pub struct JumpOperator {
    kind: JumpKind,
    rate: f64,
    /// `(src, dst, A restricted to src -> dst)`.
    blocks: Vec<(usize, usize, SparseMatrix)>,
}

impl JumpOperator {
    pub fn kind(&self) -> JumpKind {
        self.kind
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    /// Sector shift, 1 for lowering operators and 0 for `|1><e|`.
    pub fn lowering(&self) -> usize {
        match self.kind {
            JumpKind::Atomic { to: Level::One, .. } => 0,
            _ => 1,
        }
    }

    pub fn blocks(&self) -> &[(usize, usize, SparseMatrix)] {
        &self.blocks
    }

    fn block_from(&self, src: usize) -> Option<&SparseMatrix> {
        self.blocks.iter().find(|b| b.0 == src).map(|b| &b.2)
    }

    /// `sqrt(rate) * A` on the whole direct sum.
    pub fn full_matrix(&self, space: &TruncatedSpace) -> SparseMatrix {
        let c = C64::new(self.rate.sqrt(), 0.0);
        let mut trip = Vec::new();
        for (src, dst, m) in &self.blocks {
            let (ro, co) = (space.range(*dst).start, space.range(*src).start);
            trip.extend(m.iter().map(|(r, k, v)| (r + ro, k + co, v * c)));
        }
        SparseMatrix::from_triplets(space.dim(), space.dim(), trip)
    }
}

/// `sqrt(kappa) a_i` for every cavity, then `sqrt(gamma/2) |0><e|` and
/// `sqrt(gamma/2) |1><e|` for each atom.
#[derive(Clone, Debug)]
pub struct JumpOperatorSet {
    operators: Vec<JumpOperator>,
}

impl JumpOperatorSet {
    pub fn new(params: &ModelParams, space: &TruncatedSpace) -> Self {
        let mut operators = Vec::new();
        for cav in 0..params.n_cavities {
            let blocks = (1..=MAX_SECTOR)
                .map(|src| {
                    let m = sector_operator(space.sector(src), space.sector(src - 1), |s| {
                        s.annihilate(cav).map(|(t, a)| (t, C64::new(a, 0.0))).into_iter().collect()
                    });
                    (src, src - 1, m)
                })
                .collect();
            operators.push(JumpOperator { kind: JumpKind::Cavity(cav), rate: params.kappa, blocks });
        }
        for atom in [Atom::First, Atom::Second] {
            for to in [Level::Zero, Level::One] {
                let shift = usize::from(to == Level::Zero);
                let blocks = (shift..=MAX_SECTOR)
                    .map(|src| {
                        let m = sector_operator(space.sector(src), space.sector(src - shift), |s| {
                            s.transition(atom, Level::Excited, to).map(|t| (t, ONE)).into_iter().collect()
                        });
                        (src, src - shift, m)
                    })
                    .collect();
                operators.push(JumpOperator { kind: JumpKind::Atomic { atom, to }, rate: 0.5 * params.gamma, blocks });
            }
        }
        Self { operators }
    }

    pub fn operators(&self) -> &[JumpOperator] {
        &self.operators
    }
}

/// Integrator settings.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LindbladOptions {
    /// Trace-norm agreement required between successive step halvings.
    pub tolerance: f64,
    pub max_halvings: usize,
    /// Fixed Taylor order per step; `None` sums until terms drop below
    /// double precision.
    pub order: Option<usize>,
    /// Initial step times the generator norm bound.
    pub step_scale: f64,
}

impl Default for LindbladOptions {
    fn default() -> Self {
        Self { tolerance: 1e-8, max_halvings: 6, order: None, step_scale: 6.0 }
    }
}

/// Block-sparse operator: entry `n * 3 + m` holds the sector `(n, m)` block.
type Blocks = Vec<Option<DMatrix<C64>>>;

const NB: usize = MAX_SECTOR + 1;

/// Fixed-step Taylor propagation of the Lindblad generator, organised by
/// excitation blocks. Block `(n, m)` couples only to itself and, through
/// lowering jumps, is fed by `(n+1, m+1)`.
pub struct LindbladSolver {
    space: TruncatedSpace,
    /// `H_n - (i/2) sum_j L_j^dag L_j` on each sector.
    k: Vec<SparseMatrix>,
    jumps: JumpOperatorSet,
    generator_bound: f64,
    options: LindbladOptions,
}

impl LindbladSolver {
    pub fn new(params: &ModelParams) -> Result<Self> {
        Self::with_options(params, LindbladOptions::default())
    }

    pub fn with_options(params: &ModelParams, options: LindbladOptions) -> Result<Self> {
        let space = TruncatedSpace::new(params.n_cavities)?;
        let jumps = JumpOperatorSet::new(params, &space);
        let mut k = Vec::with_capacity(NB);
        for n in 0..NB {
            let basis = space.sector(n);
            let h = build_hamiltonian(params, basis)?.into_matrix();
            let damp = SparseMatrix::from_triplets(
                basis.dim(),
                basis.dim(),
                basis.states().iter().enumerate().map(|(i, s)| {
                    let photons: usize = s.photons.iter().map(|&p| p as usize).sum();
                    let excited = [s.atom1, s.atom2].iter().filter(|&&l| l == Level::Excited).count();
                    (i, i, C64::new(0.0, -0.5 * (params.kappa * photons as f64 + params.gamma * excited as f64)))
                }),
            );
            k.push(h.add(&damp));
        }
        let mut bound = 2.0 * k.iter().map(|m| m.norm_inf().max(m.norm_one())).fold(0.0, f64::max);
        for j in jumps.operators() {
            for (_, _, m) in &j.blocks {
                bound += j.rate * m.norm_inf() * m.norm_one();
            }
        }
        Ok(Self { space, k, jumps, generator_bound: bound.max(1e-300), options })
    }

    pub fn space(&self) -> &TruncatedSpace {
        &self.space
    }

    pub fn jumps(&self) -> &JumpOperatorSet {
        &self.jumps
    }

    /// Upper bound on the generator norm used to size steps.
    pub fn generator_bound(&self) -> f64 {
        self.generator_bound
    }

    /// Number of steps of the first attempt over an interval `dt`.
    pub fn initial_steps(&self, dt: f64) -> usize {
        ((dt.abs() * self.generator_bound / self.options.step_scale).ceil() as usize).max(1)
    }

    fn split(&self, rho: &DMatrix<C64>) -> Blocks {
        let mut blocks = vec![None; NB * NB];
        for n in 0..NB {
            for m in 0..NB {
                let b = rho.view_range(self.space.range(n), self.space.range(m)).into_owned();
                if b.iter().any(|x| *x != ZERO) {
                    blocks[n * NB + m] = Some(b);
                }
            }
        }
        // lowering jumps feed (n-1, m-1) from (n, m)
        for n in (1..NB).rev() {
            for m in (1..NB).rev() {
                if blocks[n * NB + m].is_some() && blocks[(n - 1) * NB + m - 1].is_none() {
                    let (a, b) = (self.space.sector(n - 1).dim(), self.space.sector(m - 1).dim());
                    blocks[(n - 1) * NB + m - 1] = Some(DMatrix::zeros(a, b));
                }
            }
        }
        blocks
    }

    fn join(&self, blocks: &Blocks) -> DMatrix<C64> {
        let d = self.space.dim();
        let mut rho = DMatrix::zeros(d, d);
        for n in 0..NB {
            for m in 0..NB {
                if let Some(b) = &blocks[n * NB + m] {
                    rho.view_range_mut(self.space.range(n), self.space.range(m)).copy_from(b);
                }
            }
        }
        rho
    }

    fn derivative(&self, rho: &Blocks) -> Blocks {
        let mut out: Blocks = vec![None; NB * NB];
        for n in 0..NB {
            for m in 0..NB {
                let Some(r) = &rho[n * NB + m] else { continue };
                let mut d = DMatrix::zeros(r.nrows(), r.ncols());
                self.k[n].mul_dense_acc(r, -I, &mut d);
                self.k[m].dense_mul_adjoint_acc(r, I, &mut d);
                for j in self.jumps.operators() {
                    if j.rate == 0.0 {
                        continue;
                    }
                    let rate = C64::new(j.rate, 0.0);
                    let (sn, sm) = (n + j.lowering(), m + j.lowering());
                    if sn >= NB || sm >= NB {
                        continue;
                    }
                    let Some(src) = &rho[sn * NB + sm] else { continue };
                    let (Some(a), Some(b)) = (j.block_from(sn), j.block_from(sm)) else { continue };
                    let mut tmp = DMatrix::zeros(a.nrows(), src.ncols());
                    a.mul_dense_acc(src, ONE, &mut tmp);
                    b.dense_mul_adjoint_acc(&tmp, rate, &mut d);
                }
                out[n * NB + m] = Some(d);
            }
        }
        out
    }

    fn taylor_step(&self, rho: &mut Blocks, h: f64) {
        let mut term = rho.clone();
        let max_order = self.options.order.unwrap_or(400);
        for k in 1..=max_order {
            term = self.derivative(&term);
            let scale = C64::new(h / k as f64, 0.0);
            let mut term_size: f64 = 0.0;
            let mut sum_size: f64 = 0.0;
            for (t, r) in term.iter_mut().zip(rho.iter_mut()) {
                if let (Some(t), Some(r)) = (t.as_mut(), r.as_mut()) {
                    *t *= scale;
                    *r += &*t;
                    term_size = term_size.max(t.camax());
                    sum_size = sum_size.max(r.camax());
                }
            }
            if self.options.order.is_none() && term_size <= 1e-17 * sum_size.max(1e-300) {
                break;
            }
        }
    }

    /// `rho` after `steps` equal steps over `t`, with no convergence control.
    pub fn propagate_fixed_steps(&self, rho: &DMatrix<C64>, t: f64, steps: usize) -> Result<DMatrix<C64>> {
        self.check_dim(rho)?;
        let mut blocks = self.split(rho);
        let h = t / steps as f64;
        for _ in 0..steps {
            self.taylor_step(&mut blocks, h);
        }
        Ok(self.join(&blocks))
    }

    fn check_dim(&self, rho: &DMatrix<C64>) -> Result<()> {
        let d = self.space.dim();
        if rho.nrows() != d || rho.ncols() != d {
            return Err(Error::DimensionMismatch { expected: d, found: rho.nrows() });
        }
        Ok(())
    }

    fn trajectory_with_refinement(&self, rho0: &DMatrix<C64>, times: &[f64], refine: usize) -> Vec<DMatrix<C64>> {
        let mut blocks = self.split(rho0);
        let mut out = Vec::with_capacity(times.len());
        let mut now = 0.0;
        for &t in times {
            let dt = t - now;
            if dt != 0.0 {
                let steps = self.initial_steps(dt) << refine;
                let h = dt / steps as f64;
                for _ in 0..steps {
                    self.taylor_step(&mut blocks, h);
                }
            }
            now = t;
            out.push(self.join(&blocks));
        }
        out
    }

    /// Evolve any operator (not necessarily a state) to each of `times`,
    /// which must be non-decreasing and start at or after zero. The step is
    /// halved until two successive refinements agree in trace norm at every
    /// sample.
    pub fn trajectory(&self, rho0: &DMatrix<C64>, times: &[f64]) -> Result<Vec<DMatrix<C64>>> {
        self.check_dim(rho0)?;
        if times.iter().any(|t| !t.is_finite() || *t < 0.0) || times.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidParams("sample times must be finite, non-negative and sorted".into()));
        }
        let mut coarse = self.trajectory_with_refinement(rho0, times, 0);
        let mut deviation = f64::INFINITY;
        for halving in 1..=self.options.max_halvings {
            let fine = self.trajectory_with_refinement(rho0, times, halving);
            deviation = coarse.iter().zip(&fine).map(|(a, b)| trace_norm(&(a - b))).fold(0.0, f64::max);
            if deviation < self.options.tolerance {
                return Ok(fine);
            }
            coarse = fine;
        }
        Err(Error::ToleranceNotMet { deviation, halvings: self.options.max_halvings })
    }

    /// Evolve any operator to time `t`.
    pub fn evolve_operator(&self, rho0: &DMatrix<C64>, t: f64) -> Result<DMatrix<C64>> {
        Ok(self.trajectory(rho0, &[t])?.pop().expect("one sample"))
    }

    /// Evolve a density operator, checking trace and positivity at the end.
    pub fn evolve(&self, rho0: &DensityOperator, t: f64) -> Result<DensityOperator> {
        rho0.validate()?;
        let out = DensityOperator::new(self.evolve_operator(rho0.matrix(), t)?)?;
        let drift = (out.trace() - rho0.trace()).norm();
        if drift >= 1e-8 {
            return Err(Error::IntegratorDrift(format!("trace changed by {drift:e}")));
        }
        out.validate()?;
        Ok(out)
    }
}

/// Sum of singular values.
pub fn trace_norm(m: &DMatrix<C64>) -> f64 {
    m.singular_values().iter().sum()
}

/// Lindblad evolution with default integrator settings.
pub fn evolve_lindblad(params: &ModelParams, rho0: &DensityOperator, t: f64) -> Result<DensityOperator> {
    LindbladSolver::new(params)?.evolve(rho0, t)
}
