//! Closed-form propagators `Phi(t1, t2)` between two instants of the
//! reduced dynamics, in operator-sum form on the q <= 1 local space.
//!
//! Each propagator is a block-diagonal operator plus rank-one flow terms
//! weighted by a real amplitude. The flow terms are applied as
//! `w <b|rho|b> |a><a|` so a negative weight needs no imaginary Kraus factor.

use crate::amplitudes::{amplitudes, hop_prob, NetworkParams};
use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::scalar::{cr, Real, C};
use crate::states::{DynClass, SubsystemSelector};

/// Relative singular-value cutoff used when inverting dynamical maps.
pub const PINV_CUTOFF: f64 = 1e-10;

/// Direction of the rank-one flow term.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlowKind {
    /// Class 1: the uniform q=1 component drains to ground.
    OutOfSubsystem,
    /// Class 0: ground feeds the uniform q=1 component.
    IntoSubsystem,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropagatorOps<T> {
    pub block_diag: CMatrix<T>,
    pub flow_weight: T,
    pub flow_kind: FlowKind,
    /// `phi_0 - |phi_s|^2` on the ground population, class 0 only.
    pub ground_extra: Option<T>,
    pub k_qubits: usize,
    pub dyn_class: DynClass,
    pub t1: T,
    pub t2: T,
}

/// Rank-one term `weight * <input|rho|input> |output><output|`.
struct RankOne<T> {
    weight: T,
    output: Vec<T>,
    input: Vec<T>,
}

fn ground<T: Real>(d: usize) -> Vec<T> {
    let mut v = vec![T::zero(); d];
    v[0] = T::one();
    v
}

fn excited_ones<T: Real>(d: usize) -> Vec<T> {
    let mut v = vec![T::one(); d];
    v[0] = T::zero();
    v
}

impl<T: Real> PropagatorOps<T> {
    /// Local dimension `K + 1`.
    pub fn dim(&self) -> usize {
        self.k_qubits + 1
    }

    fn rank_one_terms(&self) -> Vec<RankOne<T>> {
        let d = self.dim();
        match self.flow_kind {
            FlowKind::OutOfSubsystem => vec![RankOne {
                weight: self.flow_weight,
                output: ground(d),
                input: excited_ones(d),
            }],
            FlowKind::IntoSubsystem => vec![
                RankOne {
                    weight: self.ground_extra.unwrap_or_else(T::zero),
                    output: ground(d),
                    input: ground(d),
                },
                RankOne {
                    weight: self.flow_weight,
                    output: excited_ones(d),
                    input: ground(d),
                },
            ],
        }
    }

    /// `max |phi^dag phi + sum_i phi_i^T phi_i - 1|` on the q <= 1 space.
    pub fn completeness_residual(&self) -> T {
        let b = &self.block_diag;
        let mut sum = b.adjoint().matmul(b);
        for term in self.rank_one_terms() {
            let norm: T = term.output.iter().map(|x| *x * *x).sum();
            let w = term.weight * norm;
            let d = self.dim();
            for i in 0..d {
                for j in 0..d {
                    sum[(i, j)] += cr(w * term.input[i] * term.input[j]);
                }
            }
        }
        sum.max_abs_diff(&CMatrix::identity(self.dim()))
    }

    /// Matrix of the map acting on row-major vectorized operators:
    /// `vec(rho)[mu * D + nu] = rho[mu][nu]`.
    pub fn superoperator(&self) -> CMatrix<T> {
        let d = self.dim();
        let b = &self.block_diag;
        let mut s = CMatrix::from_fn(d * d, d * d, |row, col| {
            let (i, j) = (row / d, row % d);
            let (m, n) = (col / d, col % d);
            b[(i, m)] * b[(j, n)].conj()
        });
        for term in self.rank_one_terms() {
            for i in 0..d {
                for j in 0..d {
                    for m in 0..d {
                        for n in 0..d {
                            let v = term.weight * term.output[i] * term.output[j] * term.input[m] * term.input[n];
                            if v != T::zero() {
                                s[(i * d + j, m * d + n)] += cr(v);
                            }
                        }
                    }
                }
            }
        }
        s
    }
}

/// True iff `2K = N` and `t1` lies within `1e-9` periods of `(m + 1/2) P`.
/// At those instants the dynamical map from the generating state is not
/// invertible, so no propagator starting there exists.
pub fn is_singular<T: Real>(params: &NetworkParams<T>, k_qubits: usize, t1: T) -> bool {
    if 2 * k_qubits != params.n_qubits() {
        return false;
    }
    let x = params.periods_from_time(t1) - T::lit(0.5);
    (x - x.round()).abs() <= T::lit(1e-9)
}

fn check_times<T: Real>(t1: T, t2: T) -> Result<()> {
    if !(t1.is_finite() && t2.is_finite()) {
        return Err(Error::InvalidParams(format!("times must be finite, got t1 = {t1}, t2 = {t2}")));
    }
    Ok(())
}

fn guard<T: Real>(params: &NetworkParams<T>, sel: SubsystemSelector, t1: T, t2: T) -> Result<()> {
    sel.validate(params)?;
    check_times(t1, t2)?;
    if is_singular(params, sel.k_qubits, t1) {
        return Err(Error::Singular { t1: t1.as_f64() });
    }
    Ok(())
}

fn near_zero<T: Real>(x: T) -> bool {
    x.abs() < T::tol(1e-12)
}

/// Flow amplitude of the propagator from `t1` to `t2`.
///
/// Class 1: `(N-K)(x2 - x1) / (1 - K(N-K) x1)`.
/// Class 0: `(x2 - x1) / (1 - K x1)`, where `x = |u_d|^2`.
pub fn flow_amplitude<T: Real>(params: &NetworkParams<T>, sel: SubsystemSelector, t1: T, t2: T) -> Result<T> {
    guard(params, sel, t1, t2)?;
    flow_unchecked(params, sel, t1, t2)
}

pub(crate) fn flow_unchecked<T: Real>(params: &NetworkParams<T>, sel: SubsystemSelector, t1: T, t2: T) -> Result<T> {
    let (x1, x2) = (hop_prob(params, t1), hop_prob(params, t2));
    let k = T::count(sel.k_qubits);
    let (scale, den) = match sel.dyn_class {
        DynClass::Class1 => {
            let m = params.n() - k;
            (m, T::one() - k * m * x1)
        }
        DynClass::Class0 => (T::one(), T::one() - k * x1),
    };
    if near_zero(den) {
        return Err(Error::Singular { t1: t1.as_f64() });
    }
    Ok(scale * (x2 - x1) / den)
}

pub fn build_propagator<T: Real>(
    params: &NetworkParams<T>,
    sel: SubsystemSelector,
    t1: T,
    t2: T,
) -> Result<PropagatorOps<T>> {
    guard(params, sel, t1, t2)?;
    let k = sel.k_qubits;
    let d = k + 1;
    let a1 = amplitudes(params, t1);
    let a2 = amplitudes(params, t2);
    let flow_weight = flow_unchecked(params, sel, t1, t2)?;
    let singular = || Error::Singular { t1: t1.as_f64() };

    match sel.dyn_class {
        DynClass::Class1 => {
            let (s1, d1, s2, d2) = (a1.same_site, a1.cross_site, a2.same_site, a2.cross_site);
            let km2 = cr(T::count(k) - T::lit(2.0));
            let km1 = cr(T::count(k) - T::one());
            let den = (d1 - s1) * (km1 * d1 + s1);
            if near_zero(den.norm()) {
                return Err(singular());
            }
            let phi_s = (d1 * d2 - s1 * s2 + km2 * d1 * (d2 - s2)) / den;
            let phi_d = (d1 * s2 - s1 * d2) / den;
            let block_diag = CMatrix::from_fn(d, d, |i, j| match (i, j) {
                (0, 0) => cr(T::one()),
                (0, _) | (_, 0) => cr(T::zero()),
                _ if i == j => phi_s,
                _ => phi_d,
            });
            Ok(PropagatorOps {
                block_diag,
                flow_weight,
                flow_kind: FlowKind::OutOfSubsystem,
                ground_extra: None,
                k_qubits: k,
                dyn_class: DynClass::Class1,
                t1,
                t2,
            })
        }
        DynClass::Class0 => {
            let s1 = a1.same_site;
            if near_zero(s1.norm()) {
                return Err(singular());
            }
            let phi_s = a2.same_site / s1;
            let kk = T::count(k);
            let (x1, x2) = (a1.hop_prob(), a2.hop_prob());
            let phi_ground = (T::one() - kk * x2) / (T::one() - kk * x1);
            let mut diag: Vec<C<T>> = vec![cr(T::one()); d];
            diag[0] = phi_s;
            let block_diag = CMatrix::from_fn(d, d, |i, j| if i == j { diag[i] } else { cr(T::zero()) });
            Ok(PropagatorOps {
                block_diag,
                flow_weight,
                flow_kind: FlowKind::IntoSubsystem,
                ground_extra: Some(phi_ground - phi_s.norm_sqr()),
                k_qubits: k,
                dyn_class: DynClass::Class0,
                t1,
                t2,
            })
        }
    }
}

/// `phi rho phi^dag + sum_i w_i <b_i|rho|b_i> |a_i><a_i|`.
///
/// The input need not be positive; any square matrix of the right size is
/// accepted so non-positive maps can be probed.
pub fn apply<T: Real>(ops: &PropagatorOps<T>, density: &CMatrix<T>) -> Result<CMatrix<T>> {
    let d = ops.dim();
    if density.rows() != d || density.cols() != d {
        return Err(Error::Dimension {
            expected: d,
            rows: density.rows(),
            cols: density.cols(),
        });
    }
    let b = &ops.block_diag;
    let mut out = b.matmul(density).matmul(&b.adjoint());
    for term in ops.rank_one_terms() {
        let mut overlap = cr(T::zero());
        for m in 0..d {
            for n in 0..d {
                overlap += cr(term.input[m] * term.input[n]) * density[(m, n)];
            }
        }
        let overlap = overlap * cr(term.weight);
        for i in 0..d {
            for j in 0..d {
                out[(i, j)] += overlap * cr(term.output[i] * term.output[j]);
            }
        }
    }
    Ok(out)
}

fn vectorize<T: Real>(m: &CMatrix<T>) -> Vec<C<T>> {
    m.as_slice().to_vec()
}

/// Max-entry gap between `Phi(t1,t2)[rho]` and `Phi(0,t2) Phi(0,t1)^+ [rho]`,
/// the inverse taken as a pseudo-inverse of the superoperator.
pub fn compose_residual<T: Real>(
    params: &NetworkParams<T>,
    sel: SubsystemSelector,
    t1: T,
    t2: T,
    test_density: &CMatrix<T>,
) -> Result<T> {
    let direct = apply(&build_propagator(params, sel, t1, t2)?, test_density)?;
    let to_t1 = build_propagator(params, sel, T::zero(), t1)?.superoperator();
    let to_t2 = build_propagator(params, sel, T::zero(), t2)?.superoperator();
    let composed = to_t2.matmul(&to_t1.pinv(T::lit(PINV_CUTOFF))?);
    let v = composed.matvec(&vectorize(test_density));
    let via = CMatrix::from_vec(ops_dim(sel), v);
    Ok(direct.max_abs_diff(&via))
}

fn ops_dim(sel: SubsystemSelector) -> usize {
    sel.k_qubits + 1
}
