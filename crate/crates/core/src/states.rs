//! Reduced states of K-qubit subsystems.
//!
//! Every reduced state has rank two: a ground component and one vector in
//! the subsystem's single-excitation sector. Dense forms live on the
//! `K + 1` dimensional space ordered as ground first, then an excitation on
//! subsystem qubit `1..=K`; higher local sectors are never occupied.

use num_complex::Complex64;

use crate::amplitudes::{amplitude_rates, amplitudes, hop_prob, Amplitudes, NetworkParams};
use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::scalar::{binary_entropy, cr, Real, C};

/// Which side of the initial excitation the subsystem sits on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DynClass {
    /// Contains the initially excited qubit.
    Class1,
    /// Excludes it.
    Class0,
}

impl DynClass {
    pub fn label(self) -> u8 {
        match self {
            DynClass::Class1 => 1,
            DynClass::Class0 => 0,
        }
    }

    pub fn from_label(label: u8) -> Result<Self> {
        match label {
            1 => Ok(DynClass::Class1),
            0 => Ok(DynClass::Class0),
            other => Err(Error::InvalidParams(format!("class must be 0 or 1, got {other}"))),
        }
    }
}

/// Subsystem size and class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SubsystemSelector {
    pub k_qubits: usize,
    pub dyn_class: DynClass,
}

impl SubsystemSelector {
    pub fn new(k_qubits: usize, dyn_class: DynClass) -> Self {
        Self { k_qubits, dyn_class }
    }

    pub fn class1(k_qubits: usize) -> Self {
        Self::new(k_qubits, DynClass::Class1)
    }

    pub fn class0(k_qubits: usize) -> Self {
        Self::new(k_qubits, DynClass::Class0)
    }

    /// Local dimension `K + 1` of the occupied sectors.
    pub fn dim(&self) -> usize {
        self.k_qubits + 1
    }

    /// `1 <= K <= N` for class 1, `1 <= K <= N - 1` for class 0.
    pub fn validate<T: Real>(&self, params: &NetworkParams<T>) -> Result<()> {
        let n = params.n_qubits();
        let max_k = match self.dyn_class {
            DynClass::Class1 => n,
            DynClass::Class0 => n - 1,
        };
        if self.k_qubits == 0 || self.k_qubits > max_k {
            return Err(Error::InvalidParams(format!(
                "K = {} out of range 1..={max_k} for class {} with N = {n}",
                self.k_qubits,
                self.dyn_class.label()
            )));
        }
        Ok(())
    }
}

/// Rank-two reduced state: weight `w` on `|internal_vector>`, `1 - w` on ground.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedState<T> {
    /// Weight on the single-excitation eigenvector (`p` for class 1,
    /// `1 - p0` for class 0).
    pub excited_weight: T,
    pub internal_vector: Vec<C<T>>,
    pub k_qubits: usize,
    pub dyn_class: DynClass,
}

/// Class 1: excitation probability `p1 = 1 - 4(N-K)/N^2 sin^2(NJt/2)`.
/// Class 0: ground-state probability `p0 = 1 - 4K/N^2 sin^2(NJt/2)`.
pub fn excitation_probability<T: Real>(params: &NetworkParams<T>, sel: SubsystemSelector, t: T) -> Result<T> {
    sel.validate(params)?;
    Ok(probability_unchecked(params, sel, t))
}

pub(crate) fn probability_unchecked<T: Real>(params: &NetworkParams<T>, sel: SubsystemSelector, t: T) -> T {
    let k = T::count(sel.k_qubits);
    let d2 = hop_prob(params, t);
    match sel.dyn_class {
        DynClass::Class1 => T::one() - (params.n() - k) * d2,
        DynClass::Class0 => T::one() - k * d2,
    }
}

pub fn reduced_state<T: Real>(params: &NetworkParams<T>, sel: SubsystemSelector, t: T) -> Result<ReducedState<T>> {
    sel.validate(params)?;
    let k = sel.k_qubits;
    match sel.dyn_class {
        DynClass::Class1 => {
            let p = probability_unchecked(params, sel, t);
            let v = class1_vector(&amplitudes(params, t), k);
            let norm = v.iter().map(|x| x.norm_sqr()).sum::<T>().sqrt();
            if p <= T::tol(1e-14) || norm <= T::tol(1e-14) {
                let (ds, dd) = amplitude_rates(params, t);
                let dv = class1_vector(&Amplitudes { same_site: ds, cross_site: dd }, k);
                let dn = dv.iter().map(|x| x.norm_sqr()).sum::<T>().sqrt();
                let left_limit = dv
                    .iter()
                    .map(|x| {
                        let y = -*x / cr(dn);
                        Complex64::new(y.re.as_f64(), y.im.as_f64())
                    })
                    .collect();
                return Err(Error::DegenerateState { t: t.as_f64(), left_limit });
            }
            Ok(ReducedState {
                excited_weight: p,
                internal_vector: v.into_iter().map(|x| x / cr(norm)).collect(),
                k_qubits: k,
                dyn_class: DynClass::Class1,
            })
        }
        DynClass::Class0 => Ok(ReducedState {
            excited_weight: T::one() - probability_unchecked(params, sel, t),
            internal_vector: uniform_vector(k),
            k_qubits: k,
            dyn_class: DynClass::Class0,
        }),
    }
}

fn class1_vector<T: Real>(amps: &Amplitudes<T>, k: usize) -> Vec<C<T>> {
    let mut v = vec![amps.cross_site; k];
    v[0] = amps.same_site;
    v
}

pub(crate) fn uniform_vector<T: Real>(k: usize) -> Vec<C<T>> {
    vec![cr(T::one() / T::count(k).sqrt()); k]
}

/// Dense `(K+1) x (K+1)` density on the ground + single-excitation space.
pub fn materialize_density<T: Real>(state: &ReducedState<T>) -> CMatrix<T> {
    let d = state.k_qubits + 1;
    let w = state.excited_weight;
    let v = &state.internal_vector;
    CMatrix::from_fn(d, d, |i, j| match (i, j) {
        (0, 0) => cr(T::one() - w),
        (0, _) | (_, 0) => cr(T::zero()),
        _ => v[i - 1] * v[j - 1].conj() * cr(w),
    })
}

/// Dense reduced state assembled directly from `(u_s, u_d)` at a possibly
/// non-integer network size `n`. The ground weight is the summed population
/// of the traced-out sites rather than one minus the excited weight, which
/// keeps small eigenvalues accurate near integer periods.
pub(crate) fn dense_state_from_amplitudes<T: Real>(amps: &Amplitudes<T>, n: T, sel: SubsystemSelector) -> CMatrix<T> {
    let k = sel.k_qubits;
    let d = k + 1;
    let d2 = amps.hop_prob();
    let kk = T::count(k);
    match sel.dyn_class {
        DynClass::Class1 => {
            let v = class1_vector(amps, k);
            let env = (n - kk) * d2;
            CMatrix::from_fn(d, d, |i, j| match (i, j) {
                (0, 0) => cr(env),
                (0, _) | (_, 0) => cr(T::zero()),
                _ => v[i - 1] * v[j - 1].conj(),
            })
        }
        DynClass::Class0 => {
            let env = amps.same_site.norm_sqr() + (n - T::one() - kk) * d2;
            CMatrix::from_fn(d, d, |i, j| match (i, j) {
                (0, 0) => cr(env),
                (0, _) | (_, 0) => cr(T::zero()),
                _ => cr(d2),
            })
        }
    }
}

/// Von Neumann entropy (nats) of the reduced state, equal to its discord
/// with the rest of the network since the global state is pure.
pub fn entanglement_entropy<T: Real>(params: &NetworkParams<T>, sel: SubsystemSelector, t: T) -> Result<T> {
    sel.validate(params)?;
    let k = T::count(sel.k_qubits);
    let d2 = hop_prob(params, t);
    let x = match sel.dyn_class {
        DynClass::Class1 => (params.n() - k) * d2,
        DynClass::Class0 => k * d2,
    };
    Ok(binary_entropy(x))
}

/// State every propagator of the class leaves invariant: the ground state
/// for class 1, the uniform single-excitation state (nearest point of the
/// fixed q=1 manifold) for class 0.
pub fn fixed_point_density<T: Real>(k_qubits: usize, dyn_class: DynClass) -> CMatrix<T> {
    let d = k_qubits + 1;
    match dyn_class {
        DynClass::Class1 => CMatrix::from_fn(d, d, |i, j| if i == 0 && j == 0 { cr(T::one()) } else { cr(T::zero()) }),
        DynClass::Class0 => {
            let mut u = vec![cr(T::zero())];
            u.extend(uniform_vector::<T>(k_qubits));
            CMatrix::outer(&u, &u)
        }
    }
}

/// Trace distance to the class fixed point: `p1` for class 1, the ground
/// probability `p0 = 1 - excited_weight` for class 0.
pub fn trace_distance_to_fixed<T: Real>(state: &ReducedState<T>) -> T {
    match state.dyn_class {
        DynClass::Class1 => state.excited_weight,
        DynClass::Class0 => T::one() - state.excited_weight,
    }
}
