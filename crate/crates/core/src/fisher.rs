//! Quantum Fisher information of reduced states with respect to the
//! coupling `J` or the network size `N` (treated as a real parameter).

use crate::amplitudes::{amplitudes_continuous, NetworkParams};
use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::propagator::flow_amplitude;
use crate::scalar::Real;
use crate::states::{dense_state_from_amplitudes, probability_unchecked, DynClass, SubsystemSelector};

/// Eigenvalue pairs with `p_i + p_j` at or below this are dropped from the
/// SLD sum.
pub const PAIR_CUTOFF: f64 = 1e-12;

/// Default relative step for the finite-difference oracle.
pub const DEFAULT_STEP: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Theta {
    CouplingJ,
    SizeN,
}

/// Eigenvalue (classical) and eigenvector (quantum) parts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FisherBreakdown<T> {
    pub classical: T,
    pub quantum: T,
    pub total: T,
    pub theta: Theta,
}

impl<T: Real> FisherBreakdown<T> {
    fn new(classical: T, quantum: T, theta: Theta) -> Self {
        Self {
            classical,
            quantum,
            total: classical + quantum,
            theta,
        }
    }
}

/// K = 1 split of `(d p(t2))^2` into the part generated over `[t1, t2]`,
/// the part inherited from `t1`, and their interference.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProcessStateSplit<T> {
    pub process: T,
    pub state: T,
    pub cross: T,
    pub total: T,
    pub t1: T,
    pub t2: T,
    pub rescaled: bool,
}

/// `cos^2(a/2) / (1 - c sin^2(a/2))`, taking the finite limit when `c = 1`
/// (only reached for a two-qubit network).
fn cos2_ratio<T: Real>(c: T, half: T) -> T {
    let (s, co) = half.sin_cos();
    if (c - T::one()).abs() <= T::tol(1e-15) {
        return T::one();
    }
    co * co / (T::one() - c * s * s)
}

pub fn qfi_closed_form<T: Real>(
    params: &NetworkParams<T>,
    sel: SubsystemSelector,
    theta: Theta,
    t: T,
) -> Result<FisherBreakdown<T>> {
    sel.validate(params)?;
    let n = params.n();
    let j = params.coupling();
    let k = T::count(sel.k_qubits);
    let (one, two, four) = (T::one(), T::lit(2.0), T::lit(4.0));
    let alpha = n * j * t;
    let half = alpha / two;
    let (s, co) = half.sin_cos();
    let t2 = t * t;

    let out = match (theta, sel.dyn_class) {
        (Theta::CouplingJ, DynClass::Class1) => {
            let m = n - k;
            let c = four * m / (n * n);
            let p = probability_unchecked(params, sel, t);
            let classical = four * t2 * m * cos2_ratio(c, half);
            let quantum = if sel.k_qubits == 1 { T::zero() } else { four * t2 * (k - one) / p };
            FisherBreakdown::new(classical, quantum, theta)
        }
        (Theta::CouplingJ, DynClass::Class0) => {
            let c = four * k / (n * n);
            FisherBreakdown::new(four * t2 * k * cos2_ratio(c, half), T::zero(), theta)
        }
        (Theta::SizeN, DynClass::Class1) => {
            if sel.k_qubits == params.n_qubits() {
                return Err(Error::Divergent(
                    "size information of the whole network diverges (K = N)".into(),
                ));
            }
            let m = n - k;
            let den = n * n - four * m * s * s;
            let lin = (n - two * k) * s - m * n * j * t * co;
            let classical = if den.abs() <= T::tol(1e-14) {
                // two-qubit network at an odd half-period: the cos factor cancels
                j * j * t2
            } else {
                four * lin * lin / (n * n * m * den)
            };
            let quantum = if sel.k_qubits == 1 {
                T::zero()
            } else {
                let nj = n * j * t;
                four * (k - one) * (nj * nj - two * nj * alpha.sin() + four * s * s) / (n * n * den)
            };
            FisherBreakdown::new(classical, quantum, theta)
        }
        (Theta::SizeN, DynClass::Class0) => {
            let den = n * n - four * k * s * s;
            let lin = j * t * co - two / n * s;
            if den.abs() <= T::tol(1e-14) {
                return Err(Error::Divergent(
                    "ground population vanishes; size information diverges".into(),
                ));
            }
            FisherBreakdown::new(four * k * lin * lin / den, T::zero(), theta)
        }
    };
    Ok(out)
}

fn state_at<T: Real>(n: T, j: T, sel: SubsystemSelector, t: T) -> CMatrix<T> {
    dense_state_from_amplitudes(&amplitudes_continuous(n, j, t), n, sel)
}

/// `Tr[L^2 rho]` from a central difference of the dense state and the SLD
/// solved in the eigenbasis of `rho`. `step` is relative to the parameter.
pub fn qfi_numeric_oracle<T: Real>(
    params: &NetworkParams<T>,
    sel: SubsystemSelector,
    theta: Theta,
    t: T,
    step: T,
) -> Result<T> {
    sel.validate(params)?;
    if !(step > T::zero() && step.is_finite()) {
        return Err(Error::InvalidParams(format!("step must be positive, got {step}")));
    }
    let (n, j) = (params.n(), params.coupling());
    let (plus, minus, h) = match theta {
        Theta::CouplingJ => {
            let h = step * j;
            (state_at(n, j + h, sel, t), state_at(n, j - h, sel, t), h)
        }
        Theta::SizeN => {
            let h = step * n;
            (state_at(n + h, j, sel, t), state_at(n - h, j, sel, t), h)
        }
    };
    let d_rho = plus.sub(&minus).scale(crate::scalar::cr(T::one() / (T::lit(2.0) * h)));
    let (w, v) = state_at(n, j, sel, t).eigh()?;
    let rotated = v.adjoint().matmul(&d_rho).matmul(&v);
    let cutoff = T::lit(PAIR_CUTOFF);
    let mut total = T::zero();
    let mut kept = 0usize;
    for a in 0..w.len() {
        for b in 0..w.len() {
            let sum = w[a] + w[b];
            if sum > cutoff {
                total += T::lit(2.0) * rotated[(a, b)].norm_sqr() / sum;
                kept += 1;
            }
        }
    }
    if kept == 0 {
        return Err(Error::Oracle("every eigenvalue pair fell below the cutoff".into()));
    }
    Ok(total)
}

/// `|u_d|^2` and its derivative along `theta`.
fn hop_and_rate<T: Real>(n: T, j: T, t: T, theta: Theta) -> (T, T) {
    let two = T::lit(2.0);
    let alpha = n * j * t;
    let s = (alpha / two).sin();
    let x = T::lit(4.0) * s * s / (n * n);
    let dx = match theta {
        Theta::CouplingJ => two * t / n * alpha.sin(),
        Theta::SizeN => -T::lit(8.0) * s * s / (n * n * n) + two * j * t * alpha.sin() / (n * n),
    };
    (x, dx)
}

/// Single-qubit split of `(d p(t2))^2`, where `p` is the excitation
/// probability (class 1) or ground probability (class 0) and
/// `p(t2) = (1 - phi_tau) p(t1)`.
///
/// With `rescaled = false` each term is divided by `p(t2)(1 - p(t2))`, so the
/// total is the Fisher information of the populations.
pub fn process_state_split<T: Real>(
    params: &NetworkParams<T>,
    dyn_class: DynClass,
    t1: T,
    t2: T,
    theta: Theta,
    rescaled: bool,
) -> Result<ProcessStateSplit<T>> {
    let sel = SubsystemSelector::new(1, dyn_class);
    // validates and rejects singular starts
    let flow = flow_amplitude(params, sel, t1, t2)?;
    let (n, j) = (params.n(), params.coupling());
    let one = T::one();
    // p = 1 - m x with m the number of qubits the excitation can sit on outside
    let (m, dm) = match (dyn_class, theta) {
        (DynClass::Class1, Theta::SizeN) => (n - one, one),
        (DynClass::Class1, Theta::CouplingJ) => (n - one, T::zero()),
        (DynClass::Class0, _) => (one, T::zero()),
    };
    let (x1, dx1) = hop_and_rate(n, j, t1, theta);
    let (x2, dx2) = hop_and_rate(n, j, t2, theta);
    let p1 = one - m * x1;
    let dp1 = -dm * x1 - m * dx1;
    let p2 = one - m * x2;

    let den = one - m * x1;
    let dden = -dm * x1 - m * dx1;
    let num = m * (x2 - x1);
    let dnum = dm * (x2 - x1) + m * (dx2 - dx1);
    let dflow = (dnum * den - num * dden) / (den * den);

    let keep = one - flow;
    let mut process = dflow * dflow * p1 * p1;
    let mut cross = -T::lit(2.0) * dflow * p1 * keep * dp1;
    let mut state = keep * keep * dp1 * dp1;
    if !rescaled {
        let var = p2 * (one - p2);
        if var < T::lit(1e-12) {
            return Err(Error::Pole {
                t2: t2.as_f64(),
                p: p2.as_f64(),
            });
        }
        process /= var;
        cross /= var;
        state /= var;
    }
    Ok(ProcessStateSplit {
        process,
        state,
        cross,
        total: process + cross + state,
        t1,
        t2,
        rescaled,
    })
}

/// `d p / d theta` at `t` for a single qubit of the given class, used as the
/// reference the split must reproduce.
pub fn population_rate<T: Real>(params: &NetworkParams<T>, dyn_class: DynClass, t: T, theta: Theta) -> T {
    let one = T::one();
    let (x, dx) = hop_and_rate(params.n(), params.coupling(), t, theta);
    match (dyn_class, theta) {
        (DynClass::Class1, Theta::SizeN) => -x - (params.n() - one) * dx,
        (DynClass::Class1, Theta::CouplingJ) => -(params.n() - one) * dx,
        (DynClass::Class0, _) => -dx,
    }
}
