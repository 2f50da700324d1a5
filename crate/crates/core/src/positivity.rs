//! Positivity and complete positivity of propagators.
//!
//! Three indicators are computed independently: the sign of the flow
//! amplitude, the smallest Choi eigenvalue, and the change of the trace
//! distance to the class fixed point.

use crate::amplitudes::NetworkParams;
use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::propagator::{build_propagator, flow_amplitude, PropagatorOps};
use crate::scalar::Real;
use crate::states::{reduced_state, trace_distance_to_fixed, DynClass, SubsystemSelector};

/// Symmetric tolerance around zero for all three indicators.
pub const VERDICT_TOL: f64 = 1e-9;

/// Largest Choi dimension `(K+1)^2` handed to the eigensolver.
pub const MAX_CHOI_DIM: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    PositiveAndCP,
    NonPositiveNonCP,
}

impl Verdict {
    fn from_nonnegative(ok: bool) -> Self {
        if ok {
            Verdict::PositiveAndCP
        } else {
            Verdict::NonPositiveNonCP
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PositivityVerdict<T> {
    pub flow_sign: T,
    pub choi_min_eig: T,
    /// Change of the trace distance to the fixed point over `[t1, t2]`.
    pub trace_dist_delta: T,
    pub verdict: Verdict,
}

impl<T: Real> PositivityVerdict<T> {
    pub fn choi_verdict(&self) -> Verdict {
        Verdict::from_nonnegative(self.choi_min_eig >= -T::lit(VERDICT_TOL))
    }

    pub fn contraction_verdict(&self) -> Verdict {
        Verdict::from_nonnegative(self.trace_dist_delta <= T::lit(VERDICT_TOL))
    }

    /// All three indicators give the same answer.
    pub fn consistent(&self) -> bool {
        self.choi_verdict() == self.verdict && self.contraction_verdict() == self.verdict
    }
}

/// `sum_{mu,nu} Phi[|mu><nu|] (x) |mu><nu|` over the q <= 1 local basis.
///
/// Sectors with two or more local excitations only pick up unit phases and
/// add non-negative eigenvalues, so the restricted matrix decides CP.
pub fn choi_matrix<T: Real>(ops: &PropagatorOps<T>) -> CMatrix<T> {
    let d = ops.dim();
    let s = ops.superoperator();
    CMatrix::from_fn(d * d, d * d, |row, col| {
        let (i, m) = (row / d, row % d);
        let (j, n) = (col / d, col % d);
        s[(i * d + j, m * d + n)]
    })
}

/// Ascending Choi spectrum.
pub fn choi_spectrum<T: Real>(ops: &PropagatorOps<T>) -> Result<Vec<T>> {
    let d = ops.dim();
    if d * d > MAX_CHOI_DIM {
        return Err(Error::SizeLimit {
            what: "choi dimension",
            value: d * d,
            limit: MAX_CHOI_DIM,
        });
    }
    choi_matrix(ops).eigvalsh()
}

pub fn classify<T: Real>(
    params: &NetworkParams<T>,
    sel: SubsystemSelector,
    t1: T,
    t2: T,
) -> Result<PositivityVerdict<T>> {
    let ops = build_propagator(params, sel, t1, t2)?;
    let choi_min_eig = choi_spectrum(&ops)?[0];
    let distance = |t| -> Result<T> {
        match reduced_state(params, sel, t) {
            Ok(s) => Ok(trace_distance_to_fixed(&s)),
            // the class-1 excitation probability itself is still defined
            Err(Error::DegenerateState { .. }) => Ok(T::zero()),
            Err(e) => Err(e),
        }
    };
    let trace_dist_delta = distance(t2)? - distance(t1)?;
    let flow_sign = ops.flow_weight;
    Ok(PositivityVerdict {
        flow_sign,
        choi_min_eig,
        trace_dist_delta,
        verdict: Verdict::from_nonnegative(flow_sign >= -T::lit(VERDICT_TOL)),
    })
}

/// Earliest start time `t` at which `Phi(t, t + dt)` stops being CP.
///
/// Located by bisection on the flow sign over `[0, P/2 - dt/4]`, which keeps
/// the bracket clear of the singular half-period start.
pub fn positivity_transition_time<T: Real>(params: &NetworkParams<T>, sel: SubsystemSelector, dt: T) -> Result<T> {
    sel.validate(params)?;
    let period = params.period();
    if !(dt > T::zero() && dt < period) {
        return Err(Error::InvalidParams(format!("dt must lie in (0, period), got {dt}")));
    }
    if sel.dyn_class == DynClass::Class1 && sel.k_qubits == params.n_qubits() {
        return Err(Error::Indeterminate(
            "the whole network evolves unitarily; the flow amplitude vanishes identically".into(),
        ));
    }
    let flow = |t: T| flow_amplitude(params, sel, t, t + dt);
    let half = T::lit(0.5);
    let mut lo = T::zero();
    let mut hi = half * period - dt / T::lit(4.0);
    if flow(lo)? <= T::zero() || flow(hi)? >= T::zero() {
        return Err(Error::Indeterminate("flow amplitude does not change sign in the bracket".into()));
    }
    let width = T::tol(1e-12) * period;
    while hi - lo > width {
        let mid = half * (lo + hi);
        if flow(mid)? > T::zero() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(half * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn params(n: usize) -> NetworkParams<f64> {
        NetworkParams::new(n, 1.0).unwrap()
    }

    #[test]
    fn identity_choi() {
        let ops = build_propagator(&params(5), SubsystemSelector::class1(1), 0.3, 0.3).unwrap();
        let c = choi_matrix(&ops);
        assert!(c.hermitian_residual() < 1e-14);
        assert_abs_diff_eq!(c.trace().re, 2.0, epsilon = 1e-14);
        let w = c.eigvalsh().unwrap();
        assert!(w[..3].iter().all(|x| x.abs() < 1e-12));
        assert_abs_diff_eq!(w[3], 2.0, epsilon = 1e-12);
    }

    #[test]
    fn choi_examples() {
        let p = params(5);
        let sel = SubsystemSelector::class1(1);
        let fwd = build_propagator(&p, sel, 0.0, PI / 5.0).unwrap();
        assert!(choi_spectrum(&fwd).unwrap()[0] >= -1e-10);
        let back = build_propagator(&p, sel, PI / 5.0, 2.0 * PI / 5.0).unwrap();
        let w = choi_spectrum(&back).unwrap();
        assert_abs_diff_eq!(w[0], -16.0 / 9.0, epsilon = 1e-10);
        assert!(w[1] >= -1e-10);
    }

    #[test]
    fn classify_examples() {
        let p = params(5);
        let period = p.period();
        for k in 1..=4 {
            for sel in [SubsystemSelector::class1(k), SubsystemSelector::class0(k)] {
                let same = classify(&p, sel, 0.7, 0.7).unwrap();
                assert_eq!(same.verdict, Verdict::PositiveAndCP);
                assert!(same.flow_sign.abs() < 1e-12 && same.trace_dist_delta.abs() < 1e-12);
                assert!(same.consistent());

                let early = classify(&p, sel, 0.2 * period, 0.25 * period).unwrap();
                assert_eq!(early.verdict, Verdict::PositiveAndCP);
                assert!(early.consistent());
                let late = classify(&p, sel, 0.6 * period, 0.65 * period).unwrap();
                assert_eq!(late.verdict, Verdict::NonPositiveNonCP);
                assert!(late.consistent());
            }
        }
    }

    #[test]
    fn transition_times() {
        let p = params(5);
        let period = p.period();
        for k in 1..=4 {
            for sel in [SubsystemSelector::class1(k), SubsystemSelector::class0(k)] {
                let t = positivity_transition_time(&p, sel, 0.05 * period).unwrap();
                assert!((t / period - 0.475).abs() <= 1e-10);
                let t = positivity_transition_time(&p, sel, 0.5 * period).unwrap();
                assert!((t / period - 0.25).abs() <= 1e-10);
                let t = positivity_transition_time(&p, sel, 1e-6 * period).unwrap();
                assert!((t / period - 0.5).abs() <= 1e-6);
            }
        }
        assert!(positivity_transition_time(&p, SubsystemSelector::class1(1), period).is_err());
        assert!(positivity_transition_time(&p, SubsystemSelector::class1(5), 0.1).is_err());
    }

    #[test]
    fn transition_at_equal_split() {
        let p = params(6);
        let period = p.period();
        let t = positivity_transition_time(&p, SubsystemSelector::class1(3), 0.05 * period).unwrap();
        assert!((t / period - 0.475).abs() <= 1e-10);
    }

    fn selector(n: usize, k_seed: usize, class1: bool) -> SubsystemSelector {
        if class1 {
            SubsystemSelector::class1(1 + k_seed % n)
        } else {
            SubsystemSelector::class0(1 + k_seed % (n - 1))
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(512))]

        #[test]
        fn three_indicators_agree(
            n in 2usize..9, k_seed in 0usize..64, class1 in any::<bool>(),
            t1 in -3.0f64..3.0, t2 in -3.0f64..3.0,
        ) {
            let p = params(n);
            let sel = selector(n, k_seed, class1);
            let v = match classify(&p, sel, t1, t2) {
                Ok(v) => v,
                Err(Error::Singular { .. }) => return Ok(()),
                Err(e) => panic!("{e}"),
            };
            // skip the tolerance band itself, where rounding decides
            prop_assume!(v.flow_sign.abs() > 1e-7);
            prop_assert!(v.consistent(), "{:?}", v);
        }

        #[test]
        fn negative_choi_eigenvalue_is_k_times_flow(
            n in 2usize..9, k_seed in 0usize..64, class1 in any::<bool>(),
            t1 in -3.0f64..3.0, t2 in -3.0f64..3.0,
        ) {
            let p = params(n);
            let sel = selector(n, k_seed, class1);
            let Ok(ops) = build_propagator(&p, sel, t1, t2) else { return Ok(()) };
            prop_assume!(ops.flow_weight < -1e-6);
            let w = choi_spectrum(&ops).unwrap();
            let scale = 1.0 + w.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            let k = sel.k_qubits as f64;
            let negatives = w.iter().filter(|x| **x < -1e-9 * scale).count();
            // the flow term's eigenvalue carries the multiplicity factor K
            let target = k * ops.flow_weight;
            prop_assert!(w.iter().any(|x| (x - target).abs() <= 1e-8 * scale));
            match sel.dyn_class {
                DynClass::Class1 => {
                    prop_assert_eq!(negatives, 1);
                    prop_assert!((w[0] - target).abs() <= 1e-8 * scale);
                }
                DynClass::Class0 => {
                    let expected = if sel.k_qubits + 1 < n { 2 } else { 1 };
                    prop_assert_eq!(negatives, expected);
                }
            }
        }

        #[test]
        fn whole_network_is_always_cp(n in 2usize..9, t1 in -3.0f64..3.0, t2 in -3.0f64..3.0) {
            let p = params(n);
            let Ok(v) = classify(&p, SubsystemSelector::class1(n), t1, t2) else { return Ok(()) };
            prop_assert!(v.flow_sign.abs() <= 1e-12);
            prop_assert_eq!(v.verdict, Verdict::PositiveAndCP);
        }
    }
}
