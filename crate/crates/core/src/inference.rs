//! Recovering network size and coupling from single-qubit observations.

use crate::amplitudes::{hop_prob, NetworkParams};
use crate::error::{Error, Result};
use crate::propagator::flow_amplitude;
use crate::scalar::Real;
use crate::states::{excitation_probability, SubsystemSelector};

/// Flows of one class-1 and one class-0 qubit over a common interval, plus
/// the ground probability of the class-0 qubit at the start.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowObservation<T> {
    pub flow_class1: T,
    pub flow_class0: T,
    pub ground_prob_t1: T,
}

impl<T: Real> FlowObservation<T> {
    pub fn new(flow_class1: T, flow_class0: T, ground_prob_t1: T) -> Result<Self> {
        if !(ground_prob_t1 > T::zero() && ground_prob_t1 <= T::one()) {
            return Err(Error::InvalidParams(format!(
                "ground probability must lie in (0, 1], got {ground_prob_t1}"
            )));
        }
        if !(flow_class1.is_finite() && flow_class0.is_finite()) {
            return Err(Error::InvalidParams("flows must be finite".into()));
        }
        Ok(Self {
            flow_class1,
            flow_class0,
            ground_prob_t1,
        })
    }
}

/// Simulated observation over `[t1, t2]`.
pub fn observe_flows<T: Real>(params: &NetworkParams<T>, t1: T, t2: T) -> Result<FlowObservation<T>> {
    FlowObservation::new(
        flow_amplitude(params, SubsystemSelector::class1(1), t1, t2)?,
        flow_amplitude(params, SubsystemSelector::class0(1), t1, t2)?,
        excitation_probability(params, SubsystemSelector::class0(1), t1)?,
    )
}

/// Both flows agree, as they must when the two qubits form a closed pair.
pub fn two_qubit_consistency<T: Real>(obs: &FlowObservation<T>, tol: T) -> bool {
    (obs.flow_class1 - obs.flow_class0).abs() <= tol
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SizeEstimate<T> {
    pub estimate: T,
    pub nearest: usize,
    /// `estimate - nearest`.
    pub residual: T,
}

/// Estimates below two by more than this are rejected.
const SIZE_SLACK: f64 = 1e-9;

/// `N = 1 + 1 / (1 - D (1/f0 - 1/f1))` with `D = f0 * p0(t1)` the change of
/// `|u_d|^2` read off the class-0 populations.
pub fn infer_network_size<T: Real>(obs: &FlowObservation<T>) -> Result<SizeEstimate<T>> {
    let tiny = T::tol(1e-15);
    if obs.flow_class0.abs() <= tiny || obs.flow_class1.abs() <= tiny {
        return Err(Error::Indeterminate("vanishing flow amplitude carries no size information".into()));
    }
    let delta = obs.flow_class0 * obs.ground_prob_t1;
    let bracket = delta * (T::one() / obs.flow_class0 - T::one() / obs.flow_class1);
    let estimate = T::one() + T::one() / (T::one() - bracket);
    if !estimate.is_finite() || estimate < T::lit(2.0 - SIZE_SLACK) {
        return Err(Error::Inconsistent(format!("size estimate {estimate} is not a network of two or more qubits")));
    }
    let rounded = estimate.round();
    let nearest = rounded
        .to_usize()
        .ok_or_else(|| Error::Inconsistent(format!("size estimate {estimate} out of range")))?;
    Ok(SizeEstimate {
        estimate,
        nearest,
        residual: estimate - rounded,
    })
}

/// `J = 2 pi / (N P)`.
pub fn infer_coupling<T: Real>(period_estimate: T, n_estimate: T) -> Result<T> {
    if !(period_estimate > T::zero() && period_estimate.is_finite()) {
        return Err(Error::InvalidParams(format!("period must be positive, got {period_estimate}")));
    }
    if !(n_estimate > T::one() && n_estimate.is_finite()) {
        return Err(Error::InvalidParams(format!("size must exceed one, got {n_estimate}")));
    }
    Ok(T::TAU() / (n_estimate * period_estimate))
}

/// `|(x2 - x1)(1/f0 - 1/f1) - (1 - 1/(N-K))|` for equal-size class pairs.
pub fn conservation_residual<T: Real>(params: &NetworkParams<T>, k_qubits: usize, t1: T, t2: T) -> Result<T> {
    let f1 = flow_amplitude(params, SubsystemSelector::class1(k_qubits), t1, t2)?;
    let f0 = flow_amplitude(params, SubsystemSelector::class0(k_qubits), t1, t2)?;
    let tiny = T::tol(1e-14);
    if f0.abs() <= tiny || f1.abs() <= tiny {
        return Err(Error::Indeterminate("both flows vanish over this interval".into()));
    }
    let lhs = (hop_prob(params, t2) - hop_prob(params, t1)) * (T::one() / f0 - T::one() / f1);
    let rest = params.n() - T::count(k_qubits);
    Ok((lhs - (T::one() - T::one() / rest)).abs())
}

/// Period from a windowed flow signal `t -> phi_tau(t, t + dt)`.
///
/// Scans `[0, horizon]` in `scan_steps` steps for the first sign change from
/// positive to non-positive, bisects it to `t*`, and returns `2 t* + dt`.
pub fn estimate_period<T: Real>(
    mut flow: impl FnMut(T) -> Result<T>,
    dt: T,
    horizon: T,
    scan_steps: usize,
) -> Result<T> {
    if !(dt > T::zero() && horizon > T::zero()) || scan_steps < 2 {
        return Err(Error::InvalidParams("need dt > 0, horizon > 0 and at least two scan steps".into()));
    }
    let h = horizon / T::count(scan_steps);
    let mut lo = T::zero();
    if flow(lo)? <= T::zero() {
        return Err(Error::Indeterminate("flow must start positive".into()));
    }
    let mut hi = None;
    for i in 1..=scan_steps {
        let t = h * T::count(i);
        if flow(t)? <= T::zero() {
            hi = Some(t);
            break;
        }
        lo = t;
    }
    let mut hi = hi.ok_or_else(|| Error::Indeterminate("no sign change within the horizon".into()))?;
    let half = T::lit(0.5);
    for _ in 0..200 {
        if hi - lo <= T::tol(1e-15) * hi {
            break;
        }
        let mid = half * (lo + hi);
        if flow(mid)? > T::zero() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(T::lit(2.0) * half * (lo + hi) + dt)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn params(n: usize, j: f64) -> NetworkParams<f64> {
        NetworkParams::new(n, j).unwrap()
    }

    #[test]
    fn consistency_examples() {
        let obs = FlowObservation::new(0.3, 0.3, 1.0).unwrap();
        assert!(two_qubit_consistency(&obs, 1e-12));
        let obs = observe_flows(&params(5, 1.0), 0.0, PI / 5.0).unwrap();
        assert_abs_diff_eq!(obs.flow_class1, 0.64, epsilon = 1e-14);
        assert_abs_diff_eq!(obs.flow_class0, 0.16, epsilon = 1e-14);
        assert!(!two_qubit_consistency(&obs, 1e-6));
        for (t1, t2) in [(0.1, 0.9), (1.3, 0.2), (-0.4, 2.2)] {
            let obs = observe_flows(&params(2, 1.0), t1, t2).unwrap();
            assert!(two_qubit_consistency(&obs, 1e-12));
        }
    }

    #[test]
    fn size_examples() {
        let obs = FlowObservation::new(0.64, 0.16, 1.0).unwrap();
        let est = infer_network_size(&obs).unwrap();
        assert_abs_diff_eq!(est.estimate, 5.0, epsilon = 1e-14);
        assert_eq!(est.nearest, 5);

        let obs = observe_flows(&params(8, 1.0), 0.0, PI / 8.0).unwrap();
        let est = infer_network_size(&obs).unwrap();
        assert!((est.estimate - 8.0).abs() <= 1e-9);

        let est = infer_network_size(&FlowObservation::new(0.3, 0.3, 0.7).unwrap()).unwrap();
        assert_eq!(est.estimate, 2.0);
    }

    #[test]
    fn size_errors() {
        let zero = FlowObservation::new(0.0, 0.1, 1.0).unwrap();
        assert!(matches!(infer_network_size(&zero), Err(Error::Indeterminate(_))));
        // class-0 flow larger than the class-1 flow points to fewer than two qubits
        let bad = FlowObservation::new(0.1, 0.3, 1.0).unwrap();
        assert!(matches!(infer_network_size(&bad), Err(Error::Inconsistent(_))));
        assert!(FlowObservation::new(0.1, 0.1, 0.0).is_err());
    }

    #[test]
    fn coupling_examples() {
        assert_abs_diff_eq!(infer_coupling(2.0 * PI / 5.0, 5.0).unwrap(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(infer_coupling(PI / 5.0, 5.0).unwrap(), 2.0, epsilon = 1e-15);
        assert!(infer_coupling(0.0, 5.0).is_err());
        assert!(infer_coupling(1.0, 1.0).is_err());
    }

    #[test]
    fn coupling_from_bisected_period() {
        let p = params(6, 0.7);
        let dt = 0.05 * p.period();
        let sel = SubsystemSelector::class1(1);
        let period = estimate_period(|t| flow_amplitude(&p, sel, t, t + dt), dt, 2.0 * p.period(), 200).unwrap();
        let j = infer_coupling(period, 6.0).unwrap();
        assert!((j - 0.7).abs() <= 1e-6, "{j}");
    }

    #[test]
    fn conservation_examples() {
        let p = params(5, 1.0);
        assert!(conservation_residual(&p, 1, 0.0, PI / 5.0).unwrap() <= 1e-12);
        assert!(conservation_residual(&params(6, 1.0), 2, 0.21, 1.37).unwrap() <= 1e-10);
        assert!(matches!(conservation_residual(&p, 1, 0.4, 0.4), Err(Error::Indeterminate(_))));
    }

    proptest! {
        #[test]
        fn size_round_trip(n in 3usize..13, j_idx in 0usize..3, t1 in 0.0f64..1.0, t2 in 0.0f64..1.0) {
            let p = params(n, [0.5, 1.0, 2.0][j_idx]);
            let (t1, t2) = (t1 * p.period(), t2 * p.period());
            prop_assume!((hop_prob(&p, t2) - hop_prob(&p, t1)).abs() > 1e-4);
            let est = infer_network_size(&observe_flows(&p, t1, t2).unwrap()).unwrap();
            prop_assert!((est.estimate - n as f64).abs() <= 1e-8);
            prop_assert_eq!(est.nearest, n);
        }

        #[test]
        fn only_pairs_are_closed(n in 2usize..9, t1 in 0.0f64..1.0, t2 in 0.0f64..1.0) {
            let p = params(n, 1.0);
            let (t1, t2) = (t1 * p.period(), t2 * p.period());
            prop_assume!((hop_prob(&p, t2) - hop_prob(&p, t1)).abs() > 1e-4);
            let Ok(obs) = observe_flows(&p, t1, t2) else { return Ok(()) };
            prop_assert_eq!(two_qubit_consistency(&obs, 1e-9), n == 2);
        }

        #[test]
        fn conservation_holds(n in 3usize..12, k_seed in 0usize..64, t1 in -3.0f64..3.0, t2 in -3.0f64..3.0) {
            let p = params(n, 1.0);
            let k = 1 + k_seed % (n - 1);
            prop_assume!((hop_prob(&p, t2) - hop_prob(&p, t1)).abs() > 1e-6);
            match conservation_residual(&p, k, t1, t2) {
                Ok(r) => prop_assert!(r <= 1e-10, "{}", r),
                Err(Error::Singular { .. }) => {}
                Err(e) => panic!("{e}"),
            }
        }
    }
}
