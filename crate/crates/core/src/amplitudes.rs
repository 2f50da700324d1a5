//! Single-excitation amplitudes of the all-to-all network.
//!
//! The global unitary conserves the excitation number, and in the one
//! excitation block it has only two distinct entries: `u_s` (the excitation
//! stays on its qubit) and `u_d` (it hops to a given other qubit). The phases
//! of the remaining charge sectors are fixed to one throughout the crate.

use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::scalar::{c, cr, Real, C};

/// Largest network for which the dense q=1 exponential is attempted.
pub const MAX_ORACLE_QUBITS: usize = 2048;

/// Global network: `N` qubits with homogeneous coupling `J`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NetworkParams<T> {
    n_qubits: usize,
    coupling: T,
}

impl<T: Real> NetworkParams<T> {
    pub fn new(n_qubits: usize, coupling: T) -> Result<Self> {
        if n_qubits < 2 {
            return Err(Error::InvalidParams(format!("n_qubits must be >= 2, got {n_qubits}")));
        }
        if !(coupling.is_finite() && coupling > T::zero()) {
            return Err(Error::InvalidParams(format!(
                "coupling must be finite and positive, got {coupling}"
            )));
        }
        Ok(Self { n_qubits, coupling })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn coupling(&self) -> T {
        self.coupling
    }

    /// `N` as a scalar.
    pub fn n(&self) -> T {
        T::count(self.n_qubits)
    }

    /// Oscillation period `2 pi / (N J)`.
    pub fn period(&self) -> T {
        T::TAU() / (self.n() * self.coupling)
    }

    /// Converts a time in period units to raw time.
    pub fn time_from_periods(&self, periods: T) -> T {
        periods * self.period()
    }

    /// Converts raw time to period units.
    pub fn periods_from_time(&self, t: T) -> T {
        t / self.period()
    }
}

/// The pair `(u_s, u_d)` at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Amplitudes<T> {
    pub same_site: C<T>,
    pub cross_site: C<T>,
}

impl<T: Real> Amplitudes<T> {
    /// `|u_d|^2`, the quantity every observable in the crate reduces to.
    pub fn hop_prob(&self) -> T {
        self.cross_site.norm_sqr()
    }

    /// Residuals of the two unitarity constraints of the q=1 block:
    /// `|u_s|^2 + (N-1)|u_d|^2 - 1` and `2 Re(u_s* u_d) + (N-2)|u_d|^2`.
    pub fn unitarity_residuals(&self, n_qubits: usize) -> (T, T) {
        let n = T::count(n_qubits);
        let d2 = self.hop_prob();
        let norm = self.same_site.norm_sqr() + (n - T::one()) * d2 - T::one();
        let orth = T::lit(2.0) * (self.same_site.conj() * self.cross_site).re + (n - T::lit(2.0)) * d2;
        (norm, orth)
    }
}

/// Closed-form amplitudes for a possibly non-integer network size.
///
/// Used wherever `N` is treated as a continuous parameter (Fisher information
/// with respect to the network size).
pub fn amplitudes_continuous<T: Real>(n: T, coupling: T, t: T) -> Amplitudes<T> {
    let phase = C::from_polar(T::one(), n * coupling * t);
    let one = cr(T::one());
    Amplitudes {
        same_site: (one + phase * cr(n - T::one())) / cr(n),
        cross_site: (one - phase) / cr(n),
    }
}

/// `u_s = (1 + (N-1) e^{iNJt}) / N`, `u_d = (1 - e^{iNJt}) / N`.
pub fn amplitudes<T: Real>(params: &NetworkParams<T>, t: T) -> Amplitudes<T> {
    amplitudes_continuous(params.n(), params.coupling(), t)
}

/// `|u_d(t)|^2 = (4/N^2) sin^2(NJt/2)` evaluated without complex arithmetic.
pub fn hop_prob<T: Real>(params: &NetworkParams<T>, t: T) -> T {
    let n = params.n();
    let s = (n * params.coupling() * t / T::lit(2.0)).sin();
    T::lit(4.0) * s * s / (n * n)
}

/// Numerically exponentiated q=1 block of the global unitary.
///
/// The generator is the XX hopping matrix (every off-diagonal entry `J`),
/// shifted by the constant `-(N-1) J` on the diagonal. The shift is a sector
/// phase and makes the result match the closed-form amplitudes exactly
/// rather than up to a global phase.
pub fn q1_unitary_oracle<T: Real>(params: &NetworkParams<T>, t: T) -> Result<CMatrix<T>> {
    let n = params.n_qubits();
    if n > MAX_ORACLE_QUBITS {
        return Err(Error::SizeLimit {
            what: "n_qubits",
            value: n,
            limit: MAX_ORACLE_QUBITS,
        });
    }
    let j = params.coupling();
    let diag = -(params.n() - T::one()) * j;
    let generator = CMatrix::from_fn(n, n, |a, b| if a == b { cr(diag) } else { cr(j) });
    generator.expm_hermitian(t)
}

/// Amplitudes of `|psi(t)>` in the q=1 basis, excitation initially on site 0.
pub fn global_state<T: Real>(params: &NetworkParams<T>, t: T) -> Vec<C<T>> {
    let amps = amplitudes(params, t);
    let mut v = vec![amps.cross_site; params.n_qubits()];
    v[0] = amps.same_site;
    v
}

/// `d u_s / dt` and `d u_d / dt`, used to report limit directions at
/// degenerate points.
pub(crate) fn amplitude_rates<T: Real>(params: &NetworkParams<T>, t: T) -> (C<T>, C<T>) {
    let n = params.n();
    let w = n * params.coupling();
    let phase = C::from_polar(T::one(), w * t);
    let i_w = c(T::zero(), w);
    (i_w * phase * cr((n - T::one()) / n), -i_w * phase / cr(n))
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
    fn rejects_bad_params() {
        assert!(NetworkParams::new(1, 1.0).is_err());
        assert!(NetworkParams::new(3, 0.0).is_err());
        assert!(NetworkParams::new(3, f64::NAN).is_err());
        assert!(NetworkParams::new(3, -1.0).is_err());
    }

    #[test]
    fn identity_at_zero() {
        let a = amplitudes(&params(5, 1.0), 0.0);
        assert_eq!(a.same_site, cr(1.0));
        assert_eq!(a.cross_site, cr(0.0));
    }

    #[test]
    fn half_period_values() {
        let a = amplitudes(&params(5, 1.0), PI / 5.0);
        assert_abs_diff_eq!(a.same_site.re, -0.6, epsilon = 1e-15);
        assert_abs_diff_eq!(a.same_site.im, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(a.cross_site.re, 0.4, epsilon = 1e-15);
        assert_abs_diff_eq!(a.cross_site.im, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn quarter_period_values() {
        let a = amplitudes(&params(5, 1.0), PI / 10.0);
        assert!((a.same_site - c(0.2, 0.8)).norm() < 1e-15);
        assert!((a.cross_site - c(0.2, -0.2)).norm() < 1e-15);
        assert_abs_diff_eq!(a.same_site.norm_sqr(), 17.0 / 25.0, epsilon = 1e-15);
        assert_abs_diff_eq!(a.hop_prob(), 2.0 / 25.0, epsilon = 1e-15);
    }

    #[test]
    fn oracle_identity_at_zero_and_half_period() {
        let p = params(5, 1.0);
        let u0 = q1_unitary_oracle(&p, 0.0).unwrap();
        assert!(u0.max_abs_diff(&CMatrix::identity(5)) < 1e-12);
        let u = q1_unitary_oracle(&p, PI / 5.0).unwrap();
        for i in 0..5 {
            for j in 0..5 {
                let want = if i == j { -0.6 } else { 0.4 };
                assert!((u[(i, j)] - cr(want)).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn oracle_is_unitary() {
        let u = q1_unitary_oracle(&params(3, 2.0), 0.731).unwrap();
        let r = u.adjoint().matmul(&u).max_abs_diff(&CMatrix::identity(3));
        assert!(r <= 1e-9);
    }

    #[test]
    fn oracle_size_guard() {
        let p = params(MAX_ORACLE_QUBITS + 1, 1.0);
        assert!(matches!(q1_unitary_oracle(&p, 0.1), Err(Error::SizeLimit { .. })));
    }

    #[test]
    fn global_state_examples() {
        let p = params(5, 1.0);
        assert_eq!(global_state(&p, 0.0)[0], cr(1.0));
        let v = global_state(&p, PI / 5.0);
        assert!((v[0] - cr(-0.6)).norm() < 1e-15);
        assert!(v[1..].iter().all(|x| (*x - cr(0.4)).norm() < 1e-15));
    }

    #[test]
    fn rates_match_finite_difference() {
        let p = params(4, 0.8);
        let (t, h) = (0.37, 1e-6);
        let (ds, dd) = amplitude_rates(&p, t);
        let a = amplitudes(&p, t + h);
        let b = amplitudes(&p, t - h);
        assert!((ds - (a.same_site - b.same_site) / cr(2.0 * h)).norm() < 1e-8);
        assert!((dd - (a.cross_site - b.cross_site) / cr(2.0 * h)).norm() < 1e-8);
    }

    #[test]
    fn single_precision_amplitudes() {
        let p = NetworkParams::<f32>::new(5, 1.0).unwrap();
        let a = amplitudes(&p, std::f32::consts::PI / 5.0);
        assert!((a.same_site.re + 0.6).abs() < 1e-6);
        let (r1, r2) = a.unitarity_residuals(5);
        assert!(r1.abs() < 1e-6 && r2.abs() < 1e-6);
    }

    proptest! {
        #[test]
        fn unitarity_and_periodicity(n in 2usize..40, j in 0.05f64..5.0, t in -50.0f64..50.0) {
            let p = params(n, j);
            let a = amplitudes(&p, t);
            let (r1, r2) = a.unitarity_residuals(n);
            prop_assert!(r1.abs() <= 1e-12 && r2.abs() <= 1e-12);
            let b = amplitudes(&p, t + p.period());
            // phase rounding grows with |NJt|
            let tol = 1e-14 * (1.0 + (n as f64 * j * t).abs());
            prop_assert!((a.same_site - b.same_site).norm() <= tol);
            prop_assert!((a.cross_site - b.cross_site).norm() <= tol);
            prop_assert!((a.hop_prob() - hop_prob(&p, t)).abs() <= 1e-14);
        }

        #[test]
        fn global_state_is_normalized(n in 2usize..40, t in -20.0f64..20.0) {
            let v = global_state(&params(n, 1.0), t);
            let norm: f64 = v.iter().map(|x| x.norm_sqr()).sum();
            prop_assert!((norm - 1.0).abs() <= 1e-12);
        }
    }
}
