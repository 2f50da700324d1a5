//! Single-qubit (K = 1) propagators as affine maps of the Bloch vector.
//!
//! Convention: ground at `b_z = +1`, with `b_x = 2 Re rho_01`,
//! `b_y = -2 Im rho_01` and `b_z = rho_00 - rho_11`.

use crate::amplitudes::NetworkParams;
use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::propagator::build_propagator;
use crate::scalar::{c, cr, Real};
use crate::states::{excitation_probability, DynClass, SubsystemSelector};

pub type BlochVector<T> = [T; 3];

/// `b -> (s R(theta) b_perp, z_shift + z_scale b_z)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochAffineMap<T> {
    pub transverse_scale: T,
    pub rotation_angle: T,
    pub z_scale: T,
    pub z_shift: T,
    pub dyn_class: DynClass,
    pub t1: T,
    pub t2: T,
}

impl<T: Real> BlochAffineMap<T> {
    /// The invariant point: north pole for class 1, south pole for class 0.
    pub fn fixed_point(&self) -> BlochVector<T> {
        [T::zero(), T::zero(), fixed_z(self.dyn_class)]
    }
}

fn fixed_z<T: Real>(dyn_class: DynClass) -> T {
    match dyn_class {
        DynClass::Class1 => T::one(),
        DynClass::Class0 => -T::one(),
    }
}

/// Closed interval of `b_z` values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval<T> {
    pub lo: T,
    pub hi: T,
}

impl<T: Real> Interval<T> {
    pub fn contains(&self, x: T) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn contains_interval(&self, other: &Interval<T>) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    pub fn intersect(&self, other: &Interval<T>) -> Option<Interval<T>> {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        (lo <= hi).then_some(Interval { lo, hi })
    }
}

pub fn affine_map<T: Real>(params: &NetworkParams<T>, dyn_class: DynClass, t1: T, t2: T) -> Result<BlochAffineMap<T>> {
    let ops = build_propagator(params, SubsystemSelector::new(1, dyn_class), t1, t2)?;
    let map = match dyn_class {
        DynClass::Class1 => {
            let phi = ops.block_diag[(1, 1)];
            BlochAffineMap {
                transverse_scale: phi.norm(),
                rotation_angle: phi.arg(),
                z_scale: phi.norm_sqr(),
                z_shift: ops.flow_weight,
                dyn_class,
                t1,
                t2,
            }
        }
        DynClass::Class0 => {
            let phi = ops.block_diag[(0, 0)];
            BlochAffineMap {
                transverse_scale: phi.norm(),
                rotation_angle: -phi.arg(),
                z_scale: phi.norm_sqr() + ops.ground_extra.unwrap_or_else(T::zero),
                z_shift: -ops.flow_weight,
                dyn_class,
                t1,
                t2,
            }
        }
    };
    Ok(map)
}

pub fn evolve_bloch<T: Real>(map: &BlochAffineMap<T>, b: BlochVector<T>) -> BlochVector<T> {
    let (sin, cos) = map.rotation_angle.sin_cos();
    let s = map.transverse_scale;
    [
        s * (cos * b[0] - sin * b[1]),
        s * (sin * b[0] + cos * b[1]),
        map.z_shift + map.z_scale * b[2],
    ]
}

/// Axial inputs `(0, 0, b_z)` whose image stays in the ball, or `None` if
/// there are none.
pub fn axial_positivity_band<T: Real>(map: &BlochAffineMap<T>) -> Option<Interval<T>> {
    let one = T::one();
    let full = Interval { lo: -one, hi: one };
    let (a, s) = (map.z_shift, map.z_scale);
    let raw = if s.abs() <= T::tol(1e-300) {
        if a.abs() <= one {
            full
        } else {
            return None;
        }
    } else {
        let (x, y) = ((-one - a) / s, (one - a) / s);
        Interval { lo: x.min(y), hi: x.max(y) }
    };
    // the pole at the fixed point is always admissible; snap rounding there
    let snap = |x: T| {
        if (x.abs() - one).abs() <= T::tol(1e-12) {
            one.copysign(x)
        } else {
            x
        }
    };
    full.intersect(&Interval { lo: snap(raw.lo), hi: snap(raw.hi) })
}

/// `|Lambda b| <= 1` for an input inside the ball.
pub fn ball_membership<T: Real>(map: &BlochAffineMap<T>, b: BlochVector<T>) -> Result<bool> {
    let norm2 = b.iter().map(|x| *x * *x).sum::<T>();
    if norm2 > T::one() + T::tol(1e-12) {
        return Err(Error::InvalidParams(format!("Bloch vector outside the ball: |b|^2 = {norm2}")));
    }
    let s = map.transverse_scale;
    let z = map.z_shift + map.z_scale * b[2];
    Ok(s * s * (b[0] * b[0] + b[1] * b[1]) + z * z <= T::one() + T::tol(1e-12))
}

pub fn bloch_vector<T: Real>(rho: &CMatrix<T>) -> Result<BlochVector<T>> {
    if rho.rows() != 2 || rho.cols() != 2 {
        return Err(Error::Dimension {
            expected: 2,
            rows: rho.rows(),
            cols: rho.cols(),
        });
    }
    let two = T::lit(2.0);
    let r01 = rho[(0, 1)];
    Ok([two * r01.re, -two * r01.im, rho[(0, 0)].re - rho[(1, 1)].re])
}

pub fn density_from_bloch<T: Real>(b: BlochVector<T>) -> CMatrix<T> {
    let h = T::lit(0.5);
    CMatrix::from_fn(2, 2, |i, j| match (i, j) {
        (0, 0) => cr(h * (T::one() + b[2])),
        (1, 1) => cr(h * (T::one() - b[2])),
        (0, 1) => c(h * b[0], -h * b[1]),
        _ => c(h * b[0], h * b[1]),
    })
}

/// Bloch vector of the single-qubit reduced state at `t`; always on the z axis.
pub fn orbit_bloch_vector<T: Real>(params: &NetworkParams<T>, dyn_class: DynClass, t: T) -> Result<BlochVector<T>> {
    let p = excitation_probability(params, SubsystemSelector::new(1, dyn_class), t)?;
    let two = T::lit(2.0);
    let z = match dyn_class {
        DynClass::Class1 => T::one() - two * p,
        DynClass::Class0 => two * p - T::one(),
    };
    Ok([T::zero(), T::zero(), z])
}
