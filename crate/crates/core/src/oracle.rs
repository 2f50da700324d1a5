//! Brute-force reference computations on the global q <= 1 sector.
//!
//! The global q <= 1 basis is indexed `0` for the vacuum and `1 + i` for an
//! excitation on site `i`. A subsystem is a list of sites; its local basis
//! is ground first, then one excitation per listed site, matching the
//! ordering used everywhere else in the crate.

use crate::amplitudes::{q1_unitary_oracle, NetworkParams};
use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::propagator::{is_singular, PINV_CUTOFF};
use crate::scalar::{cr, Real, C};
use crate::states::{DynClass, SubsystemSelector};

/// Largest network for tomographic map reconstruction.
pub const MAX_MAP_QUBITS: usize = 512;

/// A vector in the global q <= 1 sector. Need not be normalized.
#[derive(Debug, Clone, PartialEq)]
pub struct GlobalVector<T> {
    pub q0_amp: C<T>,
    pub q1_amps: Vec<C<T>>,
    pub n_qubits: usize,
}

impl<T: Real> GlobalVector<T> {
    /// Basis vector `index` in the `0 = vacuum, 1 + i = site i` numbering.
    pub fn basis(n_qubits: usize, index: usize) -> Self {
        let mut v = Self {
            q0_amp: cr(T::zero()),
            q1_amps: vec![cr(T::zero()); n_qubits],
            n_qubits,
        };
        if index == 0 {
            v.q0_amp = cr(T::one());
        } else {
            v.q1_amps[index - 1] = cr(T::one());
        }
        v
    }

    pub fn norm_sqr(&self) -> T {
        self.q0_amp.norm_sqr() + self.q1_amps.iter().map(|x| x.norm_sqr()).sum::<T>()
    }

    /// Applies `1 (+) u` where `u` acts on the q=1 block.
    pub fn evolve(&self, q1_block: &CMatrix<T>) -> Self {
        Self {
            q0_amp: self.q0_amp,
            q1_amps: q1_block.matvec(&self.q1_amps),
            n_qubits: self.n_qubits,
        }
    }

    /// `(local index, environment label)` pairs with amplitudes. The
    /// environment label is `None` for the environment vacuum.
    fn split(&self, local_of: &[Option<usize>]) -> Vec<(usize, Option<usize>, C<T>)> {
        let mut out = vec![(0, None, self.q0_amp)];
        for (site, amp) in self.q1_amps.iter().enumerate() {
            match local_of[site] {
                Some(l) => out.push((l, None, *amp)),
                None => out.push((0, Some(site), *amp)),
            }
        }
        out
    }
}

fn local_index(n_qubits: usize, sites: &[usize]) -> Result<Vec<Option<usize>>> {
    let mut local_of = vec![None; n_qubits];
    for (a, &s) in sites.iter().enumerate() {
        if s >= n_qubits || local_of[s].is_some() {
            return Err(Error::InvalidParams(format!("bad subsystem site list {sites:?}")));
        }
        local_of[s] = Some(a + 1);
    }
    Ok(local_of)
}

/// `Tr_E |a><b|` onto the listed sites.
pub fn partial_trace_outer<T: Real>(a: &GlobalVector<T>, b: &GlobalVector<T>, sites: &[usize]) -> Result<CMatrix<T>> {
    if a.n_qubits != b.n_qubits {
        return Err(Error::InvalidParams("global vectors of different sizes".into()));
    }
    let local_of = local_index(a.n_qubits, sites)?;
    let d = sites.len() + 1;
    let mut out = CMatrix::zeros(d, d);
    let sa = a.split(&local_of);
    let sb = b.split(&local_of);
    // only vacuum-environment terms can pair across different local indices
    for (la, ea, xa) in &sa {
        for (lb, eb, xb) in &sb {
            if ea == eb {
                out[(*la, *lb)] += *xa * xb.conj();
            }
        }
    }
    Ok(out)
}

/// Sites of the chosen subsystem: the first K for class 1, the last K for
/// class 0 (never site 0, which starts excited).
pub fn subsystem_sites(n_qubits: usize, sel: SubsystemSelector) -> Vec<usize> {
    match sel.dyn_class {
        DynClass::Class1 => (0..sel.k_qubits).collect(),
        DynClass::Class0 => (n_qubits - sel.k_qubits..n_qubits).collect(),
    }
}

fn size_guard(n: usize, limit: usize, what: &'static str) -> Result<()> {
    if n > limit {
        return Err(Error::SizeLimit { what, value: n, limit });
    }
    Ok(())
}

/// Reduced state of the generating state evolved with the numerically
/// exponentiated q=1 block.
pub fn reduced_density_oracle<T: Real>(params: &NetworkParams<T>, sel: SubsystemSelector, t: T) -> Result<CMatrix<T>> {
    sel.validate(params)?;
    let n = params.n_qubits();
    let u = q1_unitary_oracle(params, t)?;
    let psi = GlobalVector::basis(n, 1).evolve(&u);
    partial_trace_outer(&psi, &psi, &subsystem_sites(n, sel))
}

/// Tomographic reconstruction of `Phi(0, t)` for class 1, as a matrix on
/// row-major vectorized local operators.
pub fn dynamical_map_oracle<T: Real>(params: &NetworkParams<T>, sel: SubsystemSelector, t: T) -> Result<CMatrix<T>> {
    sel.validate(params)?;
    if sel.dyn_class != DynClass::Class1 {
        return Err(Error::Unsupported(
            "class-0 tomography would leave the q <= 1 global sector".into(),
        ));
    }
    let n = params.n_qubits();
    size_guard(n, MAX_MAP_QUBITS, "n_qubits")?;
    let u = q1_unitary_oracle(params, t)?;
    let sites = subsystem_sites(n, sel);
    let d = sites.len() + 1;
    // evolved images of the local basis embedded with the environment in vacuum
    let images: Vec<GlobalVector<T>> = (0..d)
        .map(|mu| {
            let global = if mu == 0 { 0 } else { 1 + sites[mu - 1] };
            GlobalVector::basis(n, global).evolve(&u)
        })
        .collect();
    let mut map = CMatrix::zeros(d * d, d * d);
    for mu in 0..d {
        for nu in 0..d {
            let out = partial_trace_outer(&images[mu], &images[nu], &sites)?;
            for i in 0..d {
                for j in 0..d {
                    map[(i * d + j, mu * d + nu)] = out[(i, j)];
                }
            }
        }
    }
    Ok(map)
}

/// `Phi(0, t2) Phi(0, t1)^+` from the tomographic maps.
pub fn propagator_oracle<T: Real>(params: &NetworkParams<T>, sel: SubsystemSelector, t1: T, t2: T) -> Result<CMatrix<T>> {
    sel.validate(params)?;
    if sel.dyn_class != DynClass::Class1 {
        return Err(Error::Unsupported(
            "class-0 tomography would leave the q <= 1 global sector".into(),
        ));
    }
    if is_singular(params, sel.k_qubits, t1) {
        return Err(Error::Singular { t1: t1.as_f64() });
    }
    let m1 = dynamical_map_oracle(params, sel, t1)?;
    let m2 = dynamical_map_oracle(params, sel, t2)?;
    Ok(m2.matmul(&m1.pinv(T::lit(PINV_CUTOFF))?))
}
