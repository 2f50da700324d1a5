//! Closed forms against the brute-force oracle on a fixed sample of times.

use std::io::Write;

use excitation_flow::fisher::{population_rate, DEFAULT_STEP};
use excitation_flow::inference::observe_flows;
use excitation_flow::positivity::choi_spectrum;
use excitation_flow::{
    amplitudes, apply, build_propagator, classify, compose_residual, conservation_residual, infer_network_size,
    materialize_density, process_state_split, propagator_oracle, q1_unitary_oracle, qfi_closed_form,
    qfi_numeric_oracle, reduced_density_oracle, reduced_state, CMatrix64, DynClass, Error, NetworkParams64,
    SubsystemSelector, Theta, C,
};

use crate::table::format_value;
use crate::CliError;

/// Suites that invert or diagonalize superoperators only run on subsystems
/// whose superoperator dimension `(K + 1)^2` stays within this bound.
const VERIFY_SUPEROP_DIM: usize = 64;

#[derive(Debug, Clone)]
pub struct Suite {
    pub name: &'static str,
    pub cases: usize,
    pub max_residual: f64,
    pub tolerance: f64,
}

impl Suite {
    fn new(name: &'static str, tolerance: f64) -> Self {
        Self {
            name,
            cases: 0,
            max_residual: 0.0,
            tolerance,
        }
    }

    fn add(&mut self, residual: f64) {
        self.cases += 1;
        // NaN counts as a failure
        if residual.is_nan() || residual > self.max_residual {
            self.max_residual = residual;
        }
    }

    pub fn passed(&self) -> bool {
        self.max_residual <= self.tolerance
    }
}

#[derive(Debug, Default)]
pub struct Report {
    pub suites: Vec<Suite>,
}

impl Report {
    pub fn failures(&self) -> usize {
        self.suites.iter().filter(|s| !s.passed()).count()
    }

    pub fn write(&self, out: &mut dyn Write) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["suite", "cases", "max_residual", "tolerance", "status"])?;
        for s in &self.suites {
            w.write_record([
                s.name.to_string(),
                s.cases.to_string(),
                format_value(s.max_residual),
                format_value(s.tolerance),
                if s.passed() { "pass" } else { "fail" }.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Sample times spread over two periods by golden-ratio stepping.
fn sample_times(p: &NetworkParams64) -> Vec<f64> {
    let golden = 0.5 * (5f64.sqrt() - 1.0);
    (0..16)
        .map(|i| p.time_from_periods(2.0 * ((i as f64 + 0.5) * golden).fract()))
        .collect()
}

fn sample_pairs(times: &[f64]) -> Vec<(f64, f64)> {
    times.windows(2).map(|w| (w[0], w[1])).chain([(times[3], times[0])]).collect()
}

/// Small, middle and extreme subsystem sizes.
fn sample_ks(n: usize) -> Vec<usize> {
    let mut ks = vec![1, 2, n / 2, n - 1, n];
    ks.retain(|&k| k >= 1 && k <= n);
    ks.sort_unstable();
    ks.dedup();
    ks
}

fn sample_selectors(n: usize) -> Vec<SubsystemSelector> {
    let ks = sample_ks(n);
    let mut sels: Vec<_> = ks.iter().map(|&k| SubsystemSelector::class1(k)).collect();
    sels.extend(ks.iter().filter(|&&k| k < n).map(|&k| SubsystemSelector::class0(k)));
    sels
}

fn ground(dim: usize) -> CMatrix64 {
    let mut g = CMatrix64::zeros(dim, dim);
    g[(0, 0)] = C::new(1.0, 0.0);
    g
}

fn state(p: &NetworkParams64, sel: SubsystemSelector, t: f64) -> Result<CMatrix64, Error> {
    match reduced_state(p, sel, t) {
        Ok(s) => Ok(materialize_density(&s)),
        Err(Error::DegenerateState { .. }) => Ok(ground(sel.dim())),
        Err(e) => Err(e),
    }
}

fn usage(e: Error) -> CliError {
    CliError::Usage(e.to_string())
}

pub fn run(p: &NetworkParams64) -> Result<Report, CliError> {
    let n = p.n_qubits();
    let times = sample_times(p);
    let pairs = sample_pairs(&times);
    let sels = sample_selectors(n);
    let mut report = Report::default();

    let mut unitarity = Suite::new("unitarity", 1e-12);
    let mut amp = Suite::new("amplitude_oracle", 1e-9);
    for &t in &times {
        let a = amplitudes(p, t);
        let (r1, r2) = a.unitarity_residuals(n);
        unitarity.add(r1.abs().max(r2.abs()));
        let u = q1_unitary_oracle(p, t).map_err(usage)?;
        let mut worst = 0.0f64;
        for r in 0..n {
            for c in 0..n {
                let want = if r == c { a.same_site } else { a.cross_site };
                worst = worst.max((u[(r, c)] - want).norm());
            }
        }
        amp.add(worst);
    }
    report.suites.extend([unitarity, amp]);

    let mut states = Suite::new("reduced_state_oracle", 1e-9);
    for &sel in &sels {
        for &t in &times {
            let oracle = reduced_density_oracle(p, sel, t).map_err(usage)?;
            states.add(state(p, sel, t).map_err(usage)?.max_abs_diff(&oracle));
        }
    }
    report.suites.push(states);

    let mut tomo = Suite::new("propagator_oracle_class1", 1e-8);
    let mut orbit0 = Suite::new("propagator_orbit_class0", 1e-9);
    let mut compose = Suite::new("composition", 1e-8);
    for &sel in &sels {
        let small = sel.dim() * sel.dim() <= VERIFY_SUPEROP_DIM;
        for &(t1, t2) in &pairs {
            let ops = match build_propagator(p, sel, t1, t2) {
                Ok(ops) => ops,
                Err(Error::Singular { .. }) => continue,
                Err(e) => return Err(usage(e)),
            };
            match sel.dyn_class {
                DynClass::Class1 if sel.k_qubits < n && small => {
                    let oracle = propagator_oracle(p, sel, t1, t2).map_err(usage)?;
                    tomo.add(ops.superoperator().max_abs_diff(&oracle));
                    let d = sel.dim();
                    let mixed = CMatrix64::identity(d).scale(C::new(1.0 / d as f64, 0.0));
                    compose.add(compose_residual(p, sel, t1, t2, &mixed).map_err(usage)?);
                }
                DynClass::Class0 => {
                    let out = apply(&ops, &state(p, sel, t1).map_err(usage)?).map_err(usage)?;
                    orbit0.add(out.max_abs_diff(&reduced_density_oracle(p, sel, t2).map_err(usage)?));
                }
                _ => {}
            }
        }
    }
    report.suites.extend([tomo, orbit0, compose]);

    let mut verdicts = Suite::new("positivity_verdicts", 0.0);
    let mut choi = Suite::new("choi_flow_eigenvalue", 1e-8);
    for &sel in sels.iter().filter(|s| s.dim() * s.dim() <= VERIFY_SUPEROP_DIM) {
        for &(t1, t2) in &pairs {
            let v = match classify(p, sel, t1, t2) {
                Ok(v) => v,
                Err(Error::Singular { .. }) => continue,
                Err(e) => return Err(usage(e)),
            };
            verdicts.add(if v.consistent() { 0.0 } else { 1.0 });
            if v.flow_sign < -1e-6 {
                let spectrum = choi_spectrum(&build_propagator(p, sel, t1, t2).map_err(usage)?).map_err(usage)?;
                let target = sel.k_qubits as f64 * v.flow_sign;
                let scale = 1.0 + spectrum.iter().fold(0.0f64, |m, x| m.max(x.abs()));
                let gap = spectrum.iter().map(|x| (x - target).abs()).fold(f64::INFINITY, f64::min);
                choi.add(gap / scale);
            }
        }
    }
    report.suites.extend([verdicts, choi]);

    let mut fisher = Suite::new("fisher_oracle", 1e-4);
    for &sel in &sels {
        for theta in [Theta::CouplingJ, Theta::SizeN] {
            for &t in &times {
                let closed = match qfi_closed_form(p, sel, theta, t) {
                    Ok(f) => f.total,
                    Err(Error::Divergent(_)) => continue,
                    Err(e) => return Err(usage(e)),
                };
                let oracle = qfi_numeric_oracle(p, sel, theta, t, DEFAULT_STEP).map_err(usage)?;
                let gap = (closed - oracle).abs();
                fisher.add(if gap <= 1e-8 { 0.0 } else { gap / closed.abs() });
            }
        }
    }
    report.suites.push(fisher);

    let mut split = Suite::new("process_state_split", 1e-9);
    for class in [DynClass::Class1, DynClass::Class0] {
        for theta in [Theta::CouplingJ, Theta::SizeN] {
            for &(t1, t2) in &pairs {
                let s = match process_state_split(p, class, t1, t2, theta, true) {
                    Ok(s) => s,
                    Err(Error::Singular { .. }) => continue,
                    Err(e) => return Err(usage(e)),
                };
                let rate = population_rate(p, class, t2, theta);
                split.add((s.total - rate * rate).abs() / (1.0 + rate * rate));
            }
        }
    }
    report.suites.push(split);

    let mut conservation = Suite::new("flow_conservation", 1e-9);
    for k in sample_ks(n).into_iter().filter(|&k| k < n) {
        for &(t1, t2) in &pairs {
            match conservation_residual(p, k, t1, t2) {
                Ok(r) => conservation.add(r),
                Err(Error::Singular { .. } | Error::Indeterminate(_)) => {}
                Err(e) => return Err(usage(e)),
            }
        }
    }
    report.suites.push(conservation);

    let mut size = Suite::new("size_inference", 1e-6);
    for &(t1, t2) in &pairs {
        let hop = |t| amplitudes(p, t).hop_prob();
        if (hop(t2) - hop(t1)).abs() <= 1e-4 {
            continue;
        }
        let obs = match observe_flows(p, t1, t2) {
            Ok(obs) => obs,
            Err(Error::Singular { .. }) => continue,
            Err(e) => return Err(usage(e)),
        };
        match infer_network_size(&obs) {
            Ok(est) => size.add((est.estimate - n as f64).abs()),
            Err(_) => size.add(f64::INFINITY),
        }
    }
    report.suites.push(size);

    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn samples_avoid_degenerate_choices() {
        assert_eq!(sample_ks(2), vec![1, 2]);
        assert_eq!(sample_ks(9), vec![1, 2, 4, 8, 9]);
        let p = NetworkParams64::new(5, 1.0).unwrap();
        let times = sample_times(&p);
        assert_eq!(times.len(), 16);
        assert_eq!(sample_pairs(&times).len(), 16);
    }

    #[test]
    fn all_suites_pass_for_small_networks() {
        for n in [2, 3, 4, 5] {
            let report = run(&NetworkParams64::new(n, 1.0).unwrap()).unwrap();
            for s in &report.suites {
                assert!(s.passed(), "n = {n}: {s:?}");
            }
        }
    }

    #[test]
    fn nan_residual_fails() {
        let mut s = Suite::new("x", 1.0);
        s.add(0.5);
        s.add(f64::NAN);
        assert!(!s.passed());
    }
}
