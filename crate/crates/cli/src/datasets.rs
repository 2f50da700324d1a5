//! One CSV table per subcommand. Times are in periods `2 pi / (N J)`.

use std::collections::BTreeMap;

use excitation_flow::bloch::orbit_bloch_vector;
use excitation_flow::fisher::population_rate;
use excitation_flow::inference::{estimate_period, observe_flows};
use excitation_flow::{
    affine_map, axial_positivity_band, entanglement_entropy, evolve_bloch, flow_amplitude,
    infer_coupling, infer_network_size, process_state_split, qfi_closed_form, DynClass, Error, NetworkParams64,
    SubsystemSelector, Theta,
};

use crate::table::Table;
use crate::{lib_error, CliError};

/// Uniform grid of `steps + 1` points over `[lo, hi]` periods.
#[derive(Debug, Clone, Copy)]
pub struct Grid {
    pub lo: f64,
    pub hi: f64,
    pub steps: usize,
}

impl Grid {
    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..=self.steps).map(|i| self.lo + (self.hi - self.lo) * (i as f64 / self.steps as f64))
    }
}

/// Counts cells left empty per column so each problem is reported once.
#[derive(Default)]
struct Gaps(BTreeMap<String, (usize, f64, String)>);

impl Gaps {
    fn record(&mut self, column: &str, t: f64, e: &Error) {
        let reason = match e {
            Error::Singular { .. } => "singular start".to_string(),
            other => other.to_string(),
        };
        self.0
            .entry(column.to_string())
            .and_modify(|(count, _, _)| *count += 1)
            .or_insert((1, t, reason));
    }

    fn into_notes(self) -> Vec<String> {
        self.0
            .into_iter()
            .map(|(col, (count, first, reason))| {
                format!("{col}: {count} cell(s) set to NaN ({reason}), first at t = {first} periods")
            })
            .collect()
    }
}

fn class_tag(c: DynClass) -> u8 {
    c.label()
}

pub fn amplitudes(p: &NetworkParams64, grid: &Grid) -> Table {
    let header = ["t_over_period", "u_same_re", "u_same_im", "u_cross_re", "u_cross_im", "hop_prob"];
    let mut table = Table::new(header.iter().map(|s| s.to_string()).collect());
    for t in grid.points() {
        let a = excitation_flow::amplitudes(p, p.time_from_periods(t));
        table.push(vec![
            t,
            a.same_site.re,
            a.same_site.im,
            a.cross_site.re,
            a.cross_site.im,
            a.hop_prob(),
        ]);
    }
    table
}

/// Selectors in output order, dropping class-0 subsystems that would cover
/// the whole network.
fn selectors(p: &NetworkParams64, ks: &[usize], classes: &[DynClass], notes: &mut Vec<String>) -> Vec<SubsystemSelector> {
    let mut out = Vec::new();
    for &class in classes {
        for &k in ks {
            if class == DynClass::Class0 && k >= p.n_qubits() {
                notes.push(format!("class 0 needs K < N; skipped K = {k}"));
                continue;
            }
            out.push(SubsystemSelector::new(k, class));
        }
    }
    out
}

pub fn flow(p: &NetworkParams64, grid: &Grid, ks: &[usize], classes: &[DynClass], dt: f64) -> Table {
    let mut notes = Vec::new();
    let sels = selectors(p, ks, classes, &mut notes);
    let names: Vec<String> = sels
        .iter()
        .map(|s| format!("phi_tau_c{}_k{}", class_tag(s.dyn_class), s.k_qubits))
        .collect();
    let mut header = vec!["t_over_period".to_string()];
    header.extend(names.iter().cloned());
    let mut table = Table::new(header);
    let mut gaps = Gaps::default();
    for t in grid.points() {
        let mut row = vec![t];
        for (sel, name) in sels.iter().zip(&names) {
            let v = flow_amplitude(p, *sel, p.time_from_periods(t), p.time_from_periods(t + dt));
            row.push(v.unwrap_or_else(|e| {
                gaps.record(name, t, &e);
                f64::NAN
            }));
        }
        table.push(row);
    }
    table.notes = notes;
    table.notes.extend(gaps.into_notes());
    table
}

const AXIAL_INPUTS: [(f64, &str); 5] = [(-1.0, "m1"), (-0.5, "m0.5"), (0.0, "0"), (0.5, "0.5"), (1.0, "1")];

/// `Lambda(t1, t)` with `t1` the grid start, applied to axial inputs, next
/// to the physical orbit.
pub fn bloch_traj(p: &NetworkParams64, grid: &Grid, classes: &[DynClass]) -> Result<Table, CliError> {
    let mut header = vec!["t_over_period".to_string()];
    for &c in classes {
        let c = class_tag(c);
        header.extend(AXIAL_INPUTS.iter().map(|(_, l)| format!("bz_c{c}_from_{l}")));
        header.push(format!("bz_c{c}_orbit"));
        header.push(format!("transverse_scale_c{c}"));
    }
    let mut table = Table::new(header);
    let t1 = p.time_from_periods(grid.lo);
    for t in grid.points() {
        let tt = p.time_from_periods(t);
        let mut row = vec![t];
        for &c in classes {
            let map = affine_map(p, c, t1, tt).map_err(|e| lib_error(e, p.period()))?;
            row.extend(AXIAL_INPUTS.iter().map(|(z, _)| evolve_bloch(&map, [0.0, 0.0, *z])[2]));
            row.push(orbit_bloch_vector(p, c, tt).map_err(|e| lib_error(e, p.period()))?[2]);
            row.push(map.transverse_scale);
        }
        table.push(row);
    }
    Ok(table)
}

/// Axial inputs kept physical by `Lambda(t, t + dt)`; NaN bounds mark an
/// empty band.
pub fn bloch_domain(p: &NetworkParams64, grid: &Grid, classes: &[DynClass], dt: f64) -> Table {
    let mut header = vec!["t_over_period".to_string()];
    for &c in classes {
        let c = class_tag(c);
        for name in ["band_lo", "band_hi", "phi_tau", "bz_orbit"] {
            header.push(format!("{name}_c{c}"));
        }
    }
    let mut table = Table::new(header);
    let mut gaps = Gaps::default();
    for t in grid.points() {
        let (ta, tb) = (p.time_from_periods(t), p.time_from_periods(t + dt));
        let mut row = vec![t];
        for &c in classes {
            match affine_map(p, c, ta, tb) {
                Ok(map) => {
                    let band = axial_positivity_band(&map);
                    row.push(band.map_or(f64::NAN, |b| b.lo));
                    row.push(band.map_or(f64::NAN, |b| b.hi));
                    row.push(match c {
                        DynClass::Class1 => map.z_shift,
                        DynClass::Class0 => -map.z_shift,
                    });
                }
                Err(e) => {
                    gaps.record(&format!("band_c{}", class_tag(c)), t, &e);
                    row.extend([f64::NAN; 3]);
                }
            }
            row.push(orbit_bloch_vector(p, c, ta).map_or(f64::NAN, |b| b[2]));
        }
        table.push(row);
    }
    table.notes = gaps.into_notes();
    table
}

pub fn entropy(p: &NetworkParams64, grid: &Grid, ks: &[usize], class: DynClass) -> Result<Table, CliError> {
    let sels: Vec<_> = ks.iter().map(|&k| SubsystemSelector::new(k, class)).collect();
    for s in &sels {
        s.validate(p).map_err(|e| CliError::Usage(e.to_string()))?;
    }
    let mut header = vec!["t_over_period".to_string()];
    header.extend(sels.iter().map(|s| format!("entropy_c{}_k{}", class_tag(class), s.k_qubits)));
    let mut table = Table::new(header);
    for t in grid.points() {
        let mut row = vec![t];
        for s in &sels {
            row.push(entanglement_entropy(p, *s, p.time_from_periods(t)).map_err(|e| lib_error(e, p.period()))?);
        }
        table.push(row);
    }
    Ok(table)
}

/// Divergent entries are written as `inf`.
pub fn fisher(p: &NetworkParams64, grid: &Grid, ks: &[usize], classes: &[DynClass]) -> Table {
    let mut notes = Vec::new();
    let sels = selectors(p, ks, classes, &mut notes);
    let mut header = vec!["t_over_period".to_string()];
    for s in &sels {
        let suffix = format!("c{}_k{}", class_tag(s.dyn_class), s.k_qubits);
        for theta in ["fj", "fn"] {
            for part in ["classical", "quantum", "total"] {
                header.push(format!("{theta}_{part}_{suffix}"));
            }
        }
    }
    let mut table = Table::new(header);
    let mut gaps = Gaps::default();
    for t in grid.points() {
        let mut row = vec![t];
        for s in &sels {
            for theta in [Theta::CouplingJ, Theta::SizeN] {
                match qfi_closed_form(p, *s, theta, p.time_from_periods(t)) {
                    Ok(f) => row.extend([f.classical, f.quantum, f.total]),
                    Err(Error::Divergent(_)) => row.extend([f64::INFINITY; 3]),
                    Err(e) => {
                        gaps.record(&format!("fisher_c{}_k{}", class_tag(s.dyn_class), s.k_qubits), t, &e);
                        row.extend([f64::NAN; 3]);
                    }
                }
            }
        }
        table.push(row);
    }
    table.notes = notes;
    table.notes.extend(gaps.into_notes());
    table
}

/// Single-qubit split over `[t1, t2]` with `t1` the grid start and `t2`
/// running over the grid. `rate_squared` is `(d p(t2) / d theta)^2`, the
/// value the rescaled total must match.
pub fn fisher_decomp(
    p: &NetworkParams64,
    grid: &Grid,
    class: DynClass,
    theta: Theta,
    rescaled: bool,
) -> Result<Table, CliError> {
    let header = ["t_over_period", "window", "process", "state", "cross", "total", "rate_squared"];
    let mut table = Table::new(header.iter().map(|s| s.to_string()).collect());
    let mut gaps = Gaps::default();
    let t1 = p.time_from_periods(grid.lo);
    for t in grid.points() {
        let t2 = p.time_from_periods(t);
        let rate = population_rate(p, class, t2, theta);
        let mut row = vec![t, t - grid.lo];
        match process_state_split(p, class, t1, t2, theta, rescaled) {
            Ok(s) => row.extend([s.process, s.state, s.cross, s.total]),
            Err(e @ Error::Pole { .. }) => {
                gaps.record("total", t, &e);
                row.extend([f64::NAN; 4]);
            }
            Err(e) => return Err(lib_error(e, p.period())),
        }
        row.push(rate * rate);
        table.push(row);
    }
    table.notes = gaps.into_notes();
    Ok(table)
}

/// Size from the two flows over `[t, t + dt]`; the period comes from the
/// first sign change of the class-1 flow and then gives the coupling.
pub fn infer(p: &NetworkParams64, grid: &Grid, dt: f64) -> Table {
    let header = [
        "t_over_period",
        "phi_tau_c1",
        "phi_tau_c0",
        "ground_prob_c0",
        "n_estimate",
        "n_nearest",
        "period_estimate",
        "j_estimate",
    ];
    let mut table = Table::new(header.iter().map(|s| s.to_string()).collect());
    let mut notes = Vec::new();
    let window = p.time_from_periods(dt);
    let sel = SubsystemSelector::class1(1);
    let period = estimate_period(|t| flow_amplitude(p, sel, t, t + window), window, p.period(), grid.steps)
        .unwrap_or_else(|e| {
            notes.push(format!("period estimate unavailable: {e}"));
            f64::NAN
        });
    let mut gaps = Gaps::default();
    for t in grid.points() {
        let mut row = vec![t];
        match observe_flows(p, p.time_from_periods(t), p.time_from_periods(t + dt)) {
            Ok(obs) => {
                row.extend([obs.flow_class1, obs.flow_class0, obs.ground_prob_t1]);
                match infer_network_size(&obs) {
                    Ok(est) => {
                        let j = infer_coupling(period, est.estimate).unwrap_or(f64::NAN);
                        row.extend([est.estimate, est.nearest as f64, period, j]);
                    }
                    Err(e) => {
                        gaps.record("n_estimate", t, &e);
                        row.extend([f64::NAN, f64::NAN, period, f64::NAN]);
                    }
                }
            }
            Err(e) => {
                gaps.record("phi_tau", t, &e);
                row.extend([f64::NAN; 6]);
                row[6] = period;
            }
        }
        table.push(row);
    }
    table.notes = notes;
    table.notes.extend(gaps.into_notes());
    table
}
