//! Small-signal frequency-domain analysis around a DC operating point.

mod matching;
mod tank;

use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

pub use matching::{design_l_match, design_l_match_with, input_impedance, MatchDesign, MatchError, Reactance, Topology};
pub use tank::{tank_equivalent, TankEquivalent, TankError, TankSource};

use crate::dc::OperatingPoint;
use crate::linalg;
use crate::netlist::validate::node_index;
use crate::netlist::{ElementKind, Netlist, Port, Probe, Quantity};
use crate::par::{self, Execution};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AcError {
    #[error("operating point did not converge")]
    Unconverged,
    #[error("operating point has no bias for {0}")]
    MissingBias(String),
    #[error("singular complex MNA matrix at {0} Hz")]
    Singular(f64),
    #[error("invalid sweep: {0}")]
    InvalidSweep(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Branch {
    Conductance(f64),
    Capacitance(f64),
    Inductance(f64),
}

impl Branch {
    fn admittance(self, omega: f64) -> Complex64 {
        match self {
            Branch::Conductance(g) => Complex64::new(g, 0.0),
            Branch::Capacitance(c) => Complex64::new(0.0, omega * c),
            Branch::Inductance(l) => Complex64::new(0.0, -1.0 / (omega * l)),
        }
    }
}

type Slot = Option<usize>;

/// Small-signal model of one FET.
#[derive(Debug, Clone, PartialEq)]
pub struct FetLinear {
    pub name: String,
    pub g_m: f64,
    pub g_ds: f64,
    pub c_in: f64,
    pub r_in: f64,
    drain: Slot,
    gate: Slot,
    source: Slot,
}

#[derive(Debug, Clone, PartialEq)]
enum Stamp {
    Branch { a: Slot, b: Slot, branch: Branch },
    VoltageSource { pos: Slot, neg: Slot, row: usize, ac: f64 },
    CurrentSource { pos: Slot, neg: Slot, ac: f64 },
    Vccs { pos: Slot, neg: Slot, cpos: Slot, cneg: Slot, gm: f64 },
    Fet(usize),
}

/// Linear frequency-dependent MNA stamp set.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearCircuit {
    slots: BTreeMap<String, Slot>,
    unknown_nodes: usize,
    size: usize,
    stamps: Vec<Stamp>,
    /// Element name → stamp index.
    elements: BTreeMap<String, usize>,
    pub fets: Vec<FetLinear>,
    pub probes: Vec<Probe>,
    pub ports: Option<(Port, Port)>,
}

/// Replaces every FET by its small-signal equivalent at `op`.
///
/// DC values are dropped: voltage sources without an AC magnitude become
/// shorts, current sources without one become opens.
pub fn linearize(netlist: &Netlist, op: &OperatingPoint) -> Result<LinearCircuit, AcError> {
    if !op.converged {
        return Err(AcError::Unconverged);
    }
    let (names, index) = node_index(netlist);
    let slots: BTreeMap<String, Slot> = names
        .iter()
        .map(|n| (n.clone(), index[n].checked_sub(1)))
        .collect();
    let unknown_nodes = names.len() - 1;
    let slot = |n: &str| slots[n];

    let mut stamps = Vec::new();
    let mut elements = BTreeMap::new();
    let mut fets = Vec::new();
    let mut row = unknown_nodes;
    for e in &netlist.elements {
        let stamp = match &e.kind {
            ElementKind::Resistor { nodes, ohms } => Stamp::Branch {
                a: slot(&nodes[0]),
                b: slot(&nodes[1]),
                branch: Branch::Conductance(1.0 / ohms),
            },
            ElementKind::Capacitor { nodes, farads } => Stamp::Branch {
                a: slot(&nodes[0]),
                b: slot(&nodes[1]),
                branch: Branch::Capacitance(*farads),
            },
            ElementKind::Inductor { nodes, henries } => Stamp::Branch {
                a: slot(&nodes[0]),
                b: slot(&nodes[1]),
                branch: Branch::Inductance(*henries),
            },
            ElementKind::VoltageSource { nodes, ac, .. } => {
                row += 1;
                Stamp::VoltageSource {
                    pos: slot(&nodes[0]),
                    neg: slot(&nodes[1]),
                    row: row - 1,
                    ac: ac.unwrap_or(0.0),
                }
            }
            ElementKind::CurrentSource { nodes, ac, .. } => Stamp::CurrentSource {
                pos: slot(&nodes[0]),
                neg: slot(&nodes[1]),
                ac: ac.unwrap_or(0.0),
            },
            ElementKind::Vccs { nodes, control, gm } => Stamp::Vccs {
                pos: slot(&nodes[0]),
                neg: slot(&nodes[1]),
                cpos: slot(&control[0]),
                cneg: slot(&control[1]),
                gm: *gm,
            },
            ElementKind::Fet {
                drain,
                gate,
                source,
                model,
            } => {
                let bias = op.fet(&e.name).ok_or_else(|| AcError::MissingBias(e.name.clone()))?;
                let params = &netlist.models[model];
                fets.push(FetLinear {
                    name: e.name.clone(),
                    g_m: bias.g_m,
                    g_ds: bias.g_ds,
                    c_in: params.c_in,
                    r_in: params.r_in,
                    drain: slot(drain),
                    gate: slot(gate),
                    source: slot(source),
                });
                Stamp::Fet(fets.len() - 1)
            }
        };
        elements.insert(e.name.clone(), stamps.len());
        stamps.push(stamp);
    }
    Ok(LinearCircuit {
        slots,
        unknown_nodes,
        size: row,
        stamps,
        elements,
        fets,
        probes: netlist.probes.clone(),
        ports: netlist.ports(),
    })
}

fn at(x: &DVector<Complex64>, s: Slot) -> Complex64 {
    s.map_or(Complex64::new(0.0, 0.0), |i| x[i])
}

/// Complex solution of the circuit at one frequency.
#[derive(Debug, Clone)]
pub struct AcSolution<'a> {
    circuit: &'a LinearCircuit,
    omega: f64,
    x: DVector<Complex64>,
}

impl AcSolution<'_> {
    pub fn voltage(&self, node: &str) -> Option<Complex64> {
        self.circuit.slots.get(&node.to_lowercase()).map(|s| at(&self.x, *s))
    }

    /// Current through an element from its first terminal to its second
    /// (drain to source for a FET).
    pub fn current(&self, element: &str) -> Option<Complex64> {
        let idx = *self.circuit.elements.get(&element.to_uppercase())?;
        let x = &self.x;
        Some(match &self.circuit.stamps[idx] {
            Stamp::Branch { a, b, branch } => branch.admittance(self.omega) * (at(x, *a) - at(x, *b)),
            Stamp::VoltageSource { row, .. } => x[*row],
            Stamp::CurrentSource { ac, .. } => Complex64::new(*ac, 0.0),
            Stamp::Vccs { cpos, cneg, gm, .. } => (at(x, *cpos) - at(x, *cneg)) * *gm,
            Stamp::Fet(k) => {
                let f = &self.circuit.fets[*k];
                let (vd, vg, vs) = (at(x, f.drain), at(x, f.gate), at(x, f.source));
                (vg - vs) * f.g_m + (vd - vs) * f.g_ds
            }
        })
    }

    /// Current delivered by the element into the rest of the circuit at a
    /// port: sources deliver the negative of their branch current.
    fn port_current(&self, element: &str) -> Option<Complex64> {
        let idx = *self.circuit.elements.get(&element.to_uppercase())?;
        let i = self.current(element)?;
        Some(match self.circuit.stamps[idx] {
            Stamp::VoltageSource { .. } | Stamp::CurrentSource { .. } => -i,
            _ => i,
        })
    }

    pub fn probe(&self, p: &Probe) -> Option<Complex64> {
        match p.quantity {
            Quantity::Voltage => self.voltage(&p.target),
            Quantity::Current => self.current(&p.target),
            Quantity::Power => {
                let idx = *self.circuit.elements.get(&p.target.to_uppercase())?;
                let (a, b) = match self.circuit.stamps[idx] {
                    Stamp::Branch { a, b, .. }
                    | Stamp::VoltageSource { pos: a, neg: b, .. }
                    | Stamp::CurrentSource { pos: a, neg: b, .. }
                    | Stamp::Vccs { pos: a, neg: b, .. } => (a, b),
                    Stamp::Fet(k) => (self.circuit.fets[k].drain, self.circuit.fets[k].source),
                };
                let v = at(&self.x, a) - at(&self.x, b);
                Some(v * self.current(&p.target)?.conj() * 0.5)
            }
        }
    }
}

impl LinearCircuit {
    /// Copy with every FET transconductance forced to zero.
    pub fn without_transconductance(&self) -> Self {
        let mut c = self.clone();
        for f in &mut c.fets {
            f.g_m = 0.0;
        }
        c
    }

    pub fn solve_at(&self, f: f64) -> Result<AcSolution<'_>, AcError> {
        let omega = 2.0 * PI * f;
        let n = self.size;
        let zero = Complex64::new(0.0, 0.0);
        let mut y = DMatrix::from_element(n, n, zero);
        let mut rhs = DVector::from_element(n, zero);
        let mut add = |r: Slot, c: Slot, v: Complex64| {
            if let (Some(r), Some(c)) = (r, c) {
                y[(r, c)] += v;
            }
        };
        let admittance = |add: &mut dyn FnMut(Slot, Slot, Complex64), a: Slot, b: Slot, v: Complex64| {
            add(a, a, v);
            add(b, b, v);
            add(a, b, -v);
            add(b, a, -v);
        };
        let inject = |r: Slot, v: f64, rhs: &mut DVector<Complex64>| {
            if let Some(r) = r {
                rhs[r] += v;
            }
        };
        for s in &self.stamps {
            match *s {
                Stamp::Branch { a, b, branch } => admittance(&mut add, a, b, branch.admittance(omega)),
                Stamp::VoltageSource { pos, neg, row, ac } => {
                    let one = Complex64::new(1.0, 0.0);
                    add(pos, Some(row), one);
                    add(neg, Some(row), -one);
                    add(Some(row), pos, one);
                    add(Some(row), neg, -one);
                    rhs[row] += ac;
                }
                Stamp::CurrentSource { pos, neg, ac } => {
                    inject(pos, -ac, &mut rhs);
                    inject(neg, ac, &mut rhs);
                }
                Stamp::Vccs { pos, neg, cpos, cneg, gm } => {
                    vccs(&mut add, pos, neg, cpos, cneg, gm);
                }
                Stamp::Fet(k) => {
                    let f = &self.fets[k];
                    vccs(&mut add, f.drain, f.source, f.gate, f.source, f.g_m);
                    admittance(&mut add, f.drain, f.source, Complex64::new(f.g_ds, 0.0));
                    let mut y_in = Complex64::new(0.0, omega * f.c_in);
                    if f.r_in > 0.0 {
                        y_in += 1.0 / f.r_in;
                    }
                    admittance(&mut add, f.gate, f.source, y_in);
                }
            }
        }
        let x = linalg::solve(y, &rhs).ok_or(AcError::Singular(f))?;
        Ok(AcSolution { circuit: self, omega, x })
    }

    /// Gains at one frequency, or `None` without designated ports.
    pub fn gains_at(&self, f: f64) -> Result<Option<Gains>, AcError> {
        let sol = self.solve_at(f)?;
        Ok(gains(&sol, self.ports.as_ref()))
    }

    pub fn node_count(&self) -> usize {
        self.unknown_nodes
    }
}

fn vccs(add: &mut dyn FnMut(Slot, Slot, Complex64), pos: Slot, neg: Slot, cpos: Slot, cneg: Slot, gm: f64) {
    let g = Complex64::new(gm, 0.0);
    add(pos, cpos, g);
    add(pos, cneg, -g);
    add(neg, cpos, -g);
    add(neg, cneg, g);
}

/// Port gains at one frequency, dB.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Gains {
    pub gv: f64,
    pub gi: f64,
    /// `20·log10|V_out I_out / (V_in I_in)|`, which equals `gv + gi`.
    pub gp: f64,
    /// `10·log10` of the ratio of real (active) powers.
    pub gp_real: f64,
}

fn gains(sol: &AcSolution<'_>, ports: Option<&(Port, Port)>) -> Option<Gains> {
    let (input, output) = ports?;
    let v_in = sol.voltage(&input.node)?;
    let i_in = sol.port_current(&input.element)?;
    let v_out = sol.voltage(&output.node)?;
    let i_out = sol.port_current(&output.element)?;
    let gv = 20.0 * (v_out.norm() / v_in.norm()).log10();
    let gi = 20.0 * (i_out.norm() / i_in.norm()).log10();
    let gp = 20.0 * ((v_out * i_out).norm() / (v_in * i_in).norm()).log10();
    let p_in = (v_in * i_in.conj()).re;
    let p_out = (v_out * i_out.conj()).re;
    Some(Gains {
        gv,
        gi,
        gp,
        gp_real: 10.0 * (p_out / p_in).log10(),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ProbeTrace {
    pub label: String,
    pub values: Vec<Complex64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Peak {
    pub f_peak: f64,
    pub g_p_peak: f64,
    /// Width between the −3 dB crossings; a sweep edge stands in for a
    /// crossing that lies outside the sweep.
    pub bw_3db: f64,
}

/// A frequency at which the sweep could not be solved.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepFailure {
    pub f: f64,
    pub reason: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct AcSweepResult {
    pub frequencies: Vec<f64>,
    pub probes: Vec<ProbeTrace>,
    /// Empty when the netlist designates no ports; NaN at failed frequencies.
    pub gv: Vec<f64>,
    pub gi: Vec<f64>,
    pub gp: Vec<f64>,
    pub gp_real: Vec<f64>,
    pub peak: Option<Peak>,
    pub failures: Vec<SweepFailure>,
}

impl AcSweepResult {
    /// Linear interpolation of the gains in log-frequency.
    pub fn gains_near(&self, f: f64) -> Option<Gains> {
        if self.gp.is_empty() {
            return None;
        }
        let k = self.frequencies.iter().position(|&x| x >= f)?;
        let pick = |v: &[f64]| {
            if k == 0 || self.frequencies[k] == f {
                return v[k];
            }
            let (x0, x1) = (self.frequencies[k - 1].ln(), self.frequencies[k].ln());
            let t = (f.ln() - x0) / (x1 - x0);
            v[k - 1] + t * (v[k] - v[k - 1])
        };
        Some(Gains {
            gv: pick(&self.gv),
            gi: pick(&self.gi),
            gp: pick(&self.gp),
            gp_real: pick(&self.gp_real),
        })
    }
}

/// Log-spaced frequency grid, `points_per_decade` points per decade from `f_start`.
pub fn log_grid(f_start: f64, f_stop: f64, points_per_decade: usize) -> Result<Vec<f64>, AcError> {
    if !(f_start > 0.0 && f_stop >= f_start && points_per_decade > 0) {
        return Err(AcError::InvalidSweep(format!(
            "need 0 < f_start <= f_stop and points > 0 (got {f_start}, {f_stop}, {points_per_decade})"
        )));
    }
    let decades = (f_stop / f_start).log10();
    let count = (decades * points_per_decade as f64 + 1e-9).floor() as usize + 1;
    Ok((0..count)
        .map(|i| f_start * 10f64.powf(i as f64 / points_per_decade as f64))
        .collect())
}

pub fn sweep_ac(circuit: &LinearCircuit, f_start: f64, f_stop: f64, points_per_decade: usize) -> Result<AcSweepResult, AcError> {
    sweep_ac_with(circuit, &log_grid(f_start, f_stop, points_per_decade)?, Execution::default())
}

/// Solves the circuit at each frequency. Frequencies that fail are recorded
/// in `failures` and the sweep continues.
pub fn sweep_ac_with(circuit: &LinearCircuit, frequencies: &[f64], exec: Execution) -> Result<AcSweepResult, AcError> {
    if frequencies.iter().any(|f| !(*f > 0.0)) {
        return Err(AcError::InvalidSweep("frequencies must be positive".into()));
    }
    type Point = Result<(Vec<Complex64>, Option<Gains>), AcError>;
    let points: Vec<Point> = par::map_slice(exec, frequencies, |&f| {
        let sol = circuit.solve_at(f)?;
        let probes = circuit
            .probes
            .iter()
            .map(|p| sol.probe(p).unwrap_or(Complex64::new(f64::NAN, f64::NAN)))
            .collect();
        Ok((probes, gains(&sol, circuit.ports.as_ref())))
    });

    let has_gains = circuit.ports.is_some();
    let nan = Complex64::new(f64::NAN, f64::NAN);
    let mut probes: Vec<ProbeTrace> = circuit
        .probes
        .iter()
        .map(|p| ProbeTrace {
            label: p.to_string(),
            values: Vec::with_capacity(frequencies.len()),
        })
        .collect();
    let mut out = AcSweepResult {
        frequencies: frequencies.to_vec(),
        probes: Vec::new(),
        gv: Vec::new(),
        gi: Vec::new(),
        gp: Vec::new(),
        gp_real: Vec::new(),
        peak: None,
        failures: Vec::new(),
    };
    for (&f, point) in frequencies.iter().zip(points) {
        let (values, g) = match point {
            Ok(p) => p,
            Err(e) => {
                out.failures.push(SweepFailure { f, reason: e.to_string() });
                (vec![nan; probes.len()], None)
            }
        };
        for (trace, v) in probes.iter_mut().zip(values) {
            trace.values.push(v);
        }
        if has_gains {
            let g = g.unwrap_or(Gains {
                gv: f64::NAN,
                gi: f64::NAN,
                gp: f64::NAN,
                gp_real: f64::NAN,
            });
            out.gv.push(g.gv);
            out.gi.push(g.gi);
            out.gp.push(g.gp);
            out.gp_real.push(g.gp_real);
        }
    }
    out.probes = probes;
    out.peak = find_peak(&out.frequencies, &out.gp);
    Ok(out)
}

/// Interior maximum of `gain`, refined by a parabola through the three points
/// around it in log-frequency.
pub fn find_peak(freqs: &[f64], gain: &[f64]) -> Option<Peak> {
    let (k, _) = gain
        .iter()
        .enumerate()
        .filter(|(_, g)| g.is_finite())
        .max_by(|a, b| a.1.total_cmp(b.1))?;
    if k == 0 || k + 1 >= gain.len() || !gain[k - 1].is_finite() || !gain[k + 1].is_finite() {
        return None;
    }
    let (x0, x1, x2) = (freqs[k - 1].ln(), freqs[k].ln(), freqs[k + 1].ln());
    let (y0, y1, y2) = (gain[k - 1], gain[k], gain[k + 1]);
    // vertex of the parabola through three points
    let d01 = (y1 - y0) / (x1 - x0);
    let d12 = (y2 - y1) / (x2 - x1);
    let curvature = (d12 - d01) / (x2 - x0);
    let (x_peak, g_peak) = if curvature < 0.0 {
        let xv = 0.5 * (x0 + x1) - d01 / (2.0 * curvature);
        let xv = xv.clamp(x0, x2);
        let yv = y1 + d01 * (xv - x1) + curvature * (xv - x0) * (xv - x1);
        (xv, yv)
    } else {
        (x1, y1)
    };
    let level = g_peak - 3.0;
    let crossing = |range: &mut dyn Iterator<Item = usize>, edge: f64| -> f64 {
        for i in range {
            let (j, l) = (i, if i > k { i - 1 } else { i + 1 });
            if gain[j].is_finite() && gain[j] <= level {
                let t = (level - gain[j]) / (gain[l] - gain[j]);
                return freqs[j] + t * (freqs[l] - freqs[j]);
            }
        }
        edge
    };
    let lo = crossing(&mut (0..k).rev(), freqs[0]);
    let hi = crossing(&mut (k + 1..gain.len()), freqs[freqs.len() - 1]);
    Some(Peak {
        f_peak: x_peak.exp(),
        g_p_peak: g_peak,
        bw_3db: hi - lo,
    })
}
