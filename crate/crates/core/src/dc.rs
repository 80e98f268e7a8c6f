//! DC operating point by Newton–Raphson on the modified-nodal-analysis system.
//!
//! At DC capacitors are open and inductors are shorts. Inductor-connected
//! nodes are merged before the system is assembled, so loops of inductors
//! never make the matrix singular. Unknowns are the merged node voltages
//! followed by one branch current per voltage source.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use thiserror::Error;

use crate::device::StatzParams;
use crate::linalg;
use crate::netlist::validate::{node_index, UnionFind};
use crate::netlist::{validate, DcSweep, Diagnostic, ElementKind, Netlist, Quantity};

#[derive(Debug, Error)]
pub enum DcError {
    #[error("circuit is not simulatable: {}", join_diagnostics(.0))]
    Diagnostics(Vec<Diagnostic>),
    #[error("singular MNA matrix{}", describe_structure(.0))]
    Singular(Vec<Diagnostic>),
    #[error("Newton iteration did not converge after source stepping ({} iterations)", .0.iterations)]
    NonConvergence(Box<OperatingPoint>),
    #[error("{fet} settles in reverse operation (u_ds = {u_ds:.3e} V)")]
    ReverseOperation { fet: String, u_ds: f64 },
    #[error("no source named `{0}`")]
    UnknownSource(String),
    #[error("at sweep value {value}: {source}")]
    Sweep {
        value: f64,
        #[source]
        source: Box<DcError>,
    },
    #[error("bias target unreachable: {0}")]
    Unreachable(String),
}

fn join_diagnostics(d: &[Diagnostic]) -> String {
    d.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("; ")
}

fn describe_structure(d: &[Diagnostic]) -> String {
    if d.is_empty() {
        String::new()
    } else {
        format!(": {}", join_diagnostics(d))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DcOptions {
    /// Largest node-voltage update accepted as converged, V.
    pub voltage_tolerance: f64,
    /// Largest KCL residual accepted as converged, A.
    pub current_tolerance: f64,
    pub max_iterations: usize,
    /// Number of ramp steps used when plain Newton fails.
    pub source_steps: usize,
    /// Conductance from every node to ground during iteration, S.
    pub gmin: f64,
}

impl Default for DcOptions {
    fn default() -> Self {
        Self {
            voltage_tolerance: 1e-9,
            current_tolerance: 1e-12,
            max_iterations: 100,
            source_steps: 10,
            gmin: 1e-12,
        }
    }
}

/// Bias state of one FET.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FetBias {
    pub name: String,
    pub u_gs: f64,
    pub u_ds: f64,
    pub i_d: f64,
    pub g_m: f64,
    pub g_ds: f64,
    /// Channel dissipation `u_ds · i_d`, W.
    pub p_hemt: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OperatingPoint {
    pub node_voltages: BTreeMap<String, f64>,
    /// Branch current of each voltage source, flowing from its `+` node through
    /// the source to its `-` node (SPICE sign convention).
    pub source_currents: BTreeMap<String, f64>,
    pub fets: Vec<FetBias>,
    /// Dissipation of every resistor, W.
    pub resistor_power: BTreeMap<String, f64>,
    /// Largest net current into any node with gmin removed, A.
    pub kcl_residual: f64,
    pub converged: bool,
    pub iterations: usize,
    #[serde(skip)]
    pub(crate) state: Vec<f64>,
}

impl OperatingPoint {
    pub fn voltage(&self, node: &str) -> Option<f64> {
        self.node_voltages.get(&node.to_lowercase()).copied()
    }

    pub fn fet(&self, name: &str) -> Option<&FetBias> {
        let upper = name.to_uppercase();
        self.fets.iter().find(|f| f.name == upper)
    }

    /// Power delivered by a source at this operating point, W.
    pub fn source_power(&self, netlist: &Netlist, name: &str) -> Option<f64> {
        let e = netlist.element(name)?;
        match &e.kind {
            ElementKind::VoltageSource { nodes, .. } => {
                let v = self.voltage(&nodes[0])? - self.voltage(&nodes[1])?;
                Some(-v * self.source_currents.get(&e.name).copied()?)
            }
            ElementKind::CurrentSource { nodes, dc, .. } => {
                // current enters the circuit at nodes[1]
                Some(dc * (self.voltage(&nodes[1])? - self.voltage(&nodes[0])?))
            }
            _ => None,
        }
    }
}

/// Unknown index of a (merged) node; `None` is ground.
type Slot = Option<usize>;

struct FetStamp {
    name: String,
    drain: Slot,
    gate: Slot,
    source: Slot,
    params: StatzParams,
}

enum Stamp {
    Conductance(Slot, Slot, f64),
    VoltageSource { pos: Slot, neg: Slot, row: usize, value: f64 },
    CurrentSource(Slot, Slot, f64),
    Vccs { pos: Slot, neg: Slot, cpos: Slot, cneg: Slot, gm: f64 },
}

/// Assembled DC system of a netlist.
struct DcSystem {
    node_names: Vec<String>,
    node_slot: Vec<Slot>,
    unknown_nodes: usize,
    size: usize,
    stamps: Vec<Stamp>,
    fets: Vec<FetStamp>,
    vsource_rows: Vec<(String, usize)>,
    resistors: Vec<(String, Slot, Slot, f64)>,
}

fn volt(x: &[f64], s: Slot) -> f64 {
    s.map_or(0.0, |i| x[i])
}

impl DcSystem {
    fn new(netlist: &Netlist) -> Self {
        let (names, index) = node_index(netlist);
        let mut uf = UnionFind::new(names.len());
        for e in &netlist.elements {
            if let ElementKind::Inductor { nodes, .. } = &e.kind {
                uf.union(index[&nodes[0]], index[&nodes[1]]);
            }
        }
        let mut root_slot: BTreeMap<usize, usize> = BTreeMap::new();
        let ground_root = uf.find(0);
        let mut node_slot = Vec::with_capacity(names.len());
        for i in 0..names.len() {
            let root = uf.find(i);
            if root == ground_root {
                node_slot.push(None);
            } else {
                let next = root_slot.len();
                node_slot.push(Some(*root_slot.entry(root).or_insert(next)));
            }
        }
        let unknown_nodes = root_slot.len();
        let slot = |n: &str| node_slot[index[n]];

        let mut stamps = Vec::new();
        let mut fets = Vec::new();
        let mut vsource_rows = Vec::new();
        let mut resistors = Vec::new();
        let mut row = unknown_nodes;
        for e in &netlist.elements {
            match &e.kind {
                ElementKind::Resistor { nodes, ohms } => {
                    let (a, b) = (slot(&nodes[0]), slot(&nodes[1]));
                    stamps.push(Stamp::Conductance(a, b, 1.0 / ohms));
                    resistors.push((e.name.clone(), a, b, *ohms));
                }
                ElementKind::VoltageSource { nodes, dc, .. } => {
                    stamps.push(Stamp::VoltageSource {
                        pos: slot(&nodes[0]),
                        neg: slot(&nodes[1]),
                        row,
                        value: *dc,
                    });
                    vsource_rows.push((e.name.clone(), row));
                    row += 1;
                }
                ElementKind::CurrentSource { nodes, dc, .. } => {
                    stamps.push(Stamp::CurrentSource(slot(&nodes[0]), slot(&nodes[1]), *dc));
                }
                ElementKind::Vccs { nodes, control, gm } => stamps.push(Stamp::Vccs {
                    pos: slot(&nodes[0]),
                    neg: slot(&nodes[1]),
                    cpos: slot(&control[0]),
                    cneg: slot(&control[1]),
                    gm: *gm,
                }),
                ElementKind::Fet {
                    drain,
                    gate,
                    source,
                    model,
                } => fets.push(FetStamp {
                    name: e.name.clone(),
                    drain: slot(drain),
                    gate: slot(gate),
                    source: slot(source),
                    params: netlist.models[model],
                }),
                ElementKind::Capacitor { .. } | ElementKind::Inductor { .. } => {}
            }
        }
        Self {
            node_names: names,
            node_slot,
            unknown_nodes,
            size: row,
            stamps,
            fets,
            vsource_rows,
            resistors,
        }
    }

    /// Residual vector (currents leaving each node, then source constraint rows)
    /// and, when `jacobian` is given, its derivative.
    fn evaluate(
        &self,
        x: &[f64],
        scale: f64,
        gmin: f64,
        mut jacobian: Option<&mut DMatrix<f64>>,
    ) -> DVector<f64> {
        let mut f = DVector::zeros(self.size);
        if let Some(j) = jacobian.as_deref_mut() {
            j.fill(0.0);
        }
        let add_j = |j: &mut Option<&mut DMatrix<f64>>, r: Slot, c: Slot, v: f64| {
            if let (Some(r), Some(c), Some(m)) = (r, c, j.as_deref_mut()) {
                m[(r, c)] += v;
            }
        };
        let add_f = |f: &mut DVector<f64>, r: Slot, v: f64| {
            if let Some(r) = r {
                f[r] += v;
            }
        };
        for i in 0..self.unknown_nodes {
            f[i] += gmin * x[i];
            add_j(&mut jacobian, Some(i), Some(i), gmin);
        }
        for s in &self.stamps {
            match *s {
                Stamp::Conductance(a, b, g) => {
                    let i = g * (volt(x, a) - volt(x, b));
                    add_f(&mut f, a, i);
                    add_f(&mut f, b, -i);
                    add_j(&mut jacobian, a, a, g);
                    add_j(&mut jacobian, b, b, g);
                    add_j(&mut jacobian, a, b, -g);
                    add_j(&mut jacobian, b, a, -g);
                }
                Stamp::VoltageSource { pos, neg, row, value } => {
                    let i = x[row];
                    add_f(&mut f, pos, i);
                    add_f(&mut f, neg, -i);
                    f[row] += volt(x, pos) - volt(x, neg) - scale * value;
                    add_j(&mut jacobian, pos, Some(row), 1.0);
                    add_j(&mut jacobian, neg, Some(row), -1.0);
                    add_j(&mut jacobian, Some(row), pos, 1.0);
                    add_j(&mut jacobian, Some(row), neg, -1.0);
                }
                Stamp::CurrentSource(a, b, value) => {
                    add_f(&mut f, a, scale * value);
                    add_f(&mut f, b, -scale * value);
                }
                Stamp::Vccs { pos, neg, cpos, cneg, gm } => {
                    let i = gm * (volt(x, cpos) - volt(x, cneg));
                    add_f(&mut f, pos, i);
                    add_f(&mut f, neg, -i);
                    add_j(&mut jacobian, pos, cpos, gm);
                    add_j(&mut jacobian, pos, cneg, -gm);
                    add_j(&mut jacobian, neg, cpos, -gm);
                    add_j(&mut jacobian, neg, cneg, gm);
                }
            }
        }
        for fet in &self.fets {
            let (vd, vg, vs) = (volt(x, fet.drain), volt(x, fet.gate), volt(x, fet.source));
            let (i_d, g_m, g_ds) = fet.params.eval(vg - vs, vd - vs);
            add_f(&mut f, fet.drain, i_d);
            add_f(&mut f, fet.source, -i_d);
            // ∂i_d/∂(vd, vg, vs) = (g_ds, g_m, −g_m − g_ds)
            let partials = [
                (fet.drain, g_ds),
                (fet.gate, g_m),
                (fet.source, -g_m - g_ds),
            ];
            for (col, d) in partials {
                add_j(&mut jacobian, fet.drain, col, d);
                add_j(&mut jacobian, fet.source, col, -d);
            }
        }
        f
    }

    fn kcl_norm(&self, f: &DVector<f64>) -> f64 {
        f.iter()
            .take(self.unknown_nodes)
            .fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Plain Newton from `x`. Returns iterations used and whether it converged.
    fn newton(&self, x: &mut [f64], scale: f64, gmin: f64, opts: &DcOptions) -> Result<(usize, bool), DcError> {
        let mut jac = DMatrix::zeros(self.size, self.size);
        for iter in 1..=opts.max_iterations {
            let f = self.evaluate(x, scale, gmin, Some(&mut jac));
            let delta = linalg::solve(jac.clone(), &(-f)).ok_or_else(|| DcError::Singular(Vec::new()))?;
            let max_dv = delta
                .iter()
                .take(self.unknown_nodes)
                .fold(0.0f64, |m, v| m.max(v.abs()));
            if !max_dv.is_finite() {
                return Ok((iter, false));
            }
            for (xi, d) in x.iter_mut().zip(delta.iter()) {
                *xi += d;
            }
            let residual = self.kcl_norm(&self.evaluate(x, scale, gmin, None));
            if max_dv < opts.voltage_tolerance && residual < opts.current_tolerance {
                return Ok((iter, true));
            }
        }
        Ok((opts.max_iterations, false))
    }
}

/// Solves the DC operating point from a zero initial guess.
pub fn solve_op(netlist: &Netlist) -> Result<OperatingPoint, DcError> {
    solve_op_with(netlist, None, &DcOptions::default())
}

/// Solves the DC operating point, optionally warm-started from a previous solution.
pub fn solve_op_with(
    netlist: &Netlist,
    warm_start: Option<&OperatingPoint>,
    opts: &DcOptions,
) -> Result<OperatingPoint, DcError> {
    let diagnostics = validate(netlist);
    if !diagnostics.is_empty() {
        return Err(DcError::Diagnostics(diagnostics));
    }
    let sys = DcSystem::new(netlist);
    let singular = |e: DcError| match e {
        DcError::Singular(_) => DcError::Singular(validate(netlist)),
        other => other,
    };

    let mut x = match warm_start {
        Some(op) if op.state.len() == sys.size => op.state.clone(),
        _ => vec![0.0; sys.size],
    };
    let start = x.clone();
    let (mut iterations, mut converged) = sys.newton(&mut x, 1.0, opts.gmin, opts).map_err(singular)?;

    if !converged && opts.source_steps > 0 {
        x = vec![0.0; sys.size];
        converged = true;
        for step in 1..=opts.source_steps {
            let scale = step as f64 / opts.source_steps as f64;
            let (it, ok) = sys.newton(&mut x, scale, opts.gmin, opts).map_err(singular)?;
            iterations += it;
            if !ok {
                converged = false;
                break;
            }
        }
    }
    if !converged && x.iter().any(|v| !v.is_finite()) {
        x = start;
    }

    if converged && opts.gmin > 0.0 {
        // polish with gmin removed; keep the gmin solution if that is singular
        let mut polished = x.clone();
        if let Ok((it, true)) = sys.newton(&mut polished, 1.0, 0.0, opts) {
            iterations += it;
            x = polished;
        }
    }

    let op = assemble(&sys, x, iterations, converged)?;
    if op.converged {
        Ok(op)
    } else {
        Err(DcError::NonConvergence(Box::new(op)))
    }
}

fn assemble(sys: &DcSystem, x: Vec<f64>, iterations: usize, converged: bool) -> Result<OperatingPoint, DcError> {
    let residual = sys.kcl_norm(&sys.evaluate(&x, 1.0, 0.0, None));
    let node_voltages = sys
        .node_names
        .iter()
        .zip(&sys.node_slot)
        .map(|(n, s)| (n.clone(), volt(&x, *s)))
        .collect();
    let source_currents = sys
        .vsource_rows
        .iter()
        .map(|(n, row)| (n.clone(), x[*row]))
        .collect();
    let resistor_power = sys
        .resistors
        .iter()
        .map(|(n, a, b, ohms)| {
            let v = volt(&x, *a) - volt(&x, *b);
            (n.clone(), v * v / ohms)
        })
        .collect();
    let mut fets = Vec::with_capacity(sys.fets.len());
    for f in &sys.fets {
        let (vd, vg, vs) = (volt(&x, f.drain), volt(&x, f.gate), volt(&x, f.source));
        let mut u_ds = vd - vs;
        if converged && u_ds < 0.0 {
            if u_ds < -1e-9 {
                return Err(DcError::ReverseOperation {
                    fet: f.name.clone(),
                    u_ds,
                });
            }
            u_ds = 0.0;
        }
        let u_gs = vg - vs;
        let (i_d, g_m, g_ds) = f.params.eval(u_gs, u_ds);
        fets.push(FetBias {
            name: f.name.clone(),
            u_gs,
            u_ds,
            i_d,
            g_m,
            g_ds,
            p_hemt: u_ds * i_d,
        });
    }
    Ok(OperatingPoint {
        node_voltages,
        source_currents,
        fets,
        resistor_power,
        kcl_residual: residual,
        converged: converged && residual.is_finite(),
        iterations,
        state: x,
    })
}

/// One row of a supply sweep.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub value: f64,
    pub op: OperatingPoint,
}

/// The per-row quantities plotted against supply voltage.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepSummary {
    pub u_supply: f64,
    pub i_d: f64,
    pub u_ds: f64,
    pub p_hemt: f64,
    pub p_bias: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepTable {
    pub source: String,
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    /// Reduces each row to (U_supply, I_d, U_ds, P_HEMT, P_bias) for one FET.
    ///
    /// `bias_resistors` lists the resistors whose dissipation counts as bias
    /// power; when empty, every resistor counts.
    pub fn summary(&self, fet: Option<&str>, bias_resistors: &[String]) -> Vec<SweepSummary> {
        self.rows
            .iter()
            .map(|row| {
                let bias = fet
                    .and_then(|name| row.op.fet(name))
                    .or_else(|| row.op.fets.first());
                let p_bias = if bias_resistors.is_empty() {
                    row.op.resistor_power.values().sum()
                } else {
                    bias_resistors
                        .iter()
                        .filter_map(|r| row.op.resistor_power.get(r))
                        .sum()
                };
                SweepSummary {
                    u_supply: row.value,
                    i_d: bias.map_or(0.0, |b| b.i_d),
                    u_ds: bias.map_or(0.0, |b| b.u_ds),
                    p_hemt: bias.map_or(0.0, |b| b.p_hemt),
                    p_bias,
                }
            })
            .collect()
    }
}

/// Which FET and which resistors a netlist's probes select for sweep summaries.
///
/// The FET is the first `I(J..)` probe (else the first FET); the bias
/// resistors are the `P(R..)` probes.
pub fn summary_selection(netlist: &Netlist) -> (Option<String>, Vec<String>) {
    let is_kind = |name: &str, fet: bool| {
        netlist.element(name).is_some_and(|e| {
            if fet {
                matches!(e.kind, ElementKind::Fet { .. })
            } else {
                matches!(e.kind, ElementKind::Resistor { .. })
            }
        })
    };
    let fet = netlist
        .probes
        .iter()
        .find(|p| p.quantity == Quantity::Current && is_kind(&p.target, true))
        .map(|p| p.target.clone())
        .or_else(|| netlist.fets().next().map(|e| e.name.clone()));
    let resistors = netlist
        .probes
        .iter()
        .filter(|p| p.quantity == Quantity::Power && is_kind(&p.target, false))
        .map(|p| p.target.clone())
        .collect();
    (fet, resistors)
}

/// Sweeps the DC value of `source`, warm-starting each row from the previous one.
pub fn sweep_supply(netlist: &Netlist, sweep: &DcSweep) -> Result<SweepTable, DcError> {
    sweep_supply_with(netlist, sweep, &DcOptions::default())
}

pub fn sweep_supply_with(netlist: &Netlist, sweep: &DcSweep, opts: &DcOptions) -> Result<SweepTable, DcError> {
    let mut work = netlist.clone();
    if !work.element(&sweep.source).is_some_and(|e| e.is_source()) {
        return Err(DcError::UnknownSource(sweep.source.clone()));
    }
    let mut rows: Vec<SweepRow> = Vec::new();
    for value in sweep.values() {
        work.set_source_dc(&sweep.source, value);
        let op = solve_op_with(&work, rows.last().map(|r| &r.op), opts).map_err(|e| DcError::Sweep {
            value,
            source: Box::new(e),
        })?;
        rows.push(SweepRow { value, op });
    }
    Ok(SweepTable {
        source: sweep.source.to_uppercase(),
        rows,
    })
}

/// Target bias of a self-biased stage.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BiasTarget {
    pub u_ds: f64,
    pub i_d: f64,
}

/// Source-leg resistor that self-biases a grounded-gate FET at `target`.
///
/// Inverts the drain-current law for U_gs and returns `R_s = −U_gs / I_d`.
pub fn derive_bias_resistor(p: &StatzParams, target: BiasTarget) -> Result<f64, DcError> {
    if !(target.i_d > 0.0) {
        return Err(DcError::Unreachable("drain current must be positive".into()));
    }
    let u_gs = p
        .gate_voltage_for(target.u_ds, target.i_d)
        .ok_or_else(|| DcError::Unreachable(format!("no gate voltage gives {} A at u_ds = {} V", target.i_d, target.u_ds)))?;
    if u_gs >= 0.0 {
        return Err(DcError::Unreachable(format!(
            "needs u_gs = {u_gs:.4} V >= 0, which a source resistor cannot provide"
        )));
    }
    Ok(-u_gs / target.i_d)
}

/// Complete self-bias design of one stage fed from `supply`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SelfBias {
    pub u_gs: f64,
    pub r_source: f64,
    /// Drain feed resistor that drops the remaining supply voltage.
    pub r_drain: f64,
}

pub fn design_self_bias(p: &StatzParams, target: BiasTarget, supply: f64) -> Result<SelfBias, DcError> {
    let r_source = derive_bias_resistor(p, target)?;
    let u_gs = -r_source * target.i_d;
    let headroom = supply - target.u_ds + u_gs;
    if headroom <= 0.0 {
        return Err(DcError::Unreachable(format!(
            "supply {supply} V is below u_ds + |u_gs| = {} V",
            target.u_ds - u_gs
        )));
    }
    Ok(SelfBias {
        u_gs,
        r_source,
        r_drain: headroom / target.i_d,
    })
}
