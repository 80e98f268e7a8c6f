//! SPICE-like circuit decks.
//!
//! Grammar (one statement per line, case-insensitive):
//!
//! ```text
//! * comment                 ; inline comment
//! R<name> <n+> <n-> <ohms>
//! C<name> <n+> <n-> <farads>
//! L<name> <n+> <n-> <henries>
//! V<name> <n+> <n-> [DC] [<volts>] [AC <mag>]
//! I<name> <n+> <n-> [DC] [<amps>] [AC <mag>]
//! G<name> <n+> <n-> <nc+> <nc-> <siemens>
//! J<name> <drain> <gate> <source> <model>
//! + continuation of the previous line
//! .title <text>
//! .model <name> STATZ beta=<v> vto=<v> [lambda=<v>] [alpha=<v>] cin=<v> rin=<v>
//! .op
//! .dc <source> <start> <stop> <step>
//! .ac dec <points> <fstart> <fstop>
//! .probe V(<node>) I(<element>) P(<element>) ...
//! .end
//! ```
//!
//! Node `0` (alias `gnd`) is ground. Element and model names are stored in
//! upper case, node names in lower case.

mod parse;
pub(crate) mod validate;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::device::StatzParams;

pub use parse::{parse, ParseError};
pub use validate::{validate, Diagnostic, DiagnosticKind};

pub const GROUND: &str = "0";

#[derive(Debug, Clone, PartialEq)]
pub struct Netlist {
    pub title: Option<String>,
    pub nodes: BTreeSet<String>,
    pub elements: Vec<Element>,
    pub models: BTreeMap<String, StatzParams>,
    pub analyses: Vec<Analysis>,
    pub probes: Vec<Probe>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Element {
    pub name: String,
    pub kind: ElementKind,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ElementKind {
    Resistor {
        nodes: [String; 2],
        ohms: f64,
    },
    Capacitor {
        nodes: [String; 2],
        farads: f64,
    },
    Inductor {
        nodes: [String; 2],
        henries: f64,
    },
    VoltageSource {
        nodes: [String; 2],
        dc: f64,
        ac: Option<f64>,
    },
    CurrentSource {
        nodes: [String; 2],
        dc: f64,
        ac: Option<f64>,
    },
    /// Current `gm * V(control)` flows from `nodes[0]` through the element to `nodes[1]`.
    Vccs {
        nodes: [String; 2],
        control: [String; 2],
        gm: f64,
    },
    Fet {
        drain: String,
        gate: String,
        source: String,
        model: String,
    },
}

impl Element {
    /// Every terminal, in netlist order.
    pub fn terminals(&self) -> Vec<&str> {
        match &self.kind {
            ElementKind::Resistor { nodes, .. }
            | ElementKind::Capacitor { nodes, .. }
            | ElementKind::Inductor { nodes, .. }
            | ElementKind::VoltageSource { nodes, .. }
            | ElementKind::CurrentSource { nodes, .. } => vec![&nodes[0], &nodes[1]],
            ElementKind::Vccs { nodes, control, .. } => {
                vec![&nodes[0], &nodes[1], &control[0], &control[1]]
            }
            ElementKind::Fet {
                drain,
                gate,
                source,
                ..
            } => vec![drain, gate, source],
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self.kind {
            ElementKind::Resistor { .. } => "resistor",
            ElementKind::Capacitor { .. } => "capacitor",
            ElementKind::Inductor { .. } => "inductor",
            ElementKind::VoltageSource { .. } => "voltage source",
            ElementKind::CurrentSource { .. } => "current source",
            ElementKind::Vccs { .. } => "vccs",
            ElementKind::Fet { .. } => "fet",
        }
    }

    pub fn is_source(&self) -> bool {
        matches!(
            self.kind,
            ElementKind::VoltageSource { .. } | ElementKind::CurrentSource { .. }
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Analysis {
    Op,
    Dc(DcSweep),
    Ac(AcSweep),
}

#[derive(Debug, Clone, PartialEq)]
pub struct DcSweep {
    pub source: String,
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl DcSweep {
    /// Sweep values `start, start + step, ...` up to and including `stop`.
    pub fn values(&self) -> Vec<f64> {
        let count = ((self.stop - self.start) / self.step + 1e-9).floor() as usize + 1;
        (0..count)
            .map(|i| self.start + i as f64 * self.step)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AcSweep {
    pub points_per_decade: usize,
    pub f_start: f64,
    pub f_stop: f64,
}

impl AcSweep {
    /// Logarithmically spaced frequencies, `points_per_decade` per decade,
    /// from `f_start` up to `f_stop` inclusive.
    pub fn frequencies(&self) -> Vec<f64> {
        let decades = (self.f_stop / self.f_start).log10();
        let count = (decades * self.points_per_decade as f64 + 1e-9).floor() as usize + 1;
        (0..count)
            .map(|i| self.f_start * 10f64.powf(i as f64 / self.points_per_decade as f64))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantity {
    Voltage,
    Current,
    Power,
}

impl Quantity {
    pub fn letter(self) -> char {
        match self {
            Quantity::Voltage => 'V',
            Quantity::Current => 'I',
            Quantity::Power => 'P',
        }
    }
}

/// `V(node)`, `I(element)` or `P(element)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Probe {
    pub quantity: Quantity,
    pub target: String,
}

impl fmt::Display for Probe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", self.quantity.letter(), self.target)
    }
}

/// An input or output port for gain extraction: a node voltage plus an element current.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Port {
    pub node: String,
    pub element: String,
}

impl Netlist {
    pub fn element(&self, name: &str) -> Option<&Element> {
        let upper = name.to_uppercase();
        self.elements.iter().find(|e| e.name == upper)
    }

    pub fn element_mut(&mut self, name: &str) -> Option<&mut Element> {
        let upper = name.to_uppercase();
        self.elements.iter_mut().find(|e| e.name == upper)
    }

    pub fn model(&self, name: &str) -> Option<&StatzParams> {
        self.models.get(&name.to_uppercase())
    }

    pub fn fets(&self) -> impl Iterator<Item = &Element> {
        self.elements
            .iter()
            .filter(|e| matches!(e.kind, ElementKind::Fet { .. }))
    }

    pub fn dc_sweep(&self) -> Option<&DcSweep> {
        self.analyses.iter().find_map(|a| match a {
            Analysis::Dc(s) => Some(s),
            _ => None,
        })
    }

    pub fn ac_sweep(&self) -> Option<&AcSweep> {
        self.analyses.iter().find_map(|a| match a {
            Analysis::Ac(s) => Some(s),
            _ => None,
        })
    }

    /// Input and output ports for gain extraction.
    ///
    /// The first `V(..)` and first `I(..)` probe form the input port, the last
    /// `V(..)` and last `I(..)` probe the output port.
    pub fn ports(&self) -> Option<(Port, Port)> {
        let volts: Vec<&Probe> = self
            .probes
            .iter()
            .filter(|p| p.quantity == Quantity::Voltage)
            .collect();
        let amps: Vec<&Probe> = self
            .probes
            .iter()
            .filter(|p| p.quantity == Quantity::Current)
            .collect();
        if volts.len() < 2 || amps.len() < 2 {
            return None;
        }
        let port = |v: &Probe, i: &Probe| Port {
            node: v.target.clone(),
            element: i.target.clone(),
        };
        Some((
            port(volts[0], amps[0]),
            port(volts[volts.len() - 1], amps[amps.len() - 1]),
        ))
    }

    /// Sets the DC value of a voltage or current source.
    pub fn set_source_dc(&mut self, name: &str, value: f64) -> bool {
        match self.element_mut(name).map(|e| &mut e.kind) {
            Some(ElementKind::VoltageSource { dc, .. })
            | Some(ElementKind::CurrentSource { dc, .. }) => {
                *dc = value;
                true
            }
            _ => false,
        }
    }
}

impl fmt::Display for Netlist {
    /// Serialises in a canonical form that [`parse`] reads back unchanged.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(title) = &self.title {
            writeln!(f, ".title {title}")?;
        }
        for e in &self.elements {
            let n = &e.name;
            match &e.kind {
                ElementKind::Resistor { nodes, ohms } => {
                    writeln!(f, "{n} {} {} {ohms:e}", nodes[0], nodes[1])?
                }
                ElementKind::Capacitor { nodes, farads } => {
                    writeln!(f, "{n} {} {} {farads:e}", nodes[0], nodes[1])?
                }
                ElementKind::Inductor { nodes, henries } => {
                    writeln!(f, "{n} {} {} {henries:e}", nodes[0], nodes[1])?
                }
                ElementKind::VoltageSource { nodes, dc, ac }
                | ElementKind::CurrentSource { nodes, dc, ac } => {
                    write!(f, "{n} {} {} DC {dc:e}", nodes[0], nodes[1])?;
                    if let Some(mag) = ac {
                        write!(f, " AC {mag:e}")?;
                    }
                    writeln!(f)?
                }
                ElementKind::Vccs { nodes, control, gm } => writeln!(
                    f,
                    "{n} {} {} {} {} {gm:e}",
                    nodes[0], nodes[1], control[0], control[1]
                )?,
                ElementKind::Fet {
                    drain,
                    gate,
                    source,
                    model,
                } => writeln!(f, "{n} {drain} {gate} {source} {model}")?,
            }
        }
        for (name, p) in &self.models {
            writeln!(
                f,
                ".model {name} STATZ beta={:e} vto={:e} lambda={:e} alpha={:e} cin={:e} rin={:e}",
                p.beta, p.u_t, p.lambda, p.alpha, p.c_in, p.r_in
            )?;
        }
        for a in &self.analyses {
            match a {
                Analysis::Op => writeln!(f, ".op")?,
                Analysis::Dc(s) => writeln!(
                    f,
                    ".dc {} {:e} {:e} {:e}",
                    s.source, s.start, s.stop, s.step
                )?,
                Analysis::Ac(s) => writeln!(
                    f,
                    ".ac dec {} {:e} {:e}",
                    s.points_per_decade, s.f_start, s.f_stop
                )?,
            }
        }
        if !self.probes.is_empty() {
            let probes: Vec<String> = self.probes.iter().map(|p| p.to_string()).collect();
            writeln!(f, ".probe {}", probes.join(" "))?;
        }
        writeln!(f, ".end")
    }
}
