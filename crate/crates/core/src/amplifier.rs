//! Generator for the shipped two-stage amplifier netlist.
//!
//! Every matching element comes from an L-section design at the working
//! frequency and every bias resistor from the self-bias inversion, so the
//! netlist is reproducible from a handful of design inputs.

use std::f64::consts::PI;

use serde::Serialize;
use thiserror::Error;

use crate::ac::{design_l_match_with, tank_equivalent, MatchError, Reactance, TankError, TankSource, Topology};
use crate::dc::{design_self_bias, BiasTarget, DcError, SelfBias};
use crate::device::StatzParams;
use crate::units::format_engineering;

/// The shipped netlist, as generated by [`two_stage_netlist`] with default inputs.
pub const TWO_STAGE_AMP: &str = include_str!("../netlists/two_stage_amp.cir");

#[derive(Debug, Error)]
pub enum DesignError {
    #[error("bias: {0}")]
    Bias(#[from] DcError),
    #[error("match: {0}")]
    Match(#[from] MatchError),
    #[error("tank: {0}")]
    Tank(#[from] TankError),
    #[error("{0}")]
    Unrealizable(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AmplifierDesign {
    pub model: StatzParams,
    pub supply: f64,
    pub target: BiasTarget,
    pub tank: TankSource,
    pub r_load: f64,
    /// Drain choke of the first stage, H.
    pub choke: f64,
    /// Source bypass capacitors, F.
    pub bypass: f64,
    /// Supply decoupling capacitors, F.
    pub decouple: f64,
}

impl Default for AmplifierDesign {
    fn default() -> Self {
        Self {
            model: StatzParams {
                c_in: 0.6e-12,
                r_in: 22e3,
                ..StatzParams::mgf4937_cold()
            },
            supply: 0.44,
            target: BiasTarget { u_ds: 0.030, i_d: 33.6e-6 },
            tank: TankSource::readout(),
            r_load: 50.0,
            choke: 10e-6,
            bypass: 100e-12,
            decouple: 1e-9,
        }
    }
}

/// Element values derived from an [`AmplifierDesign`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AmplifierValues {
    pub bias: SelfBias,
    pub g_m: f64,
    pub g_ds: f64,
    pub r_tank: f64,
    pub c_tank: f64,
    pub input_q: f64,
    pub l_input_series: f64,
    pub l_input_shunt: f64,
    pub inter_q: f64,
    pub c_inter_series: f64,
    pub l_inter_shunt: f64,
    pub output_q: f64,
    pub l_output_shunt: f64,
    pub c_output_series: f64,
}

pub fn derive_values(d: &AmplifierDesign) -> Result<AmplifierValues, DesignError> {
    let tank = tank_equivalent(&d.tank)?;
    let f = d.tank.f_res;
    let w = 2.0 * PI * f;
    let bias = design_self_bias(&d.model, d.target, d.supply)?;
    let ss = d
        .model
        .small_signal(bias.u_gs, d.target.u_ds)
        .map_err(|e| DesignError::Unrealizable(e.to_string()))?;
    let r_out = 1.0 / ss.g_ds;
    let r_in = d.model.r_in;
    if !(r_in > 0.0) {
        return Err(DesignError::Unrealizable("the model needs a finite input resistance".into()));
    }

    let input = design_l_match_with(tank.r_p, r_in, f, Topology::LowPass)?;
    let (Reactance::Inductor(l_input_series), Reactance::Capacitor(c_shunt)) = (input.series_element, input.shunt_element)
    else {
        unreachable!("low-pass section is series L, shunt C")
    };
    if c_shunt >= d.model.c_in {
        return Err(DesignError::Unrealizable(format!(
            "input capacitance {:e} F is below the shunt {c_shunt:e} F the match needs",
            d.model.c_in
        )));
    }
    let l_input_shunt = 1.0 / (w * w * (d.model.c_in - c_shunt));

    let inter = design_l_match_with(r_out, r_in, f, Topology::HighPass)?;
    let (Reactance::Capacitor(c_inter_series), Reactance::Inductor(l_shunt)) = (inter.series_element, inter.shunt_element)
    else {
        unreachable!("high-pass section is series C, shunt L")
    };
    let l_inter_shunt = 1.0 / (1.0 / l_shunt + w * w * d.model.c_in);

    let output = design_l_match_with(r_out, d.r_load, f, Topology::HighPass)?;
    let (Reactance::Capacitor(c_output_series), Reactance::Inductor(l_output_shunt)) =
        (output.series_element, output.shunt_element)
    else {
        unreachable!("high-pass section is series C, shunt L")
    };

    Ok(AmplifierValues {
        bias,
        g_m: ss.g_m,
        g_ds: ss.g_ds,
        r_tank: tank.r_p,
        c_tank: tank.c_t,
        input_q: input.q_match,
        l_input_series,
        l_input_shunt,
        inter_q: inter.q_match,
        c_inter_series,
        l_inter_shunt,
        output_q: output.q_match,
        l_output_shunt,
        c_output_series,
    })
}

fn eng(v: f64) -> String {
    format_engineering(v, 6)
}

/// Netlist text of the two-stage amplifier.
pub fn two_stage_netlist(d: &AmplifierDesign) -> Result<String, DesignError> {
    let v = derive_values(d)?;
    let t = &d.tank;
    let mut s = String::new();
    let mut line = |text: String| {
        s.push_str(&text);
        s.push('\n');
    };
    line(".title two-stage unsaturated HEMT amplifier".into());
    line(format!(
        "* bias point U_ds = {}V, I_d = {}A from U_supply = {}V",
        eng(d.target.u_ds),
        eng(d.target.i_d),
        eng(d.supply)
    ));
    line(format!(
        "* small signal g_m = {}S, g_ds = {}S, r_ds = {}ohm",
        eng(v.g_m),
        eng(v.g_ds),
        eng(1.0 / v.g_ds)
    ));
    line(d.model.model_line("MGF4937"));
    line(String::new());
    line(format!(
        "* readout tank f = {}Hz, Q = {}, L_T = {}H",
        eng(t.f_res),
        eng(t.q),
        eng(t.l_t)
    ));
    line(format!("V2 in 0 DC 0 AC {}", eng(t.drive)));
    line(format!("Rt in tank {} ; R_p = Q w L_T", eng(v.r_tank)));
    line(format!("Lt tank 0 {}", eng(t.l_t)));
    line(format!("Ct tank 0 {} ; 1/(w^2 L_T)", eng(v.c_tank)));
    line(String::new());
    line(format!(
        "* input L-section R_p -> r_in = {}ohm, q = {:.4}",
        eng(d.model.r_in),
        v.input_q
    ));
    line(format!("L2 tank g1 {} ; q R_p / w", eng(v.l_input_series)));
    line(format!("L3 g1 0 {} ; shunt C of the section minus c_in", eng(v.l_input_shunt)));
    line(String::new());
    line(format!("* stage 1, U_gs = {}V", eng(v.bias.u_gs)));
    line("J1 d1 g1 s1 MGF4937".into());
    line(format!("R2 s1 0 {} ; -U_gs / I_d", eng(v.bias.r_source)));
    line(format!("Cs1 s1 0 {}", eng(d.bypass)));
    line(format!("R4 vdd n4 {} ; (U_supply - U_ds + U_gs) / I_d", eng(v.bias.r_drain)));
    line(format!("Cb1 n4 0 {}", eng(d.decouple)));
    line(format!("Ld1 n4 d1 {}", eng(d.choke)));
    line(String::new());
    line(format!("* interstage L-section r_ds -> r_in, q = {:.4}", v.inter_q));
    line(format!("Cc d1 g2 {}", eng(v.c_inter_series)));
    line(format!("L5 g2 0 {} ; shunt L of the section in parallel with -c_in", eng(v.l_inter_shunt)));
    line(String::new());
    line("* stage 2".into());
    line("J2 d2 g2 s2 MGF4937".into());
    line(format!("R3 s2 0 {}", eng(v.bias.r_source)));
    line(format!("Cs2 s2 0 {}", eng(d.bypass)));
    line(format!("R5 vdd n5 {}", eng(v.bias.r_drain)));
    line(format!("Cb2 n5 0 {}", eng(d.decouple)));
    line(String::new());
    line(format!(
        "* output L-section r_ds -> {}ohm, q = {:.4}",
        eng(d.r_load),
        v.output_q
    ));
    line(format!("L7 n5 d2 {} ; shunt L, also the drain feed", eng(v.l_output_shunt)));
    line(format!("C7 d2 out {}", eng(v.c_output_series)));
    line(format!("RL out 0 {}", eng(d.r_load)));
    line(String::new());
    line(format!("V1 vdd 0 {}", eng(d.supply)));
    line(String::new());
    line(".op".into());
    line(".dc V1 0 0.8 0.01".into());
    line(".ac dec 1000 100meg 2g".into());
    line(".probe V(in) I(V2) V(out) I(RL) P(R2) P(R4)".into());
    line(".end".into());
    Ok(s)
}
