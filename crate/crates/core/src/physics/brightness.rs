/// Brightness temperature of the amplifier input, K.
///
/// `t_g + |S12|·t_d` with the reverse transmission `s12_db` read as a power
/// ratio. `s12_db = -inf` means no backward transmission. Temperatures are
/// expected to be non-negative and `s12_db <= 0`.
pub fn brightness_temperature(t_g: f64, t_d: f64, s12_db: f64) -> f64 {
    t_g + 10f64.powf(s12_db / 10.0) * t_d
}
