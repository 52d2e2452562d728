//! Link-budget formulas: distances, monostatic radar SNR and range,
//! air-to-air channel gain, uplink SINR, and Shannon rate.
//!
//! Every operation is a pure function of its arguments. All quantities are
//! linear SI units (meters, watts, hertz, bit/s); decibels exist only at the
//! config boundary. Reentrant and safe to call concurrently.

use serde::{Deserialize, Serialize};
use std::f64::consts::{LN_2, PI};
use thiserror::Error;

use crate::numeric::canonical_sum;

/// Propagation speed used for the radar wavelength, m/s.
pub const SPEED_OF_LIGHT: f64 = 3.0e8;

#[derive(Debug, Error, PartialEq)]
pub enum PhysicsError {
    /// Two nodes coincide where a positive separation is required.
    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),
    /// A power that must be positive (or non-negative) is not.
    #[error("invalid power {0} W: {1}")]
    InvalidPower(f64, &'static str),
}

/// A point in the simulation volume. `h` is altitude above ground: zero for
/// targets, strictly positive for airborne nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Position3D {
    pub x: f64,
    pub y: f64,
    pub h: f64,
}

impl Position3D {
    pub fn new(x: f64, y: f64, h: f64) -> Self {
        Self { x, y, h }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.h.is_finite()
    }

    /// 3D Euclidean distance.
    pub fn distance_to(&self, other: &Position3D) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        let dh = self.h - other.h;
        (dx * dx + dy * dy + dh * dh).sqrt()
    }

    /// Distance ignoring altitude.
    pub fn horizontal_distance_to(&self, other: &Position3D) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        (dx * dx + dy * dy).sqrt()
    }
}

/// Radar link-budget constants. All gains and losses are linear ratios; the
/// dB-valued noise figure from config files is converted before this struct
/// is built.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadarParams {
    /// Transmit antenna gain (linear).
    pub tx_gain: f64,
    /// Receive antenna gain (linear).
    pub rx_gain: f64,
    /// Carrier frequency, Hz.
    pub carrier_freq_hz: f64,
    /// Target radar cross section, m^2.
    pub rcs_m2: f64,
    /// Radar bandwidth, Hz. Must be well below the carrier.
    pub bandwidth_hz: f64,
    /// Boltzmann constant, J/K.
    pub boltzmann: f64,
    /// Effective noise temperature, K.
    pub noise_temp_k: f64,
    /// Receiver noise figure (linear).
    pub noise_figure: f64,
    /// Probing loss factor (linear).
    pub probing_loss: f64,
    /// Minimum SNR for a detection to count (linear).
    pub snr_min: f64,
}

impl RadarParams {
    /// Operating wavelength lambda = C / f_c, meters.
    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.carrier_freq_hz
    }

    /// Noise product k * T0 * F * l in the radar denominator.
    pub fn noise_product(&self) -> f64 {
        self.boltzmann * self.noise_temp_k * self.noise_figure * self.probing_loss
    }
}

/// Uplink (UAV to FBS) channel constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CommParams {
    /// Carrier frequency, Hz.
    pub carrier_freq_hz: f64,
    /// Propagation speed, m/s.
    pub light_speed: f64,
    /// Communication bandwidth, Hz.
    pub bandwidth_hz: f64,
    /// Line-of-sight probability.
    pub los_prob: f64,
    /// Non-line-of-sight probability.
    pub nlos_prob: f64,
    /// LoS attenuation factor (linear).
    pub los_atten: f64,
    /// NLoS attenuation factor (linear).
    pub nlos_atten: f64,
    /// Thermal noise power density, W/Hz.
    pub noise_density: f64,
    /// Minimum acceptable data rate, bit/s.
    pub rate_min: f64,
    /// FBS receive antenna gain (linear).
    pub fbs_rx_gain: f64,
}

impl CommParams {
    /// Free-space reference loss K0 = (4 pi f_c / C)^2.
    pub fn path_loss_const(&self) -> f64 {
        let k = 4.0 * PI * self.carrier_freq_hz / self.light_speed;
        k * k
    }

    /// LoS/NLoS attenuation mix xi_LoS * mu_LoS + xi_NLoS * mu_NLoS.
    pub fn atten_mix(&self) -> f64 {
        self.los_prob * self.los_atten + self.nlos_prob * self.nlos_atten
    }

    /// Noise floor B_c * delta_0, W.
    pub fn noise_power(&self) -> f64 {
        self.bandwidth_hz * self.noise_density
    }
}

/// Whether the SINR denominator includes the other UAVs' uplink signals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum InterferenceMode {
    /// Cross-UAV interference summed over all other transmitters.
    #[default]
    Full,
    /// Dedicated channels: thermal noise only.
    None,
}

/// 3D distance between two finite positions. Symmetric, non-negative.
pub fn distance3d(a: &Position3D, b: &Position3D) -> f64 {
    a.distance_to(b)
}

/// Monostatic radar SNR at distance `d`:
///
/// `p * gT * gR * lambda^2 * sigma / ((4 pi)^3 * k T0 F l * B_r * d^4)`
pub fn radar_snr(p_radar: f64, distance: f64, rp: &RadarParams) -> Result<f64, PhysicsError> {
    if p_radar < 0.0 {
        return Err(PhysicsError::InvalidPower(p_radar, "radar power must be >= 0"));
    }
    if distance <= 0.0 {
        return Err(PhysicsError::DegenerateGeometry(format!(
            "radar SNR undefined at distance {distance} m (UAV coincides with target)"
        )));
    }
    let lambda = rp.wavelength();
    let four_pi = 4.0 * PI;
    let numer = p_radar * rp.tx_gain * rp.rx_gain * lambda * lambda * rp.rcs_m2;
    let denom = four_pi.powi(3) * rp.noise_product() * rp.bandwidth_hz * distance.powi(4);
    Ok(numer / denom)
}

/// Maximum distance at which the radar SNR still reaches `snr_min`:
///
/// `(p * gT * gR * lambda^2 * sigma / ((4 pi)^3 * k T0 F l * B_r * eta_min))^(1/4)`
pub fn radar_range(p_radar: f64, rp: &RadarParams) -> Result<f64, PhysicsError> {
    if p_radar <= 0.0 {
        return Err(PhysicsError::InvalidPower(p_radar, "radar power must be > 0"));
    }
    let lambda = rp.wavelength();
    let four_pi = 4.0 * PI;
    let numer = p_radar * rp.tx_gain * rp.rx_gain * lambda * lambda * rp.rcs_m2;
    let denom = four_pi.powi(3) * rp.noise_product() * rp.bandwidth_hz * rp.snr_min;
    Ok((numer / denom).powf(0.25))
}

/// Average channel power gain of the UAV-FBS link at distance `d`:
///
/// `K0^-1 * d^-2 * (xi_LoS mu_LoS + xi_NLoS mu_NLoS)^-1`
pub fn channel_gain(distance: f64, cp: &CommParams) -> Result<f64, PhysicsError> {
    if distance <= 0.0 {
        return Err(PhysicsError::DegenerateGeometry(format!(
            "channel gain undefined at distance {distance} m (UAV coincides with FBS)"
        )));
    }
    Ok(1.0 / (cp.path_loss_const() * distance * distance * cp.atten_mix()))
}

/// Uplink SINR of UAV `m` at the FBS given every UAV's comm power and
/// channel gain. The denominator is the noise floor plus, in
/// [`InterferenceMode::Full`], the received power of every other UAV.
///
/// Panics if the slices differ in length, are empty, or `m` is out of range;
/// on valid inputs the function is total (the noise floor keeps the
/// denominator positive).
pub fn sinr(
    m: usize,
    comm_powers: &[f64],
    gains: &[f64],
    cp: &CommParams,
    tx_gain: f64,
    mode: InterferenceMode,
) -> f64 {
    assert_eq!(comm_powers.len(), gains.len(), "powers/gains length mismatch");
    assert!(m < comm_powers.len(), "UAV index {m} out of range");
    let received = |u: usize| comm_powers[u] * tx_gain * cp.fbs_rx_gain * gains[u];
    let interference = match mode {
        InterferenceMode::Full => canonical_sum(
            (0..comm_powers.len()).filter(|&u| u != m).map(received),
        ),
        InterferenceMode::None => 0.0,
    };
    received(m) / (interference + cp.noise_power())
}

/// Shannon rate `B_c * log2(1 + sinr)`, bit/s. `ln_1p` keeps the small-SINR
/// regime accurate to machine precision.
pub fn data_rate(sinr_value: f64, cp: &CommParams) -> f64 {
    cp.bandwidth_hz * sinr_value.ln_1p() / LN_2
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn table1_radar() -> RadarParams {
        RadarParams {
            tx_gain: 20.0,
            rx_gain: 20.0,
            carrier_freq_hz: 5.0e9,
            rcs_m2: 1.0,
            bandwidth_hz: 20.0e6,
            boltzmann: 1.38e-23,
            noise_temp_k: 290.0,
            noise_figure: 10f64.powf(0.5),
            probing_loss: 0.8,
            snr_min: 10.0,
        }
    }

    fn table1_comm() -> CommParams {
        CommParams {
            carrier_freq_hz: 5.0e9,
            light_speed: 3.0e8,
            bandwidth_hz: 40.0e6,
            los_prob: 0.95,
            nlos_prob: 0.5,
            los_atten: 0.5,
            nlos_atten: 2.0,
            noise_density: 0.5e-10,
            rate_min: 0.1e6,
            fbs_rx_gain: 20.0,
        }
    }

    fn rel_err(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn distance_single_axis() {
        let a = Position3D::new(0.0, 0.0, 40.0);
        let b = Position3D::new(0.0, 0.0, 0.0);
        assert_eq!(distance3d(&a, &b), 40.0);
    }

    #[test]
    fn distance_identity_is_zero() {
        let a = Position3D::new(12.5, -3.0, 7.0);
        assert_eq!(distance3d(&a, &a), 0.0);
    }

    #[test]
    fn distance_pythagorean_triple() {
        let a = Position3D::new(3.0, 4.0, 0.0);
        let b = Position3D::new(0.0, 0.0, 12.0);
        assert_eq!(distance3d(&a, &b), 13.0);
    }

    // High-precision evaluation (mpmath, 50 digits) of the radar equation at
    // p = 30 W, d = 40 m with the table constants above.
    #[test]
    fn radar_snr_reference_value() {
        let snr = radar_snr(30.0, 40.0, &table1_radar()).unwrap();
        assert!(rel_err(snr, 41996.88920180666) < 1e-12, "snr = {snr}");
    }

    #[test]
    fn radar_snr_zero_power() {
        assert_eq!(radar_snr(0.0, 40.0, &table1_radar()).unwrap(), 0.0);
    }

    #[test]
    fn radar_snr_rejects_zero_distance() {
        assert!(matches!(
            radar_snr(30.0, 0.0, &table1_radar()),
            Err(PhysicsError::DegenerateGeometry(_))
        ));
    }

    // Same oracle as `radar_snr_reference_value`, applied to the range
    // formula at eta_min = 10.
    #[test]
    fn radar_range_reference_value() {
        let r = radar_range(30.0, &table1_radar()).unwrap();
        assert!(rel_err(r, 322.00622827945407) < 1e-12, "range = {r}");
    }

    #[test]
    fn radar_range_rejects_nonpositive_power() {
        assert!(matches!(
            radar_range(0.0, &table1_radar()),
            Err(PhysicsError::InvalidPower(..))
        ));
        assert!(radar_range(-1.0, &table1_radar()).is_err());
    }

    // mpmath oracle: K0 = 43864.908449286, mix = 1.475.
    #[test]
    fn channel_gain_reference_value() {
        let g = channel_gain(100.0, &table1_comm()).unwrap();
        assert!(rel_err(g, 1.5455773775949830e-9) < 1e-12, "gain = {g}");
    }

    #[test]
    fn channel_gain_rejects_zero_distance() {
        assert!(channel_gain(0.0, &table1_comm()).is_err());
    }

    #[test]
    fn sinr_single_uav_has_no_interference() {
        let cp = table1_comm();
        let p = [3.0];
        let g = [1.5e-9];
        let got = sinr(0, &p, &g, &cp, 20.0, InterferenceMode::Full);
        let want = 3.0 * 20.0 * 20.0 * 1.5e-9 / cp.noise_power();
        assert!(rel_err(got, want) < 1e-15);
    }

    #[test]
    fn sinr_zero_powers_give_zero() {
        let cp = table1_comm();
        let p = [0.0, 0.0, 0.0];
        let g = [1e-9, 2e-9, 3e-9];
        for m in 0..3 {
            assert_eq!(sinr(m, &p, &g, &cp, 20.0, InterferenceMode::Full), 0.0);
        }
    }

    #[test]
    fn sinr_symmetric_pair_matches() {
        let cp = table1_comm();
        let p = [5.0, 5.0];
        let g = [2e-9, 2e-9];
        let a = sinr(0, &p, &g, &cp, 20.0, InterferenceMode::Full);
        let b = sinr(1, &p, &g, &cp, 20.0, InterferenceMode::Full);
        assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn sinr_mode_none_drops_interference() {
        let cp = table1_comm();
        let p = [5.0, 9.0];
        let g = [2e-9, 4e-9];
        let with = sinr(0, &p, &g, &cp, 20.0, InterferenceMode::Full);
        let without = sinr(0, &p, &g, &cp, 20.0, InterferenceMode::None);
        assert!(without > with);
        let expected = p[0] * 20.0 * cp.fbs_rx_gain * g[0] / cp.noise_power();
        assert!(rel_err(without, expected) < 1e-15);
    }

    #[test]
    fn data_rate_known_points() {
        let cp = table1_comm();
        assert!(rel_err(data_rate(1.0, &cp), 4.0e7) < 1e-12);
        assert_eq!(data_rate(0.0, &cp), 0.0);
        assert!(rel_err(data_rate(3.0, &cp), 8.0e7) < 1e-12);
    }

    proptest! {
        // SNR is linear in power and follows the d^-4 law.
        #[test]
        fn snr_scaling_laws(p in 0.1f64..100.0, d in 1.0f64..5000.0, alpha in 0.1f64..10.0) {
            let rp = table1_radar();
            let base = radar_snr(p, d, &rp).unwrap();
            let scaled_p = radar_snr(alpha * p, d, &rp).unwrap();
            prop_assert!(rel_err(scaled_p, alpha * base) < 1e-12);
            let scaled_d = radar_snr(p, alpha * d, &rp).unwrap();
            prop_assert!(rel_err(scaled_d, base / alpha.powi(4)) < 1e-12);
        }

        // Sixteen times the power doubles the range.
        #[test]
        fn range_fourth_root_law(p in 0.1f64..100.0) {
            let rp = table1_radar();
            let r1 = radar_range(p, &rp).unwrap();
            let r16 = radar_range(16.0 * p, &rp).unwrap();
            prop_assert!(rel_err(r16, 2.0 * r1) < 1e-12);
        }

        // Evaluating the SNR at the radar range recovers eta_min.
        #[test]
        fn range_snr_round_trip(p in 1.0f64..100.0) {
            let rp = table1_radar();
            let r = radar_range(p, &rp).unwrap();
            let eta = radar_snr(p, r, &rp).unwrap();
            prop_assert!(rel_err(eta, rp.snr_min) < 1e-9);
        }

        // Channel gain follows the d^-2 law and decreases with distance.
        #[test]
        fn gain_square_law(d in 1.0f64..5000.0, beta in 1.1f64..10.0) {
            let cp = table1_comm();
            let g1 = channel_gain(d, &cp).unwrap();
            let g2 = channel_gain(beta * d, &cp).unwrap();
            prop_assert!(rel_err(g2, g1 / (beta * beta)) < 1e-12);
            prop_assert!(g2 < g1);
        }

        // Rate increases with SINR; SINR increases in own power and
        // decreases in an interferer's power.
        #[test]
        fn sinr_rate_monotonicity(p0 in 0.1f64..30.0, p1 in 0.1f64..30.0, dp in 0.1f64..5.0) {
            let cp = table1_comm();
            let g = [2e-9, 3e-9];
            let base = sinr(0, &[p0, p1], &g, &cp, 20.0, InterferenceMode::Full);
            let more_own = sinr(0, &[p0 + dp, p1], &g, &cp, 20.0, InterferenceMode::Full);
            let more_other = sinr(0, &[p0, p1 + dp], &g, &cp, 20.0, InterferenceMode::Full);
            prop_assert!(more_own > base);
            prop_assert!(more_other < base);
            prop_assert!(data_rate(more_own, &cp) > data_rate(base, &cp));
        }
    }
}
