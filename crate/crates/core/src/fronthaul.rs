//! Fronthaul bit rates for CPRI and the intra-PHY split carrying hard bits
//! downlink and LLR soft bits uplink, plus the fiber latency/distance
//! conversion used to place CUs.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Propagation speed of light in optical fiber, m/s.
pub const FIBER_SPEED_MPS: f64 = 2.25e8;

/// LTE channel bandwidths with their resource-block count and sampling rate.
const LTE_PRESETS: [(f64, u32, f64); 6] = [
    (1.4, 6, 1.92),
    (3.0, 15, 3.84),
    (5.0, 25, 7.68),
    (10.0, 50, 15.36),
    (15.0, 75, 23.04),
    (20.0, 100, 30.72),
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FronthaulSpecRepr")]
pub struct FronthaulSpec {
    pub cell_bandwidth_mhz: f64,
    pub n_prb: u32,
    /// Antennas for CPRI, spatial layers for the split rates.
    pub antennas: u32,
    pub sample_rate_msps: f64,
    pub iq_sample_bits: u32,
    pub line_coding_overhead: f64,
    pub cpri_control_overhead: f64,
    pub modulation_bits: u32,
    pub llr_bits: u32,
    pub symbols_per_subframe: u32,
    pub subcarriers_per_prb: u32,
    pub fiber_speed_mps: f64,
}

/// All fields but the bandwidth default from the LTE preset.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FronthaulSpecRepr {
    #[serde(default = "default_bandwidth")]
    cell_bandwidth_mhz: f64,
    n_prb: Option<u32>,
    antennas: Option<u32>,
    sample_rate_msps: Option<f64>,
    iq_sample_bits: Option<u32>,
    line_coding_overhead: Option<f64>,
    cpri_control_overhead: Option<f64>,
    modulation_bits: Option<u32>,
    llr_bits: Option<u32>,
    symbols_per_subframe: Option<u32>,
    subcarriers_per_prb: Option<u32>,
    fiber_speed_mps: Option<f64>,
}

fn default_bandwidth() -> f64 {
    20.0
}

impl TryFrom<FronthaulSpecRepr> for FronthaulSpec {
    type Error = Error;

    fn try_from(r: FronthaulSpecRepr) -> Result<Self> {
        let base = FronthaulSpec::lte(r.cell_bandwidth_mhz)?;
        let spec = FronthaulSpec {
            cell_bandwidth_mhz: r.cell_bandwidth_mhz,
            n_prb: r.n_prb.unwrap_or(base.n_prb),
            antennas: r.antennas.unwrap_or(base.antennas),
            sample_rate_msps: r.sample_rate_msps.unwrap_or(base.sample_rate_msps),
            iq_sample_bits: r.iq_sample_bits.unwrap_or(base.iq_sample_bits),
            line_coding_overhead: r.line_coding_overhead.unwrap_or(base.line_coding_overhead),
            cpri_control_overhead: r
                .cpri_control_overhead
                .unwrap_or(base.cpri_control_overhead),
            modulation_bits: r.modulation_bits.unwrap_or(base.modulation_bits),
            llr_bits: r.llr_bits.unwrap_or(base.llr_bits),
            symbols_per_subframe: r.symbols_per_subframe.unwrap_or(base.symbols_per_subframe),
            subcarriers_per_prb: r.subcarriers_per_prb.unwrap_or(base.subcarriers_per_prb),
            fiber_speed_mps: r.fiber_speed_mps.unwrap_or(base.fiber_speed_mps),
        };
        spec.validate()?;
        Ok(spec)
    }
}

impl Default for FronthaulSpec {
    fn default() -> Self {
        FronthaulSpec::lte(20.0).expect("20 MHz preset")
    }
}

impl FronthaulSpec {
    /// Single-antenna, 64-QAM, normal-CP cell of the given LTE bandwidth.
    pub fn lte(bandwidth_mhz: f64) -> Result<Self> {
        let (_, n_prb, sample_rate_msps) = LTE_PRESETS
            .iter()
            .copied()
            .find(|(bw, _, _)| (*bw - bandwidth_mhz).abs() < 1e-9)
            .ok_or_else(|| {
                invalid(format!(
                    "cell bandwidth {bandwidth_mhz} MHz is not one of 1.4, 3, 5, 10, 15, 20"
                ))
            })?;
        Ok(FronthaulSpec {
            cell_bandwidth_mhz: bandwidth_mhz,
            n_prb,
            antennas: 1,
            sample_rate_msps,
            iq_sample_bits: 15,
            line_coding_overhead: 10.0 / 8.0,
            cpri_control_overhead: 16.0 / 15.0,
            modulation_bits: 6,
            llr_bits: 8,
            symbols_per_subframe: 14,
            subcarriers_per_prb: 12,
            fiber_speed_mps: FIBER_SPEED_MPS,
        })
    }

    pub fn validate(&self) -> Result<()> {
        let counts = [
            ("n_prb", self.n_prb),
            ("antennas", self.antennas),
            ("iq_sample_bits", self.iq_sample_bits),
            ("llr_bits", self.llr_bits),
            ("symbols_per_subframe", self.symbols_per_subframe),
            ("subcarriers_per_prb", self.subcarriers_per_prb),
        ];
        if let Some((name, _)) = counts.iter().find(|(_, v)| *v == 0) {
            return Err(invalid(format!("{name} must be positive")));
        }
        if ![2, 4, 6].contains(&self.modulation_bits) {
            return Err(invalid(format!(
                "modulation_bits must be 2, 4 or 6, got {}",
                self.modulation_bits
            )));
        }
        if !(self.line_coding_overhead >= 1.0 && self.cpri_control_overhead >= 1.0) {
            return Err(invalid("line and control overheads must be >= 1"));
        }
        if !(self.sample_rate_msps > 0.0 && self.fiber_speed_mps > 0.0) {
            return Err(invalid("sample rate and fiber speed must be positive"));
        }
        Ok(())
    }

    pub fn with_antennas(mut self, antennas: u32) -> Self {
        self.antennas = antennas;
        self
    }

    pub fn with_modulation_bits(mut self, bits: u32) -> Self {
        self.modulation_bits = bits;
        self
    }

    pub fn with_llr_bits(mut self, bits: u32) -> Self {
        self.llr_bits = bits;
        self
    }

    fn coded_bits_per_subframe(&self) -> f64 {
        f64::from(self.n_prb)
            * f64::from(self.subcarriers_per_prb)
            * f64::from(self.symbols_per_subframe)
            * f64::from(self.modulation_bits)
            * f64::from(self.antennas)
    }
}

/// CPRI line rate in bit/s. Depends only on the radio configuration, not on
/// cell traffic.
pub fn cpri_rate(spec: &FronthaulSpec) -> f64 {
    spec.sample_rate_msps
        * 1e6
        * 2.0
        * f64::from(spec.iq_sample_bits)
        * f64::from(spec.antennas)
        * spec.cpri_control_overhead
        * spec.line_coding_overhead
}

/// Peak downlink rate of the split in bit/s: every resource element of a
/// fully loaded subframe carries `modulation_bits` hard bits.
pub fn split6_downlink_rate(spec: &FronthaulSpec) -> f64 {
    spec.coded_bits_per_subframe() * 1000.0
}

/// Peak uplink rate of the split in bit/s: one `llr_bits`-wide soft value
/// per coded bit.
pub fn split6_uplink_rate(spec: &FronthaulSpec) -> f64 {
    split6_downlink_rate(spec) * f64::from(spec.llr_bits)
}

/// One-way fiber distance covered in `budget_ms`, in km.
pub fn latency_to_distance(budget_ms: f64, fiber_speed_mps: f64) -> Result<f64> {
    if !(budget_ms >= 0.0) {
        return Err(invalid(format!(
            "latency budget must be >= 0, got {budget_ms}"
        )));
    }
    Ok(fiber_speed_mps * budget_ms * 1e-3 / 1e3)
}

/// One-way propagation delay over `distance_km` of fiber, in ms.
pub fn distance_to_latency(distance_km: f64, fiber_speed_mps: f64) -> Result<f64> {
    if !(distance_km >= 0.0) {
        return Err(invalid(format!("distance must be >= 0, got {distance_km}")));
    }
    Ok(distance_km * 1e3 / fiber_speed_mps * 1e3)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Rates {
    pub cpri_bps: f64,
    pub split6_dl_peak_bps: f64,
    pub split6_ul_peak_bps: f64,
    pub split6_dl_average_bps: f64,
    pub split6_ul_average_bps: f64,
}

impl Rates {
    fn scaled(&self, k: f64) -> Self {
        Rates {
            cpri_bps: self.cpri_bps * k,
            split6_dl_peak_bps: self.split6_dl_peak_bps * k,
            split6_ul_peak_bps: self.split6_ul_peak_bps * k,
            split6_dl_average_bps: self.split6_dl_average_bps * k,
            split6_ul_average_bps: self.split6_ul_average_bps * k,
        }
    }
}

/// CPRI against the split for a pool of identical cells.
#[derive(Debug, Clone, Serialize)]
pub struct AggregationReport {
    pub n_cells: u32,
    pub load_factor: f64,
    pub spec: FronthaulSpec,
    pub per_cell: Rates,
    pub total: Rates,
    pub cpri_to_split6_dl: f64,
    pub cpri_to_split6_ul: f64,
    /// CPRI runs at a constant rate whatever the traffic.
    pub cpri_constant_bit_rate: bool,
    /// The split rate follows cell load.
    pub split6_traffic_dependent: bool,
}

pub fn aggregation_report(
    n_cells: u32,
    spec: &FronthaulSpec,
    load_factor: f64,
) -> Result<AggregationReport> {
    if n_cells == 0 {
        return Err(invalid("n_cells must be >= 1"));
    }
    if !(0.0..=1.0).contains(&load_factor) {
        return Err(invalid(format!(
            "load factor must lie in [0, 1], got {load_factor}"
        )));
    }
    spec.validate()?;
    let dl = split6_downlink_rate(spec);
    let ul = split6_uplink_rate(spec);
    let per_cell = Rates {
        cpri_bps: cpri_rate(spec),
        split6_dl_peak_bps: dl,
        split6_ul_peak_bps: ul,
        split6_dl_average_bps: dl * load_factor,
        split6_ul_average_bps: ul * load_factor,
    };
    Ok(AggregationReport {
        n_cells,
        load_factor,
        spec: *spec,
        per_cell,
        total: per_cell.scaled(f64::from(n_cells)),
        cpri_to_split6_dl: per_cell.cpri_bps / dl,
        cpri_to_split6_ul: per_cell.cpri_bps / ul,
        cpri_constant_bit_rate: true,
        split6_traffic_dependent: true,
    })
}

impl fmt::Display for AggregationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mbps = |x: f64| x / 1e6;
        writeln!(
            f,
            "{} cell(s), {} MHz, {} antenna(s), load factor {}",
            self.n_cells, self.spec.cell_bandwidth_mhz, self.spec.antennas, self.load_factor
        )?;
        writeln!(
            f,
            "{:<22} {:>16} {:>16}",
            "rate", "per cell (Mbps)", "total (Mbps)"
        )?;
        let rows = [
            ("cpri", self.per_cell.cpri_bps, self.total.cpri_bps),
            (
                "split6 dl peak",
                self.per_cell.split6_dl_peak_bps,
                self.total.split6_dl_peak_bps,
            ),
            (
                "split6 ul peak",
                self.per_cell.split6_ul_peak_bps,
                self.total.split6_ul_peak_bps,
            ),
            (
                "split6 dl average",
                self.per_cell.split6_dl_average_bps,
                self.total.split6_dl_average_bps,
            ),
            (
                "split6 ul average",
                self.per_cell.split6_ul_average_bps,
                self.total.split6_ul_average_bps,
            ),
        ];
        for (name, one, all) in rows {
            writeln!(f, "{:<22} {:>16.3} {:>16.3}", name, mbps(one), mbps(all))?;
        }
        writeln!(f, "cpri / split6 dl       {:>16.3}", self.cpri_to_split6_dl)?;
        write!(f, "cpri / split6 ul       {:>16.3}", self.cpri_to_split6_ul)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-9 * b.abs().max(1.0)
    }

    #[test]
    fn cpri_20mhz_single_antenna() {
        let s = FronthaulSpec::default();
        assert!(close(cpri_rate(&s), 1.2288e9));
        assert!(close(cpri_rate(&s.with_antennas(2)), 2.0 * 1.2288e9));
        assert_eq!(cpri_rate(&s), cpri_rate(&s.with_modulation_bits(2)));
    }

    #[test]
    fn split6_rates() {
        let s = FronthaulSpec::default();
        assert!(close(split6_downlink_rate(&s), 100.8e6));
        assert!(close(
            split6_downlink_rate(&s.with_modulation_bits(2)),
            100.8e6 / 3.0
        ));
        assert!(close(split6_downlink_rate(&s.with_antennas(2)), 201.6e6));
        assert!(close(split6_uplink_rate(&s), 806.4e6));
        assert!(close(
            split6_uplink_rate(&s.with_llr_bits(1)),
            split6_downlink_rate(&s)
        ));
        assert!(close(
            split6_uplink_rate(&s) / split6_downlink_rate(&s),
            8.0
        ));
    }

    #[test]
    fn distance_conversions() {
        assert!(close(
            latency_to_distance(1.13, FIBER_SPEED_MPS).unwrap(),
            254.25
        ));
        assert_eq!(latency_to_distance(0.0, FIBER_SPEED_MPS).unwrap(), 0.0);
        assert!(latency_to_distance(-1.0, FIBER_SPEED_MPS).is_err());
        assert!(close(
            distance_to_latency(225.0, FIBER_SPEED_MPS).unwrap(),
            1.0
        ));
    }

    #[test]
    fn report_for_hundred_cells() {
        let s = FronthaulSpec::default();
        let r = aggregation_report(100, &s, 1.0).unwrap();
        assert!(close(r.total.cpri_bps, 122.88e9));
        assert!(close(r.total.split6_dl_peak_bps, 10.08e9));
        assert!((r.cpri_to_split6_dl - 12.19).abs() < 0.01);
        let one = aggregation_report(1, &s, 1.0).unwrap();
        assert_eq!(one.total, one.per_cell);
        assert!(close(one.per_cell.cpri_bps, cpri_rate(&s)));
        let idle = aggregation_report(1, &s, 0.0).unwrap();
        assert_eq!(idle.per_cell.cpri_bps, one.per_cell.cpri_bps);
        assert_eq!(idle.per_cell.split6_dl_average_bps, 0.0);
        assert!(aggregation_report(0, &s, 1.0).is_err());
        assert!(aggregation_report(1, &s, 1.5).is_err());
        assert!(r.to_string().contains("cpri"));
    }

    #[test]
    fn spec_from_json_defaults_to_preset() {
        let s: FronthaulSpec =
            serde_json::from_str(r#"{"cell_bandwidth_mhz": 10, "antennas": 2}"#).unwrap();
        assert_eq!(s.n_prb, 50);
        assert_eq!(s.antennas, 2);
        assert!(serde_json::from_str::<FronthaulSpec>(r#"{"cell_bandwidth_mhz": 7}"#).is_err());
        assert!(serde_json::from_str::<FronthaulSpec>(r#"{"modulation_bits": 3}"#).is_err());
        assert!(serde_json::from_str::<FronthaulSpec>(r#"{"bogus": 3}"#).is_err());
    }

    proptest! {
        #[test]
        fn latency_distance_round_trip(ms in 0.0f64..100.0) {
            let km = latency_to_distance(ms, FIBER_SPEED_MPS).unwrap();
            let back = distance_to_latency(km, FIBER_SPEED_MPS).unwrap();
            prop_assert!((back - ms).abs() <= 1e-12 * ms.max(1.0));
        }

        #[test]
        fn rates_linear_and_monotone(ant in 1u32..8, cells in 1u32..200) {
            let s = FronthaulSpec::default();
            let base = aggregation_report(1, &s, 1.0).unwrap();
            let r = aggregation_report(cells, &s.with_antennas(ant), 1.0).unwrap();
            let k = f64::from(ant) * f64::from(cells);
            prop_assert!(close(r.total.cpri_bps, k * base.per_cell.cpri_bps));
            prop_assert!(close(r.total.split6_dl_peak_bps, k * base.per_cell.split6_dl_peak_bps));
            prop_assert!(close(r.total.split6_ul_peak_bps, k * base.per_cell.split6_ul_peak_bps));
            for m in [2, 4] {
                prop_assert!(split6_downlink_rate(&s.with_modulation_bits(m)) < split6_downlink_rate(&s.with_modulation_bits(m + 2)));
            }
            prop_assert!(split6_uplink_rate(&s.with_llr_bits(ant)) < split6_uplink_rate(&s.with_llr_bits(ant + 1)));
        }
    }
}
