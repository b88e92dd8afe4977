//! Random problem-instance generation: device, AP and node parameters
//! drawn from configured ranges, with uplink rates from a log-distance
//! path-loss plus Shannon-capacity channel model.
//!
//! Generation is a pure function of (config, seed). Every entity draws
//! from its own substream, so adding WDs leaves earlier entities' draws
//! untouched.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    AccessPoint, EdgeNode, NodeKind, StabilityMode, SystemModel, WirelessDevice,
};

/// Identifier of the reproducible RNG scheme, recorded in output files.
pub const RNG_ALGORITHM_ID: &str = "chacha8/splitmix64-substreams-v1";

/// How a node's total capability is divided across slices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitMode {
    #[default]
    Equal,
    Dirichlet,
}

/// Path-loss and noise parameters of the uplink channel model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelParams {
    pub path_loss_exponent: f64,
    pub reference_loss_db: f64,
    pub noise_psd_w_per_hz: f64,
}

impl Default for ChannelParams {
    fn default() -> Self {
        Self {
            path_loss_exponent: 3.0,
            reference_loss_db: 40.0,
            noise_psd_w_per_hz: 4e-21,
        }
    }
}

/// Scenario generation parameters. Human-entered units (MB, MHz) are kept
/// in the config and converted to bits and Hz at model generation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub num_wds: usize,
    pub num_aps: usize,
    pub num_coins: usize,
    pub num_mecs: usize,
    pub num_slices: usize,
    /// WD processing power range, GIPS.
    pub wd_gips_range: [f64; 2],
    /// WD transmission power range, watts.
    pub wd_power_range: [f64; 2],
    /// COIN processing power range, GIPS.
    pub coin_gips_range: [f64; 2],
    /// MEC processing power, GIPS.
    pub mec_gips: f64,
    /// Task input size range, megabytes.
    pub task_size_range_mb: [f64; 2],
    /// AP bandwidth choices, MHz.
    pub ap_bandwidths_mhz: Vec<f64>,
    /// WD-to-COIN and WD-to-MEC distances, abstract units (recorded for
    /// fidelity; the uplink model uses WD-to-AP distances).
    pub coin_distance: f64,
    pub mec_distance: f64,
    /// WD-to-AP distance range feeding the path-loss model.
    pub wd_ap_distance_range: [f64; 2],
    /// Task arrival rate range, tasks per second.
    pub arrival_rate_range: [f64; 2],
    /// Instruction demand per megabyte of input, giga-instructions.
    pub instructions_per_megabyte: f64,
    /// Relative jitter of per-slice instruction counts around the local
    /// count: factors drawn from [1 - j, 1 + j].
    pub slice_instruction_jitter: f64,
    pub path_loss_exponent: f64,
    pub reference_loss_db: f64,
    pub noise_psd_w_per_hz: f64,
    pub stability_mode: StabilityMode,
    pub split_mode: SplitMode,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        let channel = ChannelParams::default();
        Self {
            num_wds: 4,
            num_aps: 3,
            num_coins: 8,
            num_mecs: 1,
            num_slices: 3,
            wd_gips_range: [2.0, 45.4],
            wd_power_range: [1e-6, 0.1],
            coin_gips_range: [72.0, 768.0],
            mec_gips: 1285.0,
            task_size_range_mb: [1.7, 10.0],
            ap_bandwidths_mhz: vec![18.0, 27.0],
            coin_distance: 2.0,
            mec_distance: 4.0,
            wd_ap_distance_range: [1.0, 4.0],
            arrival_rate_range: [0.1, 1.0],
            instructions_per_megabyte: 4.0,
            slice_instruction_jitter: 0.2,
            path_loss_exponent: channel.path_loss_exponent,
            reference_loss_db: channel.reference_loss_db,
            noise_psd_w_per_hz: channel.noise_psd_w_per_hz,
            stability_mode: StabilityMode::NodeTotal,
            split_mode: SplitMode::Equal,
        }
    }
}

impl ScenarioConfig {
    pub fn channel_params(&self) -> ChannelParams {
        ChannelParams {
            path_loss_exponent: self.path_loss_exponent,
            reference_loss_db: self.reference_loss_db,
            noise_psd_w_per_hz: self.noise_psd_w_per_hz,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let err = |msg: &str| Err(Error::ConfigInvalid(msg.into()));
        if self.num_wds == 0 || self.num_aps == 0 || self.num_slices == 0 {
            return err("num_wds, num_aps and num_slices must all be >= 1");
        }
        if self.num_coins + self.num_mecs == 0 {
            return err("need at least one edge node");
        }
        for (name, range) in [
            ("wd_gips_range", self.wd_gips_range),
            ("wd_power_range", self.wd_power_range),
            ("coin_gips_range", self.coin_gips_range),
            ("task_size_range_mb", self.task_size_range_mb),
            ("wd_ap_distance_range", self.wd_ap_distance_range),
            ("arrival_rate_range", self.arrival_rate_range),
        ] {
            if !(range[0] > 0.0 && range[0] <= range[1]) {
                return Err(Error::ConfigInvalid(format!(
                    "{name} must be strictly positive with min <= max, got {range:?}"
                )));
            }
        }
        if self.mec_gips <= 0.0 {
            return err("mec_gips must be positive");
        }
        if self.ap_bandwidths_mhz.is_empty() || self.ap_bandwidths_mhz.iter().any(|&b| b <= 0.0) {
            return err("ap_bandwidths_mhz must be non-empty and positive");
        }
        if self.instructions_per_megabyte <= 0.0 {
            return err("instructions_per_megabyte must be positive");
        }
        if !(0.0..1.0).contains(&self.slice_instruction_jitter) {
            return err("slice_instruction_jitter must be in [0, 1)");
        }
        if self.noise_psd_w_per_hz <= 0.0 || self.path_loss_exponent <= 0.0 {
            return err("channel parameters must be positive");
        }
        Ok(())
    }
}

const DOMAIN_WD: u64 = 0x5744; // "WD"
const DOMAIN_AP: u64 = 0x4150; // "AP"
const DOMAIN_NODE: u64 = 0x4e4f; // "NO"

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Mixes a base seed with a stream tag; used for per-run and per-entity
/// substreams.
pub fn mix_seed(seed: u64, stream: u64) -> u64 {
    splitmix64(splitmix64(seed) ^ splitmix64(stream))
}

fn substream(seed: u64, domain: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(mix_seed(mix_seed(seed, domain), index))
}

fn uniform(rng: &mut ChaCha8Rng, range: [f64; 2]) -> f64 {
    if range[0] == range[1] {
        range[0]
    } else {
        rng.random_range(range[0]..range[1])
    }
}

/// Shannon rate over a log-distance path-loss link:
/// `B * log2(1 + P_rx / (N0 * B))` with
/// `P_rx = P_tx * 10^(-(L0 + 10*eta*log10(d)) / 10)`.
pub fn channel_rate(
    bandwidth_hz: f64,
    tx_power_w: f64,
    distance: f64,
    params: &ChannelParams,
) -> f64 {
    let path_loss_db = params.reference_loss_db + 10.0 * params.path_loss_exponent * distance.log10();
    let received = tx_power_w * 10f64.powf(-path_loss_db / 10.0);
    let noise = params.noise_psd_w_per_hz * bandwidth_hz;
    bandwidth_hz * (1.0 + received / noise).log2()
}

/// Generates one problem instance, deterministically from (config, seed).
pub fn generate(config: &ScenarioConfig, seed: u64) -> Result<SystemModel> {
    config.validate()?;
    let channel = config.channel_params();

    let mut wds = Vec::with_capacity(config.num_wds);
    let mut ap_distances: Vec<Vec<f64>> = Vec::with_capacity(config.num_wds);
    for i in 0..config.num_wds {
        let mut rng = substream(seed, DOMAIN_WD, i as u64);
        let local_capability = uniform(&mut rng, config.wd_gips_range);
        let tx_power = uniform(&mut rng, config.wd_power_range);
        let size_mb = uniform(&mut rng, config.task_size_range_mb);
        let arrival_rate = uniform(&mut rng, config.arrival_rate_range);
        let local_instructions = config.instructions_per_megabyte * size_mb;
        let jitter = config.slice_instruction_jitter;
        let slice_instructions = (0..config.num_slices)
            .map(|_| local_instructions * uniform(&mut rng, [1.0 - jitter, 1.0 + jitter]))
            .collect();
        ap_distances.push(
            (0..config.num_aps)
                .map(|_| uniform(&mut rng, config.wd_ap_distance_range))
                .collect(),
        );
        wds.push(WirelessDevice {
            id: i,
            local_capability,
            tx_power,
            task_size: size_mb * 8e6,
            local_instructions,
            slice_instructions,
            arrival_rate,
        });
    }

    let mut aps = Vec::with_capacity(config.num_aps);
    for a in 0..config.num_aps {
        let mut rng = substream(seed, DOMAIN_AP, a as u64);
        let idx = rng.random_range(0..config.ap_bandwidths_mhz.len());
        let bandwidth = config.ap_bandwidths_mhz[idx] * 1e6;
        let rates = (0..config.num_wds)
            .map(|i| channel_rate(bandwidth, wds[i].tx_power, ap_distances[i][a], &channel))
            .collect();
        aps.push(AccessPoint {
            id: a,
            bandwidth,
            rates,
        });
    }

    let num_nodes = config.num_coins + config.num_mecs;
    let mut nodes = Vec::with_capacity(num_nodes);
    for j in 0..num_nodes {
        let mut rng = substream(seed, DOMAIN_NODE, j as u64);
        let (kind, total) = if j < config.num_coins {
            (NodeKind::Coin, uniform(&mut rng, config.coin_gips_range))
        } else {
            (NodeKind::Mec, config.mec_gips)
        };
        let shares: Vec<f64> = match config.split_mode {
            SplitMode::Equal => vec![1.0 / config.num_slices as f64; config.num_slices],
            SplitMode::Dirichlet => {
                // exponential spacings normalized to the simplex
                let draws: Vec<f64> = (0..config.num_slices)
                    .map(|_| -(1.0 - rng.random::<f64>()).ln().max(1e-12))
                    .collect();
                let sum: f64 = draws.iter().sum();
                draws.iter().map(|d| d / sum).collect()
            }
        };
        nodes.push(EdgeNode {
            id: j,
            kind,
            slice_capability: shares.iter().map(|s| s * total).collect(),
        });
    }

    let model = SystemModel {
        wds,
        aps,
        nodes,
        num_slices: config.num_slices,
    };
    model.validate()?;
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generation_is_deterministic() {
        let config = ScenarioConfig::default();
        let a = generate(&config, 1234).unwrap();
        let b = generate(&config, 1234).unwrap();
        assert_eq!(a, b);
        let c = generate(&config, 1235).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn adding_wds_keeps_earlier_draws() {
        let mut config = ScenarioConfig::default();
        config.num_wds = 3;
        let small = generate(&config, 99).unwrap();
        config.num_wds = 5;
        let large = generate(&config, 99).unwrap();
        for i in 0..3 {
            assert_eq!(small.wds[i], large.wds[i]);
        }
    }

    #[test]
    fn sampled_values_respect_ranges() {
        let config = ScenarioConfig::default();
        for seed in 0..50 {
            let m = generate(&config, seed).unwrap();
            for wd in &m.wds {
                assert!((2.0..=45.4).contains(&wd.local_capability));
                assert!((1e-6..=0.1).contains(&wd.tx_power));
                assert!((1.7 * 8e6..=10.0 * 8e6).contains(&wd.task_size));
                assert!((0.1..=1.0).contains(&wd.arrival_rate));
            }
            for ap in &m.aps {
                assert!(ap.bandwidth == 18e6 || ap.bandwidth == 27e6);
            }
            for node in &m.nodes {
                let total: f64 = node.slice_capability.iter().sum();
                match node.kind {
                    NodeKind::Coin => assert!((72.0..=768.0).contains(&total)),
                    NodeKind::Mec => assert!((total - 1285.0).abs() < 1e-9),
                }
            }
        }
    }

    #[test]
    fn node_split_preserves_total() {
        for split in [SplitMode::Equal, SplitMode::Dirichlet] {
            let config = ScenarioConfig {
                split_mode: split,
                ..Default::default()
            };
            let m = generate(&config, 7).unwrap();
            let mec = m.nodes.last().unwrap();
            assert_eq!(mec.kind, NodeKind::Mec);
            let total: f64 = mec.slice_capability.iter().sum();
            assert!((total - 1285.0).abs() / 1285.0 < 1e-9);
        }
    }

    #[test]
    fn single_slice_gets_whole_capability() {
        let config = ScenarioConfig {
            num_slices: 1,
            ..Default::default()
        };
        let m = generate(&config, 3).unwrap();
        for node in &m.nodes {
            assert_eq!(node.slice_capability.len(), 1);
        }
        assert!((m.nodes.last().unwrap().slice_capability[0] - 1285.0).abs() < 1e-9);
    }

    #[test]
    fn channel_rate_shannon_identities() {
        // arrange SNR = 1: received power equals noise power
        let params = ChannelParams {
            path_loss_exponent: 2.0,
            reference_loss_db: 0.0,
            noise_psd_w_per_hz: 1e-9,
        };
        let bandwidth = 18e6;
        let noise = 1e-9 * bandwidth;
        // at distance 1 the path loss is 0 dB, so tx power = noise gives SNR 1
        let rate = channel_rate(bandwidth, noise, 1.0, &params);
        assert!((rate - 18e6).abs() < 1e-3);

        // distance x10 with exponent 2 -> received power x0.01
        let p1 = channel_rate(1.0, 1.0, 1.0, &params);
        let p10 = channel_rate(1.0, 1.0, 10.0, &params);
        // compare via SNR: 2^rate - 1 ratio
        let snr1 = 2f64.powf(p1) - 1.0;
        let snr10 = 2f64.powf(p10) - 1.0;
        assert!((snr10 / snr1 - 0.01).abs() < 1e-9);

        // monotone in tx power
        let lo = channel_rate(18e6, 0.001, 2.0, &params);
        let hi = channel_rate(18e6, 0.002, 2.0, &params);
        assert!(hi > lo);
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let mut config = ScenarioConfig::default();
        config.num_wds = 0;
        assert!(matches!(
            generate(&config, 0),
            Err(Error::ConfigInvalid(_))
        ));
        let mut config = ScenarioConfig::default();
        config.task_size_range_mb = [10.0, 1.7];
        assert!(generate(&config, 0).is_err());
        let mut config = ScenarioConfig::default();
        config.ap_bandwidths_mhz.clear();
        assert!(generate(&config, 0).is_err());
    }
}
