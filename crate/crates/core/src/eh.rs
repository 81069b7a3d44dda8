//! Harvested-power budget for a chain of cladded nodes.
//!
//! Every node emits with a cosine pattern about its boresight. A receiver
//! captures `P_tx · g(offset) · A / (4πd²)` through its effective aperture
//! `A`, scaled by its cladding enhancement; a rectifier efficiency turns the
//! captured power into harvested power.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scene::lambertian_gain;

fn default_one() -> f64 {
    1.0
}

fn default_true() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainNode {
    pub id: u32,
    /// Metres.
    pub position: [f64; 2],
    /// Emission direction, radians from +x.
    pub boresight: f64,
    /// Watts.
    pub tx_power: f64,
    /// Effective capture aperture in m² before enhancement.
    pub capture_area: f64,
    #[serde(default = "default_one")]
    pub collector_enhancement: f64,
    #[serde(default = "default_one")]
    pub conversion_efficiency: f64,
    /// Node whose emission carries this node's data.
    #[serde(default)]
    pub uplink: Option<u32>,
    /// Whether the uplink emission is kept for detection rather than harvested.
    #[serde(default = "default_true")]
    pub uplink_information_bearing: bool,
}

impl ChainNode {
    pub fn validate(&self) -> Result<()> {
        let finite = self.position.iter().all(|v| v.is_finite()) && self.boresight.is_finite();
        if !finite {
            return Err(Error::Config(format!(
                "node {}: non-finite geometry",
                self.id
            )));
        }
        if !(self.tx_power >= 0.0 && self.tx_power.is_finite()) {
            return Err(Error::Config(format!(
                "node {}: tx_power must be >= 0",
                self.id
            )));
        }
        if !(self.capture_area >= 0.0 && self.capture_area.is_finite()) {
            return Err(Error::Config(format!(
                "node {}: capture_area must be >= 0",
                self.id
            )));
        }
        if !(self.collector_enhancement >= 0.0 && self.collector_enhancement.is_finite()) {
            return Err(Error::Config(format!(
                "node {}: collector_enhancement must be >= 0",
                self.id
            )));
        }
        if !(0.0..=1.0).contains(&self.conversion_efficiency) {
            return Err(Error::Config(format!(
                "node {}: conversion_efficiency must lie in [0, 1]",
                self.id
            )));
        }
        Ok(())
    }

    fn excludes(&self, source: &ChainNode) -> bool {
        self.uplink_information_bearing && self.uplink == Some(source.id)
    }
}

/// Power through an aperture of `rx_capture_area` at `rx_position`.
pub fn link_received_power(
    tx: &ChainNode,
    rx_position: [f64; 2],
    rx_capture_area: f64,
) -> Result<f64> {
    let dx = rx_position[0] - tx.position[0];
    let dy = rx_position[1] - tx.position[1];
    let d2 = dx * dx + dy * dy;
    if d2 == 0.0 {
        return Err(Error::Domain(format!(
            "receiver coincides with node {}",
            tx.id
        )));
    }
    let offset = dy.atan2(dx) - tx.boresight;
    Ok(tx.tx_power * lambertian_gain(offset) * rx_capture_area / (4.0 * std::f64::consts::PI * d2))
}

/// Enhanced power captured by `node` from each ambient source, with the
/// information-bearing uplink left out.
fn captured(node: &ChainNode, ambient: &[&ChainNode]) -> Result<Vec<(u32, f64)>> {
    ambient
        .iter()
        .filter(|s| s.id != node.id && !node.excludes(s))
        .map(|s| {
            let p = link_received_power(s, node.position, node.capture_area)?;
            Ok((s.id, node.collector_enhancement * p))
        })
        .collect()
}

/// `η · E · Σ link_received_power` over `ambient`, excluding the node's
/// information-bearing uplink. No per-source cap is applied here.
pub fn harvested_power(node: &ChainNode, ambient: &[&ChainNode]) -> Result<f64> {
    let total: f64 = captured(node, ambient)?.iter().map(|(_, p)| p).sum();
    Ok(node.conversion_efficiency * total)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodeHarvest {
    pub id: u32,
    pub harvested_w: f64,
    /// Harvested share coming from the node's uplink source when that
    /// emission is not kept for detection.
    pub main_link_leak_w: f64,
    /// Harvested share from every other node.
    pub interference_w: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HarvestReport {
    pub nodes: Vec<NodeHarvest>,
    pub total_harvested_w: f64,
    pub total_transmitted_w: f64,
    /// Sources whose captured power summed over all receivers exceeded
    /// their transmit power and was scaled down to it.
    pub saturated_sources: Vec<u32>,
}

/// Per-node harvest with every other node treated as ambient.
pub fn chain_energy_budget(nodes: &[ChainNode]) -> Result<HarvestReport> {
    if nodes.is_empty() {
        return Err(Error::Config("chain needs at least one node".into()));
    }
    for (i, n) in nodes.iter().enumerate() {
        n.validate()?;
        for m in &nodes[..i] {
            if m.id == n.id {
                return Err(Error::Config(format!("duplicate node id {}", n.id)));
            }
            if m.position == n.position {
                return Err(Error::Config(format!(
                    "nodes {} and {} share a position",
                    m.id, n.id
                )));
            }
        }
    }
    let refs: Vec<&ChainNode> = nodes.iter().collect();
    let captured: Vec<Vec<(u32, f64)>> = nodes
        .iter()
        .map(|n| captured(n, &refs))
        .collect::<Result<_>>()?;

    // A source cannot deliver more than it emits, however large the apertures.
    let mut scale = vec![1.0; nodes.len()];
    let mut saturated_sources = Vec::new();
    for (k, src) in nodes.iter().enumerate() {
        let sum: f64 = captured
            .iter()
            .flatten()
            .filter(|(id, _)| *id == src.id)
            .map(|(_, p)| p)
            .sum();
        if sum > src.tx_power {
            scale[k] = src.tx_power / sum;
            saturated_sources.push(src.id);
        }
    }
    let index = |id: u32| nodes.iter().position(|n| n.id == id).unwrap_or(0);

    let mut report = Vec::with_capacity(nodes.len());
    for (node, caught) in nodes.iter().zip(&captured) {
        let (mut leak, mut interference) = (0.0, 0.0);
        for &(id, p) in caught {
            let h = node.conversion_efficiency * p * scale[index(id)];
            if node.uplink == Some(id) {
                leak += h;
            } else {
                interference += h;
            }
        }
        report.push(NodeHarvest {
            id: node.id,
            harvested_w: leak + interference,
            main_link_leak_w: leak,
            interference_w: interference,
        });
    }
    Ok(HarvestReport {
        total_harvested_w: report.iter().map(|n| n.harvested_w).sum(),
        total_transmitted_w: nodes.iter().map(|n| n.tx_power).sum(),
        nodes: report,
        saturated_sources,
    })
}

/// Scenario file layout.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainScenario {
    pub nodes: Vec<ChainNode>,
}
