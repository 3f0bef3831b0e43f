//! Antenna gain tables and the parabolic receive-antenna model.

use std::path::Path;

use thiserror::Error;

use crate::constants::SPEED_OF_LIGHT;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AntennaError {
    #[error("invalid antenna: {0}")]
    InvalidAntenna(String),
    #[error("angle {0} deg outside [0, 180]")]
    OutOfRange(f64),
    #[error("pattern file line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("cannot read pattern file {path}: {reason}")]
    Io { path: String, reason: String },
}

/// Gain (dBi) as a function of off-boresight angle (deg), linearly
/// interpolated between nodes. Nodes start at 0° and end at 180°.
#[derive(Debug, Clone, PartialEq)]
pub struct AntennaPattern {
    name: String,
    nodes: Vec<(f64, f64)>,
}

impl AntennaPattern {
    pub fn new(name: impl Into<String>, nodes: Vec<(f64, f64)>) -> Result<Self, AntennaError> {
        let bad = |msg: String| Err(AntennaError::InvalidAntenna(msg));
        if nodes.len() < 2 {
            return bad("a pattern needs at least two nodes".into());
        }
        if nodes.iter().any(|(a, g)| !a.is_finite() || !g.is_finite()) {
            return bad("non-finite node".into());
        }
        if nodes[0].0 != 0.0 || nodes[nodes.len() - 1].0 != 180.0 {
            return bad("first node must be at 0 deg and last at 180 deg".into());
        }
        if let Some(w) = nodes.windows(2).find(|w| w[1].0 <= w[0].0) {
            return bad(format!("angles not strictly increasing at {} deg", w[1].0));
        }
        Ok(Self { name: name.into(), nodes })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn nodes(&self) -> &[(f64, f64)] {
        &self.nodes
    }

    pub fn gain(&self, angle_deg: f64) -> Result<f64, AntennaError> {
        if !(0.0..=180.0).contains(&angle_deg) {
            return Err(AntennaError::OutOfRange(angle_deg));
        }
        // First node whose angle is >= the query; exact at nodes.
        let idx = self.nodes.partition_point(|&(a, _)| a < angle_deg);
        let (a1, g1) = self.nodes[idx];
        if a1 == angle_deg || idx == 0 {
            return Ok(g1);
        }
        let (a0, g0) = self.nodes[idx - 1];
        let w = (angle_deg - a0) / (a1 - a0);
        Ok(g0 + w * (g1 - g0))
    }

    pub fn max_gain(&self) -> f64 {
        self.nodes.iter().map(|n| n.1).fold(f64::NEG_INFINITY, f64::max)
    }

    /// Main-lobe peak minus the highest gain beyond the first null.
    ///
    /// The first null is the first local minimum after boresight; returns
    /// `None` when the pattern decreases monotonically.
    pub fn peak_to_sidelobe(&self) -> Option<f64> {
        let gains: Vec<f64> = self.nodes.iter().map(|n| n.1).collect();
        let null = (1..gains.len() - 1).find(|&i| gains[i] < gains[i - 1] && gains[i] <= gains[i + 1])?;
        let main = gains[..null].iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let side = gains[null..].iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        (side > gains[null]).then_some(main - side)
    }

    /// Parses the plain-text pattern format: one `angle_deg gain_dbi` pair
    /// per line, `#` starts a comment.
    pub fn parse(name: &str, text: &str) -> Result<Self, AntennaError> {
        let mut nodes = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            let parsed = match fields.as_slice() {
                [a, g] => a.parse::<f64>().ok().zip(g.parse::<f64>().ok()),
                _ => None,
            };
            let node = parsed.ok_or_else(|| AntennaError::Parse {
                line: i + 1,
                reason: format!("expected `angle_deg gain_dbi`, found `{line}`"),
            })?;
            nodes.push(node);
        }
        Self::new(name, nodes)
    }

    pub fn load(path: &Path) -> Result<Self, AntennaError> {
        let text = std::fs::read_to_string(path).map_err(|e| AntennaError::Io {
            path: path.display().to_string(),
            reason: e.to_string(),
        })?;
        let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or("pattern");
        Self::parse(name, &text)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("# {}\n# angle_deg gain_dbi\n", self.name);
        for (a, g) in &self.nodes {
            out.push_str(&format!("{a} {g}\n"));
        }
        out
    }
}

/// Circular parabolic reflector with a quadratic (in dB) main lobe.
///
/// `G(θ) = G₀ − 3·(θ/θ½)²`, floored at `floor_dbi`, where θ½ is the
/// half-power half-angle (28° for the 56° beamwidth of a 0.25 m dish at L1).
#[derive(Debug, Clone, PartialEq)]
pub struct ParabolicAntenna {
    pub diameter_m: f64,
    pub efficiency: f64,
    pub half_power_half_angle_deg: f64,
    pub floor_dbi: f64,
    /// Pins G₀ instead of deriving it from aperture and efficiency.
    pub boresight_gain_dbi: Option<f64>,
}

impl ParabolicAntenna {
    pub fn new(diameter_m: f64, efficiency: f64) -> Self {
        Self {
            diameter_m,
            efficiency,
            half_power_half_angle_deg: 28.0,
            floor_dbi: -10.0,
            boresight_gain_dbi: None,
        }
    }

    fn validate(&self, frequency_mhz: f64) -> Result<(), AntennaError> {
        let bad = |m: &str| Err(AntennaError::InvalidAntenna(m.into()));
        if !(self.diameter_m > 0.0) {
            return bad("diameter must be positive");
        }
        if !(self.efficiency > 0.0 && self.efficiency <= 1.0) {
            return bad("efficiency must be in (0, 1]");
        }
        if !(frequency_mhz > 0.0) {
            return bad("frequency must be positive");
        }
        if !(self.half_power_half_angle_deg > 0.0 && self.half_power_half_angle_deg <= 180.0) {
            return bad("half-power angle must be in (0, 180]");
        }
        if !self.floor_dbi.is_finite() || self.boresight_gain_dbi.is_some_and(|g| !g.is_finite()) {
            return bad("non-finite gain");
        }
        Ok(())
    }

    /// `10·log10(η·(πDf/c)²)` unless pinned.
    pub fn boresight_gain(&self, frequency_mhz: f64) -> f64 {
        self.boresight_gain_dbi.unwrap_or_else(|| {
            let x = std::f64::consts::PI * self.diameter_m * frequency_mhz * 1e6 / SPEED_OF_LIGHT;
            10.0 * (self.efficiency * x * x).log10()
        })
    }

    pub fn gain_at(&self, frequency_mhz: f64, angle_deg: f64) -> f64 {
        let g0 = self.boresight_gain(frequency_mhz);
        let ratio = angle_deg / self.half_power_half_angle_deg;
        (g0 - 3.0 * ratio * ratio).max(self.floor_dbi)
    }

    /// Samples the model into a 1° table.
    pub fn pattern(&self, frequency_mhz: f64) -> Result<AntennaPattern, AntennaError> {
        self.validate(frequency_mhz)?;
        let nodes = (0..=180)
            .map(|deg| (deg as f64, self.gain_at(frequency_mhz, deg as f64)))
            .collect();
        AntennaPattern::new(
            format!("parabolic D={} m eta={} f={} MHz", self.diameter_m, self.efficiency, frequency_mhz),
            nodes,
        )
    }
}

/// Parabolic pattern with the default main-lobe shape and floor.
pub fn parabolic_pattern(diameter_m: f64, efficiency: f64, frequency_mhz: f64) -> Result<AntennaPattern, AntennaError> {
    ParabolicAntenna::new(diameter_m, efficiency).pattern(frequency_mhz)
}
