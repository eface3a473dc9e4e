use serde::{Deserialize, Serialize};

use super::SolverError;

/// Axial region a node belongs to, bottom to top.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Segment {
    LowerReflector,
    Heated,
    UpperReflector,
}

/// One axial control volume of a channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxialCell {
    pub segment: Segment,
    /// Elevation of the cell centre above the channel bottom, m.
    pub elevation: f64,
    pub length: f64,
}

/// Coolant channel geometry. Elevation is measured from the bottom of the
/// lower reflector; each segment is split into equal cells.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChannelGeometry {
    pub diameter: f64,
    pub heated_length: f64,
    pub upper_reflector_length: f64,
    pub lower_reflector_length: f64,
    pub lower_nodes: usize,
    pub heated_nodes: usize,
    pub upper_nodes: usize,
    /// Overrides the circular `πD²/4`.
    pub flow_area: Option<f64>,
    /// Overrides the circular `πD`.
    pub heated_perimeter: Option<f64>,
}

impl Default for ChannelGeometry {
    fn default() -> Self {
        Self {
            diameter: 0.01588,
            heated_length: 7.93,
            upper_reflector_length: 1.189,
            lower_reflector_length: 1.585,
            lower_nodes: 4,
            heated_nodes: 16,
            upper_nodes: 3,
            flow_area: None,
            heated_perimeter: None,
        }
    }
}

impl ChannelGeometry {
    /// A bare heated tube without reflectors.
    pub fn heated_tube(diameter: f64, length: f64, nodes: usize) -> Self {
        Self {
            diameter,
            heated_length: length,
            upper_reflector_length: 0.0,
            lower_reflector_length: 0.0,
            lower_nodes: 0,
            heated_nodes: nodes,
            upper_nodes: 0,
            flow_area: None,
            heated_perimeter: None,
        }
    }

    /// Same lengths with every segment's node count multiplied by `factor`.
    pub fn refined(&self, factor: usize) -> Self {
        Self {
            lower_nodes: self.lower_nodes * factor,
            heated_nodes: self.heated_nodes * factor,
            upper_nodes: self.upper_nodes * factor,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        let bad = |msg: String| Err(SolverError::InvalidConfig(msg));
        if !(self.diameter > 0.0) {
            return bad(format!("diameter must be positive, got {}", self.diameter));
        }
        if !(self.heated_length > 0.0) || self.heated_nodes == 0 {
            return bad("heated segment needs a positive length and at least one node".into());
        }
        for (name, len, n) in [
            ("lower reflector", self.lower_reflector_length, self.lower_nodes),
            ("upper reflector", self.upper_reflector_length, self.upper_nodes),
        ] {
            if !(len >= 0.0) || (len > 0.0) != (n > 0) {
                return bad(format!("{name}: length {len} m with {n} nodes"));
            }
        }
        if self.axial_nodes() < 2 {
            return bad("a channel needs at least two axial nodes".into());
        }
        for (name, v) in [("flow_area", self.flow_area), ("heated_perimeter", self.heated_perimeter)] {
            if let Some(v) = v {
                if !(v > 0.0) {
                    return bad(format!("{name} must be positive, got {v}"));
                }
            }
        }
        Ok(())
    }

    pub fn axial_nodes(&self) -> usize {
        self.lower_nodes + self.heated_nodes + self.upper_nodes
    }

    pub fn flow_area(&self) -> f64 {
        self.flow_area
            .unwrap_or(std::f64::consts::PI * self.diameter * self.diameter / 4.0)
    }

    pub fn heated_perimeter(&self) -> f64 {
        self.heated_perimeter.unwrap_or(std::f64::consts::PI * self.diameter)
    }

    pub fn total_length(&self) -> f64 {
        self.lower_reflector_length + self.heated_length + self.upper_reflector_length
    }

    /// Cells ordered bottom to top.
    pub fn cells(&self) -> Vec<AxialCell> {
        let mut cells = Vec::with_capacity(self.axial_nodes());
        let mut base = 0.0;
        for (segment, len, n) in [
            (Segment::LowerReflector, self.lower_reflector_length, self.lower_nodes),
            (Segment::Heated, self.heated_length, self.heated_nodes),
            (Segment::UpperReflector, self.upper_reflector_length, self.upper_nodes),
        ] {
            let dz = if n > 0 { len / n as f64 } else { 0.0 };
            for k in 0..n {
                cells.push(AxialCell { segment, elevation: base + (k as f64 + 0.5) * dz, length: dz });
            }
            base += len;
        }
        cells
    }

    /// Index of the cell containing the given fraction of the total height.
    pub fn cell_at_fraction(&self, fraction: f64) -> usize {
        let z = fraction.clamp(0.0, 1.0) * self.total_length();
        let cells = self.cells();
        cells
            .iter()
            .position(|c| z <= c.elevation + 0.5 * c.length)
            .unwrap_or(cells.len() - 1)
    }

    /// Index of the cell containing the given fraction of the heated length.
    pub fn heated_cell_at_fraction(&self, fraction: f64) -> usize {
        let n = self.heated_nodes;
        let k = ((fraction.clamp(0.0, 1.0) * n as f64) as usize).min(n - 1);
        self.lower_nodes + k
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn circular_area() {
        let g = ChannelGeometry::default();
        assert!((g.flow_area() - std::f64::consts::PI * 0.01588f64.powi(2) / 4.0).abs() < 1e-12);
        assert!((g.flow_area() - 1.98e-4).abs() < 1e-6);
    }

    #[test]
    fn cells_tile_the_channel() {
        let g = ChannelGeometry::default();
        let cells = g.cells();
        assert_eq!(cells.len(), 23);
        let total: f64 = cells.iter().map(|c| c.length).sum();
        assert!((total - g.total_length()).abs() < 1e-12);
        assert!(cells.windows(2).all(|w| w[1].elevation > w[0].elevation));
        assert_eq!(cells[4].segment, Segment::Heated);
        assert_eq!(cells[20].segment, Segment::UpperReflector);
        assert_eq!(g.cell_at_fraction(0.0), 0);
        assert_eq!(g.cell_at_fraction(1.0), 22);
        assert_eq!(g.heated_cell_at_fraction(0.5), 12);
    }

    #[test]
    fn validation() {
        assert!(ChannelGeometry::default().validate().is_ok());
        assert!(ChannelGeometry { diameter: 0.0, ..Default::default() }.validate().is_err());
        assert!(ChannelGeometry { lower_nodes: 0, ..Default::default() }.validate().is_err());
        assert!(ChannelGeometry::heated_tube(0.01588, 7.93, 1).validate().is_err());
        assert!(ChannelGeometry::heated_tube(0.01588, 7.93, 2).validate().is_ok());
    }
}
