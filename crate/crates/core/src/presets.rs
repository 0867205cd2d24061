//! The six benchmark configurations: sloping channel, bump, bottom steps and ramps.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::physics::{ExtState, PhysConstants, PhysState};
use crate::solver::{Boundaries, BoundaryCondition, Grid, Probe, SimSpec, StopRule};
use crate::stationary::{exact_smooth_profile, exact_step_state};

pub type PresetParams = BTreeMap<String, f64>;

/// A benchmark with resolved parameters.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestPreset {
    pub id: u8,
    pub params: PresetParams,
    pub n_cells: usize,
}

/// Tunable parameters of each test with their defaults.
pub fn default_params(id: u8) -> Result<PresetParams> {
    let pairs: &[(&str, f64)] = match id {
        1 => &[("alpha", 16.0)],
        2 => &[],
        3 => &[("H_r", 0.45), ("q_bc", 0.1)],
        4 => &[("H_r", 0.4)],
        // printed_ramp = 1 selects the ramp formula exactly as printed
        5 => &[("x_l", 3.75), ("printed_ramp", 0.0)],
        6 => &[("dl", 0.2), ("dh", 0.3)],
        _ => return Err(Error::InvalidConfig(format!("unknown test {id}, expected 1..6"))),
    };
    Ok(pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect())
}

pub fn default_cells(id: u8) -> usize {
    match id {
        1 => 50,
        _ => 200,
    }
}

impl TestPreset {
    pub fn new(id: u8, overrides: &PresetParams, n_cells: Option<usize>) -> Result<Self> {
        let mut params = default_params(id)?;
        for (k, v) in overrides {
            match params.get_mut(k) {
                Some(slot) => *slot = *v,
                None => {
                    let known: Vec<&str> = params.keys().map(String::as_str).collect();
                    return Err(Error::InvalidConfig(format!(
                        "test {id} has no parameter `{k}` (known: {})",
                        if known.is_empty() { "none".to_string() } else { known.join(", ") }
                    )));
                }
            }
        }
        let preset = Self {
            id,
            params,
            n_cells: n_cells.unwrap_or_else(|| default_cells(id)),
        };
        preset.validate()?;
        Ok(preset)
    }

    pub fn param(&self, key: &str) -> f64 {
        self.params[key]
    }

    fn validate(&self) -> Result<()> {
        if self.params.values().any(|v| !v.is_finite()) {
            return Err(Error::InvalidConfig("preset parameters must be finite".into()));
        }
        let bad = |msg: &str| Err(Error::InvalidConfig(format!("test {}: {msg}", self.id)));
        match self.id {
            1 if self.param("alpha") < 0.0 => bad("alpha must be nonnegative"),
            3 if self.param("H_r") <= 0.0 => bad("H_r must be positive"),
            3 if self.param("q_bc") < 0.0 => bad("q_bc must be nonnegative"),
            4 if self.param("H_r") <= 0.0 => bad("H_r must be positive"),
            5 if !(self.param("x_l") > 0.0 && self.param("x_l") < 4.0) => bad("x_l must lie in (0, 4)"),
            6 if self.param("dl") <= 0.0 || self.param("dl") >= 4.8 => bad("dl must lie in (0, 4.8)"),
            6 if self.param("dh") < 0.0 => bad("dh must be nonnegative"),
            _ => Ok(()),
        }
    }

    pub fn domain(&self) -> (f64, f64) {
        match self.id {
            1 => (0.0, 3.0),
            2 => (0.0, 25.0),
            3 | 4 => (0.0, 1.0),
            _ => (0.0, 5.0),
        }
    }

    pub fn grid(&self) -> Result<Grid> {
        let (a, b) = self.domain();
        Grid::new(a, b, self.n_cells)
    }

    /// Bottom depth as an analytic function of `x`.
    pub fn bathymetry(&self) -> Arc<dyn Fn(f64) -> f64 + Send + Sync> {
        match self.id {
            1 => {
                let alpha = self.param("alpha");
                Arc::new(move |x| alpha / 100.0 * x)
            }
            2 => Arc::new(|x| if 8.0 < x && x < 12.0 { -0.2 + 0.05 * (x - 10.0) * (x - 10.0) } else { 0.0 }),
            3 => {
                let h_r = self.param("H_r");
                Arc::new(move |x| if x < 0.5 { 0.1 } else { h_r })
            }
            4 => {
                let h_r = self.param("H_r");
                Arc::new(move |x| if x < 0.5 { 0.8 } else { h_r })
            }
            5 => {
                let x_l = self.param("x_l");
                // the printed slope 2.8 jumps at x = 4; -0.8 joins the plateau continuously
                let rise = if self.param("printed_ramp") != 0.0 { 2.8 } else { -0.8 };
                Arc::new(move |x| {
                    if x < x_l {
                        1.0
                    } else if x < 4.0 {
                        1.0 + rise / (4.0 - x_l) * (x - x_l)
                    } else {
                        0.2
                    }
                })
            }
            _ => {
                let x_r = 0.2 + self.param("dl");
                let h_r = 0.1 + self.param("dh");
                Arc::new(move |x| {
                    if x <= 0.2 {
                        0.1
                    } else if x <= x_r {
                        0.1 + (h_r - 0.1) / (x_r - 0.2) * (x - 0.2)
                    } else {
                        h_r
                    }
                })
            }
        }
    }

    fn initial(&self) -> Arc<dyn Fn(f64) -> PhysState + Send + Sync> {
        match self.id {
            1 => Arc::new(|_| PhysState::new(0.02, 0.01)),
            2 => Arc::new(|_| PhysState::new(0.33, 0.18)),
            3 | 4 => Arc::new(|_| PhysState::new(0.1, 0.15)),
            5 => {
                let bottom = self.bathymetry();
                Arc::new(move |x| {
                    let h = (bottom(x) - 0.9).max(0.0);
                    PhysState::new(h, if h > 0.0 { 0.9 } else { 0.0 })
                })
            }
            _ => Arc::new(|_| PhysState::new(0.5, 1.2)),
        }
    }

    fn boundaries(&self) -> Boundaries {
        use BoundaryCondition::*;
        let (left, right) = match self.id {
            1 => (ImposedBoth { h: 0.02, q: 0.01 }, Open),
            2 => (ImposedDischarge(0.18), ImposedDepth(0.33)),
            3 => (
                ImposedBoth {
                    h: 0.1,
                    q: self.param("q_bc"),
                },
                Open,
            ),
            4 => (ImposedBoth { h: 0.1, q: 0.15 }, Open),
            5 => (ImposedBoth { h: 0.1, q: 0.9 }, Open),
            _ => (ImposedBoth { h: 0.5, q: 1.2 }, Open),
        };
        Boundaries { left, right }
    }

    pub fn default_stop(&self) -> StopRule {
        match self.id {
            1 => StopRule::steady(200.0),
            2 => StopRule::steady(1000.0),
            3 | 4 => StopRule::steady(100.0),
            5 => StopRule::FinalTime(2.5),
            _ => StopRule::steady(60.0),
        }
    }

    /// Positions just upstream and downstream of the bottom feature.
    pub fn feature_bounds(&self) -> Option<(f64, f64)> {
        match self.id {
            3 | 4 => Some((0.5, 0.5)),
            5 => Some((self.param("x_l"), 4.0)),
            6 => Some((0.2, 0.2 + self.param("dl"))),
            _ => None,
        }
    }

    pub fn probes(&self) -> Vec<Probe> {
        let Some((a, b)) = self.feature_bounds() else {
            return Vec::new();
        };
        let (x0, x1) = self.domain();
        let dx = (x1 - x0) / self.n_cells as f64;
        // a step on an interface puts +-5 dx halfway between two centres;
        // 4.5 dx selects the fifth cell counted from the step
        vec![
            Probe {
                name: "h_l".into(),
                x: a - 4.5 * dx,
            },
            Probe {
                name: "h_r".into(),
                x: b + 4.5 * dx,
            },
        ]
    }

    pub fn spec(&self) -> Result<SimSpec> {
        let mut spec = SimSpec::new(self.grid()?, self.bathymetry(), self.initial(), self.boundaries(), self.default_stop());
        spec.probes = self.probes();
        Ok(spec)
    }

    /// State right of the step linked to the inflow by the stationary
    /// invariants (Tests 3 and 4).
    pub fn exact_step(&self, c: &PhysConstants) -> Option<Result<PhysState>> {
        let (left, h_r) = match self.id {
            3 => (ExtState::new(0.1, self.param("q_bc"), 0.1), self.param("H_r")),
            4 => (ExtState::new(0.1, 0.15, 0.8), self.param("H_r")),
            _ => return None,
        };
        Some(exact_step_state(left, h_r, c))
    }

    /// Smooth stationary solution at the cell centres of `grid` (Test 6).
    pub fn exact_profile(&self, grid: &Grid, c: &PhysConstants) -> Option<Result<Vec<PhysState>>> {
        if self.id != 6 {
            return None;
        }
        let bottom = self.bathymetry();
        let inlet = ExtState::new(0.5, 1.2, bottom(0.0));
        Some(exact_smooth_profile(|x| bottom(x), inlet, &grid.centers(), c))
    }
}

/// Simulation setup of test `id` with parameter overrides.
pub fn build_preset(id: u8, params: &PresetParams, n_cells: Option<usize>) -> Result<SimSpec> {
    TestPreset::new(id, params, n_cells)?.spec()
}

#[cfg(test)]
mod tests {
    use super::*;

    const C: PhysConstants = PhysConstants { g: 9.81, h_dry: 1e-8 };

    fn preset(id: u8, kv: &[(&str, f64)]) -> TestPreset {
        let p = kv.iter().map(|(k, v)| (k.to_string(), *v)).collect();
        TestPreset::new(id, &p, None).unwrap()
    }

    #[test]
    fn bump_defaults() {
        let spec = build_preset(2, &PresetParams::new(), None).unwrap();
        assert_eq!(spec.grid.n_cells, 200);
        assert_eq!((spec.initial)(3.0), PhysState::new(0.33, 0.18));
        assert_eq!(spec.boundaries.left, BoundaryCondition::ImposedDischarge(0.18));
        assert_eq!(spec.boundaries.right, BoundaryCondition::ImposedDepth(0.33));
        assert!(((spec.bathymetry)(10.0) + 0.2).abs() < 1e-15);
        assert_eq!((spec.bathymetry)(13.0), 0.0);
    }

    #[test]
    fn ramp_initial_wet_region_follows_bottom() {
        let p = preset(5, &[("x_l", 3.75)]);
        let spec = p.spec().unwrap();
        let bottom = p.bathymetry();
        for x in spec.grid.centers() {
            let w = (spec.initial)(x);
            assert_eq!(w.h > 0.0, bottom(x) > 0.9, "x = {x}");
            assert_eq!(w.q, if w.h > 0.0 { 0.9 } else { 0.0 });
        }
        // the default ramp is continuous at both ends
        assert!((bottom(4.0 - 1e-12) - 0.2).abs() < 1e-9);
        assert_eq!(bottom(3.75), 1.0);
        let printed = preset(5, &[("printed_ramp", 1.0)]).bathymetry();
        assert!((printed(4.0 - 1e-12) - 3.8).abs() < 1e-9);
    }

    #[test]
    fn flat_channel_has_constant_exact_profile() {
        let p = preset(6, &[("dh", 0.0)]);
        let grid = p.grid().unwrap();
        assert!(grid.centers().iter().all(|&x| p.bathymetry()(x) == 0.1));
        let exact = p.exact_profile(&grid, &C).unwrap().unwrap();
        assert!(exact.iter().all(|w| (w.h - 0.5).abs() < 1e-10 && w.q == 1.2));
    }

    #[test]
    fn ramp_channel_boundaries_and_ends() {
        let p = preset(6, &[("dl", 0.2), ("dh", 0.3)]);
        let b = p.bathymetry();
        assert_eq!(b(0.1), 0.1);
        assert!((b(0.3) - 0.25).abs() < 1e-15);
        assert!((b(1.0) - 0.4).abs() < 1e-15);
        let spec = p.spec().unwrap();
        assert_eq!(spec.boundaries.left, BoundaryCondition::ImposedBoth { h: 0.5, q: 1.2 });
    }

    #[test]
    fn steps_sit_on_interfaces() {
        for id in [3, 4] {
            let spec = build_preset(id, &PresetParams::new(), None).unwrap();
            let dx = spec.grid.dx();
            let k = (0.5 - spec.grid.x_left) / dx;
            assert!((k - k.round()).abs() < 1e-12);
        }
    }

    #[test]
    fn probes_sit_in_fifth_cell_from_step() {
        let p = preset(3, &[]);
        let probes = p.probes();
        let g = p.grid().unwrap();
        assert_eq!(g.nearest_cell(probes[0].x), 95);
        assert_eq!(g.nearest_cell(probes[1].x), 104);
    }

    #[test]
    fn parameter_errors() {
        let mut p = PresetParams::new();
        p.insert("beta".into(), 1.0);
        assert!(TestPreset::new(1, &p, None).is_err());
        assert!(TestPreset::new(7, &PresetParams::new(), None).is_err());
        let mut p = PresetParams::new();
        p.insert("x_l".into(), 4.5);
        assert!(TestPreset::new(5, &p, None).is_err());
    }

    #[test]
    fn step_exact_state_for_deepening_step() {
        let p = preset(3, &[("H_r", 0.45)]);
        let w = p.exact_step(&C).unwrap().unwrap();
        assert_eq!(w.q, 0.1);
        let head = |h: f64, depth: f64| h + 0.01 / (2.0 * 9.81 * h * h) - depth;
        assert!((head(w.h, 0.45) - head(0.1, 0.1)).abs() < 1e-11);
    }
}
