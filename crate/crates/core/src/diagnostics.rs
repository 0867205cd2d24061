//! Error norms, well-balance residuals, entropy checks and convergence studies.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hydrostatic::{HrCorrections, HrInterface};
use crate::linalg::Vec2;
use crate::physics::{entropy_unchecked, ExtState, PhysConstants, PhysState};
use crate::solver::{
    apply_boundaries, max_update, run, Boundaries, Grid, SchemeConfig, SimSpec, SimState, Solver, StepObserver,
    StepOutcome,
};

/// Tolerance of the interface entropy inequalities.
pub const ENTROPY_TOL: f64 = 1e-12;

/// `dx * sum |a_i - b_i|` on the depth.
pub fn l1_error(numeric: &[PhysState], exact: &[PhysState], dx: f64) -> Result<f64> {
    if numeric.len() != exact.len() {
        return Err(Error::LengthMismatch(numeric.len(), exact.len()));
    }
    Ok(dx * numeric.iter().zip(exact).map(|(a, b)| (a.h - b.h).abs()).sum::<f64>())
}

/// Same as [`l1_error`] on the discharge.
pub fn l1_error_discharge(numeric: &[PhysState], exact: &[PhysState], dx: f64) -> Result<f64> {
    if numeric.len() != exact.len() {
        return Err(Error::LengthMismatch(numeric.len(), exact.len()));
    }
    Ok(dx * numeric.iter().zip(exact).map(|(a, b)| (a.q - b.q).abs()).sum::<f64>())
}

/// Largest `|dh| + |dq|` of one step taken at the CFL time step.
pub fn well_balance_residual(
    state: &SimState,
    grid: &Grid,
    boundaries: &Boundaries,
    cfg: &SchemeConfig,
    c: &PhysConstants,
) -> Result<f64> {
    let solver = Solver::new(*grid, *boundaries, *cfg, *c)?;
    let dt = solver.dt(state)?;
    let next = solver.step(state, dt)?.state;
    Ok(max_update(state, &next))
}

/// Sufficient interface conditions for a semi-discrete entropy inequality.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EntropyCheck {
    pub e_left: f64,
    pub e_right: f64,
    pub depth_star: f64,
    pub satisfied: bool,
}

/// Evaluates the left and right entropy defects of one interface.
///
/// `flux` is the homogeneous flux between the reconstructed states; the
/// corrections are in flux form (see [`crate::hydrostatic`]).
pub fn entropy_interface_check(
    w_l: ExtState,
    w_r: ExtState,
    iface: &HrInterface,
    flux: Vec2,
    corrections: &HrCorrections,
    depth_star: f64,
    c: &PhysConstants,
) -> EntropyCheck {
    let g = c.g;
    let (u_l, u_r) = (w_l.state.velocity(c), w_r.state.velocity(c));
    let (us_l, us_r) = (iface.u_minus, iface.u_plus);
    let (hs_l, hs_r) = (iface.w_minus.h, iface.w_plus.h);
    let [f_h, f_q] = flux;
    let e_left = f_h * (g * (w_l.h() - hs_l - w_l.depth + depth_star) + 0.5 * us_l * us_l - 0.5 * u_l * u_l)
        + (u_l - us_l) * (f_q - c.pressure(hs_l))
        + u_l * corrections.t_minus;
    let e_right = f_h * (g * (w_r.h() - hs_r - w_r.depth + depth_star) + 0.5 * us_r * us_r - 0.5 * u_r * u_r)
        + (u_r - us_r) * (f_q - c.pressure(hs_r))
        + u_r * corrections.t_plus;
    EntropyCheck {
        e_left,
        e_right,
        depth_star,
        satisfied: e_left >= -ENTROPY_TOL && e_right <= ENTROPY_TOL,
    }
}

/// Lax-Friedrichs numerical entropy flux, used at the domain ends.
fn boundary_entropy_flux(w_l: ExtState, w_r: ExtState, dx: f64, dt: f64, c: &PhysConstants) -> f64 {
    let (a, b) = (entropy_unchecked(w_l, c), entropy_unchecked(w_r, c));
    0.5 * (a.flux + b.flux) - 0.5 * dx / dt * (b.eta - a.eta)
}

/// Rate of change of the total entropy plus the net entropy flux through the
/// domain ends. Nonpositive values mean no entropy was created inside.
pub fn entropy_production_total(
    before: &SimState,
    after: &SimState,
    boundaries: &Boundaries,
    dt: f64,
    dx: f64,
    c: &PhysConstants,
) -> Result<f64> {
    if before.len() != after.len() {
        return Err(Error::LengthMismatch(before.len(), after.len()));
    }
    let change: f64 = (0..before.len())
        .map(|i| entropy_unchecked(after.ext(i), c).eta - entropy_unchecked(before.ext(i), c).eta)
        .sum();
    let n = before.len();
    let (gl, gr) = apply_boundaries(before, boundaries);
    let inflow = boundary_entropy_flux(gl, before.ext(0), dx, dt, c);
    let outflow = boundary_entropy_flux(before.ext(n - 1), gr, dx, dt, c);
    Ok(change * dx / dt + outflow - inflow)
}

/// Per-step entropy bookkeeping for reconstruction schemes.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct EntropyMonitor {
    pub steps: usize,
    /// Largest per-step total production.
    pub max_production: f64,
    /// Steps with production above `+1e-10`.
    pub production_violations: usize,
    pub interfaces_checked: usize,
    /// Failed checks on interfaces without a large step.
    pub regular_violations: usize,
    /// Failed checks on large-step interfaces (recorded, not required).
    pub large_step_violations: usize,
    pub worst_regular: Option<EntropyCheck>,
}

impl EntropyMonitor {
    pub const PRODUCTION_TOL: f64 = 1e-10;
}

impl StepObserver for EntropyMonitor {
    fn observe(&mut self, solver: &Solver, before: &SimState, after: &StepOutcome, dt: f64) -> Result<()> {
        let c = &solver.constants;
        let dx = solver.grid.dx();
        let p = entropy_production_total(before, &after.state, &solver.boundaries, dt, dx, c)?;
        if self.steps == 0 || p > self.max_production {
            self.max_production = p;
        }
        self.steps += 1;
        if p > Self::PRODUCTION_TOL {
            self.production_violations += 1;
        }
        let n = before.len();
        let (gl, gr) = apply_boundaries(before, &solver.boundaries);
        let terms = solver.all_interface_terms(before, dt)?;
        for (k, t) in terms.iter().enumerate() {
            let Some(hr) = &t.hr else { continue };
            let w_l = if k == 0 { gl } else { before.ext(k - 1) };
            let w_r = if k == n { gr } else { before.ext(k) };
            let check =
                entropy_interface_check(w_l, w_r, &hr.iface, hr.flux, &hr.corrections, hr.iface.depth_star, c);
            self.interfaces_checked += 1;
            if check.satisfied {
                continue;
            }
            if hr.iface.large_step {
                self.large_step_violations += 1;
            } else {
                self.regular_violations += 1;
                let worse = self
                    .worst_regular
                    .map_or(true, |w| check.e_left.min(-check.e_right) < w.e_left.min(-w.e_right));
                if worse {
                    self.worst_regular = Some(check);
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub n_cells: usize,
    pub l1_error: f64,
    pub met_bound: bool,
    pub met_steady: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceStudy {
    pub rows: Vec<ConvergenceRow>,
    /// Coarsest mesh of the ladder meeting the bound, `None` if never reached.
    pub cells_needed: Option<usize>,
}

/// Runs every mesh of `ladder` (in parallel) and compares against `exact`.
pub fn convergence_study<S, E>(
    ladder: &[usize],
    make_spec: S,
    cfg: &SchemeConfig,
    exact: E,
    bound: f64,
    c: &PhysConstants,
) -> Result<ConvergenceStudy>
where
    S: Fn(usize) -> Result<SimSpec> + Sync,
    E: Fn(&Grid) -> Result<Vec<PhysState>> + Sync,
{
    if ladder.is_empty() {
        return Err(Error::InvalidConfig("empty mesh ladder".into()));
    }
    let rows: Vec<ConvergenceRow> = ladder
        .par_iter()
        .map(|&n| {
            let spec = make_spec(n)?;
            let report = run(&spec, cfg, c)?;
            let reference = exact(&spec.grid)?;
            let err = l1_error(&report.final_snapshot().cells, &reference, spec.grid.dx())?;
            Ok(ConvergenceRow {
                n_cells: n,
                l1_error: err,
                met_bound: err <= bound,
                met_steady: report.met_steady,
            })
        })
        .collect::<Result<_>>()?;
    Ok(ConvergenceStudy {
        cells_needed: rows.iter().filter(|r| r.met_bound).map(|r| r.n_cells).min(),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::flux::{FluxKind, OmegaRule};
    use crate::hydrostatic::{
        hr_interface_terms, hr_reconstruct, modified_hr_corrections, reconstructed_flux, GatePolicy, HrVariant,
    };
    use crate::solver::{BoundaryCondition, SchemeId, StopRule};

    const C: PhysConstants = PhysConstants { g: 9.81, h_dry: 1e-8 };

    fn states(hs: &[f64]) -> Vec<PhysState> {
        hs.iter().map(|&h| PhysState::new(h, 0.0)).collect()
    }

    #[test]
    fn l1_basic_cases() {
        let a = states(&[0.1, 0.2, 0.3, 0.4]);
        assert_eq!(l1_error(&a, &a, 0.5).unwrap(), 0.0);
        let shifted = states(&[0.11, 0.21, 0.31, 0.41]);
        // domain length 2, offset 0.01
        assert!((l1_error(&a, &shifted, 0.5).unwrap() - 0.02).abs() < 1e-15);
        assert_eq!(l1_error(&a, &a[..3], 0.5), Err(Error::LengthMismatch(4, 3)));
    }

    #[test]
    fn l1_matches_compensated_sum() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let n = 5000;
        let a: Vec<PhysState> = (0..n).map(|_| PhysState::new(rng.gen_range(0.0..2.0), 0.0)).collect();
        let b: Vec<PhysState> = (0..n).map(|_| PhysState::new(rng.gen_range(0.0..2.0), 0.0)).collect();
        // Kahan summation as the independent recomputation
        let (mut sum, mut comp) = (0.0f64, 0.0f64);
        for (x, y) in a.iter().zip(&b) {
            let v = (x.h - y.h).abs() - comp;
            let t = sum + v;
            comp = (t - sum) - v;
            sum = t;
        }
        let got = l1_error(&a, &b, 1e-3).unwrap();
        assert!((got - sum * 1e-3).abs() <= 1e-12 * got);
    }

    #[test]
    fn well_balance_residual_cases() {
        let grid = Grid::new(0.0, 1.0, 20).unwrap();
        let depth: Vec<f64> = (0..20).map(|i| 0.2 + 0.1 * ((i * 7 % 5) as f64)).collect();
        let rest = SimState {
            time: 0.0,
            cells: depth.iter().map(|d| PhysState::new(0.3 + d, 0.0)).collect(),
            depth: depth.clone(),
        };
        let flat = SimState {
            time: 0.0,
            cells: vec![PhysState::new(0.5, 0.4); 20],
            depth: vec![0.3; 20],
        };
        let moving = SimState {
            time: 0.0,
            cells: depth.iter().map(|d| PhysState::new(0.3 + d, 0.2)).collect(),
            depth,
        };
        for scheme in SchemeId::implemented() {
            let cfg = SchemeConfig::new(scheme);
            let r = |s: &SimState| well_balance_residual(s, &grid, &Boundaries::OPEN, &cfg, &C).unwrap();
            assert!(r(&rest) <= 1e-12, "{scheme}");
            assert!(r(&flat) <= 1e-14, "{scheme}");
            assert!(r(&moving) > 0.0, "{scheme}");
        }
    }

    fn check_pair(w_l: ExtState, w_r: ExtState, variant: HrVariant) -> EntropyCheck {
        let t = hr_interface_terms(
            w_l,
            w_r,
            FluxKind::Omega(OmegaRule::LaxFriedrichs),
            variant,
            GatePolicy::Dimensional,
            0.1,
            0.01,
            0.9,
            &C,
        )
        .unwrap();
        entropy_interface_check(w_l, w_r, &t.iface, t.flux, &t.corrections, t.iface.depth_star, &C)
    }

    #[test]
    fn entropy_check_vanishes_for_equal_states_and_rest() {
        let w = ExtState::new(0.4, 0.3, 0.2);
        let e = check_pair(w, w, HrVariant::Original);
        assert_eq!((e.e_left, e.e_right), (0.0, 0.0));
        assert!(e.satisfied);
        let l = ExtState::new(0.6, 0.0, 0.5);
        let r = ExtState::new(0.4, 0.0, 0.3);
        let e = check_pair(l, r, HrVariant::Original);
        assert!(e.e_left.abs() < 1e-15 && e.e_right.abs() < 1e-15);
    }

    #[test]
    fn large_step_velocity_term_has_sign_of_velocity() {
        // emerging bottom on the right: surface 0.15 m below the right bottom
        for u in [3.0, -3.0] {
            let l = ExtState::new(0.1, 0.1 * u, 0.5);
            let r = ExtState::new(0.0, 0.0, 0.35);
            let iface = hr_reconstruct(l, r, &C);
            let corr = modified_hr_corrections(l, r, &iface, GatePolicy::Dimensional, &C);
            let flux = reconstructed_flux(&iface, FluxKind::Roe, 0.1, 0.01, 0.9, &C).unwrap();
            let e = entropy_interface_check(l, r, &iface, flux, &corr, iface.depth_star, &C);
            let excess = l.h() - l.depth + r.depth;
            if u > 0.0 {
                // u T^- = -g h u (h - H_l + H_r) / 2
                let velocity_term = -0.5 * C.g * l.h() * u * excess;
                assert!((u * corr.t_minus - velocity_term).abs() < 1e-14);
                assert!(velocity_term > 0.0);
                let flux_term = flux[0] * C.g * excess;
                assert!((e.e_left - (flux_term + velocity_term)).abs() < 1e-13);
            } else {
                // the gate refuses flow away from the step, no correction
                assert_eq!(corr.t_minus, 0.0);
            }
        }
    }

    #[test]
    fn production_vanishes_at_rest() {
        let grid = Grid::new(0.0, 1.0, 10).unwrap();
        let depth: Vec<f64> = (0..10).map(|i| 0.1 * (i as f64).cos()).collect();
        let s = SimState {
            time: 0.0,
            cells: depth.iter().map(|d| PhysState::new(0.5 + d, 0.0)).collect(),
            depth,
        };
        let p = entropy_production_total(&s, &s, &Boundaries::OPEN, 0.01, grid.dx(), &C).unwrap();
        assert!(p.abs() < 1e-12);
    }

    #[test]
    fn lax_friedrichs_dam_break_produces_no_entropy() {
        let spec = SimSpec::new(
            Grid::new(0.0, 1.0, 100).unwrap(),
            Arc::new(|x| if x < 0.3 { 0.2 } else { 0.0 }),
            Arc::new(|x| PhysState::new(if x < 0.5 { 1.0 } else { 0.3 }, 0.0)),
            Boundaries {
                left: BoundaryCondition::Open,
                right: BoundaryCondition::Open,
            },
            StopRule::FinalTime(0.1),
        );
        let cfg = SchemeConfig::new(SchemeId::Hr).with_hr_flux(FluxKind::Omega(OmegaRule::LaxFriedrichs));
        let mut mon = EntropyMonitor::default();
        crate::solver::run_observed(&spec, &cfg, &C, &mut mon).unwrap();
        assert!(mon.steps > 0);
        assert_eq!(mon.production_violations, 0, "max production {}", mon.max_production);
        assert_eq!(mon.regular_violations, 0);
        assert!(mon.max_production < 0.0);
    }

    fn rest_family(n: usize) -> Result<SimSpec> {
        Ok(SimSpec::new(
            Grid::new(0.0, 1.0, n)?,
            Arc::new(|x| 0.2 * x),
            Arc::new(|x| PhysState::new(0.3 + 0.2 * x, 0.0)),
            Boundaries::OPEN,
            StopRule::steady(10.0),
        ))
    }

    #[test]
    fn convergence_of_rest_family() {
        let cfg = SchemeConfig::new(SchemeId::Hr);
        let exact = |g: &Grid| Ok(g.centers().iter().map(|x| PhysState::new(0.3 + 0.2 * x, 0.0)).collect());
        let study = convergence_study(&[10, 20, 40], rest_family, &cfg, exact, 1e-10, &C).unwrap();
        assert_eq!(study.cells_needed, Some(10));
        assert!(study.rows.iter().all(|r| r.met_bound));
        let offset = |g: &Grid| Ok(g.centers().iter().map(|x| PhysState::new(0.301 + 0.2 * x, 0.0)).collect());
        let never = convergence_study(&[10, 20], rest_family, &cfg, offset, 0.0, &C).unwrap();
        assert_eq!(never.cells_needed, None);
        assert!(never.rows.iter().all(|r| !r.met_bound));
    }
}
