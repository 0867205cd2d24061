//! Exact stationary solutions built from the invariants of the bottom field.
//!
//! Along a stationary solution the discharge `q` and the head
//! `h + q^2/(2 g h^2) - H` are constant. Solving for `h` at a new bottom depth
//! means inverting `phi(h) = h + q^2/(2 g h^2)`, which decreases on
//! `(0, h_c)` and increases on `(h_c, inf)` with `h_c = (q^2/g)^(1/3)`.

use crate::error::{Error, Result};
use crate::physics::{froude_squared, riemann_invariant, specific_energy, ExtState, PhysConstants, PhysState};

/// Tolerance on `phi` for the bracketed bisection.
pub const ROOT_TOL: f64 = 1e-12;
/// States with `|Fr^2 - 1|` below this are treated as critical.
pub const NEAR_CRITICAL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlowBranch {
    Subcritical,
    Supercritical,
}

pub fn branch_of(w: PhysState, c: &PhysConstants) -> Result<FlowBranch> {
    let fr2 = froude_squared(w, c)?;
    if (fr2 - 1.0).abs() < NEAR_CRITICAL {
        return Err(Error::NearCritical(fr2));
    }
    Ok(if fr2 > 1.0 {
        FlowBranch::Supercritical
    } else {
        FlowBranch::Subcritical
    })
}

/// Solves `h + q^2/(2 g h^2) = level` on the requested monotone branch.
pub fn solve_head(q: f64, level: f64, branch: FlowBranch, c: &PhysConstants) -> Result<f64> {
    let g = c.g;
    if q == 0.0 {
        // water at rest: the head is the depth itself
        if level <= 0.0 {
            return Err(Error::NoAdmissibleRoot { level, minimum: 0.0 });
        }
        return match branch {
            FlowBranch::Subcritical => Ok(level),
            FlowBranch::Supercritical => Err(Error::NoAdmissibleRoot { level, minimum: 0.0 }),
        };
    }
    let h_crit = (q * q / g).cbrt();
    let minimum = 1.5 * h_crit;
    if level < minimum {
        return Err(Error::NoAdmissibleRoot { level, minimum });
    }
    let phi = |h: f64| specific_energy(h, q, g) - level;
    // phi(lo) and phi(hi) bracket the root on each branch
    let (mut lo, mut hi) = match branch {
        FlowBranch::Subcritical => (h_crit, level.max(h_crit)),
        FlowBranch::Supercritical => ((q * q / (2.0 * g * level)).sqrt(), h_crit),
    };
    let increasing = branch == FlowBranch::Subcritical;
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        let f = phi(mid);
        if f.abs() <= ROOT_TOL || hi - lo <= f64::EPSILON * hi {
            return Ok(mid);
        }
        if (f > 0.0) == increasing {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// State across a stationary bottom step from `left` to the depth `depth_right`,
/// keeping both invariants and the flow regime of `left`.
pub fn exact_step_state(left: ExtState, depth_right: f64, c: &PhysConstants) -> Result<PhysState> {
    let (q, head) = riemann_invariant(left, c)?;
    let branch = branch_of(left.state, c)?;
    let h = solve_head(q, head + depth_right, branch, c)?;
    Ok(PhysState::new(h, q))
}

/// Smooth stationary profile over `bathymetry`, evaluated at `xs`, on the inlet's branch.
pub fn exact_smooth_profile<F>(
    bathymetry: F,
    inlet: ExtState,
    xs: &[f64],
    c: &PhysConstants,
) -> Result<Vec<PhysState>>
where
    F: Fn(f64) -> f64,
{
    let (q, head) = riemann_invariant(inlet, c)?;
    let branch = branch_of(inlet.state, c)?;
    xs.iter()
        .map(|&x| {
            solve_head(q, head + bathymetry(x), branch, c)
                .map(|h| PhysState::new(h, q))
                .map_err(|_| Error::TranscriticalProfile(x))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const C: PhysConstants = PhysConstants { g: 9.81, h_dry: 1e-8 };

    /// Scans `h` on a uniform grid and returns all sign changes of `phi - level`.
    fn scan_roots(q: f64, level: f64, step: f64, h_max: f64) -> Vec<f64> {
        let n = (h_max / step).round() as usize;
        let f = |h: f64| h + q * q / (2.0 * 9.81 * h * h) - level;
        let mut roots = Vec::new();
        let mut prev = f(step);
        for k in 2..=n {
            let h = k as f64 * step;
            let cur = f(h);
            if prev.signum() != cur.signum() {
                roots.push(h - 0.5 * step);
            }
            prev = cur;
        }
        roots
    }

    #[test]
    fn rest_state_moves_with_bottom() {
        let left = ExtState::new(0.4, 0.0, 0.2);
        let s = exact_step_state(left, 0.5, &C).unwrap();
        assert!((s.h - (0.4 - 0.2 + 0.5)).abs() < 1e-15);
        assert_eq!(s.q, 0.0);
    }

    #[test]
    fn no_step_returns_left_state() {
        let left = ExtState::new(0.1, 0.1, 0.1);
        let s = exact_step_state(left, 0.1, &C).unwrap();
        assert!((s.h - 0.1).abs() < 1e-10);
        assert_eq!(s.q, 0.1);
    }

    #[test]
    fn downward_step_matches_scan() {
        let left = ExtState::new(0.1, 0.1, 0.1);
        let s = exact_step_state(left, 0.45, &C).unwrap();
        let level = 0.1 + 0.01 / (2.0 * 9.81 * 0.01) - 0.1 + 0.45;
        let roots = scan_roots(0.1, level, 1e-7, 2.0);
        assert_eq!(roots.len(), 2);
        // left state is (barely) supercritical: Fr^2 = 1/0.981
        assert!((s.h - roots[0]).abs() < 1e-6, "{} vs {:?}", s.h, roots);
        let (_, inv_l) = riemann_invariant(left, &C).unwrap();
        let (_, inv_r) = riemann_invariant(ExtState { state: s, depth: 0.45 }, &C).unwrap();
        assert!((inv_l - inv_r).abs() < 1e-10);
    }

    #[test]
    fn level_below_critical_is_rejected() {
        // subcritical flow over a large upward step
        let left = ExtState::new(0.3, 0.2, 0.5);
        assert!(matches!(
            exact_step_state(left, 0.0, &C),
            Err(Error::NoAdmissibleRoot { .. })
        ));
    }

    #[test]
    fn near_critical_is_reported() {
        let h: f64 = 0.2;
        let left = ExtState::new(h, h * (9.81 * h).sqrt(), 0.0);
        assert!(matches!(exact_step_state(left, 0.1, &C), Err(Error::NearCritical(_))));
    }

    #[test]
    fn flat_profile_is_constant() {
        let inlet = ExtState::new(0.5, 1.2, 0.1);
        let xs: Vec<f64> = (0..20).map(|i| i as f64 * 0.25).collect();
        let prof = exact_smooth_profile(|_| 0.1, inlet, &xs, &C).unwrap();
        for s in prof {
            assert!((s.h - 0.5).abs() < 1e-10);
            assert_eq!(s.q, 1.2);
        }
    }

    #[test]
    fn rest_profile_follows_bottom() {
        let inlet = ExtState::new(0.6, 0.0, 0.2);
        let bottom = |x: f64| 0.2 + 0.1 * x;
        let xs = [0.0, 0.5, 1.0, 2.0];
        let prof = exact_smooth_profile(bottom, inlet, &xs, &C).unwrap();
        for (s, x) in prof.iter().zip(xs) {
            assert!((s.h - (0.6 - 0.2 + bottom(x))).abs() < 1e-14);
        }
    }

    #[test]
    fn test6_inlet_is_supercritical_and_matches_scan() {
        let inlet = ExtState::new(0.5, 1.2, 0.1);
        // Fr^2 = 2.4^2 / (9.81 * 0.5)
        let fr2 = froude_squared(inlet.state, &C).unwrap();
        assert!((fr2 - 5.76 / 4.905).abs() < 1e-12);
        assert_eq!(branch_of(inlet.state, &C).unwrap(), FlowBranch::Supercritical);
        let ramp = |x: f64| {
            if x <= 0.2 {
                0.1
            } else if x <= 0.4 {
                0.1 + 0.3 / 0.2 * (x - 0.2)
            } else {
                0.4
            }
        };
        let xs = [0.1, 0.25, 0.3, 0.39, 1.0];
        let prof = exact_smooth_profile(ramp, inlet, &xs, &C).unwrap();
        let (_, head) = riemann_invariant(inlet, &C).unwrap();
        for (s, x) in prof.iter().zip(xs) {
            let roots = scan_roots(1.2, head + ramp(x), 1e-7, 2.0);
            assert!((s.h - roots[0]).abs() < 1e-6);
        }
    }

    #[test]
    fn transcritical_profile_is_rejected() {
        // subcritical inlet over a bump too high for the available head
        let inlet = ExtState::new(0.33, 0.18, 0.0);
        let bump = |x: f64| if (8.0..12.0).contains(&x) { -0.2 + 0.05 * (x - 10.0).powi(2) } else { 0.0 };
        let xs = [5.0, 10.0];
        assert!(matches!(
            exact_smooth_profile(bump, inlet, &xs, &C),
            Err(Error::TranscriticalProfile(x)) if x == 10.0
        ));
    }
}
