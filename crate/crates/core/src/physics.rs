//! Physical model of the one-dimensional shallow water system.
//!
//! The bottom is described by its depth `H` below a fixed reference level
//! (positive downwards), so the free surface elevation is `h - H` and the
//! momentum source is `+g h dH/dx`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Conserved pair (depth, discharge) on one cell.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PhysState {
    pub h: f64,
    pub q: f64,
}

impl PhysState {
    pub const DRY: PhysState = PhysState { h: 0.0, q: 0.0 };

    pub fn new(h: f64, q: f64) -> Self {
        Self { h, q }
    }

    /// Builds a state from depth and velocity.
    pub fn from_velocity(h: f64, u: f64) -> Self {
        Self { h, q: h * u }
    }

    pub fn is_wet(&self, c: &PhysConstants) -> bool {
        self.h > c.h_dry
    }

    /// Velocity `q/h`; zero on dry cells.
    pub fn velocity(&self, c: &PhysConstants) -> f64 {
        if self.h > c.h_dry {
            self.q / self.h
        } else {
            0.0
        }
    }

    pub fn as_array(&self) -> [f64; 2] {
        [self.h, self.q]
    }

    pub fn from_array(v: [f64; 2]) -> Self {
        Self { h: v[0], q: v[1] }
    }

    fn check(&self) -> Result<()> {
        if self.h < 0.0 {
            Err(Error::NegativeDepth(self.h))
        } else {
            Ok(())
        }
    }
}

/// Physical state extended with the local bottom depth.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ExtState {
    pub state: PhysState,
    /// Bottom depth below the reference level.
    pub depth: f64,
}

impl ExtState {
    pub fn new(h: f64, q: f64, depth: f64) -> Self {
        Self {
            state: PhysState { h, q },
            depth,
        }
    }

    pub fn h(&self) -> f64 {
        self.state.h
    }

    pub fn q(&self) -> f64 {
        self.state.q
    }

    /// Free surface elevation `h - H`.
    pub fn surface(&self) -> f64 {
        self.state.h - self.depth
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysConstants {
    pub g: f64,
    pub h_dry: f64,
}

impl Default for PhysConstants {
    fn default() -> Self {
        Self {
            g: 9.81,
            h_dry: 1e-8,
        }
    }
}

impl PhysConstants {
    pub fn new(g: f64, h_dry: f64) -> Result<Self> {
        if !(g > 0.0) || !g.is_finite() {
            return Err(Error::InvalidConfig(format!("gravity must be positive, got {g}")));
        }
        if !(h_dry > 0.0 && h_dry < 1e-2) {
            return Err(Error::InvalidConfig(format!(
                "dry threshold must be small and positive, got {h_dry}"
            )));
        }
        Ok(Self { g, h_dry })
    }

    /// Hydrostatic pressure term `g h^2 / 2`.
    #[inline]
    pub fn pressure(&self, h: f64) -> f64 {
        0.5 * self.g * h * h
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyValues {
    /// Entropy density including the bottom term.
    pub eta: f64,
    /// Entropy flux including the bottom term.
    pub flux: f64,
}

/// Conservative flux `(q, q^2/h + g h^2/2)`.
pub fn physical_flux(w: PhysState, c: &PhysConstants) -> Result<[f64; 2]> {
    w.check()?;
    Ok(flux_unchecked(w, c))
}

#[inline]
pub(crate) fn flux_unchecked(w: PhysState, c: &PhysConstants) -> [f64; 2] {
    if w.h > c.h_dry {
        [w.q, w.q * w.q / w.h + c.pressure(w.h)]
    } else {
        [0.0, c.pressure(w.h)]
    }
}

/// Characteristic speeds `u - c`, `u + c`; the bottom field's zero speed is implicit.
pub fn eigenvalues(w: PhysState, c: &PhysConstants) -> Result<(f64, f64)> {
    w.check()?;
    if w.h <= c.h_dry {
        return Ok((0.0, 0.0));
    }
    let u = w.q / w.h;
    let cel = (c.g * w.h).sqrt();
    Ok((u - cel, u + cel))
}

pub fn froude_squared(w: PhysState, c: &PhysConstants) -> Result<f64> {
    w.check()?;
    if w.h <= c.h_dry {
        return Err(Error::DryState(w.h));
    }
    let u = w.q / w.h;
    Ok(u * u / (c.g * w.h))
}

/// Invariants of the stationary contact: `(q, h + q^2/(2 g h^2) - H)`.
pub fn riemann_invariant(w: ExtState, c: &PhysConstants) -> Result<(f64, f64)> {
    w.state.check()?;
    if w.h() <= c.h_dry {
        return Err(Error::DryState(w.h()));
    }
    let (h, q) = (w.h(), w.q());
    Ok((q, specific_energy(h, q, c.g) - w.depth))
}

/// `h + q^2 / (2 g h^2)`.
#[inline]
pub(crate) fn specific_energy(h: f64, q: f64, g: f64) -> f64 {
    h + q * q / (2.0 * g * h * h)
}

pub fn entropy_pair(w: ExtState, c: &PhysConstants) -> Result<EntropyValues> {
    w.state.check()?;
    Ok(entropy_unchecked(w, c))
}

pub(crate) fn entropy_unchecked(w: ExtState, c: &PhysConstants) -> EntropyValues {
    let h = w.h();
    if h <= c.h_dry {
        return EntropyValues { eta: 0.0, flux: 0.0 };
    }
    let u = w.q() / h;
    let g = c.g;
    let eta = 0.5 * h * u * u + 0.5 * g * h * h - g * h * w.depth;
    let flux = (0.5 * u * u + g * h) * h * u - g * h * u * w.depth;
    EntropyValues { eta, flux }
}

#[cfg(test)]
mod tests {
    use super::*;

    const C: PhysConstants = PhysConstants { g: 9.81, h_dry: 1e-8 };

    #[test]
    fn flux_at_rest_and_dry() {
        assert_eq!(physical_flux(PhysState::new(1.0, 0.0), &C).unwrap(), [0.0, 4.905]);
        assert_eq!(physical_flux(PhysState::DRY, &C).unwrap(), [0.0, 0.0]);
        assert!(matches!(
            physical_flux(PhysState::new(-0.1, 0.0), &C),
            Err(Error::NegativeDepth(_))
        ));
    }

    #[test]
    fn flux_test2_state() {
        // 0.18^2 / 0.33 + 9.81 * 0.33^2 / 2, evaluated by hand
        let expected = 0.0324 / 0.33 + 0.534_154_5;
        let f = physical_flux(PhysState::new(0.33, 0.18), &C).unwrap();
        assert_eq!(f[0], 0.18);
        assert!((f[1] - expected).abs() < 1e-14);
        assert!((f[1] - 0.632_336_318_181_818_2).abs() < 1e-12);
    }

    #[test]
    fn eigenvalue_examples() {
        let (l1, l2) = eigenvalues(PhysState::new(1.0, 0.0), &C).unwrap();
        assert_eq!((l1, l2), (-(9.81f64).sqrt(), 9.81f64.sqrt()));
        assert_eq!(eigenvalues(PhysState::DRY, &C).unwrap(), (0.0, 0.0));
        let (l1, l2) = eigenvalues(PhysState::new(0.1, 0.15), &C).unwrap();
        assert!((l1 - (1.5 - 0.981f64.sqrt())).abs() < 1e-14);
        assert!((l2 - (1.5 + 0.981f64.sqrt())).abs() < 1e-14);
    }

    #[test]
    fn froude_examples() {
        assert_eq!(froude_squared(PhysState::new(1.0, 0.0), &C).unwrap(), 0.0);
        let h = 0.7;
        let crit = PhysState::from_velocity(h, (C.g * h).sqrt());
        assert!((froude_squared(crit, &C).unwrap() - 1.0).abs() < 1e-14);
        let fr2 = froude_squared(PhysState::new(0.1, 0.15), &C).unwrap();
        assert!((fr2 - 2.25 / 0.981).abs() < 1e-13);
        assert!(matches!(froude_squared(PhysState::DRY, &C), Err(Error::DryState(_))));
    }

    #[test]
    fn riemann_invariant_examples() {
        let (a, b) = riemann_invariant(ExtState::new(1.0, 0.0, 0.3), &C).unwrap();
        assert_eq!(a, 0.0);
        assert!((b - 0.7).abs() < 1e-15);
        let (a, b) = riemann_invariant(ExtState::new(0.5, 1.2, 0.1), &C).unwrap();
        assert_eq!(a, 1.2);
        assert!((b - (0.5 + 1.44 / (2.0 * 9.81 * 0.25) - 0.1)).abs() < 1e-14);
        // adding depth lowers the second invariant by the same amount
        let (_, b2) = riemann_invariant(ExtState::new(0.5, 1.2, 0.2), &C).unwrap();
        assert!((b - b2 - 0.1).abs() < 1e-14);
        assert!(riemann_invariant(ExtState::new(0.0, 0.0, 0.0), &C).is_err());
    }

    #[test]
    fn entropy_examples() {
        let e = entropy_pair(ExtState::new(1.0, 0.0, 0.0), &C).unwrap();
        assert_eq!((e.eta, e.flux), (C.g / 2.0, 0.0));
        let e = entropy_pair(ExtState::new(1.0, 0.0, 1.0), &C).unwrap();
        assert!((e.eta - (C.g / 2.0 - C.g)).abs() < 1e-15);
        assert_eq!(e.flux, 0.0);
        let e = entropy_pair(ExtState::new(0.4, 0.0, -0.7), &C).unwrap();
        assert_eq!(e.flux, 0.0);
    }

    #[test]
    fn jacobian_eigenvalues_match() {
        // finite-difference Jacobian of the flux, eigenvalues via trace/determinant
        for &(h, q) in &[(0.33, 0.18), (1.0, -2.0), (0.05, 0.9), (2.0, 0.0)] {
            let w = PhysState::new(h, q);
            let eps = 1e-6;
            let d = |dh: f64, dq: f64| {
                let fp = physical_flux(PhysState::new(h + dh, q + dq), &C).unwrap();
                let fm = physical_flux(PhysState::new(h - dh, q - dq), &C).unwrap();
                [(fp[0] - fm[0]) / (2.0 * eps), (fp[1] - fm[1]) / (2.0 * eps)]
            };
            let col_h = d(eps, 0.0);
            let col_q = d(0.0, eps);
            let tr = col_h[0] + col_q[1];
            let det = col_h[0] * col_q[1] - col_q[0] * col_h[1];
            let disc = (tr * tr / 4.0 - det).sqrt();
            let (l1, l2) = eigenvalues(w, &C).unwrap();
            assert!((tr / 2.0 - disc - l1).abs() < 1e-5, "{h} {q}");
            assert!((tr / 2.0 + disc - l2).abs() < 1e-5, "{h} {q}");
        }
    }
}
