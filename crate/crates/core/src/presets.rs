//! Parameter sets of the reference eigenmode portraits.
//!
//! Only the defining quantities are given; the rest is resolved by
//! [`solve_constraints`](crate::analytic::solve_constraints), so an
//! inconsistent set surfaces as an error.

use crate::analytic::{Family, Knowns};
use crate::sweep::linspace;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Preset {
    pub name: &'static str,
    pub family: Family,
    pub knowns: Knowns<f64>,
}

/// `a = 0.01, b = 0.3, V1 = g2 = -4, kappa = 3`, `Phi0 = 1`.
pub fn fig1() -> Preset {
    Preset {
        name: "fig1",
        family: Family::ClassI,
        knowns: Knowns::class_i_normalized(0.01, 0.3, -4.0, -4.0, 3.0),
    }
}

/// Base of the `a` scan: `b = 0.003, V1 = g2 = -4, kappa = 3`, `Phi0 = 1`.
pub fn fig2_base() -> Preset {
    let mut knowns = Knowns::class_i_normalized(0.0, 0.003, -4.0, -4.0, 3.0);
    knowns.a = None;
    Preset {
        name: "fig2",
        family: Family::ClassI,
        knowns,
    }
}

/// Values of `a` shown individually.
pub const FIG2_POINTS: [f64; 4] = [0.03, 0.04, 0.05, 0.09];

/// Dense scan of `a` over `[0.03, 0.09]`.
pub fn fig2_scan() -> Vec<f64> {
    linspace(0.03, 0.09, 13)
}

/// `a = 1, b = 0.003, g1 = 4, V1 = g2 = -4, kappa = 3`.
pub fn fig3() -> Preset {
    Preset {
        name: "fig3",
        family: Family::ClassI,
        knowns: Knowns {
            a: Some(1.0),
            b: Some(0.003),
            kappa: Some(3.0),
            v1: Some(-4.0),
            g1: Some(4.0),
            g2: Some(-4.0),
            phi0: None,
        },
    }
}

/// Class I with `g1 = g2 = 4`, `a = 1, b = 0.003, kappa = 3`.
pub fn fig4_class_i() -> Preset {
    Preset {
        name: "fig4-class-i",
        family: Family::ClassI,
        knowns: Knowns {
            a: Some(1.0),
            b: Some(0.003),
            kappa: Some(3.0),
            g1: Some(4.0),
            g2: Some(4.0),
            ..Knowns::default()
        },
    }
}

/// Class II with `g1 = 4, g2 = 2.44`, `a = 1, b = 0.003, kappa = 3`.
pub fn fig4_class_ii() -> Preset {
    Preset {
        name: "fig4-class-ii",
        family: Family::ClassII,
        knowns: Knowns::class_ii_couplings(1.0, 0.003, 4.0, 2.44, 3.0),
    }
}

/// Every single-point preset, with the `fig2` points expanded.
pub fn all() -> Vec<Preset> {
    let mut out = vec![fig1()];
    let base = fig2_base();
    out.extend(FIG2_POINTS.iter().map(|&a| Preset {
        knowns: Knowns {
            a: Some(a),
            ..base.knowns
        },
        ..base
    }));
    out.extend([fig3(), fig4_class_i(), fig4_class_ii()]);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::solve_constraints;

    #[test]
    fn every_preset_resolves() {
        for p in all() {
            solve_constraints(p.family, &p.knowns).unwrap();
        }
    }

    #[test]
    fn fig2_scan_contains_highlighted_points() {
        let scan = fig2_scan();
        assert_eq!(scan.len(), 13);
        for a in FIG2_POINTS {
            assert!(scan.iter().any(|s| (s - a).abs() < 1e-12), "{a}");
        }
    }
}
