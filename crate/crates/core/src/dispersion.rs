//! Closed-form dispersion quantities of the linearized road-field system.
//!
//! An exponential profile `e^{-lambda (x - c t)} (1, phi(y))` solves the
//! linearization at zero when the road relation `Psi1(lambda, c)` equals
//! `int nu phi`. Everything here is explicit in the model parameters; the
//! kernel-dependent side lives in [`crate::bvp`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ModelParams;

/// A speed/decay pair; both components are strictly positive.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DispersionPoint {
    pub c: f64,
    pub lambda: f64,
}

impl DispersionPoint {
    pub fn new(c: f64, lambda: f64) -> Result<Self> {
        crate::error::positive("c", c)?;
        crate::error::positive("lambda", lambda)?;
        Ok(Self { c, lambda })
    }
}

/// Absolute bisection tolerance on speeds.
pub const SPEED_TOL: f64 = 1e-12;

pub fn c_kpp(p: &ModelParams) -> f64 {
    p.c_kpp()
}

/// Road relation `-D lambda^2 + lambda c + mu_bar`.
#[inline]
pub fn psi1(lambda: f64, c: f64, p: &ModelParams) -> f64 {
    -p.d_road * lambda * lambda + lambda * c + p.mu_bar
}

/// Roots `(lambda1-, lambda1+)` of the road relation.
pub fn lambda1_pm(c: f64, p: &ModelParams) -> (f64, f64) {
    let disc = (c * c + 4.0 * p.d_road * p.mu_bar).sqrt();
    let plus = (c + disc) / (2.0 * p.d_road);
    // Product of the roots is -mu_bar / D; avoids cancellation in c - disc.
    let minus = -p.mu_bar / (p.d_road * plus);
    (minus, plus)
}

/// Endpoints `(lambda2-, lambda2+)` of the interval where the field BVP has a
/// decaying solution.
pub fn lambda2_pm(c: f64, p: &ModelParams) -> Result<(f64, f64)> {
    let ck = p.c_kpp();
    if !(c >= ck) {
        return Err(Error::SubcriticalSpeed { c, c_kpp: ck });
    }
    let disc = ((c - ck) * (c + ck)).sqrt();
    let plus = (c + disc) / (2.0 * p.d_field);
    // lambda2- * lambda2+ = a / d.
    let minus = p.growth / (p.d_field * plus);
    Ok((minus, plus))
}

/// Field coefficient `P(lambda) = lambda c - d lambda^2 - a`.
#[inline]
pub fn p_coeff(lambda: f64, c: f64, p: &ModelParams) -> f64 {
    lambda * c - p.d_field * lambda * lambda - p.growth
}

/// `d (2 + mu_bar / a)`, the road diffusivity at which `lambda1+(c_K) = lambda2-(c_K)`.
pub fn threshold_d(p: &ModelParams) -> f64 {
    p.d_field * (2.0 + p.mu_bar / p.growth)
}

/// `D sqrt(a / (D - d))`, an upper bound on the spreading speed over all
/// admissible kernels.
pub fn upper_bound_speed(p: &ModelParams) -> Result<f64> {
    if !(p.d_road > p.d_field) {
        return Err(Error::BoundUndefined {
            road: p.d_road,
            field: p.d_field,
        });
    }
    Ok(p.d_road * (p.growth / (p.d_road - p.d_field)).sqrt())
}

/// Separation `lambda1+(c) - lambda2-(c)`; increasing in `c` on `[c_K, inf)`.
pub fn crossing_gap(c: f64, p: &ModelParams) -> Result<f64> {
    let (_, l1) = lambda1_pm(c, p);
    let (l2, _) = lambda2_pm(c, p)?;
    Ok(l1 - l2)
}

/// Speed `c_min > c_K` at which `lambda1+` overtakes `lambda2-`.
pub fn c_min_crossing(p: &ModelParams) -> Result<f64> {
    let threshold = threshold_d(p);
    if !(p.d_road > threshold) {
        return Err(Error::BelowThreshold {
            road: p.d_road,
            threshold,
        });
    }
    let mut lo = p.c_kpp();
    let mut hi = upper_bound_speed(p)? + 1.0;
    debug_assert!(crossing_gap(lo, p)? < 0.0 && crossing_gap(hi, p)? > 0.0);
    for _ in 0..200 {
        if hi - lo <= SPEED_TOL {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if crossing_gap(mid, p)? > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(d: f64, big_d: f64, a: f64, mu: f64) -> ModelParams {
        ModelParams::new(d, big_d, a, mu, 1.0).unwrap()
    }

    #[test]
    fn kpp_speed_examples() {
        assert_eq!(c_kpp(&params(1.0, 3.0, 1.0, 1.0)), 2.0);
        assert_eq!(c_kpp(&params(4.0, 3.0, 1.0, 1.0)), 4.0);
        assert_eq!(c_kpp(&params(1.0, 3.0, 0.25, 1.0)), 1.0);
    }

    #[test]
    fn psi1_examples() {
        let p = params(1.0, 4.0, 1.0, 1.0);
        assert_eq!(psi1(0.0, 2.3, &p), 1.0);
        assert!((psi1(2.3 / 4.0, 2.3, &p) - 1.0).abs() < 1e-15);
        assert_eq!(psi1(0.25, 2.0, &p), 1.25);
    }

    #[test]
    fn lambda1_examples() {
        let p = params(1.0, 4.0, 1.0, 1.0);
        let (m, pl) = lambda1_pm(2.0, &p);
        assert!((pl - (2.0 + 20f64.sqrt()) / 8.0).abs() < 1e-15);
        assert!((pl - 0.809017).abs() < 1e-6);
        assert!((m + 0.309017).abs() < 1e-6);
        let q = params(1.0, 1.0, 1.0, 1.0);
        let (m, pl) = lambda1_pm(0.0, &q);
        assert_eq!((m, pl), (-1.0, 1.0));
    }

    #[test]
    fn lambda2_examples() {
        let p = params(1.0, 4.0, 1.0, 1.0);
        assert_eq!(lambda2_pm(2.0, &p).unwrap(), (1.0, 1.0));
        let (m, pl) = lambda2_pm(2.5, &p).unwrap();
        assert!((m - 0.5).abs() < 1e-15 && (pl - 2.0).abs() < 1e-15);
        assert!(matches!(
            lambda2_pm(1.9, &p),
            Err(Error::SubcriticalSpeed { .. })
        ));
    }

    #[test]
    fn p_coeff_examples() {
        let p = params(1.0, 4.0, 1.0, 1.0);
        let (m, pl) = lambda2_pm(2.5, &p).unwrap();
        assert!(p_coeff(m, 2.5, &p).abs() < 1e-15);
        assert!(p_coeff(pl, 2.5, &p).abs() < 1e-15);
        assert_eq!(p_coeff(1.25, 2.5, &p), 0.5625);
        let c: f64 = 3.1;
        let vertex = p_coeff(c / 2.0, c, &p);
        assert!((vertex - (c * c - 4.0) / 4.0).abs() < 1e-15);
    }

    #[test]
    fn threshold_examples() {
        assert_eq!(threshold_d(&params(1.0, 4.0, 1.0, 1.0)), 3.0);
        assert_eq!(threshold_d(&params(2.0, 4.0, 0.5, 1.0)), 8.0);
        let t = threshold_d(&params(1.0, 4.0, 1.0, 1e-12));
        assert!((t - (2.0 + 1e-12)).abs() < 1e-15);
    }

    #[test]
    fn threshold_is_where_the_roots_meet() {
        let p = params(1.3, 1.0, 0.7, 0.9);
        let at = p.with_road_diffusivity(threshold_d(&p));
        let gap = crossing_gap(at.c_kpp(), &at).unwrap();
        assert!(gap.abs() < 1e-14, "gap = {gap}");
    }

    #[test]
    fn upper_bound_examples() {
        let b = upper_bound_speed(&params(1.0, 4.0, 1.0, 1.0)).unwrap();
        assert!((b - 4.0 / 3f64.sqrt()).abs() < 1e-15);
        assert!((b - 2.309401).abs() < 1e-6);
        assert_eq!(upper_bound_speed(&params(1.0, 2.0, 1.0, 1.0)).unwrap(), 2.0);
        assert!(matches!(
            upper_bound_speed(&params(1.0, 1.0, 1.0, 1.0)),
            Err(Error::BoundUndefined { .. })
        ));
    }

    #[test]
    fn c_min_examples() {
        let c = c_min_crossing(&params(1.0, 4.0, 1.0, 1.0)).unwrap();
        assert!((c - 5.0 / 6f64.sqrt()).abs() < 1e-9);
        let c = c_min_crossing(&params(1.0, 6.0, 1.0, 1.0)).unwrap();
        assert!((c - 4.9f64.sqrt()).abs() < 1e-9);
        let p = params(1.0, 3.0, 1.0, 1.0);
        assert!(matches!(
            c_min_crossing(&p),
            Err(Error::BelowThreshold { .. })
        ));
        // Just above the threshold the crossing approaches c_K from above.
        let c = c_min_crossing(&p.with_road_diffusivity(3.0 + 1e-6)).unwrap();
        assert!(c > 2.0 && c - 2.0 < 1e-4, "c = {c}");
    }

    #[test]
    fn c_min_is_a_root_of_the_gap() {
        for big_d in [3.5, 4.0, 6.0, 10.0, 40.0] {
            let p = params(1.0, big_d, 1.0, 1.0);
            let c = c_min_crossing(&p).unwrap();
            assert!(crossing_gap(c, &p).unwrap().abs() <= 1e-10);
            assert!(c > p.c_kpp());
            assert!(c <= upper_bound_speed(&p).unwrap());
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn any_params() -> impl Strategy<Value = ModelParams> {
            (0.1f64..5.0, 0.1f64..50.0, 0.1f64..5.0, 0.01f64..5.0)
                .prop_map(|(d, big_d, a, mu)| ModelParams::new(d, big_d, a, mu, 1.0).unwrap())
        }

        proptest! {
            #[test]
            fn road_roots_are_roots(p in any_params(), c in 0.0f64..20.0) {
                let (m, pl) = lambda1_pm(c, &p);
                let scale = 1e-12 * p.mu_bar.max(1.0);
                prop_assert!(psi1(pl, c, &p).abs() <= scale);
                prop_assert!(psi1(m, c, &p).abs() <= scale);
                prop_assert!(m < 0.0 && pl > 0.0);
            }

            #[test]
            fn p_sign_identity(p in any_params(), excess in 1e-3f64..5.0) {
                let c = p.c_kpp() * (1.0 + excess);
                let (lo, hi) = lambda2_pm(c, &p).unwrap();
                let w = hi - lo;
                for k in 1..100 {
                    let t = k as f64 / 100.0;
                    prop_assert!(p_coeff(lo + t * w, c, &p) > 0.0);
                    prop_assert!(p_coeff(lo - t * w, c, &p) < 0.0);
                    prop_assert!(p_coeff(hi + t * w, c, &p) < 0.0);
                }
            }

            #[test]
            fn root_monotonicity_in_c(p in any_params()) {
                let ck = p.c_kpp();
                let dc = 1e-6 * ck;
                let mut prev = None;
                for k in 0..50 {
                    let c = ck * (1.0 + 0.02 + 0.1 * k as f64);
                    let up = (lambda1_pm(c + dc, &p).1 - lambda1_pm(c - dc, &p).1) / (2.0 * dc);
                    let down = (lambda2_pm(c + dc, &p).unwrap().0 - lambda2_pm(c - dc, &p).unwrap().0) / (2.0 * dc);
                    prop_assert!(up > 0.0);
                    prop_assert!(down < 0.0);
                    if let Some((l1, l2)) = prev {
                        prop_assert!(lambda1_pm(c, &p).1 > l1);
                        prop_assert!(lambda2_pm(c, &p).unwrap().0 < l2);
                    }
                    prev = Some((lambda1_pm(c, &p).1, lambda2_pm(c, &p).unwrap().0));
                }
            }

            #[test]
            fn road_root_decreases_with_d(p in any_params(), c in 0.0f64..10.0, f in 1.01f64..5.0) {
                let slow = p.with_road_diffusivity(p.d_road * f);
                prop_assert!(lambda1_pm(c, &p).1 > lambda1_pm(c, &slow).1);
            }

            #[test]
            fn threshold_sign_flip(p in any_params()) {
                let t = threshold_d(&p);
                let below = p.with_road_diffusivity(t * (1.0 - 1e-6));
                let above = p.with_road_diffusivity(t * (1.0 + 1e-6));
                prop_assert!(crossing_gap(p.c_kpp(), &below).unwrap() > 0.0);
                prop_assert!(crossing_gap(p.c_kpp(), &above).unwrap() < 0.0);
            }

            #[test]
            fn crossing_ordering(p in any_params(), f in 1.001f64..10.0) {
                let p = p.with_road_diffusivity(threshold_d(&p) * f);
                let c = c_min_crossing(&p).unwrap();
                prop_assert!(c > p.c_kpp());
                prop_assert!(c <= upper_bound_speed(&p).unwrap());
            }
        }
    }
}
