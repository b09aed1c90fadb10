//! Waterfilling over parallel Gaussian channels.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::link_model::log2_1p;

/// Channel power gains `|eta_n|^2`, sorted non-increasing, and the noise floor `B N0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelGains {
    gains: Vec<f64>,
    noise_floor: f64,
}

impl ChannelGains {
    /// Sorts `gains` non-increasing. Needs at least one positive finite gain.
    pub fn new(mut gains: Vec<f64>, noise_floor: f64) -> Result<Self> {
        if !(noise_floor.is_finite() && noise_floor > 0.0) {
            return Err(Error::validation("noise_floor", format!("must be > 0, got {noise_floor}")));
        }
        if gains.iter().any(|g| !(g.is_finite() && *g >= 0.0)) {
            return Err(Error::validation("gains", "entries must be finite and >= 0"));
        }
        if !gains.iter().any(|&g| g > 0.0) {
            return Err(Error::validation("gains", "need at least one positive gain"));
        }
        gains.sort_by(|a, b| b.total_cmp(a));
        Ok(ChannelGains { gains, noise_floor })
    }

    pub fn gains(&self) -> &[f64] {
        &self.gains
    }

    pub fn noise_floor(&self) -> f64 {
        self.noise_floor
    }

    pub fn len(&self) -> usize {
        self.gains.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gains.is_empty()
    }

    /// `B N0 / gain` for the usable prefix; zero gains and gains whose inverse
    /// overflows are dropped.
    fn inverse_prefix(&self) -> Vec<f64> {
        self.gains
            .iter()
            .map(|&g| self.noise_floor / g)
            .take_while(|x| x.is_finite())
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerAllocation {
    /// Same order and length as the gains.
    pub powers: Vec<f64>,
    pub active_k: usize,
    pub water_level: f64,
}

fn active_from_inverse(inverse: &[f64], total_power: f64) -> usize {
    // Forward prefix sums: subtracting from a running total would cancel
    // catastrophically when the inverses span many decades.
    let mut prefix = Vec::with_capacity(inverse.len());
    let mut acc = 0.0;
    for &x in inverse {
        acc += x;
        prefix.push(acc);
    }
    for k in (1..=inverse.len()).rev() {
        // The k-th inverse is the largest in the prefix, so checking it covers all k' <= k.
        if total_power + prefix[k - 1] >= k as f64 * inverse[k - 1] {
            return k;
        }
    }
    1
}

/// Greatest `K` with `(P + sum_{i<=K} BN0/g_i) / K >= BN0/g_K`.
///
/// A channel sitting exactly at the water level counts as active (with zero power).
pub fn select_active_k(gains: &ChannelGains, total_power: f64) -> Result<usize> {
    check_power(total_power)?;
    Ok(active_from_inverse(&gains.inverse_prefix(), total_power))
}

fn check_power(total_power: f64) -> Result<()> {
    if !(total_power.is_finite() && total_power > 0.0) {
        return Err(Error::validation("power", format!("must be finite and > 0, got {total_power}")));
    }
    Ok(())
}

pub fn waterfill(gains: &ChannelGains, total_power: f64) -> Result<PowerAllocation> {
    check_power(total_power)?;
    let inverse = gains.inverse_prefix();
    let k = active_from_inverse(&inverse, total_power);
    let level = (total_power + inverse[..k].iter().sum::<f64>()) / k as f64;
    let mut powers = vec![0.0; gains.len()];
    for (p, inv) in powers.iter_mut().zip(&inverse[..k]) {
        *p = (level - inv).max(0.0);
    }
    Ok(PowerAllocation {
        powers,
        active_k: k,
        water_level: level,
    })
}

/// `sum_n log2(1 + g_n P_n / BN0)`.
pub fn allocation_efficiency(gains: &ChannelGains, alloc: &PowerAllocation) -> Result<f64> {
    if alloc.powers.len() != gains.len() {
        return Err(Error::Dimension(format!(
            "{} powers for {} gains",
            alloc.powers.len(),
            gains.len()
        )));
    }
    Ok(gains
        .gains
        .iter()
        .zip(&alloc.powers)
        .map(|(g, p)| log2_1p(g * p / gains.noise_floor))
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn hand() -> ChannelGains {
        ChannelGains::new(vec![1.0, 0.5, 0.1], 1.0).unwrap()
    }

    #[test]
    fn hand_example() {
        let g = hand();
        assert_eq!(select_active_k(&g, 10.0).unwrap(), 2);
        let a = waterfill(&g, 10.0).unwrap();
        assert_eq!(a.active_k, 2);
        assert!((a.water_level - 6.5).abs() < 1e-12);
        assert!((a.powers[0] - 5.5).abs() < 1e-12);
        assert!((a.powers[1] - 4.5).abs() < 1e-12);
        assert_eq!(a.powers[2], 0.0);
        let eff = allocation_efficiency(&g, &a).unwrap();
        assert!((eff - (6.5f64.log2() + 3.25f64.log2())).abs() < 1e-12);
        assert!((eff - 4.4009).abs() < 1e-4);
    }

    #[test]
    fn trivial_cases() {
        let eq = ChannelGains::new(vec![1.0, 1.0], 1.0).unwrap();
        assert_eq!(select_active_k(&eq, 1e-9).unwrap(), 2);
        let three = ChannelGains::new(vec![0.3; 3], 2.0).unwrap();
        let a = waterfill(&three, 9.0).unwrap();
        assert!(a.powers.iter().all(|p| (p - 3.0).abs() < 1e-12));

        let one = ChannelGains::new(vec![1.0], 1.0).unwrap();
        let a = waterfill(&one, 7.0).unwrap();
        assert_eq!(a.powers, vec![7.0]);
        assert_eq!(a.active_k, 1);
        let unit = PowerAllocation { powers: vec![1.0], active_k: 1, water_level: 2.0 };
        assert!((allocation_efficiency(&one, &unit).unwrap() - 1.0).abs() < 1e-15);
        let zero = PowerAllocation { powers: vec![0.0; 3], active_k: 1, water_level: 0.0 };
        assert_eq!(allocation_efficiency(&hand(), &zero).unwrap(), 0.0);
    }

    #[test]
    fn zero_gains_get_zero_power() {
        let g = ChannelGains::new(vec![0.0, 2.0, 0.0, 1.0], 1.0).unwrap();
        assert_eq!(g.gains(), &[2.0, 1.0, 0.0, 0.0]);
        let a = waterfill(&g, 100.0).unwrap();
        assert_eq!(a.active_k, 2);
        assert_eq!(&a.powers[2..], &[0.0, 0.0]);
    }

    #[test]
    fn tie_at_water_level_is_counted() {
        // Level with two channels is (1 + 1 + 2) / 2 = 2, exactly BN0 / g_3.
        let g = ChannelGains::new(vec![1.0, 1.0, 0.5], 1.0).unwrap();
        let a = waterfill(&g, 2.0).unwrap();
        assert_eq!(a.active_k, 3);
        assert_eq!(a.powers[2], 0.0);
        assert!((a.water_level - 2.0).abs() < 1e-15);
    }

    #[test]
    fn wide_dynamic_range_gains() {
        let mut raw = vec![1.0, 1e-9];
        raw.extend((0..300).map(|i| 1e-34 * (1.0 + i as f64)));
        let g = ChannelGains::new(raw, 1.0).unwrap();
        let a = waterfill(&g, 1.0).unwrap();
        assert_eq!(a.active_k, 1);
        assert!((allocation_efficiency(&g, &a).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(ChannelGains::new(vec![0.0, 0.0], 1.0).is_err());
        assert!(ChannelGains::new(vec![1.0], 0.0).is_err());
        assert!(ChannelGains::new(vec![f64::NAN], 1.0).is_err());
        assert!(waterfill(&hand(), 0.0).is_err());
        let short = PowerAllocation { powers: vec![1.0], active_k: 1, water_level: 1.0 };
        assert!(matches!(allocation_efficiency(&hand(), &short), Err(Error::Dimension(_))));
    }

    fn gains_strategy() -> impl Strategy<Value = (Vec<f64>, f64, f64)> {
        (
            prop::collection::vec(1e-3f64..10.0, 1..8),
            1e-2f64..10.0,
            1e-2f64..100.0,
        )
    }

    proptest! {
        #[test]
        fn invariants_hold((raw, floor, power) in gains_strategy()) {
            let g = ChannelGains::new(raw, floor).unwrap();
            let a = waterfill(&g, power).unwrap();
            let total: f64 = a.powers.iter().sum();
            prop_assert!((total - power).abs() <= 1e-9 * power);
            for (k, (&gain, &p)) in g.gains().iter().zip(&a.powers).enumerate() {
                let inv = floor / gain;
                if k < a.active_k {
                    prop_assert!((p + inv - a.water_level).abs() <= 1e-9 * a.water_level);
                } else {
                    prop_assert_eq!(p, 0.0);
                    prop_assert!(inv >= a.water_level - 1e-12);
                }
            }
        }

        #[test]
        fn scale_covariant((raw, floor, power) in gains_strategy(), s in 1e-3f64..1e3) {
            let a = waterfill(&ChannelGains::new(raw.clone(), floor).unwrap(), power).unwrap();
            let scaled: Vec<f64> = raw.iter().map(|g| g * s).collect();
            let b = waterfill(&ChannelGains::new(scaled, floor * s).unwrap(), power).unwrap();
            prop_assert_eq!(a.active_k, b.active_k);
            for (x, y) in a.powers.iter().zip(&b.powers) {
                prop_assert!((x - y).abs() <= 1e-12 * power);
            }
        }

        #[test]
        fn monotone_in_power_and_gain((raw, floor, power) in gains_strategy(), bump in 1.0f64..3.0, idx in 0usize..8) {
            let g = ChannelGains::new(raw.clone(), floor).unwrap();
            let base = allocation_efficiency(&g, &waterfill(&g, power).unwrap()).unwrap();
            let more = allocation_efficiency(&g, &waterfill(&g, power * bump).unwrap()).unwrap();
            prop_assert!(more >= base - 1e-12);
            let mut raised = raw;
            let i = idx % raised.len();
            raised[i] *= bump;
            let h = ChannelGains::new(raised, floor).unwrap();
            let up = allocation_efficiency(&h, &waterfill(&h, power).unwrap()).unwrap();
            prop_assert!(up >= base - 1e-12);
        }
    }
}
