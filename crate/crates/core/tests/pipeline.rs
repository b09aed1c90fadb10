//! Link budget through bounds to a synthesized array, via the public API only.

use fscap_core::array_synth::{achieved_efficiency, synthesize_array};
use fscap_core::bounds::{
    capacity_bounds, corollary_approx, lower_bound_beta, AreaChoice, Regime, SpectrumSettings,
};
use fscap_core::link_model::{derive_link, siso_efficiency, LinkBudget};
use fscap_core::numerics::solve_eps0;
use fscap_core::spectrum::{assemble_spectrum, DiscGeometry, SpectrumCache, Truncation};
use fscap_core::waterfill::{allocation_efficiency, waterfill, ChannelGains};

fn link_at(gg: f64) -> LinkBudget {
    LinkBudget::default().with_received_snr(gg)
}

#[test]
fn default_link_is_valid_and_strong() {
    let l = LinkBudget::default();
    let d = derive_link(&l).unwrap();
    assert!(d.received_snr > 1e4 && d.received_snr < 2e4);
    let b = capacity_bounds(&l, &AreaChoice::Optimize, &SpectrumCache::new(), &SpectrumSettings::default()).unwrap();
    assert_eq!(b.regime, Regime::StrongSignal);
    assert!(b.lower_bits > siso_efficiency(d.received_snr));
    assert!(b.lower_bits <= b.upper_bits);
    assert!(b.active_k > 1);
}

#[test]
fn strong_regime_report_at_hundred() {
    let b = capacity_bounds(&link_at(100.0), &AreaChoice::Optimize, &SpectrumCache::new(), &SpectrumSettings::default()).unwrap();
    assert!((b.upper_bits - 11.611).abs() < 1.5e-3);
    assert!((corollary_approx(100.0, solve_eps0()).unwrap() - 11.610).abs() < 1.5e-3);
    // Recorded behaviour: the lower bound sits about 9% under the upper bound here.
    assert!(b.lower_bits > 10.5 && b.lower_bits < 10.7, "{}", b.lower_bits);
}

#[test]
fn finite_array_approaches_the_lower_bound() {
    let l = link_at(40.0);
    let g = DiscGeometry::from_space_bandwidth(3.0, l.wavelength, l.range, l.loss).unwrap();
    let s = assemble_spectrum(&g, Truncation::default_for(g.c_param)).unwrap();
    let (lower, k) = lower_bound_beta(g.area, &l, &s).unwrap();
    let d = synthesize_array(&s, g.area, k, 512, &l).unwrap();
    let eff = achieved_efficiency(&d, &g, &l).unwrap();
    assert!((eff - lower).abs() / lower < 0.01, "{eff} vs {lower}");
}

#[test]
fn waterfill_beats_equal_power() {
    let g = ChannelGains::new(vec![2.0, 1.0, 0.25, 0.05], 0.5).unwrap();
    let a = waterfill(&g, 3.0).unwrap();
    let best = allocation_efficiency(&g, &a).unwrap();
    let equal: f64 = g.gains().iter().map(|x| (1.0 + x * 0.75 / 0.5).log2()).sum();
    assert!(best >= equal);
    assert!((a.powers.iter().sum::<f64>() - 3.0).abs() < 1e-12);
}
