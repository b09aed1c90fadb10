//! Physical link parameters and the baseline SISO / equal-power MIMO efficiencies.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest admissible `sqrt(A_T A_R) / (lambda d)`.
pub const FAR_FIELD_LIMIT: f64 = 1.0e-2;

/// Physical link budget, SI units throughout.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkBudget {
    /// Transmit power `P` in watts.
    pub power: f64,
    /// Signal bandwidth `B` in hertz.
    pub bandwidth: f64,
    /// Complex baseband noise PSD `N0` in W/Hz.
    pub noise_psd: f64,
    /// Carrier wavelength in meters.
    pub wavelength: f64,
    /// Link range `d` in meters.
    pub range: f64,
    /// Lumped unmodeled loss factor in `(0, 1]`.
    pub loss: f64,
    /// Total transmit effective aperture in m².
    pub aperture_tx: f64,
    /// Total receive effective aperture in m².
    pub aperture_rx: f64,
}

impl Default for LinkBudget {
    /// X-band deep-space example: 20 W over 1 MHz at lunar range, 1 m² transmit
    /// and 1000 m² receive aperture, `gamma g ~ 1.3e4`.
    fn default() -> Self {
        LinkBudget {
            power: 20.0,
            bandwidth: 1.0e6,
            noise_psd: 4.0e-21,
            wavelength: 0.0357,
            range: 3.84e8,
            loss: 0.5,
            aperture_tx: 1.0,
            aperture_rx: 1000.0,
        }
    }
}

/// Quantities derived from a [`LinkBudget`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkDerived {
    /// Channel gain `g = A_T A_R L / (lambda d)^2`.
    pub gain: f64,
    /// Transmit SNR `gamma = P / (B N0)`.
    pub snr: f64,
    /// Received SNR `gamma g`.
    pub received_snr: f64,
}

impl LinkBudget {
    /// Checks positivity, `L <= 1` and the far-field gate.
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("power", self.power),
            ("bandwidth", self.bandwidth),
            ("noise_psd", self.noise_psd),
            ("wavelength", self.wavelength),
            ("range", self.range),
            ("loss", self.loss),
            ("aperture_tx", self.aperture_tx),
            ("aperture_rx", self.aperture_rx),
        ];
        for (field, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::validation(
                    field,
                    format!("must be finite and > 0, got {value}"),
                ));
            }
        }
        if self.loss > 1.0 {
            return Err(Error::validation(
                "loss",
                format!("must not exceed 1, got {}", self.loss),
            ));
        }
        let ratio = self.far_field_ratio();
        if ratio > FAR_FIELD_LIMIT {
            return Err(Error::validation(
                "far_field_ratio",
                format!(
                    "sqrt(A_T*A_R)/(lambda*d) = {ratio:e} exceeds {FAR_FIELD_LIMIT:e}"
                ),
            ));
        }
        Ok(())
    }

    /// `sqrt(A_T A_R) / (lambda d)`.
    pub fn far_field_ratio(&self) -> f64 {
        (self.aperture_tx * self.aperture_rx).sqrt() / (self.wavelength * self.range)
    }

    /// Noise power in the signal bandwidth, `B N0`.
    pub fn noise_floor(&self) -> f64 {
        self.bandwidth * self.noise_psd
    }

    /// `lambda * d`, the natural length² scale of the far-field kernel.
    pub fn lambda_d(&self) -> f64 {
        self.wavelength * self.range
    }

    pub fn max_aperture(&self) -> f64 {
        self.aperture_tx.max(self.aperture_rx)
    }

    /// Returns a copy whose power is scaled so that `gamma g` equals `received_snr`.
    pub fn with_received_snr(&self, received_snr: f64) -> Self {
        let gain = self.aperture_tx * self.aperture_rx * self.loss / self.lambda_d().powi(2);
        LinkBudget {
            power: received_snr * self.noise_floor() / gain,
            ..*self
        }
    }
}

/// Channel gain and SNRs for a validated link.
pub fn derive_link(link: &LinkBudget) -> Result<LinkDerived> {
    link.validate()?;
    let gain = link.aperture_tx * link.aperture_rx * link.loss / link.lambda_d().powi(2);
    let snr = link.power / link.noise_floor();
    Ok(LinkDerived {
        gain,
        snr,
        received_snr: gain * snr,
    })
}

/// `log2(1 + x)` via the natural logarithm.
pub fn log2_1p(x: f64) -> f64 {
    x.ln_1p() / std::f64::consts::LN_2
}

/// SISO spectral efficiency `log2(1 + gamma g)` in b/s/Hz.
pub fn siso_efficiency(received_snr: f64) -> f64 {
    log2_1p(received_snr.max(0.0))
}

/// Equal-power MIMO efficiency `sum log2(1 + gamma g / M^3 |v_i|^2)` over the
/// eigenvalues of `H H*`.
pub fn mimo_equal_power_efficiency(channel: &DMatrix<Complex64>, gamma: f64, g: f64) -> Result<f64> {
    let m = channel.nrows();
    if m == 0 || channel.ncols() != m {
        return Err(Error::Dimension(format!(
            "channel must be square and non-empty, got {}x{}",
            channel.nrows(),
            channel.ncols()
        )));
    }
    if channel.iter().any(|h| !(h.re.is_finite() && h.im.is_finite())) {
        return Err(Error::validation("channel", "entries must be finite"));
    }
    let gram = channel * channel.adjoint();
    let eig = nalgebra::SymmetricEigen::try_new(gram, 1e-14, 10_000).ok_or_else(|| {
        Error::EigenSolve {
            context: format!("{m}x{m} H H*"),
        }
    })?;
    let scale = gamma * g / (m as f64).powi(3);
    Ok(eig
        .eigenvalues
        .iter()
        .map(|&v| log2_1p(scale * v.max(0.0)))
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn unit_link() -> LinkBudget {
        LinkBudget {
            power: 1.0,
            bandwidth: 1.0,
            noise_psd: 1.0,
            wavelength: 1.0,
            range: 1.0e3,
            loss: 1.0,
            aperture_tx: 1.0,
            aperture_rx: 1.0,
        }
    }

    #[test]
    fn all_ones_gain_and_snr() {
        // lambda = d = 1 would violate the far-field gate, so check the formula
        // directly and the validated path with d = 1e3.
        let mut link = unit_link();
        link.range = 1.0;
        assert!(link.validate().is_err());
        let g = link.aperture_tx * link.aperture_rx * link.loss / link.lambda_d().powi(2);
        assert_eq!(g, 1.0);
        assert_eq!(link.power / link.noise_floor(), 1.0);

        let d = derive_link(&unit_link()).unwrap();
        assert!((d.gain - 1.0e-6).abs() < 1e-20);
        assert_eq!(d.snr, 1.0);
        assert_eq!(d.received_snr, d.gain * d.snr);
    }

    #[test]
    fn hand_computed_gain() {
        let link = LinkBudget {
            aperture_tx: 10.0,
            aperture_rx: 10.0,
            loss: 0.5,
            wavelength: 0.1,
            range: 1.0e6,
            ..unit_link()
        };
        let d = derive_link(&link).unwrap();
        assert!((d.gain - 5.0e-9).abs() < 1e-22);
    }

    #[test]
    fn far_field_violation_names_ratio() {
        let link = LinkBudget {
            aperture_tx: 0.25,
            aperture_rx: 0.25,
            wavelength: 0.5,
            range: 1.0,
            ..unit_link()
        };
        assert!((link.far_field_ratio() - 0.5).abs() < 1e-15);
        match derive_link(&link) {
            Err(Error::Validation { field, .. }) => assert_eq!(field, "far_field_ratio"),
            other => panic!("expected far-field error, got {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_fields() {
        let bad = LinkBudget { loss: 1.5, ..unit_link() };
        assert!(matches!(bad.validate(), Err(Error::Validation { field: "loss", .. })));
        let bad = LinkBudget { power: 0.0, ..unit_link() };
        assert!(matches!(bad.validate(), Err(Error::Validation { field: "power", .. })));
        let bad = LinkBudget { bandwidth: f64::NAN, ..unit_link() };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn siso_values() {
        assert_eq!(siso_efficiency(0.0), 0.0);
        assert!((siso_efficiency(1.0) - 1.0).abs() < 1e-15);
        assert!((siso_efficiency(3.0) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn mimo_reduces_and_degenerates() {
        let h = DMatrix::from_element(1, 1, Complex64::new(1.0, 0.0));
        assert!((mimo_equal_power_efficiency(&h, 1.0, 1.0).unwrap() - 1.0).abs() < 1e-12);

        let zero = DMatrix::<Complex64>::zeros(3, 3);
        assert_eq!(mimo_equal_power_efficiency(&zero, 5.0, 2.0).unwrap(), 0.0);

        let id = DMatrix::<Complex64>::identity(2, 2);
        assert!((mimo_equal_power_efficiency(&id, 8.0, 1.0).unwrap() - 2.0).abs() < 1e-12);

        let rect = DMatrix::<Complex64>::zeros(2, 3);
        assert!(matches!(
            mimo_equal_power_efficiency(&rect, 1.0, 1.0),
            Err(Error::Dimension(_))
        ));
    }

    fn random_unitary(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<Complex64> {
        let a = DMatrix::from_fn(n, n, |_, _| {
            Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        });
        a.qr().q()
    }

    #[test]
    fn unitary_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in [2, 3, 5] {
            let h = DMatrix::from_fn(n, n, |_, _| {
                Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
            });
            let u = random_unitary(&mut rng, n);
            let v = random_unitary(&mut rng, n);
            let base = mimo_equal_power_efficiency(&h, 30.0, 0.7).unwrap();
            let rotated = mimo_equal_power_efficiency(&(&u * &h * &v), 30.0, 0.7).unwrap();
            assert!((base - rotated).abs() < 1e-9);
        }
    }

    proptest! {
        #[test]
        fn siso_increasing_and_concave(x in 0.0f64..1.0e4) {
            let h = 1e-3 * (1.0 + x);
            let (a, b, c) = (siso_efficiency(x), siso_efficiency(x + h), siso_efficiency(x + 2.0 * h));
            prop_assert!(b > a);
            prop_assert!(c - b <= b - a + 1e-15);
        }

        #[test]
        fn scalar_mimo_is_siso(re in -3.0f64..3.0, im in -3.0f64..3.0, gg in 0.0f64..100.0) {
            let h = DMatrix::from_element(1, 1, Complex64::new(re, im));
            let mimo = mimo_equal_power_efficiency(&h, gg, 1.0).unwrap();
            let siso = siso_efficiency(gg * (re * re + im * im));
            prop_assert!((mimo - siso).abs() < 1e-12);
        }
    }
}
