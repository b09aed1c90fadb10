//! The weak-signal threshold constant `eps0`, the root `> 1` of `e = exp(2 (1 - 1/e))`.

/// Interval known to bracket the root: the residual is negative at 2 and positive at 10.
pub const EPS0_BRACKET: (f64, f64) = (2.0, 10.0);

fn residual(e: f64) -> f64 {
    e - (2.0 * (1.0 - 1.0 / e)).exp()
}

fn residual_derivative(e: f64) -> f64 {
    1.0 - 2.0 / (e * e) * (2.0 * (1.0 - 1.0 / e)).exp()
}

/// Bracketed bisection down to a narrow interval, then Newton polishing.
pub fn solve_eps0() -> f64 {
    let (mut lo, mut hi) = EPS0_BRACKET;
    for _ in 0..30 {
        let mid = 0.5 * (lo + hi);
        if residual(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut e = 0.5 * (lo + hi);
    for _ in 0..8 {
        let step = residual(e) / residual_derivative(e);
        let next = e - step;
        if !(lo..=hi).contains(&next) {
            break;
        }
        e = next;
        if step.abs() < 1e-15 * e {
            break;
        }
    }
    e
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn residual_vanishes() {
        let e = solve_eps0();
        assert!(residual(e).abs() <= 1e-12);
    }

    #[test]
    fn matches_bisection_golden() {
        // 60 bisection steps on [2, 10] give 4.921553...
        let (mut lo, mut hi) = EPS0_BRACKET;
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if mid - (2.0 * (1.0 - 1.0 / mid)).exp() < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let golden = 0.5 * (lo + hi);
        assert!((solve_eps0() - golden).abs() < 1e-10);
        assert!((solve_eps0() - 4.9215).abs() < 5e-4);
    }

    #[test]
    fn deterministic() {
        assert_eq!(solve_eps0().to_bits(), solve_eps0().to_bits());
    }
}
