const NR_START: f64 = 0.5;
const NR_MAX_STEPS: usize = 50;
const BISECTION_STEPS: usize = 40;

/// Step size in `[0, 1]` along a fixed direction.
///
/// `q` is the objective along the segment, `q_prime` and `q_second` its first
/// two derivatives. Newton-Raphson on `q_prime` starts at 0.5 and stops once
/// a step is below `nr_tol * sqrt(eps)`; the root is clamped to `[0, 1]`.
/// When Newton fails to decrease `q`, bisection on `q_prime` takes over. The
/// returned step never increases `q`.
pub fn nr_step_size(
    q: impl Fn(f64) -> f64,
    q_prime: impl Fn(f64) -> f64,
    q_second: impl Fn(f64) -> f64,
    nr_tol: f64,
) -> f64 {
    let d0 = q_prime(0.0);
    if !(d0 < 0.0) {
        return 0.0;
    }
    let q0 = q(0.0);
    let accept = |g: f64| g > 0.0 && q(g) <= q0;

    let d1 = q_prime(1.0);
    if d1 == d0 && q_second(NR_START) == 0.0 {
        return if accept(1.0) { 1.0 } else { 0.0 };
    }

    if let Some(g) = newton(&q_prime, &q_second, nr_tol) {
        if accept(g) {
            return g;
        }
    }
    let g = bisect(&q_prime, d1);
    if accept(g) {
        g
    } else {
        0.0
    }
}

fn newton(
    q_prime: &impl Fn(f64) -> f64,
    q_second: &impl Fn(f64) -> f64,
    nr_tol: f64,
) -> Option<f64> {
    let stop = nr_tol * f64::EPSILON.sqrt();
    let mut g = NR_START;
    for _ in 0..NR_MAX_STEPS {
        let h = q_second(g);
        if !(h > 0.0) || !h.is_finite() {
            return None;
        }
        let step = q_prime(g) / h;
        g -= step;
        if !g.is_finite() {
            return None;
        }
        if step.abs() < stop {
            return Some(g.clamp(0.0, 1.0));
        }
        if g > 1.0 && q_prime(1.0) <= 0.0 {
            return Some(1.0);
        }
        if g < 0.0 {
            return None;
        }
    }
    None
}

fn bisect(q_prime: &impl Fn(f64) -> f64, d1: f64) -> f64 {
    if d1 <= 0.0 {
        return 1.0;
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        if q_prime(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Central difference of `f` with step `h`.
pub(crate) fn central_difference(f: &impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (f(x + h) - f(x - h)) / (2.0 * h)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quadratic(c: f64) -> (impl Fn(f64) -> f64, impl Fn(f64) -> f64, impl Fn(f64) -> f64) {
        (
            move |g: f64| (g - c) * (g - c),
            move |g: f64| 2.0 * (g - c),
            |_: f64| 2.0,
        )
    }

    #[test]
    fn interior_minimum() {
        let (q, d, dd) = quadratic(0.3);
        assert!((nr_step_size(q, d, dd, 0.5) - 0.3).abs() < 1e-12);
    }

    #[test]
    fn clamped_above() {
        let (q, d, dd) = quadratic(1.7);
        assert_eq!(nr_step_size(q, d, dd, 0.5), 1.0);
    }

    #[test]
    fn increasing_linear_gives_zero() {
        assert_eq!(nr_step_size(|g| 2.0 * g, |_| 2.0, |_| 0.0, 0.5), 0.0);
    }

    #[test]
    fn decreasing_linear_gives_one() {
        assert_eq!(nr_step_size(|g| -2.0 * g, |_| -2.0, |_| 0.0, 0.5), 1.0);
    }

    #[test]
    fn concave_falls_back_to_bisection() {
        // q = -(g - 0.2)^2 + 0.04 has q'(0) = 0.4 > 0: no descent
        let g = nr_step_size(|g| -(g - 0.2f64).powi(2), |g| -2.0 * (g - 0.2), |_| -2.0, 0.5);
        assert_eq!(g, 0.0);
        // q = -g^2: descent everywhere, Newton has negative curvature
        let g = nr_step_size(|g| -g * g - g, |g| -2.0 * g - 1.0, |_| -2.0, 0.5);
        assert_eq!(g, 1.0);
    }

    #[test]
    fn kinked_derivative() {
        // |g - 0.6| smoothed only by bisection
        let q = |g: f64| (g - 0.6).abs();
        let d = |g: f64| if g < 0.6 { -1.0 } else { 1.0 };
        let g = nr_step_size(q, d, |_| 0.0, 0.5);
        assert!((g - 0.6).abs() < 1e-9);
    }
}
