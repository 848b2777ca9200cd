//! Gradient kernels for cohesion, alignment, navigation, and the separation
//! constraint gate.
//!
//! All kernels are pure functions of their arguments. Vector kernels return the
//! gradient of the corresponding potential; the engine applies the negated sum
//! as the agent's acceleration.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::model::{AgentState, ReferenceState, Vec2};

/// Below this separation two agents are treated as coincident.
pub const S_FLOOR: f64 = 1e-6;

/// Scalar coefficient of the unit vector `x_hat_ij` in the Lennard-Jones gradient.
///
/// Negative inside the desired separation (push apart), positive outside
/// (pull together), exactly zero at `s == d`.
#[inline]
pub fn cohesion_coefficient(s: f64, d: f64, k_c: f64) -> f64 {
    let s7 = s.powi(7);
    let s13 = s7 * s.powi(6);
    -6.0 * k_c * d.powi(6) / s13 + 6.0 * k_c / s7
}

/// Gradient of the cohesion potential of agent `i` with respect to its own
/// position, for the pair (i, j) with desired separation `d`.
pub fn cohesion_gradient(x_i: Vec2, x_j: Vec2, d: f64, k_c: f64) -> Result<Vec2> {
    let diff = x_i - x_j;
    let s = diff.norm();
    if s.is_nan() || s < S_FLOOR {
        return Err(Error::Coincident { separation: s });
    }
    let coeff = cohesion_coefficient(s, d, k_c);
    Ok(diff * (coeff / s))
}

/// Smooth kernel equal to 1 below `beta` and rolling off to 0 at 1.
pub fn rho_beta(alpha: f64, beta: f64) -> f64 {
    if alpha <= beta {
        // alpha == beta takes the limit of the cosine branch
        1.0
    } else if alpha <= 1.0 {
        0.5 * (1.0 + (PI * (alpha - beta) / (1.0 - beta)).cos())
    } else {
        0.0
    }
}

/// Range-scaled separation, `eps * |x_j - x_i| / (sqrt(1 + r^2) - 1)`.
#[inline]
pub fn epsilon_norm(x_i: Vec2, x_j: Vec2, r: f64, epsilon: f64) -> f64 {
    epsilon * (x_j - x_i).norm() / ((1.0 + r * r).sqrt() - 1.0)
}

/// Gradient of the alignment potential with respect to `v_i`.
pub fn alignment_gradient<'a, I>(
    agent: &AgentState,
    neighbours: I,
    r: f64,
    epsilon: f64,
    beta: f64,
    k_a: f64,
) -> Vec2
where
    I: IntoIterator<Item = &'a AgentState>,
{
    let mut acc = Vec2::ZERO;
    for other in neighbours {
        let w = rho_beta(
            epsilon_norm(agent.position, other.position, r, epsilon),
            beta,
        );
        acc += (agent.velocity - other.velocity) * w;
    }
    acc * k_a
}

/// Pinning navigation gradient; zero for unpinned agents.
pub fn navigation_gradient(
    agent: &AgentState,
    reference: &ReferenceState,
    pinned: bool,
    k_nx: f64,
    k_nv: f64,
) -> Vec2 {
    if !pinned {
        return Vec2::ZERO;
    }
    (agent.position - reference.x_r) * k_nx + (agent.velocity - reference.v_r) * k_nv
}

/// Normalised offset of `d_est` from the centre of `[d_min, d_max]`, in [-1, 1] on the interval.
#[inline]
pub fn bump_lambda(d_est: f64, d_min: f64, d_max: f64) -> f64 {
    2.0 * (d_est - 0.5 * (d_min + d_max)) / (d_max - d_min)
}

/// Compactly supported gate, 1 at the interval centre and exactly 0 outside
/// the open interval `(d_min, d_max)`. `p` controls how flat the top is.
pub fn bump(d_est: f64, d_min: f64, d_max: f64, p: f64) -> f64 {
    if !(d_min < d_est && d_est < d_max) {
        return 0.0;
    }
    let l2 = bump_lambda(d_est, d_min, d_max).powi(2);
    if l2 >= 1.0 {
        return 0.0;
    }
    (-(l2 / (1.0 - l2)).powf(p)).exp()
}

/// Derivative of [`bump`] with respect to `d_est`.
pub fn bump_gradient(d_est: f64, d_min: f64, d_max: f64, p: f64) -> f64 {
    let gate = bump(d_est, d_min, d_max, p);
    if gate == 0.0 {
        return 0.0;
    }
    let lambda = bump_lambda(d_est, d_min, d_max);
    let l2 = lambda * lambda;
    let one_minus = 1.0 - l2;
    gate * (-4.0 * lambda * p * (l2 / one_minus).powf(p - 1.0))
        / (one_minus * one_minus * (d_max - d_min))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn v(x: f64, y: f64) -> Vec2 {
        Vec2::xy(x, y)
    }

    // Independent oracle: potential whose derivative is the cohesion coefficient.
    fn lj_potential(s: f64, d: f64, k_c: f64) -> f64 {
        k_c * d.powi(6) / (2.0 * s.powi(12)) - k_c / s.powi(6)
    }

    #[test]
    fn cohesion_zero_at_equilibrium() {
        let g = cohesion_gradient(v(0.0, 0.0), v(10.0, 0.0), 10.0, 1e5).unwrap();
        assert_eq!(g, Vec2::ZERO);
    }

    #[test]
    fn cohesion_frozen_values() {
        // mpmath, 30 digits
        let g = cohesion_gradient(v(0.0, 0.0), v(11.0, 0.0), 10.0, 1e5).unwrap();
        assert_relative_eq!(g.x, -0.013_409_624_309_641_124, max_relative = 1e-12);
        assert_eq!(g.y, 0.0);
        let g = cohesion_gradient(v(0.0, 0.0), v(9.0, 0.0), 10.0, 1e5).unwrap();
        assert_relative_eq!(g.x, 0.110_601_982_554_215_27, max_relative = 1e-12);
    }

    #[test]
    fn cohesion_matches_finite_difference_of_potential() {
        let (d, k) = (10.0, 1e5);
        let h = 1e-5;
        for step in 0..=800 {
            let s = d * (0.7 + step as f64 * 1e-3);
            let fd = (lj_potential(s + h, d, k) - lj_potential(s - h, d, k)) / (2.0 * h);
            let c = cohesion_coefficient(s, d, k);
            // absolute floor covers round-off where c crosses zero
            assert!(
                (c - fd).abs() <= 1e-4 * c.abs() + 1e-10,
                "s={s} c={c} fd={fd}"
            );
        }
    }

    #[test]
    fn cohesion_coincident_is_error() {
        assert!(matches!(
            cohesion_gradient(v(1.0, 1.0), v(1.0, 1.0), 10.0, 1e5),
            Err(Error::Coincident { .. })
        ));
    }

    #[test]
    fn rho_examples() {
        assert_eq!(rho_beta(0.3, 0.5), 1.0);
        assert_relative_eq!(rho_beta(0.75, 0.5), 0.5, epsilon = 1e-15);
        assert_eq!(rho_beta(1.2, 0.5), 0.0);
        assert_eq!(rho_beta(0.5, 0.5), 1.0);
        assert_eq!(rho_beta(1.0, 1.0), 1.0);
    }

    #[test]
    fn epsilon_norm_examples() {
        let r = 13.0;
        let eps = crate::model::default_epsilon(r);
        assert_eq!(epsilon_norm(v(2.0, 3.0), v(2.0, 3.0), r, eps), 0.0);
        assert_relative_eq!(
            epsilon_norm(v(0.0, 0.0), v(13.0, 0.0), r, eps),
            1.0,
            epsilon = 1e-14
        );
        assert_relative_eq!(
            epsilon_norm(v(0.0, 0.0), v(0.0, 6.5), r, eps),
            0.5,
            epsilon = 1e-14
        );
    }

    #[test]
    fn alignment_examples() {
        let r = 13.0;
        let eps = crate::model::default_epsilon(r);
        let me = AgentState::new(v(0.0, 0.0), v(1.0, 2.0)).unwrap();
        let same = [
            AgentState::new(v(3.0, 0.0), v(1.0, 2.0)).unwrap(),
            AgentState::new(v(0.0, 5.0), v(1.0, 2.0)).unwrap(),
        ];
        assert_eq!(alignment_gradient(&me, &same, r, eps, 0.8, 1.0), Vec2::ZERO);

        // ε-norm 0.3 is below beta
        let me = AgentState::new(v(0.0, 0.0), v(1.0, 0.0)).unwrap();
        let near = [AgentState::at_rest(v(0.3 * r, 0.0))];
        assert_eq!(
            alignment_gradient(&me, &near, r, eps, 0.5, 1.0),
            v(1.0, 0.0)
        );

        // ε-norm 0.75 with beta 0.5 gives weight 0.5
        let me = AgentState::new(v(0.0, 0.0), v(2.0, 0.0)).unwrap();
        let mid = [AgentState::at_rest(v(0.75 * r, 0.0))];
        let g = alignment_gradient(&me, &mid, r, eps, 0.5, 1.0);
        assert_relative_eq!(g.x, 1.0, epsilon = 1e-12);
        assert_eq!(g.y, 0.0);
    }

    #[test]
    fn navigation_examples() {
        let reference = ReferenceState::default();
        let a = AgentState::new(v(1.0, 0.0), v(0.0, 1.0)).unwrap();
        assert_eq!(
            navigation_gradient(&a, &reference, false, 2.0, 4.5),
            Vec2::ZERO
        );
        assert_eq!(
            navigation_gradient(&a, &reference, true, 2.0, 4.5),
            v(2.0, 4.5)
        );
        let reference = ReferenceState {
            x_r: v(3.0, -1.0),
            v_r: v(0.5, 0.5),
        };
        let at_ref = AgentState::new(reference.x_r, reference.v_r).unwrap();
        assert_eq!(
            navigation_gradient(&at_ref, &reference, true, 2.0, 4.5),
            Vec2::ZERO
        );
    }

    #[test]
    fn bump_examples() {
        assert_eq!(bump(10.0, 5.0, 15.0, 4.0), 1.0);
        assert_eq!(bump(15.0, 5.0, 15.0, 4.0), 0.0);
        assert_eq!(bump(5.0, 5.0, 15.0, 4.0), 0.0);
        assert_eq!(bump(4.0, 5.0, 15.0, 4.0), 0.0);
        // mpmath: exp(-(1/3)^4)
        assert_relative_eq!(
            bump(12.5, 5.0, 15.0, 4.0),
            0.987_730_216_235_610_5,
            max_relative = 1e-12
        );
    }

    #[test]
    fn bump_gradient_examples() {
        assert_eq!(bump_gradient(10.0, 5.0, 15.0, 4.0), 0.0);
        assert_eq!(bump_gradient(16.0, 5.0, 15.0, 4.0), 0.0);
        assert_relative_eq!(
            bump_gradient(12.5, 5.0, 15.0, 4.0),
            -0.052_028_587_521_875_78,
            max_relative = 1e-10
        );
        let h = 1e-6;
        let fd = (bump(12.5 + h, 5.0, 15.0, 4.0) - bump(12.5 - h, 5.0, 15.0, 4.0)) / (2.0 * h);
        assert!((bump_gradient(12.5, 5.0, 15.0, 4.0) - fd).abs() < 1e-6);
    }

    proptest! {
        #[test]
        fn cohesion_sign_flips_at_d(d in 1.0f64..20.0, k in 1.0f64..1e6, ratio in 0.5f64..2.0) {
            let s = ratio * d;
            let c = cohesion_coefficient(s, d, k);
            if s < d {
                prop_assert!(c < 0.0);
            } else if s > d {
                prop_assert!(c > 0.0);
            }
        }

        #[test]
        fn cohesion_is_along_separation(
            xi in (-50.0f64..50.0, -50.0f64..50.0),
            xj in (-50.0f64..50.0, -50.0f64..50.0),
            d in 2.0f64..13.0,
        ) {
            let (a, b) = (v(xi.0, xi.1), v(xj.0, xj.1));
            prop_assume!(a.distance(b) > 0.5);
            let g = cohesion_gradient(a, b, d, 1e5).unwrap();
            let diff = a - b;
            let cross = g.x * diff.y - g.y * diff.x;
            prop_assert!(cross.abs() <= 1e-9 * g.norm() * diff.norm() + 1e-300);
            // antisymmetric in the pair
            let h = cohesion_gradient(b, a, d, 1e5).unwrap();
            prop_assert_eq!(g, -h);
        }

        #[test]
        fn rho_bounded_and_monotone(beta in 0.0f64..1.0, a in 0.0f64..2.0, da in 0.0f64..0.5) {
            let r0 = rho_beta(a, beta);
            let r1 = rho_beta(a + da, beta);
            prop_assert!((0.0..=1.0).contains(&r0));
            prop_assert!(r1 <= r0 + 1e-15);
        }

        #[test]
        fn bump_bounded_and_symmetric(
            lo in 1.0f64..8.0, width in 0.5f64..8.0, t in -0.2f64..1.2, p in 1.01f64..8.0,
        ) {
            let hi = lo + width;
            let x = lo + t * width;
            let b = bump(x, lo, hi, p);
            prop_assert!((0.0..=1.0).contains(&b));
            if x <= lo || x >= hi {
                prop_assert_eq!(b, 0.0);
            }
            let mid = 0.5 * (lo + hi);
            let delta = (x - mid).abs();
            let up = bump_gradient(mid + delta, lo, hi, p);
            let down = bump_gradient(mid - delta, lo, hi, p);
            prop_assert!((up + down).abs() <= 1e-12 * up.abs().max(1.0));
        }

        #[test]
        fn kernels_are_pure(s in 0.5f64..30.0, d in 1.0f64..13.0, x in 0.0f64..20.0) {
            let a = cohesion_coefficient(s, d, 1e5);
            let b = cohesion_coefficient(s, d, 1e5);
            prop_assert_eq!(a.to_bits(), b.to_bits());
            prop_assert_eq!(bump(x, 5.0, 15.0, 4.0).to_bits(), bump(x, 5.0, 15.0, 4.0).to_bits());
        }
    }
}
