//! Closed-form maps used as oracles.

use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lambda::Lambda;

/// Tent map of the non-overlapping regime `λ ≤ 1/2`.
pub fn exact_small_lambda_tent(lambda: Lambda, x: f64) -> Result<f64> {
    let l = lambda.get();
    if l > 0.5 {
        return Err(Error::param("lambda", format!("{l} > 1/2 has no closed-form tent map")));
    }
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::param("x", format!("{x} is outside [0, 1]")));
    }
    Ok(if x <= l {
        x / l
    } else if x < 1.0 - l {
        1.0
    } else {
        1.0 - (x - (1.0 - l)) / l
    })
}

const SQ_COEF: f64 = 0.75 * SQRT_2 + 1.0; // 3√2/4 + 1
const MID_SLOPE: f64 = 1.0 + FRAC_1_SQRT_2;
const QUARTER_SQRT2: f64 = SQRT_2 / 4.0;
/// Junctions of the three pieces of `F` at `λ = 1/√2`.
pub const SQRT2_KNOT_LO: f64 = 1.0 / (1.0 + SQRT_2);
pub const SQRT2_KNOT_HI: f64 = SQRT_2 / (1.0 + SQRT_2);

/// Distribution function of the Bernoulli convolution at `λ = 1/√2`.
pub fn exact_f_sqrt2(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x <= SQRT2_KNOT_LO {
        SQ_COEF * x * x
    } else if x <= SQRT2_KNOT_HI {
        MID_SLOPE * x - QUARTER_SQRT2
    } else if x < 1.0 {
        1.0 - SQ_COEF * (1.0 - x) * (1.0 - x)
    } else {
        1.0
    }
}

/// Inverse of [`exact_f_sqrt2`] on `[0, 1]`.
pub fn exact_f_sqrt2_inv(u: f64) -> f64 {
    let u = u.clamp(0.0, 1.0);
    if u <= QUARTER_SQRT2 {
        (u / SQ_COEF).sqrt()
    } else if u <= 1.0 - QUARTER_SQRT2 {
        (u + QUARTER_SQRT2) / MID_SLOPE
    } else {
        1.0 - ((1.0 - u) / SQ_COEF).sqrt()
    }
}

/// `F⁻¹(2F(x))` at `λ = 1/√2`, mirrored on `[1/2, 1]`.
pub fn exact_phi_sqrt2(x: f64) -> f64 {
    let x = if x > 0.5 { 1.0 - x } else { x };
    if x <= 1.0 - FRAC_1_SQRT_2 {
        // The linear piece, evaluated exactly as the envelope stores it.
        return x / FRAC_1_SQRT_2;
    }
    let u = 2.0 * exact_f_sqrt2(x);
    if x > SQRT2_KNOT_LO && u > 1.0 - QUARTER_SQRT2 {
        // On the middle piece 1 − 2F(x) = 2(1 + 1/√2)(1/2 − x) exactly, which
        // avoids cancelling 1 − u ahead of the square root.
        let tail = 2.0 * MID_SLOPE * (0.5 - x);
        return 1.0 - (tail / SQ_COEF).sqrt();
    }
    exact_f_sqrt2_inv(u)
}

/// The two parameter families with a closed-form tent map.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ExactMap {
    SmallLambdaTent { lambda: Lambda },
    Sqrt2,
}

impl ExactMap {
    pub fn small_lambda_tent(lambda: Lambda) -> Result<Self> {
        if lambda.get() > 0.5 {
            return Err(Error::param("lambda", format!("{lambda} > 1/2")));
        }
        Ok(ExactMap::SmallLambdaTent { lambda })
    }

    pub fn lambda(&self) -> Lambda {
        match *self {
            ExactMap::SmallLambdaTent { lambda } => lambda,
            ExactMap::Sqrt2 => Lambda::new(FRAC_1_SQRT_2).expect("1/√2 is in (0,1)"),
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            ExactMap::SmallLambdaTent { lambda } => {
                exact_small_lambda_tent(lambda, x.clamp(0.0, 1.0)).expect("validated at construction")
            }
            ExactMap::Sqrt2 => exact_phi_sqrt2(x),
        }
    }

    /// The point `b ∈ [0, 1/2]` with `φ(b) = p`.
    pub fn left_preimage(&self, p: f64) -> f64 {
        match *self {
            // On [0, λ] the small-λ map is x/λ; the plateau maps to 1.
            ExactMap::SmallLambdaTent { lambda } => p * lambda.get(),
            ExactMap::Sqrt2 => exact_f_sqrt2_inv(0.5 * exact_f_sqrt2(p)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_lambda_pieces() {
        let l = Lambda::new(0.4).unwrap();
        assert!((exact_small_lambda_tent(l, 0.2).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(exact_small_lambda_tent(l, 0.5).unwrap(), 1.0);
        assert!((exact_small_lambda_tent(l, 0.9).unwrap() - 0.25).abs() < 1e-12);
        assert!(exact_small_lambda_tent(Lambda::new(0.6).unwrap(), 0.2).is_err());
        assert!(ExactMap::small_lambda_tent(Lambda::new(0.6).unwrap()).is_err());
    }

    #[test]
    fn sqrt2_distribution() {
        assert!((exact_f_sqrt2(0.5) - 0.5).abs() < 1e-15);
        assert!((exact_f_sqrt2(SQRT2_KNOT_LO) - QUARTER_SQRT2).abs() < 1e-15);
        assert_eq!(exact_f_sqrt2(0.0), 0.0);
        assert_eq!(exact_f_sqrt2(1.0), 1.0);
        // Continuity at both knots.
        for k in [SQRT2_KNOT_LO, SQRT2_KNOT_HI] {
            assert!((exact_f_sqrt2(k - 1e-12) - exact_f_sqrt2(k + 1e-12)).abs() < 1e-10);
        }
        for i in 0..=100 {
            let x = i as f64 / 100.0;
            assert!((exact_f_sqrt2_inv(exact_f_sqrt2(x)) - x).abs() < 1e-12);
        }
    }

    #[test]
    fn sqrt2_map() {
        assert!((exact_phi_sqrt2(0.25) - SQRT_2 * 0.25).abs() < 1e-15);
        assert!((exact_phi_sqrt2(SQRT_2 - 1.0) - 0.622992).abs() < 1e-6);
        assert_eq!(exact_phi_sqrt2(0.5), 1.0);
        // The complement form agrees with direct inversion away from x = 1/2.
        for i in 0..=40 {
            let x = 0.42 + i as f64 * 0.001;
            assert!((exact_phi_sqrt2(x) - exact_f_sqrt2_inv(2.0 * exact_f_sqrt2(x))).abs() < 1e-9);
        }
        assert_eq!(exact_phi_sqrt2(0.0), 0.0);
        assert!((exact_phi_sqrt2(0.3) - exact_phi_sqrt2(0.7)).abs() < 1e-12);
        let b = ExactMap::Sqrt2.left_preimage(0.5);
        assert!((b - 0.348310).abs() < 1e-6);
    }
}
