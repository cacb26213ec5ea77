use std::f64::consts::PI;

use crate::error::{FracError, Result};

const LANCZOS_G: f64 = 607.0 / 128.0;

// Lanczos coefficients for g = 607/128.
#[allow(clippy::excessive_precision)]
const LANCZOS: [f64; 15] = [
    0.999_999_999_999_997_1,
    57.156_235_665_862_923_517,
    -59.597_960_355_475_491_248,
    14.136_097_974_741_747_174,
    -0.491_913_816_097_620_199_78,
    0.339_946_499_848_118_886_99e-4,
    0.465_236_289_270_485_756_65e-4,
    -0.983_744_753_048_795_646_77e-4,
    0.158_088_703_224_912_488_84e-3,
    -0.210_264_441_724_104_883_19e-3,
    0.217_439_618_115_212_643_20e-3,
    -0.164_318_106_536_763_890_22e-3,
    0.844_182_239_838_527_432_93e-4,
    -0.261_908_384_015_814_086_70e-4,
    0.368_991_826_595_316_227_04e-5,
];

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

fn is_pole(x: f64) -> bool {
    x <= 0.0 && x == x.floor()
}

/// `sin(pi x)` with exact zeros at the integers.
pub(crate) fn sin_pi(x: f64) -> f64 {
    let r = x.rem_euclid(2.0);
    if r == 0.0 || r == 1.0 {
        return 0.0;
    }
    if r < 0.5 {
        (PI * r).sin()
    } else if r < 1.5 {
        (PI * (1.0 - r)).sin()
    } else {
        (PI * (r - 2.0)).sin()
    }
}

fn lanczos_sum(z: f64) -> f64 {
    let mut a = LANCZOS[0];
    for (k, c) in LANCZOS.iter().enumerate().skip(1) {
        a += c / (z + k as f64);
    }
    a
}

/// Gamma for `x >= 0.5`.
fn gamma_right(x: f64) -> f64 {
    if x == x.floor() && x <= 30.0 {
        return (2..x as u64).fold(1.0, |acc, k| acc * k as f64);
    }
    let z = x - 1.0;
    let t = z + LANCZOS_G + 0.5;
    let half = t.powf(0.5 * (z + 0.5));
    (2.0 * PI).sqrt() * half * (-t).exp() * half * lanczos_sum(z)
}

/// The gamma function on the real line, poles excluded.
pub fn gamma_fn(x: f64) -> Result<f64> {
    if x.is_nan() || is_pole(x) {
        return Err(FracError::PoleError(x));
    }
    if x > 171.7 {
        return Ok(f64::INFINITY);
    }
    if x >= 0.5 {
        Ok(gamma_right(x))
    } else {
        Ok(PI / (sin_pi(x) * gamma_right(1.0 - x)))
    }
}

/// `ln |Gamma(x)|`.
pub fn ln_gamma(x: f64) -> Result<f64> {
    if x.is_nan() || is_pole(x) {
        return Err(FracError::PoleError(x));
    }
    if x < 0.5 {
        let s = sin_pi(x).abs();
        return Ok(PI.ln() - s.ln() - ln_gamma(1.0 - x)?);
    }
    if x < 30.0 {
        return Ok(gamma_right(x).ln());
    }
    let z = x - 1.0;
    let t = z + LANCZOS_G + 0.5;
    Ok(LN_SQRT_2PI + (z + 0.5) * t.ln() - t + lanczos_sum(z).ln())
}

/// `1 / Gamma(x)`, which is entire: zero at the poles of Gamma.
pub fn rgamma(x: f64) -> f64 {
    if is_pole(x) {
        return 0.0;
    }
    if x > 170.0 {
        return (-ln_gamma(x).expect("no pole on the positive axis")).exp();
    }
    if x < -170.0 {
        // reflection: 1/Gamma(x) = sin(pi x) Gamma(1 - x) / pi, which overflows
        // only when the answer itself does
        let lg = ln_gamma(1.0 - x).expect("1 - x is positive");
        return sin_pi(x) * (lg - PI.ln()).exp();
    }
    1.0 / gamma_fn(x).expect("poles handled above")
}
