//! Special functions behind the p-values.
//!
//! - `ln_gamma`: Lanczos approximation (g = 7, 9 terms), reflection below 1/2.
//! - regularized incomplete gamma: power series for `x < a + 1`, modified
//!   Lentz continued fraction otherwise.
//! - `erfc`: `Q(1/2, x^2)`, so the upper tail keeps full relative accuracy.
//! - regularized incomplete beta: Lentz continued fraction with the usual
//!   `x > (a + 1) / (a + b + 2)` symmetry switch.
//!
//! With `f64` all of these reach about 1e-13 relative error or better over
//! the ranges used here.

use crate::Real;

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

const MAX_ITER: usize = 10_000;

pub fn ln_gamma<F: Real>(x: F) -> F {
    let pi = F::lit(std::f64::consts::PI);
    if x < F::lit(0.5) {
        // Γ(x) Γ(1-x) = π / sin(πx)
        return (pi / (pi * x).sin().abs()).ln() - ln_gamma(F::one() - x);
    }
    let x = x - F::one();
    let mut acc = F::lit(LANCZOS[0]);
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        acc = acc + F::lit(c) / (x + F::from_count(i));
    }
    let t = x + F::lit(LANCZOS_G + 0.5);
    F::lit(0.5) * (F::lit(2.0) * pi).ln() + (x + F::lit(0.5)) * t.ln() - t + acc.ln()
}

pub fn ln_beta<F: Real>(a: F, b: F) -> F {
    ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
}

fn tiny<F: Real>() -> F {
    F::min_positive_value() / F::epsilon()
}

fn gamma_series<F: Real>(a: F, x: F) -> F {
    let mut ap = a;
    let mut del = F::one() / a;
    let mut sum = del;
    for _ in 0..MAX_ITER {
        ap = ap + F::one();
        del = del * x / ap;
        sum = sum + del;
        if del.abs() < sum.abs() * F::epsilon() {
            break;
        }
    }
    sum * (-x + a * x.ln() - ln_gamma(a)).exp()
}

fn gamma_cont_fraction<F: Real>(a: F, x: F) -> F {
    let two = F::lit(2.0);
    let mut b = x + F::one() - a;
    let mut c = F::one() / tiny::<F>();
    let mut d = F::one() / b;
    let mut h = d;
    for i in 1..MAX_ITER {
        let fi = F::from_count(i);
        let an = -fi * (fi - a);
        b = b + two;
        d = an * d + b;
        if d.abs() < tiny() {
            d = tiny();
        }
        c = b + an / c;
        if c.abs() < tiny() {
            c = tiny();
        }
        d = F::one() / d;
        let del = d * c;
        h = h * del;
        if (del - F::one()).abs() < F::epsilon() {
            break;
        }
    }
    (-x + a * x.ln() - ln_gamma(a)).exp() * h
}

/// Regularized lower incomplete gamma `P(a, x)`.
pub fn gamma_p<F: Real>(a: F, x: F) -> F {
    if x <= F::zero() {
        return F::zero();
    }
    if x < a + F::one() {
        gamma_series(a, x)
    } else {
        F::one() - gamma_cont_fraction(a, x)
    }
}

/// Regularized upper incomplete gamma `Q(a, x)`.
pub fn gamma_q<F: Real>(a: F, x: F) -> F {
    if x <= F::zero() {
        return F::one();
    }
    if x < a + F::one() {
        F::one() - gamma_series(a, x)
    } else {
        gamma_cont_fraction(a, x)
    }
}

pub fn erf<F: Real>(x: F) -> F {
    let half = F::lit(0.5);
    if x < F::zero() {
        -erf(-x)
    } else if x < F::lit(0.5) {
        gamma_p(half, x * x)
    } else {
        F::one() - gamma_q(half, x * x)
    }
}

pub fn erfc<F: Real>(x: F) -> F {
    let half = F::lit(0.5);
    if x < F::zero() {
        F::lit(2.0) - erfc(-x)
    } else if x < F::lit(0.5) {
        F::one() - gamma_p(half, x * x)
    } else {
        gamma_q(half, x * x)
    }
}

/// Standard normal upper tail `P(Z > z)`.
pub fn normal_sf<F: Real>(z: F) -> F {
    F::lit(0.5) * erfc(z / F::lit(std::f64::consts::SQRT_2))
}

pub fn normal_cdf<F: Real>(z: F) -> F {
    normal_sf(-z)
}

fn beta_cont_fraction<F: Real>(a: F, b: F, x: F) -> F {
    let one = F::one();
    let two = F::lit(2.0);
    let qab = a + b;
    let qap = a + one;
    let qam = a - one;
    let mut c = one;
    let mut d = one - qab * x / qap;
    if d.abs() < tiny() {
        d = tiny();
    }
    d = one / d;
    let mut h = d;
    for m in 1..MAX_ITER {
        let m = F::from_count(m);
        let m2 = two * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = one + aa * d;
        if d.abs() < tiny() {
            d = tiny();
        }
        c = one + aa / c;
        if c.abs() < tiny() {
            c = tiny();
        }
        d = one / d;
        h = h * d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = one + aa * d;
        if d.abs() < tiny() {
            d = tiny();
        }
        c = one + aa / c;
        if c.abs() < tiny() {
            c = tiny();
        }
        d = one / d;
        let del = d * c;
        h = h * del;
        if (del - one).abs() < F::epsilon() {
            break;
        }
    }
    h
}

/// Regularized incomplete beta `I_x(a, b)`.
pub fn inc_beta<F: Real>(a: F, b: F, x: F) -> F {
    if x <= F::zero() {
        return F::zero();
    }
    if x >= F::one() {
        return F::one();
    }
    let ln_front = a * x.ln() + b * (F::one() - x).ln() - ln_beta(a, b);
    let front = ln_front.exp();
    if x < (a + F::one()) / (a + b + F::lit(2.0)) {
        front * beta_cont_fraction(a, b, x) / a
    } else {
        F::one() - front * beta_cont_fraction(b, a, F::one() - x) / b
    }
}

/// Two-sided tail `P(|T| >= |t|)` of Student's t with `df` degrees of freedom.
pub fn student_t_two_sided<F: Real>(t: F, df: F) -> F {
    if !t.is_finite() {
        return F::zero();
    }
    let x = df / (df + t * t);
    inc_beta(df * F::lit(0.5), F::lit(0.5), x).min(F::one())
}
