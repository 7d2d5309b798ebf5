//! Bessel functions of the first kind, orders zero and one.
//!
//! Miller backward recurrence below `ASYMPTOTIC_LIMIT`, Hankel asymptotic
//! expansion above it.
//! Absolute error is below 1e-12 on [0, 50] in `f64`.

use crate::scalar::Real;

/// First positive zero of `J0`.
pub const J0_FIRST_ZERO: f64 = 2.404_825_557_695_773;

/// First positive zero of `J1`.
pub const J1_FIRST_ZERO: f64 = 3.831_705_970_207_512;

const ASYMPTOTIC_LIMIT: f64 = 30.0;

pub fn j0<T: Real>(x: T) -> T {
    T::lit(j0_f64(x.as_f64()))
}

pub fn j1<T: Real>(x: T) -> T {
    T::lit(j1_f64(x.as_f64()))
}

pub fn j0_f64(x: f64) -> f64 {
    let x = x.abs();
    if x < ASYMPTOTIC_LIMIT {
        miller(x).0
    } else {
        hankel(0, x)
    }
}

pub fn j1_f64(x: f64) -> f64 {
    let sign = x.signum();
    let x = x.abs();
    sign * if x < ASYMPTOTIC_LIMIT { miller(x).1 } else { hankel(1, x) }
}

/// `(J0(x), J1(x))` by downward recurrence `J_{k-1} = (2k/x) J_k - J_{k+1}`,
/// normalized with `J0 + 2 sum J_{2k} = 1`.
fn miller(x: f64) -> (f64, f64) {
    if x == 0.0 {
        return (1.0, 0.0);
    }
    let start = 2 * ((x + 20.0 + (50.0 * x).sqrt()) as usize / 2 + 1);
    let (mut next, mut cur) = (0.0f64, 1e-30f64);
    let (mut j0, mut j1) = (0.0, 0.0);
    let mut norm = 0.0;
    for k in (1..=start).rev() {
        let prev = 2.0 * k as f64 / x * cur - next;
        next = cur;
        cur = prev;
        if next.abs() > 1e250 {
            next *= 1e-250;
            cur *= 1e-250;
            norm *= 1e-250;
            j1 *= 1e-250;
        }
        // `cur` now holds J_{k-1}.
        if (k - 1) % 2 == 0 && k > 1 {
            norm += 2.0 * cur;
        }
        if k == 1 {
            j0 = cur;
            j1 = next;
        }
    }
    norm += j0;
    (j0 / norm, j1 / norm)
}

/// `J_n(x) ~ sqrt(2/(pi x)) (P cos(chi) - Q sin(chi))`, `chi = x - (n/2 + 1/4) pi`.
fn hankel(order: u32, x: f64) -> f64 {
    let mu = 4.0 * (order * order) as f64;
    let mut p = 1.0;
    let mut q = 0.0;
    // a_k = prod_{j=1..k} (mu - (2j-1)^2) / (k! 8^k x^k)
    let mut a = 1.0;
    let mut prev = f64::INFINITY;
    for k in 1..60 {
        let odd = (2 * k - 1) as f64;
        a *= (mu - odd * odd) / (k as f64 * 8.0 * x);
        if a.abs() >= prev {
            break;
        }
        prev = a.abs();
        match k % 4 {
            1 => q += a,
            2 => p -= a,
            3 => q -= a,
            _ => p += a,
        }
        if a.abs() < 1e-17 {
            break;
        }
    }
    let chi = x - (0.5 * order as f64 + 0.25) * std::f64::consts::PI;
    (2.0 / (std::f64::consts::PI * x)).sqrt() * (p * chi.cos() - q * chi.sin())
}
