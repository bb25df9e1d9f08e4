//! Slow reference Bessel values from power series in 400-bit fixed point.
//!
//! Every series here is summed exactly enough that cancellation between
//! exponentially large terms (I against K, large-x J) cannot reach f64
//! precision. Transcendental constants are rebuilt from scratch.

#![allow(dead_code)]

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

const BITS: u32 = 400;

#[derive(Clone, Debug)]
pub struct Fx(BigInt);

fn one() -> BigInt {
    BigInt::one() << BITS
}

impl Fx {
    pub fn from_f64(x: f64) -> Fx {
        if x == 0.0 {
            return Fx(BigInt::zero());
        }
        let bits = x.abs().to_bits();
        let exp = ((bits >> 52) & 0x7ff) as i64;
        let mant = if exp == 0 { (bits & ((1 << 52) - 1)) << 1 } else { (bits & ((1 << 52) - 1)) | (1 << 52) };
        let e = exp - 1075 + BITS as i64;
        let mut v = BigInt::from(mant);
        v = if e >= 0 { v << (e as u32) } else { v >> ((-e) as u32) };
        Fx(if x < 0.0 { -v } else { v })
    }

    pub fn int(n: i64) -> Fx {
        Fx(BigInt::from(n) << BITS)
    }

    pub fn ratio(p: i64, q: i64) -> Fx {
        Fx((BigInt::from(p) << BITS) / BigInt::from(q))
    }

    pub fn to_f64(&self) -> f64 {
        let bits = self.0.bits() as i64;
        if bits == 0 {
            return 0.0;
        }
        let shift = bits - 64;
        let top = if shift > 0 { &self.0 >> (shift as u32) } else { self.0.clone() << ((-shift) as u32) };
        top.to_f64().unwrap() * 2f64.powi((shift - BITS as i64) as i32)
    }

    pub fn add(&self, o: &Fx) -> Fx {
        Fx(&self.0 + &o.0)
    }

    pub fn sub(&self, o: &Fx) -> Fx {
        Fx(&self.0 - &o.0)
    }

    pub fn mul(&self, o: &Fx) -> Fx {
        Fx((&self.0 * &o.0) >> BITS)
    }

    pub fn div(&self, o: &Fx) -> Fx {
        Fx((&self.0 << BITS) / &o.0)
    }

    pub fn div_int(&self, n: i64) -> Fx {
        Fx(&self.0 / BigInt::from(n))
    }

    pub fn mul_int(&self, n: i64) -> Fx {
        Fx(&self.0 * BigInt::from(n))
    }

    pub fn neg(&self) -> Fx {
        Fx(-&self.0)
    }

    pub fn is_negligible(&self) -> bool {
        self.0.abs() < BigInt::from(16)
    }
}

fn atanh_inv(q: i64) -> Fx {
    // atanh(1/q)
    let mut power = Fx::ratio(1, q);
    let q2 = q * q;
    let mut sum = power.clone();
    let mut k = 1;
    loop {
        power = power.div_int(q2);
        let t = power.div_int(2 * k + 1);
        if t.is_negligible() {
            break;
        }
        sum = sum.add(&t);
        k += 1;
    }
    sum
}

fn atan_inv(q: i64) -> Fx {
    let mut power = Fx::ratio(1, q);
    let q2 = q * q;
    let mut sum = power.clone();
    let mut k = 1;
    loop {
        power = power.div_int(q2).neg();
        let t = power.div_int(2 * k + 1);
        if t.is_negligible() {
            break;
        }
        sum = sum.add(&t);
        k += 1;
    }
    sum
}

pub fn pi() -> Fx {
    atan_inv(5).mul_int(16).sub(&atan_inv(239).mul_int(4))
}

pub fn ln2() -> Fx {
    atanh_inv(3).mul_int(2)
}

/// Natural log of a positive fixed-point value.
pub fn ln(y: &Fx) -> Fx {
    let mut e: i64 = y.0.bits() as i64 - 1 - BITS as i64;
    let mut m = if e >= 0 { Fx(&y.0 >> (e as u32)) } else { Fx(&y.0 << ((-e) as u32)) };
    // m in [1, 2); move to [sqrt(1/2), sqrt(2)) for faster convergence.
    if m.to_f64() > std::f64::consts::SQRT_2 {
        m = Fx(&m.0 >> 1u32);
        e += 1;
    }
    let z = m.sub(&Fx::int(1)).div(&m.add(&Fx::int(1)));
    let z2 = z.mul(&z);
    let mut power = z.clone();
    let mut sum = z.clone();
    let mut k = 1;
    loop {
        power = power.mul(&z2);
        let t = power.div_int(2 * k + 1);
        if t.is_negligible() {
            break;
        }
        sum = sum.add(&t);
        k += 1;
    }
    sum.mul_int(2).add(&ln2().mul_int(e))
}

/// Euler's constant by Euler-Maclaurin summation of the harmonic series.
pub fn euler_gamma() -> Fx {
    let n: i64 = 1000;
    let mut h = Fx(BigInt::zero());
    for k in 1..=n {
        h = h.add(&Fx::ratio(1, k));
    }
    let mut g = h.sub(&ln(&Fx::int(n))).sub(&Fx::ratio(1, 2 * n));
    // B_2k / (2k n^2k)
    let bern: [(i64, i64); 7] = [(1, 6), (-1, 30), (1, 42), (-1, 30), (5, 66), (-691, 2730), (7, 6)];
    let mut npow = Fx::int(1);
    for (i, (p, q)) in bern.iter().enumerate() {
        let two_k = 2 * (i as i64 + 1);
        npow = npow.div_int(n * n);
        g = g.add(&npow.mul_int(*p).div_int(q * two_k));
    }
    g
}

pub struct Constants {
    pub pi: Fx,
    pub gamma: Fx,
}

impl Constants {
    pub fn new() -> Self {
        Constants { pi: pi(), gamma: euler_gamma() }
    }
}

/// sum_k sign^k (x^2/4)^k / (k! (k+m)!) times (x/2)^m / m!, together with
/// the weighted sums sum c_k t_k where c_k = H_k + H_{k+m}.
fn integer_series(x: &Fx, m: i64, sign: i64) -> (Fx, Fx) {
    let q = x.mul(x).div_int(4);
    let half = x.div_int(2);
    let mut t = Fx::int(1);
    for j in 1..=m {
        t = t.mul(&half).div_int(j);
    }
    let mut sum = t.clone();
    let mut hk = Fx(BigInt::zero());
    let mut hkm = Fx(BigInt::zero());
    for j in 1..=m {
        hkm = hkm.add(&Fx::ratio(1, j));
    }
    let mut weighted = t.mul(&hk.add(&hkm));
    let mut k = 1;
    loop {
        t = t.mul(&q).div_int(k * (k + m));
        if sign < 0 {
            t = t.neg();
        }
        hk = hk.add(&Fx::ratio(1, k));
        hkm = hkm.add(&Fx::ratio(1, k + m));
        sum = sum.add(&t);
        weighted = weighted.add(&t.mul(&hk.add(&hkm)));
        if t.is_negligible() && k > 4 {
            break;
        }
        k += 1;
    }
    (sum, weighted)
}

/// sum_k sign^k (x^2/4)^k / (k! prod_{j=1..k} (j + nu)) for nu = m + 1/2,
/// using the ratio 2/(k(2k + 2m + 1)).
fn half_series(x: &Fx, m: i64, sign: i64) -> Fx {
    let q = x.mul(x).div_int(4);
    let mut t = Fx::int(1);
    let mut sum = t.clone();
    let mut k = 1;
    loop {
        t = t.mul(&q).mul_int(2).div_int(k * (2 * k + 2 * m + 1));
        if sign < 0 {
            t = t.neg();
        }
        sum = sum.add(&t);
        if t.is_negligible() && k > 4 {
            break;
        }
        k += 1;
    }
    sum
}

pub fn j_int(m: i64, x: f64) -> f64 {
    integer_series(&Fx::from_f64(x), m, -1).0.to_f64()
}

pub fn i_int(m: i64, x: f64) -> f64 {
    integer_series(&Fx::from_f64(x), m, 1).0.to_f64()
}

pub fn y0(c: &Constants, x: f64) -> f64 {
    let fx = Fx::from_f64(x);
    let (j, w) = integer_series(&fx, 0, -1);
    // (2/pi) [ (ln(x/2) + gamma) J0 - sum H_k t_k ]; the weighted sum uses 2 H_k for m = 0.
    let l = ln(&fx.div_int(2)).add(&c.gamma);
    let w = w.div_int(2);
    l.mul(&j).sub(&w).mul_int(2).div(&c.pi).to_f64()
}

pub fn y1(c: &Constants, x: f64) -> f64 {
    let fx = Fx::from_f64(x);
    let (j, w) = integer_series(&fx, 1, -1);
    let l = ln(&fx.div_int(2)).add(&c.gamma);
    let a = Fx::int(2).div(&c.pi.mul(&fx)).neg();
    let b = l.mul(&j).mul_int(2).div(&c.pi);
    let d = w.div(&c.pi);
    a.add(&b).sub(&d).to_f64()
}

pub fn k0(c: &Constants, x: f64) -> f64 {
    let fx = Fx::from_f64(x);
    let (i, w) = integer_series(&fx, 0, 1);
    let l = ln(&fx.div_int(2)).add(&c.gamma);
    w.div_int(2).sub(&l.mul(&i)).to_f64()
}

pub fn k1(c: &Constants, x: f64) -> f64 {
    let fx = Fx::from_f64(x);
    let (i, w) = integer_series(&fx, 1, 1);
    let l = ln(&fx.div_int(2)).add(&c.gamma);
    Fx::int(1).div(&fx).add(&l.mul(&i)).sub(&w.div_int(2)).to_f64()
}

/// Half orders nu = m + 1/2 with m in {-2, -1, 0, 1}:
/// Z_nu(x) = (x/2)^nu / Gamma(nu + 1) * S, with the prefactor in f64.
fn gamma_half(m: i64) -> f64 {
    // Gamma(m + 3/2)
    let sp = std::f64::consts::PI.sqrt();
    match m {
        -2 => -2.0 * sp,
        -1 => sp,
        0 => sp / 2.0,
        1 => 3.0 * sp / 4.0,
        _ => unreachable!(),
    }
}

pub fn j_half(m: i64, x: f64) -> f64 {
    let nu = m as f64 + 0.5;
    let s = half_series(&Fx::from_f64(x), m, -1).to_f64();
    (x / 2.0).powf(nu) / gamma_half(m) * s
}

pub fn i_half(m: i64, x: f64) -> f64 {
    let nu = m as f64 + 0.5;
    let s = half_series(&Fx::from_f64(x), m, 1).to_f64();
    (x / 2.0).powf(nu) / gamma_half(m) * s
}

/// Y_{1/2} = -J_{-1/2}, Y_{3/2} = J_{-3/2}.
pub fn y_half(m: i64, x: f64) -> f64 {
    match m {
        0 => -j_half(-1, x),
        1 => j_half(-2, x),
        _ => unreachable!(),
    }
}

/// K_nu = (pi/2)(I_{-nu} - I_nu)/sin(nu pi), with the subtraction done in
/// fixed point after pulling out the common factor (x/2)^{-3/2}/sqrt(pi).
pub fn k_half(c: &Constants, m: i64, x: f64) -> f64 {
    let fx = Fx::from_f64(x);
    let half = fx.div_int(2);
    // c_nu = (x/2)^{nu + 3/2} sqrt(pi)/Gamma(nu + 1), rational times a power.
    let coef = |mm: i64| -> Fx {
        let mut p = Fx::int(1);
        for _ in 0..(mm + 2) {
            p = p.mul(&half);
        }
        match mm {
            -2 => p.neg().div_int(2),
            -1 => p,
            0 => p.mul_int(2),
            1 => p.mul_int(4).div_int(3),
            _ => unreachable!(),
        }
    };
    let (neg, pos) = (-m - 1, m);
    let i_neg = coef(neg).mul(&half_series(&fx, neg, 1));
    let i_pos = coef(pos).mul(&half_series(&fx, pos, 1));
    let diff = i_neg.sub(&i_pos).to_f64();
    let sin = if m == 0 { 1.0 } else { -1.0 };
    let _ = c;
    std::f64::consts::FRAC_PI_2 * diff / sin * (x / 2.0).powf(-1.5) / std::f64::consts::PI.sqrt()
}

/// Root of a sign-changing function by bisection to the last bit.
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> f64 {
    let flo = f(lo);
    assert!(flo * f(hi) < 0.0, "no sign change on [{lo}, {hi}]");
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return mid;
        }
        if f(mid) * flo > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
}

/// First positive zero of J0.
pub fn j0_first_zero() -> f64 {
    bisect(|x| j_int(0, x), 2.0, 3.0)
}

/// First positive zero of J1' = J0 - J1/x.
pub fn j1_prime_first_zero() -> f64 {
    bisect(|x| j_int(0, x) - j_int(1, x) / x, 1.5, 2.2)
}
