//! Binomial and multinomial coefficients modulo a prime.

/// Base-`p` digits of `n`, least significant first. Empty for `n = 0`.
pub fn base_p_digits(mut n: u64, p: u64) -> Vec<u64> {
    let mut out = Vec::new();
    while n > 0 {
        out.push(n % p);
        n /= p;
    }
    out
}

// C(n, k) mod p for n, k < p, by the multiplicative formula.
fn small_binom(n: u64, k: u64, p: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let (mut num, mut den) = (1u64, 1u64);
    for i in 0..k {
        num = num * ((n - i) % p) % p;
        den = den * ((i + 1) % p) % p;
    }
    num * inv_mod(den, p) % p
}

fn inv_mod(a: u64, p: u64) -> u64 {
    let (mut acc, mut b, mut e) = (1u64, a % p, p - 2);
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * b % p;
        }
        b = b * b % p;
        e >>= 1;
    }
    acc
}

/// `C(l, k) mod p` by Lucas' theorem. Zero when `k > l`.
pub fn binom_mod_p(l: u64, k: u64, p: u64) -> u64 {
    if k > l {
        return 0;
    }
    let (mut l, mut k) = (l, k);
    let mut acc = 1u64;
    while k > 0 {
        let (ld, kd) = (l % p, k % p);
        if kd > ld {
            return 0;
        }
        acc = acc * small_binom(ld, kd, p) % p;
        l /= p;
        k /= p;
    }
    acc
}

/// `j! / prod_m ((p^m)!)^{c_m} mod p`, where `j = sum_m c_m p^m` in base `p`.
///
/// The quotient is prime to `p` (Legendre), so the result is never zero. It is
/// the scalar in `D_{p^0}^{c_0} ... D_{p^m}^{c_m} = unit * D_j`.
pub fn multinomial_unit(j: u64, p: u64) -> u64 {
    // Peel off blocks of size p^m one at a time: the multinomial is the product
    // of C(remaining, block) over all blocks.
    let mut remaining = j;
    let mut acc = 1u64;
    let mut place = 1u64;
    for d in base_p_digits(j, p) {
        for _ in 0..d {
            acc = acc * binom_mod_p(remaining, place, p) % p;
            remaining -= place;
        }
        place *= p;
    }
    acc
}
