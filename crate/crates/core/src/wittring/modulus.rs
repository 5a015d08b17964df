//! Polynomial helpers over `Z/NZ` and the deterministic choice of field moduli.
//!
//! Polynomials are coefficient vectors, lowest degree first.

pub(crate) fn mulmod(a: u64, b: u64, n: u64) -> u64 {
    ((a as u128 * b as u128) % n as u128) as u64
}

pub(crate) fn addmod(a: u64, b: u64, n: u64) -> u64 {
    let s = a as u128 + b as u128;
    (s % n as u128) as u64
}

pub(crate) fn submod(a: u64, b: u64, n: u64) -> u64 {
    if a >= b {
        a - b
    } else {
        n - (b - a)
    }
}

pub(crate) fn powmod(mut base: u64, mut exp: u64, n: u64) -> u64 {
    let mut acc = 1 % n;
    base %= n;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mulmod(acc, base, n);
        }
        base = mulmod(base, base, n);
        exp >>= 1;
    }
    acc
}

pub(crate) fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut i = 2u64;
    while i.saturating_mul(i) <= p {
        if p % i == 0 {
            return false;
        }
        i += 1;
    }
    true
}

/// Distinct prime factors by trial division.
pub(crate) fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut f = 2u64;
    while f.saturating_mul(f) <= n {
        if n % f == 0 {
            out.push(f);
            while n % f == 0 {
                n /= f;
            }
        }
        f += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

fn trim(v: &mut Vec<u64>) {
    while v.len() > 1 && *v.last().unwrap() == 0 {
        v.pop();
    }
    if v.is_empty() {
        v.push(0);
    }
}

fn degree(v: &[u64]) -> Option<usize> {
    v.iter().rposition(|&c| c != 0)
}

/// Reduce `a` modulo the monic polynomial `f` over `Z/nZ`.
pub(crate) fn reduce_monic(a: &mut Vec<u64>, f: &[u64], n: u64) {
    let d = f.len() - 1;
    if a.len() <= d {
        a.resize(d, 0);
        return;
    }
    for i in (d..a.len()).rev() {
        let c = a[i];
        if c == 0 {
            continue;
        }
        a[i] = 0;
        for j in 0..d {
            let t = mulmod(c, f[j] % n, n);
            a[i - d + j] = submod(a[i - d + j], t, n);
        }
    }
    a.truncate(d);
}

/// Product of two reduced residues in `(Z/nZ)[X]/(f)`, `f` monic.
pub(crate) fn mul_mod_poly(a: &[u64], b: &[u64], f: &[u64], n: u64) -> Vec<u64> {
    let mut prod = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            if y == 0 {
                continue;
            }
            prod[i + j] = addmod(prod[i + j], mulmod(x, y, n), n);
        }
    }
    reduce_monic(&mut prod, f, n);
    prod
}

pub(crate) fn pow_mod_poly(base: &[u64], mut exp: u64, f: &[u64], n: u64) -> Vec<u64> {
    let d = f.len() - 1;
    let mut acc = vec![0u64; d];
    acc[0] = 1 % n;
    let mut b = base.to_vec();
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod_poly(&acc, &b, f, n);
        }
        exp >>= 1;
        if exp > 0 {
            b = mul_mod_poly(&b, &b, f, n);
        }
    }
    acc
}

/// Remainder of `a` by arbitrary nonzero `b` over the prime field `F_p`.
fn rem_fp(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let mut r = a.to_vec();
    trim(&mut r);
    let db = degree(b).expect("division by zero polynomial");
    let lead_inv = powmod(b[db], p - 2, p);
    while let Some(dr) = degree(&r) {
        if dr < db {
            break;
        }
        let c = mulmod(r[dr], lead_inv, p);
        for j in 0..=db {
            let t = mulmod(c, b[j], p);
            r[dr - db + j] = submod(r[dr - db + j], t, p);
        }
        trim(&mut r);
        if dr == 0 {
            break;
        }
    }
    trim(&mut r);
    r
}

fn gcd_fp(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    trim(&mut x);
    trim(&mut y);
    while degree(&y).is_some() {
        let r = rem_fp(&x, &y, p);
        x = y;
        y = r;
    }
    x
}

/// Ben-Or irreducibility test for a monic polynomial over `F_p`.
pub(crate) fn is_irreducible(f: &[u64], p: u64) -> bool {
    let d = match degree(f) {
        Some(d) if d >= 1 => d,
        _ => return false,
    };
    if d == 1 {
        return true;
    }
    let mut xp = vec![0u64; d];
    xp[1] = 1;
    for _ in 1..=d / 2 {
        xp = pow_mod_poly(&xp, p, f, p);
        let mut g = xp.clone();
        g[1] = submod(g[1], 1, p);
        let h = gcd_fp(f, &g, p);
        if degree(&h) != Some(0) {
            return false;
        }
    }
    true
}

/// The least monic irreducible polynomial of degree `d` over `F_p`, where
/// candidates `X^d + c_{d-1}X^{d-1} + ... + c_0` are ordered by the integer
/// `c_0 + c_1 p + ... + c_{d-1} p^{d-1}`.
///
/// | p \ d | 1 | 2          | 3            | 4              |
/// |-------|---|------------|--------------|----------------|
/// | 2     | X | X²+X+1     | X³+X+1       | X⁴+X+1         |
/// | 3     | X | X²+1       | X³+2X+1      | X⁴+X+2         |
/// | 5     | X | X²+2       | X³+X+1       | X⁴+2           |
pub(crate) fn least_irreducible(p: u64, d: usize) -> Vec<u64> {
    let mut n: u64 = 0;
    loop {
        let mut f = vec![0u64; d + 1];
        let mut k = n;
        for c in f.iter_mut().take(d) {
            *c = k % p;
            k /= p;
        }
        f[d] = 1;
        if is_irreducible(&f, p) {
            return f;
        }
        n += 1;
    }
}
