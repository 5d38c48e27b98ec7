use serde::{Deserialize, Serialize};

use super::sumset::SumsetTower;
use super::{BasisError, SequenceWindow};

/// Prefix cap for the gcd search.
pub const MAX_PREFIX_TERMS: usize = 10_000;

/// Integers `x_2..x_k` with `Σ x_j (a_j − a_1) = 1`, plus the gap data
/// that turns them into an order bound.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BasisCertificate {
    pub k: usize,
    /// a_1..a_k (distinct values, increasing).
    pub prefix: Vec<i64>,
    /// x_2..x_k.
    pub coefficients: Vec<i128>,
    /// Largest gap of sA on the measured window.
    pub g: u64,
    /// Least element of sA.
    pub m: u64,
    pub s: u32,
    /// s + g·Σ|x_j|.
    pub order_bound: u64,
}

impl BasisCertificate {
    /// Σ_{j≥2} x_j (a_j − a_1), computed exactly.
    pub fn bezout_sum(&self) -> i128 {
        let a1 = self.prefix[0] as i128;
        self.coefficients.iter().zip(&self.prefix[1..]).map(|(x, &a)| x * (a as i128 - a1)).sum()
    }

    pub fn abs_coefficient_sum(&self) -> u64 {
        self.coefficients.iter().map(|x| x.unsigned_abs() as u64).sum()
    }

    /// Fill in g, M and s from a gap report of the s-fold sumset.
    pub fn with_gaps(mut self, s: u32, g: u64, m: u64) -> Self {
        self.s = s;
        self.g = g;
        self.m = m;
        self.order_bound = s as u64 + g * self.abs_coefficient_sum();
        self
    }

    /// a_j' and a_j'' for j = 2..k, by the sign of x_j.
    fn primed(&self) -> Vec<(u64, u64)> {
        let a1 = self.prefix[0] as u64;
        self.coefficients
            .iter()
            .zip(&self.prefix[1..])
            .map(|(&x, &a)| if x >= 0 { (a as u64, a1) } else { (a1, a as u64) })
            .collect()
    }

    /// T'' = Σ |x_j| a_j''.
    pub fn t_double_prime(&self) -> u64 {
        self.coefficients.iter().zip(self.primed()).map(|(x, (_, a2))| x.unsigned_abs() as u64 * a2).sum()
    }

    /// Smallest N the construction handles: M + g·T''.
    pub fn threshold(&self) -> u64 {
        self.m + self.g * self.t_double_prime()
    }
}

/// (g, u, v) with u·a + v·b = g = gcd(a, b) ≥ 0.
fn egcd(a: i128, b: i128) -> (i128, i128, i128) {
    let (mut r0, mut r1) = (a, b);
    let (mut s0, mut s1) = (1i128, 0i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0.div_euclid(r1);
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    if r0 < 0 {
        (-r0, -s0, -t0)
    } else {
        (r0, s0, t0)
    }
}

/// Shortest prefix of distinct values whose differences have gcd 1, and Bezout coefficients for it.
///
/// `g`, `M` and `s` are left at zero; fill them with [`BasisCertificate::with_gaps`].
pub fn gcd_bezout(seq: &SequenceWindow) -> Result<BasisCertificate, BasisError> {
    let mut a: Vec<i64> = Vec::new();
    for v in seq.exact_values() {
        if !a.contains(&v) {
            a.push(v);
        }
        if a.len() >= MAX_PREFIX_TERMS {
            break;
        }
    }
    a.sort_unstable();
    if a.len() < 2 {
        return Err(BasisError::InvalidArgument("need at least two distinct values".into()));
    }
    let a1 = a[0] as i128;
    let mut g = a[1] as i128 - a1;
    let mut coeffs: Vec<i128> = vec![1];
    let mut k = 2;
    while g != 1 && k < a.len() {
        let d = a[k] as i128 - a1;
        let (ng, u, v) = egcd(g, d);
        if ng < g {
            for c in coeffs.iter_mut() {
                *c = c
                    .checked_mul(u)
                    .ok_or_else(|| BasisError::InvalidArgument("Bezout coefficient overflow".into()))?;
            }
            coeffs.push(v);
        } else {
            coeffs.push(0);
        }
        g = ng;
        k += 1;
    }
    if g != 1 {
        return Err(BasisError::CertificateFailure { gcd: g, terms: a.len() });
    }
    a.truncate(k);
    let cert = BasisCertificate { k, prefix: a, coefficients: coeffs, g: 0, m: 0, s: 0, order_bound: 0 };
    debug_assert_eq!(cert.bezout_sum(), 1);
    Ok(cert)
}

/// Multiset of sequence values summing to N, built as in the constructive proof.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lemma3Representation {
    pub n: u64,
    /// Sorted parts; sums to `n`.
    pub parts: Vec<u64>,
    /// The sA member b.
    pub b: u64,
    /// h in [0, g].
    pub h: u64,
    /// True when N itself is in sA below the construction threshold (h path skipped).
    pub direct: bool,
}

impl Lemma3Representation {
    pub fn verify(&self) -> bool {
        self.parts.iter().map(|&p| p as u128).sum::<u128>() == self.n as u128
    }
}

/// Write N as `b + h·Σ|x_j|a_j' + (g − h)·Σ|x_j|a_j''` with `b ∈ sA`, `0 ≤ h ≤ g`,
/// and decompose `b` through the sumset tower.
///
/// Below the threshold `M + g·T''` the construction does not apply; if N is
/// itself in sA it is returned directly, otherwise this is a range error.
pub fn represent_lemma3(
    n: u64,
    s: u32,
    cert: &BasisCertificate,
    tower: &SumsetTower,
) -> Result<Lemma3Representation, BasisError> {
    if tower.s() < s || s == 0 {
        return Err(BasisError::InvalidArgument(format!("tower has {} levels, need {s}", tower.s())));
    }
    let sa = tower.level(s);
    let threshold = cert.threshold();
    if n < threshold || n - cert.g * cert.t_double_prime() > sa.limit {
        if n <= sa.limit && sa.contains(n) {
            let parts = tower.decompose(n, s)?;
            return finish(Lemma3Representation { n, parts, b: n, h: 0, direct: true }, cert);
        }
        return Err(BasisError::Range { n, threshold, limit: sa.limit + cert.g * cert.t_double_prime() });
    }
    let target = n - cert.g * cert.t_double_prime();
    let b = sa.predecessor(target).ok_or(BasisError::Backtrack(target))?;
    let h = target - b;
    if h > cert.g {
        // the measured gap bound does not hold at this N
        return Err(BasisError::Range { n, threshold, limit: sa.limit });
    }
    let mut parts = tower.decompose(b, s)?;
    for (x, (a1, a2)) in cert.coefficients.iter().zip(cert.primed()) {
        let x = x.unsigned_abs() as u64;
        parts.extend(std::iter::repeat(a1).take((h * x) as usize));
        parts.extend(std::iter::repeat(a2).take(((cert.g - h) * x) as usize));
    }
    parts.sort_unstable();
    finish(Lemma3Representation { n, parts, b, h, direct: false }, cert)
}

fn finish(rep: Lemma3Representation, cert: &BasisCertificate) -> Result<Lemma3Representation, BasisError> {
    if !rep.verify() || rep.parts.len() as u64 > cert.order_bound.max(cert.s as u64) {
        return Err(BasisError::Backtrack(rep.n));
    }
    Ok(rep)
}
