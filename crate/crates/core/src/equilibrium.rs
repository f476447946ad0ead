//! Exact-arithmetic check that 2-exchange and κ-transfer, run with the
//! exact equilibrium condition (`E_p ≠ 2E_c` instead of `E_p < 2E_c`), can
//! fail to ever reach the exact distribution on a three-node line under a
//! round-robin schedule.
//!
//! Energies are rationals whose denominators grow without bound, so each
//! value is tracked by its residues modulo several large primes. A nonzero
//! residue of `a − b` proves `a ≠ b` exactly. All-zero residues mean "equal,
//! or a fingerprint collision" (odds around 1e-45 per comparison); the rule
//! treats them as equal and they are counted as ties.

use crate::error::{Error, Result};

const PRIMES: [u64; 3] = [(1 << 61) - 1, 1_000_000_007, 998_244_353];

fn mul_mod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

fn pow_mod(mut b: u64, mut e: u64, p: u64) -> u64 {
    let mut r = 1;
    b %= p;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, b, p);
        }
        b = mul_mod(b, b, p);
        e >>= 1;
    }
    r
}

/// A rational number known only through its residues modulo [`PRIMES`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Fingerprint([u64; 3]);

impl Fingerprint {
    pub fn from_ratio(num: i64, den: u64) -> Self {
        let mut r = [0; 3];
        for (i, &p) in PRIMES.iter().enumerate() {
            let n = num.rem_euclid(p as i64) as u64;
            r[i] = mul_mod(n, pow_mod(den % p, p - 2, p), p);
        }
        Fingerprint(r)
    }

    pub fn from_int(v: i64) -> Self {
        Self::from_ratio(v, 1)
    }




    /// True when some residue is nonzero, i.e. the value is provably not 0.
    pub fn provably_nonzero(self) -> bool {
        self.0.iter().any(|&r| r != 0)
    }
}

impl std::ops::Add for Fingerprint {
    type Output = Self;

    fn add(self, o: Self) -> Self {
            let mut r = [0; 3];
            for (i, &p) in PRIMES.iter().enumerate() {
                r[i] = (self.0[i] + o.0[i]) % p;
            }
            Fingerprint(r)
    }
}

impl std::ops::Sub for Fingerprint {
    type Output = Self;

    fn sub(self, o: Self) -> Self {
            let mut r = [0; 3];
            for (i, &p) in PRIMES.iter().enumerate() {
                r[i] = (self.0[i] + p - o.0[i]) % p;
            }
            Fingerprint(r)
    }
}

impl std::ops::Mul for Fingerprint {
    type Output = Self;

    fn mul(self, o: Self) -> Self {
            let mut r = [0; 3];
            for (i, &p) in PRIMES.iter().enumerate() {
                r[i] = mul_mod(self.0[i], o.0[i], p);
            }
            Fingerprint(r)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExactVariant {
    /// `x = (2E_c − E_p)/3` moves from child to parent (negative moves it
    /// down) whenever `E_p ≠ 2E_c`.
    TwoExchange,
    /// The child sends `κE_c` upward whenever `E_p ≠ 2E_c`; `κ = num/den`.
    KappaTransfer { num: u64, den: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExactScenarioReport {
    pub steps: u64,
    /// First step after which the state was (possibly) exact, if any.
    pub reached_at: Option<u64>,
    /// Rule evaluations whose gap `2E_c − E_p` had all-zero residues.
    pub ties: u64,
    /// Interactions that moved energy.
    pub transfers: u64,
}

impl ExactScenarioReport {
    /// Every state along the run was provably not exact.
    pub fn never_exact(&self) -> bool {
        self.reached_at.is_none()
    }
}

/// Runs the line `a ⇝ b ⇝ c` with round-robin pairs `(a,b), (b,c), (a,c)`
/// for `steps` interactions from integer energies `[E_a, E_b, E_c]`.
pub fn exact_condition_line(variant: ExactVariant, initial: [i64; 3], steps: u64) -> Result<ExactScenarioReport> {
    if initial.iter().any(|&e| e < 0) {
        return Err(Error::InvalidParameter("energies must be non-negative".into()));
    }
    if let ExactVariant::KappaTransfer { num, den } = variant {
        if num == 0 || num >= den {
            return Err(Error::InvalidParameter(format!("kappa {num}/{den} outside (0, 1)")));
        }
    }
    let two = Fingerprint::from_int(2);
    let third = Fingerprint::from_ratio(1, 3);
    let kappa = match variant {
        ExactVariant::KappaTransfer { num, den } => Fingerprint::from_ratio(num as i64, den),
        ExactVariant::TwoExchange => Fingerprint::from_int(0),
    };
    let mut e = initial.map(Fingerprint::from_int);
    let mut report = ExactScenarioReport {
        steps,
        reached_at: None,
        ties: 0,
        transfers: 0,
    };
    let edges = [(0usize, 1usize), (1, 2)];
    for t in 0..steps {
        // The third pair of the round, (a, c), is not an edge.
        if let Some(&(p, c)) = edges.get((t % 3) as usize) {
            let gap = two * e[c] - e[p];
            if gap.provably_nonzero() {
                let x = match variant {
                    ExactVariant::TwoExchange => gap * third,
                    ExactVariant::KappaTransfer { .. } => kappa * e[c],
                };
                e[p] = e[p] + x;
                e[c] = e[c] - x;
                report.transfers += 1;
            } else {
                report.ties += 1;
            }
        }
        let ab = e[0] - two * e[1];
        let bc = e[1] - two * e[2];
        if !ab.provably_nonzero() && !bc.provably_nonzero() {
            report.reached_at.get_or_insert(t + 1);
        }
    }
    Ok(report)
}
