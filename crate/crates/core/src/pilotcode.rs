//! Constant-weight on-off pilot codes and proximity decoding over the OR
//! channel.
//!
//! A code with parameters `(L, ℓ)` uses `L' = L + ℓ` shared pilot REs. Each
//! user gets a distinct pattern with exactly `L` ones (transmit) and `ℓ`
//! zeros (silent). A site observes, per RE, whether any proximate user
//! transmitted. One proximate user leaves exactly its `ℓ` zeros; two or more
//! leave fewer than `ℓ`; nobody leaves all zeros.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CodeError {
    #[error("code needs L >= 1 ones per codeword")]
    NoOnes,
    #[error(
        "{requested} codewords requested but (L={ones}, ell={zeros}) supports only {capacity}"
    )]
    Capacity {
        requested: u64,
        ones: usize,
        zeros: usize,
        capacity: u128,
    },
    #[error("ell = 0 only supports a single user")]
    ZeroEllNeedsSingleUser,
    #[error("at least one codeword is required")]
    NoCodewords,
    #[error("expected length {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("invalid bit character {0:?}; use 0 or 1")]
    BadBit(char),
}

/// Binomial coefficient, saturating at `u128::MAX`.
pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) / (i + 1) stays integral at every step
        match acc.checked_mul((n - i) as u128) {
            Some(v) => acc = v / (i + 1) as u128,
            None => return u128::MAX,
        }
    }
    acc
}

/// A binary pattern over the shared pilot REs; index 0 is RE 1.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Codeword(Vec<bool>);

impl Codeword {
    pub fn from_bits(bits: Vec<bool>) -> Self {
        Codeword(bits)
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn weight(&self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }

    pub fn ones(&self) -> Vec<usize> {
        positions(&self.0, true)
    }

    pub fn zeros(&self) -> Vec<usize> {
        positions(&self.0, false)
    }
}

fn positions(bits: &[bool], value: bool) -> Vec<usize> {
    bits.iter()
        .enumerate()
        .filter_map(|(i, &b)| (b == value).then_some(i))
        .collect()
}

/// RE 1 leftmost.
impl fmt::Display for Codeword {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for Codeword {
    type Err = CodeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.trim()
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(CodeError::BadBit(other)),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Codeword)
    }
}

/// Which assigned users are within `r_o` of the observing site.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProximityVector(Vec<bool>);

impl ProximityVector {
    pub fn new(z: Vec<bool>) -> Self {
        ProximityVector(z)
    }

    pub fn none(users: usize) -> Self {
        ProximityVector(vec![false; users])
    }

    pub fn from_indices(users: usize, present: &[usize]) -> Self {
        let mut z = vec![false; users];
        for &k in present {
            z[k] = true;
        }
        ProximityVector(z)
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn weight(&self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }
}

/// What a site concludes from one observed pattern.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DecodeOutcome {
    Empty,
    /// A lone proximate user and the `L` REs carrying its pilot.
    Single {
        user: usize,
        estimation_res: Vec<usize>,
    },
    Collision,
    /// A pattern no ideal OR observation of assigned codewords can produce.
    Invalid,
}

/// The first `K` patterns of the `(L, ℓ)` constant-weight family.
#[derive(Debug, Clone, PartialEq)]
pub struct OnOffCode {
    ones: usize,
    zeros: usize,
    codewords: Vec<Codeword>,
    by_zero_set: HashMap<Vec<usize>, usize>,
}

impl OnOffCode {
    pub fn ones(&self) -> usize {
        self.ones
    }

    pub fn zeros(&self) -> usize {
        self.zeros
    }

    /// Shared pilot REs, `L + ℓ`.
    pub fn length(&self) -> usize {
        self.ones + self.zeros
    }

    pub fn capacity(&self) -> u128 {
        capacity(self.ones, self.zeros)
    }

    pub fn codewords(&self) -> &[Codeword] {
        &self.codewords
    }

    pub fn codeword(&self, user: usize) -> &Codeword {
        &self.codewords[user]
    }

    pub fn users(&self) -> usize {
        self.codewords.len()
    }

    /// Pilot efficiency `L / (L + ℓ)`.
    pub fn efficiency(&self) -> f64 {
        self.ones as f64 / self.length() as f64
    }
}

/// `C(L+ℓ, ℓ)`, the number of weight-`L` patterns of length `L+ℓ`.
pub fn capacity(ones: usize, zeros: usize) -> u128 {
    binomial((ones + zeros) as u64, zeros as u64)
}

/// Advances `c` to the next `k`-subset of `0..n` in lexicographic order.
fn next_combination(c: &mut [usize], n: usize) -> bool {
    let k = c.len();
    let Some(i) = (0..k).rev().find(|&i| c[i] < n - k + i) else {
        return false;
    };
    c[i] += 1;
    for j in i + 1..k {
        c[j] = c[j - 1] + 1;
    }
    true
}

/// Assigns the first `users` codewords, ordered lexicographically by their
/// zero positions.
pub fn enumerate_codewords(ones: usize, zeros: usize, users: u64) -> Result<OnOffCode, CodeError> {
    if ones == 0 {
        return Err(CodeError::NoOnes);
    }
    if users == 0 {
        return Err(CodeError::NoCodewords);
    }
    if zeros == 0 && users > 1 {
        return Err(CodeError::ZeroEllNeedsSingleUser);
    }
    let cap = capacity(ones, zeros);
    if users as u128 > cap {
        return Err(CodeError::Capacity {
            requested: users,
            ones,
            zeros,
            capacity: cap,
        });
    }
    let n = ones + zeros;
    let mut zero_set: Vec<usize> = (0..zeros).collect();
    let mut codewords = Vec::with_capacity(users as usize);
    let mut by_zero_set = HashMap::with_capacity(users as usize);
    loop {
        let mut bits = vec![true; n];
        for &z in &zero_set {
            bits[z] = false;
        }
        by_zero_set.insert(zero_set.clone(), codewords.len());
        codewords.push(Codeword(bits));
        if codewords.len() as u64 == users || !next_combination(&mut zero_set, n) {
            break;
        }
    }
    Ok(OnOffCode {
        ones,
        zeros,
        codewords,
        by_zero_set,
    })
}

/// Per-RE OR of the codewords of proximate users.
pub fn or_channel(code: &OnOffCode, z: &ProximityVector) -> Result<Vec<bool>, CodeError> {
    if z.len() != code.users() {
        return Err(CodeError::LengthMismatch {
            expected: code.users(),
            got: z.len(),
        });
    }
    let mut eps = vec![false; code.length()];
    for (cw, _) in code
        .codewords
        .iter()
        .zip(z.as_slice())
        .filter(|(_, &zk)| zk)
    {
        for (e, &b) in eps.iter_mut().zip(cw.bits()) {
            *e |= b;
        }
    }
    Ok(eps)
}

/// Classifies an observed on/off pattern.
pub fn decode(code: &OnOffCode, eps: &[bool]) -> Result<DecodeOutcome, CodeError> {
    if eps.len() != code.length() {
        return Err(CodeError::LengthMismatch {
            expected: code.length(),
            got: eps.len(),
        });
    }
    let zeros = positions(eps, false);
    let outcome = if zeros.len() == eps.len() {
        DecodeOutcome::Empty
    } else if zeros.len() < code.zeros {
        DecodeOutcome::Collision
    } else if zeros.len() > code.zeros {
        DecodeOutcome::Invalid
    } else {
        match code.by_zero_set.get(&zeros) {
            Some(&user) => DecodeOutcome::Single {
                user,
                estimation_res: code.codewords[user].ones(),
            },
            None => DecodeOutcome::Invalid,
        }
    };
    Ok(outcome)
}

/// Smallest `ℓ ≥ 1` with `C(L+ℓ, ℓ) ≥ K`; zero when `K ≤ 1`.
pub fn min_ell(users: u64, ones: usize) -> usize {
    assert!(ones >= 1, "L must be at least 1");
    if users <= 1 {
        return 0;
    }
    let mut ell = 1usize;
    // C(L+ℓ, ℓ) from C(L+ℓ-1, ℓ-1)
    let mut cap: u128 = (ones + 1) as u128;
    while cap < users as u128 {
        ell += 1;
        cap = cap.saturating_mul((ones + ell) as u128) / ell as u128;
    }
    ell
}

/// Best achievable pilot efficiency for `K` users sharing a code family
/// with `L` ones.
pub fn efficiency(users: u64, ones: usize) -> f64 {
    if users <= 1 {
        return 1.0;
    }
    ones as f64 / (ones + min_ell(users, ones)) as f64
}

/// Gain after paying for the code's silent REs.
pub fn net_gain(gain: f64, users: u64, ones: usize) -> f64 {
    gain * efficiency(users, ones)
}
