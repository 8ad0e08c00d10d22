//! Measurement settings at the two stations.

use std::fmt;
use std::ops::{Index, IndexMut};

use serde::{Deserialize, Serialize};

use crate::hv::labels;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Side {
    A,
    B,
}

/// The four analyzer settings: `a`, `a′` at station A and `b`, `b′` at B.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SettingName {
    A,
    APrime,
    B,
    BPrime,
}

impl SettingName {
    pub const ALL: [SettingName; 4] = [SettingName::A, SettingName::APrime, SettingName::B, SettingName::BPrime];

    pub fn side(self) -> Side {
        match self {
            SettingName::A | SettingName::APrime => Side::A,
            SettingName::B | SettingName::BPrime => Side::B,
        }
    }

    /// Position in `ALL`.
    pub fn index(self) -> usize {
        self as usize
    }

    /// 0 for the unprimed setting of a side, 1 for the primed one.
    pub fn local_index(self) -> usize {
        match self {
            SettingName::A | SettingName::B => 0,
            SettingName::APrime | SettingName::BPrime => 1,
        }
    }

    /// Identifier used in files: `a`, `a_prime`, `b`, `b_prime`.
    pub fn key(self) -> &'static str {
        match self {
            SettingName::A => "a",
            SettingName::APrime => "a_prime",
            SettingName::B => "b",
            SettingName::BPrime => "b_prime",
        }
    }

    pub fn from_key(key: &str) -> Option<Self> {
        SettingName::ALL.into_iter().find(|s| s.key() == key)
    }

    /// Label of the apparatus variable attached to this setting.
    pub fn apparatus_label(self) -> &'static str {
        match self {
            SettingName::A => labels::LAMBDA_A,
            SettingName::APrime => labels::LAMBDA_A_PRIME,
            SettingName::B => labels::LAMBDA_B,
            SettingName::BPrime => labels::LAMBDA_B_PRIME,
        }
    }

    pub fn alice(local: usize) -> Self {
        [SettingName::A, SettingName::APrime][local]
    }

    pub fn bob(local: usize) -> Self {
        [SettingName::B, SettingName::BPrime][local]
    }
}

impl fmt::Display for SettingName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SettingName::A => "a",
            SettingName::APrime => "a′",
            SettingName::B => "b",
            SettingName::BPrime => "b′",
        })
    }
}

/// A named analyzer direction in the measurement plane (radians).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Setting {
    pub name: SettingName,
    pub angle: f64,
}

impl Setting {
    pub fn new(name: SettingName, angle: f64) -> Self {
        Setting { name, angle }
    }

    pub fn side(&self) -> Side {
        self.name.side()
    }
}

/// Fixed-size table with one entry per setting, indexed by [`SettingName`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerSetting<T>(pub [T; 4]);

impl<T> PerSetting<T> {
    pub fn from_fn(mut f: impl FnMut(SettingName) -> T) -> Self {
        PerSetting(SettingName::ALL.map(&mut f))
    }

    pub fn iter(&self) -> impl Iterator<Item = (SettingName, &T)> {
        SettingName::ALL.into_iter().zip(self.0.iter())
    }

    pub fn map<U>(&self, mut f: impl FnMut(SettingName, &T) -> U) -> PerSetting<U> {
        PerSetting::from_fn(|s| f(s, &self[s]))
    }

    pub fn try_map<U, E>(&self, mut f: impl FnMut(SettingName, &T) -> Result<U, E>) -> Result<PerSetting<U>, E> {
        let [a, ap, b, bp] = SettingName::ALL.map(|s| f(s, &self[s]));
        Ok(PerSetting([a?, ap?, b?, bp?]))
    }
}

impl<T> Index<SettingName> for PerSetting<T> {
    type Output = T;

    fn index(&self, s: SettingName) -> &T {
        &self.0[s.index()]
    }
}

impl<T> IndexMut<SettingName> for PerSetting<T> {
    fn index_mut(&mut self, s: SettingName) -> &mut T {
        &mut self.0[s.index()]
    }
}

/// One of the four setting pairs `(p, q)` entering the CHSH combination.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pair {
    AB,
    ABPrime,
    APrimeB,
    APrimeBPrime,
}

impl Pair {
    /// Order of the terms in `S = E(a,b) + E(a,b′) + E(a′,b) − E(a′,b′)`.
    pub const ALL: [Pair; 4] = [Pair::AB, Pair::ABPrime, Pair::APrimeB, Pair::APrimeBPrime];

    pub fn new(alice: SettingName, bob: SettingName) -> Option<Pair> {
        match (alice, bob) {
            (SettingName::A, SettingName::B) => Some(Pair::AB),
            (SettingName::A, SettingName::BPrime) => Some(Pair::ABPrime),
            (SettingName::APrime, SettingName::B) => Some(Pair::APrimeB),
            (SettingName::APrime, SettingName::BPrime) => Some(Pair::APrimeBPrime),
            _ => None,
        }
    }

    pub fn alice(self) -> SettingName {
        match self {
            Pair::AB | Pair::ABPrime => SettingName::A,
            Pair::APrimeB | Pair::APrimeBPrime => SettingName::APrime,
        }
    }

    pub fn bob(self) -> SettingName {
        match self {
            Pair::AB | Pair::APrimeB => SettingName::B,
            Pair::ABPrime | Pair::APrimeBPrime => SettingName::BPrime,
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    /// `ab`, `ab_prime`, `a_prime_b`, `a_prime_b_prime`.
    pub fn key(self) -> &'static str {
        match self {
            Pair::AB => "ab",
            Pair::ABPrime => "ab_prime",
            Pair::APrimeB => "a_prime_b",
            Pair::APrimeBPrime => "a_prime_b_prime",
        }
    }

    pub fn from_key(key: &str) -> Option<Self> {
        Pair::ALL.into_iter().find(|p| p.key() == key)
    }
}

impl fmt::Display for Pair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.alice(), self.bob())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerPair<T>(pub [T; 4]);

impl<T> PerPair<T> {
    pub fn from_fn(mut f: impl FnMut(Pair) -> T) -> Self {
        PerPair(Pair::ALL.map(&mut f))
    }

    pub fn iter(&self) -> impl Iterator<Item = (Pair, &T)> {
        Pair::ALL.into_iter().zip(self.0.iter())
    }

    pub fn map<U>(&self, mut f: impl FnMut(Pair, &T) -> U) -> PerPair<U> {
        PerPair::from_fn(|p| f(p, &self[p]))
    }

    pub fn try_map<U, E>(&self, mut f: impl FnMut(Pair, &T) -> Result<U, E>) -> Result<PerPair<U>, E> {
        let [ab, abp, apb, apbp] = Pair::ALL.map(|p| f(p, &self[p]));
        Ok(PerPair([ab?, abp?, apb?, apbp?]))
    }
}

impl<T> Index<Pair> for PerPair<T> {
    type Output = T;

    fn index(&self, p: Pair) -> &T {
        &self.0[p.index()]
    }
}

impl<T> IndexMut<Pair> for PerPair<T> {
    fn index_mut(&mut self, p: Pair) -> &mut T {
        &mut self.0[p.index()]
    }
}

/// Analyzer angles for the four settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Settings {
    pub a: f64,
    pub a_prime: f64,
    pub b: f64,
    pub b_prime: f64,
}

impl Settings {
    pub fn new(a: f64, a_prime: f64, b: f64, b_prime: f64) -> Self {
        Settings { a, a_prime, b, b_prime }
    }

    /// `(0, π/2, π/4, −π/4)`: the singlet reaches `S = −2√2` here.
    pub fn tsirelson() -> Self {
        use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};
        Settings::new(0.0, FRAC_PI_2, FRAC_PI_4, -FRAC_PI_4)
    }

    pub fn get(&self, name: SettingName) -> Setting {
        let angle = match name {
            SettingName::A => self.a,
            SettingName::APrime => self.a_prime,
            SettingName::B => self.b,
            SettingName::BPrime => self.b_prime,
        };
        Setting::new(name, angle)
    }

    pub fn pair(&self, pair: Pair) -> (Setting, Setting) {
        (self.get(pair.alice()), self.get(pair.bob()))
    }
}
