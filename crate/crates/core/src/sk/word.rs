//! Gate words over `{H, T, S, Z, T†, S†}` in time order.

use std::fmt;

use crate::circuit::GateKind;
use crate::error::{Error, Result};

use super::su2::Quat;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum SkGate {
    H,
    T,
    S,
    Z,
    Tdg,
    Sdg,
}

impl SkGate {
    pub fn quat(self) -> Quat {
        use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4, PI};
        match self {
            SkGate::H => Quat::new(0.0, FRAC_1_SQRT_2, 0.0, FRAC_1_SQRT_2),
            SkGate::T => Quat::rz(FRAC_PI_4),
            SkGate::S => Quat::rz(FRAC_PI_2),
            SkGate::Z => Quat::rz(PI),
            SkGate::Tdg => Quat::rz(-FRAC_PI_4),
            SkGate::Sdg => Quat::rz(-FRAC_PI_2),
        }
    }

    pub fn inverse(self) -> SkGate {
        match self {
            SkGate::T => SkGate::Tdg,
            SkGate::Tdg => SkGate::T,
            SkGate::S => SkGate::Sdg,
            SkGate::Sdg => SkGate::S,
            g => g,
        }
    }

    /// Power of `T` for the diagonal gates.
    fn t_power(self) -> Option<u8> {
        match self {
            SkGate::H => None,
            SkGate::T => Some(1),
            SkGate::S => Some(2),
            SkGate::Z => Some(4),
            SkGate::Sdg => Some(6),
            SkGate::Tdg => Some(7),
        }
    }

    pub fn is_t_like(self) -> bool {
        matches!(self, SkGate::T | SkGate::Tdg)
    }

    pub fn to_gate_kind(self) -> GateKind {
        match self {
            SkGate::H => GateKind::H,
            SkGate::T => GateKind::T,
            SkGate::S => GateKind::S,
            SkGate::Z => GateKind::Z,
            SkGate::Tdg => GateKind::Tdg,
            SkGate::Sdg => GateKind::Sdg,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            SkGate::H => "H",
            SkGate::T => "T",
            SkGate::S => "S",
            SkGate::Z => "Z",
            SkGate::Tdg => "TDG",
            SkGate::Sdg => "SDG",
        }
    }
}

/// Shortest spelling of `T^k` for `k` in `1..8`.
pub fn t_power_word(k: u8) -> &'static [SkGate] {
    use SkGate::*;
    match k % 8 {
        0 => &[],
        1 => &[T],
        2 => &[S],
        3 => &[S, T],
        4 => &[Z],
        5 => &[Z, T],
        6 => &[Sdg],
        _ => &[Tdg],
    }
}

/// A gate word; the first gate acts first.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct Word(pub Vec<SkGate>);

impl Word {
    pub fn new() -> Self {
        Word(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn gates(&self) -> &[SkGate] {
        &self.0
    }

    /// Product `g_last ⋯ g_first`.
    pub fn quat(&self) -> Quat {
        self.0
            .iter()
            .fold(Quat::IDENTITY, |acc, g| g.quat() * acc)
    }

    pub fn inverse(&self) -> Word {
        Word(self.0.iter().rev().map(|g| g.inverse()).collect())
    }

    pub fn extend(&mut self, other: &Word) {
        self.0.extend_from_slice(&other.0);
    }

    pub fn t_count(&self) -> usize {
        self.0.iter().filter(|g| g.is_t_like()).count()
    }

    /// Cycle count when each `T`/`T†` costs `t_cost` cycles and other gates one.
    pub fn cycles(&self, t_cost: u64) -> u64 {
        let t = self.t_count() as u64;
        (self.len() as u64 - t) + t_cost * t
    }

    /// Cancels `H H` pairs and merges diagonal runs into their shortest
    /// `T`-power spelling; the result is the same unitary up to global phase.
    pub fn simplify(&self) -> Word {
        enum Tok {
            H,
            P(u8),
        }
        let mut stack: Vec<Tok> = Vec::with_capacity(self.0.len());
        for g in &self.0 {
            match g.t_power() {
                None => {
                    if matches!(stack.last(), Some(Tok::H)) {
                        stack.pop();
                    } else {
                        stack.push(Tok::H);
                    }
                }
                Some(k) => match stack.last_mut() {
                    Some(Tok::P(p)) => {
                        *p = (*p + k) % 8;
                        if *p == 0 {
                            stack.pop();
                        }
                    }
                    _ => stack.push(Tok::P(k)),
                },
            }
        }
        let mut out = Vec::with_capacity(stack.len());
        for t in stack {
            match t {
                Tok::H => out.push(SkGate::H),
                Tok::P(k) => out.extend_from_slice(t_power_word(k)),
            }
        }
        Word(out)
    }

    pub fn to_gate_kinds(&self) -> Vec<GateKind> {
        self.0.iter().map(|g| g.to_gate_kind()).collect()
    }

    pub fn parse(s: &str) -> Result<Word> {
        s.split_whitespace()
            .map(|t| match t {
                "H" => Ok(SkGate::H),
                "T" => Ok(SkGate::T),
                "S" => Ok(SkGate::S),
                "Z" => Ok(SkGate::Z),
                "TDG" => Ok(SkGate::Tdg),
                "SDG" => Ok(SkGate::Sdg),
                other => Err(Error::invalid(format!("unknown word gate `{other}`"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(Word)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for g in &self.0 {
            if !first {
                f.write_str(" ")?;
            }
            f.write_str(g.symbol())?;
            first = false;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use SkGate::*;

    #[test]
    fn power_spellings() {
        for k in 0..8u8 {
            let w = Word(t_power_word(k).to_vec());
            let t = Word(vec![T; k as usize]);
            assert!(w.quat().distance(&t.quat()) < 1e-14, "k={k}");
        }
    }

    #[test]
    fn simplify_cancels() {
        let w = Word(vec![H, H, T, T, T, T, T, T, T, T, S]);
        assert_eq!(w.simplify(), Word(vec![S]));
        let w = Word(vec![H, T, Tdg, H]);
        assert!(w.simplify().is_empty());
    }

    #[test]
    fn cycle_cost() {
        let w = Word(vec![H, T, S, Tdg]);
        assert_eq!(w.t_count(), 2);
        assert_eq!(w.cycles(5), 12);
    }

    #[test]
    fn display_parse() {
        let w = Word(vec![H, T, Sdg, Z]);
        assert_eq!(Word::parse(&w.to_string()).unwrap(), w);
        assert!(Word::parse("Q").is_err());
    }

    fn arb_gate() -> impl Strategy<Value = SkGate> {
        prop_oneof![Just(H), Just(T), Just(S), Just(Z), Just(Tdg), Just(Sdg)]
    }

    proptest! {
        #[test]
        fn simplify_preserves_unitary(gs in proptest::collection::vec(arb_gate(), 0..40)) {
            let w = Word(gs);
            let s = w.simplify();
            prop_assert!(s.len() <= w.len());
            prop_assert!(w.quat().distance(&s.quat()) < 1e-12);
            prop_assert!(w.inverse().quat().distance(&w.quat().inverse()) < 1e-12);
        }
    }
}
