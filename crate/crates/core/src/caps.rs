//! Work caps shared by every exhaustive search in the crate.
//!
//! A [`Caps`] value states how many elementary steps a computation may
//! spend; a [`WorkBudget`] is the running counter. Exceeding the budget
//! surfaces as [`CapExceeded`], which callers must keep distinct from a
//! negative answer: "ran out of budget" is never "no".

use std::cell::Cell;

/// Default work cap: 2^30 elementary steps.
pub const DEFAULT_MAX_WORK: u64 = 1 << 30;

/// Limits for exhaustive searches.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Caps {
    /// Maximum number of elementary steps (loop iterations, atom
    /// evaluations, search nodes) before the computation refuses.
    pub max_work: u64,
}

impl Default for Caps {
    fn default() -> Self {
        Caps { max_work: DEFAULT_MAX_WORK }
    }
}

impl Caps {
    pub fn new(max_work: u64) -> Self {
        Caps { max_work }
    }

    pub fn budget(&self) -> WorkBudget {
        WorkBudget { spent: Cell::new(0), max: self.max_work }
    }
}

/// The spent-so-far side of a cap. Interior mutability keeps call sites
/// that only observe the budget free of `&mut` plumbing.
#[derive(Debug)]
pub struct WorkBudget {
    spent: Cell<u64>,
    max: u64,
}

/// A computation hit its work cap before finishing.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("work cap of {max} steps exceeded")]
pub struct CapExceeded {
    pub max: u64,
}

impl WorkBudget {
    /// Charge `steps` units of work. Errs once the cap is crossed.
    pub fn charge(&self, steps: u64) -> Result<(), CapExceeded> {
        let next = self.spent.get().saturating_add(steps);
        self.spent.set(next);
        if next > self.max {
            Err(CapExceeded { max: self.max })
        } else {
            Ok(())
        }
    }

    pub fn spent(&self) -> u64 {
        self.spent.get()
    }

    pub fn max(&self) -> u64 {
        self.max
    }
}

/// Outcome of a capped exhaustive search.
///
/// `Exhausted` means the whole space was covered and nothing was found —
/// a definite "no". `Capped` means the search stopped early and found
/// nothing so far — inconclusive, never to be conflated with `Exhausted`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Search<T> {
    Found(T),
    Exhausted,
    Capped,
}

impl<T> Search<T> {
    pub fn found(self) -> Option<T> {
        match self {
            Search::Found(t) => Some(t),
            _ => None,
        }
    }

    pub fn is_found(&self) -> bool {
        matches!(self, Search::Found(_))
    }

    pub fn is_exhausted(&self) -> bool {
        matches!(self, Search::Exhausted)
    }

    pub fn is_capped(&self) -> bool {
        matches!(self, Search::Capped)
    }

    pub fn as_ref(&self) -> Search<&T> {
        match self {
            Search::Found(t) => Search::Found(t),
            Search::Exhausted => Search::Exhausted,
            Search::Capped => Search::Capped,
        }
    }

    pub fn map<U>(self, f: impl FnOnce(T) -> U) -> Search<U> {
        match self {
            Search::Found(t) => Search::Found(f(t)),
            Search::Exhausted => Search::Exhausted,
            Search::Capped => Search::Capped,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn budget_charges_until_cap() {
        let caps = Caps::new(10);
        let b = caps.budget();
        assert!(b.charge(4).is_ok());
        assert!(b.charge(6).is_ok());
        assert_eq!(b.spent(), 10);
        assert!(b.charge(1).is_err());
    }

    #[test]
    fn default_cap_is_2_pow_30() {
        assert_eq!(Caps::default().max_work, 1 << 30);
    }

    #[test]
    fn search_map_keeps_variant() {
        assert_eq!(Search::Found(3).map(|x| x + 1), Search::Found(4));
        assert_eq!(Search::<i32>::Capped.map(|x| x + 1), Search::Capped);
    }
}
