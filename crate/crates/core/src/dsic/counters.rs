//! Real-operation accounting for the adaptive canceller.
//!
//! Steps 1, 2, 3 and 5 of the RLS recursion are charged their closed-form
//! costs for the executed dimensions; the inner solver reports the
//! additions it actually performed.

use std::fmt;
use std::ops::AddAssign;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OpCount {
    pub mults: u64,
    pub adds: u64,
}

impl OpCount {
    pub const fn new(mults: u64, adds: u64) -> Self {
        Self { mults, adds }
    }
}

impl AddAssign for OpCount {
    fn add_assign(&mut self, rhs: Self) {
        self.mults += rhs.mults;
        self.adds += rhs.adds;
    }
}

/// Per-step costs of one RLS iteration for a regressor of `memory` blocks of
/// `terms` basis functions (`mp = memory·terms`).
pub fn step_costs(memory: usize, terms: usize) -> [OpCount; 5] {
    let (m, p) = (memory as u64, terms as u64);
    let mp = m * p;
    [
        OpCount::new(6 * m * p * p, 4 * m * p * p),
        OpCount::new(4 * mp, 2 * (mp + 1)),
        OpCount::new(6 * mp, 4 * mp),
        OpCount::new(0, 0),
        OpCount::new(0, 2 * mp),
    ]
}

/// Cost of step 1 when the whole correlation matrix is updated.
pub fn full_update_cost(dim: usize) -> OpCount {
    let n = dim as u64;
    OpCount::new(6 * n * n, 4 * n * n)
}

/// Accumulated counts, split by RLS step (index 0 is step 1).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OpCounters {
    pub steps: [OpCount; 5],
    pub samples: u64,
}

impl OpCounters {
    pub fn total(&self) -> OpCount {
        let mut t = OpCount::default();
        for s in &self.steps {
            t += *s;
        }
        t
    }

    pub fn real_mults(&self) -> u64 {
        self.total().mults
    }

    pub fn real_adds(&self) -> u64 {
        self.total().adds
    }

    pub(crate) fn charge(&mut self, step: usize, cost: OpCount) {
        self.steps[step - 1] += cost;
    }
}

impl AddAssign for OpCounters {
    fn add_assign(&mut self, rhs: Self) {
        for (a, b) in self.steps.iter_mut().zip(rhs.steps) {
            *a += b;
        }
        self.samples += rhs.samples;
    }
}

impl fmt::Display for OpCounters {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "samples = {}", self.samples)?;
        for (i, s) in self.steps.iter().enumerate() {
            writeln!(f, "step{}.real_mults = {}", i + 1, s.mults)?;
            writeln!(f, "step{}.real_adds = {}", i + 1, s.adds)?;
        }
        let t = self.total();
        writeln!(f, "total.real_mults = {}", t.mults)?;
        write!(f, "total.real_adds = {}", t.adds)
    }
}
