//! Iterated transfer: the target pair meets a fresh copy of the source pair
//! for half a period, again and again.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::entanglement::{negativity, schmidt_angle_from_negativity};
use crate::error::{Error, Result};
use crate::qla::Operator;
use crate::scalar::Real;
use crate::transfer::{FixedTimeEvolution, QubitPairState, SourceState};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum IterationMode {
    /// The target pair re-enters each round as the pure Schmidt state whose
    /// negativity equals the value just achieved.
    #[default]
    PureReset,
    /// The reduced target density operator is carried into the next round.
    MixedContinuation,
}

impl IterationMode {
    pub fn as_str(self) -> &'static str {
        match self {
            IterationMode::PureReset => "pure-reset",
            IterationMode::MixedContinuation => "mixed-continuation",
        }
    }
}

impl fmt::Display for IterationMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for IterationMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "pure-reset" | "pure" => Ok(IterationMode::PureReset),
            "mixed" | "mixed-continuation" => Ok(IterationMode::MixedContinuation),
            other => Err(Error::InvalidArgument(format!(
                "unknown iteration mode '{other}' (expected pure-reset or mixed)"
            ))),
        }
    }
}

/// Target state after a round.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TpSnapshot<T> {
    /// Schmidt angle of the pure state the next round starts from.
    Angle(T),
    Density(Operator<T>),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IterationRecord<T> {
    /// Round number, starting at 1.
    pub step: usize,
    pub negativity_before: T,
    pub negativity_after: T,
    pub mode: IterationMode,
    pub tp_state_snapshot: TpSnapshot<T>,
}

fn check_inputs<T: Real>(e0: T, steps: usize) -> Result<()> {
    if !(e0 >= T::zero() && e0 <= T::one()) {
        return Err(Error::out_of_range("E0", e0.to_f64_lossy(), 0.0, 1.0));
    }
    if steps == 0 {
        return Err(Error::InvalidArgument("steps must be at least 1".into()));
    }
    Ok(())
}

/// One pure-reset round: the negativity reached at half period from a pure
/// Schmidt target state of negativity `e`.
pub fn transfer_map<T: Real>(e: T, sp: &SourceState<T>) -> Result<T> {
    let ev = FixedTimeEvolution::new(sp.model(), sp.model().half_period())?;
    pure_round(&ev, e, sp)
}

fn pure_round<T: Real>(ev: &FixedTimeEvolution<T>, e: T, sp: &SourceState<T>) -> Result<T> {
    let theta = schmidt_angle_from_negativity(e)?;
    let rho = ev.reduced(&QubitPairState::new(theta), sp)?;
    Ok(negativity(&rho, 1)?.value)
}

/// Runs `steps` rounds from a pure target state of negativity `e0`, each with
/// a fresh source pair in state `sp`, for half a source period per round.
pub fn iterate_transfer<T: Real>(
    e0: T,
    sp: &SourceState<T>,
    steps: usize,
    mode: IterationMode,
) -> Result<Vec<IterationRecord<T>>> {
    check_inputs(e0, steps)?;
    let model = sp.model();
    let t = model.half_period();
    let ev = FixedTimeEvolution::new(model, t)?;
    let mut records = Vec::with_capacity(steps);

    match mode {
        IterationMode::PureReset => {
            let mut e = e0;
            for step in 1..=steps {
                let after = pure_round(&ev, e, sp)?;
                log::debug!("pure-reset step {step}: {e} -> {after}");
                records.push(IterationRecord {
                    step,
                    negativity_before: e,
                    negativity_after: after,
                    mode,
                    tp_state_snapshot: TpSnapshot::Angle(schmidt_angle_from_negativity(after)?),
                });
                e = after;
            }
        }
        IterationMode::MixedContinuation => {
            let theta = schmidt_angle_from_negativity(e0)?;
            let mut rho = QubitPairState::new(theta).density();
            let mut e = e0;
            for step in 1..=steps {
                rho = ev.reduced_from_density(&rho, sp)?;
                let after = negativity(&rho, 1)?.value;
                log::debug!("mixed step {step}: {e} -> {after}");
                records.push(IterationRecord {
                    step,
                    negativity_before: e,
                    negativity_after: after,
                    mode,
                    tp_state_snapshot: TpSnapshot::Density(rho.clone()),
                });
                e = after;
            }
        }
    }
    Ok(records)
}

/// Side-by-side negativities of both modes after each round.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ModeComparison<T> {
    pub step: usize,
    pub pure_reset: T,
    pub mixed_continuation: T,
    /// `mixed_continuation - pure_reset`
    pub delta: T,
}

pub fn compare_modes<T: Real>(
    e0: T,
    sp: &SourceState<T>,
    steps: usize,
) -> Result<Vec<ModeComparison<T>>> {
    let pure = iterate_transfer(e0, sp, steps, IterationMode::PureReset)?;
    let mixed = iterate_transfer(e0, sp, steps, IterationMode::MixedContinuation)?;
    Ok(pure
        .iter()
        .zip(&mixed)
        .map(|(p, m)| ModeComparison {
            step: p.step,
            pure_reset: p.negativity_after,
            mixed_continuation: m.negativity_after,
            delta: m.negativity_after - p.negativity_after,
        })
        .collect())
}
