//! Thread-local field-operation counter.
//!
//! Every arithmetic operation performed through [`FieldConfig`](crate::algebra::FieldConfig)
//! bumps this counter once. Wall-clock timings are too noisy to exhibit the
//! preprocessing/query trade-off at desk scale, so benchmarks read operation
//! counts instead: snapshot with [`field_ops`] before and after a phase and
//! subtract, or call [`reset_field_ops`] between phases.
//!
//! The counter is per thread; a phase measured on one thread is unaffected by
//! work on others.

use std::cell::Cell;

thread_local! {
    static FIELD_OPS: Cell<u64> = const { Cell::new(0) };
}

#[inline(always)]
pub(crate) fn bump() {
    FIELD_OPS.with(|c| c.set(c.get().wrapping_add(1)));
}

/// Total field operations performed on the current thread so far.
pub fn field_ops() -> u64 {
    FIELD_OPS.with(|c| c.get())
}

/// Reset the current thread's counter to zero.
pub fn reset_field_ops() {
    FIELD_OPS.with(|c| c.set(0));
}
