//! Property tests for the engine's schedule and terminal-group encodings.

use invlogic::engine::{decode_terminals, AnnealSchedule, ClampSpec};
use invlogic::Spin;
use proptest::prelude::*;

proptest! {
    /// A staircase schedule starts at the high weight, never increases, steps
    /// by single units, and holds the low weight from its last step onward.
    #[test]
    fn staircase_is_monotone(
        w_lo in 0i32..8,
        extra in 0i32..10,
        from in 0u64..2000,
        span in 1u64..4000,
    ) {
        let w_hi = w_lo + extra;
        let to = from + span;
        let s = AnnealSchedule::staircase(w_hi, w_lo, from, to);
        prop_assert_eq!(s.w_at(0), w_hi);
        let mut prev = w_hi;
        for t in 0..=to + 16 {
            let w = s.w_at(t);
            prop_assert!(w <= prev && prev - w <= 1);
            prev = w;
        }
        prop_assert_eq!(s.w_at(s.last_step_cycle()), w_lo);
        prop_assert_eq!(prev, w_lo);
    }

    /// Clamping a terminal group to a value and decoding it back is the
    /// identity, regardless of where the group's nodes live in the network.
    #[test]
    fn group_clamp_roundtrip(
        offset in 0usize..10,
        width in 1usize..16,
        bits in any::<u64>(),
    ) {
        let value = bits & ((1u64 << width) - 1);
        let group: Vec<usize> = (offset..offset + width).collect();
        let mut clamps = ClampSpec::new();
        clamps.set_group(&group, value);
        let m: Vec<Spin> = (0..offset + width)
            .map(|i| clamps.get(i).unwrap_or(-1))
            .collect();
        prop_assert_eq!(decode_terminals(&m, &group), value);
    }
}
