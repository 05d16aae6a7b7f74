//! Cycle-accurate simulator for invertible logic: Boltzmann-machine circuits of
//! saturating-accumulator spiking neurons, run forward (multiply/add) or in
//! reverse (factorize/divide) by clamping terminals and annealing the noise weight.

pub mod catalog;
pub mod composer;
pub mod engine;
pub mod experiments;
pub mod formats;
pub mod oracle;
pub mod prng;

/// Bipolar node output: logic 0 is -1, logic 1 is +1.
pub type Spin = i8;

/// Map a logic bit to a spin.
pub fn spin_of_bit(bit: bool) -> Spin {
    if bit {
        1
    } else {
        -1
    }
}

/// Map a spin back to a logic bit.
pub fn bit_of_spin(s: Spin) -> bool {
    s > 0
}
