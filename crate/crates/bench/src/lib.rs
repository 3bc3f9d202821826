//! Shared fixtures for the criterion benches in `benches/`.

use dfq::optics::{collective, reference_noise_plates, waveplate_channel};
use dfq::{encode_logical, LogicalQubit, Operator, SeedStream};

/// Collective form of the reference waveplate noise.
pub fn reference_collective() -> Operator {
    collective(
        &waveplate_channel(&reference_noise_plates()).expect("non-empty"),
        4,
    )
    .expect("unitary")
}

/// Deterministic encoded logical states.
pub fn encoded_states(n: usize, seed: u64) -> Vec<dfq::Ket> {
    let mut rng = SeedStream::new(seed);
    (0..n)
        .map(|_| encode_logical(&LogicalQubit::random(&mut rng)))
        .collect()
}
