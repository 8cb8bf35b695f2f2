//! Fixed partitioning of subset enumerations.
//!
//! Subset sums are split into a fixed number of contiguous chunks of the
//! Gray-code sequence. The split depends only on the number of elements, so
//! summing chunk results in chunk order gives bit-identical totals whether the
//! chunks run serially or on any number of threads.

use alloc::vec::Vec;
use core::ops::Range;

/// log2 of the maximal number of chunks.
pub const CHUNKS_LOG2: u32 = 6;

/// Binary-reflected Gray code of `i`.
#[inline]
pub fn gray(i: u64) -> u64 {
    i ^ (i >> 1)
}

/// Chunk ranges over the indices `0..2^elements` of the Gray sequence.
pub fn chunks(elements: usize) -> Vec<Range<u64>> {
    assert!(elements < 64, "subset enumeration over {elements} elements");
    let total = 1u64 << elements;
    let log = CHUNKS_LOG2.min(elements as u32);
    let size = total >> log;
    (0..(1u64 << log)).map(|c| c * size..(c + 1) * size).collect()
}

/// Sums `chunk_sum` over all chunks, in chunk order.
pub fn serial_sum<E>(
    elements: usize,
    mut chunk_sum: impl FnMut(Range<u64>) -> Result<f64, E>,
) -> Result<f64, E> {
    let mut total = 0.0;
    for r in chunks(elements) {
        total += chunk_sum(r)?;
    }
    Ok(total)
}
