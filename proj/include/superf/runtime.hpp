#pragma once

namespace superf {

/// Keeps large temporaries on the heap instead of fresh mmap pages. Training
/// allocates and frees multi-megabyte node buffers every iteration; with the
/// default glibc thresholds each one page-faults. No-op off glibc.
void configure_allocator();

}  // namespace superf
