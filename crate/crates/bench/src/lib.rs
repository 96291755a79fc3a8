//! Benchmark harness for the simulator kernels; see `benches/`.
