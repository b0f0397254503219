//! Benchmark-only crate: the `benches/` targets measure the hot paths of
//! `repairlab-core` (contingency statistics, patched-set algebra, and
//! unified-diff rendering). There is no library code here.
