//! Exact solvers for parallel batch scheduling with incompatible job
//! families, release dates and job sizes, minimizing total weighted
//! completion time or makespan.
//!
//! * [`domain`]: instances, solutions, the feasibility validator.
//! * [`instgen`]: seeded instance generation.
//! * [`cpcore`]: the constraint engine.
//! * [`encodings`]: the four constraint models over [`cpcore`].
//! * [`oracle`]: brute-force reference solver for tiny instances.
//! * [`bench`]: benchmark grids, metrics and CSV reports.

pub mod bench;
pub mod cpcore;
pub mod domain;
pub mod encodings;
pub mod instgen;
pub mod oracle;
