pub mod experiments;
pub mod fragmentation;
pub mod gw_sampler;
pub mod lamination;
pub mod levy;
pub mod minimal_factorization;
pub mod plane_tree;
pub mod rng;
pub mod stats;
