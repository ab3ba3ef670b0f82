pub use bellrand_core as core;
