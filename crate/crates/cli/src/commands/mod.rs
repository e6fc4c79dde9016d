pub mod augment;
pub mod calibrate;
pub mod evaluate;
pub mod fuse;
pub mod overlay;
pub mod refine_depth;
pub mod synth;
