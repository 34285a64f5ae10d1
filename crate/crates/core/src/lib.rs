pub mod container;
pub mod context_model;
pub mod entropy;
pub mod huffman;
pub mod ppm_codec;
pub mod stats;
