pub mod affine;
pub mod cli;
pub mod corpus;
pub mod encoder;
pub mod eval;
pub mod ext;
pub mod isa;
pub mod octdom;
pub mod oracle;
pub mod sat;
pub mod template;
pub mod tf;
pub mod synth;
