//! Example blocks shipped with the crate.

use crate::isa::{parse_block, Block};

const SOURCES: &[(&str, &str)] = &[
    ("add_lsl", include_str!("../corpus/add_lsl.asm")),
    ("and_xor_add", include_str!("../corpus/and_xor_add.asm")),
    ("inc", include_str!("../corpus/inc.asm")),
    ("isign", include_str!("../corpus/isign.asm")),
    ("mul_add", include_str!("../corpus/mul_add.asm")),
    ("roundup", include_str!("../corpus/roundup.asm")),
    ("swap", include_str!("../corpus/swap.asm")),
];

pub fn names() -> impl Iterator<Item = &'static str> {
    SOURCES.iter().map(|&(n, _)| n)
}

pub fn source(name: &str) -> Option<&'static str> {
    SOURCES.iter().find(|&&(n, _)| n == name).map(|&(_, s)| s)
}

/// Parses a bundled block; panics only if a shipped file is malformed.
pub fn block(name: &str) -> Option<Block> {
    let src = source(name)?;
    Some(parse_block(src).expect("bundled block parses").with_name(name))
}

pub fn all() -> Vec<Block> {
    names().filter_map(block).collect()
}
