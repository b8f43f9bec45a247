//! Truth-table SAT oracle shared by the solver tests and the acceptance run.
#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use wrapsynth::sat::Lit;

/// Bit-sliced truth table: variables 0..6 vary inside a 64-bit word, the rest
/// select the word. Returns whether some assignment satisfies every clause.
pub fn brute_sat(n: u32, clauses: &[Vec<Lit>]) -> bool {
    const LANES: [u64; 6] = [
        0xAAAA_AAAA_AAAA_AAAA,
        0xCCCC_CCCC_CCCC_CCCC,
        0xF0F0_F0F0_F0F0_F0F0,
        0xFF00_FF00_FF00_FF00,
        0xFFFF_0000_FFFF_0000,
        0xFFFF_FFFF_0000_0000,
    ];
    let low = n.min(6);
    let valid = if low == 6 { u64::MAX } else { (1u64 << (1u32 << low)) - 1 };
    let words = 1u64 << n.saturating_sub(6);
    for word in 0..words {
        let mut alive = valid;
        for c in clauses {
            let mut sat = 0u64;
            for l in c {
                let v = l.var();
                let bits = if v < 6 { LANES[v as usize] } else if word >> (v - 6) & 1 == 1 { u64::MAX } else { 0 };
                sat |= if l.is_negative() { !bits } else { bits };
            }
            alive &= sat;
            if alive == 0 {
                break;
            }
        }
        if alive != 0 {
            return true;
        }
    }
    false
}

pub fn random_formula(rng: &mut ChaCha8Rng) -> (u32, Vec<Vec<Lit>>) {
    let n = rng.gen_range(1..=20u32);
    // Around the 3-SAT threshold so both answers are common.
    let m = (n as f64 * rng.gen_range(2.5..6.0)) as usize + 1;
    let clauses = (0..m)
        .map(|_| {
            let len = match rng.gen_range(0..10) {
                0 => 1,
                1 | 2 => 2,
                3..=7 => 3,
                _ => 4,
            };
            (0..len).map(|_| Lit::new(rng.gen_range(0..n), rng.gen())).collect()
        })
        .collect();
    (n, clauses)
}

