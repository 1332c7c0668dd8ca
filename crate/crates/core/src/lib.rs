//! Black-box groups encrypting PGL2, PSL2 and SL2 over GF(p^k), with Las
//! Vegas constructions of Sym4 (Alt4, quaternion normalizers) and subfield
//! subgroups, plus enumeration oracles to check them.

pub mod arith;
pub mod bench;
pub mod blackbox;
pub mod cli;
pub mod ff;
pub mod matgrp;
pub mod recog;
mod serde_big;
pub mod verify;
