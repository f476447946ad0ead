#![allow(dead_code)]

pub mod formation_chain;
pub mod golden_cases;
