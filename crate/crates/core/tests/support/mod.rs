#![allow(dead_code)]

pub mod directional;
pub mod oracles;
