#![allow(dead_code)]

pub mod ou;
pub mod reference;
pub mod samples;
