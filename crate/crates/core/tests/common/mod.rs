#![allow(dead_code)]

pub mod conics;
