//! Front end for the `weierdiv` binary.

pub mod commands;
pub mod data;
pub mod svg;
pub mod verify;
