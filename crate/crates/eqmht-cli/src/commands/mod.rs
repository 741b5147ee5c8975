pub mod power;
pub mod tables;
pub mod verify;
