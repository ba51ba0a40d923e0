pub mod catalog;
pub mod coeff;
pub mod exprlang;
pub mod jets;
pub mod lucas;
pub mod par;
pub mod quad;
pub mod roots;
pub mod specials;
pub mod sturm;
pub mod verify;
