//! Desk-scale stand-ins for a real repair ecosystem: a tiny
//! interpreted language ([`toy`]), a ten-bug benchmark with hook
//! scripts ([`corpus`]), scripted tool behaviors ([`stub`]), and a
//! naive mutation-repair strategy that genuinely fixes the
//! single-operator bugs ([`mutator`]).

pub mod corpus;
pub mod mutator;
pub mod stub;
pub mod toy;
