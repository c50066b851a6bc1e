// SPDX-License-Identifier: Apache-2.0

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod artifact;
pub mod engine;
pub mod bits;
pub mod fourstate;
pub mod golden;
pub mod ifspec;
pub mod romgen;
pub mod sim;
pub mod waveform;
