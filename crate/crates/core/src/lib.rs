//! A brain-computer-interface home-automation pipeline, desk-scale.
//!
//! The signal path mirrors the physical system it simulates: an occipital
//! channel carries steady-state visually evoked responses that select a
//! device class by flicker frequency; a frontal channel carries deliberate
//! eye blinks that confirm the selection; beacon RSSI reports resolve which
//! room's device is meant, letting the same two stimulus frequencies serve
//! every room. The [`session`] module wires those pieces into seeded trials
//! and measures accuracy, response time, and transfer rate.
//!
//! Layering, bottom up:
//!
//! - [`signal`], [`spectrum`], [`filter`], [`peaks`]: DSP kernels
//! - [`ssvep`], [`blink`]: the two detectors
//! - [`localization`]: wire protocol, room resolution, path-loss model
//! - [`controller`]: the select / confirm / toggle state machine
//! - [`synth`]: deterministic scenario generators (the test ground truth)
//! - [`config`], [`session`]: trial runner, metrics, reports
//!
//! ```
//! use neurohome_core::ssvep::{decide, ClassId};
//! use neurohome_core::synth::{generate_ssvep_channel, GazeInterval, Scenario};
//! use neurohome_core::StimulusTable;
//!
//! let table = StimulusTable::new(&[(1, 6.0), (2, 8.2)])?;
//! let scenario = Scenario {
//!     duration_s: 4.0,
//!     gaze_script: vec![GazeInterval {
//!         start_s: 2.0,
//!         end_s: 4.0,
//!         class_id: Some(ClassId(1)),
//!     }],
//!     ..Scenario::default()
//! };
//! let channel = generate_ssvep_channel(&scenario, &table)?;
//! let recent = channel.slice_seconds(2.0, 4.0)?;
//! let decision = decide(&recent, &channel, &table)?;
//! assert_eq!(decision.selected, Some(ClassId(1)));
//! # Ok::<(), neurohome_core::Error>(())
//! ```

pub mod blink;
pub mod config;
pub mod controller;
pub mod error;
pub mod filter;
pub mod localization;
pub mod peaks;
pub mod session;
pub mod signal;
pub mod spectrum;
pub mod ssvep;
pub mod synth;

pub use error::{Error, Result};
pub use signal::SignalWindow;
pub use ssvep::{ClassId, SsvepDecision, StimulusTable};
