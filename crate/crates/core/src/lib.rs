//! Secondary-link transmit beamforming for MIMO spectrum sharing.
//!
//! A secondary transmitter shares spectrum with `K` licensed primary links and
//! must keep the interference power at every primary receiver below a
//! threshold. Depending on how much the secondary transmitter knows about the
//! channels to the primary receivers, the interference constraints are
//! deterministic (full knowledge), probabilistic over the receive beamformer
//! (channel known, beamformer unknown), or probabilistic over both (no
//! knowledge). All three cases reduce to a homogeneous complex QCQP
//!
//! ```text
//! max  t^H A t   s.t.  t^H Q_k t <= 1 (k = 1..K),  ||t||^2 <= P_max
//! ```
//!
//! which this crate builds from sampled network realizations and solves via
//! its SDP relaxation. Rank-one solutions are recovered exactly for `K <= 2`,
//! by randomized phase rounding for `K >= 3`, and by a single eigenpair
//! computation in the no-knowledge case.
//!
//! Modules follow the pipeline: [`channel`] samples Rayleigh networks,
//! [`problem`] builds the QCQP, [`sdp`] solves the relaxation, [`extract`]
//! recovers beamformers, [`validate`] provides independent Monte Carlo and
//! brute-force oracles, and [`config`] parses the JSON configuration format.

pub mod channel;
pub mod config;
pub mod error;
pub mod extract;
pub mod linalg;
pub mod problem;
pub mod rng;
pub mod sdp;
pub mod validate;

pub use channel::{NetworkRealization, NetworkSetup, PrimaryLink, ReceiverKind};
pub use error::{Error, Result};
pub use extract::{BeamformerResult, Provenance, SolveOutcome};
pub use problem::{InterferenceSpec, QcqpProblem, Scenario};
pub use rng::SeededStream;
pub use sdp::{KktReport, SdpInstance, SdpSolution, SdpStatus, SdpTolerances};
