//! Goldbach partition sequences and what can be built on them.
//!
//! * [`primes`]: bit-packed sieve, the single primality authority.
//! * [`sequences`]: partitions, circles, `(1,k)` ellipses, m- and b-sequences,
//!   the partition-parity sequence.
//! * [`analysis`]: autocorrelation, sliding-window pattern counts, substring
//!   location.
//! * [`export`]: CSV / JSON output of the above.
//! * [`reference`]: published table values and comparison reports.
//! * [`protocol`]: trusted-third-party session keys chosen as an alternative
//!   Goldbach partition of the two parties' secret primes, plus a framed
//!   wire format, audit log and d-sequence keystream.

pub mod analysis;
pub mod error;
pub mod export;
pub mod primes;
pub mod protocol;
pub mod reference;
pub mod sequences;

pub use error::{Error, Result};
pub use primes::PrimeSieve;
