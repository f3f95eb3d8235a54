//! Knapsack-type public-key cryptosystems built from short integer
//! sequences, with tooling for key-space analysis and lattice attacks.
//!
//! Three systems share one shape: a random row `x₀` is lifted through steps
//! `xᵢ = qᵢ·xᵢ₋₁ + pᵢ·εᵢ` into the public row, and a ciphertext is the dot
//! product of that row with a digit vector.
//!
//! ```
//! use knapforge::{encrypt, keygen, Message, Params, System};
//!
//! let kp = keygen(&Params::new(System::Two, 16, 1000u32).with_seed(7)).unwrap();
//! let m = Message::from_mask(16, 0xbeef);
//! let ct = encrypt(&kp.public, &m).unwrap();
//! assert_eq!(kp.private.decrypt(&ct).unwrap(), m);
//! ```

pub mod analysis;
pub mod bench;
pub mod chunk;
pub mod error;
pub mod exec;
pub mod keyfile;
pub mod lattice;
pub mod numeric;
pub mod reduction;
pub mod sis;
pub mod systems;

pub use error::{Error, Result};
pub use exec::Execution;
pub use numeric::{Int, IntMatrix, Nat, Permutation, RandomSource, Rat, Side};
pub use systems::{
    decrypt1, decrypt2, decrypt3, encrypt, keygen, keygen1, keygen2, keygen3, KeyPair, Message,
    Params, PrivateKey, PrivateKey1, PrivateKey2, PrivateKey3, PublicKey, System, Variant,
};
