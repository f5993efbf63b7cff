//! p-adic arithmetic coding over the ring of integers mod `P^N`.
//!
//! Messages are mapped to intervals of the grid `G(P^N)`. Each grid index is
//! also a path in a `P`-ary coding tree (the index digits reversed), and the
//! encoder emits the common path of the interval edges whenever one exists
//! (PR rescaling). Intervals straddling a level-1 point are expanded around
//! it (AR rescaling) and resolved later. For `P = 2` this is integer
//! arithmetic coding; with suitable models it reproduces Huffman and
//! Golomb-Rice codes bit for bit.
//!
//! ```
//! use padic_coding::{codec, model::Model, padic::GridParams};
//!
//! let params = GridParams::new(2, 16).unwrap();
//! let model = Model::static_model(&[8, 4, 2, 2, 1], params).unwrap();
//! let msg = [0, 1, 0, 2, 3];
//! let digits = codec::encode(msg, model.clone(), Default::default()).unwrap();
//! let back = codec::decode(digits.reader(), model, Default::default()).unwrap();
//! assert_eq!(back, msg);
//! ```

pub mod codec;
pub mod digitio;
pub mod model;
pub mod oracles;
pub mod padic;

pub use codec::{decode, encode, CodecError, CodecOptions, CoderState, Decoder, Encoder};
pub use digitio::{DigitReader, DigitWriter, FlushMode, Header, ModelDescriptor, StreamError};
pub use model::{Codebook, Model, ModelError, ModelKind};
pub use padic::{DigitVec, GridError, GridParams};
