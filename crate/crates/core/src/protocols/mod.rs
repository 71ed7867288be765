//! Key agreement over the wiretap channel and the symmetric cipher that
//! uses the channel as its mixing step.

mod cipher;
mod hash;
mod key_agreement;

pub use cipher::{bits_from_symbols, cipher_symbols, decrypt, encrypt, key_bits, CipherContext, Ciphertext};
pub use hash::{universal_hash, ToeplitzSeed};
pub use key_agreement::{
    encode_symbols, minimal_message_count, run_key_agreement, ChannelCoder, Coder, KeyAgreementConfig, Transcript,
};

/// Lowercase hex of a bit string packed little-endian into bytes.
pub fn bits_to_hex(bits: &[bool]) -> String {
    bits.chunks(8)
        .map(|chunk| {
            let byte = chunk.iter().enumerate().fold(0u8, |acc, (i, &b)| acc | (u8::from(b) << i));
            format!("{byte:02x}")
        })
        .collect()
}
