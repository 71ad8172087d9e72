//! Blocks, word boxes and the invented-spelling interpreter.

pub mod blocks;
pub mod g2p;
pub mod interpret;
pub mod names;
pub mod render;

pub use blocks::{
    clear, insert, move_block, reflow, remove, toggle_display, Block, BoxMode, DisplayMode,
    Payload, WordBox, WordBoxError,
};
pub use interpret::{interpret, interpret_with, Channel, Interpretation, InterpreterConfig};
pub use names::letter_name;
pub use render::{default_chunk, pronounce_letters, render_detailed, render_phonemes, Rendering};
