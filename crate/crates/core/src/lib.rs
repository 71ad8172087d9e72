//! Phoneme blocks for early spelling.
//!
//! `lexicon` aligns a pronouncing dictionary into grapheme chunks, `wordplay`
//! turns blocks into spellings and guesses which word a block sequence
//! means, `scaffold` walks a child through a word one sound at a time,
//! `layout` places the phoneme keyboard, and `study` simulates and models
//! the letter-versus-creature minigame. `session` ties them into replayable
//! event logs.

pub mod layout;
pub mod lexicon;
pub mod scaffold;
pub mod session;
pub mod study;
pub mod wordplay;

pub use layout::{GridConfig, LayoutGrid, MdsConfig};
pub use lexicon::{Lexicon, LexiconConfig, LexiconError, PairStat, Phoneme, PronEntry};
pub use scaffold::{Action, ScaffoldConfig, ScaffoldEvent, ScaffoldPlan, ScaffoldState};
pub use session::{Command, Output, SessionError, SessionInit, SessionKind, SessionState};
pub use study::{Condition, McmcConfig, ModelFit, Response, StudyError, TrialRecord, TrialSpec};
pub use wordplay::{Block, BoxMode, DisplayMode, Interpretation, InterpreterConfig, Payload, WordBox};
