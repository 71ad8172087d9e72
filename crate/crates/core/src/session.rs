//! Event-sourced sessions.
//!
//! A session log is JSON Lines: a header naming the session kind and its
//! parameters, then one line per accepted command. State is never stored;
//! it is the fold of the commands over the pure transition functions, so
//! replaying a log gives back the live state exactly.

use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::layout::creature_order;
use crate::lexicon::{glyph_id, Lexicon, Phoneme};
use crate::scaffold::{self, Action, ScaffoldConfig, ScaffoldError, ScaffoldEvent, ScaffoldState};
use crate::study::{AnswerOutcome, Minigame, MinigameConfig, StudyError};
use crate::wordplay::{self, BoxMode, DisplayMode, Payload, WordBox, WordBoxError};

pub const LOG_SCHEMA: &str = "phonoblocks.session/1";

#[derive(Debug, thiserror::Error)]
pub enum SessionError {
    #[error(transparent)]
    WordBox(#[from] WordBoxError),
    #[error(transparent)]
    Scaffold(#[from] ScaffoldError),
    #[error(transparent)]
    Study(#[from] StudyError),
    #[error("{command} does not apply to a {kind:?} session")]
    WrongKind { command: &'static str, kind: SessionKind },
    #[error("log line {line}: {message}")]
    Corrupt { line: usize, message: String },
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SessionKind {
    Freeplay,
    Scaffolded,
    Minigame,
}

/// Everything needed to create a session's initial state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum SessionInit {
    Freeplay {
        mode: BoxMode,
    },
    Scaffolded {
        word: String,
        #[serde(default)]
        config: ScaffoldConfig,
    },
    Minigame {
        config: MinigameConfig,
    },
}

impl SessionInit {
    pub fn kind(&self) -> SessionKind {
        match self {
            SessionInit::Freeplay { .. } => SessionKind::Freeplay,
            SessionInit::Scaffolded { .. } => SessionKind::Scaffolded,
            SessionInit::Minigame { .. } => SessionKind::Minigame,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "camelCase", deny_unknown_fields)]
pub enum Command {
    Insert {
        payload: Payload,
        #[serde(default)]
        index: Option<usize>,
    },
    #[serde(rename_all = "camelCase")]
    Remove { block_id: u32 },
    #[serde(rename_all = "camelCase")]
    Move { block_id: u32, to: usize },
    Clear,
    #[serde(rename_all = "camelCase")]
    ToggleDisplay { display_mode: DisplayMode },
    Place { action: Action },
    #[serde(rename_all = "camelCase")]
    Answer { symbol: String, elapsed_ms: f64 },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Insert { .. } => "insert",
            Command::Remove { .. } => "remove",
            Command::Move { .. } => "move",
            Command::Clear => "clear",
            Command::ToggleDisplay { .. } => "toggleDisplay",
            Command::Place { .. } => "place",
            Command::Answer { .. } => "answer",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SessionState {
    Freeplay {
        #[serde(rename = "wordBox")]
        word_box: WordBox,
    },
    Scaffolded {
        scaffold: ScaffoldState,
        #[serde(rename = "displayMode")]
        display_mode: DisplayMode,
    },
    Minigame {
        minigame: Minigame,
    },
}

/// What a transition reports back to the caller besides the new state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "camelCase")]
pub enum Output {
    None,
    Events { events: Vec<ScaffoldEvent> },
    Answer { outcome: AnswerOutcome },
}

/// Creature keys for the minigame, falling back to glyph ids by phoneme
/// when the lexicon has no registry.
pub fn creature_keys(lexicon: &Lexicon) -> Vec<String> {
    if lexicon.creatures().is_empty() {
        Phoneme::ALL.iter().map(|&p| glyph_id(p)).collect()
    } else {
        creature_order(lexicon.creatures())
    }
}

impl SessionState {
    pub fn kind(&self) -> SessionKind {
        match self {
            SessionState::Freeplay { .. } => SessionKind::Freeplay,
            SessionState::Scaffolded { .. } => SessionKind::Scaffolded,
            SessionState::Minigame { .. } => SessionKind::Minigame,
        }
    }

    pub fn init(init: &SessionInit, lexicon: &Lexicon) -> Result<(SessionState, Output), SessionError> {
        Ok(match init {
            SessionInit::Freeplay { mode } => (
                SessionState::Freeplay {
                    word_box: WordBox::new(*mode),
                },
                Output::None,
            ),
            SessionInit::Scaffolded { word, config } => {
                let plan = scaffold::plan(word, lexicon, config)?;
                let state = scaffold::start(plan);
                let events = state.log.clone();
                (
                    SessionState::Scaffolded {
                        scaffold: state,
                        display_mode: DisplayMode::Letters,
                    },
                    Output::Events { events },
                )
            }
            SessionInit::Minigame { config } => (
                SessionState::Minigame {
                    minigame: Minigame::start(config.clone(), &creature_keys(lexicon))?,
                },
                Output::None,
            ),
        })
    }

    /// Applies one command. On error the state is unchanged.
    pub fn apply(&self, command: &Command, lexicon: &Lexicon) -> Result<(SessionState, Output), SessionError> {
        let wrong = || SessionError::WrongKind {
            command: command.name(),
            kind: self.kind(),
        };
        match (self, command) {
            (SessionState::Freeplay { word_box }, cmd) => {
                let next = match cmd {
                    Command::Insert { payload, index } => wordplay::insert(word_box, *index, *payload, lexicon)?,
                    Command::Remove { block_id } => wordplay::remove(word_box, *block_id, lexicon)?,
                    Command::Move { block_id, to } => wordplay::move_block(word_box, *block_id, *to, lexicon)?,
                    Command::Clear => wordplay::clear(word_box),
                    Command::ToggleDisplay { display_mode } => wordplay::toggle_display(word_box, *display_mode, lexicon),
                    _ => return Err(wrong()),
                };
                Ok((SessionState::Freeplay { word_box: next }, Output::None))
            }
            (SessionState::Scaffolded { scaffold: s, display_mode }, cmd) => match cmd {
                Command::Place { action } => {
                    let (next, events) = scaffold::step(s, *action)?;
                    Ok((
                        SessionState::Scaffolded {
                            scaffold: next,
                            display_mode: *display_mode,
                        },
                        Output::Events { events },
                    ))
                }
                Command::ToggleDisplay { display_mode } => Ok((
                    SessionState::Scaffolded {
                        scaffold: s.clone(),
                        display_mode: *display_mode,
                    },
                    Output::None,
                )),
                _ => Err(wrong()),
            },
            (SessionState::Minigame { minigame }, Command::Answer { symbol, elapsed_ms }) => {
                let mut next = minigame.clone();
                let outcome = next.answer(symbol, *elapsed_ms)?;
                Ok((SessionState::Minigame { minigame: next }, Output::Answer { outcome }))
            }
            (SessionState::Minigame { .. }, _) => Err(wrong()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct LogHeader {
    pub schema: String,
    pub session_id: String,
    pub init: SessionInit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct LogEntry {
    pub seq: u64,
    pub command: Command,
}

/// Append-only writer; every line is flushed before `append` returns.
#[derive(Debug)]
pub struct LogWriter {
    file: File,
    next_seq: u64,
}

impl LogWriter {
    pub fn create(path: &Path, header: &LogHeader) -> Result<LogWriter, SessionError> {
        let file = OpenOptions::new().create_new(true).append(true).open(path)?;
        let mut w = LogWriter { file, next_seq: 1 };
        w.write_line(&serde_json::to_string(header).map_err(std::io::Error::other)?)?;
        Ok(w)
    }

    pub fn append(&mut self, command: &Command) -> Result<(), SessionError> {
        let entry = LogEntry {
            seq: self.next_seq,
            command: command.clone(),
        };
        self.write_line(&serde_json::to_string(&entry).map_err(std::io::Error::other)?)?;
        self.next_seq += 1;
        Ok(())
    }

    fn write_line(&mut self, line: &str) -> Result<(), SessionError> {
        let mut buf = Vec::with_capacity(line.len() + 1);
        buf.extend_from_slice(line.as_bytes());
        buf.push(b'\n');
        self.file.write_all(&buf)?;
        self.file.flush()?;
        Ok(())
    }

    pub fn sync(&mut self) -> Result<(), SessionError> {
        self.file.sync_data()?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Replayed {
    pub header: LogHeader,
    pub state: SessionState,
    pub commands: u64,
    /// True when a partial final line (no newline, unparseable) was ignored.
    pub truncated_tail: bool,
}

/// Rebuilds a session from its log.
///
/// A final line that was cut off mid-write is skipped; any other bad line
/// stops the replay with its 1-based line number.
pub fn replay(path: &Path, lexicon: &Lexicon) -> Result<Replayed, SessionError> {
    let mut reader = BufReader::new(File::open(path)?);
    let mut raw = Vec::new();
    let mut line_no = 0usize;
    let mut header: Option<LogHeader> = None;
    let mut state: Option<SessionState> = None;
    let mut commands = 0u64;
    let mut truncated_tail = false;
    loop {
        raw.clear();
        let n = reader.read_until(b'\n', &mut raw)?;
        if n == 0 {
            break;
        }
        line_no += 1;
        let complete = raw.last() == Some(&b'\n');
        let corrupt = |message: String| SessionError::Corrupt { line: line_no, message };
        let text = match std::str::from_utf8(&raw) {
            Ok(t) => t.trim_end_matches(['\n', '\r']),
            Err(_) if !complete => {
                truncated_tail = true;
                break;
            }
            Err(e) => return Err(corrupt(e.to_string())),
        };
        if text.trim().is_empty() {
            continue;
        }
        match (&header, &state) {
            (None, _) => {
                let h: LogHeader = match serde_json::from_str(text) {
                    Ok(h) => h,
                    Err(_) if !complete => {
                        truncated_tail = true;
                        break;
                    }
                    Err(e) => return Err(corrupt(e.to_string())),
                };
                if h.schema != LOG_SCHEMA {
                    return Err(corrupt(format!("unsupported schema {:?}", h.schema)));
                }
                let (s, _) = SessionState::init(&h.init, lexicon).map_err(|e| corrupt(e.to_string()))?;
                header = Some(h);
                state = Some(s);
            }
            (Some(_), Some(s)) => {
                let entry: LogEntry = match serde_json::from_str(text) {
                    Ok(e) => e,
                    Err(_) if !complete => {
                        truncated_tail = true;
                        break;
                    }
                    Err(e) => return Err(corrupt(e.to_string())),
                };
                if entry.seq != commands + 1 {
                    return Err(corrupt(format!("expected seq {}, found {}", commands + 1, entry.seq)));
                }
                let (next, _) = s.apply(&entry.command, lexicon).map_err(|e| corrupt(e.to_string()))?;
                state = Some(next);
                commands += 1;
            }
            (Some(_), None) => unreachable!("header and state are set together"),
        }
    }
    match (header, state) {
        (Some(header), Some(state)) => Ok(Replayed {
            header,
            state,
            commands,
            truncated_tail,
        }),
        _ => Err(SessionError::Corrupt {
            line: line_no.max(1),
            message: "log has no header".into(),
        }),
    }
}
