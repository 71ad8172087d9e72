use serde::{Deserialize, Serialize};

use crate::lexicon::Phoneme;

use super::{KeyBlock, ScaffoldError, ScaffoldPlan};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum EventKind {
    Enunciate,
    OfferKeyboard,
    Cue,
    Reject,
    AutoPlace,
    Place,
    Preassemble,
    Complete,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct EventDetail {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phoneme: Option<Phoneme>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chunk: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub block_id: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub blocks: Option<Vec<KeyBlock>>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub timeout: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ScaffoldEvent {
    pub kind: EventKind,
    pub step_index: usize,
    pub detail: EventDetail,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "camelCase")]
pub enum Action {
    #[serde(rename_all = "camelCase")]
    Pick { block_id: u32 },
    Timeout,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ScaffoldState {
    pub plan: ScaffoldPlan,
    pub step_index: usize,
    pub attempts_at_step: u32,
    pub placed: Vec<String>,
    pub keyboard: Vec<KeyBlock>,
    pub log: Vec<ScaffoldEvent>,
    pub complete: bool,
}

impl ScaffoldState {
    /// The block the learner should pick next.
    pub fn target(&self) -> Option<&KeyBlock> {
        self.plan.steps.get(self.step_index)?.target()
    }
}

/// Opens a plan: leading preassembled chunks are placed and the first open
/// step is enunciated.
pub fn start(plan: ScaffoldPlan) -> ScaffoldState {
    let mut state = ScaffoldState {
        plan,
        step_index: 0,
        attempts_at_step: 0,
        placed: Vec::new(),
        keyboard: Vec::new(),
        log: Vec::new(),
        complete: false,
    };
    let mut events = Vec::new();
    enter(&mut state, &mut events);
    state.log = events;
    state
}

/// Applies one learner action. The returned events are also appended to
/// the state's log.
pub fn step(
    state: &ScaffoldState,
    action: Action,
) -> Result<(ScaffoldState, Vec<ScaffoldEvent>), ScaffoldError> {
    if state.complete {
        return Err(ScaffoldError::Complete);
    }
    let target_id = state.target().map(|b| b.id);
    let picked = match action {
        Action::Pick { block_id } => {
            if !state.keyboard.iter().any(|b| b.id == block_id) {
                return Err(ScaffoldError::NotOffered(block_id));
            }
            Some(block_id)
        }
        Action::Timeout => None,
    };
    let mut next = state.clone();
    let mut events = Vec::new();
    let i = next.step_index;
    let chunk = next.plan.steps[i].chunk.clone();
    if picked.is_some() && picked == target_id {
        events.push(event(EventKind::Place, i, |d| {
            d.block_id = picked;
            d.chunk = Some(chunk.clone());
        }));
        advance(&mut next, &mut events);
    } else {
        next.attempts_at_step += 1;
        events.push(event(EventKind::Reject, i, |d| {
            d.block_id = picked;
            d.timeout = picked.is_none();
        }));
        if next.attempts_at_step >= next.plan.auto_threshold {
            events.push(event(EventKind::AutoPlace, i, |d| {
                d.block_id = target_id;
                d.chunk = Some(chunk.clone());
            }));
            advance(&mut next, &mut events);
        } else if next.attempts_at_step == next.plan.cue_threshold {
            events.push(event(EventKind::Cue, i, |d| d.block_id = target_id));
        }
    }
    next.log.extend(events.iter().cloned());
    Ok((next, events))
}

fn event(kind: EventKind, step_index: usize, fill: impl FnOnce(&mut EventDetail)) -> ScaffoldEvent {
    let mut detail = EventDetail::default();
    fill(&mut detail);
    ScaffoldEvent {
        kind,
        step_index,
        detail,
    }
}

fn advance(state: &mut ScaffoldState, events: &mut Vec<ScaffoldEvent>) {
    let chunk = state.plan.steps[state.step_index].chunk.clone();
    state.placed.push(chunk);
    state.step_index += 1;
    enter(state, events);
}

/// Settles on the next open step, placing preassembled chunks on the way.
fn enter(state: &mut ScaffoldState, events: &mut Vec<ScaffoldEvent>) {
    state.attempts_at_step = 0;
    state.keyboard.clear();
    while let Some(s) = state.plan.steps.get(state.step_index) {
        if !s.preassembled {
            break;
        }
        events.push(event(EventKind::Preassemble, state.step_index, |d| {
            d.chunk = Some(s.chunk.clone());
            d.phoneme = Some(s.phoneme);
        }));
        state.placed.push(s.chunk.clone());
        state.step_index += 1;
    }
    let i = state.step_index;
    match state.plan.steps.get(i) {
        None => {
            state.complete = true;
            let word = state.plan.target_word.clone();
            events.push(event(EventKind::Complete, i, |d| d.chunk = Some(word)));
        }
        Some(s) => {
            state.keyboard = s.keyboard.clone();
            let blocks = s.keyboard.clone();
            let ph = s.phoneme;
            events.push(event(EventKind::Enunciate, i, |d| d.phoneme = Some(ph)));
            events.push(event(EventKind::OfferKeyboard, i, |d| d.blocks = Some(blocks)));
        }
    }
}
