use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::pairs::PairStat;
use super::phoneme::Phoneme;
use super::LexiconError;

const BUNDLED_ROSTER: &str = include_str!("../../data/creatures.json");

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CreatureSpec {
    pub phoneme: Phoneme,
    pub name: String,
    pub action: String,
    pub sound: String,
    pub glyph_id: String,
    /// Spellings this creature can morph into, most frequent first.
    pub grapheme_forms: Vec<String>,
    /// True when the name and action come from an existing creature design.
    pub attested: bool,
}

impl CreatureSpec {
    /// The creature's most frequent spelling.
    pub fn canonical_grapheme(&self) -> &str {
        &self.grapheme_forms[0]
    }
}

#[derive(Debug, Deserialize)]
struct RosterFile {
    creatures: Vec<RosterEntry>,
}

#[derive(Debug, Deserialize)]
struct RosterEntry {
    phoneme: Phoneme,
    name: String,
    action: String,
    sound: String,
    attested: bool,
}

pub fn glyph_id(phoneme: Phoneme) -> String {
    format!("creature-{}", phoneme.symbol().to_lowercase())
}

/// Builds one creature per inventory phoneme. Forms come from the top
/// pairs; a phoneme absent from them falls back to its most frequent chunk
/// in the full table.
pub fn creature_registry(
    top: &[PairStat],
    full: &[PairStat],
) -> Result<Vec<CreatureSpec>, LexiconError> {
    let roster: RosterFile = serde_json::from_str(BUNDLED_ROSTER)
        .map_err(|e| LexiconError::InvalidModel(format!("creature roster: {e}")))?;
    let by_phoneme: HashMap<Phoneme, RosterEntry> = roster
        .creatures
        .into_iter()
        .map(|c| (c.phoneme, c))
        .collect();

    let mut out = Vec::with_capacity(Phoneme::ALL.len());
    for ph in Phoneme::ALL {
        // `top` is already ordered by descending count.
        let mut forms: Vec<String> = top
            .iter()
            .filter(|p| p.phoneme == ph)
            .map(|p| p.chunk.clone())
            .collect();
        if forms.is_empty() {
            let fallback = full
                .iter()
                .filter(|p| p.phoneme == ph)
                .max_by(|a, b| a.count.cmp(&b.count).then_with(|| b.chunk.cmp(&a.chunk)))
                .map(|p| p.chunk.clone())
                .unwrap_or_else(|| ph.symbol().to_string());
            forms.push(fallback);
        }
        let entry = by_phoneme
            .get(&ph)
            .ok_or_else(|| LexiconError::InvalidModel(format!("no creature for {ph}")))?;
        out.push(CreatureSpec {
            phoneme: ph,
            name: entry.name.clone(),
            action: entry.action.clone(),
            sound: entry.sound.clone(),
            glyph_id: glyph_id(ph),
            grapheme_forms: forms,
            attested: entry.attested,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lexicon::pairs::Positional;

    fn stat(ph: Phoneme, chunk: &str, count: u64) -> PairStat {
        PairStat {
            phoneme: ph,
            chunk: chunk.into(),
            count,
            positional: Positional {
                initial: count,
                medial: 0,
                final_: 0,
            },
        }
    }

    #[test]
    fn roster_covers_inventory_with_attested_names() {
        let top = vec![stat(Phoneme::K, "C", 10), stat(Phoneme::K, "K", 5)];
        let full = vec![
            stat(Phoneme::K, "C", 10),
            stat(Phoneme::K, "K", 5),
            stat(Phoneme::ZH, "S", 3),
            stat(Phoneme::ZH, "G", 1),
        ];
        let reg = creature_registry(&top, &full).unwrap();
        assert_eq!(reg.len(), 39);
        assert!(reg.iter().all(|c| !c.grapheme_forms.is_empty()));

        let k = reg.iter().find(|c| c.phoneme == Phoneme::K).unwrap();
        assert_eq!(k.name, "Kathy");
        assert_eq!(k.grapheme_forms, vec!["C", "K"]);
        assert!(k.attested);

        let ch = reg.iter().find(|c| c.phoneme == Phoneme::CH).unwrap();
        assert_eq!((ch.name.as_str(), ch.action.as_str()), ("Chuck", "sneeze"));

        let zh = reg.iter().find(|c| c.phoneme == Phoneme::ZH).unwrap();
        assert_eq!(zh.grapheme_forms, vec!["S"]);
        assert_eq!(zh.glyph_id, "creature-zh");
    }
}
