//! Static word suggestions standing in for the richer word-input channels.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use crate::lexicon::Lexicon;

const TOPICS_JSON: &str = include_str!("../../data/topics.json");
/// Key of the fallback list used when no frequency data is loaded.
const COMMON: &str = "_common";
const FALLBACK_LEN: usize = 20;
const SHORT: std::ops::RangeInclusive<usize> = 3..=5;

fn table() -> &'static BTreeMap<String, Vec<String>> {
    static TABLE: OnceLock<BTreeMap<String, Vec<String>>> = OnceLock::new();
    TABLE.get_or_init(|| serde_json::from_str(TOPICS_JSON).expect("bundled topics file is valid"))
}

/// Names of the bundled topics.
pub fn topics() -> Vec<&'static str> {
    table()
        .keys()
        .filter(|k| !k.starts_with('_'))
        .map(String::as_str)
        .collect()
}

/// Buildable words for `topic`; unknown topics get frequent short words.
pub fn word_suggestions(topic: &str, lexicon: &Lexicon) -> Vec<String> {
    if lexicon.is_empty() {
        return Vec::new();
    }
    let buildable = |w: &str| lexicon.aligned_entry(w, 1).is_some();
    let key = topic.trim().to_ascii_lowercase();
    if let Some(words) = table().get(&key).filter(|_| !key.starts_with('_')) {
        let out: Vec<String> = words.iter().filter(|w| buildable(w)).cloned().collect();
        if !out.is_empty() {
            return out;
        }
    }
    let mut out: Vec<String> = lexicon
        .frequencies()
        .ranked()
        .into_iter()
        .map(|(w, _)| w)
        .filter(|w| SHORT.contains(&w.len()) && w.bytes().all(|b| b.is_ascii_uppercase()) && buildable(w))
        .take(FALLBACK_LEN)
        .map(str::to_string)
        .collect();
    if out.is_empty() {
        out = table()[COMMON].iter().filter(|w| buildable(w)).cloned().collect();
    }
    if out.is_empty() {
        let mut words: Vec<&str> = lexicon
            .aligned()
            .iter()
            .filter(|a| a.variant == 1 && SHORT.contains(&a.word.len()))
            .map(|a| a.word.as_str())
            .collect();
        words.sort_unstable();
        words.dedup();
        out = words.into_iter().take(FALLBACK_LEN).map(str::to_string).collect();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::super::tests::lex;
    use super::*;
    use crate::lexicon::WordFrequencies;

    #[test]
    fn animals_contain_cat() {
        let words = word_suggestions("Animals", &lex());
        assert!(words.contains(&"CAT".to_string()));
        assert!(words.iter().all(|w| lex().contains_word(w)));
    }

    #[test]
    fn unknown_topic_falls_back() {
        let lex = lex();
        let words = word_suggestions("astrophysics", &lex);
        assert!(!words.is_empty());
        let lex = lex.with_frequencies(WordFrequencies::parse("FISH\t-3\nCAT\t-2\nKNIGHT\t-5\n"));
        assert_eq!(word_suggestions("astrophysics", &lex), vec!["CAT", "FISH"]);
    }

    #[test]
    fn empty_lexicon_gives_nothing() {
        assert!(word_suggestions("animals", &Lexicon::empty()).is_empty());
        assert!(word_suggestions("zzz", &Lexicon::empty()).is_empty());
    }

    #[test]
    fn topic_names_hide_the_fallback_list() {
        let t = topics();
        assert!(t.contains(&"animals") && !t.contains(&"_common"));
    }
}
