use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Broad articulatory class of a phoneme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PhonemeClass {
    Vowel,
    Plosive,
    Fricative,
    Affricate,
    Nasal,
    Approximant,
}

impl PhonemeClass {
    pub fn is_consonant(self) -> bool {
        self != PhonemeClass::Vowel
    }

    pub fn group(self) -> KeyGroup {
        match self {
            PhonemeClass::Vowel => KeyGroup::Vowels,
            PhonemeClass::Fricative | PhonemeClass::Affricate => KeyGroup::Fricatives,
            PhonemeClass::Plosive => KeyGroup::Plosives,
            PhonemeClass::Nasal | PhonemeClass::Approximant => KeyGroup::Sonorants,
        }
    }
}

/// Coarser grouping used for keyboard regions and scaffold distractors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KeyGroup {
    /// Fricatives and affricates.
    Fricatives,
    Plosives,
    /// Nasals and approximants.
    Sonorants,
    Vowels,
}

impl KeyGroup {
    pub const CONSONANTS: [KeyGroup; 3] = [KeyGroup::Fricatives, KeyGroup::Plosives, KeyGroup::Sonorants];

    pub fn members(self) -> Vec<Phoneme> {
        Phoneme::ALL.into_iter().filter(|p| p.group() == self).collect()
    }
}

/// Number of entries in an articulatory feature vector.
pub const FEATURE_LEN: usize = 7;

/// Upper bound of each feature, used to scale features to the unit range.
///
/// Order: voicing, place, manner, height, backness, rounding, diphthong.
pub const FEATURE_RANGES: [u8; FEATURE_LEN] = [1, 6, 5, 3, 3, 1, 1];

macro_rules! inventory {
    ($( $variant:ident => $ipa:literal, $class:ident, [$($f:literal),*] ;)*) => {
        /// One of the 39 stress-free ARPAbet phonemes used by the CMU dictionary.
        ///
        /// Variants are declared in symbol order so that the derived `Ord`
        /// agrees with lexicographic ordering of the ARPAbet codes.
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub enum Phoneme {
            $($variant,)*
        }

        impl Phoneme {
            pub const ALL: [Phoneme; 39] = [$(Phoneme::$variant,)*];

            pub fn symbol(self) -> &'static str {
                match self {
                    $(Phoneme::$variant => stringify!($variant),)*
                }
            }

            /// IPA display string.
            pub fn ipa(self) -> &'static str {
                match self {
                    $(Phoneme::$variant => $ipa,)*
                }
            }

            pub fn class(self) -> PhonemeClass {
                match self {
                    $(Phoneme::$variant => PhonemeClass::$class,)*
                }
            }

            /// Articulatory features: voicing, place (0 bilabial .. 6 velar/glottal),
            /// manner (0 plosive, 1 affricate, 2 fricative, 3 nasal, 4 approximant,
            /// 5 vowel), height (0 low .. 3 high), backness (0 front .. 3 back),
            /// rounding, diphthong.
            pub fn features(self) -> [u8; FEATURE_LEN] {
                match self {
                    $(Phoneme::$variant => [$($f),*],)*
                }
            }
        }

        impl FromStr for Phoneme {
            type Err = UnknownPhoneme;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                match s {
                    $(stringify!($variant) => Ok(Phoneme::$variant),)*
                    _ => Err(UnknownPhoneme(s.to_string())),
                }
            }
        }
    };
}

inventory! {
    AA => "ɑ",  Vowel,       [1, 3, 5, 0, 3, 0, 0];
    AE => "æ",  Vowel,       [1, 3, 5, 0, 0, 0, 0];
    AH => "ʌ",  Vowel,       [1, 3, 5, 1, 2, 0, 0];
    AO => "ɔ",  Vowel,       [1, 3, 5, 1, 3, 1, 0];
    AW => "aʊ", Vowel,       [1, 3, 5, 0, 2, 0, 1];
    AY => "aɪ", Vowel,       [1, 3, 5, 0, 1, 0, 1];
    B  => "b",  Plosive,     [1, 0, 0, 0, 0, 0, 0];
    CH => "tʃ", Affricate,   [0, 4, 1, 0, 0, 0, 0];
    D  => "d",  Plosive,     [1, 3, 0, 0, 0, 0, 0];
    DH => "ð",  Fricative,   [1, 2, 2, 0, 0, 0, 0];
    EH => "ɛ",  Vowel,       [1, 3, 5, 1, 0, 0, 0];
    ER => "ɝ",  Vowel,       [1, 3, 5, 2, 2, 0, 0];
    EY => "eɪ", Vowel,       [1, 3, 5, 2, 0, 0, 1];
    F  => "f",  Fricative,   [0, 1, 2, 0, 0, 0, 0];
    G  => "ɡ",  Plosive,     [1, 6, 0, 0, 0, 0, 0];
    HH => "h",  Fricative,   [0, 6, 2, 0, 0, 0, 0];
    IH => "ɪ",  Vowel,       [1, 3, 5, 2, 1, 0, 0];
    IY => "i",  Vowel,       [1, 3, 5, 3, 0, 0, 0];
    JH => "dʒ", Affricate,   [1, 4, 1, 0, 0, 0, 0];
    K  => "k",  Plosive,     [0, 6, 0, 0, 0, 0, 0];
    L  => "l",  Approximant, [1, 3, 4, 0, 0, 0, 0];
    M  => "m",  Nasal,       [1, 0, 3, 0, 0, 0, 0];
    N  => "n",  Nasal,       [1, 3, 3, 0, 0, 0, 0];
    NG => "ŋ",  Nasal,       [1, 6, 3, 0, 0, 0, 0];
    OW => "oʊ", Vowel,       [1, 3, 5, 2, 3, 1, 1];
    OY => "ɔɪ", Vowel,       [1, 3, 5, 1, 3, 1, 1];
    P  => "p",  Plosive,     [0, 0, 0, 0, 0, 0, 0];
    R  => "ɹ",  Approximant, [1, 4, 4, 0, 0, 0, 0];
    S  => "s",  Fricative,   [0, 3, 2, 0, 0, 0, 0];
    SH => "ʃ",  Fricative,   [0, 4, 2, 0, 0, 0, 0];
    T  => "t",  Plosive,     [0, 3, 0, 0, 0, 0, 0];
    TH => "θ",  Fricative,   [0, 2, 2, 0, 0, 0, 0];
    UH => "ʊ",  Vowel,       [1, 3, 5, 2, 2, 1, 0];
    UW => "u",  Vowel,       [1, 3, 5, 3, 3, 1, 0];
    V  => "v",  Fricative,   [1, 1, 2, 0, 0, 0, 0];
    W  => "w",  Approximant, [1, 0, 4, 0, 0, 1, 0];
    Y  => "j",  Approximant, [1, 5, 4, 0, 0, 0, 0];
    Z  => "z",  Fricative,   [1, 3, 2, 0, 0, 0, 0];
    ZH => "ʒ",  Fricative,   [1, 4, 2, 0, 0, 0, 0];
}

impl Phoneme {
    pub fn is_vowel(self) -> bool {
        self.class() == PhonemeClass::Vowel
    }

    pub fn group(self) -> KeyGroup {
        self.class().group()
    }

    /// Features divided by their ranges, so every coordinate lies in [0, 1].
    pub fn unit_features(self) -> [f64; FEATURE_LEN] {
        let raw = self.features();
        let mut out = [0.0; FEATURE_LEN];
        for (k, v) in raw.iter().enumerate() {
            out[k] = f64::from(*v) / f64::from(FEATURE_RANGES[k]);
        }
        out
    }

    /// Euclidean distance between unit-scaled feature vectors.
    pub fn feature_distance(self, other: Phoneme) -> f64 {
        let a = self.unit_features();
        let b = other.unit_features();
        a.iter()
            .zip(b.iter())
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            .sqrt()
    }

    /// Dense index in `Phoneme::ALL`.
    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Phoneme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

impl Serialize for Phoneme {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.symbol())
    }
}

impl<'de> Deserialize<'de> for Phoneme {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown phoneme symbol {0:?}")]
pub struct UnknownPhoneme(pub String);

/// Parse a whitespace-separated phoneme string such as `"T R AH K"`.
/// Stress digits are accepted and dropped.
pub fn parse_phonemes(text: &str) -> Result<Vec<Phoneme>, UnknownPhoneme> {
    text.split_whitespace()
        .map(|tok| tok.trim_end_matches(['0', '1', '2']).parse())
        .collect()
}

pub fn join_phonemes(phonemes: &[Phoneme]) -> String {
    phonemes
        .iter()
        .map(|p| p.symbol())
        .collect::<Vec<_>>()
        .join(" ")
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn inventory_is_39_unique_sorted_symbols() {
        assert_eq!(Phoneme::ALL.len(), 39);
        let symbols: HashSet<_> = Phoneme::ALL.iter().map(|p| p.symbol()).collect();
        assert_eq!(symbols.len(), 39);
        for pair in Phoneme::ALL.windows(2) {
            assert!(pair[0].symbol() < pair[1].symbol());
            assert!(pair[0] < pair[1]);
        }
        for (i, p) in Phoneme::ALL.iter().enumerate() {
            assert_eq!(p.index(), i);
            assert_eq!(p.symbol().parse::<Phoneme>().unwrap(), *p);
        }
    }

    #[test]
    fn feature_vectors_are_distinct_and_in_range() {
        let vectors: HashSet<_> = Phoneme::ALL.iter().map(|p| p.features()).collect();
        assert_eq!(vectors.len(), 39);
        for p in Phoneme::ALL {
            for (v, max) in p.features().iter().zip(FEATURE_RANGES) {
                assert!(*v <= max, "{p}");
            }
            assert_eq!(p.features()[2] == 5, p.is_vowel());
        }
    }

    #[test]
    fn class_counts() {
        let count = |c| Phoneme::ALL.iter().filter(|p| p.class() == c).count();
        assert_eq!(count(PhonemeClass::Vowel), 15);
        assert_eq!(count(PhonemeClass::Plosive), 6);
        assert_eq!(count(PhonemeClass::Fricative), 9);
        assert_eq!(count(PhonemeClass::Affricate), 2);
        assert_eq!(count(PhonemeClass::Nasal), 3);
        assert_eq!(count(PhonemeClass::Approximant), 4);
    }

    #[test]
    fn parse_strips_stress() {
        assert_eq!(
            parse_phonemes("T R AH1 K").unwrap(),
            vec![Phoneme::T, Phoneme::R, Phoneme::AH, Phoneme::K]
        );
        assert!(parse_phonemes("T XX").is_err());
        assert_eq!(parse_phonemes("").unwrap(), vec![]);
    }

    #[test]
    fn serde_uses_symbols() {
        let json = serde_json::to_string(&vec![Phoneme::CH, Phoneme::AE]).unwrap();
        assert_eq!(json, r#"["CH","AE"]"#);
        let back: Vec<Phoneme> = serde_json::from_str(&json).unwrap();
        assert_eq!(back, vec![Phoneme::CH, Phoneme::AE]);
    }
}
