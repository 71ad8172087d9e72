//! English letter names, as a child reciting the alphabet says them.

use crate::lexicon::Phoneme::{self, *};

const NAMES: [&[Phoneme]; 26] = [
    &[EY],
    &[B, IY],
    &[S, IY],
    &[D, IY],
    &[IY],
    &[EH, F],
    &[JH, IY],
    &[EY, CH],
    &[AY],
    &[JH, EY],
    &[K, EY],
    &[EH, L],
    &[EH, M],
    &[EH, N],
    &[OW],
    &[P, IY],
    &[K, Y, UW],
    &[AA, R],
    &[EH, S],
    &[T, IY],
    &[Y, UW],
    &[V, IY],
    &[D, AH, B, AH, L, Y, UW],
    &[EH, K, S],
    &[W, AY],
    &[Z, IY],
];

/// Pronunciation of the name of `letter` (case-insensitive).
pub fn letter_name(letter: char) -> Option<&'static [Phoneme]> {
    let up = letter.to_ascii_uppercase();
    up.is_ascii_uppercase()
        .then(|| NAMES[(up as u8 - b'A') as usize])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_covers_the_alphabet() {
        assert!(('A'..='Z').all(|c| letter_name(c).is_some_and(|n| !n.is_empty())));
        assert_eq!(letter_name('b'), Some(&[B, IY][..]));
        assert_eq!(letter_name('U'), Some(&[Y, UW][..]));
        assert_eq!(letter_name('E'), Some(&[IY][..]));
        assert_eq!(letter_name('?'), None);
    }
}
