//! Porter stemming algorithm (M. F. Porter, "An algorithm for suffix
//! stripping", 1980), implemented from the original rule tables.
//!
//! Words are expected to be lowercase ASCII; anything else is returned
//! unchanged. Words of one or two letters are too short to carry a suffix
//! and are also returned unchanged.
//!
//! [`stem`] is a single pass of the five steps. The algorithm is famously
//! *almost* idempotent — "agreed" stems to "agre", which re-stems to "agr" —
//! so callers that need a stable token (the preprocessing pipeline does)
//! should use [`stem_stable`], which iterates to a fixed point.

/// One full pass of the Porter algorithm.
pub fn stem(word: &str) -> String {
    if word.len() <= 2 || !word.bytes().all(|b| b.is_ascii_lowercase()) {
        return word.to_string();
    }
    let mut w = word.as_bytes().to_vec();
    step_1a(&mut w);
    step_1b(&mut w);
    step_1c(&mut w);
    step_2(&mut w);
    step_3(&mut w);
    step_4(&mut w);
    step_5a(&mut w);
    step_5b(&mut w);
    String::from_utf8(w).expect("stemmer only manipulates ASCII")
}

/// Applies [`stem`] until the output stops changing.
pub fn stem_stable(word: &str) -> String {
    let mut current = word.to_string();
    // Each destructive pass shortens the word, so this terminates quickly;
    // the bound is just a guard.
    for _ in 0..8 {
        let next = stem(&current);
        if next == current {
            break;
        }
        current = next;
    }
    current
}

/// A letter is a consonant unless it is a/e/i/o/u, or a `y` preceded by a
/// consonant (word-initial `y` counts as a consonant).
fn is_consonant(w: &[u8], i: usize) -> bool {
    match w[i] {
        b'a' | b'e' | b'i' | b'o' | b'u' => false,
        b'y' => i == 0 || !is_consonant(w, i - 1),
        _ => true,
    }
}

/// The measure m of a stem: the number of vowel→consonant transitions,
/// i.e. the `m` in the canonical form `[C](VC)^m[V]`.
fn measure(w: &[u8]) -> usize {
    let mut m = 0;
    let mut prev_vowel = false;
    for i in 0..w.len() {
        let cons = is_consonant(w, i);
        if prev_vowel && cons {
            m += 1;
        }
        prev_vowel = !cons;
    }
    m
}

fn has_vowel(w: &[u8]) -> bool {
    (0..w.len()).any(|i| !is_consonant(w, i))
}

fn ends_double_consonant(w: &[u8]) -> bool {
    let n = w.len();
    n >= 2 && w[n - 1] == w[n - 2] && is_consonant(w, n - 1)
}

/// The *o condition: stem ends consonant-vowel-consonant where the final
/// consonant is not w, x or y.
fn ends_cvc(w: &[u8]) -> bool {
    let n = w.len();
    n >= 3
        && is_consonant(w, n - 3)
        && !is_consonant(w, n - 2)
        && is_consonant(w, n - 1)
        && !matches!(w[n - 1], b'w' | b'x' | b'y')
}

fn ends_with(w: &[u8], suffix: &[u8]) -> bool {
    w.len() > suffix.len() && w.ends_with(suffix)
}

/// SSES → SS, IES → I, SS → SS, S → "".
fn step_1a(w: &mut Vec<u8>) {
    if w.ends_with(b"sses") || ends_with(w, b"ies") {
        w.truncate(w.len() - 2);
    } else if w.ends_with(b"ss") {
        // unchanged
    } else if w.ends_with(b"s") {
        w.pop();
    }
}

/// (m>0) EED → EE; (*v*) ED → ""; (*v*) ING → "" — with the cleanup pass
/// that restores an E after AT/BL/IZ, undoubles a trailing consonant, or
/// restores an E after a short (m=1, *o) stem.
fn step_1b(w: &mut Vec<u8>) {
    if ends_with(w, b"eed") {
        if measure(&w[..w.len() - 3]) > 0 {
            w.pop();
        }
        return;
    }
    let removed = if ends_with(w, b"ed") && has_vowel(&w[..w.len() - 2]) {
        w.truncate(w.len() - 2);
        true
    } else if ends_with(w, b"ing") && has_vowel(&w[..w.len() - 3]) {
        w.truncate(w.len() - 3);
        true
    } else {
        false
    };
    if !removed {
        return;
    }
    if w.ends_with(b"at") || w.ends_with(b"bl") || w.ends_with(b"iz") {
        w.push(b'e');
    } else if ends_double_consonant(w) && !matches!(w[w.len() - 1], b'l' | b's' | b'z') {
        w.pop();
    } else if measure(w) == 1 && ends_cvc(w) {
        w.push(b'e');
    }
}

/// (*v*) Y → I.
fn step_1c(w: &mut Vec<u8>) {
    if w.ends_with(b"y") && has_vowel(&w[..w.len() - 1]) {
        let n = w.len();
        w[n - 1] = b'i';
    }
}

/// Within one step only the longest matching suffix is considered; if its
/// condition fails, the step does nothing (no fallthrough to shorter
/// suffixes). `rules` must therefore be ordered longest suffix first.
fn apply_rules(w: &mut Vec<u8>, rules: &[(&[u8], &[u8])], min_measure: usize) {
    for &(suffix, replacement) in rules {
        if ends_with(w, suffix) {
            let stem_len = w.len() - suffix.len();
            if measure(&w[..stem_len]) > min_measure {
                w.truncate(stem_len);
                w.extend_from_slice(replacement);
            }
            return;
        }
    }
}

/// The (m>0) double-suffix reductions: -ational → -ate, -izer → -ize, …
fn step_2(w: &mut Vec<u8>) {
    const RULES: &[(&[u8], &[u8])] = &[
        (b"ational", b"ate"),
        (b"ization", b"ize"),
        (b"iveness", b"ive"),
        (b"fulness", b"ful"),
        (b"ousness", b"ous"),
        (b"tional", b"tion"),
        (b"biliti", b"ble"),
        (b"ation", b"ate"),
        (b"alism", b"al"),
        (b"aliti", b"al"),
        (b"iviti", b"ive"),
        (b"ousli", b"ous"),
        (b"entli", b"ent"),
        (b"enci", b"ence"),
        (b"anci", b"ance"),
        (b"izer", b"ize"),
        (b"abli", b"able"),
        (b"alli", b"al"),
        (b"ator", b"ate"),
        (b"eli", b"e"),
    ];
    apply_rules(w, RULES, 0);
}

/// The (m>0) -icate/-ative/-alize/… reductions.
fn step_3(w: &mut Vec<u8>) {
    const RULES: &[(&[u8], &[u8])] = &[
        (b"icate", b"ic"),
        (b"ative", b""),
        (b"alize", b"al"),
        (b"iciti", b"ic"),
        (b"ical", b"ic"),
        (b"ness", b""),
        (b"ful", b""),
    ];
    apply_rules(w, RULES, 0);
}

/// The (m>1) suffix deletions. -ion additionally requires the stem to end
/// in s or t.
fn step_4(w: &mut Vec<u8>) {
    const SUFFIXES: &[&[u8]] = &[
        b"ement", b"ance", b"ence", b"able", b"ible", b"ment", b"ant", b"ent", b"ion", b"ism",
        b"ate", b"iti", b"ous", b"ive", b"ize", b"ou", b"al", b"er", b"ic",
    ];
    for &suffix in SUFFIXES {
        if ends_with(w, suffix) {
            let stem_len = w.len() - suffix.len();
            let ion_ok =
                suffix != b"ion" || matches!(w.get(stem_len.wrapping_sub(1)), Some(b's' | b't'));
            if measure(&w[..stem_len]) > 1 && ion_ok {
                w.truncate(stem_len);
            }
            return;
        }
    }
}

/// (m>1) E → ""; (m=1 and not *o) E → "".
fn step_5a(w: &mut Vec<u8>) {
    if w.ends_with(b"e") && w.len() > 1 {
        let stem = &w[..w.len() - 1];
        let m = measure(stem);
        if m > 1 || (m == 1 && !ends_cvc(stem)) {
            w.pop();
        }
    }
}

/// (m>1 and *d and *L) → drop the doubled l.
fn step_5b(w: &mut Vec<u8>) {
    if measure(w) > 1 && ends_double_consonant(w) && w.ends_with(b"l") {
        w.pop();
    }
}
