//! Syllable-break heuristic used to generate hyphenation patterns.

pub const DEFAULT_MAX_BREAKS: usize = 4;

const DIGRAPHS: [&str; 7] = ["ch", "ck", "gh", "ph", "sh", "th", "wh"];

fn is_vowel(chars: &[char], i: usize) -> bool {
    match chars[i] {
        'a' | 'e' | 'i' | 'o' | 'u' => true,
        'y' => i > 0,
        _ => false,
    }
}

fn is_consonant(chars: &[char], i: usize) -> bool {
    chars[i].is_alphabetic() && !is_vowel(chars, i)
}

fn digraph(chars: &[char], i: usize) -> bool {
    i + 1 < chars.len() && {
        let pair: String = chars[i..i + 2].iter().collect();
        DIGRAPHS.contains(&pair.as_str())
    }
}

/// Break positions (char offsets; a break at `b` splits `word[..b]` from
/// `word[b..]`), ascending. Rules: V|CV, VC|CV, and V|DV for a digraph
/// onset D. Breaks inside the first 2 or last 3 characters are dropped.
pub fn syllable_breaks(word: &str) -> Vec<usize> {
    let chars: Vec<char> = word.chars().collect();
    let len = chars.len();
    if len < 5 {
        return Vec::new();
    }
    let mut out = Vec::new();
    for b in 2..=len - 3 {
        let v = |i: usize| is_vowel(&chars, i);
        let c = |i: usize| is_consonant(&chars, i);
        let open = v(b - 1) && c(b) && v(b + 1);
        let closed = b >= 2 && v(b - 2) && c(b - 1) && c(b) && v(b + 1) && !digraph(&chars, b - 1);
        let onset = v(b - 1) && b + 2 < len && digraph(&chars, b) && v(b + 2);
        if open || closed || onset {
            out.push(b);
        }
    }
    out
}

/// At most `max` breaks, preferring those nearest the middle of the word.
pub fn priority_breaks(word: &str, max: usize) -> Vec<usize> {
    let mut all = syllable_breaks(word);
    let twice_mid = word.chars().count();
    all.sort_by_key(|&b| ((2 * b).abs_diff(twice_mid), b));
    all.truncate(max);
    all.sort_unstable();
    all
}

/// Splits `word` at `breaks`, adding a hyphen to every line but the last.
pub fn split_lines(word: &str, breaks: &[usize]) -> Vec<String> {
    let chars: Vec<char> = word.chars().collect();
    let mut lines = Vec::with_capacity(breaks.len() + 1);
    let mut start = 0;
    for &b in breaks {
        let mut line: String = chars[start..b].iter().collect();
        line.push('-');
        lines.push(line);
        start = b;
    }
    lines.push(chars[start..].iter().collect());
    lines
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn short_words_have_no_breaks() {
        assert!(syllable_breaks("beer").is_empty());
        assert!(syllable_breaks("a").is_empty());
        assert!(syllable_breaks("").is_empty());
    }

    #[test]
    fn guard_window() {
        for w in ["visualization", "information", "representation", "semantics", "hyphenation"] {
            let b = syllable_breaks(w);
            assert!(!b.is_empty(), "{w}");
            let len = w.chars().count();
            assert!(b.iter().all(|&i| (2..=len - 3).contains(&i)), "{w}: {b:?}");
        }
    }

    #[test]
    fn known_splits() {
        assert_eq!(syllable_breaks("monkey"), vec![3]);
        assert_eq!(syllable_breaks("visualization"), vec![2, 5, 7, 9]);
        assert_eq!(split_lines("monkey", &[3]), vec!["mon-", "key"]);
        assert_eq!(syllable_breaks("mother"), vec![2]);
    }

    #[test]
    fn priority_prefers_middle() {
        let b = priority_breaks("visualization", 2);
        assert_eq!(b, vec![5, 7]);
        assert_eq!(priority_breaks("visualization", 10), syllable_breaks("visualization"));
    }
}
