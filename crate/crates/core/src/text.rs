//! Small string helpers shared by the checkers.

/// Canonical form used whenever two surfaces are compared for equality:
/// trimmed, lower-cased, internal whitespace collapsed to single spaces.
pub fn normalize(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for word in s.split_whitespace() {
        if !out.is_empty() {
            out.push(' ');
        }
        out.extend(word.chars().flat_map(char::to_lowercase));
    }
    out
}

/// Finds the leftmost byte range of `needle` in `haystack` that does not
/// intersect any of the `taken` ranges. Exact matches are preferred; an
/// ASCII case-insensitive match is used as a fallback.
pub(crate) fn find_free(
    haystack: &str,
    needle: &str,
    taken: &[(usize, usize)],
) -> Option<(usize, usize)> {
    if needle.is_empty() {
        return None;
    }
    let free = |start: usize| {
        let end = start + needle.len();
        taken.iter().all(|&(s, e)| end <= s || start >= e)
    };
    for (start, _) in haystack.match_indices(needle) {
        if free(start) {
            return Some((start, start + needle.len()));
        }
    }
    let lower_hay = haystack.to_ascii_lowercase();
    let lower_needle = needle.to_ascii_lowercase();
    for (start, _) in lower_hay.match_indices(&lower_needle) {
        if haystack.is_char_boundary(start)
            && haystack.is_char_boundary(start + needle.len())
            && free(start)
        {
            return Some((start, start + needle.len()));
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalize_folds_case_and_whitespace() {
        assert_eq!(normalize("  Wizard   of\tOz "), "wizard of oz");
        assert_eq!(normalize(""), "");
    }

    #[test]
    fn find_free_skips_taken_ranges() {
        let s = "Belgium and Belgium";
        assert_eq!(find_free(s, "Belgium", &[]), Some((0, 7)));
        assert_eq!(find_free(s, "Belgium", &[(0, 7)]), Some((12, 19)));
        assert_eq!(find_free(s, "belgium", &[]), Some((0, 7)));
        assert_eq!(find_free(s, "France", &[]), None);
    }
}
