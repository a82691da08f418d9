//! String routines shared by the scoring clues and the file formats.

/// Levenshtein distance over Unicode scalar values.
pub fn levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    if a.is_empty() {
        return b.len();
    }
    if b.is_empty() {
        return a.len();
    }
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for (i, ca) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, cb) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(ca != cb);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// Length of the longest common (not necessarily contiguous) subsequence,
/// counted in characters.
pub fn lcs_len(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let mut prev = vec![0usize; b.len() + 1];
    let mut cur = vec![0usize; b.len() + 1];
    for ca in &a {
        for (j, cb) in b.iter().enumerate() {
            cur[j + 1] = if ca == cb {
                prev[j] + 1
            } else {
                prev[j + 1].max(cur[j])
            };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// Decode a corpus token: `\_` stands for an embedded space.
pub fn unescape_token(raw: &str) -> String {
    raw.replace("\\_", " ")
}

pub fn escape_token(token: &str) -> String {
    token.replace(' ', "\\_")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn levenshtein_basics() {
        assert_eq!(levenshtein("", "abc"), 3);
        assert_eq!(levenshtein("kitten", "sitting"), 3);
        assert_eq!(levenshtein("weilian", "william"), 3);
        assert_eq!(levenshtein("same", "same"), 0);
    }

    #[test]
    fn lcs_on_characters() {
        assert_eq!(lcs_len("澳洲网球公开赛", "澳洲的公开赛"), 5);
        assert_eq!(lcs_len("abc", ""), 0);
        assert_eq!(lcs_len("abcbdab", "bdcaba"), 4);
    }

    #[test]
    fn token_escaping() {
        assert_eq!(unescape_token("serena\\_williams"), "serena williams");
        assert_eq!(escape_token("australian open"), "australian\\_open");
    }
}
