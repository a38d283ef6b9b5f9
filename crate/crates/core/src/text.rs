//! Small lexical helpers shared by the signature and argument-list grammars.
//!
//! The scanner understands just enough of the subject language's token
//! structure to find top-level commas and matching brackets: nested
//! `()`, `[]`, `{}` and single/double/triple-quoted string literals.

/// Error raised by the bracket-aware scanner.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ScanError {
    #[error("unbalanced brackets at byte {0}")]
    Unbalanced(usize),
    #[error("unterminated string literal starting at byte {0}")]
    UnterminatedString(usize),
}

/// Skip a string literal starting at `start` (which must point at a quote).
/// Returns the byte index one past the closing quote.
fn skip_string(bytes: &[u8], start: usize) -> Result<usize, ScanError> {
    let quote = bytes[start];
    let triple = bytes.len() >= start + 3 && bytes[start + 1] == quote && bytes[start + 2] == quote;
    let mut i = if triple { start + 3 } else { start + 1 };
    while i < bytes.len() {
        let b = bytes[i];
        if b == b'\\' {
            i += 2;
            continue;
        }
        if b == quote {
            if !triple {
                return Ok(i + 1);
            }
            if i + 2 < bytes.len() && bytes[i + 1] == quote && bytes[i + 2] == quote {
                return Ok(i + 3);
            }
        } else if b == b'\n' && !triple {
            break;
        }
        i += 1;
    }
    Err(ScanError::UnterminatedString(start))
}

fn closer(open: u8) -> u8 {
    match open {
        b'(' => b')',
        b'[' => b']',
        _ => b'}',
    }
}

/// Split `body` on commas that are not nested inside brackets or strings.
///
/// Pieces are returned untrimmed. An empty `body` yields one empty piece.
pub fn split_top_level(body: &str) -> Result<Vec<&str>, ScanError> {
    let bytes = body.as_bytes();
    let mut stack: Vec<u8> = Vec::new();
    let mut pieces = Vec::new();
    let mut last = 0;
    let mut i = 0;
    while i < bytes.len() {
        match bytes[i] {
            b'\'' | b'"' => {
                i = skip_string(bytes, i)?;
                continue;
            }
            b @ (b'(' | b'[' | b'{') => stack.push(closer(b)),
            b @ (b')' | b']' | b'}') => {
                if stack.pop() != Some(b) {
                    return Err(ScanError::Unbalanced(i));
                }
            }
            b',' if stack.is_empty() => {
                pieces.push(&body[last..i]);
                last = i + 1;
            }
            _ => {}
        }
        i += 1;
    }
    if !stack.is_empty() {
        return Err(ScanError::Unbalanced(bytes.len()));
    }
    pieces.push(&body[last..]);
    Ok(pieces)
}

/// Given `text[open]` is an opening bracket, return the index of its
/// matching closer.
pub fn matching_close(text: &str, open: usize) -> Result<usize, ScanError> {
    let bytes = text.as_bytes();
    let mut stack: Vec<u8> = Vec::new();
    let mut i = open;
    while i < bytes.len() {
        match bytes[i] {
            b'\'' | b'"' => {
                i = skip_string(bytes, i)?;
                continue;
            }
            b @ (b'(' | b'[' | b'{') => stack.push(closer(b)),
            b @ (b')' | b']' | b'}') => {
                if stack.pop() != Some(b) {
                    return Err(ScanError::Unbalanced(i));
                }
                if stack.is_empty() {
                    return Ok(i);
                }
            }
            _ => {}
        }
        i += 1;
    }
    Err(ScanError::Unbalanced(open))
}

/// Unwrap a parenthesized group that spans the whole (trimmed) text,
/// returning the inner body.
pub fn unwrap_parens(text: &str) -> Result<&str, ScanError> {
    let trimmed = text.trim();
    if !trimmed.starts_with('(') {
        return Err(ScanError::Unbalanced(0));
    }
    let close = matching_close(trimmed, 0)?;
    if close + 1 != trimmed.len() {
        return Err(ScanError::Unbalanced(close));
    }
    Ok(&trimmed[1..close])
}

/// Find the first top-level occurrence of a single `=` that is an
/// assignment/default separator rather than part of `==`, `<=`, `>=`, `!=`.
pub fn find_assign(text: &str) -> Result<Option<usize>, ScanError> {
    let bytes = text.as_bytes();
    let mut depth = 0usize;
    let mut i = 0;
    while i < bytes.len() {
        match bytes[i] {
            b'\'' | b'"' => {
                i = skip_string(bytes, i)?;
                continue;
            }
            b'(' | b'[' | b'{' => depth += 1,
            b')' | b']' | b'}' => depth = depth.saturating_sub(1),
            b'=' if depth == 0 => {
                let prev = if i > 0 { bytes[i - 1] } else { b' ' };
                let next = bytes.get(i + 1).copied().unwrap_or(b' ');
                if next != b'=' && !matches!(prev, b'=' | b'<' | b'>' | b'!' | b':') {
                    return Ok(Some(i));
                }
                if next == b'=' {
                    i += 2;
                    continue;
                }
            }
            _ => {}
        }
        i += 1;
    }
    Ok(None)
}

/// Length of the identifier prefix of `text` (0 when it does not start
/// with an identifier).
pub fn identifier_prefix_len(text: &str) -> usize {
    let mut chars = text.char_indices();
    match chars.next() {
        Some((_, c)) if c == '_' || c.is_alphabetic() => {}
        _ => return 0,
    }
    for (i, c) in chars {
        if !(c == '_' || c.is_alphanumeric()) {
            return i;
        }
    }
    text.len()
}

pub fn is_identifier(text: &str) -> bool {
    !text.is_empty() && identifier_prefix_len(text) == text.len()
}

/// Byte range of the outermost balanced parenthesized group, starting at
/// the first `(` in the text.
pub fn outermost_parens(text: &str) -> Option<(usize, usize)> {
    let open = text.find('(')?;
    let close = matching_close(text, open).ok()?;
    Some((open, close + 1))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn splits_respecting_nesting_and_strings() {
        let parts = split_top_level("a, b=(1, 2), c='x,y', d=[{1: 2}, 3]").unwrap();
        assert_eq!(parts, vec!["a", " b=(1, 2)", " c='x,y'", " d=[{1: 2}, 3]"]);
    }

    #[test]
    fn triple_quoted_strings_are_opaque() {
        let parts = split_top_level("a='''x, ' y''', b").unwrap();
        assert_eq!(parts.len(), 2);
    }

    #[test]
    fn unbalanced_is_rejected() {
        assert!(split_top_level("a, (b").is_err());
        assert!(split_top_level("a)").is_err());
        assert!(unwrap_parens("(a").is_err());
        assert!(unwrap_parens("(a)(b)").is_err());
    }

    #[test]
    fn assign_skips_comparisons() {
        assert_eq!(find_assign("x==1").unwrap(), None);
        assert_eq!(find_assign("a: Literal['='] = 3").unwrap(), Some(16));
        assert_eq!(find_assign("b<=c").unwrap(), None);
        assert_eq!(find_assign("k=v").unwrap(), Some(1));
    }

    #[test]
    fn outermost_group() {
        assert_eq!(outermost_parens("Answer: (a, (b)) trailing"), Some((8, 16)));
        assert_eq!(outermost_parens("none"), None);
    }
}
