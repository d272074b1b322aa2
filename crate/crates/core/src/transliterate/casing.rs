//! Turkic-aware case mapping: dotted İ/i and dotless I/ı are distinct letters.

pub fn lower_char(c: char) -> char {
    match c {
        'İ' => 'i',
        'I' => 'ı',
        c => {
            let mut it = c.to_lowercase();
            match (it.next(), it.next()) {
                (Some(l), None) => l,
                _ => c,
            }
        }
    }
}

pub fn upper_char(c: char) -> char {
    match c {
        'i' => 'İ',
        'ı' => 'I',
        c => {
            let mut it = c.to_uppercase();
            match (it.next(), it.next()) {
                (Some(u), None) => u,
                _ => c,
            }
        }
    }
}

pub fn is_upper(c: char) -> bool {
    c.is_uppercase()
}

/// Characters that carry case.
pub fn is_cased(c: char) -> bool {
    lower_char(c) != c || upper_char(c) != c
}

pub fn fold_lower(s: &str) -> String {
    s.chars().map(lower_char).collect()
}

pub fn upper(s: &str) -> String {
    s.chars().map(upper_char).collect()
}

/// Uppercase the first character only.
pub fn upper_first(s: &str) -> String {
    let mut chars = s.chars();
    match chars.next() {
        Some(f) => std::iter::once(upper_char(f)).chain(chars).collect(),
        None => String::new(),
    }
}
