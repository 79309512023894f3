//! Whitespace and punctuation tokenizer shared by the corpus, augmentation
//! and scoring stages.
//!
//! A token is either a maximal run of alphanumeric characters or a single
//! character that is neither alphanumeric nor whitespace. Joining the tokens
//! with single spaces and tokenizing again gives the same tokens back.

/// Lowercases `raw` and splits it into word and punctuation tokens.
pub fn clean_and_tokenize(raw: &str) -> Vec<String> {
    tokenize_with(raw, true)
}

/// Tokenizes `raw`, lowercasing first when `lowercase` is set.
pub fn tokenize_with(raw: &str, lowercase: bool) -> Vec<String> {
    if lowercase {
        split_tokens(&raw.to_lowercase())
    } else {
        split_tokens(raw)
    }
}

fn split_tokens(text: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    let mut word = String::new();
    for c in text.chars() {
        if c.is_alphanumeric() {
            word.push(c);
            continue;
        }
        if !word.is_empty() {
            tokens.push(std::mem::take(&mut word));
        }
        if !c.is_whitespace() {
            tokens.push(c.to_string());
        }
    }
    if !word.is_empty() {
        tokens.push(word);
    }
    tokens
}

/// Trims `raw` and collapses every whitespace run into one ASCII space.
pub fn normalize_whitespace(raw: &str) -> String {
    let mut out = String::with_capacity(raw.len());
    for part in raw.split_whitespace() {
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(part);
    }
    out
}

/// True when `word` survives tokenization unchanged as a single token.
pub fn is_clean_token(word: &str) -> bool {
    let tokens = clean_and_tokenize(word);
    tokens.len() == 1 && tokens[0] == word
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn toks(s: &str) -> Vec<String> {
        clean_and_tokenize(s)
    }

    /// Reference splitter: pad every non-alphanumeric, non-space character
    /// with spaces, then split on whitespace.
    fn reference_split(s: &str) -> Vec<String> {
        let mut padded = String::new();
        for c in s.to_lowercase().chars() {
            if c.is_alphanumeric() || c.is_whitespace() {
                padded.push(c);
            } else {
                padded.push(' ');
                padded.push(c);
                padded.push(' ');
            }
        }
        padded.split_whitespace().map(str::to_owned).collect()
    }

    #[test]
    fn matches_reference_splitter() {
        let cases: [(&str, &[&str]); 10] = [
            ("Hello, world!", &["hello", ",", "world", "!"]),
            ("The quick brown fox", &["the", "quick", "brown", "fox"]),
            ("Wait... what?", &["wait", ".", ".", ".", "what", "?"]),
            ("It's 5 o'clock.", &["it", "'", "s", "5", "o", "'", "clock", "."]),
            ("  spaced   out  ", &["spaced", "out"]),
            ("Habari, rafiki yangu?", &["habari", ",", "rafiki", "yangu", "?"]),
            ("(Mwanzo 1:1)", &["(", "mwanzo", "1", ":", "1", ")"]),
            ("e-mail", &["e", "-", "mail"]),
            ("\"Quote\"", &["\"", "quote", "\""]),
            ("ÉCOLE normale", &["école", "normale"]),
        ];
        for (input, expected) in cases {
            let reference = reference_split(input);
            assert_eq!(reference, expected, "reference on {input:?}");
            assert_eq!(toks(input), reference, "tokenizer on {input:?}");
        }
    }

    #[test]
    fn lowercases_plain_words() {
        assert_eq!(toks("The quick brown fox"), ["the", "quick", "brown", "fox"]);
    }

    #[test]
    fn swahili_sentence_has_seven_tokens() {
        assert_eq!(toks("Baba na mama yako ni wazuri sana").len(), 7);
    }

    #[test]
    fn empty_and_blank_inputs() {
        assert!(toks("").is_empty());
        assert!(toks(" \t \n").is_empty());
    }

    #[test]
    fn keeps_case_when_asked() {
        assert_eq!(tokenize_with("Hello, World", false), ["Hello", ",", "World"]);
    }

    #[test]
    fn clean_token_check() {
        assert!(is_clean_token("leaps"));
        assert!(is_clean_token(","));
        assert!(!is_clean_token("Leaps"));
        assert!(!is_clean_token("u.s."));
        assert!(!is_clean_token(""));
    }

    #[test]
    fn whitespace_normalization() {
        assert_eq!(normalize_whitespace("  a \t b\r\n c  "), "a b c");
        assert_eq!(normalize_whitespace("   "), "");
    }

    proptest! {
        #[test]
        fn tokenization_is_idempotent(s in "[a-zA-Z0-9 ,.!?'\"éÉñÑ\\-\t]{0,60}") {
            let once = toks(&s);
            let twice = toks(&once.join(" "));
            prop_assert_eq!(once, twice);
        }

        #[test]
        fn tokens_never_contain_whitespace(s in "\\PC{0,40}") {
            for t in toks(&s) {
                prop_assert!(!t.is_empty());
                prop_assert!(!t.chars().any(char::is_whitespace));
            }
        }
    }
}
