//! Removal of user mentions and URLs from free text.

use std::sync::LazyLock;

use regex::Regex;

pub const PLACEHOLDER: &str = "⟨REDACT⟩";

static PATTERN: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"https?://\S+|(?P<lead>^|[^\w/])/?u/[A-Za-z0-9_-]+").expect("valid pattern")
});

/// Replaces `u/name`, `/u/name` and http(s) URLs with [`PLACEHOLDER`].
pub fn scrub(text: &str) -> String {
    PATTERN
        .replace_all(text, |caps: &regex::Captures<'_>| {
            let lead = caps.name("lead").map_or("", |m| m.as_str());
            format!("{lead}{PLACEHOLDER}")
        })
        .into_owned()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mentions_and_urls() {
        assert_eq!(scrub("thanks u/bob see https://x.y"), "thanks ⟨REDACT⟩ see ⟨REDACT⟩");
        assert_eq!(scrub("ping /u/Some_One now"), "ping ⟨REDACT⟩ now");
        assert_eq!(scrub("u/first"), "⟨REDACT⟩");
        assert_eq!(scrub("(http://a.b/c?d=1)"), "(⟨REDACT⟩");
    }

    #[test]
    fn untouched() {
        for s in ["no links here", "r/AmItheAsshole is fun", "menu/umami", "you/u", ""] {
            assert_eq!(scrub(s), s);
        }
    }
}
