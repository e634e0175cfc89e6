#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace loopcheck::text {

std::string to_lower(std::string_view s);
std::string trim(std::string_view s);

/// Collapses runs of whitespace into single spaces.
std::string collapse_spaces(std::string_view s);

/// Rule-table singularization: "ies" -> "y", "xes"/"ses"/"zes"/"ches"/
/// "shes"/"oes" -> drop "es", plain "s" -> dropped. Words ending in
/// "ss", "us" or "is" are left alone (glass, bus, iris).
std::string singularize(std::string_view word);

/// Canonical object-name form: trimmed, lowercased, spaces collapsed,
/// last word singularized. "Dining Tables" -> "dining table".
std::string normalize_object_name(std::string_view name);

/// Lowercased alphanumeric tokens, punctuation dropped. "table's" splits
/// into {"table", "s"}.
std::vector<std::string> tokenize(std::string_view s);

/// Splits on '.', '!' and '?'; returns trimmed non-empty sentences.
std::vector<std::string> split_sentences(std::string_view s);

/// True when the normalized object name occurs in the text as a whole
/// token sequence (singular or plural surface form). Token-based, so
/// "table" does match inside "the dining table"; use Lexicon::extract
/// when longest-match consumption matters.
bool mentions_object(std::string_view txt, std::string_view object_name);

/// Noun vocabulary with longest-match n-gram extraction. Multi-word
/// entries ("dining table") are consumed as a unit, so their component
/// words do not match single-word entries at the same position.
class Lexicon {
public:
    Lexicon() = default;
    explicit Lexicon(const std::vector<std::string>& entries);

    void add(std::string_view entry);
    bool contains(std::string_view name) const;
    size_t size() const { return entries_.size(); }

    /// Normalized nouns found in the text, deduplicated, ordered by first
    /// mention.
    std::vector<std::string> extract(std::string_view txt) const;

private:
    std::unordered_set<std::string> entries_;
    size_t max_words_ = 1;
};

/// Parses "Is there a(n) X in the image?" forms; returns the normalized
/// object name, or nullopt when the text is not a binary existence
/// question.
std::optional<std::string> parse_existence_question(std::string_view q);

/// Maps leading "are" -> "is" and "have" -> "has" so attribute phrases
/// compare independent of verb number.
std::string normalize_attribute_phrase(std::string_view attr);

/// "is" -> "are", "has" -> "have" on the leading verb; used when an
/// attribute is framed as "all the objects that {attribute}".
std::string pluralize_attribute_verb(std::string_view attr);

std::string capitalize(std::string_view s);

/// "a banana" / "an apple", by leading vowel.
std::string with_article(std::string_view noun);

bool starts_with_ci(std::string_view s, std::string_view prefix);

}  // namespace loopcheck::text
