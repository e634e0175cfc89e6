#include "loopcheck/text.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace loopcheck::text {

namespace {

bool is_word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

std::string join(const std::vector<std::string>& words, size_t begin, size_t count) {
    std::string out;
    for (size_t i = begin; i < begin + count; ++i) {
        if (!out.empty()) out.push_back(' ');
        out += words[i];
    }
    return out;
}

}  // namespace

std::string to_lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return out;
}

std::string trim(std::string_view s) {
    size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

std::string collapse_spaces(std::string_view s) {
    std::string out;
    bool in_space = false;
    for (char c : s) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            in_space = true;
            continue;
        }
        if (in_space && !out.empty()) out.push_back(' ');
        in_space = false;
        out.push_back(c);
    }
    return out;
}

std::string singularize(std::string_view word) {
    std::string w(word);
    auto ends_with = [&](std::string_view suf) {
        return w.size() >= suf.size() && w.compare(w.size() - suf.size(), suf.size(), suf) == 0;
    };
    if (w.size() < 3) return w;
    if (ends_with("ss") || ends_with("us") || ends_with("is")) return w;
    if (ends_with("ies")) return w.substr(0, w.size() - 3) + "y";
    if (ends_with("xes") || ends_with("ses") || ends_with("zes") || ends_with("oes"))
        return w.substr(0, w.size() - 2);
    if (ends_with("ches") || ends_with("shes")) return w.substr(0, w.size() - 2);
    if (ends_with("s")) return w.substr(0, w.size() - 1);
    return w;
}

std::string normalize_object_name(std::string_view name) {
    std::string s = collapse_spaces(to_lower(trim(name)));
    size_t last_space = s.rfind(' ');
    if (last_space == std::string::npos) return singularize(s);
    return s.substr(0, last_space + 1) + singularize(s.substr(last_space + 1));
}

std::vector<std::string> tokenize(std::string_view s) {
    std::vector<std::string> tokens;
    std::string cur;
    for (char c : s) {
        if (is_word_char(c)) {
            cur.push_back(char(std::tolower(static_cast<unsigned char>(c))));
        } else if (!cur.empty()) {
            tokens.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) tokens.push_back(std::move(cur));
    return tokens;
}

std::vector<std::string> split_sentences(std::string_view s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == '.' || c == '!' || c == '?') {
            std::string t = trim(cur);
            if (!t.empty()) out.push_back(t);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    std::string t = trim(cur);
    if (!t.empty()) out.push_back(t);
    return out;
}

bool mentions_object(std::string_view txt, std::string_view object_name) {
    std::vector<std::string> name_tokens = tokenize(normalize_object_name(object_name));
    if (name_tokens.empty()) return false;
    std::vector<std::string> tokens = tokenize(txt);
    size_t n = name_tokens.size();
    if (tokens.size() < n) return false;
    for (size_t i = 0; i + n <= tokens.size(); ++i) {
        bool match = true;
        for (size_t j = 0; j < n; ++j) {
            // the final word may appear in plural surface form
            const std::string& tok =
                (j + 1 == n) ? singularize(tokens[i + j]) : tokens[i + j];
            const std::string& want =
                (j + 1 == n) ? singularize(name_tokens[j]) : name_tokens[j];
            if (tok != want) {
                match = false;
                break;
            }
        }
        if (match) return true;
    }
    return false;
}

Lexicon::Lexicon(const std::vector<std::string>& entries) {
    for (const auto& e : entries) add(e);
}

void Lexicon::add(std::string_view entry) {
    std::string norm = normalize_object_name(entry);
    if (norm.empty()) return;
    size_t words = size_t(std::count(norm.begin(), norm.end(), ' ')) + 1;
    max_words_ = std::max(max_words_, words);
    entries_.insert(std::move(norm));
}

bool Lexicon::contains(std::string_view name) const {
    return entries_.count(normalize_object_name(name)) > 0;
}

std::vector<std::string> Lexicon::extract(std::string_view txt) const {
    std::vector<std::string> tokens = tokenize(txt);
    std::vector<std::string> found;
    std::unordered_set<std::string> seen;
    size_t i = 0;
    while (i < tokens.size()) {
        size_t consumed = 0;
        std::string hit;
        // longest match first so "dining table" wins over "table"
        for (size_t n = std::min(max_words_, tokens.size() - i); n >= 1 && consumed == 0; --n) {
            std::string cand = join(tokens, i, n - 1);
            if (!cand.empty()) cand.push_back(' ');
            cand += singularize(tokens[i + n - 1]);
            if (entries_.count(cand)) {
                hit = cand;
                consumed = n;
            }
        }
        if (consumed == 0) {
            ++i;
            continue;
        }
        if (seen.insert(hit).second) found.push_back(hit);
        i += consumed;
    }
    return found;
}

std::optional<std::string> parse_existence_question(std::string_view q) {
    std::string s = collapse_spaces(to_lower(trim(q)));
    while (!s.empty() && (s.back() == '?' || s.back() == '.' || s.back() == ' ')) s.pop_back();
    const std::string_view prefix = "is there ";
    if (!s.starts_with(prefix)) return std::nullopt;
    std::string rest = s.substr(prefix.size());
    for (std::string_view art : {"a ", "an ", "any "}) {
        if (rest.starts_with(art)) {
            rest = rest.substr(art.size());
            break;
        }
    }
    for (std::string_view tail : {" in the image", " in this image", " in the picture",
                                  " in the photo"}) {
        size_t pos = rest.rfind(tail);
        if (pos != std::string::npos && pos + tail.size() == rest.size()) {
            std::string name = normalize_object_name(rest.substr(0, pos));
            if (name.empty()) return std::nullopt;
            return name;
        }
    }
    return std::nullopt;
}

std::string normalize_attribute_phrase(std::string_view attr) {
    std::string s = collapse_spaces(to_lower(trim(attr)));
    if (s.starts_with("are ")) return "is " + s.substr(4);
    if (s.starts_with("have ")) return "has " + s.substr(5);
    return s;
}

std::string pluralize_attribute_verb(std::string_view attr) {
    std::string s = trim(attr);
    if (starts_with_ci(s, "is ")) return "are " + s.substr(3);
    if (starts_with_ci(s, "has ")) return "have " + s.substr(4);
    return s;
}

std::string capitalize(std::string_view s) {
    std::string out(s);
    if (!out.empty()) out[0] = char(std::toupper(static_cast<unsigned char>(out[0])));
    return out;
}

std::string with_article(std::string_view noun) {
    std::string n(noun);
    if (n.empty()) return n;
    char c = char(std::tolower(static_cast<unsigned char>(n[0])));
    bool vowel = c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u';
    return (vowel ? "an " : "a ") + n;
}

bool starts_with_ci(std::string_view s, std::string_view prefix) {
    if (s.size() < prefix.size()) return false;
    for (size_t i = 0; i < prefix.size(); ++i) {
        if (std::tolower(static_cast<unsigned char>(s[i])) !=
            std::tolower(static_cast<unsigned char>(prefix[i])))
            return false;
    }
    return true;
}

}  // namespace loopcheck::text
