#include <algorithm>
#include <cctype>

#include "tga/discourse.hpp"
#include "tga/ingest.hpp"

namespace tga {

namespace embedded {
extern const std::string_view kDefaultLexiconJson;
}

namespace {

std::string lowercase(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

bool is_word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

bool contains_phrase(const std::string& text, const std::string& phrase) {
  for (std::size_t pos = text.find(phrase); pos != std::string::npos; pos = text.find(phrase, pos + 1)) {
    const bool left_ok = pos == 0 || !is_word_char(text[pos - 1]);
    const std::size_t end = pos + phrase.size();
    const bool right_ok = end == text.size() || !is_word_char(text[end]);
    if (left_ok && right_ok) return true;
  }
  return false;
}

}  // namespace

Lexicon::Lexicon(std::vector<LexiconRule> rules) : rules_(std::move(rules)) {
  for (auto& rule : rules_) {
    rule.pattern = lowercase(rule.pattern);
    if (rule.pattern.find_first_not_of(" \t") == std::string::npos)
      throw Error(ErrorCode::MalformedLexicon, "empty pattern");
  }
}

Lexicon Lexicon::from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("rules") || !j["rules"].is_array())
    throw Error(ErrorCode::MalformedLexicon, "expected an object with a 'rules' array");
  if (j.contains("default_level") && j["default_level"] != "Unclassified")
    throw Error(ErrorCode::MalformedLexicon, "default_level must be Unclassified");
  std::vector<LexiconRule> rules;
  for (const auto& r : j["rules"]) {
    if (!r.is_object() || !r.contains("pattern") || !r["pattern"].is_string() || !r.contains("level") ||
        !r["level"].is_string())
      throw Error(ErrorCode::MalformedLexicon, "each rule needs string 'pattern' and 'level'");
    const auto level = cognitive_level_from_string(r["level"].get<std::string>());
    if (!level) throw Error(ErrorCode::MalformedLexicon, "unknown level " + r["level"].dump());
    rules.push_back({r["pattern"].get<std::string>(), *level});
  }
  return Lexicon(std::move(rules));
}

Lexicon Lexicon::from_file(const std::filesystem::path& path) {
  try {
    return from_json(read_json_file(path));
  } catch (const Error& e) {
    throw Error(e.code() == ErrorCode::IoError ? ErrorCode::IoError : ErrorCode::MalformedLexicon,
                path.string() + ": " + e.detail());
  }
}

const Lexicon& Lexicon::shipped() {
  static const Lexicon lexicon = from_json(nlohmann::json::parse(embedded::kDefaultLexiconJson));
  return lexicon;
}

Classification classify_utterance(std::string_view text, const Lexicon& lexicon) {
  if (text.empty()) return {};
  const std::string lower = lowercase(text);
  for (const auto& rule : lexicon.rules()) {
    if (contains_phrase(lower, rule.pattern)) return {rule.level, 1.0};
  }
  return {};
}

void label_unlabeled(SessionLog& log, const Lexicon& lexicon) {
  for (auto& u : log.utterances) {
    if (u.level != CognitiveLevel::Unclassified || u.confidence != 0.0) continue;
    const Classification c = classify_utterance(u.text, lexicon);
    u.level = c.level;
    u.confidence = c.confidence;
  }
}

}  // namespace tga
