#include "gpprobe/corpus.h"

#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include "gpprobe/error.h"
#include "json.hpp"

namespace gpprobe {

using nlohmann::json;

std::string_view ToString(VerbClass c) {
  return c == VerbClass::kOT ? "OT" : "RAT";
}

std::string_view ToString(Variant v) {
  return v == Variant::kCommaAbsent ? "comma_absent" : "comma_present";
}

VerbClass ParseVerbClass(std::string_view s) {
  if (s == "OT") return VerbClass::kOT;
  if (s == "RAT") return VerbClass::kRAT;
  throw ValidationError("unknown verb_class '" + std::string(s) + "'");
}

Variant ParseVariant(std::string_view s) {
  if (s == "comma_absent") return Variant::kCommaAbsent;
  if (s == "comma_present") return Variant::kCommaPresent;
  throw ValidationError("unknown variant '" + std::string(s) + "'");
}

std::vector<std::string> SplitWhitespace(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t j = i;
    while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
    if (j > i) out.emplace_back(text.substr(i, j - i));
    i = j;
  }
  return out;
}

std::string GardenPathItem::FullText() const {
  std::string out = chunks[0];
  for (int c = 1; c < kNumChunks; ++c) out += " " + chunks[c];
  return out;
}

std::vector<std::string> GardenPathItem::Words() const {
  return SplitWhitespace(FullText());
}

std::array<WordSpan, kNumChunks> GardenPathItem::ChunkWordSpans() const {
  std::array<WordSpan, kNumChunks> spans;
  int at = 0;
  for (int c = 0; c < kNumChunks; ++c) {
    const int n = static_cast<int>(SplitWhitespace(chunks[c]).size());
    spans[c] = {at, at + n};
    at += n;
  }
  return spans;
}

int GardenPathItem::ChunkOfWord(int w) const {
  const auto spans = ChunkWordSpans();
  for (int c = 0; c < kNumChunks; ++c) {
    if (spans[c].Contains(w)) return c;
  }
  return -1;
}

int GardenPathItem::PrefixWordCount(int prefix_index) const {
  if (prefix_index < 1 || prefix_index > kNumChunks) {
    throw ValidationError("prefix index out of range: " + std::to_string(prefix_index));
  }
  return ChunkWordSpans()[prefix_index - 1].end;
}

std::string GardenPathItem::NpHeadText() const {
  const auto words = Words();
  if (roles.np_head < 0 || roles.np_head >= static_cast<int>(words.size())) return {};
  return words[roles.np_head];
}

void ValidateItem(const GardenPathItem& item) {
  const std::string who = "item '" + item.id + "': ";
  if (item.id.empty()) throw ValidationError("malformed record: empty id");
  for (int c = 0; c < kNumChunks; ++c) {
    if (SplitWhitespace(item.chunks[c]).empty()) {
      throw ValidationError(who + "malformed field 'chunks': chunk " +
                            std::to_string(c + 1) + " is empty");
    }
  }
  const RoleWords& r = item.roles;
  if (!(r.verb1 < r.np_head && r.np_head < r.verb2)) {
    throw ValidationError(who + "roles out of order (need verb1 < np_head < verb2)");
  }
  const auto spans = item.ChunkWordSpans();
  const auto check = [&](const char* name, int w, int chunk) {
    if (!spans[chunk].Contains(w)) {
      throw ValidationError(who + "role outside chunk: " + name + "=" +
                            std::to_string(w) + " is not in chunk " +
                            std::to_string(chunk + 1));
    }
  };
  check("verb1", r.verb1, 0);
  check("np_head", r.np_head, 1);
  check("verb2", r.verb2, 3);
}

namespace {

template <typename T>
T Field(const json& j, const char* key, const std::string& who) {
  if (!j.contains(key)) {
    throw ValidationError(who + "malformed record: missing field '" + key + "'");
  }
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ValidationError(who + "malformed record: bad type for field '" + key + "'");
  }
}

}  // namespace

GardenPathItem ParseItem(std::string_view json_line, const std::string& where) {
  json j;
  try {
    j = json::parse(json_line);
  } catch (const json::parse_error& e) {
    throw ValidationError(where + ": malformed record: " + e.what());
  }
  if (!j.is_object()) throw ValidationError(where + ": malformed record: not an object");

  GardenPathItem item;
  item.id = Field<std::string>(j, "id", where + ": ");
  const std::string who = where + ": item '" + item.id + "': ";

  const auto vc = Field<std::string>(j, "verb_class", who);
  try {
    item.verb_class = ParseVerbClass(vc);
  } catch (const Error&) {
    throw ValidationError(who + "malformed field 'verb_class': '" + vc + "'");
  }

  const auto chunks = Field<std::vector<std::string>>(j, "chunks", who);
  if (chunks.size() != kNumChunks) {
    throw ValidationError(who + "chunk-count: expected 5 chunks, got " +
                          std::to_string(chunks.size()));
  }
  std::copy(chunks.begin(), chunks.end(), item.chunks.begin());
  item.question_misinterpretation = Field<std::string>(j, "q_mis", who);
  item.question_correct = Field<std::string>(j, "q_correct", who);

  const json roles = Field<json>(j, "roles", who);
  if (!roles.is_object()) throw ValidationError(who + "malformed field 'roles'");
  item.roles.verb1 = Field<int>(roles, "verb1", who + "roles: ");
  item.roles.np_head = Field<int>(roles, "np_head", who + "roles: ");
  item.roles.verb2 = Field<int>(roles, "verb2", who + "roles: ");

  try {
    ValidateItem(item);
  } catch (const Error& e) {
    throw ValidationError(where + ": " + e.what());
  }
  if (j.contains("text")) {
    const auto text = Field<std::string>(j, "text", who);
    if (text != item.FullText()) {
      throw ValidationError(who + "malformed field 'text': does not equal the joined chunks");
    }
  }
  return item;
}

std::string SerializeItem(const GardenPathItem& item) {
  json j;
  j["id"] = item.id;
  j["verb_class"] = ToString(item.verb_class);
  j["chunks"] = std::vector<std::string>(item.chunks.begin(), item.chunks.end());
  j["q_mis"] = item.question_misinterpretation;
  j["q_correct"] = item.question_correct;
  j["roles"] = {{"verb1", item.roles.verb1},
                {"np_head", item.roles.np_head},
                {"verb2", item.roles.verb2}};
  return j.dump();
}

std::vector<GardenPathItem> ParseCorpus(std::string_view text,
                                        const std::string& source_name) {
  std::vector<GardenPathItem> items;
  std::set<std::string> seen;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (SplitWhitespace(line).empty()) continue;
    const std::string where = source_name + ":" + std::to_string(lineno);
    GardenPathItem item = ParseItem(line, where);
    if (!seen.insert(item.id).second) {
      throw ValidationError(where + ": duplicate id '" + item.id + "'");
    }
    items.push_back(std::move(item));
  }
  return items;
}

std::vector<GardenPathItem> LoadCorpus(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open corpus file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return ParseCorpus(buf.str(), path.string());
}

std::string SerializeCorpus(const std::vector<GardenPathItem>& items) {
  std::string out;
  for (const auto& item : items) out += SerializeItem(item) + "\n";
  return out;
}

std::pair<StimulusVariant, StimulusVariant> RenderVariants(
    const GardenPathItem& item) {
  StimulusVariant absent;
  StimulusVariant present;
  absent.item_id = present.item_id = item.id;
  absent.comma_present = false;
  present.comma_present = true;

  std::string a = item.chunks[0];
  std::string p = item.chunks[0] + ",";
  absent.prefixes[0] = a;
  present.prefixes[0] = p;
  for (int c = 1; c < kNumChunks; ++c) {
    a += " " + item.chunks[c];
    p += " " + item.chunks[c];
    absent.prefixes[c] = a;
    present.prefixes[c] = p;
  }
  absent.full_text = a;
  present.full_text = p;
  return {std::move(absent), std::move(present)};
}

const StimulusVariant& Select(
    const std::pair<StimulusVariant, StimulusVariant>& variants, Variant v) {
  return v == Variant::kCommaAbsent ? variants.first : variants.second;
}

GardenPathItem HunterDeerItem() {
  GardenPathItem item;
  item.id = "hunter-deer";
  item.verb_class = VerbClass::kOT;
  item.chunks = {"While the man hunted", "the deer", "that was brown and graceful",
                 "ran", "through the woods."};
  item.question_misinterpretation = "Did the man hunt the deer?";
  item.question_correct = "Did the deer run through the woods?";
  item.roles = {3, 5, 11};
  return item;
}

}  // namespace gpprobe
