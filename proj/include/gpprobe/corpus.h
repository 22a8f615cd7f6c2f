#pragma once

// Garden-path stimuli: five-chunk sentences, their comma-disambiguated
// renderings, and the probe questions asked after each prefix.

#include <array>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace gpprobe {

inline constexpr int kNumChunks = 5;

enum class VerbClass { kOT, kRAT };

enum class Variant { kCommaAbsent, kCommaPresent };

std::string_view ToString(VerbClass c);
std::string_view ToString(Variant v);
VerbClass ParseVerbClass(std::string_view s);
Variant ParseVariant(std::string_view s);

// Word indices into the whitespace tokenization of the full sentence.
struct RoleWords {
  int verb1 = -1;
  int np_head = -1;
  int verb2 = -1;

  bool operator==(const RoleWords&) const = default;
};

// Half-open word range [begin, end).
struct WordSpan {
  int begin = 0;
  int end = 0;

  bool Contains(int w) const { return w >= begin && w < end; }
  int size() const { return end - begin; }
  bool operator==(const WordSpan&) const = default;
};

struct GardenPathItem {
  std::string id;
  VerbClass verb_class = VerbClass::kOT;
  std::array<std::string, kNumChunks> chunks;
  std::string question_misinterpretation;
  std::string question_correct;
  RoleWords roles;

  // Chunks joined by single spaces.
  std::string FullText() const;
  std::vector<std::string> Words() const;
  std::array<WordSpan, kNumChunks> ChunkWordSpans() const;
  // Chunk (0-based) owning word w, or -1.
  int ChunkOfWord(int w) const;
  // Number of words in the cumulative prefix through chunk `prefix_index`
  // (1-based, 1..5).
  int PrefixWordCount(int prefix_index) const;
  std::string NpHeadText() const;

  bool operator==(const GardenPathItem&) const = default;
};

struct StimulusVariant {
  std::string item_id;
  bool comma_present = false;
  std::string full_text;
  std::array<std::string, kNumChunks> prefixes;

  Variant variant() const {
    return comma_present ? Variant::kCommaPresent : Variant::kCommaAbsent;
  }
};

std::vector<std::string> SplitWhitespace(std::string_view text);

// Throws ValidationError naming the item and the violated invariant.
void ValidateItem(const GardenPathItem& item);

// Parses one JSON-lines record. `where` is used in error messages.
GardenPathItem ParseItem(std::string_view json_line, const std::string& where);
std::string SerializeItem(const GardenPathItem& item);

std::vector<GardenPathItem> LoadCorpus(const std::filesystem::path& path);
std::vector<GardenPathItem> ParseCorpus(std::string_view text,
                                        const std::string& source_name);
std::string SerializeCorpus(const std::vector<GardenPathItem>& items);

// Comma-absent and comma-present renderings. The comma-present variant
// attaches the comma to chunk 1, so it is already visible in prefix 1.
std::pair<StimulusVariant, StimulusVariant> RenderVariants(
    const GardenPathItem& item);

const StimulusVariant& Select(
    const std::pair<StimulusVariant, StimulusVariant>& variants, Variant v);

// The sentence shown in the figure of the original study, used as the
// shipped sample and in tests.
GardenPathItem HunterDeerItem();

}  // namespace gpprobe
