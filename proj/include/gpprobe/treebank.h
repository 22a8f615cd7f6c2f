#pragma once

// CoNLL-U subset reader. Only the ID, FORM and HEAD columns are used;
// '#' lines are comments. Multi-word token ranges (1-2) and empty nodes
// (1.1) are skipped with a warning.

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "gpprobe/tree.h"

namespace gpprobe {

struct AnnotatedSentence {
  std::string id;
  std::vector<std::string> words;
  std::vector<int> heads;  // 0 = root, else 1-based head
  GoldTree tree;
};

// Checks that the heads form one rooted tree and derives it.
AnnotatedSentence MakeAnnotatedSentence(std::string id, std::vector<std::string> words,
                                        std::vector<int> heads);

std::vector<AnnotatedSentence> ParseTreebank(std::string_view text,
                                             const std::string& source_name);
std::vector<AnnotatedSentence> LoadTreebank(const std::filesystem::path& path);

}  // namespace gpprobe
