#include "gpprobe/bundle.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "gpprobe/error.h"
#include "gpprobe/kernels.h"
#include "gpprobe/log.h"
#include "json.hpp"

namespace gpprobe {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string ReadText(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("missing file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

template <typename T>
T Get(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) {
    throw ValidationError(where + ": manifest missing field '" + key + "'");
  }
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ValidationError(where + ": manifest field '" + key + "' has the wrong type");
  }
}

TokenSpan ParseSpan(const json& j, const char* role, const std::string& where) {
  if (!j.contains(role)) return {};
  const auto v = Get<std::vector<int>>(j, role, where);
  if (v.empty()) return {};
  if (v.size() != 2 || v[0] < 0 || v[1] < v[0]) {
    throw ValidationError(where + ": malformed role span for " + role);
  }
  return {v[0], v[1]};
}

std::vector<std::size_t> Shape(const json& shapes, const char* key,
                               const std::string& where) {
  if (!shapes.contains(key)) {
    throw ValidationError(where + ": manifest missing shapes." + key);
  }
  try {
    return shapes.at(key).get<std::vector<std::size_t>>();
  } catch (const json::exception&) {
    throw ValidationError(where + ": malformed shapes." + key);
  }
}

std::string ShapeString(const std::vector<std::size_t>& s) {
  std::string out = "[";
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(s[i]);
  }
  return out + "]";
}

void ExpectShape(const std::vector<std::size_t>& got,
                 const std::vector<std::size_t>& want, const char* name,
                 const std::string& where) {
  if (got != want) {
    throw ValidationError(where + ": shape mismatch for " + name + ": manifest says " +
                          ShapeString(got) + ", expected " + ShapeString(want));
  }
}

void CheckFileSize(const fs::path& path, std::size_t expected_elements) {
  std::error_code ec;
  const auto bytes = fs::file_size(path, ec);
  if (ec) throw IoError("missing file: " + path.string());
  if (bytes != expected_elements * sizeof(float)) {
    throw ValidationError("byte length mismatch: " + path.string() + " has " +
                          std::to_string(bytes) + " bytes, expected " +
                          std::to_string(expected_elements * sizeof(float)));
  }
}

struct ParsedShapes {
  std::vector<std::size_t> hidden, attention, token_logprob;
};

}  // namespace

std::string PrefixDirName(int prefix_index) {
  return "prefix_" + std::to_string(prefix_index);
}

std::vector<float> ReadFloat32File(const fs::path& path,
                                   std::size_t expected_elements) {
  CheckFileSize(path, expected_elements);
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("missing file: " + path.string());
  std::vector<float> out(expected_elements);
  in.read(reinterpret_cast<char*>(out.data()),
          static_cast<std::streamsize>(expected_elements * sizeof(float)));
  if (!in) throw IoError("short read: " + path.string());
  if constexpr (std::endian::native == std::endian::big) {
    for (float& f : out) {
      std::uint32_t u;
      std::memcpy(&u, &f, 4);
      u = __builtin_bswap32(u);
      std::memcpy(&f, &u, 4);
    }
  }
  return out;
}

BundleManifest ParseManifest(const std::string& json_text, const std::string& where) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ValidationError(where + ": malformed manifest: " + e.what());
  }
  if (!j.is_object()) throw ValidationError(where + ": manifest is not an object");
  BundleManifest m;
  m.model_id = Get<std::string>(j, "model_id", where);
  m.item_id = Get<std::string>(j, "item_id", where);
  try {
    m.variant = ParseVariant(Get<std::string>(j, "variant", where));
  } catch (const Error& e) {
    throw ValidationError(where + ": " + e.what());
  }
  m.prefix_index = Get<int>(j, "prefix_index", where);
  m.n_layers = Get<int>(j, "n_layers", where);
  m.n_heads = Get<int>(j, "n_heads", where);
  m.hidden_dim = Get<int>(j, "hidden_dim", where);
  m.causal = j.value("causal", false);
  m.tokens = Get<std::vector<std::string>>(j, "tokens", where);
  m.word_of_token = Get<std::vector<int>>(j, "word_of_token", where);
  if (j.contains("role_words")) {
    const json& r = j.at("role_words");
    m.role_words = {Get<int>(r, "verb1", where), Get<int>(r, "np_head", where),
                    Get<int>(r, "verb2", where)};
  }
  if (j.contains("role_token_spans")) {
    const json& r = j.at("role_token_spans");
    m.role_token_spans = {ParseSpan(r, "verb1", where), ParseSpan(r, "np_head", where),
                          ParseSpan(r, "verb2", where)};
  }
  if (j.contains("payload")) {
    const json& p = j.at("payload");
    m.payload.hidden = p.value("hidden", true);
    m.payload.attention = p.value("attention", true);
    m.payload.token_logprob = p.value("token_logprob", true);
    m.payload.answer = p.value("answer", true);
  }
  return m;
}

void ValidateManifest(const BundleManifest& m, const std::string& where) {
  if (m.n_layers <= 0 || m.n_heads <= 0 || m.hidden_dim <= 0) {
    throw ValidationError(where + ": n_layers, n_heads and hidden_dim must be positive");
  }
  if (m.prefix_index < 1 || m.prefix_index > kNumChunks) {
    throw ValidationError(where + ": prefix_index must be in 1..5");
  }
  if (m.tokens.empty()) throw ValidationError(where + ": no tokens");
  if (m.word_of_token.size() != m.tokens.size()) {
    throw ValidationError(where + ": word_of_token length differs from tokens");
  }
  if (m.word_of_token.front() != 0) {
    throw ValidationError(where + ": word_of_token must start at 0");
  }
  for (std::size_t t = 1; t < m.word_of_token.size(); ++t) {
    const int step = m.word_of_token[t] - m.word_of_token[t - 1];
    if (step < 0) {
      throw ValidationError(where + ": word_of_token is not monotone at token " +
                            std::to_string(t));
    }
    if (step > 1) {
      throw ValidationError(where + ": word_of_token skips a word at token " +
                            std::to_string(t));
    }
  }
  const auto check_span = [&](const char* role, TokenSpan span, int word) {
    if (span.empty()) return;
    if (span.end > m.num_tokens()) {
      throw ValidationError(where + ": role span inconsistent: " + role +
                            " span exceeds token count");
    }
    for (int t = span.begin; t < span.end; ++t) {
      if (m.word_of_token[t] != word) {
        throw ValidationError(where + ": role span inconsistent: " + role +
                              " token " + std::to_string(t) + " belongs to word " +
                              std::to_string(m.word_of_token[t]) + ", expected word " +
                              std::to_string(word));
      }
    }
  };
  check_span("verb1", m.role_token_spans.verb1, m.role_words.verb1);
  check_span("np_head", m.role_token_spans.np_head, m.role_words.np_head);
  check_span("verb2", m.role_token_spans.verb2, m.role_words.verb2);
}

void ValidateAttention(const FloatTensor& attention, bool causal,
                       const std::string& where) {
  const auto& k = kernels::Active();
  const std::size_t layers = attention.dim(0);
  const std::size_t heads = attention.dim(1);
  const std::size_t rows = attention.dim(2);
  const std::size_t cols = attention.dim(3);
  for (std::size_t l = 0; l < layers; ++l) {
    for (std::size_t h = 0; h < heads; ++h) {
      for (std::size_t r = 0; r < rows; ++r) {
        const auto row = attention.Row({l, h, r});
        for (float v : row) {
          if (!std::isfinite(v) || v < 0.0f) {
            throw ValidationError(where + ": attention weight out of range at layer " +
                                  std::to_string(l) + " head " + std::to_string(h) +
                                  " row " + std::to_string(r));
          }
        }
        const double sum = k.sum_f32(row.data(), row.size());
        if (std::abs(sum - 1.0) > kAttentionRowTolerance) {
          std::ostringstream os;
          os << where << ": attention row not normalized at layer " << l << " head "
             << h << " row " << r << " (sum " << sum << ")";
          throw ValidationError(os.str());
        }
        if (causal) {
          for (std::size_t c = r + 1; c < cols; ++c) {
            if (row[c] > 1e-6f) {
              throw ValidationError(where + ": causal attention not lower-triangular at layer " +
                                    std::to_string(l) + " head " + std::to_string(h) +
                                    " row " + std::to_string(r));
            }
          }
        }
      }
    }
  }
}

void ValidateAnswer(const AnswerProbs& a, const std::string& where) {
  if (!std::isfinite(a.p_yes) || !std::isfinite(a.p_no) || a.p_yes < 0.0 ||
      a.p_no < 0.0) {
    throw ValidationError(where + ": answer probabilities must be non-negative");
  }
  if (a.p_yes + a.p_no > 1.0 + kAnswerMassTolerance) {
    std::ostringstream os;
    os << where << ": answer probabilities exceed 1 (p_yes + p_no = "
       << a.p_yes + a.p_no << ")";
    throw ValidationError(os.str());
  }
}

Bundle ReadBundle(const fs::path& dir, const ReadOptions& options) {
  const std::string where = dir.string();
  Bundle b;
  b.dir = dir;
  b.manifest = ParseManifest(ReadText(dir / "manifest.json"), where);
  BundleManifest& m = b.manifest;
  ValidateManifest(m, where);

  json shapes;
  {
    const json j = json::parse(ReadText(dir / "manifest.json"));
    if (!j.contains("shapes") || !j.at("shapes").is_object()) {
      throw ValidationError(where + ": manifest missing 'shapes'");
    }
    shapes = j.at("shapes");
  }
  const std::size_t T = m.tokens.size();
  const auto L = static_cast<std::size_t>(m.n_layers);
  const auto H = static_cast<std::size_t>(m.n_heads);
  const auto D = static_cast<std::size_t>(m.hidden_dim);

  if (m.payload.hidden) {
    const auto shape = Shape(shapes, "hidden", where);
    ExpectShape(shape, {L + 1, T, D}, "hidden", where);
    const fs::path p = dir / "hidden.f32";
    if (options.load_hidden) {
      b.activations.hidden = FloatTensor(shape, ReadFloat32File(p, FloatTensor::ElementCount(shape)));
      for (float v : b.activations.hidden.data()) {
        if (!std::isfinite(v)) throw ValidationError(where + ": non-finite hidden state");
      }
    } else {
      CheckFileSize(p, FloatTensor::ElementCount(shape));
    }
  }
  if (m.payload.attention) {
    const auto shape = Shape(shapes, "attention", where);
    ExpectShape(shape, {L, H, T, T}, "attention", where);
    const fs::path p = dir / "attn.f32";
    if (options.load_attention) {
      b.activations.attention =
          FloatTensor(shape, ReadFloat32File(p, FloatTensor::ElementCount(shape)));
      ValidateAttention(b.activations.attention, m.causal, where);
    } else {
      CheckFileSize(p, FloatTensor::ElementCount(shape));
    }
  }
  if (m.payload.token_logprob) {
    const auto shape = Shape(shapes, "token_logprob", where);
    ExpectShape(shape, {T}, "token_logprob", where);
    auto lp = ReadFloat32File(dir / "token_logprob.f32", T);
    for (std::size_t t = 0; t < lp.size(); ++t) {
      if (!(lp[t] <= 0.0f)) {
        throw ValidationError(where + ": token_logprob must be <= 0 (token " +
                              std::to_string(t) + ")");
      }
    }
    b.activations.token_logprob = std::move(lp);
  }
  if (m.payload.answer) {
    json a;
    try {
      a = json::parse(ReadText(dir / "answer.json"));
    } catch (const json::parse_error& e) {
      throw ValidationError(where + ": malformed answer.json: " + e.what());
    }
    AnswerProbs probs{Get<double>(a, "p_yes", where + "/answer.json"),
                      Get<double>(a, "p_no", where + "/answer.json")};
    ValidateAnswer(probs, where);
    b.activations.answer = probs;
    if (a.contains("correct")) {
      const json& c = a.at("correct");
      AnswerProbs correct{Get<double>(c, "p_yes", where + "/answer.json correct"),
                          Get<double>(c, "p_no", where + "/answer.json correct")};
      ValidateAnswer(correct, where + " (correct question)");
      b.activations.answer_correct = correct;
    }
  }
  return b;
}

HiddenStates ReadHiddenStates(const fs::path& dir) {
  const std::string where = dir.string();
  json j;
  try {
    j = json::parse(ReadText(dir / "manifest.json"));
  } catch (const json::parse_error& e) {
    throw ValidationError(where + ": malformed manifest: " + e.what());
  }
  HiddenStates h;
  h.model_id = Get<std::string>(j, "model_id", where);
  h.n_layers = Get<int>(j, "n_layers", where);
  h.hidden_dim = Get<int>(j, "hidden_dim", where);
  h.tokens = Get<std::vector<std::string>>(j, "tokens", where);
  h.word_of_token = Get<std::vector<int>>(j, "word_of_token", where);
  if (h.n_layers <= 0 || h.hidden_dim <= 0) {
    throw ValidationError(where + ": n_layers and hidden_dim must be positive");
  }
  if (h.tokens.empty() || h.word_of_token.size() != h.tokens.size() ||
      h.word_of_token.front() != 0) {
    throw ValidationError(where + ": word_of_token must align with tokens and start at 0");
  }
  for (std::size_t t = 1; t < h.word_of_token.size(); ++t) {
    const int step = h.word_of_token[t] - h.word_of_token[t - 1];
    if (step < 0 || step > 1) {
      throw ValidationError(where + ": word_of_token is not monotone and gap-free");
    }
  }
  if (!j.contains("shapes")) throw ValidationError(where + ": manifest missing 'shapes'");
  const auto shape = Shape(j.at("shapes"), "hidden", where);
  ExpectShape(shape,
              {static_cast<std::size_t>(h.n_layers) + 1, h.tokens.size(),
               static_cast<std::size_t>(h.hidden_dim)},
              "hidden", where);
  h.hidden = FloatTensor(shape, ReadFloat32File(dir / "hidden.f32",
                                                FloatTensor::ElementCount(shape)));
  for (float v : h.hidden.data()) {
    if (!std::isfinite(v)) throw ValidationError(where + ": non-finite hidden state");
  }
  return h;
}

bool BundleFilter::Matches(const std::string& item, Variant v, int prefix) const {
  if (items && !items->contains(item)) return false;
  if (variant && *variant != v) return false;
  if (prefix_index && *prefix_index != prefix) return false;
  return true;
}

std::vector<BundleRef> ListBundles(const fs::path& root, const BundleFilter& filter) {
  std::error_code ec;
  if (!fs::is_directory(root, ec)) {
    throw IoError("bundle root is not a directory: " + root.string());
  }
  std::vector<BundleRef> refs;
  for (const auto& item_entry : fs::directory_iterator(root)) {
    if (!item_entry.is_directory()) continue;
    const std::string item = item_entry.path().filename().string();
    for (Variant v : {Variant::kCommaAbsent, Variant::kCommaPresent}) {
      const fs::path vdir = item_entry.path() / std::string(ToString(v));
      if (!fs::is_directory(vdir)) continue;
      for (int k = 1; k <= kNumChunks; ++k) {
        const fs::path pdir = vdir / PrefixDirName(k);
        if (!fs::is_directory(pdir)) continue;
        if (filter.Matches(item, v, k)) refs.push_back({item, v, k, pdir});
      }
    }
  }
  if (refs.empty()) {
    throw ValidationError("no bundles matched under " + root.string());
  }
  std::sort(refs.begin(), refs.end(), [](const BundleRef& a, const BundleRef& b) {
    return std::tie(a.item_id, a.variant, a.prefix_index) <
           std::tie(b.item_id, b.variant, b.prefix_index);
  });
  return refs;
}

Bundle ReadBundle(const BundleRef& ref, const ReadOptions& options) {
  Bundle b = ReadBundle(ref.dir, options);
  if (b.manifest.item_id != ref.item_id || b.manifest.variant != ref.variant ||
      b.manifest.prefix_index != ref.prefix_index) {
    throw ValidationError(ref.dir.string() +
                          ": manifest identity does not match its directory");
  }
  return b;
}

int IterateBundles(const fs::path& root, const BundleFilter& filter,
                   const IterateOptions& options,
                   const std::function<void(const Bundle&)>& visit) {
  int visited = 0;
  for (const BundleRef& ref : ListBundles(root, filter)) {
    Bundle b;
    try {
      b = ReadBundle(ref, options.read);
    } catch (const Error& e) {
      if (!options.lenient) throw;
      log::Warn("skipping bundle: ", e.what());
      continue;
    }
    visit(b);
    ++visited;
  }
  return visited;
}

}  // namespace gpprobe
