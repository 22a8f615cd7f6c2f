#include "gpprobe/config.h"

#include <cstdlib>
#include <sstream>
#include <thread>

#include "gpprobe/error.h"
#include "gpprobe/table.h"

namespace gpprobe {

namespace {

std::string Trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

}  // namespace

std::map<std::string, std::string> ParseConfigText(std::string_view text,
                                                   const std::string& source_name) {
  std::map<std::string, std::string> out;
  std::istringstream in{std::string(text)};
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string where = source_name + ":" + std::to_string(lineno);
    // Strip comments outside quotes.
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (line[i] == '"') quoted = !quoted;
      if (line[i] == '#' && !quoted) {
        line.resize(i);
        break;
      }
    }
    const std::string t = Trim(line);
    if (t.empty()) continue;
    if (t.front() == '[') {
      if (t.back() != ']') throw ValidationError(where + ": malformed section header");
      section = Trim(std::string_view(t).substr(1, t.size() - 2));
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ValidationError(where + ": expected key = value");
    const std::string key = Trim(std::string_view(t).substr(0, eq));
    std::string value = Trim(std::string_view(t).substr(eq + 1));
    if (key.empty()) throw ValidationError(where + ": empty key");
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
      value = value.substr(1, value.size() - 2);
    }
    out[section.empty() ? key : section + "." + key] = value;
  }
  return out;
}

void RunConfig::Apply(const std::map<std::string, std::string>& values,
                      const std::string& source) {
  for (const auto& [key, value] : values) {
    const std::string where = source + ": " + key;
    if (key == "bundle_root") bundle_root = value;
    else if (key == "corpus") corpus = value;
    else if (key == "treebank") treebank = value;
    else if (key == "activations") activations = value;
    else if (key == "probe.path") probe_path = value;
    else if (key == "probe.rank") probe_rank = ParseInt(value, where);
    else if (key == "probe.layer") {
      if (value == "auto") probe_layer.reset();
      else probe_layer = ParseInt(value, where);
    }
    else if (key == "probe.lr") probe_lr = ParseDouble(value, where);
    else if (key == "probe.epochs") probe_epochs = ParseInt(value, where);
    else if (key == "probe.seed") probe_seed = static_cast<std::uint64_t>(ParseInt(value, where));
    else if (key == "probe.batch_size") probe_batch_size = ParseInt(value, where);
    else if (key == "probe.dev_fraction") probe_dev_fraction = ParseDouble(value, where);
    else if (key == "attention.prefix") attention_prefix = ParseInt(value, where);
    else if (key == "attention.threshold") attention_threshold = ParseDouble(value, where);
    else if (key == "attention.reduction") attention_reduction = value;
    else if (key == "report.out") report_out = value;
    else if (key == "workers") workers = ParseInt(value, where);
    else if (key == "lenient") lenient = (value == "true" || value == "1");
    else throw ValidationError(source + ": unknown configuration key '" + key + "'");
  }
  if (attention_prefix != 4 && attention_prefix != 5) {
    throw ValidationError(source + ": attention.prefix must be 4 or 5");
  }
}

RunConfig LoadRunConfig(const std::filesystem::path& path) {
  RunConfig c;
  c.Apply(ParseConfigText(ReadTextFile(path), path.string()), path.string());
  return c;
}

int ResolveWorkers(int flag_value) {
  if (flag_value > 0) return flag_value;
  if (const char* env = std::getenv("GPPROBE_WORKERS")) {
    try {
      const int n = ParseInt(env, "GPPROBE_WORKERS");
      if (n > 0) return n;
    } catch (const Error&) {
    }
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

}  // namespace gpprobe
