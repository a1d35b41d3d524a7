#include "reco/config.hpp"

#include <functional>
#include <map>

#include "reco/error.hpp"
#include "reco/io.hpp"

namespace reco {

namespace {

using Setter = std::function<void(RunConfig&, std::string_view)>;

bool parse_bool(std::string_view v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  fail_config("expected true|false, got '" + std::string(v) + "'");
}

template <typename T>
T number(std::string_view v) {
  try {
    if constexpr (std::is_floating_point_v<T>) {
      return static_cast<T>(io::parse_double(v, "value"));
    } else {
      const auto x = io::parse_int(v, "value");
      if constexpr (std::is_unsigned_v<T>) {
        if (x < 0) fail_config("expected a non-negative integer, got '" + std::string(v) + "'");
      }
      return static_cast<T>(x);
    }
  } catch (const Error& e) {
    fail_config(e.what());
  }
}

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"seed", [](RunConfig& c, std::string_view v) { c.set_seed(number<std::uint64_t>(v)); }},
      {"synth.feature_dim", [](RunConfig& c, std::string_view v) { c.synth.feature_dim = number<int>(v); }},
      {"synth.samples_per_class", [](RunConfig& c, std::string_view v) { c.synth.samples_per_class = number<int>(v); }},
      {"synth.drift_scale", [](RunConfig& c, std::string_view v) { c.synth.drift_scale = number<double>(v); }},
      {"synth.noise_scale", [](RunConfig& c, std::string_view v) { c.synth.noise_scale = number<double>(v); }},
      {"synth.test_fraction", [](RunConfig& c, std::string_view v) { c.synth.test_fraction = number<double>(v); }},
      {"train.objective", [](RunConfig& c, std::string_view v) { c.train.objective = parse_objective(v); }},
      {"train.alpha", [](RunConfig& c, std::string_view v) { c.train.alpha = number<double>(v); }},
      {"train.lr_max", [](RunConfig& c, std::string_view v) { c.train.lr_max = number<double>(v); }},
      {"train.momentum", [](RunConfig& c, std::string_view v) { c.train.momentum = number<double>(v); }},
      {"train.weight_decay", [](RunConfig& c, std::string_view v) { c.train.weight_decay = number<double>(v); }},
      {"train.temperature", [](RunConfig& c, std::string_view v) { c.train.temperature = number<double>(v); }},
      {"train.epochs", [](RunConfig& c, std::string_view v) { c.train.epochs = number<int>(v); }},
      {"train.batch_size", [](RunConfig& c, std::string_view v) { c.train.batch_size = number<int>(v); }},
      {"train.hidden_dim", [](RunConfig& c, std::string_view v) { c.train.hidden_dim = number<int>(v); }},
      {"train.embed_dim", [](RunConfig& c, std::string_view v) { c.train.embed_dim = number<int>(v); }},
      {"train.view_noise", [](RunConfig& c, std::string_view v) { c.train.view_noise = number<double>(v); }},
      {"train.resample_every_step", [](RunConfig& c, std::string_view v) { c.train.resample_every_step = parse_bool(v); }},
      {"train.include_positive_in_denominator",
       [](RunConfig& c, std::string_view v) { c.train.include_positive_in_denominator = parse_bool(v); }},
      {"train.mean_over_positives", [](RunConfig& c, std::string_view v) { c.train.mean_over_positives = parse_bool(v); }},
      {"train.normalization", [](RunConfig& c, std::string_view v) { c.train.normalization = parse_normalization(v); }},
      {"probe.l2", [](RunConfig& c, std::string_view v) { c.probe.l2 = number<double>(v); }},
      {"probe.max_iter", [](RunConfig& c, std::string_view v) { c.probe.max_iter = number<int>(v); }},
      {"probe.tolerance", [](RunConfig& c, std::string_view v) { c.probe.tolerance = number<double>(v); }},
      {"curate.min_images", [](RunConfig& c, std::string_view v) { c.curate.min_images = number<long long>(v); }},
      {"curate.min_classes", [](RunConfig& c, std::string_view v) { c.curate.min_classes = number<std::size_t>(v); }},
      {"curate.max_hamming", [](RunConfig& c, std::string_view v) { c.curate.max_hamming = number<int>(v); }},
  };
  return table;
}

}  // namespace

void RunConfig::set_seed(std::uint64_t s) {
  seed = s;
  synth.seed = s;
  train.seed = s;
}

RunConfig RunConfig::parse(std::string_view text, const std::string& source) {
  RunConfig cfg;
  bool view_noise_set = false;
  std::string section;
  const auto lines = io::split(text, '\n');
  for (std::size_t ln = 0; ln < lines.size(); ++ln) {
    const auto where = source + ":" + std::to_string(ln + 1);
    auto line = io::trim(lines[ln]);
    if (line.empty() || line.front() == '#') continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail_config(where + ": malformed section header");
      section = std::string(io::trim(line.substr(1, line.size() - 2)));
      if (section != "synth" && section != "train" && section != "probe" && section != "curate") {
        fail_config(where + ": unknown section [" + section + "]");
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) fail_config(where + ": expected key = value");
    const auto key = std::string(io::trim(line.substr(0, eq)));
    const auto value = io::trim(line.substr(eq + 1));
    const auto full = section.empty() ? key : section + "." + key;
    auto it = setters().find(full);
    if (it == setters().end()) fail_config(where + ": unknown key '" + full + "'");
    if (full == "train.view_noise") view_noise_set = true;
    try {
      it->second(cfg, value);
    } catch (const Error& e) {
      fail_config(where + ": " + e.what());
    }
  }
  // Views jitter by half the within-class spread unless told otherwise.
  if (!view_noise_set) cfg.train.view_noise = cfg.synth.noise_scale / 2.0;
  return cfg;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  std::string text;
  try {
    text = io::read_file(path);
  } catch (const Error& e) {
    fail_config(e.what());
  }
  return parse(text, path.string());
}

std::string RunConfig::to_text() const {
  auto b = [](bool v) { return std::string(v ? "true" : "false"); };
  auto d = [](double v) { return io::format_double(v); };
  std::string out;
  out += "seed = " + std::to_string(seed) + "\n\n";
  out += "[synth]\n";
  out += "feature_dim = " + std::to_string(synth.feature_dim) + "\n";
  out += "samples_per_class = " + std::to_string(synth.samples_per_class) + "\n";
  out += "drift_scale = " + d(synth.drift_scale) + "\n";
  out += "noise_scale = " + d(synth.noise_scale) + "\n";
  out += "test_fraction = " + d(synth.test_fraction) + "\n\n";
  out += "[train]\n";
  out += std::string("objective = ") + to_string(train.objective) + "\n";
  out += "alpha = " + d(train.alpha) + "\n";
  out += "lr_max = " + d(train.lr_max) + "\n";
  out += "momentum = " + d(train.momentum) + "\n";
  out += "weight_decay = " + d(train.weight_decay) + "\n";
  out += "temperature = " + d(train.temperature) + "\n";
  out += "epochs = " + std::to_string(train.epochs) + "\n";
  out += "batch_size = " + std::to_string(train.batch_size) + "\n";
  out += "hidden_dim = " + std::to_string(train.hidden_dim) + "\n";
  out += "embed_dim = " + std::to_string(train.embed_dim) + "\n";
  out += "view_noise = " + d(train.view_noise) + "\n";
  out += "resample_every_step = " + b(train.resample_every_step) + "\n";
  out += "include_positive_in_denominator = " + b(train.include_positive_in_denominator) + "\n";
  out += "mean_over_positives = " + b(train.mean_over_positives) + "\n";
  out += std::string("normalization = ") + to_string(train.normalization) + "\n\n";
  out += "[probe]\n";
  out += "l2 = " + d(probe.l2) + "\n";
  out += "max_iter = " + std::to_string(probe.max_iter) + "\n";
  out += "tolerance = " + d(probe.tolerance) + "\n\n";
  out += "[curate]\n";
  out += "min_images = " + std::to_string(curate.min_images) + "\n";
  out += "min_classes = " + std::to_string(curate.min_classes) + "\n";
  out += "max_hamming = " + std::to_string(curate.max_hamming) + "\n";
  return out;
}

}  // namespace reco
