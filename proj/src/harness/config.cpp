#include "fga/harness/config.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>

#include "fga/imageio/frame.hpp"

namespace fga::harness {

Metric parse_metric(const std::string& name) {
  if (name == "psnr") return Metric::kPsnr;
  if (name == "ms-ssim" || name == "ms_ssim") return Metric::kMsSsim;
  throw std::invalid_argument(fmt::format("unknown metric '{}' (psnr | ms-ssim)", name));
}

const char* to_string(Metric m) { return m == Metric::kPsnr ? "psnr" : "ms-ssim"; }

namespace {

std::string fmt_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return fmt::format("{}", v);
}

double to_double(const std::string& key, const std::string& s) {
  if (s == "inf" || s == "infinity") return std::numeric_limits<double>::infinity();
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size()) throw std::invalid_argument(fmt::format("{}: '{}' is not a number", key, s));
  return v;
}

long long to_int(const std::string& key, const std::string& s) {
  std::size_t used = 0;
  long long v = 0;
  try {
    v = std::stoll(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size()) throw std::invalid_argument(fmt::format("{}: '{}' is not an integer", key, s));
  return v;
}

bool to_bool(const std::string& key, const std::string& s) {
  if (s == "true" || s == "1" || s == "on" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "off" || s == "no") return false;
  throw std::invalid_argument(fmt::format("{}: '{}' is not a boolean", key, s));
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

template <typename V>
std::string join(const V& values) {
  std::string out;
  for (const auto& v : values) {
    if (!out.empty()) out += ",";
    out += fmt_double(static_cast<double>(v));
  }
  return out;
}

struct Binding {
  std::function<std::string()> get;
  std::function<void(const std::string&)> set;
};

using Table = std::map<std::string, Binding>;  // "section.key"

Binding num(double& v) {
  return {[&v] { return fmt_double(v); }, [&v](const std::string& s) { v = to_double("", s); }};
}

template <typename I>
Binding integer(I& v) {
  return {[&v] { return fmt::format("{}", v); }, [&v](const std::string& s) { v = static_cast<I>(to_int("", s)); }};
}

Binding flag(bool& v) {
  return {[&v] { return v ? std::string("true") : std::string("false"); },
          [&v](const std::string& s) { v = to_bool("", s); }};
}

Binding text(std::string& v) {
  return {[&v] { return v; }, [&v](const std::string& s) { v = s; }};
}

Table run_table(ExperimentConfig& c) {
  Table t;
  t["run.output_dir"] = text(c.output_dir);
  t["run.seed"] = integer(c.seed);
  t["run.gop"] = integer(c.gop);
  t["run.frames"] = integer(c.frames);
  t["run.metric"] = {[&c] { return std::string(to_string(c.metric)); },
                     [&c](const std::string& s) { c.metric = parse_metric(s); }};
  t["mrqa.lambda"] = num(c.lambda);
  t["mrqa.lambda_max"] = num(c.lambda_max);
  t["mrqa.finetune"] = flag(c.mrqa_finetune);
  t["sme.enabled"] = flag(c.sme_enabled);
  t["sme.tau"] = num(c.sme.tau);
  t["sme.delta"] = num(c.sme.delta);
  t["sme.parallel"] = flag(c.sme_parallel);
  t["sme.scales"] = {[&c] { return join(c.sme.scales); },
                     [&c](const std::string& s) {
                       c.sme.scales.clear();
                       for (const auto& item : split_list(s)) c.sme.scales.push_back(to_double("sme.scales", item));
                     }};
  t["tsmc.enabled"] = flag(c.tsmc_enabled);
  t["tsmc.channels"] = {[&c] { return join(c.tsmc.channels); },
                        [&c](const std::string& s) {
                          auto items = split_list(s);
                          if (items.size() != 3)
                            throw std::invalid_argument("tsmc.channels needs three comma-separated values");
                          for (int i = 0; i < 3; ++i)
                            c.tsmc.channels[i] = static_cast<std::size_t>(to_int("tsmc.channels", items[i]));
                        }};
  t["tsmc.groups"] = integer(c.tsmc.groups);
  t["tsmc.kernel"] = integer(c.tsmc.kernel);
  t["flow.levels"] = integer(c.flow.levels);
  t["flow.iterations"] = integer(c.flow.iterations);
  t["flow.window"] = integer(c.flow.window);
  t["flow.regularization"] = num(c.flow.regularization);
  auto& tr = c.train;
  t["train.steps"] = integer(tr.steps);
  t["train.batch"] = integer(tr.batch);
  t["train.learning_rate"] = num(tr.learning_rate);
  t["train.size"] = integer(tr.size);
  t["train.pool"] = integer(tr.pool);
  t["train.eval_pool"] = integer(tr.eval_pool);
  t["train.rate_weight"] = num(tr.rate_weight);
  t["train.motion_fraction"] = num(tr.motion_fraction);
  t["train.context_fraction"] = num(tr.context_fraction);
  t["train.divergence"] = num(tr.divergence);
  t["train.max_shift"] = num(tr.max_shift);
  t["train.max_rotation"] = num(tr.max_rotation);
  t["train.max_zoom"] = num(tr.max_zoom);
  return t;
}

Table sequence_table(SequenceSource& s) {
  Table t;
  t["name"] = text(s.name);
  t["path"] = text(s.path);
  t["width"] = integer(s.width);
  t["height"] = integer(s.height);
  t["frame_rate"] = num(s.frame_rate);
  t["kind"] = {[&s] { return std::string(io::to_string(s.synth.kind)); },
               [&s](const std::string& v) { s.synth.kind = io::parse_synth_kind(v); }};
  t["shift_x"] = num(s.synth.shift_x);
  t["shift_y"] = num(s.synth.shift_y);
  t["rotation"] = num(s.synth.rotation);
  t["zoom"] = num(s.synth.zoom);
  t["texture_period"] = num(s.synth.texture_period);
  t["texture_seed"] = integer(s.synth.seed);
  return t;
}

void apply(Table& table, const std::string& prefix, const boost::property_tree::ptree& section) {
  for (const auto& [key, node] : section) {
    const std::string full = prefix.empty() ? key : prefix + "." + key;
    auto it = table.find(prefix.rfind("sequence", 0) == 0 ? key : full);
    if (it == table.end()) throw std::invalid_argument(fmt::format("unknown config key '{}'", full));
    try {
      it->second.set(node.get_value<std::string>());
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument(fmt::format("{}: {}", full, e.what()));
    }
  }
}

}  // namespace

void ExperimentConfig::validate() const {
  auto fail = [](const std::string& m) { throw std::invalid_argument(m); };
  if (gop < 1) fail(fmt::format("run.gop must be >= 1 (got {})", gop));
  if (frames < 2) fail(fmt::format("run.frames must be >= 2 (got {})", frames));
  if (sequences.empty()) fail("no sequence configured");
  for (const auto& s : sequences) {
    if (s.width < 1 || s.height < 1) fail(fmt::format("sequence {}: bad size {}x{}", s.name, s.width, s.height));
    if (!s.path.empty() && (s.width % 2 || s.height % 2))
      fail(fmt::format("sequence {}: YUV420 needs even dimensions", s.name));
  }
  if (!(lambda >= 0) || !(lambda_max > 0) || lambda > lambda_max)
    fail(fmt::format("mrqa: need 0 <= lambda <= lambda_max, lambda_max > 0 (got {}, {})", lambda, lambda_max));
  sme.validate();
  if (tsmc.kernel % 2 == 0 || tsmc.groups == 0) fail("tsmc: odd kernel and >= 1 group required");
  for (std::size_t ch : tsmc.channels)
    if (ch == 0 || ch % tsmc.groups) fail("tsmc.channels must be positive multiples of tsmc.groups");
  if (flow.levels < 1 || flow.iterations < 1 || flow.window < 1) fail("flow: levels, iterations, window must be >= 1");
  const auto& t = train;
  if (t.steps < 0 || t.batch < 1 || t.pool < 1 || t.eval_pool < 1) fail("train: bad steps/batch/pool");
  if (t.size < 8 || t.size % 4) fail(fmt::format("train.size must be a multiple of 4, >= 8 (got {})", t.size));
  if (!(t.learning_rate > 0)) fail("train.learning_rate must be positive");
  if (t.motion_fraction < 0 || t.context_fraction < 0 || t.motion_fraction + t.context_fraction > 1)
    fail("train: phase fractions must be non-negative and sum to <= 1");
  if (!(t.divergence > 1)) fail("train.divergence must exceed 1");
}

std::string ExperimentConfig::canonical() const {
  ExperimentConfig copy = *this;
  std::vector<std::string> lines;
  for (auto& [k, b] : run_table(copy)) lines.push_back(k + " = " + b.get());
  std::sort(lines.begin(), lines.end());
  for (std::size_t i = 0; i < copy.sequences.size(); ++i)
    for (auto& [k, b] : sequence_table(copy.sequences[i]))
      lines.push_back(fmt::format("sequence{}.{} = {}", i, k, b.get()));
  std::string out;
  for (const auto& l : lines) out += l + "\n";
  return out;
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("SHA-256 failed");
  std::string out;
  for (unsigned int i = 0; i < len; ++i) out += fmt::format("{:02x}", md[i]);
  return out;
}

std::string ExperimentConfig::hash() const { return sha256_hex(canonical()); }

ExperimentConfig parse_config(const std::string& text) {
  boost::property_tree::ptree tree;
  std::istringstream in(text);
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw io::DataError(fmt::format("config line {}: {}", e.line(), e.message()));
  }
  ExperimentConfig c;
  Table table = run_table(c);
  bool have_sequence = false;
  for (const auto& [name, section] : tree) {
    if (section.empty() && !section.data().empty())
      throw std::invalid_argument(fmt::format("config key '{}' outside a section", name));
    if (name.rfind("sequence", 0) == 0) {
      if (!have_sequence) c.sequences.clear();
      have_sequence = true;
      SequenceSource s;
      if (name.rfind("sequence.", 0) == 0)
        s.name = name.substr(9);
      else if (name != "sequence")
        s.name = name;
      Table st = sequence_table(s);
      apply(st, name, section);
      s.synth.width = s.width;
      s.synth.height = s.height;
      c.sequences.push_back(s);
      continue;
    }
    apply(table, name, section);
  }
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io::DataError(fmt::format("cannot open config '{}'", path));
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace fga::harness
