#include "g2r/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <nlohmann/json.hpp>
#include <sstream>
#include <vector>

namespace g2r {
namespace {

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  s = s.substr(b, e - b + 1);
  if (s.size() >= 2 && (s.front() == '"' || s.front() == '\'') && s.back() == s.front()) {
    s = s.substr(1, s.size() - 2);
  }
  return s;
}

std::string format_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

template <typename N>
N parse_number(const std::string& key, const std::string& text) {
  N value{};
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw ConfigError("config key '" + key + "': expected a number, got '" + text + "'");
  }
  return value;
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
  if (text == "false" || text == "0" || text == "no" || text == "off") return false;
  throw ConfigError("config key '" + key + "': expected one of true/false, got '" + text + "'");
}

struct Field {
  std::function<std::string(const TrainConfig&)> get;
  std::function<void(TrainConfig&, const std::string& key, const std::string&)> set;
};

template <typename M>
Field number_field(M TrainConfig::*member) {
  return {[member](const TrainConfig& c) {
            if constexpr (std::is_floating_point_v<M>) {
              return format_double(c.*member);
            } else {
              return std::to_string(c.*member);
            }
          },
          [member](TrainConfig& c, const std::string& k, const std::string& v) {
            c.*member = parse_number<M>(k, v);
          }};
}

Field weight_field(double LossWeights::*member) {
  return {[member](const TrainConfig& c) { return format_double(c.weights.*member); },
          [member](TrainConfig& c, const std::string& k, const std::string& v) {
            c.weights.*member = parse_number<double>(k, v);
          }};
}

Field bool_field(bool TrainConfig::*member) {
  return {[member](const TrainConfig& c) { return std::string(c.*member ? "true" : "false"); },
          [member](TrainConfig& c, const std::string& k, const std::string& v) {
            c.*member = parse_bool(k, v);
          }};
}

Field string_field(std::string TrainConfig::*member) {
  return {[member](const TrainConfig& c) { return c.*member; },
          [member](TrainConfig& c, const std::string&, const std::string& v) { c.*member = v; }};
}

const std::vector<std::pair<std::string, Field>>& fields() {
  static const std::vector<std::pair<std::string, Field>> table = {
      {"train.epochs", number_field(&TrainConfig::epochs)},
      {"train.lr_base", number_field(&TrainConfig::lr_base)},
      {"train.decay_start_epoch", number_field(&TrainConfig::decay_start_epoch)},
      {"train.momentum1", number_field(&TrainConfig::momentum1)},
      {"train.momentum2", number_field(&TrainConfig::momentum2)},
      {"train.batch_size", number_field(&TrainConfig::batch_size)},
      {"train.init_std", number_field(&TrainConfig::init_std)},
      {"train.seed", number_field(&TrainConfig::seed)},
      {"train.detach_G_from_I", bool_field(&TrainConfig::detach_G_from_I)},
      {"train.detach_I_from_R", bool_field(&TrainConfig::detach_I_from_R)},
      {"train.supervised_mode", bool_field(&TrainConfig::supervised_mode)},
      {"train.real_shadow_policy",
       {[](const TrainConfig& c) { return policy_name(c.real_shadow_policy); },
        [](TrainConfig& c, const std::string& k, const std::string& v) {
          if (v == "same_image") {
            c.real_shadow_policy = RealShadowPolicy::kSameImage;
          } else if (v == "any_image") {
            c.real_shadow_policy = RealShadowPolicy::kAnyImage;
          } else {
            throw ConfigError("config key '" + k + "': expected one of same_image/any_image, got '" + v + "'");
          }
        }}},
      {"train.max_steps", number_field(&TrainConfig::max_steps)},
      {"train.checkpoint_keep", number_field(&TrainConfig::checkpoint_keep)},
      {"loss.w_gan", weight_field(&LossWeights::gan)},
      {"loss.w_iden", weight_field(&LossWeights::iden)},
      {"loss.w_rem", weight_field(&LossWeights::rem)},
      {"loss.w_full", weight_field(&LossWeights::full)},
      {"loss.w_area", weight_field(&LossWeights::area)},
      {"loss.tau", number_field(&TrainConfig::tau)},
      {"data.root", string_field(&TrainConfig::data_root)},
      {"data.alpha", number_field(&TrainConfig::alpha)},
      {"data.load_size", number_field(&TrainConfig::load_size)},
      {"data.crop_size", number_field(&TrainConfig::crop_size)},
      {"data.flip", bool_field(&TrainConfig::flip)},
      {"data.max_retries", number_field(&TrainConfig::max_retries)},
      {"data.max_records", number_field(&TrainConfig::max_records)},
      {"model.base_channels", number_field(&TrainConfig::base_channels)},
      {"model.residual_blocks", number_field(&TrainConfig::residual_blocks)},
      {"model.disc_channels", number_field(&TrainConfig::disc_channels)},
      {"eval.test_size", number_field(&TrainConfig::test_size)},
      {"output.dir", string_field(&TrainConfig::output_dir)},
  };
  return table;
}

std::string accepted_keys() {
  std::string out;
  for (const auto& [k, f] : fields()) out += (out.empty() ? "" : ", ") + k;
  return out;
}

}  // namespace

std::string policy_name(RealShadowPolicy p) {
  return p == RealShadowPolicy::kSameImage ? "same_image" : "any_image";
}

void TrainConfig::validate() const {
  auto fail = [](const std::string& key, const std::string& why) {
    throw ConfigError("config key '" + key + "': " + why);
  };
  if (epochs <= 0) fail("train.epochs", "must be positive");
  if (!(lr_base > 0) || !std::isfinite(lr_base)) fail("train.lr_base", "must be positive");
  if (decay_start_epoch < 0 || decay_start_epoch > epochs) {
    fail("train.decay_start_epoch", "must lie in [0, epochs]");
  }
  if (!(momentum1 >= 0 && momentum1 < 1)) fail("train.momentum1", "must lie in [0,1)");
  if (!(momentum2 >= 0 && momentum2 < 1)) fail("train.momentum2", "must lie in [0,1)");
  if (batch_size <= 0) fail("train.batch_size", "must be positive");
  if (!(init_std > 0)) fail("train.init_std", "must be positive");
  if (max_steps < 0) fail("train.max_steps", "must be >= 0");
  if (checkpoint_keep <= 0) fail("train.checkpoint_keep", "must be positive");
  weights.validate();
  if (tau < 0) fail("loss.tau", "must be >= 0");
  if (!(alpha > 0 && alpha < 1)) fail("data.alpha", "must lie in (0,1)");
  if (crop_size <= 0 || crop_size % 4 != 0) fail("data.crop_size", "must be a positive multiple of 4");
  if (load_size < crop_size) fail("data.load_size", "must be >= crop_size");
  if (max_retries <= 0) fail("data.max_retries", "must be positive");
  if (max_records < 0) fail("data.max_records", "must be >= 0");
  if (base_channels <= 0) fail("model.base_channels", "must be positive");
  if (residual_blocks < 0) fail("model.residual_blocks", "must be >= 0");
  if (disc_channels <= 0) fail("model.disc_channels", "must be positive");
  if (test_size <= 0 || test_size % 4 != 0) fail("eval.test_size", "must be a positive multiple of 4");
}

ConfigMap to_map(const TrainConfig& cfg) {
  ConfigMap out;
  for (const auto& [k, f] : fields()) out[k] = f.get(cfg);
  return out;
}

TrainConfig apply_overrides(TrainConfig base, const ConfigMap& values) {
  for (const auto& [key, value] : values) {
    auto it = std::find_if(fields().begin(), fields().end(),
                           [&key](const auto& kv) { return kv.first == key; });
    if (it == fields().end()) {
      throw ConfigError("unknown config key '" + key + "'; accepted keys: " + accepted_keys());
    }
    it->second.set(base, key, trim(value));
  }
  return base;
}

TrainConfig load_config(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw ConfigError("config file not found: " + path.string());
  ConfigMap values;
  if (path.extension() == ".json") {
    std::ifstream in(path);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("cannot parse " + path.string() + ": " + e.what());
    }
    const nlohmann::json& c = j.contains("config") ? j.at("config") : j;
    for (const auto& [k, v] : c.items()) values[k] = v.is_string() ? v.get<std::string>() : v.dump();
  } else {
    boost::property_tree::ptree tree;
    try {
      boost::property_tree::read_ini(path.string(), tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
      throw ConfigError("cannot parse " + path.string() + ": " + e.what());
    }
    for (const auto& [section, body] : tree) {
      if (body.empty()) {
        throw ConfigError("config key '" + section + "' must live inside a [section]");
      }
      for (const auto& [key, node] : body) {
        std::string v = node.data();
        // Strip trailing comments.
        for (const char* marker : {" #", "\t#", " ;", "\t;"}) {
          if (auto pos = v.find(marker); pos != std::string::npos) v = v.substr(0, pos);
        }
        values[section + "." + key] = v;
      }
    }
  }
  TrainConfig cfg = apply_overrides(TrainConfig{}, values);
  cfg.validate();
  return cfg;
}

std::string config_text(const TrainConfig& cfg) {
  std::ostringstream os;
  std::string section;
  for (const auto& [key, f] : fields()) {
    const auto dot = key.find('.');
    const std::string s = key.substr(0, dot);
    if (s != section) {
      os << (section.empty() ? "" : "\n") << '[' << s << "]\n";
      section = s;
    }
    os << key.substr(dot + 1) << " = " << f.get(cfg) << '\n';
  }
  return os.str();
}

void save_config(const std::filesystem::path& path, const TrainConfig& cfg) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << config_text(cfg);
}

std::uint64_t config_hash(const TrainConfig& cfg) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : config_text(cfg)) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace g2r
