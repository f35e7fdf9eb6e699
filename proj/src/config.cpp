#include "radet/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "json.hpp"
#include "radet/error.hpp"

namespace radet {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

// Shortest text that parses back to the same double.
std::string format_number(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

template <class T>
std::string join(const std::vector<T>& items, const std::function<std::string(const T&)>& f) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) out += (i ? ", " : "") + f(items[i]);
  return out;
}

class LineContext {
 public:
  LineContext(std::string source, std::size_t line, std::string key)
      : source_(std::move(source)), line_(line), key_(std::move(key)) {}

  [[noreturn]] void error(const std::string& why) const {
    fail(ErrorKind::validation, source_ + ":" + std::to_string(line_) + ": " + key_ + ": " + why);
  }

  double number(const std::string& v) const {
    std::size_t used = 0;
    double x = 0.0;
    try {
      x = std::stod(v, &used);
    } catch (const std::exception&) {
      error("expected a number, got '" + v + "'");
    }
    if (used != v.size() || !std::isfinite(x)) error("expected a finite number, got '" + v + "'");
    return x;
  }

  std::uint64_t integer(const std::string& v) const {
    if (v.empty() || v.find_first_not_of("0123456789") != std::string::npos) {
      error("expected a non-negative integer, got '" + v + "'");
    }
    try {
      return std::stoull(v);
    } catch (const std::exception&) {
      error("integer out of range: '" + v + "'");
    }
  }

  bool boolean(const std::string& v) const {
    if (v == "true" || v == "yes" || v == "1") return true;
    if (v == "false" || v == "no" || v == "0") return false;
    error("expected true or false, got '" + v + "'");
  }

  std::vector<double> number_grid(const std::string& v) const {
    if (v.find(':') != std::string::npos) {
      std::vector<std::string> parts;
      std::stringstream ss(v);
      std::string p;
      while (std::getline(ss, p, ':')) parts.push_back(trim(p));
      if (parts.size() != 3) error("range must be start:stop:step");
      const double start = number(parts[0]);
      const double stop = number(parts[1]);
      const double step = number(parts[2]);
      if (!(step > 0.0) || stop < start) error("range needs step > 0 and stop >= start");
      std::vector<double> out;
      const auto count = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
      for (std::size_t i = 0; i < count; ++i) out.push_back(start + static_cast<double>(i) * step);
      return out;
    }
    std::vector<double> out;
    for (const auto& item : split_list(v)) out.push_back(number(item));
    if (out.empty()) error("empty list");
    return out;
  }

  std::vector<std::size_t> size_list(const std::string& v) const {
    std::vector<std::size_t> out;
    for (const auto& item : split_list(v)) out.push_back(static_cast<std::size_t>(integer(item)));
    return out;
  }

 private:
  std::string source_;
  std::size_t line_;
  std::string key_;
};

using Setter = std::function<void(RunConfig&, const std::string&, const LineContext&)>;

struct KeySpec {
  const char* key;
  Setter set;
};

const std::vector<KeySpec>& schema() {
  static const std::vector<KeySpec> keys = {
      {"scenario.families",
       [](RunConfig& c, const std::string& v, const LineContext& ctx) {
         c.families.clear();
         for (const auto& item : split_list(v)) {
           try {
             c.families.push_back(parse_clutter_family(item));
           } catch (const Error& e) {
             ctx.error(e.what());
           }
         }
         if (c.families.empty()) ctx.error("empty list");
       }},
      {"scenario.m", [](RunConfig& c, const std::string& v, const LineContext& ctx) { c.scenario.m = ctx.integer(v); }},
      {"scenario.k_secondary",
       [](RunConfig& c, const std::string& v, const LineContext& ctx) { c.scenario.k_secondary = ctx.integer(v); }},
      {"scenario.rho", [](RunConfig& c, const std::string& v, const LineContext& ctx) { c.scenario.rho = ctx.number(v); }},
      {"scenario.texture_shape",
       [](RunConfig& c, const std::string& v, const LineContext& ctx) { c.scenario.texture_shape = ctx.number(v); }},
      {"scenario.texture_sharing",
       [](RunConfig& c, const std::string& v, const LineContext& ctx) {
         try {
           c.scenario.texture_sharing = parse_texture_sharing(v);
         } catch (const Error& e) {
           ctx.error(e.what());
         }
       }},
      {"scenario.noise_power",
       [](RunConfig& c, const std::string& v, const LineContext& ctx) { c.scenario.noise_power = ctx.number(v); }},
      {"scenario.pfa", [](RunConfig& c, const std::string& v, const LineContext& ctx) { c.scenario.pfa = ctx.number(v); }},
      {"scenario.snr_db",
       [](RunConfig& c, const std::string& v, const LineContext& ctx) { c.scenario.snr_grid_db = ctx.number_grid(v); }},
      {"scenario.doppler_bins",
       [](RunConfig& c, const std::string& v, const LineContext& ctx) {
         c.scenario.doppler_bins.clear();
         if (v == "all") return;  // resolved against m in scenario_for
         for (double d : ctx.number_grid(v)) {
           if (d != std::floor(d)) ctx.error("Doppler bins must be integers");
           c.scenario.doppler_bins.push_back(static_cast<int>(d));
         }
       }},
      {"scenario.n_train",
       [](RunConfig& c, const std::string& v, const LineContext& ctx) { c.scenario.n_train = ctx.integer(v); }},
      {"scenario.n_cal", [](RunConfig& c, const std::string& v, const LineContext& ctx) { c.scenario.n_cal = ctx.integer(v); }},
      {"scenario.n_verify",
       [](RunConfig& c, const std::string& v, const LineContext& ctx) { c.scenario.n_verify = ctx.integer(v); }},
      {"scenario.n_test",
       [](RunConfig& c, const std::string& v, const LineContext& ctx) { c.scenario.n_test = ctx.integer(v); }},
      {"scenario.seed",
       [](RunConfig& c, const std::string& v, const LineContext& ctx) { c.scenario.master_seed = ctx.integer(v); }},
      {"detectors",
       [](RunConfig& c, const std::string& v, const LineContext& ctx) {
         c.detectors.clear();
         for (const auto& item : split_list(v)) {
           try {
             c.detectors.push_back(parse_detector_tag(item));
           } catch (const Error& e) {
             ctx.error(e.what());
           }
         }
         if (c.detectors.empty()) ctx.error("empty detector list");
       }},
      {"svdd.nu", [](RunConfig& c, const std::string& v, const LineContext& ctx) { c.svdd_nu = ctx.number(v); }},
      {"svdd.tol", [](RunConfig& c, const std::string& v, const LineContext& ctx) { c.svdd_solver.tol = ctx.number(v); }},
      {"svdd.max_pair_updates",
       [](RunConfig& c, const std::string& v, const LineContext& ctx) { c.svdd_solver.max_pair_updates = ctx.integer(v); }},
      {"dsvdd.channels",
       [](RunConfig& c, const std::string& v, const LineContext& ctx) { c.network.channels = ctx.size_list(v); }},
      {"dsvdd.kernel", [](RunConfig& c, const std::string& v, const LineContext& ctx) { c.network.kernel = ctx.integer(v); }},
      {"dsvdd.padding", [](RunConfig& c, const std::string& v, const LineContext& ctx) { c.network.padding = ctx.integer(v); }},
      {"dsvdd.pool", [](RunConfig& c, const std::string& v, const LineContext& ctx) { c.network.pool = ctx.integer(v); }},
      {"dsvdd.leaky_slope",
       [](RunConfig& c, const std::string& v, const LineContext& ctx) { c.network.leaky_slope = ctx.number(v); }},
      {"dsvdd.rep_dim", [](RunConfig& c, const std::string& v, const LineContext& ctx) { c.network.rep_dim = ctx.integer(v); }},
      {"dsvdd.epochs", [](RunConfig& c, const std::string& v, const LineContext& ctx) { c.train.epochs = ctx.integer(v); }},
      {"dsvdd.batch_size",
       [](RunConfig& c, const std::string& v, const LineContext& ctx) { c.train.batch_size = ctx.integer(v); }},
      {"dsvdd.learning_rate",
       [](RunConfig& c, const std::string& v, const LineContext& ctx) { c.train.learning_rate = ctx.number(v); }},
      {"dsvdd.milestones",
       [](RunConfig& c, const std::string& v, const LineContext& ctx) { c.train.milestones = ctx.size_list(v); }},
      {"dsvdd.lr_gamma", [](RunConfig& c, const std::string& v, const LineContext& ctx) { c.train.gamma = ctx.number(v); }},
      {"dsvdd.weight_decay",
       [](RunConfig& c, const std::string& v, const LineContext& ctx) { c.train.weight_decay = ctx.number(v); }},
      {"dsvdd.seed", [](RunConfig& c, const std::string& v, const LineContext& ctx) { c.train.seed = ctx.integer(v); }},
      {"tyler.tol", [](RunConfig& c, const std::string& v, const LineContext& ctx) { c.tyler.tol = ctx.number(v); }},
      {"tyler.max_iter",
       [](RunConfig& c, const std::string& v, const LineContext& ctx) {
         c.tyler.max_iter = static_cast<int>(ctx.integer(v));
       }},
      {"output.plots", [](RunConfig& c, const std::string& v, const LineContext& ctx) { c.plots = ctx.boolean(v); }},
  };
  return keys;
}

}  // namespace

Scenario RunConfig::scenario_for(ClutterFamily family) const {
  Scenario s = scenario;
  s.family = family;
  if (s.doppler_bins.empty()) {
    for (std::size_t d = 0; d < s.m; ++d) s.doppler_bins.push_back(static_cast<int>(d));
  }
  return s;
}

void RunConfig::validate() const {
  if (families.empty()) fail(ErrorKind::validation, "scenario.families: empty");
  if (detectors.empty()) fail(ErrorKind::validation, "detectors: empty");
  if (scenario.snr_grid_db.empty()) fail(ErrorKind::validation, "scenario.snr_db: empty grid");
  for (auto f : families) scenario_for(f).validate();
  if (!(svdd_nu > 0.0 && svdd_nu <= 1.0)) fail(ErrorKind::validation, "svdd.nu: must lie in (0, 1]");
  if (svdd_nu * static_cast<double>(scenario.n_train) < 1.0) {
    fail(ErrorKind::validation, "svdd.nu: nu * n_train must be >= 1");
  }
  if (!(svdd_solver.tol > 0.0)) fail(ErrorKind::validation, "svdd.tol: must be > 0");
  if (!(tyler.tol > 0.0) || tyler.max_iter < 1) fail(ErrorKind::validation, "tyler: tol > 0 and max_iter >= 1");
  train.validate();
  try {
    network.check_input_length(scenario.m);
  } catch (const Error& e) {
    fail(ErrorKind::validation, std::string("dsvdd: ") + e.what());
  }
  std::set<DetectorTag> seen;
  for (auto d : detectors) {
    if (!seen.insert(d).second) fail(ErrorKind::validation, "detectors: duplicate " + to_string(d));
  }
  const double min_cal = 1.0 / scenario.pfa;
  if (static_cast<double>(scenario.n_cal) < min_cal) {
    fail(ErrorKind::validation, "scenario.n_cal: need at least 1/pfa calibration samples");
  }
}

std::string RunConfig::to_text() const {
  std::ostringstream os;
  const Scenario& s = scenario;
  os << "scenario.families = "
     << join<ClutterFamily>(families, [](const ClutterFamily& f) { return to_string(f); }) << '\n';
  os << "scenario.m = " << s.m << '\n';
  os << "scenario.k_secondary = " << s.k_secondary << '\n';
  os << "scenario.rho = " << format_number(s.rho) << '\n';
  os << "scenario.texture_shape = " << format_number(s.texture_shape) << '\n';
  os << "scenario.texture_sharing = " << to_string(s.texture_sharing) << '\n';
  os << "scenario.noise_power = " << format_number(s.noise_power) << '\n';
  os << "scenario.pfa = " << format_number(s.pfa) << '\n';
  os << "scenario.snr_db = " << join<double>(s.snr_grid_db, format_number) << '\n';
  os << "scenario.doppler_bins = "
     << (s.doppler_bins.empty() ? std::string("all")
                                : join<int>(s.doppler_bins, [](const int& d) { return std::to_string(d); }))
     << '\n';
  os << "scenario.n_train = " << s.n_train << '\n';
  os << "scenario.n_cal = " << s.n_cal << '\n';
  os << "scenario.n_verify = " << s.n_verify << '\n';
  os << "scenario.n_test = " << s.n_test << '\n';
  os << "scenario.seed = " << s.master_seed << '\n';
  os << "detectors = " << join<DetectorTag>(detectors, [](const DetectorTag& d) { return to_string(d); }) << '\n';
  os << "svdd.nu = " << format_number(svdd_nu) << '\n';
  os << "svdd.tol = " << format_number(svdd_solver.tol) << '\n';
  os << "svdd.max_pair_updates = " << svdd_solver.max_pair_updates << '\n';
  auto sizes = [](const std::vector<std::size_t>& v) {
    return join<std::size_t>(v, [](const std::size_t& x) { return std::to_string(x); });
  };
  os << "dsvdd.channels = " << sizes(network.channels) << '\n';
  os << "dsvdd.kernel = " << network.kernel << '\n';
  os << "dsvdd.padding = " << network.padding << '\n';
  os << "dsvdd.pool = " << network.pool << '\n';
  os << "dsvdd.leaky_slope = " << format_number(network.leaky_slope) << '\n';
  os << "dsvdd.rep_dim = " << network.rep_dim << '\n';
  os << "dsvdd.epochs = " << train.epochs << '\n';
  os << "dsvdd.batch_size = " << train.batch_size << '\n';
  os << "dsvdd.learning_rate = " << format_number(train.learning_rate) << '\n';
  os << "dsvdd.milestones = " << sizes(train.milestones) << '\n';
  os << "dsvdd.lr_gamma = " << format_number(train.gamma) << '\n';
  os << "dsvdd.weight_decay = " << format_number(train.weight_decay) << '\n';
  os << "dsvdd.seed = " << train.seed << '\n';
  os << "tyler.tol = " << format_number(tyler.tol) << '\n';
  os << "tyler.max_iter = " << tyler.max_iter << '\n';
  os << "output.plots = " << (plots ? "true" : "false") << '\n';
  return os.str();
}

RunConfig parse_config(const std::string& text, const std::string& source) {
  RunConfig cfg;
  std::map<std::string, std::size_t> seen;
  std::istringstream is(text);
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(is, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      fail(ErrorKind::validation, source + ":" + std::to_string(line_no) + ": expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const LineContext ctx(source, line_no, key);
    if (value.empty()) ctx.error("missing value");
    const auto it = std::find_if(schema().begin(), schema().end(), [&](const KeySpec& k) { return key == k.key; });
    if (it == schema().end()) ctx.error("unknown key");
    if (auto [pos, inserted] = seen.emplace(key, line_no); !inserted) {
      ctx.error("duplicate key (first set on line " + std::to_string(pos->second) + ")");
    }
    it->set(cfg, value, ctx);
  }
  try {
    cfg.validate();
  } catch (const Error& e) {
    // point at the line that set the offending key when there is one
    const std::string what = e.what();
    std::string key = what.substr(0, what.find(':'));
    if (key == "scenario.snr_grid_db") key = "scenario.snr_db";
    const auto line = seen.find(key);
    const std::string where = line == seen.end() ? source : source + ":" + std::to_string(line->second);
    fail(ErrorKind::validation, where + ": " + what);
  }
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) fail(ErrorKind::io, "cannot read config " + path.string());
  std::stringstream buf;
  buf << is.rdbuf();
  const std::string text = buf.str();
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    try {
      const auto manifest = nlohmann::json::parse(text);
      return parse_config(manifest.at("config_text").get<std::string>(), path.string() + "#config_text");
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorKind::validation, path.string() + ": not a run manifest: " + e.what());
    }
  }
  return parse_config(text, path.string());
}

}  // namespace radet
