#include "edlab/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

#include "edlab/datasets.hpp"
#include "edlab/io.hpp"

namespace edlab {

namespace {

std::string_view trim(std::string_view s) {
  const auto ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

std::string unquote(std::string_view v) {
  if (v.size() >= 2 && (v.front() == '"' || v.front() == '\'') && v.back() == v.front()) {
    return std::string(v.substr(1, v.size() - 2));
  }
  return std::string(v);
}

// Strips a trailing comment that is not inside quotes.
std::string_view strip_comment(std::string_view line) {
  char quote = 0;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quote) {
      if (c == quote) quote = 0;
    } else if (c == '"' || c == '\'') {
      quote = c;
    } else if (c == '#') {
      return line.substr(0, i);
    }
  }
  return line;
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto* end = v.data() + v.size();
  const auto [p, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || p != end) throw ConfigError("config: " + key + " expects a number, got '" + v + "'");
  return out;
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto* end = v.data() + v.size();
  const auto [p, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || p != end) {
    throw ConfigError("config: " + key + " expects a non-negative integer, got '" + v + "'");
  }
  return out;
}

}  // namespace

KeyValues parse_config_text(std::string_view text) {
  KeyValues kv;
  std::string section;
  std::size_t lineno = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    const auto raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++lineno;
    const auto line = trim(strip_comment(raw));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("config line " + std::to_string(lineno) + ": bad section header");
      section = std::string(trim(line.substr(1, line.size() - 2)));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    }
    const auto key = std::string(trim(line.substr(0, eq)));
    if (key.empty()) throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
    kv[section.empty() ? key : section + "." + key] = unquote(trim(line.substr(eq + 1)));
  }
  return kv;
}

KeyValues parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

std::pair<std::string, std::string> parse_override(std::string_view arg) {
  const auto eq = arg.find('=');
  if (eq == std::string_view::npos || eq == 0) {
    throw ConfigError("--set expects section.key=value, got '" + std::string(arg) + "'");
  }
  return {std::string(trim(arg.substr(0, eq))), unquote(trim(arg.substr(eq + 1)))};
}

const std::vector<std::string>& loss_kinds() {
  static const std::vector<std::string> k{"ed", "ed-discrete", "cd", "sm", "dsm"};
  return k;
}

void RunConfig::apply(const KeyValues& kv) {
  using Setter = std::function<void(const std::string&, const std::string&)>;
  auto dbl = [](double& f) -> Setter { return [&f](auto& k, auto& v) { f = to_double(k, v); }; };
  auto cnt = [](std::size_t& f) -> Setter {
    return [&f](auto& k, auto& v) { f = static_cast<std::size_t>(to_u64(k, v)); };
  };
  auto str = [](std::string& f) -> Setter { return [&f](auto&, auto& v) { f = v; }; };
  const std::map<std::string, Setter> table{
      {"loss.kind", str(loss.kind)},
      {"loss.t", dbl(loss.t)},
      {"loss.m", cnt(loss.m)},
      {"loss.w", dbl(loss.w)},
      {"loss.eps", dbl(loss.eps)},
      {"loss.step_size", dbl(loss.step_size)},
      {"loss.mcmc_steps", cnt(loss.mcmc_steps)},
      {"loss.fd_step", dbl(loss.fd_step)},
      {"model.hidden", cnt(model.hidden)},
      {"model.layers", cnt(model.layers)},
      {"model.activation", str(model.activation)},
      {"model.init", str(model.init)},
      {"data.name", str(data.name)},
      {"data.batch", cnt(data.batch)},
      {"train.iters", cnt(train.iters)},
      {"train.lr", dbl(train.lr)},
      {"train.seed", [this](auto& k, auto& v) { train.seed = to_u64(k, v); }},
      {"eval.grid", cnt(eval.grid)},
      {"eval.logz_n", cnt(eval.logz_n)},
      {"eval.eval_every", cnt(eval.eval_every)},
      {"sample.langevin_steps", cnt(sample.langevin_steps)},
      {"sample.langevin_step_size", dbl(sample.langevin_step_size)},
      {"sample.n", cnt(sample.n)},
  };
  for (const auto& [k, v] : kv) {
    const auto it = table.find(k);
    if (it == table.end()) throw ConfigError("config: unknown key '" + k + "'");
    it->second(k, v);
  }
}

void RunConfig::validate() const {
  if (std::find(loss_kinds().begin(), loss_kinds().end(), loss.kind) == loss_kinds().end()) {
    throw ConfigError("config: unknown loss kind '" + loss.kind + "'");
  }
  if (!(loss.t > 0.0)) throw ConfigError("config: loss.t must be > 0");
  if (loss.m == 0) throw ConfigError("config: loss.m must be >= 1");
  if (!(loss.w >= 0.0)) throw ConfigError("config: loss.w must be >= 0");
  if (!(loss.eps > 0.0 && loss.eps < 1.0)) throw ConfigError("config: loss.eps must lie in (0, 1)");
  if (!(loss.step_size > 0.0) || loss.mcmc_steps == 0) throw ConfigError("config: bad CD sampler settings");
  if (!(loss.fd_step > 0.0)) throw ConfigError("config: loss.fd_step must be > 0");
  if (model.hidden == 0 || model.layers < 1) throw ConfigError("config: model needs hidden >= 1, layers >= 1");
  try {
    (void)activation_from_string(model.activation);
  } catch (const std::exception&) {
    throw ConfigError("config: unknown activation '" + model.activation + "'");
  }
  if (model.init != "xavier" && model.init != "zero") throw ConfigError("config: model.init must be xavier or zero");
  const auto& names = toy2d_names();
  if (std::find(names.begin(), names.end(), data.name) == names.end()) {
    throw ConfigError("config: unknown dataset '" + data.name + "'");
  }
  if (data.batch == 0) throw ConfigError("config: data.batch must be >= 1");
  if (!(train.lr > 0.0)) throw ConfigError("config: train.lr must be > 0");
  if (eval.grid < 2 || eval.logz_n == 0 || eval.eval_every == 0) throw ConfigError("config: bad eval settings");
  if (sample.langevin_steps == 0 || !(sample.langevin_step_size > 0.0)) {
    throw ConfigError("config: bad sampler settings");
  }
}

std::string RunConfig::to_toml() const {
  std::ostringstream o;
  auto q = [](const std::string& s) { return "\"" + s + "\""; };
  auto d = [](double v) { return format_double(v); };
  o << "[loss]\n"
    << "kind = " << q(loss.kind) << "\n"
    << "t = " << d(loss.t) << "\n"
    << "m = " << loss.m << "\n"
    << "w = " << d(loss.w) << "\n"
    << "eps = " << d(loss.eps) << "\n"
    << "step_size = " << d(loss.step_size) << "\n"
    << "mcmc_steps = " << loss.mcmc_steps << "\n"
    << "fd_step = " << d(loss.fd_step) << "\n\n"
    << "[model]\n"
    << "hidden = " << model.hidden << "\n"
    << "layers = " << model.layers << "\n"
    << "activation = " << q(model.activation) << "\n"
    << "init = " << q(model.init) << "\n\n"
    << "[data]\n"
    << "name = " << q(data.name) << "\n"
    << "batch = " << data.batch << "\n\n"
    << "[train]\n"
    << "iters = " << train.iters << "\n"
    << "lr = " << d(train.lr) << "\n"
    << "seed = " << train.seed << "\n\n"
    << "[eval]\n"
    << "grid = " << eval.grid << "\n"
    << "logz_n = " << eval.logz_n << "\n"
    << "eval_every = " << eval.eval_every << "\n\n"
    << "[sample]\n"
    << "langevin_steps = " << sample.langevin_steps << "\n"
    << "langevin_step_size = " << d(sample.langevin_step_size) << "\n"
    << "n = " << sample.n << "\n";
  return o.str();
}

}  // namespace edlab
