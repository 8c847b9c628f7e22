#include "overtake/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "overtake/error.hpp"

namespace overtake {

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

double parse_double(const std::string& key, const std::string& text) {
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size())
    throw ConfigError("config: '" + key + "' expects a number, got '" + text + "'");
  return v;
}

template <typename Int>
Int parse_int(const std::string& key, const std::string& text) {
  Int v = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size())
    throw ConfigError("config: '" + key + "' expects an integer, got '" + text + "'");
  return v;
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1") return true;
  if (text == "false" || text == "0") return false;
  throw ConfigError("config: '" + key + "' expects true/false, got '" + text + "'");
}

struct Field {
  std::function<void(RunConfig&, const std::string& key, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

using Registry = std::vector<std::pair<std::string, Field>>;  // "section.key" in echo order

template <typename Member>
Field double_field(Member member) {
  return {[member](RunConfig& c, const std::string& k, const std::string& v) {
            member(c) = parse_double(k, v);
          },
          [member](const RunConfig& c) {
            RunConfig copy = c;
            return format_double(member(copy));
          }};
}

template <typename Int, typename Member>
Field int_field(Member member) {
  return {[member](RunConfig& c, const std::string& k, const std::string& v) {
            member(c) = parse_int<Int>(k, v);
          },
          [member](const RunConfig& c) {
            RunConfig copy = c;
            return std::to_string(member(copy));
          }};
}

template <typename Member>
Field bool_field(Member member) {
  return {[member](RunConfig& c, const std::string& k, const std::string& v) {
            member(c) = parse_bool(k, v);
          },
          [member](const RunConfig& c) {
            RunConfig copy = c;
            return std::string(member(copy) ? "true" : "false");
          }};
}

#define OVERTAKE_REF(expr) [](RunConfig& c) -> auto& { return c.expr; }

const Registry& registry() {
  static const Registry reg = [] {
    Registry r;
    // [env]
    r.emplace_back("env.policy_hz", int_field<int>(OVERTAKE_REF(env.policy_hz)));
    r.emplace_back("env.sim_hz", int_field<int>(OVERTAKE_REF(env.sim_hz)));
    r.emplace_back("env.horizon_s", double_field(OVERTAKE_REF(env.horizon_s)));
    r.emplace_back("env.speed_step", double_field(OVERTAKE_REF(env.speed_step)));
    r.emplace_back("env.neighbors_k", int_field<int>(OVERTAKE_REF(env.neighbors_k)));
    r.emplace_back("env.obs_signed", bool_field(OVERTAKE_REF(env.obs_signed)));
    r.emplace_back("env.destination_m", double_field(OVERTAKE_REF(env.destination_m)));
    r.emplace_back("env.reference_speed", double_field(OVERTAKE_REF(env.reference_speed)));
    r.emplace_back("env.lane_count", int_field<int>(OVERTAKE_REF(env.road.lane_count)));
    r.emplace_back("env.lane_width", double_field(OVERTAKE_REF(env.road.lane_width)));
    r.emplace_back("env.vehicles_per_lane", int_field<int>(OVERTAKE_REF(env.scenario.vehicles_per_lane)));
    r.emplace_back("env.ego_speed_min", double_field(OVERTAKE_REF(env.scenario.ego_speed_min)));
    r.emplace_back("env.ego_speed_max", double_field(OVERTAKE_REF(env.scenario.ego_speed_max)));
    r.emplace_back("env.surrounding_speed_min", double_field(OVERTAKE_REF(env.scenario.surrounding_speed_min)));
    r.emplace_back("env.surrounding_speed_max", double_field(OVERTAKE_REF(env.scenario.surrounding_speed_max)));
    r.emplace_back("env.spacing_min", double_field(OVERTAKE_REF(env.scenario.spacing_min)));
    r.emplace_back("env.spacing_max", double_field(OVERTAKE_REF(env.scenario.spacing_max)));
    r.emplace_back("env.w_collision", double_field(OVERTAKE_REF(env.reward.w_collision)));
    r.emplace_back("env.w_speed", double_field(OVERTAKE_REF(env.reward.w_speed)));
    r.emplace_back("env.w_lane", double_field(OVERTAKE_REF(env.reward.w_lane)));
    r.emplace_back("env.v_max", double_field(OVERTAKE_REF(env.reward.v_max)));
    r.emplace_back("env.preferred_lane", int_field<int>(OVERTAKE_REF(env.reward.preferred_lane)));
    // [idm]
    r.emplace_back("idm.a_max", double_field(OVERTAKE_REF(env.driver.idm.a_max)));
    r.emplace_back("idm.delta", double_field(OVERTAKE_REF(env.driver.idm.delta)));
    r.emplace_back("idm.time_gap", double_field(OVERTAKE_REF(env.driver.idm.time_gap)));
    r.emplace_back("idm.b", double_field(OVERTAKE_REF(env.driver.idm.b)));
    r.emplace_back("idm.d0", double_field(OVERTAKE_REF(env.driver.idm.d0)));
    r.emplace_back("idm.formula",
                   Field{[](RunConfig& c, const std::string& k, const std::string& v) {
                           if (v == "standard") c.env.driver.idm.formula = GapFormula::kStandard;
                           else if (v == "relative") c.env.driver.idm.formula = GapFormula::kRelative;
                           else throw ConfigError("config: '" + k + "' expects standard|relative, got '" + v + "'");
                         },
                         [](const RunConfig& c) {
                           return std::string(c.env.driver.idm.formula == GapFormula::kRelative ? "relative" : "standard");
                         }});
    // [mobil]
    r.emplace_back("mobil.politeness", double_field(OVERTAKE_REF(env.driver.mobil.politeness)));
    r.emplace_back("mobil.b_safe", double_field(OVERTAKE_REF(env.driver.mobil.b_safe)));
    r.emplace_back("mobil.a_th", double_field(OVERTAKE_REF(env.driver.mobil.a_th)));
    // [gains]
    r.emplace_back("gains.k_p", double_field(OVERTAKE_REF(env.driver.gains.k_p)));
    r.emplace_back("gains.k_p_lat", double_field(OVERTAKE_REF(env.driver.gains.k_p_lat)));
    r.emplace_back("gains.k_p_heading", double_field(OVERTAKE_REF(env.driver.gains.k_p_heading)));
    r.emplace_back("gains.v_floor", double_field(OVERTAKE_REF(env.driver.gains.v_floor)));
    // [agent]
    r.emplace_back("agent.algorithm",
                   Field{[](RunConfig& c, const std::string&, const std::string& v) {
                           c.agent.algorithm = algorithm_from_string(v);
                         },
                         [](const RunConfig& c) { return std::string(to_string(c.agent.algorithm)); }});
    r.emplace_back("agent.gamma", double_field(OVERTAKE_REF(agent.gamma)));
    r.emplace_back("agent.tabular_alpha", double_field(OVERTAKE_REF(agent.tabular_alpha)));
    r.emplace_back("agent.nn_lr", double_field(OVERTAKE_REF(agent.nn_lr)));
    r.emplace_back("agent.optimizer",
                   Field{[](RunConfig&, const std::string& k, const std::string& v) {
                           if (v != "sgd") throw ConfigError("config: '" + k + "' supports only sgd");
                         },
                         [](const RunConfig&) { return std::string("sgd"); }});
    r.emplace_back("agent.batch", int_field<int>(OVERTAKE_REF(agent.batch)));
    r.emplace_back("agent.target_sync_steps", int_field<int>(OVERTAKE_REF(agent.target_sync_steps)));
    r.emplace_back("agent.buffer_capacity", int_field<int>(OVERTAKE_REF(agent.buffer_capacity)));
    r.emplace_back("agent.hidden", int_field<int>(OVERTAKE_REF(agent.hidden)));
    r.emplace_back("agent.train_every", int_field<int>(OVERTAKE_REF(agent.train_every)));
    r.emplace_back("agent.dueling_agg",
                   Field{[](RunConfig& c, const std::string& k, const std::string& v) {
                           if (v == "max") c.agent.dueling_aggregation = DuelingAggregation::kMax;
                           else if (v == "mean") c.agent.dueling_aggregation = DuelingAggregation::kMean;
                           else throw ConfigError("config: '" + k + "' expects max|mean, got '" + v + "'");
                         },
                         [](const RunConfig& c) {
                           return std::string(c.agent.dueling_aggregation == DuelingAggregation::kMean ? "mean" : "max");
                         }});
    r.emplace_back("agent.eps_start", double_field(OVERTAKE_REF(agent.epsilon.start)));
    r.emplace_back("agent.eps_end", double_field(OVERTAKE_REF(agent.epsilon.end)));
    r.emplace_back("agent.eps_decay_steps", int_field<std::int64_t>(OVERTAKE_REF(agent.epsilon.decay_steps)));
    // [train]
    r.emplace_back("train.episodes", int_field<int>(OVERTAKE_REF(train.episodes)));
    r.emplace_back("train.eval_episodes", int_field<int>(OVERTAKE_REF(train.eval_episodes)));
    r.emplace_back("train.final_window", double_field(OVERTAKE_REF(train.final_window)));
    // [io]
    r.emplace_back("io.checkpoint_every", int_field<int>(OVERTAKE_REF(io.checkpoint_every)));
    r.emplace_back("io.workers", int_field<int>(OVERTAKE_REF(io.workers)));
    return r;
  }();
  return reg;
}

#undef OVERTAKE_REF

const Field* find_field(const std::string& name) {
  for (const auto& [key, field] : registry())
    if (key == name) return &field;
  return nullptr;
}

}  // namespace

void RunConfig::validate() const {
  env.validate();
  agent.validate();
  if (train.episodes < 0) throw ConfigError("train: episodes must be >= 0");
  if (train.eval_episodes < 0) throw ConfigError("train: eval_episodes must be >= 0");
  if (!(train.final_window > 0.0 && train.final_window <= 1.0))
    throw ConfigError("train: final_window must be in (0, 1]");
  if (io.checkpoint_every < 0) throw ConfigError("io: checkpoint_every must be >= 0");
  if (io.workers < 1) throw ConfigError("io: workers must be >= 1");
}

RunConfig parse_config(std::string_view text) {
  static const std::set<std::string> sections{"env", "idm", "mobil", "gains", "agent", "train", "io"};
  RunConfig cfg;
  std::set<std::string> seen;
  std::string section;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find_first_of("#;");
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    const auto where = " (line " + std::to_string(line_no) + ")";
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("config: malformed section header" + where);
      section = trim(std::string_view(line).substr(1, line.size() - 2));
      if (!sections.contains(section)) throw ConfigError("config: unknown section [" + section + "]" + where);
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("config: expected key = value" + where);
    if (section.empty()) throw ConfigError("config: key outside of a section" + where);
    const std::string key = section + "." + trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    const Field* field = find_field(key);
    if (!field) throw ConfigError("config: unknown key '" + key + "'" + where);
    if (!seen.insert(key).second) throw ConfigError("config: duplicate key '" + key + "'" + where);
    field->set(cfg, key, value);
  }
  cfg.validate();
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read config file '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string echo_config(const RunConfig& cfg) {
  std::ostringstream out;
  std::string section;
  for (const auto& [key, field] : registry()) {
    const auto dot = key.find('.');
    const std::string sec = key.substr(0, dot);
    if (sec != section) {
      if (!section.empty()) out << '\n';
      out << '[' << sec << "]\n";
      section = sec;
    }
    out << key.substr(dot + 1) << " = " << field.get(cfg) << '\n';
  }
  return out.str();
}

}  // namespace overtake
