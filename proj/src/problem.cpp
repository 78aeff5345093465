#include "mwrc/problem.hpp"

#include <fstream>
#include <sstream>
#include <vector>

#include <nlohmann/json.hpp>

#include "mwrc/error.hpp"

namespace mwrc {

namespace {

using nlohmann::json;

[[noreturn]] void bad(const std::string& origin, const std::string& what) {
  fail(Errc::parse_error, origin + ": " + what);
}

const json& member(const json& j, const char* key, const std::string& origin) {
  auto it = j.find(key);
  if (it == j.end()) bad(origin, std::string("missing field '") + key + "'");
  return *it;
}

std::vector<int> int_array(const json& j, const std::string& origin,
                           const std::string& field) {
  if (!j.is_array()) bad(origin, field + " must be an array");
  std::vector<int> out;
  for (const auto& v : j) {
    if (!v.is_number_integer()) bad(origin, field + " must hold integers");
    out.push_back(v.get<int>());
  }
  return out;
}

Eigen::VectorXd number_array(const json& j, const std::string& origin,
                             const std::string& field) {
  if (!j.is_array()) bad(origin, field + " must be an array");
  Eigen::VectorXd out(j.size());
  Eigen::Index i = 0;
  for (const auto& v : j) {
    if (!v.is_number()) bad(origin, field + " must hold numbers");
    out[i++] = v.get<double>();
  }
  return out;
}

// "w1,w2,...,wL" -> flat row-major index.
std::int64_t sparse_key_index(const std::string& key,
                              const std::vector<int>& alphabet_sizes,
                              const std::string& origin) {
  std::istringstream in(key);
  std::int64_t flat = 0;
  for (std::size_t i = 0; i < alphabet_sizes.size(); ++i) {
    int sym = 0;
    char sep = 0;
    if (!(in >> sym)) bad(origin, "sparse key '" + key + "' is malformed");
    if (sym < 0 || sym >= alphabet_sizes[i])
      bad(origin, "sparse key '" + key + "' has symbol " + std::to_string(sym) +
                      " outside alphabet " + std::to_string(i + 1));
    flat = flat * alphabet_sizes[i] + sym;
    if (i + 1 < alphabet_sizes.size() && (!(in >> sep) || sep != ','))
      bad(origin, "sparse key '" + key + "' has too few symbols");
  }
  char extra = 0;
  if (in >> extra) bad(origin, "sparse key '" + key + "' has trailing content");
  return flat;
}

JointPmf parse_source(const json& j, const std::string& origin) {
  const auto alphabet = int_array(member(j, "alphabet_sizes", origin), origin,
                                  "source.alphabet_sizes");
  std::int64_t n = 1;
  for (int a : alphabet) {
    if (a < 1) bad(origin, "source.alphabet_sizes entries must be positive");
    n *= a;
    if (n > kMaxOutcomes) bad(origin, "source table too large");
  }
  Eigen::VectorXd probs;
  if (j.contains("probs")) {
    probs = number_array(j["probs"], origin, "source.probs");
  } else if (j.contains("sparse_probs")) {
    const json& sp = j["sparse_probs"];
    if (!sp.is_object()) bad(origin, "source.sparse_probs must be an object");
    probs = Eigen::VectorXd::Zero(n);
    for (auto it = sp.begin(); it != sp.end(); ++it) {
      if (!it.value().is_number())
        bad(origin, "source.sparse_probs values must be numbers");
      probs[sparse_key_index(it.key(), alphabet, origin)] +=
          it.value().get<double>();
    }
  } else {
    bad(origin, "source needs either 'probs' or 'sparse_probs'");
  }
  try {
    return validate(alphabet, probs);
  } catch (const Error& e) {
    throw Error(e.code(), origin + ": source: " + e.message());
  }
}

ChannelSpec parse_channel(const json& j, const std::string& origin) {
  const json& qj = member(j, "q", origin);
  if (!qj.is_number_integer()) bad(origin, "channel.q must be an integer");
  const int q = qj.get<int>();
  const Eigen::VectorXd relay = number_array(member(j, "noise_relay", origin),
                                             origin, "channel.noise_relay");
  const json& nu = member(j, "noise_users", origin);
  if (!nu.is_array()) bad(origin, "channel.noise_users must be an array");
  std::vector<Eigen::VectorXd> users;
  for (std::size_t i = 0; i < nu.size(); ++i)
    users.push_back(number_array(nu[i], origin,
                                 "channel.noise_users[" + std::to_string(i) + "]"));
  try {
    return validate_channel(q, relay, users);
  } catch (const Error& e) {
    throw Error(e.code(), origin + ": channel: " + e.message());
  }
}

void parse_sim(const json& j, const std::string& origin, SimConfig& cfg) {
  if (!j.is_object()) bad(origin, "sim must be an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& k = it.key();
    const json& v = it.value();
    if (k == "m") {
      if (!v.is_number_integer()) bad(origin, "sim.m must be an integer");
      cfg.m = v.get<int>();
    } else if (k == "kappa") {
      if (!v.is_number()) bad(origin, "sim.kappa must be a number");
      cfg.kappa = v.get<double>();
    } else if (k == "trials") {
      if (!v.is_number_integer()) bad(origin, "sim.trials must be an integer");
      cfg.trials = v.get<int>();
    } else if (k == "seed") {
      if (!v.is_number_unsigned() && !v.is_number_integer())
        bad(origin, "sim.seed must be an integer");
      cfg.seed = v.get<std::uint64_t>();
    } else if (k == "mode") {
      if (!v.is_string()) bad(origin, "sim.mode must be a string");
      const std::string mode = v.get<std::string>();
      if (mode == "ideal")
        cfg.mode = SimMode::ideal_channel;
      else if (mode == "symbol")
        cfg.mode = SimMode::symbol_level;
      else
        bad(origin, "sim.mode must be 'ideal' or 'symbol'");
    } else if (k == "use_dither") {
      if (!v.is_boolean()) bad(origin, "sim.use_dither must be a boolean");
      cfg.use_dither = v.get<bool>();
    } else if (k == "binning_rates") {
      cfg.binning_rates = number_array(v, origin, "sim.binning_rates");
    } else {
      bad(origin, "sim has unknown field '" + k + "'");
    }
  }
}

}  // namespace

Problem parse_problem(const std::string& json_text, const std::string& origin) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::exception& e) {
    bad(origin, std::string("invalid JSON: ") + e.what());
  }
  if (!root.is_object()) bad(origin, "top level must be an object");
  if (root.contains("version")) {
    const json& v = root["version"];
    if (!v.is_number_integer() || v.get<int>() != 1)
      bad(origin, "unsupported problem file version");
  }

  Problem p;
  p.source = parse_source(member(root, "source", origin), origin);
  if (root.contains("channel"))
    p.channel = parse_channel(root["channel"], origin);
  if (root.contains("sim")) {
    parse_sim(root["sim"], origin, p.sim);
    p.has_sim = true;
  }
  if (p.channel && p.channel->L() != p.source.L)
    bad(origin, "source has L=" + std::to_string(p.source.L) +
                    " users but channel lists " + std::to_string(p.channel->L()) +
                    " noise pmfs");
  return p;
}

Problem load_problem(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::parse_error, path + ": cannot open file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_problem(buf.str(), path);
}

const ChannelSpec& require_channel(const Problem& p, const std::string& why) {
  if (!p.channel)
    fail(Errc::parse_error, why + " needs a 'channel' section in the problem file");
  return *p.channel;
}

}  // namespace mwrc
