#include "mwrc/cli.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "mwrc/abcmi.hpp"
#include "mwrc/error.hpp"
#include "mwrc/problem.hpp"
#include "mwrc/rates.hpp"
#include "mwrc/simulator.hpp"

namespace mwrc::cli {

namespace {

using nlohmann::json;

std::string f9(double v) {
  if (v == 0.0) v = 0.0;  // fold -0 into 0
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9f", v);
  return buf;
}

std::string vec9(const Eigen::VectorXd& v) {
  std::string s = "[";
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i) s += ", ";
    s += f9(v[i]);
  }
  return s + "]";
}

std::vector<double> to_std(const Eigen::VectorXd& v) {
  return {v.data(), v.data() + v.size()};
}

void write_json(const std::string& path, const json& j) {
  std::ofstream f(path, std::ios::binary);
  if (!f) fail(Errc::parse_error, path + ": cannot open for writing");
  f << j.dump(2) << "\n";
}

json abcmi_json(const AbcmiReport& report) {
  json j;
  j["L"] = report.L;
  j["overall"] = report.overall;
  j["negative_atoms"] = report.negative_atoms;
  json ws = json::array();
  for (const auto& w : report.weights) {
    json rec;
    rec["weight"] = w.weight;
    rec["mu_max"] = w.mu_max;
    rec["mu_min"] = w.mu_min;
    rec["bound"] = w.bound;
    rec["satisfied"] = w.satisfied;
    rec["negative_atom"] = w.negative_atom;
    ws.push_back(rec);
  }
  j["weights"] = ws;
  return j;
}

json rates_json(const RateTuple& rt, const RegionReport& reg) {
  json j;
  j["r"] = to_std(rt.r);
  j["clamped"] = rt.clamped;
  j["hard_negative"] = rt.hard_negative;
  j["c1"] = reg.c1;
  j["c2"] = reg.c2;
  json cs = json::array();
  for (const auto& c : reg.constraints) {
    json rec;
    rec["S"] = subset_to_string(c.S);
    rec["lhs"] = c.lhs;
    rec["rhs"] = c.rhs;
    rec["slack"] = c.slack;
    cs.push_back(rec);
  }
  j["constraints"] = cs;
  return j;
}

void print_abcmi(std::ostream& out, const AbcmiReport& report) {
  if (report.weights.empty())
    out << "abcmi: holds vacuously (L=" << report.L << " has no tested weights)\n";
  for (const auto& w : report.weights) {
    out << "abcmi K=" << w.weight << ": mu_max=" << f9(w.mu_max)
        << " mu_min=" << f9(w.mu_min) << " bound=" << f9(w.bound) << " -> "
        << (w.satisfied ? "ok" : "violated")
        << (w.negative_atom ? " (negative atom present)" : "") << "\n";
  }
  out << "abcmi overall: " << (report.overall ? "HOLDS" : "FAILS") << "\n";
}

void print_rates(std::ostream& out, const JointPmf& pmf, const RateTuple& rt,
                 const RegionReport& reg) {
  out << "rates: r = " << vec9(rt.r) << "\n";
  if (rt.clamped) out << "rates: tiny negative entries clamped to 0\n";
  if (rt.hard_negative)
    out << "rates: WARNING: tuple has a negative entry beyond tolerance\n";
  if (pmf.L <= 6) {
    for (const auto& c : reg.constraints)
      out << "  S=" << subset_to_string(c.S) << " sum=" << f9(c.lhs)
          << " needs>=" << f9(c.rhs) << " slack=" << f9(c.slack)
          << (subset_size(c.S) == pmf.L - 1 ? " (equality)" : "") << "\n";
  } else {
    out << "  (" << reg.constraints.size()
        << " subset constraints; listing suppressed for L>6)\n";
  }
  out << "conditions: C1 " << (reg.c1 ? "PASS" : "FAIL") << ", C2 "
      << (reg.c2 ? "PASS" : "FAIL") << "\n";
}

struct Handlers {
  std::ostream& out;
  std::ostream& err;

  int analyze(const Problem& p, const std::string& out_path) {
    const JointPmf& pmf = p.source;
    const SubsetMask full = full_mask(pmf.L);
    const Eigen::VectorXd h = subset_entropies(pmf);
    const AtomTable atoms = compute_atoms(pmf);
    const AbcmiReport ab = check_abcmi(atoms);
    const RateTuple rt = assign_rates(atoms);
    const RegionReport reg = check_conditions(pmf, rt);

    out << "source: L=" << pmf.L << " alphabets=[";
    for (int i = 0; i < pmf.L; ++i)
      out << (i ? "," : "") << pmf.alphabet_sizes[i];
    out << "] outcomes=" << pmf.n_outcomes() << "\n";
    out << "joint entropy: H(W_all) = " << f9(h[full]) << "\n";
    if (pmf.L <= 6) {
      for (SubsetMask S = 1; S <= full; ++S)
        out << "  H" << subset_to_string(S) << " = " << f9(h[S]) << "\n";
      out << "atoms (mask set weight mu):\n";
      for (SubsetMask K = 1; K <= full; ++K)
        out << "  " << K << " " << subset_to_string(K) << " " << subset_size(K)
            << " " << f9(atoms.mu[K]) << "\n";
    } else {
      out << "  (" << (Eigen::Index(full)) << " subsets; listing suppressed for L>6)\n";
    }
    print_abcmi(out, ab);
    print_rates(out, pmf, rt, reg);

    json j;
    j["command"] = "analyze";
    j["source"]["L"] = pmf.L;
    j["source"]["alphabet_sizes"] = pmf.alphabet_sizes;
    {
      json ent, at;
      for (SubsetMask S = 1; S <= full; ++S) {
        ent[subset_to_string(S)] = h[S];
        at[subset_to_string(S)] = atoms.mu[S];
      }
      j["entropies"] = ent;
      j["atoms"] = at;
    }
    j["abcmi"] = abcmi_json(ab);
    j["rates"] = rates_json(rt, reg);

    if (p.channel) {
      const ChannelSpec& ch = *p.channel;
      const Eigen::VectorXd cap = capacity_terms(ch);
      out << "channel: q=" << ch.q << " H(N0)=" << f9(noise_entropy(ch.noise_relay))
          << " capacity terms=" << vec9(cap) << "\n";
      const double ks = kappa_star(pmf, ch);
      out << "kappa_star = " << f9(ks) << "\n";
      j["channel"]["q"] = ch.q;
      j["channel"]["capacity_terms"] = to_std(cap);
      j["channel"]["noise_entropy_relay"] = noise_entropy(ch.noise_relay);
      j["kappa_star"] = ks;
    }
    if (!out_path.empty()) write_json(out_path, j);
    return 0;
  }

  int abcmi(const Problem& p, const std::string& out_path) {
    const AtomTable atoms = compute_atoms(p.source);
    const AbcmiReport report = check_abcmi(atoms);
    print_abcmi(out, report);
    if (!out_path.empty()) {
      json j;
      j["command"] = "abcmi";
      j["abcmi"] = abcmi_json(report);
      write_json(out_path, j);
    }
    return report.overall ? 0 : 1;
  }

  int rates(const Problem& p, const std::string& out_path) {
    const AtomTable atoms = compute_atoms(p.source);
    const RateTuple rt = assign_rates(atoms);
    const RegionReport reg = check_conditions(p.source, rt);
    print_rates(out, p.source, rt, reg);
    if (!out_path.empty()) {
      json j;
      j["command"] = "rates";
      j["rates"] = rates_json(rt, reg);
      write_json(out_path, j);
    }
    return (reg.c1 && reg.c2) ? 0 : 1;
  }

  int kappa(const Problem& p, const std::string& out_path) {
    const ChannelSpec& ch = require_channel(p, "kappa");
    const double ks = kappa_star(p.source, ch);
    out << "kappa_star = " << f9(ks) << "\n";
    const std::optional<double> kmin = min_feasible_kappa(p.source, ch);
    if (kmin)
      out << "min feasible kappa = " << f9(*kmin) << "\n";
    else
      out << "min feasible kappa: none within search range\n";
    if (!out_path.empty()) {
      json j;
      j["command"] = "kappa";
      j["kappa_star"] = ks;
      if (kmin)
        j["min_feasible_kappa"] = *kmin;
      else
        j["min_feasible_kappa"] = nullptr;
      write_json(out_path, j);
    }
    return 0;
  }

  int feasible(const Problem& p, double kappa_value, const std::string& out_path) {
    const ChannelSpec& ch = require_channel(p, "feasible");
    const Feasibility f = intersection_feasible(p.source, ch, kappa_value);
    out << "kappa = " << f9(kappa_value) << "\n";
    out << "intersection: " << (f.feasible ? "FEASIBLE" : "INFEASIBLE") << "\n";
    if (f.feasible) out << "witness r = " << vec9(f.witness) << "\n";
    if (!out_path.empty()) {
      json j;
      j["command"] = "feasible";
      j["kappa"] = kappa_value;
      j["feasible"] = f.feasible;
      if (f.feasible) j["witness"] = to_std(f.witness);
      write_json(out_path, j);
    }
    return f.feasible ? 0 : 1;
  }

  static json sim_config_json(const SimConfig& cfg) {
    json j;
    j["m"] = cfg.m;
    j["trials"] = cfg.trials;
    j["seed"] = cfg.seed;
    j["mode"] = cfg.mode == SimMode::ideal_channel ? "ideal" : "symbol";
    j["use_dither"] = cfg.use_dither;
    return j;
  }

  static json sim_result_json(const SimResult& res) {
    json j;
    j["pe_overall"] = res.pe_overall;
    j["pe_per_user"] = to_std(res.pe_per_user);
    j["wilson_lo"] = res.wilson_lo;
    j["wilson_hi"] = res.wilson_hi;
    j["trials_run"] = res.trials_run;
    j["delivered"] = res.delivered;
    j["bin_bits"] = res.bin_bits;
    return j;
  }

  int simulate(const Problem& p, SimConfig cfg, const std::vector<double>& kappas,
               const std::string& out_path) {
    const ChannelSpec& ch = require_channel(p, "simulate");
    if (kappas.size() > 1) return sweep(p, cfg, kappas, out_path);
    if (!kappas.empty()) cfg.kappa = kappas[0];

    const SimResult res = run_sim(p.source, ch, cfg);
    out << "mode: "
        << (cfg.mode == SimMode::ideal_channel ? "ideal" : "symbol")
        << " m=" << cfg.m << " kappa=" << f9(cfg.kappa)
        << " trials=" << cfg.trials << " seed=" << cfg.seed
        << " dither=" << (cfg.use_dither ? "on" : "off") << "\n";
    out << "bin bits per user: [";
    for (std::size_t i = 0; i < res.bin_bits.size(); ++i)
      out << (i ? "," : "") << res.bin_bits[i];
    out << "]\n";
    out << "delivered: " << (res.delivered ? "yes" : "no") << "\n";
    out << "pe_overall = " << f9(res.pe_overall) << " (95% Wilson ["
        << f9(res.wilson_lo) << ", " << f9(res.wilson_hi) << "])\n";
    out << "pe_per_user = " << vec9(res.pe_per_user) << "\n";
    if (!out_path.empty()) {
      json j;
      j["command"] = "simulate";
      j["config"] = sim_config_json(cfg);
      j["config"]["kappa"] = cfg.kappa;
      j["result"] = sim_result_json(res);
      write_json(out_path, j);
    }
    return 0;
  }

  int sweep(const Problem& p, SimConfig cfg, const std::vector<double>& kappas,
            const std::string& out_path) {
    const ChannelSpec& ch = require_channel(p, "simulate");
    out << "sweep: mode="
        << (cfg.mode == SimMode::ideal_channel ? "ideal" : "symbol")
        << " m=" << cfg.m << " trials=" << cfg.trials << " seed=" << cfg.seed
        << " dither=" << (cfg.use_dither ? "on" : "off") << "\n";
    out << "kappa         delivered  pe_overall    wilson_lo     wilson_hi\n";
    json sweep_rows = json::array();
    for (double k : kappas) {
      cfg.kappa = k;
      const SimResult res = run_sim(p.source, ch, cfg);
      char line[160];
      std::snprintf(line, sizeof line, "%-13s %-10s %-13s %-13s %s",
                    f9(k).c_str(), res.delivered ? "yes" : "no",
                    f9(res.pe_overall).c_str(), f9(res.wilson_lo).c_str(),
                    f9(res.wilson_hi).c_str());
      out << line << "\n";
      json rec = sim_result_json(res);
      rec["kappa"] = k;
      sweep_rows.push_back(rec);
    }
    if (!out_path.empty()) {
      json j;
      j["command"] = "simulate";
      j["config"] = sim_config_json(cfg);
      j["config"]["kappa_list"] = kappas;
      j["sweep"] = sweep_rows;
      write_json(out_path, j);
    }
    return 0;
  }
};

int env_threads() {
  const char* v = std::getenv("MWRC_THREADS");
  if (!v) return 0;
  char* end = nullptr;
  const long n = std::strtol(v, &end, 10);
  if (end == v || *end != '\0' || n < 1 || n > 4096) return 0;
  return static_cast<int>(n);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"finite-field multi-way relay channel toolkit"};
  app.name("mwrc");
  app.require_subcommand(1);

  std::string an_file, an_out;
  auto* an = app.add_subcommand(
      "analyze", "entropies, atoms, abcmi, rates and threshold for a problem");
  an->add_option("problem", an_file, "problem file (JSON)")->required();
  an->add_option("--out", an_out, "write a machine-readable JSON report");

  std::string ab_file, ab_out;
  auto* ab = app.add_subcommand("abcmi", "check the per-weight spread condition");
  ab->add_option("problem", ab_file, "problem file (JSON)")->required();
  ab->add_option("--out", ab_out, "write a machine-readable JSON report");

  std::string ra_file, ra_out;
  auto* ra = app.add_subcommand("rates", "construct the rate tuple and check it");
  ra->add_option("problem", ra_file, "problem file (JSON)")->required();
  ra->add_option("--out", ra_out, "write a machine-readable JSON report");

  std::string ka_file, ka_out;
  auto* ka = app.add_subcommand(
      "kappa", "per-symbol threshold and smallest feasible channel budget");
  ka->add_option("problem", ka_file, "problem file (JSON)")->required();
  ka->add_option("--out", ka_out, "write a machine-readable JSON report");

  std::string fe_file, fe_out;
  double fe_kappa = 0.0;
  auto* fe = app.add_subcommand(
      "feasible", "does the source region meet the scaled channel region?");
  fe->add_option("problem", fe_file, "problem file (JSON)")->required();
  fe->add_option("--kappa", fe_kappa, "channel uses per source symbol")->required();
  fe->add_option("--out", fe_out, "write a machine-readable JSON report");

  std::string si_file, si_out, si_mode;
  std::vector<double> si_kappa;
  int si_m = 0, si_trials = 0, si_threads = 0;
  std::uint64_t si_seed = 0;
  std::vector<double> si_rates;
  bool si_no_dither = false;
  auto* si = app.add_subcommand("simulate",
                                "Monte Carlo run of the dithered binning scheme");
  si->add_option("problem", si_file, "problem file (JSON)")->required();
  si->add_option("--kappa", si_kappa,
                 "channel uses per source symbol; a comma list runs a sweep")
      ->delimiter(',');
  si->add_option("--m", si_m, "block length");
  si->add_option("--trials", si_trials, "number of trials");
  si->add_option("--seed", si_seed, "master seed");
  si->add_option("--mode", si_mode, "ideal|symbol")
      ->check(CLI::IsMember({"ideal", "symbol"}));
  si->add_option("--rates", si_rates, "override binning rates r1,r2,...")
      ->delimiter(',');
  si->add_flag("--no-dither", si_no_dither, "disable the index dithers");
  si->add_option("--threads", si_threads, "worker threads (default MWRC_THREADS or 1)");
  si->add_option("--out", si_out, "write a machine-readable JSON report");

  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  argv.push_back("mwrc");
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    const auto subs = app.get_subcommands();
    out << (subs.empty() ? app.help() : subs[0]->help());
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    return 2;
  }

  Handlers h{out, err};
  try {
    if (app.got_subcommand(an)) return h.analyze(load_problem(an_file), an_out);
    if (app.got_subcommand(ab)) return h.abcmi(load_problem(ab_file), ab_out);
    if (app.got_subcommand(ra)) return h.rates(load_problem(ra_file), ra_out);
    if (app.got_subcommand(ka)) return h.kappa(load_problem(ka_file), ka_out);
    if (app.got_subcommand(fe))
      return h.feasible(load_problem(fe_file), fe_kappa, fe_out);
    if (app.got_subcommand(si)) {
      Problem p = load_problem(si_file);
      SimConfig cfg = p.sim;
      if (si->count("--m")) cfg.m = si_m;
      if (si->count("--trials")) cfg.trials = si_trials;
      if (si->count("--seed")) cfg.seed = si_seed;
      if (si->count("--mode"))
        cfg.mode = si_mode == "ideal" ? SimMode::ideal_channel
                                      : SimMode::symbol_level;
      if (si->count("--rates"))
        cfg.binning_rates = Eigen::Map<const Eigen::VectorXd>(
            si_rates.data(), static_cast<Eigen::Index>(si_rates.size()));
      if (si_no_dither) cfg.use_dither = false;
      cfg.threads = 1;
      if (const int t = env_threads()) cfg.threads = t;
      if (si->count("--threads")) cfg.threads = si_threads;
      return h.simulate(p, cfg, si_kappa, si_out);
    }
  } catch (const Error& e) {
    err << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  err << "usage error: no subcommand\n";
  return 2;
}

}  // namespace mwrc::cli
